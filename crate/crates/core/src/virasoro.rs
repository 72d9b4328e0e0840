//! Constraint operators `L_m` at fixed center-of-mass momentum, bracket
//! closure verification with a measured central coefficient, and exact
//! on-shell momentum construction.
//!
//! The zero mode never appears as an oscillator: momentum enters only
//! through the explicit `α_m·p` term and the `½p²` piece of `L₀`. For
//! `m ≠ 0` the quadratic sum runs over `n ∉ {0, m}`, where the two factors
//! always commute, so no ordering choice arises.

use std::fmt;

use thiserror::Error;

use crate::fock::FockVector;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum VirasoroError {
    #[error("momentum dimension {got} does not match Fock dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
}

/// Center-of-mass momentum with signature `(−,+,…,+)`.
#[derive(Clone, PartialEq, Debug)]
pub struct Momentum<S: Scalar> {
    components: Vec<S>,
}

impl<S: Scalar> Momentum<S> {
    pub fn new(components: Vec<S>) -> Self {
        assert!(!components.is_empty());
        Momentum { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, mu: usize) -> &S {
        &self.components[mu]
    }

    pub fn components(&self) -> &[S] {
        &self.components
    }

    /// Lowered component `p_μ = η_{μμ} p^μ`.
    pub fn lowered(&self, mu: usize) -> S {
        if mu == 0 {
            -self.components[0].clone()
        } else {
            self.components[mu].clone()
        }
    }

    /// Minkowski square `p² = −(p⁰)² + |p⃗|²`.
    pub fn minkowski_square(&self) -> S {
        let mut acc = -(self.components[0].clone() * self.components[0].clone());
        for c in &self.components[1..] {
            acc += c.clone() * c.clone();
        }
        acc
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Momentum<T> {
        Momentum {
            components: self.components.iter().map(f).collect(),
        }
    }
}

impl<S: Scalar> fmt::Display for Momentum<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Requested sheet for on-shell momentum construction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sheet {
    Plus,
    Minus,
    Any,
}

/// Deterministic rational point on `V_r = {p² + r = 0}`, adjusting only the
/// first two components: `p = s·(1 + r/(4s²), 1 − r/(4s²), 0, …)` scaled by
/// `scale = s`. For `r ≥ 0` the plus sheet has `p⁰ > 0` automatically.
pub fn rational_shell_point_scaled<S: Scalar>(
    r: &S,
    d: usize,
    sheet: Sheet,
    scale: i64,
) -> Momentum<S> {
    assert!(d >= 2, "need at least two dimensions");
    assert!(scale > 0);
    let s = S::from_int(scale);
    let quarter = r.clone() / (S::from_int(4) * s.clone());
    let mut p0 = s.clone() + quarter.clone();
    let p1 = s - quarter;
    if sheet == Sheet::Minus {
        p0 = -p0;
    }
    let mut components = vec![S::zero(); d];
    components[0] = p0;
    components[1] = p1;
    Momentum::new(components)
}

/// Default-scale shell point; `p = (1 + r/4, 1 − r/4, 0, …)`.
pub fn rational_shell_point<S: Scalar>(r: &S, d: usize, sheet: Sheet) -> Momentum<S> {
    rational_shell_point_scaled(r, d, sheet, 1)
}

/// Constraint operator `L_m` at momentum `p` applied to a finite-level state:
/// `L₀ = ½p² + N`, and for `m ≠ 0`
/// `L_m = α_m·p + ½ Σ_{n ∉ {0,m}} α_{m−n}·α_n`.
///
/// Term-driven evaluation: every quadratic contribution is indexed by the
/// occupied slots of each monomial (plus the pure-creation pairs for
/// `m < 0`), so nothing scans empty mode/direction combinations. For a
/// slot of mode `s` the two summands `n = s` and `n = m − s` produce the
/// same occupation hop `s → s − m`; their metric signs square away and the
/// ½ cancels, leaving the bare contraction factor.
pub fn apply_l<S: Scalar>(
    m: i64,
    p: &Momentum<S>,
    v: &FockVector<S>,
) -> Result<FockVector<S>, VirasoroError> {
    if p.dim() != v.dim() {
        return Err(VirasoroError::DimensionMismatch {
            got: p.dim(),
            want: v.dim(),
        });
    }
    let mut emits = Vec::new();
    emit_l(m, p, v, &S::one(), &mut emits);
    Ok(FockVector::from_emissions(v.dim(), emits))
}

/// Emits `scale · L_m v` into a shared buffer (merged by the caller).
fn emit_l<S: Scalar>(
    m: i64,
    p: &Momentum<S>,
    v: &FockVector<S>,
    scale: &S,
    emits: &mut Vec<(crate::fock::Occupation, S)>,
) {
    if v.is_zero() || scale.is_zero() {
        return;
    }
    let d = v.dim();
    if m == 0 {
        let half_p2 = p.minkowski_square() / S::from_int(2);
        for (occ, coeff) in v.terms() {
            let eig = half_p2.clone() + S::from_int(occ.level() as i64);
            emits.push((*occ, scale.clone() * coeff.clone() * eig));
        }
        return;
    }

    let half = S::one() / S::from_int(2);
    for (occ, raw_coeff) in v.terms() {
        let coeff = scale.clone() * raw_coeff.clone();
        // Momentum term α_m·p = Σ_μ p_μ α_m^μ.
        if m < 0 {
            let mode = (-m) as u32;
            for mu in 0..d {
                let pc = p.lowered(mu);
                if pc.is_zero() {
                    continue;
                }
                emits.push((
                    occ.with_added(crate::fock::ModeLabel::new(mode, mu as u32)),
                    coeff.clone() * pc,
                ));
            }
        } else {
            for (label, count) in occ.slots() {
                if label.n as i64 != m {
                    continue;
                }
                let pc = p.lowered(label.mu as usize);
                if pc.is_zero() {
                    continue;
                }
                let (reduced, _) = occ.with_removed(label).expect("slot present");
                let factor = S::from_int(m * count as i64 * label.eta_sign());
                emits.push((reduced, coeff.clone() * pc * factor));
            }
        }

        if m > 0 {
            // Both-annihilator pairs (a, b), a + b = m, a, b ≥ 1.
            for b in 1..m {
                let a = m - b;
                for (label, count_b) in occ.slots() {
                    if label.n as i64 != b {
                        continue;
                    }
                    let (occ1, _) = occ.with_removed(label).expect("slot present");
                    let f1 = S::from_int(b * count_b as i64 * label.eta_sign());
                    let label_a = crate::fock::ModeLabel::new(a as u32, label.mu);
                    if let Some((occ2, count_a)) = occ1.with_removed(label_a) {
                        let f2 = S::from_int(a * count_a as i64 * label_a.eta_sign());
                        let eta = S::from_int(label.eta_sign());
                        emits.push((occ2, coeff.clone() * half.clone() * eta * f1 * f2));
                    }
                }
            }
            // Hops: slots of mode s > m move to mode s − m in place; the two
            // summands combine to the plain contraction factor s·count.
            for (label, count) in occ.slots() {
                let s = label.n as i64;
                if s <= m {
                    continue;
                }
                let (occ1, _) = occ.with_removed(label).expect("slot present");
                let occ2 =
                    occ1.with_added(crate::fock::ModeLabel::new((s - m) as u32, label.mu));
                emits.push((occ2, coeff.clone() * S::from_int(s * count as i64)));
            }
        } else {
            // Both-creator pairs (a, b), a + b = m, a, b ≤ −1, every
            // direction, ½ η_{μμ} each.
            for b in (m + 1)..0 {
                let a = m - b;
                for mu in 0..d {
                    let eta = S::from_int(if mu == 0 { -1 } else { 1 });
                    let occ2 = occ
                        .with_added(crate::fock::ModeLabel::new((-b) as u32, mu as u32))
                        .with_added(crate::fock::ModeLabel::new((-a) as u32, mu as u32));
                    emits.push((occ2, coeff.clone() * half.clone() * eta));
                }
            }
            // Hops: every slot of mode s moves to mode s + |m| in place.
            for (label, count) in occ.slots() {
                let s = label.n as i64;
                let (occ1, _) = occ.with_removed(label).expect("slot present");
                let occ2 =
                    occ1.with_added(crate::fock::ModeLabel::new((s - m) as u32, label.mu));
                emits.push((occ2, coeff.clone() * S::from_int(s * count as i64)));
            }
        }
    }
}

/// Reference evaluation of `L_m` straight from the operator sum; quadratic
/// cost, used to cross-check the term-driven path.
pub fn apply_l_reference<S: Scalar>(
    m: i64,
    p: &Momentum<S>,
    v: &FockVector<S>,
) -> Result<FockVector<S>, VirasoroError> {
    if p.dim() != v.dim() {
        return Err(VirasoroError::DimensionMismatch {
            got: p.dim(),
            want: v.dim(),
        });
    }
    let d = v.dim();
    if m == 0 {
        let half_p2 = p.minkowski_square() / S::from_int(2);
        return Ok(v.scaled(&half_p2).plus(&v.number_op()));
    }
    let mut out = FockVector::zero(d);
    for mu in 0..d {
        let coeff = p.lowered(mu);
        if coeff.is_zero() {
            continue;
        }
        let term = v.apply_alpha(mu as u32, m).expect("nonzero mode");
        out = out.plus(&term.scaled(&coeff));
    }
    let level = v.max_level() as i64;
    let half = S::one() / S::from_int(2);
    for n in -(level + m.abs())..=(level + m.abs()) {
        if n == 0 || n == m {
            continue;
        }
        let a = m - n;
        for mu in 0..d {
            let inner = v.apply_alpha(mu as u32, n).expect("nonzero");
            if inner.is_zero() {
                continue;
            }
            let outer = inner.apply_alpha(mu as u32, a).expect("nonzero");
            if outer.is_zero() {
                continue;
            }
            let eta = S::from_int(if mu == 0 { -1 } else { 1 });
            out = out.plus(&outer.scaled(&(half.clone() * eta)));
        }
    }
    Ok(out)
}

/// Result of sweeping `([L_m, L_n] − (m−n) L_{m+n}) v` over a probe basis.
#[derive(Clone, Debug)]
pub struct ClosureReport<S: Scalar> {
    pub m: i64,
    pub n: i64,
    pub d: usize,
    pub probe_level: u64,
    pub probes: usize,
    /// Whether every residual was the same scalar multiple of its probe
    /// (zero when `m + n ≠ 0`).
    pub matches_closure: bool,
    /// The measured central scalar `c` with residual `= c·δ_{m+n,0}·v`.
    pub central_coefficient: S,
    pub first_failure: Option<String>,
}

/// Verifies bracket closure on every PBW monomial of level ≤ `probe_level`
/// and measures the central coefficient. Nothing is assumed about the
/// central term: it is read off the computation.
pub fn virasoro_bracket<S: Scalar>(
    m: i64,
    n: i64,
    p: &Momentum<S>,
    probe_level: u64,
) -> ClosureReport<S> {
    virasoro_bracket_jobs(m, n, p, probe_level, 1)
}

struct ChunkOutcome<S: Scalar> {
    probes: usize,
    failure: Option<String>,
    measured: Option<S>,
}

fn bracket_chunk<S: Scalar>(
    m: i64,
    n: i64,
    p: &Momentum<S>,
    probes: &[crate::fock::Occupation],
) -> ChunkOutcome<S> {
    let d = p.dim();
    let central_expected = m + n == 0;
    let mut outcome = ChunkOutcome {
        probes: 0,
        failure: None,
        measured: None,
    };
    let mut emits = Vec::new();
    for occ in probes {
        let v = FockVector::monomial(d, *occ);
        outcome.probes += 1;
        let ln_v = apply_l(n, p, &v).unwrap();
        let lm_v = apply_l(m, p, &v).unwrap();
        // Residual emissions L_m L_n v − L_n L_m v − (m−n) L_{m+n} v,
        // merged in one pass.
        emits.clear();
        emit_l(m, p, &ln_v, &S::one(), &mut emits);
        emit_l(n, p, &lm_v, &-S::one(), &mut emits);
        emit_l(m + n, p, &v, &S::from_int(n - m), &mut emits);
        let residual = FockVector::from_emissions(d, std::mem::take(&mut emits));

        if central_expected {
            // Residual must be c·v with a probe-independent scalar c.
            let c = residual.coefficient(occ);
            let remainder = residual.minus(&v.scaled(&c));
            if !remainder.is_zero() {
                if outcome.failure.is_none() {
                    outcome.failure = Some(format!("non-scalar residual on probe {occ}"));
                }
                continue;
            }
            match &outcome.measured {
                None => outcome.measured = Some(c),
                Some(prev) if *prev != c => {
                    if outcome.failure.is_none() {
                        outcome.failure = Some(format!(
                            "central scalar varies across probes: {prev} vs {c}"
                        ));
                    }
                }
                _ => {}
            }
        } else if !residual.is_zero() && outcome.failure.is_none() {
            outcome.failure = Some(format!(
                "nonzero residual for (m,n)=({m},{n}) on probe {occ}"
            ));
        }
    }
    outcome
}

/// Bracket sweep with the probe basis split across `jobs` worker threads;
/// probes are independent and the merged report does not depend on the
/// split.
pub fn virasoro_bracket_jobs<S: Scalar>(
    m: i64,
    n: i64,
    p: &Momentum<S>,
    probe_level: u64,
    jobs: usize,
) -> ClosureReport<S> {
    let d = p.dim();
    let mut probes = Vec::new();
    for level in 0..=probe_level {
        probes.extend(crate::fock::level_basis(d, level));
    }
    let jobs = jobs.max(1).min(probes.len().max(1));
    let chunk_size = probes.len().div_ceil(jobs);
    let outcomes: Vec<ChunkOutcome<S>> = if jobs == 1 {
        vec![bracket_chunk(m, n, p, &probes)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = probes
                .chunks(chunk_size)
                .map(|chunk| scope.spawn(move || bracket_chunk(m, n, p, chunk)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    };

    let mut report = ClosureReport {
        m,
        n,
        d,
        probe_level,
        probes: 0,
        matches_closure: true,
        central_coefficient: S::zero(),
        first_failure: None,
    };
    let mut measured: Option<S> = None;
    for outcome in outcomes {
        report.probes += outcome.probes;
        if let Some(f) = outcome.failure {
            report.matches_closure = false;
            if report.first_failure.is_none() {
                report.first_failure = Some(f);
            }
        }
        match (&measured, outcome.measured) {
            (None, Some(c)) => measured = Some(c),
            (Some(prev), Some(c)) if *prev != c => {
                report.matches_closure = false;
                if report.first_failure.is_none() {
                    report.first_failure = Some(format!(
                        "central scalar varies across probes: {prev} vs {c}"
                    ));
                }
            }
            _ => {}
        }
    }
    if let Some(c) = measured {
        report.central_coefficient = c;
    }
    report
}
