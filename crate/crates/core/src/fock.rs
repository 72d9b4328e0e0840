//! Level-truncated bosonic Fock space in an unnormalized PBW oscillator basis.
//!
//! Basis monomials are ordered products of creation oscillators applied to
//! the no-excitation state `Ω₀`, labelled by occupation maps
//! `(mode n ≥ 1, direction μ) → count`. Keeping the monomials unnormalized
//! (no `√n` factors) means every matrix element of the oscillator algebra is
//! rational, which is what makes the signature computations exact.
//!
//! The metric signature is `(−,+,…,+)`: direction `μ = 0` is timelike, so
//! the indefinite pairing picks up one sign flip per timelike quantum.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// A single oscillator slot: mode number `n ≥ 1` in spacetime direction `mu`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ModeLabel {
    pub n: u32,
    pub mu: u32,
}

impl ModeLabel {
    pub fn new(n: u32, mu: u32) -> Self {
        assert!(n >= 1, "mode number must be >= 1");
        ModeLabel { n, mu }
    }

    /// Metric sign `η^{μμ}`: −1 on the timelike direction, +1 otherwise.
    pub fn eta_sign(&self) -> i64 {
        if self.mu == 0 {
            -1
        } else {
            1
        }
    }
}

/// Distinct slots an occupation can hold; levels beyond 16 would need more,
/// far past the desk-scale truncations this crate targets.
pub const MAX_SLOTS: usize = 16;

/// Finitely supported occupation map; the PBW monomial it labels is the
/// product of `count` creation factors per slot, in (n, μ)-ascending order.
///
/// Stored inline as packed `(n, μ, count)` words so the oscillator sweeps
/// never touch the heap; the derived ordering is the slotwise lexicographic
/// one (zero padding sorts prefixes first).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Occupation {
    packed: [u64; MAX_SLOTS],
    len: u8,
}

const COUNT_BITS: u32 = 20;
const MU_BITS: u32 = 20;

fn pack(label: ModeLabel, count: u32) -> u64 {
    debug_assert!(count < (1 << COUNT_BITS));
    debug_assert!(label.mu < (1 << MU_BITS));
    ((label.n as u64) << (COUNT_BITS + MU_BITS))
        | ((label.mu as u64) << COUNT_BITS)
        | count as u64
}

fn unpack(word: u64) -> (ModeLabel, u32) {
    let count = (word & ((1 << COUNT_BITS) - 1)) as u32;
    let mu = ((word >> COUNT_BITS) & ((1 << MU_BITS) - 1)) as u32;
    let n = (word >> (COUNT_BITS + MU_BITS)) as u32;
    (ModeLabel { n, mu }, count)
}

impl Occupation {
    pub fn empty() -> Self {
        Occupation::default()
    }

    pub fn from_slots(mut slots: Vec<(ModeLabel, u32)>) -> Self {
        slots.retain(|&(_, c)| c > 0);
        slots.sort_unstable_by_key(|&(m, _)| m);
        for w in slots.windows(2) {
            assert!(w[0].0 != w[1].0, "duplicate mode label");
        }
        assert!(slots.len() <= MAX_SLOTS, "occupation exceeds {MAX_SLOTS} slots");
        let mut occ = Occupation::default();
        for (i, &(m, c)) in slots.iter().enumerate() {
            occ.packed[i] = pack(m, c);
        }
        occ.len = slots.len() as u8;
        occ
    }

    /// Monomial from a list of (n, mu) creation factors, repetitions allowed.
    pub fn from_factors(factors: &[(u32, u32)]) -> Self {
        let mut map: BTreeMap<ModeLabel, u32> = BTreeMap::new();
        for &(n, mu) in factors {
            *map.entry(ModeLabel::new(n, mu)).or_insert(0) += 1;
        }
        Occupation::from_slots(map.into_iter().collect())
    }

    pub fn num_slots(&self) -> usize {
        self.len as usize
    }

    pub fn slots(&self) -> impl Iterator<Item = (ModeLabel, u32)> + '_ {
        self.packed[..self.len as usize].iter().map(|&w| unpack(w))
    }

    pub fn count(&self, label: ModeLabel) -> u32 {
        self.slots()
            .find(|&(m, _)| m == label)
            .map(|(_, c)| c)
            .unwrap_or(0)
    }

    /// Eigenvalue of the excitation operator: `Σ n · N_{μ,n}`.
    pub fn level(&self) -> u64 {
        self.slots().map(|(m, c)| m.n as u64 * c as u64).sum()
    }

    /// Total occupation of the timelike direction (parity gives the metric sign).
    pub fn timelike_quanta(&self) -> u64 {
        self.slots()
            .filter(|&(m, _)| m.mu == 0)
            .map(|(_, c)| c as u64)
            .sum()
    }

    pub fn total_quanta(&self) -> u64 {
        self.slots().map(|(_, c)| c as u64).sum()
    }

    pub(crate) fn with_added(&self, label: ModeLabel) -> Occupation {
        let mut out = *self;
        let key = pack(label, 0);
        let n = self.len as usize;
        let mut i = 0;
        while i < n && self.packed[i] < key {
            i += 1;
        }
        if i < n {
            let (m, c) = unpack(self.packed[i]);
            if m == label {
                out.packed[i] = pack(label, c + 1);
                return out;
            }
        }
        assert!(n < MAX_SLOTS, "occupation exceeds {MAX_SLOTS} slots");
        out.packed.copy_within(i..n, i + 1);
        out.packed[i] = pack(label, 1);
        out.len += 1;
        out
    }

    pub(crate) fn with_removed(&self, label: ModeLabel) -> Option<(Occupation, u32)> {
        let n = self.len as usize;
        for i in 0..n {
            let (m, c) = unpack(self.packed[i]);
            if m == label {
                let mut out = *self;
                if c == 1 {
                    out.packed.copy_within(i + 1..n, i);
                    out.packed[n - 1] = 0;
                    out.len -= 1;
                } else {
                    out.packed[i] = pack(label, c - 1);
                }
                return Some((out, c));
            }
        }
        None
    }

    /// Sorted `[mu, n, count]` triples, the wire format for occupations.
    pub fn to_triples(&self) -> Vec<[u64; 3]> {
        self.slots()
            .map(|(m, c)| [m.mu as u64, m.n as u64, c as u64])
            .collect()
    }

    /// Squared PBW norm under the definite product: `Π n^N · N!`.
    /// The indefinite norm is this times `(−1)^{timelike quanta}`.
    pub fn norm_magnitude<S: Scalar>(&self) -> S {
        let mut acc = S::one();
        for (m, c) in self.slots() {
            for k in 1..=c {
                acc *= S::from_int(m.n as i64);
                acc *= S::from_int(k as i64);
            }
        }
        acc
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return write!(f, "Ω");
        }
        for (m, c) in self.slots() {
            if c == 1 {
                write!(f, "a[-{}]^{} ", m.n, m.mu)?;
            } else {
                write!(f, "(a[-{}]^{})^{} ", m.n, m.mu, c)?;
            }
        }
        write!(f, "Ω")
    }
}

impl fmt::Debug for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Occupation[{self}]")
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("mode index 0 is not an oscillator (momentum is handled separately)")]
    ZeroMode,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Sparse vector in the PBW basis; no zero coefficients are stored.
#[derive(Clone, PartialEq, Debug)]
pub struct FockVector<S: Scalar> {
    dim: usize,
    terms: BTreeMap<Occupation, S>,
}

impl<S: Scalar> FockVector<S> {
    pub fn zero(dim: usize) -> Self {
        FockVector {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// The no-excitation state with coefficient one.
    pub fn vacuum(dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Occupation::empty(), S::one());
        FockVector { dim, terms }
    }

    pub fn monomial(dim: usize, occ: Occupation) -> Self {
        for (m, _) in occ.slots() {
            assert!((m.mu as usize) < dim, "direction out of range");
        }
        let mut terms = BTreeMap::new();
        terms.insert(occ, S::one());
        FockVector { dim, terms }
    }

    /// Collects raw (occupation, coefficient) emissions, merging duplicates
    /// and dropping zeros.
    pub fn from_emissions(dim: usize, mut emissions: Vec<(Occupation, S)>) -> Self {
        emissions.sort_by(|a, b| a.0.cmp(&b.0));
        let mut terms = BTreeMap::new();
        let mut iter = emissions.into_iter();
        if let Some((mut occ, mut acc)) = iter.next() {
            for (o, c) in iter {
                if o == occ {
                    acc += c;
                } else {
                    if !acc.is_zero() {
                        terms.insert(occ, acc);
                    }
                    occ = o;
                    acc = c;
                }
            }
            if !acc.is_zero() {
                terms.insert(occ, acc);
            }
        }
        FockVector { dim, terms }
    }

    /// Convenience: monomial from creation factors `(n, mu)`.
    pub fn from_factors(dim: usize, factors: &[(u32, u32)]) -> Self {
        Self::monomial(dim, Occupation::from_factors(factors))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, occ: &Occupation) -> S {
        self.terms.get(occ).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_term(&mut self, occ: Occupation, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(occ) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scaled(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        let mut out = Self::zero(self.dim);
        for (occ, a) in &self.terms {
            out.add_term(*occ, a.clone() * c.clone());
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for (occ, c) in &other.terms {
            out.add_term(*occ, c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(&-S::one()))
    }

    /// Largest occupation level present, 0 for the zero vector.
    pub fn max_level(&self) -> u64 {
        self.terms.keys().map(Occupation::level).max().unwrap_or(0)
    }

    /// Component at a fixed excitation level.
    pub fn level_component(&self, level: u64) -> Self {
        let mut out = Self::zero(self.dim);
        for (occ, c) in &self.terms {
            if occ.level() == level {
                out.add_term(*occ, c.clone());
            }
        }
        out
    }

    pub fn map_coefficients<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FockVector<T> {
        let mut out = FockVector::zero(self.dim);
        for (occ, c) in &self.terms {
            out.add_term(*occ, f(c));
        }
        out
    }

    /// Oscillator action `α_n^μ`: creation for `n < 0`, annihilation for
    /// `n > 0`. Annihilation against mode `|n|` in direction `μ` contracts
    /// with coefficient `|n| · count · η^{μμ}` per the commutator algebra.
    pub fn apply_alpha(&self, mu: u32, n: i64) -> Result<Self, FockError> {
        if n == 0 {
            return Err(FockError::ZeroMode);
        }
        assert!((mu as usize) < self.dim, "direction out of range");
        let label = ModeLabel::new(n.unsigned_abs() as u32, mu);
        let mut out = Self::zero(self.dim);
        if n < 0 {
            for (occ, c) in &self.terms {
                out.add_term(occ.with_added(label), c.clone());
            }
        } else {
            for (occ, c) in &self.terms {
                if let Some((reduced, count)) = occ.with_removed(label) {
                    let factor =
                        S::from_int(n * count as i64 * label.eta_sign());
                    out.add_term(reduced, c.clone() * factor);
                }
            }
        }
        Ok(out)
    }

    /// Excitation operator `N`; PBW monomials are eigenvectors with
    /// eigenvalue `Σ n·N_{μ,n}`.
    pub fn number_op(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (occ, c) in &self.terms {
            let lvl = occ.level() as i64;
            out.add_term(*occ, c.clone() * S::from_int(lvl));
        }
        out
    }

    /// Mass operator `M² = 2(N − 1)`; eigenvalues −2, 0, 2, 4, …
    pub fn mass_squared(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (occ, c) in &self.terms {
            let m2 = 2 * (occ.level() as i64 - 1);
            out.add_term(*occ, c.clone() * S::from_int(m2));
        }
        out
    }

    /// Metric twist `𝒥`: sign flip on components with odd timelike occupation.
    pub fn jay(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (occ, c) in &self.terms {
            let c = if occ.timelike_quanta() % 2 == 1 {
                -c.clone()
            } else {
                c.clone()
            };
            out.add_term(*occ, c);
        }
        out
    }
}

/// Indefinite pairing `⟨v, w⟩ = (v, 𝒥 w)`, antilinear in the first slot.
/// Distinct PBW monomials are orthogonal; matching ones contribute
/// `Π n^N N!` times the metric parity.
pub fn inner_indefinite<S: Scalar>(v: &FockVector<S>, w: &FockVector<S>) -> S {
    pairing(v, w, true)
}

/// Positive-definite pairing `(v, w)`: same contractions with all metric
/// signs replaced by +1.
pub fn inner_definite<S: Scalar>(v: &FockVector<S>, w: &FockVector<S>) -> S {
    pairing(v, w, false)
}

fn pairing<S: Scalar>(v: &FockVector<S>, w: &FockVector<S>, indefinite: bool) -> S {
    assert_eq!(v.dim(), w.dim(), "dimension mismatch");
    let mut acc = S::zero();
    // Iterate the smaller map, probe the larger.
    let (small, large) = if v.num_terms() <= w.num_terms() {
        (&v.terms, &w.terms)
    } else {
        (&w.terms, &v.terms)
    };
    for (occ, _) in small.iter() {
        if let Some(_) = large.get(occ) {
            let a = v.terms.get(occ).unwrap();
            let b = w.terms.get(occ).unwrap();
            let mut norm: S = occ.norm_magnitude();
            if indefinite && occ.timelike_quanta() % 2 == 1 {
                norm = -norm;
            }
            acc += a.conj() * b.clone() * norm;
        }
    }
    acc
}

/// All occupations of a given level in `d` spacetime directions, in the
/// canonical (ascending) occupation order. The count is the `q^level`
/// coefficient of `Π (1-q^n)^{-d}`.
pub fn level_basis(d: usize, level: u64) -> Vec<Occupation> {
    let mut out = Vec::new();
    let mut current: Vec<(ModeLabel, u32)> = Vec::new();
    // Modes in descending (n, mu) order so the recursion assigns big parts first.
    let mut modes: Vec<ModeLabel> = Vec::new();
    for n in 1..=level.max(1) as u32 {
        for mu in 0..d as u32 {
            modes.push(ModeLabel::new(n, mu));
        }
    }
    fn rec(
        modes: &[ModeLabel],
        idx: usize,
        remaining: u64,
        current: &mut Vec<(ModeLabel, u32)>,
        out: &mut Vec<Occupation>,
    ) {
        if remaining == 0 {
            out.push(Occupation::from_slots(current.clone()));
            return;
        }
        if idx >= modes.len() {
            return;
        }
        let m = modes[idx];
        let max_count = remaining / m.n as u64;
        for count in 0..=max_count {
            if count > 0 {
                current.push((m, count as u32));
            }
            rec(modes, idx + 1, remaining - count * m.n as u64, current, out);
            if count > 0 {
                current.pop();
            }
        }
    }
    rec(&modes, 0, level, &mut current, &mut out);
    out.sort();
    out
}

/// Number of occupations at `level` built from `colors` directions:
/// coefficient of `q^level` in `Π_{n≥1} (1-q^n)^{-colors}`.
pub fn colored_partition_count(colors: usize, level: u64) -> u128 {
    let l = level as usize;
    let mut series = vec![0u128; l + 1];
    series[0] = 1;
    for n in 1..=l.max(1) {
        for _ in 0..colors {
            // Multiply by 1/(1-q^n): prefix recurrence c[k] += c[k-n].
            for k in n..=l {
                series[k] = series[k]
                    .checked_add(series[k - n])
                    .expect("partition count overflow");
            }
        }
    }
    series[l]
}

/// Smeared mode-truncated worldsheet commutator kernel:
/// `∫∫ f(σ) C_K(σ,σ') g(σ') dσ dσ'` with
/// `C_K(σ,σ') = 1 + 2 Σ_{n=1}^{K} cos nσ cos nσ'` on `[0,π]²`.
/// Converges to `π ∫ f g` as `K → ∞` for smooth `f, g`.
pub fn worldsheet_ccr_partial(
    cutoff: u32,
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    nodes: usize,
) -> f64 {
    let rule = crate::quad::gauss_legendre(nodes, 0.0, std::f64::consts::PI);
    let moment = |h: &dyn Fn(f64) -> f64, n: u32| -> f64 {
        rule.iter()
            .map(|&(x, w)| w * h(x) * if n == 0 { 1.0 } else { (n as f64 * x).cos() })
            .sum()
    };
    let mut acc = moment(&f, 0) * moment(&g, 0);
    for n in 1..=cutoff {
        acc += 2.0 * moment(&f, n) * moment(&g, n);
    }
    acc
}
