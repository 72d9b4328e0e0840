//! Lorentz transformations, exact rational boosts, the lifted action on Fock
//! vectors, and the antilinear conjugations.
//!
//! The lift acts on creation slots with the matrix `ηΛᵀη = Λ⁻¹` (coefficient
//! functions carry a lowered index), which is the convention that makes
//! `Γ(Λ)⁻¹ α_n^μ Γ(Λ) = Σ_ν Λ^μ_ν α_n^ν` and the constraint intertwining
//! `Γ(Λ) L_m(Λ⁻¹p) = L_m(p) Γ(Λ)` hold on the nose.

use thiserror::Error;

use crate::fock::FockVector;
use crate::scalar::Scalar;
use crate::virasoro::Momentum;

#[derive(Debug, Error, PartialEq)]
pub enum LorentzError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("dimension mismatch: {got} vs {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("boost parameters must satisfy c² − s² = 1")]
    NotUnitHyperbolic,
    #[error("boost axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("standard boost needs r > 0")]
    NonPositiveMass,
    #[error("momentum is not on the forward mass shell")]
    OffShell,
}

/// Dense d×d spacetime transformation.
#[derive(Clone, PartialEq, Debug)]
pub struct LorentzTransform<S: Scalar> {
    matrix: Vec<Vec<S>>,
}

impl<S: Scalar> LorentzTransform<S> {
    pub fn new(matrix: Vec<Vec<S>>) -> Result<Self, LorentzError> {
        let d = matrix.len();
        if matrix.iter().any(|r| r.len() != d) {
            return Err(LorentzError::NotSquare);
        }
        Ok(LorentzTransform { matrix })
    }

    pub fn identity(d: usize) -> Self {
        let mut matrix = vec![vec![S::zero(); d]; d];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = S::one();
        }
        LorentzTransform { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.matrix[i][j]
    }

    pub fn matrix(&self) -> &[Vec<S>] {
        &self.matrix
    }

    pub fn compose(&self, other: &Self) -> Self {
        let d = self.dim();
        assert_eq!(d, other.dim());
        let mut out = vec![vec![S::zero(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = S::zero();
                for k in 0..d {
                    acc += self.matrix[i][k].clone() * other.matrix[k][j].clone();
                }
                out[i][j] = acc;
            }
        }
        LorentzTransform { matrix: out }
    }

    /// Inverse through the metric identity `Λ⁻¹ = η Λᵀ η`; exact whenever
    /// the entries are exact.
    pub fn inverse(&self) -> Self {
        let d = self.dim();
        let mut out = vec![vec![S::zero(); d]; d];
        let sign = |i: usize| if i == 0 { -1 } else { 1 };
        for i in 0..d {
            for j in 0..d {
                let s = sign(i) * sign(j);
                let v = self.matrix[j][i].clone();
                out[i][j] = if s < 0 { -v } else { v };
            }
        }
        LorentzTransform { matrix: out }
    }

    pub fn apply(&self, p: &Momentum<S>) -> Momentum<S> {
        let d = self.dim();
        assert_eq!(d, p.dim());
        let mut comps = vec![S::zero(); d];
        for (i, c) in comps.iter_mut().enumerate() {
            for j in 0..d {
                *c += self.matrix[i][j].clone() * p.component(j).clone();
            }
        }
        Momentum::new(comps)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LorentzTransform<T> {
        LorentzTransform {
            matrix: self
                .matrix
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
        }
    }
}

/// Checks `Λᵀ η Λ = η`, exactly in exact mode or within `tol` per entry.
pub fn is_lorentz<S: Scalar>(lambda: &LorentzTransform<S>, tol: f64) -> bool {
    let d = lambda.dim();
    let eta = |i: usize| if i == 0 { -1i64 } else { 1 };
    for i in 0..d {
        for j in 0..d {
            let mut acc = S::zero();
            for k in 0..d {
                let t = lambda.matrix[k][i].clone() * lambda.matrix[k][j].clone();
                acc += if eta(k) < 0 { -t } else { t };
            }
            let want = if i == j { S::from_int(eta(i)) } else { S::zero() };
            let diff = acc - want;
            let ok = if S::exact() {
                diff.is_zero()
            } else {
                diff.abs_approx() <= tol
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Boost in the `(0, axis)` plane with exact hyperbolic parameters,
/// `c² − s² = 1` (e.g. c = 5/4, s = 3/4).
pub fn rational_boost<S: Scalar>(
    c: &S,
    s: &S,
    axis: usize,
    d: usize,
) -> Result<LorentzTransform<S>, LorentzError> {
    if axis == 0 || axis >= d {
        return Err(LorentzError::AxisOutOfRange { axis, dim: d });
    }
    let check = c.clone() * c.clone() - s.clone() * s.clone() - S::one();
    let ok = if S::exact() {
        check.is_zero()
    } else {
        check.abs_approx() <= 1e-12
    };
    if !ok {
        return Err(LorentzError::NotUnitHyperbolic);
    }
    let mut lambda = LorentzTransform::identity(d);
    lambda.matrix[0][0] = c.clone();
    lambda.matrix[0][axis] = s.clone();
    lambda.matrix[axis][0] = s.clone();
    lambda.matrix[axis][axis] = c.clone();
    Ok(lambda)
}

/// Standard boost taking the rest point `q = (√r, 0, …, 0)` to `p` on the
/// forward shell of mass² `r > 0` (float mode; `√r` is generally
/// irrational). Closed form: `Λ⁰₀ = γ`, `Λ⁰ᵢ = Λⁱ₀ = pⁱ/√r`,
/// `Λⁱⱼ = δᵢⱼ + (γ−1) pⁱpⱼ/|p⃗|²` with `γ = p⁰/√r`.
pub fn standard_boost(p: &[f64], r: f64) -> Result<LorentzTransform<num_complex::Complex64>, LorentzError> {
    use num_complex::Complex64;
    if r <= 0.0 {
        return Err(LorentzError::NonPositiveMass);
    }
    let d = p.len();
    let spatial_sq: f64 = p[1..].iter().map(|x| x * x).sum();
    let omega = (spatial_sq + r).sqrt();
    if p[0] <= 0.0 || (p[0] - omega).abs() > 1e-9 * omega.max(1.0) {
        return Err(LorentzError::OffShell);
    }
    let sqrt_r = r.sqrt();
    let gamma = p[0] / sqrt_r;
    let mut m = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    m[0][0] = Complex64::new(gamma, 0.0);
    for i in 1..d {
        let v = p[i] / sqrt_r;
        m[0][i] = Complex64::new(v, 0.0);
        m[i][0] = Complex64::new(v, 0.0);
        for j in 1..d {
            let kron = if i == j { 1.0 } else { 0.0 };
            let corr = if spatial_sq > 0.0 {
                (gamma - 1.0) * p[i] * p[j] / spatial_sq
            } else {
                0.0
            };
            m[i][j] = Complex64::new(kron + corr, 0.0);
        }
    }
    Ok(LorentzTransform { matrix: m })
}

/// Second-quantized lift `Γ(Λ)`: acts on each creation slot of each PBW
/// monomial with `ηΛᵀη` and extends multiplicatively. Preserves the level
/// and the indefinite pairing.
pub fn gamma_lift<S: Scalar>(
    lambda: &LorentzTransform<S>,
    v: &FockVector<S>,
) -> Result<FockVector<S>, LorentzError> {
    let d = v.dim();
    if lambda.dim() != d {
        return Err(LorentzError::DimensionMismatch {
            got: lambda.dim(),
            want: d,
        });
    }
    let slot = lambda.inverse();
    let mut out = FockVector::zero(d);
    for (occ, coeff) in v.terms() {
        // Running expansion of the substituted monomial.
        let mut expansion = FockVector::vacuum(d).scaled(coeff);
        for (label, count) in occ.slots() {
            for _ in 0..count {
                let mut next = FockVector::zero(d);
                for nu in 0..d {
                    let w = slot.matrix[label.mu as usize][nu].clone();
                    if w.is_zero() {
                        continue;
                    }
                    let created = expansion
                        .apply_alpha(nu as u32, -(label.n as i64))
                        .expect("creation");
                    next = next.plus(&created.scaled(&w));
                }
                expansion = next;
            }
        }
        out = out.plus(&expansion);
    }
    Ok(out)
}

/// Antilinear conjugation choice.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConjugationKind {
    /// Plain coefficient conjugation.
    C0,
    /// Coefficient conjugation with a sign per spatial quantum, so that
    /// timelike slots are fixed and spatial slots flip.
    C1,
}

/// Antilinear involution on Fock vectors; commutes with the level grading
/// and with the metric twist.
pub fn conjugation<S: Scalar>(kind: ConjugationKind, v: &FockVector<S>) -> FockVector<S> {
    let mut out = FockVector::zero(v.dim());
    for (occ, coeff) in v.terms() {
        let mut c = coeff.conj();
        if kind == ConjugationKind::C1 {
            let spatial: u64 = occ.total_quanta() - occ.timelike_quanta();
            if spatial % 2 == 1 {
                c = -c;
            }
        }
        out.add_term(*occ, c);
    }
    out
}
