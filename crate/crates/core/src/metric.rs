//! Linear algebra over indefinite symmetric (hermitian) bilinear forms:
//! Sylvester inertia, radical extraction, and quotient forms.
//!
//! Inertia is computed by congruence elimination (LDLᵀ with 1×1 and 2×2
//! symmetric pivots), never through eigenvalues, so the rational
//! instantiation is exact and pivot-order independent. Kernels in exact mode
//! go through fraction-free (Bareiss) elimination on cleared-denominator
//! integer matrices. Float mode treats pivots below a configurable relative
//! threshold as zero and reports a warning count for suspiciously small
//! accepted pivots.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::scalar::Scalar;

fn rat_zero() -> BigRational {
    <BigRational as Zero>::zero()
}

fn rat_one() -> BigRational {
    <BigRational as One>::one()
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("matrix is not square: {rows} rows, {cols} cols in row {row}")]
    NotSquare { rows: usize, cols: usize, row: usize },
    #[error("matrix is not hermitian-symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("label count {labels} does not match dimension {dim}")]
    LabelMismatch { labels: usize, dim: usize },
    #[error("claimed radical vector {index} is not in the kernel")]
    RadicalNotInKernel { index: usize },
    #[error("claimed radical vectors are linearly dependent")]
    RadicalDependent,
    #[error("vector length {got} does not match dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("ambient diagonal entry {index} is zero")]
    SingularDiagonal { index: usize },
}

/// Comparison thresholds for the float instantiation; ignored in exact mode.
#[derive(Clone, Copy, Debug)]
pub struct InertiaOptions {
    /// Pivots below `zero_tol_rel · max|entry|` count as zero.
    pub zero_tol_rel: f64,
    /// Accepted pivots below `warn_tol_rel · max|entry|` increment the
    /// small-pivot warning counter.
    pub warn_tol_rel: f64,
}

impl Default for InertiaOptions {
    fn default() -> Self {
        InertiaOptions {
            zero_tol_rel: 1e-10,
            warn_tol_rel: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InertiaReport {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
    /// Number of accepted pivots that fell below the warning threshold
    /// (always 0 in exact mode).
    pub small_pivots: usize,
}

impl InertiaReport {
    pub fn signature(&self) -> (usize, usize, usize) {
        (self.n_plus, self.n_zero, self.n_minus)
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_zero + self.n_minus
    }
}

/// Dense hermitian-symmetric Gram matrix with basis labels.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix<S: Scalar> {
    entries: Vec<Vec<S>>,
    labels: Vec<String>,
}

impl<S: Scalar> GramMatrix<S> {
    /// Validates squareness and (tolerant, in float mode) hermitian symmetry.
    pub fn new(entries: Vec<Vec<S>>, labels: Vec<String>) -> Result<Self, MetricError> {
        let n = entries.len();
        for (row, r) in entries.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare {
                    rows: n,
                    cols: r.len(),
                    row,
                });
            }
        }
        if labels.len() != n {
            return Err(MetricError::LabelMismatch {
                labels: labels.len(),
                dim: n,
            });
        }
        let scale = matrix_scale(&entries);
        for i in 0..n {
            for j in i..n {
                let diff = entries[i][j].clone() - entries[j][i].conj();
                let ok = if S::exact() {
                    diff.is_zero()
                } else {
                    diff.abs_approx() <= 1e-9 * scale.max(1.0)
                };
                if !ok {
                    return Err(MetricError::NotSymmetric { i, j });
                }
            }
        }
        Ok(GramMatrix { entries, labels })
    }

    pub fn from_diagonal(diag: Vec<S>) -> Self {
        let n = diag.len();
        let mut entries = vec![vec![S::zero(); n]; n];
        for (i, v) in diag.into_iter().enumerate() {
            entries[i][i] = v;
        }
        let labels = (0..n).map(|i| format!("e{i}")).collect();
        GramMatrix { entries, labels }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<S>] {
        &self.entries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entry(&self, i: usize, j: usize) -> &S {
        &self.entries[i][j]
    }

    /// Congruence transform `Sᵀ G S` for a square change of basis.
    pub fn congruence(&self, s: &[Vec<S>]) -> GramMatrix<S> {
        let n = self.dim();
        assert_eq!(s.len(), n);
        let mut gs = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    acc += self.entries[i][k].clone() * s[k][j].clone();
                }
                gs[i][j] = acc;
            }
        }
        let mut out = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    acc += s[k][i].conj() * gs[k][j].clone();
                }
                out[i][j] = acc;
            }
        }
        GramMatrix {
            entries: out,
            labels: self.labels.clone(),
        }
    }
}

fn matrix_scale<S: Scalar>(entries: &[Vec<S>]) -> f64 {
    entries
        .iter()
        .flat_map(|r| r.iter())
        .map(Scalar::abs_approx)
        .fold(0.0, f64::max)
}

/// Sylvester inertia `(n₊, n₀, n₋)` by symmetric congruence elimination.
pub fn inertia<S: Scalar>(g: &GramMatrix<S>, opts: &InertiaOptions) -> InertiaReport {
    let mut m: Vec<Vec<S>> = g.entries.clone();
    let n = m.len();
    let scale = matrix_scale(&m);
    let zero_tol = if S::exact() { 0.0 } else { opts.zero_tol_rel * scale };
    let warn_tol = if S::exact() { 0.0 } else { opts.warn_tol_rel * scale };
    let is_negligible = |x: &S| {
        if S::exact() {
            x.is_zero()
        } else {
            x.abs_approx() <= zero_tol
        }
    };

    let mut report = InertiaReport {
        n_plus: 0,
        n_zero: 0,
        n_minus: 0,
        small_pivots: 0,
    };
    let mut k = 0;
    while k < n {
        // Best 1×1 pivot on the active diagonal.
        let mut best = k;
        for i in k..n {
            if m[i][i].abs_approx() > m[best][best].abs_approx() {
                best = i;
            }
        }
        if !is_negligible(&m[best][best]) {
            swap_sym(&mut m, k, best);
            let d = m[k][k].clone();
            if d.abs_approx() < warn_tol {
                report.small_pivots += 1;
            }
            if pivot_sign(&d) > 0 {
                report.n_plus += 1;
            } else {
                report.n_minus += 1;
            }
            for j in (k + 1)..n {
                if m[j][k].is_zero() {
                    continue;
                }
                let f = m[j][k].clone() / d.clone();
                for l in (k + 1)..n {
                    let delta = f.clone() * m[k][l].clone();
                    m[j][l] -= delta;
                }
            }
            k += 1;
            continue;
        }

        // All active diagonals negligible: look for an off-diagonal coupling.
        let mut off: Option<(usize, usize)> = None;
        let mut off_mag = zero_tol;
        for i in k..n {
            for j in (i + 1)..n {
                let mag = m[i][j].abs_approx();
                if mag > off_mag || (off.is_none() && S::exact() && !m[i][j].is_zero()) {
                    off = Some((i, j));
                    off_mag = mag;
                }
            }
        }
        let Some((pi, pj)) = off else {
            // Active block is (numerically) zero.
            report.n_zero += n - k;
            break;
        };

        // Hyperbolic 2×2 pivot: with negligible diagonal the block
        // determinant is −|b|² < 0, contributing (1, 1).
        swap_sym(&mut m, k, pi);
        let pj = if pj == k { pi } else { pj };
        swap_sym(&mut m, k + 1, pj);
        let a = m[k][k].clone();
        let b = m[k][k + 1].clone();
        let c = m[k + 1][k + 1].clone();
        let det = a.clone() * c.clone() - b.clone() * b.conj();
        debug_assert!(pivot_sign(&det) < 0, "2x2 pivot block must be hyperbolic");
        if b.abs_approx() < warn_tol {
            report.small_pivots += 1;
        }
        report.n_plus += 1;
        report.n_minus += 1;
        for j in (k + 2)..n {
            let gk = m[j][k].clone();
            let gk1 = m[j][k + 1].clone();
            if gk.is_zero() && gk1.is_zero() {
                continue;
            }
            let x = (gk.clone() * c.clone() - gk1.clone() * b.conj()) / det.clone();
            let y = (gk1 * a.clone() - gk * b.clone()) / det.clone();
            for l in (k + 2)..n {
                let delta = x.clone() * m[k][l].clone() + y.clone() * m[k + 1][l].clone();
                m[j][l] -= delta;
            }
        }
        k += 2;
    }
    report
}

fn swap_sym<S: Scalar>(m: &mut [Vec<S>], a: usize, b: usize) {
    if a == b {
        return;
    }
    m.swap(a, b);
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Sign of a pivot value: hermitian diagonals and 2×2 pivot determinants
/// are real, so the real-part sign decides.
fn pivot_sign<S: Scalar>(x: &S) -> i32 {
    x.real_sign()
}

/// Basis of `ker(G)` (the radical of the form). Dimension equals the `n₀`
/// reported by [`inertia`], which the callers cross-check.
pub fn radical_basis<S: Scalar>(g: &GramMatrix<S>, opts: &InertiaOptions) -> Vec<Vec<S>> {
    kernel_basis(&g.entries, opts)
}

/// Kernel of a dense matrix (rows × cols), exact or float.
pub fn kernel_basis<S: Scalar>(rows: &[Vec<S>], opts: &InertiaOptions) -> Vec<Vec<S>> {
    if rows.is_empty() {
        return Vec::new();
    }
    if S::exact() {
        let int_rows: Vec<Vec<BigInt>> = rows.iter().map(|r| clear_denominators(r)).collect();
        bareiss_kernel(&int_rows)
            .into_iter()
            .map(|v| v.iter().map(|x| S::from_rational(x)).collect())
            .collect()
    } else {
        float_kernel(rows, opts)
    }
}

/// Rank of a dense matrix.
pub fn rank<S: Scalar>(rows: &[Vec<S>], opts: &InertiaOptions) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    cols - kernel_basis(rows, opts).len()
}

fn clear_denominators<S: Scalar>(row: &[S]) -> Vec<BigInt> {
    let rats: Vec<BigRational> = row
        .iter()
        .map(|x| x.to_rational().expect("exact scalar required"))
        .collect();
    let mut lcm = BigInt::one();
    for r in &rats {
        let d = r.denom();
        let g = num_integer_gcd(&lcm, d);
        lcm = &lcm / &g * d;
    }
    rats.iter()
        .map(|r| r.numer() * (&lcm / r.denom()))
        .collect()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let t = &a % &b;
        a = b;
        b = t;
    }
    if a.is_zero() {
        BigInt::one()
    } else {
        a
    }
}

/// Fraction-free (Bareiss) row echelon over the integers; returns a rational
/// kernel basis, one vector per free column, deterministic order and sign.
fn bareiss_kernel(rows: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    let m = rows.len();
    let n = rows[0].len();
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let mut prev = BigInt::one();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut free_cols: Vec<usize> = Vec::new();
    let mut r = 0usize;
    for c in 0..n {
        let mut piv = None;
        for i in r..m {
            if !a[i][c].is_zero() {
                piv = Some(i);
                break;
            }
        }
        let Some(piv) = piv else {
            free_cols.push(c);
            continue;
        };
        a.swap(r, piv);
        for j in (r + 1)..m {
            if a[j][c].is_zero() && prev.is_one() {
                // Still needs the Bareiss rescale when pivot row changes prev,
                // but with a zero multiplier the update is a pure scaling.
            }
            for l in (c + 1)..n {
                let t = &a[r][c] * &a[j][l] - &a[j][c] * &a[r][l];
                a[j][l] = &t / &prev;
            }
            a[j][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivot_cols.push(c);
        r += 1;
        if r == m {
            for cc in (c + 1)..n {
                free_cols.push(cc);
            }
            break;
        }
    }

    // Back-substitute one kernel vector per free column.
    let mut kernel = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut x = vec![rat_zero(); n];
        x[fc] = rat_one();
        for i in (0..pivot_cols.len()).rev() {
            let pc = pivot_cols[i];
            if pc > fc {
                continue;
            }
            let mut acc = rat_zero();
            for l in (pc + 1)..n {
                if !Zero::is_zero(&x[l]) && !a[i][l].is_zero() {
                    acc += BigRational::from_integer(a[i][l].clone()) * x[l].clone();
                }
            }
            x[pc] = -acc / BigRational::from_integer(a[i][pc].clone());
        }
        kernel.push(normalize_rational_vector(x));
    }
    kernel
}

/// Scale to coprime integers with a positive leading entry.
fn normalize_rational_vector(v: Vec<BigRational>) -> Vec<BigRational> {
    let mut lcm = BigInt::one();
    for x in &v {
        if !Zero::is_zero(x) {
            let g = num_integer_gcd(&lcm, x.denom());
            lcm = &lcm / &g * x.denom();
        }
    }
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut content = BigInt::zero();
    for x in &ints {
        content = num_integer_gcd(&content, x);
    }
    if content.is_zero() {
        content = BigInt::one();
    }
    let lead_neg = ints.iter().find(|x| !x.is_zero()).map_or(false, |x| x.is_negative());
    ints.into_iter()
        .map(|x| {
            let mut y = &x / &content;
            if lead_neg {
                y = -y;
            }
            BigRational::from_integer(y)
        })
        .collect()
}

fn float_kernel<S: Scalar>(rows: &[Vec<S>], opts: &InertiaOptions) -> Vec<Vec<S>> {
    let m = rows.len();
    let n = rows[0].len();
    let mut a: Vec<Vec<S>> = rows.to_vec();
    let scale = matrix_scale(&a).max(1e-300);
    let tol = opts.zero_tol_rel * scale;
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..n {
        let mut best = r;
        for i in r..m {
            if a[i][c].abs_approx() > a[best][c].abs_approx() {
                best = i;
            }
        }
        if r >= m || a[best][c].abs_approx() <= tol {
            continue;
        }
        a.swap(r, best);
        let inv = S::one() / a[r][c].clone();
        for l in 0..n {
            a[r][l] = a[r][l].clone() * inv.clone();
        }
        for i in 0..m {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for l in 0..n {
                    let delta = f.clone() * a[r][l].clone();
                    a[i][l] -= delta;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let mut kernel = Vec::new();
    for fc in 0..n {
        if pivot_cols.contains(&fc) {
            continue;
        }
        let mut x = vec![S::zero(); n];
        x[fc] = S::one();
        for (i, &pc) in pivot_cols.iter().enumerate() {
            x[pc] = -a[i][fc].clone();
        }
        kernel.push(x);
    }
    kernel
}

/// Gram matrix of the induced form on a complement of the radical.
/// The complement is spanned by the coordinate directions away from the
/// radical's pivot columns, so the result is a principal submatrix.
pub fn quotient_gram<S: Scalar>(
    g: &GramMatrix<S>,
    radical: &[Vec<S>],
    opts: &InertiaOptions,
) -> Result<GramMatrix<S>, MetricError> {
    let n = g.dim();
    let scale = matrix_scale(&g.entries).max(1.0);
    for (idx, v) in radical.iter().enumerate() {
        if v.len() != n {
            return Err(MetricError::DimensionMismatch {
                got: v.len(),
                want: n,
            });
        }
        // G · v must vanish.
        for i in 0..n {
            let mut acc = S::zero();
            for j in 0..n {
                acc += g.entries[i][j].clone() * v[j].clone();
            }
            let ok = if S::exact() {
                acc.is_zero()
            } else {
                acc.abs_approx() <= 1e-8 * scale
            };
            if !ok {
                return Err(MetricError::RadicalNotInKernel { index: idx });
            }
        }
    }
    if radical.is_empty() {
        return Ok(g.clone());
    }
    let pivots = echelon_pivot_cols(radical, opts);
    if pivots.len() != radical.len() {
        return Err(MetricError::RadicalDependent);
    }
    let keep: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
    let entries: Vec<Vec<S>> = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| g.entries[i][j].clone()).collect())
        .collect();
    let labels = keep.iter().map(|&i| g.labels[i].clone()).collect();
    Ok(GramMatrix { entries, labels })
}

fn echelon_pivot_cols<S: Scalar>(rows: &[Vec<S>], opts: &InertiaOptions) -> Vec<usize> {
    let n = rows[0].len();
    let kernel_dim = kernel_basis(rows, opts).len();
    // Pivot columns = columns not free in the row space; recover them by a
    // simple forward elimination on a working copy.
    let mut a: Vec<Vec<S>> = rows.to_vec();
    let m = a.len();
    let scale = matrix_scale(&a).max(1e-300);
    let tol = if S::exact() { 0.0 } else { opts.zero_tol_rel * scale };
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..n {
        let mut best = None;
        for i in r..m {
            let mag = a[i][c].abs_approx();
            if mag > tol && !a[i][c].is_zero() {
                if best.map_or(true, |(_, bm)| mag > bm) {
                    best = Some((i, mag));
                }
            }
        }
        let Some((bi, _)) = best else { continue };
        a.swap(r, bi);
        for i in (r + 1)..m {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone() / a[r][c].clone();
            for l in c..n {
                let delta = f.clone() * a[r][l].clone();
                a[i][l] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
        if r == m {
            break;
        }
    }
    debug_assert_eq!(pivots.len() + kernel_dim, n.min(pivots.len() + kernel_dim));
    pivots
}

/// Inertia of a nonsingular diagonal form restricted to the kernel of a
/// sparse constraint matrix, without materializing the restricted Gram.
///
/// For the bordered matrix `M = [[D, Aᵀ], [A, 0]]` with `D` nonsingular,
/// Schur complement additivity gives `In(M) = In(D) + In(−A D⁻¹ Aᵀ)`, and
/// with `ρ = rank A` the saddle-point inertia rule gives
/// `In(D|ker A) = In(M) − (ρ, ρ, m−ρ)`. Both ingredients are m×m
/// eliminations, so the cost is governed by the number of constraints, not
/// the ambient dimension.
pub struct ConstrainedInertia {
    pub inertia: InertiaReport,
    pub constraint_rank: usize,
    pub kernel_dim: usize,
}

pub fn constrained_inertia(
    diag: &[BigRational],
    constraint_rows: &[Vec<(usize, BigRational)>],
) -> Result<ConstrainedInertia, MetricError> {
    let n = diag.len();
    for (i, d) in diag.iter().enumerate() {
        if Zero::is_zero(d) {
            return Err(MetricError::SingularDiagonal { index: i });
        }
    }
    let m = constraint_rows.len();
    let mut d_plus = 0usize;
    let mut d_minus = 0usize;
    for d in diag {
        if d.is_positive() {
            d_plus += 1;
        } else {
            d_minus += 1;
        }
    }

    // Column-major view of A for the sparse symmetric products.
    let mut cols: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); n];
    for (r, row) in constraint_rows.iter().enumerate() {
        for (j, v) in row {
            debug_assert!(*j < n);
            cols[*j].push((r, v.clone()));
        }
    }

    // S = A D⁻¹ Aᵀ and B = A Aᵀ, assembled column by column.
    let mut s = vec![vec![rat_zero(); m]; m];
    let mut b = vec![vec![rat_zero(); m]; m];
    for (j, col) in cols.iter().enumerate() {
        if col.is_empty() {
            continue;
        }
        let dinv = rat_one() / diag[j].clone();
        for (ai, (r, vr)) in col.iter().enumerate() {
            for (s_idx, vs) in col.iter().skip(ai) {
                let prod = vr * vs;
                b[*r][*s_idx] += prod.clone();
                s[*r][*s_idx] += prod * &dinv;
            }
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            s[j][i] = s[i][j].clone();
            b[j][i] = b[i][j].clone();
        }
    }

    let opts = InertiaOptions::default();
    let neg_s: Vec<Vec<BigRational>> = s
        .iter()
        .map(|row| row.iter().map(|x| -x.clone()).collect())
        .collect();
    let labels = (0..m).map(|i| format!("c{i}")).collect();
    let schur = GramMatrix {
        entries: neg_s,
        labels,
    };
    let in_schur = inertia(&schur, &opts);

    // rank(A) = rank(A Aᵀ) over the rationals; A Aᵀ is PSD so its inertia
    // has no negative part and the rank is the positive count.
    let labels_b = (0..m).map(|i| format!("b{i}")).collect();
    let bmat = GramMatrix {
        entries: b,
        labels: labels_b,
    };
    let in_b = inertia(&bmat, &opts);
    assert_eq!(in_b.n_minus, 0, "A·Aᵀ must be positive semidefinite");
    let rho = in_b.n_plus;

    let n_plus_m = d_plus + in_schur.n_plus;
    let n_minus_m = d_minus + in_schur.n_minus;
    let n_zero_m = in_schur.n_zero;
    if n_plus_m < rho || n_minus_m < rho || n_zero_m + rho < m {
        panic!(
            "inconsistent bordered inertia: M=({n_plus_m},{n_zero_m},{n_minus_m}), rank={rho}, m={m}"
        );
    }
    let report = InertiaReport {
        n_plus: n_plus_m - rho,
        n_zero: n_zero_m - (m - rho),
        n_minus: n_minus_m - rho,
        small_pivots: 0,
    };
    debug_assert_eq!(report.dim(), n - rho);
    Ok(ConstrainedInertia {
        inertia: report,
        constraint_rank: rho,
        kernel_dim: n - rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q128;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn gram_q(entries: Vec<Vec<i64>>) -> GramMatrix<BigRational> {
        let n = entries.len();
        let e = entries
            .into_iter()
            .map(|r| r.into_iter().map(<BigRational as Scalar>::from_int).collect())
            .collect();
        GramMatrix::new(e, (0..n).map(|i| format!("v{i}")).collect()).unwrap()
    }

    #[test]
    fn inertia_diagonal() {
        let g = gram_q(vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, 0]]);
        let r = inertia(&g, &InertiaOptions::default());
        assert_eq!(r.signature(), (1, 1, 1));
    }

    #[test]
    fn inertia_hyperbolic_plane() {
        let g = gram_q(vec![vec![0, 1], vec![1, 0]]);
        let r = inertia(&g, &InertiaOptions::default());
        assert_eq!(r.signature(), (1, 0, 1));
    }

    #[test]
    fn inertia_float_mode() {
        let e = vec![
            vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(1e-14, 0.0)],
        ];
        let g = GramMatrix::new(e, vec!["a".into(), "b".into()]).unwrap();
        let r = inertia(&g, &InertiaOptions::default());
        assert_eq!(r.signature(), (1, 0, 1));
    }

    #[test]
    fn non_symmetric_rejected() {
        let e = vec![
            vec![<BigRational as Scalar>::from_int(0), <BigRational as Scalar>::from_int(1)],
            vec![<BigRational as Scalar>::from_int(2), <BigRational as Scalar>::from_int(0)],
        ];
        assert!(matches!(
            GramMatrix::new(e, vec!["a".into(), "b".into()]),
            Err(MetricError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn radical_of_diagonal() {
        let g = gram_q(vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, 0]]);
        let rad = radical_basis(&g, &InertiaOptions::default());
        assert_eq!(rad.len(), 1);
        assert_eq!(rad[0][2], <BigRational as Scalar>::from_int(1));
        assert!(Zero::is_zero(&rad[0][0]) && Zero::is_zero(&rad[0][1]));
    }

    #[test]
    fn radical_of_nondegenerate_is_empty() {
        let g = gram_q(vec![vec![2, 1], vec![1, 2]]);
        assert!(radical_basis(&g, &InertiaOptions::default()).is_empty());
    }

    #[test]
    fn quotient_examples() {
        let opts = InertiaOptions::default();
        let g = gram_q(vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, 0]]);
        let rad = radical_basis(&g, &opts);
        let q = quotient_gram(&g, &rad, &opts).unwrap();
        assert_eq!(q.dim(), 2);
        assert_eq!(inertia(&q, &opts).signature(), (1, 0, 1));

        let pd = gram_q(vec![vec![2, 1], vec![1, 3]]);
        let q2 = quotient_gram(&pd, &[], &opts).unwrap();
        assert_eq!(q2, pd);
    }

    #[test]
    fn quotient_rejects_bad_radical() {
        let opts = InertiaOptions::default();
        let g = gram_q(vec![vec![1, 0], vec![0, -1]]);
        let bad = vec![vec![<BigRational as Scalar>::from_int(1), <BigRational as Scalar>::from_int(0)]];
        assert!(matches!(
            quotient_gram(&g, &bad, &opts),
            Err(MetricError::RadicalNotInKernel { .. })
        ));
    }

    #[test]
    fn small_pivot_warning_in_float_mode() {
        let c = |x: f64| Complex64::new(x, 0.0);
        // Second pivot is far below the warning threshold but above the
        // zero threshold.
        let e = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1e-8)]];
        let g = GramMatrix::new(e, vec!["a".into(), "b".into()]).unwrap();
        let r = inertia(&g, &InertiaOptions::default());
        assert_eq!(r.signature(), (2, 0, 0));
        assert_eq!(r.small_pivots, 1);
    }

    #[test]
    fn float_radical() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let e = vec![
            vec![c(1.0), c(1.0)],
            vec![c(1.0), c(1.0 + 1e-14)],
        ];
        let g = GramMatrix::new(e, vec!["a".into(), "b".into()]).unwrap();
        let rad = radical_basis(&g, &InertiaOptions::default());
        assert_eq!(rad.len(), 1);
        // Kernel direction (1, −1) up to scale.
        let ratio = rad[0][0] / rad[0][1];
        assert!((ratio + Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn kernel_with_q128() {
        // x + y = 0 over two rows with a dependent second row.
        let rows = vec![
            vec![Q128::from_int(1), Q128::from_int(1)],
            vec![Q128::from_int(2), Q128::from_int(2)],
        ];
        let k = kernel_basis(&rows, &InertiaOptions::default());
        assert_eq!(k.len(), 1);
        assert_eq!(k[0][0] + k[0][1], Q128::zero());
        assert_eq!(rank(&rows, &InertiaOptions::default()), 1);
    }

    /// Explicit route: kernel basis of A, then the inertia of Kᵀ D K.
    fn restricted_inertia_explicit(
        diag: &[BigRational],
        rows_dense: &[Vec<BigRational>],
    ) -> InertiaReport {
        let opts = InertiaOptions::default();
        let kernel = kernel_basis(rows_dense, &opts);
        let k = kernel.len();
        let mut entries = vec![vec![rat_zero(); k]; k];
        for a in 0..k {
            for b in 0..k {
                let mut acc = rat_zero();
                for j in 0..diag.len() {
                    acc += kernel[a][j].clone() * diag[j].clone() * kernel[b][j].clone();
                }
                entries[a][b] = acc;
            }
        }
        let g = GramMatrix::new(entries, (0..k).map(|i| format!("k{i}")).collect()).unwrap();
        inertia(&g, &opts)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        // Sylvester invariance under invertible congruence.
        #[test]
        fn sylvester_invariance(
            diag in proptest::collection::vec(-3i64..=3, 2..5),
            seed in proptest::collection::vec(-2i64..=2, 25),
        ) {
            let n = diag.len();
            let g = GramMatrix::from_diagonal(
                diag.iter().map(|&v| <BigRational as Scalar>::from_int(v)).collect(),
            );
            // Unit upper-triangular + permuted sign flips: always invertible.
            let mut s = vec![vec![<BigRational as Scalar>::zero(); n]; n];
            for i in 0..n {
                s[i][i] = <BigRational as Scalar>::from_int(if seed[i] >= 0 { 1 } else { -1 });
                for j in (i + 1)..n {
                    s[i][j] = <BigRational as Scalar>::from_int(seed[(5 * i + j) % seed.len()]);
                }
            }
            let opts = InertiaOptions::default();
            let before = inertia(&g, &opts);
            let after = inertia(&g.congruence(&s), &opts);
            prop_assert_eq!(before.signature(), after.signature());
        }

        // Quotient by the radical kills n₀ and preserves (n₊, n₋).
        #[test]
        fn quotient_kills_radical(
            entries in proptest::collection::vec(-2i64..=2, 16),
        ) {
            let n = 4;
            let mut e = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in i..n {
                    e[i][j] = entries[i * n + j];
                    e[j][i] = e[i][j];
                }
            }
            let g = gram_q(e);
            let opts = InertiaOptions::default();
            let full = inertia(&g, &opts);
            let rad = radical_basis(&g, &opts);
            prop_assert_eq!(rad.len(), full.n_zero);
            let q = quotient_gram(&g, &rad, &opts).unwrap();
            let reduced = inertia(&q, &opts);
            prop_assert_eq!(reduced.signature(), (full.n_plus, 0, full.n_minus));
        }

        // Bordered-route inertia agrees with the explicit kernel route.
        #[test]
        fn constrained_inertia_cross_route(
            diag_signs in proptest::collection::vec(prop_oneof![Just(1i64), Just(-1), Just(2), Just(-3)], 3..7),
            row_entries in proptest::collection::vec(-2i64..=2, 14),
        ) {
            let n = diag_signs.len();
            let diag: Vec<BigRational> =
                diag_signs.iter().map(|&v| <BigRational as Scalar>::from_int(v)).collect();
            let m = 2;
            let mut sparse = Vec::new();
            let mut dense = Vec::new();
            for r in 0..m {
                let mut srow = Vec::new();
                let mut drow = vec![rat_zero(); n];
                for j in 0..n {
                    let v = row_entries[(r * n + j) % row_entries.len()];
                    if v != 0 {
                        srow.push((j, <BigRational as Scalar>::from_int(v)));
                        drow[j] = <BigRational as Scalar>::from_int(v);
                    }
                }
                sparse.push(srow);
                dense.push(drow);
            }
            let fast = constrained_inertia(&diag, &sparse).unwrap();
            let explicit = restricted_inertia_explicit(&diag, &dense);
            prop_assert_eq!(fast.inertia.signature(), explicit.signature());
            prop_assert_eq!(fast.kernel_dim, explicit.dim());
        }
    }
}
