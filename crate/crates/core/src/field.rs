//! Desk-scale second quantization: a bosonic multi-string layer over a
//! discretized single-string space, field operators, Poincaré covariance,
//! constrained test functions, and the observable-field checks on the
//! physical quotient.
//!
//! The single-string space is a finite family of orbitals (shell node ×
//! Fock vector) with the indefinite pairing `⟨χ_i, χ_j⟩ = w_node ⟨v_i, v_j⟩`
//! block-diagonal over nodes. Multi-string states are unnormalized
//! occupation monomials over orbitals, so pairings are permanents of small
//! Gram blocks and every identity checked here is algebraic at fixed
//! discretization — tolerances only absorb floating rounding.
//!
//! Null directions are kept as explicit radical representatives: quotient
//! statements are tested as "pairing vanishes against the whole constrained
//! family", never through abstract cosets.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{inner_definite, inner_indefinite, FockVector};
use crate::lorentz::{conjugation, gamma_lift, ConjugationKind, LorentzTransform};
use crate::propagator::{PropagatorError, ShellSampling, TestFunctionSpec};
use crate::virasoro::{apply_l, Momentum};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("coefficient vector has {got} entries, basis has {want} orbitals")]
    BasisMismatch { got: usize, want: usize },
    #[error("state would exceed the {0}-quantum cap")]
    QuantaCap(usize),
    #[error("node set is not closed under the transformation (node {0})")]
    NodeSetNotClosed(usize),
    #[error("no node with the requested spatial momentum")]
    NodeNotFound,
    #[error("section violates the constraints at node {node}: residual {residual:.3e}")]
    ConstraintViolated { node: usize, residual: f64 },
    #[error("tachyonic shell (r = −2) cannot enter the field layer")]
    TachyonShell,
    #[error("vector does not lie in the orbital span: residual {0:.3e}")]
    OutsideSpan(f64),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
}

#[derive(Clone, Debug)]
pub struct Node {
    pub r: f64,
    pub p: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct Orbital {
    pub node: usize,
    pub vector: FockVector<Complex64>,
    pub constrained: bool,
    pub null: bool,
}

/// Finite stand-in for the no-tachyon single-string space: orbitals over
/// forward-shell nodes with invariant weights and both pairings.
pub struct DiscretizedSingleString {
    pub d: usize,
    pub nodes: Vec<Node>,
    pub orbitals: Vec<Orbital>,
    gram_indef: Vec<Vec<Complex64>>,
    gram_def: Vec<Vec<Complex64>>,
}

impl DiscretizedSingleString {
    pub fn new(d: usize, nodes: Vec<Node>, orbitals: Vec<Orbital>) -> Result<Self, FieldError> {
        for n in &nodes {
            if n.r < 0.0 {
                return Err(FieldError::TachyonShell);
            }
        }
        let b = orbitals.len();
        let mut gram_indef = vec![vec![Complex64::new(0.0, 0.0); b]; b];
        let mut gram_def = vec![vec![Complex64::new(0.0, 0.0); b]; b];
        for i in 0..b {
            for j in 0..b {
                if orbitals[i].node != orbitals[j].node {
                    continue;
                }
                let w = nodes[orbitals[i].node].weight;
                gram_indef[i][j] =
                    inner_indefinite(&orbitals[i].vector, &orbitals[j].vector) * w;
                gram_def[i][j] = inner_definite(&orbitals[i].vector, &orbitals[j].vector) * w;
            }
        }
        Ok(DiscretizedSingleString {
            d,
            nodes,
            orbitals,
            gram_indef,
            gram_def,
        })
    }

    pub fn num_orbitals(&self) -> usize {
        self.orbitals.len()
    }

    pub fn gram_indef(&self, i: usize, j: usize) -> Complex64 {
        self.gram_indef[i][j]
    }

    pub fn gram_def(&self, i: usize, j: usize) -> Complex64 {
        self.gram_def[i][j]
    }

    /// Indefinite pairing of coefficient vectors: `Σ conj(a_i) M_ij b_j`.
    pub fn pairing_indef(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..a.len() {
            if a[i].norm() == 0.0 {
                continue;
            }
            for j in 0..b.len() {
                acc += a[i].conj() * self.gram_indef[i][j] * b[j];
            }
        }
        acc
    }

    /// Expands a Fock value at one node over that node's orbitals via the
    /// definite Gram block; also reports the norm of the component outside
    /// the span.
    pub fn express_at_node(
        &self,
        node: usize,
        value: &FockVector<Complex64>,
    ) -> (Vec<(usize, Complex64)>, f64) {
        let idx: Vec<usize> = (0..self.orbitals.len())
            .filter(|&i| self.orbitals[i].node == node)
            .collect();
        let k = idx.len();
        if k == 0 {
            let n = inner_definite(value, value).re.max(0.0).sqrt();
            return (Vec::new(), n);
        }
        // Solve G c = b on the block (G positive definite hermitian).
        let mut g: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); k + 1]; k];
        for (a, &i) in idx.iter().enumerate() {
            for (bcol, &j) in idx.iter().enumerate() {
                g[a][bcol] = inner_definite(&self.orbitals[i].vector, &self.orbitals[j].vector);
            }
            g[a][k] = inner_definite(&self.orbitals[i].vector, value);
        }
        for col in 0..k {
            let mut piv = col;
            for row in col + 1..k {
                if g[row][col].norm() > g[piv][col].norm() {
                    piv = row;
                }
            }
            g.swap(col, piv);
            let inv = Complex64::new(1.0, 0.0) / g[col][col];
            for c in col..=k {
                g[col][c] *= inv;
            }
            for row in 0..k {
                if row != col && g[row][col].norm() > 0.0 {
                    let f = g[row][col];
                    for c in col..=k {
                        let delta = f * g[col][c];
                        g[row][c] -= delta;
                    }
                }
            }
        }
        let coeffs: Vec<(usize, Complex64)> = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| (i, g[a][k]))
            .collect();
        let mut reconstructed = FockVector::zero(self.d);
        for &(i, c) in &coeffs {
            reconstructed = reconstructed.plus(&self.orbitals[i].vector.scaled(&c));
        }
        let diff = value.minus(&reconstructed);
        let residual = inner_definite(&diff, &diff).re.max(0.0).sqrt();
        (coeffs, residual)
    }
}

/// Discretization of a shell projection: orbital coefficients plus the
/// weighted norm of whatever part of the node values falls outside the
/// orbital span.
pub struct DiscretizedVector {
    pub coeffs: Vec<Complex64>,
    pub outside_span: f64,
}

/// Projects a test function onto the sampling defined by a discretized
/// space: `(ΠF)(p_k)` expanded over the orbitals at each node.
pub fn discretize(
    f: &TestFunctionSpec,
    dss: &DiscretizedSingleString,
) -> Result<DiscretizedVector, FieldError> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); dss.num_orbitals()];
    let mut outside_sq = 0.0;
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    for (k, node) in dss.nodes.iter().enumerate() {
        let level = ShellSampling::from_nodes(node.r, vec![node.p.clone()], vec![node.weight])
            .level()?;
        let ft = f.fourier_eval(&node.p)?;
        let value = ft
            .level_component(level)
            .scaled(&Complex64::new(root_2pi, 0.0));
        let (expansion, residual) = dss.express_at_node(k, &value);
        for (i, c) in expansion {
            coeffs[i] += c;
        }
        outside_sq += node.weight * residual * residual;
    }
    Ok(DiscretizedVector {
        coeffs,
        outside_span: outside_sq.sqrt(),
    })
}

/// Bosonic multi-string state: unnormalized occupation monomials over the
/// orbital basis, capped in total quanta (no silent truncation).
#[derive(Clone, Debug, PartialEq)]
pub struct MultiStringState {
    terms: BTreeMap<Vec<u16>, Complex64>,
    pub max_quanta: usize,
}

impl MultiStringState {
    pub fn vacuum(max_quanta: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        MultiStringState { terms, max_quanta }
    }

    pub fn from_quanta(orbitals: &[u16], max_quanta: usize) -> Self {
        assert!(orbitals.len() <= max_quanta);
        let mut key = orbitals.to_vec();
        key.sort_unstable();
        let mut terms = BTreeMap::new();
        terms.insert(key, Complex64::new(1.0, 0.0));
        MultiStringState { terms, max_quanta }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: Vec<u16>, coeff: Complex64) {
        if coeff.norm() == 0.0 {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().norm() == 0.0 {
                    e.remove();
                }
            }
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = MultiStringState {
            terms: BTreeMap::new(),
            max_quanta: self.max_quanta,
        };
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), *v);
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Creation part `a†(f)`.
    pub fn create(&self, f: &[Complex64]) -> Result<Self, FieldError> {
        let mut out = MultiStringState {
            terms: BTreeMap::new(),
            max_quanta: self.max_quanta,
        };
        for (key, c) in &self.terms {
            if key.len() + 1 > self.max_quanta {
                return Err(FieldError::QuantaCap(self.max_quanta));
            }
            for (i, fi) in f.iter().enumerate() {
                if fi.norm() == 0.0 {
                    continue;
                }
                let mut k2 = key.clone();
                k2.push(i as u16);
                k2.sort_unstable();
                out.add_term(k2, c * fi);
            }
        }
        Ok(out)
    }

    /// Annihilation part `a(f)`, contracting through the indefinite pairing:
    /// `[a(f), a†(χ_j)] = ⟨f, χ_j⟩`.
    pub fn annihilate(&self, f: &[Complex64], dss: &DiscretizedSingleString) -> Self {
        let mut out = MultiStringState {
            terms: BTreeMap::new(),
            max_quanta: self.max_quanta,
        };
        // ⟨f, χ_j⟩ for every orbital j.
        let mut pairings = vec![Complex64::new(0.0, 0.0); dss.num_orbitals()];
        for (j, pj) in pairings.iter_mut().enumerate() {
            for (i, fi) in f.iter().enumerate() {
                if fi.norm() > 0.0 {
                    *pj += fi.conj() * dss.gram_indef[i][j];
                }
            }
        }
        for (key, c) in &self.terms {
            let mut idx = 0;
            while idx < key.len() {
                let orbital = key[idx];
                let mut mult = 1;
                while idx + mult < key.len() && key[idx + mult] == orbital {
                    mult += 1;
                }
                let pairing = pairings[orbital as usize];
                if pairing.norm() > 0.0 {
                    let mut k2 = key.clone();
                    k2.remove(idx);
                    out.add_term(k2, c * pairing * mult as f64);
                }
                idx += mult;
            }
        }
        out
    }
}

/// String field operator `Φ(F) = a†(ΠF) + a(ΠF)` on a state.
pub fn field_apply(
    f_disc: &[Complex64],
    psi: &MultiStringState,
    dss: &DiscretizedSingleString,
) -> Result<MultiStringState, FieldError> {
    if f_disc.len() != dss.num_orbitals() {
        return Err(FieldError::BasisMismatch {
            got: f_disc.len(),
            want: dss.num_orbitals(),
        });
    }
    Ok(psi.create(f_disc)?.plus(&psi.annihilate(f_disc, dss)))
}

fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    // Row-expansion over a used-column mask; fine for the ≤ 5 quanta here.
    fn rec(m: &[Vec<Complex64>], row: usize, used: u32) -> Complex64 {
        let n = m.len();
        if row == n {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..n {
            if used & (1 << col) == 0 && m[row][col].norm() > 0.0 {
                acc += m[row][col] * rec(m, row + 1, used | (1 << col));
            }
        }
        acc
    }
    rec(m, 0, 0)
}

fn pairing_multistring(
    a: &MultiStringState,
    b: &MultiStringState,
    dss: &DiscretizedSingleString,
    definite: bool,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (ka, ca) in &a.terms {
        for (kb, cb) in &b.terms {
            if ka.len() != kb.len() {
                continue;
            }
            let j = ka.len();
            let mut m = vec![vec![Complex64::new(0.0, 0.0); j]; j];
            for (row, &ia) in ka.iter().enumerate() {
                for (col, &ib) in kb.iter().enumerate() {
                    m[row][col] = if definite {
                        dss.gram_def[ia as usize][ib as usize]
                    } else {
                        dss.gram_indef[ia as usize][ib as usize]
                    };
                }
            }
            acc += ca.conj() * cb * permanent(&m);
        }
    }
    acc
}

/// Indefinite multi-string pairing (permanents of the orbital Gram).
pub fn pairing_indef(
    a: &MultiStringState,
    b: &MultiStringState,
    dss: &DiscretizedSingleString,
) -> Complex64 {
    pairing_multistring(a, b, dss, false)
}

/// Positive-definite multi-string pairing.
pub fn pairing_def(
    a: &MultiStringState,
    b: &MultiStringState,
    dss: &DiscretizedSingleString,
) -> Complex64 {
    pairing_multistring(a, b, dss, true)
}

pub fn norm_def(a: &MultiStringState, dss: &DiscretizedSingleString) -> f64 {
    pairing_def(a, a, dss).re.max(0.0).sqrt()
}

/// Residual of the field commutation relation on a probe:
/// `‖(Φ(F)Φ(G) − Φ(G)Φ(F) − 2i Im⟨ΠF, ΠG⟩) Ψ‖ / ‖Ψ‖` in the definite norm.
pub fn field_commutator_residual(
    f_disc: &[Complex64],
    g_disc: &[Complex64],
    psi: &MultiStringState,
    dss: &DiscretizedSingleString,
) -> Result<f64, FieldError> {
    let fg = field_apply(f_disc, &field_apply(g_disc, psi, dss)?, dss)?;
    let gf = field_apply(g_disc, &field_apply(f_disc, psi, dss)?, dss)?;
    let scalar = dss.pairing_indef(f_disc, g_disc);
    let expected = psi.scaled(Complex64::new(0.0, 2.0 * scalar.im));
    let residual = fg.minus(&gf).minus(&expected);
    let denom = norm_def(psi, dss).max(1e-300);
    Ok(norm_def(&residual, dss) / denom)
}

/// One-string transition matrix of `U(a, Λ)`:
/// `(Uψ)(p) = e^{−ip·a} Γ(Λ) ψ(Λ⁻¹p)`. A finite orbit segment is never
/// closed under a nontrivial boost, so the map is partial: orbitals whose
/// node leaves the set have no column, and applying the lifted map to a
/// state that touches them is an error rather than a truncation.
pub struct SingleStringMap {
    pub columns: Vec<Option<Vec<(usize, Complex64)>>>,
}

pub fn single_string_poincare(
    dss: &DiscretizedSingleString,
    translation: &[f64],
    lambda: &LorentzTransform<Complex64>,
) -> Result<SingleStringMap, FieldError> {
    let mut node_image: Vec<Option<(usize, Vec<f64>)>> = Vec::with_capacity(dss.nodes.len());
    for node in &dss.nodes {
        let p = Momentum::new(node.p.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        let lp = lambda.apply(&p);
        let lp_re: Vec<f64> = lp.components().iter().map(|c| c.re).collect();
        let target = dss.nodes.iter().position(|m| {
            m.r == node.r
                && m.p
                    .iter()
                    .zip(&lp_re)
                    .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()))
        });
        node_image.push(target.map(|t| (t, lp_re)));
    }
    let mut columns = Vec::with_capacity(dss.num_orbitals());
    for orbital in &dss.orbitals {
        let Some((target, lp)) = &node_image[orbital.node] else {
            columns.push(None);
            continue;
        };
        // Minkowski phase e^{−i p'·a} at the transformed momentum.
        let pa = -lp[0] * translation[0]
            + lp[1..]
                .iter()
                .zip(&translation[1..])
                .map(|(p, a)| p * a)
                .sum::<f64>();
        let phase = Complex64::from_polar(1.0, -pa);
        let moved = gamma_lift(lambda, &orbital.vector)
            .map_err(|_| FieldError::NodeSetNotClosed(orbital.node))?;
        let (expansion, residual) = dss.express_at_node(*target, &moved);
        if residual > 1e-8 {
            return Err(FieldError::OutsideSpan(residual));
        }
        columns.push(Some(
            expansion
                .into_iter()
                .map(|(i, c)| (i, c * phase))
                .collect(),
        ));
    }
    Ok(SingleStringMap { columns })
}

impl SingleStringMap {
    pub fn apply_vector(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>, FieldError> {
        let n = self.columns.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, c) in coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let column = self.columns[i]
                .as_ref()
                .ok_or(FieldError::NodeSetNotClosed(i))?;
            for &(j, u) in column {
                out[j] += u * c;
            }
        }
        Ok(out)
    }
}

/// Multiplicative (second-quantized) lift of a one-string map.
pub fn poincare_act(
    map: &SingleStringMap,
    psi: &MultiStringState,
) -> Result<MultiStringState, FieldError> {
    let mut out = MultiStringState {
        terms: BTreeMap::new(),
        max_quanta: psi.max_quanta,
    };
    for (key, c) in &psi.terms {
        // Expand the product over quanta.
        let mut partial: Vec<(Vec<u16>, Complex64)> = vec![(Vec::new(), *c)];
        for &orbital in key {
            let column = map.columns[orbital as usize]
                .as_ref()
                .ok_or(FieldError::NodeSetNotClosed(orbital as usize))?;
            let mut next = Vec::new();
            for (prefix, coeff) in &partial {
                for &(j, u) in column {
                    let mut k2 = prefix.clone();
                    k2.push(j as u16);
                    next.push((k2, coeff * u));
                }
            }
            partial = next;
        }
        for (mut key2, coeff) in partial {
            key2.sort_unstable();
            out.add_term(key2, coeff);
        }
    }
    Ok(out)
}

/// Builds a constrained test function from a physical section over shell
/// nodes: validates the constraints at every node, symmetrizes against the
/// spatial reflection to make it real in the distinguished conjugation, and
/// wraps the node values with a compact mass window (χ(0) = 1).
pub fn constrained_test_function(
    r: f64,
    level: u64,
    section: &[(Vec<f64>, FockVector<Complex64>)],
    chi_width: f64,
) -> Result<TestFunctionSpec, FieldError> {
    if r < 0.0 {
        return Err(FieldError::TachyonShell);
    }
    let tol = 1e-10;
    // Constraint check at each node.
    for (k, (p, psi)) in section.iter().enumerate() {
        let mom = Momentum::new(p.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        let scale = inner_definite(psi, psi).re.sqrt().max(1e-300);
        for m in 1..=level.max(1) {
            let image = apply_l(m as i64, &mom, psi).map_err(PropagatorError::from)?;
            let norm = inner_definite(&image, &image).re.max(0.0).sqrt();
            if norm > tol * scale {
                return Err(FieldError::ConstraintViolated {
                    node: k,
                    residual: norm / scale,
                });
            }
        }
    }
    // Symmetrization ψ(ω, p⃗) + C₁ ψ(ω, −p⃗); the node family must contain
    // each spatial reflection.
    let mut nodes = Vec::with_capacity(section.len());
    for (p, psi) in section {
        let reflected: Vec<f64> = std::iter::once(p[0])
            .chain(p[1..].iter().map(|x| -x))
            .collect();
        let partner = section
            .iter()
            .find(|(q, _)| {
                q.iter()
                    .zip(&reflected)
                    .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()))
            })
            .ok_or(FieldError::NodeNotFound)?;
        let sym = psi.plus(&conjugation(ConjugationKind::C1, &partner.1));
        nodes.push((p[1..].to_vec(), sym));
    }
    Ok(TestFunctionSpec::ShellSection(
        crate::propagator::ShellSection {
            r,
            chi_width,
            nodes,
        },
    ))
}

#[derive(Clone, Debug)]
pub struct ObservableReport {
    /// Check (i): largest definite-norm fraction of `Φ(F)Ψ` outside the
    /// constrained sector over the constrained probes.
    pub outside_constrained_max: f64,
    /// Check (ii): largest normalized pairing of `Φ(F)Ψ″` against the
    /// constrained probes, for null-sector probes Ψ″.
    pub null_pairing_max: f64,
    /// Check (iii): largest normalized annihilator residual
    /// `‖a(Π L̂₋ₘ F) Ψ‖` over constrained probes, m = 1..level.
    pub annihilator_residual_max: f64,
}

impl ObservableReport {
    pub fn passes(&self, tol: f64) -> (bool, bool, bool) {
        (
            self.outside_constrained_max <= tol,
            self.null_pairing_max <= tol,
            self.annihilator_residual_max <= tol,
        )
    }
}

/// Definite norm of the part of a state that touches any non-constrained
/// orbital.
fn outside_constrained_norm(psi: &MultiStringState, dss: &DiscretizedSingleString) -> f64 {
    let mut outside = MultiStringState {
        terms: BTreeMap::new(),
        max_quanta: psi.max_quanta,
    };
    for (key, c) in &psi.terms {
        if key
            .iter()
            .any(|&i| !dss.orbitals[i as usize].constrained)
        {
            outside.add_term(key.clone(), *c);
        }
    }
    norm_def(&outside, dss)
}

/// Runs the three observable-field conditions for a test function against
/// probe batteries from the constrained and null sectors.
pub fn observable_lift_check(
    f: &TestFunctionSpec,
    dss: &DiscretizedSingleString,
    level: u64,
    kprime_probes: &[MultiStringState],
    knull_probes: &[MultiStringState],
) -> Result<ObservableReport, FieldError> {
    let f_disc = discretize(f, dss)?;
    let mut outside_max = f_disc.outside_span;
    for psi in kprime_probes {
        let image = field_apply(&f_disc.coeffs, psi, dss)?;
        let total = norm_def(&image, dss).max(1e-300);
        outside_max = outside_max.max(outside_constrained_norm(&image, dss) / total);
    }

    let mut null_pairing_max: f64 = 0.0;
    for psi in knull_probes {
        let image = field_apply(&f_disc.coeffs, psi, dss)?;
        let scale = norm_def(&image, dss).max(1e-300);
        for xi in kprime_probes {
            let pairing = pairing_indef(xi, &image, dss).norm();
            null_pairing_max = null_pairing_max.max(pairing / (scale * norm_def(xi, dss).max(1e-300)));
        }
    }

    // a(Π L̂₋ₘ F) node values: the lowering image of the projected section.
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let mut annihilator_max: f64 = 0.0;
    for m in 1..=level.max(1) {
        let mut pairings = vec![Complex64::new(0.0, 0.0); dss.num_orbitals()];
        let mut w_scale = 0.0f64;
        for (k, node) in dss.nodes.iter().enumerate() {
            let ft = f.fourier_eval(&node.p)?;
            let value = ft
                .level_component(
                    ShellSampling::from_nodes(node.r, vec![node.p.clone()], vec![node.weight])
                        .level()?,
                )
                .scaled(&Complex64::new(root_2pi, 0.0));
            let mom = Momentum::new(node.p.iter().map(|&x| Complex64::new(x, 0.0)).collect());
            let w = apply_l(-(m as i64), &mom, &value).map_err(PropagatorError::from)?;
            w_scale = w_scale.max(inner_definite(&w, &w).re.max(0.0).sqrt());
            for (j, orbital) in dss.orbitals.iter().enumerate() {
                if orbital.node == k {
                    pairings[j] +=
                        inner_indefinite(&w, &orbital.vector) * node.weight;
                }
            }
        }
        for psi in kprime_probes {
            // a(w)Ψ from the precomputed pairings.
            let mut out = MultiStringState {
                terms: BTreeMap::new(),
                max_quanta: psi.max_quanta,
            };
            for (key, c) in &psi.terms {
                for (idx, &orbital) in key.iter().enumerate() {
                    let pairing = pairings[orbital as usize];
                    if pairing.norm() > 0.0 {
                        let mut k2 = key.clone();
                        k2.remove(idx);
                        out.add_term(k2, c * pairing);
                    }
                }
            }
            let denom = (norm_def(psi, dss) * w_scale.max(1e-300)).max(1e-300);
            annihilator_max = annihilator_max.max(norm_def(&out, dss) / denom);
        }
    }

    Ok(ObservableReport {
        outside_constrained_max: outside_max,
        null_pairing_max,
        annihilator_residual_max: annihilator_max,
    })
}
