//! Orbit discretizations: node sets generated by powers of one exact
//! rational boost (plus the spatial reflection), with per-node orbital
//! bases transported from exact constrained-space data at the base point.
//!
//! Transport by the lifted boost keeps the constraint and null flags exact:
//! the intertwining identity moves kernels of the lowering constraints at
//! one momentum onto kernels at the boosted momentum. Equal node weights
//! realize the invariant counting measure on the orbit, so the lifted
//! transformations preserve the pairings on the nose.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::field::{DiscretizedSingleString, FieldError, MultiStringState, Node, Orbital};
use crate::fock::{level_basis, FockVector};
use crate::lorentz::{rational_boost, LorentzTransform};
use crate::scalar::Scalar;
use crate::spectrum::{constrained_space, default_shell_point, null_subspace, SpectrumError};
use crate::virasoro::Momentum;

type Rat = BigRational;

#[derive(Debug, thiserror::Error)]
pub enum OrbitError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("orbit construction needs boost parameters with c² − s² = 1")]
    BadBoost,
}

/// Orbit-sampled single-string space with its exact provenance.
pub struct OrbitLab {
    pub dss: DiscretizedSingleString,
    /// The generating boost, float copy for the lifted maps.
    pub boost: LorentzTransform<Complex64>,
    /// Exact node momenta, aligned with `dss.nodes`.
    pub momenta: Vec<Momentum<Rat>>,
    /// A transported physical (constrained, non-null) section ψ(p) ∈ ℋ′(p).
    pub physical_section: Vec<(Vec<f64>, FockVector<Complex64>)>,
    /// Index of the first orbital of each node in `dss.orbitals`.
    pub node_offsets: Vec<usize>,
    pub orbitals_per_node: usize,
}

fn to_c64(v: &FockVector<Rat>) -> FockVector<Complex64> {
    v.map_coefficients(|c| Complex64::new(c.to_f64().expect("coefficient out of f64 range"), 0.0))
}

fn momentum_to_f64(p: &Momentum<Rat>) -> Vec<f64> {
    p.components()
        .iter()
        .map(|c| c.to_f64().expect("momentum out of f64 range"))
        .collect()
}

/// Pivot columns of a stack of coefficient rows (exact elimination).
fn pivot_columns(rows: &[Vec<Rat>]) -> Vec<usize> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let n = a[0].len();
    let m = a.len();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..n {
        let mut piv = None;
        for i in r..m {
            if !Zero::is_zero(&a[i][c]) {
                piv = Some(i);
                break;
            }
        }
        let Some(piv) = piv else { continue };
        a.swap(r, piv);
        for i in (r + 1)..m {
            if Zero::is_zero(&a[i][c]) {
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
    pivots
}

/// Expresses Fock vectors as coefficient rows over a level basis.
fn coefficient_rows(vectors: &[FockVector<Rat>], d: usize, level: u64) -> Vec<Vec<Rat>> {
    let basis = level_basis(d, level);
    vectors
        .iter()
        .map(|v| basis.iter().map(|occ| v.coefficient(occ)).collect())
        .collect()
}

/// Builds the orbit lab at one excitation level: nodes `Λᵏ q` for
/// `k ∈ [k_min, k_max]` together with their spatial reflections, each node
/// carrying a full level basis split into (null ∪ physical ∪ complement)
/// with flags.
pub fn build_orbit_lab(
    d: usize,
    level: u64,
    k_min: i32,
    k_max: i32,
) -> Result<OrbitLab, OrbitError> {
    let q = default_shell_point(d, level, 0);
    let boost = rational_boost(
        &<Rat as Scalar>::from_ratio(5, 4),
        &<Rat as Scalar>::from_ratio(3, 4),
        1,
        d,
    )
    .map_err(|_| OrbitError::BadBoost)?;

    // Base-point exact data.
    let constrained = constrained_space(d, level, &q)?;
    let null = null_subspace(&constrained, d)?;

    // Reorder the constrained basis as null vectors first, then a physical
    // completion chosen from the constrained family.
    let mut ordered: Vec<(FockVector<Rat>, bool)> =
        null.iter().map(|v| (v.clone(), true)).collect();
    {
        let ambient = level_basis(d, level);
        let mut rows = coefficient_rows(&null, d, level);
        let mut rank = pivot_columns(&rows).len();
        for v in &constrained {
            let row: Vec<Rat> = ambient.iter().map(|occ| v.coefficient(occ)).collect();
            let mut trial = rows.clone();
            trial.push(row.clone());
            let trial_rank = pivot_columns(&trial).len();
            if trial_rank > rank {
                rank = trial_rank;
                rows.push(row);
                ordered.push((v.clone(), false));
            }
            if rows.len() == constrained.len() {
                break;
            }
        }
        debug_assert_eq!(rows.len(), constrained.len());
    }

    // Complement: coordinate monomials away from the constrained pivots.
    let full_rows = coefficient_rows(
        &ordered.iter().map(|(v, _)| v.clone()).collect::<Vec<_>>(),
        d,
        level,
    );
    let pivots = pivot_columns(&full_rows);
    let ambient = level_basis(d, level);
    let complement: Vec<FockVector<Rat>> = (0..ambient.len())
        .filter(|j| !pivots.contains(j))
        .map(|j| FockVector::monomial(d, ambient[j]))
        .collect();

    // Base orbital list: (vector, constrained flag, null flag).
    let mut base: Vec<(FockVector<Rat>, bool, bool)> = Vec::new();
    for (v, is_null) in &ordered {
        base.push((v.clone(), true, *is_null));
    }
    for v in &complement {
        base.push((v.clone(), false, false));
    }

    // Physical section seed: the first non-null constrained vector, if any,
    // otherwise the first constrained vector.
    let section_seed = ordered
        .iter()
        .find(|(_, is_null)| !is_null)
        .or_else(|| ordered.first())
        .map(|(v, _)| v.clone());

    // Node transformations: Λᵏ and reflection · Λᵏ. The reflection flips
    // every spatial axis, the mirror used by the reality symmetrization.
    let refl_matrix: Vec<Vec<Rat>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        if i == 0 {
                            <Rat as Scalar>::one()
                        } else {
                            -<Rat as Scalar>::one()
                        }
                    } else {
                        <Rat as Scalar>::zero()
                    }
                })
                .collect()
        })
        .collect();
    let reflection = LorentzTransform::new(refl_matrix).expect("square");

    let mut transforms: Vec<LorentzTransform<Rat>> = Vec::new();
    for k in k_min..=k_max {
        let mut t = LorentzTransform::<Rat>::identity(d);
        let step = if k >= 0 { boost.clone() } else { boost.inverse() };
        for _ in 0..k.unsigned_abs() {
            t = t.compose(&step);
        }
        transforms.push(t.clone());
        transforms.push(reflection.compose(&t));
    }

    let mut nodes = Vec::new();
    let mut momenta = Vec::new();
    let mut orbitals = Vec::new();
    let mut node_offsets = Vec::new();
    let mut physical_section = Vec::new();
    for t in &transforms {
        let p = t.apply(&q);
        let p_f64 = momentum_to_f64(&p);
        let node_index = nodes.len();
        node_offsets.push(orbitals.len());
        nodes.push(Node {
            r: 2.0 * (level as f64 - 1.0),
            p: p_f64.clone(),
            weight: 1.0,
        });
        for (v, constrained_flag, null_flag) in &base {
            let moved = crate::lorentz::gamma_lift(t, v).expect("dimensions match");
            orbitals.push(Orbital {
                node: node_index,
                vector: to_c64(&moved),
                constrained: *constrained_flag,
                null: *null_flag,
            });
        }
        if let Some(seed) = &section_seed {
            let moved = crate::lorentz::gamma_lift(t, seed).expect("dimensions match");
            physical_section.push((p_f64, to_c64(&moved)));
        }
        momenta.push(p);
    }

    let orbitals_per_node = base.len();
    let dss = DiscretizedSingleString::new(d, nodes, orbitals)?;
    Ok(OrbitLab {
        dss,
        boost: boost.map(|x| Complex64::new(x.to_f64().expect("boost out of range"), 0.0)),
        momenta,
        physical_section,
        node_offsets,
        orbitals_per_node,
    })
}

impl OrbitLab {
    /// Orbital index for (node, slot-within-node).
    pub fn orbital_index(&self, node: usize, slot: usize) -> usize {
        self.node_offsets[node] + slot
    }

    /// Probe batteries: constrained-sector states (vacuum, single quanta,
    /// pairs) and null-sector states (one null quantum, null × physical).
    pub fn probe_battery(
        &self,
        max_quanta: usize,
    ) -> (Vec<MultiStringState>, Vec<MultiStringState>) {
        let constrained: Vec<u16> = (0..self.dss.num_orbitals() as u16)
            .filter(|&i| {
                let o = &self.dss.orbitals[i as usize];
                o.constrained && !o.null
            })
            .collect();
        let null: Vec<u16> = (0..self.dss.num_orbitals() as u16)
            .filter(|&i| self.dss.orbitals[i as usize].null)
            .collect();
        let mut kprime = vec![MultiStringState::vacuum(max_quanta)];
        for &i in constrained.iter().take(4) {
            kprime.push(MultiStringState::from_quanta(&[i], max_quanta));
        }
        if constrained.len() >= 2 {
            kprime.push(MultiStringState::from_quanta(
                &[constrained[0], constrained[1]],
                max_quanta,
            ));
            kprime.push(MultiStringState::from_quanta(
                &[constrained[0], constrained[0]],
                max_quanta,
            ));
        }
        let mut knull = Vec::new();
        for &i in null.iter().take(2) {
            knull.push(MultiStringState::from_quanta(&[i], max_quanta));
            if let Some(&j) = constrained.first() {
                knull.push(MultiStringState::from_quanta(&[i, j], max_quanta));
            }
        }
        (kprime, knull)
    }

    /// Exact check that transported constrained orbitals satisfy the
    /// constraints at their own node (used by tests).
    pub fn verify_constraints(&self, level: u64) -> Result<(), OrbitError> {
        for (k, p) in self.momenta.iter().enumerate() {
            for slot in 0..self.orbitals_per_node {
                let orbital = &self.dss.orbitals[self.orbital_index(k, slot)];
                if !orbital.constrained {
                    continue;
                }
                let pc = p.map(|x| Complex64::new(x.to_f64().unwrap(), 0.0));
                for m in 1..=level.max(1) {
                    let image = crate::virasoro::apply_l(m as i64, &pc, &orbital.vector)
                        .expect("dimensions match");
                    let norm = crate::fock::inner_definite(&image, &image).re;
                    if norm.sqrt() > 1e-10 {
                        return Err(OrbitError::Field(FieldError::ConstraintViolated {
                            node: k,
                            residual: norm.sqrt(),
                        }));
                    }
                }
            }
        }
        Ok(())
    }
}
