//! Lorentz-invariant measures on the mass shells `V_r = {p² + r = 0}`,
//! in the energy-sheet and light-cone parametrizations, plus the fiber
//! decomposition of Lebesgue measure over the shells.
//!
//! Everything here is plain `f64` quadrature over declared boxes; node sets
//! are deterministic and sums run in fixed order. The shells live in a small
//! number of momentum dimensions (2–4 at desk scale); the oscillator
//! directions never enter these integrals.

use thiserror::Error;

use crate::quad::{gauss_legendre, tanh_sinh, tensor_integrate};

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("energy-sheet parametrization needs r ≥ 0 (got {0})")]
    NegativeMass(f64),
    #[error("region {0:?} is not valid for this parametrization")]
    WrongRegion(ShellRegion),
    #[error("quadrature box has dimension {got}, expected {want}")]
    BoxDimension { got: usize, want: usize },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ShellRegion {
    /// `p⁰ > 0` sheet (needs r ≥ 0 to be a component).
    PlusSheet,
    /// `p⁰ < 0` sheet.
    MinusSheet,
    /// `p⁺ > 0` region in light-cone coordinates, any r.
    LightconePlus,
    /// `p⁻ < 0` side.
    LightconeMinus,
}

/// Mass-shell identifier: the shell value `r` with `p² = −r`... the shell is
/// `p² + r = 0`, a two-sheeted hyperboloid for `r ≥ 0` and a one-sheeted
/// surface for `r < 0`.
#[derive(Clone, Copy, Debug)]
pub struct ShellSpec {
    pub r: f64,
    pub region: ShellRegion,
    pub d: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QuadRule {
    GaussLegendre,
    TanhSinh,
}

/// Deterministic tensor quadrature over a box in the shell coordinates
/// (dimension d−1: either `p⃗` or `(p̃, p⁺)`).
#[derive(Clone, Debug)]
pub struct QuadratureSpec {
    pub rule: QuadRule,
    pub nodes_per_axis: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Declared accuracy target, used for reporting only.
    pub target_rel_err: f64,
}

impl QuadratureSpec {
    pub fn gauss(nodes_per_axis: usize, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        QuadratureSpec {
            rule: QuadRule::GaussLegendre,
            nodes_per_axis,
            lo,
            hi,
            target_rel_err: 1e-10,
        }
    }

    fn axis_rules(&self) -> Vec<Vec<(f64, f64)>> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| match self.rule {
                QuadRule::GaussLegendre => gauss_legendre(self.nodes_per_axis, a, b),
                QuadRule::TanhSinh => tanh_sinh(self.nodes_per_axis, a, b),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegralValue {
    pub value: f64,
    /// Set when the light-cone box approaches the `p⁺ = 0` weight
    /// singularity (declared support margins are the caller's contract).
    pub near_singularity: bool,
}

/// Energy of a spatial momentum on the shell: `ω_r(p⃗) = √(|p⃗|² + r)`.
pub fn omega(r: f64, spatial: &[f64]) -> f64 {
    (spatial.iter().map(|x| x * x).sum::<f64>() + r).sqrt()
}

/// Shell integral in the energy parametrization:
/// `∫ f(±ω_r(p⃗), p⃗) dp⃗ / (2 ω_r(p⃗))` over the declared box.
pub fn integrate_energy_param(
    f: impl Fn(&[f64]) -> f64,
    shell: &ShellSpec,
    quad: &QuadratureSpec,
) -> Result<f64, MeasureError> {
    if shell.r < 0.0 {
        return Err(MeasureError::NegativeMass(shell.r));
    }
    let sign = match shell.region {
        ShellRegion::PlusSheet => 1.0,
        ShellRegion::MinusSheet => -1.0,
        other => return Err(MeasureError::WrongRegion(other)),
    };
    if quad.lo.len() != shell.d - 1 {
        return Err(MeasureError::BoxDimension {
            got: quad.lo.len(),
            want: shell.d - 1,
        });
    }
    let rules = quad.axis_rules();
    let mut point = vec![0.0; shell.d];
    let value = tensor_integrate(&rules, |spatial| {
        let w = omega(shell.r, spatial);
        point[0] = sign * w;
        point[1..].copy_from_slice(spatial);
        f(&point) / (2.0 * w)
    });
    Ok(value)
}

/// Shell integral in light-cone coordinates, valid for any `r`:
/// `∫ f̂((|p̃|²+r)/2p⁺, p̃, p⁺) dp̃ dp⁺ / (2|p⁺|)` where
/// `p^± = (p⁰ ± p^{d−1})/√2`. The box axes are `(p̃…, p⁺)` with `p⁺` last.
pub fn integrate_lightcone_param(
    f: impl Fn(&[f64]) -> f64,
    shell: &ShellSpec,
    quad: &QuadratureSpec,
) -> Result<IntegralValue, MeasureError> {
    let positive = match shell.region {
        ShellRegion::LightconePlus => true,
        ShellRegion::LightconeMinus => false,
        other => return Err(MeasureError::WrongRegion(other)),
    };
    if quad.lo.len() != shell.d - 1 {
        return Err(MeasureError::BoxDimension {
            got: quad.lo.len(),
            want: shell.d - 1,
        });
    }
    let plus_axis = shell.d - 2;
    let margin = 1e-6 * (quad.hi[plus_axis] - quad.lo[plus_axis]).abs().max(1.0);
    let near_singularity = if positive {
        quad.lo[plus_axis] < margin
    } else {
        quad.hi[plus_axis] > -margin
    };
    let sqrt2 = std::f64::consts::SQRT_2;
    let rules = quad.axis_rules();
    let mut point = vec![0.0; shell.d];
    let value = tensor_integrate(&rules, |coords| {
        let p_plus = coords[plus_axis];
        if p_plus == 0.0 {
            return 0.0;
        }
        let tilde = &coords[..plus_axis];
        let tilde_sq: f64 = tilde.iter().map(|x| x * x).sum();
        let p_minus = (tilde_sq + shell.r) / (2.0 * p_plus);
        point[0] = (p_plus + p_minus) / sqrt2;
        point[shell.d - 1] = (p_plus - p_minus) / sqrt2;
        point[1..shell.d - 1].copy_from_slice(tilde);
        f(&point) / (2.0 * p_plus.abs())
    });
    Ok(IntegralValue {
        value,
        near_singularity,
    })
}

/// Integral of `f` over the shell using whichever parametrization matches
/// the declared region.
pub fn integrate_shell(
    f: impl Fn(&[f64]) -> f64,
    shell: &ShellSpec,
    quad: &QuadratureSpec,
) -> Result<f64, MeasureError> {
    match shell.region {
        ShellRegion::PlusSheet | ShellRegion::MinusSheet => {
            integrate_energy_param(f, shell, quad)
        }
        _ => Ok(integrate_lightcone_param(f, shell, quad)?.value),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InvarianceReport {
    pub base: f64,
    pub transformed: f64,
    pub rel_err: f64,
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares `∫ f dμ_r` with `∫ (f∘Λ) dμ_r`; for a proper transformation
/// the two agree up to quadrature error.
pub fn check_invariance(
    f: impl Fn(&[f64]) -> f64,
    shell: &ShellSpec,
    lambda: &[Vec<f64>],
    quad: &QuadratureSpec,
) -> Result<InvarianceReport, MeasureError> {
    let d = shell.d;
    assert!(lambda.len() == d && lambda.iter().all(|r| r.len() == d));
    let base = integrate_shell(&f, shell, quad)?;
    let composed = |p: &[f64]| {
        let mut q = vec![0.0; d];
        for (i, qi) in q.iter_mut().enumerate() {
            for (j, &pj) in p.iter().enumerate() {
                *qi += lambda[i][j] * pj;
            }
        }
        f(&q)
    };
    let transformed = integrate_shell(composed, shell, quad)?;
    Ok(InvarianceReport {
        base,
        transformed,
        rel_err: rel_err(base, transformed),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct FiberReport {
    pub lebesgue: f64,
    pub iterated: f64,
    pub rel_err: f64,
}

/// Fiber decomposition of Lebesgue measure: the d-dimensional integral of
/// `f` equals the integral over `r` of the shell integrals of its
/// restrictions. The inner integrals use the light-cone parametrization
/// (valid for every `r`), so the support of `f` must stay inside `p⁺ > 0`
/// with a margin.
pub fn fiber_decomposition_check(
    f: impl Fn(&[f64]) -> f64,
    d: usize,
    momentum_box: (&[f64], &[f64]),
    momentum_nodes: usize,
    lightcone_quad: &QuadratureSpec,
    r_range: (f64, f64),
    r_nodes: usize,
) -> Result<FiberReport, MeasureError> {
    if momentum_box.0.len() != d {
        return Err(MeasureError::BoxDimension {
            got: momentum_box.0.len(),
            want: d,
        });
    }
    let rules: Vec<_> = momentum_box
        .0
        .iter()
        .zip(momentum_box.1)
        .map(|(&a, &b)| gauss_legendre(momentum_nodes, a, b))
        .collect();
    let lebesgue = tensor_integrate(&rules, |p| f(p));

    let r_rule = gauss_legendre(r_nodes, r_range.0, r_range.1);
    let mut iterated = 0.0;
    for &(r, w) in &r_rule {
        let shell = ShellSpec {
            r,
            region: ShellRegion::LightconePlus,
            d,
        };
        let inner = integrate_lightcone_param(&f, &shell, lightcone_quad)?;
        iterated += w * inner.value;
    }
    Ok(FiberReport {
        lebesgue,
        iterated,
        rel_err: rel_err(lebesgue, iterated),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(width: f64) -> impl Fn(&[f64]) -> f64 {
        move |p: &[f64]| (-p.iter().map(|x| x * x).sum::<f64>() / (width * width)).exp()
    }

    #[test]
    fn zero_integrand() {
        let shell = ShellSpec {
            r: 1.0,
            region: ShellRegion::PlusSheet,
            d: 2,
        };
        let quad = QuadratureSpec::gauss(32, vec![-6.0], vec![6.0]);
        assert_eq!(integrate_energy_param(|_| 0.0, &shell, &quad).unwrap(), 0.0);
        let lc = ShellSpec {
            r: 1.0,
            region: ShellRegion::LightconePlus,
            d: 2,
        };
        let quad_lc = QuadratureSpec::gauss(32, vec![0.3], vec![8.0]);
        assert_eq!(
            integrate_lightcone_param(|_| 0.0, &lc, &quad_lc).unwrap().value,
            0.0
        );
    }

    #[test]
    fn energy_param_matches_refined_oracle() {
        // d = 2, r = 1, Gaussian falloff in the spatial coordinate:
        // ∫ e^{−u²} / (2√(u²+1)) du over [−8, 8].
        let shell = ShellSpec {
            r: 1.0,
            region: ShellRegion::PlusSheet,
            d: 2,
        };
        let quad = QuadratureSpec::gauss(128, vec![-8.0], vec![8.0]);
        let f = |p: &[f64]| (-p[1] * p[1]).exp();
        let got = integrate_energy_param(f, &shell, &quad).unwrap();
        let oracle = crate::quad::refine_1d(
            |u| (-u * u).exp() / (2.0 * (u * u + 1.0).sqrt()),
            -8.0,
            8.0,
            1e-13,
        );
        assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
        // Frozen from the refinement oracle.
        assert!((oracle - 0.7620546928869539).abs() < 1e-12, "oracle = {oracle:.16}");
    }

    #[test]
    fn odd_integrand_vanishes() {
        let shell = ShellSpec {
            r: 2.0,
            region: ShellRegion::PlusSheet,
            d: 3,
        };
        let quad = QuadratureSpec::gauss(40, vec![-5.0, -5.0], vec![5.0, 5.0]);
        let f = |p: &[f64]| p[1] * (-p[1] * p[1] - p[2] * p[2]).exp();
        let v = integrate_energy_param(f, &shell, &quad).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn parametrizations_agree() {
        // A bump on the forward sheet with p⁺ bounded away from zero: both
        // parametrizations integrate the same measure.
        for (d, ne, nl) in [(2usize, 128usize, 140usize), (3, 160, 200)] {
            let shell_e = ShellSpec {
                r: 1.0,
                region: ShellRegion::PlusSheet,
                d,
            };
            let shell_lc = ShellSpec {
                r: 1.0,
                region: ShellRegion::LightconePlus,
                d,
            };
            let f = gaussian(1.3);
            let quad_e = QuadratureSpec::gauss(ne, vec![-7.0; d - 1], vec![7.0; d - 1]);
            let a = integrate_energy_param(&f, &shell_e, &quad_e).unwrap();
            // On the forward sheet p⁺ ∈ (0, ∞); the Gaussian tail makes a
            // truncated p⁺ box adequate.
            let mut lo = vec![-7.0; d - 1];
            let mut hi = vec![7.0; d - 1];
            lo[d - 2] = 1e-3;
            hi[d - 2] = 12.0;
            let quad_lc = QuadratureSpec {
                rule: QuadRule::TanhSinh,
                nodes_per_axis: nl,
                lo,
                hi,
                target_rel_err: 1e-9,
            };
            let b = integrate_lightcone_param(&f, &shell_lc, &quad_lc).unwrap();
            let rel = (a - b.value).abs() / a.abs();
            assert!(rel <= 1e-8, "d={d}: energy {a} vs lightcone {} rel {rel}", b.value);
        }
    }

    #[test]
    fn lightcone_handles_negative_r() {
        // r = −2: only the light-cone parametrization applies. Value pinned
        // by node-count refinement.
        let shell = ShellSpec {
            r: -2.0,
            region: ShellRegion::LightconePlus,
            d: 2,
        };
        let f = |p: &[f64]| {
            let u = (p[0] - 3.0, p[1] - 1.0);
            (-(u.0 * u.0 + u.1 * u.1)).exp()
        };
        let quad = |n: usize| QuadratureSpec::gauss(n, vec![0.05], vec![10.0]);
        let coarse = integrate_lightcone_param(&f, &shell, &quad(64)).unwrap();
        let fine = integrate_lightcone_param(&f, &shell, &quad(128)).unwrap();
        assert!((coarse.value - fine.value).abs() <= 1e-9 * fine.value.abs());
        assert!(fine.value > 0.0);
    }

    #[test]
    fn near_singularity_flagged() {
        let shell = ShellSpec {
            r: 1.0,
            region: ShellRegion::LightconePlus,
            d: 2,
        };
        let touching = QuadratureSpec::gauss(16, vec![0.0], vec![4.0]);
        let v = integrate_lightcone_param(|_| 1.0, &shell, &touching).unwrap();
        assert!(v.near_singularity);
        let safe = QuadratureSpec::gauss(16, vec![0.5], vec![4.0]);
        let w = integrate_lightcone_param(|_| 1.0, &shell, &safe).unwrap();
        assert!(!w.near_singularity);
    }

    #[test]
    fn invariance_identity_and_rotation() {
        let shell = ShellSpec {
            r: 1.0,
            region: ShellRegion::PlusSheet,
            d: 3,
        };
        let quad = QuadratureSpec::gauss(48, vec![-7.0, -7.0], vec![7.0, 7.0]);
        let f = gaussian(1.0);
        let id = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let rep = check_invariance(&f, &shell, &id, &quad).unwrap();
        assert_eq!(rep.rel_err, 0.0);

        let (c, s) = (0.6f64, 0.8f64);
        let rot = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, c, -s],
            vec![0.0, s, c],
        ];
        let rep2 = check_invariance(&f, &shell, &rot, &quad).unwrap();
        assert!(rep2.rel_err <= 1e-12, "rel {}", rep2.rel_err);
    }

    #[test]
    fn invariance_under_rational_boost() {
        // Boost with cosh = 5/4, sinh = 3/4 mixing (p⁰, p¹); the integrand
        // depends on p⁰ too, so this genuinely probes the measure.
        let shell = ShellSpec {
            r: 1.0,
            region: ShellRegion::PlusSheet,
            d: 3,
        };
        let quad = QuadratureSpec::gauss(160, vec![-16.0, -16.0], vec![16.0, 16.0]);
        let f = |p: &[f64]| (-(p[0] * p[0]) / 8.0 - p[1] * p[1] - p[2] * p[2]).exp();
        let boost = vec![
            vec![1.25, 0.75, 0.0],
            vec![0.75, 1.25, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let rep = check_invariance(&f, &shell, &boost, &quad).unwrap();
        assert!(rep.rel_err <= 1e-8, "rel {}", rep.rel_err);
    }

    #[test]
    fn fiber_decomposition_forward_cone() {
        // d = 2 Gaussian bump centered deep in the forward cone.
        let f = |p: &[f64]| {
            let u = (p[0] - 4.0, p[1] - 1.0);
            (-2.0 * (u.0 * u.0 + u.1 * u.1)).exp()
        };
        // Support ~ [1, 7]×[−2, 4]: p⁺ = (p⁰+p¹)/√2 stays positive, and
        // r = −p² ranges over roughly (−20, 55) there.
        let lc_quad = QuadratureSpec::gauss(80, vec![0.05], vec![9.0]);
        let rep = fiber_decomposition_check(
            &f,
            2,
            (&[0.5, -3.0], &[8.0, 5.0]),
            80,
            &lc_quad,
            (-20.0, 55.0),
            120,
        )
        .unwrap();
        assert!(rep.rel_err <= 1e-6, "lhs {} rhs {} rel {}", rep.lebesgue, rep.iterated, rep.rel_err);
    }

    #[test]
    fn energy_param_rejects_negative_mass() {
        let shell = ShellSpec {
            r: -1.0,
            region: ShellRegion::PlusSheet,
            d: 2,
        };
        let quad = QuadratureSpec::gauss(8, vec![-1.0], vec![1.0]);
        assert_eq!(
            integrate_energy_param(|_| 1.0, &shell, &quad),
            Err(MeasureError::NegativeMass(-1.0))
        );
    }

    #[test]
    fn fiber_of_zero_integrand() {
        let lc_quad = QuadratureSpec::gauss(8, vec![0.1], vec![2.0]);
        let rep = fiber_decomposition_check(
            |_| 0.0,
            2,
            (&[0.0, -1.0], &[2.0, 1.0]),
            8,
            &lc_quad,
            (-2.0, 2.0),
            8,
        )
        .unwrap();
        assert_eq!((rep.lebesgue, rep.iterated, rep.rel_err), (0.0, 0.0, 0.0));
    }

    #[test]
    fn positivity() {
        let shell = ShellSpec {
            r: 0.5,
            region: ShellRegion::PlusSheet,
            d: 2,
        };
        let quad = QuadratureSpec::gauss(48, vec![-5.0], vec![5.0]);
        let v = integrate_energy_param(|p| (-p[1] * p[1]).exp() + 0.1, &shell, &quad).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn refinement_improves_invariance() {
        let shell = ShellSpec {
            r: 1.0,
            region: ShellRegion::PlusSheet,
            d: 2,
        };
        let f = |p: &[f64]| (-(p[0] * p[0]) / 6.0 - p[1] * p[1] / 2.0).exp();
        let boost = vec![vec![1.25, 0.75], vec![0.75, 1.25]];
        let coarse = check_invariance(
            &f,
            &shell,
            &boost,
            &QuadratureSpec::gauss(8, vec![-9.0], vec![9.0]),
        )
        .unwrap();
        let fine = check_invariance(
            &f,
            &shell,
            &boost,
            &QuadratureSpec::gauss(64, vec![-9.0], vec![9.0]),
        )
        .unwrap();
        assert!(fine.rel_err <= coarse.rel_err + 1e-15);
    }
}
