//! Smeared commutators of the free string field through the two computable
//! routes: the on-shell projection identity in momentum space (any d), and
//! the closed-form d = 2 commutator kernel in position space, which serves
//! as the independent oracle.
//!
//! The propagator difference of retarded and advanced fundamental solutions
//! is never built as an operator. Its smeared matrix elements are reached
//! either as `2 Im ⟨ΠF, ΠG⟩` over shell samplings, or (at d = 2, per mass)
//! by convolution against `E_r(z) = ½ sgn(z⁰) J₀(√r √(−z²))` inside the
//! light cone, zero outside. Fourier conventions:
//! `F̃(p) = (2π)^{−d/2} ∫ e^{−ip·x} F(x) dx` with the Minkowski phase
//! `p·x = −p⁰x⁰ + p⃗·x⃗`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::FockVector;
use crate::mass_shell::omega;
use crate::quad::gauss_legendre;

#[derive(Debug, Error, PartialEq)]
pub enum PropagatorError {
    #[error("test-function polarization has a level-0 (tachyonic) component")]
    TachyonPolarization,
    #[error("spacetime dimension mismatch: {got} vs {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("sampling mismatch: {0}")]
    SamplingMismatch(String),
    #[error("shell value {0} is not of the form 2(level−1)")]
    BadShellValue(f64),
    #[error("on-shell section has no node at the requested momentum")]
    NodeNotFound,
    #[error("this operation is defined for d = 2 only")]
    OnlyD2,
    #[error("direction is not in the spacelike wedge |a⁰| < (1−ε)|a⃗|")]
    NotSpacelike,
}

/// Smooth profile family for separable test functions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ProfileKind {
    /// `exp(−t²/2)` per axis; Schwartz class, analytic translation.
    Gaussian,
    /// `exp(−1/(1−t²))` on |t| < 1; compactly supported.
    Bump,
}

fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

fn bump_derivative(t: f64) -> f64 {
    if t.abs() < 1.0 {
        let s = 1.0 - t * t;
        bump(t) * (-2.0 * t / (s * s))
    } else {
        0.0
    }
}

/// Even real transform of the unit bump: `∫_{−1}^{1} e^{−iκt} b(t) dt`.
fn bump_transform(kappa: f64) -> f64 {
    // The integrand is smooth with all derivatives vanishing at ±1; a fixed
    // high-order rule reaches full precision for the |κ| ≲ 10³ in play.
    let rule = gauss_legendre(96, 0.0, 1.0);
    2.0 * rule
        .iter()
        .map(|&(t, w)| w * bump(t) * (kappa * t).cos())
        .sum::<f64>()
}

/// Spacetime test function: an analytic descriptor from which the Fourier
/// transform and the shell projections are evaluated.
#[derive(Clone, Debug)]
pub enum TestFunctionSpec {
    Separable(SeparableSpec),
    /// On-shell constrained section: a compactly supported mass-window
    /// envelope times a fixed Fock-valued function of the spatial momentum,
    /// defined at a declared node set.
    ShellSection(ShellSection),
    /// The Klein–Gordon operator applied to another test function; its
    /// Fourier transform carries a factor (p² + M²) per level.
    KgApplied(Box<TestFunctionSpec>),
}

#[derive(Clone, Debug)]
pub struct SeparableSpec {
    pub kind: ProfileKind,
    pub center: Vec<f64>,
    pub widths: Vec<f64>,
    pub amplitude: Complex64,
    pub polarization: FockVector<Complex64>,
}

#[derive(Clone, Debug)]
pub struct ShellSection {
    /// Shell this section lives on (`r = 2(level−1) ≥ 0`).
    pub r: f64,
    /// Half-width of the compact mass-window envelope χ, with χ(0) = 1.
    pub chi_width: f64,
    /// Spatial-momentum keyed Fock values `h(p⃗)`.
    pub nodes: Vec<(Vec<f64>, FockVector<Complex64>)>,
}

impl SeparableSpec {
    pub fn new(
        kind: ProfileKind,
        center: Vec<f64>,
        widths: Vec<f64>,
        amplitude: Complex64,
        polarization: FockVector<Complex64>,
    ) -> Result<Self, PropagatorError> {
        if center.len() != widths.len() {
            return Err(PropagatorError::DimensionMismatch {
                got: widths.len(),
                want: center.len(),
            });
        }
        if !polarization.level_component(0).is_zero() {
            return Err(PropagatorError::TachyonPolarization);
        }
        Ok(SeparableSpec {
            kind,
            center,
            widths,
            amplitude,
            polarization,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Scalar profile value at a spacetime point (amplitude included).
    pub fn value_at(&self, x: &[f64]) -> Complex64 {
        let mut prod = 1.0;
        for a in 0..self.dim() {
            let t = (x[a] - self.center[a]) / self.widths[a];
            prod *= match self.kind {
                ProfileKind::Gaussian => (-0.5 * t * t).exp(),
                ProfileKind::Bump => bump(t),
            };
        }
        self.amplitude * prod
    }

    /// Time derivative of the scalar profile.
    pub fn d_dt_at(&self, x: &[f64]) -> Complex64 {
        let t0 = (x[0] - self.center[0]) / self.widths[0];
        let mut prod = match self.kind {
            ProfileKind::Gaussian => (-0.5 * t0 * t0).exp() * (-t0),
            ProfileKind::Bump => bump_derivative(t0),
        } / self.widths[0];
        for a in 1..self.dim() {
            let t = (x[a] - self.center[a]) / self.widths[a];
            prod *= match self.kind {
                ProfileKind::Gaussian => (-0.5 * t * t).exp(),
                ProfileKind::Bump => bump(t),
            };
        }
        self.amplitude * prod
    }

    /// Box outside which the profile is zero (bump) or negligible at double
    /// precision (gaussian, 9σ).
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let reach = match self.kind {
            ProfileKind::Bump => 1.0,
            ProfileKind::Gaussian => 9.0,
        };
        let lo = self
            .center
            .iter()
            .zip(&self.widths)
            .map(|(c, w)| c - reach * w)
            .collect();
        let hi = self
            .center
            .iter()
            .zip(&self.widths)
            .map(|(c, w)| c + reach * w)
            .collect();
        (lo, hi)
    }

    /// Scalar Fourier factor (everything except the polarization).
    fn scalar_transform(&self, p: &[f64]) -> Complex64 {
        let d = self.dim();
        let mut value = self.amplitude;
        let norm = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
        for a in 0..d {
            // Minkowski phase: e^{−ip·x} = e^{+ip⁰x⁰} e^{−ip⃗·x⃗}.
            let k = if a == 0 { -p[0] } else { p[a] };
            let w = self.widths[a];
            let c = self.center[a];
            let phase = Complex64::from_polar(1.0, -k * c);
            value *= match self.kind {
                ProfileKind::Gaussian => {
                    phase * w * (2.0 * std::f64::consts::PI).sqrt()
                        * (-0.5 * k * k * w * w).exp()
                }
                ProfileKind::Bump => phase * w * bump_transform(k * w),
            };
        }
        value * norm
    }

    pub fn translated(&self, shift: &[f64]) -> SeparableSpec {
        let mut out = self.clone();
        for (c, s) in out.center.iter_mut().zip(shift) {
            *c += s;
        }
        out
    }
}

/// Compact mass-window envelope with χ(0) = 1 and support (−w, w).
fn chi_window(u: f64, width: f64) -> f64 {
    let t = u / width;
    if t.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

impl TestFunctionSpec {
    pub fn dim(&self) -> usize {
        match self {
            TestFunctionSpec::Separable(s) => s.dim(),
            TestFunctionSpec::ShellSection(s) => {
                s.nodes.first().map(|(p, _)| p.len() + 1).unwrap_or(0)
            }
            TestFunctionSpec::KgApplied(inner) => inner.dim(),
        }
    }

    /// Fock-valued Fourier transform at a momentum.
    pub fn fourier_eval(&self, p: &[f64]) -> Result<FockVector<Complex64>, PropagatorError> {
        match self {
            TestFunctionSpec::Separable(s) => {
                if p.len() != s.dim() {
                    return Err(PropagatorError::DimensionMismatch {
                        got: p.len(),
                        want: s.dim(),
                    });
                }
                Ok(s.polarization.map_coefficients(|c| c * s.scalar_transform(p)))
            }
            TestFunctionSpec::ShellSection(s) => {
                let spatial = &p[1..];
                let node = s
                    .nodes
                    .iter()
                    .find(|(q, _)| {
                        q.len() == spatial.len()
                            && q.iter()
                                .zip(spatial)
                                .all(|(a, b)| (a - b).abs() <= 1e-9)
                    })
                    .ok_or(PropagatorError::NodeNotFound)?;
                let p2 = minkowski_square(p);
                let factor = (2.0 * std::f64::consts::PI).powf(-0.5)
                    * chi_window(p2 + s.r, s.chi_width);
                Ok(node.1.map_coefficients(|c| c * factor))
            }
            TestFunctionSpec::KgApplied(inner) => {
                let base = inner.fourier_eval(p)?;
                let p2 = minkowski_square(p);
                let mut out = FockVector::zero(base.dim());
                for level in 0..=base.max_level() {
                    let comp = base.level_component(level);
                    if comp.is_zero() {
                        continue;
                    }
                    let m2 = 2.0 * (level as f64 - 1.0);
                    out = out.plus(&comp.scaled(&Complex64::new(p2 + m2, 0.0)));
                }
                Ok(out)
            }
        }
    }
}

pub fn minkowski_square(p: &[f64]) -> f64 {
    -p[0] * p[0] + p[1..].iter().map(|x| x * x).sum::<f64>()
}

impl From<crate::virasoro::VirasoroError> for PropagatorError {
    fn from(e: crate::virasoro::VirasoroError) -> Self {
        match e {
            crate::virasoro::VirasoroError::DimensionMismatch { got, want } => {
                PropagatorError::DimensionMismatch { got, want }
            }
        }
    }
}

/// Deterministic sampling of a forward mass shell with invariant-measure
/// weights.
#[derive(Clone, Debug)]
pub struct ShellSampling {
    pub r: f64,
    pub d: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl ShellSampling {
    /// Tensor Gauss–Legendre nodes on a spatial box, lifted to the forward
    /// sheet with weight `Π w / (2ω_r)`.
    pub fn forward_energy_box(r: f64, d: usize, lo: &[f64], hi: &[f64], n: usize) -> Self {
        assert_eq!(lo.len(), d - 1);
        let rules: Vec<_> = lo
            .iter()
            .zip(hi)
            .map(|(&a, &b)| gauss_legendre(n, a, b))
            .collect();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; d - 1];
        'outer: loop {
            let mut point = vec![0.0; d];
            let mut w = 1.0;
            for (axis, &i) in idx.iter().enumerate() {
                let (x, wx) = rules[axis][i];
                point[axis + 1] = x;
                w *= wx;
            }
            let en = omega(r, &point[1..]);
            point[0] = en;
            nodes.push(point);
            weights.push(w / (2.0 * en));
            // Odometer increment.
            for axis in (0..d - 1).rev() {
                idx[axis] += 1;
                if idx[axis] < rules[axis].len() {
                    continue 'outer;
                }
                idx[axis] = 0;
                if axis == 0 {
                    break 'outer;
                }
            }
            if d == 1 {
                break;
            }
        }
        ShellSampling {
            r,
            d,
            nodes,
            weights,
        }
    }

    /// Explicit node set (orbit samplings); weights are the caller's
    /// invariant assignment.
    pub fn from_nodes(r: f64, nodes: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), weights.len());
        let d = nodes.first().map(Vec::len).unwrap_or(0);
        ShellSampling {
            r,
            d,
            nodes,
            weights,
        }
    }

    /// Excitation level selected by this shell: `r = 2(level − 1)`.
    pub fn level(&self) -> Result<u64, PropagatorError> {
        let raw = self.r / 2.0 + 1.0;
        let rounded = raw.round();
        if (raw - rounded).abs() > 1e-9 || rounded < 0.0 {
            return Err(PropagatorError::BadShellValue(self.r));
        }
        Ok(rounded as u64)
    }
}

/// Shell projection `(ΠF)_r`: `√(2π)` times the mass-`r` component of the
/// Fourier transform, evaluated on the sampling nodes. The tachyon shell
/// projects to zero for every admissible test function.
pub fn project_pi(
    f: &TestFunctionSpec,
    sampling: &ShellSampling,
) -> Result<Vec<FockVector<Complex64>>, PropagatorError> {
    let level = sampling.level()?;
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    sampling
        .nodes
        .iter()
        .map(|p| {
            let ft = f.fourier_eval(p)?;
            Ok(ft
                .level_component(level)
                .scaled(&Complex64::new(root_2pi, 0.0)))
        })
        .collect()
}

/// Quadrature realization of the single-string pairing:
/// `Σ_nodes w · ⟨u(p), v(p)⟩` with the indefinite Fock pairing.
pub fn pairing_h(
    u: &[FockVector<Complex64>],
    v: &[FockVector<Complex64>],
    sampling: &ShellSampling,
) -> Result<Complex64, PropagatorError> {
    if u.len() != sampling.nodes.len() || v.len() != sampling.nodes.len() {
        return Err(PropagatorError::SamplingMismatch(format!(
            "{} and {} values against {} nodes",
            u.len(),
            v.len(),
            sampling.nodes.len()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for ((uu, vv), &w) in u.iter().zip(v).zip(&sampling.weights) {
        acc += crate::fock::inner_indefinite(uu, vv) * w;
    }
    Ok(acc)
}

/// Scalar value of the smeared field commutator:
/// `[Φ(F), Φ(G)] = 2i Im Σ_r ⟨(ΠF)_r, (ΠG)_r⟩`.
pub fn smeared_commutator(
    f: &TestFunctionSpec,
    g: &TestFunctionSpec,
    samplings: &[ShellSampling],
) -> Result<Complex64, PropagatorError> {
    let mut im_total = 0.0;
    for sampling in samplings {
        let pf = project_pi(f, sampling)?;
        let pg = project_pi(g, sampling)?;
        im_total += pairing_h(&pf, &pg, sampling)?.im;
    }
    Ok(Complex64::new(0.0, 2.0 * im_total))
}

/// Scalar single-mass pairing `⟨√2π f̃, √2π g̃⟩` restricted to a shell
/// sampling, for the profile parts alone. This is the per-mass inner
/// identity behind the commutator formula, valid at any `r ≥ 0` whether or
/// not it sits in the excitation tower.
pub fn scalar_pairing_on_shell(
    f: &SeparableSpec,
    g: &SeparableSpec,
    sampling: &ShellSampling,
) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, &w) in sampling.nodes.iter().zip(&sampling.weights) {
        acc += f.scalar_transform(p).conj() * g.scalar_transform(p) * (two_pi * w);
    }
    acc
}

/// Scalar momentum-route commutator value `⟨E_r f, g⟩ = 2 Im ⟨√2π f̃, √2π g̃⟩`
/// at a single mass (real profiles).
pub fn scalar_commutator_momentum(
    f: &SeparableSpec,
    g: &SeparableSpec,
    sampling: &ShellSampling,
) -> f64 {
    2.0 * scalar_pairing_on_shell(f, g, sampling).im
}

/// Bessel J₀: series for small argument, quadrature of the cosine integral
/// representation beyond (`J₀(x) = (1/π) ∫₀^π cos(x sin θ) dθ`).
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 12.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        sum
    } else {
        let rule = gauss_legendre(160, 0.0, std::f64::consts::PI);
        rule.iter()
            .map(|&(t, w)| w * (x * t.sin()).cos())
            .sum::<f64>()
            / std::f64::consts::PI
    }
}

/// Closed-form d = 2 commutator kernel at mass² `r`:
/// `½ sgn(x⁰) J₀(√r √(−x²))` inside the light cone, zero outside (and on
/// the cone boundary by the sign convention at x = 0).
pub fn pauli_jordan_oracle(r: f64, x: &[f64]) -> Result<f64, PropagatorError> {
    if x.len() != 2 {
        return Err(PropagatorError::OnlyD2);
    }
    let tau_sq = x[0] * x[0] - x[1] * x[1];
    if tau_sq <= 0.0 || x[0] == 0.0 {
        return Ok(0.0);
    }
    let arg = (r.max(0.0) * tau_sq).sqrt();
    Ok(0.5 * x[0].signum() * bessel_j0(arg))
}

/// Position-space solution `(E_r ⋆ f)(x)` for a separable profile at d = 2,
/// integrating over the light-cone wedge intersected with the support box.
/// `time_derivative` convolves against `∂₀f` instead.
pub fn propagator_convolution(
    f: &SeparableSpec,
    r: f64,
    x: &[f64],
    nodes: usize,
    time_derivative: bool,
) -> Result<f64, PropagatorError> {
    if f.dim() != 2 || x.len() != 2 {
        return Err(PropagatorError::OnlyD2);
    }
    let (lo, hi) = f.support_box();
    // Breakpoints in y⁰ where the integrand loses smoothness: the vertex
    // and the points where the cone meets the spatial support edges.
    let mut cuts = vec![lo[0], hi[0], x[0]];
    for edge in [lo[1], hi[1]] {
        let delta = (x[1] - edge).abs();
        cuts.push(x[0] - delta);
        cuts.push(x[0] + delta);
    }
    cuts.retain(|&t| t >= lo[0] && t <= hi[0]);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    // One unit rule, affinely mapped onto every subinterval.
    let unit = gauss_legendre(nodes, 0.0, 1.0);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let span0 = pair[1] - pair[0];
        for &(t0, u0) in &unit {
            let y0 = pair[0] + span0 * t0;
            let w0 = span0 * u0;
            let delta = (x[0] - y0).abs();
            if delta == 0.0 {
                continue;
            }
            let a = (x[1] - delta).max(lo[1]);
            let b = (x[1] + delta).min(hi[1]);
            if a >= b {
                continue;
            }
            let sign = 0.5 * (x[0] - y0).signum();
            let span1 = b - a;
            let mut inner = 0.0;
            for &(t1, u1) in &unit {
                let y1 = a + span1 * t1;
                let tau_sq = delta * delta - (x[1] - y1) * (x[1] - y1);
                let kernel = bessel_j0((r.max(0.0) * tau_sq).sqrt());
                let fv = if time_derivative {
                    f.d_dt_at(&[y0, y1]).re
                } else {
                    f.value_at(&[y0, y1]).re
                };
                inner += span1 * u1 * kernel * fv;
            }
            total += w0 * sign * inner;
        }
    }
    Ok(total)
}

/// Scalar part of `⟨EF, G⟩ = ∫ (E_r ⋆ f)(x) g(x) dx` over the support of g.
pub fn position_pairing_ef_g(
    f: &SeparableSpec,
    g: &SeparableSpec,
    r: f64,
    outer_nodes: usize,
    conv_nodes: usize,
) -> Result<f64, PropagatorError> {
    if f.dim() != 2 || g.dim() != 2 {
        return Err(PropagatorError::OnlyD2);
    }
    let (lo, hi) = g.support_box();
    let rule_t = gauss_legendre(outer_nodes, lo[0], hi[0]);
    let rule_s = gauss_legendre(outer_nodes, lo[1], hi[1]);
    let mut acc = 0.0;
    for &(t, wt) in &rule_t {
        for &(s, ws) in &rule_s {
            let ef = propagator_convolution(f, r, &[t, s], conv_nodes, false)?;
            acc += wt * ws * ef * g.value_at(&[t, s]).re;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct GreensReport {
    pub times: Vec<f64>,
    pub sigma_values: Vec<f64>,
    pub max_deviation: f64,
}

/// Symplectic form `σ_t(U, V)` of the two propagated solutions `U = EF`,
/// `V = EG` at each listed time, by spatial quadrature over the domain of
/// influence. For regular solutions the values are t-independent; the
/// spread across `times` measures the grid error.
pub fn greens_conservation_check(
    f: &SeparableSpec,
    g: &SeparableSpec,
    r: f64,
    times: &[f64],
    spatial_nodes: usize,
    conv_nodes: usize,
) -> Result<GreensReport, PropagatorError> {
    if f.dim() != 2 || g.dim() != 2 {
        return Err(PropagatorError::OnlyD2);
    }
    let (flo, fhi) = f.support_box();
    let (glo, ghi) = g.support_box();
    let mut sigma_values = Vec::with_capacity(times.len());
    for &t in times {
        // Domain of influence of both supports at time t.
        let reach_f = (t - flo[0]).abs().max((t - fhi[0]).abs());
        let reach_g = (t - glo[0]).abs().max((t - ghi[0]).abs());
        let lo = (flo[1] - reach_f).min(glo[1] - reach_g);
        let hi = (fhi[1] + reach_f).max(ghi[1] + reach_g);
        let rule = gauss_legendre(spatial_nodes, lo, hi);
        let mut sigma = 0.0;
        for &(s, w) in &rule {
            let x = [t, s];
            let u = propagator_convolution(f, r, &x, conv_nodes, false)?;
            let du = propagator_convolution(f, r, &x, conv_nodes, true)?;
            let v = propagator_convolution(g, r, &x, conv_nodes, false)?;
            let dv = propagator_convolution(g, r, &x, conv_nodes, true)?;
            sigma += w * (u * dv - du * v);
        }
        sigma_values.push(sigma);
    }
    let mut max_deviation: f64 = 0.0;
    for i in 0..sigma_values.len() {
        for j in (i + 1)..sigma_values.len() {
            max_deviation = max_deviation.max((sigma_values[i] - sigma_values[j]).abs());
        }
    }
    Ok(GreensReport {
        times: times.to_vec(),
        sigma_values,
        max_deviation,
    })
}

/// Is the direction inside the spacelike wedge `|a⁰| < (1−ε)|a⃗|`?
pub fn is_spacelike_direction(a: &[f64], epsilon: f64) -> bool {
    let spatial = a[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    a[0].abs() < (1.0 - epsilon) * spatial
}

/// Translates F along multiples of a spacelike direction and records the
/// commutator magnitude per radius; suitable for log-log slope extraction.
pub fn decay_scan(
    f: &SeparableSpec,
    g: &TestFunctionSpec,
    direction: &[f64],
    radii: &[f64],
    samplings: &[ShellSampling],
    epsilon: f64,
) -> Result<Vec<(f64, Complex64)>, PropagatorError> {
    if !is_spacelike_direction(direction, epsilon) {
        return Err(PropagatorError::NotSpacelike);
    }
    let mut table = Vec::with_capacity(radii.len());
    for &radius in radii {
        let shift: Vec<f64> = direction.iter().map(|c| c * radius).collect();
        let fa = TestFunctionSpec::Separable(f.translated(&shift));
        let value = smeared_commutator(&fa, g, samplings)?;
        table.push((radius, value));
    }
    Ok(table)
}

/// Least-squares slope of `log |value|` against `log radius`.
pub fn log_log_slope(table: &[(f64, Complex64)]) -> f64 {
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|&(r, v)| (r.ln(), v.norm().ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::inner_indefinite;

    fn pol_level1(d: usize) -> FockVector<Complex64> {
        // i·α₋₁¹Ω: C₁-real with unit positive norm.
        FockVector::from_factors(d, &[(1, 1)]).scaled(&Complex64::new(0.0, 1.0))
    }

    fn sep(kind: ProfileKind, center: Vec<f64>, widths: Vec<f64>) -> SeparableSpec {
        let d = center.len();
        SeparableSpec::new(kind, center, widths, Complex64::new(1.0, 0.0), pol_level1(d))
            .unwrap()
    }

    #[test]
    fn tachyon_polarization_rejected() {
        let bad = FockVector::<Complex64>::vacuum(2);
        assert_eq!(
            SeparableSpec::new(
                ProfileKind::Gaussian,
                vec![0.0, 0.0],
                vec![1.0, 1.0],
                Complex64::new(1.0, 0.0),
                bad
            )
            .unwrap_err(),
            PropagatorError::TachyonPolarization
        );
    }

    #[test]
    fn gaussian_transform_at_origin_is_positive() {
        let f = TestFunctionSpec::Separable(sep(
            ProfileKind::Gaussian,
            vec![0.0, 0.0],
            vec![1.0, 0.7],
        ));
        let v = f.fourier_eval(&[0.3, -0.4]).unwrap();
        let (_, c) = v.terms().next().unwrap();
        // Polarization carries the i; the scalar factor is real positive.
        assert!(c.im > 0.0 && c.re.abs() < 1e-15);
    }

    #[test]
    fn shift_theorem() {
        let base = sep(ProfileKind::Gaussian, vec![0.0, 0.0], vec![1.0, 1.0]);
        let shifted = base.translated(&[0.5, -1.5]);
        let p = [0.7, 0.3];
        let a = TestFunctionSpec::Separable(base).fourier_eval(&p).unwrap();
        let b = TestFunctionSpec::Separable(shifted).fourier_eval(&p).unwrap();
        // F̃_a(p) = e^{−ip·a} F̃(p), Minkowski phase.
        let pa = -p[0] * 0.5 + p[1] * (-1.5);
        let phase = Complex64::from_polar(1.0, -pa);
        let (occ, ca) = a.terms().next().unwrap();
        let cb = b.coefficient(occ);
        assert!((ca * phase - cb).norm() < 1e-14);
    }

    #[test]
    fn bump_transform_at_zero_matches_quadrature_oracle() {
        // b̂(0) = ∫ b = 2∫₀¹ e^{−1/(1−t²)} dt, pinned by refinement.
        let oracle = crate::quad::refine_1d(|t| bump(t), -1.0, 1.0, 1e-14);
        assert!((bump_transform(0.0) - oracle).abs() < 1e-13);
        assert!((oracle - 0.4439938161680786).abs() < 1e-12, "oracle={oracle:.16}");

        let f = sep(ProfileKind::Bump, vec![0.0, 0.0], vec![1.0, 1.0]);
        let v = TestFunctionSpec::Separable(f).fourier_eval(&[0.0, 0.0]).unwrap();
        let (_, c) = v.terms().next().unwrap();
        let want = oracle * oracle / (2.0 * std::f64::consts::PI);
        assert!((c.im - want).abs() < 1e-12);
    }

    #[test]
    fn project_pi_level_selection() {
        let sampling = ShellSampling::forward_energy_box(2.0, 2, &[-4.0], &[4.0], 24);
        // Level-1 polarization projects to zero on the r = 2 shell.
        let f = TestFunctionSpec::Separable(sep(
            ProfileKind::Gaussian,
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        ));
        let values = project_pi(&f, &sampling).unwrap();
        assert!(values.iter().all(FockVector::is_zero));

        // On its own shell the projection is √(2π)·F̃.
        let s0 = ShellSampling::forward_energy_box(0.0, 2, &[0.5], &[3.0], 8);
        let vals = project_pi(&f, &s0).unwrap();
        let ft = f.fourier_eval(&s0.nodes[0]).unwrap();
        let (occ, c) = ft.terms().next().unwrap();
        let got = vals[0].coefficient(occ);
        let want = c * (2.0 * std::f64::consts::PI).sqrt();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn pairing_h_basics() {
        let sampling = ShellSampling::forward_energy_box(0.0, 2, &[0.3], &[5.0], 16);
        let f = TestFunctionSpec::Separable(sep(
            ProfileKind::Gaussian,
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        ));
        let u = project_pi(&f, &sampling).unwrap();
        let zero: Vec<_> = u.iter().map(|_| FockVector::zero(2)).collect();
        assert_eq!(
            pairing_h(&u, &zero, &sampling).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let uu = pairing_h(&u, &u, &sampling).unwrap();
        assert!(uu.re > 0.0 && uu.im.abs() < 1e-14 * uu.re);
        let g = TestFunctionSpec::Separable(sep(
            ProfileKind::Gaussian,
            vec![0.4, -0.2],
            vec![0.8, 1.1],
        ));
        let v = project_pi(&g, &sampling).unwrap();
        let uv = pairing_h(&u, &v, &sampling).unwrap();
        let vu = pairing_h(&v, &u, &sampling).unwrap();
        assert!((uv - vu.conj()).norm() < 1e-13 * uv.norm());
    }

    #[test]
    fn commutator_antisymmetric_and_real_zero() {
        let samplings = [ShellSampling::forward_energy_box(0.0, 2, &[0.2], &[6.0], 48)];
        let f = TestFunctionSpec::Separable(sep(
            ProfileKind::Bump,
            vec![0.0, 0.0],
            vec![0.6, 0.6],
        ));
        let g = TestFunctionSpec::Separable(sep(
            ProfileKind::Bump,
            vec![1.0, 0.5],
            vec![0.6, 0.6],
        ));
        let fg = smeared_commutator(&f, &g, &samplings).unwrap();
        let gf = smeared_commutator(&g, &f, &samplings).unwrap();
        assert!((fg + gf).norm() < 1e-14 + 1e-12 * fg.norm());
        // [Φ(F), Φ(F)] = 0 for C₁-real F.
        let ff = smeared_commutator(&f, &f, &samplings).unwrap();
        assert!(ff.norm() < 1e-14);
    }

    #[test]
    fn bessel_j0_values() {
        // Series endpoint frozen against the classical value of J₀(2).
        assert!((bessel_j0(2.0) - 0.22389077914123567).abs() < 1e-13);
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-15);
        // Series and integral representation agree at the switchover.
        let series_side = bessel_j0(11.9);
        let rule = gauss_legendre(160, 0.0, std::f64::consts::PI);
        let integral: f64 = rule
            .iter()
            .map(|&(t, w)| w * (11.9 * t.sin()).cos())
            .sum::<f64>()
            / std::f64::consts::PI;
        assert!((series_side - integral).abs() < 1e-12);
    }

    #[test]
    fn pauli_jordan_support() {
        assert_eq!(pauli_jordan_oracle(1.0, &[0.5, 2.0]).unwrap(), 0.0);
        assert_eq!(pauli_jordan_oracle(1.0, &[0.0, 0.0]).unwrap(), 0.0);
        let v = pauli_jordan_oracle(1.0, &[2.0, 0.0]).unwrap();
        assert!((v - 0.5 * bessel_j0(2.0)).abs() < 1e-15);
        let w = pauli_jordan_oracle(1.0, &[-2.0, 0.0]).unwrap();
        assert!((w + v).abs() < 1e-15);
        assert_eq!(
            pauli_jordan_oracle(1.0, &[1.0, 0.0, 0.0]).unwrap_err(),
            PropagatorError::OnlyD2
        );
    }

    #[test]
    fn field_equation_null_test() {
        // Π((−□ + M²)H) vanishes on shell, so the commutator with anything
        // is zero up to rounding.
        let h = sep(ProfileKind::Gaussian, vec![0.3, -0.1], vec![0.9, 1.2]);
        let kg = TestFunctionSpec::KgApplied(Box::new(TestFunctionSpec::Separable(h)));
        let sampling = ShellSampling::forward_energy_box(0.0, 2, &[0.2], &[6.0], 48);
        let vals = project_pi(&kg, &sampling).unwrap();
        for v in &vals {
            for (_, c) in v.terms() {
                assert!(c.norm() < 1e-12);
            }
        }
        let g = TestFunctionSpec::Separable(sep(
            ProfileKind::Gaussian,
            vec![2.0, 0.0],
            vec![0.8, 0.8],
        ));
        let comm = smeared_commutator(&kg, &g, &[sampling]).unwrap();
        assert!(comm.norm() < 1e-12);
    }

    #[test]
    fn symplectic_form_is_skew() {
        // σ_t(U, U) vanishes identically for a real solution.
        let f = sep(ProfileKind::Bump, vec![0.0, 0.0], vec![0.5, 0.5]);
        let rep = greens_conservation_check(&f, &f, 1.0, &[3.0, 4.5], 48, 24).unwrap();
        for sigma in &rep.sigma_values {
            assert!(sigma.abs() < 1e-14, "sigma(U,U) = {sigma}");
        }
    }

    #[test]
    fn decay_scan_rejects_timelike() {
        let f = sep(ProfileKind::Gaussian, vec![0.0, 0.0], vec![0.7, 0.7]);
        let g = TestFunctionSpec::Separable(sep(
            ProfileKind::Gaussian,
            vec![0.0, 0.0],
            vec![0.7, 0.7],
        ));
        let samplings = [ShellSampling::forward_energy_box(0.0, 2, &[0.2], &[6.0], 16)];
        assert_eq!(
            decay_scan(&f, &g, &[1.0, 0.5], &[1.0], &samplings, 0.1).unwrap_err(),
            PropagatorError::NotSpacelike
        );
    }

    #[test]
    fn decay_scan_zero_radius_reproduces_plain_commutator() {
        let f = sep(ProfileKind::Gaussian, vec![0.0, 0.0], vec![0.7, 0.7]);
        let g = TestFunctionSpec::Separable(sep(
            ProfileKind::Gaussian,
            vec![0.9, 0.4],
            vec![0.7, 0.7],
        ));
        let samplings = [ShellSampling::forward_energy_box(0.0, 2, &[-8.0], &[8.0], 96)];
        let table = decay_scan(&f, &g, &[0.2, 1.0], &[0.0, 2.0], &samplings, 0.1).unwrap();
        let direct = smeared_commutator(
            &TestFunctionSpec::Separable(f.clone()),
            &g,
            &samplings,
        )
        .unwrap();
        assert!((table[0].1 - direct).norm() < 1e-13);
        assert!(table[1].1.norm() < table[0].1.norm());
    }

    #[test]
    fn polarization_metric_signs_enter_pairing() {
        // A timelike polarization flips the sign of the pairing.
        let d = 2;
        let pol_time = FockVector::<Complex64>::from_factors(d, &[(1, 0)]);
        let norm = inner_indefinite(&pol_time, &pol_time);
        assert!((norm.re + 1.0).abs() < 1e-15);
    }
}
