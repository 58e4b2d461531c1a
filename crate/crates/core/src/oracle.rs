//! Brute-force references for the closed forms: time-ordered propagation of
//! the driven qubit, quadrature over the initial position distribution, and
//! entropies from explicit eigenvalues.
//!
//! Nothing in this module calls into [`crate::gaussian`] or [`crate::holevo`];
//! it only shares the parameter types and the pointwise truncated propagator
//! from [`crate::model`].

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianIntegralArgs, MuVector};
use crate::model::{floquet_bloch, BlochUnitary, ModelParams, OscillatorInit, QubitBloch};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseQubitOp(pub [[Complex64; 2]; 2]);

impl DenseQubitOp {
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);
    pub const SIGMA_X: Self = Self([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA_Y: Self = Self([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
    pub const SIGMA_Z: Self = Self([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    pub fn from_bloch_unitary(u: &BlochUnitary) -> Self {
        Self::IDENTITY.scale(u.u0.into())
            + Self::SIGMA_X.scale(I * u.u1)
            + Self::SIGMA_Y.scale(I * u.u2)
            + Self::SIGMA_Z.scale(I * u.u3)
    }

    /// Density matrix `(I + a·σ)/2`.
    pub fn density(a: &QubitBloch) -> Self {
        (Self::IDENTITY
            + Self::SIGMA_X.scale(a.a1.into())
            + Self::SIGMA_Y.scale(a.a2.into())
            + Self::SIGMA_Z.scale(a.a3.into()))
        .scale(0.5.into())
    }

    /// `exp(−i (hx σx + hy σy + hz σz))`.
    pub fn exp_pauli(hx: f64, hy: f64, hz: f64) -> Self {
        let norm = (hx * hx + hy * hy + hz * hz).sqrt();
        if norm == 0.0 {
            return Self::IDENTITY;
        }
        let (s, c) = norm.sin_cos();
        let f = -I * (s / norm);
        Self::IDENTITY.scale(c.into())
            + Self::SIGMA_X.scale(f * hx)
            + Self::SIGMA_Y.scale(f * hy)
            + Self::SIGMA_Z.scale(f * hz)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Self([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let g = self.adjoint() * *self;
        let tr = g.trace().re;
        let det = g.det().re;
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        (0.5 * tr + disc).max(0.0).sqrt()
    }

    /// Components `(tr ρσx, tr ρσy, tr ρσz)` of a density operator.
    pub fn bloch_vector(&self) -> QubitBloch {
        QubitBloch {
            a1: (*self * Self::SIGMA_X).trace().re,
            a2: (*self * Self::SIGMA_Y).trace().re,
            a3: (*self * Self::SIGMA_Z).trace().re,
        }
    }

    pub fn conjugate(&self, rho: &Self) -> Self {
        *self * *rho * self.adjoint()
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Self::IDENTITY).spectral_norm()
    }
}

impl Add for DenseQubitOp {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for DenseQubitOp {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale((-1.0).into())
    }
}

impl Mul for DenseQubitOp {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// `min_θ ‖u − e^{iθ} v‖₂` for unitary `u`, `v`.
///
/// With `w = u v†` having eigenphases `θ₁, θ₂` separated by an arc `δ ≤ π`, the
/// optimum sits at the arc midpoint and equals `2 sin(δ/4)`.
pub fn phase_min_distance(u: &DenseQubitOp, v: &DenseQubitOp) -> f64 {
    let w = *u * v.adjoint();
    let tr = w.trace();
    let disc = (tr * tr - 4.0 * w.det()).sqrt();
    let (l1, l2) = ((tr + disc) * 0.5, (tr - disc) * 0.5);
    let mut gap = (l1.arg() - l2.arg()).abs();
    if gap > PI {
        gap = 2.0 * PI - gap;
    }
    2.0 * (0.25 * gap).sin()
}

/// Steps per `2π` of `τ` before any refinement.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 256;
/// Target step-halving disagreement of [`exact_propagator_converged`].
pub const HALVING_TOLERANCE: f64 = 1e-9;
const MAX_STEPS: usize = 1 << 24;

/// Time-ordered product for `H = −(Δ/2)σx + g X₀ cos(Ωt + φ)σz` over `[0, t]`.
///
/// Each of the `steps` factors is the exact exponential of the Hamiltonian
/// averaged over its step (σz part integrated analytically). The scheme is
/// second order, unitary per step, and exact whenever the Hamiltonian commutes
/// with itself at different times.
pub fn exact_propagator(params: &ModelParams, x0: f64, phi: f64, t: f64, steps: usize) -> Result<DenseQubitOp> {
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            reason: "at least one step is required".into(),
        });
    }
    if !(x0.is_finite() && phi.is_finite() && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "x0/phi/t",
            reason: "must be finite".into(),
        });
    }
    let tau = params.omega() * t;
    let xi = params.g_tilde() * x0;
    let dt = params.delta_tilde();
    let h = tau / steps as f64;
    let mut u = DenseQubitOp::IDENTITY;
    let mut s_prev = phi.sin();
    for n in 0..steps {
        let s_next = ((n + 1) as f64 * h + phi).sin();
        let step = DenseQubitOp::exp_pauli(-dt * h, 0.0, xi * (s_next - s_prev));
        u = step * u;
        s_prev = s_next;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPropagation {
    pub op: DenseQubitOp,
    pub steps: usize,
    /// `‖U(steps) − U(steps/2)‖₂` at acceptance.
    pub halving_gap: f64,
}

pub fn default_steps(tau: f64) -> usize {
    ((DEFAULT_STEPS_PER_PERIOD as f64 * tau.abs() / (2.0 * PI)).ceil() as usize).max(16)
}

/// Doubles the step count until successive products agree to `tolerance`.
pub fn exact_propagator_converged(
    params: &ModelParams,
    x0: f64,
    phi: f64,
    t: f64,
    tolerance: f64,
) -> Result<ExactPropagation> {
    let mut steps = default_steps(params.omega() * t);
    let mut coarse = exact_propagator(params, x0, phi, t, steps)?;
    loop {
        let fine = exact_propagator(params, x0, phi, t, 2 * steps)?;
        let gap = (fine - coarse).spectral_norm();
        steps *= 2;
        if gap <= tolerance {
            return Ok(ExactPropagation {
                op: fine,
                steps,
                halving_gap: gap,
            });
        }
        if steps >= MAX_STEPS {
            return Err(Error::NotConverged {
                what: "time-ordered propagator",
                achieved: gap,
                target: tolerance,
            });
        }
        coarse = fine;
    }
}

/// Distance between the truncated Floquet propagator and the converged
/// time-ordered product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetError {
    pub spectral: f64,
    pub phase_min: f64,
}

pub fn floquet_error(params: &ModelParams, x0: f64, phi: f64, t: f64) -> Result<FloquetError> {
    let exact = exact_propagator_converged(params, x0, phi, t, HALVING_TOLERANCE)?.op;
    let tau = params.omega() * t;
    let approx = DenseQubitOp::from_bloch_unitary(&floquet_bloch(
        params.g_tilde() * x0,
        params.delta_tilde(),
        tau,
        phi,
    ));
    Ok(FloquetError {
        spectral: (approx - exact).spectral_norm(),
        phase_min: phase_min_distance(&approx, &exact),
    })
}

/// Orthonormal Hermite functions `ψₙ(z)`, `ψₙ₋₁(z)`, which carry the
/// `e^{−z²/2}` factor and so stay bounded for any order.
fn hermite_functions(n: usize, z: f64) -> (f64, f64) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let (mut p1, mut p2) = (PIM4 * (-0.5 * z * z).exp(), 0.0);
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Nodes and weights of the `n`-point Gauss–Hermite rule for weight `e^{−x²}`,
/// nodes in descending order.
///
/// Positive roots are bracketed by a sign scan finer than the smallest root
/// spacing, then bisected; the weight at a root `z` is `1/(n ψₙ₋₁(z)²)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let weight = |z: f64| {
        let (_, p2) = hermite_functions(n, z);
        1.0 / (nf * p2 * p2)
    };
    let mut positive = Vec::with_capacity(n / 2);
    let step = PI / (8.0 * (2.0 * nf + 1.0).sqrt());
    let end = (2.0 * nf + 1.0).sqrt() + 1.0;
    let mut lo = 0.5 * step;
    let mut f_lo = hermite_functions(n, lo).0;
    while lo < end && positive.len() < n / 2 {
        let hi = lo + step;
        let f_hi = hermite_functions(n, hi).0;
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            while b - a > 4.0 * f64::EPSILON * b {
                let mid = 0.5 * (a + b);
                let fm = hermite_functions(n, mid).0;
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            positive.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    assert_eq!(positive.len(), n / 2, "Gauss–Hermite root scan missed a root");
    let mut x = Vec::with_capacity(n);
    x.extend(positive.iter().rev());
    if n % 2 == 1 {
        x.push(0.0);
    }
    x.extend(positive.iter().map(|z| -z));
    let w = x.iter().map(|&z| weight(z) * (-z * z).exp()).collect();
    (x, w)
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn cached_gauss_hermite(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(gauss_hermite(n));
    cache.lock().unwrap().insert(n, Arc::clone(&rule));
    rule
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> Complex64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Panel {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOutcome {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Globally adaptive 15-point Gauss–Kronrod integration of a complex
/// integrand: the panel with the largest error estimate is bisected until the
/// summed estimate meets `max(abs_tol, rel_tol·|I|)`.
// A NaN error estimate must keep the loop going until it fails.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<AdaptiveOutcome> {
    let mut heap = BinaryHeap::new();
    let first = kronrod15(&f, lo, hi);
    let (mut total, mut err) = (first.value, first.error);
    heap.push(first);
    while !(err <= abs_tol.max(rel_tol * total.norm())) {
        if heap.len() >= max_panels {
            return Err(Error::NotConverged {
                what: "adaptive quadrature",
                achieved: err,
                target: abs_tol.max(rel_tol * total.norm()),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod15(&f, worst.lo, mid);
        let right = kronrod15(&f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the rounding drift of the running updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(AdaptiveOutcome {
        value,
        error,
        panels: heap.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    GaussHermite,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    node_count: usize,
    window_sigmas: f64,
    scheme: QuadratureScheme,
}

impl QuadratureSpec {
    pub fn new(node_count: usize, window_sigmas: f64, scheme: QuadratureScheme) -> Result<Self> {
        if node_count < 21 {
            return Err(Error::InvalidParameter {
                name: "node_count",
                reason: format!("at least 21 nodes required, got {node_count}"),
            });
        }
        if !(window_sigmas >= 6.0 && window_sigmas.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "window_sigmas",
                reason: format!("window must span at least 6 widths, got {window_sigmas}"),
            });
        }
        Ok(Self {
            node_count,
            window_sigmas,
            scheme,
        })
    }

    pub fn adaptive() -> Self {
        Self {
            scheme: QuadratureScheme::Adaptive,
            ..Self::default()
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn window_sigmas(&self) -> f64 {
        self.window_sigmas
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }
}

impl Default for QuadratureSpec {
    /// 201-node Gauss–Hermite; adaptive window `q ± 10√η`.
    fn default() -> Self {
        Self {
            node_count: 201,
            window_sigmas: 10.0,
            scheme: QuadratureScheme::GaussHermite,
        }
    }
}

pub const ADAPTIVE_ABS_TOL: f64 = 1e-14;
pub const ADAPTIVE_REL_TOL: f64 = 1e-12;
const ADAPTIVE_MAX_PANELS: usize = 20_000;

/// Averages `f(X₀)` against `p(X₀) = (πη)^{-1/2} exp[−(X₀ − q)²/η]` by
/// substituting `X₀ = q + √η u`.
pub fn gaussian_average<F: Fn(f64) -> Complex64 + Sync>(
    eta: f64,
    q: f64,
    spec: &QuadratureSpec,
    f: F,
) -> Result<Complex64> {
    let width = eta.sqrt();
    match spec.scheme {
        QuadratureScheme::GaussHermite => {
            let rule = cached_gauss_hermite(spec.node_count);
            let (nodes, weights) = (&rule.0, &rule.1);
            let sum: Complex64 = nodes
                .iter()
                .zip(weights)
                .map(|(&u, &w)| f(q + width * u) * w)
                .sum();
            Ok(sum / PI.sqrt())
        }
        QuadratureScheme::Adaptive => {
            let norm = PI.sqrt().recip();
            let g = |u: f64| f(q + width * u) * ((-u * u).exp() * norm);
            let w = spec.window_sigmas;
            Ok(integrate_adaptive(g, -w, w, ADAPTIVE_ABS_TOL, ADAPTIVE_REL_TOL, ADAPTIVE_MAX_PANELS)?.value)
        }
    }
}

/// `I[a, b, c]` by direct quadrature of its integrand.
pub fn gaussian_i_numeric(args: &GaussianIntegralArgs, spec: &QuadratureSpec) -> Result<Complex64> {
    let GaussianIntegralArgs { a, b, c, eta, q } = *args;
    gaussian_average(eta, q, spec, |y| Complex64::from_polar(1.0, a * y * y + b * y + c))
}

/// Which pointwise propagator feeds the position average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    /// Truncated Floquet propagator, evaluated through its Bloch form.
    Floquet,
    /// Converged time-ordered product, conjugated as a dense matrix.
    Exact,
}

/// Position average of the evolved Bloch direction, starting from `σx`.
pub fn mu_numeric(
    params: &ModelParams,
    init: &OscillatorInit,
    tau: f64,
    spec: &QuadratureSpec,
    propagation: Propagation,
) -> Result<MuVector> {
    let m = init.moments(params)?;
    let phi = init.phi();
    let t = tau / params.omega();
    let start = DenseQubitOp::density(&QubitBloch {
        a1: 1.0,
        a2: 0.0,
        a3: 0.0,
    });
    let failure = Mutex::new(None);
    let pointwise = |x0: f64| -> [f64; 3] {
        let u = match propagation {
            Propagation::Floquet => DenseQubitOp::from_bloch_unitary(&floquet_bloch(
                params.g_tilde() * x0,
                params.delta_tilde(),
                tau,
                phi,
            )),
            Propagation::Exact => match exact_propagator_converged(params, x0, phi, t, HALVING_TOLERANCE) {
                Ok(p) => p.op,
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    DenseQubitOp::IDENTITY
                }
            },
        };
        let a = u.conjugate(&start).bloch_vector();
        [a.a1, a.a2, a.a3]
    };
    // Pack (a₁ + i a₂) and a₃ into two averages over the same nodes.
    let c12 = gaussian_average(m.eta, m.q, spec, |x| {
        let a = pointwise(x);
        Complex64::new(a[0], a[1])
    })?;
    let c3 = gaussian_average(m.eta, m.q, spec, |x| pointwise(x)[2].into())?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(MuVector::new(c12.re, c12.im, c3.re))
}

/// Tolerance on trace, hermiticity and negative eigenvalues of a density.
pub const DENSITY_TOLERANCE: f64 = 1e-10;

/// Von Neumann entropy in bits from the eigenvalues of a 2×2 density.
pub fn entropy_numeric(rho: &DenseQubitOp) -> Result<f64> {
    let m = &rho.0;
    let tr = rho.trace();
    if (tr - ONE).norm() > DENSITY_TOLERANCE {
        return Err(Error::Domain {
            what: "density matrix",
            reason: format!("trace {tr} differs from 1"),
        });
    }
    if (*rho - rho.adjoint()).spectral_norm() > DENSITY_TOLERANCE {
        return Err(Error::Domain {
            what: "density matrix",
            reason: "not Hermitian".into(),
        });
    }
    let (a, d, b) = (m[0][0].re, m[1][1].re, m[0][1]);
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let mut total = 0.0;
    for lambda in [mean + radius, mean - radius] {
        if lambda < -DENSITY_TOLERANCE {
            return Err(Error::Domain {
                what: "density matrix",
                reason: format!("negative eigenvalue {lambda:e}"),
            });
        }
        if lambda > 0.0 {
            total -= lambda * lambda.log2();
        }
    }
    Ok(total)
}
