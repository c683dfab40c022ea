//! Bloch–Redfield dynamics of two spins a distance a apart.
//!
//! ```text
//! ρ̇(t) = R_t(ρ(t))
//! ```
//!
//! Two couplings are provided. Pure dephasing (Z-type) reproduces the exact
//! decoherence coefficients; the dissipative (X-type) operator is taken in
//! rotating-wave form with correlators C±. Basis order is |00⟩, |01⟩, |10⟩,
//! |11⟩ with spin 0 written first and |0⟩ the single-spin ground state.

pub mod ode;

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{self, BathSpec};
use crate::quadrature::{self, Tolerance};
use crate::special::sinc;

pub use ode::OdeOptions;

type Op = Matrix4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Two spins with Zeeman splitting ε at distance a, coupled to one bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinPairSpec {
    pub epsilon: f64,
    pub a: f64,
    pub bath: BathSpec,
}

impl SpinPairSpec {
    pub fn new(epsilon: f64, a: f64, bath: BathSpec) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("splitting must be positive, got ε = {epsilon}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("distance must be positive, got a = {a}")));
        }
        bath.validate()?;
        Ok(SpinPairSpec { epsilon, a, bath })
    }

    /// p = εa.
    pub fn p(&self) -> f64 {
        self.epsilon * self.a
    }

    pub fn occupation(&self) -> f64 {
        bose_occupation(self.epsilon, self.bath.temperature)
    }
}

// ---------------------------------------------------------------------------
// states

/// Two-spin density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinState {
    rho: Op,
}

impl TwoSpinState {
    /// Checks Hermiticity and unit trace to 1e-10 and eigenvalues ≥ −1e-8.
    pub fn new(rho: Op) -> Result<Self> {
        let state = TwoSpinState { rho };
        let herm = state.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::Invalid(format!("density matrix not Hermitian (deviation {herm:e})")));
        }
        let tr = state.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!("density matrix has trace {tr}")));
        }
        let min = state.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::Invalid(format!("density matrix has eigenvalue {min}")));
        }
        Ok(state)
    }

    /// |ψ⟩⟨ψ| for a nonzero ψ, normalised.
    pub fn pure(psi: Vector4<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Invalid("state vector must be nonzero".into()));
        }
        let psi = psi / Complex64::from(norm);
        TwoSpinState::new(&psi * psi.adjoint())
    }

    pub fn basis(index: usize) -> Self {
        let mut rho = Op::zeros();
        rho[(index, index)] = ONE;
        TwoSpinState { rho }
    }

    /// (|01⟩ − |10⟩)/√2.
    pub fn singlet() -> Self {
        TwoSpinState { rho: projector(&singlet_vector()) }
    }

    /// (|01⟩ + |10⟩)/√2.
    pub fn symmetric() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = Vector4::new(ZERO, s.into(), s.into(), ZERO);
        TwoSpinState { rho: projector(&psi) }
    }

    pub fn maximally_mixed() -> Self {
        TwoSpinState { rho: Op::identity() * Complex64::from(0.25) }
    }

    pub fn rho(&self) -> &Op {
        &self.rho
    }

    pub fn element(&self, mu: usize, nu: usize) -> Complex64 {
        self.rho[(mu, nu)]
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Largest entry of |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.rho + self.rho.adjoint()) * Complex64::from(0.5);
        h.symmetric_eigenvalues().min()
    }

    /// ⟨ψ|ρ|ψ⟩ for a normalised ψ.
    pub fn overlap(&self, psi: &Vector4<Complex64>) -> f64 {
        (psi.adjoint() * self.rho * psi)[(0, 0)].re
    }
}

fn singlet_vector() -> Vector4<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(ZERO, s.into(), (-s).into(), ZERO)
}

fn projector(psi: &Vector4<Complex64>) -> Op {
    psi * psi.adjoint()
}

/// Bit of spin `l` in basis index `i`.
fn spin_bit(i: usize, l: usize) -> usize {
    (i >> (1 - l)) & 1
}

/// σ₊ on spin l: |0⟩ → |1⟩.
fn raise(l: usize) -> Op {
    let mut op = Op::zeros();
    for i in 0..4 {
        if spin_bit(i, l) == 0 {
            op[(i | (1 << (1 - l)), i)] = ONE;
        }
    }
    op
}

fn pauli_z(l: usize) -> Op {
    Op::from_diagonal(&Vector4::from_fn(|i, _| Complex64::from(1.0 - 2.0 * spin_bit(i, l) as f64)))
}

// ---------------------------------------------------------------------------
// correlators

/// (e^{ε/T} − 1)^{−1}; zero at T = 0.
pub fn bose_occupation(epsilon: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (epsilon / temperature).exp_m1()
}

/// Real parts C′₋ (absorption) and C′₊ (emission).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorPair {
    pub c_minus: f64,
    pub c_plus: f64,
}

/// Long-time closed forms: απn and απ(n+1) at r = 0, times sinc(εr)·θ(t−r)
/// at finite distance.
pub fn correlator_pm(r: f64, t: f64, spec: &SpinPairSpec) -> CorrelatorPair {
    closed_pair(r, t > r, spec)
}

fn closed_pair(r: f64, inside_cone: bool, spec: &SpinPairSpec) -> CorrelatorPair {
    let n = spec.occupation();
    let base = spec.bath.alpha * PI;
    let factor = if r == 0.0 {
        1.0
    } else if inside_cone {
        sinc(spec.epsilon * r)
    } else {
        0.0
    };
    CorrelatorPair { c_minus: factor * base * n, c_plus: factor * base * (n + 1.0) }
}

/// Imaginary part of the bath correlator ⟨B(r,s)B(0,0)⟩, normalised so that
/// its spectral weight at ω = ε reproduces the closed forms.
fn correlator_imag(r: f64, s: f64, spec: &SpinPairSpec) -> f64 {
    let c = 1.0 / spec.bath.omega_c;
    let g = if r == 0.0 {
        2.0 * c * s / (c * c + s * s).powi(2)
    } else {
        let lorentz = |x: f64| c / (c * c + x * x);
        (lorentz(s - r) - lorentz(s + r)) / (2.0 * r)
    };
    -spec.bath.alpha / spec.epsilon * g
}

/// Running integrals J = ∫₀ᵗ e^{iεs} ∂ₛK(r,s) ds and Q = ∫₀ᵗ e^{iεs} i·Im G(r,s) ds,
/// from which both complex correlators follow.
fn correlators_from_integrals(r: f64, t: f64, j: Complex64, q: Complex64, spec: &SpinPairSpec) -> Result<(Complex64, Complex64)> {
    let rate = kernel::k_rate(r, t, &spec.bath)?;
    let phase = Complex64::from_polar(1.0, spec.epsilon * t);
    // Re G = ε⁻¹ ∂ₛ(∂ₛK), integrated by parts
    let p = phase * (rate / spec.epsilon) - Complex64::i() * j;
    let plus = p + q;
    let minus = p.conj() - q.conj();
    Ok((minus, plus))
}

/// Finite-time complex correlators (C₋, C₊) by quadrature over s ∈ [0, t],
/// using the same ohmic bath as the kernel.
pub fn correlator_numerical(r: f64, t: f64, spec: &SpinPairSpec) -> Result<(Complex64, Complex64)> {
    if r < 0.0 || t < 0.0 {
        return Err(Error::Domain(format!("need r, t ≥ 0, got r = {r}, t = {t}")));
    }
    let eps = spec.epsilon;
    let mut cuts = vec![0.0];
    if r > 0.0 && r < t {
        cuts.push(r);
    }
    cuts.push(t);
    let tol = Tolerance { abs: 1e-13, rel: 1e-11 };
    let mut parts = [0.0; 4];
    let rate = |s: f64| kernel::k_rate(r, s, &spec.bath).unwrap_or(f64::NAN);
    let integrands: [&dyn Fn(f64) -> f64; 4] = [
        &|s| (eps * s).cos() * rate(s),
        &|s| (eps * s).sin() * rate(s),
        &|s| -(eps * s).sin() * correlator_imag(r, s, spec),
        &|s| (eps * s).cos() * correlator_imag(r, s, spec),
    ];
    for w in cuts.windows(2) {
        for (part, f) in parts.iter_mut().zip(integrands.iter()) {
            let est = quadrature::adaptive(f, w[0], w[1], tol, 4000)?;
            if !est.value.is_finite() {
                return Err(Error::Quadrature(format!("non-finite correlator integrand at r = {r}")));
            }
            *part += est.value;
        }
    }
    let j = Complex64::new(parts[0], parts[1]);
    let q = Complex64::new(parts[2], parts[3]);
    correlators_from_integrals(r, t, j, q, spec)
}

// ---------------------------------------------------------------------------
// Redfield operators

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Dephasing,
    Dissipative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correlators {
    /// Long-time closed forms; real parts only.
    #[default]
    ClosedForm,
    /// Finite-time correlators carried along with the state.
    Numerical { keep_imaginary: bool },
}

/// Correlators at distance 0 and a, as (C₋, C₊).
type PairTable = [(Complex64, Complex64); 2];

fn dissipative_operator(rho: &Op, table: &PairTable) -> Op {
    let u = [raise(0), raise(1)];
    let d = [u[0].adjoint(), u[1].adjoint()];
    let mut x = Op::zeros();
    for m in 0..2 {
        for l in 0..2 {
            let (c_minus, c_plus) = table[usize::from(m != l)];
            let um = &u[m];
            let dm = &d[m];
            x += (um * rho * d[l] - d[l] * um * rho) * c_minus;
            x += (dm * rho * u[l] - u[l] * dm * rho) * c_plus;
        }
    }
    x + x.adjoint()
}

fn dephasing_operator(rho: &Op, c: [f64; 2]) -> Op {
    let z = [pauli_z(0), pauli_z(1)];
    let mut x = Op::zeros();
    for m in 0..2 {
        for l in 0..2 {
            let coef = Complex64::from(c[usize::from(m != l)]);
            x += (z[m] * rho * z[l] - z[l] * z[m] * rho) * coef;
        }
    }
    x + x.adjoint()
}

fn closed_table(spec: &SpinPairSpec, inside_cone: bool) -> PairTable {
    let near = closed_pair(0.0, true, spec);
    let far = closed_pair(spec.a, inside_cone, spec);
    [
        (near.c_minus.into(), near.c_plus.into()),
        (far.c_minus.into(), far.c_plus.into()),
    ]
}

/// Dissipative rotating-wave Redfield operator with the closed-form
/// correlators, imaginary parts dropped.
pub fn redfield_rhs_dissipative(rho: &TwoSpinState, t: f64, spec: &SpinPairSpec) -> Op {
    dissipative_operator(&rho.rho, &closed_table(spec, t > spec.a))
}

/// Dephasing Redfield operator with Re C(r,t) = ∂ₜK(r,t)/4.
pub fn redfield_rhs_dephasing(rho: &TwoSpinState, t: f64, spec: &SpinPairSpec) -> Result<Op> {
    Ok(dephasing_operator(&rho.rho, dephasing_coefficients(t, spec)?))
}

fn dephasing_coefficients(t: f64, spec: &SpinPairSpec) -> Result<[f64; 2]> {
    Ok([
        0.25 * kernel::k_rate(0.0, t, &spec.bath)?,
        0.25 * kernel::k_rate(spec.a, t, &spec.bath)?,
    ])
}

// ---------------------------------------------------------------------------
// integration

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    pub correlators: Correlators,
    /// Eigenvalues below −floor abort the integration.
    pub positivity_floor: f64,
    pub trace_tolerance: f64,
    pub hermiticity_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            ode: OdeOptions::default(),
            correlators: Correlators::ClosedForm,
            positivity_floor: 1e-6,
            trace_tolerance: 1e-8,
            hermiticity_tolerance: 1e-9,
        }
    }
}

/// ρ as 32 reals (real parts, then imaginary parts, column-major) followed
/// by the correlator integrals J, Q at distances 0 and a.
const STATE: usize = 40;
type Flat = [f64; STATE];

fn pack(rho: &Op) -> Flat {
    let mut y = [0.0; STATE];
    for (i, z) in rho.iter().enumerate() {
        y[i] = z.re;
        y[16 + i] = z.im;
    }
    y
}

fn unpack(y: &Flat) -> Op {
    Op::from_fn(|r, c| Complex64::new(y[r + 4 * c], y[16 + r + 4 * c]))
}

fn aux(y: &Flat, slot: usize) -> Complex64 {
    Complex64::new(y[32 + 2 * slot], y[33 + 2 * slot])
}

fn set_aux(dy: &mut Flat, slot: usize, z: Complex64) {
    dy[32 + 2 * slot] = z.re;
    dy[33 + 2 * slot] = z.im;
}

fn derivative(t: f64, y: &Flat, spec: &SpinPairSpec, model: Model, opts: &EvolveOptions, inside_cone: bool) -> Result<Flat> {
    let rho = unpack(y);
    match model {
        Model::Dephasing => Ok(pack(&dephasing_operator(&rho, dephasing_coefficients(t, spec)?))),
        Model::Dissipative => match opts.correlators {
            Correlators::ClosedForm => Ok(pack(&dissipative_operator(&rho, &closed_table(spec, inside_cone)))),
            Correlators::Numerical { keep_imaginary } => {
                let mut table = [(ZERO, ZERO); 2];
                let mut feed = [ZERO; 4];
                let phase = Complex64::from_polar(1.0, spec.epsilon * t);
                for (k, &r) in [0.0, spec.a].iter().enumerate() {
                    let (minus, plus) = correlators_from_integrals(r, t, aux(y, 2 * k), aux(y, 2 * k + 1), spec)?;
                    table[k] = if keep_imaginary {
                        (minus, plus)
                    } else {
                        (minus.re.into(), plus.re.into())
                    };
                    feed[2 * k] = phase * kernel::k_rate(r, t, &spec.bath)?;
                    feed[2 * k + 1] = phase * Complex64::i() * correlator_imag(r, t, spec);
                }
                let mut dy = pack(&dissipative_operator(&rho, &table));
                for (slot, z) in feed.into_iter().enumerate() {
                    set_aux(&mut dy, slot, z);
                }
                Ok(dy)
            }
        },
    }
}

fn check_state(t: f64, rho: &Op, opts: &EvolveOptions) -> Result<()> {
    let state = TwoSpinState { rho: *rho };
    let min = state.min_eigenvalue();
    if min < -opts.positivity_floor {
        return Err(Error::Positivity { t, eigenvalue: min });
    }
    let drift = (state.trace() - 1.0).abs();
    if drift > opts.trace_tolerance {
        return Err(Error::Integration { t, reason: format!("trace drifted by {drift:e}") });
    }
    let herm = state.hermiticity_error();
    if herm > opts.hermiticity_tolerance {
        return Err(Error::Integration { t, reason: format!("lost Hermiticity ({herm:e})") });
    }
    Ok(())
}

/// States on `t_grid` (ascending, starting at 0) with default options.
pub fn evolve(rho0: &TwoSpinState, t_grid: &[f64], spec: &SpinPairSpec, model: Model) -> Result<Vec<TwoSpinState>> {
    evolve_with(rho0, t_grid, spec, model, &EvolveOptions::default())
}

/// Integrates grid point to grid point with extra mesh points at and around
/// t = a.
/// Positivity, trace and Hermiticity are checked after every accepted step.
pub fn evolve_with(
    rho0: &TwoSpinState,
    t_grid: &[f64],
    spec: &SpinPairSpec,
    model: Model,
    opts: &EvolveOptions,
) -> Result<Vec<TwoSpinState>> {
    match t_grid.first() {
        Some(&t0) if t0 == 0.0 => {}
        _ => return Err(Error::Invalid("time grid must start at t = 0".into())),
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Invalid("time grid must be finite and strictly ascending".into()));
    }
    let mut y = pack(&rho0.rho);
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(*rho0);
    let mut h: f64 = 0.0;
    let mut t = 0.0;
    // features at the light cone are a few 1/Ω wide: bracket it with mesh
    // points and restart the step size on entry
    let width = 20.0 / spec.bath.omega_c;
    let cone = [spec.a - width, spec.a, spec.a + width];
    for &target in &t_grid[1..] {
        let gap = 1e-12 * target;
        let mut stops: Vec<f64> = cone.iter().copied().filter(|&c| c > t + gap && c < target - gap).collect();
        stops.push(target);
        for stop in stops {
            // the segment decides the side of the light cone
            let inside = t >= spec.a;
            if t == cone[0] || t == cone[1] {
                h = h.min(0.1 / spec.bath.omega_c);
            }
            y = ode::integrate(
                |s, y: &Flat| derivative(s, y, spec, model, opts, inside),
                y,
                t,
                stop,
                &mut h,
                &opts.ode,
                |s, y| check_state(s, &unpack(y), opts),
            )?;
            t = stop;
        }
        out.push(TwoSpinState { rho: unpack(&y) });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// fidelity and rates

/// ⟨ψ₀|ρ|ψ₀⟩ with ψ₀ the antisymmetric state.
pub fn subspace_fidelity(states: &[TwoSpinState]) -> Vec<f64> {
    let psi = singlet_vector();
    states.iter().map(|s| s.overlap(&psi)).collect()
}

/// (γ₀, γ₁) with γ₀ = 2πα(n + ½) and γ₁ = 2(1 − sinc εa)γ₀.
pub fn asymptotic_rate(spec: &SpinPairSpec) -> (f64, f64) {
    let gamma0 = 2.0 * PI * spec.bath.alpha * (spec.occupation() + 0.5);
    (gamma0, rate_reduction(spec.p()) * gamma0)
}

/// γ₁/γ₀ = 2(1 − sin p / p).
pub fn rate_reduction(p: f64) -> f64 {
    2.0 * (1.0 - sinc(p))
}

/// −⟨ψ₀|R_t(|ψ₀⟩⟨ψ₀|)|ψ₀⟩ from the operator itself.
pub fn instantaneous_rate(t: f64, spec: &SpinPairSpec) -> f64 {
    let singlet = TwoSpinState::singlet();
    let d = redfield_rhs_dissipative(&singlet, t, spec);
    -TwoSpinState { rho: d }.overlap(&singlet_vector())
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Asymptotic window [5a, 20a] and the largest acceptable fit residual.
pub const FIT_WINDOW: (f64, f64) = (5.0, 20.0);
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Magnitude of the slope of ln F against t.
    pub rate: f64,
    /// RMS deviation of ln F from the fitted line.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares slope of ln F against t over all samples.
pub fn rate_from_trajectory(times: &[f64], fidelities: &[f64]) -> Result<RateFit> {
    if times.len() != fidelities.len() {
        return Err(Error::Dimension { expected: times.len(), got: fidelities.len() });
    }
    let n = times.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::WindowTooShort { got: n, need: MIN_FIT_SAMPLES });
    }
    if let Some(f) = fidelities.iter().find(|&&f| !(f > 0.0)) {
        return Err(Error::Domain(format!("fidelity {f} has no logarithm")));
    }
    let logs: Vec<f64> = fidelities.iter().map(|f| f.ln()).collect();
    let nf = n as f64;
    let t_mean = times.iter().sum::<f64>() / nf;
    let l_mean = logs.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in times.iter().zip(&logs) {
        sxy += (t - t_mean) * (l - l_mean);
        sxx += (t - t_mean).powi(2);
    }
    if sxx == 0.0 {
        return Err(Error::Domain("fit window has zero time span".into()));
    }
    let slope = sxy / sxx;
    let ss: f64 = times
        .iter()
        .zip(&logs)
        .map(|(t, l)| (l - l_mean - slope * (t - t_mean)).powi(2))
        .sum();
    Ok(RateFit { rate: slope.abs(), residual: (ss / nf).sqrt(), samples: n })
}

/// Fit restricted to [5a, 20a]; rejects fits whose residual exceeds
/// [`FIT_RESIDUAL_LIMIT`].
pub fn fit_asymptotic_rate(times: &[f64], fidelities: &[f64], a: f64) -> Result<RateFit> {
    if times.len() != fidelities.len() {
        return Err(Error::Dimension { expected: times.len(), got: fidelities.len() });
    }
    let (lo, hi) = (FIT_WINDOW.0 * a, FIT_WINDOW.1 * a);
    let (t, f): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(fidelities)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, f)| (*t, *f))
        .unzip();
    let fit = rate_from_trajectory(&t, &f)?;
    if fit.residual > FIT_RESIDUAL_LIMIT {
        return Err(Error::Domain(format!("asymptotic fit residual {} exceeds {FIT_RESIDUAL_LIMIT}", fit.residual)));
    }
    Ok(fit)
}
