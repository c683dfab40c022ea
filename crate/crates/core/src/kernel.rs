//! The single-pair decoherence function
//!
//! ```text
//! K(r,t) = α ∫₀^∞ dω (1 − cos ωt)/ω · coth(ω/2T) · sin(ωr)/(ωr) · e^{−ω/Ω}
//! ```
//!
//! for an ohmic bath, in natural units. Closed forms cover r = 0 and
//! r ≫ 1/Ω; everything else goes through oscillatory quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate, Tolerance, Trig};
use crate::special::{dilog_exp_neg, digamma_complex, ln_gamma_complex, sinc, ZETA2};

/// Default finite-distance threshold, in units of 1/Ω.
pub const DEFAULT_THRESHOLD: f64 = 10.0;

/// Bath and coupling parameters of J(ω) = α ω^s e^{−ω/Ω}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub alpha: f64,
    pub omega_c: f64,
    pub temperature: f64,
    pub s: f64,
    /// Distances r ≥ threshold/Ω use the finite-distance closed form.
    pub threshold: f64,
}

impl BathSpec {
    pub fn ohmic(alpha: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        Self::new(alpha, omega_c, temperature, 1.0)
    }

    pub fn new(alpha: f64, omega_c: f64, temperature: f64, s: f64) -> Result<Self> {
        let spec = BathSpec { alpha, omega_c, temperature, s, threshold: DEFAULT_THRESHOLD };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.omega_c > 0.0
            && self.temperature >= 0.0
            && self.s >= 0.0
            && self.threshold > 0.0
            && self.alpha.is_finite()
            && self.omega_c.is_finite()
            && self.temperature.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bath parameters out of range: {self:?}")))
        }
    }

    fn require_ohmic(&self) -> Result<()> {
        if self.s == 1.0 {
            Ok(())
        } else {
            Err(Error::NonOhmic(self.s))
        }
    }

    /// Smallest distance handled by the finite-distance closed form.
    pub fn min_finite_distance(&self) -> f64 {
        self.threshold / self.omega_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ZeroDistanceExact,
    FiniteDistanceExact,
    HighTemperature,
    Quadrature,
}

/// Regime chosen by [`k_dispatch`] for a given distance.
pub fn regime(r: f64, bath: &BathSpec) -> Regime {
    if r == 0.0 {
        Regime::ZeroDistanceExact
    } else if r >= bath.min_finite_distance() {
        Regime::FiniteDistanceExact
    } else {
        Regime::Quadrature
    }
}

fn check_args(r: f64, t: f64) -> Result<()> {
    if r >= 0.0 && t >= 0.0 && r.is_finite() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("need finite r ≥ 0 and t ≥ 0, got r = {r}, t = {t}")))
    }
}

// ---------------------------------------------------------------------------
// zero distance

/// K(0,t) = 2α ln|Γ(T/Ω)/Γ(T/Ω − itT)| − (α/2) ln(1 + Ω²t²).
///
/// Evaluated as (α/2) ln(1 + Ω²t²) + 2α [ln|Γ(1+x)| − ln|Γ(1+x+iy)|] with
/// x = T/Ω, y = tT, which is the same number without the large cancelling
/// logarithms at small x.
pub fn k_zero_exact(t: f64, bath: &BathSpec) -> Result<f64> {
    bath.require_ohmic()?;
    check_args(0.0, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let a = bath.alpha;
    let w = bath.omega_c;
    let x = bath.temperature / w;
    let y = t * bath.temperature;
    let vacuum = 0.5 * a * (w * t).powi(2).ln_1p();
    if y == 0.0 {
        return Ok(vacuum);
    }
    let thermal = ln_gamma_complex(Complex64::new(1.0 + x, 0.0)).re
        - ln_gamma_complex(Complex64::new(1.0 + x, y)).re;
    Ok(vacuum + 2.0 * a * thermal)
}

/// ∂K(0,t)/∂t.
pub fn k_zero_rate(t: f64, bath: &BathSpec) -> Result<f64> {
    bath.require_ohmic()?;
    check_args(0.0, t)?;
    let a = bath.alpha;
    let w = bath.omega_c;
    let temp = bath.temperature;
    let vacuum = a * w * w * t / (1.0 + (w * t).powi(2));
    if temp == 0.0 {
        return Ok(vacuum);
    }
    let psi = digamma_complex(Complex64::new(1.0 + temp / w, t * temp));
    Ok(vacuum + 2.0 * a * temp * psi.im)
}

/// Small-t limit (α/2) ln(1 + Ω²t²).
pub fn k_zero_short_time(t: f64, bath: &BathSpec) -> f64 {
    0.5 * bath.alpha * (bath.omega_c * t).powi(2).ln_1p()
}

/// Large-t limit απTt + α ln(Ω/2πT).
pub fn k_zero_long_time(t: f64, bath: &BathSpec) -> f64 {
    let temp = bath.temperature;
    bath.alpha * (PI * temp * t + (bath.omega_c / (2.0 * PI * temp)).ln())
}

// ---------------------------------------------------------------------------
// finite distance

/// Bernoulli coefficients B₂ₖ/(2k (2k+1) (2k)!) of
/// R(u) = Li₂(e^{−u}) − π²/6 − u ln u + u + u²/4.
const R_COEF: [f64; 8] = [
    1.0 / 72.0,
    -1.0 / 14_400.0,
    1.0 / 1_270_080.0,
    -1.0 / 87_091_200.0,
    1.0 / 5_269_017_600.0,
    -691.0 / 203_997_201_408_000.0,
    1.0 / 15_692_092_416_000.0,
    -3617.0 / 2_902_409_413_263_360_000.0,
];

/// R(u) for |u| ≤ 1 (odd in u).
fn r_series(u: f64) -> f64 {
    let u2 = u * u;
    let mut power = u * u2;
    let mut sum = 0.0;
    for c in R_COEF {
        sum += c * power;
        power *= u2;
    }
    sum
}

/// H(s,c) − H(s,0) with H(s,c) = −c·atan(s/c) − (s/2) ln(c² + s²).
fn cutoff_shift(s: f64, c: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    -c * (s / c).atan() - 0.5 * s * (c * c / (s * s)).ln_1p()
}

fn s_ln_abs(s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s * s.abs().ln()
    }
}

/// I(r,t,0) = −r ln r + ½(r+t) ln(r+t) + ½(r−t) ln|r−t|.
fn vacuum_combination(r: f64, t: f64) -> f64 {
    -s_ln_abs(r) + 0.5 * s_ln_abs(r + t) + 0.5 * s_ln_abs(r - t)
}

/// Ω → ∞ closed form of K(r,t) for r > 0:
///
/// ```text
/// r < t:  απT (t − r/2 + 1/(12T²r)) + α/(4πTr) [f(t+r) − f(t−r) − 2f(r)]
/// r > t:  απT t²/(2r)              + α/(4πTr) [f(t+r) + f(r−t) − 2f(r)]
/// ```
///
/// with f(x) = Li₂(e^{−2πTx}). When 2πT(r+t) ≤ 1 the π²/6 and x ln x parts
/// of f are cancelled analytically, which keeps the low-temperature limit
/// (including T = 0) exact.
pub fn k_infinite_cutoff(r: f64, t: f64, bath: &BathSpec) -> Result<f64> {
    bath.require_ohmic()?;
    check_args(r, t)?;
    if r == 0.0 {
        return Err(Error::Domain("the infinite-cutoff form diverges at r = 0".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let a = bath.alpha;
    let temp = bath.temperature;
    let lambda = 2.0 * PI * temp;
    if lambda * (r + t) <= 1.0 {
        let thermal = if lambda == 0.0 {
            0.0
        } else {
            (r_series(lambda * (t + r)) + r_series(lambda * (r - t)) - 2.0 * r_series(lambda * r))
                / lambda
        };
        return Ok(a / r * vacuum_combination(r, t) + 0.5 * a / r * thermal);
    }
    let f = |x: f64| dilog_exp_neg(lambda * x);
    let pref = a / (4.0 * PI * temp * r);
    let value = if r < t {
        // the 1/(12T²r) term equals pref·2ζ(2); grouping it with −2f(r)
        // avoids a large cancellation at moderate T r
        a * PI * temp * (t - 0.5 * r) + pref * (f(t + r) - f(t - r) + 2.0 * (ZETA2 - f(r)))
    } else {
        a * PI * temp * t * t / (2.0 * r) + pref * (f(t + r) + f(r - t) - 2.0 * f(r))
    };
    Ok(value)
}

/// Finite-cutoff correction to [`k_infinite_cutoff`], exact in 1/Ω.
///
/// Expanding coth(ω/2T) = 1 + 2Σₖ e^{−kω/T} turns every thermal term into
/// the vacuum integral with the cutoff time shifted by k/T; the sum over k of
/// the shifts from 0 to 1/Ω is an integral over Im ln Γ.
pub fn k_cutoff_correction(r: f64, t: f64, bath: &BathSpec) -> Result<f64> {
    bath.require_ohmic()?;
    check_args(r, t)?;
    if r == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let a = bath.alpha;
    let c = 1.0 / bath.omega_c;
    let vacuum = cutoff_shift(r, c) - 0.5 * cutoff_shift(r + t, c) - 0.5 * cutoff_shift(r - t, c);
    let temp = bath.temperature;
    let thermal = if temp == 0.0 {
        0.0
    } else {
        let integrand = |shift: f64| {
            let lg = |s: f64| ln_gamma_complex(Complex64::new(1.0 + temp * shift, s * temp)).im;
            lg(r) - 0.5 * lg(r + t) - 0.5 * lg(r - t)
        };
        let scale = ln_gamma_complex(Complex64::new(1.0, (r + t) * temp)).im;
        2.0 * shift_integral(&integrand, c, scale)?
    };
    Ok(a / r * (vacuum + thermal))
}

/// ∫₀^c f; `scale` is the size of the individual terms that cancel in f.
fn shift_integral<F: Fn(f64) -> f64>(f: &F, c: f64, scale: f64) -> Result<f64> {
    let tol = Tolerance { abs: 1e-15 * c * (1.0 + scale.abs()), rel: 1e-13 };
    quadrature::adaptive(f, 0.0, c, tol, 200).map(|e| e.value)
}

/// K(r,t) for r ≥ threshold/Ω: the Ω → ∞ closed form plus its finite-cutoff
/// correction. Continuous at r = t.
pub fn k_finite_exact(r: f64, t: f64, bath: &BathSpec) -> Result<f64> {
    bath.require_ohmic()?;
    check_args(r, t)?;
    let threshold = bath.min_finite_distance();
    if r < threshold {
        return Err(Error::BelowThreshold { r, threshold });
    }
    Ok(k_infinite_cutoff(r, t, bath)? + k_cutoff_correction(r, t, bath)?)
}

/// ln((1 − e^{−u})/u) for u ≥ 0, zero at u = 0.
fn ln_reg(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        crate::special::one_minus_exp_neg_over(u).ln()
    }
}

/// ∂K/∂t consistent with [`k_finite_exact`].
pub fn k_finite_rate(r: f64, t: f64, bath: &BathSpec) -> Result<f64> {
    bath.require_ohmic()?;
    check_args(r, t)?;
    let threshold = bath.min_finite_distance();
    if r < threshold {
        return Err(Error::BelowThreshold { r, threshold });
    }
    let a = bath.alpha;
    let c = 1.0 / bath.omega_c;
    let temp = bath.temperature;
    let lambda = 2.0 * PI * temp;
    let sum = r + t;
    let diff = (r - t).abs();
    let vacuum = 0.25 * a / r * ((sum * sum + c * c) / (diff * diff + c * c)).ln();
    let linear = a * PI * temp * if r < t { 1.0 } else { t / r };
    let thermal = 0.5 * a / r * (ln_reg(lambda * sum) - ln_reg(lambda * diff));
    let correction = if temp == 0.0 {
        0.0
    } else {
        let integrand = |shift: f64| {
            let psi = |s: f64| digamma_complex(Complex64::new(1.0 + temp * shift, s * temp)).re;
            psi(r - t) - psi(r + t)
        };
        let scale = digamma_complex(Complex64::new(1.0, (r + t) * temp)).re;
        a * temp / r * shift_integral(&integrand, c, scale)?
    };
    Ok(vacuum + linear + thermal + correction)
}

/// Piecewise high-temperature form:
/// r = 0: απTt + α ln(Ω/2πT); r < t: απT(t − r/2); r ≥ t: απT t²/(2r).
pub fn k_high_temperature(r: f64, t: f64, bath: &BathSpec) -> f64 {
    let g = bath.alpha * PI * bath.temperature;
    if r == 0.0 {
        k_zero_long_time(t, bath)
    } else if r < t {
        g * (t - 0.5 * r)
    } else {
        g * t * t / (2.0 * r)
    }
}

// ---------------------------------------------------------------------------
// quadrature

fn coth_half(w: f64, temp: f64) -> f64 {
    if temp == 0.0 {
        1.0
    } else {
        1.0 / (0.5 * w / temp).tanh()
    }
}

fn low_region(r: f64, t: f64, omega_c: f64) -> f64 {
    (4.0 * PI / (r + t)).min(60.0 * omega_c)
}

const QUAD_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-11 };

/// ∫₀^edge with panels doubling from the smallest physical scale, so that
/// features near ω ~ T or ω ~ Ω are never straddled by a single rule.
fn low_integral<F: Fn(f64) -> f64>(body: &F, edge: f64, temp: f64, omega_c: f64) -> Result<Estimate> {
    let mut first = edge.min(omega_c);
    if temp > 0.0 {
        first = first.min(temp);
    }
    let mut total = Estimate::ZERO;
    let mut lo = 0.0;
    let mut hi = 0.25 * first;
    while lo < edge {
        total = total + quadrature::adaptive(body, lo, hi, QUAD_TOL, 2000)?;
        lo = hi;
        hi = (2.0 * hi).min(edge);
    }
    Ok(total)
}

/// Direct quadrature of the defining integral with oscillatory tails.
pub fn k_quadrature(r: f64, t: f64, bath: &BathSpec) -> Result<Estimate> {
    check_args(r, t)?;
    if t == 0.0 {
        return Ok(Estimate::ZERO);
    }
    let a = bath.alpha;
    let wc = bath.omega_c;
    let temp = bath.temperature;
    let s = bath.s;
    let spectral = |w: f64| a * w.powf(s - 1.0) * (-w / wc).exp() * coth_half(w, temp);
    let body = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        let half = (0.5 * w * t).sin();
        2.0 * half * half / w * spectral(w) * sinc(w * r)
    };
    let edge = low_region(r, t, wc);
    let low = low_integral(&body, edge, temp, wc)?;
    let tol = Tolerance { abs: 1e-13 * low.value.abs(), rel: 1e-11 };
    let tail = if r == 0.0 {
        let smooth = |w: f64| spectral(w) / w;
        quadrature::geometric_tail(&smooth, edge, f64::INFINITY, edge, tol)?
            + quadrature::oscillatory_tail(&smooth, t, Trig::Cos, edge, tol)? * -1.0
    } else {
        let amp = |w: f64| spectral(w) / (r * w * w);
        quadrature::oscillatory_tail(&amp, r, Trig::Sin, edge, tol)?
            + quadrature::oscillatory_tail(&amp, r + t, Trig::Sin, edge, tol)? * -0.5
            + quadrature::oscillatory_tail(&amp, r - t, Trig::Sin, edge, tol)? * -0.5
    };
    Ok(low + tail)
}

/// Quadrature of ∂K/∂t = α ∫ dω sin(ωt) coth(ω/2T) sinc(ωr) e^{−ω/Ω}.
pub fn k_rate_quadrature(r: f64, t: f64, bath: &BathSpec) -> Result<Estimate> {
    check_args(r, t)?;
    let a = bath.alpha;
    let wc = bath.omega_c;
    let temp = bath.temperature;
    let s = bath.s;
    let spectral = |w: f64| a * w.powf(s - 1.0) * (-w / wc).exp() * coth_half(w, temp);
    let body = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        (w * t).sin() * spectral(w) * sinc(w * r)
    };
    let edge = if r + t > 0.0 { low_region(r, t, wc) } else { 60.0 * wc };
    let low = low_integral(&body, edge, temp, wc)?;
    let tol = Tolerance { abs: 1e-13 * low.value.abs(), rel: 1e-11 };
    let tail = if r == 0.0 {
        quadrature::oscillatory_tail(&spectral, t, Trig::Sin, edge, tol)?
    } else {
        let amp = |w: f64| spectral(w) * w / (2.0 * r * w * w);
        quadrature::oscillatory_tail(&amp, t - r, Trig::Cos, edge, tol)?
            + quadrature::oscillatory_tail(&amp, t + r, Trig::Cos, edge, tol)? * -1.0
    };
    Ok(low + tail)
}

// ---------------------------------------------------------------------------
// dispatch

/// K(r,t) in the best available regime.
pub fn k_dispatch(r: f64, t: f64, bath: &BathSpec) -> Result<f64> {
    match regime(r, bath) {
        Regime::ZeroDistanceExact => k_zero_exact(t, bath),
        Regime::FiniteDistanceExact => k_finite_exact(r, t, bath),
        _ => k_quadrature(r, t, bath).map(|e| e.value),
    }
}

/// ∂K/∂t in the best available regime.
pub fn k_rate(r: f64, t: f64, bath: &BathSpec) -> Result<f64> {
    match regime(r, bath) {
        Regime::ZeroDistanceExact => k_zero_rate(t, bath),
        Regime::FiniteDistanceExact => k_finite_rate(r, t, bath),
        _ => k_rate_quadrature(r, t, bath).map(|e| e.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(alpha: f64, omega_c: f64, temp: f64) -> BathSpec {
        BathSpec::ohmic(alpha, omega_c, temp).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn r_series_matches_direct_form() {
        for &u in &[0.3, 0.7, 1.0] {
            let direct = dilog_exp_neg(u) - ZETA2 - u * u.ln() + u + 0.25 * u * u;
            assert!((r_series(u) - direct).abs() < 1e-15, "{u}");
        }
    }

    #[test]
    fn branches_agree_at_series_switch() {
        // λ(r+t) just below and above 1
        let r = 1.0;
        let t = 0.5;
        let temp_switch = 1.0 / (2.0 * PI * (r + t));
        let lo = k_infinite_cutoff(r, t, &bath(1.0, 1e6, temp_switch * (1.0 - 1e-12))).unwrap();
        let hi = k_infinite_cutoff(r, t, &bath(1.0, 1e6, temp_switch * (1.0 + 1e-12))).unwrap();
        assert!(rel(lo, hi) < 1e-12, "{lo} {hi}");
        let t = 2.0;
        let temp_switch = 1.0 / (2.0 * PI * (r + t));
        let lo = k_infinite_cutoff(r, t, &bath(1.0, 1e6, temp_switch * (1.0 - 1e-12))).unwrap();
        let hi = k_infinite_cutoff(r, t, &bath(1.0, 1e6, temp_switch * (1.0 + 1e-12))).unwrap();
        assert!(rel(lo, hi) < 1e-12, "{lo} {hi}");
    }

    #[test]
    fn zero_temperature_is_exact_in_cutoff() {
        // at T = 0 the vacuum integral is elementary for every Ω
        let b = bath(0.3, 50.0, 0.0).with_threshold(1.0);
        for &(r, t) in &[(0.5, 0.2), (0.5, 3.0), (2.0, 2.0)] {
            let exact = k_finite_exact(r, t, &b).unwrap();
            let quad = k_quadrature(r, t, &b).unwrap().value;
            assert!(rel(exact, quad) < 1e-9, "{r} {t}: {exact} vs {quad}");
        }
    }

    #[test]
    fn non_ohmic_rejected() {
        let b = BathSpec::new(0.1, 10.0, 1.0, 0.5).unwrap();
        assert_eq!(k_zero_exact(1.0, &b), Err(Error::NonOhmic(0.5)));
        assert!(matches!(k_finite_exact(5.0, 1.0, &b), Err(Error::NonOhmic(_))));
        assert!(k_quadrature(1.0, 1.0, &b).is_ok());
    }

    #[test]
    fn dispatch_regimes() {
        let b = bath(1.0, 1e3, 1.0);
        assert_eq!(regime(0.0, &b), Regime::ZeroDistanceExact);
        assert_eq!(regime(20.0 / 1e3, &b), Regime::FiniteDistanceExact);
        assert_eq!(regime(2.0 / 1e3, &b), Regime::Quadrature);
    }

    #[test]
    fn below_threshold_rejected() {
        let b = bath(1.0, 1e3, 1.0);
        assert!(matches!(k_finite_exact(1e-3, 1.0, &b), Err(Error::BelowThreshold { .. })));
    }
}
