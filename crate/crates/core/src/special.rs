//! Special functions needed by the closed-form decoherence kernels: the
//! dilogarithm on `[0, 1]`, complex log-gamma and digamma on the right
//! half-plane, and a few numerically careful elementary helpers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// π²/6 = Li₂(1).
pub const ZETA2: f64 = PI * PI / 6.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B₂ₖ for k = 1..=10.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Below this modulus the argument is shifted upward by the recurrence before
/// the asymptotic series is applied.
const ASYMPTOTIC_MIN: f64 = 12.0;

/// Power series Σ xʲ/j², valid and fast for 0 ≤ x ≤ 1/2.
fn dilog_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = x;
    for j in 1..200 {
        let jf = j as f64;
        let term = power / (jf * jf);
        sum += term;
        if term <= f64::EPSILON * 0.25 * sum {
            break;
        }
        power *= x;
    }
    sum
}

/// Dilogarithm Li₂(x) = Σ_{j≥1} xʲ/j² on the closed interval `[0, 1]`.
///
/// Arguments above 1/2 are mapped through Euler's reflection
/// Li₂(x) = π²/6 − ln x ln(1−x) − Li₂(1−x).
pub fn dilog(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("dilog argument {x} outside [0, 1]")));
    }
    if x == 1.0 {
        return Ok(ZETA2);
    }
    if x <= 0.5 {
        Ok(dilog_series(x))
    } else {
        let y = 1.0 - x;
        Ok(ZETA2 - x.ln() * y.ln() - dilog_series(y))
    }
}

/// Li₂(e^{−u}) for u ≥ 0, computed without forming 1 − e^{−u} by subtraction.
///
/// This is the thermal function f_T(x) = Li₂(e^{−2πTx}) with u = 2πTx; it
/// underflows to zero for large u.
pub fn dilog_exp_neg(u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    if u == 0.0 {
        return ZETA2;
    }
    if u >= std::f64::consts::LN_2 {
        return dilog_series((-u).exp());
    }
    // 1 − e^{−u}, exact to rounding
    let y = -(-u).exp_m1();
    ZETA2 + u * y.ln() - dilog_series(y)
}

/// ln(1 − e^{−u}) for u > 0.
pub fn ln_one_minus_exp_neg(u: f64) -> f64 {
    if u < std::f64::consts::LN_2 {
        (-(-u).exp_m1()).ln()
    } else {
        (-(-u).exp()).ln_1p()
    }
}

/// (1 − e^{−z})/z, continuous at z = 0.
pub fn one_minus_exp_neg_over(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    }
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

fn require_right_half_plane(z: Complex64, what: &str) {
    assert!(
        z.re > 0.0,
        "{what} is implemented on Re z > 0 only, got {z}"
    );
}

/// Principal branch of ln Γ(z) for Re z > 0, continuous in z (the branch that
/// mpmath and scipy call `loggamma`).
///
/// Shifts z by the recurrence until |z| and Re z are large, then applies the
/// Stirling series with ten Bernoulli terms.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    require_right_half_plane(z, "ln_gamma_complex");
    let mut shifted = z;
    let mut correction = Complex64::new(0.0, 0.0);
    while shifted.re < ASYMPTOTIC_MIN || shifted.norm() < ASYMPTOTIC_MIN {
        correction += shifted.ln();
        shifted += 1.0;
    }
    stirling_ln_gamma(shifted) - correction
}

fn stirling_ln_gamma(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k2 = 2.0 * (k + 1) as f64;
        series += power * (*b / (k2 * (k2 - 1.0)));
        power *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

/// Digamma ψ(z) = Γ′(z)/Γ(z) for Re z > 0.
pub fn digamma_complex(z: Complex64) -> Complex64 {
    require_right_half_plane(z, "digamma_complex");
    let mut shifted = z;
    let mut correction = Complex64::new(0.0, 0.0);
    while shifted.re < ASYMPTOTIC_MIN || shifted.norm() < ASYMPTOTIC_MIN {
        correction += shifted.inv();
        shifted += 1.0;
    }
    let inv = shifted.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k2 = 2.0 * (k + 1) as f64;
        series += power * (*b / k2);
        power *= inv2;
    }
    shifted.ln() - 0.5 * inv - series - correction
}

/// ln|Γ(a)| − ln|Γ(a − i b)| for a > 0.
///
/// The difference is formed from the complex log-gamma, so no intermediate
/// overflow occurs even when |Γ(a − i b)| is astronomically small.
pub fn log_abs_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!(
            "log_abs_gamma_ratio needs a > 0 and finite b, got a = {a}, b = {b}"
        )));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let num = ln_gamma_complex(Complex64::new(a, 0.0)).re;
    let den = ln_gamma_complex(Complex64::new(a, -b)).re;
    Ok(num - den)
}
