//! One-dimensional quadrature: adaptive 7/15-point Gauss-Kronrod on finite
//! intervals, geometric panelling of slowly decaying tails, and
//! zero-to-zero panelling of oscillatory tails with Wynn-epsilon acceleration.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

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

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// A quadrature value together with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, abs_err: 0.0 };
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value + rhs.value, abs_err: self.abs_err + rhs.abs_err }
    }
}

impl std::ops::Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, k: f64) -> Estimate {
        Estimate { value: self.value * k, abs_err: self.abs_err * k.abs() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-300, rel: 1e-12 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = fc * WG[3];
    let mut kronrod = fc * WGK[7];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, err }
}

/// Globally adaptive bisection on `[a, b]`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let mut panels = vec![gk15(f, a, b)];
    loop {
        let (value, err) = panels
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
        if !value.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= tol.target(value) {
            return Ok(Estimate { value, abs_err: err });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if panels.len() + 2 > max_panels || mid <= p.a || mid >= p.b {
            // roundoff floor: accept when the remaining error is within a few
            // ulps of the integrand scale
            if err <= 1e3 * tol.target(value) {
                panels.push(p);
                let (value, err) = panels
                    .iter()
                    .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
                return Ok(Estimate { value, abs_err: err });
            }
            return Err(Error::Quadrature(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:e} (value {value:e})"
            )));
        }
        panels.push(gk15(f, p.a, mid));
        panels.push(gk15(f, mid, p.b));
    }
}

/// ∫ f over `[start, end)` (end may be infinite) with panels whose widths
/// double; stops early once consecutive panels become negligible.
pub fn geometric_tail<F: Fn(f64) -> f64>(
    f: &F,
    start: f64,
    end: f64,
    first_width: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let mut total = Estimate::ZERO;
    let mut x = start;
    let mut width = first_width.max(f64::MIN_POSITIVE);
    let mut quiet = 0;
    for _ in 0..400 {
        if x >= end {
            return Ok(total);
        }
        let next = (x + width).min(end);
        let panel = adaptive(f, x, next, tol, 400)?;
        total = total + panel;
        if panel.value.abs() <= 1e-17 * total.value.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        x = next;
        width *= 2.0;
    }
    Err(Error::Quadrature(format!("geometric tail from {start} did not decay")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Sin => x.sin(),
            Trig::Cos => x.cos(),
        }
    }

    /// k-th non-negative zero of the function, in units of the argument.
    fn zero(self, k: f64) -> f64 {
        match self {
            Trig::Sin => k * PI,
            Trig::Cos => (k + 0.5) * PI,
        }
    }
}

/// Wynn's epsilon algorithm over a growing sequence of partial sums.
#[derive(Debug, Default)]
pub struct Wynn {
    sums: Vec<f64>,
}

impl Wynn {
    const WINDOW: usize = 40;

    pub fn push(&mut self, s: f64) {
        self.sums.push(s);
        if self.sums.len() > Self::WINDOW {
            self.sums.remove(0);
        }
    }

    /// Best extrapolated limit from the current window, if at least three
    /// sums are available.
    pub fn limit(&self) -> Option<f64> {
        let n = self.sums.len();
        if n < 3 {
            return self.sums.last().copied();
        }
        let mut prev = vec![0.0; n + 1];
        let mut cur: Vec<f64> = self.sums.clone();
        let mut best = *self.sums.last().unwrap();
        for k in 1..n {
            let len = cur.len() - 1;
            let mut next = Vec::with_capacity(len);
            for j in 0..len {
                let diff = cur[j + 1] - cur[j];
                if diff == 0.0 || !diff.is_finite() {
                    return Some(best);
                }
                next.push(prev[j + 1] + 1.0 / diff);
            }
            prev = cur;
            cur = next;
            if k % 2 == 0 {
                if let Some(&v) = cur.last() {
                    if v.is_finite() {
                        best = v;
                    } else {
                        return Some(best);
                    }
                }
            }
        }
        Some(best)
    }
}

/// ∫_{start}^∞ amp(ω)·trig(freq·ω) dω for a smooth amplitude decaying at
/// least like 1/ω (or faster through an exponential cutoff).
pub fn oscillatory_tail<A: Fn(f64) -> f64>(
    amp: &A,
    freq: f64,
    trig: Trig,
    start: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if freq == 0.0 {
        return match trig {
            Trig::Sin => Ok(Estimate::ZERO),
            Trig::Cos => geometric_tail(amp, start, f64::INFINITY, start.max(1e-300), tol),
        };
    }
    let (freq, sign) = if freq < 0.0 {
        match trig {
            Trig::Sin => (-freq, -1.0),
            Trig::Cos => (-freq, 1.0),
        }
    } else {
        (freq, 1.0)
    };
    let integrand = |w: f64| amp(w) * trig.eval(freq * w);
    let half_period = PI / freq;

    let mut k = (start / half_period).floor() - 1.0;
    while trig.zero(k) / freq <= start {
        k += 1.0;
    }
    let first_zero = trig.zero(k) / freq;

    // lead-in up to the first zero; may be long when the frequency is small
    let lead = if first_zero - start <= 2.0 * half_period {
        adaptive(&integrand, start, first_zero, tol, 200)?
    } else {
        geometric_tail(&integrand, start, first_zero, start.max(half_period * 1e-3), tol)?
    };

    let mut total = lead.value;
    let mut err = lead.abs_err;
    let mut wynn = Wynn::default();
    wynn.push(total);
    let mut last_limit = f64::NAN;
    let mut stable = 0;
    let mut lo = first_zero;
    for _ in 0..20_000 {
        let hi = lo + half_period;
        let panel = adaptive(&integrand, lo, hi, tol, 50)?;
        total += panel.value;
        err += panel.abs_err;
        lo = hi;
        if panel.value.abs() <= 1e-17 * total.abs() {
            return Ok(Estimate { value: sign * total, abs_err: err });
        }
        wynn.push(total);
        if let Some(limit) = wynn.limit() {
            let change = (limit - last_limit).abs();
            if change <= tol.target(limit) {
                stable += 1;
                if stable >= 2 {
                    return Ok(Estimate { value: sign * limit, abs_err: err + change });
                }
            } else {
                stable = 0;
            }
            last_limit = limit;
        }
    }
    Err(Error::Quadrature(format!(
        "oscillatory tail with frequency {freq} from {start} did not converge"
    )))
}
