//! Hierarchically encoded registers.
//!
//! An order-χ logical qubit is a pair of adjacent order-(χ−1) qubits in the
//! states |01⟩/|10⟩. Its decoherence functions follow from the recursion
//!
//! ```text
//! K^χ_l = 2 K^{χ−1}_{2l} − K^{χ−1}_{|2l−1|} − K^{χ−1}_{2l+1},   K⁰_l = K(la, t).
//! ```

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{self, BathSpec};

/// Register geometry: n logical qubits of order χ on a chain with physical
/// spacing a. The chain holds n·2^χ physical spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegisterSpec {
    pub n: usize,
    pub a: f64,
    pub chi: u32,
}

impl RegisterSpec {
    pub fn new(n: usize, a: f64, chi: u32) -> Result<Self> {
        if n == 0 || !(a > 0.0) || !a.is_finite() || chi > 30 {
            return Err(Error::Invalid(format!("register needs n ≥ 1, a > 0, got n = {n}, a = {a}, χ = {chi}")));
        }
        Ok(RegisterSpec { n, a, chi })
    }

    pub fn physical_spins(&self) -> usize {
        self.n << self.chi
    }
}

/// How the physical pair function K(la, t) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelModel {
    /// Regime dispatch over the exact forms.
    #[default]
    Exact,
    /// Piecewise high-temperature form; `keep_log` retains the α ln(Ω/2πT)
    /// term at zero distance.
    HighTemperature { keep_log: bool },
}

impl KernelModel {
    pub fn pair(&self, r: f64, t: f64, bath: &BathSpec) -> Result<f64> {
        match *self {
            KernelModel::Exact => kernel::k_dispatch(r, t, bath),
            KernelModel::HighTemperature { keep_log } => {
                let mut k = kernel::k_high_temperature(r, t, bath);
                if r == 0.0 && !keep_log {
                    k -= bath.alpha * (bath.omega_c / (2.0 * std::f64::consts::PI * bath.temperature)).ln();
                }
                Ok(k)
            }
        }
    }
}

/// Logical basis label μ ∈ Z₂ⁿ; bit m is qubit m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString(pub u64);

impl BitString {
    pub fn bit(&self, m: usize) -> u8 {
        ((self.0 >> m) & 1) as u8
    }

    pub fn flipped(&self, n: usize) -> BitString {
        BitString(!self.0 & mask(n))
    }

    fn check(&self, n: usize) -> Result<()> {
        if n < 64 && self.0 >> n != 0 {
            Err(Error::Dimension { expected: n, got: 64 - self.0.leading_zeros() as usize })
        } else {
            Ok(())
        }
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// (v_μν)_m = μ_m − ν_m.
pub fn difference_vector(mu: BitString, nu: BitString, n: usize) -> Vec<f64> {
    (0..n).map(|m| mu.bit(m) as f64 - nu.bit(m) as f64).collect()
}

/// Symmetric n×n decoherence matrix K_{lm} = K_{|l−m|}(t) at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceMatrix {
    entries: DMatrix<f64>,
    time: f64,
    origin: Option<(RegisterSpec, BathSpec)>,
}

impl DecoherenceMatrix {
    /// Toeplitz matrix from its first row.
    pub fn from_toeplitz(row: &[f64], time: f64) -> Result<Self> {
        if row.is_empty() {
            return Err(Error::Invalid("empty Toeplitz row".into()));
        }
        let n = row.len();
        let entries = DMatrix::from_fn(n, n, |l, m| row[l.abs_diff(m)]);
        Ok(DecoherenceMatrix { entries, time, origin: None })
    }

    /// Any symmetric matrix (used for general fidelity routes).
    pub fn from_matrix(entries: DMatrix<f64>, time: f64) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension { expected: entries.nrows(), got: entries.ncols() });
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        let asym = (&entries - entries.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::Invalid(format!("matrix not symmetric (max asymmetry {asym:e})")));
        }
        Ok(DecoherenceMatrix { entries, time, origin: None })
    }

    pub fn zeros(n: usize) -> Self {
        DecoherenceMatrix { entries: DMatrix::zeros(n, n), time: 0.0, origin: None }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn origin(&self) -> Option<&(RegisterSpec, BathSpec)> {
        self.origin.as_ref()
    }

    /// K₀, the (constant) diagonal.
    pub fn diagonal_value(&self) -> f64 {
        self.entries[(0, 0)]
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// tr K².
    pub fn trace_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    /// Entrywise scaling cK.
    pub fn scaled(&self, c: f64) -> Self {
        DecoherenceMatrix { entries: &self.entries * c, time: self.time, origin: self.origin }
    }

    pub fn is_toeplitz(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|l| (0..n).all(|m| (self.entries[(l, m)] - self.entries[(0, l.abs_diff(m))]).abs() <= tol))
    }

    /// vᵀKv.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let n = self.n();
        let mut sum = 0.0;
        for l in 0..n {
            if v[l] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for m in 0..n {
                row += self.entries[(l, m)] * v[m];
            }
            sum += v[l] * row;
        }
        sum
    }
}

/// K^χ_l(t) for l = 0..=max_l, built bottom-up from 2^χ·(max_l+1) physical
/// pair functions.
pub fn effective_row(
    chi: u32,
    max_l: usize,
    t: f64,
    a: f64,
    bath: &BathSpec,
    model: KernelModel,
) -> Result<Vec<f64>> {
    let base_len = (max_l + 1) << chi;
    let mut row = (0..base_len)
        .into_par_iter()
        .map(|l| model.pair(l as f64 * a, t, bath))
        .collect::<Result<Vec<f64>>>()?;
    for _ in 0..chi {
        let len = row.len() / 2;
        row = (0..len)
            .map(|l| {
                let below = if l == 0 { row[1] } else { row[2 * l - 1] };
                2.0 * row[2 * l] - below - row[2 * l + 1]
            })
            .collect();
    }
    row.truncate(max_l + 1);
    Ok(row)
}

/// K^χ_l(t) with the exact kernel.
pub fn effective_k(chi: u32, l: usize, t: f64, a: f64, bath: &BathSpec) -> Result<f64> {
    effective_k_with(chi, l, t, a, bath, KernelModel::Exact)
}

pub fn effective_k_with(
    chi: u32,
    l: usize,
    t: f64,
    a: f64,
    bath: &BathSpec,
    model: KernelModel,
) -> Result<f64> {
    Ok(effective_row(chi, l, t, a, bath, model)?[l])
}

pub fn decoherence_matrix(spec: &RegisterSpec, bath: &BathSpec, t: f64) -> Result<DecoherenceMatrix> {
    decoherence_matrix_with(spec, bath, t, KernelModel::Exact)
}

pub fn decoherence_matrix_with(
    spec: &RegisterSpec,
    bath: &BathSpec,
    t: f64,
    model: KernelModel,
) -> Result<DecoherenceMatrix> {
    let row = effective_row(spec.chi, spec.n - 1, t, spec.a, bath, model)?;
    let mut k = DecoherenceMatrix::from_toeplitz(&row, t)?;
    k.origin = Some((*spec, *bath));
    Ok(k)
}

/// D_μν = v_μνᵀ K v_μν.
pub fn decoherence_coefficient(mu: BitString, nu: BitString, k: &DecoherenceMatrix) -> Result<f64> {
    let n = k.n();
    mu.check(n)?;
    nu.check(n)?;
    Ok(k.quadratic_form(&difference_vector(mu, nu, n)))
}

/// Plateau K₀^χ(t → ∞) evaluated on the exact kernel: starts at
/// t = 50·max(2^{χ−1}a, 1/T) and doubles t until the relative change drops
/// below 1e-6.
pub fn plateau(chi: u32, a: f64, bath: &BathSpec) -> Result<f64> {
    let span = a * (1u64 << chi.saturating_sub(1)) as f64;
    let thermal = if bath.temperature > 0.0 { 1.0 / bath.temperature } else { 0.0 };
    let mut t = 50.0 * span.max(thermal);
    let mut prev = effective_k(chi, 0, t, a, bath)?;
    for _ in 0..40 {
        t *= 2.0;
        let next = effective_k(chi, 0, t, a, bath)?;
        if (next - prev).abs() <= 1e-6 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!("plateau of K₀^{chi} did not settle by t = {t}")))
}

/// Asymptotic value K₀¹(∞): απTa + 2α ln(Ω/2πT) for Ta ≥ 10,
/// 2α ln(Ωa/e) for Ta ≤ 0.01, and the numerical plateau in between.
pub fn k1_asymptote(a: f64, bath: &BathSpec) -> Result<f64> {
    let ta = bath.temperature * a;
    let alpha = bath.alpha;
    if ta >= 10.0 {
        let temp = bath.temperature;
        Ok(alpha * std::f64::consts::PI * ta
            + 2.0 * alpha * (bath.omega_c / (2.0 * std::f64::consts::PI * temp)).ln())
    } else if ta <= 0.01 {
        Ok(2.0 * alpha * ((bath.omega_c * a).ln() - 1.0))
    } else {
        plateau(1, a, bath)
    }
}

/// Low-temperature estimate (1/πT) ln(2πa²ΩT/e²) of the crossover time.
pub fn crossover_estimate_low_t(a: f64, bath: &BathSpec) -> f64 {
    let temp = bath.temperature;
    ((2.0 * std::f64::consts::PI * a * a * bath.omega_c * temp).ln() - 2.0) / (std::f64::consts::PI * temp)
}

/// Time at which the encoded K₀¹(t) falls below the plain K(0,t), by
/// bisection on [1e-3·a, 1e3·max(a, 1/T)].
pub fn crossover_time(a: f64, bath: &BathSpec) -> Result<f64> {
    let gap = |t: f64| -> Result<f64> {
        Ok(effective_k(1, 0, t, a, bath)? - kernel::k_zero_exact(t, bath)?)
    };
    let thermal = if bath.temperature > 0.0 { 1.0 / bath.temperature } else { 0.0 };
    let mut lo = 1e-3 * a;
    let mut hi = 1e3 * a.max(thermal);
    let (g_lo, g_hi) = (gap(lo)?, gap(hi)?);
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::NoCrossing { lo, hi });
    }
    for _ in 0..80 {
        let mid = (lo * hi).sqrt();
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(temp: f64) -> BathSpec {
        BathSpec::ohmic(0.01, 1e3, temp).unwrap()
    }

    #[test]
    fn order_zero_is_the_pair_function() {
        let b = bath(2.0);
        let row = effective_row(0, 3, 1.5, 0.4, &b, KernelModel::Exact).unwrap();
        for (l, k) in row.iter().enumerate() {
            assert_eq!(*k, kernel::k_dispatch(l as f64 * 0.4, 1.5, &b).unwrap());
        }
    }

    #[test]
    fn order_one_diagonal() {
        let b = bath(2.0);
        let k = effective_k(1, 0, 1.5, 0.4, &b).unwrap();
        let expect = 2.0 * (kernel::k_zero_exact(1.5, &b).unwrap() - kernel::k_dispatch(0.4, 1.5, &b).unwrap());
        assert!((k - expect).abs() < 1e-15);
    }

    #[test]
    fn bitstring_range_checked() {
        let k = DecoherenceMatrix::zeros(3);
        assert!(matches!(
            decoherence_coefficient(BitString(0b1000), BitString(0), &k),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn high_temperature_order_one_is_diagonal() {
        // t > (2n−1)a: K¹₀ = γa + 2α ln(Ω/2πT), K¹_l = 0 otherwise
        let b = BathSpec::ohmic(1e-3, 1e3, 10.0).unwrap();
        let spec = RegisterSpec::new(4, 1.0, 1).unwrap();
        let model = KernelModel::HighTemperature { keep_log: true };
        let k = decoherence_matrix_with(&spec, &b, 20.0, model).unwrap();
        let gamma = b.alpha * std::f64::consts::PI * b.temperature;
        let kappa = gamma * spec.a + 2.0 * b.alpha * (b.omega_c / (2.0 * std::f64::consts::PI * b.temperature)).ln();
        for l in 0..4 {
            for m in 0..4 {
                let expect = if l == m { kappa } else { 0.0 };
                assert!((k.entries()[(l, m)] - expect).abs() < 1e-12);
            }
        }
        let dropped = decoherence_matrix_with(&spec, &b, 20.0, KernelModel::HighTemperature { keep_log: false })
            .unwrap();
        assert!((dropped.diagonal_value() - gamma * spec.a).abs() < 1e-12);
    }
}
