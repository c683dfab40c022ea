//! Haar-averaged register fidelity
//!
//! ```text
//! F = 4^{−n} Σ_{μν} e^{−D_μν},   D_μν = v_μνᵀ K v_μν
//! ```
//!
//! evaluated exactly, by Monte Carlo over the equivalent Gaussian integral,
//! and through the weak-coupling and small-deviation approximations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::encoding::DecoherenceMatrix;
use crate::error::{Error, Result};

/// Largest register handled by [`fidelity_exact_sum`].
pub const MAX_EXACT_N: usize = 14;

/// Samples per independently seeded Monte Carlo block.
pub const MC_BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactSum,
    MonteCarlo,
    WeakCoupling,
    SmallDeviation,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub value: f64,
    /// Zero for deterministic routes.
    pub std_error: f64,
    pub method: Method,
}

impl FidelityEstimate {
    fn exact(value: f64, method: Method) -> Self {
        FidelityEstimate { value, std_error: 0.0, method }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Floor applied to negative eigenvalues of K before sampling.
    pub eigen_clamp: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 1_000_000, seed: 0, eigen_clamp: 0.0 }
    }
}

/// Exact sum. Grouping the pairs (μ, ν) by v = μ − ν ∈ {−1, 0, 1}ⁿ gives
/// F = 4^{−n} Σ_v 2^{#zeros(v)} e^{−vᵀKv}; the 3ⁿ vectors are visited in
/// reflected ternary Gray order so that vᵀKv updates in O(n) per step.
pub fn fidelity_exact_sum(k: &DecoherenceMatrix) -> Result<FidelityEstimate> {
    let n = k.n();
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge { n, max: MAX_EXACT_N });
    }
    let km = k.entries();
    // the top `split` digits are fixed per parallel block
    let split = n.min(4);
    let inner = n - split;
    let blocks = 3usize.pow(split as u32);
    let partial: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut v = vec![0i8; n];
            let mut rest = b;
            for slot in v.iter_mut().skip(inner) {
                *slot = (rest % 3) as i8 - 1;
                rest /= 3;
            }
            gray_block(km, &mut v, inner)
        })
        .collect();
    let total: f64 = partial.iter().sum();
    Ok(FidelityEstimate::exact(total * 0.25f64.powi(n as i32), Method::ExactSum))
}

/// Σ 2^{zeros} e^{−vᵀKv} over all settings of v[0..inner], the remaining
/// entries held fixed.
fn gray_block(km: &DMatrix<f64>, v: &mut [i8], inner: usize) -> f64 {
    let n = v.len();
    for slot in v.iter_mut().take(inner) {
        *slot = -1;
    }
    let mut kv: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| km[(i, j)] * v[j] as f64).sum())
        .collect();
    let mut q: f64 = (0..n).map(|i| v[i] as f64 * kv[i]).sum();
    let mut zeros = v.iter().filter(|&&x| x == 0).count() as i32;
    let mut dir = vec![1i8; inner];
    let mut sum = 2f64.powi(zeros) * (-q).exp();
    loop {
        let Some(i) = (0..inner).find(|&i| (-1..=1).contains(&(v[i] + dir[i]))) else {
            break;
        };
        let delta = dir[i] as f64;
        if v[i] == 0 {
            zeros -= 1;
        }
        q += 2.0 * delta * kv[i] + km[(i, i)];
        for (j, x) in kv.iter_mut().enumerate() {
            *x += delta * km[(j, i)];
        }
        v[i] += dir[i];
        if v[i] == 0 {
            zeros += 1;
        }
        for d in dir.iter_mut().take(i) {
            *d = -*d;
        }
        sum += 2f64.powi(zeros) * (-q).exp();
    }
    sum
}

/// Eigen-decomposition of K/2 as a sampling map x = U √Λ z.
fn sampling_map(k: &DecoherenceMatrix, clamp: f64) -> Result<DMatrix<f64>> {
    let n = k.n();
    let eig = SymmetricEigen::new(k.entries().clone());
    let norm = k.entries().amax();
    let min = eig.eigenvalues.min();
    let tolerance = 1e-8 * norm;
    if min < -tolerance {
        return Err(Error::Indefinite { min_eigenvalue: min, tolerance });
    }
    let scale = DVector::from_fn(n, |i, _| (0.5 * eig.eigenvalues[i].max(clamp)).max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&scale))
}

/// Monte Carlo estimate of E[Π cos² x_l] with x ~ N(0, K/2). Each block of
/// [`MC_BLOCK`] samples draws from its own ChaCha stream, so the result is
/// independent of thread scheduling.
pub fn fidelity_mc(k: &DecoherenceMatrix, cfg: &McConfig) -> Result<FidelityEstimate> {
    if cfg.samples == 0 {
        return Err(Error::Invalid("Monte Carlo needs at least one sample".into()));
    }
    let n = k.n();
    let map = sampling_map(k, cfg.eigen_clamp)?;
    let blocks = cfg.samples.div_ceil(MC_BLOCK);
    let moments: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let count = MC_BLOCK.min(cfg.samples - b * MC_BLOCK);
            let mut z = DVector::<f64>::zeros(n);
            let mut x = DVector::<f64>::zeros(n);
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                x.gemv(1.0, &map, &z, 0.0);
                let f: f64 = x.iter().map(|xi| xi.cos().powi(2)).product();
                s1 += f;
                s2 += f * f;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = moments.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let count = cfg.samples as f64;
    let mean = s1 / count;
    let var = if cfg.samples > 1 { ((s2 - count * mean * mean) / (count - 1.0)).max(0.0) } else { 0.0 };
    Ok(FidelityEstimate { value: mean, std_error: (var / count).sqrt(), method: Method::MonteCarlo })
}

/// det(1 + K)^{−1/2}.
pub fn fidelity_weak_coupling(k: &DecoherenceMatrix) -> Result<FidelityEstimate> {
    let n = k.n();
    let shifted = k.entries() + DMatrix::identity(n, n);
    let Some(chol) = shifted.cholesky() else {
        let min = SymmetricEigen::new(k.entries().clone()).eigenvalues.min();
        return Err(Error::Singular(min));
    };
    // det(1+K)^{1/2} = Π Lᵢᵢ; fall back to logs if the product leaves range
    let diag = chol.l_dirty().diagonal();
    let product: f64 = diag.iter().product();
    let value = if product.is_normal() {
        1.0 / product
    } else {
        (-diag.iter().map(|d| d.ln()).sum::<f64>()).exp()
    };
    Ok(FidelityEstimate::exact(value, Method::WeakCoupling))
}

/// 1 − n K₀/2.
pub fn fidelity_small_deviation(k: &DecoherenceMatrix) -> FidelityEstimate {
    let n = k.n() as f64;
    FidelityEstimate::exact(1.0 - 0.5 * n * k.diagonal_value(), Method::SmallDeviation)
}

/// ((1 + e^{−κ})/2)ⁿ for n independent qubits with K = κ·1.
pub fn fidelity_independent(n: usize, kappa: f64) -> FidelityEstimate {
    let single = (0.5 * (-kappa).exp_m1()).ln_1p();
    FidelityEstimate::exact((n as f64 * single).exp(), Method::ClosedForm)
}

/// 4^{−n} Σ_{l=0}^{2n} C(2n, l) e^{−κ(n−l)²} for uniformly coupled qubits,
/// summed in log space.
pub fn fidelity_symmetric(n: usize, kappa: f64) -> FidelityEstimate {
    if kappa == 0.0 {
        // the binomials sum to 4ⁿ; skip the rounding of the log sum
        return FidelityEstimate::exact(1.0, Method::ClosedForm);
    }
    let two_n = 2 * n;
    let nf = n as f64;
    let mut log_binom = 0.0;
    let mut terms = Vec::with_capacity(two_n + 1);
    for l in 0..=two_n {
        let dev = nf - l as f64;
        terms.push(log_binom - kappa * dev * dev);
        log_binom += ((two_n - l) as f64 / (l + 1) as f64).ln();
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|x| (x - top).exp()).sum();
    let value = (top + sum.ln() - nf * 4f64.ln()).exp();
    FidelityEstimate::exact(value, Method::ClosedForm)
}

/// Large-n approximation 1/√(1 + nκ) of [`fidelity_symmetric`].
pub fn fidelity_symmetric_large_n(n: usize, kappa: f64) -> FidelityEstimate {
    FidelityEstimate::exact(1.0 / (1.0 + n as f64 * kappa).sqrt(), Method::ClosedForm)
}

/// Asymptotic fidelity ((1 + e^{−γa})/2)ⁿ of a first-order encoded register
/// at high temperature.
pub fn fidelity_encoded_asymptote(n: usize, gamma_a: f64) -> FidelityEstimate {
    fidelity_independent(n, gamma_a)
}

/// Random symmetric PSD Toeplitz matrix K_l = Σⱼ wⱼ cos(θⱼ l) with wⱼ ≥ 0,
/// scaled to the given trace.
pub fn random_psd_toeplitz<R: Rng>(n: usize, trace: f64, rng: &mut R) -> DecoherenceMatrix {
    let modes = 1 + n / 2;
    let weights: Vec<f64> = (0..modes).map(|_| rng.random::<f64>()).collect();
    let angles: Vec<f64> = (0..modes).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
    let total: f64 = weights.iter().sum();
    let row: Vec<f64> = (0..n)
        .map(|l| {
            weights.iter().zip(&angles).map(|(w, th)| w * (th * l as f64).cos()).sum::<f64>() / total
                * trace
                / n as f64
        })
        .collect();
    DecoherenceMatrix::from_toeplitz(&row, 0.0).expect("n ≥ 1")
}

/// Monte Carlo estimate of E|u_μ|²|u_ν|² over Haar-random unit vectors in
/// dimension 2ⁿ (complex Gaussian vectors, normalized). Returns mean and
/// standard error.
pub fn haar_moment_mc(n: usize, mu: usize, nu: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if n == 0 || n > 20 {
        return Err(Error::Invalid(format!("Haar moment needs 1 ≤ n ≤ 20, got {n}")));
    }
    let dim = 1usize << n;
    if mu >= dim || nu >= dim {
        return Err(Error::Dimension { expected: dim, got: mu.max(nu) + 1 });
    }
    if samples < 2 {
        return Err(Error::Invalid("Haar moment needs at least two samples".into()));
    }
    let blocks = samples.div_ceil(MC_BLOCK);
    let moments: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut amp = vec![0.0f64; dim];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let mut norm = 0.0;
                for a in amp.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *a = re * re + im * im;
                    norm += *a;
                }
                let x = amp[mu] * amp[nu] / (norm * norm);
                s1 += x;
                s2 += x * x;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = moments.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let count = samples as f64;
    let mean = s1 / count;
    let var = ((s2 - count * mean * mean) / (count - 1.0)).max(0.0);
    Ok((mean, (var / count).sqrt()))
}

/// Exact Haar moment E|u_μ|²|u_ν|² = (1 + δ_μν)/(d(d+1)) in dimension d.
pub fn haar_moment_exact(dim: usize, same: bool) -> f64 {
    let d = dim as f64;
    (1.0 + if same { 1.0 } else { 0.0 }) / (d * (d + 1.0))
}

/// Leading-order moment (1 + δ_μν)/d², the form used by the exact sum.
pub fn haar_moment_leading(dim: usize, same: bool) -> f64 {
    let d = dim as f64;
    (1.0 + if same { 1.0 } else { 0.0 }) / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_walk_visits_every_vector_once() {
        // with K = 0 every term is 2^{zeros}; Σ_v 2^{zeros(v)} = 4ⁿ
        for n in 1..=6 {
            let k = DecoherenceMatrix::zeros(n);
            assert!((fidelity_exact_sum(&k).unwrap().value - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_sum_size_limit() {
        let k = DecoherenceMatrix::zeros(MAX_EXACT_N + 1);
        assert_eq!(fidelity_exact_sum(&k), Err(Error::TooLarge { n: 15, max: 14 }));
    }

    #[test]
    fn independent_arithmetic() {
        assert_eq!(fidelity_independent(7, 0.0).value, 1.0);
        assert!((fidelity_independent(1, std::f64::consts::LN_2).value - 0.75).abs() < 1e-15);
    }

    #[test]
    fn symmetric_single_qubit() {
        let f = fidelity_symmetric(1, 1.0).value;
        assert!((f - 0.5 * (1.0 + (-1.0f64).exp())).abs() < 1e-15);
        assert!((fidelity_symmetric(40, 0.0).value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn small_deviation_arithmetic() {
        let k = DecoherenceMatrix::from_toeplitz(&vec![1e-4; 1].repeat(125), 0.0).unwrap();
        assert!((fidelity_small_deviation(&k).value - (1.0 - 0.00625)).abs() < 1e-15);
    }

    #[test]
    fn indefinite_rejected() {
        let k = DecoherenceMatrix::from_toeplitz(&[1.0, 2.0], 0.0).unwrap();
        assert!(matches!(fidelity_mc(&k, &McConfig::default()), Err(Error::Indefinite { .. })));
        let k = DecoherenceMatrix::from_toeplitz(&[-1.0, 0.5], 0.0).unwrap();
        assert!(matches!(fidelity_weak_coupling(&k), Err(Error::Singular(_))));
    }

    #[test]
    fn haar_exact_vs_leading() {
        assert!((haar_moment_exact(2, false) - 1.0 / 6.0).abs() < 1e-15);
        assert!((haar_moment_leading(2, true) - 0.5).abs() < 1e-15);
    }
}
