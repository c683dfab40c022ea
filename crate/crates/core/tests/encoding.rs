use std::f64::consts::PI;

use decoherence::encoding::*;
use decoherence::kernel::{k_dispatch, k_zero_exact};
use decoherence::BathSpec;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn bath(alpha: f64, omega_c: f64, temp: f64) -> BathSpec {
    BathSpec::ohmic(alpha, omega_c, temp).unwrap()
}

/// Order-χ label μ on n qubits → physical label on n·2^χ spins, applying
/// μ′_{2i} = μ_i, μ′_{2i+1} = 1 − μ_i once per level.
fn lift(mu: u64, n: usize, levels: u32) -> (u64, usize) {
    let mut bits = mu;
    let mut len = n;
    for _ in 0..levels {
        let mut next = 0u64;
        for i in 0..len {
            let b = (bits >> i) & 1;
            next |= b << (2 * i);
            next |= (1 - b) << (2 * i + 1);
        }
        bits = next;
        len *= 2;
    }
    (bits, len)
}

fn brute_coefficient(mu: u64, nu: u64, len: usize, pair: impl Fn(usize) -> f64) -> f64 {
    let mut d = 0.0;
    for l in 0..len {
        for m in 0..len {
            let vl = ((mu >> l) & 1) as f64 - ((nu >> l) & 1) as f64;
            let vm = ((mu >> m) & 1) as f64 - ((nu >> m) & 1) as f64;
            d += vl * vm * pair(l.abs_diff(m));
        }
    }
    d
}

#[test]
fn recursion_matches_physical_brute_force() {
    let b = bath(0.05, 1e3, 3.0);
    let (a, t) = (0.7, 2.3);
    for chi in 1..=2u32 {
        for n in 1..=3usize {
            let spec = RegisterSpec::new(n, a, chi).unwrap();
            let k = decoherence_matrix(&spec, &b, t).unwrap();
            let lower = RegisterSpec::new(2 * n, a, chi - 1).unwrap();
            let k_lower = decoherence_matrix(&lower, &b, t).unwrap();
            for mu in 0..(1u64 << n) {
                for nu in 0..(1u64 << n) {
                    let d = decoherence_coefficient(BitString(mu), BitString(nu), &k).unwrap();
                    // one level down
                    let (mu1, _) = lift(mu, n, 1);
                    let (nu1, _) = lift(nu, n, 1);
                    let d1 = decoherence_coefficient(BitString(mu1), BitString(nu1), &k_lower).unwrap();
                    // all the way to physical spins
                    let (mu0, len) = lift(mu, n, chi);
                    let (nu0, _) = lift(nu, n, chi);
                    let d0 = brute_coefficient(mu0, nu0, len, |l| k_dispatch(l as f64 * a, t, &b).unwrap());
                    let scale = d0.abs().max(1e-12);
                    assert!((d - d1).abs() < 1e-11 * scale.max(1.0), "χ={chi} n={n} μ={mu} ν={nu}");
                    assert!((d - d0).abs() < 1e-11 * scale.max(1.0), "χ={chi} n={n} μ={mu} ν={nu}: {d} {d0}");
                }
            }
        }
    }
}

#[test]
fn single_qubit_coefficient_is_diagonal() {
    let b = bath(0.1, 1e3, 1.0);
    let spec = RegisterSpec::new(1, 1.0, 0).unwrap();
    let k = decoherence_matrix(&spec, &b, 4.0).unwrap();
    let d = decoherence_coefficient(BitString(0), BitString(1), &k).unwrap();
    assert_eq!(d, k_zero_exact(4.0, &b).unwrap());
    assert_eq!(decoherence_coefficient(BitString(1), BitString(1), &k).unwrap(), 0.0);
}

#[test]
fn coefficient_matches_double_loop() {
    let k = DMatrix::from_row_slice(3, 3, &[0.9, 0.2, -0.1, 0.2, 0.7, 0.3, -0.1, 0.3, 0.8]);
    let km = DecoherenceMatrix::from_matrix(k.clone(), 0.0).unwrap();
    let d = decoherence_coefficient(BitString(0b101), BitString(0b010), &km).unwrap();
    let v = [1.0, -1.0, 1.0];
    let mut brute = 0.0;
    for l in 0..3 {
        for m in 0..3 {
            brute += v[l] * v[m] * k[(l, m)];
        }
    }
    assert!((d - brute).abs() < 1e-15);
}

#[test]
fn zero_time_matrix_vanishes() {
    let b = bath(0.1, 1e3, 1.0);
    let spec = RegisterSpec::new(5, 1.0, 2).unwrap();
    let k = decoherence_matrix(&spec, &b, 0.0).unwrap();
    assert!(k.entries().iter().all(|&x| x == 0.0));
    assert!(k.is_toeplitz(0.0));
    assert_eq!(k.origin().unwrap().0, spec);
}

#[test]
fn far_apart_plain_register_is_diagonal() {
    // a·T ≫ t·T ≫ 1
    let b = bath(0.01, 1e4, 10.0);
    let spec = RegisterSpec::new(4, 1e4, 0).unwrap();
    let k = decoherence_matrix(&spec, &b, 5.0).unwrap();
    let kappa = k.diagonal_value();
    for l in 0..4 {
        for m in 0..4 {
            if l != m {
                assert!(k.entries()[(l, m)].abs() < 1e-3 * kappa);
            }
        }
    }
}

#[test]
fn encoded_high_temperature_matrix() {
    // t > (2n−1)a: κ·1 with κ = γa + 2α ln(Ω/2πT)
    let b = bath(1e-3, 1e3, 10.0);
    let spec = RegisterSpec::new(3, 1.0, 1).unwrap();
    let k = decoherence_matrix(&spec, &b, 8.0).unwrap();
    let gamma = b.alpha * PI * b.temperature;
    let kappa = gamma + 2.0 * b.alpha * (b.omega_c / (2.0 * PI * b.temperature)).ln();
    assert!((k.diagonal_value() - kappa).abs() < 0.01 * kappa);
    assert!(k.entries()[(0, 1)].abs() < 0.01 * kappa);
}

#[test]
fn order_two_plateau_doubles() {
    let a = 1.0;
    for &ta in &[10.0, 20.0, 50.0] {
        let b = bath(0.01, 1e3, ta / a);
        let k1 = plateau(1, a, &b).unwrap();
        let k2 = plateau(2, a, &b).unwrap();
        let k3 = plateau(3, a, &b).unwrap();
        assert!((k2 / k1 - 2.0).abs() < 0.04, "Ta={ta}: {}", k2 / k1);
        assert!((k3 / k1 - 4.0).abs() < 0.08, "Ta={ta}: {}", k3 / k1);
    }
}

#[test]
fn asymptote_regimes() {
    let a = 1.0;
    let b = bath(0.01, 1e3, 10.0);
    let analytic = k1_asymptote(a, &b).unwrap();
    let expect = b.alpha * PI * 10.0 + 2.0 * b.alpha * (1e3 / (20.0 * PI)).ln();
    assert!((analytic - expect).abs() < 1e-15);
    assert!((analytic - plateau(1, a, &b).unwrap()).abs() < 5e-3 * analytic);

    let b = bath(0.01, 1e3, 0.01);
    let low = k1_asymptote(a, &b).unwrap();
    assert!((low - 2.0 * b.alpha * (1e3f64.ln() - 1.0)).abs() < 1e-15);
    assert!((low - plateau(1, a, &b).unwrap()).abs() < 0.02 * low);

    let b = bath(0.01, 1e3, 1.0);
    let mid = k1_asymptote(a, &b).unwrap();
    assert_eq!(mid, plateau(1, a, &b).unwrap());
    let direct = effective_k(1, 0, 50.0 * a, a, &b).unwrap();
    assert!((mid - direct).abs() < 1e-4 * mid);
}

#[test]
fn plateau_reached_after_three_spacings() {
    let a = 1.0;
    for &ta in &[10.0, 30.0] {
        let b = bath(0.01, 1e3, ta);
        let inf = plateau(1, a, &b).unwrap();
        for i in 0..40 {
            let t = 3.0 * a * 1.15f64.powi(i);
            let k = effective_k(1, 0, t, a, &b).unwrap();
            assert!((k - inf).abs() / inf < 1e-3, "Ta={ta} t={t}: {k} vs {inf}");
        }
    }
}

#[test]
fn crossover_high_temperature() {
    let a = 1.0;
    let b = bath(0.01, 1e3, 10.0);
    let tc = crossover_time(a, &b).unwrap();
    assert!(tc > 0.5 * a && tc < 2.0 * a, "{tc}");
}

#[test]
fn crossover_low_temperature() {
    let a = 1.0;
    let b = bath(0.01, 1e3, 0.05);
    let tc = crossover_time(a, &b).unwrap();
    let est = crossover_estimate_low_t(a, &b);
    assert!(tc > 0.5 * est && tc < 2.0 * est, "{tc} vs {est}");
}

#[test]
fn crossover_is_a_single_sign_change() {
    let a: f64 = 1.0;
    for &temp in &[0.05, 1.0, 10.0] {
        let b = bath(0.01, 1e3, temp);
        let lo = 1e-3 * a;
        let hi = 1e3 * a.max(1.0 / temp);
        let mut changes = 0;
        let mut prev = None;
        for i in 0..=200 {
            let t = lo * (hi / lo).powf(i as f64 / 200.0);
            let g = effective_k(1, 0, t, a, &b).unwrap() - k_zero_exact(t, &b).unwrap();
            let sign = g > 0.0;
            if let Some(p) = prev {
                if p != sign {
                    changes += 1;
                }
            }
            prev = Some(sign);
        }
        assert_eq!(changes, 1, "T={temp}");
    }
}

#[test]
fn short_times_grow_twice_as_fast() {
    let a = 1.0;
    let b = bath(0.01, 1e3, 10.0);
    let t = 0.05 * a;
    let ratio = effective_k(1, 0, t, a, &b).unwrap() / k_zero_exact(t, &b).unwrap();
    assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
}

#[test]
fn first_order_qubits_decouple_at_high_temperature() {
    let a = 1.0;
    for &temp in &[5.0, 20.0] {
        let b = bath(0.01, 1e4, temp);
        for l in 1..6usize {
            let t = (2 * l + 1) as f64 * a + 2.0;
            let k = effective_k(1, l, t, a, &b).unwrap();
            let bound = 2.0 * b.alpha * PI / (24.0 * temp * l as f64 * a);
            assert!(k.abs() <= bound, "T={temp} l={l}: {k} > {bound}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficients_nonnegative_symmetric_and_flip_invariant(
        n in 1usize..=10,
        mu in any::<u64>(),
        nu in any::<u64>(),
        temp in 0.1f64..20.0,
        t in 0.01f64..20.0,
        chi in 0u32..=2,
    ) {
        let b = bath(0.02, 1e3, temp);
        let spec = RegisterSpec::new(n, 1.0, chi).unwrap();
        let k = decoherence_matrix(&spec, &b, t).unwrap();
        let m = (1u64 << n) - 1;
        let (mu, nu) = (BitString(mu & m), BitString(nu & m));
        let d = decoherence_coefficient(mu, nu, &k).unwrap();
        let scale = k.entries().amax() * (n * n) as f64;
        prop_assert!(d >= -1e-10 * scale);
        prop_assert!((d - decoherence_coefficient(nu, mu, &k).unwrap()).abs() <= 1e-14 * scale);
        let flipped = decoherence_coefficient(mu.flipped(n), nu.flipped(n), &k).unwrap();
        prop_assert!((d - flipped).abs() <= 1e-14 * scale);
        prop_assert_eq!(decoherence_coefficient(mu, mu, &k).unwrap(), 0.0);
    }
}
