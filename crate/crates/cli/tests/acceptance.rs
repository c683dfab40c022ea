//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use decoherence::encoding::{self, decoherence_coefficient, decoherence_matrix, BitString, RegisterSpec};
use decoherence::fidelity::{self, McConfig};
use decoherence::kernel;
use decoherence::redfield::{self, Model, SpinPairSpec, TwoSpinState};
use decoherence::BathSpec;
use decoherence_cli::{run, Command, RunConfig};
use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn bath(alpha: f64, omega_c: f64, temp: f64) -> BathSpec {
    BathSpec::ohmic(alpha, omega_c, temp).unwrap()
}

fn headline_number() -> Outcome {
    let f = fidelity::fidelity_encoded_asymptote(125, 1e-4).value;
    let gap = ((1.0 - f) - 0.0062).abs();
    outcome(gap < 1e-4, format!("F = {f:.6}, 1 - F = {:.6}", 1.0 - f))
}

fn kernel_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let omega_c = 1e6;
    let mut worst_finite = 0.0f64;
    for _ in 0..100 {
        let r = 10f64.powf(rng.random_range(-5.0..-1.0));
        let t = r * 10f64.powf(rng.random_range(-1.0..1.5));
        let temp = 10f64.powf(rng.random_range(-1.0..1.0)) / r;
        let b = bath(1.0, omega_c, temp);
        let quad = kernel::k_quadrature(r, t, &b).unwrap().value;
        worst_finite = worst_finite.max(rel(kernel::k_finite_exact(r, t, &b).unwrap(), quad));
    }
    let mut worst_zero = 0.0f64;
    for _ in 0..50 {
        let temp = 10f64.powf(rng.random_range(-1.0..1.0));
        let t = 10f64.powf(rng.random_range(-4.0..2.0)) / temp;
        let b = bath(1.0, omega_c, temp);
        let quad = kernel::k_quadrature(0.0, t, &b).unwrap().value;
        worst_zero = worst_zero.max(rel(kernel::k_zero_exact(t, &b).unwrap(), quad));
    }
    outcome(
        worst_finite < 1e-5 && worst_zero < 1e-6,
        format!("worst finite-distance {worst_finite:.2e}, worst zero-distance {worst_zero:.2e}"),
    )
}

fn plateau_ratios() -> Outcome {
    let mut worst = 0.0f64;
    for &ta in &[10.0, 20.0, 50.0] {
        let b = bath(1.0, 5e3, ta);
        let k1 = encoding::plateau(1, 1.0, &b).unwrap();
        for chi in 2..=3u32 {
            let ratio = encoding::plateau(chi, 1.0, &b).unwrap() / k1;
            worst = worst.max(rel(ratio, (1u32 << (chi - 1)) as f64));
        }
    }
    outcome(worst < 0.02, format!("worst relative deviation from 2^(chi-1): {worst:.2e}"))
}

fn crossover_times() -> Outcome {
    let high = bath(1.0, 1e3, 10.0);
    let tc_high = encoding::crossover_time(1.0, &high).unwrap();
    let low = bath(1.0, 1e3, 0.05);
    let tc_low = encoding::crossover_time(1.0, &low).unwrap();
    let estimate = encoding::crossover_estimate_low_t(1.0, &low);
    let within = |x: f64, y: f64| x / y <= 2.0 && y / x <= 2.0;
    outcome(
        within(tc_high, 1.0) && within(tc_low, estimate),
        format!("Ta = 10: t_c = {tc_high:.4}a; Ta = 0.05: t_c = {tc_low:.4}a against {estimate:.4}a"),
    )
}

fn fidelity_routes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_sigma, mut worst_wc) = (0.0f64, 0.0f64);
    let mut pass = true;
    for case in 0..20u64 {
        let n = rng.random_range(1..=10usize);
        let trace = rng.random_range(0.01..=0.5);
        let k = fidelity::random_psd_toeplitz(n, trace, &mut rng);
        let exact = fidelity::fidelity_exact_sum(&k).unwrap().value;
        let mc = fidelity::fidelity_mc(&k, &McConfig { samples: 1_000_000, seed: 100 + case, ..Default::default() }).unwrap();
        let wc = fidelity::fidelity_weak_coupling(&k).unwrap().value;
        let sigmas = (mc.value - exact).abs() / mc.std_error.max(f64::MIN_POSITIVE);
        let wc_ratio = rel(wc, exact) / (2.0 * k.trace_sq());
        worst_sigma = worst_sigma.max(sigmas);
        worst_wc = worst_wc.max(wc_ratio);
        pass &= sigmas <= 3.0 && wc_ratio <= 1.0;
    }
    outcome(
        pass,
        format!("worst MC deviation {worst_sigma:.2} sigma; worst weak-coupling error {worst_wc:.3} of 2 tr(K^2)"),
    )
}

fn closed_forms() -> Outcome {
    let mut worst = 0.0f64;
    for &n in &[1usize, 2, 7, 30, 100] {
        for &kappa in &[1e-4, 0.01, 0.3, 2.0] {
            let eps = 2.0 * n as f64 * f64::EPSILON;
            let mut row = vec![0.0; n];
            row[0] = kappa;
            let diag = encoding::DecoherenceMatrix::from_toeplitz(&row, 0.0).unwrap();
            let uniform = encoding::DecoherenceMatrix::from_toeplitz(&vec![kappa; n], 0.0).unwrap();
            let d = rel(fidelity::fidelity_weak_coupling(&diag).unwrap().value, (1.0 + kappa).powf(-0.5 * n as f64));
            let u = rel(fidelity::fidelity_weak_coupling(&uniform).unwrap().value, (1.0 + n as f64 * kappa).powf(-0.5));
            worst = worst.max(d / eps).max(u / eps);
        }
    }
    let sym = fidelity::fidelity_symmetric(100, 0.05).value;
    let sym_gap = rel(sym, 1.0 / 6f64.sqrt());
    outcome(
        worst <= 1.0 && sym_gap < 0.01,
        format!("worst determinant error {worst:.2} of 2n eps; symmetric n = 100: {sym:.6} ({sym_gap:.2e} from 1/sqrt 6)"),
    )
}

fn haar_moments() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut worst_exact = 0.0f64;
    for n in 1..=6usize {
        let dim = 1usize << n;
        for (same, nu, seed) in [(true, 0, 10 + n as u64), (false, dim - 1, 20 + n as u64)] {
            let (mean, se) = fidelity::haar_moment_mc(n, 0, nu, 400_000, seed).unwrap();
            let literal = if same { 2.0 } else { 1.0 } / (dim * dim) as f64;
            let sigmas = (mean - literal).abs() / se;
            worst_exact = worst_exact.max((mean - fidelity::haar_moment_exact(dim, same)).abs() / se);
            if sigmas > 3.0 {
                pass = false;
                parts.push(format!("n={n} {}: {sigmas:.1} sigma", if same { "same" } else { "distinct" }));
            }
        }
    }
    let detail = if pass {
        "all within 3 sigma of (1+delta)/4^n".to_string()
    } else {
        format!(
            "off (1+delta)/4^n by more than 3 sigma at {}; within {worst_exact:.2} sigma of (1+delta)/(d(d+1))",
            parts.join(", ")
        )
    };
    outcome(pass, detail)
}

/// Basis index with spin 0 written first → register label with spin m at bit m.
fn label(i: usize) -> BitString {
    BitString((((i >> 1) & 1) | ((i & 1) << 1)) as u64)
}

fn random_state(rng: &mut ChaCha8Rng) -> TwoSpinState {
    let g = Matrix4::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = g * g.adjoint();
    let tr = rho.trace();
    TwoSpinState::new(rho / tr).unwrap()
}

fn dephasing_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = rng.random_range(0.05..2.0);
        let temp = rng.random_range(0.1..10.0);
        let alpha = rng.random_range(1e-3..0.05);
        let spec = SpinPairSpec::new(1.0, a, bath(alpha, 1e3, temp)).unwrap();
        let rho0 = random_state(&mut rng);
        let grid: Vec<f64> = (0..=10).map(|i| 0.4 * a * i as f64).collect();
        let states = redfield::evolve(&rho0, &grid, &spec, Model::Dephasing).unwrap();
        let register = RegisterSpec::new(2, a, 0).unwrap();
        for (t, s) in grid.iter().zip(&states).skip(1) {
            let k = decoherence_matrix(&register, &spec.bath, *t).unwrap();
            for mu in 0..4 {
                for nu in 0..4 {
                    let d = decoherence_coefficient(label(mu), label(nu), &k).unwrap();
                    let expect = rho0.element(mu, nu) * (-d).exp();
                    if expect.norm() > 0.0 {
                        worst = worst.max((s.element(mu, nu) - expect).norm() / expect.norm());
                    }
                }
            }
        }
    }
    outcome(worst < 1e-6, format!("worst relative coherence error {worst:.2e}"))
}

fn dissipative_rates() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &a in &[0.1, 0.2, 0.3] {
        let spec = SpinPairSpec::new(5.0, a, bath(0.01, 1e3, 1.0)).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| 20.0 * a * i as f64 / 400.0).collect();
        let states = redfield::evolve(&TwoSpinState::singlet(), &grid, &spec, Model::Dissipative).unwrap();
        let fit = redfield::fit_asymptotic_rate(&grid, &redfield::subspace_fidelity(&states), a).unwrap();
        let (_, gamma1) = redfield::asymptotic_rate(&spec);
        worst = worst.max(rel(fit.rate, gamma1));
        parts.push(format!("aT={a}: {:.3e}/{gamma1:.3e}", fit.rate));
    }
    outcome(worst < 0.05, format!("{}; worst {worst:.2e}", parts.join(", ")))
}

fn figure_orderings() -> Outcome {
    // fig-foft: F_i ≤ F₀ ≤ F_s on the window
    let foft = run(&RunConfig::defaults(Command::FigFoft)).unwrap();
    let ordered = foft.rows.iter().all(|r| r[2] <= r[1] && r[1] <= r[3]);

    // fig-temperature: spread of the low-temperature curves
    let temp = run(&RunConfig::defaults(Command::FigTemperature)).unwrap();
    let low: Vec<&Vec<f64>> = temp.rows.iter().filter(|r| r[0] < 1.0).collect();
    let mut taus: Vec<f64> = low.iter().map(|r| r[1]).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let spread = |col: usize| {
        taus.iter()
            .map(|&tau| {
                let v: Vec<f64> = low.iter().filter(|r| r[1] == tau).map(|r| r[col]).collect();
                v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
            })
            .fold(0.0, f64::max)
    };
    let (plain, encoded) = (spread(2), spread(3));

    // fig-dissipative: rates grow with distance; curves coincide before the light cone
    let cfg = RunConfig::defaults(Command::FigDissipative);
    let diss = run(&cfg).unwrap();
    let tau = diss.column("tau").unwrap();
    let distances = [0.1, 0.2, 0.3];
    let curves: Vec<Vec<f64>> = distances.iter().map(|a| diss.column(&format!("f_a{a}")).unwrap()).collect();
    let rates: Vec<f64> = distances
        .iter()
        .zip(&curves)
        .map(|(a, c)| redfield::fit_asymptotic_rate(&tau, c, *a).unwrap().rate)
        .collect();
    let monotone = rates.windows(2).all(|w| w[1] > w[0]);
    let causal_gap = (0..tau.len())
        .filter(|&i| tau[i] < distances[0])
        .map(|i| (curves[1][i] - curves[0][i]).abs().max((curves[2][i] - curves[0][i]).abs()))
        .fold(0.0, f64::max);

    outcome(
        ordered && encoded < 0.1 * plain && monotone && causal_gap < 1e-8,
        format!(
            "fig-foft ordered: {ordered}; fig-temperature spread encoded {encoded:.3e} vs plain {plain:.3e}; \
             fig-dissipative rates {}, pre-cone gap {causal_gap:.1e}",
            rates.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(" < ")
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_decoherence");
    let dir = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    for command in Command::ALL {
        let mut args = vec![command.name().to_string(), "--seed".into(), "17".into()];
        if command == Command::FigTemperature {
            args.extend(["--param".into(), "points=5".into()]);
        }
        if command == Command::FigFoft {
            args.extend(["--samples".into(), "100000".into()]);
        }
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let path = dir.path().join(format!("{}-{i}.csv", command.name()));
                let status = Process::new(exe).args(&args).arg("--out").arg(&path).status().unwrap();
                assert!(status.success(), "{} exited with {status}", command.name());
                std::fs::read(&path).unwrap()
            })
            .collect();
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            mismatched.push(command.name());
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} commands byte-identical across two runs", Command::ALL.len())
        } else {
            format!("differing output: {}", mismatched.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 11] = [
        ("headline number", 1, headline_number),
        ("kernel oracle equivalence", 30, kernel_oracles),
        ("plateau ratio", 60, plateau_ratios),
        ("crossover times", 60, crossover_times),
        ("fidelity route agreement", 120, fidelity_routes),
        ("closed-form checks", 1, closed_forms),
        ("Haar moment property", 60, haar_moments),
        ("dephasing exactness", 60, dephasing_exactness),
        ("dissipative rate law", 60, dissipative_rates),
        ("figure orderings", 120, figure_orderings),
        ("determinism", 120, determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panicked: {msg}"))
            });
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        let timing = if in_time { String::new() } else { format!(" (over the {budget} s budget)") };
        println!(
            "criterion {:>2} {}: {} — {} [{:.2} s]{timing}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
