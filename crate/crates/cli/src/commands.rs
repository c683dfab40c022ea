//! One function per figure. Default grids follow the visible axis ranges of
//! the corresponding plots; lengths are in units of a (or r₀), except for
//! the two-spin commands, which use units of 1/T.

use decoherence::encoding::{self, DecoherenceMatrix, RegisterSpec};
use decoherence::fidelity::{self, McConfig};
use decoherence::kernel;
use decoherence::redfield::{self, Model, SpinPairSpec, TwoSpinState};
use decoherence::{BathSpec, Error};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::table::{fmt, Table};
use crate::{CliError, Command};

type Res<T> = Result<T, CliError>;

pub fn defaults(command: Command) -> &'static [(&'static str, &'static str)] {
    match command {
        Command::FigDecoherence => &[
            ("alpha", "1"),
            ("omega_over_t", "1000"),
            ("t_r0", "5"),
            ("tau_max", "20"),
            ("points", "201"),
        ],
        Command::FigKnull => &[
            ("alpha", "1"),
            ("omega_a", "1000"),
            ("ta", "10,0.1"),
            ("tau_min", "0.001"),
            ("tau_max", "100"),
            ("points", "101"),
        ],
        Command::FigKnullT => &[
            ("alpha", "1"),
            ("omega_a", "5000"),
            ("theta_min", "0.01"),
            ("theta_max", "100"),
            ("points", "41"),
        ],
        Command::FigFidelityExamples => &[("n", "100"), ("kappa_max", "0.1"), ("points", "101")],
        Command::FigFoft => &[
            ("n", "125"),
            ("gamma_a", "1e-4"),
            ("tau_min", "130"),
            ("tau_max", "1000"),
            ("points", "88"),
            ("check_n", "12"),
        ],
        Command::FigTemperature => &[
            ("n", "125"),
            ("alpha", "1e-3"),
            ("omega_a", "1000"),
            ("ta", "10,0.2,0.1,0.05"),
            ("tau_min", "0.1"),
            ("tau_max", "10000"),
            ("points", "41"),
        ],
        Command::FigDissipative => &[
            ("alpha", "0.01"),
            ("epsilon_t", "5"),
            ("omega_t", "1000"),
            ("distances_t", "0.1,0.2,0.3"),
            ("symmetric_distance_t", "0.2"),
            ("tau_max", "6"),
            ("points", "601"),
        ],
        Command::FigReduction => &[
            ("p_max", "20"),
            ("points", "201"),
            ("check_p", "0.5,1,2"),
            ("alpha", "0.01"),
            ("epsilon_t", "5"),
            ("omega_t", "1000"),
        ],
        Command::Headline => &[
            ("n", "125"),
            ("gamma_a", "1e-4"),
            ("precision", "0.01"),
            ("q", "1"),
            ("t0_over_a", "1"),
        ],
    }
}

pub fn run(cfg: &RunConfig) -> Res<Table> {
    match cfg.command {
        Command::FigDecoherence => fig_decoherence(cfg),
        Command::FigKnull => fig_knull(cfg),
        Command::FigKnullT => fig_knull_t(cfg),
        Command::FigFidelityExamples => fig_fidelity_examples(cfg),
        Command::FigFoft => fig_foft(cfg),
        Command::FigTemperature => fig_temperature(cfg),
        Command::FigDissipative => fig_dissipative(cfg),
        Command::FigReduction => fig_reduction(cfg),
        Command::Headline => headline(cfg),
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { hi } else { lo + step * i as f64 }).collect()
}

pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    let step = (l1 - l0) / (points - 1) as f64;
    (0..points)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == points => hi,
            _ => (l0 + step * i as f64).exp(),
        })
        .collect()
}

fn bath(alpha: f64, omega_c: f64, temperature: f64) -> Res<BathSpec> {
    BathSpec::ohmic(alpha, omega_c, temperature).map_err(|e| CliError::Config(e.to_string()))
}

fn rows<T: Sync, F>(items: &[T], f: F) -> Res<Vec<Vec<f64>>>
where
    F: Fn(&T) -> Res<Vec<f64>> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// First sign change of `d` from negative to positive, interpolated in ln τ.
fn first_crossing(taus: &[f64], d: &[f64]) -> Option<f64> {
    (1..taus.len()).find(|&i| d[i - 1] <= 0.0 && d[i] > 0.0).map(|i| {
        let (x0, x1) = (taus[i - 1].ln(), taus[i].ln());
        let w = d[i - 1] / (d[i - 1] - d[i]);
        (x0 + w * (x1 - x0)).exp()
    })
}

fn fig_decoherence(cfg: &RunConfig) -> Res<Table> {
    let alpha = cfg.positive("alpha")?;
    let temp = cfg.positive("t_r0")?;
    let omega = cfg.positive("omega_over_t")? * temp;
    let tau_max = cfg.positive("tau_max")?;
    let points = cfg.points("points")?;
    let bath = bath(alpha, omega, temp)?;
    // r₀ = 1
    let taus = linspace(0.0, tau_max, points);
    let mut table = Table::new(&["tau", "k_zero", "k_r0", "k_zero_short", "k_zero_long"]);
    table.rows = rows(&taus, |&t| {
        Ok(vec![
            t,
            kernel::k_zero_exact(t, &bath)?,
            kernel::k_dispatch(1.0, t, &bath)?,
            kernel::k_zero_short_time(t, &bath),
            kernel::k_zero_long_time(t, &bath),
        ])
    })?;
    let last = table.rows.last().expect("points ≥ 2");
    table.note(format!("long-time form relative gap at tau = {}: {}", fmt(last[0]), fmt((last[4] - last[1]) / last[1])));
    Ok(table)
}

fn fig_knull(cfg: &RunConfig) -> Res<Table> {
    let alpha = cfg.positive("alpha")?;
    let omega = cfg.positive("omega_a")?;
    let temps = cfg.positive_list("ta")?;
    let (lo, hi) = cfg.range("tau_min", "tau_max", true)?;
    let points = cfg.points("points")?;
    let baths = temps.iter().map(|&t| bath(alpha, omega, t)).collect::<Res<Vec<_>>>()?;
    let taus = logspace(lo, hi, points);
    let mut table = Table::new(&["ta", "tau", "k_zero", "k1"]);
    for b in &baths {
        table.rows.extend(rows(&taus, |&t| {
            Ok(vec![b.temperature, t, kernel::k_zero_exact(t, b)?, encoding::effective_k(1, 0, t, 1.0, b)?])
        })?);
        let ta = fmt(b.temperature);
        match encoding::crossover_time(1.0, b) {
            Ok(tc) => table.note(format!(
                "ta = {ta}: crossover tau = {}, low-temperature estimate {}",
                fmt(tc),
                fmt(encoding::crossover_estimate_low_t(1.0, b))
            )),
            Err(Error::NoCrossing { .. }) => table.note(format!("ta = {ta}: no crossover found")),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(table)
}

fn fig_knull_t(cfg: &RunConfig) -> Res<Table> {
    let alpha = cfg.positive("alpha")?;
    let omega = cfg.positive("omega_a")?;
    let (lo, hi) = cfg.range("theta_min", "theta_max", true)?;
    let points = cfg.points("points")?;
    let thetas = logspace(lo, hi, points);
    for &theta in &[lo, hi] {
        bath(alpha, omega, theta)?;
    }
    let mut table = Table::new(&["theta", "k1_inf", "k2_inf", "k3_inf", "k1_long_time"]);
    table.rows = rows(&thetas, |&theta| {
        let b = BathSpec::ohmic(alpha, omega, theta)?;
        let t_long = 50.0 * 1f64.max(1.0 / theta);
        Ok(vec![
            theta,
            encoding::plateau(1, 1.0, &b)?,
            encoding::plateau(2, 1.0, &b)?,
            encoding::plateau(3, 1.0, &b)?,
            encoding::effective_k(1, 0, t_long, 1.0, &b)?,
        ])
    })?;
    let (first, last) = (table.rows[0].clone(), table.rows.last().expect("points ≥ 2").clone());
    table.note(format!(
        "theta = {}: k2/k1 = {}, k3/k1 = {}",
        fmt(last[0]),
        fmt(last[2] / last[1]),
        fmt(last[3] / last[1])
    ));
    table.note(format!(
        "theta = {}: k1 = {}, zero-temperature limit 2 alpha ln(omega a / e) = {}",
        fmt(first[0]),
        fmt(first[1]),
        fmt(2.0 * alpha * (omega.ln() - 1.0))
    ));
    Ok(table)
}

fn diagonal(n: usize, kappa: f64) -> Res<DecoherenceMatrix> {
    let mut row = vec![0.0; n];
    row[0] = kappa;
    Ok(DecoherenceMatrix::from_toeplitz(&row, 0.0)?)
}

fn fig_fidelity_examples(cfg: &RunConfig) -> Res<Table> {
    let n = cfg.count("n")?;
    let kappa_max = cfg.positive("kappa_max")?;
    let points = cfg.points("points")?;
    let kappas = linspace(0.0, kappa_max, points);
    let mut table = Table::new(&["kappa", "f_indep_exact", "f_indep_wc", "ratio", "f_symmetric"]);
    table.rows = rows(&kappas, |&kappa| {
        let exact = fidelity::fidelity_independent(n, kappa).value;
        let wc = fidelity::fidelity_weak_coupling(&diagonal(n, kappa)?)?.value;
        Ok(vec![kappa, exact, wc, wc / exact, fidelity::fidelity_symmetric(n, kappa).value])
    })?;
    let kappa = 5.0 / n as f64;
    table.note(format!(
        "n kappa = 5: f_symmetric = {}, 1/sqrt(6) = {}",
        fmt(fidelity::fidelity_symmetric(n, kappa).value),
        fmt(1.0 / 6f64.sqrt())
    ));
    Ok(table)
}

/// K_l = γ(τ − l/2), clipped at zero.
pub fn linear_k(n: usize, gamma: f64, tau: f64) -> Res<DecoherenceMatrix> {
    let row: Vec<f64> = (0..n).map(|l| (gamma * (tau - 0.5 * l as f64)).max(0.0)).collect();
    Ok(DecoherenceMatrix::from_toeplitz(&row, tau)?)
}

fn fig_foft(cfg: &RunConfig) -> Res<Table> {
    let n = cfg.count("n")?;
    let gamma = cfg.positive("gamma_a")?;
    let (lo, hi) = cfg.range("tau_min", "tau_max", true)?;
    let points = cfg.points("points")?;
    let check_n = cfg.count("check_n")?;
    if check_n > fidelity::MAX_EXACT_N {
        return Err(CliError::Config(format!("check_n must not exceed {}", fidelity::MAX_EXACT_N)));
    }
    let taus = logspace(lo, hi, points);
    let mut table = Table::new(&["tau", "f0", "f_i", "f_s"]);
    table.rows = rows(&taus, |&tau| {
        let kappa = gamma * tau;
        Ok(vec![
            tau,
            fidelity::fidelity_weak_coupling(&linear_k(n, gamma, tau)?)?.value,
            fidelity::fidelity_independent(n, kappa).value,
            fidelity::fidelity_symmetric_large_n(n, kappa).value,
        ])
    })?;
    let k = linear_k(check_n, gamma, lo)?;
    let mc = fidelity::fidelity_mc(&k, &McConfig { samples: cfg.samples, seed: cfg.seed, ..Default::default() })?;
    table.note(format!(
        "n = {check_n} sub-register at tau = {}: weak coupling {}, exact sum {}, monte carlo {} +- {}",
        fmt(lo),
        fmt(fidelity::fidelity_weak_coupling(&k)?.value),
        fmt(fidelity::fidelity_exact_sum(&k)?.value),
        fmt(mc.value),
        fmt(mc.std_error)
    ));
    Ok(table)
}

fn fig_temperature(cfg: &RunConfig) -> Res<Table> {
    let n = cfg.count("n")?;
    let alpha = cfg.positive("alpha")?;
    let omega = cfg.positive("omega_a")?;
    let temps = cfg.positive_list("ta")?;
    let (lo, hi) = cfg.range("tau_min", "tau_max", true)?;
    let points = cfg.points("points")?;
    let baths = temps.iter().map(|&t| bath(alpha, omega, t)).collect::<Res<Vec<_>>>()?;
    let plain = RegisterSpec::new(n, 1.0, 0)?;
    let encoded = RegisterSpec::new(n, 1.0, 1)?;
    let taus = logspace(lo, hi, points);
    let mut table = Table::new(&["ta", "tau", "f0", "f1"]);
    for b in &baths {
        let block = rows(&taus, |&tau| {
            let f0 = fidelity::fidelity_weak_coupling(&encoding::decoherence_matrix(&plain, b, tau)?)?;
            let f1 = fidelity::fidelity_weak_coupling(&encoding::decoherence_matrix(&encoded, b, tau)?)?;
            Ok(vec![b.temperature, tau, f0.value, f1.value])
        })?;
        let diff: Vec<f64> = block.iter().map(|r| r[3] - r[2]).collect();
        let ta = fmt(b.temperature);
        match first_crossing(&taus, &diff) {
            Some(tc) => table.note(format!("ta = {ta}: f1 overtakes f0 at tau = {}", fmt(tc))),
            None => table.note(format!("ta = {ta}: f1 does not overtake f0 on the grid")),
        }
        let k1 = encoding::k1_asymptote(1.0, b)?;
        table.note(format!(
            "ta = {ta}: k1_inf = {}, plateau ((1 + exp(-k1_inf))/2)^n = {}, f1 at tau = {}: {}",
            fmt(k1),
            fmt(fidelity::fidelity_encoded_asymptote(n, k1).value),
            fmt(hi),
            fmt(block.last().expect("points ≥ 2")[3])
        ));
        table.rows.extend(block);
    }
    Ok(table)
}

/// ⟨ψ|ρ|ψ⟩ for a pure initial state ρ₀ = |ψ⟩⟨ψ|, as tr(ρ₀ρ).
fn return_probability(rho0: &TwoSpinState, states: &[TwoSpinState]) -> Vec<f64> {
    states.iter().map(|s| (rho0.rho() * s.rho()).trace().re).collect()
}

fn fig_dissipative(cfg: &RunConfig) -> Res<Table> {
    let alpha = cfg.positive("alpha")?;
    let epsilon = cfg.positive("epsilon_t")?;
    let omega = cfg.positive("omega_t")?;
    let distances = cfg.positive_list("distances_t")?;
    let sym_distance = cfg.positive("symmetric_distance_t")?;
    let tau_max = cfg.positive("tau_max")?;
    let points = cfg.points("points")?;
    let b = bath(alpha, omega, 1.0)?;
    let taus = linspace(0.0, tau_max, points);

    let mut runs: Vec<(f64, TwoSpinState)> = distances.iter().map(|&a| (a, TwoSpinState::singlet())).collect();
    runs.push((sym_distance, TwoSpinState::symmetric()));
    let curves = runs
        .par_iter()
        .map(|(a, rho0)| {
            let spec = SpinPairSpec::new(epsilon, *a, b)?;
            let states = redfield::evolve(rho0, &taus, &spec, Model::Dissipative)?;
            Ok(return_probability(rho0, &states))
        })
        .collect::<Res<Vec<Vec<f64>>>>()?;

    let mut columns = vec!["tau".to_string()];
    columns.extend(distances.iter().map(|a| format!("f_a{a}")));
    columns.push("f_symmetric".into());
    let mut table = Table { columns, ..Default::default() };
    for (i, &tau) in taus.iter().enumerate() {
        let mut row = vec![tau];
        row.extend(curves.iter().map(|c| c[i]));
        table.push(row);
    }
    for (a, curve) in distances.iter().zip(&curves) {
        let spec = SpinPairSpec::new(epsilon, *a, b)?;
        let (_, gamma1) = redfield::asymptotic_rate(&spec);
        match redfield::fit_asymptotic_rate(&taus, curve, *a) {
            Ok(fit) => table.note(format!(
                "a = {}: fitted rate {}, gamma1 {}, relative deviation {}",
                fmt(*a),
                fmt(fit.rate),
                fmt(gamma1),
                fmt(fit.rate / gamma1 - 1.0)
            )),
            Err(e) => table.note(format!("a = {}: no asymptotic fit ({e})", fmt(*a))),
        }
    }
    Ok(table)
}

/// Asymptotic rate of the antisymmetric state from a trajectory on [0, 20a].
pub fn ode_rate(p: f64, epsilon: f64, b: BathSpec) -> Res<(f64, f64)> {
    let a = p / epsilon;
    let spec = SpinPairSpec::new(epsilon, a, b)?;
    let grid = linspace(0.0, redfield::FIT_WINDOW.1 * a, 401);
    let states = redfield::evolve(&TwoSpinState::singlet(), &grid, &spec, Model::Dissipative)?;
    let fit = redfield::fit_asymptotic_rate(&grid, &redfield::subspace_fidelity(&states), a)?;
    Ok((fit.rate, redfield::asymptotic_rate(&spec).0))
}

fn fig_reduction(cfg: &RunConfig) -> Res<Table> {
    let p_max = cfg.positive("p_max")?;
    let points = cfg.points("points")?;
    let checks = cfg.positive_list("check_p")?;
    let alpha = cfg.positive("alpha")?;
    let epsilon = cfg.positive("epsilon_t")?;
    let omega = cfg.positive("omega_t")?;
    let b = bath(alpha, omega, 1.0)?;
    let mut table = Table::new(&["p", "ratio"]);
    for p in linspace(0.0, p_max, points) {
        table.push(vec![p, redfield::rate_reduction(p)]);
    }
    let fits = checks.par_iter().map(|&p| ode_rate(p, epsilon, b)).collect::<Res<Vec<_>>>()?;
    for (p, (rate, gamma0)) in checks.iter().zip(fits) {
        table.note(format!(
            "p = {}: trajectory ratio {}, closed form {}",
            fmt(*p),
            fmt(rate / gamma0),
            fmt(redfield::rate_reduction(*p))
        ));
    }
    Ok(table)
}

fn headline(cfg: &RunConfig) -> Res<Table> {
    let n = cfg.count("n")?;
    let gamma_a = cfg.positive("gamma_a")?;
    let precision = cfg.positive("precision")?;
    let q = cfg.non_negative("q")?;
    let t0 = cfg.positive("t0_over_a")?;
    let f1 = fidelity::fidelity_encoded_asymptote(n, gamma_a).value;
    let nf = n as f64;
    let gamma0 = 2.0 * precision * nf.powf(-(1.0 + q)) / t0;
    let gamma1 = 2.0 * precision / nf;
    let mut table = Table::new(&["n", "gamma_a", "f1_inf", "one_minus_f1", "gamma0_a", "gamma1_a", "gamma1_over_gamma0"]);
    table.push(vec![nf, gamma_a, f1, 1.0 - f1, gamma0, gamma1, gamma1 / gamma0]);
    table.note("gamma0_a and gamma1_a are the largest plain and encoded rates (times a) keeping 1 - F below the precision");
    Ok(table)
}
