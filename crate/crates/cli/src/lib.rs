//! Figure and headline-number generators behind the `decoherence` binary.
//!
//! Every command maps a [`RunConfig`] to a [`Table`]; [`render`] turns the
//! table into CSV with a metadata header. Parameters are dimensionless:
//! times and lengths are in units of the spin spacing a (or 1/T where the
//! figure axis uses it).

pub mod commands;
pub mod config;
pub mod table;

pub use config::{Overrides, RunConfig};
pub use table::{fmt, render, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] decoherence::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Command {
    /// K(0,t) and K(r₀,t) with their short- and long-time forms.
    FigDecoherence,
    /// Plain K(0,t) against encoded K₀¹(t) at high and low temperature.
    FigKnull,
    /// Plateaus K₀^χ(∞) against Ta for χ = 1, 2, 3.
    #[value(name = "fig-knull-T", alias = "fig-knull-t")]
    FigKnullT,
    /// Independent and symmetrically coupled register fidelities against κ.
    FigFidelityExamples,
    /// Register fidelity for a linearly growing decoherence matrix.
    FigFoft,
    /// Plain and encoded register fidelity at several temperatures.
    FigTemperature,
    /// Two-spin fidelity under dissipative Bloch-Redfield dynamics.
    FigDissipative,
    /// Rate reduction γ₁/γ₀ against p = εa.
    FigReduction,
    /// Asymptotic encoded fidelity and the rate requirements.
    Headline,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::FigDecoherence,
        Command::FigKnull,
        Command::FigKnullT,
        Command::FigFidelityExamples,
        Command::FigFoft,
        Command::FigTemperature,
        Command::FigDissipative,
        Command::FigReduction,
        Command::Headline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::FigDecoherence => "fig-decoherence",
            Command::FigKnull => "fig-knull",
            Command::FigKnullT => "fig-knull-T",
            Command::FigFidelityExamples => "fig-fidelity-examples",
            Command::FigFoft => "fig-foft",
            Command::FigTemperature => "fig-temperature",
            Command::FigDissipative => "fig-dissipative",
            Command::FigReduction => "fig-reduction",
            Command::Headline => "headline",
        }
    }

    pub fn defaults(&self) -> &'static [(&'static str, &'static str)] {
        commands::defaults(*self)
    }
}

/// Runs a command on a resolved config.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    commands::run(cfg)
}
