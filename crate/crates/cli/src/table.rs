//! Numeric tables and their CSV form.

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Free-text annotations written as comment rows.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Twelve significant digits, locale independent.
pub fn fmt(x: f64) -> String {
    // avoid a "-0" that depends on the order of operations
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// CSV with a `#` header carrying the version and resolved config.
pub fn render(table: &Table, cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str(&format!("# {} {}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# command = {}\n", cfg.command.name()));
    for (k, v) in &cfg.params {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    out.push_str(&format!("# seed = {}\n# samples = {}\n", cfg.seed, cfg.samples));
    for note in &table.notes {
        out.push_str(&format!("# note: {note}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| fmt(*x)))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is ASCII"));
    Ok(out)
}
