//! Experiment orchestration: configuration files, audits and report emission.
//!
//! Every experiment returns an [`ExperimentReport`] that lists its checks,
//! the theoretical exponents it is compared against, and CSV tables.

mod config;
mod experiments;
mod fit;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{Analysis, ExperimentConfig, ExperimentKind};
pub use experiments::*;
pub use fit::{fit_decay, PowerFit, MIN_FIT_SAMPLES};

use crate::error::Result;
use crate::exponents::{kappa_nu, monomial_exponents, p_star, Exponent};
use crate::io::write_text;

/// One audited inequality or flag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub limit: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), pass: measured <= limit, measured, limit }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self { name: name.into(), pass: measured >= limit, measured, limit }
    }

    pub fn flag(name: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            measured: if pass { 1.0 } else { 0.0 },
            limit: 1.0,
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Theoretical exponents for a flux and a pair `(p, q)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theory {
    pub p: Exponent,
    pub q: Exponent,
    pub k: Vec<u32>,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub nu: f64,
    pub p_star: Exponent,
    pub big_q: f64,
    pub theta: f64,
    pub admissible: bool,
}

impl Theory {
    pub fn new(p: Exponent, q: Exponent, k: &[u32]) -> Result<Self> {
        let m = monomial_exponents(p, q, k)?;
        let n = k.len();
        let (kappa, nu) = kappa_nu(n + 1)?;
        Ok(Self {
            p,
            q,
            k: k.to_vec(),
            alpha: m.alpha,
            beta: m.beta,
            kappa,
            nu,
            p_star: p_star(p, n),
            big_q: m.big_q,
            theta: m.theta,
            admissible: m.admissible,
        })
    }
}

/// A named CSV table emitted alongside the JSON verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub pass: bool,
    pub theory: Vec<Theory>,
    pub checks: Vec<Check>,
    pub results: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(
        kind: ExperimentKind,
        theory: Vec<Theory>,
        checks: Vec<Check>,
        results: &impl Serialize,
        tables: Vec<Table>,
    ) -> Result<Self> {
        Ok(Self {
            experiment: kind.name().to_string(),
            pass: all_pass(&checks),
            theory,
            checks,
            results: serde_json::to_value(results)?,
            tables,
        })
    }

    /// Writes `<name>.json` and `<name>_<table>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let json = dir.join(format!("{}.json", self.experiment));
        write_text(&json, &serde_json::to_string_pretty(self)?)?;
        let mut paths = vec![json];
        for table in &self.tables {
            let path = dir.join(format!("{}_{}.csv", self.experiment, table.name));
            write_text(&path, &table.csv)?;
            paths.push(path);
        }
        Ok(paths)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{} {}: {} (measured {:.6e}, limit {:.6e})\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    self.experiment,
                    c.name,
                    c.measured,
                    c.limit
                )
            })
            .collect()
    }
}

/// Options that affect output rather than numerics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub snapshots: bool,
}

pub fn run_experiment(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    options: RunOptions,
) -> Result<ExperimentReport> {
    match kind {
        ExperimentKind::Exponents => run_exponents(cfg)?.into_report(cfg),
        ExperimentKind::Tensor => run_tensor(cfg)?.into_report(cfg),
        ExperimentKind::Solve => run_solve(cfg, options.snapshots)?.into_report(cfg),
        ExperimentKind::Decay => run_decay(cfg, options.snapshots)?.into_report(cfg),
        ExperimentKind::Contraction => run_contraction(cfg)?.into_report(cfg),
        ExperimentKind::Scaling => run_scaling(cfg)?.into_report(cfg),
        ExperimentKind::Strichartz => run_strichartz(cfg)?.into_report(cfg),
        ExperimentKind::Degiorgi => run_degiorgi(cfg)?.into_report(cfg),
        ExperimentKind::Fundamental => run_fundamental(cfg)?.into_report(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theory_for_one_dimensional_burgers() {
        let t = Theory::new(1.0.into(), Exponent::Infinite, &[1]).unwrap();
        assert!((t.alpha - 0.5).abs() < 1e-15 && (t.beta - 0.5).abs() < 1e-15);
        assert_eq!(t.kappa, 0.5);
        assert_eq!(t.p_star, Exponent::Finite(4.0));
    }

    #[test]
    fn checks_reject_nan() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Check::at_least("x", f64::NAN, 1.0).pass);
    }
}
