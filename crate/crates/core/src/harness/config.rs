use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::solver::{
    geometric_times, initial_data, Boundary, Field, FluxSpec, Grid, InitialData, SolverConfig,
    DEFAULT_CFL,
};

/// Experiment configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub flux_k: Vec<u32>,
    pub cells: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub cfl: f64,
    pub t_end: f64,
    /// Empty means the experiment's default schedule.
    pub record_times: Vec<f64>,
    pub boundary: Boundary,
    pub initial: InitialData,
    pub analysis: Analysis,
}

/// Analysis parameters; each experiment reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis {
    pub window: [f64; 2],
    pub record_points: usize,
    /// `(p, q)` pairs for decay fits.
    pub pairs: Vec<[Exponent; 2]>,
    /// Defaults to 0.05 in one dimension and 0.1 otherwise.
    pub slope_tolerance: Option<f64>,
    /// Contraction: `v_0 = u_0 + other + offset`.
    pub other: Option<InitialData>,
    pub offset: f64,
    pub lambda: f64,
    pub mu: f64,
    pub lambdas: Vec<f64>,
    pub check_times: Vec<f64>,
    pub mismatch_tolerance: f64,
    pub spread_tolerance: f64,
    pub p: f64,
    pub b_grid: Vec<f64>,
    pub k_max: usize,
    pub target: f64,
    pub b_limit: f64,
    pub mass: f64,
    pub seed_width: f64,
    pub levels: u32,
    pub times: Vec<f64>,
    pub check_time: f64,
    pub l1_tolerance: f64,
    pub a_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub q_values: Vec<Exponent>,
    pub n_values: Vec<usize>,
    pub entropy_indices: Vec<f64>,
}

impl Default for Analysis {
    fn default() -> Self {
        Self {
            window: [1.0, 100.0],
            record_points: 24,
            pairs: vec![[Exponent::Finite(1.0), Exponent::Infinite]],
            slope_tolerance: None,
            other: None,
            offset: 0.0,
            lambda: 2.0,
            mu: 1.0,
            lambdas: vec![0.5, 1.0, 2.0],
            check_times: vec![0.5, 1.0],
            mismatch_tolerance: 0.05,
            spread_tolerance: 0.1,
            p: 1.0,
            b_grid: (-4..=7).map(|e| 2f64.powi(e)).collect(),
            k_max: 10,
            target: 1e-3,
            b_limit: 100.0,
            mass: 1.0,
            seed_width: 0.02,
            levels: 3,
            times: vec![0.5, 1.0, 2.0],
            check_time: 1.0,
            l1_tolerance: 0.02,
            a_values: vec![0.5, 1.0, 2.0, 4.0],
            p_values: vec![1.0, 2.0, 3.0],
            q_values: vec![
                Exponent::Finite(1.0),
                Exponent::Finite(2.0),
                Exponent::Finite(4.0),
                Exponent::Finite(8.0),
                Exponent::Infinite,
            ],
            n_values: vec![1, 2, 3],
            entropy_indices: Vec::new(),
        }
    }
}

fn bump_1d() -> InitialData {
    InitialData::Bump { center: vec![0.0], radius: vec![1.0], amplitude: 1.0 }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            flux_k: vec![1],
            cells: vec![2400],
            spacing: vec![0.01],
            origin: vec![-2.0],
            cfl: DEFAULT_CFL,
            t_end: 100.0,
            record_times: Vec::new(),
            boundary: Boundary::Outflow,
            initial: bump_1d(),
            analysis: Analysis::default(),
        }
    }
}

/// The experiments of the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Exponents,
    Tensor,
    Solve,
    Decay,
    Contraction,
    Scaling,
    Strichartz,
    Degiorgi,
    Fundamental,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Exponents => "exponents",
            ExperimentKind::Tensor => "tensor",
            ExperimentKind::Solve => "solve",
            ExperimentKind::Decay => "decay",
            ExperimentKind::Contraction => "contraction",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::Strichartz => "strichartz",
            ExperimentKind::Degiorgi => "degiorgi",
            ExperimentKind::Fundamental => "fundamental",
        }
    }
}

impl ExperimentConfig {
    /// Built-in setup used when no configuration file is given.
    pub fn builtin(kind: ExperimentKind) -> Self {
        let base = Self::default();
        match kind {
            ExperimentKind::Exponents => base,
            // radius 0.1: the unit bump viewed at ten times the time scale
            ExperimentKind::Decay => {
                let mut record = vec![0.0];
                record.extend(&geometric_times(0.5, 1.0, 4)[..3]);
                record.extend(geometric_times(1.0, 100.0, 24));
                // closes the Oleinik window exactly
                record.push(50.0);
                record.sort_by(f64::total_cmp);
                Self {
                    cells: vec![9600],
                    spacing: vec![0.000625],
                    origin: vec![-0.4],
                    record_times: record,
                    initial: InitialData::Bump {
                        center: vec![0.0],
                        radius: vec![0.1],
                        amplitude: 1.0,
                    },
                    analysis: Analysis {
                        pairs: vec![
                            [Exponent::Finite(1.0), Exponent::Infinite],
                            [Exponent::Finite(1.0), Exponent::Finite(4.0)],
                        ],
                        ..Analysis::default()
                    },
                    ..base
                }
            }
            ExperimentKind::Tensor => Self { flux_k: vec![1, 2], ..base },
            ExperimentKind::Solve => Self {
                cells: vec![1400],
                t_end: 10.0,
                record_times: (0..=10).map(f64::from).collect(),
                ..base
            },
            ExperimentKind::Contraction => Self {
                cells: vec![400],
                t_end: 2.0,
                boundary: Boundary::Periodic,
                analysis: Analysis {
                    other: Some(InitialData::Random { amplitude: 0.5, seed: 0 }),
                    ..Analysis::default()
                },
                ..base
            },
            ExperimentKind::Scaling => Self {
                flux_k: vec![1, 2],
                cells: vec![256, 256],
                spacing: vec![1.0 / 64.0; 2],
                origin: vec![-1.5, -1.5],
                t_end: 1.0,
                initial: InitialData::Bump {
                    center: vec![0.0, 0.0],
                    radius: vec![1.0, 1.0],
                    amplitude: 1.0,
                },
                ..base
            },
            ExperimentKind::Strichartz => Self { cells: vec![1400], t_end: 50.0, ..base },
            ExperimentKind::Degiorgi => Self {
                cells: vec![1000],
                spacing: vec![0.005],
                t_end: 1.0,
                ..base
            },
            ExperimentKind::Fundamental => Self {
                cells: vec![1024],
                spacing: vec![3.0 / 1024.0],
                origin: vec![-0.5],
                t_end: 2.0,
                initial: InitialData::FundamentalSeed { mass: 1.0, width: 0.02, corner: None },
                ..base
            },
        }
    }

    /// Halves every spacing `levels` times over the same domain.
    pub fn refined(mut self, levels: u32) -> Self {
        let f = (1usize << levels) as f64;
        self.cells.iter_mut().for_each(|c| *c <<= levels);
        self.spacing.iter_mut().for_each(|h| *h /= f);
        self
    }

    /// Replaces the seeds of all random data.
    pub fn with_seed(mut self, seed: u64) -> Self {
        fn reseed(kind: &mut InitialData, seed: u64) {
            match kind {
                InitialData::Random { seed: s, .. } => *s = seed,
                InitialData::ScaledFamily { base, .. } => reseed(base, seed),
                _ => {}
            }
        }
        reseed(&mut self.initial, seed);
        if let Some(other) = &mut self.analysis.other {
            reseed(other, seed);
        }
        self
    }

    pub fn flux(&self) -> Result<FluxSpec> {
        FluxSpec::new(self.flux_k.clone())
    }

    pub fn dim(&self) -> usize {
        self.flux_k.len()
    }

    pub fn grid(&self) -> Result<Grid> {
        let n = self.dim();
        if self.cells.len() != n || self.spacing.len() != n || self.origin.len() != n {
            return Err(Error::Config(format!(
                "flux has {n} axes but cells/spacing/origin have {}/{}/{}",
                self.cells.len(),
                self.spacing.len(),
                self.origin.len()
            )));
        }
        Grid::new(self.cells.clone(), self.spacing.clone(), self.origin.clone())
    }

    pub fn initial_field(&self) -> Result<Field> {
        initial_data(&self.initial, &self.grid()?)
    }

    /// `record_times`, or `default` when none are configured.
    pub fn solver_config(&self, default: impl FnOnce() -> Vec<f64>) -> Result<SolverConfig> {
        let record = if self.record_times.is_empty() { default() } else { self.record_times.clone() };
        SolverConfig::new(self.flux()?, self.cfl, self.t_end, record, self.boundary)
    }

    /// `0` followed by geometric times over the fit window.
    pub fn window_schedule(&self) -> Vec<f64> {
        let [t0, t1] = self.analysis.window;
        let mut times = vec![0.0];
        times.extend(geometric_times(t0, t1, self.analysis.record_points));
        times
    }

    pub fn slope_tolerance(&self) -> f64 {
        self.analysis.slope_tolerance.unwrap_or(if self.dim() == 1 { 0.05 } else { 0.1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_consistent() {
        for kind in [
            ExperimentKind::Solve,
            ExperimentKind::Decay,
            ExperimentKind::Contraction,
            ExperimentKind::Scaling,
            ExperimentKind::Strichartz,
            ExperimentKind::Degiorgi,
            ExperimentKind::Fundamental,
        ] {
            let cfg = ExperimentConfig::builtin(kind);
            cfg.initial_field().unwrap_or_else(|e| panic!("{}: {e}", kind.name()));
            cfg.solver_config(|| vec![0.0, cfg.t_end]).unwrap();
        }
    }

    #[test]
    fn json_round_trip_and_partial_files() {
        let cfg = ExperimentConfig::builtin(ExperimentKind::Scaling);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);

        let partial = r#"{"flux_k":[1],"cells":[100],"spacing":[0.1],"origin":[-5],
            "t_end":2,"initial":{"kind":"box","lower":[0],"upper":[1],"height":1},
            "analysis":{"pairs":[[1,"inf"],[2,4]]}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(partial).unwrap();
        assert_eq!(cfg.cfl, DEFAULT_CFL);
        assert_eq!(cfg.analysis.pairs[1], [Exponent::Finite(2.0), Exponent::Finite(4.0)]);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"typo": 1}"#).is_err());
    }

    #[test]
    fn refinement_and_seed() {
        let cfg = ExperimentConfig::builtin(ExperimentKind::Contraction).refined(2).with_seed(9);
        assert_eq!(cfg.cells, vec![1600]);
        assert_eq!(cfg.spacing, vec![0.0025]);
        assert!(matches!(cfg.analysis.other, Some(InitialData::Random { seed: 9, .. })));
    }
}
