use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use super::fit::{fit_decay, PowerFit};
use super::{Check, ExperimentReport, Table, Theory};
use crate::error::{Error, Result};
use crate::exponents::{
    burgers_exponents, gronwall_params, identity_residuals, kappa_nu, p_star, Exponent,
};
use crate::io::{field_to_csv, fmt_num, report_to_csv};
use crate::observables::{
    degiorgi_trace, fundamental_field, is_nonincreasing, l1_distance, lp_norm, power_integral,
    strichartz_integral, total_variation, tv_and_oleinik, DeGiorgiTrace, LevelSetRun, Observers,
    RunReport,
};
use crate::solver::{
    initial_data, scaling_factors, solve, solve_lockstep, solve_sign_split, solve_with, Boundary,
    Field, InitialData, SolverConfig,
};
use crate::tensors::{hilbert_like_det, monomial_tensor};

/// Slack of the maximum principle and comparison audits.
pub const ORDER_SLACK: f64 = 1e-13;
/// Relative slack of the contraction and conservation audits.
pub const CONSERVATION_SLACK: f64 = 1e-12;
/// Relative slack of norm monotonicity.
pub const NORM_SLACK: f64 = 1e-10;

fn csv_table(name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Table {
    let mut csv = header.join(",");
    csv.push('\n');
    for row in rows {
        csv.push_str(&row.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    Table { name: name.to_string(), csv }
}

fn snapshot_tables(report: &RunReport) -> Vec<Table> {
    report
        .times
        .iter()
        .zip(&report.snapshots)
        .enumerate()
        .map(|(i, (&t, f))| Table { name: format!("snapshot_{i:03}"), csv: field_to_csv(f, t) })
        .collect()
}

fn max_principle(u0: &Field, fields: &[&Field]) -> Check {
    let (lo, hi) = (u0.min(), u0.max());
    let excess = fields
        .iter()
        .map(|f| (lo - f.min()).max(f.max() - hi))
        .fold(0.0_f64, f64::max);
    Check::at_most("maximum principle excess", excess, ORDER_SLACK)
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / lo
}

fn default_theory(cfg: &ExperimentConfig) -> Result<Vec<Theory>> {
    Ok(vec![Theory::new(Exponent::new(cfg.analysis.p)?, Exponent::Infinite, &cfg.flux_k)?])
}

fn is_burgers_1d(cfg: &ExperimentConfig) -> bool {
    cfg.flux_k == [1]
}

// ---------------------------------------------------------------- exponents

#[derive(Clone, Debug, Serialize)]
pub struct ExponentRow {
    pub p: Exponent,
    pub q: Exponent,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub p_star: Exponent,
    pub kappa: f64,
    pub nu: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentTable {
    pub rows: Vec<ExponentRow>,
    pub max_identity_residual: f64,
    pub checks: Vec<Check>,
}

/// Exponent table over the configured `p`, `q` and `n` values.
pub fn run_exponents(cfg: &ExperimentConfig) -> Result<ExponentTable> {
    let a = &cfg.analysis;
    let mut rows = Vec::new();
    let mut range_ok = true;
    let mut linkage = 0.0_f64;
    let mut residual = 0.0_f64;
    let mut all: Vec<Exponent> =
        a.p_values.iter().map(|&p| Exponent::new(p)).collect::<Result<Vec<_>>>()?;
    all.extend(a.q_values.iter().copied());
    all.sort_by(|x, y| y.recip().total_cmp(&x.recip()));
    all.dedup();
    for &n in &a.n_values {
        let (kappa, nu) = kappa_nu(n + 1)?;
        let one = burgers_exponents(Exponent::Finite(1.0), Exponent::Infinite, n)?;
        linkage = linkage.max((kappa - one.beta).abs()).max((1.0 - nu - one.alpha).abs());
        for &p in &a.p_values {
            let p = Exponent::new(p)?;
            for &q in &a.q_values {
                if q.recip() > p.recip() {
                    continue;
                }
                let e = burgers_exponents(p, q, n)?;
                range_ok &= e.alpha > 0.0 && e.alpha <= 1.0 && e.beta >= 0.0;
                if p == q {
                    range_ok &= e.alpha == 1.0 && e.beta == 0.0;
                }
                rows.push(ExponentRow {
                    p,
                    q,
                    n,
                    alpha: e.alpha,
                    beta: e.beta,
                    p_star: e.p_star,
                    kappa,
                    nu,
                });
            }
        }
        for (i, &p) in all.iter().enumerate() {
            for (j, &q) in all.iter().enumerate().skip(i + 1) {
                for &r in all.iter().skip(j + 1) {
                    residual = residual.max(identity_residuals(p, q, r, n)?.max());
                }
            }
        }
    }
    let checks = vec![
        Check::flag("alpha in (0,1], beta >= 0, alpha(p,p)=1", range_ok),
        Check::at_most("kappa, nu linkage to (1, inf) exponents", linkage, 1e-15),
        Check::at_most("interpolation and composition identities", residual, 1e-12),
    ];
    Ok(ExponentTable { rows, max_identity_residual: residual, checks })
}

impl ExponentTable {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let mut csv = String::from("p,q,n,alpha,beta,p_star,kappa,nu\n");
        for r in &self.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.p,
                r.q,
                r.n,
                fmt_num(r.alpha),
                fmt_num(r.beta),
                r.p_star,
                fmt_num(r.kappa),
                fmt_num(r.nu)
            ));
        }
        let table = Table { name: "table".into(), csv };
        ExperimentReport::new(
            ExperimentKind::Exponents,
            default_theory(cfg)?,
            self.checks.clone(),
            &self,
            vec![table],
        )
    }
}

// ---------------------------------------------------------------- tensor

#[derive(Clone, Debug, Serialize)]
pub struct TensorRow {
    pub a: f64,
    pub p: f64,
    pub det: f64,
    /// `det / a^N`.
    pub scaled_det: f64,
    /// `Δ(p, k)`, equal to `H_{d,p}` for the Burgers flux.
    pub det_constant: f64,
    pub hilbert_det: Option<f64>,
    pub spd: bool,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorTable {
    pub k: Vec<u32>,
    pub rows: Vec<TensorRow>,
    pub checks: Vec<Check>,
}

pub fn run_tensor(cfg: &ExperimentConfig) -> Result<TensorTable> {
    let k = cfg.flux()?.exponents().to_vec();
    let burgers = cfg.flux()?.is_burgers();
    let d = k.len() + 1;
    let mut rows = Vec::new();
    let mut law = 0.0_f64;
    let mut spd = true;
    for &p in &cfg.analysis.p_values {
        for &a in &cfg.analysis.a_values {
            let t = monomial_tensor(a, p, &k)?;
            let scaled = t.det / a.powf(t.det_power);
            if a > 0.0 {
                law = law.max(relative(t.det, t.scaled_det()));
                spd &= t.spd;
            }
            let hilbert = if burgers { Some(hilbert_like_det(d, p)?) } else { None };
            if let Some(h) = hilbert {
                law = law.max(relative(t.det_constant, h));
            }
            rows.push(TensorRow {
                a,
                p,
                det: t.det,
                scaled_det: scaled,
                det_constant: t.det_constant,
                hilbert_det: hilbert,
                spd: t.spd,
                entries: t.entries,
            });
        }
    }
    let checks = vec![
        Check::at_most("determinant scaling law", law, 1e-8),
        Check::flag("positive definite for a > 0", spd),
    ];
    Ok(TensorTable { k, rows, checks })
}

impl TensorTable {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let d = self.k.len() + 1;
        let mut header = vec!["a".to_string(), "p".into(), "det".into(), "scaled_det".into()];
        header.extend(["det_constant".into(), "hilbert_det".into(), "spd".into()]);
        for i in 0..d {
            for j in 0..d {
                header.push(format!("m_{i}{j}"));
            }
        }
        let mut csv = header.join(",");
        csv.push('\n');
        for r in &self.rows {
            let mut row = vec![fmt_num(r.a), fmt_num(r.p), fmt_num(r.det), fmt_num(r.scaled_det)];
            row.push(fmt_num(r.det_constant));
            row.push(r.hilbert_det.map_or_else(|| "nan".into(), fmt_num));
            row.push(u8::from(r.spd).to_string());
            row.extend(r.entries.iter().flatten().map(|&x| fmt_num(x)));
            csv.push_str(&row.join(","));
            csv.push('\n');
        }
        let table = Table { name: "table".into(), csv };
        ExperimentReport::new(
            ExperimentKind::Tensor,
            default_theory(cfg)?,
            self.checks.clone(),
            &self,
            vec![table],
        )
    }
}

// ---------------------------------------------------------------- solve

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    pub times: Vec<f64>,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub boundary_contact: Option<f64>,
    pub sign_bracketed: Option<bool>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub report: RunReport,
}

/// Plain solve recording the default observables.
pub fn run_solve(cfg: &ExperimentConfig, keep_snapshots: bool) -> Result<SolveOutcome> {
    let u0 = cfg.initial_field()?;
    let solver = cfg.solver_config(|| vec![0.0, cfg.t_end])?;
    let observers = Observers {
        entropy_indices: cfg.analysis.entropy_indices.clone(),
        keep_snapshots: true,
        ..Observers::default()
    };
    let mut report = solve(&u0, &solver, &observers)?;
    let mut checks = vec![
        max_principle(&u0, &report.snapshots.iter().collect::<Vec<_>>()),
        Check::flag("norms nonincreasing", report.norms_nonincreasing(NORM_SLACK)),
    ];
    if cfg.boundary == Boundary::Periodic {
        checks.push(Check::at_most(
            "periodic mass drift",
            relative(report.final_field.mass(), u0.mass()),
            CONSERVATION_SLACK,
        ));
    }
    let sign_bracketed = if u0.min() < 0.0 && u0.max() > 0.0 {
        let split = solve_sign_split(&u0, &solver)?;
        checks.push(Check::flag("sign split brackets the solution", split.bracketed));
        Some(split.bracketed)
    } else {
        None
    };
    if !keep_snapshots {
        report.snapshots.clear();
    }
    Ok(SolveOutcome {
        times: report.times.clone(),
        initial_mass: u0.mass(),
        final_mass: report.final_field.mass(),
        boundary_contact: report.boundary_contact,
        sign_bracketed,
        checks,
        report,
    })
}

impl SolveOutcome {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let mut tables = vec![Table { name: "series".into(), csv: report_to_csv(&self.report) }];
        tables.push(Table {
            name: "final".into(),
            csv: field_to_csv(&self.report.final_field, self.report.final_time),
        });
        tables.extend(snapshot_tables(&self.report));
        ExperimentReport::new(ExperimentKind::Solve, default_theory(cfg)?, self.checks.clone(), &self, tables)
    }
}

// ---------------------------------------------------------------- decay

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeMode {
    /// `|slope + β| ≤ tol`: the data sit in the self-similar regime.
    Equality,
    /// `slope ≤ −β + tol`: the estimate is only an upper bound.
    UpperBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayAudit {
    pub p: Exponent,
    pub q: Exponent,
    pub fit: PowerFit,
    pub theory_alpha: f64,
    pub theory_beta: f64,
    pub mode: SlopeMode,
    /// `max_t ‖u(t)‖_q t^β / ‖u_0‖_p^α` over the fit window.
    pub empirical_constant: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OleinikSample {
    pub t: f64,
    pub max_slope: f64,
    /// `TV(u²/2)`.
    pub tv_energy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayOutcome {
    pub degenerate: bool,
    pub audits: Vec<DecayAudit>,
    pub oleinik: Vec<OleinikSample>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub report: RunReport,
}

/// Time range of the one-dimensional Oleinik and total-variation audits.
pub const OLEINIK_WINDOW: (f64, f64) = (0.5, 50.0);

/// Decay fits for each `(p, q)` pair, the bound audit, and for 1-D Burgers
/// the `L^∞`, Oleinik and total-variation bounds.
pub fn run_decay(cfg: &ExperimentConfig, keep_snapshots: bool) -> Result<DecayOutcome> {
    let a = &cfg.analysis;
    let u0 = cfg.initial_field()?;
    let solver = cfg.solver_config(|| cfg.window_schedule())?;
    let mut norms = vec![Exponent::Finite(1.0), Exponent::Infinite];
    for &[p, q] in &a.pairs {
        for e in [p, q] {
            if !norms.contains(&e) {
                norms.push(e);
            }
        }
    }
    let observers = Observers {
        norms,
        entropy_indices: a.entropy_indices.clone(),
        keep_snapshots,
        ..Observers::default()
    };
    let burgers_1d = is_burgers_1d(cfg);
    let mut oleinik = Vec::new();
    let report = solve_with(&u0, &solver, &observers, |t, field| {
        if burgers_1d && t > 0.0 {
            let (_, max_slope) = tv_and_oleinik(field)?;
            let energy: Vec<f64> = field.values().iter().map(|u| 0.5 * u * u).collect();
            oleinik.push(OleinikSample { t, max_slope, tv_energy: total_variation(&energy) });
        }
        Ok(())
    })?;

    let mut checks = vec![
        Check::flag("norms nonincreasing", report.norms_nonincreasing(NORM_SLACK)),
        Check::flag("support clear of the boundary", report.boundary_contact.is_none()),
    ];
    if u0.max_abs() == 0.0 {
        let zero = report.norms.iter().all(|s| s.values.iter().all(|&v| v == 0.0));
        checks.push(Check::flag("degenerate input: all norms vanish", zero));
        return Ok(DecayOutcome { degenerate: true, audits: Vec::new(), oleinik, checks, report });
    }

    let nonnegative = u0.min() >= 0.0;
    let window = (a.window[0], a.window[1]);
    let tol = cfg.slope_tolerance();
    let mut audits = Vec::new();
    for &[p, q] in &a.pairs {
        let theory = Theory::new(p, q, &cfg.flux_k)?;
        let norm0 = lp_norm(&u0, p)?;
        let series = report.norm_series(q).expect("requested norm");
        let fit = fit_decay(&report.times, series, window)?;
        let empirical_constant = report
            .times
            .iter()
            .zip(series)
            .filter(|(&t, _)| t >= window.0 && t <= window.1)
            .map(|(&t, &v)| v * t.powf(theory.beta) / norm0.powf(theory.alpha))
            .fold(0.0, f64::max);
        let mode = if burgers_1d && p == Exponent::Finite(1.0) && nonnegative {
            SlopeMode::Equality
        } else {
            SlopeMode::UpperBound
        };
        let label = format!("decay slope p={p} q={q}");
        checks.push(match mode {
            SlopeMode::Equality => Check::at_most(
                format!("{label}: |slope + beta|"),
                (fit.slope + theory.beta).abs(),
                tol,
            ),
            SlopeMode::UpperBound => {
                Check::at_most(format!("{label}: slope + beta"), fit.slope + theory.beta, tol)
            }
        });
        checks.push(Check::flag(
            format!("empirical constant finite p={p} q={q}"),
            empirical_constant.is_finite() && empirical_constant > 0.0,
        ));
        audits.push(DecayAudit {
            p,
            q,
            fit,
            theory_alpha: theory.alpha,
            theory_beta: theory.beta,
            mode,
            empirical_constant,
        });
    }

    if burgers_1d && nonnegative {
        let mass = lp_norm(&u0, Exponent::Finite(1.0))?;
        let h = cfg.spacing[0];
        let sup = report.norm_series(Exponent::Infinite).expect("sup norm recorded");
        let worst = report
            .times
            .iter()
            .zip(sup)
            .filter(|(&t, _)| t >= h)
            .map(|(&t, &v)| v / (2.0 * (2.0 * mass / t).sqrt()))
            .fold(0.0, f64::max);
        checks.push(Check::at_most("sup bound 2 sqrt(2 |u0|_1 / t), ratio", worst, 1.05));
    }
    if burgers_1d {
        let mass = lp_norm(&u0, Exponent::Finite(1.0))?;
        let inside: Vec<&OleinikSample> = oleinik
            .iter()
            .filter(|s| s.t >= OLEINIK_WINDOW.0 && s.t <= OLEINIK_WINDOW.1)
            .collect();
        if !inside.is_empty() {
            let slope = inside.iter().map(|s| s.max_slope * s.t).fold(f64::NEG_INFINITY, f64::max);
            let tv = inside
                .iter()
                .map(|s| s.tv_energy * s.t / (2.0 * mass))
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::at_most("Oleinik: t max forward slope", slope, 1.1));
            checks.push(Check::at_most("TV(u^2/2) t / (2 |u0|_1)", tv, 1.1));
        }
    }
    Ok(DecayOutcome { degenerate: false, audits, oleinik, checks, report })
}

impl DecayOutcome {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let theory = cfg
            .analysis
            .pairs
            .iter()
            .map(|&[p, q]| Theory::new(p, q, &cfg.flux_k))
            .collect::<Result<Vec<_>>>()?;
        let mut tables = vec![Table { name: "series".into(), csv: report_to_csv(&self.report) }];
        tables.extend(snapshot_tables(&self.report));
        ExperimentReport::new(ExperimentKind::Decay, theory, self.checks.clone(), &self, tables)
    }
}

// ---------------------------------------------------------------- contraction

#[derive(Clone, Debug, Serialize)]
pub struct ContractionOutcome {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub ordered: bool,
    pub identical: bool,
    pub checks: Vec<Check>,
}

/// Paired runs from `u_0` and `v_0 = u_0 + other + offset` with a common time step.
pub fn run_contraction(cfg: &ExperimentConfig) -> Result<ContractionOutcome> {
    let a = &cfg.analysis;
    let u0 = cfg.initial_field()?;
    let grid = u0.grid().clone();
    let mut v0 = u0.map(|x| x + a.offset);
    if let Some(other) = &a.other {
        let w = initial_data(other, &grid)?;
        v0.values_mut().iter_mut().zip(w.values()).for_each(|(v, w)| *v += w);
    }
    let solver = cfg.solver_config(|| (0..=16).map(|i| cfg.t_end * i as f64 / 16.0).collect())?;
    let snaps = solve_lockstep(&[u0.clone(), v0.clone()], &solver)?;
    let distances = snaps[0]
        .iter()
        .zip(&snaps[1])
        .map(|(u, v)| l1_distance(u, v))
        .collect::<Result<Vec<_>>>()?;
    let d0 = l1_distance(&u0, &v0)?;
    let ordered = u0.values().iter().zip(v0.values()).all(|(u, v)| u <= v);
    let identical = u0 == v0;

    let mut checks = vec![
        Check::flag(
            "L1 distance nonincreasing",
            is_nonincreasing(&distances, CONSERVATION_SLACK),
        ),
        Check::at_most(
            "L1 distance over initial distance",
            distances.iter().copied().fold(0.0, f64::max),
            d0 * (1.0 + CONSERVATION_SLACK),
        ),
        Check::flag(
            "maximum principle",
            snaps[0].iter().all(|f| max_principle(&u0, &[f]).pass)
                && snaps[1].iter().all(|f| max_principle(&v0, &[f]).pass),
        ),
    ];
    if ordered {
        let excess = snaps[0]
            .iter()
            .zip(&snaps[1])
            .flat_map(|(u, v)| u.values().iter().zip(v.values()).map(|(a, b)| a - b))
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_most("comparison: max(u - v)", excess, ORDER_SLACK));
    }
    if identical {
        checks.push(Check::at_most(
            "identical data stay identical",
            distances.iter().copied().fold(0.0, f64::max),
            0.0,
        ));
    }
    if cfg.boundary == Boundary::Periodic {
        let drift = snaps
            .iter()
            .flat_map(|run| run.iter().map(move |f| relative(f.mass(), run[0].mass())))
            .fold(0.0, f64::max);
        checks.push(Check::at_most("periodic mass drift", drift, CONSERVATION_SLACK));
    }
    Ok(ContractionOutcome { times: solver.record_times, distances, ordered, identical, checks })
}

impl ContractionOutcome {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let table = csv_table(
            "distance",
            &["t", "l1_distance"],
            self.times.iter().zip(&self.distances).map(|(&t, &d)| vec![t, d]),
        );
        ExperimentReport::new(
            ExperimentKind::Contraction,
            default_theory(cfg)?,
            self.checks.clone(),
            &self,
            vec![table],
        )
    }
}

// ---------------------------------------------------------------- scaling

#[derive(Clone, Debug, Serialize)]
pub struct IdentityAudit {
    pub q: f64,
    pub measured: f64,
    pub expected: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingOutcome {
    pub lambda: f64,
    pub mu: f64,
    pub times: Vec<f64>,
    /// `‖v(t) − λ^{-1} u(μt)‖_1 / ‖v(t)‖_1` on the companion grid.
    pub mismatch: Vec<f64>,
    pub data_identities: Vec<IdentityAudit>,
    /// Same ratios for `∫ v(t)^q` against `∫ u(μt)^q`.
    pub slice_identities: Vec<IdentityAudit>,
    pub checks: Vec<Check>,
}

/// `λ^{-q}(μ^n λ^{Σk})^{-1}`, the factor relating `∫ v^q` to `∫ u^q`.
pub fn scaling_integral_factor(lambda: f64, mu: f64, k: &[u32], q: f64) -> f64 {
    let sum_k: u32 = k.iter().sum();
    lambda.powf(-q - sum_k as f64) * mu.powi(-(k.len() as i32))
}

fn identity(q: f64, v: &Field, u: &Field, factor: f64) -> IdentityAudit {
    let measured = power_integral(v, q) / power_integral(u, q);
    IdentityAudit { q, measured, expected: factor, relative_error: relative(measured, factor) }
}

/// Solves `u` on the configured grid and the transformed datum `v_0` on the
/// companion grid, then compares `v(t)` with `λ^{-1} u(μt)` cell by cell.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<ScalingOutcome> {
    let a = &cfg.analysis;
    let (lambda, mu) = (a.lambda, a.mu);
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(Error::Config(format!("need lambda, mu > 0, got {lambda}, {mu}")));
    }
    let k = cfg.flux()?.exponents().to_vec();
    let n = k.len();
    let grid_u = cfg.grid()?;
    let grid_v = grid_u.contracted(&scaling_factors(lambda, mu, Some(&k), n))?;
    let u0 = initial_data(&cfg.initial, &grid_u)?;
    let scaled = InitialData::ScaledFamily {
        lambda,
        mu,
        exponents: Some(k.clone()),
        base: Box::new(cfg.initial.clone()),
    };
    let v0 = initial_data(&scaled, &grid_v)?;

    let mut times = a.check_times.clone();
    times.sort_by(f64::total_cmp);
    let t_max = times.last().copied().unwrap_or(0.0);
    let solver_u = SolverConfig::new(
        cfg.flux()?,
        cfg.cfl,
        mu * t_max,
        times.iter().map(|t| mu * t).collect(),
        cfg.boundary,
    )?;
    let solver_v = SolverConfig::new(cfg.flux()?, cfg.cfl, t_max, times.clone(), cfg.boundary)?;
    let (u_runs, v_runs) = rayon::join(
        || solve_lockstep(std::slice::from_ref(&u0), &solver_u),
        || solve_lockstep(std::slice::from_ref(&v0), &solver_v),
    );
    let (u_runs, v_runs) = (u_runs?, v_runs?);

    let mut mismatch = Vec::new();
    let mut slice_identities = Vec::new();
    for (u, v) in u_runs[0].iter().zip(&v_runs[0]) {
        let mapped = u.map(|x| x / lambda).with_grid(grid_v.clone())?;
        let norm = v.mass().abs().max(power_integral(v, 1.0));
        let diff = l1_distance(v, &mapped)?;
        mismatch.push(if norm == 0.0 { diff } else { diff / norm });
        for &q in &[1.0, 2.0] {
            slice_identities.push(identity(q, v, u, scaling_integral_factor(lambda, mu, &k, q)));
        }
    }
    let data_identities: Vec<IdentityAudit> = [1.0, 2.0]
        .iter()
        .map(|&q| identity(q, &v0, &u0, scaling_integral_factor(lambda, mu, &k, q)))
        .collect();

    let checks = vec![
        Check::at_most(
            "relative L1 mismatch of transformed runs",
            mismatch.iter().copied().fold(0.0, f64::max),
            a.mismatch_tolerance,
        ),
        Check::at_most(
            "data integral identity, relative error",
            data_identities.iter().map(|i| i.relative_error).fold(0.0, f64::max),
            1e-10,
        ),
    ];
    Ok(ScalingOutcome { lambda, mu, times, mismatch, data_identities, slice_identities, checks })
}

impl ScalingOutcome {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let table = csv_table(
            "mismatch",
            &["t", "relative_l1_mismatch"],
            self.times.iter().zip(&self.mismatch).map(|(&t, &m)| vec![t, m]),
        );
        ExperimentReport::new(
            ExperimentKind::Scaling,
            default_theory(cfg)?,
            self.checks.clone(),
            &self,
            vec![table],
        )
    }
}

// ---------------------------------------------------------------- strichartz

#[derive(Clone, Debug, Serialize)]
pub struct StrichartzMember {
    pub lambda: f64,
    pub integral: f64,
    /// `integral^{(d-1)/d}`.
    pub lhs: f64,
    /// `(∫ v_0^{p+n})^{1/2} (∫ v_0^p)^{1/2}`.
    pub rhs: f64,
    pub ratio: f64,
    /// `max_τ Y(τ)^ρ / (‖v_0‖_p^μ X(τ))` over recorded `τ` with `X(τ) > 0`.
    pub tail_constant: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrichartzOutcome {
    pub p: f64,
    pub p_star: f64,
    pub horizon: f64,
    pub members: Vec<StrichartzMember>,
    pub spread: f64,
    pub checks: Vec<Check>,
}

/// Space-time integral audit over the λ-family, each member solved on its companion grid.
pub fn run_strichartz(cfg: &ExperimentConfig) -> Result<StrichartzOutcome> {
    let a = &cfg.analysis;
    let k = cfg.flux()?.exponents().to_vec();
    let n = k.len();
    let p = a.p;
    let ps = p_star(Exponent::new(p)?, n).value();
    let gw = gronwall_params(p, n)?;
    let grid = cfg.grid()?;
    let solver = cfg.solver_config(|| {
        let mut t = vec![0.0];
        t.extend(crate::solver::geometric_times(cfg.t_end * 1e-4, cfg.t_end, 80));
        t
    })?;
    let observers = Observers {
        norms: vec![Exponent::Finite(p)],
        tv: false,
        keep_snapshots: true,
        ..Observers::default()
    };
    let members = a
        .lambdas
        .par_iter()
        .map(|&lambda| -> Result<StrichartzMember> {
            let companion = grid.contracted(&scaling_factors(lambda, 1.0, Some(&k), n))?;
            let kind = InitialData::ScaledFamily {
                lambda,
                mu: 1.0,
                exponents: Some(k.clone()),
                base: Box::new(cfg.initial.clone()),
            };
            let v0 = initial_data(&kind, &companion)?;
            let report = solve(&v0, &solver, &observers)?;
            let s = strichartz_integral(&report, ps, 0.0, cfg.t_end)?;
            let rhs = (power_integral(&v0, p + n as f64) * power_integral(&v0, p)).sqrt();
            let norm_p = lp_norm(&v0, Exponent::Finite(p))?;
            let tail_constant = s
                .tails
                .iter()
                .zip(&s.x)
                .filter(|(_, &x)| x > 0.0)
                .map(|(&y, &x)| y.powf(gw.rho) / (norm_p.powf(gw.mu) * x))
                .fold(0.0, f64::max);
            Ok(StrichartzMember {
                lambda,
                integral: s.integral,
                lhs: s.balanced,
                rhs,
                ratio: if rhs > 0.0 { s.balanced / rhs } else { 0.0 },
                tail_constant,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let degenerate = members.iter().all(|m| m.rhs == 0.0);
    let mut checks = Vec::new();
    let spread = if degenerate {
        checks.push(Check::at_most(
            "degenerate input: space-time integral",
            members.iter().map(|m| m.lhs).fold(0.0, f64::max),
            0.0,
        ));
        0.0
    } else {
        let ratios: Vec<f64> = members.iter().map(|m| m.ratio).collect();
        checks.push(Check::flag(
            "ratios finite and positive",
            ratios.iter().all(|r| r.is_finite() && *r > 0.0),
        ));
        let s = spread(&ratios);
        checks.push(Check::at_most("ratio spread over the lambda family", s, a.spread_tolerance));
        s
    };
    Ok(StrichartzOutcome { p, p_star: ps, horizon: cfg.t_end, members, spread, checks })
}

impl StrichartzOutcome {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let table = csv_table(
            "family",
            &["lambda", "integral", "lhs", "rhs", "ratio", "tail_constant"],
            self.members
                .iter()
                .map(|m| vec![m.lambda, m.integral, m.lhs, m.rhs, m.ratio, m.tail_constant]),
        );
        ExperimentReport::new(
            ExperimentKind::Strichartz,
            default_theory(cfg)?,
            self.checks.clone(),
            &self,
            vec![table],
        )
    }
}

// ---------------------------------------------------------------- De Giorgi

#[derive(Clone, Debug, Serialize)]
pub struct LevelTrace {
    pub trace: DeGiorgiTrace,
    /// Smallest `C` with `b_{k+1} ≤ C 2^{Ck} b_k^{1+δ}` along the trace.
    pub recurrence_constant: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegiorgiOutcome {
    pub p: f64,
    /// Spatial factor `μ` of the normalization `v_0(y) = u_0(μy)`.
    pub normalization: f64,
    pub initial_norm: f64,
    pub final_sup: f64,
    pub traces: Vec<LevelTrace>,
    pub minimal_b: Option<f64>,
    pub checks: Vec<Check>,
}

/// Level-set sequences for each `B` of the grid after normalizing `‖u_0‖_p = 1`.
pub fn run_degiorgi(cfg: &ExperimentConfig) -> Result<DegiorgiOutcome> {
    let a = &cfg.analysis;
    let p = a.p;
    let n = cfg.dim();
    let u0 = cfg.initial_field()?;
    let norm = lp_norm(&u0, Exponent::new(p)?)?;
    if !(norm > 0.0) {
        return Err(Error::Config("zero data cannot be normalized".into()));
    }
    let mu = norm.powf(p / n as f64);
    let companion = u0.grid().contracted(&vec![mu; n])?;
    let kind = InitialData::ScaledFamily {
        lambda: 1.0,
        mu,
        exponents: Some(cfg.flux_k.clone()),
        base: Box::new(cfg.initial.clone()),
    };
    let v0 = initial_data(&kind, &companion)?;
    let initial_norm = lp_norm(&v0, Exponent::Finite(p))?;
    let run = LevelSetRun::solve(&v0, &cfg.flux()?, cfg.cfl, cfg.boundary, p, a.k_max)?;

    let mut grid = a.b_grid.clone();
    grid.sort_by(f64::total_cmp);
    let traces = grid
        .iter()
        .map(|&b| {
            let trace = degiorgi_trace(&run, b)?;
            let recurrence_constant = trace.recurrence_constant();
            Ok(LevelTrace { trace, recurrence_constant })
        })
        .collect::<Result<Vec<_>>>()?;
    let minimal_b = traces
        .iter()
        .find(|t| t.trace.a.last().is_some_and(|&x| x < a.target))
        .map(|t| t.trace.level_scale);

    let mut checks = vec![
        Check::at_most("normalization |v0|_p - 1", (initial_norm - 1.0).abs(), 1e-10),
        Check::flag("a minimal B exists on the grid", minimal_b.is_some()),
    ];
    if let Some(b) = minimal_b {
        checks.push(Check::at_most("minimal B", b, a.b_limit));
        checks.push(Check::at_most("|u(1)|_inf", run.final_sup, b));
    }
    Ok(DegiorgiOutcome {
        p,
        normalization: mu,
        initial_norm,
        final_sup: run.final_sup,
        traces,
        minimal_b,
        checks,
    })
}

impl DegiorgiOutcome {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let rows = self.traces.iter().flat_map(|lt| {
            let t = &lt.trace;
            (0..t.a.len()).map(move |k| {
                vec![
                    t.level_scale,
                    k as f64,
                    t.t[k],
                    t.levels[k],
                    t.a[k],
                    t.b.get(k).copied().unwrap_or(f64::NAN),
                ]
            })
        });
        let table = csv_table("traces", &["B", "k", "t_k", "level", "a_k", "b_k"], rows);
        ExperimentReport::new(
            ExperimentKind::Degiorgi,
            default_theory(cfg)?,
            self.checks.clone(),
            &self,
            vec![table],
        )
    }
}

// ---------------------------------------------------------------- fundamental

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalRow {
    pub cells: usize,
    pub t: f64,
    pub l1_error: f64,
    pub sup: f64,
    pub sup_exact: f64,
    pub mass_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalOutcome {
    pub mass: f64,
    pub rows: Vec<FundamentalRow>,
    /// Error ratio between consecutive levels at `check_time`.
    pub factors: Vec<f64>,
    pub checks: Vec<Check>,
}

/// Convergence study towards `U_m` from a narrow seed of mass `m`.
pub fn run_fundamental(cfg: &ExperimentConfig) -> Result<FundamentalOutcome> {
    let a = &cfg.analysis;
    if !is_burgers_1d(cfg) {
        return Err(Error::InvalidDimension("the fundamental solution is one-dimensional Burgers".into()));
    }
    let m = a.mass;
    let seed = InitialData::FundamentalSeed { mass: m, width: a.seed_width, corner: None };
    let mut times = a.times.clone();
    if !times.contains(&a.check_time) {
        times.push(a.check_time);
    }
    times.sort_by(f64::total_cmp);
    let t_end = *times.last().ok_or_else(|| Error::Config("no times given".into()))?;

    let levels: Vec<Vec<FundamentalRow>> = (0..a.levels)
        .into_par_iter()
        .map(|level| -> Result<Vec<FundamentalRow>> {
            let c = cfg.clone().refined(level);
            let u0 = initial_data(&seed, &c.grid()?)?;
            let solver = SolverConfig::new(c.flux()?, c.cfl, t_end, times.clone(), c.boundary)?;
            let observers = Observers {
                norms: vec![Exponent::Infinite],
                tv: false,
                keep_snapshots: true,
                ..Observers::default()
            };
            let report = solve(&u0, &solver, &observers)?;
            report
                .times
                .iter()
                .zip(&report.snapshots)
                .map(|(&t, f)| {
                    let exact = fundamental_field(m, t, f)?;
                    let touched = report.boundary_contact.is_some_and(|tc| tc <= t);
                    Ok(FundamentalRow {
                        cells: c.cells[0],
                        t,
                        l1_error: l1_distance(f, &exact)?,
                        sup: f.max_abs(),
                        sup_exact: (2.0 * m / t).sqrt(),
                        mass_drift: if touched { f64::NAN } else { relative(f.mass(), m) },
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let at_check: Vec<FundamentalRow> = levels
        .iter()
        .map(|rows| rows.iter().find(|r| r.t == a.check_time).expect("check time recorded").clone())
        .collect();
    let factors: Vec<f64> = at_check.windows(2).map(|w| w[0].l1_error / w[1].l1_error).collect();
    let finest = at_check.last().expect("at least one level");
    let rows: Vec<FundamentalRow> = levels.into_iter().flatten().collect();
    let drift = rows.iter().map(|r| r.mass_drift).filter(|d| !d.is_nan()).fold(0.0, f64::max);

    let mut checks = vec![
        Check::at_most("mass drift before boundary contact", drift, CONSERVATION_SLACK),
        Check::at_most("L1 error at the finest level", finest.l1_error, a.l1_tolerance),
        Check::at_most(
            "relative sup error at the finest level",
            relative(finest.sup, finest.sup_exact),
            0.05,
        ),
    ];
    if !factors.is_empty() {
        checks.push(Check::at_least(
            "smallest convergence factor per refinement",
            factors.iter().copied().fold(f64::INFINITY, f64::min),
            1.5,
        ));
    }
    Ok(FundamentalOutcome { mass: m, rows, factors, checks })
}

impl FundamentalOutcome {
    pub fn into_report(self, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
        let table = csv_table(
            "convergence",
            &["cells", "t", "l1_error", "sup", "sup_exact", "mass_drift"],
            self.rows
                .iter()
                .map(|r| vec![r.cells as f64, r.t, r.l1_error, r.sup, r.sup_exact, r.mass_drift]),
        );
        ExperimentReport::new(
            ExperimentKind::Fundamental,
            default_theory(cfg)?,
            self.checks.clone(),
            &self,
            vec![table],
        )
    }
}
