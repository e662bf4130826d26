//! Quantities constrained by the dispersive estimates, evaluated on fields
//! and on recorded runs.
//!
//! All reductions sum in flat index order so that results do not depend on
//! the number of threads used by the solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{degiorgi_params, Exponent};
use crate::solver::{solve_with, Boundary, Field, FluxSpec, SolverConfig, BOUNDARY_LAYER};

/// Relative support threshold, as a fraction of `‖u_0‖_∞`.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-6;

/// What to record at each record time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Observers {
    pub norms: Vec<Exponent>,
    /// Entropy indices `r` of `η_r(s) = |s|^r / r`.
    pub entropy_indices: Vec<f64>,
    pub tv: bool,
    /// Absolute support threshold; `None` means `1e-6·‖u_0‖_∞`.
    pub support_threshold: Option<f64>,
    pub keep_snapshots: bool,
}

impl Default for Observers {
    fn default() -> Self {
        Self {
            norms: vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinite],
            entropy_indices: Vec::new(),
            tv: true,
            support_threshold: None,
            keep_snapshots: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSeries {
    pub p: Exponent,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropySeries {
    pub r: f64,
    /// Cumulative mass of the entropy production measure on `(0, t)`.
    pub values: Vec<f64>,
}

/// Time series of observables recorded during a solve.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub times: Vec<f64>,
    pub norms: Vec<NormSeries>,
    /// Total variation, one-dimensional runs only.
    pub tv: Option<Vec<f64>>,
    pub entropy_mass: Vec<EntropySeries>,
    /// `support_widths[axis][i]`.
    pub support_widths: Vec<Vec<f64>>,
    pub snapshots: Vec<Field>,
    /// First record time at which the boundary layer carries values above the threshold.
    pub boundary_contact: Option<f64>,
    pub initial: Field,
    pub final_field: Field,
    pub final_time: f64,
    pub threshold: f64,
    keep_snapshots: bool,
    initial_entropy: Vec<f64>,
}

impl RunReport {
    pub fn new(u0: &Field, observers: &Observers) -> Self {
        let threshold =
            observers.support_threshold.unwrap_or(DEFAULT_SUPPORT_THRESHOLD * u0.max_abs());
        Self {
            times: Vec::new(),
            norms: observers
                .norms
                .iter()
                .map(|&p| NormSeries { p, values: Vec::new() })
                .collect(),
            tv: (observers.tv && u0.dim() == 1).then(Vec::new),
            entropy_mass: observers
                .entropy_indices
                .iter()
                .map(|&r| EntropySeries { r, values: Vec::new() })
                .collect(),
            support_widths: vec![Vec::new(); u0.dim()],
            snapshots: Vec::new(),
            boundary_contact: None,
            initial: u0.clone(),
            final_field: u0.clone(),
            final_time: 0.0,
            threshold,
            keep_snapshots: observers.keep_snapshots,
            initial_entropy: observers.entropy_indices.iter().map(|&r| entropy_integral(u0, r)).collect(),
        }
    }

    /// Builds a report from given snapshots, as if each had been recorded by a solve
    /// with no boundary entropy flux.
    pub fn from_snapshots(
        u0: &Field,
        times: &[f64],
        fields: &[Field],
        observers: &Observers,
    ) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(Error::InsufficientSamples { needed: times.len(), got: fields.len() });
        }
        let mut obs = observers.clone();
        obs.keep_snapshots = true;
        let mut report = RunReport::new(u0, &obs);
        let zero = vec![0.0; obs.entropy_indices.len()];
        for (&t, f) in times.iter().zip(fields) {
            report.record(t, f, &zero)?;
        }
        if let (Some(&t), Some(f)) = (times.last(), fields.last()) {
            report.final_time = t;
            report.final_field = f.clone();
        }
        Ok(report)
    }

    /// Records observables of `field` at time `t`; `influx[r]` is the cumulative
    /// entropy that entered through the boundary.
    pub fn record(&mut self, t: f64, field: &Field, influx: &[f64]) -> Result<()> {
        self.initial.same_grid(field)?;
        self.times.push(t);
        for series in &mut self.norms {
            series.values.push(lp_norm(field, series.p)?);
        }
        if let Some(tv) = &mut self.tv {
            tv.push(tv_and_oleinik(field)?.0);
        }
        for ((series, &eta0), &q) in
            self.entropy_mass.iter_mut().zip(&self.initial_entropy).zip(influx)
        {
            series.values.push(eta0 - entropy_integral(field, series.r) + q);
        }
        for (axis, widths) in self.support_widths.iter_mut().enumerate() {
            widths.push(support_width(field, axis, self.threshold));
        }
        if self.boundary_contact.is_none() && touches_boundary(field, self.threshold) {
            self.boundary_contact = Some(t);
        }
        if self.keep_snapshots {
            self.snapshots.push(field.clone());
        }
        Ok(())
    }

    pub fn norm_series(&self, p: Exponent) -> Option<&[f64]> {
        self.norms.iter().find(|s| s.p == p).map(|s| s.values.as_slice())
    }

    pub fn entropy_series(&self, r: f64) -> Option<&[f64]> {
        self.entropy_mass.iter().find(|s| s.r == r).map(|s| s.values.as_slice())
    }

    /// Every norm series is nonincreasing within `rel_slack`.
    pub fn norms_nonincreasing(&self, rel_slack: f64) -> bool {
        self.norms.iter().all(|s| is_nonincreasing(&s.values, rel_slack))
    }
}

/// `values[i+1] ≤ values[i]·(1 + rel_slack)` for all `i`.
pub fn is_nonincreasing(values: &[f64], rel_slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + rel_slack * w[0].abs())
}

fn touches_boundary(field: &Field, threshold: f64) -> bool {
    let grid = field.grid();
    field.values().iter().enumerate().any(|(flat, &v)| {
        v.abs() > threshold
            && grid
                .multi_index(flat)
                .iter()
                .zip(grid.cells())
                .any(|(&i, &c)| i < BOUNDARY_LAYER || i + BOUNDARY_LAYER >= c)
    })
}

/// `(Σ |u_i|^p ΔV)^{1/p}`, or `max |u_i|` for `p = ∞`.
pub fn lp_norm(field: &Field, p: Exponent) -> Result<f64> {
    match p {
        Exponent::Infinite => Ok(field.max_abs()),
        Exponent::Finite(v) if !(v >= 1.0) => {
            Err(Error::InvalidExponent(format!("need p >= 1, got {v}")))
        }
        Exponent::Finite(v) => Ok(power_integral(field, v).powf(1.0 / v)),
    }
}

/// `Σ |u_i|^q ΔV`.
pub fn power_integral(field: &Field, q: f64) -> f64 {
    let sum: f64 = if q == 1.0 {
        field.values().iter().map(|u| u.abs()).sum()
    } else {
        field.values().iter().map(|u| u.abs().powf(q)).sum()
    };
    sum * field.grid().cell_volume()
}

/// `∫ η_r(u)` with `η_r(s) = |s|^r / r`.
pub fn entropy_integral(field: &Field, r: f64) -> f64 {
    power_integral(field, r) / r
}

/// Space-time integral `∫_{t0}^{t1} ∫ u^{p*}` from recorded snapshots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrichartzIntegral {
    pub p_star: f64,
    pub integral: f64,
    /// `integral^{(d-1)/d}`, the left side of the space-time estimate.
    pub balanced: f64,
    pub times: Vec<f64>,
    /// `X(t) = ∫ u(t)^{p*}` at each time.
    pub x: Vec<f64>,
    /// `Y(τ) = ∫_τ^{t1} X` at each time.
    pub tails: Vec<f64>,
}

pub const MIN_STRICHARTZ_SNAPSHOTS: usize = 8;

pub fn strichartz_integral(
    report: &RunReport,
    p_star: f64,
    t0: f64,
    t1: f64,
) -> Result<StrichartzIntegral> {
    if report.snapshots.len() != report.times.len() {
        return Err(Error::InsufficientSamples { needed: report.times.len(), got: report.snapshots.len() });
    }
    let (times, x): (Vec<f64>, Vec<f64>) = report
        .times
        .iter()
        .zip(&report.snapshots)
        .filter(|(&t, _)| t >= t0 && t <= t1)
        .map(|(&t, f)| (t, power_integral(f, p_star)))
        .unzip();
    if times.len() < MIN_STRICHARTZ_SNAPSHOTS {
        return Err(Error::InsufficientSamples { needed: MIN_STRICHARTZ_SNAPSHOTS, got: times.len() });
    }
    let mut tails = vec![0.0; times.len()];
    for i in (0..times.len() - 1).rev() {
        tails[i] = tails[i + 1] + 0.5 * (x[i] + x[i + 1]) * (times[i + 1] - times[i]);
    }
    let integral = tails[0];
    let d = (report.initial.dim() + 1) as f64;
    Ok(StrichartzIntegral {
        p_star,
        integral,
        balanced: integral.powf((d - 1.0) / d),
        times,
        x,
        tails,
    })
}

fn require_1d(field: &Field) -> Result<()> {
    if field.dim() != 1 {
        return Err(Error::InvalidDimension(format!("expected a 1-D field, got {} axes", field.dim())));
    }
    Ok(())
}

pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Total variation and largest forward slope `max (u_{i+1} − u_i)/Δy` of a 1-D field.
pub fn tv_and_oleinik(field: &Field) -> Result<(f64, f64)> {
    require_1d(field)?;
    let h = field.grid().spacing()[0];
    let v = field.values();
    let slope = v.windows(2).map(|w| (w[1] - w[0]) / h).fold(f64::NEG_INFINITY, f64::max);
    Ok((total_variation(v), slope))
}

/// `∫ η_r(u_0) − ∫ η_r(u(τ))`, the entropy dissipated on `(0, τ)` when no
/// entropy crosses the boundary.
pub fn entropy_production_mass(u0: &Field, ut: &Field, r: f64) -> Result<f64> {
    u0.same_grid(ut)?;
    if !(r >= 1.0) {
        return Err(Error::InvalidExponent(format!("entropy index must be >= 1, got {r}")));
    }
    Ok(entropy_integral(u0, r) - entropy_integral(ut, r))
}

/// Largest extent along `axis` of cells with `|u| > threshold`, over all transverse lines.
pub fn support_width(field: &Field, axis: usize, threshold: f64) -> f64 {
    let grid = field.grid();
    let len = grid.cells()[axis];
    let stride = grid.stride(axis);
    let lines = grid.len() / len;
    let v = field.values();
    let mut widest = 0usize;
    for line in 0..lines {
        let base = (line / stride) * len * stride + line % stride;
        let above = |m: &usize| v[base + m * stride].abs() > threshold;
        if let (Some(first), Some(last)) = ((0..len).find(above), (0..len).rev().find(above)) {
            widest = widest.max(last - first + 1);
        }
    }
    widest as f64 * grid.spacing()[axis]
}

fn check_fundamental(m: f64, t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("fundamental solution needs t > 0, got {t}")));
    }
    if !(m > 0.0) {
        return Err(Error::Config(format!("fundamental solution needs m > 0, got {m}")));
    }
    Ok(())
}

/// `U_m(t, y) = y/t` on `(0, √(2mt))`, zero elsewhere.
pub fn fundamental_solution_1d(m: f64, t: f64, y: f64) -> Result<f64> {
    check_fundamental(m, t)?;
    Ok(if y > 0.0 && y < (2.0 * m * t).sqrt() { y / t } else { 0.0 })
}

/// Exact average of `U_m(t, ·)` over `[lo, hi]`.
pub fn fundamental_cell_average(m: f64, t: f64, lo: f64, hi: f64) -> Result<f64> {
    check_fundamental(m, t)?;
    let a = lo.max(0.0);
    let b = hi.min((2.0 * m * t).sqrt());
    Ok(if b > a { (b * b - a * a) / (2.0 * t) / (hi - lo) } else { 0.0 })
}

/// Cell averages of `U_m(t, ·)` on a 1-D grid.
pub fn fundamental_field(m: f64, t: f64, like: &Field) -> Result<Field> {
    require_1d(like)?;
    let grid = like.grid();
    let values = (0..grid.len())
        .map(|i| {
            let (lo, hi) = grid.cell_bounds(&[i]);
            fundamental_cell_average(m, t, lo[0], hi[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    Field::new(grid.clone(), values)
}

/// `Σ |u_i − v_i| ΔV`.
pub fn l1_distance(u: &Field, v: &Field) -> Result<f64> {
    u.same_grid(v)?;
    let s: f64 = u.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).sum();
    Ok(s * u.grid().cell_volume())
}

/// Snapshots at `t_k = 1 − 2^{-k}`, `k = 0..=k_max`, plus `t = 1`, from a single solve.
#[derive(Clone, Debug)]
pub struct LevelSetRun {
    pub p: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    /// `‖u(1)‖_∞`.
    pub final_sup: f64,
}

impl LevelSetRun {
    pub fn solve(
        u0: &Field,
        flux: &FluxSpec,
        cfl: f64,
        boundary: Boundary,
        p: f64,
        k_max: usize,
    ) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidExponent(format!("need p >= 1, got {p}")));
        }
        let mut record: Vec<f64> = (0..=k_max).map(|k| 1.0 - 0.5_f64.powi(k as i32)).collect();
        record.push(1.0);
        let config = SolverConfig::new(flux.clone(), cfl, 1.0, record, boundary)?;
        let observers = Observers {
            norms: vec![Exponent::Finite(p)],
            tv: false,
            keep_snapshots: true,
            ..Observers::default()
        };
        let report = solve_with(u0, &config, &observers, |_, _| Ok(()))?;
        let mut snapshots = report.snapshots;
        let last = snapshots.pop().expect("t = 1 snapshot");
        let mut times = report.times;
        times.pop();
        Ok(Self { p, times, snapshots, final_sup: last.max_abs() })
    }

    pub fn k_max(&self) -> usize {
        self.times.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.snapshots[0].dim()
    }
}

/// Level-set sequences `a_k = ‖(u − ℓ_k)_+(t_k)‖_p` with `ℓ_k = B t_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeGiorgiTrace {
    pub level_scale: f64,
    pub p: f64,
    pub t: Vec<f64>,
    pub levels: Vec<f64>,
    pub a: Vec<f64>,
    /// `B^{-γ/δ} a_k`; empty when `B = 0`.
    pub b: Vec<f64>,
    pub delta: f64,
    pub gamma: f64,
}

pub fn degiorgi_trace(run: &LevelSetRun, level_scale: f64) -> Result<DeGiorgiTrace> {
    if !(level_scale >= 0.0) {
        return Err(Error::Config(format!("level scale B must be >= 0, got {level_scale}")));
    }
    let params = degiorgi_params(run.p, run.dim())?;
    let p = Exponent::Finite(run.p);
    let levels: Vec<f64> = run.times.iter().map(|t| level_scale * t).collect();
    let a = run
        .snapshots
        .iter()
        .zip(&levels)
        .map(|(f, &l)| lp_norm(&f.map(|u| (u - l).max(0.0)), p))
        .collect::<Result<Vec<f64>>>()?;
    let b = if level_scale > 0.0 {
        let factor = level_scale.powf(-params.gamma_dg / params.delta_dg);
        a.iter().map(|x| factor * x).collect()
    } else {
        Vec::new()
    };
    Ok(DeGiorgiTrace {
        level_scale,
        p: run.p,
        t: run.times.clone(),
        levels,
        a,
        b,
        delta: params.delta_dg,
        gamma: params.gamma_dg,
    })
}

impl DeGiorgiTrace {
    /// Smallest `C > 0` with `b_{k+1} ≤ C 2^{Ck} b_k^{1+δ}` along the trace,
    /// or `None` when no consecutive pair is positive.
    pub fn recurrence_constant(&self) -> Option<f64> {
        let ln2 = std::f64::consts::LN_2;
        let mut best: Option<f64> = None;
        for k in 0..self.b.len().saturating_sub(1) {
            let (bk, bk1) = (self.b[k], self.b[k + 1]);
            if !(bk > 0.0 && bk1 > 0.0) {
                continue;
            }
            let target = bk1.ln() - (1.0 + self.delta) * bk.ln();
            let g = |c: f64| c.ln() + c * k as f64 * ln2;
            let (mut lo, mut hi) = (1e-300_f64, 1.0_f64);
            while g(hi) < target {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if g(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            best = Some(best.map_or(hi, |b: f64| b.max(hi)));
        }
        best
    }
}
