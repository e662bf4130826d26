//! First-order monotone finite-volume solver for monomial-flux conservation laws.
//!
//! Each time step applies one Engquist–Osher sweep per axis, in axis order
//! (Godunov splitting). Every sweep is a conservative monotone update under
//! its own CFL condition, so the step inherits the discrete maximum
//! principle, comparison and `L^1` contraction.

mod flux;
mod grid;
mod initial;

pub use flux::{entropy_flux, eo_flux, monomial_flux, wave_speed, FluxSpec};
pub use grid::{Field, Grid};
pub use initial::{
    check_interior_support, initial_data, scaling_factors, InitialData, BOUNDARY_LAYER,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{Observers, RunReport};

pub const DEFAULT_CFL: f64 = 0.8;

/// Courant numbers up to `1 + COURANT_SLACK` are accepted to absorb rounding in `cfl_dt`.
const COURANT_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Ghost cells copy the boundary cell.
    #[default]
    Outflow,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub flux: FluxSpec,
    pub cfl: f64,
    pub t_end: f64,
    pub record_times: Vec<f64>,
    pub boundary: Boundary,
}

impl SolverConfig {
    pub fn new(
        flux: FluxSpec,
        cfl: f64,
        t_end: f64,
        record_times: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self> {
        let config = Self { flux, cfl, t_end, record_times, boundary };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.record_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("record_times must be strictly increasing".into()));
        }
        if self.record_times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return Err(Error::Config("record_times must lie in [0, t_end]".into()));
        }
        Ok(())
    }

    /// First record time strictly after `t`, or `t_end`.
    pub fn next_stop(&self, t: f64) -> f64 {
        self.record_times.iter().copied().find(|&r| r > t).unwrap_or(self.t_end).min(self.t_end)
    }
}

/// `n` geometrically spaced times from `t_min` to `t_max` inclusive.
pub fn geometric_times(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![t_max];
    }
    let ratio = (t_max / t_min).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { t_max } else { t_min * (ratio * i as f64).exp() })
        .collect()
}

/// One conservative EO update of a line; `lambda = dt/dx`.
fn sweep_line(u: &[f64], out: &mut [f64], lambda: f64, k: u32, boundary: Boundary) {
    let n = u.len();
    let (left, right) = match boundary {
        Boundary::Outflow => (monomial_flux(u[0], k), monomial_flux(u[n - 1], k)),
        Boundary::Periodic => {
            let f = eo_flux(u[n - 1], u[0], k);
            (f, f)
        }
    };
    let mut prev = left;
    for i in 0..n {
        let next = if i + 1 < n { eo_flux(u[i], u[i + 1], k) } else { right };
        out[i] = u[i] - lambda * (next - prev);
        prev = next;
    }
}

fn courant(values: &[f64], dt: f64, dx: f64, k: u32) -> f64 {
    let speed = values.iter().fold(0.0_f64, |m, &u| m.max(wave_speed(u, k)));
    dt * speed / dx
}

/// One-dimensional conservative update `u_i − (dt/dx)(F_{i+1/2} − F_{i−1/2})`.
pub fn sweep_1d(line: &[f64], dt: f64, dx: f64, k: u32, boundary: Boundary) -> Result<Vec<f64>> {
    let c = courant(line, dt, dx, k);
    if c > 1.0 + COURANT_SLACK {
        return Err(Error::CflViolation { courant: c });
    }
    let mut out = vec![0.0; line.len()];
    if !line.is_empty() {
        sweep_line(line, &mut out, dt / dx, k, boundary);
    }
    Ok(out)
}

/// Stable time step `cfl · min_j Δy_j / max|u|^{k_j}`, capped at the next stop after `t`.
pub fn cfl_dt(field: &Field, config: &SolverConfig, t: f64) -> f64 {
    let grid = field.grid();
    let max_abs = field.max_abs();
    let mut dt = f64::INFINITY;
    for (&k, &h) in config.flux.exponents().iter().zip(grid.spacing()) {
        let speed = max_abs.powi(k as i32);
        if speed > 0.0 {
            dt = dt.min(config.cfl * h / speed);
        }
    }
    dt.min(config.next_stop(t) - t)
}

/// One split step on `field`. Returns, for each entropy index in `entropy_r`,
/// the entropy that entered through outflow faces during the step.
fn advance(
    field: &mut Field,
    dt: f64,
    config: &SolverConfig,
    entropy_r: &[f64],
) -> Result<Vec<f64>> {
    let grid = field.grid().clone();
    let mut influx = vec![0.0; entropy_r.len()];
    for (axis, &k) in config.flux.exponents().iter().enumerate() {
        let dx = grid.spacing()[axis];
        let c = courant(field.values(), dt, dx, k);
        if c > 1.0 + COURANT_SLACK {
            return Err(Error::CflViolation { courant: c });
        }
        let lambda = dt / dx;
        let len = grid.cells()[axis];
        let stride = grid.stride(axis);
        let lines = grid.len() / len;
        let face = grid.cell_volume() / dx;
        let values = field.values();
        let track = config.boundary == Boundary::Outflow && !entropy_r.is_empty();

        let swept: Vec<(Vec<f64>, Vec<f64>)> = (0..lines)
            .into_par_iter()
            .map(|line| {
                let base = (line / stride) * len * stride + line % stride;
                let u: Vec<f64> = (0..len).map(|m| values[base + m * stride]).collect();
                let mut out = vec![0.0; len];
                sweep_line(&u, &mut out, lambda, k, config.boundary);
                let flux_in = if track {
                    entropy_r
                        .iter()
                        .map(|&r| entropy_flux(u[0], r, k) - entropy_flux(u[len - 1], r, k))
                        .collect()
                } else {
                    Vec::new()
                };
                (out, flux_in)
            })
            .collect();

        let values = field.values_mut();
        for (line, (out, flux_in)) in swept.into_iter().enumerate() {
            let base = (line / stride) * len * stride + line % stride;
            for (m, v) in out.into_iter().enumerate() {
                values[base + m * stride] = v;
            }
            for (acc, q) in influx.iter_mut().zip(flux_in) {
                *acc += dt * face * q;
            }
        }
    }
    Ok(influx)
}

/// Godunov-split step: one sweep per axis with exponent `k_j`.
pub fn step(field: &Field, dt: f64, config: &SolverConfig) -> Result<Field> {
    if field.dim() != config.flux.dim() {
        return Err(Error::GridMismatch(format!(
            "field has {} axes, flux has {}",
            field.dim(),
            config.flux.dim()
        )));
    }
    let mut next = field.clone();
    advance(&mut next, dt, config, &[])?;
    Ok(next)
}

/// Advances all `fields` in lockstep with a common time step, calling
/// `on_stop(t, fields, entropy_influx)` at `t = 0` and at every record time.
/// `entropy_influx[f][r]` is the cumulative outflow-boundary entropy influx.
fn run<F>(
    mut fields: Vec<Field>,
    config: &SolverConfig,
    entropy_r: &[f64],
    mut on_stop: F,
) -> Result<Vec<Field>>
where
    F: FnMut(f64, &[Field], &[Vec<f64>]) -> Result<()>,
{
    config.validate()?;
    for f in &fields {
        if f.dim() != config.flux.dim() {
            return Err(Error::GridMismatch(format!(
                "field has {} axes, flux has {}",
                f.dim(),
                config.flux.dim()
            )));
        }
        if !f.is_finite() {
            return Err(Error::NonFinite { time: 0.0 });
        }
    }
    let mut influx = vec![vec![0.0; entropy_r.len()]; fields.len()];
    let mut t = 0.0;
    let mut next_record = 0;
    if config.record_times.first() == Some(&0.0) {
        on_stop(0.0, &fields, &influx)?;
        next_record = 1;
    }
    while t < config.t_end {
        let stop = config.next_stop(t);
        let dt = fields.iter().map(|f| cfl_dt(f, config, t)).fold(f64::INFINITY, f64::min);
        for (field, acc) in fields.iter_mut().zip(influx.iter_mut()) {
            let step_in = advance(field, dt, config, entropy_r)?;
            for (a, q) in acc.iter_mut().zip(step_in) {
                *a += q;
            }
        }
        t = if stop - t <= dt { stop } else { t + dt };
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        while next_record < config.record_times.len() && config.record_times[next_record] <= t {
            on_stop(config.record_times[next_record], &fields, &influx)?;
            next_record += 1;
        }
    }
    Ok(fields)
}

/// Solves from `u0` to `t_end`, recording observables at each record time.
pub fn solve(u0: &Field, config: &SolverConfig, observers: &Observers) -> Result<RunReport> {
    solve_with(u0, config, observers, |_, _| Ok(()))
}

/// [`solve`] with an extra hook called at every record time.
pub fn solve_with<H>(
    u0: &Field,
    config: &SolverConfig,
    observers: &Observers,
    mut hook: H,
) -> Result<RunReport>
where
    H: FnMut(f64, &Field) -> Result<()>,
{
    let mut report = RunReport::new(u0, observers);
    let last = run(vec![u0.clone()], config, &observers.entropy_indices, |t, fields, influx| {
        report.record(t, &fields[0], &influx[0])?;
        hook(t, &fields[0])
    })?;
    report.final_field = last.into_iter().next().expect("one field");
    report.final_time = config.t_end;
    Ok(report)
}

/// Solves several initial data on one grid with a shared time step and
/// returns `snapshots[f][i]`, field `f` at record time `i`.
pub fn solve_lockstep(fields: &[Field], config: &SolverConfig) -> Result<Vec<Vec<Field>>> {
    if let Some(first) = fields.first() {
        for f in fields {
            first.same_grid(f)?;
        }
    }
    let mut snapshots = vec![Vec::new(); fields.len()];
    run(fields.to_vec(), config, &[], |_, fs, _| {
        for (store, f) in snapshots.iter_mut().zip(fs) {
            store.push(f.clone());
        }
        Ok(())
    })?;
    Ok(snapshots)
}

/// Solutions from `u0`, `(u0)_+` and `−(u0)_-` at the final time.
#[derive(Clone, Debug)]
pub struct SignSplit {
    pub full: Field,
    pub upper: Field,
    pub lower: Field,
    /// `lower ≤ full ≤ upper` everywhere.
    pub bracketed: bool,
}

/// Solves the positive and negative parts of the data alongside the data
/// itself; by comparison the signed solutions bracket the full one.
pub fn solve_sign_split(u0: &Field, config: &SolverConfig) -> Result<SignSplit> {
    let plus = u0.map(|x| x.max(0.0));
    let minus = u0.map(|x| x.min(0.0));
    let mut cfg = config.clone();
    cfg.record_times = vec![config.t_end];
    let mut snaps = solve_lockstep(&[u0.clone(), plus, minus], &cfg)?;
    let lower = snaps[2].pop().expect("final snapshot");
    let upper = snaps[1].pop().expect("final snapshot");
    let full = snaps[0].pop().expect("final snapshot");
    let bracketed = full
        .values()
        .iter()
        .zip(upper.values())
        .zip(lower.values())
        .all(|((u, hi), lo)| lo <= u && u <= hi);
    Ok(SignSplit { full, upper, lower, bracketed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(k: Vec<u32>, boundary: Boundary, t_end: f64) -> SolverConfig {
        SolverConfig::new(FluxSpec::new(k).unwrap(), 0.8, t_end, vec![t_end], boundary).unwrap()
    }

    #[test]
    fn constant_line_unchanged() {
        for boundary in [Boundary::Outflow, Boundary::Periodic] {
            let line = vec![0.7; 12];
            let out = sweep_1d(&line, 0.01, 0.1, 1, boundary).unwrap();
            assert_eq!(out, line);
        }
    }

    #[test]
    fn shock_line() {
        let line = vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        let (dt, dx) = (0.05, 0.1);
        let out = sweep_1d(&line, dt, dx, 1, Boundary::Outflow).unwrap();
        let lambda = dt / dx;
        // F(1,1) = 1/2, F(1,-1) = 1, F(-1,-1) = 1/2
        assert_eq!(out[2], 1.0 - lambda * 0.5);
        assert_eq!(out[3], -1.0 + lambda * 0.5);
        assert_eq!(out.iter().sum::<f64>(), line.iter().sum::<f64>());

        // the profile with one intermediate zero state is exactly stationary
        let steady = vec![1.0, 1.0, 0.0, -1.0, -1.0];
        assert_eq!(sweep_1d(&steady, dt, dx, 1, Boundary::Outflow).unwrap(), steady);
    }

    #[test]
    fn nonnegative_line_stays_nonnegative() {
        let line: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64 / 13.0).collect();
        let out = sweep_1d(&line, 0.09, 0.1, 1, Boundary::Periodic).unwrap();
        assert!(out.iter().all(|&x| x >= 0.0));
        let s0: f64 = line.iter().sum();
        let s1: f64 = out.iter().sum();
        assert!((s0 - s1).abs() < 1e-13 * s0);
    }

    #[test]
    fn sweep_rejects_cfl_violation() {
        let line = vec![0.0, 2.0, 0.0];
        assert!(matches!(
            sweep_1d(&line, 0.1, 0.1, 1, Boundary::Outflow),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn cfl_dt_examples() {
        let grid = Grid::covering(&[0.0], &[1.0], &[100]).unwrap();
        let mut f = Field::zeros(grid);
        f.values_mut()[50] = -1.0;
        let cfg = config(vec![1], Boundary::Outflow, 10.0);
        assert!((cfl_dt(&f, &cfg, 0.0) - 0.008).abs() < 1e-15);

        let zero = Field::zeros(f.grid().clone());
        let cfg = SolverConfig::new(FluxSpec::burgers(1), 0.8, 10.0, vec![0.5, 2.0], Boundary::Outflow)
            .unwrap();
        assert_eq!(cfl_dt(&zero, &cfg, 0.25), 0.25);
        assert_eq!(cfl_dt(&zero, &cfg, 1.0), 1.0);

        let grid = Grid::covering(&[0.0, 0.0], &[1.0, 1.0], &[10, 10]).unwrap();
        let mut f = Field::zeros(grid);
        f.values_mut()[33] = 2.0;
        let cfg = SolverConfig::new(FluxSpec::new(vec![1, 2]).unwrap(), 0.5, 10.0, vec![10.0], Boundary::Outflow)
            .unwrap();
        assert!((cfl_dt(&f, &cfg, 0.0) - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn step_constant_and_one_dimensional() {
        let grid = Grid::covering(&[0.0, 0.0], &[1.0, 1.0], &[8, 8]).unwrap();
        let f = Field::new(grid.clone(), vec![0.3; 64]).unwrap();
        let cfg = config(vec![1, 2], Boundary::Outflow, 1.0);
        assert_eq!(step(&f, 0.01, &cfg).unwrap(), f);

        let grid = Grid::covering(&[0.0], &[1.0], &[20]).unwrap();
        let f = Field::from_fn(grid, |y| (6.0 * y[0]).sin());
        let cfg = config(vec![1], Boundary::Periodic, 1.0);
        let stepped = step(&f, 0.02, &cfg).unwrap();
        let swept = sweep_1d(f.values(), 0.02, 0.05, 1, Boundary::Periodic).unwrap();
        assert_eq!(stepped.values(), &swept[..]);
    }

    #[test]
    fn config_validation() {
        let flux = FluxSpec::burgers(1);
        assert!(SolverConfig::new(flux.clone(), 1.0, 1.0, vec![], Boundary::Outflow).is_err());
        assert!(SolverConfig::new(flux.clone(), 0.5, 1.0, vec![2.0], Boundary::Outflow).is_err());
        assert!(SolverConfig::new(flux.clone(), 0.5, 1.0, vec![0.5, 0.2], Boundary::Outflow).is_err());
        assert!(SolverConfig::new(flux, 0.5, 1.0, vec![0.0, 1.0], Boundary::Periodic).is_ok());
    }

    #[test]
    fn geometric_times_endpoints() {
        let t = geometric_times(1.0, 100.0, 24);
        assert_eq!(t.len(), 24);
        assert_eq!(t[0], 1.0);
        assert_eq!(t[23], 100.0);
        let ratios: Vec<f64> = t.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
    }

    #[test]
    fn sign_split_brackets() {
        let grid = Grid::covering(&[-3.0], &[3.0], &[120]).unwrap();
        let u0 = initial_data(
            &InitialData::NWave { center: 0.0, half_width: 1.0, amplitude: 1.0 },
            &grid,
        )
        .unwrap();
        let cfg = config(vec![1], Boundary::Outflow, 1.0);
        let split = solve_sign_split(&u0, &cfg).unwrap();
        assert!(split.bracketed);
        assert!(split.upper.min() >= 0.0 && split.lower.max() <= 0.0);
    }
}
