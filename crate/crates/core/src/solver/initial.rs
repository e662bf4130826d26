//! Initial data builders.
//!
//! Every kind evaluates a cell average over `[lower, upper]`. Indicator-type
//! data (boxes, seeds) use the exact overlap fraction so that masses are
//! exact; smooth data are sampled at the cell centre.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{Field, Grid};
use crate::error::{Error, Result};

/// Cells adjacent to each face that must carry zero data under outflow boundaries.
pub const BOUNDARY_LAYER: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `A·exp(1 − 1/(1 − ρ²))` for `ρ² = Σ ((y_j − c_j)/r_j)² < 1`.
    Bump { center: Vec<f64>, radius: Vec<f64>, amplitude: f64 },
    /// `height` on the box `[lower, upper]`.
    Box { lower: Vec<f64>, upper: Vec<f64>, height: f64 },
    /// One-dimensional odd profile `A (y − c)/L` on `|y − c| < L`.
    NWave { center: f64, half_width: f64, amplitude: f64 },
    /// `λ^{-1} u_0(μλ^{k_1} y_1, …, μλ^{k_n} y_n)`; `k_j = j` unless given.
    ScaledFamily {
        lambda: f64,
        mu: f64,
        #[serde(default)]
        exponents: Option<Vec<u32>>,
        base: Box<InitialData>,
    },
    /// Box `[corner, corner + width]^n` of mass `m`.
    FundamentalSeed {
        mass: f64,
        width: f64,
        #[serde(default)]
        corner: Option<Vec<f64>>,
    },
    /// One-dimensional step `left` for `y < position`, `right` beyond.
    Riemann { left: f64, right: f64, position: f64 },
    /// Independent uniform values in `[0, amplitude]` away from the boundary layer.
    Random {
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
}

fn overlap(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    (hi.min(b) - lo.max(a)).max(0.0)
}

fn box_fraction(lower: &[f64], upper: &[f64], box_lo: &[f64], box_hi: &[f64]) -> f64 {
    lower
        .iter()
        .zip(upper)
        .zip(box_lo.iter().zip(box_hi))
        .map(|((&lo, &hi), (&a, &b))| overlap(lo, hi, a, b) / (hi - lo))
        .product()
}

impl InitialData {
    /// Whether the data are compactly supported (and so must clear an outflow boundary).
    pub fn is_compact(&self) -> bool {
        match self {
            InitialData::Riemann { .. } | InitialData::Random { .. } => false,
            InitialData::ScaledFamily { base, .. } => base.is_compact(),
            _ => true,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let need = |len: usize, what: &str| {
            if len != n {
                Err(Error::Config(format!("{what} has {len} components, grid has {n} axes")))
            } else {
                Ok(())
            }
        };
        match self {
            InitialData::Bump { center, radius, .. } => {
                need(center.len(), "bump center")?;
                need(radius.len(), "bump radius")?;
                if radius.iter().any(|r| !(*r > 0.0)) {
                    return Err(Error::Config("bump radius must be positive".into()));
                }
            }
            InitialData::Box { lower, upper, .. } => {
                need(lower.len(), "box lower")?;
                need(upper.len(), "box upper")?;
                if lower.iter().zip(upper).any(|(a, b)| !(b > a)) {
                    return Err(Error::Config("box must have upper > lower".into()));
                }
            }
            InitialData::NWave { half_width, .. } => {
                need(1, "n_wave")?;
                if !(*half_width > 0.0) {
                    return Err(Error::Config("n_wave half width must be positive".into()));
                }
            }
            InitialData::Riemann { .. } => need(1, "riemann")?,
            InitialData::ScaledFamily { lambda, mu, exponents, base } => {
                if !(*lambda > 0.0 && *mu > 0.0) {
                    return Err(Error::Config("scaled family needs lambda, mu > 0".into()));
                }
                if let Some(k) = exponents {
                    need(k.len(), "scaling exponents")?;
                }
                base.validate(n)?;
            }
            InitialData::FundamentalSeed { mass, width, corner } => {
                if !(*mass > 0.0 && *width > 0.0) {
                    return Err(Error::Config("seed needs positive mass and width".into()));
                }
                if let Some(c) = corner {
                    need(c.len(), "seed corner")?;
                }
            }
            InitialData::Random { amplitude, .. } => {
                if !(*amplitude >= 0.0) {
                    return Err(Error::Config("random amplitude must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    /// Average of the datum over the cell `[lower, upper]`.
    fn cell_average(&self, lower: &[f64], upper: &[f64]) -> f64 {
        let center: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| 0.5 * (a + b)).collect();
        match self {
            InitialData::Bump { center: c, radius, amplitude } => {
                let rho2: f64 =
                    center.iter().zip(c).zip(radius).map(|((y, c), r)| ((y - c) / r).powi(2)).sum();
                if rho2 < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - rho2)).exp()
                } else {
                    0.0
                }
            }
            InitialData::Box { lower: a, upper: b, height } => {
                height * box_fraction(lower, upper, a, b)
            }
            InitialData::NWave { center: c, half_width, amplitude } => {
                let s = (center[0] - c) / half_width;
                if s.abs() < 1.0 {
                    amplitude * s
                } else {
                    0.0
                }
            }
            InitialData::Riemann { left, right, position } => {
                let (lo, hi) = (lower[0], upper[0]);
                let h = hi - lo;
                (left * overlap(lo, hi, f64::NEG_INFINITY, *position)
                    + right * overlap(lo, hi, *position, f64::INFINITY))
                    / h
            }
            InitialData::ScaledFamily { lambda, mu, exponents, base } => {
                let factors = scaling_factors(*lambda, *mu, exponents.as_deref(), lower.len());
                let lo: Vec<f64> = lower.iter().zip(&factors).map(|(y, f)| y * f).collect();
                let hi: Vec<f64> = upper.iter().zip(&factors).map(|(y, f)| y * f).collect();
                base.cell_average(&lo, &hi) / lambda
            }
            InitialData::FundamentalSeed { mass, width, corner } => {
                let n = lower.len();
                let a = corner.clone().unwrap_or_else(|| vec![0.0; n]);
                let b: Vec<f64> = a.iter().map(|x| x + width).collect();
                mass / width.powi(n as i32) * box_fraction(lower, upper, &a, &b)
            }
            // filled in by `initial_data`
            InitialData::Random { .. } => 0.0,
        }
    }
}

/// Per-axis factors `μλ^{k_j}` of the scaling map; `k_j = j` by default.
pub fn scaling_factors(lambda: f64, mu: f64, exponents: Option<&[u32]>, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let k = exponents.map_or(j as i32 + 1, |k| k[j] as i32);
            mu * lambda.powi(k)
        })
        .collect()
}

/// Checks that the outer [`BOUNDARY_LAYER`] cells along every axis are zero.
pub fn check_interior_support(field: &Field) -> Result<()> {
    let grid = field.grid();
    for (flat, &v) in field.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let idx = grid.multi_index(flat);
        for (axis, (&i, &c)) in idx.iter().zip(grid.cells()).enumerate() {
            if i < BOUNDARY_LAYER || i + BOUNDARY_LAYER >= c {
                return Err(Error::SupportTouchesBoundary { axis });
            }
        }
    }
    Ok(())
}

/// Builds cell averages of `kind` on `grid`. Compactly supported kinds must
/// vanish on the boundary layer.
pub fn initial_data(kind: &InitialData, grid: &Grid) -> Result<Field> {
    kind.validate(grid.dim())?;
    let values: Vec<f64> = match kind {
        InitialData::Random { amplitude, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..grid.len())
                .map(|flat| {
                    let idx = grid.multi_index(flat);
                    let interior = idx
                        .iter()
                        .zip(grid.cells())
                        .all(|(&i, &c)| i >= BOUNDARY_LAYER && i + BOUNDARY_LAYER < c);
                    let v = rng.gen::<f64>() * amplitude;
                    if interior {
                        v
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        _ => (0..grid.len())
            .map(|flat| {
                let (lo, hi) = grid.cell_bounds(&grid.multi_index(flat));
                kind.cell_average(&lo, &hi)
            })
            .collect(),
    };
    let field = Field::new(grid.clone(), values)?;
    if kind.is_compact() {
        check_interior_support(&field)?;
    }
    Ok(field)
}
