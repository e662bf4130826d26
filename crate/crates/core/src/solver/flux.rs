use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponents::check_flux_exponents;

/// Monomial flux `f_j(u) = u^{k_j+1}/(k_j+1)` along each axis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct FluxSpec {
    k: Vec<u32>,
}

impl FluxSpec {
    pub fn new(k: Vec<u32>) -> Result<Self> {
        check_flux_exponents(&k)?;
        Ok(Self { k })
    }

    /// `k_j = j`, the multi-dimensional Burgers flux.
    pub fn burgers(n: usize) -> Self {
        Self { k: (1..=n as u32).collect() }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn is_burgers(&self) -> bool {
        self.k.iter().enumerate().all(|(j, &k)| k == j as u32 + 1)
    }
}

impl TryFrom<Vec<u32>> for FluxSpec {
    type Error = crate::error::Error;

    fn try_from(k: Vec<u32>) -> Result<Self> {
        FluxSpec::new(k)
    }
}

impl From<FluxSpec> for Vec<u32> {
    fn from(f: FluxSpec) -> Self {
        f.k
    }
}

/// `u^{k+1}/(k+1)`.
#[inline]
pub fn monomial_flux(u: f64, k: u32) -> f64 {
    u.powi(k as i32 + 1) / (k as f64 + 1.0)
}

/// `|f'(u)| = |u|^k`.
#[inline]
pub fn wave_speed(u: f64, k: u32) -> f64 {
    u.abs().powi(k as i32)
}

/// Engquist–Osher flux for `f(u) = u^{k+1}/(k+1)`.
///
/// `F(a, b) = f(0) + ∫_0^a max(f', 0) + ∫_0^b min(f', 0)`. For even `k` the
/// flux is nondecreasing and `F = f(a)`; for odd `k` it is convex with its
/// minimum at 0.
#[inline]
pub fn eo_flux(a: f64, b: f64, k: u32) -> f64 {
    if k.is_multiple_of(2) {
        monomial_flux(a, k)
    } else {
        monomial_flux(a.max(0.0), k) + monomial_flux(b.min(0.0), k)
    }
}

/// Entropy flux `q(u) = ∫_0^u η_r'(s) s^k ds` paired with `η_r(s) = |s|^r / r`.
pub fn entropy_flux(u: f64, r: f64, k: u32) -> f64 {
    let m = u.abs().powf(r + k as f64) / (r + k as f64);
    // for u < 0 the integral is (-1)^k |u|^{r+k}/(r+k)
    if u < 0.0 && k % 2 == 1 {
        -m
    } else {
        m
    }
}
