//! Exponent arithmetic for the dispersive estimates.
//!
//! Everything here is a closed-form function of the Lebesgue exponents
//! `p, q`, the space dimension `n` (with `d = n + 1`) and, for monomial
//! fluxes, the exponent vector `k`. Formulas are written in terms of `1/p`
//! so that `p = ∞` is handled without special cases: `h(∞) = 2`,
//! `δ(∞) = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Lebesgue exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub const INFINITY: Exponent = Exponent::Infinite;

    /// Builds an exponent from a float; `f64::INFINITY` maps to [`Exponent::Infinite`].
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(format!("expected p in [1, inf], got {p}")));
        }
        if p.is_infinite() {
            Ok(Exponent::Infinite)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `1/p`, exactly zero at infinity.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl From<f64> for Exponent {
    /// Unchecked conversion; prefer [`Exponent::new`] for user input.
    fn from(p: f64) -> Self {
        if p.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(p)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = Error;

    fn try_from(repr: ExponentRepr) -> Result<Self> {
        match repr {
            ExponentRepr::Number(p) => Exponent::new(p),
            ExponentRepr::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
                other => other
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidExponent(format!("cannot parse exponent {s:?}")))
                    .and_then(Exponent::new),
            },
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(p: Exponent) -> Self {
        match p {
            Exponent::Finite(v) => ExponentRepr::Number(v),
            Exponent::Infinite => ExponentRepr::Text("inf".to_string()),
        }
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("space dimension must be >= 1, got {n}")));
    }
    Ok(())
}

fn check_exponent(p: Exponent) -> Result<()> {
    match p {
        Exponent::Finite(v) if v.is_nan() || v < 1.0 => {
            Err(Error::InvalidExponent(format!("expected p >= 1, got {v}")))
        }
        _ => Ok(()),
    }
}

/// `h(p) = 2 + dn/p` for the Burgers flux.
pub fn burgers_h(p: Exponent, n: usize) -> f64 {
    let d = (n + 1) as f64;
    2.0 + d * n as f64 * p.recip()
}

/// `δ(p) = n/(2p + dn)`, rewritten as `(n/p)/h(p)` so that `δ(∞) = 0`.
pub fn burgers_delta(p: Exponent, n: usize) -> f64 {
    n as f64 * p.recip() / burgers_h(p, n)
}

/// `p* = d(1 + p/n)`.
pub fn p_star(p: Exponent, n: usize) -> Exponent {
    let d = (n + 1) as f64;
    match p {
        Exponent::Finite(v) => Exponent::Finite(d * (1.0 + v / n as f64)),
        Exponent::Infinite => Exponent::Infinite,
    }
}

/// Exponents of the `L^p → L^q` decay estimate for the Burgers flux.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DispersionExponents {
    pub p: Exponent,
    pub q: Exponent,
    pub n: usize,
    pub d: usize,
    pub h_p: f64,
    pub h_q: f64,
    pub delta_p: f64,
    pub delta_q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p_star: Exponent,
}

pub fn burgers_exponents(p: Exponent, q: Exponent, n: usize) -> Result<DispersionExponents> {
    check_dimension(n)?;
    check_exponent(p)?;
    check_exponent(q)?;
    if p.recip() < q.recip() {
        return Err(Error::InvalidExponent(format!("need p <= q, got p = {p}, q = {q}")));
    }
    let h_p = burgers_h(p, n);
    let h_q = burgers_h(q, n);
    let delta_p = burgers_delta(p, n);
    let delta_q = burgers_delta(q, n);
    Ok(DispersionExponents {
        p,
        q,
        n,
        d: n + 1,
        h_p,
        h_q,
        delta_p,
        delta_q,
        alpha: h_q / h_p,
        beta: h_q * (delta_p - delta_q),
        p_star: p_star(p, n),
    })
}

/// The `L^1 → L^q` exponents `(κ, ν)` in total dimension `d`.
pub fn kappa_nu(d: usize) -> Result<(f64, f64)> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("total dimension must be >= 2, got {d}")));
    }
    let d = d as f64;
    let denom = d * d - d + 2.0;
    Ok((2.0 * (d - 1.0) / denom, d * (d - 1.0) / denom))
}

/// Parameters of the differential inequality satisfied by `∫_τ^∞ ‖u‖_{p*}^{p*}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GronwallParams {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub mu: f64,
}

pub fn gronwall_params(p: f64, n: usize) -> Result<GronwallParams> {
    check_dimension(n)?;
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponent(format!("need finite p >= 1, got {p}")));
    }
    let n_f = n as f64;
    let d = n_f + 1.0;
    let a = (p + n_f) / (p + d * n_f);
    let b = n_f * n_f / (p + d * n_f);
    let rho = 2.0 * n_f / (d * b);
    let mu = p * (1.0 + a) / b;
    Ok(GronwallParams { a, b, rho, mu })
}

/// Exponents for the monomial flux `∂_t u + Σ_j ∂_j u^{k_j+1}/(k_j+1) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonomialExponents {
    pub p: Exponent,
    pub q: Exponent,
    pub k: Vec<u32>,
    /// `K = k_0 + … + k_n` with `k_0 = 0`.
    pub big_k: u64,
    /// `N = dp + 2K`, the homogeneity degree of `det M(a)`.
    pub big_n: f64,
    /// `Q = N/n`.
    pub big_q: f64,
    pub theta: f64,
    pub h_p: f64,
    pub h_q: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `p ≥ n·k_n − 2K`, the range where the monomial estimate is established.
    pub admissible: bool,
}

pub fn check_flux_exponents(k: &[u32]) -> Result<()> {
    if k.is_empty() || k[0] < 1 || k.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonIncreasingExponents(k.to_vec()));
    }
    Ok(())
}

/// `h(p) = 1 + K/p` for a monomial flux.
pub fn monomial_h(p: Exponent, big_k: u64) -> f64 {
    1.0 + big_k as f64 * p.recip()
}

pub fn monomial_exponents(p: Exponent, q: Exponent, k: &[u32]) -> Result<MonomialExponents> {
    check_flux_exponents(k)?;
    check_exponent(p)?;
    check_exponent(q)?;
    if p.recip() < q.recip() {
        return Err(Error::InvalidExponent(format!("need p <= q, got p = {p}, q = {q}")));
    }
    let n = k.len();
    let d = (n + 1) as f64;
    let k_max = *k.last().expect("nonempty") as f64;
    let big_k: u64 = k.iter().map(|&x| x as u64).sum();
    let big_n = d * p.value() + 2.0 * big_k as f64;
    let h_p = monomial_h(p, big_k);
    let h_q = monomial_h(q, big_k);
    let alpha = h_q / h_p;
    let beta = n as f64 * (alpha * p.recip() - q.recip());
    Ok(MonomialExponents {
        p,
        q,
        k: k.to_vec(),
        big_k,
        big_n,
        big_q: big_n / n as f64,
        theta: big_k as f64 / (d * k_max),
        h_p,
        h_q,
        alpha,
        beta,
        admissible: p.value() >= n as f64 * k_max - 2.0 * big_k as f64,
    })
}

/// Parameters of the level-set iteration that upgrades the `(p, p*)` estimate to `L^∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeGiorgiParams {
    pub p_star: f64,
    /// `1/p = 1/p* + 1/r`.
    pub r: f64,
    /// `α(p, p*) − p/p*`.
    pub delta_dg: f64,
    /// `p/r`.
    pub gamma_dg: f64,
}

pub fn degiorgi_params(p: f64, n: usize) -> Result<DeGiorgiParams> {
    check_dimension(n)?;
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::InvalidExponent(format!("need finite p >= 1, got {p}")));
    }
    let pe = Exponent::Finite(p);
    let ps = p_star(pe, n);
    let ex = burgers_exponents(pe, ps, n)?;
    let ps = ps.value();
    let r = 1.0 / (1.0 / p - 1.0 / ps);
    Ok(DeGiorgiParams { p_star: ps, r, delta_dg: ex.alpha - p / ps, gamma_dg: p / r })
}

/// Residuals of the two consistency identities for a triple `p < q < r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `α(p,q) = 1 − θ + θ α(p,r)`, `β(p,q) = θ β(p,r)` with `1/q = (1−θ)/p + θ/r`.
    pub holder_alpha: f64,
    pub holder_beta: f64,
    /// `α(p,r) = α(p,q) α(q,r)`, `β(p,r) = β(q,r) + β(p,q) α(q,r)`.
    pub composition_alpha: f64,
    pub composition_beta: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.holder_alpha.max(self.holder_beta).max(self.composition_alpha).max(self.composition_beta)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative residuals of the interpolation and composition identities.
pub fn identity_residuals(
    p: Exponent,
    q: Exponent,
    r: Exponent,
    n: usize,
) -> Result<IdentityResiduals> {
    let pq = burgers_exponents(p, q, n)?;
    let pr = burgers_exponents(p, r, n)?;
    let qr = burgers_exponents(q, r, n)?;
    let span = p.recip() - r.recip();
    if !(span > 0.0) {
        return Err(Error::InvalidExponent(format!("need p < r, got p = {p}, r = {r}")));
    }
    let theta = (p.recip() - q.recip()) / span;
    Ok(IdentityResiduals {
        holder_alpha: rel_diff(pq.alpha, 1.0 - theta + theta * pr.alpha),
        holder_beta: rel_diff(pq.beta, theta * pr.beta),
        composition_alpha: rel_diff(pr.alpha, pq.alpha * qr.alpha),
        composition_beta: rel_diff(pr.beta, qr.beta + pq.beta * qr.alpha),
    })
}
