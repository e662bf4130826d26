//! Symmetric tensors whose rows are entropy / entropy-flux pairs.
//!
//! For the Burgers flux the matrix is `M(a)_{ij} = a^{i+j+p}/(i+j+p)`, the
//! moment matrix `∫_0^a V(s)⊗V(s) s^{p-1} ds` with `V = (1, s, …, s^n)`.
//! Monomial fluxes replace the powers `i, j` by `k_i, k_j`; a general flux
//! uses `∫_0^a g(s) Z'(s)⊗Z'(s) ds` evaluated by quadrature.

#![allow(clippy::needless_range_loop)]

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::check_flux_exponents;
use crate::linalg::{cholesky_pivots, determinant, max_norm, Matrix};

/// Relative pivot tolerance used to certify positive definiteness.
pub const SPD_PIVOT_TOL: f64 = 1e-13;

/// Entry change on quadrature refinement above which a tensor is rejected.
pub const QUADRATURE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TensorEval {
    pub a: f64,
    pub p: f64,
    pub dim: usize,
    pub entries: Matrix,
    pub det: f64,
    pub spd: bool,
    /// `det M(1)`: `H_{d,p}` for Burgers, `Δ(p, k)` for a monomial flux.
    pub det_constant: f64,
    /// Homogeneity degree of `det M(a)` in `a`.
    pub det_power: f64,
}

impl TensorEval {
    /// `det_constant · a^det_power`, the closed-form determinant.
    pub fn scaled_det(&self) -> f64 {
        self.det_constant * self.a.powf(self.det_power)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!("need finite p >= 1, got {p}")));
    }
    Ok(())
}

/// Matrix with entries `a^{p+e_i+e_j}/(p+e_i+e_j)` for the given row powers `e`.
fn moment_matrix(a: f64, p: f64, powers: &[f64]) -> Matrix {
    powers
        .iter()
        .map(|&ei| {
            powers
                .iter()
                .map(|&ej| {
                    let s = p + ei + ej;
                    a.powf(s) / s
                })
                .collect()
        })
        .collect()
}

fn certify_spd(m: &[Vec<f64>]) -> bool {
    cholesky_pivots(m, SPD_PIVOT_TOL).is_some()
}

/// `H_{d,p} = det(1/(i+j+p))_{0 ≤ i,j ≤ d-1}`.
pub fn hilbert_like_det(d: usize, p: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("need d >= 2, got {d}")));
    }
    check_p(p)?;
    let powers: Vec<f64> = (0..d).map(|i| i as f64).collect();
    Ok(determinant(&moment_matrix(1.0, p, &powers)))
}

pub fn burgers_tensor(a: f64, p: f64, n: usize) -> Result<TensorEval> {
    if n < 1 {
        return Err(Error::InvalidDimension(format!("need n >= 1, got {n}")));
    }
    check_p(p)?;
    if !(a >= 0.0) {
        return Err(Error::NegativeState(a));
    }
    let d = n + 1;
    let powers: Vec<f64> = (0..d).map(|i| i as f64).collect();
    let entries = moment_matrix(a, p, &powers);
    let det = determinant(&entries);
    let spd = a > 0.0 && certify_spd(&entries);
    // n·p* = d(p + n)
    let det_power = (d as f64) * (p + n as f64);
    Ok(TensorEval {
        a,
        p,
        dim: d,
        entries,
        det,
        spd,
        det_constant: hilbert_like_det(d, p)?,
        det_power,
    })
}

pub fn monomial_tensor(a: f64, p: f64, k: &[u32]) -> Result<TensorEval> {
    check_flux_exponents(k)?;
    check_p(p)?;
    if !(a >= 0.0) {
        return Err(Error::NegativeState(a));
    }
    let powers: Vec<f64> = std::iter::once(0.0).chain(k.iter().map(|&x| x as f64)).collect();
    let d = powers.len();
    let entries = moment_matrix(a, p, &powers);
    let det = determinant(&entries);
    let spd = a > 0.0 && certify_spd(&entries);
    let big_k: f64 = powers.iter().sum();
    Ok(TensorEval {
        a,
        p,
        dim: d,
        entries,
        det,
        spd,
        det_constant: determinant(&moment_matrix(1.0, p, &powers)),
        det_power: d as f64 * p + 2.0 * big_k,
    })
}

/// Weight `g(s) = s^{p-1}`, the choice that reproduces the Burgers and monomial tensors.
pub fn power_weight(p: f64) -> impl Fn(f64) -> f64 {
    move |s: f64| s.powf(p - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralFluxTensor {
    pub a: f64,
    /// Uniform state nodes on `[0, a]`.
    pub states: Vec<f64>,
    /// `Z'(s) = (1, f_1'(s), …, f_n'(s))` at each node.
    pub flux_table: Vec<Vec<f64>>,
    pub weight: Vec<f64>,
    pub entries: Matrix,
    pub det: f64,
    /// `det^{1/n}`, with round-off negatives clamped to zero.
    pub delta_g: f64,
    pub spd: bool,
    /// Largest entry change between the coarse and refined quadrature.
    pub quadrature_change: f64,
    /// Convexified entropy sampled at `states`.
    pub phi_g: Vec<f64>,
    /// Whether `|F_i| ≤ φ_g` on all nodes, `F_i` taken modulo its affine part at 0.
    pub entropy_dominated: bool,
}

/// Composite Simpson weights for `m` (even) uniform intervals of width `h`.
fn simpson_weight(i: usize, m: usize, h: f64) -> f64 {
    let w = if i == 0 || i == m {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    };
    w * h / 3.0
}

/// `M_g(a) = ∫_0^a g(s) Z'(s)⊗Z'(s) ds` by composite Simpson, with one
/// refinement to certify convergence.
pub fn general_flux_tensor<Z, G>(
    a: f64,
    flux_derivatives: Z,
    weight: G,
    quad_points: usize,
) -> Result<GeneralFluxTensor>
where
    Z: Fn(f64) -> Vec<f64>,
    G: Fn(f64) -> f64,
{
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::NegativeState(a));
    }
    if quad_points < 16 {
        return Err(Error::InsufficientSamples { needed: 16, got: quad_points });
    }
    let dim = flux_derivatives(0.0).len();
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "Z' must have at least two components, got {dim}"
        )));
    }
    let n = dim - 1;

    if a == 0.0 {
        return Ok(GeneralFluxTensor {
            a,
            states: vec![0.0],
            flux_table: vec![flux_derivatives(0.0)],
            weight: vec![weight(0.0)],
            entries: vec![vec![0.0; dim]; dim],
            det: 0.0,
            delta_g: 0.0,
            spd: false,
            quadrature_change: 0.0,
            phi_g: vec![0.0],
            entropy_dominated: true,
        });
    }

    let coarse = quad_points + quad_points % 2;
    let fine = 2 * coarse;
    let h = a / fine as f64;
    let states: Vec<f64> = (0..=fine).map(|i| i as f64 * h).collect();
    let flux_table: Vec<Vec<f64>> = states.iter().map(|&s| flux_derivatives(s)).collect();
    let weights: Vec<f64> = states.iter().map(|&s| weight(s)).collect();
    for (&s, &g) in states.iter().zip(&weights) {
        let ok = if s == 0.0 { g >= 0.0 } else { g > 0.0 };
        if !ok || !g.is_finite() {
            return Err(Error::NonPositiveWeight { value: g, at: s });
        }
    }
    if flux_table.iter().any(|z| z.len() != dim) {
        return Err(Error::InvalidDimension("Z' changes length across samples".into()));
    }

    let integrate = |stride: usize| -> Matrix {
        let m = fine / stride;
        let hs = h * stride as f64;
        let mut out = vec![vec![0.0; dim]; dim];
        for node in 0..=m {
            let idx = node * stride;
            let w = simpson_weight(node, m, hs) * weights[idx];
            let z = &flux_table[idx];
            for i in 0..dim {
                for j in 0..=i {
                    out[i][j] += w * z[i] * z[j];
                }
            }
        }
        for i in 0..dim {
            for j in 0..i {
                out[j][i] = out[i][j];
            }
        }
        out
    };
    let entries = integrate(1);
    let coarse_entries = integrate(2);
    let scale = max_norm(&entries).max(1.0);
    let quadrature_change = entries
        .iter()
        .flatten()
        .zip(coarse_entries.iter().flatten())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
    if quadrature_change > QUADRATURE_TOL * scale {
        return Err(Error::QuadratureNotConverged { change: quadrature_change });
    }

    let det = determinant(&entries);
    let spd = certify_spd(&entries);
    let delta_g = det.max(0.0).powf(1.0 / n as f64);

    // Rows of the tensor are the entropies F_i(s) = ∫_0^s g Z_i'.
    let integrands: Vec<Vec<f64>> = (0..dim)
        .map(|i| flux_table.iter().zip(&weights).map(|(z, &g)| g * z[i]).collect())
        .collect();
    let slopes: Vec<Vec<f64>> = integrands.iter().map(|gi| derivative(gi, h)).collect();
    let curvature: Vec<f64> = (0..states.len())
        .map(|s| slopes.iter().map(|c| c[s] * c[s]).sum::<f64>().sqrt())
        .collect();
    let phi = convexified_entropy(&curvature, &states, None)?;
    let tol = 1e-8 * (1.0 + phi.phi.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    let entropy_dominated = integrands.iter().all(|gi| {
        let f = cumulative_trapezoid(gi, &states);
        f.iter()
            .zip(&states)
            .zip(&phi.phi)
            .all(|((&fi, &s), &ph)| (fi - gi[0] * s).abs() <= ph + tol)
    });

    Ok(GeneralFluxTensor {
        a,
        states,
        flux_table,
        weight: weights,
        entries,
        det,
        delta_g,
        spd,
        quadrature_change,
        phi_g: phi.phi,
        entropy_dominated,
    })
}

/// Second-order finite differences on a uniform grid.
fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len();
    if m < 3 {
        return vec![0.0; m];
    }
    (0..m)
        .map(|i| {
            if i == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if i == m - 1 {
                (3.0 * values[m - 1] - 4.0 * values[m - 2] + values[m - 3]) / (2.0 * h)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

fn cumulative_trapezoid(values: &[f64], states: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..values.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (states[i] - states[i - 1]);
        out.push(acc);
    }
    out
}

/// Sampled convex entropy with `φ(0) = φ'(0) = 0`, `φ'' = |F''|`, and its flux.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexifiedEntropy {
    pub states: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// `Φ_j(s) = ∫_0^s φ'(σ) f_j'(σ) dσ`, one vector per flux component.
    pub flux: Vec<Vec<f64>>,
}

/// Integrates `|F''|` twice from 0. The samples are interpolated linearly, and
/// the two integrations are exact for that interpolant.
pub fn convexified_entropy(
    second_derivatives: &[f64],
    states: &[f64],
    flux_slopes: Option<&[Vec<f64>]>,
) -> Result<ConvexifiedEntropy> {
    if states.is_empty()
        || states[0] != 0.0
        || states.windows(2).any(|w| !(w[1] > w[0]))
        || second_derivatives.len() != states.len()
    {
        return Err(Error::NonMonotoneGrid);
    }
    let m = states.len();
    let mut phi = vec![0.0; m];
    let mut dphi = vec![0.0; m];
    for i in 1..m {
        let h = states[i] - states[i - 1];
        let c0 = second_derivatives[i - 1].abs();
        let c1 = second_derivatives[i].abs();
        dphi[i] = dphi[i - 1] + 0.5 * (c0 + c1) * h;
        phi[i] = phi[i - 1] + dphi[i - 1] * h + c0 * h * h / 2.0 + (c1 - c0) * h * h / 6.0;
    }
    let flux = match flux_slopes {
        None => Vec::new(),
        Some(slopes) => {
            if slopes.len() != m {
                return Err(Error::InvalidDimension("flux slopes must match the state grid".into()));
            }
            let components = slopes.first().map_or(0, Vec::len);
            (0..components)
                .map(|j| {
                    let integrand: Vec<f64> =
                        dphi.iter().zip(slopes).map(|(dp, fs)| dp * fs[j]).collect();
                    cumulative_trapezoid(&integrand, states)
                })
                .collect()
        }
    };
    Ok(ConvexifiedEntropy { states: states.to_vec(), phi, dphi, flux })
}

/// Second divided differences are nonnegative up to `tol`.
pub fn is_convex(values: &[f64], states: &[f64], tol: f64) -> bool {
    values.windows(3).zip(states.windows(3)).all(|(v, s)| {
        let left = (v[1] - v[0]) / (s[1] - s[0]);
        let right = (v[2] - v[1]) / (s[2] - s[1]);
        (right - left) / (s[2] - s[0]) >= -tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    /// Exact determinant by fraction Gaussian elimination.
    fn rational_det(mut m: Vec<Vec<Q>>) -> Q {
        let n = m.len();
        let mut det = Q::from_integer(1);
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| m[r][col] != Q::from_integer(0)) else {
                return Q::from_integer(0);
            };
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            let p = m[col][col];
            det *= p;
            for r in col + 1..n {
                let f = m[r][col] / p;
                for c in col..n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
            }
        }
        det
    }

    fn rational_moment(p: i128, powers: &[i128]) -> Vec<Vec<Q>> {
        powers
            .iter()
            .map(|&i| powers.iter().map(|&j| Q::new(1, p + i + j)).collect())
            .collect()
    }

    fn to_f64(q: Q) -> f64 {
        *q.numer() as f64 / *q.denom() as f64
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn hilbert_rational_oracle() {
        assert_eq!(rational_det(rational_moment(1, &[0, 1])), Q::new(1, 12));
        assert_eq!(rational_det(rational_moment(2, &[0, 1])), Q::new(1, 72));
        assert_eq!(rational_det(rational_moment(1, &[0, 1, 2])), Q::new(1, 2160));
        for d in 2..=5 {
            for p in 1..=3 {
                let powers: Vec<i128> = (0..d as i128).collect();
                let exact = to_f64(rational_det(rational_moment(p, &powers)));
                let float = hilbert_like_det(d, p as f64).unwrap();
                assert!(rel(float, exact) < 1e-9, "d={d} p={p}: {float} vs {exact}");
                assert!(float > 0.0);
            }
        }
        assert!(hilbert_like_det(1, 1.0).is_err());
    }

    #[test]
    fn burgers_tensor_examples() {
        let t = burgers_tensor(1.0, 1.0, 1).unwrap();
        assert_eq!(t.entries, vec![vec![1.0, 0.5], vec![0.5, 1.0 / 3.0]]);
        assert!(rel(t.det, 1.0 / 12.0) < 1e-14);
        assert!(t.spd);

        let t = burgers_tensor(2.0, 1.0, 1).unwrap();
        assert!(rel(t.det, 4.0 / 3.0) < 1e-14);
        assert_eq!(t.det_power, 4.0);
        assert!(rel(t.scaled_det(), t.det) < 1e-12);

        let t = burgers_tensor(0.0, 1.0, 2).unwrap();
        assert!(t.entries.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(t.det, 0.0);
        assert!(!t.spd);

        assert!(matches!(burgers_tensor(-1.0, 1.0, 1), Err(Error::NegativeState(_))));
    }

    #[test]
    fn monomial_tensor_examples() {
        let m = monomial_tensor(1.0, 1.0, &[1]).unwrap();
        let b = burgers_tensor(1.0, 1.0, 1).unwrap();
        assert_eq!(m.entries, b.entries);

        let m = monomial_tensor(1.0, 1.0, &[1, 2]).unwrap();
        assert_eq!(m.entries[0][0], 1.0);
        assert!(rel(m.entries[0][2], 1.0 / 3.0) < 1e-15);

        // k = (2), p = 1, a = 2: [[2, 8/3], [8/3, 32/5]].
        let m = monomial_tensor(2.0, 1.0, &[2]).unwrap();
        assert!(rel(m.entries[0][1], 8.0 / 3.0) < 1e-15);
        assert!(rel(m.entries[1][1], 32.0 / 5.0) < 1e-15);
        let exact = to_f64(rational_det(rational_moment(1, &[0, 2])));
        assert!(rel(exact, 4.0 / 45.0) < 1e-15);
        assert!(rel(m.det_constant, exact) < 1e-12);
        assert_eq!(m.det_power, 6.0);
        assert!(rel(m.det, 256.0 / 45.0) < 1e-12);
        assert!(rel(m.scaled_det(), m.det) < 1e-10);
    }

    #[test]
    fn monomial_det_scaling_law() {
        for k in [&[1u32][..], &[2], &[1, 2], &[1, 3], &[2, 3], &[1, 2, 4]] {
            for p in [1.0, 2.0, 3.0] {
                for a in [0.5, 1.0, 2.0, 4.0] {
                    let t = monomial_tensor(a, p, k).unwrap();
                    assert!(rel(t.det, t.scaled_det()) < 1e-10, "k={k:?} p={p} a={a}");
                    assert!(t.spd);
                }
            }
        }
    }

    #[test]
    fn general_flux_matches_closed_forms() {
        let t = general_flux_tensor(1.0, |s| vec![1.0, s], |_| 1.0, 16).unwrap();
        let b = burgers_tensor(1.0, 1.0, 1).unwrap();
        for (x, y) in t.entries.iter().flatten().zip(b.entries.iter().flatten()) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(t.spd);
        assert!(t.entropy_dominated);

        for (p, k) in [(1.0, vec![1u32, 2]), (2.0, vec![2]), (3.0, vec![1, 3])] {
            let a = 1.5;
            let kk = k.clone();
            let z = move |s: f64| {
                std::iter::once(1.0).chain(kk.iter().map(|&kj| s.powi(kj as i32))).collect()
            };
            let t = general_flux_tensor(a, z, power_weight(p), 512).unwrap();
            let m = monomial_tensor(a, p, &k).unwrap();
            for (x, y) in t.entries.iter().flatten().zip(m.entries.iter().flatten()) {
                assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()), "p={p} k={k:?}: {x} vs {y}");
            }
            assert!(t.entropy_dominated);
        }
    }

    #[test]
    fn general_flux_degenerate_and_errors() {
        let t = general_flux_tensor(0.0, |s| vec![1.0, s], |_| 1.0, 16).unwrap();
        assert!(t.entries.iter().flatten().all(|&x| x == 0.0));

        let t = general_flux_tensor(1.0, |_| vec![1.0, 2.0], |_| 1.0, 32).unwrap();
        assert!(t.det.abs() < 1e-12);
        assert!(!t.spd);
        assert_eq!(t.delta_g, t.det.max(0.0));

        assert!(matches!(
            general_flux_tensor(1.0, |s| vec![1.0, s], |s| s - 0.5, 32),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(general_flux_tensor(1.0, |s| vec![1.0, s], |_| 1.0, 8).is_err());
        // a kink in the weight near 0 is not resolved by 16 Simpson panels
        assert!(matches!(
            general_flux_tensor(1.0, |s| vec![1.0, s], |s| (s * 1e3).sqrt() + 1e-9, 16),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }

    #[test]
    fn convexified_entropy_examples() {
        let states: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let ones = vec![1.0; states.len()];
        let e = convexified_entropy(&ones, &states, None).unwrap();
        for (s, phi) in states.iter().zip(&e.phi) {
            assert!((phi - s * s / 2.0).abs() < 1e-8);
        }

        let lin: Vec<f64> = states.iter().map(|s| 2.0 * s).collect();
        let e = convexified_entropy(&lin, &states, None).unwrap();
        for (s, phi) in states.iter().zip(&e.phi) {
            assert!((phi - s.powi(3) / 3.0).abs() < 1e-8);
        }
        assert!(is_convex(&e.phi, &states, 1e-12));

        let neg = vec![-1.0; states.len()];
        let e = convexified_entropy(&neg, &states, None).unwrap();
        for (s, phi) in states.iter().zip(&e.phi) {
            assert!((phi - s * s / 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn convexified_entropy_flux_and_errors() {
        let states: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let ones = vec![1.0; states.len()];
        // Burgers f' = s: Φ = ∫ s·s = s^3/3.
        let slopes: Vec<Vec<f64>> = states.iter().map(|&s| vec![s]).collect();
        let e = convexified_entropy(&ones, &states, Some(&slopes)).unwrap();
        assert!((e.flux[0].last().unwrap() - 1.0 / 3.0).abs() < 1e-4);

        assert!(matches!(
            convexified_entropy(&[1.0, 1.0], &[0.0, 0.0], None),
            Err(Error::NonMonotoneGrid)
        ));
        assert!(convexified_entropy(&[1.0, 1.0], &[0.1, 0.2], None).is_err());
    }

    #[test]
    fn sign_changing_curvature_stays_convex() {
        let states: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0 * 3.0).collect();
        let f2: Vec<f64> = states.iter().map(|s| (3.0 * s).sin()).collect();
        let e = convexified_entropy(&f2, &states, None).unwrap();
        assert!(is_convex(&e.phi, &states, 1e-12));
        assert!(e.dphi.windows(2).all(|w| w[1] >= w[0]));
    }
}
