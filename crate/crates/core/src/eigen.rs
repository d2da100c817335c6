//! Eigenpairs of `l(X) = (-1)^s X^(2s) + p0 X = lambda X` on `(0, pi)` with
//! `X^(2j)(0) = X^(2j)(pi) = 0`, `j < s`.
//!
//! The model operator (`p0 = 0`) is diagonal in `sqrt(2/pi) sin(kx)`. For a
//! general `p0` the operator is projected onto the first `M` sines, where it
//! reads `H = diag(j^(2s)) + P` with `P_jm = c_|j-m| - c_(j+m)` and
//! `c_l = (1/pi) int p0 cos(lx)`. Every eigenfunction is therefore a finite
//! sine series and satisfies the boundary conditions exactly.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::BoundaryFn;
use crate::quadrature::{simpson_weights, uniform_grid};

const NORM: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

/// Relative eigenvalue drift tolerated under doubling of the projection size.
pub const REFINEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Eigenfunction {
    /// `sqrt(2/pi) sin(kx)`.
    Sine(usize),
    /// `sqrt(2/pi) sum_j c[j-1] sin(jx)`.
    SineSeries(Vec<f64>),
}

impl Eigenfunction {
    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `X^(order)(x)`, differentiated term by term.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        let shift = order as f64 * PI / 2.0;
        match self {
            Eigenfunction::Sine(k) => {
                let k = *k as f64;
                NORM * k.powi(order as i32) * (k * x + shift).sin()
            }
            Eigenfunction::SineSeries(c) => {
                let mut acc = 0.0;
                for (i, cj) in c.iter().enumerate() {
                    let j = (i + 1) as f64;
                    acc += cj * j.powi(order as i32) * (j * x + shift).sin();
                }
                NORM * acc
            }
        }
    }

    /// Sine coefficients in the orthonormal basis `sqrt(2/pi) sin(jx)`.
    pub fn sine_coefficients(&self) -> Vec<f64> {
        match self {
            Eigenfunction::Sine(k) => {
                let mut v = vec![0.0; *k];
                v[k - 1] = 1.0;
                v
            }
            Eigenfunction::SineSeries(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub k: usize,
    pub lambda: f64,
    pub eigenfunction: Eigenfunction,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    pub s: usize,
    pub pairs: Vec<EigenPair>,
    /// Number of sines used for the projection (`None` for the closed form).
    pub projection_size: Option<usize>,
    /// Composite Simpson grid used for inner products.
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
}

fn quadrature_intervals(max_frequency: usize) -> usize {
    let n = (16 * max_frequency).max(4096);
    n + n % 2
}

/// `lambda_k = k^(2s)` and `X_k = sqrt(2/pi) sin(kx)` in closed form.
pub fn model_eigenpairs(s: usize, k_max: usize) -> EigenBasis {
    assert!(k_max >= 1, "at least one mode is required");
    let pairs = (1..=k_max)
        .map(|k| EigenPair {
            k,
            lambda: (k as f64).powi(2 * s as i32),
            eigenfunction: Eigenfunction::Sine(k),
            norm: 1.0,
        })
        .collect();
    let intervals = quadrature_intervals(k_max);
    EigenBasis {
        s,
        pairs,
        projection_size: None,
        grid: uniform_grid(intervals),
        weights: simpson_weights(intervals, PI / intervals as f64),
    }
}

/// First `k_max` eigenpairs for a general nonnegative `p0`.
///
/// `grid_size` is the projection size `M`; the result is the one computed
/// with `2M` sines, accepted only if `k_max <= M / 8` and every eigenvalue
/// moved by less than [`REFINEMENT_TOL`] (relative) between `M` and `2M`.
pub fn numeric_eigenpairs(s: usize, p0: &BoundaryFn, k_max: usize, grid_size: usize) -> Result<EigenBasis> {
    assert!(k_max >= 1 && s >= 1);
    if k_max > grid_size / 8 {
        return Err(Error::DiscretizationTooCoarse {
            k: k_max,
            rel_change: f64::INFINITY,
        });
    }
    let coarse = galerkin(s, p0, k_max, grid_size)?;
    let fine = galerkin(s, p0, k_max, 2 * grid_size)?;
    for (c, f) in coarse.iter().zip(&fine) {
        let rel = (c.lambda - f.lambda).abs() / f.lambda.abs();
        if !(rel <= REFINEMENT_TOL) {
            return Err(Error::DiscretizationTooCoarse { k: f.k, rel_change: rel });
        }
    }
    let intervals = quadrature_intervals(2 * grid_size);
    Ok(EigenBasis {
        s,
        pairs: fine,
        projection_size: Some(2 * grid_size),
        grid: uniform_grid(intervals),
        weights: simpson_weights(intervals, PI / intervals as f64),
    })
}

/// Picks the closed form when `p0` vanishes identically and the projected
/// operator otherwise, with `M = max(8 k_max, 64)`.
pub fn eigenpairs_for(s: usize, p0: &BoundaryFn, k_max: usize) -> Result<EigenBasis> {
    if p0.is_zero() {
        Ok(model_eigenpairs(s, k_max))
    } else {
        numeric_eigenpairs(s, p0, k_max, (8 * k_max).max(64))
    }
}

/// `(1/pi) int_0^pi p0(x) cos(lx) dx` for `l = 0..=l_max`.
fn cosine_moments(p0: &BoundaryFn, l_max: usize) -> Vec<f64> {
    let intervals = quadrature_intervals(l_max);
    let x = uniform_grid(intervals);
    let w = simpson_weights(intervals, PI / intervals as f64);
    let mut out = vec![0.0; l_max + 1];
    for (xi, wi) in x.iter().zip(&w) {
        let f = wi * p0.eval(*xi) / PI;
        let c1 = xi.cos();
        let (mut prev, mut cur) = (c1, 1.0); // cos(-x), cos(0)
        for o in out.iter_mut() {
            *o += f * cur;
            let next = 2.0 * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    out
}

fn galerkin(s: usize, p0: &BoundaryFn, k_max: usize, m: usize) -> Result<Vec<EigenPair>> {
    let c = cosine_moments(p0, 2 * m);
    let p = DMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (i + 1, j + 1);
        c[a.abs_diff(b)] - c[a + b]
    });
    let diag: Vec<f64> = (1..=m).map(|j| (j as f64).powi(2 * s as i32)).collect();

    // Work with H^{-1} = S (I + S P S)^{-1} S, S = diag^{-1/2}, so that the
    // wanted (smallest) eigenvalues of H are the best conditioned ones.
    let sc: Vec<f64> = diag.iter().map(|d| d.sqrt().recip()).collect();
    let core = DMatrix::from_fn(m, m, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + sc[i] * p[(i, j)] * sc[j]
    });
    let inv = core
        .cholesky()
        .ok_or_else(|| Error::CalibrationUnstable {
            reason: "projected operator is not positive definite (p0 < 0?)".into(),
        })?
        .inverse();
    let g = DMatrix::from_fn(m, m, |i, j| sc[i] * inv[(i, j)] * sc[j]);
    let g = (&g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(g);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut pairs = Vec::with_capacity(k_max);
    for (idx, &col) in order.iter().take(k_max).enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let dominant = v
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        if dominant < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        // Rayleigh quotient with the original operator.
        let mut lambda = 0.0;
        for i in 0..m {
            let mut row = 0.0;
            for j in 0..m {
                row += p[(i, j)] * v[j];
            }
            lambda += v[i] * (diag[i] * v[i] + row);
        }
        if !(lambda > 0.0) {
            return Err(Error::CalibrationUnstable {
                reason: format!("eigenvalue {} is not positive ({lambda})", idx + 1),
            });
        }
        pairs.push(EigenPair {
            k: idx + 1,
            lambda,
            eigenfunction: Eigenfunction::SineSeries(v),
            norm: 1.0,
        });
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteReport {
    pub b: usize,
    pub n: usize,
    /// `lambda_k^(1/(2n)) - k^b` for every mode.
    pub deviations: Vec<f64>,
    pub max_abs_deviation: f64,
    pub first_half_max: f64,
    pub second_half_max: f64,
    pub decaying: bool,
    /// Least-squares slope of `ln|lambda_k - k^(2s)|` against `ln k` over the
    /// upper half; `None` when the deviation vanishes there.
    pub fitted_r: Option<f64>,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.pairs[k - 1].lambda
    }

    fn max_frequency(&self) -> usize {
        match self.projection_size {
            Some(m) => m,
            None => self.pairs.len(),
        }
    }

    /// `int_0^pi f(x) sqrt(2/pi) sin(jx) dx` for `j = 1..=j_max`.
    fn sine_moments(&self, f: &BoundaryFn, j_max: usize) -> Vec<f64> {
        let mut out = vec![0.0; j_max];
        for (xi, wi) in self.grid.iter().zip(&self.weights) {
            let fx = wi * f.eval(*xi) * NORM;
            if fx == 0.0 {
                continue;
            }
            let c1 = xi.cos();
            let (mut prev, mut cur) = (0.0, xi.sin());
            for o in out.iter_mut() {
                *o += fx * cur;
                let next = 2.0 * c1 * cur - prev;
                prev = cur;
                cur = next;
            }
        }
        out
    }

    /// `f_k = int_0^pi f X_k dx`, `k = 1..=K`.
    pub fn expand(&self, f: &BoundaryFn) -> Vec<f64> {
        if f.is_zero() {
            return vec![0.0; self.pairs.len()];
        }
        let moments = self.sine_moments(f, self.max_frequency());
        self.pairs
            .iter()
            .map(|p| match &p.eigenfunction {
                Eigenfunction::Sine(k) => moments[k - 1],
                Eigenfunction::SineSeries(c) => c.iter().zip(&moments).map(|(a, b)| a * b).sum(),
            })
            .collect()
    }

    /// Largest `|<X_j, X_k> - delta_jk|` under the Simpson inner product.
    pub fn orthonormality_error(&self) -> f64 {
        let samples: Vec<Vec<f64>> = self
            .pairs
            .iter()
            .map(|p| self.grid.iter().map(|&x| p.eigenfunction.eval(x)).collect())
            .collect();
        let mut worst = 0.0f64;
        for j in 0..samples.len() {
            for k in j..samples.len() {
                let ip: f64 = samples[j]
                    .iter()
                    .zip(&samples[k])
                    .zip(&self.weights)
                    .map(|((a, b), w)| a * b * w)
                    .sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// Largest `|X_k^(2j)|` at `x = 0, pi` over `j < s`, relative to `lambda_k^(j/s)`.
    pub fn boundary_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for p in &self.pairs {
            for j in 0..self.s {
                let scale = p.lambda.powf(j as f64 / self.s as f64).max(1.0);
                for x in [0.0, PI] {
                    worst = worst.max(p.eigenfunction.derivative(x, 2 * j).abs() / scale);
                }
            }
        }
        worst
    }

    /// `S_K(x) = sum_{k <= upto} X_k(x)^2 / lambda_k`.
    pub fn mercer_partial_sum(&self, x: f64, upto: usize) -> f64 {
        self.pairs
            .iter()
            .take(upto)
            .map(|p| p.eigenfunction.eval(x).powi(2) / p.lambda)
            .sum()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.pairs.windows(2).all(|w| w[1].lambda > w[0].lambda)
    }

    /// Compares `lambda_k^(1/(2n))` with `k^b`, `n = s / b`.
    pub fn asymptote_check(&self, b: usize) -> AsymptoteReport {
        assert!(b >= 1 && self.s.is_multiple_of(b), "b must divide s");
        let n = self.s / b;
        let two_s = 2 * self.s as i32;
        let deviations: Vec<f64> = self
            .pairs
            .iter()
            .map(|p| p.lambda.powf(1.0 / (2 * n) as f64) - (p.k as f64).powi(b as i32))
            .collect();
        let max_of = |xs: &[f64]| xs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let half = deviations.len() / 2;
        let first_half_max = max_of(&deviations[..half.max(1).min(deviations.len())]);
        let second_half_max = max_of(&deviations[half..]);
        let decaying = second_half_max <= first_half_max;

        let mut pts = Vec::new();
        for p in self.pairs.iter().skip(half) {
            let model = (p.k as f64).powi(two_s);
            let diff = (p.lambda - model).abs();
            if diff > 1e-12 * p.lambda {
                pts.push(((p.k as f64).ln(), diff.ln()));
            }
        }
        let fitted_r = if pts.len() >= 2 {
            let n_pts = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n_pts;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n_pts;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            Some(sxy / sxx)
        } else {
            None
        };
        AsymptoteReport {
            b,
            n,
            max_abs_deviation: max_of(&deviations),
            deviations,
            first_half_max,
            second_half_max,
            decaying,
            fitted_r,
        }
    }

    /// `k,lambda` rows followed by sampled eigenfunctions on `samples + 1`
    /// uniform points when `samples > 0`.
    pub fn to_csv(&self, samples: usize) -> String {
        let mut out = String::from("k,lambda\n");
        for p in &self.pairs {
            out.push_str(&format!("{},{:.17e}\n", p.k, p.lambda));
        }
        if samples > 0 {
            out.push_str("\nx");
            for p in &self.pairs {
                out.push_str(&format!(",X{}", p.k));
            }
            out.push('\n');
            for x in uniform_grid(samples) {
                out.push_str(&format!("{x:.17e}"));
                for p in &self.pairs {
                    out.push_str(&format!(",{:.17e}", p.eigenfunction.eval(x)));
                }
                out.push('\n');
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_values() {
        let b = model_eigenpairs(1, 5);
        assert_eq!(b.lambda(2), 4.0);
        assert!(b.pairs[1].eigenfunction.eval(PI / 2.0).abs() < 1e-15);
        assert_eq!(model_eigenpairs(2, 3).lambda(3), 81.0);
    }

    #[test]
    fn model_norms_by_quadrature() {
        let b = model_eigenpairs(1, 10);
        assert!(b.orthonormality_error() < 1e-12);
    }

    #[test]
    fn expand_sine() {
        let b = model_eigenpairs(1, 6);
        let f = BoundaryFn::parse("sin(x)").unwrap();
        let c = b.expand(&f);
        assert!((c[0] - (PI / 2.0).sqrt()).abs() < 1e-12);
        for ck in &c[1..] {
            assert!(ck.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let p0 = BoundaryFn::parse("2.5").unwrap();
        let b = numeric_eigenpairs(2, &p0, 8, 64).unwrap();
        for p in &b.pairs {
            let exact = (p.k as f64).powi(4) + 2.5;
            assert!((p.lambda - exact).abs() / exact < 1e-12, "k = {}", p.k);
            let c = p.eigenfunction.sine_coefficients();
            assert!((c[p.k - 1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn refinement_rule_rejects_too_many_modes() {
        let p0 = BoundaryFn::parse("1").unwrap();
        match numeric_eigenpairs(1, &p0, 20, 80) {
            Err(Error::DiscretizationTooCoarse { k, .. }) => assert_eq!(k, 20),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn numeric_eigenfunctions_are_orthonormal() {
        let p0 = BoundaryFn::parse("1 + sin(x)^2").unwrap();
        let b = numeric_eigenpairs(1, &p0, 6, 64).unwrap();
        assert!(b.orthonormality_error() < 1e-10);
        assert!(b.boundary_residual() < 1e-12);
        assert!(b.is_strictly_increasing());
    }

    #[test]
    fn asymptote_of_shifted_spectrum() {
        let p0 = BoundaryFn::parse("1").unwrap();
        let b = numeric_eigenpairs(1, &p0, 20, 160).unwrap();
        let r = b.asymptote_check(1);
        assert!(r.decaying);
        for (i, d) in r.deviations.iter().enumerate() {
            let k = (i + 1) as f64;
            let exact = 1.0 / ((k * k + 1.0).sqrt() + k);
            assert!((d - exact).abs() < 1e-9);
        }
        assert!(r.fitted_r.unwrap().abs() < 1e-6);
    }

    #[test]
    fn model_asymptote_is_exact() {
        let r = model_eigenpairs(2, 12).asymptote_check(2);
        assert_eq!(r.max_abs_deviation, 0.0);
        assert!(r.fitted_r.is_none());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = model_eigenpairs(1, 3).to_csv(4);
        assert!(csv.starts_with("k,lambda\n1,"));
        assert!(csv.contains("x,X1,X2,X3"));
    }
}
