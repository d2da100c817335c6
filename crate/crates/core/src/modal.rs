//! Per-mode boundary and matching system, its exponent-scaled determinant,
//! and the solved profile `Y_k(y)`.
//!
//! Columns hold the `2n` upper and then the `2n` lower fundamental
//! solutions. Each column is multiplied by `e^(-re * anchor)`, where the
//! anchor is the end of the half-interval at which the function is largest,
//! so every entry is bounded by one. Rows are divided by `rho^order`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::eigen::EigenPair;
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::roots::{characteristic_roots, fundamental_system, BasisFn, Region};

/// Default `|det| / prod ||row||` threshold below which a mode is singular.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-10;

const ANCHOR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Column {
    pub region: Region,
    pub basis: BasisFn,
    pub anchor: f64,
    /// Natural log of the positive factor extracted from this column.
    pub log_scale: f64,
}

impl Column {
    fn new(region: Region, basis: BasisFn, a: f64) -> Column {
        let anchor = match region {
            Region::Upper if basis.re > ANCHOR_EPS * basis.re.abs().max(1.0) => a,
            Region::Lower if basis.re < -ANCHOR_EPS * basis.re.abs().max(1.0) => -a,
            _ => 0.0,
        };
        Column {
            region,
            basis,
            anchor,
            log_scale: basis.re * anchor,
        }
    }

    /// Scaled `Y^(j)(y) / rho^j`.
    pub fn value(&self, y: f64, j: usize) -> f64 {
        self.basis.scaled(y, j, self.anchor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalSystem {
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
    pub rho: f64,
    pub a: f64,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub columns: Vec<Column>,
    /// Derivative order of every row.
    pub row_orders: Vec<usize>,
    pub det_scaled: f64,
}

/// Column layout: upper functions (increasing angle, cos before sin), then
/// lower functions in the same order.
pub fn columns(n: usize, lambda: f64, a: f64) -> Vec<Column> {
    let mut out = Vec::with_capacity(4 * n);
    for region in [Region::Upper, Region::Lower] {
        let fs = fundamental_system(characteristic_roots(n, lambda, region));
        out.extend(fs.functions.into_iter().map(|b| Column::new(region, b, a)));
    }
    out
}

/// Builds the system from explicit derivative orders.
///
/// `upper_orders[r]` / `lower_orders[r]` are the orders prescribed on
/// `y = a` / `y = -a`, and `psi` / `phi` the corresponding mode coefficients.
#[allow(clippy::too_many_arguments)]
pub fn assemble_orders(
    k: usize,
    n: usize,
    lambda: f64,
    a: f64,
    upper_orders: &[usize],
    lower_orders: &[usize],
    psi: &[f64],
    phi: &[f64],
) -> ModalSystem {
    assert_eq!(upper_orders.len(), n);
    assert_eq!(lower_orders.len(), n);
    let cols = columns(n, lambda, a);
    let rho = lambda.powf(1.0 / (2 * n) as f64);
    let size = 4 * n;
    let mut m = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);
    let mut row_orders = Vec::with_capacity(size);

    for r in 0..n {
        let o = upper_orders[r];
        for c in 0..2 * n {
            m[(r, c)] = cols[c].value(a, o);
        }
        rhs[r] = psi[r] / rho.powi(o as i32);
        row_orders.push(o);
    }
    for r in 0..n {
        let o = lower_orders[r];
        for c in 2 * n..size {
            m[(n + r, c)] = cols[c].value(-a, o);
        }
        rhs[n + r] = phi[r] / rho.powi(o as i32);
        row_orders.push(o);
    }
    for l in 0..2 * n {
        for c in 0..2 * n {
            m[(2 * n + l, c)] = cols[c].value(0.0, l);
        }
        for c in 2 * n..size {
            m[(2 * n + l, c)] = -cols[c].value(0.0, l);
        }
        row_orders.push(l);
    }
    let det_scaled = m.clone().lu().determinant();
    ModalSystem {
        k,
        n,
        lambda,
        rho,
        a,
        matrix: m,
        rhs,
        columns: cols,
        row_orders,
        det_scaled,
    }
}

/// System for one eigenmode of a validated problem.
pub fn assemble(spec: &ProblemSpec, mode: &EigenPair, phi_k: &[f64], psi_k: &[f64]) -> ModalSystem {
    let upper: Vec<usize> = (0..spec.n).map(|r| spec.upper_order(r)).collect();
    let lower: Vec<usize> = (0..spec.n).map(|r| spec.lower_order(r)).collect();
    assemble_orders(mode.k, spec.n, mode.lambda, spec.a, &upper, &lower, psi_k, phi_k)
}

/// Determinant of the scaled matrix.
pub fn scaled_determinant(sys: &ModalSystem) -> f64 {
    sys.det_scaled
}

impl ModalSystem {
    /// `sum log(column scale)`; `ln|Delta_1| = ln|det_scaled| + log_scale_sum`.
    pub fn log_scale_sum(&self) -> f64 {
        self.columns.iter().map(|c| c.log_scale).sum()
    }

    /// Extracted column factors (may overflow to infinity for large modes).
    pub fn column_scales(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.log_scale.exp()).collect()
    }

    /// Product of Euclidean row norms.
    pub fn row_norm_product(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.norm()).product()
    }

    /// `|det_scaled| / prod ||row||`, in `[0, 1]` by Hadamard's inequality.
    pub fn singularity_ratio(&self) -> f64 {
        self.det_scaled.abs() / self.row_norm_product()
    }

    /// Same matrix with a new right-hand side.
    pub fn with_rhs(&self, psi: &[f64], phi: &[f64]) -> ModalSystem {
        let mut out = self.clone();
        for r in 0..self.n {
            out.rhs[r] = psi[r] / self.rho.powi(self.row_orders[r] as i32);
            out.rhs[self.n + r] = phi[r] / self.rho.powi(self.row_orders[self.n + r] as i32);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModalSolution {
    pub k: usize,
    pub n: usize,
    pub lambda: f64,
    pub rho: f64,
    pub columns: Vec<Column>,
    /// Coefficients of the scaled columns.
    pub coefficients: Vec<f64>,
    pub det_scaled: f64,
    /// One-norm condition number of the scaled matrix.
    pub condition: f64,
    /// Relative residual `|A x - b| / (|A| |x| + |b|)`.
    pub residual: f64,
}

/// Pivoted solve of the scaled system; `SingularMode` when the
/// determinant ratio falls below `tol_singular`.
pub fn solve_modal(sys: &ModalSystem, tol_singular: f64) -> Result<ModalSolution> {
    let ratio = sys.singularity_ratio();
    if !(ratio >= tol_singular) {
        return Err(Error::SingularMode { k: sys.k, ratio });
    }
    let lu = sys.matrix.clone().lu();
    let x = lu.solve(&sys.rhs).ok_or(Error::SingularMode { k: sys.k, ratio })?;
    let condition = match lu.try_inverse() {
        Some(inv) => one_norm(&sys.matrix) * one_norm(&inv),
        None => f64::INFINITY,
    };
    let r = &sys.matrix * &x - &sys.rhs;
    let denom = sys.matrix.norm() * x.norm() + sys.rhs.norm();
    let residual = if denom > 0.0 { r.norm() / denom } else { 0.0 };
    Ok(ModalSolution {
        k: sys.k,
        n: sys.n,
        lambda: sys.lambda,
        rho: sys.rho,
        columns: sys.columns.clone(),
        coefficients: x.iter().copied().collect(),
        det_scaled: sys.det_scaled,
        condition,
        residual,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl ModalSolution {
    /// Zero profile for a mode whose content is dropped.
    pub fn zero(k: usize, n: usize, lambda: f64, a: f64) -> ModalSolution {
        ModalSolution {
            k,
            n,
            lambda,
            rho: lambda.powf(1.0 / (2 * n) as f64),
            columns: columns(n, lambda, a),
            coefficients: vec![0.0; 4 * n],
            det_scaled: f64::NAN,
            condition: f64::NAN,
            residual: 0.0,
        }
    }

    fn side_sum(&self, region: Region, y: f64, j: usize) -> f64 {
        self.columns
            .iter()
            .zip(&self.coefficients)
            .filter(|(c, _)| c.region == region)
            .map(|(c, x)| x * c.value(y, j))
            .sum()
    }

    /// `Y^(j)(y)` from the fundamental system of `region`.
    pub fn eval_side(&self, region: Region, y: f64, j: usize) -> f64 {
        self.rho.powi(j as i32) * self.side_sum(region, y, j)
    }

    /// `Y^(j)(y)`; the upper representation is used at `y = 0`.
    pub fn eval(&self, y: f64, j: usize) -> f64 {
        let region = if y < 0.0 { Region::Lower } else { Region::Upper };
        self.eval_side(region, y, j)
    }

    /// Largest `|Y^(j)(0+) - Y^(j)(0-)| / rho^j` over `j < 2n`.
    pub fn matching_error(&self) -> f64 {
        (0..2 * self.n)
            .map(|j| (self.side_sum(Region::Upper, 0.0, j) - self.side_sum(Region::Lower, 0.0, j)).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of absolute scaled coefficients; bounds `max |Y|` on `[-a, a]`.
    pub fn coefficient_mass(&self) -> f64 {
        self.coefficients.iter().map(|x| x.abs()).sum()
    }
}

/// `max |Y^(2n) + sgn(y)(-1)^n lambda Y| / (lambda max|Y|)` over samples.
pub fn modal_ode_residual(solution: &ModalSolution, sample_ys: &[f64]) -> f64 {
    let n = solution.n;
    let sign_n = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for &y in sample_ys {
        let region = if y < 0.0 { Region::Lower } else { Region::Upper };
        let base = solution.side_sum(region, y, 0);
        let top = solution.side_sum(region, y, 2 * n);
        worst = worst.max((top + region.sign() * sign_n * base).abs());
        peak = peak.max(base.abs());
    }
    if peak == 0.0 {
        0.0
    } else {
        worst / peak
    }
}

/// Per-mode diagnostics: `k,lambda,det_scaled,singularity_ratio,condition`.
pub fn diagnostics_csv(rows: &[(usize, f64, f64, f64, f64)]) -> String {
    let mut out = String::from("k,lambda,det_scaled,singularity_ratio,condition\n");
    for (k, l, d, r, c) in rows {
        out.push_str(&format!("{k},{l:.17e},{d:.17e},{r:.17e},{c:.17e}\n"));
    }
    out
}
