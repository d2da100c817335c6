//! Residual checks of a solved field against the equation, the boundary
//! conditions and the matching at `y = 0`, plus the closed-form oracle for
//! `n = s = 1`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::Region;
use crate::series::SolutionField;

/// Accuracy order of the finite-difference route.
pub const FD_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub pde: f64,
    pub fd: f64,
    pub boundary: f64,
    pub matching: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pde: 1e-8,
            fd: 1e-3,
            boundary: 1e-8,
            matching: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryError {
    /// `"lower"` (`y = -a`), `"upper"` (`y = a`), `"x=0"` or `"x=pi"`.
    pub side: String,
    pub index: usize,
    /// Derivative order of the condition.
    pub order: usize,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// Half-width of the band around `y = 0` excluded from the residual.
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Term-wise closed forms.
    pub pde_residual_upper: f64,
    pub pde_residual_lower: f64,
    /// Finite differences of sampled `u`.
    pub fd_residual_upper: f64,
    pub fd_residual_lower: f64,
    pub fd_order: usize,
    /// `lambda_K max |u|`.
    pub normalization: f64,
    pub boundary_errors: Vec<BoundaryError>,
    /// `max_x |D_y^j u(x, 0+) - D_y^j u(x, 0-)|` for `j = 0..2n-1`.
    pub matching_errors: Vec<f64>,
    pub grid: Grid,
    pub thresholds: Thresholds,
    pub pass: bool,
}

impl ResidualReport {
    pub fn pde_residual(&self) -> f64 {
        self.pde_residual_upper.max(self.pde_residual_lower)
    }

    pub fn fd_residual(&self) -> f64 {
        self.fd_residual_upper.max(self.fd_residual_lower)
    }

    pub fn boundary_error(&self) -> f64 {
        self.boundary_errors.iter().map(|b| b.error).fold(0.0, f64::max)
    }

    pub fn matching_error(&self) -> f64 {
        self.matching_errors.iter().copied().fold(0.0, f64::max)
    }

    /// Largest entry of the report.
    pub fn max_error(&self) -> f64 {
        self.pde_residual()
            .max(self.fd_residual())
            .max(self.boundary_error())
            .max(self.matching_error())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fornberg weights for the `m`-th derivative at `z` on nodes `x`.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

fn sign_pow(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn x_grid(nx: usize) -> Vec<f64> {
    (0..nx).map(|i| PI * i as f64 / (nx - 1) as f64).collect()
}

/// `y` samples of one closed half `[0, a]` or `[-a, 0]`, spacing `2a/(ny-1)`.
fn half_grid(a: f64, ny: usize, region: Region) -> Vec<f64> {
    let m = (ny - 1).div_ceil(2).max(2);
    (0..=m).map(|j| region.sign() * a * j as f64 / m as f64).collect()
}

/// Derivative of order `d` at node `i` of a uniform grid of `len` nodes,
/// returning `(first node, weights)` with the window kept inside the grid.
fn stencil(i: usize, len: usize, d: usize, h: f64) -> (isize, Vec<f64>) {
    let centered = d + FD_ORDER - 1;
    let half = (centered / 2) as isize;
    let ii = i as isize;
    let (start, width) = if ii - half >= 0 && ii + half < len as isize {
        (ii - half, centered)
    } else {
        let width = (d + FD_ORDER).min(len);
        let start = (ii - half).clamp(0, (len - width) as isize);
        (start, width)
    };
    let nodes: Vec<f64> = (0..width).map(|j| (start + j as isize - ii) as f64 * h).collect();
    (start, fd_weights(0.0, &nodes, d))
}

/// Odd reflection about `x = 0` and `x = pi` for a grid with `nx` nodes.
fn reflect(i: isize, nx: usize) -> (usize, f64) {
    let last = (nx - 1) as isize;
    if i < 0 {
        ((-i) as usize, -1.0)
    } else if i > last {
        ((2 * last - i) as usize, -1.0)
    } else {
        (i as usize, 1.0)
    }
}

struct RegionResiduals {
    closed_form: f64,
    fd: f64,
    peak: f64,
}

fn region_residuals(field: &SolutionField, nx: usize, ny: usize, region: Region) -> RegionResiduals {
    let spec = &field.spec;
    let (s, n) = (spec.s, spec.n);
    let xs = x_grid(nx);
    let ys = half_grid(spec.a, ny, region);
    let hx = PI / (nx - 1) as f64;
    let hy = spec.a / (ys.len() - 1) as f64;
    let sx = sign_pow(s);
    let sy = sign_pow(n) * region.sign();
    let p0: Vec<f64> = xs.iter().map(|&x| spec.p0.eval(x)).collect();

    let u: Vec<Vec<f64>> = ys
        .iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| field.evaluate_side(x, y, 0, 0, region).unwrap_or(0.0))
                .collect()
        })
        .collect();
    let peak = u.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));

    let centered_x = 2 * s + FD_ORDER - 1;
    let half_x = (centered_x / 2) as isize;
    let nodes_x: Vec<f64> = (-half_x..=half_x).map(|j| j as f64 * hx).collect();
    let wx = fd_weights(0.0, &nodes_x, 2 * s);

    let mut closed = 0.0f64;
    let mut fd = 0.0f64;
    for (j, &y) in ys.iter().enumerate().skip(1) {
        let (start_y, wy) = stencil(j, ys.len(), 2 * n, hy);
        for (i, &x) in xs.iter().enumerate() {
            let dxx = field.evaluate_side(x, y, 2 * s, 0, region).unwrap_or(0.0);
            let dyy = field.evaluate_side(x, y, 0, 2 * n, region).unwrap_or(0.0);
            closed = closed.max((sx * dxx + p0[i] * u[j][i] + sy * dyy).abs());

            let mut fxx = 0.0;
            for (o, w) in wx.iter().enumerate() {
                let (ri, sgn) = reflect(i as isize + o as isize - half_x, nx);
                fxx += w * sgn * u[j][ri];
            }
            let mut fyy = 0.0;
            for (o, w) in wy.iter().enumerate() {
                fyy += w * u[(start_y + o as isize) as usize][i];
            }
            fd = fd.max((sx * fxx + p0[i] * u[j][i] + sy * fyy).abs());
        }
    }
    RegionResiduals {
        closed_form: closed,
        fd,
        peak,
    }
}

/// Both residual routes, boundary and matching errors on an `nx * ny` grid.
pub fn pde_residual(field: &SolutionField, nx: usize, ny: usize, thresholds: Thresholds) -> ResidualReport {
    let nx = nx.max(FD_ORDER + 2 * field.spec.s + 1);
    let ny = ny.max(2 * (FD_ORDER + 2 * field.spec.n) + 1);
    let up = region_residuals(field, nx, ny, Region::Upper);
    let lo = region_residuals(field, nx, ny, Region::Lower);
    let lambda_k = field.basis.pairs.last().map(|p| p.lambda).unwrap_or(1.0);
    let normalization = lambda_k * up.peak.max(lo.peak);
    let scale = |v: f64| if normalization > 0.0 { v / normalization } else { 0.0 };
    let boundary_errors = boundary_check(field, nx, ny);
    let matching_errors = matching_errors(field, nx);
    let mut report = ResidualReport {
        pde_residual_upper: scale(up.closed_form),
        pde_residual_lower: scale(lo.closed_form),
        fd_residual_upper: scale(up.fd),
        fd_residual_lower: scale(lo.fd),
        fd_order: FD_ORDER,
        normalization,
        boundary_errors,
        matching_errors,
        grid: Grid {
            nx,
            ny,
            band: field.spec.a / ny as f64,
        },
        thresholds,
        pass: false,
    };
    report.pass = report.pde_residual() <= thresholds.pde
        && report.fd_residual() <= thresholds.fd
        && report.boundary_error() <= thresholds.boundary
        && report.matching_error() <= thresholds.matching;
    report
}

/// Conditions on `y = -a`, `y = a`, and the even `x`-derivatives of order
/// below `2s` on `x = 0, pi`.
pub fn boundary_check(field: &SolutionField, nx: usize, ny: usize) -> Vec<BoundaryError> {
    let spec = &field.spec;
    let a = spec.a;
    let xs = x_grid(nx.max(2));
    let mut out = Vec::new();
    let mut side = |side: &str, index: usize, order: usize, error: f64| {
        out.push(BoundaryError {
            side: side.into(),
            index,
            order,
            error,
        })
    };
    for r in 0..spec.n {
        let order = spec.lower_order(r);
        let err = xs
            .iter()
            .map(|&x| (field.evaluate_side(x, -a, 0, order, Region::Lower).unwrap_or(f64::NAN) - spec.phi[r].eval(x)).abs())
            .fold(0.0, f64::max);
        side("lower", r, order, err);
    }
    for r in 0..spec.n {
        let order = spec.upper_order(r);
        let err = xs
            .iter()
            .map(|&x| (field.evaluate_side(x, a, 0, order, Region::Upper).unwrap_or(f64::NAN) - spec.psi[r].eval(x)).abs())
            .fold(0.0, f64::max);
        side("upper", r, order, err);
    }
    let ys: Vec<f64> = (0..ny.max(2)).map(|j| -a + 2.0 * a * j as f64 / (ny.max(2) - 1) as f64).collect();
    for (label, x) in [("x=0", 0.0), ("x=pi", PI)] {
        for m in 0..spec.s {
            let err = ys
                .iter()
                .map(|&y| field.evaluate(x, y, 2 * m, 0).unwrap_or(f64::NAN).abs())
                .fold(0.0, f64::max);
            side(label, m, 2 * m, err);
        }
    }
    out
}

pub fn matching_errors(field: &SolutionField, nx: usize) -> Vec<f64> {
    let xs = x_grid(nx.max(2));
    (0..2 * field.spec.n)
        .map(|j| {
            xs.iter()
                .map(|&x| {
                    let up = field.evaluate_side(x, 0.0, 0, j, Region::Upper).unwrap_or(f64::NAN);
                    let lo = field.evaluate_side(x, 0.0, 0, j, Region::Lower).unwrap_or(f64::NAN);
                    (up - lo).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Per-mode profile of the `n = s = 1` problem from the two-unknown reduction
/// `Y = c1 e^(rho y) + c2 e^(-rho y)` above, `(c1 + c2) cos + (c1 - c2) sin` below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMode {
    pub rho: f64,
    pub a: f64,
    /// `c1 e^(rho a)`.
    pub c1_scaled: f64,
    pub c2: f64,
    /// Determinant of the reduced scaled 2x2 system.
    pub det: f64,
}

/// Determinant of `[[1, (-1)^chi E], [E (C + S), C - S]]` with `E = e^(-rho a)`,
/// `C, S = cos, sin(-rho a + q pi / 2)`.
pub fn reduced_determinant(rho: f64, a: f64, q: usize, chi: usize) -> f64 {
    let e = (-rho * a).exp();
    let arg = -rho * a + q as f64 * PI / 2.0;
    let (c, s) = (arg.cos(), arg.sin());
    (c - s) - sign_pow(chi) * e * e * (c + s)
}

pub fn reduced_mode(rho: f64, a: f64, q: usize, chi: usize, phi_k: f64, psi_k: f64) -> ReducedMode {
    let e = (-rho * a).exp();
    let arg = -rho * a + q as f64 * PI / 2.0;
    let (c, s) = (arg.cos(), arg.sin());
    let det = reduced_determinant(rho, a, q, chi);
    let r1 = psi_k / rho.powi(chi as i32);
    let r2 = phi_k / rho.powi(q as i32);
    let b = sign_pow(chi) * e;
    ReducedMode {
        rho,
        a,
        c1_scaled: (r1 * (c - s) - b * r2) / det,
        c2: (r2 - e * (c + s) * r1) / det,
        det,
    }
}

impl ReducedMode {
    pub fn eval(&self, y: f64) -> f64 {
        let c1 = self.c1_scaled * (-self.rho * self.a).exp();
        if y >= 0.0 {
            self.c1_scaled * (self.rho * (y - self.a)).exp() + self.c2 * (-self.rho * y).exp()
        } else {
            (c1 + self.c2) * (self.rho * y).cos() + (c1 - self.c2) * (self.rho * y).sin()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub max_deviation: f64,
    /// `det_scaled / reduced det` per mode in the sum.
    pub det_ratios: Vec<f64>,
    /// `max |ratio / ratio_1 - 1|`.
    pub ratio_spread: f64,
}

/// Field against the reduced closed form on an `nx * ny` product grid.
pub fn oracle_compare(field: &SolutionField, nx: usize, ny: usize) -> Result<OracleComparison> {
    let spec = &field.spec;
    if spec.n != 1 || spec.s != 1 {
        return Err(Error::OracleUnavailable);
    }
    let a = spec.a;
    let reduced: Vec<ReducedMode> = field
        .modes
        .iter()
        .map(|m| {
            let i = m.k - 1;
            reduced_mode(m.rho, a, spec.q, spec.chi, field.expansion.phi[0][i], field.expansion.psi[0][i])
        })
        .collect();
    let det_ratios: Vec<f64> = field.modes.iter().zip(&reduced).map(|(m, r)| m.det_scaled / r.det).collect();
    let ratio_spread = det_ratios
        .first()
        .map(|r0| det_ratios.iter().map(|r| (r / r0 - 1.0).abs()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    let xs = x_grid(nx.max(2));
    let ny = ny.max(2);
    let mut max_deviation = 0.0f64;
    for j in 0..ny {
        let y = -a + 2.0 * a * j as f64 / (ny - 1) as f64;
        let profiles: Vec<f64> = reduced.iter().map(|r| r.eval(y)).collect();
        for &x in &xs {
            let oracle: f64 = field
                .modes
                .iter()
                .zip(&profiles)
                .map(|(m, p)| p * field.basis.pairs[m.k - 1].eigenfunction.eval(x))
                .sum();
            let u = field.evaluate(x, y, 0, 0)?;
            max_deviation = max_deviation.max((u - oracle).abs());
        }
    }
    Ok(OracleComparison {
        max_deviation,
        det_ratios,
        ratio_spread,
    })
}
