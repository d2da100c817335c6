//! Characteristic roots and real fundamental systems of the modal equation
//! `Y^(2n) + sgn(y) (-1)^n lambda Y = 0` on either side of `y = 0`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `y > 0`: `z^(2n) = (-1)^(n+1) lambda`.
    Upper,
    /// `y < 0`: `z^(2n) = (-1)^n lambda`.
    Lower,
}

impl Region {
    /// `sgn(y)` of the region.
    pub fn sign(self) -> f64 {
        match self {
            Region::Upper => 1.0,
            Region::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub n: usize,
    pub rho: f64,
    pub region: Region,
    /// Root arguments in `[0, pi]`; the remaining roots are their conjugates.
    pub angles: Vec<f64>,
    /// `rho cos(angle)`: alpha (upper) or mu (lower).
    pub re: Vec<f64>,
    /// `rho sin(angle)`: beta (upper) or nu (lower).
    pub im: Vec<f64>,
}

/// `rho = lambda^(1/(2n))` and the angle table of the requested region.
pub fn characteristic_roots(n: usize, lambda: f64, region: Region) -> RootSet {
    assert!(n >= 1 && lambda > 0.0);
    let rho = lambda.powf(1.0 / (2 * n) as f64);
    let exponent = match region {
        Region::Upper => n + 1,
        Region::Lower => n,
    };
    // e^{2n i phi} = -1 gives phi = (2j+1) pi / (2n); = +1 gives j pi / n.
    let offset = exponent % 2;
    let angles: Vec<f64> = (0..=n)
        .map(|j| (2 * j + offset) as f64 * PI / (2 * n) as f64)
        .filter(|phi| *phi <= PI * (1.0 + 1e-14))
        .map(|phi| phi.min(PI))
        .collect();
    let re = angles.iter().map(|p| rho * p.cos()).collect();
    let im = angles.iter().map(|p| rho * p.sin()).collect();
    RootSet {
        n,
        rho,
        region,
        angles,
        re,
        im,
    }
}

impl RootSet {
    /// All `2n` complex roots as `(re, im)`.
    pub fn complex_roots(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.n);
        for (i, phi) in self.angles.iter().enumerate() {
            out.push((self.re[i], self.im[i]));
            if !on_real_axis(*phi) {
                out.push((self.re[i], -self.im[i]));
            }
        }
        out
    }

    /// `max_j |z_j^(2n) - target| / lambda`.
    pub fn equation_residual(&self) -> f64 {
        let lambda = self.rho.powi(2 * self.n as i32);
        let target = match self.region {
            Region::Upper => lambda * sign_pow(self.n + 1),
            Region::Lower => lambda * sign_pow(self.n),
        };
        let two_n = (2 * self.n) as f64;
        self.complex_roots()
            .iter()
            .map(|&(x, y)| {
                let r = (x * x + y * y).sqrt();
                let phi = y.atan2(x);
                let mag = r.powf(two_n);
                let (re, im) = (mag * (two_n * phi).cos(), mag * (two_n * phi).sin());
                ((re - target).powi(2) + im * im).sqrt() / lambda
            })
            .fold(0.0, f64::max)
    }
}

fn on_real_axis(phi: f64) -> bool {
    phi.sin().abs() < 1e-12
}

fn sign_pow(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// One real solution `e^(re y) trig(im y)` with derivative rule
/// `Y^(j) = rho^j e^(re y) trig(im y + j angle)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisFn {
    pub angle: f64,
    pub trig: Trig,
    pub re: f64,
    pub im: f64,
}

impl BasisFn {
    /// `Y^(j)(y) / rho^j` multiplied by `e^(-re * anchor)`.
    pub fn scaled(&self, y: f64, j: usize, anchor: f64) -> f64 {
        let arg = self.im * y + j as f64 * self.angle;
        let t = match self.trig {
            Trig::Cos => arg.cos(),
            Trig::Sin => arg.sin(),
        };
        (self.re * (y - anchor)).exp() * t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalSystem {
    pub roots: RootSet,
    /// Ordered by increasing angle, cosine before sine.
    pub functions: Vec<BasisFn>,
}

pub fn fundamental_system(roots: RootSet) -> FundamentalSystem {
    let mut functions = Vec::with_capacity(2 * roots.n);
    for (i, &angle) in roots.angles.iter().enumerate() {
        let (re, im) = (roots.re[i], roots.im[i]);
        functions.push(BasisFn {
            angle,
            trig: Trig::Cos,
            re,
            im,
        });
        if !on_real_axis(angle) {
            functions.push(BasisFn {
                angle,
                trig: Trig::Sin,
                re,
                im,
            });
        }
    }
    debug_assert_eq!(functions.len(), 2 * roots.n);
    FundamentalSystem { roots, functions }
}

impl FundamentalSystem {
    pub fn rho(&self) -> f64 {
        self.roots.rho
    }

    /// `Y_i^(j)(y)`.
    pub fn eval(&self, i: usize, y: f64, j: usize) -> f64 {
        self.rho().powi(j as i32) * self.functions[i].scaled(y, j, 0.0)
    }

    /// `|Y_i^(2n)(y) + sgn (-1)^n lambda Y_i(y)| / (lambda max(|Y_i(y)|, e^(re y)))`.
    pub fn ode_residual(&self, i: usize, y: f64) -> f64 {
        let n = self.roots.n;
        let f = &self.functions[i];
        let c = self.roots.region.sign() * sign_pow(n);
        let top = f.scaled(y, 2 * n, 0.0);
        let base = f.scaled(y, 0, 0.0);
        (top + c * base).abs() / (f.re * y).exp()
    }

    /// Wronskian at `y` with row `j` divided by `rho^j`.
    pub fn normalized_wronskian(&self, y: f64) -> f64 {
        let m = self.functions.len();
        DMatrix::from_fn(m, m, |j, i| self.functions[i].scaled(y, j, 0.0)).determinant()
    }

    /// Wronskian at `y`; equals the normalized value times `rho^(n(2n-1))`.
    pub fn wronskian(&self, y: f64) -> f64 {
        let m = self.functions.len();
        DMatrix::from_fn(m, m, |j, i| self.eval(i, y, j)).determinant()
    }
}
