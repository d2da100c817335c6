//! Closed-form block determinants for `n = 2m`, obtained by rewriting the
//! cosine/sine columns as exponentials and reducing to Vandermonde form,
//! together with direct numeric evaluations of the same blocks.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

type C64 = Complex<f64>;

fn half_order(n: usize) -> Option<usize> {
    (n >= 2 && n.is_multiple_of(2)).then_some(n / 2)
}

fn theta(m: usize, r: usize) -> f64 {
    PI * (1 + 2 * r) as f64 / (4 * m) as f64
}

fn sigma(m: usize, r: usize) -> f64 {
    PI * r as f64 / (2 * m) as f64
}

/// Upper block on `y = a`: rows `j < 2m` (order `chi + delta j`), columns
/// `e^(alpha_r a) cos(omega_jr)`, `e^(alpha_r a) sin(omega_jr)` for the
/// growing roots `r < m`. Returns `None` unless `n` is even.
pub fn upper_block_matrix(n: usize, lambda: f64, a: f64, delta: u32, chi: usize) -> Option<DMatrix<f64>> {
    let m = half_order(n)?;
    let rho = lambda.powf(1.0 / (2 * n) as f64);
    Some(DMatrix::from_fn(2 * m, 2 * m, |j, c| {
        let r = c / 2;
        let th = theta(m, r);
        let omega = rho * th.sin() * a + (chi + delta as usize * j) as f64 * th;
        let env = (rho * th.cos() * a).exp();
        if c % 2 == 0 {
            env * omega.cos()
        } else {
            env * omega.sin()
        }
    }))
}

pub fn upper_block_numeric(n: usize, lambda: f64, a: f64, delta: u32, chi: usize) -> Option<f64> {
    upper_block_matrix(n, lambda, a, delta, chi).map(|m| m.lu().determinant())
}

/// `e^(2 alpha a) prod sin(delta theta_j) prod_{s<j} 4 (1 - cos delta(theta_j - theta_s)) (1 - cos delta(theta_j + theta_s))`
/// with `alpha = sum_{r<m} alpha_r`.
pub fn upper_block_closed_form(n: usize, lambda: f64, a: f64, delta: u32) -> Option<f64> {
    let m = half_order(n)?;
    let rho = lambda.powf(1.0 / (2 * n) as f64);
    let d = delta as f64;
    let alpha: f64 = (0..m).map(|r| rho * theta(m, r).cos()).sum();
    let mut prod = (2.0 * alpha * a).exp();
    for j in 0..m {
        prod *= (d * theta(m, j)).sin();
        for s in 0..j {
            let (tj, ts) = (theta(m, j), theta(m, s));
            prod *= 4.0 * (1.0 - (d * (tj - ts)).cos()) * (1.0 - (d * (tj + ts)).cos());
        }
    }
    Some(prod)
}

/// Lower block on `y = -a` built from the decaying-towards-zero roots
/// `sigma_r`, `r = m+1..2m-1` (cos/sin pairs), the pure exponential
/// `e^(-rho y)` and the complex column `e^(i tau_(j,m))`.
pub fn lower_block_matrix(n: usize, lambda: f64, a: f64, gamma: u32, q: usize) -> Option<DMatrix<C64>> {
    let m = half_order(n)?;
    let rho = lambda.powf(1.0 / (2 * n) as f64);
    let size = 2 * m;
    Some(DMatrix::from_fn(size, size, |j, c| {
        let order = (q + gamma as usize * j) as f64;
        let pairs = 2 * (m - 1);
        if c < pairs {
            let r = m + 1 + c / 2;
            let sg = sigma(m, r);
            let tau = -rho * sg.sin() * a + order * sg;
            let env = (-rho * sg.cos() * a).exp();
            let v = if c % 2 == 0 { tau.cos() } else { tau.sin() };
            C64::new(env * v, 0.0)
        } else if c == pairs {
            let sign = if (q + gamma as usize * j).is_multiple_of(2) { 1.0 } else { -1.0 };
            C64::new(sign * (rho * a).exp(), 0.0)
        } else {
            let tau = -rho * a + order * PI / 2.0;
            C64::from_polar(1.0, tau)
        }
    }))
}

pub fn lower_block_numeric(n: usize, lambda: f64, a: f64, gamma: u32, q: usize) -> Option<C64> {
    lower_block_matrix(n, lambda, a, gamma, q).map(|m| m.lu().determinant())
}

/// `M1 = det(e^(i gamma j sigma_r), e^(-i gamma j sigma_r), (-1)^(gamma j))`,
/// `r = m+1..2m-1`, `j = 0..2m-2`.
pub fn m1(m: usize, gamma: u32) -> C64 {
    let size = 2 * m - 1;
    let g = gamma as f64;
    let mat = DMatrix::from_fn(size, size, |j, c| {
        let jf = j as f64;
        if c < 2 * (m - 1) {
            let sg = sigma(m, m + 1 + c / 2);
            let sgn = if c % 2 == 0 { 1.0 } else { -1.0 };
            C64::from_polar(1.0, sgn * g * jf * sg)
        } else if (gamma as usize * j).is_multiple_of(2) {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    });
    mat.determinant()
}

/// `e^(-2 a mu + rho a) e^(-i rho a) (i/2)^(m-1) (-i)^q M1 (i^gamma - (-1)^gamma)
///  prod_{r=m+1}^{2m-1} ((-1)^gamma + 1 - 2 i^gamma cos(gamma sigma_r))`,
/// `mu = sum_{r=m+1}^{2m-1} mu_r`.
///
/// The cos/sin pairs carry the factor `(i/2)` each when rewritten as
/// exponentials, which is accounted for here so that the value equals the
/// determinant of [`lower_block_matrix`].
pub fn lower_block_closed_form(n: usize, lambda: f64, a: f64, gamma: u32, q: usize) -> Option<C64> {
    let m = half_order(n)?;
    let rho = lambda.powf(1.0 / (2 * n) as f64);
    let i = C64::i();
    let mu: f64 = (m + 1..2 * m).map(|r| rho * sigma(m, r).cos()).sum();
    let ig = i.powu(gamma);
    let sign_g = if gamma.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut out = C64::from_polar((-2.0 * a * mu + rho * a).exp(), -rho * a);
    out *= (i / 2.0).powu((m - 1) as u32);
    out *= (-i).powu(q as u32);
    out *= m1(m, gamma);
    out *= ig - sign_g;
    for r in m + 1..2 * m {
        out *= C64::new(sign_g + 1.0, 0.0) - ig * 2.0 * (gamma as f64 * sigma(m, r)).cos();
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_n_has_no_closed_form() {
        assert!(upper_block_closed_form(3, 16.0, 1.0, 1).is_none());
        assert!(lower_block_numeric(1, 16.0, 1.0, 1, 0).is_none());
    }

    #[test]
    fn n2_upper_is_a_single_sine() {
        let v = upper_block_closed_form(2, 16.0, 1.0, 1).unwrap();
        let expect = (2.0 * 2f64.sqrt()).exp() * (PI / 4.0).sin();
        assert!((v / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn upper_identity_for_several_orders() {
        for n in [2, 4, 6] {
            for delta in [1, 2] {
                for chi in [0, 1] {
                    let lambda: f64 = 3.0f64.powi(2 * n as i32);
                    let num = upper_block_numeric(n, lambda, 0.7, delta, chi).unwrap();
                    let cf = upper_block_closed_form(n, lambda, 0.7, delta).unwrap();
                    assert!((num / cf - 1.0).abs() < 1e-9, "n={n} delta={delta}: {num} vs {cf}");
                }
            }
        }
    }

    #[test]
    fn lower_identity_for_several_orders() {
        for n in [2, 4, 6] {
            for gamma in [1, 2] {
                for q in [0, 1] {
                    let lambda: f64 = 2.5f64.powi(2 * n as i32);
                    let num = lower_block_numeric(n, lambda, 0.9, gamma, q).unwrap();
                    let cf = lower_block_closed_form(n, lambda, 0.9, gamma, q).unwrap();
                    assert!((num - cf).norm() / cf.norm() < 1e-9, "n={n} gamma={gamma} q={q}: {num} vs {cf}");
                }
            }
        }
    }

    #[test]
    fn m1_is_nonzero() {
        for m in 1..=4 {
            for g in [1, 2] {
                assert!(m1(m, g).norm() > 1e-8);
            }
        }
    }
}
