//! Full solve: expansion of the boundary data, smoothness preconditions,
//! per-mode solves with singular-mode handling, truncation, and the
//! evaluators of the summed series `u = sum_k Y_k(y) X_k(x)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::denominator::{denominator_report, DenominatorReport, Verdict};
use crate::eigen::{eigenpairs_for, EigenBasis, Eigenfunction};
use crate::error::{Error, Result};
use crate::modal::{assemble, solve_modal, ModalSolution, DEFAULT_SINGULAR_TOL};
use crate::problem::{AOverPi, BoundaryFn, ProblemSpec};
use crate::quadrature::{integrate, simpson_weights, uniform_grid};
use crate::roots::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub function: String,
    pub condition: String,
    pub status: Status,
    /// Largest offending magnitude (zero when not evaluated).
    pub max_abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergencePath {
    /// Denominators bounded away from zero: mode weight 1.
    Separated,
    /// Algebraic `a/pi`, weight `k^(b + b eps)`.
    DiophantineEpsilon,
    /// Algebraic `a/pi`, weight `k^(2s - r - b)`.
    DiophantineRemainder,
    /// No convergence guarantee is available.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub conditions: Vec<ConditionResult>,
    /// Every condition passed.
    pub data_ok: bool,
    pub path: ConvergencePath,
    /// `1 <= b <= s - 1`, needed by the Diophantine path.
    pub diophantine_gate: bool,
    pub remark: Option<String>,
}

impl SmoothnessReport {
    pub fn status_of(&self, function: &str, condition_prefix: &str) -> Option<Status> {
        self.conditions
            .iter()
            .find(|c| c.function == function && c.condition.starts_with(condition_prefix))
            .map(|c| c.status)
    }
}

const SMOOTH_SAMPLES: usize = 64;

fn jet_ok(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

/// `(l f)^(j)(x)` for `j <= order` using Leibniz on `p0 f`.
fn l_derivatives(f: &[f64], p0: &[f64], s: usize, order: usize) -> Vec<f64> {
    let sign = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
    (0..=order)
        .map(|j| {
            let mut prod = 0.0;
            let mut binom = 1.0;
            for i in 0..=j {
                prod += binom * p0[i] * f[j - i];
                binom = binom * (j - i) as f64 / (i + 1) as f64;
            }
            sign * f[2 * s + j] + prod
        })
        .collect()
}

/// Per-function checks of `C^(4s)` regularity, vanishing even derivatives
/// of orders `< 2s` at both ends, and the same for `l(f)`.
pub fn smoothness_check(spec: &ProblemSpec) -> SmoothnessReport {
    let s = spec.s;
    let mut conditions = Vec::new();
    let named: Vec<(String, &BoundaryFn)> = spec
        .phi
        .iter()
        .enumerate()
        .map(|(r, f)| (format!("phi[{r}]"), f))
        .chain(spec.psi.iter().enumerate().map(|(r, f)| (format!("psi[{r}]"), f)))
        .collect();
    for (name, f) in &named {
        let mut push = |condition: String, status: Status, max_abs: f64| {
            conditions.push(ConditionResult {
                function: name.clone(),
                condition,
                status,
                max_abs,
            })
        };
        let regular = format!("C^{} on [0, pi]", 4 * s);
        match f {
            BoundaryFn::Samples(v) => {
                push(regular, Status::Unverified, 0.0);
                let worst = v[0].abs().max(v[v.len() - 1].abs());
                let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                let status = if worst <= 1e-9 * scale { Status::Pass } else { Status::Fail };
                push("f^(0) vanishes at 0 and pi".into(), status, worst);
                for m in 1..s {
                    push(format!("f^({}) vanishes at 0 and pi", 2 * m), Status::Unverified, 0.0);
                }
                for m in 0..s {
                    push(format!("l(f)^({}) vanishes at 0 and pi", 2 * m), Status::Unverified, 0.0);
                }
            }
            BoundaryFn::Expr { .. } => {
                let top = 4 * s;
                let finite = (0..=SMOOTH_SAMPLES).all(|i| {
                    let x = PI * i as f64 / SMOOTH_SAMPLES as f64;
                    jet_ok(&f.derivatives(x, top).unwrap_or_default())
                });
                push(regular, if finite { Status::Pass } else { Status::Fail }, 0.0);
                let jets: Vec<Vec<f64>> = [0.0, PI]
                    .iter()
                    .map(|&x| f.derivatives(x, top).unwrap_or_default())
                    .collect();
                let p0_jets: Option<Vec<Vec<f64>>> = [0.0, PI]
                    .iter()
                    .map(|&x| spec.p0.derivatives(x, 2 * s))
                    .collect();
                for m in 0..s {
                    let worst = jets.iter().map(|j| j[2 * m].abs()).fold(0.0, f64::max);
                    let scale = jets.iter().flat_map(|j| j.iter()).fold(1.0f64, |a, v| a.max(v.abs()));
                    let status = if worst <= 1e-9 * scale { Status::Pass } else { Status::Fail };
                    push(format!("f^({}) vanishes at 0 and pi", 2 * m), status, worst);
                }
                for m in 0..s {
                    let label = format!("l(f)^({}) vanishes at 0 and pi", 2 * m);
                    match &p0_jets {
                        None => push(label, Status::Unverified, 0.0),
                        Some(pj) => {
                            let mut worst = 0.0f64;
                            let mut scale = 1.0f64;
                            for (fj, p) in jets.iter().zip(pj) {
                                let lf = l_derivatives(fj, p, s, 2 * s - 2);
                                worst = worst.max(lf[2 * m].abs());
                                scale = lf.iter().fold(scale, |a, v| a.max(v.abs()));
                            }
                            let status = if worst <= 1e-9 * scale { Status::Pass } else { Status::Fail };
                            push(label, status, worst);
                        }
                    }
                }
            }
        }
    }
    let data_ok = conditions.iter().all(|c| c.status == Status::Pass);
    let b = spec.b();
    let diophantine_gate = b >= 1 && b < s;
    let mut remark = None;
    let path = match &spec.a_over_pi {
        AOverPi::Rational(_) => {
            let sep = crate::denominator::classify_phase(2 * spec.n, spec.gamma, spec.q)
                .and_then(|ph| crate::denominator::separation_check(&spec.a_over_pi, &ph));
            match sep {
                Ok(s) if s.verdict == Verdict::Separated => ConvergencePath::Separated,
                _ => ConvergencePath::None,
            }
        }
        AOverPi::Irrational(t) => {
            if !diophantine_gate {
                remark = Some(format!(
                    "b = s = {s}: higher smoothness required; the Diophantine path is refused"
                ));
                ConvergencePath::None
            } else if t.algebraic_degree().is_some_and(|p| p >= 2) {
                ConvergencePath::DiophantineEpsilon
            } else {
                ConvergencePath::None
            }
        }
    };
    SmoothnessReport {
        conditions,
        data_ok,
        path,
        diophantine_gate,
        remark,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryExpansion {
    /// `phi[r][k-1] = int phi_r X_k`.
    pub phi: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    /// `max_{k in last quarter} lambda_k^2 |coef|`, per function (phi then psi).
    pub lambda2_tail: Vec<f64>,
    /// Relative growth of `sum lambda_k^4 coef^2` over the last quarter.
    pub lambda4_increment: Vec<f64>,
    /// `L2` norm of every function (phi then psi).
    pub norms: Vec<f64>,
}

fn l2_norm(f: &BoundaryFn) -> f64 {
    let intervals = 4096;
    let x = uniform_grid(intervals);
    let w = simpson_weights(intervals, PI / intervals as f64);
    let v: Vec<f64> = x.iter().map(|&x| f.eval(x).powi(2)).collect();
    integrate(&w, &v).max(0.0).sqrt()
}

pub fn expand_boundary(spec: &ProblemSpec, basis: &EigenBasis) -> BoundaryExpansion {
    let phi: Vec<Vec<f64>> = spec.phi.iter().map(|f| basis.expand(f)).collect();
    let psi: Vec<Vec<f64>> = spec.psi.iter().map(|f| basis.expand(f)).collect();
    let k = basis.len();
    let start = k - k / 4;
    let mut lambda2_tail = Vec::new();
    let mut lambda4_increment = Vec::new();
    for coefs in phi.iter().chain(&psi) {
        let tail = (start..k)
            .map(|i| basis.pairs[i].lambda.powi(2) * coefs[i].abs())
            .fold(0.0, f64::max);
        lambda2_tail.push(tail);
        let terms: Vec<f64> = (0..k)
            .map(|i| basis.pairs[i].lambda.powi(4) * coefs[i].powi(2))
            .collect();
        let total: f64 = terms.iter().sum();
        let last: f64 = terms[start..].iter().sum();
        lambda4_increment.push(if total > 0.0 { last / total } else { 0.0 });
    }
    let norms = spec.phi.iter().chain(&spec.psi).map(l2_norm).collect();
    BoundaryExpansion {
        phi,
        psi,
        lambda2_tail,
        lambda4_increment,
        norms,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOptions {
    pub k_max: usize,
    /// Modes with estimated contribution below `tol` are dropped.
    pub tol: f64,
    pub singular_tol: f64,
    /// A singular mode is skipped when all of its data coefficients are
    /// below `ortho_rel * max ||data||`.
    pub ortho_rel: f64,
    /// Diophantine exponent; derived from the eigenvalue asymptotics if absent.
    pub epsilon: Option<f64>,
    pub scan_k_max: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            k_max: 32,
            tol: 1e-12,
            singular_tol: DEFAULT_SINGULAR_TOL,
            ortho_rel: 1e-9,
            epsilon: None,
            scan_k_max: 10_000,
        }
    }
}

impl SolveOptions {
    pub fn with_k(k_max: usize) -> Self {
        SolveOptions {
            k_max,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub spec: ProblemSpec,
    pub options: SolveOptions,
    pub basis: EigenBasis,
    pub expansion: BoundaryExpansion,
    /// Solved profiles of the modes that enter the sum, in increasing `k`.
    pub modes: Vec<ModalSolution>,
    pub k_used: usize,
    /// `lambda_k weight(k) sum(|phi_rk| + |psi_rk|) / |det_scaled|` per mode
    /// (zero for skipped singular modes).
    pub mode_bounds: Vec<f64>,
    /// Sum of `mode_bounds` over the last quarter of the modes.
    pub tail_bound: f64,
    /// Bound on the last quarter's contribution to `max |D_y^(2n) u|`.
    pub tail_contribution: f64,
    pub nonunique_modes: Vec<usize>,
    pub dropped_modes: Vec<usize>,
    pub path: ConvergencePath,
    pub epsilon: f64,
    pub fitted_r: f64,
    pub smoothness: SmoothnessReport,
    pub denominator: DenominatorReport,
}

fn default_epsilon(s: usize, b: usize, r: f64) -> f64 {
    let room = (2.0 * s as f64 - r - 2.0 * b as f64) / b as f64;
    if room > 0.0 {
        room.min(b as f64) / 2.0
    } else {
        b as f64 / 2.0
    }
}

fn eigenfunction_sup(f: &Eigenfunction) -> f64 {
    let norm = (2.0 / PI).sqrt();
    match f {
        Eigenfunction::Sine(_) => norm,
        Eigenfunction::SineSeries(c) => norm * c.iter().map(|v| v.abs()).sum::<f64>(),
    }
}

/// Solves the problem with the first `options.k_max` modes.
pub fn solve_problem(spec: &ProblemSpec, options: &SolveOptions) -> Result<SolutionField> {
    spec.ensure_valid()?;
    let k_max = options.k_max.max(1);
    let smoothness = smoothness_check(spec);
    let basis = eigenpairs_for(spec.s, &spec.p0, k_max)?;
    let expansion = expand_boundary(spec, &basis);
    let b = spec.b();
    let fitted_r = basis.asymptote_check(b).fitted_r.unwrap_or(0.0).max(0.0);
    let epsilon = options.epsilon.unwrap_or_else(|| default_epsilon(spec.s, b, fitted_r));
    let denominator = denominator_report(spec, Some(&basis), epsilon, options.scan_k_max)?;

    let s2 = 2.0 * spec.s as f64;
    let bf = b as f64;
    let (path, exponent) = match denominator.verdict {
        Verdict::Separated => (ConvergencePath::Separated, 0.0),
        Verdict::DiophantineBounded if smoothness.diophantine_gate => {
            if bf + bf * epsilon < s2 - fitted_r - bf {
                (ConvergencePath::DiophantineEpsilon, bf + bf * epsilon)
            } else {
                (ConvergencePath::DiophantineRemainder, s2 - fitted_r - bf)
            }
        }
        _ => (ConvergencePath::None, 0.0),
    };

    let data_norm = expansion.norms.iter().fold(0.0f64, |m, v| m.max(*v));
    let ortho_tol = options.ortho_rel * data_norm;
    let mut modes = Vec::new();
    let mut mode_bounds = Vec::with_capacity(k_max);
    let mut nonunique_modes = Vec::new();
    let mut dropped_modes = Vec::new();
    let mut tail_terms = Vec::with_capacity(k_max);
    let n = spec.n;
    for (i, pair) in basis.pairs.iter().enumerate() {
        let phi_k: Vec<f64> = (0..n).map(|r| expansion.phi[r][i]).collect();
        let psi_k: Vec<f64> = (0..n).map(|r| expansion.psi[r][i]).collect();
        let sys = assemble(spec, pair, &phi_k, &psi_k);
        let coef_max = phi_k.iter().chain(&psi_k).fold(0.0f64, |m, v| m.max(v.abs()));
        if sys.singularity_ratio() < options.singular_tol {
            if coef_max <= ortho_tol {
                nonunique_modes.push(pair.k);
                mode_bounds.push(0.0);
                tail_terms.push(0.0);
                continue;
            }
            return Err(Error::SingularModeWithData {
                k: pair.k,
                max_coefficient: coef_max,
            });
        }
        let data_sum: f64 = phi_k.iter().chain(&psi_k).map(|v| v.abs()).sum();
        let weight = (pair.k as f64).powf(exponent);
        let bound = pair.lambda * weight * data_sum / sys.det_scaled.abs();
        mode_bounds.push(bound);
        if bound < options.tol {
            dropped_modes.push(pair.k);
            tail_terms.push(0.0);
            continue;
        }
        let sol = solve_modal(&sys, options.singular_tol)?;
        tail_terms.push(pair.lambda * sol.coefficient_mass() * eigenfunction_sup(&pair.eigenfunction));
        modes.push(sol);
    }
    let start = k_max - k_max / 4;
    let tail_bound = mode_bounds[start..].iter().sum();
    let tail_contribution = tail_terms[start..].iter().sum();
    let k_used = modes.last().map(|m| m.k).unwrap_or(0);
    Ok(SolutionField {
        spec: spec.clone(),
        options: options.clone(),
        basis,
        expansion,
        modes,
        k_used,
        mode_bounds,
        tail_bound,
        tail_contribution,
        nonunique_modes,
        dropped_modes,
        path,
        epsilon,
        fitted_r,
        smoothness,
        denominator,
    })
}

const DOMAIN_SLACK: f64 = 1e-12;

impl SolutionField {
    fn check(&self, x: f64, y: f64, dx: usize, dy: usize) -> Result<()> {
        let a = self.spec.a;
        if !((-DOMAIN_SLACK..=PI + DOMAIN_SLACK).contains(&x) && y.abs() <= a * (1.0 + DOMAIN_SLACK)) {
            return Err(Error::OutOfDomain { x, y });
        }
        let (s2, n2) = (2 * self.spec.s, 2 * self.spec.n);
        if dx > s2 || dy > n2 || (dx == s2 && dy == n2) {
            return Err(Error::DerivativeOrder { dx, dy });
        }
        Ok(())
    }

    fn sum(&self, x: f64, y: f64, dx: usize, dy: usize, region: Region) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let xk = self.basis.pairs[m.k - 1].eigenfunction.derivative(x, dx);
                m.eval_side(region, y, dy) * xk
            })
            .sum()
    }

    /// `D_x^dx D_y^dy u(x, y)`; the upper representation is used at `y = 0`.
    pub fn evaluate(&self, x: f64, y: f64, dx: usize, dy: usize) -> Result<f64> {
        self.check(x, y, dx, dy)?;
        let region = if y < 0.0 { Region::Lower } else { Region::Upper };
        Ok(self.sum(x, y, dx, dy, region))
    }

    /// Same as [`SolutionField::evaluate`] with an explicit side of `y = 0`.
    pub fn evaluate_side(&self, x: f64, y: f64, dx: usize, dy: usize, region: Region) -> Result<f64> {
        self.check(x, y, dx, dy)?;
        Ok(self.sum(x, y, dx, dy, region))
    }

    /// `x,y,u` on `nx * ny` uniform points covering the closed rectangle.
    pub fn grid_csv(&self, nx: usize, ny: usize) -> String {
        let nx = nx.max(2);
        let ny = ny.max(2);
        let a = self.spec.a;
        let mut out = String::from("x,y,u\n");
        for j in 0..ny {
            let y = -a + 2.0 * a * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let x = PI * i as f64 / (nx - 1) as f64;
                let region = if y < 0.0 { Region::Lower } else { Region::Upper };
                let u = self.sum(x, y, 0, 0, region);
                out.push_str(&format!("{x:.17e},{y:.17e},{u:.17e}\n"));
            }
        }
        out
    }

    pub fn metadata(&self) -> Metadata {
        let spec = &self.spec;
        Metadata {
            s: spec.s,
            n: spec.n,
            b: spec.b(),
            a: spec.a,
            a_over_pi: spec.a_over_pi.to_string(),
            gamma: spec.gamma,
            delta: spec.delta,
            q: spec.q,
            chi: spec.chi,
            phi: spec.phi.iter().map(BoundaryFn::describe).collect(),
            psi: spec.psi.iter().map(BoundaryFn::describe).collect(),
            p0: spec.p0.describe(),
            k_max: self.options.k_max,
            k_used: self.k_used,
            modes_in_sum: self.modes.iter().map(|m| m.k).collect(),
            tol: self.options.tol,
            singular_tol: self.options.singular_tol,
            tail_bound: self.tail_bound,
            tail_contribution: self.tail_contribution,
            verdict: self.denominator.verdict.to_string(),
            phase: self.denominator.phase.to_string(),
            delta1: self.denominator.delta1,
            path: self.path,
            epsilon: self.epsilon,
            nonunique: !self.nonunique_modes.is_empty(),
            nonunique_modes: self.nonunique_modes.clone(),
            smoothness_ok: self.smoothness.data_ok,
            smoothness_remark: self.smoothness.remark.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub s: usize,
    pub n: usize,
    pub b: usize,
    pub a: f64,
    pub a_over_pi: String,
    pub gamma: u32,
    pub delta: u32,
    pub q: usize,
    pub chi: usize,
    pub phi: Vec<String>,
    pub psi: Vec<String>,
    pub p0: String,
    pub k_max: usize,
    pub k_used: usize,
    pub modes_in_sum: Vec<usize>,
    pub tol: f64,
    pub singular_tol: f64,
    pub tail_bound: f64,
    pub tail_contribution: f64,
    pub verdict: String,
    pub phase: String,
    pub delta1: Option<f64>,
    pub path: ConvergencePath,
    pub epsilon: f64,
    pub nonunique: bool,
    pub nonunique_modes: Vec<usize>,
    pub smoothness_ok: bool,
    pub smoothness_remark: Option<String>,
}
