//! Problem parameters, the exact representation of `a / pi`, boundary data
//! and the validation report that gates every downstream computation.

use std::f64::consts::PI;
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;

/// Positive rational `num / den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Option<Ratio> {
        if num == 0 || den == 0 {
            return None;
        }
        let g = num.gcd(&den);
        Some(Ratio {
            num: num / g,
            den: den / g,
        })
    }

    pub fn parse(text: &str) -> Result<Ratio> {
        let text = text.trim();
        let (p, q) = match text.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (text, "1"),
        };
        let p: u64 = p
            .parse()
            .map_err(|_| Error::Config(format!("bad rational numerator in {text:?}")))?;
        let q: u64 = q
            .parse()
            .map_err(|_| Error::Config(format!("bad rational denominator in {text:?}")))?;
        Ratio::new(p, q).ok_or_else(|| Error::Config(format!("rational {text:?} must be positive")))
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum IrrationalKind {
    /// `sqrt(N)` for a non-square `N`.
    Sqrt(u64),
    /// `cbrt(N)` for a non-cube `N`.
    Cbrt(u64),
    /// `(1 + sqrt 5) / 2`.
    Golden,
    /// Euler's number.
    E,
    /// A decimal literal with its declared number of significant digits.
    Decimal { digits: u32 },
}

/// An irrational value of `a / pi` carried with a symbolic tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaggedIrrational {
    pub name: String,
    pub value: f64,
    pub kind: IrrationalKind,
}

impl TaggedIrrational {
    pub fn parse(text: &str) -> Result<TaggedIrrational> {
        let t = text.trim();
        let lower = t.to_ascii_lowercase();
        let radicand = |prefix: &str| -> Option<u64> {
            let rest = lower.strip_prefix(prefix)?;
            let rest = rest.trim_start_matches('(').trim_end_matches(')');
            rest.parse().ok()
        };
        if let Some(n) = radicand("sqrt") {
            let r = (n as u128).isqrt();
            if r * r == n as u128 {
                return Err(Error::Config(format!("sqrt({n}) is an integer, not irrational")));
            }
            return Ok(TaggedIrrational {
                name: format!("sqrt{n}"),
                value: (n as f64).sqrt(),
                kind: IrrationalKind::Sqrt(n),
            });
        }
        if let Some(n) = radicand("cbrt") {
            let r = icbrt(n as u128);
            if r * r * r == n as u128 {
                return Err(Error::Config(format!("cbrt({n}) is an integer, not irrational")));
            }
            return Ok(TaggedIrrational {
                name: format!("cbrt{n}"),
                value: (n as f64).cbrt(),
                kind: IrrationalKind::Cbrt(n),
            });
        }
        match lower.as_str() {
            "golden" | "phi" => {
                return Ok(TaggedIrrational {
                    name: "golden".into(),
                    value: (1.0 + 5f64.sqrt()) / 2.0,
                    kind: IrrationalKind::Golden,
                })
            }
            "e" => {
                return Ok(TaggedIrrational {
                    name: "e".into(),
                    value: std::f64::consts::E,
                    kind: IrrationalKind::E,
                })
            }
            _ => {}
        }
        let value: f64 = t
            .parse()
            .map_err(|_| Error::Config(format!("unrecognised irrational {t:?}")))?;
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Config(format!("irrational {t:?} must be positive")));
        }
        let digits = t.chars().filter(|c| c.is_ascii_digit()).count() as u32;
        Ok(TaggedIrrational {
            name: t.to_string(),
            value,
            kind: IrrationalKind::Decimal { digits },
        })
    }

    /// Algebraic degree when known (`None` for transcendental or untagged decimals).
    pub fn algebraic_degree(&self) -> Option<u32> {
        match self.kind {
            IrrationalKind::Sqrt(_) | IrrationalKind::Golden => Some(2),
            IrrationalKind::Cbrt(_) => Some(3),
            IrrationalKind::E | IrrationalKind::Decimal { .. } => None,
        }
    }

    /// `(floor(value * m) mod 2, frac(value * m))`, exact up to the final
    /// rounding for the quadratic and cubic surds.
    pub fn floor_parity_and_frac(&self, m: u64) -> (u8, f64) {
        let m = m as u128;
        match self.kind {
            IrrationalKind::Sqrt(n) => {
                let (fl, fr) = sqrt_floor_frac(n as u128 * m * m);
                ((fl % 2) as u8, fr)
            }
            IrrationalKind::Golden => {
                // (m + sqrt(5 m^2)) / 2
                let (fl, fr) = sqrt_floor_frac(5 * m * m);
                let s = m + fl;
                let half = s / 2;
                let frac = ((s % 2) as f64 + fr) / 2.0;
                ((half % 2) as u8, frac)
            }
            IrrationalKind::Cbrt(n) => {
                let x = n as u128 * m * m * m;
                let r = icbrt(x);
                let c = (x as f64).cbrt();
                let rf = r as f64;
                let frac = (x - r * r * r) as f64 / (c * c + c * rf + rf * rf);
                ((r % 2) as u8, frac.clamp(0.0, 1.0 - f64::EPSILON))
            }
            IrrationalKind::E | IrrationalKind::Decimal { .. } => {
                let v = self.value * m as f64;
                let fl = v.floor();
                ((fl.rem_euclid(2.0)) as u8, v - fl)
            }
        }
    }
}

fn sqrt_floor_frac(x: u128) -> (u128, f64) {
    let r = x.isqrt();
    let frac = (x - r * r) as f64 / ((x as f64).sqrt() + r as f64);
    (r, frac.clamp(0.0, 1.0 - f64::EPSILON))
}

fn icbrt(x: u128) -> u128 {
    let mut r = (x as f64).cbrt().round() as u128;
    while r * r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// The ratio `a / pi`, exact when rational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AOverPi {
    Rational(Ratio),
    Irrational(TaggedIrrational),
}

impl AOverPi {
    /// Parses `"p/q"`, `"p"` or `"irrational:<name-or-decimal>"`.
    pub fn parse(text: &str) -> Result<AOverPi> {
        let t = text.trim();
        match t.strip_prefix("irrational:") {
            Some(rest) => Ok(AOverPi::Irrational(TaggedIrrational::parse(rest)?)),
            None => Ok(AOverPi::Rational(Ratio::parse(t)?)),
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            AOverPi::Rational(r) => r.value(),
            AOverPi::Irrational(t) => t.value,
        }
    }

    /// `a = pi * (a / pi)`.
    pub fn a(&self) -> f64 {
        PI * self.value()
    }

    /// `(rho * a / pi) mod 2`, so that `sin(rho * a + phase)` can be
    /// evaluated as `sin(pi * half_turns + phase)` without losing the
    /// integer part of a large argument.
    pub fn half_turns(&self, rho: f64) -> f64 {
        let whole = rho.floor();
        let rest = rho - whole;
        let exact_int = (0.0..9.0e15).contains(&whole);
        match self {
            AOverPi::Rational(r) if exact_int => {
                let w = whole as u128;
                let m = (w * r.num as u128) % (2 * r.den as u128);
                (m as f64 / r.den as f64 + rest * r.value()).rem_euclid(2.0)
            }
            AOverPi::Irrational(t) if exact_int => {
                let (parity, frac) = t.floor_parity_and_frac(whole as u64);
                (parity as f64 + frac + rest * t.value).rem_euclid(2.0)
            }
            _ => (rho * self.value()).rem_euclid(2.0),
        }
    }
}

impl fmt::Display for AOverPi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AOverPi::Rational(r) => write!(f, "{r}"),
            AOverPi::Irrational(t) => write!(f, "irrational:{}", t.name),
        }
    }
}

/// A function on `[0, pi]`, given as an expression or as uniform samples
/// (endpoints included).
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryFn {
    Expr { source: String, expr: Expr },
    Samples(Vec<f64>),
}

impl BoundaryFn {
    pub fn parse(source: &str) -> Result<BoundaryFn> {
        Ok(BoundaryFn::Expr {
            source: source.trim().to_string(),
            expr: Expr::parse(source)?,
        })
    }

    pub fn zero() -> BoundaryFn {
        BoundaryFn::Expr {
            source: "0".into(),
            expr: Expr::Const(0.0),
        }
    }

    pub fn samples(values: Vec<f64>) -> BoundaryFn {
        BoundaryFn::Samples(values)
    }

    /// Point value; sampled data is interpolated linearly.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            BoundaryFn::Expr { expr, .. } => expr.eval(x),
            BoundaryFn::Samples(v) => {
                let n = v.len() - 1;
                let t = (x / PI * n as f64).clamp(0.0, n as f64);
                let i = (t.floor() as usize).min(n.saturating_sub(1));
                let w = t - i as f64;
                v[i] * (1.0 - w) + v[(i + 1).min(n)] * w
            }
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            BoundaryFn::Expr { expr, .. } => expr.as_constant(),
            BoundaryFn::Samples(v) => {
                let first = *v.first()?;
                v.iter().all(|&s| s == first).then_some(first)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    /// Derivatives `f, f', ..., f^(order)` at `x`; `None` for sampled data.
    pub fn derivatives(&self, x: f64, order: usize) -> Option<Vec<f64>> {
        match self {
            BoundaryFn::Expr { expr, .. } => Some(expr.derivatives(x, order)),
            BoundaryFn::Samples(_) => None,
        }
    }

    pub fn sample_count(&self) -> Option<usize> {
        match self {
            BoundaryFn::Expr { .. } => None,
            BoundaryFn::Samples(v) => Some(v.len()),
        }
    }

    /// Short human-readable description used in reports.
    pub fn describe(&self) -> String {
        match self {
            BoundaryFn::Expr { source, .. } => source.clone(),
            BoundaryFn::Samples(v) => format!("<{} samples>", v.len()),
        }
    }

    /// Returns the same function multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> BoundaryFn {
        match self {
            BoundaryFn::Expr { source, expr } => BoundaryFn::Expr {
                source: format!("{factor}*({source})"),
                expr: Expr::Mul(Box::new(Expr::Const(factor)), Box::new(expr.clone())),
            },
            BoundaryFn::Samples(v) => BoundaryFn::Samples(v.iter().map(|s| s * factor).collect()),
        }
    }
}

/// All scalar parameters and data of the boundary value problem.
///
/// `phi[r]` is prescribed as `D_y^{q + gamma r} u(x, -a)` and `psi[r]` as
/// `D_y^{chi + delta r} u(x, a)`, `r = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub s: usize,
    pub n: usize,
    pub a: f64,
    pub a_over_pi: AOverPi,
    pub gamma: u32,
    pub delta: u32,
    pub q: usize,
    pub chi: usize,
    pub phi: Vec<BoundaryFn>,
    pub psi: Vec<BoundaryFn>,
    pub p0: BoundaryFn,
}

impl ProblemSpec {
    /// Zero data, `p0 = 0`, `gamma = delta = 1`, `q = chi = 0`.
    pub fn new(s: usize, n: usize, a_over_pi: AOverPi) -> ProblemSpec {
        ProblemSpec {
            s,
            n,
            a: a_over_pi.a(),
            a_over_pi,
            gamma: 1,
            delta: 1,
            q: 0,
            chi: 0,
            phi: (0..n).map(|_| BoundaryFn::zero()).collect(),
            psi: (0..n).map(|_| BoundaryFn::zero()).collect(),
            p0: BoundaryFn::zero(),
        }
    }

    pub fn with_orders(mut self, gamma: u32, q: usize, delta: u32, chi: usize) -> Self {
        self.gamma = gamma;
        self.q = q;
        self.delta = delta;
        self.chi = chi;
        self
    }

    pub fn with_phi(mut self, r: usize, f: BoundaryFn) -> Self {
        self.phi[r] = f;
        self
    }

    pub fn with_psi(mut self, r: usize, f: BoundaryFn) -> Self {
        self.psi[r] = f;
        self
    }

    pub fn with_p0(mut self, p0: BoundaryFn) -> Self {
        self.p0 = p0;
        self
    }

    /// `b = s / n` (integer division; meaningful once validated).
    pub fn b(&self) -> usize {
        self.s.checked_div(self.n).unwrap_or(0)
    }

    /// Derivative order of the `r`-th condition on `y = -a`.
    pub fn lower_order(&self, r: usize) -> usize {
        self.q + self.gamma as usize * r
    }

    /// Derivative order of the `r`-th condition on `y = +a`.
    pub fn upper_order(&self, r: usize) -> usize {
        self.chi + self.delta as usize * r
    }

    /// Same problem with all boundary data multiplied by `factor`.
    pub fn scaled_data(&self, factor: f64) -> ProblemSpec {
        let mut out = self.clone();
        out.phi = self.phi.iter().map(|f| f.scaled(factor)).collect();
        out.psi = self.psi.iter().map(|f| f.scaled(factor)).collect();
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let mut push = |id: &'static str, message: String| v.push(Violation { id, message });

        if self.s == 0 {
            push("s_positive", "s must be a positive integer".into());
        }
        if self.n == 0 {
            push("n_positive", "n must be a positive integer".into());
        }
        if self.s > 0 && self.n > 0 && !self.s.is_multiple_of(self.n) {
            push("b_integer", format!("b = s/n not integer ({}/{})", self.s, self.n));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            push("a_positive", format!("a must be positive, got {}", self.a));
        } else {
            let expect = self.a_over_pi.a();
            if (self.a - expect).abs() > 1e-9 * expect.max(1.0) {
                push(
                    "a_consistent",
                    format!("a = {} disagrees with pi * a_over_pi = {expect}", self.a),
                );
            }
        }
        if self.gamma != self.delta {
            push(
                "gamma_delta_equal",
                format!("gamma = {} and delta = {} must coincide", self.gamma, self.delta),
            );
        }
        for (name, stride) in [("gamma", self.gamma), ("delta", self.delta)] {
            if stride != 1 && stride != 2 {
                push("stride_range", format!("{name} = {stride} not in {{1,2}}"));
            }
        }
        let check_base = |label: &'static str, value: usize, stride: u32, v: &mut Vec<Violation>| {
            let ok = match stride {
                1 => value <= self.n,
                2 => value <= 1,
                _ => true,
            };
            if !ok {
                let range = if stride == 2 {
                    "{0,1}".to_string()
                } else {
                    format!("{{0,...,{}}}", self.n)
                };
                let sym = if label == "q" { "gamma" } else { "delta" };
                v.push(Violation {
                    id: if label == "q" { "q_range" } else { "chi_range" },
                    message: format!("{label} ∉ {range} for {sym}={stride} ({label} = {value})"),
                });
            }
        };
        check_base("q", self.q, self.gamma, &mut v);
        check_base("chi", self.chi, self.delta, &mut v);

        if self.phi.len() != self.n {
            v.push(Violation {
                id: "phi_count",
                message: format!("expected {} phi functions, got {}", self.n, self.phi.len()),
            });
        }
        if self.psi.len() != self.n {
            v.push(Violation {
                id: "psi_count",
                message: format!("expected {} psi functions, got {}", self.n, self.psi.len()),
            });
        }
        for (label, fs) in [("phi", &self.phi), ("psi", &self.psi)] {
            for (r, f) in fs.iter().enumerate() {
                if let BoundaryFn::Samples(s) = f {
                    if s.len() < 3 || s.iter().any(|x| !x.is_finite()) {
                        v.push(Violation {
                            id: "samples_finite",
                            message: format!("{label}[{r}] needs at least 3 finite samples"),
                        });
                    }
                }
            }
        }
        let p0_min = match &self.p0 {
            BoundaryFn::Samples(s) => s.iter().cloned().fold(f64::INFINITY, f64::min),
            f => (0..=1024)
                .map(|i| f.eval(PI * i as f64 / 1024.0))
                .fold(f64::INFINITY, f64::min),
        };
        if !(p0_min >= 0.0) {
            v.push(Violation {
                id: "p0_nonnegative",
                message: format!("p0 must be nonnegative on [0, pi]; minimum sample {p0_min}"),
            });
        }
        ValidationReport { violations: v }
    }

    /// Validation as a `Result`, for callers that cannot proceed otherwise.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_pass() {
            Ok(())
        } else {
            Err(Error::Validation(report))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub id: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, id: &str) -> bool {
        self.violations.iter().any(|v| v.id == id)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return write!(f, "pass");
        }
        let msgs: Vec<&str> = self.violations.iter().map(|v| v.message.as_str()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}
