//! Asymptotic denominator `sin(rho_k a + phase)`: phase tables, separation
//! of rational `a/pi`, Diophantine scans for irrational `a/pi`, continued
//! fractions, and comparison against measured determinants.

use std::f64::consts::PI;
use std::fmt;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::modal::assemble;
use crate::problem::{AOverPi, IrrationalKind, ProblemSpec, Ratio, TaggedIrrational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "pi/4")]
    QuarterPi,
    #[serde(rename = "pi/2")]
    HalfPi,
    #[serde(rename = "3pi/4")]
    ThreeQuarterPi,
}

impl Phase {
    pub fn value(self) -> f64 {
        match self {
            Phase::Zero => 0.0,
            Phase::QuarterPi => PI / 4.0,
            Phase::HalfPi => PI / 2.0,
            Phase::ThreeQuarterPi => 3.0 * PI / 4.0,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Zero => "0",
            Phase::QuarterPi => "pi/4",
            Phase::HalfPi => "pi/2",
            Phase::ThreeQuarterPi => "3pi/4",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseClass {
    pub phase: Phase,
    pub applicable: bool,
    pub table_row: String,
}

/// Phase of the principal part, keyed on `2n mod 8`, `gamma` and the parity
/// of `q`.
pub fn classify_phase(two_n: usize, gamma: u32, q: usize) -> Result<PhaseClass> {
    let untabulated = Error::CaseNotTabulated { two_n, gamma, q };
    if two_n == 0 || two_n % 2 == 1 {
        return Err(untabulated);
    }
    let q_even = q.is_multiple_of(2);
    let q_form = if q_even { "q = 2j" } else { "q = 2j + 1" };
    let (phase, row) = match (gamma, two_n % 8) {
        (1, 4) => (if q_even { Phase::Zero } else { Phase::HalfPi }, "2n = 8l + 4, gamma = 1"),
        (1, 0) => (if q_even { Phase::HalfPi } else { Phase::Zero }, "2n = 8l, gamma = 1"),
        (1, 2) => (
            if q_even { Phase::QuarterPi } else { Phase::ThreeQuarterPi },
            "2n = 8l + 2, gamma = 1",
        ),
        (1, 6) => (
            if q_even { Phase::ThreeQuarterPi } else { Phase::QuarterPi },
            "2n = 8l + 6, gamma = 1",
        ),
        (2, r) if r % 4 == 0 => (
            if q_even { Phase::QuarterPi } else { Phase::ThreeQuarterPi },
            "2n = 4l, gamma = 2",
        ),
        (2, _) => (
            if q_even { Phase::QuarterPi } else { Phase::ThreeQuarterPi },
            "2n = 4l + 2, gamma = 2",
        ),
        _ => return Err(untabulated),
    };
    Ok(PhaseClass {
        phase,
        applicable: true,
        table_row: format!("{row}, {q_form}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "separated-with-delta1")]
    Separated,
    #[serde(rename = "not-guaranteed")]
    NotGuaranteed,
    #[serde(rename = "diophantine-bounded")]
    DiophantineBounded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Separated => "separated-with-delta1",
            Verdict::NotGuaranteed => "not-guaranteed",
            Verdict::DiophantineBounded => "diophantine-bounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separation {
    pub verdict: Verdict,
    pub delta1: Option<f64>,
    /// `min_{1 <= k2 < t} |sin(pi k2 / t + phase)|` (or `|sin(phase)|` for integer `a/pi`).
    pub residue_floor: f64,
    pub note: String,
}

/// Separation of `|sin(pi k^b a/pi + phase)|` from zero for rational `a/pi`.
pub fn separation_check(a_over_pi: &AOverPi, phase: &PhaseClass) -> Result<Separation> {
    let r = match a_over_pi {
        AOverPi::Rational(r) => *r,
        AOverPi::Irrational(_) => return Err(Error::IrrationalInput),
    };
    let ph = phase.phase.value();
    let floor = if r.is_integer() {
        ph.sin().abs()
    } else {
        (1..r.den)
            .map(|k2| (PI * k2 as f64 / r.den as f64 + ph).sin().abs())
            .fold(f64::INFINITY, f64::min)
    };
    let (separated, note) = match phase.phase {
        Phase::QuarterPi | Phase::ThreeQuarterPi => (
            r.is_integer() || r.den % 4 != 0,
            "requires a/pi integer or denominator not divisible by 4",
        ),
        Phase::HalfPi => (r.is_integer() || r.den % 2 == 1, "requires a/pi integer or odd denominator"),
        Phase::Zero => (
            false,
            "phase 0: k = t (or any k for integer a/pi) hits a zero of sin; no separation is claimed",
        ),
    };
    Ok(Separation {
        verdict: if separated { Verdict::Separated } else { Verdict::NotGuaranteed },
        delta1: separated.then_some(floor),
        residue_floor: floor,
        note: note.into(),
    })
}

fn pow_mod(base: u64, exp: usize, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc = 1u128 % m;
    let b = base as u128 % m;
    for _ in 0..exp {
        acc = acc * b % m;
    }
    acc as u64
}

/// `min_{1 <= k <= 2t} |sin(pi (s k^b mod t) / t + phase)|` by enumeration.
pub fn residue_floor_bruteforce(r: Ratio, b: usize, phase: Phase) -> f64 {
    let t = r.den;
    (1..=2 * t)
        .map(|k| {
            let res = (r.num as u128 * pow_mod(k, b, t) as u128 % t as u128) as f64;
            (PI * res / t as f64 + phase.value()).sin().abs()
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRecord {
    pub k: usize,
    /// `floor(tau k^b) + 1`.
    pub m: u64,
    /// `|tau - (2m - 1) / (2 k^b)|`.
    pub gap: f64,
    /// `k^(b + b eps) |sin(pi k^b tau + phase)|`.
    pub w: f64,
    /// `k^b |sin(pi k^b tau + phase)|`.
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanStats {
    pub tau: String,
    pub b: usize,
    pub epsilon: f64,
    pub phase: Phase,
    pub k_max: usize,
    pub min_w: f64,
    pub argmin_w: usize,
    pub min_raw: f64,
    pub argmin_raw: usize,
    /// `max_k 2 k^b gap`; at most one by construction of `m`.
    pub max_scaled_gap: f64,
    pub algebraic_degree: Option<u32>,
    pub records: Vec<ScanRecord>,
}

/// `floor(tau * m)` and `frac(tau * m)` with the exact surd arithmetic of
/// the tag where available.
fn floor_frac(tau: &AOverPi, m: u64) -> (u64, f64) {
    match tau {
        AOverPi::Rational(r) => {
            let p = r.num as u128 * m as u128;
            ((p / r.den as u128) as u64, (p % r.den as u128) as f64 / r.den as f64)
        }
        AOverPi::Irrational(t) => {
            let (_, frac) = t.floor_parity_and_frac(m);
            let fl = (t.value * m as f64 - frac).round();
            (fl as u64, frac)
        }
    }
}

/// Scan of the denominator against the Diophantine weight `k^(b + b eps)`.
pub fn diophantine_scan(tau: &AOverPi, b: usize, epsilon: f64, phase: &PhaseClass, k_max: usize) -> Result<ScanStats> {
    if b == 0 {
        return Err(Error::Config("b must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon < b as f64) {
        return Err(Error::Config(format!("epsilon = {epsilon} must lie in (0, {b})")));
    }
    if k_max == 0 {
        return Err(Error::Config("k_max must be positive".into()));
    }
    let tau_value = tau.value();
    let exponent = b as f64 * (1.0 + epsilon);
    let mut records = Vec::with_capacity(k_max);
    let (mut min_w, mut argmin_w) = (f64::INFINITY, 0);
    let (mut min_raw, mut argmin_raw) = (f64::INFINITY, 0);
    let mut max_scaled_gap = 0.0f64;
    for k in 1..=k_max {
        let kb = (k as u64).pow(b as u32);
        let kbf = kb as f64;
        let (fl, _) = floor_frac(tau, kb);
        let m = fl + 1;
        let gap = (tau_value - (2 * m - 1) as f64 / (2.0 * kbf)).abs();
        let sin = (PI * tau.half_turns(kbf) + phase.phase.value()).sin().abs();
        let w = (k as f64).powf(exponent) * sin;
        let raw = kbf * sin;
        if w < min_w {
            min_w = w;
            argmin_w = k;
        }
        if raw < min_raw {
            min_raw = raw;
            argmin_raw = k;
        }
        max_scaled_gap = max_scaled_gap.max(2.0 * kbf * gap);
        records.push(ScanRecord { k, m, gap, w, raw });
    }
    let (name, degree) = match tau {
        AOverPi::Rational(r) => (r.to_string(), None),
        AOverPi::Irrational(t) => (t.name.clone(), t.algebraic_degree()),
    };
    Ok(ScanStats {
        tau: name,
        b,
        epsilon,
        phase: phase.phase,
        k_max,
        min_w,
        argmin_w,
        min_raw,
        argmin_raw,
        max_scaled_gap,
        algebraic_degree: degree,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuedFraction {
    pub quotients: Vec<u64>,
    pub convergents: Vec<(u128, u128)>,
    /// The expansion ended because the value is rational (exactly or to
    /// working precision).
    pub terminated: bool,
    /// Period of the tail for exactly handled quadratic surds.
    pub period: Option<usize>,
    /// Some partial quotient beyond the first exceeds 1000.
    pub near_rational: bool,
}

const HUGE_QUOTIENT: u64 = 1000;

fn finish(quotients: Vec<u64>, terminated: bool, period: Option<usize>) -> ContinuedFraction {
    let mut convergents = Vec::with_capacity(quotients.len());
    let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, 0u128, 1u128);
    for &a in &quotients {
        let p = a as u128 * p0 + p1;
        let q = a as u128 * q0 + q1;
        convergents.push((p, q));
        p1 = p0;
        q1 = q0;
        p0 = p;
        q0 = q;
    }
    let near_rational = quotients.iter().skip(1).any(|&a| a > HUGE_QUOTIENT);
    ContinuedFraction {
        quotients,
        convergents,
        terminated,
        period,
        near_rational,
    }
}

/// Floating-point expansion; stops after `depth` quotients, on an exact
/// hit, or once the convergent reproduces `tau` to working precision.
pub fn continued_fraction(tau: f64, depth: usize) -> ContinuedFraction {
    assert!(tau > 0.0 && tau.is_finite());
    let depth = depth.min(40);
    let mut quotients = Vec::new();
    let mut x = tau;
    let mut terminated = false;
    let (mut p0, mut q0, mut p1, mut q1) = (1f64, 0f64, 0f64, 1f64);
    while quotients.len() < depth {
        let nearest = x.round();
        if !quotients.is_empty() && (x - nearest).abs() <= 1e-9 * x {
            quotients.push(nearest as u64);
            terminated = true;
            break;
        }
        let a = x.floor();
        quotients.push(a as u64);
        let p = a * p0 + p1;
        let q = a * q0 + q1;
        p1 = p0;
        q1 = q0;
        p0 = p;
        q0 = q;
        let frac = x - a;
        if frac <= 4.0 * f64::EPSILON * x.max(1.0) || (p / q - tau).abs() <= 2.0 * f64::EPSILON * tau {
            terminated = true;
            break;
        }
        x = 1.0 / frac;
    }
    finish(quotients, terminated, None)
}

/// Euclid's algorithm on `num / den`.
pub fn continued_fraction_rational(r: Ratio) -> ContinuedFraction {
    let (mut a, mut b) = (r.num, r.den);
    let mut quotients = Vec::new();
    while b != 0 {
        quotients.push(a / b);
        let rem = a % b;
        a = b;
        b = rem;
    }
    finish(quotients, true, None)
}

/// Exact expansion of `sqrt(n)` (periodic for non-squares).
pub fn continued_fraction_sqrt(n: u64, depth: usize) -> ContinuedFraction {
    let a0 = n.isqrt();
    if a0 * a0 == n {
        return finish(vec![a0], true, None);
    }
    let depth = depth.clamp(1, 40);
    let (mut m, mut d, mut a) = (0u64, 1u64, a0);
    let mut quotients = vec![a0];
    let mut period = None;
    while quotients.len() < depth {
        m = d * a - m;
        d = (n - m * m) / d;
        a = (a0 + m) / d;
        quotients.push(a);
        if period.is_none() && a == 2 * a0 {
            period = Some(quotients.len() - 1);
        }
    }
    finish(quotients, false, period)
}

/// Dispatches on the representation of `a/pi`.
pub fn continued_fraction_of(tau: &AOverPi, depth: usize) -> ContinuedFraction {
    match tau {
        AOverPi::Rational(r) => continued_fraction_rational(*r),
        AOverPi::Irrational(TaggedIrrational {
            kind: IrrationalKind::Sqrt(n),
            ..
        }) => continued_fraction_sqrt(*n, depth),
        AOverPi::Irrational(TaggedIrrational {
            kind: IrrationalKind::Golden,
            ..
        }) => finish(vec![1; depth.clamp(1, 40)], false, Some(1)),
        AOverPi::Irrational(t) => continued_fraction(t.value, depth),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub k: usize,
    pub lambda: f64,
    pub det_scaled: f64,
    pub delta4: f64,
    pub normalized_det: f64,
    /// `normalized_det - delta4`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoteComparison {
    pub l_hat: f64,
    pub records: Vec<ComparisonRecord>,
    /// `sup |residual|` over the last quarter of the range.
    pub sup_residual: f64,
    pub sup_first_half: f64,
    pub sup_second_half: f64,
}

fn least_squares_amplitude(d: &[f64], s: &[f64]) -> Option<f64> {
    let ss: f64 = s.iter().map(|v| v * v).sum();
    if ss <= 1e-8 * s.len() as f64 {
        return None;
    }
    Some(d.iter().zip(s).map(|(a, b)| a * b).sum::<f64>() / ss)
}

/// Calibrates one amplitude on the upper half of the records and reports
/// the remainder `d_k / L - delta4_k`.
pub fn compare_with_asymptote(ks: &[usize], lambdas: &[f64], dets: &[f64], delta4: &[f64]) -> Result<AsymptoteComparison> {
    let len = ks.len();
    if len < 4 {
        return Err(Error::CalibrationUnstable {
            reason: "at least four modes are needed".into(),
        });
    }
    let half = len / 2;
    let fit_d = &dets[half..];
    let fit_s = &delta4[half..];
    let unstable = |reason: &str| Error::CalibrationUnstable { reason: reason.into() };
    let l_hat = least_squares_amplitude(fit_d, fit_s)
        .ok_or_else(|| unstable("the asymptotic sine vanishes on the fit window"))?;
    let mid = fit_d.len() / 2;
    let l1 = least_squares_amplitude(&fit_d[..mid], &fit_s[..mid]);
    let l2 = least_squares_amplitude(&fit_d[mid..], &fit_s[mid..]);
    match (l1, l2) {
        (Some(a), Some(b)) if (a - b).abs() <= 0.1 * a.abs().max(b.abs()) => {}
        (Some(a), Some(b)) => {
            return Err(Error::CalibrationUnstable {
                reason: format!("amplitude {a:.6e} vs {b:.6e} on the two halves of the fit window"),
            })
        }
        _ => return Err(unstable("the asymptotic sine vanishes on half of the fit window")),
    }
    if l_hat == 0.0 {
        return Err(unstable("calibrated amplitude is zero"));
    }
    let records: Vec<ComparisonRecord> = (0..len)
        .map(|i| {
            let normalized_det = dets[i] / l_hat;
            ComparisonRecord {
                k: ks[i],
                lambda: lambdas[i],
                det_scaled: dets[i],
                delta4: delta4[i],
                normalized_det,
                residual: normalized_det - delta4[i],
            }
        })
        .collect();
    let sup = |rs: &[ComparisonRecord]| rs.iter().fold(0.0f64, |m, r| m.max(r.residual.abs()));
    Ok(AsymptoteComparison {
        l_hat,
        sup_residual: sup(&records[len - len / 4..]),
        sup_first_half: sup(&records[..half]),
        sup_second_half: sup(&records[half..]),
        records,
    })
}

/// `lambda^(1/(2n))`, snapped to `k^b` when `lambda` is exactly `k^(2s)`.
pub fn mode_rho(lambda: f64, n: usize, k: usize, b: usize) -> f64 {
    let kb = (k as f64).powi(b as i32);
    if lambda == kb.powi(2 * n as i32) {
        kb
    } else {
        lambda.powf(1.0 / (2 * n) as f64)
    }
}

/// `sin(rho a + phase)` evaluated through the exact half-turn reduction.
pub fn delta4(a_over_pi: &AOverPi, rho: f64, phase: Phase) -> f64 {
    (PI * a_over_pi.half_turns(rho) + phase.value()).sin()
}

/// Scaled determinants of the problem's modes against the tabulated phase.
pub fn asymptote_comparison(
    spec: &ProblemSpec,
    basis: &EigenBasis,
    k_range: RangeInclusive<usize>,
) -> Result<AsymptoteComparison> {
    let phase = classify_phase(2 * spec.n, spec.gamma, spec.q)?;
    let zeros = vec![0.0; spec.n];
    let (mut ks, mut ls, mut ds, mut s4) = (vec![], vec![], vec![], vec![]);
    for k in k_range {
        let pair = &basis.pairs[k - 1];
        let sys = assemble(spec, pair, &zeros, &zeros);
        ks.push(k);
        ls.push(pair.lambda);
        ds.push(sys.det_scaled);
        let rho = mode_rho(pair.lambda, spec.n, k, spec.b());
        s4.push(delta4(&spec.a_over_pi, rho, phase.phase));
    }
    compare_with_asymptote(&ks, &ls, &ds, &s4)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub k: usize,
    pub w: f64,
}

/// Everything known about the denominators of one problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenominatorReport {
    pub phase: Phase,
    pub table_row: String,
    /// Upper-boundary orders do not enter the tables; recorded for reference.
    pub chi: usize,
    pub delta: u32,
    pub a_over_pi: String,
    pub verdict: Verdict,
    pub delta1: Option<f64>,
    pub note: String,
    pub scan_min_w: Option<f64>,
    pub scan_min_raw: Option<f64>,
    pub scan: Vec<ScanPoint>,
    pub calibration: Option<f64>,
    pub calibration_error: Option<String>,
    pub sup_residual: Option<f64>,
    pub records: Vec<ComparisonRecord>,
}

impl DenominatorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Separation verdict (rational `a/pi`) or Diophantine scan (irrational),
/// plus the measured comparison when at least eight modes are available.
pub fn denominator_report(
    spec: &ProblemSpec,
    basis: Option<&EigenBasis>,
    epsilon: f64,
    scan_k_max: usize,
) -> Result<DenominatorReport> {
    let phase = classify_phase(2 * spec.n, spec.gamma, spec.q)?;
    let mut report = DenominatorReport {
        phase: phase.phase,
        table_row: phase.table_row.clone(),
        chi: spec.chi,
        delta: spec.delta,
        a_over_pi: spec.a_over_pi.to_string(),
        verdict: Verdict::NotGuaranteed,
        delta1: None,
        note: String::new(),
        scan_min_w: None,
        scan_min_raw: None,
        scan: Vec::new(),
        calibration: None,
        calibration_error: None,
        sup_residual: None,
        records: Vec::new(),
    };
    match &spec.a_over_pi {
        AOverPi::Rational(_) => {
            let sep = separation_check(&spec.a_over_pi, &phase)?;
            report.verdict = sep.verdict;
            report.delta1 = sep.delta1;
            report.note = sep.note;
        }
        AOverPi::Irrational(t) => {
            let stats = diophantine_scan(&spec.a_over_pi, spec.b(), epsilon, &phase, scan_k_max)?;
            let algebraic = t.algebraic_degree().is_some_and(|p| p >= 2);
            report.verdict = if algebraic && stats.min_w > 0.0 {
                Verdict::DiophantineBounded
            } else {
                Verdict::NotGuaranteed
            };
            report.note = if algebraic {
                format!("algebraic of degree {}", t.algebraic_degree().unwrap_or(0))
            } else {
                "no algebraic degree known; the scan is empirical only".into()
            };
            report.scan_min_w = Some(stats.min_w);
            report.scan_min_raw = Some(stats.min_raw);
            report.scan = stats.records.iter().map(|r| ScanPoint { k: r.k, w: r.w }).collect();
        }
    }
    if let Some(basis) = basis {
        if basis.len() >= 8 {
            match asymptote_comparison(spec, basis, 1..=basis.len()) {
                Ok(c) => {
                    report.calibration = Some(c.l_hat);
                    report.sup_residual = Some(c.sup_residual);
                    report.records = c.records;
                }
                Err(e) => report.calibration_error = Some(e.to_string()),
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_rows() {
        assert_eq!(classify_phase(4, 1, 1).unwrap().phase, Phase::HalfPi);
        assert_eq!(classify_phase(2, 1, 0).unwrap().phase, Phase::QuarterPi);
        assert_eq!(classify_phase(4, 2, 1).unwrap().phase, Phase::ThreeQuarterPi);
        assert_eq!(classify_phase(6, 2, 0).unwrap().phase, Phase::QuarterPi);
        assert_eq!(classify_phase(4, 1, 0).unwrap().phase, Phase::Zero);
        assert_eq!(classify_phase(8, 1, 0).unwrap().phase, Phase::HalfPi);
        assert_eq!(classify_phase(6, 1, 0).unwrap().phase, Phase::ThreeQuarterPi);
    }

    #[test]
    fn untabulated_rows() {
        assert!(matches!(classify_phase(3, 1, 0), Err(Error::CaseNotTabulated { .. })));
        assert!(matches!(classify_phase(4, 3, 0), Err(Error::CaseNotTabulated { .. })));
        assert!(matches!(classify_phase(0, 1, 0), Err(Error::CaseNotTabulated { .. })));
    }

    fn ratio(s: &str) -> AOverPi {
        AOverPi::parse(s).unwrap()
    }

    #[test]
    fn separation_examples() {
        let half = classify_phase(4, 1, 1).unwrap();
        let s = separation_check(&ratio("1"), &half).unwrap();
        assert_eq!(s.verdict, Verdict::Separated);
        assert!((s.delta1.unwrap() - 1.0).abs() < 1e-15);
        let s = separation_check(&ratio("1/3"), &half).unwrap();
        assert!((s.delta1.unwrap() - 0.5).abs() < 1e-15);
        let quarter = classify_phase(2, 1, 0).unwrap();
        let s = separation_check(&ratio("1/4"), &quarter).unwrap();
        assert_eq!(s.verdict, Verdict::NotGuaranteed);
        assert!(s.delta1.is_none());
        assert!(matches!(
            separation_check(&ratio("irrational:sqrt2"), &half),
            Err(Error::IrrationalInput)
        ));
    }

    #[test]
    fn scan_m_selection() {
        let phase = classify_phase(4, 1, 1).unwrap();
        let st = diophantine_scan(&ratio("irrational:sqrt2"), 1, 0.5, &phase, 10).unwrap();
        let r = &st.records[4];
        assert_eq!(r.m, 8);
        assert!(r.gap <= 0.1);
        assert!(st.max_scaled_gap <= 1.0 + 1e-12);
    }

    #[test]
    fn scan_integer_tau() {
        let phase = classify_phase(4, 1, 1).unwrap();
        let st = diophantine_scan(&ratio("2"), 1, 0.5, &phase, 50).unwrap();
        for r in &st.records {
            assert!((r.w - (r.k as f64).powf(1.5)).abs() < 1e-9 * r.w);
        }
    }

    #[test]
    fn scan_rejects_bad_epsilon() {
        let phase = classify_phase(4, 1, 1).unwrap();
        assert!(diophantine_scan(&ratio("2"), 1, 1.0, &phase, 5).is_err());
    }

    #[test]
    fn continued_fractions() {
        let cf = continued_fraction_of(&ratio("irrational:sqrt2"), 8);
        assert_eq!(cf.quotients, vec![1, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(cf.period, Some(1));
        let cf = continued_fraction_rational(Ratio::new(3, 7).unwrap());
        assert_eq!(cf.quotients, vec![0, 2, 3]);
        assert_eq!(*cf.convergents.last().unwrap(), (3, 7));
        let fl = continued_fraction(3.0 / 7.0, 20);
        assert_eq!(fl.quotients, vec![0, 2, 3]);
        assert!(fl.terminated);
        let f2 = continued_fraction(2f64.sqrt(), 12);
        assert_eq!(f2.quotients[..6], [1, 2, 2, 2, 2, 2]);
        assert!(!f2.near_rational);
        let near = continued_fraction(1.0 + 1e-5, 5);
        assert!(near.near_rational);
    }

    #[test]
    fn synthetic_comparison_is_exact() {
        let ks: Vec<usize> = (1..=20).collect();
        let s4: Vec<f64> = ks.iter().map(|&k| (k as f64 * 0.7 + 0.3).sin()).collect();
        let ls = vec![1.0; 20];
        let c = compare_with_asymptote(&ks, &ls, &s4, &s4).unwrap();
        assert!((c.l_hat - 1.0).abs() < 1e-14);
        assert!(c.records.iter().all(|r| r.residual.abs() < 1e-14));
    }

    #[test]
    fn vanishing_sine_is_unstable() {
        let ks: Vec<usize> = (1..=20).collect();
        let z = vec![0.0; 20];
        assert!(matches!(
            compare_with_asymptote(&ks, &z, &z, &z),
            Err(Error::CalibrationUnstable { .. })
        ));
    }
}
