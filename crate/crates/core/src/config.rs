//! TOML run configuration.
//!
//! ```toml
//! s = 1
//! n = 1
//! a_over_pi = "1"            # "p/q" or "irrational:sqrt2"
//! gamma = 1
//! q = 0
//! phi = ["sin(x) + 0.3*sin(2*x)"]
//! psi = ["0"]
//! p0 = "0"                    # expressions, or "csv:<path>" for samples
//!
//! [run]
//! k = 10
//! output = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::problem::{AOverPi, BoundaryFn, ProblemSpec};
use crate::series::SolveOptions;
use crate::verify::Thresholds;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    s: usize,
    n: usize,
    a_over_pi: String,
    a: Option<f64>,
    #[serde(default = "one")]
    gamma: u32,
    #[serde(default)]
    q: usize,
    delta: Option<u32>,
    #[serde(default)]
    chi: usize,
    #[serde(default)]
    phi: Vec<String>,
    #[serde(default)]
    psi: Vec<String>,
    #[serde(default = "zero_source")]
    p0: String,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    thresholds: RawThresholds,
}

fn one() -> u32 {
    1
}

fn zero_source() -> String {
    "0".into()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    k: Option<usize>,
    tol: Option<f64>,
    singular_tol: Option<f64>,
    ortho_rel: Option<f64>,
    epsilon: Option<f64>,
    scan_k_max: Option<usize>,
    grid: Option<[usize; 2]>,
    residual_grid: Option<[usize; 2]>,
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    pde: Option<f64>,
    fd: Option<f64>,
    boundary: Option<f64>,
    matching: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    pub solve: SolveOptions,
    /// Solution CSV grid `(nx, ny)`.
    pub grid: (usize, usize),
    pub residual_grid: (usize, usize),
    pub thresholds: Thresholds,
    pub output: PathBuf,
}

/// Reads sampled data: one value per line, or `x,value` rows (last column
/// is used); non-numeric header lines are skipped.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && i == 0 => continue,
            Err(_) => {
                return Err(Error::Config(format!(
                    "{}:{}: not a number: {field:?}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

fn boundary_fn(source: &str, base: &Path) -> Result<BoundaryFn> {
    match source.trim().strip_prefix("csv:") {
        Some(p) => {
            let path = base.join(p.trim());
            Ok(BoundaryFn::samples(read_samples(&path)?))
        }
        None => BoundaryFn::parse(source),
    }
}

impl RunConfig {
    /// Parses TOML text; relative CSV paths resolve against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<RunConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let a_over_pi = AOverPi::parse(&raw.a_over_pi)?;
        let mut spec = ProblemSpec::new(raw.s, raw.n, a_over_pi);
        if let Some(a) = raw.a {
            spec.a = a;
        }
        spec = spec.with_orders(raw.gamma, raw.q, raw.delta.unwrap_or(raw.gamma), raw.chi);
        let funcs = |list: &[String]| -> Result<Vec<BoundaryFn>> {
            if list.is_empty() {
                return Ok(vec![BoundaryFn::zero(); raw.n]);
            }
            list.iter().map(|s| boundary_fn(s, base)).collect()
        };
        spec.phi = funcs(&raw.phi)?;
        spec.psi = funcs(&raw.psi)?;
        spec.p0 = boundary_fn(&raw.p0, base)?;

        let defaults = SolveOptions::default();
        let run = raw.run;
        let solve = SolveOptions {
            k_max: run.k.unwrap_or(defaults.k_max),
            tol: run.tol.unwrap_or(defaults.tol),
            singular_tol: run.singular_tol.unwrap_or(defaults.singular_tol),
            ortho_rel: run.ortho_rel.unwrap_or(defaults.ortho_rel),
            epsilon: run.epsilon,
            scan_k_max: run.scan_k_max.unwrap_or(defaults.scan_k_max),
        };
        if solve.k_max == 0 {
            return Err(Error::Config("run.k must be positive".into()));
        }
        let t = Thresholds::default();
        let th = raw.thresholds;
        let grid = run.grid.unwrap_or([101, 101]);
        let residual_grid = run.residual_grid.unwrap_or([101, 101]);
        Ok(RunConfig {
            spec,
            solve,
            grid: (grid[0], grid[1]),
            residual_grid: (residual_grid[0], residual_grid[1]),
            thresholds: Thresholds {
                pde: th.pde.unwrap_or(t.pde),
                fd: th.fd.unwrap_or(t.fd),
                boundary: th.boundary.unwrap_or(t.boundary),
                matching: th.matching.unwrap_or(t.matching),
            },
            output: run.output.unwrap_or_else(|| PathBuf::from("out")),
        })
    }

    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_toml_str(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = RunConfig::from_toml_str("s = 1\nn = 1\na_over_pi = \"1\"\nphi = [\"sin(x)\"]\n", Path::new(".")).unwrap();
        assert_eq!(c.spec.psi.len(), 1);
        assert!(c.spec.psi[0].is_zero());
        assert_eq!(c.solve.k_max, 32);
        assert!(c.spec.validate().is_pass());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = RunConfig::from_toml_str("s = 1\nn = 1\na_over_pi = \"1\"\nfoo = 2\n", Path::new(".")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn csv_samples() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("phi.csv"), "x,phi\n0,0\n1.5,1\n3.14,0\n").unwrap();
        let c = RunConfig::from_toml_str(
            "s = 1\nn = 1\na_over_pi = \"1\"\nphi = [\"csv:phi.csv\"]\n[run]\nk = 4\ngrid = [11, 21]\n",
            dir.path(),
        )
        .unwrap();
        assert_eq!(c.spec.phi[0].sample_count(), Some(3));
        assert_eq!(c.grid, (11, 21));
    }
}
