//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors so that
//! typos do not silently fall back to defaults.

use crate::CliError;
use rieffel::symbols::DeformationMatrix;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Tolerances, keyed by the `tol.<name>` config entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub product: f64,
    pub associativity: f64,
    pub sup_op: f64,
    pub interplay: f64,
    pub cv_stability: f64,
    pub route: f64,
    pub d_inverse: f64,
    pub kernel: f64,
    pub symbol_map: f64,
    pub leibniz: f64,
    pub algebra: f64,
    pub fourier_inversion: f64,
    pub plancherel: f64,
    pub unitarity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            product: 1e-6,
            associativity: 1e-5,
            sup_op: 0.02,
            interplay: 1e-4,
            cv_stability: 0.10,
            route: 1e-3,
            d_inverse: 1e-6,
            kernel: 1e-6,
            symbol_map: 0.05,
            leibniz: 1e-6,
            algebra: 1e-10,
            fourier_inversion: 1e-6,
            plancherel: 1e-10,
            unitarity: 1e-10,
        }
    }
}

impl Tolerances {
    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "product" => &mut self.product,
            "associativity" => &mut self.associativity,
            "sup_op" => &mut self.sup_op,
            "interplay" => &mut self.interplay,
            "cv_stability" => &mut self.cv_stability,
            "route" => &mut self.route,
            "d_inverse" => &mut self.d_inverse,
            "kernel" => &mut self.kernel,
            "symbol_map" => &mut self.symbol_map,
            "leibniz" => &mut self.leibniz,
            "algebra" => &mut self.algebra,
            "fourier_inversion" => &mut self.fourier_inversion,
            "plancherel" => &mut self.plancherel,
            "unitarity" => &mut self.unitarity,
            _ => return None,
        })
    }

    fn all(&self) -> [f64; 14] {
        [
            self.product,
            self.associativity,
            self.sup_op,
            self.interplay,
            self.cv_stability,
            self.route,
            self.d_inverse,
            self.kernel,
            self.symbol_map,
            self.leibniz,
            self.algebra,
            self.fourier_inversion,
            self.plancherel,
            self.unitarity,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "N")]
    pub npts: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub theta: f64,
    /// Explicit row-major `J`; overrides `theta` when present.
    pub j: Option<Vec<f64>>,
    /// Highest order `m` of the differential norms.
    pub order: usize,
    pub seed: u64,
    /// Worker threads; results do not depend on it, so reports omit it.
    #[serde(skip)]
    pub workers: usize,
    pub suites: Vec<String>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Include wall-clock times in reports (makes them run-dependent).
    pub timings: bool,
    pub tol: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            k: 2,
            npts: 32,
            half_width: 2.0,
            theta: 0.5,
            j: None,
            order: 2,
            seed: 0x5EED,
            workers: 1,
            suites: Vec::new(),
            out: None,
            timings: false,
            tol: Tolerances::default(),
        }
    }
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("config line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| parse_err(line, format!("`{key}` expects a number, got `{v}`")))
}

pub fn parse_list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(parse_err(line, format!("`{key}` already set on line {prev}")));
            }
            match key {
                "n" => cfg.n = num(line, key, value)?,
                "k" => cfg.k = num(line, key, value)?,
                "N" => cfg.npts = num(line, key, value)?,
                "L" => cfg.half_width = num(line, key, value)?,
                "theta" => cfg.theta = num(line, key, value)?,
                "j" => cfg.j = Some(parse_list(value).iter().map(|v| num(line, key, v)).collect::<Result<_, _>>()?),
                "order" => cfg.order = num(line, key, value)?,
                "seed" => cfg.seed = num(line, key, value)?,
                "workers" => cfg.workers = num(line, key, value)?,
                "suites" => cfg.suites = parse_list(value),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "timings" => {
                    cfg.timings = match value {
                        "true" => true,
                        "false" => false,
                        _ => return Err(parse_err(line, format!("`timings` expects true or false, got `{value}`"))),
                    }
                }
                _ => match key.strip_prefix("tol.").and_then(|t| cfg.tol.slot(t)) {
                    Some(slot) => *slot = num(line, key, value)?,
                    None => return Err(parse_err(line, format!("unknown key `{key}`"))),
                },
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Parse(format!("config: {msg}")));
        if !(1..=2).contains(&self.n) {
            return bad(format!("n must be 1 or 2, got {}", self.n));
        }
        if self.k == 0 || self.k > 8 {
            return bad(format!("k must be in 1..=8, got {}", self.k));
        }
        if self.npts < 4 || !self.npts.is_power_of_two() {
            return bad(format!("N must be a power of two ≥ 4, got {}", self.npts));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return bad(format!("L must be positive, got {}", self.half_width));
        }
        if !self.theta.is_finite() {
            return bad("theta must be finite".into());
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        if self.order > rieffel::symbols::plane::MAX_ORDER {
            return bad(format!("order must be at most {}", rieffel::symbols::plane::MAX_ORDER));
        }
        if self.tol.all().iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return bad("every tolerance must be positive".into());
        }
        self.deformation(self.n).map(|_| ())
    }

    /// `J` on `R^n`: the explicit matrix if given, otherwise `θ` times the
    /// standard symplectic matrix (`n = 2`) or zero (`n = 1`).
    pub fn deformation(&self, n: usize) -> Result<DeformationMatrix, CliError> {
        if let Some(entries) = &self.j {
            if entries.len() != n * n {
                return Err(CliError::Parse(format!("config: j has {} entries, expected {}", entries.len(), n * n)));
            }
            return DeformationMatrix::new(n, entries).map_err(|e| CliError::Parse(format!("config: {e}")));
        }
        self.deformation_at(n, self.theta)
    }

    pub fn deformation_at(&self, n: usize, theta: f64) -> Result<DeformationMatrix, CliError> {
        match n {
            2 => Ok(DeformationMatrix::symplectic(theta)),
            _ if theta == 0.0 => Ok(DeformationMatrix::zero(n)),
            _ => Err(CliError::Usage(format!("θ = {theta} needs n = 2; every skew 1×1 matrix is zero"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_tolerances() {
        let cfg = RunConfig::parse("# demo\nn = 1\nk=3 # trailing\n\ntheta = 0\ntol.sup_op = 0.05\nsuites = cv, kernel\n").unwrap();
        assert_eq!((cfg.n, cfg.k), (1, 3));
        assert_eq!(cfg.tol.sup_op, 0.05);
        assert_eq!(cfg.suites, vec!["cv", "kernel"]);
    }

    #[test]
    fn rejects_bad_input_with_line_numbers() {
        for (text, needle) in [
            ("n = 3", "n must be 1 or 2"),
            ("x = 1", "line 1: unknown key"),
            ("\nk", "line 2: expected"),
            ("tol.kernel = -1", "positive"),
            ("n = 1\nn = 2", "line 2: `n` already set"),
            ("N = 12", "power of two"),
            ("j = 0, 1, 2, 0", "skew"),
        ] {
            match RunConfig::parse(text) {
                Err(CliError::Parse(msg)) => assert!(msg.contains(needle), "{text}: {msg}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn theta_needs_two_dimensions() {
        let cfg = RunConfig::parse("n = 1\ntheta = 0").unwrap();
        assert!(cfg.deformation(1).unwrap().is_zero());
        assert!(matches!(cfg.deformation_at(1, 0.3), Err(CliError::Usage(_))));
        assert!(matches!(RunConfig::parse("n = 1\ntheta = 0.5"), Err(CliError::Usage(_))));
    }
}
