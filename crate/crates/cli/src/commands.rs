//! Subcommand bodies. Each returns `Ok(())` on success; the binary maps
//! errors to exit codes.

use crate::config::RunConfig;
use crate::report::VerifyReport;
use crate::suites;
use crate::CliError;
use rieffel::deformation::{deformed_product_exact, deformed_product_report, tilde_map, OscIntegralConfig};
use rieffel::heisenberg::{differential_norms, SymbolicOperator};
use rieffel::pseudodiff::{cv_ratio, operator_norm, rieffel_operator};
use rieffel::symbols::io::{read_symbol, write_symbol};
use rieffel::symbols::{BaseSymbol, Grid, GridSymbol};
use std::io::Write;
use std::path::Path;

fn load(path: &Path) -> Result<BaseSymbol, CliError> {
    read_symbol(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn store(path: &Path, s: &BaseSymbol) -> Result<(), CliError> {
    write_symbol(path, s).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Parse(format!("stdout: {e}"))),
    }
}

/// The grid a symbol is evaluated on: its own, or the configured `N` over
/// the symbol's period box.
fn grid_for(f: &BaseSymbol, cfg: &RunConfig) -> Result<Grid, CliError> {
    match f {
        BaseSymbol::Grid(g) => Ok(g.grid),
        BaseSymbol::Waves(w) => {
            if 2 * w.max_freq_index() as usize >= cfg.npts {
                return Err(CliError::Parse(format!("frequency index {} does not fit on N = {} points; raise N", w.max_freq_index(), cfg.npts)));
            }
            Ok(Grid::new(w.n, cfg.npts, w.half_width)?)
        }
    }
}

fn to_grid(f: &BaseSymbol, grid: &Grid) -> Result<GridSymbol, CliError> {
    match f {
        BaseSymbol::Grid(g) => {
            g.grid.check_same(grid)?;
            Ok(g.clone())
        }
        BaseSymbol::Waves(w) => {
            if w.half_width != grid.half_width || 2 * w.max_freq_index() as usize >= grid.npts {
                return Err(CliError::Parse(format!("plane-wave symbol with L = {} cannot be sampled on the grid of the other input", w.half_width)));
            }
            Ok(w.sample(grid)?)
        }
    }
}

/// `f ×_J g`, written to `out`. Plane-wave pairs take the exact route and
/// write JSON; anything else is multiplied on a grid and written as RSYM.
/// Returns the logged disagreement line.
pub fn product(cfg: &RunConfig, f: &Path, g: &Path, out: &Path) -> Result<String, CliError> {
    let (fs, gs) = (load(f)?, load(g)?);
    if fs.n() != gs.n() || fs.k() != gs.k() {
        return Err(CliError::Parse(format!("inputs live on R^{} with k = {} and R^{} with k = {}", fs.n(), fs.k(), gs.n(), gs.k())));
    }
    let j = cfg.deformation(fs.n())?;
    let osc = OscIntegralConfig::default();
    let (route, disagreement, result) = match (&fs, &gs) {
        (BaseSymbol::Waves(a), BaseSymbol::Waves(b)) => {
            let exact = deformed_product_exact(a, b, &j)?;
            // Cross-check against the grid route on a grid that resolves the product.
            let need = (4 * (a.max_freq_index() + b.max_freq_index() + 1) as usize).next_power_of_two().max(cfg.npts);
            let grid = Grid::new(a.n, need, a.half_width)?;
            let (spectral, _) = deformed_product_report(&a.sample(&grid)?, &b.sample(&grid)?, &j, &osc)?;
            let scale = (a.sup_norm() * b.sup_norm()).max(1.0);
            let gap = exact.sample(&grid)?.sup_distance(&spectral)? / scale;
            ("exact", Some(gap), BaseSymbol::Waves(exact))
        }
        _ => {
            let grid = match (&fs, &gs) {
                (BaseSymbol::Grid(a), _) => a.grid,
                (_, BaseSymbol::Grid(b)) => b.grid,
                _ => unreachable!("plane-wave pairs take the exact route"),
            };
            let (a, b) = (to_grid(&fs, &grid)?, to_grid(&gs, &grid)?);
            let (p, gap) = deformed_product_report(&a, &b, &j, &osc)?;
            ("spectral", gap, BaseSymbol::Grid(p))
        }
    };
    store(out, &result)?;
    let shown = disagreement.map_or("not measured (second factor does not decay)".to_string(), |d| format!("{d:.3e}"));
    let line = format!("route {route}, disagreement {shown}, wrote {}", out.display());
    match disagreement {
        Some(d) if !(d <= cfg.tol.product) => Err(CliError::Check(format!("{line}; disagreement exceeds tol.product = {:e}", cfg.tol.product))),
        _ => Ok(line),
    }
}

/// Inclusive `start:step:end`.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--theta-sweep expects start:step:end with step > 0 and end ≥ start, got `{text}`"));
    let parts: Vec<f64> = text.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, step, end] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(CliError::Usage(format!("--theta-sweep would produce {count} rows (limit 10000)")));
    }
    // Multiply rather than accumulate so rows do not drift.
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// CSV of norms over a θ sweep. Returns the CSV text; fails with a check
/// error when a `θ = 0` row has sup and operator norms further apart than
/// `tol.sup_op`.
pub fn norms(cfg: &RunConfig, f: &Path, sweep: Option<&str>, out: Option<&Path>) -> Result<String, CliError> {
    let fs = load(f)?;
    let n = fs.n();
    let thetas: Vec<Option<f64>> = match sweep {
        Some(s) => parse_sweep(s)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let grid = grid_for(&fs, cfg)?;
    let m = cfg.order;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["theta".to_string(), "sup_norm".into(), "op_norm".into()];
    header.extend((0..=m).map(|i| format!("T_{i}")));
    header.extend((0..=m).map(|i| format!("s_{i}")));
    header.push("cv_ratio".into());
    w.write_record(&header).map_err(|e| CliError::Parse(e.to_string()))?;
    let sup = fs.sup_norm();
    let mut worst_zero: Option<f64> = None;
    for theta in thetas {
        let j = match theta {
            Some(t) => cfg.deformation_at(n, t)?,
            None => cfg.deformation(n)?,
        };
        let opn = operator_norm(&rieffel_operator(&fs, &grid, &j)?)?;
        let dn = differential_norms(&SymbolicOperator::Rieffel { f: fs.clone(), grid, j: j.clone() }, m)?;
        let cv = cv_ratio(&tilde_map(&fs, &j)?, &grid)?;
        if j.is_zero() {
            let gap = (sup - opn).abs() / sup.max(1e-300);
            worst_zero = Some(worst_zero.map_or(gap, |g: f64| g.max(gap)));
        }
        let mut row = vec![j.theta().to_string(), sup.to_string(), opn.to_string()];
        row.extend(dn.t.iter().chain(&dn.s).map(f64::to_string));
        row.push(cv.to_string());
        w.write_record(&row).map_err(|e| CliError::Parse(e.to_string()))?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Parse(e.to_string()))?).expect("csv output is UTF-8");
    write_out(out, &text)?;
    match worst_zero {
        Some(g) if !(g <= cfg.tol.sup_op) => Err(CliError::Check(format!("at θ = 0 sup and operator norms differ by {g:.3e} (tol.sup_op = {})", cfg.tol.sup_op))),
        _ => Ok(text),
    }
}

/// Runs the configured suites; the report is written even when checks fail.
pub fn verify(cfg: &RunConfig, out: Option<&Path>) -> Result<VerifyReport, CliError> {
    let selected = suites::select(&cfg.suites)?;
    let reports = suites::run_all(&selected, cfg, cfg.workers)?;
    let report = VerifyReport::new(cfg.clone(), reports);
    write_out(out, &report.to_json())?;
    Ok(report)
}

pub fn info(cfg: &RunConfig, f: Option<&Path>) -> Result<String, CliError> {
    let mut s = format!("rieffel {}\n", env!("CARGO_PKG_VERSION"));
    if let Some(path) = f {
        let sym = load(path)?;
        s += &format!("file: {}\n", path.display());
        match &sym {
            BaseSymbol::Waves(w) => {
                s += &format!("format: plane-wave JSON\nn = {}, k = {}, L = {}\nterms: {}, max |m| = {}\n", w.n, w.k, w.half_width, w.len(), w.max_freq_index());
            }
            BaseSymbol::Grid(g) => {
                s += &format!(
                    "format: RSYM1 grid\nn = {}, k = {}, N = {}, L = {}\nadmissible (boundary decay): {}\n",
                    g.grid.n,
                    g.k,
                    g.grid.npts,
                    g.grid.half_width,
                    g.is_admissible()
                );
            }
        }
        s += &format!("sup norm: {}\n", sym.sup_norm());
    }
    s += &format!("config: n = {}, k = {}, N = {}, L = {}, θ = {}, order = {}, workers = {}\n", cfg.n, cfg.k, cfg.npts, cfg.half_width, cfg.theta, cfg.order, cfg.workers);
    s += "suites:\n";
    for suite in suites::SUITES {
        s += &format!("  {:<18} {}\n", suite.name, suite.about);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_are_inclusive_and_drift_free() {
        let t = parse_sweep("0:0.1:1").unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t[10], 1.0);
        assert_eq!(parse_sweep("0.5:1:0.5").unwrap(), vec![0.5]);
        for bad in ["0:0:1", "1:0.1:0", "a:b:c", "0:1", "0:1:2:3", "0:-1:2"] {
            assert!(matches!(parse_sweep(bad), Err(CliError::Usage(_))), "{bad}");
        }
    }
}
