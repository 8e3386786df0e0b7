//! Batch commands behind the binary. Each reads a [`RunConfig`], runs one
//! analysis and writes CSV and/or JSON files into the output directory,
//! returning the paths written.
//!
//! CSV files start with a `# schema:` comment naming the columns; floats are
//! written with 17 significant digits so identical inputs give identical bytes.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bounds::{empirical_decay, truncation_error_bound};
use crate::busy::{busy_oracle_with, busy_period_cdf, BusyOracleConfig};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::oracle::{extract_boundary, integrate_periodic_with, BoundaryFunctions, PeriodicDistribution};
use crate::roots::{build_root_set, poly_residual, RootSet};
use crate::series::SeriesEvaluator;
use crate::waiting::{oracle_wait_cdf, wait_cdf_from_point};

/// Float cell with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl CsvOut {
    fn create(dir: &Path, name: &str, description: &str, header: &[String]) -> Result<Self> {
        let path = dir.join(name);
        let mut file = File::create(&path)?;
        writeln!(file, "# schema: {} ({description})", header.join(","))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header).map_err(csv_err)?;
        Ok(Self { path, writer })
    }

    fn row(&mut self, cells: &[String]) -> Result<()> {
        self.writer.write_record(cells).map_err(csv_err)
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush()?;
        Ok(self.path)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn headers(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(&path, text + "\n")?;
    Ok(path)
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    Ok(&cfg.output.dir)
}

fn time_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

struct Prepared {
    spec: ModelSpec,
    dist: PeriodicDistribution,
    boundary: BoundaryFunctions,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let spec = cfg.spec()?;
    let dist = integrate_periodic_with(&spec, &cfg.oracle_config())?;
    let boundary = extract_boundary(&dist)?;
    Ok(Prepared { spec, dist, boundary })
}

/// Characteristic roots `|n| <= series.q`.
pub fn cmd_roots(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?;
    let spec = cfg.spec()?;
    let set = build_root_set(&spec, cfg.series.q)?;
    let mut written = Vec::new();
    if cfg.output.csv() {
        let cols = headers(&["n", "branch", "y_re", "y_im", "chi_re", "chi_im", "abs_y", "residual"]);
        let mut out = CsvOut::create(dir, "roots.csv", "outside roots ordered by (n, branch)", &cols)?;
        for r in set.roots() {
            out.row(&[
                r.n.to_string(),
                r.branch.to_string(),
                fmt_f64(r.y.re),
                fmt_f64(r.y.im),
                fmt_f64(r.chi.re),
                fmt_f64(r.chi.im),
                fmt_f64(r.y.norm()),
                fmt_f64(poly_residual(&spec, r.n, r.y)),
            ])?;
        }
        written.push(out.finish()?);
    }
    if cfg.output.json() {
        #[derive(Serialize)]
        struct Summary {
            q: usize,
            roots: usize,
            min_separation: f64,
        }
        let s = Summary { q: cfg.series.q, roots: set.roots().len(), min_separation: set.min_separation() };
        written.push(write_json(dir, "roots.json", &s)?);
    }
    Ok(written)
}

#[derive(Serialize)]
struct OracleSummary {
    levels: usize,
    grid: usize,
    periods: usize,
    residual: f64,
    mass_drift: f64,
    top_level_max_mass: f64,
    seconds: f64,
}

fn oracle_summary(dist: &PeriodicDistribution, seconds: f64) -> OracleSummary {
    let top = (0..dist.grid_len()).map(|i| dist.level_mass(i, dist.levels())).fold(0.0, f64::max);
    OracleSummary {
        levels: dist.levels(),
        grid: dist.grid_len(),
        periods: dist.periods(),
        residual: dist.residual(),
        mass_drift: dist.mass_drift(),
        top_level_max_mass: top,
        seconds,
    }
}

/// Boundary probabilities `p_0(t)`, `p_1(t)` from the periodic ODE.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?;
    let clock = Instant::now();
    let Prepared { spec, dist, .. } = prepare(cfg)?;
    let seconds = clock.elapsed().as_secs_f64();
    let (k, m) = (spec.k(), spec.m());
    let mut written = Vec::new();
    if cfg.output.csv() {
        let cols = headers(&["t", "level", "a", "s", "probability"]);
        let mut out = CsvOut::create(dir, "oracle.csv", "levels 0 and 1 on the oracle grid; s = 0 at level 0", &cols)?;
        for i in 0..dist.grid_len() {
            let t = fmt_f64(dist.time(i));
            for (a, p) in dist.level(i, 0).iter().enumerate() {
                out.row(&[t.clone(), "0".into(), a.to_string(), "0".into(), fmt_f64(*p)])?;
            }
            let p1 = dist.level(i, 1);
            for a in 0..k {
                for s in 0..m {
                    out.row(&[t.clone(), "1".into(), a.to_string(), s.to_string(), fmt_f64(p1[a * m + s])])?;
                }
            }
        }
        written.push(out.finish()?);
    }
    if cfg.output.json() {
        written.push(write_json(dir, "oracle.json", &oracle_summary(&dist, seconds))?);
    }
    Ok(written)
}

/// Series level probabilities against the oracle on a grid of times.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?;
    let clock = Instant::now();
    let Prepared { spec, dist, boundary } = prepare(cfg)?;
    let oracle_seconds = clock.elapsed().as_secs_f64();
    let clock = Instant::now();
    let roots = build_root_set(&spec, cfg.series.q)?;
    let eval = SeriesEvaluator::new(&spec, &roots, &boundary).with_quadrature(cfg.quadrature());
    let (k, m) = (spec.k(), spec.m());

    #[derive(Serialize)]
    struct LevelSummary {
        j: usize,
        sup_abs_error: f64,
        max_imag_residual: f64,
    }
    let mut sups = vec![(0.0f64, 0.0f64); cfg.analyze.levels.len()];
    let mut rows = Vec::new();
    for t in time_grid(cfg.analyze.times) {
        let point = eval.at(t)?;
        let oracle = dist.levels_at(t);
        for (li, &j) in cfg.analyze.levels.iter().enumerate() {
            let est = point.level(j)?;
            let bound = truncation_error_bound(&spec, t, j, cfg.series.q).bound();
            let reference = oracle.get(j).cloned().unwrap_or_else(|| vec![0.0; k * m]);
            sups[li].1 = sups[li].1.max(est.imag_residual);
            for a in 0..k {
                for s in 0..m {
                    let idx = a * m + s;
                    let diff = (est.values[idx] - reference[idx]).abs();
                    sups[li].0 = sups[li].0.max(diff);
                    rows.push(vec![
                        fmt_f64(t),
                        j.to_string(),
                        a.to_string(),
                        s.to_string(),
                        fmt_f64(est.values[idx]),
                        fmt_f64(reference[idx]),
                        fmt_f64(diff),
                        bound.map(fmt_f64).unwrap_or_default(),
                    ]);
                }
            }
        }
    }
    let series_seconds = clock.elapsed().as_secs_f64();
    let mut written = Vec::new();
    if cfg.output.csv() {
        let cols = headers(&["t", "j", "a", "s", "series", "oracle", "abs_diff", "bound"]);
        let mut out = CsvOut::create(dir, "levels.csv", "bound empty where not applicable", &cols)?;
        for r in &rows {
            out.row(r)?;
        }
        written.push(out.finish()?);
    }
    if cfg.output.json() {
        #[derive(Serialize)]
        struct Summary {
            q: usize,
            levels: Vec<LevelSummary>,
            oracle: OracleSummary,
            series_seconds: f64,
        }
        let levels = cfg
            .analyze
            .levels
            .iter()
            .zip(&sups)
            .map(|(&j, &(e, im))| LevelSummary { j, sup_abs_error: e, max_imag_residual: im })
            .collect();
        let s = Summary { q: cfg.series.q, levels, oracle: oracle_summary(&dist, oracle_seconds), series_seconds };
        written.push(write_json(dir, "summary.json", &s)?);
    }
    Ok(written)
}

/// Tail bounds against measured truncation error (high-order reference),
/// plus the decay table of the root weights at `t = 0.25`.
pub fn cmd_bounds(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?;
    let Prepared { spec, boundary, .. } = prepare(cfg)?;
    let b = &cfg.bounds;
    let top = b.orders.iter().copied().max().unwrap_or(0).max(b.reference_q);
    let roots = build_root_set(&spec, top)?;
    let eval = SeriesEvaluator::new(&spec, &roots, &boundary).with_quadrature(cfg.quadrature());
    let mut rows = Vec::new();
    let mut violations = 0usize;
    for t in time_grid(b.times) {
        let point = eval.at(t)?;
        let reference = point.truncated(b.reference_q);
        for &j in &b.levels {
            let exact = reference.level(j)?;
            for &q in &b.orders {
                let est = point.truncated(q).level(j)?;
                let measured =
                    exact.values.iter().zip(&est.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let bound = truncation_error_bound(&spec, t, j, q).bound();
                if bound.is_some_and(|bd| measured > bd) {
                    violations += 1;
                }
                rows.push(vec![j.to_string(), q.to_string(), fmt_f64(t), bound.map(fmt_f64).unwrap_or_default(), fmt_f64(measured)]);
            }
        }
    }
    let decay = empirical_decay(&spec, &roots.truncate(b.reference_q), &boundary, 0.25)?;
    let mut written = Vec::new();
    if cfg.output.csv() {
        let cols = headers(&["j", "q", "t", "bound", "measured"]);
        let mut out = CsvOut::create(dir, "bounds.csv", "measured against the reference order; bound empty where not applicable", &cols)?;
        for r in &rows {
            out.row(r)?;
        }
        written.push(out.finish()?);
        let cols = headers(&["n", "max_abs_f", "max_abs_f_over_abs_chi"]);
        let mut out = CsvOut::create(dir, "decay.csv", "root weights at t = 0.25", &cols)?;
        for r in &decay {
            out.row(&[r.n.to_string(), fmt_f64(r.max_abs_f), fmt_f64(r.max_scaled)])?;
        }
        written.push(out.finish()?);
    }
    if cfg.output.json() {
        #[derive(Serialize)]
        struct Summary {
            reference_q: usize,
            violations: usize,
        }
        written.push(write_json(dir, "bounds.json", &Summary { reference_q: b.reference_q, violations })?);
    }
    Ok(written)
}

/// Waiting-time CDFs from the series and the oracle for each arrival time.
pub fn cmd_waiting(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?;
    let Prepared { spec, dist, boundary } = prepare(cfg)?;
    let roots = build_root_set(&spec, cfg.series.q)?;
    let eval = SeriesEvaluator::new(&spec, &roots, &boundary).with_quadrature(cfg.quadrature());
    let kind = cfg.waiting.kind()?;
    let horizons = cfg.waiting.horizons()?;
    let mut curves = Vec::new();
    for &u in &cfg.waiting.u {
        let series = wait_cdf_from_point(&eval.at(u)?, &boundary, &horizons, kind)?;
        let oracle = oracle_wait_cdf(&spec, &dist, u, &horizons, kind)?;
        curves.push((series, oracle));
    }
    let mut written = Vec::new();
    if cfg.output.csv() {
        let cols = headers(&["u", "t", "series", "oracle"]);
        let mut out = CsvOut::create(dir, "waiting.csv", &format!("{kind} wait CDF"), &cols)?;
        for (series, oracle) in &curves {
            for i in 0..horizons.len() {
                out.row(&[fmt_f64(series.u), fmt_f64(horizons[i]), fmt_f64(series.values[i]), fmt_f64(oracle.values[i])])?;
            }
        }
        written.push(out.finish()?);
    }
    if cfg.output.json() {
        #[derive(Serialize)]
        struct Curve {
            u: f64,
            sup_distance: f64,
            imag_residual: f64,
        }
        #[derive(Serialize)]
        struct Summary {
            kind: String,
            q: usize,
            curves: Vec<Curve>,
        }
        let s = Summary {
            kind: kind.to_string(),
            q: cfg.series.q,
            curves: curves
                .iter()
                .map(|(s, o)| Curve { u: s.u, sup_distance: s.sup_distance(o), imag_residual: s.imag_residual })
                .collect(),
        };
        written.push(write_json(dir, "waiting.json", &s)?);
    }
    Ok(written)
}

/// Busy-period CDF from the Volterra equation and the absorbing chain.
pub fn cmd_busy(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?;
    let spec = cfg.spec()?;
    let b = &cfg.busy;
    let volterra = busy_period_cdf(&spec, b.j, b.start(), b.u, b.horizon, b.h)?;
    let oracle_cfg = BusyOracleConfig { levels: b.levels, ..BusyOracleConfig::default() };
    let oracle = busy_oracle_with(&spec, b.j, b.start(), b.u, b.horizon, b.h, oracle_cfg)?;
    let k = spec.k();
    let mut written = Vec::new();
    if cfg.output.csv() {
        let mut cols = vec!["t".to_string()];
        cols.extend((0..k).map(|a| format!("volterra_a{a}")));
        cols.extend((0..k).map(|a| format!("oracle_a{a}")));
        let desc = format!("absorbed mass by arrival phase, j = {}, u = {}", b.j, b.u);
        let mut out = CsvOut::create(dir, "busy.csv", &desc, &cols)?;
        for (i, t) in volterra.times.iter().enumerate() {
            let mut row = vec![fmt_f64(*t)];
            row.extend(volterra.values[i].iter().map(|v| fmt_f64(*v)));
            row.extend(oracle.values[i].iter().map(|v| fmt_f64(*v)));
            out.row(&row)?;
        }
        written.push(out.finish()?);
    }
    if cfg.output.json() {
        #[derive(Serialize)]
        struct Summary {
            j: usize,
            u: f64,
            h: f64,
            sup_distance: f64,
            final_total: f64,
        }
        let s = Summary {
            j: b.j,
            u: b.u,
            h: b.h,
            sup_distance: volterra.sup_distance(&oracle)?,
            final_total: volterra.totals().last().copied().unwrap_or(0.0),
        };
        written.push(write_json(dir, "busy.json", &s)?);
    }
    Ok(written)
}

/// One JSON report of every series-versus-reference distance.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?;
    let Prepared { spec, dist, boundary } = prepare(cfg)?;
    let roots: RootSet = build_root_set(&spec, cfg.series.q)?;
    let eval = SeriesEvaluator::new(&spec, &roots, &boundary).with_quadrature(cfg.quadrature());

    let mut level_sup = vec![0.0f64; cfg.analyze.levels.len()];
    let mut closure: f64 = 0.0;
    for t in time_grid(cfg.analyze.times) {
        let point = eval.at(t)?;
        let oracle = dist.levels_at(t);
        for (li, &j) in cfg.analyze.levels.iter().enumerate() {
            let est = point.level(j)?;
            let reference = oracle.get(j).cloned().unwrap_or_else(|| vec![0.0; spec.km()]);
            let d = est.values.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            level_sup[li] = level_sup[li].max(d);
        }
        let mut mass = boundary.p0_total(t);
        for j in 1..=30 {
            mass += point.level(j)?.total();
        }
        closure = closure.max((mass - 1.0).abs());
    }

    let kind = cfg.waiting.kind()?;
    let horizons = cfg.waiting.horizons()?;
    let mut waiting = Vec::new();
    for &u in &cfg.waiting.u {
        let s = wait_cdf_from_point(&eval.at(u)?, &boundary, &horizons, kind)?;
        let o = oracle_wait_cdf(&spec, &dist, u, &horizons, kind)?;
        waiting.push((u, s.sup_distance(&o)));
    }

    let b = &cfg.busy;
    let volterra = busy_period_cdf(&spec, b.j, b.start(), b.u, b.horizon, b.h)?;
    let oracle_cfg = BusyOracleConfig { levels: b.levels, ..BusyOracleConfig::default() };
    let busy_ref = busy_oracle_with(&spec, b.j, b.start(), b.u, b.horizon, b.h, oracle_cfg)?;

    #[derive(Serialize)]
    struct Summary {
        q: usize,
        level_sup_error: Vec<(usize, f64)>,
        mass_closure_30_levels: f64,
        waiting_kind: String,
        waiting_sup_distance: Vec<(f64, f64)>,
        busy_sup_distance: f64,
    }
    let s = Summary {
        q: cfg.series.q,
        level_sup_error: cfg.analyze.levels.iter().copied().zip(level_sup).collect(),
        mass_closure_30_levels: closure,
        waiting_kind: kind.to_string(),
        waiting_sup_distance: waiting,
        busy_sup_distance: volterra.sup_distance(&busy_ref)?,
    };
    Ok(vec![write_json(dir, "compare.json", &s)?])
}

/// Exit status for an error: 2 for configuration problems, 3 for numerical ones.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidModel(_) => 2,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
