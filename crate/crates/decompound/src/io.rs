//! CSV and sidecar formats.
//!
//! Floats in data columns are written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64`. Header comments use `# `;
//! resolved run configuration is written as `# config: key=value` lines so
//! an output file can be fed back through `--config`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use decompound_core::experiments::{BiasReport, FigureData, NormalityReport, VanishingTable};
use decompound_core::{ComplexSeries, DensityEstimate, ObservationSet, UnwrappedLog};

/// Ordered `key=value` pairs describing a fully resolved run.
pub type ConfigPairs = Vec<(String, String)>;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `# config: key=value` lines.
pub fn config_header(pairs: &ConfigPairs) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "# config: {k}={v}");
    }
    out
}

/// `# summary: key=value` lines.
pub fn summary_header(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "# summary: {k}={v}");
    }
    out
}

/// Parses `key=value` pairs from a config file.
///
/// Accepts plain `key=value` lines and `# config: key=value` header lines;
/// other comments and blank lines are skipped. Parsing stops at the first
/// line that is neither, so the header of a CSV output can be read back.
pub fn parse_config(text: &str) -> Result<ConfigPairs, String> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        let body = if let Some(rest) = line.strip_prefix("# config:") {
            rest.trim()
        } else if line.is_empty() || line.starts_with('#') {
            continue;
        } else if line.contains('=') {
            line
        } else {
            break;
        };
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| format!("malformed config line `{line}`"))?;
        let key = k.trim();
        if key.is_empty() {
            return Err(format!("malformed config line `{line}`"));
        }
        pairs.push((key.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and a rename; `-` means standard output.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    if path == Path::new("-") {
        let mut stdout = io::stdout().lock();
        stdout.write_all(contents.as_bytes())?;
        return stdout.flush();
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `index,x,y,z,jump_count`; component columns are empty when unknown.
pub fn observations_csv(obs: &ObservationSet) -> String {
    let mut out = String::from("index,x,y,z,jump_count\n");
    for (i, x) in obs.values.iter().enumerate() {
        match obs.components.as_ref().map(|c| c[i]) {
            Some(c) => {
                let _ = writeln!(
                    out,
                    "{i},{},{},{},{}",
                    fmt_f64(*x),
                    fmt_f64(c.y),
                    fmt_f64(c.z),
                    c.jump_count
                );
            }
            None => {
                let _ = writeln!(out, "{i},{},,,", fmt_f64(*x));
            }
        }
    }
    out
}

/// Reads the `x` column of an observations CSV, or a bare one-number-per-line file.
pub fn parse_observations(text: &str) -> Result<Vec<f64>, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let Some((first_no, first)) = lines.next() else {
        return Err("no observations found".into());
    };
    let (column, mut values) = if first.trim().parse::<f64>().is_ok() {
        (0, vec![parse_cell(first, first_no)?])
    } else {
        let col = first
            .split(',')
            .position(|h| h.trim() == "x")
            .ok_or_else(|| "header has no `x` column".to_string())?;
        (col, Vec::new())
    };
    for (no, line) in lines {
        let cell = line
            .split(',')
            .nth(column)
            .ok_or_else(|| format!("line {}: missing x column", no + 1))?;
        values.push(parse_cell(cell, no)?);
    }
    Ok(values)
}

fn parse_cell(cell: &str, line_no: usize) -> Result<f64, String> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| format!("line {}: `{}` is not a number", line_no + 1, cell.trim()))
}

/// `# kind=<tag>` then `t,re,im`.
pub fn series_csv(series: &ComplexSeries) -> String {
    let mut out = format!("# kind={}\nt,re,im\n", series.kind.tag());
    for (t, v) in series.grid.points().iter().zip(&series.values) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}

/// `# kind=unwrapped_log` then `t,log_re,arg_unwrapped` over the processed prefix.
pub fn unwrapped_log_csv(log: &UnwrappedLog) -> String {
    let mut out = format!("# kind=unwrapped_log\n# status={}\nt,log_re,arg_unwrapped\n", log.status);
    for (t, v) in log.grid.points().iter().zip(&log.log_values) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}

/// `x,f_hat,f_raw,truncation_hit`.
pub fn estimate_csv(est: &DensityEstimate) -> String {
    let mut out = String::from("x,f_hat,f_raw,truncation_hit\n");
    for i in 0..est.x.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(est.x[i]),
            fmt_f64(est.f_hat[i]),
            fmt_f64(est.f_raw[i]),
            est.truncation_hit[i]
        );
    }
    out
}

/// JSON sidecar with the resolved configuration and run diagnostics.
pub fn estimate_sidecar(est: &DensityEstimate, config: &ConfigPairs) -> String {
    let config: serde_json::Map<String, serde_json::Value> = config
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect();
    let value = serde_json::json!({
        "config": config,
        "lambda": est.lambda,
        "n": est.n,
        "h": est.config.h,
        "truncation_level": est.config.truncation,
        "eta": est.config.eta,
        "fft_size": est.config.fft_size,
        "modulus_floor": est.config.unwrap.modulus_floor,
        "jump_threshold": est.config.unwrap.jump_threshold,
        "distlog_status": est.distlog_status.to_string(),
        "min_modulus": est.min_modulus,
        "truncation_hits": est.truncation_hit.iter().filter(|h| **h).count(),
        "points": est.x.len(),
    });
    let mut s = serde_json::to_string_pretty(&value).unwrap_or_default();
    s.push('\n');
    s
}

/// `x,f_hat,f_true`.
pub fn figure_csv(fig: &FigureData) -> String {
    let mut out = String::from("x,f_hat,f_true\n");
    for ((x, f), t) in fig.estimate.x.iter().zip(&fig.estimate.f_hat).zip(&fig.f_true) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(*x), fmt_f64(*f), fmt_f64(*t));
    }
    out
}

pub fn normality_summary(r: &NormalityReport) -> Vec<(&'static str, String)> {
    vec![
        ("reps", r.reps.to_string()),
        ("retained", r.stats.len().to_string()),
        ("vanished", r.vanished_count.to_string()),
        ("jump_suspect", r.jump_suspect_count.to_string()),
        ("zeta", fmt_f64(r.zeta)),
        ("mean_estimate", fmt_f64(r.mean_estimate)),
        ("sample_variance", fmt_f64(r.sample_variance)),
        ("target_variance", fmt_f64(r.target_variance)),
        ("variance_ratio", fmt_f64(r.variance_ratio())),
        ("skewness", fmt_f64(r.skewness)),
        ("quartile_skewness", fmt_f64(r.quartile_skewness)),
        ("excess_kurtosis", fmt_f64(r.excess_kurtosis)),
    ]
}

/// `replicate,seed,status,f_hat,stat`; failed replicates leave the last two empty.
pub fn normality_csv(r: &NormalityReport) -> String {
    let mut out = String::from("replicate,seed,status,f_hat,stat\n");
    let mut stats = r.stats.iter();
    for rep in &r.replicates {
        match rep.f_hat {
            Some(f) => {
                let s = stats.next().copied().unwrap_or(f64::NAN);
                let _ = writeln!(out, "{},{},{},{},{}", rep.index, rep.seed, rep.status, fmt_f64(f), fmt_f64(s));
            }
            None => {
                let _ = writeln!(out, "{},{},{},,", rep.index, rep.seed, rep.status);
            }
        }
    }
    out
}

/// `n,reps,vanished,vanished_fraction,jump_suspect,jump_suspect_fraction,median_min_modulus`.
pub fn vanishing_csv(t: &VanishingTable) -> String {
    let mut out = String::from(
        "n,reps,vanished,vanished_fraction,jump_suspect,jump_suspect_fraction,median_min_modulus\n",
    );
    for row in &t.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.n,
            row.reps,
            row.vanished,
            fmt_f64(row.vanished_fraction()),
            row.jump_suspect,
            fmt_f64(row.jump_suspect_fraction()),
            fmt_f64(row.median_min_modulus)
        );
    }
    out
}

/// `h,f_raw,f_true,bias,rate,rate_ratio`.
pub fn bias_csv(r: &BiasReport) -> String {
    let mut out = String::from("h,f_raw,f_true,bias,rate,rate_ratio\n");
    for i in 0..r.h_values.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.h_values[i]),
            fmt_f64(r.f_raw[i]),
            fmt_f64(r.f_true),
            fmt_f64(r.bias[i]),
            fmt_f64(r.rates[i]),
            fmt_f64(r.rate_ratios[i])
        );
    }
    out
}

pub fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}
