//! Reproducible runs: a serializable configuration and the files it produces.
//!
//! Every output file embeds the full configuration and sampler metadata.
//! CSV files start with `# config: {...}` and `# sampler: {...}` lines; JSON
//! and text outputs carry the same objects. [`load_config`] reads any of them
//! back, and re-running that configuration reproduces the file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constellation::{build_standard, load_with, ChannelParams, Constellation, LoadOptions, StandardKind};
use crate::convexity::{interior_log_grid, inflection_scan, theorem_name, thresholds, Interval, ThresholdSet};
use crate::curvature::{curvature_mc, Axis, CurvatureEstimate};
use crate::error::{Error, Result};
use crate::error_engine::{rate_mc, ErrorMetric, Estimate};
use crate::mc::{sampler_info, Budget};
use crate::probes::{
    calibrated_conjecture_probe, chi_square_floor, jensen_probe, log_grid, printed_claim_probe, sphere_hardening_report,
};

/// Smallest sample count a run accepts.
pub const MIN_SAMPLES: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Builtin(StandardKind),
    File(PathBuf),
}

impl Source {
    pub fn load(&self, auto_normalize: bool) -> Result<Constellation<f64>> {
        match self {
            Source::Builtin(kind) => build_standard(kind),
            Source::File(path) => load_with(path, LoadOptions { auto_normalize }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.min.is_finite()) {
            return Err(Error::Validation(format!("grid min must be positive, got {}", self.min)));
        }
        if !(self.max.is_finite() && self.max >= self.min) {
            return Err(Error::Validation(format!("grid max {} must be at least grid min {}", self.max, self.min)));
        }
        if self.points == 0 {
            return Err(Error::Validation("grid needs at least one point".into()));
        }
        if self.points > 1 && self.max == self.min {
            return Err(Error::Validation("grid with several points needs max > min".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        if self.log {
            return log_grid(self.min, self.max, self.points);
        }
        let last = (self.points - 1) as f64;
        let mut g: Vec<f64> = (0..self.points)
            .map(|k| self.min + (self.max - self.min) * k as f64 / last)
            .collect();
        g[self.points - 1] = self.max;
        g
    }
}

/// A sweep column: an error rate or its second derivative along the run axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SweepMetric {
    Rate(ErrorMetric),
    Curvature(ErrorMetric),
}

impl SweepMetric {
    pub fn metric(&self) -> ErrorMetric {
        match *self {
            SweepMetric::Rate(m) | SweepMetric::Curvature(m) => m,
        }
    }

    fn file_name(&self) -> String {
        let slug = self.metric().to_string().replace(':', "_");
        match self {
            SweepMetric::Rate(_) => format!("{slug}.csv"),
            SweepMetric::Curvature(_) => format!("d2_{slug}.csv"),
        }
    }
}

impl std::fmt::Display for SweepMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepMetric::Rate(m) => write!(f, "{m}"),
            SweepMetric::Curvature(m) => write!(f, "d2-{m}"),
        }
    }
}

impl std::str::FromStr for SweepMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.strip_prefix("d2-") {
            Some(rest) => Ok(SweepMetric::Curvature(rest.parse()?)),
            None => Ok(SweepMetric::Rate(s.parse()?)),
        }
    }
}

impl TryFrom<String> for SweepMetric {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SweepMetric> for String {
    fn from(m: SweepMetric) -> Self {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Geometry, thresholds and theorem intervals.
    Analyze,
    /// Error rates and curvature estimates over the grid.
    Sweep { metrics: Vec<SweepMetric> },
    /// Inflection scan of one PEP over the band between its thresholds,
    /// using `grid.points` interior points.
    Scan { i: usize, j: usize },
    /// Calibrate the design SNR to `target` and probe `[γ₀, span·γ₀]`.
    Conjecture { target: f64, span: f64 },
    /// Chi-square error floor in `n` dimensions.
    Chi2 { n: usize },
    Jensen { metric: ErrorMetric, a: f64, b: f64, lambda: f64 },
    Sphere { noise_power: f64, epsilon: Option<f64> },
    /// Curvature of `Pr{s_i → s_j}` where only the weaker low-SNR bound
    /// claims convexity (`n > 2`), on `grid.points` values.
    PrintedClaim { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    #[serde(default)]
    pub auto_normalize: bool,
    pub axis: Axis,
    pub grid: GridSpec,
    pub samples: u64,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::Validation(format!(
                "samples must be at least {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        self.grid.validate()
    }

    pub fn budget(&self) -> Budget {
        Budget::new(self.samples, self.seed)
    }

    fn header_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Reads the configuration embedded in any output file, or a bare config JSON.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    if let Some(rest) = text.strip_prefix("# config: ") {
        let line = rest.lines().next().unwrap_or_default();
        return Ok(serde_json::from_str(line)?);
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("config") {
        Some(cfg) => Ok(serde_json::from_value(cfg.clone())?),
        None => Ok(serde_json::from_value(value)?),
    }
}

/// Files written by a run and a short text for the terminal.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub message: String,
}

/// Named file contents produced by a run, in creation order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rendered {
    pub files: Vec<(String, String)>,
    pub message: String,
}

#[derive(Default)]
struct Writer {
    files: Vec<(String, String)>,
}

impl Writer {
    fn put(&mut self, name: &str, content: &str) -> Result<()> {
        self.files.push((name.to_string(), content.to_string()));
        Ok(())
    }
}

fn csv_preamble(config: &RunConfig) -> Result<String> {
    Ok(format!(
        "# config: {}\n# sampler: {}\n",
        config.header_json()?,
        serde_json::to_string(&sampler_info())?
    ))
}

fn json_document(config: &RunConfig, results: serde_json::Value) -> Result<String> {
    let doc = json!({
        "config": config,
        "sampler": sampler_info(),
        "results": results,
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

fn csv_body<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rate sweep table: `gamma|noise_power, metric, mean, std_err, samples, seed`.
pub fn rate_csv(config: &RunConfig, metric: ErrorMetric, rows: &[(f64, Estimate<f64>)]) -> Result<String> {
    let first = match config.axis {
        Axis::Snr => "gamma",
        Axis::NoisePower => "noise_power",
    };
    let body = csv_body(&[first, "metric", "mean", "std_err", "samples", "seed"], |w| {
        let name = metric.to_string();
        for (x, e) in rows {
            w.write_record([
                x.to_string(),
                name.clone(),
                e.mean.to_string(),
                e.std_err.to_string(),
                e.samples.to_string(),
                e.seed.to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(csv_preamble(config)? + &body)
}

/// Curvature table: `gamma_or_pn, axis, value, std_err, verdict`.
pub fn curvature_csv(config: &RunConfig, rows: &[CurvatureEstimate<f64>]) -> Result<String> {
    let body = csv_body(&["gamma_or_pn", "axis", "value", "std_err", "verdict"], |w| {
        for e in rows {
            w.write_record([
                e.at.to_string(),
                e.axis.name().to_string(),
                e.value.to_string(),
                e.std_err.to_string(),
                e.sign().symbol().to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(csv_preamble(config)? + &body)
}

fn geometry_csv(config: &RunConfig, th: &ThresholdSet<f64>) -> Result<String> {
    let body = csv_body(&["index", "d_min", "d_max", "bounded"], |w| {
        for (i, e) in th.extents.iter().enumerate() {
            w.write_record([
                i.to_string(),
                e.d_min.to_string(),
                e.d_max.to_string(),
                e.bounded.to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(csv_preamble(config)? + &body)
}

fn format_interval(iv: &Interval<f64>) -> String {
    let verdict = serde_json::to_value(iv.verdict)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    let mut s = format!("({}, {}): {verdict}", iv.lo, iv.hi);
    if let Some(note) = &iv.note {
        let _ = write!(s, " [{note}]");
    }
    s
}

fn theorem_summary(config: &RunConfig, c: &Constellation<f64>, th: &ThresholdSet<f64>) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "# config: {}", config.header_json()?);
    let _ = writeln!(s, "constellation {} (M = {}, n = {})", c.name(), c.len(), c.dim());
    let _ = writeln!(s, "d_min = {}", th.d_min);
    let mut metrics = vec![ErrorMetric::Ser];
    if c.labels().is_some() {
        metrics.push(ErrorMetric::Ber);
    }
    metrics.extend((0..c.len()).map(ErrorMetric::SerPoint));
    for axis in [Axis::Snr, Axis::NoisePower] {
        let _ = writeln!(s, "\n[{} axis]", axis.name());
        for &m in &metrics {
            let ivs = th.theorem_intervals(m, axis)?;
            let parts: Vec<String> = ivs.iter().map(format_interval).collect();
            let _ = writeln!(s, "{m}: {}: {}", theorem_name(m, axis, c.dim()), parts.join("; "));
        }
        let _ = writeln!(
            s,
            "{}: per-pair thresholds in thresholds.json",
            theorem_name(ErrorMetric::Pep(0, 1), axis, c.dim())
        );
    }
    Ok(s)
}

fn analyze(config: &RunConfig, c: &Constellation<f64>, w: &mut Writer) -> Result<String> {
    let th = thresholds(c)?;
    w.put("geometry.csv", &geometry_csv(config, &th)?)?;
    w.put("thresholds.json", &json_document(config, serde_json::to_value(&th)?)?)?;
    let text = theorem_summary(config, c, &th)?;
    w.put("summary.txt", &text)?;
    let results = json!({
        "d_min": th.d_min,
        "ser_snr_high": th.ser_snr_high,
        "ber_snr_high": th.ber_snr_high,
        "ser_noise_small": th.ser_noise_small,
        "ber_noise_small": th.ber_noise_small,
        "bounded_regions": th.extents.iter().filter(|e| e.bounded).count(),
    });
    w.put("summary.json", &json_document(config, results)?)?;
    Ok(text)
}

fn channel(axis: Axis, x: f64) -> Result<ChannelParams<f64>> {
    match axis {
        Axis::Snr => ChannelParams::from_snr(x),
        Axis::NoisePower => ChannelParams::from_noise_power(x),
    }
}

fn sweep(config: &RunConfig, c: &Constellation<f64>, metrics: &[SweepMetric], w: &mut Writer) -> Result<String> {
    if metrics.is_empty() {
        return Err(Error::Validation("sweep needs at least one metric".into()));
    }
    for m in metrics {
        m.metric().validate(c)?;
    }
    let grid = config.grid.values();
    let budget = config.budget();
    let mut names = Vec::new();
    for m in metrics {
        let content = match *m {
            SweepMetric::Rate(metric) => {
                let rows = grid
                    .iter()
                    .map(|&x| Ok((x, rate_mc(c, metric, &channel(config.axis, x)?, budget)?)))
                    .collect::<Result<Vec<_>>>()?;
                rate_csv(config, metric, &rows)?
            }
            SweepMetric::Curvature(metric) => {
                let rows = grid
                    .iter()
                    .map(|&x| curvature_mc(c, metric, config.axis, x, budget))
                    .collect::<Result<Vec<_>>>()?;
                curvature_csv(config, &rows)?
            }
        };
        let name = m.file_name();
        w.put(&name, &content)?;
        names.push(name);
    }
    w.put("summary.json", &json_document(config, json!({ "files": names }))?)?;
    Ok(format!("wrote {} sweep table(s)", names.len()))
}

fn scan(config: &RunConfig, c: &Constellation<f64>, i: usize, j: usize, w: &mut Writer) -> Result<String> {
    let th = thresholds(c)?;
    let (lo, hi, parity) = th.pep_band(i, j, config.axis)?;
    let grid = interior_log_grid(lo, hi, config.grid.points);
    let metric = ErrorMetric::Pep(i, j);
    let budget = config.budget();
    let report = inflection_scan(|x| curvature_mc(c, metric, config.axis, x, budget), &grid, config.axis, parity)?;
    w.put("scan.csv", &curvature_csv(config, &report.estimates)?)?;
    let results = json!({
        "metric": metric,
        "theorem": theorem_name(metric, config.axis, c.dim()),
        "band": [lo, hi],
        "theorem_intervals": th.theorem_intervals(metric, config.axis)?,
        "parity_holds": report.parity_holds(),
        "report": report,
    });
    w.put("summary.json", &json_document(config, results)?)?;
    Ok(format!(
        "{} sign change(s) over ({lo}, {hi}); status {:?}, expected parity {:?}, observed {:?}",
        report.sign_changes, report.status, report.parity_expected, report.parity_observed
    ))
}

/// Runs `config`, writing its outputs into `out` (created if missing).
pub fn execute(config: &RunConfig, out: &Path) -> Result<RunOutput> {
    let rendered = render(config)?;
    fs::create_dir_all(out)?;
    let mut files = Vec::with_capacity(rendered.files.len());
    for (name, content) in &rendered.files {
        let path = out.join(name);
        fs::write(&path, content)?;
        files.push(path);
    }
    Ok(RunOutput {
        files,
        message: rendered.message,
    })
}

/// Runs `config` and returns the output files in memory.
pub fn render(config: &RunConfig) -> Result<Rendered> {
    config.validate()?;
    let mut w = Writer::default();
    let budget = config.budget();
    let message = match &config.command {
        Command::Chi2 { n } => {
            let e: Estimate<f64> = chi_square_floor(*n, budget)?;
            w.put("summary.json", &json_document(config, json!({ "n": n, "estimate": e }))?)?;
            format!("Pr{{|z|^2 > n + sqrt(2n)}} for n = {n}: {} ± {}", e.mean, e.std_err)
        }
        command => {
            let c = config.source.load(config.auto_normalize)?;
            match command {
                Command::Analyze => analyze(config, &c, &mut w)?,
                Command::Sweep { metrics } => sweep(config, &c, metrics, &mut w)?,
                Command::Scan { i, j } => scan(config, &c, *i, *j, &mut w)?,
                Command::Conjecture { target, span } => {
                    let r = calibrated_conjecture_probe(&c, *target, *span, config.grid.points, budget)?;
                    for s in &r.scans {
                        let name = format!("d2_{}.csv", s.metric.replace(':', "_"));
                        w.put(&name, &curvature_csv(config, &s.report.estimates)?)?;
                    }
                    let msg = match r.gamma0 {
                        Some(g) => format!(
                            "design snr {g}: {} confident positive, {} confident negative, {} indeterminate",
                            r.confident_positive, r.confident_negative, r.indeterminate
                        ),
                        None => format!(
                            "target not reached: {}",
                            r.calibration.as_ref().map(|c| c.message.as_str()).unwrap_or_default()
                        ),
                    };
                    w.put("summary.json", &json_document(config, serde_json::to_value(&r)?)?)?;
                    msg
                }
                Command::Jensen { metric, a, b, lambda } => {
                    let r = jensen_probe(&c, *metric, config.axis, *a, *b, *lambda, budget)?;
                    w.put("summary.json", &json_document(config, serde_json::to_value(&r)?)?)?;
                    format!(
                        "m(mixed) = {} vs chord {} (gain {}, slack {}): {}",
                        r.at_mixed.mean,
                        r.chord,
                        r.sharing_gain,
                        r.slack,
                        if r.holds { "holds" } else { "violated" }
                    )
                }
                Command::Sphere { noise_power, epsilon } => {
                    let r = sphere_hardening_report(&c, *noise_power, *epsilon)?;
                    w.put("summary.json", &json_document(config, serde_json::to_value(&r)?)?)?;
                    format!("{}; radius {}", r.verdict, r.radius)
                }
                Command::PrintedClaim { i, j } => {
                    let r = printed_claim_probe(&c, *i, *j, config.grid.points, budget)?;
                    w.put("printed_claim.csv", &curvature_csv(config, &r.estimates)?)?;
                    w.put("summary.json", &json_document(config, serde_json::to_value(&r)?)?)?;
                    format!(
                        "{} of {} points in ({}, {}] confidently concave",
                        r.discrepancies.len(),
                        r.estimates.len(),
                        r.low_derived,
                        r.low_printed
                    )
                }
                Command::Chi2 { .. } => unreachable!(),
            }
        }
    };
    Ok(Rendered {
        files: w.files,
        message,
    })
}
