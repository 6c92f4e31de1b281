use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use convexity_atlas::acceptance::{junit_xml, run_suite, Options};
use convexity_atlas::run::{execute, load_config, Command, GridSpec, RunConfig, Source, SweepMetric};
use convexity_atlas::{Axis, ErrorMetric, StandardKind};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "convexity-atlas", version, about = "Convexity of ML error rates in AWGN")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decision-region geometry, thresholds and theorem intervals.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Error rates and second-derivative estimates over a grid.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Comma-separated: ser, ser:i, pep:i:j, ber and their d2- forms.
        #[arg(long, value_delimiter = ',', default_value = "ser")]
        metrics: Vec<SweepMetric>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Inflection scan of one pairwise error probability between its thresholds.
    Scan {
        #[command(flatten)]
        source: SourceArgs,
        /// Pair as i:j (error from point i into the cell of point j).
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        #[arg(long, default_value = "snr")]
        axis: Axis,
        #[arg(long, default_value_t = 30)]
        grid_points: usize,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the acceptance suite.
    Verify {
        /// Run only the named criteria (repeatable).
        #[arg(long)]
        only: Vec<String>,
        /// Directory of constellation JSON files to check as well.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// JUnit XML report path.
        #[arg(long, default_value = "acceptance-junit.xml")]
        junit: PathBuf,
    },
    #[command(subcommand)]
    Probe(Probe),
    /// Re-run the configuration embedded in an output file.
    Rerun {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum Probe {
    /// Curvature signs of SER/BER above a calibrated design SNR on a random spherical code.
    Conjecture {
        /// Dimension.
        #[arg(long)]
        n: usize,
        /// Number of codewords.
        #[arg(long = "M", alias = "points")]
        m: usize,
        #[arg(long, default_value_t = 1e-2)]
        target: f64,
        /// The probed range is [γ₀, span·γ₀].
        #[arg(long, default_value_t = 10.0)]
        span: f64,
        #[arg(long, default_value_t = 12)]
        grid_points: usize,
        /// Seed of the random code.
        #[arg(long, default_value_t = 7)]
        code_seed: u64,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Chi-square error floor Pr{|z|² > n + √(2n)}.
    Chi2 {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time/power sharing check between two certified-convex operating points.
    Jensen {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "ber")]
        metric: ErrorMetric,
        #[arg(long, default_value = "snr")]
        axis: Axis,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Does every decision region enclose the hardened noise sphere?
    Sphere {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        noise_power: f64,
        /// Defaults to noise_power / 10.
        #[arg(long)]
        epsilon: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Curvature of a PEP where only the weaker low-SNR bound claims convexity (n > 2).
    PrintedClaim {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_parser = parse_pair)]
        pair: (usize, usize),
        #[arg(long, default_value_t = 12)]
        grid_points: usize,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct SourceArgs {
    /// Built-in constellation: bpsk, qpsk, psk8, qam16, grid:SIDE:DIM, hypercube:N, spherical:M:N:SEED.
    #[arg(long)]
    builtin: Option<StandardKind>,
    /// Constellation JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "convexity-atlas-out")]
    out: PathBuf,
    /// Normalize a file constellation to unit average energy instead of rejecting it.
    #[arg(long)]
    auto_normalize: bool,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value = "snr")]
    axis: Axis,
    #[arg(long, default_value_t = 0.5)]
    grid_min: f64,
    #[arg(long, default_value_t = 16.0)]
    grid_max: f64,
    #[arg(long, default_value_t = 10)]
    grid_points: usize,
    /// Log-spaced grid.
    #[arg(long)]
    log: bool,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (i, j) = s.split_once(':').ok_or_else(|| format!("expected i:j, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(i)?, p(j)?))
}

impl SourceArgs {
    fn source(&self) -> Source {
        match (&self.builtin, &self.file) {
            (_, Some(path)) => Source::File(path.clone()),
            (Some(kind), None) => Source::Builtin(*kind),
            (None, None) => Source::Builtin(StandardKind::Bpsk),
        }
    }
}

/// Grid placeholder for commands that only use `points`.
fn points_only(points: usize) -> GridSpec {
    GridSpec {
        min: 1.0,
        max: 2.0,
        points,
        log: true,
    }
}

fn config(
    command: Command,
    source: Source,
    out: &OutArgs,
    axis: Axis,
    grid: GridSpec,
    mc: Option<&McArgs>,
) -> RunConfig {
    RunConfig {
        command,
        source,
        auto_normalize: out.auto_normalize,
        axis,
        grid,
        samples: mc.map_or(100_000, |m| m.samples),
        seed: mc.map_or(1, |m| m.seed),
    }
}

fn run(cfg: RunConfig, out: &OutArgs) -> ExitCode {
    match execute(&cfg, &out.out) {
        Ok(o) => {
            println!("{}", o.message);
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn verify(only: Vec<String>, fixtures: Option<PathBuf>, samples: u64, seed: u64, junit: PathBuf) -> ExitCode {
    let opts = Options {
        samples,
        seed,
        fixtures,
        ..Options::default()
    };
    let results = match run_suite(&only, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    for r in &results {
        println!("{}", r.line());
        if !r.passed() {
            for d in &r.details {
                println!("    {d}");
            }
        }
    }
    if let Err(e) = std::fs::write(&junit, junit_xml(&results)) {
        eprintln!("error: cannot write {}: {e}", junit.display());
        return ExitCode::from(EXIT_USAGE);
    }
    let passed = results.iter().filter(|r| r.passed()).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Cmd::Analyze { source, out } => {
            let cfg = config(Command::Analyze, source.source(), &out, Axis::Snr, points_only(1), None);
            run(cfg, &out)
        }
        Cmd::Sweep {
            source,
            grid,
            mc,
            metrics,
            out,
        } => {
            let spec = GridSpec {
                min: grid.grid_min,
                max: grid.grid_max,
                points: grid.grid_points,
                log: grid.log,
            };
            let cfg = config(Command::Sweep { metrics }, source.source(), &out, grid.axis, spec, Some(&mc));
            run(cfg, &out)
        }
        Cmd::Scan {
            source,
            pair: (i, j),
            axis,
            grid_points,
            mc,
            out,
        } => {
            let cfg = config(Command::Scan { i, j }, source.source(), &out, axis, points_only(grid_points), Some(&mc));
            run(cfg, &out)
        }
        Cmd::Verify {
            only,
            fixtures,
            samples,
            seed,
            junit,
        } => verify(only, fixtures, samples, seed, junit),
        Cmd::Rerun { config: path, out } => match load_config(&path) {
            Ok(cfg) => run(cfg, &out),
            Err(e) => {
                eprintln!("error: cannot read configuration from {}: {e}", path.display());
                ExitCode::from(EXIT_USAGE)
            }
        },
        Cmd::Probe(p) => match p {
            Probe::Conjecture {
                n,
                m,
                target,
                span,
                grid_points,
                code_seed,
                mc,
                out,
            } => {
                let source = Source::Builtin(StandardKind::RandomSpherical {
                    points: m,
                    dim: n,
                    seed: code_seed,
                });
                let cfg = config(
                    Command::Conjecture { target, span },
                    source,
                    &out,
                    Axis::Snr,
                    points_only(grid_points),
                    Some(&mc),
                );
                run(cfg, &out)
            }
            Probe::Chi2 { n, mc, out } => {
                let cfg = config(
                    Command::Chi2 { n },
                    Source::Builtin(StandardKind::Bpsk),
                    &out,
                    Axis::Snr,
                    points_only(1),
                    Some(&mc),
                );
                run(cfg, &out)
            }
            Probe::Jensen {
                source,
                metric,
                axis,
                a,
                b,
                lambda,
                mc,
                out,
            } => {
                let cmd = Command::Jensen { metric, a, b, lambda };
                let cfg = config(cmd, source.source(), &out, axis, points_only(1), Some(&mc));
                run(cfg, &out)
            }
            Probe::Sphere {
                source,
                noise_power,
                epsilon,
                out,
            } => {
                let cmd = Command::Sphere { noise_power, epsilon };
                let cfg = config(cmd, source.source(), &out, Axis::NoisePower, points_only(1), None);
                run(cfg, &out)
            }
            Probe::PrintedClaim {
                source,
                pair: (i, j),
                grid_points,
                mc,
                out,
            } => {
                let cmd = Command::PrintedClaim { i, j };
                let cfg = config(cmd, source.source(), &out, Axis::Snr, points_only(grid_points), Some(&mc));
                run(cfg, &out)
            }
        },
    }
}
