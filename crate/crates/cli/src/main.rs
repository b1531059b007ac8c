use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;
use toeplitz_core::calculus::ChiSpec;
use toeplitz_core::harness::{
    emit_report, run_experiment, ConvergenceReport, Experiment, SweepConfig,
};
use toeplitz_core::symbols::{check_symbol_class, SampleGrid};
use toeplitz_core::toeplitz::{assemble, weighted_kernel_at, write_binary, write_csv};
use toeplitz_core::{build_basis, build_quadrature, Error, OrderFunction, QuadratureSpec, Symbol};

#[derive(Parser)]
#[command(
    name = "toeplitz-lab",
    version,
    about = "Berezin-Toeplitz quantization laboratory"
)]
struct Cli {
    /// JSON sweep configuration; flags given on the command line override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// `bargmann` or `cp1`.
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long = "N-list", value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble one Toeplitz matrix and write it as CSV or binary (`.bin`).
    Quantize {
        #[arg(long)]
        geometry: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Bargmann truncation radius (default: symbol support, else 1).
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Composition remainder sweep against the truncated star product.
    Compose {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long = "J")]
        order: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the experiment named in the configuration.
    Sweep {
        /// Overrides the experiment of the configuration file.
        #[arg(long)]
        experiment: Option<String>,
    },
    /// Functional calculus sweep with a Helffer-Sjöstrand check.
    Funcalc {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        symbol: Option<String>,
        /// `center,width[,bump|plateau]`.
        #[arg(long, value_parser = parse_chi)]
        chi: Option<ChiSpec>,
        #[arg(long)]
        floor: Option<f64>,
        /// Target ∂̄-decay order of the almost-analytic extension.
        #[arg(long = "M")]
        decay_order: Option<u32>,
        #[arg(long = "Y")]
        strip: Option<f64>,
        #[arg(long)]
        hs_level: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Trace formula sweep.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        symbol: Option<String>,
    },
    /// Parametrix residual sweep.
    Parametrix {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        symbol: Option<String>,
        /// `re[,im]`.
        #[arg(long, value_parser = parse_pair)]
        z: Option<[f64; 2]>,
        #[arg(long = "J")]
        order: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Weighted kernel values as CSV at one level, or the expansion sweep without `--N`.
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, default_value = "1")]
        symbol: String,
        /// `x_re,x_im,y_re,y_im`; repeatable.
        #[arg(long = "pair", value_parser = parse_quad)]
        pairs: Vec<[f64; 4]>,
        /// Seeded near-diagonal pairs when no `--pair` is given.
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Certify `f ∈ S_δ(m)` on the default grid.
    CheckSymbols {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value = "1")]
        m: String,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(
            long = "N-list",
            value_delimiter = ',',
            default_value = "16,32,64,128,256,512,1024"
        )]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        max_alpha: u32,
    },
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    match parse_numbers(s)?[..] {
        [re] => Ok([re, 0.0]),
        [re, im] => Ok([re, im]),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn parse_quad(s: &str) -> Result<[f64; 4], String> {
    parse_numbers(s)?
        .try_into()
        .map_err(|_| "expected `x_re,x_im,y_re,y_im`".into())
}

fn parse_chi(s: &str) -> Result<ChiSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let (center, width) = match parts[..] {
        [c, w] | [c, w, _] => (num(c)?, num(w)?),
        _ => return Err("expected `center,width[,shape]`".into()),
    };
    if !(width > 0.0) {
        return Err(format!("width {width} must be positive"));
    }
    Ok(match parts.get(2) {
        None | Some(&"bump") => ChiSpec::bump(center, width),
        Some(&"plateau") => ChiSpec::plateau(center, width),
        Some(other) => return Err(format!("unknown shape `{other}`")),
    })
}

/// Exit status 2 is reserved for configuration and usage errors.
struct Failure {
    usage: bool,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let usage = matches!(
            error.downcast_ref::<Error>(),
            Some(
                Error::Config(_)
                    | Error::Syntax { .. }
                    | Error::UnknownIdentifier { .. }
                    | Error::DeltaOutOfRange(_)
                    | Error::Json(_)
            )
        ) || error.downcast_ref::<serde_json::Error>().is_some();
        Self { usage, error }
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure {
        usage: true,
        error: anyhow!("{msg}"),
    }
}

fn load_config(cli: &Cli, experiment: Experiment) -> Result<SweepConfig, Failure> {
    let mut c = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(|e| Failure {
                    usage: true,
                    error: e,
                })?;
            let c = SweepConfig::from_json(&text)?;
            if c.experiment != experiment {
                return Err(usage(format!(
                    "configuration is for `{}`, not `{}`",
                    c.experiment.name(),
                    experiment.name()
                )));
            }
            c
        }
        None => SweepConfig::new(experiment),
    };
    if cli.seed.is_some() {
        c.seed = cli.seed;
    }
    Ok(c)
}

fn apply_common(c: &mut SweepConfig, common: &Common) {
    if common.geometry.is_some() {
        c.geometry = common.geometry.clone();
    }
    if common.n_list.is_some() {
        c.n_list = common.n_list.clone();
    }
    if common.delta.is_some() {
        c.delta = common.delta;
    }
}

fn set<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        *slot = value.clone();
    }
}

fn out_dir(cli: &Cli, c: &SweepConfig) -> PathBuf {
    match (&c.out_dir, cli.out_dir == Path::new(".")) {
        (Some(d), true) => PathBuf::from(d),
        _ => cli.out_dir.clone(),
    }
}

fn finish(cli: &Cli, c: &SweepConfig) -> Result<(ConvergenceReport, PathBuf), Failure> {
    let report = run_experiment(c)?;
    let dir = out_dir(cli, c);
    let (csv, json) = emit_report(&report, &dir, c.experiment.name())?;
    print!("{}", report.summary());
    println!("wrote {} and {}", csv.display(), json.display());
    Ok((report, dir))
}

fn status(report: &ConvergenceReport) -> ExitCode {
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn compose_report(report: &ConvergenceReport) -> serde_json::Value {
    let raw = report.series("composition_raw");
    let normalized = report.series("composition");
    let per_n: Vec<_> = raw
        .iter()
        .zip(&normalized)
        .map(|(r, q)| json!({"N": r.0, "err_norm": r.1, "normalized_err": q.1}))
        .collect();
    let fit = report.fit("composition");
    json!({
        "per_N": per_n,
        "fitted_slope": fit.and_then(|f| f.slope),
        "predicted_slope": fit.map(|f| f.predicted),
        "pass": report.passed(),
    })
}

fn kernel_csv(
    c: &SweepConfig,
    n: usize,
    symbol: &str,
    pairs: &[[f64; 4]],
    samples: usize,
) -> Result<String, Failure> {
    let geometry = c.geometry()?;
    let f = Symbol::parse(symbol)?.with_delta(c.delta.unwrap_or(0.0))?;
    let radius = f.support_radius(n).unwrap_or(1.0);
    let basis = build_basis(&geometry, n, radius)?;
    let points: Vec<(Complex64, Complex64)> = if pairs.is_empty() {
        // deterministic near-diagonal pairs from the seed
        let seed = c.seed.unwrap_or(0);
        let golden = 0.618_033_988_749_895;
        (0..samples)
            .map(|k| {
                let t = ((k as f64 + seed as f64) * golden).fract();
                let x = Complex64::from_polar(0.3 * t, 2.0 * PI * t * 7.0);
                let y = x + Complex64::from_polar(2.0 / (n as f64).sqrt() * t, 2.0 * PI * t * 3.0);
                (x, y)
            })
            .collect()
    } else {
        pairs
            .iter()
            .map(|p| (Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])))
            .collect()
    };
    let op = if symbol.trim() == "1" {
        None
    } else {
        let rule = build_quadrature(&basis, &QuadratureSpec::default())?;
        Some(assemble(&f, &basis, &rule)?)
    };
    let mut out = String::from("x_re,x_im,y_re,y_im,value\n");
    for (x, y) in points {
        let v = match &op {
            None => basis.weighted_kernel_at(x, y)?,
            Some(t) => weighted_kernel_at(t, &basis, x, y)?,
        };
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            x.re,
            x.im,
            y.re,
            y.im,
            v.value.norm()
        ));
    }
    Ok(out)
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    match &cli.command {
        Command::Quantize {
            geometry,
            n,
            symbol,
            delta,
            radius,
            out,
        } => {
            let mut c = SweepConfig::new(Experiment::Composition);
            c.geometry = Some(geometry.clone());
            let geometry = c.geometry()?;
            let f = Symbol::parse(symbol)?
                .with_delta(*delta)?
                .concentrated(true);
            let r = radius
                .map(|r| r * (*n as f64).powf(-delta))
                .or_else(|| f.support_radius(*n))
                .unwrap_or(1.0);
            let basis = build_basis(&geometry, *n, r)?;
            let rule = build_quadrature(&basis, &QuadratureSpec::default())?;
            let t = assemble(&f, &basis, &rule)?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            if out.extension().is_some_and(|e| e == "bin") {
                write_binary(&t.entries, out)?;
            } else {
                write_csv(&t.entries, out)?;
            }
            println!("D = {} written to {}", t.dim(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Compose {
            common,
            f,
            g,
            order,
            report,
        } => {
            let mut c = load_config(cli, Experiment::Composition)?;
            apply_common(&mut c, common);
            set(&mut c.f, f);
            set(&mut c.g, g);
            set(&mut c.order, order);
            let (r, dir) = finish(cli, &c)?;
            let path = report
                .clone()
                .unwrap_or_else(|| dir.join("compose_report.json"));
            let mut text = serde_json::to_string_pretty(&compose_report(&r))?;
            text.push('\n');
            write_text(&path, &text)?;
            Ok(status(&r))
        }
        Command::Sweep { experiment } => {
            let c = match (&cli.config, experiment) {
                (Some(_), None) => {
                    let path = cli.config.as_ref().expect("checked");
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))
                        .map_err(|e| Failure {
                            usage: true,
                            error: e,
                        })?;
                    let mut c = SweepConfig::from_json(&text)?;
                    if cli.seed.is_some() {
                        c.seed = cli.seed;
                    }
                    c
                }
                (_, Some(name)) => load_config(cli, Experiment::parse(name)?)?,
                (None, None) => return Err(usage("sweep needs --config or --experiment")),
            };
            let (r, _) = finish(cli, &c)?;
            Ok(status(&r))
        }
        Command::Funcalc {
            common,
            symbol,
            chi,
            floor,
            decay_order,
            strip,
            hs_level,
            report,
        } => {
            let mut c = load_config(cli, Experiment::Funcalc)?;
            apply_common(&mut c, common);
            set(&mut c.f, symbol);
            set(&mut c.chi, chi);
            set(&mut c.floor, floor);
            set(&mut c.decay_order, decay_order);
            set(&mut c.strip, strip);
            set(&mut c.hs_level, hs_level);
            let (r, _) = finish(cli, &c)?;
            if let Some(path) = report {
                write_text(path, &r.to_json())?;
            }
            Ok(status(&r))
        }
        Command::Trace { common, symbol } => {
            let mut c = load_config(cli, Experiment::Trace)?;
            apply_common(&mut c, common);
            set(&mut c.f, symbol);
            let (r, _) = finish(cli, &c)?;
            Ok(status(&r))
        }
        Command::Parametrix {
            common,
            symbol,
            z,
            order,
            report,
        } => {
            let mut c = load_config(cli, Experiment::Parametrix)?;
            apply_common(&mut c, common);
            set(&mut c.f, symbol);
            set(&mut c.z, z);
            set(&mut c.order, order);
            let (r, _) = finish(cli, &c)?;
            if let Some(path) = report {
                write_text(path, &r.to_json())?;
            }
            Ok(status(&r))
        }
        Command::Kernel {
            common,
            n,
            symbol,
            pairs,
            samples,
        } => {
            let mut c = load_config(cli, Experiment::Kernel)?;
            apply_common(&mut c, common);
            match n {
                Some(n) => {
                    let csv = kernel_csv(&c.resolved(), *n, symbol, pairs, *samples)?;
                    std::io::stdout().write_all(csv.as_bytes())?;
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    if symbol != "1" {
                        c.f = Some(symbol.clone());
                    }
                    let (r, _) = finish(cli, &c)?;
                    Ok(status(&r))
                }
            }
        }
        Command::CheckSymbols {
            symbol,
            m,
            delta,
            n_list,
            max_alpha,
        } => {
            let f = Symbol::parse(symbol)?.with_delta(*delta)?;
            let m = if m.trim() == "1" {
                OrderFunction::one()
            } else {
                OrderFunction::new(toeplitz_core::parse_symbol(m)?, *delta)?
            };
            if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(usage("--N-list must be strictly increasing"));
            }
            let cert = check_symbol_class(&f, &m, n_list, *max_alpha, &SampleGrid::default())?;
            let text = cert.to_json();
            println!("{text}");
            write_text(&cli.out_dir.join("certificate.json"), &(text + "\n"))?;
            Ok(if cert.certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(if f.usage { 2 } else { 1 })
        }
    }
}
