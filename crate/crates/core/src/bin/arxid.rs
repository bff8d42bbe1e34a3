//! Command-line front end: simulate ARX records, identify models from
//! CSV data, and inspect pencil eigenstructure.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 algorithmic
//! failure (order search, decomposition, or bootstrap breakdown).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use arxid::error::Error;
use arxid::estimation::{
    build_lagged_matrix, build_noise_covariance, identify, identify_evd, sample_covariance,
    GuessDiagnostics,
};
use arxid::io::{read_csv, write_csv, write_report};
use arxid::signals::{generate_prbs_samples, noise_variance_for_snr, simulate_arx, PrbsSpec};
use arxid::types::{ArxModel, DataSet, IdentificationConfig, IdentificationReport, NoiseModel};
use arxid::Result;

#[derive(Parser)]
#[command(
    name = "arxid",
    version,
    about = "SISO ARX identification via generalized spectral decomposition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ARX record with PRBS excitation into a CSV file.
    Simulate(SimulateArgs),
    /// Estimate order, parameters and noise from a CSV record.
    Identify(IdentifyArgs),
    /// Decompose a covariance pencil at a chosen stacking lag.
    InspectEvd(InspectArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Autoregressive coefficients a1,a2,.. (comma separated).
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    a: String,
    /// Input coefficients b_D,b_D+1,.. (comma separated).
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// Input delay D.
    #[arg(long, default_value_t = 0)]
    delay: usize,
    /// PRBS shift-register length; one full period is 2^order - 1 samples.
    #[arg(long, default_value_t = 10)]
    prbs_order: usize,
    /// Record length; defaults to one full PRBS period.
    #[arg(long)]
    n: Option<usize>,
    /// Signal-to-noise ratio var(y*)/var(v); translated to an
    /// innovation variance through the noise gain of 1/A.
    #[arg(long, conflicts_with = "sigma_e2")]
    snr: Option<f64>,
    /// Innovation variance; 0 for a noise-free record.
    #[arg(long)]
    sigma_e2: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path; a JSON sidecar lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IdentifyArgs {
    /// Input CSV with header k,u,y[,y_star].
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    eta_init: usize,
    #[arg(long, default_value_t = 10)]
    eta_max: usize,
    /// Verification stacks eta_guess + this many extra lags.
    #[arg(long, default_value_t = 3)]
    l_offset: usize,
    #[arg(long, default_value_t = 0.15)]
    unity_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    conv_tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Bootstrap replicates; 0 skips uncertainty estimation.
    #[arg(long, default_value_t = 100)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subtract channel means before estimation.
    #[arg(long, default_value_t = false)]
    detrend: bool,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tidy CSV of eigenvalues and iteration traces (written on
    /// success and on order-search failure).
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    /// Input CSV with header k,u,y[,y_star].
    #[arg(long)]
    input: PathBuf,
    /// Stacking lag L; the pencil has dimension 2(L+1).
    #[arg(long)]
    l_stack: usize,
    /// JSON noise model {"sigma_e2": .., "acvf": [..]} for the
    /// right-hand side.
    #[arg(
        long,
        conflicts_with = "identity",
        required_unless_present = "identity"
    )]
    acvf: Option<PathBuf>,
    /// Use the identity right-hand side (plain covariance spectrum).
    #[arg(long, default_value_t = false)]
    identity: bool,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let with_code = |e: Error| {
        let code = classify(&e);
        (e, code)
    };
    let outcome = match cli.command {
        // Everything wrong under simulate traces back to the flags.
        Command::Simulate(args) => cmd_simulate(&args).map_err(|e| (e, 1)),
        Command::Identify(args) => cmd_identify(&args).map_err(with_code),
        Command::InspectEvd(args) => cmd_inspect(&args).map_err(with_code),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((error, code)) => {
            eprintln!("error: {error}");
            ExitCode::from(code)
        }
    }
}

/// 1 for input-shaped failures, 2 for algorithmic ones.
fn classify(e: &Error) -> u8 {
    match e {
        Error::DimensionMismatch(_)
        | Error::InvalidArgument(_)
        | Error::InsufficientData { .. }
        | Error::InvalidPrbs(_)
        | Error::CsvParse { .. }
        | Error::Io(_)
        | Error::Json(_) => 1,
        _ => 2,
    }
}

fn parse_coefficients(text: &str, what: &str) -> Result<Vec<f64>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: {tok:?} is not a number")))
        })
        .collect()
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let a = parse_coefficients(&args.a, "--a")?;
    let b = parse_coefficients(&args.b, "--b")?;
    if b.is_empty() {
        return Err(Error::InvalidArgument(
            "--b needs at least one coefficient".into(),
        ));
    }
    let model = ArxModel::new(a, b, args.delay)?;
    if !model.is_stable()? {
        return Err(Error::UnstableModel {
            radius: model.spectral_radius()?,
        });
    }
    let spec = PrbsSpec::maximal(args.prbs_order)?;
    let len = args.n.unwrap_or_else(|| spec.period());
    let u = generate_prbs_samples(&spec, len)?;
    let sigma_e2 = match (args.snr, args.sigma_e2) {
        (Some(snr), None) => noise_variance_for_snr(&model, &u, snr)?,
        (None, Some(s)) => s,
        (None, None) => 0.0,
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let rec = simulate_arx(&model, &u, sigma_e2, args.seed)?;

    let variance = |xs: &[f64]| {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
    };
    let var_star = variance(&rec.y_star);
    let var_v = variance(&rec.v);
    let achieved_snr = if var_v > 0.0 {
        Some(var_star / var_v)
    } else {
        None
    };

    let data = DataSet::new(u, rec.y.clone())?;
    write_csv(&args.out, &data, Some(&rec.y_star))?;
    let sidecar = args.out.with_extension("json");
    let meta = serde_json::json!({
        "model": model,
        "sigma_e2": sigma_e2,
        "seed": args.seed,
        "samples": data.len(),
        "prbs_order": args.prbs_order,
        "var_y_star": var_star,
        "var_v": var_v,
        "achieved_snr": achieved_snr,
    });
    let mut w = BufWriter::new(File::create(&sidecar)?);
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    w.flush()?;
    println!(
        "wrote {} samples to {} (sidecar {})",
        data.len(),
        args.out.display(),
        sidecar.display()
    );
    Ok(())
}

fn cmd_identify(args: &IdentifyArgs) -> Result<()> {
    let record = read_csv(&args.input)?;
    let data = if args.detrend {
        record.data.detrend()
    } else {
        record.data
    };
    let config = IdentificationConfig {
        eta_guess_initial: args.eta_init,
        eta_max: args.eta_max,
        l_verify_offset: args.l_offset,
        unity_tol: args.unity_tol,
        conv_tol: args.conv_tol,
        max_inner_iters: args.max_iter,
        acvf_grid_points: IdentificationConfig::default().acvf_grid_points,
        bootstrap_reps: args.bootstrap,
        seed: args.seed,
    };
    match identify(&data, &config) {
        Ok(report) => {
            if let Some(path) = &args.diagnostics {
                write_success_diagnostics(path, &report)?;
            }
            match &args.out {
                Some(path) => write_report(path, &report)?,
                None => {
                    let stdout = std::io::stdout();
                    let mut w = stdout.lock();
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
            }
            Ok(())
        }
        Err(Error::OrderSearchFailed {
            initial,
            max,
            attempts,
        }) => {
            if let Some(path) = &args.diagnostics {
                write_failure_diagnostics(path, &attempts)?;
            }
            for att in &attempts {
                if att.note.is_empty() {
                    eprintln!(
                        "guess {}: {} unity eigenvalue(s) at L = {} imply order {}",
                        att.eta_guess, att.d_hat, att.l_verify, att.eta_implied
                    );
                } else {
                    eprintln!("guess {}: {}", att.eta_guess, att.note);
                }
            }
            Err(Error::OrderSearchFailed {
                initial,
                max,
                attempts,
            })
        }
        Err(e) => Err(e),
    }
}

/// Tidy long-format rows: guess,kind,step,index,value.
fn write_success_diagnostics(path: &Path, report: &IdentificationReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "guess,kind,step,index,value")?;
    let g = report.eta_hat;
    for (i, lambda) in report.eigenvalues.iter().enumerate() {
        writeln!(w, "{g},eigenvalue,0,{i},{lambda:.16e}")?;
    }
    for rec in &report.trace {
        for (i, t) in rec.theta.iter().enumerate() {
            writeln!(w, "{g},theta,{},{i},{t:.16e}", rec.iteration)?;
        }
        writeln!(w, "{g},sigma_e2,{},0,{:.16e}", rec.iteration, rec.sigma_e2)?;
        if let Some(c) = rec.theta_change {
            writeln!(w, "{g},theta_change,{},0,{c:.16e}", rec.iteration)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_failure_diagnostics(path: &Path, attempts: &[GuessDiagnostics]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "guess,kind,step,index,value")?;
    for att in attempts {
        let g = att.eta_guess;
        for (i, lambda) in att.eigenvalues.iter().enumerate() {
            writeln!(w, "{g},eigenvalue,0,{i},{lambda:.16e}")?;
        }
        writeln!(w, "{g},d_hat,0,0,{}", att.d_hat)?;
        writeln!(w, "{g},eta_implied,0,0,{}", att.eta_implied)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let record = read_csv(&args.input)?;
    let data = record.data;
    let l = args.l_stack;
    if 2 * l > data.len() {
        return Err(Error::InvalidArgument(format!(
            "stacking lag {} exceeds half the record length {}",
            l,
            data.len()
        )));
    }
    let stack = build_lagged_matrix(&data, l)?;
    let s = sample_covariance(&stack)?;
    let sigma = if args.identity {
        ndarray::Array2::eye(2 * (l + 1))
    } else {
        let path = args.acvf.as_ref().expect("clap enforces one source");
        let noise: NoiseModel = serde_json::from_reader(File::open(path)?)?;
        build_noise_covariance(&noise, l)?
    };
    let sol = identify_evd(&s, &sigma)?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(out, "index,eigenvalue")?;
    for (i, pair) in sol.finite.iter().enumerate() {
        let v = pair.value().expect("finite pair has a value");
        if v.im == 0.0 {
            writeln!(out, "{i},{:.16e}", v.re)?;
        } else {
            writeln!(out, "{i},{:.16e}{:+.16e}i", v.re, v.im)?;
        }
    }
    writeln!(out, "# infinite_count = {}", sol.infinite_count())?;
    out.flush()?;
    Ok(())
}
