mod config;
mod error;
mod output;

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use copomo::context::{
    bundled_contexts, DEFAULT_GAMMA_DBM, DEFAULT_SAMPLES, DEFAULT_TARGET_RX_POWER_DBM,
};
use copomo::device_lab::{
    bandwidth_scale_delta, bundled_devices, fit_pa_model, fit_rb_model, RbSweepTrace, TxPowerTrace,
};
use copomo::par::with_jobs;
use copomo::power_model::total_power;
use copomo::scenario::{breakeven_boost, run_sweep};
use serde_json::json;

use crate::config::{derive_context, DeriveConfig, Named, ResolvedRun, RunConfig};
use crate::error::{trace_error, CliError, CliResult};
use crate::output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "copomo",
    version,
    about = "LTE UE power model with downlink carrier aggregation"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for context derivation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FitKind {
    Pa,
    Rb,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a device trace (TX-power sweep by default).
    FitTrace {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "pa")]
        kind: FitKind,
        /// Carrier frequency of a TX-power trace.
        #[arg(long, default_value_t = 800.0)]
        band_mhz: f64,
        /// Component-carrier bandwidth of an RB sweep.
        #[arg(long, default_value_t = 20.0)]
        bandwidth_mhz: f64,
        /// Idle power; when given, a complete profile is emitted.
        #[arg(long)]
        p_idle_mw: Option<f64>,
        #[arg(long, default_value = "dut")]
        device: String,
    },
    /// Fit an RB sweep trace.
    FitRb {
        input: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        bandwidth_mhz: f64,
    },
    /// Derive active-state probabilities for one environment.
    DeriveTheta {
        #[arg(long, default_value = "suburban")]
        environment: String,
        #[arg(long, default_value = "awgn")]
        mobility: String,
        #[arg(long, default_value_t = 800.0)]
        band_mhz: f64,
        #[arg(long, default_value_t = DEFAULT_GAMMA_DBM)]
        gamma_dbm: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_TARGET_RX_POWER_DBM, allow_negative_numbers = true)]
        target_rx_power_dbm: f64,
    },
    /// Evaluate one scenario.
    Simulate,
    /// Run the sweep of the configuration.
    Sweep,
    /// Locate the boost factor at which CA starts saving power.
    Breakeven,
    /// List bundled devices and contexts.
    ListBundled,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    match with_jobs(jobs, || run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("copomo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::FitTrace {
            input,
            kind,
            band_mhz,
            bandwidth_mhz,
            p_idle_mw,
            device,
        } => match kind {
            FitKind::Pa => cmd_fit_pa(cli, input, *band_mhz, *p_idle_mw, device),
            FitKind::Rb => cmd_fit_rb(cli, input, *bandwidth_mhz),
        },
        Command::FitRb {
            input,
            bandwidth_mhz,
        } => cmd_fit_rb(cli, input, *bandwidth_mhz),
        Command::DeriveTheta {
            environment,
            mobility,
            band_mhz,
            gamma_dbm,
            samples,
            target_rx_power_dbm,
        } => {
            let d = DeriveConfig {
                environment: Named::Name(environment.clone()),
                mobility: Named::Name(mobility.clone()),
                band_mhz: *band_mhz,
                target_rx_power_dbm: Some(*target_rx_power_dbm),
                antenna_gains_db: None,
                gamma_dbm: Some(*gamma_dbm),
                samples: Some(*samples),
                seed: None,
                max_state_rate_factor: None,
            };
            cmd_derive_theta(cli, &d)
        }
        Command::Simulate => cmd_simulate(cli),
        Command::Sweep => cmd_sweep(cli),
        Command::Breakeven => cmd_breakeven(cli),
        Command::ListBundled => cmd_list_bundled(cli),
    }
}

fn load_run(cli: &Cli) -> CliResult<(RunConfig, ResolvedRun)> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let run = cfg.resolve(cli.seed)?;
    Ok((cfg, run))
}

/// Output destination and format: flags win over the config file.
fn destination(
    cli: &Cli,
    cfg: Option<&RunConfig>,
    default: Format,
) -> CliResult<(Option<PathBuf>, Format)> {
    let out = cfg.and_then(|c| c.output.as_ref());
    let path = cli
        .output
        .clone()
        .or_else(|| out.and_then(|o| o.path.as_ref()).map(PathBuf::from));
    let format = match (cli.format, out.and_then(|o| o.format.as_deref())) {
        (Some(f), _) => f,
        (None, Some(s)) => Format::parse(s)?,
        (None, None) => default,
    };
    Ok((path, format))
}

fn open_input(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn cmd_fit_pa(
    cli: &Cli,
    input: &Path,
    band_mhz: f64,
    p_idle_mw: Option<f64>,
    device: &str,
) -> CliResult<()> {
    let trace =
        TxPowerTrace::from_csv(open_input(input)?, band_mhz, device).map_err(trace_error)?;
    let fit = fit_pa_model(&trace)?;
    eprintln!(
        "breakpoint {} dBm; low {:.3} + {:.3}/dB, high {:.3} + {:.3}/dB; P_low {:.1} P_high {:.1} P_max {:.1} mW",
        fit.gamma_dbm,
        fit.low_segment.intercept_mw,
        fit.low_segment.slope_mw_per_db,
        fit.high_segment.intercept_mw,
        fit.high_segment.slope_mw_per_db,
        fit.p_low_mw,
        fit.p_high_mw,
        fit.p_max_mw
    );
    let (path, format) = destination(cli, None, Format::Doc)?;
    let w = output::open(path.as_deref())?;
    match format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = fit
                .grid
                .iter()
                .map(|c| {
                    vec![
                        c.gamma_dbm.to_string(),
                        c.residual_ss.map(|r| r.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            output::write_records(w, &["gamma_dbm", "residual_ss"], &rows)
        }
        Format::Doc => {
            let profile = p_idle_mw
                .map(|idle| fit.device_profile(band_mhz, idle, 0.0, 0.0))
                .transpose()?;
            let doc = json!({
                "kind": "pa",
                "input": input.display().to_string(),
                "device": device,
                "profile_fragment": {
                    "frequency_mhz": band_mhz,
                    "p_low_mw": fit.p_low_mw,
                    "p_high_mw": fit.p_high_mw,
                    "p_max_mw": fit.p_max_mw,
                    "gamma_dbm": fit.gamma_dbm,
                },
                "profile": profile,
                "diagnostics": {
                    "residual_ss": fit.residual_ss,
                    "low_segment": fit.low_segment,
                    "high_segment": fit.high_segment,
                    "gamma_grid": fit.grid,
                },
            });
            output::write_doc(w, &doc)
        }
    }
}

fn cmd_fit_rb(cli: &Cli, input: &Path, bandwidth_mhz: f64) -> CliResult<()> {
    let trace = RbSweepTrace::from_csv(open_input(input)?, bandwidth_mhz).map_err(trace_error)?;
    let fit = fit_rb_model(&trace)?;
    let per_10mhz = bandwidth_scale_delta(fit.delta_ca_mw, bandwidth_mhz, 10.0)?;
    eprintln!(
        "rb slope {:.4} mW/RB, CA jump {:.2} mW at {bandwidth_mhz} MHz ({per_10mhz:.2} mW at 10 MHz), base {:.2} mW",
        fit.rb_slope_mw_per_rb, fit.delta_ca_mw, fit.base_mw
    );
    let (path, format) = destination(cli, None, Format::Doc)?;
    let w = output::open(path.as_deref())?;
    match format {
        Format::Csv => output::write_records(
            w,
            &[
                "base_mw",
                "rb_slope_mw_per_rb",
                "delta_ca_mw",
                "residual_ss",
            ],
            &[vec![
                fit.base_mw.to_string(),
                fit.rb_slope_mw_per_rb.to_string(),
                fit.delta_ca_mw.to_string(),
                fit.residual_ss.to_string(),
            ]],
        ),
        Format::Doc => {
            let doc = json!({
                "kind": "rb",
                "input": input.display().to_string(),
                "bandwidth_per_cc_mhz": bandwidth_mhz,
                "profile_fragment": {
                    "rb_slope_mw_per_rb": fit.rb_slope_mw_per_rb,
                    "delta_ca_mw": fit.delta_ca_mw,
                },
                "delta_ca_mw_at_10_mhz": per_10mhz,
                "diagnostics": { "base_mw": fit.base_mw, "residual_ss": fit.residual_ss },
            });
            output::write_doc(w, &doc)
        }
    }
}

fn cmd_derive_theta(cli: &Cli, flags: &DeriveConfig) -> CliResult<()> {
    // A config with a `derive` context takes precedence over the flags.
    let (cfg, ctx) = match &cli.config {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            let (Some(d), None, None) = (
                &cfg.context.derive,
                &cfg.context.bundled,
                &cfg.context.inline,
            ) else {
                return Err(CliError::Config(
                    "derive-theta needs a 'derive' context in the config".into(),
                ));
            };
            let gamma = cfg
                .device
                .bundled
                .as_deref()
                .and_then(copomo::device_lab::bundled_device)
                .or(cfg.device.inline)
                .map(|dev| dev.gamma_dbm)
                .unwrap_or(DEFAULT_GAMMA_DBM);
            let ctx = derive_context(d, gamma, cli.seed)?;
            (Some(cfg), ctx)
        }
        None => (None, derive_context(flags, DEFAULT_GAMMA_DBM, cli.seed)?),
    };
    eprintln!(
        "{}: theta low {:.4} high {:.4} max {:.4}",
        ctx.label, ctx.theta[0], ctx.theta[1], ctx.theta[2]
    );
    let (path, format) = destination(cli, cfg.as_ref(), Format::Doc)?;
    let w = output::open(path.as_deref())?;
    match format {
        Format::Csv => output::write_records(
            w,
            &[
                "label",
                "theta_low",
                "theta_high",
                "theta_max",
                "max_state_rate_factor",
            ],
            &[vec![
                ctx.label.clone(),
                ctx.theta[0].to_string(),
                ctx.theta[1].to_string(),
                ctx.theta[2].to_string(),
                ctx.max_state_rate_factor.to_string(),
            ]],
        ),
        Format::Doc => output::write_doc(w, &json!({ "context": ctx })),
    }
}

fn cmd_simulate(cli: &Cli) -> CliResult<()> {
    let (cfg, run) = load_run(cli)?;
    let report = total_power(&run.device, &run.context, &run.scenario)?;
    eprintln!(
        "total {:.3} mW, baseline {:.3} mW, savings {:.2} % (context {}, a_ca {}, CA {})",
        report.total_power_mw,
        report.baseline_total_power_mw,
        100.0 * report.savings_fraction,
        run.context.label,
        run.scenario.a_ca,
        if run.scenario.ca_enabled { "on" } else { "off" }
    );
    let (path, format) = destination(cli, Some(&cfg), Format::Doc)?;
    let w = output::open(path.as_deref())?;
    match format {
        Format::Csv => {
            write_provenance(path.as_deref(), &run)?;
            output::write_report_csv(w, run.scenario.a_ca, &run.context.label, &report)
        }
        Format::Doc => output::write_doc(w, &json!({ "report": report, "config": run })),
    }
}

fn cmd_sweep(cli: &Cli) -> CliResult<()> {
    let (cfg, run) = load_run(cli)?;
    let spec = run
        .sweep_spec()
        .ok_or_else(|| CliError::Config("config has no 'sweep' section".into()))?;
    let result = run_sweep(&spec)?;
    let failed = result.rows.iter().filter(|r| r.outcome.is_err()).count();
    eprintln!(
        "{} rows over {} context(s), {failed} outside the downlink regime",
        result.rows.len(),
        spec.contexts().len()
    );
    let (path, format) = destination(cli, Some(&cfg), Format::Csv)?;
    let w = output::open(path.as_deref())?;
    match format {
        Format::Csv => {
            write_provenance(path.as_deref(), &run)?;
            output::write_sweep_csv(w, &result.rows)
        }
        Format::Doc => {
            let rows: Vec<serde_json::Value> = result
                .rows
                .iter()
                .map(|r| match &r.outcome {
                    Ok(rep) => json!({
                        "axis": r.axis, "axis_value": r.axis_value,
                        "context_label": r.context_label, "report": rep,
                    }),
                    Err(e) => json!({
                        "axis": r.axis, "axis_value": r.axis_value,
                        "context_label": r.context_label, "error": e.to_string(),
                    }),
                })
                .collect();
            output::write_doc(w, &json!({ "rows": rows, "config": run }))
        }
    }
}

fn cmd_breakeven(cli: &Cli) -> CliResult<()> {
    let (cfg, run) = load_run(cli)?;
    let b = breakeven_boost(&run.device, &run.context, &run.scenario)?;
    eprintln!(
        "breakeven a* = {:.6} (closed form {:.6}, difference {:.3e}){}",
        b.boost,
        b.closed_form,
        b.difference,
        if b.above_practical_range {
            "; warning: above practical CA gains"
        } else {
            ""
        }
    );
    let (path, format) = destination(cli, Some(&cfg), Format::Doc)?;
    let w = output::open(path.as_deref())?;
    match format {
        Format::Csv => {
            write_provenance(path.as_deref(), &run)?;
            output::write_records(
                w,
                &[
                    "boost",
                    "closed_form",
                    "difference",
                    "above_practical_range",
                ],
                &[vec![
                    b.boost.to_string(),
                    b.closed_form.to_string(),
                    b.difference.to_string(),
                    b.above_practical_range.to_string(),
                ]],
            )
        }
        Format::Doc => output::write_doc(w, &json!({ "breakeven": b, "config": run })),
    }
}

fn cmd_list_bundled(cli: &Cli) -> CliResult<()> {
    let (path, format) = destination(cli, None, Format::Doc)?;
    let mut w = output::open(path.as_deref())?;
    match format {
        Format::Csv => {
            let mut rows: Vec<Vec<String>> = bundled_devices()
                .iter()
                .map(|d| vec!["device".into(), d.name.into()])
                .collect();
            rows.extend(
                bundled_contexts()
                    .iter()
                    .map(|c| vec!["context".into(), c.label.clone()]),
            );
            output::write_records(w, &["kind", "name"], &rows)
        }
        Format::Doc => {
            let doc = json!({
                "devices": bundled_devices(),
                "contexts": bundled_contexts(),
            });
            output::write_doc(&mut w, &doc)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn write_provenance(csv_path: Option<&Path>, run: &ResolvedRun) -> CliResult<()> {
    let Some(p) = csv_path else {
        return Ok(());
    };
    let side = output::provenance_path(p);
    let file = File::create(&side).map_err(|e| CliError::Io(format!("{}: {e}", side.display())))?;
    output::write_doc(file, &json!({ "config": run }))
}
