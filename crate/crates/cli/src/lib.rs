//! The `qmsp` command line: subcommand definitions and their drivers.

pub mod angles;
pub mod sweep;
pub mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qmsp_core::{
    block_entropy_estimate, dimension_report, enumerate_msp, fixtures, iterate_trajectory,
    lce_spectrum, load_machine, machine_to_json, merge_tolerance_sweep, sample_sequence,
    DimensionConfig, LabeledHmm, LceConfig, LoadedMachine, MspConfig, MspOutcome, OrbitConfig,
    ProjectiveMeasurement, QubitHmm, TrajectoryConfig,
};

use crate::sweep::{cloud_csv, run_sweep, sweep_csv, SweepConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qmsp", version, about = "Mixed-state analysis of measured qubit processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct MachineArgs {
    /// Machine file, or a built-in fixture name (fig2a, fig2b, fig2c, golden_mean, fair_coin).
    #[arg(long)]
    pub machine: String,
    /// Measurement polar angle in radians (`pi/4` style accepted); required to measure a qubit source.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Measurement azimuthal angle in radians.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub phi: String,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Iterates after burn-in.
    #[arg(long, default_value_t = 1_000_000)]
    pub length: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    #[arg(long, env = "QMSP_SEED", default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a machine; print its stationary distribution and unifilarity.
    Validate {
        #[arg(long)]
        machine: String,
    },
    /// Measure a qubit source and emit the classical machine.
    Measure {
        #[command(flatten)]
        machine: MachineArgs,
        /// Output directory for `measured.json`; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact entropy rate and statistical complexity of a unifilar machine.
    Exact {
        #[command(flatten)]
        machine: MachineArgs,
    },
    /// Entropy rate from the mixed-state orbit.
    Entropy {
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Also report the block-entropy increment at this block length.
        #[arg(long)]
        block: Option<usize>,
    },
    /// Lyapunov spectrum of the mixed-state maps.
    Lce {
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        reorth_every: usize,
    },
    /// Entropy rate, spectrum, d_lce and optionally the box-counting dimension.
    Dimension {
        #[command(flatten)]
        machine: MachineArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        bc: bool,
        /// Write the point cloud as CSV (requires --out).
        #[arg(long)]
        clouds: bool,
        /// Write a scatter plot of the cloud (requires --out).
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value_t = 1)]
        decimate: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the mixed-state presentation; exit code 3 when the budget runs out.
    Msp {
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long, default_value_t = 1e-9)]
        merge_tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_states: usize,
        /// Comma-separated merge tolerances to compare.
        #[arg(long)]
        tolerances: Option<String>,
    },
    /// Sweep measurement angles over a qubit source.
    Sweep {
        #[arg(long)]
        machine: String,
        /// `start:stop:count`, inclusive.
        #[arg(long, default_value = "0:pi:500", conflicts_with = "thetas")]
        grid: String,
        /// Explicit comma-separated angles.
        #[arg(long)]
        thetas: Option<String>,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        phi: String,
        #[command(flatten)]
        run: RunArgs,
        /// Cloud decimation; defaults to 1 for box counting and to
        /// length / 10^4 for saved clouds.
        #[arg(long)]
        decimate: Option<usize>,
        #[arg(long)]
        bc: bool,
        #[arg(long)]
        clouds: bool,
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Skip the mixed-state presentation enumeration.
        #[arg(long)]
        no_msp: bool,
        #[arg(long, default_value_t = 1e-9)]
        merge_tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_states: usize,
    },
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|c| c.is::<std::io::Error>()) {
        EXIT_FAILURE
    } else {
        EXIT_INVALID
    }
}

pub fn resolve_machine(spec: &str) -> Result<LoadedMachine> {
    let path = Path::new(spec);
    if path.exists() {
        return load_machine(path).with_context(|| format!("loading {spec}"));
    }
    fixtures::by_name(spec).ok_or_else(|| {
        anyhow!(
            "no machine file {spec:?} and no built-in named that (built-ins: {})",
            fixtures::NAMES.join(", ")
        )
    })
}

fn require_qubit(loaded: &LoadedMachine, spec: &str) -> Result<QubitHmm> {
    loaded
        .as_qubit()
        .cloned()
        .ok_or_else(|| anyhow!("{spec} is not a qubit source; measuring needs qubit labels"))
}

/// The classical machine to analyze: measured when `--theta` is given.
fn target_machine(args: &MachineArgs) -> Result<LabeledHmm> {
    let loaded = resolve_machine(&args.machine)?;
    match &args.theta {
        Some(theta) => {
            let src = require_qubit(&loaded, &args.machine)?;
            let meas = ProjectiveMeasurement::new(angles::parse_angle(theta)?, angles::parse_angle(&args.phi)?)?;
            Ok(src.measure(&meas)?)
        }
        None => Ok(loaded.machine().clone()),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn write_manifest(dir: &Path, command: &str, seed: Option<u64>, config: serde_json::Value, files: &[String]) -> Result<()> {
    let manifest = json!({
        "tool": "qmsp",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": config,
        "files": files,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Validate { machine } => cmd_validate(&machine, out),
        Command::Measure { machine, out: dir } => cmd_measure(&machine, dir.as_deref(), out),
        Command::Exact { machine } => cmd_exact(&machine, out),
        Command::Entropy { machine, run, block } => cmd_entropy(&machine, &run, block, out),
        Command::Lce { machine, run, reorth_every } => cmd_lce(&machine, &run, reorth_every, out),
        Command::Dimension {
            machine,
            run,
            bc,
            clouds,
            svg,
            decimate,
            out: dir,
        } => cmd_dimension(&machine, &run, bc, clouds, svg, decimate, dir.as_deref(), out),
        Command::Msp {
            machine,
            merge_tol,
            max_states,
            tolerances,
        } => cmd_msp(&machine, merge_tol, max_states, tolerances.as_deref(), out),
        Command::Sweep {
            machine,
            grid,
            thetas,
            phi,
            run,
            decimate,
            bc,
            clouds,
            svg,
            out: dir,
            workers,
            no_msp,
            merge_tol,
            max_states,
        } => {
            let thetas = match thetas {
                Some(list) => angles::parse_list(&list)?,
                None => angles::parse_grid(&grid)?,
            };
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let decimation = decimate.unwrap_or(if bc { 1 } else { (run.length / 10_000).max(1) });
            let config = SweepConfig {
                thetas,
                phi: angles::parse_angle(&phi)?,
                length: run.length,
                burn_in: run.burn_in,
                seed: run.seed,
                decimation,
                box_counting: bc,
                keep_clouds: clouds,
                msp: !no_msp,
                merge_tol,
                max_states,
                workers,
            };
            cmd_sweep(&machine, &config, svg, &dir, out)
        }
    }
}

fn cmd_validate(spec: &str, out: &mut dyn Write) -> Result<u8> {
    let loaded = resolve_machine(spec)?;
    let m = loaded.machine();
    writeln!(out, "states: {} ({})", m.num_states(), m.state_ids().join(" "))?;
    writeln!(out, "alphabet: {} ({})", m.alphabet_size(), m.alphabet().join(" "))?;
    if let Some(q) = loaded.as_qubit() {
        for (label, qb) in m.alphabet().iter().zip(q.qubits()) {
            writeln!(out, "  {label}: bloch ({}, {})", qb.alpha, qb.beta)?;
        }
    }
    let pi = m.stationary().as_slice();
    let check = m.is_unifilar();
    if check.unifilar {
        writeln!(out, "unifilar, π={}", fmt_vec(pi))?;
    } else {
        writeln!(out, "nonunifilar, π={}", fmt_vec(pi))?;
        if let Some(w) = check.witness {
            let succ: Vec<&str> = w.successors.iter().map(|&s| m.state_ids()[s].as_str()).collect();
            writeln!(
                out,
                "  witness: state {} on symbol {} -> {}",
                m.state_ids()[w.state],
                m.alphabet()[w.symbol],
                succ.join(", ")
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_measure(args: &MachineArgs, dir: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    if args.theta.is_none() {
        bail!("measure needs --theta");
    }
    let measured = target_machine(args)?;
    let text = machine_to_json(&measured);
    match dir {
        None => write!(out, "{text}")?,
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("measured.json"), &text)?;
            write_manifest(
                dir,
                "measure",
                None,
                json!({"machine": args.machine, "theta": args.theta, "phi": args.phi}),
                &["measured.json".into()],
            )?;
            writeln!(out, "wrote {}", dir.join("measured.json").display())?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_exact(args: &MachineArgs, out: &mut dyn Write) -> Result<u8> {
    let m = target_machine(args)?;
    let hmu = m.hmu_exact_unifilar()?;
    let cmu = m.cmu_exact()?;
    writeln!(out, "hmu = {hmu:.12} bits/symbol")?;
    writeln!(out, "Cmu = {cmu:.12} bits")?;
    Ok(EXIT_OK)
}

fn cmd_entropy(args: &MachineArgs, run: &RunArgs, block: Option<usize>, out: &mut dyn Write) -> Result<u8> {
    let m = target_machine(args)?;
    let est = iterate_trajectory(
        &m,
        &TrajectoryConfig::new(run.length, run.seed).with_burn_in(run.burn_in),
    )?;
    writeln!(out, "hmu_B = {:.6} ± {:.6} bits/symbol (length {}, seed {})", est.hmu_b, est.stderr, run.length, run.seed)?;
    if m.is_unifilar().unifilar {
        writeln!(out, "exact = {:.6}", m.hmu_exact_unifilar()?)?;
    }
    if let Some(l) = block {
        let seq = sample_sequence(&m, run.length, run.seed, false)?;
        let b = block_entropy_estimate(&seq.symbols, m.alphabet_size(), l)?;
        writeln!(
            out,
            "block H({l}) - H({}) = {:.6}{}",
            l - 1,
            b.last_increment(),
            if b.undersampled { " (undersampled)" } else { "" }
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_lce(args: &MachineArgs, run: &RunArgs, reorth_every: usize, out: &mut dyn Write) -> Result<u8> {
    let m = target_machine(args)?;
    let est = lce_spectrum(
        &m,
        &LceConfig {
            length: run.length,
            burn_in: run.burn_in,
            seed: run.seed,
            reorth_every,
        },
    )?;
    for (i, ((l, s), f)) in est.exponents.iter().zip(&est.stderr).zip(&est.floored).enumerate() {
        writeln!(out, "lambda_{} = {l:.6} ± {s:.6}{}", i + 1, if *f { " (floor)" } else { "" })?;
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_dimension(
    args: &MachineArgs,
    run: &RunArgs,
    bc: bool,
    clouds: bool,
    svg: bool,
    decimate: usize,
    dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8> {
    if (clouds || svg) && dir.is_none() {
        bail!("--clouds and --svg need --out");
    }
    let m = target_machine(args)?;
    let mut config = DimensionConfig {
        orbit: OrbitConfig {
            burn_in: run.burn_in,
            decimation: Some(decimate.max(1)),
            ..OrbitConfig::new(run.length, run.seed)
        },
        eps_grid: None,
    };
    if bc {
        config = config.with_box_counting();
    }
    let r = dimension_report(&m, &config)?;
    writeln!(out, "hmu_B     {:.6} ± {:.6}", r.hmu_b, r.hmu_stderr)?;
    writeln!(out, "lambda    {}", fmt_vec(&r.exponents.exponents))?;
    writeln!(out, "k         {}", r.k)?;
    writeln!(out, "d_lce     {:.6}", r.d_lce)?;
    if let Some(fit) = &r.bc_fit {
        writeln!(
            out,
            "d_bc      {:.6} (r^2 {:.4}; support count slope {:.6})",
            fit.d_bc, fit.r_squared, fit.d_capacity
        )?;
        for s in &fit.scales {
            writeln!(out, "  eps {:<12} boxes {:<8} H_eps {:.4}", s.eps, s.boxes, s.entropy)?;
        }
    }
    writeln!(
        out,
        "open set  {} (image overlap {:.3})",
        if r.open_set_flag { "likely violated" } else { "no overlap detected" },
        r.image_overlap
    )?;
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        if clouds {
            fs::write(dir.join("cloud_0.csv"), cloud_csv(&r.point_cloud))?;
            files.push("cloud_0.csv".to_string());
        }
        if svg {
            let title = format!("θ = {}", args.theta.as_deref().unwrap_or("-"));
            fs::write(dir.join("cloud_0.svg"), svg::cloud_scatter(&r.point_cloud, &title))?;
            files.push("cloud_0.svg".to_string());
        }
        write_manifest(
            dir,
            "dimension",
            Some(run.seed),
            json!({
                "machine": args.machine, "theta": args.theta, "phi": args.phi,
                "length": run.length, "burn_in": run.burn_in, "decimate": decimate, "bc": bc,
            }),
            &files,
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_msp(args: &MachineArgs, merge_tol: f64, max_states: usize, tolerances: Option<&str>, out: &mut dyn Write) -> Result<u8> {
    let m = target_machine(args)?;
    if let Some(list) = tolerances {
        let tols: Vec<f64> = list
            .split(',')
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad tolerance {t:?}")))
            .collect::<Result<_>>()?;
        for (tol, outcome) in merge_tolerance_sweep(&m, &tols, max_states)? {
            match outcome {
                MspOutcome::Closed(p) => writeln!(out, "tol {tol:e}: {} states, Cmu {:.6}", p.num_states(), p.cmu)?,
                MspOutcome::BudgetExceeded { states, .. } => writeln!(out, "tol {tol:e}: over budget at {states} states")?,
            }
        }
    }
    match enumerate_msp(&m, &MspConfig { merge_tol, max_states })? {
        MspOutcome::Closed(p) => {
            writeln!(out, "states    {} ({} recurrent)", p.num_states(), p.num_recurrent())?;
            writeln!(out, "hmu       {:.10} bits/symbol", p.hmu)?;
            writeln!(out, "Cmu       {:.10} bits", p.cmu)?;
            Ok(EXIT_OK)
        }
        MspOutcome::BudgetExceeded { states, frontier } => {
            writeln!(
                out,
                "budget exceeded: {states} mixed states found, {frontier} still unexpanded (merge tolerance {merge_tol:e})"
            )?;
            Ok(EXIT_BUDGET)
        }
    }
}

fn cmd_sweep(spec: &str, config: &SweepConfig, svg: bool, dir: &Path, out: &mut dyn Write) -> Result<u8> {
    let loaded = resolve_machine(spec)?;
    let src = require_qubit(&loaded, spec)?;
    let results = run_sweep(&src, config)?;
    fs::create_dir_all(dir)?;
    let exponents = src.machine().num_states().saturating_sub(1);
    let rows: Vec<_> = results.iter().map(|r| r.row.clone()).collect();
    fs::write(dir.join("sweep.csv"), sweep_csv(&rows, exponents))?;
    let mut files = vec!["sweep.csv".to_string()];
    for r in &results {
        if let Some(c) = &r.cloud {
            let name = format!("cloud_{}.csv", r.row.index);
            fs::write(dir.join(&name), cloud_csv(c))?;
            files.push(name);
            if svg {
                let name = format!("cloud_{}.svg", r.row.index);
                let title = format!("θ = {:.4}", r.row.theta);
                fs::write(dir.join(&name), svg::cloud_scatter(c, &title))?;
                files.push(name);
            }
        }
    }
    if svg {
        let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.hmu_b.map(|h| (r.theta, h))).collect();
        fs::write(dir.join("hmu_vs_theta.svg"), svg::hmu_curve(&pts))?;
        files.push("hmu_vs_theta.svg".into());
    }
    let mut recorded = serde_json::to_value(config)?;
    // worker count does not affect results; keep the manifest rerun-stable
    if let Some(obj) = recorded.as_object_mut() {
        obj.remove("workers");
        obj.insert("machine".into(), json!(spec));
    }
    write_manifest(dir, "sweep", Some(config.seed), recorded, &files)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    writeln!(
        out,
        "{} angles, {} failed; wrote {}",
        rows.len(),
        failed,
        dir.join("sweep.csv").display()
    )?;
    Ok(EXIT_OK)
}
