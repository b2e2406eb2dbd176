//! Command line front end: file-based workflows over the library, with
//! JSON results and CSV sweeps meant for further scripting.

mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use classim::analytic::{
    bases_model_bound, harmonic_bound, harmonic_subspace_bound, AnalyticBound, BoundKind,
};
use classim::jsonio;
use classim::simulation::{
    devices_from_bases, random_device_family, refine_devices, simulate, RefineMode,
    SimulationResult,
};
use classim::states::{
    gen_bb84, gen_mub_bases, gen_mub_states, gen_pair_maxcoherent, gen_sic, StateSet,
};
use classim::steering::{jm_binarized_feasible, jm_threshold, steering_to_witness};
use classim::witness::{
    classical_bound_with, critical_visibility, evaluate, mub_witness, BoundConfig, BoundMethod,
    Witness, WitnessBound,
};
use classim::{Error, Result};

#[derive(Parser)]
#[command(name = "classim", version, about = "Classical simulability of quantum state sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in state set to a JSON file.
    Gen(GenArgs),
    /// Print closed-form visibility bounds for the given parameters.
    Analytic(AnalyticArgs),
    /// Find the best classically reachable visibility over a device family.
    Simulate(SimulateArgs),
    /// Classical bounds and evaluations for witnesses.
    Witness(WitnessArgs),
    /// Convert a steering inequality into a witness with its exact bound.
    Steer(SteerArgs),
    /// Joint-measurability checks for the binarized state measurements.
    Jm(JmArgs),
    /// Run a self-check suite and report a CSV of results.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// One of: bb84, mub, sic, pair.
    kind: String,
    /// Hilbert space dimension, where the kind needs one.
    #[arg(long)]
    d: Option<usize>,
    /// Number of bases (mub only).
    #[arg(long)]
    n: Option<usize>,
    /// Output file; defaults to a name derived from the parameters.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long)]
    d: usize,
    /// Emittable subset size; defaults to d.
    #[arg(long)]
    r: Option<usize>,
    /// Subspace dimension for the subspace-restricted bound.
    #[arg(long)]
    s: Option<usize>,
    /// Number of bases for the explicit-model bound.
    #[arg(long = "M")]
    n_bases: Option<usize>,
    /// Also write the bounds as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// State set JSON file.
    set: PathBuf,
    /// Device family: random:N, bases-model:M:r, mub-devices, or file:PATH.
    #[arg(long)]
    devices: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subset size for random families; defaults to d.
    #[arg(long)]
    r: Option<usize>,
    /// Hill-climbing iterations over the device bases after the first solve.
    #[arg(long, default_value_t = 0)]
    refine: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Refinement mode: independent or global.
    #[arg(long, default_value = "independent")]
    mode: String,
    /// Comma-separated unitary counts; runs random:N for each and writes CSV.
    #[arg(long)]
    sweep: Option<String>,
    /// Result file (JSON, or CSV under --sweep).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    /// Witness source: mub (with --n) or file:PATH.
    spec: String,
    /// Number of bases for the mub witness.
    #[arg(long)]
    n: Option<usize>,
    /// Compute the classical bound.
    #[arg(long)]
    bound: bool,
    /// Also report the critical visibility against the target set.
    #[arg(long)]
    critical: bool,
    /// Evaluate the witness on a state set file.
    #[arg(long)]
    eval: Option<PathBuf>,
    /// Enumerate one strategy per output-relabeling class.
    #[arg(long)]
    symmetry: bool,
    /// Strategy count refused above this cap.
    #[arg(long)]
    cap: Option<usize>,
    /// Progress file for long enumerations; an existing file resumes.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Keep an existing checkpoint instead of starting fresh.
    #[arg(long)]
    resume: bool,
    /// Write the bound as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SteerArgs {
    /// Steering inequality JSON file.
    ineq: PathBuf,
    /// Output file for the converted witness.
    #[arg(long, default_value = "witness.json")]
    out: PathBuf,
}

#[derive(Args)]
struct JmArgs {
    /// State set JSON file.
    set: PathBuf,
    /// Test feasibility at this visibility.
    #[arg(long, conflicts_with = "threshold")]
    v: Option<f64>,
    /// Bisect for the largest feasible visibility.
    #[arg(long)]
    threshold: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: analytic, haar, witness, jm, all.
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Analytic(args) => cmd_analytic(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Steer(args) => cmd_steer(args),
        Command::Jm(args) => cmd_jm(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::from)
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::from)
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let (set, default_name) = match args.kind.as_str() {
        "bb84" => (gen_bb84(), "bb84.json".to_string()),
        "mub" => {
            let d = args.d.unwrap_or(3);
            let n = args.n.unwrap_or(2);
            (gen_mub_states(d, n)?, format!("mub_d{d}_n{n}.json"))
        }
        "sic" => {
            let d = args.d.unwrap_or(2);
            (gen_sic(d)?, format!("sic_d{d}.json"))
        }
        "pair" => (gen_pair_maxcoherent(), "pair.json".to_string()),
        other => {
            return Err(Error::Unsupported(format!(
                "state set kind {other:?}; choose bb84, mub, sic, or pair"
            )))
        }
    };
    let out = args.out.unwrap_or_else(|| PathBuf::from(default_name));
    write(&out, &jsonio::state_set_to_json(&set))?;
    println!(
        "d = {}  m = {}  labels: {}",
        set.dim(),
        set.len(),
        set.labels().join(", ")
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn bound_row(b: &AnalyticBound) -> String {
    match b.kind {
        BoundKind::Harmonic => {
            format!("harmonic            d={} r={}        v <= {:.6}", b.dim, b.r, b.visibility)
        }
        BoundKind::HarmonicSubspace => format!(
            "harmonic-subspace   d={} r={} s={}    v <= {:.6}",
            b.dim,
            b.r,
            b.subspace.unwrap_or(0),
            b.visibility
        ),
        BoundKind::BasesModel => format!(
            "bases-model         d={} r={} M={}    v <= {:.6}",
            b.dim,
            b.r,
            b.n_bases.unwrap_or(0),
            b.visibility
        ),
    }
}

fn bound_json(b: &AnalyticBound) -> serde_json::Value {
    let kind = match b.kind {
        BoundKind::Harmonic => "harmonic",
        BoundKind::HarmonicSubspace => "harmonic-subspace",
        BoundKind::BasesModel => "bases-model",
    };
    serde_json::json!({
        "kind": kind,
        "dim": b.dim,
        "r": b.r,
        "subspace": b.subspace,
        "n_bases": b.n_bases,
        "visibility": b.visibility,
    })
}

fn cmd_analytic(args: AnalyticArgs) -> Result<()> {
    let r = args.r.unwrap_or(args.d);
    let mut bounds = vec![harmonic_bound(args.d, r)?];
    if let Some(s) = args.s {
        bounds.push(harmonic_subspace_bound(args.d, s, r)?);
    }
    if let Some(m) = args.n_bases {
        bounds.push(bases_model_bound(args.d, m, r)?);
    }
    for b in &bounds {
        println!("{}", bound_row(b));
    }
    if let Some(out) = args.out {
        let doc: Vec<_> = bounds.iter().map(bound_json).collect();
        write(&out, &serde_json::to_string_pretty(&doc).expect("bounds are plain data"))?;
    }
    Ok(())
}

fn parse_device_spec(
    spec: &str,
    set: &StateSet,
    r_flag: Option<usize>,
    seed: u64,
) -> Result<Vec<classim::model::Device>> {
    let d = set.dim();
    if let Some(n) = spec.strip_prefix("random:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::Validation(format!("bad unitary count in {spec:?}")))?;
        return random_device_family(d, r_flag.unwrap_or(d), n, seed);
    }
    if let Some(rest) = spec.strip_prefix("bases-model:") {
        let (m, r) = rest
            .split_once(':')
            .ok_or_else(|| Error::Validation(format!("expected bases-model:M:r, got {spec:?}")))?;
        let m: usize = m
            .parse()
            .map_err(|_| Error::Validation(format!("bad basis count in {spec:?}")))?;
        let r: usize = r
            .parse()
            .map_err(|_| Error::Validation(format!("bad subset size in {spec:?}")))?;
        let bases = gen_mub_bases(d)?;
        if m > bases.len() {
            return Err(Error::Validation(format!(
                "{m} bases requested, dimension {d} provides {}",
                bases.len()
            )));
        }
        return devices_from_bases(&bases[..m], r);
    }
    if spec == "mub-devices" {
        let bases = gen_mub_bases(d)?;
        return devices_from_bases(&bases, r_flag.unwrap_or(d));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let devices = jsonio::devices_from_json(&read(&PathBuf::from(path))?)?;
        if let Some(dev) = devices.first() {
            if dev.dim() != d {
                return Err(Error::Dimension(format!(
                    "device file is dimension {}, set is {d}",
                    dev.dim()
                )));
            }
        }
        return Ok(devices);
    }
    Err(Error::Validation(format!(
        "device spec {spec:?}; choose random:N, bases-model:M:r, mub-devices, or file:PATH"
    )))
}

fn result_document(res: &SimulationResult, args: &SimulateArgs) -> String {
    let mut doc: serde_json::Value =
        serde_json::from_str(&jsonio::simulation_result_to_json(res)).expect("own output");
    let map = doc.as_object_mut().expect("result is an object");
    map.insert("seed".into(), args.seed.into());
    map.insert("device_spec".into(), args.devices.clone().into());
    if args.refine > 0 {
        map.insert(
            "refine".into(),
            serde_json::json!({ "iterations": args.refine, "step": args.step, "mode": args.mode }),
        );
    }
    serde_json::to_string_pretty(&doc).expect("result document")
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let set = jsonio::state_set_from_json(&read(&args.set)?)?;

    if let Some(sweep) = &args.sweep {
        if !args.devices.starts_with("random:") {
            return Err(Error::Validation(
                "--sweep varies the unitary count, so it needs --devices random:N".into(),
            ));
        }
        let mut csv = String::from("param,v_star,residual,gap,seed\n");
        for token in sweep.split(',') {
            let n: usize = token
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("bad sweep entry {token:?}")))?;
            let devices =
                random_device_family(set.dim(), args.r.unwrap_or(set.dim()), n, args.seed)?;
            let res = simulate(&set, &devices)?;
            println!("N = {n}: v* = {:.6}", res.visibility);
            csv.push_str(&format!(
                "{n},{:.9},{:.3e},{:.3e},{}\n",
                res.visibility, res.residual, res.gap, args.seed
            ));
        }
        match &args.out {
            Some(path) => write(path, &csv)?,
            None => print!("{csv}"),
        }
        return Ok(());
    }

    let devices = parse_device_spec(&args.devices, &set, args.r, args.seed)?;
    let res = if args.refine > 0 {
        let mode = match args.mode.as_str() {
            "independent" => RefineMode::Independent,
            "global" => RefineMode::GlobalRotation,
            other => {
                return Err(Error::Validation(format!(
                    "refine mode {other:?}; choose independent or global"
                )))
            }
        };
        refine_devices(&set, &devices, args.refine, args.step, args.seed, mode)?
    } else {
        simulate(&set, &devices)?
    };
    println!("v* = {:.6}  (residual {:.2e}, gap {:.2e})", res.visibility, res.residual, res.gap);
    if let Some(out) = &args.out {
        write(out, &result_document(&res, &args))?;
    }
    Ok(())
}

fn checkpoint_path(flag: Option<PathBuf>) -> Option<PathBuf> {
    let path = flag?;
    match std::env::var_os("CLASSIM_CHECKPOINT_DIR") {
        Some(dir) if path.is_relative() => Some(PathBuf::from(dir).join(path)),
        _ => Some(path),
    }
}

fn cmd_witness(args: WitnessArgs) -> Result<()> {
    let (w, target): (Witness, Option<StateSet>) = if args.spec == "mub" {
        let n = args
            .n
            .ok_or_else(|| Error::Validation("witness mub needs --n".into()))?;
        (mub_witness(n)?, Some(gen_mub_states(3, n)?))
    } else if let Some(path) = args.spec.strip_prefix("file:") {
        (jsonio::witness_from_json(&read(&PathBuf::from(path))?)?, None)
    } else {
        return Err(Error::Validation(format!(
            "witness spec {:?}; choose mub or file:PATH",
            args.spec
        )));
    };

    let eval_set = match &args.eval {
        Some(path) => Some(jsonio::state_set_from_json(&read(path)?)?),
        None => None,
    };
    if let (Some(set), false) = (&eval_set, args.bound || args.critical) {
        println!("value = {:.6}", evaluate(&w, set)?);
        return Ok(());
    }

    let mut cfg = BoundConfig {
        symmetry_reduce: args.symmetry,
        checkpoint: checkpoint_path(args.checkpoint.clone()),
        ..BoundConfig::default()
    };
    if let Some(cap) = args.cap {
        cfg.strategy_cap = cap;
    }
    if let (Some(path), false) = (&cfg.checkpoint, args.resume) {
        if path.exists() {
            std::fs::remove_file(path)?;
        }
    }
    let bound = classical_bound_with(&w, &cfg)?;
    let method = match bound.method {
        BoundMethod::SdpRelaxation => "sdp-relaxation",
        BoundMethod::QubitExact => "qubit-exact",
    };
    println!(
        "beta = {:.6} +- {:.1e}  ({method}, {} strategies)",
        bound.beta, bound.uncertainty, bound.strategies_evaluated
    );

    if args.critical {
        let set = eval_set
            .as_ref()
            .or(target.as_ref())
            .ok_or_else(|| Error::Validation("--critical needs a target set (--eval)".into()))?;
        let v = critical_visibility(&w, set, bound.beta)?;
        println!("v_crit = {:.6}", v);
    } else if let Some(set) = &eval_set {
        println!("value = {:.6}", evaluate(&w, set)?);
    }

    if let Some(out) = &args.out {
        write(out, &jsonio::witness_bound_to_json(&bound))?;
    }
    Ok(())
}

fn cmd_steer(args: SteerArgs) -> Result<()> {
    let ineq = jsonio::steering_from_json(&read(&args.ineq)?)?;
    let (w, bound): (Witness, WitnessBound) = steering_to_witness(&ineq)?;
    println!(
        "zeta = {:.6} +- {:.1e}  ({} sign patterns)",
        bound.beta, bound.uncertainty, bound.strategies_evaluated
    );
    write(&args.out, &jsonio::witness_to_json(&w))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_jm(args: JmArgs) -> Result<()> {
    let set = jsonio::state_set_from_json(&read(&args.set)?)?;
    if args.threshold {
        let t = jm_threshold(&set)?;
        println!("threshold = {t:.4}");
        return Ok(());
    }
    let v = args
        .v
        .ok_or_else(|| Error::Validation("jm needs --v or --threshold".into()))?;
    if jm_binarized_feasible(&set, v)? {
        println!("feasible at v = {v}");
    } else {
        println!("infeasible at v = {v}");
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let rows = match args.suite.as_str() {
        "haar" => verify::haar_suite(args.seed)?,
        "analytic" => verify::analytic_suite()?,
        "witness" => verify::witness_suite()?,
        "jm" => verify::jm_suite()?,
        "all" => {
            let mut rows = verify::analytic_suite()?;
            rows.extend(verify::haar_suite(args.seed)?);
            rows.extend(verify::witness_suite()?);
            rows.extend(verify::jm_suite()?);
            rows
        }
        other => {
            return Err(Error::Unsupported(format!(
                "suite {other:?}; choose analytic, haar, witness, jm, or all"
            )))
        }
    };
    let mut csv = String::from("check,expected,got,tolerance,pass\n");
    let mut failures = 0usize;
    for row in &rows {
        if !row.pass {
            failures += 1;
        }
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.1e},{}\n",
            row.name, row.expected, row.got, row.tolerance, row.pass
        ));
    }
    match &args.out {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    println!("{} checks, {failures} failed (seed {})", rows.len(), args.seed);
    if failures > 0 {
        return Err(Error::Validation(format!("{failures} of {} checks failed", rows.len())));
    }
    Ok(())
}
