//! `capsim` — command-line front end for the capsule locomotion toolkit.
//!
//! Four subcommands cover the workflow end to end:
//!
//! - `cam`: synthesize a cam profile, report its duty fractions, and write
//!   the lift table (CSV) plus an exact TOML descriptor;
//! - `simulate`: run the ideal or stick–slip capsule (or a single slider)
//!   and write thrust/contact traces with a scalar summary;
//! - `fit`: identify wall parameters from a measured single-slider force
//!   trace driven by a known cam, writing a TOML fit report;
//! - `sweep`: evaluate a duty-fraction design grid from a TOML spec into a
//!   deterministic CSV table.
//!
//! Explicit flags override `--config` file keys (TOML `key = value` under
//! `[cam]`, `[capsule]`, `[tissue]` and `[drive]` sections), which override
//! the built-in defaults (the reference 12-slider capsule against the
//! identified wall parameters). All randomness is seeded; reruns with the
//! same inputs write byte-identical outputs.
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O or parse error, 3
//! fit-convergence failure.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use capsim::cam::{CamProfile, DutyFractions};
use capsim::capsule::{superpose, CapsuleConfig, ContactModel};
use capsim::contact::{stick_slip_simulate, SmoothingSpec, TissueParams};
use capsim::identify::{identify, MeasuredTrace};
use capsim::io::{
    cam_from_toml, cam_to_toml, fit_report_to_toml, read_measured_csv, thrust_summary_json,
    write_contact_csv, write_measured_csv, write_profile_csv, write_sweep_csv, write_thrust_csv,
};
use capsim::reference;
use capsim::sweep::{run_sweep, SweepSpec};
use capsim::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Maps error classes onto the documented process exit codes.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::UnderResolved(_) | Error::ZeroMeanRipple(_) => 1,
        Error::Io(_) | Error::Parse(_) => 2,
        Error::Fit(_) => 3,
    }
}

#[derive(Parser)]
#[command(name = "capsim", version, about = "Capsule locomotion simulator and fitter")]
struct Cli {
    /// TOML config file; explicit flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a cam and write its lift table and descriptor.
    Cam(CamCmd),
    /// Simulate capsule thrust, or one slider's contact trace.
    Simulate(SimulateCmd),
    /// Identify wall parameters from a measured force trace.
    Fit(FitCmd),
    /// Run a design-space sweep from a TOML spec.
    Sweep(SweepCmd),
}

/// Cam selection: a TOML descriptor file, or inline synthesis parameters.
#[derive(Args, Clone)]
struct CamFlags {
    /// Cam descriptor TOML to load instead of synthesizing.
    #[arg(long, value_name = "FILE")]
    cam: Option<PathBuf>,
    /// Lobe (rise–fall cell) count per revolution.
    #[arg(long)]
    jumps: Option<u32>,
    /// Retract duty fraction.
    #[arg(long)]
    d_ret: Option<f64>,
    /// Advance duty fraction.
    #[arg(long)]
    d_adv: Option<f64>,
    /// Cam stroke (mm).
    #[arg(long)]
    stroke_mm: Option<f64>,
}

#[derive(Args, Clone)]
struct CapsuleFlags {
    /// Slider count.
    #[arg(long)]
    n_sliders: Option<u32>,
    /// Coulomb traction limit per slider μN (N).
    #[arg(long)]
    mu_n: Option<f64>,
    /// Constant per-slider mechanism loss (N).
    #[arg(long)]
    f_loss: Option<f64>,
    /// Reversal smoothing fraction λ of the cell width (ideal model).
    #[arg(long)]
    lambda: Option<f64>,
    /// Contact model.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
}

#[derive(Args, Clone)]
struct TissueFlags {
    /// Wall stiffness (N/m).
    #[arg(long)]
    k_tissue: Option<f64>,
    /// Wall damping (N·s/m).
    #[arg(long)]
    c_tissue: Option<f64>,
    /// Static friction limit (N).
    #[arg(long)]
    mu_s_n: Option<f64>,
    /// Kinetic friction limit (N).
    #[arg(long)]
    mu_k_n: Option<f64>,
    /// Retract-phase slip relaxation time (s).
    #[arg(long)]
    tau_ret: Option<f64>,
    /// Advance-phase slip relaxation time (s).
    #[arg(long)]
    tau_adv: Option<f64>,
}

#[derive(Args, Clone)]
struct DriveFlags {
    /// Shaft speed (rad/s).
    #[arg(long)]
    omega: Option<f64>,
    /// Time step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Number of simulated cam cycles.
    #[arg(long)]
    cycles: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModelArg {
    Ideal,
    Viscoelastic,
}

impl From<ModelArg> for ContactModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ideal => ContactModel::Ideal,
            ModelArg::Viscoelastic => ContactModel::Viscoelastic,
        }
    }
}

#[derive(Args)]
struct CamCmd {
    #[command(flatten)]
    cam: CamFlags,
    /// Lift-table sample count over one revolution.
    #[arg(long, default_value_t = 720)]
    samples: usize,
    /// Lift table output path.
    #[arg(long, default_value = "cam_profile.csv")]
    out_csv: PathBuf,
    /// Descriptor output path.
    #[arg(long, default_value = "cam_profile.toml")]
    out_toml: PathBuf,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    cam: CamFlags,
    #[command(flatten)]
    capsule: CapsuleFlags,
    #[command(flatten)]
    tissue: TissueFlags,
    #[command(flatten)]
    drive: DriveFlags,
    /// Emit one slider's stick–slip contact trace instead of capsule thrust.
    #[arg(long)]
    single_slider: bool,
    /// Gaussian noise σ (N) added to the measured-trace output.
    #[arg(long)]
    noise_sd: Option<f64>,
    /// RNG seed for noise injection.
    #[arg(long)]
    seed: Option<u64>,
    /// Trace output path (thrust CSV, or contact CSV with --single-slider).
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
    /// Also write the slider's wall force as a measured-trace CSV.
    #[arg(long, value_name = "FILE")]
    out_measured: Option<PathBuf>,
    /// Also write the scalar thrust summary as JSON.
    #[arg(long, value_name = "FILE")]
    out_summary: Option<PathBuf>,
}

#[derive(Args)]
struct FitCmd {
    /// Measured force trace CSV (`t_s,F_N` rows, `# key = value` headers).
    #[arg(long, value_name = "FILE")]
    measured: PathBuf,
    #[command(flatten)]
    cam: CamFlags,
    /// Shaft speed (rad/s); defaults to the trace's `omega_rad_s` metadata.
    #[arg(long)]
    omega: Option<f64>,
    /// Slider phase offset (rad).
    #[arg(long)]
    phase: Option<f64>,
    /// Fit report output path.
    #[arg(long, default_value = "fit_report.toml")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepCmd {
    /// Sweep spec TOML.
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,
    /// Worker thread count (0 = library default); output bytes are identical.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output CSV path.
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

/// Optional keys of the `--config` file, mirroring the flag groups.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    cam: CamSection,
    #[serde(default)]
    capsule: CapsuleSection,
    #[serde(default)]
    tissue: TissueSection,
    #[serde(default)]
    drive: DriveSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CamSection {
    jumps: Option<u32>,
    d_ret: Option<f64>,
    d_adv: Option<f64>,
    stroke_mm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapsuleSection {
    n_sliders: Option<u32>,
    mu_n: Option<f64>,
    f_loss: Option<f64>,
    lambda: Option<f64>,
    model: Option<ModelArg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TissueSection {
    k_tissue: Option<f64>,
    c_tissue: Option<f64>,
    mu_s_n: Option<f64>,
    mu_k_n: Option<f64>,
    tau_ret: Option<f64>,
    tau_adv: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveSection {
    omega: Option<f64>,
    dt: Option<f64>,
    cycles: Option<u32>,
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            toml::from_str(&text)
                .map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Cam(args) => cmd_cam(args, &cfg),
        Command::Simulate(args) => cmd_simulate(args, &cfg),
        Command::Fit(args) => cmd_fit(args, &cfg),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

/// Resolves the cam: descriptor file if given, otherwise synthesis from
/// flags, config keys, and the reference single-jump cam as fallback.
fn build_profile(flags: &CamFlags, cfg: &FileConfig) -> Result<CamProfile> {
    if let Some(path) = &flags.cam {
        let text = fs::read_to_string(path)?;
        return cam_from_toml(&text);
    }
    let jumps = flags.jumps.or(cfg.cam.jumps).unwrap_or(reference::JUMP_COUNT);
    let d_ret = flags
        .d_ret
        .or(cfg.cam.d_ret)
        .unwrap_or(reference::DUTY_SINGLE_JUMP.d_ret);
    let d_adv = flags
        .d_adv
        .or(cfg.cam.d_adv)
        .unwrap_or(reference::DUTY_SINGLE_JUMP.d_adv);
    let stroke = flags
        .stroke_mm
        .or(cfg.cam.stroke_mm)
        .unwrap_or(reference::STROKE_MM);
    let duty = DutyFractions::from_ret_adv(d_ret, d_adv)?;
    CamProfile::synthesize(jumps, duty, stroke)
}

/// Wall parameters from flags/config over the identified reference values.
fn build_tissue(flags: &TissueFlags, cfg: &FileConfig) -> TissueParams {
    let r = reference::TISSUE;
    let t = &cfg.tissue;
    TissueParams {
        k_tissue: flags.k_tissue.or(t.k_tissue).unwrap_or(r.k_tissue),
        c_tissue: flags.c_tissue.or(t.c_tissue).unwrap_or(r.c_tissue),
        mu_s_n: flags.mu_s_n.or(t.mu_s_n).unwrap_or(r.mu_s_n),
        mu_k_n: flags.mu_k_n.or(t.mu_k_n).unwrap_or(r.mu_k_n),
        tau_ret: flags.tau_ret.or(t.tau_ret).unwrap_or(r.tau_ret),
        tau_adv: flags.tau_adv.or(t.tau_adv).unwrap_or(r.tau_adv),
    }
}

fn build_capsule_config(
    capsule: &CapsuleFlags,
    tissue: &TissueFlags,
    cfg: &FileConfig,
) -> CapsuleConfig {
    let c = &cfg.capsule;
    let model: ContactModel = capsule
        .model
        .or(c.model)
        .map_or(ContactModel::Ideal, ContactModel::from);
    CapsuleConfig {
        n_sliders: capsule.n_sliders.or(c.n_sliders).unwrap_or(reference::N_SLIDERS),
        mu_n: capsule.mu_n.or(c.mu_n).unwrap_or(reference::MU_N_NEWTON),
        f_loss: capsule.f_loss.or(c.f_loss).unwrap_or(0.0),
        smoothing: SmoothingSpec { lambda: capsule.lambda.or(c.lambda).unwrap_or(0.0) },
        model,
        tissue: matches!(model, ContactModel::Viscoelastic)
            .then(|| build_tissue(tissue, cfg)),
    }
}

/// Effective (omega, dt, cycles) with defaults resolving the reference cam
/// family at 10 000 samples per cycle.
fn build_drive(flags: &DriveFlags, cfg: &FileConfig) -> Result<(f64, f64, u32)> {
    let d = &cfg.drive;
    let omega = flags.omega.or(d.omega).unwrap_or(TAU * 0.1);
    let dt = flags.dt.or(d.dt).unwrap_or(1e-3);
    let cycles = flags.cycles.or(d.cycles).unwrap_or(2);
    if cycles == 0 {
        return Err(Error::Validation("cycles must be at least 1".into()));
    }
    Ok((omega, dt, cycles))
}

fn create_writer(path: &PathBuf) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

fn cmd_cam(args: CamCmd, cfg: &FileConfig) -> Result<()> {
    let profile = build_profile(&args.cam, cfg)?;
    let duty = profile.duty_fractions();
    println!("jumps = {}", profile.jump_count());
    println!("stroke_mm = {:.6}", profile.stroke());
    println!("d_ret = {:.6}", duty.d_ret);
    println!("d_adv = {:.6}", duty.d_adv);
    println!("d_dwell = {:.6}", duty.d_dwell);
    println!("delta_d = {:.6}", duty.delta_d());
    let mut csv = create_writer(&args.out_csv)?;
    write_profile_csv(&mut csv, &profile, args.samples)?;
    csv.flush()?;
    fs::write(&args.out_toml, cam_to_toml(&profile)?)?;
    println!("wrote lift table to {}", args.out_csv.display());
    println!("wrote descriptor to {}", args.out_toml.display());
    Ok(())
}

fn cmd_simulate(args: SimulateCmd, cfg: &FileConfig) -> Result<()> {
    let profile = build_profile(&args.cam, cfg)?;
    let (omega, dt, cycles) = build_drive(&args.drive, cfg)?;
    let config = build_capsule_config(&args.capsule, &args.tissue, cfg);
    if args.single_slider {
        if !matches!(config.model, ContactModel::Viscoelastic) {
            return Err(Error::Validation(
                "single-slider contact traces require --model viscoelastic".into(),
            ));
        }
        let tissue = config.tissue.expect("viscoelastic config carries tissue");
        let traj = profile.slider_trajectory_uniform(omega, dt, 0.0, cycles)?;
        let trace = stick_slip_simulate(&traj, &tissue)?;
        let range = trace.steady_cycle_range()?;
        let mean = trace.samples[range].iter().map(|s| s.f_slider_n).sum::<f64>()
            / trace.samples_per_cycle as f64;
        println!("steady_mean_slider_force_N = {mean:.6}");
        let mut out = create_writer(&args.out)?;
        write_contact_csv(&mut out, &trace)?;
        out.flush()?;
        println!("wrote contact trace to {}", args.out.display());
        if let Some(path) = &args.out_measured {
            let base = MeasuredTrace::from_wall_force(&trace);
            let sd = args.noise_sd.unwrap_or(0.0);
            let seed = args.seed.unwrap_or(42);
            let f = if sd > 0.0 { add_noise(&base.f, sd, seed) } else { base.f.clone() };
            let mut metadata = BTreeMap::new();
            metadata.insert("omega_rad_s".into(), format!("{omega}"));
            metadata.insert("dt_s".into(), format!("{dt}"));
            metadata.insert("cycles".into(), format!("{cycles}"));
            if sd > 0.0 {
                metadata.insert("noise_sd_n".into(), format!("{sd}"));
                metadata.insert("seed".into(), format!("{seed}"));
            }
            let measured = MeasuredTrace::new(base.t, f, metadata)?;
            let mut w = create_writer(path)?;
            write_measured_csv(&mut w, &measured)?;
            w.flush()?;
            println!("wrote measured trace to {} (noise sd = {sd} N)", path.display());
        }
        return Ok(());
    }
    let trace = superpose(&profile, &config, omega, dt, cycles)?;
    println!("mean_thrust_N = {:.6}", trace.mean);
    println!("mean_normalized = {:.6}", trace.mean_normalized);
    match trace.ripple_cov {
        Some(cov) => println!("ripple_cov = {cov:.6}"),
        None => println!("ripple_cov = undefined (zero-mean cycle)"),
    }
    let mut out = create_writer(&args.out)?;
    write_thrust_csv(&mut out, &trace)?;
    out.flush()?;
    println!("wrote thrust trace to {}", args.out.display());
    if let Some(path) = &args.out_summary {
        fs::write(path, thrust_summary_json(&trace)?)?;
        println!("wrote summary to {}", path.display());
    }
    Ok(())
}

/// Adds seeded Gaussian noise (Box–Muller) to a force series.
fn add_noise(f: &[f64], sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    f.iter()
        .map(|&v| {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            v + sd * (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
        })
        .collect()
}

fn cmd_fit(args: FitCmd, cfg: &FileConfig) -> Result<()> {
    let file = fs::File::open(&args.measured)?;
    let measured = read_measured_csv(std::io::BufReader::new(file))?;
    let profile = build_profile(&args.cam, cfg)?;
    let omega = args
        .omega
        .or(cfg.drive.omega)
        .or_else(|| measured.metadata.get("omega_rad_s").and_then(|s| s.parse().ok()))
        .ok_or_else(|| {
            Error::Validation(
                "omega is required (flag, config, or omega_rad_s trace metadata)".into(),
            )
        })?;
    let phase = args.phase.unwrap_or(0.0);

    // Re-derive the drive trajectory on the trace's own time base.
    let period = TAU / omega;
    let spc_f = period / measured.dt;
    let spc = spc_f.round();
    if spc < 1.0 || (spc_f - spc).abs() > 1e-6 * spc {
        return Err(Error::Validation(format!(
            "trace time step {} s does not divide the cam period {period} s",
            measured.dt
        )));
    }
    let spc = spc as usize;
    if measured.len() < 2 * spc + 1 || (measured.len() - 1) % spc != 0 {
        return Err(Error::Validation(format!(
            "trace with {} samples does not cover an integer number (≥ 2) of \
             {spc}-sample cam cycles",
            measured.len()
        )));
    }
    let cycles = ((measured.len() - 1) / spc) as u32;
    let traj = profile.slider_trajectory_uniform(omega, measured.dt, phase, cycles)?;

    let report = identify(&measured, &traj)?;
    fs::write(&args.out, fit_report_to_toml(&report)?)?;
    println!("k_tissue_N_per_m = {:.6} ± {:.6}", report.k_tissue, report.k_confidence);
    println!("c_tissue_Ns_per_m = {:.6} ± {:.6}", report.c_tissue, report.c_confidence);
    let opt = |v: Option<f64>| v.map_or("unresolved".to_string(), |x| format!("{x:.6}"));
    println!("tau_ret_s = {}", opt(report.tau_ret));
    println!("tau_adv_s = {}", opt(report.tau_adv));
    println!("mu_s_N = {}", opt(report.mu_s_n));
    println!("mu_k_N = {}", opt(report.mu_k_n));
    println!("rmse_N = {}", opt(report.rmse));
    println!("nrmse = {}", opt(report.nrmse));
    if report.flags.is_empty() {
        println!("flags: none");
    } else {
        println!("flags: {}", report.flags.join("; "));
    }
    println!("wrote fit report to {}", args.out.display());
    if !report.converged() {
        return Err(Error::Fit(format!(
            "fit did not converge: {}",
            report.flags.join("; ")
        )));
    }
    Ok(())
}

fn cmd_sweep(args: SweepCmd) -> Result<()> {
    let text = fs::read_to_string(&args.spec)?;
    let spec: SweepSpec = toml::from_str(&text)
        .map_err(|e| Error::Parse(format!("sweep spec {}: {e}", args.spec.display())))?;
    let result = if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?
            .install(|| run_sweep(&spec))?
    } else {
        run_sweep(&spec)?
    };
    let mut out = create_writer(&args.out)?;
    write_sweep_csv(&mut out, &result)?;
    out.flush()?;
    println!("wrote {} rows to {}", result.rows.len(), args.out.display());
    Ok(())
}
