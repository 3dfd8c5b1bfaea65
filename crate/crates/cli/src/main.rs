use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use phonocoh::config::Config;
use phonocoh::contrast::{gravity_sanity, mode_contributions};
use phonocoh::pulses::spectrum_a;
use phonocoh::response::{thermal_variances, trajectory, ScaledDrive};
use phonocoh::{
    BbrModel, Channel, ContrastModel, Error, ExperimentConfig, Lattice, Material, Protocol, PulseProtocol, Result,
};

#[derive(Parser)]
#[command(name = "phonocoh", version, about = "Phonon and blackbody decoherence of split massive objects")]
struct Cli {
    /// TOML configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory. Single-table commands print to stdout without it.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed recorded in sweep manifests.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenmodes of a free elastic sphere.
    Modes(ModesArgs),
    /// Pulse shapes in time and their spectra.
    Pulse(PulseArgs),
    /// Phase-space path of one mode for both arms.
    Trajectory(TrajectoryArgs),
    /// All contrast channels for one configuration.
    Contrast(ExperimentArgs),
    /// Blackbody channel for one configuration.
    Bbr(ExperimentArgs),
    /// 1/e contours over the size-splitting plane.
    Sweep(SweepArgs),
    /// Toy-lattice dump used while debugging the oracles.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// Preset name (silicon, steel, diamond) or a material TOML file.
    #[arg(long)]
    material: Option<String>,
    /// Sphere radius, m.
    #[arg(long)]
    radius: Option<f64>,
    /// Maximum separation, m.
    #[arg(long)]
    dx: Option<f64>,
    /// Acceleration cap, m/s^2.
    #[arg(long)]
    amax: Option<f64>,
    /// 0 rectangular, 1 quartic, 2 two-cosine.
    #[arg(long)]
    protocol: Option<u8>,
    /// Temperature, K.
    #[arg(long)]
    temp: Option<f64>,
    /// Relative force heterogeneity dF/F.
    #[arg(long)]
    dff: Option<f64>,
    /// Pulse duration, s, instead of the one set by the acceleration cap.
    #[arg(long)]
    duration: Option<f64>,
    /// Also write per-mode contributions to this CSV (contrast only).
    #[arg(long, value_name = "PATH")]
    contributions: Option<PathBuf>,
}

#[derive(Args)]
struct ModesArgs {
    #[arg(long)]
    material: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// Largest dimensionless frequency omega R / c_T.
    #[arg(long, default_value_t = 20.0)]
    xmax: f64,
}

#[derive(Args)]
struct PulseArgs {
    /// Protocols to emit (default: all three).
    #[arg(long, value_delimiter = ',')]
    protocol: Vec<u8>,
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    amax: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    /// Time samples per pulse.
    #[arg(long, default_value_t = 400)]
    samples: usize,
    /// Largest Omega = omega dt in the spectrum table.
    #[arg(long, default_value_t = 60.0)]
    omega_max: f64,
    #[arg(long, default_value_t = 1200)]
    omega_points: usize,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Values of omega dt / 2 pi.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.3, 4.75])]
    cycles: Vec<f64>,
    /// Protocols to emit (default: the configured one).
    #[arg(long = "protocols", value_delimiter = ',')]
    protocols: Vec<u8>,
    #[arg(long, default_value_t = 400)]
    samples: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated channels: phonon_discrete, phonon_closed_form, bbr.
    #[arg(long, value_delimiter = ',')]
    channels: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    temps: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    protocols: Vec<u8>,
    #[arg(long)]
    amax: Option<f64>,
    /// Grid density for both axes.
    #[arg(long)]
    per_decade: Option<u32>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 64)]
    atoms: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error[E_CONFIG]: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::from_path(p)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Modes(a) => modes(cli, &config, a),
        Command::Pulse(a) => pulse(cli, &config, a),
        Command::Trajectory(a) => run_trajectory(cli, &config, a),
        Command::Contrast(a) => contrast(cli, &config, a),
        Command::Bbr(a) => bbr(cli, &config, a),
        Command::Sweep(a) => sweep(cli, &config, a),
        Command::Oracle(a) => oracle(cli, a),
    }
}

fn material(config: &Config, flag: Option<&str>) -> Result<Material> {
    let Some(name) = flag else {
        return config.material();
    };
    if let Some(m) = Material::preset(name) {
        return Ok(m);
    }
    let path = Path::new(name);
    if path.extension().is_some_and(|e| e == "toml") {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        return Material::from_toml_str(&text);
    }
    Err(Error::Config(format!("unknown material '{name}'")))
}

fn experiment(config: &Config, a: &ExperimentArgs) -> Result<ExperimentConfig> {
    let mut section = config.experiment.clone();
    section.radius_m = a.radius.or(section.radius_m);
    section.dx_m = a.dx.or(section.dx_m);
    section.a_max_m_s2 = a.amax.or(section.a_max_m_s2);
    section.protocol = a.protocol.or(section.protocol);
    section.temperature_k = a.temp.or(section.temperature_k);
    section.dff = a.dff.or(section.dff);
    section.duration_s = a.duration.or(section.duration_s);
    section.resolve(material(config, a.material.as_deref())?)
}

fn model(config: &Config) -> ContrastModel {
    ContrastModel::new(config.bbr.clone()).with_cutoffs(config.numerics.x_start, config.numerics.x_max)
}

/// Write `body` to `out/name`, or to stdout without `--out`.
fn emit(cli: &Cli, name: &str, body: &str) -> Result<()> {
    match &cli.out {
        Some(dir) => {
            let path = write_file(dir, name, body)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Config(format!("JSON output: {e}")))
}

fn modes(cli: &Cli, config: &Config, a: &ModesArgs) -> Result<()> {
    let m = material(config, a.material.as_deref())?;
    let radius = a.radius.or(config.experiment.radius_m).unwrap_or(0.5e-6);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
    }
    let spec = phonocoh::DimensionlessSpectrum::compute(m.speed_ratio(), a.xmax)?;
    let modes = spec.scale(&m, radius, f64::INFINITY);
    let mut s = String::from("family,l,n,x,omega_rad_s,freq_hz,degeneracy\n");
    for md in &modes.modes {
        let family = match md.family {
            phonocoh::Family::Torsional => "torsional",
            phonocoh::Family::Spheroidal => "spheroidal",
        };
        let _ = writeln!(
            s,
            "{family},{},{},{:.10},{:.10e},{:.10e},{}",
            md.l,
            md.n,
            md.x,
            md.omega,
            md.omega / (2.0 * std::f64::consts::PI),
            md.degeneracy
        );
    }
    emit(cli, "modes.csv", &s)
}

fn protocols(list: &[u8], fallback: Protocol) -> Result<Vec<Protocol>> {
    if list.is_empty() {
        return Ok(vec![fallback]);
    }
    list.iter().map(|&n| Protocol::from_index(n)).collect()
}

fn pulse(cli: &Cli, config: &Config, a: &PulseArgs) -> Result<()> {
    let shapes = if a.protocol.is_empty() {
        Protocol::ALL.to_vec()
    } else {
        protocols(&a.protocol, Protocol::TwoCosine)?
    };
    let exp = &config.experiment;
    let dx = a.dx.or(exp.dx_m).unwrap_or(1e-7);
    let amax = a.amax.or(exp.a_max_m_s2).unwrap_or(phonocoh::config::DEFAULT_A_MAX);
    let duration = a.duration.or(exp.duration_s);
    let dir = out_dir(cli);
    for &shape in &shapes {
        let p = match duration {
            Some(dt) => PulseProtocol::new(shape, dx, dt)?,
            None => PulseProtocol::with_acceleration_cap(shape, dx, amax)?,
        };
        let n = a.samples.max(2);
        let mut s = String::from("t_s,accel_m_s2,sep_m\n");
        for i in 0..=n {
            let t = p.dt * i as f64 / n as f64;
            let (sep, _) = p.rel_trajectory(t)?;
            let _ = writeln!(s, "{:.10e},{:.10e},{:.10e}", t, p.accel(t)?, sep);
        }
        let path = write_file(&dir, &format!("pulse_n{}.csv", shape.index()), &s)?;
        eprintln!("wrote {}", path.display());
    }
    if !(a.omega_max > 0.0) || a.omega_points < 2 {
        return Err(Error::InvalidParameter("spectrum table needs omega_max > 0 and two points".into()));
    }
    let mut s = String::from("Omega,A_0,A_1,A_2\n");
    for i in 0..=a.omega_points {
        let w = a.omega_max * i as f64 / a.omega_points as f64;
        let _ = write!(s, "{w:.10e}");
        for shape in Protocol::ALL {
            let _ = write!(s, ",{:.10e}", spectrum_a(shape, w) + 0.0);
        }
        s.push('\n');
    }
    let path = write_file(&dir, "pulse_spectrum.csv", &s)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run_trajectory(cli: &Cli, config: &Config, a: &TrajectoryArgs) -> Result<()> {
    let cfg = experiment(config, &a.exp)?;
    let dir = out_dir(cli);
    for shape in protocols(&a.protocols, cfg.protocol)? {
        let pulse = match cfg.duration {
            Some(dt) => PulseProtocol::new(shape, cfg.dx, dt)?,
            None => PulseProtocol::with_acceleration_cap(shape, cfg.dx, cfg.a_max)?,
        };
        let drive = ScaledDrive::representative(pulse, cfg.dff, cfg.material.m1());
        for &cycles in &a.cycles {
            if !(cycles > 0.0 && cycles.is_finite()) {
                return Err(Error::InvalidParameter(format!("omega dt / 2 pi = {cycles} must be positive")));
            }
            let omega = 2.0 * std::f64::consts::PI * cycles / pulse.dt;
            let n = a.samples.max(2);
            let grid: Vec<f64> = (0..=n).map(|i| pulse.dt * i as f64 / n as f64).collect();
            let path = trajectory(omega, &drive, &grid, &thermal_variances(omega, cfg.temperature)?)?;
            let mut s = String::from("t_s,arm,Q,P\n");
            for (sign, arm) in [(1.0, "plus"), (-1.0, "minus")] {
                for p in &path {
                    let _ = writeln!(s, "{:.10e},{arm},{:.10e},{:.10e}", p.t, sign * p.big_q, sign * p.big_p);
                }
            }
            let name = format!("trajectory_n{}_c{cycles}.csv", shape.index());
            let file = write_file(&dir, &name, &s)?;
            eprintln!("wrote {}", file.display());
        }
    }
    Ok(())
}

fn contrast(cli: &Cli, config: &Config, a: &ExperimentArgs) -> Result<()> {
    let cfg = experiment(config, a)?;
    let model = model(config);
    let report = model.evaluate(&cfg)?;
    if let Some(path) = &a.contributions {
        let spec = model.spectrum(&cfg.material)?;
        let cutoff = model.discrete(&cfg).map(|d| d.omega_cutoff).unwrap_or(model.x_max * cfg.material.c_t / cfg.radius);
        let modes = spec.scale(&cfg.material, cfg.radius, cutoff);
        let mut s = String::from("family,l,n,omega_rad_s,degeneracy,log_c\n");
        for c in mode_contributions(&cfg, &modes)? {
            let family = match c.family {
                phonocoh::Family::Torsional => "torsional",
                phonocoh::Family::Spheroidal => "spheroidal",
            };
            let _ = writeln!(s, "{family},{},{},{:.10e},{},{:.10e}", c.l, c.n, c.omega, c.degeneracy, c.log_c);
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, s)?;
        eprintln!("wrote {}", path.display());
    }
    emit(cli, "contrast.json", &json(&report)?)
}

#[derive(Serialize)]
struct BbrReport {
    t_env: f64,
    radius: f64,
    dx: f64,
    dt: f64,
    d_p: f64,
    d_p_small_limit: f64,
    d_p_large_limit: f64,
    log_c: f64,
    wien_wavelength: f64,
    coherence_warning: bool,
}

fn bbr(cli: &Cli, config: &Config, a: &ExperimentArgs) -> Result<()> {
    let cfg = experiment(config, a)?;
    let m = BbrModel::new(&config.bbr, cfg.temperature)?;
    let pulse = cfg.pulse()?;
    let out = m.evaluate(&pulse, cfg.radius)?;
    let report = BbrReport {
        t_env: cfg.temperature,
        radius: cfg.radius,
        dx: cfg.dx,
        dt: pulse.dt,
        d_p: out.d_p,
        d_p_small_limit: m.small_limit(cfg.radius),
        d_p_large_limit: m.large_limit(cfg.radius),
        log_c: out.log_c,
        wien_wavelength: m.wien_wavelength(),
        coherence_warning: out.coherence_warning,
    };
    emit(cli, "bbr.json", &json(&report)?)
}

fn sweep(cli: &Cli, config: &Config, a: &SweepArgs) -> Result<()> {
    let mut section = config.sweep.clone();
    if !a.channels.is_empty() {
        section.channels = a.channels.iter().map(|c| Channel::parse(c)).collect::<Result<_>>()?;
    }
    if !a.temps.is_empty() {
        section.temperatures_k = a.temps.clone();
    }
    if !a.protocols.is_empty() {
        section.protocols = a.protocols.clone();
    }
    if let Some(v) = a.amax {
        section.a_max_m_s2 = v;
    }
    if let Some(n) = a.per_decade {
        section.sizes_per_decade = n;
        section.dx_per_decade = n;
    }
    let spec = section.resolve(config.material()?, config.bbr.clone(), cli.seed)?;
    let data = phonocoh::sweep::run_sweep(&model(config), &spec)?;
    let files = data.write(&out_dir(cli))?;
    for f in &files {
        eprintln!("wrote {}", f.display());
    }
    let failures: usize = data.contours.iter().map(|c| c.failures.len()).sum();
    if failures > 0 {
        eprintln!("{failures} grid points failed; see manifest.json");
    }
    Ok(())
}

fn oracle(cli: &Cli, a: &OracleArgs) -> Result<()> {
    let lattice = Lattice::chain(a.atoms, 28.0 * phonocoh::constants::AMU, 10.0, 2.35e-10)?;
    let modes = lattice.normal_modes()?;
    let gravity = gravity_sanity(&lattice, phonocoh::constants::G_EARTH)?;
    let mut s = String::from("k,omega_rad_s,gravity_projection\n");
    for (k, (w, g)) in modes.omegas.iter().zip(&gravity).enumerate() {
        let _ = writeln!(s, "{k},{w:.10e},{g:.10e}");
    }
    emit(cli, "oracle_modes.csv", &s)
}
