//! Parameter sweeps over object size and splitting, 1/e contour tracing and
//! dataset emission.
//!
//! For every (channel, temperature, protocol) the log-contrast is scanned
//! along a log grid of splittings at each object size `L = 2R`; each sign
//! change of `log C + 1` is refined by bisection in `log dx`. Where the
//! log-contrast jumps across -1 (the closed-form channel switches formula at
//! `omega1 dt = 1`) no contour point exists; the jump is recorded instead.
//!
//! Output files in the target directory:
//!
//! * `contour_{channel}_T{T}_n{n}.csv`: contour points,
//! * `grid_{channel}_T{T}_n{n}.csv`: optional full grid,
//! * `band.csv`: splittings where `omega1 dt = 1` and `2 pi`,
//! * `index.csv`: one row per contour file,
//! * `manifest.json`: parameters, file list, jumps and failures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bbr::BbrParams;
use crate::contrast::{regime_boundary_dx, ContrastModel, ExperimentConfig, Regime};
use crate::error::{Error, Result};
use crate::material::Material;
use crate::pulses::Protocol;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Target accuracy of a contour point in log-contrast.
pub const CONTOUR_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    PhononDiscrete,
    PhononClosedForm,
    Bbr,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::PhononDiscrete => "phonon_discrete",
            Channel::PhononClosedForm => "phonon_closed_form",
            Channel::Bbr => "bbr",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "phonon_discrete" => Ok(Channel::PhononDiscrete),
            "phonon_closed_form" => Ok(Channel::PhononClosedForm),
            "bbr" => Ok(Channel::Bbr),
            _ => Err(Error::Config(format!("unknown channel '{s}'"))),
        }
    }

    /// Log-contrast of this channel alone.
    pub fn log_c(self, model: &ContrastModel, cfg: &ExperimentConfig) -> Result<f64> {
        match self {
            Channel::PhononDiscrete => Ok(model.discrete(cfg)?.log_c),
            Channel::PhononClosedForm => model.closed_form(cfg),
            Channel::Bbr => Ok(model.bbr(cfg)?.0),
        }
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub material: Material,
    /// Object sizes `L = 2R`, m, strictly increasing.
    pub sizes: Vec<f64>,
    /// Splitting grid, m, strictly increasing.
    pub dx_grid: Vec<f64>,
    pub channels: Vec<Channel>,
    pub temperatures: Vec<f64>,
    pub protocols: Vec<Protocol>,
    pub a_max: f64,
    pub dff: f64,
    pub sigma_x: f64,
    pub bbr: BbrParams,
    pub write_grid: bool,
    pub band_materials: Vec<Material>,
    pub seed: u64,
}

fn strictly_increasing(name: &str, v: &[f64]) -> Result<()> {
    if v.len() < 2 || v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::Config(format!(
            "{name} must be positive, strictly increasing and have at least two points"
        )));
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        strictly_increasing("size grid", &self.sizes)?;
        strictly_increasing("splitting grid", &self.dx_grid)?;
        if self.temperatures.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("temperatures must be positive".into()));
        }
        if !(self.a_max > 0.0 && self.a_max.is_finite()) {
            return Err(Error::Config(format!("a_max = {} must be positive", self.a_max)));
        }
        if !(0.0..=1.0).contains(&self.dff) {
            return Err(Error::Config(format!("dF/F = {} not in [0, 1]", self.dff)));
        }
        if !(self.sigma_x > 0.0) {
            return Err(Error::Config("sigma_x must be positive".into()));
        }
        Ok(())
    }

    pub fn config_at(&self, size: f64, dx: f64, temperature: f64, protocol: Protocol) -> ExperimentConfig {
        ExperimentConfig {
            material: self.material.clone(),
            radius: 0.5 * size,
            dx,
            a_max: self.a_max,
            protocol,
            temperature,
            dff: self.dff,
            sigma_x: self.sigma_x,
            duration: None,
        }
    }
}

/// A point on a 1/e line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    /// Object size `L = 2R`, m.
    pub size: f64,
    /// Splitting at which the channel's contrast is 1/e, m.
    pub dx_1e: f64,
    pub channel: Channel,
    pub regime: Regime,
    /// Log-contrast at `dx_1e` (within 1e-3 of -1).
    pub log_c: f64,
    pub dt: f64,
    pub omega1_dt: f64,
    /// Index of the crossing at this size, counted from small splittings.
    pub branch: u32,
}

/// A crossing of -1 that is a discontinuity rather than a root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub size: f64,
    pub dx: f64,
    pub log_c_below: f64,
    pub log_c_above: f64,
}

/// A grid point that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub size: f64,
    pub dx: f64,
    pub code: String,
    pub message: String,
}

/// Contours and diagnostics for one (channel, temperature, protocol).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSet {
    pub channel: Channel,
    pub temperature: f64,
    pub protocol: Protocol,
    pub points: Vec<ContourPoint>,
    pub jumps: Vec<Jump>,
    pub failures: Vec<Failure>,
    /// `(size, dx, log C)` for every grid point, when requested.
    #[serde(skip)]
    pub grid: Vec<(f64, f64, Option<f64>)>,
}

impl ContourSet {
    pub fn file_stem(&self) -> String {
        format!("{}_T{}_n{}", self.channel.as_str(), self.temperature, self.protocol.index())
    }
}

struct SizeResult {
    points: Vec<ContourPoint>,
    jumps: Vec<Jump>,
    failures: Vec<Failure>,
    grid: Vec<(f64, f64, Option<f64>)>,
}

fn trace_size(
    model: &ContrastModel,
    spec: &SweepSpec,
    channel: Channel,
    temperature: f64,
    protocol: Protocol,
    size: f64,
) -> SizeResult {
    let eval = |dx: f64| channel.log_c(model, &spec.config_at(size, dx, temperature, protocol));
    let mut failures = Vec::new();
    let values: Vec<Option<f64>> = spec
        .dx_grid
        .iter()
        .map(|&dx| match eval(dx) {
            Ok(v) => Some(v),
            Err(e) => {
                failures.push(Failure {
                    size,
                    dx,
                    code: e.code().into(),
                    message: e.to_string(),
                });
                None
            }
        })
        .collect();
    let mut points = Vec::new();
    let mut jumps = Vec::new();
    let mut branch = 0u32;
    for i in 1..values.len() {
        let (Some(fa), Some(fb)) = (values[i - 1], values[i]) else {
            continue;
        };
        let (ga, gb) = (fa + 1.0, fb + 1.0);
        if (ga > 0.0) == (gb > 0.0) {
            continue;
        }
        match bisect_crossing(&eval, spec.dx_grid[i - 1], spec.dx_grid[i], ga, gb) {
            Ok(Crossing::Root(dx, log_c)) => {
                let cfg = spec.config_at(size, dx, temperature, protocol);
                let (dt, omega1_dt) = match (cfg.dt(), model.omega1(&cfg)) {
                    (Ok(dt), Ok(w1)) => (dt, w1 * dt),
                    _ => (f64::NAN, f64::NAN),
                };
                points.push(ContourPoint {
                    size,
                    dx_1e: dx,
                    channel,
                    regime: Regime::classify(omega1_dt),
                    log_c,
                    dt,
                    omega1_dt,
                    branch,
                });
                branch += 1;
            }
            Ok(Crossing::Jump(jump)) => jumps.push(Jump { size, ..jump }),
            Err(e) => failures.push(Failure {
                size,
                dx: spec.dx_grid[i - 1],
                code: e.code().into(),
                message: e.to_string(),
            }),
        }
    }
    let grid = if spec.write_grid {
        spec.dx_grid.iter().zip(&values).map(|(&dx, &v)| (size, dx, v)).collect()
    } else {
        Vec::new()
    };
    SizeResult {
        points,
        jumps,
        failures,
        grid,
    }
}

enum Crossing {
    Root(f64, f64),
    Jump(Jump),
}

/// Bisection in `log dx` on `g = log C + 1`, with `g(lo)`, `g(hi)` of
/// opposite sign (or `g(lo) = 0`).
fn bisect_crossing<F>(eval: &F, lo: f64, hi: f64, g_lo: f64, g_hi: f64) -> Result<Crossing>
where
    F: Fn(f64) -> Result<f64>,
{
    if g_lo.abs() < CONTOUR_TOL {
        return Ok(Crossing::Root(lo, g_lo - 1.0));
    }
    if g_hi.abs() < CONTOUR_TOL {
        return Ok(Crossing::Root(hi, g_hi - 1.0));
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (mut ga, mut gb) = (g_lo, g_hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = eval(m.exp())? + 1.0;
        if gm.abs() < CONTOUR_TOL {
            return Ok(Crossing::Root(m.exp(), gm - 1.0));
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
        if b - a < 1e-13 * a.abs().max(1.0) {
            break;
        }
    }
    Ok(Crossing::Jump(Jump {
        size: f64::NAN,
        dx: (0.5 * (a + b)).exp(),
        log_c_below: ga - 1.0,
        log_c_above: gb - 1.0,
    }))
}

/// Trace the 1/e line of one channel at one temperature and protocol.
pub fn contour_1e(
    model: &ContrastModel,
    spec: &SweepSpec,
    channel: Channel,
    temperature: f64,
    protocol: Protocol,
) -> Result<ContourSet> {
    spec.validate()?;
    // Warm the spectrum cache once rather than racing to fill it.
    model.spectrum(&spec.material)?;
    let per_size: Vec<SizeResult> = spec
        .sizes
        .par_iter()
        .map(|&size| trace_size(model, spec, channel, temperature, protocol, size))
        .collect();
    let mut set = ContourSet {
        channel,
        temperature,
        protocol,
        points: Vec::new(),
        jumps: Vec::new(),
        failures: Vec::new(),
        grid: Vec::new(),
    };
    for r in per_size {
        set.points.extend(r.points);
        set.jumps.extend(r.jumps);
        set.failures.extend(r.failures);
        set.grid.extend(r.grid);
    }
    Ok(set)
}

/// Regime-band edges for one material and protocol at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandRow {
    pub material: String,
    pub protocol: Protocol,
    pub size: f64,
    /// Splitting where `omega1 dt = 1`.
    pub dx_lower: f64,
    /// Splitting where `omega1 dt = 2 pi`.
    pub dx_upper: f64,
}

pub fn regime_band(model: &ContrastModel, spec: &SweepSpec) -> Result<Vec<BandRow>> {
    let mut rows = Vec::new();
    let materials = std::iter::once(&spec.material).chain(&spec.band_materials);
    for m in materials {
        let x1 = model.fundamental_x(m)?;
        for &p in &spec.protocols {
            for &size in &spec.sizes {
                let r = 0.5 * size;
                rows.push(BandRow {
                    material: m.name.clone(),
                    protocol: p,
                    size,
                    dx_lower: regime_boundary_dx(m, x1, r, spec.a_max, p, 1.0),
                    dx_upper: regime_boundary_dx(m, x1, r, spec.a_max, p, 2.0 * std::f64::consts::PI),
                });
            }
        }
    }
    Ok(rows)
}

/// Complete sweep result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepDataset {
    pub spec: SweepSpec,
    pub contours: Vec<ContourSet>,
    pub band: Vec<BandRow>,
}

pub fn run_sweep(model: &ContrastModel, spec: &SweepSpec) -> Result<SweepDataset> {
    spec.validate()?;
    let mut contours = Vec::new();
    for &channel in &spec.channels {
        for &t in &spec.temperatures {
            for &p in &spec.protocols {
                contours.push(contour_1e(model, spec, channel, t, p)?);
            }
        }
    }
    Ok(SweepDataset {
        spec: spec.clone(),
        contours,
        band: regime_band(model, spec)?,
    })
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.10e}")
    } else {
        String::new()
    }
}

pub const CONTOUR_HEADER: &str = "size_m,radius_m,dx_1e_m,log_c,regime,dt_s,omega1_dt,branch";
pub const GRID_HEADER: &str = "size_m,dx_m,log_c";
pub const BAND_HEADER: &str = "material,protocol,size_m,dx_omega1dt_1_m,dx_omega1dt_2pi_m";
pub const INDEX_HEADER: &str = "channel,temperature_k,protocol,file,points,jumps,failures";

pub fn contour_csv(set: &ContourSet) -> String {
    let mut s = String::from(CONTOUR_HEADER);
    s.push('\n');
    for p in &set.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            num(p.size),
            num(0.5 * p.size),
            num(p.dx_1e),
            num(p.log_c),
            p.regime.as_str(),
            num(p.dt),
            num(p.omega1_dt),
            p.branch
        );
    }
    s
}

pub fn grid_csv(set: &ContourSet) -> String {
    let mut s = String::from(GRID_HEADER);
    s.push('\n');
    for &(size, dx, v) in &set.grid {
        let _ = writeln!(s, "{},{},{}", num(size), num(dx), v.map(num).unwrap_or_default());
    }
    s
}

pub fn band_csv(rows: &[BandRow]) -> String {
    let mut s = String::from(BAND_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.material,
            r.protocol.index(),
            num(r.size),
            num(r.dx_lower),
            num(r.dx_upper)
        );
    }
    s
}

/// File listing written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator: String,
    pub seed: u64,
    pub material: Material,
    pub a_max_m_s2: f64,
    pub dff: f64,
    pub size_range_m: [f64; 2],
    pub dx_range_m: [f64; 2],
    pub channels: Vec<Channel>,
    pub temperatures_k: Vec<f64>,
    pub protocols: Vec<u8>,
    pub band_file: String,
    pub index_file: String,
    pub contours: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub channel: Channel,
    pub temperature_k: f64,
    pub protocol: u8,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_file: Option<String>,
    pub points: usize,
    pub jumps: Vec<Jump>,
    pub failures: Vec<Failure>,
}

impl SweepDataset {
    pub fn manifest(&self) -> Manifest {
        let spec = &self.spec;
        Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            generator: concat!("phonocoh ", env!("CARGO_PKG_VERSION")).into(),
            seed: spec.seed,
            material: spec.material.clone(),
            a_max_m_s2: spec.a_max,
            dff: spec.dff,
            size_range_m: [spec.sizes[0], *spec.sizes.last().expect("validated")],
            dx_range_m: [spec.dx_grid[0], *spec.dx_grid.last().expect("validated")],
            channels: spec.channels.clone(),
            temperatures_k: spec.temperatures.clone(),
            protocols: spec.protocols.iter().map(|p| p.index()).collect(),
            band_file: "band.csv".into(),
            index_file: "index.csv".into(),
            contours: self
                .contours
                .iter()
                .map(|c| ManifestEntry {
                    channel: c.channel,
                    temperature_k: c.temperature,
                    protocol: c.protocol.index(),
                    file: format!("contour_{}.csv", c.file_stem()),
                    grid_file: spec.write_grid.then(|| format!("grid_{}.csv", c.file_stem())),
                    points: c.points.len(),
                    jumps: c.jumps.clone(),
                    failures: c.failures.clone(),
                })
                .collect(),
        }
    }

    pub fn index_csv(&self) -> String {
        let mut s = String::from(INDEX_HEADER);
        s.push('\n');
        for c in &self.contours {
            let _ = writeln!(
                s,
                "{},{},{},contour_{}.csv,{},{},{}",
                c.channel.as_str(),
                c.temperature,
                c.protocol.index(),
                c.file_stem(),
                c.points.len(),
                c.jumps.len(),
                c.failures.len()
            );
        }
        s
    }

    /// Write every output file into `dir`, creating it if needed. Returns
    /// the paths written, manifest last.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        for c in &self.contours {
            put(format!("contour_{}.csv", c.file_stem()), contour_csv(c))?;
            if self.spec.write_grid {
                put(format!("grid_{}.csv", c.file_stem()), grid_csv(c))?;
            }
        }
        put("band.csv".into(), band_csv(&self.band))?;
        put("index.csv".into(), self.index_csv())?;
        let manifest = serde_json::to_string_pretty(&self.manifest())
            .map_err(|e| Error::Config(format!("manifest serialisation: {e}")))?;
        put("manifest.json".into(), manifest + "\n")?;
        Ok(written)
    }
}
