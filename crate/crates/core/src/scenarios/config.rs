//! Line-oriented `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::projection::SubstepPolicy;
use crate::solver::{RunConfig, ViscousCfl};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    ShockTube,
    Smooth1d,
    ShockBubble,
    Periodic2d,
}

impl ScenarioKind {
    /// Spatial dimension of the scenario.
    pub fn dim(self) -> usize {
        match self {
            ScenarioKind::ShockTube | ScenarioKind::Smooth1d => 1,
            ScenarioKind::ShockBubble | ScenarioKind::Periodic2d => 2,
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shock_tube" => Ok(ScenarioKind::ShockTube),
            "smooth_1d" => Ok(ScenarioKind::Smooth1d),
            "shock_bubble" => Ok(ScenarioKind::ShockBubble),
            "periodic_2d" => Ok(ScenarioKind::Periodic2d),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScenarioKind::ShockTube => "shock_tube",
            ScenarioKind::Smooth1d => "smooth_1d",
            ScenarioKind::ShockBubble => "shock_bubble",
            ScenarioKind::Periodic2d => "periodic_2d",
        })
    }
}

/// Speed used to set the pre-computed stationary shock in motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShockShift {
    /// `sqrt(5/3) * M0`, which brings the upstream gas to rest.
    #[default]
    RestFrame,
    /// `sqrt(5 M0 / 3)`.
    SqrtMach,
}

impl ShockShift {
    pub fn speed(self, mach: f64) -> f64 {
        match self {
            ShockShift::RestFrame => (5.0f64 / 3.0).sqrt() * mach,
            ShockShift::SqrtMach => (5.0 * mach / 3.0).sqrt(),
        }
    }
}

impl FromStr for ShockShift {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rest_frame" => Ok(ShockShift::RestFrame),
            "sqrt_mach" => Ok(ShockShift::SqrtMach),
            other => Err(Error::Config(format!("unknown shock_shift '{other}'"))),
        }
    }
}

impl std::fmt::Display for ShockShift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ShockShift::RestFrame => "rest_frame",
            ShockShift::SqrtMach => "sqrt_mach",
        })
    }
}

/// Everything needed to build and run one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub scenario: ScenarioKind,
    pub run: RunConfig,
    pub nx: usize,
    pub ny: usize,
    pub output_dir: PathBuf,
    pub mach: f64,
    pub shock_shift: ShockShift,
    /// Also write the raw expansion coefficients next to each snapshot.
    pub write_coefficients: bool,
}

impl Config {
    pub fn new(scenario: ScenarioKind) -> Self {
        Config {
            scenario,
            run: RunConfig::default(),
            nx: 100,
            ny: if scenario.dim() == 2 { 100 } else { 1 },
            output_dir: PathBuf::from("output"),
            mach: 2.0,
            shock_shift: ShockShift::default(),
            write_coefficients: false,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    /// Spatial dimension `N`.
    pub fn dim(&self) -> usize {
        self.scenario.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        if self.nx == 0 || (self.dim() == 2 && self.ny == 0) {
            return Err(Error::Config("grid counts must be positive".into()));
        }
        if self.run.velocity_dim < self.dim() {
            return Err(Error::Config(format!(
                "D = {} is below the spatial dimension {}",
                self.run.velocity_dim,
                self.dim()
            )));
        }
        if self.scenario == ScenarioKind::ShockBubble && !(self.mach > 1.0) {
            return Err(Error::Config(format!(
                "mach must exceed 1, got {}",
                self.mach
            )));
        }
        Ok(())
    }

    /// Canonical `key = value` text; parses back to an identical config.
    pub fn echo(&self) -> String {
        let r = &self.run;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("scenario", self.scenario.to_string());
        kv("M", r.order.to_string());
        kv("D", r.velocity_dim.to_string());
        kv("N", self.dim().to_string());
        kv("nx", self.nx.to_string());
        kv("ny", self.ny.to_string());
        kv("kn", r.kn.to_string());
        kv("cfl", r.cfl.to_string());
        kv("end_time", r.end_time.to_string());
        kv("regularized", r.regularized.to_string());
        kv("reconstruction", r.reconstruction.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        kv(
            "snapshot_dt",
            r.snapshot_dt
                .map_or_else(|| "none".to_string(), |x| x.to_string()),
        );
        kv("threads", r.threads.to_string());
        kv("proj_substep_cap", r.substeps.cap.to_string());
        kv("viscous_cfl", r.viscous_cfl.to_string());
        kv("mach", self.mach.to_string());
        kv("shock_shift", self.shock_shift.to_string());
        kv("write_coefficients", self.write_coefficients.to_string());
        s
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("bad value for {key}: '{v}'"))),
    }
}

impl FromStr for Config {
    type Err = Error;

    /// Unknown keys are errors. Keys starting with `snapshot.` are the
    /// conservation records of a manifest and are skipped.
    fn from_str(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let scenario = pairs
            .iter()
            .find(|(k, _)| k == "scenario")
            .ok_or_else(|| Error::Config("missing key 'scenario'".into()))?
            .1
            .parse()?;
        let mut c = Config::new(scenario);
        let mut n_dim = None;
        let mut ny_set = false;
        for (k, v) in &pairs {
            let v = v.as_str();
            match k.as_str() {
                "scenario" => {}
                "M" => c.run.order = parse_num(k, v)?,
                "D" => c.run.velocity_dim = parse_num(k, v)?,
                "N" => n_dim = Some(parse_num::<usize>(k, v)?),
                "nx" => c.nx = parse_num(k, v)?,
                "ny" => {
                    c.ny = parse_num(k, v)?;
                    ny_set = true;
                }
                "kn" => c.run.kn = parse_num(k, v)?,
                "cfl" => c.run.cfl = parse_num(k, v)?,
                "end_time" => c.run.end_time = parse_num(k, v)?,
                "regularized" => c.run.regularized = parse_bool(k, v)?,
                "reconstruction" => c.run.reconstruction = v.parse()?,
                "output_dir" => c.output_dir = PathBuf::from(v),
                "snapshot_dt" => {
                    c.run.snapshot_dt = match v {
                        "none" | "" => None,
                        _ => Some(parse_num(k, v)?),
                    }
                }
                "threads" => c.run.threads = parse_num(k, v)?,
                "proj_substep_cap" => c.run.substeps = SubstepPolicy::with_cap(parse_num(k, v)?),
                "viscous_cfl" => c.run.viscous_cfl = v.parse::<ViscousCfl>()?,
                "mach" => c.mach = parse_num(k, v)?,
                "shock_shift" => c.shock_shift = v.parse()?,
                "write_coefficients" => c.write_coefficients = parse_bool(k, v)?,
                k if k.starts_with("snapshot.") => {}
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        if let Some(n) = n_dim {
            if n != c.dim() {
                return Err(Error::Config(format!(
                    "N = {n} does not match scenario {} (N = {})",
                    c.scenario,
                    c.dim()
                )));
            }
        }
        if !ny_set && c.dim() == 2 {
            c.ny = c.nx;
        }
        c.validate()?;
        Ok(c)
    }
}
