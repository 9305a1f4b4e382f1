//! `key = value` run configuration.
//!
//! | key                      | default          |
//! |--------------------------|------------------|
//! | `preset`                 | none             |
//! | `seed`                   | 1                |
//! | `output.dir`             | `out`            |
//! | `output.snapshots`       | true             |
//! | `grid.nx`, `grid.ny`     | 32, 32           |
//! | `grid.lx`, `grid.ly`     | 1, 1             |
//! | `params.chi`             | 1                |
//! | `params.ell`             | 1                |
//! | `params.eps`             | 1e-3             |
//! | `step.cfl_safety`        | 0.4              |
//! | `step.dt_min`            | 1e-12            |
//! | `step.dt_max`            | 1e-2             |
//! | `step.t_end`             | 1                |
//! | `step.max_rejections`    | 40               |
//! | `step.fixed_dt`          | none             |
//! | `step.u_ceiling`         | 1e6              |
//! | `step.snapshot_times`    | (empty)          |
//! | `step.stop_below_sup_v`  | none             |
//! | `diag.b`                 | 1                |
//! | `diag.p_list`            | 2, 3, 5          |
//! | `diag.stride`            | 20               |
//! | `diag.positivity_floor`  | 1e-14            |
//! | `diag.dictionary_size`   | 25               |
//! | `init.u0`, `init.v0`     | `constant(1)`    |
//!
//! A `preset` replaces the defaults with that preset's values; explicit keys
//! still override them regardless of line order. Initial profiles are one of
//! `constant(c)`, `gaussian(mass, width, background)`, `cosine_x(mean, amp)`,
//! `cosine_xy(mean, amp)` or `random(mean, relative)`; random profiles draw
//! from the master seed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use degen_taxis::experiments::{preset, Profile};
use degen_taxis::{DiagConfig, GridSpec, Params, StepControl};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("{key}: {msg}")]
    Range { key: String, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub snapshots: bool,
    pub grid: GridSpec,
    pub params: Params,
    pub control: StepControl,
    pub diag: DiagConfig,
    pub u0: Profile,
    pub v0: Profile,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            seed: 1,
            output_dir: PathBuf::from("out"),
            snapshots: true,
            grid: GridSpec::unit_square(32).expect("valid default grid"),
            params: Params::default(),
            control: StepControl::default(),
            diag: DiagConfig::default(),
            u0: Profile::Constant(1.0),
            v0: Profile::Constant(1.0),
        }
    }
}

const KEYS: &[&str] = &[
    "seed",
    "output.dir",
    "output.snapshots",
    "grid.nx",
    "grid.ny",
    "grid.lx",
    "grid.ly",
    "params.chi",
    "params.ell",
    "params.eps",
    "step.cfl_safety",
    "step.dt_min",
    "step.dt_max",
    "step.t_end",
    "step.max_rejections",
    "step.fixed_dt",
    "step.u_ceiling",
    "step.snapshot_times",
    "step.stop_below_sup_v",
    "diag.b",
    "diag.p_list",
    "diag.stride",
    "diag.positivity_floor",
    "diag.dictionary_size",
    "init.u0",
    "init.v0",
];

fn bad(line: usize, key: &str, value: &str, what: &str) -> ConfigError {
    ConfigError::Parse {
        line,
        msg: format!("`{key}`: cannot read `{value}` as {what}"),
    }
}

fn real(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(line, key, v, "a finite real"))
}

fn count(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| bad(line, key, v, "a nonnegative integer"))
}

fn optional(line: usize, key: &str, v: &str) -> Result<Option<f64>, ConfigError> {
    if v == "none" {
        Ok(None)
    } else {
        real(line, key, v).map(Some)
    }
}

fn reals(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| real(line, key, x.trim())).collect()
}

fn profile(line: usize, key: &str, v: &str) -> Result<Profile, ConfigError> {
    let err = || bad(line, key, v, "an initial profile");
    let (name, rest) = v.split_once('(').ok_or_else(err)?;
    let args = rest.strip_suffix(')').ok_or_else(err)?;
    let args = reals(line, key, args)?;
    let p = match (name.trim(), args.as_slice()) {
        ("constant", &[c]) => Profile::Constant(c),
        ("gaussian", &[mass, width, background]) => Profile::GaussianBump { mass, width, background },
        ("cosine_x", &[mean, amplitude]) => Profile::CosineX { mean, amplitude },
        ("cosine_xy", &[mean, amplitude]) => Profile::CosineXY { mean, amplitude },
        ("random", &[mean, relative]) => Profile::RandomPerturbation { mean, relative, seed: 0 },
        _ => return Err(err()),
    };
    Ok(p)
}

fn profile_text(p: &Profile) -> String {
    match *p {
        Profile::Constant(c) => format!("constant({c:?})"),
        Profile::GaussianBump { mass, width, background } => {
            format!("gaussian({mass:?}, {width:?}, {background:?})")
        }
        Profile::CosineX { mean, amplitude } => format!("cosine_x({mean:?}, {amplitude:?})"),
        Profile::CosineXY { mean, amplitude } => format!("cosine_xy({mean:?}, {amplitude:?})"),
        Profile::RandomPerturbation { mean, relative, .. } => format!("random({mean:?}, {relative:?})"),
    }
}

fn list_text(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn opt_text(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |x| format!("{x:?}"))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if key != "preset" && !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if let Some((first, _)) = entries.get(key) {
            return Err(ConfigError::Parse {
                line,
                msg: format!("duplicate key `{key}` (first set on line {first})"),
            });
        }
        entries.insert(key.into(), (line, value.trim().into()));
    }

    let mut cfg = RunConfig::default();
    if let Some((line, name)) = entries.get("preset") {
        let p = preset(name).map_err(|e| ConfigError::Parse { line: *line, msg: e.to_string() })?;
        cfg.preset = Some(p.name);
        cfg.grid = p.grid;
        cfg.params = p.params;
        cfg.control = p.control;
        cfg.diag = p.diag;
        cfg.diag.keep_fields = false;
        cfg.u0 = p.u0;
        cfg.v0 = p.v0;
    }
    let (mut nx, mut ny, mut lx, mut ly) = (cfg.grid.nx, cfg.grid.ny, cfg.grid.lx, cfg.grid.ly);
    for key in KEYS {
        let Some((line, v)) = entries.get(*key) else { continue };
        let (l, v) = (*line, v.as_str());
        match *key {
            "seed" => cfg.seed = v.parse().map_err(|_| bad(l, key, v, "an unsigned integer"))?,
            "output.dir" => cfg.output_dir = PathBuf::from(v),
            "output.snapshots" => cfg.snapshots = v.parse().map_err(|_| bad(l, key, v, "true or false"))?,
            "grid.nx" => nx = count(l, key, v)?,
            "grid.ny" => ny = count(l, key, v)?,
            "grid.lx" => lx = real(l, key, v)?,
            "grid.ly" => ly = real(l, key, v)?,
            "params.chi" => cfg.params.chi = real(l, key, v)?,
            "params.ell" => cfg.params.ell = real(l, key, v)?,
            "params.eps" => cfg.params.eps = real(l, key, v)?,
            "step.cfl_safety" => cfg.control.cfl_safety = real(l, key, v)?,
            "step.dt_min" => cfg.control.dt_min = real(l, key, v)?,
            "step.dt_max" => cfg.control.dt_max = real(l, key, v)?,
            "step.t_end" => cfg.control.t_end = real(l, key, v)?,
            "step.max_rejections" => cfg.control.max_rejections_per_step = count(l, key, v)?,
            "step.fixed_dt" => cfg.control.fixed_dt = optional(l, key, v)?,
            "step.u_ceiling" => cfg.control.u_ceiling = real(l, key, v)?,
            "step.snapshot_times" => cfg.control.snapshot_times = reals(l, key, v)?,
            "step.stop_below_sup_v" => cfg.control.stop_below_sup_v = optional(l, key, v)?,
            "diag.b" => cfg.diag.b = real(l, key, v)?,
            "diag.p_list" => cfg.diag.p_list = reals(l, key, v)?,
            "diag.stride" => cfg.diag.stride = count(l, key, v)?,
            "diag.positivity_floor" => cfg.diag.positivity_floor = real(l, key, v)?,
            "diag.dictionary_size" => cfg.diag.dictionary_size = count(l, key, v)?,
            "init.u0" => cfg.u0 = profile(l, key, v)?,
            "init.v0" => cfg.v0 = profile(l, key, v)?,
            _ => unreachable!("key table and match arms agree"),
        }
    }
    cfg.grid = GridSpec::new(nx, ny, lx, ly).map_err(|e| range("grid", e))?;
    cfg.set_seed(cfg.seed);
    cfg.validate()?;
    Ok(cfg)
}

fn range(key: &str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Range {
        key: key.into(),
        msg: e.to_string(),
    }
}

impl RunConfig {
    /// Sets the master seed; random initial profiles follow it.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        for p in [&mut self.u0, &mut self.v0] {
            if let Profile::RandomPerturbation { seed: s, .. } = p {
                *s = seed;
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| range("params", e))?;
        self.control.validate().map_err(|e| range("step", e))?;
        self.diag.validate().map_err(|e| range("diag", e))?;
        let u0 = self.u0.sample(self.grid);
        let v0 = self.v0.sample(self.grid);
        if !(v0.min() > 0.0) {
            return Err(range("init.v0", format!("v0 must be positive, min is {}", v0.min())));
        }
        let u_floor = if self.params.eps > 0.0 { u0.min() >= 0.0 } else { u0.min() > 0.0 };
        if !u_floor {
            return Err(range(
                "init.u0",
                format!("u0 must be nonnegative (positive when eps = 0), min is {}", u0.min()),
            ));
        }
        Ok(())
    }

    /// Canonical text form; `parse_config` reproduces `self` from it.
    pub fn to_text(&self) -> String {
        let c = &self.control;
        let d = &self.diag;
        let mut lines = Vec::new();
        if let Some(p) = &self.preset {
            lines.push(format!("preset = {p}"));
        }
        let mut put = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        put("seed", self.seed.to_string());
        put("output.dir", self.output_dir.display().to_string());
        put("output.snapshots", self.snapshots.to_string());
        put("grid.nx", self.grid.nx.to_string());
        put("grid.ny", self.grid.ny.to_string());
        put("grid.lx", format!("{:?}", self.grid.lx));
        put("grid.ly", format!("{:?}", self.grid.ly));
        put("params.chi", format!("{:?}", self.params.chi));
        put("params.ell", format!("{:?}", self.params.ell));
        put("params.eps", format!("{:?}", self.params.eps));
        put("step.cfl_safety", format!("{:?}", c.cfl_safety));
        put("step.dt_min", format!("{:?}", c.dt_min));
        put("step.dt_max", format!("{:?}", c.dt_max));
        put("step.t_end", format!("{:?}", c.t_end));
        put("step.max_rejections", c.max_rejections_per_step.to_string());
        put("step.fixed_dt", opt_text(c.fixed_dt));
        put("step.u_ceiling", format!("{:?}", c.u_ceiling));
        put("step.snapshot_times", list_text(&c.snapshot_times));
        put("step.stop_below_sup_v", opt_text(c.stop_below_sup_v));
        put("diag.b", format!("{:?}", d.b));
        put("diag.p_list", list_text(&d.p_list));
        put("diag.stride", d.stride.to_string());
        put("diag.positivity_floor", format!("{:?}", d.positivity_floor));
        put("diag.dictionary_size", d.dictionary_size.to_string());
        put("init.u0", profile_text(&self.u0));
        put("init.v0", profile_text(&self.v0));
        lines.join("\n") + "\n"
    }
}
