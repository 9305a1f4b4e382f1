//! Preset scenarios and the studies built on them: the vanishing
//! regularization limit, nutrient extinction with stabilization of the
//! density, and the small-nutrient scaling of the final profile.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{check_invariants, dual_distance, DiagConfig, InvariantContext};
use crate::error::{Result, TaxisError};
use crate::grid::{integrate, GridSpec, ScalarField};
use crate::ineq_lab::{fit_slope, random_positive_field, RandomFieldSpec};
use crate::model::Params;
use crate::stepper::{run, StepControl, Trajectory};

pub const PRESET_NAMES: [&str; 5] = ["homogeneous", "branching", "small_v0", "eps_study", "longtime"];

/// Closed-form initial profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Constant(f64),
    /// Gaussian centered in the domain, rescaled so its discrete integral is
    /// exactly `mass`, on top of `background`.
    GaussianBump { mass: f64, width: f64, background: f64 },
    /// `mean + amplitude cos(pi x / lx)`
    CosineX { mean: f64, amplitude: f64 },
    /// `mean + amplitude cos(pi x / lx) cos(pi y / ly)`
    CosineXY { mean: f64, amplitude: f64 },
    /// `mean (1 + relative r)` with `r` a seeded smooth field, `max |r| = 1`.
    RandomPerturbation { mean: f64, relative: f64, seed: u64 },
}

impl Profile {
    pub fn sample(&self, grid: GridSpec) -> ScalarField {
        let pi = std::f64::consts::PI;
        match *self {
            Profile::Constant(c) => ScalarField::constant(grid, c),
            Profile::GaussianBump { mass, width, background } => {
                let (cx, cy) = (0.5 * grid.lx, 0.5 * grid.ly);
                let bump = ScalarField::from_fn(grid, |x, y| {
                    (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * width * width)).exp()
                });
                let scale = mass / integrate(&bump);
                bump.map(|b| background + scale * b)
            }
            Profile::CosineX { mean, amplitude } => {
                ScalarField::from_fn(grid, |x, _| mean + amplitude * (pi * x / grid.lx).cos())
            }
            Profile::CosineXY { mean, amplitude } => ScalarField::from_fn(grid, |x, y| {
                mean + amplitude * (pi * x / grid.lx).cos() * (pi * y / grid.ly).cos()
            }),
            Profile::RandomPerturbation { mean, relative, seed } => {
                let spec = RandomFieldSpec {
                    floor: None,
                    amplitude: 1.0,
                    ..RandomFieldSpec::new(grid)
                };
                let r = random_positive_field(&spec, seed);
                let m = r.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let m = if m > 0.0 { m } else { 1.0 };
                r.map(|x| mean * (1.0 + relative * x / m))
            }
        }
    }
}

/// Study thresholds; all are desk-scale choices recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Extinction level for `||v||_inf` in the long-time study.
    pub v_threshold: f64,
    /// Fraction of the initial variance of `u` the final profile must keep.
    pub variance_retention: f64,
    /// Final `||v||_inf` relative to `v_bar` in the nutrient scaling study.
    pub scaling_extinction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            v_threshold: 1e-3,
            variance_retention: 0.5,
            scaling_extinction: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub grid: GridSpec,
    pub u0: Profile,
    pub v0: Profile,
    pub params: Params,
    pub control: StepControl,
    pub diag: DiagConfig,
    pub thresholds: Thresholds,
}

impl Preset {
    pub fn initial_data(&self) -> Result<(ScalarField, ScalarField)> {
        let u0 = self.u0.sample(self.grid);
        let v0 = self.v0.sample(self.grid);
        let min_v = v0.min();
        if !(min_v > 0.0) {
            return Err(TaxisError::PositivityViolated(min_v));
        }
        if u0.min() < 0.0 {
            return Err(TaxisError::NegativeInitialData(u0.min()));
        }
        Ok((u0, v0))
    }

    /// Same preset on an `n x n` grid over the same domain.
    pub fn with_resolution(mut self, n: usize) -> Result<Self> {
        self.grid = GridSpec::new(n, n, self.grid.lx, self.grid.ly)?;
        Ok(self)
    }

    /// Replaces a constant nutrient profile by `v_bar`.
    pub fn with_v_bar(mut self, v_bar: f64) -> Result<Self> {
        if !(v_bar > 0.0 && v_bar.is_finite()) {
            return Err(TaxisError::InvalidParams(format!("v0 must be positive, got {v_bar}")));
        }
        self.v0 = Profile::Constant(v_bar);
        Ok(self)
    }

    pub fn run(&self) -> Result<Trajectory> {
        let (u0, v0) = self.initial_data()?;
        run(&u0, &v0, &self.params, &self.control, &self.diag)
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    let unit = |n| GridSpec::unit_square(n);
    let p = match name {
        "homogeneous" => Preset {
            name: name.into(),
            grid: unit(32)?,
            u0: Profile::Constant(1.0),
            v0: Profile::Constant(1.0),
            params: Params::new(1.0, 0.0, 0.0)?,
            control: StepControl {
                t_end: 0.5,
                ..Default::default()
            },
            diag: DiagConfig::default(),
            thresholds: Thresholds::default(),
        },
        "branching" => Preset {
            name: name.into(),
            grid: unit(128)?,
            u0: Profile::GaussianBump {
                mass: 0.1,
                width: 0.05,
                background: 0.0,
            },
            v0: Profile::Constant(1.0),
            params: Params::new(2.0, 1.0, 1e-2)?,
            control: StepControl {
                t_end: 1.0,
                u_ceiling: 1e3,
                ..Default::default()
            },
            diag: DiagConfig::default(),
            thresholds: Thresholds::default(),
        },
        "small_v0" => Preset {
            name: name.into(),
            grid: unit(32)?,
            u0: Profile::CosineX {
                mean: 1.0,
                amplitude: 0.5,
            },
            v0: Profile::Constant(0.01),
            params: Params::new(1.0, 1.0, 1e-3)?,
            control: StepControl {
                t_end: 40.0,
                ..Default::default()
            },
            diag: DiagConfig {
                stride: 200,
                ..Default::default()
            },
            thresholds: Thresholds::default(),
        },
        "eps_study" => Preset {
            name: name.into(),
            grid: unit(64)?,
            u0: Profile::CosineXY {
                mean: 1.0,
                amplitude: 0.5,
            },
            v0: Profile::Constant(1.0),
            params: Params::new(1.0, 1.0, 1e-1)?,
            control: StepControl {
                t_end: 1.0,
                snapshot_times: (0..=20).map(|k| k as f64 / 20.0).collect(),
                ..Default::default()
            },
            diag: DiagConfig {
                stride: 100,
                ..Default::default()
            },
            thresholds: Thresholds::default(),
        },
        "longtime" => Preset {
            name: name.into(),
            grid: unit(32)?,
            u0: Profile::RandomPerturbation {
                mean: 1.0,
                relative: 0.1,
                seed: 2024,
            },
            v0: Profile::Constant(1.0),
            params: Params::new(1.0, 1.0, 1e-3)?,
            control: StepControl {
                t_end: 50.0,
                ..Default::default()
            },
            diag: DiagConfig {
                stride: 100,
                keep_fields: true,
                ..Default::default()
            },
            thresholds: Thresholds::default(),
        },
        other => return Err(TaxisError::UnknownPreset(other.to_string())),
    };
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub t_final: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub max_sup_u: f64,
    pub mass_u_final: f64,
    pub sup_v_final: f64,
    pub invariants_pass: bool,
    pub failed_invariants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    pub preset: String,
    pub runs: Vec<RunSummary>,
    pub fitted: Vec<(String, f64)>,
    pub criteria: Vec<Criterion>,
    pub thresholds: Thresholds,
    pub artifacts: Vec<String>,
}

impl StudyReport {
    fn new(study: &str, base: &Preset) -> Self {
        Self {
            study: study.into(),
            preset: base.name.clone(),
            runs: Vec::new(),
            fitted: Vec::new(),
            criteria: Vec::new(),
            thresholds: base.thresholds,
            artifacts: Vec::new(),
        }
    }

    /// Every criterion passed or was not applicable.
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(|c| c.status != Status::Fail)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn fitted_value(&self, name: &str) -> Option<f64> {
        self.fitted.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.criteria.push(Criterion {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        });
    }

    /// Adds the run summary and fails the study if any invariant is violated.
    fn add_run(&mut self, label: String, traj: &Trajectory) -> Result<()> {
        let summary = summarize(label, traj)?;
        let detail = if summary.invariants_pass {
            "all invariants hold".to_string()
        } else {
            format!("violated: {}", summary.failed_invariants.join(", "))
        };
        self.check(&format!("invariants[{}]", summary.label), summary.invariants_pass, detail);
        self.runs.push(summary);
        Ok(())
    }
}

/// Invariant context for studies. The `L^p` growth bound is measured
/// relative to the admissible mass gain: when `int u` may grow by a factor
/// `k` through consumption, `int u^p` legitimately grows like `k^p`.
pub fn study_context(traj: &Trajectory) -> InvariantContext {
    let mut ctx = traj.context();
    if let Some(first) = traj.samples.first() {
        let gain = (first.mass_u + traj.params.ell * first.mass_v) / first.mass_u;
        let p_max = first.lp_u.iter().map(|(p, _)| *p).fold(1.0, f64::max);
        ctx.lp_growth_bound *= gain.max(1.0).powf(p_max);
    }
    ctx
}

/// Summarizes a run and checks its invariants under `study_context`.
pub fn summarize(label: String, traj: &Trajectory) -> Result<RunSummary> {
    let report = check_invariants(&traj.samples, &study_context(traj))?;
    let last = traj.final_record();
    Ok(RunSummary {
        label,
        t_final: traj.final_state.t,
        accepted_steps: traj.audit.accepted,
        rejected_steps: traj.audit.rejected,
        max_sup_u: traj.audit.max_sup_u,
        mass_u_final: last.mass_u,
        sup_v_final: last.sup_v,
        invariants_pass: report.all_passed(),
        failed_invariants: report.failures().map(|c| c.name.clone()).collect(),
    })
}

/// `int_0^T ||u_a - u_b||_L1 dt` by the trapezoidal rule over the shared
/// snapshot times.
pub fn space_time_l1(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.snapshots.len() != b.snapshots.len() || a.snapshots.len() < 2 {
        return Err(TaxisError::Config("trajectories need matching snapshot times".into()));
    }
    let mut norms = Vec::with_capacity(a.snapshots.len());
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if (sa.t - sb.t).abs() > 1e-12 * (1.0 + sa.t.abs()) {
            return Err(TaxisError::Config(format!("snapshot times differ: {} vs {}", sa.t, sb.t)));
        }
        norms.push((sa.t, integrate(&sa.u.zip_map(&sb.u, |x, y| (x - y).abs())?)));
    }
    Ok(norms.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum())
}

/// Labeled trajectories behind a study report.
pub type StudyRuns = Vec<(String, Trajectory)>;

/// Runs `base` for each regularization level and reports the space-time
/// distances between consecutive levels; they must strictly decrease.
pub fn run_eps_study(eps_list: &[f64], base: &Preset) -> Result<StudyReport> {
    eps_study_runs(eps_list, base).map(|(r, _)| r)
}

pub fn eps_study_runs(eps_list: &[f64], base: &Preset) -> Result<(StudyReport, StudyRuns)> {
    if eps_list.len() < 3 {
        return Err(TaxisError::Config(format!(
            "eps study needs at least three levels, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(TaxisError::Config("eps levels must be strictly decreasing in (0, 1)".into()));
    }
    if base.control.snapshot_times.len() < 2 {
        return Err(TaxisError::Config("eps study needs shared snapshot times".into()));
    }
    let trajs: Vec<Trajectory> = eps_list
        .par_iter()
        .map(|&eps| {
            let mut p = base.clone();
            p.params.eps = eps;
            p.run()
        })
        .collect::<Result<_>>()?;

    let mut report = StudyReport::new("eps_study", base);
    for (eps, t) in eps_list.iter().zip(&trajs) {
        report.add_run(format!("eps={eps}"), t)?;
    }
    let d: Vec<f64> = trajs
        .windows(2)
        .map(|w| space_time_l1(&w[0], &w[1]))
        .collect::<Result<_>>()?;
    for (k, dk) in d.iter().enumerate() {
        report.fitted.push((format!("D[{}->{}]", eps_list[k], eps_list[k + 1]), *dk));
    }
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    report.check("distances_strictly_decreasing", decreasing, format!("D = {d:?}"));

    let mut worst = f64::NEG_INFINITY;
    for i in 0..trajs.len() {
        for j in i + 1..trajs.len() {
            for k in j + 1..trajs.len() {
                let lhs = space_time_l1(&trajs[i], &trajs[k])?;
                let rhs = space_time_l1(&trajs[i], &trajs[j])? + space_time_l1(&trajs[j], &trajs[k])?;
                worst = worst.max(lhs - rhs);
            }
        }
    }
    report.check(
        "triangle_inequality",
        worst <= 1e-10,
        format!("max D(a,c) - D(a,b) - D(b,c) = {worst:e}"),
    );
    let labels = report.runs.iter().map(|r| r.label.clone());
    let runs = labels.zip(trajs).collect();
    Ok((report, runs))
}

/// Integrates until `||v||_inf < v_threshold` (or `t_end`) and reports the
/// extinction time, the mass window for `int u`, stabilization of `u` in the
/// dual-distance proxy and the final variance of `u`.
pub fn run_longtime(base: &Preset, v_threshold: f64) -> Result<StudyReport> {
    longtime_runs(base, v_threshold).map(|(r, _)| r)
}

pub fn longtime_runs(base: &Preset, v_threshold: f64) -> Result<(StudyReport, StudyRuns)> {
    let (u0, v0) = base.initial_data()?;
    if !(v_threshold > 0.0 && v_threshold < v0.max()) {
        return Err(TaxisError::Config(format!(
            "v_threshold must lie in (0, {}), got {v_threshold}",
            v0.max()
        )));
    }
    let mut control = base.control.clone();
    control.stop_below_sup_v = Some(v_threshold);
    let mut diag = base.diag.clone();
    diag.keep_fields = true;
    let traj = run(&u0, &v0, &base.params, &control, &diag)?;

    let mut report = StudyReport::new("longtime", base);
    report.thresholds.v_threshold = v_threshold;
    report.add_run(base.name.clone(), &traj)?;
    let last = traj.final_record();
    let t_star = traj.final_state.t;
    let reached = last.sup_v < v_threshold;
    report.fitted.push(("t_star".into(), t_star));
    report.check(
        "threshold_reached",
        reached,
        format!("||v||_inf = {:e} at t = {t_star} (threshold {v_threshold:e})", last.sup_v),
    );

    let m0 = traj.samples[0].mass_u;
    let mv0 = traj.samples[0].mass_v;
    let upper = m0 + base.params.ell * mv0;
    let in_window = last.mass_u >= m0 * (1.0 - 1e-9) && last.mass_u <= upper * (1.0 + 1e-9);
    report.fitted.push(("mass_u_final".into(), last.mass_u));
    report.check(
        "mass_window",
        in_window,
        format!("int u(T) = {:.12e} in [{m0:.12e}, {upper:.12e}]", last.mass_u),
    );

    let half = traj
        .fields
        .iter()
        .min_by(|a, b| (a.t - 0.5 * t_star).abs().total_cmp(&(b.t - 0.5 * t_star).abs()))
        .expect("fields are kept");
    let late = dual_distance(&traj.final_state.u, &half.u, &diag)?;
    let early = dual_distance(&half.u, &traj.initial.u, &diag)?;
    report.fitted.push(("dual_late".into(), late));
    report.fitted.push(("dual_early".into(), early));
    report.check(
        "stabilization",
        // an exactly stationary density counts as stabilized
        late < early || late == 0.0,
        format!("d(u(T), u(T/2)) = {late:e} vs d(u(T/2), u(0)) = {early:e}, T/2 ~ {}", half.t),
    );
    let (_, var) = traj.final_state.u.mean_variance();
    report.fitted.push(("final_variance_u".into(), var));

    let sup_v_strict = traj.samples.windows(2).all(|w| w[1].sup_v < w[0].sup_v);
    report.check("sup_v_strictly_decreasing", sup_v_strict, "between all samples".into());
    let tol = 1e-10 * m0;
    let mass_ok = if base.params.ell > 0.0 {
        traj.samples.windows(2).all(|w| w[1].mass_u >= w[0].mass_u - tol)
    } else {
        traj.samples.iter().all(|s| (s.mass_u - m0).abs() <= tol)
    };
    report.check(
        "mass_u_monotone",
        mass_ok,
        if base.params.ell > 0.0 { "nondecreasing" } else { "constant" }.into(),
    );
    Ok((report, vec![(base.name.clone(), traj)]))
}

/// Runs the small-nutrient preset for each `v_bar` (decreasing) until
/// `||v||_inf < scaling_extinction * v_bar` or `t_end`, and relates the
/// displacement `d(u(T), u(0))` to `int v0`.
pub fn run_v0_scaling(v0_bars: &[f64], base: &Preset) -> Result<StudyReport> {
    v0_scaling_runs(v0_bars, base).map(|(r, _)| r)
}

pub fn v0_scaling_runs(v0_bars: &[f64], base: &Preset) -> Result<(StudyReport, StudyRuns)> {
    if v0_bars.len() < 3 {
        return Err(TaxisError::Config(format!(
            "scaling study needs at least three levels, got {}",
            v0_bars.len()
        )));
    }
    if let Some(v) = v0_bars.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(TaxisError::InvalidParams(format!("v0 must be positive, got {v}")));
    }
    if v0_bars.windows(2).any(|w| w[1] >= w[0]) {
        return Err(TaxisError::Config("v0 levels must be strictly decreasing".into()));
    }
    let runs: Vec<(Trajectory, f64)> = v0_bars
        .par_iter()
        .map(|&v_bar| {
            let p = base.clone().with_v_bar(v_bar)?;
            let (u0, v0) = p.initial_data()?;
            let mut control = p.control.clone();
            control.stop_below_sup_v = Some(p.thresholds.scaling_extinction * v_bar);
            let traj = run(&u0, &v0, &p.params, &control, &p.diag)?;
            let mass_v0 = integrate(&v0);
            Ok((traj, mass_v0))
        })
        .collect::<Result<_>>()?;

    let mut report = StudyReport::new("v0_scaling", base);
    let mut deltas = Vec::new();
    for (v_bar, (traj, _)) in v0_bars.iter().zip(&runs) {
        report.add_run(format!("v_bar={v_bar}"), traj)?;
        let extinct = traj.final_record().sup_v < base.thresholds.scaling_extinction * v_bar;
        report.check(
            &format!("extinct[v_bar={v_bar}]"),
            extinct,
            format!("||v(T)||_inf = {:e} at T = {}", traj.final_record().sup_v, traj.final_state.t),
        );
        let delta = dual_distance(&traj.final_state.u, &traj.initial.u, &base.diag)?;
        report.fitted.push((format!("delta[v_bar={v_bar}]"), delta));
        deltas.push(delta);
    }
    let monotone = deltas.windows(2).all(|w| w[1] <= w[0]);
    report.check("delta_monotone", monotone, format!("delta = {deltas:?}"));

    let log_mass: Vec<f64> = runs.iter().map(|(_, m)| m.ln()).collect();
    let lambda = if deltas.iter().all(|d| *d > 0.0) {
        fit_slope(&log_mass, &deltas.iter().map(|d| d.ln()).collect::<Vec<_>>())
    } else {
        f64::NAN
    };
    report.fitted.push(("lambda_hat".into(), lambda));
    report.check("lambda_positive", lambda > 0.0, format!("fitted exponent {lambda}"));

    let (smallest, _) = runs.last().unwrap();
    let (_, var0) = smallest.initial.u.mean_variance();
    let (_, var_t) = smallest.final_state.u.mean_variance();
    let retention = base.thresholds.variance_retention;
    let status = if var0 <= 1e-14 * smallest.initial.u.max().powi(2) {
        Status::NotApplicable
    } else if var_t >= retention * var0 {
        Status::Pass
    } else {
        Status::Fail
    };
    report.criteria.push(Criterion {
        name: "heterogeneity_retained".into(),
        status,
        detail: format!("var u(T) = {var_t:e}, var u0 = {var0:e}, retention threshold {retention}"),
    });
    let labels = report.runs.iter().map(|r| r.label.clone());
    let runs = labels.zip(runs.into_iter().map(|(t, _)| t)).collect();
    Ok((report, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            let (u0, v0) = p.initial_data().unwrap();
            assert!(v0.min() > 0.0 && u0.min() >= 0.0, "{name}");
        }
        assert!(matches!(preset("spiral"), Err(TaxisError::UnknownPreset(_))));

        let (u0, v0) = preset("homogeneous").unwrap().with_resolution(8).unwrap().initial_data().unwrap();
        assert!(u0.values().iter().all(|&x| x == 1.0) && v0.values().iter().all(|&x| x == 1.0));

        let (_, v0) = preset("small_v0").unwrap().with_v_bar(0.01).unwrap().initial_data().unwrap();
        assert_relative_eq!(integrate(&v0), 0.01, max_relative = 1e-13);
        assert!(preset("small_v0").unwrap().with_v_bar(0.0).is_err());

        let (u0, _) = preset("branching").unwrap().initial_data().unwrap();
        assert!((integrate(&u0) - 0.1).abs() < 1e-6);
        let (u0, _) = preset("branching").unwrap().with_resolution(64).unwrap().initial_data().unwrap();
        assert!((integrate(&u0) - 0.1).abs() < 1e-6);
    }

    #[test]
    fn random_perturbation_stays_within_ten_percent() {
        let (u0, _) = preset("longtime").unwrap().initial_data().unwrap();
        assert!(u0.min() >= 0.9 - 1e-12 && u0.max() <= 1.1 + 1e-12);
        assert!(u0.max() - u0.min() > 0.05);
    }

    #[test]
    fn eps_study_preconditions() {
        let base = preset("eps_study").unwrap();
        assert!(matches!(run_eps_study(&[0.1, 0.05], &base), Err(TaxisError::Config(_))));
        assert!(matches!(run_eps_study(&[0.1, 0.1, 0.05], &base), Err(TaxisError::Config(_))));
    }

    #[test]
    fn identical_runs_have_zero_distance() {
        let mut base = preset("eps_study").unwrap().with_resolution(12).unwrap();
        base.control.t_end = 0.05;
        base.control.snapshot_times = vec![0.0, 0.025, 0.05];
        let a = base.run().unwrap();
        let b = base.run().unwrap();
        assert_eq!(space_time_l1(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn scaling_preconditions() {
        let base = preset("small_v0").unwrap();
        assert!(run_v0_scaling(&[0.02, 0.01], &base).is_err());
        assert!(matches!(
            run_v0_scaling(&[0.02, 0.01, 0.0], &base),
            Err(TaxisError::InvalidParams(_))
        ));
    }

    #[test]
    fn constant_density_makes_retention_not_applicable() {
        let mut base = preset("small_v0").unwrap().with_resolution(8).unwrap();
        base.u0 = Profile::Constant(1.0);
        base.control.t_end = 0.5;
        let r = run_v0_scaling(&[0.04, 0.02, 0.01], &base).unwrap();
        assert_eq!(r.criterion("heterogeneity_retained").unwrap().status, Status::NotApplicable);
    }

    #[test]
    fn longtime_homogeneous_extinction_time() {
        let mut base = preset("homogeneous").unwrap().with_resolution(8).unwrap();
        base.control.t_end = 50.0;
        base.diag.stride = 200;
        let r = run_longtime(&base, 1e-2).unwrap();
        let t_star = r.fitted_value("t_star").unwrap();
        assert!((t_star - 100f64.ln()).abs() <= 0.05 * 100f64.ln(), "{t_star}");
        assert!(r.pass(), "{:#?}", r.criteria);
    }

    #[test]
    fn longtime_growth_fills_the_mass_window() {
        let mut base = preset("homogeneous").unwrap().with_resolution(8).unwrap();
        base.params.ell = 1.0;
        base.control.t_end = 50.0;
        base.diag.stride = 200;
        let r = run_longtime(&base, 1e-3).unwrap();
        let m = r.fitted_value("mass_u_final").unwrap();
        assert!((m - 2.0).abs() <= 0.01 * 2.0, "{m}");
        assert!(r.criterion("mass_window").unwrap().status == Status::Pass);
    }

    #[test]
    fn longtime_threshold_must_be_below_initial_sup() {
        let base = preset("homogeneous").unwrap().with_resolution(8).unwrap();
        assert!(run_longtime(&base, 2.0).is_err());
        assert!(run_longtime(&base, 0.0).is_err());
    }
}
