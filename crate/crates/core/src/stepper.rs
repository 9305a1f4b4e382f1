//! Explicit time integration with adaptive step control.
//!
//! Forward Euler keeps every discrete balance law exact: the face fluxes
//! telescope, so `int u` changes only by `dt * ell * int uv` and `int v` only
//! by `-dt * int uv` per step. Steps that would make `u` or `v` nonpositive are
//! rejected and retried with half the step size.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{functionals, rates, Cumulative, DiagConfig, DiagRecord, InvariantContext};
use crate::error::{Result, TaxisError};
use crate::grid::{integrate, GridSpec, ScalarField};
use crate::model::{regularize_initial, rhs_u, rhs_v, Params, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub cfl_safety: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub max_rejections_per_step: usize,
    /// Constant step size, bypassing adaptation. Used for convergence studies.
    pub fixed_dt: Option<f64>,
    /// `||u||_inf` above this value counts as blow-up.
    pub u_ceiling: f64,
    /// Times at which the state is captured exactly; steps are shortened to
    /// land on them.
    pub snapshot_times: Vec<f64>,
    /// Stop as soon as `||v||_inf` drops below this level.
    pub stop_below_sup_v: Option<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl_safety: 0.4,
            dt_min: 1e-12,
            dt_max: 1e-2,
            t_end: 1.0,
            max_rejections_per_step: 40,
            fixed_dt: None,
            u_ceiling: 1e6,
            snapshot_times: Vec::new(),
            stop_below_sup_v: None,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TaxisError::InvalidParams(m));
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.dt_min > 0.0 && self.dt_max > 0.0 && self.dt_min <= self.dt_max) {
            return bad(format!(
                "need 0 < dt_min <= dt_max, got {} and {}",
                self.dt_min, self.dt_max
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("fixed_dt must be positive, got {dt}"));
            }
        }
        if !(self.u_ceiling > 0.0) {
            return bad(format!("u_ceiling must be positive, got {}", self.u_ceiling));
        }
        Ok(())
    }
}

/// The individual step-size limits before safety factor and clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableDtTerms {
    pub u_diffusion: f64,
    pub v_diffusion: f64,
    pub v_reaction: f64,
    pub taxis: f64,
}

impl StableDtTerms {
    pub fn min(&self) -> f64 {
        self.u_diffusion
            .min(self.v_diffusion)
            .min(self.v_reaction)
            .min(self.taxis)
    }
}

pub fn stable_dt_terms(s: &State, p: &Params) -> StableDtTerms {
    let g = s.u.grid();
    let h = g.h_min();
    let (u, v) = (s.u.values(), s.v.values());
    let max_uv = u.iter().zip(v).map(|(a, b)| a * b).fold(0.0, f64::max);
    let max_u = s.u.max();

    // taxis speed chi * (u^2 v)_f |grad v|_f / max(eps, u_f)
    let (hx, hy) = (g.hx(), g.hy());
    let mut speed = 0.0_f64;
    let mut face = |a: usize, b: usize, d: f64| {
        let uf = 0.5 * (u[a] + u[b]);
        let vf = 0.5 * (v[a] + v[b]);
        let den = uf.max(p.eps);
        if den > 0.0 {
            speed = speed.max(uf * uf * vf * d.abs() / den);
        }
    };
    for j in 0..g.ny {
        for i in 1..g.nx {
            let (a, b) = (g.idx(i - 1, j), g.idx(i, j));
            face(a, b, (v[b] - v[a]) / hx);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let (a, b) = (g.idx(i, j - 1), g.idx(i, j));
            face(a, b, (v[b] - v[a]) / hy);
        }
    }
    let limit = |den: f64, num: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    StableDtTerms {
        u_diffusion: limit(4.0 * max_uv, h * h),
        v_diffusion: h * h / 4.0,
        v_reaction: limit(max_u, 1.0),
        taxis: limit(p.chi * speed, h),
    }
}

/// Largest admissible explicit step, `cfl_safety * min(limits)` clamped to
/// `[dt_min, dt_max]`.
pub fn stable_dt(s: &State, p: &Params, c: &StepControl) -> f64 {
    let terms = stable_dt_terms(s, p);
    let v_frozen = s.v.max() <= 0.0;
    if v_frozen {
        return c.dt_max;
    }
    (c.cfl_safety * terms.min()).clamp(c.dt_min, c.dt_max)
}

/// One forward Euler step. Positivity is the caller's concern.
pub fn step_euler(s: &State, p: &Params, dt: f64) -> Result<State> {
    let du = rhs_u(&s.u, &s.v, p)?;
    let dv = rhs_v(&s.u, &s.v)?;
    let advance = |f: &ScalarField, df: &ScalarField| {
        let vals = f.values().iter().zip(df.values()).map(|(a, d)| a + dt * d).collect();
        ScalarField::from_raw(*f.grid(), vals)
    };
    Ok(State {
        u: advance(&s.u, &du),
        v: advance(&s.v, &dv),
        t: s.t + dt,
    })
}

/// Per-step bookkeeping over a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepAudit {
    pub accepted: usize,
    pub rejected: usize,
    pub dt_sum: f64,
    pub dt_smallest: f64,
    pub dt_largest: f64,
    /// Worst `|int u' - int u - dt ell int uv| / int u`.
    pub max_mass_u_residual: f64,
    /// Worst `|int v' - int v + dt int uv| / int v`.
    pub max_mass_v_residual: f64,
    /// Worst `(||v'||_inf - ||v||_inf) / ||v||_inf`.
    pub max_sup_v_increase: f64,
    /// Largest `||u||_inf` over all accepted states.
    pub max_sup_u: f64,
}

impl StepAudit {
    pub fn dt_mean(&self) -> f64 {
        if self.accepted == 0 {
            0.0
        } else {
            self.dt_sum / self.accepted as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub params: Params,
    pub samples: Vec<DiagRecord>,
    /// `(u, v)` for every sample when `DiagConfig::keep_fields` is set.
    pub fields: Vec<State>,
    pub snapshot_times: Vec<f64>,
    pub snapshots: Vec<State>,
    pub initial: State,
    pub final_state: State,
    pub audit: StepAudit,
    pub u_ceiling: f64,
    /// Set when the run stopped on `stop_below_sup_v`.
    pub stopped_early: bool,
}

impl Trajectory {
    /// Invariant-check context with the default tolerances
    /// (`tol_exact = 1e-10`, `tol_pde = 50 (dt_mean + h^2)`, L^p growth 10).
    pub fn context(&self) -> InvariantContext {
        InvariantContext {
            area: self.grid.area(),
            h: self.grid.h_min(),
            dt_mean: self.audit.dt_mean(),
            chi: self.params.chi,
            ell: self.params.ell,
            max_sup_u: self.audit.max_sup_u,
            u_ceiling: self.u_ceiling,
            lp_growth_bound: 10.0,
            tol_exact: 1e-10,
            tol_pde_factor: 50.0,
            audit: Some(self.audit.clone()),
        }
    }

    pub fn final_record(&self) -> &DiagRecord {
        self.samples.last().expect("trajectory has samples")
    }
}

fn sample(s: &State, p: &Params, d: &DiagConfig, cum: &Cumulative) -> Result<DiagRecord> {
    let mut r = functionals(s, p, d)?;
    r.cum = *cum;
    Ok(r)
}

/// Integrates from `(u0 + eps, v0)` up to `c.t_end`.
///
/// With `eps == 0` the initial density is used as given and must already be
/// strictly positive.
pub fn run(u0: &ScalarField, v0: &ScalarField, p: &Params, c: &StepControl, d: &DiagConfig) -> Result<Trajectory> {
    p.validate()?;
    c.validate()?;
    d.validate()?;
    u0.check_same_grid(v0)?;
    let u_init = if p.eps > 0.0 {
        regularize_initial(u0, p.eps)?
    } else {
        let min = u0.min();
        if !(min > 0.0) {
            return Err(TaxisError::NegativeInitialData(min));
        }
        u0.clone()
    };
    let min_v0 = v0.min();
    if !(min_v0 > 0.0) {
        return Err(TaxisError::PositivityViolated(min_v0));
    }
    let grid = *u0.grid();
    let mut state = State::new(u_init, v0.clone(), 0.0)?;
    let initial = state.clone();

    let mut snapshot_times: Vec<f64> = c
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| (0.0..=c.t_end).contains(&t))
        .collect();
    snapshot_times.sort_by(f64::total_cmp);
    snapshot_times.dedup();
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut next_snap = 0;
    while next_snap < snapshot_times.len() && snapshot_times[next_snap] <= 0.0 {
        snapshots.push(state.clone());
        next_snap += 1;
    }

    let mut cum = Cumulative::default();
    let mut audit = StepAudit {
        dt_smallest: f64::INFINITY,
        max_sup_u: state.u.max(),
        ..Default::default()
    };
    let mut samples = vec![sample(&state, p, d, &cum)?];
    let mut fields = Vec::new();
    if d.keep_fields {
        fields.push(state.clone());
    }
    let t_tol = 1e-12 * c.t_end;
    let mut stopped_early = false;

    while state.t < c.t_end - t_tol {
        if let Some(level) = c.stop_below_sup_v {
            if state.v.max() < level {
                stopped_early = true;
                break;
            }
        }
        let mut dt = c.fixed_dt.unwrap_or_else(|| stable_dt(&state, p, c));
        let mut target = c.t_end;
        if next_snap < snapshot_times.len() {
            target = target.min(snapshot_times[next_snap]);
        }
        let mut land = false;
        if state.t + dt >= target - t_tol {
            dt = target - state.t;
            land = true;
        }

        let r = rates(&state, d.positivity_floor)?;
        let mut rejections = 0;
        let next = loop {
            let trial = step_euler(&state, p, dt)?;
            if !(trial.u.all_finite() && trial.v.all_finite()) {
                return Err(TaxisError::NonFiniteState(state.t));
            }
            if trial.u.min() > 0.0 && trial.v.min() > 0.0 {
                break trial;
            }
            rejections += 1;
            audit.rejected += 1;
            dt *= 0.5;
            land = false;
            if rejections > c.max_rejections_per_step || (c.fixed_dt.is_none() && dt < c.dt_min) {
                return Err(TaxisError::StepCollapse { t: state.t, dt });
            }
        };

        let mass_u = integrate(&state.u);
        let mass_v = r.mass_v;
        let mass_u_next = integrate(&next.u);
        let mass_v_next = integrate(&next.v);
        let res_u = (mass_u_next - mass_u - dt * p.ell * r.uv).abs() / mass_u;
        let res_v = (mass_v_next - mass_v + dt * r.uv).abs() / mass_v;
        let sup_v = state.v.max();
        audit.max_mass_u_residual = audit.max_mass_u_residual.max(res_u);
        audit.max_mass_v_residual = audit.max_mass_v_residual.max(res_v);
        audit.max_sup_v_increase = audit.max_sup_v_increase.max((next.v.max() - sup_v) / sup_v);
        audit.max_sup_u = audit.max_sup_u.max(next.u.max());
        audit.accepted += 1;
        audit.dt_sum += dt;
        audit.dt_smallest = audit.dt_smallest.min(dt);
        audit.dt_largest = audit.dt_largest.max(dt);
        cum.accumulate(&r, dt);

        state = next;
        if land {
            state.t = target;
        }
        while next_snap < snapshot_times.len() && snapshot_times[next_snap] <= state.t + t_tol {
            snapshots.push(state.clone());
            next_snap += 1;
        }
        let done = state.t >= c.t_end - t_tol;
        if audit.accepted % d.stride == 0 || done {
            samples.push(sample(&state, p, d, &cum)?);
            if d.keep_fields {
                fields.push(state.clone());
            }
        }
    }
    if samples.last().map(|s| s.t) != Some(state.t) {
        samples.push(sample(&state, p, d, &cum)?);
        if d.keep_fields {
            fields.push(state.clone());
        }
    }

    Ok(Trajectory {
        grid,
        params: *p,
        samples,
        fields,
        snapshot_times,
        snapshots,
        initial,
        final_state: state,
        audit,
        u_ceiling: c.u_ceiling,
        stopped_early,
    })
}
