//! Functionals monitored along a trajectory, the a priori bounds they obey,
//! and a dual-norm proxy for distances between densities.
//!
//! Quadratic gradient terms (`diss_u`, `diss_v`, the Dirichlet part of the
//! Lyapunov functional, `int v |grad v|^2`) use the split face rule
//! [`quadratic_form`]; higher powers of the gradient use the full-gradient
//! face rule [`face_rule`]. In both cases `u` and `v` enter as arithmetic
//! means of the two cells sharing the face.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TaxisError};
use crate::grid::{face_nodes, face_rule, grad_faces, integrate, lp_integral, quadratic_form, GridSpec, ScalarField};
use crate::model::{Params, State};
use crate::stepper::StepAudit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagConfig {
    /// Weight of the entropy part of the energy functional.
    pub b: f64,
    /// Exponents `p` for which `int u^p` is tracked.
    pub p_list: Vec<f64>,
    /// Sample every `stride` accepted steps.
    pub stride: usize,
    pub positivity_floor: f64,
    /// Number of test functions in the dual-distance dictionary.
    pub dictionary_size: usize,
    /// Keep a copy of `(u, v)` with every sample.
    pub keep_fields: bool,
}

impl Default for DiagConfig {
    fn default() -> Self {
        Self {
            b: 1.0,
            p_list: vec![2.0, 3.0, 5.0],
            stride: 20,
            positivity_floor: 1e-14,
            dictionary_size: 25,
            keep_fields: false,
        }
    }
}

impl DiagConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(TaxisError::InvalidParams(format!("b must be positive, got {}", self.b)));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
            return Err(TaxisError::InvalidParams(format!("L^p exponents must be >= 1, got {p}")));
        }
        if self.stride == 0 {
            return Err(TaxisError::InvalidParams("stride must be positive".into()));
        }
        if self.dictionary_size == 0 {
            return Err(TaxisError::InvalidParams("dictionary_size must be positive".into()));
        }
        if !(self.positivity_floor >= 0.0) {
            return Err(TaxisError::InvalidParams("positivity_floor must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Instantaneous integrands of the running time integrals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// `int u v`
    pub uv: f64,
    /// `int (v/u) |grad u|^2`
    pub diss_u: f64,
    /// `int (u/v) |grad v|^2`
    pub diss_v: f64,
    /// `int |grad v|^4 / v^3`
    pub q4: f64,
    /// `int |grad v|^6 / v^5`
    pub q6: f64,
    /// `int v`
    pub mass_v: f64,
    /// `int v |grad v|^2`
    pub v_gradv2: f64,
}

/// Running time integrals of [`Rates`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Cumulative {
    pub uv: f64,
    pub diss_u: f64,
    pub diss_v: f64,
    pub q4: f64,
    pub q6: f64,
    pub mass_v: f64,
    pub v_gradv2: f64,
}

impl Cumulative {
    pub fn accumulate(&mut self, r: &Rates, dt: f64) {
        self.uv += dt * r.uv;
        self.diss_u += dt * r.diss_u;
        self.diss_v += dt * r.diss_v;
        self.q4 += dt * r.q4;
        self.q6 += dt * r.q6;
        self.mass_v += dt * r.mass_v;
        self.v_gradv2 += dt * r.v_gradv2;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub t: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub sup_v: f64,
    pub min_v: f64,
    pub sup_u: f64,
    pub min_u: f64,
    pub sup_gradv: f64,
    pub ent_u: f64,
    pub log_u: f64,
    pub lyap: f64,
    pub diss_u: f64,
    pub diss_v: f64,
    pub q4: f64,
    pub q6: f64,
    pub energy: f64,
    pub r_uv: f64,
    pub v_gradv2: f64,
    /// `(p, int u^p)` for each configured exponent.
    pub lp_u: Vec<(f64, f64)>,
    pub cum: Cumulative,
}

impl DiagRecord {
    pub fn is_finite(&self) -> bool {
        self.scalars().iter().all(|(_, v)| v.is_finite())
            && self.lp_u.iter().all(|(_, v)| v.is_finite())
    }

    /// Named scalar columns in their fixed output order, excluding `lp_u`.
    pub fn scalars(&self) -> [(&'static str, f64); 25] {
        [
            ("t", self.t),
            ("mass_u", self.mass_u),
            ("mass_v", self.mass_v),
            ("sup_v", self.sup_v),
            ("min_v", self.min_v),
            ("sup_u", self.sup_u),
            ("min_u", self.min_u),
            ("sup_gradv", self.sup_gradv),
            ("ent_u", self.ent_u),
            ("log_u", self.log_u),
            ("lyap", self.lyap),
            ("diss_u", self.diss_u),
            ("diss_v", self.diss_v),
            ("q4", self.q4),
            ("q6", self.q6),
            ("energy", self.energy),
            ("r_uv", self.r_uv),
            ("v_gradv2", self.v_gradv2),
            ("cum_uv", self.cum.uv),
            ("cum_diss_u", self.cum.diss_u),
            ("cum_diss_v", self.cum.diss_v),
            ("cum_q4", self.cum.q4),
            ("cum_q6", self.cum.q6),
            ("cum_mass_v", self.cum.mass_v),
            ("cum_v_gradv2", self.cum.v_gradv2),
        ]
    }

    pub fn lp(&self, p: f64) -> Option<f64> {
        self.lp_u.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }
}

fn check_floor(s: &State, floor: f64) -> Result<()> {
    let (min_u, min_v) = (s.u.min(), s.v.min());
    if !(min_u > floor && min_v > floor) {
        return Err(TaxisError::PositivityFloorViolated { floor, min_u, min_v });
    }
    Ok(())
}

/// Integrands of the cumulative integrals at the given state.
pub fn rates(s: &State, floor: f64) -> Result<Rates> {
    check_floor(s, floor)?;
    Ok(rates_unchecked(s, &face_nodes(&s.v)))
}

fn rates_unchecked(s: &State, vnodes: &[crate::grid::FaceNode]) -> Rates {
    let g = s.u.grid();
    let (u, v) = (s.u.values(), s.v.values());
    let gu = grad_faces(&s.u);
    let gv = grad_faces(&s.v);
    let mean = |f: &[f64], a: usize, b: usize| 0.5 * (f[a] + f[b]);
    let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() * g.cell_volume();
    Rates {
        uv,
        diss_u: quadratic_form(&gu, |a, b| mean(v, a, b) / mean(u, a, b)),
        diss_v: quadratic_form(&gv, |a, b| mean(u, a, b) / mean(v, a, b)),
        q4: face_rule(g, vnodes, |a, b, d2| d2 * d2 / mean(v, a, b).powi(3)),
        q6: face_rule(g, vnodes, |a, b, d2| d2 * d2 * d2 / mean(v, a, b).powi(5)),
        mass_v: integrate(&s.v),
        v_gradv2: quadratic_form(&gv, |a, b| mean(v, a, b)),
    }
}

/// Evaluates every monitored functional at `s`. The cumulative fields are
/// left at zero; the stepper fills them in.
pub fn functionals(s: &State, p: &Params, d: &DiagConfig) -> Result<DiagRecord> {
    check_floor(s, d.positivity_floor)?;
    let g = s.u.grid();
    let vol = g.cell_volume();
    let vnodes = face_nodes(&s.v);
    let r = rates_unchecked(s, &vnodes);
    let u = s.u.values();
    let ent_u = vol * u.iter().map(|&a| a * a.ln()).sum::<f64>();
    let log_u = vol * u.iter().map(|&a| a.ln()).sum::<f64>();
    let dirichlet_v = quadratic_form(&grad_faces(&s.v), |_, _| 1.0);
    let sup_gradv = vnodes.iter().fold(0.0_f64, |m, n| m.max(n.grad_sq)).sqrt();
    let lp_u = d
        .p_list
        .iter()
        .map(|&q| lp_integral(&s.u, q).map(|val| (q, val)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagRecord {
        t: s.t,
        mass_u: integrate(&s.u),
        mass_v: r.mass_v,
        sup_v: s.v.max(),
        min_v: s.v.min(),
        sup_u: s.u.max(),
        min_u: s.u.min(),
        sup_gradv,
        ent_u,
        log_u,
        lyap: -log_u + 0.5 * p.chi * dirichlet_v,
        diss_u: r.diss_u,
        diss_v: r.diss_v,
        q4: r.q4,
        q6: r.q6,
        energy: 4.0 * d.b * ent_u + r.q4,
        r_uv: r.uv,
        v_gradv2: r.v_gradv2,
        lp_u,
        cum: Cumulative::default(),
    })
}

/// Everything [`check_invariants`] needs besides the sampled series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantContext {
    pub area: f64,
    /// Smallest cell size.
    pub h: f64,
    pub dt_mean: f64,
    pub chi: f64,
    pub ell: f64,
    /// Largest `||u||_inf` seen over the run (every step, not only samples).
    pub max_sup_u: f64,
    pub u_ceiling: f64,
    /// Admissible growth factor of `int u^p` over its initial value.
    pub lp_growth_bound: f64,
    pub tol_exact: f64,
    /// Multiplier `c` in `tol_pde = c (dt_mean + h^2) * scale`.
    pub tol_pde_factor: f64,
    pub audit: Option<StepAudit>,
}

impl InvariantContext {
    pub fn tol_pde(&self) -> f64 {
        self.tol_pde_factor * (self.dt_mean + self.h * self.h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Worst observed value of the checked quantity.
    pub observed: f64,
    /// The bound it is compared against.
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub checks: Vec<CheckResult>,
}

impl ViolationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn push(&mut self, name: &str, observed: f64, limit: f64, pass: bool, detail: String) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            pass: pass && observed.is_finite(),
            observed,
            limit,
            detail,
        });
    }

    /// Records `observed <= limit`.
    fn push_le(&mut self, name: &str, observed: f64, limit: f64, detail: String) {
        self.push(name, observed, limit, observed <= limit, detail);
    }
}

/// Largest increase `x[k+1] - x[k]` over consecutive samples.
fn max_increase(samples: &[DiagRecord], f: impl Fn(&DiagRecord) -> f64) -> (f64, f64) {
    samples
        .windows(2)
        .map(|w| (f(&w[1]) - f(&w[0]), w[1].t))
        .fold((f64::NEG_INFINITY, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

/// Checks the balance laws and a priori bounds over a sampled series.
pub fn check_invariants(samples: &[DiagRecord], ctx: &InvariantContext) -> Result<ViolationReport> {
    if samples.len() < 2 {
        return Err(TaxisError::Config("need at least two samples".into()));
    }
    let mut rep = ViolationReport::default();
    let first = &samples[0];
    let last = samples.last().unwrap();
    let tol = ctx.tol_exact;
    let tol_pde = ctx.tol_pde();
    let mass_u0 = first.mass_u;
    let mass_v0 = first.mass_v;

    // (a) int u never drops below its initial value and never decreases
    let min_mass = samples.iter().map(|s| s.mass_u).fold(f64::INFINITY, f64::min);
    rep.push(
        "mass_u_lower",
        min_mass,
        mass_u0,
        min_mass >= mass_u0 * (1.0 - tol),
        format!("min_t int u = {min_mass:.17e}, int u0 = {mass_u0:.17e}"),
    );
    let (inc, t_at) = max_increase(samples, |s| -s.mass_u);
    rep.push_le(
        "mass_u_monotone",
        inc,
        tol * mass_u0,
        format!("largest decrease of int u is {inc:e} at t = {t_at}"),
    );

    // (b) int u <= int u0 + ell int v0
    let max_mass = samples.iter().map(|s| s.mass_u).fold(f64::NEG_INFINITY, f64::max);
    let upper = (mass_u0 + ctx.ell * mass_v0) * (1.0 + tol);
    rep.push_le("mass_u_upper", max_mass, upper, format!("max_t int u = {max_mass:.17e}"));

    // (c) int v and ||v||_inf nonincreasing
    let (inc, t_at) = max_increase(samples, |s| s.mass_v);
    rep.push_le(
        "mass_v_monotone",
        inc,
        tol * mass_v0,
        format!("largest increase of int v is {inc:e} at t = {t_at}"),
    );
    let (inc, t_at) = max_increase(samples, |s| s.sup_v);
    rep.push_le(
        "sup_v_monotone",
        inc,
        tol * first.sup_v,
        format!("largest increase of ||v||_inf is {inc:e} at t = {t_at}"),
    );

    // (d) int_0^t int u v <= int v0
    rep.push_le(
        "cum_uv",
        last.cum.uv,
        mass_v0 * (1.0 + tol),
        format!("int_0^T int uv = {:.17e}", last.cum.uv),
    );

    // (e) int_0^t int v |grad v|^2 <= |Omega| ||v0||^3 / 3
    let bound = ctx.area * first.sup_v.powi(3) / 3.0;
    rep.push_le(
        "v_cubed_dissipation",
        last.cum.v_gradv2,
        bound * (1.0 + tol_pde),
        format!("int_0^T int v|grad v|^2 = {:e}, bound {bound:e}", last.cum.v_gradv2),
    );

    // (f) Lyapunov functional and its dissipation
    let dissipated = last.cum.diss_u + ctx.ell * last.cum.mass_v;
    let lyap_scale = 1.0_f64.max(first.lyap.abs()).max(dissipated);
    let worst_rate = samples
        .windows(2)
        .map(|w| (w[1].lyap - w[0].lyap) / (w[1].t - w[0].t))
        .fold(f64::NEG_INFINITY, f64::max);
    rep.push_le(
        "lyap_monotone",
        worst_rate,
        tol_pde * lyap_scale,
        format!("largest growth rate of the Lyapunov functional is {worst_rate:e}"),
    );
    let drop = first.lyap - last.lyap;
    rep.push(
        "lyap_dissipation",
        drop,
        dissipated,
        drop >= dissipated - tol_pde * lyap_scale,
        format!("lyap(0) - lyap(T) = {drop:e}, int diss_u + ell int v = {dissipated:e}"),
    );

    // (g) boundedness proxy for int |grad v|^4 / v^3
    let early = ((samples.len() as f64 * 0.1).ceil() as usize).max(1);
    let early_max = samples[..early].iter().map(|s| s.q4).fold(first.q4, f64::max);
    let q4_sup = samples.iter().map(|s| s.q4).fold(0.0, f64::max);
    let ceiling = 10.0 * early_max;
    rep.push(
        "q4_bounded",
        q4_sup,
        ceiling,
        q4_sup <= ceiling || q4_sup == 0.0,
        format!("sup q4 = {q4_sup:e}, early max = {early_max:e}"),
    );

    // (h) comparison lower bound for v
    let u_bar = ctx.max_sup_u.max(samples.iter().map(|s| s.sup_u).fold(0.0, f64::max));
    let slack = 1.0 - 10.0 * (ctx.dt_mean + ctx.h * ctx.h);
    let (worst, t_at) = samples
        .iter()
        .map(|s| (s.min_v / (first.min_v * (-u_bar * s.t).exp() * slack), s.t))
        .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
    rep.push(
        "min_v_lower",
        worst,
        1.0,
        worst >= 1.0,
        format!("min_t min v / comparison bound = {worst:e} at t = {t_at}"),
    );

    // L^p growth and the sup-norm ceiling
    for &(p, initial) in &first.lp_u {
        let sup = samples.iter().filter_map(|s| s.lp(p)).fold(0.0, f64::max);
        let ratio = sup / initial;
        rep.push_le(
            &format!("lp_growth_p{p}"),
            ratio,
            ctx.lp_growth_bound,
            format!("sup_t int u^{p} / int u0^{p} = {ratio:e}"),
        );
    }
    rep.push_le(
        "u_ceiling",
        u_bar,
        ctx.u_ceiling,
        format!("max ||u||_inf = {u_bar:e}"),
    );

    if let Some(a) = &ctx.audit {
        rep.push_le(
            "step_mass_u_identity",
            a.max_mass_u_residual,
            1e-12,
            format!("worst relative residual over {} steps", a.accepted),
        );
        rep.push_le(
            "step_mass_v_identity",
            a.max_mass_v_residual,
            1e-12,
            format!("worst relative residual over {} steps", a.accepted),
        );
        rep.push_le(
            "step_sup_v_monotone",
            a.max_sup_v_increase,
            1e-12,
            format!("worst relative increase of ||v||_inf over {} steps", a.accepted),
        );
    }
    Ok(rep)
}

/// Low-frequency cosine test functions `cos(m pi x / lx) cos(n pi y / ly)`,
/// scaled by `1 / (1 + pi m / lx + pi n / ly)` so that
/// `||phi||_inf + ||grad phi||_inf <= 1`, ordered by `m + n` then `m`.
pub fn dictionary_modes(size: usize) -> Vec<(usize, usize)> {
    let mut modes = Vec::with_capacity(size);
    let mut total = 0;
    while modes.len() < size {
        for m in 0..=total {
            if modes.len() == size {
                break;
            }
            modes.push((m, total - m));
        }
        total += 1;
    }
    modes
}

/// Dual-norm proxy: `max_phi |int (u1 - u2) phi|` over the cosine dictionary.
pub fn dual_distance(u1: &ScalarField, u2: &ScalarField, d: &DiagConfig) -> Result<f64> {
    let diff = u1.zip_map(u2, |a, b| a - b)?;
    Ok(dual_norm(&diff, d.dictionary_size))
}

/// `max_phi |int f phi|` over the first `size` dictionary entries.
pub fn dual_norm(f: &ScalarField, size: usize) -> f64 {
    let g: GridSpec = *f.grid();
    let pi = std::f64::consts::PI;
    let modes = dictionary_modes(size);
    let max_m = modes.iter().map(|m| m.0).max().unwrap_or(0);
    let max_n = modes.iter().map(|m| m.1).max().unwrap_or(0);
    let cx: Vec<Vec<f64>> = (0..=max_m)
        .map(|m| {
            (0..g.nx)
                .map(|i| (m as f64 * pi * g.center(i, 0).0 / g.lx).cos())
                .collect()
        })
        .collect();
    let cy: Vec<Vec<f64>> = (0..=max_n)
        .map(|n| {
            (0..g.ny)
                .map(|j| (n as f64 * pi * g.center(0, j).1 / g.ly).cos())
                .collect()
        })
        .collect();
    let vals = f.values();
    modes
        .iter()
        .map(|&(m, n)| {
            let mut s = 0.0;
            for j in 0..g.ny {
                let row = &vals[j * g.nx..(j + 1) * g.nx];
                let inner: f64 = row.iter().zip(&cx[m]).map(|(a, c)| a * c).sum();
                s += inner * cy[n][j];
            }
            let scale = 1.0 + pi * m as f64 / g.lx + pi * n as f64 / g.ly;
            (s * g.cell_volume() / scale).abs()
        })
        .fold(0.0, f64::max)
}
