use degen_taxis::grid::{GridSpec, ScalarField};
use degen_taxis::stepper::Trajectory;
use degen_taxis::{check_invariants, run, DiagConfig, Params, StepControl};

fn homogeneous(ell: f64, t_end: f64) -> Trajectory {
    let g = GridSpec::unit_square(8).unwrap();
    let one = ScalarField::constant(g, 1.0);
    let c = StepControl {
        t_end,
        ..Default::default()
    };
    let d = DiagConfig {
        stride: 5,
        ..Default::default()
    };
    run(&one, &one, &Params::new(1.0, ell, 0.0).unwrap(), &c, &d).unwrap()
}

#[test]
fn homogeneous_run_passes_everything() {
    let traj = homogeneous(0.0, 1.0);
    let r = check_invariants(&traj.samples, &traj.context()).unwrap();
    assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
    // int_0^1 e^-t dt with a left Riemann sum of step <= 1e-2
    let cum = traj.final_record().cum.uv;
    assert!((cum - (1.0 - (-1.0f64).exp())).abs() < 5e-3, "{cum}");
    assert!(cum <= 1.0);
}

#[test]
fn unit_nutrient_gives_the_one_third_limit() {
    let traj = homogeneous(1.0, 0.2);
    let ctx = traj.context();
    let r = check_invariants(&traj.samples, &ctx).unwrap();
    let c = r.get("v_cubed_dissipation").unwrap();
    assert!((c.limit - (1.0 + ctx.tol_pde()) / 3.0).abs() < 1e-12, "{}", c.limit);
}

#[test]
fn injected_sup_v_increase_is_reported() {
    let traj = homogeneous(0.0, 0.5);
    let mut samples = traj.samples.clone();
    let k = samples.len() / 2;
    samples[k].sup_v *= 1.01;
    let r = check_invariants(&samples, &traj.context()).unwrap();
    assert!(!r.get("sup_v_monotone").unwrap().pass);
    assert!(r.get("mass_v_monotone").unwrap().pass);
}

#[test]
fn mass_outside_the_window_is_reported() {
    let traj = homogeneous(1.0, 0.5);
    let mut samples = traj.samples.clone();
    let last = samples.len() - 1;
    samples[last].mass_u = 2.5; // int u0 + ell int v0 = 2
    let r = check_invariants(&samples, &traj.context()).unwrap();
    assert!(!r.get("mass_u_upper").unwrap().pass);
}

#[test]
fn too_few_samples_is_an_error() {
    let traj = homogeneous(0.0, 0.1);
    assert!(check_invariants(&traj.samples[..1], &traj.context()).is_err());
}
