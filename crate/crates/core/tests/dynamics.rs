use std::sync::Arc;

use qg_core::calculus::*;
use qg_core::dynamics::*;
use qg_core::random::{random_scalar, rng, RandomSpec};
use qg_core::{Grid, QgError, VectorField3D};

fn grid() -> Arc<Grid> {
    Grid::new(1.0, 16, 16, 16, 8.0).unwrap()
}

fn model(grid: &Arc<Grid>, cfg: SolverConfig) -> Model {
    Model::new(grid, LambdaProfile::constant(grid, 1.0).unwrap(), cfg, None).unwrap()
}

fn two_mode(a: f64) -> impl Fn(f64, f64, f64) -> f64 + Sync {
    move |z, x, y| a * ((-z).exp() * x.cos() + z * (-z).exp() * (x + y).cos())
}

#[test]
fn config_validation() {
    let bad = [
        SolverConfig { dt: 0.0, ..Default::default() },
        SolverConfig { eps: -1.0, ..Default::default() },
        SolverConfig { delta: f64::NAN, ..Default::default() },
        SolverConfig { cfl: 1.5, ..Default::default() },
        SolverConfig { t_final: -1.0, ..Default::default() },
    ];
    for c in bad {
        assert!(matches!(c.validate(), Err(QgError::InvalidParameter(_))));
    }
    assert_eq!(SolverConfig { dt: 0.02, t_final: 0.5, ..Default::default() }.steps(), 25);
}

#[test]
fn single_mode_is_steady() {
    let g = grid();
    let m = model(&g, SolverConfig { dt: 0.05, ..Default::default() });
    let s0 = m.state_from_fn(|z, x, _| (-z).exp() * x.cos()).unwrap();
    let (n, _) = nonlinear_term(&s0.psi, &s0.g, 0.0);
    assert!(n.max_abs() < 1e-14);
    let s = m.run(&s0, 20, |_, _| Ok(())).unwrap();
    assert!(norm_vector(&s.g.sub(&s0.g)) < 1e-12 * norm_vector(&s0.g));
    assert!((s.t - 1.0).abs() < 1e-12 && s.step == 20);
}

#[test]
fn hyperviscous_decay_of_a_unit_mode() {
    let g = grid();
    let (eps, dt) = (0.1, 0.05);
    let m = model(&g, SolverConfig { eps, dt, ..Default::default() });
    let s0 = m.state_from_fn(|z, x, _| (-z).exp() * x.cos()).unwrap();
    let (s1, info) = m.step(&s0).unwrap();
    let want = s0.g.scaled((-2.0 * eps * dt).exp());
    assert!(norm_vector(&s1.g.sub(&want)) < 1e-12 * norm_vector(&want));
    assert!(info.reprojection_residual < 1e-12);
}

#[test]
fn zero_state_stays_zero() {
    let g = grid();
    let m = model(&g, SolverConfig { eps: 0.01, delta: 0.1, beta: 1.0, ..Default::default() });
    let s0 = m.state_from_gradient(&VectorField3D::zeros(&g)).unwrap();
    let s = m.run(&s0, 5, |_, _| Ok(())).unwrap();
    assert_eq!(s.g.max_abs(), 0.0);
}

#[test]
fn cfl_violation_is_reported() {
    let g = grid();
    let m = model(&g, SolverConfig { dt: 5.0, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(1.0)).unwrap();
    assert!(matches!(m.step(&s0), Err(QgError::CflViolation(_))));
}

#[test]
fn inviscid_run_conserves_quadratic_invariants() {
    let g = grid();
    for beta in [0.0, 0.5] {
        let m = model(&g, SolverConfig { dt: 0.02, beta, ..Default::default() });
        let s0 = m.state_from_fn(two_mode(0.3)).unwrap();
        let s = m.run(&s0, 25, |_, _| Ok(())).unwrap();
        let e0 = norm_vector(&s0.g);
        let e = norm_vector(&s.g);
        assert!((e - e0).abs() < 1e-9 * e0, "beta {beta}: {e0} {e}");
        if beta == 0.0 {
            let q0 = norm_scalar(&div(&s0.g));
            let q = norm_scalar(&div(&s.g));
            assert!((q - q0).abs() < 1e-9 * q0);
            let b0 = norm_surface(&gamma_nu(&s0.g));
            let b = norm_surface(&gamma_nu(&s.g));
            assert!((b - b0).abs() < 1e-9 * b0);
        }
    }
}

#[test]
fn state_is_a_weighted_gradient() {
    let g = grid();
    let lam = LambdaProfile::tanh_stratified(&g, 2.0, 2.0, 1.0).unwrap();
    let m = Model::new(&g, lam.clone(), SolverConfig { dt: 0.02, ..Default::default() }, None).unwrap();
    let s0 = m.state_from_fn(two_mode(0.3)).unwrap();
    let s = m.run(&s0, 5, |_, info| {
        assert!(info.reprojection_residual < 1e-9);
        Ok(())
    })
    .unwrap();
    let c = qg_core::hodge::project_curl(&s.g, &lam).unwrap();
    assert!(norm_vector(&c) < 1e-10 * norm_vector(&s.g));
}

#[test]
fn classical_recovery_round_trip() {
    let g = grid();
    let lam = LambdaProfile::tanh_stratified(&g, 2.0, 2.0, 1.0).unwrap();
    let m = Model::new(&g, lam, SolverConfig::default(), None).unwrap();
    let s = m.state_from_fn(two_mode(1.0)).unwrap();
    let c = m.classical_from_state(&s);
    assert!(c.psi.sub(&s.psi).max_abs() < 1e-12 * s.psi.max_abs());
    let back = m.recover(&c.q, &c.theta).unwrap();
    assert!(back.sub(&s.psi).max_abs() < 1e-10 * s.psi.max_abs());
    assert!(norm_vector(&m.classical_gradient(&c).unwrap().sub(&s.g)) < 1e-10 * norm_vector(&s.g));
}

#[test]
fn classical_and_reformulated_agree_for_short_runs() {
    let g = Grid::new(1.0, 32, 32, 32, 8.0).unwrap();
    let m = model(&g, SolverConfig { dt: 0.02, eps: 1e-3, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(0.3)).unwrap();
    let mut c = m.classical_from_state(&s0);
    let mut s = s0.clone();
    for _ in 0..10 {
        s = m.step(&s).unwrap().0;
        c = m.classical_step(&c).unwrap().0;
    }
    let gap = norm_vector(&m.classical_gradient(&c).unwrap().sub(&s.g)) / norm_vector(&s.g);
    assert!(gap < 2e-3, "{gap}");
    assert!(gap > 0.0);
}

#[test]
fn mollification_damps_the_velocity() {
    let g = grid();
    let mut r = rng(4);
    let psi = random_scalar(&g, &mut r, &RandomSpec::default());
    let gg = grad(&psi);
    let speeds: Vec<f64> = [0.0, 0.2, 0.5, 1.0].iter().map(|&d| nonlinear_term(&psi, &gg, d).1).collect();
    assert!(speeds.windows(2).all(|w| w[1] < w[0]), "{speeds:?}");
}

#[test]
fn picard_map_with_frozen_candidate() {
    let g = grid();
    let m = model(&g, SolverConfig { eps: 0.1, delta: 0.4, dt: 0.01, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(1.0)).unwrap();
    let traj = m.picard_t_delta(&vec![s0.g.clone(); 11], &s0.g).unwrap();
    let exact = m.picard_constant(&m.picard_forcing(&s0.g).unwrap(), &s0.g, 0.1);
    let d = norm_vector(&traj[10].sub(&exact)) / norm_vector(&exact);
    assert!(d < 1e-10, "{d}");
    let m0 = model(&g, SolverConfig::default());
    assert!(m0.picard_t_delta(std::slice::from_ref(&s0.g), &s0.g).is_err());
}

#[test]
fn picard_contraction_grows_with_span() {
    let g = grid();
    let m = model(&g, SolverConfig { eps: 0.1, delta: 4.0 * g.dx, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(4.0)).unwrap();
    let spans: Vec<f64> = (0..14).map(|i| 1e-3 * 2f64.powi(i)).collect();
    let r = m.picard_contraction_probe(&s0.g, &spans, 4, 9).unwrap();
    assert!(r.contraction.windows(2).all(|w| w[1] >= w[0]));
    assert!(r.contraction[0] < 0.1);
    let t0 = r.t0.unwrap();
    let tc = r.t_cross.unwrap();
    assert!(t0 <= tc && tc < 2.0 * t0);
    assert!(r.constant.unwrap() > 0.0);
    let q = m.picard_contraction_probe(&s0.g, &spans, 4, 9).unwrap();
    assert_eq!(r.contraction, q.contraction);
}
