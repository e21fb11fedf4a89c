use std::f64::consts::PI;
use std::sync::Arc;

use qg_core::calculus::*;
use qg_core::diagnostics::*;
use qg_core::dynamics::{Model, SolverConfig, StepInfo};
use qg_core::random::{random_scalar, rng, RandomSpec};
use qg_core::{Grid, VectorField3D};

fn unit_model(grid: &Arc<Grid>, cfg: SolverConfig) -> Model {
    Model::new(grid, LambdaProfile::constant(grid, 1.0).unwrap(), cfg, None).unwrap()
}

fn two_mode(a: f64) -> impl Fn(f64, f64, f64) -> f64 + Sync {
    move |z, x, y| a * ((-z).exp() * x.cos() + z * (-z).exp() * (x + y).cos())
}

#[test]
fn simpson_is_exact_for_cubics() {
    let f = |t: f64| 1.0 - 2.0 * t + 3.0 * t * t - 0.5 * t.powi(3);
    let big_f = |t: f64| t - t * t + t.powi(3) - 0.125 * t.powi(4);
    let h = 0.1;
    let v: Vec<f64> = (0..12).map(|i| f(i as f64 * h)).collect();
    let c = cumulative_simpson(&v, h);
    assert_eq!(c[0], 0.0);
    for (n, x) in c.iter().enumerate().skip(2) {
        assert!((x - big_f(n as f64 * h)).abs() < 1e-13, "{n}");
    }
    assert!((c[1] - 0.5 * h * (v[0] + v[1])).abs() < 1e-15);
}

#[test]
fn bump_shape() {
    assert_eq!(bump(0.0), (1.0, 0.0));
    assert_eq!(bump(1.0), (0.0, 0.0));
    assert_eq!(bump(-1.5), (0.0, 0.0));
    let e = 1e-6;
    for s in [-0.7, -0.2, 0.3, 0.9] {
        let fd = (bump(s + e).0 - bump(s - e).0) / (2.0 * e);
        assert!((fd - bump(s).1).abs() < 1e-6);
    }
}

#[test]
fn battery_is_seeded_and_vanishes_at_final_time() {
    let g = Grid::new(1.0, 16, 16, 16, 8.0).unwrap();
    let a = test_battery(7, &g, 0.5);
    assert_eq!(a.len(), 8);
    assert_eq!(a, test_battery(7, &g, 0.5));
    assert_ne!(a, test_battery(8, &g, 0.5));
    for f in &a {
        assert_eq!(f.time(0.5), (0.0, 0.0));
        assert!(f.z.0 + f.z.1 <= 4.0 + 1e-12);
    }
}

#[test]
fn unit_mode_norms() {
    let g = Grid::new(1.0, 16, 16, 64, 8.0).unwrap();
    let m = unit_model(&g, SolverConfig::default());
    let s = m.state_from_fn(|z, x, _| (-z).exp() * x.cos()).unwrap();
    let info = StepInfo { cfl_ratio: 0.0, reprojection_residual: 0.0 };
    let r = energy_report(&m, &s, &info).unwrap();
    let e = 2.0 * PI * PI;
    assert!((r.norm_grad_lambda_l2.powi(2) - e).abs() < 0.2 * g.dz * g.dz * e);
    assert!((r.norm_gamma_nu_l2.powi(2) - e).abs() < 1e-3 * e);
    assert!(r.norm_l_lambda_l2 < 0.05);
    assert!(r.gronwall_g.is_none());
    assert!(r.dt_psi_hm32_hom < 1e-12 && r.dt_psi_hm32_inh < 1e-12);
    assert!(r.is_finite());
    assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    assert_eq!(r.csv_row().split(',').nth(9), Some(""));
}

#[test]
fn zero_state_report() {
    let g = Grid::new(1.0, 8, 8, 8, 4.0).unwrap();
    let m = unit_model(&g, SolverConfig { eps: 0.1, ..Default::default() });
    let s = m.state_from_gradient(&VectorField3D::zeros(&g)).unwrap();
    let r = energy_report(&m, &s, &StepInfo { cfl_ratio: 0.0, reprojection_residual: 0.0 }).unwrap();
    for v in [r.norm_grad_lambda_l2, r.norm_l_lambda_l2, r.norm_gamma_nu_l2, r.norm_grad_l3, r.diss_quarter] {
        assert_eq!(v, 0.0);
    }
    assert_eq!(r.gronwall_g, Some(0.0));
}

#[test]
fn energy_ledger_and_gronwall_on_a_viscous_run() {
    let g = Grid::new(1.0, 32, 32, 16, 8.0).unwrap();
    let eps = 1e-2;
    let dt = 0.02;
    let m = unit_model(&g, SolverConfig { eps, dt, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(0.3)).unwrap();
    let mut led = EnergyLedger::new(eps, dt);
    let mut gr = GronwallMonitor::new(eps, dt);
    led.push(&s0);
    gr.push(&s0);
    m.run(&s0, 25, |s, _| {
        led.push(s);
        gr.push(s);
        Ok(())
    })
    .unwrap();
    let r = led.report();
    assert!(r.violation <= 1e-6, "{r:?}");
    assert!(led.energy.windows(2).all(|w| w[1] < w[0]));
    let gr = gr.report();
    assert!(gr.holds && gr.worst_ratio <= 1.0 && gr.integral > 0.0);
}

fn steady_residual(dt: f64) -> (f64, f64) {
    let g = Grid::new(1.0, 32, 32, 32, 8.0).unwrap();
    let m = unit_model(&g, SolverConfig { dt, ..Default::default() });
    let s0 = m.state_from_fn(|z, x, _| (-2.0 * z).exp() * x.cos()).unwrap();
    let mut w = WeakResiduals::new(test_battery(3, &g, 0.5), &m);
    w.push(&s0);
    m.run(&s0, (0.5 / dt).round() as u64, |s, _| {
        w.push(s);
        Ok(())
    })
    .unwrap();
    w.max_abs()
}

#[test]
fn weak_residual_of_steady_state_converges_in_time() {
    // only the time quadrature of the test function is left
    let (i1, b1) = steady_residual(0.01);
    let (i2, b2) = steady_residual(0.005);
    assert!(i1 / i2 > 3.5 && b1 / b2 > 3.5, "{i1} {i2} {b1} {b2}");
}

#[test]
fn weak_residual_of_zero_state_is_zero() {
    let g = Grid::new(1.0, 8, 8, 8, 4.0).unwrap();
    let m = unit_model(&g, SolverConfig::default());
    let s = m.state_from_gradient(&VectorField3D::zeros(&g)).unwrap();
    let mut w = WeakResiduals::new(test_battery(1, &g, 1.0), &m);
    w.push(&s);
    w.push(&s);
    assert_eq!(w.max_abs(), (0.0, 0.0));
    assert_eq!(w.residuals().0.len(), 8);
}

#[test]
fn identical_runs_have_zero_gaps() {
    let g = Grid::new(1.0, 16, 16, 8, 4.0).unwrap();
    let m = unit_model(&g, SolverConfig { dt: 0.02, t_final: 0.1, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(0.3)).unwrap();
    let r = stability_experiment(&m, &s0, &[0.01, 0.01, 0.01]).unwrap();
    assert_eq!(r.gaps, vec![0.0, 0.0]);
    assert!(!r.strictly_decreasing);
    let r = stability_experiment(&m, &s0, &[0.1, 0.05, 0.025]).unwrap();
    assert!(r.gaps.iter().all(|&x| x > 0.0));
}

#[test]
fn integration_by_parts_identity() {
    let g = Grid::new(1.0, 16, 16, 16, 8.0).unwrap();
    let m = unit_model(&g, SolverConfig::default());
    let mut r = rng(12);
    let psi = random_scalar(&g, &mut r, &RandomSpec { kmax: 4, ..Default::default() });
    let s = m.state_from_gradient(&grad(&psi)).unwrap();
    let phi = random_scalar(&g, &mut r, &RandomSpec { kmax: 4, ..Default::default() });
    let e = equivalence_check(&s, &phi);
    assert!((e.lhs - e.rhs).abs() < 1e-10 * e.lhs.abs().max(e.rhs.abs()), "{e:?}");
    assert!(e.flux_bound.ratio > 0.0 && e.flux_bound.ratio.is_finite());
}

#[test]
fn apriori_ratios_are_finite() {
    let g = Grid::new(1.0, 16, 16, 16, 8.0).unwrap();
    let m = unit_model(&g, SolverConfig::default());
    let s = m.state_from_fn(two_mode(1.0)).unwrap();
    let a = apriori_check(&s);
    for q in [&a.energy_trace, &a.sobolev] {
        assert!(q.lhs > 0.0 && q.rhs > 0.0 && q.ratio.is_finite());
        assert!((q.ratio - q.lhs / q.rhs).abs() < 1e-15);
    }
}
