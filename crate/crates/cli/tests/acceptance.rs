//! Acceptance suite on the reference grid 64×64×32, `Z_max = 8`. Every test
//! prints one line `[PASS]` or `[FAIL]` with the measured numbers before
//! asserting.

use std::f64::consts::PI;
use std::fs;
use std::sync::Arc;

use qg_core::calculus::*;
use qg_core::diagnostics::{
    perturbation_experiment, stability_experiment, test_battery, EnergyLedger, WeakResiduals,
};
use qg_core::dynamics::{Model, SolverConfig, State};
use qg_core::elliptic::{solve_dirichlet, solve_flux_unchecked, solve_neumann};
use qg_core::hodge::{project, project_curl};
use qg_core::random::{random_surface, random_vector, rng, RandomSpec};
use qg_core::sqg::{lift_harmonic, lift_harmonic_gradient, SqgConfig, SqgSolver};
use qg_core::{Grid, ScalarField3D, SurfaceField2D};

const NX: usize = 64;
const NZ: usize = 32;
const ZMAX: f64 = 8.0;

fn grid(nz: usize) -> Arc<Grid> {
    Grid::new(1.0, NX, NX, nz, ZMAX).unwrap()
}

fn unit(g: &Arc<Grid>) -> LambdaProfile {
    LambdaProfile::constant(g, 1.0).unwrap()
}

fn verdict(n: u32, title: &str, pass: bool, detail: String) {
    println!("[{}] criterion {n}: {title} | {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn two_mode(a: f64) -> impl Fn(f64, f64, f64) -> f64 + Sync {
    move |z, x, y| a * ((-z).exp() * x.cos() + z * (-z).exp() * (x + y).cos())
}

fn model(g: &Arc<Grid>, cfg: SolverConfig) -> Model {
    Model::new(g, unit(g), cfg, None).unwrap()
}

/// Time step for a vertical resolution, refined together with `dz`.
fn dt_for(nz: usize) -> f64 {
    0.02 * NZ as f64 / nz as f64
}

fn profiles(g: &Arc<Grid>) -> Vec<(f64, LambdaProfile)> {
    vec![
        (1.0, unit(g)),
        (2.0, LambdaProfile::tanh_stratified(g, 2.0, 2.0, 1.0).unwrap()),
        (4.0, LambdaProfile::tanh_stratified(g, 4.0, 2.0, 1.0).unwrap()),
    ]
}

#[test]
fn criterion_01_hodge_projectors() {
    let g = grid(NZ);
    let mut r = rng(2024);
    let spec = RandomSpec::default();
    let (mut alg, mut pair, mut norm_ok) = (0.0f64, 0.0f64, true);
    let mut norms = Vec::new();
    for (big, lam) in profiles(&g) {
        let mut worst_norm = 0.0f64;
        for _ in 0..50 {
            let u = random_vector(&g, &mut r, &spec);
            let n = norm_vector(&u);
            let p = project(&u, &lam).unwrap();
            let c = project_curl(&u, &lam).unwrap();
            alg = alg
                .max(norm_vector(&project(&p, &lam).unwrap().sub(&p)) / n)
                .max(norm_vector(&p.add(&c).sub(&u)) / n)
                .max(norm_vector(&project(&c, &lam).unwrap()) / n)
                .max(norm_vector(&project_curl(&p, &lam).unwrap()) / n);
            let phi = qg_core::random::random_scalar(&g, &mut r, &spec);
            let gphi = grad(&phi);
            let d = inner_vector(&u, &gphi) - inner_vector(&p, &gphi);
            pair = pair.max(d.abs() / (n * norm_vector(&gphi)));
            worst_norm = worst_norm.max(norm_vector(&p) / n);
        }
        norm_ok &= worst_norm <= big * (2.0 + big);
        norms.push((big, worst_norm));
    }
    let pass = alg <= 1e-9 && pair <= 1e-9 && norm_ok;
    verdict(
        1,
        "Hodge projector suite",
        pass,
        format!("algebra {alg:.2e} (<= 1e-9), pairing {pair:.2e} (<= 1e-9), |P| by Lambda {norms:?} (<= L(2+L))"),
    );
}

fn dirichlet_error(nz: usize) -> f64 {
    let g = Grid::new(1.0, 16, 16, nz, ZMAX).unwrap();
    let a = PI / ZMAX;
    let f = ScalarField3D::sample(&g, |z, x, _| -(a * a + 1.0) * (a * z).sin() * x.cos());
    let psi = solve_dirichlet(&f, &unit(&g)).unwrap();
    cell_error(&psi, |z, x, _| (a * z).sin() * x.cos())
}

fn cell_error(psi: &ScalarField3D, exact: impl Fn(f64, f64, f64) -> f64 + Sync) -> f64 {
    let nm = psi.grid.modes();
    let got = psi.to_physical();
    let ex = ScalarField3D::sample(&psi.grid, exact).to_physical();
    got[nm..].iter().zip(&ex[nm..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_02_elliptic_manufactured() {
    let errs: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| dirichlet_error(n)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let neumann = |nz| {
        let g = grid(nz);
        let psi = solve_neumann(&SurfaceField2D::sample(&g, |x, _| x.cos()), &unit(&g), None).unwrap();
        // the column is truncated with ψ(Z_max) = 0
        cell_error(&psi, |z, x, _| (ZMAX - z).sinh() / ZMAX.cosh() * x.cos())
    };
    let (n1, n2) = (neumann(NZ), neumann(2 * NZ));
    let pass = orders.iter().all(|o| (1.8..=2.2).contains(o)) && n1 < 1e-3 && n2 < 2.5e-4;
    verdict(
        2,
        "elliptic manufactured solutions",
        pass,
        format!("Dirichlet orders {orders:.3?} (in [1.8, 2.2]), Neumann {n1:.2e} (< 1e-3), refined {n2:.2e} (< 2.5e-4)"),
    );
}

#[test]
fn criterion_03_trace_inequalities() {
    let g = grid(NZ);
    let lam = unit(&g);
    let mut r = rng(33);
    let spec = RandomSpec { kmax: 4, zero_mean: true, decay: (1.0, 1.0) };
    let (mut c33, mut c34) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let th = random_surface(&g, &mut r, &spec);
        let h = lift_harmonic(&th, &g).unwrap();
        c33 = c33.max(hs_norm_surface(&gamma0(&h), 0.5).unwrap() / norm_vector(&grad(&h)));
        // divergence free: gradient of a discrete harmonic potential plus a curl part
        let w0 = random_surface(&g, &mut r, &spec);
        let psi = solve_flux_unchecked(&w0, &lam, None).unwrap();
        let v = random_vector(&g, &mut r, &RandomSpec::default());
        let mut c = project_curl(&v, &lam).unwrap();
        c.scale((k as f64 + 0.5) / 50.0 * norm_vector(&grad(&psi)) / norm_vector(&c));
        let u = grad_lambda(&psi, &lam).unwrap().add(&c);
        let dv = norm_scalar(&div(&u)) / norm_vector(&u);
        assert!(dv < 1e-10, "field not divergence free: {dv}");
        c34 = c34.max(hs_norm_surface(&gamma_nu(&u), -0.5).unwrap() / norm_vector(&u));
    }
    let lim = 1.0 + 5.0 * g.dz;
    let pass = c33 <= lim && c34 <= 1.0;
    verdict(
        3,
        "trace inequalities",
        pass,
        format!("harmonic trace constant {c33:.6} (<= {lim:.4}), flux trace constant {c34:.6} (<= 1)"),
    );
}

#[test]
fn criterion_04_steady_states() {
    let g = grid(NZ);
    let m = model(&g, SolverConfig { dt: 0.02, ..Default::default() });
    let s0 = m.state_from_fn(|z, x, _| (-z).exp() * x.cos()).unwrap();
    let s = m.run(&s0, 50, |_, _| Ok(())).unwrap();
    let d3 = norm_vector(&s.g.sub(&s0.g)) / norm_vector(&s0.g);
    let th = SurfaceField2D::sample(&g, |x, y| (x + 2.0 * y).cos());
    let run = SqgSolver::new(&g, SqgConfig { eps: 0.0, delta: 0.0, dt: 0.02, cfl: 0.5 }).unwrap().run(&th, 50).unwrap();
    let d2 = norm_surface(&run[50].theta.sub(&th)) / norm_surface(&th);
    verdict(4, "steady-state preservation", d3 < 1e-6 && d2 < 1e-6, format!("3D drift {d3:.2e}, SQG drift {d2:.2e} (< 1e-6)"));
}

#[test]
fn criterion_05_conservation_ledger() {
    let g = grid(NZ);
    let m = model(&g, SolverConfig { dt: 0.02, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(0.2)).unwrap();
    let norms = |s: &State| [norm_vector(&s.g), norm_scalar(&div(&s.g)), norm_surface(&gamma_nu(&s.g))];
    let n0 = norms(&s0);
    let mut drift = [0.0f64; 3];
    m.run(&s0, 50, |s, _| {
        for (d, (a, b)) in drift.iter_mut().zip(norms(s).iter().zip(&n0)) {
            *d = d.max((a - b).abs() / b);
        }
        Ok(())
    })
    .unwrap();
    let eps = 1e-3;
    let mv = model(&g, SolverConfig { dt: 0.02, eps, ..Default::default() });
    let mut led = EnergyLedger::new(eps, 0.02);
    led.push(&s0);
    mv.run(&s0, 50, |s, _| {
        led.push(s);
        Ok(())
    })
    .unwrap();
    let r = led.report();
    let pass = drift.iter().all(|&d| d < 1e-5) && r.violation <= 1e-6 && r.surface_violation <= 1e-6;
    verdict(
        5,
        "conservation ledger",
        pass,
        format!(
            "drift |G| {:.2e}, |L psi| {:.2e}, |gamma_nu| {:.2e} (< 1e-5); energy violation {:.2e}, surface {:.2e} (<= 1e-6)",
            drift[0], drift[1], drift[2], r.violation, r.surface_violation
        ),
    );
}

fn scheme_gap(nz: usize) -> f64 {
    let g = grid(nz);
    let dt = dt_for(nz);
    let m = model(&g, SolverConfig { dt, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(0.2)).unwrap();
    let mut c = m.classical_from_state(&s0);
    let mut s = s0;
    let mut gap = 0.0f64;
    for _ in 0..(0.5 / dt).round() as u64 {
        s = m.step(&s).unwrap().0;
        c = m.classical_step(&c).unwrap().0;
        gap = gap.max(norm_vector(&m.classical_gradient(&c).unwrap().sub(&s.g)) / norm_vector(&s.g));
    }
    gap
}

#[test]
fn criterion_06_scheme_equivalence() {
    let (a, b) = (scheme_gap(NZ), scheme_gap(2 * NZ));
    verdict(
        6,
        "scheme equivalence",
        a < 1e-3 && a / b >= 2.0,
        format!("gap {a:.3e} (< 1e-3), refined {b:.3e}, ratio {:.2} (>= 2)", a / b),
    );
}

fn sqg_gap(nz: usize) -> (f64, f64) {
    let g = grid(nz);
    let lam = unit(&g);
    let dt = dt_for(nz);
    let th = SurfaceField2D::sample(&g, |x, y| 0.3 * (x.cos() + (x + y).cos()));
    let m = model(&g, SolverConfig { dt, ..Default::default() });
    let s0 = m.state_from_gradient(&lift_harmonic_gradient(&th, &g).unwrap()).unwrap();
    let n = (0.5 / dt).round() as u64;
    let b0 = gamma_nu(&s0.g);
    let run = SqgSolver::new(&g, SqgConfig { eps: 0.0, delta: 0.0, dt, cfl: 0.5 }).unwrap().run(&b0, n).unwrap();
    let l0 = norm_scalar(&l_lambda(&s0.psi, &lam).unwrap());
    let (mut gap, mut harm) = (0.0f64, 0.0f64);
    m.run(&s0, n, |s, _| {
        let k = s.step as usize;
        gap = gap.max(norm_surface(&gamma_nu(&s.g).sub(&run[k].theta)) / norm_surface(&run[k].theta));
        harm = harm.max(norm_scalar(&l_lambda(&s.psi, &lam).unwrap()) / l0);
        Ok(())
    })
    .unwrap();
    (gap, harm)
}

#[test]
fn criterion_07_sqg_oracle() {
    let ((a, ha), (b, hb)) = (sqg_gap(NZ), sqg_gap(2 * NZ));
    let pass = a < 1e-3 && b < a && ha < 10.0 && hb < 10.0;
    verdict(
        7,
        "SQG oracle",
        pass,
        format!("gap {a:.3e} (< 1e-3), refined {b:.3e} (decreasing); harmonicity growth {ha:.3}, {hb:.3} (< 10)"),
    );
}

#[test]
fn criterion_08_picard_contraction() {
    let g = grid(NZ);
    let spans: Vec<f64> = (0..14).map(|i| 1e-3 * 2f64.powi(i)).collect();
    let probe = |delta: f64| {
        let m = model(&g, SolverConfig { eps: 0.1, delta, ..Default::default() });
        let s0 = m.state_from_fn(two_mode(4.0)).unwrap();
        m.picard_contraction_probe(&s0.g, &spans, 8, 8).unwrap()
    };
    let r = probe(4.0 * g.dx);
    let h = probe(2.0 * g.dx);
    let t0 = r.t0.expect("some span contracts");
    let below = r.spans.iter().zip(&r.contraction).filter(|(s, _)| **s <= t0).all(|(_, &c)| c < 1.0);
    let half = r.spans.iter().zip(&r.contraction).filter(|(s, _)| **s <= 0.5 * t0).all(|(_, &c)| c < 0.5);
    let ratio = r.t_cross.unwrap() / h.t_cross.unwrap();
    let scaling = (16.0 / 4.0..=16.0 * 4.0).contains(&ratio);
    verdict(
        8,
        "Picard contraction probe",
        below && half && scaling,
        format!(
            "t0 {t0:.4} (crossing {:.4}, C {:.3e}); c < 1 below t0: {below}; c < 1/2 below t0/2: {half}; \
             t0(4dx)/t0(2dx) = {ratio:.3} (expected 16 within a factor 4)",
            r.t_cross.unwrap(),
            r.constant.unwrap()
        ),
    );
}

fn weak_residuals(nz: usize) -> (f64, f64) {
    let g = grid(nz);
    let dt = dt_for(nz);
    let m = model(&g, SolverConfig { dt, ..Default::default() });
    let s0 = m.state_from_fn(two_mode(0.2)).unwrap();
    let mut w = WeakResiduals::new(test_battery(9, &g, 0.5), &m);
    w.push(&s0);
    m.run(&s0, (0.5 / dt).round() as u64, |s, _| {
        w.push(s);
        Ok(())
    })
    .unwrap();
    w.max_abs()
}

#[test]
fn criterion_09_weak_residuals() {
    let ((i1, b1), (i2, b2)) = (weak_residuals(NZ), weak_residuals(2 * NZ));
    verdict(
        9,
        "weak-form residuals",
        i1 / i2 >= 2.0 && b1 / b2 >= 2.0,
        format!("interior {i1:.3e} -> {i2:.3e} ({:.2}x), boundary {b1:.3e} -> {b2:.3e} ({:.2}x) (>= 2x)", i1 / i2, b1 / b2),
    );
}

#[test]
fn criterion_10_stability_sweep() {
    let g = grid(NZ);
    let eps: Vec<f64> = (0..5).map(|n| 0.1 * 0.5f64.powi(n)).collect();
    let m = model(&g, SolverConfig { dt: 0.02, t_final: 0.5, eps: eps[4], ..Default::default() });
    let s0 = m.state_from_fn(two_mode(0.2)).unwrap();
    let r = stability_experiment(&m, &s0, &eps).unwrap();
    let p = perturbation_experiment(&m, &s0, &[1e-2, 1e-3], 10).unwrap();
    let q = p[1] / p[0];
    let pass = r.strictly_decreasing && (0.05..=0.2).contains(&q);
    verdict(
        10,
        "stability sweep",
        pass,
        format!("gaps {} (strictly decreasing); perturbation gaps {}, ratio {q:.4} (in [0.05, 0.2])", sci(&r.gaps), sci(&p)),
    );
}

#[test]
fn criterion_11_determinism() {
    use qg_cli::run::{resume, run_simulation, CHECKPOINT, DIAGNOSTICS};
    let d = tempfile::tempdir().unwrap();
    let text = format!(
        "[grid]\nnx = {NX}\nny = {NX}\nnz = {NZ}\nzmax = {ZMAX:.1}\n\n[lambda]\nprofile = \"tanh-stratified\"\nbig_lambda = 2.0\n\n\
         [init]\nkind = \"random-seeded\"\namplitude = 0.3\n\n[solver]\neps = 0.001\ndelta = 0.1\ndt = 0.01\nT = 0.2\n\n\
         [output]\ncheckpoint_every = 5\n"
    );
    let cfg = d.path().join("run.toml");
    fs::write(&cfg, text).unwrap();
    let m = qg_cli::parse_config(&cfg, Some(17)).unwrap();
    let mut csvs = Vec::new();
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let out = d.path().join(format!("full{threads}"));
        pool.install(|| run_simulation(&m, &out)).unwrap();
        csvs.push(fs::read(out.join(DIAGNOSTICS)).unwrap());
        let split = d.path().join(format!("split{threads}"));
        fs::create_dir_all(&split).unwrap();
        fs::copy(out.join(CHECKPOINT), split.join(CHECKPOINT)).unwrap();
        pool.install(|| resume(&m, &split, &split.join(CHECKPOINT))).unwrap();
        csvs.push(fs::read(split.join(DIAGNOSTICS)).unwrap());
    }
    let same = csvs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        11,
        "determinism",
        same && !csvs[0].is_empty(),
        format!("{} diagnostics files (threads 1 and 4, full and checkpoint-resumed) byte-identical: {same}", csvs.len()),
    );
}

