//! Time evolution of `G = ∇_λ Ψ`, the classical `(q, θ_b)` scheme and the
//! frozen-velocity Picard map.

use std::sync::Arc;

use crate::calculus::{div, grad_lambda, hyperviscous_rate, mollify_levels, norm_vector, sample_grad_lambda, LambdaProfile};
use crate::elliptic::{compute_forcing_f, solve_flux_unchecked};
use crate::error::{QgError, Result};
use crate::field::{ScalarField3D, SurfaceField2D, VectorField3D};
use crate::grid::{Grid, C64};
use crate::hodge::potential;
use crate::par;
use crate::random::{random_vector, rng, RandomSpec};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Reformulated,
    Classical,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub eps: f64,
    pub delta: f64,
    pub beta: f64,
    pub dt: f64,
    pub t_final: f64,
    pub cfl: f64,
    pub scheme: Scheme,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { eps: 0.0, delta: 0.0, beta: 0.0, dt: 0.01, t_final: 1.0, cfl: 0.5, scheme: Scheme::Reformulated }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QgError::InvalidParameter(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("T must be non-negative, got {}", self.t_final));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be >= 0, got {}", self.eps));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be >= 0, got {}", self.delta));
        }
        if !self.beta.is_finite() {
            return bad("beta must be finite".into());
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("CFL factor must lie in (0, 1], got {}", self.cfl));
        }
        Ok(())
    }

    /// Number of steps to reach `T`, rounding to the nearest whole step.
    pub fn steps(&self) -> u64 {
        (self.t_final / self.dt).round() as u64
    }
}

/// Time-independent forcing `f_L`, `f_ν` and its gradient form `∇_λ F`.
#[derive(Clone, Debug)]
pub struct Forcing {
    pub f_l: ScalarField3D,
    pub f_nu: SurfaceField2D,
    pub grad_f: VectorField3D,
}

impl Forcing {
    pub fn new(f_l: ScalarField3D, f_nu: SurfaceField2D, lambda: &LambdaProfile) -> Result<Self> {
        let grad_f = compute_forcing_f(&f_l, &f_nu, lambda)?;
        Ok(Forcing { f_l, f_nu, grad_f })
    }
}

/// Evolved state of the reformulated scheme.
#[derive(Clone, Debug)]
pub struct State {
    pub g: VectorField3D,
    pub psi: ScalarField3D,
    pub t: f64,
    pub step: u64,
}

/// State of the classical scheme: `q = L_λ Ψ` on cells, `θ_b = γ_ν(∇_λ Ψ)`.
#[derive(Clone, Debug)]
pub struct ClassicalState {
    pub q: ScalarField3D,
    pub theta: SurfaceField2D,
    pub psi: ScalarField3D,
    pub t: f64,
    pub step: u64,
}

/// Per-step information passed to observers.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepInfo {
    pub cfl_ratio: f64,
    pub reprojection_residual: f64,
}

fn zero_mean_mode(g: &mut VectorField3D) {
    let nm = g.grid.modes();
    for j in 0..=g.grid.nz {
        g.vertical[j * nm] = C64::new(0.0, 0.0);
    }
    for j in 0..g.grid.nz {
        g.h1[j * nm] = C64::new(0.0, 0.0);
        g.h2[j * nm] = C64::new(0.0, 0.0);
    }
}

fn inverse(grid: &Grid, plane: &[C64], mult: impl Fn(usize, usize) -> C64) -> Vec<f64> {
    let mut d: Vec<C64> = Vec::with_capacity(plane.len());
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            d.push(plane[iy * grid.nx + ix] * mult(ix, iy));
        }
    }
    grid.plane_inverse(&mut d);
    d.iter().map(|v| v.re).collect()
}

/// Physical `(∂₁f, ∂₂f)` of one spectral plane.
fn grad_phys(grid: &Grid, plane: &[C64]) -> [Vec<f64>; 2] {
    [inverse(grid, plane, |ix, _| I * grid.kx[ix]), inverse(grid, plane, |_, iy| I * grid.ky[iy])]
}

/// Physical `(-∂₂f, ∂₁f)` of one spectral plane.
fn perp_phys(grid: &Grid, plane: &[C64]) -> [Vec<f64>; 2] {
    [inverse(grid, plane, |_, iy| -I * grid.ky[iy]), inverse(grid, plane, |ix, _| I * grid.kx[ix])]
}

fn advect(grid: &Grid, u: &[f64], v: &[f64], grad: &[Vec<f64>; 2], scale: f64) -> Vec<C64> {
    let mut p: Vec<C64> = (0..u.len()).map(|m| C64::new(scale * (u[m] * grad[0][m] + v[m] * grad[1][m]), 0.0)).collect();
    grid.plane_forward(&mut p);
    for (x, &k) in p.iter_mut().zip(&grid.keep) {
        if !k {
            *x = C64::new(0.0, 0.0);
        }
    }
    p
}

fn max_speed(vel: &[[Vec<f64>; 2]]) -> f64 {
    vel.iter()
        .flat_map(|[a, b]| a.iter().zip(b).map(|(x, y)| (x * x + y * y).sqrt()))
        .fold(0.0, f64::max)
}

/// `∇̄^⊥ Ψ̃ · ∇̄ G`, dealiased, with `Ψ̃` the mollified potential. The
/// vertical component on interior faces uses the average velocity of the
/// adjacent cells; face 0 uses the surface velocity. Also returns the largest
/// advecting speed.
pub fn nonlinear_term(psi: &ScalarField3D, g: &VectorField3D, delta: f64) -> (VectorField3D, f64) {
    let grid = &psi.grid;
    let (nm, nz) = (grid.modes(), grid.nz);
    let mut pm = psi.clone();
    mollify_levels(grid, &mut pm.surface, delta);
    mollify_levels(grid, &mut pm.cells, delta);
    let mut vel: Vec<[Vec<f64>; 2]> = par::map_levels(nz + 1, |j| {
        if j == 0 {
            perp_phys(grid, &pm.surface)
        } else {
            perp_phys(grid, &pm.cells[(j - 1) * nm..j * nm])
        }
    });
    let umax = max_speed(&vel);
    let vb = vel.remove(0);
    let vc = vel;
    let faces: Vec<Vec<C64>> = par::map_levels(nz + 1, |j| {
        let gw = grad_phys(grid, &g.vertical[j * nm..(j + 1) * nm]);
        if j == 0 {
            advect(grid, &vb[0], &vb[1], &gw, 1.0)
        } else if j == nz {
            advect(grid, &vc[nz - 1][0], &vc[nz - 1][1], &gw, 0.5)
        } else {
            let u: Vec<f64> = vc[j - 1][0].iter().zip(&vc[j][0]).map(|(a, b)| 0.5 * (a + b)).collect();
            let v: Vec<f64> = vc[j - 1][1].iter().zip(&vc[j][1]).map(|(a, b)| 0.5 * (a + b)).collect();
            advect(grid, &u, &v, &gw, 1.0)
        }
    });
    let cells: Vec<[Vec<C64>; 2]> = par::map_levels(nz, |j| {
        let s = j * nm..(j + 1) * nm;
        let g1 = grad_phys(grid, &g.h1[s.clone()]);
        let g2 = grad_phys(grid, &g.h2[s]);
        [advect(grid, &vc[j][0], &vc[j][1], &g1, 1.0), advect(grid, &vc[j][0], &vc[j][1], &g2, 1.0)]
    });
    let mut out = VectorField3D::zeros(grid);
    for (j, p) in faces.into_iter().enumerate() {
        out.vertical[j * nm..(j + 1) * nm].copy_from_slice(&p);
    }
    for (j, [a, b]) in cells.into_iter().enumerate() {
        out.h1[j * nm..(j + 1) * nm].copy_from_slice(&a);
        out.h2[j * nm..(j + 1) * nm].copy_from_slice(&b);
    }
    (out, umax)
}

/// Exponential damping factors `e^{-r τ}` per horizontal mode.
fn damping(rate: &[f64], tau: f64) -> Vec<f64> {
    rate.iter().map(|r| (-r * tau).exp()).collect()
}

fn damp_levels(data: &mut [C64], f: &[f64]) {
    for p in data.chunks_mut(f.len()) {
        for (v, &a) in p.iter_mut().zip(f) {
            *v *= a;
        }
    }
}

trait Evolving: Clone {
    fn axpy_(&mut self, a: f64, o: &Self);
    fn damp(&mut self, f: &[f64]);
}

impl Evolving for VectorField3D {
    fn axpy_(&mut self, a: f64, o: &Self) {
        self.axpy(a, o)
    }
    fn damp(&mut self, f: &[f64]) {
        damp_levels(&mut self.vertical, f);
        damp_levels(&mut self.h1, f);
        damp_levels(&mut self.h2, f);
    }
}

#[derive(Clone)]
struct Pair(ScalarField3D, SurfaceField2D);

impl Evolving for Pair {
    fn axpy_(&mut self, a: f64, o: &Self) {
        self.0.axpy(a, &o.0);
        self.1.axpy(a, &o.1);
    }
    fn damp(&mut self, f: &[f64]) {
        damp_levels(&mut self.0.cells, f);
        damp_levels(&mut self.0.surface, f);
        damp_levels(&mut self.1.data, f);
    }
}

/// Integrating-factor RK4: `x' = -r x + R(x)` with the linear part exact.
fn if_rk4<S: Evolving>(x: &S, dt: f64, half: &[f64], full: &[f64], mut rhs: impl FnMut(&S, usize) -> Result<S>) -> Result<S> {
    let k1 = rhs(x, 0)?;
    let mut ehx = x.clone();
    ehx.damp(half);
    let mut y = x.clone();
    y.axpy_(0.5 * dt, &k1);
    y.damp(half);
    let k2 = rhs(&y, 1)?;
    let mut y = ehx.clone();
    y.axpy_(0.5 * dt, &k2);
    let k3 = rhs(&y, 2)?;
    let mut y = ehx.clone();
    y.damp(half);
    let mut ek3 = k3.clone();
    ek3.damp(half);
    y.axpy_(dt, &ek3);
    let k4 = rhs(&y, 3)?;
    let mut out = ehx;
    out.damp(half);
    let mut a = k1;
    a.damp(full);
    out.axpy_(dt / 6.0, &a);
    let mut b = k2;
    b.axpy_(1.0, &k3);
    b.damp(half);
    out.axpy_(dt / 3.0, &b);
    out.axpy_(dt / 6.0, &k4);
    Ok(out)
}

/// Grid, weight, solver settings and forcing of one run.
#[derive(Clone, Debug)]
pub struct Model {
    pub grid: Arc<Grid>,
    pub lambda: LambdaProfile,
    pub cfg: SolverConfig,
    pub forcing: Option<Forcing>,
    rate: Vec<f64>,
}

impl Model {
    pub fn new(grid: &Arc<Grid>, lambda: LambdaProfile, cfg: SolverConfig, forcing: Option<Forcing>) -> Result<Self> {
        cfg.validate()?;
        lambda.check_grid(grid)?;
        if let Some(f) = &forcing {
            grid.same_shape(&f.grad_f.grid)?;
        }
        let rate = hyperviscous_rate(grid, cfg.eps);
        Ok(Model { grid: grid.clone(), lambda, cfg, forcing, rate })
    }

    pub fn min_dx(&self) -> f64 {
        self.grid.dx.min(self.grid.dy)
    }

    /// State from a field `G`, projected onto the range of `∇_λ` with the
    /// horizontal mean removed.
    pub fn state_from_gradient(&self, g: &VectorField3D) -> Result<State> {
        let mut g = g.clone();
        g.dealias();
        zero_mean_mode(&mut g);
        let psi = potential(&g, &self.lambda)?;
        let g = grad_lambda(&psi, &self.lambda)?;
        Ok(State { g, psi, t: 0.0, step: 0 })
    }

    /// State from an analytic stream function `Ψ⁰(z, x₁, x₂)`.
    pub fn state_from_fn(&self, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Result<State> {
        self.state_from_gradient(&sample_grad_lambda(&self.grid, &self.lambda, f)?)
    }

    fn check_cfl(&self, umax: f64) -> Result<f64> {
        let ratio = self.cfg.dt * umax / self.min_dx();
        if ratio > self.cfg.cfl {
            return Err(QgError::CflViolation(format!("dt·|U|/dx = {ratio:.4} exceeds {}", self.cfg.cfl)));
        }
        Ok(ratio)
    }

    /// `Ψ e₁` projected and scaled by β.
    fn beta_term(&self, psi: &ScalarField3D) -> Result<Option<VectorField3D>> {
        if self.cfg.beta == 0.0 {
            return Ok(None);
        }
        let mut v = VectorField3D::zeros(&self.grid);
        v.h1.copy_from_slice(&psi.cells);
        Ok(Some(project_with(&v, &self.lambda)?))
    }

    /// `-P_λ(N) - β P_λ(Ψ e₁) + ∇_λ F`, hyperviscosity excluded. Returns the
    /// largest advecting speed as well.
    pub fn rhs_parts(&self, g: &VectorField3D) -> Result<(VectorField3D, f64, ScalarField3D)> {
        let psi = potential(g, &self.lambda)?;
        let (n, umax) = nonlinear_term(&psi, g, self.cfg.delta);
        let mut r = project_with(&n, &self.lambda)?;
        r.scale(-1.0);
        if let Some(b) = self.beta_term(&psi)? {
            r.axpy(-self.cfg.beta, &b);
        }
        if let Some(f) = &self.forcing {
            r.axpy(1.0, &f.grad_f);
        }
        Ok((r, umax, psi))
    }

    pub fn rhs_reformulated(&self, g: &VectorField3D) -> Result<VectorField3D> {
        Ok(self.rhs_parts(g)?.0)
    }

    /// One integrating-factor RK4 step followed by re-projection.
    pub fn step(&self, s: &State) -> Result<(State, StepInfo)> {
        let dt = self.cfg.dt;
        let half = damping(&self.rate, 0.5 * dt);
        let full = damping(&self.rate, dt);
        let mut cfl_ratio = 0.0;
        let g = if_rk4(&s.g, dt, &half, &full, |x, stage| {
            let (r, umax, _) = self.rhs_parts(x)?;
            if stage == 0 {
                cfl_ratio = self.check_cfl(umax)?;
            }
            Ok(r)
        })?;
        if !g.is_finite() {
            return Err(QgError::Diverged(format!("non-finite state at step {}", s.step + 1)));
        }
        let psi = potential(&g, &self.lambda)?;
        let gp = grad_lambda(&psi, &self.lambda)?;
        let gn = norm_vector(&g);
        let residual = if gn > 0.0 { norm_vector(&g.sub(&gp)) / gn } else { 0.0 };
        let step = s.step + 1;
        Ok((State { g: gp, psi, t: step as f64 * dt, step }, StepInfo { cfl_ratio, reprojection_residual: residual }))
    }

    /// Advances `n` steps, calling `observe` after each accepted step.
    pub fn run(&self, s: &State, n: u64, mut observe: impl FnMut(&State, &StepInfo) -> Result<()>) -> Result<State> {
        let mut s = s.clone();
        for _ in 0..n {
            let (next, info) = self.step(&s)?;
            s = next;
            observe(&s, &info)?;
        }
        Ok(s)
    }

    pub fn classical_from_state(&self, s: &State) -> ClassicalState {
        let nm = self.grid.modes();
        let theta = SurfaceField2D { grid: self.grid.clone(), data: s.g.vertical[..nm].iter().map(|v| -v).collect() };
        ClassicalState { q: div(&s.g), theta, psi: s.psi.clone(), t: s.t, step: s.step }
    }

    /// Potential with `L_λ Ψ = q` and `γ_ν(∇_λ Ψ) = θ_b`.
    pub fn recover(&self, q: &ScalarField3D, theta: &SurfaceField2D) -> Result<ScalarField3D> {
        solve_flux_unchecked(&theta.scaled(-1.0), &self.lambda, Some(q))
    }

    /// `(dq/dt, dθ_b/dt)` without hyperviscosity. The surface velocity is
    /// taken from the cell values by quadratic extrapolation to `z = 0`.
    pub fn classical_rhs(&self, q: &ScalarField3D, theta: &SurfaceField2D) -> Result<(ScalarField3D, SurfaceField2D, f64)> {
        let grid = &self.grid;
        let (nm, nz) = (grid.modes(), grid.nz);
        let psi = self.recover(q, theta)?;
        let mut pm = psi.clone();
        mollify_levels(grid, &mut pm.cells, self.cfg.delta);
        pm.extrapolate_surface();
        let vel: Vec<[Vec<f64>; 2]> = par::map_levels(nz + 1, |j| {
            if j == 0 {
                perp_phys(grid, &pm.surface)
            } else {
                perp_phys(grid, &pm.cells[(j - 1) * nm..j * nm])
            }
        });
        let umax = max_speed(&vel);
        let dq: Vec<Vec<C64>> = par::map_levels(nz, |j| {
            let gq = grad_phys(grid, &q.cells[j * nm..(j + 1) * nm]);
            advect(grid, &vel[j + 1][0], &vel[j + 1][1], &gq, -1.0)
        });
        let gt = grad_phys(grid, &theta.data);
        let mut dth = SurfaceField2D { grid: grid.clone(), data: advect(grid, &vel[0][0], &vel[0][1], &gt, -1.0) };
        let mut dqf = ScalarField3D::zeros(grid);
        for (j, p) in dq.into_iter().enumerate() {
            dqf.cells[j * nm..(j + 1) * nm].copy_from_slice(&p);
        }
        if self.cfg.beta != 0.0 {
            for j in 0..nz {
                for iy in 0..grid.ny {
                    for ix in 0..grid.nx {
                        let m = j * nm + iy * grid.nx + ix;
                        dqf.cells[m] -= I * grid.kx[ix] * psi.cells[m] * self.cfg.beta;
                    }
                }
            }
        }
        if let Some(f) = &self.forcing {
            dqf.axpy(1.0, &f.f_l);
            dth.axpy(1.0, &f.f_nu);
        }
        Ok((dqf, dth, umax))
    }

    pub fn classical_step(&self, s: &ClassicalState) -> Result<(ClassicalState, StepInfo)> {
        let dt = self.cfg.dt;
        let half = damping(&self.rate, 0.5 * dt);
        let full = damping(&self.rate, dt);
        let x = Pair(s.q.clone(), s.theta.clone());
        let mut cfl_ratio = 0.0;
        let y = if_rk4(&x, dt, &half, &full, |p, stage| {
            let (a, b, umax) = self.classical_rhs(&p.0, &p.1)?;
            if stage == 0 {
                cfl_ratio = self.check_cfl(umax)?;
            }
            Ok(Pair(a, b))
        })?;
        if !(y.0.is_finite() && y.1.is_finite()) {
            return Err(QgError::Diverged(format!("non-finite classical state at step {}", s.step + 1)));
        }
        let psi = self.recover(&y.0, &y.1)?;
        let step = s.step + 1;
        let state = ClassicalState { q: y.0, theta: y.1, psi, t: step as f64 * dt, step };
        Ok((state, StepInfo { cfl_ratio, reprojection_residual: 0.0 }))
    }

    /// `∇_λ Ψ` of a classical state.
    pub fn classical_gradient(&self, s: &ClassicalState) -> Result<VectorField3D> {
        grad_lambda(&s.psi, &self.lambda)
    }

    /// Frozen right-hand side `R(a)` of the Picard map for a candidate `a`.
    pub fn picard_forcing(&self, a: &VectorField3D) -> Result<VectorField3D> {
        Ok(self.rhs_parts(a)?.0)
    }

    /// `T_δ`: solves `G' = -ε(|k| + |k|³) G + R(a(t))`, `G(0) = G⁰`, with the
    /// candidate `a` given at `t_n = n·dt` and interpolated linearly between.
    pub fn picard_t_delta(&self, candidate: &[VectorField3D], g0: &VectorField3D) -> Result<Vec<VectorField3D>> {
        if self.cfg.eps <= 0.0 || self.cfg.delta <= 0.0 {
            return Err(QgError::InvalidParameter("the Picard map needs eps > 0 and delta > 0".into()));
        }
        if candidate.is_empty() {
            return Err(QgError::InvalidParameter("empty candidate trajectory".into()));
        }
        let dt = self.cfg.dt;
        let half = damping(&self.rate, 0.5 * dt);
        let full = damping(&self.rate, dt);
        let r: Vec<VectorField3D> = candidate.iter().map(|a| self.picard_forcing(a)).collect::<Result<_>>()?;
        let mut out = vec![g0.clone()];
        for n in 0..candidate.len() - 1 {
            let mid = r[n].add(&r[n + 1]).scaled(0.5);
            let next = if_rk4(out.last().unwrap(), dt, &half, &full, |_, stage| {
                Ok(match stage {
                    0 => r[n].clone(),
                    3 => r[n + 1].clone(),
                    _ => mid.clone(),
                })
            })?;
            out.push(next);
        }
        Ok(out)
    }

    /// `T_δ` for a candidate constant in time, evaluated exactly at time `t`:
    /// `e^{-rt} G⁰ + (1 - e^{-rt})/r · R(a)`.
    pub fn picard_constant(&self, r_a: &VectorField3D, g0: &VectorField3D, t: f64) -> VectorField3D {
        let e = damping(&self.rate, t);
        let phi: Vec<f64> = self.rate.iter().zip(&e).map(|(&r, &e)| if r > 0.0 { (1.0 - e) / r } else { t }).collect();
        let mut a = g0.clone();
        a.damp(&e);
        let mut b = r_a.clone();
        b.damp(&phi);
        a.add(&b)
    }
}

/// Contraction factors of `T_δ` measured over random candidate pairs.
#[derive(Clone, Debug)]
pub struct PicardReport {
    pub spans: Vec<f64>,
    /// Largest `‖T_a − T_b‖ / ‖a − b‖` over the pairs, per span.
    pub contraction: Vec<f64>,
    /// Largest tested span with factor below one.
    pub t0: Option<f64>,
    /// Span where the factor crosses one, located by bisection.
    pub t_cross: Option<f64>,
    /// `C` solved from `t = εδ⁴/(4C‖G⁰‖²)` at `t_cross`.
    pub constant: Option<f64>,
    pub norm_g0: f64,
}

fn contraction_at(model: &Model, diffs: &[(VectorField3D, f64)], t: f64) -> f64 {
    let zero = VectorField3D::zeros(&model.grid);
    diffs
        .iter()
        .map(|(dr, dn)| norm_vector(&model.picard_constant(dr, &zero, t)) / dn)
        .fold(0.0, f64::max)
}

impl Model {
    /// Candidates `a = G⁰ + d` with `‖d‖ ≤ ‖G⁰‖`, so `‖a‖ ≤ 2‖G⁰‖`, held
    /// constant in time. For such candidates `T_a − T_b` grows monotonically
    /// in time, so the sup over `[0, s]` is attained at `s`.
    pub fn picard_contraction_probe(&self, g0: &VectorField3D, spans: &[f64], pairs: usize, seed: u64) -> Result<PicardReport> {
        if self.cfg.eps <= 0.0 || self.cfg.delta <= 0.0 {
            return Err(QgError::InvalidParameter("the Picard map needs eps > 0 and delta > 0".into()));
        }
        let n0 = norm_vector(g0);
        if n0 == 0.0 || pairs == 0 {
            return Err(QgError::InvalidParameter("the probe needs nonzero data and at least one pair".into()));
        }
        let mut r = rng(seed);
        let spec = RandomSpec { kmax: 8, zero_mean: true, decay: (0.5, 2.0) };
        let mut candidate = || -> Result<VectorField3D> {
            let d = project_with(&random_vector(&self.grid, &mut r, &spec), &self.lambda)?;
            let radius: f64 = rand::Rng::random(&mut r);
            Ok(g0.add(&d.scaled(radius * n0 / norm_vector(&d))))
        };
        let mut diffs = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            let (a, b) = (candidate()?, candidate()?);
            let dr = self.picard_forcing(&a)?.sub(&self.picard_forcing(&b)?);
            diffs.push((dr, norm_vector(&a.sub(&b))));
        }
        let contraction: Vec<f64> = spans.iter().map(|&t| contraction_at(self, &diffs, t)).collect();
        let t0 = spans.iter().zip(&contraction).filter(|(_, &c)| c < 1.0).map(|(&t, _)| t).fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))));
        let t_cross = self.bisect_crossing(&diffs, spans.iter().cloned().fold(0.0, f64::max));
        let constant = t_cross.map(|t| self.cfg.eps * self.cfg.delta.powi(4) / (4.0 * t * n0 * n0));
        Ok(PicardReport { spans: spans.to_vec(), contraction, t0, t_cross, constant, norm_g0: n0 })
    }

    fn bisect_crossing(&self, diffs: &[(VectorField3D, f64)], hint: f64) -> Option<f64> {
        let mut hi = hint.max(1e-6);
        let mut grow = 0;
        while contraction_at(self, diffs, hi) < 1.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 40 {
                return None;
            }
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if contraction_at(self, diffs, mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}

fn project_with(u: &VectorField3D, lambda: &LambdaProfile) -> Result<VectorField3D> {
    crate::hodge::project(u, lambda)
}
