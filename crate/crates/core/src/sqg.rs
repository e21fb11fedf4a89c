//! Surface quasi-geostrophic equation on the torus, used as an oracle for the
//! harmonic case of the 3D solver.

use std::sync::Arc;

use crate::calculus::{hyperviscous_rate, mollify_levels};
use crate::error::{QgError, Result};
use crate::field::{ScalarField3D, SurfaceField2D, VectorField3D};
use crate::grid::{Grid, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn check_gauge(theta: &SurfaceField2D) -> Result<()> {
    let tol = 1e-12 * theta.max_abs().max(1e-300);
    if theta.data[0].norm() > tol {
        return Err(QgError::GaugeViolation(format!("mean mode {} must vanish", theta.data[0])));
    }
    Ok(())
}

/// `U = ∇^⊥ |k|^{-1} θ`: `û = -i k₂ θ̂/|k|`, `v̂ = i k₁ θ̂/|k|`.
pub fn sqg_velocity(theta: &SurfaceField2D) -> Result<[SurfaceField2D; 2]> {
    check_gauge(theta)?;
    let g = &theta.grid;
    let mut u = SurfaceField2D::zeros(g);
    let mut v = SurfaceField2D::zeros(g);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let m = iy * g.nx + ix;
            let k = g.kabs[m];
            if k > 0.0 {
                u.data[m] = -I * g.ky[iy] * theta.data[m] / k;
                v.data[m] = I * g.kx[ix] * theta.data[m] / k;
            }
        }
    }
    Ok([u, v])
}

/// Harmonic extension with `∂_z Ψ(0) = θ`: `Ψ̂(k, z) = -θ̂ e^{-|k|z}/|k|`.
pub fn lift_harmonic(theta: &SurfaceField2D, grid: &Arc<Grid>) -> Result<ScalarField3D> {
    check_gauge(theta)?;
    grid.same_shape(&theta.grid)?;
    let nm = grid.modes();
    let mut out = ScalarField3D::zeros(grid);
    for m in 1..nm {
        let k = grid.kabs[m];
        if k == 0.0 {
            continue;
        }
        let a = -theta.data[m] / k;
        for j in 0..grid.nz {
            out.cells[j * nm + m] = a * (-k * grid.cell_z(j)).exp();
        }
        out.surface[m] = (a * 8.0 - out.cells[m] * 3.0 + out.cells[nm + m]) / 6.0;
    }
    Ok(out)
}

/// Continuum gradient of [`lift_harmonic`] sampled on the staggered grid.
pub fn lift_harmonic_gradient(theta: &SurfaceField2D, grid: &Arc<Grid>) -> Result<VectorField3D> {
    let psi = lift_harmonic(theta, grid)?;
    let nm = grid.modes();
    let mut out = VectorField3D::zeros(grid);
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let m = iy * grid.nx + ix;
            let k = grid.kabs[m];
            if k == 0.0 {
                continue;
            }
            for j in 0..=grid.nz {
                out.vertical[j * nm + m] = theta.data[m] * (-k * grid.face_z(j)).exp();
            }
            for j in 0..grid.nz {
                let p = psi.cells[j * nm + m];
                out.h1[j * nm + m] = I * grid.kx[ix] * p;
                out.h2[j * nm + m] = I * grid.ky[iy] * p;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SqgConfig {
    pub eps: f64,
    pub delta: f64,
    pub dt: f64,
    pub cfl: f64,
}

#[derive(Clone, Debug)]
pub struct SqgState {
    pub theta: SurfaceField2D,
    pub t: f64,
    pub step: u64,
}

/// Pseudo-spectral SQG integrator with the same RK4 integrating factor and
/// two-thirds truncation as the 3D solver.
pub struct SqgSolver {
    pub grid: Arc<Grid>,
    pub cfg: SqgConfig,
    half: Vec<f64>,
    full: Vec<f64>,
}

impl SqgSolver {
    pub fn new(grid: &Arc<Grid>, cfg: SqgConfig) -> Result<Self> {
        if !(cfg.dt > 0.0) || cfg.eps < 0.0 || cfg.delta < 0.0 || !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
            return Err(QgError::InvalidParameter(format!("invalid SQG settings {cfg:?}")));
        }
        let rate = hyperviscous_rate(grid, cfg.eps);
        let half = rate.iter().map(|r| (-r * 0.5 * cfg.dt).exp()).collect();
        let full = rate.iter().map(|r| (-r * cfg.dt).exp()).collect();
        Ok(SqgSolver { grid: grid.clone(), cfg, half, full })
    }

    /// `-U·∇θ` with `U` from the mollified `θ`, and the largest speed.
    pub fn rhs(&self, theta: &SurfaceField2D) -> Result<(SurfaceField2D, f64)> {
        let g = &self.grid;
        let mut tm = theta.clone();
        mollify_levels(g, &mut tm.data, self.cfg.delta);
        let [u, v] = sqg_velocity(&tm)?;
        let (u, v) = (u.to_physical(), v.to_physical());
        let d = |mult: &dyn Fn(usize, usize) -> C64| {
            let mut p: Vec<C64> = (0..g.modes()).map(|m| theta.data[m] * mult(m % g.nx, m / g.nx)).collect();
            g.plane_inverse(&mut p);
            p.iter().map(|c| c.re).collect::<Vec<f64>>()
        };
        let tx = d(&|ix, _| I * g.kx[ix]);
        let ty = d(&|_, iy| I * g.ky[iy]);
        let mut umax = 0.0f64;
        let mut p: Vec<C64> = (0..g.modes())
            .map(|m| {
                umax = umax.max((u[m] * u[m] + v[m] * v[m]).sqrt());
                C64::new(-(u[m] * tx[m] + v[m] * ty[m]), 0.0)
            })
            .collect();
        g.plane_forward(&mut p);
        let mut out = SurfaceField2D { grid: g.clone(), data: p };
        out.dealias();
        Ok((out, umax))
    }

    pub fn step(&self, s: &SqgState) -> Result<SqgState> {
        let dt = self.cfg.dt;
        let damp = |mut x: SurfaceField2D, f: &[f64]| {
            x.data.iter_mut().zip(f).for_each(|(v, a)| *v *= *a);
            x
        };
        let (k1, umax) = self.rhs(&s.theta)?;
        let ratio = dt * umax / self.grid.dx.min(self.grid.dy);
        if ratio > self.cfg.cfl {
            return Err(QgError::CflViolation(format!("dt·|U|/dx = {ratio:.4} exceeds {}", self.cfg.cfl)));
        }
        let ehx = damp(s.theta.clone(), &self.half);
        let mut y = s.theta.clone();
        y.axpy(0.5 * dt, &k1);
        let (k2, _) = self.rhs(&damp(y, &self.half))?;
        let mut y = ehx.clone();
        y.axpy(0.5 * dt, &k2);
        let (k3, _) = self.rhs(&y)?;
        let mut y = damp(ehx.clone(), &self.half);
        y.axpy(dt, &damp(k3.clone(), &self.half));
        let (k4, _) = self.rhs(&y)?;
        let mut out = damp(ehx, &self.half);
        out.axpy(dt / 6.0, &damp(k1, &self.full));
        out.axpy(dt / 3.0, &damp(k2.add(&k3), &self.half));
        out.axpy(dt / 6.0, &k4);
        if !out.is_finite() {
            return Err(QgError::Diverged(format!("non-finite SQG state at step {}", s.step + 1)));
        }
        let step = s.step + 1;
        Ok(SqgState { theta: out, t: step as f64 * dt, step })
    }

    /// Runs `n` steps from `θ⁰`, returning every state including the first.
    pub fn run(&self, theta0: &SurfaceField2D, n: u64) -> Result<Vec<SqgState>> {
        check_gauge(theta0)?;
        let mut th = theta0.clone();
        th.dealias();
        let mut out = vec![SqgState { theta: th, t: 0.0, step: 0 }];
        for _ in 0..n {
            let next = self.step(out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }
}
