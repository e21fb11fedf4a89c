//! Norm records, energy and Grönwall ledgers, weak-form residuals, inequality
//! reports and the vanishing-viscosity sweep.

use std::f64::consts::PI;

use rand::Rng;

use crate::calculus::{
    gamma_nu, grad, hs_norm_surface, hs_norm_vector, local_norm_vector, mixed_norm, norm_scalar, norm_surface, norm_vector, div,
};
use crate::dynamics::{Model, State, StepInfo};
use crate::error::Result;
use crate::field::{ScalarField3D, SurfaceField2D, VectorField3D};
use crate::grid::{Grid, C64};
use crate::hodge::potential;
use crate::random::rng;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// One row of the diagnostics stream.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub norm_grad_lambda_l2: f64,
    pub norm_l_lambda_l2: f64,
    pub norm_gamma_nu_l2: f64,
    pub norm_grad_l3: f64,
    pub norm_grad_l4_l83: f64,
    pub norm_grad_linf_l2: f64,
    /// `ε ‖Δ̄^{1/4} G‖²`
    pub diss_quarter: f64,
    /// `ε ‖Δ̄^{3/4} G‖²`
    pub diss_three_quarter: f64,
    pub gronwall_g: Option<f64>,
    pub cfl_ratio: f64,
    pub reprojection_residual: f64,
    /// `‖∂_t Ψ‖_{L²(Ḣ^{-3/2})}`, zero mode excluded.
    pub dt_psi_hm32_hom: f64,
    /// `‖∂_t Ψ‖_{L²(H^{-3/2})}`
    pub dt_psi_hm32_inh: f64,
}

pub const CSV_HEADER: &str = "t,norm_grad_lambda_L2,norm_L_lambda_L2,norm_gamma_nu_L2,norm_grad_L3,norm_grad_L4_L8over3,\
norm_grad_Linf_L2,eps_diss_Delta_1over4,eps_diss_Delta_3over4,G_eps,cfl_ratio,reprojection_residual,\
dt_psi_Hm3over2_hom,dt_psi_Hm3over2_inh";

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        let f = |v: f64| format!("{v:.15e}");
        let mut cols = vec![
            f(self.t),
            f(self.norm_grad_lambda_l2),
            f(self.norm_l_lambda_l2),
            f(self.norm_gamma_nu_l2),
            f(self.norm_grad_l3),
            f(self.norm_grad_l4_l83),
            f(self.norm_grad_linf_l2),
            f(self.diss_quarter),
            f(self.diss_three_quarter),
        ];
        cols.push(self.gronwall_g.map(f).unwrap_or_default());
        cols.extend([f(self.cfl_ratio), f(self.reprojection_residual), f(self.dt_psi_hm32_hom), f(self.dt_psi_hm32_inh)]);
        cols.join(",")
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.norm_grad_lambda_l2,
            self.norm_l_lambda_l2,
            self.norm_gamma_nu_l2,
            self.norm_grad_l3,
            self.norm_grad_l4_l83,
            self.norm_grad_linf_l2,
            self.diss_quarter,
            self.diss_three_quarter,
            self.gronwall_g.unwrap_or(0.0),
            self.cfl_ratio,
            self.reprojection_residual,
            self.dt_psi_hm32_hom,
            self.dt_psi_hm32_inh,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

fn weighted_cells(grid: &Grid, cells: &[C64], w: &[f64]) -> f64 {
    let s: f64 = cells
        .chunks(grid.modes())
        .map(|p| p.iter().zip(w).map(|(v, k)| v.norm_sqr() * k).sum::<f64>())
        .sum();
    (s * grid.dz * grid.area()).sqrt()
}

/// `G_ε = (2/ε + 2)‖Δ̄^{3/4}∇Ψ‖² + ‖γ_ν(Δ̄^{3/4} ∇_λ Ψ)‖²`.
pub fn gronwall_g(eps: f64, psi: &ScalarField3D, g: &VectorField3D) -> f64 {
    let a = hs_norm_vector(&grad(psi), 1.5);
    let b = hs_norm_surface(&gamma_nu(g), 1.5).unwrap_or(f64::NAN);
    (2.0 / eps + 2.0) * a * a + b * b
}

/// Norm record of a state. Costs one extra right-hand-side evaluation for
/// the time derivative of `Ψ`.
pub fn energy_report(model: &Model, s: &State, info: &StepInfo) -> Result<DiagnosticsRecord> {
    let grid = &model.grid;
    let eps = model.cfg.eps;
    let gp = grad(&s.psi);
    let g = &s.g;
    let mut dg = model.rhs_reformulated(g)?;
    let rate = crate::calculus::hyperviscous_rate(grid, eps);
    let nm = grid.modes();
    for (d, src) in [(&mut dg.vertical, &g.vertical), (&mut dg.h1, &g.h1), (&mut dg.h2, &g.h2)] {
        for (i, v) in d.iter_mut().enumerate() {
            *v -= src[i] * rate[i % nm];
        }
    }
    let dpsi = potential(&dg, &model.lambda)?;
    let hom: Vec<f64> = grid.kabs.iter().map(|&k| if k == 0.0 { 0.0 } else { k.powi(-3) }).collect();
    let inh: Vec<f64> = grid.k2.iter().map(|&k2| (1.0 + k2).powf(-1.5)).collect();
    let hq = hs_norm_vector(g, 0.5);
    let h3 = hs_norm_vector(g, 1.5);
    Ok(DiagnosticsRecord {
        t: s.t,
        norm_grad_lambda_l2: norm_vector(g),
        norm_l_lambda_l2: norm_scalar(&div(g)),
        norm_gamma_nu_l2: norm_surface(&gamma_nu(g)),
        norm_grad_l3: mixed_norm(&gp, 3.0, 3.0),
        norm_grad_l4_l83: mixed_norm(&gp, 4.0, 8.0 / 3.0),
        norm_grad_linf_l2: mixed_norm(&gp, f64::INFINITY, 2.0),
        diss_quarter: eps * hq * hq,
        diss_three_quarter: eps * h3 * h3,
        gronwall_g: (eps > 0.0).then(|| gronwall_g(eps, &s.psi, g)),
        cfl_ratio: info.cfl_ratio,
        reprojection_residual: info.reprojection_residual,
        dt_psi_hm32_hom: weighted_cells(grid, &dpsi.cells, &hom),
        dt_psi_hm32_inh: weighted_cells(grid, &dpsi.cells, &inh),
    })
}

/// Cumulative integral of equally spaced samples: composite Simpson on an
/// even number of intervals, Simpson plus a closing 3/8 panel on an odd
/// number, trapezoid for a single interval.
pub fn cumulative_simpson(v: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for n in 1..v.len() {
        out[n] = if n == 1 {
            0.5 * h * (v[0] + v[1])
        } else if n % 2 == 0 {
            simpson(&v[..=n], h)
        } else {
            simpson(&v[..=n - 3], h) + 3.0 * h / 8.0 * (v[n - 3] + 3.0 * v[n - 2] + 3.0 * v[n - 1] + v[n])
        };
    }
    out
}

fn simpson(v: &[f64], h: f64) -> f64 {
    let n = v.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let mut s = v[0] + v[n];
    for (i, x) in v.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 * x } else { 2.0 * x };
    }
    s * h / 3.0
}

/// Energy ledger for the interior and the surface.
#[derive(Clone, Debug, Default)]
pub struct EnergyLedger {
    pub eps: f64,
    pub dt: f64,
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub surface_energy: Vec<f64>,
    pub surface_dissipation: Vec<f64>,
    pub enstrophy: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EnergyReport {
    /// `max_t (‖G(t)‖² + 2ε∫D − ‖G⁰‖²)/‖G⁰‖²`, clipped below at 0.
    pub violation: f64,
    pub surface_violation: f64,
    /// Largest relative increase of `‖L_λΨ‖²` between samples.
    pub enstrophy_increase: f64,
}

impl EnergyLedger {
    pub fn new(eps: f64, dt: f64) -> Self {
        EnergyLedger { eps, dt, ..Default::default() }
    }

    pub fn push(&mut self, s: &State) {
        let g = &s.g;
        let th = gamma_nu(g);
        let sq = |v: f64| v * v;
        self.t.push(s.t);
        self.energy.push(sq(norm_vector(g)));
        self.dissipation.push(sq(hs_norm_vector(g, 0.5)) + sq(hs_norm_vector(g, 1.5)));
        self.surface_energy.push(sq(norm_surface(&th)));
        self.surface_dissipation
            .push(sq(hs_norm_surface(&th, 0.5).unwrap_or(0.0)) + sq(hs_norm_surface(&th, 1.5).unwrap_or(0.0)));
        self.enstrophy.push(sq(norm_scalar(&div(g))));
    }

    fn violation(&self, e: &[f64], d: &[f64]) -> f64 {
        if e.is_empty() || e[0] == 0.0 {
            return 0.0;
        }
        let i = cumulative_simpson(d, self.dt);
        e.iter().zip(&i).map(|(e_t, i_t)| (e_t + 2.0 * self.eps * i_t - e[0]) / e[0]).fold(0.0, f64::max)
    }

    pub fn report(&self) -> EnergyReport {
        let enstrophy_increase = self
            .enstrophy
            .windows(2)
            .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else { 0.0 })
            .fold(0.0, f64::max);
        EnergyReport {
            violation: self.violation(&self.energy, &self.dissipation),
            surface_violation: self.violation(&self.surface_energy, &self.surface_dissipation),
            enstrophy_increase,
        }
    }
}

/// Grönwall ledger: `‖L_λΨ(t)‖² ≤ (‖L_λΨ⁰‖² + 1) e^{∫G_ε} − 1`.
#[derive(Clone, Debug, Default)]
pub struct GronwallMonitor {
    pub eps: f64,
    pub dt: f64,
    pub g: Vec<f64>,
    pub enstrophy: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GronwallReport {
    pub integral: f64,
    /// Largest `lhs/rhs` over the trajectory.
    pub worst_ratio: f64,
    pub holds: bool,
}

impl GronwallMonitor {
    pub fn new(eps: f64, dt: f64) -> Self {
        GronwallMonitor { eps, dt, ..Default::default() }
    }

    pub fn push(&mut self, s: &State) {
        let q = norm_scalar(&div(&s.g));
        self.enstrophy.push(q * q);
        self.g.push(if self.eps > 0.0 { gronwall_g(self.eps, &s.psi, &s.g) } else { 0.0 });
    }

    pub fn report(&self) -> GronwallReport {
        let mut integral = 0.0;
        let mut worst: f64 = 0.0;
        let mut holds = true;
        let q0 = self.enstrophy.first().copied().unwrap_or(0.0);
        for n in 0..self.g.len() {
            if n > 0 {
                integral += 0.5 * self.dt * (self.g[n - 1] + self.g[n]);
            }
            let rhs = (q0 + 1.0) * integral.exp() - 1.0;
            let lhs = self.enstrophy[n];
            if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
                holds = false;
            }
            if rhs > 0.0 {
                worst = worst.max(lhs / rhs);
            }
        }
        GronwallReport { integral, worst_ratio: worst, holds }
    }
}

/// Smooth bump `exp(1 - 1/(1 - s²))` on `|s| < 1` and its derivative.
pub fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - s * s;
    let b = (1.0 - 1.0 / d).exp();
    (b, -2.0 * s / (d * d) * b)
}

/// Separable test function `b_t(t) b_z(z) b₁(x₁) b₂(x₂)`; horizontal bumps
/// are periodised.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub t: (f64, f64),
    pub z: (f64, f64),
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

fn periodic_offset(x: f64, c: f64, period: f64) -> f64 {
    let mut d = (x - c).rem_euclid(period);
    if d > 0.5 * period {
        d -= period;
    }
    d
}

impl TestFunction {
    fn factor(&(c, w): &(f64, f64), x: f64) -> (f64, f64) {
        let (b, db) = bump((x - c) / w);
        (b, db / w)
    }

    pub fn time(&self, t: f64) -> (f64, f64) {
        Self::factor(&self.t, t)
    }

    pub fn depth(&self, z: f64) -> f64 {
        Self::factor(&self.z, z).0
    }

    /// Horizontal factor on the grid points and its spectral gradient, so
    /// that discrete horizontal integration by parts is exact.
    pub fn horizontal(&self, grid: &Grid) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let period = 2.0 * PI * grid.lh;
        let mut v = Vec::with_capacity(grid.modes());
        for iy in 0..grid.ny {
            let b2 = Self::factor(&(0.0, self.x2.1), periodic_offset(grid.x2(iy), self.x2.0, period)).0;
            for ix in 0..grid.nx {
                let b1 = Self::factor(&(0.0, self.x1.1), periodic_offset(grid.x1(ix), self.x1.0, period)).0;
                v.push(b1 * b2);
            }
        }
        let mut hat: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        grid.plane_forward(&mut hat);
        let d1 = physical(grid, &hat, |ix, _| I * grid.kx[ix]);
        let d2 = physical(grid, &hat, |_, iy| I * grid.ky[iy]);
        (v, d1, d2)
    }
}

/// Fixed seeded battery of 8 test functions for a run of length `t_final`.
pub fn test_battery(seed: u64, grid: &Grid, t_final: f64) -> Vec<TestFunction> {
    let mut r = rng(seed);
    let period = 2.0 * PI * grid.lh;
    (0..8)
        .map(|_| {
            let tw = t_final * (0.25 + 0.2 * r.random::<f64>());
            let tc = t_final * 0.5 * r.random::<f64>();
            let zw = 1.0 + r.random::<f64>();
            let zc = r.random::<f64>().min(0.5 * grid.zmax - zw);
            TestFunction {
                t: (tc, tw),
                z: (zc, zw),
                x1: (period * r.random::<f64>(), 1.0 + 1.5 * r.random::<f64>()),
                x2: (period * r.random::<f64>(), 1.0 + 1.5 * r.random::<f64>()),
            }
        })
        .collect()
}

fn physical(grid: &Grid, plane: &[C64], mult: impl Fn(usize, usize) -> C64) -> Vec<f64> {
    let mut d: Vec<C64> = (0..grid.modes()).map(|m| plane[m] * mult(m % grid.nx, m / grid.nx)).collect();
    grid.plane_inverse(&mut d);
    d.iter().map(|v| v.re).collect()
}

/// Streaming weak-form residuals of the interior and surface transport
/// equations against a test-function battery, trapezoid rule in time.
#[derive(Clone, Debug)]
pub struct WeakResiduals {
    pub battery: Vec<TestFunction>,
    pub dt: f64,
    pub beta: f64,
    horiz: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    interior: Vec<f64>,
    boundary: Vec<f64>,
    last: Option<(f64, Vec<f64>, Vec<f64>)>,
    forcing: Option<(ScalarField3D, SurfaceField2D)>,
}

impl WeakResiduals {
    pub fn new(battery: Vec<TestFunction>, model: &Model) -> Self {
        let horiz = battery.iter().map(|f| f.horizontal(&model.grid)).collect();
        let n = battery.len();
        WeakResiduals {
            battery,
            dt: model.cfg.dt,
            beta: model.cfg.beta,
            horiz,
            interior: vec![0.0; n],
            boundary: vec![0.0; n],
            last: None,
            forcing: model.forcing.as_ref().map(|f| (f.f_l.clone(), f.f_nu.clone())),
        }
    }

    /// Space integrals of the time-`t` integrands for every test function.
    fn integrands(&self, s: &State) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let grid = &s.g.grid;
        let (nm, nz) = (grid.modes(), grid.nz);
        let da = grid.dx * grid.dy;
        let q = div(&s.g);
        let theta = gamma_nu(&s.g);
        let nb = self.battery.len();
        let (mut vi, mut vb, mut init_i, mut init_b) = (vec![0.0; nb], vec![0.0; nb], vec![0.0; nb], vec![0.0; nb]);
        let level = |plane_psi: &[C64], plane_q: &[C64], f: Option<&[C64]>, z: Option<f64>, w: f64, out: &mut Vec<f64>, init: &mut Vec<f64>| {
            let u = physical(grid, plane_psi, |_, iy| -I * grid.ky[iy]);
            let v = physical(grid, plane_psi, |ix, _| I * grid.kx[ix]);
            let dpsi1 = physical(grid, plane_psi, |ix, _| I * grid.kx[ix]);
            let qq = physical(grid, plane_q, |_, _| C64::new(1.0, 0.0));
            let ff = f.map(|p| physical(grid, p, |_, _| C64::new(1.0, 0.0)));
            for (k, tf) in self.battery.iter().enumerate() {
                let (phi_t, dphi_t) = tf.time(s.t);
                let zf = z.map_or(1.0, |z| tf.depth(z));
                if zf == 0.0 || (phi_t == 0.0 && dphi_t == 0.0) {
                    continue;
                }
                let (hv, h1, h2) = &self.horiz[k];
                let mut acc = 0.0;
                let mut acc0 = 0.0;
                for m in 0..nm {
                    let adv = u[m] * h1[m] + v[m] * h2[m];
                    let mut val = (dphi_t * hv[m] + phi_t * adv) * qq[m];
                    if let Some(ff) = &ff {
                        val += phi_t * hv[m] * ff[m];
                    }
                    if z.is_some() && self.beta != 0.0 {
                        val -= self.beta * phi_t * hv[m] * dpsi1[m];
                    }
                    acc += val;
                    acc0 += hv[m] * qq[m];
                }
                out[k] += w * zf * acc * da;
                init[k] += w * zf * acc0 * da;
            }
        };
        for j in 0..nz {
            let f = self.forcing.as_ref().map(|f| &f.0.cells[j * nm..(j + 1) * nm]);
            level(&s.psi.cells[j * nm..(j + 1) * nm], &q.cells[j * nm..(j + 1) * nm], f, Some(grid.cell_z(j)), grid.dz, &mut vi, &mut init_i);
        }
        let f = self.forcing.as_ref().map(|f| &f.1.data[..]);
        level(&s.psi.surface, &theta.data, f, None, 1.0, &mut vb, &mut init_b);
        (vi, vb, init_i, init_b)
    }

    pub fn push(&mut self, s: &State) {
        let (vi, vb, init_i, init_b) = self.integrands(s);
        match &self.last {
            None => {
                for k in 0..self.battery.len() {
                    let phi0 = self.battery[k].time(s.t).0;
                    self.interior[k] += phi0 * init_i[k];
                    self.boundary[k] += phi0 * init_b[k];
                }
            }
            Some((_, pi, pb)) => {
                for k in 0..self.battery.len() {
                    self.interior[k] += 0.5 * self.dt * (pi[k] + vi[k]);
                    self.boundary[k] += 0.5 * self.dt * (pb[k] + vb[k]);
                }
            }
        }
        self.last = Some((s.t, vi, vb));
    }

    /// `(interior, boundary)` residual per test function.
    pub fn residuals(&self) -> (Vec<f64>, Vec<f64>) {
        (self.interior.clone(), self.boundary.clone())
    }

    pub fn max_abs(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        (m(&self.interior), m(&self.boundary))
    }
}

/// Left and right sides of one inequality with their ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        Inequality { lhs, rhs, ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 } }
    }
}

/// Both a-priori estimates: norms of `G` controlled by
/// `‖γ_ν(G)‖ + ‖L_λΨ‖ + ‖G‖`.
#[derive(Clone, Debug)]
pub struct AprioriReport {
    pub energy_trace: Inequality,
    pub sobolev: Inequality,
}

pub fn apriori_check(s: &State) -> AprioriReport {
    let g = &s.g;
    let grid = &g.grid;
    let nm = grid.modes();
    let rhs = norm_surface(&gamma_nu(g)) + norm_scalar(&div(g)) + norm_vector(g);
    let inh: Vec<f64> = grid.k2.iter().map(|k2| (1.0 + k2).sqrt()).collect();
    let mut h12 = 0.0;
    for j in 0..=grid.nz {
        h12 += grid.face_weight(j) * g.face(j).iter().zip(&inh).map(|(v, w)| v.norm_sqr() * w).sum::<f64>();
    }
    for c in [&g.h1, &g.h2] {
        h12 += grid.dz * c.chunks(nm).map(|p| p.iter().zip(&inh).map(|(v, w)| v.norm_sqr() * w).sum::<f64>()).sum::<f64>();
    }
    let h12 = (h12 * grid.area()).sqrt();
    // trace of the vector: vertical face-0 value with the horizontal gradient of the boundary value
    let mut tr = 0.0;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let m = iy * grid.nx + ix;
            tr += g.vertical[m].norm_sqr() + s.psi.surface[m].norm_sqr() * grid.k2[m];
        }
    }
    let tr = (tr * grid.area()).sqrt();
    let sup = (0..=grid.nz).map(|j| g.face(j).iter().map(|v| v.norm_sqr()).sum::<f64>()).fold(0.0f64, f64::max);
    let sup_h = (0..grid.nz)
        .map(|j| g.h1[j * nm..(j + 1) * nm].iter().chain(&g.h2[j * nm..(j + 1) * nm]).map(|v| v.norm_sqr()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let c0 = ((sup + sup_h) * grid.area()).sqrt();
    AprioriReport {
        energy_trace: Inequality::new(h12 + tr + c0, rhs),
        sobolev: Inequality::new(mixed_norm(g, 3.0, 3.0) + mixed_norm(g, 4.0, 8.0 / 3.0), rhs),
    }
}

/// Two sides of `⟨∇φ, ∇̄^⊥Ψ·∇̄G⟩ = ∫(∇̄φ·∇̄^⊥Ψ) L_λΨ − ∫_{z=0}(∇̄φ·∇̄^⊥Ψ) γ_ν(G)`
/// for a potential-type test field `φ`, plus the empirical constant of the
/// flux bound `‖∇̄^⊥Ψ ⊗ G‖_{L²(Ḣ^{-1/2})} ≤ C (‖γ_ν‖ + ‖L_λΨ‖ + ‖G‖)²`.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub flux_bound: Inequality,
}

pub fn equivalence_check(s: &State, phi: &ScalarField3D) -> EquivalenceReport {
    let g = &s.g;
    let grid = &g.grid;
    let (nm, nz) = (grid.modes(), grid.nz);
    let (n, _) = crate::dynamics::nonlinear_term(&s.psi, g, 0.0);
    let lhs = crate::calculus::inner_vector(&grad(phi), &n);
    let q = div(g);
    let theta = gamma_nu(g);
    let da = grid.dx * grid.dy;
    let pair = |psi: &[C64], ph: &[C64], sc: &[C64]| {
        let u = physical(grid, psi, |_, iy| -I * grid.ky[iy]);
        let v = physical(grid, psi, |ix, _| I * grid.kx[ix]);
        let p1 = physical(grid, ph, |ix, _| I * grid.kx[ix]);
        let p2 = physical(grid, ph, |_, iy| I * grid.ky[iy]);
        let sv = physical(grid, sc, |_, _| C64::new(1.0, 0.0));
        (0..nm).map(|m| (p1[m] * u[m] + p2[m] * v[m]) * sv[m]).sum::<f64>() * da
    };
    let mut rhs = 0.0;
    for j in 0..nz {
        let s_ = j * nm..(j + 1) * nm;
        rhs += grid.dz * pair(&s.psi.cells[s_.clone()], &phi.cells[s_.clone()], &q.cells[s_]);
    }
    rhs -= pair(&s.psi.surface, &phi.surface, &theta.data);
    // tensor components U_i G_j at the cells, vertical component averaged
    let w: Vec<f64> = grid.kabs.iter().map(|&k| if k == 0.0 { 0.0 } else { 1.0 / k }).collect();
    let mut t2 = 0.0;
    for j in 0..nz {
        let s_ = j * nm..(j + 1) * nm;
        let u = physical(grid, &s.psi.cells[s_.clone()], |_, iy| -I * grid.ky[iy]);
        let v = physical(grid, &s.psi.cells[s_.clone()], |ix, _| I * grid.kx[ix]);
        let gz: Vec<f64> = {
            let a = physical(grid, g.face(j), |_, _| C64::new(1.0, 0.0));
            let b = physical(grid, g.face(j + 1), |_, _| C64::new(1.0, 0.0));
            a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect()
        };
        let g1 = physical(grid, &g.h1[s_.clone()], |_, _| C64::new(1.0, 0.0));
        let g2 = physical(grid, &g.h2[s_], |_, _| C64::new(1.0, 0.0));
        for ui in [&u, &v] {
            for gj in [&gz, &g1, &g2] {
                let mut p: Vec<C64> = (0..nm).map(|m| C64::new(ui[m] * gj[m], 0.0)).collect();
                grid.plane_forward(&mut p);
                t2 += grid.dz * p.iter().zip(&w).map(|(c, k)| c.norm_sqr() * k).sum::<f64>();
            }
        }
    }
    let flux = (t2 * grid.area()).sqrt();
    let r = norm_surface(&theta) + norm_scalar(&q) + norm_vector(g);
    EquivalenceReport { lhs, rhs, flux_bound: Inequality::new(flux, r * r) }
}

/// Sup-in-time local `L²` distances between consecutive runs stepped in
/// lockstep. Run `i` uses `models[i]` from `starts[i]`.
pub fn lockstep_gaps(models: &[Model], starts: &[State], n_steps: u64, zcut: f64) -> Result<Vec<f64>> {
    let mut states: Vec<State> = starts.to_vec();
    let mut gaps = vec![0.0f64; states.len().saturating_sub(1)];
    let measure = |states: &[State], gaps: &mut Vec<f64>| {
        for i in 0..gaps.len() {
            gaps[i] = gaps[i].max(local_norm_vector(&states[i].g.sub(&states[i + 1].g), zcut));
        }
    };
    measure(&states, &mut gaps);
    for _ in 0..n_steps {
        for (s, m) in states.iter_mut().zip(models) {
            *s = m.step(s)?.0;
        }
        measure(&states, &mut gaps);
    }
    Ok(gaps)
}

#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub eps: Vec<f64>,
    /// Distance between the runs at `eps[i]` and `eps[i+1]`.
    pub gaps: Vec<f64>,
    pub strictly_decreasing: bool,
}

/// Runs one trajectory per `ε_n` and reports successive gaps on the window
/// `[0, Z_max/2]`.
pub fn stability_experiment(base: &Model, s0: &State, eps: &[f64]) -> Result<StabilityReport> {
    let models: Vec<Model> = eps
        .iter()
        .map(|&e| {
            let mut cfg = base.cfg.clone();
            cfg.eps = e;
            Model::new(&base.grid, base.lambda.clone(), cfg, base.forcing.clone())
        })
        .collect::<Result<_>>()?;
    let starts = vec![s0.clone(); eps.len()];
    let gaps = lockstep_gaps(&models, &starts, base.cfg.steps(), 0.5 * base.grid.zmax)?;
    let strictly_decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(StabilityReport { eps: eps.to_vec(), gaps, strictly_decreasing })
}

/// Sup-in-time local `L²` distance between the run from `s0` and runs from
/// `G⁰ + a‖G⁰‖d` for a fixed seeded unit direction `d`, one per amplitude `a`.
pub fn perturbation_experiment(model: &Model, s0: &State, amplitudes: &[f64], seed: u64) -> Result<Vec<f64>> {
    let mut r = rng(seed);
    let spec = crate::random::RandomSpec { kmax: 4, zero_mean: true, decay: (0.5, 2.0) };
    let d = crate::hodge::project(&crate::random::random_vector(&model.grid, &mut r, &spec), &model.lambda)?;
    let d = d.scaled(norm_vector(&s0.g) / norm_vector(&d));
    let zcut = 0.5 * model.grid.zmax;
    amplitudes
        .iter()
        .map(|&a| {
            let p = model.state_from_gradient(&s0.g.add(&d.scaled(a)))?;
            let models = [model.clone(), model.clone()];
            Ok(lockstep_gaps(&models, &[s0.clone(), p], model.cfg.steps(), zcut)?[0])
        })
        .collect()
}
