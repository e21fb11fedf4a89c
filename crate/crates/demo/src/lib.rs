//! WebAssembly bindings for the browser demo in `www/`.

use std::sync::Arc;

use qg_core::calculus::{norm_vector, LambdaProfile};
use qg_core::elliptic::solve_neumann;
use qg_core::hodge::decompose;
use qg_core::random::{random_surface, random_vector, rng, RandomSpec};
use qg_core::sqg::{SqgConfig, SqgSolver, SqgState};
use qg_core::{Grid, SurfaceField2D, VectorField3D};
use wasm_bindgen::prelude::*;

fn js(e: qg_core::QgError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Blue, white, red for negative, zero, positive values scaled by `scale`.
fn diverging(v: &[f64], scale: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * v.len());
    for &x in v {
        let s = if scale > 0.0 { (x / scale).clamp(-1.0, 1.0) } else { 0.0 };
        let (r, g, b) = if s >= 0.0 { (1.0, 1.0 - s, 1.0 - s) } else { (1.0 + s, 1.0 + s, 1.0) };
        out.extend_from_slice(&[(255.0 * r) as u8, (255.0 * g) as u8, (255.0 * b) as u8, 255]);
    }
    out
}

fn sequential(v: &[f64], scale: f64) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * v.len());
    for &x in v {
        let s = if scale > 0.0 { (x / scale).clamp(0.0, 1.0) } else { 0.0 };
        out.extend_from_slice(&[(255.0 * s) as u8, (255.0 * s * s) as u8, (255.0 * (1.0 - s) * 0.6) as u8, 255]);
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Surface buoyancy evolving under the SQG equation.
#[wasm_bindgen]
pub struct SqgDemo {
    solver: SqgSolver,
    state: SqgState,
    scale: f64,
}

#[wasm_bindgen]
impl SqgDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, amplitude: f64, eps: f64, seed: u64) -> Result<SqgDemo, JsValue> {
        let grid = Grid::new(1.0, n, n, 2, 1.0).map_err(js)?;
        let dt = 0.25 * grid.dx / amplitude.abs().max(1e-3);
        let solver = SqgSolver::new(&grid, SqgConfig { eps, delta: 0.0, dt, cfl: 0.9 }).map_err(js)?;
        let mut r = rng(seed);
        let th = random_surface(&grid, &mut r, &RandomSpec { kmax: 5, zero_mean: true, decay: (1.0, 1.0) });
        let th = th.scaled(amplitude / max_abs(&th.to_physical()));
        let mut state = solver.run(&th, 0).map_err(js)?.remove(0);
        state.t = 0.0;
        Ok(SqgDemo { solver, state, scale: amplitude.abs() })
    }

    pub fn step(&mut self, steps: u32) -> Result<(), JsValue> {
        for _ in 0..steps {
            self.state = self.solver.step(&self.state).map_err(js)?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn size(&self) -> usize {
        self.solver.grid.nx
    }

    /// `‖θ‖_{L²}`.
    pub fn l2(&self) -> f64 {
        qg_core::calculus::norm_surface(&self.state.theta)
    }

    pub fn rgba(&self) -> Vec<u8> {
        diverging(&self.state.theta.to_physical(), self.scale)
    }
}

/// Decomposition of a random field into its weighted gradient and curl
/// parts, shown on the plane `x₂ = 0`.
#[wasm_bindgen]
pub struct HodgeSlice {
    grid: Arc<Grid>,
    parts: [VectorField3D; 3],
}

#[wasm_bindgen]
impl HodgeSlice {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, nz: usize, big_lambda: f64, seed: u64) -> Result<HodgeSlice, JsValue> {
        let grid = Grid::new(1.0, n, n, nz, 6.0).map_err(js)?;
        let lam = LambdaProfile::tanh_stratified(&grid, big_lambda.max(1.0), 2.0, 1.0).map_err(js)?;
        let u = random_vector(&grid, &mut rng(seed), &RandomSpec { kmax: 4, zero_mean: false, decay: (0.5, 1.5) });
        let d = decompose(&u, &lam).map_err(js)?;
        Ok(HodgeSlice { grid, parts: [u, d.grad_part, d.curl_part] })
    }

    pub fn width(&self) -> usize {
        self.grid.nx
    }

    pub fn height(&self) -> usize {
        self.grid.nz
    }

    /// `‖u‖`, `‖P_λu‖`, `‖P_curl u‖`.
    pub fn norms(&self) -> Vec<f64> {
        self.parts.iter().map(norm_vector).collect()
    }

    /// Speed of part 0 (field), 1 (gradient) or 2 (curl) at the cells, top
    /// row at the surface. All parts share the colour scale of the field.
    pub fn rgba(&self, part: usize) -> Vec<u8> {
        let speed = |f: &VectorField3D| {
            let [w, u1, u2] = f.to_physical();
            let (nx, nm) = (self.grid.nx, self.grid.modes());
            let mut v = Vec::with_capacity(nx * self.grid.nz);
            for j in 0..self.grid.nz {
                for ix in 0..nx {
                    let wc = 0.5 * (w[j * nm + ix] + w[(j + 1) * nm + ix]);
                    let (a, b) = (u1[j * nm + ix], u2[j * nm + ix]);
                    v.push((wc * wc + a * a + b * b).sqrt());
                }
            }
            v
        };
        let scale = max_abs(&speed(&self.parts[0]));
        sequential(&speed(&self.parts[part.min(2)]), scale)
    }
}

/// Neumann solve with `λ ≡ c` and flux data `cos(m x₁)`, against
/// `e^{-mz/√c}/(m√c)`. Returns `z, computed, exact` triples at the cells.
#[wasm_bindgen]
pub fn lift_profile(m: u32, c: f64, nz: usize, zmax: f64) -> Result<Vec<f64>, JsValue> {
    let grid = Grid::new(1.0, 16, 16, nz, zmax).map_err(js)?;
    let lam = LambdaProfile::constant(&grid, c).map_err(js)?;
    let k = m.max(1) as f64;
    let g = SurfaceField2D::sample(&grid, |x, _| (k * x).cos());
    let psi = solve_neumann(&g, &lam, None).map_err(js)?;
    let phys = psi.to_physical();
    let nm = grid.modes();
    let mut out = Vec::with_capacity(3 * nz);
    for j in 0..nz {
        let z = grid.cell_z(j);
        out.extend_from_slice(&[z, phys[(j + 1) * nm], (-k * z / c.sqrt()).exp() / (k * c.sqrt())]);
    }
    Ok(out)
}
