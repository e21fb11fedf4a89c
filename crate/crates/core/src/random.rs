//! Seeded smooth band-limited random fields.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::field::{ScalarField3D, SurfaceField2D, VectorField3D};
use crate::grid::{Grid, C64};

/// Shape of the random fields.
#[derive(Clone, Copy, Debug)]
pub struct RandomSpec {
    /// Largest `|m₁|`, `|m₂|` with nonzero content.
    pub kmax: i64,
    /// Leave the horizontal mean mode empty.
    pub zero_mean: bool,
    /// Vertical decay rates are drawn from this range.
    pub decay: (f64, f64),
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec { kmax: 6, zero_mean: false, decay: (0.5, 2.0) }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cnormal(r: &mut ChaCha8Rng) -> C64 {
    C64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// Per mode, a profile `(a₀ + a₁ z + a₂ z²) e^{-b z}` with random complex `aᵢ`,
/// sampled at `zs`. Hermitian symmetry is imposed so physical values are real.
fn random_planes(grid: &Grid, r: &mut ChaCha8Rng, spec: &RandomSpec, zs: &[f64]) -> Vec<C64> {
    let nm = grid.modes();
    let mut out = vec![C64::new(0.0, 0.0); zs.len() * nm];
    let kmax = spec.kmax.min(crate::grid::dealias_cutoff(grid.nx)).min(crate::grid::dealias_cutoff(grid.ny));
    for m2 in -kmax..=kmax {
        for m1 in -kmax..=kmax {
            let (m1c, m2c) = (-m1, -m2);
            // visit each conjugate pair once
            if (m2, m1) < (m2c, m1c) {
                continue;
            }
            if m1 == 0 && m2 == 0 && spec.zero_mean {
                continue;
            }
            let a = grid.mode_index(m1, m2).expect("mode in range");
            let b = grid.mode_index(m1c, m2c).expect("mode in range");
            let k2 = (m1 * m1 + m2 * m2) as f64 / (grid.lh * grid.lh);
            let amp = 1.0 / (1.0 + k2);
            let coef = [cnormal(r) * amp, cnormal(r) * amp * 0.5, cnormal(r) * amp * 0.1];
            let rate = spec.decay.0 + (spec.decay.1 - spec.decay.0) * r.random::<f64>();
            for (j, &z) in zs.iter().enumerate() {
                let mut v = (coef[0] + coef[1] * z + coef[2] * z * z) * (-rate * z).exp();
                if a == b {
                    v = C64::new(v.re, 0.0);
                }
                out[j * nm + a] = v;
                out[j * nm + b] = v.conj();
            }
        }
    }
    out
}

pub fn random_scalar(grid: &Arc<Grid>, r: &mut ChaCha8Rng, spec: &RandomSpec) -> ScalarField3D {
    let mut zs = vec![0.0];
    zs.extend((0..grid.nz).map(|j| grid.cell_z(j)));
    let mut planes = random_planes(grid, r, spec, &zs);
    let nm = grid.modes();
    let cells = planes.split_off(nm);
    let surface = (0..nm).map(|m| (planes[m] * 8.0 - cells[m] * 3.0 + cells[nm + m]) / 6.0).collect();
    ScalarField3D { grid: grid.clone(), surface, cells }
}

pub fn random_vector(grid: &Arc<Grid>, r: &mut ChaCha8Rng, spec: &RandomSpec) -> VectorField3D {
    let faces: Vec<f64> = (0..=grid.nz).map(|j| grid.face_z(j)).collect();
    let cells: Vec<f64> = (0..grid.nz).map(|j| grid.cell_z(j)).collect();
    VectorField3D {
        grid: grid.clone(),
        vertical: random_planes(grid, r, spec, &faces),
        h1: random_planes(grid, r, spec, &cells),
        h2: random_planes(grid, r, spec, &cells),
    }
}

pub fn random_surface(grid: &Arc<Grid>, r: &mut ChaCha8Rng, spec: &RandomSpec) -> SurfaceField2D {
    SurfaceField2D { grid: grid.clone(), data: random_planes(grid, r, spec, &[0.0]) }
}
