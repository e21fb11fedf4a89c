//! Field containers in spectral form.
//!
//! Physical layout of a [`ScalarField3D`] is `N_z + 1` planes: the boundary
//! value at `z = 0` followed by the cell centres. Each plane is row-major in
//! `(x₂, x₁)` with `x₁` fastest.

use std::sync::Arc;

use crate::error::{QgError, Result};
use crate::grid::{Grid, C64};
use crate::par;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn forward_levels(grid: &Grid, data: &mut [C64]) {
    par::levels_mut(data, grid.modes(), |_, p| grid.plane_forward(p));
}

fn inverse_levels(grid: &Grid, data: &mut [C64]) {
    par::levels_mut(data, grid.modes(), |_, p| grid.plane_inverse(p));
}

fn real_to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn dealias_levels(grid: &Grid, data: &mut [C64]) {
    let nm = grid.modes();
    for p in data.chunks_mut(nm) {
        for (v, &k) in p.iter_mut().zip(&grid.keep) {
            if !k {
                *v = ZERO;
            }
        }
    }
}

/// Sample `f` on the physical points of level set `zs`.
fn sample_levels(grid: &Grid, zs: &[f64], f: &(dyn Fn(f64, f64, f64) -> f64 + Sync)) -> Vec<C64> {
    let nm = grid.modes();
    let mut out = vec![ZERO; zs.len() * nm];
    par::levels_mut(&mut out, nm, |j, p| {
        let z = zs[j];
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                p[iy * grid.nx + ix] = C64::new(f(z, grid.x1(ix), grid.x2(iy)), 0.0);
            }
        }
        grid.plane_forward(p);
    });
    out
}

macro_rules! linear_ops {
    ($t:ty, $($f:ident),+) => {
        impl $t {
            /// `self += a * other`
            pub fn axpy(&mut self, a: f64, other: &Self) {
                $( for (x, y) in self.$f.iter_mut().zip(&other.$f) { *x += *y * a; } )+
            }
            pub fn scale(&mut self, a: f64) {
                $( self.$f.iter_mut().for_each(|x| *x *= a); )+
            }
            pub fn scaled(&self, a: f64) -> Self {
                let mut o = self.clone();
                o.scale(a);
                o
            }
            pub fn add(&self, other: &Self) -> Self {
                let mut o = self.clone();
                o.axpy(1.0, other);
                o
            }
            pub fn sub(&self, other: &Self) -> Self {
                let mut o = self.clone();
                o.axpy(-1.0, other);
                o
            }
            pub fn dealias(&mut self) {
                $( dealias_levels(&self.grid, &mut self.$f); )+
            }
            /// Largest coefficient modulus.
            pub fn max_abs(&self) -> f64 {
                let mut m = 0.0f64;
                $( for v in &self.$f { m = m.max(v.norm()); } )+
                m
            }
            pub fn is_finite(&self) -> bool {
                true $( && self.$f.iter().all(|v| v.re.is_finite() && v.im.is_finite()) )+
            }
        }
    };
}

/// Horizontal field on the surface `z = 0`.
#[derive(Clone, Debug)]
pub struct SurfaceField2D {
    pub grid: Arc<Grid>,
    pub data: Vec<C64>,
}

linear_ops!(SurfaceField2D, data);

impl SurfaceField2D {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SurfaceField2D { grid: grid.clone(), data: vec![ZERO; grid.modes()] }
    }

    pub fn from_physical(grid: &Arc<Grid>, values: &[f64]) -> Result<Self> {
        if values.len() != grid.modes() {
            return Err(QgError::GridMismatch(format!(
                "expected {} surface values, got {}",
                grid.modes(),
                values.len()
            )));
        }
        let mut data = real_to_complex(values);
        grid.plane_forward(&mut data);
        Ok(SurfaceField2D { grid: grid.clone(), data })
    }

    pub fn sample(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let data = sample_levels(grid, &[0.0], &|_, x, y| f(x, y));
        SurfaceField2D { grid: grid.clone(), data }
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let mut d = self.data.clone();
        self.grid.plane_inverse(&mut d);
        d.iter().map(|v| v.re).collect()
    }
}

/// Scalar on the cell centres plus its boundary value at `z = 0`.
///
/// For a potential the boundary value is a degree of freedom that fixes the
/// surface flux; for a smooth sampled function it equals `f(0) + dz² f''(0)/8`.
#[derive(Clone, Debug)]
pub struct ScalarField3D {
    pub grid: Arc<Grid>,
    pub surface: Vec<C64>,
    /// `N_z` planes at the cell centres.
    pub cells: Vec<C64>,
}

linear_ops!(ScalarField3D, surface, cells);

impl ScalarField3D {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let nm = grid.modes();
        ScalarField3D { grid: grid.clone(), surface: vec![ZERO; nm], cells: vec![ZERO; grid.nz * nm] }
    }

    pub fn cell(&self, j: usize) -> &[C64] {
        let nm = self.grid.modes();
        &self.cells[j * nm..(j + 1) * nm]
    }

    /// Samples `f(z, x₁, x₂)` at the cell centres; the boundary value is the
    /// flux-consistent combination `(8 f(0) - 3 f(dz/2) + f(3dz/2)) / 6`.
    pub fn sample(grid: &Arc<Grid>, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let zs: Vec<f64> = (0..grid.nz).map(|j| grid.cell_z(j)).collect();
        let cells = sample_levels(grid, &zs, &f);
        let f0 = sample_levels(grid, &[0.0], &f);
        let nm = grid.modes();
        let surface = (0..nm)
            .map(|m| (f0[m] * 8.0 - cells[m] * 3.0 + cells[nm + m]) / 6.0)
            .collect();
        ScalarField3D { grid: grid.clone(), surface, cells }
    }

    /// Builds a field from `N_z + 1` physical planes (surface first).
    pub fn from_physical(grid: &Arc<Grid>, values: &[f64]) -> Result<Self> {
        let nm = grid.modes();
        if values.len() != (grid.nz + 1) * nm {
            return Err(QgError::GridMismatch(format!(
                "expected {} values, got {}",
                (grid.nz + 1) * nm,
                values.len()
            )));
        }
        let mut data = real_to_complex(values);
        forward_levels(grid, &mut data);
        let cells = data.split_off(nm);
        Ok(ScalarField3D { grid: grid.clone(), surface: data, cells })
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.surface.clone();
        data.extend_from_slice(&self.cells);
        inverse_levels(&self.grid, &mut data);
        data.iter().map(|v| v.re).collect()
    }

    /// Sets the boundary value by quadratic extrapolation of the first cells.
    /// Used for derived scalars that only carry cell values.
    pub fn extrapolate_surface(&mut self) {
        let nm = self.grid.modes();
        for m in 0..nm {
            self.surface[m] = (self.cells[m] * 15.0 - self.cells[nm + m] * 10.0 + self.cells[2 * nm + m] * 3.0) / 8.0;
        }
    }
}

/// Vector field `(vertical, h1, h2)`: vertical component on the `N_z + 1`
/// faces, horizontal components at the `N_z` cell centres.
#[derive(Clone, Debug)]
pub struct VectorField3D {
    pub grid: Arc<Grid>,
    pub vertical: Vec<C64>,
    pub h1: Vec<C64>,
    pub h2: Vec<C64>,
}

linear_ops!(VectorField3D, vertical, h1, h2);

impl VectorField3D {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let nm = grid.modes();
        VectorField3D {
            grid: grid.clone(),
            vertical: vec![ZERO; (grid.nz + 1) * nm],
            h1: vec![ZERO; grid.nz * nm],
            h2: vec![ZERO; grid.nz * nm],
        }
    }

    /// Samples `(w, u₁, u₂)(z, x₁, x₂)`: `w` on faces, `u` at cell centres.
    pub fn sample(grid: &Arc<Grid>, f: impl Fn(f64, f64, f64) -> [f64; 3] + Sync) -> Self {
        let faces: Vec<f64> = (0..=grid.nz).map(|j| grid.face_z(j)).collect();
        let cells: Vec<f64> = (0..grid.nz).map(|j| grid.cell_z(j)).collect();
        VectorField3D {
            grid: grid.clone(),
            vertical: sample_levels(grid, &faces, &|z, x, y| f(z, x, y)[0]),
            h1: sample_levels(grid, &cells, &|z, x, y| f(z, x, y)[1]),
            h2: sample_levels(grid, &cells, &|z, x, y| f(z, x, y)[2]),
        }
    }

    pub fn face(&self, j: usize) -> &[C64] {
        let nm = self.grid.modes();
        &self.vertical[j * nm..(j + 1) * nm]
    }

    /// Physical values: faces of `w`, then cells of `u₁`, then cells of `u₂`.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let inv = |v: &Vec<C64>| {
            let mut d = v.clone();
            inverse_levels(&self.grid, &mut d);
            d.iter().map(|c| c.re).collect::<Vec<f64>>()
        };
        [inv(&self.vertical), inv(&self.h1), inv(&self.h2)]
    }

    pub fn from_physical(grid: &Arc<Grid>, w: &[f64], u1: &[f64], u2: &[f64]) -> Result<Self> {
        let nm = grid.modes();
        if w.len() != (grid.nz + 1) * nm || u1.len() != grid.nz * nm || u2.len() != grid.nz * nm {
            return Err(QgError::GridMismatch("vector component sizes do not match grid".into()));
        }
        let fwd = |v: &[f64]| {
            let mut d = real_to_complex(v);
            forward_levels(grid, &mut d);
            d
        };
        Ok(VectorField3D { grid: grid.clone(), vertical: fwd(w), h1: fwd(u1), h2: fwd(u2) })
    }
}
