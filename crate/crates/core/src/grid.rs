//! Periodic-horizontal, truncated-vertical grid and the per-level FFT.
//!
//! Horizontal domain is the torus `[0, 2π L_h)²` with `N_x × N_y` points.
//! Vertically `[0, Z_max]` is split into `N_z` cells of width `dz`.
//! Scalars live at cell centres `(j + 1/2) dz` plus one boundary value at
//! `z = 0`; vertical vector components live on the faces `j dz`.
//!
//! Spectral coefficients use `ĉ = (1/N) Σ f e^{-ik·x}`, so `cos x₁` has
//! coefficient `1/2` at `k = ±1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{QgError, Result};

pub type C64 = Complex64;

/// Grid geometry, wavenumber tables and cached FFT plans.
#[derive(Clone)]
pub struct Grid {
    pub lh: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub zmax: f64,
    pub dz: f64,
    pub dx: f64,
    pub dy: f64,
    /// Signed integer mode index along x₁ for each column.
    pub mx: Vec<i64>,
    /// Signed integer mode index along x₂ for each row.
    pub my: Vec<i64>,
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    /// `|k|²` per horizontal mode, row-major (`iy * nx + ix`).
    pub k2: Vec<f64>,
    /// `|k|` per horizontal mode.
    pub kabs: Vec<f64>,
    /// Two-thirds truncation mask.
    pub keep: Vec<bool>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("lh", &self.lh)
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("nz", &self.nz)
            .field("zmax", &self.zmax)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, o: &Self) -> bool {
        self.lh == o.lh && self.nx == o.nx && self.ny == o.ny && self.nz == o.nz && self.zmax == o.zmax
    }
}

fn signed_modes(n: usize) -> Vec<i64> {
    (0..n)
        .map(|i| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 })
        .collect()
}

/// Largest retained `|m|` under the two-thirds rule: `3|m| < n`.
pub fn dealias_cutoff(n: usize) -> i64 {
    ((n as i64) - 1) / 3
}

impl Grid {
    pub fn new(lh: f64, nx: usize, ny: usize, nz: usize, zmax: f64) -> Result<Arc<Grid>> {
        if !(lh > 0.0 && lh.is_finite()) {
            return Err(QgError::InvalidGrid(format!("L_h must be positive, got {lh}")));
        }
        if !(zmax > 0.0 && zmax.is_finite()) {
            return Err(QgError::InvalidGrid(format!("Z_max must be positive, got {zmax}")));
        }
        for (name, n) in [("N_x", nx), ("N_y", ny)] {
            if n < 4 || n % 2 != 0 {
                return Err(QgError::InvalidGrid(format!("{name} must be even and >= 4, got {n}")));
            }
        }
        if nz < 2 {
            return Err(QgError::InvalidGrid(format!("N_z must be >= 2, got {nz}")));
        }
        let mx = signed_modes(nx);
        let my = signed_modes(ny);
        let kx: Vec<f64> = mx.iter().map(|&m| m as f64 / lh).collect();
        let ky: Vec<f64> = my.iter().map(|&m| m as f64 / lh).collect();
        let cx = dealias_cutoff(nx);
        let cy = dealias_cutoff(ny);
        let nm = nx * ny;
        let mut k2 = Vec::with_capacity(nm);
        let mut keep = Vec::with_capacity(nm);
        for iy in 0..ny {
            for ix in 0..nx {
                k2.push(kx[ix] * kx[ix] + ky[iy] * ky[iy]);
                keep.push(mx[ix].abs() <= cx && my[iy].abs() <= cy);
            }
        }
        let kabs = k2.iter().map(|v| v.sqrt()).collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            lh,
            nx,
            ny,
            nz,
            zmax,
            dz: zmax / nz as f64,
            dx: 2.0 * PI * lh / nx as f64,
            dy: 2.0 * PI * lh / ny as f64,
            mx,
            my,
            kx,
            ky,
            k2,
            kabs,
            keep,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }))
    }

    /// Same horizontal grid with a different vertical resolution.
    pub fn with_nz(&self, nz: usize) -> Result<Arc<Grid>> {
        Grid::new(self.lh, self.nx, self.ny, nz, self.zmax)
    }

    pub fn modes(&self) -> usize {
        self.nx * self.ny
    }

    /// Horizontal area `(2π L_h)²`.
    pub fn area(&self) -> f64 {
        (2.0 * PI * self.lh).powi(2)
    }

    pub fn cell_z(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dz
    }

    pub fn face_z(&self, j: usize) -> f64 {
        j as f64 * self.dz
    }

    /// Trapezoid weights on faces `0..=nz`.
    pub fn face_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.nz {
            0.5 * self.dz
        } else {
            self.dz
        }
    }

    pub fn x1(&self, ix: usize) -> f64 {
        ix as f64 * self.dx
    }

    pub fn x2(&self, iy: usize) -> f64 {
        iy as f64 * self.dy
    }

    /// Index of the mode with integer indices `(m1, m2)`, if representable.
    pub fn mode_index(&self, m1: i64, m2: i64) -> Option<usize> {
        let ix = m1.rem_euclid(self.nx as i64) as usize;
        let iy = m2.rem_euclid(self.ny as i64) as usize;
        if self.mx[ix] != m1 || self.my[iy] != m2 {
            return None;
        }
        Some(iy * self.nx + ix)
    }

    pub fn same_shape(&self, o: &Grid) -> Result<()> {
        if self == o {
            Ok(())
        } else {
            Err(QgError::GridMismatch(format!("{self:?} vs {o:?}")))
        }
    }

    /// Physical values of one level to spectral coefficients, in place.
    pub fn plane_forward(&self, data: &mut [C64]) {
        self.plane_fft(data, &self.fwd_x, &self.fwd_y);
        let s = 1.0 / self.modes() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    /// Spectral coefficients of one level to physical values, in place.
    pub fn plane_inverse(&self, data: &mut [C64]) {
        self.plane_fft(data, &self.inv_x, &self.inv_y);
    }

    fn plane_fft(&self, data: &mut [C64], fx: &Arc<dyn Fft<f64>>, fy: &Arc<dyn Fft<f64>>) {
        let (nx, ny) = (self.nx, self.ny);
        debug_assert_eq!(data.len(), nx * ny);
        fx.process(data);
        let mut col = vec![C64::new(0.0, 0.0); ny];
        for ix in 0..nx {
            for iy in 0..ny {
                col[iy] = data[iy * nx + ix];
            }
            fy.process(&mut col);
            for iy in 0..ny {
                data[iy * nx + ix] = col[iy];
            }
        }
    }
}
