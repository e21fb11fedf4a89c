//! Weighted vertical profile, differential operators, traces and norms.

use std::sync::Arc;

use crate::error::{QgError, Result};
use crate::field::{ScalarField3D, SurfaceField2D, VectorField3D};
use crate::grid::{Grid, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Vertical weight `λ(z)` with `1/Λ ≤ λ ≤ Λ`, sampled on faces and cells.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaProfile {
    pub big_lambda: f64,
    pub faces: Vec<f64>,
    pub cells: Vec<f64>,
}

impl LambdaProfile {
    pub fn from_fn(grid: &Grid, big_lambda: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(big_lambda >= 1.0 && big_lambda.is_finite()) {
            return Err(QgError::LambdaOutOfBounds(format!("Λ must be >= 1, got {big_lambda}")));
        }
        let faces: Vec<f64> = (0..=grid.nz).map(|j| f(grid.face_z(j))).collect();
        let cells: Vec<f64> = (0..grid.nz).map(|j| f(grid.cell_z(j))).collect();
        let (lo, hi) = (1.0 / big_lambda, big_lambda);
        let tol = 1e-12 * big_lambda;
        for &v in faces.iter().chain(&cells) {
            if !(v >= lo - tol && v <= hi + tol) {
                return Err(QgError::LambdaOutOfBounds(format!("λ = {v} outside [{lo}, {hi}]")));
            }
        }
        Ok(LambdaProfile { big_lambda, faces, cells })
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(QgError::LambdaOutOfBounds(format!("constant λ must be positive, got {c}")));
        }
        Self::from_fn(grid, c.max(1.0 / c), |_| c)
    }

    /// `λ(z) = Λ^{tanh((z - z₀)/w)}`, moving from near `1/Λ` at the surface
    /// to near `Λ` deep down.
    pub fn tanh_stratified(grid: &Grid, big_lambda: f64, z0: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(QgError::InvalidParameter(format!("tanh width must be positive, got {width}")));
        }
        let ln = big_lambda.ln();
        Self::from_fn(grid, big_lambda, |z| (ln * ((z - z0) / width).tanh()).exp())
    }

    pub fn is_unit(&self) -> bool {
        self.faces.iter().chain(&self.cells).all(|&v| v == 1.0)
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.faces.len() != grid.nz + 1 || self.cells.len() != grid.nz {
            return Err(QgError::GridMismatch("λ profile sampled on a different vertical grid".into()));
        }
        Ok(())
    }
}

/// `∇_λ ψ = (λ ∂_z ψ, ∂₁ψ, ∂₂ψ)` with zero value at `Z_max`.
pub fn grad_lambda(psi: &ScalarField3D, lambda: &LambdaProfile) -> Result<VectorField3D> {
    let g = &psi.grid;
    lambda.check_grid(g)?;
    let (nm, nz, h) = (g.modes(), g.nz, g.dz);
    let mut out = VectorField3D::zeros(g);
    for m in 0..nm {
        out.vertical[m] = (psi.cells[m] - psi.surface[m]) * (2.0 * lambda.faces[0] / h);
        for j in 1..nz {
            out.vertical[j * nm + m] = (psi.cells[j * nm + m] - psi.cells[(j - 1) * nm + m]) * (lambda.faces[j] / h);
        }
        out.vertical[nz * nm + m] = -psi.cells[(nz - 1) * nm + m] * (2.0 * lambda.faces[nz] / h);
    }
    horizontal_grad_into(psi, &mut out);
    Ok(out)
}

/// Unweighted gradient.
pub fn grad(psi: &ScalarField3D) -> VectorField3D {
    let unit = LambdaProfile { big_lambda: 1.0, faces: vec![1.0; psi.grid.nz + 1], cells: vec![1.0; psi.grid.nz] };
    grad_lambda(psi, &unit).expect("unit profile matches grid")
}

fn horizontal_grad_into(psi: &ScalarField3D, out: &mut VectorField3D) {
    let g = &psi.grid;
    let nm = g.modes();
    for j in 0..g.nz {
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let m = iy * g.nx + ix;
                let v = psi.cells[j * nm + m];
                out.h1[j * nm + m] = I * g.kx[ix] * v;
                out.h2[j * nm + m] = I * g.ky[iy] * v;
            }
        }
    }
}

/// Discrete divergence at the cell centres, adjoint to [`grad`] in the
/// weighted inner product up to the surface term `A ∫ φ(0) γ_ν(u)`.
pub fn div(u: &VectorField3D) -> ScalarField3D {
    let g = &u.grid;
    let (nm, h) = (g.modes(), g.dz);
    let mut out = ScalarField3D::zeros(g);
    for j in 0..g.nz {
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let m = iy * g.nx + ix;
                let c = j * nm + m;
                out.cells[c] = (u.vertical[(j + 1) * nm + m] - u.vertical[c]) / h
                    + I * (u.h1[c] * g.kx[ix] + u.h2[c] * g.ky[iy]);
            }
        }
    }
    out.extrapolate_surface();
    out
}

/// `L_λ ψ = div ∇_λ ψ`.
pub fn l_lambda(psi: &ScalarField3D, lambda: &LambdaProfile) -> Result<ScalarField3D> {
    Ok(div(&grad_lambda(psi, lambda)?))
}

/// Normal trace `γ_ν(u) = -u_z(0)`.
pub fn gamma_nu(u: &VectorField3D) -> SurfaceField2D {
    let nm = u.grid.modes();
    SurfaceField2D { grid: u.grid.clone(), data: u.vertical[..nm].iter().map(|v| -v).collect() }
}

/// Surface trace of a scalar.
pub fn gamma0(psi: &ScalarField3D) -> SurfaceField2D {
    SurfaceField2D { grid: psi.grid.clone(), data: psi.surface.clone() }
}

/// `∇̄^⊥ ψ = (-∂₂ψ, ∂₁ψ)` at the cell centres (vertical component zero).
pub fn perp_grad(psi: &ScalarField3D) -> VectorField3D {
    let g = &psi.grid;
    let nm = g.modes();
    let mut out = VectorField3D::zeros(g);
    for j in 0..g.nz {
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let m = iy * g.nx + ix;
                let v = psi.cells[j * nm + m];
                out.h1[j * nm + m] = -I * g.ky[iy] * v;
                out.h2[j * nm + m] = I * g.kx[ix] * v;
            }
        }
    }
    out
}

/// Surface velocity `(-∂₂θ, ∂₁θ)`.
pub fn perp_grad_surface(theta: &SurfaceField2D) -> [SurfaceField2D; 2] {
    let g = &theta.grid;
    let mut a = SurfaceField2D::zeros(g);
    let mut b = SurfaceField2D::zeros(g);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let m = iy * g.nx + ix;
            a.data[m] = -I * g.ky[iy] * theta.data[m];
            b.data[m] = I * g.kx[ix] * theta.data[m];
        }
    }
    [a, b]
}

fn zero_mode_tol(data: &[C64]) -> f64 {
    1e-12 * data.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(1e-300)
}

/// Multiplier `|k|^{2s}` on a surface field.
pub fn fractional_laplacian(theta: &SurfaceField2D, s: f64) -> Result<SurfaceField2D> {
    let g = &theta.grid;
    if s < 0.0 && theta.data[0].norm() > zero_mode_tol(&theta.data) {
        return Err(QgError::GaugeViolation(format!("negative power s = {s} needs a zero mean mode")));
    }
    let mut out = theta.clone();
    for (v, &k) in out.data.iter_mut().zip(&g.kabs) {
        *v *= if k == 0.0 { if s == 0.0 { 1.0 } else { 0.0 } } else { k.powf(2.0 * s) };
    }
    Ok(out)
}

/// Gaussian mollifier `exp(-δ²|k|²/2)` applied per level.
pub fn mollify_levels(grid: &Grid, data: &mut [C64], delta: f64) {
    if delta == 0.0 {
        return;
    }
    let w: Vec<f64> = grid.k2.iter().map(|k2| (-0.5 * delta * delta * k2).exp()).collect();
    for p in data.chunks_mut(grid.modes()) {
        for (v, &a) in p.iter_mut().zip(&w) {
            *v *= a;
        }
    }
}

pub fn mollify_scalar(psi: &ScalarField3D, delta: f64) -> ScalarField3D {
    let mut o = psi.clone();
    mollify_levels(&psi.grid, &mut o.surface, delta);
    mollify_levels(&psi.grid, &mut o.cells, delta);
    o
}

pub fn mollify_surface(theta: &SurfaceField2D, delta: f64) -> SurfaceField2D {
    let mut o = theta.clone();
    mollify_levels(&theta.grid, &mut o.data, delta);
    o
}

/// Damping rate `ε(|k| + |k|³)` per horizontal mode; the symbol is its negative.
pub fn hyperviscous_rate(grid: &Grid, eps: f64) -> Vec<f64> {
    grid.kabs.iter().map(|k| eps * (k + k * k * k)).collect()
}

fn plane_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn plane_weighted(a: &[C64], w: &[f64]) -> f64 {
    a.iter().zip(w).map(|(x, k)| x.norm_sqr() * k).sum()
}

/// Weighted `L²` inner product: trapezoid on faces, midpoint on cells.
pub fn inner_vector(u: &VectorField3D, v: &VectorField3D) -> f64 {
    let g = &u.grid;
    let nm = g.modes();
    let mut s = 0.0;
    for j in 0..=g.nz {
        s += g.face_weight(j) * plane_dot(&u.vertical[j * nm..(j + 1) * nm], &v.vertical[j * nm..(j + 1) * nm]);
    }
    s += g.dz * (plane_dot(&u.h1, &v.h1) + plane_dot(&u.h2, &v.h2));
    s * g.area()
}

pub fn norm_vector(u: &VectorField3D) -> f64 {
    inner_vector(u, u).max(0.0).sqrt()
}

/// `L²` inner product of the cell values.
pub fn inner_scalar(a: &ScalarField3D, b: &ScalarField3D) -> f64 {
    a.grid.area() * a.grid.dz * plane_dot(&a.cells, &b.cells)
}

pub fn norm_scalar(a: &ScalarField3D) -> f64 {
    inner_scalar(a, a).max(0.0).sqrt()
}

pub fn inner_surface(a: &SurfaceField2D, b: &SurfaceField2D) -> f64 {
    a.grid.area() * plane_dot(&a.data, &b.data)
}

pub fn norm_surface(a: &SurfaceField2D) -> f64 {
    inner_surface(a, a).max(0.0).sqrt()
}

fn hs_weights(grid: &Grid, s: f64) -> Vec<f64> {
    grid.kabs
        .iter()
        .map(|&k| if k == 0.0 { if s == 0.0 { 1.0 } else { 0.0 } } else { k.powf(2.0 * s) })
        .collect()
}

/// Homogeneous Sobolev norm `(A Σ |k|^{2s} |θ̂|²)^{1/2}`.
pub fn hs_norm_surface(theta: &SurfaceField2D, s: f64) -> Result<f64> {
    if s < 0.0 && theta.data[0].norm() > zero_mode_tol(&theta.data) {
        return Err(QgError::GaugeViolation(format!("Ḣ^{s} norm of a field with nonzero mean")));
    }
    let w = hs_weights(&theta.grid, s);
    Ok((theta.grid.area() * plane_weighted(&theta.data, &w)).sqrt())
}

/// Horizontal `Ḣ^s` norm of a vector field, integrated in `z`.
pub fn hs_norm_vector(u: &VectorField3D, s: f64) -> f64 {
    let g = &u.grid;
    let nm = g.modes();
    let w = hs_weights(g, s);
    let mut t = 0.0;
    for j in 0..=g.nz {
        t += g.face_weight(j) * plane_weighted(&u.vertical[j * nm..(j + 1) * nm], &w);
    }
    for j in 0..g.nz {
        t += g.dz * (plane_weighted(&u.h1[j * nm..(j + 1) * nm], &w) + plane_weighted(&u.h2[j * nm..(j + 1) * nm], &w));
    }
    (t * g.area()).sqrt()
}

/// `L²` norm restricted to `0 ≤ z ≤ zcut`.
pub fn local_norm_vector(u: &VectorField3D, zcut: f64) -> f64 {
    let g = &u.grid;
    let nm = g.modes();
    let jc = ((zcut / g.dz).round() as usize).min(g.nz);
    let mut s = 0.0;
    for j in 0..=jc {
        let w = if j == 0 || j == jc { 0.5 * g.dz } else { g.dz };
        s += w * plane_dot(&u.vertical[j * nm..(j + 1) * nm], &u.vertical[j * nm..(j + 1) * nm]);
    }
    for j in 0..jc {
        let a = &u.h1[j * nm..(j + 1) * nm];
        let b = &u.h2[j * nm..(j + 1) * nm];
        s += g.dz * (plane_dot(a, a) + plane_dot(b, b));
    }
    (s * g.area()).sqrt()
}

/// Pointwise magnitude of a vector field at the cell centres, vertical
/// component averaged from the adjacent faces. Returns `N_z` planes.
pub fn magnitude_at_cells(u: &VectorField3D) -> Vec<f64> {
    let g = &u.grid;
    let nm = g.modes();
    let [w, u1, u2] = u.to_physical();
    let mut out = vec![0.0; g.nz * nm];
    for j in 0..g.nz {
        for m in 0..nm {
            let wz = 0.5 * (w[j * nm + m] + w[(j + 1) * nm + m]);
            let c = j * nm + m;
            out[c] = (wz * wz + u1[c] * u1[c] + u2[c] * u2[c]).sqrt();
        }
    }
    out
}

/// Mixed norm `‖ ‖u‖_{L^{px}_x} ‖_{L^{pz}_z}` from physical values;
/// either exponent may be infinite.
pub fn mixed_norm(u: &VectorField3D, pz: f64, px: f64) -> f64 {
    let g = &u.grid;
    let nm = g.modes();
    let mag = magnitude_at_cells(u);
    let da = g.dx * g.dy;
    let level: Vec<f64> = mag
        .chunks(nm)
        .map(|p| {
            if px.is_infinite() {
                p.iter().fold(0.0f64, |a, &b| a.max(b))
            } else {
                (p.iter().map(|v| v.powf(px)).sum::<f64>() * da).powf(1.0 / px)
            }
        })
        .collect();
    if pz.is_infinite() {
        level.iter().fold(0.0f64, |a, &b| a.max(b))
    } else {
        (level.iter().map(|v| v.powf(pz)).sum::<f64>() * g.dz).powf(1.0 / pz)
    }
}

/// `λ ≡ 1` on the grid.
pub fn unit_profile(grid: &Arc<Grid>) -> LambdaProfile {
    LambdaProfile::constant(grid, 1.0).expect("unit profile is valid")
}

/// Fourth-order central difference in `z`, used to sample analytic
/// derivatives of closures.
fn dz_of(f: &(dyn Fn(f64, f64, f64) -> f64 + Sync), z: f64, x: f64, y: f64) -> f64 {
    let e = 1e-3;
    (8.0 * (f(z + e, x, y) - f(z - e, x, y)) - (f(z + 2.0 * e, x, y) - f(z - 2.0 * e, x, y))) / (12.0 * e)
}

/// Samples the continuum `∇_λ f` of an analytic `f(z, x₁, x₂)` (vertical
/// part on faces, horizontal parts spectrally from the cell samples).
pub fn sample_grad_lambda(
    grid: &Arc<Grid>,
    lambda: &LambdaProfile,
    f: impl Fn(f64, f64, f64) -> f64 + Sync,
) -> Result<VectorField3D> {
    lambda.check_grid(grid)?;
    let psi = ScalarField3D::sample(grid, &f);
    let mut out = grad(&psi);
    let faces = VectorField3D::sample(grid, |z, x, y| [dz_of(&f, z, x, y), 0.0, 0.0]);
    let nm = grid.modes();
    for j in 0..=grid.nz {
        for m in 0..nm {
            out.vertical[j * nm + m] = faces.vertical[j * nm + m] * lambda.faces[j];
        }
    }
    Ok(out)
}
