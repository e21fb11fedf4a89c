//! Per-mode vertical solves for `L_λ ψ = f` with Dirichlet or flux data at
//! the surface and `ψ = 0` at `Z_max`.

use crate::calculus::{grad_lambda, LambdaProfile};
use crate::error::{QgError, Result};
use crate::field::{ScalarField3D, SurfaceField2D, VectorField3D};
use crate::grid::{Grid, C64};

/// Thomas algorithm for a tridiagonal system with real coefficients.
/// `lower[0]` and `upper[n-1]` are ignored. `rhs` is overwritten.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [C64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - rhs[i - 1] * lower[i]) / beta;
    }
    for i in (0..n - 1).rev() {
        let t = rhs[i + 1] * scratch[i + 1];
        rhs[i] -= t;
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Surface {
    Dirichlet,
    Flux,
}

/// Solves every horizontal mode. `flux` is the prescribed `u_z(0)` plane
/// (flux case) and `f` holds cell values of the right-hand side.
fn solve_modes(grid: &std::sync::Arc<Grid>, lambda: &LambdaProfile, f: &[C64], flux: Option<&[C64]>, kind: Surface) -> ScalarField3D {
    let (nm, nz, h) = (grid.modes(), grid.nz, grid.dz);
    let b: Vec<f64> = (0..=nz)
        .map(|j| {
            let s = if j == 0 || j == nz { 2.0 } else { 1.0 };
            s * lambda.faces[j] / (h * h)
        })
        .collect();
    let mut lower = vec![0.0; nz];
    let mut diag = vec![0.0; nz];
    let mut upper = vec![0.0; nz];
    let mut rhs = vec![C64::new(0.0, 0.0); nz];
    let mut scratch = Vec::with_capacity(nz);
    let mut out = ScalarField3D::zeros(grid);
    for m in 0..nm {
        let k2 = grid.k2[m];
        for c in 0..nz {
            lower[c] = b[c];
            upper[c] = b[c + 1];
            diag[c] = -(b[c] + b[c + 1]) - k2;
            rhs[c] = f[c * nm + m];
        }
        if kind == Surface::Flux {
            diag[0] = -b[1] - k2;
            rhs[0] += flux.map_or(C64::new(0.0, 0.0), |w| w[m]) / h;
        }
        thomas(&lower, &diag, &upper, &mut rhs, &mut scratch);
        for c in 0..nz {
            out.cells[c * nm + m] = rhs[c];
        }
        out.surface[m] = match kind {
            Surface::Dirichlet => C64::new(0.0, 0.0),
            Surface::Flux => rhs[0] - flux.map_or(C64::new(0.0, 0.0), |w| w[m]) * (0.5 * h / lambda.faces[0]),
        };
    }
    out
}

fn check(grid: &Grid, lambda: &LambdaProfile, other: &Grid) -> Result<()> {
    grid.same_shape(other)?;
    lambda.check_grid(grid)
}

/// `L_λ ψ = f`, `ψ(0) = 0`, `ψ(Z_max) = 0`.
pub fn solve_dirichlet(f: &ScalarField3D, lambda: &LambdaProfile) -> Result<ScalarField3D> {
    lambda.check_grid(&f.grid)?;
    let mut out = solve_modes(&f.grid, lambda, &f.cells, None, Surface::Dirichlet);
    out.grid = f.grid.clone();
    Ok(out)
}

/// `L_λ ψ = u_z`-flux problem without the zero-mode compatibility check:
/// `L_λ ψ = f`, `(∇_λ ψ)_z(0) = w0`, `ψ(Z_max) = 0`.
pub fn solve_flux_unchecked(w0: &SurfaceField2D, lambda: &LambdaProfile, f: Option<&ScalarField3D>) -> Result<ScalarField3D> {
    lambda.check_grid(&w0.grid)?;
    let zero;
    let cells = match f {
        Some(f) => {
            check(&w0.grid, lambda, &f.grid)?;
            &f.cells
        }
        None => {
            zero = vec![C64::new(0.0, 0.0); w0.grid.nz * w0.grid.modes()];
            &zero
        }
    };
    let mut out = solve_modes(&w0.grid, lambda, cells, Some(&w0.data), Surface::Flux);
    out.grid = w0.grid.clone();
    Ok(out)
}

/// `L_λ ψ = f`, `γ_ν(∇_λ ψ) = g`, decaying (zero at `Z_max`).
///
/// The zero horizontal mode is only solvable when `ĝ(0) = ∫ f̂(0, z) dz`;
/// with `f = 0` that means `ĝ(0) = 0`.
pub fn solve_neumann(g: &SurfaceField2D, lambda: &LambdaProfile, f: Option<&ScalarField3D>) -> Result<ScalarField3D> {
    let grid = &g.grid;
    let mean_f = f.map_or(C64::new(0.0, 0.0), |f| {
        (0..grid.nz).map(|j| f.cells[j * grid.modes()]).sum::<C64>() * grid.dz
    });
    let scale = g.max_abs().max(f.map_or(0.0, |f| f.max_abs() * grid.zmax)).max(1e-300);
    if (g.data[0] - mean_f).norm() > 1e-10 * scale {
        return Err(QgError::IncompatibleNeumannMean(format!(
            "mean flux {} differs from integrated source {}",
            g.data[0], mean_f
        )));
    }
    let w0 = g.scaled(-1.0);
    solve_flux_unchecked(&w0, lambda, f)
}

/// Forcing in gradient form `∇_λ F` with `L_λ F = f_L`, `γ_ν(∇_λ F) = f_ν`.
pub fn compute_forcing_f(f_l: &ScalarField3D, f_nu: &SurfaceField2D, lambda: &LambdaProfile) -> Result<VectorField3D> {
    let f = solve_neumann(f_nu, lambda, Some(f_l))?;
    grad_lambda(&f, lambda)
}
