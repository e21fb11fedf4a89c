//! Weighted Hodge decomposition `u = ∇_λ ψ + c` with `div c = 0` and
//! `γ_ν(c) = 0`.

use crate::calculus::{div, gamma_nu, grad_lambda, LambdaProfile};
use crate::elliptic::{solve_dirichlet, solve_flux_unchecked};
use crate::error::Result;
use crate::field::{ScalarField3D, SurfaceField2D, VectorField3D};

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub potential: ScalarField3D,
    pub grad_part: VectorField3D,
    pub curl_part: VectorField3D,
}

/// Splits `u` by first removing the Dirichlet potential of `div u`, then the
/// flux potential of the remaining normal trace.
pub fn decompose(u: &VectorField3D, lambda: &LambdaProfile) -> Result<Decomposition> {
    let psi1 = solve_dirichlet(&div(u), lambda)?;
    let rest = u.sub(&grad_lambda(&psi1, lambda)?);
    let w0 = gamma_nu(&rest).scaled(-1.0);
    let psi2 = solve_flux_unchecked(&w0, lambda, None)?;
    let potential = psi1.add(&psi2);
    let grad_part = grad_lambda(&potential, lambda)?;
    let curl_part = u.sub(&grad_part);
    Ok(Decomposition { potential, grad_part, curl_part })
}

/// Potential of a field, from a single flux solve: `L_λ ψ = div u`,
/// `(∇_λ ψ)_z(0) = u_z(0)`. Agrees with `decompose(u).potential`.
pub fn potential(u: &VectorField3D, lambda: &LambdaProfile) -> Result<ScalarField3D> {
    let nm = u.grid.modes();
    let w0 = SurfaceField2D { grid: u.grid.clone(), data: u.vertical[..nm].to_vec() };
    solve_flux_unchecked(&w0, lambda, Some(&div(u)))
}

/// `P_λ u`
pub fn project(u: &VectorField3D, lambda: &LambdaProfile) -> Result<VectorField3D> {
    grad_lambda(&potential(u, lambda)?, lambda)
}

/// `P_curl u = u - P_λ u`
pub fn project_curl(u: &VectorField3D, lambda: &LambdaProfile) -> Result<VectorField3D> {
    Ok(u.sub(&project(u, lambda)?))
}
