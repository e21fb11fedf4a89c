//! Property checks on the manifest's grid and λ profile.

use qg_core::calculus::*;
use qg_core::elliptic::solve_dirichlet;
use qg_core::hodge::{potential, project, project_curl};
use qg_core::random::{random_scalar, random_vector, rng, RandomSpec};
use qg_core::sqg::lift_harmonic;
use qg_core::{Grid, ScalarField3D};

use crate::config::Manifest;
use crate::error::Result;
use crate::setup::lambda_profile;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub limit: f64,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: worst {:.3e} (limit {:.3e})", self.name, self.worst, self.limit)
    }
}

fn line(name: &'static str, worst: f64, limit: f64) -> CheckLine {
    CheckLine { name, passed: worst <= limit, worst, limit }
}

pub fn run_checks(manifest: &Manifest, samples: usize) -> Result<Vec<CheckLine>> {
    let g = &manifest.config.grid;
    let grid = Grid::new(g.lh, g.nx, g.ny, g.nz, g.zmax)?;
    let lam = lambda_profile(manifest, &grid)?;
    let mut r = rng(manifest.config.seed);
    let spec = RandomSpec::default();
    let (mut idem, mut comp, mut ann, mut pair, mut sbp, mut ell, mut trace) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let u = random_vector(&grid, &mut r, &spec);
        let n = norm_vector(&u);
        let p = project(&u, &lam)?;
        let c = project_curl(&u, &lam)?;
        idem = idem.max(norm_vector(&project(&p, &lam)?.sub(&p)) / n);
        comp = comp.max(norm_vector(&p.add(&c).sub(&u)) / n);
        ann = ann.max(norm_vector(&project(&c, &lam)?) / n).max(norm_vector(&project_curl(&p, &lam)?) / n);
        let phi = random_scalar(&grid, &mut r, &spec);
        let gphi = grad(&phi);
        let gp = grad_lambda(&potential(&u, &lam)?, &lam)?;
        pair = pair.max((inner_vector(&u, &gphi) - inner_vector(&gp, &gphi)).abs() / (n * norm_vector(&gphi)));
        let lhs = inner_vector(&gphi, &u);
        let rhs = -inner_scalar(&phi, &div(&u)) + inner_surface(&gamma0(&phi), &gamma_nu(&u));
        sbp = sbp.max((lhs - rhs).abs() / (norm_vector(&gphi) * n));
        let f = random_scalar(&grid, &mut r, &spec);
        let psi = solve_dirichlet(&f, &lam)?;
        let mut res = l_lambda(&psi, &lam)?.sub(&f);
        res.surface = vec![Default::default(); grid.modes()];
        ell = ell.max(norm_scalar(&res) / norm_scalar(&f));
        let th = qg_core::random::random_surface(&grid, &mut r, &RandomSpec { kmax: 4, zero_mean: true, decay: (1.0, 1.0) });
        let h: ScalarField3D = lift_harmonic(&th, &grid)?;
        let t = hs_norm_surface(&gamma0(&h), 0.5)? / norm_vector(&grad(&h));
        trace = trace.max(t);
    }
    Ok(vec![
        line("projector idempotence", idem, 1e-9),
        line("projector complementarity", comp, 1e-9),
        line("projector annihilation", ann, 1e-9),
        line("projection pairing", pair, 1e-9),
        line("summation by parts", sbp, 1e-12),
        line("Dirichlet solve residual", ell, 1e-10),
        line("trace inequality constant", trace, 1.0 + 5.0 * grid.dz),
    ])
}
