//! Grid, profile, model and initial state from a manifest.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use qg_core::calculus::{grad_lambda, LambdaProfile};
use qg_core::dynamics::{Forcing, Model, State};
use qg_core::random::{random_scalar, rng, RandomSpec};
use qg_core::snapshot::{read_scalar, read_surface};
use qg_core::{Grid, ScalarField3D, SurfaceField2D};

use crate::config::{ForcingKind, InitKind, LambdaKind, Manifest};
use crate::error::{CliError, Result};

pub struct Setup {
    pub grid: Arc<Grid>,
    pub model: Model,
    pub initial: State,
}

fn open(p: &Path) -> Result<BufReader<File>> {
    File::open(p).map(BufReader::new).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

pub fn lambda_profile(m: &Manifest, grid: &Arc<Grid>) -> Result<LambdaProfile> {
    let l = &m.config.lambda;
    Ok(match l.profile {
        LambdaKind::Constant => LambdaProfile::constant(grid, l.value)?,
        LambdaKind::TanhStratified => LambdaProfile::tanh_stratified(grid, l.big_lambda, l.z0, l.width)?,
    })
}

fn forcing(m: &Manifest, grid: &Arc<Grid>, lambda: &LambdaProfile) -> Result<Option<Forcing>> {
    let f = &m.config.forcing;
    let (fl, fnu) = match f.kind {
        ForcingKind::Zero => return Ok(None),
        ForcingKind::SingleMode => {
            let (k1, k2) = (f.m1 as f64 / grid.lh, f.m2 as f64 / grid.lh);
            let (a, d) = (f.amplitude, f.decay);
            (
                ScalarField3D::sample(grid, |z, x, y| a * (-d * z).exp() * (k1 * x + k2 * y).cos()),
                SurfaceField2D::sample(grid, |x, y| a * (k1 * x + k2 * y).cos()),
            )
        }
        ForcingKind::Snapshot => {
            let pi = f.interior.as_deref().expect("validated");
            let ps = f.surface.as_deref().expect("validated");
            (read_scalar(&mut open(pi)?, grid)?, read_surface(&mut open(ps)?, grid)?)
        }
    };
    Ok(Some(Forcing::new(fl, fnu, lambda)?))
}

pub fn build(m: &Manifest) -> Result<Setup> {
    let c = &m.config;
    let grid = Grid::new(c.grid.lh, c.grid.nx, c.grid.ny, c.grid.nz, c.grid.zmax)?;
    let lambda = lambda_profile(m, &grid)?;
    let f = forcing(m, &grid, &lambda)?;
    let model = Model::new(&grid, lambda, c.solver.to_config(), f)?;
    let i = &c.init;
    let a = i.amplitude;
    let initial = match i.kind {
        InitKind::HarmonicMode => {
            let (k1, k2) = (i.m1 as f64 / grid.lh, i.m2 as f64 / grid.lh);
            let k = (k1 * k1 + k2 * k2).sqrt();
            model.state_from_fn(move |z, x, y| a * (-k * z).exp() * (k1 * x + k2 * y).cos())?
        }
        InitKind::TwoMode => model.state_from_fn(move |z, x, y| a * ((-z).exp() * x.cos() + z * (-z).exp() * (x + y).cos()))?,
        InitKind::RandomSeeded => {
            let mut r = rng(c.seed);
            let psi = random_scalar(&grid, &mut r, &RandomSpec { kmax: i.kmax, zero_mean: true, decay: (0.5, 2.0) });
            let s = psi.max_abs();
            let psi = if s > 0.0 { psi.scaled(a / s) } else { psi };
            model.state_from_gradient(&grad_lambda(&psi, &model.lambda)?)?
        }
        InitKind::FromSnapshot => {
            let psi = read_scalar(&mut open(i.path.as_deref().expect("validated"))?, &grid)?;
            model.state_from_gradient(&grad_lambda(&psi, &model.lambda)?)?
        }
    };
    Ok(Setup { grid, model, initial })
}
