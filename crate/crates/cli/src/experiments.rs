//! SQG runs, the Picard probe and the stability sweep.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde_json::json;

use qg_core::calculus::{gamma_nu, hs_norm_surface, norm_surface};
use qg_core::diagnostics::{perturbation_experiment, stability_experiment};
use qg_core::dynamics::PicardReport;
use qg_core::snapshot::write_surface;
use qg_core::sqg::{SqgConfig, SqgSolver};

use crate::config::Manifest;
use crate::error::Result;
use crate::setup::build;

pub const SQG_HEADER: &str = "t,theta_L2,theta_Hm1over2,theta_H1over2";

/// SQG run from the surface buoyancy `γ_ν(∇_λΨ⁰)` of the configured data.
pub fn sqg_run(manifest: &Manifest, out: &Path) -> Result<usize> {
    let setup = build(manifest)?;
    let c = &setup.model.cfg;
    fs::create_dir_all(out)?;
    let solver = SqgSolver::new(&setup.grid, SqgConfig { eps: c.eps, delta: c.delta, dt: c.dt, cfl: c.cfl })?;
    let run = solver.run(&gamma_nu(&setup.initial.g), c.steps())?;
    let every = manifest.config.output.diagnostics_every;
    let mut csv = format!("{SQG_HEADER}\n");
    let mut rows = 0;
    for (n, s) in run.iter().enumerate() {
        if (n as u64).is_multiple_of(every) || n + 1 == run.len() {
            let th = &s.theta;
            csv.push_str(&format!(
                "{:.15e},{:.15e},{:.15e},{:.15e}\n",
                s.t,
                norm_surface(th),
                hs_norm_surface(th, -0.5)?,
                hs_norm_surface(th, 0.5)?
            ));
            rows += 1;
        }
    }
    fs::write(out.join("sqg_diagnostics.csv"), csv)?;
    let mut w = BufWriter::new(File::create(out.join("sqg_theta_final.qghs"))?);
    write_surface(&mut w, &run.last().expect("run includes the initial state").theta)?;
    Ok(rows)
}

/// Geometric spans `span_min · 2^i`, `i < count`.
pub fn spans(span_min: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| span_min * 2f64.powi(i as i32)).collect()
}

pub fn probe_picard(manifest: &Manifest, out: &Path, pairs: usize, span_list: &[f64]) -> Result<PicardReport> {
    let setup = build(manifest)?;
    let r = setup.model.picard_contraction_probe(&setup.initial.g, span_list, pairs, manifest.config.seed)?;
    fs::create_dir_all(out)?;
    let doc = json!({
        "manifest": manifest.hash,
        "eps": setup.model.cfg.eps,
        "delta": setup.model.cfg.delta,
        "norm_g0": r.norm_g0,
        "spans": r.spans,
        "contraction": r.contraction,
        "t0": r.t0,
        "t_cross": r.t_cross,
        "constant": r.constant,
    });
    fs::write(out.join("picard.json"), serde_json::to_string_pretty(&doc).expect("json"))?;
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub eps: Vec<f64>,
    pub gaps: Vec<f64>,
    pub strictly_decreasing: bool,
    pub amplitudes: Vec<f64>,
    pub perturbation_gaps: Vec<f64>,
}

/// `ε_n = eps0·2^{-n}`, `n < levels`, plus perturbed runs at the
/// configured `ε`.
pub fn stability_sweep(manifest: &Manifest, out: &Path, eps0: f64, levels: usize, amplitudes: &[f64]) -> Result<SweepOutput> {
    let setup = build(manifest)?;
    let eps: Vec<f64> = (0..levels).map(|n| eps0 * 0.5f64.powi(n as i32)).collect();
    let r = stability_experiment(&setup.model, &setup.initial, &eps)?;
    let p = perturbation_experiment(&setup.model, &setup.initial, amplitudes, manifest.config.seed)?;
    fs::create_dir_all(out)?;
    let doc = json!({
        "manifest": manifest.hash,
        "eps": r.eps,
        "gaps": r.gaps,
        "strictly_decreasing": r.strictly_decreasing,
        "amplitudes": amplitudes,
        "perturbation_gaps": p,
    });
    fs::write(out.join("stability.json"), serde_json::to_string_pretty(&doc).expect("json"))?;
    Ok(SweepOutput { eps: r.eps, gaps: r.gaps, strictly_decreasing: r.strictly_decreasing, amplitudes: amplitudes.to_vec(), perturbation_gaps: p })
}
