//! Time integration with diagnostics, snapshots and checkpoints.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use qg_core::calculus::gamma_nu;
use qg_core::diagnostics::{energy_report, CSV_HEADER};
use qg_core::dynamics::{ClassicalState, Model, Scheme, State, StepInfo};
use qg_core::snapshot::{write_scalar, write_surface};
use qg_core::{ScalarField3D, SurfaceField2D, VectorField3D};

use crate::checkpoint::Checkpoint;
use crate::config::Manifest;
use crate::error::{CliError, Result};
use crate::setup::{build, Setup};

pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const CHECKPOINT: &str = "checkpoint.qgck";
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug)]
enum Sim {
    Reformulated(State),
    Classical(ClassicalState),
}

impl Sim {
    fn step_index(&self) -> u64 {
        match self {
            Sim::Reformulated(s) => s.step,
            Sim::Classical(s) => s.step,
        }
    }

    fn advance(&self, m: &Model) -> Result<(Sim, StepInfo)> {
        Ok(match self {
            Sim::Reformulated(s) => {
                let (n, i) = m.step(s)?;
                (Sim::Reformulated(n), i)
            }
            Sim::Classical(s) => {
                let (n, i) = m.classical_step(s)?;
                (Sim::Classical(n), i)
            }
        })
    }

    fn view(&self, m: &Model) -> Result<State> {
        Ok(match self {
            Sim::Reformulated(s) => s.clone(),
            Sim::Classical(c) => State { g: m.classical_gradient(c)?, psi: c.psi.clone(), t: c.t, step: c.step },
        })
    }

    fn to_checkpoint(&self, hash: [u8; 32], csv: &str) -> Checkpoint {
        let (scheme, t, step, blocks) = match self {
            Sim::Reformulated(s) => (
                0,
                s.t,
                s.step,
                vec![s.g.vertical.clone(), s.g.h1.clone(), s.g.h2.clone(), s.psi.surface.clone(), s.psi.cells.clone()],
            ),
            Sim::Classical(c) => (
                1,
                c.t,
                c.step,
                vec![c.q.surface.clone(), c.q.cells.clone(), c.theta.data.clone(), c.psi.surface.clone(), c.psi.cells.clone()],
            ),
        };
        Checkpoint { hash, step, t, scheme, blocks, csv: csv.to_string() }
    }

    fn from_checkpoint(ck: &Checkpoint, setup: &Setup) -> Result<Sim> {
        let grid = &setup.grid;
        let (nm, nz) = (grid.modes(), grid.nz);
        let want = [(nz + 1) * nm, nz * nm, nz * nm, nm, nz * nm];
        let want_c = [nm, nz * nm, nm, nm, nz * nm];
        let expect = if ck.scheme == 0 { want } else { want_c };
        let lens: Vec<usize> = ck.blocks.iter().map(|b| b.len()).collect();
        if lens != expect {
            return Err(CliError::Checkpoint(format!("block sizes {lens:?} do not match the grid")));
        }
        let b = &ck.blocks;
        let psi = ScalarField3D { grid: grid.clone(), surface: b[3].clone(), cells: b[4].clone() };
        Ok(match ck.scheme {
            0 => Sim::Reformulated(State {
                g: VectorField3D { grid: grid.clone(), vertical: b[0].clone(), h1: b[1].clone(), h2: b[2].clone() },
                psi,
                t: ck.t,
                step: ck.step,
            }),
            1 => Sim::Classical(ClassicalState {
                q: ScalarField3D { grid: grid.clone(), surface: b[0].clone(), cells: b[1].clone() },
                theta: SurfaceField2D { grid: grid.clone(), data: b[2].clone() },
                psi,
                t: ck.t,
                step: ck.step,
            }),
            s => return Err(CliError::Checkpoint(format!("unknown scheme tag {s}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    pub rows: usize,
    pub t: f64,
    pub diagnostics: PathBuf,
}

fn write_snapshot_pair(out: &Path, tag: &str, s: &State) -> Result<()> {
    let mut w = BufWriter::new(File::create(out.join(format!("psi_{tag}.qghs")))?);
    write_scalar(&mut w, &s.psi)?;
    let mut w = BufWriter::new(File::create(out.join(format!("theta_{tag}.qghs")))?);
    write_surface(&mut w, &gamma_nu(&s.g))?;
    Ok(())
}

fn row(m: &Model, sim: &Sim, info: &StepInfo) -> Result<String> {
    let r = energy_report(m, &sim.view(m)?, info)?;
    if !r.is_finite() {
        return Err(qg_core::QgError::Diverged(format!("non-finite diagnostics at t = {}", r.t)).into());
    }
    Ok(r.csv_row())
}

fn drive(manifest: &Manifest, setup: &Setup, out: &Path, mut sim: Sim, mut csv: String) -> Result<RunSummary> {
    let m = &setup.model;
    let o = &manifest.config.output;
    let total = m.cfg.steps();
    let hash = manifest.hash_bytes();
    let diag = out.join(DIAGNOSTICS);
    let mut rows = csv.lines().count().saturating_sub(1);
    let result = (|| -> Result<()> {
        while sim.step_index() < total {
            let (next, info) = sim.advance(m)?;
            sim = next;
            let n = sim.step_index();
            if n.is_multiple_of(o.diagnostics_every) || n == total {
                csv.push_str(&row(m, &sim, &info)?);
                csv.push('\n');
                rows += 1;
            }
            if o.snapshot_every > 0 && n.is_multiple_of(o.snapshot_every) && n < total {
                write_snapshot_pair(out, &format!("{n:06}"), &sim.view(m)?)?;
            }
            if o.checkpoint_every > 0 && n.is_multiple_of(o.checkpoint_every) && n < total {
                sim.to_checkpoint(hash, &csv).write(&out.join(CHECKPOINT))?;
            }
        }
        Ok(())
    })();
    fs::write(&diag, &csv)?;
    if let Err(e) = result {
        fs::write(out.join("failure.txt"), format!("step {}: {e}\n", sim.step_index()))?;
        return Err(e);
    }
    let last = sim.view(m)?;
    write_snapshot_pair(out, "final", &last)?;
    Ok(RunSummary { steps: sim.step_index(), rows, t: last.t, diagnostics: diag })
}

fn prepare(manifest: &Manifest, out: &Path) -> Result<Setup> {
    fs::create_dir_all(out)?;
    fs::write(out.join(MANIFEST), manifest.to_json())?;
    build(manifest)
}

/// Fresh run from the manifest's initial state.
pub fn run_simulation(manifest: &Manifest, out: &Path) -> Result<RunSummary> {
    let setup = prepare(manifest, out)?;
    let m = &setup.model;
    let sim = match m.cfg.scheme {
        Scheme::Reformulated => Sim::Reformulated(setup.initial.clone()),
        Scheme::Classical => Sim::Classical(m.classical_from_state(&setup.initial)),
    };
    let mut csv = format!("{CSV_HEADER}\n");
    csv.push_str(&row(m, &sim, &StepInfo::default())?);
    csv.push('\n');
    drive(manifest, &setup, out, sim, csv)
}

/// Continues from a checkpoint written under the same manifest hash.
pub fn resume(manifest: &Manifest, out: &Path, checkpoint: &Path) -> Result<RunSummary> {
    let ck = Checkpoint::read(checkpoint)?;
    if ck.hash != manifest.hash_bytes() {
        return Err(CliError::HashMismatch { expected: manifest.hash.clone(), found: hex::encode(ck.hash) });
    }
    let setup = prepare(manifest, out)?;
    let wanted = match setup.model.cfg.scheme {
        Scheme::Reformulated => 0,
        Scheme::Classical => 1,
    };
    if ck.scheme != wanted {
        return Err(CliError::Checkpoint("scheme differs from the manifest".into()));
    }
    let sim = Sim::from_checkpoint(&ck, &setup)?;
    drive(manifest, &setup, out, sim, ck.csv)
}
