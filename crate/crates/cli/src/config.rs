//! TOML run configuration and the resolved, hashed run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qg_core::dynamics::{Scheme, SolverConfig};
use qg_core::Grid;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridSpec,
    #[serde(default)]
    pub lambda: LambdaSpec,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub forcing: ForcingSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn eight() -> f64 {
    8.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "one")]
    pub lh: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(default = "eight")]
    pub zmax: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaKind {
    #[default]
    Constant,
    TanhStratified,
}

/// `constant`: `λ ≡ value`. `tanh-stratified`: `λ = Λ^{tanh((z − z0)/width)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSpec {
    #[serde(default)]
    pub profile: LambdaKind,
    #[serde(default = "one")]
    pub value: f64,
    #[serde(default = "LambdaSpec::default_big")]
    pub big_lambda: f64,
    #[serde(default = "LambdaSpec::default_z0")]
    pub z0: f64,
    #[serde(default = "one")]
    pub width: f64,
}

impl LambdaSpec {
    fn default_big() -> f64 {
        2.0
    }
    fn default_z0() -> f64 {
        2.0
    }
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec { profile: LambdaKind::Constant, value: 1.0, big_lambda: 2.0, z0: 2.0, width: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    HarmonicMode,
    #[default]
    TwoMode,
    RandomSeeded,
    FromSnapshot,
}

/// Initial stream function.
///
/// - `harmonic-mode`: `a e^{-|k|z} cos(m₁x₁ + m₂x₂)`
/// - `two-mode`: `a (e^{-z} cos x₁ + z e^{-z} cos(x₁ + x₂))`
/// - `random-seeded`: smooth random field with modes up to `kmax`, scaled so
///   that the largest coefficient is `a`
/// - `from-snapshot`: scalar snapshot of `Ψ` at `path`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    #[serde(default)]
    pub kind: InitKind,
    #[serde(default = "InitSpec::default_amp")]
    pub amplitude: f64,
    #[serde(default = "InitSpec::default_m1")]
    pub m1: i64,
    #[serde(default)]
    pub m2: i64,
    #[serde(default = "InitSpec::default_kmax")]
    pub kmax: i64,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl InitSpec {
    fn default_amp() -> f64 {
        0.3
    }
    fn default_m1() -> i64 {
        1
    }
    fn default_kmax() -> i64 {
        4
    }
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec { kind: InitKind::TwoMode, amplitude: 0.3, m1: 1, m2: 0, kmax: 4, path: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    #[default]
    Zero,
    SingleMode,
    Snapshot,
}

/// `single-mode`: `f_L = a e^{-decay·z} cos(m·x)` and `f_ν = a cos(m·x)`.
/// `snapshot`: `f_L` from the scalar snapshot `interior` and `f_ν` from the
/// surface snapshot `surface`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    #[serde(default)]
    pub kind: ForcingKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub m1: i64,
    #[serde(default)]
    pub m2: i64,
    #[serde(default)]
    pub decay: f64,
    #[serde(default)]
    pub interior: Option<PathBuf>,
    #[serde(default)]
    pub surface: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSpec {
    #[default]
    Reformulated,
    Classical,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub beta: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "half")]
    pub cfl: f64,
    #[serde(default)]
    pub scheme: SchemeSpec,
}

impl SolverSpec {
    pub fn to_config(&self) -> SolverConfig {
        SolverConfig {
            eps: self.eps,
            delta: self.delta,
            beta: self.beta,
            dt: self.dt,
            t_final: self.t_final,
            cfl: self.cfl,
            scheme: match self.scheme {
                SchemeSpec::Reformulated => Scheme::Reformulated,
                SchemeSpec::Classical => Scheme::Classical,
            },
        }
    }
}

/// Schedules are in steps; 0 disables snapshots or checkpoints. The final
/// state is always written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "OutputSpec::default_every")]
    pub diagnostics_every: u64,
    #[serde(default)]
    pub snapshot_every: u64,
    #[serde(default)]
    pub checkpoint_every: u64,
}

impl OutputSpec {
    fn default_every() -> u64 {
        1
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: None, diagnostics_every: 1, snapshot_every: 0, checkpoint_every: 0 }
    }
}

/// Resolved configuration with the hash of everything that affects numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub hash: String,
    pub config: Config,
    /// sha256 of every input file, in the order init, forcing interior,
    /// forcing surface.
    pub inputs: Vec<String>,
}

#[derive(Serialize)]
struct Hashed<'a> {
    grid: &'a GridSpec,
    lambda: &'a LambdaSpec,
    init: &'a InitSpec,
    forcing: &'a ForcingSpec,
    solver: &'a SolverSpec,
    seed: u64,
    diagnostics_every: u64,
    inputs: &'a [String],
}

fn file_digest(p: &Path) -> Result<String> {
    let b = fs::read(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    Ok(hex::encode(Sha256::digest(&b)))
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("{origin}: {e}")))
    }

    /// Range checks beyond what parsing enforces.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        Grid::new(g.lh, g.nx, g.ny, g.nz, g.zmax)?;
        self.solver.to_config().validate()?;
        let bad = |m: &str| Err(CliError::Range(m.to_string()));
        match self.lambda.profile {
            LambdaKind::Constant if !(self.lambda.value > 0.0) => return bad("lambda.value must be positive"),
            LambdaKind::TanhStratified if !(self.lambda.big_lambda >= 1.0 && self.lambda.width > 0.0) => {
                return bad("lambda.big_lambda must be >= 1 and lambda.width positive")
            }
            _ => {}
        }
        if !self.init.amplitude.is_finite() {
            return bad("init.amplitude must be finite");
        }
        if self.init.kind == InitKind::FromSnapshot && self.init.path.is_none() {
            return bad("init.path is required for from-snapshot");
        }
        if self.init.kind == InitKind::HarmonicMode && self.init.m1 == 0 && self.init.m2 == 0 {
            return bad("harmonic-mode needs a nonzero wavevector");
        }
        if self.forcing.kind == ForcingKind::Snapshot && (self.forcing.interior.is_none() || self.forcing.surface.is_none()) {
            return bad("forcing.interior and forcing.surface are required for snapshot forcing");
        }
        if self.output.diagnostics_every == 0 {
            return bad("output.diagnostics_every must be positive");
        }
        Ok(())
    }

    fn input_files(&self) -> Vec<&Path> {
        let mut v = Vec::new();
        if self.init.kind == InitKind::FromSnapshot {
            v.extend(self.init.path.as_deref());
        }
        if self.forcing.kind == ForcingKind::Snapshot {
            v.extend(self.forcing.interior.as_deref());
            v.extend(self.forcing.surface.as_deref());
        }
        v
    }

    pub fn manifest(self) -> Result<Manifest> {
        self.validate()?;
        let inputs = self.input_files().into_iter().map(file_digest).collect::<Result<Vec<_>>>()?;
        let h = Hashed {
            grid: &self.grid,
            lambda: &self.lambda,
            init: &self.init,
            forcing: &self.forcing,
            solver: &self.solver,
            seed: self.seed,
            diagnostics_every: self.output.diagnostics_every,
            inputs: &inputs,
        };
        let json = serde_json::to_vec(&h).map_err(|e| CliError::Io(e.to_string()))?;
        let hash = hex::encode(Sha256::digest(&json));
        Ok(Manifest { hash, config: self, inputs })
    }
}

/// Reads a configuration file. `seed` overrides the file's seed.
pub fn parse_config(path: &Path, seed: Option<u64>) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut c = Config::parse(&text, &path.display().to_string())?;
    if let Some(s) = seed {
        c.seed = s;
    }
    c.manifest()
}

impl Manifest {
    pub fn hash_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        hex::decode_to_slice(&self.hash, &mut out).expect("hash is 64 hex digits");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
