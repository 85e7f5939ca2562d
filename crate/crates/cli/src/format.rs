//! On-disk schemas: state files in and report files out.
//!
//! States are stored as explicit `[re, im]` pairs in the canonical index
//! order (pure: amplitude vector; density: row-major matrix entries), so the
//! files stay diffable and trivially portable. Serialization uses the
//! shortest float representation that round-trips `f64` exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use qtangle::optimize::OptimizerConfig;
use qtangle::state::{DensityMatrix, PureState, State};
use qtangle::tangle::TangleReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub schema: u32,
    pub kind: StateKind,
    pub dims: Vec<usize>,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl StateFile {
    pub fn from_state(state: &State, metadata: Option<Metadata>) -> Self {
        match state {
            State::Pure(psi) => Self {
                schema: SCHEMA_VERSION,
                kind: StateKind::Pure,
                dims: psi.dims().to_vec(),
                data: psi.amplitudes().iter().map(|c| [c.re, c.im]).collect(),
                metadata,
            },
            State::Density(rho) => {
                let n = rho.dim_total();
                let mut data = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let c = rho.matrix()[(i, j)];
                        data.push([c.re, c.im]);
                    }
                }
                Self {
                    schema: SCHEMA_VERSION,
                    kind: StateKind::Density,
                    dims: rho.dims().to_vec(),
                    data,
                    metadata,
                }
            }
        }
    }

    pub fn into_state(self) -> Result<State> {
        if self.schema != SCHEMA_VERSION {
            bail!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            );
        }
        let total: usize = self.dims.iter().product();
        match self.kind {
            StateKind::Pure => {
                if self.data.len() != total {
                    bail!(
                        "field 'data' has {} entries, expected {} for dims {:?}",
                        self.data.len(),
                        total,
                        self.dims
                    );
                }
                let amps: Vec<C64> = self
                    .data
                    .iter()
                    .map(|[re, im]| C64::new(*re, *im))
                    .collect();
                let psi = PureState::new(self.dims, amps)
                    .context("field 'data' is not a valid pure state")?;
                Ok(State::Pure(psi))
            }
            StateKind::Density => {
                if self.data.len() != total * total {
                    bail!(
                        "field 'data' has {} entries, expected {} for dims {:?}",
                        self.data.len(),
                        total * total,
                        self.dims
                    );
                }
                let entries: Vec<C64> = self
                    .data
                    .iter()
                    .map(|[re, im]| C64::new(*re, *im))
                    .collect();
                let rho = DensityMatrix::from_row_major(self.dims, entries)
                    .context("field 'data' is not a valid density matrix")?;
                Ok(State::Density(rho))
            }
        }
    }

    pub fn load(path: &Path) -> Result<State> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read state file {}", path.display()))?;
        let file: StateFile = serde_json::from_str(&text)
            .with_context(|| format!("malformed state file {}", path.display()))?;
        file.into_state()
            .with_context(|| format!("invalid state in {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("state files always serialize");
        fs::write(path, text + "\n")
            .with_context(|| format!("cannot write state file {}", path.display()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConfigEcho {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl ConfigEcho {
    pub fn to_optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FocusRecord {
    pub focus: Vec<usize>,
    pub total_sq: f64,
    pub pair_sq: BTreeMap<usize, f64>,
    pub tau: f64,
    pub converged: bool,
    pub monogamy_violation: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportFile {
    pub schema: u32,
    pub tool_version: String,
    pub kind: StateKind,
    pub dims: Vec<usize>,
    /// "exact" for pure inputs; "lower-bound" for mixed ones, whose grouped
    /// totals bound the convex roof from below.
    pub semantics: String,
    pub config: ConfigEcho,
    pub foci: Vec<FocusRecord>,
    /// Headline residual, clamped at zero.
    pub residual: f64,
    pub residual_raw: f64,
    pub argmin_focus: Vec<usize>,
    pub all_converged: bool,
    pub monogamy_violation: bool,
    pub runtime_seconds: f64,
}

impl ReportFile {
    pub fn new(
        report: &TangleReport,
        kind: StateKind,
        config: ConfigEcho,
        runtime_seconds: f64,
    ) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            kind,
            dims: report.dims.clone(),
            semantics: if report.lower_bound_semantics {
                "lower-bound".to_string()
            } else {
                "exact".to_string()
            },
            config,
            foci: report
                .foci
                .iter()
                .map(|f| FocusRecord {
                    focus: f.focus.focus().to_vec(),
                    total_sq: f.total_sq,
                    pair_sq: f.pair_sq.iter().copied().collect(),
                    tau: f.tau,
                    converged: f.converged,
                    monogamy_violation: f.monogamy_violation,
                })
                .collect(),
            residual: report.residual,
            residual_raw: report.residual_raw,
            argmin_focus: report.argmin_focus().focus().to_vec(),
            all_converged: report.all_converged,
            monogamy_violation: report.any_monogamy_violation,
            runtime_seconds,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report files always serialize");
        fs::write(path, text + "\n")
            .with_context(|| format!("cannot write report file {}", path.display()))
    }
}

/// Report written by the `concurrence` subcommand.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConcurrenceReportFile {
    pub schema: u32,
    pub tool_version: String,
    pub kind: StateKind,
    pub dims: Vec<usize>,
    pub focus: Vec<usize>,
    pub semantics: String,
    pub concurrence_sq: f64,
    pub converged: bool,
    pub config: ConfigEcho,
    pub runtime_seconds: f64,
}
