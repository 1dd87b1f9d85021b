//! Experiment configuration documents.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use jdpp::kernel_io::{generate, KernelSpec};
use jdpp::{build_space, JKernelBundle, SpacePartition, DEFAULT_TOL};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub d: usize,
    #[serde(default)]
    pub sigma: Option<Vec<f64>>,
    pub part: Vec<u8>,
}

/// Whether the configured matrix is K itself or its J-self-adjoint partner 𝕂.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelRole {
    #[default]
    Hermitian,
    JHermitian,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub spec: KernelSpec,
    #[serde(default)]
    pub role: KernelRole,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub space: SpaceConfig,
    pub kernel: KernelConfig,
    #[serde(default)]
    pub suites: Vec<String>,
    /// Known keys: `validation` (kernel checks) and `moments` (route agreement).
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Δ-tuples such as `"{1}|{2,3}"`.
    #[serde(default)]
    pub tuples: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub output: OutputConfig,
}

pub const DEFAULT_MOMENT_TOL: f64 = 1e-8;

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!("unsupported schema_version {} (expected {SCHEMA_VERSION})", cfg.schema_version);
        }
        for key in cfg.tolerances.keys() {
            if key != "validation" && key != "moments" {
                bail!("unknown tolerance key `{key}`");
            }
        }
        // Kernel files are resolved against the config's directory.
        if let KernelSpec::File { path: file } = &mut cfg.kernel.spec {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
            if !file.exists() {
                bail!("kernel file {} does not exist", file.display());
            }
        }
        Ok(cfg)
    }

    pub fn validation_tol(&self) -> f64 {
        self.tolerances.get("validation").copied().unwrap_or(DEFAULT_TOL)
    }

    pub fn moment_tol(&self) -> f64 {
        self.tolerances.get("moments").copied().unwrap_or(DEFAULT_MOMENT_TOL)
    }

    pub fn space(&self) -> Result<Arc<SpacePartition>> {
        let sigma = self.space.sigma.clone().unwrap_or_else(|| vec![1.0; self.space.d]);
        Ok(Arc::new(build_space(self.space.d, &sigma, &self.space.part)?))
    }

    pub fn matrix(&self) -> Result<jdpp::Kernel> {
        Ok(generate(&self.kernel.spec, self.space()?)?)
    }

    /// The bundle, with K recovered as hat(𝕂) for `j-hermitian` kernels.
    pub fn bundle(&self) -> Result<JKernelBundle> {
        let m = self.matrix()?;
        let tol = self.validation_tol();
        Ok(match self.kernel.role {
            KernelRole::Hermitian => jdpp::assemble_j_kernel(&m, tol)?,
            KernelRole::JHermitian => JKernelBundle::from_j_kernel(&m, tol)?,
        })
    }
}
