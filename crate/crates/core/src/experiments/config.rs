//! Experiment configuration: a TOML file with the sections
//! `[kernel] [domain] [noise] [ladder] [estimator] [output]`.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kernel_cq::KernelSpec;
use crate::noise::{admissible_nu, CovarianceSpec};
use crate::reference::SpectralVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelVariantName {
    #[default]
    Riesz,
    TemperedRiesz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub rho: f64,
    #[serde(default)]
    pub variant: KernelVariantName,
    #[serde(default)]
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    #[default]
    Zero,
    /// `e_1`.
    FirstMode,
    /// Spectral coefficients from `initial_coeffs`.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub initial_coeffs: Vec<f64>,
}

impl Default for DomainSection {
    fn default() -> Self {
        Self { length: 1.0, horizon: 1.0, initial: InitialData::Zero, initial_coeffs: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModelName {
    #[default]
    None,
    Identity,
    InversePower,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default)]
    pub model: NoiseModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Rate parameter checked against the admissible range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { model: NoiseModelName::None, alpha: None, q: Vec::new(), truncation: default_truncation(), nu: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Time,
    Space,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeIntegration {
    /// Space ladders compare the spatially semi-discrete solution, integrated
    /// exactly in time, against the exact solution.
    #[default]
    Exact,
    /// Space ladders run the full scheme at the finest time step.
    Scheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    pub direction: Direction,
    /// Element counts; a time ladder uses the largest.
    pub n_elem: Vec<usize>,
    /// Step counts; a space ladder uses the largest.
    pub n_steps: Vec<usize>,
    #[serde(default)]
    pub space_time_integration: TimeIntegration,
    /// Refinement of the Monte Carlo reference grid over the finest ladder
    /// point in the refined parameter.
    #[serde(default = "default_reference_factor")]
    pub reference_factor: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    #[default]
    ExactCov,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalName {
    #[default]
    NormSq,
    ExpNegNormSq,
    LinearSq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(default)]
    pub kind: EstimatorKind,
    #[serde(default)]
    pub functional: FunctionalName,
    /// Sine mode `g = e_k` of `linear_sq`.
    #[serde(default = "default_g_mode")]
    pub g_mode: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub drop_coarse: usize,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            kind: EstimatorKind::ExactCov,
            functional: FunctionalName::NormSq,
            g_mode: default_g_mode(),
            paths: default_paths(),
            seed: 0,
            threads: 0,
            tolerance: default_tolerance(),
            drop_coarse: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub noise: NoiseSection,
    pub ladder: LadderSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn one() -> f64 {
    1.0
}
fn default_truncation() -> usize {
    256
}
fn default_reference_factor() -> usize {
    4
}
fn default_g_mode() -> usize {
    1
}
fn default_paths() -> usize {
    1000
}
fn default_tolerance() -> f64 {
    1e-10
}

/// One refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderPoint {
    pub n_elem: usize,
    /// Zero when time is integrated exactly.
    pub n_steps: usize,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        let rho = self.kernel.rho;
        if !(rho > 1.0 && rho < 2.0) {
            return cfg_err(format!("kernel.rho must lie in (1, 2), got {rho}"));
        }
        if self.kernel.variant == KernelVariantName::TemperedRiesz && !(self.kernel.eta > 0.0) {
            return cfg_err("kernel.eta must be positive for tempered_riesz".into());
        }
        if !(self.domain.length > 0.0) || !(self.domain.horizon > 0.0) {
            return cfg_err("domain.length and domain.horizon must be positive".into());
        }
        match self.domain.initial {
            InitialData::Custom if self.domain.initial_coeffs.is_empty() => {
                return cfg_err("domain.initial = \"custom\" needs domain.initial_coeffs".into());
            }
            InitialData::Zero | InitialData::FirstMode if !self.domain.initial_coeffs.is_empty() => {
                return cfg_err("domain.initial_coeffs is only read with domain.initial = \"custom\"".into());
            }
            _ => {}
        }
        match self.noise.model {
            NoiseModelName::InversePower => match self.noise.alpha {
                Some(a) if a >= 0.0 => {}
                _ => return cfg_err("noise.alpha >= 0 is required for inverse_power".into()),
            },
            NoiseModelName::Custom if self.noise.q.is_empty() => {
                return cfg_err("noise.q is required for the custom model".into());
            }
            _ => {}
        }
        if self.noise.model != NoiseModelName::None && self.noise.truncation == 0 {
            return cfg_err("noise.truncation must be positive".into());
        }
        let l = &self.ladder;
        if l.n_elem.is_empty() || l.n_steps.is_empty() {
            return cfg_err("ladder.n_elem and ladder.n_steps must be nonempty".into());
        }
        if l.n_elem.iter().any(|&n| n < 2) || l.n_steps.contains(&0) {
            return cfg_err("ladder entries must satisfy n_elem >= 2 and n_steps >= 1".into());
        }
        let refined = match l.direction {
            Direction::Time => l.n_steps.len(),
            Direction::Space => l.n_elem.len(),
        };
        if refined < 3 {
            return cfg_err(format!("the refined ladder needs at least 3 points, got {refined}"));
        }
        if l.reference_factor < 2 {
            return cfg_err("ladder.reference_factor must be >= 2".into());
        }
        if !(self.estimator.tolerance > 0.0) {
            return cfg_err("estimator.tolerance must be positive".into());
        }
        if self.estimator.kind == EstimatorKind::MonteCarlo && self.estimator.paths < 2 {
            return cfg_err("estimator.paths must be >= 2".into());
        }
        if self.estimator.g_mode == 0 {
            return cfg_err("estimator.g_mode is 1-based".into());
        }
        for p in self.ladder_points() {
            let h = self.domain.length / p.n_elem as f64;
            let dt = if p.n_steps == 0 { 0.0 } else { self.domain.horizon / p.n_steps as f64 };
            if h.powf(2.0 / rho) + dt >= self.domain.horizon {
                return cfg_err(format!(
                    "ladder point n_elem = {}, n_steps = {} violates h^(2/rho) + dt < T",
                    p.n_elem, p.n_steps
                ));
            }
        }
        Ok(())
    }

    /// Checks `nu` against the admissible range of the covariance model.
    pub fn check_admissibility(&self) -> Result<()> {
        let Some(cov) = self.covariance()? else { return Ok(()) };
        let Some(nu) = self.noise.nu else { return Ok(()) };
        let a = admissible_nu(&cov, self.kernel.rho);
        if a.user_supplied {
            return Ok(());
        }
        let margin = if a.exclusive { 0.02 } else { 0.0 };
        if nu > a.nu_max - margin + 1e-12 || nu < 0.0 {
            return Err(Error::Inadmissible(format!(
                "nu = {nu} exceeds the admissible bound {:.6}{} (margin {margin})",
                a.nu_max,
                if a.exclusive { " (exclusive)" } else { "" }
            )));
        }
        Ok(())
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec<f64>> {
        match self.kernel.variant {
            KernelVariantName::Riesz => KernelSpec::riesz(self.kernel.rho),
            KernelVariantName::TemperedRiesz => KernelSpec::tempered_riesz(self.kernel.rho, self.kernel.eta),
        }
    }

    pub fn initial_data(&self) -> Result<SpectralVector<f64>> {
        let l = self.domain.length;
        match self.domain.initial {
            InitialData::Zero => Ok(SpectralVector::zero(l)),
            InitialData::FirstMode => SpectralVector::single_mode(1, 1.0, l),
            InitialData::Custom => SpectralVector::new(self.domain.initial_coeffs.clone(), l),
        }
    }

    /// `None` for the deterministic problem.
    pub fn covariance(&self) -> Result<Option<CovarianceSpec<f64>>> {
        let (j, l) = (self.noise.truncation, self.domain.length);
        Ok(match self.noise.model {
            NoiseModelName::None => None,
            NoiseModelName::Identity => Some(CovarianceSpec::identity(j, l)?),
            NoiseModelName::InversePower => Some(CovarianceSpec::inverse_power(self.noise.alpha.unwrap_or(0.0), j, l)?),
            NoiseModelName::Custom => {
                let mut q = self.noise.q.clone();
                q.truncate(j);
                Some(CovarianceSpec::custom(q, l)?)
            }
        })
    }

    /// Ladder points in configuration order. Space ladders with exact time
    /// integration carry `n_steps = 0`.
    pub fn ladder_points(&self) -> Vec<LadderPoint> {
        self.ladder_points_for(self.ladder.space_time_integration)
    }

    pub(crate) fn ladder_points_for(&self, integration: TimeIntegration) -> Vec<LadderPoint> {
        let l = &self.ladder;
        let ne_max = l.n_elem.iter().copied().max().unwrap_or(2);
        let n_max = l.n_steps.iter().copied().max().unwrap_or(1);
        match l.direction {
            Direction::Time => l.n_steps.iter().map(|&n| LadderPoint { n_elem: ne_max, n_steps: n }).collect(),
            Direction::Space => {
                let n = if integration == TimeIntegration::Exact { 0 } else { n_max };
                l.n_elem.iter().map(|&ne| LadderPoint { n_elem: ne, n_steps: n }).collect()
            }
        }
    }
}
