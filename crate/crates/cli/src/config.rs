//! Run configuration: one TOML document naming the operator, the basis, the
//! task and its parameters.

use std::path::PathBuf;

use anharmonic::discretize::BasisSpec;
use anharmonic::gauge::GaugeSpec;
use anharmonic::model::{validate, OscillatorSpec};
use anharmonic::pseudomode::PseudomodeParams;
use anharmonic::spectra::Rect;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Eigs,
    Proj,
    Pspec,
    Pmode,
    Gauge,
    Verify,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<OscillatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisSpec>,
    #[serde(default)]
    pub eigs: EigsTask,
    #[serde(default)]
    pub proj: ProjTask,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pspec: Option<PspecTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmode: Option<PmodeTask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeTask>,
    #[serde(default)]
    pub verify: VerifyTask,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigsTask {
    /// Modes requested; fewer trusted modes is a convergence failure.
    pub count: usize,
}

impl Default for EigsTask {
    fn default() -> Self {
        Self { count: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjTask {
    pub count: usize,
    /// Inclusive index window of the growth fit.
    pub fit_window: Option<[usize; 2]>,
    /// Growth order σ in `log‖P_n‖ ~ γ n^σ`; the model value when absent.
    pub sigma: Option<f64>,
}

impl Default for ProjTask {
    fn default() -> Self {
        Self { count: 30, fit_window: None, sigma: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PspecTask {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmodeTask {
    /// Points `[Re λ, Im λ]`.
    pub curve: Vec<[f64; 2]>,
    #[serde(default)]
    pub params: PseudomodeParams,
    /// Compare each `1/q` with the resolvent norm in `basis`.
    #[serde(default)]
    pub certify: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeTask {
    pub spec: GaugeSpec,
    /// Rows `n = 1..=n_max` of the zero/derivative table.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Points `[Re w, Im w]` at which the partial fractions are checked.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
}

fn default_n_max() -> usize {
    40
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyTask {
    /// Criterion numbers to run; all when absent.
    pub criteria: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), svg: false }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The operator, validated; required by every task except gauge and verify.
    pub fn operator(&self) -> Result<&OscillatorSpec, CliError> {
        self.oscillator.as_ref().ok_or_else(|| CliError::Config(format!("task {:?} needs an [oscillator] table", self.task)))
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis.clone().unwrap_or_else(|| BasisSpec::new(128))
    }

    fn check(&self) -> Result<(), CliError> {
        if let Some(spec) = &self.oscillator {
            validate(spec).map_err(|e| CliError::Config(e.to_string()))?;
        }
        match self.task {
            Task::Eigs | Task::Proj | Task::Report | Task::Pmode | Task::Pspec => {
                self.operator()?;
            }
            Task::Gauge | Task::Verify => {}
        }
        if self.task == Task::Pspec && self.pspec.is_none() {
            return Err(CliError::Config("task pspec needs a [pspec] table".into()));
        }
        if let Some(p) = &self.pspec {
            if p.nx < 2 || p.ny < 2 {
                return Err(CliError::Config("pspec grid needs nx, ny ≥ 2".into()));
            }
        }
        if self.task == Task::Pmode && self.pmode.as_ref().map_or(true, |p| p.curve.is_empty()) {
            return Err(CliError::Config("task pmode needs [pmode] with a non-empty curve".into()));
        }
        if self.task == Task::Gauge {
            let g = self.gauge.as_ref().ok_or_else(|| CliError::Config("task gauge needs a [gauge] table".into()))?;
            g.spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some([lo, hi]) = self.proj.fit_window {
            if lo == 0 || hi < lo {
                return Err(CliError::Config(format!("proj.fit_window [{lo}, {hi}] must satisfy 1 ≤ lo ≤ hi")));
            }
        }
        if let Some(ks) = &self.verify.criteria {
            if let Some(k) = ks.iter().find(|&&k| !(1..=14).contains(&k)) {
                return Err(CliError::Config(format!("verify.criteria: no criterion {k}")));
            }
        }
        Ok(())
    }
}
