//! Experiment configuration: JSON documents with unknown keys rejected.
//!
//! A config names one experiment and may carry the parameter block for that
//! experiment; omitted blocks and fields take the documented defaults.
//! [`ExperimentConfig::resolve`] fills every default so that the resolved
//! document fully determines a run.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::curve_geometry::{ClosureOptions, NamedCurve};
use crate::energies::{nodal_model_with_shape, NodalModel, Poly, WillmoreForm};
use crate::flows::{RunOptions, StepController};
use crate::grid::DiffScheme;

use super::HarnessError;

/// The experiments the harness knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    PhaseSep,
    IncompCompare,
    GammaConvergence,
    IcmScaling,
    Operators,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 5] = [
        ExperimentName::PhaseSep,
        ExperimentName::IncompCompare,
        ExperimentName::GammaConvergence,
        ExperimentName::IcmScaling,
        ExperimentName::Operators,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::PhaseSep => "phase-sep",
            ExperimentName::IncompCompare => "incomp-compare",
            ExperimentName::GammaConvergence => "gamma-convergence",
            ExperimentName::IcmScaling => "icm-scaling",
            ExperimentName::Operators => "operators",
        }
    }

    /// Key of the parameter block for this experiment.
    pub fn block_key(&self) -> &'static str {
        match self {
            ExperimentName::PhaseSep => "phase_sep",
            ExperimentName::IncompCompare => "incomp_compare",
            ExperimentName::GammaConvergence => "gamma_convergence",
            ExperimentName::IcmScaling => "icm_scaling",
            ExperimentName::Operators => "operators",
        }
    }

    fn default_n(&self) -> usize {
        match self {
            ExperimentName::PhaseSep => 512,
            ExperimentName::IncompCompare => 256,
            ExperimentName::GammaConvergence => 2048,
            ExperimentName::IcmScaling => 128,
            ExperimentName::Operators => 256,
        }
    }

    fn uses_nodal(&self) -> bool {
        matches!(self, ExperimentName::PhaseSep | ExperimentName::GammaConvergence)
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| HarnessError::Config(unknown_experiment_message(s)))
    }
}

fn unknown_experiment_message(name: &str) -> String {
    let names: Vec<&str> = ExperimentName::ALL.iter().map(|e| e.as_str()).collect();
    format!("unknown experiment `{name}`; valid names are: {}", names.join(", "))
}

/// Nodal model: either the built-in quadratic family selected by `shape`, or
/// all three polynomials given explicitly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa0: Option<Poly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_minus: Option<Poly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_plus: Option<Poly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_gap: Option<f64>,
}

impl NodalBlock {
    pub fn build(&self) -> Result<NodalModel, HarnessError> {
        let polys = [&self.kappa0, &self.rho_minus, &self.rho_plus];
        let given = polys.iter().filter(|p| p.is_some()).count();
        let mut model = match (given, self.shape) {
            (0, shape) => nodal_model_with_shape(shape.unwrap_or(1.0))
                .map_err(|e| HarnessError::Config(format!("nodal: {e}")))?,
            (3, None) => {
                let base = nodal_model_with_shape(1.0).expect("default nodal model is valid");
                NodalModel {
                    kappa0: self.kappa0.clone().unwrap(),
                    rho_minus: self.rho_minus.clone().unwrap(),
                    rho_plus: self.rho_plus.clone().unwrap(),
                    ..base
                }
            }
            (3, Some(_)) => {
                return Err(HarnessError::Config(
                    "nodal: `shape` selects the built-in family and cannot be combined with explicit polynomials".into(),
                ))
            }
            _ => {
                return Err(HarnessError::Config(
                    "nodal: give all of `kappa0`, `rho_minus`, `rho_plus` or none of them".into(),
                ))
            }
        };
        if let Some(r) = self.kappa_range {
            model.kappa_range = r;
        }
        if let Some(g) = self.min_gap {
            model.min_gap = g;
        }
        model
            .validate()
            .map_err(|e| HarnessError::Config(format!("nodal: {e}")))?;
        Ok(model)
    }

    /// The explicit form of the model this block describes.
    fn resolved(&self) -> Result<NodalBlock, HarnessError> {
        let m = self.build()?;
        Ok(NodalBlock {
            shape: None,
            kappa0: Some(m.kappa0),
            rho_minus: Some(m.rho_minus),
            rho_plus: Some(m.rho_plus),
            kappa_range: Some(m.kappa_range),
            min_gap: Some(m.min_gap),
        })
    }
}

fn controller_with_rtol(rtol: f64) -> StepController {
    StepController {
        rtol,
        ..StepController::default()
    }
}

/// Phase-separation runs from a circle with a seeded density pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSepExperiment {
    pub delta: f64,
    pub beta: f64,
    /// Target length factor in `β/2(|Γ| - σ₁|Γ₀|)²`.
    pub sigma1: f64,
    pub epsilons: Vec<f64>,
    pub curve: NamedCurve,
    /// Initial density `mean - amplitude·cos(2π·mode·s) + noise`.
    pub density_mean: f64,
    pub density_amplitude: f64,
    pub density_mode: u32,
    /// Amplitude of a uniform random perturbation drawn from `seed`.
    pub density_noise: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub project_every: usize,
    pub controller: StepController,
}

impl Default for PhaseSepExperiment {
    fn default() -> Self {
        Self {
            delta: 0.2,
            beta: 3.0,
            sigma1: 1.8,
            epsilons: vec![0.05, 0.02],
            curve: NamedCurve::circle(1.0),
            density_mean: 0.8,
            density_amplitude: 0.15,
            density_mode: 3,
            density_noise: 0.0,
            t_end: 4.0,
            snapshot_every: 0,
            project_every: 10,
            controller: controller_with_rtol(1e-3),
        }
    }
}

/// The same initial curve under the globally constrained, penalised and
/// incompressible Willmore flows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncompCompareExperiment {
    pub curve: NamedCurve,
    pub beta: f64,
    /// Reference length; the initial length when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ref_length: Option<f64>,
    pub epsilon: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub project_every: usize,
    pub controller: StepController,
}

impl Default for IncompCompareExperiment {
    fn default() -> Self {
        Self {
            curve: NamedCurve::trillium(),
            beta: 5.0,
            ref_length: None,
            epsilon: 0.01,
            t_end: 0.01,
            snapshot_every: 0,
            project_every: 10,
            controller: StepController::default(),
        }
    }
}

/// Recovery-sequence energies against the sharp-interface limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaConvergenceExperiment {
    pub curve: NamedCurve,
    pub transitions: Vec<f64>,
    /// Whether the arc after the first transition lies on the `ρ₊` branch.
    pub plus_first: bool,
    pub delta: f64,
    pub epsilons: Vec<f64>,
}

impl Default for GammaConvergenceExperiment {
    fn default() -> Self {
        Self {
            curve: NamedCurve::trillium(),
            transitions: vec![0.25, 0.75],
            plus_first: true,
            delta: 0.2,
            epsilons: vec![0.04, 0.02, 0.01],
        }
    }
}

/// Relaxation of the penalised flow onto the incompressible manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcmScalingExperiment {
    pub curve: NamedCurve,
    pub base: WillmoreForm,
    pub epsilons: Vec<f64>,
    /// Initial distance `d₀ = d0_factor·ε²`.
    pub d0_factor: f64,
    /// Fit window `[0, fit_window·ε]` for `a·e^{-bt} + c`.
    pub fit_window: f64,
    /// Physical time at which `‖V^R‖_{H²}` is compared across `ε`.
    pub residual_time: f64,
    pub controller: StepController,
}

impl Default for IcmScalingExperiment {
    fn default() -> Self {
        Self {
            curve: NamedCurve::perturbed_circle(1.0, 2, 0.15),
            base: WillmoreForm::willmore(),
            epsilons: vec![0.04, 0.02, 0.01],
            d0_factor: 20.0,
            fit_window: 5.0,
            residual_time: 0.5,
            controller: StepController {
                dt: 1e-8,
                rtol: 1e-6,
                atol: 1e-12,
                ..StepController::default()
            },
        }
    }
}

/// Spectral diagnostics of the Helmholtz and incompressibility operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorsExperiment {
    pub curve: NamedCurve,
}

impl Default for OperatorsExperiment {
    fn default() -> Self {
        Self {
            curve: NamedCurve::circle(1.0),
        }
    }
}

/// A harness configuration document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<DiffScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodal: Option<NodalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure: Option<ClosureOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_sep: Option<PhaseSepExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incomp_compare: Option<IncompCompareExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_convergence: Option<GammaConvergenceExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icm_scaling: Option<IcmScalingExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<OperatorsExperiment>,
}

impl ExperimentConfig {
    /// A config for `experiment` with every block at its defaults.
    pub fn new(experiment: ExperimentName) -> Self {
        Self {
            experiment,
            n: None,
            scheme: None,
            output_dir: None,
            seed: 0,
            nodal: experiment.uses_nodal().then(NodalBlock::default),
            closure: None,
            phase_sep: None,
            incomp_compare: None,
            gamma_convergence: None,
            icm_scaling: None,
            operators: None,
        }
    }

    /// Parse a JSON document. Schema violations are reported as config errors.
    ///
    /// A run manifest is accepted too; its embedded config is used.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let mut raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("malformed JSON: {e}")))?;
        if raw.get("config_sha256").is_some() {
            raw = raw
                .get_mut("config")
                .map(serde_json::Value::take)
                .ok_or_else(|| HarnessError::Config("manifest has no `config` field".into()))?;
        }
        // Look at the experiment name first so that a misspelt name gets the
        // list of valid names rather than a generic parse error.
        let obj = raw
            .as_object()
            .ok_or_else(|| HarnessError::Config("config must be a JSON object".into()))?;
        match obj.get("experiment") {
            None => return Err(HarnessError::Config("missing field `experiment`".into())),
            Some(serde_json::Value::String(name)) => {
                name.parse::<ExperimentName>()?;
            }
            Some(other) => {
                return Err(HarnessError::Config(format!(
                    "field `experiment` must be a string, got {other}"
                )))
            }
        }
        serde_json::from_value(raw).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or_else(|| self.experiment.default_n())
    }

    pub fn scheme(&self) -> DiffScheme {
        self.scheme.unwrap_or_default()
    }

    pub fn closure(&self) -> ClosureOptions {
        self.closure.unwrap_or_default()
    }

    /// The nodal model, for experiments that need one.
    pub fn nodal_model(&self) -> Result<NodalModel, HarnessError> {
        self.nodal
            .as_ref()
            .ok_or_else(|| {
                HarnessError::Config(format!(
                    "experiment {} requires the `nodal` block (use {{}} for the built-in model)",
                    self.experiment
                ))
            })?
            .build()
    }

    pub fn phase_sep(&self) -> PhaseSepExperiment {
        self.phase_sep.clone().unwrap_or_default()
    }

    pub fn incomp_compare(&self) -> IncompCompareExperiment {
        self.incomp_compare.clone().unwrap_or_default()
    }

    pub fn gamma_convergence(&self) -> GammaConvergenceExperiment {
        self.gamma_convergence.clone().unwrap_or_default()
    }

    pub fn icm_scaling(&self) -> IcmScalingExperiment {
        self.icm_scaling.clone().unwrap_or_default()
    }

    pub fn operators(&self) -> OperatorsExperiment {
        self.operators.clone().unwrap_or_default()
    }

    /// Directory name used when `output_dir` is absent.
    pub fn default_output_dir(&self) -> PathBuf {
        PathBuf::from("runs").join(self.experiment.as_str())
    }

    /// Check cross-field rules and fill every default.
    pub fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let e = self.experiment;
        let blocks = [
            (ExperimentName::PhaseSep, self.phase_sep.is_some()),
            (ExperimentName::IncompCompare, self.incomp_compare.is_some()),
            (ExperimentName::GammaConvergence, self.gamma_convergence.is_some()),
            (ExperimentName::IcmScaling, self.icm_scaling.is_some()),
            (ExperimentName::Operators, self.operators.is_some()),
        ];
        for (owner, present) in blocks {
            if present && owner != e {
                return Err(HarnessError::Config(format!(
                    "block `{}` does not apply to experiment {e}",
                    owner.block_key()
                )));
            }
        }
        let n = self.n();
        if n < 16 || n % 2 != 0 {
            return Err(HarnessError::Config(format!("n must be even and at least 16, got {n}")));
        }
        let nodal = if e.uses_nodal() {
            Some(self.nodal_model().and_then(|_| self.nodal.as_ref().unwrap().resolved())?)
        } else if self.nodal.is_some() {
            return Err(HarnessError::Config(format!("block `nodal` does not apply to experiment {e}")));
        } else {
            None
        };
        let mut out = ExperimentConfig {
            experiment: e,
            n: Some(n),
            scheme: Some(self.scheme()),
            output_dir: Some(self.output_dir.clone().unwrap_or_else(|| self.default_output_dir())),
            seed: self.seed,
            nodal,
            closure: Some(self.closure()),
            phase_sep: None,
            incomp_compare: None,
            gamma_convergence: None,
            icm_scaling: None,
            operators: None,
        };
        match e {
            ExperimentName::PhaseSep => {
                let p = self.phase_sep();
                check_epsilons(&p.epsilons)?;
                positive("phase_sep.delta", p.delta)?;
                positive("phase_sep.sigma1", p.sigma1)?;
                positive("phase_sep.t_end", p.t_end)?;
                non_negative("phase_sep.beta", p.beta)?;
                check_controller(&p.controller)?;
                out.phase_sep = Some(p);
            }
            ExperimentName::IncompCompare => {
                let p = self.incomp_compare();
                positive("incomp_compare.epsilon", p.epsilon)?;
                positive("incomp_compare.t_end", p.t_end)?;
                non_negative("incomp_compare.beta", p.beta)?;
                check_controller(&p.controller)?;
                out.incomp_compare = Some(p);
            }
            ExperimentName::GammaConvergence => {
                let p = self.gamma_convergence();
                check_epsilons(&p.epsilons)?;
                positive("gamma_convergence.delta", p.delta)?;
                crate::energies::TransitionSet::new(p.transitions.clone(), p.plus_first)
                    .map_err(|err| HarnessError::Config(format!("gamma_convergence.transitions: {err}")))?;
                out.gamma_convergence = Some(p);
            }
            ExperimentName::IcmScaling => {
                let p = self.icm_scaling();
                check_epsilons(&p.epsilons)?;
                positive("icm_scaling.d0_factor", p.d0_factor)?;
                positive("icm_scaling.fit_window", p.fit_window)?;
                positive("icm_scaling.residual_time", p.residual_time)?;
                check_controller(&p.controller)?;
                out.icm_scaling = Some(p);
            }
            ExperimentName::Operators => out.operators = Some(self.operators()),
        }
        Ok(out)
    }

    /// Run options shared by the flow experiments.
    pub(crate) fn run_options(
        &self,
        t_end: f64,
        controller: &StepController,
        project_every: usize,
        snapshot_every: usize,
    ) -> RunOptions {
        RunOptions {
            t_end,
            stall_tol: None,
            max_steps: RunOptions::default().max_steps,
            project_every,
            snapshot_every,
            controller: controller.clone(),
            closure: self.closure(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), HarnessError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), HarnessError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("{name} must be non-negative, got {v}")))
    }
}

fn check_epsilons(eps: &[f64]) -> Result<(), HarnessError> {
    if eps.is_empty() {
        return Err(HarnessError::Config("epsilons must not be empty".into()));
    }
    for &e in eps {
        positive("epsilon", e)?;
    }
    Ok(())
}

fn check_controller(c: &StepController) -> Result<(), HarnessError> {
    c.validate().map_err(|e| HarnessError::Config(e.to_string()))
}
