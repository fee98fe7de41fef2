use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::curve_geometry::{make_named_curve, reconstruct_embedding, total_length, IntrinsicState};
use crate::energies::{
    detect_transitions, gamma_limit_energy, phase_sep_energy, recovery_sequence, surface_tension_constants,
    DoubleWell, NodalModel, PhaseSepParams, TransitionSet, WillmoreForm,
};
use crate::error::CurveError;
use crate::flows::{excess_density, run_flow, FlowFamily, FlowRun, FlowState};
use crate::grid::ParamGrid;
use crate::parallel::{self, Execution};
use crate::surface_calculus::{h2_norm, helmholtz_h2_coercivity, incompressibility_spectrum, HelmholtzOperator};

use super::fit::{fit_exp_plateau, loglog_slope};
use super::io::{fmt_f64, resolve_output_dir, ArtifactWriter};
use super::{ExperimentConfig, ExperimentName, HarnessError};

/// Where a run wrote its artifacts and what it concluded.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub summary: Value,
    pub files: Vec<String>,
}

/// Run the experiment described by `config` and write its artifacts.
///
/// A failed flow still produces its run CSV, final snapshot, summary and
/// manifest; the error is returned afterwards.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    let cfg = config.resolve()?;
    let dir = resolve_output_dir(cfg.output_dir.as_deref().expect("resolved config has an output dir"));
    let mut out = ArtifactWriter::create(dir.clone())?;
    let (summary, failure) = match cfg.experiment {
        ExperimentName::PhaseSep => phase_sep(&cfg, &mut out)?,
        ExperimentName::IncompCompare => incomp_compare(&cfg, &mut out)?,
        ExperimentName::GammaConvergence => (gamma_convergence(&cfg, &mut out)?, None),
        ExperimentName::IcmScaling => icm_scaling(&cfg, &mut out)?,
        ExperimentName::Operators => (operators(&cfg, &mut out)?, None),
    };
    out.write_json("summary.json", &summary)?;
    out.write_manifest(&cfg)?;
    if let Some((run, source)) = failure {
        return Err(HarnessError::Integration { run, dir, source });
    }
    Ok(ExperimentOutcome {
        dir,
        summary,
        files: out.files().to_vec(),
    })
}

type Failure = Option<(String, CurveError)>;

fn grid_for(cfg: &ExperimentConfig) -> Result<ParamGrid, HarnessError> {
    ParamGrid::new(cfg.n(), cfg.scheme()).map_err(HarnessError::model("grid"))
}

fn eps_tag(eps: f64) -> String {
    format!("eps{eps}")
}

/// Write the run CSV and snapshots of one flow; returns its failure, if any.
fn write_flow(out: &mut ArtifactWriter, stem: &str, run: &mut FlowRun) -> Result<Failure, HarnessError> {
    out.write_run(&format!("run_{stem}.csv"), &run.diagnostics)?;
    let last = run.snapshots.len().saturating_sub(1);
    for (k, snap) in run.snapshots.iter().enumerate() {
        if k == last {
            out.write_curve(&format!("{stem}_final"), snap)?;
        } else {
            out.write_curve(&format!("{stem}_snap{k:04}"), snap)?;
        }
    }
    Ok(run.failure.take().map(|e| (stem.to_string(), e)))
}

fn first_failure(failures: impl IntoIterator<Item = Failure>) -> Failure {
    failures.into_iter().flatten().next()
}

fn run_summary(run: &FlowRun) -> Value {
    let first = run.diagnostics.first();
    let last = run.diagnostics.last();
    let max_energy_increase = run
        .diagnostics
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(0.0f64, f64::max);
    json!({
        "stop": run.stop,
        "failure": run.failure.as_ref().map(|e| e.to_string()),
        "accepted_steps": run.accepted,
        "rejected_steps": run.rejected,
        "final_time": last.map(|d| d.t),
        "initial_energy": first.map(|d| d.energy),
        "final_energy": last.map(|d| d.energy),
        "max_energy_increase": max_energy_increase,
        "initial_length": first.map(|d| d.length),
        "final_length": last.map(|d| d.length),
        "initial_mass": first.and_then(|d| d.mass),
        "final_mass": last.and_then(|d| d.mass),
        "final_closure_norm": last.map(|d| d.closure_norm),
        "final_rhs_sup": last.map(|d| d.rhs_sup),
    })
}

fn phase_sep(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<(Value, Failure), HarnessError> {
    let p = cfg.phase_sep();
    let nodal = cfg.nodal_model()?;
    let grid = grid_for(cfg)?;
    let u0 = make_named_curve(&p.curve, &grid).map_err(HarnessError::model("initial curve"))?;
    let l0 = total_length(&u0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rho0: Vec<f64> = grid
        .s_values()
        .iter()
        .map(|s| {
            let noise = if p.density_noise > 0.0 {
                p.density_noise * rng.random_range(-1.0..=1.0)
            } else {
                0.0
            };
            p.density_mean - p.density_amplitude * (2.0 * PI * p.density_mode as f64 * s).cos() + noise
        })
        .collect();
    let initial = FlowState::with_agents(u0.clone(), rho0).map_err(HarnessError::model("initial density"))?;
    out.write_curve("initial", &initial)?;

    let opts = cfg.run_options(p.t_end, &p.controller, p.project_every, p.snapshot_every);
    let families: Vec<(f64, FlowFamily)> = p
        .epsilons
        .iter()
        .map(|&epsilon| {
            let params = PhaseSepParams {
                epsilon,
                delta: p.delta,
                beta: p.beta,
                sigma1_len: p.sigma1,
                gamma0_length: l0,
            };
            (epsilon, FlowFamily::PhaseSep { params, nodal: nodal.clone() })
        })
        .collect();
    let runs = parallel::map(Execution::default(), &families, |(_, family)| {
        run_flow(initial.clone(), family, &opts)
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((eps, _), run) in families.iter().zip(runs) {
        let mut run = run.map_err(HarnessError::model(format!("phase-sep {}", eps_tag(*eps))))?;
        let stem = eps_tag(*eps);
        let fin = &run.final_state;
        let rho = fin.rho.as_deref().expect("phase-sep state carries an agent density");
        write_trace(out, &format!("{stem}_trace.csv"), &fin.u, rho, &nodal)?;
        let transitions = detect_transitions(&fin.u, rho, &nodal).map(|t| t.len()).ok();
        let nodal_distance = mean_nodal_distance(&fin.u, rho, &nodal);
        let mut row = run_summary(&run);
        row["epsilon"] = json!(eps);
        row["length_ratio"] = json!(total_length(&fin.u) / l0);
        row["transitions"] = json!(transitions);
        row["mean_nodal_distance"] = json!(nodal_distance);
        rows.push(row);
        failures.push(write_flow(out, &stem, &mut run)?);
    }
    let summary = json!({
        "experiment": "phase-sep",
        "reference_length": l0,
        "runs": rows,
    });
    Ok((summary, first_failure(failures)))
}

fn mean_nodal_distance(u: &IntrinsicState, rho: &[f64], nodal: &NodalModel) -> f64 {
    let d: Vec<f64> = (0..u.n())
        .map(|j| nodal.distance_to_f_nodal_set(u.kappa()[j], rho[j]))
        .collect();
    u.arc_mean(&d)
}

/// The `(κ, ρ)` trace of a state, for overlaying on the nodal lines.
fn write_trace(
    out: &mut ArtifactWriter,
    name: &str,
    u: &IntrinsicState,
    rho: &[f64],
    nodal: &NodalModel,
) -> Result<(), HarnessError> {
    let rows: Vec<Vec<String>> = (0..u.n())
        .map(|j| {
            let (k, r) = (u.kappa()[j], rho[j]);
            vec![
                fmt_f64(u.grid().s(j)),
                fmt_f64(k),
                fmt_f64(r),
                fmt_f64(nodal.scaled_density(k, r)),
                fmt_f64(nodal.distance_to_f_nodal_set(k, r)),
            ]
        })
        .collect();
    out.write_table(name, &["s", "kappa", "rho", "rho_scaled", "nodal_distance"], &rows)
}

/// Largest pointwise distance between two sampled curves after removing the
/// centroid and the best rotation (2-D Procrustes without scaling).
pub(crate) fn aligned_sup_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let centroid = |p: &[[f64; 2]]| {
        let m = p.len() as f64;
        let (x, y) = p.iter().fold((0.0, 0.0), |acc, q| (acc.0 + q[0], acc.1 + q[1]));
        [x / m, y / m]
    };
    let (ca, cb) = (centroid(a), centroid(b));
    let (mut dot, mut cross) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (px, py) = (p[0] - ca[0], p[1] - ca[1]);
        let (qx, qy) = (q[0] - cb[0], q[1] - cb[1]);
        dot += px * qx + py * qy;
        cross += qx * py - qy * px;
    }
    let phi = cross.atan2(dot);
    let (s, c) = phi.sin_cos();
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let (qx, qy) = (q[0] - cb[0], q[1] - cb[1]);
            let rx = c * qx - s * qy;
            let ry = s * qx + c * qy;
            (p[0] - ca[0] - rx).hypot(p[1] - ca[1] - ry)
        })
        .fold(0.0, f64::max)
}

fn incomp_compare(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<(Value, Failure), HarnessError> {
    let p = cfg.incomp_compare();
    let grid = grid_for(cfg)?;
    let u0 = make_named_curve(&p.curve, &grid).map_err(HarnessError::model("initial curve"))?;
    let l0 = total_length(&u0);
    let form = WillmoreForm::WillmoreBeta {
        beta: p.beta,
        ref_length: p.ref_length.unwrap_or(l0),
    };
    out.write_curve("initial", &FlowState::curve(u0.clone()))?;

    let membrane = FlowState::with_membrane(u0.clone(), vec![1.0; grid.n()]).map_err(HarnessError::model("membrane density"))?;
    let cases = vec![
        (FlowFamily::Curvature { form: form.clone() }, FlowState::curve(u0.clone())),
        (FlowFamily::Incompressible { base: form.clone() }, FlowState::curve(u0.clone())),
        (
            FlowFamily::Penalized {
                epsilon: p.epsilon,
                base: form.clone(),
            },
            membrane,
        ),
    ];
    let opts = cfg.run_options(p.t_end, &p.controller, p.project_every, p.snapshot_every);
    let runs = parallel::map(Execution::default(), &cases, |(family, state)| {
        run_flow(state.clone(), family, &opts)
    });

    let mut rows = serde_json::Map::new();
    let mut finals = Vec::new();
    let mut failures = Vec::new();
    for ((family, _), run) in cases.iter().zip(runs) {
        let label = family.label();
        let mut run = run.map_err(HarnessError::model(label))?;
        let fin = &run.final_state;
        let mut row = run_summary(&run);
        let length = total_length(&fin.u);
        row["relative_length_change"] = json!((length - l0) / l0);
        if let Some(rho) = fin.rho_m.as_deref() {
            row["mean_density"] = json!(fin.u.arc_mean(rho));
            row["max_density_deviation"] = json!(rho.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max));
        }
        rows.insert(label.to_string(), row);
        finals.push(reconstruct_embedding(&fin.u, 0.0, [0.0, 0.0]).gamma);
        failures.push(write_flow(out, label, &mut run)?);
    }
    let sup_pen_inc = aligned_sup_distance(&finals[2], &finals[1]);
    let sup_cur_inc = aligned_sup_distance(&finals[0], &finals[1]);
    let summary = json!({
        "experiment": "incomp-compare",
        "epsilon": p.epsilon,
        "initial_length": l0,
        "flows": rows,
        "sup_distance_penalized_incompressible": sup_pen_inc,
        "sup_distance_penalized_incompressible_over_epsilon": sup_pen_inc / p.epsilon,
        "sup_distance_curvature_incompressible": sup_cur_inc,
    });
    Ok((summary, first_failure(failures)))
}

/// Energies of the recovery sequence against the sharp-interface limit.
#[derive(Clone, Debug, Serialize)]
pub struct GammaReport {
    pub limit_energy: f64,
    pub epsilons: Vec<f64>,
    pub recovery_energies: Vec<f64>,
    pub abs_errors: Vec<f64>,
    /// Least-squares slope of `log|F_ε - F₀|` against `log ε`.
    pub order: Option<f64>,
    pub theta1: f64,
    pub sigma1_st: f64,
}

/// Compute the Γ-convergence table for a gamma-convergence config.
pub fn gamma_report(config: &ExperimentConfig) -> Result<GammaReport, HarnessError> {
    if config.experiment != ExperimentName::GammaConvergence {
        return Err(HarnessError::Config(format!(
            "the gamma command needs a gamma-convergence config, got {}",
            config.experiment
        )));
    }
    let cfg = config.resolve()?;
    Ok(gamma_table(&cfg)?.0)
}

fn gamma_table(cfg: &ExperimentConfig) -> Result<(GammaReport, IntrinsicState, Vec<Vec<f64>>), HarnessError> {
    let p = cfg.gamma_convergence();
    let nodal = cfg.nodal_model()?;
    let grid = grid_for(cfg)?;
    let u = make_named_curve(&p.curve, &grid).map_err(HarnessError::model("curve"))?;
    let t = TransitionSet::new(p.transitions.clone(), p.plus_first)
        .map_err(|e| HarnessError::Config(format!("gamma_convergence.transitions: {e}")))?;
    let f0 = gamma_limit_energy(&u, &t, p.delta, &nodal).map_err(HarnessError::model("limit energy"))?;
    let per_eps = parallel::map(Execution::default(), &p.epsilons, |&eps| {
        let rec = recovery_sequence(&u, &t, eps, &nodal)?;
        let params = PhaseSepParams {
            epsilon: eps,
            delta: p.delta,
            beta: 0.0,
            sigma1_len: 1.0,
            gamma0_length: 1.0,
        };
        Ok::<_, CurveError>((phase_sep_energy(&u, &rec.density, &params, &nodal), rec.density))
    });
    let mut energies = Vec::new();
    let mut densities = Vec::new();
    for (eps, r) in p.epsilons.iter().zip(per_eps) {
        let (e, d) = r.map_err(HarnessError::model(format!("recovery sequence {}", eps_tag(*eps))))?;
        energies.push(e);
        densities.push(d);
    }
    let abs_errors: Vec<f64> = energies.iter().map(|e| (e - f0).abs()).collect();
    let st = surface_tension_constants(&DoubleWell::default());
    let report = GammaReport {
        limit_energy: f0,
        order: loglog_slope(&p.epsilons, &abs_errors),
        epsilons: p.epsilons,
        recovery_energies: energies,
        abs_errors,
        theta1: st.theta1,
        sigma1_st: st.sigma1_st,
    };
    Ok((report, u, densities))
}

fn gamma_convergence(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<Value, HarnessError> {
    let (report, u, densities) = gamma_table(cfg)?;
    let rows: Vec<Vec<String>> = (0..report.epsilons.len())
        .map(|i| {
            vec![
                fmt_f64(report.epsilons[i]),
                fmt_f64(report.recovery_energies[i]),
                fmt_f64(report.limit_energy),
                fmt_f64(report.abs_errors[i]),
            ]
        })
        .collect();
    out.write_table("gamma.csv", &["epsilon", "recovery_energy", "limit_energy", "abs_error"], &rows)?;
    for (eps, rho) in report.epsilons.iter().zip(densities) {
        let state = FlowState::with_agents(u.clone(), rho).map_err(HarnessError::model("recovery density"))?;
        out.write_curve(&format!("recovery_{}", eps_tag(*eps)), &state)?;
    }
    let mut summary = serde_json::to_value(&report)?;
    summary["experiment"] = json!("gamma-convergence");
    Ok(summary)
}

/// Lowest eigenvector of the Helmholtz matrix, signed to have negative sum.
fn lowest_helmholtz_mode(h: &HelmholtzOperator) -> (f64, Vec<f64>) {
    let eig = h.matrix().clone().symmetric_eigen();
    let (imin, lmin) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, l)| if l < best.1 { (i, l) } else { best });
    let mut w: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
    if w.iter().sum::<f64>() > 0.0 {
        w.iter_mut().for_each(|x| *x = -*x);
    }
    (lmin, w)
}

fn icm_scaling(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<(Value, Failure), HarnessError> {
    let p = cfg.icm_scaling();
    let grid = grid_for(cfg)?;
    let u0 = make_named_curve(&p.curve, &grid).map_err(HarnessError::model("initial curve"))?;
    let h = HelmholtzOperator::new(&u0).map_err(HarnessError::model("Helmholtz operator"))?;
    let (lambda_min, w0) = lowest_helmholtz_mode(&h);
    let w0_norm = h2_norm(&w0, &u0);
    let excess = excess_density(&u0, &p.base).map_err(HarnessError::model("excess density"))?;

    let runs = parallel::map(Execution::default(), &p.epsilons, |&eps| {
        // ρ_m = 1 + ερ̄_m + w with ‖w‖_{H²} = d0_factor·ε².
        let scale = p.d0_factor * eps * eps / w0_norm;
        let rho: Vec<f64> = (0..grid.n()).map(|j| 1.0 + eps * excess[j] + scale * w0[j]).collect();
        let family = FlowFamily::Penalized {
            epsilon: eps,
            base: p.base.clone(),
        };
        let t_end = (p.fit_window * eps).max(p.residual_time);
        let opts = cfg.run_options(t_end, &p.controller, 10, 0);
        let state = FlowState::with_membrane(u0.clone(), rho)?;
        run_flow(state, &family, &opts)
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let (mut fit_eps, mut rates, mut plateaus, mut residuals) = (vec![], vec![], vec![], vec![]);
    for (&eps, run) in p.epsilons.iter().zip(runs) {
        let stem = eps_tag(eps);
        let mut run = run.map_err(HarnessError::model(format!("icm-scaling {stem}")))?;
        let window = p.fit_window * eps * (1.0 + 1e-12);
        let (t, d): (Vec<f64>, Vec<f64>) = run
            .diagnostics
            .iter()
            .filter(|x| x.t <= window)
            .filter_map(|x| x.d_m.map(|d| (x.t, d)))
            .unzip();
        let fit = fit_exp_plateau(&t, &d);
        let residual = run
            .diagnostics
            .iter()
            .find(|x| x.t >= p.residual_time * (1.0 - 1e-12))
            .and_then(|x| x.residual_h2);
        if let (Some(f), Some(r)) = (fit, residual) {
            fit_eps.push(eps);
            rates.push(f.b);
            plateaus.push(f.c.abs());
            residuals.push(r);
        }
        let mut row = run_summary(&run);
        row["epsilon"] = json!(eps);
        row["initial_distance"] = json!(d.first());
        row["fit"] = json!(fit);
        row["rate_times_epsilon"] = json!(fit.map(|f| f.b * eps));
        row["residual_h2_at_residual_time"] = json!(residual);
        rows.push(row);
        failures.push(write_flow(out, &stem, &mut run)?);
    }
    let scaled_rates: Vec<f64> = rates.iter().zip(&fit_eps).map(|(b, e)| b * e).collect();
    let spread = if scaled_rates.is_empty() {
        None
    } else {
        let mean = scaled_rates.iter().sum::<f64>() / scaled_rates.len() as f64;
        let (lo, hi) = scaled_rates
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        Some((hi - lo) / mean)
    };
    let summary = json!({
        "experiment": "icm-scaling",
        "helmholtz_min_eig": lambda_min,
        "residual_time": p.residual_time,
        "runs": rows,
        "rate_times_epsilon_spread": spread,
        "rate_slope": loglog_slope(&fit_eps, &rates),
        "plateau_slope": loglog_slope(&fit_eps, &plateaus),
        "residual_slope": loglog_slope(&fit_eps, &residuals),
    });
    Ok((summary, first_failure(failures)))
}

fn operators(cfg: &ExperimentConfig, out: &mut ArtifactWriter) -> Result<Value, HarnessError> {
    let p = cfg.operators();
    let grid = grid_for(cfg)?;
    let u = make_named_curve(&p.curve, &grid).map_err(HarnessError::model("curve"))?;
    let h = HelmholtzOperator::new(&u).map_err(HarnessError::model("Helmholtz operator"))?;
    let h_spec = h.spectrum();
    let i_spec = incompressibility_spectrum(&u).map_err(HarnessError::model("incompressibility spectrum"))?;
    let table = |spec: &[f64]| -> Vec<Vec<String>> {
        spec.iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), fmt_f64(*v)])
            .collect()
    };
    out.write_table("helmholtz_spectrum.csv", &["index", "eigenvalue"], &table(&h_spec))?;
    out.write_table("incompressibility_spectrum.csv", &["index", "eigenvalue"], &table(&i_spec))?;
    out.write_curve("curve", &FlowState::curve(u.clone()))?;

    let kernel_count = i_spec.iter().filter(|v| **v <= 1e-8).count();
    let positive_min = i_spec.iter().copied().filter(|v| *v > 1e-8).fold(f64::INFINITY, f64::min);
    let ik = h
        .incompressibility_apply(u.kappa())
        .map_err(HarnessError::model("incompressibility operator"))?;
    Ok(json!({
        "experiment": "operators",
        "curve": p.curve,
        "n": grid.n(),
        "helmholtz_min_eig": h.min_eig(),
        "helmholtz_max_eig": h_spec.last(),
        "helmholtz_h2_coercivity": helmholtz_h2_coercivity(&h),
        "incompressibility_kernel_count": kernel_count,
        "incompressibility_min_positive": positive_min,
        "incompressibility_max": i_spec.last(),
        "curvature_kernel_residual": u.l2_norm(&ik) / u.l2_norm(u.kappa()),
    }))
}
