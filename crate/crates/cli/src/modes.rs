//! Execution of each mode against a validated [`RunConfig`].

use std::path::Path;

use kuramoto_core::{
    characteristic_targets, classify_finite, classify_measure, critical_coupling_with, detect_stationarity, discretize,
    entropy_change, h_functional, h_functional_finite, mean_phase, order_parameter, potential_u, random_phases,
    seeded_rng, self_consistency_roots_with, simulate, simulate_kinetic, summarize_targets, three_oscillator_ensemble,
    velocities, KineticTrajectory, OscillatorEnsemble, PhaseMeasure, StationaryClass, StopReason, Trajectory,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{InitKind, Mode, RunConfig, SweepTarget};
use crate::output::{
    ensure_dir, write_csv, write_json, SeriesRow, SweepRow, MANIFEST_FILE, SCHEMA_VERSION, SERIES_FILE, SERIES_HEADER,
    SUMMARY_FILE, SWEEP_FILE, SWEEP_HEADER, TOOL_NAME, TOOL_VERSION,
};
use crate::CliError;

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    /// A time integration stopped at `t_max` without meeting the
    /// stationarity test. Outputs are still complete.
    HorizonReached,
}

fn core_err(e: kuramoto_core::Error) -> CliError {
    use kuramoto_core::Error as E;
    match e {
        E::NonFinite { .. } | E::BracketNotFound { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

pub fn manifest(cfg: &RunConfig) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL_NAME,
        "tool_version": TOOL_VERSION,
        "mode": cfg.mode().as_str(),
        "seed": cfg.run.seed,
        "config": serde_json::to_value(cfg).expect("config serializes"),
    })
}

/// Writes the manifest, runs the mode and writes its outputs into `out`.
pub fn execute(cfg: &RunConfig, out: &Path) -> Result<Status, CliError> {
    ensure_dir(out)?;
    write_json(&out.join(MANIFEST_FILE), &manifest(cfg))?;
    let (summary, status) = match cfg.mode() {
        Mode::Finite => run_finite(cfg, out)?,
        Mode::Kinetic => run_kinetic(cfg, out)?,
        Mode::Roots => (run_roots(cfg)?, Status::Converged),
        Mode::Kc => (run_kc(cfg)?, Status::Converged),
        Mode::Classify => (run_classify(cfg)?, Status::Converged),
        Mode::Sweep => (run_sweep(cfg, out)?, Status::Converged),
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(status)
}

fn summary_head(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("mode".into(), json!(cfg.mode().as_str()));
    m
}

fn class_json(c: &StationaryClass<f64>) -> Value {
    match c {
        StationaryClass::Clustered { phi_star, c1, c2, counts } => json!({
            "label": c.label(),
            "phi_star": phi_star,
            "c1": c1,
            "c2": c2,
            "n_at_phi": counts.map(|k| k.n_at_phi),
            "k": counts.map(|k| k.k),
        }),
        _ => json!({
            "label": c.label(),
            "phi_star": null,
            "c1": null,
            "c2": null,
            "n_at_phi": null,
            "k": null,
        }),
    }
}

fn status_of(stop: StopReason) -> Status {
    match stop {
        StopReason::Stationary => Status::Converged,
        StopReason::Horizon => Status::HorizonReached,
    }
}

/// Initial finite ensemble at coupling `k`.
pub fn finite_ensemble(cfg: &RunConfig, k: f64) -> Result<OscillatorEnsemble<f64>, CliError> {
    let m = &cfg.model;
    let mut rng = seeded_rng(cfg.run.seed);
    let g = cfg.frequency.as_ref().map(|f| f.build()).transpose()?;
    let ens = match m.init {
        InitKind::ThreeOsc => three_oscillator_ensemble(m.delta0.expect("validated"), k),
        InitKind::Random | InitKind::Explicit => {
            let phases = match m.init {
                InitKind::Random => random_phases(m.n.expect("validated"), &mut rng),
                _ => m.phases.clone().expect("validated"),
            };
            // Frequencies are drawn after the phases from the same stream.
            let freqs = match (&m.freqs, &g) {
                (Some(f), _) => f.clone(),
                (None, Some(g)) => (0..phases.len()).map(|_| g.sample(&mut rng)).collect(),
                (None, None) => vec![0.0; phases.len()],
            };
            OscillatorEnsemble::new(phases, freqs, k)
        }
    }
    .map_err(core_err)?;
    Ok(if m.comoving { ens.to_comoving_frame() } else { ens })
}

fn finite_rows(traj: &Trajectory<f64>) -> impl Iterator<Item = [String; 7]> + '_ {
    (0..traj.len()).map(|i| {
        SeriesRow {
            t: traj.times[i],
            r: traj.r_series[i],
            phi: traj.phi_series[i],
            u: traj.u_series[i],
            mean_phase: traj.mean_phase_series[i],
            h: traj.h_series[i],
            entropy_change: None,
        }
        .cells()
    })
}

fn kinetic_rows(traj: &KineticTrajectory<f64>) -> impl Iterator<Item = [String; 7]> + '_ {
    (0..traj.len()).map(|i| {
        SeriesRow {
            t: traj.times[i],
            r: traj.r_series[i],
            phi: traj.phi_series[i],
            u: traj.u_series[i],
            mean_phase: traj.mean_phase_series[i],
            h: traj.h_series[i],
            entropy_change: Some(traj.entropy_series[i]),
        }
        .cells()
    })
}

fn finite_state_json(ens: &OscillatorEnsemble<f64>) -> Value {
    let op = order_parameter(ens);
    json!({
        "R": op.r,
        "phi": op.phi,
        "U": potential_u(ens),
        "mean_phase": mean_phase(ens),
        "H": h_functional_finite(ens),
    })
}

fn run_finite(cfg: &RunConfig, out: &Path) -> Result<(Value, Status), CliError> {
    let ens = finite_ensemble(cfg, cfg.model.coupling)?;
    let traj = simulate(&ens, &cfg.sim_config()).map_err(core_err)?;
    write_csv(&out.join(SERIES_FILE), SERIES_HEADER, finite_rows(&traj))?;
    let fin = traj.final_state();
    let mut s = summary_head(cfg);
    s.insert("n".into(), json!(ens.len()));
    s.insert("coupling".into(), json!(cfg.model.coupling));
    s.insert("stop".into(), json!(traj.stop.as_str()));
    s.insert("t_final".into(), json!(traj.final_time()));
    s.insert("samples".into(), json!(traj.len()));
    s.insert("final".into(), finite_state_json(fin));
    s.insert("phases".into(), json!(fin.phases()));
    s.insert("class".into(), class_json(&classify_finite(fin, cfg.classify.angle_tol)));
    Ok((Value::Object(s), status_of(traj.stop)))
}

fn initial_measure(cfg: &RunConfig, k: f64) -> Result<PhaseMeasure<f64>, CliError> {
    let (spec, m) = cfg.density_spec(k)?;
    discretize(&spec, m, k).map_err(core_err)
}

/// Masses on the stationary support branches for the largest
/// self-consistency root at coupling `k`, when a `[frequency]` law is given.
fn targets_json(cfg: &RunConfig, meas: &PhaseMeasure<f64>, k: f64) -> Result<Value, CliError> {
    let (Some(_), Some(phi)) = (&cfg.frequency, meas.order_parameter().phi) else {
        return Ok(Value::Null);
    };
    let g = cfg.frequency_law()?;
    let res = match self_consistency_roots_with(&g, k, &cfg.solver_options()) {
        Ok(r) => r,
        Err(kuramoto_core::Error::SupportTooWide { .. }) => return Ok(Value::Null),
        Err(e) => return Err(core_err(e)),
    };
    let Some(r_star) = res.largest else {
        return Ok(Value::Null);
    };
    let tags = characteristic_targets(meas, k, r_star, phi, cfg.classify.angle_tol);
    let t = summarize_targets(meas, &tags);
    Ok(json!({
        "r_star": r_star,
        "plus_mass": t.plus_mass,
        "minus_mass": t.minus_mass,
        "unresolved_mass": t.unresolved_mass,
        "drifting_mass": t.drifting_mass,
    }))
}

fn measure_state_json(meas: &PhaseMeasure<f64>) -> Value {
    let op = meas.order_parameter();
    json!({
        "R": op.r,
        "phi": op.phi,
        "U": op.r * op.r / 2.0,
        "mean_phase": meas.mean_phase(),
        "H": h_functional(meas),
        "entropy_change": entropy_change(meas).value,
    })
}

fn run_kinetic(cfg: &RunConfig, out: &Path) -> Result<(Value, Status), CliError> {
    let k = cfg.model.coupling;
    let meas = initial_measure(cfg, k)?;
    let traj = simulate_kinetic(&meas, &cfg.sim_config(), None).map_err(core_err)?;
    write_csv(&out.join(SERIES_FILE), SERIES_HEADER, kinetic_rows(&traj))?;
    let fin = &traj.final_measure;
    let mut s = summary_head(cfg);
    s.insert("particles".into(), json!(fin.len()));
    s.insert("has_atoms".into(), json!(fin.has_atoms()));
    s.insert("coupling".into(), json!(k));
    s.insert("stop".into(), json!(traj.stop.as_str()));
    s.insert("t_final".into(), json!(fin.time()));
    s.insert("samples".into(), json!(traj.len()));
    s.insert("final".into(), measure_state_json(fin));
    let class = classify_measure(fin, cfg.classify.angle_tol, cfg.classify.mass_tol);
    s.insert("class".into(), class_json(&class));
    s.insert("targets".into(), targets_json(cfg, fin, k)?);
    Ok((Value::Object(s), status_of(traj.stop)))
}

fn run_roots(cfg: &RunConfig) -> Result<Value, CliError> {
    let g = cfg.frequency_law()?;
    let k = cfg.model.coupling;
    let res = self_consistency_roots_with(&g, k, &cfg.solver_options()).map_err(core_err)?;
    let mut s = summary_head(cfg);
    s.insert("coupling".into(), json!(k));
    s.insert("max_abs_omega".into(), json!(g.max_abs()));
    s.insert("roots".into(), json!(res.roots));
    s.insert("largest".into(), json!(res.largest));
    s.insert("k_supercritical".into(), json!(res.k_supercritical));
    Ok(Value::Object(s))
}

fn run_kc(cfg: &RunConfig) -> Result<Value, CliError> {
    let g = cfg.frequency_law()?;
    let opts = cfg.solver_options();
    let kc = critical_coupling_with(&g, &opts).map_err(core_err)?;
    let r_at_kc = if kc > 0.0 { self_consistency_roots_with(&g, kc, &opts).map_err(core_err)?.largest } else { None };
    let mut s = summary_head(cfg);
    s.insert("k_c".into(), json!(kc));
    s.insert("r_at_k_c".into(), json!(r_at_kc));
    s.insert("max_abs_omega".into(), json!(g.max_abs()));
    Ok(Value::Object(s))
}

fn run_classify(cfg: &RunConfig) -> Result<Value, CliError> {
    let tol = cfg.sim.stationarity_tol;
    let mut s = summary_head(cfg);
    if cfg.density.is_some() {
        let meas = initial_measure(cfg, cfg.model.coupling)?;
        let v = velocities(&meas).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        s.insert("kind".into(), json!("measure"));
        s.insert("particles".into(), json!(meas.len()));
        s.insert("max_velocity".into(), json!(v));
        s.insert("stationary".into(), json!(v < tol));
        s.insert("final".into(), measure_state_json(&meas));
        let class = classify_measure(&meas, cfg.classify.angle_tol, cfg.classify.mass_tol);
        s.insert("class".into(), class_json(&class));
    } else {
        let ens = finite_ensemble(cfg, cfg.model.coupling)?;
        let v = kuramoto_core::finite_n_rhs(&ens).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        s.insert("kind".into(), json!("finite"));
        s.insert("n".into(), json!(ens.len()));
        s.insert("max_velocity".into(), json!(v));
        s.insert("stationary".into(), json!(detect_stationarity(&ens, tol)));
        s.insert("final".into(), finite_state_json(&ens));
        s.insert("class".into(), class_json(&classify_finite(&ens, cfg.classify.angle_tol)));
    }
    Ok(Value::Object(s))
}

fn sweep_point(cfg: &RunConfig, target: SweepTarget, k: f64) -> Result<SweepRow, CliError> {
    let sim = cfg.sim_config();
    match target {
        SweepTarget::Kinetic => {
            let traj = simulate_kinetic(&initial_measure(cfg, k)?, &sim, None).map_err(core_err)?;
            let fin = &traj.final_measure;
            let op = fin.order_parameter();
            let class = classify_measure(fin, cfg.classify.angle_tol, cfg.classify.mass_tol);
            Ok(SweepRow {
                k,
                r: op.r,
                phi: op.phi,
                class: class.label().into(),
                stop: traj.stop.as_str().into(),
                t_final: fin.time(),
            })
        }
        SweepTarget::Finite => {
            let traj = simulate(&finite_ensemble(cfg, k)?, &sim).map_err(core_err)?;
            let fin = traj.final_state();
            let op = order_parameter(fin);
            Ok(SweepRow {
                k,
                r: op.r,
                phi: op.phi,
                class: classify_finite(fin, cfg.classify.angle_tol).label().into(),
                stop: traj.stop.as_str().into(),
                t_final: traj.final_time(),
            })
        }
    }
}

/// Runs every coupling of the sweep independently (in parallel) and writes
/// one row per point. Unconverged points are reported in the `stop` column
/// rather than through the exit status.
fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<Value, CliError> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let ks = sweep.couplings();
    let rows: Vec<SweepRow> = ks.par_iter().map(|&k| sweep_point(cfg, sweep.target, k)).collect::<Result<_, _>>()?;
    write_csv(&out.join(SWEEP_FILE), SWEEP_HEADER, rows.iter().map(SweepRow::cells))?;

    let k_c = match &cfg.frequency {
        Some(f) => match critical_coupling_with(&f.build()?, &cfg.solver_options()) {
            Ok(kc) => Some(kc),
            Err(kuramoto_core::Error::BracketNotFound { .. }) => None,
            Err(e) => return Err(core_err(e)),
        },
        None => None,
    };
    let mut s = summary_head(cfg);
    s.insert("target".into(), json!(sweep.target));
    s.insert("points".into(), json!(rows.len()));
    s.insert("k_c".into(), json!(k_c));
    s.insert("horizon_points".into(), json!(rows.iter().filter(|r| r.stop == StopReason::Horizon.as_str()).count()));
    s.insert("final_r".into(), json!(rows.iter().map(|r| r.r).collect::<Vec<_>>()));
    Ok(Value::Object(s))
}
