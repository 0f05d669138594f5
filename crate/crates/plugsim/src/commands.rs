//! Subcommand implementations. Each returns the process exit code; errors
//! map to [`exit::INVALID`](crate::exit::INVALID) in `main`.

use std::io::Write;
use std::path::Path;

use plugsim_core::demo::{
    aggregate, derive_gains, detect_phases, summarize_user, CohortStats, FieldStats, UserSummary,
};
use plugsim_core::impedance::{synthesize_params, DesignSpec};
use plugsim_core::mission::{evaluate_result, MissionConfig, MissionResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{resolve_seed, RunConfig, SweepSpec};
use crate::params::{ControllerParamsFile, WiringName};
use crate::{demo_io, exit, plot, trace_io, Error, Result};

/// Design targets used when turning derived gains into parameters.
pub const CALIBRATION_ZETA: f64 = 1.0;
pub const CALIBRATION_TS: f64 = 0.2;

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn parent_dir(path: &Path) -> &Path {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
}

/// Summary lines shared by `simulate` and `analyze`.
pub fn format_summary(result: &MissionResult) -> String {
    let (tx, ty) = result.final_theta.to_degrees();
    format!(
        "success: {}\n\
         final_theta_x_deg: {tx:.4}\n\
         final_theta_y_deg: {ty:.4}\n\
         plug_in_duration_s: {:.2}\n\
         plug_out_duration_s: {:.2}\n\
         f_z_plateau_mean_n: {:.3}\n\
         f_z_plateau_frac_within_15pct: {:.4}\n\
         fault: {}\n",
        result.success,
        result.plug_in_duration,
        result.plug_out_duration,
        result.f_z_plateau_mean,
        result.f_z_plateau_frac_within_15pct,
        result.fault_reason.as_deref().unwrap_or("none"),
    )
}

fn cohort_table(stats: &CohortStats) -> String {
    let deg = |f: FieldStats| FieldStats {
        mean: f.mean.to_degrees(),
        extremum: f.extremum.to_degrees(),
        std: f.std.to_degrees(),
    };
    let mut rows = vec![
        ("dtheta_x", deg(stats.delta_theta_x), "deg", ""),
        ("dtheta_y", deg(stats.delta_theta_y), "deg", ""),
        ("dF_x", stats.delta_f_x, "N", ""),
        ("dF_y", stats.delta_f_y, "N", ""),
        ("F_z_plug_in", stats.f_z_plug_in, "N", " (min)"),
        ("F_z_plug_out", stats.f_z_plug_out, "N", ""),
    ];
    if let Some(t) = stats.t_response {
        rows.push(("t_response", t, "s", ""));
    }
    let mut s = format!(
        "users: {}\n{:<14} {:>9} {:>15} {:>9}  unit\n",
        stats.n_users, "X", "X_mean", "X_max", "sigma_X"
    );
    for (name, f, unit, note) in rows {
        let extremum = format!("{:.3}{note}", f.extremum);
        s += &format!(
            "{name:<14} {:>9.3} {extremum:>15} {:>9.3}  {unit}\n",
            f.mean, f.std
        );
    }
    if stats.t_response.is_none() {
        s += "t_response: no force/velocity reversal pairs found\n";
    }
    s
}

pub fn calibrate(
    demos: &Path,
    out_path: &Path,
    depth_mm: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8> {
    let files = demo_io::demo_files(demos)?;
    let mut summaries: Vec<UserSummary> = Vec::new();
    for file in &files {
        let summary = demo_io::load_demo_file(file).and_then(|trace| {
            let phases = detect_phases(&trace)?;
            Ok(summarize_user(&trace, &phases)?)
        });
        match summary {
            Ok(s) => summaries.push(s),
            Err(e) => {
                let _ = writeln!(err, "skipping {}: {e}", file.display());
            }
        }
    }
    if summaries.is_empty() {
        let _ = writeln!(
            err,
            "no usable demonstration CSV files in {}",
            demos.display()
        );
        return Ok(exit::INVALID);
    }
    let stats = aggregate(&summaries)?;
    let gains = derive_gains(&stats, depth_mm)?;
    let params = |k_w| synthesize_params(&DesignSpec::new(CALIBRATION_ZETA, CALIBRATION_TS, k_w)?);
    let file = ControllerParamsFile {
        rot_x: params(gains.k_w_rot_x)?.into(),
        rot_y: params(gains.k_w_rot_y)?.into(),
        lin_z: params(gains.k_w_lin_z)?.into(),
        f_z_ref_in: -gains.f_z_ref,
        f_z_ref_out: gains.f_z_ref,
        wiring: WiringName::CrossAxis,
        ts_s: CALIBRATION_TS,
        zeta: CALIBRATION_ZETA,
    };
    file.save(out_path)?;

    let mut text = cohort_table(&stats);
    text += &format!(
        "K_w rot_x: {:.4e} rad/N\nK_w rot_y: {:.4e} rad/N\nK_w lin_z: {:.4} mm/N\nF_z_ref: {:.2} N\n",
        gains.k_w_rot_x, gains.k_w_rot_y, gains.k_w_lin_z, gains.f_z_ref
    );
    for (name, ch) in [
        ("rot_x", file.rot_x),
        ("rot_y", file.rot_y),
        ("lin_z", file.lin_z),
    ] {
        text += &format!("{name}: kd={:.5} dd={:.5} md={:.5e}\n", ch.kd, ch.dd, ch.md);
    }
    text += &format!("wrote {}\n", out_path.display());
    write_out(out, &text)?;
    Ok(exit::SUCCESS)
}

pub fn simulate(
    config_path: &Path,
    out_trace: &Path,
    plot_path: Option<&Path>,
    seed_flag: Option<u64>,
    env_seed: Option<&str>,
    out: &mut dyn Write,
) -> Result<u8> {
    let cfg = RunConfig::load(config_path)?;
    let seed = resolve_seed(seed_flag, cfg.seed, env_seed)?;
    let run = cfg.resolve(parent_dir(config_path), seed)?;
    let (result, trace) = run.run()?;
    trace_io::save_mission_trace(out_trace, &trace)?;
    if let Some(p) = plot_path {
        let svg = plot::mission_svg(&trace, (run.mission.f_z_ref_in, run.mission.f_z_ref_out));
        std::fs::write(p, svg).map_err(|e| Error::io(p, e))?;
    }
    write_out(out, &format!("seed: {seed}\n{}", format_summary(&result)))?;
    Ok(if result.success {
        exit::SUCCESS
    } else {
        exit::FAULT
    })
}

pub fn analyze(trace_path: &Path, out: &mut dyn Write) -> Result<u8> {
    let trace = trace_io::load_any_trace(trace_path)?;
    let result =
        evaluate_result(&trace, &MissionConfig::default()).map_err(|source| Error::Trace {
            source_name: trace_path.display().to_string(),
            source,
        })?;
    write_out(out, &format_summary(&result))?;
    Ok(exit::SUCCESS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self {
            mean,
            std,
            min,
            max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub index: usize,
    pub seed: u64,
    pub init_theta_x_deg: f64,
    pub init_theta_y_deg: f64,
    pub success: bool,
    pub final_theta_x_deg: f64,
    pub final_theta_y_deg: f64,
    pub plug_in_duration_s: f64,
    pub plug_out_duration_s: f64,
    pub f_z_plateau_mean_n: f64,
    pub f_z_plateau_frac_within_15pct: f64,
    pub fault_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub n_runs: usize,
    pub sweep_seed: u64,
    pub theta_total_max_deg: f64,
    pub success_rate: f64,
    pub final_theta_x_deg: Option<Spread>,
    pub final_theta_y_deg: Option<Spread>,
    pub final_theta_total_deg: Option<Spread>,
    pub f_z_plateau_mean_n: Option<Spread>,
    pub f_z_plateau_frac_within_15pct: Option<Spread>,
    pub runs: Vec<RunEntry>,
}

impl BatchReport {
    fn from_runs(spec: &SweepSpec, sweep_seed: u64, runs: Vec<RunEntry>) -> Self {
        let ok: Vec<&RunEntry> = runs.iter().filter(|r| r.success).collect();
        let col =
            |f: fn(&RunEntry) -> f64| Spread::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
        Self {
            n_runs: runs.len(),
            sweep_seed,
            theta_total_max_deg: spec.theta_total_max_deg,
            success_rate: ok.len() as f64 / runs.len() as f64,
            final_theta_x_deg: col(|r| r.final_theta_x_deg),
            final_theta_y_deg: col(|r| r.final_theta_y_deg),
            final_theta_total_deg: col(|r| r.final_theta_x_deg.hypot(r.final_theta_y_deg)),
            f_z_plateau_mean_n: col(|r| r.f_z_plateau_mean_n),
            f_z_plateau_frac_within_15pct: col(|r| r.f_z_plateau_frac_within_15pct),
            runs,
        }
    }
}

/// Runs the sweep on a pool of `jobs` threads (all cores when `None`).
pub fn run_sweep(
    spec: &SweepSpec,
    base_dir: &Path,
    sweep_seed: u64,
    jobs: Option<usize>,
) -> Result<BatchReport> {
    spec.validate()?;
    spec.base.resolve(base_dir, sweep_seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
    let plan = spec.runs(sweep_seed);
    let entries: Vec<RunEntry> = pool.install(|| {
        plan.par_iter()
            .map(|run| {
                let resolved = spec.run_config(run).resolve(base_dir, run.seed)?;
                let (result, _) = resolved.run()?;
                let (fx, fy) = result.final_theta.to_degrees();
                Ok(RunEntry {
                    index: run.index,
                    seed: run.seed,
                    init_theta_x_deg: run.theta_x_deg,
                    init_theta_y_deg: run.theta_y_deg,
                    success: result.success,
                    final_theta_x_deg: fx,
                    final_theta_y_deg: fy,
                    plug_in_duration_s: result.plug_in_duration,
                    plug_out_duration_s: result.plug_out_duration,
                    f_z_plateau_mean_n: result.f_z_plateau_mean,
                    f_z_plateau_frac_within_15pct: result.f_z_plateau_frac_within_15pct,
                    fault_reason: result.fault_reason,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(BatchReport::from_runs(spec, sweep_seed, entries))
}

pub fn batch(
    sweep_path: &Path,
    out_report: &Path,
    jobs: Option<usize>,
    env_seed: Option<&str>,
    out: &mut dyn Write,
) -> Result<u8> {
    let spec = SweepSpec::load(sweep_path)?;
    let sweep_seed = resolve_seed(None, spec.seed, env_seed)?;
    let report = run_sweep(&spec, parent_dir(sweep_path), sweep_seed, jobs)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    std::fs::write(out_report, json).map_err(|e| Error::io(out_report, e))?;
    let mut text = format!(
        "runs: {}\nsuccess_rate: {:.3}\n",
        report.n_runs, report.success_rate
    );
    if let Some(s) = report.final_theta_total_deg {
        text += &format!(
            "final_theta_total_deg: mean {:.3} max {:.3}\n",
            s.mean, s.max
        );
    }
    text += &format!("wrote {}\n", out_report.display());
    write_out(out, &text)?;
    Ok(if report.success_rate == 1.0 {
        exit::SUCCESS
    } else {
        exit::FAULT
    })
}
