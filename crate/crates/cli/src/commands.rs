//! Experiment commands. Each writes its files into `out_dir` and returns
//! their paths.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mtjsim_core::constants::NS;
use mtjsim_core::crossbar::{self, CrossbarResult};
use mtjsim_core::numfmt::sig9;
use mtjsim_core::{
    effective_pairings, run_trial, stdp_sweep, thermal_trace, Direction, MtjState, StdpCurve,
    ThermalSample, TracePoint, Waveform,
};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::plot::{line_chart, Series};

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub plot: bool,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn prepare(opts: &RunOptions) -> Result<()> {
    std::fs::create_dir_all(&opts.out_dir)
        .with_context(|| format!("cannot create output directory {}", opts.out_dir.display()))
}

/// Pair-protocol waveform of the `[trial]` section.
pub fn trial_waveform(cfg: &ExperimentConfig) -> Result<Waveform> {
    Ok(cfg
        .protocol()
        .waveform(cfg.trial.delta_t_ns * NS, cfg.trial.direction)?)
}

pub fn thermal_trace_csv(samples: &[ThermalSample]) -> String {
    let mut s = String::from("t_ns,voltage_V,power_W,temperature_K\n");
    for p in samples {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            sig9(p.t / NS),
            sig9(p.voltage),
            sig9(p.power),
            sig9(p.temperature)
        );
    }
    s
}

pub fn cmd_thermal_trace(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    prepare(opts)?;
    let waveform = trial_waveform(cfg)?;
    let state = cfg.trial.direction.initial_state();
    let samples = thermal_trace(&waveform, &cfg.thermal(), &cfg.resistance(state), &cfg.sim_config())?;
    let mut out = vec![write_file(&opts.out_dir, "thermal_trace.csv", &thermal_trace_csv(&samples))?];
    if opts.plot {
        let path = opts.out_dir.join("thermal_trace.svg");
        let pts = samples.iter().map(|p| (p.t / NS, p.temperature)).collect();
        line_chart(&path, "Free-layer temperature", "t (ns)", "T (K)", &[Series::line("T", pts)])?;
        out.push(path);
    }
    Ok(out)
}

pub fn trial_csv(trace: &[TracePoint]) -> String {
    let mut s = String::from("t_ns,mx,my,mz,temperature_K,voltage_V\n");
    for p in trace {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            sig9(p.t / NS),
            sig9(p.m.x),
            sig9(p.m.y),
            sig9(p.m.z),
            sig9(p.temperature),
            sig9(p.voltage)
        );
    }
    s
}

pub fn cmd_trial(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    prepare(opts)?;
    let waveform = trial_waveform(cfg)?;
    let device = cfg.device_params(cfg.trial.direction.initial_state())?;
    let sim = mtjsim_core::SimConfig {
        record_traces: true,
        ..cfg.sim_config()
    };
    let outcome = run_trial(&device, &waveform, &sim, 0, cfg.trial.trial_index)?;
    let trace = outcome.traces.as_deref().unwrap_or_default();
    let mut out = vec![write_file(&opts.out_dir, "trial_trace.csv", &trial_csv(trace))?];
    if opts.plot {
        let path = opts.out_dir.join("trial_trace.svg");
        let pts = trace.iter().map(|p| (p.t / NS, p.m.z)).collect();
        line_chart(&path, "Single trial", "t (ns)", "m_z", &[Series::line("m_z", pts)])?;
        out.push(path);
    }
    Ok(out)
}

pub fn stdp_csv(curve: &StdpCurve) -> String {
    let mut s = String::from("delta_t_ns,direction,n_trials,n_switched,p_signed,ci_low,ci_high\n");
    for p in &curve.points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            sig9(p.delta_t / NS),
            p.direction.label(),
            p.n_trials,
            p.n_switched,
            sig9(p.p_signed),
            sig9(p.ci_low),
            sig9(p.ci_high)
        );
    }
    s
}

pub fn run_stdp(cfg: &ExperimentConfig) -> Result<StdpCurve> {
    let device = cfg.device_params(MtjState::P)?;
    Ok(stdp_sweep(&cfg.grid(), &cfg.protocol(), &device, &cfg.sim_config())?)
}

pub fn cmd_stdp_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    prepare(opts)?;
    let curve = run_stdp(cfg)?;
    let mut out = vec![write_file(&opts.out_dir, "stdp_curve.csv", &stdp_csv(&curve))?];
    if opts.plot {
        let path = opts.out_dir.join("stdp_curve.svg");
        let branch = |d: Direction| -> Vec<(f64, f64)> {
            curve.branch(d).map(|p| (p.delta_t / NS, p.p_signed)).collect()
        };
        let series = [
            Series::line("AP to P", branch(Direction::ApToP)).with_markers(),
            Series::line("P to AP", branch(Direction::PToAp)).with_markers(),
        ];
        line_chart(&path, "STDP", "delta t (ns)", "signed switching probability", &series)?;
        out.push(path);
    }
    Ok(out)
}

/// Value rounded to the 9 significant digits used in every output file.
fn r9(x: f64) -> f64 {
    sig9(x).parse().expect("sig9 output parses")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time_ns: f64,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct DeviceRecord {
    pub row: usize,
    pub col: usize,
    pub initial_state: MtjState,
    pub final_state: MtjState,
    pub peak_temperature_K: f64,
    pub events: Vec<EventRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingRecord {
    pub row: usize,
    pub col: usize,
    pub delta_t_ns: f64,
}

/// Document written to `crossbar_result.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossbarReport {
    pub rows: usize,
    pub cols: usize,
    pub master_seed: u64,
    pub initial_states: Vec<Vec<MtjState>>,
    pub final_states: Vec<Vec<MtjState>>,
    pub pairings: Vec<PairingRecord>,
    pub devices: Vec<DeviceRecord>,
}

impl CrossbarReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("row,col,initial_state,final_state,n_events,peak_temperature_K\n");
        for d in &self.devices {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                d.row,
                d.col,
                d.initial_state,
                d.final_state,
                d.events.len(),
                sig9(d.peak_temperature_K)
            );
        }
        s
    }
}

pub fn run_crossbar(cfg: &ExperimentConfig) -> Result<(CrossbarResult, CrossbarReport)> {
    let config = cfg.crossbar_config()?;
    let (pre, post) = cfg.schedules()?;
    let sim = cfg.sim_config();
    let result = crossbar::simulate(&config, &pre, &post, &sim)?;
    let pairings = effective_pairings(&pre, &post, &config.pre_spec, &config.post_spec)
        .into_iter()
        .map(|p| PairingRecord {
            row: p.row,
            col: p.col,
            delta_t_ns: r9(p.delta_t / NS),
        })
        .collect();
    let devices = result
        .devices
        .iter()
        .map(|d| DeviceRecord {
            row: d.row,
            col: d.col,
            initial_state: d.initial_state,
            final_state: d.final_state,
            peak_temperature_K: r9(d.peak_temperature),
            events: d
                .events
                .iter()
                .map(|e| EventRecord {
                    time_ns: r9(e.time / NS),
                    direction: e.direction,
                })
                .collect(),
        })
        .collect();
    let report = CrossbarReport {
        rows: result.rows,
        cols: result.cols,
        master_seed: sim.master_seed,
        initial_states: config.initial_states.clone(),
        final_states: result.final_states.clone(),
        pairings,
        devices,
    };
    Ok((result, report))
}

pub fn cmd_crossbar(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    prepare(opts)?;
    let (_, report) = run_crossbar(cfg)?;
    Ok(vec![
        write_file(&opts.out_dir, "crossbar_result.json", &report.to_json())?,
        write_file(&opts.out_dir, "crossbar_summary.csv", &report.summary_csv())?,
    ])
}
