//! Crossbar arrays of MTJ synapses.
//!
//! Row `r` carries the spike train of pre-neuron `r` (pinned-layer
//! terminals), column `c` that of post-neuron `c` (free-layer terminals).
//! Device `(r, c)` sees `V_row(t) - V_col(t)`. Spikes overlapping on one
//! line add linearly. Selectors, line parasitics and sneak paths are not
//! modeled, so devices are independent given the line waveforms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, DeviceSim};
pub use crate::device::SwitchEvent;
use crate::error::{Error, Result};
use crate::magnetodynamics::{LlgsIntegrator, MaterialParams};
use crate::montecarlo::SimConfig;
use crate::rng::RngStream;
use crate::thermal::{MtjState, ResistanceModel, ThermalParams};
use crate::waveform::{neuron_train, NeuronPulseSpec, Waveform};

/// Lane bit keeping crossbar streams disjoint from sweep streams.
const CROSSBAR_LANE: u64 = 1 << 31;

/// Per-cell parameter replacement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellOverride {
    pub row: usize,
    pub col: usize,
    pub material: Option<MaterialParams>,
    pub thermal: Option<ThermalParams>,
    /// `state` is ignored; initial states come from the config matrix.
    pub resistance: Option<ResistanceModel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossbarConfig {
    pub rows: usize,
    pub cols: usize,
    /// Shared cell parameters.
    pub device: DeviceParams,
    pub overrides: Vec<CellOverride>,
    pub pre_spec: NeuronPulseSpec,
    pub post_spec: NeuronPulseSpec,
    /// `rows x cols`
    pub initial_states: Vec<Vec<MtjState>>,
}

impl CrossbarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::config("crossbar needs at least one row and one column"));
        }
        if self.initial_states.len() != self.rows
            || self.initial_states.iter().any(|r| r.len() != self.cols)
        {
            return Err(Error::config(format!(
                "initial state matrix must be {}x{}",
                self.rows, self.cols
            )));
        }
        for o in &self.overrides {
            if o.row >= self.rows || o.col >= self.cols {
                return Err(Error::config(format!(
                    "override for cell ({}, {}) outside the {}x{} array",
                    o.row, o.col, self.rows, self.cols
                )));
            }
        }
        self.pre_spec.validate()?;
        self.post_spec.validate()?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                self.cell_params(r, c).validate()?;
            }
        }
        Ok(())
    }

    /// Parameters of cell `(row, col)` including its initial state.
    pub fn cell_params(&self, row: usize, col: usize) -> DeviceParams {
        let mut p = self.device.clone();
        for o in self.overrides.iter().filter(|o| o.row == row && o.col == col) {
            if let Some(m) = &o.material {
                p.material = m.clone();
            }
            if let Some(t) = &o.thermal {
                p.thermal = t.clone();
            }
            if let Some(r) = o.resistance {
                p.resistance = r;
            }
        }
        p.resistance.state = self.initial_states[row][col];
        p
    }
}

/// Spike times per neuron, strictly increasing, non-negative.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeSchedule {
    trains: Vec<Vec<f64>>,
}

impl SpikeSchedule {
    pub fn new(trains: Vec<Vec<f64>>) -> Result<Self> {
        for (i, train) in trains.iter().enumerate() {
            if train.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(Error::config(format!("neuron {i}: spike times must be >= 0")));
            }
            if train.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config(format!(
                    "neuron {i}: spike times must be strictly increasing"
                )));
            }
        }
        Ok(Self { trains })
    }

    /// `n` neurons with no spikes.
    pub fn silent(n: usize) -> Self {
        Self {
            trains: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.trains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trains.is_empty()
    }

    pub fn train(&self, neuron: usize) -> &[f64] {
        &self.trains[neuron]
    }

    pub fn trains(&self) -> &[Vec<f64>] {
        &self.trains
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceReport {
    pub row: usize,
    pub col: usize,
    pub initial_state: MtjState,
    pub final_state: MtjState,
    /// K
    pub peak_temperature: f64,
    pub events: Vec<SwitchEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossbarResult {
    pub rows: usize,
    pub cols: usize,
    pub final_states: Vec<Vec<MtjState>>,
    /// Row-major.
    pub devices: Vec<DeviceReport>,
}

impl CrossbarResult {
    pub fn device(&self, row: usize, col: usize) -> &DeviceReport {
        &self.devices[row * self.cols + col]
    }
}

/// Line waveforms for every row and column.
pub fn line_waveforms(
    config: &CrossbarConfig,
    pre: &SpikeSchedule,
    post: &SpikeSchedule,
) -> Result<(Vec<Waveform>, Vec<Waveform>)> {
    if pre.len() != config.rows || post.len() != config.cols {
        return Err(Error::config(format!(
            "schedules cover {} pre and {} post neurons, array is {}x{}",
            pre.len(),
            post.len(),
            config.rows,
            config.cols
        )));
    }
    let rows = pre
        .trains()
        .iter()
        .map(|t| neuron_train(t, &config.pre_spec))
        .collect::<Result<Vec<_>>>()?;
    let cols = post
        .trains()
        .iter()
        .map(|t| neuron_train(t, &config.post_spec))
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, cols))
}

fn check_horizon(
    config: &CrossbarConfig,
    pre: &SpikeSchedule,
    post: &SpikeSchedule,
    sim: &SimConfig,
) -> Result<()> {
    let limit = sim.horizon * (1.0 + 1e-12);
    let late = |sched: &SpikeSchedule, spec: &NeuronPulseSpec| {
        sched
            .trains()
            .iter()
            .flatten()
            .any(|t| t + spec.duration() > limit)
    };
    if late(pre, &config.pre_spec) || late(post, &config.post_spec) {
        return Err(Error::config("spike schedule extends beyond the simulation horizon"));
    }
    Ok(())
}

/// Simulate one cell under its composite voltage.
pub fn simulate_device(
    config: &CrossbarConfig,
    row_wave: &Waveform,
    col_wave: &Waveform,
    sim: &SimConfig,
    repetition: u64,
    row: usize,
    col: usize,
) -> Result<DeviceReport> {
    let params = config.cell_params(row, col);
    let integrator = LlgsIntegrator::new(params.material.clone(), sim.dt, sim.noise_convention)?;
    let device_index = (row * config.cols + col) as u64;
    let mut rng = RngStream::for_trial(sim.master_seed, CROSSBAR_LANE | repetition, device_index);
    let mut dev = DeviceSim::new(&integrator, &params, sim, &mut rng)?;
    let waveform = row_wave.difference(col_wave);
    dev.run(&waveform, sim.total_steps()?, &mut rng, None);
    Ok(DeviceReport {
        row,
        col,
        initial_state: params.resistance.state,
        final_state: dev.state(),
        peak_temperature: dev.peak_temperature(),
        events: dev.into_events(),
    })
}

/// Simulate the array once (repetition 0).
pub fn simulate(
    config: &CrossbarConfig,
    pre: &SpikeSchedule,
    post: &SpikeSchedule,
    sim: &SimConfig,
) -> Result<CrossbarResult> {
    simulate_repetition(config, pre, post, sim, 0)
}

/// Simulate the array with the streams of Monte Carlo repetition
/// `repetition`. Devices run in parallel.
pub fn simulate_repetition(
    config: &CrossbarConfig,
    pre: &SpikeSchedule,
    post: &SpikeSchedule,
    sim: &SimConfig,
    repetition: u64,
) -> Result<CrossbarResult> {
    config.validate()?;
    sim.validate()?;
    check_horizon(config, pre, post, sim)?;
    let (rows, cols) = line_waveforms(config, pre, post)?;
    let devices = (0..config.rows * config.cols)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / config.cols, i % config.cols);
            simulate_device(config, &rows[r], &cols[c], sim, repetition, r, c)
        })
        .collect::<Result<Vec<_>>>()?;
    let final_states = (0..config.rows)
        .map(|r| (0..config.cols).map(|c| devices[r * config.cols + c].final_state).collect())
        .collect();
    Ok(CrossbarResult {
        rows: config.rows,
        cols: config.cols,
        final_states,
        devices,
    })
}

/// Nearest heating-to-switching interval seen by a device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub row: usize,
    pub col: usize,
    /// Positive: pre heating followed by post switching. Negative: post
    /// heating followed by pre switching.
    pub delta_t: f64,
}

/// For every heating pulse on a device, the interval to the first
/// switching pulse from the opposite line that starts at or after the
/// heating pulse ends.
pub fn effective_pairings(
    pre: &SpikeSchedule,
    post: &SpikeSchedule,
    pre_spec: &NeuronPulseSpec,
    post_spec: &NeuronPulseSpec,
) -> Vec<Pairing> {
    let next_after = |times: &[f64], t: f64| times.iter().copied().find(|&s| s >= t);
    let mut out = Vec::new();
    for (r, pre_train) in pre.trains().iter().enumerate() {
        for (c, post_train) in post.trains().iter().enumerate() {
            for &s in pre_train {
                let heat_end = s + pre_spec.heating_end_offset();
                if let Some(p) = next_after(post_train, heat_end) {
                    out.push(Pairing {
                        row: r,
                        col: c,
                        delta_t: p - heat_end,
                    });
                }
            }
            for &p in post_train {
                let heat_end = p + post_spec.heating_end_offset();
                if let Some(s) = next_after(pre_train, heat_end) {
                    out.push(Pairing {
                        row: r,
                        col: c,
                        delta_t: -(s - heat_end),
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::NS;
    use crate::waveform::{Polarity, PulseSpec};

    fn spec() -> NeuronPulseSpec {
        NeuronPulseSpec {
            switching: PulseSpec::new(0.3, 2.0 * NS, Polarity::Positive),
            heating: PulseSpec::new(1.0, 1.0 * NS, Polarity::Positive),
            gap: 0.0,
        }
    }

    fn config(rows: usize, cols: usize) -> CrossbarConfig {
        CrossbarConfig {
            rows,
            cols,
            device: DeviceParams::reference(),
            overrides: Vec::new(),
            pre_spec: spec(),
            post_spec: spec(),
            initial_states: vec![vec![MtjState::AP; cols]; rows],
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(SpikeSchedule::new(vec![vec![1.0, 1.0]]).is_err());
        assert!(SpikeSchedule::new(vec![vec![-1.0]]).is_err());
        assert!(SpikeSchedule::new(vec![vec![0.0, 1.0], vec![]]).is_ok());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut cfg = config(2, 2);
        cfg.initial_states.pop();
        assert!(cfg.validate().is_err());
        let cfg = config(2, 2);
        let sim = SimConfig::default();
        let r = simulate(&cfg, &SpikeSchedule::silent(3), &SpikeSchedule::silent(2), &sim);
        assert!(r.is_err());
    }

    #[test]
    fn late_spike_is_rejected() {
        let cfg = config(1, 1);
        let sim = SimConfig {
            horizon: 5.0 * NS,
            ..SimConfig::default()
        };
        let pre = SpikeSchedule::new(vec![vec![3.0 * NS]]).unwrap();
        assert!(matches!(
            simulate(&cfg, &pre, &SpikeSchedule::silent(1), &sim),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn pairing_layout() {
        let pre = SpikeSchedule::new(vec![vec![0.0]]).unwrap();
        let post = SpikeSchedule::new(vec![vec![10.0 * NS]]).unwrap();
        let p = effective_pairings(&pre, &post, &spec(), &spec());
        assert_eq!(p.len(), 1);
        assert!((p[0].delta_t - 7.0 * NS).abs() < 1e-20);
        assert!(effective_pairings(&SpikeSchedule::silent(0), &SpikeSchedule::silent(0), &spec(), &spec()).is_empty());
    }

    #[test]
    fn pairing_antisymmetry() {
        let a = SpikeSchedule::new(vec![vec![0.0, 20.0 * NS], vec![5.0 * NS]]).unwrap();
        let b = SpikeSchedule::new(vec![vec![8.0 * NS], vec![30.0 * NS]]).unwrap();
        let mut fwd: Vec<f64> = effective_pairings(&a, &b, &spec(), &spec())
            .iter()
            .map(|p| p.delta_t)
            .collect();
        let mut rev: Vec<f64> = effective_pairings(&b, &a, &spec(), &spec())
            .iter()
            .map(|p| -p.delta_t)
            .collect();
        fwd.sort_by(f64::total_cmp);
        rev.sort_by(f64::total_cmp);
        assert!(!fwd.is_empty());
        assert_eq!(fwd, rev);
    }

    #[test]
    fn overrides_apply_to_one_cell() {
        let mut cfg = config(1, 2);
        cfg.overrides.push(CellOverride {
            row: 0,
            col: 1,
            material: None,
            thermal: Some(ThermalParams {
                time_constant: 3.0 * NS,
                ..ThermalParams::reference()
            }),
            resistance: None,
        });
        assert_eq!(cfg.cell_params(0, 0).thermal.time_constant, 10.0 * NS);
        assert_eq!(cfg.cell_params(0, 1).thermal.time_constant, 3.0 * NS);
        cfg.overrides[0].col = 2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn equal_pulses_cancel_across_device() {
        let cfg = config(1, 1);
        let pre = SpikeSchedule::new(vec![vec![0.0]]).unwrap();
        let post = SpikeSchedule::new(vec![vec![0.0]]).unwrap();
        let (r, c) = line_waveforms(&cfg, &pre, &post).unwrap();
        assert!(r[0].difference(&c[0]).is_empty());
    }
}
