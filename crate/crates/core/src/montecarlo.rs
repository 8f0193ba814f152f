//! Monte Carlo trials, switching-probability estimates and STDP sweeps.
//!
//! Trial `i` of lane `l` draws from its own stream
//! `RngStream::for_trial(master_seed, l, i)`, so the counts returned here do
//! not depend on the size of the rayon pool they run on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{NS, PS};
use crate::device::{step_count, DeviceParams, DeviceSim, TracePoint};
use crate::error::{Error, Result};
use crate::magnetodynamics::{LlgsIntegrator, NoiseConvention, MAX_DT};
use crate::rng::RngStream;
use crate::stats::{wilson_interval, Z95};
use crate::thermal::{joule_power, thermal_step, MtjState, ResistanceModel, ThermalParams, ThermalState};
use crate::vector::Vector3;
use crate::waveform::{pair_protocol, Direction, HeatingPolarity, NeuronPulseSpec, PulseSpec, Waveform};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// s
    pub dt: f64,
    /// s; every waveform must end by then
    pub horizon: f64,
    /// Settling time simulated after the horizon, s.
    pub relax_window: f64,
    /// |m_z| a trajectory must cross to register a state change.
    pub switch_threshold: f64,
    pub n_trials: u64,
    pub master_seed: u64,
    pub record_traces: bool,
    pub noise_convention: NoiseConvention,
    /// Holds the free layer at a fixed temperature, ignoring Joule heating.
    pub clamp_temperature: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 * PS,
            horizon: 20.0 * NS,
            relax_window: 5.0 * NS,
            switch_threshold: 0.5,
            n_trials: 1000,
            master_seed: 0,
            record_traces: false,
            noise_convention: NoiseConvention::Brown,
            clamp_temperature: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(Error::config(format!("dt must lie in (0, 5 ps], got {} s", self.dt)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::config("horizon must be > 0"));
        }
        if !(self.relax_window >= 0.0) {
            return Err(Error::config("relax window must be >= 0"));
        }
        if self.n_trials < 1 {
            return Err(Error::config("n_trials must be >= 1"));
        }
        if !(self.switch_threshold.abs() < 1.0) {
            return Err(Error::config("switch threshold must satisfy |threshold| < 1"));
        }
        if let Some(t) = self.clamp_temperature {
            if !(t > 0.0) {
                return Err(Error::config("clamped temperature must be > 0 K"));
            }
        }
        Ok(())
    }

    pub fn total_steps(&self) -> Result<u64> {
        step_count(self.horizon + self.relax_window, self.dt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub switched: bool,
    pub initial_state: MtjState,
    pub final_m: Vector3,
    /// Last state registered by the threshold detector.
    pub detected_state: MtjState,
    pub peak_temperature: f64,
    pub traces: Option<Vec<TracePoint>>,
}

/// Validated, reusable setup for repeated trials of one scenario.
pub struct TrialRunner<'a> {
    integrator: LlgsIntegrator,
    device: &'a DeviceParams,
    waveform: &'a Waveform,
    config: &'a SimConfig,
    lane: u64,
    n_steps: u64,
}

impl<'a> TrialRunner<'a> {
    pub fn new(
        device: &'a DeviceParams,
        waveform: &'a Waveform,
        config: &'a SimConfig,
        lane: u64,
    ) -> Result<Self> {
        config.validate()?;
        device.validate()?;
        if waveform.end_time() > config.horizon * (1.0 + 1e-12) {
            return Err(Error::config(format!(
                "waveform ends at {:.3} ns, beyond the {:.3} ns horizon",
                waveform.end_time() / NS,
                config.horizon / NS
            )));
        }
        let integrator =
            LlgsIntegrator::new(device.material.clone(), config.dt, config.noise_convention)?;
        Ok(Self {
            integrator,
            device,
            waveform,
            config,
            lane,
            n_steps: config.total_steps()?,
        })
    }

    pub fn run(&self, trial_index: u64) -> TrialOutcome {
        let mut rng = RngStream::for_trial(self.config.master_seed, self.lane, trial_index);
        let mut sim = DeviceSim::new(&self.integrator, self.device, self.config, &mut rng)
            .expect("validated parameters admit an initial angle");
        let mut traces = self.config.record_traces.then(Vec::new);
        sim.run(self.waveform, self.n_steps, &mut rng, traces.as_mut());
        let initial_state = self.device.resistance.state;
        let final_m = sim.m();
        TrialOutcome {
            switched: MtjState::from_mz(final_m.z) != initial_state,
            initial_state,
            final_m,
            detected_state: sim.state(),
            peak_temperature: sim.peak_temperature(),
            traces,
        }
    }

    pub fn count_switches(&self, n_trials: u64) -> u64 {
        (0..n_trials)
            .into_par_iter()
            .map(|i| self.run(i).switched as u64)
            .sum()
    }
}

/// Run a single trial. `lane` selects the family of random streams.
pub fn run_trial(
    device: &DeviceParams,
    waveform: &Waveform,
    config: &SimConfig,
    lane: u64,
    trial_index: u64,
) -> Result<TrialOutcome> {
    Ok(TrialRunner::new(device, waveform, config, lane)?.run(trial_index))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchEstimate {
    pub n_trials: u64,
    pub n_switched: u64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SwitchEstimate {
    pub fn from_counts(n_switched: u64, n_trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(n_switched, n_trials, Z95);
        Self {
            n_trials,
            n_switched,
            p: n_switched as f64 / n_trials as f64,
            ci_low,
            ci_high,
        }
    }

    /// True when the 95% intervals are disjoint and `self` lies above.
    pub fn clearly_above(&self, other: &SwitchEstimate) -> bool {
        self.ci_low > other.ci_high
    }

    pub fn overlaps(&self, other: &SwitchEstimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Switching probability over `config.n_trials` trials with a 95% Wilson
/// interval.
pub fn estimate_switch_prob(
    device: &DeviceParams,
    waveform: &Waveform,
    config: &SimConfig,
    lane: u64,
) -> Result<SwitchEstimate> {
    let runner = TrialRunner::new(device, waveform, config, lane)?;
    let k = runner.count_switches(config.n_trials);
    Ok(SwitchEstimate::from_counts(k, config.n_trials))
}

/// Which switching direction is reported as a positive probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    #[default]
    ApToPPositive,
    PToApPositive,
}

impl SignConvention {
    pub fn sign(self, direction: Direction) -> f64 {
        match (self, direction) {
            (SignConvention::ApToPPositive, Direction::ApToP) => 1.0,
            (SignConvention::ApToPPositive, Direction::PToAp) => -1.0,
            (SignConvention::PToApPositive, Direction::ApToP) => -1.0,
            (SignConvention::PToApPositive, Direction::PToAp) => 1.0,
        }
    }
}

/// Heating and switching pulse of one pairing branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub heating: PulseSpec,
    pub switching: PulseSpec,
}

/// Pulse pairs for both quadrants of the STDP curve.
///
/// Potentiation (pre before post, Δt > 0) heats with the pre-neuron's
/// heating pulse and switches AP -> P with the post-neuron's switching
/// pulse; depression mirrors it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StdpProtocol {
    pub potentiation: PairSpec,
    pub depression: PairSpec,
    pub heating_polarity: HeatingPolarity,
    pub sign_convention: SignConvention,
}

impl StdpProtocol {
    pub fn from_neurons(pre: &NeuronPulseSpec, post: &NeuronPulseSpec) -> Self {
        Self {
            potentiation: PairSpec {
                heating: pre.heating,
                switching: post.switching,
            },
            depression: PairSpec {
                heating: post.heating,
                switching: pre.switching,
            },
            heating_polarity: HeatingPolarity::OpposeSwitching,
            sign_convention: SignConvention::ApToPPositive,
        }
    }

    pub fn branch(&self, direction: Direction) -> &PairSpec {
        match direction {
            Direction::ApToP => &self.potentiation,
            Direction::PToAp => &self.depression,
        }
    }

    /// Device waveform for an interval `|Δt|` in `direction`.
    pub fn waveform(&self, abs_delta_t: f64, direction: Direction) -> Result<Waveform> {
        let pair = self.branch(direction);
        let heating = self.heating_polarity.resolve(pair.heating, direction);
        pair_protocol(abs_delta_t, &heating, &pair.switching, direction)
    }

    /// Switching pulse alone, starting at t = 0.
    pub fn switching_only(&self, direction: Direction) -> Result<Waveform> {
        let sw = self.branch(direction).switching;
        sw.validate()?;
        Waveform::new(vec![crate::waveform::Segment {
            start: 0.0,
            end: sw.duration,
            voltage: sw.amplitude * direction.drive_polarity().sign(),
        }])
    }

    /// Heating pulse alone (polarity resolved for `direction`).
    pub fn heating_only(&self, direction: Direction) -> Result<Waveform> {
        let h = self
            .heating_polarity
            .resolve(self.branch(direction).heating, direction);
        h.validate()?;
        Waveform::new(vec![crate::waveform::Segment {
            start: 0.0,
            end: h.duration,
            voltage: h.voltage(),
        }])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StdpPoint {
    /// Signed interval, s. Positive: pre fired first.
    pub delta_t: f64,
    pub direction: Direction,
    pub n_trials: u64,
    pub n_switched: u64,
    pub p_signed: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl StdpPoint {
    pub fn estimate(&self) -> SwitchEstimate {
        SwitchEstimate::from_counts(self.n_switched, self.n_trials)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StdpCurve {
    pub points: Vec<StdpPoint>,
}

impl StdpCurve {
    pub fn branch(&self, direction: Direction) -> impl Iterator<Item = &StdpPoint> {
        self.points.iter().filter(move |p| p.direction == direction)
    }
}

/// Rows of an STDP sweep in output order: ascending Δt, and at Δt = 0 the
/// depression row before the potentiation row.
pub fn sweep_plan(grid: &[f64]) -> Result<Vec<(f64, Direction)>> {
    if grid.is_empty() {
        return Err(Error::config("Δt grid must not be empty"));
    }
    if grid.iter().any(|d| !d.is_finite()) {
        return Err(Error::config("Δt grid values must be finite"));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut plan = Vec::new();
    for d in sorted {
        if d <= 0.0 {
            plan.push((d, Direction::PToAp));
        }
        if d >= 0.0 {
            plan.push((d, Direction::ApToP));
        }
    }
    Ok(plan)
}

/// Estimate one STDP row. The horizon is stretched to the waveform end.
pub fn stdp_point(
    delta_t: f64,
    direction: Direction,
    protocol: &StdpProtocol,
    device: &DeviceParams,
    config: &SimConfig,
    lane: u64,
) -> Result<StdpPoint> {
    let waveform = protocol.waveform(delta_t.abs(), direction)?;
    let cfg = SimConfig {
        horizon: waveform.end_time(),
        ..config.clone()
    };
    let dev = device.with_state(direction.initial_state());
    let est = estimate_switch_prob(&dev, &waveform, &cfg, lane)?;
    Ok(StdpPoint {
        delta_t,
        direction,
        n_trials: est.n_trials,
        n_switched: est.n_switched,
        p_signed: protocol.sign_convention.sign(direction) * est.p,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
    })
}

/// Switching probability vs. signed spike interval. Row `i` of the plan
/// uses stream lane `i`.
pub fn stdp_sweep(
    grid: &[f64],
    protocol: &StdpProtocol,
    device: &DeviceParams,
    config: &SimConfig,
) -> Result<StdpCurve> {
    let plan = sweep_plan(grid)?;
    let points = plan
        .iter()
        .enumerate()
        .map(|(lane, &(d, dir))| stdp_point(d, dir, protocol, device, config, lane as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(StdpCurve { points })
}

/// Switching pulse alone from room temperature: the large-|Δt| limit.
pub fn switching_baseline(
    direction: Direction,
    protocol: &StdpProtocol,
    device: &DeviceParams,
    config: &SimConfig,
    lane: u64,
) -> Result<SwitchEstimate> {
    let waveform = protocol.switching_only(direction)?;
    let cfg = SimConfig {
        horizon: waveform.end_time(),
        ..config.clone()
    };
    estimate_switch_prob(&device.with_state(direction.initial_state()), &waveform, &cfg, lane)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalSample {
    /// s
    pub t: f64,
    /// Voltage applied on `[t, t + dt)`.
    pub voltage: f64,
    /// W
    pub power: f64,
    /// K at `t`
    pub temperature: f64,
}

/// Deterministic temperature response of a junction held in `model.state`,
/// sampled every `config.dt` on `[0, config.horizon]`.
pub fn thermal_trace(
    waveform: &Waveform,
    thermal: &ThermalParams,
    model: &ResistanceModel,
    config: &SimConfig,
) -> Result<Vec<ThermalSample>> {
    thermal.validate()?;
    model.validate()?;
    if !(config.dt > 0.0) {
        return Err(Error::config("dt must be > 0"));
    }
    let n = step_count(config.horizon, config.dt)?;
    let mut cursor = waveform.cursor();
    let mut state = ThermalState::at(thermal.room_temperature);
    let mut out = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let t = k as f64 * config.dt;
        let v = cursor.value_at(t + 0.5 * config.dt);
        let p = joule_power(v, model);
        out.push(ThermalSample {
            t,
            voltage: v,
            power: p,
            temperature: state.temperature,
        });
        state = thermal_step(state, p, thermal, config.dt);
    }
    Ok(out)
}
