//! Coupled electro-thermal-magnetic evolution of a single junction.
//!
//! Per step of length `dt` starting at `t`:
//! voltage (sampled at `t + dt/2`) -> Joule power -> temperature update ->
//! spin current -> LLG-S step at the new temperature -> switch detection.
//! A detected switch changes the resistance from the next step on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magnetodynamics::{sample_initial_angle, spin_current, LlgsIntegrator, MaterialParams};
use crate::montecarlo::SimConfig;
use crate::rng::RngStream;
use crate::thermal::{
    joule_power, resistance, thermal_step, MtjState, ResistanceModel, ThermalParams, ThermalState,
};
use crate::vector::Vector3;
use crate::waveform::{Direction, Waveform};

/// Everything needed to simulate one junction. `resistance.state` is the
/// initial configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub material: MaterialParams,
    pub thermal: ThermalParams,
    pub resistance: ResistanceModel,
}

impl DeviceParams {
    pub fn reference() -> Self {
        Self {
            material: MaterialParams::reference(),
            thermal: ThermalParams::reference(),
            resistance: ResistanceModel::default(),
        }
    }

    pub fn with_state(&self, state: MtjState) -> Self {
        Self {
            resistance: self.resistance.with_state(state),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.thermal.validate()?;
        self.resistance.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    /// s
    pub time: f64,
    pub direction: Direction,
}

/// Device state at the start of a step and the voltage applied during it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub m: Vector3,
    pub temperature: f64,
    pub voltage: f64,
}

/// Mutable device being stepped through a waveform.
pub struct DeviceSim<'a> {
    integrator: &'a LlgsIntegrator,
    thermal: &'a ThermalParams,
    model: ResistanceModel,
    m: Vector3,
    temperature: ThermalState,
    clamp: Option<f64>,
    threshold: f64,
    step: u64,
    last_voltage: f64,
    peak_temperature: f64,
    events: Vec<SwitchEvent>,
}

impl<'a> DeviceSim<'a> {
    /// Start from a thermally equilibrated direction about the easy axis of
    /// `params.resistance.state`.
    pub fn new(
        integrator: &'a LlgsIntegrator,
        params: &'a DeviceParams,
        config: &SimConfig,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let room = params.thermal.room_temperature;
        let start = config.clamp_temperature.unwrap_or(room);
        let m = sample_initial_angle(&params.material, room, start, params.resistance.state, rng)?;
        Ok(Self::from_direction(integrator, params, config, m))
    }

    /// Start from an explicit direction.
    pub fn from_direction(
        integrator: &'a LlgsIntegrator,
        params: &'a DeviceParams,
        config: &SimConfig,
        m: Vector3,
    ) -> Self {
        let start = config
            .clamp_temperature
            .unwrap_or(params.thermal.room_temperature);
        Self {
            integrator,
            thermal: &params.thermal,
            model: params.resistance,
            m,
            temperature: ThermalState::at(start),
            clamp: config.clamp_temperature,
            threshold: config.switch_threshold,
            step: 0,
            last_voltage: 0.0,
            peak_temperature: start,
            events: Vec::new(),
        }
    }

    pub fn m(&self) -> Vector3 {
        self.m
    }

    pub fn temperature(&self) -> f64 {
        self.temperature.temperature
    }

    pub fn state(&self) -> MtjState {
        self.model.state
    }

    pub fn peak_temperature(&self) -> f64 {
        self.peak_temperature
    }

    pub fn events(&self) -> &[SwitchEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<SwitchEvent> {
        self.events
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.integrator.dt()
    }

    #[inline]
    pub fn step(&mut self, voltage: f64, rng: &mut RngStream) {
        let dt = self.integrator.dt();
        if voltage != self.last_voltage {
            self.temperature.segment_start = self.temperature.temperature;
            self.last_voltage = voltage;
        }
        self.temperature = match self.clamp {
            Some(t) => ThermalState::at(t),
            None => {
                let power = joule_power(voltage, &self.model);
                thermal_step(self.temperature, power, self.thermal, dt)
            }
        };
        let t_af = self.temperature.temperature;
        self.peak_temperature = self.peak_temperature.max(t_af);
        let r = resistance(&self.model);
        // r > 0 is validated with the device parameters
        let spin = spin_current(voltage, r, self.integrator.params().spin_polarization)
            .expect("validated resistance");
        self.m = self.integrator.step(self.m, spin, t_af, rng);
        self.step += 1;

        let mz = self.m.z;
        let flipped = match self.model.state {
            MtjState::P => mz < -self.threshold,
            MtjState::AP => mz > self.threshold,
        };
        if flipped {
            let direction = match self.model.state {
                MtjState::P => Direction::PToAp,
                MtjState::AP => Direction::ApToP,
            };
            self.events.push(SwitchEvent {
                time: self.time(),
                direction,
            });
            self.model.state = self.model.state.toggled();
        }
    }

    fn trace_point(&self, voltage: f64) -> TracePoint {
        TracePoint {
            t: self.time(),
            m: self.m,
            temperature: self.temperature.temperature,
            voltage,
        }
    }

    /// Step through `waveform` for `n_steps`, optionally recording a trace
    /// (one point per step plus the final state).
    pub fn run(
        &mut self,
        waveform: &Waveform,
        n_steps: u64,
        rng: &mut RngStream,
        trace: Option<&mut Vec<TracePoint>>,
    ) {
        let dt = self.integrator.dt();
        let mut cursor = waveform.cursor();
        match trace {
            Some(buf) => {
                buf.reserve(n_steps as usize + 1);
                for _ in 0..n_steps {
                    let v = cursor.value_at(self.time() + 0.5 * dt);
                    buf.push(self.trace_point(v));
                    self.step(v, rng);
                }
                let v = cursor.value_at(self.time() + 0.5 * dt);
                buf.push(self.trace_point(v));
            }
            None => {
                for _ in 0..n_steps {
                    let v = cursor.value_at(self.time() + 0.5 * dt);
                    self.step(v, rng);
                }
            }
        }
    }
}

/// Number of whole steps covering `duration`.
pub fn step_count(duration: f64, dt: f64) -> Result<u64> {
    let n = (duration / dt).round();
    if !(n.is_finite() && n >= 0.0) {
        return Err(Error::config(format!("cannot cover {duration} s with dt = {dt} s")));
    }
    Ok(n as u64)
}
