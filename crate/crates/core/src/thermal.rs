//! Free-layer temperature under Joule heating, and the two-level
//! resistance that sets the dissipated power.
//!
//! Heating and cooling share one relaxation law,
//! `dT/dt = (T_RT + α_J P - T) / τ_TR`, integrated exactly per step. For a
//! constant power from `T_RT` this is the heating curve
//! `T_RT + α_J P (1 - e^{-t/τ})`; with `P = 0` it relaxes from `T_0` back to
//! `T_RT`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    /// K
    pub room_temperature: f64,
    /// K/W
    pub joule_heating_constant: f64,
    /// s
    pub time_constant: f64,
}

impl ThermalParams {
    /// Reference room temperature and Joule constant with a 10 ns relaxation
    /// time.
    pub fn reference() -> Self {
        Self {
            room_temperature: 300.0,
            joule_heating_constant: 83_600.0,
            time_constant: 10e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.room_temperature > 0.0) {
            return Err(Error::config("room temperature must be > 0 K"));
        }
        if !(self.joule_heating_constant >= 0.0) {
            return Err(Error::config("Joule heating constant must be >= 0"));
        }
        if !(self.time_constant > 0.0) {
            return Err(Error::config("thermal time constant must be > 0"));
        }
        Ok(())
    }

    /// Steady-state temperature under constant power.
    pub fn target(&self, power: f64) -> f64 {
        self.room_temperature + self.joule_heating_constant * power
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    /// Instantaneous free-layer temperature, K.
    pub temperature: f64,
    /// Temperature at the start of the current constant-power segment, K.
    pub segment_start: f64,
}

impl ThermalState {
    pub fn at(temperature: f64) -> Self {
        Self {
            temperature,
            segment_start: temperature,
        }
    }
}

/// Exact update over `dt` at constant power. `segment_start` is carried
/// through unchanged; callers reset it at waveform edges.
pub fn thermal_step(state: ThermalState, power: f64, params: &ThermalParams, dt: f64) -> ThermalState {
    let target = params.target(power);
    let decay = (-dt / params.time_constant).exp();
    ThermalState {
        temperature: target + (state.temperature - target) * decay,
        segment_start: state.segment_start,
    }
}

/// Heating from room temperature at constant power, after time `t`.
pub fn analytic_heating(t: f64, power: f64, params: &ThermalParams) -> f64 {
    params.room_temperature
        + params.joule_heating_constant * power * -(-t / params.time_constant).exp_m1()
}

/// Cooling with no power from `initial` toward room temperature.
pub fn analytic_cooling(t: f64, initial: f64, params: &ThermalParams) -> f64 {
    initial + (params.room_temperature - initial) * -(-t / params.time_constant).exp_m1()
}

/// Magnetic configuration of the junction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MtjState {
    P,
    AP,
}

impl MtjState {
    pub fn toggled(self) -> Self {
        match self {
            MtjState::P => MtjState::AP,
            MtjState::AP => MtjState::P,
        }
    }

    /// +1 for P (free layer along the pinned +z axis), -1 for AP.
    pub fn easy_axis_sign(self) -> f64 {
        match self {
            MtjState::P => 1.0,
            MtjState::AP => -1.0,
        }
    }

    pub fn from_mz(mz: f64) -> Self {
        if mz >= 0.0 {
            MtjState::P
        } else {
            MtjState::AP
        }
    }
}

impl fmt::Display for MtjState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MtjState::P => "P",
            MtjState::AP => "AP",
        })
    }
}

impl FromStr for MtjState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" => Ok(MtjState::P),
            "AP" => Ok(MtjState::AP),
            other => Err(Error::config(format!("unknown MTJ state `{other}` (expected P or AP)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResistanceModel {
    /// ohm
    pub r_p: f64,
    /// (R_AP - R_P) / R_P
    pub tmr: f64,
    pub state: MtjState,
}

impl ResistanceModel {
    pub fn new(r_p: f64, tmr: f64, state: MtjState) -> Self {
        Self { r_p, tmr, state }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_p > 0.0) {
            return Err(Error::config(format!("R_P must be > 0 ohm, got {}", self.r_p)));
        }
        if !(self.tmr >= 0.0) {
            return Err(Error::config(format!("TMR must be >= 0, got {}", self.tmr)));
        }
        Ok(())
    }

    pub fn r_ap(&self) -> f64 {
        self.r_p * (1.0 + self.tmr)
    }

    pub fn with_state(self, state: MtjState) -> Self {
        Self { state, ..self }
    }
}

impl Default for ResistanceModel {
    fn default() -> Self {
        Self::new(2000.0, 1.0, MtjState::P)
    }
}

pub fn resistance(model: &ResistanceModel) -> f64 {
    match model.state {
        MtjState::P => model.r_p,
        MtjState::AP => model.r_ap(),
    }
}

/// Dissipated power `V² / R`, W.
pub fn joule_power(voltage: f64, model: &ResistanceModel) -> f64 {
    voltage * voltage / resistance(model)
}
