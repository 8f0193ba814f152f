//! Stochastic macrospin simulator for magnetic tunnel junctions whose
//! switching probability is modulated by Joule heating.
//!
//! A heating pulse raises the free-layer temperature, which then relaxes
//! back toward room temperature. A later switching pulse sees a larger
//! thermal field the sooner it arrives, so the switching probability as a
//! function of the pulse interval traces out a spike-timing-dependent
//! plasticity (STDP) window.
//!
//! Module map:
//!
//! - [`magnetodynamics`]: stochastic LLG-S integration, thermal field,
//!   initial-angle sampling.
//! - [`thermal`]: first-order heating/cooling, resistance and Joule power.
//! - [`waveform`]: piecewise-constant pulse programs for pair protocols and
//!   crossbar neurons.
//! - [`device`]: the coupled per-device time stepper shared by trials and
//!   crossbar cells.
//! - [`montecarlo`]: trials, switching probability estimates, STDP sweeps,
//!   thermal traces.
//! - [`crossbar`]: R x C synapse arrays driven by spike schedules.

pub mod constants;
pub mod crossbar;
pub mod device;
pub mod error;
pub mod magnetodynamics;
pub mod numfmt;
pub mod montecarlo;
pub mod rng;
pub mod stats;
pub mod thermal;
pub mod vector;
pub mod waveform;

pub use crossbar::{
    effective_pairings, simulate, simulate_repetition, CellOverride, CrossbarConfig,
    CrossbarResult, Pairing, SpikeSchedule, SwitchEvent,
};
pub use device::{DeviceParams, DeviceSim, TracePoint};
pub use error::{Error, Result};
pub use magnetodynamics::{
    effective_field, llgs_step, sample_initial_angle, spin_current, thermal_field, LlgsIntegrator,
    MaterialParams, NoiseConvention, SpinCurrent,
};
pub use montecarlo::{
    estimate_switch_prob, run_trial, stdp_sweep, thermal_trace, SignConvention, SimConfig,
    StdpCurve, StdpPoint, StdpProtocol, SwitchEstimate, ThermalSample, TrialOutcome,
};
pub use rng::RngStream;
pub use thermal::{
    analytic_cooling, analytic_heating, joule_power, resistance, thermal_step, MtjState,
    ResistanceModel, ThermalParams, ThermalState,
};
pub use vector::Vector3;
pub use waveform::{
    device_voltage, neuron_waveform, pair_protocol, Direction, HeatingPolarity, NeuronPulseSpec,
    Polarity, PulseSpec, Segment, Waveform,
};
