//! Experiment configuration file.
//!
//! TOML, one section per concern. Every physical quantity carries its unit
//! in the key name (`tau_tr_ns`, `r_p_ohm`, ...). Unknown keys are errors;
//! `thermal.tau_tr_ns`, the pulse amplitudes and `simulation.master_seed`
//! have no defaults. Other keys fall back to the values in
//! `profiles/default.toml`.

use std::fmt;
use std::path::Path;

use mtjsim_core::constants::{NM_TO_CM, NS, PS};
use mtjsim_core::crossbar::{CellOverride, CrossbarConfig, SpikeSchedule};
use mtjsim_core::{
    DeviceParams, Direction, HeatingPolarity, MaterialParams, MtjState, NeuronPulseSpec,
    NoiseConvention, Polarity, PulseSpec, ResistanceModel, SignConvention, SimConfig,
    StdpProtocol, ThermalParams, Vector3,
};
use serde::{Deserialize, Serialize};

/// Checked-in profile with the reference stack.
pub const DEFAULT_PROFILE: &str = include_str!("../profiles/default.toml");

/// Config problem with the dotted key path it was found at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config key `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn key_error(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub material: MaterialSection,
    pub thermal: ThermalSection,
    #[serde(default)]
    pub resistance: ResistanceSection,
    pub pulses: PulsesSection,
    pub simulation: SimulationSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub trial: TrialSection,
    #[serde(default)]
    pub crossbar: CrossbarSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemagModel {
    /// In-plane isotropic tensor reproducing `energy_barrier_kT` at room
    /// temperature.
    #[default]
    BarrierMatched,
    /// (0, 0, 4π)
    ThinFilm,
    /// `demag_factors`, CGS normalization.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[allow(non_snake_case)]
pub struct MaterialSection {
    pub saturation_magnetization_emu_per_cm3: f64,
    pub interface_anisotropy_erg_per_cm2: f64,
    pub damping: f64,
    pub gyromagnetic_ratio_rad_per_s_Oe: f64,
    pub energy_barrier_kT: f64,
    pub free_layer_diameter_nm: f64,
    pub aspect_ratio: f64,
    pub free_layer_thickness_nm: f64,
    pub demag_model: DemagModel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub demag_factors: Option<[f64; 3]>,
    pub spin_polarization: f64,
    pub pinned_axis: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curie_temperature_K: Option<f64>,
}

impl Default for MaterialSection {
    fn default() -> Self {
        Self {
            saturation_magnetization_emu_per_cm3: 1257.3,
            interface_anisotropy_erg_per_cm2: 1.3,
            damping: 0.015,
            gyromagnetic_ratio_rad_per_s_Oe: 1.76e7,
            energy_barrier_kT: 73.0,
            free_layer_diameter_nm: 40.0,
            aspect_ratio: 1.0,
            free_layer_thickness_nm: 1.42,
            demag_model: DemagModel::BarrierMatched,
            demag_factors: None,
            spin_polarization: 0.6,
            pinned_axis: [0.0, 0.0, 1.0],
            curie_temperature_K: None,
        }
    }
}

fn default_room_temperature() -> f64 {
    300.0
}

fn default_joule_constant() -> f64 {
    83600.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ThermalSection {
    #[serde(default = "default_room_temperature")]
    pub room_temperature_K: f64,
    #[serde(default = "default_joule_constant")]
    pub joule_heating_constant_K_per_W: f64,
    pub tau_tr_ns: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResistanceSection {
    pub r_p_ohm: f64,
    pub tmr: f64,
}

impl Default for ResistanceSection {
    fn default() -> Self {
        Self {
            r_p_ohm: 2000.0,
            tmr: 1.0,
        }
    }
}

fn default_switching_ns() -> f64 {
    3.0
}

fn default_heating_ns() -> f64 {
    1.0
}

fn positive() -> Polarity {
    Polarity::Positive
}

/// Spike shape of one neuron population. Polarities are ±1 in the frame
/// of the neuron's own line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct NeuronSection {
    pub switching_amplitude_V: f64,
    #[serde(default = "default_switching_ns")]
    pub switching_duration_ns: f64,
    #[serde(default = "positive")]
    pub switching_polarity: Polarity,
    pub heating_amplitude_V: f64,
    #[serde(default = "default_heating_ns")]
    pub heating_duration_ns: f64,
    #[serde(default = "positive")]
    pub heating_polarity: Polarity,
    #[serde(default)]
    pub gap_ns: f64,
}

impl NeuronSection {
    pub fn spec(&self) -> NeuronPulseSpec {
        NeuronPulseSpec {
            switching: PulseSpec::new(
                self.switching_amplitude_V,
                self.switching_duration_ns * NS,
                self.switching_polarity,
            ),
            heating: PulseSpec::new(
                self.heating_amplitude_V,
                self.heating_duration_ns * NS,
                self.heating_polarity,
            ),
            gap: self.gap_ns * NS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulsesSection {
    pub pre: NeuronSection,
    pub post: NeuronSection,
    /// Polarity rule for the heating pulse in pair protocols.
    #[serde(default)]
    pub heating_polarity_mode: HeatingPolarity,
}

fn default_dt_ps() -> f64 {
    1.0
}
fn default_horizon_ns() -> f64 {
    20.0
}
fn default_relax_ns() -> f64 {
    5.0
}
fn default_threshold() -> f64 {
    0.5
}
fn default_trials() -> u64 {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SimulationSection {
    #[serde(default = "default_dt_ps")]
    pub dt_ps: f64,
    #[serde(default = "default_horizon_ns")]
    pub horizon_ns: f64,
    #[serde(default = "default_relax_ns")]
    pub relax_window_ns: f64,
    #[serde(default = "default_threshold")]
    pub switch_threshold: f64,
    #[serde(default = "default_trials")]
    pub n_trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub noise_convention: NoiseConvention,
    #[serde(default)]
    pub sign_convention: SignConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clamp_temperature_K: Option<f64>,
}

/// Signed spike intervals of the STDP sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub delta_t_ns: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        let half = [0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0];
        let mut grid: Vec<f64> = half.iter().rev().map(|d| -d).collect();
        grid.extend_from_slice(&half);
        Self { delta_t_ns: grid }
    }
}

/// Pair-protocol scenario used by `trial` and `thermal-trace`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialSection {
    pub direction: Direction,
    /// Interval between heating end and switching start, >= 0.
    pub delta_t_ns: f64,
    pub trial_index: u64,
}

impl Default for TrialSection {
    fn default() -> Self {
        Self {
            direction: Direction::ApToP,
            delta_t_ns: 4.0,
            trial_index: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct OverrideSection {
    pub row: usize,
    pub col: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_p_ohm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tmr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_barrier_kT: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_layer_diameter_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joule_heating_constant_K_per_W: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_tr_ns: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossbarSection {
    pub rows: usize,
    pub cols: usize,
    /// `rows x cols`, "P" or "AP".
    pub initial_states: Vec<Vec<MtjState>>,
    /// One list per row.
    pub pre_spikes_ns: Vec<Vec<f64>>,
    /// One list per column.
    pub post_spikes_ns: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<OverrideSection>,
}

impl Default for CrossbarSection {
    fn default() -> Self {
        Self {
            rows: 2,
            cols: 2,
            initial_states: vec![vec![MtjState::AP; 2]; 2],
            pre_spikes_ns: vec![Vec::new(); 2],
            post_spikes_ns: vec![Vec::new(); 2],
            overrides: Vec::new(),
        }
    }
}

/// Serde messages list the expected keys; point at the unit-suffixed one
/// when the unknown key is its bare stem.
fn hint_unit_suffix(message: &str) -> String {
    let Some(rest) = message.strip_prefix("unknown field `") else {
        return message.to_string();
    };
    let Some((name, tail)) = rest.split_once('`') else {
        return message.to_string();
    };
    let stem = format!("{name}_");
    let candidate = tail
        .split('`')
        .skip(1)
        .step_by(2)
        .find(|k| k.starts_with(&stem));
    match candidate {
        Some(k) => format!("unknown key `{name}`; expected `{k}` (keys carry their unit)"),
        None => message.to_string(),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| key_error("", e.message().trim().to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = hint_unit_suffix(inner.message().trim());
            key_error(&path, message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Ok(Self::from_toml_str(&text)?)
    }

    pub fn default_profile() -> Self {
        Self::from_toml_str(DEFAULT_PROFILE).expect("shipped profile parses")
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Cross-key checks; range checks on physics live in the core types.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.device_params(MtjState::P)
            .map_err(|e| key_error("material", e.to_string()))?;
        self.sim_config()
            .validate()
            .map_err(|e| key_error("simulation", e.to_string()))?;
        for (name, n) in [("pre", &self.pulses.pre), ("post", &self.pulses.post)] {
            n.spec()
                .validate()
                .map_err(|e| key_error(&format!("pulses.{name}"), e.to_string()))?;
        }
        if self.sweep.delta_t_ns.is_empty() {
            return Err(key_error("sweep.delta_t_ns", "grid must not be empty"));
        }
        if !(self.trial.delta_t_ns >= 0.0) {
            return Err(key_error("trial.delta_t_ns", "must be >= 0"));
        }
        self.crossbar_config()
            .and_then(|c| c.validate().map_err(|e| key_error("crossbar", e.to_string())))?;
        self.schedules()?;
        Ok(())
    }

    pub fn material(&self) -> mtjsim_core::Result<MaterialParams> {
        let m = &self.material;
        let [px, py, pz] = m.pinned_axis;
        let mut p = MaterialParams {
            saturation_magnetization: m.saturation_magnetization_emu_per_cm3,
            interface_anisotropy: m.interface_anisotropy_erg_per_cm2,
            damping: m.damping,
            gyromagnetic_ratio: m.gyromagnetic_ratio_rad_per_s_Oe,
            energy_barrier_kt: m.energy_barrier_kT,
            free_layer_diameter: m.free_layer_diameter_nm * NM_TO_CM,
            aspect_ratio: m.aspect_ratio,
            free_layer_thickness: m.free_layer_thickness_nm * NM_TO_CM,
            demag: MaterialParams::thin_film_demag(),
            spin_polarization: m.spin_polarization,
            pinned_axis: Vector3::new(px, py, pz),
            curie_temperature: m.curie_temperature_K,
        };
        match m.demag_model {
            DemagModel::ThinFilm => {}
            DemagModel::BarrierMatched => {
                p = p.with_barrier_matched_demag(self.thermal.room_temperature_K)?
            }
            DemagModel::Explicit => {
                let [nx, ny, nz] = m.demag_factors.ok_or_else(|| {
                    mtjsim_core::Error::Config(
                        "demag_model = \"explicit\" needs demag_factors".into(),
                    )
                })?;
                p.demag = Vector3::new(nx, ny, nz);
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn thermal(&self) -> ThermalParams {
        ThermalParams {
            room_temperature: self.thermal.room_temperature_K,
            joule_heating_constant: self.thermal.joule_heating_constant_K_per_W,
            time_constant: self.thermal.tau_tr_ns * NS,
        }
    }

    pub fn resistance(&self, state: MtjState) -> ResistanceModel {
        ResistanceModel {
            r_p: self.resistance.r_p_ohm,
            tmr: self.resistance.tmr,
            state,
        }
    }

    pub fn device_params(&self, state: MtjState) -> mtjsim_core::Result<DeviceParams> {
        let d = DeviceParams {
            material: self.material()?,
            thermal: self.thermal(),
            resistance: self.resistance(state),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn pre_spec(&self) -> NeuronPulseSpec {
        self.pulses.pre.spec()
    }

    pub fn post_spec(&self) -> NeuronPulseSpec {
        self.pulses.post.spec()
    }

    pub fn protocol(&self) -> StdpProtocol {
        StdpProtocol {
            heating_polarity: self.pulses.heating_polarity_mode,
            sign_convention: self.simulation.sign_convention,
            ..StdpProtocol::from_neurons(&self.pre_spec(), &self.post_spec())
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.simulation;
        SimConfig {
            dt: s.dt_ps * PS,
            horizon: s.horizon_ns * NS,
            relax_window: s.relax_window_ns * NS,
            switch_threshold: s.switch_threshold,
            n_trials: s.n_trials,
            master_seed: s.master_seed,
            record_traces: false,
            noise_convention: s.noise_convention,
            clamp_temperature: s.clamp_temperature_K,
        }
    }

    /// Sweep grid in seconds.
    pub fn grid(&self) -> Vec<f64> {
        self.sweep.delta_t_ns.iter().map(|d| d * NS).collect()
    }

    pub fn crossbar_config(&self) -> Result<CrossbarConfig, ConfigError> {
        let x = &self.crossbar;
        let device = self
            .device_params(MtjState::P)
            .map_err(|e| key_error("material", e.to_string()))?;
        let overrides = x
            .overrides
            .iter()
            .enumerate()
            .map(|(i, o)| self.cell_override(o).map_err(|e| key_error(&format!("crossbar.overrides[{i}]"), e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CrossbarConfig {
            rows: x.rows,
            cols: x.cols,
            device,
            overrides,
            pre_spec: self.pre_spec(),
            post_spec: self.post_spec(),
            initial_states: x.initial_states.clone(),
        })
    }

    fn cell_override(&self, o: &OverrideSection) -> mtjsim_core::Result<CellOverride> {
        let material = if o.damping.is_some()
            || o.energy_barrier_kT.is_some()
            || o.free_layer_diameter_nm.is_some()
        {
            let mut section = self.clone();
            let m = &mut section.material;
            m.damping = o.damping.unwrap_or(m.damping);
            m.energy_barrier_kT = o.energy_barrier_kT.unwrap_or(m.energy_barrier_kT);
            m.free_layer_diameter_nm = o.free_layer_diameter_nm.unwrap_or(m.free_layer_diameter_nm);
            Some(section.material()?)
        } else {
            None
        };
        let thermal = (o.joule_heating_constant_K_per_W.is_some() || o.tau_tr_ns.is_some()).then(|| {
            let mut t = self.thermal();
            if let Some(a) = o.joule_heating_constant_K_per_W {
                t.joule_heating_constant = a;
            }
            if let Some(tau) = o.tau_tr_ns {
                t.time_constant = tau * NS;
            }
            t
        });
        let resistance = (o.r_p_ohm.is_some() || o.tmr.is_some()).then(|| ResistanceModel {
            r_p: o.r_p_ohm.unwrap_or(self.resistance.r_p_ohm),
            tmr: o.tmr.unwrap_or(self.resistance.tmr),
            state: MtjState::P,
        });
        Ok(CellOverride {
            row: o.row,
            col: o.col,
            material,
            thermal,
            resistance,
        })
    }

    /// Pre (row) and post (column) spike schedules in seconds.
    pub fn schedules(&self) -> Result<(SpikeSchedule, SpikeSchedule), ConfigError> {
        let to_s = |trains: &[Vec<f64>]| -> Vec<Vec<f64>> {
            trains.iter().map(|t| t.iter().map(|v| v * NS).collect()).collect()
        };
        let x = &self.crossbar;
        if x.pre_spikes_ns.len() != x.rows {
            return Err(key_error(
                "crossbar.pre_spikes_ns",
                format!("needs one list per row ({}), got {}", x.rows, x.pre_spikes_ns.len()),
            ));
        }
        if x.post_spikes_ns.len() != x.cols {
            return Err(key_error(
                "crossbar.post_spikes_ns",
                format!("needs one list per column ({}), got {}", x.cols, x.post_spikes_ns.len()),
            ));
        }
        let pre = SpikeSchedule::new(to_s(&x.pre_spikes_ns))
            .map_err(|e| key_error("crossbar.pre_spikes_ns", e.to_string()))?;
        let post = SpikeSchedule::new(to_s(&x.post_spikes_ns))
            .map_err(|e| key_error("crossbar.post_spikes_ns", e.to_string()))?;
        Ok((pre, post))
    }
}
