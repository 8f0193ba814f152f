//! Macrospin LLG-S dynamics of the free layer.
//!
//! The Gilbert form `dm/dt = -γ m×H + α m×dm/dt + τ_stt` is solved for
//! `dm/dt` in closed form: with `A = -γ m×H + τ_stt`,
//! `dm/dt = (A + α m×A) / (1 + α²)`.
//!
//! Units are CGS: fields in Oe, magnetization in emu/cm³, lengths in cm.
//! Spin currents are carried in amperes.

use serde::{Deserialize, Serialize};

use crate::constants::{
    BOHR_MAGNETON_EMU, BOLTZMANN_ERG_PER_K, ELEMENTARY_CHARGE_C, FOUR_PI, GYROMAGNETIC_RATIO,
    NM_TO_CM, PS,
};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::thermal::MtjState;
use crate::vector::Vector3;

/// Largest accepted integration step.
pub const MAX_DT: f64 = 5.0 * PS;

const UNIT_NORM_TOL: f64 = 1e-6;

/// Scaling of the thermal-field standard deviation with the time step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseConvention {
    /// Fluctuation-dissipation form `sqrt(2 α k_B T / (|γ| M_s V dt))`.
    #[default]
    Brown,
    /// `sqrt(α k_B T dt / (|γ| M_s V))`, with `dt` in the numerator. The
    /// noise vanishes as `dt -> 0`; kept for comparison only.
    PaperLiteral,
}

/// Magnet and material constants of the free layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// emu/cm³
    pub saturation_magnetization: f64,
    /// erg/cm²
    pub interface_anisotropy: f64,
    pub damping: f64,
    /// rad/(s Oe)
    pub gyromagnetic_ratio: f64,
    /// Barrier height in units of k_B T_RT.
    pub energy_barrier_kt: f64,
    /// Minor-axis diameter, cm.
    pub free_layer_diameter: f64,
    pub aspect_ratio: f64,
    /// cm
    pub free_layer_thickness: f64,
    /// (N_x, N_y, N_z), CGS normalization (sum 4π).
    pub demag: Vector3,
    pub spin_polarization: f64,
    /// Pinned-layer magnetization direction.
    pub pinned_axis: Vector3,
    /// Enables Bloch-law `M_s(T)` when set.
    pub curie_temperature: Option<f64>,
}

impl MaterialParams {
    /// Reference stack (CoFeB/MgO, 40 nm, 1.42 nm free layer) with the demag
    /// tensor matched to the 73 kT barrier at 300 K.
    pub fn reference() -> Self {
        let base = Self {
            saturation_magnetization: 1257.3,
            interface_anisotropy: 1.3,
            damping: 0.015,
            gyromagnetic_ratio: GYROMAGNETIC_RATIO,
            energy_barrier_kt: 73.0,
            free_layer_diameter: 40.0 * NM_TO_CM,
            aspect_ratio: 1.0,
            free_layer_thickness: 1.42 * NM_TO_CM,
            demag: Self::thin_film_demag(),
            spin_polarization: 0.6,
            pinned_axis: Vector3::Z,
            curie_temperature: None,
        };
        base.with_barrier_matched_demag(300.0)
            .expect("reference parameters admit a barrier-matched demag tensor")
    }

    /// Infinite thin film: only N_z survives.
    pub fn thin_film_demag() -> Vector3 {
        Vector3::new(0.0, 0.0, FOUR_PI)
    }

    /// Replace the demag tensor by the in-plane-isotropic one for which the
    /// uniaxial barrier `(H_k - (N_z - N_x) M_s) M_s V / 2` equals
    /// `energy_barrier_kt * k_B * room_temperature`.
    pub fn with_barrier_matched_demag(mut self, room_temperature: f64) -> Result<Self> {
        let ms = self.saturation_magnetization;
        let target_hk_eff =
            2.0 * self.energy_barrier_kt * BOLTZMANN_ERG_PER_K * room_temperature / (ms * self.volume());
        let dn = (self.anisotropy_field_at(ms) - target_hk_eff) / ms;
        let nx = (FOUR_PI - dn) / 3.0;
        if !(0.0..=FOUR_PI / 3.0).contains(&nx) {
            return Err(Error::config(format!(
                "no physical demag tensor gives a {} kT barrier (N_z - N_x = {dn:.4})",
                self.energy_barrier_kt
            )));
        }
        self.demag = Vector3::new(nx, nx, nx + dn);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be > 0, got {v}")))
            }
        };
        pos(self.saturation_magnetization, "saturation magnetization")?;
        pos(self.damping, "damping")?;
        pos(self.gyromagnetic_ratio, "gyromagnetic ratio")?;
        pos(self.energy_barrier_kt, "energy barrier")?;
        pos(self.free_layer_diameter, "free-layer diameter")?;
        pos(self.aspect_ratio, "aspect ratio")?;
        pos(self.free_layer_thickness, "free-layer thickness")?;
        if !self.interface_anisotropy.is_finite() {
            return Err(Error::config("interface anisotropy must be finite"));
        }
        let sum = self.demag.x + self.demag.y + self.demag.z;
        if (sum - FOUR_PI).abs() > 1e-6 || !self.demag.is_finite() {
            return Err(Error::config(format!(
                "demag factors must sum to 4π (CGS), got {sum}"
            )));
        }
        if !(self.spin_polarization > 0.0 && self.spin_polarization <= 1.0) {
            return Err(Error::config(format!(
                "spin polarization must lie in (0, 1], got {}",
                self.spin_polarization
            )));
        }
        if (self.pinned_axis.norm() - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::config("pinned axis must be a unit vector"));
        }
        if let Some(tc) = self.curie_temperature {
            pos(tc, "Curie temperature")?;
        }
        Ok(())
    }

    /// Free-layer volume, cm³ (elliptical cylinder).
    pub fn volume(&self) -> f64 {
        let d = self.free_layer_diameter;
        std::f64::consts::FRAC_PI_4 * d * (d * self.aspect_ratio) * self.free_layer_thickness
    }

    /// `M_s(T)`; constant unless a Curie temperature is configured.
    pub fn ms_at(&self, temperature: f64) -> f64 {
        match self.curie_temperature {
            Some(tc) => {
                let r = (temperature / tc).clamp(0.0, 1.0);
                self.saturation_magnetization * (1.0 - r.powf(1.5))
            }
            None => self.saturation_magnetization,
        }
    }

    /// Number of spins `N_s = M_s V / μ_B`.
    pub fn spin_count(&self) -> f64 {
        self.saturation_magnetization * self.volume() / BOHR_MAGNETON_EMU
    }

    /// Interface anisotropy field `2 K_i / (M_s t_fl)` at magnetization `ms`.
    pub fn anisotropy_field_at(&self, ms: f64) -> f64 {
        2.0 * self.interface_anisotropy / (ms * self.free_layer_thickness)
    }

    /// Net perpendicular anisotropy field including demag, Oe.
    pub fn effective_anisotropy_field(&self) -> f64 {
        let ms = self.saturation_magnetization;
        self.anisotropy_field_at(ms) - (self.demag.z - 0.5 * (self.demag.x + self.demag.y)) * ms
    }

    /// Barrier implied by the fields, in k_B T units at `temperature`.
    pub fn field_barrier_kt(&self, temperature: f64) -> f64 {
        0.5 * self.effective_anisotropy_field() * self.saturation_magnetization * self.volume()
            / (BOLTZMANN_ERG_PER_K * temperature)
    }

    /// Thermal stability factor at `temperature`, scaling the configured
    /// barrier as `E_B T_RT / T`.
    pub fn stability_factor(&self, room_temperature: f64, temperature: f64) -> f64 {
        self.energy_barrier_kt * room_temperature / temperature
    }

    /// Spin current at which the linearized torque balance changes sign
    /// (damping rate equals spin-torque rate), in amperes of spin current.
    pub fn critical_spin_current(&self) -> f64 {
        self.damping * self.gyromagnetic_ratio * self.effective_anisotropy_field()
            * ELEMENTARY_CHARGE_C
            * self.spin_count()
    }
}

/// Spin current through the junction. Positive values drive the free
/// layer toward the pinned direction (AP -> P).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpinCurrent {
    amperes: f64,
}

impl SpinCurrent {
    pub const ZERO: SpinCurrent = SpinCurrent { amperes: 0.0 };

    /// Signed spin current, positive favoring P.
    pub fn from_signed(amperes: f64) -> Self {
        Self { amperes }
    }

    pub fn signed(self) -> f64 {
        self.amperes
    }

    pub fn magnitude(self) -> f64 {
        self.amperes.abs()
    }

    /// +1 favors P, -1 favors AP. Zero current reports +1.
    pub fn sign(self) -> i8 {
        if self.amperes < 0.0 {
            -1
        } else {
            1
        }
    }
}

/// Convert the terminal voltage (pinned-layer side minus free-layer side)
/// into a spin current. Positive voltage pushes conduction electrons from
/// the free into the pinned layer, which favors AP.
pub fn spin_current(voltage: f64, resistance: f64, polarization: f64) -> Result<SpinCurrent> {
    if !(resistance > 0.0) {
        return Err(Error::config(format!("resistance must be > 0, got {resistance}")));
    }
    let charge = voltage / resistance;
    Ok(SpinCurrent::from_signed(-polarization * charge))
}

fn check_unit(m: Vector3) -> Result<()> {
    let n = m.norm();
    if !m.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::contract(format!("magnetization must be unit length, |m| = {n}")));
    }
    Ok(())
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::contract(format!("temperature must be >= 0 K, got {t}")));
    }
    Ok(())
}

/// Standard deviation of each thermal-field component, Oe.
pub fn thermal_sigma(
    temperature: f64,
    params: &MaterialParams,
    dt: f64,
    convention: NoiseConvention,
) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let moment = params.ms_at(temperature) * params.volume();
    let kt = BOLTZMANN_ERG_PER_K * temperature;
    let gamma = params.gyromagnetic_ratio.abs();
    match convention {
        NoiseConvention::Brown => (2.0 * params.damping * kt / (gamma * moment * dt)).sqrt(),
        NoiseConvention::PaperLiteral => (params.damping * kt * dt / (gamma * moment)).sqrt(),
    }
}

/// Thermal field `ζ σ` with three fresh standard normals. The draws are
/// consumed even at zero temperature so the stream position does not
/// depend on the temperature history.
pub fn thermal_field(
    temperature: f64,
    params: &MaterialParams,
    dt: f64,
    convention: NoiseConvention,
    rng: &mut RngStream,
) -> Result<Vector3> {
    check_temperature(temperature)?;
    if !(dt > 0.0) {
        return Err(Error::contract(format!("dt must be > 0, got {dt}")));
    }
    let zeta = rng.normal3();
    Ok(zeta * thermal_sigma(temperature, params, dt, convention))
}

/// Demagnetizing plus interface-anisotropy field at temperature `t`.
#[inline]
fn deterministic_field(m: Vector3, params: &MaterialParams, temperature: f64) -> Vector3 {
    let ms = params.ms_at(temperature);
    let demag = -(params.demag.hadamard(m) * ms);
    let hk = params.anisotropy_field_at(ms);
    demag + Vector3::new(0.0, 0.0, hk * m.z)
}

/// `deterministic_field` minus its in-plane-mean demag part `-N̄ M_s m`.
/// The removed term is parallel to `m` and exerts no torque; dropping it
/// keeps the rotation axis of the integrator on z for in-plane-isotropic
/// tensors.
#[inline]
fn torque_field(m: Vector3, params: &MaterialParams, temperature: f64) -> Vector3 {
    let ms = params.ms_at(temperature);
    let mean = 0.5 * (params.demag.x + params.demag.y);
    deterministic_field(m, params, temperature) + m * (mean * ms)
}

/// Total effective field: demag + interface anisotropy + thermal.
pub fn effective_field(
    m: Vector3,
    params: &MaterialParams,
    temperature: f64,
    dt: f64,
    convention: NoiseConvention,
    rng: &mut RngStream,
) -> Result<Vector3> {
    check_unit(m)?;
    let thermal = thermal_field(temperature, params, dt, convention, rng)?;
    Ok(deterministic_field(m, params, temperature) + thermal)
}

/// Stochastic Heun integrator for the LLG-S equation at a fixed step.
///
/// Both stages see the same thermal field. Each stage increment is applied
/// as a rotation (Cayley map of the angular velocity), so the update
/// preserves `|m|` and conserves `m_z` exactly under pure precession about
/// z; the final renormalization only removes rounding.
#[derive(Clone, Debug)]
pub struct LlgsIntegrator {
    params: MaterialParams,
    dt: f64,
    convention: NoiseConvention,
    stt_per_amp: f64,
    inv_one_plus_a2: f64,
}

impl LlgsIntegrator {
    pub fn new(params: MaterialParams, dt: f64, convention: NoiseConvention) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::config(format!(
                "dt must lie in (0, 5 ps], got {:.3} ps",
                dt / PS
            )));
        }
        let stt_per_amp = 1.0 / (ELEMENTARY_CHARGE_C * params.spin_count());
        let inv_one_plus_a2 = 1.0 / (1.0 + params.damping * params.damping);
        Ok(Self {
            params,
            dt,
            convention,
            stt_per_amp,
            inv_one_plus_a2,
        })
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn convention(&self) -> NoiseConvention {
        self.convention
    }

    /// Angular velocity `ω` with `dm/dt = ω × m`:
    /// `ω = [γ H + αγ m×H + a m×p - α a p] / (1 + α²)`.
    /// Field-like parts keep their component along `m`, so a field along z
    /// rotates `m` rigidly about z.
    #[inline]
    fn angular_velocity(&self, m: Vector3, h: Vector3, a: f64) -> Vector3 {
        let p = self.params.pinned_axis;
        let alpha = self.params.damping;
        let gamma = self.params.gyromagnetic_ratio;
        let precess = h * gamma + m.cross(h) * (alpha * gamma);
        let torque = m.cross(p) * a - p * (alpha * a);
        (precess + torque) * self.inv_one_plus_a2
    }

    /// Cayley rotation of `m` by the rotation vector `omega_dt`.
    #[inline]
    fn rotate(m: Vector3, omega_dt: Vector3) -> Vector3 {
        let w = omega_dt * 0.5;
        let wxm = w.cross(m);
        m + w.cross(m + wxm) * (2.0 / (1.0 + w.dot(w)))
    }

    /// One step with an explicitly supplied thermal field.
    #[inline]
    pub fn step_with_field(
        &self,
        m: Vector3,
        spin: SpinCurrent,
        temperature: f64,
        thermal: Vector3,
    ) -> Vector3 {
        let a = spin.signed() * self.stt_per_amp;
        let dt = self.dt;
        let h0 = torque_field(m, &self.params, temperature) + thermal;
        let w0 = self.angular_velocity(m, h0, a);
        let m1 = Self::rotate(m, w0 * dt);
        let h1 = torque_field(m1, &self.params, temperature) + thermal;
        let w1 = self.angular_velocity(m1, h1, a);
        Self::rotate(m, (w0 + w1) * (0.5 * dt)).normalized()
    }

    /// One stochastic step; draws three normals from `rng`.
    #[inline]
    pub fn step(
        &self,
        m: Vector3,
        spin: SpinCurrent,
        temperature: f64,
        rng: &mut RngStream,
    ) -> Vector3 {
        let sigma = thermal_sigma(temperature, &self.params, self.dt, self.convention);
        let thermal = rng.normal3() * sigma;
        self.step_with_field(m, spin, temperature, thermal)
    }
}

/// Checked single step. Prefer [`LlgsIntegrator`] in loops.
pub fn llgs_step(
    m: Vector3,
    spin: SpinCurrent,
    params: &MaterialParams,
    temperature: f64,
    dt: f64,
    convention: NoiseConvention,
    rng: &mut RngStream,
) -> Result<Vector3> {
    check_unit(m)?;
    check_temperature(temperature)?;
    let integrator = LlgsIntegrator::new(params.clone(), dt, convention)?;
    Ok(integrator.step(m, spin, temperature, rng))
}

/// Draw a thermally equilibrated initial direction about the easy axis of
/// `state`: polar angle from `p(θ) ∝ sin θ exp(-Δ sin²θ)` on `[0, π/2]`,
/// uniform azimuth, with `Δ = E_B T_RT / T`.
pub fn sample_initial_angle(
    params: &MaterialParams,
    room_temperature: f64,
    temperature: f64,
    state: MtjState,
    rng: &mut RngStream,
) -> Result<Vector3> {
    if !(temperature > 0.0) {
        return Err(Error::contract(format!("temperature must be > 0 K, got {temperature}")));
    }
    if !(params.energy_barrier_kt > 0.0) {
        return Err(Error::contract("energy barrier must be > 0"));
    }
    let delta = params.stability_factor(room_temperature, temperature);
    let x = sample_one_minus_cos(delta, rng);
    let phi = 2.0 * std::f64::consts::PI * rng.uniform();
    let sin_theta = (x * (2.0 - x)).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    let z = (1.0 - x) * state.easy_axis_sign();
    Ok(Vector3::new(sin_theta * cp, sin_theta * sp, z))
}

/// Sample `x = 1 - cos θ` with density `∝ exp(-Δ x (2 - x))` on `[0, 1]`.
/// Proposal: exponential with rate Δ truncated to `[0, 1]`; acceptance
/// `exp(-Δ x (1 - x)) <= 1`.
fn sample_one_minus_cos(delta: f64, rng: &mut RngStream) -> f64 {
    if delta.is_infinite() {
        return 0.0;
    }
    let mass = -(-delta).exp_m1();
    loop {
        let v = rng.uniform();
        let x = -(-v * mass).ln_1p() / delta;
        let x = x.clamp(0.0, 1.0);
        if rng.uniform() < (-delta * x * (1.0 - x)).exp() {
            return x;
        }
    }
}
