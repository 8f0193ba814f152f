//! Physical constants. CGS-Gaussian unless noted.

/// Boltzmann constant, erg/K.
pub const BOLTZMANN_ERG_PER_K: f64 = 1.380_649e-16;

/// Bohr magneton, erg/G (= emu).
pub const BOHR_MAGNETON_EMU: f64 = 9.274_010_078_3e-21;

/// Elementary charge, C. Spin currents are carried in amperes, so the
/// torque prefactor `I_s / (q N_s)` comes out in 1/s.
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;

/// Electron gyromagnetic ratio magnitude, rad/(s Oe).
pub const GYROMAGNETIC_RATIO: f64 = 1.76e7;

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

pub const NM_TO_CM: f64 = 1e-7;
pub const NS: f64 = 1e-9;
pub const PS: f64 = 1e-12;
