//! CODATA 2018 values in SI units.

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;
/// Terrestrial gravity as used for acceleration caps (m/s^2).
pub const G_EARTH: f64 = 9.81;
/// Wien displacement constant (m K).
pub const WIEN_B: f64 = 2.897_771_955e-3;
