//! Physical constants and unit helpers.

/// Vacuum speed of light in millimetres per picosecond.
pub const SPEED_OF_LIGHT_MM_PER_PS: f64 = 0.299_792_458;

/// Ratio between the FWHM and the standard deviation of a Gaussian, 2√(2 ln 2).
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

pub const MM_PER_KM: f64 = 1.0e6;
pub const MM_PER_NM: f64 = 1.0e-6;
pub const MM_PER_PM: f64 = 1.0e-9;
pub const PS_PER_S: f64 = 1.0e12;
