//! Physical constants (SI).

/// Planck constant, J s (exact by SI definition).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K (exact by SI definition).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_KG: f64 = 1.660_539_066_60e-27;

/// Mass of rubidium-87 in atomic mass units.
pub const RB87_MASS_AMU: f64 = 86.909_180_531;

/// Mass of rubidium-87, kg.
pub const RB87_MASS_KG: f64 = RB87_MASS_AMU * ATOMIC_MASS_KG;
