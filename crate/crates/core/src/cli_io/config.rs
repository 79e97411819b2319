//! Run-configuration loading: TOML in the experiment's natural units
//! (um, nm, h*MHz or uK, waist multiples, depth fractions), converted to SI
//! on load.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::constants::{BOLTZMANN, PLANCK, RB87_MASS_AMU};
use crate::dynamics::{
    IntegratorParams, DEFAULT_DRIFT_TOLERANCE, DEFAULT_MAX_STEPS, DEFAULT_STEPS_PER_RADIAL_PERIOD,
};
use crate::ensemble::{
    SamplerParams, ThermalParams, DEFAULT_ENERGY_BINS, DEFAULT_ENERGY_RANGE, DEFAULT_MAX_TRANSITS,
    DEFAULT_TEMPERATURE_FRACTION,
};
use crate::error::{Error, Result};
use crate::potential::{radial_trap_frequency, TrapConfiguration};

const ATOMIC_MASS_KG: f64 = crate::constants::ATOMIC_MASS_KG;

/// Settings of the single-trajectory dump command.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryOptions {
    pub separation_w0: f64,
    /// Record every n-th step.
    pub stride: u64,
    pub max_transits: usize,
}

/// Fully resolved, validated run configuration (SI units).
#[derive(Clone, Debug)]
pub struct RunConfiguration {
    /// Trap template; the separation is applied per run from
    /// `separations_w0`.
    pub trap: TrapConfiguration,
    pub separations_w0: Vec<f64>,
    pub sampler: SamplerParams,
    pub integrator: IntegratorParams,
    pub thermal: ThermalParams,
    pub energy_bins: usize,
    pub output_dir: PathBuf,
    /// 0 = use all available cores.
    pub workers: usize,
    pub trajectory: TrajectoryOptions,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    beams: Option<RawBeams>,
    particle: Option<RawParticle>,
    sweep: Option<RawSweep>,
    sampler: Option<RawSampler>,
    integrator: Option<RawIntegrator>,
    thermal: Option<RawThermal>,
    output: Option<RawOutput>,
    trajectory: Option<RawTrajectory>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeams {
    waist_um: Option<f64>,
    wavelength_nm: Option<f64>,
    /// Single-beam depths as h * MHz.
    depth_mhz: Option<Vec<f64>>,
    /// Single-beam depths as kB * uK.
    depth_uk: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParticle {
    mass_amu: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    separations_w0: Option<Vec<f64>>,
    energy_bins: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampler {
    seed: Option<u64>,
    n_trajectories: Option<u64>,
    energy_range_u0: Option<[f64; 2]>,
    spawn_axial_distance_w0: Option<f64>,
    transverse_sigma_w0: Option<f64>,
    max_transits_per_trajectory: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    steps_per_radial_period: Option<f64>,
    max_steps: Option<u64>,
    drift_tolerance: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermal {
    temperature_fraction: Option<f64>,
    /// Alternative: absolute temperature in uK, converted to a fraction of
    /// the beam-1 depth.
    temperature_uk: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    workers: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrajectory {
    separation_w0: Option<f64>,
    stride: Option<u64>,
    max_transits: Option<usize>,
}

fn require<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config {
        key: key.to_string(),
        reason: "mandatory key is missing".to_string(),
    })
}

fn positive(value: f64, key: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Config {
            key: key.to_string(),
            reason: format!("must be positive and finite, got {value}"),
        })
    }
}

fn depth_pair(beams: &RawBeams) -> Result<(f64, f64)> {
    match (&beams.depth_mhz, &beams.depth_uk) {
        (Some(_), Some(_)) => Err(Error::Config {
            key: "beams.depth_mhz".to_string(),
            reason: "give either depth_mhz or depth_uk, not both".to_string(),
        }),
        (Some(mhz), None) => {
            let pair = two_depths(mhz, "beams.depth_mhz")?;
            Ok((pair.0 * PLANCK * 1e6, pair.1 * PLANCK * 1e6))
        }
        (None, Some(uk)) => {
            let pair = two_depths(uk, "beams.depth_uk")?;
            Ok((pair.0 * BOLTZMANN * 1e-6, pair.1 * BOLTZMANN * 1e-6))
        }
        (None, None) => Err(Error::Config {
            key: "beams.depth_mhz".to_string(),
            reason: "mandatory key is missing (or use beams.depth_uk)".to_string(),
        }),
    }
}

fn two_depths(values: &[f64], key: &str) -> Result<(f64, f64)> {
    if values.len() != 2 {
        return Err(Error::Config {
            key: key.to_string(),
            reason: format!("expected two values [beam1, beam2], got {}", values.len()),
        });
    }
    positive(values[0], key)?;
    positive(values[1], key)?;
    Ok((values[0], values[1]))
}

/// Load and validate a TOML run configuration, converting every quantity to
/// SI. Errors name the offending key.
pub fn load_config(path: &Path) -> Result<RunConfiguration> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| Error::Config {
        key: "<document>".to_string(),
        reason: e.message().to_string(),
    })?;

    let beams = require(raw.beams, "beams")?;
    let waist = positive(require(beams.waist_um, "beams.waist_um")?, "beams.waist_um")? * 1e-6;
    let wavelength = positive(
        require(beams.wavelength_nm, "beams.wavelength_nm")?,
        "beams.wavelength_nm",
    )? * 1e-9;
    let (depth1, depth2) = depth_pair(&beams)?;

    let mass_amu = raw
        .particle
        .and_then(|p| p.mass_amu)
        .unwrap_or(RB87_MASS_AMU);
    let mass = positive(mass_amu, "particle.mass_amu")? * ATOMIC_MASS_KG;

    let trap = TrapConfiguration::crossed(waist, wavelength, depth1, depth2, 0.0, mass);
    trap.validate().map_err(|e| Error::Config {
        key: "beams".to_string(),
        reason: e.to_string(),
    })?;

    let sweep = require(raw.sweep, "sweep")?;
    let separations_w0 = require(sweep.separations_w0, "sweep.separations_w0")?;
    if separations_w0.is_empty() {
        return Err(Error::Config {
            key: "sweep.separations_w0".to_string(),
            reason: "separation list must be non-empty".to_string(),
        });
    }
    let energy_bins = sweep.energy_bins.unwrap_or(DEFAULT_ENERGY_BINS);
    if energy_bins == 0 {
        return Err(Error::Config {
            key: "sweep.energy_bins".to_string(),
            reason: "must be positive".to_string(),
        });
    }

    let rs = require(raw.sampler, "sampler")?;
    let seed = require(rs.seed, "sampler.seed")?;
    let n_trajectories = require(rs.n_trajectories, "sampler.n_trajectories")?;
    let energy_range = rs
        .energy_range_u0
        .map(|[lo, hi]| (lo, hi))
        .unwrap_or(DEFAULT_ENERGY_RANGE);
    let sampler = SamplerParams {
        seed,
        n_trajectories,
        energy_range,
        spawn_axial_distance: rs.spawn_axial_distance_w0.unwrap_or(10.0) * waist,
        transverse_sigma: rs.transverse_sigma_w0.unwrap_or(0.5) * waist,
        max_transits_per_trajectory: rs
            .max_transits_per_trajectory
            .unwrap_or(DEFAULT_MAX_TRANSITS),
    };
    sampler.validate(&trap).map_err(|e| Error::Config {
        key: "sampler".to_string(),
        reason: e.to_string(),
    })?;

    let ri = raw.integrator;
    let steps_per_period = ri
        .as_ref()
        .and_then(|i| i.steps_per_radial_period)
        .unwrap_or(DEFAULT_STEPS_PER_RADIAL_PERIOD);
    positive(steps_per_period, "integrator.steps_per_radial_period")?;
    let mut integrator = IntegratorParams::with_resolution(&trap, steps_per_period);
    if let Some(max_steps) = ri.as_ref().and_then(|i| i.max_steps) {
        if max_steps == 0 {
            return Err(Error::Config {
                key: "integrator.max_steps".to_string(),
                reason: "must be positive".to_string(),
            });
        }
        integrator.max_steps = max_steps;
    } else {
        integrator.max_steps = DEFAULT_MAX_STEPS;
    }
    if let Some(tol) = ri.as_ref().and_then(|i| i.drift_tolerance) {
        integrator.drift_tolerance = positive(tol, "integrator.drift_tolerance")?;
    } else {
        integrator.drift_tolerance = DEFAULT_DRIFT_TOLERANCE;
    }

    let thermal = match raw.thermal {
        Some(t) => match (t.temperature_fraction, t.temperature_uk) {
            (Some(_), Some(_)) => {
                return Err(Error::Config {
                    key: "thermal.temperature_fraction".to_string(),
                    reason: "give either temperature_fraction or temperature_uk, not both"
                        .to_string(),
                })
            }
            (Some(f), None) => ThermalParams {
                temperature_fraction: f,
            },
            (None, Some(uk)) => ThermalParams {
                temperature_fraction: positive(uk, "thermal.temperature_uk")? * BOLTZMANN * 1e-6
                    / depth1,
            },
            (None, None) => ThermalParams::default(),
        },
        None => ThermalParams {
            temperature_fraction: DEFAULT_TEMPERATURE_FRACTION,
        },
    };
    thermal.validate().map_err(|e| Error::Config {
        key: "thermal.temperature_fraction".to_string(),
        reason: e.to_string(),
    })?;

    let output_dir = raw
        .output
        .as_ref()
        .and_then(|o| o.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let workers = raw.output.as_ref().and_then(|o| o.workers).unwrap_or(0);

    let rt = raw.trajectory;
    let trajectory = TrajectoryOptions {
        separation_w0: rt.as_ref().and_then(|t| t.separation_w0).unwrap_or(1.0),
        stride: rt.as_ref().and_then(|t| t.stride).unwrap_or(20).max(1),
        max_transits: rt.as_ref().and_then(|t| t.max_transits).unwrap_or(8).max(1),
    };

    Ok(RunConfiguration {
        trap,
        separations_w0,
        sampler,
        integrator,
        thermal,
        energy_bins,
        output_dir,
        workers,
        trajectory,
    })
}

impl RunConfiguration {
    pub fn master_seed(&self) -> u64 {
        self.sampler.seed
    }

    /// Human-readable dump of the resolved configuration, written to the run
    /// log. Contains only values derived from the inputs, so output bytes
    /// stay reproducible.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let b1 = &self.trap.beam1;
        let b2 = &self.trap.beam2;
        let m = self.trap.particle_mass;
        writeln!(s, "beamcross {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "master_seed = {}", self.sampler.seed).unwrap();
        writeln!(s, "waist_w0_m = {:e}", b1.waist_w0).unwrap();
        writeln!(s, "wavelength_m = {:e}", b1.wavelength).unwrap();
        writeln!(s, "rayleigh_range_m = {:e}", b1.rayleigh_range()).unwrap();
        writeln!(s, "depth1_J = {:e}", b1.depth_u0).unwrap();
        writeln!(s, "depth2_J = {:e}", b2.depth_u0).unwrap();
        writeln!(s, "particle_mass_kg = {m:e}").unwrap();
        writeln!(
            s,
            "radial_frequency1_Hz = {:e}",
            radial_trap_frequency(b1, m)
        )
        .unwrap();
        writeln!(
            s,
            "radial_frequency2_Hz = {:e}",
            radial_trap_frequency(b2, m)
        )
        .unwrap();
        writeln!(s, "separations_w0 = {:?}", self.separations_w0).unwrap();
        writeln!(s, "energy_bins = {}", self.energy_bins).unwrap();
        writeln!(s, "n_trajectories = {}", self.sampler.n_trajectories).unwrap();
        writeln!(s, "energy_range_U0 = {:?}", self.sampler.energy_range).unwrap();
        writeln!(
            s,
            "spawn_axial_distance_m = {:e}",
            self.sampler.spawn_axial_distance
        )
        .unwrap();
        writeln!(s, "transverse_sigma_m = {:e}", self.sampler.transverse_sigma).unwrap();
        writeln!(
            s,
            "max_transits_per_trajectory = {}",
            self.sampler.max_transits_per_trajectory
        )
        .unwrap();
        writeln!(s, "dt_s = {:e}", self.integrator.dt).unwrap();
        writeln!(s, "max_steps = {}", self.integrator.max_steps).unwrap();
        writeln!(s, "drift_tolerance = {:e}", self.integrator.drift_tolerance).unwrap();
        writeln!(
            s,
            "temperature_fraction = {}",
            self.thermal.temperature_fraction
        )
        .unwrap();
        writeln!(s, "output_dir = {}", self.output_dir.display()).unwrap();
        writeln!(s, "workers = {}", self.workers).unwrap();
        writeln!(
            s,
            "trajectory = {{ separation_w0 = {}, stride = {}, max_transits = {} }}",
            self.trajectory.separation_w0, self.trajectory.stride, self.trajectory.max_transits
        )
        .unwrap();
        s
    }
}
