//! Random initial conditions, ensemble orchestration, transfer histograms,
//! and thermal weighting.
//!
//! Trajectories are embarrassingly parallel. Each one gets its own RNG seeded
//! from (master seed, separation index, trajectory index), and workers
//! accumulate private histogram shards that merge by element-wise addition,
//! so results are bit-identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{propagate, IntegratorParams, ParticleState, TerminationCause};
use crate::error::{Error, Result};
use crate::events::{transfer_probability, TransitTracker};
use crate::potential::{total_potential, BeamAxis, TrapConfiguration};

/// Initial-condition sampling parameters.
#[derive(Clone, Copy, Debug)]
pub struct SamplerParams {
    pub seed: u64,
    pub n_trajectories: u64,
    /// Target total-energy window in units of the spawn beam's depth;
    /// both ends negative (bound particles).
    pub energy_range: (f64, f64),
    /// Spawn distance from the crossing along the beam-1 axis, m.
    pub spawn_axial_distance: f64,
    /// Width of the transverse spawn Gaussian, m.
    pub transverse_sigma: f64,
    /// Trajectories stop once this many transits are recorded.
    pub max_transits_per_trajectory: usize,
}

pub const DEFAULT_ENERGY_RANGE: (f64, f64) = (-0.95, -0.05);
pub const DEFAULT_N_TRAJECTORIES: u64 = 2000;
pub const DEFAULT_MAX_TRANSITS: usize = 16;
/// Rejection attempts before the configuration is declared unsatisfiable.
const MAX_SAMPLE_ATTEMPTS: u32 = 10_000;

impl SamplerParams {
    pub fn for_trap(config: &TrapConfiguration) -> Self {
        SamplerParams {
            seed: 0,
            n_trajectories: DEFAULT_N_TRAJECTORIES,
            energy_range: DEFAULT_ENERGY_RANGE,
            spawn_axial_distance: 10.0 * config.beam1.waist_w0,
            transverse_sigma: config.beam1.waist_w0 / 2.0,
            max_transits_per_trajectory: DEFAULT_MAX_TRANSITS,
        }
    }

    pub fn validate(&self, config: &TrapConfiguration) -> Result<()> {
        let (lo, hi) = self.energy_range;
        if !(lo < hi && hi < 0.0) {
            return Err(Error::InvalidParameter {
                name: "energy_range",
                reason: format!("must satisfy E_min < E_max < 0, got ({lo}, {hi})"),
            });
        }
        if !(self.spawn_axial_distance > 3.0 * config.beam1.waist_w0) {
            return Err(Error::InvalidParameter {
                name: "spawn_axial_distance",
                reason: "must exceed 3 w0 so spawns start inside beam 1".into(),
            });
        }
        if !(self.transverse_sigma > 0.0) {
            return Err(Error::InvalidParameter {
                name: "transverse_sigma",
                reason: "must be positive".into(),
            });
        }
        if self.n_trajectories == 0 {
            return Err(Error::InvalidParameter {
                name: "n_trajectories",
                reason: "must be positive".into(),
            });
        }
        if self.max_transits_per_trajectory == 0 {
            return Err(Error::InvalidParameter {
                name: "max_transits_per_trajectory",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// An accepted initial condition together with the energy it was drawn for.
#[derive(Clone, Copy, Debug)]
pub struct SampledState {
    pub state: ParticleState,
    /// The drawn target total energy, J.
    pub target_energy: f64,
}

/// splitmix64 finalizer; the standard 64-bit mixer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trajectory seed, independent of execution order.
pub fn derive_trajectory_seed(master: u64, separation_index: usize, trajectory_index: u64) -> u64 {
    mix64(mix64(mix64(master) ^ separation_index as u64) ^ trajectory_index)
}

/// Standard-normal pair via Box-Muller.
fn normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

fn isotropic_direction(rng: &mut impl Rng) -> nalgebra::Vector3<f64> {
    loop {
        let (a, b) = normal_pair(rng);
        let (c, _) = normal_pair(rng);
        let v = nalgebra::Vector3::new(a, b, c);
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Draw one initial state in beam 1: target energy uniform in the configured
/// window, spawn at +-spawn_axial_distance along the beam-1 axis with a
/// Gaussian transverse offset, speed fixed by K = E - U(r), isotropic
/// direction with the axial component turned toward the crossing. The whole
/// draw is rejected and repeated whenever U(r) > E or the point is not
/// classified as inside beam 1.
pub fn sample_initial_state(
    rng: &mut impl Rng,
    config: &TrapConfiguration,
    sampler: &SamplerParams,
) -> Result<SampledState> {
    let u0 = config.beam1.depth_u0;
    let (e_lo, e_hi) = sampler.energy_range;
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let target_energy = rng.random_range(e_lo..e_hi) * u0;
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let axial = sign * sampler.spawn_axial_distance;
        let (t1, t2) = normal_pair(rng);
        let (t1, t2) = (t1 * sampler.transverse_sigma, t2 * sampler.transverse_sigma);
        let z0 = config.beam1.vertical_offset;
        let position = match config.beam1.axis {
            BeamAxis::X => nalgebra::Vector3::new(axial, t1, z0 + t2),
            BeamAxis::Y => nalgebra::Vector3::new(t1, axial, z0 + t2),
        };
        let potential = total_potential(config, &position);
        if potential > target_energy {
            continue;
        }
        if crate::events::classify_region(&position, config) != crate::events::Region::InBeam1 {
            continue;
        }
        let kinetic = target_energy - potential;
        let speed = (2.0 * kinetic / config.particle_mass).sqrt();
        let mut direction = isotropic_direction(rng);
        // Point the axial component at the crossing.
        let axial_component = match config.beam1.axis {
            BeamAxis::X => &mut direction.x,
            BeamAxis::Y => &mut direction.y,
        };
        *axial_component = -sign * axial_component.abs();
        let state = ParticleState::new(position, direction * speed);
        return Ok(SampledState {
            state,
            target_energy,
        });
    }
    Err(Error::UnsatisfiableSampler {
        attempts: MAX_SAMPLE_ATTEMPTS,
    })
}

/// Transit/transfer counts binned by (beam separation, total energy).
#[derive(Clone, Debug, PartialEq)]
pub struct TransferHistogram {
    /// Beam separations in units of the beam-1 waist.
    pub separation_values: Vec<f64>,
    /// Energy bin edges in units of the spawn beam's depth, ascending.
    pub energy_bin_edges: Vec<f64>,
    /// transits[separation][bin]
    pub transits: Vec<Vec<u64>>,
    /// transfers[separation][bin]
    pub transfers: Vec<Vec<u64>>,
}

pub const DEFAULT_ENERGY_BINS: usize = 10;
/// Total-energy binning window in units of U0: bound particles entering from
/// a single beam satisfy -1 <= E/U0 <= 0.
const ENERGY_BIN_RANGE: (f64, f64) = (-1.0, 0.0);

impl TransferHistogram {
    pub fn new(separations_w0: &[f64], n_bins: usize) -> Self {
        let (lo, hi) = ENERGY_BIN_RANGE;
        let edges = (0..=n_bins)
            .map(|i| lo + (hi - lo) * i as f64 / n_bins as f64)
            .collect();
        TransferHistogram {
            separation_values: separations_w0.to_vec(),
            energy_bin_edges: edges,
            transits: vec![vec![0; n_bins]; separations_w0.len()],
            transfers: vec![vec![0; n_bins]; separations_w0.len()],
        }
    }

    pub fn n_bins(&self) -> usize {
        self.energy_bin_edges.len() - 1
    }

    /// Bin of a total energy in U0 units; `None` outside the binning window.
    pub fn bin_index(&self, energy_u0: f64) -> Option<usize> {
        let n = self.n_bins();
        let lo = self.energy_bin_edges[0];
        let hi = self.energy_bin_edges[n];
        if !(energy_u0 >= lo && energy_u0 <= hi) {
            return None;
        }
        let idx = ((energy_u0 - lo) / (hi - lo) * n as f64) as usize;
        Some(idx.min(n - 1))
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        0.5 * (self.energy_bin_edges[bin] + self.energy_bin_edges[bin + 1])
    }

    /// Transfer probability of one bin; `None` when the bin has no transits.
    pub fn probability(&self, separation_idx: usize, bin: usize) -> Option<f64> {
        transfer_probability(
            self.transfers[separation_idx][bin],
            self.transits[separation_idx][bin],
        )
    }
}

/// Per-separation bookkeeping of how trajectories ended.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeparationDiagnostics {
    pub separation_w0: f64,
    pub trajectories: u64,
    /// Trajectories dropped for producing non-finite states.
    pub flagged_nonfinite: u64,
    /// Trajectories dropped for exceeding the per-transit drift tolerance.
    pub flagged_drift: u64,
    pub escaped: u64,
    pub truncated_max_steps: u64,
    pub stopped_at_transit_cap: u64,
    /// Transits counted into the histogram.
    pub transits: u64,
    pub transfers: u64,
    /// Transits whose entry energy fell outside the binning window.
    pub out_of_range_transits: u64,
    /// Largest per-transit |dE| seen, as a fraction of the deeper depth.
    pub max_transit_drift: f64,
}

impl SeparationDiagnostics {
    fn absorb(&mut self, other: &SeparationDiagnostics) {
        self.trajectories += other.trajectories;
        self.flagged_nonfinite += other.flagged_nonfinite;
        self.flagged_drift += other.flagged_drift;
        self.escaped += other.escaped;
        self.truncated_max_steps += other.truncated_max_steps;
        self.stopped_at_transit_cap += other.stopped_at_transit_cap;
        self.transits += other.transits;
        self.transfers += other.transfers;
        self.out_of_range_transits += other.out_of_range_transits;
        self.max_transit_drift = self.max_transit_drift.max(other.max_transit_drift);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepDiagnostics {
    pub per_separation: Vec<SeparationDiagnostics>,
}

/// Histogram plus diagnostics from one Monte Carlo sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub histogram: TransferHistogram,
    pub diagnostics: SweepDiagnostics,
}

/// Private per-worker accumulator for one separation.
struct Shard {
    transits: Vec<u64>,
    transfers: Vec<u64>,
    diag: SeparationDiagnostics,
}

impl Shard {
    fn empty(n_bins: usize, separation_w0: f64) -> Self {
        Shard {
            transits: vec![0; n_bins],
            transfers: vec![0; n_bins],
            diag: SeparationDiagnostics {
                separation_w0,
                ..Default::default()
            },
        }
    }

    fn merge(mut self, other: Shard) -> Shard {
        for (a, b) in self.transits.iter_mut().zip(&other.transits) {
            *a += b;
        }
        for (a, b) in self.transfers.iter_mut().zip(&other.transfers) {
            *a += b;
        }
        self.diag.absorb(&other.diag);
        self
    }
}

/// Run `sampler.n_trajectories` independent trajectories at every separation
/// (in units of the beam-1 waist) and histogram the resulting transits and
/// transfers by entry energy. Deterministic for a fixed master seed
/// regardless of worker count and execution order; trajectories flagged for
/// numerical trouble are excluded from the counts and tallied in the
/// diagnostics.
pub fn run_sweep(
    template: &TrapConfiguration,
    separations_w0: &[f64],
    sampler: &SamplerParams,
    integrator: &IntegratorParams,
    n_energy_bins: usize,
) -> Result<SweepOutcome> {
    template.validate()?;
    sampler.validate(template)?;
    if separations_w0.is_empty() {
        return Err(Error::InvalidParameter {
            name: "separations",
            reason: "separation list must be non-empty".into(),
        });
    }
    if n_energy_bins == 0 {
        return Err(Error::InvalidParameter {
            name: "energy_bins",
            reason: "must be positive".into(),
        });
    }

    let mut histogram = TransferHistogram::new(separations_w0, n_energy_bins);
    let mut diagnostics = SweepDiagnostics::default();
    let u0 = template.beam1.depth_u0;
    let w0 = template.beam1.waist_w0;

    for (sep_idx, &d_w0) in separations_w0.iter().enumerate() {
        let config = template.with_separation(d_w0 * w0);
        let shard = (0..sampler.n_trajectories)
            .into_par_iter()
            .try_fold(
                || Shard::empty(n_energy_bins, d_w0),
                |mut acc, traj_idx| {
                    run_trajectory(
                        &config, sampler, integrator, sep_idx, traj_idx, u0, &histogram, &mut acc,
                    )?;
                    Ok(acc)
                },
            )
            .try_reduce(|| Shard::empty(n_energy_bins, d_w0), |a, b| Ok(a.merge(b)))?;

        histogram.transits[sep_idx] = shard.transits;
        histogram.transfers[sep_idx] = shard.transfers;
        diagnostics.per_separation.push(shard.diag);
    }

    Ok(SweepOutcome {
        histogram,
        diagnostics,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trajectory(
    config: &TrapConfiguration,
    sampler: &SamplerParams,
    integrator: &IntegratorParams,
    sep_idx: usize,
    traj_idx: u64,
    u0: f64,
    binning: &TransferHistogram,
    acc: &mut Shard,
) -> Result<()> {
    let seed = derive_trajectory_seed(sampler.seed, sep_idx, traj_idx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = sample_initial_state(&mut rng, config, sampler)?;
    let mut tracker =
        TransitTracker::with_transit_cap(*config, sampler.max_transits_per_trajectory);
    let report = propagate(sample.state, config, integrator, &mut tracker);

    acc.diag.trajectories += 1;
    if report.cause == TerminationCause::NonFinite {
        acc.diag.flagged_nonfinite += 1;
        return Ok(());
    }
    let drift_fraction = tracker.max_transit_drift() / config.max_depth();
    if drift_fraction.is_finite() {
        acc.diag.max_transit_drift = acc.diag.max_transit_drift.max(drift_fraction);
    }
    if drift_fraction > integrator.drift_tolerance {
        acc.diag.flagged_drift += 1;
        return Ok(());
    }
    match report.cause {
        TerminationCause::Escaped => acc.diag.escaped += 1,
        TerminationCause::MaxSteps => acc.diag.truncated_max_steps += 1,
        TerminationCause::ObserverStop => acc.diag.stopped_at_transit_cap += 1,
        TerminationCause::NonFinite => unreachable!(),
    }
    for record in tracker.records() {
        match binning.bin_index(record.entry_energy / u0) {
            Some(bin) => {
                acc.transits[bin] += 1;
                acc.diag.transits += 1;
                if record.transferred {
                    acc.transfers[bin] += 1;
                    acc.diag.transfers += 1;
                }
            }
            None => acc.diag.out_of_range_transits += 1,
        }
    }
    Ok(())
}

/// Thermal ensemble description: kB T as a fraction of the spawn beam depth.
#[derive(Clone, Copy, Debug)]
pub struct ThermalParams {
    pub temperature_fraction: f64,
}

pub const DEFAULT_TEMPERATURE_FRACTION: f64 = 0.10;

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            temperature_fraction: DEFAULT_TEMPERATURE_FRACTION,
        }
    }
}

impl ThermalParams {
    pub fn validate(&self) -> Result<()> {
        let f = self.temperature_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidParameter {
                name: "temperature_fraction",
                reason: format!("must lie in (0, 1), got {f}"),
            });
        }
        Ok(())
    }
}

/// Unnormalized weight of a 3-D harmonic-oscillator thermal energy
/// distribution truncated at the trap depth: E^2 exp(-E / kB T) for
/// E measured from the trap bottom, zero outside [0, U0].
pub fn thermal_weight(e_bottom: f64, u0: f64, thermal: &ThermalParams) -> f64 {
    if !(0.0..=1.0).contains(&(e_bottom / u0)) {
        return 0.0;
    }
    let kt = thermal.temperature_fraction * u0;
    e_bottom * e_bottom * (-e_bottom / kt).exp()
}

/// Thermally weighted transfer efficiency vs. beam separation.
#[derive(Clone, Debug, PartialEq)]
pub struct EfficiencyCurve {
    /// Units of the beam-1 waist.
    pub separation_values: Vec<f64>,
    /// `None` where no energy bin had data.
    pub efficiency: Vec<Option<f64>>,
    pub normalized: bool,
}

impl EfficiencyCurve {
    /// Same curve scaled so its maximum over populated separations is 1.
    pub fn normalized(&self) -> EfficiencyCurve {
        let max = self
            .efficiency
            .iter()
            .flatten()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let efficiency = if max > 0.0 {
            self.efficiency
                .iter()
                .map(|e| e.map(|v| v / max))
                .collect()
        } else {
            self.efficiency.clone()
        };
        EfficiencyCurve {
            separation_values: self.separation_values.clone(),
            efficiency,
            normalized: true,
        }
    }
}

/// Weight every populated energy bin by the truncated thermal distribution
/// (bin-center total energy mapped to energy above the spawn-beam bottom via
/// E_bottom = E + U0) and average the per-bin transfer probabilities.
pub fn thermal_efficiency(hist: &TransferHistogram, thermal: &ThermalParams) -> EfficiencyCurve {
    let efficiency = (0..hist.separation_values.len())
        .map(|i| {
            let mut num = 0.0;
            let mut den = 0.0;
            for bin in 0..hist.n_bins() {
                if let Some(p) = hist.probability(i, bin) {
                    // Bin centers are in units of U0, so work with U0 = 1.
                    let e_bottom = hist.bin_center(bin) + 1.0;
                    let w = thermal_weight(e_bottom, 1.0, thermal);
                    num += w * p;
                    den += w;
                }
            }
            if den > 0.0 {
                Some(num / den)
            } else {
                None
            }
        })
        .collect();
    EfficiencyCurve {
        separation_values: hist.separation_values.clone(),
        efficiency,
        normalized: false,
    }
}
