//! Region classification and transit/transfer detection.
//!
//! A particle is "in" a beam once it is more than 3 w0 from the crossing
//! along that beam's axis and within 3 w0 of the axis transversely. The
//! crossing region is the box within 3 w0 of the intersection along both
//! axes. A transit is any passage beam -> crossing -> beam; it is a transfer
//! when the entry and exit beams differ.

use crate::dynamics::{total_energy, Control, ParticleState, TrajectoryObserver};
use crate::error::{Error, Result};
use crate::potential::{BeamAxis, TrapConfiguration};

/// Axial distance from the crossing, in waists, beyond which a particle
/// counts as inside a beam.
pub const AXIAL_BOUND_WAISTS: f64 = 3.0;
/// Transverse capture radius around a beam axis, in waists.
pub const CAPTURE_RADIUS_WAISTS: f64 = 3.0;

/// Which beam a particle belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeamId {
    Beam1,
    Beam2,
}

impl BeamId {
    pub fn as_str(&self) -> &'static str {
        match self {
            BeamId::Beam1 => "beam1",
            BeamId::Beam2 => "beam2",
        }
    }
}

/// Location of a particle relative to the two beams. Total: every finite
/// position maps to exactly one region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    InBeam1,
    InBeam2,
    Crossing,
    Outside,
}

/// One crossing-region passage.
#[derive(Clone, Copy, Debug)]
pub struct TransitRecord {
    pub entry_beam: BeamId,
    pub exit_beam: BeamId,
    /// Total energy at the first step classified Crossing, J.
    pub entry_energy: f64,
    /// entry_beam != exit_beam.
    pub transferred: bool,
    pub entry_time: f64,
    pub exit_time: f64,
}

#[inline]
fn axial_and_transverse_sq(
    axis: BeamAxis,
    vertical_offset: f64,
    position: &nalgebra::Vector3<f64>,
) -> (f64, f64) {
    let dz = position.z - vertical_offset;
    match axis {
        BeamAxis::X => (position.x, position.y * position.y + dz * dz),
        BeamAxis::Y => (position.y, position.x * position.x + dz * dz),
    }
}

/// Classify a position. The crossing box takes precedence; the beam regions
/// are mutually exclusive by construction (their transverse bound caps the
/// other beam's axial coordinate below its own 3 w0 threshold).
pub fn classify_region(position: &nalgebra::Vector3<f64>, config: &TrapConfiguration) -> Region {
    let b1 = &config.beam1;
    let b2 = &config.beam2;
    let (a1, t1_sq) = axial_and_transverse_sq(b1.axis, b1.vertical_offset, position);
    let (a2, t2_sq) = axial_and_transverse_sq(b2.axis, b2.vertical_offset, position);
    let ax1 = AXIAL_BOUND_WAISTS * b1.waist_w0;
    let ax2 = AXIAL_BOUND_WAISTS * b2.waist_w0;
    let cap1 = CAPTURE_RADIUS_WAISTS * b1.waist_w0;
    let cap2 = CAPTURE_RADIUS_WAISTS * b2.waist_w0;

    if a1.abs() < ax1 && a2.abs() < ax2 {
        Region::Crossing
    } else if a1.abs() >= ax1 && t1_sq < cap1 * cap1 {
        Region::InBeam1
    } else if a2.abs() >= ax2 && t2_sq < cap2 * cap2 {
        Region::InBeam2
    } else {
        Region::Outside
    }
}

/// transfers / transits; `None` when there is no data. Never 0-for-empty or
/// NaN.
pub fn transfer_probability(n_transfers: u64, n_transits: u64) -> Option<f64> {
    assert!(
        n_transfers <= n_transits,
        "transfers ({n_transfers}) exceed transits ({n_transits})"
    );
    if n_transits == 0 {
        None
    } else {
        Some(n_transfers as f64 / n_transits as f64)
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    /// No beam membership established yet (or reset by Outside).
    Idle,
    /// Last held membership of this beam; ready to enter the crossing.
    Armed(BeamId),
    /// Inside the crossing region after entering from `entry_beam`.
    InTransit {
        entry_beam: BeamId,
        entry_energy: f64,
        entry_time: f64,
    },
}

/// Finite-state machine over the region sequence of one trajectory.
///
/// Emits a [`TransitRecord`] exactly when a particle that last held beam
/// membership passes through the crossing and attains membership again;
/// Outside resets the machine without emitting.
pub struct TransitTracker {
    config: TrapConfiguration,
    phase: Phase,
    last_time: Option<f64>,
    records: Vec<TransitRecord>,
    /// Stop signal for `observe` once this many transits are recorded.
    transit_cap: Option<usize>,
    /// Largest |E_exit - E_entry| seen over a single transit, J.
    max_transit_drift: f64,
}

impl TransitTracker {
    pub fn new(config: TrapConfiguration) -> Self {
        TransitTracker {
            config,
            phase: Phase::Idle,
            last_time: None,
            records: Vec::new(),
            transit_cap: None,
            max_transit_drift: 0.0,
        }
    }

    /// Tracker whose `observe` stops the trajectory after `cap` transits.
    pub fn with_transit_cap(config: TrapConfiguration, cap: usize) -> Self {
        let mut t = Self::new(config);
        t.transit_cap = Some(cap);
        t
    }

    pub fn records(&self) -> &[TransitRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TransitRecord> {
        self.records
    }

    pub fn max_transit_drift(&self) -> f64 {
        self.max_transit_drift
    }

    /// Advance the machine with the next state of the trajectory; states must
    /// arrive in time order. Returns the record emitted by this update, if
    /// any (also appended to [`records`](Self::records)).
    pub fn update(&mut self, particle: &ParticleState) -> Result<Option<TransitRecord>> {
        if let Some(previous) = self.last_time {
            if particle.time < previous {
                return Err(Error::OutOfOrder {
                    previous,
                    current: particle.time,
                });
            }
        }
        self.last_time = Some(particle.time);

        let region = classify_region(&particle.position, &self.config);
        let membership = match region {
            Region::InBeam1 => Some(BeamId::Beam1),
            Region::InBeam2 => Some(BeamId::Beam2),
            _ => None,
        };

        let emitted = match (self.phase, region) {
            (_, Region::Outside) => {
                self.phase = Phase::Idle;
                None
            }
            (Phase::Idle, _) | (Phase::Armed(_), Region::InBeam1 | Region::InBeam2) => {
                if let Some(beam) = membership {
                    self.phase = Phase::Armed(beam);
                }
                None
            }
            (Phase::Armed(beam), Region::Crossing) => {
                self.phase = Phase::InTransit {
                    entry_beam: beam,
                    entry_energy: total_energy(particle, &self.config),
                    entry_time: particle.time,
                };
                None
            }
            (Phase::InTransit { .. }, Region::Crossing) => None,
            (
                Phase::InTransit {
                    entry_beam,
                    entry_energy,
                    entry_time,
                },
                Region::InBeam1 | Region::InBeam2,
            ) => {
                let exit_beam = membership.expect("beam region has membership");
                let exit_energy = total_energy(particle, &self.config);
                let drift = (exit_energy - entry_energy).abs();
                if drift > self.max_transit_drift {
                    self.max_transit_drift = drift;
                }
                let record = TransitRecord {
                    entry_beam,
                    exit_beam,
                    entry_energy,
                    transferred: entry_beam != exit_beam,
                    entry_time,
                    exit_time: particle.time,
                };
                self.records.push(record);
                self.phase = Phase::Armed(exit_beam);
                Some(record)
            }
        };
        Ok(emitted)
    }
}

impl TrajectoryObserver for TransitTracker {
    fn observe(&mut self, state: &ParticleState) -> Control {
        match self.update(state) {
            Ok(_) => match self.transit_cap {
                Some(cap) if self.records.len() >= cap => Control::Stop,
                _ => Control::Continue,
            },
            Err(_) => Control::Stop,
        }
    }
}
