//! Time integration of the classical equations of motion in the static
//! two-beam potential, with energy bookkeeping.
//!
//! Velocity Verlet with a fixed step: symplectic and second order, so the
//! energy error stays bounded instead of drifting, and fixed steps keep event
//! detection and run-to-run determinism simple.

use nalgebra::Vector3;

use crate::potential::{radial_trap_frequency, total_gradient, total_potential, TrapConfiguration};

/// Position, velocity, and time of one classical particle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParticleState {
    /// m
    pub position: Vector3<f64>,
    /// m/s
    pub velocity: Vector3<f64>,
    /// s
    pub time: f64,
}

impl ParticleState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        ParticleState {
            position,
            velocity,
            time: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|c| c.is_finite())
            && self.velocity.iter().all(|c| c.is_finite())
            && self.time.is_finite()
    }
}

/// Fixed-step integrator settings.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorParams {
    /// Step, s.
    pub dt: f64,
    /// Hard cap on steps per trajectory.
    pub max_steps: u64,
    /// Max allowed |dE| per transit as a fraction of the deeper beam's depth
    /// before the trajectory is flagged.
    pub drift_tolerance: f64,
}

/// Default temporal resolution: steps per radial period of the deeper beam.
pub const DEFAULT_STEPS_PER_RADIAL_PERIOD: f64 = 500.0;
pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;
pub const DEFAULT_DRIFT_TOLERANCE: f64 = 1e-4;

impl IntegratorParams {
    /// dt resolving the fastest radial oscillation with
    /// `steps_per_radial_period` steps.
    pub fn with_resolution(config: &TrapConfiguration, steps_per_radial_period: f64) -> Self {
        let f1 = radial_trap_frequency(&config.beam1, config.particle_mass);
        let f2 = radial_trap_frequency(&config.beam2, config.particle_mass);
        IntegratorParams {
            dt: 1.0 / (steps_per_radial_period * f1.max(f2)),
            max_steps: DEFAULT_MAX_STEPS,
            drift_tolerance: DEFAULT_DRIFT_TOLERANCE,
        }
    }

    pub fn for_trap(config: &TrapConfiguration) -> Self {
        Self::with_resolution(config, DEFAULT_STEPS_PER_RADIAL_PERIOD)
    }
}

#[inline]
fn acceleration(config: &TrapConfiguration, position: &Vector3<f64>) -> Vector3<f64> {
    -total_gradient(config, position) / config.particle_mass
}

/// One velocity-Verlet step under the force -grad U_total.
pub fn step(state: &ParticleState, config: &TrapConfiguration, dt: f64) -> ParticleState {
    let a0 = acceleration(config, &state.position);
    step_cached(state, config, dt, a0).0
}

/// Verlet step reusing the acceleration at the current position; returns the
/// new state and the acceleration at the new position for the next step.
#[inline]
fn step_cached(
    state: &ParticleState,
    config: &TrapConfiguration,
    dt: f64,
    a0: Vector3<f64>,
) -> (ParticleState, Vector3<f64>) {
    let position = state.position + state.velocity * dt + a0 * (0.5 * dt * dt);
    let a1 = acceleration(config, &position);
    let velocity = state.velocity + (a0 + a1) * (0.5 * dt);
    (
        ParticleState {
            position,
            velocity,
            time: state.time + dt,
        },
        a1,
    )
}

/// Kinetic plus potential energy, J. Negative values mean a bound particle.
pub fn total_energy(state: &ParticleState, config: &TrapConfiguration) -> f64 {
    0.5 * config.particle_mass * state.velocity.norm_squared()
        + total_potential(config, &state.position)
}

/// Why a trajectory stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminationCause {
    /// The observer requested a stop.
    ObserverStop,
    /// The particle left the trapping region or became unbound.
    Escaped,
    /// The step cap was reached (truncation, not an error).
    MaxSteps,
    /// A non-finite state appeared; the trajectory is unusable.
    NonFinite,
}

/// Outcome summary of [`propagate`].
#[derive(Clone, Copy, Debug)]
pub struct TerminationReport {
    pub cause: TerminationCause,
    pub steps: u64,
    pub final_state: ParticleState,
    pub initial_energy: f64,
    /// |E_final - E_initial|, J (NaN when the trajectory went non-finite).
    pub energy_drift: f64,
}

/// Observer decision after seeing a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Receives every integrated state of one trajectory in time order.
pub trait TrajectoryObserver {
    fn observe(&mut self, state: &ParticleState) -> Control;
}

/// Observer that never stops the trajectory.
pub struct NullObserver;

impl TrajectoryObserver for NullObserver {
    fn observe(&mut self, _state: &ParticleState) -> Control {
        Control::Continue
    }
}

/// Escape bound along either beam axis, in waists of the respective beam.
pub const ESCAPE_AXIAL_WAISTS: f64 = 60.0;
/// The positive-energy outward check runs every this many steps.
const ESCAPE_CHECK_INTERVAL: u64 = 32;

#[inline]
fn escaped_axially(config: &TrapConfiguration, position: &Vector3<f64>) -> bool {
    position.x.abs() > ESCAPE_AXIAL_WAISTS * config.beam1.waist_w0
        || position.y.abs() > ESCAPE_AXIAL_WAISTS * config.beam2.waist_w0
}

/// Integrate a trajectory, feeding every new state to `observer`, until the
/// observer stops it, the particle escapes, the step cap is hit, or the state
/// goes non-finite.
pub fn propagate(
    initial: ParticleState,
    config: &TrapConfiguration,
    params: &IntegratorParams,
    observer: &mut impl TrajectoryObserver,
) -> TerminationReport {
    let initial_energy = total_energy(&initial, config);
    let report = |cause, steps, final_state: ParticleState| {
        let energy_drift = if final_state.is_finite() {
            (total_energy(&final_state, config) - initial_energy).abs()
        } else {
            f64::NAN
        };
        TerminationReport {
            cause,
            steps,
            final_state,
            initial_energy,
            energy_drift,
        }
    };

    if !initial.is_finite() {
        return report(TerminationCause::NonFinite, 0, initial);
    }
    if observer.observe(&initial) == Control::Stop {
        return report(TerminationCause::ObserverStop, 0, initial);
    }

    let mut state = initial;
    let mut accel = acceleration(config, &state.position);
    for n in 1..=params.max_steps {
        let (next, next_accel) = step_cached(&state, config, params.dt, accel);
        state = next;
        accel = next_accel;
        if !state.is_finite() {
            return report(TerminationCause::NonFinite, n, state);
        }
        if observer.observe(&state) == Control::Stop {
            return report(TerminationCause::ObserverStop, n, state);
        }
        if escaped_axially(config, &state.position) {
            return report(TerminationCause::Escaped, n, state);
        }
        if n % ESCAPE_CHECK_INTERVAL == 0
            && state.position.dot(&state.velocity) > 0.0
            && total_energy(&state, config) > 0.0
        {
            return report(TerminationCause::Escaped, n, state);
        }
    }
    report(TerminationCause::MaxSteps, params.max_steps, state)
}
