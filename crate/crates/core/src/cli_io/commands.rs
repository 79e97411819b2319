//! Subcommand implementations: each one runs the requested computation and
//! serializes the results as CSV under the configured output directory.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cli_io::config::RunConfiguration;
use crate::cli_io::csv::{write_csv_with_comment, CsvCell, CsvTable};
use crate::dynamics::{propagate, total_energy, Control, ParticleState, TrajectoryObserver};
use crate::ensemble::{
    derive_trajectory_seed, run_sweep, sample_initial_state, thermal_efficiency, SweepOutcome,
};
use crate::error::{Error, Result};
use crate::events::TransitTracker;
use crate::potential::{analyze_topology, total_potential, TrapConfiguration};

/// CLI subcommand selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Vertical potential profiles per separation.
    Profile,
    /// Topology classification and barrier height vs. separation.
    Topology,
    /// Full Monte Carlo sweep: histogram, efficiency curve, diagnostics.
    Sweep,
    /// Single seeded trajectory dump.
    Trajectory,
}

/// Execute a subcommand; returns the paths of all files written.
pub fn run_command(command: Command, config: &RunConfiguration) -> Result<Vec<PathBuf>> {
    config.trap.validate()?;
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;

    let mut written = Vec::new();
    let log_path = out.join("run.log");
    fs::write(&log_path, config.echo()).map_err(|source| Error::Io {
        path: log_path.clone(),
        source,
    })?;
    written.push(log_path);

    let stamp = format!(
        "beamcross {} seed={}",
        env!("CARGO_PKG_VERSION"),
        config.master_seed()
    );

    match command {
        Command::Profile => written.push(write_profile(config, &stamp, out)?),
        Command::Topology => written.push(write_topology(config, &stamp, out)?),
        Command::Sweep => {
            let outcome = sweep_with_workers(config)?;
            written.push(write_histogram(&outcome, &stamp, out)?);
            written.push(write_efficiency(config, &outcome, &stamp, out)?);
            written.push(write_diagnostics(&outcome, &stamp, out)?);
        }
        Command::Trajectory => {
            let (trajectory, transits) = write_trajectory(config, &stamp, out)?;
            written.push(trajectory);
            written.push(transits);
        }
    }
    Ok(written)
}

fn sweep_with_workers(config: &RunConfiguration) -> Result<SweepOutcome> {
    let run = || {
        run_sweep(
            &config.trap,
            &config.separations_w0,
            &config.sampler,
            &config.integrator,
            config.energy_bins,
        )
    };
    if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidParameter {
                name: "workers",
                reason: e.to_string(),
            })?;
        pool.install(run)
    } else {
        run()
    }
}

fn write_profile(config: &RunConfiguration, stamp: &str, out: &Path) -> Result<PathBuf> {
    let w0 = config.trap.beam1.waist_w0;
    let u0 = config.trap.beam1.depth_u0;
    let mut table = CsvTable::new(&["separation_w0", "z_w0", "potential_U0"]);
    for &d in &config.separations_w0 {
        let trap = config.trap.with_separation(d * w0);
        let lo = d.min(0.0) - 3.0;
        let hi = d.max(0.0) + 3.0;
        let n = ((hi - lo) / 0.01).round() as usize;
        for i in 0..=n {
            let z_w0 = lo + (hi - lo) * i as f64 / n as f64;
            let u = total_potential(&trap, &nalgebra::Vector3::new(0.0, 0.0, z_w0 * w0));
            table.push_row(vec![d.into(), z_w0.into(), (u / u0).into()]);
        }
    }
    let path = out.join("profile.csv");
    write_csv_with_comment(stamp, &table, &path)?;
    Ok(path)
}

fn write_topology(config: &RunConfiguration, stamp: &str, out: &Path) -> Result<PathBuf> {
    let w0 = config.trap.beam1.waist_w0;
    let u0 = config.trap.beam1.depth_u0;
    let mut table = CsvTable::new(&[
        "separation_w0",
        "classification",
        "min1_z_w0",
        "min2_z_w0",
        "barrier_U0",
    ]);
    for &d in &config.separations_w0 {
        let trap = config.trap.with_separation(d * w0);
        let topo = analyze_topology(&trap)?;
        let min1 = topo.minima_z.first().map(|&z| z / w0);
        let min2 = topo.minima_z.get(1).map(|&z| z / w0);
        table.push_row(vec![
            d.into(),
            topo.classification.as_str().into(),
            min1.into(),
            min2.into(),
            (topo.barrier_height / u0).into(),
        ]);
    }
    let path = out.join("topology.csv");
    write_csv_with_comment(stamp, &table, &path)?;
    Ok(path)
}

fn write_histogram(
    config: &RunConfiguration,
    outcome: &SweepOutcome,
    stamp: &str,
    out: &Path,
) -> Result<PathBuf> {
    let h = &outcome.histogram;
    let mut table = CsvTable::new(&[
        "separation_w0",
        "energy_lo_U0",
        "energy_hi_U0",
        "transits",
        "transfers",
        "probability",
    ]);
    for (i, &d) in h.separation_values.iter().enumerate() {
        for bin in 0..h.n_bins() {
            table.push_row(vec![
                d.into(),
                h.energy_bin_edges[bin].into(),
                h.energy_bin_edges[bin + 1].into(),
                h.transits[i][bin].into(),
                h.transfers[i][bin].into(),
                h.probability(i, bin).into(),
            ]);
        }
    }
    let path = out.join("histogram.csv");
    write_csv_with_comment(stamp, &table, &path)?;
    Ok(path)
}

fn write_efficiency(
    config: &RunConfiguration,
    outcome: &SweepOutcome,
    stamp: &str,
    out: &Path,
) -> Result<PathBuf> {
    let curve = thermal_efficiency(&outcome.histogram, &config.thermal);
    let normalized = curve.normalized();
    let mut table = CsvTable::new(&["separation_w0", "efficiency", "efficiency_normalized"]);
    for (i, &d) in curve.separation_values.iter().enumerate() {
        table.push_row(vec![
            d.into(),
            curve.efficiency[i].into(),
            normalized.efficiency[i].into(),
        ]);
    }
    let path = out.join("efficiency.csv");
    write_csv_with_comment(stamp, &table, &path)?;
    Ok(path)
}

fn write_diagnostics(outcome: &SweepOutcome, stamp: &str, out: &Path) -> Result<PathBuf> {
    let mut table = CsvTable::new(&[
        "separation_w0",
        "trajectories",
        "flagged_nonfinite",
        "flagged_drift",
        "escaped",
        "truncated_max_steps",
        "stopped_at_transit_cap",
        "transits",
        "transfers",
        "out_of_range_transits",
        "max_transit_drift_U0",
    ]);
    for d in &outcome.diagnostics.per_separation {
        table.push_row(vec![
            d.separation_w0.into(),
            d.trajectories.into(),
            d.flagged_nonfinite.into(),
            d.flagged_drift.into(),
            d.escaped.into(),
            d.truncated_max_steps.into(),
            d.stopped_at_transit_cap.into(),
            d.transits.into(),
            d.transfers.into(),
            d.out_of_range_transits.into(),
            d.max_transit_drift.into(),
        ]);
    }
    let path = out.join("diagnostics.csv");
    write_csv_with_comment(stamp, &table, &path)?;
    Ok(path)
}

/// Records every stride-th state alongside the transit tracker.
struct DumpObserver {
    config: TrapConfiguration,
    tracker: TransitTracker,
    stride: u64,
    seen: u64,
    rows: Vec<[f64; 8]>,
}

impl TrajectoryObserver for DumpObserver {
    fn observe(&mut self, state: &ParticleState) -> Control {
        if self.seen % self.stride == 0 {
            let p = state.position;
            let v = state.velocity;
            self.rows.push([
                state.time,
                p.x,
                p.y,
                p.z,
                v.x,
                v.y,
                v.z,
                total_energy(state, &self.config),
            ]);
        }
        self.seen += 1;
        self.tracker.observe(state)
    }
}

fn write_trajectory(
    config: &RunConfiguration,
    stamp: &str,
    out: &Path,
) -> Result<(PathBuf, PathBuf)> {
    let w0 = config.trap.beam1.waist_w0;
    let u0 = config.trap.beam1.depth_u0;
    let trap = config.trap.with_separation(config.trajectory.separation_w0 * w0);
    let seed = derive_trajectory_seed(config.master_seed(), 0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = sample_initial_state(&mut rng, &trap, &config.sampler)?;
    let mut observer = DumpObserver {
        config: trap,
        tracker: TransitTracker::with_transit_cap(trap, config.trajectory.max_transits),
        stride: config.trajectory.stride,
        seen: 0,
        rows: Vec::new(),
    };
    propagate(sample.state, &trap, &config.integrator, &mut observer);

    let mut table = CsvTable::new(&[
        "time_s", "x_m", "y_m", "z_m", "vx_mps", "vy_mps", "vz_mps", "energy_J",
    ]);
    for row in &observer.rows {
        table.push_row(row.iter().map(|&v| CsvCell::Float(v)).collect());
    }
    let trajectory_path = out.join("trajectory.csv");
    write_csv_with_comment(stamp, &table, &trajectory_path)?;

    let mut records = CsvTable::new(&[
        "entry_beam",
        "exit_beam",
        "entry_energy_U0",
        "transferred",
        "entry_time_s",
        "exit_time_s",
    ]);
    for r in observer.tracker.records() {
        records.push_row(vec![
            r.entry_beam.as_str().into(),
            r.exit_beam.as_str().into(),
            (r.entry_energy / u0).into(),
            u64::from(r.transferred).into(),
            r.entry_time.into(),
            r.exit_time.into(),
        ]);
    }
    let transits_path = out.join("transits.csv");
    write_csv_with_comment(stamp, &records, &transits_path)?;

    Ok((trajectory_path, transits_path))
}
