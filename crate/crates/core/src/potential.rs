//! Analytic potential, gradient, and topology analysis of one or two focused
//! Gaussian beams.
//!
//! A single red-detuned beam of waist `w0` produces the attractive potential
//!
//! ```text
//! U(r) = -U0 * (w0 / w(a))^2 * exp(-2 rho^2 / w(a)^2)
//! w(a) = w0 * sqrt(1 + (a / a_R)^2),   a_R = pi w0^2 / lambda
//! ```
//!
//! where `a` is the coordinate along the beam axis measured from the focus and
//! `rho` the transverse distance from the axis. Axial divergence (the Rayleigh
//! range `a_R`) is kept even though it is weak: it is the only axial
//! confinement for particles travelling along a beam between crossings.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Propagation direction of a beam.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeamAxis {
    X,
    Y,
}

/// One focused Gaussian beam.
#[derive(Clone, Copy, Debug)]
pub struct BeamGeometry {
    pub axis: BeamAxis,
    /// 1/e^2 intensity radius at the focus, m.
    pub waist_w0: f64,
    /// Wavelength, m.
    pub wavelength: f64,
    /// z-position of the beam axis, m.
    pub vertical_offset: f64,
    /// Magnitude of the potential minimum of this beam alone, J.
    pub depth_u0: f64,
}

impl BeamGeometry {
    /// Axial distance over which the beam radius grows by sqrt(2), m.
    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist_w0 * self.waist_w0 / self.wavelength
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.waist_w0 > 0.0) || !self.waist_w0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "waist_w0",
                reason: format!("must be positive and finite, got {}", self.waist_w0),
            });
        }
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wavelength",
                reason: format!("must be positive and finite, got {}", self.wavelength),
            });
        }
        if !(self.depth_u0 > 0.0) || !self.depth_u0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "depth_u0",
                reason: format!("must be positive and finite, got {}", self.depth_u0),
            });
        }
        if !self.vertical_offset.is_finite() {
            return Err(Error::InvalidParameter {
                name: "vertical_offset",
                reason: "must be finite".into(),
            });
        }
        let a_r = self.rayleigh_range();
        if !(a_r > self.waist_w0) || !a_r.is_finite() {
            return Err(Error::InvalidParameter {
                name: "wavelength",
                reason: format!(
                    "rayleigh range {a_r} must exceed the waist {} (beam too tightly focused)",
                    self.waist_w0
                ),
            });
        }
        Ok(())
    }

    /// Axial coordinate and squared transverse distance of `r` in this beam's
    /// frame.
    #[inline]
    fn frame(&self, r: &Vector3<f64>) -> (f64, f64) {
        let dz = r.z - self.vertical_offset;
        match self.axis {
            BeamAxis::X => (r.x, r.y * r.y + dz * dz),
            BeamAxis::Y => (r.y, r.x * r.x + dz * dz),
        }
    }
}

/// Two crossed beams plus the particle mass: the complete static landscape.
#[derive(Clone, Copy, Debug)]
pub struct TrapConfiguration {
    pub beam1: BeamGeometry,
    pub beam2: BeamGeometry,
    /// Particle mass, kg.
    pub particle_mass: f64,
}

impl TrapConfiguration {
    /// Standard arrangement: beam 1 along x at z = 0, beam 2 along y offset
    /// vertically by `separation`.
    pub fn crossed(
        waist_w0: f64,
        wavelength: f64,
        depth1: f64,
        depth2: f64,
        separation: f64,
        particle_mass: f64,
    ) -> Self {
        TrapConfiguration {
            beam1: BeamGeometry {
                axis: BeamAxis::X,
                waist_w0,
                wavelength,
                vertical_offset: 0.0,
                depth_u0: depth1,
            },
            beam2: BeamGeometry {
                axis: BeamAxis::Y,
                waist_w0,
                wavelength,
                vertical_offset: separation,
                depth_u0: depth2,
            },
            particle_mass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.beam1.validate()?;
        self.beam2.validate()?;
        if self.beam1.axis == self.beam2.axis {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: "the two beams must propagate along different axes".into(),
            });
        }
        if !(self.particle_mass > 0.0) || !self.particle_mass.is_finite() {
            return Err(Error::InvalidParameter {
                name: "particle_mass",
                reason: format!("must be positive and finite, got {}", self.particle_mass),
            });
        }
        Ok(())
    }

    /// Vertical distance between the beam axes, m (signed).
    pub fn separation(&self) -> f64 {
        self.beam2.vertical_offset - self.beam1.vertical_offset
    }

    /// Same trap with the beam-2 axis moved to `separation` above beam 1.
    pub fn with_separation(&self, separation: f64) -> Self {
        let mut c = *self;
        c.beam2.vertical_offset = c.beam1.vertical_offset + separation;
        c
    }

    /// Depth of the deeper beam, J.
    pub fn max_depth(&self) -> f64 {
        self.beam1.depth_u0.max(self.beam2.depth_u0)
    }

    /// Sum of the two single-beam depths, J.
    pub fn depth_sum(&self) -> f64 {
        self.beam1.depth_u0 + self.beam2.depth_u0
    }

    /// Smaller of the two waists, m.
    pub fn min_waist(&self) -> f64 {
        self.beam1.waist_w0.min(self.beam2.waist_w0)
    }
}

/// Potential of a single beam at `r`, J. Always <= 0, -> 0 at infinity.
#[inline]
pub fn beam_potential(beam: &BeamGeometry, r: &Vector3<f64>) -> f64 {
    let (a, rho_sq) = beam.frame(r);
    let w0_sq = beam.waist_w0 * beam.waist_w0;
    let a_r = beam.rayleigh_range();
    let w_sq = w0_sq * (1.0 + (a / a_r) * (a / a_r));
    -beam.depth_u0 * (w0_sq / w_sq) * (-2.0 * rho_sq / w_sq).exp()
}

/// Exact analytic gradient of [`beam_potential`], J/m. Force = -gradient.
#[inline]
pub fn beam_gradient(beam: &BeamGeometry, r: &Vector3<f64>) -> Vector3<f64> {
    let (a, rho_sq) = beam.frame(r);
    let w0_sq = beam.waist_w0 * beam.waist_w0;
    let a_r = beam.rayleigh_range();
    let w_sq = w0_sq * (1.0 + (a / a_r) * (a / a_r));
    let gauss = (-2.0 * rho_sq / w_sq).exp();
    // dU/dt = 4 U0 w0^2 t g / w^4 for each transverse coordinate t,
    // dU/da = 2 U0 w0^4 a g (1 - 2 rho^2 / w^2) / (a_R^2 w^4).
    let common = beam.depth_u0 * w0_sq * gauss / (w_sq * w_sq);
    let axial = 2.0 * common * (w0_sq / (a_r * a_r)) * a * (1.0 - 2.0 * rho_sq / w_sq);
    let dz = r.z - beam.vertical_offset;
    match beam.axis {
        BeamAxis::X => Vector3::new(axial, 4.0 * common * r.y, 4.0 * common * dz),
        BeamAxis::Y => Vector3::new(4.0 * common * r.x, axial, 4.0 * common * dz),
    }
}

/// Combined potential of both beams, J.
#[inline]
pub fn total_potential(config: &TrapConfiguration, r: &Vector3<f64>) -> f64 {
    beam_potential(&config.beam1, r) + beam_potential(&config.beam2, r)
}

/// Gradient of the combined potential, J/m.
#[inline]
pub fn total_gradient(config: &TrapConfiguration, r: &Vector3<f64>) -> Vector3<f64> {
    beam_gradient(&config.beam1, r) + beam_gradient(&config.beam2, r)
}

/// Harmonic frequency of small transverse oscillations at the focus, Hz:
/// `(1/2pi) sqrt(4 U0 / (m w0^2))`.
pub fn radial_trap_frequency(beam: &BeamGeometry, mass: f64) -> f64 {
    (4.0 * beam.depth_u0 / (mass * beam.waist_w0 * beam.waist_w0)).sqrt() / (2.0 * PI)
}

/// Combined potential along the vertical line through the crossing center,
/// J per sample.
pub fn vertical_profile(config: &TrapConfiguration, z_samples: &[f64]) -> Vec<f64> {
    z_samples
        .iter()
        .map(|&z| total_potential(config, &Vector3::new(0.0, 0.0, z)))
        .collect()
}

/// Shape class of the vertical profile at the crossing center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyClass {
    SingleWell,
    FlatBottom,
    DoubleWell,
}

impl TopologyClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TopologyClass::SingleWell => "SingleWell",
            TopologyClass::FlatBottom => "FlatBottom",
            TopologyClass::DoubleWell => "DoubleWell",
        }
    }
}

/// Result of [`analyze_topology`].
#[derive(Clone, Debug)]
pub struct PotentialTopology {
    pub classification: TopologyClass,
    /// z-positions of the minima of the vertical profile, m, ascending.
    pub minima_z: Vec<f64>,
    /// Saddle-to-lower-minimum gap, J; 0 unless DoubleWell.
    pub barrier_height: f64,
}

/// Profile scan resolution: step = waist / SCAN_STEPS_PER_WAIST.
const SCAN_STEPS_PER_WAIST: f64 = 1000.0;
/// Extremum refinement tolerance in units of the waist.
const REFINE_TOL_WAISTS: f64 = 1e-6;
/// Below this curvature (units of depth_sum / w0^2) a lone minimum counts as
/// flat-bottomed rather than a single well.
const FLAT_CURVATURE_TOL: f64 = 1e-4;
/// Below this barrier (units of depth_sum) a double hump counts as flat.
const FLAT_BARRIER_TOL: f64 = 1e-9;
/// Two minima closer than this (units of the waist) are merged.
const MERGE_TOL_WAISTS: f64 = 1e-5;

/// Classify the vertical profile at the crossing center: dense scan over the
/// region spanned by both beam axes plus 3 w0 margin, golden-section
/// refinement of each extremum, then tolerance-based classification.
pub fn analyze_topology(config: &TrapConfiguration) -> Result<PotentialTopology> {
    config.validate()?;
    let w0 = config.min_waist();
    let u_scale = config.depth_sum();
    let profile = |z: f64| total_potential(config, &Vector3::new(0.0, 0.0, z));

    let lo = config.beam1.vertical_offset.min(config.beam2.vertical_offset) - 3.0 * w0;
    let hi = config.beam1.vertical_offset.max(config.beam2.vertical_offset) + 3.0 * w0;
    let step = w0 / SCAN_STEPS_PER_WAIST;
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let z_at = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|i| profile(z_at(i))).collect();

    let tol = REFINE_TOL_WAISTS * w0;
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 1..n - 1 {
        if values[i] < values[i - 1] && values[i] <= values[i + 1] {
            let z = golden_minimize(&profile, z_at(i - 1), z_at(i + 1), tol);
            minima.push((z, profile(z)));
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.dedup_by(|next, prev| {
        if (next.0 - prev.0).abs() < MERGE_TOL_WAISTS * w0 {
            if next.1 < prev.1 {
                *prev = *next;
            }
            true
        } else {
            false
        }
    });
    // A two-Gaussian sum has at most two minima; extra hits are scan noise.
    if minima.len() > 2 {
        minima.sort_by(|a, b| a.1.total_cmp(&b.1));
        minima.truncate(2);
        minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    match minima.len() {
        0 => Err(Error::InvalidParameter {
            name: "trap",
            reason: "vertical profile has no interior minimum".into(),
        }),
        1 => {
            let (z_min, _) = minima[0];
            // Flat bottom has vanishing curvature at the lone minimum.
            let h = 1e-3 * w0;
            let curvature = (profile(z_min + h) - 2.0 * profile(z_min) + profile(z_min - h))
                / (h * h);
            let classification = if curvature < FLAT_CURVATURE_TOL * u_scale / (w0 * w0) {
                TopologyClass::FlatBottom
            } else {
                TopologyClass::SingleWell
            };
            Ok(PotentialTopology {
                classification,
                minima_z: vec![z_min],
                barrier_height: 0.0,
            })
        }
        _ => {
            let (z1, u1) = minima[0];
            let (z2, u2) = minima[1];
            let neg = |z: f64| -profile(z);
            let z_saddle = golden_minimize(&neg, z1, z2, tol);
            let barrier = profile(z_saddle) - u1.min(u2);
            if (z2 - z1).abs() < MERGE_TOL_WAISTS * w0 || barrier < FLAT_BARRIER_TOL * u_scale {
                Ok(PotentialTopology {
                    classification: TopologyClass::FlatBottom,
                    minima_z: vec![z1, z2],
                    barrier_height: 0.0,
                })
            } else {
                Ok(PotentialTopology {
                    classification: TopologyClass::DoubleWell,
                    minima_z: vec![z1, z2],
                    barrier_height: barrier,
                })
            }
        }
    }
}

/// Absolute energy of the barrier top (the saddle of the vertical profile),
/// J. `None` unless the topology is a double well.
pub fn barrier_top_energy(config: &TrapConfiguration, topology: &PotentialTopology) -> Option<f64> {
    if topology.classification != TopologyClass::DoubleWell {
        return None;
    }
    let lower = topology
        .minima_z
        .iter()
        .map(|&z| total_potential(config, &Vector3::new(0.0, 0.0, z)))
        .fold(f64::INFINITY, f64::min);
    Some(lower + topology.barrier_height)
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
fn golden_minimize(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{PLANCK, RB87_MASS_KG};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) const WAIST: f64 = 7.5e-6;
    pub(crate) const WAVELENGTH: f64 = 810.0e-9;
    pub(crate) const DEPTH_150MHZ: f64 = PLANCK * 150.0e6;
    pub(crate) const DEPTH_86MHZ: f64 = PLANCK * 86.0e6;

    pub(crate) fn equal_trap(separation_w0: f64) -> TrapConfiguration {
        TrapConfiguration::crossed(
            WAIST,
            WAVELENGTH,
            DEPTH_150MHZ,
            DEPTH_150MHZ,
            separation_w0 * WAIST,
            RB87_MASS_KG,
        )
    }

    fn beam1() -> BeamGeometry {
        equal_trap(0.0).beam1
    }

    /// Central finite difference of a scalar field, the independent oracle
    /// for every analytic gradient in this module.
    pub(crate) fn finite_difference(
        f: &dyn Fn(&Vector3<f64>) -> f64,
        r: &Vector3<f64>,
        h: f64,
    ) -> Vector3<f64> {
        let mut g = Vector3::zeros();
        for k in 0..3 {
            let mut plus = *r;
            let mut minus = *r;
            plus[k] += h;
            minus[k] -= h;
            g[k] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
        g
    }

    #[test]
    fn potential_at_focus_is_minus_depth() {
        let b = beam1();
        let u = beam_potential(&b, &Vector3::zeros());
        assert_relative_eq!(u, -DEPTH_150MHZ, max_relative = 1e-15);
    }

    #[test]
    fn potential_at_one_waist_radially() {
        let b = beam1();
        let u = beam_potential(&b, &Vector3::new(0.0, WAIST, 0.0));
        assert_relative_eq!(u, -DEPTH_150MHZ * (-2.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn potential_at_rayleigh_range_on_axis() {
        let b = beam1();
        let u = beam_potential(&b, &Vector3::new(b.rayleigh_range(), 0.0, 0.0));
        assert_relative_eq!(u, -DEPTH_150MHZ / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_focus() {
        let g = beam_gradient(&beam1(), &Vector3::zeros());
        assert_eq!(g, Vector3::zeros());
    }

    #[test]
    fn gradient_harmonic_near_focus() {
        let b = beam1();
        let y = WAIST / 1000.0;
        let g = beam_gradient(&b, &Vector3::new(0.0, y, 0.0));
        let harmonic = 4.0 * DEPTH_150MHZ / (WAIST * WAIST) * y;
        assert_relative_eq!(g.y, harmonic, max_relative = 1e-5);
        assert_eq!(g.x, 0.0);
        assert_eq!(g.z, 0.0);
    }

    #[test]
    fn beam_gradient_matches_finite_difference() {
        let b = beam1();
        let f = |r: &Vector3<f64>| beam_potential(&b, r);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let r = Vector3::new(
                rng.random_range(-5.0..5.0) * WAIST,
                rng.random_range(-5.0..5.0) * WAIST,
                rng.random_range(-5.0..5.0) * WAIST,
            );
            let analytic = beam_gradient(&b, &r);
            let numeric = finite_difference(&f, &r, 1e-4 * WAIST);
            let scale = analytic.norm().max(1e-12 * DEPTH_150MHZ / WAIST);
            assert!(
                (analytic - numeric).norm() < 1e-6 * scale,
                "gradient mismatch at {r:?}: {analytic:?} vs {numeric:?}"
            );
        }
    }

    #[test]
    fn total_gradient_matches_finite_difference() {
        let config = equal_trap(1.0);
        let f = |r: &Vector3<f64>| total_potential(&config, r);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let r = Vector3::new(
                rng.random_range(-5.0..5.0) * WAIST,
                rng.random_range(-5.0..5.0) * WAIST,
                rng.random_range(-5.0..5.0) * WAIST,
            );
            let analytic = total_gradient(&config, &r);
            let numeric = finite_difference(&f, &r, 1e-4 * WAIST);
            let scale = analytic.norm().max(1e-12 * DEPTH_150MHZ / WAIST);
            assert!((analytic - numeric).norm() < 1e-6 * scale);
        }
    }

    #[test]
    fn total_potential_superposes_at_zero_separation() {
        let config = equal_trap(0.0);
        let u = total_potential(&config, &Vector3::zeros());
        assert_relative_eq!(u, -2.0 * DEPTH_150MHZ, max_relative = 1e-15);
    }

    #[test]
    fn total_potential_decays_far_away() {
        let config = equal_trap(1.0);
        let far = 20.0 * config.beam1.rayleigh_range();
        let u = total_potential(&config, &Vector3::new(far, far, far));
        assert!(u.abs() < 1e-6 * DEPTH_150MHZ);
    }

    #[test]
    fn total_potential_midpoint_at_one_waist_separation() {
        let config = equal_trap(1.0);
        let u = total_potential(&config, &Vector3::new(0.0, 0.0, WAIST / 2.0));
        assert_relative_eq!(
            u,
            -2.0 * DEPTH_150MHZ * (-0.5f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn total_gradient_zero_at_origin_for_overlapping_beams() {
        let config = equal_trap(0.0);
        assert_eq!(total_gradient(&config, &Vector3::zeros()), Vector3::zeros());
    }

    #[test]
    fn total_gradient_midpoint_is_vertical() {
        let config = equal_trap(1.0);
        let g = total_gradient(&config, &Vector3::new(0.0, 0.0, WAIST / 2.0));
        assert_eq!(g.x, 0.0);
        assert_eq!(g.y, 0.0);
    }

    #[test]
    fn potential_bounded_and_nonpositive() {
        let config = equal_trap(1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let r = Vector3::new(
                rng.random_range(-40.0..40.0) * WAIST,
                rng.random_range(-40.0..40.0) * WAIST,
                rng.random_range(-40.0..40.0) * WAIST,
            );
            let u = total_potential(&config, &r);
            assert!(u <= 0.0);
            assert!(u >= -config.depth_sum());
        }
    }

    #[test]
    fn beam_potential_rotation_invariant_about_axis() {
        let b = beam1();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let a = rng.random_range(-3.0..3.0) * WAIST;
            let rho = rng.random_range(0.0..4.0) * WAIST;
            let theta1: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let theta2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r1 = Vector3::new(a, rho * theta1.cos(), rho * theta1.sin());
            let r2 = Vector3::new(a, rho * theta2.cos(), rho * theta2.sin());
            assert_relative_eq!(
                beam_potential(&b, &r1),
                beam_potential(&b, &r2),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn total_potential_mirror_symmetry_for_equal_depths() {
        let d = 1.3 * WAIST;
        let config = equal_trap(1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..200 {
            let r = Vector3::new(
                rng.random_range(-4.0..4.0) * WAIST,
                rng.random_range(-4.0..4.0) * WAIST,
                rng.random_range(-4.0..4.0) * WAIST,
            );
            let mirrored = Vector3::new(r.y, r.x, d - r.z);
            assert_relative_eq!(
                total_potential(&config, &r),
                total_potential(&config, &mirrored),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn radial_frequency_for_default_beam() {
        // (1/2pi) sqrt(4 U0 / (m w0^2)) with U0 = h * 150 MHz, w0 = 7.5 um,
        // m = Rb-87 evaluates to ~35.2 kHz.
        let f = radial_trap_frequency(&beam1(), RB87_MASS_KG);
        assert_relative_eq!(f, 35.22e3, max_relative = 1e-2);
    }

    #[test]
    fn radial_frequency_depth_ratio() {
        let mut shallow = beam1();
        shallow.depth_u0 = DEPTH_86MHZ;
        let ratio = radial_trap_frequency(&shallow, RB87_MASS_KG)
            / radial_trap_frequency(&beam1(), RB87_MASS_KG);
        assert_relative_eq!(ratio, (86.0f64 / 150.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(ratio, 0.757, max_relative = 1e-3);
    }

    #[test]
    fn radial_frequency_scales_as_sqrt_depth() {
        let mut doubled = beam1();
        doubled.depth_u0 = 2.0 * DEPTH_150MHZ;
        let ratio = radial_trap_frequency(&doubled, RB87_MASS_KG)
            / radial_trap_frequency(&beam1(), RB87_MASS_KG);
        assert_relative_eq!(ratio, 2.0f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn vertical_profile_matches_two_gaussian_sum() {
        // On the crossing line x = y = 0 the profile reduces to
        // -U0 (exp(-2 z^2/w0^2) + exp(-2 (z-d)^2/w0^2)).
        let d = 1.5 * WAIST;
        let config = equal_trap(1.5);
        let zs: Vec<f64> = (-300..=450).map(|i| i as f64 * 0.01 * WAIST).collect();
        let profile = vertical_profile(&config, &zs);
        for (&z, &u) in zs.iter().zip(&profile) {
            let expected = -DEPTH_150MHZ
                * ((-2.0 * z * z / (WAIST * WAIST)).exp()
                    + (-2.0 * (z - d) * (z - d) / (WAIST * WAIST)).exp());
            assert_relative_eq!(u, expected, max_relative = 1e-12, epsilon = 1e-40);
        }
    }

    #[test]
    fn vertical_profile_symmetric_at_zero_separation() {
        let config = equal_trap(0.0);
        let zs: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.01 * WAIST).collect();
        let profile = vertical_profile(&config, &zs);
        let n = zs.len();
        for i in 0..n {
            assert_relative_eq!(profile[i], profile[n - 1 - i], max_relative = 1e-12);
        }
        let min = profile.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(min, -2.0 * DEPTH_150MHZ, max_relative = 1e-10);
    }

    /// 1-D scan oracle over the exact two-Gaussian sum, independent of
    /// `analyze_topology`'s refinement machinery.
    fn scan_oracle_minima(d_w0: f64) -> usize {
        let u = |z: f64| -((-2.0 * z * z).exp() + (-2.0 * (z - d_w0) * (z - d_w0)).exp());
        let n = 60_000;
        let lo = -3.0;
        let hi = d_w0 + 3.0;
        let z = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let vals: Vec<f64> = (0..n).map(|i| u(z(i))).collect();
        (1..n - 1)
            .filter(|&i| vals[i] < vals[i - 1] && vals[i] <= vals[i + 1])
            .count()
    }

    #[test]
    fn topology_single_well_below_one_waist() {
        assert_eq!(scan_oracle_minima(0.5), 1);
        let topo = analyze_topology(&equal_trap(0.5)).unwrap();
        assert_eq!(topo.classification, TopologyClass::SingleWell);
        assert_eq!(topo.minima_z.len(), 1);
        assert_eq!(topo.barrier_height, 0.0);
    }

    #[test]
    fn topology_flat_bottom_at_one_waist() {
        let topo = analyze_topology(&equal_trap(1.0)).unwrap();
        assert_eq!(topo.classification, TopologyClass::FlatBottom);
        assert_eq!(topo.barrier_height, 0.0);
    }

    #[test]
    fn topology_double_well_above_one_waist() {
        assert_eq!(scan_oracle_minima(1.5), 2);
        let topo = analyze_topology(&equal_trap(1.5)).unwrap();
        assert_eq!(topo.classification, TopologyClass::DoubleWell);
        assert_eq!(topo.minima_z.len(), 2);
        assert!(topo.barrier_height > 0.0);
    }

    #[test]
    fn topology_transition_window() {
        let below = analyze_topology(&equal_trap(0.95)).unwrap();
        assert_eq!(below.classification, TopologyClass::SingleWell);
        let above = analyze_topology(&equal_trap(1.05)).unwrap();
        assert_eq!(above.classification, TopologyClass::DoubleWell);
    }

    #[test]
    fn topology_barrier_monotone_in_separation() {
        let mut last = 0.0;
        for i in 0..=10 {
            let d = 1.1 + 1.9 * i as f64 / 10.0;
            let topo = analyze_topology(&equal_trap(d)).unwrap();
            assert_eq!(topo.classification, TopologyClass::DoubleWell, "d = {d} w0");
            assert!(
                topo.barrier_height > last,
                "barrier not increasing at d = {d} w0"
            );
            last = topo.barrier_height;
        }
    }

    #[test]
    fn topology_unequal_depths_classified_by_minima_count() {
        let config = TrapConfiguration::crossed(
            WAIST,
            WAVELENGTH,
            DEPTH_150MHZ,
            DEPTH_86MHZ,
            2.0 * WAIST,
            RB87_MASS_KG,
        );
        let topo = analyze_topology(&config).unwrap();
        assert_eq!(topo.classification, TopologyClass::DoubleWell);
        let top = barrier_top_energy(&config, &topo).unwrap();
        // Barrier is measured from the lower (deeper) minimum.
        let lower = topo
            .minima_z
            .iter()
            .map(|&z| total_potential(&config, &Vector3::new(0.0, 0.0, z)))
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(top, lower + topo.barrier_height, max_relative = 1e-12);
    }

    #[test]
    fn topology_rejects_degenerate_trap() {
        let mut config = equal_trap(1.0);
        config.beam1.depth_u0 = 0.0;
        config.beam2.depth_u0 = 0.0;
        assert!(analyze_topology(&config).is_err());
    }

    #[test]
    fn harmonic_limit_of_transverse_profile() {
        let b = beam1();
        let h = 1e-3 * WAIST;
        let f = |y: f64| beam_potential(&b, &Vector3::new(0.0, y, 0.0));
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        assert_relative_eq!(
            second,
            4.0 * DEPTH_150MHZ / (WAIST * WAIST),
            max_relative = 1e-4
        );
    }
}
