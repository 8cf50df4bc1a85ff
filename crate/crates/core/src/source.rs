//! Laser heating: Gaussian beam spreading with focal distance, exponential
//! absorption with depth, and the on/off exposure schedule.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point3};
use crate::par::Execution;

/// CO₂ surgical laser line, cm.
pub const CO2_WAVELENGTH_CM: f64 = 10.6e-4;

/// Tolerance when testing schedule boundaries, s. Keeps `n·Δt` round-off
/// from toggling the laser one step early or late.
const SCHEDULE_EPS: f64 = 1e-9;

/// Radial normalization of the beam profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GaussianNormalization {
    /// `2P/(π w) · exp(-(2/w) r² - μ_a z)`, with `w` unsquared.
    #[default]
    Linear,
    /// `2P/(π w²) · exp(-2 r²/w² - μ_a z)`.
    Standard,
}

/// Closed `[on, off]` exposure intervals in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule(Vec<(f64, f64)>);

impl Schedule {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_off = f64::NEG_INFINITY;
        for (i, &(on, off)) in intervals.iter().enumerate() {
            if !(on.is_finite() && off.is_finite() && on >= 0.0 && off > on) {
                return Err(Error::validation(
                    format!("laser.schedule[{i}]"),
                    format!("interval ({on}, {off}) must satisfy 0 <= on < off"),
                ));
            }
            if on < prev_off {
                return Err(Error::validation(
                    format!("laser.schedule[{i}]"),
                    "intervals must be ordered and non-overlapping",
                ));
            }
            prev_off = off;
        }
        Ok(Schedule(intervals))
    }

    pub fn always_on() -> Self {
        Schedule(vec![(0.0, f64::MAX)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn is_on(&self, t: f64) -> bool {
        self.0
            .iter()
            .any(|&(on, off)| t >= on - SCHEDULE_EPS && t <= off + SCHEDULE_EPS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaserParams {
    /// Power, W.
    pub power: f64,
    /// Wavelength, cm.
    pub wavelength: f64,
    /// Beam waist, cm.
    pub waist: f64,
    /// Distance from focal point to tissue surface, cm.
    pub focal_distance: f64,
    /// Beam axis position on the surface, cm.
    pub center: [f64; 2],
    pub schedule: Schedule,
    pub normalization: GaussianNormalization,
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("laser.power", self.power >= 0.0 && self.power.is_finite()),
            ("laser.wavelength", self.wavelength > 0.0 && self.wavelength.is_finite()),
            ("laser.waist", self.waist > 0.0 && self.waist.is_finite()),
            (
                "laser.focal_distance",
                self.focal_distance >= 0.0 && self.focal_distance.is_finite(),
            ),
            ("laser.center", self.center.iter().all(|c| c.is_finite())),
        ];
        for (field, ok) in checks {
            if !ok {
                return Err(Error::validation(field, "out of range"));
            }
        }
        Ok(())
    }
}

/// Beam radius at depth `z` below the surface.
pub fn beam_width(z: f64, laser: &LaserParams) -> f64 {
    let w0 = laser.waist;
    let r = laser.wavelength * (laser.focal_distance + z) / (PI * w0 * w0);
    w0 * (1.0 + r * r).sqrt()
}

/// Beam intensity (W/cm²) at `(x, y, z)` in the beam frame: `x, y` relative
/// to the axis, `z` depth into the tissue.
pub fn intensity(p: Point3, laser: &LaserParams, mu_a: f64) -> f64 {
    if laser.power == 0.0 {
        return 0.0;
    }
    let [x, y, z] = p;
    let w = beam_width(z, laser);
    let r2 = x * x + y * y;
    match laser.normalization {
        GaussianNormalization::Linear => {
            2.0 * laser.power / (PI * w) * (-2.0 / w * r2 - mu_a * z).exp()
        }
        GaussianNormalization::Standard => {
            2.0 * laser.power / (PI * w * w) * (-2.0 * r2 / (w * w) - mu_a * z).exp()
        }
    }
}

/// Absorbed power density, W/cm³.
pub fn volumetric_heating(p: Point3, laser: &LaserParams, mu_a: f64) -> f64 {
    mu_a * intensity(p, laser, mu_a)
}

/// Beam-frame coordinates of a mesh node.
pub fn beam_frame(mesh: &Mesh, p: Point3, laser: &LaserParams) -> Point3 {
    [
        p[0] - laser.center[0],
        p[1] - laser.center[1],
        p[2] - mesh.origin()[2],
    ]
}

pub fn nodal_source(mesh: &Mesh, laser: &LaserParams, mu_a: f64, t: f64) -> Vec<f64> {
    nodal_source_with(mesh, laser, mu_a, t, Execution::default())
}

/// Heating sampled at every node; all zero while the laser is off.
pub fn nodal_source_with(
    mesh: &Mesh,
    laser: &LaserParams,
    mu_a: f64,
    t: f64,
    exec: Execution,
) -> Vec<f64> {
    if !laser.schedule.is_on(t) {
        return vec![0.0; mesh.node_count()];
    }
    let nodes = mesh.nodes();
    exec.map(nodes.len(), |i| {
        volumetric_heating(beam_frame(mesh, nodes[i], laser), laser, mu_a)
    })
}
