//! Arc-length parameterised nanotube centre-lines around the fiber.
//!
//! Straight tubes touch the cylinder of radius `R_n` at `s = 0`, azimuth 0,
//! i.e. at `(R_n, 0, 0)`. In that tangent plane the direction is rotated by
//! the angle from the fiber axis toward `+y` (the local azimuthal direction).
//! Helices keep radius `R_n` and wind toward `+phi` for positive winding.

use crate::error::{invalid, Error, Result};
use crate::fiber::{mode_profile, FiberSpec, GuidedMode};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest accepted surface-to-centre-line clearance, nm.
pub const MIN_GAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Fiber surface to tube centre-line, nm.
    pub gap: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { gap: 1.25 }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap >= MIN_GAP && self.gap.is_finite()) {
            return Err(invalid("geometry.gap", format!("must be >= {MIN_GAP} nm, got {}", self.gap)));
        }
        Ok(())
    }

    /// `R_n = R + gap`, nm.
    pub fn center_radius(&self, spec: &FiberSpec) -> f64 {
        spec.radius + self.gap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PathKind {
    /// Angle from the fiber axis, radians.
    Straight { angle: f64 },
    /// Loops per nm along the fiber axis.
    Helix { winding: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    /// nm
    pub position: [f64; 3],
    pub tangent: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NanotubePath {
    length: f64,
    center_radius: f64,
    kind: PathKind,
    // direction for straight paths, (sin, cos) of the helix angle otherwise
    dir: [f64; 3],
}

fn check_length(length: f64) -> Result<()> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid("length", format!("must be positive, got {length}")));
    }
    Ok(())
}

impl NanotubePath {
    pub fn straight(spec: &FiberSpec, geo: &GeometryConfig, angle: f64, length: f64) -> Result<Self> {
        geo.validate()?;
        Self::straight_at(geo.center_radius(spec), angle, length)
    }

    /// Straight tube whose closest approach to the fiber axis is `distance` nm.
    pub fn straight_at(distance: f64, angle: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        if !angle.is_finite() {
            return Err(invalid("angle", "must be finite"));
        }
        Ok(Self {
            length,
            center_radius: distance,
            kind: PathKind::Straight { angle },
            dir: [0.0, angle.sin(), angle.cos()],
        })
    }

    pub fn helix(spec: &FiberSpec, geo: &GeometryConfig, winding: f64, length: f64) -> Result<Self> {
        geo.validate()?;
        check_length(length)?;
        if !winding.is_finite() {
            return Err(invalid("winding", "must be finite"));
        }
        let rn = geo.center_radius(spec);
        let angle = (2.0 * PI * winding * rn).atan();
        Ok(Self {
            length,
            center_radius: rn,
            kind: PathKind::Helix { winding },
            dir: [0.0, angle.sin(), angle.cos()],
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// Distance of closest approach (straight) or constant radius (helix), nm.
    pub fn center_radius(&self) -> f64 {
        self.center_radius
    }

    /// Angle between the tube and the fiber axis at `s = 0`.
    pub fn axis_angle(&self) -> f64 {
        self.dir[1].atan2(self.dir[2])
    }

    /// Extent of the path along the fiber axis, nm.
    pub fn z_extent(&self) -> f64 {
        self.length * self.dir[2].abs()
    }

    pub fn s_range(&self) -> (f64, f64) {
        (-0.5 * self.length, 0.5 * self.length)
    }

    pub fn sample(&self, s: f64) -> PathSample {
        let rn = self.center_radius;
        let [_, sin_a, cos_a] = self.dir;
        match self.kind {
            PathKind::Straight { .. } => PathSample {
                position: [rn, s * sin_a, s * cos_a],
                tangent: self.dir,
            },
            PathKind::Helix { .. } => {
                let psi = s * sin_a / rn;
                let (sp, cp) = psi.sin_cos();
                PathSample {
                    position: [rn * cp, rn * sp, s * cos_a],
                    tangent: [-sp * sin_a, cp * sin_a, cos_a],
                }
            }
        }
    }
}

/// Winding that aligns a helix at radius `center_radius` with the local mode
/// polarisation, loops per nm.
pub fn optimal_winding(mode: &GuidedMode, spec: &FiberSpec, center_radius: f64) -> Result<f64> {
    if center_radius <= spec.radius {
        return Err(invalid("center_radius", format!("must exceed the fiber radius {}", spec.radius)));
    }
    let e = mode_profile(mode, spec, center_radius);
    if e[2].norm() < 1e-300 {
        return Err(Error::ZeroAxialField { r_nm: center_radius });
    }
    Ok((e[1] / e[2]).re / (2.0 * PI * center_radius))
}
