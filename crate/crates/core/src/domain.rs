//! Geometry of the periodicity cell and the scaled hole.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("domain: ell must be positive (got {0})")]
    NonPositiveEll(f64),
    #[error("domain: depth profile must be positive everywhere (minimum {0})")]
    NonPositiveDepth(f64),
    #[error("domain: scaled hole does not fit strictly inside the cell ({0})")]
    HoleTooLarge(String),
    #[error("domain: invalid hole parameter `{name}` = {value}")]
    InvalidHole { name: &'static str, value: f64 },
    #[error("domain: invalid depth table ({0})")]
    InvalidDepthTable(String),
    #[error("domain: {0} must be positive (got {1})")]
    NonPositivePhysical(&'static str, f64),
    #[error("domain: segment holes are analytic-only and cannot be meshed")]
    SegmentNotMeshable,
    #[error("domain: at least 3 boundary points are required (got {0})")]
    TooFewBoundaryPoints(usize),
}

/// Depth profile `H(y)`.
///
/// Only the constant profile has closed-form references; tabulated profiles
/// are accepted by the finite element path ("numeric-only mode").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DepthProfile {
    Constant(f64),
    /// Piecewise linear in the transverse coordinate `y₂`, constant
    /// extension outside the table.
    Transverse { y: Vec<f64>, h: Vec<f64> },
}

impl DepthProfile {
    pub fn eval(&self, point: [f64; 2]) -> f64 {
        match self {
            DepthProfile::Constant(h) => *h,
            DepthProfile::Transverse { y, h } => {
                let t = point[1];
                if t <= y[0] {
                    return h[0];
                }
                let last = y.len() - 1;
                if t >= y[last] {
                    return h[last];
                }
                let i = y.partition_point(|&v| v <= t) - 1;
                let s = (t - y[i]) / (y[i + 1] - y[i]);
                h[i] + s * (h[i + 1] - h[i])
            }
        }
    }

    /// Lower bound `H₀` of the profile; exact for piecewise linear tables.
    pub fn minimum(&self) -> f64 {
        match self {
            DepthProfile::Constant(h) => *h,
            DepthProfile::Transverse { h, .. } => h.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DepthProfile::Constant(_))
    }
}

/// Reference hole `θ¹` before scaling by `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HoleShape {
    Disk { radius: f64 },
    /// Semi-axes `a` (along the rotated `ζ₁` axis) and `b`, rotation in radians.
    Ellipse { a: f64, b: f64, rotation: f64 },
    /// Horizontal crack `{ζ₂ = 0, |ζ₁| < L}`; analytic-only.
    Segment { half_length: f64 },
}

impl HoleShape {
    /// Area `|θ¹|`.
    pub fn area(&self) -> f64 {
        match *self {
            HoleShape::Disk { radius } => PI * radius * radius,
            HoleShape::Ellipse { a, b, .. } => PI * a * b,
            HoleShape::Segment { .. } => 0.0,
        }
    }

    /// Diameter of `θ¹`.
    pub fn diameter(&self) -> f64 {
        match *self {
            HoleShape::Disk { radius } => 2.0 * radius,
            HoleShape::Ellipse { a, b, .. } => 2.0 * a.max(b),
            HoleShape::Segment { half_length } => 2.0 * half_length,
        }
    }

    /// Perimeter of `θ¹` (Ramanujan's second approximation for ellipses).
    pub fn perimeter(&self) -> f64 {
        match *self {
            HoleShape::Disk { radius } => 2.0 * PI * radius,
            HoleShape::Ellipse { a, b, .. } => {
                let h = ((a - b) / (a + b)).powi(2);
                PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()))
            }
            HoleShape::Segment { half_length } => 4.0 * half_length,
        }
    }

    /// Half-extents of the axis-aligned bounding box of `θ¹`.
    pub fn half_extents(&self) -> [f64; 2] {
        match *self {
            HoleShape::Disk { radius } => [radius, radius],
            HoleShape::Ellipse { a, b, rotation } => {
                let (s, c) = rotation.sin_cos();
                [
                    ((a * c).powi(2) + (b * s).powi(2)).sqrt(),
                    ((a * s).powi(2) + (b * c).powi(2)).sqrt(),
                ]
            }
            HoleShape::Segment { half_length } => [half_length, 0.0],
        }
    }

    pub fn is_meshable(&self) -> bool {
        !matches!(self, HoleShape::Segment { .. })
    }

    /// Implicit equation of `∂θ¹` evaluated at `ζ`; zero on the boundary.
    pub fn implicit(&self, z: [f64; 2]) -> f64 {
        match *self {
            HoleShape::Disk { radius } => (z[0] * z[0] + z[1] * z[1]) / (radius * radius) - 1.0,
            HoleShape::Ellipse { a, b, rotation } => {
                let (s, c) = rotation.sin_cos();
                let u = c * z[0] + s * z[1];
                let v = -s * z[0] + c * z[1];
                (u / a).powi(2) + (v / b).powi(2) - 1.0
            }
            HoleShape::Segment { half_length } => {
                if z[0].abs() <= half_length {
                    z[1].abs()
                } else {
                    f64::hypot(z[0].abs() - half_length, z[1])
                }
            }
        }
    }

    /// Point of `∂θ¹` at parameter `t ∈ [0, 2π)`, counterclockwise.
    pub fn boundary_point(&self, t: f64) -> [f64; 2] {
        let (st, ct) = t.sin_cos();
        match *self {
            HoleShape::Disk { radius } => [radius * ct, radius * st],
            HoleShape::Ellipse { a, b, rotation } => {
                let (s, c) = rotation.sin_cos();
                let (u, v) = (a * ct, b * st);
                [c * u - s * v, s * u + c * v]
            }
            HoleShape::Segment { half_length } => [half_length * ct, 0.0],
        }
    }

    fn check(&self) -> Result<(), DomainError> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(DomainError::InvalidHole { name, value })
            }
        };
        match *self {
            HoleShape::Disk { radius } => positive("radius", radius),
            HoleShape::Ellipse { a, b, rotation } => {
                positive("a", a)?;
                positive("b", b)?;
                if rotation.is_finite() {
                    Ok(())
                } else {
                    Err(DomainError::InvalidHole { name: "rotation", value: rotation })
                }
            }
            HoleShape::Segment { half_length } => positive("half_length", half_length),
        }
    }
}

/// The scaled hole `θ^ε = center + ε θ¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSpec {
    pub shape: HoleShape,
    pub eps: f64,
    pub center: [f64; 2],
}

impl HoleSpec {
    pub fn centered(shape: HoleShape, eps: f64) -> Self {
        Self { shape, eps, center: [0.0, 0.0] }
    }

    /// `ε² |θ¹|`.
    pub fn area(&self) -> f64 {
        hole_area(self)
    }

    pub fn half_extents(&self) -> [f64; 2] {
        let [hx, hy] = self.shape.half_extents();
        [self.eps * hx, self.eps * hy]
    }

    /// Implicit equation of `∂θ^ε` in cell coordinates.
    pub fn implicit(&self, y: [f64; 2]) -> f64 {
        self.shape
            .implicit([(y[0] - self.center[0]) / self.eps, (y[1] - self.center[1]) / self.eps])
    }
}

/// Periodicity cell, depth profile, hole and physical constants used by the lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub ell: f64,
    pub depth: DepthProfile,
    pub hole: Option<HoleSpec>,
    pub h_layer: f64,
    pub gravity: f64,
}

impl DomainSpec {
    /// Constant depth `H ≡ 1`, no hole, `h = 0.01`, `g = 9.81`.
    pub fn rectangle(ell: f64) -> Self {
        Self { ell, depth: DepthProfile::Constant(1.0), hole: None, h_layer: 0.01, gravity: 9.81 }
    }

    pub fn with_hole(mut self, hole: HoleSpec) -> Self {
        self.hole = Some(hole);
        self
    }

    /// Area of `ω`, i.e. `2ℓ`.
    pub fn cell_area(&self) -> f64 {
        2.0 * self.ell
    }
}

/// Checks every invariant of `spec` and returns it unchanged.
///
/// The hole must fit strictly inside `ω`: its scaled bounding box may not
/// touch `∂ω`. Mesh-cell clearance is enforced later by the mesher.
pub fn validate_domain(spec: DomainSpec) -> Result<DomainSpec, DomainError> {
    if !(spec.ell > 0.0 && spec.ell.is_finite()) {
        return Err(DomainError::NonPositiveEll(spec.ell));
    }
    if let DepthProfile::Transverse { y, h } = &spec.depth {
        if y.is_empty() || y.len() != h.len() {
            return Err(DomainError::InvalidDepthTable(format!(
                "{} abscissae for {} values",
                y.len(),
                h.len()
            )));
        }
        if y.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DomainError::InvalidDepthTable("abscissae must increase".into()));
        }
    }
    let h0 = spec.depth.minimum();
    if !(h0 > 0.0) {
        return Err(DomainError::NonPositiveDepth(h0));
    }
    if !(spec.h_layer > 0.0) {
        return Err(DomainError::NonPositivePhysical("h_layer", spec.h_layer));
    }
    if !(spec.gravity > 0.0) {
        return Err(DomainError::NonPositivePhysical("gravity", spec.gravity));
    }
    if let Some(hole) = &spec.hole {
        hole.shape.check()?;
        if !(hole.eps > 0.0 && hole.eps.is_finite()) {
            return Err(DomainError::InvalidHole { name: "eps", value: hole.eps });
        }
        let [hx, hy] = hole.half_extents();
        let x_reach = hole.center[0].abs() + hx;
        let y_reach = hole.center[1].abs() + hy;
        if x_reach >= 0.5 {
            return Err(DomainError::HoleTooLarge(format!("reaches |y1| = {x_reach} >= 1/2")));
        }
        if y_reach >= spec.ell {
            return Err(DomainError::HoleTooLarge(format!(
                "reaches |y2| = {y_reach} >= ell = {}",
                spec.ell
            )));
        }
    }
    Ok(spec)
}

/// `|θ^ε| = ε² |θ¹|`; zero for cracks.
pub fn hole_area(hole: &HoleSpec) -> f64 {
    hole.eps * hole.eps * hole.shape.area()
}

/// `n` points on `∂θ^ε`, counterclockwise, equally spaced in the
/// parametric angle.
pub fn sample_hole_boundary(hole: &HoleSpec, n: usize) -> Result<Vec<[f64; 2]>, DomainError> {
    if !hole.shape.is_meshable() {
        return Err(DomainError::SegmentNotMeshable);
    }
    if n < 3 {
        return Err(DomainError::TooFewBoundaryPoints(n));
    }
    Ok((0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let [u, v] = hole.shape.boundary_point(t);
            [hole.center[0] + hole.eps * u, hole.center[1] + hole.eps * v]
        })
        .collect())
}
