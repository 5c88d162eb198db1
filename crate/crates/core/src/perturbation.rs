//! Two-by-two correction system at the `(0, 4π²)` knot and the gap law.
//!
//! Near the knot the eigenvalues behave like `4π² + ε²μ′(ψ) + O(ε³)` with
//! `η = ε²ψ`, where `μ′` are the eigenvalues of
//!
//! ```text
//! (𝒫₊ − 8πℓψ) A + 𝒫₋ B = −2ℓ μ′ A
//! 𝒫₋ A + (𝒫₊ + 8πℓψ) B = −2ℓ μ′ B
//! ```
//!
//! i.e. `μ′_± = −(𝒫₊ ± √(𝒫₋² + 64π²ℓ²ψ²)) / 2ℓ`. The closed form sometimes
//! quoted with `𝒫_±` under the root contradicts both this system and the
//! gap width `ε²|𝒫₋|/ℓ`; the system is taken as normative.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dispersion::{principal_knot, Knot};
use crate::domain::DomainError;
use crate::polarization::PolarizationMatrix;

/// `𝒫_± = 4π²(|θ¹| ± P₁₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptP {
    pub p_plus: f64,
    pub p_minus: f64,
}

/// Above this `ε` the leading-order law is not expected to be accurate.
pub const EPS_WARN: f64 = 0.3;

/// Relative tolerance under which `𝒫₋` counts as zero.
pub const P_MINUS_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPrediction {
    pub center: f64,
    pub width: f64,
    pub eps: f64,
    pub ell: f64,
    pub script_p: ScriptP,
    pub knot: Knot,
    /// `(ψ, μ′₊, μ′₋)` samples.
    pub correction_curves: Vec<(f64, f64, f64)>,
    /// Leading order cannot decide whether a gap opens (`𝒫₋ = 0`).
    pub undecided: bool,
}

pub fn script_p(p: &PolarizationMatrix) -> ScriptP {
    let c = 4.0 * PI * PI;
    ScriptP { p_plus: c * (p.area + p.p[0][0]), p_minus: c * (p.area - p.p[0][0]) }
}

impl ScriptP {
    pub fn p_minus_is_zero(&self) -> bool {
        self.p_minus.abs() <= P_MINUS_ZERO_TOL * self.p_plus.abs().max(1.0)
    }
}

/// The 2×2 symmetric matrix whose eigenvalues are `−2ℓμ′`.
pub fn correction_matrix(sp: ScriptP, ell: f64, psi: f64) -> [[f64; 2]; 2] {
    let s = 8.0 * PI * ell * psi;
    [[sp.p_plus - s, sp.p_minus], [sp.p_minus, sp.p_plus + s]]
}

/// `(μ′₊, μ′₋)` with `μ′₊ ≤ μ′₋`.
pub fn correction_eigen(sp: ScriptP, ell: f64, psi: f64) -> (f64, f64) {
    let root = f64::hypot(sp.p_minus, 8.0 * PI * ell * psi);
    let scale = -0.5 / ell;
    (scale * (sp.p_plus + root), scale * (sp.p_plus - root))
}

/// Unit eigenvectors `(A, B)` belonging to `(μ′₊, μ′₋)`; defined up to sign.
pub fn correction_eigenvectors(sp: ScriptP, ell: f64, psi: f64) -> ([f64; 2], [f64; 2]) {
    let [[a, b], [_, d]] = correction_matrix(sp, ell, psi);
    // eigenvector for the larger eigenvalue of the symmetric matrix, i.e. μ′₊
    let half = 0.5 * (d - a);
    let root = f64::hypot(half, b);
    let v_big = if b == 0.0 {
        if a >= d {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    } else {
        let v = [b, half + root];
        let n = f64::hypot(v[0], v[1]);
        [v[0] / n, v[1] / n]
    };
    (v_big, [-v_big[1], v_big[0]])
}

pub fn sample_corrections(sp: ScriptP, ell: f64, psi_grid: &[f64]) -> Vec<(f64, f64, f64)> {
    psi_grid
        .iter()
        .map(|&psi| {
            let (p, m) = correction_eigen(sp, ell, psi);
            (psi, p, m)
        })
        .collect()
}

/// Symmetric ψ grid wide enough to show the asymptotes: the root's
/// `ψ`-term dominates `𝒫₋` by a factor 4 at the ends.
pub fn default_psi_grid(sp: ScriptP, ell: f64, n: usize) -> Vec<f64> {
    let psi_max = (4.0 * sp.p_minus.abs().max(sp.p_plus.abs()).max(1.0)) / (8.0 * PI * ell);
    if n < 2 {
        return vec![0.0];
    }
    (0..n).map(|i| -psi_max + 2.0 * psi_max * i as f64 / (n - 1) as f64).collect()
}

/// Gap opened at `(0, 4π²)`: width `ε²|𝒫₋|/ℓ`, center `4π² − ε²𝒫₊/(2ℓ)`.
pub fn predict_gap(sp: ScriptP, ell: f64, eps: f64) -> GapPrediction {
    if eps > EPS_WARN {
        log::warn!("predict_gap: eps = {eps} exceeds {EPS_WARN}; leading-order law is unreliable");
    }
    let knot = principal_knot();
    let e2 = eps * eps;
    let undecided = sp.p_minus_is_zero();
    GapPrediction {
        center: knot.mu_star - e2 * sp.p_plus / (2.0 * ell),
        width: if undecided { 0.0 } else { e2 * sp.p_minus.abs() / ell },
        eps,
        ell,
        script_p: sp,
        knot,
        correction_curves: sample_corrections(sp, ell, &default_psi_grid(sp, ell, 201)),
        undecided,
    }
}

/// `Λ = hμ` and the wave number `k = √(gΛ)` of the physical problem.
pub fn lift_to_physical(mu: f64, h_layer: f64, gravity: f64) -> Result<(f64, f64), DomainError> {
    if !(mu >= 0.0) {
        return Err(DomainError::NonPositivePhysical("mu", mu));
    }
    if !(h_layer > 0.0) {
        return Err(DomainError::NonPositivePhysical("h_layer", h_layer));
    }
    if !(gravity > 0.0) {
        return Err(DomainError::NonPositivePhysical("gravity", gravity));
    }
    let lambda = h_layer * mu;
    Ok((lambda, (gravity * lambda).sqrt()))
}
