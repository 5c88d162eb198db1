//! Junction problem on `Ξ = 𝕂 ∪ ℙ`: the unit strip `ℙ = (−∞, 0) × (−1, 0)`
//! attached to the quadrant `𝕂 = (0, ∞) × (−∞, 0)`.
//!
//! `W` is harmonic with a homogeneous Neumann condition on `∂Ξ` and behaves
//! like `ξ₁ + c_Ξ` in the strip and like `(2/π) ln|ξ|` in the quadrant. The
//! truncated domain `Ξ_T` carries these far fields as Neumann data. The
//! discretisation is bilinear on a tensor grid graded geometrically towards
//! the lines through the reentrant corner `P = (0, −1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::{SparseCholesky, TripletBuilder};

/// Grading levels with ratio 1/2 towards the corner lines.
pub const GRADING_LEVELS: u32 = 6;
/// Largest admissible disagreement of the two strip cross-sections.
pub const CROSS_SECTION_TOL: f64 = 1e-5;
/// Points on a quadrant sampling arc.
const ARC_POINTS: usize = 128;
/// Fit windows for the remainder decay rates.
pub const STRIP_WINDOW: (f64, f64) = (-4.0, -1.5);
pub const QUADRANT_WINDOW_START: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryLayerError {
    #[error("boundary_layer: truncation T = {0} must be at least 4")]
    BadTruncation(f64),
    #[error("boundary_layer: resolution = {0} must be at least 16 cells across the strip")]
    BadResolution(usize),
    #[error("boundary_layer: mesh failure ({0})")]
    MeshFailure(String),
    #[error("boundary_layer: ill-conditioned system ({0})")]
    IllConditioned(String),
    #[error("boundary_layer: cross-sections at -T/2 and -3T/4 disagree by {0:.3e}")]
    NotConverged(f64),
}

/// Nodes of `[f − left, f + right]`: graded cells next to `f`, uniform
/// cells of size `hb` further out.
fn graded_axis(f: f64, left: f64, right: f64, hb: f64) -> (Vec<f64>, usize) {
    let offsets = |len: f64| {
        let levels = GRADING_LEVELS as i32;
        let mut sizes = vec![hb / 2f64.powi(levels)];
        sizes.extend((0..levels).map(|k| hb / 2f64.powi(levels - k)));
        let mut o = vec![0.0];
        for s in sizes {
            o.push(o[o.len() - 1] + s);
        }
        let mut k = 2.0;
        while k * hb < len - 0.5 * hb {
            o.push(k * hb);
            k += 1.0;
        }
        o.push(len);
        o
    };
    let l = offsets(left);
    let r = offsets(right);
    let mut axis: Vec<f64> = l.iter().rev().map(|d| f - d).collect();
    let focus = axis.len() - 1;
    axis.extend(r.iter().skip(1).map(|d| f + d));
    (axis, focus)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XiSolution {
    pub t: f64,
    pub resolution: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Index of `ξ₁ = 0` in `xs` and of `ξ₂ = −1` in `ys`.
    pub i0: usize,
    pub j0: usize,
    /// Unknown index of grid node `(i, j)` at `j·nx + i`, if active.
    pub node: Vec<Option<usize>>,
    pub w: Vec<f64>,
    pub c_xi: f64,
    /// `(ξ₁, cross-section mean of W, cos(πξ₂) remainder amplitude)`.
    pub strip_profile: Vec<(f64, f64, f64)>,
    /// `(ρ, arc mean of W − (2/π) ln ρ, RMS remainder on the arc)`.
    pub quadrant_profile: Vec<(f64, f64, f64)>,
    pub flux_imbalance: f64,
    pub residual: f64,
    pub normalization: String,
}

impl XiSolution {
    fn nx(&self) -> usize {
        self.xs.len()
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.w[self.node[j * self.nx() + i].expect("inactive node")]
    }

    /// Bilinear interpolant of `W`; `None` outside `Ξ_T`.
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        let cell = |axis: &[f64], v: f64| {
            if v < axis[0] || v > axis[axis.len() - 1] {
                return None;
            }
            let k = axis.partition_point(|&a| a <= v).clamp(1, axis.len() - 1) - 1;
            Some((k, (v - axis[k]) / (axis[k + 1] - axis[k])))
        };
        let (i, s) = cell(&self.xs, x)?;
        let (j, t) = cell(&self.ys, y)?;
        if i < self.i0 && j < self.j0 {
            return None;
        }
        Some(
            (1.0 - s) * (1.0 - t) * self.value(i, j)
                + s * (1.0 - t) * self.value(i + 1, j)
                + (1.0 - s) * t * self.value(i, j + 1)
                + s * t * self.value(i + 1, j + 1),
        )
    }

    /// Trapezoidal mean of `W` and `cos(πξ₂)` amplitude of `W − mean` on the
    /// strip column `i`.
    fn column(&self, i: usize) -> (f64, f64, f64) {
        let ys = &self.ys[self.j0..];
        let mut wts = vec![0.0; ys.len()];
        for k in 0..ys.len() - 1 {
            let d = 0.5 * (ys[k + 1] - ys[k]);
            wts[k] += d;
            wts[k + 1] += d;
        }
        let vals: Vec<f64> = (self.j0..self.ys.len()).map(|j| self.value(i, j)).collect();
        let mean: f64 = wts.iter().zip(&vals).map(|(a, b)| a * b).sum::<f64>() / wts.iter().sum::<f64>();
        let amp = 2.0
            * wts.iter().zip(&vals).zip(ys).map(|((a, v), y)| a * (v - mean) * (PI * y).cos()).sum::<f64>();
        let maxdev = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        (mean, amp, maxdev)
    }

    /// Cross-section mean of `W` at any `ξ₁ ∈ [−T, 0]`.
    pub fn strip_mean(&self, x: f64) -> f64 {
        let k = self.xs[..=self.i0].partition_point(|&a| a <= x).clamp(1, self.i0) - 1;
        let s = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        (1.0 - s) * self.column(k).0 + s * self.column(k + 1).0
    }

    /// Mean and RMS deviation of `W − (2/π) ln ρ` on the quadrant arc `|ξ| = ρ`.
    pub fn arc_stats(&self, rho: f64) -> (f64, f64) {
        let vals: Vec<f64> = (0..ARC_POINTS)
            .map(|k| {
                let phi = -0.5 * PI * (k as f64 + 0.5) / ARC_POINTS as f64;
                let v = self.eval(rho * phi.cos(), rho * phi.sin()).expect("arc inside the quadrant");
                v - 2.0 / PI * rho.ln()
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / ARC_POINTS as f64;
        let rms = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / ARC_POINTS as f64).sqrt();
        (mean, rms)
    }

    /// Largest deviation of `W − ξ₁` from its mean on the strip column
    /// closest to `ξ₁`.
    pub fn cross_section_spread(&self, x: f64) -> f64 {
        let i = (0..=self.i0)
            .min_by(|&a, &b| (self.xs[a] - x).abs().total_cmp(&(self.xs[b] - x).abs()))
            .unwrap();
        self.column(i).2
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
const GAUSS: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

/// Solves the truncated junction problem with `resolution` cells across the
/// unit strip.
pub fn solve_w(t: f64, resolution: usize) -> Result<XiSolution, BoundaryLayerError> {
    solve_with_data(t, resolution, 1.0)
}

/// As [`solve_w`] with the matching data scaled by `scale`.
pub fn solve_with_data(t: f64, resolution: usize, scale: f64) -> Result<XiSolution, BoundaryLayerError> {
    if !(t >= 4.0) {
        return Err(BoundaryLayerError::BadTruncation(t));
    }
    if resolution < 16 {
        return Err(BoundaryLayerError::BadResolution(resolution));
    }
    let hb = 1.0 / resolution as f64;
    let (xs, i0) = graded_axis(0.0, t, t, hb);
    let (ys, j0) = graded_axis(-1.0, t - 1.0, 1.0, hb);
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 3 || ny < 3 {
        return Err(BoundaryLayerError::MeshFailure("degenerate tensor grid".into()));
    }
    let active = |i: usize, j: usize| i < nx - 1 && j < ny - 1 && !(i < i0 && j < j0);
    let mut node = vec![None; nx * ny];
    let mut n = 0;
    for j in 0..ny {
        for i in 0..nx {
            let touches = [(i, j), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i.wrapping_sub(1), j.wrapping_sub(1))]
                .iter()
                .any(|&(a, b)| a < nx && b < ny && active(a, b));
            if touches {
                node[j * nx + i] = Some(n);
                n += 1;
            }
        }
    }
    let id = |i: usize, j: usize| node[j * nx + i].unwrap();

    let mut kb = TripletBuilder::<f64>::with_capacity(n, n, 16 * n);
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            if !active(i, j) {
                continue;
            }
            let (hx, hy) = (xs[i + 1] - xs[i], ys[j + 1] - ys[j]);
            let k1 = |h: f64, a: usize, b: usize| if a == b { 1.0 / h } else { -1.0 / h };
            let m1 = |h: f64, a: usize, b: usize| if a == b { h / 3.0 } else { h / 6.0 };
            let loc = [(0, 0), (1, 0), (0, 1), (1, 1)];
            for &(a, b) in &loc {
                for &(c, d) in &loc {
                    let v = k1(hx, a, c) * m1(hy, b, d) + m1(hx, a, c) * k1(hy, b, d);
                    kb.push(id(i + a, j + b), id(i + c, j + d), v);
                }
            }
        }
    }
    let k = kb.build();

    // Neumann matching data
    let mut rhs = vec![0.0; n];
    let mut edge = |p: usize, q: usize, a: f64, b: f64, g: &dyn Fn(f64) -> f64| {
        let half = 0.5 * (b - a);
        for &(x, w) in &GAUSS {
            let s = 0.5 * (x + 1.0);
            let val = g(a + s * (b - a)) * w * half;
            rhs[p] += (1.0 - s) * val;
            rhs[q] += s * val;
        }
    };
    for j in j0..ny - 1 {
        edge(id(0, j), id(0, j + 1), ys[j], ys[j + 1], &|_| -scale);
    }
    let face = |s: f64| scale * 2.0 / PI * t / (t * t + s * s);
    for j in 0..ny - 1 {
        edge(id(nx - 1, j), id(nx - 1, j + 1), ys[j], ys[j + 1], &face);
    }
    for i in i0..nx - 1 {
        edge(id(i, 0), id(i + 1, 0), xs[i], xs[i + 1], &face);
    }
    let flux_imbalance = rhs.iter().sum::<f64>();

    // pin the node at the far end of the strip top and solve the rest
    let pin = id(0, ny - 1);
    let keep: Vec<usize> = (0..n).filter(|&r| r != pin).collect();
    let mut reduced_index = vec![usize::MAX; n];
    for (r, &g) in keep.iter().enumerate() {
        reduced_index[g] = r;
    }
    let mut rb = TripletBuilder::<f64>::with_capacity(n - 1, n - 1, k.nnz());
    for r in 0..n {
        if r == pin {
            continue;
        }
        for (c, v) in k.row(r) {
            if c != pin {
                rb.push(reduced_index[r], reduced_index[c], v);
            }
        }
    }
    let chol = SparseCholesky::new(&rb.build()).map_err(|e| BoundaryLayerError::IllConditioned(e.to_string()))?;
    let red_rhs: Vec<f64> = keep.iter().map(|&g| rhs[g]).collect();
    let red = chol.solve(&red_rhs);
    let mut w = vec![0.0; n];
    for (r, &g) in keep.iter().enumerate() {
        w[g] = red[r];
    }
    let kw = k.matvec(&w);
    let residual = (0..n).filter(|&r| r != pin).map(|r| (kw[r] - rhs[r]).abs()).fold(0.0, f64::max);
    if !residual.is_finite() || residual > 1e-8 * (1.0 + rhs.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
        return Err(BoundaryLayerError::IllConditioned(format!("assembly residual {residual:.3e}")));
    }

    let mut sol = XiSolution {
        t,
        resolution,
        xs,
        ys,
        i0,
        j0,
        node,
        w,
        c_xi: f64::NAN,
        strip_profile: Vec::new(),
        quadrant_profile: Vec::new(),
        flux_imbalance,
        residual,
        normalization: "arc mean of W - (2/pi) ln|xi| over |xi| = T/2 in the quadrant set to 0".into(),
    };
    let (shift, _) = sol.arc_stats(0.5 * t);
    for v in &mut sol.w {
        *v -= shift;
    }
    sol.strip_profile = (0..=sol.i0)
        .map(|i| {
            let (mean, amp, _) = sol.column(i);
            (sol.xs[i], mean, amp)
        })
        .collect();
    let n_arc = (4.0 * (0.5 * t - 1.0)).round().max(1.0) as usize;
    sol.quadrant_profile = (0..=n_arc)
        .map(|k| {
            let rho = 1.0 + (0.5 * t - 1.0) * k as f64 / n_arc as f64;
            let (mean, rms) = sol.arc_stats(rho);
            (rho, mean, rms)
        })
        .collect();
    sol.c_xi = sol.strip_mean(-0.75 * t) + 0.75 * t;
    Ok(sol)
}

/// `c_Ξ` from the cross-section at `ξ₁ = −3T/4`, checked against `−T/2`.
pub fn extract_c_xi(sol: &XiSolution) -> Result<f64, BoundaryLayerError> {
    let c_far = sol.strip_mean(-0.75 * sol.t) + 0.75 * sol.t;
    let c_mid = sol.strip_mean(-0.5 * sol.t) + 0.5 * sol.t;
    let diff = (c_far - c_mid).abs();
    if !(diff <= CROSS_SECTION_TOL) {
        return Err(BoundaryLayerError::NotConverged(diff));
    }
    Ok(c_far)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub t: f64,
    /// Slope of `ln|strip remainder|` against `ξ₁`; expected `π`.
    pub strip_slope: f64,
    pub strip_points: usize,
    /// Slope of `ln(quadrant remainder)` against `ln ρ`; expected `−1`.
    pub quadrant_slope: f64,
    pub quadrant_points: usize,
    pub strip_ok: bool,
    pub quadrant_ok: bool,
    pub low_confidence: bool,
}

pub fn check_asymptotics(sol: &XiSolution) -> DecayReport {
    let strip: Vec<(f64, f64)> = sol
        .strip_profile
        .iter()
        .filter(|p| p.0 >= STRIP_WINDOW.0 && p.0 <= STRIP_WINDOW.1 && p.0 >= -sol.t && p.2.abs() > 1e-14)
        .map(|p| (p.0, p.2.abs().ln()))
        .collect();
    let quad: Vec<(f64, f64)> = sol
        .quadrant_profile
        .iter()
        .filter(|p| p.0 >= QUADRANT_WINDOW_START && p.0 <= 0.5 * sol.t + 1e-12 && p.2 > 0.0)
        .map(|p| (p.0.ln(), p.2.ln()))
        .collect();
    let slope = |pts: &[(f64, f64)]| if pts.len() >= 2 { fit_slope(pts) } else { f64::NAN };
    let strip_slope = slope(&strip);
    let quadrant_slope = slope(&quad);
    DecayReport {
        t: sol.t,
        strip_slope,
        strip_points: strip.len(),
        quadrant_slope,
        quadrant_points: quad.len(),
        strip_ok: (strip_slope - PI).abs() <= 0.1 * PI,
        quadrant_ok: (quadrant_slope + 1.0).abs() <= 0.1,
        low_confidence: sol.t < 8.0 || strip.len() < 4 || quad.len() < 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_axis_contains_focus_and_halves() {
        let (a, f) = graded_axis(-1.0, 7.0, 1.0, 1.0 / 16.0);
        assert_eq!(a[f], -1.0);
        assert!((a[0] + 8.0).abs() < 1e-12 && (a[a.len() - 1]).abs() < 1e-12);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        let h0 = a[f + 1] - a[f];
        assert!((h0 - 1.0 / 16.0 / 64.0).abs() < 1e-15);
        let steps: Vec<f64> = a[f..].windows(2).map(|w| w[1] - w[0]).collect();
        assert!((steps[2] / steps[1] - 2.0).abs() < 1e-9);
        assert!(steps.iter().all(|&s| s <= 1.0 / 16.0 + 1e-12));
    }

    #[test]
    fn guards() {
        assert_eq!(solve_w(3.0, 16).unwrap_err(), BoundaryLayerError::BadTruncation(3.0));
        assert_eq!(solve_w(8.0, 8).unwrap_err(), BoundaryLayerError::BadResolution(8));
    }

    #[test]
    fn zero_data_gives_constant() {
        let sol = solve_with_data(4.0, 16, 0.0).unwrap();
        let (lo, hi) = sol.w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi - lo < 1e-12);
    }

    #[test]
    fn flux_balances_and_system_is_solved() {
        let sol = solve_w(8.0, 16).unwrap();
        assert!(sol.flux_imbalance.abs() < 1e-8, "{}", sol.flux_imbalance);
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        // P = (0, −1) is a grid node on the boundary
        assert_eq!(sol.xs[sol.i0], 0.0);
        assert_eq!(sol.ys[sol.j0], -1.0);
        assert!(sol.node[sol.j0 * sol.xs.len() + sol.i0].is_some());
        assert!(sol.node[(sol.j0 - 1) * sol.xs.len() + sol.i0 - 1].is_none());
    }

    #[test]
    fn strip_is_linear_far_from_the_junction() {
        let sol = solve_w(8.0, 16).unwrap();
        assert!(sol.cross_section_spread(-4.0) < 1e-4);
        // the arc normalisation is exact for ρ > 1
        let (m, _) = sol.arc_stats(4.0);
        assert!(m.abs() < 1e-12);
        let (m3, _) = sol.arc_stats(3.0);
        assert!(m3.abs() < 1e-3, "{m3}");
        assert!(extract_c_xi(&sol).is_ok());
    }

    #[test]
    fn c_xi_converges_at_the_corner_rate() {
        // the reentrant corner at P limits Q1 to O(h^{4/3}) under fixed grading
        let c: Vec<f64> = [16, 32, 64].iter().map(|&r| extract_c_xi(&solve_w(8.0, r).unwrap()).unwrap()).collect();
        let ratio = (c[1] - c[0]) / (c[2] - c[1]);
        assert!(ratio > 2f64.powf(4.0 / 3.0) * 0.85 && ratio < 4.5, "{ratio}");
        assert!((c[2] - c[1]).abs() < 2e-4);
    }

    #[test]
    fn short_truncation_is_low_confidence() {
        let sol = solve_w(4.0, 16).unwrap();
        assert!(check_asymptotics(&sol).low_confidence);
    }

    #[test]
    fn slope_fit_is_exact_on_lines() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 - 3.0 * i as f64)).collect();
        assert!((fit_slope(&pts) + 3.0).abs() < 1e-14);
    }
}
