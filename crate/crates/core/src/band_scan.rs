//! Floquet sweeps, band hulls and spectral gaps.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{closed_form_spectrum, enumerate_knots, Knot, KnotId, KnotKind};
use crate::domain::DomainSpec;
use crate::limit_fem::{build_mesh, solve_at, BlochSample, LimitFemError, MeshedProblem, SolverOptions};
use crate::perturbation::GapPrediction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandScanError {
    #[error("band_scan: invalid eta grid ({0})")]
    BadGrid(String),
    #[error("band_scan: at eta = {eta}: {source}")]
    Solver { eta: f64, source: LimitFemError },
    #[error(transparent)]
    Mesh(#[from] LimitFemError),
    #[error("band_scan: measured gap belongs to {measured:?}, prediction to {predicted:?}")]
    KnotMismatch { measured: Option<KnotId>, predicted: KnotId },
}

/// Floquet grid: a uniform coarse grid on `[−π, π]` plus refined windows
/// `|η − η*| ≤ window·ε²` around disintegrating knots when a hole is present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaGridSpec {
    /// Odd number of coarse points, at least 9, so that `η = 0` and `±π` are
    /// sampled.
    pub coarse: usize,
    /// Points per refined window, odd and at least 21.
    pub refine_points: usize,
    pub window: f64,
}

impl Default for EtaGridSpec {
    fn default() -> Self {
        Self { coarse: 33, refine_points: 41, window: 10.0 }
    }
}

impl EtaGridSpec {
    fn check(&self) -> Result<(), BandScanError> {
        if self.coarse < 9 || self.coarse % 2 == 0 {
            return Err(BandScanError::BadGrid(format!("coarse = {} must be odd and >= 9", self.coarse)));
        }
        if self.refine_points < 21 || self.refine_points % 2 == 0 {
            return Err(BandScanError::BadGrid(format!(
                "refine_points = {} must be odd and >= 21",
                self.refine_points
            )));
        }
        if !(self.window > 0.0) {
            return Err(BandScanError::BadGrid(format!("window = {} must be positive", self.window)));
        }
        Ok(())
    }

    /// Doubles the density of every part of the grid.
    pub fn doubled(&self) -> Self {
        Self { coarse: 2 * self.coarse - 1, refine_points: 2 * self.refine_points - 1, window: self.window }
    }
}

/// Disintegrating knots that can be resolved by `m_modes` sorted bands.
pub fn relevant_knots(ell: f64, m_modes: usize) -> Vec<Knot> {
    let mu_max = [0.0, 0.5 * PI, PI]
        .iter()
        .map(|&eta| closed_form_spectrum(ell, eta, m_modes)[m_modes - 1])
        .fold(0.0, f64::max);
    enumerate_knots(ell, mu_max)
        .into_iter()
        .filter(|k| k.kind == KnotKind::Disintegrating)
        .collect()
}

pub fn eta_grid(spec: &EtaGridSpec, domain: &DomainSpec, m_modes: usize) -> Result<Vec<f64>, BandScanError> {
    spec.check()?;
    let n = spec.coarse;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| {
            let k = i as i64 - (n / 2) as i64;
            PI * k as f64 / (n / 2) as f64
        })
        .collect();
    if let Some(hole) = &domain.hole {
        let half = spec.window * hole.eps * hole.eps;
        let r = spec.refine_points / 2;
        for knot in relevant_knots(domain.ell, m_modes.max(1)) {
            for i in 0..spec.refine_points {
                let eta = knot.eta_star + half * (i as f64 - r as f64) / r as f64;
                if (-PI..=PI).contains(&eta) {
                    grid.push(eta);
                }
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    Ok(grid)
}

/// Band `index` (from 1) is `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandInterval {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
    pub eta_at_lower: f64,
    pub eta_at_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub eta_grid: Vec<f64>,
    pub samples: Vec<BlochSample>,
    pub bands: Vec<BandInterval>,
    /// Eigensolver tolerance used for the sweep.
    pub tol: f64,
    pub ell: f64,
    /// Hole scale, if any.
    pub eps: Option<f64>,
    /// Fewer than two bands: gaps cannot be detected.
    pub single_band: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMeasurement {
    /// Gap above band `m` (from 1).
    pub m: usize,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub center: f64,
    /// Disintegrating knot of the unperturbed cell this gap opens from.
    pub knot: Option<KnotId>,
}

pub fn sweep(
    domain: &DomainSpec,
    grid: &EtaGridSpec,
    m_modes: usize,
    target_h: f64,
    opts: &SolverOptions,
) -> Result<BandStructure, BandScanError> {
    let mesh = build_mesh(domain, target_h)?;
    let etas = eta_grid(grid, domain, m_modes)?;
    sweep_mesh(&mesh, domain.hole.map(|h| h.eps), &etas, m_modes, opts)
}

/// Sweeps a prebuilt mesh over `etas` in parallel; results are kept in grid
/// order, so the outcome does not depend on scheduling.
pub fn sweep_mesh(
    mesh: &MeshedProblem,
    eps: Option<f64>,
    etas: &[f64],
    m_modes: usize,
    opts: &SolverOptions,
) -> Result<BandStructure, BandScanError> {
    if etas.len() < 2 || etas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BandScanError::BadGrid("eta grid must be strictly increasing".into()));
    }
    let samples: Vec<BlochSample> = etas
        .par_iter()
        .map(|&eta| {
            let mut s = solve_at(mesh, eta, m_modes, opts).map_err(|source| BandScanError::Solver { eta, source })?;
            s.vectors.clear();
            Ok(s)
        })
        .collect::<Result<_, BandScanError>>()?;
    let bands = band_hulls(etas, &samples);
    Ok(BandStructure {
        eta_grid: etas.to_vec(),
        samples,
        bands,
        tol: opts.tol,
        ell: mesh.ell,
        eps,
        single_band: m_modes < 2,
    })
}

/// Extremum of sampled values with a three-point parabolic correction at
/// interior extrema. `periodic` treats the first and last samples as the
/// same point `η = ∓π`.
fn refined_extremum(etas: &[f64], f: &[f64], maximize: bool, periodic: bool) -> (f64, f64) {
    let n = f.len();
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut k = 0;
    for i in 1..n {
        if better(f[i], f[k]) {
            k = i;
        }
    }
    let neighbours = if k > 0 && k + 1 < n {
        Some(((etas[k - 1], f[k - 1]), (etas[k + 1], f[k + 1])))
    } else if periodic && n >= 3 {
        let period = 2.0 * PI;
        if k == 0 {
            Some(((etas[n - 2] - period, f[n - 2]), (etas[1], f[1])))
        } else {
            Some(((etas[n - 2], f[n - 2]), (etas[1] + period, f[1])))
        }
    } else {
        None
    };
    let (x1, y1) = (etas[k], f[k]);
    let Some(((x0, y0), (x2, y2))) = neighbours else { return (y1, x1) };
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let a = (d1 - d0) / (x2 - x0);
    if a == 0.0 || (maximize && a > 0.0) || (!maximize && a < 0.0) {
        return (y1, x1);
    }
    let b = d0 - a * (x0 + x1);
    let xv = -b / (2.0 * a);
    if xv < x0 || xv > x2 {
        return (y1, x1);
    }
    let yv = y1 + (xv - x1) * (d0 + a * (xv - x0));
    if better(yv, y1) {
        (yv, xv)
    } else {
        (y1, x1)
    }
}

pub fn band_hulls(etas: &[f64], samples: &[BlochSample]) -> Vec<BandInterval> {
    let m = samples.iter().map(|s| s.eigenvalues.len()).min().unwrap_or(0);
    let periodic = etas.len() >= 3 && (etas[0] + PI).abs() < 1e-12 && (etas[etas.len() - 1] - PI).abs() < 1e-12;
    (0..m)
        .map(|i| {
            let f: Vec<f64> = samples.iter().map(|s| s.eigenvalues[i]).collect();
            let (lower, eta_at_lower) = refined_extremum(etas, &f, false, periodic);
            let (upper, eta_at_upper) = refined_extremum(etas, &f, true, periodic);
            BandInterval { index: i + 1, lower, upper, eta_at_lower, eta_at_upper }
        })
        .collect()
}

/// Bounded components of the complement of `⋃ B_m` wider than `threshold`.
pub fn gaps_from_bands(bands: &[BandInterval], threshold: f64) -> Vec<(usize, f64, f64, f64, f64)> {
    let mut out = Vec::new();
    let mut reach = f64::NEG_INFINITY;
    let mut reach_eta = 0.0;
    for w in bands.windows(2) {
        if w[0].upper > reach {
            reach = w[0].upper;
            reach_eta = w[0].eta_at_upper;
        }
        if w[1].lower - reach > threshold {
            out.push((w[0].index, reach, w[1].lower, reach_eta, w[1].eta_at_lower));
        }
    }
    out
}

/// Closest disintegrating knot to a gap, in `μ` and in `|η|`.
fn attribute_knot(knots: &[Knot], center: f64, eta: f64) -> Option<KnotId> {
    knots
        .iter()
        .filter(|k| (k.eta_star.abs() - eta.abs()).abs() < 0.25)
        .min_by(|a, b| (a.mu_star - center).abs().total_cmp(&(b.mu_star - center).abs()))
        .map(|k| k.id())
}

/// Spectral gaps of a band structure; threshold twice the solver tolerance.
pub fn bands_and_gaps(bs: &BandStructure) -> Vec<GapMeasurement> {
    if bs.single_band || bs.bands.len() < 2 {
        return Vec::new();
    }
    let knots = relevant_knots(bs.ell, bs.bands.len());
    gaps_from_bands(&bs.bands, 2.0 * bs.tol)
        .into_iter()
        .map(|(m, lower, upper, eta_lo, eta_hi)| {
            let center = 0.5 * (lower + upper);
            GapMeasurement {
                m,
                lower,
                upper,
                width: upper - lower,
                center,
                knot: attribute_knot(&knots, center, 0.5 * (eta_lo.abs() + eta_hi.abs())),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// A gap was predicted and measured.
    Compared,
    /// `𝒫₋ = 0` and no gap was measured: consistent, inconclusive.
    ConsistentInconclusive,
    /// `𝒫₋ = 0` but a gap was measured: higher order decides.
    HigherOrderGap,
    /// A gap was predicted but none was measured.
    MissingGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapComparison {
    pub eps: f64,
    pub verdict: Verdict,
    pub measured_width: Option<f64>,
    pub measured_center: Option<f64>,
    pub predicted_width: f64,
    pub predicted_center: f64,
    /// `(measured − predicted) / predicted`.
    pub width_deviation: Option<f64>,
    pub center_deviation: Option<f64>,
    /// `width / ε²`.
    pub width_over_eps2: Option<f64>,
    pub predicted_width_over_eps2: f64,
}

pub fn compare_gap(meas: Option<&GapMeasurement>, pred: &GapPrediction) -> Result<GapComparison, BandScanError> {
    let predicted = pred.knot.id();
    if let Some(m) = meas {
        if m.knot != Some(predicted) {
            return Err(BandScanError::KnotMismatch { measured: m.knot, predicted });
        }
    }
    let e2 = pred.eps * pred.eps;
    let verdict = match (meas.is_some(), pred.undecided) {
        (true, false) => Verdict::Compared,
        (false, true) => Verdict::ConsistentInconclusive,
        (true, true) => Verdict::HigherOrderGap,
        (false, false) => Verdict::MissingGap,
    };
    let rel = |a: f64, b: f64| if b != 0.0 { Some((a - b) / b) } else { None };
    Ok(GapComparison {
        eps: pred.eps,
        verdict,
        measured_width: meas.map(|m| m.width),
        measured_center: meas.map(|m| m.center),
        predicted_width: pred.width,
        predicted_center: pred.center,
        width_deviation: meas.and_then(|m| rel(m.width, pred.width)),
        center_deviation: meas.and_then(|m| rel(m.center, pred.center)),
        width_over_eps2: meas.map(|m| m.width / e2),
        predicted_width_over_eps2: pred.width / e2,
    })
}

/// The measured gap attached to `knot`, if any.
pub fn gap_at<'a>(gaps: &'a [GapMeasurement], knot: &Knot) -> Option<&'a GapMeasurement> {
    gaps.iter().find(|g| g.knot == Some(knot.id()))
}

/// Whether `|width deviation|` strictly decreases as `ε` decreases.
pub fn deviation_decreases(rows: &[GapComparison]) -> bool {
    let mut sorted: Vec<&GapComparison> = rows.iter().collect();
    sorted.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let devs: Option<Vec<f64>> = sorted.iter().map(|r| r.width_deviation.map(f64::abs)).collect();
    match devs {
        Some(d) => d.windows(2).all(|w| w[1] < w[0]),
        None => false,
    }
}
