//! Run configuration and deterministic CSV emission.
//!
//! Configuration is TOML; dotted keys (`solver.target_h = 0.03`) and tables
//! are interchangeable. Every float is written with 17 significant digits so
//! that identical runs yield byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::band_scan::{BandStructure, EtaGridSpec, GapComparison, GapMeasurement};
use crate::boundary_layer::XiSolution;
use crate::dispersion::{sample_curve, Knot, ModeIndex};
use crate::domain::{DepthProfile, DomainSpec, HoleShape, HoleSpec};
use crate::limit_fem::{BlochSample, EigenMethod, SolverOptions};
use crate::perturbation::GapPrediction;
use crate::polarization::PolarizationMatrix;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Parse(String),
    #[error("config: invalid value for `{key}` ({reason})")]
    Invalid { key: &'static str, reason: String },
    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub ell: f64,
    #[serde(default = "one")]
    pub depth: f64,
    /// Transverse depth table `H(y₂)`; overrides `depth` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_h: Option<Vec<f64>>,
    #[serde(default = "default_h_layer")]
    pub h_layer: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Disk,
    Ellipse,
    Segment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    pub shape: ShapeKind,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default)]
    pub rotation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    #[serde(default)]
    pub center: [f64; 2],
}

impl HoleConfig {
    pub fn shape(&self) -> Result<HoleShape, ConfigError> {
        let need = |v: Option<f64>, key: &'static str| v.ok_or_else(|| invalid(key, "missing for this hole shape"));
        Ok(match self.shape {
            ShapeKind::Disk => HoleShape::Disk { radius: need(self.radius, "hole.radius")? },
            ShapeKind::Ellipse => HoleShape::Ellipse {
                a: need(self.a, "hole.a")?,
                b: need(self.b, "hole.b")?,
                rotation: self.rotation,
            },
            ShapeKind::Segment => HoleShape::Segment { half_length: need(self.half_length, "hole.half_length")? },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_target_h")]
    pub target_h: f64,
    #[serde(default = "default_num_modes")]
    pub num_modes: usize,
    /// Coarse Floquet grid points on `[−π, π]` (odd).
    #[serde(default = "default_eta_count")]
    pub eta_count: usize,
    #[serde(default = "default_refine_points")]
    pub refine_points: usize,
    #[serde(default = "default_window")]
    pub refine_window: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub method: EigenMethod,
    /// Floquet parameter of `solve`.
    #[serde(default)]
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationSource {
    #[default]
    Numeric,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarizationConfig {
    #[serde(default)]
    pub source: PolarizationSource,
    #[serde(default = "default_r_inf")]
    pub r_inf: f64,
    #[serde(default = "default_pol_resolution")]
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryLayerConfig {
    #[serde(default = "default_truncations")]
    pub truncations: Vec<f64>,
    #[serde(default = "default_bl_resolution")]
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
    #[serde(default = "default_curve_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    /// Values of `μ` to lift; empty means the band edges of a sweep.
    #[serde(default)]
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Also write a static SVG band diagram.
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole: Option<HoleConfig>,
    #[serde(default = "default_solver")]
    pub solver: SolverConfig,
    #[serde(default = "default_polarization")]
    pub polarization: PolarizationConfig,
    #[serde(default = "default_boundary_layer")]
    pub boundary_layer: BoundaryLayerConfig,
    #[serde(default = "default_dispersion")]
    pub dispersion: DispersionConfig,
    #[serde(default)]
    pub lift: LiftConfig,
    #[serde(default = "default_output")]
    pub output: OutputConfig,
}

fn one() -> f64 {
    1.0
}
fn default_h_layer() -> f64 {
    0.01
}
fn default_gravity() -> f64 {
    9.81
}
fn default_target_h() -> f64 {
    1.0 / 32.0
}
fn default_num_modes() -> usize {
    6
}
fn default_eta_count() -> usize {
    33
}
fn default_refine_points() -> usize {
    41
}
fn default_window() -> f64 {
    10.0
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    500
}
fn default_r_inf() -> f64 {
    20.0
}
fn default_pol_resolution() -> usize {
    128
}
fn default_truncations() -> Vec<f64> {
    vec![8.0, 12.0]
}
fn default_bl_resolution() -> usize {
    16
}
fn default_mu_max() -> f64 {
    120.0
}
fn default_curve_points() -> usize {
    201
}
fn default_solver() -> SolverConfig {
    toml::from_str("").expect("solver defaults")
}
fn default_polarization() -> PolarizationConfig {
    toml::from_str("").expect("polarization defaults")
}
fn default_boundary_layer() -> BoundaryLayerConfig {
    toml::from_str("").expect("boundary layer defaults")
}
fn default_dispersion() -> DispersionConfig {
    toml::from_str("").expect("dispersion defaults")
}
fn default_output() -> OutputConfig {
    OutputConfig { svg: false }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        if !table.contains_key("domain") {
            return Err(ConfigError::Parse("missing field `domain.ell`".into()));
        }
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pos = |v: f64, key: &'static str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("must be positive, got {v}")))
            }
        };
        pos(self.solver.tol, "solver.tol")?;
        pos(self.solver.target_h, "solver.target_h")?;
        pos(self.solver.refine_window, "solver.refine_window")?;
        pos(self.polarization.r_inf, "polarization.r_inf")?;
        pos(self.dispersion.mu_max, "dispersion.mu_max")?;
        if self.solver.num_modes == 0 {
            return Err(invalid("solver.num_modes", "must be at least 1"));
        }
        if self.solver.max_iter == 0 {
            return Err(invalid("solver.max_iter", "must be at least 1"));
        }
        if self.dispersion.points < 2 {
            return Err(invalid("dispersion.points", "must be at least 2"));
        }
        if self.boundary_layer.truncations.is_empty() {
            return Err(invalid("boundary_layer.truncations", "must not be empty"));
        }
        if self.domain.depth_y.is_some() != self.domain.depth_h.is_some() {
            return Err(invalid("domain.depth_y", "depth_y and depth_h must be given together"));
        }
        if let Some(h) = &self.hole {
            h.shape()?;
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> Result<DomainSpec, ConfigError> {
        let depth = match (&self.domain.depth_y, &self.domain.depth_h) {
            (Some(y), Some(h)) => DepthProfile::Transverse { y: y.clone(), h: h.clone() },
            _ => DepthProfile::Constant(self.domain.depth),
        };
        let hole = match &self.hole {
            Some(h) => Some(HoleSpec { shape: h.shape()?, eps: h.eps, center: h.center }),
            None => None,
        };
        Ok(DomainSpec { ell: self.domain.ell, depth, hole, h_layer: self.domain.h_layer, gravity: self.domain.gravity })
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            method: self.solver.method,
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            ..SolverOptions::default()
        }
    }

    pub fn eta_grid(&self) -> EtaGridSpec {
        EtaGridSpec {
            coarse: self.solver.eta_count,
            refine_points: self.solver.refine_points,
            window: self.solver.refine_window,
        }
    }
}

/// 17 significant digits, fixed layout.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

/// A CSV file: one `#` line naming the subcommand and units, one line of
/// column names, then rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub comment: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, subcommand: &str, units: &str, columns: &[&'static str]) -> Self {
        Self {
            name,
            comment: format!("# canalband {subcommand}: {units}"),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.comment);
        s.push('\n');
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(v) => fmt_f64(*v),
                    Cell::I(v) => v.to_string(),
                    Cell::S(v) => v.clone(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, ConfigError> {
        write_file(dir, self.name, &self.render())
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, ConfigError> {
    fs::create_dir_all(dir).map_err(|source| ConfigError::Io { path: dir.into(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
    Ok(path)
}

pub fn dispersion_table(branches: &[ModeIndex], ell: f64, eta_grid: &[f64]) -> Table {
    let mut t = Table::new("dispersion.csv", "dispersion", "closed-form curves, eta in rad, mu dimensionless", &["j", "k", "eta", "mu"]);
    for &b in branches {
        for (eta, mu) in sample_curve(b, ell, eta_grid) {
            t.push(vec![(b.j as i64).into(), (b.k as i64).into(), eta.into(), mu.into()]);
        }
    }
    t
}

pub fn knots_table(knots: &[Knot]) -> Table {
    let mut t = Table::new(
        "knots.csv",
        "dispersion",
        "crossings of closed-form curves, eta_star in rad",
        &["eta_star", "mu_star", "j1", "k1", "j2", "k2", "slope1", "slope2", "kind"],
    );
    for k in knots {
        t.push(vec![
            k.eta_star.into(),
            k.mu_star.into(),
            (k.branch_a.j as i64).into(),
            (k.branch_a.k as i64).into(),
            (k.branch_b.j as i64).into(),
            (k.branch_b.k as i64).into(),
            k.slopes.0.into(),
            k.slopes.1.into(),
            k.kind.as_str().into(),
        ]);
    }
    t
}

fn opt(v: Option<f64>) -> Cell {
    match v {
        Some(x) => Cell::F(x),
        None => Cell::S("NA".into()),
    }
}

pub fn polarization_table(p: &PolarizationMatrix) -> Table {
    let mut t = Table::new(
        "polarization.csv",
        "polarization",
        "polarization matrix of the unit hole (positive convention), area of the unit hole",
        &["p11", "p12", "p22", "area", "provenance", "r_inf", "fit_residual"],
    );
    t.push(vec![
        p.p[0][0].into(),
        p.p[0][1].into(),
        p.p[1][1].into(),
        p.area.into(),
        p.provenance.as_str().into(),
        opt(p.r_inf),
        opt(p.fit_residual),
    ]);
    t
}

pub fn prediction_tables(preds: &[GapPrediction]) -> (Table, Table) {
    let mut t = Table::new(
        "prediction.csv",
        "predict-gap",
        "leading-order gap at the (0, 4pi^2) knot, mu dimensionless",
        &["eps", "center", "width", "p_plus", "p_minus", "ell"],
    );
    for p in preds {
        t.push(vec![
            p.eps.into(),
            p.center.into(),
            p.width.into(),
            p.script_p.p_plus.into(),
            p.script_p.p_minus.into(),
            p.ell.into(),
        ]);
    }
    let mut c = Table::new(
        "correction.csv",
        "predict-gap",
        "eigenvalues of the correction system against psi = eta / eps^2",
        &["psi", "mu_prime_plus", "mu_prime_minus"],
    );
    if let Some(p) = preds.first() {
        for &(psi, a, b) in &p.correction_curves {
            c.push(vec![psi.into(), a.into(), b.into()]);
        }
    }
    (t, c)
}

pub fn spectrum_table(samples: &[BlochSample], subcommand: &str) -> Table {
    let mut t = Table::new(
        "spectrum_eta.csv",
        subcommand,
        "eigenvalues mu, relative residuals, |v_theta| of M-normalised eigenvectors",
        &["eta", "index", "mu", "residual", "v_theta_abs"],
    );
    for s in samples {
        for (i, &mu) in s.eigenvalues.iter().enumerate() {
            t.push(vec![s.eta.into(), (i + 1).into(), mu.into(), s.residuals[i].into(), s.hole_trace_values[i].into()]);
        }
    }
    t
}

pub fn band_tables(bs: &BandStructure, gaps: &[GapMeasurement]) -> (Table, Table, Table) {
    let mut bands = Table::new("bands.csv", "bands", "band hulls over eta in [-pi, pi]", &["band_index", "lower", "upper"]);
    for b in &bs.bands {
        bands.push(vec![b.index.into(), b.lower.into(), b.upper.into()]);
    }
    let mut g = Table::new("gaps.csv", "bands", "spectral gaps between band hulls", &["m", "lower", "upper", "width", "center"]);
    for gap in gaps {
        g.push(vec![gap.m.into(), gap.lower.into(), gap.upper.into(), gap.width.into(), gap.center.into()]);
    }
    let mut d = Table::new("band_diagram.csv", "bands", "eigenvalue mu of band index at eta (rad)", &["eta", "index", "mu"]);
    for s in &bs.samples {
        for (i, &mu) in s.eigenvalues.iter().enumerate() {
            d.push(vec![s.eta.into(), (i + 1).into(), mu.into()]);
        }
    }
    (bands, g, d)
}

pub fn comparison_table(rows: &[GapComparison]) -> Table {
    let mut t = Table::new(
        "gap_comparison.csv",
        "bands",
        "measured gap at the (0, 4pi^2) knot against the leading-order law",
        &[
            "eps",
            "verdict",
            "measured_width",
            "predicted_width",
            "width_deviation",
            "measured_center",
            "predicted_center",
            "center_deviation",
        ],
    );
    for r in rows {
        t.push(vec![
            r.eps.into(),
            format!("{:?}", r.verdict).as_str().into(),
            opt(r.measured_width),
            r.predicted_width.into(),
            opt(r.width_deviation),
            opt(r.measured_center),
            r.predicted_center.into(),
            opt(r.center_deviation),
        ]);
    }
    t
}

pub fn xi_tables(sols: &[XiSolution]) -> (Table, Table, Table) {
    let mut p = Table::new(
        "xi_profile.csv",
        "boundary-layer",
        "strip cross-sections of W for the largest T; remainder is the cos(pi xi2) amplitude",
        &["xi1", "cross_section_mean_W", "remainder"],
    );
    let mut q = Table::new(
        "xi_quadrant.csv",
        "boundary-layer",
        "quadrant arcs |xi| = rho for the largest T; remainder is the RMS of W - (2/pi) ln rho",
        &["rho", "arc_mean", "remainder"],
    );
    if let Some(s) = sols.iter().max_by(|a, b| a.t.total_cmp(&b.t)) {
        for &(x, m, r) in &s.strip_profile {
            p.push(vec![x.into(), m.into(), r.into()]);
        }
        for &(rho, m, r) in &s.quadrant_profile {
            q.push(vec![rho.into(), m.into(), r.into()]);
        }
    }
    let mut c = Table::new("c_xi.csv", "boundary-layer", "constant of the strip far field xi1 + c_xi", &["T", "resolution", "c_xi"]);
    for s in sols {
        c.push(vec![s.t.into(), s.resolution.into(), s.c_xi.into()]);
    }
    (p, q, c)
}

pub fn lift_table(rows: &[(f64, f64, f64)], h_layer: f64, gravity: f64) -> Table {
    let mut t = Table::new(
        "lift.csv",
        "lift",
        &format!("Lambda = h mu and k = sqrt(g Lambda) with h = {}, g = {}", fmt_f64(h_layer), fmt_f64(gravity)),
        &["mu", "lambda", "k"],
    );
    for &(mu, l, k) in rows {
        t.push(vec![mu.into(), l.into(), k.into()]);
    }
    t
}

/// Static SVG band diagram: one polyline per band index.
pub fn band_diagram_svg(bs: &BandStructure) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let mu_max = bs.bands.iter().map(|b| b.upper).fold(1.0, f64::max);
    let x = |eta: f64| pad + (eta + std::f64::consts::PI) / (2.0 * std::f64::consts::PI) * (w - 2.0 * pad);
    let y = |mu: f64| h - pad - mu / mu_max * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for band in &bs.bands {
        let pts: Vec<String> = bs
            .samples
            .iter()
            .map(|smp| format!("{:.3},{:.3}", x(smp.eta), y(smp.eigenvalues[band.index - 1])))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="navy" stroke-width="1" points="{}"/>"#, pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

/// Reproducibility manifest: config echo, versions, produced files, wall time.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub version: String,
    pub threads: usize,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub notes: Vec<String>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, ConfigError> {
        let text = toml::to_string(self).expect("manifest serializes");
        write_file(dir, "manifest.toml", &text)
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "domain.ell = 0.2\n";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.domain.ell, 0.2);
        assert_eq!(c.solver.num_modes, 6);
        assert_eq!(c.solver.tol, 1e-8);
        assert!(c.hole.is_none());
        assert_eq!(c.domain_spec().unwrap().depth, DepthProfile::Constant(1.0));
    }

    #[test]
    fn dotted_keys_and_tables_agree() {
        let a = RunConfig::from_toml("domain.ell = 0.2\nsolver.target_h = 0.05\nhole.shape = \"disk\"\nhole.radius = 1.0\nhole.eps = 0.1\n").unwrap();
        let b = RunConfig::from_toml("[domain]\nell = 0.2\n[solver]\ntarget_h = 0.05\n[hole]\nshape = \"disk\"\nradius = 1.0\neps = 0.1\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.domain_spec().unwrap().hole.unwrap().shape, HoleShape::Disk { radius: 1.0 });
    }

    #[test]
    fn missing_key_is_named() {
        let e = RunConfig::from_toml("solver.tol = 1e-8\n").unwrap_err().to_string();
        assert!(e.contains("ell"), "{e}");
        let e = RunConfig::from_toml("domain.ell = 0.2\nhole.shape = \"ellipse\"\nhole.eps = 0.1\nhole.a = 1.0\n").unwrap_err().to_string();
        assert!(e.contains("hole.b"), "{e}");
    }

    #[test]
    fn unknown_and_invalid_keys_are_rejected() {
        let e = RunConfig::from_toml("domain.ell = 0.2\nsolver.tolerance = 1.0\n").unwrap_err().to_string();
        assert!(e.contains("tolerance"), "{e}");
        let e = RunConfig::from_toml("domain.ell = 0.2\nsolver.tol = -1.0\n").unwrap_err().to_string();
        assert!(e.contains("solver.tol"), "{e}");
    }

    #[test]
    fn config_round_trips() {
        let c = RunConfig::from_toml("domain.ell = 0.2\nhole.shape = \"segment\"\nhole.half_length = 0.5\nhole.eps = 0.1\n").unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
        let x = 39.47841760435743;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new("x.csv", "bands", "units", &["a", "b"]);
        t.push(vec![1usize.into(), 0.5.into()]);
        assert_eq!(t.render(), "# canalband bands: units\na,b\n1,5.0000000000000000e-1\n");
    }
}
