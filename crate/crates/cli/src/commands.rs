use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use canalband::band_scan::{self, bands_and_gaps, compare_gap, gap_at, BandScanError};
use canalband::boundary_layer::{self, BoundaryLayerError};
use canalband::dispersion::{branches_below, enumerate_knots, principal_knot};
use canalband::domain::{validate_domain, DomainError, HoleShape};
use canalband::io::{self, ConfigError, Manifest, PolarizationSource, RunConfig, Table};
use canalband::limit_fem::{build_mesh, solve_at, LimitFemError};
use canalband::perturbation::{lift_to_physical, predict_gap, script_p};
use canalband::polarization::{polarization_analytic, polarization_numeric, PolarizationError, PolarizationMatrix};

use crate::{Cli, Command};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<LimitFemError> for CliError {
    fn from(e: LimitFemError) -> Self {
        match e {
            LimitFemError::NotPositiveDefinite(_) | LimitFemError::SolverDivergence { .. } => CliError::Solver(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<BandScanError> for CliError {
    fn from(e: BandScanError) -> Self {
        match e {
            BandScanError::BadGrid(_) => CliError::Invalid(e.to_string()),
            BandScanError::Mesh(inner) => inner.into(),
            BandScanError::Solver { source, .. } => match CliError::from(source) {
                CliError::Invalid(m) => CliError::Invalid(m),
                CliError::Solver(m) => CliError::Solver(m),
            },
            BandScanError::KnotMismatch { .. } => CliError::Solver(e.to_string()),
        }
    }
}

impl From<PolarizationError> for CliError {
    fn from(e: PolarizationError) -> Self {
        match e {
            PolarizationError::FitResidualTooLarge { .. } | PolarizationError::MeshFailure(_) => CliError::Solver(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<BoundaryLayerError> for CliError {
    fn from(e: BoundaryLayerError) -> Self {
        match e {
            BoundaryLayerError::BadTruncation(_) | BoundaryLayerError::BadResolution(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
    notes: Vec<String>,
}

impl Outputs<'_> {
    fn table(&mut self, t: &Table) -> Result<(), CliError> {
        t.write(self.dir)?;
        self.files.push(t.name.to_string());
        Ok(())
    }

    fn raw(&mut self, name: &'static str, text: &str) -> Result<(), CliError> {
        io::write_file(self.dir, name, text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn note(&mut self, s: String) {
        log::info!("{s}");
        self.notes.push(s);
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Invalid("cli: missing required option --config".into()))?;
    let cfg = RunConfig::load(path)?;
    let threads = if cli.threads == 0 { rayon::current_num_threads() } else { cli.threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Invalid(format!("cli: invalid --threads ({e})")))?;
    let mut out = Outputs { dir: &cli.out, files: Vec::new(), notes: Vec::new() };
    pool.install(|| dispatch(cli.command, &cfg, &mut out))?;
    Manifest {
        subcommand: cli.command.name().to_string(),
        version: io::VERSION.to_string(),
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: out.files,
        notes: out.notes,
        config: cfg,
    }
    .write(&cli.out)?;
    Ok(())
}

fn dispatch(cmd: Command, cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    match cmd {
        Command::Dispersion => dispersion(cfg, out),
        Command::Polarization => {
            let p = polarization(cfg)?;
            out.table(&io::polarization_table(&p))
        }
        Command::PredictGap => predict(cfg, out),
        Command::Solve => solve(cfg, out),
        Command::Bands => bands(cfg, out),
        Command::BoundaryLayer => boundary(cfg, out),
        Command::Lift => lift(cfg, out),
    }
}

fn dispersion(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let domain = validate_domain(cfg.domain_spec()?)?;
    let n = cfg.dispersion.points;
    let grid: Vec<f64> = (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect();
    let branches = branches_below(domain.ell, cfg.dispersion.mu_max);
    out.table(&io::dispersion_table(&branches, domain.ell, &grid))?;
    let knots = enumerate_knots(domain.ell, cfg.dispersion.mu_max);
    out.note(format!("{} branches and {} knots below mu_max = {}", branches.len(), knots.len(), cfg.dispersion.mu_max));
    out.table(&io::knots_table(&knots))
}

fn hole_shape(cfg: &RunConfig) -> Result<HoleShape, CliError> {
    let hole = cfg.hole.as_ref().ok_or_else(|| CliError::Invalid("config: missing required table `hole`".into()))?;
    Ok(hole.shape()?)
}

fn polarization(cfg: &RunConfig) -> Result<PolarizationMatrix, CliError> {
    let shape = hole_shape(cfg)?;
    Ok(match (cfg.polarization.source, shape) {
        (PolarizationSource::Analytic, _) | (_, HoleShape::Segment { .. }) => polarization_analytic(&shape)?,
        (PolarizationSource::Numeric, _) => polarization_numeric(&shape, cfg.polarization.r_inf, cfg.polarization.resolution)?,
    })
}

fn predict(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let domain = validate_domain(cfg.domain_spec()?)?;
    let p = polarization(cfg)?;
    let eps = cfg.hole.as_ref().map(|h| h.eps).unwrap_or(0.0);
    let pred = predict_gap(script_p(&p), domain.ell, eps);
    if pred.undecided {
        out.note("P_minus = 0: gap existence undecided by leading order".into());
    }
    out.table(&io::polarization_table(&p))?;
    let (t, c) = io::prediction_tables(&[pred]);
    out.table(&t)?;
    out.table(&c)
}

fn solve(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let domain = cfg.domain_spec()?;
    let mesh = build_mesh(&domain, cfg.solver.target_h)?;
    out.note(format!("mesh: {} triangles, {} unknowns", mesh.triangles.len(), mesh.n_dof));
    let s = solve_at(&mesh, cfg.solver.eta, cfg.solver.num_modes, &cfg.solver_options())?;
    out.table(&io::spectrum_table(&[s], "solve"))
}

fn bands(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let domain = cfg.domain_spec()?;
    let bs = band_scan::sweep(&domain, &cfg.eta_grid(), cfg.solver.num_modes, cfg.solver.target_h, &cfg.solver_options())?;
    if bs.single_band {
        out.note("single band: gap detection impossible".into());
    }
    let gaps = bands_and_gaps(&bs);
    let (b, g, d) = io::band_tables(&bs, &gaps);
    out.table(&b)?;
    out.table(&g)?;
    out.table(&d)?;
    out.table(&io::spectrum_table(&bs.samples, "bands"))?;
    if cfg.output.svg {
        out.raw("band_diagram.svg", &io::band_diagram_svg(&bs))?;
    }
    if let Some(hole) = &domain.hole {
        if !matches!(hole.shape, HoleShape::Segment { .. }) && bs.bands.len() >= 3 {
            let pred = predict_gap(script_p(&polarization(cfg)?), domain.ell, hole.eps);
            let cmp = compare_gap(gap_at(&gaps, &principal_knot()), &pred)?;
            out.note(format!("principal knot: {:?}", cmp.verdict));
            out.table(&io::comparison_table(&[cmp]))?;
        }
    }
    Ok(())
}

fn boundary(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let res = cfg.boundary_layer.resolution;
    let mut sols = Vec::new();
    for &t in &cfg.boundary_layer.truncations {
        let sol = boundary_layer::solve_w(t, res)?;
        let c = boundary_layer::extract_c_xi(&sol)?;
        let rep = boundary_layer::check_asymptotics(&sol);
        out.note(format!(
            "T = {t}: c_xi = {}, strip slope {:.4} (expected pi), quadrant slope {:.4} (expected -1){}",
            io::fmt_f64(c),
            rep.strip_slope,
            rep.quadrant_slope,
            if rep.low_confidence { ", low confidence" } else { "" }
        ));
        sols.push(sol);
    }
    if let Some(s) = sols.first() {
        out.note(format!("normalization: {}", s.normalization));
    }
    let (p, q, c) = io::xi_tables(&sols);
    out.table(&p)?;
    out.table(&q)?;
    out.table(&c)
}

fn lift(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let d = &cfg.domain;
    let mus: Vec<f64> = if cfg.lift.mu.is_empty() {
        enumerate_knots(d.ell, cfg.dispersion.mu_max).iter().map(|k| k.mu_star).collect()
    } else {
        cfg.lift.mu.clone()
    };
    let rows = mus
        .iter()
        .map(|&mu| lift_to_physical(mu, d.h_layer, d.gravity).map(|(l, k)| (mu, l, k)))
        .collect::<Result<Vec<_>, _>>()?;
    out.table(&io::lift_table(&rows, d.h_layer, d.gravity))
}
