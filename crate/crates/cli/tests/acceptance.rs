//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use canalband::band_scan::{bands_and_gaps, compare_gap, deviation_decreases, gap_at, sweep, EtaGridSpec, GapComparison};
use canalband::boundary_layer::{check_asymptotics, extract_c_xi, solve_w};
use canalband::dispersion::{classify_knot, closed_form_spectrum, enumerate_knots, mu_jk, principal_knot, KnotKind, ModeIndex};
use canalband::domain::{DomainSpec, HoleShape, HoleSpec};
use canalband::limit_fem::{assemble, build_mesh, solve_at, MeshedProblem, SolverOptions};
use canalband::perturbation::{predict_gap, script_p};
use canalband::polarization::{polarization_numeric, thin_ellipse_shape, EllipseAxes};
use canalband::sparse::SparseCholesky;

const ELL: f64 = 0.2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(results: &mut Vec<bool>, id: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = out.pass && in_time;
    println!(
        "[{}] criterion {id}: {title} | {} | {:.1}s{}",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        match limit {
            Some(l) if in_time => format!(" (limit {}s)", l.as_secs()),
            Some(l) => format!(" (limit {}s exceeded)", l.as_secs()),
            None => String::new(),
        }
    );
    results.push(pass);
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn c1() -> Outcome {
    let four = 4.0 * PI * PI;
    let e = [
        (mu_jk(ModeIndex::new(1, 0), 0.0, ELL) - four).abs(),
        (mu_jk(ModeIndex::new(-1, 0), 0.0, ELL) - four).abs(),
        (mu_jk(ModeIndex::new(0, 0), PI, ELL) - PI * PI).abs(),
    ];
    let worst = e.iter().cloned().fold(0.0, f64::max);
    Outcome { pass: worst <= 1e-12, detail: format!("max |error| = {worst:.2e} (tol 1e-12)") }
}

fn c2() -> Outcome {
    let opts = SolverOptions::default();
    let coarse = build_mesh(&DomainSpec::rectangle(ELL), 1.0 / 32.0).unwrap();
    let fine = build_mesh(&DomainSpec::rectangle(ELL), 1.0 / 64.0).unwrap();
    let mut worst_rel: f64 = 0.0;
    let (mut rmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &eta in &[0.0, 0.5 * PI, PI] {
        let exact = closed_form_spectrum(ELL, eta, 6);
        let a = solve_at(&coarse, eta, 6, &opts).unwrap().eigenvalues;
        let b = solve_at(&fine, eta, 6, &opts).unwrap().eigenvalues;
        for i in 0..6 {
            let (ea, eb) = ((a[i] - exact[i]).abs(), (b[i] - exact[i]).abs());
            if exact[i] > 1e-12 {
                worst_rel = worst_rel.max(eb / exact[i]);
            } else {
                worst_rel = worst_rel.max(eb);
            }
            if eb > 1e-9 {
                let r = ea / eb;
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
        }
    }
    Outcome {
        pass: worst_rel <= 5e-3 && rmin >= 3.5 && rmax <= 4.5,
        detail: format!("max rel error at h=1/64 = {worst_rel:.3e} (tol 5e-3); error ratio 1/32:1/64 in [{rmin:.3}, {rmax:.3}] (need [3.5, 4.5])"),
    }
}

fn hole_domain(shape: HoleShape, eps: f64) -> DomainSpec {
    DomainSpec::rectangle(ELL).with_hole(HoleSpec::centered(shape, eps))
}

fn c3() -> Outcome {
    let opts = SolverOptions::default();
    let mut worst0: f64 = 0.0;
    let mut min_half = f64::INFINITY;
    for d in [DomainSpec::rectangle(ELL), hole_domain(HoleShape::Disk { radius: 1.0 }, 0.1)] {
        let mesh = build_mesh(&d, 1.0 / 32.0).unwrap();
        worst0 = worst0.max(solve_at(&mesh, 0.0, 2, &opts).unwrap().eigenvalues[0].abs());
        min_half = min_half.min(solve_at(&mesh, 0.5 * PI, 2, &opts).unwrap().eigenvalues[0]);
    }
    Outcome {
        pass: worst0 <= 1e-8 && min_half >= 1e-4,
        detail: format!("max |mu1(0)| = {worst0:.2e} (tol 1e-8); min mu1(pi/2) = {min_half:.4} (need >= 1e-4)"),
    }
}

fn acceptance_meshes() -> Vec<MeshedProblem> {
    let mut m = vec![
        build_mesh(&DomainSpec::rectangle(ELL), 1.0 / 32.0).unwrap(),
        build_mesh(&DomainSpec::rectangle(ELL), 1.0 / 64.0).unwrap(),
        build_mesh(&hole_domain(HoleShape::Disk { radius: 1.0 }, 0.1), 1.0 / 32.0).unwrap(),
    ];
    for eps in [0.2, 0.1, 0.05] {
        m.push(build_mesh(&hole_domain(gap_ellipse(), eps), GAP_H).unwrap());
    }
    m
}

fn c4() -> Outcome {
    let opts = SolverOptions::default();
    let mut sym: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut min_mass_bound = f64::INFINITY;
    let mut m_chol = true;
    for mesh in acceptance_meshes() {
        for &eta in &[0.3, 1.1, 2.5] {
            let a = solve_at(&mesh, eta, 6, &opts).unwrap().eigenvalues;
            let b = solve_at(&mesh, -eta, 6, &opts).unwrap().eigenvalues;
            for (x, y) in a.iter().zip(&b) {
                sym = sym.max((x - y).abs());
            }
            let ops = assemble(&mesh, eta);
            herm = herm.max(ops.k.hermitian_defect()).max(ops.m.hermitian_defect());
            m_chol &= SparseCholesky::new(&ops.m).is_ok();
        }
        min_mass_bound = min_mass_bound.min(mesh.mass_lower_bound());
    }
    Outcome {
        pass: sym <= 1e-8 && herm <= 1e-12 && m_chol && min_mass_bound > 0.0,
        detail: format!(
            "max |mu(eta) - mu(-eta)| = {sym:.2e} (tol 1e-8); Hermitian defect {herm:.2e} (tol 1e-12); M Cholesky ok = {m_chol}, lambda_min(M) >= {min_mass_bound:.3e}"
        ),
    }
}

fn c5() -> Outcome {
    let disk = polarization_numeric(&HoleShape::Disk { radius: 1.0 }, 20.0, 128).unwrap();
    let p = disk.p;
    let oracle = 2.0 * PI;
    let iso12 = p[0][1].abs() / p[0][0];
    let iso = (p[0][0] - p[1][1]).abs() / p[0][0];
    let err = rel(p[0][0], oracle).max(rel(p[1][1], oracle));
    let thin = polarization_numeric(&thin_ellipse_shape(0.05, EllipseAxes::Full), 20.0, 128).unwrap();
    let target = PI * PI / 4.0;
    let thin_err = rel(thin.p[0][0], target);
    Outcome {
        pass: iso12 < 1e-3 && iso < 1e-3 && err <= 0.01 && thin_err <= 0.05,
        detail: format!(
            "disk |P12|/P11 = {iso12:.1e}, |P11-P22|/P11 = {iso:.1e}, rel error vs 2 pi r^2 = {err:.2e}; thin ellipse P11 = {:.4} vs pi^2/4 = {target:.4} (rel {thin_err:.3}, tol 0.05)",
            thin.p[0][0]
        ),
    }
}

const GAP_H: f64 = 1.0 / 48.0;
const GAP_MODES: usize = 6;

fn gap_ellipse() -> HoleShape {
    HoleShape::Ellipse { a: 1.0, b: 0.5, rotation: 0.0 }
}

fn gap_grid() -> EtaGridSpec {
    EtaGridSpec { coarse: 17, ..EtaGridSpec::default() }
}

fn c6() -> Outcome {
    let sp = script_p(&polarization_numeric(&gap_ellipse(), 20.0, 128).unwrap());
    let mut rows: Vec<GapComparison> = Vec::new();
    let mut exists = true;
    let mut parts = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let bs = sweep(&hole_domain(gap_ellipse(), eps), &gap_grid(), GAP_MODES, GAP_H, &SolverOptions::default()).unwrap();
        let gaps = bands_and_gaps(&bs);
        let pred = predict_gap(sp, ELL, eps);
        let cmp = compare_gap(gap_at(&gaps, &principal_knot()), &pred).unwrap();
        exists &= cmp.measured_width.is_some() || sp.p_minus_is_zero();
        parts.push(format!(
            "eps={eps}: width/eps^2 = {} vs {:.2}, center = {} vs {:.4}",
            cmp.width_over_eps2.map_or("none".into(), |v| format!("{v:.2}")),
            cmp.predicted_width_over_eps2,
            cmp.measured_center.map_or("none".into(), |v| format!("{v:.4}")),
            cmp.predicted_center
        ));
        rows.push(cmp);
    }
    let last = rows.last().unwrap();
    let wdev = last.width_deviation.map(f64::abs).unwrap_or(f64::INFINITY);
    let cdev = last.center_deviation.map(f64::abs).unwrap_or(f64::INFINITY);
    let decreasing = deviation_decreases(&rows);
    Outcome {
        pass: exists && wdev <= 0.15 && decreasing && cdev <= 0.05,
        detail: format!(
            "P+ = {:.3}, P- = {:.3}; {}; gaps exist = {exists}; width dev at 0.05 = {wdev:.3} (tol 0.15); deviation decreasing = {decreasing}; center dev at 0.05 = {cdev:.4} (tol 0.05)",
            sp.p_plus,
            sp.p_minus,
            parts.join("; ")
        ),
    }
}

fn c7() -> Outcome {
    let knots = enumerate_knots(ELL, 70.0);
    let principal = principal_knot();
    let principal_ok = classify_knot(&principal) == KnotKind::Disintegrating;
    let persistent = knots
        .iter()
        .find(|k| {
            let pair = [k.branch_a, k.branch_b];
            pair.contains(&ModeIndex::new(0, 1)) && pair.contains(&ModeIndex::new(1, 0))
        })
        .copied();
    let Some(pk) = persistent else {
        return Outcome { pass: false, detail: "no (0,1)x(1,0) crossing found".into() };
    };
    let pk_ok = pk.kind == KnotKind::Persistent && (pk.eta_star - 1.767).abs() < 1e-3;
    let bs = sweep(&hole_domain(gap_ellipse(), 0.1), &gap_grid(), GAP_MODES, GAP_H, &SolverOptions::default()).unwrap();
    let gaps = bands_and_gaps(&bs);
    let persistent_knots: Vec<_> = knots.iter().filter(|k| k.kind == KnotKind::Persistent).collect();
    let open: Vec<String> = persistent_knots
        .iter()
        .filter(|k| gaps.iter().any(|g| g.lower <= k.mu_star && k.mu_star <= g.upper))
        .map(|k| format!("({:.3}, {:.3})", k.eta_star, k.mu_star))
        .collect();
    Outcome {
        pass: principal_ok && pk_ok && open.is_empty(),
        detail: format!(
            "(0, 4pi^2) disintegrating = {principal_ok}; (0,1)x(1,0) at eta* = {:.4}, mu* = {:.3} is {:?}; persistent knots inside a measured gap: {}",
            pk.eta_star,
            pk.mu_star,
            pk.kind,
            if open.is_empty() { "none".into() } else { open.join(" ") }
        ),
    }
}

fn c8() -> Outcome {
    const RES: usize = 16;
    let s8 = solve_w(8.0, RES).unwrap();
    let s12 = solve_w(12.0, RES).unwrap();
    let (c8, c12) = (extract_c_xi(&s8).unwrap(), extract_c_xi(&s12).unwrap());
    let rep = check_asymptotics(&s12);
    let dc = (c8 - c12).abs();
    Outcome {
        pass: dc < 1e-6 && rep.strip_ok && rep.quadrant_ok,
        detail: format!(
            "c(8) = {c8:.9}, c(12) = {c12:.9}, |diff| = {dc:.2e} (tol 1e-6); strip slope {:.4} (pi +- 10%); quadrant slope {:.4} (-1 +- 10%)",
            rep.strip_slope, rep.quadrant_slope
        ),
    }
}

const BANDS_CONFIG: &str = "domain.ell = 0.2
hole.shape = \"ellipse\"
hole.a = 1.0
hole.b = 0.5
hole.eps = 0.1
solver.target_h = 0.0625
solver.num_modes = 4
solver.eta_count = 17
polarization.source = \"analytic\"
";

fn run_bands(config: &Path, out: &Path, threads: usize) -> bool {
    Command::new(env!("CARGO_BIN_EXE_canalband"))
        .args(["--quiet", "--threads", &threads.to_string(), "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("bands")
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn c9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bands.toml");
    std::fs::write(&config, BANDS_CONFIG).unwrap();
    let runs = [(1, "a"), (4, "b"), (4, "c")];
    let mut outputs = Vec::new();
    for (threads, name) in runs {
        let dir = tmp.path().join(name);
        if !run_bands(&config, &dir, threads) {
            return Outcome { pass: false, detail: format!("bands run with {threads} threads failed") };
        }
        outputs.push(csv_files(&dir));
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    Outcome {
        pass: identical && !outputs[0].is_empty(),
        detail: format!("{} CSV files; byte-identical across threads 1/4/4 = {identical}", outputs[0].len()),
    }
}

fn main() {
    canalband::sparse::use_sequential_kernels();
    let mut results = Vec::new();
    let s = |n| Some(Duration::from_secs(n));
    criterion(&mut results, 1, "closed-form regression", s(1), c1);
    criterion(&mut results, 2, "FEM vs closed form, no hole", s(120), c2);
    criterion(&mut results, 3, "kernel exactness", s(60), c3);
    criterion(&mut results, 4, "Hermitian and symmetry suite", None, c4);
    criterion(&mut results, 5, "polarization cross-check", s(120), c5);
    criterion(&mut results, 6, "gap law at the (0, 4pi^2) knot", s(1200), c6);
    criterion(&mut results, 7, "knot classification", None, c7);
    criterion(&mut results, 8, "boundary layer", s(300), c8);
    criterion(&mut results, 9, "determinism of `bands`", None, c9);
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
