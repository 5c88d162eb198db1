//! Triangulation of `ω ∖ θ^ε` with paired vertical edges.
//!
//! Without a hole the mesh is a structured grid with `⌈1/h⌉ × ⌈2ℓ/h⌉` cells.
//! With a hole, the rectangle boundary (left and right sides sharing one list
//! of `y₂` values) and a polygon of the hole boundary are inserted as
//! constraint edges of a Delaunay triangulation, which is then refined
//! without ever splitting a constraint edge, so the edge pairing and the
//! hole polygon survive refinement unchanged. Vertices are finally sorted
//! lexicographically, which makes the numbering independent of the
//! triangulator's internal order.

use std::fmt::Write as _;

use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::LimitFemError;
use crate::domain::{sample_hole_boundary, validate_domain, DomainSpec, HoleSpec};
use crate::p1;

/// Lower bound on the number of hole-boundary segments.
pub const MIN_HOLE_SEGMENTS: usize = 16;

/// Default hole resolution when the perimeter rule asks for fewer segments.
pub const DEFAULT_HOLE_SEGMENTS: usize = 64;

/// Smallest admissible triangle angle in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;

const EDGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MeshedProblem {
    pub ell: f64,
    pub target_h: f64,
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise triangles.
    pub triangles: Vec<[usize; 3]>,
    /// Depth `H` at each triangle centroid.
    pub depth: Vec<f64>,
    /// `(left, right)` node pairs on `y₁ = ∓1/2`, sorted by `y₂`.
    pub pairs: Vec<(usize, usize)>,
    /// Nodes on `∂θ^ε`, in boundary order.
    pub hole_nodes: Vec<usize>,
    /// Mass attached to the hole trace: the area of the hole polygon, so that
    /// mesh area plus hole mass is exactly `2ℓ`.
    pub hole_mass: f64,
    /// `ε²|θ¹|` of the smooth hole.
    pub hole_area_exact: f64,
    /// Unknown index of every node; slaves share their master's index.
    pub dof_of: Vec<usize>,
    /// Right-edge nodes, valued `e^{iη}` times their left partner.
    pub slave: Vec<bool>,
    pub n_dof: usize,
    pub hole_dof: Option<usize>,
}

impl MeshedProblem {
    pub fn has_hole(&self) -> bool {
        self.hole_dof.is_some()
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn mesh_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let p = self.triangle_points(t);
                p1::signed_area(p[0], p[1], p[2])
            })
            .sum()
    }

    pub fn min_angle_deg(&self) -> f64 {
        (0..self.triangles.len())
            .flat_map(|t| p1::angles(self.triangle_points(t)))
            .fold(f64::INFINITY, f64::min)
            .to_degrees()
    }

    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            for i in 0..3 {
                let (a, b) = (p[i], p[(i + 1) % 3]);
                m = m.max(f64::hypot(a[0] - b[0], a[1] - b[1]));
            }
        }
        m
    }

    /// `min_I Σ_{a ↦ I} Σ_{T ∋ a} |T|/12`, plus the hole mass on the hole
    /// unknown: a rigorous lower bound for the smallest eigenvalue of the
    /// assembled mass matrix, since every element mass matrix dominates
    /// `|T|/12` times the identity.
    pub fn mass_lower_bound(&self) -> f64 {
        let mut w = vec![0.0; self.n_dof];
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            let a = p1::signed_area(p[0], p[1], p[2]).abs() / 12.0;
            for &node in &self.triangles[t] {
                w[self.dof_of[node]] += a;
            }
        }
        if let Some(h) = self.hole_dof {
            w[h] += self.hole_mass;
        }
        w.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Plain-text dump: a versioned header followed by node, triangle,
    /// pairing and hole sections.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "canalband-mesh 1");
        let _ = writeln!(s, "# ell target_h hole_mass hole_area_exact");
        let _ = writeln!(
            s,
            "params {:.16e} {:.16e} {:.16e} {:.16e}",
            self.ell, self.target_h, self.hole_mass, self.hole_area_exact
        );
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.16e} {:.16e}", p[0], p[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for (t, d) in self.triangles.iter().zip(&self.depth) {
            let _ = writeln!(s, "{} {} {} {:.16e}", t[0], t[1], t[2], d);
        }
        let _ = writeln!(s, "pairs {}", self.pairs.len());
        for (l, r) in &self.pairs {
            let _ = writeln!(s, "{l} {r}");
        }
        let _ = writeln!(s, "hole {}", self.hole_nodes.len());
        for h in &self.hole_nodes {
            let _ = writeln!(s, "{h}");
        }
        s
    }

    /// Inverse of [`MeshedProblem::to_dump`].
    pub fn from_dump(text: &str) -> Result<Self, LimitFemError> {
        let bad = |what: &str| LimitFemError::MeshFailure(format!("mesh dump: {what}"));
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        if lines.next() != Some("canalband-mesh 1") {
            return Err(bad("unsupported header"));
        }
        let mut fields = |expect: &str| -> Result<Vec<String>, LimitFemError> {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let parts: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
            if !expect.is_empty() && parts.first().map(String::as_str) != Some(expect) {
                return Err(bad(&format!("expected section `{expect}`")));
            }
            Ok(parts)
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad index"));
        let params = fields("params")?;
        if params.len() != 5 {
            return Err(bad("params"));
        }
        let (ell, target_h, hole_mass, hole_area_exact) =
            (num(&params[1])?, num(&params[2])?, num(&params[3])?, num(&params[4])?);
        let count = |f: Vec<String>| -> Result<usize, LimitFemError> { int(f.get(1).ok_or_else(|| bad("count"))?) };
        let n = count(fields("nodes")?)?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let f = fields("")?;
            nodes.push([num(&f[0])?, num(&f[1])?]);
        }
        let n = count(fields("triangles")?)?;
        let mut triangles = Vec::with_capacity(n);
        let mut depth = Vec::with_capacity(n);
        for _ in 0..n {
            let f = fields("")?;
            triangles.push([int(&f[0])?, int(&f[1])?, int(&f[2])?]);
            depth.push(num(&f[3])?);
        }
        let n = count(fields("pairs")?)?;
        let mut pairs = Vec::with_capacity(n);
        for _ in 0..n {
            let f = fields("")?;
            pairs.push((int(&f[0])?, int(&f[1])?));
        }
        let n = count(fields("hole")?)?;
        let mut hole_nodes = Vec::with_capacity(n);
        for _ in 0..n {
            hole_nodes.push(int(&fields("")?[0])?);
        }
        Ok(finish(ell, target_h, nodes, triangles, depth, pairs, hole_nodes, hole_mass, hole_area_exact))
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    ell: f64,
    target_h: f64,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    depth: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    hole_nodes: Vec<usize>,
    hole_mass: f64,
    hole_area_exact: f64,
) -> MeshedProblem {
    let n = nodes.len();
    let mut slave = vec![false; n];
    for &(_, r) in &pairs {
        slave[r] = true;
    }
    let mut on_hole = vec![false; n];
    for &h in &hole_nodes {
        on_hole[h] = true;
    }
    let mut dof_of = vec![usize::MAX; n];
    let mut n_dof = 0;
    for i in 0..n {
        if !slave[i] && !on_hole[i] {
            dof_of[i] = n_dof;
            n_dof += 1;
        }
    }
    let hole_dof = if hole_nodes.is_empty() {
        None
    } else {
        for &h in &hole_nodes {
            dof_of[h] = n_dof;
        }
        n_dof += 1;
        Some(n_dof - 1)
    };
    for &(l, r) in &pairs {
        dof_of[r] = dof_of[l];
    }
    MeshedProblem {
        ell,
        target_h,
        nodes,
        triangles,
        depth,
        pairs,
        hole_nodes,
        hole_mass,
        hole_area_exact,
        dof_of,
        slave,
        n_dof,
        hole_dof,
    }
}

/// Number of segments used for `∂θ^ε` at mesh size `h`.
pub fn hole_segments(hole: &HoleSpec, target_h: f64) -> usize {
    let by_perimeter = (hole.eps * hole.shape.perimeter() / target_h).ceil() as usize;
    MIN_HOLE_SEGMENTS.max(by_perimeter).max(DEFAULT_HOLE_SEGMENTS)
}

pub fn build_mesh(domain: &DomainSpec, target_h: f64) -> Result<MeshedProblem, LimitFemError> {
    let domain = validate_domain(domain.clone())?;
    if !(target_h > 0.0 && target_h.is_finite()) {
        return Err(LimitFemError::MeshFailure(format!("target_h must be positive (got {target_h})")));
    }
    let mesh = match &domain.hole {
        None => structured(&domain, target_h),
        Some(hole) => unstructured(&domain, hole, target_h)?,
    };
    let min_angle = mesh.min_angle_deg();
    if min_angle < MIN_ANGLE_DEG {
        return Err(LimitFemError::MeshFailure(format!(
            "minimum angle {min_angle:.2} deg below {MIN_ANGLE_DEG} deg"
        )));
    }
    Ok(mesh)
}

fn structured(domain: &DomainSpec, h: f64) -> MeshedProblem {
    let ell = domain.ell;
    let nx = (1.0 / h).ceil().max(1.0) as usize;
    let ny = (2.0 * ell / h).ceil().max(1.0) as usize;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = if j == ny { ell } else { -ell + 2.0 * ell * j as f64 / ny as f64 };
        for i in 0..=nx {
            let x = if i == nx { 0.5 } else { -0.5 + i as f64 / nx as f64 };
            nodes.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let depth = triangles
        .iter()
        .map(|t| domain.depth.eval(p1::centroid([nodes[t[0]], nodes[t[1]], nodes[t[2]]])))
        .collect();
    let pairs = (0..=ny).map(|j| (id(0, j), id(nx, j))).collect();
    finish(ell, h, nodes, triangles, depth, pairs, Vec::new(), 0.0, 0.0)
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

fn inside_polygon(poly: &[[f64; 2]], q: [f64; 2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > q[1]) != (b[1] > q[1]) {
            let x = a[0] + (q[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if q[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn splits(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
}

fn unstructured(domain: &DomainSpec, hole: &HoleSpec, h: f64) -> Result<MeshedProblem, LimitFemError> {
    if !hole.shape.is_meshable() {
        return Err(LimitFemError::SegmentNotMeshable);
    }
    let ell = domain.ell;
    let [hx, hy] = hole.half_extents();
    let clearance = (0.5 - hole.center[0].abs() - hx).min(ell - hole.center[1].abs() - hy);
    if clearance < h {
        return Err(LimitFemError::MeshFailure(format!(
            "hole clearance {clearance:.4e} is below one mesh cell (target_h = {h})"
        )));
    }
    let polygon = sample_hole_boundary(hole, hole_segments(hole, h))?;
    let xs = splits(-0.5, 0.5, (1.0 / h).ceil() as usize);
    let mut ys = splits(-ell, ell, (2.0 * ell / h).ceil() as usize);

    for _attempt in 0..4 {
        let mesh = triangulate(h, &xs, &ys, &polygon)?;
        let left: Vec<usize> = (0..mesh.0.len()).filter(|&i| (mesh.0[i][0] + 0.5).abs() < EDGE_TOL).collect();
        let right: Vec<usize> = (0..mesh.0.len()).filter(|&i| (mesh.0[i][0] - 0.5).abs() < EDGE_TOL).collect();
        let ly: Vec<f64> = left.iter().map(|&i| mesh.0[i][1]).collect();
        let ry: Vec<f64> = right.iter().map(|&i| mesh.0[i][1]).collect();
        let paired = ly.len() == ry.len() && ly.iter().zip(&ry).all(|(a, b)| (a - b).abs() < EDGE_TOL);
        if !paired {
            // the triangulator inserted points on one side: mirror them and retry
            let mut all: Vec<f64> = ly.iter().chain(&ry).copied().collect();
            all.sort_by(f64::total_cmp);
            all.dedup_by(|a, b| (*a - *b).abs() < EDGE_TOL);
            ys = all;
            continue;
        }
        let (nodes, triangles) = mesh;
        let pairs: Vec<(usize, usize)> = left.into_iter().zip(right).collect();
        let mut hole_nodes = Vec::with_capacity(polygon.len());
        for q in &polygon {
            let found = nodes.binary_search_by(|p| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
            match found {
                Ok(i) => hole_nodes.push(i),
                Err(_) => {
                    return Err(LimitFemError::MeshFailure("hole polygon vertex lost in refinement".into()))
                }
            }
        }
        let depth = triangles
            .iter()
            .map(|t| domain.depth.eval(p1::centroid([nodes[t[0]], nodes[t[1]], nodes[t[2]]])))
            .collect();
        return Ok(finish(
            ell,
            h,
            nodes,
            triangles,
            depth,
            pairs,
            hole_nodes,
            polygon_area(&polygon),
            hole.area(),
        ));
    }
    Err(LimitFemError::MeshFailure("left and right edge traces could not be matched".into()))
}

type RawMesh = (Vec<[f64; 2]>, Vec<[usize; 3]>);

fn triangulate(
    h: f64,
    xs: &[f64],
    ys: &[f64],
    polygon: &[[f64; 2]],
) -> Result<RawMesh, LimitFemError> {
    let ell = ys[ys.len() - 1];
    // counterclockwise rectangle loop
    let mut outer: Vec<[f64; 2]> = Vec::new();
    outer.extend(xs[..xs.len() - 1].iter().map(|&x| [x, -ell]));
    outer.extend(ys[..ys.len() - 1].iter().map(|&y| [0.5, y]));
    outer.extend(xs[1..].iter().rev().map(|&x| [x, ell]));
    outer.extend(ys[1..].iter().rev().map(|&y| [-0.5, y]));
    let mut vertices: Vec<Point2<f64>> = Vec::with_capacity(outer.len() + polygon.len());
    let mut edges = Vec::with_capacity(outer.len() + polygon.len());
    for (k, p) in outer.iter().enumerate() {
        vertices.push(Point2::new(p[0], p[1]));
        edges.push([k, (k + 1) % outer.len()]);
    }
    let base = outer.len();
    for (k, p) in polygon.iter().enumerate() {
        vertices.push(Point2::new(p[0], p[1]));
        edges.push([base + k, base + (k + 1) % polygon.len()]);
    }
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
        .map_err(|e| LimitFemError::MeshFailure(format!("triangulation: {e:?}")))?;
    let params = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .keep_constraint_edges()
        .with_angle_limit(AngleLimit::from_deg(25.0))
        .with_max_allowed_area(3f64.sqrt() / 4.0 * h * h)
        .with_max_additional_vertices(4_000_000);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(LimitFemError::MeshFailure("refinement did not complete".into()));
    }

    let mut tris: Vec<[[f64; 2]; 3]> = Vec::new();
    for face in cdt.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| {
            let p = v.position();
            [p.x, p.y]
        });
        let centroid = p1::centroid([a, b, c]);
        if inside_polygon(polygon, centroid) {
            continue;
        }
        let t = if p1::signed_area(a, b, c) > 0.0 { [a, b, c] } else { [a, c, b] };
        tris.push(t);
    }
    // canonical numbering: lexicographic vertex order, then triangle order
    let mut pts: Vec<[f64; 2]> = tris.iter().flatten().copied().collect();
    pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    pts.dedup();
    let index = |q: [f64; 2]| {
        pts.binary_search_by(|p| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))).expect("vertex present")
    };
    let mut triangles: Vec<[usize; 3]> = tris
        .iter()
        .map(|t| {
            let ids = [index(t[0]), index(t[1]), index(t[2])];
            // rotate so the smallest index comes first, keeping orientation
            let r = (0..3).min_by_key(|&k| ids[k]).unwrap();
            [ids[r], ids[(r + 1) % 3], ids[(r + 2) % 3]]
        })
        .collect();
    triangles.sort_unstable();
    Ok((pts, triangles))
}
