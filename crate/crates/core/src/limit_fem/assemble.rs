//! Quasiperiodic assembly of the stiffness and mass forms.
//!
//! A node `a` carries the value `p_a U_{I(a)}`, where `I(a)` is its unknown
//! and `p_a = e^{iη}` on the right edge, `1` elsewhere. Element contributions
//! therefore enter as `conj(p_a) p_b K_ab`, which keeps the pencil Hermitian.
//! All hole-boundary nodes share one unknown `v_θ`; its lumped mass is added
//! to the diagonal of the mass matrix.

use num_complex::Complex64;

use super::mesh::MeshedProblem;
use crate::p1;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Treatment of `∂θ^ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HoleCondition {
    /// One unknown constant trace with the lumped hole mass.
    #[default]
    ConstantTrace,
    /// Constant trace without the lumped mass: a subspace of the Neumann space.
    ConstantTraceMassless,
    /// Independent nodal values, natural Neumann condition.
    Neumann,
}

#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub eta: f64,
    pub k: CsrMatrix<Complex64>,
    pub m: CsrMatrix<Complex64>,
    /// Unknown index and phase of every mesh node.
    pub node_dof: Vec<usize>,
    pub node_phase: Vec<Complex64>,
    pub hole_dof: Option<usize>,
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.k.n_rows
    }

    /// Nodal values of the finite element function with unknowns `u`.
    pub fn expand(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.node_dof.iter().zip(&self.node_phase).map(|(&i, &p)| p * u[i]).collect()
    }

    /// Unknown vector of the constant function `c`.
    pub fn constant(&self, c: Complex64) -> Vec<Complex64> {
        vec![c; self.dim()]
    }
}

pub fn assemble(mesh: &MeshedProblem, eta: f64) -> OperatorPair {
    assemble_with(mesh, eta, HoleCondition::ConstantTrace)
}

pub fn assemble_with(mesh: &MeshedProblem, eta: f64, hole: HoleCondition) -> OperatorPair {
    let phase = Complex64::from_polar(1.0, eta);
    let one = Complex64::new(1.0, 0.0);
    let node_phase: Vec<Complex64> = mesh.slave.iter().map(|&s| if s { phase } else { one }).collect();

    let (node_dof, n_dof, hole_dof) = match (hole, mesh.hole_dof) {
        (HoleCondition::Neumann, Some(h)) => {
            // unmerge: the merged unknown is the last one, so every hole node
            // can take a fresh index from there on
            debug_assert_eq!(h, mesh.n_dof - 1);
            let mut dof = mesh.dof_of.clone();
            let mut n = h;
            for &node in &mesh.hole_nodes {
                dof[node] = n;
                n += 1;
            }
            (dof, n, None)
        }
        _ => (mesh.dof_of.clone(), mesh.n_dof, mesh.hole_dof),
    };

    let cap = 9 * mesh.triangles.len();
    let mut kb = TripletBuilder::with_capacity(n_dof, n_dof, cap);
    let mut mb = TripletBuilder::with_capacity(n_dof, n_dof, cap + 1);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (ke, area) = p1::stiffness(mesh.triangle_points(t));
        let me = p1::mass(area);
        let depth = mesh.depth[t];
        for a in 0..3 {
            let (i, pa) = (node_dof[tri[a]], node_phase[tri[a]].conj());
            for b in 0..3 {
                let (j, pb) = (node_dof[tri[b]], node_phase[tri[b]]);
                let c = pa * pb;
                kb.push(i, j, c * (depth * ke[a][b]));
                mb.push(i, j, c * me[a][b]);
            }
        }
    }
    if let (Some(h), HoleCondition::ConstantTrace) = (hole_dof, hole) {
        mb.push(h, h, Complex64::new(mesh.hole_mass, 0.0));
    }
    OperatorPair { eta, k: kb.build(), m: mb.build(), node_dof, node_phase, hole_dof }
}
