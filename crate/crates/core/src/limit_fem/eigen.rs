//! Lowest eigenpairs of the Hermitian pencil `(K, M)`.
//!
//! Two interchangeable paths share one contract:
//!
//! * dense: Cholesky `M = LLᴴ`, then the standard problem `L⁻¹KL⁻ᴴ`;
//! * shift-invert block subspace iteration with the shift `σ = −1`, where
//!   `K + M` is positive definite for every `η`. Each sweep applies
//!   `(K + M)⁻¹M`, `M`-orthonormalizes the block (classical Gram–Schmidt,
//!   twice), and performs a Rayleigh–Ritz projection.
//!
//! Returned vectors are `M`-orthonormal, i.e. normalized by
//! `(v, v) + |v_θ|² mes₂(θ) = 1`.

use faer::linalg::triangular_solve::solve_lower_triangular_in_place;
use faer::{Mat, Par, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::assemble::OperatorPair;
use super::LimitFemError;
use crate::sparse::{dot, norm, use_sequential_kernels, CsrMatrix, SparseCholesky};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    /// Dense for small problems, shift-invert otherwise.
    #[default]
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub method: EigenMethod,
    /// Bound on `‖Kv − μMv‖ / ‖Mv‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest dimension handled densely under [`EigenMethod::Auto`].
    pub dense_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { method: EigenMethod::Auto, tol: 1e-8, max_iter: 500, dense_limit: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochSample {
    pub eta: f64,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `|v_θ|` per mode; the phase is arbitrary. Zero without a hole.
    pub hole_trace_values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<Complex64>>,
}

/// `‖Kv − μMv‖ / ‖Mv‖`.
pub fn eigen_residual(ops: &OperatorPair, mu: f64, v: &[Complex64]) -> f64 {
    let kv = ops.k.matvec(v);
    let mv = ops.m.matvec(v);
    let r: Vec<Complex64> = kv.iter().zip(&mv).map(|(a, b)| a - b * mu).collect();
    norm(&r) / norm(&mv)
}

pub fn solve_lowest(ops: &OperatorPair, m: usize, opts: &SolverOptions) -> Result<BlochSample, LimitFemError> {
    use_sequential_kernels();
    let n = ops.dim();
    if m == 0 || m >= n {
        return Err(LimitFemError::BadModeCount { requested: m, dim: n });
    }
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::ShiftInvert => false,
        EigenMethod::Auto => n <= opts.dense_limit || 2 * block_size(m) >= n,
    };
    let (values, vectors) = if dense { dense_pairs(ops, m)? } else { shift_invert(ops, m, opts)? };
    let residuals: Vec<f64> = values.iter().zip(&vectors).map(|(&mu, v)| eigen_residual(ops, mu, v)).collect();
    if let Some((i, &r)) = residuals.iter().enumerate().find(|(_, &r)| !(r <= opts.tol)) {
        return Err(LimitFemError::SolverDivergence {
            eta: ops.eta,
            mode: i,
            residual: r,
            iterations: opts.max_iter,
        });
    }
    let hole_trace_values =
        vectors.iter().map(|v| ops.hole_dof.map_or(0.0, |h| v[h].norm())).collect();
    Ok(BlochSample { eta: ops.eta, eigenvalues: values, residuals, hole_trace_values, vectors })
}

fn block_size(m: usize) -> usize {
    (2 * m).max(m + 8)
}

fn dense_pairs(ops: &OperatorPair, m: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), LimitFemError> {
    let n = ops.dim();
    let kd = ops.k.to_dense();
    let md = ops.m.to_dense();
    let llt = md
        .llt(Side::Lower)
        .map_err(|e| LimitFemError::NotPositiveDefinite(format!("dense mass matrix: {e:?}")))?;
    let l = llt.L();
    // C = L⁻¹ K L⁻ᴴ, formed as L⁻¹ (L⁻¹ K)ᴴ since K is Hermitian
    let mut y = kd;
    solve_lower_triangular_in_place(l, y.as_mut(), Par::Seq);
    let mut c = y.adjoint().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), Par::Seq);
    let c = Mat::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)].conj()));
    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LimitFemError::NotPositiveDefinite(format!("dense eigensolver: {e:?}")))?;
    let s = evd.S().column_vector();
    // x = L⁻ᴴ q
    let q = evd.U();
    let mut x = Mat::<Complex64>::from_fn(n, m, |i, j| q[(i, j)]);
    let lh = l.adjoint().to_owned();
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(lh.as_ref(), x.as_mut(), Par::Seq);
    let values = (0..m).map(|j| s[j].re).collect();
    let vectors = (0..m).map(|j| (0..n).map(|i| x[(i, j)]).collect()).collect();
    Ok((values, vectors))
}

/// Seed of the deterministic starting block.
const START_SEED: u64 = 0x6361_6e61_6c62_616e;

fn shift_invert(
    ops: &OperatorPair,
    m: usize,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), LimitFemError> {
    let n = ops.dim();
    let p = block_size(m);
    let shifted = ops.k.combine(Complex64::new(1.0, 0.0), &ops.m, Complex64::new(1.0, 0.0));
    let chol = SparseCholesky::new(&shifted).map_err(|e| LimitFemError::NotPositiveDefinite(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut random_vector = move || -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    };
    let mut block: Vec<Vec<Complex64>> = (0..p).map(|_| random_vector()).collect();
    let mut values = Vec::new();
    for iter in 0..opts.max_iter {
        let mut y: Vec<Vec<Complex64>> = block.iter().map(|x| ops.m.matvec(x)).collect();
        chol.solve_columns(&mut y);
        m_orthonormalize(&ops.m, &mut y, &mut random_vector);
        let (theta, ritz) = rayleigh_ritz(&ops.k, &y)?;
        block = ritz;
        values = theta;
        let converged = (0..m).all(|j| eigen_residual(ops, values[j], &block[j]) <= 0.1 * opts.tol);
        if converged {
            log::trace!("shift-invert converged after {} sweeps at eta = {}", iter + 1, ops.eta);
            break;
        }
    }
    block.truncate(m);
    values.truncate(m);
    Ok((values, block))
}

/// Classical Gram–Schmidt with reorthogonalization in the `M` inner product.
fn m_orthonormalize(
    m: &CsrMatrix<Complex64>,
    cols: &mut [Vec<Complex64>],
    fresh: &mut impl FnMut() -> Vec<Complex64>,
) {
    let mut m_cols: Vec<Vec<Complex64>> = Vec::with_capacity(cols.len());
    for j in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let before = dot(&cols[j], &m.matvec(&cols[j])).re.sqrt();
            for _pass in 0..2 {
                for (i, mi) in m_cols.iter().enumerate() {
                    let c = dot(mi, &cols[j]);
                    let (qi, qj) = split_pair(cols, i, j);
                    for (a, b) in qj.iter_mut().zip(qi.iter()) {
                        *a -= c * b;
                    }
                }
            }
            let mv = m.matvec(&cols[j]);
            let after = dot(&cols[j], &mv).re.sqrt();
            if after > 1e-10 * before && after > 0.0 {
                let s = 1.0 / after;
                cols[j].iter_mut().for_each(|v| *v *= s);
                m_cols.push(mv.into_iter().map(|v| v * s).collect());
                break;
            }
            // the column collapsed onto the others: replace it
            attempts += 1;
            assert!(attempts < 10, "could not extend the M-orthonormal block");
            cols[j] = fresh();
        }
    }
}

fn split_pair(cols: &mut [Vec<Complex64>], i: usize, j: usize) -> (&Vec<Complex64>, &mut Vec<Complex64>) {
    debug_assert!(i < j);
    let (lo, hi) = cols.split_at_mut(j);
    (&lo[i], &mut hi[0])
}

/// Ritz pairs of `K` on the span of an `M`-orthonormal block, ascending.
fn rayleigh_ritz(
    k: &CsrMatrix<Complex64>,
    basis: &[Vec<Complex64>],
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), LimitFemError> {
    let p = basis.len();
    let kb: Vec<Vec<Complex64>> = basis.iter().map(|b| k.matvec(b)).collect();
    let h = Mat::<Complex64>::from_fn(p, p, |i, j| {
        let a = dot(&basis[i], &kb[j]);
        let b = dot(&basis[j], &kb[i]).conj();
        0.5 * (a + b)
    });
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LimitFemError::NotPositiveDefinite(format!("Rayleigh-Ritz: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let n = basis[0].len();
    let mut ritz = vec![vec![Complex64::new(0.0, 0.0); n]; p];
    for (j, out) in ritz.iter_mut().enumerate() {
        for (i, b) in basis.iter().enumerate() {
            let c = u[(i, j)];
            for (o, v) in out.iter_mut().zip(b) {
                *o += c * v;
            }
        }
    }
    Ok(((0..p).map(|j| s[j].re).collect(), ritz))
}
