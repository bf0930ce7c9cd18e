//! Ground state, ground energy and first gap of a symmetric operator.
//!
//! Small spaces are diagonalized densely. Larger spaces use a thick-restart
//! Lanczos iteration with full (twice-iterated Gram–Schmidt)
//! reorthogonalization. The Krylov basis is capped at `max_basis` vectors,
//! so memory stays at `max_basis + keep + 1` vectors of the full dimension.

use log::{debug, warn};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{axpy, dot, norm, scale, LinearOperator};

/// Dense diagonalization is used up to this dimension when `Method::Auto`.
pub const DENSE_LIMIT: usize = 4096;

/// Gaps below this are treated as a degenerate ground state.
pub const DEGENERACY_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Force(Method),
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    /// Maximum number of operator applications for Lanczos.
    pub max_iter: usize,
    pub method: MethodChoice,
    pub seed: u64,
    pub max_basis: usize,
    pub keep: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
            method: MethodChoice::Auto,
            seed: 0x0dd5_eed5,
            max_basis: 48,
            keep: 14,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundStateSolution {
    pub energy_0: f64,
    pub energy_1: f64,
    pub gap: f64,
    pub amplitudes: Vec<f64>,
    pub method: Method,
    /// `‖Hψ − E₀ψ‖₂`, computed explicitly.
    pub residual: f64,
}

/// Ground state with the automatic method choice.
pub fn ground_state(
    op: &dyn LinearOperator,
    tol: f64,
    max_iter: usize,
) -> Result<GroundStateSolution> {
    ground_state_with(op, &SolverOptions { tol, max_iter, ..Default::default() })
}

pub fn ground_state_with(
    op: &dyn LinearOperator,
    opts: &SolverOptions,
) -> Result<GroundStateSolution> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Domain(format!("solver tolerance must be positive, got {}", opts.tol)));
    }
    let n = op.dim();
    if n < 2 {
        return Err(Error::Domain("need at least two basis states for a gap".into()));
    }
    let method = match opts.method {
        MethodChoice::Force(m) => m,
        MethodChoice::Auto if n <= DENSE_LIMIT => Method::Dense,
        MethodChoice::Auto => Method::Lanczos,
    };
    let (e0, e1, mut psi) = match method {
        Method::Dense => dense_lowest(op),
        Method::Lanczos => lanczos_lowest(op, opts)?,
    };
    if psi[0] < 0.0 {
        scale(-1.0, &mut psi);
    }
    let nrm = norm(&psi);
    scale(1.0 / nrm, &mut psi);
    let residual = residual_norm(op, &psi, e0);
    let gap = e1 - e0;
    if gap < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateGroundState { gap });
    }
    Ok(GroundStateSolution { energy_0: e0, energy_1: e1, gap, amplitudes: psi, method, residual })
}

fn residual_norm(op: &dyn LinearOperator, psi: &[f64], e: f64) -> f64 {
    let mut hpsi = vec![0.0; psi.len()];
    op.apply_into(psi, &mut hpsi);
    axpy(-e, psi, &mut hpsi);
    norm(&hpsi)
}

fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

fn dense_lowest(op: &dyn LinearOperator) -> (f64, f64, Vec<f64>) {
    let (values, vectors) = sorted_eigen(crate::operator::to_dense(op));
    (values[0], values[1], vectors.column(0).iter().copied().collect())
}

/// Complete spectrum of a small operator, ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<f64>,
}

pub fn full_spectrum(op: &dyn LinearOperator) -> Result<Spectrum> {
    if op.dim() > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: op.dim(), limit: DENSE_LIMIT });
    }
    let (values, vectors) = sorted_eigen(crate::operator::to_dense(op));
    Ok(Spectrum { values, vectors })
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm(&v);
    scale(1.0 / nv, &mut v);
    v
}

/// Orthogonalizes `w` against `basis` twice, returning the accumulated
/// projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let h = dot(v, w);
            *c += h;
            axpy(-h, v, w);
        }
    }
    coeffs
}

fn lanczos_lowest(op: &dyn LinearOperator, opts: &SolverOptions) -> Result<(f64, f64, Vec<f64>)> {
    let n = op.dim();
    let max_basis = opts.max_basis.min(n).max(3);
    let keep = opts.keep.clamp(2, max_basis - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<f64>> = vec![random_unit(n, &mut rng)];
    let mut t = DMatrix::<f64>::zeros(max_basis, max_basis);
    let mut w = vec![0.0; n];
    let mut matvecs = 0usize;
    let mut best = f64::INFINITY;

    loop {
        // extend until the basis is full; the last column yields the residual vector
        let beta;
        let next;
        loop {
            let j = basis.len() - 1;
            op.apply_into(&basis[j], &mut w);
            matvecs += 1;
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.iter().enumerate() {
                t[(i, j)] = *c;
                t[(j, i)] = *c;
            }
            let b = norm(&w);
            let scale_t = t[(j, j)].abs().max(1.0);
            let mut v = if b > 1e-13 * scale_t {
                w.iter().map(|x| x / b).collect::<Vec<_>>()
            } else {
                // invariant subspace; continue with a fresh orthogonal direction
                let mut r = random_unit(n, &mut rng);
                orthogonalize(&basis, &mut r);
                let nr = norm(&r);
                scale(1.0 / nr, &mut r);
                r
            };
            let b = if b > 1e-13 * scale_t { b } else { 0.0 };
            if basis.len() == max_basis {
                beta = b;
                next = v;
                break;
            }
            basis.push(std::mem::take(&mut v));
        }

        let (theta, s) = sorted_eigen(t.clone());
        let m = max_basis;
        let est0 = (beta * s[(m - 1, 0)]).abs();
        let est1 = (beta * s[(m - 1, 1)]).abs();
        best = best.min(est0.max(est1));
        debug!(
            "lanczos: {matvecs} matvecs, theta0 = {:.15}, theta1 = {:.15}, res ≈ {est0:.2e}/{est1:.2e}",
            theta[0], theta[1]
        );

        let ritz = |col: usize| {
            let mut y = vec![0.0; n];
            for (l, v) in basis.iter().enumerate() {
                axpy(s[(l, col)], v, &mut y);
            }
            y
        };

        if est0 <= opts.tol && est1 <= opts.tol {
            let psi = ritz(0);
            let res = residual_norm(op, &psi, theta[0]);
            matvecs += 1;
            if res <= opts.tol {
                return Ok((theta[0], theta[1], psi));
            }
            warn!("lanczos: estimated residual {est0:.2e} but explicit {res:.2e}; restarting");
        }
        if matvecs >= opts.max_iter {
            return Err(Error::NotConverged { iterations: matvecs, residual: best });
        }

        // thick restart on the `keep` lowest Ritz vectors
        let kept: Vec<Vec<f64>> = (0..keep).map(ritz).collect();
        basis = kept;
        let mut fresh = next;
        // the residual vector is orthogonal to the old basis in exact arithmetic
        orthogonalize(&basis, &mut fresh);
        let nf = norm(&fresh);
        scale(1.0 / nf, &mut fresh);
        basis.push(fresh);
        t.fill(0.0);
        for i in 0..keep {
            t[(i, i)] = theta[i];
        }
    }
}

/// `|ψ(0)|² / Σ_{i≠0} |ψ(i)|²`; infinite for an exact product state.
pub fn amplitude_ratio(solution: &GroundStateSolution) -> f64 {
    let psi = &solution.amplitudes;
    let rest: f64 = psi[1..].iter().map(|x| x * x).sum();
    if rest < 1e-300 {
        warn!("amplitude ratio: ground state is a pure product state");
        return f64::INFINITY;
    }
    psi[0] * psi[0] / rest
}
