//! Sign structure of real states and the error of dropping it.
//!
//! A reference basis state `n*` splits the basis into `B⁺` (same sign as
//! `ψ(n*)`, zeros included) and `B⁻` (opposite sign). The rectified state
//! keeps magnitudes and the sign of `ψ(n*)` everywhere. For an operator `A`
//! the rectification error is `ε = ⟨ψ‖|A|ψ‖⟩ − ⟨ψ|A|ψ⟩`, which for real
//! symmetric `A` equals `−4⟨ψ|P⁺AP⁻|ψ⟩`, and for an eigenstate of `H` with
//! energy `E` equals `−4Eτ⁻ + 4⟨ψ|P⁻HP⁻|ψ⟩`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::basis::HilbertSpace;
use crate::eigensolver::{ground_state_with, GroundStateSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, SparseHamiltonian};
use crate::operator::{dot, LinearOperator};

/// Eigenstate residual above which the closed-form energy error is refused.
pub const EIGENSTATE_RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SignPartition {
    pub reference_index: usize,
    pub negative_mask: Vec<bool>,
    pub tau_minus: f64,
    pub tau_plus: f64,
}

impl SignPartition {
    /// `P⁻x` (`negative == true`) or `P⁺x`.
    pub fn project(&self, x: &[f64], negative: bool) -> Vec<f64> {
        x.iter()
            .zip(&self.negative_mask)
            .map(|(&v, &neg)| if neg == negative { v } else { 0.0 })
            .collect()
    }

    pub fn negative_count(&self) -> usize {
        self.negative_mask.iter().filter(|&&b| b).count()
    }
}

pub fn partition_signs(psi: &[f64], reference: usize) -> Result<SignPartition> {
    if reference >= psi.len() {
        return Err(Error::Domain(format!("reference {reference} out of range {}", psi.len())));
    }
    let norm2 = dot(psi, psi);
    if (norm2 - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("state is not normalized (‖ψ‖² = {norm2})")));
    }
    let r = psi[reference];
    if r == 0.0 {
        return Err(Error::InvalidReference { index: reference });
    }
    let negative_mask: Vec<bool> = psi.iter().map(|&v| v * r < 0.0).collect();
    let tau_minus: f64 =
        psi.iter().zip(&negative_mask).filter(|(_, &n)| n).map(|(v, _)| v * v).sum();
    let tau_plus: f64 =
        psi.iter().zip(&negative_mask).filter(|(_, &n)| !n).map(|(v, _)| v * v).sum();
    Ok(SignPartition { reference_index: reference, negative_mask, tau_minus, tau_plus })
}

/// `ψ‖(n) = sgn(ψ(n*))·|ψ(n)|`.
pub fn rectify(psi: &[f64], partition: &SignPartition) -> Vec<f64> {
    let sign = psi[partition.reference_index].signum();
    psi.iter().map(|v| sign * v.abs()).collect()
}

/// Direct form `⟨ψ‖|A|ψ‖⟩ − ⟨ψ|A|ψ⟩`.
pub fn epsilon_general(
    psi: &[f64],
    op: &dyn LinearOperator,
    partition: &SignPartition,
) -> Result<f64> {
    let rect = rectify(psi, partition);
    Ok(op.matrix_element(&rect, &rect)? - op.matrix_element(psi, psi)?)
}

/// Projector form `−4⟨ψ|P⁺AP⁻|ψ⟩` (real symmetric `A`).
pub fn epsilon_projector(
    psi: &[f64],
    op: &dyn LinearOperator,
    partition: &SignPartition,
) -> Result<f64> {
    let plus = partition.project(psi, false);
    let minus = partition.project(psi, true);
    Ok(-4.0 * op.matrix_element(&plus, &minus)?)
}

/// Eigenstate form `−4Eτ⁻ + 4⟨ψ|P⁻HP⁻|ψ⟩`.
pub fn epsilon_energy(
    solution: &GroundStateSolution,
    h: &SparseHamiltonian,
    partition: &SignPartition,
) -> Result<f64> {
    if solution.residual > EIGENSTATE_RESIDUAL_LIMIT {
        return Err(Error::Precondition(format!(
            "closed form needs an eigenstate; residual {:e} exceeds {EIGENSTATE_RESIDUAL_LIMIT:e}",
            solution.residual
        )));
    }
    if partition.tau_minus == 0.0 {
        return Ok(0.0);
    }
    let minus = partition.project(&solution.amplitudes, true);
    Ok(-4.0 * solution.energy_0 * partition.tau_minus + 4.0 * h.matrix_element(&minus, &minus)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub ell_max: u32,
    pub tau_minus: f64,
    pub epsilon: f64,
    pub gap: f64,
    pub epsilon_over_gap: f64,
}

/// Sign diagnostics of the ground state for each truncation in `ell_max_list`.
pub fn convergence_scan(
    n_sites: usize,
    r: f64,
    ell_max_list: &[u32],
    opts: &SolverOptions,
) -> Result<Vec<ScanRow>> {
    ell_max_list
        .iter()
        .map(|&ell_max| {
            let space = HilbertSpace::new(n_sites, ell_max)?;
            let h = build_hamiltonian(space, r)?;
            if space.total_dim() < 2 {
                // single state: trivially sign-free, no gap defined
                return Ok(ScanRow {
                    ell_max,
                    tau_minus: 0.0,
                    epsilon: 0.0,
                    gap: f64::NAN,
                    epsilon_over_gap: 0.0,
                });
            }
            let sol = ground_state_with(&h, opts)?;
            sign_row(ell_max, &sol, &h)
        })
        .collect()
}

pub fn sign_row(ell_max: u32, sol: &GroundStateSolution, h: &SparseHamiltonian) -> Result<ScanRow> {
    let part = partition_signs(&sol.amplitudes, 0)?;
    let epsilon = epsilon_energy(sol, h, &part)?;
    Ok(ScanRow {
        ell_max,
        tau_minus: part.tau_minus,
        epsilon,
        gap: sol.gap,
        epsilon_over_gap: epsilon / sol.gap,
    })
}

/// CSV with columns `ell_max, tau_minus, epsilon, gap, epsilon_over_gap`.
pub fn write_scan_csv(rows: &[ScanRow], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "ell_max,tau_minus,epsilon,gap,epsilon_over_gap")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.ell_max, r.tau_minus, r.epsilon, r.gap, r.epsilon_over_gap
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Whether every off-diagonal element is ≤ 1e−14, and the largest positive one.
pub fn stoquasticity_check(h: &SparseHamiltonian) -> (bool, f64) {
    let space = h.space();
    let coupling = h.coupling();
    let mut digits = vec![0u32; space.n_sites()];
    let mut max_pos = 0.0f64;
    if coupling == 0.0 {
        return (true, 0.0);
    }
    for x in 0..space.total_dim() {
        space.decode_into(x, &mut digits);
        h.for_each_connection(&digits, |_, _, _, _, v| {
            max_pos = max_pos.max(coupling * v);
        });
    }
    (max_pos <= 1e-14, max_pos)
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Diagonal;
    use nalgebra::DMatrix;

    fn two_state() -> Vec<f64> {
        vec![0.9f64.sqrt(), -(0.1f64.sqrt())]
    }

    #[test]
    fn sign_free_state() {
        let psi = vec![0.6, 0.8, 0.0];
        let p = partition_signs(&psi, 0).unwrap();
        assert_eq!(p.tau_minus, 0.0);
        assert_eq!(p.negative_count(), 0);
        assert_eq!(rectify(&psi, &p), psi);
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 2.0, -1.0, 3.0, 0.5, 3.0, 0.0]);
        assert_eq!(epsilon_general(&psi, &a, &p).unwrap(), 0.0);
    }

    #[test]
    fn two_state_partition() {
        let psi = two_state();
        let p = partition_signs(&psi, 0).unwrap();
        assert!((p.tau_minus - 0.1).abs() < 1e-15);
        assert!((p.tau_plus + p.tau_minus - 1.0).abs() < 1e-12);
        let rect = rectify(&psi, &p);
        assert_eq!(rect, vec![0.9f64.sqrt(), 0.1f64.sqrt()]);
        assert!((dot(&rect, &psi) - (1.0 - 2.0 * p.tau_minus)).abs() < 1e-12);
    }

    #[test]
    fn negative_reference_keeps_its_sign() {
        let psi: Vec<f64> = two_state().iter().map(|v| -v).collect();
        let p = partition_signs(&psi, 0).unwrap();
        assert!((p.tau_minus - 0.1).abs() < 1e-15);
        assert!(rectify(&psi, &p).iter().all(|&v| v < 0.0));
    }

    #[test]
    fn zero_reference_is_invalid() {
        let psi = vec![0.0, 1.0];
        assert!(matches!(partition_signs(&psi, 0), Err(Error::InvalidReference { index: 0 })));
        assert!(partition_signs(&[0.5, 0.5], 0).is_err());
    }

    #[test]
    fn diagonal_operator_has_no_error() {
        let psi = vec![0.5, -0.5, 0.5, -0.5];
        let p = partition_signs(&psi, 0).unwrap();
        let d = Diagonal(vec![1.0, -2.0, 3.5, 7.0]);
        assert_eq!(epsilon_general(&psi, &d, &p).unwrap(), 0.0);
        assert_eq!(epsilon_projector(&psi, &d, &p).unwrap(), 0.0);
    }

    #[test]
    fn spearman_basics() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }
}
