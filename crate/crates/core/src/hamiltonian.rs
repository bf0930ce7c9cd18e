//! Dimensionless rotor-chain Hamiltonian `H/B = K + V/R³`.
//!
//! `K` is diagonal with entries `Σᵢ ℓᵢ(ℓᵢ+1)`. The dipole coupling between
//! sites `i < j` is
//!
//! ```text
//! Vᵢⱼ = [ ½(p⁺ᵢ p⁻ⱼ + p⁻ᵢ p⁺ⱼ) − 2 zᵢ zⱼ ] / |i − j|³,    p± = x ± iy
//! ```
//!
//! which has only real matrix elements in the `|ℓ m⟩` basis. All pairs are
//! coupled (open chain, long range). The global operator is never stored; it
//! is applied row by row from a table of two-site couplings.

use nalgebra::DMatrix;

use crate::basis::{label_decode, HilbertSpace, RotorConfiguration};
use crate::error::{Error, Result};
use crate::operator::LinearOperator;

/// Matrix elements of the rotor axis components in the `|ℓ m⟩` basis.
#[derive(Clone, Debug)]
pub struct SingleRotorOperators {
    local_dim: usize,
    /// `⟨ℓ'm'|cos θ|ℓm⟩`
    pub z_mat: DMatrix<f64>,
    /// `⟨ℓ'm'|sin θ e^{iφ}|ℓm⟩`
    pub p_plus: DMatrix<f64>,
    /// transpose of `p_plus`
    pub p_minus: DMatrix<f64>,
}

impl SingleRotorOperators {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }
}

/// Closed-form dipole selection-rule elements (Condon–Shortley phases).
pub fn build_single_rotor_ops(ell_max: u32) -> SingleRotorOperators {
    let d = crate::basis::local_dim(ell_max);
    let idx = |l: i64, m: i64| (l * l + l + m) as usize;
    let mut z = DMatrix::zeros(d, d);
    let mut pp = DMatrix::zeros(d, d);
    for sigma in 0..d as u32 {
        let (ell, m) = label_decode(sigma);
        let (l, m) = (ell as i64, m as i64);
        let lf = l as f64;
        if ell < ell_max {
            let num = ((l + 1) * (l + 1) - m * m) as f64;
            let val = (num / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt();
            z[(idx(l + 1, m), idx(l, m))] = val;
            z[(idx(l, m), idx(l + 1, m))] = val;

            let num = ((l + m + 1) * (l + m + 2)) as f64;
            pp[(idx(l + 1, m + 1), idx(l, m))] =
                -(num / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt();
        }
        if l >= 1 && (m + 1).abs() < l {
            let num = ((l - m) * (l - m - 1)) as f64;
            pp[(idx(l - 1, m + 1), idx(l, m))] =
                (num / ((2.0 * lf - 1.0) * (2.0 * lf + 1.0))).sqrt();
        }
    }
    let pm = pp.transpose();
    SingleRotorOperators { local_dim: d, z_mat: z, p_plus: pp, p_minus: pm }
}

/// One nonzero element of a two-site coupling row.
#[derive(Clone, Copy, Debug)]
struct PairEntry {
    a: u32,
    b: u32,
    value: f64,
}

/// The chain Hamiltonian, applied matrix-free.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    space: HilbertSpace,
    r: f64,
    inv_r3: f64,
    kinetic_diag: Vec<f64>,
    ops: SingleRotorOperators,
    /// Row `(a, b)` of the unscaled two-site coupling, indexed `a·D + b`.
    pair_rows: Vec<Vec<PairEntry>>,
    /// `(i, j, 1/|i−j|³)` for every `i < j`.
    pairs: Vec<(usize, usize, f64)>,
}

/// Builds `K + V/R³`. `R = ∞` gives the kinetic term alone.
pub fn build_hamiltonian(space: HilbertSpace, r: f64) -> Result<SparseHamiltonian> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(format!("separation R must be positive, got {r}")));
    }
    let ops = build_single_rotor_ops(space.ell_max());
    let d = space.local_dim();
    let mut pair_rows = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut row = Vec::new();
            for a2 in 0..d {
                let (za, ppa, pma) =
                    (ops.z_mat[(a, a2)], ops.p_plus[(a, a2)], ops.p_minus[(a, a2)]);
                if za == 0.0 && ppa == 0.0 && pma == 0.0 {
                    continue;
                }
                for b2 in 0..d {
                    let value = 0.5 * (ppa * ops.p_minus[(b, b2)] + pma * ops.p_plus[(b, b2)])
                        - 2.0 * za * ops.z_mat[(b, b2)];
                    if value != 0.0 {
                        row.push(PairEntry { a: a2 as u32, b: b2 as u32, value });
                    }
                }
            }
            pair_rows.push(row);
        }
    }
    let n = space.n_sites();
    let pairs = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0 / ((j - i) as f64).powi(3))))
        .collect();
    Ok(SparseHamiltonian {
        space,
        r,
        inv_r3: if r.is_infinite() { 0.0 } else { 1.0 / (r * r * r) },
        kinetic_diag: space.kinetic_diagonal(),
        ops,
        pair_rows,
        pairs,
    })
}

impl SparseHamiltonian {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn separation(&self) -> f64 {
        self.r
    }

    /// `1/R³`, zero for the kinetic-only operator.
    pub fn coupling(&self) -> f64 {
        self.inv_r3
    }

    pub fn kinetic_diag(&self) -> &[f64] {
        &self.kinetic_diag
    }

    pub fn ops(&self) -> &SingleRotorOperators {
        &self.ops
    }

    /// `H·v`, checking the length.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        LinearOperator::apply(self, v)
    }

    /// `y ← (diag_scale·K + v_scale·V)·x`, sequential over output rows.
    fn apply_scaled(&self, diag_scale: f64, v_scale: f64, x: &[f64], y: &mut [f64]) {
        let n = self.space.n_sites();
        let d = self.space.local_dim();
        let strides: Vec<isize> = (0..n).map(|i| self.space.stride(i) as isize).collect();
        let mut digits = vec![0u32; n];
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            if v_scale != 0.0 {
                for &(i, j, w) in &self.pairs {
                    let (a, b) = (digits[i], digits[j]);
                    let mut pair_acc = 0.0;
                    for e in &self.pair_rows[a as usize * d + b as usize] {
                        let col = row as isize
                            + (e.a as isize - a as isize) * strides[i]
                            + (e.b as isize - b as isize) * strides[j];
                        pair_acc += e.value * x[col as usize];
                    }
                    acc += w * pair_acc;
                }
                acc *= v_scale;
            }
            *out = diag_scale * self.kinetic_diag[row] * x[row] + acc;
            // advance the odometer to row + 1
            for digit in digits.iter_mut().rev() {
                *digit += 1;
                if (*digit as usize) < d {
                    break;
                }
                *digit = 0;
            }
        }
    }

    /// Interaction part `V` alone (no `1/R³`).
    pub fn apply_potential(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_scaled(0.0, 1.0, x, &mut y);
        Ok(y)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.space.total_dim() {
            return Err(Error::DimensionMismatch { expected: self.space.total_dim(), found: len });
        }
        Ok(())
    }

    /// Every `σ'` with `⟨σ|V|σ'⟩ ≠ 0`, with the element including the
    /// `1/|i−j|³` factor but not `1/R³`.
    pub fn connected_configs(
        &self,
        config: &RotorConfiguration,
    ) -> Result<Vec<(RotorConfiguration, f64)>> {
        if !self.space.contains(config) {
            return Err(Error::Domain(format!("configuration {config} is outside the space")));
        }
        let d = self.space.local_dim();
        let sig = config.sigmas();
        let mut out = Vec::new();
        for &(i, j, w) in &self.pairs {
            for e in &self.pair_rows[sig[i] as usize * d + sig[j] as usize] {
                let mut next = sig.to_vec();
                next[i] = e.a;
                next[j] = e.b;
                out.push((RotorConfiguration::from_sigmas(next), w * e.value));
            }
        }
        Ok(out)
    }

    /// Visits `(i, j, a', b', element)` for every connection of the digit
    /// string `sigmas`, without allocating configurations.
    pub fn for_each_connection(&self, sigmas: &[u32], mut f: impl FnMut(usize, usize, u32, u32, f64)) {
        let d = self.space.local_dim();
        for &(i, j, w) in &self.pairs {
            for e in &self.pair_rows[sigmas[i] as usize * d + sigmas[j] as usize] {
                f(i, j, e.a, e.b, w * e.value);
            }
        }
    }

    /// Dense `H`; only for small spaces.
    pub fn to_dense(&self) -> DMatrix<f64> {
        crate::operator::to_dense(self)
    }

    /// Dense `V` without `1/R³`.
    pub fn potential_dense(&self) -> DMatrix<f64> {
        let n = self.space.total_dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_scaled(0.0, 1.0, &e, &mut col);
            e[j] = 0.0;
            m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        }
        m
    }
}

impl LinearOperator for SparseHamiltonian {
    fn dim(&self) -> usize {
        self.space.total_dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.apply_scaled(1.0, self.inv_r3, x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::RotorConfiguration;

    fn cfg(v: &[(u32, i32)]) -> RotorConfiguration {
        RotorConfiguration::from_labels(v).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let ops = build_single_rotor_ops(3);
        assert!((ops.z_mat[(2, 0)] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((ops.p_plus[(3, 0)] + (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        for s in 0..16u32 {
            for t in 0..16u32 {
                let (l1, m1) = label_decode(s);
                let (l2, m2) = label_decode(t);
                let z = ops.z_mat[(s as usize, t as usize)];
                let p = ops.p_plus[(s as usize, t as usize)];
                if l1 == l2 {
                    assert_eq!(z, 0.0);
                    assert_eq!(p, 0.0);
                }
                if z != 0.0 {
                    assert_eq!(m1, m2);
                    assert_eq!(l1.abs_diff(l2), 1);
                }
                if p != 0.0 {
                    assert_eq!(m1, m2 + 1);
                    assert_eq!(l1.abs_diff(l2), 1);
                }
                assert_eq!(ops.p_minus[(t as usize, s as usize)], p);
                assert_eq!(z, ops.z_mat[(t as usize, s as usize)]);
            }
        }
    }

    #[test]
    fn rejects_bad_separation() {
        let space = HilbertSpace::new(2, 1).unwrap();
        assert!(build_hamiltonian(space, 0.0).is_err());
        assert!(build_hamiltonian(space, -1.0).is_err());
        assert!(build_hamiltonian(space, f64::NAN).is_err());
    }

    #[test]
    fn single_site_is_diagonal() {
        let space = HilbertSpace::new(1, 2).unwrap();
        let h = build_hamiltonian(space, 0.7).unwrap();
        let dense = h.to_dense();
        let expected = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0];
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { expected[i] } else { 0.0 };
                assert_eq!(dense[(i, j)], want);
            }
        }
    }

    #[test]
    fn ground_state_connections_two_sites() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let h = build_hamiltonian(space, 1.0).unwrap();
        let mut conns = h.connected_configs(&RotorConfiguration::ground(2)).unwrap();
        conns.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(conns.len(), 3);
        let expect = [
            (cfg(&[(1, -1), (1, 1)]), -1.0 / 3.0),
            (cfg(&[(1, 0), (1, 0)]), -2.0 / 3.0),
            (cfg(&[(1, 1), (1, -1)]), -1.0 / 3.0),
        ];
        for ((c, v), (ce, ve)) in conns.iter().zip(expect.iter()) {
            assert_eq!(c, ce);
            assert!((v - ve).abs() < 1e-15, "{c}: {v} vs {ve}");
        }
        let dense = h.to_dense();
        let x = space.index_of(&cfg(&[(1, 0), (1, 0)])).unwrap();
        assert!((dense[(0, x)] + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn no_connections_without_excited_levels() {
        let space = HilbertSpace::new(3, 0).unwrap();
        let h = build_hamiltonian(space, 1.0).unwrap();
        assert!(h.connected_configs(&RotorConfiguration::ground(3)).unwrap().is_empty());
    }

    #[test]
    fn kinetic_only_kills_ground_state() {
        let space = HilbertSpace::new(3, 2).unwrap();
        let h = build_hamiltonian(space, f64::INFINITY).unwrap();
        let mut v = vec![0.0; space.total_dim()];
        v[0] = 1.0;
        assert!(h.apply(&v).unwrap().iter().all(|&y| y == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let h = build_hamiltonian(space, 1.0).unwrap();
        assert!(matches!(h.apply(&[1.0; 3]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn non_stoquastic_signs() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let dense = build_hamiltonian(space, 1.0).unwrap().to_dense();
        let n = dense.nrows();
        let (mut pos, mut neg) = (false, false);
        for i in 0..n {
            for j in 0..n {
                assert!((dense[(i, j)] - dense[(j, i)]).abs() < 1e-14);
                if i != j {
                    pos |= dense[(i, j)] > 0.0;
                    neg |= dense[(i, j)] < 0.0;
                }
            }
        }
        assert!(pos && neg);
    }
}
