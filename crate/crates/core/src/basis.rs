//! Truncated product basis of `N` rigid rotors.
//!
//! Each rotor carries a free-rotor label `|ℓ m⟩` with `0 ≤ ℓ ≤ ℓ_max`,
//! flattened to `σ = ℓ² + ℓ + m` (ℓ ascending, m ascending within ℓ), so
//! `ℓ = ⌊√σ⌋`. Product states are indexed in mixed radix with site 0 as the
//! most significant digit; every other module relies on this ordering.

use std::fmt;

use crate::error::{Error, Result};

/// Local dimension `(ℓ_max + 1)²` of one truncated rotor.
pub fn local_dim(ell_max: u32) -> usize {
    let n = ell_max as usize + 1;
    n * n
}

/// Flattened label of `|ℓ m⟩`, without a truncation bound.
pub fn label_encode(ell: u32, m: i32) -> Result<u32> {
    if m.unsigned_abs() > ell {
        return Err(Error::Domain(format!("|m| = {} exceeds ell = {ell}", m.abs())));
    }
    // exact: ell² + ell + m ≥ ell² ≥ 0
    Ok((ell * ell + ell).wrapping_add_signed(m))
}

/// Inverse of [`label_encode`].
pub fn label_decode(sigma: u32) -> (u32, i32) {
    let mut ell = (sigma as f64).sqrt() as u32;
    // guard the float sqrt at perfect squares
    while ell * ell > sigma {
        ell -= 1;
    }
    while (ell + 1) * (ell + 1) <= sigma {
        ell += 1;
    }
    let m = sigma as i64 - (ell * ell + ell) as i64;
    (ell, m as i32)
}

/// A single-rotor free-rotor state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RotorLabel {
    pub ell: u32,
    pub m: i32,
    pub sigma: u32,
}

impl RotorLabel {
    pub fn new(ell: u32, m: i32) -> Result<Self> {
        let sigma = label_encode(ell, m)?;
        Ok(Self { ell, m, sigma })
    }

    pub fn from_sigma(sigma: u32) -> Self {
        let (ell, m) = label_decode(sigma);
        Self { ell, m, sigma }
    }

    /// `ℓ(ℓ+1)`, the rotational energy in units of the rotational constant.
    pub fn kinetic(&self) -> f64 {
        (self.ell * (self.ell + 1)) as f64
    }
}

impl fmt::Display for RotorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{} {}⟩", self.ell, self.m)
    }
}

/// A computational-basis state of the chain, stored as flattened labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RotorConfiguration {
    sigmas: Vec<u32>,
}

impl RotorConfiguration {
    pub fn from_sigmas(sigmas: Vec<u32>) -> Self {
        Self { sigmas }
    }

    pub fn from_labels(labels: &[(u32, i32)]) -> Result<Self> {
        let sigmas = labels
            .iter()
            .map(|&(ell, m)| label_encode(ell, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { sigmas })
    }

    /// All rotors in `|0 0⟩`.
    pub fn ground(n_sites: usize) -> Self {
        Self { sigmas: vec![0; n_sites] }
    }

    pub fn n_sites(&self) -> usize {
        self.sigmas.len()
    }

    pub fn sigmas(&self) -> &[u32] {
        &self.sigmas
    }

    pub fn labels(&self) -> impl Iterator<Item = RotorLabel> + '_ {
        self.sigmas.iter().map(|&s| RotorLabel::from_sigma(s))
    }

    pub fn total_m(&self) -> i32 {
        self.labels().map(|l| l.m).sum()
    }

    pub fn ell_parity(&self) -> u32 {
        self.labels().map(|l| l.ell).sum::<u32>() % 2
    }

    /// Diagonal of the kinetic term, `Σᵢ ℓᵢ(ℓᵢ+1)`.
    pub fn kinetic(&self) -> f64 {
        self.labels().map(|l| l.kinetic()).sum()
    }

    /// True when the configuration lies in the `(m = 0, even ℓ)` sector.
    pub fn is_symmetric(&self) -> bool {
        symmetry_numbers(self) == (0, 0)
    }
}

impl fmt::Display for RotorConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels().map(|l| format!("{} {}", l.ell, l.m)).collect();
        write!(f, "|{}⟩", parts.join(", "))
    }
}

/// `(Σ mᵢ, (Σ ℓᵢ) mod 2)`, both conserved by the Hamiltonian.
pub fn symmetry_numbers(config: &RotorConfiguration) -> (i32, u32) {
    (config.total_m(), config.ell_parity())
}

/// One-hot encoding `σ[i][d]`, row-major with `D` columns per site.
pub fn one_hot(config: &RotorConfiguration, local_dim: usize) -> Vec<u8> {
    let mut out = vec![0u8; config.n_sites() * local_dim];
    for (i, &s) in config.sigmas().iter().enumerate() {
        out[i * local_dim + s as usize] = 1;
    }
    out
}

/// The truncated product space of `n_sites` rotors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    n_sites: usize,
    ell_max: u32,
    local_dim: usize,
    total_dim: usize,
}

impl HilbertSpace {
    pub fn new(n_sites: usize, ell_max: u32) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Domain("a chain needs at least one site".into()));
        }
        let local = local_dim(ell_max);
        let total = (0..n_sites)
            .try_fold(1usize, |acc, _| acc.checked_mul(local))
            .ok_or_else(|| Error::Domain("product space dimension overflows usize".into()))?;
        Ok(Self { n_sites, ell_max, local_dim: local, total_dim: total })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn ell_max(&self) -> u32 {
        self.ell_max
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Stride of site `i` in the global index (site 0 most significant).
    pub fn stride(&self, site: usize) -> usize {
        self.local_dim.pow((self.n_sites - 1 - site) as u32)
    }

    /// Checked label for this truncation.
    pub fn label(&self, ell: u32, m: i32) -> Result<RotorLabel> {
        if ell > self.ell_max {
            return Err(Error::Domain(format!("ell = {ell} exceeds ell_max = {}", self.ell_max)));
        }
        RotorLabel::new(ell, m)
    }

    pub fn contains(&self, config: &RotorConfiguration) -> bool {
        config.n_sites() == self.n_sites
            && config.sigmas().iter().all(|&s| (s as usize) < self.local_dim)
    }

    pub fn index_of(&self, config: &RotorConfiguration) -> Result<usize> {
        if !self.contains(config) {
            return Err(Error::Domain(format!(
                "configuration {config} is not in the space (N = {}, ell_max = {})",
                self.n_sites, self.ell_max
            )));
        }
        Ok(config.sigmas().iter().fold(0usize, |acc, &s| acc * self.local_dim + s as usize))
    }

    pub fn config_at(&self, index: usize) -> Result<RotorConfiguration> {
        if index >= self.total_dim {
            return Err(Error::Domain(format!(
                "index {index} out of range for dimension {}",
                self.total_dim
            )));
        }
        let mut sigmas = vec![0u32; self.n_sites];
        self.decode_into(index, &mut sigmas);
        Ok(RotorConfiguration::from_sigmas(sigmas))
    }

    /// Writes the digits of `index` into `digits` without allocating.
    pub fn decode_into(&self, mut index: usize, digits: &mut [u32]) {
        for d in digits.iter_mut().rev() {
            *d = (index % self.local_dim) as u32;
            index /= self.local_dim;
        }
    }

    /// Kinetic diagonal `Σᵢ ℓᵢ(ℓᵢ+1)` for every basis index.
    pub fn kinetic_diagonal(&self) -> Vec<f64> {
        let local: Vec<f64> =
            (0..self.local_dim as u32).map(|s| RotorLabel::from_sigma(s).kinetic()).collect();
        let mut out = vec![0.0; self.total_dim];
        let mut digits = vec![0u32; self.n_sites];
        for (x, slot) in out.iter_mut().enumerate() {
            self.decode_into(x, &mut digits);
            *slot = digits.iter().map(|&d| local[d as usize]).sum();
        }
        out
    }

    /// Indicator of the `(total_m, ell_parity)` sector of every basis index.
    pub fn sector_mask(&self, total_m: i32, parity: u32) -> Vec<bool> {
        let mut digits = vec![0u32; self.n_sites];
        (0..self.total_dim)
            .map(|x| {
                self.decode_into(x, &mut digits);
                let c = RotorConfiguration::from_sigmas(digits.clone());
                symmetry_numbers(&c) == (total_m, parity)
            })
            .collect()
    }
}
