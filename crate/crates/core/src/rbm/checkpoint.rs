//! Binary checkpoint: 8-byte magic, then `u32` format version, `N`, `ℓ_max`,
//! `n_h`, then `W`, `b`, `c` as little-endian `f64` in row-major order.

use std::fs;
use std::path::Path;

use super::RbmParameters;
use crate::basis::HilbertSpace;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"RROTRBM\0";
pub const CHECKPOINT_VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 * 4;

pub fn write_params(params: &RbmParameters) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * params.n_params());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    for v in [
        CHECKPOINT_VERSION,
        params.n_sites() as u32,
        params.ell_max(),
        params.n_hidden() as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in params.weights.iter().chain(&params.visible_bias).chain(&params.hidden_bias) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_params(bytes: &[u8]) -> Result<RbmParameters> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Checkpoint(format!("file too short for header ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic; not an RBM checkpoint".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[8 + 4 * k..12 + 4 * k].try_into().unwrap());
    let version = word(0);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version} not supported (expected {CHECKPOINT_VERSION})"
        )));
    }
    let (n_sites, ell_max, n_hidden) = (word(1) as usize, word(2), word(3) as usize);
    let space = HilbertSpace::new(n_sites, ell_max)
        .map_err(|e| Error::Checkpoint(format!("invalid header: {e}")))?;
    let d = space.local_dim();
    let (nw, nb, nc) = (n_sites * n_hidden * d, n_sites * d, n_hidden);
    let payload = &bytes[HEADER_LEN..];
    let expected = 8 * (nw + nb + nc);
    if payload.len() != expected {
        return Err(Error::Checkpoint(format!(
            "payload is {} bytes but header (N = {n_sites}, ell_max = {ell_max}, n_h = {n_hidden}) implies {expected}",
            payload.len()
        )));
    }
    let mut values =
        payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let weights: Vec<f64> = values.by_ref().take(nw).collect();
    let visible: Vec<f64> = values.by_ref().take(nb).collect();
    let hidden: Vec<f64> = values.collect();
    RbmParameters::from_parts(&space, n_hidden, weights, visible, hidden)
}

pub fn save_params(params: &RbmParameters, path: &Path) -> Result<()> {
    fs::write(path, write_params(params))?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<RbmParameters> {
    read_params(&fs::read(path)?)
}
