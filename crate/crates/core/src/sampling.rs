//! Synthetic projective measurements drawn from `|ψ(σ)|²`, and the text
//! format they are stored in.
//!
//! ```text
//! # n_sites = 2
//! # ell_max = 3
//! # R = 1.0
//! # seed = 42
//! # count = 3
//! # source = ed-dense
//! 0 0
//! 2 2
//! 0 0
//! ```
//!
//! One sample per line, `N` flattened labels separated by spaces.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{HilbertSpace, RotorConfiguration};
use crate::eigensolver::GroundStateSolution;
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;
use crate::rng;

/// Default number of measurements per dataset.
pub const DEFAULT_DATASET_SIZE: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n_sites: usize,
    pub ell_max: u32,
    pub r: f64,
    pub seed: u64,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementDataset {
    pub meta: DatasetMeta,
    pub samples: Vec<RotorConfiguration>,
}

impl MeasurementDataset {
    pub fn space(&self) -> Result<HilbertSpace> {
        HilbertSpace::new(self.meta.n_sites, self.meta.ell_max)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The first `count` samples, keeping the metadata.
    pub fn truncated(&self, count: usize) -> Self {
        Self { meta: self.meta.clone(), samples: self.samples[..count.min(self.len())].to_vec() }
    }
}

/// Inverse-CDF sampler over a fixed discrete distribution.
#[derive(Clone, Debug)]
pub struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cdf }
    }

    pub fn total(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// `count` i.i.d. draws from `ψ(σ)²`, reproducible under `seed`.
pub fn sample_exact(
    solution: &GroundStateSolution,
    h: &SparseHamiltonian,
    count: usize,
    seed: u64,
) -> Result<MeasurementDataset> {
    if count == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let space = *h.space();
    if solution.amplitudes.len() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            found: solution.amplitudes.len(),
        });
    }
    let dist = Categorical::new(solution.amplitudes.iter().map(|a| a * a));
    if (dist.total() - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "ground state is not normalized (‖ψ‖² = {})",
            dist.total()
        )));
    }
    let mut rng = rng::seeded(seed);
    let samples = (0..count)
        .map(|_| space.config_at(dist.sample(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasurementDataset {
        meta: DatasetMeta {
            n_sites: space.n_sites(),
            ell_max: space.ell_max(),
            r: h.separation(),
            seed,
            source: format!("ed-{}", serde_json::to_value(solution.method)?.as_str().unwrap_or("")),
        },
        samples,
    })
}

pub fn format_dataset(ds: &MeasurementDataset) -> String {
    let mut s = String::new();
    let m = &ds.meta;
    let _ = writeln!(s, "# n_sites = {}", m.n_sites);
    let _ = writeln!(s, "# ell_max = {}", m.ell_max);
    let _ = writeln!(s, "# R = {:?}", m.r);
    let _ = writeln!(s, "# seed = {}", m.seed);
    let _ = writeln!(s, "# count = {}", ds.samples.len());
    let _ = writeln!(s, "# source = {}", m.source);
    for c in &ds.samples {
        let line: Vec<String> = c.sigmas().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn write_dataset(ds: &MeasurementDataset, path: &Path) -> Result<()> {
    fs::write(path, format_dataset(ds))?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<MeasurementDataset> {
    parse_dataset(&fs::read_to_string(path)?, path)
}

pub fn parse_dataset(text: &str, path: &Path) -> Result<MeasurementDataset> {
    let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut n_sites = None;
    let mut ell_max = None;
    let mut r = None;
    let mut seed = None;
    let mut count = None;
    let mut source = String::new();
    let mut samples = Vec::new();
    let mut space: Option<HilbertSpace> = None;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if !samples.is_empty() {
                return Err(err(lineno, "header line after samples".into()));
            }
            let Some((key, value)) = rest.split_once('=') else { continue };
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| err(lineno, format!("invalid {what}: {value:?}"));
            match key {
                "n_sites" => n_sites = Some(value.parse::<usize>().map_err(|_| bad("n_sites"))?),
                "ell_max" => ell_max = Some(value.parse::<u32>().map_err(|_| bad("ell_max"))?),
                "R" => r = Some(value.parse::<f64>().map_err(|_| bad("R"))?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                "count" => count = Some(value.parse::<usize>().map_err(|_| bad("count"))?),
                "source" => source = value.to_string(),
                _ => {}
            }
            continue;
        }
        let sp = match space {
            Some(sp) => sp,
            None => {
                let (Some(n), Some(l)) = (n_sites, ell_max) else {
                    return Err(err(lineno, "sample before n_sites and ell_max header".into()));
                };
                let sp = HilbertSpace::new(n, l).map_err(|e| err(lineno, e.to_string()))?;
                space = Some(sp);
                sp
            }
        };
        let sigmas = line
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|_| err(lineno, format!("invalid label {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if sigmas.len() != sp.n_sites() {
            return Err(err(
                lineno,
                format!("expected {} labels, found {}", sp.n_sites(), sigmas.len()),
            ));
        }
        if let Some(&bad) = sigmas.iter().find(|&&s| s as usize >= sp.local_dim()) {
            return Err(err(
                lineno,
                format!("label {bad} out of range for ell_max = {} (D = {})", sp.ell_max(), sp.local_dim()),
            ));
        }
        samples.push(RotorConfiguration::from_sigmas(sigmas));
    }

    let missing = |k: &str| err(last_line, format!("missing header key {k}"));
    let n_sites = n_sites.ok_or_else(|| missing("n_sites"))?;
    let ell_max = ell_max.ok_or_else(|| missing("ell_max"))?;
    let r = r.ok_or_else(|| missing("R"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let count = count.ok_or_else(|| missing("count"))?;
    if samples.len() != count {
        return Err(err(
            last_line,
            format!("header declares count = {count} but {} samples follow", samples.len()),
        ));
    }
    if count == 0 {
        return Err(err(last_line, "dataset has no samples".into()));
    }
    Ok(MeasurementDataset { meta: DatasetMeta { n_sites, ell_max, r, seed, source }, samples })
}
