//! C ABI over `rotor-recon`.
//!
//! Objects are opaque handles created by `rr_*_new`/`rr_*_load` style calls
//! and released with the matching `rr_*_free`. Every fallible call returns
//! an [`RrStatus`]; on failure [`rr_last_error`] copies a message for the
//! calling thread. Output arrays are caller-allocated, with their length
//! passed alongside.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use rotor_recon::basis::{HilbertSpace, RotorConfiguration};
use rotor_recon::eigensolver::{amplitude_ratio, ground_state, GroundStateSolution};
use rotor_recon::hamiltonian::{build_hamiltonian, SparseHamiltonian};
use rotor_recon::rbm::{self, GibbsChainState, RbmParameters};
use rotor_recon::sampling::sample_exact;
use rotor_recon::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotConverged = 4,
    DegenerateGroundState = 5,
    Io = 6,
    Numerical = 7,
    Panic = 99,
}

/// Chain Hamiltonian.
pub struct RrHamiltonian(SparseHamiltonian);

/// Exact ground state with its first excitation.
pub struct RrGroundState(GroundStateSolution);

/// RBM parameters.
pub struct RrRbm(RbmParameters);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> RrStatus {
    match err {
        Error::Domain(_) | Error::Config(_) | Error::Precondition(_) | Error::InvalidReference { .. } => {
            RrStatus::InvalidArgument
        }
        Error::DimensionMismatch { .. } | Error::TooLarge { .. } => RrStatus::DimensionMismatch,
        Error::NotConverged { .. } => RrStatus::NotConverged,
        Error::DegenerateGroundState { .. } => RrStatus::DegenerateGroundState,
        Error::Io(_) | Error::Parse { .. } | Error::Checkpoint(_) | Error::Csv(_) | Error::Json(_) => RrStatus::Io,
        Error::Divergence { .. } => RrStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), RrStatusError>) -> RrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RrStatus::Ok,
        Ok(Err(RrStatusError(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RrStatus::Panic
        }
    }
}

struct RrStatusError(RrStatus, String);

impl From<Error> for RrStatusError {
    fn from(e: Error) -> Self {
        RrStatusError(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> RrStatusError {
    RrStatusError(RrStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> RrStatusError {
    RrStatusError(RrStatus::InvalidArgument, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, RrStatusError> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], RrStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], RrStatusError> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn require_len(found: usize, expected: usize) -> Result<(), RrStatusError> {
    if found != expected {
        return Err(RrStatusError(
            RrStatus::DimensionMismatch,
            format!("buffer length {found}, expected {expected}"),
        ));
    }
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, RrStatusError> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `len` bytes. Returns the full message length without the
/// terminator, so a return value `>= len` means truncation.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rr_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `D = (ℓ_max+1)²`.
#[no_mangle]
pub extern "C" fn rr_local_dim(ell_max: u32) -> usize {
    rotor_recon::basis::local_dim(ell_max)
}

/// Builds the Hamiltonian of `n_sites` rotors at separation `r`. Pass
/// `INFINITY` for the decoupled chain.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn rr_hamiltonian_new(
    n_sites: usize,
    ell_max: u32,
    r: f64,
    out: *mut *mut RrHamiltonian,
) -> RrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = build_hamiltonian(HilbertSpace::new(n_sites, ell_max)?, r)?;
        *out = Box::into_raw(Box::new(RrHamiltonian(h)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`rr_hamiltonian_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rr_hamiltonian_free(h: *mut RrHamiltonian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rr_hamiltonian_dim(h: *const RrHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.0.space().total_dim())
}

/// `y = H x`, both of length `len` (the dimension).
///
/// # Safety
/// `x` and `y` must point to `len` doubles and must not overlap.
#[no_mangle]
pub unsafe extern "C" fn rr_hamiltonian_apply(
    h: *const RrHamiltonian,
    x: *const f64,
    y: *mut f64,
    len: usize,
) -> RrStatus {
    guard(|| {
        let h = deref(h, "hamiltonian")?;
        require_len(len, h.0.space().total_dim())?;
        let x = in_slice(x, len, "x")?;
        let y = out_slice(y, len, "y")?;
        y.copy_from_slice(&h.0.apply(x)?);
        Ok(())
    })
}

/// Lowest two eigenvalues and the ground state.
///
/// # Safety
/// `h` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn rr_ground_state(
    h: *const RrHamiltonian,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RrGroundState,
) -> RrStatus {
    guard(|| {
        let h = deref(h, "hamiltonian")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sol = ground_state(&h.0, tol, max_iter)?;
        *out = Box::into_raw(Box::new(RrGroundState(sol)));
        Ok(())
    })
}

/// # Safety
/// `gs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rr_ground_state_free(gs: *mut RrGroundState) {
    if !gs.is_null() {
        drop(Box::from_raw(gs));
    }
}

/// Writes `E₀`, `E₁` and the gap; any output pointer may be null.
///
/// # Safety
/// `gs` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_ground_state_energies(
    gs: *const RrGroundState,
    energy_0: *mut f64,
    energy_1: *mut f64,
    gap: *mut f64,
) -> RrStatus {
    guard(|| {
        let gs = &deref(gs, "ground state")?.0;
        for (p, v) in [(energy_0, gs.energy_0), (energy_1, gs.energy_1), (gap, gs.gap)] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Weight of the all-zero configuration over the weight of all others,
/// `|ψ(0)|² / Σ_{i≠0} |ψ(i)|²`.
///
/// # Safety
/// `gs` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rr_ground_state_amplitude_ratio(gs: *const RrGroundState, out: *mut f64) -> RrStatus {
    guard(|| {
        let gs = deref(gs, "ground state")?;
        *out.as_mut().ok_or_else(|| null("out"))? = amplitude_ratio(&gs.0);
        Ok(())
    })
}

/// Copies the normalized ground-state amplitudes into `buf`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rr_ground_state_amplitudes(gs: *const RrGroundState, buf: *mut f64, len: usize) -> RrStatus {
    guard(|| {
        let gs = deref(gs, "ground state")?;
        require_len(len, gs.0.amplitudes.len())?;
        out_slice(buf, len, "buf")?.copy_from_slice(&gs.0.amplitudes);
        Ok(())
    })
}

/// Draws `count` measurements from `|ψ|²` into `labels`, row-major
/// `[count][n_sites]` flattened labels.
///
/// # Safety
/// Handles must be live; `labels` must point to `len` writable `u32`s.
#[no_mangle]
pub unsafe extern "C" fn rr_sample_exact(
    h: *const RrHamiltonian,
    gs: *const RrGroundState,
    count: usize,
    seed: u64,
    labels: *mut u32,
    len: usize,
) -> RrStatus {
    guard(|| {
        let h = deref(h, "hamiltonian")?;
        let gs = deref(gs, "ground state")?;
        let n = h.0.space().n_sites();
        require_len(len, count.checked_mul(n).ok_or_else(|| invalid("count overflows"))?)?;
        let out = out_slice(labels, len, "labels")?;
        let ds = sample_exact(&gs.0, &h.0, count, seed)?;
        for (row, s) in out.chunks_exact_mut(n).zip(&ds.samples) {
            row.copy_from_slice(s.sigmas());
        }
        Ok(())
    })
}

/// Fresh RBM with `W ~ N(0, 0.01²)` and zero biases.
///
/// # Safety
/// `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_new(
    n_sites: usize,
    ell_max: u32,
    n_hidden: usize,
    seed: u64,
    out: *mut *mut RrRbm,
) -> RrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let space = HilbertSpace::new(n_sites, ell_max)?;
        *out = Box::into_raw(Box::new(RrRbm(RbmParameters::random(&space, n_hidden, seed))));
        Ok(())
    })
}

/// Loads a checkpoint file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_load(path: *const c_char, out: *mut *mut RrRbm) -> RrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = rbm::load_params(&path_arg(path)?)?;
        *out = Box::into_raw(Box::new(RrRbm(p)));
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_save(model: *const RrRbm, path: *const c_char) -> RrStatus {
    guard(|| {
        let m = deref(model, "rbm")?;
        rbm::save_params(&m.0, &path_arg(path)?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_free(model: *mut RrRbm) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes `n_sites`, `ell_max` and `n_hidden`; any output may be null.
///
/// # Safety
/// `model` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_shape(
    model: *const RrRbm,
    n_sites: *mut usize,
    ell_max: *mut u32,
    n_hidden: *mut usize,
) -> RrStatus {
    guard(|| {
        let m = &deref(model, "rbm")?.0;
        if let Some(p) = n_sites.as_mut() {
            *p = m.n_sites();
        }
        if let Some(p) = ell_max.as_mut() {
            *p = m.ell_max();
        }
        if let Some(p) = n_hidden.as_mut() {
            *p = m.n_hidden();
        }
        Ok(())
    })
}

/// `ℰ(σ)` for one configuration of `len = n_sites` labels.
///
/// # Safety
/// `labels` must point to `len` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_effective_energy(
    model: *const RrRbm,
    labels: *const u32,
    len: usize,
    out: *mut f64,
) -> RrStatus {
    guard(|| {
        let m = &deref(model, "rbm")?.0;
        require_len(len, m.n_sites())?;
        let labels = in_slice(labels, len, "labels")?;
        let cfg = RotorConfiguration::from_sigmas(labels.to_vec());
        if !m.space().contains(&cfg) {
            return Err(invalid(format!("label out of range for ell_max = {}", m.ell_max())));
        }
        *out.as_mut().ok_or_else(|| null("out"))? = m.effective_energy(labels);
        Ok(())
    })
}

/// `count` independent `k`-step Gibbs chains from the all-zero
/// configuration; final visible labels go to `labels` as `[count][n_sites]`.
///
/// # Safety
/// `labels` must point to `len` writable `u32`s.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_gibbs_sample(
    model: *const RrRbm,
    k: usize,
    count: usize,
    seed: u64,
    labels: *mut u32,
    len: usize,
) -> RrStatus {
    guard(|| {
        let m = &deref(model, "rbm")?.0;
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        let n = m.n_sites();
        require_len(len, count.checked_mul(n).ok_or_else(|| invalid("count overflows"))?)?;
        let out = out_slice(labels, len, "labels")?;
        let start = GibbsChainState::all_zero(n, m.n_hidden());
        for (row, s) in out.chunks_exact_mut(n).zip(rbm::gibbs_sample(m, &start, k, count, seed)) {
            row.copy_from_slice(s.sigmas());
        }
        Ok(())
    })
}

/// Monte Carlo `E_RBM` over `count` configurations given as `[count][n_sites]`
/// labels; writes the total energy and its standard error.
///
/// # Safety
/// Handles must be live; `labels` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn rr_rbm_energy(
    model: *const RrRbm,
    h: *const RrHamiltonian,
    labels: *const u32,
    len: usize,
    energy: *mut f64,
    std_error: *mut f64,
) -> RrStatus {
    guard(|| {
        let m = &deref(model, "rbm")?.0;
        let h = &deref(h, "hamiltonian")?.0;
        let n = m.n_sites();
        if len == 0 || !len.is_multiple_of(n) {
            return Err(RrStatusError(RrStatus::DimensionMismatch, format!("{len} labels is not a multiple of {n}")));
        }
        let labels = in_slice(labels, len, "labels")?;
        let space = m.space();
        let samples = labels
            .chunks_exact(n)
            .map(|c| {
                let cfg = RotorConfiguration::from_sigmas(c.to_vec());
                if space.contains(&cfg) {
                    Ok(cfg)
                } else {
                    Err(invalid(format!("configuration {c:?} outside the visible space")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let est = rotor_recon::estimators::energy_rbm(m, &samples, h)?;
        if let Some(p) = energy.as_mut() {
            *p = est.total;
        }
        if let Some(p) = std_error.as_mut() {
            *p = est.std_error;
        }
        Ok(())
    })
}
