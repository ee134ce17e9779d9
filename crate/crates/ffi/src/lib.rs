//! C ABI over the trapdeco library.
//!
//! Every function returns a [`TdStatus`]; results come back through out
//! pointers. On failure, [`td_last_error`] gives a message for the calling
//! thread. Chains are opaque handles created by [`td_chain_new`] and released
//! with [`td_chain_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trapdeco::chain::{find_equilibrium, normal_modes, EquilibriumChain, IonSpecies, ModeDecomposition, TrapPotential};
use trapdeco::cooling::{crosstalk_rate, CoolingConfig};
use trapdeco::decoherence::{rabi_trace, zero_point_spread};
use trapdeco::gates::gate_fidelity_bound;
use trapdeco::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    /// Invalid argument or configuration.
    InvalidArgument = 1,
    /// Argument outside the model's domain of validity.
    Domain = 2,
    /// A numerical procedure failed (no convergence, unstable chain).
    Numerical = 3,
    NullPointer = 4,
    /// Output buffer shorter than required.
    BufferTooSmall = 5,
    /// Internal error; please report.
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdPotentialKind {
    /// `p1` = axial angular frequency ω₀ (rad/s).
    Harmonic = 0,
    /// `V = p1·x² + p2·x⁴` (J/m², J/m⁴).
    QuadQuartic = 1,
    /// `p1` = ion spacing (m).
    EquispacedLog = 2,
}

/// Equilibrium chain with its normal modes.
pub struct TdChain {
    chain: EquilibriumChain,
    modes: ModeDecomposition,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: TdStatus, msg: impl Into<String>) -> TdStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> TdStatus {
    match e {
        Error::Input(_) => TdStatus::InvalidArgument,
        Error::Domain(_) => TdStatus::Domain,
        _ if e.is_numerical() => TdStatus::Numerical,
        _ => TdStatus::InvalidArgument,
    }
}

/// Run `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), TdStatus>) -> TdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TdStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(TdStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: trapdeco::Result<T>) -> Result<T, TdStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), TdStatus> {
    if p.is_null() {
        Err(fail(TdStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn species(label: *const c_char) -> Result<IonSpecies, TdStatus> {
    non_null(label, "species label")?;
    let label =
        CStr::from_ptr(label).to_str().map_err(|_| fail(TdStatus::InvalidArgument, "species label is not UTF-8"))?;
    lib(IonSpecies::from_label(label))
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], TdStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], TdStatus> {
    if len < needed {
        return Err(fail(TdStatus::BufferTooSmall, format!("{name} holds {len} values, {needed} needed")));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Solve for the equilibrium of `n_ions` ions of `species_label` (e.g.
/// `"171Yb+"`) and compute the axial modes. On success `*out` owns a new
/// handle.
///
/// # Safety
/// `species_label` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_chain_new(
    species_label: *const c_char,
    kind: TdPotentialKind,
    p1: f64,
    p2: f64,
    n_ions: usize,
    out: *mut *mut TdChain,
) -> TdStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let species = species(species_label)?;
        let potential = lib(match kind {
            TdPotentialKind::Harmonic => TrapPotential::harmonic(p1),
            TdPotentialKind::QuadQuartic => TrapPotential::quad_quartic(p1, p2),
            TdPotentialKind::EquispacedLog => TrapPotential::equispaced_log(n_ions, p1),
        })?;
        let chain = lib(find_equilibrium(&species, &potential, n_ions, Default::default()))?;
        let modes = lib(normal_modes(&chain))?;
        *out = Box::into_raw(Box::new(TdChain { chain, modes }));
        Ok(())
    })
}

/// Release a handle from [`td_chain_new`]. Null is ignored.
///
/// # Safety
/// `chain` must come from [`td_chain_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn td_chain_free(chain: *mut TdChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of ions, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn td_chain_n_ions(chain: *const TdChain) -> usize {
    chain.as_ref().map_or(0, |c| c.chain.n_ions())
}

/// Equilibrium positions in m, `n_ions` values.
///
/// # Safety
/// `chain` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn td_chain_positions(chain: *const TdChain, out: *mut f64, len: usize) -> TdStatus {
    guard(|| {
        non_null(chain, "chain")?;
        let c = &*chain;
        output(out, len, c.chain.n_ions(), "out")?.copy_from_slice(&c.chain.positions);
        Ok(())
    })
}

/// Mode angular frequencies in rad/s, ascending, `n_ions` values.
///
/// # Safety
/// `chain` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn td_chain_mode_frequencies(chain: *const TdChain, out: *mut f64, len: usize) -> TdStatus {
    guard(|| {
        non_null(chain, "chain")?;
        let c = &*chain;
        output(out, len, c.modes.n_modes(), "out")?.copy_from_slice(&c.modes.frequencies);
        Ok(())
    })
}

/// Participation matrix `b_im`, row-major with ions as rows:
/// `out[i * n_ions + m]`.
///
/// # Safety
/// `chain` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn td_chain_participation(chain: *const TdChain, out: *mut f64, len: usize) -> TdStatus {
    guard(|| {
        non_null(chain, "chain")?;
        let b = &(*chain).modes.participation;
        let n = b.nrows();
        let dst = output(out, len, n * n, "out")?;
        for i in 0..n {
            for m in 0..n {
                dst[i * n + m] = b[(i, m)];
            }
        }
        Ok(())
    })
}

/// Zero-point spread `sqrt(ħ/(2Mω))` in m.
///
/// # Safety
/// `species_label` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_zero_point_spread(species_label: *const c_char, omega: f64, out: *mut f64) -> TdStatus {
    guard(|| {
        non_null(out, "out")?;
        let s = species(species_label)?;
        *out = lib(zero_point_spread(&s, omega))?;
        Ok(())
    })
}

/// Thermally averaged Rabi trace at `n_times` times (s) for per-mode decay
/// parameters `thetas`. Each output array receives `n_times` values; any of
/// them may be null to skip it.
///
/// # Safety
/// Input pointers must reference the stated number of doubles; non-null
/// outputs must hold `n_times` doubles.
#[no_mangle]
pub unsafe extern "C" fn td_rabi_trace(
    omega0: f64,
    thetas: *const f64,
    n_thetas: usize,
    times: *const f64,
    n_times: usize,
    p1_out: *mut f64,
    contrast_out: *mut f64,
    phase_out: *mut f64,
) -> TdStatus {
    guard(|| {
        let thetas = input(thetas, n_thetas, "thetas")?;
        let times = input(times, n_times, "times")?;
        let trace = lib(rabi_trace(omega0, thetas, times))?;
        for (dst, src) in [(p1_out, &trace.p1), (contrast_out, &trace.contrast), (phase_out, &trace.phase)] {
            if !dst.is_null() {
                output(dst, n_times, n_times, "output")?.copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Two-qubit gate fidelity bound for `gate_count` gates with per-mode decay
/// parameters of both ions.
///
/// # Safety
/// `theta_i` and `theta_j` must reference `n_modes` doubles; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn td_gate_fidelity_bound(
    theta_i: *const f64,
    theta_j: *const f64,
    n_modes: usize,
    gate_count: u32,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        non_null(out, "out")?;
        let ti = input(theta_i, n_modes, "theta_i")?;
        let tj = input(theta_j, n_modes, "theta_j")?;
        *out = lib(gate_fidelity_bound(ti, tj, gate_count))?;
        Ok(())
    })
}

/// Crosstalk excitation rate per qubit (1/s) from coolant fluorescence. SI
/// units; linewidth and isotope shift in rad/s.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn td_crosstalk_rate(
    coolant_fraction: f64,
    spacing: f64,
    wavelength: f64,
    linewidth: f64,
    isotope_shift: f64,
    out: *mut f64,
) -> TdStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = CoolingConfig { coolant_fraction, spacing, wavelength, linewidth, isotope_shift };
        *out = lib(crosstalk_rate(&cfg))?;
        Ok(())
    })
}
