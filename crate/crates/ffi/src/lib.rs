//! C ABI over the `uhlmann` toolkit.
//!
//! Matrices cross the boundary as row-major arrays of interleaved `re, im`
//! doubles (`2·n·n` values); vectors likewise (`2·n` values). Algebras are
//! opaque handles owned by the caller and released with
//! [`uhlmann_algebra_free`]. Every fallible call returns a [`UhlmannStatus`];
//! on failure [`uhlmann_last_error`] describes the most recent error on the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use uhlmann::algebra::OperatorAlgebra;
use uhlmann::duality::{check_haag_duality, check_local_tomography, max_overlap};
use uhlmann::states::{fidelity, DensityMatrix, VectorState};
use uhlmann::toric::{self, Lattice};
use uhlmann::{CMatrix, CVector, Error, Tolerances, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UhlmannStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad dimensions, tolerances or input values.
    InvalidArgument = 2,
    Precondition = 3,
    /// A numerical self-check failed or an iteration did not settle.
    Numerical = 4,
    Geometry = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UhlmannTolerances {
    pub eq_tol: f64,
    pub rank_tol: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UhlmannVerdict {
    pub pass: bool,
    pub residual: f64,
}

/// Summary of the four anyon-sector states relative to a pair of patches.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UhlmannToricClasses {
    /// `|⟨Ψ_i, Ψ_j⟩|` in sector order `1, e, m, em`, row-major.
    pub gram: [f64; 16],
    pub gram_is_identity: bool,
    pub b_signatures_equal: bool,
    /// Sector pairs (of 6) connectable by a Pauli supported in `A1 ∪ A2`.
    pub connectable_pairs: u32,
    pub radius: u32,
}

/// Opaque handle to an operator algebra.
pub struct UhlmannAlgebra {
    inner: OperatorAlgebra,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UhlmannStatus {
    match e {
        Error::Precondition(_) => UhlmannStatus::Precondition,
        Error::Geometry(_) => UhlmannStatus::Geometry,
        Error::InternalConsistency(_) | Error::NonConvergence { .. } | Error::TheoremViolation(_) => {
            UhlmannStatus::Numerical
        }
        _ => UhlmannStatus::InvalidArgument,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UhlmannStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UhlmannStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer passed for {what}"));
            UhlmannStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            UhlmannStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller promises `p` is null or points to a live `T`.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller promises `p` is null or points to writable memory for a `T`.
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

fn doubles<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: the caller promises `len` readable doubles at `p`.
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

fn tolerances(tol: *const UhlmannTolerances) -> Result<Tolerances, Failure> {
    // SAFETY: null or a valid pointer, as documented.
    match unsafe { tol.as_ref() } {
        None => Ok(Tolerances::default()),
        Some(t) => Ok(Tolerances::new(t.eq_tol, t.rank_tol)?),
    }
}

fn read_matrix(data: &[f64], n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        C64::new(data[k], data[k + 1])
    })
}

fn read_vector(data: &[f64], n: usize) -> CVector {
    CVector::from_fn(n, |i, _| C64::new(data[2 * i], data[2 * i + 1]))
}

fn square_len(n: usize) -> Result<usize, Failure> {
    n.checked_mul(n)
        .and_then(|m| m.checked_mul(2))
        .filter(|_| n > 0)
        .ok_or_else(|| Failure::Lib(Error::Validation(format!("invalid dimension {n}"))))
}

fn into_handle(inner: OperatorAlgebra, out: &mut *mut UhlmannAlgebra) {
    *out = Box::into_raw(Box::new(UhlmannAlgebra { inner }));
}

/// `eq_tol = 1e-9`, `rank_tol = 1e-10`.
#[no_mangle]
pub extern "C" fn uhlmann_tolerances_default() -> UhlmannTolerances {
    let t = Tolerances::default();
    UhlmannTolerances {
        eq_tol: t.eq_tol,
        rank_tol: t.rank_tol,
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uhlmann_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// The algebra generated by `count` matrices of size `dim × dim`, stored
/// consecutively in `generators`. `tol` may be null for the defaults.
///
/// # Safety
/// `generators` must hold `2·dim·dim·count` doubles (it may be null when
/// `count` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_algebra_generate(
    dim: usize,
    generators: *const f64,
    count: usize,
    tol: *const UhlmannTolerances,
    out: *mut *mut UhlmannAlgebra,
) -> UhlmannStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let tol = tolerances(tol)?;
        let per = square_len(dim)?;
        let gens = if count == 0 {
            Vec::new()
        } else {
            let total = per
                .checked_mul(count)
                .ok_or_else(|| Failure::Lib(Error::Validation("generator buffer too large".into())))?;
            let data = doubles(generators, total, "generators")?;
            data.chunks_exact(per).map(|m| read_matrix(m, dim)).collect()
        };
        into_handle(OperatorAlgebra::generate(&gens, dim, &tol)?, out);
        Ok(())
    })
}

/// `B(C^dim)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_algebra_full(dim: usize, out: *mut *mut UhlmannAlgebra) -> UhlmannStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        square_len(dim)?;
        into_handle(OperatorAlgebra::full(dim), out);
        Ok(())
    })
}

/// # Safety
/// `alg` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_algebra_free(alg: *mut UhlmannAlgebra) {
    if !alg.is_null() {
        // SAFETY: the handle came from `Box::into_raw` and is freed once.
        drop(unsafe { Box::from_raw(alg) });
    }
}

/// Writes the Hilbert-space dimension and the algebra dimension.
///
/// # Safety
/// `alg` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_algebra_dims(
    alg: *const UhlmannAlgebra,
    hilbert_dim: *mut usize,
    dim: *mut usize,
) -> UhlmannStatus {
    guard(|| {
        let alg = non_null(alg, "alg")?;
        *out_ref(hilbert_dim, "hilbert_dim")? = alg.inner.hilbert_dim();
        *out_ref(dim, "dim")? = alg.inner.dim();
        Ok(())
    })
}

/// # Safety
/// `alg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_algebra_commutant(
    alg: *const UhlmannAlgebra,
    tol: *const UhlmannTolerances,
    out: *mut *mut UhlmannAlgebra,
) -> UhlmannStatus {
    guard(|| {
        let alg = non_null(alg, "alg")?;
        let out = out_ref(out, "out")?;
        let tol = tolerances(tol)?;
        into_handle(alg.inner.commutant(&tol)?, out);
        Ok(())
    })
}

/// Whether `x` (`2·n·n` doubles) lies in the algebra; the verdict carries the
/// membership residual.
///
/// # Safety
/// `alg` must be a live handle, `x` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_algebra_contains(
    alg: *const UhlmannAlgebra,
    x: *const f64,
    tol: *const UhlmannTolerances,
    out: *mut UhlmannVerdict,
) -> UhlmannStatus {
    guard(|| {
        let alg = non_null(alg, "alg")?;
        let out = out_ref(out, "out")?;
        let tol = tolerances(tol)?;
        let n = alg.inner.hilbert_dim();
        let x = read_matrix(doubles(x, square_len(n)?, "x")?, n);
        let residual = alg.inner.membership_residual(&x);
        *out = UhlmannVerdict {
            pass: residual <= tol.eq_tol,
            residual,
        };
        Ok(())
    })
}

/// `b = a'` for commuting algebras.
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_check_haag_duality(
    a: *const UhlmannAlgebra,
    b: *const UhlmannAlgebra,
    tol: *const UhlmannTolerances,
    out: *mut UhlmannVerdict,
) -> UhlmannStatus {
    guard(|| {
        let (a, b) = (non_null(a, "a")?, non_null(b, "b")?);
        let out = out_ref(out, "out")?;
        let v = check_haag_duality(&a.inner, &b.inner, &tolerances(tol)?)?;
        *out = UhlmannVerdict {
            pass: v.pass,
            residual: v.residual,
        };
        Ok(())
    })
}

/// `a ∨ b = B(H)` for commuting algebras.
///
/// # Safety
/// `a` and `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_check_local_tomography(
    a: *const UhlmannAlgebra,
    b: *const UhlmannAlgebra,
    tol: *const UhlmannTolerances,
    out: *mut UhlmannVerdict,
) -> UhlmannStatus {
    guard(|| {
        let (a, b) = (non_null(a, "a")?, non_null(b, "b")?);
        let out = out_ref(out, "out")?;
        let r = check_local_tomography(&a.inner, &b.inner, &tolerances(tol)?)?;
        *out = UhlmannVerdict {
            pass: r.verdict.pass,
            residual: r.verdict.residual,
        };
        Ok(())
    })
}

/// `sup |⟨Ψ, uΦ⟩|` over unitaries `u` in `b`. When `optimizer` is not null it
/// receives the maximizing unitary (`2·n·n` doubles).
///
/// # Safety
/// `b` must be a live handle; `psi` and `phi` must hold `2·n` doubles;
/// `value` and a non-null `optimizer` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_max_overlap(
    b: *const UhlmannAlgebra,
    psi: *const f64,
    phi: *const f64,
    tol: *const UhlmannTolerances,
    value: *mut f64,
    optimizer: *mut f64,
) -> UhlmannStatus {
    guard(|| {
        let b = non_null(b, "b")?;
        let value = out_ref(value, "value")?;
        let tol = tolerances(tol)?;
        let n = b.inner.hilbert_dim();
        let psi = VectorState::new(read_vector(doubles(psi, 2 * n, "psi")?, n), &tol)?;
        let phi = VectorState::new(read_vector(doubles(phi, 2 * n, "phi")?, n), &tol)?;
        let r = max_overlap(&b.inner, &psi, &phi, &tol)?;
        *value = r.value;
        if !optimizer.is_null() {
            // SAFETY: non-null and documented to hold 2·n·n doubles.
            let dst = unsafe { slice::from_raw_parts_mut(optimizer, 2 * n * n) };
            for i in 0..n {
                for j in 0..n {
                    let z = r.optimizer[(i, j)];
                    dst[2 * (i * n + j)] = z.re;
                    dst[2 * (i * n + j) + 1] = z.im;
                }
            }
        }
        Ok(())
    })
}

/// `‖√ρ √σ‖₁` for `dim × dim` density matrices.
///
/// # Safety
/// `rho` and `sigma` must hold `2·dim·dim` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_fidelity(
    dim: usize,
    rho: *const f64,
    sigma: *const f64,
    tol: *const UhlmannTolerances,
    out: *mut f64,
) -> UhlmannStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let tol = tolerances(tol)?;
        let len = square_len(dim)?;
        let rho = DensityMatrix::new(read_matrix(doubles(rho, len, "rho")?, dim), &tol)?;
        let sigma = DensityMatrix::new(read_matrix(doubles(sigma, len, "sigma")?, dim), &tol)?;
        *out = fidelity(&rho, &sigma, &tol)?;
        Ok(())
    })
}

/// The `1, e, m, em` states on an `l × l` torus with patches `A1`, `A2` at
/// least `separation` apart. A negative `radius` picks the largest that fits.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uhlmann_toric_classes(
    l: usize,
    radius: i64,
    separation: usize,
    out: *mut UhlmannToricClasses,
) -> UhlmannStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let lattice = Lattice::new(l)?;
        let radius = match usize::try_from(radius) {
            Ok(r) => r,
            Err(_) => toric::largest_fitting_radius(&lattice, separation)
                .ok_or_else(|| Error::Geometry(format!("no patch radius keeps separation {separation} on L = {l}")))?,
        };
        let regions = toric::two_patch_regions(&lattice, radius, separation)?;
        let report = toric::purification_classes(&lattice, &regions)?.report;
        let mut gram = [0.0; 16];
        for i in 0..4 {
            gram[4 * i..4 * i + 4].copy_from_slice(&report.gram[i]);
        }
        *out = UhlmannToricClasses {
            gram,
            gram_is_identity: report.gram_is_identity,
            b_signatures_equal: report.b_signatures_equal,
            connectable_pairs: report.a_connectivity.iter().filter(|p| p.connectivity.feasible).count() as u32,
            radius: radius as u32,
        };
        Ok(())
    })
}
