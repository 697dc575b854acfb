//! C ABI for the aqnn toolkit.
//!
//! Channels are held behind the opaque handle [`AqnnChoi`]; every function
//! returns an [`AqnnStatus`] code and writes results through out-pointers.
//! Complex buffers are interleaved `[re0, im0, re1, im1, ...]` in row-major
//! order, caller-allocated. Handles must be released with
//! [`aqnn_choi_free`]. The generated header lives at `include/aqnn.h`.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use aqnn::attractor::{build_canonical, CorrelationMatrix};
use aqnn::channel::{fixed_point_space, ChoiCandidate, CptpVerdict};
use aqnn::gardner::{
    analytic_log_vr_stirling, analytic_relative_volume, analytic_v_cptp, estimate_relative_volume,
    optimal_epsilon, sample_cptp, vr_optimal, GardnerConfig,
};
use aqnn::linalg::{BipartiteDims, Complex64, ComplexMatrix, DensityMatrix, SeedStream, Tolerances};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AqnnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotCptp = 4,
    NumericalFailure = 5,
}

/// CPTP verdict as a C enum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AqnnVerdict {
    Cptp = 0,
    CpOnly = 1,
    TpOnly = 2,
    Neither = 3,
}

/// Result of the CPTP verification checks.
#[repr(C)]
pub struct AqnnCptpReport {
    pub min_eigenvalue: f64,
    pub tp_deviation: f64,
    pub hermiticity_deviation: f64,
    pub verdict: AqnnVerdict,
}

/// Monte Carlo volume estimate.
#[repr(C)]
pub struct AqnnVolumeEstimate {
    pub fraction: f64,
    /// Binomial standard error sqrt(f(1-f)/samples).
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Opaque channel handle (a Choi operator together with its dimensions).
pub struct AqnnChoi {
    inner: ChoiCandidate,
}

fn tolerances() -> Tolerances {
    Tolerances::default()
}

unsafe fn slice_from<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn matrix_from_interleaved(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    let entries = data
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    ComplexMatrix::new(rows, cols, entries)
}

fn write_interleaved(m: &ComplexMatrix, out: &mut [f64]) {
    for (i, z) in m.data.iter().enumerate() {
        out[2 * i] = z.re;
        out[2 * i + 1] = z.im;
    }
}

fn guarded(f: impl FnOnce() -> AqnnStatus) -> AqnnStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(AqnnStatus::NumericalFailure)
}

/// Version string of the library; static storage, do not free.
#[no_mangle]
pub extern "C" fn aqnn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates the identity-channel Choi operator on an `n`-dimensional space.
///
/// # Safety
/// `out` must be a valid pointer to an `AqnnChoi*` slot.
#[no_mangle]
pub unsafe extern "C" fn aqnn_choi_identity(n: usize, out: *mut *mut AqnnChoi) -> AqnnStatus {
    if out.is_null() {
        return AqnnStatus::NullPointer;
    }
    if n == 0 {
        return AqnnStatus::InvalidArgument;
    }
    guarded(|| {
        let choi = aqnn::channel::ChoiMatrix::identity(n);
        *out = Box::into_raw(Box::new(AqnnChoi {
            inner: choi.as_candidate().clone(),
        }));
        AqnnStatus::Ok
    })
}

/// Creates a channel handle from a raw Choi matrix of size
/// `(dim_a*dim_b) × (dim_a*dim_b)`, entries interleaved row-major
/// (`2*(dim_a*dim_b)²` doubles). The operator is not required to be CPTP;
/// use [`aqnn_choi_verify`] to check.
///
/// # Safety
/// `entries` must point to `2*(dim_a*dim_b)²` readable doubles and `out`
/// to a valid `AqnnChoi*` slot.
#[no_mangle]
pub unsafe extern "C" fn aqnn_choi_new(
    dim_a: usize,
    dim_b: usize,
    entries: *const f64,
    out: *mut *mut AqnnChoi,
) -> AqnnStatus {
    if out.is_null() {
        return AqnnStatus::NullPointer;
    }
    if dim_a == 0 || dim_b == 0 {
        return AqnnStatus::InvalidArgument;
    }
    let total = dim_a * dim_b;
    let Some(data) = slice_from(entries, 2 * total * total) else {
        return AqnnStatus::NullPointer;
    };
    guarded(|| {
        let mat = matrix_from_interleaved(total, total, data);
        match ChoiCandidate::new(BipartiteDims::new(dim_a, dim_b), mat) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(AqnnChoi { inner }));
                AqnnStatus::Ok
            }
            Err(_) => AqnnStatus::InvalidArgument,
        }
    })
}

/// Releases a channel handle. Null is ignored.
///
/// # Safety
/// `handle` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn aqnn_choi_free(handle: *mut AqnnChoi) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Reads the input/output dimensions of a channel handle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aqnn_choi_dims(
    handle: *const AqnnChoi,
    dim_a: *mut usize,
    dim_b: *mut usize,
) -> AqnnStatus {
    if handle.is_null() || dim_a.is_null() || dim_b.is_null() {
        return AqnnStatus::NullPointer;
    }
    let dims = (*handle).inner.dims();
    *dim_a = dims.dim_a;
    *dim_b = dims.dim_b;
    AqnnStatus::Ok
}

/// Copies the Choi matrix out as interleaved doubles
/// (`2*(dim_a*dim_b)²` values).
///
/// # Safety
/// `out` must point to at least `2*(dim_a*dim_b)²` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aqnn_choi_entries(
    handle: *const AqnnChoi,
    out: *mut f64,
) -> AqnnStatus {
    if handle.is_null() || out.is_null() {
        return AqnnStatus::NullPointer;
    }
    let mat = (*handle).inner.matrix();
    let out_slice = std::slice::from_raw_parts_mut(out, 2 * mat.rows * mat.cols);
    write_interleaved(mat, out_slice);
    AqnnStatus::Ok
}

/// Runs the CPTP checks at tolerance `tol` (pass 0 for the default 1e-9).
///
/// # Safety
/// `handle` and `report` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn aqnn_choi_verify(
    handle: *const AqnnChoi,
    tol: f64,
    report: *mut AqnnCptpReport,
) -> AqnnStatus {
    if handle.is_null() || report.is_null() {
        return AqnnStatus::NullPointer;
    }
    guarded(|| {
        let mut t = tolerances();
        if tol > 0.0 {
            t.herm = tol;
            t.psd = tol;
            t.tp = tol;
        }
        let r = (*handle).inner.verify(&t);
        (*report).min_eigenvalue = r.min_eigenvalue;
        (*report).tp_deviation = r.tp_deviation;
        (*report).hermiticity_deviation = r.hermiticity_deviation;
        (*report).verdict = match r.verdict {
            CptpVerdict::Cptp => AqnnVerdict::Cptp,
            CptpVerdict::CpOnly => AqnnVerdict::CpOnly,
            CptpVerdict::TpOnly => AqnnVerdict::TpOnly,
            CptpVerdict::Neither => AqnnVerdict::Neither,
        };
        AqnnStatus::Ok
    })
}

/// Applies the channel to a density matrix given as `2*dim_a²` interleaved
/// doubles, writing `2*dim_b²` interleaved doubles.
///
/// # Safety
/// `rho` must point to `2*dim_a²` readable doubles and `out` to `2*dim_b²`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn aqnn_choi_apply(
    handle: *const AqnnChoi,
    rho: *const f64,
    out: *mut f64,
) -> AqnnStatus {
    if handle.is_null() || out.is_null() {
        return AqnnStatus::NullPointer;
    }
    let dims = (*handle).inner.dims();
    let Some(rho_data) = slice_from(rho, 2 * dims.dim_a * dims.dim_a) else {
        return AqnnStatus::NullPointer;
    };
    guarded(|| {
        let rho_mat = matrix_from_interleaved(dims.dim_a, dims.dim_a, rho_data);
        match (*handle).inner.apply_raw(&rho_mat) {
            Ok(image) => {
                let out_slice = std::slice::from_raw_parts_mut(out, 2 * dims.dim_b * dims.dim_b);
                write_interleaved(&image, out_slice);
                AqnnStatus::Ok
            }
            Err(_) => AqnnStatus::DimensionMismatch,
        }
    })
}

/// Builds the canonical attractor channel from an `n × n` coefficient
/// matrix (interleaved, row-major): PSD with unit diagonal, entry `(μ,ν)`
/// multiplies the coherence `ρ_{μν}`.
///
/// # Safety
/// `b_entries` must point to `2n²` readable doubles and `out` to a valid
/// `AqnnChoi*` slot.
#[no_mangle]
pub unsafe extern "C" fn aqnn_canonical_channel(
    n: usize,
    b_entries: *const f64,
    out: *mut *mut AqnnChoi,
) -> AqnnStatus {
    if out.is_null() {
        return AqnnStatus::NullPointer;
    }
    if n == 0 {
        return AqnnStatus::InvalidArgument;
    }
    let Some(data) = slice_from(b_entries, 2 * n * n) else {
        return AqnnStatus::NullPointer;
    };
    guarded(|| {
        let mat = matrix_from_interleaved(n, n, data);
        match CorrelationMatrix::new(mat, &tolerances()) {
            Ok(b) => {
                let choi = build_canonical(&b);
                *out = Box::into_raw(Box::new(AqnnChoi {
                    inner: choi.as_candidate().clone(),
                }));
                AqnnStatus::Ok
            }
            Err(_) => AqnnStatus::InvalidArgument,
        }
    })
}

/// Draws one channel from the Hilbert–Schmidt-uniform CPTP ensemble on an
/// `n`-dimensional space, deterministically from `(master_seed, stream_id)`.
///
/// # Safety
/// `out` must be a valid pointer to an `AqnnChoi*` slot.
#[no_mangle]
pub unsafe extern "C" fn aqnn_sample_cptp(
    n: usize,
    master_seed: u64,
    stream_id: u64,
    out: *mut *mut AqnnChoi,
) -> AqnnStatus {
    if out.is_null() {
        return AqnnStatus::NullPointer;
    }
    if n == 0 {
        return AqnnStatus::InvalidArgument;
    }
    guarded(|| {
        let mut stream = SeedStream::new(master_seed, stream_id);
        let choi = sample_cptp(BipartiteDims::square(n), &mut stream);
        *out = Box::into_raw(Box::new(AqnnChoi {
            inner: choi.as_candidate().clone(),
        }));
        AqnnStatus::Ok
    })
}

/// Fixed-point structure of a square channel: number of transfer-matrix
/// eigenvalues with `|λ−1| ≤ window` and the peripheral count
/// (`|λ| ≥ 1−window`, `λ ≠ 1`).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn aqnn_fixed_point_dims(
    handle: *const AqnnChoi,
    window: f64,
    dimension: *mut usize,
    peripheral: *mut usize,
) -> AqnnStatus {
    if handle.is_null() || dimension.is_null() || peripheral.is_null() {
        return AqnnStatus::NullPointer;
    }
    let dims = (*handle).inner.dims();
    if dims.dim_a != dims.dim_b {
        return AqnnStatus::DimensionMismatch;
    }
    guarded(|| match fixed_point_space(&(*handle).inner, window) {
        Ok(fps) => {
            *dimension = fps.dimension;
            *peripheral = fps.peripheral_dimension;
            AqnnStatus::Ok
        }
        Err(_) => AqnnStatus::NumericalFailure,
    })
}

/// Applies the channel to the `mu`-th computational basis projector and
/// returns the survival overlap `⟨μ|Λ(|μ⟩⟨μ|)|μ⟩` (the Choi diagonal).
///
/// # Safety
/// `handle` and `overlap` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn aqnn_pattern_overlap(
    handle: *const AqnnChoi,
    mu: usize,
    overlap: *mut f64,
) -> AqnnStatus {
    if handle.is_null() || overlap.is_null() {
        return AqnnStatus::NullPointer;
    }
    let dims = (*handle).inner.dims();
    if mu >= dims.dim_a || mu >= dims.dim_b {
        return AqnnStatus::InvalidArgument;
    }
    *overlap = (*handle).inner.element(mu, mu, mu, mu).re;
    AqnnStatus::Ok
}

/// Monte Carlo estimate of the fraction of CPTP maps on an `n`-dimensional
/// space that hold the first `m` basis states inside the basin window
/// `epsilon`. Bit-reproducible from `master_seed` for any thread count.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aqnn_estimate_relative_volume(
    n: usize,
    m: usize,
    epsilon: f64,
    samples: u64,
    master_seed: u64,
    out: *mut AqnnVolumeEstimate,
) -> AqnnStatus {
    if out.is_null() {
        return AqnnStatus::NullPointer;
    }
    let config = GardnerConfig {
        n,
        m,
        epsilon,
        samples,
        master_seed,
    };
    guarded(|| match estimate_relative_volume(&config) {
        Ok(est) => {
            (*out).fraction = est.fraction;
            (*out).std_error = est.stderr;
            (*out).hits = est.hits;
            (*out).samples = est.samples;
            AqnnStatus::Ok
        }
        Err(_) => AqnnStatus::InvalidArgument,
    })
}

/// Asymptotic volume of the CPTP body at manifold dimension `d`
/// (NaN for invalid input).
#[no_mangle]
pub extern "C" fn aqnn_v_cptp(d: f64) -> f64 {
    analytic_v_cptp(d).map(|v| v.value).unwrap_or(f64::NAN)
}

/// Analytic relative volume for `k` constraints in a `d`-dimensional body
/// at basin width `epsilon` (NaN for invalid input).
#[no_mangle]
pub extern "C" fn aqnn_relative_volume(epsilon: f64, k: f64, d: f64) -> f64 {
    analytic_relative_volume(epsilon, k, d)
        .map(|v| v.value)
        .unwrap_or(f64::NAN)
}

/// Stirling approximation of the log relative volume.
#[no_mangle]
pub extern "C" fn aqnn_log_vr_stirling(epsilon: f64, m: f64, d: f64) -> f64 {
    analytic_log_vr_stirling(epsilon, m, d)
}

/// Basin width maximizing the relative volume subject to `V_R < 1`.
#[no_mangle]
pub extern "C" fn aqnn_optimal_epsilon(d: f64) -> f64 {
    optimal_epsilon(d)
}

/// Relative volume at the optimal basin width, `exp(−m²/(4d))`.
#[no_mangle]
pub extern "C" fn aqnn_vr_optimal(m: f64, d: f64) -> f64 {
    vr_optimal(m, d)
}

/// Purity `Tr[ρ²]` of a density matrix given as interleaved doubles;
/// returns NaN for invalid input. Mostly a convenience for bindings tests.
///
/// # Safety
/// `rho` must point to `2n²` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn aqnn_state_purity(n: usize, rho: *const f64) -> f64 {
    let Some(data) = slice_from(rho, 2 * n * n) else {
        return f64::NAN;
    };
    let mat = matrix_from_interleaved(n, n, data);
    match DensityMatrix::new(mat, &tolerances()) {
        Ok(state) => state.purity(),
        Err(_) => f64::NAN,
    }
}
