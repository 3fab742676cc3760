//! C interface to `hns_core`.
//!
//! Every entry point returns an [`HnsStatus`] and writes results through
//! out-pointers. Objects cross the boundary as opaque handles that the
//! caller releases with the matching `*_free`. On failure the message is
//! kept per thread and can be copied out with [`hns_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hns_core::caputo::{FracOrder, ScalarField1D, TimeGrid};
use hns_core::fdm::{solve_fde_l1, FdeInstance};
use hns_core::hermite::{apply_stencil, build_stencil, error_bound, HermiteStencil};
use hns_core::net::{init_net, DenseNet};
use hns_core::HnsError;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HnsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Contract = 3,
    OracleNonConvergence = 4,
    SingularStep = 5,
    DegenerateFit = 6,
    Config = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Caputo stencil for one target node.
pub struct HnsStencil(HermiteStencil);

/// Dense GELU network.
pub struct HnsNet(DenseNet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &HnsError) -> HnsStatus {
    match err {
        HnsError::Domain(_) => HnsStatus::Domain,
        HnsError::Contract(_) => HnsStatus::Contract,
        HnsError::OracleNonConvergence { .. } => HnsStatus::OracleNonConvergence,
        HnsError::SingularStep { .. } => HnsStatus::SingularStep,
        HnsError::DegenerateFit(_) => HnsStatus::DegenerateFit,
        HnsError::Config(_) | HnsError::Checkpoint(_) => HnsStatus::Config,
        HnsError::Io(_) => HnsStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Small(usize),
    Core(HnsError),
}

impl From<HnsError> for Failure {
    fn from(e: HnsError) -> Self {
        Failure::Core(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> HnsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HnsStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer passed as `{name}`"));
            HnsStatus::NullPointer
        }
        Ok(Err(Failure::Small(needed))) => {
            set_error(format!("output buffer too small, {needed} elements needed"));
            HnsStatus::BufferTooSmall
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            HnsStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn input<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Copy the calling thread's last error message, NUL-terminated and
/// truncated to `capacity`. Returns the full message length (0 if none).
///
/// # Safety
/// `buf` must be valid for `capacity` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn hns_last_error(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Γ(x).
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hns_gamma(x: f64, result: *mut f64) -> HnsStatus {
    guard(|| {
        *out(result, "result")? = hns_core::gamma(x)?;
        Ok(())
    })
}

/// Caputo derivative of order `alpha` of `t^q` at `t`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hns_caputo_monomial(q: f64, alpha: f64, t: f64, result: *mut f64) -> HnsStatus {
    guard(|| {
        *out(result, "result")? = hns_core::caputo_monomial(q, FracOrder::new(alpha)?, t)?;
        Ok(())
    })
}

/// A-priori stencil error bound for `sup |u^{(p+1)}| = max_deriv`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hns_error_bound(p: usize, alpha: f64, dt: f64, max_deriv: f64, result: *mut f64) -> HnsStatus {
    guard(|| {
        *out(result, "result")? = error_bound(p, FracOrder::new(alpha)?, dt, max_deriv)?;
        Ok(())
    })
}

/// Stencil of degree `p` for the node `t_n = n·dt`.
///
/// # Safety
/// `stencil` must be a valid pointer; the handle is freed with
/// [`hns_stencil_free`].
#[no_mangle]
pub unsafe extern "C" fn hns_stencil_new(p: usize, alpha: f64, n: usize, dt: f64, stencil: *mut *mut HnsStencil) -> HnsStatus {
    guard(|| {
        let slot = out(stencil, "stencil")?;
        let built = build_stencil(p, FracOrder::new(alpha)?, n, dt)?;
        *slot = Box::into_raw(Box::new(HnsStencil(built)));
        Ok(())
    })
}

/// Apply a stencil to nodal data at `t_0..t_n` (`len = n + 1`). `first` and
/// `second` may be null when the degree does not need them.
///
/// # Safety
/// Non-null arrays must hold `len` values; `stencil` must come from
/// [`hns_stencil_new`].
#[no_mangle]
pub unsafe extern "C" fn hns_stencil_apply(
    stencil: *const HnsStencil,
    values: *const f64,
    first: *const f64,
    second: *const f64,
    len: usize,
    result: *mut f64,
) -> HnsStatus {
    guard(|| {
        let st = stencil.as_ref().ok_or(Failure::Null("stencil"))?;
        let values = input(values, len, "values")?.to_vec();
        let first = (!first.is_null()).then(|| input(first, len, "first").map(<[f64]>::to_vec)).transpose()?;
        let second = (!second.is_null()).then(|| input(second, len, "second").map(<[f64]>::to_vec)).transpose()?;
        let field = ScalarField1D::new(values, first, second)?;
        *out(result, "result")? = apply_stencil(&st.0, &field)?;
        Ok(())
    })
}

/// # Safety
/// `stencil` must come from [`hns_stencil_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hns_stencil_free(stencil: *mut HnsStencil) {
    if !stencil.is_null() {
        drop(Box::from_raw(stencil));
    }
}

/// Seeded network with the given layer widths.
///
/// # Safety
/// `sizes` must hold `count` entries; `net` must be a valid pointer. The
/// handle is freed with [`hns_net_free`].
#[no_mangle]
pub unsafe extern "C" fn hns_net_init(seed: u64, sizes: *const usize, count: usize, net: *mut *mut HnsNet) -> HnsStatus {
    guard(|| {
        let slot = out(net, "net")?;
        let sizes = input(sizes, count, "sizes")?;
        *slot = Box::into_raw(Box::new(HnsNet(init_net(seed, sizes)?)));
        Ok(())
    })
}

/// Number of trainable parameters.
///
/// # Safety
/// `net` must come from [`hns_net_init`]; `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hns_net_param_count(net: *const HnsNet, result: *mut usize) -> HnsStatus {
    guard(|| {
        let net = net.as_ref().ok_or(Failure::Null("net"))?;
        *out(result, "result")? = net.0.param_count();
        Ok(())
    })
}

/// Network output at `input` (`len` must equal the input width).
///
/// # Safety
/// `input` must hold `len` values; `net` must come from [`hns_net_init`].
#[no_mangle]
pub unsafe extern "C" fn hns_net_eval(net: *const HnsNet, input_ptr: *const f64, len: usize, result: *mut f64) -> HnsStatus {
    guard(|| {
        let net = net.as_ref().ok_or(Failure::Null("net"))?;
        let x = input(input_ptr, len, "input")?;
        if len != net.0.input_dim() {
            return Err(HnsError::Contract(format!("network takes {} inputs, got {len}", net.0.input_dim())).into());
        }
        *out(result, "result")? = net.0.eval(x);
        Ok(())
    })
}

/// # Safety
/// `net` must come from [`hns_net_init`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hns_net_free(net: *mut HnsNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// L1 time march of `D^α u = u + Γ(3)/Γ(3−α) t^{2−α} − t² − 1`,
/// `u(0) = 1` on `[0, horizon]` with `node_count` nodes. Writes the nodal
/// values into `values` (capacity `capacity`).
///
/// # Safety
/// `values` must be valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn hns_fdm_benchmark(
    alpha: f64,
    horizon: f64,
    node_count: usize,
    values: *mut f64,
    capacity: usize,
) -> HnsStatus {
    guard(|| {
        if capacity < node_count {
            return Err(Failure::Small(node_count));
        }
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        let grid = TimeGrid::from_node_count(horizon, node_count)?;
        let field = solve_fde_l1(&FdeInstance::benchmark(FracOrder::new(alpha)?, grid))?;
        slice::from_raw_parts_mut(values, node_count).copy_from_slice(&field.values);
        Ok(())
    })
}
