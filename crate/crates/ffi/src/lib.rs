//! C ABI over the `cascaded-relay` analysis library.
//!
//! Every fallible function returns a [`CrStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`cr_last_error_message`]. Networks and classifiers are opaque
//! handles created by `*_new` functions and released by the matching
//! `*_free`. All SNRs and powers are linear ratios.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use cascaded_relay::channel::{fading_params_from_order, ChannelModel};
use cascaded_relay::classifier::{map_classify, AmplitudeSequence, ClassModel};
use cascaded_relay::montecarlo::{mc_outage_saf, mc_outage_sdf, McConfig};
use cascaded_relay::power_alloc::{pa_fixed_point, pa_objective, pa_oracle, PowerSplit};
use cascaded_relay::saf::outage_saf;
use cascaded_relay::sdf::{
    diversity_order, outage_sdf_asymptotic, outage_sdf_best, outage_sdf_ith, NetworkConfig,
};
use cascaded_relay::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OrderOutOfRange = 3,
    NotIid = 4,
    Numerical = 5,
    Panic = 6,
}

/// Relay selection protocol.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrScheme {
    SelectiveDecodeForward = 0,
    SelectiveAmplifyForward = 1,
}

/// Opaque relay network.
pub struct CrNetwork {
    config: NetworkConfig,
}

/// Opaque cascade-order classifier.
pub struct CrClassifier {
    classes: Vec<ClassModel>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CrStatus {
    match e {
        Error::OrderRange(_) => CrStatus::OrderOutOfRange,
        Error::NotIid(_) => CrStatus::NotIid,
        e if e.is_numerical() => CrStatus::Numerical,
        _ => CrStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard<F>(f: F) -> CrStatus
where
    F: FnOnce() -> Result<(), (CrStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CrStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CrStatus::Panic
        }
    }
}

fn lib<T>(r: cascaded_relay::Result<T>) -> Result<T, (CrStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CrStatus, String) {
    (CrStatus::NullPointer, format!("{what} is null"))
}

fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (CrStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: checked non-null; the caller guarantees it points to writable storage.
    unsafe { out.write(value) };
    Ok(())
}

fn network<'a>(net: *const CrNetwork) -> Result<&'a CrNetwork, (CrStatus, String)> {
    // SAFETY: a non-null handle comes from `cr_network_new_uniform` and is still live.
    unsafe { net.as_ref() }.ok_or_else(|| null("network handle"))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cr_version() -> *const c_char {
    const VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}

/// Shape `m` and spread `Ω` of the cascade-order-`n` fading approximation.
///
/// # Safety
/// `m` and `omega` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_fading_params(n: u32, m: *mut f64, omega: *mut f64) -> CrStatus {
    guard(|| {
        let f = lib(fading_params_from_order(n))?;
        write(m, f.m, "m")?;
        write(omega, f.omega, "omega")
    })
}

/// Creates a network of `relays` identical relays with cascade order `n` on
/// both hops, mean channel gains `lambda1`, `lambda2`, threshold `gamma_o`,
/// unit noise power and unit total power.
///
/// # Safety
/// `out` must be valid for writes. The handle must be released with [`cr_network_free`].
#[no_mangle]
pub unsafe extern "C" fn cr_network_new_uniform(
    n: u32,
    relays: usize,
    lambda1: f64,
    lambda2: f64,
    gamma_o: f64,
    out: *mut *mut CrNetwork,
) -> CrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = lib(NetworkConfig::uniform(n, relays, lambda1, lambda2, gamma_o))?;
        write(out, Box::into_raw(Box::new(CrNetwork { config })), "out")
    })
}

/// Releases a network handle. Null is ignored.
///
/// # Safety
/// `net` must be null or a handle from [`cr_network_new_uniform`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_network_free(net: *mut CrNetwork) {
    if !net.is_null() {
        // SAFETY: the caller passes a live handle created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(net) });
    }
}

/// Sets the total power budget `P_T` used by the power-allocation calls.
///
/// # Safety
/// `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cr_network_set_total_power(net: *mut CrNetwork, total_power: f64) -> CrStatus {
    guard(|| {
        // SAFETY: a non-null handle is live and uniquely borrowed for this call.
        let net = unsafe { net.as_mut() }.ok_or_else(|| null("network handle"))?;
        net.config = lib(net.config.with_total_power(total_power))?;
        Ok(())
    })
}

/// Number of relays in the network.
///
/// # Safety
/// `net` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_network_relays(net: *const CrNetwork, out: *mut usize) -> CrStatus {
    guard(|| write(out, network(net)?.config.len(), "out"))
}

/// Analytic outage with both hops at per-hop SNR `snr` (P/N₀, linear).
///
/// # Safety
/// `net` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_outage(
    net: *const CrNetwork,
    scheme: CrScheme,
    snr: f64,
    out: *mut f64,
) -> CrStatus {
    guard(|| {
        let c = &network(net)?.config;
        let power = PowerSplit::per_hop(c.noise_power * snr);
        let p = match scheme {
            CrScheme::SelectiveDecodeForward => lib(outage_sdf_best(c, &power))?,
            CrScheme::SelectiveAmplifyForward => lib(outage_saf(c, &power))?,
        };
        write(out, p, "out")
    })
}

/// S-DF outage when the relay of rank `rank` (1 = worst, N = best) forwards.
///
/// # Safety
/// `net` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_outage_sdf_rank(
    net: *const CrNetwork,
    snr: f64,
    rank: usize,
    out: *mut f64,
) -> CrStatus {
    guard(|| {
        let c = &network(net)?.config;
        let p = lib(outage_sdf_ith(c, &PowerSplit::per_hop(c.noise_power * snr), rank))?;
        write(out, p, "out")
    })
}

/// High-SNR asymptote of the outage (i.i.d. networks only).
///
/// # Safety
/// `net` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_outage_asymptotic(net: *const CrNetwork, snr: f64, out: *mut f64) -> CrStatus {
    guard(|| {
        let c = &network(net)?.config;
        let p = lib(outage_sdf_asymptotic(c, &PowerSplit::per_hop(c.noise_power * snr)))?;
        write(out, p, "out")
    })
}

/// Diversity order `mN/n` of the network's first source hop.
///
/// # Safety
/// `net` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_diversity_order(net: *const CrNetwork, out: *mut f64) -> CrStatus {
    guard(|| {
        let c = &network(net)?.config;
        write(out, diversity_order(&c.relays[0].source, c.len()), "out")
    })
}

/// Seeded Monte-Carlo outage over the exact cascaded channel.
///
/// # Safety
/// `net` must be a live handle; `value` and `std_error` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_outage_monte_carlo(
    net: *const CrNetwork,
    scheme: CrScheme,
    snr: f64,
    trials: u64,
    seed: u64,
    value: *mut f64,
    std_error: *mut f64,
) -> CrStatus {
    guard(|| {
        let c = &network(net)?.config;
        let power = PowerSplit::per_hop(c.noise_power * snr);
        let mc = lib(McConfig::new(trials, seed))?.with_channel(ChannelModel::CascadedRayleigh);
        let e = match scheme {
            CrScheme::SelectiveDecodeForward => lib(mc_outage_sdf(c, &power, &mc))?,
            CrScheme::SelectiveAmplifyForward => lib(mc_outage_saf(c, &power, &mc))?,
        };
        write(value, e.value, "value")?;
        write(std_error, e.std_error, "std_error")
    })
}

/// Power split `ρ = P₁/P_T` from the fixed-point iteration, and the outage there.
///
/// # Safety
/// `net` must be a live handle; `rho` and `outage` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_power_split_fixed_point(
    net: *const CrNetwork,
    rho: *mut f64,
    outage: *mut f64,
) -> CrStatus {
    guard(|| {
        let c = &network(net)?.config;
        let r = lib(pa_fixed_point(c, 1e-10, 10_000))?.split.rho;
        write(rho, r, "rho")?;
        write(outage, lib(pa_objective(r, c))?, "outage")
    })
}

/// Power split minimizing the outage by direct search, and the outage there.
///
/// # Safety
/// `net` must be a live handle; `rho` and `outage` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_power_split_oracle(
    net: *const CrNetwork,
    rho: *mut f64,
    outage: *mut f64,
) -> CrStatus {
    guard(|| {
        let c = &network(net)?.config;
        let r = lib(pa_oracle(c))?.rho;
        write(rho, r, "rho")?;
        write(outage, lib(pa_objective(r, c))?, "outage")
    })
}

/// Creates a classifier over cascade orders `orders[0..len]` with default
/// variances `2^{−n}`. `priors` may be null for uniform priors; otherwise it
/// holds `len` nonnegative weights, normalized internally.
///
/// # Safety
/// `orders` (and `priors` when non-null) must point to `len` readable values;
/// `out` must be valid for writes. Release with [`cr_classifier_free`].
#[no_mangle]
pub unsafe extern "C" fn cr_classifier_new(
    orders: *const u32,
    priors: *const f64,
    len: usize,
    out: *mut *mut CrClassifier,
) -> CrStatus {
    guard(|| {
        if orders.is_null() || out.is_null() {
            return Err(null("orders or out"));
        }
        if len == 0 {
            return Err((CrStatus::InvalidArgument, "empty class list".into()));
        }
        // SAFETY: the caller guarantees `len` readable elements.
        let orders = unsafe { slice::from_raw_parts(orders, len) };
        let weights = if priors.is_null() {
            vec![1.0; len]
        } else {
            // SAFETY: as above.
            unsafe { slice::from_raw_parts(priors, len) }.to_vec()
        };
        let mut classes = orders
            .iter()
            .zip(&weights)
            .map(|(&n, &w)| lib(ClassModel::new(n, ClassModel::default_sigma2(n), w)))
            .collect::<Result<Vec<_>, _>>()?;
        lib(cascaded_relay::classifier::normalize_priors(&mut classes))?;
        write(out, Box::into_raw(Box::new(CrClassifier { classes })), "out")
    })
}

/// Releases a classifier handle. Null is ignored.
///
/// # Safety
/// `c` must be null or a handle from [`cr_classifier_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cr_classifier_free(c: *mut CrClassifier) {
    if !c.is_null() {
        // SAFETY: the caller passes a live handle created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(c) });
    }
}

/// MAP cascade order for amplitudes `samples[0..len]`.
///
/// # Safety
/// `c` must be a live handle, `samples` must point to `len` readable values
/// and `label` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cr_classify(
    c: *const CrClassifier,
    samples: *const f64,
    len: usize,
    label: *mut u32,
) -> CrStatus {
    guard(|| {
        // SAFETY: a non-null handle is live.
        let c = unsafe { c.as_ref() }.ok_or_else(|| null("classifier handle"))?;
        if samples.is_null() {
            return Err(null("samples"));
        }
        // SAFETY: the caller guarantees `len` readable elements.
        let data = unsafe { slice::from_raw_parts(samples, len) }.to_vec();
        let seq = lib(AmplitudeSequence::new(data))?;
        write(label, lib(map_classify(&seq, &c.classes))?.label, "label")
    })
}
