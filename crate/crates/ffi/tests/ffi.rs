use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cascaded_relay::power_alloc::PowerSplit;
use cascaded_relay::sdf::{outage_sdf_best, NetworkConfig};
use cascaded_relay_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cr_last_error_message()) }.to_string_lossy().into_owned()
}

fn network(n: u32, relays: usize) -> *mut CrNetwork {
    let mut net = ptr::null_mut();
    assert_eq!(unsafe { cr_network_new_uniform(n, relays, 1.0, 1.0, 3.0, &mut net) }, CrStatus::Ok);
    assert!(!net.is_null());
    net
}

#[test]
fn outage_matches_library() {
    let net = network(2, 3);
    let mut p = 0.0;
    assert_eq!(unsafe { cr_outage(net, CrScheme::SelectiveDecodeForward, 100.0, &mut p) }, CrStatus::Ok);
    let c = NetworkConfig::uniform(2, 3, 1.0, 1.0, 3.0).unwrap();
    let expect = outage_sdf_best(&c, &PowerSplit::per_hop(100.0)).unwrap();
    assert_eq!(p, expect);
    assert!(last_error().is_empty());

    let mut saf = 0.0;
    assert_eq!(unsafe { cr_outage(net, CrScheme::SelectiveAmplifyForward, 100.0, &mut saf) }, CrStatus::Ok);
    assert!(saf >= p);
    let mut best = 0.0;
    assert_eq!(unsafe { cr_outage_sdf_rank(net, 100.0, 3, &mut best) }, CrStatus::Ok);
    assert!((best - p).abs() <= 1e-12 * p);
    let mut d = 0.0;
    assert_eq!(unsafe { cr_diversity_order(net, &mut d) }, CrStatus::Ok);
    assert!((d - 3.0 * 1.6467 / 2.0).abs() < 1e-12);
    let mut relays = 0;
    assert_eq!(unsafe { cr_network_relays(net, &mut relays) }, CrStatus::Ok);
    assert_eq!(relays, 3);
    unsafe { cr_network_free(net) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut net = ptr::null_mut();
    assert_eq!(
        unsafe { cr_network_new_uniform(0, 3, 1.0, 1.0, 3.0, &mut net) },
        CrStatus::OrderOutOfRange
    );
    assert!(net.is_null());
    assert!(last_error().contains("cascade order 0"));
    assert_eq!(
        unsafe { cr_network_new_uniform(2, 0, 1.0, 1.0, 3.0, &mut net) },
        CrStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { cr_network_new_uniform(2, 3, 1.0, 1.0, 3.0, ptr::null_mut()) },
        CrStatus::NullPointer
    );
    let mut p = 0.0;
    assert_eq!(
        unsafe { cr_outage(ptr::null(), CrScheme::SelectiveDecodeForward, 1.0, &mut p) },
        CrStatus::NullPointer
    );
    let net = {
        let mut h = ptr::null_mut();
        unsafe { cr_network_new_uniform(2, 3, 1.0, 10.0, 3.0, &mut h) };
        h
    };
    assert_eq!(unsafe { cr_outage(net, CrScheme::SelectiveAmplifyForward, 10.0, &mut p) }, CrStatus::NotIid);
    assert_eq!(unsafe { cr_outage_asymptotic(net, 10.0, &mut p) }, CrStatus::NotIid);
    unsafe { cr_network_free(net) };
    unsafe { cr_network_free(ptr::null_mut()) };
}

#[test]
fn power_split_and_simulation() {
    let mut net = ptr::null_mut();
    unsafe { cr_network_new_uniform(2, 3, 1.0, 10.0, 3.0, &mut net) };
    assert_eq!(unsafe { cr_network_set_total_power(net, 100.0) }, CrStatus::Ok);
    let (mut r1, mut p1, mut r2, mut p2) = (0.0, 0.0, 0.0, 0.0);
    assert_eq!(unsafe { cr_power_split_fixed_point(net, &mut r1, &mut p1) }, CrStatus::Ok);
    assert_eq!(unsafe { cr_power_split_oracle(net, &mut r2, &mut p2) }, CrStatus::Ok);
    assert!((r1 - r2).abs() < 0.02 && r1 > 0.5);
    assert_eq!(unsafe { cr_network_set_total_power(net, -1.0) }, CrStatus::InvalidArgument);
    unsafe { cr_network_free(net) };

    let net = network(1, 2);
    let (mut a, mut sa, mut b, mut sb) = (0.0, 0.0, 0.0, 0.0);
    let s = CrScheme::SelectiveDecodeForward;
    assert_eq!(unsafe { cr_outage_monte_carlo(net, s, 10.0, 50_000, 8, &mut a, &mut sa) }, CrStatus::Ok);
    assert_eq!(unsafe { cr_outage_monte_carlo(net, s, 10.0, 50_000, 8, &mut b, &mut sb) }, CrStatus::Ok);
    assert_eq!((a, sa), (b, sb));
    assert!(a > 0.0 && a < 1.0 && sa > 0.0);
    assert_eq!(unsafe { cr_outage_monte_carlo(net, s, 10.0, 0, 8, &mut a, &mut sa) }, CrStatus::InvalidArgument);
    unsafe { cr_network_free(net) };
}

#[test]
fn classifier_handle() {
    let orders = [1u32, 2, 3, 4];
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { cr_classifier_new(orders.as_ptr(), ptr::null(), 4, &mut c) }, CrStatus::Ok);
    let seq = cascaded_relay::classifier::sample_class(
        &cascaded_relay::classifier::default_classes([3]).unwrap()[0],
        1000,
        1,
        0,
    )
    .unwrap();
    let mut label = 0;
    let s = seq.samples();
    assert_eq!(unsafe { cr_classify(c, s.as_ptr(), s.len(), &mut label) }, CrStatus::Ok);
    assert_eq!(label, 3);
    assert_eq!(unsafe { cr_classify(c, s.as_ptr(), 0, &mut label) }, CrStatus::InvalidArgument);
    unsafe { cr_classifier_free(c) };

    let priors = [1e-12, 1.0];
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { cr_classifier_new(orders.as_ptr(), priors.as_ptr(), 2, &mut c) }, CrStatus::Ok);
    let one = [0.6];
    assert_eq!(unsafe { cr_classify(c, one.as_ptr(), 1, &mut label) }, CrStatus::Ok);
    assert_eq!(label, 2);
    unsafe { cr_classifier_free(c) };
}

#[test]
fn fading_parameters_and_version() {
    let (mut m, mut omega) = (0.0, 0.0);
    assert_eq!(unsafe { cr_fading_params(2, &mut m, &mut omega) }, CrStatus::Ok);
    assert!((m - 1.6467).abs() < 1e-12);
    assert_eq!(unsafe { cr_fading_params(2, ptr::null_mut(), &mut omega) }, CrStatus::NullPointer);
    let v = unsafe { CStr::from_ptr(cr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn c_program_links_against_header_and_static_library() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test binaries live in <target>/<profile>/deps.
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    // `cargo test` skips the staticlib crate type, so build it explicitly.
    let mut build = Command::new(env!("CARGO"));
    build.args(["build", "-q", "-p", "cascaded-relay-ffi", "--lib"]);
    if profile_dir.file_name().is_some_and(|p| p == "release") {
        build.arg("--release");
    }
    assert!(build.status().expect("cargo runs").success());
    let lib = profile_dir.join("libcascaded_relay_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    let c = NetworkConfig::uniform(2, 3, 1.0, 1.0, 3.0).unwrap();
    assert_eq!(p, outage_sdf_best(&c, &PowerSplit::per_hop(100.0)).unwrap());
}
