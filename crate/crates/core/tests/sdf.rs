use cascaded_relay::montecarlo::per_hop_power;
use cascaded_relay::sdf::{
    calibrate_threshold, coding_gain, crossing_snr_db, diversity_order, outage_at_snr_db,
    outage_sdf_asymptotic, outage_sdf_best, outage_sdf_ith, outage_sdf_upper_bound,
    NetworkConfig, RelayLinks,
};
use cascaded_relay::channel::LinkSpec;
use proptest::prelude::*;

fn iid(n: u32, relays: usize, gamma_o: f64) -> NetworkConfig {
    NetworkConfig::uniform(n, relays, 1.0, 1.0, gamma_o).unwrap()
}

#[test]
fn rank_outages_are_ordered() {
    let c = iid(2, 4, 3.0);
    let p = per_hop_power(&c, 15.0);
    let ranks: Vec<f64> = (1..=4).map(|i| outage_sdf_ith(&c, &p, i).unwrap()).collect();
    for w in ranks.windows(2) {
        assert!(w[0] >= w[1]);
    }
    assert!((ranks[3] - outage_sdf_best(&c, &p).unwrap()).abs() < 1e-14);
}

#[test]
fn non_identical_relays_are_supported() {
    let pairs = vec![
        RelayLinks { source: LinkSpec::new(1, 1.0).unwrap(), dest: LinkSpec::new(3, 2.0).unwrap() },
        RelayLinks { source: LinkSpec::new(2, 0.5).unwrap(), dest: LinkSpec::new(2, 1.0).unwrap() },
        RelayLinks { source: LinkSpec::new(4, 3.0).unwrap(), dest: LinkSpec::new(1, 1.0).unwrap() },
    ];
    let c = NetworkConfig::new(pairs, 1.0, 3.0, 1.0).unwrap();
    let p = per_hop_power(&c, 12.0);
    let best = outage_sdf_best(&c, &p).unwrap();
    let worst = outage_sdf_ith(&c, &p, 1).unwrap();
    assert!(best > 0.0 && best < worst && worst < 1.0);
}

#[test]
fn asymptote_is_approached_from_below_in_log_scale() {
    for (n, relays) in [(1, 2), (2, 3), (3, 2)] {
        let c = iid(n, relays, 3.0);
        let mut prev = f64::INFINITY;
        for db in [30.0, 45.0, 60.0, 75.0] {
            let p = per_hop_power(&c, db);
            let ratio = outage_sdf_best(&c, &p).unwrap() / outage_sdf_asymptotic(&c, &p).unwrap();
            let gap = (ratio.ln()).abs();
            assert!(gap < prev, "n = {n}, N = {relays}, {db} dB");
            prev = gap;
        }
        assert!(prev < 0.05);
    }
}

#[test]
fn coding_gain_shifts_the_asymptote() {
    // P_asym = (CG · SNR / γ_o)^{−d} for γ_o and SNR in linear units.
    let c = iid(2, 3, 3.0);
    let link = c.relays[0].source;
    let d = diversity_order(&link, 3);
    let cg = coding_gain(&c).unwrap();
    for db in [20.0, 40.0] {
        let p = per_hop_power(&c, db);
        let snr = p.p1 / c.noise_power;
        let expect = (cg * snr / c.gamma_o).powf(-d);
        let got = outage_sdf_asymptotic(&c, &p).unwrap();
        assert!((got / expect - 1.0).abs() < 1e-10, "{got} vs {expect}");
    }
}

#[test]
fn calibrated_threshold_reproduces_crossing() {
    let c = iid(3, 5, 3.0);
    let g = calibrate_threshold(&c, 1e-3, 30.0).unwrap();
    let cal = c.with_threshold(g).unwrap();
    let x = crossing_snr_db(|s| outage_at_snr_db(&cal, s), 1e-3, 0.0, 80.0).unwrap();
    assert!((x - 30.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outage_nonincreasing_in_snr_and_relays(
        n in 1u32..=6, relays in 1usize..=6, db in -10.0f64..60.0, step in 0.0f64..10.0, go in 0.1f64..20.0
    ) {
        let c = iid(n, relays, go);
        let a = outage_at_snr_db(&c, db).unwrap();
        let b = outage_at_snr_db(&c, db + step).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
        let more = iid(n, relays + 1, go);
        prop_assert!(outage_at_snr_db(&more, db).unwrap() <= a * (1.0 + 1e-12));
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn bound_dominates_exact(n in 1u32..=6, relays in 1usize..=6, db in -10.0f64..60.0, go in 0.1f64..20.0) {
        let c = iid(n, relays, go);
        let p = per_hop_power(&c, db);
        prop_assert!(outage_sdf_best(&c, &p).unwrap() <= outage_sdf_upper_bound(&c, &p).unwrap() * (1.0 + 1e-12));
    }
}
