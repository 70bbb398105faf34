use cascaded_relay::db_to_linear;
use cascaded_relay::power_alloc::{
    epa, pa_asymptotic, pa_fixed_point, pa_fixed_point_with, pa_objective, pa_oracle,
    FixedPointWeights,
};
use cascaded_relay::sdf::NetworkConfig;
use proptest::prelude::*;

fn config(n: u32, lambda2: f64, total_db: f64) -> NetworkConfig {
    NetworkConfig::uniform(n, 3, 1.0, lambda2, 3.0)
        .unwrap()
        .with_total_power(db_to_linear(total_db))
        .unwrap()
}

#[test]
fn oracle_is_grid_global_minimum() {
    for (n, l2, db) in [(1, 10.0, 20.0), (2, 10.0, 20.0), (3, 0.2, 25.0), (4, 5.0, 30.0)] {
        let c = config(n, l2, db);
        let best = pa_objective(pa_oracle(&c).unwrap().rho, &c).unwrap();
        for k in 1..1000 {
            let v = pa_objective(k as f64 * 1e-3, &c).unwrap();
            assert!(v >= best - 1e-9, "n = {n}: grid {} beats oracle", k as f64 * 1e-3);
        }
        assert!(best <= pa_objective(epa(&c).rho, &c).unwrap());
    }
}

#[test]
fn split_moves_toward_half_as_order_grows() {
    let rhos: Vec<f64> = (1..=8)
        .map(|n| pa_fixed_point(&config(n, 10.0, 20.0), 1e-10, 10_000).unwrap().split.rho)
        .collect();
    for w in rhos.windows(2) {
        assert!(w[1] < w[0], "{rhos:?}");
    }
    assert!(rhos.iter().all(|r| *r > 0.5));
}

#[test]
fn asymptotic_split_depends_only_on_orders() {
    let same = NetworkConfig::uniform(2, 3, 1.0, 1.0, 3.0).unwrap();
    assert_eq!(pa_asymptotic(&same).unwrap().rho, 0.5);
    let a = NetworkConfig::uniform_orders(1, 3, 3, 1.0, 10.0, 3.0).unwrap();
    let b = NetworkConfig::uniform_orders(1, 3, 3, 7.0, 70.0, 3.0).unwrap();
    assert_eq!(pa_asymptotic(&a).unwrap().rho, pa_asymptotic(&b).unwrap().rho);
}

#[test]
fn optimum_limit_for_equal_orders() {
    // Per-relay failure ≈ c(ρP/λ₁')^{−d} + c((1−ρ)P/λ₂')^{−d} at high SNR, so
    // ρ/(1−ρ) → (λ₂/λ₁)^{d/(d+1)} with d = m/n.
    let c = config(2, 10.0, 80.0);
    let d = c.relays[0].source.fading.alpha();
    let r = 10f64.powf(d / (d + 1.0));
    let limit = r / (1.0 + r);
    let rho = pa_oracle(&c).unwrap().rho;
    assert!((rho - limit).abs() < 1e-3, "{rho} vs {limit}");
}

#[test]
fn printed_weights_still_converge() {
    let c = config(2, 10.0, 20.0);
    let sol = pa_fixed_point_with(&c, 1e-10, 10_000, FixedPointWeights::Printed).unwrap();
    assert!(sol.split.rho > 0.0 && sol.split.rho < 1.0);
    assert!(sol.step <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fixed_point_tracks_oracle(n in 1u32..=4, l2 in 0.1f64..20.0, db in 10.0f64..40.0) {
        let c = config(n, l2, db);
        let fp = pa_fixed_point(&c, 1e-10, 10_000).unwrap().split.rho;
        let or = pa_oracle(&c).unwrap().rho;
        prop_assert!((fp - or).abs() <= 0.02, "fixed point {} oracle {}", fp, or);
        prop_assert!(pa_objective(or, &c).unwrap() <= pa_objective(0.5, &c).unwrap() + 1e-15);
    }
}
