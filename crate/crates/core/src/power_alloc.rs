//! Power split between the source and the selected relay under statistical CSI.
//!
//! The S-DF outage `∏ᵢ (1 − Q₁ᵢ Q₂ᵢ)` is minimized over `ρ = P₁/P_T`. Setting the
//! derivative to zero gives `ρ = A/(A + B)` with
//! `A = Σᵢ Q₂ᵢ θᵢ₁ x₁ᵢ^{m₁} e^{−x₁ᵢ}`, `B = Σᵢ Q₁ᵢ θᵢ₂ x₂ᵢ^{m₂} e^{−x₂ᵢ}`,
//! `θᵢⱼ = 1/(nᵢⱼ Γ(mᵢⱼ)(1 − Q₁ᵢ Q₂ᵢ))` and `xⱼᵢ = βⱼᵢ γ_o^{1/nⱼ}`. Both sums
//! depend on `ρ` through the rates, so the relation is solved by damped
//! successive approximation.

use crate::channel::LinkSpec;
use crate::numeric::golden_section_min;
use crate::sdf::{ln_outage_sdf_best, outage_sdf_best, HopProbabilities, NetworkConfig};
use crate::special::{gamma, ln_gamma, upper_inc_gamma};
use crate::{db_to_linear, Error, Result};

/// Transmit powers of the source (`p1`) and the selected relay (`p2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p1: f64,
    pub p2: f64,
    /// `p1 / (p1 + p2)`.
    pub rho: f64,
}

impl PowerSplit {
    /// `P₁ = ρ P_T`, `P₂ = (1 − ρ) P_T`.
    pub fn from_ratio(rho: f64, total_power: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) || !(total_power > 0.0) {
            return Err(Error::domain(
                "PowerSplit::from_ratio",
                format!("rho = {rho}, total_power = {total_power}"),
            ));
        }
        Ok(PowerSplit {
            p1: rho * total_power,
            p2: (1.0 - rho) * total_power,
            rho,
        })
    }

    /// Both nodes transmit `power`.
    pub fn per_hop(power: f64) -> Self {
        PowerSplit {
            p1: power,
            p2: power,
            rho: 0.5,
        }
    }

    pub fn total(&self) -> f64 {
        self.p1 + self.p2
    }
}

/// Outage probability at split `rho` of the configured total power.
pub fn pa_objective(rho: f64, config: &NetworkConfig) -> Result<f64> {
    if rho == 0.0 || rho == 1.0 {
        return Ok(1.0);
    }
    outage_sdf_best(config, &PowerSplit::from_ratio(rho, config.total_power)?)
}

fn ln_objective(rho: f64, config: &NetworkConfig) -> Result<f64> {
    ln_outage_sdf_best(config, &PowerSplit::from_ratio(rho, config.total_power)?)
}

/// How the hop-1 weight `ωᵢ` of the stationarity condition is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixedPointWeights {
    /// `ωᵢ = Γ(m₁, x₁)/Γ(m₁) = Q₁ᵢ`, the weight the derivative actually produces.
    #[default]
    Consistent,
    /// `ωᵢ = Γ(m₂, x₂)/Γ(m₁)`, as typeset alongside the iteration.
    Printed,
}

/// Outcome of the successive-approximation solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaSolution {
    pub split: PowerSplit,
    pub iterations: usize,
    /// `|ρ_k − ρ_{k−1}|` at exit.
    pub step: f64,
}

/// Damping factor of the successive approximation.
pub const DAMPING: f64 = 0.5;

/// `ln(x^m e^{−x} / (n Γ(m)))`
fn ln_hop_derivative(link: &LinkSpec, x: f64) -> Result<f64> {
    let f = &link.fading;
    Ok(f.m * x.ln() - x - f.order().ln() - ln_gamma(f.m)?)
}

/// The update map `G(ρ) = A/(A + B)`.
pub fn pa_update(rho: f64, config: &NetworkConfig, weights: FixedPointWeights) -> Result<f64> {
    let power = PowerSplit::from_ratio(rho, config.total_power)?;
    let mut a = 0.0;
    let mut b = 0.0;
    for pair in &config.relays {
        let h = HopProbabilities::new(pair, &power, config.noise_power, config.gamma_o)?;
        let x1 = pair.source.fading.snr_rate(pair.source.avg_snr(power.p1, config.noise_power))
            * config.gamma_o.powf(1.0 / pair.source.fading.order());
        let x2 = pair.dest.fading.snr_rate(pair.dest.avg_snr(power.p2, config.noise_power))
            * config.gamma_o.powf(1.0 / pair.dest.fading.order());
        let mu = h.q2;
        let omega = match weights {
            FixedPointWeights::Consistent => h.q1,
            FixedPointWeights::Printed => {
                upper_inc_gamma(pair.dest.fading.m, x2)? / gamma(pair.source.fading.m)?
            }
        };
        let fail = 1.0 - omega * mu;
        a += mu * ln_hop_derivative(&pair.source, x1)?.exp() / fail;
        b += omega * ln_hop_derivative(&pair.dest, x2)?.exp() / fail;
    }
    if !(a > 0.0) && !(b > 0.0) {
        // Both hops saturated; every split is equally good.
        return Ok(0.5);
    }
    Ok(a / (a + b))
}

/// Solves `ρ = G(ρ)` by damped successive approximation from `ρ = 0.5`.
pub fn pa_fixed_point(config: &NetworkConfig, tol: f64, max_iter: usize) -> Result<PaSolution> {
    pa_fixed_point_with(config, tol, max_iter, FixedPointWeights::Consistent)
}

pub fn pa_fixed_point_with(
    config: &NetworkConfig,
    tol: f64,
    max_iter: usize,
    weights: FixedPointWeights,
) -> Result<PaSolution> {
    if !(tol > 0.0) {
        return Err(Error::domain("pa_fixed_point", format!("tol = {tol}")));
    }
    let mut rho = 0.5;
    for k in 1..=max_iter {
        let g = pa_update(rho, config, weights)?;
        let next = ((1.0 - DAMPING) * rho + DAMPING * g).clamp(1e-9, 1.0 - 1e-9);
        let step = (next - rho).abs();
        rho = next;
        if step < tol {
            return Ok(PaSolution {
                split: PowerSplit::from_ratio(rho, config.total_power)?,
                iterations: k,
                step,
            });
        }
    }
    Err(Error::NonConvergence {
        func: "pa_fixed_point",
        iterations: max_iter,
    })
}

/// Direct minimization of the outage over `ρ`: a 200-point scan followed by
/// golden-section refinement to `1e-6` around the best scan point.
pub fn pa_oracle(config: &NetworkConfig) -> Result<PowerSplit> {
    const GRID: usize = 200;
    let mut best = (f64::INFINITY, 0.5);
    for k in 1..GRID {
        let rho = k as f64 / GRID as f64;
        let v = ln_objective(rho, config)?;
        if v < best.0 {
            best = (v, rho);
        }
    }
    let step = 1.0 / GRID as f64;
    let lo = (best.1 - step).max(1e-9);
    let hi = (best.1 + step).min(1.0 - 1e-9);
    let rho = golden_section_min(|r| ln_objective(r, config), lo, hi, 1e-6)?;
    PowerSplit::from_ratio(rho, config.total_power)
}

/// High-SNR split `ρ = [Σᵢ m₂ᵢ/n₂ᵢ / Σᵢ m₁ᵢ/n₁ᵢ + 1]^{−1}`; it involves no mean powers.
pub fn pa_asymptotic(config: &NetworkConfig) -> Result<PowerSplit> {
    let s1: f64 = config.relays.iter().map(|r| r.source.fading.alpha()).sum();
    let s2: f64 = config.relays.iter().map(|r| r.dest.fading.alpha()).sum();
    PowerSplit::from_ratio(1.0 / (s2 / s1 + 1.0), config.total_power)
}

/// Equal power allocation.
pub fn epa(config: &NetworkConfig) -> PowerSplit {
    PowerSplit {
        p1: 0.5 * config.total_power,
        p2: 0.5 * config.total_power,
        rho: 0.5,
    }
}

/// Best-relay outage when the relay sits at normalized distance `d1` from the
/// source: `λ₁ = d1^{−σ}`, `λ₂ = (1 − d1)^{−σ}`.
pub fn outage_vs_distance(
    d1: f64,
    config: &NetworkConfig,
    pathloss_exp: f64,
    power: &PowerSplit,
) -> Result<f64> {
    if !(d1 > 0.0 && d1 < 1.0) || !(pathloss_exp >= 0.0) {
        return Err(Error::domain(
            "outage_vs_distance",
            format!("d1 = {d1}, pathloss_exp = {pathloss_exp}"),
        ));
    }
    let mut placed = config.clone();
    for r in &mut placed.relays {
        r.source.lambda = d1.powf(-pathloss_exp);
        r.dest.lambda = (1.0 - d1).powf(-pathloss_exp);
    }
    outage_sdf_best(&placed, power)
}

/// Picks the total SNR `P_T/N₀` (dB) on `grid_db` whose fixed-point split is
/// closest to `target_rho`. Returns the SNR and the split found there.
pub fn calibrate_total_snr(
    config: &NetworkConfig,
    target_rho: f64,
    grid_db: &[f64],
) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &db in grid_db {
        let c = config.with_total_power(config.noise_power * db_to_linear(db))?;
        let rho = pa_fixed_point(&c, 1e-10, 10_000)?.split.rho;
        if best.is_none_or(|(_, r)| (rho - target_rho).abs() < (r - target_rho).abs()) {
            best = Some((db, rho));
        }
    }
    best.ok_or(Error::Empty("calibration grid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_config(n: u32, total_db: f64) -> NetworkConfig {
        NetworkConfig::uniform(n, 3, 1.0, 10.0, 3.0)
            .unwrap()
            .with_total_power(db_to_linear(total_db))
            .unwrap()
    }

    #[test]
    fn split_constructors() {
        let s = PowerSplit::from_ratio(0.25, 8.0).unwrap();
        assert_eq!((s.p1, s.p2), (2.0, 6.0));
        assert!(PowerSplit::from_ratio(1.0, 8.0).is_err());
        assert_eq!(PowerSplit::per_hop(3.0).total(), 6.0);
    }

    #[test]
    fn objective_edges_and_symmetry() {
        let sym = NetworkConfig::uniform(2, 2, 1.0, 1.0, 3.0)
            .unwrap()
            .with_total_power(100.0)
            .unwrap();
        assert_eq!(pa_objective(0.0, &sym).unwrap(), 1.0);
        assert!(pa_objective(1e-9, &sym).unwrap() > 0.99);
        let a = pa_objective(0.3, &sym).unwrap();
        let b = pa_objective(0.7, &sym).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn symmetric_fixed_point_is_half() {
        let sym = NetworkConfig::uniform(3, 3, 2.0, 2.0, 3.0)
            .unwrap()
            .with_total_power(1000.0)
            .unwrap();
        let sol = pa_fixed_point(&sym, 1e-12, 1000).unwrap();
        assert!((sol.split.rho - 0.5).abs() < 1e-9);
        assert!((pa_oracle(&sym).unwrap().rho - 0.5).abs() < 1e-5);
        assert_eq!(pa_asymptotic(&sym).unwrap().rho, 0.5);
    }

    #[test]
    fn fixed_point_agrees_with_oracle() {
        for n in 1..=4 {
            for db in [10.0, 20.0, 30.0] {
                let cfg = reference_config(n, db);
                let fp = pa_fixed_point(&cfg, 1e-10, 10_000).unwrap().split.rho;
                let or = pa_oracle(&cfg).unwrap().rho;
                assert!((fp - or).abs() < 1e-4, "n = {n}, {db} dB: {fp} vs {or}");
            }
        }
    }

    #[test]
    fn weaker_source_hop_gets_more_power() {
        let cfg = NetworkConfig::uniform(2, 3, 1.0, 100.0, 3.0)
            .unwrap()
            .with_total_power(100.0)
            .unwrap();
        assert!(pa_oracle(&cfg).unwrap().rho > 0.5);
    }

    #[test]
    fn asymptotic_split_ignores_lambda() {
        let a = NetworkConfig::uniform_orders(1, 3, 2, 1.0, 10.0, 3.0).unwrap();
        let b = NetworkConfig::uniform_orders(1, 3, 2, 7.0, 0.2, 3.0).unwrap();
        assert_eq!(pa_asymptotic(&a).unwrap().rho, pa_asymptotic(&b).unwrap().rho);
    }

    #[test]
    fn distance_domain() {
        let cfg = NetworkConfig::uniform(1, 1, 1.0, 1.0, 3.0).unwrap();
        let p = PowerSplit::per_hop(100.0);
        assert!(outage_vs_distance(0.0, &cfg, 3.0, &p).is_err());
        assert!(outage_vs_distance(1.0, &cfg, 3.0, &p).is_err());
        let mid = outage_vs_distance(0.5, &cfg, 3.0, &p).unwrap();
        assert!(outage_vs_distance(0.9, &cfg, 3.0, &p).unwrap() > mid);
        let flat = outage_vs_distance(0.2, &cfg, 0.0, &p).unwrap();
        assert!((flat - outage_vs_distance(0.7, &cfg, 0.0, &p).unwrap()).abs() < 1e-15);
    }
}
