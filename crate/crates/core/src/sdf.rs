//! Selective decode-and-forward: end-to-end link CDF, best-relay and ranked
//! outage, the high-SNR bound and asymptote, diversity order and coding gain.
//!
//! A relay reaches the destination when both of its hops clear the threshold,
//! so relay `i` fails with probability `1 − Q₁ᵢ Q₂ᵢ = P₁ᵢ + Q₁ᵢ P₂ᵢ`, where
//! `Pⱼᵢ`/`Qⱼᵢ` are the hop CDF/survival at `γ_o`. Selecting the best relay
//! fails only if every relay fails.

use crate::channel::{approx_snr_cdf, approx_snr_sf, LinkSpec};
use crate::numeric::bisect;
use crate::order_stats::{cdf_ith_order, CdfVector};
use crate::power_alloc::PowerSplit;
use crate::special::ln_gamma;
use crate::{db_to_linear, Error, Result};

/// Source hop and destination hop of one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayLinks {
    pub source: LinkSpec,
    pub dest: LinkSpec,
}

/// The relay network: `N` hop pairs, noise power, SNR threshold and power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub relays: Vec<RelayLinks>,
    pub noise_power: f64,
    /// Outage threshold `γ_o` (linear).
    pub gamma_o: f64,
    pub total_power: f64,
}

/// Threshold `γ_o = 2^{2R} − 1` for target rate `R` in bits/s/Hz over two slots.
pub fn threshold_from_rate(rate: f64) -> Result<f64> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::domain("threshold_from_rate", format!("rate = {rate}")));
    }
    Ok(2f64.powf(2.0 * rate) - 1.0)
}

impl NetworkConfig {
    pub fn new(
        relays: Vec<RelayLinks>,
        noise_power: f64,
        gamma_o: f64,
        total_power: f64,
    ) -> Result<Self> {
        if relays.is_empty() {
            return Err(Error::Empty("relay list"));
        }
        if !(noise_power > 0.0) || !(total_power > 0.0) || !(gamma_o >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise_power = {noise_power}, total_power = {total_power}, gamma_o = {gamma_o}"
            )));
        }
        Ok(NetworkConfig {
            relays,
            noise_power,
            gamma_o,
            total_power,
        })
    }

    /// `relays` identical relays whose hops share cascade order `n`, with mean
    /// channel powers `lambda1` (source hop) and `lambda2` (destination hop).
    /// Noise power and total power are both 1.
    pub fn uniform(n: u32, relays: usize, lambda1: f64, lambda2: f64, gamma_o: f64) -> Result<Self> {
        Self::uniform_orders(n, n, relays, lambda1, lambda2, gamma_o)
    }

    /// As [`NetworkConfig::uniform`] with separate cascade orders per hop.
    pub fn uniform_orders(
        n1: u32,
        n2: u32,
        relays: usize,
        lambda1: f64,
        lambda2: f64,
        gamma_o: f64,
    ) -> Result<Self> {
        let pair = RelayLinks {
            source: LinkSpec::new(n1, lambda1)?,
            dest: LinkSpec::new(n2, lambda2)?,
        };
        Self::new(vec![pair; relays], 1.0, gamma_o, 1.0)
    }

    pub fn len(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relays.is_empty()
    }

    /// Same network with the total power budget set to `total_power`.
    pub fn with_total_power(&self, total_power: f64) -> Result<Self> {
        Self::new(self.relays.clone(), self.noise_power, self.gamma_o, total_power)
    }

    /// Same network with threshold `gamma_o`.
    pub fn with_threshold(&self, gamma_o: f64) -> Result<Self> {
        Self::new(self.relays.clone(), self.noise_power, gamma_o, self.total_power)
    }

    /// The common hop when every hop of every relay is identical and both
    /// hops see the same transmit power.
    pub fn iid_link(&self, power: &PowerSplit) -> Result<LinkSpec> {
        let first = self.relays[0].source;
        let same = self
            .relays
            .iter()
            .all(|r| r.source == first && r.dest == first);
        if !same {
            return Err(Error::NotIid("hops differ in cascade order or mean power".into()));
        }
        if (power.p1 - power.p2).abs() > 1e-12 * power.p1.max(power.p2) {
            return Err(Error::NotIid(format!(
                "hop powers differ (p1 = {}, p2 = {})",
                power.p1, power.p2
            )));
        }
        Ok(first)
    }
}

/// Outage of one relay point: average SNR `P/N₀` in dB and outage probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutagePoint {
    pub snr_db: f64,
    pub p_out: f64,
}

/// Hop-1 and hop-2 CDF/survival values at `γ_o` for one relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopProbabilities {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl HopProbabilities {
    pub fn new(
        pair: &RelayLinks,
        power: &PowerSplit,
        noise_power: f64,
        gamma_o: f64,
    ) -> Result<Self> {
        let a1 = pair.source.avg_snr(power.p1, noise_power);
        let a2 = pair.dest.avg_snr(power.p2, noise_power);
        Ok(HopProbabilities {
            p1: approx_snr_cdf(gamma_o, &pair.source, a1)?,
            q1: approx_snr_sf(gamma_o, &pair.source, a1)?,
            p2: approx_snr_cdf(gamma_o, &pair.dest, a2)?,
            q2: approx_snr_sf(gamma_o, &pair.dest, a2)?,
        })
    }

    /// Probability that this relay does not deliver: `1 − Q₁Q₂`.
    pub fn link_failure(&self) -> f64 {
        self.p1 + self.q1 * self.p2
    }
}

/// CDF of the end-to-end SNR through one relay: `F₁(γ_o) + [1 − F₁(γ_o)] F₂(γ)`.
pub fn e2e_link_cdf(
    gamma: f64,
    pair: &RelayLinks,
    p1: f64,
    p2: f64,
    noise_power: f64,
    gamma_o: f64,
) -> Result<f64> {
    if !(p1 > 0.0) || !(p2 > 0.0) {
        return Err(Error::domain("e2e_link_cdf", format!("p1 = {p1}, p2 = {p2}")));
    }
    let a1 = pair.source.avg_snr(p1, noise_power);
    let a2 = pair.dest.avg_snr(p2, noise_power);
    let f1 = approx_snr_cdf(gamma_o, &pair.source, a1)?;
    let q1 = approx_snr_sf(gamma_o, &pair.source, a1)?;
    Ok(f1 + q1 * approx_snr_cdf(gamma, &pair.dest, a2)?)
}

fn check_power(func: &'static str, power: &PowerSplit) -> Result<()> {
    if !(power.p1 > 0.0) || !(power.p2 > 0.0) {
        return Err(Error::domain(func, format!("p1 = {}, p2 = {}", power.p1, power.p2)));
    }
    Ok(())
}

/// Natural log of the best-relay outage probability.
pub fn ln_outage_sdf_best(config: &NetworkConfig, power: &PowerSplit) -> Result<f64> {
    check_power("outage_sdf_best", power)?;
    let mut acc = 0.0;
    for pair in &config.relays {
        let h = HopProbabilities::new(pair, power, config.noise_power, config.gamma_o)?;
        acc += h.link_failure().ln();
    }
    Ok(acc)
}

/// Outage of best-relay S-DF selection: `∏ᵢ (1 − Q₁ᵢ Q₂ᵢ)`.
pub fn outage_sdf_best(config: &NetworkConfig, power: &PowerSplit) -> Result<f64> {
    Ok(ln_outage_sdf_best(config, power)?.exp())
}

/// Outage when the relay of rank `i` (1 = worst, `N` = best) forwards.
pub fn outage_sdf_ith(config: &NetworkConfig, power: &PowerSplit, i: usize) -> Result<f64> {
    check_power("outage_sdf_ith", power)?;
    let values = config
        .relays
        .iter()
        .map(|pair| {
            HopProbabilities::new(pair, power, config.noise_power, config.gamma_o)
                .map(|h| h.link_failure())
        })
        .collect::<Result<Vec<_>>>()?;
    cdf_ith_order(&CdfVector::new(values)?, i)
}

/// Candidate closed forms for the i.i.d. high-SNR outage bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundForm {
    /// `(2F)^N`, from `1 − Q₁Q₂ ≤ 2F` per relay.
    #[default]
    Doubled,
    /// `(F/2)^N`; reproduced for comparison, it undershoots the exact outage.
    Halved,
}

/// Upper bound `(2 F_hop(γ_o))^N` for i.i.d. hops.
pub fn outage_sdf_upper_bound(config: &NetworkConfig, power: &PowerSplit) -> Result<f64> {
    outage_sdf_bound_form(config, power, BoundForm::Doubled)
}

/// The i.i.d. bound in either printed form.
pub fn outage_sdf_bound_form(
    config: &NetworkConfig,
    power: &PowerSplit,
    form: BoundForm,
) -> Result<f64> {
    check_power("outage_sdf_upper_bound", power)?;
    let link = config.iid_link(power)?;
    let f = approx_snr_cdf(config.gamma_o, &link, link.avg_snr(power.p1, config.noise_power))?;
    let per_relay = match form {
        BoundForm::Doubled => 2.0 * f,
        BoundForm::Halved => 0.5 * f,
    };
    Ok(per_relay.powi(config.len() as i32))
}

/// Per-relay constant `K = 2^{m+1}(m/Ω)^m / (m λ^{m/n} Γ(m))` of the high-SNR asymptote.
fn asymptotic_constant(link: &LinkSpec) -> Result<f64> {
    let f = &link.fading;
    let ln_k = (f.m + 1.0) * 2f64.ln() + f.m * (f.m / f.omega).ln()
        - f.m.ln()
        - f.alpha() * link.lambda.ln()
        - ln_gamma(f.m)?;
    Ok(ln_k.exp())
}

/// High-SNR asymptote `K^N (γ_o/SNR)^{mN/n}`, with `SNR = P/N₀` per hop.
pub fn outage_sdf_asymptotic(config: &NetworkConfig, power: &PowerSplit) -> Result<f64> {
    check_power("outage_sdf_asymptotic", power)?;
    let link = config.iid_link(power)?;
    let snr = power.p1 / config.noise_power;
    let big_n = config.len() as f64;
    let k = asymptotic_constant(&link)?;
    Ok((big_n * k.ln() + link.fading.alpha() * big_n * (config.gamma_o / snr).ln()).exp())
}

/// Diversity order `d = mN/n` of an i.i.d. network.
pub fn diversity_order(link: &LinkSpec, relays: usize) -> f64 {
    link.fading.alpha() * relays as f64
}

/// Coding gain `K^{−n/m}`; it does not depend on the number of relays.
pub fn coding_gain(config: &NetworkConfig) -> Result<f64> {
    let link = config.iid_link(&PowerSplit::per_hop(1.0))?;
    Ok(asymptotic_constant(&link)?.powf(-1.0 / link.fading.alpha()))
}

/// Log-log slope between consecutive points: `−Δlog₁₀P / Δlog₁₀SNR`.
pub fn local_slopes(curve: &[OutagePoint]) -> Result<Vec<OutagePoint>> {
    if curve.len() < 2 {
        return Err(Error::Degenerate {
            func: "local_slopes",
            detail: format!("{} points, need at least 2", curve.len()),
        });
    }
    curve
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if !(b.snr_db > a.snr_db) || !(a.p_out > 0.0) || !(b.p_out > 0.0) {
                return Err(Error::Degenerate {
                    func: "local_slopes",
                    detail: format!(
                        "points ({}, {:e}) and ({}, {:e})",
                        a.snr_db, a.p_out, b.snr_db, b.p_out
                    ),
                });
            }
            let d = -(b.p_out.log10() - a.p_out.log10()) / ((b.snr_db - a.snr_db) / 10.0);
            Ok(OutagePoint {
                snr_db: b.snr_db,
                p_out: d,
            })
        })
        .collect()
}

/// Empirical diversity order: the log-log slope over the last two points.
pub fn diversity_order_empirical(curve: &[OutagePoint]) -> Result<f64> {
    let slopes = local_slopes(curve)?;
    Ok(slopes[slopes.len() - 1].p_out)
}

/// Best-relay outage with each hop transmitting `P = N₀·10^{snr_db/10}`.
pub fn outage_at_snr_db(config: &NetworkConfig, snr_db: f64) -> Result<f64> {
    outage_sdf_best(config, &PowerSplit::per_hop(config.noise_power * db_to_linear(snr_db)))
}

/// Analytic S-DF curve over an SNR grid (dB).
pub fn outage_curve(config: &NetworkConfig, snr_db: &[f64]) -> Result<Vec<OutagePoint>> {
    snr_db
        .iter()
        .map(|&s| {
            Ok(OutagePoint {
                snr_db: s,
                p_out: outage_at_snr_db(config, s)?,
            })
        })
        .collect()
}

/// SNR (dB) in `[lo_db, hi_db]` at which a nonincreasing outage curve reaches `target`.
pub fn crossing_snr_db<F>(outage: F, target: f64, lo_db: f64, hi_db: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    bisect(|s| Ok(outage(s)?.ln() - target.ln()), lo_db, hi_db, 1e-9, 200)
}

/// Threshold `γ_o` for which `config` reaches outage `target` at `snr_db`.
pub fn calibrate_threshold(config: &NetworkConfig, target: f64, snr_db: f64) -> Result<f64> {
    // Outage grows with γ_o; search in log γ_o.
    let f = |ln_g: f64| -> Result<f64> {
        let c = config.with_threshold(ln_g.exp())?;
        Ok(outage_at_snr_db(&c, snr_db)?.ln() - target.ln())
    };
    bisect(f, -30.0, 30.0, 1e-12, 300).map(f64::exp)
}
