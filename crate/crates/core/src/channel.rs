//! The n*Rayleigh channel family: parameterization, exact sampling and the
//! gamma-type approximation of the per-hop SNR distribution.
//!
//! Under the approximation, `γ^{1/n}` is gamma distributed with shape `m` and
//! rate `β = 2m/(Ω γ̄^{1/n})`, so the per-hop SNR density is
//! `f(γ) = β^m/(n Γ(m)) γ^{m/n−1} e^{−β γ^{1/n}}`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::special::{ln_gamma, reg_lower_gamma, reg_upper_gamma};
use crate::{Error, Result};

/// Smallest supported cascade order.
pub const MIN_ORDER: u32 = 1;
/// Largest supported cascade order.
pub const MAX_ORDER: u32 = 8;

/// Shape and spread of the gamma-type approximation for one cascade order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub n: u32,
    pub m: f64,
    pub omega: f64,
}

impl FadingParams {
    /// Parameters fitted to the product of `n` Rayleigh factors.
    pub fn from_order(n: u32) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&n) {
            return Err(Error::OrderRange(n));
        }
        let nf = n as f64;
        Ok(FadingParams {
            n,
            m: 0.6102 * nf + 0.4263,
            omega: 0.8808 * nf.powf(-0.9661) + 1.12,
        })
    }

    pub fn order(&self) -> f64 {
        self.n as f64
    }

    /// `α = m/n`, the power-law exponent of the SNR density near zero.
    pub fn alpha(&self) -> f64 {
        self.m / self.order()
    }

    /// Rate `β` of the gamma law followed by `γ^{1/n}` at average SNR `avg_snr`.
    pub fn snr_rate(&self, avg_snr: f64) -> f64 {
        2.0 * self.m / (self.omega * avg_snr.powf(1.0 / self.order()))
    }
}

/// Fading parameters for cascade order `n`.
pub fn fading_params_from_order(n: u32) -> Result<FadingParams> {
    FadingParams::from_order(n)
}

/// One hop: its fading family and mean channel power `λ = E|h|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub fading: FadingParams,
    pub lambda: f64,
}

impl LinkSpec {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain("LinkSpec::new", format!("lambda = {lambda}")));
        }
        Ok(LinkSpec {
            fading: FadingParams::from_order(n)?,
            lambda,
        })
    }

    /// Average SNR `λ P/N₀` for transmit power `power` and noise power `noise`.
    pub fn avg_snr(&self, power: f64, noise: f64) -> f64 {
        self.lambda * power / noise
    }
}

/// One instantaneous SNR draw.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SnrSample {
    pub gamma: f64,
}

/// Draws `|h| = ∏ₖ |h_k|` with each factor Rayleigh of variance parameter `sigma2`,
/// so `E|h_k|² = 2·sigma2`.
pub fn sample_amplitude<R: Rng + ?Sized>(n: u32, sigma2: f64, rng: &mut R) -> f64 {
    let sigma = sigma2.sqrt();
    (0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.gen::<f64>();
            sigma * (-2.0 * u.ln()).sqrt()
        })
        .product()
}

/// Draws `|h|²` for `n` unit-power cascaded stages (a product of `n` unit exponentials).
pub fn sample_power_gain<R: Rng + ?Sized>(n: u32, rng: &mut R) -> f64 {
    (0..n).map(|_| -> f64 { Exp1.sample(rng) }).product()
}

/// Which law the Monte-Carlo engine draws hop SNRs from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelModel {
    /// Product of `n` independent Rayleigh factors: the physical channel.
    #[default]
    CascadedRayleigh,
    /// The gamma-type approximation itself, with `γ^{1/n} ~ Gamma(m, β)`.
    GammaSurrogate,
}

/// Draws instantaneous SNRs for one hop at a fixed average SNR.
#[derive(Debug, Clone, Copy)]
pub struct HopSampler {
    n: u32,
    avg_snr: f64,
    surrogate: Option<Gamma<f64>>,
}

impl HopSampler {
    pub fn new(fading: &FadingParams, avg_snr: f64, model: ChannelModel) -> Result<Self> {
        if !(avg_snr > 0.0) {
            return Err(Error::domain("HopSampler::new", format!("avg_snr = {avg_snr}")));
        }
        let surrogate = match model {
            ChannelModel::CascadedRayleigh => None,
            ChannelModel::GammaSurrogate => {
                let rate = fading.snr_rate(avg_snr);
                Some(Gamma::new(fading.m, 1.0 / rate).map_err(|e| {
                    Error::domain("HopSampler::new", e.to_string())
                })?)
            }
        };
        Ok(HopSampler {
            n: fading.n,
            avg_snr,
            surrogate,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.surrogate {
            None => self.avg_snr * sample_power_gain(self.n, rng),
            Some(g) => g.sample(rng).powi(self.n as i32),
        }
    }
}

fn check_avg_snr(func: &'static str, avg_snr: f64) -> Result<()> {
    if !(avg_snr > 0.0) {
        return Err(Error::domain(func, format!("avg_snr = {avg_snr}")));
    }
    Ok(())
}

/// Approximate per-hop SNR density at average SNR `avg_snr` (which already includes `λ`).
pub fn approx_snr_pdf(gamma: f64, link: &LinkSpec, avg_snr: f64) -> Result<f64> {
    check_avg_snr("approx_snr_pdf", avg_snr)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain("approx_snr_pdf", format!("gamma = {gamma}")));
    }
    let f = &link.fading;
    if gamma == 0.0 {
        // m > 1 and α < 1 for n ≥ 2, so the density may diverge at the origin.
        return Ok(if f.alpha() < 1.0 { f64::INFINITY } else { 0.0 });
    }
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    let beta = f.snr_rate(avg_snr);
    let ln = f.m * beta.ln() - f.order().ln() - ln_gamma(f.m)? + (f.alpha() - 1.0) * gamma.ln()
        - beta * gamma.powf(1.0 / f.order());
    Ok(ln.exp())
}

/// Approximate per-hop SNR CDF `P(m, β γ^{1/n})`.
pub fn approx_snr_cdf(gamma: f64, link: &LinkSpec, avg_snr: f64) -> Result<f64> {
    check_avg_snr("approx_snr_cdf", avg_snr)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain("approx_snr_cdf", format!("gamma = {gamma}")));
    }
    let f = &link.fading;
    reg_lower_gamma(f.m, f.snr_rate(avg_snr) * gamma.powf(1.0 / f.order()))
}

/// Complementary CDF `Q(m, β γ^{1/n})`, kept separate to preserve precision in the tail.
pub fn approx_snr_sf(gamma: f64, link: &LinkSpec, avg_snr: f64) -> Result<f64> {
    check_avg_snr("approx_snr_sf", avg_snr)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain("approx_snr_sf", format!("gamma = {gamma}")));
    }
    let f = &link.fading;
    reg_upper_gamma(f.m, f.snr_rate(avg_snr) * gamma.powf(1.0 / f.order()))
}

/// Fraction of `samples` at or below `gamma`.
pub fn empirical_cdf(samples: &[SnrSample], gamma: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("empirical_cdf samples"));
    }
    let below = samples.iter().filter(|s| s.gamma <= gamma).count();
    Ok(below as f64 / samples.len() as f64)
}
