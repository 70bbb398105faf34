//! Selective amplify-and-forward: the harmonic-mean SNR bound and its
//! distribution, moments, average SNR, outage and high-SNR behavior.
//!
//! For relay `i`, `Y₁ = γ₁^{1/n}` and `Y₂ = γ₂^{1/n}` are i.i.d. `Gamma(m, β)`.
//! Their harmonic mean `Y = 2Y₁Y₂/(Y₁+Y₂)` has density `f_Y(y) = β h(βy)` with
//! `h(t) = √π/Γ²(m) (t/2)^{m−1} e^{−2t} U(1/2 − m, 1 − m, 2t)`, and the bound on
//! the end-to-end SNR is `γ_i = (Y/2)^n`.

use crate::channel::FadingParams;
use crate::numeric::integrate_with_estimate;
use crate::power_alloc::PowerSplit;
use crate::sdf::NetworkConfig;
use crate::special::{ln_gamma, pochhammer, reg_lower_gamma, tricomi_u_any_b};
use crate::{Error, Result};

/// Distribution parameters of one relay's harmonic SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicSnrParams {
    pub fading: FadingParams,
    /// Common average SNR of both hops.
    pub avg_snr: f64,
    /// `β = 2m/(Ω γ̄^{1/n})`.
    pub beta_h: f64,
}

impl HarmonicSnrParams {
    pub fn new(fading: FadingParams, avg_snr: f64) -> Result<Self> {
        if !(avg_snr > 0.0) || !avg_snr.is_finite() {
            return Err(Error::domain("HarmonicSnrParams::new", format!("avg_snr = {avg_snr}")));
        }
        Ok(HarmonicSnrParams {
            fading,
            avg_snr,
            beta_h: fading.snr_rate(avg_snr),
        })
    }
}

/// `γ₁^{1/n} γ₂^{1/n} / (γ₁^{1/n} + γ₂^{1/n})`; zero when both SNRs are zero.
pub fn harmonic_snr_bound(g1: f64, g2: f64, n: u32) -> Result<f64> {
    if !(g1 >= 0.0) || !(g2 >= 0.0) || n == 0 {
        return Err(Error::domain("harmonic_snr_bound", format!("g1 = {g1}, g2 = {g2}, n = {n}")));
    }
    let inv = 1.0 / n as f64;
    let (a, b) = (g1.powf(inv), g2.powf(inv));
    if a == 0.0 || b == 0.0 {
        return Ok(0.0);
    }
    if a.is_infinite() {
        return Ok(b);
    }
    if b.is_infinite() {
        return Ok(a);
    }
    Ok(a * b / (a + b))
}

fn check_shape(func: &'static str, m: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(func, format!("shape = {m}")));
    }
    Ok(())
}

/// `ln h(t)` for the unit-rate harmonic density.
///
/// Uses `U(1/2 − m, 1 − m, x) = x^m U(1/2, 1 + m, x)`, which stays well
/// defined when `m` is an integer.
fn ln_unit_harmonic_pdf(t: f64, m: f64) -> Result<f64> {
    let x = 2.0 * t;
    let ln_u = m * x.ln() + tricomi_u_any_b(0.5, 1.0 + m, x)?.ln();
    Ok(0.5 * std::f64::consts::PI.ln() - 2.0 * ln_gamma(m)? + (m - 1.0) * (0.5 * t).ln() - x
        + ln_u)
}

fn unit_harmonic_pdf(t: f64, m: f64) -> Result<f64> {
    if t == 0.0 {
        // h(t) ~ t^{m−1} near the origin.
        return Ok(if m > 1.0 {
            0.0
        } else if m == 1.0 {
            ln_unit_harmonic_pdf(1e-300, m)?.exp()
        } else {
            f64::INFINITY
        });
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    Ok(ln_unit_harmonic_pdf(t, m)?.exp())
}

/// `∫₀^T h(t) dt`, evaluated with relative accuracy in both tails.
fn unit_harmonic_cdf(t_upper: f64, m: f64) -> Result<f64> {
    if t_upper <= 0.0 {
        return Ok(0.0);
    }
    if t_upper.is_infinite() {
        return Ok(1.0);
    }
    let mean = m * m / (m + 0.5);
    if t_upper <= mean {
        let ln_scale = ln_unit_harmonic_pdf(t_upper, m)?;
        let f = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            ln_unit_harmonic_pdf(t_upper * v, m).map_or(0.0, |l| (l - ln_scale).exp())
        };
        let (integral, err) = integrate_with_estimate(f, 0.0, 1.0, 1e-13);
        check_quadrature(integral, err)?;
        Ok((t_upper.ln() + ln_scale).exp() * integral)
    } else {
        let ln_scale = ln_unit_harmonic_pdf(t_upper, m)?;
        let f = |u: f64| {
            let s = 1.0 - u;
            let t = t_upper + u / s;
            ln_unit_harmonic_pdf(t, m).map_or(0.0, |l| {
                let v = (l - ln_scale).exp() / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            })
        };
        let (integral, err) = integrate_with_estimate(f, 0.0, 1.0, 1e-13);
        check_quadrature(integral, err)?;
        Ok((1.0 - ln_scale.exp() * integral).clamp(0.0, 1.0))
    }
}

fn check_quadrature(integral: f64, err: f64) -> Result<()> {
    if !integral.is_finite() || err > 1e-8 * integral.abs().max(1e-300) {
        return Err(Error::Quadrature {
            integral,
            error_estimate: err,
        });
    }
    Ok(())
}

/// Density of the harmonic mean of two i.i.d. `Gamma(m, β)` variables.
pub fn harmonic_pdf(y: f64, m: f64, beta: f64) -> Result<f64> {
    check_shape("harmonic_pdf", m)?;
    if !(beta > 0.0) || !(y >= 0.0) {
        return Err(Error::domain("harmonic_pdf", format!("y = {y}, beta = {beta}")));
    }
    Ok(beta * unit_harmonic_pdf(beta * y, m)?)
}

/// CDF of the harmonic mean of two i.i.d. `Gamma(m, β)` variables.
pub fn harmonic_cdf(y: f64, m: f64, beta: f64) -> Result<f64> {
    check_shape("harmonic_cdf", m)?;
    if !(beta > 0.0) || !(y >= 0.0) {
        return Err(Error::domain("harmonic_cdf", format!("y = {y}, beta = {beta}")));
    }
    unit_harmonic_cdf(beta * y, m)
}

/// `E[Y^k] = √π β^{−k} Γ(m+k) Γ(2m+k) / (2^{2m+k−1} Γ²(m) Γ(m+k+1/2))`.
pub fn harmonic_moment(order_k: u32, m: f64, beta: f64) -> Result<f64> {
    check_shape("harmonic_moment", m)?;
    if !(beta > 0.0) {
        return Err(Error::domain("harmonic_moment", format!("beta = {beta}")));
    }
    let k = order_k as f64;
    let ln = 0.5 * std::f64::consts::PI.ln() - k * beta.ln() + ln_gamma(m + k)? + ln_gamma(2.0 * m + k)?
        - (2.0 * m + k - 1.0) * 2f64.ln()
        - 2.0 * ln_gamma(m)?
        - ln_gamma(m + k + 0.5)?;
    Ok(ln.exp())
}

/// Density of the per-relay bound `γ_i = (Y/2)^n`:
/// `2√π β^m/(n Γ²(m)) γ^{m/n−1} e^{−4βγ^{1/n}} U(1/2 − m, 1 − m, 4βγ^{1/n})`.
pub fn saf_snr_pdf(gamma: f64, params: &HarmonicSnrParams) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::domain("saf_snr_pdf", format!("gamma = {gamma}")));
    }
    let n = params.fading.order();
    let m = params.fading.m;
    let beta = params.beta_h;
    if gamma == 0.0 {
        return Ok(if m / n > 1.0 { 0.0 } else { f64::INFINITY });
    }
    let z = gamma.powf(1.0 / n);
    let t = 2.0 * beta * z;
    // dF/dγ with F(γ) = H(2βγ^{1/n}).
    Ok(unit_harmonic_pdf(t, m)? * 2.0 * beta * z / (n * gamma))
}

/// CDF of the per-relay bound: `F(γ) = H(2βγ^{1/n})` with `H` the unit-rate harmonic CDF.
pub fn saf_snr_cdf(gamma: f64, params: &HarmonicSnrParams) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::domain("saf_snr_cdf", format!("gamma = {gamma}")));
    }
    let n = params.fading.order();
    unit_harmonic_cdf(2.0 * params.beta_h * gamma.powf(1.0 / n), params.fading.m)
}

/// Mean of the per-relay bound: `(m)_n (2m)_n / (m + 1/2)_n · (4β)^{−n}`.
pub fn saf_avg_snr(params: &HarmonicSnrParams) -> Result<f64> {
    let n = params.fading.order();
    let m = params.fading.m;
    Ok(pochhammer(m, n)? * pochhammer(2.0 * m, n)? / pochhammer(m + 0.5, n)?
        * (4.0 * params.beta_h).powf(-n))
}

/// Per-relay harmonic parameters; both hops of a relay must share fading and average SNR.
pub fn relay_harmonic_params(
    config: &NetworkConfig,
    power: &PowerSplit,
) -> Result<Vec<HarmonicSnrParams>> {
    config
        .relays
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let a1 = r.source.avg_snr(power.p1, config.noise_power);
            let a2 = r.dest.avg_snr(power.p2, config.noise_power);
            if r.source.fading != r.dest.fading || (a1 - a2).abs() > 1e-12 * a1.max(a2) {
                return Err(Error::NotIid(format!(
                    "relay {i}: hops must share cascade order and average SNR ({a1} vs {a2})"
                )));
            }
            HarmonicSnrParams::new(r.source.fading, a1)
        })
        .collect()
}

/// Outage of best-relay S-AF selection: `∏ᵢ F_{γᵢ}(γ_o)`.
pub fn outage_saf(config: &NetworkConfig, power: &PowerSplit) -> Result<f64> {
    let params = relay_harmonic_params(config, power)?;
    let mut ln = 0.0;
    let mut cache: Option<(HarmonicSnrParams, f64)> = None;
    for p in &params {
        let f = match cache {
            Some((q, f)) if q == *p => f,
            _ => saf_snr_cdf(config.gamma_o, p)?,
        };
        cache = Some((*p, f));
        ln += f.ln();
    }
    Ok(ln.exp())
}

fn iid_params(config: &NetworkConfig, power: &PowerSplit) -> Result<HarmonicSnrParams> {
    config.iid_link(power)?;
    Ok(relay_harmonic_params(config, power)?[0])
}

/// Small-argument form `[2^{1−2m} P(m, 4βγ_o^{1/n})]^N` for i.i.d. relays.
pub fn outage_saf_high_snr(config: &NetworkConfig, power: &PowerSplit) -> Result<f64> {
    let p = iid_params(config, power)?;
    let m = p.fading.m;
    let x = 4.0 * p.beta_h * config.gamma_o.powf(1.0 / p.fading.order());
    let per_relay = 2f64.powf(1.0 - 2.0 * m) * reg_lower_gamma(m, x)?;
    Ok(per_relay.powi(config.len() as i32))
}

/// High-SNR asymptote `(2^{m+1}(m/Ω)^m/(m λ^{m/n} Γ(m)))^N (γ_o/SNR)^{mN/n}`.
///
/// The constant coincides with the S-DF one, so both schemes share diversity
/// order and coding gain.
pub fn outage_saf_asymptotic(config: &NetworkConfig, power: &PowerSplit) -> Result<f64> {
    iid_params(config, power)?;
    crate::sdf::outage_sdf_asymptotic(config, power)
}
