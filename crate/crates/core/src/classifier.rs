//! Naive Bayes classification of the cascade order from channel amplitudes.
//!
//! Given order `n` and variance scale `σ²`, the amplitude `h` satisfies
//! `h^{2/n} ~ Gamma(m, β)` with `β = (m/Ω) σ^{−2/n}`, giving the class density
//! `2 (m/Ω)^m h^{2α−1} / (n Γ(m) σ^{2α}) e^{−β h^{2/n}}` with `α = m/n`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channel::{sample_amplitude, FadingParams};
use crate::montecarlo::stream_rng;
use crate::special::{gamma, ln_gamma};
use crate::{Error, Result};

/// One class: cascade order, variance scale and prior weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassModel {
    pub n: u32,
    pub sigma2: f64,
    pub prior: f64,
}

impl ClassModel {
    pub fn new(n: u32, sigma2: f64, prior: f64) -> Result<Self> {
        FadingParams::from_order(n)?;
        if !(sigma2 > 0.0) || !(prior >= 0.0) || !prior.is_finite() {
            return Err(Error::domain(
                "ClassModel::new",
                format!("sigma2 = {sigma2}, prior = {prior}"),
            ));
        }
        Ok(ClassModel { n, sigma2, prior })
    }

    /// Default variance scale `σ² = 2^{−n}`, which corresponds to unit-power stages.
    pub fn default_sigma2(n: u32) -> f64 {
        2f64.powi(-(n as i32))
    }
}

/// Classes `orders` with default variances and uniform priors.
pub fn default_classes(orders: impl IntoIterator<Item = u32>) -> Result<Vec<ClassModel>> {
    let orders: Vec<u32> = orders.into_iter().collect();
    if orders.is_empty() {
        return Err(Error::Empty("class list"));
    }
    let prior = 1.0 / orders.len() as f64;
    orders
        .into_iter()
        .map(|n| ClassModel::new(n, ClassModel::default_sigma2(n), prior))
        .collect()
}

/// Rescales priors to sum to one.
pub fn normalize_priors(models: &mut [ClassModel]) -> Result<()> {
    let total: f64 = models.iter().map(|c| c.prior).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidConfig("priors sum to zero".into()));
    }
    for c in models.iter_mut() {
        c.prior /= total;
    }
    Ok(())
}

/// Observed channel amplitudes `h₁ … h_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSequence {
    samples: Vec<f64>,
}

impl AmplitudeSequence {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("amplitude sequence"));
        }
        if let Some(bad) = samples.iter().find(|h| !(h.is_finite() && **h >= 0.0)) {
            return Err(Error::domain("AmplitudeSequence::new", format!("sample {bad}")));
        }
        Ok(AmplitudeSequence { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Precomputed terms of one class density.
#[derive(Debug, Clone, Copy)]
struct ClassDensity {
    ln_const: f64,
    power: f64,
    exponent: f64,
    beta: f64,
}

impl ClassDensity {
    fn new(model: &ClassModel) -> Result<Self> {
        let f = FadingParams::from_order(model.n)?;
        let n = f.order();
        let alpha = f.alpha();
        let ratio = f.m / f.omega;
        Ok(ClassDensity {
            ln_const: 2f64.ln() + f.m * ratio.ln() - n.ln() - ln_gamma(f.m)? - alpha * model.sigma2.ln(),
            power: 2.0 * alpha - 1.0,
            exponent: 2.0 / n,
            beta: ratio * model.sigma2.powf(-1.0 / n),
        })
    }

    fn ln_pdf(&self, h: f64) -> f64 {
        if h == 0.0 {
            // 2α − 1 > 0 for every supported order.
            return f64::NEG_INFINITY;
        }
        self.ln_const + self.power * h.ln() - self.beta * h.powf(self.exponent)
    }
}

/// Log-density of amplitude `h` under `model`; `−∞` at `h = 0`.
pub fn class_log_likelihood(h: f64, model: &ClassModel) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::domain("class_log_likelihood", format!("h = {h}")));
    }
    Ok(ClassDensity::new(model)?.ln_pdf(h))
}

/// Maximum-likelihood variance scale `[Σ h^{2/n} / (2K Γ^n(1/n + 1))]^n` for order `n`.
pub fn sigma2_ml_estimate(seq: &AmplitudeSequence, n: u32) -> Result<f64> {
    FadingParams::from_order(n)?;
    let nf = n as f64;
    let sum: f64 = seq.samples().iter().map(|h| h.powf(2.0 / nf)).sum();
    if sum == 0.0 {
        return Err(Error::Degenerate {
            func: "sigma2_ml_estimate",
            detail: "all amplitudes are zero".into(),
        });
    }
    let g = gamma(1.0 / nf + 1.0)?;
    Ok((sum / (2.0 * seq.len() as f64 * g.powf(nf))).powf(nf))
}

/// MAP decision with the per-class log posterior scores (up to a common constant).
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: u32,
    /// `(n, ln prior + Σ ln p(h_t | n))` in the order the models were given.
    pub scores: Vec<(u32, f64)>,
}

/// Assigns the class with the largest posterior; ties go to the smaller `n`.
pub fn map_classify(seq: &AmplitudeSequence, models: &[ClassModel]) -> Result<Classification> {
    if models.is_empty() {
        return Err(Error::Empty("class list"));
    }
    let scores = models
        .iter()
        .map(|model| {
            let d = ClassDensity::new(model)?;
            let ll: f64 = seq.samples().iter().map(|&h| d.ln_pdf(h)).sum();
            Ok((model.n, model.prior.ln() + ll))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(u32, f64)> = None;
    for &(n, s) in &scores {
        if s == f64::NEG_INFINITY || s.is_nan() {
            continue;
        }
        best = match best {
            Some((bn, bs)) if bs > s || (bs == s && bn < n) => Some((bn, bs)),
            _ => Some((n, s)),
        };
    }
    let (label, _) = best.ok_or_else(|| Error::Degenerate {
        func: "map_classify",
        detail: "every class assigns zero likelihood".into(),
    })?;
    Ok(Classification { label, scores })
}

/// Probe amplitudes of the training table.
pub const TABLE_PROBES: [f64; 6] = [0.12, 0.24, 0.54, 0.78, 1.0, 1.23];

/// One class row of the empirical density table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n: u32,
    pub sigma2: f64,
    pub density: Vec<f64>,
    /// Standard error of each density estimate.
    pub std_error: Vec<f64>,
}

/// Empirical amplitude densities per class at the probe points.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTable {
    pub probes: Vec<f64>,
    pub rows: Vec<TableRow>,
}

impl TrainingTable {
    /// CSV with header `n,sigma2,h_<probe>...` and six decimals.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["n".to_string(), "sigma2".to_string()];
        header.extend(self.probes.iter().map(|p| format!("h_{p:.2}")));
        w.write_record(&header).map_err(csv_error)?;
        for row in &self.rows {
            let mut rec = vec![row.n.to_string(), format!("{:.6}", row.sigma2)];
            rec.extend(row.density.iter().map(|d| format!("{d:.6}")));
            w.write_record(&rec).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Aligned plain-text rendering with standard errors.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>2} {:>8}", "n", "sigma2");
        for p in &self.probes {
            let _ = write!(out, " {:>16}", format!("h={p:.2}"));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:>2} {:>8.4}", row.n, row.sigma2);
            for (d, se) in row.density.iter().zip(&row.std_error) {
                let _ = write!(out, " {:>16}", format!("{d:.3} ± {se:.3}"));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("csv: {e}"))
}

/// Gaussian-kernel density estimate at `points` with Silverman's bandwidth.
/// Returns `(density, standard error)` pairs; the error is `sd(kernel values)/√K`.
pub fn kde_at(samples: &[f64], points: &[f64]) -> Result<Vec<(f64, f64)>> {
    let k = samples.len();
    if k < 2 {
        return Err(Error::Empty("kernel density samples"));
    }
    let kf = k as f64;
    let mean = samples.iter().sum::<f64>() / kf;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (kf - 1.0)).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| sorted[((kf - 1.0) * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let bw = 0.9 * spread * kf.powf(-0.2);
    if !(bw > 0.0) {
        return Err(Error::Degenerate {
            func: "kde_at",
            detail: "samples have zero spread".into(),
        });
    }
    let norm = 1.0 / (bw * (2.0 * std::f64::consts::PI).sqrt());
    Ok(points
        .iter()
        .map(|&x| {
            let (s, s2) = samples.iter().fold((0.0, 0.0), |(s, s2), &h| {
                let u = (x - h) / bw;
                let v = norm * (-0.5 * u * u).exp();
                (s + v, s2 + v * v)
            });
            let d = s / kf;
            let var = (s2 / kf - d * d).max(0.0) * kf / (kf - 1.0);
            (d, (var / kf).sqrt())
        })
        .collect())
}

/// Samples `k` amplitudes per class and estimates their density at `probes`.
/// Each class's `σ²` is split evenly over its stages (`σ_k² = (σ²)^{1/n}`).
/// Classes run in parallel; class `n` draws from seed stream `n`.
pub fn build_empirical_table(
    k: usize,
    classes: &[ClassModel],
    probes: &[f64],
    seed: u64,
) -> Result<TrainingTable> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("sample count {k} is too small")));
    }
    if classes.is_empty() {
        return Err(Error::Empty("class list"));
    }
    let rows = classes
        .par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c.n as u64, 0);
            let stage = c.sigma2.powf(1.0 / c.n as f64);
            let samples: Vec<f64> = (0..k).map(|_| sample_amplitude(c.n, stage, &mut rng)).collect();
            let est = kde_at(&samples, probes)?;
            Ok(TableRow {
                n: c.n,
                sigma2: c.sigma2,
                density: est.iter().map(|e| e.0).collect(),
                std_error: est.iter().map(|e| e.1).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainingTable {
        probes: probes.to_vec(),
        rows,
    })
}

/// Draws `k` amplitudes from class `model` with an explicit seed stream.
pub fn sample_class(model: &ClassModel, k: usize, seed: u64, stream: u64) -> Result<AmplitudeSequence> {
    let mut rng = stream_rng(seed, model.n as u64, stream);
    let stage = model.sigma2.powf(1.0 / model.n as f64);
    AmplitudeSequence::new((0..k).map(|_| sample_amplitude(model.n, stage, &mut rng)).collect())
}
