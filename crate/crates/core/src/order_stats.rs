//! Order statistics of independent, non-identically distributed SNRs through
//! matrix permanents.

use crate::{Error, Result};

/// Largest matrix accepted by [`permanent`].
pub const MAX_PERMANENT_SIZE: usize = 12;

/// Per-relay CDF values `F₁(γ) … F_N(γ)` evaluated at a common `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfVector {
    values: Vec<f64>,
}

impl CdfVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("CdfVector"));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain("CdfVector::new", format!("value {bad} outside [0, 1]")));
        }
        Ok(CdfVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Permanent of a square matrix given as rows, by Ryser's formula with
/// Gray-code subset enumeration.
pub fn permanent(a: &[Vec<f64>]) -> Result<f64> {
    let n = a.len();
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::SizeLimit(n));
    }
    if n == 0 {
        return Ok(1.0);
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::domain(
            "permanent",
            format!("row of length {} in a {n}x{n} matrix", row.len()),
        ));
    }
    // row_sums[i] = Σ_{j ∈ S} a[i][j] for the current column subset S.
    let mut row_sums = vec![0.0; n];
    let mut total = 0.0;
    let mut gray: usize = 0;
    for k in 1..(1usize << n) {
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let sign = if next & (1 << col) != 0 { 1.0 } else { -1.0 };
        for (s, row) in row_sums.iter_mut().zip(a) {
            *s += sign * row[col];
        }
        gray = next;
        let prod: f64 = row_sums.iter().product();
        let parity = if next.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += parity * prod;
    }
    let overall = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(overall * total)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// CDF of the `i`-th order statistic (rank 1 is the smallest, rank `N` the
/// largest): the probability that at least `i` of the `N` variables lie at or
/// below `γ`.
pub fn cdf_ith_order(cdfs: &CdfVector, i: usize) -> Result<f64> {
    let n = cdfs.len();
    if i < 1 || i > n {
        return Err(Error::Rank { rank: i, len: n });
    }
    let f = cdfs.values();
    let mut sum = 0.0;
    for k in i..=n {
        // Row r holds (F_r repeated k times, 1 − F_r repeated N − k times).
        let matrix: Vec<Vec<f64>> = f
            .iter()
            .map(|&fr| {
                let mut row = vec![fr; k];
                row.extend(std::iter::repeat_n(1.0 - fr, n - k));
                row
            })
            .collect();
        sum += permanent(&matrix)? / (factorial(k) * factorial(n - k));
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// CDF of the maximum: `∏ᵢ Fᵢ(γ)`.
pub fn cdf_max(cdfs: &CdfVector) -> f64 {
    cdfs.values().iter().product()
}
