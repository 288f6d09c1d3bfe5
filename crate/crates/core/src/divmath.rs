//! True diversities (Hill numbers) and the classic indices they subsume.
//!
//! Every measure here is a pure function of a validated [`Distribution`]. Entries equal to zero
//! never contribute to a sum or product, which realizes the `0^0 = 1` convention of the Shannon
//! case and the restriction to the baseline's support for relative diversities.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Sums within this distance of 1 are accepted as they are.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Sums further than this from 1 are rejected instead of being rescaled.
pub const RENORMALIZATION_LIMIT: f64 = 1e-3;

/// Orders within this distance of 0, 1 or 2 are snapped to the exact tag.
pub const ALPHA_SNAP_TOLERANCE: f64 = 1e-9;

/// Above this many terms sums switch to compensated (Neumaier) accumulation.
pub const COMPENSATED_SUM_THRESHOLD: usize = 1_000;

/// A finite probability vector: non-negative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates `weights` as a probability vector.
    ///
    /// Sums that miss 1 by more than [`NORMALIZATION_TOLERANCE`] but less than
    /// [`RENORMALIZATION_LIMIT`] are rescaled; anything further off is an error.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let total = check_weights(&weights)?;
        let deviation = (total - 1.0).abs();
        if deviation > RENORMALIZATION_LIMIT {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, which is not within {RENORMALIZATION_LIMIT} of 1"
            )));
        }
        if deviation > NORMALIZATION_TOLERANCE {
            return Ok(Self::rescaled(weights, total));
        }
        Ok(Distribution { weights })
    }

    /// Explicitly rescales arbitrary non-negative weights (e.g. counts) to sum to one.
    pub fn normalize(weights: Vec<f64>) -> Result<Self> {
        let total = check_weights(&weights)?;
        if total <= 0.0 {
            return Err(Error::InvalidDistribution(
                "weights have zero total mass".into(),
            ));
        }
        Ok(Self::rescaled(weights, total))
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        Self::normalize(counts.iter().map(|&c| c as f64).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        Ok(Distribution {
            weights: vec![1.0 / k as f64; k],
        })
    }

    /// Degenerate distribution with all mass on `index`.
    pub fn point(k: usize, index: usize) -> Result<Self> {
        if index >= k {
            return Err(Error::OutOfRange(format!("index {index} in a {k}-entry distribution")));
        }
        let mut weights = vec![0.0; k];
        weights[index] = 1.0;
        Ok(Distribution { weights })
    }

    fn rescaled(mut weights: Vec<f64>, total: f64) -> Self {
        for w in &mut weights {
            *w /= total;
        }
        Distribution { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// Always false: empty distributions cannot be constructed.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn positive(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().copied().filter(|&w| w > 0.0)
    }

    fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

fn check_weights(weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidDistribution(format!(
            "weight {i} is {w}; weights must be finite and non-negative"
        )));
    }
    Ok(stable_sum(weights.len(), weights.iter().copied()))
}

/// Sum of `terms`, compensated when there are more than [`COMPENSATED_SUM_THRESHOLD`] of them.
pub(crate) fn stable_sum(len: usize, terms: impl Iterator<Item = f64>) -> f64 {
    if len <= COMPENSATED_SUM_THRESHOLD {
        return terms.sum();
    }
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Order of a true diversity. The special orders carry exact tags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaOrder {
    Zero,
    One,
    Two,
    Infinity,
    General(f64),
}

impl AlphaOrder {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::InvalidAlpha("NaN".into()));
        }
        if value == f64::INFINITY {
            return Ok(AlphaOrder::Infinity);
        }
        for (tag, at) in [
            (AlphaOrder::Zero, 0.0),
            (AlphaOrder::One, 1.0),
            (AlphaOrder::Two, 2.0),
        ] {
            if (value - at).abs() <= ALPHA_SNAP_TOLERANCE {
                return Ok(tag);
            }
        }
        if value < 0.0 || !value.is_finite() {
            return Err(Error::InvalidAlpha(format!(
                "{value}; orders must be non-negative"
            )));
        }
        Ok(AlphaOrder::General(value))
    }

    pub fn value(self) -> f64 {
        match self {
            AlphaOrder::Zero => 0.0,
            AlphaOrder::One => 1.0,
            AlphaOrder::Two => 2.0,
            AlphaOrder::Infinity => f64::INFINITY,
            AlphaOrder::General(a) => a,
        }
    }
}

impl FromStr for AlphaOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(AlphaOrder::Infinity),
            other => {
                let value: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidAlpha(format!("`{s}` is not a number or `inf`")))?;
                AlphaOrder::new(value)
            }
        }
    }
}

impl fmt::Display for AlphaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaOrder::Zero => f.write_str("0"),
            AlphaOrder::One => f.write_str("1"),
            AlphaOrder::Two => f.write_str("2"),
            AlphaOrder::Infinity => f.write_str("inf"),
            AlphaOrder::General(a) => write!(f, "{a}"),
        }
    }
}

fn shannon_nats(p: &Distribution) -> f64 {
    -stable_sum(p.len(), p.positive().map(|w| w * w.ln()))
}

/// Natural log of `sum p_i^alpha` for a general order.
fn ln_power_sum(p: &Distribution, alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 0.5 {
        // sum p^a = sum p + sum p (p^(a-1) - 1); the second term is small near a = 1
        let excess = stable_sum(p.len(), p.weights.iter().copied()) - 1.0;
        let bump = stable_sum(
            p.len(),
            p.positive().map(|w| w * ((alpha - 1.0) * w.ln()).exp_m1()),
        );
        (excess + bump).ln_1p()
    } else {
        let top = p.max_weight();
        let scaled = stable_sum(p.len(), p.positive().map(|w| (w / top).powf(alpha)));
        alpha * top.ln() + scaled.ln()
    }
}

/// Hill number `D_alpha(p)`: the effective number of types of `p`.
pub fn true_diversity(p: &Distribution, alpha: AlphaOrder) -> f64 {
    match alpha {
        AlphaOrder::Zero => p.positive().count() as f64,
        AlphaOrder::One => shannon_nats(p).exp(),
        AlphaOrder::Two => 1.0 / hhi(p),
        AlphaOrder::Infinity => 1.0 / p.max_weight(),
        AlphaOrder::General(a) => (ln_power_sum(p, a) / (1.0 - a)).exp(),
    }
}

/// Rényi entropy in nats, `ln D_alpha(p)`.
pub fn renyi_entropy(p: &Distribution, alpha: AlphaOrder) -> f64 {
    match alpha {
        AlphaOrder::One => shannon_nats(p),
        AlphaOrder::General(a) => ln_power_sum(p, a) / (1.0 - a),
        other => true_diversity(p, other).ln(),
    }
}

/// Relative true diversity `D_alpha(p || q)`, the exponential of the Rényi divergence of `p`
/// from `q`. Equals 1 exactly when `p = q` and `k / D_alpha(p)` against the uniform baseline.
pub fn relative_true_diversity(
    p: &Distribution,
    q: &Distribution,
    alpha: AlphaOrder,
) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            left: p.len(),
            right: q.len(),
        });
    }
    if let Some(index) = p
        .weights
        .iter()
        .zip(&q.weights)
        .position(|(&pi, &qi)| pi > 0.0 && qi == 0.0)
    {
        return Err(Error::AbsoluteContinuity { index });
    }
    let k = p.len();
    // pairs on the joint support; p_i = 0 terms vanish for every order > 0
    let pairs = || {
        p.weights
            .iter()
            .zip(&q.weights)
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &qi)| (pi, qi))
    };
    let value = match alpha {
        AlphaOrder::Zero => 1.0 / stable_sum(k, pairs().map(|(_, qi)| qi)),
        AlphaOrder::One => stable_sum(k, pairs().map(|(pi, qi)| pi * (pi / qi).ln())).exp(),
        AlphaOrder::Two => stable_sum(k, pairs().map(|(pi, qi)| pi * pi / qi)),
        AlphaOrder::Infinity => pairs().map(|(pi, qi)| pi / qi).fold(0.0, f64::max),
        AlphaOrder::General(a) => {
            let ln_sum = if (a - 1.0).abs() < 0.5 {
                let excess = stable_sum(k, p.weights.iter().copied()) - 1.0;
                let bump = stable_sum(
                    k,
                    pairs().map(|(pi, qi)| pi * ((a - 1.0) * (pi / qi).ln()).exp_m1()),
                );
                (excess + bump).ln_1p()
            } else {
                let logs: Vec<f64> = pairs()
                    .map(|(pi, qi)| a * pi.ln() + (1.0 - a) * qi.ln())
                    .collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                top + stable_sum(logs.len(), logs.iter().map(|t| (t - top).exp())).ln()
            };
            (ln_sum / (a - 1.0)).exp()
        }
    };
    Ok(value)
}

/// Number of types with positive probability.
pub fn richness(p: &Distribution) -> f64 {
    true_diversity(p, AlphaOrder::Zero)
}

pub fn shannon_entropy_base2(p: &Distribution) -> f64 {
    shannon_nats(p) / std::f64::consts::LN_2
}

/// Herfindahl-Hirschman index: the probability that two draws share a type.
pub fn hhi(p: &Distribution) -> f64 {
    stable_sum(p.len(), p.positive().map(|w| w * w))
}

pub fn gini_simpson(p: &Distribution) -> f64 {
    1.0 - hhi(p)
}

pub fn berger_parker(p: &Distribution) -> f64 {
    p.max_weight()
}

/// `(1 / 2k) sum_i sum_j |p_i - p_j|`, evaluated in `O(k log k)` from the gaps between
/// consecutive sorted weights, so that equal weights give exactly zero.
pub fn gini_coefficient(p: &Distribution) -> f64 {
    let mut sorted = p.weights.clone();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    // gap m separates m + 1 smaller weights from k - m - 1 larger ones
    let total = stable_sum(
        k,
        sorted
            .windows(2)
            .enumerate()
            .map(|(m, w)| (w[1] - w[0]) * ((m + 1) * (k - m - 1)) as f64),
    );
    total / k as f64
}

/// `prod values_i ^ weights_i`, accumulated in log space. Zero-weight entries are skipped.
pub fn weighted_geometric_mean(values: &[f64], weights: &Distribution) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::Dimension {
            left: values.len(),
            right: weights.len(),
        });
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!(
            "geometric mean of non-positive value {v}"
        )));
    }
    let log_mean = stable_sum(
        values.len(),
        values
            .iter()
            .zip(&weights.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, w)| w * v.ln()),
    );
    Ok(log_mean.exp())
}

/// The `m`-fold replication of `p`: `(p_1/m, ..., p_k/m)` repeated `m` times.
pub fn replicate(p: &Distribution, m: usize) -> Result<Distribution> {
    if m == 0 {
        return Err(Error::Domain("replication factor must be at least 1".into()));
    }
    let block: Vec<f64> = p.weights.iter().map(|w| w / m as f64).collect();
    let mut weights = Vec::with_capacity(block.len() * m);
    for _ in 0..m {
        weights.extend_from_slice(&block);
    }
    Distribution::new(weights)
}
