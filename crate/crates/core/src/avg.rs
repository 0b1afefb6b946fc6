//! Appearance variation: per-channel feature statistics, the
//! statistics-matching loss, a seeded style sampler and AdaIN transfer.
//!
//! Statistics are taken per channel over the `N` columns of a sequence and
//! use the population standard deviation, which makes the transfer exactly
//! invertible. Channels whose spread falls below [`DEGENERATE_STD`] pass
//! through the transfer untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Channels with a standard deviation below this are left as they are.
pub const DEGENERATE_STD: f64 = 1e-6;

/// `N × D` column-major feature sequence: column `c` occupies
/// `data[c * D .. (c + 1) * D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    columns: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureSequence {
    pub fn new(columns: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if columns < 2 || channels < 1 {
            return Err(invalid(format!(
                "feature sequence needs N >= 2 and D >= 1, got {columns}x{channels}"
            )));
        }
        if data.len() != columns * channels {
            return Err(invalid(format!(
                "expected {} values for {columns}x{channels}, got {}",
                columns * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("feature sequence contains non-finite values"));
        }
        Ok(Self {
            columns,
            channels,
            data,
        })
    }

    /// Builds a sequence from one vector per column.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let channels = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != channels) {
            return Err(invalid("columns have differing channel counts"));
        }
        Self::new(cols.len(), channels, cols.concat())
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.channels..(c + 1) * self.channels]
    }

    pub fn get(&self, column: usize, channel: usize) -> f64 {
        self.data[column * self.channels + channel]
    }

    pub fn column_vecs(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.channels).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ChannelStats {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() || mean.is_empty() {
            return Err(invalid("mean and std must have the same non-zero length"));
        }
        if std.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) || mean.iter().any(|m| !m.is_finite()) {
            return Err(invalid("channel stats must be finite with non-negative std"));
        }
        Ok(Self { mean, std })
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }
}

/// Per-channel mean and population standard deviation over the columns.
pub fn channel_stats(z: &FeatureSequence) -> ChannelStats {
    let n = z.columns as f64;
    let mut mean = vec![0.0; z.channels];
    for col in z.data.chunks(z.channels) {
        for (m, v) in mean.iter_mut().zip(col) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; z.channels];
    for col in z.data.chunks(z.channels) {
        for ((s, v), m) in var.iter_mut().zip(col).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    ChannelStats { mean, std }
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `‖μ(Z) − μ(Ẑ)‖₂ + ‖σ(Z) − σ(Ẑ)‖₂`.
pub fn variation_loss(z: &FeatureSequence, z_hat: &FeatureSequence) -> Result<f64> {
    if z.columns != z_hat.columns || z.channels != z_hat.channels {
        return Err(invalid(format!(
            "shape mismatch: {}x{} vs {}x{}",
            z.columns, z.channels, z_hat.columns, z_hat.channels
        )));
    }
    Ok(stats_distance(&channel_stats(z), &channel_stats(z_hat)))
}

/// The statistics part of [`variation_loss`], for callers that already hold
/// the stats.
pub fn stats_distance(a: &ChannelStats, b: &ChannelStats) -> f64 {
    l2_distance(&a.mean, &b.mean) + l2_distance(&a.std, &b.std)
}

/// Prior for synthetic styles: `mean ~ N(0, mean_scale²)`,
/// `std = |N(1, std_scale²)| + 1e-6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StylePrior {
    pub mean_scale: f64,
    pub std_scale: f64,
    pub seed: u64,
}

impl StylePrior {
    pub fn new(mean_scale: f64, std_scale: f64, seed: u64) -> Result<Self> {
        if !(mean_scale >= 0.0 && std_scale >= 0.0 && mean_scale.is_finite() && std_scale.is_finite()) {
            return Err(invalid("style prior scales must be finite and non-negative"));
        }
        Ok(Self {
            mean_scale,
            std_scale,
            seed,
        })
    }
}

pub fn sample_style(prior: &StylePrior, channels: usize) -> Result<ChannelStats> {
    if channels == 0 {
        return Err(invalid("style needs at least one channel"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(prior.seed);
    let mut mean = Vec::with_capacity(channels);
    let mut std = Vec::with_capacity(channels);
    for _ in 0..channels {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        mean.push(prior.mean_scale * a);
        std.push((1.0 + prior.std_scale * b).abs() + 1e-6);
    }
    Ok(ChannelStats { mean, std })
}

/// `Z̃ = σ*·(Z − μ(Z))/σ(Z) + μ*` per channel.
pub fn adain_transfer(content: &FeatureSequence, style: &ChannelStats) -> Result<FeatureSequence> {
    if style.channels() != content.channels {
        return Err(invalid(format!(
            "style has {} channels, content has {}",
            style.channels(),
            content.channels
        )));
    }
    let own = channel_stats(content);
    let mut data = content.data.clone();
    for col in data.chunks_mut(content.channels) {
        for (c, v) in col.iter_mut().enumerate() {
            if own.std[c] >= DEGENERATE_STD {
                *v = style.std[c] * (*v - own.mean[c]) / own.std[c] + style.mean[c];
            }
        }
    }
    FeatureSequence::new(content.columns, content.channels, data)
}

/// Transfers the statistics of a caller-provided style sequence `Z*`.
pub fn adain_from_reference(content: &FeatureSequence, reference: &FeatureSequence) -> Result<FeatureSequence> {
    adain_transfer(content, &channel_stats(reference))
}
