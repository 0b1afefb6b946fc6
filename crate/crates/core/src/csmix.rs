//! Cross-room column splicing.
//!
//! A [`MixSpec`] picks a window of `w` consecutive columns starting at `c_a`
//! in sample A and at `c_b` in sample B. The two windows are exchanged; every
//! per-column payload of a sample (feature column, depth, height) is spliced
//! with the same spec so labels stay attached to their features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::avg::FeatureSequence;
use crate::error::{invalid, Result};
use crate::geometry::{DepthSequence, HeightSequence};

/// Half-open windows `[c_a, c_a + w)` and `[c_b, c_b + w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MixSpec {
    pub c_a: usize,
    pub c_b: usize,
    pub w: usize,
}

impl MixSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.w < 1 || self.w > n || self.c_a > n - self.w || self.c_b > n - self.w {
            return Err(invalid(format!("{self:?} is not a valid mix spec for {n} columns")));
        }
        Ok(())
    }
}

/// Uniform width in `1..=n`, then uniform starts in `0..=n−w`.
pub fn sample_mix_spec(n: usize, seed: u64) -> Result<MixSpec> {
    if n == 0 {
        return Err(invalid("cannot mix sequences with zero columns"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_mix_spec_with(n, &mut rng))
}

pub fn sample_mix_spec_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MixSpec {
    let w = rng.random_range(1..=n);
    let c_a = rng.random_range(0..=n - w);
    let c_b = rng.random_range(0..=n - w);
    MixSpec { c_a, c_b, w }
}

/// Exchanges the spec windows of `a` and `b`.
pub fn splice<T: Clone>(a: &[T], b: &[T], spec: MixSpec) -> Result<(Vec<T>, Vec<T>)> {
    if a.len() != b.len() {
        return Err(invalid(format!("cannot splice lengths {} and {}", a.len(), b.len())));
    }
    let n = a.len();
    spec.validate(n)?;
    let MixSpec { c_a, c_b, w } = spec;
    let mixed_a = [&a[..c_a], &b[c_b..c_b + w], &a[c_a + w..]].concat();
    let mixed_b = [&b[..c_b], &a[c_a..c_a + w], &b[c_b + w..]].concat();
    Ok((mixed_a, mixed_b))
}

/// Splices whole feature columns.
pub fn splice_features(
    a: &FeatureSequence,
    b: &FeatureSequence,
    spec: MixSpec,
) -> Result<(FeatureSequence, FeatureSequence)> {
    if a.channels() != b.channels() {
        return Err(invalid(format!(
            "channel mismatch: {} vs {}",
            a.channels(),
            b.channels()
        )));
    }
    let (ma, mb) = splice(&a.column_vecs(), &b.column_vecs(), spec)?;
    Ok((FeatureSequence::from_columns(&ma)?, FeatureSequence::from_columns(&mb)?))
}

/// One training sample: feature columns plus per-column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSample {
    pub features: FeatureSequence,
    pub depths: DepthSequence,
    pub heights: HeightSequence,
}

impl LayoutSample {
    pub fn new(features: FeatureSequence, depths: DepthSequence, heights: HeightSequence) -> Result<Self> {
        let n = features.columns();
        if depths.len() != n || heights.len() != n {
            return Err(invalid(format!(
                "sample has {n} feature columns, {} depths and {} heights",
                depths.len(),
                heights.len()
            )));
        }
        Ok(Self {
            features,
            depths,
            heights,
        })
    }
}

/// Applies one spec to the features, depths and heights of both samples.
pub fn splice_sample(a: &LayoutSample, b: &LayoutSample, spec: MixSpec) -> Result<(LayoutSample, LayoutSample)> {
    let (fa, fb) = splice_features(&a.features, &b.features, spec)?;
    let (da, db) = splice(a.depths.values(), b.depths.values(), spec)?;
    let (ha, hb) = splice(a.heights.values(), b.heights.values(), spec)?;
    Ok((
        LayoutSample::new(fa, DepthSequence::new(da)?, HeightSequence::new(ha)?)?,
        LayoutSample::new(fb, DepthSequence::new(db)?, HeightSequence::new(hb)?)?,
    ))
}
