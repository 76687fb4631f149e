use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aggregate::GlobalDescriptor;
use crate::error::Result;
use crate::mask::Point;
use crate::matcher::cosine;
use crate::pipeline::{Encoder, FrameFeatures};
use crate::segmap::SegmentationMap;

/// Jitter magnitudes of the published robustness table, in pixels.
pub const TABLE_DELTAS: [u32; 6] = [25, 50, 75, 100, 125, 150];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseParams {
    /// Maximum per-axis offset in pixels.
    pub delta: u32,
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub delta: u32,
    /// Recall@1 of each run, as a fraction.
    pub per_run: Vec<f64>,
    pub mean: f64,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn frame_seed(seed: u64, run: usize, frame: usize) -> u64 {
    mix(mix(mix(seed) ^ run as u64) ^ frame as u64)
}

/// Moves every skeleton pixel and keypoint by independent uniform integer
/// offsets in `[-delta, delta]` per axis, clamped to the image. Centroids are
/// left in place.
pub fn jitter_features(features: &FrameFeatures, delta: u32, rng: &mut impl Rng) -> FrameFeatures {
    let mut out = features.clone();
    if delta == 0 {
        return out;
    }
    let d = delta as i32;
    let (xmax, ymax) = (features.width as i32 - 1, features.height as i32 - 1);
    let mut shift = |p: &mut Point| {
        p.x = (p.x + rng.random_range(-d..=d)).clamp(0, xmax);
        p.y = (p.y + rng.random_range(-d..=d)).clamp(0, ymax);
    };
    for layer in &mut out.layers {
        layer.skeleton.iter_mut().for_each(&mut shift);
        layer.keypoints.iter_mut().for_each(&mut shift);
    }
    out
}

fn recall_at_1(queries: &[GlobalDescriptor], refs: &[GlobalDescriptor]) -> f64 {
    let hits = queries
        .iter()
        .filter(|q| {
            let mut best = (u32::MAX, f64::NEG_INFINITY);
            for r in refs {
                let s = cosine(&q.values, &r.values);
                if s > best.1 || (s == best.1 && r.frame_id < best.0) {
                    best = (r.frame_id, s);
                }
            }
            best.0 == q.frame_id
        })
        .count();
    hits as f64 / queries.len() as f64
}

/// Matches jittered copies of `frames` against their clean descriptors and
/// averages Recall@1 over `params.runs` runs. Frame ids must be distinct;
/// frame `i` is the only correct match for its jittered copy.
pub fn noise_experiment(encoder: &Encoder, frames: &[SegmentationMap], params: NoiseParams) -> Result<NoiseReport> {
    let features: Vec<FrameFeatures> = frames.iter().map(|m| encoder.features(m)).collect::<Result<_>>()?;
    noise_experiment_on_features(encoder, &features, params)
}

/// As [`noise_experiment`], reusing already extracted features.
pub fn noise_experiment_on_features(
    encoder: &Encoder,
    features: &[FrameFeatures],
    params: NoiseParams,
) -> Result<NoiseReport> {
    let clean: Vec<GlobalDescriptor> = features.par_iter().map(|f| encoder.describe(f)).collect::<Result<_>>()?;
    let mut per_run = Vec::with_capacity(params.runs);
    for run in 0..params.runs {
        let noisy: Vec<GlobalDescriptor> = features
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(params.seed, run, i));
                encoder.describe(&jitter_features(f, params.delta, &mut rng))
            })
            .collect::<Result<_>>()?;
        per_run.push(if noisy.is_empty() { 0.0 } else { recall_at_1(&noisy, &clean) });
    }
    let mean = if per_run.is_empty() {
        0.0
    } else {
        per_run.iter().sum::<f64>() / per_run.len() as f64
    };
    Ok(NoiseReport {
        delta: params.delta,
        per_run,
        mean,
    })
}
