//! Per-stage wall-clock statistics over a corpus.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::matcher::cosine;
use crate::pipeline::Encoder;
use crate::segmap::SegmentationMap;

/// Max / mean / min of a set of durations, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageStats {
    pub max_ms: f64,
    pub avg_ms: f64,
    pub min_ms: f64,
    pub samples: usize,
}

impl StageStats {
    pub fn from_durations(samples: &[Duration]) -> Self {
        let ms: Vec<f64> = samples.iter().map(|d| d.as_secs_f64() * 1e3).collect();
        let max = ms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ms.iter().copied().fold(f64::INFINITY, f64::min);
        let avg = ms.iter().sum::<f64>() / ms.len() as f64;
        Self {
            max_ms: max,
            // The mean of equal samples can round past them.
            avg_ms: avg.clamp(min, max),
            min_ms: min,
            samples: ms.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    /// Layering, refinement, skeletonization and shape context, per frame.
    pub extraction: StageStats,
    /// Aggregation into the global descriptor, per frame.
    pub encoding: StageStats,
    /// Scoring one query/reference pair.
    pub matching: StageStats,
}

impl TimingReport {
    pub fn rows(&self) -> [(&'static str, StageStats); 3] {
        [
            ("feature_extraction", self.extraction),
            ("descriptor_encoding", self.encoding),
            ("matching_per_pair", self.matching),
        ]
    }
}

/// Encodes every frame sequentially, then scores every frame against the
/// whole corpus. A matching sample is the mean time per pair of one query.
pub fn time_corpus(encoder: &Encoder, frames: &[SegmentationMap]) -> Result<TimingReport> {
    let mut extraction = Vec::with_capacity(frames.len());
    let mut encoding = Vec::with_capacity(frames.len());
    let mut descriptors = Vec::with_capacity(frames.len());
    for m in frames {
        let (d, t) = encoder.encode_timed(m)?;
        extraction.push(t.extraction);
        encoding.push(t.encoding);
        descriptors.push(d);
    }
    let mut matching = Vec::with_capacity(frames.len());
    let mut sink = 0.0;
    for q in &descriptors {
        let start = Instant::now();
        for r in &descriptors {
            sink += cosine(&q.values, &r.values);
        }
        matching.push(start.elapsed() / descriptors.len().max(1) as u32);
    }
    std::hint::black_box(sink);
    Ok(TimingReport {
        extraction: StageStats::from_durations(&extraction),
        encoding: StageStats::from_durations(&encoding),
        matching: StageStats::from_durations(&matching),
    })
}
