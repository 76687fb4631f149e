//! Residual aggregation of shape-context histograms into layer and global
//! descriptors, plus temporal smoothing of reference sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shapectx::PointDescriptor;

/// Unit-norm layer vector, or all zeros for an empty or degenerate layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerDescriptor {
    pub layer_index: usize,
    pub values: Vec<f64>,
}

impl LayerDescriptor {
    pub fn zero(layer_index: usize, len: usize) -> Self {
        Self {
            layer_index,
            values: vec![0.0; len],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Concatenated, normalized layer vectors of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDescriptor {
    pub frame_id: u32,
    pub values: Vec<f64>,
    /// No layer contributed: `values` is all zeros.
    pub empty: bool,
    /// Temporal smoothing has been applied.
    pub smoothed: bool,
}

impl GlobalDescriptor {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalParams {
    /// Half-window in frames.
    pub t: usize,
}

impl Default for TemporalParams {
    fn default() -> Self {
        Self { t: 3 }
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scales `v` to unit length. Vectors already within a few ulps of unit length
/// are left as they are, so normalizing is idempotent. Returns false (and
/// leaves `v` untouched) for the zero vector.
pub(crate) fn normalize(v: &mut [f64]) -> bool {
    let norm = l2_norm(v);
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    if (norm - 1.0).abs() > 4.0 * f64::EPSILON {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    true
}

/// Sums the residuals `d_i - d_c` and normalizes the sum.
///
/// Residuals are accumulated in integers, so the result does not depend on
/// keypoint order. A zero sum (including no keypoints) yields the zero vector.
pub fn aggregate_layer(
    layer_index: usize,
    center: &PointDescriptor,
    keypoints: &[PointDescriptor],
) -> Result<LayerDescriptor> {
    let len = center.bins.len();
    let mut sum = vec![0i64; len];
    for d in keypoints {
        if d.bins.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: d.bins.len(),
            });
        }
        for ((s, &a), &c) in sum.iter_mut().zip(&d.bins).zip(&center.bins) {
            *s += i64::from(a) - i64::from(c);
        }
    }
    let sq: i128 = sum.iter().map(|&s| i128::from(s) * i128::from(s)).sum();
    if sq == 0 {
        return Ok(LayerDescriptor::zero(layer_index, len));
    }
    let norm = (sq as f64).sqrt();
    Ok(LayerDescriptor {
        layer_index,
        values: sum.iter().map(|&s| s as f64 / norm).collect(),
    })
}

/// Concatenates `K` layer vectors (ordered by layer index) and normalizes.
pub fn build_global(layers: &[LayerDescriptor], expected_layers: usize, frame_id: u32) -> Result<GlobalDescriptor> {
    if layers.len() != expected_layers {
        return Err(Error::LayerCount {
            expected: expected_layers,
            actual: layers.len(),
        });
    }
    let width = layers.first().map_or(0, |l| l.values.len());
    let mut values = Vec::with_capacity(width * layers.len());
    for (position, layer) in layers.iter().enumerate() {
        if layer.layer_index != position {
            return Err(Error::LayerOrder {
                position,
                index: layer.layer_index,
            });
        }
        if layer.values.len() != width {
            return Err(Error::LengthMismatch {
                left: width,
                right: layer.values.len(),
            });
        }
        values.extend_from_slice(&layer.values);
    }
    let empty = !normalize(&mut values);
    Ok(GlobalDescriptor {
        frame_id,
        values,
        empty,
        smoothed: false,
    })
}

/// Replaces each descriptor by the normalized sum of its neighbors within
/// `±t` frames. Windows are clamped to the sequence.
///
/// The sum is formed as a running mean (same direction), which leaves a run of
/// identical descriptors exactly unchanged. With `t = 0` the output equals the
/// input.
pub fn temporal_smooth(raw: &[GlobalDescriptor], params: TemporalParams) -> Vec<GlobalDescriptor> {
    let n = raw.len();
    let t = params.t;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(t);
            let hi = (i + t).min(n - 1);
            let mut mean = raw[lo].values.clone();
            for (k, d) in raw[lo + 1..=hi].iter().enumerate() {
                let count = (k + 2) as f64;
                for (m, &v) in mean.iter_mut().zip(&d.values) {
                    *m += (v - *m) / count;
                }
            }
            let empty = !normalize(&mut mean);
            GlobalDescriptor {
                frame_id: raw[i].frame_id,
                values: mean,
                empty,
                smoothed: true,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pd(bins: Vec<u32>) -> PointDescriptor {
        PointDescriptor {
            bins,
            reference: (0.0, 0.0),
        }
    }

    fn gd(frame_id: u32, values: Vec<f64>) -> GlobalDescriptor {
        let mut values = values;
        let empty = !normalize(&mut values);
        GlobalDescriptor {
            frame_id,
            values,
            empty,
            smoothed: false,
        }
    }

    #[test]
    fn no_keypoints_gives_zero_vector() {
        let v = aggregate_layer(2, &pd(vec![1, 2, 3]), &[]).unwrap();
        assert!(v.is_zero());
        assert_eq!(v.values.len(), 3);
        assert_eq!(v.layer_index, 2);
    }

    #[test]
    fn single_residual_is_normalized() {
        let v = aggregate_layer(0, &pd(vec![1, 1, 0, 0]), &[pd(vec![4, 5, 0, 0])]).unwrap();
        assert_eq!(v.values, vec![0.6, 0.8, 0.0, 0.0]);
    }

    #[test]
    fn zero_residual_sum_is_guarded() {
        let c = pd(vec![2, 0, 7]);
        let v = aggregate_layer(0, &c, &[c.clone(), c.clone()]).unwrap();
        assert!(v.is_zero());
        // Residuals that cancel out.
        let v = aggregate_layer(0, &pd(vec![2, 2]), &[pd(vec![3, 1]), pd(vec![1, 3])]).unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(aggregate_layer(0, &pd(vec![1, 2]), &[pd(vec![1])]).is_err());
    }

    #[test]
    fn global_concatenation() {
        let mut a = LayerDescriptor::zero(0, 4);
        a.values[0] = 1.0;
        let b = LayerDescriptor::zero(1, 4);
        let g = build_global(&[a.clone(), b.clone()], 2, 9).unwrap();
        assert_eq!(g.values, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(!g.empty);
        assert_eq!(g.frame_id, 9);

        let z = build_global(&[LayerDescriptor::zero(0, 4), LayerDescriptor::zero(1, 4)], 2, 0).unwrap();
        assert!(z.empty);
        assert!(z.values.iter().all(|&v| v == 0.0));

        assert!(matches!(build_global(&[a.clone()], 2, 0), Err(Error::LayerCount { .. })));
        assert!(matches!(build_global(&[b, a], 2, 0), Err(Error::LayerOrder { .. })));
    }

    #[test]
    fn global_length_is_k_m_n() {
        let layers: Vec<_> = (0..8).map(|k| LayerDescriptor::zero(k, 12 * 5)).collect();
        assert_eq!(build_global(&layers, 8, 0).unwrap().len(), 480);
    }

    #[test]
    fn two_unit_layers_share_the_norm() {
        let mut a = LayerDescriptor::zero(0, 2);
        a.values[0] = 1.0;
        let mut b = LayerDescriptor::zero(1, 2);
        b.values[1] = 1.0;
        let g = build_global(&[a, b], 2, 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.values[0] - h).abs() < 1e-15 && (g.values[3] - h).abs() < 1e-15);
    }

    #[test]
    fn t_zero_is_identity() {
        let raw = vec![gd(0, vec![1.0, 2.0]), gd(1, vec![0.0, 0.0]), gd(2, vec![3.0, -1.0])];
        let s = temporal_smooth(&raw, TemporalParams { t: 0 });
        for (a, b) in raw.iter().zip(&s) {
            assert_eq!(a.values, b.values);
            assert_eq!(a.empty, b.empty);
            assert!(b.smoothed);
        }
    }

    #[test]
    fn constant_sequence_is_a_fixed_point() {
        let d0 = gd(0, vec![0.3, -0.2, 0.9, 0.1]);
        let raw: Vec<_> = (0..6).map(|i| GlobalDescriptor { frame_id: i, ..d0.clone() }).collect();
        for t in 0..5 {
            for s in temporal_smooth(&raw, TemporalParams { t }) {
                assert_eq!(s.values, d0.values);
            }
        }
    }

    #[test]
    fn window_is_clamped_at_sequence_ends() {
        // Five orthogonal frames: frame 0 with t = 3 averages frames 0..=3.
        let raw: Vec<_> = (0..5)
            .map(|i| {
                let mut v = vec![0.0; 5];
                v[i] = 1.0;
                gd(i as u32, v)
            })
            .collect();
        let s = temporal_smooth(&raw, TemporalParams { t: 3 });
        assert_eq!(s[0].values, vec![0.5, 0.5, 0.5, 0.5, 0.0]);
        let third = 1.0 / 5f64.sqrt();
        assert!(s[2].values.iter().all(|&v| (v - third).abs() < 1e-15));
    }

    fn arb_seq() -> impl Strategy<Value = Vec<GlobalDescriptor>> {
        proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 6), 1..12)
            .prop_map(|vs| vs.into_iter().enumerate().map(|(i, v)| gd(i as u32, v)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn aggregation_ignores_keypoint_order(
            center in proptest::collection::vec(0u32..50, 12),
            kps in proptest::collection::vec(proptest::collection::vec(0u32..50, 12), 0..8),
            seed in any::<u64>(),
        ) {
            let list: Vec<_> = kps.into_iter().map(pd).collect();
            let mut shuffled = list.clone();
            // Deterministic Fisher–Yates from the seed.
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let a = aggregate_layer(0, &pd(center.clone()), &list).unwrap();
            let b = aggregate_layer(0, &pd(center), &shuffled).unwrap();
            prop_assert_eq!(&a.values, &b.values);
            let n = l2_norm(&a.values);
            prop_assert!(a.is_zero() || (n - 1.0).abs() <= 1e-9);
        }
    }

    proptest! {
        #[test]
        fn smoothing_is_local(raw in arb_seq(), t in 0usize..4, j_seed in any::<usize>(), bump in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let j = j_seed % raw.len();
            let mut changed = raw.clone();
            changed[j] = gd(j as u32, bump);
            let a = temporal_smooth(&raw, TemporalParams { t });
            let b = temporal_smooth(&changed, TemporalParams { t });
            for i in 0..raw.len() {
                if i + t < j || i > j + t {
                    prop_assert_eq!(&a[i].values, &b[i].values);
                }
            }
        }

        #[test]
        fn smoothing_ignores_scale(raw in arb_seq(), t in 0usize..4, alpha in 0.01f64..100.0) {
            let scaled: Vec<_> = raw.iter().map(|d| GlobalDescriptor {
                values: d.values.iter().map(|v| v * alpha).collect(),
                ..d.clone()
            }).collect();
            let a = temporal_smooth(&raw, TemporalParams { t });
            let b = temporal_smooth(&scaled, TemporalParams { t });
            for (x, y) in a.iter().zip(&b) {
                prop_assert_eq!(x.empty, y.empty);
                for (p, q) in x.values.iter().zip(&y.values) {
                    prop_assert!((p - q).abs() < 1e-12);
                }
                prop_assert!(x.empty || (x.norm() - 1.0).abs() <= 1e-9);
            }
        }
    }
}
