//! Skeletons, keypoints and layer centroids.
//!
//! Thinning is Zhang–Suen's two-subcycle scheme. Deletions selected in a
//! subcycle are applied one at a time and each is re-checked against the
//! current image, so a pixel is only removed while it is still a simple,
//! non-terminal point. This keeps every 8-connected component alive (plain
//! Zhang–Suen erases 2×2 squares and two-pixel diagonals). A final pass strips
//! staircase corners so the result is 8-thin.

use crate::mask::{BinaryMask, Point};

/// Pixels between fallback keypoints on skeletons without ends or branches.
pub const LOOP_KEYPOINT_STRIDE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFeatures {
    pub layer_index: usize,
    /// Skeleton pixels in raster order.
    pub skeleton: Vec<Point>,
    /// Endpoints and junctions in raster order.
    pub keypoints: Vec<Point>,
    /// Mean pixel position of the layer mask; `None` for an empty layer.
    pub centroid: Option<(f64, f64)>,
}

impl SkeletonFeatures {
    pub fn empty(layer_index: usize) -> Self {
        Self {
            layer_index,
            skeleton: Vec::new(),
            keypoints: Vec::new(),
            centroid: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.skeleton.is_empty()
    }
}

/// Zero-padded copy of a mask with neighbor offsets in index space.
struct Grid {
    stride: isize,
    cells: Vec<u8>,
    /// P2..P9: N, NE, E, SE, S, SW, W, NW.
    ring: [isize; 8],
}

impl Grid {
    fn new(mask: &BinaryMask) -> Self {
        let (w, h) = (mask.width(), mask.height());
        let stride = w + 2;
        let mut cells = vec![0u8; stride * (h + 2)];
        for y in 0..h {
            for x in 0..w {
                cells[(y + 1) * stride + x + 1] = u8::from(mask.get(x, y));
            }
        }
        let s = stride as isize;
        Self {
            stride: s,
            cells,
            ring: [-s, -s + 1, 1, s + 1, s, s - 1, -1, -s - 1],
        }
    }

    #[inline]
    fn neighbors(&self, i: usize) -> [bool; 8] {
        let mut n = [false; 8];
        for (k, off) in self.ring.iter().enumerate() {
            n[k] = self.cells[(i as isize + off) as usize] != 0;
        }
        n
    }

    fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        let stride = self.stride as usize;
        let mut out = BinaryMask::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if self.cells[(y + 1) * stride + x + 1] != 0 {
                    out.set(x, y, true);
                }
            }
        }
        out
    }
}

/// Number of 0→1 transitions walking the ring N, NE, ..., NW, N.
#[inline]
fn crossings(n: &[bool; 8]) -> usize {
    (0..8).filter(|&k| !n[k] && n[(k + 1) % 8]).count()
}

#[inline]
fn count(n: &[bool; 8]) -> usize {
    n.iter().filter(|&&b| b).count()
}

/// True if clearing the center changes neither foreground 8-connectivity nor
/// background 4-connectivity of its neighborhood.
fn is_simple(n: &[bool; 8]) -> bool {
    // Foreground 8-components among the neighbors. Ring-consecutive cells
    // touch, and so do two orthogonal cells (even positions) around a corner.
    let mut parent = [0usize, 1, 2, 3, 4, 5, 6, 7];
    fn find(p: &mut [usize; 8], mut a: usize) -> usize {
        while p[a] != a {
            a = p[a];
        }
        a
    }
    for k in 0..8 {
        for j in [(k + 1) % 8, (k + 2) % 8] {
            if n[k] && n[j] && (j == (k + 1) % 8 || k % 2 == 0) {
                let (ra, rb) = (find(&mut parent, k), find(&mut parent, j));
                parent[ra] = rb;
            }
        }
    }
    let mut seen = [false; 8];
    let mut fg_components = 0;
    for k in 0..8 {
        if n[k] {
            let r = find(&mut parent, k);
            if !seen[r] {
                seen[r] = true;
                fg_components += 1;
            }
        }
    }
    if fg_components != 1 {
        return false;
    }
    // Background 4-components are cyclic runs of clear ring cells; only runs
    // holding an orthogonal cell touch the center.
    if n.iter().all(|&b| !b) {
        return false;
    }
    let start = (0..8).find(|&k| n[k]).expect("some neighbor is set");
    let mut bg_runs = 0;
    let mut in_run = false;
    let mut run_has_orth = false;
    for step in 1..=8 {
        let k = (start + step) % 8;
        if !n[k] {
            in_run = true;
            run_has_orth |= k % 2 == 0;
        } else if in_run {
            bg_runs += usize::from(run_has_orth);
            in_run = false;
            run_has_orth = false;
        }
    }
    bg_runs == 1
}

/// Thins a mask to a unit-width skeleton, preserving the 8-connected
/// topology of every component. Deterministic.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    if mask.is_empty() {
        return BinaryMask::new(w, h);
    }
    let mut grid = Grid::new(mask);
    let stride = grid.stride;
    let orth = [-stride, 1, stride, -1];

    let mut in_border = vec![false; grid.cells.len()];
    let mut border: Vec<usize> = Vec::new();
    for i in 0..grid.cells.len() {
        if grid.cells[i] != 0 && orth.iter().any(|&o| grid.cells[(i as isize + o) as usize] == 0) {
            in_border[i] = true;
            border.push(i);
        }
    }

    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for sub in 0..2 {
            border.sort_unstable();
            candidates.clear();
            for &i in &border {
                let n = grid.neighbors(i);
                let b = count(&n);
                if !(2..=6).contains(&b) || crossings(&n) != 1 {
                    continue;
                }
                let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                let ok = if sub == 0 {
                    !(p2 && p4 && p6) && !(p4 && p6 && p8)
                } else {
                    !(p2 && p4 && p8) && !(p2 && p6 && p8)
                };
                if ok {
                    candidates.push(i);
                }
            }
            for &i in &candidates {
                let n = grid.neighbors(i);
                if count(&n) < 2 || !is_simple(&n) {
                    continue;
                }
                grid.cells[i] = 0;
                changed = true;
                for &o in &orth {
                    let j = (i as isize + o) as usize;
                    if grid.cells[j] != 0 && !in_border[j] {
                        in_border[j] = true;
                        border.push(j);
                    }
                }
            }
            border.retain(|&i| grid.cells[i] != 0);
        }
        if !changed {
            break;
        }
    }

    // Staircase cleanup: drop simple pixels with two orthogonal neighbors at a
    // corner (N+E, E+S, S+W, W+N).
    loop {
        border.sort_unstable();
        let mut changed = false;
        for &i in &border {
            if grid.cells[i] == 0 {
                continue;
            }
            let n = grid.neighbors(i);
            let corner = (n[0] && n[2]) || (n[2] && n[4]) || (n[4] && n[6]) || (n[6] && n[0]);
            if corner && count(&n) >= 2 && is_simple(&n) {
                grid.cells[i] = 0;
                changed = true;
            }
        }
        border.retain(|&i| grid.cells[i] != 0);
        if !changed {
            break;
        }
    }

    grid.to_mask(w, h)
}

/// Role of a skeleton pixel, from the number of branches leaving it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelKind {
    Endpoint,
    Path,
    Junction,
}

/// Classifies a skeleton pixel by its 8-neighborhood. Branches are counted as
/// separate runs of skeleton pixels around the ring, so two neighbors that
/// touch each other form one branch.
pub fn classify(skeleton: &BinaryMask, p: Point) -> PixelKind {
    let mut n = [false; 8];
    const RING: [(i32, i32); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];
    for (k, (dx, dy)) in RING.iter().enumerate() {
        n[k] = skeleton.get_or_clear(p.x + dx, p.y + dy);
    }
    let branches = if count(&n) == 0 { 1 } else { crossings(&n) };
    match branches {
        0 | 2 => PixelKind::Path,
        1 => PixelKind::Endpoint,
        _ => PixelKind::Junction,
    }
}

/// Endpoints and junctions of a unit-width skeleton, in raster order. A
/// skeleton with neither (closed loops) falls back to every
/// [`LOOP_KEYPOINT_STRIDE`]-th pixel.
pub fn extract_keypoints(skeleton: &BinaryMask) -> Vec<Point> {
    let keypoints: Vec<Point> = skeleton
        .points()
        .filter(|&p| classify(skeleton, p) != PixelKind::Path)
        .collect();
    if keypoints.is_empty() {
        skeleton.points().step_by(LOOP_KEYPOINT_STRIDE).collect()
    } else {
        keypoints
    }
}

/// Mean position of the set pixels, `None` for an empty mask.
pub fn centroid(mask: &BinaryMask) -> Option<(f64, f64)> {
    let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
    for p in mask.points() {
        sx += p.x as u64;
        sy += p.y as u64;
        n += 1;
    }
    (n > 0).then(|| (sx as f64 / n as f64, sy as f64 / n as f64))
}

/// Skeleton, keypoints and centroid of one layer.
pub fn extract_features(mask: &BinaryMask, layer_index: usize) -> SkeletonFeatures {
    if mask.is_empty() {
        return SkeletonFeatures::empty(layer_index);
    }
    let skeleton = thin(mask);
    SkeletonFeatures {
        layer_index,
        keypoints: extract_keypoints(&skeleton),
        skeleton: skeleton.points().collect(),
        centroid: centroid(mask),
    }
}
