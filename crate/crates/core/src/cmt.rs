//! Convex minorant trees: the recursive family of minorant faces, the
//! distance martingale from the root, and pairwise distances.

use std::f64::consts::FRAC_PI_2;

use crate::convexmin::{gcm_unchecked, last_face_lefts};
use crate::error::{domain, usage, Result};
use crate::frag;
use crate::paths::PathSample;
use crate::rng::{RngKey, UniformField};

/// `sqrt(pi / 2)`, the constant in front of every sum of square-root masses.
pub fn scale() -> f64 {
    FRAC_PI_2.sqrt()
}

/// The association map: one uniform per grid index, keyed by purpose `assoc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAssignment {
    field: Option<UniformField>,
    constant: f64,
}

impl UniformAssignment {
    pub fn new(master_seed: u64) -> Self {
        Self::from_key(&RngKey::new(master_seed, "assoc", 0))
    }

    pub fn from_key(key: &RngKey) -> Self {
        Self { field: Some(UniformField::new(key)), constant: 0.0 }
    }

    /// Every index receives `u` (test hook).
    pub fn constant(u: f64) -> Self {
        assert!((0.0..1.0).contains(&u), "constant uniform must lie in [0, 1)");
        Self { field: None, constant: u }
    }

    pub fn u(&self, index: usize) -> f64 {
        match self.field {
            Some(f) => f.at(index as u64),
            None => self.constant,
        }
    }

    /// Join point of the face `[left, right]`: uniform over the interior grid
    /// points, driven by the uniform of `right`. One-cell faces return `left`.
    pub fn join(&self, left: usize, right: usize) -> usize {
        let k = right - left;
        if k < 2 {
            return left;
        }
        left + 1 + ((self.u(right) * (k - 1) as f64) as usize).min(k - 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub max_depth: usize,
    /// Faces of length at most `min_len` (time units) are not expanded.
    pub min_len: f64,
}

impl Cutoff {
    /// Depth 18 and four grid cells.
    pub fn default_for(path: &PathSample) -> Self {
        Self { max_depth: 18, min_len: 4.0 * path.step() }
    }

    /// No depth limit; only the length cutoff applies.
    pub fn unbounded(min_len: f64) -> Self {
        Self { max_depth: usize::MAX, min_len }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    /// Position among the parent's children, 1-based.
    pub ordinal: u32,
    pub depth: usize,
    pub t: usize,
    pub xi: usize,
    /// Right end of the face that produced the node (`xi` for the root).
    pub right: usize,
    pub gamma: f64,
    /// Face length in time units.
    pub m: f64,
    pub children: Vec<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionTree {
    pub nodes: Vec<Node>,
    pub cutoff: Cutoff,
    pub step: f64,
}

impl RecursionTree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Word of node `i`: the sequence of ordinals from the root.
    pub fn word(&self, mut i: usize) -> Vec<u32> {
        let mut w = Vec::new();
        while let Some(p) = self.nodes[i].parent {
            w.push(self.nodes[i].ordinal);
            i = p;
        }
        w.reverse();
        w
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }
}

/// Builds the recursion with root interval `[0, x]`.
pub fn build_recursion(
    path: &PathSample,
    assign: &UniformAssignment,
    x: usize,
    cutoff: Cutoff,
) -> Result<RecursionTree> {
    build_recursion_from(path, assign, 0, x, cutoff)
}

/// Builds the recursion with root interval `[start, x]`. The root is always
/// expanded (unless the depth cutoff is 0) so that its children are the faces
/// of the minorant on `[start, x]`.
pub fn build_recursion_from(
    path: &PathSample,
    assign: &UniformAssignment,
    start: usize,
    x: usize,
    cutoff: Cutoff,
) -> Result<RecursionTree> {
    let h = path.step();
    if x <= start || x > path.n_cells() {
        return usage(format!("recursion endpoint {x} outside ({start}, {}]", path.n_cells()));
    }
    if !(cutoff.min_len >= 2.0 * h * (1.0 - 1e-12)) {
        return usage("min_len must be at least two grid cells");
    }
    let mut nodes = vec![Node {
        parent: None,
        ordinal: 0,
        depth: 0,
        t: start,
        xi: x,
        right: x,
        gamma: 0.0,
        m: (x - start) as f64 * h,
        children: Vec::new(),
    }];
    let mut next = 0;
    while next < nodes.len() {
        let u = next;
        next += 1;
        let (t, xi, depth, m) = (nodes[u].t, nodes[u].xi, nodes[u].depth, nodes[u].m);
        let expand = depth < cutoff.max_depth && xi > t && (u == 0 || m > cutoff.min_len);
        if !expand {
            continue;
        }
        let g = gcm_unchecked(path, t, xi);
        for (k, f) in g.faces.iter().enumerate() {
            let id = nodes.len();
            nodes.push(Node {
                parent: Some(u),
                ordinal: k as u32 + 1,
                depth: depth + 1,
                t: f.left,
                xi: assign.join(f.left, f.right),
                right: f.right,
                gamma: f.slope,
                m: f.length,
                children: Vec::new(),
            });
            nodes[u].children.push(id);
        }
    }
    Ok(RecursionTree { nodes, cutoff, step: h })
}

/// `d_n(0, x)`: `sqrt(pi/2)` times the sum of `sqrt(m)` over nodes at depth
/// `n`, where leaves above depth `n` count with their own mass.
pub fn dist0(tree: &RecursionTree, n: usize) -> Result<f64> {
    if n > tree.cutoff.max_depth {
        return usage(format!("depth {n} exceeds the cutoff depth {}", tree.cutoff.max_depth));
    }
    let s: f64 = tree.nodes.iter().filter(|u| u.depth == n || (u.depth < n && u.is_leaf())).map(|u| u.m.sqrt()).sum();
    Ok(scale() * s)
}

/// `d_n(0, x)` for every `n` in `0..=max_n` from one tree.
pub fn dist0_levels(tree: &RecursionTree, max_n: usize) -> Vec<f64> {
    let mut level = vec![0.0; max_n + 1];
    for u in &tree.nodes {
        let r = u.m.sqrt();
        if u.depth <= max_n {
            level[u.depth] += r;
            if u.is_leaf() {
                for l in level.iter_mut().skip(u.depth + 1) {
                    *l += r;
                }
            }
        }
    }
    level.iter().map(|s| s * scale()).collect()
}

/// Sum of `sqrt` of face lengths of the minorant on `[a, b]`.
fn face_root_sum(path: &PathSample, a: usize, b: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    gcm_unchecked(path, a, b).faces.iter().map(|f| f.length.sqrt()).sum()
}

/// Pairwise distance by the binary cut decomposition. Only `cutoff.min_len`
/// is used; pairwise distances are always taken at full depth.
pub fn dist_pair(path: &PathSample, assign: &UniformAssignment, x: usize, y: usize, cutoff: Cutoff) -> Result<f64> {
    if x > path.n_cells() || y > path.n_cells() {
        return usage("point outside the grid");
    }
    if x == y {
        return Ok(0.0);
    }
    Ok(scale() * binary_sum(path, assign, x.min(y), x.max(y), cutoff.min_len))
}

/// Splits the pair `(a, b)` at the cut point (first minorant boundary past
/// `a`), keeps the face straddling `a` as a pair problem with `b` replaced by
/// the join point, and sums the faces between the cut point and `b`.
fn binary_sum(path: &PathSample, assign: &UniformAssignment, a: usize, b: usize, min_len: f64) -> f64 {
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0usize)];
    while let Some((a, b, lo)) = stack.pop() {
        let g = gcm_unchecked(path, lo, b);
        let m = g.faces.partition_point(|f| f.right <= a);
        // faces m.. lie in [t_{m-1}, b]; face m straddles a, the rest follow the cut
        for (k, f) in g.faces.iter().enumerate().skip(m) {
            let anchor = if k == m { a } else { f.left };
            if f.length <= min_len {
                total += f.length.sqrt() + face_root_sum(path, f.left, anchor);
                continue;
            }
            let eta = assign.join(f.left, f.right);
            if anchor != eta {
                stack.push((anchor.min(eta), anchor.max(eta), f.left));
            }
        }
    }
    total
}

/// Result of the ancestor-formula distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AncestorDistance {
    pub d: f64,
    pub d0x: f64,
    pub d0y: f64,
    /// `d(0, x ∧ y)`: the mass of leaves shared by both recursions.
    pub d0meet: f64,
}

/// Pairwise distance by `d(0,x) + d(0,y) - 2 d(0, x∧y)`, with the meet read
/// off the leaves common to the two recursions (length cutoff only).
pub fn dist_pair_ancestor(
    path: &PathSample,
    assign: &UniformAssignment,
    x: usize,
    y: usize,
    cutoff: Cutoff,
) -> Result<AncestorDistance> {
    let full = Cutoff::unbounded(cutoff.min_len);
    let leaf_keys = |p: usize| -> Result<Vec<(usize, usize, usize, u64)>> {
        if p == 0 {
            return Ok(Vec::new());
        }
        let t = build_recursion(path, assign, p, full)?;
        let mut keys: Vec<_> = t.leaves().map(|u| (u.t, u.right, u.xi, u.m.sqrt().to_bits())).collect();
        keys.sort_unstable();
        Ok(keys)
    };
    let kx = leaf_keys(x)?;
    let ky = leaf_keys(y)?;
    let sum = |k: &[(usize, usize, usize, u64)]| -> f64 { k.iter().map(|e| f64::from_bits(e.3)).sum() };
    let (mut i, mut j, mut shared) = (0, 0, 0.0);
    while i < kx.len() && j < ky.len() {
        match kx[i].cmp(&ky[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += f64::from_bits(kx[i].3);
                i += 1;
                j += 1;
            }
        }
    }
    let (sx, sy) = (sum(&kx), sum(&ky));
    let c = scale();
    Ok(AncestorDistance { d: c * ((sx - shared) + (sy - shared)), d0x: c * sx, d0y: c * sy, d0meet: c * shared })
}

/// `d(0, y)` for every grid index `y` in `[0, end]`, at full depth with the
/// given length cutoff, in one pass. Uses `d(0,y) = d(0, j(y))` when the last
/// face `[l(y), y]` is expanded and `d(0,y) = d(0,l(y)) + c sqrt(y - l(y))`
/// when it is a leaf.
pub fn root_distances(path: &PathSample, assign: &UniformAssignment, end: usize, min_len: f64) -> Vec<f64> {
    let h = path.step();
    let c = scale();
    let mut d = vec![0.0; end + 1];
    if end == 0 {
        return d;
    }
    let lefts = last_face_lefts(path, 0, end);
    for y in 1..=end {
        let l = lefts[y - 1];
        let len = (y - l) as f64 * h;
        d[y] = if len <= min_len { d[l] + c * len.sqrt() } else { d[assign.join(l, y)] };
    }
    d
}

/// Symmetric matrix of pairwise distances (binary cut decomposition).
pub fn distance_matrix(
    path: &PathSample,
    assign: &UniformAssignment,
    points: &[usize],
    cutoff: Cutoff,
) -> Result<Vec<Vec<f64>>> {
    if points.len() < 2 {
        return usage("distance matrix needs at least two points");
    }
    let k = points.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = dist_pair(path, assign, points[i], points[j], cutoff)?;
            out[i][j] = d;
            out[j][i] = d;
        }
    }
    Ok(out)
}

/// Largest four-point violation over all quadruples, divided by the largest
/// entry. Triangle violations are covered by quadruples with a repeated index.
pub fn four_point_violation(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    let max = m.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    if max == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                worst = worst.max(m[i][l] - m[i][j] - m[j][l]);
                for q in 0..k {
                    let mut s = [m[i][j] + m[l][q], m[i][l] + m[j][q], m[i][q] + m[j][l]];
                    s.sort_by(f64::total_cmp);
                    worst = worst.max(s[2] - s[1]);
                }
            }
        }
    }
    worst / max
}

/// Mass of the ball of radius `r` around 0: the fraction of sampled grid
/// times `y` in `(0, R)` with `d(0, y) <= r`, where `R` is the right end of
/// the component of time 1 of the path as stored. `sample_size == 0` uses
/// every grid point.
pub fn ball_mass(
    path: &PathSample,
    assign: &UniformAssignment,
    r: f64,
    cutoff: Cutoff,
    sample_size: usize,
    key: &RngKey,
) -> Result<f64> {
    Ok(ball_masses(path, assign, &[r], cutoff, sample_size, key)?[0])
}

pub fn ball_masses(
    path: &PathSample,
    assign: &UniformAssignment,
    radii: &[f64],
    cutoff: Cutoff,
    sample_size: usize,
    key: &RngKey,
) -> Result<Vec<f64>> {
    if radii.iter().any(|r| !(*r >= 0.0)) {
        return usage("radius must be nonnegative");
    }
    let Some(big_r) = frag::right_end_after(path, 0.0, 1.0) else {
        return domain("component of time 1 reaches the end of the grid; use a longer horizon");
    };
    if big_r < 2 {
        return domain("component window too small");
    }
    let d = root_distances(path, assign, big_r, cutoff.min_len);
    let ys: Vec<f64> = if sample_size == 0 {
        d[1..big_r].to_vec()
    } else {
        let f = UniformField::new(key);
        (0..sample_size).map(|k| d[1 + ((f.at(k as u64) * (big_r - 1) as f64) as usize).min(big_r - 2)]).collect()
    };
    Ok(radii.iter().map(|&r| ys.iter().filter(|&&v| v <= r).count() as f64 / ys.len() as f64).collect())
}
