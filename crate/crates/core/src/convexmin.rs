//! Greatest convex minorants of grid paths.
//!
//! Points are `(i, v[i])` with integer abscissae, so orientation tests are
//! exact up to the rounding of two products. Collinear contact points are kept
//! as vertices but do not split faces.

use crate::error::{usage, Result};
use crate::paths::PathSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub left: usize,
    pub right: usize,
    pub slope: f64,
    /// Length in time units.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexMinorant {
    pub a: usize,
    pub b: usize,
    /// Ascending contact indices; the first is `a`, the last is `b`.
    pub vertices: Vec<usize>,
    pub faces: Vec<Face>,
    pub step: f64,
}

impl ConvexMinorant {
    /// Vertices without the right endpoint `b`.
    pub fn open_vertices(&self) -> &[usize] {
        &self.vertices[..self.vertices.len() - 1]
    }

    /// Face boundaries: left ends of all faces followed by `b`.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.faces.iter().map(|f| f.left).collect();
        out.push(self.b);
        out
    }

    /// Index of the face whose half-open span `[left, right)` contains `i`;
    /// `b` maps to the last face.
    pub fn face_index_of(&self, i: usize) -> usize {
        let k = self.faces.partition_point(|f| f.right <= i);
        k.min(self.faces.len() - 1)
    }

    /// Minorant value at grid index `i` in `[a, b]`.
    pub fn value_at(&self, path: &PathSample, i: usize) -> f64 {
        let f = self.faces[self.face_index_of(i)];
        path.values[f.left] + f.slope * (i - f.left) as f64 * self.step
    }
}

/// Twice the signed area of the triangle `(i, v_i), (j, v_j), (k, v_k)`;
/// positive when `k` lies above the line through `i` and `j` (for `i < j`).
#[inline]
pub fn cross(v: &[f64], i: usize, j: usize, k: usize) -> f64 {
    let (i_, j_, k_) = (i as f64, j as f64, k as f64);
    (j_ - i_) * (v[k] - v[i]) - (v[j] - v[i]) * (k_ - i_)
}

fn faces_from_contacts(path: &PathSample, contacts: &[usize]) -> Vec<Face> {
    let v = &path.values;
    let h = path.step();
    let mut faces = Vec::new();
    let mut left = contacts[0];
    for w in 1..contacts.len() {
        let mid = contacts[w];
        let last = w + 1 == contacts.len();
        if !last && cross(v, left, mid, contacts[w + 1]) == 0.0 {
            continue;
        }
        let len = (mid - left) as f64 * h;
        faces.push(Face { left, right: mid, slope: (v[mid] - v[left]) / len, length: len });
        left = mid;
    }
    faces
}

fn check_range(path: &PathSample, a: usize, b: usize) -> Result<()> {
    if a >= b || b > path.n_cells() {
        return usage(format!("invalid hull range [{a}, {b}] on a grid of {} cells", path.n_cells()));
    }
    Ok(())
}

/// Lower convex hull of the path on `[a, b]` by the monotone chain.
pub fn gcm(path: &PathSample, a: usize, b: usize) -> Result<ConvexMinorant> {
    check_range(path, a, b)?;
    Ok(gcm_unchecked(path, a, b))
}

pub(crate) fn gcm_unchecked(path: &PathSample, a: usize, b: usize) -> ConvexMinorant {
    let v = &path.values;
    let mut stack: Vec<usize> = Vec::with_capacity(64);
    for c in a..=b {
        while stack.len() >= 2 && cross(v, stack[stack.len() - 2], stack[stack.len() - 1], c) < 0.0 {
            stack.pop();
        }
        stack.push(c);
    }
    let faces = faces_from_contacts(path, &stack);
    ConvexMinorant { a, b, vertices: stack, faces, step: path.step() }
}

/// Chord oracle: `t` is a contact point iff some line through `t` and another
/// grid point lies weakly below the whole path on `[a, b]`. O(n^3).
pub fn gcm_bruteforce(path: &PathSample, a: usize, b: usize) -> Result<ConvexMinorant> {
    check_range(path, a, b)?;
    if b - a > 64 {
        return usage(format!("brute-force hull limited to 64 cells, got {}", b - a));
    }
    let v = &path.values;
    let supports = |i: usize, j: usize| (a..=b).all(|k| cross(v, i, j, k) >= 0.0);
    let contacts: Vec<usize> = (a..=b)
        .filter(|&t| {
            (a..=b).any(|j| match j.cmp(&t) {
                std::cmp::Ordering::Greater => supports(t, j),
                std::cmp::Ordering::Less => supports(j, t),
                std::cmp::Ordering::Equal => false,
            })
        })
        .collect();
    let faces = faces_from_contacts(path, &contacts);
    Ok(ConvexMinorant { a, b, vertices: contacts, faces, step: path.step() })
}

/// First grid index `s > t` with `v[s] <= v[t] + slope (s - t) h`, searching
/// up to the end of the grid. `None` plays the role of an infinite intercept.
pub fn intercept(path: &PathSample, t: usize, slope: f64) -> Option<usize> {
    intercept_within(path, t, slope, path.n_cells())
}

/// As [`intercept`], searching only up to index `end`.
pub fn intercept_within(path: &PathSample, t: usize, slope: f64, end: usize) -> Option<usize> {
    let v = &path.values;
    let h = path.step();
    let end = end.min(path.n_cells());
    (t + 1..=end).find(|&s| v[s] <= v[t] + slope * (s - t) as f64 * h)
}

/// Left end of the last face of the minorant on `[a, y]`, for every `y` in
/// `(a, b]`; entry `y - a - 1` of the result. One monotone-chain pass.
pub fn last_face_lefts(path: &PathSample, a: usize, b: usize) -> Vec<usize> {
    let v = &path.values;
    let mut stack: Vec<usize> = Vec::with_capacity(64);
    let mut out = Vec::with_capacity(b - a);
    stack.push(a);
    for c in a + 1..=b {
        while stack.len() >= 2 && cross(v, stack[stack.len() - 2], stack[stack.len() - 1], c) <= 0.0 {
            stack.pop();
        }
        out.push(*stack.last().expect("stack holds a"));
        stack.push(c);
    }
    out
}
