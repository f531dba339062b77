//! Shear operators, zero sets, fragments, cut data, merge events and the
//! cut-tree metric.

use crate::cmt::UniformAssignment;
use crate::convexmin::{gcm_unchecked, intercept};
use crate::error::{usage, Result};
use crate::fmt::g17;
use crate::paths::{PathKind, PathSample};

/// `f(t) + lambda t - inf_{s <= t} (f(s) + lambda s)`.
pub fn shear(path: &PathSample, lambda: f64) -> PathSample {
    let h = path.step();
    let mut run = f64::INFINITY;
    let values = path
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = v + lambda * i as f64 * h;
            run = run.min(w);
            w - run
        })
        .collect();
    PathSample { kind: PathKind::Sheared(path.kind.drift() + lambda), horizon: path.horizon, values }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub lambda: f64,
    pub indices: Vec<usize>,
}

impl ZeroSet {
    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Indices where `v + lambda t` reaches a new strict running minimum under the
/// tie-break key `v[i] + lambda t_i + i eps0`. Index 0 is always included.
pub fn zero_set(path: &PathSample, lambda: f64) -> ZeroSet {
    let h = path.step();
    let eps = path.tie_eps();
    let key = |i: usize| path.values[i] + lambda * i as f64 * h;
    let mut indices = vec![0];
    let mut best = 0usize;
    for i in 1..path.values.len() {
        let (ki, kb) = (key(i), key(best));
        if ki < kb && ki + i as f64 * eps < kb + best as f64 * eps {
            indices.push(i);
            best = i;
        }
    }
    ZeroSet { lambda, indices }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fragment {
    /// Grid index of the left end (a zero).
    pub start: usize,
    /// Grid index of the right end (next zero, or the grid end), exclusive.
    pub end: usize,
    pub mass: f64,
}

/// Complement intervals of the zero set at `lambda`, sorted by decreasing
/// mass (ties by position). Pairs of adjacent zeros enclose no fragment.
pub fn fragments(path: &PathSample, lambda: f64) -> Vec<Fragment> {
    fragments_of(path, &zero_set(path, lambda))
}

pub fn fragments_of(path: &PathSample, z: &ZeroSet) -> Vec<Fragment> {
    let h = path.step();
    let n = path.n_cells();
    let mut out = Vec::new();
    for (k, &s) in z.indices.iter().enumerate() {
        let e = z.indices.get(k + 1).copied().unwrap_or(n);
        let next_is_zero = z.indices.get(k + 1) == Some(&(s + 1));
        if e > s && !next_is_zero {
            out.push(Fragment { start: s, end: e, mass: (e - s) as f64 * h });
        }
    }
    out.sort_by(|a, b| b.mass.total_cmp(&a.mass).then(a.start.cmp(&b.start)));
    out
}

/// Total length not covered by cells whose two ends are both zeros.
pub fn complement_length(path: &PathSample, z: &ZeroSet) -> f64 {
    let adjacent = z.indices.windows(2).filter(|w| w[1] == w[0] + 1).count();
    (path.n_cells() - adjacent) as f64 * path.step()
}

/// Fragment containing grid index `i` at `lambda`: `[last zero <= i, next zero > i)`.
pub fn fragment_containing(path: &PathSample, lambda: f64, i: usize) -> (usize, usize) {
    let z = zero_set(path, lambda);
    let k = z.indices.partition_point(|&s| s <= i);
    let start = z.indices[k - 1];
    let end = z.indices.get(k).copied().unwrap_or(path.n_cells());
    (start, end)
}

/// First zero strictly after time `t` at `lambda`, or `None` if the grid ends first.
pub fn right_end_after(path: &PathSample, lambda: f64, t: f64) -> Option<usize> {
    let i = path.index_of(t);
    zero_set(path, lambda).indices.into_iter().find(|&s| s > i)
}

/// Last zero strictly before time `t` at `lambda`.
pub fn left_end_before(path: &PathSample, lambda: f64, t: f64) -> usize {
    let i = path.index_of(t);
    zero_set(path, lambda).indices.into_iter().take_while(|&s| s < i).last().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutData {
    pub tau: f64,
    pub kappa: usize,
    pub eta: usize,
    /// `[t_{m-1}, t_m)`.
    pub left: (usize, usize),
    /// `[t_m, z_m)`; `z_m` is the grid end when the intercept does not exist.
    pub right: (usize, usize),
}

/// Cut time, cut point and join point separating `x` and `y`, read from the
/// minorant on `[0, max(x, y)]`.
pub fn cut_data(path: &PathSample, assign: &UniformAssignment, x: usize, y: usize) -> Result<CutData> {
    if x == y {
        return usage("cut data needs two distinct points");
    }
    let (lo, hi) = (x.min(y), x.max(y));
    if hi > path.n_cells() {
        return usage("point outside the grid");
    }
    let g = gcm_unchecked(path, 0, hi);
    let m = g.faces.partition_point(|f| f.right <= lo);
    let f = g.faces[m];
    let z = intercept(path, f.right, f.slope).unwrap_or(path.n_cells());
    Ok(CutData {
        tau: f.slope,
        kappa: f.right,
        eta: assign.join(f.left, f.right),
        left: (f.left, f.right),
        right: (f.right, z),
    })
}

/// Whether some zero at `lambda` lies in `(min, max]`.
pub fn separated(path: &PathSample, lambda: f64, x: usize, y: usize) -> bool {
    let (lo, hi) = (x.min(y), x.max(y));
    zero_set(path, lambda).indices.iter().any(|&s| s > lo && s <= hi)
}

/// One constant piece of `tau -> |I^tau(zeta)|`: the fragment length on
/// `(tau_lo, tau_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderStep {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub length: f64,
}

/// Fragment length ladder of `zeta` under `lambda = -tau`, `tau >= 0`, up to
/// the parameter at which the fragment is the single cell `[zeta, zeta+1)`.
pub fn fragment_ladder(path: &PathSample, zeta: usize) -> Vec<LadderStep> {
    let n = path.n_cells();
    let h = path.step();
    let v = &path.values;
    // anchors t_0 < ... < t_K = zeta with slope windows (gamma_{i-1}, gamma_i]
    let (anchors, gammas): (Vec<usize>, Vec<f64>) = if zeta == 0 {
        (vec![0], vec![])
    } else {
        let g = gcm_unchecked(path, 0, zeta);
        (g.boundaries(), g.faces.iter().map(|f| f.slope).collect())
    };
    let mut out = Vec::new();
    for (i, &a) in anchors.iter().enumerate() {
        let lo = if i == 0 { 0.0f64 } else { gammas[i - 1].max(0.0) };
        let hi = gammas.get(i).copied().unwrap_or(f64::INFINITY);
        if hi <= lo {
            continue;
        }
        // records of sigma(s) = (v[s] - v[a]) / ((s - a) h) over s > zeta
        let mut records: Vec<(usize, f64)> = Vec::new();
        let mut cur = f64::INFINITY;
        for s in zeta + 1..=n {
            let sig = (v[s] - v[a]) / ((s - a) as f64 * h);
            if sig < cur {
                cur = sig;
                records.push((s, sig));
            }
        }
        // sup(tau) = first record with sigma < tau, grid end if none; the
        // piece where the fragment is the cell [zeta, zeta+1) is not integrated
        let mut upper = hi;
        for &(s, sig) in &records {
            let seg_lo = sig.max(lo);
            if upper > seg_lo && !(a == zeta && s == zeta + 1) {
                out.push(LadderStep { tau_lo: seg_lo, tau_hi: upper, length: (s - a) as f64 * h });
            }
            upper = upper.min(sig);
            if upper <= lo {
                break;
            }
        }
        if upper > lo {
            out.push(LadderStep { tau_lo: lo, tau_hi: upper, length: (n - a) as f64 * h });
        }
    }
    out.sort_by(|p, q| p.tau_lo.total_cmp(&q.tau_lo));
    out
}

/// `int_0^tau |I^s(zeta)| ds` from a ladder.
pub fn ladder_integral(ladder: &[LadderStep], tau: f64) -> f64 {
    ladder
        .iter()
        .map(|s| {
            let hi = s.tau_hi.min(tau);
            if hi > s.tau_lo {
                (hi - s.tau_lo) * s.length
            } else {
                0.0
            }
        })
        .sum()
}

/// Cut-tree distances between the root (index 0) and the points `zetas`
/// (indices 1..=k), integrated exactly over the fragment ladders.
pub fn cut_tree_delta(path: &PathSample, zetas: &[usize]) -> Result<Vec<Vec<f64>>> {
    if zetas.is_empty() {
        return usage("cut tree needs at least one point");
    }
    let n = path.n_cells();
    if zetas.iter().any(|&z| z == 0 || z >= n) {
        return usage("cut-tree points must be interior grid indices");
    }
    let k = zetas.len();
    let ladders: Vec<Vec<LadderStep>> = zetas.iter().map(|&z| fragment_ladder(path, z)).collect();
    let total: Vec<f64> = ladders.iter().map(|l| ladder_integral(l, f64::INFINITY)).collect();
    let mut m = vec![vec![0.0; k + 1]; k + 1];
    for i in 0..k {
        m[0][i + 1] = total[i];
        m[i + 1][0] = total[i];
    }
    let assign = UniformAssignment::constant(0.0);
    for i in 0..k {
        for j in i + 1..k {
            if zetas[i] == zetas[j] {
                continue;
            }
            let tau = cut_data(path, &assign, zetas[i], zetas[j])?.tau.max(0.0);
            let shared = ladder_integral(&ladders[i], tau);
            let d = total[i] + total[j] - 2.0 * shared;
            m[i + 1][j + 1] = d;
            m[j + 1][i + 1] = d;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEvent {
    pub l: usize,
    pub t: usize,
    pub r: usize,
    pub lambda: f64,
}

/// Merges of `[l, t)` and `[t, r)` as the drift parameter increases: one event
/// per strict local minimum `t`, with `l` the left end of the last minorant
/// face of `[0, t]`, slope `s`, `r` its intercept and parameter `drift - s`.
/// Keeps events with both gaps at least `min_len` and parameter in the window;
/// events whose intercept lies beyond the grid are dropped.
pub fn merges(path: &PathSample, lambda_lo: f64, lambda_hi: f64, min_len: f64) -> Result<Vec<MergeEvent>> {
    let h = path.step();
    if min_len < 4.0 * h * (1.0 - 1e-12) {
        return usage("min_len must be at least four grid cells");
    }
    let n = path.n_cells();
    let v = &path.values;
    let lefts = crate::convexmin::last_face_lefts(path, 0, n);
    let drift = path.kind.drift();
    let mut out = Vec::new();
    for t in 1..n {
        if !(v[t] < v[t - 1] && v[t] < v[t + 1]) {
            continue;
        }
        let l = lefts[t - 1];
        if ((t - l) as f64) * h < min_len {
            continue;
        }
        let s = (v[t] - v[l]) / ((t - l) as f64 * h);
        let lambda = drift - s;
        if lambda < lambda_lo || lambda > lambda_hi {
            continue;
        }
        let Some(r) = intercept(path, t, s) else { continue };
        if ((r - t) as f64) * h < min_len {
            continue;
        }
        out.push(MergeEvent { l, t, r, lambda });
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.t.cmp(&b.t)));
    Ok(out)
}

/// CSV `l,t,r,lambda` in time units.
pub fn merges_csv(path: &PathSample, events: &[MergeEvent]) -> String {
    let mut s = String::from("l,t,r,lambda\n");
    for e in events {
        s.push_str(&format!(
            "{},{},{},{}\n",
            g17(path.time(e.l)),
            g17(path.time(e.t)),
            g17(path.time(e.r)),
            g17(e.lambda)
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmt::four_point_violation;
    use crate::paths::{sample_excursion, sample_parabolic};
    use crate::rng::RngKey;

    fn triangle(n: usize) -> PathSample {
        let vals: Vec<f64> = (0..=n).map(|i| (i.min(n - i)) as f64 / n as f64).collect();
        PathSample { kind: PathKind::Excursion, horizon: 1.0, values: vals }
    }

    fn excursion(n: usize, i: u64) -> PathSample {
        sample_excursion(n, &RngKey::new(6, "excursion", i)).unwrap()
    }

    #[test]
    fn shear_closed_forms() {
        let n = 16;
        let id =
            PathSample { kind: PathKind::Motion, horizon: 1.0, values: (0..=n).map(|i| i as f64 / n as f64).collect() };
        assert!(shear(&id, -2.0).values.iter().all(|&v| v == 0.0));
        let e = excursion(256, 0);
        assert_eq!(shear(&e, 0.0).values, e.values);
        let p = triangle(256);
        let tau = 0.6;
        let s = shear(&p, -tau);
        let cut = 1.0 / (1.0 + tau);
        for (i, &x) in s.values.iter().enumerate() {
            let t = p.time(i);
            assert!(x >= 0.0);
            if t < cut - p.step() && i > 0 {
                assert!(x > 0.0, "{i}");
            }
            if t > cut + p.step() {
                assert_eq!(x, 0.0, "{i}");
            }
        }
    }

    #[test]
    fn excursion_single_fragment_at_zero() {
        let e = excursion(1024, 1);
        let f = fragments(&e, 0.0);
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].start, f[0].end), (0, 1024));
        assert_eq!(f[0].mass, 1.0);
    }

    #[test]
    fn triangle_leading_fragment() {
        let p = triangle(1024);
        let f = fragments(&p, -1.0);
        assert!((f[0].mass - 0.5).abs() <= p.step());
        assert_eq!(f[0].start, 0);
        let z = zero_set(&p, -1.0);
        assert_eq!(complement_length(&p, &z), f.iter().map(|x| x.mass).sum::<f64>());
    }

    #[test]
    fn nesting_and_mass_over_sweep() {
        for i in 0..10 {
            let e = excursion(512, 10 + i);
            let taus: Vec<f64> = (0..40).map(|k| k as f64 * 0.25).collect();
            let zs: Vec<ZeroSet> = taus.iter().map(|&t| zero_set(&e, -t)).collect();
            for w in zs.windows(2) {
                assert!(w[0].indices.iter().all(|&s| w[1].contains(s)));
            }
            for z in &zs {
                let total: f64 = fragments_of(&e, z).iter().map(|f| f.mass).sum();
                assert_eq!(total, complement_length(&e, z));
            }
        }
    }

    #[test]
    fn composition_property() {
        let e = excursion(512, 3);
        for &l in &[-3.0, -1.0, 0.5] {
            let s = shear(&e, l);
            let s2 = shear(&e, l - 0.7);
            for i in 0..=512 {
                if s.values[i] == 0.0 {
                    assert_eq!(s2.values[i], 0.0);
                }
            }
        }
    }

    #[test]
    fn cut_data_first_face() {
        let e = excursion(1024, 4);
        let a = UniformAssignment::new(4);
        let g = crate::convexmin::gcm(&e, 0, 900).unwrap();
        let t1 = g.faces[0].right;
        let c = cut_data(&e, &a, t1 / 2, 900).unwrap();
        if t1 / 2 > 0 {
            assert_eq!(c.kappa, t1);
            assert_eq!(c.tau, g.faces[0].slope);
            assert!(c.eta < c.kappa);
        }
    }

    #[test]
    fn cut_data_triangle() {
        // the minorant of the concave triangle on [0, y] is the chord to y
        let p = triangle(256);
        let c = cut_data(&p, &UniformAssignment::constant(0.0), 3, 200).unwrap();
        assert_eq!(c.kappa, 200);
        assert_eq!(c.tau, p.values[200] / p.time(200));
        assert_eq!(c.eta, 1);
    }

    #[test]
    fn cut_data_sweep_oracle() {
        let mut checked = 0;
        for i in 0..200 {
            let e = excursion(512, 100 + i);
            let a = UniformAssignment::new(i);
            let f = crate::rng::UniformField::new(&RngKey::new(1, "pair", i));
            let x = 1 + (f.at(0) * 510.0) as usize;
            let y = 1 + (f.at(1) * 510.0) as usize;
            if x == y {
                continue;
            }
            let c = cut_data(&e, &a, x, y).unwrap();
            let eps = 1e-9 * c.tau.abs().max(1.0);
            assert!(separated(&e, -(c.tau + eps), x, y));
            assert!(!separated(&e, -(c.tau - eps), x, y));
            assert!(c.kappa > x.min(y) && c.kappa <= x.max(y));
            checked += 1;
        }
        assert!(checked > 190);
    }

    #[test]
    fn ladder_matches_zero_sets() {
        let e = excursion(256, 7);
        let zeta = 140;
        let ladder = fragment_ladder(&e, zeta);
        for st in &ladder {
            let tau = 0.5 * (st.tau_lo + st.tau_hi);
            let (s, t) = fragment_containing(&e, -tau, zeta);
            assert_eq!((t - s) as f64 * e.step(), st.length, "tau {tau}");
        }
        // past the ladder the fragment is the single cell at zeta
        let end = ladder.iter().map(|s| s.tau_hi).fold(0.0, f64::max);
        assert_eq!(fragment_containing(&e, -(end + 1e-9), zeta), (zeta, zeta + 1));
    }

    #[test]
    fn delta_triangle_descending_edge() {
        // the minorant on [0, zeta] is one chord of slope 1/3; below it the
        // fragment is [0, first s with (1 - s)/s < tau), above it the
        // fragment is already the cell at zeta
        let n = 64;
        let p = triangle(n);
        let zeta = 48;
        let m = cut_tree_delta(&p, &[zeta]).unwrap();
        let sigma = |s: usize| (n - s) as f64 / s as f64;
        let hand: f64 = (zeta + 1..=n).map(|s| s as f64 / n as f64 * (sigma(s - 1) - sigma(s))).sum();
        assert!((m[0][1] - hand).abs() < 1e-12, "{} vs {hand}", m[0][1]);
        assert!((m[0][1] - (4.0f64 / 3.0).ln()).abs() < 2.0 / n as f64);
        assert_eq!(m[1][1], 0.0);
    }

    #[test]
    fn delta_is_tree_metric() {
        for i in 0..30 {
            let e = excursion(512, 300 + i);
            let f = crate::rng::UniformField::new(&RngKey::new(2, "zeta", i));
            let mut z: Vec<usize> = (0..6).map(|k| 1 + (f.at(k) * 510.0) as usize).collect();
            z.sort_unstable();
            z.dedup();
            let m = cut_tree_delta(&e, &z).unwrap();
            for a in 0..m.len() {
                assert_eq!(m[a][a], 0.0);
                for b in 0..m.len() {
                    assert_eq!(m[a][b], m[b][a]);
                }
            }
            assert!(four_point_violation(&m) < 1e-9, "{}", four_point_violation(&m));
        }
    }

    #[test]
    fn single_valley_event() {
        // 0 -> -1 at t=0.25, up to +1 at t=0.5, down to -6 at t=1
        let n = 64;
        let vals: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                if t <= 0.25 {
                    -4.0 * t
                } else if t <= 0.5 {
                    -1.0 + 8.0 * (t - 0.25)
                } else {
                    1.0 - 14.0 * (t - 0.5)
                }
            })
            .collect();
        let p = PathSample { kind: PathKind::Parabolic(0.0), horizon: 1.0, values: vals };
        let ev = merges(&p, -100.0, 100.0, 4.0 * p.step()).unwrap();
        assert_eq!(ev.len(), 1);
        let e = ev[0];
        assert_eq!((e.l, e.t), (0, 16));
        assert_eq!(e.lambda, 4.0);
        // -1 - 4 (s - 0.25) = 1 - 14 (s - 0.5) at s = 0.8, first grid point 52/64
        assert_eq!(e.r, 52);
    }

    #[test]
    fn merges_nested_and_consistent_with_fragments() {
        for i in 0..6 {
            let p = sample_parabolic(0.0, 8.0, 2048, &RngKey::new(3, "parabolic", i)).unwrap();
            let ev = merges(&p, -4.0, 4.0, 8.0 * p.step()).unwrap();
            assert!(ev.windows(2).all(|w| w[0].lambda <= w[1].lambda));
            for a in &ev {
                for b in &ev {
                    let disjoint = a.r <= b.l || b.r <= a.l;
                    let a_in_b = b.l <= a.l && a.r <= b.r;
                    let b_in_a = a.l <= b.l && b.r <= a.r;
                    assert!(disjoint || a_in_b || b_in_a, "{a:?} {b:?}");
                }
            }
            for e in &ev {
                let eps = 1e-9;
                let before = fragment_containing(&p, e.lambda - eps, e.t);
                let left = fragment_containing(&p, e.lambda - eps, e.t - 1);
                assert_eq!(before, (e.t, e.r));
                assert_eq!(left, (e.l, e.t));
                let after = fragment_containing(&p, e.lambda + eps, e.t);
                assert!(after.0 < e.t);
            }
        }
    }
}
