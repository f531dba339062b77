//! The registered suites. Each replica draws from keys derived from
//! `(seed, "suite/<name>", replica)`; results are collected in replica order
//! and reduced sequentially, so reports do not depend on the thread count.

use std::f64::consts::PI;

use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use super::report::{Bound, StatReport};
use super::stats::{ks_one_sample, ks_two_sample, mean_se};
use crate::cmt::{ball_masses, Cutoff, UniformAssignment};
use crate::cmt::{build_recursion, dist0, dist0_levels, four_point_violation, root_distances, scale};
use crate::convexmin::{gcm_unchecked, intercept};
use crate::discrete::{
    cyclic_points, graph_distance, graph_distances_from, merge_record, prim_order, prim_prefix, rank_edges,
    representation_forest, zeros_from_weights, UnionFind, Weights,
};
use crate::error::{domain, Error, Result};
use crate::frag::{self, cut_tree_delta, fragments_of, zero_set};
use crate::paths::{sample_excursion, sample_parabolic, PathKind, PathSample};
use crate::rng::{RngKey, UniformField};

/// Grid of the excursion suites.
pub const EXCURSION_CELLS: usize = 1 << 14;
/// Parabolic paths use this many cells per unit time unless stated otherwise.
pub const PARABOLIC_CELLS_PER_UNIT: usize = 1 << 12;

fn replicas<T, F>(reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..reps as u64).into_par_iter().map(f).collect()
}

fn rep_key(seed: u64, suite: &str, i: u64) -> RngKey {
    RngKey::new(seed, format!("suite/{suite}"), i)
}

fn sub(key: &RngKey, tag: &str) -> RngKey {
    RngKey::new(key.digest(), tag, 0)
}

/// Uniform grid index in `[1, n - 1]`.
fn interior_index(u: f64, n: usize) -> usize {
    1 + ((u * (n - 1) as f64) as usize).min(n - 2)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

/// Two-sample KS bound: the larger of `floor` and about four standard
/// deviations of the null statistic at these sample sizes.
fn ks2_bound(floor: f64, m: usize, n: usize) -> Bound {
    Bound::at_most(floor.max(2.0 * ((m + n) as f64 / (m * n) as f64).sqrt()))
}

/// Smallest power of two at least `t` (as a horizon).
fn pow2_horizon(t: f64) -> f64 {
    let mut h = 1.0;
    while h < t {
        h *= 2.0;
    }
    h
}

fn parabolic_grid(lambda: f64, min_horizon: f64, per_unit: usize, key: &RngKey) -> Result<PathSample> {
    let t = pow2_horizon(min_horizon);
    sample_parabolic(lambda, t, (t as usize) * per_unit, key)
}

// ---------------------------------------------------------------- dirichlet

/// `(t1, t2, z1)` in time units from the minorant of `e` on `[0, v]`. On the
/// grid the minorant may have a single face, in which case `t1 = v`, and
/// `t2 = v` whenever there is no second face.
fn first_split(e: &PathSample, v: usize) -> (f64, f64, f64) {
    let g = gcm_unchecked(e, 0, v);
    let f = g.faces[0];
    let t2 = g.faces.get(1).map_or(v, |f| f.right);
    let z1 = intercept(e, f.right, f.slope).unwrap_or(e.n_cells());
    (e.time(f.right), e.time(t2), e.time(z1))
}

fn split_samples(suite: &str, seed: u64, reps: usize) -> Result<Vec<(f64, f64, f64)>> {
    replicas(reps, |i| {
        let k = rep_key(seed, suite, i);
        let e = sample_excursion(EXCURSION_CELLS, &sub(&k, "path"))?;
        let v = interior_index(sub(&k, "v").uniform_at(0), EXCURSION_CELLS);
        Ok(first_split(&e, v))
    })
}

/// `n` draws of a Dirichlet(1/2, 1/2, 1/2) vector by normalized gammas.
fn dirichlet_half(key: &RngKey, n: usize) -> Vec<[f64; 3]> {
    let g = Gamma::new(0.5, 1.0).expect("valid gamma");
    let mut rng = key.stream();
    (0..n)
        .map(|_| {
            let x = [g.sample(&mut rng), g.sample(&mut rng), g.sample(&mut rng)];
            let s = x[0] + x[1] + x[2];
            [x[0] / s, x[1] / s, x[2] / s]
        })
        .collect()
}

/// CDF of Beta(1/2, 1), the marginal of one Dirichlet(1/2, 1/2, 1/2) coordinate.
pub fn beta_half_one_cdf(x: f64) -> f64 {
    x.clamp(0.0, 1.0).sqrt()
}

pub fn dirichlet(seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("dirichlet", seed, reps, false);
    let s = split_samples("dirichlet", seed, reps)?;
    let t1: Vec<f64> = s.iter().map(|x| x.0).collect();
    let gap: Vec<f64> = s.iter().map(|x| x.2 - x.0).collect();
    let tail: Vec<f64> = s.iter().map(|x| 1.0 - x.2).collect();
    let third = 1.0 / 3.0;
    r.gate("ks_t1", ks_one_sample(&t1, beta_half_one_cdf)?, Bound::at_most(0.02), 0.0078);
    r.gate("mean_t1", mean(&t1), Bound::around(third, 0.005), 0.3340);
    r.gate("ks_gap", ks_one_sample(&gap, beta_half_one_cdf)?, Bound::at_most(0.02), 0.0078);
    r.gate("mean_gap", mean(&gap), Bound::around(third, 0.005), 0.3316);
    r.gate("ks_tail", ks_one_sample(&tail, beta_half_one_cdf)?, Bound::at_most(0.02), 0.0064);
    r.gate("mean_tail", mean(&tail), Bound::around(third, 0.005), 0.3344);
    // the reference CDF against direct Dirichlet draws
    let direct = dirichlet_half(&RngKey::new(seed, "suite/dirichlet/direct", 0), reps);
    let d1: Vec<f64> = direct.iter().map(|x| x[0]).collect();
    r.gate("ks_reference", ks_one_sample(&d1, beta_half_one_cdf)?, Bound::at_most(0.02), 0.0027);
    r.finish();
    Ok(r)
}

// --------------------------------------------------------------- stickbreak

/// Stick-breaking comparisons are left-censored at this many cells: the
/// continuum laws put mass of order `sqrt(h) log(1/h)` below a few cells,
/// where grid vertices cannot resolve them.
pub const STICKBREAK_CENSOR_CELLS: f64 = 16.0;

pub fn stickbreak(seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("stickbreak", seed, reps, false);
    let floor = STICKBREAK_CENSOR_CELLS / EXCURSION_CELLS as f64;
    let censor = |xs: Vec<f64>| -> Vec<f64> { xs.into_iter().map(|x| x.max(floor)).collect() };
    let s = split_samples("stickbreak", seed, reps)?;
    let t1 = censor(s.iter().map(|x| x.0).collect());
    let gap2 = censor(s.iter().map(|x| x.1 - x.0).collect());
    let ratio = censor(s.iter().map(|x| (x.1 - x.0) / (1.0 - x.0)).collect());
    // product construction: t1 = D1[0], t2 - t1 = D2[0] * D1[1]
    let d1 = dirichlet_half(&RngKey::new(seed, "suite/stickbreak/first", 0), reps);
    let d2 = dirichlet_half(&RngKey::new(seed, "suite/stickbreak/second", 0), reps);
    let ref_t1 = censor(d1.iter().map(|x| x[0]).collect());
    let ref_gap2 = censor(d1.iter().zip(&d2).map(|(a, b)| b[0] * a[1]).collect());
    let ref_ratio = censor(d1.iter().zip(&d2).map(|(a, b)| b[0] * a[1] / (1.0 - a[0])).collect());
    let b = ks2_bound(0.02, reps, reps);
    r.gate("ks_t1", ks_two_sample(&t1, &ref_t1)?, b, 0.0077);
    r.gate("ks_gap2", ks_two_sample(&gap2, &ref_gap2)?, b, 0.0150);
    r.gate("ks_gap2_ratio", ks_two_sample(&ratio, &ref_ratio)?, b, 0.0164);
    r.stat("mean_gap2", mean(&gap2));
    r.stat("mean_gap2_reference", mean(&ref_gap2));
    r.finish();
    Ok(r)
}

// --------------------------------------------------------------- martingale

/// Mean of `d_n(0, V)`, `V` uniform: `sqrt(pi/2) E sqrt(V)` at `n = 0` and
/// `sqrt(pi/2)` for every `n >= 1`.
pub const MEAN_D0: f64 = 0.835_542_758_210_333_5;

pub fn martingale(seed: u64, reps: usize) -> Result<StatReport> {
    const LEVELS: usize = 6;
    let mut r = StatReport::new("martingale", seed, reps, false);
    let rows = replicas(reps, |i| {
        let k = rep_key(seed, "martingale", i);
        let e = sample_excursion(EXCURSION_CELLS, &sub(&k, "path"))?;
        let v = interior_index(sub(&k, "v").uniform_at(0), EXCURSION_CELLS);
        let assign = UniformAssignment::from_key(&sub(&k, "assoc"));
        let cut = Cutoff { max_depth: LEVELS, min_len: 4.0 * e.step() };
        let tree = build_recursion(&e, &assign, v, cut)?;
        Ok(dist0_levels(&tree, LEVELS))
    })?;
    let mut worst = 0.0f64;
    for n in 0..=LEVELS {
        r.stat(&format!("mean_d{n}"), mean(&column(&rows, n)));
    }
    for n in 2..=LEVELS {
        let diff: Vec<f64> = rows.iter().map(|x| x[n] - x[1]).collect();
        let (m, se) = mean_se(&diff);
        let z = if se > 0.0 { m / se } else { 0.0 };
        r.stat(&format!("z_d{n}_minus_d1"), z);
        worst = worst.max(z.abs());
    }
    r.gate("max_flatness_z", worst, Bound::at_most(3.0), 149.7);
    let (m0, se0) = mean_se(&column(&rows, 0));
    r.gate("d0_z", (m0 - MEAN_D0) / se0, Bound::around(0.0, 3.5), -0.64);
    r.advise("mean_d1", mean(&column(&rows, 1)), Bound::around(MEAN_D0, 0.03));
    r.stat("limit_mean_dn", scale());
    r.finish();
    Ok(r)
}

// ----------------------------------------------------------------- rayleigh

pub fn rayleigh_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-0.5 * x * x).exp()
    }
}

pub fn rayleigh(seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("rayleigh", seed, reps, false);
    let d = replicas(reps, |i| {
        let k = rep_key(seed, "rayleigh", i);
        let e = sample_excursion(EXCURSION_CELLS, &sub(&k, "path"))?;
        let v = interior_index(sub(&k, "v").uniform_at(0), EXCURSION_CELLS);
        let assign = UniformAssignment::from_key(&sub(&k, "assoc"));
        let cut = Cutoff::default_for(&e);
        let tree = build_recursion(&e, &assign, v, cut)?;
        dist0(&tree, cut.max_depth)
    })?;
    let m = mean(&d);
    let c = scale() / m;
    let scaled: Vec<f64> = d.iter().map(|x| x * c).collect();
    r.stat("mean_d", m);
    let m2 = d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64;
    r.stat("moment_ratio", m2 / (m * m));
    r.stat("moment_ratio_rayleigh", 4.0 / PI);
    r.gate("ks_rayleigh", ks_one_sample(&scaled, rayleigh_cdf)?, Bound::at_most(0.03), 0.0020);
    r.finish();
    Ok(r)
}

// ----------------------------------------------------------------- fragment

/// Cells of the fragment suite paths.
pub const FRAGMENT_CELLS: usize = 1 << 10;
const TAU_SWEEP: [f64; 8] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// `min(t, 1 - t)` on `n` cells.
pub fn triangle_excursion(n: usize) -> PathSample {
    let values = (0..=n).map(|i| i.min(n - i) as f64 / n as f64).collect();
    PathSample { kind: PathKind::Excursion, horizon: 1.0, values }
}

#[derive(Debug, Default, Clone, Copy)]
struct SweepCheck {
    mass: usize,
    nesting: usize,
    tau0: usize,
}

fn sweep_check(p: &PathSample) -> SweepCheck {
    let n = p.n_cells();
    let mut c = SweepCheck::default();
    let mut prev: Option<(frag::ZeroSet, Vec<frag::Fragment>)> = None;
    for &tau in &TAU_SWEEP {
        let z = zero_set(p, -tau);
        let fr = fragments_of(p, &z);
        let adjacent = z.indices.windows(2).filter(|w| w[1] == w[0] + 1).count();
        let cells: usize = fr.iter().map(|f| f.end - f.start).sum();
        if cells != n - adjacent {
            c.mass += 1;
        }
        if tau == 0.0 && (fr.len() != 1 || fr[0].start != 0 || fr[0].end != n) {
            c.tau0 += 1;
        }
        if let Some((pz, pf)) = &prev {
            if pz.indices.iter().any(|&s| !z.contains(s)) {
                c.nesting += 1;
            }
            for f in &fr {
                if !pf.iter().any(|g| g.start <= f.start && f.end <= g.end) {
                    c.nesting += 1;
                }
            }
        }
        prev = Some((z, fr));
    }
    c
}

/// Largest deviation of the triangle's leading fragment from its closed
/// form, in cells: `[0, 1/(1+tau))` for `tau <= 1`; for `tau > 1` the sheared
/// triangle is nonincreasing and every cell is a pair of zeros.
pub fn triangle_fragment_error(n: usize) -> f64 {
    let p = triangle_excursion(n);
    let h = p.step();
    TAU_SWEEP
        .iter()
        .map(|&tau| {
            let fr = frag::fragments(&p, -tau);
            if tau > 1.0 {
                return if fr.is_empty() { 0.0 } else { f64::INFINITY };
            }
            let f = fr[0];
            (f.start as f64 + (f.mass - 1.0 / (1.0 + tau)).abs() / h).max(0.0)
        })
        .fold(0.0, f64::max)
}

pub fn fragment(seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("fragment", seed, reps, false);
    let checks = replicas(reps, |i| {
        let k = rep_key(seed, "fragment", i);
        Ok(sweep_check(&sample_excursion(FRAGMENT_CELLS, &sub(&k, "path"))?))
    })?;
    let tri = sweep_check(&triangle_excursion(FRAGMENT_CELLS));
    let sum = |f: fn(&SweepCheck) -> usize| (checks.iter().map(f).sum::<usize>() + f(&tri)) as f64;
    let zero = Bound::new(0.0, 0.0);
    r.gate("mass_violations", sum(|c| c.mass), zero, 0.0);
    r.gate("nesting_violations", sum(|c| c.nesting), zero, 0.0);
    r.gate("tau0_violations", sum(|c| c.tau0), zero, 0.0);
    r.gate("triangle_error_cells", triangle_fragment_error(FRAGMENT_CELLS), Bound::new(0.0, 1.0), 1.0);
    r.finish();
    Ok(r)
}

// ----------------------------------------------------------------- cuttree

pub const CUTTREE_CELLS: usize = 1 << 10;

/// `k` distinct interior indices drawn from `key`.
fn distinct_points(key: &RngKey, n: usize, k: usize) -> Vec<usize> {
    let f = UniformField::new(key);
    let mut out = Vec::with_capacity(k);
    let mut c = 0;
    while out.len() < k {
        let x = interior_index(f.at(c), n);
        c += 1;
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

pub fn cuttree(seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("cuttree", seed, reps, false);
    let rows = replicas(reps, |i| {
        let k = rep_key(seed, "cuttree", i);
        let e = sample_excursion(CUTTREE_CELLS, &sub(&k, "path"))?;
        let pts = distinct_points(&sub(&k, "points"), CUTTREE_CELLS, 2 + (i as usize % 7));
        let m = cut_tree_delta(&e, &pts)?;
        let mut asym = 0usize;
        for a in 0..m.len() {
            asym += usize::from(m[a][a] != 0.0);
            for b in 0..m.len() {
                asym += usize::from(m[a][b] != m[b][a] || !m[a][b].is_finite() || m[a][b] < 0.0);
            }
        }
        Ok((four_point_violation(&m), asym))
    })?;
    let worst = rows.iter().map(|x| x.0).fold(0.0, f64::max);
    let asym: usize = rows.iter().map(|x| x.1).sum();
    r.gate("max_four_point_violation", worst, Bound::new(0.0, 1e-9), 7.9e-16);
    r.gate("symmetry_violations", asym as f64, Bound::new(0.0, 0.0), 0.0);
    r.finish();
    Ok(r)
}

// ----------------------------------------------------------------- surplus

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurplusParams {
    pub n: usize,
    pub lambda: f64,
    /// Rank window `a n^{2/3}` and continuum window `[0, a]`.
    pub a: f64,
}

pub const SURPLUS: SurplusParams = SurplusParams { n: 2000, lambda: 0.0, a: 2.0 };

pub fn surplus(seed: u64, reps: usize) -> Result<StatReport> {
    surplus_with(SURPLUS, seed, reps)
}

pub fn surplus_with(p: SurplusParams, seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("surplus", seed, reps, false);
    let cap = (p.a * (p.n as f64).powf(2.0 / 3.0)).floor() as usize;
    let disc = replicas(reps, |i| {
        let k = rep_key(seed, "surplus/discrete", i);
        let w = Weights::keyed(p.n, sub(&k, "w").digest());
        let prim = prim_prefix(&w, cap)?;
        Ok(cyclic_points(&prim, &w, p.lambda, cap)?.len() as f64)
    })?;
    let units = p.a.ceil() as usize;
    let cont = replicas(reps, |i| {
        let k = rep_key(seed, "surplus/continuum", i);
        let horizon = pow2_horizon(units as f64);
        let path = sample_parabolic(p.lambda, horizon, horizon as usize * PARABOLIC_CELLS_PER_UNIT, &sub(&k, "path"))?;
        let end = path.index_of(p.a);
        let b = frag::shear(&path, 0.0);
        let h = b.step();
        Ok((0..end).map(|j| 0.5 * h * (b.values[j] + b.values[j + 1])).sum::<f64>())
    })?;
    let (md, sd) = mean_se(&disc);
    let (mc, sc) = mean_se(&cont);
    r.stat("mean_surplus", md);
    r.stat("se_surplus", sd);
    r.stat("mean_area", mc);
    r.stat("se_area", sc);
    let se = (sd * sd + sc * sc).sqrt();
    r.gate("z_surplus_minus_area", (md - mc) / se, Bound::around(0.0, 3.0), -2.45);
    // Each explored vertex spends one edge on the tree: mean surplus sits
    // about `p * cap` below the area at finite n.
    let prob = (1.0 + p.lambda * (p.n as f64).powf(-1.0 / 3.0)) / p.n as f64;
    r.stat("finite_n_offset", prob * cap as f64);
    r.stat("z_offset_corrected", (md - mc + prob * cap as f64) / se);
    r.finish();
    Ok(r)
}

// ----------------------------------------------------------------- position

pub fn position(seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("position", seed, reps, false);
    // (lambda, calibration mean of R, calibration tail ratio)
    for &(lambda, pilot_r, pilot_tail) in &[(5.0f64, 9.993, 0.053), (8.0, 15.974, 0.047)] {
        let rows = replicas(reps, |i| {
            let k = rep_key(seed, &format!("position/{lambda}"), i);
            let path = parabolic_grid(lambda, 2.0 * lambda + 4.0, PARABOLIC_CELLS_PER_UNIT, &sub(&k, "path"))?;
            let right = frag::right_end_after(&path, 0.0, 1.0).map(|i| path.time(i));
            let left = path.time(frag::left_end_before(&path, 0.0, 1.0));
            Ok((right, left))
        })?;
        let exhausted = rows.iter().filter(|x| x.0.is_none()).count();
        let rs: Vec<f64> = rows.iter().filter_map(|x| x.0).collect();
        let ls: Vec<f64> = rows.iter().map(|x| x.1 * lambda * lambda).collect();
        let tag = lambda as usize;
        r.gate(&format!("window_exhausted_{tag}"), exhausted as f64, Bound::new(0.0, 0.0), 0.0);
        let mr = if rs.is_empty() { f64::NAN } else { mean(&rs) };
        r.gate(&format!("mean_r_{tag}"), mr, Bound::around(2.0 * lambda, 1.0), pilot_r);
        let tail = |x: f64| ls.iter().filter(|&&l| l >= x).count() as f64 / ls.len() as f64;
        let (p1, p2, p4, p8) = (tail(1.0), tail(2.0), tail(4.0), tail(8.0));
        r.stat(&format!("tail_l_1_{tag}"), p1);
        r.stat(&format!("tail_l_2_{tag}"), p2);
        r.stat(&format!("tail_l_4_{tag}"), p4);
        r.stat(&format!("tail_l_8_{tag}"), p8);
        let ratio = if p1 > 0.0 { p4 / p1 } else { 0.0 };
        r.gate(&format!("tail_ratio_4_1_{tag}"), ratio, Bound::new(0.0, 0.5), pilot_tail);
    }
    r.finish();
    Ok(r)
}

// ---------------------------------------------------------------- dimension

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionParams {
    pub lambda: f64,
    pub cells_per_unit: usize,
    pub radii: [f64; 5],
}

pub const DIMENSION: DimensionParams =
    DimensionParams { lambda: 6.0, cells_per_unit: 1 << 13, radii: [0.05, 0.1, 0.2, 0.3, 0.4] };

/// OLS slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn dimension(seed: u64, reps: usize) -> Result<StatReport> {
    dimension_with(DIMENSION, seed, reps)
}

pub fn dimension_with(p: DimensionParams, seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("dimension", seed, reps, true);
    let rows = replicas(reps, |i| {
        let k = rep_key(seed, "dimension", i);
        let path = parabolic_grid(p.lambda, 2.0 * p.lambda + 4.0, p.cells_per_unit, &sub(&k, "path"))?;
        let assign = UniformAssignment::from_key(&sub(&k, "assoc"));
        ball_masses(&path, &assign, &p.radii, Cutoff::default_for(&path), 0, &sub(&k, "sample"))
    })?;
    let means: Vec<f64> = (0..p.radii.len()).map(|j| mean(&column(&rows, j))).collect();
    for (j, &rad) in p.radii.iter().enumerate() {
        r.stat(&format!("mass_r{rad}"), means[j]);
    }
    let lx: Vec<f64> = p.radii.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = means.iter().map(|x| x.ln()).collect();
    r.gate("loglog_slope", ols_slope(&lx, &ly), Bound::new(2.2, 3.5), 2.14);
    r.finish();
    Ok(r)
}

// ---------------------------------------------------------------- mst_limit

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstLimitParams {
    pub n: usize,
    pub lambda: f64,
    /// Continuum leaf length in grid cells. Grid minorants of short pieces
    /// drop sub-cell faces, so expanding below this length biases distances low.
    pub leaf_cells: usize,
}

pub const MST_LIMIT: MstLimitParams = MstLimitParams { n: 2000, lambda: 1.0, leaf_cells: 256 };

/// Rank of rescaled time `t`: `1 + round(t n^{2/3})`.
fn rank_of_time(n: usize, t: f64) -> usize {
    1 + (t * (n as f64).powf(2.0 / 3.0)).round() as usize
}

/// Rescaled MST distance from rank 1 to a uniform rank of the component
/// window `[1, R)` at `lambda`, where `R` is the first component boundary
/// after the rank of time 1.
pub fn discrete_window_distance(n: usize, lambda: f64, key: &RngKey) -> Result<f64> {
    let w = Weights::keyed(n, sub(key, "w").digest());
    let one = rank_of_time(n, 1.0);
    let mut k = rank_of_time(n, 2.0 * lambda.max(0.0) + 4.0).min(n);
    loop {
        let prim = prim_prefix(&w, k)?;
        let z = zeros_from_weights(&prim, lambda)?;
        if let Some(&big_r) = z.iter().find(|&&s| s > one) {
            let y = 2 + ((sub(key, "y").uniform_at(0) * (big_r - 2) as f64) as usize).min(big_r - 3);
            let hops = graph_distance(&rank_edges(&prim), k, 1, y);
            return Ok(hops as f64 / (n as f64).cbrt());
        }
        if k == n {
            return domain("no component boundary after time 1");
        }
        k = (2 * k).min(n);
    }
}

/// `d(0, y)` for a uniform grid time `y` in `(0, R_lambda)`.
pub fn continuum_window_distance(lambda: f64, leaf_cells: usize, key: &RngKey) -> Result<f64> {
    let path = parabolic_grid(lambda, 2.0 * lambda.max(0.0) + 4.0, PARABOLIC_CELLS_PER_UNIT, &sub(key, "path"))?;
    let Some(big_r) = frag::right_end_after(&path, 0.0, 1.0) else {
        return domain("component of time 1 reaches the grid end");
    };
    let assign = UniformAssignment::from_key(&sub(key, "assoc"));
    let d = root_distances(&path, &assign, big_r, leaf_cells as f64 * path.step());
    let y = 1 + ((sub(key, "y").uniform_at(0) * (big_r - 1) as f64) as usize).min(big_r - 2);
    Ok(d[y])
}

pub fn mst_limit(seed: u64, reps: usize) -> Result<StatReport> {
    mst_limit_with(MST_LIMIT, seed, reps)
}

pub fn mst_limit_with(p: MstLimitParams, seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("mst_limit", seed, reps, true);
    let disc = replicas(reps, |i| discrete_window_distance(p.n, p.lambda, &rep_key(seed, "mst_limit/discrete", i)))?;
    let cont = replicas(reps, |i| {
        continuum_window_distance(p.lambda, p.leaf_cells, &rep_key(seed, "mst_limit/continuum", i))
    })?;
    r.stat("mean_discrete", mean(&disc));
    r.stat("mean_continuum", mean(&cont));
    r.gate("ks_discrete_continuum", ks_two_sample(&disc, &cont)?, Bound::at_most(0.1), 0.112);
    r.finish();
    Ok(r)
}

// ----------------------------------------------------------- representation

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentationParams {
    pub n: usize,
    /// Ranks whose distance is compared.
    pub a: usize,
    pub b: usize,
}

pub const REPRESENTATION: RepresentationParams = RepresentationParams { n: 50, a: 1, b: 25 };
const FILTRATION_LAMBDAS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// Whether the forest on ranks `1..=n` has components exactly
/// `[z_k, z_{k+1})` for the sorted boundary list `zeros` (starting at 1).
fn components_are_intervals(edges: &[(usize, usize)], n: usize, zeros: &[usize]) -> bool {
    let block = |i: usize| zeros.partition_point(|&s| s <= i);
    let mut uf = UnionFind::new(n + 1);
    for &(a, b) in edges {
        if block(a) != block(b) || !uf.union(a, b) {
            return false;
        }
    }
    (1..=n).all(|i| uf.find(i) == uf.find(zeros[block(i) - 1]))
}

pub fn representation(seed: u64, reps: usize) -> Result<StatReport> {
    representation_with(REPRESENTATION, seed, reps)
}

pub fn representation_with(p: RepresentationParams, seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("representation", seed, reps, false);
    let rows = replicas(reps, |i| {
        let k = rep_key(seed, "representation", i);
        let w = Weights::keyed(p.n, sub(&k, "w").digest());
        let prim = prim_order(&w)?;
        let record = merge_record(&prim)?;
        let assign = UniformAssignment::from_key(&sub(&k, "assoc"));
        let forest = representation_forest(&record, &assign, f64::INFINITY);
        let mut bad = usize::from(forest.len() != p.n - 1);
        bad += usize::from(!components_are_intervals(&forest, p.n, &[1]));
        let mut prev = 0usize;
        for &lam in &FILTRATION_LAMBDAS {
            let f = representation_forest(&record, &assign, lam);
            let z = zeros_from_weights(&prim, lam)?;
            bad += usize::from(!components_are_intervals(&f, p.n, &z));
            bad += usize::from(f.len() < prev);
            prev = f.len();
        }
        let dr = graph_distance(&forest, p.n, p.a, p.b);
        let dm = graph_distances_from(&rank_edges(&prim), p.n, p.a)[p.b];
        Ok((dr as f64, dm as f64, bad))
    })?;
    let rep: Vec<f64> = rows.iter().map(|x| x.0).collect();
    let mst: Vec<f64> = rows.iter().map(|x| x.1).collect();
    let bad: usize = rows.iter().map(|x| x.2).sum();
    r.stat("mean_forest_distance", mean(&rep));
    r.stat("mean_mst_distance", mean(&mst));
    r.gate("structural_violations", bad as f64, Bound::new(0.0, 0.0), 0.0);
    r.gate("ks_forest_vs_mst", ks_two_sample(&rep, &mst)?, Bound::at_most(0.02), 0.0092);
    r.finish();
    Ok(r)
}

// ----------------------------------------------------------------- dynamics

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    pub n: usize,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Macroscopic gap, in rescaled time.
    pub min_len: f64,
}

pub const DYNAMICS: DynamicsParams = DynamicsParams { n: 1000, lambda_lo: -1.0, lambda_hi: 1.0, min_len: 0.3 };

/// Rescaled exploration walk at `lambda`, as a path on a power-of-two grid
/// with time step `n^{-2/3}`, padded with a strictly decreasing tail.
pub fn exploration_path(prim: &crate::discrete::PrimResult, w: &Weights, lambda: f64) -> Result<PathSample> {
    let n = prim.n;
    let ex = crate::discrete::exploration(prim, w, lambda, n)?;
    let cells = n.next_power_of_two();
    let c = (n as f64).cbrt();
    let h = 1.0 / (c * c);
    let mut values: Vec<f64> = ex.walk.iter().map(|&x| x as f64 / c).collect();
    let mut last = *values.last().expect("walk has length n + 1");
    while values.len() < cells + 1 {
        last -= 1.0 / c;
        values.push(last);
    }
    PathSample::from_values(PathKind::Parabolic(lambda), cells as f64 * h, values)
}

pub fn dynamics(seed: u64, reps: usize) -> Result<StatReport> {
    dynamics_with(DYNAMICS, seed, reps)
}

pub fn dynamics_with(p: DynamicsParams, seed: u64, reps: usize) -> Result<StatReport> {
    let mut r = StatReport::new("dynamics", seed, reps, false);
    let rows = replicas(reps, |i| {
        let k = rep_key(seed, "dynamics", i);
        let w = Weights::keyed(p.n, sub(&k, "w").digest());
        let prim = prim_order(&w)?;
        let record = merge_record(&prim)?;
        let path = exploration_path(&prim, &w, p.lambda_hi)?;
        let h = path.step();
        // refinement across the window, discrete and continuum
        let mut bad = 0usize;
        let zd_lo = zeros_from_weights(&prim, p.lambda_lo)?;
        let zd_hi = zeros_from_weights(&prim, p.lambda_hi)?;
        bad += zd_hi.iter().filter(|s| zd_lo.binary_search(s).is_err()).count();
        let zc_lo = zero_set(&path, p.lambda_lo - p.lambda_hi);
        let zc_hi = zero_set(&path, 0.0);
        bad += zc_hi.indices.iter().filter(|&&s| !zc_lo.contains(s)).count();
        // nearest discrete merge for each macroscopic continuum merge
        let events = frag::merges(&path, p.lambda_lo, p.lambda_hi, p.min_len.max(4.0 * h))?;
        let end = p.n;
        let cands: Vec<[f64; 4]> = record
            .entries
            .iter()
            .map(|e| [(e.l - 1) as f64 * h, (e.i - 1) as f64 * h, (e.r - 1) as f64 * h, -e.s])
            .collect();
        // nearest by triple; the sheared walk only tracks the discrete
        // walk at other parameters up to O(n^{-1/6}), so lambda is reported
        let mut rows = Vec::new();
        for e in events.iter().filter(|e| e.r <= end) {
            let q = [path.time(e.l), path.time(e.t), path.time(e.r), e.lambda];
            let best = cands
                .iter()
                .map(|c| ((0..3).map(|j| (c[j] - q[j]).abs()).fold(0.0, f64::max), (c[3] - q[3]).abs()))
                .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
            rows.push(best);
        }
        Ok((bad, rows))
    })?;
    let bad: usize = rows.iter().map(|x| x.0).sum();
    let matches: Vec<(f64, f64)> = rows.iter().flat_map(|x| x.1.iter().copied()).collect();
    let worst = matches.iter().map(|x| x.0).fold(0.0, f64::max);
    let mut lam: Vec<f64> = matches.iter().map(|x| x.1).collect();
    lam.sort_by(f64::total_cmp);
    r.gate("refinement_violations", bad as f64, Bound::new(0.0, 0.0), 0.0);
    r.stat("matched_events", matches.len() as f64);
    r.gate("max_triple_distance", worst, Bound::at_most(2.0 * p.min_len), 0.55);
    r.stat("median_lambda_error", lam.get(lam.len() / 2).copied().unwrap_or(f64::NAN));
    r.stat("max_lambda_error", lam.last().copied().unwrap_or(f64::NAN));
    r.finish();
    Ok(r)
}

/// Registered suite names, in the order `verify all` runs them.
pub const SUITES: [&str; 12] = [
    "dirichlet",
    "stickbreak",
    "martingale",
    "rayleigh",
    "fragment",
    "cuttree",
    "surplus",
    "position",
    "dimension",
    "mst_limit",
    "representation",
    "dynamics",
];

/// Replication count used when the caller gives none.
pub fn default_reps(name: &str) -> Option<usize> {
    Some(match name {
        "dirichlet" | "stickbreak" | "martingale" | "rayleigh" => 50_000,
        "fragment" | "cuttree" | "surplus" | "position" => 1_000,
        "dimension" => 200,
        "mst_limit" => 2_000,
        "representation" => 10_000,
        "dynamics" => 200,
        _ => return None,
    })
}

pub(crate) fn dispatch(name: &str, seed: u64, reps: usize) -> Result<StatReport> {
    match name {
        "dirichlet" => dirichlet(seed, reps),
        "stickbreak" => stickbreak(seed, reps),
        "martingale" => martingale(seed, reps),
        "rayleigh" => rayleigh(seed, reps),
        "fragment" => fragment(seed, reps),
        "cuttree" => cuttree(seed, reps),
        "surplus" => surplus(seed, reps),
        "position" => position(seed, reps),
        "dimension" => dimension(seed, reps),
        "mst_limit" => mst_limit(seed, reps),
        "representation" => representation(seed, reps),
        "dynamics" => dynamics(seed, reps),
        _ => Err(Error::Usage(format!("unknown suite {name:?}"))),
    }
}
