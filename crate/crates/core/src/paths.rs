//! Seedable driving paths on dyadic grids.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, usage, Error, Result};
use crate::fmt::g17;
use crate::rng::{RngKey, UniformField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathKind {
    Motion,
    Excursion,
    Parabolic(f64),
    Sheared(f64),
}

impl PathKind {
    /// Linear drift already contained in the stored values.
    pub fn drift(&self) -> f64 {
        match *self {
            PathKind::Parabolic(l) | PathKind::Sheared(l) => l,
            _ => 0.0,
        }
    }
}

/// Whether Gaussian draws are real or forced to zero (test hook).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Noise {
    #[default]
    Gaussian,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub kind: PathKind,
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl PathSample {
    /// Wraps externally produced values. `values.len() - 1` must be a power of two.
    pub fn from_values(kind: PathKind, horizon: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || !(values.len() - 1).is_power_of_two() {
            return usage("number of cells must be a power of two");
        }
        if !(horizon > 0.0) {
            return usage("horizon must be positive");
        }
        if values[0] != 0.0 {
            return usage("path must start at 0");
        }
        Ok(Self { kind, horizon, values })
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.n_cells() as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    /// Grid index nearest to time `t`, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        let i = (t / self.step()).round();
        i.clamp(0.0, self.n_cells() as f64) as usize
    }

    /// Scale of the per-index tie-break perturbation, 2^-60 times the path scale.
    pub fn tie_eps(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        scale * (-60f64).exp2()
    }

    /// Trapezoid integral over the whole grid.
    pub fn trapezoid_area(&self) -> f64 {
        let s: f64 = self.values.windows(2).map(|w| w[0] + w[1]).sum();
        0.5 * s * self.step()
    }

    /// CSV with header `t,v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 40);
        out.push_str("t,v\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&g17(self.time(i)));
            out.push(',');
            out.push_str(&g17(*v));
            out.push('\n');
        }
        out
    }
}

fn check_grid(n: usize, t: f64) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return usage(format!("N = {n} is not a positive power of two"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return usage(format!("horizon T = {t} must be positive and finite"));
    }
    Ok(())
}

fn gaussian_walk(n: usize, t: f64, key: &RngKey, noise: Noise) -> Vec<f64> {
    let sd = (t / n as f64).sqrt();
    let mut v = Vec::with_capacity(n + 1);
    v.push(0.0);
    let mut acc = 0.0;
    match noise {
        Noise::Gaussian => {
            let mut rng = key.stream();
            for _ in 0..n {
                let g: f64 = StandardNormal.sample(&mut rng);
                acc += g * sd;
                v.push(acc);
            }
        }
        Noise::Zero => v.resize(n + 1, 0.0),
    }
    v
}

pub fn sample_motion(n: usize, t: f64, key: &RngKey) -> Result<PathSample> {
    sample_motion_with(n, t, key, Noise::Gaussian)
}

pub fn sample_motion_with(n: usize, t: f64, key: &RngKey, noise: Noise) -> Result<PathSample> {
    check_grid(n, t)?;
    Ok(PathSample { kind: PathKind::Motion, horizon: t, values: gaussian_walk(n, t, key, noise) })
}

/// Brownian excursion of unit duration: a Gaussian bridge rotated at its
/// first minimum. An exact interior tie with the minimum (a floating point
/// accident) triggers a redraw from a derived key.
pub fn sample_excursion(n: usize, key: &RngKey) -> Result<PathSample> {
    if n < 2 {
        return usage("excursion needs N >= 2");
    }
    check_grid(n, 1.0)?;
    let mut attempt = 0u64;
    loop {
        let k = if attempt == 0 { key.clone() } else { RngKey::new(key.digest(), "excursion-retry", attempt) };
        let w = gaussian_walk(n, 1.0, &k, Noise::Gaussian);
        if let Some(values) = vervaat(&w) {
            return Ok(PathSample { kind: PathKind::Excursion, horizon: 1.0, values });
        }
        attempt += 1;
    }
}

/// Pins a walk into a bridge and rotates it cyclically at the first argmin.
/// Returns `None` when the rotated path touches zero in the interior.
fn vervaat(w: &[f64]) -> Option<Vec<f64>> {
    let n = w.len() - 1;
    let end = w[n];
    let bridge: Vec<f64> = (0..n).map(|i| w[i] - (i as f64 / n as f64) * end).collect();
    let mut k = 0;
    for i in 1..n {
        if bridge[i] < bridge[k] {
            k = i;
        }
    }
    let mut v = Vec::with_capacity(n + 1);
    for i in 0..n {
        v.push(bridge[(k + i) % n] - bridge[k]);
    }
    v.push(0.0);
    v[0] = 0.0;
    if v[1..n].iter().all(|&x| x > 0.0) {
        Some(v)
    } else {
        None
    }
}

/// Brownian motion with parabolic drift, `W(t) - t^2/2 + lambda t`.
/// The horizon must cover `2 lambda + 1`, the far edge of the typical window
/// for the component containing time 1.
pub fn sample_parabolic(lambda: f64, t: f64, n: usize, key: &RngKey) -> Result<PathSample> {
    sample_parabolic_with(lambda, t, n, key, Noise::Gaussian)
}

pub fn sample_parabolic_with(lambda: f64, t: f64, n: usize, key: &RngKey, noise: Noise) -> Result<PathSample> {
    check_grid(n, t)?;
    if !lambda.is_finite() {
        return usage("lambda must be finite");
    }
    if t < 2.0 * lambda + 1.0 {
        return domain(format!("horizon {t} too short for lambda = {lambda}; need at least {}", 2.0 * lambda + 1.0));
    }
    let mut values = gaussian_walk(n, t, key, noise);
    let h = t / n as f64;
    for (i, v) in values.iter_mut().enumerate() {
        let s = i as f64 * h;
        *v += -0.5 * s * s + lambda * s;
    }
    Ok(PathSample { kind: PathKind::Parabolic(lambda), horizon: t, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiltedDraw {
    pub path: PathSample,
    /// Trapezoid area of the selected candidate.
    pub area: f64,
    /// Effective sample size of the normalized weights.
    pub ess: f64,
    /// Position of the selected candidate in the batch.
    pub chosen: usize,
}

/// Excursion tilted by `area^s`, by self-normalized resampling from a batch of
/// `m` plain excursions. Candidate `j` uses a key derived from `key` and `j`.
pub fn sample_tilted_excursion(s: u32, n: usize, m: usize, key: &RngKey) -> Result<TiltedDraw> {
    if m == 0 {
        return usage("batch size must be positive");
    }
    if s >= 1 && m < 100 {
        return usage(format!("batch size {m} below 100 for s = {s}"));
    }
    let base = key.digest();
    let batch: Vec<PathSample> =
        (0..m).map(|j| sample_excursion(n, &RngKey::new(base, "tilt-candidate", j as u64))).collect::<Result<_>>()?;
    let areas: Vec<f64> = batch.iter().map(PathSample::trapezoid_area).collect();
    let weights: Vec<f64> = areas.iter().map(|a| a.powi(s as i32)).collect();
    let total: f64 = weights.iter().sum();
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    let ess = total * total / sq;
    if s >= 1 && ess < 10.0 {
        return Err(Error::Statistical(format!("effective sample size {ess:.2} < 10")));
    }
    let u = UniformField::new(&RngKey::new(base, "tilt-pick", 0)).at(0) * total;
    let mut acc = 0.0;
    let mut chosen = m - 1;
    for (j, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            chosen = j;
            break;
        }
    }
    let area = areas[chosen];
    let path = batch.into_iter().nth(chosen).expect("chosen within batch");
    Ok(TiltedDraw { path, area, ess, chosen })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(i: u64) -> RngKey {
        RngKey::new(42, "test", i)
    }

    #[test]
    fn motion_single_cell() {
        let p = sample_motion(1, 1.0, &key(0)).unwrap();
        assert_eq!(p.values.len(), 2);
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p, sample_motion(1, 1.0, &key(0)).unwrap());
    }

    #[test]
    fn motion_rejects_bad_grid() {
        assert!(matches!(sample_motion(3, 1.0, &key(0)), Err(Error::Usage(_))));
        assert!(matches!(sample_motion(4, 0.0, &key(0)), Err(Error::Usage(_))));
    }

    #[test]
    fn motion_terminal_variance() {
        let reps = 100_000;
        let xs: Vec<f64> = (0..reps).map(|i| *sample_motion(8, 1.0, &key(i)).unwrap().values.last().unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((0.99..=1.01).contains(&var), "{var}");
    }

    #[test]
    fn excursion_shape() {
        for i in 0..200 {
            let p = sample_excursion(64, &key(i)).unwrap();
            assert_eq!(p.values[0], 0.0);
            assert_eq!(p.values[64], 0.0);
            assert!(p.values[1..64].iter().all(|&v| v > 0.0));
        }
        let p = sample_excursion(2, &key(9)).unwrap();
        assert_eq!(p.values.len(), 3);
        assert!(p.values[1] > 0.0);
    }

    #[test]
    fn parabolic_zero_noise() {
        let p = sample_parabolic_with(0.0, 2.0, 4, &key(0), Noise::Zero).unwrap();
        assert_eq!(p.values, vec![0.0, -0.125, -0.5, -1.125, -2.0]);
    }

    #[test]
    fn parabolic_drift_linearity() {
        let a = sample_parabolic(0.0, 24.0, 256, &key(3)).unwrap();
        let b = sample_parabolic(8.0, 24.0, 256, &key(3)).unwrap();
        for i in 0..=256 {
            let d = b.values[i] - a.values[i] - 8.0 * a.time(i);
            assert!(d.abs() < 1e-12, "{i}: {d}");
        }
    }

    #[test]
    fn parabolic_mean_at_sixteen() {
        let reps = 4000;
        let mut t = 0.0;
        let m: f64 = (0..reps)
            .map(|i| {
                let p = sample_parabolic(8.0, 24.0, 2048, &key(i)).unwrap();
                let j = p.index_of(16.0);
                t = p.time(j);
                p.values[j]
            })
            .sum::<f64>()
            / reps as f64;
        let expected = -t * t / 2.0 + 8.0 * t;
        assert!(expected.abs() < 0.1);
        assert!((m - expected).abs() < 3.0 * t.sqrt() / (reps as f64).sqrt(), "{m}");
    }

    #[test]
    fn parabolic_horizon_check() {
        assert!(matches!(sample_parabolic(8.0, 10.0, 64, &key(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn tilted_s0_single_member() {
        let d = sample_tilted_excursion(0, 32, 1, &key(5)).unwrap();
        let direct = sample_excursion(32, &RngKey::new(key(5).digest(), "tilt-candidate", 0)).unwrap();
        assert_eq!(d.path, direct);
        assert_eq!(d.chosen, 0);
    }

    #[test]
    fn tilted_area_bookkeeping() {
        let d = sample_tilted_excursion(1, 64, 200, &key(6)).unwrap();
        assert!((d.path.trapezoid_area() - d.area).abs() < 1e-12);
        assert!(d.ess >= 10.0);
        assert!(matches!(sample_tilted_excursion(1, 64, 50, &key(6)), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_layout() {
        let p = sample_parabolic_with(0.0, 2.0, 4, &key(0), Noise::Zero).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("t,v\n0,0\n0.5,-0.125\n"));
        assert!(!csv.contains('\r'));
    }
}
