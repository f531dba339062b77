//! Goodness-of-fit statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{usage, Result};

pub const MIN_SAMPLES: usize = 30;

fn enough(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return usage(format!("{n} samples given, at least {MIN_SAMPLES} required"));
    }
    Ok(())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup |F_n - F|` against a continuous reference CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    enough(samples.len())?;
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// `sup |F_a - F_b|` over the pooled sample, handling ties.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    enough(a.len())?;
    enough(b.len())?;
    let (xa, xb) = (sorted(a), sorted(b));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == x {
            i += 1;
        }
        while j < xb.len() && xb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Chi-square goodness-of-fit p-value of integer counts against Poisson(mean).
/// Cells with expected count below 5 are pooled into the tails.
pub fn poisson_fit(counts: &[u64], mean: f64) -> Result<f64> {
    enough(counts.len())?;
    if !(mean > 0.0) {
        return usage("Poisson mean must be positive");
    }
    let n = counts.len() as f64;
    let kmax = *counts.iter().max().expect("nonempty") as usize;
    let mut observed = vec![0.0; kmax + 2];
    for &c in counts {
        observed[c as usize] += 1.0;
    }
    let top = kmax.max(mean.ceil() as usize * 3 + 10);
    observed.resize(top + 1, 0.0);
    let mut pmf = Vec::with_capacity(top + 1);
    let mut p = (-mean).exp();
    for k in 0..=top {
        pmf.push(p);
        p *= mean / (k + 1) as f64;
    }
    // expected counts with the last cell absorbing the upper tail
    let mut expected: Vec<f64> = pmf.iter().map(|q| q * n).collect();
    let head: f64 = expected[..top].iter().sum();
    expected[top] = n - head;
    // pool from both ends until every cell expects at least 5
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for k in 0..=top {
        o += observed[k];
        e += expected[k];
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    if cells.len() < 2 {
        return Ok(1.0);
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() - 1) as f64;
    Ok(1.0 - ChiSquared::new(dof).expect("positive dof").cdf(stat))
}

/// Sample mean and the half-width `1.96 * sd / sqrt(n)` of a 95% interval.
pub fn mean_ci(samples: &[f64]) -> Result<(f64, f64)> {
    enough(samples.len())?;
    let (m, se) = mean_se(samples);
    Ok((m, 1.96 * se))
}

/// Sample mean and its standard error.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let m = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Chi-square goodness-of-fit p-value of category counts against uniform.
pub fn uniform_categories_p(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if counts.len() < 2 || n == 0 {
        return 1.0;
    }
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).expect("positive dof").cdf(stat)
}
