//! Suite reports and their byte-stable JSON form.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fmt::g17;

/// Closed interval `[lo, hi]`; infinite ends are written as `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
}

impl Bound {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn at_most(hi: f64) -> Self {
        Self { lo: f64::NEG_INFINITY, hi }
    }

    pub fn at_least(lo: f64) -> Self {
        Self { lo, hi: f64::INFINITY }
    }

    pub fn around(center: f64, half_width: f64) -> Self {
        Self { lo: center - half_width, hi: center + half_width }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatReport {
    pub suite: String,
    pub seed: u64,
    pub reps: usize,
    pub stats: BTreeMap<String, f64>,
    /// Gating bounds: `pass` requires every listed stat inside its bound.
    pub thresholds: BTreeMap<String, Bound>,
    /// Non-gating bounds, reported with their own verdict.
    pub advisory: BTreeMap<String, Bound>,
    /// Value of each gated stat on the calibration run (default seed and reps).
    pub pilot: BTreeMap<String, f64>,
    /// The suite probes an asymptotic claim with material discretization bias.
    pub soft: bool,
    pub pass: bool,
    /// Wall-clock seconds; not serialized.
    pub runtime: f64,
}

impl StatReport {
    pub fn new(suite: &str, seed: u64, reps: usize, soft: bool) -> Self {
        Self {
            suite: suite.to_string(),
            seed,
            reps,
            stats: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            advisory: BTreeMap::new(),
            pilot: BTreeMap::new(),
            soft,
            pass: true,
            runtime: 0.0,
        }
    }

    pub fn stat(&mut self, name: &str, value: f64) {
        self.stats.insert(name.to_string(), value);
    }

    /// Records a gated stat with its bound and calibration value.
    pub fn gate(&mut self, name: &str, value: f64, bound: Bound, pilot: f64) {
        self.stat(name, value);
        self.thresholds.insert(name.to_string(), bound);
        self.pilot.insert(name.to_string(), pilot);
    }

    pub fn advise(&mut self, name: &str, value: f64, bound: Bound) {
        self.stat(name, value);
        self.advisory.insert(name.to_string(), bound);
    }

    /// Sets `pass` from the gated stats.
    pub fn finish(&mut self) {
        self.pass = self.failures().is_empty();
    }

    /// Names of gated stats outside their bounds (NaN counts as outside).
    pub fn failures(&self) -> Vec<String> {
        self.thresholds
            .iter()
            .filter(|(k, b)| !self.stats.get(*k).is_some_and(|v| b.contains(*v)))
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn advisory_failures(&self) -> Vec<String> {
        self.advisory
            .iter()
            .filter(|(k, b)| !self.stats.get(*k).is_some_and(|v| b.contains(*v)))
            .map(|(k, _)| k.clone())
            .collect()
    }

    pub fn advisory_pass(&self) -> bool {
        self.advisory_failures().is_empty()
    }

    /// One-line JSON with 17 significant digits, keys in a fixed order.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{{\"suite\":{},", json_str(&self.suite)));
        s.push_str(&format!("\"seed\":{},\"reps\":{},", self.seed, self.reps));
        s.push_str(&format!("\"stats\":{},", num_map(&self.stats)));
        s.push_str(&format!("\"thresholds\":{},", bound_map(&self.thresholds)));
        s.push_str(&format!("\"advisory\":{},", bound_map(&self.advisory)));
        s.push_str(&format!("\"pilot\":{},", num_map(&self.pilot)));
        s.push_str(&format!("\"soft\":{},\"pass\":{},", self.soft, self.pass));
        s.push_str(&format!("\"advisory_pass\":{}}}", self.advisory_pass()));
        s
    }

    /// Inverse of [`StatReport::to_json`]; `runtime` is left at zero.
    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Usage(format!("malformed report: {m}"));
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
        let num = |x: &serde_json::Value| -> f64 { x.as_f64().unwrap_or(f64::NAN) };
        let nums = |key: &str| -> Result<BTreeMap<String, f64>> {
            let o = v.get(key).and_then(|x| x.as_object()).ok_or_else(|| bad(key))?;
            Ok(o.iter().map(|(k, x)| (k.clone(), num(x))).collect())
        };
        let bounds = |key: &str| -> Result<BTreeMap<String, Bound>> {
            let o = v.get(key).and_then(|x| x.as_object()).ok_or_else(|| bad(key))?;
            o.iter()
                .map(|(k, x)| {
                    let a = x.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad(k))?;
                    let lo = a[0].as_f64().unwrap_or(f64::NEG_INFINITY);
                    let hi = a[1].as_f64().unwrap_or(f64::INFINITY);
                    Ok((k.clone(), Bound::new(lo, hi)))
                })
                .collect()
        };
        Ok(Self {
            suite: v.get("suite").and_then(|x| x.as_str()).ok_or_else(|| bad("suite"))?.to_string(),
            seed: v.get("seed").and_then(|x| x.as_u64()).ok_or_else(|| bad("seed"))?,
            reps: v.get("reps").and_then(|x| x.as_u64()).ok_or_else(|| bad("reps"))? as usize,
            stats: nums("stats")?,
            thresholds: bounds("thresholds")?,
            advisory: bounds("advisory").unwrap_or_default(),
            pilot: nums("pilot").unwrap_or_default(),
            soft: v.get("soft").and_then(|x| x.as_bool()).ok_or_else(|| bad("soft"))?,
            pass: v.get("pass").and_then(|x| x.as_bool()).ok_or_else(|| bad("pass"))?,
            runtime: 0.0,
        })
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        g17(x)
    } else {
        "null".to_string()
    }
}

fn num_map(m: &BTreeMap<String, f64>) -> String {
    let body: Vec<String> = m.iter().map(|(k, v)| format!("{}:{}", json_str(k), json_num(*v))).collect();
    format!("{{{}}}", body.join(","))
}

fn bound_map(m: &BTreeMap<String, Bound>) -> String {
    let body: Vec<String> =
        m.iter().map(|(k, b)| format!("{}:[{},{}]", json_str(k), json_num(b.lo), json_num(b.hi))).collect();
    format!("{{{}}}", body.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StatReport {
        let mut r = StatReport::new("demo", 42, 100, false);
        r.gate("ks", 0.011, Bound::at_most(0.02), 0.012);
        r.gate("mean", 0.3335, Bound::around(1.0 / 3.0, 0.005), 0.333);
        r.advise("soft_mean", 1.25, Bound::around(0.8355, 0.03));
        r.stat("info", f64::NAN);
        r.finish();
        r
    }

    #[test]
    fn pass_and_failures() {
        let mut r = sample();
        assert!(r.pass);
        assert!(!r.advisory_pass());
        r.gate("ks", 0.05, Bound::at_most(0.02), 0.012);
        r.finish();
        assert!(!r.pass);
        assert_eq!(r.failures(), vec!["ks".to_string()]);
    }

    #[test]
    fn nan_fails_its_gate() {
        let mut r = StatReport::new("demo", 1, 1, false);
        r.gate("x", f64::NAN, Bound::at_most(1.0), 0.0);
        r.finish();
        assert!(!r.pass);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let j = r.to_json();
        assert!(j.starts_with("{\"suite\":\"demo\",\"seed\":42,\"reps\":100,\"stats\":{"));
        assert!(j.contains("\"ks\":[null,0.02]"));
        assert!(j.contains("\"info\":null"));
        let back = StatReport::from_json(&j).unwrap();
        assert_eq!(back.to_json(), j);
        assert_eq!(back.thresholds, r.thresholds);
    }
}
