//! Heavy-output statistics, pass criteria and the suite runner.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compile::{compile_to_device, CompileRequest};
use crate::error::{Error, Result};
use crate::qvgen::{generate_qv_circuit, QvSpec};
use crate::sim::{
    heavy_set, ideal_distribution, ideal_hop, sample_outcomes, Counts, CountsRecord,
    HeavySet, NoiseModel, ShotKey,
};
use crate::topology::{connected_subsets, DeviceProfile};

pub const RESULT_SCHEMA: u32 = 1;
pub const THRESHOLD: f64 = 2.0 / 3.0;
pub const Z_CONF_THRESHOLD: f64 = 0.99;

/// Number of heavy outcomes in `counts`.
pub fn heavy_count(counts: &Counts, hs: &HeavySet) -> Result<u64> {
    if counts.shots == 0 {
        return Err(Error::Undefined("heavy output probability of zero shots".into()));
    }
    let mut heavy = 0;
    for (bits, n) in &counts.counts {
        if bits.len() != hs.m {
            return Err(Error::Undefined(format!(
                "bitstring `{bits}` does not have width {}",
                hs.m
            )));
        }
        if hs.contains_bitstring(bits) {
            heavy += n;
        }
    }
    Ok(heavy)
}

pub fn hop_of(counts: &Counts, hs: &HeavySet) -> Result<f64> {
    Ok(heavy_count(counts, hs)? as f64 / counts.shots as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaFormula {
    /// `mean·sqrt((1 − mean)/k)`
    #[default]
    Scaled,
    /// `sqrt(mean·(1 − mean)/k)`
    Textbook,
}

impl SigmaFormula {
    pub fn sigma(self, mean: f64, k: usize) -> f64 {
        let k = k as f64;
        match self {
            SigmaFormula::Scaled => mean * ((1.0 - mean) / k).sqrt(),
            SigmaFormula::Textbook => (mean * (1.0 - mean) / k).sqrt(),
        }
    }
}

mod float_or_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativePoint {
    pub k: usize,
    pub mean: f64,
    pub sigma: f64,
    #[serde(with = "float_or_string")]
    pub z: f64,
    pub z_conf: f64,
}

impl CumulativePoint {
    pub fn from_mean(mean: f64, k: usize, formula: SigmaFormula) -> Self {
        let sigma = formula.sigma(mean, k);
        let z = if sigma > 0.0 {
            (mean - THRESHOLD) / sigma
        } else if mean > THRESHOLD {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        CumulativePoint {
            k,
            mean,
            sigma,
            z,
            z_conf: 0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2)),
        }
    }
}

/// One point per prefix of `hops`, using σ = mean·sqrt((1 − mean)/k).
pub fn cumulative_stats(hops: &[f64]) -> Vec<CumulativePoint> {
    cumulative_stats_with(hops, SigmaFormula::Scaled)
}

pub fn cumulative_stats_with(hops: &[f64], formula: SigmaFormula) -> Vec<CumulativePoint> {
    let mut sum = 0.0;
    hops.iter()
        .enumerate()
        .map(|(i, h)| {
            sum += h;
            CumulativePoint::from_mean(sum / (i + 1) as f64, i + 1, formula)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion1: bool,
    pub criterion2: bool,
    pub criterion3: bool,
    pub passed: bool,
}

impl Verdict {
    pub fn from_point(p: &CumulativePoint) -> Self {
        let criterion1 = p.mean > THRESHOLD;
        let criterion2 = p.mean - 2.0 * p.sigma > THRESHOLD;
        let criterion3 = p.z_conf > Z_CONF_THRESHOLD;
        Verdict {
            criterion1,
            criterion2,
            criterion3,
            passed: criterion1 && criterion2 && criterion3,
        }
    }
}

pub fn verdict(hops: &[f64]) -> Result<Verdict> {
    verdict_with(hops, SigmaFormula::Scaled)
}

pub fn verdict_with(hops: &[f64], formula: SigmaFormula) -> Result<Verdict> {
    let p = cumulative_stats_with(hops, formula)
        .pop()
        .ok_or_else(|| Error::NoData("no heavy output probabilities".into()))?;
    Ok(Verdict::from_point(&p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop as soon as the verdict passes and `z_conf` exceeds `early_stop_conf`.
    pub stop_on_pass: bool,
    /// Never stop on a pass before this many circuits.
    pub min_circuits: usize,
    /// Stop once `mean + 2σ < 2/3` after `hopeless_after` circuits.
    pub stop_when_hopeless: bool,
    pub hopeless_after: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            stop_on_pass: true,
            min_circuits: 100,
            stop_when_hopeless: true,
            hopeless_after: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub max_circuits: usize,
    pub shots: u64,
    pub early_stop_conf: f64,
    pub stop_rule: StopRule,
    pub seed: u64,
    /// Circuit depth; `None` means depth equal to width.
    pub depth: Option<usize>,
    pub sigma: SigmaFormula,
    /// Replaces the profile's fidelities when set.
    pub noise: Option<NoiseModel>,
    pub allow_spill: bool,
    /// Circuits computed in parallel between stop-rule checks.
    pub batch_size: usize,
    /// Largest tolerated fraction of circuits that fail to compile.
    pub max_compile_failure_fraction: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            max_circuits: 1000,
            shots: 100,
            early_stop_conf: Z_CONF_THRESHOLD,
            stop_rule: StopRule::default(),
            seed: 0,
            depth: None,
            sigma: SigmaFormula::Scaled,
            noise: None,
            allow_spill: false,
            batch_size: 50,
            max_compile_failure_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitResult {
    pub circuit_index: u64,
    pub heavy_count: u64,
    pub shots: u64,
    pub hop: f64,
    pub ideal_hop: f64,
    pub swap_count: usize,
    pub two_qubit_count: usize,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileFailure {
    pub circuit_index: u64,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Passed,
    Hopeless,
    MaxCircuits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub schema: u32,
    pub m: usize,
    pub d: usize,
    pub profile: String,
    pub gateset_family: String,
    pub subset: Vec<usize>,
    pub noise: NoiseModel,
    pub config: SuiteConfig,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub stop_reason: StopReason,
    pub verdict: Verdict,
    pub circuits: Vec<CircuitResult>,
    pub compile_failures: Vec<CompileFailure>,
    pub cumulative: Vec<CumulativePoint>,
    /// Logical-order counts per circuit; persisted separately.
    #[serde(skip)]
    pub counts: Vec<CountsRecord>,
}

impl SuiteResult {
    pub fn hops(&self) -> Vec<f64> {
        self.circuits.iter().map(|c| c.hop).collect()
    }

    pub fn final_point(&self) -> Option<&CumulativePoint> {
        self.cumulative.last()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("schema").and_then(|s| s.as_u64()) {
            Some(v) if v == RESULT_SCHEMA as u64 => {}
            other => {
                return Err(Error::Schema(format!(
                    "unsupported result schema {}",
                    other.map_or("(missing)".to_string(), |v| v.to_string())
                )))
            }
        }
        serde_json::from_value(raw).map_err(|e| Error::Schema(e.to_string()))
    }

    /// One row per circuit with the running statistics after it.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,circuit_index,hop,ideal_hop,mean,mean_minus_2sigma,z_conf\n");
        for (c, p) in self.circuits.iter().zip(&self.cumulative) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.k,
                c.circuit_index,
                c.hop,
                c.ideal_hop,
                p.mean,
                p.mean - 2.0 * p.sigma,
                p.z_conf
            ));
        }
        out
    }
}

struct Executed {
    result: CircuitResult,
    counts: CountsRecord,
}

fn execute(
    spec: &QvSpec,
    index: u64,
    profile: &DeviceProfile,
    subset: &[usize],
    noise: &NoiseModel,
    config: &SuiteConfig,
) -> Result<std::result::Result<Executed, String>> {
    let c = generate_qv_circuit(spec, index);
    let dist = ideal_distribution(&c)?;
    let hs = heavy_set(&dist);
    let ideal = ideal_hop(&dist, &hs);
    let mut req = CompileRequest::new(&c, profile).subset(subset.to_vec()).seed(config.seed);
    req.allow_spill = config.allow_spill;
    let compiled = match compile_to_device(&req) {
        Ok(cc) => cc,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let key = ShotKey {
        base_seed: config.seed,
        circuit_index: index,
    };
    let outcomes = sample_outcomes(&compiled.circuit, config.shots, noise, key)?;
    let logical: Vec<usize> = outcomes.iter().map(|&o| compiled.logical_outcome(o)).collect();
    let heavy = logical.iter().filter(|&&o| hs.contains(o)).count() as u64;
    let counts = Counts::from_outcomes(&logical, spec.m);
    Ok(Ok(Executed {
        result: CircuitResult {
            circuit_index: index,
            heavy_count: heavy,
            shots: config.shots,
            hop: if config.shots == 0 { 0.0 } else { heavy as f64 / config.shots as f64 },
            ideal_hop: ideal,
            swap_count: compiled.swap_count,
            two_qubit_count: compiled.census.two_qubit_count,
            timestamp: Utc::now(),
        },
        counts: CountsRecord {
            circuit_index: index,
            shots: counts.shots,
            counts: counts.counts,
        },
    }))
}

/// Runs the full protocol for width `m` on `profile`.
///
/// Circuits are generated, compiled, sampled and scored in batches computed
/// in parallel; stop rules are then applied in circuit-index order, so the
/// outcome does not depend on the number of worker threads. Circuits that
/// fail to compile are recorded and skipped; too many failures abort.
pub fn run_protocol(
    m: usize,
    profile: &DeviceProfile,
    subset: Option<Vec<usize>>,
    config: &SuiteConfig,
) -> Result<SuiteResult> {
    let started_at = Utc::now();
    if config.shots == 0 {
        return Err(Error::Undefined("shots must be positive".into()));
    }
    if config.max_circuits == 0 {
        return Err(Error::NoData("max_circuits is zero".into()));
    }
    let d = config.depth.unwrap_or(m);
    let spec = QvSpec {
        m,
        d,
        count: config.max_circuits,
        base_seed: config.seed,
    };
    spec.validate()?;
    let subset = match subset {
        Some(s) => s,
        None => connected_subsets(&profile.graph, m).into_iter().next().ok_or_else(|| {
            Error::Layout(format!("{} has no connected {m}-qubit subset", profile.name))
        })?,
    };
    let noise = config.noise.unwrap_or(profile.noise);
    noise.validate()?;

    let mut circuits = Vec::new();
    let mut counts = Vec::new();
    let mut failures = Vec::new();
    let mut sum = 0.0;
    let mut cumulative = Vec::new();
    let mut stop_reason = StopReason::MaxCircuits;
    let failure_cap = (config.max_circuits as f64 * config.max_compile_failure_fraction).floor() as usize;
    let batch = config.batch_size.max(1);

    'outer: for start in (0..config.max_circuits).step_by(batch) {
        let end = (start + batch).min(config.max_circuits);
        let outcomes: Vec<_> = (start..end)
            .into_par_iter()
            .map(|i| execute(&spec, i as u64, profile, &subset, &noise, config))
            .collect::<Result<_>>()?;
        for (i, outcome) in (start..end).zip(outcomes) {
            match outcome {
                Ok(ex) => {
                    sum += ex.result.hop;
                    let k = circuits.len() + 1;
                    let point = CumulativePoint::from_mean(sum / k as f64, k, config.sigma);
                    circuits.push(ex.result);
                    counts.push(ex.counts);
                    cumulative.push(point);
                    let v = Verdict::from_point(&point);
                    let rule = &config.stop_rule;
                    if rule.stop_on_pass
                        && k >= rule.min_circuits
                        && v.passed
                        && point.z_conf > config.early_stop_conf
                    {
                        stop_reason = StopReason::Passed;
                        break 'outer;
                    }
                    if rule.stop_when_hopeless
                        && k >= rule.hopeless_after
                        && point.mean + 2.0 * point.sigma < THRESHOLD
                    {
                        stop_reason = StopReason::Hopeless;
                        break 'outer;
                    }
                }
                Err(message) => {
                    failures.push(CompileFailure {
                        circuit_index: i as u64,
                        message,
                    });
                    if failures.len() > failure_cap {
                        return Err(Error::Aborted(format!(
                            "{} of {} circuits failed to compile; last: {}",
                            failures.len(),
                            i + 1,
                            failures.last().unwrap().message
                        )));
                    }
                }
            }
        }
    }
    let attempted = circuits.len() + failures.len();
    if failures.len() as f64 > config.max_compile_failure_fraction * attempted as f64 {
        return Err(Error::Aborted(format!(
            "{} of {attempted} circuits failed to compile",
            failures.len()
        )));
    }
    let last = cumulative
        .last()
        .ok_or_else(|| Error::NoData("no circuit compiled".into()))?;
    Ok(SuiteResult {
        schema: RESULT_SCHEMA,
        m,
        d,
        profile: profile.name.clone(),
        gateset_family: profile.gateset_family.name().to_string(),
        subset,
        noise,
        config: config.clone(),
        started_at,
        finished_at: Utc::now(),
        stop_reason,
        verdict: Verdict::from_point(last),
        circuits,
        compile_failures: failures,
        cumulative,
        counts,
    })
}

/// Largest passing width and any failing widths below it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumVolume {
    /// `None` when no width passed, reported as "<2".
    pub log2_qv: Option<usize>,
    pub gaps: Vec<usize>,
}

impl QuantumVolume {
    pub fn volume(&self) -> Option<u128> {
        self.log2_qv.map(|m| 1u128 << m)
    }
}

impl std::fmt::Display for QuantumVolume {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.log2_qv {
            Some(m) => write!(f, "{m}"),
            None => f.write_str("<2"),
        }
    }
}

pub fn quantum_volume(results: &BTreeMap<usize, Verdict>) -> Result<QuantumVolume> {
    if results.is_empty() {
        return Err(Error::NoData("no verdicts".into()));
    }
    let log2_qv = results.iter().rev().find(|(_, v)| v.passed).map(|(m, _)| *m);
    let gaps: Vec<usize> = match log2_qv {
        Some(best) => results
            .iter()
            .filter(|(m, v)| **m < best && !v.passed)
            .map(|(m, _)| *m)
            .collect(),
        None => Vec::new(),
    };
    if !gaps.is_empty() {
        log::warn!("widths {gaps:?} failed below the passing width {log2_qv:?}");
    }
    Ok(QuantumVolume { log2_qv, gaps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub started_at: DateTime<Utc>,
    pub k: usize,
    pub mean: f64,
    pub mean_minus_2sigma: f64,
}

/// Final (mean, mean − 2σ) of repeated suites on the same width and subset,
/// in start-time order.
pub fn drift_series(suites: &[SuiteResult]) -> Result<Vec<DriftPoint>> {
    if suites.len() < 2 {
        return Err(Error::IncompatibleSeries(format!(
            "a drift series needs at least two suites, got {}",
            suites.len()
        )));
    }
    let first = &suites[0];
    for s in &suites[1..] {
        if s.m != first.m || s.subset != first.subset {
            return Err(Error::IncompatibleSeries(format!(
                "m={} on {:?} cannot be combined with m={} on {:?}",
                first.m, first.subset, s.m, s.subset
            )));
        }
    }
    let mut points: Vec<DriftPoint> = suites
        .iter()
        .map(|s| {
            let p = s.final_point().copied().unwrap_or(CumulativePoint {
                k: 0,
                mean: f64::NAN,
                sigma: f64::NAN,
                z: f64::NAN,
                z_conf: f64::NAN,
            });
            DriftPoint {
                started_at: s.started_at,
                k: p.k,
                mean: p.mean,
                mean_minus_2sigma: p.mean - 2.0 * p.sigma,
            }
        })
        .collect();
    points.sort_by_key(|p| p.started_at);
    Ok(points)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::qvgen::QvSpec;
    use crate::sim::sample_counts;
    use crate::topology::{builtin_profile, CouplingGraph};
    use crate::gates::VendorFamily;

    fn counts(pairs: &[(&str, u64)]) -> Counts {
        Counts {
            counts: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            shots: pairs.iter().map(|(_, v)| v).sum(),
        }
    }

    fn hs_00() -> HeavySet {
        heavy_set(&crate::sim::Distribution {
            m: 2,
            probs: vec![1.0, 0.0, 0.0, 0.0],
        })
    }

    #[test]
    fn hop_examples() {
        assert_eq!(hop_of(&counts(&[("00", 100)]), &hs_00()).unwrap(), 1.0);
        assert_eq!(hop_of(&counts(&[("00", 50), ("11", 50)]), &hs_00()).unwrap(), 0.5);
        assert!(matches!(hop_of(&Counts::default(), &hs_00()), Err(Error::Undefined(_))));
        assert!(hop_of(&counts(&[("000", 3)]), &hs_00()).is_err());
    }

    #[test]
    fn sampled_hop_converges_to_ideal() {
        let c = generate_qv_circuit(&QvSpec::square(4, 6), 0);
        let d = ideal_distribution(&c).unwrap();
        let hs = heavy_set(&d);
        let cnt = sample_counts(&c, 100_000, &NoiseModel::IDEAL, ShotKey { base_seed: 1, circuit_index: 0 }).unwrap();
        assert!((hop_of(&cnt, &hs).unwrap() - ideal_hop(&d, &hs)).abs() < 0.01);
    }

    #[test]
    fn stats_edge_cases() {
        assert!(cumulative_stats(&[]).is_empty());
        let p = cumulative_stats(&[1.0])[0];
        assert_eq!((p.mean, p.sigma, p.z, p.z_conf), (1.0, 0.0, f64::INFINITY, 1.0));
        let p = cumulative_stats(&[0.0, 0.0])[1];
        assert_eq!((p.sigma, p.z, p.z_conf), (0.0, f64::NEG_INFINITY, 0.0));
        for k in [1, 7, 100, 1000] {
            let p = CumulativePoint::from_mean(2.0 / 3.0, k, SigmaFormula::Scaled);
            assert_eq!(p.z, 0.0);
            assert!((p.z_conf - 0.5).abs() < 1e-12);
        }
    }

    // Reference values computed with 30-digit arithmetic.
    #[test]
    fn stats_regression_lock() {
        let p = CumulativePoint::from_mean(0.85, 100, SigmaFormula::Scaled);
        assert!((p.sigma / 0.03292035844276304352402376 - 1.0).abs() < 1e-13);
        assert!((p.z / 5.568995661213279181303519 - 1.0).abs() < 1e-13);
        assert!(((1.0 - p.z_conf) / 1.281059326459268414375484e-8 - 1.0).abs() < 1e-6);
        let t = CumulativePoint::from_mean(0.85, 100, SigmaFormula::Textbook);
        assert!((t.sigma / 0.035707142142714249989997 - 1.0).abs() < 1e-13);
        assert!((t.z / 5.134360308102702612940745 - 1.0).abs() < 1e-13);
        assert!((t.z_conf - 0.9999998584473621750328312).abs() < 1e-15);
        let hops = vec![0.85; 100];
        let last = *cumulative_stats(&hops).last().unwrap();
        assert!((last.mean - 0.85).abs() < 1e-14);
    }

    #[test]
    fn verdict_examples() {
        let v = verdict(&[0.9; 500]).unwrap();
        assert!(v.passed && v.criterion1 && v.criterion2 && v.criterion3);
        let v = verdict(&[0.5; 500]).unwrap();
        assert!(!v.criterion1 && !v.criterion2 && !v.criterion3 && !v.passed);
        // Mean placing z_conf exactly at 0.95 with k = 100.
        let mean = 0.729086364923772753773075;
        let p = *cumulative_stats(&vec![mean; 100]).last().unwrap();
        assert!((p.z_conf - 0.95).abs() < 1e-12, "{}", p.z_conf);
        let v = Verdict::from_point(&p);
        assert!(v.criterion1 && !v.criterion2 && !v.criterion3 && !v.passed);
        assert!(matches!(verdict(&[]), Err(Error::NoData(_))));
    }

    #[test]
    fn quantum_volume_examples() {
        let pass = verdict(&[0.9; 200]).unwrap();
        let fail = verdict(&[0.5; 200]).unwrap();
        let qv = quantum_volume(&[(2, pass), (3, pass), (4, fail)].into()).unwrap();
        assert_eq!(qv.log2_qv, Some(3));
        assert_eq!(qv.volume(), Some(8));
        let qv = quantum_volume(&[(2, fail)].into()).unwrap();
        assert_eq!(qv.to_string(), "<2");
        let qv = quantum_volume(&[(3, pass), (4, pass), (5, fail), (6, pass)].into()).unwrap();
        assert_eq!((qv.log2_qv, qv.gaps.clone()), (Some(6), vec![5]));
        assert!(matches!(quantum_volume(&BTreeMap::new()), Err(Error::NoData(_))));
    }

    fn ideal_a2a(n: usize) -> DeviceProfile {
        DeviceProfile::new("ideal", CouplingGraph::all_to_all(n), VendorFamily::IonAllPairsZz, NoiseModel::IDEAL)
    }

    #[test]
    fn noiseless_suite_passes() {
        let cfg = SuiteConfig { max_circuits: 500, seed: 3, ..Default::default() };
        let r = run_protocol(4, &ideal_a2a(4), None, &cfg).unwrap();
        assert!(r.verdict.passed);
        assert_eq!(r.stop_reason, StopReason::Passed);
        assert!(r.circuits.len() <= 500);
        assert_eq!(r.cumulative.len(), r.circuits.len());
        assert_eq!(r.counts.len(), r.circuits.len());
    }

    #[test]
    fn depolarized_suite_fails() {
        let cfg = SuiteConfig {
            max_circuits: 200,
            seed: 3,
            noise: Some(NoiseModel::new(0.0, 0.0, 1.0).unwrap()),
            ..Default::default()
        };
        let r = run_protocol(3, &ideal_a2a(3), None, &cfg).unwrap();
        assert!(!r.verdict.passed);
        assert!(r.final_point().unwrap().mean < 2.0 / 3.0);
        assert_eq!(r.stop_reason, StopReason::Hopeless);
    }

    #[test]
    fn single_circuit_suite() {
        let cfg = SuiteConfig { max_circuits: 1, ..Default::default() };
        let r = run_protocol(3, &builtin_profile("lima-like").unwrap(), Some(vec![0, 1, 3]), &cfg).unwrap();
        assert_eq!(r.circuits.len(), 1);
        assert_eq!(r.cumulative[0].k, 1);
        assert_eq!(r.stop_reason, StopReason::MaxCircuits);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = SuiteConfig { max_circuits: 120, seed: 11, batch_size: 7, ..Default::default() };
        let p = builtin_profile("lima-like").unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_protocol(3, &p, None, &cfg).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.cumulative, b.cumulative);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn compile_failures_abort() {
        let p = builtin_profile("lima-like").unwrap();
        let cfg = SuiteConfig { max_circuits: 10, ..Default::default() };
        let r = run_protocol(3, &p, Some(vec![0, 2, 4]), &cfg);
        assert!(matches!(r, Err(Error::Aborted(_))));
    }

    #[test]
    fn json_and_csv() {
        let cfg = SuiteConfig { max_circuits: 5, ..Default::default() };
        let r = run_protocol(2, &ideal_a2a(2), None, &cfg).unwrap();
        let back = SuiteResult::from_json(&r.to_json()).unwrap();
        assert_eq!(back.cumulative, r.cumulative);
        assert_eq!(back.circuits, r.circuits);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("k,circuit_index,hop,ideal_hop,mean,mean_minus_2sigma,z_conf\n"));
        let bad = r.to_json().replacen("\"schema\": 1", "\"schema\": 2", 1);
        assert!(matches!(SuiteResult::from_json(&bad), Err(Error::Schema(_))));
        // Infinite z survives the round trip.
        let p = CumulativePoint::from_mean(1.0, 3, SigmaFormula::Scaled);
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<CumulativePoint>(&text).unwrap(), p);
    }

    #[test]
    fn drift() {
        let p = ideal_a2a(3);
        let mk = |f2: f64| {
            let cfg = SuiteConfig {
                max_circuits: 150,
                seed: 21,
                noise: Some(NoiseModel::new(f2, 1.0, 1.0).unwrap()),
                stop_rule: StopRule { stop_on_pass: false, stop_when_hopeless: false, ..Default::default() },
                ..Default::default()
            };
            run_protocol(3, &p, None, &cfg).unwrap()
        };
        let (a, b) = (mk(0.99), mk(0.99));
        let s = drift_series(&[a.clone(), b]).unwrap();
        assert_eq!((s[0].mean, s[0].mean_minus_2sigma), (s[1].mean, s[1].mean_minus_2sigma));
        let c = mk(0.95);
        let s = drift_series(&[a.clone(), c]).unwrap();
        assert!(s[1].mean <= s[0].mean);
        assert!(matches!(drift_series(std::slice::from_ref(&a)), Err(Error::IncompatibleSeries(_))));
        let mut other = a.clone();
        other.subset = vec![2, 1, 0];
        assert!(matches!(drift_series(&[a, other]), Err(Error::IncompatibleSeries(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn prefix_property(hops in proptest::collection::vec(0.0f64..=1.0, 1..60), cut in 0usize..60) {
                let cut = cut.min(hops.len());
                let full = cumulative_stats(&hops);
                let part = cumulative_stats(&hops[..cut]);
                prop_assert_eq!(&full[..cut], &part[..]);
            }

            #[test]
            fn criterion_ordering(hops in proptest::collection::vec(0.0f64..=1.0, 1..300)) {
                for p in cumulative_stats(&hops) {
                    let v = Verdict::from_point(&p);
                    if v.criterion3 {
                        prop_assert!(v.criterion1 && v.criterion2);
                    }
                    if v.criterion2 {
                        prop_assert!(v.criterion1);
                    }
                }
            }

            #[test]
            fn scaled_sigma_formula(mean in 0.0f64..=1.0, k in 1usize..5000) {
                let p = CumulativePoint::from_mean(mean, k, SigmaFormula::Scaled);
                prop_assert_eq!(p.sigma, mean * ((1.0 - mean) / k as f64).sqrt());
                prop_assert!((0.0..=1.0).contains(&p.z_conf));
            }
        }
    }
}
