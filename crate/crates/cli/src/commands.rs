use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qvbench_core::circuit::{parse_with_warnings, serialize};
use qvbench_core::compile::LayoutStep;
use qvbench_core::protocol::{SigmaFormula, StopRule, SuiteResult};
use qvbench_core::qvgen::write_suite;
use qvbench_core::topology::resolve_profile;
use qvbench_core::{
    compile_to_device, connected_subsets, run_protocol, CompileRequest, GateCensus, NoiseModel,
    QvSpec, SuiteConfig,
};

use crate::{CompileArgs, EnumerateArgs, GenerateArgs, RunArgs};

pub fn generate(a: &GenerateArgs) -> Result<bool> {
    let spec = QvSpec {
        m: a.m,
        d: a.d.unwrap_or(a.m),
        count: a.count,
        base_seed: a.seed,
    };
    let manifest = write_suite(&spec, &a.out)?;
    println!(
        "wrote {} circuits (m={}, d={}, seed={}) to {}",
        manifest.files.len(),
        spec.m,
        spec.d,
        spec.base_seed,
        a.out.display()
    );
    Ok(true)
}

pub fn enumerate(a: &EnumerateArgs) -> Result<bool> {
    let profile = resolve_profile(&a.profile)?;
    let n_qubits = profile.graph.n_qubits();
    if a.n == 0 || a.n > n_qubits {
        bail!("n must be between 1 and {n_qubits} for {}", profile.name);
    }
    let subsets = connected_subsets(&profile.graph, a.n);
    if a.json {
        let doc = serde_json::json!({
            "profile": profile.name,
            "n": a.n,
            "count": subsets.len(),
            "subsets": subsets,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        for s in &subsets {
            println!("{}", join(s));
        }
        eprintln!("{} connected {}-qubit subsets on {}", subsets.len(), a.n, profile.name);
    }
    Ok(true)
}

pub(crate) fn join(s: &[usize]) -> String {
    s.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

pub(crate) fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad qubit index `{t}`")))
        .collect()
}

fn parse_widths(text: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = text.split_once('-') {
        let lo: usize = lo.trim().parse().with_context(|| format!("bad width range `{text}`"))?;
        let hi: usize = hi.trim().parse().with_context(|| format!("bad width range `{text}`"))?;
        if lo > hi {
            bail!("empty width range `{text}`");
        }
        Ok((lo..=hi).collect())
    } else {
        parse_list(text)
    }
}

#[derive(Serialize)]
struct LayoutRecord<'a> {
    source: String,
    profile: &'a str,
    physical_qubits: &'a [usize],
    initial_layout: &'a [usize],
    final_layout: &'a [usize],
    layout_history: &'a [LayoutStep],
    swap_count: usize,
    census: GateCensus,
}

pub fn compile(a: &CompileArgs) -> Result<bool> {
    let profile = resolve_profile(&a.profile)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for input in &a.inputs {
        let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
        let (circuit, warnings) =
            parse_with_warnings(&text).with_context(|| format!("parsing {}", input.display()))?;
        for w in warnings {
            log::warn!("{}: {w}", input.display());
        }
        let mut req = CompileRequest::new(&circuit, &profile).seed(a.seed).spill(a.allow_spill);
        if a.subset != "auto" {
            req = req.subset(parse_list(&a.subset)?);
        }
        let cc = compile_to_device(&req).with_context(|| format!("compiling {}", input.display()))?;
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "circuit".into());
        let qasm = a.out.join(format!("{stem}.compiled.qasm"));
        fs::write(&qasm, serialize(&cc.circuit)).with_context(|| format!("writing {}", qasm.display()))?;
        let record = LayoutRecord {
            source: input.display().to_string(),
            profile: &profile.name,
            physical_qubits: &cc.physical_qubits,
            initial_layout: &cc.initial_layout,
            final_layout: &cc.final_layout,
            layout_history: &cc.layout_history,
            swap_count: cc.swap_count,
            census: cc.census,
        };
        let layout = a.out.join(format!("{stem}.layout.json"));
        fs::write(&layout, serde_json::to_string_pretty(&record)? + "\n")
            .with_context(|| format!("writing {}", layout.display()))?;
        println!(
            "{}: {} two-qubit, {} one-qubit, depth {}, {} swaps on [{}]",
            input.display(),
            cc.census.two_qubit_count,
            cc.census.one_qubit_count,
            cc.census.depth,
            cc.swap_count,
            join(&cc.physical_qubits)
        );
    }
    Ok(true)
}

fn suite_config(a: &RunArgs) -> SuiteConfig {
    SuiteConfig {
        max_circuits: a.count,
        shots: a.shots,
        early_stop_conf: a.early_stop_conf,
        stop_rule: StopRule {
            stop_on_pass: !a.no_early_stop,
            min_circuits: a.min_circuits,
            stop_when_hopeless: !a.no_hopeless_stop,
            hopeless_after: a.hopeless_after,
        },
        seed: a.seed,
        depth: None,
        sigma: if a.textbook_sigma {
            SigmaFormula::Textbook
        } else {
            SigmaFormula::Scaled
        },
        noise: a.ideal.then_some(NoiseModel::IDEAL),
        allow_spill: a.allow_spill,
        ..SuiteConfig::default()
    }
}

fn write_suite_files(dir: &Path, r: &SuiteResult) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let json = dir.join("result.json");
    fs::write(&json, r.to_json() + "\n").with_context(|| format!("writing {}", json.display()))?;
    let csv = dir.join("cumulative.csv");
    fs::write(&csv, r.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    let path = dir.join("counts.jsonl");
    let mut f = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    for rec in &r.counts {
        writeln!(f, "{}", serde_json::to_string(rec)?)?;
    }
    Ok(())
}

pub fn run(a: &RunArgs) -> Result<bool> {
    let mut profile = resolve_profile(&a.profile)?;
    if !a.ideal {
        let n = &mut profile.noise;
        n.f2 = a.f2.unwrap_or(n.f2);
        n.f1 = a.f1.unwrap_or(n.f1);
        n.f_spam = a.f_spam.unwrap_or(n.f_spam);
        n.validate()?;
    }
    let config = suite_config(a);
    let widths = parse_widths(&a.m)?;
    let mut any_passed = false;
    for m in widths {
        if m < 2 || m > profile.graph.n_qubits() {
            bail!("m={m} does not fit {} ({} qubits)", profile.name, profile.graph.n_qubits());
        }
        let subsets: Vec<Option<Vec<usize>>> = match a.subset.as_str() {
            "auto" => vec![None],
            "enumerate" => connected_subsets(&profile.graph, m).into_iter().map(Some).collect(),
            list => {
                let s = parse_list(list)?;
                if s.len() != m {
                    bail!("subset [{list}] has {} qubits but m={m}", s.len());
                }
                vec![Some(s)]
            }
        };
        let total = subsets.len();
        let mut passed = 0;
        for subset in subsets {
            let r = run_protocol(m, &profile, subset, &config)?;
            let dir = a
                .out
                .join(&profile.name)
                .join(format!("m{m}"))
                .join(format!("q{}", r.subset.iter().map(|q| q.to_string()).collect::<Vec<_>>().join("-")));
            write_suite_files(&dir, &r)?;
            let p = r.final_point().expect("a suite has at least one circuit");
            println!(
                "m={m} subset=[{}] k={} mean={:.4} mean-2sigma={:.4} z_conf={:.4} {} ({:?})",
                join(&r.subset),
                p.k,
                p.mean,
                p.mean - 2.0 * p.sigma,
                p.z_conf,
                if r.verdict.passed { "PASS" } else { "FAIL" },
                r.stop_reason
            );
            if r.verdict.passed {
                passed += 1;
            }
        }
        if total > 1 {
            println!("m={m}: {passed}/{total} subsets passed");
        }
        any_passed |= passed > 0;
    }
    Ok(any_passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_specs() {
        assert_eq!(parse_widths("3").unwrap(), vec![3]);
        assert_eq!(parse_widths("2-5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_widths("2,4").unwrap(), vec![2, 4]);
        assert!(parse_widths("5-2").is_err());
        assert!(parse_widths("x").is_err());
    }
}
