use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use qvbench_core::protocol::{drift_series, quantum_volume, SuiteResult, Verdict};

use crate::commands::join;
use crate::{QvArgs, ReportArgs};

fn collect(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("reading {}", path.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for e in entries {
            if e.is_dir() {
                collect(&e, out)?;
            } else if e.file_name().is_some_and(|n| n == "result.json") {
                out.push(e);
            }
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

fn load_all(inputs: &[PathBuf]) -> Result<Vec<SuiteResult>> {
    let mut files = Vec::new();
    for p in inputs {
        collect(p, &mut files)?;
    }
    if files.is_empty() {
        bail!("no result files found");
    }
    files
        .iter()
        .map(|f| {
            let text = fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
            SuiteResult::from_json(&text).with_context(|| format!("loading {}", f.display()))
        })
        .collect()
}

fn write(path: PathBuf, text: String) -> Result<()> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn report(a: &ReportArgs) -> Result<bool> {
    let suites = load_all(&a.inputs)?;
    let curves = a.out.join("curves");
    fs::create_dir_all(&curves).with_context(|| format!("creating {}", curves.display()))?;

    // Per-suite cumulative curves; repeated (profile, m, subset) runs get a sequence number.
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for s in &suites {
        let stem = format!("{}_m{}_q{}", s.profile, s.m, s.subset.iter().map(|q| q.to_string()).collect::<Vec<_>>().join("-"));
        let n = seen.entry(stem.clone()).or_insert(0);
        *n += 1;
        write(curves.join(format!("{stem}_{}.csv", n)), s.to_csv())?;
    }

    // Per-qubit tallies of passing subsets, per profile and width.
    let mut heat: BTreeMap<String, BTreeMap<usize, BTreeMap<usize, u64>>> = BTreeMap::new();
    let mut table: BTreeMap<(String, usize), (u64, u64)> = BTreeMap::new();
    for s in &suites {
        let per_qubit = heat.entry(s.profile.clone()).or_default().entry(s.m).or_default();
        let row = table.entry((s.profile.clone(), s.m)).or_default();
        row.1 += 1;
        if s.verdict.passed {
            row.0 += 1;
            for &q in &s.subset {
                *per_qubit.entry(q).or_insert(0) += 1;
            }
        }
    }
    write(a.out.join("heatmap.json"), serde_json::to_string_pretty(&heat)? + "\n")?;

    let mut summary = String::from("profile,m,passed,total\n");
    for ((profile, m), (passed, total)) in &table {
        summary.push_str(&format!("{profile},{m},{passed},{total}\n"));
        println!("{profile} m={m}: {passed}/{total}");
    }
    write(a.out.join("summary.csv"), summary)?;

    let mut groups: BTreeMap<(String, usize, Vec<usize>), Vec<SuiteResult>> = BTreeMap::new();
    for s in suites {
        groups.entry((s.profile.clone(), s.m, s.subset.clone())).or_default().push(s);
    }
    let mut drift = Vec::new();
    for ((profile, m, subset), group) in groups {
        if group.len() >= 2 {
            drift.push(serde_json::json!({
                "profile": profile,
                "m": m,
                "subset": subset,
                "points": drift_series(&group)?,
            }));
        }
    }
    write(a.out.join("drift.json"), serde_json::to_string_pretty(&drift)? + "\n")?;
    Ok(true)
}

pub fn qv(a: &QvArgs) -> Result<bool> {
    let suites = load_all(&a.inputs)?;
    // A width passes when any of its suites passed.
    let mut by_m: BTreeMap<usize, Verdict> = BTreeMap::new();
    for s in &suites {
        by_m.entry(s.m)
            .and_modify(|v| {
                if s.verdict.passed && !v.passed {
                    *v = s.verdict;
                }
            })
            .or_insert(s.verdict);
    }
    let result = quantum_volume(&by_m)?;
    if a.json {
        let doc = serde_json::json!({
            "log2_qv": result.log2_qv,
            "qv": result.volume().map(|v| v.to_string()),
            "gaps": result.gaps,
            "widths": by_m.iter().map(|(m, v)| (m.to_string(), v.passed)).collect::<BTreeMap<_, _>>(),
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        for (m, v) in &by_m {
            println!("m={m}: {}", if v.passed { "pass" } else { "fail" });
        }
        match result.volume() {
            Some(v) => println!("log2 QV = {result} (QV {v})"),
            None => println!("log2 QV = {result}"),
        }
        if !result.gaps.is_empty() {
            println!("warning: widths [{}] failed below the passing width", join(&result.gaps));
        }
    }
    Ok(result.log2_qv.is_some())
}
