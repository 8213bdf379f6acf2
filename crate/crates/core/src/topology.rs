//! Coupling graphs, device profiles and connected-subset enumeration.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::VendorFamily;
use crate::sim::NoiseModel;

pub const PROFILE_SCHEMA: u32 = 1;

/// Undirected coupling graph; edges are stored as `(low, high)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    n_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl CouplingGraph {
    pub fn new(n_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Profile(format!("self-loop on qubit {a}")));
            }
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::Profile(format!(
                    "edge ({a}, {b}) out of range for {n_qubits} qubits"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adj = vec![Vec::new(); n_qubits];
        for &(a, b) in &set {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(CouplingGraph {
            n_qubits,
            edges: set,
            adj,
        })
    }

    pub fn all_to_all(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Self::new(n, edges).expect("complete graph is valid")
    }

    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("line is valid")
    }

    pub fn ring(n: usize) -> Self {
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).filter(|(a, b)| a != b))
            .expect("ring is valid")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n_qubits * self.n_qubits.saturating_sub(1) / 2
    }

    /// Whether the subgraph induced by `vertices` is connected (BFS).
    pub fn is_connected_subset(&self, vertices: &[usize]) -> bool {
        let Some(&start) = vertices.first() else {
            return false;
        };
        let mut inside = vec![false; self.n_qubits];
        for &v in vertices {
            if v >= self.n_qubits {
                return false;
            }
            inside[v] = true;
        }
        let mut seen = vec![false; self.n_qubits];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if inside[u] && !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        let distinct: BTreeSet<_> = vertices.iter().collect();
        reached == distinct.len()
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.n_qubits).collect();
        self.is_connected_subset(&all)
    }

    /// Induced subgraph on `vertices`, relabeled so `vertices[i]` becomes `i`.
    pub fn induced(&self, vertices: &[usize]) -> CouplingGraph {
        let mut pos = vec![usize::MAX; self.n_qubits];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|(a, b)| pos[*a] != usize::MAX && pos[*b] != usize::MAX)
            .map(|&(a, b)| (pos[a], pos[b]));
        CouplingGraph::new(vertices.len(), edges).expect("induced edges are in range")
    }

    /// All-pairs shortest-path hop counts; `usize::MAX` marks unreachable pairs.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        (0..self.n_qubits)
            .map(|s| {
                let mut d = vec![usize::MAX; self.n_qubits];
                d[s] = 0;
                let mut queue = VecDeque::from([s]);
                while let Some(v) = queue.pop_front() {
                    for &u in &self.adj[v] {
                        if d[u] == usize::MAX {
                            d[u] = d[v] + 1;
                            queue.push_back(u);
                        }
                    }
                }
                d
            })
            .collect()
    }
}

/// Walks every connected `k`-subset containing `root` as its minimum vertex,
/// each exactly once (ESU with exclusive-neighborhood extension).
fn esu_from_root(g: &CouplingGraph, root: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    // cover[u] > 0 iff u is in the current subset or adjacent to it.
    let mut cover = vec![0u32; g.n_qubits];
    let mut sub = vec![root];
    cover[root] += 1;
    for &u in g.neighbors(root) {
        cover[u] += 1;
    }
    let ext: Vec<usize> = g.neighbors(root).iter().copied().filter(|&u| u > root).collect();
    extend(g, root, k, &mut sub, ext, &mut cover, visit);
}

fn extend(
    g: &CouplingGraph,
    root: usize,
    k: usize,
    sub: &mut Vec<usize>,
    mut ext: Vec<usize>,
    cover: &mut [u32],
    visit: &mut impl FnMut(&[usize]),
) {
    if sub.len() == k {
        visit(sub);
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        next.extend(g.neighbors(w).iter().copied().filter(|&u| u > root && cover[u] == 0));
        sub.push(w);
        cover[w] += 1;
        for &u in g.neighbors(w) {
            cover[u] += 1;
        }
        extend(g, root, k, sub, next, cover, visit);
        for &u in g.neighbors(w) {
            cover[u] -= 1;
        }
        cover[w] -= 1;
        sub.pop();
    }
}

/// Every `n`-vertex subset inducing a connected subgraph, each sorted
/// ascending, the list in lexicographic order.
pub fn connected_subsets(g: &CouplingGraph, n: usize) -> Vec<Vec<usize>> {
    if n == 0 || n > g.n_qubits {
        return Vec::new();
    }
    let mut all: Vec<Vec<usize>> = (0..g.n_qubits)
        .into_par_iter()
        .flat_map_iter(|root| {
            let mut found = Vec::new();
            esu_from_root(g, root, n, &mut |s| {
                let mut s = s.to_vec();
                s.sort_unstable();
                found.push(s);
            });
            found
        })
        .collect();
    all.sort_unstable();
    all
}

/// Number of connected `n`-subsets, counted without storing them.
pub fn subset_count(g: &CouplingGraph, n: usize) -> u64 {
    if n == 0 || n > g.n_qubits {
        return 0;
    }
    (0..g.n_qubits)
        .into_par_iter()
        .map(|root| {
            let mut count = 0u64;
            esu_from_root(g, root, n, &mut |_| count += 1);
            count
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub name: String,
    pub graph: CouplingGraph,
    pub gateset_family: VendorFamily,
    pub noise: NoiseModel,
    pub vendor_qv: Option<u64>,
    pub provenance: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileFile {
    schema: u32,
    name: String,
    n_qubits: usize,
    edges: Vec<[usize; 2]>,
    gateset_family: String,
    f1: f64,
    f2: f64,
    f_spam: f64,
    #[serde(default)]
    vendor_qv: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
}

impl DeviceProfile {
    pub fn new(name: impl Into<String>, graph: CouplingGraph, family: VendorFamily, noise: NoiseModel) -> Self {
        DeviceProfile {
            name: name.into(),
            graph,
            gateset_family: family,
            noise,
            vendor_qv: None,
            provenance: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let schema = raw.get("schema").and_then(|s| s.as_u64());
        if schema != Some(PROFILE_SCHEMA as u64) {
            return Err(Error::Schema(format!(
                "unsupported profile schema {}",
                raw.get("schema").map_or("(missing)".into(), |s| s.to_string())
            )));
        }
        let file: ProfileFile = serde_json::from_value(raw).map_err(|e| Error::Schema(e.to_string()))?;
        let mut bad = Vec::new();
        for (k, v) in [("f1", file.f1), ("f2", file.f2), ("f_spam", file.f_spam)] {
            if !(0.0..=1.0).contains(&v) {
                bad.push(format!("{k}={v}"));
            }
        }
        let family = file.gateset_family.parse::<VendorFamily>();
        if family.is_err() {
            bad.push(format!("gateset_family={}", file.gateset_family));
        }
        let graph = CouplingGraph::new(file.n_qubits, file.edges.iter().map(|e| (e[0], e[1])));
        if let Err(e) = &graph {
            bad.push(format!("edges: {e}"));
        }
        if !bad.is_empty() {
            return Err(Error::Schema(format!(
                "profile {}: invalid fields: {}",
                file.name,
                bad.join(", ")
            )));
        }
        Ok(DeviceProfile {
            name: file.name,
            graph: graph?,
            gateset_family: family?,
            noise: NoiseModel {
                f2: file.f2,
                f1: file.f1,
                f_spam: file.f_spam,
            },
            vendor_qv: file.vendor_qv,
            provenance: file.provenance,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ProfileFile {
            schema: PROFILE_SCHEMA,
            name: self.name.clone(),
            n_qubits: self.graph.n_qubits,
            edges: self.graph.edges().map(|(a, b)| [a, b]).collect(),
            gateset_family: self.gateset_family.name().to_string(),
            f1: self.noise.f1,
            f2: self.noise.f2,
            f_spam: self.noise.f_spam,
            vendor_qv: self.vendor_qv,
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&file).expect("profile serializes")
    }
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<DeviceProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DeviceProfile::from_json(&text)
}

const BUILTIN: [(&str, &str); 12] = [
    ("lima-like", include_str!("../profiles/lima-like.json")),
    ("bogota-like", include_str!("../profiles/bogota-like.json")),
    ("jakarta-like", include_str!("../profiles/jakarta-like.json")),
    ("guadalupe-like", include_str!("../profiles/guadalupe-like.json")),
    ("montreal-like", include_str!("../profiles/montreal-like.json")),
    ("brooklyn-like", include_str!("../profiles/brooklyn-like.json")),
    ("washington-like", include_str!("../profiles/washington-like.json")),
    ("lucy-like", include_str!("../profiles/lucy-like.json")),
    ("aspen-11-like", include_str!("../profiles/aspen-11-like.json")),
    ("aspen-m-1-like", include_str!("../profiles/aspen-m-1-like.json")),
    ("h1-2-like", include_str!("../profiles/h1-2-like.json")),
    ("harmony-like", include_str!("../profiles/harmony-like.json")),
];

pub fn builtin_profile_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

pub fn builtin_profile(name: &str) -> Result<DeviceProfile> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| DeviceProfile::from_json(text))
        .unwrap_or_else(|| Err(Error::Profile(format!("no built-in profile named `{name}`"))))
}

/// A built-in profile name or a path to a profile file.
pub fn resolve_profile(name_or_path: &str) -> Result<DeviceProfile> {
    if BUILTIN.iter().any(|(n, _)| *n == name_or_path) {
        builtin_profile(name_or_path)
    } else {
        load_profile(name_or_path)
    }
}
