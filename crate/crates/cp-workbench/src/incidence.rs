//! Finite two-sorted incidence structures.
//!
//! Elements are either point-like or block-like (lines, for n-gons) and every
//! incidence joins one of each. Each element carries a provenance record so
//! that completions can be replayed and golden-tested.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    PointLike,
    BlockLike,
}

impl Sort {
    pub fn other(self) -> Sort {
        match self {
            Sort::PointLike => Sort::BlockLike,
            Sort::BlockLike => Sort::PointLike,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId {
    pub sort: Sort,
    pub name: String,
}

/// Path length, with disconnection as its own variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dist {
    Finite(usize),
    Infinity,
}

impl Dist {
    pub fn finite(self) -> Option<usize> {
        match self {
            Dist::Finite(d) => Some(d),
            Dist::Infinity => None,
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Finite(d) => write!(f, "{d}"),
            Dist::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProvenanceKind {
    Generator,
    CompletionStep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: ProvenanceKind,
    pub stage: usize,
    pub parents: Vec<String>,
}

impl Provenance {
    pub fn generator() -> Self {
        Provenance { kind: ProvenanceKind::Generator, stage: 0, parents: Vec::new() }
    }

    pub fn step(stage: usize, parents: Vec<String>) -> Self {
        Provenance { kind: ProvenanceKind::CompletionStep, stage, parents }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IncidenceError {
    #[error("unknown element `{0}`")]
    IdNotFound(String),
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("incidence between `{0}` and `{1}` joins elements of the same sort")]
    SameSort(String, String),
    #[error("provenance of `{0}` is not wellfounded")]
    BadProvenance(String),
    #[error("malformed structure: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug)]
pub struct IncidenceStructure {
    labels: [String; 2],
    names: Vec<String>,
    sorts: Vec<Sort>,
    prov: Vec<Provenance>,
    index: HashMap<String, usize>,
    adj: Vec<Vec<usize>>,
}

impl Default for IncidenceStructure {
    fn default() -> Self {
        Self::new("point", "block")
    }
}

impl IncidenceStructure {
    pub fn new(point_label: &str, block_label: &str) -> Self {
        IncidenceStructure {
            labels: [point_label.to_string(), block_label.to_string()],
            names: Vec::new(),
            sorts: Vec::new(),
            prov: Vec::new(),
            index: HashMap::new(),
            adj: Vec::new(),
        }
    }

    /// Empty structure with the same sort labels.
    pub fn empty_like(&self) -> Self {
        Self::new(&self.labels[0], &self.labels[1])
    }

    pub fn sort_label(&self, sort: Sort) -> &str {
        match sort {
            Sort::PointLike => &self.labels[0],
            Sort::BlockLike => &self.labels[1],
        }
    }

    pub fn add_element(
        &mut self,
        name: &str,
        sort: Sort,
        prov: Provenance,
    ) -> Result<usize, IncidenceError> {
        if self.index.contains_key(name) {
            return Err(IncidenceError::DuplicateName(name.to_string()));
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.sorts.push(sort);
        self.prov.push(prov);
        self.adj.push(Vec::new());
        self.index.insert(name.to_string(), i);
        Ok(i)
    }

    pub fn add_generator(&mut self, name: &str, sort: Sort) -> Result<usize, IncidenceError> {
        self.add_element(name, sort, Provenance::generator())
    }

    /// Adds an incidence by index. Adding an existing incidence is a no-op.
    pub fn add_incidence(&mut self, a: usize, b: usize) -> Result<(), IncidenceError> {
        if a >= self.len() || b >= self.len() {
            return Err(IncidenceError::IdNotFound(format!("#{}", a.max(b))));
        }
        if self.sorts[a] == self.sorts[b] {
            return Err(IncidenceError::SameSort(self.names[a].clone(), self.names[b].clone()));
        }
        if let Err(pos) = self.adj[a].binary_search(&b) {
            self.adj[a].insert(pos, b);
        }
        if let Err(pos) = self.adj[b].binary_search(&a) {
            self.adj[b].insert(pos, a);
        }
        Ok(())
    }

    pub fn link(&mut self, a: &str, b: &str) -> Result<(), IncidenceError> {
        let (i, j) = (self.require(a)?, self.require(b)?);
        self.add_incidence(i, j)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize, IncidenceError> {
        self.id(name).ok_or_else(|| IncidenceError::IdNotFound(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn sort(&self, i: usize) -> Sort {
        self.sorts[i]
    }

    pub fn element(&self, i: usize) -> ElementId {
        ElementId { sort: self.sorts[i], name: self.names[i].clone() }
    }

    pub fn provenance(&self, i: usize) -> &Provenance {
        &self.prov[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn incident(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn count_sort(&self, sort: Sort) -> usize {
        self.sorts.iter().filter(|&&s| s == sort).count()
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// Element names in canonical (lexicographic) order.
    pub fn names_sorted(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.names.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }

    pub fn name_set(&self) -> BTreeSet<String> {
        self.names.iter().cloned().collect()
    }

    /// Incidence pairs as names, point-like first, sorted.
    pub fn incidence_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for a in self.indices() {
            if self.sorts[a] != Sort::PointLike {
                continue;
            }
            for &b in &self.adj[a] {
                out.push((self.names[a].clone(), self.names[b].clone()));
            }
        }
        out.sort();
        out
    }

    pub fn generators(&self) -> BTreeSet<String> {
        self.indices()
            .filter(|&i| self.prov[i].kind == ProvenanceKind::Generator)
            .map(|i| self.names[i].clone())
            .collect()
    }

    pub fn max_stage(&self) -> usize {
        self.prov.iter().map(|p| p.stage).max().unwrap_or(0)
    }

    /// Breadth-first distances from `src`, `None` when unreachable.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        self.bfs_limited(src, usize::MAX)
    }

    pub fn bfs_limited(&self, src: usize, limit: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            if du >= limit {
                continue;
            }
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn distance_idx(&self, a: usize, b: usize) -> Dist {
        match self.bfs(a)[b] {
            Some(d) => Dist::Finite(d),
            None => Dist::Infinity,
        }
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<Dist, IncidenceError> {
        let (i, j) = (self.require(a)?, self.require(b)?);
        Ok(self.distance_idx(i, j))
    }

    /// One shortest path from `a` to `b` (inclusive), if connected.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.len()];
        let mut seen = vec![false; self.len()];
        seen[a] = true;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            if u == b {
                let mut path = vec![b];
                let mut x = b;
                while x != a {
                    x = prev[x];
                    path.push(x);
                }
                path.reverse();
                return Some(path);
            }
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Component label per element.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.len()];
        let mut next = 0;
        for s in self.indices() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn girth(&self) -> Dist {
        self.shortest_cycle_below(usize::MAX)
    }

    /// True when no cycle shorter than `g` exists.
    pub fn has_girth_at_least(&self, g: usize) -> bool {
        match self.shortest_cycle_below(g) {
            Dist::Finite(c) => c >= g,
            Dist::Infinity => true,
        }
    }

    // BFS from every root over the elements numbered at least the root; a
    // non-tree edge (u,v) closes a walk of length d(u)+d(v)+1 through the
    // root, and a shortest cycle is found from its smallest element.
    // With `bound` set, search depth is cut so only cycles shorter than it
    // are guaranteed to be found.
    fn shortest_cycle_below(&self, bound: usize) -> Dist {
        let n = self.len();
        let mut best = usize::MAX;
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut touched = Vec::new();
        for root in 0..n {
            let cap = best.min(bound);
            for &t in &touched {
                dist[t] = usize::MAX;
                parent[t] = usize::MAX;
            }
            touched.clear();
            dist[root] = 0;
            touched.push(root);
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                if 2 * dist[u] + 1 >= cap {
                    break;
                }
                for &v in &self.adj[u] {
                    if v < root {
                        continue;
                    }
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        touched.push(v);
                        queue.push_back(v);
                    } else if parent[u] != v {
                        let c = dist[u] + dist[v] + 1;
                        if c < best {
                            best = c;
                        }
                    }
                }
            }
        }
        if best == usize::MAX {
            Dist::Infinity
        } else {
            Dist::Finite(best)
        }
    }

    /// Induced substructure on the given elements, keeping provenance.
    pub fn induced(&self, keep: &[usize]) -> IncidenceStructure {
        let mut out = self.empty_like();
        let mut order: Vec<usize> = keep.to_vec();
        order.sort_unstable();
        order.dedup();
        let mut map = HashMap::new();
        for &i in &order {
            let j = out.add_element(&self.names[i], self.sorts[i], self.prov[i].clone()).unwrap();
            map.insert(i, j);
        }
        for &i in &order {
            for &k in &self.adj[i] {
                if let (Some(&a), Some(&b)) = (map.get(&i), map.get(&k)) {
                    if a < b {
                        out.add_incidence(a, b).unwrap();
                    }
                }
            }
        }
        out
    }

    pub fn induced_by_names<'a, I>(&self, names: I) -> Result<IncidenceStructure, IncidenceError>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut keep = Vec::new();
        for n in names {
            keep.push(self.require(n)?);
        }
        Ok(self.induced(&keep))
    }

    /// Copy with every name passed through `f`; parents are renamed too.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> IncidenceStructure {
        let mut out = self.empty_like();
        for i in self.indices() {
            let mut p = self.prov[i].clone();
            p.parents = p.parents.iter().map(|x| f(x)).collect();
            out.add_element(&f(&self.names[i]), self.sorts[i], p).unwrap();
        }
        for i in self.indices() {
            for &j in &self.adj[i] {
                if i < j {
                    out.add_incidence(i, j).unwrap();
                }
            }
        }
        out
    }

    /// Checks the bipartite and provenance invariants.
    pub fn validate(&self) -> Result<(), IncidenceError> {
        for i in self.indices() {
            for &j in &self.adj[i] {
                if self.sorts[i] == self.sorts[j] {
                    return Err(IncidenceError::SameSort(self.names[i].clone(), self.names[j].clone()));
                }
            }
            let p = &self.prov[i];
            for parent in &p.parents {
                if let Some(j) = self.id(parent) {
                    if self.prov[j].stage >= p.stage {
                        return Err(IncidenceError::BadProvenance(self.names[i].clone()));
                    }
                }
            }
            if p.kind == ProvenanceKind::CompletionStep && p.parents.is_empty() {
                return Err(IncidenceError::BadProvenance(self.names[i].clone()));
            }
        }
        Ok(())
    }

    pub fn to_json_value(&self) -> StructureJson {
        let mut elements: Vec<ElementJson> = self
            .indices()
            .map(|i| ElementJson { name: self.names[i].clone(), sort: self.sorts[i] })
            .collect();
        elements.sort_by(|a, b| a.name.cmp(&b.name));
        let provenance = self
            .indices()
            .map(|i| (self.names[i].clone(), self.prov[i].clone()))
            .collect();
        let mut sorts = BTreeMap::new();
        sorts.insert("BlockLike".to_string(), self.labels[1].clone());
        sorts.insert("PointLike".to_string(), self.labels[0].clone());
        StructureJson {
            sorts,
            elements,
            incidences: self.incidence_pairs().into_iter().map(|(a, b)| [a, b]).collect(),
            provenance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<IncidenceStructure, IncidenceError> {
        let raw: StructureJson =
            serde_json::from_str(text).map_err(|e| IncidenceError::Malformed(e.to_string()))?;
        Self::from_json_value(&raw)
    }

    pub fn from_json_value(raw: &StructureJson) -> Result<IncidenceStructure, IncidenceError> {
        let label = |k: &str, d: &str| raw.sorts.get(k).cloned().unwrap_or_else(|| d.to_string());
        let mut s = IncidenceStructure::new(&label("PointLike", "point"), &label("BlockLike", "block"));
        for e in &raw.elements {
            let p = raw.provenance.get(&e.name).cloned().unwrap_or_else(Provenance::generator);
            s.add_element(&e.name, e.sort, p)?;
        }
        for [a, b] in &raw.incidences {
            s.link(a, b)?;
        }
        s.validate()?;
        Ok(s)
    }

    /// Graphviz rendering; points are ellipses, blocks are boxes.
    pub fn to_dot(&self, title: &str) -> String {
        let mut out = format!("graph \"{}\" {{\n", title.replace('"', "'"));
        for name in self.names_sorted() {
            let i = self.id(name).unwrap();
            let shape = match self.sorts[i] {
                Sort::PointLike => "ellipse",
                Sort::BlockLike => "box",
            };
            out.push_str(&format!("  \"{}\" [shape={}];\n", name.replace('"', "'"), shape));
        }
        for (a, b) in self.incidence_pairs() {
            out.push_str(&format!("  \"{}\" -- \"{}\";\n", a.replace('"', "'"), b.replace('"', "'")));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ElementJson {
    pub name: String,
    pub sort: Sort,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StructureJson {
    pub sorts: BTreeMap<String, String>,
    pub elements: Vec<ElementJson>,
    pub incidences: Vec<[String; 2]>,
    #[serde(default)]
    pub provenance: BTreeMap<String, Provenance>,
}

/// The Fano plane with points `p0..p6` and lines `l0..l6` (lines `{i, i+1, i+3}`).
pub fn fano_plane() -> IncidenceStructure {
    let mut s = IncidenceStructure::new("point", "line");
    for i in 0..7 {
        s.add_generator(&format!("p{i}"), Sort::PointLike).unwrap();
    }
    for i in 0..7 {
        let l = s.add_generator(&format!("l{i}"), Sort::BlockLike).unwrap();
        for d in [0, 1, 3] {
            s.add_incidence((i + d) % 7, l).unwrap();
        }
    }
    s
}
