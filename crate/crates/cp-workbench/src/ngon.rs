//! Partial generalized n-gons: clean arcs, free completion and the CP
//! configuration `D^n_l` for odd `n`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hf::{self, Criterion, HfError, HfObstruction, HfOrder, SearchOutcome, StrongFactorVerdict};
use crate::incidence::{Dist, IncidenceError, IncidenceStructure, Provenance, Sort};

pub const SEARCH_BUDGET: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum NGonError {
    #[error("n must be at least 3, got {0}")]
    InvalidN(usize),
    #[error("not a partial {0}-gon: girth {1} is below {2}")]
    NotPartialNGon(usize, Dist, usize),
    #[error("even n = {0} is not supported: the even-n configuration is not specified")]
    UnsupportedParity(usize),
    #[error("configuration conflict: {0}")]
    ConfigConflict(String),
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error(transparent)]
    Hf(#[from] HfError),
}

#[derive(Clone, Debug)]
pub struct PartialNGon {
    pub n: usize,
    pub structure: IncidenceStructure,
    pub basis: BTreeSet<String>,
}

impl PartialNGon {
    pub fn new(n: usize, structure: IncidenceStructure) -> Result<Self, NGonError> {
        if n < 3 {
            return Err(NGonError::InvalidN(n));
        }
        let basis = structure.generators();
        let a = PartialNGon { n, structure, basis };
        a.check()?;
        Ok(a)
    }

    pub fn check(&self) -> Result<(), NGonError> {
        if !self.structure.has_girth_at_least(2 * self.n) {
            return Err(NGonError::NotPartialNGon(self.n, self.structure.girth(), 2 * self.n));
        }
        Ok(())
    }

    pub fn criterion(&self) -> Criterion {
        Criterion::NGon { n: self.n }
    }

    /// The chain `x_0 | x_1 | ... | x_{size-1}` with `x_0` a point.
    pub fn chain(n: usize, prefix: &str, size: usize) -> Result<Self, NGonError> {
        let mut s = IncidenceStructure::new("point", "line");
        let mut prev: Option<usize> = None;
        for i in 0..size {
            let sort = if i % 2 == 0 { Sort::PointLike } else { Sort::BlockLike };
            let x = s.add_generator(&format!("{prefix}{i}"), sort)?;
            if let Some(p) = prev {
                s.add_incidence(p, x)?;
            }
            prev = Some(x);
        }
        PartialNGon::new(n, s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CleanArc {
    pub elements: Vec<String>,
    pub endpoints: (String, String),
}

impl CleanArc {
    pub fn first(&self) -> &str {
        &self.elements[0]
    }

    pub fn last(&self) -> &str {
        self.elements.last().unwrap()
    }

    /// Chain shape and valency 2 for every element, inside `s`.
    pub fn is_clean_in(&self, s: &IncidenceStructure) -> bool {
        let mut chain = vec![self.endpoints.0.as_str()];
        chain.extend(self.elements.iter().map(String::as_str));
        chain.push(&self.endpoints.1);
        let ids: Option<Vec<usize>> = chain.iter().map(|x| s.id(x)).collect();
        let Some(ids) = ids else { return false };
        ids.windows(2).all(|w| s.incident(w[0], w[1])) && ids[1..ids.len() - 1].iter().all(|&x| s.degree(x) == 2)
    }
}

pub fn arc_element_name(stage: usize, a: &str, b: &str, i: usize) -> String {
    format!("Z{stage}({a},{b})#{i}")
}

/// Adds a chain of `names.len()` elements from `from` to `to`, the first
/// element incident with `from`. Sorts alternate starting opposite `from`.
pub fn add_arc(
    s: &mut IncidenceStructure,
    from: &str,
    to: &str,
    names: &[String],
    prov: Provenance,
) -> Result<Vec<usize>, NGonError> {
    let (f, t) = (s.require(from)?, s.require(to)?);
    let mut sort = s.sort(f).other();
    let mut prev = f;
    let mut out = Vec::new();
    for name in names {
        let x = s.add_element(name, sort, prov.clone())?;
        s.add_incidence(prev, x)?;
        out.push(x);
        prev = x;
        sort = sort.other();
    }
    if s.sort(prev) == s.sort(t) {
        return Err(NGonError::ConfigConflict(format!("arc from `{from}` cannot end at `{to}`: wrong sort")));
    }
    s.add_incidence(prev, t)?;
    Ok(out)
}

fn appropriate_sorts(n: usize, a: Sort, b: Sort) -> bool {
    (a == b) == (n % 2 == 1)
}

/// One clean arc per pair at distance `n + 1`, or at infinite distance
/// with the appropriate sorts, per round. Pairs qualify against the
/// structure at the start of the round.
pub fn free_completion(a: &PartialNGon, stages: usize) -> Result<PartialNGon, NGonError> {
    a.check()?;
    let n = a.n;
    let mut out = a.clone();
    let base_stage = a.structure.max_stage();
    for round in 0..stages {
        let stage = base_stage + round + 1;
        let s = &out.structure;
        let comp = s.components();
        let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
        for x in s.indices() {
            let dist = s.bfs_limited(x, n + 1);
            for y in s.indices() {
                if s.name(x) >= s.name(y) {
                    continue;
                }
                let qualifies = if comp[x] != comp[y] {
                    appropriate_sorts(n, s.sort(x), s.sort(y))
                } else {
                    dist[y] == Some(n + 1)
                };
                if qualifies {
                    pairs.insert((s.name(x).to_string(), s.name(y).to_string()));
                }
            }
        }
        if pairs.is_empty() {
            break;
        }
        for (x, y) in pairs {
            let names: Vec<String> = (1..=n - 2).map(|i| arc_element_name(stage, &x, &y, i)).collect();
            add_arc(&mut out.structure, &x, &y, &names, Provenance::step(stage, vec![x.clone(), y.clone()]))?;
        }
    }
    Ok(out)
}

/// Completion of the union of both bases as a single partial n-gon.
pub fn free_product(a: &PartialNGon, b: &PartialNGon, stages: usize) -> Result<PartialNGon, NGonError> {
    let mut s = IncidenceStructure::new("point", "line");
    for src in [a, b] {
        let base = src.structure.induced_by_names(src.basis.iter())?;
        for i in base.indices() {
            if s.contains(base.name(i)) {
                return Err(NGonError::ConfigConflict(format!("operands share `{}`", base.name(i))));
            }
            s.add_generator(base.name(i), base.sort(i))?;
        }
        for (p, l) in base.incidence_pairs() {
            s.link(&p, &l)?;
        }
    }
    free_completion(&PartialNGon::new(a.n, s)?, stages)
}

/// Seeded random bipartite graph of girth at least `2n`.
pub fn random_partial_ngon<R: Rng>(n: usize, size: usize, rng: &mut R) -> Result<PartialNGon, NGonError> {
    let mut s = IncidenceStructure::new("point", "line");
    for i in 0..size {
        let sort = if rng.gen_bool(0.5) { Sort::PointLike } else { Sort::BlockLike };
        s.add_generator(&format!("g{i:02}"), sort)?;
    }
    let attempts = size * 2;
    for _ in 0..attempts {
        let (x, y) = (rng.gen_range(0..size), rng.gen_range(0..size));
        if s.sort(x) == s.sort(y) || s.incident(x, y) {
            continue;
        }
        // A new edge closes a cycle of length d + 1.
        let d = s.bfs_limited(x, 2 * n - 2)[y];
        if d.is_none() {
            s.add_incidence(x, y)?;
        }
    }
    PartialNGon::new(n, s)
}

/// Disjoint union of chains.
fn path_like(s: &IncidenceStructure, set: &BTreeSet<String>) -> bool {
    let Ok(sub) = s.induced_by_names(set.iter()) else { return false };
    let comps: BTreeSet<usize> = sub.components().into_iter().collect();
    sub.edge_count() + comps.len() == sub.len() && sub.indices().all(|i| sub.degree(i) <= 2)
}

/// Bases `X_A ⊆ X_A ∪ Y` for `b`, with `Y` a union of chains carrying no incidence
/// to `X_A`, `b` the closure of `X_A ∪ Y`, and an HF-order over it.
pub fn strong_factor_check(a: &PartialNGon, b: &PartialNGon, budget: usize) -> Result<StrongFactorVerdict, NGonError> {
    let none = |r: String| Ok(StrongFactorVerdict::NoWitnessWithinBudget { reason: r });
    let crit = a.criterion();
    let (sa, sb) = (&a.structure, &b.structure);
    if let Some(x) = sa.names_sorted().into_iter().find(|x| !sb.contains(x)) {
        return none(format!("`{x}` not in the larger structure"));
    }
    match hf::search_hf_order(sa, &a.basis, crit, budget)? {
        SearchOutcome::Order(_) => {}
        SearchOutcome::Obstruction(_) => return none("no HF-order of A over its basis".into()),
    }
    let rounds = sb.len() + 1;
    let acl_a = hf::acl_bounded(sb, &a.basis, rounds, crit);
    if let Some(x) = sa.names_sorted().into_iter().find(|x| !acl_a.contains(*x)) {
        return none(format!("`{x}` not algebraic over the basis of A"));
    }
    let full = sb.len();
    let regenerates = |y: &BTreeSet<String>| {
        let seed: BTreeSet<String> = a.basis.union(y).cloned().collect();
        hf::acl_bounded(sb, &seed, rounds, crit).len() == full
    };
    let mut y: BTreeSet<String> = b.basis.iter().filter(|x| !acl_a.contains(*x)).cloned().collect();
    if !regenerates(&y) {
        return none("basis of B is not generating".into());
    }
    let touches_a = |x: &str| {
        let i = sb.id(x).unwrap();
        sb.neighbors(i).iter().any(|&j| a.basis.contains(sb.name(j)))
    };
    loop {
        let ends: Vec<String> = y
            .iter()
            .filter(|x| {
                let i = sb.id(x).unwrap();
                sb.neighbors(i).iter().filter(|&&j| y.contains(sb.name(j))).count() <= 1
            })
            .cloned()
            .collect();
        let mut ordered: Vec<&String> = ends.iter().filter(|x| touches_a(x)).collect();
        ordered.extend(ends.iter().filter(|x| !touches_a(x)));
        let mut removed = false;
        for x in ordered {
            y.remove(x);
            if regenerates(&y) {
                removed = true;
                break;
            }
            y.insert(x.clone());
        }
        if !removed {
            break;
        }
    }
    if let Some(x) = y.iter().find(|x| touches_a(x)) {
        return none(format!("`{x}` is incident with the basis of A"));
    }
    if !path_like(sb, &y) {
        return none("complement is not a union of chains".into());
    }
    let basis_b: BTreeSet<String> = a.basis.union(&y).cloned().collect();
    match hf::search_hf_order(sb, &basis_b, crit, budget)? {
        SearchOutcome::Order(_) => Ok(StrongFactorVerdict::WitnessFound { basis_a: a.basis.clone(), basis_b }),
        SearchOutcome::Obstruction(o) => none(format!("{} elements stuck over the candidate basis", o.stuck_set.len())),
    }
}

/// Arcs of `D^n_l` in creation order, as (label, first endpoint, second
/// endpoint). Endpoints name either fixed points (`a1`..`a4`, `p`, `pL`,
/// `p+`) or the first/last element of an earlier arc (`c5^1`, `c20^L`).
pub const D_ARCS: [(&str, &str, &str); 21] = [
    ("c1", "a1", "a2"),
    ("c2", "a2", "a3"),
    ("c3", "a3", "p+"),
    ("c4", "a4", "p+"),
    ("c5", "c1^1", "c3^1"),
    ("c6", "c1^1", "c4^1"),
    ("c7", "c2^1", "c4^1"),
    ("c8", "a4", "c5^1"),
    ("c9", "a3", "c6^1"),
    ("c10", "a1", "c7^1"),
    ("c11", "c8^1", "c9^1"),
    ("c12", "c3^1", "c10^1"),
    ("c13", "p+", "c11^1"),
    ("c14", "c1^1", "c13^1"),
    ("c15", "c12^1", "c14^1"),
    ("c16", "c8^1", "c10^1"),
    ("c18", "c2^1", "c15^1"),
    ("c21", "a1", "pL"),
    ("c17", "p", "c16^1"),
    ("c20", "c3^1", "c21^L"),
    ("c19", "c20^L", "c18^1"),
];

/// Forward order over the generators.
pub const ORDER_FORWARD: [&str; 22] = [
    "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10", "c11", "c12", "c13", "c14", "c15", "c16", "c18",
    "c21", "c17", "c20", "c19", "t",
];

#[derive(Clone, Debug, Serialize)]
pub struct DConfig {
    pub n: usize,
    pub l: usize,
    pub arcs: BTreeMap<String, CleanArc>,
    pub points: BTreeMap<String, String>,
}

impl DConfig {
    pub fn arc(&self, label: &str) -> &CleanArc {
        &self.arcs[label]
    }

    /// All arc elements `c1..c21`.
    pub fn c_elements(&self) -> BTreeSet<String> {
        self.arcs
            .iter()
            .filter(|(k, _)| k.starts_with('c'))
            .flat_map(|(_, a)| a.elements.iter().cloned())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct NGonCpWitness {
    pub n: usize,
    pub lmax: usize,
    pub ambient: PartialNGon,
    pub configs: Vec<DConfig>,
    /// Arc label and endpoint distance just before the arc was added.
    pub arc_log: Vec<(String, Dist)>,
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}#{i}")).collect()
}

struct Builder {
    n: usize,
    s: IncidenceStructure,
    log: Vec<(String, Dist)>,
}

impl Builder {
    fn chain_arc(&mut self, from: &str, to: &str, prefix: &str, count: usize) -> Result<CleanArc, NGonError> {
        let els = names(prefix, count);
        add_arc(&mut self.s, from, to, &els, Provenance::generator())?;
        Ok(CleanArc { elements: els, endpoints: (from.into(), to.into()) })
    }

    fn stage(&self, x: &str) -> usize {
        self.s.provenance(self.s.id(x).unwrap()).stage
    }

    fn completion_arc(&mut self, label: &str, from: &str, to: &str, prefix: &str) -> Result<CleanArc, NGonError> {
        let (f, t) = (self.s.require(from)?, self.s.require(to)?);
        let d = self.s.distance_idx(f, t);
        if d.finite().is_some_and(|d| d < self.n + 1) {
            return Err(NGonError::ConfigConflict(format!("arc {label}: endpoints at distance {d}")));
        }
        self.log.push((label.to_string(), d));
        let stage = 1 + self.stage(from).max(self.stage(to));
        let els = names(prefix, self.n - 2);
        add_arc(&mut self.s, from, to, &els, Provenance::step(stage, vec![from.into(), to.into()]))?;
        Ok(CleanArc { elements: els, endpoints: (from.into(), to.into()) })
    }
}

pub fn u_prefix(i: usize) -> String {
    format!("u{i}")
}

pub fn p_prefix(l: usize) -> String {
    format!("p{l}")
}

pub fn v_prefix(l: usize) -> String {
    format!("v{l}")
}

pub fn t_prefix(l: usize) -> String {
    format!("t{l}")
}

pub fn s_prefix(l: usize) -> String {
    format!("s{l}")
}

/// Depth of the deepest element the configuration needs, counting one
/// stage per arc over its endpoints.
pub const CP_STAGES: usize = 11;

/// Realizes the generator chain `X` and `D^n_l` for `l <= lmax` arc by arc.
/// Every arc is checked to join endpoints at distance at least `n + 1`.
pub fn build_ngon_cp_witness(n: usize, lmax: usize, stages: usize) -> Result<NGonCpWitness, NGonError> {
    if n < 3 {
        return Err(NGonError::InvalidN(n));
    }
    if n % 2 == 0 {
        return Err(NGonError::UnsupportedParity(n));
    }
    if stages < CP_STAGES {
        return Err(NGonError::ConfigConflict(format!("the configuration needs {CP_STAGES} stages, budget is {stages}")));
    }
    let big_l = n - 2;
    let mut b = Builder { n, s: IncidenceStructure::new("point", "line"), log: Vec::new() };
    for i in 0..=4 {
        b.s.add_generator(&format!("a{i}"), Sort::PointLike)?;
    }
    for i in 0..4 {
        b.chain_arc(&format!("a{i}"), &format!("a{}", i + 1), &u_prefix(i), n)?;
    }
    let mut p_arcs = Vec::new();
    for l in 0..=lmax + 1 {
        let els = names(&p_prefix(l), big_l);
        let mut sort = Sort::PointLike;
        let mut prev: Option<usize> = None;
        for e in &els {
            let x = b.s.add_generator(e, sort)?;
            if let Some(p) = prev {
                b.s.add_incidence(p, x)?;
            }
            prev = Some(x);
            sort = sort.other();
        }
        p_arcs.push(els);
    }
    let first = |v: &Vec<String>| v[0].clone();
    let last = |v: &Vec<String>| v.last().unwrap().clone();
    let mut v_arcs = Vec::new();
    for l in 0..=lmax {
        v_arcs.push(b.chain_arc(&last(&p_arcs[l]), &first(&p_arcs[l + 1]), &v_prefix(l), big_l)?);
    }
    b.chain_arc(&first(&p_arcs[0]), "a0", "z", big_l)?;

    let mut configs = Vec::new();
    let mut shared: BTreeMap<String, CleanArc> = BTreeMap::new();
    for l in 0..=lmax {
        let mut pts: BTreeMap<String, String> = BTreeMap::new();
        for i in 1..=4 {
            pts.insert(format!("a{i}"), format!("a{i}"));
        }
        pts.insert("p".into(), first(&p_arcs[l]));
        pts.insert("pL".into(), last(&p_arcs[l]));
        pts.insert("p+".into(), first(&p_arcs[l + 1]));
        let mut arcs: BTreeMap<String, CleanArc> = BTreeMap::new();
        for (label, from, to) in D_ARCS {
            let resolve = |e: &str, arcs: &BTreeMap<String, CleanArc>| -> String {
                if let Some((lab, end)) = e.split_once('^') {
                    let arc = &arcs[lab];
                    if end == "1" { arc.first().to_string() } else { arc.last().to_string() }
                } else {
                    pts[e].clone()
                }
            };
            let (f, t) = (resolve(from, &arcs), resolve(to, &arcs));
            let arc = if label == "c1" || label == "c2" {
                if let Some(a) = shared.get(label) {
                    a.clone()
                } else {
                    let a = b.completion_arc(label, &f, &t, label)?;
                    shared.insert(label.to_string(), a.clone());
                    a
                }
            } else {
                b.completion_arc(&format!("{label}.{l}"), &f, &t, &format!("{label}.{l}"))?
            };
            arcs.insert(label.to_string(), arc);
        }
        let t = b.completion_arc(&format!("t{l}"), &arcs["c17"].first().to_string(), &arcs["c19"].first().to_string(), &t_prefix(l))?;
        arcs.insert("t".into(), t);
        arcs.insert(
            "p".into(),
            CleanArc { elements: p_arcs[l].clone(), endpoints: (arcs["c17"].first().into(), arcs["c21"].last().into()) },
        );
        configs.push(DConfig { n, l, arcs, points: pts });
    }
    for l in 0..=lmax {
        let from = configs[l].arc("t").first().to_string();
        let to = if l == 0 { "a0".to_string() } else { configs[l - 1].arc("t").last().to_string() };
        b.completion_arc(&format!("s{l}"), &from, &to, &s_prefix(l))?;
    }
    let ambient = PartialNGon::new(n, b.s)?;
    let w = NGonCpWitness { n, lmax, ambient, configs, arc_log: b.log };
    if w.ambient.structure.max_stage() > stages {
        return Err(NGonError::ConfigConflict(format!("configuration exceeds {stages} stages")));
    }
    Ok(w)
}

/// Clause results for one index.
#[derive(Clone, Debug, Serialize)]
pub struct NGonClauseChecks {
    pub l: usize,
    pub forward_order_valid: bool,
    pub reverse_order_valid: bool,
    pub factor_of_b: StrongFactorVerdict,
    pub chain_step: Option<StrongFactorVerdict>,
}

impl NGonClauseChecks {
    pub fn all_pass(&self) -> bool {
        self.forward_order_valid
            && self.reverse_order_valid
            && self.factor_of_b.found()
            && self.chain_step.as_ref().map_or(true, |c| c.found())
    }
}

impl NGonCpWitness {
    pub fn s(&self) -> &IncidenceStructure {
        &self.ambient.structure
    }

    pub fn criterion(&self) -> Criterion {
        Criterion::NGon { n: self.n }
    }

    /// Generators of `B`: the chain `X`.
    pub fn x_basis(&self) -> BTreeSet<String> {
        self.s().generators()
    }

    fn arc_set(&self, prefix: &str) -> Vec<String> {
        names(prefix, self.n - 2)
    }

    /// `Z_l`: the `a`s, the `u`s, and `t_j`, `s_j` for `j <= l`.
    pub fn z_basis(&self, l: usize) -> BTreeSet<String> {
        let mut z: BTreeSet<String> = (0..=4).map(|i| format!("a{i}")).collect();
        for i in 0..4 {
            z.extend(names(&u_prefix(i), self.n));
        }
        for j in 0..=l {
            z.extend(self.arc_set(&t_prefix(j)));
            z.extend(self.arc_set(&s_prefix(j)));
        }
        z
    }

    /// `Y_l`: `p_j` and `v_j` for `j >= l + 1`, in chain order.
    pub fn y_chain(&self, l: usize) -> Vec<String> {
        let mut y = Vec::new();
        for j in l + 1..=self.lmax + 1 {
            y.extend(self.arc_set(&p_prefix(j)));
            if j <= self.lmax {
                y.extend(self.arc_set(&v_prefix(j)));
            }
        }
        y
    }

    /// Structure induced on `X` and `D_l`, with the forward order over `X`.
    pub fn forward_order(&self, l: usize) -> Result<(IncidenceStructure, HfOrder), NGonError> {
        self.forward_order_with(l, &ORDER_FORWARD)
    }

    pub fn forward_order_with(&self, l: usize, labels: &[&str]) -> Result<(IncidenceStructure, HfOrder), NGonError> {
        let d = &self.configs[l];
        let base = self.x_basis();
        let mut keep = base.clone();
        let mut order = HfOrder::new(base);
        for lab in labels {
            let arc = d.arc(lab);
            keep.extend(arc.elements.iter().cloned());
            order.sequence.push(arc.elements.clone());
        }
        Ok((self.s().induced_by_names(keep.iter())?, order))
    }

    /// The order from `Z_l` back to the generators over the whole ambient.
    pub fn reverse_order(&self, l: usize) -> HfOrder {
        let mut order = HfOrder::new(self.z_basis(l));
        for x in self.y_chain(l) {
            order.push_one(&x);
        }
        let mut placed: BTreeSet<String> = BTreeSet::new();
        let mut push_arc = |order: &mut HfOrder, arc: &CleanArc| {
            if placed.insert(arc.first().to_string()) {
                order.sequence.push(arc.elements.clone());
            }
        };
        for j in l + 1..=self.lmax {
            let d = &self.configs[j];
            for lab in ORDER_FORWARD {
                push_arc(&mut order, d.arc(lab));
            }
            order.sequence.push(self.arc_set(&s_prefix(j)));
        }
        for j in (0..=l).rev() {
            let d = &self.configs[j];
            for (lab, _, _) in numbered_arcs() {
                push_arc(&mut order, d.arc(lab));
            }
            order.sequence.push(d.arc("p").elements.clone());
            order.sequence.push(self.arc_set(&v_prefix(j)));
        }
        order.sequence.push(self.arc_set("z"));
        order
    }

    pub fn a_model(&self, l: usize) -> Result<PartialNGon, NGonError> {
        let z = self.z_basis(l);
        let acl = hf::acl_bounded(self.s(), &z, self.s().len() + 1, self.criterion());
        let structure = self.s().induced_by_names(acl.iter())?;
        Ok(PartialNGon { n: self.n, structure, basis: z })
    }

    pub fn clause_checks(&self, l: usize) -> Result<NGonClauseChecks, NGonError> {
        let crit = self.criterion();
        let (fs, fo) = self.forward_order(l)?;
        let forward_order_valid = hf::verify_hf_order(&fs, &fo, crit)?.valid;
        let reverse_order_valid = hf::verify_hf_order(self.s(), &self.reverse_order(l), crit)?.valid;
        let a = self.a_model(l)?;
        let factor_of_b = strong_factor_check(&a, &self.ambient, SEARCH_BUDGET)?;
        let chain_step = if l < self.lmax {
            Some(strong_factor_check(&a, &self.a_model(l + 1)?, SEARCH_BUDGET)?)
        } else {
            None
        };
        Ok(NGonClauseChecks { l, forward_order_valid, reverse_order_valid, factor_of_b, chain_step })
    }

    /// `Z_omega` truncated to the built indices plus `D_l`.
    pub fn obstruction_context(&self, l: usize, with_p: bool) -> BTreeSet<String> {
        let d = &self.configs[l];
        let mut ctx = self.z_basis(self.lmax);
        ctx.extend(d.c_elements());
        ctx.insert(d.points["p+"].clone());
        if with_p {
            ctx.extend(d.arc("p").elements.iter().cloned());
        }
        ctx
    }

    pub fn stuck_set(&self, l: usize) -> BTreeSet<String> {
        let d = &self.configs[l];
        let mut st = d.c_elements();
        st.insert(d.points["p+"].clone());
        st
    }

    pub fn verify_obstruction(&self, l: usize) -> Result<HfObstruction, NGonError> {
        self.check_obstruction(l, true)
    }

    pub fn verify_obstruction_without_p(&self, l: usize) -> Result<HfObstruction, NGonError> {
        self.check_obstruction(l, false)
    }

    fn check_obstruction(&self, l: usize, with_p: bool) -> Result<HfObstruction, NGonError> {
        if l >= self.configs.len() {
            return Err(NGonError::ConfigConflict(format!("no configuration at index {l}")));
        }
        let context = self.obstruction_context(l, with_p);
        let s = self.s().induced_by_names(context.iter())?;
        let obs = HfObstruction { stuck_set: self.stuck_set(l), context };
        if hf::verify_obstruction(&s, &obs, self.criterion())? {
            Ok(obs)
        } else {
            Err(NGonError::ConfigConflict(format!("a tuple of D_{l} is hyperfree in the context")))
        }
    }
}

/// `c1..c21` by number.
fn numbered_arcs() -> Vec<(&'static str, &'static str, &'static str)> {
    let mut v = D_ARCS.to_vec();
    v.sort_by_key(|(lab, _, _)| lab[1..].parse::<usize>().unwrap());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn points(names: &[&str]) -> IncidenceStructure {
        let mut s = IncidenceStructure::new("point", "line");
        for n in names {
            s.add_generator(n, Sort::PointLike).unwrap();
        }
        s
    }

    #[test]
    fn two_components_get_a_line() {
        let a = PartialNGon::new(3, points(&["x", "y"])).unwrap();
        let f = free_completion(&a, 1).unwrap();
        assert_eq!(f.structure.len(), 3);
        assert_eq!(f.structure.distance("x", "y").unwrap(), Dist::Finite(2));
    }

    #[test]
    fn distance_four_closes_a_hexagon() {
        let a = PartialNGon::chain(3, "x", 5).unwrap();
        let f = free_completion(&a, 1).unwrap();
        assert_eq!(f.structure.len(), 6);
        assert_eq!(f.structure.girth(), Dist::Finite(6));
        assert_eq!(free_completion(&a, 0).unwrap().structure.len(), 5);
    }

    #[test]
    fn random_configurations_keep_girth() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3, 4, 5] {
            for _ in 0..5 {
                let a = random_partial_ngon(n, 12, &mut rng).unwrap();
                let f = free_completion(&a, 2).unwrap();
                assert!(f.structure.has_girth_at_least(2 * n));
            }
        }
    }

    #[test]
    fn even_n_rejected() {
        assert!(matches!(build_ngon_cp_witness(4, 0, CP_STAGES), Err(NGonError::UnsupportedParity(4))));
    }

    #[test]
    fn table_two_rows() {
        let w = build_ngon_cp_witness(3, 0, CP_STAGES).unwrap();
        let s = w.s();
        let d = &w.configs[0];
        let nb = |x: &str| -> BTreeSet<String> {
            s.neighbors(s.id(x).unwrap()).iter().map(|&i| s.name(i).to_string()).collect()
        };
        let c = |j: usize| d.arc(&format!("c{j}")).first().to_string();
        let expect: BTreeSet<String> = ["a1".to_string(), "a2".to_string(), c(5), c(6), c(14)].into();
        assert_eq!(nb(&c(1)), expect);
        let p = &d.points["p"];
        let pn: BTreeSet<String> = nb(p).into_iter().filter(|x| !x.starts_with('v') && !x.starts_with('z')).collect();
        assert_eq!(pn, [c(17), c(21)].into());
    }

    #[test]
    fn arcs_have_interior_valency_two() {
        let w = build_ngon_cp_witness(5, 0, CP_STAGES).unwrap();
        let arc = w.configs[0].arc("c1");
        assert_eq!(arc.elements.len(), 3);
        assert_eq!(w.s().degree(w.s().id(&arc.elements[1]).unwrap()), 2);
    }

    #[test]
    fn swapped_forward_order_fails() {
        for (n, at) in [(3, 20), (5, 19)] {
            let w = build_ngon_cp_witness(n, 0, CP_STAGES).unwrap();
            let mut labels = ORDER_FORWARD.to_vec();
            labels.swap(19, 20);
            let (s, o) = w.forward_order_with(0, &labels).unwrap();
            let v = hf::verify_hf_order(&s, &o, w.criterion()).unwrap();
            assert!(!v.valid);
            assert_eq!(v.first_failure, Some(at));
        }
    }

    #[test]
    fn clauses_and_obstruction() {
        for n in [3, 5] {
            let w = build_ngon_cp_witness(n, 1, CP_STAGES).unwrap();
            for l in 0..=1 {
                let c = w.clause_checks(l).unwrap();
                assert!(c.all_pass(), "n={n} l={l}: {c:?}");
                if let StrongFactorVerdict::WitnessFound { basis_b, .. } = &c.factor_of_b {
                    let mut expect = w.z_basis(l);
                    expect.extend(w.y_chain(l));
                    assert_eq!(basis_b, &expect);
                }
                w.verify_obstruction(l).unwrap();
                assert!(w.verify_obstruction_without_p(l).is_err());
            }
        }
    }
}
