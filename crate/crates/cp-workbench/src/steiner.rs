//! Partial (k,n)-Steiner systems, free completion and the CP configuration.
//!
//! Completion-created names are canonical: a block created from points
//! `p1..pk` at stage `s` is `B{s}(p1,..,pk)` with the points sorted, and its
//! padding points are `P{s+1}(B..#i)`. Stages count half-steps, so blocks
//! sit at odd stages and padding points at even ones.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::hf::{self, Criterion, HfError, HfObstruction, HfOrder, SearchOutcome};
pub use crate::hf::StrongFactorVerdict;
use crate::incidence::{IncidenceError, IncidenceStructure, Provenance, ProvenanceKind, Sort};

pub const SEARCH_BUDGET: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum SteinerError {
    #[error("invalid parameters: need 2 <= k < n, got k={0}, n={1}")]
    InvalidParams(usize, usize),
    #[error("not a partial Steiner system: {0}")]
    NotPartialSteiner(String),
    #[error("operands share element `{0}`")]
    NotDisjoint(String),
    #[error("configuration conflict: {0}")]
    ConfigConflict(String),
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error(transparent)]
    Hf(#[from] HfError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SteinerParams {
    pub k: usize,
    pub n: usize,
}

impl SteinerParams {
    pub fn new(k: usize, n: usize) -> Result<Self, SteinerError> {
        if k < 2 || n <= k {
            return Err(SteinerError::InvalidParams(k, n));
        }
        Ok(SteinerParams { k, n })
    }

    pub fn criterion(&self) -> Criterion {
        Criterion::Steiner { k: self.k, n: self.n }
    }
}

#[derive(Clone, Debug)]
pub struct PartialSteiner {
    pub params: SteinerParams,
    pub structure: IncidenceStructure,
    /// Recorded basis; generator points for completions.
    pub basis: BTreeSet<String>,
}

pub fn block_name(stage: usize, points: &[String]) -> String {
    let mut p = points.to_vec();
    p.sort();
    format!("B{stage}({})", p.join(","))
}

pub fn padding_name(stage: usize, block: &str, i: usize) -> String {
    format!("P{stage}({block}#{i})")
}

fn full_stage(s: &IncidenceStructure, i: usize) -> usize {
    s.provenance(i).stage.div_ceil(2)
}

impl PartialSteiner {
    /// Independent generator points.
    pub fn free_on<S: AsRef<str>>(params: SteinerParams, names: &[S]) -> Result<Self, SteinerError> {
        let mut s = IncidenceStructure::default();
        for n in names {
            s.add_generator(n.as_ref(), Sort::PointLike)?;
        }
        let basis = s.generators();
        Ok(PartialSteiner { params, structure: s, basis })
    }

    /// Wraps a structure, taking its generators as the basis.
    pub fn from_structure(params: SteinerParams, structure: IncidenceStructure) -> Result<Self, SteinerError> {
        let basis = structure.generators();
        let a = PartialSteiner { params, structure, basis };
        a.check_axioms()?;
        Ok(a)
    }

    pub fn check_axioms(&self) -> Result<(), SteinerError> {
        let s = &self.structure;
        let SteinerParams { k, n } = self.params;
        for b in s.indices().filter(|&i| s.sort(i) == Sort::BlockLike) {
            if s.degree(b) > n {
                return Err(SteinerError::NotPartialSteiner(format!("block `{}` has {} points", s.name(b), s.degree(b))));
            }
        }
        // Count shared points per pair of blocks through a common point.
        let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for p in s.indices().filter(|&i| s.sort(i) == Sort::PointLike) {
            let blocks = s.neighbors(p);
            for (x, &b1) in blocks.iter().enumerate() {
                for &b2 in &blocks[x + 1..] {
                    let c = shared.entry((b1, b2)).or_insert(0);
                    *c += 1;
                    if *c >= k {
                        return Err(SteinerError::NotPartialSteiner(format!(
                            "blocks `{}` and `{}` share {k} points",
                            s.name(b1),
                            s.name(b2)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<usize> {
        let s = &self.structure;
        s.indices().filter(|&i| s.sort(i) == Sort::PointLike).collect()
    }

    pub fn blocks(&self) -> Vec<usize> {
        let s = &self.structure;
        s.indices().filter(|&i| s.sort(i) == Sort::BlockLike).collect()
    }

    /// Whether the given points already lie on a common block.
    pub fn common_block(&self, points: &[usize]) -> Option<usize> {
        let s = &self.structure;
        let (first, rest) = points.split_first()?;
        s.neighbors(*first).iter().copied().find(|&b| rest.iter().all(|&p| s.incident(p, b)))
    }
}

pub(crate) fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `stages` rounds of one block pass followed by one padding pass.
pub fn free_completion(a: &PartialSteiner, stages: usize) -> Result<PartialSteiner, SteinerError> {
    a.check_axioms()?;
    let SteinerParams { k, n } = a.params;
    let mut out = a.clone();
    let base_stage = a.structure.max_stage();
    for round in 0..stages {
        let block_stage = 2 * (base_stage.div_ceil(2) + round) + 1;
        let points = out.points();
        let mut new_blocks: Vec<Vec<usize>> = Vec::new();
        combinations(points.len(), k, |c| {
            let set: Vec<usize> = c.iter().map(|&i| points[i]).collect();
            if out.common_block(&set).is_none() {
                new_blocks.push(set);
            }
        });
        if new_blocks.is_empty() && out.blocks().iter().all(|&b| out.structure.degree(b) >= n) {
            break;
        }
        for set in new_blocks {
            let names: Vec<String> = set.iter().map(|&i| out.structure.name(i).to_string()).collect();
            let name = block_name(block_stage, &names);
            let mut sorted = names.clone();
            sorted.sort();
            let b = out.structure.add_element(&name, Sort::BlockLike, Provenance::step(block_stage, sorted))?;
            for p in set {
                out.structure.add_incidence(p, b)?;
            }
        }
        for b in out.blocks() {
            let have = out.structure.degree(b);
            let bname = out.structure.name(b).to_string();
            for i in 0..n.saturating_sub(have) {
                let pname = padding_name(block_stage + 1, &bname, i);
                let p = out.structure.add_element(&pname, Sort::PointLike, Provenance::step(block_stage + 1, vec![bname.clone()]))?;
                out.structure.add_incidence(p, b)?;
            }
        }
    }
    Ok(out)
}

/// Free completion of the union of both bases.
pub fn free_product(a: &PartialSteiner, b: &PartialSteiner, stages: usize) -> Result<PartialSteiner, SteinerError> {
    for x in &a.basis {
        if b.structure.contains(x) {
            return Err(SteinerError::NotDisjoint(x.clone()));
        }
    }
    for x in &b.basis {
        if a.structure.contains(x) {
            return Err(SteinerError::NotDisjoint(x.clone()));
        }
    }
    let names: Vec<&String> = a.basis.iter().chain(b.basis.iter()).collect();
    let gens = PartialSteiner::free_on(a.params, &names)?;
    free_completion(&gens, stages)
}

/// Searches for bases `X_A ⊆ X_B` with `b` the closure of `X_B` and an
/// HF-order of `b` over `X_B`.
pub fn strong_factor_check(a: &PartialSteiner, b: &PartialSteiner, budget: usize) -> Result<StrongFactorVerdict, SteinerError> {
    let crit = a.params.criterion();
    strong_factor_generic(&a.structure, &a.basis, &b.structure, &b.basis, crit, budget, |s, i| {
        s.sort(i) == Sort::PointLike
    })
}

pub(crate) fn strong_factor_generic(
    a: &IncidenceStructure,
    a_basis: &BTreeSet<String>,
    b: &IncidenceStructure,
    b_basis: &BTreeSet<String>,
    crit: Criterion,
    budget: usize,
    basis_ok: impl Fn(&IncidenceStructure, usize) -> bool,
) -> Result<StrongFactorVerdict, SteinerError> {
    let none = |r: String| Ok(StrongFactorVerdict::NoWitnessWithinBudget { reason: r });
    if let Some(x) = a.names_sorted().into_iter().find(|x| !b.contains(x)) {
        return none(format!("`{x}` not in the larger structure"));
    }
    for x in a_basis.iter().chain(b_basis.iter()) {
        match b.id(x) {
            Some(i) if basis_ok(b, i) => {}
            _ => return none(format!("`{x}` cannot be a basis element")),
        }
    }
    match hf::search_hf_order(a, a_basis, crit, budget)? {
        SearchOutcome::Order(_) => {}
        SearchOutcome::Obstruction(_) => return none("no HF-order of A over its basis".into()),
    }
    let rounds = b.len() + 1;
    let acl_a = hf::acl_bounded(b, a_basis, rounds, crit);
    if let Some(x) = a.names_sorted().into_iter().find(|x| !acl_a.contains(*x)) {
        return none(format!("`{x}` not algebraic over the basis of A"));
    }
    let mut y: BTreeSet<String> = b_basis.iter().filter(|x| !acl_a.contains(*x)).cloned().collect();
    let full = b.len();
    let regenerates = |y: &BTreeSet<String>| {
        let seed: BTreeSet<String> = a_basis.union(y).cloned().collect();
        hf::acl_bounded(b, &seed, rounds, crit).len() == full
    };
    if !regenerates(&y) {
        return none("basis of B is not generating".into());
    }
    for x in y.clone() {
        y.remove(&x);
        if !regenerates(&y) {
            y.insert(x);
        }
    }
    let basis_b: BTreeSet<String> = a_basis.union(&y).cloned().collect();
    match hf::search_hf_order(b, &basis_b, crit, budget)? {
        SearchOutcome::Order(_) => Ok(StrongFactorVerdict::WitnessFound { basis_a: a_basis.clone(), basis_b }),
        SearchOutcome::Obstruction(o) => none(format!("{} elements stuck over the candidate basis", o.stuck_set.len())),
    }
}

/// Grows a finite piece of `F(X)` on demand, naming every element exactly
/// as the full completion would.
pub struct LazySteiner {
    pub params: SteinerParams,
    pub s: IncidenceStructure,
}

impl LazySteiner {
    pub fn new(params: SteinerParams) -> Self {
        LazySteiner { params, s: IncidenceStructure::default() }
    }

    pub fn generator(&mut self, name: &str) -> Result<String, SteinerError> {
        if !self.s.contains(name) {
            self.s.add_generator(name, Sort::PointLike)?;
        }
        Ok(name.to_string())
    }

    /// The unique block through `k` points, created with all its padding
    /// points if it does not exist yet.
    pub fn block_through(&mut self, points: &[String]) -> Result<String, SteinerError> {
        let SteinerParams { k, n } = self.params;
        if points.len() != k {
            return Err(SteinerError::ConfigConflict(format!("{} points given, need {k}", points.len())));
        }
        let idx: Vec<usize> = points.iter().map(|p| self.s.require(p)).collect::<Result<_, _>>()?;
        // An existing common block is either the parent of a padding point
        // among them or the block they created.
        for &p in &idx {
            let prov = self.s.provenance(p);
            if prov.kind == ProvenanceKind::CompletionStep {
                let parent = self.s.require(&prov.parents[0])?;
                if idx.iter().all(|&q| self.s.incident(q, parent)) {
                    return Ok(self.s.name(parent).to_string());
                }
            }
        }
        let m = idx.iter().map(|&i| full_stage(&self.s, i)).max().unwrap_or(0);
        let stage = 2 * m + 1;
        let name = block_name(stage, points);
        if self.s.contains(&name) {
            return Ok(name);
        }
        let mut sorted = points.to_vec();
        sorted.sort();
        let b = self.s.add_element(&name, Sort::BlockLike, Provenance::step(stage, sorted))?;
        for &p in &idx {
            self.s.add_incidence(p, b)?;
        }
        for i in 0..n - k {
            let pn = padding_name(stage + 1, &name, i);
            let p = self.s.add_element(&pn, Sort::PointLike, Provenance::step(stage + 1, vec![name.clone()]))?;
            self.s.add_incidence(p, b)?;
        }
        Ok(name)
    }

    pub fn padding(&self, block: &str, i: usize) -> Result<String, SteinerError> {
        let b = self.s.require(block)?;
        let name = padding_name(self.s.provenance(b).stage + 1, block, i);
        self.s.require(&name)?;
        Ok(name)
    }

    pub fn stage_of(&self, name: &str) -> Result<usize, SteinerError> {
        Ok(full_stage(&self.s, self.s.require(name)?))
    }
}

/// Symbols of the table at one index, mapped to element names.
#[derive(Clone, Debug, Serialize)]
pub struct SteinerCpConfig {
    pub l: usize,
    pub labels: BTreeMap<String, String>,
}

impl SteinerCpConfig {
    pub fn get(&self, sym: &str) -> &str {
        &self.labels[sym]
    }

    /// `p_{l+1}, b1..b7, c1..c6` in the table's construction order.
    pub fn construction_order(&self) -> Vec<String> {
        ["p+", "b1", "b2", "b3", "c1", "c2", "c3", "b4", "b5", "c4", "c5", "b6", "c6", "b7", "p"]
            .iter()
            .map(|s| self.labels[*s].clone())
            .collect()
    }

    /// `C_l`: everything in the construction order except `p_l`.
    pub fn stuck_candidates(&self) -> BTreeSet<String> {
        let mut c: BTreeSet<String> = self.construction_order().into_iter().collect();
        c.remove(self.get("p"));
        c
    }
}

pub fn a_name(i: usize) -> String {
    format!("a{i}")
}

pub fn p_name(i: usize) -> String {
    format!("p{i}")
}

#[derive(Clone, Debug)]
pub struct SteinerCpWitness {
    pub params: SteinerParams,
    pub lmax: usize,
    pub ambient: PartialSteiner,
    pub configs: Vec<SteinerCpConfig>,
}

/// Clause results for one index of the chain.
#[derive(Clone, Debug, Serialize)]
pub struct SteinerClauseChecks {
    pub l: usize,
    pub order_valid: bool,
    pub factor_of_b: StrongFactorVerdict,
    pub chain_step: Option<StrongFactorVerdict>,
    pub algebraic_over_basis: bool,
}

impl SteinerClauseChecks {
    pub fn all_pass(&self) -> bool {
        self.order_valid
            && self.factor_of_b.found()
            && self.algebraic_over_basis
            && self.chain_step.as_ref().map_or(true, |c| c.found())
    }
}

/// Number of full stages the table needs: `t_l` is a padding point of `b7`,
/// which sits over `c6`, which pads `b6`, and so on.
pub const CP_STAGES: usize = 4;

pub fn build_steiner_cp_witness(params: SteinerParams, lmax: usize, stages: usize) -> Result<SteinerCpWitness, SteinerError> {
    if stages < CP_STAGES {
        return Err(SteinerError::ConfigConflict(format!(
            "the configuration needs {CP_STAGES} completion stages, budget is {stages}"
        )));
    }
    let k = params.k;
    let mut lz = LazySteiner::new(params);
    for i in 1..=k {
        lz.generator(&a_name(i))?;
    }
    for i in 0..=lmax + 1 {
        lz.generator(&p_name(i))?;
    }
    let a = |i: usize| a_name(i);
    let tail: Vec<String> = (3..=k).map(a).collect();
    let with_tail = |extra: &[&str]| -> Vec<String> {
        let mut v = tail.clone();
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let mut configs = Vec::new();
    for l in 0..=lmax {
        let (p, pn) = (p_name(l), p_name(l + 1));
        let b1 = lz.block_through(&(1..=k).map(a).collect::<Vec<_>>())?;
        let c1 = lz.padding(&b1, 0)?;
        let b2 = lz.block_through(&with_tail(&[&a(2), &pn]))?;
        let c2 = lz.padding(&b2, 0)?;
        let b3 = lz.block_through(&with_tail(&[&a(1), &pn]))?;
        let c3 = lz.padding(&b3, 0)?;
        let b4 = lz.block_through(&with_tail(&[&c1, &c2]))?;
        let c4 = lz.padding(&b4, 0)?;
        let b5 = lz.block_through(&with_tail(&[&c2, &c3]))?;
        let c5 = lz.padding(&b5, 0)?;
        let b6 = lz.block_through(&with_tail(&[&c4, &c5]))?;
        let c6 = lz.padding(&b6, 0)?;
        let b7 = lz.block_through(&with_tail(&[&c6, &p]))?;
        let t = lz.padding(&b7, 0)?;
        if lz.stage_of(&t)? > stages {
            return Err(SteinerError::ConfigConflict(format!("`{t}` lies beyond stage {stages}")));
        }
        let mut labels = BTreeMap::new();
        for (sym, name) in [
            ("t", &t),
            ("p", &p),
            ("p+", &pn),
            ("b1", &b1),
            ("b2", &b2),
            ("b3", &b3),
            ("b4", &b4),
            ("b5", &b5),
            ("b6", &b6),
            ("b7", &b7),
            ("c1", &c1),
            ("c2", &c2),
            ("c3", &c3),
            ("c4", &c4),
            ("c5", &c5),
            ("c6", &c6),
        ] {
            labels.insert(sym.to_string(), name.clone());
        }
        for i in 1..=k {
            labels.insert(a(i), a(i));
        }
        configs.push(SteinerCpConfig { l, labels });
    }
    let ambient = PartialSteiner::from_structure(params, lz.s)?;
    let w = SteinerCpWitness { params, lmax, ambient, configs };
    for c in &w.configs {
        w.check_table(c)?;
    }
    Ok(w)
}

impl SteinerCpWitness {
    pub fn s(&self) -> &IncidenceStructure {
        &self.ambient.structure
    }

    // Every table incidence must hold, and no other among table symbols.
    fn check_table(&self, c: &SteinerCpConfig) -> Result<(), SteinerError> {
        let k = self.params.k;
        let mut rows: Vec<(String, Vec<usize>)> = vec![
            ("t".into(), vec![7]),
            ("a1".into(), vec![1, 3]),
            ("a2".into(), vec![1, 2]),
            ("p+".into(), vec![2, 3]),
            ("c1".into(), vec![1, 4]),
            ("c2".into(), vec![2, 4, 5]),
            ("c3".into(), vec![3, 5]),
            ("c4".into(), vec![4, 6]),
            ("c5".into(), vec![5, 6]),
            ("c6".into(), vec![6, 7]),
            ("p".into(), vec![7]),
        ];
        for i in 3..=k {
            rows.push((a_name(i), (1..=7).collect()));
        }
        let s = self.s();
        for (row, cols) in rows {
            let x = s.require(c.get(&row))?;
            for j in 1..=7 {
                let b = s.require(c.get(&format!("b{j}")))?;
                if s.incident(x, b) != cols.contains(&j) {
                    return Err(SteinerError::ConfigConflict(format!("row {row}, column b{j} at index {}", c.l)));
                }
            }
        }
        Ok(())
    }

    /// `X_l = {a_1..a_k, t_0..t_l}`.
    pub fn x_basis(&self, l: usize) -> BTreeSet<String> {
        let mut x: BTreeSet<String> = (1..=self.params.k).map(a_name).collect();
        for c in &self.configs[..=l] {
            x.insert(c.get("t").to_string());
        }
        x
    }

    /// `Y_l = {p_{l+1}..p_{lmax+1}}`.
    pub fn y_basis(&self, l: usize) -> BTreeSet<String> {
        (l + 1..=self.lmax + 1).map(p_name).collect()
    }

    pub fn generators_b(&self) -> BTreeSet<String> {
        self.s().generators()
    }

    pub fn a_model(&self, l: usize) -> Result<PartialSteiner, SteinerError> {
        let x = self.x_basis(l);
        let acl = hf::acl_bounded(self.s(), &x, self.s().len() + 1, self.params.criterion());
        let structure = self.s().induced_by_names(acl.iter())?;
        Ok(PartialSteiner { params: self.params, structure, basis: x })
    }

    pub fn b_model(&self) -> PartialSteiner {
        self.ambient.clone()
    }

    /// The table order over `X_l`, inside the structure induced on
    /// `X_l` plus the table elements.
    pub fn table_order(&self, l: usize) -> Result<(IncidenceStructure, HfOrder), SteinerError> {
        let c = &self.configs[l];
        let base = self.x_basis(l);
        let seq = c.construction_order();
        let keep: BTreeSet<String> = base.iter().cloned().chain(seq.iter().cloned()).collect();
        let s = self.s().induced_by_names(keep.iter())?;
        let mut order = HfOrder::new(base);
        for x in &seq {
            order.push_one(x);
        }
        Ok((s, order))
    }

    pub fn clause_checks(&self, l: usize) -> Result<SteinerClauseChecks, SteinerError> {
        let crit = self.params.criterion();
        let (s, order) = self.table_order(l)?;
        let order_valid = hf::verify_hf_order(&s, &order, crit)?.valid;
        let a = self.a_model(l)?;
        let mut b = self.b_model();
        b.basis = self.generators_b();
        let factor_of_b = strong_factor_check(&a, &b, SEARCH_BUDGET)?;
        let chain_step = if l < self.lmax {
            Some(strong_factor_check(&a, &self.a_model(l + 1)?, SEARCH_BUDGET)?)
        } else {
            None
        };
        let seed: BTreeSet<String> = self.x_basis(l).union(&self.y_basis(l)).cloned().collect();
        let acl = hf::acl_bounded(self.s(), &seed, self.s().len() + 1, crit);
        let algebraic_over_basis = (0..=l).all(|i| acl.contains(&p_name(i)));
        Ok(SteinerClauseChecks { l, order_valid, factor_of_b, chain_step, algebraic_over_basis })
    }

    /// `X_omega` truncated to the built indices, plus `C_l` and `p_l`.
    pub fn obstruction_context(&self, l: usize, with_p: bool) -> BTreeSet<String> {
        let c = &self.configs[l];
        let mut ctx = self.x_basis(self.lmax);
        ctx.extend(c.stuck_candidates());
        if with_p {
            ctx.insert(c.get("p").to_string());
        }
        ctx
    }

    pub fn verify_obstruction(&self, l: usize) -> Result<HfObstruction, SteinerError> {
        self.check_obstruction(l, true)
    }

    /// Same check with `p_l` dropped from the context; expected to fail.
    pub fn verify_obstruction_without_p(&self, l: usize) -> Result<HfObstruction, SteinerError> {
        self.check_obstruction(l, false)
    }

    fn check_obstruction(&self, l: usize, with_p: bool) -> Result<HfObstruction, SteinerError> {
        let c = self.configs.get(l).ok_or_else(|| SteinerError::ConfigConflict(format!("no configuration at index {l}")))?;
        self.check_table(c)?;
        let context = self.obstruction_context(l, with_p);
        let s = self.s().induced_by_names(context.iter())?;
        let obs = HfObstruction { stuck_set: c.stuck_candidates(), context };
        if hf::verify_obstruction(&s, &obs, self.params.criterion())? {
            Ok(obs)
        } else {
            Err(SteinerError::ConfigConflict(format!("an element of C_{l} is hyperfree in the context")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p23() -> SteinerParams {
        SteinerParams::new(2, 3).unwrap()
    }

    #[test]
    fn combinations_enumerate() {
        let mut v = Vec::new();
        combinations(4, 2, |c| v.push(c.to_vec()));
        assert_eq!(v.len(), 6);
        assert_eq!(v[5], vec![2, 3]);
        let mut w = 0;
        combinations(3, 3, |_| w += 1);
        assert_eq!(w, 1);
    }

    #[test]
    fn completion_of_four_points() {
        let a = PartialSteiner::free_on(p23(), &["p0", "p1", "p2", "p3"]).unwrap();
        let f = free_completion(&a, 1).unwrap();
        assert_eq!(f.blocks().len(), 6);
        assert_eq!(f.points().len(), 10);
        let f0 = free_completion(&a, 0).unwrap();
        assert_eq!(f0.structure.len(), 4);
    }

    #[test]
    fn full_block_is_a_fixpoint() {
        let mut s = IncidenceStructure::default();
        for p in ["x", "y", "z"] {
            s.add_generator(p, Sort::PointLike).unwrap();
        }
        s.add_generator("l", Sort::BlockLike).unwrap();
        for p in ["x", "y", "z"] {
            s.link(p, "l").unwrap();
        }
        let a = PartialSteiner::from_structure(p23(), s).unwrap();
        assert_eq!(free_completion(&a, 3).unwrap().structure.len(), 4);
    }

    #[test]
    fn axiom_violation_detected() {
        let mut s = IncidenceStructure::default();
        for p in ["x", "y"] {
            s.add_generator(p, Sort::PointLike).unwrap();
        }
        for b in ["l", "m"] {
            s.add_generator(b, Sort::BlockLike).unwrap();
            s.link("x", b).unwrap();
            s.link("y", b).unwrap();
        }
        assert!(matches!(PartialSteiner::from_structure(p23(), s), Err(SteinerError::NotPartialSteiner(_))));
    }

    #[test]
    fn lazy_builder_matches_completion_names() {
        let a = PartialSteiner::free_on(p23(), &["p0", "p1", "p2"]).unwrap();
        let f = free_completion(&a, 2).unwrap();
        let mut lz = LazySteiner::new(p23());
        for p in ["p0", "p1", "p2"] {
            lz.generator(p).unwrap();
        }
        let b = lz.block_through(&["p0".into(), "p1".into()]).unwrap();
        let c = lz.padding(&b, 0).unwrap();
        let b2 = lz.block_through(&[c.clone(), "p2".into()]).unwrap();
        for x in [&b, &c, &b2] {
            assert!(f.structure.contains(x), "{x}");
        }
        assert_eq!(lz.block_through(&[c, "p0".into()]).unwrap(), b);
    }

    #[test]
    fn not_disjoint_product() {
        let a = PartialSteiner::free_on(p23(), &["p0"]).unwrap();
        assert!(matches!(free_product(&a, &a, 1), Err(SteinerError::NotDisjoint(_))));
    }

    #[test]
    fn table_order_and_control() {
        let w = build_steiner_cp_witness(p23(), 0, CP_STAGES).unwrap();
        let (s, order) = w.table_order(0).unwrap();
        assert!(hf::verify_hf_order(&s, &order, p23().criterion()).unwrap().valid);
        let mut swapped = order.clone();
        swapped.sequence.swap(12, 13);
        let v = hf::verify_hf_order(&s, &swapped, p23().criterion()).unwrap();
        assert_eq!(v.first_failure, Some(13));
    }

    #[test]
    fn small_budget_is_a_conflict() {
        assert!(matches!(build_steiner_cp_witness(p23(), 0, 0), Err(SteinerError::ConfigConflict(_))));
    }

    #[test]
    fn clauses_and_obstruction() {
        for (k, n) in [(2, 3), (2, 4), (3, 4), (3, 5)] {
            let params = SteinerParams::new(k, n).unwrap();
            let w = build_steiner_cp_witness(params, 2, CP_STAGES).unwrap();
            for l in 0..=2 {
                let c = w.clause_checks(l).unwrap();
                assert!(c.all_pass(), "{k},{n},{l}: {c:?}");
                if let StrongFactorVerdict::WitnessFound { basis_b, .. } = &c.factor_of_b {
                    let expect: BTreeSet<String> = w.x_basis(l).union(&w.y_basis(l)).cloned().collect();
                    assert_eq!(basis_b, &expect);
                }
                let o = w.verify_obstruction(l).unwrap();
                assert_eq!(o.stuck_set.len(), 14);
                assert!(w.verify_obstruction_without_p(l).is_err());
            }
        }
    }
}
