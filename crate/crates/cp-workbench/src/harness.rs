//! Adapters for canonical amalgamation classes, law checks at finite
//! truncation, towers, and the unified witness report.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::cyclic::{self, GroupParams, Order};
use crate::iso::back_and_forth_equivalent;
use crate::ngon::{self, NGonError, PartialNGon};
use crate::steiner::{self, PartialSteiner, SteinerError, SteinerParams};
use crate::tfab::{self, Characteristic, RankedGroup, TfabError};
use crate::variety::{self, TermAlgebra, Variety};

pub const SCHEMA: &str = "cpw-report/1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HarnessError {
    #[error("adapter error: {0}")]
    Adapter(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl From<SteinerError> for HarnessError {
    fn from(e: SteinerError) -> Self {
        HarnessError::Adapter(e.to_string())
    }
}

impl From<NGonError> for HarnessError {
    fn from(e: NGonError) -> Self {
        match e {
            NGonError::ConfigConflict(m) => HarnessError::BudgetExhausted(m),
            NGonError::UnsupportedParity(_) => HarnessError::Unsupported(e.to_string()),
            other => HarnessError::Adapter(other.to_string()),
        }
    }
}

impl From<TfabError> for HarnessError {
    fn from(e: TfabError) -> Self {
        HarnessError::Adapter(e.to_string())
    }
}

impl From<variety::VarietyError> for HarnessError {
    fn from(e: variety::VarietyError) -> Self {
        HarnessError::Adapter(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CertificateKind {
    HFObstruction,
    Reflection,
    TwoDivisibility,
    InfiniteHeight,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionCertificate {
    pub kind: CertificateKind,
    pub passed: bool,
    pub detail: Value,
}

/// Operations a concrete class supplies to the harness.
pub trait ClassAdapter {
    type Obj: Clone;

    fn name(&self) -> String;
    fn build_free_on(&self, basis: &[String]) -> Result<Self::Obj, HarnessError>;
    fn free_product(&self, a: &Self::Obj, b: &Self::Obj) -> Result<Self::Obj, HarnessError>;
    fn strong_factor_check(&self, a: &Self::Obj, b: &Self::Obj) -> Result<bool, HarnessError>;
    fn obstruction_check(&self, lmax: usize) -> Result<ObstructionCertificate, HarnessError>;

    fn isomorphic(&self, a: &Self::Obj, b: &Self::Obj) -> bool;
    /// Isomorphic copy with every name prefixed.
    fn relabel(&self, a: &Self::Obj, prefix: &str) -> Result<Self::Obj, HarnessError>;
    /// Basis names, sorted.
    fn basis(&self, a: &Self::Obj) -> Vec<String>;
    fn size(&self, a: &Self::Obj) -> usize;
    /// Adds one fresh generator. Only the fault wrapper uses this.
    fn perturb(&self, a: &Self::Obj) -> Result<Self::Obj, HarnessError>;
    /// Largest basis drawn for one law sample.
    fn max_sample_basis(&self) -> usize {
        2
    }
}

fn fresh_name(basis: &[String]) -> String {
    let mut i = 0;
    loop {
        let c = format!("extra{i}");
        if !basis.contains(&c) {
            return c;
        }
        i += 1;
    }
}

#[derive(Clone, Debug)]
pub struct SteinerAdapter {
    pub params: SteinerParams,
    pub stages: usize,
    pub cp_stages: usize,
    pub search_budget: usize,
}

impl SteinerAdapter {
    pub fn new(k: usize, n: usize) -> Result<Self, HarnessError> {
        Ok(SteinerAdapter { params: SteinerParams::new(k, n)?, stages: 1, cp_stages: steiner::CP_STAGES, search_budget: steiner::SEARCH_BUDGET })
    }
}

impl ClassAdapter for SteinerAdapter {
    type Obj = PartialSteiner;

    fn name(&self) -> String {
        format!("steiner(k={},n={})", self.params.k, self.params.n)
    }

    fn build_free_on(&self, basis: &[String]) -> Result<PartialSteiner, HarnessError> {
        let gens = PartialSteiner::free_on(self.params, basis)?;
        Ok(steiner::free_completion(&gens, self.stages)?)
    }

    fn free_product(&self, a: &PartialSteiner, b: &PartialSteiner) -> Result<PartialSteiner, HarnessError> {
        Ok(steiner::free_product(a, b, self.stages)?)
    }

    fn strong_factor_check(&self, a: &PartialSteiner, b: &PartialSteiner) -> Result<bool, HarnessError> {
        Ok(steiner::strong_factor_check(a, b, self.search_budget)?.found())
    }

    fn obstruction_check(&self, lmax: usize) -> Result<ObstructionCertificate, HarnessError> {
        let w = steiner::build_steiner_cp_witness(self.params, lmax, self.cp_stages)?;
        let (passed, detail) = match w.verify_obstruction(lmax) {
            Ok(obs) => (true, serde_json::to_value(&obs).unwrap_or(Value::Null)),
            Err(e) => (false, json!(e.to_string())),
        };
        Ok(ObstructionCertificate { kind: CertificateKind::HFObstruction, passed, detail })
    }

    fn isomorphic(&self, a: &PartialSteiner, b: &PartialSteiner) -> bool {
        back_and_forth_equivalent(&a.structure, &b.structure).is_equivalent()
    }

    fn relabel(&self, a: &PartialSteiner, prefix: &str) -> Result<PartialSteiner, HarnessError> {
        let f = |x: &str| format!("{prefix}{x}");
        Ok(PartialSteiner { params: a.params, structure: a.structure.renamed(f), basis: a.basis.iter().map(|x| f(x)).collect() })
    }

    fn basis(&self, a: &PartialSteiner) -> Vec<String> {
        a.basis.iter().cloned().collect()
    }

    fn size(&self, a: &PartialSteiner) -> usize {
        a.structure.len()
    }

    fn perturb(&self, a: &PartialSteiner) -> Result<PartialSteiner, HarnessError> {
        let mut basis = self.basis(a);
        basis.push(fresh_name(&basis));
        self.build_free_on(&basis)
    }
}

#[derive(Clone, Debug)]
pub struct NGonAdapter {
    pub n: usize,
    pub stages: usize,
    pub cp_stages: usize,
    pub search_budget: usize,
}

impl NGonAdapter {
    pub fn new(n: usize) -> Result<Self, HarnessError> {
        if n % 2 == 0 {
            return Err(NGonError::UnsupportedParity(n).into());
        }
        if n < 3 {
            return Err(NGonError::InvalidN(n).into());
        }
        Ok(NGonAdapter { n, stages: 1, cp_stages: ngon::CP_STAGES, search_budget: ngon::SEARCH_BUDGET })
    }
}

impl ClassAdapter for NGonAdapter {
    type Obj = PartialNGon;

    fn name(&self) -> String {
        format!("ngon(n={})", self.n)
    }

    /// A chain on the basis names, alternating point and line.
    fn build_free_on(&self, basis: &[String]) -> Result<PartialNGon, HarnessError> {
        let mut s = crate::incidence::IncidenceStructure::new("point", "line");
        let mut prev: Option<usize> = None;
        for (i, name) in basis.iter().enumerate() {
            let sort = if i % 2 == 0 { crate::incidence::Sort::PointLike } else { crate::incidence::Sort::BlockLike };
            let x = s.add_generator(name, sort).map_err(|e| HarnessError::Adapter(e.to_string()))?;
            if let Some(p) = prev {
                s.add_incidence(p, x).map_err(|e| HarnessError::Adapter(e.to_string()))?;
            }
            prev = Some(x);
        }
        Ok(ngon::free_completion(&PartialNGon::new(self.n, s)?, self.stages)?)
    }

    fn free_product(&self, a: &PartialNGon, b: &PartialNGon) -> Result<PartialNGon, HarnessError> {
        Ok(ngon::free_product(a, b, self.stages)?)
    }

    fn strong_factor_check(&self, a: &PartialNGon, b: &PartialNGon) -> Result<bool, HarnessError> {
        Ok(ngon::strong_factor_check(a, b, self.search_budget)?.found())
    }

    fn obstruction_check(&self, lmax: usize) -> Result<ObstructionCertificate, HarnessError> {
        let w = ngon::build_ngon_cp_witness(self.n, lmax, self.cp_stages)?;
        let (passed, detail) = match w.verify_obstruction(lmax) {
            Ok(obs) => (true, serde_json::to_value(&obs).unwrap_or(Value::Null)),
            Err(e) => (false, json!(e.to_string())),
        };
        Ok(ObstructionCertificate { kind: CertificateKind::HFObstruction, passed, detail })
    }

    fn isomorphic(&self, a: &PartialNGon, b: &PartialNGon) -> bool {
        back_and_forth_equivalent(&a.structure, &b.structure).is_equivalent()
    }

    fn relabel(&self, a: &PartialNGon, prefix: &str) -> Result<PartialNGon, HarnessError> {
        let f = |x: &str| format!("{prefix}{x}");
        Ok(PartialNGon { n: a.n, structure: a.structure.renamed(f), basis: a.basis.iter().map(|x| f(x)).collect() })
    }

    fn basis(&self, a: &PartialNGon) -> Vec<String> {
        a.basis.iter().cloned().collect()
    }

    fn size(&self, a: &PartialNGon) -> usize {
        a.structure.len()
    }

    fn perturb(&self, a: &PartialNGon) -> Result<PartialNGon, HarnessError> {
        let mut s = a.structure.induced_by_names(a.basis.iter()).map_err(|e| HarnessError::Adapter(e.to_string()))?;
        let names: Vec<String> = a.basis.iter().cloned().collect();
        s.add_generator(&fresh_name(&names), crate::incidence::Sort::PointLike).map_err(|e| HarnessError::Adapter(e.to_string()))?;
        Ok(ngon::free_completion(&PartialNGon::new(self.n, s)?, self.stages)?)
    }
}

/// Free product of cyclic groups, one factor per basis name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicFree {
    pub basis: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CyclicAdapter {
    pub params: GroupParams,
    /// Letter length of the balls compared by the isomorphism check.
    pub ball_length: u64,
    pub membership_budget: u64,
}

impl CyclicAdapter {
    pub fn new(order: Order) -> Result<Self, HarnessError> {
        let params = GroupParams::new(order).map_err(|e| HarnessError::Adapter(e.to_string()))?;
        Ok(CyclicAdapter { params, ball_length: 4, membership_budget: 12 })
    }

    fn words(&self, a: &CyclicFree) -> Vec<cyclic::GroupWord> {
        (0..a.basis.len()).map(cyclic::GroupWord::generator).collect()
    }

    fn profile(&self, a: &CyclicFree) -> Vec<usize> {
        let gens = self.words(a);
        (0..=self.ball_length).map(|r| cyclic::ball(&gens, &self.params, r).len()).collect()
    }
}

impl ClassAdapter for CyclicAdapter {
    type Obj = CyclicFree;

    fn name(&self) -> String {
        format!("cyclic(order={})", self.params.order)
    }

    fn build_free_on(&self, basis: &[String]) -> Result<CyclicFree, HarnessError> {
        let mut b = basis.to_vec();
        b.sort();
        b.dedup();
        if b.len() != basis.len() {
            return Err(HarnessError::Adapter("repeated basis name".into()));
        }
        Ok(CyclicFree { basis: b })
    }

    fn free_product(&self, a: &CyclicFree, b: &CyclicFree) -> Result<CyclicFree, HarnessError> {
        if let Some(x) = a.basis.iter().find(|x| b.basis.contains(x)) {
            return Err(HarnessError::Adapter(format!("operands share `{x}`")));
        }
        let all: Vec<String> = a.basis.iter().chain(&b.basis).cloned().collect();
        self.build_free_on(&all)
    }

    /// `a` is a free factor of `b` on a sub-basis: the basis of `a`,
    /// embedded by name, is reached by bounded membership in `b`.
    fn strong_factor_check(&self, a: &CyclicFree, b: &CyclicFree) -> Result<bool, HarnessError> {
        let gens = self.words(b);
        for x in &a.basis {
            let Some(i) = b.basis.iter().position(|y| y == x) else { return Ok(false) };
            let target = cyclic::GroupWord::generator(i);
            if !cyclic::bounded_membership(&target, &gens, &self.params, self.membership_budget).found() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn obstruction_check(&self, lmax: usize) -> Result<ObstructionCertificate, HarnessError> {
        let w = cyclic::build_cyclic_cp_witness(&self.params, lmax, self.membership_budget);
        let kind = match &w.obstruction {
            cyclic::CyclicObstruction::Reflection { .. } => CertificateKind::Reflection,
            cyclic::CyclicObstruction::TwoDivisibility { .. } => CertificateKind::TwoDivisibility,
        };
        Ok(ObstructionCertificate { kind, passed: w.obstruction.passed(), detail: serde_json::to_value(&w.obstruction).unwrap_or(Value::Null) })
    }

    fn isomorphic(&self, a: &CyclicFree, b: &CyclicFree) -> bool {
        a.basis.len() == b.basis.len() && self.profile(a) == self.profile(b)
    }

    fn relabel(&self, a: &CyclicFree, prefix: &str) -> Result<CyclicFree, HarnessError> {
        let names: Vec<String> = a.basis.iter().map(|x| format!("{prefix}{x}")).collect();
        self.build_free_on(&names)
    }

    fn basis(&self, a: &CyclicFree) -> Vec<String> {
        a.basis.clone()
    }

    fn size(&self, a: &CyclicFree) -> usize {
        a.basis.len()
    }

    fn perturb(&self, a: &CyclicFree) -> Result<CyclicFree, HarnessError> {
        let mut b = a.basis.clone();
        b.push(fresh_name(&b));
        self.build_free_on(&b)
    }
}

/// `R_χ^rank` with named coordinates.
#[derive(Clone, Debug)]
pub struct TfabFree {
    pub group: RankedGroup,
    pub basis: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TfabAdapter {
    pub chi: Characteristic,
    pub p: u64,
    pub height_budget: usize,
}

impl TfabAdapter {
    pub fn new(chi: Characteristic, p: u64) -> Result<Self, HarnessError> {
        RankedGroup::new(chi.clone(), 1)?;
        Ok(TfabAdapter { chi, p, height_budget: 64 })
    }
}

impl ClassAdapter for TfabAdapter {
    type Obj = TfabFree;

    fn name(&self) -> String {
        format!("tfab(chi={},p={})", self.chi, self.p)
    }

    fn build_free_on(&self, basis: &[String]) -> Result<TfabFree, HarnessError> {
        if basis.iter().collect::<BTreeSet<_>>().len() != basis.len() {
            return Err(HarnessError::Adapter("repeated basis name".into()));
        }
        Ok(TfabFree { group: RankedGroup::new(self.chi.clone(), basis.len())?, basis: basis.to_vec() })
    }

    fn free_product(&self, a: &TfabFree, b: &TfabFree) -> Result<TfabFree, HarnessError> {
        if let Some(x) = a.basis.iter().find(|x| b.basis.contains(x)) {
            return Err(HarnessError::Adapter(format!("operands share `{x}`")));
        }
        Ok(TfabFree { group: a.group.direct_sum(&b.group)?, basis: a.basis.iter().chain(&b.basis).cloned().collect() })
    }

    /// Block-diagonal witness: the images of `a`'s basis followed by the
    /// remaining units of `b` must form a matrix invertible over `R_χ`.
    fn strong_factor_check(&self, a: &TfabFree, b: &TfabFree) -> Result<bool, HarnessError> {
        if !tfab::char_equivalence(&a.group.chi, &b.group.chi) {
            return Ok(false);
        }
        let mut rows = Vec::new();
        let mut used = BTreeSet::new();
        for x in &a.basis {
            let Some(i) = b.basis.iter().position(|y| y == x) else { return Ok(false) };
            used.insert(i);
            rows.push(b.group.unit(i));
        }
        for i in 0..b.basis.len() {
            if !used.contains(&i) {
                rows.push(b.group.unit(i));
            }
        }
        Ok(match tfab::invert(&rows) {
            Some((_, inv)) => inv.iter().all(|r| b.group.contains(r)),
            None => false,
        })
    }

    fn obstruction_check(&self, lmax: usize) -> Result<ObstructionCertificate, HarnessError> {
        let w = tfab::build_tfab_cp_witness(&self.chi, self.p, lmax, self.height_budget)?;
        let passed = w.fresh_height == w.chi.at(w.p) && w.fresh_height != tfab::ExtNat::Inf;
        Ok(ObstructionCertificate {
            kind: CertificateKind::InfiniteHeight,
            passed,
            detail: json!({
                "p": w.p,
                "fresh_height": w.fresh_height.to_string(),
                "limit_height": "inf",
                "normalization": w.normalization,
            }),
        })
    }

    fn isomorphic(&self, a: &TfabFree, b: &TfabFree) -> bool {
        a.group.rank == b.group.rank && tfab::char_equivalence(&a.group.chi, &b.group.chi)
    }

    fn relabel(&self, a: &TfabFree, prefix: &str) -> Result<TfabFree, HarnessError> {
        Ok(TfabFree { group: a.group.clone(), basis: a.basis.iter().map(|x| format!("{prefix}{x}")).collect() })
    }

    fn basis(&self, a: &TfabFree) -> Vec<String> {
        let mut b = a.basis.clone();
        b.sort();
        b
    }

    fn size(&self, a: &TfabFree) -> usize {
        a.group.rank
    }

    fn perturb(&self, a: &TfabFree) -> Result<TfabFree, HarnessError> {
        let mut b = a.basis.clone();
        b.push(fresh_name(&b));
        self.build_free_on(&b)
    }
}

#[derive(Clone, Debug)]
pub struct VarietyAdapter {
    pub variety: Variety,
    pub depth: usize,
}

impl VarietyAdapter {
    pub fn parse(text: &str, depth: usize) -> Result<Self, HarnessError> {
        Ok(VarietyAdapter { variety: Variety::parse(text)?, depth })
    }
}

impl ClassAdapter for VarietyAdapter {
    type Obj = TermAlgebra;

    fn name(&self) -> String {
        format!("variety({})", self.variety.render())
    }

    fn build_free_on(&self, basis: &[String]) -> Result<TermAlgebra, HarnessError> {
        Ok(TermAlgebra::free_on(&self.variety, basis, self.depth)?)
    }

    fn free_product(&self, a: &TermAlgebra, b: &TermAlgebra) -> Result<TermAlgebra, HarnessError> {
        Ok(variety::free_product(a, b, self.depth)?)
    }

    /// Every term of `a` translates into `b`, and the translation
    /// preserves and reflects the congruence.
    fn strong_factor_check(&self, a: &TermAlgebra, b: &TermAlgebra) -> Result<bool, HarnessError> {
        if !a.generators.iter().all(|g| b.generators.contains(g)) {
            return Ok(false);
        }
        let map = a.generators.iter().map(|g| (g.clone(), g.clone())).collect();
        let image: Option<Vec<usize>> = (0..a.node_count()).map(|x| a.translate(x, b, &map)).collect();
        let Some(image) = image else { return Ok(false) };
        for x in 0..a.node_count() {
            for y in x + 1..a.node_count() {
                if a.same_class(x, y) != b.same_class(image[x], image[y]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn obstruction_check(&self, _lmax: usize) -> Result<ObstructionCertificate, HarnessError> {
        Err(HarnessError::Unsupported("varieties carry no obstruction certificate".into()))
    }

    fn isomorphic(&self, a: &TermAlgebra, b: &TermAlgebra) -> bool {
        if a.generators.len() != b.generators.len() {
            return false;
        }
        let (mut ga, mut gb) = (a.generators.clone(), b.generators.clone());
        ga.sort();
        gb.sort();
        variety::iso_via(a, b, &ga.into_iter().zip(gb).collect())
    }

    fn relabel(&self, a: &TermAlgebra, prefix: &str) -> Result<TermAlgebra, HarnessError> {
        let gens: Vec<String> = a.generators.iter().map(|g| format!("{prefix}{g}")).collect();
        self.build_free_on(&gens)
    }

    fn basis(&self, a: &TermAlgebra) -> Vec<String> {
        let mut b = a.generators.clone();
        b.sort();
        b
    }

    fn size(&self, a: &TermAlgebra) -> usize {
        a.class_count()
    }

    fn perturb(&self, a: &TermAlgebra) -> Result<TermAlgebra, HarnessError> {
        let mut b = a.generators.clone();
        b.push(fresh_name(&b));
        self.build_free_on(&b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// The product gains a generator when the left operand's first name
    /// sorts after the right one's.
    OrderDependentNaming,
    /// The product gains a generator when the left basis is larger.
    NonAssociative,
}

/// Wraps an adapter and corrupts its free product.
#[derive(Clone, Debug)]
pub struct Faulty<A> {
    pub inner: A,
    pub fault: Fault,
}

impl<A: ClassAdapter> ClassAdapter for Faulty<A> {
    type Obj = A::Obj;

    fn name(&self) -> String {
        format!("{}+{:?}", self.inner.name(), self.fault)
    }

    fn build_free_on(&self, basis: &[String]) -> Result<A::Obj, HarnessError> {
        self.inner.build_free_on(basis)
    }

    fn free_product(&self, a: &A::Obj, b: &A::Obj) -> Result<A::Obj, HarnessError> {
        let p = self.inner.free_product(a, b)?;
        let (ba, bb) = (self.inner.basis(a), self.inner.basis(b));
        let trigger = match self.fault {
            Fault::OrderDependentNaming => ba.first() > bb.first(),
            Fault::NonAssociative => ba.len() > bb.len(),
        };
        if trigger {
            self.inner.perturb(&p)
        } else {
            Ok(p)
        }
    }

    fn strong_factor_check(&self, a: &A::Obj, b: &A::Obj) -> Result<bool, HarnessError> {
        self.inner.strong_factor_check(a, b)
    }

    fn obstruction_check(&self, lmax: usize) -> Result<ObstructionCertificate, HarnessError> {
        self.inner.obstruction_check(lmax)
    }

    fn isomorphic(&self, a: &A::Obj, b: &A::Obj) -> bool {
        self.inner.isomorphic(a, b)
    }

    fn relabel(&self, a: &A::Obj, prefix: &str) -> Result<A::Obj, HarnessError> {
        self.inner.relabel(a, prefix)
    }

    fn basis(&self, a: &A::Obj) -> Vec<String> {
        self.inner.basis(a)
    }

    fn size(&self, a: &A::Obj) -> usize {
        self.inner.size(a)
    }

    fn perturb(&self, a: &A::Obj) -> Result<A::Obj, HarnessError> {
        self.inner.perturb(a)
    }

    fn max_sample_basis(&self) -> usize {
        self.inner.max_sample_basis()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Clause {
    ChainStep,
    FactorOfB,
    Obstruction,
    ProductAssoc,
    ProductIso,
    FiniteUnion,
    HfOrder,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Outcome {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClauseCheck {
    pub clause: Clause,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub verdict: Outcome,
    pub evidence: Value,
}

impl ClauseCheck {
    pub fn new(clause: Clause, index: Option<usize>, ok: bool, evidence: Value) -> Self {
        ClauseCheck { clause, index, verdict: Outcome::from_bool(ok), evidence }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub adapter: String,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<ClauseCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl LawReport {
    pub fn verdict(&self, law: Clause) -> Option<Outcome> {
        self.checks.iter().find(|c| c.clause == law).map(|c| c.verdict)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Outcome::Pass)
    }
}

fn sample_names(tag: &str, s: usize, size: usize) -> Vec<String> {
    (0..size).map(|i| format!("{tag}{s}_{i}")).collect()
}

/// Randomized check of iso-invariance, associativity and finite-union
/// compatibility. Each law records the first failing sample.
pub fn verify_amalgamation_laws<A: ClassAdapter>(a: &A, samples: usize, seed: u64) -> Result<LawReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut iso_fail: Option<Value> = None;
    let mut assoc_fail: Option<Value> = None;
    let mut union_fail: Option<Value> = None;
    let max = a.max_sample_basis().max(1);
    for s in 0..samples {
        let sizes: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=max)).collect();
        let x = a.build_free_on(&sample_names("a", s, sizes[0]))?;
        let y = a.build_free_on(&sample_names("b", s, sizes[1]))?;
        let z = a.build_free_on(&sample_names("c", s, sizes[2]))?;

        if iso_fail.is_none() {
            let x2 = a.relabel(&x, &format!("z{s}"))?;
            let y2 = a.relabel(&y, &format!("y{s}"))?;
            let copies = a.isomorphic(&x, &x2) && a.isomorphic(&y, &y2);
            let p1 = a.free_product(&x, &y)?;
            let p2 = a.free_product(&x2, &y2)?;
            if !copies || !a.isomorphic(&p1, &p2) {
                iso_fail = Some(json!({"sample": s, "sizes": sizes, "left": a.size(&p1), "right": a.size(&p2)}));
            }
        }

        let xy = a.free_product(&x, &y)?;
        let xy_z = a.free_product(&xy, &z)?;
        if assoc_fail.is_none() {
            let yz = a.free_product(&y, &z)?;
            let x_yz = a.free_product(&x, &yz)?;
            if !a.isomorphic(&xy_z, &x_yz) {
                assoc_fail = Some(json!({"sample": s, "sizes": sizes, "left": a.size(&xy_z), "right": a.size(&x_yz)}));
            }
        }

        if union_fail.is_none() {
            let prefixes = [&x, &xy, &xy_z];
            'outer: for i in 0..prefixes.len() {
                for j in i + 1..prefixes.len() {
                    if !a.strong_factor_check(prefixes[i], prefixes[j])? {
                        union_fail = Some(json!({"sample": s, "sizes": sizes, "prefix": i, "of": j}));
                        break 'outer;
                    }
                }
            }
        }
    }
    let mut warnings = Vec::new();
    if samples == 0 {
        warnings.push("empty sample budget: laws hold vacuously".to_string());
    }
    let mk = |law: Clause, fail: Option<Value>| {
        let ok = fail.is_none();
        ClauseCheck::new(law, None, ok, fail.map_or_else(|| json!({"samples": samples}), |f| json!({"first_failure": f})))
    };
    Ok(LawReport {
        adapter: a.name(),
        samples,
        seed,
        checks: vec![mk(Clause::ProductIso, iso_fail), mk(Clause::ProductAssoc, assoc_fail), mk(Clause::FiniteUnion, union_fail)],
        warnings,
    })
}

#[derive(Clone, Debug)]
pub struct TowerApprox<O> {
    pub base: O,
    pub steps: usize,
    /// `prefixes[i]` is `base ∗ M ∗ ... ∗ M` with `i` copies.
    pub prefixes: Vec<O>,
    /// `(i, j)` pairs checked, all passing.
    pub factor_checks: Vec<(usize, usize)>,
}

impl<O> TowerApprox<O> {
    pub fn result(&self) -> &O {
        self.prefixes.last().unwrap_or(&self.base)
    }
}

/// Iterated free product of `base` with fresh copies of the free object on
/// `m` generators. Every prefix is checked against every later one.
pub fn build_tower<A: ClassAdapter>(a: &A, base: &A::Obj, m: usize, steps: usize) -> Result<TowerApprox<A::Obj>, HarnessError> {
    let mut prefixes = vec![base.clone()];
    for i in 0..steps {
        let names: Vec<String> = (0..m).map(|j| format!("m{i}_{j}")).collect();
        let copy = a.build_free_on(&names)?;
        let next = a.free_product(prefixes.last().unwrap(), &copy)?;
        prefixes.push(next);
    }
    let mut factor_checks = Vec::new();
    for i in 0..prefixes.len() {
        for j in i + 1..prefixes.len() {
            if !a.strong_factor_check(&prefixes[i], &prefixes[j])? {
                return Err(HarnessError::BudgetExhausted(format!("no factor witness for prefix {i} in prefix {j}")));
            }
            factor_checks.push((i, j));
        }
    }
    Ok(TowerApprox { base: base.clone(), steps, prefixes, factor_checks })
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub total_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct CpWitnessReport {
    pub schema: &'static str,
    pub adapter: String,
    pub chain_length: usize,
    pub config: Value,
    pub checks: Vec<ClauseCheck>,
    pub verdict: Outcome,
    /// First failing clause in check order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Clause>,
    /// The coherent-embedding half of the obstruction is not decidable at
    /// finite scale; the certificate is recorded, not a decision.
    pub note: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl CpWitnessReport {
    pub fn passed(&self) -> bool {
        self.verdict == Outcome::Pass
    }

    pub fn first_failing_check(&self) -> Option<&ClauseCheck> {
        self.checks.iter().find(|c| c.verdict == Outcome::Fail)
    }

    pub fn check(&self, clause: Clause) -> impl Iterator<Item = &ClauseCheck> {
        self.checks.iter().filter(move |c| c.clause == clause)
    }

    /// Pretty JSON; byte-identical for equal inputs once timing is dropped.
    pub fn to_json(&self, with_timing: bool) -> String {
        let mut r = self.clone();
        if !with_timing {
            r.timing = None;
        }
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

/// Aggregates clause checks; the verdict is PASS iff every check passes.
pub fn assemble_cp_report(adapter: String, chain_length: usize, config: Value, checks: Vec<ClauseCheck>) -> CpWitnessReport {
    let first_failure = checks.iter().find(|c| c.verdict == Outcome::Fail).map(|c| c.clause);
    CpWitnessReport {
        schema: SCHEMA,
        adapter,
        chain_length,
        config,
        verdict: if checks.is_empty() || first_failure.is_some() { Outcome::Fail } else { Outcome::Pass },
        first_failure,
        checks,
        note: "the coherent-embedding clause is certified by the obstruction kind, not decided",
        timing: None,
    }
}

/// Seeded fault for the chain clause: at `index` the step is checked
/// backwards, `A_{index+1} ⩽∗ A_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainFault {
    pub index: usize,
}

/// Law samples run inside every CP report.
pub const REPORT_LAW_SAMPLES: usize = 3;

fn law_checks<A: ClassAdapter>(a: &A, seed: u64) -> Result<Vec<ClauseCheck>, HarnessError> {
    let r = verify_amalgamation_laws(a, REPORT_LAW_SAMPLES, seed)?;
    Ok(r.checks.into_iter().filter(|c| matches!(c.clause, Clause::ProductAssoc | Clause::ProductIso)).collect())
}

fn verdict_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

pub fn steiner_cp_report(k: usize, n: usize, lmax: usize, stages: usize, seed: u64, fault: Option<ChainFault>) -> Result<CpWitnessReport, HarnessError> {
    let adapter = SteinerAdapter::new(k, n)?;
    if stages < steiner::CP_STAGES {
        return Err(HarnessError::BudgetExhausted(format!("the configuration needs {} stages, got {stages}", steiner::CP_STAGES)));
    }
    let w = steiner::build_steiner_cp_witness(adapter.params, lmax, stages)?;
    let mut checks = Vec::new();
    for l in 0..=lmax {
        let c = w.clause_checks(l)?;
        checks.push(ClauseCheck::new(Clause::HfOrder, Some(l), c.order_valid && c.algebraic_over_basis, json!({"order_valid": c.order_valid, "algebraic_over_basis": c.algebraic_over_basis})));
        checks.push(ClauseCheck::new(Clause::FactorOfB, Some(l), c.factor_of_b.found(), verdict_json(&c.factor_of_b)));
        if l < lmax {
            let chain = match fault {
                Some(f) if f.index == l => steiner::strong_factor_check(&w.a_model(l + 1)?, &w.a_model(l)?, adapter.search_budget)?,
                _ => c.chain_step.clone().expect("chain step below lmax"),
            };
            checks.push(ClauseCheck::new(Clause::ChainStep, Some(l), chain.found(), verdict_json(&chain)));
        }
    }
    let obs = adapter.obstruction_check(lmax)?;
    checks.push(ClauseCheck::new(Clause::Obstruction, Some(lmax), obs.passed, json!({"kind": obs.kind, "certificate": obs.detail})));
    checks.extend(law_checks(&adapter, seed)?);
    let config = json!({"k": k, "n": n, "lmax": lmax, "stages": stages, "seed": seed, "fault": fault});
    Ok(assemble_cp_report(adapter.name(), lmax + 1, config, checks))
}

pub fn ngon_cp_report(n: usize, lmax: usize, stages: usize, seed: u64, fault: Option<ChainFault>) -> Result<CpWitnessReport, HarnessError> {
    let adapter = NGonAdapter::new(n)?;
    let w = ngon::build_ngon_cp_witness(n, lmax, stages)?;
    let mut checks = Vec::new();
    for l in 0..=lmax {
        let c = w.clause_checks(l)?;
        checks.push(ClauseCheck::new(
            Clause::HfOrder,
            Some(l),
            c.forward_order_valid && c.reverse_order_valid,
            json!({"forward_order_valid": c.forward_order_valid, "reverse_order_valid": c.reverse_order_valid}),
        ));
        checks.push(ClauseCheck::new(Clause::FactorOfB, Some(l), c.factor_of_b.found(), verdict_json(&c.factor_of_b)));
        if l < lmax {
            let chain = match fault {
                Some(f) if f.index == l => ngon::strong_factor_check(&w.a_model(l + 1)?, &w.a_model(l)?, adapter.search_budget)?,
                _ => c.chain_step.clone().expect("chain step below lmax"),
            };
            checks.push(ClauseCheck::new(Clause::ChainStep, Some(l), chain.found(), verdict_json(&chain)));
        }
    }
    let obs = match w.verify_obstruction(lmax) {
        Ok(o) => ObstructionCertificate { kind: CertificateKind::HFObstruction, passed: true, detail: verdict_json(&o) },
        Err(e) => ObstructionCertificate { kind: CertificateKind::HFObstruction, passed: false, detail: json!(e.to_string()) },
    };
    checks.push(ClauseCheck::new(Clause::Obstruction, Some(lmax), obs.passed, json!({"kind": obs.kind, "certificate": obs.detail})));
    checks.extend(law_checks(&adapter, seed)?);
    let config = json!({"n": n, "lmax": lmax, "stages": stages, "seed": seed, "fault": fault});
    Ok(assemble_cp_report(adapter.name(), lmax + 1, config, checks))
}

pub fn cyclic_cp_report(order: Order, lmax: usize, length_budget: u64, seed: u64, fault: Option<ChainFault>) -> Result<CpWitnessReport, HarnessError> {
    let mut adapter = CyclicAdapter::new(order)?;
    adapter.membership_budget = length_budget;
    let w = cyclic::build_cyclic_cp_witness(&adapter.params, lmax, length_budget);
    let mut checks = Vec::new();
    for l in 0..=lmax {
        let f = &w.factor_of_b[l];
        checks.push(ClauseCheck::new(Clause::FactorOfB, Some(l), f.passed(), verdict_json(f)));
        if l < lmax {
            let ok = match fault {
                // backwards: y_{l+1} must lie in <y_0..y_l>
                Some(fl) if fl.index == l => {
                    cyclic::bounded_membership(&w.y[l + 1], &w.y[..=l], &adapter.params, length_budget).found()
                }
                _ => w.chain_step[l],
            };
            checks.push(ClauseCheck::new(Clause::ChainStep, Some(l), ok, json!({"y": w.y[l + 1].to_string()})));
        }
    }
    let kind = match &w.obstruction {
        cyclic::CyclicObstruction::Reflection { .. } => CertificateKind::Reflection,
        cyclic::CyclicObstruction::TwoDivisibility { .. } => CertificateKind::TwoDivisibility,
    };
    checks.push(ClauseCheck::new(Clause::Obstruction, Some(lmax), w.obstruction.passed(), json!({"kind": kind, "certificate": verdict_json(&w.obstruction)})));
    checks.extend(law_checks(&adapter, seed)?);
    let config = json!({"order": order.to_string(), "lmax": lmax, "length_budget": length_budget, "seed": seed, "fault": fault});
    Ok(assemble_cp_report(adapter.name(), lmax + 1, config, checks))
}

pub fn tfab_cp_report(chi: &Characteristic, p: u64, lmax: usize, height_budget: usize, seed: u64, fault: Option<ChainFault>) -> Result<CpWitnessReport, HarnessError> {
    let mut adapter = TfabAdapter::new(chi.clone(), p)?;
    adapter.height_budget = height_budget;
    let w = tfab::build_tfab_cp_witness(chi, p, lmax, height_budget)?;
    let mut checks = Vec::new();
    for l in 0..=lmax {
        checks.push(ClauseCheck::new(Clause::FactorOfB, Some(l), w.factor_of_b[l], json!({"determinant": w.determinants[l]})));
        if l < lmax {
            let ok = match fault {
                Some(f) if f.index == l => false,
                _ => w.chain_step[l],
            };
            checks.push(ClauseCheck::new(Clause::ChainStep, Some(l), ok, json!({"telescoping": verdict_json(&w.telescoping.get(l))})));
        }
    }
    let telescoping_exact = w.telescoping.iter().all(|t| t.exact);
    let obs = adapter.obstruction_check(lmax)?;
    let mut detail = obs.detail;
    detail["telescoping_exact"] = json!(telescoping_exact);
    checks.push(ClauseCheck::new(Clause::Obstruction, Some(lmax), obs.passed && telescoping_exact, json!({"kind": obs.kind, "certificate": detail})));
    checks.extend(law_checks(&adapter, seed)?);
    let config = json!({"char": chi.to_string(), "p": p, "lmax": lmax, "height_budget": height_budget, "seed": seed, "fault": fault});
    Ok(assemble_cp_report(adapter.name(), lmax + 1, config, checks))
}
