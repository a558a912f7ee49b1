//! Projective planes as 3-gons: the lazy free completion, Hall's
//! configurations and canonical bases.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::incidence::{IncidenceError, IncidenceStructure, Provenance, ProvenanceKind, Sort};
use crate::iso::{self, PartialIsoFamily, Verdict};
use crate::ngon::{self, NGonError, PartialNGon};

#[derive(Debug, Error)]
pub enum PlaneError {
    #[error("`{0}` and `{1}` have no common neighbour yet")]
    NotYetConstructed(String, String),
    #[error("axiom violation: {0}")]
    AxiomViolation(String),
    #[error("degenerate configuration: k = {0} is below 4")]
    Degenerate(usize),
    #[error("stage budget {0} exhausted")]
    BudgetExhausted(usize),
    #[error("malformed order: {0}")]
    MalformedOrder(String),
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error(transparent)]
    NGon(#[from] NGonError),
}

/// The unique common neighbour of two elements of the same sort.
pub fn join_meet(s: &IncidenceStructure, x: &str, y: &str) -> Result<String, PlaneError> {
    let (a, b) = (s.require(x)?, s.require(y)?);
    if a == b || s.sort(a) != s.sort(b) {
        return Err(PlaneError::AxiomViolation(format!("`{x}` and `{y}` are not two elements of one sort")));
    }
    let common: Vec<usize> = s.neighbors(a).iter().copied().filter(|&z| s.incident(z, b)).collect();
    match common.as_slice() {
        [] => Err(PlaneError::NotYetConstructed(x.into(), y.into())),
        [z] => Ok(s.name(*z).to_string()),
        _ => Err(PlaneError::AxiomViolation(format!("`{x}` and `{y}` have {} common neighbours", common.len()))),
    }
}

/// Hall's configuration: a line, `k - 2` points on it, two points off it.
pub fn hall_config(k: usize) -> Result<PartialNGon, PlaneError> {
    if k < 4 {
        return Err(PlaneError::Degenerate(k));
    }
    let mut s = IncidenceStructure::new("point", "line");
    let l = s.add_generator("l", Sort::BlockLike)?;
    for i in 1..=k - 2 {
        let q = s.add_generator(&format!("q{i}"), Sort::PointLike)?;
        s.add_incidence(q, l)?;
    }
    s.add_generator("r1", Sort::PointLike)?;
    s.add_generator("r2", Sort::PointLike)?;
    Ok(PartialNGon::new(3, s)?)
}

/// Element counts after each completion round.
pub fn stage_counts(a: &PartialNGon, stages: usize) -> Result<Vec<usize>, PlaneError> {
    let mut out = vec![a.structure.len()];
    let mut cur = a.clone();
    for _ in 0..stages {
        cur = ngon::free_completion(&cur, 1)?;
        out.push(cur.structure.len());
    }
    Ok(out)
}

pub type Elt = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Term {
    Gen(usize),
    Connect(Elt, Elt),
}

/// The free completion of a finite partial plane, built on demand.
///
/// A completion element is incident with its two parents, with the
/// elements it is a parent of, and with nothing else.
#[derive(Clone, Debug)]
pub struct FreePlane {
    base: IncidenceStructure,
    terms: Vec<Term>,
    sorts: Vec<Sort>,
    stages: Vec<usize>,
    index: HashMap<Term, Elt>,
}

impl FreePlane {
    pub fn new(base: IncidenceStructure) -> Result<Self, PlaneError> {
        let checked = PartialNGon::new(3, base)?;
        let base = checked.structure;
        let mut p = FreePlane { base, terms: Vec::new(), sorts: Vec::new(), stages: Vec::new(), index: HashMap::new() };
        for i in p.base.indices() {
            p.intern(Term::Gen(i), p.base.sort(i), 0);
        }
        Ok(p)
    }

    fn intern(&mut self, t: Term, sort: Sort, stage: usize) -> Elt {
        if let Some(&e) = self.index.get(&t) {
            return e;
        }
        let e = self.terms.len();
        self.terms.push(t);
        self.sorts.push(sort);
        self.stages.push(stage);
        self.index.insert(t, e);
        e
    }

    pub fn base(&self) -> &IncidenceStructure {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn generator(&self, name: &str) -> Result<Elt, PlaneError> {
        Ok(self.base.require(name)?)
    }

    pub fn sort(&self, e: Elt) -> Sort {
        self.sorts[e]
    }

    pub fn stage(&self, e: Elt) -> usize {
        self.stages[e]
    }

    pub fn parents(&self, e: Elt) -> Option<(Elt, Elt)> {
        match self.terms[e] {
            Term::Gen(_) => None,
            Term::Connect(a, b) => Some((a, b)),
        }
    }

    pub fn name(&self, e: Elt) -> String {
        match self.terms[e] {
            Term::Gen(i) => self.base.name(i).to_string(),
            Term::Connect(a, b) => {
                let op = if self.sorts[e] == Sort::BlockLike { "v" } else { "^" };
                format!("({} {op} {})", self.name(a), self.name(b))
            }
        }
    }

    pub fn incident(&self, x: Elt, y: Elt) -> bool {
        if self.sorts[x] == self.sorts[y] {
            return false;
        }
        match (self.terms[x], self.terms[y]) {
            (Term::Gen(i), Term::Gen(j)) => self.base.incident(i, j),
            (_, Term::Connect(a, b)) if a == x || b == x => true,
            (Term::Connect(a, b), _) => a == y || b == y,
            _ => false,
        }
    }

    /// Neighbours created no later than `x`.
    fn older_neighbours(&self, x: Elt) -> Vec<Elt> {
        match self.terms[x] {
            Term::Gen(i) => self.base.neighbors(i).to_vec(),
            Term::Connect(a, b) => vec![a, b],
        }
    }

    /// `x ∨ y` for points, `x ∧ y` for lines.
    pub fn connect(&mut self, x: Elt, y: Elt) -> Result<Elt, PlaneError> {
        if x == y || self.sorts[x] != self.sorts[y] {
            return Err(PlaneError::AxiomViolation(format!(
                "`{}` and `{}` are not two elements of one sort",
                self.name(x),
                self.name(y)
            )));
        }
        for (u, v) in [(x, y), (y, x)] {
            if let Some(z) = self.older_neighbours(u).into_iter().find(|&z| self.incident(z, v)) {
                return Ok(z);
            }
        }
        let (a, b) = (x.min(y), x.max(y));
        let stage = 1 + self.stages[a].max(self.stages[b]);
        Ok(self.intern(Term::Connect(a, b), self.sorts[x].other(), stage))
    }

    pub fn connect_within(&mut self, x: Elt, y: Elt, budget: usize) -> Result<Elt, PlaneError> {
        let z = self.connect(x, y)?;
        if self.stages[z] > budget {
            return Err(PlaneError::BudgetExhausted(budget));
        }
        Ok(z)
    }

    /// Replays a stage-by-stage completion of the base, returning the
    /// element for every name. Completion elements must record their two
    /// parents.
    pub fn embed(&mut self, s: &IncidenceStructure) -> Result<BTreeMap<String, Elt>, PlaneError> {
        let mut map = BTreeMap::new();
        for i in s.indices() {
            let prov = s.provenance(i);
            let e = match prov.kind {
                ProvenanceKind::Generator => self.generator(s.name(i))?,
                ProvenanceKind::CompletionStep => {
                    let [a, b] = prov.parents.as_slice() else {
                        return Err(PlaneError::MalformedOrder(format!("`{}` needs two parents", s.name(i))));
                    };
                    let a = *map.get(a).ok_or_else(|| IncidenceError::IdNotFound(a.clone()))?;
                    let b = *map.get(b).ok_or_else(|| IncidenceError::IdNotFound(b.clone()))?;
                    self.connect(a, b)?
                }
            };
            map.insert(s.name(i).to_string(), e);
        }
        Ok(map)
    }

    /// Structure induced on `elts`, under their term names.
    pub fn induced(&self, elts: &[Elt]) -> Result<IncidenceStructure, PlaneError> {
        let mut s = IncidenceStructure::new("point", "line");
        let mut ids = Vec::new();
        for &e in elts {
            ids.push(s.add_element(&self.name(e), self.sorts[e], Provenance::step(self.stages[e], Vec::new()))?);
        }
        for (i, &x) in elts.iter().enumerate() {
            for (j, &y) in elts.iter().enumerate().skip(i + 1) {
                if self.incident(x, y) {
                    s.add_incidence(ids[i], ids[j])?;
                }
            }
        }
        Ok(s)
    }

    /// Image of `e` under the homomorphism into `target` fixed on generators.
    pub fn evaluate_into(
        &self,
        e: Elt,
        target: &mut FreePlane,
        gens: &BTreeMap<String, Elt>,
        memo: &mut HashMap<Elt, Elt>,
    ) -> Result<Elt, PlaneError> {
        if let Some(&v) = memo.get(&e) {
            return Ok(v);
        }
        let v = match self.terms[e] {
            Term::Gen(i) => {
                let name = self.base.name(i);
                *gens.get(name).ok_or_else(|| IncidenceError::IdNotFound(name.to_string()))?
            }
            Term::Connect(a, b) => {
                let (x, y) = (self.evaluate_into(a, target, gens, memo)?, self.evaluate_into(b, target, gens, memo)?);
                target.connect(x, y)?
            }
        };
        memo.insert(e, v);
        Ok(v)
    }
}

/// Small expression over the canonical frame.
#[derive(Clone, Debug, Serialize)]
pub enum Expr {
    A(usize),
    Line,
    D(usize),
    Gen(String),
    Connect(Box<Expr>, Box<Expr>),
}

fn cx(a: Expr, b: Expr) -> Expr {
    Expr::Connect(Box::new(a), Box::new(b))
}

struct Frame<'a> {
    a: [Elt; 5],
    line: Elt,
    d: &'a [Elt],
    gens: &'a BTreeMap<String, Elt>,
}

fn eval(p: &mut FreePlane, e: &Expr, f: &Frame, budget: usize) -> Result<Elt, PlaneError> {
    Ok(match e {
        Expr::A(i) => f.a[*i],
        Expr::Line => f.line,
        Expr::D(j) => f.d[*j],
        Expr::Gen(n) => *f.gens.get(n).ok_or_else(|| IncidenceError::IdNotFound(n.clone()))?,
        Expr::Connect(x, y) => {
            let (x, y) = (eval(p, x, f, budget)?, eval(p, y, f, budget)?);
            p.connect_within(x, y, budget)?
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CaseKind {
    /// Incident to two earlier elements, hence already generated.
    Absorbed,
    /// A point whose only earlier incidence is the fixed line.
    OnLine,
    FreePoint,
    PointOnLine,
    FreeLine,
    LineThroughPoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseStep {
    pub generator: String,
    pub case: CaseKind,
    /// Forward formulas for the new points on the fixed line.
    pub replacements: Vec<Expr>,
    /// The generator in terms of the canonical frame.
    pub inverse: Expr,
}

#[derive(Clone, Debug)]
pub struct Canonicalization {
    pub plane: FreePlane,
    pub a: [Elt; 5],
    pub line: Elt,
    pub d: Vec<Elt>,
    pub steps: Vec<CaseStep>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalBasis {
    pub points: Vec<String>,
    pub line: String,
    pub on_line: Vec<String>,
}

/// The first five points by name, then each element as soon as it meets
/// the earlier ones, smallest names first.
pub fn derive_order(s: &IncidenceStructure) -> Result<Vec<String>, PlaneError> {
    let mut pts: Vec<usize> = s.indices().filter(|&i| s.sort(i) == Sort::PointLike).collect();
    pts.sort_by_key(|&i| s.name(i).to_string());
    if pts.len() < 5 {
        return Err(PlaneError::MalformedOrder("fewer than five points".into()));
    }
    let mut placed = vec![false; s.len()];
    let mut order = Vec::new();
    for &i in pts.iter().take(5) {
        placed[i] = true;
        order.push(i);
    }
    while order.len() < s.len() {
        let next = s
            .indices()
            .filter(|&i| !placed[i])
            .min_by_key(|&i| (s.neighbors(i).iter().filter(|&&j| placed[j]).count() == 0, s.name(i).to_string()))
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    Ok(order.into_iter().map(|i| s.name(i).to_string()).collect())
}

/// Rewrites the generators of `base` into five points, the line through
/// the first two, and points on that line, one generator at a time.
pub fn canonicalize(base: &IncidenceStructure, order: &[String], budget: usize) -> Result<Canonicalization, PlaneError> {
    let mut plane = FreePlane::new(base.clone())?;
    if order.len() != base.len() || order.iter().collect::<BTreeSet<_>>().len() != base.len() {
        return Err(PlaneError::MalformedOrder("order must list every generator once".into()));
    }
    let mut a = [0; 5];
    for (i, name) in order.iter().take(5).enumerate() {
        let e = plane.generator(name)?;
        if plane.sort(e) != Sort::PointLike {
            return Err(PlaneError::MalformedOrder(format!("`{name}` must be a point")));
        }
        a[i] = e;
    }
    if a.iter().any(|&x| a.iter().any(|&y| plane.incident(x, y))) {
        return Err(PlaneError::MalformedOrder("the first five points must be independent".into()));
    }
    let line = plane.connect_within(a[0], a[1], budget)?;
    let gens: BTreeMap<String, Elt> = base.indices().map(|i| (base.name(i).to_string(), i)).collect();
    let mut earlier: BTreeSet<Elt> = a.iter().copied().collect();
    let mut d: Vec<Elt> = Vec::new();
    let mut steps = Vec::new();
    for name in &order[5..] {
        let c = plane.generator(name)?;
        let prev: Vec<Elt> = base.neighbors(c).iter().copied().filter(|j| earlier.contains(j)).collect();
        let g = |e: Elt| Expr::Gen(base.name(e).to_string());
        let on = |p: &FreePlane, x: Elt, l: Elt| p.incident(x, l);
        let (case, replacements, inverse) = match (plane.sort(c), prev.as_slice()) {
            (_, [x, y]) => (CaseKind::Absorbed, vec![], cx(g(*x), g(*y))),
            (Sort::PointLike, [l1]) if *l1 == line => (CaseKind::OnLine, vec![Expr::Gen(name.clone())], Expr::D(d.len())),
            (Sort::PointLike, []) => {
                let (d0, d1) = (d.len(), d.len() + 1);
                let r = vec![cx(cx(g(c), Expr::A(2)), Expr::Line), cx(cx(g(c), Expr::A(3)), Expr::Line)];
                (CaseKind::FreePoint, r, cx(cx(Expr::A(2), Expr::D(d0)), cx(Expr::A(3), Expr::D(d1))))
            }
            (Sort::PointLike, [l1]) => {
                let k = (2..5).find(|&k| !on(&plane, a[k], *l1)).ok_or_else(|| degenerate(name))?;
                let r = vec![cx(cx(g(c), Expr::A(k)), Expr::Line)];
                (CaseKind::PointOnLine, r, cx(g(*l1), cx(Expr::A(k), Expr::D(d.len()))))
            }
            (Sort::BlockLike, []) => {
                let (d0, d1) = (d.len(), d.len() + 1);
                let p0 = cx(g(c), cx(Expr::A(2), Expr::A(3)));
                let r = vec![cx(g(c), Expr::Line), cx(cx(Expr::A(4), p0), Expr::Line)];
                let p0_back = cx(cx(Expr::A(2), Expr::A(3)), cx(Expr::A(4), Expr::D(d1)));
                (CaseKind::FreeLine, r, cx(Expr::D(d0), p0_back))
            }
            (Sort::BlockLike, [q]) if on(&plane, *q, line) => {
                let mut pick = None;
                for (i, j, k) in [(2, 3, 4), (2, 4, 3), (3, 4, 2)] {
                    let l0 = plane.connect_within(a[i], a[j], budget)?;
                    if !on(&plane, *q, l0) && !on(&plane, a[k], l0) {
                        pick = Some((i, j, k));
                        break;
                    }
                }
                let (i, j, k) = pick.ok_or_else(|| degenerate(name))?;
                let l0 = || cx(Expr::A(i), Expr::A(j));
                let r = vec![cx(cx(Expr::A(k), cx(g(c), l0())), Expr::Line)];
                (CaseKind::LineThroughPoint, r, cx(g(*q), cx(l0(), cx(Expr::A(k), Expr::D(d.len())))))
            }
            (Sort::BlockLike, [q]) => {
                (CaseKind::LineThroughPoint, vec![cx(g(c), Expr::Line)], cx(g(*q), Expr::D(d.len())))
            }
            (_, more) => {
                return Err(PlaneError::MalformedOrder(format!("`{name}` has {} earlier incidences", more.len())));
            }
        };
        let frame = Frame { a, line, d: &d, gens: &gens };
        let mut new_d = Vec::new();
        for r in &replacements {
            let e = eval(&mut plane, r, &frame, budget)?;
            if !plane.incident(e, line) {
                return Err(PlaneError::AxiomViolation(format!("replacement for `{name}` is off the line")));
            }
            new_d.push(e);
        }
        if case == CaseKind::Absorbed {
            let e = eval(&mut plane, &inverse, &frame, budget)?;
            if e != c {
                return Err(PlaneError::MalformedOrder(format!("`{name}` is not the join of its earlier neighbours")));
            }
        }
        d.extend(new_d);
        earlier.insert(c);
        steps.push(CaseStep { generator: name.clone(), case, replacements, inverse });
    }
    Ok(Canonicalization { plane, a, line, d, steps })
}

fn degenerate(name: &str) -> PlaneError {
    PlaneError::AxiomViolation(format!("no auxiliary element in general position for `{name}`"))
}

pub const FRAME_LINE: &str = "L";

pub fn frame_point(j: usize) -> String {
    format!("d{j}")
}

impl Canonicalization {
    pub fn basis(&self) -> CanonicalBasis {
        CanonicalBasis {
            points: self.a.iter().map(|&e| self.plane.name(e)).collect(),
            line: self.plane.name(self.line),
            on_line: self.d.iter().map(|&e| self.plane.name(e)).collect(),
        }
    }

    /// Five free points, the line `L` through the first two, and the
    /// points `d*` on `L`.
    pub fn frame(&self) -> Result<IncidenceStructure, PlaneError> {
        let mut s = IncidenceStructure::new("point", "line");
        let l = s.add_generator(FRAME_LINE, Sort::BlockLike)?;
        for i in 0..5 {
            let p = s.add_generator(&format!("a{i}"), Sort::PointLike)?;
            if i < 2 {
                s.add_incidence(p, l)?;
            }
        }
        for j in 0..self.d.len() {
            let p = s.add_generator(&frame_point(j), Sort::PointLike)?;
            s.add_incidence(p, l)?;
        }
        Ok(s)
    }

    /// The frame elements inside the original completion.
    pub fn frame_values(&self) -> BTreeMap<String, Elt> {
        let mut m = BTreeMap::new();
        m.insert(FRAME_LINE.to_string(), self.line);
        for (i, &e) in self.a.iter().enumerate() {
            m.insert(format!("a{i}"), e);
        }
        for (j, &e) in self.d.iter().enumerate() {
            m.insert(frame_point(j), e);
        }
        m
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RecompletionReport {
    pub frame_is_clean: bool,
    pub round_trip: bool,
    pub equivalence: PartialIsoFamily,
}

impl RecompletionReport {
    pub fn passed(&self) -> bool {
        self.frame_is_clean && self.round_trip && self.equivalence.verdict == Verdict::Equivalent
    }
}

/// Re-completes the canonical frame and maps the truncation `t` of the
/// original completion into it. Checks that the frame sits in the original
/// plane with exactly its own incidences, that the map composed with the
/// evaluation back is the identity on `t`, and that the image is
/// back-and-forth equivalent to `t`.
pub fn verify_recompletion(
    c: &Canonicalization,
    t: &IncidenceStructure,
    budget: usize,
) -> Result<RecompletionReport, PlaneError> {
    let mut original = c.plane.clone();
    let frame = c.frame()?;
    let values = c.frame_values();
    let names = frame.names_sorted().into_iter().map(String::from).collect::<Vec<_>>();
    let elts: Vec<Elt> = names.iter().map(|n| values[n]).collect();
    let placed = original.induced(&elts)?;
    let frame_is_clean = names.iter().enumerate().all(|(i, x)| {
        names.iter().enumerate().all(|(j, y)| {
            frame.incident(frame.id(x).unwrap(), frame.id(y).unwrap()) == placed.incident(i, j)
        })
    });

    let mut fresh = FreePlane::new(frame.clone())?;
    let frame_gens: BTreeMap<String, Elt> = names.iter().map(|n| (n.clone(), fresh.generator(n).unwrap())).collect();
    let fa: [Elt; 5] = std::array::from_fn(|i| frame_gens[&format!("a{i}")]);
    let fd: Vec<Elt> = (0..c.d.len()).map(|j| frame_gens[&frame_point(j)]).collect();
    let mut psi: BTreeMap<String, Elt> = BTreeMap::new();
    for (i, &e) in c.a.iter().enumerate() {
        psi.insert(c.plane.name(e), fa[i]);
    }
    for step in &c.steps {
        let f = Frame { a: fa, line: frame_gens[FRAME_LINE], d: &fd, gens: &psi };
        let e = eval(&mut fresh, &step.inverse, &f, budget)?;
        psi.insert(step.generator.clone(), e);
    }
    let mut image: BTreeMap<String, Elt> = BTreeMap::new();
    for i in t.indices() {
        let prov = t.provenance(i);
        let e = match prov.kind {
            ProvenanceKind::Generator => psi[t.name(i)],
            ProvenanceKind::CompletionStep => {
                let (x, y) = (image[&prov.parents[0]], image[&prov.parents[1]]);
                fresh.connect(x, y)?
            }
        };
        image.insert(t.name(i).to_string(), e);
    }

    let embedded = original.embed(t)?;
    let mut memo = HashMap::new();
    let mut round_trip = true;
    for (name, &e) in &image {
        let back = fresh.evaluate_into(e, &mut original, &values, &mut memo)?;
        round_trip &= back == embedded[name];
    }
    let order: Vec<Elt> = t.indices().map(|i| image[t.name(i)]).collect();
    let distinct = order.iter().collect::<BTreeSet<_>>().len() == order.len();
    let equivalence = if distinct {
        iso::back_and_forth_equivalent(t, &fresh.induced(&order)?)
    } else {
        PartialIsoFamily { pairs_explored: 0, verdict: Verdict::Distinguished, distinguishing_round: Some(0), witness: None }
    };
    Ok(RecompletionReport { frame_is_clean, round_trip, equivalence })
}

/// Five independent points plus up to `extra` generators, each attached
/// to at most two earlier ones, with girth at least 6.
pub fn random_generators<R: Rng>(extra: usize, rng: &mut R) -> Result<IncidenceStructure, PlaneError> {
    let mut s = IncidenceStructure::new("point", "line");
    for i in 0..5 {
        s.add_generator(&format!("a{i}"), Sort::PointLike)?;
    }
    if rng.gen_bool(0.3) {
        let l = s.add_generator("g0", Sort::BlockLike)?;
        s.add_incidence(0, l)?;
        s.add_incidence(1, l)?;
    }
    for _ in 0..extra {
        let name = format!("g{}", s.len() - 5);
        let sort = if rng.gen_bool(0.5) { Sort::PointLike } else { Sort::BlockLike };
        let others: Vec<usize> = s.indices().filter(|&j| s.sort(j) != sort).collect();
        let want = rng.gen_range(0..=2usize).min(others.len());
        let x = s.add_generator(&name, sort)?;
        let mut attached = 0;
        for _ in 0..4 {
            if attached == want {
                break;
            }
            let y = others[rng.gen_range(0..others.len())];
            if s.incident(x, y) || s.bfs_limited(x, 4)[y].is_some() {
                continue;
            }
            s.add_incidence(x, y)?;
            attached += 1;
        }
    }
    Ok(s)
}

pub const MAX_TRUNCATION: usize = 60;

/// A completion truncation of at most `MAX_TRUNCATION` elements: two
/// rounds when they fit, else one.
pub fn truncation(g: &IncidenceStructure) -> Result<PartialNGon, PlaneError> {
    let a = PartialNGon::new(3, g.clone())?;
    let two = ngon::free_completion(&a, 2)?;
    if two.structure.len() <= MAX_TRUNCATION {
        return Ok(two);
    }
    Ok(ngon::free_completion(&a, 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::fano_plane;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fano_join() {
        let s = fano_plane();
        let pts: Vec<String> = s.indices().filter(|&i| s.sort(i) == Sort::PointLike).map(|i| s.name(i).into()).collect();
        for p in &pts {
            for q in &pts {
                if p < q {
                    let l = join_meet(&s, p, q).unwrap();
                    let li = s.id(&l).unwrap();
                    assert!(s.incident(s.id(p).unwrap(), li) && s.incident(s.id(q).unwrap(), li));
                }
            }
        }
    }

    #[test]
    fn join_errors() {
        let mut s = IncidenceStructure::new("point", "line");
        s.add_generator("x", Sort::PointLike).unwrap();
        s.add_generator("y", Sort::PointLike).unwrap();
        assert!(matches!(join_meet(&s, "x", "y"), Err(PlaneError::NotYetConstructed(..))));
        for l in ["l", "m"] {
            s.add_generator(l, Sort::BlockLike).unwrap();
            s.link("x", l).unwrap();
            s.link("y", l).unwrap();
        }
        assert!(matches!(join_meet(&s, "x", "y"), Err(PlaneError::AxiomViolation(_))));
    }

    #[test]
    fn hall_configs() {
        assert!(matches!(hall_config(3), Err(PlaneError::Degenerate(3))));
        let h4 = hall_config(4).unwrap();
        assert_eq!(h4.structure.len(), 5);
        assert_eq!(stage_counts(&h4, 0).unwrap(), vec![5]);
        let (c4, c5) = (stage_counts(&h4, 3).unwrap(), stage_counts(&hall_config(5).unwrap(), 3).unwrap());
        assert_ne!(c4[3], c5[3]);
    }

    #[test]
    fn lazy_plane_matches_completion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let g = random_generators(3, &mut rng).unwrap();
            let t = truncation(&g).unwrap().structure;
            let mut p = FreePlane::new(g).unwrap();
            let m = p.embed(&t).unwrap();
            assert_eq!(m.values().collect::<BTreeSet<_>>().len(), t.len());
            for i in t.indices() {
                for j in t.indices() {
                    assert_eq!(t.incident(i, j), p.incident(m[t.name(i)], m[t.name(j)]));
                }
            }
        }
    }

    #[test]
    fn cp_configuration_embeds_into_free_completion() {
        let w = ngon::build_ngon_cp_witness(3, 1, ngon::CP_STAGES).unwrap();
        let s = w.s();
        let x = s.induced_by_names(w.x_basis().iter()).unwrap();
        let mut p = FreePlane::new(x).unwrap();
        let m = p.embed(s).unwrap();
        for i in s.indices() {
            for j in s.indices() {
                assert_eq!(s.incident(i, j), p.incident(m[s.name(i)], m[s.name(j)]));
            }
        }
    }

    fn frame_with(extra: &[(&str, Sort, &[&str])]) -> IncidenceStructure {
        let mut s = IncidenceStructure::new("point", "line");
        for i in 0..5 {
            s.add_generator(&format!("a{i}"), Sort::PointLike).unwrap();
        }
        for (n, sort, nb) in extra {
            s.add_generator(n, *sort).unwrap();
            for y in *nb {
                s.link(n, y).unwrap();
            }
        }
        s
    }

    fn case_of(s: &IncidenceStructure, name: &str) -> (CaseKind, usize) {
        let c = canonicalize(s, &derive_order(s).unwrap(), 20).unwrap();
        let step = c.steps.iter().find(|x| x.generator == name).unwrap();
        (step.case, step.replacements.len())
    }

    #[test]
    fn cases() {
        let on_line = frame_with(&[("l", Sort::BlockLike, &["a0", "a1"]), ("c", Sort::PointLike, &["l"])]);
        assert_eq!(case_of(&on_line, "l"), (CaseKind::Absorbed, 0));
        assert_eq!(case_of(&on_line, "c"), (CaseKind::OnLine, 1));
        let c = canonicalize(&on_line, &derive_order(&on_line).unwrap(), 20).unwrap();
        assert_eq!(c.basis().on_line, vec!["c".to_string()]);

        let free = frame_with(&[("c", Sort::PointLike, &[])]);
        assert_eq!(case_of(&free, "c"), (CaseKind::FreePoint, 2));
        let other = frame_with(&[("m", Sort::BlockLike, &["a2"]), ("c", Sort::PointLike, &["m"])]);
        assert_eq!(case_of(&other, "c"), (CaseKind::PointOnLine, 1));
        assert_eq!(case_of(&other, "m"), (CaseKind::LineThroughPoint, 1));
        let line = frame_with(&[("m", Sort::BlockLike, &[])]);
        assert_eq!(case_of(&line, "m"), (CaseKind::FreeLine, 2));
        let through = frame_with(&[("m", Sort::BlockLike, &["a0"])]);
        assert_eq!(case_of(&through, "m"), (CaseKind::LineThroughPoint, 1));
    }

    #[test]
    fn recompletion_of_small_cases() {
        for s in [
            frame_with(&[("c", Sort::PointLike, &[])]),
            frame_with(&[("m", Sort::BlockLike, &[])]),
            frame_with(&[("m", Sort::BlockLike, &["a0"]), ("c", Sort::PointLike, &["m"])]),
        ] {
            let c = canonicalize(&s, &derive_order(&s).unwrap(), 20).unwrap();
            let t = truncation(&s).unwrap().structure;
            let r = verify_recompletion(&c, &t, 40).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn wrong_inverse_is_caught() {
        let s = frame_with(&[("c", Sort::PointLike, &[])]);
        let mut c = canonicalize(&s, &derive_order(&s).unwrap(), 20).unwrap();
        c.steps[0].inverse = cx(cx(Expr::A(4), Expr::D(0)), cx(Expr::A(3), Expr::D(1)));
        let t = truncation(&s).unwrap().structure;
        let r = verify_recompletion(&c, &t, 40).unwrap();
        assert!(!r.round_trip);
    }

    #[test]
    fn small_budget_exhausts() {
        let s = frame_with(&[("m", Sort::BlockLike, &[])]);
        assert!(matches!(canonicalize(&s, &derive_order(&s).unwrap(), 1), Err(PlaneError::BudgetExhausted(1))));
    }
}
