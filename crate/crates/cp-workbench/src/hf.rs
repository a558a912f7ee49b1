//! Hyperfreeness engine: HF-order verification and search, bases, bounded
//! algebraic closure and obstruction certificates.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::incidence::{IncidenceStructure, ProvenanceKind, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    /// Points on at most one block, blocks on at most `k` points.
    Steiner { k: usize, n: usize },
    /// Loose ends and clean arcs of `n - 2` elements.
    NGon { n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HfOrder {
    pub base: BTreeSet<String>,
    pub sequence: Vec<Vec<String>>,
}

impl HfOrder {
    pub fn new(base: BTreeSet<String>) -> Self {
        HfOrder { base, sequence: Vec::new() }
    }

    pub fn push(&mut self, tuple: &[&str]) {
        self.sequence.push(tuple.iter().map(|s| s.to_string()).collect());
    }

    pub fn push_one(&mut self, x: &str) {
        self.sequence.push(vec![x.to_string()]);
    }

    /// Position of the tuple holding `name`.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.sequence.iter().position(|t| t.iter().any(|x| x == name))
    }

    /// `base | t1 < t2 < ...`, tuples longer than one in parentheses.
    pub fn render(&self) -> String {
        let base: Vec<&str> = self.base.iter().map(String::as_str).collect();
        let seq: Vec<String> = self
            .sequence
            .iter()
            .map(|t| if t.len() == 1 { t[0].clone() } else { format!("({})", t.join(",")) })
            .collect();
        format!("{} | {}", base.join(","), seq.join(" < "))
    }
}

impl std::str::FromStr for HfOrder {
    type Err = HfError;

    /// Inverse of [`HfOrder::render`].
    fn from_str(text: &str) -> Result<Self, HfError> {
        let (base, seq) = text.split_once('|').ok_or_else(|| HfError::MalformedOrder("missing `|`".into()))?;
        let names = |t: &str| t.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect::<Vec<_>>();
        let mut order = HfOrder::new(names(base).into_iter().collect());
        for (i, part) in seq.split('<').map(str::trim).enumerate() {
            if part.is_empty() {
                if seq.trim().is_empty() {
                    break;
                }
                return Err(HfError::MalformedOrder(format!("empty tuple at position {i}")));
            }
            let inner = match part.strip_prefix('(') {
                Some(rest) => rest.strip_suffix(')').ok_or_else(|| HfError::MalformedOrder(format!("unclosed tuple at position {i}")))?,
                None => part,
            };
            order.sequence.push(names(inner));
        }
        Ok(order)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HfObstruction {
    pub stuck_set: BTreeSet<String>,
    pub context: BTreeSet<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchOutcome {
    Order(HfOrder),
    Obstruction(HfObstruction),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StrongFactorVerdict {
    WitnessFound { basis_a: BTreeSet<String>, basis_b: BTreeSet<String> },
    NoWitnessWithinBudget { reason: String },
}

impl StrongFactorVerdict {
    pub fn found(&self) -> bool {
        matches!(self, StrongFactorVerdict::WitnessFound { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HfError {
    #[error("malformed order: {0}")]
    MalformedOrder(String),
    #[error("search budget of {0} steps exhausted")]
    BudgetExhausted(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyOutcome {
    pub valid: bool,
    pub first_failure: Option<usize>,
}

/// Whether `tuple` is hyperfree when only elements flagged in `visible`
/// (which must include the tuple itself) are counted.
pub fn is_hyperfree(s: &IncidenceStructure, crit: Criterion, tuple: &[usize], visible: &[bool]) -> bool {
    let vdeg = |x: usize| s.neighbors(x).iter().filter(|&&y| visible[y]).count();
    match crit {
        Criterion::Steiner { k, .. } => {
            if tuple.len() != 1 {
                return false;
            }
            let x = tuple[0];
            match s.sort(x) {
                Sort::PointLike => vdeg(x) <= 1,
                Sort::BlockLike => vdeg(x) <= k,
            }
        }
        Criterion::NGon { n } => {
            if tuple.len() == 1 && vdeg(tuple[0]) <= 1 {
                return true;
            }
            if tuple.len() != n - 2 {
                return false;
            }
            if tuple.iter().any(|&x| vdeg(x) != 2) {
                return false;
            }
            tuple.windows(2).all(|w| s.incident(w[0], w[1]))
        }
    }
}

fn resolve_order(s: &IncidenceStructure, order: &HfOrder) -> Result<(Vec<usize>, Vec<Vec<usize>>), HfError> {
    let mut seen = vec![false; s.len()];
    let mut take = |name: &str| -> Result<usize, HfError> {
        let i = s.id(name).ok_or_else(|| HfError::MalformedOrder(format!("unknown element `{name}`")))?;
        if seen[i] {
            return Err(HfError::MalformedOrder(format!("`{name}` listed twice")));
        }
        seen[i] = true;
        Ok(i)
    };
    let mut base = Vec::new();
    for b in &order.base {
        base.push(take(b)?);
    }
    let mut seq = Vec::new();
    for t in &order.sequence {
        if t.is_empty() {
            return Err(HfError::MalformedOrder("empty tuple".into()));
        }
        let mut tuple = Vec::new();
        for x in t {
            tuple.push(take(x)?);
        }
        seq.push(tuple);
    }
    if let Some(i) = seen.iter().position(|&v| !v) {
        return Err(HfError::MalformedOrder(format!("`{}` not covered", s.name(i))));
    }
    Ok((base, seq))
}

/// Checks each tuple against base plus strict predecessors plus itself.
pub fn verify_hf_order(s: &IncidenceStructure, order: &HfOrder, crit: Criterion) -> Result<VerifyOutcome, HfError> {
    let (base, seq) = resolve_order(s, order)?;
    let mut visible = vec![false; s.len()];
    for &b in &base {
        visible[b] = true;
    }
    for (pos, tuple) in seq.iter().enumerate() {
        for &x in tuple {
            visible[x] = true;
        }
        if !is_hyperfree(s, crit, tuple, &visible) {
            return Ok(VerifyOutcome { valid: false, first_failure: Some(pos) });
        }
    }
    Ok(VerifyOutcome { valid: true, first_failure: None })
}

// Hyperfree tuples among non-base elements of the present set.
fn candidates(s: &IncidenceStructure, crit: Criterion, present: &[bool], is_base: &[bool]) -> Vec<Vec<usize>> {
    let deg = |x: usize| s.neighbors(x).iter().filter(|&&y| present[y]).count();
    let mut out = Vec::new();
    for x in s.indices() {
        if !present[x] || is_base[x] {
            continue;
        }
        if is_hyperfree(s, crit, &[x], present) {
            out.push(vec![x]);
        }
    }
    if let Criterion::NGon { n } = crit {
        if n > 3 && out.is_empty() {
            let run_member = |x: usize| present[x] && !is_base[x] && deg(x) == 2;
            let mut done = HashSet::new();
            for x in s.indices() {
                if !run_member(x) || done.contains(&x) {
                    continue;
                }
                // Walk to one end of the valency-2 run, then collect it.
                let mut prev = usize::MAX;
                let mut cur = x;
                let mut steps = 0;
                loop {
                    let next = s
                        .neighbors(cur)
                        .iter()
                        .copied()
                        .find(|&y| y != prev && run_member(y));
                    match next {
                        Some(y) if y != x && steps <= s.len() => {
                            prev = cur;
                            cur = y;
                            steps += 1;
                        }
                        _ => break,
                    }
                }
                let mut run = vec![cur];
                let mut prev = usize::MAX;
                loop {
                    let c = *run.last().unwrap();
                    let next = s.neighbors(c).iter().copied().find(|&y| y != prev && present[y] && run_member(y) && !run.contains(&y));
                    match next {
                        Some(y) => {
                            prev = c;
                            run.push(y);
                        }
                        None => break,
                    }
                }
                for &r in &run {
                    done.insert(r);
                }
                if run.len() >= n - 2 {
                    for w in run.windows(n - 2) {
                        out.push(w.to_vec());
                    }
                }
            }
        }
    }
    out
}

fn tuple_key(s: &IncidenceStructure, t: &[usize]) -> Vec<String> {
    let mut k: Vec<String> = t.iter().map(|&i| s.name(i).to_string()).collect();
    k.sort();
    k.reverse();
    k
}

/// Greedy reverse deletion. Removing elements only lowers degrees, and an
/// element of a broken clean arc becomes a loose end, so the set of
/// removable elements only grows: when the greedy stalls no HF-order exists.
pub fn search_hf_order(
    s: &IncidenceStructure,
    base: &BTreeSet<String>,
    crit: Criterion,
    budget: usize,
) -> Result<SearchOutcome, HfError> {
    let mut is_base = vec![false; s.len()];
    for b in base {
        let i = s.id(b).ok_or_else(|| HfError::MalformedOrder(format!("unknown base element `{b}`")))?;
        is_base[i] = true;
    }
    let mut present = vec![true; s.len()];
    let mut remaining = s.indices().filter(|&i| !is_base[i]).count();
    let mut reversed: Vec<Vec<usize>> = Vec::new();
    let mut steps = 0usize;
    // Steiner candidates are single elements; keep a worklist so each
    // removal only re-examines neighbours.
    if let Criterion::Steiner { .. } = crit {
        let mut ready: BTreeSet<(String, usize)> = BTreeSet::new();
        for x in s.indices() {
            if !is_base[x] && is_hyperfree(s, crit, &[x], &present) {
                ready.insert((s.name(x).to_string(), x));
            }
        }
        while let Some((name, x)) = ready.pop_last() {
            steps += 1;
            if steps > budget {
                return Err(HfError::BudgetExhausted(budget));
            }
            let _ = name;
            present[x] = false;
            remaining -= 1;
            reversed.push(vec![x]);
            for &y in s.neighbors(x) {
                if present[y] && !is_base[y] && is_hyperfree(s, crit, &[y], &present) {
                    ready.insert((s.name(y).to_string(), y));
                }
            }
        }
    } else {
        while remaining > 0 {
            steps += 1;
            if steps > budget {
                return Err(HfError::BudgetExhausted(budget));
            }
            let cands = candidates(s, crit, &present, &is_base);
            let Some(best) = cands.into_iter().max_by_key(|t| tuple_key(s, t)) else {
                break;
            };
            for &x in &best {
                present[x] = false;
            }
            remaining -= best.len();
            reversed.push(best);
        }
    }
    if remaining > 0 {
        let stuck_set = s.indices().filter(|&i| present[i] && !is_base[i]).map(|i| s.name(i).to_string()).collect();
        let context = s.indices().filter(|&i| present[i]).map(|i| s.name(i).to_string()).collect();
        return Ok(SearchOutcome::Obstruction(HfObstruction { stuck_set, context }));
    }
    reversed.reverse();
    let sequence = reversed
        .into_iter()
        .map(|t| t.into_iter().map(|i| s.name(i).to_string()).collect())
        .collect();
    Ok(SearchOutcome::Order(HfOrder { base: base.clone(), sequence }))
}

/// Exhaustive backtracking over removal sequences, memoised on the removed
/// set. Intended as a cross-check on small inputs.
pub fn search_hf_order_exhaustive(
    s: &IncidenceStructure,
    base: &BTreeSet<String>,
    crit: Criterion,
    budget: usize,
) -> Result<Option<HfOrder>, HfError> {
    let mut is_base = vec![false; s.len()];
    for b in base {
        is_base[s.id(b).ok_or_else(|| HfError::MalformedOrder(b.clone()))?] = true;
    }
    let mut present = vec![true; s.len()];
    let mut failed: HashSet<Vec<bool>> = HashSet::new();
    let mut steps = 0usize;
    let mut stack = Vec::new();
    fn go(
        s: &IncidenceStructure,
        crit: Criterion,
        is_base: &[bool],
        present: &mut Vec<bool>,
        failed: &mut HashSet<Vec<bool>>,
        stack: &mut Vec<Vec<usize>>,
        steps: &mut usize,
        budget: usize,
    ) -> Result<bool, HfError> {
        if s.indices().all(|i| is_base[i] || !present[i]) {
            return Ok(true);
        }
        if failed.contains(present) {
            return Ok(false);
        }
        *steps += 1;
        if *steps > budget {
            return Err(HfError::BudgetExhausted(budget));
        }
        for t in candidates(s, crit, present, is_base) {
            for &x in &t {
                present[x] = false;
            }
            stack.push(t.clone());
            if go(s, crit, is_base, present, failed, stack, steps, budget)? {
                return Ok(true);
            }
            stack.pop();
            for &x in &t {
                present[x] = true;
            }
        }
        failed.insert(present.clone());
        Ok(false)
    }
    if go(s, crit, &is_base, &mut present, &mut failed, &mut stack, &mut steps, budget)? {
        stack.reverse();
        let sequence = stack.into_iter().map(|t| t.into_iter().map(|i| s.name(i).to_string()).collect()).collect();
        Ok(Some(HfOrder { base: base.clone(), sequence }))
    } else {
        Ok(None)
    }
}

/// Re-checks an obstruction: no tuple from the stuck set is hyperfree when
/// counting incidences inside the context.
pub fn verify_obstruction(s: &IncidenceStructure, obs: &HfObstruction, crit: Criterion) -> Result<bool, HfError> {
    let mut visible = vec![false; s.len()];
    let mut is_stuck = vec![false; s.len()];
    for c in &obs.context {
        visible[s.id(c).ok_or_else(|| HfError::MalformedOrder(c.clone()))?] = true;
    }
    for c in &obs.stuck_set {
        let i = s.id(c).ok_or_else(|| HfError::MalformedOrder(c.clone()))?;
        if !visible[i] {
            return Err(HfError::MalformedOrder(format!("`{c}` outside context")));
        }
        is_stuck[i] = true;
    }
    // Anything outside the stuck set acts like base for candidate purposes.
    let not_stuck: Vec<bool> = is_stuck.iter().map(|&b| !b).collect();
    Ok(candidates(s, crit, &visible, &not_stuck).is_empty())
}

/// Generators and base elements that the queried elements depend on, where
/// an element depends on its incidences among earlier tuples and the base.
pub fn extract_basis(
    s: &IncidenceStructure,
    order: &HfOrder,
    query: Option<&BTreeSet<String>>,
) -> Result<BTreeSet<String>, HfError> {
    let (base, seq) = resolve_order(s, order)?;
    let mut rank = vec![0usize; s.len()];
    let mut tuple_of: HashMap<usize, usize> = HashMap::new();
    for (pos, t) in seq.iter().enumerate() {
        for &x in t {
            rank[x] = pos + 1;
            tuple_of.insert(x, pos);
        }
    }
    let mut is_base = vec![false; s.len()];
    for &b in &base {
        is_base[b] = true;
    }
    let start: Vec<usize> = match query {
        Some(q) => q
            .iter()
            .map(|n| s.id(n).ok_or_else(|| HfError::MalformedOrder(format!("unknown element `{n}`"))))
            .collect::<Result<_, _>>()?,
        None => s.indices().collect(),
    };
    let mut seen = vec![false; s.len()];
    let mut stack = start;
    while let Some(x) = stack.pop() {
        if seen[x] {
            continue;
        }
        seen[x] = true;
        if is_base[x] {
            continue;
        }
        for &y in s.neighbors(x) {
            if rank[y] < rank[x] || (rank[y] == rank[x] && tuple_of.get(&y) == tuple_of.get(&x)) {
                stack.push(y);
            }
        }
    }
    Ok(s.indices()
        .filter(|&i| seen[i] && (is_base[i] || s.provenance(i).kind == ProvenanceKind::Generator))
        .map(|i| s.name(i).to_string())
        .collect())
}

/// Closure of `seed` under the unique-witness rules, at most `budget` rounds.
pub fn acl_bounded(
    s: &IncidenceStructure,
    seed: &BTreeSet<String>,
    budget: usize,
    crit: Criterion,
) -> BTreeSet<String> {
    let mut present = vec![false; s.len()];
    for n in seed {
        if let Some(i) = s.id(n) {
            present[i] = true;
        }
    }
    acl_mask(s, &mut present, budget, crit);
    s.indices().filter(|&i| present[i]).map(|i| s.name(i).to_string()).collect()
}

pub fn acl_mask(s: &IncidenceStructure, present: &mut [bool], budget: usize, crit: Criterion) {
    for _ in 0..budget {
        let mut changed = false;
        match crit {
            Criterion::Steiner { k, .. } => {
                for x in s.indices() {
                    if present[x] || s.sort(x) != Sort::BlockLike {
                        continue;
                    }
                    if s.neighbors(x).iter().filter(|&&y| present[y]).count() >= k {
                        present[x] = true;
                        changed = true;
                    }
                }
                for x in s.indices() {
                    if present[x] && s.sort(x) == Sort::BlockLike {
                        for &y in s.neighbors(x) {
                            if !present[y] {
                                present[y] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            Criterion::NGon { n } => {
                let sources: Vec<usize> = s.indices().filter(|&i| present[i]).collect();
                let mut add = Vec::new();
                for x in sources {
                    geodesics_from(s, x, n - 1, present, &mut add);
                }
                for y in add {
                    if !present[y] {
                        present[y] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

// Interiors of paths of length <= limit from x to other present elements.
// In a structure of girth >= 2n these paths are the unique geodesics.
fn geodesics_from(s: &IncidenceStructure, x: usize, limit: usize, present: &[bool], out: &mut Vec<usize>) {
    let mut frontier = vec![(x, usize::MAX)];
    let mut parent: HashMap<usize, usize> = HashMap::new();
    parent.insert(x, usize::MAX);
    for _ in 0..limit {
        let mut next = Vec::new();
        for &(u, _) in &frontier {
            for &v in s.neighbors(u) {
                if parent.contains_key(&v) {
                    continue;
                }
                parent.insert(v, u);
                next.push((v, u));
                if present[v] {
                    let mut w = u;
                    while w != x {
                        if !present[w] {
                            out.push(w);
                        }
                        w = parent[&w];
                    }
                }
            }
        }
        frontier = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::{fano_plane, Provenance};

    fn isolated_points(n: usize) -> IncidenceStructure {
        let mut s = IncidenceStructure::default();
        for i in 0..n {
            s.add_generator(&format!("p{i}"), Sort::PointLike).unwrap();
        }
        s
    }


    #[test]
    fn order_text_round_trip() {
        let mut o = HfOrder::new(["a".to_string(), "b".to_string()].into());
        o.push_one("x");
        o.push(&["y", "z"]);
        let text = o.render();
        assert_eq!(text, "a,b | x < (y,z)");
        assert_eq!(text.parse::<HfOrder>().unwrap(), o);
        assert_eq!("a | ".parse::<HfOrder>().unwrap().sequence.len(), 0);
        assert!("a x".parse::<HfOrder>().is_err());
        assert!("a | (x,y".parse::<HfOrder>().is_err());
    }

    #[test]
    fn isolated_points_any_order() {
        let s = isolated_points(3);
        let mut o = HfOrder::new(BTreeSet::new());
        for x in ["p2", "p0", "p1"] {
            o.push_one(x);
        }
        let v = verify_hf_order(&s, &o, Criterion::Steiner { k: 2, n: 3 }).unwrap();
        assert!(v.valid);
    }

    #[test]
    fn coverage_mismatch_is_malformed() {
        let s = isolated_points(2);
        let mut o = HfOrder::new(BTreeSet::new());
        o.push_one("p0");
        assert!(matches!(
            verify_hf_order(&s, &o, Criterion::Steiner { k: 2, n: 3 }),
            Err(HfError::MalformedOrder(_))
        ));
    }

    #[test]
    fn fano_has_no_order() {
        let f = fano_plane();
        let crit = Criterion::NGon { n: 3 };
        match search_hf_order(&f, &BTreeSet::new(), crit, 10_000).unwrap() {
            SearchOutcome::Obstruction(o) => {
                assert_eq!(o.stuck_set.len(), 14);
                assert!(verify_obstruction(&f, &o, crit).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(search_hf_order_exhaustive(&f, &BTreeSet::new(), crit, 100_000).unwrap(), None);
    }

    #[test]
    fn single_point_over_itself() {
        let s = isolated_points(1);
        let base: BTreeSet<String> = ["p0".to_string()].into();
        match search_hf_order(&s, &base, Criterion::Steiner { k: 2, n: 3 }, 10).unwrap() {
            SearchOutcome::Order(o) => assert!(o.sequence.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn acl_adds_unique_block() {
        let mut s = isolated_points(2);
        s.add_element("b", Sort::BlockLike, Provenance::step(1, vec!["p0".into(), "p1".into()])).unwrap();
        s.add_element("c", Sort::PointLike, Provenance::step(2, vec!["b".into()])).unwrap();
        for x in ["p0", "p1", "c"] {
            s.link(x, "b").unwrap();
        }
        let seed: BTreeSet<String> = ["p0".to_string(), "p1".to_string()].into();
        let acl = acl_bounded(&s, &seed, 10, Criterion::Steiner { k: 2, n: 3 });
        assert_eq!(acl.len(), 4);
        let all = s.name_set();
        assert_eq!(acl_bounded(&s, &all, 10, Criterion::Steiner { k: 2, n: 3 }), all);
    }

    #[test]
    fn render_format() {
        let mut o = HfOrder::new(["a".to_string()].into());
        o.push_one("b");
        o.push(&["c", "d"]);
        assert_eq!(o.render(), "a | b < (c,d)");
    }
}
