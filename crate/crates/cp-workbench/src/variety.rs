//! Depth-truncated free algebras of a finite signature, modulo a finite
//! list of identities.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VarietyError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("`{0}` expects {1} arguments, got {2}")]
    Arity(String, usize, usize),
    #[error("generators must be disjoint: `{0}` repeats")]
    NotDisjoint(String),
    #[error("signatures or identities differ")]
    DifferentVariety,
    #[error("malformed witness: {0}")]
    SchemaError(String),
    #[error("model violates `{0}`")]
    ModelViolates(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub ops: Vec<(String, usize)>,
}

impl Signature {
    pub fn op(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|(n, _)| n == name)
    }

    pub fn arity(&self, op: usize) -> usize {
        self.ops[op].1
    }
}

/// Terms in identities: variables and operation applications.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    Var(String),
    App(usize, Vec<Pattern>),
}

impl Pattern {
    fn vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Pattern::App(_, args) => args.iter().for_each(|a| a.vars(out)),
        }
    }

    fn render(&self, sig: &Signature) -> String {
        match self {
            Pattern::Var(v) => v.clone(),
            Pattern::App(op, args) if args.is_empty() => sig.ops[*op].0.clone(),
            Pattern::App(op, args) => {
                let a: Vec<String> = args.iter().map(|x| x.render(sig)).collect();
                format!("{}({})", sig.ops[*op].0, a.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Pattern,
    pub rhs: Pattern,
}

/// A signature and identities, e.g. `"op f/2; eq f(f(x,y),z) = f(x,f(y,z))"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variety {
    pub sig: Signature,
    pub identities: Vec<Identity>,
}

struct PatternParser<'a> {
    s: &'a [u8],
    i: usize,
    sig: &'a Signature,
}

impl PatternParser<'_> {
    fn ident(&mut self) -> Result<String, VarietyError> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        if start == self.i {
            return Err(VarietyError::Parse(format!("identifier expected at {start}")));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.i]).into_owned())
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn pattern(&mut self) -> Result<Pattern, VarietyError> {
        let name = self.ident()?;
        let Some(op) = self.sig.op(&name) else {
            return Ok(Pattern::Var(name));
        };
        let mut args = Vec::new();
        if self.eat(b'(') && !self.eat(b')') {
            loop {
                args.push(self.pattern()?);
                if self.eat(b')') {
                    break;
                }
                if !self.eat(b',') {
                    return Err(VarietyError::Parse(format!("`,` or `)` expected at {}", self.i)));
                }
            }
        }
        if args.len() != self.sig.arity(op) {
            return Err(VarietyError::Arity(name, self.sig.arity(op), args.len()));
        }
        Ok(Pattern::App(op, args))
    }
}

impl Variety {
    pub fn parse(text: &str) -> Result<Variety, VarietyError> {
        let mut sig = Signature { ops: Vec::new() };
        let mut eqs = Vec::new();
        for item in text.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            if let Some(rest) = item.strip_prefix("op ") {
                let (name, arity) = rest.trim().split_once('/').ok_or_else(|| VarietyError::Parse(item.into()))?;
                let arity = arity.trim().parse().map_err(|_| VarietyError::Parse(item.into()))?;
                sig.ops.push((name.trim().to_string(), arity));
            } else if let Some(rest) = item.strip_prefix("eq ") {
                eqs.push(rest.to_string());
            } else {
                return Err(VarietyError::Parse(item.into()));
            }
        }
        let mut identities = Vec::new();
        for e in eqs {
            let (l, r) = e.split_once('=').ok_or_else(|| VarietyError::Parse(e.clone()))?;
            let parse = |t: &str| {
                let mut p = PatternParser { s: t.as_bytes(), i: 0, sig: &sig };
                let out = p.pattern()?;
                p.skip_ws();
                if p.i != t.len() {
                    return Err(VarietyError::Parse(format!("trailing input in `{t}`")));
                }
                Ok(out)
            };
            identities.push(Identity { lhs: parse(l)?, rhs: parse(r)? });
        }
        Ok(Variety { sig, identities })
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self.sig.ops.iter().map(|(n, a)| format!("op {n}/{a}")).collect();
        for id in &self.identities {
            parts.push(format!("eq {} = {}", id.lhs.render(&self.sig), id.rhs.render(&self.sig)));
        }
        parts.join("; ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Gen(usize),
    Op(usize),
}

/// Hash-consed terms over the generators up to a depth, with the
/// congruence generated by the identities inside that universe.
#[derive(Clone, Debug)]
pub struct TermAlgebra {
    pub variety: Variety,
    pub generators: Vec<String>,
    pub depth: usize,
    nodes: Vec<(Head, Vec<usize>)>,
    depths: Vec<usize>,
    index: HashMap<(Head, Vec<usize>), usize>,
    class: Vec<usize>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn union(parent: &mut [usize], a: usize, b: usize) -> bool {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra == rb {
        return false;
    }
    let (lo, hi) = (ra.min(rb), ra.max(rb));
    parent[hi] = lo;
    true
}

fn tuples(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut t = vec![0; k];
    loop {
        f(&t);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

impl TermAlgebra {
    pub fn free_on(variety: &Variety, generators: &[String], depth: usize) -> Result<TermAlgebra, VarietyError> {
        let mut seen = std::collections::BTreeSet::new();
        if let Some(g) = generators.iter().find(|g| !seen.insert(*g)) {
            return Err(VarietyError::NotDisjoint(g.clone()));
        }
        let mut a = TermAlgebra {
            variety: variety.clone(),
            generators: generators.to_vec(),
            depth,
            nodes: Vec::new(),
            depths: Vec::new(),
            index: HashMap::new(),
            class: Vec::new(),
        };
        for i in 0..generators.len() {
            a.intern(Head::Gen(i), Vec::new(), 0);
        }
        for d in 1..=depth {
            let below = a.nodes.len();
            for op in 0..variety.sig.ops.len() {
                let k = variety.sig.arity(op);
                if k == 0 {
                    if d == 1 {
                        a.intern(Head::Op(op), Vec::new(), 1);
                    }
                    continue;
                }
                let mut new = Vec::new();
                tuples(below, k, &mut |t| {
                    if t.iter().any(|&c| a.depths[c] == d - 1) {
                        new.push(t.to_vec());
                    }
                });
                for t in new {
                    a.intern(Head::Op(op), t, d);
                }
            }
        }
        a.close();
        Ok(a)
    }

    fn intern(&mut self, head: Head, args: Vec<usize>, depth: usize) -> usize {
        let key = (head, args);
        if let Some(&n) = self.index.get(&key) {
            return n;
        }
        let n = self.nodes.len();
        self.nodes.push(key.clone());
        self.depths.push(depth);
        self.index.insert(key, n);
        n
    }

    fn lookup(&self, head: Head, args: &[usize]) -> Option<usize> {
        self.index.get(&(head, args.to_vec())).copied()
    }

    fn instantiate(&self, p: &Pattern, vars: &[String], values: &[usize]) -> Option<usize> {
        match p {
            Pattern::Var(v) => Some(values[vars.iter().position(|x| x == v)?]),
            Pattern::App(op, args) => {
                let kids: Option<Vec<usize>> = args.iter().map(|a| self.instantiate(a, vars, values)).collect();
                self.lookup(Head::Op(*op), &kids?)
            }
        }
    }

    fn matches(&self, p: &Pattern, node: usize, vars: &[String], bind: &mut [Option<usize>]) -> bool {
        match p {
            Pattern::Var(v) => {
                let i = vars.iter().position(|x| x == v).expect("variable collected");
                match bind[i] {
                    Some(b) => b == node,
                    None => {
                        bind[i] = Some(node);
                        true
                    }
                }
            }
            Pattern::App(op, args) => {
                let (head, kids) = &self.nodes[node];
                *head == Head::Op(*op) && kids.len() == args.len() && args.iter().zip(kids).all(|(a, &k)| self.matches(a, k, vars, bind))
            }
        }
    }

    fn close(&mut self) {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        for id in &self.variety.identities {
            let mut vars = Vec::new();
            id.lhs.vars(&mut vars);
            id.rhs.vars(&mut vars);
            let mut pairs = Vec::new();
            for (lhs, rhs) in [(&id.lhs, &id.rhs), (&id.rhs, &id.lhs)] {
                let mut lv = Vec::new();
                lhs.vars(&mut lv);
                let free: Vec<usize> = (0..vars.len()).filter(|&i| !lv.contains(&vars[i])).collect();
                for x in 0..n {
                    let mut bind = vec![None; vars.len()];
                    if !self.matches(lhs, x, &vars, &mut bind) {
                        continue;
                    }
                    // variables only on the other side range over every node
                    tuples(n, free.len(), &mut |extra| {
                        let mut vals: Vec<usize> = bind.iter().map(|b| b.unwrap_or(0)).collect();
                        for (k, &i) in free.iter().enumerate() {
                            vals[i] = extra[k];
                        }
                        if let Some(r) = self.instantiate(rhs, &vars, &vals) {
                            pairs.push((x, r));
                        }
                    });
                }
            }
            for (l, r) in pairs {
                union(&mut parent, l, r);
            }
        }
        loop {
            let mut changed = false;
            let mut sig: HashMap<(Head, Vec<usize>), usize> = HashMap::new();
            for x in 0..n {
                let (head, args) = &self.nodes[x];
                let key = (*head, args.iter().map(|&c| find(&mut parent, c)).collect::<Vec<_>>());
                match sig.get(&key) {
                    Some(&y) => changed |= union(&mut parent, x, y),
                    None => {
                        sig.insert(key, x);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.class = (0..n).map(|x| find(&mut parent, x)).collect();
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of congruence classes: the elements of the truncation.
    pub fn class_count(&self) -> usize {
        let mut c = self.class.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.class[node]
    }

    /// Equal inside the truncation. Distinct classes may still merge at a
    /// larger depth when identities are present.
    pub fn same_class(&self, a: usize, b: usize) -> bool {
        self.class[a] == self.class[b]
    }

    pub fn generator(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name).and_then(|i| self.lookup(Head::Gen(i), &[]))
    }

    pub fn apply(&self, op: &str, args: &[usize]) -> Option<usize> {
        self.lookup(Head::Op(self.variety.sig.op(op)?), args)
    }

    pub fn render(&self, node: usize) -> String {
        let (head, args) = &self.nodes[node];
        match head {
            Head::Gen(i) => self.generators[*i].clone(),
            Head::Op(op) => {
                let name = &self.variety.sig.ops[*op].0;
                if args.is_empty() {
                    return name.clone();
                }
                let a: Vec<String> = args.iter().map(|&c| self.render(c)).collect();
                format!("{name}({})", a.join(","))
            }
        }
    }

    /// One representative per class, shallowest first.
    pub fn representatives(&self) -> Vec<String> {
        let mut best: BTreeMap<usize, usize> = BTreeMap::new();
        for x in 0..self.nodes.len() {
            let c = self.class[x];
            let keep = best.get(&c).map_or(true, |&y| (self.depths[x], x) < (self.depths[y], y));
            if keep {
                best.insert(c, x);
            }
        }
        let mut reps: Vec<usize> = best.into_values().collect();
        reps.sort_by_key(|&x| (self.depths[x], x));
        reps.into_iter().map(|x| self.render(x)).collect()
    }

    /// Rebuilds `node` in `target`, renaming generators through `map`.
    pub fn translate(&self, node: usize, target: &TermAlgebra, map: &BTreeMap<String, String>) -> Option<usize> {
        let (head, args) = &self.nodes[node];
        match head {
            Head::Gen(i) => target.generator(map.get(&self.generators[*i])?),
            Head::Op(op) => {
                let kids: Option<Vec<usize>> = args.iter().map(|&c| self.translate(c, target, map)).collect();
                target.lookup(Head::Op(*op), &kids?)
            }
        }
    }

    /// Evaluates every node in a finite model under a generator assignment.
    pub fn evaluate(&self, model: &FiniteModel, assign: &BTreeMap<String, usize>) -> Option<Vec<usize>> {
        let mut val = Vec::with_capacity(self.nodes.len());
        for (head, args) in &self.nodes {
            let v = match head {
                Head::Gen(i) => *assign.get(&self.generators[*i])?,
                Head::Op(op) => model.apply(*op, &args.iter().map(|&c| val[c]).collect::<Vec<_>>()),
            };
            val.push(v);
        }
        Some(val)
    }
}

impl fmt::Display for TermAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.representatives().join(", "))
    }
}

/// `a` and `b` correspond under the generator renaming: every node has an
/// image and classes match exactly.
pub fn iso_via(a: &TermAlgebra, b: &TermAlgebra, map: &BTreeMap<String, String>) -> bool {
    if a.node_count() != b.node_count() || a.class_count() != b.class_count() {
        return false;
    }
    let image: Option<Vec<usize>> = (0..a.node_count()).map(|x| a.translate(x, b, map)).collect();
    let Some(image) = image else { return false };
    let mut fwd: HashMap<usize, usize> = HashMap::new();
    let mut back: HashMap<usize, usize> = HashMap::new();
    (0..a.node_count()).all(|x| {
        let (ca, cb) = (a.class_of(x), b.class_of(image[x]));
        *fwd.entry(ca).or_insert(cb) == cb && *back.entry(cb).or_insert(ca) == ca
    })
}

pub fn free_product(a: &TermAlgebra, b: &TermAlgebra, depth: usize) -> Result<TermAlgebra, VarietyError> {
    if a.variety != b.variety {
        return Err(VarietyError::DifferentVariety);
    }
    let mut gens = a.generators.clone();
    for g in &b.generators {
        if gens.contains(g) {
            return Err(VarietyError::NotDisjoint(g.clone()));
        }
        gens.push(g.clone());
    }
    TermAlgebra::free_on(&a.variety, &gens, depth)
}

/// Operation tables on `0..size`.
#[derive(Clone, Debug)]
pub struct FiniteModel {
    pub size: usize,
    pub tables: Vec<Vec<usize>>,
}

impl FiniteModel {
    /// Tables given by a function of the operation index and arguments.
    pub fn from_fn(sig: &Signature, size: usize, f: impl Fn(usize, &[usize]) -> usize) -> FiniteModel {
        let tables = (0..sig.ops.len())
            .map(|op| {
                let mut t = Vec::new();
                tuples(size, sig.arity(op), &mut |args| t.push(f(op, args) % size));
                t
            })
            .collect();
        FiniteModel { size, tables }
    }

    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        let idx = args.iter().fold(0, |acc, &a| acc * self.size + a);
        self.tables[op][idx]
    }

    fn eval(&self, p: &Pattern, vars: &[String], vals: &[usize]) -> usize {
        match p {
            Pattern::Var(v) => vals[vars.iter().position(|x| x == v).unwrap()],
            Pattern::App(op, args) => {
                let a: Vec<usize> = args.iter().map(|x| self.eval(x, vars, vals)).collect();
                self.apply(*op, &a)
            }
        }
    }

    pub fn check(&self, v: &Variety) -> Result<(), VarietyError> {
        for id in &v.identities {
            let mut vars = Vec::new();
            id.lhs.vars(&mut vars);
            id.rhs.vars(&mut vars);
            let mut ok = true;
            tuples(self.size, vars.len(), &mut |vals| {
                ok &= self.eval(&id.lhs, &vars, vals) == self.eval(&id.rhs, &vars, vals);
            });
            if !ok {
                return Err(VarietyError::ModelViolates(format!("{} = {}", id.lhs.render(&v.sig), id.rhs.render(&v.sig))));
            }
        }
        Ok(())
    }
}

/// The induced map on nodes is constant on classes, so the generator
/// assignment extends to a homomorphism on the truncation.
pub fn extends_to_homomorphism(a: &TermAlgebra, model: &FiniteModel, assign: &BTreeMap<String, usize>) -> bool {
    let Some(val) = a.evaluate(model, assign) else { return false };
    let mut seen: HashMap<usize, usize> = HashMap::new();
    (0..a.node_count()).all(|x| *seen.entry(a.class_of(x)).or_insert(val[x]) == val[x])
}

/// A classical chain: `B` free on `basis`, elements `a_i` as terms in
/// `B`, and for each `n` a claimed basis of `B` containing `a_0..a_n`
/// with the old generators written back in that basis.
#[derive(Clone, Debug)]
pub struct ClassicalWitness {
    pub variety: Variety,
    pub basis: Vec<String>,
    pub depth: usize,
    pub chain: Vec<Pattern>,
    pub factors: Vec<FactorClaim>,
}

#[derive(Clone, Debug)]
pub struct FactorClaim {
    /// New basis in terms of the old generators; begins with `a_0..a_n`.
    pub new_basis: Vec<Pattern>,
    /// Old generators in terms of new-basis variables `z0, z1, ...`.
    pub back: Vec<Pattern>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SchemaReport {
    pub clause_one: Vec<bool>,
    pub distinct_generators: bool,
    pub absorption: bool,
}

impl SchemaReport {
    pub fn passed(&self) -> bool {
        self.clause_one.iter().all(|&c| c) && self.distinct_generators && self.absorption
    }
}

fn substitute(p: &Pattern, env: &BTreeMap<String, Pattern>) -> Pattern {
    match p {
        Pattern::Var(v) => env.get(v).cloned().unwrap_or_else(|| p.clone()),
        Pattern::App(op, args) => Pattern::App(*op, args.iter().map(|a| substitute(a, env)).collect()),
    }
}

fn node_of(a: &TermAlgebra, p: &Pattern) -> Option<usize> {
    match p {
        Pattern::Var(v) => a.generator(v),
        Pattern::App(op, args) => {
            let kids: Option<Vec<usize>> = args.iter().map(|x| node_of(a, x)).collect();
            a.lookup(Head::Op(*op), &kids?)
        }
    }
}

/// Checks each claimed basis change is invertible at the truncation, the
/// chain elements are pairwise distinct, and replays the absorption of a
/// finite factor `F(d)` into `F(m)` with `m` generators as a renaming.
pub fn classical_cp_schema_check(w: &ClassicalWitness, absorbed: usize, m: usize) -> Result<SchemaReport, VarietyError> {
    let b = TermAlgebra::free_on(&w.variety, &w.basis, w.depth)?;
    let z = |i: usize| format!("z{i}");
    let mut clause_one = Vec::new();
    for (n, claim) in w.factors.iter().enumerate() {
        if claim.new_basis.len() != w.basis.len() || claim.back.len() != w.basis.len() {
            return Err(VarietyError::SchemaError(format!("claim {n} has the wrong size")));
        }
        let prefix_ok = (0..=n).all(|i| w.chain.get(i) == claim.new_basis.get(i));
        let env: BTreeMap<String, Pattern> = claim.new_basis.iter().enumerate().map(|(i, t)| (z(i), t.clone())).collect();
        let round_trip = claim.back.iter().enumerate().all(|(i, t)| {
            node_of(&b, &substitute(t, &env)).is_some_and(|x| b.same_class(x, b.generator(&w.basis[i]).unwrap()))
        });
        let zs: Vec<String> = (0..w.basis.len()).map(z).collect();
        let zb = TermAlgebra::free_on(&w.variety, &zs, w.depth)?;
        let env_back: BTreeMap<String, Pattern> =
            w.basis.iter().zip(&claim.back).map(|(g, t)| (g.clone(), t.clone())).collect();
        let forward = claim.new_basis.iter().enumerate().all(|(i, t)| {
            node_of(&zb, &substitute(t, &env_back)).is_some_and(|x| zb.same_class(x, zb.generator(&z(i)).unwrap()))
        });
        clause_one.push(prefix_ok && round_trip && forward);
    }
    let nodes: Option<Vec<usize>> = w.chain.iter().map(|t| node_of(&b, t)).collect();
    let distinct_generators = nodes.is_some_and(|ns| {
        ns.iter().enumerate().all(|(i, &x)| ns[..i].iter().all(|&y| !b.same_class(x, y)))
    });
    let d: Vec<String> = (0..absorbed).map(|i| format!("d{i}")).collect();
    let f: Vec<String> = (0..m).map(|i| format!("f{i}")).collect();
    let left = free_product(
        &TermAlgebra::free_on(&w.variety, &d, w.depth)?,
        &TermAlgebra::free_on(&w.variety, &f, w.depth)?,
        w.depth,
    )?;
    let right_gens: Vec<String> = (0..absorbed + m).map(|i| format!("f{i}")).collect();
    let right = TermAlgebra::free_on(&w.variety, &right_gens, w.depth)?;
    let shift: BTreeMap<String, String> = d
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), format!("f{i}")))
        .chain(f.iter().enumerate().map(|(i, g)| (g.clone(), format!("f{}", i + absorbed))))
        .collect();
    let absorption = iso_via(&left, &right, &shift);
    Ok(SchemaReport { clause_one, distinct_generators, absorption })
}

pub fn parse_pattern(v: &Variety, text: &str) -> Result<Pattern, VarietyError> {
    let mut p = PatternParser { s: text.as_bytes(), i: 0, sig: &v.sig };
    let out = p.pattern()?;
    p.skip_ws();
    if p.i != text.len() {
        return Err(VarietyError::Parse(format!("trailing input in `{text}`")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gens(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empty_signature() {
        let v = Variety::parse("").unwrap();
        assert_eq!(TermAlgebra::free_on(&v, &gens(&["a", "b", "c"]), 3).unwrap().class_count(), 3);
    }

    #[test]
    fn absolutely_free_magma() {
        let v = Variety::parse("op f/2").unwrap();
        let a = TermAlgebra::free_on(&v, &gens(&["g"]), 2).unwrap();
        assert_eq!(a.representatives(), vec!["g", "f(g,g)", "f(g,f(g,g))", "f(f(g,g),g)", "f(f(g,g),f(g,g))"]);
    }

    #[test]
    fn semigroup_powers() {
        let v = Variety::parse("op f/2; eq f(f(x,y),z) = f(x,f(y,z))").unwrap();
        let a = TermAlgebra::free_on(&v, &gens(&["g"]), 2).unwrap();
        assert_eq!(a.class_count(), 4);
        let model = FiniteModel::from_fn(&v.sig, 7, |_, xs| xs[0] + xs[1]);
        model.check(&v).unwrap();
        let vals = a.evaluate(&model, &[("g".to_string(), 1)].into()).unwrap();
        let mut powers: Vec<usize> = (0..a.node_count()).map(|x| vals[x]).collect();
        powers.sort_unstable();
        powers.dedup();
        assert_eq!(powers, vec![1, 2, 3, 4]);
    }

    #[test]
    fn free_product_is_free_on_union() {
        let v = Variety::parse("op f/2; eq f(f(x,y),z) = f(x,f(y,z))").unwrap();
        let a = TermAlgebra::free_on(&v, &gens(&["a"]), 2).unwrap();
        let b = TermAlgebra::free_on(&v, &gens(&["b"]), 2).unwrap();
        let ab = free_product(&a, &b, 2).unwrap();
        let f2 = TermAlgebra::free_on(&v, &gens(&["a", "b"]), 2).unwrap();
        let id: BTreeMap<String, String> = [("a", "a"), ("b", "b")].iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
        assert!(iso_via(&ab, &f2, &id));
        let swap: BTreeMap<String, String> = [("a", "b"), ("b", "a")].iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
        assert!(iso_via(&ab, &f2, &swap));
        assert_eq!(free_product(&a, &a, 2).unwrap_err(), VarietyError::NotDisjoint("a".into()));
    }

    #[test]
    fn homomorphism_extension() {
        let v = Variety::parse("op f/2; eq f(f(x,y),z) = f(x,f(y,z))").unwrap();
        let a = TermAlgebra::free_on(&v, &gens(&["a", "b"]), 2).unwrap();
        let good = FiniteModel::from_fn(&v.sig, 5, |_, xs| xs[0] * xs[1]);
        good.check(&v).unwrap();
        let assign: BTreeMap<String, usize> = [("a".to_string(), 2), ("b".to_string(), 3)].into();
        assert!(extends_to_homomorphism(&a, &good, &assign));
        let bad = FiniteModel::from_fn(&v.sig, 5, |_, xs| xs[0] + 2 * xs[1]);
        assert!(bad.check(&v).is_err());
        assert!(!extends_to_homomorphism(&a, &bad, &assign));
    }

    fn schema(chain: &[&str]) -> ClassicalWitness {
        let v = Variety::parse("op f/2").unwrap();
        let p = |s: &str| parse_pattern(&v, s).unwrap();
        let claim = |n: usize| FactorClaim {
            new_basis: (0..3).map(|i| p(if i <= n { chain[i] } else { ["b0", "b1", "b2"][i] })).collect(),
            back: (0..3).map(|i| p(&format!("z{i}"))).collect(),
        };
        ClassicalWitness {
            variety: v.clone(),
            basis: gens(&["b0", "b1", "b2"]),
            depth: 2,
            chain: chain.iter().map(|s| p(s)).collect(),
            factors: (0..2).map(claim).collect(),
        }
    }

    #[test]
    fn classical_schema() {
        let ok = classical_cp_schema_check(&schema(&["b0", "b1"]), 2, 2).unwrap();
        assert!(ok.passed(), "{ok:?}");
        let bad = classical_cp_schema_check(&schema(&["b0", "b0"]), 2, 2).unwrap();
        assert!(!bad.passed());
    }
}
