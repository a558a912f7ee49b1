//! Free products of cyclic groups of a fixed order, in syllable normal form.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CyclicError {
    #[error("order must be at least 2")]
    BadOrder,
    #[error("operation needs order {expected}, got {got}")]
    WrongOrder { expected: &'static str, got: Order },
    #[error("cannot parse word `{0}`")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Order {
    type Err = CyclicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "infinity" | "∞" => Ok(Order::Infinite),
            _ => match s.parse::<u64>() {
                Ok(n) if n >= 2 => Ok(Order::Finite(n)),
                _ => Err(CyclicError::BadOrder),
            },
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupParams {
    pub order: Order,
}

impl GroupParams {
    pub fn new(order: Order) -> Result<Self, CyclicError> {
        if let Order::Finite(n) = order {
            if n < 2 {
                return Err(CyclicError::BadOrder);
            }
        }
        Ok(GroupParams { order })
    }

    pub fn finite(n: u64) -> Self {
        GroupParams::new(Order::Finite(n)).expect("order at least 2")
    }

    pub fn infinite() -> Self {
        GroupParams { order: Order::Infinite }
    }

    fn reduce(&self, e: i64) -> i64 {
        match self.order {
            Order::Finite(n) => e.rem_euclid(n as i64),
            Order::Infinite => e,
        }
    }
}

/// Normal form: adjacent syllables on distinct factors, nonzero exponents,
/// reduced into `1..order` for finite order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GroupWord {
    pub syllables: Vec<(usize, i64)>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn generator(i: usize) -> Self {
        GroupWord { syllables: vec![(i, 1)] }
    }

    pub fn power_of(i: usize, e: i64, p: &GroupParams) -> Self {
        GroupWord::identity().push_syllable(i, e, p)
    }

    pub fn from_syllables(syl: &[(usize, i64)], p: &GroupParams) -> Self {
        syl.iter().fold(GroupWord::identity(), |w, &(i, e)| w.push_syllable(i, e, p))
    }

    fn push_syllable(mut self, i: usize, e: i64, p: &GroupParams) -> Self {
        let mut e = p.reduce(e);
        if let Some(&(j, f)) = self.syllables.last() {
            if j == i {
                self.syllables.pop();
                e = p.reduce(e + f);
            }
        }
        if e != 0 {
            self.syllables.push((i, e));
        }
        self
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of syllables.
    pub fn syllable_len(&self) -> usize {
        self.syllables.len()
    }

    /// Total letter count, sum of absolute exponents.
    pub fn letter_len(&self) -> u64 {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs()).sum()
    }

    pub fn multiply(&self, other: &GroupWord, p: &GroupParams) -> GroupWord {
        other.syllables.iter().fold(self.clone(), |w, &(i, e)| w.push_syllable(i, e, p))
    }

    pub fn inverse(&self, p: &GroupParams) -> GroupWord {
        GroupWord::from_syllables(&self.syllables.iter().rev().map(|&(i, e)| (i, -e)).collect::<Vec<_>>(), p)
    }

    pub fn pow(&self, m: i64, p: &GroupParams) -> GroupWord {
        let base = if m < 0 { self.inverse(p) } else { self.clone() };
        let mut out = GroupWord::identity();
        let mut acc = base;
        let mut k = m.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                out = out.multiply(&acc, p);
            }
            acc = acc.multiply(&acc, p);
            k >>= 1;
        }
        out
    }

    /// Conjugate `u⁻¹ w u` reduced cyclically, with the conjugator `u`.
    pub fn cyclic_reduction(&self, p: &GroupParams) -> (GroupWord, GroupWord) {
        let mut w = self.clone();
        let mut conj = GroupWord::identity();
        while w.syllables.len() >= 2 && w.syllables[0].0 == w.syllables.last().unwrap().0 {
            let (i, e) = w.syllables[0];
            let u = GroupWord::power_of(i, e, p);
            w = u.inverse(p).multiply(&w, p).multiply(&u, p);
            conj = conj.multiply(&u, p);
        }
        (w, conj)
    }

    /// Replaces each generator `x_i` by `images[i]`.
    pub fn substitute(&self, images: &[GroupWord], p: &GroupParams) -> GroupWord {
        self.syllables.iter().fold(GroupWord::identity(), |w, &(i, e)| w.multiply(&images[i].pow(e, p), p))
    }

    pub fn parse(s: &str, p: &GroupParams) -> Result<GroupWord, CyclicError> {
        let s = s.trim();
        if s.is_empty() || s == "1" || s == "e" {
            return Ok(GroupWord::identity());
        }
        let mut syl = Vec::new();
        for part in s.split('*') {
            let bad = || CyclicError::Parse(s.to_string());
            let part = part.trim().strip_prefix('x').ok_or_else(bad)?;
            let (i, e) = match part.split_once('^') {
                Some((i, e)) => (i.parse().map_err(|_| bad())?, e.parse().map_err(|_| bad())?),
                None => (part.parse().map_err(|_| bad())?, 1),
            };
            syl.push((i, e));
        }
        Ok(GroupWord::from_syllables(&syl, p))
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .syllables
            .iter()
            .map(|&(i, e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl Serialize for GroupWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElementOrder {
    Finite(u64),
    Infinite,
    UnknownBeyondBudget,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Exact for conjugates of generator powers, otherwise a power search up
/// to `budget`.
pub fn element_order(w: &GroupWord, p: &GroupParams, budget: u64) -> ElementOrder {
    let (core, _) = w.cyclic_reduction(p);
    match core.syllables.as_slice() {
        [] => return ElementOrder::Finite(1),
        [(_, e)] => {
            return match p.order {
                Order::Finite(n) => ElementOrder::Finite(n / gcd(n, e.unsigned_abs())),
                Order::Infinite => ElementOrder::Infinite,
            }
        }
        _ => {}
    }
    let mut acc = GroupWord::identity();
    for m in 1..=budget {
        acc = acc.multiply(w, p);
        if acc.is_identity() {
            return ElementOrder::Finite(m);
        }
    }
    ElementOrder::UnknownBeyondBudget
}

/// `w = u x_i u⁻¹`: an odd syllable palindrome.
pub fn is_reflection_conjugate(w: &GroupWord, p: &GroupParams) -> Result<bool, CyclicError> {
    if p.order != Order::Finite(2) {
        return Err(CyclicError::WrongOrder { expected: "2", got: p.order });
    }
    let s = &w.syllables;
    Ok(s.len() % 2 == 1 && s.iter().eq(s.iter().rev()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    /// Generator indices with signs whose product is the target.
    InSubgroup(Vec<(usize, i8)>),
    NotFoundWithinBudget { explored: usize },
}

impl Membership {
    pub fn found(&self) -> bool {
        matches!(self, Membership::InSubgroup(_))
    }
}

/// Breadth-first closure from the identity under the generators and their
/// inverses, keeping words of letter length at most `length_budget`.
pub fn bounded_membership(target: &GroupWord, gens: &[GroupWord], p: &GroupParams, length_budget: u64) -> Membership {
    let mut steps: Vec<(GroupWord, (usize, i8))> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        steps.push((g.clone(), (i, 1)));
        let inv = g.inverse(p);
        if inv != *g {
            steps.push((inv, (i, -1)));
        }
    }
    let mut parent: BTreeMap<GroupWord, Option<(GroupWord, (usize, i8))>> = BTreeMap::new();
    parent.insert(GroupWord::identity(), None);
    let mut queue = VecDeque::from([GroupWord::identity()]);
    while let Some(w) = queue.pop_front() {
        if w == *target {
            let mut path = Vec::new();
            let mut cur = w;
            while let Some(Some((prev, step))) = parent.get(&cur) {
                path.push(*step);
                cur = prev.clone();
            }
            path.reverse();
            return Membership::InSubgroup(path);
        }
        for (g, step) in &steps {
            let next = w.multiply(g, p);
            if next.letter_len() <= length_budget && !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((w.clone(), *step)));
                queue.push_back(next);
            }
        }
    }
    Membership::NotFoundWithinBudget { explored: parent.len() }
}

/// Replays a membership witness.
pub fn replay(witness: &[(usize, i8)], gens: &[GroupWord], p: &GroupParams) -> GroupWord {
    witness.iter().fold(GroupWord::identity(), |w, &(i, s)| {
        let g = if s < 0 { gens[i].inverse(p) } else { gens[i].clone() };
        w.multiply(&g, p)
    })
}

/// `y_i` of the chain: `x_{i+1} x_i x_{i+1}` for order 2, else
/// `x_i x_{i+1}^{-2}`.
pub fn chain_generator(i: usize, p: &GroupParams) -> GroupWord {
    if p.order == Order::Finite(2) {
        GroupWord::from_syllables(&[(i + 1, 1), (i, 1), (i + 1, 1)], p)
    } else {
        GroupWord::from_syllables(&[(i, 1), (i + 1, -2)], p)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Substitution {
    pub relator: GroupWord,
    pub before: GroupWord,
    pub after: GroupWord,
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceCertificate {
    pub i: usize,
    pub k: usize,
    pub steps: Vec<Substitution>,
}

/// `x_i ≡ x_{i+k}^{2^k}` modulo the relators `y_j`, one substitution
/// `x_j = y_j x_{j+1}^2` per step.
pub fn quotient_congruence(i: usize, k: usize, p: &GroupParams) -> Result<CongruenceCertificate, CyclicError> {
    if p.order == Order::Finite(2) {
        return Err(CyclicError::WrongOrder { expected: "greater than 2", got: p.order });
    }
    let mut steps = Vec::new();
    let mut cur = GroupWord::generator(i);
    for m in 0..k {
        let j = i + m;
        let square = GroupWord::power_of(j + 1, 2, p);
        let images: Vec<GroupWord> =
            (0..=j + 1).map(|t| if t == j { square.clone() } else { GroupWord::generator(t) }).collect();
        let after = cur.substitute(&images, p);
        steps.push(Substitution { relator: chain_generator(j, p), before: cur, after: after.clone() });
        cur = after;
    }
    Ok(CongruenceCertificate { i, k, steps })
}

impl CongruenceCertificate {
    /// Each step: the relator times `x_{j+1}^2` is `x_j` exactly, `before`
    /// is `x_j^{2^m}` and `after` is `x_{j+1}^{2^{m+1}}`.
    pub fn verify(&self, p: &GroupParams) -> bool {
        let mut expect = GroupWord::generator(self.i);
        for (m, s) in self.steps.iter().enumerate() {
            let j = self.i + m;
            let square = GroupWord::power_of(j + 1, 2, p);
            let relation = s.relator.multiply(&square, p) == GroupWord::generator(j);
            let before = s.before == expect && s.before == GroupWord::generator(j).pow(1 << m, p);
            let after = s.after == square.pow(1 << m, p);
            if !(relation && before && after) {
                return false;
            }
            expect = s.after.clone();
        }
        self.steps.len() == self.k
            && self.steps.last().map_or(true, |s| s.after == GroupWord::generator(self.i + self.k).pow(1 << self.k, p))
    }

    /// The final congruence as text.
    pub fn conclusion(&self) -> String {
        let end = self.steps.last().map_or(GroupWord::generator(self.i), |s| s.after.clone());
        format!("x{} = {}", self.i, end)
    }
}

/// An endomorphism of the free product given by generator images, with a
/// candidate inverse.
#[derive(Clone, Debug, Serialize)]
pub struct BasisWitness {
    pub images: Vec<GroupWord>,
    pub inverse: Vec<GroupWord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisCheck {
    pub respects_relations: bool,
    pub inverse_holds: bool,
    /// First image whose order differs from the factor order.
    pub bad_image: Option<String>,
}

impl BasisCheck {
    pub fn passed(&self) -> bool {
        self.respects_relations && self.inverse_holds
    }
}

impl BasisWitness {
    /// Both maps send generators to elements of the factor order, and they
    /// compose to the identity both ways.
    pub fn check(&self, p: &GroupParams) -> BasisCheck {
        let mut bad_image = None;
        for w in self.images.iter().chain(&self.inverse) {
            let ok = match p.order {
                Order::Finite(n) => element_order(w, p, n) == ElementOrder::Finite(n),
                Order::Infinite => !matches!(element_order(w, p, 64), ElementOrder::Finite(_)),
            };
            if !ok && bad_image.is_none() {
                bad_image = Some(w.to_string());
            }
        }
        let gens = self.images.len();
        let inverse_holds = (0..gens).all(|i| {
            let x = GroupWord::generator(i);
            self.images[i].substitute(&self.inverse, p) == x && self.inverse[i].substitute(&self.images, p) == x
        });
        BasisCheck { respects_relations: bad_image.is_none(), inverse_holds, bad_image }
    }
}

/// Basis `{y_0..y_l} ∪ {x_{l+1}..x_top}` of the free product on
/// `x_0..x_top`, as an automorphism with its inverse.
pub fn basis_witness(l: usize, top: usize, p: &GroupParams) -> BasisWitness {
    let mut images: Vec<GroupWord> = (0..=top).map(GroupWord::generator).collect();
    for (j, img) in images.iter_mut().enumerate().take(l + 1) {
        *img = chain_generator(j, p);
    }
    // x_j in terms of the new basis, from j = l down.
    let mut inverse: Vec<GroupWord> = (0..=top).map(GroupWord::generator).collect();
    for j in (0..=l).rev() {
        let next = inverse[j + 1].clone();
        inverse[j] = if p.order == Order::Finite(2) {
            next.multiply(&GroupWord::generator(j), p).multiply(&next, p)
        } else {
            GroupWord::generator(j).multiply(&next.pow(2, p), p)
        };
    }
    BasisWitness { images, inverse }
}

#[derive(Clone, Debug, Serialize)]
pub enum CyclicObstruction {
    Reflection {
        orders: Vec<ElementOrder>,
        reflections: Vec<bool>,
        x0_membership: Membership,
        length_budget: u64,
    },
    TwoDivisibility {
        certificates: Vec<CongruenceCertificate>,
        verified: bool,
    },
}

impl CyclicObstruction {
    pub fn kind(&self) -> &'static str {
        match self {
            CyclicObstruction::Reflection { .. } => "Reflection",
            CyclicObstruction::TwoDivisibility { .. } => "TwoDivisibility",
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            CyclicObstruction::Reflection { orders, reflections, x0_membership, .. } => {
                orders.iter().all(|o| *o == ElementOrder::Finite(2))
                    && reflections.iter().all(|&r| r)
                    && !x0_membership.found()
            }
            CyclicObstruction::TwoDivisibility { verified, .. } => *verified,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CyclicCpWitness {
    pub order: Order,
    pub lmax: usize,
    pub y: Vec<GroupWord>,
    /// `A_l ⩽∗ B` for each `l`.
    pub factor_of_b: Vec<BasisCheck>,
    /// `A_l ⩽∗ A_{l+1}`: the basis of `A_l` is an initial part of the
    /// basis of `A_{l+1}`, which is free by the next factor witness.
    pub chain_step: Vec<bool>,
    pub obstruction: CyclicObstruction,
}

impl CyclicCpWitness {
    pub fn passed(&self) -> bool {
        self.factor_of_b.iter().all(BasisCheck::passed) && self.chain_step.iter().all(|&c| c) && self.obstruction.passed()
    }
}

pub fn build_cyclic_cp_witness(p: &GroupParams, lmax: usize, length_budget: u64) -> CyclicCpWitness {
    let top = lmax + 1;
    let y: Vec<GroupWord> = (0..=lmax).map(|i| chain_generator(i, p)).collect();
    let factor_of_b: Vec<BasisCheck> = (0..=lmax).map(|l| basis_witness(l, top, p).check(p)).collect();
    let chain_step = (0..lmax).map(|l| factor_of_b[l + 1].passed()).collect();
    let obstruction = if p.order == Order::Finite(2) {
        CyclicObstruction::Reflection {
            orders: y.iter().map(|w| element_order(w, p, 16)).collect(),
            reflections: y.iter().map(|w| is_reflection_conjugate(w, p).unwrap_or(false)).collect(),
            x0_membership: bounded_membership(&GroupWord::generator(0), &y, p, length_budget),
            length_budget,
        }
    } else {
        let certificates: Vec<CongruenceCertificate> =
            (0..=top).map(|k| quotient_congruence(0, k, p).expect("order above 2")).collect();
        let verified = certificates.iter().all(|c| c.verify(p));
        CyclicObstruction::TwoDivisibility { certificates, verified }
    };
    CyclicCpWitness { order: p.order, lmax, y, factor_of_b, chain_step, obstruction }
}

/// Distinct elements reachable within `length_budget`, for monotonicity
/// checks.
pub fn ball(gens: &[GroupWord], p: &GroupParams, length_budget: u64) -> HashSet<GroupWord> {
    let mut seen = HashSet::from([GroupWord::identity()]);
    let mut queue = VecDeque::from([GroupWord::identity()]);
    let inv: Vec<GroupWord> = gens.iter().map(|g| g.inverse(p)).collect();
    while let Some(w) = queue.pop_front() {
        for g in gens.iter().chain(&inv) {
            let next = w.multiply(g, p);
            if next.letter_len() <= length_budget && seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str, p: &GroupParams) -> GroupWord {
        GroupWord::parse(s, p).unwrap()
    }

    #[test]
    fn arithmetic() {
        let inf = GroupParams::infinite();
        assert!(w("x0*x1", &inf).multiply(&w("x1^-1*x0^-1", &inf), &inf).is_identity());
        let two = GroupParams::finite(2);
        assert!(w("x0", &two).multiply(&w("x0", &two), &two).is_identity());
        let three = GroupParams::finite(3);
        assert_eq!(w("x0^2*x1", &three).multiply(&w("x1^2", &three), &three), w("x0^2", &three));
        assert_eq!(w("x0^2*x1^-1", &inf).to_string(), "x0^2*x1^-1");
    }

    #[test]
    fn orders() {
        let two = GroupParams::finite(2);
        assert_eq!(element_order(&chain_generator(0, &two), &two, 10), ElementOrder::Finite(2));
        assert_eq!(element_order(&GroupWord::identity(), &two, 10), ElementOrder::Finite(1));
        let three = GroupParams::finite(3);
        assert_eq!(element_order(&w("x0*x1", &three), &three, 10), ElementOrder::UnknownBeyondBudget);
        let five = GroupParams::finite(5);
        assert_eq!(element_order(&chain_generator(0, &five), &five, 25), ElementOrder::UnknownBeyondBudget);
    }

    #[test]
    fn reflections() {
        let two = GroupParams::finite(2);
        assert!(is_reflection_conjugate(&w("x1*x0*x1", &two), &two).unwrap());
        assert!(!is_reflection_conjugate(&w("x0*x1", &two), &two).unwrap());
        assert!(is_reflection_conjugate(&w("x2*x1*x0*x1*x2", &two), &two).unwrap());
        let three = GroupParams::finite(3);
        assert!(is_reflection_conjugate(&w("x0", &three), &three).is_err());
    }

    #[test]
    fn membership() {
        let two = GroupParams::finite(2);
        let y: Vec<GroupWord> = (0..4).map(|i| chain_generator(i, &two)).collect();
        assert!(bounded_membership(&y[0], &y, &two, 12).found());
        assert!(!bounded_membership(&GroupWord::generator(0), &y, &two, 12).found());
        let t = y[1].multiply(&y[0], &two).multiply(&y[1], &two);
        match bounded_membership(&t, &y[..2], &two, 12) {
            Membership::InSubgroup(path) => assert_eq!(replay(&path, &y[..2], &two), t),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn congruences() {
        let inf = GroupParams::infinite();
        let c = quotient_congruence(0, 3, &inf).unwrap();
        assert_eq!(c.steps.len(), 3);
        assert_eq!(c.conclusion(), "x0 = x3^8");
        assert!(c.verify(&inf));
        assert_eq!(quotient_congruence(0, 0, &inf).unwrap().conclusion(), "x0 = x0");
        let five = GroupParams::finite(5);
        assert_eq!(quotient_congruence(0, 1, &five).unwrap().conclusion(), "x0 = x1^2");
        assert!(quotient_congruence(0, 6, &five).unwrap().verify(&five));
    }

    #[test]
    fn tampered_certificate_fails() {
        let inf = GroupParams::infinite();
        let mut c = quotient_congruence(0, 2, &inf).unwrap();
        c.steps[1].after = GroupWord::power_of(2, 3, &inf);
        assert!(!c.verify(&inf));
    }

    #[test]
    fn witnesses() {
        let two = build_cyclic_cp_witness(&GroupParams::finite(2), 3, 12);
        assert!(two.passed());
        assert_eq!(two.obstruction.kind(), "Reflection");
        let inf = build_cyclic_cp_witness(&GroupParams::infinite(), 2, 12);
        assert!(inf.passed());
        let five = build_cyclic_cp_witness(&GroupParams::finite(5), 3, 12);
        assert_eq!(five.obstruction.kind(), "TwoDivisibility");
        assert!(five.obstruction.passed());
        // y_i = x_i x_{i+1}^{-2} has infinite order, so it cannot be a basis
        // element of a free product of order-5 cyclic groups.
        assert!(!five.factor_of_b[0].respects_relations);
    }
}
