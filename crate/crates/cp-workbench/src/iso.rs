//! Finite back-and-forth equivalence.
//!
//! On finite structures a back-and-forth family exists iff the structures are
//! isomorphic, so the checker searches for an isomorphism by colour
//! refinement plus individualisation. Rounds are counted as: 1 for the
//! cardinality and sort census, then one per refinement pass, then one per
//! individualisation level.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::incidence::{IncidenceStructure, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Equivalent,
    Distinguished,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialIsoFamily {
    pub pairs_explored: usize,
    pub verdict: Verdict,
    pub distinguishing_round: Option<usize>,
    /// Name map a -> b when equivalent.
    #[serde(skip)]
    pub witness: Option<BTreeMap<String, String>>,
}

impl PartialIsoFamily {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }
}

struct Pair<'a> {
    a: &'a IncidenceStructure,
    b: &'a IncidenceStructure,
}

impl Pair<'_> {
    fn n(&self) -> usize {
        self.a.len()
    }

    fn adj(&self, side: usize, i: usize) -> &[usize] {
        if side == 0 {
            self.a.neighbors(i)
        } else {
            self.b.neighbors(i)
        }
    }

    // Refine both colourings jointly until stable. Returns None when the
    // colour histograms diverge, with the number of passes made.
    fn refine(&self, ca: &mut Vec<usize>, cb: &mut Vec<usize>) -> Result<usize, usize> {
        let mut passes = 0;
        loop {
            let mut table: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let sig = |side: usize, i: usize, col: &[usize]| {
                let mut ms: Vec<usize> = self.adj(side, i).iter().map(|&j| col[j]).collect();
                ms.sort_unstable();
                (col[i], ms)
            };
            let mut keys_a: Vec<(usize, Vec<usize>)> = (0..self.n()).map(|i| sig(0, i, ca)).collect();
            let keys_b: Vec<(usize, Vec<usize>)> = (0..self.n()).map(|i| sig(1, i, cb)).collect();
            // Canonical numbering: sort distinct keys so both sides agree.
            let mut all: Vec<&(usize, Vec<usize>)> = keys_a.iter().chain(keys_b.iter()).collect();
            all.sort();
            all.dedup();
            for (k, key) in all.into_iter().enumerate() {
                table.insert(key.clone(), k);
            }
            let na: Vec<usize> = keys_a.drain(..).map(|k| table[&k]).collect();
            let nb: Vec<usize> = keys_b.iter().map(|k| table[k]).collect();
            passes += 1;
            if histogram(&na) != histogram(&nb) {
                return Err(passes);
            }
            let stable = classes(&na) == classes(ca);
            *ca = na;
            *cb = nb;
            if stable {
                return Ok(passes);
            }
        }
    }
}

fn histogram(c: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &x in c {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

fn classes(c: &[usize]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

pub fn back_and_forth_equivalent(a: &IncidenceStructure, b: &IncidenceStructure) -> PartialIsoFamily {
    let distinguished = |round: usize, explored: usize| PartialIsoFamily {
        pairs_explored: explored,
        verdict: Verdict::Distinguished,
        distinguishing_round: Some(round),
        witness: None,
    };
    if a.len() != b.len()
        || a.edge_count() != b.edge_count()
        || a.count_sort(Sort::PointLike) != b.count_sort(Sort::PointLike)
    {
        return distinguished(1, 0);
    }
    let pair = Pair { a, b };
    let init = |s: &IncidenceStructure| -> Vec<usize> {
        s.indices().map(|i| if s.sort(i) == Sort::PointLike { 0 } else { 1 }).collect()
    };
    let (mut ca, mut cb) = (init(a), init(b));
    let passes = match pair.refine(&mut ca, &mut cb) {
        Ok(p) => p,
        Err(p) => return distinguished(1 + p, 0),
    };
    let mut explored = 0;
    let mut deepest = 0;
    match search(&pair, ca, cb, 0, &mut explored, &mut deepest) {
        Some(map) => {
            let witness = map
                .iter()
                .enumerate()
                .map(|(i, &j)| (a.name(i).to_string(), b.name(j).to_string()))
                .collect();
            PartialIsoFamily {
                pairs_explored: explored,
                verdict: Verdict::Equivalent,
                distinguishing_round: None,
                witness: Some(witness),
            }
        }
        None => distinguished(1 + passes + deepest + 1, explored),
    }
}

fn search(
    pair: &Pair,
    ca: Vec<usize>,
    cb: Vec<usize>,
    depth: usize,
    explored: &mut usize,
    deepest: &mut usize,
) -> Option<Vec<usize>> {
    *deepest = (*deepest).max(depth);
    let hist = histogram(&ca);
    // Smallest non-singleton class; ties broken by colour value.
    let target = hist.iter().filter(|(_, &n)| n > 1).min_by_key(|(&c, &n)| (n, c)).map(|(&c, _)| c);
    let Some(colour) = target else {
        let map: Vec<usize> = {
            let mut by_colour: HashMap<usize, usize> = HashMap::new();
            for (j, &c) in cb.iter().enumerate() {
                by_colour.insert(c, j);
            }
            ca.iter().map(|c| by_colour[c]).collect()
        };
        return if is_isomorphism(pair, &map) { Some(map) } else { None };
    };
    let x = ca.iter().position(|&c| c == colour).unwrap();
    let fresh = ca.iter().chain(cb.iter()).max().unwrap() + 1;
    for y in (0..cb.len()).filter(|&j| cb[j] == colour) {
        *explored += 1;
        let (mut na, mut nb) = (ca.clone(), cb.clone());
        na[x] = fresh;
        nb[y] = fresh;
        if pair.refine(&mut na, &mut nb).is_err() {
            continue;
        }
        if let Some(m) = search(pair, na, nb, depth + 1, explored, deepest) {
            return Some(m);
        }
    }
    None
}

fn is_isomorphism(pair: &Pair, map: &[usize]) -> bool {
    let (a, b) = (pair.a, pair.b);
    for i in a.indices() {
        if a.sort(i) != b.sort(map[i]) || a.degree(i) != b.degree(map[i]) {
            return false;
        }
        for &j in a.neighbors(i) {
            if !b.incident(map[i], map[j]) {
                return false;
            }
        }
    }
    true
}

/// Checks that `map` (names of `a` to names of `b`) is an isomorphism.
pub fn verify_isomorphism(
    a: &IncidenceStructure,
    b: &IncidenceStructure,
    map: &BTreeMap<String, String>,
) -> bool {
    if a.len() != b.len() || map.len() != a.len() {
        return false;
    }
    let mut idx = Vec::with_capacity(a.len());
    let mut used = vec![false; b.len()];
    for i in a.indices() {
        let Some(j) = map.get(a.name(i)).and_then(|n| b.id(n)) else {
            return false;
        };
        if used[j] {
            return false;
        }
        used[j] = true;
        idx.push(j);
    }
    a.edge_count() == b.edge_count() && is_isomorphism(&Pair { a, b }, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::fano_plane;

    #[test]
    fn relabeled_copy_is_equivalent() {
        let f = fano_plane();
        let g = f.renamed(|n| format!("z_{n}"));
        let r = back_and_forth_equivalent(&f, &g);
        assert!(r.is_equivalent());
        assert!(verify_isomorphism(&f, &g, r.witness.as_ref().unwrap()));
    }

    #[test]
    fn different_sizes_distinguished_at_round_one() {
        let f = fano_plane();
        let g = f.induced(&[0, 1, 2, 7]);
        let r = back_and_forth_equivalent(&f, &g);
        assert_eq!(r.verdict, Verdict::Distinguished);
        assert_eq!(r.distinguishing_round, Some(1));
    }
}
