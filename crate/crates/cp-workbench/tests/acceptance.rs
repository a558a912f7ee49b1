//! Acceptance gate: one PASS/FAIL line per criterion. Exits nonzero when any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use cp_workbench::cyclic::{self, CyclicObstruction, ElementOrder, GroupParams, GroupWord, Membership};
use cp_workbench::harness::{self, Clause, ClassAdapter, CyclicAdapter, Fault, Faulty, NGonAdapter, Outcome, SteinerAdapter, TfabAdapter};
use cp_workbench::hf;
use cp_workbench::incidence::{Dist, IncidenceStructure, Sort};
use cp_workbench::iso;
use cp_workbench::ngon;
use cp_workbench::plane::{self, PlaneError};
use cp_workbench::steiner::{self, SteinerParams};
use cp_workbench::tfab::{self, Characteristic, ExtNat, RankedGroup};

const STEINER_LIMIT: Duration = Duration::from_secs(10);
const NGON_LIMIT: Duration = Duration::from_secs(30);
const CYCLIC_LIMIT: Duration = Duration::from_secs(5);
const TFAB_LIMIT: Duration = Duration::from_secs(2);

const RANDOM_NGON_RUNS: usize = 500;
const RANDOM_NGON_MAX_SIZE: usize = 25;
const PLANE_SEEDS: u64 = 50;
const PLANE_MAX_ELEMENTS: usize = 60;
const PLANE_BUDGET: usize = 8;
const PLANE_MIN_COMPLETED: f64 = 0.80;
const PHEIGHT_CASES: usize = 200;
const PHEIGHT_BOUND: i64 = 8;
const ISO_CASES: usize = 200;
const ISO_MAX_ELEMENTS: usize = 10;
const GIRTH_CASES: usize = 150;
const GIRTH_MAX_ELEMENTS: usize = 30;
const LAW_SAMPLES: usize = 20;

type Verdict = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let e = t.elapsed();
    check(e <= limit, format!("{what} took {e:.2?}, limit {limit:?}"))?;
    Ok(e)
}

// Oracles.

/// Shortest cycle of length at most `bound`, by exhaustive enumeration of
/// simple cycles, each rooted at its smallest vertex. Paths no shorter than
/// the best cycle so far are cut.
fn shortest_cycle_by_enumeration(s: &IncidenceStructure, bound: usize) -> Option<usize> {
    fn dfs(s: &IncidenceStructure, root: usize, v: usize, len: usize, on: &mut [bool], best: &mut usize) {
        for &w in s.neighbors(v) {
            if w == root && len >= 3 {
                *best = (*best).min(len);
            } else if w > root && !on[w] && len + 1 < *best {
                on[w] = true;
                dfs(s, root, w, len + 1, on, best);
                on[w] = false;
            }
        }
    }
    let mut best = bound + 1;
    let mut on = vec![false; s.len()];
    for root in s.indices() {
        on[root] = true;
        dfs(s, root, root, 1, &mut on, &mut best);
        on[root] = false;
    }
    (best <= bound).then_some(best)
}

fn dist_to_option(d: Dist) -> Option<usize> {
    match d {
        Dist::Finite(x) => Some(x),
        Dist::Infinity => None,
    }
}

/// Sort-preserving backtracking over all bijections.
fn isomorphic_by_brute_force(a: &IncidenceStructure, b: &IncidenceStructure) -> bool {
    fn extend(a: &IncidenceStructure, b: &IncidenceStructure, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let i = map.len();
        if i == a.len() {
            return true;
        }
        for j in b.indices() {
            if used[j] || a.sort(i) != b.sort(j) || a.neighbors(i).len() != b.neighbors(j).len() {
                continue;
            }
            if (0..i).any(|k| a.incident(i, k) != b.incident(j, map[k])) {
                continue;
            }
            used[j] = true;
            map.push(j);
            if extend(a, b, map, used) {
                return true;
            }
            map.pop();
            used[j] = false;
        }
        false
    }
    a.len() == b.len() && extend(a, b, &mut Vec::new(), &mut vec![false; b.len()])
}

fn random_structure(rng: &mut ChaCha8Rng, size: usize, density: f64, prefix: &str) -> IncidenceStructure {
    let mut s = IncidenceStructure::new("point", "block");
    for i in 0..size {
        let sort = if rng.gen_bool(0.5) { Sort::PointLike } else { Sort::BlockLike };
        s.add_generator(&format!("{prefix}{i}"), sort).unwrap();
    }
    for i in 0..size {
        for j in i + 1..size {
            if s.sort(i) != s.sort(j) && rng.gen_bool(density) {
                s.add_incidence(i, j).unwrap();
            }
        }
    }
    s
}

/// Relabeled copy with the elements in shuffled order.
fn shuffled_copy(a: &IncidenceStructure, rng: &mut ChaCha8Rng) -> IncidenceStructure {
    let mut perm: Vec<usize> = a.indices().collect();
    perm.shuffle(rng);
    let mut b = IncidenceStructure::new("point", "block");
    let mut pos = vec![0; a.len()];
    for (k, &i) in perm.iter().enumerate() {
        pos[i] = b.add_generator(&format!("y{k}"), a.sort(i)).unwrap();
    }
    for i in a.indices() {
        for &j in a.neighbors(i) {
            if i < j {
                b.add_incidence(pos[i], pos[j]).unwrap();
            }
        }
    }
    b
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Largest `h ≤ cap` with `v / p^h` in the group; `Inf` past the cap.
fn p_height_by_brute_force(g: &RankedGroup, v: &[BigRational], p: u64, cap: u64) -> ExtNat {
    let mut w: Vec<BigRational> = v.to_vec();
    let inv = BigRational::new(BigInt::one(), BigInt::from(p));
    for h in 0..=cap {
        let next: Vec<BigRational> = w.iter().map(|x| x * &inv).collect();
        if !g.contains(&next) {
            return ExtNat::Fin(h);
        }
        w = next;
    }
    ExtNat::Inf
}

fn determinant(m: &[Vec<BigRational>]) -> BigRational {
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let n = a.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| !a[r][c].is_zero()) else { return BigRational::zero() };
        if r != c {
            a.swap(r, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

// Criteria.

fn criterion_1() -> Verdict {
    let mut slowest = Duration::ZERO;
    for (k, n) in [(2, 3), (2, 4), (3, 4), (3, 5)] {
        let t = Instant::now();
        let params = SteinerParams::new(k, n).map_err(|e| e.to_string())?;
        let lmax = 2;
        let w = steiner::build_steiner_cp_witness(params, lmax, steiner::CP_STAGES).map_err(|e| e.to_string())?;
        for l in 0..=lmax {
            let c = w.clause_checks(l).map_err(|e| e.to_string())?;
            check(c.all_pass(), format!("({k},{n}) l={l}: {c:?}"))?;
        }
        let obs = w.verify_obstruction(lmax).map_err(|e| format!("({k},{n}) obstruction: {e}"))?;
        let sub = w.s().induced_by_names(obs.context.iter()).map_err(|e| e.to_string())?;
        let again = hf::verify_obstruction(&sub, &obs, params.criterion()).map_err(|e| e.to_string())?;
        check(again, format!("({k},{n}) obstruction does not re-verify on the context"))?;
        slowest = slowest.max(within(t, STEINER_LIMIT, &format!("({k},{n})"))?);
    }
    Ok(format!("4 pairs, lmax 2, slowest {slowest:.2?} (limit {STEINER_LIMIT:?} each)"))
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    for n in [3, 5] {
        let lmax = 1;
        let w = ngon::build_ngon_cp_witness(n, lmax, ngon::CP_STAGES).map_err(|e| e.to_string())?;
        for l in 0..=lmax {
            let c = w.clause_checks(l).map_err(|e| e.to_string())?;
            check(c.forward_order_valid && c.reverse_order_valid, format!("n={n} l={l}: orderings {c:?}"))?;
            check(c.factor_of_b.found(), format!("n={n} l={l}: no A_l ⩽∗ B witness"))?;
            check(c.all_pass(), format!("n={n} l={l}: {c:?}"))?;
        }
    }
    let e = within(t, NGON_LIMIT, "n-gon witnesses")?;
    Ok(format!("n in {{3,5}}, lmax 1, {e:.2?} (limit {NGON_LIMIT:?})"))
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut largest = 0;
    for run in 0..RANDOM_NGON_RUNS {
        let n = [3, 4, 5][run % 3];
        let size = rng.gen_range(1..=RANDOM_NGON_MAX_SIZE);
        let a = ngon::random_partial_ngon(n, size, &mut rng).map_err(|e| e.to_string())?;
        let c = ngon::free_completion(&a, 2).map_err(|e| e.to_string())?;
        largest = largest.max(c.structure.len());
        let lib = dist_to_option(c.structure.girth());
        let oracle = shortest_cycle_by_enumeration(&c.structure, 2 * n);
        check(oracle.is_none() || oracle == Some(2 * n), format!("run {run}: n={n} cycle of length {oracle:?}"))?;
        check(lib.map_or(true, |g| g >= 2 * n), format!("run {run}: n={n} girth {lib:?}"))?;
        check((lib == Some(2 * n)) == oracle.is_some(), format!("run {run}: girth {lib:?} but oracle {oracle:?}"))?;
    }
    Ok(format!("{RANDOM_NGON_RUNS}/{RANDOM_NGON_RUNS} runs keep girth ≥ 2n (largest completion {largest})"))
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let p = GroupParams::finite(2);
    let w = cyclic::build_cyclic_cp_witness(&p, 3, 12);
    for (i, y) in w.y.iter().take(4).enumerate() {
        check(!y.is_identity() && y.multiply(y, &p).is_identity(), format!("y{i} = {y} is not of order 2"))?;
        check(cyclic::element_order(y, &p, 64) == ElementOrder::Finite(2), format!("y{i}: library order disagrees"))?;
        // w x_j w^{-1}: an odd palindrome of syllables around a single letter
        let s = &y.syllables;
        let palindrome = s.len() % 2 == 1 && (0..s.len()).all(|k| s[k] == s[s.len() - 1 - k]);
        check(palindrome, format!("y{i} = {y} is not visibly a conjugate of a generator"))?;
        check(cyclic::is_reflection_conjugate(y, &p).unwrap_or(false), format!("y{i}: not a reflection"))?;
    }
    match &w.obstruction {
        CyclicObstruction::Reflection { x0_membership, length_budget, .. } => {
            check(*length_budget == 12, "length budget is not 12")?;
            check(matches!(x0_membership, Membership::NotFoundWithinBudget { .. }), format!("x0: {x0_membership:?}"))?;
        }
        other => return Err(format!("order 2 gave {}", other.kind())),
    }
    for p in [GroupParams::finite(5), GroupParams::infinite()] {
        for k in 1..=6 {
            let c = cyclic::quotient_congruence(0, k, &p).map_err(|e| e.to_string())?;
            check(c.verify(&p), format!("order {} k={k}: certificate does not re-verify", p.order))?;
            // x_i ≡ x_{i+1}^2 modulo the chain, so x_0 ≡ x_k^(2^k)
            let expected = GroupWord::power_of(k, 1i64 << k, &p);
            let got = GroupWord::parse(c.conclusion().split('=').nth(1).unwrap_or(""), &p).map_err(|e| e.to_string())?;
            check(got == expected, format!("order {} k={k}: {} but expected x0 = {expected}", p.order, c.conclusion()))?;
        }
    }
    let e = within(t, CYCLIC_LIMIT, "cyclic checks")?;
    Ok(format!("order 2 reflections, x0 not found at length 12, 12 congruence certificates, {e:.2?} (limit {CYCLIC_LIMIT:?})"))
}

fn criterion_5() -> Verdict {
    let t = Instant::now();
    let (p, lmax) = (2u64, 6usize);
    for chi in [Characteristic::integers(), "3:inf;default:0".parse::<Characteristic>().map_err(|e| e.to_string())?] {
        let w = tfab::build_tfab_cp_witness(&chi, p, lmax, 64).map_err(|e| e.to_string())?;
        let rank = lmax + 2;
        for l in 0..=lmax {
            let m = tfab::basis_change(l, rank, p);
            let det = determinant(&m);
            let unit = !det.is_zero() && tfab::membership_rchi(&det.recip(), &chi) && tfab::membership_rchi(&det, &chi);
            check(unit, format!("χ={chi} l={l}: determinant {det} is not a unit"))?;
            check(w.factor_of_b[l], format!("χ={chi} l={l}: library says not invertible"))?;
        }
        for k in 1..=lmax {
            // x_0 = Σ_{i<k} p^i y_i + p^k x_k
            let mut sum = vec![BigRational::zero(); rank];
            for i in 0..k {
                sum = tfab::add(&sum, &tfab::scale(&big((p as i64).pow(i as u32)), &w.y(i)));
            }
            let mut xk = vec![BigRational::zero(); rank];
            xk[k] = big((p as i64).pow(k as u32));
            sum = tfab::add(&sum, &xk);
            let mut x0 = vec![BigRational::zero(); rank];
            x0[0] = BigRational::one();
            check(sum == x0, format!("χ={chi} k={k}: telescoping sum is not x0"))?;
        }
        check(w.telescoping.iter().all(|c| c.exact), format!("χ={chi}: library telescoping not exact"))?;
        check(w.fresh_height == ExtNat::Fin(0), format!("χ={chi}: fresh height {}", w.fresh_height))?;
        let g = RankedGroup::new(chi.clone(), rank).map_err(|e| e.to_string())?;
        let fresh = g.unit(lmax + 1);
        check(p_height_by_brute_force(&g, &fresh, p, 64) == ExtNat::Fin(0), format!("χ={chi}: brute-force height is not 0"))?;
    }
    let e = within(t, TFAB_LIMIT, "tfab checks")?;
    Ok(format!("χ in {{ℤ, 3:inf;default:0}}, p=2, lmax 6, {e:.2?} (limit {TFAB_LIMIT:?})"))
}

fn criterion_6() -> Verdict {
    let (mut completed, mut exhausted) = (0usize, 0usize);
    for seed in 0..PLANE_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extra = rng.gen_range(1..=3);
        let g = plane::random_generators(extra, &mut rng).map_err(|e| e.to_string())?;
        let t = plane::truncation(&g).map_err(|e| e.to_string())?.structure;
        check(t.len() <= PLANE_MAX_ELEMENTS, format!("seed {seed}: truncation has {} elements", t.len()))?;
        let order = plane::derive_order(&g).map_err(|e| e.to_string())?;
        let c = match plane::canonicalize(&g, &order, PLANE_BUDGET) {
            Ok(c) => c,
            Err(PlaneError::BudgetExhausted(_)) => {
                exhausted += 1;
                continue;
            }
            Err(e) => return Err(format!("seed {seed}: {e}")),
        };
        let b = c.basis();
        check(b.points.len() == 5, format!("seed {seed}: {} frame points", b.points.len()))?;
        let frame = c.frame().map_err(|e| e.to_string())?;
        let line = frame.id(plane::FRAME_LINE).ok_or("frame has no line")?;
        check(frame.sort(line) == Sort::BlockLike, "frame line is a point")?;
        check(frame.len() == 6 + b.on_line.len(), format!("seed {seed}: frame has {} elements", frame.len()))?;
        for x in frame.indices().filter(|&x| x != line) {
            check(frame.sort(x) == Sort::PointLike, format!("seed {seed}: extra frame line {}", frame.name(x)))?;
            // L passes through a0, a1 and the d_j only
            let name = frame.name(x);
            let on = name == "a0" || name == "a1" || (0..b.on_line.len()).any(|j| plane::frame_point(j) == name);
            check(frame.incident(x, line) == on, format!("seed {seed}: {} misplaced", frame.name(x)))?;
            check(frame.neighbors(x).len() == usize::from(on), format!("seed {seed}: {} has extra incidences", frame.name(x)))?;
        }
        let rep = match plane::verify_recompletion(&c, &t, 2 * PLANE_BUDGET) {
            Ok(r) => r,
            Err(PlaneError::BudgetExhausted(_)) => {
                exhausted += 1;
                continue;
            }
            Err(e) => return Err(format!("seed {seed}: {e}")),
        };
        check(rep.passed(), format!("seed {seed}: re-completion {rep:?}"))?;
        completed += 1;
    }
    let share = completed as f64 / PLANE_SEEDS as f64;
    check(share >= PLANE_MIN_COMPLETED, format!("only {completed}/{PLANE_SEEDS} completed within budget"))?;
    Ok(format!("{completed}/{PLANE_SEEDS} within budget, all equivalent; {exhausted} exhausted"))
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let primes = [2u64, 3, 5];
    let values = [ExtNat::Fin(0), ExtNat::Fin(1), ExtNat::Fin(2), ExtNat::Inf];
    let (mut case, mut drawn) = (0, 0);
    while case < PHEIGHT_CASES {
        drawn += 1;
        check(drawn <= 100 * PHEIGHT_CASES, "too few group members drawn")?;
        let mut ex = BTreeMap::new();
        for &q in &primes {
            if rng.gen_bool(0.6) {
                ex.insert(q, *values.choose(&mut rng).unwrap());
            }
        }
        let chi = Characteristic::new(ex, ExtNat::Fin(0)).map_err(|e| e.to_string())?;
        let rank = rng.gen_range(1..=3);
        let g = RankedGroup::new(chi.clone(), rank).map_err(|e| e.to_string())?;
        let p = *primes.choose(&mut rng).unwrap();
        let v: Vec<BigRational> = (0..rank)
            .map(|_| {
                let num = rng.gen_range(-PHEIGHT_BOUND..=PHEIGHT_BOUND);
                let den = rng.gen_range(1..=PHEIGHT_BOUND);
                BigRational::new(BigInt::from(num), BigInt::from(den))
            })
            .collect();
        if !g.contains(&v) || v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let lib = g.p_height(&v, p).map_err(|e| e.to_string())?;
        let oracle = p_height_by_brute_force(&g, &v, p, 64);
        check(lib == oracle, format!("case {case}: χ={chi} p={p} v={v:?}: {lib} vs {oracle}"))?;
        case += 1;
    }

    let (mut iso_yes, mut iso_no) = (0, 0);
    for case in 0..ISO_CASES {
        let size = rng.gen_range(1..=ISO_MAX_ELEMENTS);
        let a = random_structure(&mut rng, size, 0.4, "x");
        let b = match case % 3 {
            0 => shuffled_copy(&a, &mut rng),
            1 => {
                let c = shuffled_copy(&a, &mut rng);
                let mut j = c.to_json_value();
                if !j.incidences.is_empty() {
                    j.incidences.remove(0);
                }
                shuffled_copy(&IncidenceStructure::from_json_value(&j).unwrap(), &mut rng)
            }
            _ => random_structure(&mut rng, size, 0.4, "y"),
        };
        let lib = iso::back_and_forth_equivalent(&a, &b);
        let oracle = isomorphic_by_brute_force(&a, &b);
        check(lib.is_equivalent() == oracle, format!("case {case}: back-and-forth {:?}, brute force {oracle}", lib.verdict))?;
        if let Some(map) = &lib.witness {
            check(iso::verify_isomorphism(&a, &b, map), format!("case {case}: witness map is not an isomorphism"))?;
        }
        if oracle { iso_yes += 1 } else { iso_no += 1 }
    }

    let mut with_cycle = 0;
    for case in 0..GIRTH_CASES {
        let size = rng.gen_range(2..=GIRTH_MAX_ELEMENTS);
        let density = rng.gen_range(0.05..0.3);
        let s = random_structure(&mut rng, size, density, "g");
        let lib = dist_to_option(s.girth());
        let oracle = shortest_cycle_by_enumeration(&s, s.len());
        check(lib == oracle, format!("case {case}: girth {lib:?}, enumeration {oracle:?}"))?;
        with_cycle += usize::from(oracle.is_some());
    }
    Ok(format!(
        "p-height {PHEIGHT_CASES} cases ({drawn} drawn); isomorphism {ISO_CASES} cases ({iso_yes} iso, {iso_no} not); girth {GIRTH_CASES} cases ({with_cycle} with cycles)"
    ))
}

fn laws_pass<A: ClassAdapter>(a: &A) -> Result<(), String> {
    let r = harness::verify_amalgamation_laws(a, LAW_SAMPLES, 8).map_err(|e| e.to_string())?;
    check(r.passed(), format!("{}: {:?}", r.adapter, r.checks))
}

fn fault_fails<A: ClassAdapter + Clone>(a: &A) -> Result<(), String> {
    for (fault, intended) in [(Fault::OrderDependentNaming, Clause::ProductIso), (Fault::NonAssociative, Clause::ProductAssoc)] {
        let f = Faulty { inner: a.clone(), fault };
        let r = harness::verify_amalgamation_laws(&f, LAW_SAMPLES, 8).map_err(|e| e.to_string())?;
        for c in &r.checks {
            let want = if c.clause == intended { Outcome::Fail } else { Outcome::Pass };
            check(c.verdict == want, format!("{}: {} is {}", r.adapter, c.clause, c.verdict))?;
        }
    }
    Ok(())
}

fn criterion_8() -> Verdict {
    let s = SteinerAdapter::new(2, 3).map_err(|e| e.to_string())?;
    let n = NGonAdapter::new(3).map_err(|e| e.to_string())?;
    let c = CyclicAdapter::new(cyclic::Order::Finite(2)).map_err(|e| e.to_string())?;
    let t = TfabAdapter::new(Characteristic::integers(), 2).map_err(|e| e.to_string())?;
    laws_pass(&s)?;
    laws_pass(&n)?;
    laws_pass(&c)?;
    laws_pass(&t)?;
    fault_fails(&s)?;
    fault_fails(&n)?;
    fault_fails(&c)?;
    fault_fails(&t)?;
    let r = harness::cyclic_cp_report(cyclic::Order::Finite(2), 3, 12, 0, Some(harness::ChainFault { index: 1 })).map_err(|e| e.to_string())?;
    check(r.first_failure == Some(Clause::ChainStep), "injected chain fault not reported as ChainStep")?;
    Ok(format!("4 adapters pass with {LAW_SAMPLES} samples; both faults fail only their clause on each"))
}

fn without_timing(text: &[u8]) -> Result<String, String> {
    let mut v: Value = serde_json::from_slice(text).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("report is not an object")?.remove("timing");
    serde_json::to_string(&v).map_err(|e| e.to_string())
}

fn criterion_9() -> Verdict {
    let seed = 17;
    let chi: Characteristic = "2:0;3:inf;default:0".parse().map_err(|e: tfab::TfabError| e.to_string())?;
    let reports = || -> Result<Vec<String>, String> {
        Ok(vec![
            harness::steiner_cp_report(2, 3, 2, 4, seed, None).map_err(|e| e.to_string())?.to_json(false),
            harness::ngon_cp_report(3, 1, 11, seed, None).map_err(|e| e.to_string())?.to_json(false),
            harness::cyclic_cp_report(cyclic::Order::Finite(2), 3, 12, seed, None).map_err(|e| e.to_string())?.to_json(false),
            harness::tfab_cp_report(&chi, 2, 6, 64, seed, None).map_err(|e| e.to_string())?.to_json(false),
            serde_json::to_string(&harness::verify_amalgamation_laws(&SteinerAdapter::new(2, 3).unwrap(), 5, seed).map_err(|e| e.to_string())?)
                .unwrap(),
        ])
    };
    let (first, second) = (reports()?, reports()?);
    for (a, b) in first.iter().zip(&second) {
        check(a.as_bytes() == b.as_bytes(), "library reports differ between runs")?;
    }

    let cli = |args: &[&str]| -> Result<String, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_cpw")).args(args).output().map_err(|e| e.to_string())?;
        without_timing(&o.stdout)
    };
    let commands: [&[&str]; 3] = [
        &["--seed", "17", "steiner", "cp-witness", "--k", "2", "--n", "3", "--lmax", "2", "--stages", "4"],
        &["--seed", "17", "cyclic", "cp-witness", "--order", "5", "--lmax", "2"],
        &["--seed", "17", "tfab", "cp-witness", "--char", "2:0;3:inf;default:0"],
    ];
    for args in commands {
        check(cli(args)? == cli(args)?, format!("cpw {} differs between runs", args.join(" ")))?;
    }
    Ok(format!("{} library reports and {} CLI reports byte-identical without timing", first.len(), commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("steiner CP witness", criterion_1),
        ("n-gon CP witness", criterion_2),
        ("random partial n-gons keep girth", criterion_3),
        ("cyclic group witnesses", criterion_4),
        ("tfab witnesses", criterion_5),
        ("plane canonicalization", criterion_6),
        ("oracle equivalence", criterion_7),
        ("amalgamation laws", criterion_8),
        ("determinism", criterion_9),
    ];
    // ACCEPTANCE_ONLY=3,7 runs a subset
    let only: Option<BTreeSet<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let (mut ran, mut failed) = (0, 0);
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(i + 1))) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match r {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{:.2?}]", i + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why} [{:.2?}]", i + 1, t.elapsed());
            }
        }
    }
    println!("acceptance: {}/{ran} criteria pass", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
