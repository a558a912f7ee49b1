//! Rank-1 torsion-free abelian groups `R_χ` and their direct sums.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TfabError {
    #[error("cannot parse characteristic `{0}`")]
    Parse(String),
    #[error("default value must be 0 or inf")]
    BadDefault,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("the type of the rationals is excluded")]
    QTypeExcluded,
    #[error("the characteristic is infinite at {0}")]
    InfiniteAt(u64),
    #[error("height of the zero element")]
    HeightOfZero,
    #[error("coordinate {0} is not in R_chi")]
    NotInGroup(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(k) => write!(f, "{k}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl FromStr for ExtNat {
    type Err = TfabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "∞" => Ok(ExtNat::Inf),
            t => t.parse().map(ExtNat::Fin).map_err(|_| TfabError::Parse(s.to_string())),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation_int(n: &BigInt, p: u64) -> u64 {
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while !n.is_zero() && (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    v
}

/// `p`-adic valuation of a nonzero rational.
pub fn valuation(q: &BigRational, p: u64) -> i64 {
    valuation_int(q.numer(), p) as i64 - valuation_int(q.denom(), p) as i64
}

/// Prime factors of a positive integer by trial division.
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut d: u64 = 2;
    while BigInt::from(d) * BigInt::from(d) <= n {
        let bd = BigInt::from(d);
        if (&n % &bd).is_zero() {
            out.push(d);
            while (&n % &bd).is_zero() {
                n /= &bd;
            }
        }
        d += 1;
    }
    if n > BigInt::one() {
        out.push(u64::try_from(&n).expect("prime factor fits in u64"));
    }
    out
}

/// Finitely many exceptions over a default of 0 or infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Characteristic {
    exceptions: BTreeMap<u64, ExtNat>,
    default: ExtNat,
}

impl Characteristic {
    pub fn new(exceptions: BTreeMap<u64, ExtNat>, default: ExtNat) -> Result<Self, TfabError> {
        if default != ExtNat::Fin(0) && default != ExtNat::Inf {
            return Err(TfabError::BadDefault);
        }
        if let Some(&p) = exceptions.keys().find(|&&p| !is_prime(p)) {
            return Err(TfabError::NotPrime(p));
        }
        let exceptions = exceptions.into_iter().filter(|(_, v)| *v != default).collect();
        Ok(Characteristic { exceptions, default })
    }

    /// The characteristic of the integers.
    pub fn integers() -> Self {
        Characteristic { exceptions: BTreeMap::new(), default: ExtNat::Fin(0) }
    }

    pub fn with(mut self, p: u64, v: ExtNat) -> Result<Self, TfabError> {
        self.exceptions.insert(p, v);
        Characteristic::new(self.exceptions, self.default)
    }

    pub fn at(&self, p: u64) -> ExtNat {
        self.exceptions.get(&p).copied().unwrap_or(self.default)
    }

    pub fn default_value(&self) -> ExtNat {
        self.default
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, ExtNat> {
        &self.exceptions
    }

    /// Infinite everywhere: the type of the rationals.
    pub fn is_q_type(&self) -> bool {
        self.default == ExtNat::Inf && self.exceptions.is_empty()
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, v) in &self.exceptions {
            write!(f, "{p}:{v};")?;
        }
        write!(f, "default:{}", self.default)
    }
}

impl FromStr for Characteristic {
    type Err = TfabError;

    /// `"2:0;3:inf;default:0"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut exceptions = BTreeMap::new();
        let mut default = ExtNat::Fin(0);
        for part in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = part.split_once(':').ok_or_else(|| TfabError::Parse(s.to_string()))?;
            let v: ExtNat = v.parse()?;
            if k.trim() == "default" {
                default = v;
            } else {
                let p: u64 = k.trim().parse().map_err(|_| TfabError::Parse(s.to_string()))?;
                exceptions.insert(p, v);
            }
        }
        Characteristic::new(exceptions, default)
    }
}

impl Serialize for Characteristic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn membership_rchi(q: &BigRational, chi: &Characteristic) -> bool {
    prime_factors(q.denom()).into_iter().all(|p| match chi.at(p) {
        ExtNat::Inf => true,
        ExtNat::Fin(k) => valuation_int(q.denom(), p) <= k,
    })
}

fn primes_of(a: &Characteristic, b: &Characteristic) -> Vec<u64> {
    let mut ps: Vec<u64> = a.exceptions.keys().chain(b.exceptions.keys()).copied().collect();
    ps.sort_unstable();
    ps.dedup();
    ps
}

/// Same type: equal defaults and only finite-vs-finite disagreements.
pub fn char_equivalence(a: &Characteristic, b: &Characteristic) -> bool {
    a.default == b.default
        && primes_of(a, b).into_iter().all(|p| {
            let (x, y) = (a.at(p), b.at(p));
            x == y || (x != ExtNat::Inf && y != ExtNat::Inf)
        })
}

/// A rational `q` with `q R_a = R_b`, when the types agree.
pub fn rank1_isomorphic(a: &Characteristic, b: &Characteristic) -> Option<BigRational> {
    if !char_equivalence(a, b) {
        return None;
    }
    let mut q = BigRational::one();
    for p in primes_of(a, b) {
        if let (ExtNat::Fin(x), ExtNat::Fin(y)) = (a.at(p), b.at(p)) {
            let f = BigRational::from_integer(BigInt::from(p).pow((x as i64 - y as i64).unsigned_abs() as u32));
            q = if x >= y { q * f } else { q / f };
        }
    }
    Some(q)
}

/// `⊕_{i<rank} R_χ`, elements as rational coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankedGroup {
    pub chi: Characteristic,
    pub rank: usize,
}

pub type Vector = Vec<BigRational>;

impl RankedGroup {
    pub fn new(chi: Characteristic, rank: usize) -> Result<Self, TfabError> {
        if chi.is_q_type() {
            return Err(TfabError::QTypeExcluded);
        }
        Ok(RankedGroup { chi, rank })
    }

    pub fn contains(&self, v: &[BigRational]) -> bool {
        v.len() == self.rank && v.iter().all(|q| membership_rchi(q, &self.chi))
    }

    pub fn unit(&self, i: usize) -> Vector {
        (0..self.rank).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()
    }

    pub fn zero(&self) -> Vector {
        vec![BigRational::zero(); self.rank]
    }

    pub fn direct_sum(&self, other: &RankedGroup) -> Result<RankedGroup, TfabError> {
        if !char_equivalence(&self.chi, &other.chi) {
            return Err(TfabError::Parse(format!("{} and {} differ in type", self.chi, other.chi)));
        }
        RankedGroup::new(self.chi.clone(), self.rank + other.rank)
    }

    /// Greatest `k` with `p^k y = v` solvable in the group.
    pub fn p_height(&self, v: &[BigRational], p: u64) -> Result<ExtNat, TfabError> {
        if v.len() != self.rank {
            return Err(TfabError::RankMismatch(v.len(), self.rank));
        }
        if let Some(q) = v.iter().find(|q| !membership_rchi(q, &self.chi)) {
            return Err(TfabError::NotInGroup(q.to_string()));
        }
        let nonzero: Vec<&BigRational> = v.iter().filter(|q| !q.is_zero()).collect();
        if nonzero.is_empty() {
            return Err(TfabError::HeightOfZero);
        }
        Ok(match self.chi.at(p) {
            ExtNat::Inf => ExtNat::Inf,
            ExtNat::Fin(c) => ExtNat::Fin(nonzero.iter().map(|q| (valuation(q, p) + c as i64) as u64).min().unwrap()),
        })
    }
}

pub fn add(a: &[BigRational], b: &[BigRational]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(c: &BigRational, a: &[BigRational]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pow(p: u64, k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(p).pow(k as u32))
}

/// Determinant and inverse by Gauss-Jordan elimination.
pub fn invert(m: &[Vector]) -> Option<(BigRational, Vec<Vector>)> {
    let n = m.len();
    let mut a: Vec<Vector> = m.to_vec();
    let mut inv: Vec<Vector> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    let mut det = BigRational::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det *= &pv;
        for j in 0..n {
            a[col][j] /= &pv;
            inv[col][j] /= &pv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let (x, y) = (&a[col][j] * &f, &inv[col][j] * &f);
                    a[r][j] -= x;
                    inv[r][j] -= y;
                }
            }
        }
    }
    Some((det, inv))
}

#[derive(Clone, Debug, Serialize)]
pub struct TelescopeCheck {
    pub k: usize,
    /// Coefficients of `y_0..y_{k-1}`.
    pub coefficients: Vec<String>,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TfabCpWitness {
    pub chi: Characteristic,
    pub p: u64,
    pub lmax: usize,
    /// Scaling from the input characteristic to the normalized one.
    pub normalization: String,
    pub chain_step: Vec<bool>,
    /// Basis-change matrix of `{y_0..y_l} ∪ {x_{l+1}..}` invertible over `R_χ`.
    pub factor_of_b: Vec<bool>,
    pub determinants: Vec<String>,
    pub telescoping: Vec<TelescopeCheck>,
    pub fresh_height: ExtNat,
}

impl TfabCpWitness {
    pub fn passed(&self) -> bool {
        self.chain_step.iter().all(|&c| c)
            && self.factor_of_b.iter().all(|&c| c)
            && self.telescoping.iter().all(|t| t.exact)
            && self.fresh_height == self.chi.at(self.p)
            && self.fresh_height != ExtNat::Inf
    }
}

impl TfabCpWitness {
    /// `y_i = x_i − p x_{i+1}` in `x`-coordinates.
    pub fn y(&self, i: usize) -> Vector {
        y_vector(i, self.lmax + 2, self.p)
    }
}

fn y_vector(i: usize, rank: usize, p: u64) -> Vector {
    (0..rank)
        .map(|j| {
            if j == i {
                BigRational::one()
            } else if j == i + 1 {
                -int(p)
            } else {
                BigRational::zero()
            }
        })
        .collect()
}

/// Rows `y_0..y_l` then `x_{l+1}..x_{rank-1}`.
pub fn basis_change(l: usize, rank: usize, p: u64) -> Vec<Vector> {
    (0..rank)
        .map(|i| if i <= l { y_vector(i, rank, p) } else { (0..rank).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect() })
        .collect()
}

pub fn build_tfab_cp_witness(chi: &Characteristic, p: u64, lmax: usize, height_budget: usize) -> Result<TfabCpWitness, TfabError> {
    if chi.is_q_type() {
        return Err(TfabError::QTypeExcluded);
    }
    if !is_prime(p) {
        return Err(TfabError::NotPrime(p));
    }
    if chi.at(p) == ExtNat::Inf {
        return Err(TfabError::InfiniteAt(p));
    }
    let normalized = chi.clone().with(p, ExtNat::Fin(0))?;
    let q = rank1_isomorphic(chi, &normalized).expect("finite change at one prime");
    let rank = lmax + 2;
    let b = RankedGroup::new(normalized.clone(), rank)?;

    let mut factor_of_b = Vec::new();
    let mut determinants = Vec::new();
    for l in 0..=lmax {
        let m = basis_change(l, rank, p);
        let ok = match invert(&m) {
            Some((det, inv)) => {
                determinants.push(det.to_string());
                let entries_ok = m.iter().chain(&inv).all(|row| b.contains(row));
                entries_ok && membership_rchi(&det, &normalized) && membership_rchi(&det.recip(), &normalized)
            }
            None => {
                determinants.push("0".into());
                false
            }
        };
        factor_of_b.push(ok);
    }
    // The basis of A_l is the first l+1 rows of the basis of A_{l+1}.
    let chain_step = (0..lmax).map(|l| factor_of_b[l + 1] && basis_change(l, rank, p)[..=l] == basis_change(l + 1, rank, p)[..=l]).collect();

    let mut telescoping = Vec::new();
    for k in 0..=lmax.min(height_budget) {
        let lhs = add(&b.unit(0), &scale(&-pow(p, k), &b.unit(k)));
        let coeffs: Vec<BigRational> = (0..k).map(|j| pow(p, j)).collect();
        let rhs = coeffs.iter().enumerate().fold(b.zero(), |acc, (j, c)| add(&acc, &scale(c, &y_vector(j, rank, p))));
        let exact = lhs == rhs && coeffs.iter().all(|c| membership_rchi(c, &normalized));
        telescoping.push(TelescopeCheck { k, coefficients: coeffs.iter().map(|c| c.to_string()).collect(), exact });
    }
    let fresh_height = b.p_height(&b.unit(rank - 1), p)?;
    Ok(TfabCpWitness {
        chi: normalized,
        p,
        lmax,
        normalization: q.to_string(),
        chain_step,
        factor_of_b,
        determinants,
        telescoping,
        fresh_height,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(s: &str) -> Characteristic {
        s.parse().unwrap()
    }

    #[test]
    fn membership() {
        let z = Characteristic::integers();
        assert!(!membership_rchi(&rational(1, 2), &z));
        assert!(membership_rchi(&rational(7, 1), &z));
        let c = chi("2:inf;default:0");
        assert!(membership_rchi(&rational(5, 8), &c));
        assert!(!membership_rchi(&rational(1, 3), &c));
    }

    #[test]
    fn parsing_round_trip() {
        let c = chi("2:0;3:inf;default:0");
        assert_eq!(c.to_string(), "3:inf;default:0");
        assert_eq!(chi(&c.to_string()), c);
        assert!(matches!("2:x".parse::<Characteristic>(), Err(TfabError::Parse(_))));
        assert!(matches!("4:1".parse::<Characteristic>(), Err(TfabError::NotPrime(4))));
    }

    #[test]
    fn equivalence() {
        let z = Characteristic::integers();
        assert!(char_equivalence(&z, &chi("2:1")));
        assert!(!char_equivalence(&z, &chi("2:inf")));
        assert!(char_equivalence(&z, &z));
    }

    #[test]
    fn baer_witness() {
        let z = Characteristic::integers();
        assert_eq!(rank1_isomorphic(&chi("2:1"), &z), Some(rational(2, 1)));
        assert_eq!(rank1_isomorphic(&z, &z), Some(rational(1, 1)));
        assert_eq!(rank1_isomorphic(&z, &chi("2:inf")), None);
    }

    #[test]
    fn heights() {
        let z = RankedGroup::new(Characteristic::integers(), 1).unwrap();
        assert_eq!(z.p_height(&[rational(4, 1)], 2), Ok(ExtNat::Fin(2)));
        let c = RankedGroup::new(chi("3:inf"), 1).unwrap();
        assert_eq!(c.p_height(&[rational(1, 1)], 3), Ok(ExtNat::Inf));
        let z2 = RankedGroup::new(Characteristic::integers(), 2).unwrap();
        assert_eq!(z2.p_height(&[rational(2, 1), rational(3, 1)], 2), Ok(ExtNat::Fin(0)));
        assert_eq!(z2.p_height(&z2.zero(), 2), Err(TfabError::HeightOfZero));
    }

    #[test]
    fn q_type_excluded() {
        assert_eq!(RankedGroup::new(chi("default:inf"), 1), Err(TfabError::QTypeExcluded));
        assert!(matches!(build_tfab_cp_witness(&chi("default:inf"), 2, 3, 3), Err(TfabError::QTypeExcluded)));
    }

    #[test]
    fn witnesses() {
        let w = build_tfab_cp_witness(&Characteristic::integers(), 2, 5, 10).unwrap();
        assert!(w.passed());
        assert_eq!(w.telescoping.len(), 6);
        let w = build_tfab_cp_witness(&chi("3:inf;default:0"), 2, 4, 10).unwrap();
        assert!(w.passed());
        let w = build_tfab_cp_witness(&chi("2:3"), 2, 2, 10).unwrap();
        assert_eq!(w.normalization, "8");
        assert_eq!(w.fresh_height, ExtNat::Fin(0));
    }
}
