//! Exact decision procedures for pretty good state transfer (PGST) between a
//! state `v` of `P_n` and its mirror image.
//!
//! The general test works on the lattice `L` of integer relations
//! `sum l_j theta_j = 0` over the eigenvalue support. PGST holds iff no
//! relation has `sum l_j = 0` while `sum l_j zeta_j` is odd, where
//! `zeta_j = 1` for even `j` and `0` otherwise. Writing `L0` for the
//! sum-zero sublattice, the parity functional is linear mod 2, so it is
//! enough to evaluate it on a basis of `L0`.
//!
//! For parity states on paths with `n + 1 = 2^t p^s` or `n + 1 = p^s` the
//! answer also follows from which obstruction sets `S_c` / `R_c` sit inside
//! the support; those deciders are independent of the lattice code and are
//! cross-checked against it.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::CycloElement;
use crate::error::{Error, Result};
use crate::lattice::{dot, left_kernel, lll_reduce, IntVector};
use crate::serde_int::JsonInt;
use crate::spectrum::theta_exact;
use crate::state::{eigenvalue_support_exact, PureState, SupportSet};

/// `zeta_j = (1 + (-1)^j) / 2`
pub fn parity_weight(j: usize) -> i64 {
    i64::from(j % 2 == 0)
}

/// An integer relation `sum_j l_j theta_j = 0` over a support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationVector {
    entries: BTreeMap<usize, BigInt>,
    sum: BigInt,
    parity_sum: BigInt,
}

impl RelationVector {
    /// Zero coefficients are dropped.
    pub fn new(entries: impl IntoIterator<Item = (usize, BigInt)>) -> Self {
        let mut map: BTreeMap<usize, BigInt> = BTreeMap::new();
        for (j, l) in entries {
            *map.entry(j).or_default() += l;
        }
        map.retain(|_, l| !l.is_zero());
        let sum = map.values().sum();
        let parity_sum = map
            .iter()
            .filter(|(j, _)| parity_weight(**j) == 1)
            .map(|(_, l)| l)
            .sum();
        Self {
            entries: map,
            sum,
            parity_sum,
        }
    }

    pub fn from_i64(entries: &[(usize, i64)]) -> Self {
        Self::new(entries.iter().map(|&(j, l)| (j, BigInt::from(l))))
    }

    pub fn entries(&self) -> &BTreeMap<usize, BigInt> {
        &self.entries
    }

    pub fn get(&self, j: usize) -> BigInt {
        self.entries.get(&j).cloned().unwrap_or_default()
    }

    /// `sum_j l_j`
    pub fn sum(&self) -> &BigInt {
        &self.sum
    }

    /// `sum_j l_j zeta_j`
    pub fn parity_sum(&self) -> &BigInt {
        &self.parity_sum
    }

    pub fn parity_is_odd(&self) -> bool {
        self.parity_sum.is_odd()
    }

    pub fn norm_sqr(&self) -> BigInt {
        self.entries.values().map(|l| l * l).sum()
    }

    /// `sum_j l_j theta_j` in `Q(zeta_{2m})`.
    pub fn theta_sum(&self, m: u64) -> CycloElement {
        let m_i = m as i64;
        CycloElement::from_exponents(
            2 * m,
            self.entries.iter().flat_map(|(&j, l)| {
                let j = j as i64;
                [(j, l.clone()), (2 * m_i - j, l.clone())]
            }),
        )
    }

    /// Exact check that this is a relation among the eigenvalues of `P_{m-1}`.
    pub fn is_relation(&self, m: u64) -> bool {
        self.entries.keys().all(|&j| j >= 1 && (j as u64) < m) && self.theta_sum(m).is_zero()
    }

    fn scaled_sum<'a>(terms: impl IntoIterator<Item = (&'a BigInt, &'a RelationVector)>) -> Self {
        let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
        for (c, v) in terms {
            if c.is_zero() {
                continue;
            }
            for (&j, l) in &v.entries {
                *acc.entry(j).or_default() += c * l;
            }
        }
        Self::new(acc)
    }
}

#[derive(Serialize, Deserialize)]
struct RelationVectorJson {
    entries: BTreeMap<String, JsonInt>,
    sum: JsonInt,
    parity_sum: JsonInt,
}

impl Serialize for RelationVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RelationVectorJson {
            entries: self
                .entries
                .iter()
                .map(|(j, l)| (j.to_string(), JsonInt(l.clone())))
                .collect(),
            sum: JsonInt(self.sum.clone()),
            parity_sum: JsonInt(self.parity_sum.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RelationVector {
    /// The cached sums are recomputed from the entries and must match.
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RelationVectorJson::deserialize(d)?;
        let entries = raw
            .entries
            .into_iter()
            .map(|(j, l)| {
                j.parse::<usize>()
                    .map(|j| (j, l.0))
                    .map_err(|_| serde::de::Error::custom(format!("bad eigenvalue index {j:?}")))
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        let v = RelationVector::new(entries);
        if v.sum != raw.sum.0 || v.parity_sum != raw.parity_sum.0 {
            return Err(serde::de::Error::custom(
                "cached sums disagree with relation entries",
            ));
        }
        Ok(v)
    }
}

/// Basis of every integer relation among `{theta_j : j in support}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationLattice {
    pub support: SupportSet,
    pub basis: Vec<RelationVector>,
    pub rank: usize,
    /// Dimension over `Q` of the span of the supported eigenvalues.
    pub span_dim: usize,
}

fn lattice_cache() -> &'static Mutex<HashMap<SupportSet, Arc<RelationLattice>>> {
    static CACHE: OnceLock<Mutex<HashMap<SupportSet, Arc<RelationLattice>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Relation lattice of a support, computed as the integer left kernel of the
/// matrix whose rows are the power-basis coordinates of `theta_j` in
/// `Q(zeta_{2m})`. The zero eigenvalue (`j = m/2`) contributes the unit
/// relation directly. The basis is LLL-reduced.
pub fn relation_lattice(support: &SupportSet) -> Result<Arc<RelationLattice>> {
    if support.is_empty() {
        return Err(Error::InvalidArgument("support must be nonempty".into()));
    }
    if let Some(hit) = lattice_cache().lock().unwrap().get(support) {
        return Ok(Arc::clone(hit));
    }
    let m = support.m;
    let zero_index = (m % 2 == 0).then_some(m as usize / 2);
    let nonzero: Vec<usize> = support
        .indices
        .iter()
        .copied()
        .filter(|&j| Some(j) != zero_index)
        .collect();
    let rows: Vec<IntVector> = nonzero
        .iter()
        .map(|&j| theta_exact(m, j).numerators().to_vec())
        .collect();
    let (mut basis, span_dim) = if rows.is_empty() {
        (Vec::new(), 0)
    } else {
        let kernel = left_kernel(&rows);
        let mut basis: Vec<RelationVector> = kernel
            .basis
            .iter()
            .map(|x| RelationVector::new(nonzero.iter().copied().zip(x.iter().cloned())))
            .collect();
        reduce_relations(&mut basis, &support.indices);
        (basis, kernel.rank)
    };
    if let Some(z) = zero_index.filter(|&z| support.contains(z)) {
        basis.push(RelationVector::from_i64(&[(z, 1)]));
    }
    let lattice = Arc::new(RelationLattice {
        support: support.clone(),
        rank: basis.len(),
        basis,
        span_dim,
    });
    Ok(lattice_cache()
        .lock()
        .unwrap()
        .entry(support.clone())
        .or_insert(lattice)
        .clone())
}

fn to_dense(v: &RelationVector, indices: &[usize]) -> IntVector {
    indices.iter().map(|&j| v.get(j)).collect()
}

fn reduce_relations(basis: &mut Vec<RelationVector>, indices: &[usize]) {
    let mut dense: Vec<IntVector> = basis.iter().map(|v| to_dense(v, indices)).collect();
    lll_reduce(&mut dense);
    *basis = dense
        .into_iter()
        .map(|x| RelationVector::new(indices.iter().copied().zip(x)))
        .collect();
}

/// Basis of `L0 = {l in L : sum l = 0}`, LLL-reduced.
pub fn sum_zero_sublattice(lattice: &RelationLattice) -> Vec<RelationVector> {
    if lattice.basis.is_empty() {
        return Vec::new();
    }
    let sums: Vec<IntVector> = lattice.basis.iter().map(|v| vec![v.sum().clone()]).collect();
    let kernel = left_kernel(&sums);
    let mut sub: Vec<RelationVector> = kernel
        .basis
        .iter()
        .map(|c| RelationVector::scaled_sum(c.iter().zip(&lattice.basis)))
        .collect();
    if !sub.is_empty() {
        reduce_relations(&mut sub, &lattice.support.indices);
    }
    sub
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    #[serde(rename = "yes")]
    Yes,
    #[serde(rename = "no")]
    No,
}

impl Answer {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "general_lattice")]
    GeneralLattice,
    #[serde(rename = "S_sets")]
    SSets,
    #[serde(rename = "R_sets")]
    RSets,
    #[serde(rename = "corollary")]
    Corollary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    S,
    R,
}

/// One obstruction set shown not to lie inside the support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrokenSet {
    pub family: Family,
    pub c: usize,
    pub missing: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    /// A relation with `sum l = 0` and odd parity sum.
    Violator {
        #[serde(flatten)]
        relation: RelationVector,
    },
    /// A basis of `L0` on which the parity functional is even.
    EvenBasis { basis: Vec<RelationVector> },
    /// Obstruction sets absent from the support, each with a missing index.
    ObstructionFree { broken: Vec<BrokenSet> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PgstVerdict {
    pub n: usize,
    pub m: u64,
    pub answer: Answer,
    pub method: Method,
    pub support: Vec<usize>,
    pub certificate: Certificate,
}

impl PgstVerdict {
    pub fn support_set(&self) -> SupportSet {
        SupportSet {
            m: self.m,
            indices: self.support.clone(),
        }
    }
}

/// Re-check a verdict's certificate from scratch against the recorded support.
///
/// Returns a description of the first failed check.
pub fn verify_certificate(verdict: &PgstVerdict) -> std::result::Result<(), String> {
    let m = verdict.m;
    let support =
        SupportSet::new(m, verdict.support.iter().copied()).map_err(|e| format!("bad support: {e}"))?;
    let in_support = |v: &RelationVector| v.entries().keys().all(|&j| support.contains(j));
    match &verdict.certificate {
        Certificate::Violator { relation } => {
            if verdict.answer != Answer::No {
                return Err("violator attached to a positive verdict".into());
            }
            if !in_support(relation) {
                return Err("violator uses indices outside the support".into());
            }
            if !relation.is_relation(m) {
                return Err("violator is not a relation among the eigenvalues".into());
            }
            if !relation.sum().is_zero() {
                return Err("violator coefficients do not sum to zero".into());
            }
            if !relation.parity_is_odd() {
                return Err("violator parity sum is even".into());
            }
        }
        Certificate::EvenBasis { basis } => {
            if verdict.answer != Answer::Yes {
                return Err("even basis attached to a negative verdict".into());
            }
            for (i, v) in basis.iter().enumerate() {
                if !in_support(v) {
                    return Err(format!("basis vector {i} leaves the support"));
                }
                if !v.is_relation(m) {
                    return Err(format!("basis vector {i} is not a relation"));
                }
                if !v.sum().is_zero() {
                    return Err(format!("basis vector {i} has nonzero sum"));
                }
                if v.parity_is_odd() {
                    return Err(format!("basis vector {i} has odd parity sum"));
                }
            }
        }
        Certificate::ObstructionFree { broken } => {
            if verdict.answer != Answer::Yes {
                return Err("obstruction witness attached to a negative verdict".into());
            }
            for b in broken {
                if support.contains(b.missing) {
                    return Err(format!("{} is in the support", b.missing));
                }
            }
            let shape = factor_shape(m).ok_or("m has no prime-power shape")?;
            let witnessed = |family: Family, c: usize, indices: &[usize]| {
                broken
                    .iter()
                    .any(|b| b.family == family && b.c == c && indices.contains(&b.missing))
            };
            if shape.t >= 1 {
                let family = s_family_with_zero(m, shape.p).map_err(|e| e.to_string())?;
                let class_covered = |class: usize| {
                    family
                        .iter()
                        .filter(|set| s_class(m, set.c) == class)
                        .all(|set| witnessed(Family::S, set.c, &set.indices))
                };
                if !class_covered(0) && !class_covered(1) {
                    return Err("neither parity class of S-sets is fully broken".into());
                }
            } else {
                for set in r_obstruction_sets(m, shape.p).map_err(|e| e.to_string())? {
                    if !witnessed(Family::R, set.c, &set.indices) {
                        return Err(format!("R_{} has no missing index", set.c));
                    }
                }
            }
        }
    }
    Ok(())
}

/// General decider on a support set.
pub fn decide_general_support(support: &SupportSet) -> Result<PgstVerdict> {
    let lattice = relation_lattice(support)?;
    let l0 = sum_zero_sublattice(&lattice);
    let violator = l0
        .iter()
        .filter(|v| v.parity_is_odd())
        .min_by(|a, b| {
            a.norm_sqr()
                .cmp(&b.norm_sqr())
                .then_with(|| a.entries().cmp(b.entries()))
        })
        .cloned();
    let (answer, certificate) = match violator {
        Some(relation) => (Answer::No, Certificate::Violator { relation }),
        None => (Answer::Yes, Certificate::EvenBasis { basis: l0 }),
    };
    Ok(PgstVerdict {
        n: support.m as usize - 1,
        m: support.m,
        answer,
        method: Method::GeneralLattice,
        support: support.indices.clone(),
        certificate,
    })
}

fn exact_support(v: &PureState) -> Result<SupportSet> {
    if !v.is_exact() {
        return Err(Error::refused(
            "not_exact",
            "support cannot be certified from floating-point amplitudes",
        ));
    }
    eigenvalue_support_exact(v)
}

/// PGST between `v` and its mirror via the relation lattice.
pub fn decide_pgst_general(v: &PureState) -> Result<PgstVerdict> {
    decide_general_support(&exact_support(v)?)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `m = 2^t p^s` with `p` an odd prime and `s >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub t: u32,
    pub p: u64,
    pub s: u32,
}

pub fn factor_shape(m: u64) -> Option<Shape> {
    if m == 0 {
        return None;
    }
    let t = m.trailing_zeros();
    let mut odd = m >> t;
    if odd == 1 {
        return None;
    }
    let p = (3..=odd)
        .step_by(2)
        .find(|d| odd % d == 0)
        .expect("odd part > 1 has an odd prime factor");
    let mut s = 0;
    while odd % p == 0 {
        odd /= p;
        s += 1;
    }
    (odd == 1).then_some(Shape { t, p, s })
}

fn s_set(m: u64, p: u64, c: usize) -> Vec<usize> {
    let step = (m / p) as usize;
    (0..p as usize).map(|j| c + j * step).collect()
}

fn r_set(m: u64, p: u64, c: usize) -> Vec<usize> {
    let step = (m / p) as usize;
    let mut out: Vec<usize> = (0..p as usize)
        .flat_map(|j| [c + j * step, step - c + j * step])
        .collect();
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    pub c: usize,
    pub indices: Vec<usize>,
}

/// The index families `S_c` (and `S_0`) or `R_c` for a given `m` and odd prime `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionSets {
    pub m: u64,
    pub p: u64,
    pub s_family: Vec<IndexSet>,
    pub s_zero: Option<IndexSet>,
    pub r_family: Vec<IndexSet>,
}

fn checked_shape(m: u64, p: u64) -> Result<Shape> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::refused(
            "p_not_odd_prime",
            format!("{p} is not an odd prime"),
        ));
    }
    match factor_shape(m) {
        Some(shape) if shape.p == p => Ok(shape),
        _ => Err(Error::refused(
            "m_shape",
            format!("{m} is not of the form 2^t * {p}^s with s >= 1"),
        )),
    }
}

/// `S_c = {c + j m/p : 0 <= j < p}` for `1 <= c < m/p`, plus `S_0 = {m/2}`.
/// Requires `m = 2^t p^s` with `t, s >= 1`.
pub fn s_obstruction_sets(m: u64, p: u64) -> Result<(Vec<IndexSet>, IndexSet)> {
    let shape = checked_shape(m, p)?;
    if shape.t == 0 {
        return Err(Error::refused(
            "m_shape",
            format!("S-sets need m even; {m} is an odd prime power"),
        ));
    }
    let family = (1..(m / p) as usize)
        .map(|c| IndexSet {
            c,
            indices: s_set(m, p, c),
        })
        .collect();
    Ok((
        family,
        IndexSet {
            c: 0,
            indices: vec![m as usize / 2],
        },
    ))
}

/// `R_c = {c + j m/p} u {m/p - c + j m/p}` for `1 <= c < m/(2p)`.
/// Requires `m = p^s`; the family is empty when `m = p`.
pub fn r_obstruction_sets(m: u64, p: u64) -> Result<Vec<IndexSet>> {
    let shape = checked_shape(m, p)?;
    if shape.t != 0 {
        return Err(Error::refused(
            "m_shape",
            format!("R-sets need m to be an odd prime power, got {m}"),
        ));
    }
    // c < m/(2p)  <=>  2pc < m
    Ok((1..)
        .take_while(|&c| 2 * p * (c as u64) < m)
        .map(|c| IndexSet {
            c,
            indices: r_set(m, p, c),
        })
        .collect())
}

pub fn build_obstruction_sets(m: u64, p: u64) -> Result<ObstructionSets> {
    let shape = checked_shape(m, p)?;
    let mut out = ObstructionSets {
        m,
        p,
        s_family: Vec::new(),
        s_zero: None,
        r_family: Vec::new(),
    };
    if shape.t >= 1 {
        let (family, zero) = s_obstruction_sets(m, p)?;
        out.s_family = family;
        out.s_zero = Some(zero);
    } else {
        out.r_family = r_obstruction_sets(m, p)?;
    }
    Ok(out)
}

fn first_missing(set: &[usize], support: &SupportSet) -> Option<usize> {
    set.iter().copied().find(|&j| !support.contains(j))
}

fn require_mirror_closed(support: &SupportSet) -> Result<()> {
    if support.is_mirror_closed() {
        Ok(())
    } else {
        Err(Error::refused(
            "support_not_mirror_closed",
            "obstruction-set deciders need a support closed under j -> m - j",
        ))
    }
}

/// `+/-1` pattern `sum_j (-1)^j e_{c + j m/p}` scaled by `sign`.
fn alternating(set: &[usize], sign: i64) -> impl Iterator<Item = (usize, BigInt)> + '_ {
    set.iter()
        .enumerate()
        .map(move |(i, &k)| (k, BigInt::from(if i % 2 == 0 { sign } else { -sign })))
}

/// Parity class of an S-set: `c mod 2`, except that `S_0 = {m/2}` belongs to
/// the class of `m/2`. When `m = 2 mod 4` the index `m/2` is odd and `S_0`
/// sits with the odd sets.
fn s_class(m: u64, c: usize) -> usize {
    if c == 0 {
        (m as usize / 2) % 2
    } else {
        c % 2
    }
}

fn s_family_with_zero(m: u64, p: u64) -> Result<Vec<IndexSet>> {
    let (mut family, zero) = s_obstruction_sets(m, p)?;
    family.insert(0, zero);
    Ok(family)
}

/// Relation `sum_j (-1)^j e_{k_j}` over an S-set, or `e_{m/2}` for `S_0`.
fn s_relation(set: &IndexSet, sign: i64) -> Vec<(usize, BigInt)> {
    alternating(&set.indices, sign).collect()
}

/// S-set decider on a mirror-closed support with `m = 2^t p^s`, `t, s >= 1`.
pub fn decide_s_support(support: &SupportSet) -> Result<PgstVerdict> {
    let m = support.m;
    let shape = factor_shape(m)
        .filter(|s| s.t >= 1)
        .ok_or_else(|| Error::refused("m_shape", format!("{m} is not 2^t p^s with t, s >= 1")))?;
    require_mirror_closed(support)?;
    let family = s_family_with_zero(m, shape.p)?;

    let mut contained: [Option<&IndexSet>; 2] = [None, None];
    let mut broken: [Vec<BrokenSet>; 2] = [Vec::new(), Vec::new()];
    for set in &family {
        let class = s_class(m, set.c);
        match first_missing(&set.indices, support) {
            Some(missing) => broken[class].push(BrokenSet {
                family: Family::S,
                c: set.c,
                missing,
            }),
            None => {
                contained[class].get_or_insert(set);
            }
        }
    }
    let (answer, certificate) = match contained {
        [Some(even), Some(odd)] => {
            let relation = RelationVector::new(s_relation(odd, 1).into_iter().chain(s_relation(even, -1)));
            (Answer::No, Certificate::Violator { relation })
        }
        [None, _] => (
            Answer::Yes,
            Certificate::ObstructionFree {
                broken: std::mem::take(&mut broken[0]),
            },
        ),
        [_, None] => (
            Answer::Yes,
            Certificate::ObstructionFree {
                broken: std::mem::take(&mut broken[1]),
            },
        ),
    };
    Ok(PgstVerdict {
        n: m as usize - 1,
        m,
        answer,
        method: Method::SSets,
        support: support.indices.clone(),
        certificate,
    })
}

/// R-set decider on a mirror-closed support with `m = p^s`.
pub fn decide_r_support(support: &SupportSet) -> Result<PgstVerdict> {
    let m = support.m;
    let shape = factor_shape(m)
        .filter(|s| s.t == 0)
        .ok_or_else(|| Error::refused("m_shape", format!("{m} is not an odd prime power")))?;
    require_mirror_closed(support)?;
    let family = r_obstruction_sets(m, shape.p)?;
    let step = (m / shape.p) as usize;

    let mut broken = Vec::new();
    let mut violator = None;
    for set in &family {
        match first_missing(&set.indices, support) {
            Some(missing) => broken.push(BrokenSet {
                family: Family::R,
                c: set.c,
                missing,
            }),
            None if violator.is_none() => {
                let c = set.c;
                let first = s_set(m, shape.p, c);
                let second: Vec<usize> = (0..shape.p as usize).map(|j| step - c + j * step).collect();
                violator = Some(RelationVector::new(
                    alternating(&first, 1).chain(alternating(&second, -1)),
                ));
            }
            None => {}
        }
    }
    let (answer, certificate) = match violator {
        Some(relation) => (Answer::No, Certificate::Violator { relation }),
        None => (Answer::Yes, Certificate::ObstructionFree { broken }),
    };
    Ok(PgstVerdict {
        n: m as usize - 1,
        m,
        answer,
        method: Method::RSets,
        support: support.indices.clone(),
        certificate,
    })
}

fn require_parity_state(v: &PureState) -> Result<()> {
    if v.is_parity_state() {
        Ok(())
    } else {
        Err(Error::refused(
            "not_parity_state",
            "obstruction-set deciders apply only to parity states",
        ))
    }
}

/// S-set decider for a parity state of `P_{m-1}`, `m = 2^t p^s`, `t, s >= 1`.
pub fn decide_pgst_parity_s(v: &PureState) -> Result<PgstVerdict> {
    let m = v.m();
    if !factor_shape(m).is_some_and(|s| s.t >= 1) {
        return Err(Error::refused(
            "m_shape",
            format!("{m} is not 2^t p^s with t, s >= 1"),
        ));
    }
    require_parity_state(v)?;
    decide_s_support(&exact_support(v)?)
}

/// R-set decider for a parity state of `P_{m-1}`, `m = p^s`.
pub fn decide_pgst_parity_r(v: &PureState) -> Result<PgstVerdict> {
    let m = v.m();
    if !factor_shape(m).is_some_and(|s| s.t == 0) {
        return Err(Error::refused(
            "m_shape",
            format!("{m} is not an odd prime power"),
        ));
    }
    require_parity_state(v)?;
    decide_r_support(&exact_support(v)?)
}

/// Which special decider (if any) applies to `v`.
pub fn special_method(v: &PureState) -> Option<Method> {
    if !v.is_exact() || !v.is_parity_state() {
        return None;
    }
    match factor_shape(v.m()) {
        Some(s) if s.t >= 1 => Some(Method::SSets),
        Some(_) => Some(Method::RSets),
        None => None,
    }
}

/// Result of [`decide_auto`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutoDecision {
    pub verdict: PgstVerdict,
    /// The general decider's verdict when it was run as a cross-check.
    pub general: Option<PgstVerdict>,
}

/// The applicable obstruction-set decider if there is one, else the general
/// decider. For `n <= cross_check_max_n` a special verdict is confirmed by the
/// general decider; disagreement is reported as [`Error::Inconsistent`].
pub fn decide_auto(v: &PureState, cross_check_max_n: usize) -> Result<AutoDecision> {
    let verdict = match special_method(v) {
        Some(Method::SSets) => decide_pgst_parity_s(v)?,
        Some(_) => decide_pgst_parity_r(v)?,
        None => {
            return Ok(AutoDecision {
                verdict: decide_pgst_general(v)?,
                general: None,
            })
        }
    };
    let general = if v.n() <= cross_check_max_n {
        let g = decide_pgst_general(v)?;
        if g.answer != verdict.answer {
            return Err(Error::Inconsistent(format!(
                "{:?} says {:?}, general lattice says {:?}",
                verdict.method, verdict.answer, g.answer
            )));
        }
        Some(g)
    } else {
        None
    };
    Ok(AutoDecision { verdict, general })
}

/// PGST between vertex `a` and `n + 1 - a` from the known characterization for
/// vertex states: `n = 2^t - 1`, or `n = 2^t p - 1` with `2^(t-1) | a`. The
/// centre vertex transfers to itself.
pub fn vertex_transfer_closed_form(n: usize, a: usize) -> bool {
    let m = n as u64 + 1;
    if 2 * a == n + 1 || m.is_power_of_two() {
        return true;
    }
    match factor_shape(m) {
        Some(Shape { t, s: 1, .. }) => t == 0 || a % (1usize << (t - 1)) == 0,
        _ => false,
    }
}

/// One member of the two-vertex family `|a> + alpha |b>` on `P_{2^t p - 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryInstance {
    pub p: u64,
    pub t: u32,
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub alpha: i64,
}

impl CorollaryInstance {
    pub fn state(&self) -> PureState {
        PureState::exact_integers(self.n, &[(self.a, 1), (self.b, self.alpha)])
            .expect("family members are valid states")
    }

    /// State literal in the CLI grammar.
    pub fn state_spec(&self) -> String {
        format!("{}:1,{}:{}", self.a, self.b, self.alpha)
    }
}

/// All `(a, b, alpha)` with `1 <= a < b <= n`, `alpha = +/-1` and
/// `a + alpha b = 0 mod 2^t`, on `n = 2^t p - 1`. Each is predicted to admit PGST.
pub fn corollary_family(p: u64, t: u32) -> Result<Vec<CorollaryInstance>> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::refused(
            "p_not_odd_prime",
            format!("{p} is not an odd prime"),
        ));
    }
    if !(2..=20).contains(&t) {
        return Err(Error::refused(
            "t_range",
            format!("t = {t} must satisfy 2 <= t <= 20"),
        ));
    }
    let modulus = 1i64 << t;
    let n = (modulus as u64 * p - 1) as usize;
    let mut out = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            for alpha in [1i64, -1] {
                if (a as i64 + alpha * b as i64).rem_euclid(modulus) == 0 {
                    out.push(CorollaryInstance { p, t, n, a, b, alpha });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub answer: Answer,
    pub certificate_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub outcomes: Vec<MethodOutcome>,
    /// Closed-form answer when `v` is a single vertex.
    pub vertex_closed_form: Option<Answer>,
    pub agree: bool,
}

/// Run every applicable decider on `v` and compare.
pub fn cross_validate(v: &PureState) -> Result<CrossValidation> {
    let mut verdicts = vec![decide_pgst_general(v)?];
    match special_method(v) {
        Some(Method::SSets) => verdicts.push(decide_pgst_parity_s(v)?),
        Some(Method::RSets) => verdicts.push(decide_pgst_parity_r(v)?),
        _ => {}
    }
    let outcomes: Vec<MethodOutcome> = verdicts
        .iter()
        .map(|d| MethodOutcome {
            method: d.method,
            answer: d.answer,
            certificate_ok: verify_certificate(d).is_ok(),
        })
        .collect();
    let vertex_closed_form = match v.vertex_support().as_slice() {
        [a] => Some(Answer::from_bool(vertex_transfer_closed_form(v.n(), *a))),
        _ => None,
    };
    let first = outcomes[0].answer;
    let agree = outcomes.iter().all(|o| o.answer == first && o.certificate_ok)
        && vertex_closed_form.is_none_or(|a| a == first);
    Ok(CrossValidation {
        outcomes,
        vertex_closed_form,
        agree,
    })
}

/// Global phase `delta` for which the transfer phases are consistent with
/// every eigenvalue relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseOffset {
    Zero,
    /// `delta = pi / 2^r`.
    PiOverPow2(u32),
    /// No `r <= r_max` works.
    BeyondCap,
}

/// `delta = 0` if it is consistent with every relation in `lattice`, else
/// `pi / 2^r` for the smallest consistent `r` in `0..=r_max`.
pub fn phase_offset_exponent(lattice: &RelationLattice, r_max: u32) -> PhaseOffset {
    if lattice.basis.iter().all(|v| !v.parity_is_odd()) {
        return PhaseOffset::Zero;
    }
    // delta = pi/2^r works iff sum(l) + 2^r * parity(l) = 0 mod 2^(r+1) for every generator.
    for r in 0..=r_max {
        let two_r = BigInt::one() << r;
        let modulus = &two_r << 1;
        if lattice
            .basis
            .iter()
            .all(|v| (v.sum() + &two_r * v.parity_sum()).mod_floor(&modulus).is_zero())
        {
            return PhaseOffset::PiOverPow2(r);
        }
    }
    PhaseOffset::BeyondCap
}

/// Integer dot product of two relation vectors over their common indices.
pub fn relation_dot(a: &RelationVector, b: &RelationVector) -> BigInt {
    let keys: Vec<usize> = a.entries().keys().copied().collect();
    dot(&to_dense(a, &keys), &to_dense(b, &keys))
}

/// Entries as `i64`, when they all fit.
pub fn relation_as_i64(v: &RelationVector) -> Option<BTreeMap<usize, i64>> {
    v.entries()
        .iter()
        .map(|(j, l)| l.to_i64().map(|l| (*j, l)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(n: usize, terms: &[(usize, i64)]) -> PureState {
        PureState::exact_integers(n, terms).unwrap()
    }

    #[test]
    fn relation_lattice_p11() {
        let lattice = relation_lattice(&SupportSet::full(12)).unwrap();
        assert_eq!(lattice.rank, 7);
        assert_eq!(lattice.span_dim, 4);
        for v in &lattice.basis {
            assert!(v.is_relation(12));
        }
        let example = RelationVector::from_i64(&[(1, 1), (5, -1), (9, 1)]);
        assert!(example.is_relation(12));
        for j in 1..6 {
            assert!(RelationVector::from_i64(&[(j, 1), (12 - j, 1)]).is_relation(12));
        }
        assert!(!RelationVector::from_i64(&[(1, 1), (2, 1)]).is_relation(12));
    }

    #[test]
    fn example_eleven() {
        let v = state(11, &[(1, 1), (3, 1)]);
        let verdict = decide_pgst_general(&v).unwrap();
        assert_eq!(verdict.answer, Answer::Yes);
        assert!(verify_certificate(&verdict).is_ok());

        for a in [1, 3] {
            let verdict = decide_pgst_general(&PureState::vertex(11, a).unwrap()).unwrap();
            assert_eq!(verdict.answer, Answer::No, "a={a}");
            verify_certificate(&verdict).unwrap();
        }
    }

    #[test]
    fn documented_violator_is_valid() {
        let v = RelationVector::from_i64(&[(2, 1), (6, -1), (10, 1), (1, -1), (5, 1), (9, -1)]);
        assert!(v.is_relation(12));
        assert!(v.sum().is_zero());
        assert!(v.parity_is_odd());
    }

    #[test]
    fn small_vertex_cases() {
        assert!(decide_pgst_general(&PureState::vertex(11, 2).unwrap())
            .unwrap()
            .answer
            .is_yes());
        assert!(decide_pgst_general(&PureState::vertex(3, 1).unwrap())
            .unwrap()
            .answer
            .is_yes());
        assert!(decide_pgst_general(&PureState::vertex(1, 1).unwrap())
            .unwrap()
            .answer
            .is_yes());
        assert!(!decide_pgst_general(&PureState::vertex(8, 1).unwrap())
            .unwrap()
            .answer
            .is_yes());
    }

    #[test]
    fn obstruction_sets() {
        let sets = build_obstruction_sets(12, 3).unwrap();
        let s: Vec<Vec<usize>> = sets.s_family.iter().map(|x| x.indices.clone()).collect();
        assert_eq!(s, vec![vec![1, 5, 9], vec![2, 6, 10], vec![3, 7, 11]]);
        assert_eq!(sets.s_zero.unwrap().indices, vec![6]);

        let sets = build_obstruction_sets(9, 3).unwrap();
        assert_eq!(sets.r_family.len(), 1);
        assert_eq!(sets.r_family[0].indices, vec![1, 2, 4, 5, 7, 8]);
        assert!(sets.s_family.is_empty());
        assert!(matches!(
            s_obstruction_sets(9, 3),
            Err(Error::Refused {
                reason: "m_shape",
                ..
            })
        ));
        assert!(r_obstruction_sets(3, 3).unwrap().is_empty());
        assert!(build_obstruction_sets(15, 3).is_err());
        assert!(build_obstruction_sets(12, 4).is_err());
    }

    #[test]
    fn s_decider_examples() {
        let no = decide_pgst_parity_s(&PureState::vertex(11, 1).unwrap()).unwrap();
        assert_eq!(no.answer, Answer::No);
        verify_certificate(&no).unwrap();
        for v in [PureState::vertex(11, 2).unwrap(), state(11, &[(1, 1), (3, 1)])] {
            let yes = decide_pgst_parity_s(&v).unwrap();
            assert_eq!(yes.answer, Answer::Yes);
            verify_certificate(&yes).unwrap();
        }
        assert!(matches!(
            decide_pgst_parity_s(&state(11, &[(1, 1), (2, 1)])),
            Err(Error::Refused {
                reason: "not_parity_state",
                ..
            })
        ));
        assert!(matches!(
            decide_pgst_parity_s(&PureState::vertex(8, 1).unwrap()),
            Err(Error::Refused {
                reason: "m_shape",
                ..
            })
        ));
    }

    #[test]
    fn r_decider_examples() {
        let no = decide_pgst_parity_r(&PureState::vertex(8, 1).unwrap()).unwrap();
        assert_eq!(no.answer, Answer::No);
        verify_certificate(&no).unwrap();
        let yes = decide_pgst_parity_r(&state(8, &[(1, 1), (5, -1), (7, 1)])).unwrap();
        assert_eq!(yes.answer, Answer::Yes);
        verify_certificate(&yes).unwrap();
        let trivial = decide_pgst_parity_r(&PureState::vertex(2, 1).unwrap()).unwrap();
        assert_eq!(trivial.answer, Answer::Yes);
        assert!(decide_pgst_parity_r(&PureState::vertex(11, 1).unwrap()).is_err());
    }

    #[test]
    fn corollary_family_members() {
        let fam = corollary_family(3, 2).unwrap();
        assert!(fam.iter().any(|i| (i.a, i.b, i.alpha) == (1, 3, 1)));
        assert!(fam.iter().any(|i| (i.a, i.b, i.alpha) == (1, 7, 1)));
        assert!(fam.iter().all(|i| i.a < i.b && i.n == 11));
        assert!(corollary_family(4, 2).is_err());
        assert!(corollary_family(3, 1).is_err());
    }

    #[test]
    fn cross_validation_examples() {
        for (n, a, expected) in [(11, 2, Answer::Yes), (8, 1, Answer::No), (6, 1, Answer::Yes)] {
            let report = cross_validate(&PureState::vertex(n, a).unwrap()).unwrap();
            assert!(report.agree, "n={n} a={a}: {report:?}");
            assert_eq!(report.outcomes.len(), 2);
            assert_eq!(report.outcomes[0].answer, expected);
        }
    }

    #[test]
    fn closed_form_vertex_oracle() {
        assert!(vertex_transfer_closed_form(11, 2));
        assert!(!vertex_transfer_closed_form(11, 1));
        assert!(vertex_transfer_closed_form(5, 1)); // 2p - 1
        assert!(vertex_transfer_closed_form(6, 1)); // p - 1
        assert!(vertex_transfer_closed_form(7, 3)); // 2^t - 1
        assert!(!vertex_transfer_closed_form(8, 1)); // m = 9
        assert!(vertex_transfer_closed_form(17, 9)); // centre of P_17
    }

    #[test]
    fn phase_offsets() {
        let l = relation_lattice(&SupportSet::full(3)).unwrap();
        assert_eq!(phase_offset_exponent(&l, 8), PhaseOffset::PiOverPow2(1));
        let l = relation_lattice(&SupportSet::full(4)).unwrap();
        assert_eq!(phase_offset_exponent(&l, 8), PhaseOffset::PiOverPow2(0));
        let s = eigenvalue_support_exact(&state(11, &[(1, 1), (3, 1)])).unwrap();
        let l = relation_lattice(&s).unwrap();
        assert_ne!(phase_offset_exponent(&l, 8), PhaseOffset::BeyondCap);
    }

    #[test]
    fn certificate_json_round_trip() {
        let verdict = decide_pgst_general(&PureState::vertex(11, 1).unwrap()).unwrap();
        let text = serde_json::to_string(&verdict).unwrap();
        let back: PgstVerdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, verdict);
        assert!(text.contains("\"entries\":{"));
        let tampered = text.replacen("\"sum\":0", "\"sum\":2", 1);
        assert_ne!(tampered, text);
        assert!(serde_json::from_str::<PgstVerdict>(&tampered).is_err());
    }
}
