//! Single-excitation states on `P_n` and their eigenvalue supports.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cyclo::CycloElement;
use crate::error::{Error, Result};
use crate::spectrum::{idempotent_apply, projection_coefficient, sin_exact_in};

/// Default relative tolerance for numeric zero tests.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Amplitudes {
    Numeric(Vec<Complex64>),
    /// Real elements of a common cyclotomic field `Q(zeta_N)` with `2(n+1) | N`.
    Exact(Vec<CycloElement>),
}

/// A pure state `sum_x beta_x |x>` on `P_n`, stored unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Amplitudes,
}

impl PureState {
    pub fn numeric(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("path must have at least one vertex".into()));
        }
        if amplitudes.iter().all(|a| a.norm() == 0.0) {
            return Err(Error::InvalidState("all amplitudes are zero".into()));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self {
            n: amplitudes.len(),
            amplitudes: Amplitudes::Numeric(amplitudes),
        })
    }

    pub fn numeric_real(amplitudes: &[f64]) -> Result<Self> {
        Self::numeric(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Exact state; every amplitude must be real and share one field that contains
    /// `zeta_{2(n+1)}`.
    pub fn exact(amplitudes: Vec<CycloElement>) -> Result<Self> {
        let n = amplitudes.len();
        if n == 0 {
            return Err(Error::InvalidState("path must have at least one vertex".into()));
        }
        let modulus = amplitudes[0].modulus();
        let needed = 2 * (n as u64 + 1);
        if let Some(bad) = amplitudes.iter().find(|a| a.modulus() != modulus) {
            return Err(Error::ModulusMismatch {
                left: modulus,
                right: bad.modulus(),
            });
        }
        if modulus % needed != 0 {
            return Err(Error::FieldMismatch { needed, got: modulus });
        }
        if amplitudes.iter().all(CycloElement::is_zero) {
            return Err(Error::InvalidState("all amplitudes are zero".into()));
        }
        if let Some(x) = amplitudes.iter().position(|a| !a.is_real()) {
            return Err(Error::InvalidState(format!(
                "amplitude at vertex {} is not real",
                x + 1
            )));
        }
        Ok(Self {
            n,
            amplitudes: Amplitudes::Exact(amplitudes),
        })
    }

    /// Exact state with integer amplitudes given as `(vertex, value)` pairs.
    pub fn exact_integers(n: usize, terms: &[(usize, i64)]) -> Result<Self> {
        let modulus = 2 * (n as u64 + 1);
        let mut amps = vec![CycloElement::zero(modulus); n];
        for &(x, c) in terms {
            if !(1..=n).contains(&x) {
                return Err(Error::IndexOutOfRange { index: x, max: n });
            }
            amps[x - 1] = &amps[x - 1] + &CycloElement::integer(modulus, c);
        }
        Self::exact(amps)
    }

    /// The vertex state `|a>`.
    pub fn vertex(n: usize, a: usize) -> Result<Self> {
        Self::exact_integers(n, &[(a, 1)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `n + 1`
    pub fn m(&self) -> u64 {
        self.n as u64 + 1
    }

    pub fn amplitudes(&self) -> &Amplitudes {
        &self.amplitudes
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.amplitudes, Amplitudes::Exact(_))
    }

    /// Field modulus of an exact state.
    pub fn exact_modulus(&self) -> Option<u64> {
        match &self.amplitudes {
            Amplitudes::Exact(a) => Some(a[0].modulus()),
            Amplitudes::Numeric(_) => None,
        }
    }

    /// Amplitudes as doubles (exact ones through the principal embedding).
    pub fn to_complex(&self) -> Vec<Complex64> {
        match &self.amplitudes {
            Amplitudes::Numeric(a) => a.clone(),
            Amplitudes::Exact(a) => a.iter().map(CycloElement::numeric_value).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.to_complex().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unit-norm amplitudes.
    pub fn normalized(&self) -> Vec<Complex64> {
        let norm = self.norm();
        self.to_complex().into_iter().map(|a| a / norm).collect()
    }

    /// Indices of vertices with nonzero amplitude.
    pub fn vertex_support(&self) -> Vec<usize> {
        match &self.amplitudes {
            Amplitudes::Numeric(a) => (1..=self.n).filter(|&x| a[x - 1].norm() != 0.0).collect(),
            Amplitudes::Exact(a) => (1..=self.n).filter(|&x| !a[x - 1].is_zero()).collect(),
        }
    }

    /// The mirror state `beta_x -> beta_{n+1-x}`.
    pub fn mirror(&self) -> Self {
        let amplitudes = match &self.amplitudes {
            Amplitudes::Numeric(a) => Amplitudes::Numeric(a.iter().rev().cloned().collect()),
            Amplitudes::Exact(a) => Amplitudes::Exact(a.iter().rev().cloned().collect()),
        };
        Self {
            n: self.n,
            amplitudes,
        }
    }

    /// True when every even vertex or every odd vertex has zero amplitude.
    pub fn is_parity_state(&self) -> bool {
        let support = self.vertex_support();
        support.iter().all(|x| x % 2 == 0) || support.iter().all(|x| x % 2 == 1)
    }

    /// Multiply every amplitude by a nonzero rational.
    pub fn scaled(&self, num: i64, den: i64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument("scale must be a nonzero rational".into()));
        }
        let amplitudes = match &self.amplitudes {
            Amplitudes::Numeric(a) => {
                let c = num as f64 / den as f64;
                Amplitudes::Numeric(a.iter().map(|x| x * c).collect())
            }
            Amplitudes::Exact(a) => {
                Amplitudes::Exact(a.iter().map(|x| x.scale(&num.into(), &den.into())).collect())
            }
        };
        Ok(Self {
            n: self.n,
            amplitudes,
        })
    }
}

/// Eigenvalue support as a sorted set of indices `j` into `theta_1 > ... > theta_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportSet {
    pub m: u64,
    pub indices: Vec<usize>,
}

impl SupportSet {
    pub fn new(m: u64, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&j| j == 0 || j as u64 >= m) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                max: m as usize - 1,
            });
        }
        Ok(Self {
            m,
            indices: set.into_iter().collect(),
        })
    }

    /// `{1, ..., m-1}`
    pub fn full(m: u64) -> Self {
        Self {
            m,
            indices: (1..m as usize).collect(),
        }
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Indices in `1..m` not in the support.
    pub fn complement(&self) -> Vec<usize> {
        (1..self.m as usize).filter(|&j| !self.contains(j)).collect()
    }

    /// True when `j` in support implies `m - j` in support.
    pub fn is_mirror_closed(&self) -> bool {
        self.indices.iter().all(|&j| self.contains(self.m as usize - j))
    }
}

/// Exact eigenvalue support: `j` is excluded iff `sum_y beta_y sin(y j pi/m)` vanishes
/// in the amplitude field.
pub fn eigenvalue_support_exact(v: &PureState) -> Result<SupportSet> {
    let Amplitudes::Exact(amps) = &v.amplitudes else {
        return Err(Error::refused(
            "not_exact",
            "exact support requires exact amplitudes",
        ));
    };
    let m = v.m();
    let modulus = amps[0].modulus();
    if modulus % (2 * m) != 0 {
        return Err(Error::FieldMismatch {
            needed: 2 * m,
            got: modulus,
        });
    }
    let nonzero: Vec<(usize, &CycloElement)> = amps
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(i, a)| (i + 1, a))
        .collect();
    let indices = (1..=v.n)
        .filter(|&j| {
            let mut acc = CycloElement::zero(modulus);
            for &(y, beta) in &nonzero {
                let s = sin_exact_in(modulus, m, (y * j) as i64);
                acc = &acc + &(beta * &s);
            }
            !acc.is_zero()
        })
        .collect();
    Ok(SupportSet { m, indices })
}

/// Numeric eigenvalue support with relative tolerance `tol * ||beta||`.
pub fn eigenvalue_support_numeric(v: &PureState, tol: f64) -> Result<SupportSet> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let amps = v.to_complex();
    let norm = v.norm();
    let indices = (1..=v.n)
        .filter(|&j| projection_coefficient(j, &amps).norm() >= tol * norm)
        .collect();
    Ok(SupportSet { m: v.m(), indices })
}

/// Support computed exactly when possible, numerically otherwise.
pub fn eigenvalue_support(v: &PureState) -> Result<SupportSet> {
    if v.is_exact() {
        eigenvalue_support_exact(v)
    } else {
        eigenvalue_support_numeric(v, DEFAULT_TOLERANCE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ProjectionMatch {
    /// `E_j v = E_j w = 0`
    BothZero,
    /// `E_j v = gamma E_j w` with `|gamma| = 1`.
    Matched { gamma_re: f64, gamma_im: f64 },
    /// Different projection weights, or projections not parallel.
    Unmatched,
}

impl ProjectionMatch {
    pub fn gamma(&self) -> Option<Complex64> {
        match *self {
            ProjectionMatch::Matched { gamma_re, gamma_im } => Some(Complex64::new(gamma_re, gamma_im)),
            _ => None,
        }
    }

    /// `+1` or `-1` when gamma is real to within `tol`.
    pub fn sign(&self, tol: f64) -> Option<i32> {
        let g = self.gamma()?;
        if g.im.abs() > tol {
            None
        } else if (g.re - 1.0).abs() <= tol {
            Some(1)
        } else if (g.re + 1.0).abs() <= tol {
            Some(-1)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRecord {
    pub j: usize,
    pub classification: ProjectionMatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CospectralityCertificate {
    pub records: Vec<ProjectionRecord>,
    pub cospectral: bool,
    pub parallel: bool,
    pub strongly_cospectral: bool,
}

fn check_same_path(v: &PureState, w: &PureState) -> Result<()> {
    if v.n == w.n {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: v.n,
            got: w.n,
        })
    }
}

/// `<v|E_j|v>` for unit-normalized `v`, `j = 1..=n`.
fn projection_weights(v: &PureState) -> Vec<f64> {
    let amps = v.normalized();
    let m = v.m() as f64;
    (1..=v.n)
        .map(|j| 2.0 / m * projection_coefficient(j, &amps).norm_sqr())
        .collect()
}

fn projections_parallel(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if na < tol || nb < tol {
        return true;
    }
    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (inner.norm_sqr() - na * nb).abs() <= tol * na * nb
}

/// Cospectral: `<v|E_j|v> = <w|E_j|w>` for all `j` (unit-normalized states).
pub fn check_cospectral(v: &PureState, w: &PureState, tol: f64) -> Result<bool> {
    check_same_path(v, w)?;
    let (pv, pw) = (projection_weights(v), projection_weights(w));
    Ok(pv.iter().zip(&pw).all(|(a, b)| (a - b).abs() < tol))
}

/// Parallel: `E_j v` and `E_j w` linearly dependent for all `j`.
pub fn check_parallel(v: &PureState, w: &PureState, tol: f64) -> Result<bool> {
    check_same_path(v, w)?;
    let (av, aw) = (v.normalized(), w.normalized());
    for j in 1..=v.n {
        let ev = idempotent_apply(v.n, j, &av)?;
        let ew = idempotent_apply(w.n, j, &aw)?;
        if !projections_parallel(&ev, &ew, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-eigenvalue strong cospectrality certificate with the phases `gamma_j`.
pub fn check_strong_cospectral(v: &PureState, w: &PureState, tol: f64) -> Result<CospectralityCertificate> {
    check_same_path(v, w)?;
    let (av, aw) = (v.normalized(), w.normalized());
    let (pv, pw) = (projection_weights(v), projection_weights(w));
    let mut records = Vec::with_capacity(v.n);
    let mut all_parallel = true;
    for j in 1..=v.n {
        let ev = idempotent_apply(v.n, j, &av)?;
        let ew = idempotent_apply(w.n, j, &aw)?;
        let parallel = projections_parallel(&ev, &ew, tol);
        all_parallel &= parallel;
        let equal = (pv[j - 1] - pw[j - 1]).abs() < tol;
        let classification = if pv[j - 1] < tol && pw[j - 1] < tol {
            ProjectionMatch::BothZero
        } else if equal && parallel {
            let gamma = projection_coefficient(j, &av) / projection_coefficient(j, &aw);
            let gamma = gamma / gamma.norm();
            ProjectionMatch::Matched {
                gamma_re: gamma.re,
                gamma_im: gamma.im,
            }
        } else {
            ProjectionMatch::Unmatched
        };
        records.push(ProjectionRecord { j, classification });
    }
    let cospectral = pv.iter().zip(&pw).all(|(a, b)| (a - b).abs() < tol);
    let strongly_cospectral = records
        .iter()
        .all(|r| r.classification != ProjectionMatch::Unmatched);
    Ok(CospectralityCertificate {
        records,
        cospectral,
        parallel: all_parallel,
        strongly_cospectral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn mirror_examples() {
        let v = PureState::exact_integers(11, &[(1, 1), (3, 1)]).unwrap();
        assert_eq!(
            v.mirror(),
            PureState::exact_integers(11, &[(11, 1), (9, 1)]).unwrap()
        );
        assert_eq!(v.mirror().mirror(), v);
        let center = PureState::vertex(7, 4).unwrap();
        assert_eq!(center.mirror(), center);
        assert_eq!(
            PureState::vertex(11, 1).unwrap().mirror(),
            PureState::vertex(11, 11).unwrap()
        );
    }

    #[test]
    fn parity_states() {
        assert!(PureState::exact_integers(11, &[(1, 1), (3, 1)])
            .unwrap()
            .is_parity_state());
        assert!(!PureState::exact_integers(11, &[(1, 1), (2, 1)])
            .unwrap()
            .is_parity_state());
        for k in 1..=6 {
            assert!(PureState::vertex(6, k).unwrap().is_parity_state());
        }
    }

    #[test]
    fn example_support_excludes_six() {
        let v = PureState::exact_integers(11, &[(1, 1), (3, 1)]).unwrap();
        let s = eigenvalue_support_exact(&v).unwrap();
        assert_eq!(s.complement(), vec![6]);
        assert_eq!(eigenvalue_support_numeric(&v, 1e-9).unwrap(), s);

        let two = PureState::vertex(11, 2).unwrap();
        assert_eq!(eigenvalue_support_exact(&two).unwrap().complement(), vec![6]);
    }

    #[test]
    fn p8_sine_identity_state() {
        let v = PureState::exact_integers(8, &[(1, 1), (5, -1), (7, 1)]).unwrap();
        let s = eigenvalue_support_exact(&v).unwrap();
        assert_eq!(s.indices, vec![3, 6]);
        assert_eq!(eigenvalue_support_numeric(&v, 1e-9).unwrap(), s);
    }

    #[test]
    fn end_vertex_has_full_support() {
        for n in 1..30 {
            let s = eigenvalue_support_exact(&PureState::vertex(n, 1).unwrap()).unwrap();
            assert_eq!(s, SupportSet::full(n as u64 + 1));
        }
    }

    #[test]
    fn mismatched_field_rejected() {
        let amps = vec![CycloElement::one(10), CycloElement::zero(10)];
        assert_eq!(
            PureState::exact(amps),
            Err(Error::FieldMismatch { needed: 6, got: 10 })
        );
        let complex = vec![CycloElement::root_power(6, 1), CycloElement::zero(6)];
        assert!(matches!(PureState::exact(complex), Err(Error::InvalidState(_))));
    }

    #[test]
    fn numeric_states_refuse_exact_support() {
        let v = PureState::numeric_real(&[1.0, 0.0, 0.5]).unwrap();
        assert!(matches!(
            eigenvalue_support_exact(&v),
            Err(Error::Refused {
                reason: "not_exact",
                ..
            })
        ));
    }

    #[test]
    fn sine_amplitudes_in_a_larger_field() {
        // beta = (sin(pi/3), 0) on P_2 lives in Q(zeta_12) = Q(zeta_{4m}).
        let s = &CycloElement::from_exponents(12, [(1, BigInt::from(1)), (-1, BigInt::from(1))])
            .scale(&BigInt::from(1), &BigInt::from(2));
        // cos(pi/6) = sin(pi/3)
        let v = PureState::exact(vec![s.clone(), CycloElement::zero(12)]).unwrap();
        assert_eq!(eigenvalue_support_exact(&v).unwrap().indices, vec![1, 2]);
    }

    #[test]
    fn cospectrality_examples() {
        let v = PureState::exact_integers(9, &[(2, 3), (5, -1), (6, 2)]).unwrap();
        let cert = check_strong_cospectral(&v, &v.mirror(), 1e-9).unwrap();
        assert!(cert.strongly_cospectral && cert.cospectral && cert.parallel);
        for r in &cert.records {
            match r.classification {
                ProjectionMatch::Matched { .. } => {
                    let expected = if r.j % 2 == 1 { 1 } else { -1 };
                    assert_eq!(r.classification.sign(1e-9), Some(expected), "j={}", r.j);
                }
                ProjectionMatch::BothZero => {}
                ProjectionMatch::Unmatched => panic!("unmatched j={}", r.j),
            }
        }

        let self_cert = check_strong_cospectral(&v, &v, 1e-9).unwrap();
        assert!(
            self_cert
                .records
                .iter()
                .all(|r| r.classification == ProjectionMatch::BothZero
                    || r.classification.sign(1e-9) == Some(1))
        );

        let a = PureState::vertex(3, 1).unwrap();
        let b = PureState::vertex(3, 2).unwrap();
        assert!(!check_cospectral(&a, &b, 1e-9).unwrap());
        assert!(!check_strong_cospectral(&a, &b, 1e-9).unwrap().strongly_cospectral);
        assert!(check_cospectral(&a, &PureState::vertex(4, 1).unwrap(), 1e-9).is_err());
    }
}
