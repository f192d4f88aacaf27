//! Exact arithmetic in cyclotomic fields `Q(zeta_N)`.
//!
//! Elements are kept in the power basis `1, z, ..., z^(phi(N)-1)` with
//! `z = zeta_N`, reduced modulo the cyclotomic polynomial `Phi_N`. Since
//! `Phi_N` is the minimal polynomial of `zeta_N`, the reduced form is unique
//! and an element is zero exactly when every coordinate is zero.
//!
//! Coordinates share one positive denominator; numerators and denominator are
//! kept coprime after every operation.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Polynomial with arbitrary-precision integer coefficients, lowest degree first.
///
/// The coefficient vector never has trailing zeros; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// `x^degree - 1`
    pub fn x_pow_minus_one(degree: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        coeffs[0] = BigInt::from(-1);
        coeffs[degree] += 1;
        Self::new(coeffs)
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Quotient and remainder by a monic divisor.
    pub fn div_rem_monic(&self, divisor: &Self) -> (Self, Self) {
        assert!(divisor.is_monic(), "divisor must be monic");
        let d = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= d {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); rem.len() - d];
        for k in (d..rem.len()).rev() {
            let c = std::mem::take(&mut rem[k]);
            if c.is_zero() {
                continue;
            }
            for (i, p) in divisor.coeffs[..d].iter().enumerate() {
                if !p.is_zero() {
                    rem[k - d + i] -= &c * p;
                }
            }
            quot[k - d] = c;
        }
        rem.truncate(d);
        (Self::new(quot), Self::new(rem))
    }

    /// Exact quotient by a monic divisor, or `None` if the division leaves a remainder.
    pub fn div_exact_monic(&self, divisor: &Self) -> Option<Self> {
        let (q, r) = self.div_rem_monic(divisor);
        r.is_zero().then_some(q)
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(BigInt, usize)> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c.clone(), k))
            .collect();
        write_terms(f, &terms, None, "x")
    }
}

fn write_terms(
    f: &mut fmt::Formatter<'_>,
    terms: &[(BigInt, usize)],
    den: Option<&BigInt>,
    var: &str,
) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (idx, (c, k)) in terms.iter().enumerate() {
        let negative = c.is_negative();
        let mag = c.abs();
        if idx == 0 {
            if negative {
                write!(f, "-")?;
            }
        } else if negative {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let den = den.filter(|d| !d.is_one());
        let coeff = match den {
            Some(d) => format!("{mag}/{d}"),
            None => mag.to_string(),
        };
        match (*k, coeff.as_str()) {
            (0, _) => write!(f, "{coeff}")?,
            (1, "1") => write!(f, "{var}")?,
            (1, _) => write!(f, "{coeff}*{var}")?,
            (_, "1") => write!(f, "{var}^{k}")?,
            _ => write!(f, "{coeff}*{var}^{k}")?,
        }
    }
    Ok(())
}

fn phi_cache() -> &'static Mutex<HashMap<u64, Arc<IntPolynomial>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<IntPolynomial>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Euler's totient.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The `N`-th cyclotomic polynomial `Phi_N`.
///
/// Obtained by dividing `x^N - 1` by `Phi_d` for every proper divisor `d`
/// of `N`; results are memoized process-wide.
///
/// # Panics
/// If `n == 0`.
pub fn cyclotomic_polynomial(n: u64) -> Arc<IntPolynomial> {
    assert!(n >= 1, "cyclotomic index must be positive");
    if let Some(hit) = phi_cache().lock().unwrap().get(&n) {
        return Arc::clone(hit);
    }
    let mut poly = IntPolynomial::x_pow_minus_one(n as usize);
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let phi_d = cyclotomic_polynomial(d);
        poly = poly
            .div_exact_monic(&phi_d)
            .expect("Phi_d divides x^N - 1 for d | N");
    }
    let poly = Arc::new(poly);
    phi_cache()
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&poly))
        .clone()
}

/// An element of `Q(zeta_N)` in reduced power-basis form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloElement {
    modulus: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycloElement {
    pub fn zero(modulus: u64) -> Self {
        let dim = euler_phi(modulus) as usize;
        Self {
            modulus,
            num: vec![BigInt::zero(); dim],
            den: BigInt::one(),
        }
    }

    pub fn one(modulus: u64) -> Self {
        Self::rational(modulus, BigInt::one(), BigInt::one())
    }

    /// The rational number `num/den` embedded in `Q(zeta_N)`.
    ///
    /// # Panics
    /// If `den` is zero.
    pub fn rational(modulus: u64, num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut out = Self::zero(modulus);
        out.num[0] = num;
        out.den = den;
        out.normalize();
        out
    }

    pub fn integer(modulus: u64, value: i64) -> Self {
        Self::rational(modulus, BigInt::from(value), BigInt::one())
    }

    /// `zeta_N^k`, with `k` taken modulo `N`.
    pub fn root_power(modulus: u64, k: i64) -> Self {
        Self::from_exponents(modulus, [(k, BigInt::one())])
    }

    /// `sum c * zeta_N^k` over the given `(k, c)` pairs; exponents may be negative.
    pub fn from_exponents<I>(modulus: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, BigInt)>,
    {
        let n = modulus as i64;
        let mut folded = vec![BigInt::zero(); modulus as usize];
        for (k, c) in terms {
            folded[k.rem_euclid(n) as usize] += c;
        }
        Self::from_poly(modulus, IntPolynomial::new(folded), BigInt::one())
    }

    /// Reduce `poly(zeta_N) / den`.
    pub fn from_poly(modulus: u64, poly: IntPolynomial, den: BigInt) -> Self {
        let n = modulus as usize;
        let mut coeffs = poly.coeffs;
        if coeffs.len() > n {
            let (head, tail) = coeffs.split_at_mut(n);
            for (k, c) in tail.iter_mut().enumerate() {
                head[k % n] += std::mem::take(c);
            }
            coeffs.truncate(n);
        }
        let phi = cyclotomic_polynomial(modulus);
        let (_, rem) = IntPolynomial::new(coeffs).div_rem_monic(&phi);
        let dim = phi.coeffs.len() - 1;
        let mut num = rem.coeffs;
        num.resize(dim, BigInt::zero());
        let mut out = Self { modulus, num, den };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        if self.num.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
            return;
        }
        let mut g = self.den.abs();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if self.den.is_negative() {
            g = -g;
        }
        if !g.is_one() {
            for c in &mut self.num {
                *c /= &g;
            }
            self.den /= &g;
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Common denominator of the coordinates (always positive).
    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Numerators of the power-basis coordinates over [`Self::denominator`].
    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    /// Power-basis coordinates as `(numerator, denominator)` pairs in lowest terms.
    pub fn coords(&self) -> Vec<(BigInt, BigInt)> {
        self.num
            .iter()
            .map(|c| {
                let g = c.gcd(&self.den);
                if g.is_zero() {
                    (BigInt::zero(), BigInt::one())
                } else {
                    (c / &g, &self.den / &g)
                }
            })
            .collect()
    }

    /// Exact zero test: the reduced form is unique, so zero means all coordinates vanish.
    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    /// True when the element lies in `Q`.
    pub fn is_rational(&self) -> bool {
        self.num.iter().skip(1).all(Zero::is_zero)
    }

    /// Image under `zeta -> zeta^-1` (complex conjugation under the principal embedding).
    pub fn conjugate(&self) -> Self {
        let n = self.modulus as i64;
        let out = Self::from_exponents(
            self.modulus,
            self.num
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| ((n - k as i64).rem_euclid(n), c.clone())),
        );
        out.scaled_down(&self.den)
    }

    /// True when the element is fixed by conjugation, i.e. real.
    pub fn is_real(&self) -> bool {
        *self == self.conjugate()
    }

    fn scaled_down(mut self, den: &BigInt) -> Self {
        self.den *= den;
        self.normalize();
        self
    }

    /// Multiply by the rational `num/den`.
    pub fn scale(&self, num: &BigInt, den: &BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut out = Self {
            modulus: self.modulus,
            num: self.num.iter().map(|c| c * num).collect(),
            den: &self.den * den,
        };
        out.normalize();
        out
    }

    /// Re-express this element in the larger field `Q(zeta_M)`, `N | M`.
    pub fn embed(&self, modulus: u64) -> Result<Self> {
        if modulus % self.modulus != 0 {
            return Err(Error::FieldMismatch {
                needed: self.modulus,
                got: modulus,
            });
        }
        let stride = (modulus / self.modulus) as i64;
        let out = Self::from_exponents(
            modulus,
            self.num
                .iter()
                .enumerate()
                .map(|(k, c)| (k as i64 * stride, c.clone())),
        );
        Ok(out.scaled_down(&self.den))
    }

    fn check_modulus(&self, other: &Self) -> Result<()> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(Error::ModulusMismatch {
                left: self.modulus,
                right: other.modulus,
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_modulus(other)?;
        let mut out = Self {
            modulus: self.modulus,
            num: self
                .num
                .iter()
                .zip(&other.num)
                .map(|(a, b)| a * &other.den + b * &self.den)
                .collect(),
            den: &self.den * &other.den,
        };
        out.normalize();
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_modulus(other)?;
        if self.is_rational() {
            return Ok(other.scale(&self.num[0], &self.den));
        }
        if other.is_rational() {
            return Ok(self.scale(&other.num[0], &other.den));
        }
        let product = IntPolynomial::new(self.num.clone()).mul(&IntPolynomial::new(other.num.clone()));
        Ok(Self::from_poly(self.modulus, product, &self.den * &other.den))
    }

    /// Value under the principal embedding `zeta_N -> exp(2 pi i / N)`.
    pub fn numeric_value(&self) -> Complex64 {
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        let n = self.modulus as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n;
            acc += Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), angle);
        }
        acc / den
    }
}

impl Neg for &CycloElement {
    type Output = CycloElement;
    fn neg(self) -> CycloElement {
        CycloElement {
            modulus: self.modulus,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycloElement {
    type Output = CycloElement;
    fn neg(self) -> CycloElement {
        -&self
    }
}

// Operator forms panic on modulus mismatch; use the `try_*` methods when the
// moduli are not known to agree.
impl Add for &CycloElement {
    type Output = CycloElement;
    fn add(self, rhs: &CycloElement) -> CycloElement {
        self.try_add(rhs).expect("cyclotomic modulus mismatch")
    }
}

impl Sub for &CycloElement {
    type Output = CycloElement;
    fn sub(self, rhs: &CycloElement) -> CycloElement {
        self.try_sub(rhs).expect("cyclotomic modulus mismatch")
    }
}

impl Mul for &CycloElement {
    type Output = CycloElement;
    fn mul(self, rhs: &CycloElement) -> CycloElement {
        self.try_mul(rhs).expect("cyclotomic modulus mismatch")
    }
}

impl fmt::Display for CycloElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(BigInt, usize)> = self
            .num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c.clone(), k))
            .collect();
        write_terms(f, &terms, Some(&self.den), "z")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords_i64(e: &CycloElement) -> Vec<i64> {
        assert!(e.denominator().is_one());
        e.numerators().iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_polynomial(1), IntPolynomial::from_i64(&[-1, 1]));
        assert_eq!(*cyclotomic_polynomial(2), IntPolynomial::from_i64(&[1, 1]));
        assert_eq!(
            *cyclotomic_polynomial(24),
            IntPolynomial::from_i64(&[1, 0, 0, 0, -1, 0, 0, 0, 1])
        );
        assert_eq!(
            *cyclotomic_polynomial(18),
            IntPolynomial::from_i64(&[1, 0, 0, -1, 0, 0, 1])
        );
        assert_eq!(
            *cyclotomic_polynomial(12),
            IntPolynomial::from_i64(&[1, 0, -1, 0, 1])
        );
        assert_eq!(cyclotomic_polynomial(24).to_string(), "x^8 - x^4 + 1");
    }

    #[test]
    fn phi_105_has_a_coefficient_of_minus_two() {
        let phi = cyclotomic_polynomial(105);
        assert_eq!(phi.degree(), Some(48));
        assert!(phi.coefficients().iter().any(|c| *c == BigInt::from(-2)));
    }

    #[test]
    fn root_powers() {
        assert_eq!(coords_i64(&CycloElement::root_power(4, 2)), vec![-1, 0]);
        assert_eq!(coords_i64(&CycloElement::root_power(6, 1)), vec![0, 1]);
        assert_eq!(
            coords_i64(&CycloElement::root_power(24, 8)),
            vec![-1, 0, 0, 0, 1, 0, 0, 0]
        );
        assert_eq!(CycloElement::root_power(24, 8).to_string(), "-1 + z^4");
        assert_eq!(CycloElement::root_power(24, -1), CycloElement::root_power(24, 23));
    }

    #[test]
    fn products_reduce() {
        let z = CycloElement::root_power(24, 1);
        let z23 = CycloElement::root_power(24, 23);
        assert_eq!(&z * &z23, CycloElement::one(24));

        let z3 = CycloElement::root_power(18, 3);
        assert_eq!(coords_i64(&(&z3 * &z3)), vec![-1, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn additive_identities() {
        let a = CycloElement::from_exponents(24, [(1, BigInt::from(3)), (5, BigInt::from(-2))]);
        assert_eq!(&a + &CycloElement::zero(24), a);
        assert!((&a + &-&a).is_zero());
        assert_eq!(&a * &CycloElement::one(24), a);
    }

    #[test]
    fn two_cos_pi_over_twelve() {
        let e = &CycloElement::root_power(24, 1) + &CycloElement::root_power(24, 23);
        let v = e.numeric_value();
        assert!((v.re - 1.931_851_652_578_136_6).abs() < 1e-12);
        assert!(v.im.abs() < 1e-12);
        assert!(e.is_real());
        assert!(!CycloElement::root_power(24, 1).is_real());
    }

    #[test]
    fn minimal_polynomial_vanishes() {
        let e = CycloElement::from_exponents(
            24,
            [(8, BigInt::one()), (4, BigInt::from(-1)), (0, BigInt::one())],
        );
        assert!(e.is_zero());
        assert!(CycloElement::zero(24).is_zero());
    }

    #[test]
    fn alternating_theta_sum_on_p11() {
        // theta_1 - theta_5 + theta_9 on P_11, all in Q(zeta_24)
        let terms = (0..3).flat_map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let k = 1 + 4 * j;
            [(k, BigInt::from(sign)), (-k, BigInt::from(sign))]
        });
        let numeric: f64 = (0..3)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * 2.0 * ((1 + 4 * j) as f64 * std::f64::consts::PI / 12.0).cos()
            })
            .sum();
        assert!(numeric.abs() < 1e-12);
        assert!(CycloElement::from_exponents(24, terms).is_zero());
    }

    #[test]
    fn modulus_mismatch_is_an_error() {
        let a = CycloElement::one(12);
        let b = CycloElement::one(24);
        assert_eq!(a.try_add(&b), Err(Error::ModulusMismatch { left: 12, right: 24 }));
        assert!(a.try_mul(&b).is_err());
    }

    #[test]
    fn rationals_normalize() {
        let half = CycloElement::rational(10, BigInt::from(2), BigInt::from(-4));
        assert_eq!(half.denominator(), &BigInt::from(2));
        assert_eq!(half.numerators()[0], BigInt::from(-1));
        assert_eq!(half.to_string(), "-1/2");
        let sum = &half + &half;
        assert_eq!(sum, CycloElement::integer(10, -1));
    }

    #[test]
    fn embedding_preserves_value() {
        let e = CycloElement::from_exponents(9, [(1, BigInt::from(2)), (4, BigInt::from(-1))]);
        let big = e.embed(36).unwrap();
        assert!((e.numeric_value() - big.numeric_value()).norm() < 1e-12);
        assert!(e.embed(20).is_err());
    }
}
