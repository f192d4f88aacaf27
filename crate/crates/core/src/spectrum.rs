//! Closed-form spectrum and spectral idempotents of the path `P_n`.
//!
//! With `m = n + 1` the eigenvalues are `theta_j = 2 cos(j pi / m)` for
//! `1 <= j <= n`, each simple, with eigenvector entries `sin(k j pi / m)`.
//! Every idempotent is rank one, so projections are evaluated in factored
//! form and never materialized.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;

use crate::cyclo::CycloElement;
use crate::error::{Error, Result};

/// `sin(k pi / m)`, evaluated from an argument folded into `[0, pi/2]`
/// so that values related by symmetry come out bit-identical.
pub fn sin_pi_frac(k: i64, m: u64) -> f64 {
    let period = 2 * m as i64;
    let mut r = k.rem_euclid(period);
    let mut sign = 1.0;
    if r >= m as i64 {
        r -= m as i64;
        sign = -1.0;
    }
    if 2 * r > m as i64 {
        r = m as i64 - r;
    }
    if r == 0 {
        return 0.0;
    }
    if 2 * r == m as i64 {
        return sign;
    }
    sign * (r as f64 * PI / m as f64).sin()
}

/// `cos(k pi / m)` via `sin((m - 2k) pi / 2m)`.
pub fn cos_pi_frac(k: i64, m: u64) -> f64 {
    sin_pi_frac(m as i64 - 2 * k, 2 * m)
}

/// `theta_j = 2 cos(j pi / m)` in double precision.
pub fn theta(m: u64, j: usize) -> f64 {
    2.0 * cos_pi_frac(j as i64, m)
}

/// `theta_j = zeta_{2m}^j + zeta_{2m}^{-j}` exactly.
pub fn theta_exact(m: u64, j: usize) -> CycloElement {
    let j = j as i64;
    CycloElement::from_exponents(2 * m, [(j, BigInt::one()), (-j, BigInt::one())])
}

/// Exact `2i sin(a pi / m)`, carried as `zeta_{2m}^a - zeta_{2m}^{-a}`.
///
/// The factor `2i` is not represented; it is common to every term this is
/// used in and does not affect zero tests.
pub fn sin_exact(m: u64, a: i64) -> CycloElement {
    sin_exact_in(2 * m, m, a)
}

/// [`sin_exact`] embedded in `Q(zeta_N)` for a multiple `N` of `2m`.
pub fn sin_exact_in(modulus: u64, m: u64, a: i64) -> CycloElement {
    assert!(
        modulus % (2 * m) == 0,
        "Q(zeta_{modulus}) does not contain zeta_{}",
        2 * m
    );
    let stride = (modulus / (2 * m)) as i64;
    CycloElement::from_exponents(
        modulus,
        [(a * stride, BigInt::one()), (-a * stride, BigInt::from(-1))],
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenvalue {
    pub j: usize,
    pub numeric: f64,
    pub exact: CycloElement,
}

/// Spectrum of `P_n`, ordered `theta_1 > theta_2 > ... > theta_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSpectrum {
    pub n: usize,
    pub m: u64,
    pub eigenvalues: Vec<Eigenvalue>,
}

impl PathSpectrum {
    pub fn get(&self, j: usize) -> Option<&Eigenvalue> {
        j.checked_sub(1).and_then(|i| self.eigenvalues.get(i))
    }
}

/// All eigenvalues of `P_n` with exact and numeric forms.
///
/// # Panics
/// If `n == 0`.
pub fn spectrum(n: usize) -> PathSpectrum {
    assert!(n >= 1, "path must have at least one vertex");
    let m = n as u64 + 1;
    let eigenvalues = (1..=n)
        .map(|j| Eigenvalue {
            j,
            numeric: theta(m, j),
            exact: theta_exact(m, j),
        })
        .collect();
    PathSpectrum { n, m, eigenvalues }
}

fn check_index(index: usize, n: usize) -> Result<()> {
    if (1..=n).contains(&index) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, max: n })
    }
}

/// `<k|E_j|l> = (2/m) sin(k j pi/m) sin(l j pi/m)`.
pub fn idempotent_entry(n: usize, j: usize, k: usize, l: usize) -> Result<f64> {
    check_index(j, n)?;
    check_index(k, n)?;
    check_index(l, n)?;
    let m = n as u64 + 1;
    Ok(2.0 / m as f64 * sin_pi_frac((k * j) as i64, m) * sin_pi_frac((l * j) as i64, m))
}

/// Unnormalized projection coefficient `sum_y beta_y sin(y j pi / m)`.
///
/// `E_j v = (2/m) * coefficient * (sin(x j pi/m))_x`.
pub fn projection_coefficient(j: usize, amplitudes: &[Complex64]) -> Complex64 {
    let m = amplitudes.len() as u64 + 1;
    amplitudes
        .iter()
        .enumerate()
        .map(|(y, b)| b * sin_pi_frac(((y + 1) * j) as i64, m))
        .sum()
}

/// `E_j v` in rank-one factored form.
pub fn idempotent_apply(n: usize, j: usize, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
    check_index(j, n)?;
    if amplitudes.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: amplitudes.len(),
        });
    }
    let m = n as u64 + 1;
    let scale = projection_coefficient(j, amplitudes) * (2.0 / m as f64);
    Ok((1..=n).map(|x| scale * sin_pi_frac((x * j) as i64, m)).collect())
}
