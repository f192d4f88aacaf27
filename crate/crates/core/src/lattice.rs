//! Exact integer lattice routines: left kernels via unimodular row reduction
//! and integral LLL reduction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntVector = Vec<BigInt>;

/// Result of [`left_kernel`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    /// Basis of `{x in Z^r : x^T M = 0}`.
    pub basis: Vec<IntVector>,
    /// Rank of `M`.
    pub rank: usize,
}

/// Integer left kernel of the `r x c` matrix `rows`.
///
/// Row-reduces `[M | I_r]` with unimodular integer row operations into echelon
/// form. Rows whose `M` part ends up zero carry a basis of the full integer
/// kernel in their `I` part.
pub fn left_kernel(rows: &[IntVector]) -> Kernel {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    let mut aug: Vec<(IntVector, IntVector)> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            assert_eq!(row.len(), c, "ragged matrix");
            let mut unit = vec![BigInt::zero(); r];
            unit[i] = BigInt::one();
            (row.clone(), unit)
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..c {
        if pivot_row == r {
            break;
        }
        loop {
            // Smallest nonzero entry at or below the pivot row becomes the pivot.
            let best = (pivot_row..r)
                .filter(|&i| !aug[i].0[col].is_zero())
                .min_by(|&a, &b| aug[a].0[col].abs().cmp(&aug[b].0[col].abs()));
            let Some(best) = best else { break };
            aug.swap(pivot_row, best);
            let mut done = true;
            for i in pivot_row + 1..r {
                if aug[i].0[col].is_zero() {
                    continue;
                }
                let q = aug[i].0[col].div_floor(&aug[pivot_row].0[col]);
                let (head, tail) = aug.split_at_mut(i);
                let (pm, pu) = &head[pivot_row];
                let (rm, ru) = &mut tail[0];
                axpy(rm, &q, pm);
                axpy(ru, &q, pu);
                if !rm[col].is_zero() {
                    done = false;
                }
            }
            if done {
                pivot_row += 1;
                break;
            }
        }
    }
    Kernel {
        rank: pivot_row,
        basis: aug.into_iter().skip(pivot_row).map(|(_, u)| u).collect(),
    }
}

/// `target -= q * source`
fn axpy(target: &mut [BigInt], q: &BigInt, source: &[BigInt]) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest integer to `num / den` for `den > 0`, ties toward +infinity.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    (num * BigInt::from(2) + den).div_floor(&(den * BigInt::from(2)))
}

/// In-place integral LLL reduction (parameter 3/4) of linearly independent rows.
///
/// Works entirely in integers through the Gram determinants `d_i` and the
/// scaled Gram-Schmidt coefficients `lambda_{k,j} = d_{j} mu_{k,j}`. The row
/// operations are unimodular, so the lattice is unchanged.
///
/// # Panics
/// If the rows are linearly dependent.
pub fn lll_reduce(basis: &mut [IntVector]) {
    let n = basis.len();
    if n <= 1 {
        return;
    }
    // d[0] = 1, d[i] = Gram determinant of the first i vectors.
    let mut d = vec![BigInt::zero(); n + 1];
    d[0] = BigInt::one();
    let mut lambda = vec![vec![BigInt::zero(); n]; n];

    let gram_schmidt_row =
        |basis: &[IntVector], lambda: &mut Vec<Vec<BigInt>>, d: &mut Vec<BigInt>, k: usize| {
            for j in 0..=k {
                let mut u = dot(&basis[k], &basis[j]);
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lambda[k][i] * &lambda[j][i]) / &d[i];
                }
                if j < k {
                    lambda[k][j] = u;
                } else {
                    assert!(!u.is_zero(), "LLL input rows are linearly dependent");
                    d[k + 1] = u;
                }
            }
        };

    gram_schmidt_row(basis, &mut lambda, &mut d, 0);
    let mut k = 1;
    let mut k_max = 0;
    while k < n {
        if k > k_max {
            k_max = k;
            gram_schmidt_row(basis, &mut lambda, &mut d, k);
        }
        loop {
            size_reduce(basis, &mut lambda, &d, k, k - 1);
            let lhs = &d[k + 1] * &d[k - 1] * 4;
            let rhs = &d[k] * &d[k] * 3 - &lambda[k][k - 1] * &lambda[k][k - 1] * 4;
            if lhs < rhs {
                swap_rows(basis, &mut lambda, &mut d, k, k_max);
                k = (k - 1).max(1);
            } else {
                for l in (0..k - 1).rev() {
                    size_reduce(basis, &mut lambda, &d, k, l);
                }
                k += 1;
                break;
            }
        }
    }
}

fn size_reduce(basis: &mut [IntVector], lambda: &mut [Vec<BigInt>], d: &[BigInt], k: usize, l: usize) {
    if (&lambda[k][l] * BigInt::from(2)).abs() <= d[l + 1] {
        return;
    }
    let q = round_div(&lambda[k][l], &d[l + 1]);
    let (head, tail) = basis.split_at_mut(k);
    axpy(&mut tail[0], &q, &head[l]);
    lambda[k][l] -= &q * &d[l + 1];
    let (upper, lower) = lambda.split_at_mut(k);
    for (x, y) in lower[0][..l].iter_mut().zip(&upper[l][..l]) {
        *x -= &q * y;
    }
}

fn swap_rows(basis: &mut [IntVector], lambda: &mut [Vec<BigInt>], d: &mut [BigInt], k: usize, k_max: usize) {
    basis.swap(k, k - 1);
    let (upper, lower) = lambda.split_at_mut(k);
    for (a, b) in lower[0][..k - 1].iter_mut().zip(&mut upper[k - 1][..k - 1]) {
        std::mem::swap(a, b);
    }
    let lam = lambda[k][k - 1].clone();
    let b = (&d[k - 1] * &d[k + 1] + &lam * &lam) / &d[k];
    for row in &mut lambda[k + 1..=k_max] {
        let t = row[k].clone();
        row[k] = (&d[k + 1] * &row[k - 1] - &lam * &t) / &d[k];
        row[k - 1] = (&b * &t + &lam * &row[k]) / &d[k + 1];
    }
    d[k] = b;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> IntVector {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn gram_det(rows: &[IntVector]) -> BigInt {
        // Bareiss elimination on the Gram matrix.
        let n = rows.len();
        let mut g: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| dot(&rows[i], &rows[j])).collect())
            .collect();
        let mut prev = BigInt::one();
        let mut sign = 1;
        for k in 0..n {
            if g[k][k].is_zero() {
                match (k + 1..n).find(|&i| !g[i][k].is_zero()) {
                    Some(i) => {
                        g.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    g[i][j] = (&g[i][j] * &g[k][k] - &g[i][k] * &g[k][j]) / &prev;
                }
            }
            prev = g[k][k].clone();
        }
        prev * sign
    }

    #[test]
    fn kernel_of_small_matrix() {
        // x^T M = 0 with M rows (1,2), (2,4), (3,6): kernel rank 2.
        let k = left_kernel(&[v(&[1, 2]), v(&[2, 4]), v(&[3, 6])]);
        assert_eq!(k.rank, 1);
        assert_eq!(k.basis.len(), 2);
        for b in &k.basis {
            let combo: Vec<BigInt> = (0..2)
                .map(|c| {
                    b.iter()
                        .zip([1, 2, 3])
                        .map(|(x, r)| x * BigInt::from(r * (c + 1)))
                        .sum()
                })
                .collect();
            assert!(combo.iter().all(Zero::is_zero));
        }
        // Full integer kernel: {x : x1 + 2 x2 + 3 x3 = 0} has determinant sqrt(14).
        assert_eq!(gram_det(&k.basis), BigInt::from(14));
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x + 4y = 0 has integer kernel spanned by (2, -1), not (4, -2).
        let k = left_kernel(&[v(&[2]), v(&[4])]);
        assert_eq!(k.basis.len(), 1);
        let b = &k.basis[0];
        assert_eq!(gram_det(&k.basis), BigInt::from(5));
        assert!((&b[0] * BigInt::from(2) + &b[1] * BigInt::from(4)).is_zero());
    }

    #[test]
    fn lll_preserves_lattice_and_reduces() {
        let mut basis = vec![v(&[1, 1, 1]), v(&[-1, 0, 2]), v(&[3, 5, 6])];
        let before = gram_det(&basis);
        lll_reduce(&mut basis);
        assert_eq!(gram_det(&basis), before);
        let norms: Vec<BigInt> = basis.iter().map(|b| dot(b, b)).collect();
        assert!(norms[0] <= BigInt::from(3));
    }

    #[test]
    fn lll_finds_short_vector_in_skewed_basis() {
        let mut basis = vec![
            v(&[1, 0, 0, 1_000_003]),
            v(&[0, 1, 0, 2_000_005]),
            v(&[0, 0, 1, 999_999]),
        ];
        let before = gram_det(&basis);
        lll_reduce(&mut basis);
        assert_eq!(gram_det(&basis), before);
        let shortest = basis.iter().map(|b| dot(b, b)).min().unwrap();
        assert!(shortest < BigInt::from(1_000_000));
    }
}
