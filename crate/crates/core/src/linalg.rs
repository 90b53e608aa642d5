//! Dense matrix helpers over a [`Field`].

use crate::scalar::{Field, ScalarError, Sign};

pub(crate) type Matrix<S> = Vec<Vec<S>>;

pub(crate) fn identity<S: Field>(n: usize) -> Matrix<S> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect())
        .collect()
}

pub(crate) fn dot<S: Field>(a: &[S], b: &[S]) -> Result<S, ScalarError> {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc.try_add(&x.try_mul(y)?)?;
    }
    Ok(acc)
}

pub(crate) fn mat_vec<S: Field>(m: &Matrix<S>, v: &[S]) -> Result<Vec<S>, ScalarError> {
    m.iter().map(|row| dot(row, v)).collect()
}

pub(crate) fn mat_mul<S: Field>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>, ScalarError> {
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = Vec::with_capacity(a.len());
    for row in a {
        let mut r = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut acc = S::zero();
            for (k, x) in row.iter().enumerate() {
                acc = acc.try_add(&x.try_mul(&b[k][j])?)?;
            }
            r.push(acc);
        }
        out.push(r);
    }
    Ok(out)
}

pub(crate) fn vec_add<S: Field>(a: &[S], b: &[S]) -> Result<Vec<S>, ScalarError> {
    a.iter().zip(b).map(|(x, y)| x.try_add(y)).collect()
}

pub(crate) fn vec_sub<S: Field>(a: &[S], b: &[S]) -> Result<Vec<S>, ScalarError> {
    a.iter().zip(b).map(|(x, y)| x.try_sub(y)).collect()
}

/// Index of the pivot candidate with the largest magnitude among nonzero entries.
fn pick_pivot<S: Field>(m: &Matrix<S>, col: usize, from: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (r, row) in m.iter().enumerate().skip(from) {
        if row[col].sign() == Sign::Zero {
            continue;
        }
        let mag = row[col].to_f64().abs();
        if best.map_or(true, |(_, b)| mag > b) {
            best = Some((r, mag));
        }
    }
    best.map(|(r, _)| r)
}

/// Gaussian elimination on `[a | rhs]`. Returns `None` when `a` is singular.
pub(crate) fn solve<S: Field>(a: &Matrix<S>, rhs: &Matrix<S>) -> Result<Option<Matrix<S>>, ScalarError> {
    let n = a.len();
    let k = rhs.first().map_or(0, |r| r.len());
    let mut aug: Matrix<S> = a
        .iter()
        .zip(rhs)
        .map(|(r, b)| r.iter().chain(b.iter()).cloned().collect())
        .collect();
    for col in 0..n {
        let Some(p) = pick_pivot(&aug, col, col) else {
            return Ok(None);
        };
        aug.swap(col, p);
        let inv = aug[col][col].try_inv()?;
        for j in col..n + k {
            aug[col][j] = aug[col][j].try_mul(&inv)?;
        }
        for r in 0..n {
            if r == col || aug[r][col].sign() == Sign::Zero {
                continue;
            }
            let f = aug[r][col].clone();
            for j in col..n + k {
                let t = f.try_mul(&aug[col][j])?;
                aug[r][j] = aug[r][j].try_sub(&t)?;
            }
        }
    }
    Ok(Some(aug.into_iter().map(|r| r[n..].to_vec()).collect()))
}

pub(crate) fn inverse<S: Field>(a: &Matrix<S>) -> Result<Option<Matrix<S>>, ScalarError> {
    solve(a, &identity(a.len()))
}

pub(crate) fn determinant<S: Field>(a: &Matrix<S>) -> Result<S, ScalarError> {
    let n = a.len();
    let mut m = a.clone();
    let mut det = S::one();
    for col in 0..n {
        let Some(p) = pick_pivot(&m, col, col) else {
            return Ok(S::zero());
        };
        if p != col {
            m.swap(col, p);
            det = -det;
        }
        det = det.try_mul(&m[col][col])?;
        let inv = m[col][col].try_inv()?;
        for r in col + 1..n {
            if m[r][col].sign() == Sign::Zero {
                continue;
            }
            let f = m[r][col].try_mul(&inv)?;
            for j in col..n {
                let t = f.try_mul(&m[col][j])?;
                m[r][j] = m[r][j].try_sub(&t)?;
            }
        }
    }
    Ok(det)
}

pub(crate) fn transpose<S: Field>(a: &Matrix<S>) -> Matrix<S> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn determinant_and_inverse() {
        let m: Matrix<Scalar> = vec![
            vec![Scalar::int(2), Scalar::int(1)],
            vec![Scalar::int(1), Scalar::int(1)],
        ];
        assert_eq!(determinant(&m).unwrap(), Scalar::int(1));
        let inv = inverse(&m).unwrap().unwrap();
        assert_eq!(mat_mul(&m, &inv).unwrap(), identity(2));
        let sing: Matrix<Scalar> = vec![
            vec![Scalar::int(1), Scalar::int(2)],
            vec![Scalar::int(2), Scalar::int(4)],
        ];
        assert_eq!(determinant(&sing).unwrap(), Scalar::int(0));
        assert!(inverse(&sing).unwrap().is_none());
    }
}
