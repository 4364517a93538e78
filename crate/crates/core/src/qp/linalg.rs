//! Small dense Cholesky routines on row-major `Vec<Vec<T>>`.

use crate::scalar::Real;

/// Lower-triangular `L` with `A = L Lᵀ`, or `None` if `A` is not positive
/// definite.
pub fn cholesky<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > T::zero()) || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b`.
pub fn forward<T: Real>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let mut y = b.to_vec();
    for i in 0..l.len() {
        for k in 0..i {
            y[i] = y[i] - l[i][k] * y[k];
        }
        y[i] = y[i] / l[i][i];
    }
    y
}

/// Solves `Lᵀ x = y`.
pub fn backward<T: Real>(l: &[Vec<T>], y: &[T]) -> Vec<T> {
    let n = l.len();
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] = x[i] - l[k][i] * x[k];
        }
        x[i] = x[i] / l[i][i];
    }
    x
}

pub fn cholesky_solve<T: Real>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    backward(l, &forward(l, b))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn mat_vec<T: Real>(a: &[Vec<T>], x: &[T]) -> Vec<T> {
    a.iter().map(|row| dot(row, x)).collect()
}
