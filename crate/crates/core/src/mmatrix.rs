//! Non-singular M-matrix predicates: sign pattern plus positive leading
//! principal minors, and the equivalent nonnegative-inverse test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minors must exceed this to count as positive.
pub const MINOR_TOLERANCE: f64 = 1e-12;
/// Inverse entries above `-INVERSE_TOLERANCE` count as nonnegative.
pub const INVERSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix order must be at least 1")]
    Empty,
    #[error("expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
}

/// Dense square matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        if entries.len() != n * n {
            return Err(MatrixError::Shape {
                expected: n * n,
                got: entries.len(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::Shape {
                expected: n * n,
                got: rows.iter().map(|r| r.len()).sum(),
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MMatrixCheck {
    pub is_m_matrix: bool,
    /// First violated condition, when not an M-matrix.
    pub reason: Option<String>,
    /// Leading principal minors computed before stopping.
    pub minors: Vec<f64>,
}

/// Off-diagonal entries ≤ 0 and every leading principal minor > tolerance.
/// Minors come from fraction-free (Bareiss) elimination without pivoting,
/// where the k-th pivot equals the k-th leading principal minor.
pub fn is_m_matrix(b: &SquareMatrix) -> MMatrixCheck {
    let n = b.n;
    for i in 0..n {
        for j in 0..n {
            if i != j && b.get(i, j) > 0.0 {
                return MMatrixCheck {
                    is_m_matrix: false,
                    reason: Some(format!("positive off-diagonal entry at ({i}, {j})")),
                    minors: vec![],
                };
            }
        }
    }
    let mut m = b.entries.clone();
    let mut prev = 1.0;
    let mut minors = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = m[k * n + k];
        minors.push(pivot);
        if !(pivot > MINOR_TOLERANCE) {
            return MMatrixCheck {
                is_m_matrix: false,
                reason: Some(format!("leading principal minor of order {} is {pivot}", k + 1)),
                minors,
            };
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i * n + j] = (pivot * m[i * n + j] - m[i * n + k] * m[k * n + j]) / prev;
            }
        }
        prev = pivot;
    }
    MMatrixCheck {
        is_m_matrix: true,
        reason: None,
        minors,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseCheck {
    pub nonnegative: bool,
    pub singular: bool,
    pub inverse: Option<SquareMatrix>,
}

/// Invert by LU with partial pivoting and test `B⁻¹ ≥ 0` (within tolerance).
pub fn inverse_nonnegative(b: &SquareMatrix) -> InverseCheck {
    let n = b.n;
    let scale = b.entries.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut a = b.entries.clone();
    let mut inv = SquareMatrix::identity(n).entries;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .unwrap();
        if a[p * n + col].abs() <= 1e-14 * scale {
            return InverseCheck {
                nonnegative: false,
                singular: true,
                inverse: None,
            };
        }
        if p != col {
            for j in 0..n {
                a.swap(p * n + j, col * n + j);
                inv.swap(p * n + j, col * n + j);
            }
        }
        let d = a[col * n + col];
        for j in 0..n {
            a[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[i * n + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[i * n + j] -= f * a[col * n + j];
                inv[i * n + j] -= f * inv[col * n + j];
            }
        }
    }
    let nonnegative = inv.iter().all(|x| *x >= -INVERSE_TOLERANCE);
    InverseCheck {
        nonnegative,
        singular: false,
        inverse: Some(SquareMatrix { n, entries: inv }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_is_m_matrix() {
        for n in 1..5 {
            assert!(is_m_matrix(&SquareMatrix::identity(n)).is_m_matrix);
            assert!(inverse_nonnegative(&SquareMatrix::identity(n)).nonnegative);
        }
    }

    #[test]
    fn two_by_two_examples() {
        let b = m(&[&[2.0, -1.0], &[-1.0, 1.0]]);
        let c = is_m_matrix(&b);
        assert!(c.is_m_matrix);
        assert_eq!(c.minors, vec![2.0, 1.0]);
        let inv = inverse_nonnegative(&b);
        assert!(inv.nonnegative);
        let e = inv.inverse.unwrap();
        for (x, y) in e.entries().iter().zip([1.0, 1.0, 1.0, 2.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        let pos = m(&[&[1.0, 0.5], &[-1.0, 1.0]]);
        let c = is_m_matrix(&pos);
        assert!(!c.is_m_matrix);
        assert!(c.reason.unwrap().contains("off-diagonal"));
        let neg_det = m(&[&[1.0, -2.0], &[-1.0, 1.0]]);
        assert!(!is_m_matrix(&neg_det).is_m_matrix);
        assert!(!inverse_nonnegative(&neg_det).nonnegative);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let s = m(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert!(!is_m_matrix(&s).is_m_matrix);
        let inv = inverse_nonnegative(&s);
        assert!(inv.singular && !inv.nonnegative);
    }

    #[test]
    fn shape_errors() {
        assert_eq!(SquareMatrix::new(0, vec![]), Err(MatrixError::Empty));
        assert!(SquareMatrix::new(2, vec![1.0; 3]).is_err());
        assert_eq!(SquareMatrix::new(1, vec![f64::NAN]), Err(MatrixError::NonFinite));
    }

    #[test]
    fn three_by_three_minors() {
        let b = m(&[&[4.0, -1.0, -1.0], &[-1.0, 4.0, -1.0], &[-1.0, -1.0, 4.0]]);
        let c = is_m_matrix(&b);
        assert!(c.is_m_matrix);
        assert!((c.minors[1] - 15.0).abs() < 1e-12);
        assert!((c.minors[2] - 50.0).abs() < 1e-12);
    }
}
