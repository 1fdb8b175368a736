use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Small dense square matrix, stored as rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymMatrix {
    rows: Vec<Vec<f64>>,
}

impl SymMatrix {
    /// Panics if `rows` is not square.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.rows[i][j] == self.rows[j][i]))
    }

    /// Determinant of the leading `k × k` block.
    pub fn leading_minor(&self, k: usize) -> f64 {
        let mut a: Vec<Vec<f64>> = self.rows[..k].iter().map(|r| r[..k].to_vec()).collect();
        let mut det = 1.0;
        for col in 0..k {
            let pivot = (col..k)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            if a[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            let (top, rest) = a.split_at_mut(col + 1);
            let pivot_row = &top[col];
            for row in rest.iter_mut().take(k - col - 1) {
                let f = row[col] / pivot_row[col];
                for (x, &p) in row[col..k].iter_mut().zip(&pivot_row[col..k]) {
                    *x -= f * p;
                }
            }
        }
        det
    }
}

/// Sylvester's criterion: the verdict is true iff every leading principal
/// minor is strictly positive. Minors are returned in order of block size.
pub fn is_positive_definite(m: &SymMatrix) -> Result<(bool, Vec<f64>), AnalysisError> {
    let n = m.dim();
    let scale = m
        .rows()
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    for i in 0..n {
        for j in 0..i {
            if (m.get(i, j) - m.get(j, i)).abs() > 1e-12 * scale {
                return Err(AnalysisError::NotSymmetric { row: i, col: j });
            }
        }
    }
    let minors: Vec<f64> = (1..=n).map(|k| m.leading_minor(k)).collect();
    Ok((minors.iter().all(|&d| d > 0.0), minors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let m = SymMatrix::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert_eq!(
            is_positive_definite(&m).unwrap(),
            (true, vec![1.0, 1.0, 1.0])
        );
    }

    #[test]
    fn indefinite_2x2() {
        let m = SymMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert_eq!(is_positive_definite(&m).unwrap(), (false, vec![1.0, -3.0]));
    }

    #[test]
    fn rejects_asymmetric() {
        let m = SymMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.1, 1.0]]);
        assert_eq!(
            is_positive_definite(&m),
            Err(AnalysisError::NotSymmetric { row: 1, col: 0 })
        );
    }

    #[test]
    fn minor_needing_pivot() {
        // Leading 1x1 block is zero, the 2x2 determinant is -1.
        let m = SymMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let (pd, minors) = is_positive_definite(&m).unwrap();
        assert!(!pd);
        assert_eq!(minors, vec![0.0, -1.0]);
    }

    #[test]
    fn three_by_three_determinant() {
        let m = SymMatrix::from_rows(vec![
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ]);
        let (pd, minors) = is_positive_definite(&m).unwrap();
        assert!(pd);
        for (got, want) in minors.iter().zip([2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }
}
