use super::CooccurrenceCounts;
use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// Positive PMI: `max(0, ln p(w,c) / (p(w) p(c)))`, zero on empty cells.
pub fn pmi_weight(counts: &CooccurrenceCounts) -> Result<Matrix> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::Empty("co-occurrence counts are all zero".into()));
    }
    let n = total as f64;
    let rows = counts.row_marginals();
    let cols = counts.col_marginals();
    let mut out = Matrix::zeros(counts.rows(), counts.cols());
    for (i, j, c) in counts.nonzero() {
        let pmi = (c as f64 * n / (rows[i] as f64 * cols[j] as f64)).ln();
        if pmi > 0.0 {
            out[(i, j)] = pmi;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(rows: usize, cols: usize, data: Vec<u64>) -> CooccurrenceCounts {
        let v = (0..rows).map(|i| format!("w{i}")).collect();
        let c = (0..cols).map(|i| format!("c{i}")).collect();
        CooccurrenceCounts::from_dense(v, c, 5, data).unwrap()
    }

    #[test]
    fn diagonal_counts() {
        let m = pmi_weight(&counts(2, 2, vec![2, 0, 0, 2])).unwrap();
        assert!((m[(0, 0)] - 2f64.ln()).abs() < 1e-15);
        assert!((m[(1, 1)] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(1, 0)], 0.0);
    }

    #[test]
    fn independence_gives_zero() {
        let m = pmi_weight(&counts(2, 3, vec![3; 6])).unwrap();
        assert_eq!(m.max_abs(), 0.0);
        let m = pmi_weight(&counts(2, 2, vec![1, 2, 2, 4])).unwrap();
        assert!(m.max_abs() < 1e-15);
    }

    #[test]
    fn negative_pmi_is_clamped() {
        let m = pmi_weight(&counts(2, 2, vec![1, 9, 9, 1])).unwrap();
        assert_eq!(m[(0, 0)], 0.0);
        assert!(m[(0, 1)] > 0.0);
    }

    #[test]
    fn empty_counts_fail() {
        assert!(pmi_weight(&counts(1, 1, vec![0])).is_err());
    }
}
