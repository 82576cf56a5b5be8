use super::matrix::Matrix;
use crate::{Error, Result};

/// Probabilities below this floor are clamped before taking the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// Mean over the batch of `−ln p[i, labels[i]]`, with the probability clamped
/// at [`PROB_FLOOR`].
pub fn nll_loss(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    check_labels(probs, labels)?;
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &y)| -probs.get(i, y).max(PROB_FLOOR).ln())
        .sum();
    Ok(total / labels.len() as f64)
}

/// Gradient of the mean softmax cross-entropy with respect to the logits:
/// `(p − onehot(y)) / batch`.
pub fn softmax_nll_grad(probs: &Matrix, labels: &[usize]) -> Result<Matrix> {
    check_labels(probs, labels)?;
    let scale = 1.0 / labels.len() as f64;
    let mut g = probs.clone();
    for (i, &y) in labels.iter().enumerate() {
        for v in g.row_mut(i) {
            *v *= scale;
        }
        let cur = g.get(i, y);
        g.set(i, y, cur - scale);
    }
    Ok(g)
}

fn check_labels(probs: &Matrix, labels: &[usize]) -> Result<()> {
    if probs.rows() != labels.len() {
        return Err(Error::dim(format!(
            "{} probability rows but {} labels",
            probs.rows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::dim("empty batch"));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= probs.cols()) {
        return Err(Error::Index(format!(
            "label {bad} out of range for {} classes",
            probs.cols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_probs_give_ln_c() {
        let p = Matrix::from_rows(&[[0.25; 4], [0.25; 4]]).unwrap();
        let l = nll_loss(&p, &[3, 1]).unwrap();
        assert!((l - 1.386_294_361).abs() < 1e-9);
    }

    #[test]
    fn certain_true_class_gives_zero() {
        let p = Matrix::from_rows(&[[0.0, 1.0]]).unwrap();
        assert_eq!(nll_loss(&p, &[1]).unwrap(), 0.0);
    }

    #[test]
    fn direct_evaluation() {
        let p = Matrix::from_rows(&[[0.7, 0.3]]).unwrap();
        assert!((nll_loss(&p, &[1]).unwrap() - 1.203_972_804_33).abs() < 1e-10);
    }

    #[test]
    fn zero_probability_is_clamped() {
        let p = Matrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let l = nll_loss(&p, &[1]).unwrap();
        assert!((l - (-(1e-12f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn label_out_of_range() {
        let p = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        assert!(matches!(nll_loss(&p, &[2]), Err(Error::Index(_))));
    }

    #[test]
    fn grad_rows_sum_to_zero() {
        let p = Matrix::from_rows(&[[0.2, 0.5, 0.3], [0.1, 0.1, 0.8]]).unwrap();
        let g = softmax_nll_grad(&p, &[0, 2]).unwrap();
        for r in g.iter_rows() {
            assert!(r.iter().sum::<f64>().abs() < 1e-15);
        }
        assert!((g.get(0, 0) - (0.2 - 1.0) / 2.0).abs() < 1e-15);
    }
}
