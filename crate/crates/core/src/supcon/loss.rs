//! Supervised contrastive loss with analytic gradients.

use crate::{Error, Result};

/// Loss over a multi-view batch and its gradient with respect to each
/// (unit-norm) projection.
///
/// For anchor `i`, positives `P(i)` are the other views with the same label
/// and the softmax runs over every other view `A(i)`:
///
/// `L = sum_i -1/|P(i)| sum_{p in P(i)} log( exp(z_i.z_p/t) / sum_{a in A(i)} exp(z_i.z_a/t) )`
pub fn supcon_loss(z: &[Vec<f64>], labels: &[usize], temperature: f64) -> Result<(f64, Vec<Vec<f64>>)> {
    let n = z.len();
    if labels.len() != n {
        return Err(Error::SizeMismatch(format!("{n} projections vs {} labels", labels.len())));
    }
    if !(temperature > 0.0) {
        return Err(Error::OutOfRange {
            what: "temperature".into(),
            value: temperature,
        });
    }
    let dim = z.first().map_or(0, Vec::len);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut loss = 0.0;
    let mut grad = vec![vec![0.0; dim]; n];
    let mut q = vec![0.0; n];
    for i in 0..n {
        let positives: Vec<usize> = (0..n).filter(|&p| p != i && labels[p] == labels[i]).collect();
        if positives.is_empty() {
            return Err(Error::NoPositive(i));
        }
        let logits: Vec<f64> = (0..n).map(|a| dot(&z[i], &z[a]) / temperature).collect();
        let max = (0..n).filter(|&a| a != i).map(|a| logits[a]).fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for a in (0..n).filter(|&a| a != i) {
            q[a] = (logits[a] - max).exp();
            denom += q[a];
        }
        let log_denom = max + denom.ln();
        q[i] = 0.0;
        for a in (0..n).filter(|&a| a != i) {
            q[a] /= denom;
        }
        let inv_p = 1.0 / positives.len() as f64;
        loss -= inv_p * positives.iter().map(|&p| logits[p] - log_denom).sum::<f64>();

        // d l_i / d s_ia = q_ia - [a in P(i)]/|P(i)|, with s_ia = z_i.z_a / t.
        let mut coef = q.clone();
        for &p in &positives {
            coef[p] -= inv_p;
        }
        for a in (0..n).filter(|&a| a != i) {
            let c = coef[a] / temperature;
            if c == 0.0 {
                continue;
            }
            for d in 0..dim {
                grad[i][d] += c * z[a][d];
                grad[a][d] += c * z[i][d];
            }
        }
    }
    Ok((loss, grad))
}
