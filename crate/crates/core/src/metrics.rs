//! Evaluation metrics for classifiers and for comparing score sequences.
//!
//! AUC is computed the rank-based (Mann-Whitney) way with average ranks for
//! ties, and the multiclass variant is macro one-vs-rest: each class is
//! scored against the rest and the per-class AUCs are averaged unweighted.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Index of the row maximum; ties resolve to the lowest index so predictions
/// are deterministic.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of rows whose argmax matches the label.
pub fn accuracy(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    if probs.rows() == 0 {
        return Err(Error::Data("accuracy of an empty prediction set".into()));
    }
    if probs.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} prediction rows but {} labels",
            probs.rows(),
            labels.len()
        )));
    }
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= probs.cols()) {
        return Err(Error::Label {
            index,
            label,
            classes: probs.cols(),
        });
    }
    let correct = labels
        .iter()
        .enumerate()
        .filter(|(i, &l)| argmax(probs.row(*i)) == l)
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Average ranks (1-based), with tied values sharing the mean of their
/// positions. This is what makes the AUC and Spearman tie handling exact.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Binary AUC from scores and boolean labels, Mann-Whitney style.
pub fn auc_binary(scores: &[f64], positives: &[bool]) -> Result<f64> {
    if scores.len() != positives.len() {
        return Err(Error::Shape(format!(
            "{} scores but {} labels",
            scores.len(),
            positives.len()
        )));
    }
    if let Some(pos) = scores.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("score {pos} is not finite")));
    }
    let n_pos = positives.iter().filter(|&&p| p).count();
    let n_neg = positives.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Degenerate(
            "AUC needs at least one positive and one negative sample".into(),
        ));
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(positives)
        .filter(|(_, &p)| p)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Macro one-vs-rest AUC over `n_classes` columns of class probabilities.
/// Every class must appear at least once (and not exhaust the dataset).
pub fn auc_macro(probs: &Matrix, labels: &[usize], n_classes: usize) -> Result<f64> {
    if probs.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} prediction rows but {} labels",
            probs.rows(),
            labels.len()
        )));
    }
    if probs.cols() < n_classes {
        return Err(Error::Shape(format!(
            "{} probability columns for {n_classes} classes",
            probs.cols()
        )));
    }
    let mut total = 0.0;
    for class in 0..n_classes {
        let scores: Vec<f64> = (0..probs.rows()).map(|i| probs.get(i, class)).collect();
        let positives: Vec<bool> = labels.iter().map(|&l| l == class).collect();
        let auc = auc_binary(&scores, &positives).map_err(|e| match e {
            Error::Degenerate(_) => Error::Degenerate(format!(
                "class {class} is missing from the evaluation set"
            )),
            other => other,
        })?;
        total += auc;
    }
    Ok(total / n_classes as f64)
}

/// Rescales an observed metric onto a 0-100 scale where the random baseline
/// maps to 0 and the optimum maps to 100.
pub fn normalized_score(observed: f64, optimal: f64, random_baseline: f64) -> Result<f64> {
    for (name, v) in [
        ("observed", observed),
        ("optimal", optimal),
        ("random_baseline", random_baseline),
    ] {
        if !v.is_finite() {
            return Err(Error::Numeric(format!("{name} is not finite")));
        }
    }
    let span = optimal - random_baseline;
    if span.abs() < 1e-15 {
        return Err(Error::Degenerate(
            "optimal and random baseline coincide; normalized score undefined".into(),
        ));
    }
    Ok(100.0 * (1.0 - (optimal - observed) / span))
}

/// Train-minus-test gap of any metric; positive means overfitting.
pub fn generalization_gap(train_metric: f64, test_metric: f64) -> f64 {
    train_metric - test_metric
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "sequences of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Data(
            "rank correlation needs at least two observations".into(),
        ));
    }
    for (name, vs) in [("first", a), ("second", b)] {
        if vs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("{name} sequence has non-finite values")));
        }
    }
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0; // ranks always average to this
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        let dx = x - mean;
        let dy = y - mean;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::Degenerate(
            "a sequence with all-equal values has no rank ordering".into(),
        ));
    }
    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}
