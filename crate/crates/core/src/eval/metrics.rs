use std::cmp::Ordering;
use std::fmt;

/// Why a metric has no value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Undefined(pub String);

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn check_lengths(scores: &[f64], labels: &[u8]) {
    assert_eq!(scores.len(), labels.len(), "one label per score");
}

/// Mann–Whitney AUC: the share of positive–negative pairs the scores order
/// correctly, with ties counting one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, Undefined> {
    check_lengths(scores, labels);
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Undefined(format!(
            "AUC needs both classes ({pos} positive, {neg} negative)"
        )));
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 1)
        .map(|(r, _)| r)
        .sum();
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Share of positives scored at or above `threshold`.
pub fn recall(scores: &[f64], labels: &[u8], threshold: f64) -> Result<f64, Undefined> {
    check_lengths(scores, labels);
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 {
        return Err(Undefined("recall needs at least one positive".into()));
    }
    let hit = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &l)| l == 1 && s >= threshold)
        .count();
    Ok(hit as f64 / pos as f64)
}

/// 1-based ranks with ties sharing their mean rank.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let mid = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mid;
        }
        i = j;
    }
    ranks
}

/// Spearman rank correlation; undefined when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, Undefined> {
    assert_eq!(x.len(), y.len(), "paired samples");
    let (rx, ry) = (midranks(x), midranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Undefined(
            "Spearman correlation of a constant sample".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.3, 0.1], &[1, 0, 1, 0]), Ok(0.75));
        assert_eq!(auc(&[0.9, 0.8, 0.3, 0.1], &[1, 1, 0, 0]), Ok(1.0));
        assert_eq!(auc(&[0.4; 5], &[1, 0, 1, 0, 0]), Ok(0.5));
        assert!(auc(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall(&[0.9, 0.4], &[1, 1], 0.5), Ok(0.5));
        assert_eq!(recall(&[0.9, 0.6, 0.1], &[1, 1, 0], 0.5), Ok(1.0));
        assert_eq!(recall(&[0.0, 0.3], &[1, 1], 0.0), Ok(1.0));
        assert!(recall(&[0.9], &[0], 0.5).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Ok(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Ok(-1.0));
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert_eq!(midranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }
}
