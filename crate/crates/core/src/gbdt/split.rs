use super::TrainParams;

/// Candidate gains closer than this count as equal; the earlier candidate wins.
pub const GAIN_TOLERANCE: f64 = 1e-12;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic loss of one example given its logit, `ln(1 + e^z) − y·z`.
pub fn logistic_loss(logit: f64, label: u8) -> f64 {
    let softplus = logit.max(0.0) + (-logit.abs()).exp().ln_1p();
    softplus - f64::from(label) * logit
}

/// First and second derivative of the logistic loss with respect to the logit.
pub fn grad_hess(logit: f64, label: u8) -> (f64, f64) {
    let p = sigmoid(logit);
    (p - f64::from(label), p * (1.0 - p))
}

/// Minimiser of `G·ω + ½(H + λ)·ω²`.
pub fn leaf_weight(g_sum: f64, h_sum: f64, lambda: f64) -> f64 {
    if g_sum == 0.0 {
        return 0.0;
    }
    -g_sum / (h_sum + lambda)
}

/// Structure-score reduction of splitting a node into the given halves.
pub fn split_gain(
    g_left: f64,
    h_left: f64,
    g_right: f64,
    h_right: f64,
    lambda: f64,
    gamma: f64,
) -> f64 {
    let score = |g: f64, h: f64| g * g / (h + lambda);
    0.5 * (score(g_left, h_left) + score(g_right, h_right)
        - score(g_left + g_right, h_left + h_right))
        - gamma
}

/// Threshold between two consecutive distinct values; rows with
/// `value < threshold` go left.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid <= lo {
        hi
    } else {
        mid
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitDecision {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Running state of one node's scan along one feature in ascending value order.
#[derive(Clone, Debug)]
pub(crate) struct NodeScan {
    pub g_total: f64,
    pub h_total: f64,
    g_left: f64,
    h_left: f64,
    last: Option<f64>,
    pub best: Option<SplitDecision>,
}

impl NodeScan {
    pub fn new(g_total: f64, h_total: f64) -> Self {
        NodeScan {
            g_total,
            h_total,
            g_left: 0.0,
            h_left: 0.0,
            last: None,
            best: None,
        }
    }

    pub fn start_feature(&mut self) {
        self.g_left = 0.0;
        self.h_left = 0.0;
        self.last = None;
    }

    /// Feeds the next row of the node in ascending order of `value`.
    #[inline]
    pub fn push(&mut self, feature: usize, value: f64, g: f64, h: f64, params: &TrainParams) {
        if let Some(prev) = self.last {
            if value > prev {
                self.consider(feature, midpoint(prev, value), params);
            }
        }
        self.g_left += g;
        self.h_left += h;
        self.last = Some(value);
    }

    fn consider(&mut self, feature: usize, threshold: f64, params: &TrainParams) {
        let (gl, hl) = (self.g_left, self.h_left);
        let (gr, hr) = (self.g_total - gl, self.h_total - hl);
        if hl < params.min_child_hessian || hr < params.min_child_hessian {
            return;
        }
        let gain = split_gain(gl, hl, gr, hr, params.lambda, params.gamma);
        let floor = self.best.map_or(0.0, |b| b.gain);
        if gain > floor + GAIN_TOLERANCE * floor.abs().max(1.0) {
            self.best = Some(SplitDecision {
                feature,
                threshold,
                gain,
            });
        }
    }
}

/// Exact greedy split search over the rows of one node.
///
/// Every feature and every midpoint between consecutive distinct values is
/// scored; candidates whose children fall below `min_child_hessian` are
/// skipped. Returns `None` unless some gain is positive. Ties go to the lowest
/// feature index, then the lowest threshold.
pub fn best_split(
    rows: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    params: &TrainParams,
) -> Option<SplitDecision> {
    let d = rows.first().map_or(0, Vec::len);
    let mut scan = NodeScan::new(g.iter().sum(), h.iter().sum());
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for f in 0..d {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
        scan.start_feature();
        for &i in &order {
            scan.push(f, rows[i][f], g[i], h[i], params);
        }
    }
    scan.best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_at_zero() {
        assert_eq!(grad_hess(0.0, 1), (-0.5, 0.25));
        assert_eq!(grad_hess(0.0, 0), (0.5, 0.25));
    }

    #[test]
    fn derivatives_at_two() {
        let (g, h) = grad_hess(2.0, 1);
        assert!((g + 0.1192).abs() < 1e-4);
        assert!((h - 0.10499).abs() < 1e-5);
    }

    #[test]
    fn leaf_weight_formula() {
        assert!((leaf_weight(4.0, 8.0, 1.0) + 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(leaf_weight(0.0, 3.0, 0.0), 0.0);
    }

    #[test]
    fn gain_of_reference_split() {
        let gain = split_gain(-2.0, 2.0, 3.0, 3.0, 1.0, 0.0);
        assert!((gain - 0.5 * (4.0 / 3.0 + 9.0 / 4.0 - 1.0 / 6.0)).abs() < 1e-12);
        assert!((gain - 1.708_33).abs() < 1e-5);
    }

    #[test]
    fn midpoint_of_adjacent_floats() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), b);
        assert_eq!(midpoint(1.0, 2.0), 1.5);
    }

    #[test]
    fn saturated_identical_labels_do_not_split() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let (g, h): (Vec<f64>, Vec<f64>) = (0..8).map(|_| grad_hess(-30.0, 0)).unzip();
        assert_eq!(best_split(&rows, &g, &h, &TrainParams::default()), None);
    }

    #[test]
    fn reference_split_is_found() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let g = [-1.0, -1.0, 1.0, 1.0, 1.0];
        let h = [1.0; 5];
        let split = best_split(&rows, &g, &h, &TrainParams::default()).unwrap();
        assert_eq!((split.feature, split.threshold), (0, 1.5));
        assert!((split.gain - 1.708_333_333_333_333).abs() < 1e-12);
    }
}
