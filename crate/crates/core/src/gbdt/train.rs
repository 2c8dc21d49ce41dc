use super::split::{grad_hess, leaf_weight, logistic_loss, NodeScan, SplitDecision};
use super::{TrainParams, TreeNode};

/// One feature's rows in ascending order of value, with the values alongside.
struct Column {
    order: Vec<u32>,
    values: Vec<f64>,
}

enum Slot {
    Open {
        g: f64,
        h: f64,
    },
    Split {
        decision: SplitDecision,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

/// Grows one tree level by level with exact greedy splits. Returns the tree
/// and the leaf value reached by every row.
fn grow(
    rows: &[Vec<f64>],
    columns: &[Column],
    g: &[f64],
    h: &[f64],
    params: &TrainParams,
) -> (TreeNode, Vec<f64>) {
    let n = rows.len();
    let mut slots = vec![Slot::Open {
        g: g.iter().sum(),
        h: h.iter().sum(),
    }];
    let mut node_of = vec![0usize; n];
    let mut frontier = vec![0usize];
    // Position of an open node within `frontier`, or usize::MAX.
    let mut frontier_pos = vec![0usize];
    // `frontier_pos` of each row's node.
    let mut row_pos = vec![0usize; n];

    for _depth in 0..params.max_depth {
        if frontier.is_empty() {
            break;
        }
        let mut scans: Vec<NodeScan> = frontier
            .iter()
            .map(|&k| match slots[k] {
                Slot::Open { g, h } => NodeScan::new(g, h),
                _ => unreachable!("frontier holds open nodes"),
            })
            .collect();
        for (f, col) in columns.iter().enumerate() {
            scans.iter_mut().for_each(NodeScan::start_feature);
            for (&r, &value) in col.order.iter().zip(&col.values) {
                let r = r as usize;
                let pos = row_pos[r];
                if pos != usize::MAX {
                    scans[pos].push(f, value, g[r], h[r], params);
                }
            }
        }

        let mut next = Vec::new();
        for (pos, &k) in frontier.iter().enumerate() {
            match scans[pos].best {
                Some(decision) => {
                    let left = slots.len();
                    slots.push(Slot::Open { g: 0.0, h: 0.0 });
                    slots.push(Slot::Open { g: 0.0, h: 0.0 });
                    frontier_pos.extend([usize::MAX, usize::MAX]);
                    slots[k] = Slot::Split {
                        decision,
                        left,
                        right: left + 1,
                    };
                    next.extend([left, left + 1]);
                }
                None => {
                    let Slot::Open { g, h } = slots[k] else {
                        unreachable!()
                    };
                    slots[k] = Slot::Leaf(leaf_weight(g, h, params.lambda));
                }
            }
            frontier_pos[k] = usize::MAX;
        }
        for (r, k) in node_of.iter_mut().enumerate() {
            if let Slot::Split {
                decision,
                left,
                right,
            } = slots[*k]
            {
                *k = if rows[r][decision.feature] < decision.threshold {
                    left
                } else {
                    right
                };
                if let Slot::Open { g: gs, h: hs } = &mut slots[*k] {
                    *gs += g[r];
                    *hs += h[r];
                }
            }
        }
        for (pos, &k) in next.iter().enumerate() {
            frontier_pos[k] = pos;
        }
        for (p, &k) in row_pos.iter_mut().zip(&node_of) {
            *p = frontier_pos[k];
        }
        frontier = next;
    }
    for &k in &frontier {
        if let Slot::Open { g, h } = slots[k] {
            slots[k] = Slot::Leaf(leaf_weight(g, h, params.lambda));
        }
    }

    fn build(slots: &[Slot], k: usize) -> TreeNode {
        match &slots[k] {
            Slot::Leaf(w) => TreeNode::Leaf { leaf: *w },
            Slot::Split {
                decision,
                left,
                right,
            } => TreeNode::Split {
                feat: decision.feature,
                thr: decision.threshold,
                left: Box::new(build(slots, *left)),
                right: Box::new(build(slots, *right)),
            },
            Slot::Open { .. } => unreachable!("every node is closed"),
        }
    }
    let outputs = node_of
        .iter()
        .map(|&k| match slots[k] {
            Slot::Leaf(w) => w,
            _ => unreachable!("rows end in leaves"),
        })
        .collect();
    (build(&slots, 0), outputs)
}

pub(crate) struct Fit {
    pub trees: Vec<TreeNode>,
    pub losses: Vec<f64>,
    pub stopped_at: Option<usize>,
}

/// Newton boosting. Stops early, dropping the offending tree, if a round
/// would increase the training loss.
pub(crate) fn fit(rows: &[Vec<f64>], labels: &[u8], params: &TrainParams) -> Fit {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let columns: Vec<Column> = (0..d)
        .map(|f| {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| {
                rows[a as usize][f]
                    .total_cmp(&rows[b as usize][f])
                    .then(a.cmp(&b))
            });
            let values = order.iter().map(|&r| rows[r as usize][f]).collect();
            Column { order, values }
        })
        .collect();

    let mut logits = vec![params.base_score; n];
    let total_loss = |z: &[f64]| -> f64 {
        z.iter()
            .zip(labels)
            .map(|(&z, &y)| logistic_loss(z, y))
            .sum()
    };
    let mut loss = total_loss(&logits);
    let mut losses = vec![loss];
    let mut trees = Vec::with_capacity(params.rounds);
    let (mut g, mut h) = (vec![0.0; n], vec![0.0; n]);
    let mut candidate = vec![0.0; n];
    for round in 0..params.rounds {
        for i in 0..n {
            (g[i], h[i]) = grad_hess(logits[i], labels[i]);
        }
        let (tree, out) = grow(rows, &columns, &g, &h, params);
        for i in 0..n {
            candidate[i] = logits[i] + params.eta * out[i];
        }
        let next = total_loss(&candidate);
        if next > loss {
            return Fit {
                trees,
                losses,
                stopped_at: Some(round),
            };
        }
        std::mem::swap(&mut logits, &mut candidate);
        loss = next;
        losses.push(loss);
        trees.push(tree);
    }
    Fit {
        trees,
        losses,
        stopped_at: None,
    }
}
