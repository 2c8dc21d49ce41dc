//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Every tolerance is a named constant below.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gnrisk::community::Method;
use gnrisk::eval::{last_outcome_quarter, run_rolling, spearman, RollingConfig, RollingReport};
use gnrisk::features::{
    assemble, Ablation, Category, FeatureMatrix, FeatureSchema, Snapshot, SnapshotOptions,
};
use gnrisk::gbdt::{train_traced, TrainParams};
use gnrisk::graph::{build_network, components, overall_stats};
use gnrisk::loan_data::{join_records, LoanDataset, LoanIndex};
use gnrisk::synth::{generate, SynthConfig};
use gnrisk::{selftest, Quarter};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(10);
const MONOTONE_FIXTURES: usize = 20;
const MONOTONE_ROUNDS: usize = 50;
const MONOTONE_MAX_ROWS: usize = 200;
const TARGET_DEFAULT_RATE: f64 = 0.0677;
const DEFAULT_RATE_TOL: f64 = 0.01;
const MIN_SMALL_COMPONENT_SHARE: f64 = 0.80;
const TARGET_ONE_YEAR_SHARE: f64 = 0.7127;
const ONE_YEAR_SHARE_TOL: f64 = 0.05;
const MIN_FIRST_YEAR_DEFAULT_SHARE: f64 = 0.95;
const CALIBRATION_TIME_LIMIT: Duration = Duration::from_secs(60);
const MIN_AUC_MARGIN: f64 = 0.02;
const MIN_WINDOW_WINS: usize = 8;
const MIN_MEAN_AUC_H: f64 = 0.75;
const EXTRA_SEEDS: [u64; 4] = [1, 2, 3, 4];
const MIN_ORDERED_SEEDS: usize = 4;
const TABLE_TIME_LIMIT: Duration = Duration::from_secs(300);
const MIN_AUTHORITY_RHO: f64 = 0.15;
const MAX_HUB_RHO: f64 = -0.05;
const LEAKAGE_CASES: u64 = 50;

struct Line {
    pass: bool,
    name: &'static str,
    detail: String,
}

fn line(name: &'static str, pass: bool, detail: String) -> Line {
    Line { pass, name, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

fn config(pairs: &[(&str, &str)]) -> SynthConfig {
    let mut cfg = SynthConfig::default();
    for (k, v) in pairs {
        assert!(cfg.set(k, v).unwrap(), "unknown key {k}");
    }
    cfg
}

fn rolling(ds: &LoanDataset, ablations: &str) -> RollingReport {
    let mut cfg = RollingConfig::default();
    cfg.set("ablations", ablations).unwrap();
    run_rolling(ds, &cfg).unwrap()
}

fn mean(report: &RollingReport, a: Ablation) -> f64 {
    report.mean_auc[&a].unwrap_or(f64::NAN)
}

fn centrality_oracles() -> Line {
    let t = Instant::now();
    let suites = [
        selftest::directed_centrality(),
        selftest::undirected_centrality(),
    ];
    let elapsed = t.elapsed();
    let cases: usize = suites.iter().map(|s| s.cases).sum();
    let failed: usize = suites.iter().map(|s| s.failed).sum();
    line(
        "centrality oracle equivalence (spectral 1e-6, paths 1e-9, k-shell exact)",
        failed == 0 && elapsed < ORACLE_TIME_LIMIT,
        format!(
            "{cases} graphs, {failed} mismatches, {} (limit {})",
            secs(elapsed),
            secs(ORACLE_TIME_LIMIT)
        ),
    )
}

fn gbdt_oracles() -> Line {
    let t = Instant::now();
    let s = selftest::boosting();
    let elapsed = t.elapsed();
    line(
        "boosted-tree oracle equivalence (splits exact, leaf 1e-8, gradients 1e-4)",
        s.passed() && elapsed < ORACLE_TIME_LIMIT,
        format!(
            "{} checks, {} mismatches, {} (limit {})",
            s.cases,
            s.failed,
            secs(elapsed),
            secs(ORACLE_TIME_LIMIT)
        ),
    )
}

fn training_monotonicity() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70a5);
    let mut bad = Vec::new();
    let mut stopped = 0;
    for fixture in 0..MONOTONE_FIXTURES {
        let n = rng.random_range(10..=MONOTONE_MAX_ROWS);
        let d = rng.random_range(1..=5);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let mut labels: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(rng.random_bool(1.0 / (1.0 + (-r[0] * 1.5).exp()))))
            .collect();
        labels[0] = 0;
        labels[1] = 1;
        let m = FeatureMatrix::new(
            Quarter::new(2013, 1).unwrap(),
            (0..d).map(|j| format!("x{j}")).collect(),
            vec![Category::BasicProfile; d],
            (0..n).map(|i| format!("C{i:03}")).collect(),
            rows,
            Some(labels),
        )
        .unwrap();
        let params = TrainParams {
            rounds: MONOTONE_ROUNDS,
            ..TrainParams::default()
        };
        let (model, losses) = train_traced(&m, &params).unwrap();
        stopped += usize::from(model.stopped_at.is_some());
        if losses.windows(2).any(|w| w[1] > w[0]) {
            bad.push(fixture);
        }
    }
    line(
        "training loss non-increasing over every round",
        bad.is_empty(),
        format!(
            "{MONOTONE_FIXTURES} fixtures x {MONOTONE_ROUNDS} rounds, increases in {bad:?}, {stopped} stopped early by the loss guard"
        ),
    )
}

fn calibration(ds: &LoanDataset, generated_in: Duration) -> Vec<Line> {
    let t = Instant::now();
    let s = overall_stats(ds);
    let elapsed = generated_in + t.elapsed();
    let small = s
        .component_size_vs_default_rate
        .iter()
        .find(|b| b.max_nodes == Some(49))
        .map_or(0.0, |b| b.component_share);
    let one_year = s
        .loan_period_histogram
        .iter()
        .find(|b| b.label == "one_year")
        .map_or(0.0, |b| b.share);
    let first_year = s.first_year_default_share.unwrap_or(0.0);
    vec![
        line(
            "calibration: repayment default rate",
            (s.default_rate - TARGET_DEFAULT_RATE).abs() <= DEFAULT_RATE_TOL,
            format!(
                "{:.4} (target {TARGET_DEFAULT_RATE} +/- {DEFAULT_RATE_TOL})",
                s.default_rate
            ),
        ),
        line(
            "calibration: components under 50 nodes",
            small >= MIN_SMALL_COMPONENT_SHARE,
            format!("{small:.3} (min {MIN_SMALL_COMPONENT_SHARE})"),
        ),
        line(
            "calibration: one-year loan share",
            (one_year - TARGET_ONE_YEAR_SHARE).abs() <= ONE_YEAR_SHARE_TOL,
            format!("{one_year:.4} (target {TARGET_ONE_YEAR_SHARE} +/- {ONE_YEAR_SHARE_TOL})"),
        ),
        line(
            "calibration: defaults within 12 months of contract start",
            first_year >= MIN_FIRST_YEAR_DEFAULT_SHARE,
            format!("{first_year:.4} (min {MIN_FIRST_YEAR_DEFAULT_SHARE})"),
        ),
        line(
            "calibration: generation and statistics runtime",
            elapsed < CALIBRATION_TIME_LIMIT,
            format!("{} (limit {})", secs(elapsed), secs(CALIBRATION_TIME_LIMIT)),
        ),
    ]
}

fn ablation_ordering(ds: &LoanDataset, started: Instant) -> Vec<Line> {
    let report = rolling(ds, "NW,NW+CM,NW+N,H");
    let (h, nw, nwn) = (
        mean(&report, Ablation::Hybrid),
        mean(&report, Ablation::NodeWise),
        mean(&report, Ablation::NodeWiseNetwork),
    );
    let wins = report
        .windows
        .iter()
        .filter(|w| {
            let auc = |a| w.result(a).and_then(|r| r.auc);
            matches!((auc(Ablation::Hybrid), auc(Ablation::NodeWise)), (Some(x), Some(y)) if x >= y)
        })
        .count();
    let recall = |a| report.mean_recall[&a].unwrap_or(f64::NAN);
    let (rh, rnw) = (recall(Ablation::Hybrid), recall(Ablation::NodeWise));

    let mut ordered = vec![(42, h >= nwn && nwn >= nw, (h, nwn, nw))];
    for seed in EXTRA_SEEDS {
        let ds = generate(&config(&[("seed", &seed.to_string())])).unwrap();
        let r = rolling(&ds, "NW,NW+N,H");
        let m = (
            mean(&r, Ablation::Hybrid),
            mean(&r, Ablation::NodeWiseNetwork),
            mean(&r, Ablation::NodeWise),
        );
        ordered.push((seed, m.0 >= m.1 && m.1 >= m.2, m));
    }
    let elapsed = started.elapsed();
    let n_ordered = ordered.iter().filter(|o| o.1).count();
    let per_seed: Vec<String> = ordered
        .iter()
        .map(|(s, ok, m)| {
            format!(
                "{s}:{:.3}/{:.3}/{:.3}{}",
                m.0,
                m.1,
                m.2,
                if *ok { "" } else { "!" }
            )
        })
        .collect();
    vec![
        line(
            "rolling AUC: mean H exceeds mean NW",
            h - nw >= MIN_AUC_MARGIN,
            format!(
                "H {h:.4}, NW {nw:.4}, margin {:.4} (min {MIN_AUC_MARGIN})",
                h - nw
            ),
        ),
        line(
            "rolling AUC: H >= NW window by window",
            wins >= MIN_WINDOW_WINS,
            format!(
                "{wins}/{} windows (min {MIN_WINDOW_WINS})",
                report.windows.len()
            ),
        ),
        line(
            "rolling AUC: mean H level",
            h >= MIN_MEAN_AUC_H,
            format!("{h:.4} (min {MIN_MEAN_AUC_H})"),
        ),
        line(
            "rolling AUC: H >= NW+N >= NW across seeds",
            n_ordered >= MIN_ORDERED_SEEDS,
            format!(
                "{n_ordered}/{} seeds (min {MIN_ORDERED_SEEDS}) [{}]",
                ordered.len(),
                per_seed.join(" ")
            ),
        ),
        line(
            "rolling recall: mean H exceeds mean NW",
            rh > rnw,
            format!(
                "H {rh:.4}, NW {rnw:.4} at threshold {}",
                report.config.recall_threshold
            ),
        ),
        line(
            "rolling AUC runtime, five seeds",
            elapsed < TABLE_TIME_LIMIT,
            format!("{} (limit {})", secs(elapsed), secs(TABLE_TIME_LIMIT)),
        ),
    ]
}

/// Rank correlation between HITS scores and each node's repayment default
/// rate on the largest component of the final snapshot.
fn hits_vs_defaults(ds: &LoanDataset) -> Line {
    let as_of = last_outcome_quarter(ds).unwrap().last_day();
    let net = build_network(&join_records(ds), as_of);
    let comps = components(&net);
    let largest = &comps[0];
    let scores = gnrisk::centrality::score_component(largest);
    let index = LoanIndex::new(ds);
    let (mut auth, mut hub, mut rate) = (Vec::new(), Vec::new(), Vec::new());
    for (local, &v) in largest.nodes.iter().enumerate() {
        let c = index.customer_by_id[net.nodes[v].as_str()];
        let reps: Vec<usize> = index.contracts_of[c]
            .iter()
            .flat_map(|&k| index.repayments_of[k].iter().copied())
            .collect();
        if reps.is_empty() {
            continue;
        }
        let bad = reps
            .iter()
            .filter(|&&r| ds.repayments[r].default_flag())
            .count();
        rate.push(bad as f64 / reps.len() as f64);
        auth.push(scores.nodes[local].authority);
        hub.push(scores.nodes[local].hub);
    }
    let ra = spearman(&auth, &rate).unwrap_or(f64::NAN);
    let rh = spearman(&hub, &rate).unwrap_or(f64::NAN);
    line(
        "largest component: default rate vs authority and hub",
        ra > MIN_AUTHORITY_RHO && rh < MAX_HUB_RHO,
        format!(
            "{} nodes, rho(authority) {ra:.3} (> {MIN_AUTHORITY_RHO}), rho(hub) {rh:.3} (< {MAX_HUB_RHO})",
            rate.len()
        ),
    )
}

fn network_importance_growth() -> Line {
    let ds = generate(&config(&[("network_growth", "true")])).unwrap();
    let report = rolling(&ds, "H");
    let shares: Vec<f64> = report
        .windows
        .iter()
        .map(|w| w.importance.map_or(f64::NAN, |g| g.network))
        .collect();
    let (first, last) = (shares[0], shares[shares.len() - 1]);
    line(
        "growing network: NS importance share rises from first to last window",
        last > first,
        format!("first {first:.3}, last {last:.3}"),
    )
}

fn anti_leakage() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1ea4);
    let mut bad = Vec::new();
    let mut rows = 0;
    for case in 0..LEAKAGE_CASES {
        let seed: u64 = rng.random();
        let n = rng.random_range(120..300).to_string();
        let cfg = config(&[
            ("seed", &seed.to_string()),
            ("n_customers", &n),
            ("n_months", "36"),
            ("share_large", "0"),
            ("mid_max_size", "80"),
            (
                "network_growth",
                if case % 2 == 0 { "true" } else { "false" },
            ),
        ]);
        let ds = generate(&cfg).unwrap();
        let quarter = Quarter::new(2012, 2)
            .unwrap()
            .offset(rng.random_range(0..11));
        let opts = SnapshotOptions {
            method: if case % 3 == 0 {
                Method::LabelPropagation
            } else {
                Method::EdgeBetweenness
            },
            max_communities: 64,
        };
        let schema = FeatureSchema::from_dataset(&ds);
        let full = assemble(
            &ds,
            &schema,
            quarter,
            &Snapshot::build(&ds, quarter.last_day(), opts),
        )
        .unwrap();
        let cut = ds.truncated(quarter.end());
        let trunc = assemble(
            &cut,
            &schema,
            quarter,
            &Snapshot::build(&cut, quarter.last_day(), opts),
        )
        .unwrap();
        let bits = |m: &FeatureMatrix| -> Vec<Vec<u64>> {
            m.rows
                .iter()
                .map(|r| r.iter().map(|x| x.to_bits()).collect())
                .collect()
        };
        rows += full.n_rows();
        if full.customers != trunc.customers || bits(&full) != bits(&trunc) {
            bad.push(case);
        }
    }
    line(
        "features unchanged after deleting records dated on or after the cutoff",
        bad.is_empty(),
        format!("{LEAKAGE_CASES} dataset/quarter pairs, {rows} rows, differing cases {bad:?}"),
    )
}

fn snapshot_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn determinism() -> Line {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let data = data.to_str().unwrap();
    let run = |args: &[&str], out: &str| -> BTreeMap<String, Vec<u8>> {
        let out = tmp.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_gnrisk"))
            .args(args)
            .args(["--out-dir", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&status.stderr)
        );
        snapshot_dir(&out)
    };
    let mut same = Vec::new();
    let synth = ["synth", "--seed", "42"];
    let first = run(&synth, "data");
    same.push(("synth", first == run(&synth, "data")));
    let train = ["train", "--data-dir", data, "--quarter", "2013Q3"];
    same.push(("train", run(&train, "train") == run(&train, "train")));
    let roll = [
        "rolling",
        "--data-dir",
        data,
        "--windows",
        "3",
        "--rounds",
        "30",
    ];
    same.push(("rolling", run(&roll, "rolling") == run(&roll, "rolling")));
    let verdicts: Vec<String> = same
        .iter()
        .map(|(c, ok)| format!("{c} {}", if *ok { "identical" } else { "DIFFERENT" }))
        .collect();
    line(
        "synth, train and rolling are byte-identical across reruns",
        same.iter().all(|s| s.1),
        verdicts.join(", "),
    )
}

fn main() {
    let t = Instant::now();
    let mut lines = vec![
        centrality_oracles(),
        gbdt_oracles(),
        training_monotonicity(),
    ];

    let started = Instant::now();
    let bench = generate(&SynthConfig::default()).unwrap();
    lines.extend(calibration(&bench, started.elapsed()));
    lines.push(hits_vs_defaults(&bench));
    let started = Instant::now();
    lines.extend(ablation_ordering(&bench, started));
    lines.push(network_importance_growth());
    lines.push(anti_leakage());
    lines.push(determinism());

    println!();
    for l in &lines {
        println!(
            "{} {}: {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        );
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed, {}",
        lines.len() - failed,
        secs(t.elapsed())
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
