use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::Serialize;

use gnrisk::calendar::{add_months, month_start};
use gnrisk::centrality::{score_network, NodeScores};
use gnrisk::community::{community_default_rate, CommunityRiskTable, DefaultSet};
use gnrisk::eval::{auc, last_outcome_quarter, recall, run_rolling};
use gnrisk::features::{assemble, attach_labels, FeatureMatrix, FeatureSchema, Snapshot};
use gnrisk::gbdt::{train_traced, TreeEnsemble};
use gnrisk::graph::{build_network, components, diameter_stats, overall_stats};
use gnrisk::loan_data::{join_records, load_tables, write_tables, LoanDataset, TablePaths};
use gnrisk::selftest::run_all;
use gnrisk::synth::generate;
use gnrisk::{Error, Quarter};

use crate::manifest::{digest, Manifest};
use crate::settings::{CliError, Settings, DATA};
use crate::{CentralityArgs, Cli, Command, CommunityArgs, FeatureArgs, PredictArgs, TrainArgs};

type Result<T> = std::result::Result<T, CliError>;

/// What a subcommand read and wrote, for the manifest.
#[derive(Default)]
struct Run {
    settings: BTreeMap<String, String>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    settings: Settings,
    out: &'a Path,
}

pub fn run(cli: &Cli, matches: &ArgMatches) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("--threads: {e}")))?;

    let mut settings = Settings::default();
    let mut config = None;
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        settings.apply_file(path, &text)?;
        config = Some(digest(path)?);
    }
    for arg in &cli.overrides {
        settings.apply_override(arg)?;
    }
    let (_, sub) = matches.subcommand().expect("a subcommand is required");
    for (key, value) in cli.command.flag_settings(sub) {
        settings.apply(key, &value)?;
    }
    if matches.value_source("seed") == Some(ValueSource::CommandLine) {
        settings.apply("seed", &cli.seed.to_string())?;
    }

    let out = cli.out_dir.as_path();
    std::fs::create_dir_all(out).map_err(|e| CliError::data(format!("{}: {e}", out.display())))?;
    let ctx = Ctx { cli, settings, out };
    let run = match &cli.command {
        Command::Synth(_) => synth(&ctx)?,
        Command::Stats => stats(&ctx)?,
        Command::Graph(a) => graph(&ctx, a.as_of)?,
        Command::Centrality(a) => centrality(&ctx, a)?,
        Command::Communities(a) => communities(&ctx, a)?,
        Command::Features(a) => features(&ctx, a)?,
        Command::Train(a) => train(&ctx, a)?,
        Command::Predict(a) => predict(&ctx, a)?,
        Command::Rolling(_) => rolling(&ctx)?,
        Command::Selftest => selftest(&ctx)?,
    };

    let manifest = Manifest {
        tool: "gnrisk",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        settings: run.settings,
        config,
        inputs: run
            .inputs
            .iter()
            .map(|p| digest(p))
            .collect::<Result<_>>()?,
        outputs: run
            .outputs
            .iter()
            .map(|p| digest(p))
            .collect::<Result<_>>()?,
    };
    manifest.write(out)?;
    for p in &run.outputs {
        println!("wrote {}", p.display());
    }
    Ok(())
}

impl Ctx<'_> {
    fn load(&self) -> Result<(LoanDataset, Vec<PathBuf>)> {
        let paths = TablePaths::in_dir(&self.cli.data_dir);
        let ds = load_tables(&paths)?;
        Ok((ds, paths.all().iter().map(|p| p.to_path_buf()).collect()))
    }

    fn write(&self, name: &str, body: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out.join(name);
        std::fs::write(&path, body)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        Ok(path)
    }

    fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
        self.write(name, text)
    }

    fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(Error::from)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::data(e.to_string()))?;
        self.write(name, bytes)
    }
}

fn resolve_as_of(ds: &LoanDataset, given: Option<NaiveDate>) -> Result<NaiveDate> {
    given
        .or_else(|| last_outcome_quarter(ds).map(Quarter::last_day))
        .ok_or_else(|| CliError::data("dataset has no repayments; pass --as-of"))
}

fn synth(ctx: &Ctx) -> Result<Run> {
    let ds = generate(&ctx.settings.synth)?;
    let paths = write_tables(&ds, ctx.out)?;
    let mut outputs: Vec<PathBuf> = paths.all().iter().map(|p| p.to_path_buf()).collect();
    let cfg: String = ctx
        .settings
        .synth
        .to_settings()
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    outputs.push(ctx.write("synth.cfg", cfg)?);
    Ok(Run {
        settings: ctx.settings.synth_map(),
        inputs: Vec::new(),
        outputs,
    })
}

fn stats(ctx: &Ctx) -> Result<Run> {
    let (ds, inputs) = ctx.load()?;
    let outputs = overall_stats(&ds).write_to(ctx.out)?;
    Ok(Run {
        inputs,
        outputs,
        ..Run::default()
    })
}

#[derive(Serialize)]
struct ComponentRow {
    component: usize,
    nodes: usize,
    edges: usize,
    diameter: usize,
    defaulted: usize,
    default_rate: f64,
}

fn graph(ctx: &Ctx, as_of: Option<NaiveDate>) -> Result<Run> {
    let (ds, inputs) = ctx.load()?;
    let as_of = resolve_as_of(&ds, as_of)?;
    let records = join_records(&ds);
    let net = build_network(&records, as_of);
    let defaults = DefaultSet::as_of(&ds, as_of);
    let rows: Vec<ComponentRow> = components(&net)
        .iter()
        .map(|c| {
            let defaulted = c
                .nodes
                .iter()
                .filter(|&&v| defaults.contains(&net.nodes[v]))
                .count();
            ComponentRow {
                component: c.index,
                nodes: c.node_count(),
                edges: c.edge_count(),
                diameter: c.diameter(),
                defaulted,
                default_rate: defaulted as f64 / c.node_count() as f64,
            }
        })
        .collect();

    let mut complexity = Vec::new();
    if let Some(first) = ds.contracts.iter().map(|c| c.start_date).min() {
        let mut month = month_start(first);
        while month <= as_of {
            let month_end = (add_months(month, 1) - Days::new(1)).min(as_of);
            complexity.push(diameter_stats(&build_network(&records, month_end), month));
            month = add_months(month, 1);
        }
    }
    let outputs = vec![
        ctx.write_csv("components.csv", &rows)?,
        ctx.write_csv("complexity_by_month.csv", &complexity)?,
        ctx.write_json("complexity_by_month.json", &complexity)?,
    ];
    Ok(Run {
        settings: BTreeMap::from([("as_of".to_string(), as_of.to_string())]),
        inputs,
        outputs,
    })
}

#[derive(Serialize)]
struct CentralityRow<'a> {
    customer_id: &'a str,
    component: usize,
    component_size: usize,
    authority: f64,
    hub: f64,
    pagerank: f64,
    kshell: u32,
    eigenvector: f64,
    betweenness: f64,
    closeness: f64,
    in_degree: u32,
    out_degree: u32,
    defaulted: u8,
}

#[derive(Serialize)]
struct DecileRow {
    measure: &'static str,
    decile: usize,
    nodes: usize,
    min_score: f64,
    max_score: f64,
    defaulted: usize,
    default_rate: f64,
}

const MEASURES: [(&str, fn(&NodeScores) -> f64); 9] = [
    ("authority", |s| s.authority),
    ("hub", |s| s.hub),
    ("pagerank", |s| s.pagerank),
    ("kshell", |s| f64::from(s.kshell)),
    ("eigenvector", |s| s.eigenvector),
    ("betweenness", |s| s.betweenness),
    ("closeness", |s| s.closeness),
    ("in_degree", |s| f64::from(s.in_degree)),
    ("out_degree", |s| f64::from(s.out_degree)),
];

/// Splits nodes into ten rank groups per measure (ties broken by position)
/// and reports the default rate of each.
fn deciles(scores: &[NodeScores], defaulted: &[u8]) -> Vec<DecileRow> {
    let n = scores.len();
    let mut rows = Vec::new();
    if n == 0 {
        return rows;
    }
    for (measure, get) in MEASURES {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| get(&scores[a]).total_cmp(&get(&scores[b])).then(a.cmp(&b)));
        for d in 0..10 {
            let members = &order[d * n / 10..(d + 1) * n / 10];
            if members.is_empty() {
                continue;
            }
            let bad: usize = members.iter().map(|&i| usize::from(defaulted[i])).sum();
            rows.push(DecileRow {
                measure,
                decile: d + 1,
                nodes: members.len(),
                min_score: get(&scores[members[0]]),
                max_score: get(&scores[members[members.len() - 1]]),
                defaulted: bad,
                default_rate: bad as f64 / members.len() as f64,
            });
        }
    }
    rows
}

fn centrality(ctx: &Ctx, args: &CentralityArgs) -> Result<Run> {
    let (ds, inputs) = ctx.load()?;
    let as_of = resolve_as_of(&ds, args.as_of.as_of)?;
    let net = build_network(&join_records(&ds), as_of);
    let mut comps = components(&net);
    if args.largest_only {
        comps.truncate(1);
    }
    let scores = score_network(&net, &comps);
    let defaults = DefaultSet::as_of(&ds, as_of);

    let mut rows = Vec::new();
    let mut node_scores = Vec::new();
    for (ci, comp) in comps.iter().enumerate() {
        for &v in &comp.nodes {
            let s = scores.nodes[v];
            node_scores.push(s);
            rows.push(CentralityRow {
                customer_id: &net.nodes[v],
                component: comp.index,
                component_size: scores.component_size[ci],
                authority: s.authority,
                hub: s.hub,
                pagerank: s.pagerank,
                kshell: s.kshell,
                eigenvector: s.eigenvector,
                betweenness: s.betweenness,
                closeness: s.closeness,
                in_degree: s.in_degree,
                out_degree: s.out_degree,
                defaulted: u8::from(defaults.contains(&net.nodes[v])),
            });
        }
    }
    let flags: Vec<u8> = rows.iter().map(|r| r.defaulted).collect();
    let outputs = vec![
        ctx.write_csv("centrality.csv", &rows)?,
        ctx.write_csv("centrality_deciles.csv", &deciles(&node_scores, &flags))?,
    ];
    Ok(Run {
        settings: BTreeMap::from([
            ("as_of".to_string(), as_of.to_string()),
            ("largest_only".to_string(), args.largest_only.to_string()),
        ]),
        inputs,
        outputs,
    })
}

#[derive(Serialize)]
struct MembershipRow<'a> {
    customer_id: &'a str,
    component: usize,
    community: usize,
    local_community: usize,
    community_size: usize,
    community_default_rate: f64,
}

#[derive(Serialize)]
struct PartitionRow {
    component: usize,
    nodes: usize,
    communities: usize,
    modularity: f64,
}

fn communities(ctx: &Ctx, args: &CommunityArgs) -> Result<Run> {
    let (ds, inputs) = ctx.load()?;
    let as_of = resolve_as_of(&ds, args.as_of.as_of)?;
    let snap = Snapshot::build(&ds, as_of, ctx.settings.rolling.snapshot);
    let defaults = DefaultSet::as_of(&ds, as_of);
    let net = &snap.network;

    let mut members = Vec::new();
    let mut summary = Vec::new();
    let mut tables: Vec<CommunityRiskTable> = Vec::new();
    for (comp, part) in snap.components.iter().zip(&snap.communities.partitions) {
        let table = community_default_rate(part, comp, net, &defaults, None);
        for (local, &v) in comp.nodes.iter().enumerate() {
            let c = part.membership[local];
            members.push(MembershipRow {
                customer_id: &net.nodes[v],
                component: comp.index,
                community: snap.communities.community_of[v],
                local_community: c,
                community_size: table.communities[c].size,
                community_default_rate: table.communities[c].default_rate,
            });
        }
        summary.push(PartitionRow {
            component: comp.index,
            nodes: comp.node_count(),
            communities: part.community_count(),
            modularity: part.modularity,
        });
        tables.push(table);
    }
    let outputs = vec![
        ctx.write_csv("communities.csv", &members)?,
        ctx.write_csv("partitions.csv", &summary)?,
        ctx.write_json("community_risk.json", &tables)?,
    ];
    let mut settings = ctx.settings.snapshot_map();
    settings.insert("as_of".into(), as_of.to_string());
    Ok(Run {
        settings,
        inputs,
        outputs,
    })
}

/// The feature matrix of `quarter`, labelled when the next quarter's
/// outcomes lie inside the dataset.
fn quarter_matrix(ctx: &Ctx, ds: &LoanDataset, quarter: Quarter) -> Result<FeatureMatrix> {
    let snap = Snapshot::build(ds, quarter.last_day(), ctx.settings.rolling.snapshot);
    let matrix = assemble(ds, &FeatureSchema::from_dataset(ds), quarter, &snap)?;
    Ok(match last_outcome_quarter(ds) {
        Some(last) if quarter.next() <= last => attach_labels(matrix, ds, quarter.next()),
        _ => matrix,
    })
}

fn quarter_settings(ctx: &Ctx, quarter: Quarter) -> BTreeMap<String, String> {
    let mut m = ctx.settings.snapshot_map();
    m.insert("quarter".into(), quarter.to_string());
    m
}

fn features(ctx: &Ctx, args: &FeatureArgs) -> Result<Run> {
    let (ds, inputs) = ctx.load()?;
    let matrix = quarter_matrix(ctx, &ds, args.quarter)?;
    let (csv, sidecar) = matrix.write(ctx.out, &format!("features_{}", args.quarter))?;
    Ok(Run {
        settings: quarter_settings(ctx, args.quarter),
        inputs,
        outputs: vec![csv, sidecar],
    })
}

fn train(ctx: &Ctx, args: &TrainArgs) -> Result<Run> {
    let (ds, inputs) = ctx.load()?;
    let matrix = quarter_matrix(ctx, &ds, args.quarter)?;
    if matrix.labels.is_none() {
        return Err(Error::TimelineTooShort {
            required: args.quarter.next().to_string(),
            available: last_outcome_quarter(&ds)
                .map_or_else(|| "no quarter".into(), |q| q.to_string()),
        }
        .into());
    }
    let (model, losses) =
        train_traced(&matrix.project(args.ablation), &ctx.settings.rolling.train)?;
    let loss_csv: String = std::iter::once("round,loss\n".to_string())
        .chain(losses.iter().enumerate().map(|(k, l)| format!("{k},{l}\n")))
        .collect();
    let outputs = vec![
        ctx.write("model.json", model.to_json()?)?,
        ctx.write("train_loss.csv", loss_csv)?,
        ctx.write_json("importance.json", &model.importance())?,
    ];
    let mut settings = ctx.settings.model_map();
    settings.retain(|k, _| {
        !matches!(
            k.as_str(),
            "start" | "windows" | "ablations" | "recall_threshold"
        )
    });
    settings.insert("quarter".into(), args.quarter.to_string());
    settings.insert("ablation".into(), args.ablation.to_string());
    Ok(Run {
        settings,
        inputs,
        outputs,
    })
}

#[derive(Serialize)]
struct PredictionMetrics {
    quarter: Quarter,
    outcome_quarter: Quarter,
    instances: usize,
    positives: usize,
    recall_threshold: f64,
    auc: Option<f64>,
    recall: Option<f64>,
    notes: Vec<String>,
}

fn predict(ctx: &Ctx, args: &PredictArgs) -> Result<Run> {
    let (ds, mut inputs) = ctx.load()?;
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| CliError::data(format!("{}: {e}", args.model.display())))?;
    let model = TreeEnsemble::from_json(&text)
        .map_err(|e| CliError::data(format!("{}: {e}", args.model.display())))?;
    inputs.push(args.model.clone());

    let matrix = quarter_matrix(ctx, &ds, args.quarter)?;
    let columns = model
        .dimensions
        .iter()
        .map(|d| {
            matrix
                .dimensions
                .iter()
                .position(|x| x == d)
                .ok_or_else(|| {
                    CliError::data(format!(
                        "model feature `{d}` is not produced for this dataset"
                    ))
                })
        })
        .collect::<Result<Vec<usize>>>()?;
    let matrix = matrix.select_columns(&columns);
    let scores = model.predict_matrix(&matrix)?;

    let mut csv = String::from(if matrix.labels.is_some() {
        "customer_id,probability,label\n"
    } else {
        "customer_id,probability\n"
    });
    for (i, id) in matrix.customers.iter().enumerate() {
        csv.push_str(&format!("{id},{}", scores[i]));
        if let Some(labels) = &matrix.labels {
            csv.push_str(&format!(",{}", labels[i]));
        }
        csv.push('\n');
    }
    let mut outputs = vec![ctx.write("predictions.csv", csv)?];
    let threshold = ctx.settings.rolling.recall_threshold;
    if let Some(labels) = &matrix.labels {
        let mut notes = Vec::new();
        let auc = auc(&scores, labels).map_err(|e| notes.push(e.0)).ok();
        let recall = recall(&scores, labels, threshold)
            .map_err(|e| notes.push(e.0))
            .ok();
        let metrics = PredictionMetrics {
            quarter: args.quarter,
            outcome_quarter: args.quarter.next(),
            instances: matrix.n_rows(),
            positives: matrix.positives(),
            recall_threshold: threshold,
            auc,
            recall,
            notes,
        };
        outputs.push(ctx.write_json("metrics.json", &metrics)?);
    }
    let mut settings = quarter_settings(ctx, args.quarter);
    settings.insert("recall_threshold".into(), threshold.to_string());
    Ok(Run {
        settings,
        inputs,
        outputs,
    })
}

fn rolling(ctx: &Ctx) -> Result<Run> {
    let (ds, inputs) = ctx.load()?;
    let report = run_rolling(&ds, &ctx.settings.rolling)?;
    let outputs = report.write(ctx.out)?;
    for (a, v) in &report.mean_auc {
        match v {
            Some(v) => println!("mean AUC {a}: {v:.4}"),
            None => println!("mean AUC {a}: n/a"),
        }
    }
    Ok(Run {
        settings: ctx.settings.model_map(),
        inputs,
        outputs,
    })
}

fn selftest(ctx: &Ctx) -> Result<Run> {
    let reports = run_all();
    for r in &reports {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {} ({} cases, {} failed)",
            r.name, r.cases, r.failed
        );
        for f in &r.failures {
            println!("    {f}");
        }
    }
    let path = ctx.write_json("selftest.json", &reports)?;
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError {
            code: DATA,
            message: format!("{failed} oracle suite(s) failed; see {}", path.display()),
        });
    }
    Ok(Run {
        outputs: vec![path],
        ..Run::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deciles_split_ranks_evenly() {
        let scores: Vec<NodeScores> = (0..20)
            .map(|i| NodeScores {
                authority: i as f64,
                ..NodeScores::default()
            })
            .collect();
        let defaulted: Vec<u8> = (0..20).map(|i| u8::from(i >= 18)).collect();
        let rows = deciles(&scores, &defaulted);
        let auth: Vec<&DecileRow> = rows.iter().filter(|r| r.measure == "authority").collect();
        assert_eq!(auth.len(), 10);
        assert!(auth.iter().all(|r| r.nodes == 2));
        assert_eq!(auth[9].default_rate, 1.0);
        assert_eq!(auth[9].min_score, 18.0);
        assert_eq!(auth[0].default_rate, 0.0);
    }
}
