//! Seeded synthetic loan records with a planted default process.
//!
//! Firms are arranged in guarantee components drawn from a size mix: many
//! small sparse random graphs plus a few large ones grown by preferential
//! attachment. Every borrower runs a chain of back-to-back contracts with
//! quarterly installments. An installment defaults with a logistic hazard in
//! the borrower's latent authority, hub value, community defaults so far,
//! quarter-end timing and firm profile.

mod config;
mod defaults;
mod loans;
mod topology;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{ComponentMix, HazardCoefficients, LoanPeriodMix, SynthConfig, SYNTH_KEYS};
pub use defaults::{planted_hazard, PlantedState};

use crate::error::Result;
use crate::loan_data::{LoanDataset, Repayment};
use defaults::Installment;
use loans::month_index;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generates a dataset. A pure function of `cfg`.
pub fn generate(cfg: &SynthConfig) -> Result<LoanDataset> {
    generate_with_state(cfg).map(|(ds, _, _)| ds)
}

/// [`generate`], also returning the latent state and the firm ids by index.
pub fn generate_with_state(cfg: &SynthConfig) -> Result<(LoanDataset, PlantedState, Vec<String>)> {
    cfg.validate()?;
    let n = cfg.n_customers;
    let n_months = cfg.n_months as usize;
    let end = cfg.end_date();

    let topo = topology::build_topology(cfg, &mut stream(cfg.seed, 1))?;

    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(cfg.seed, 2));
    let width = n.to_string().len().max(5);
    let ids: Vec<String> = perm.iter().map(|p| format!("C{:0width$}", p + 1)).collect();

    let mut rng = stream(cfg.seed, 3);
    let (customers, profile_risk): (Vec<_>, Vec<_>) = ids
        .iter()
        .map(|id| loans::draw_customer(cfg, &mut rng, id.clone()))
        .unzip();

    let active_from = loans::activation_months(cfg, &mut stream(cfg.seed, 4), &topo);
    let mut guarantors_of: Vec<Vec<(usize, i32)>> = vec![Vec::new(); n];
    for (&(g, b), &m) in topo.relations.iter().zip(&active_from) {
        guarantors_of[b].push((g, m));
    }

    let mut rng = stream(cfg.seed, 5);
    let mut contracts = Vec::new();
    let mut guarantees = Vec::new();
    let mut borrower_of = Vec::new();
    let mut in_degree = vec![0u16; n * n_months];
    let mut relation_months = vec![vec![false; n_months]; topo.relations.len()];
    let mut next_id = 1;
    for v in (0..n).filter(|&v| topo.borrower[v]) {
        for contract in loans::draw_contracts(cfg, &mut rng, &customers[v], &mut next_id) {
            let rows = loans::draw_guarantees(cfg, &mut rng, &contract, &guarantors_of[v], &ids);
            let first = month_index(cfg, contract.start_date).max(0) as usize;
            let last = (month_index(cfg, contract.maturity()) as usize).min(n_months - 1);
            for t in first..=last {
                let slot = &mut in_degree[v * n_months + t];
                *slot = (*slot).max(rows.len() as u16);
            }
            for &(g, m) in &guarantors_of[v] {
                if m <= month_index(cfg, contract.start_date) {
                    let r = topo
                        .relations
                        .binary_search(&(g, v))
                        .expect("known relation");
                    relation_months[r][first..=last]
                        .iter_mut()
                        .for_each(|x| *x = true);
                }
            }
            guarantees.extend(rows);
            borrower_of.push(v);
            contracts.push(contract);
        }
    }
    let mut out_degree = vec![0u16; n * n_months];
    for (r, &(g, _)) in topo.relations.iter().enumerate() {
        for (t, _) in relation_months[r].iter().enumerate().filter(|(_, &on)| on) {
            out_degree[g * n_months + t] += 1;
        }
    }

    let mut rng = stream(cfg.seed, 6);
    let mut repayments = Vec::new();
    let mut installments = Vec::new();
    for (k, contract) in contracts.iter().enumerate() {
        let count = contract.term_months / 3;
        for i in 1..=count {
            let due = crate::calendar::add_months(contract.start_date, 3 * i);
            if due >= end {
                break;
            }
            let u = [rng.random(), rng.random(), rng.random()];
            let month = month_index(cfg, due) as usize;
            installments.push(Installment::new(
                borrower_of[k],
                month,
                contract.start_date,
                due,
                u,
            ));
            repayments.push(Repayment {
                contract_id: contract.contract_id.clone(),
                due_date: due,
                amount_due: (contract.loan_amount / count as i64).max(1),
                paid_date: None,
                amount_paid: 0,
            });
        }
    }
    let mut order: Vec<usize> = (0..installments.len()).collect();
    order.sort_by_key(|&i| installments[i].month);
    let sorted: Vec<Installment> = order.iter().map(|&i| installments[i].clone()).collect();

    let mut community_members = vec![Vec::new(); topo.community.iter().max().map_or(0, |c| c + 1)];
    for (v, &c) in topo.community.iter().enumerate() {
        community_members[c].push(v);
    }
    let mut state = PlantedState {
        n_months,
        in_degree,
        out_degree,
        community: topo.community.clone(),
        community_members,
        profile_risk,
        first_default: vec![None; n],
        intercept: 0.0,
    };
    state.intercept = match cfg.hazard.intercept {
        Some(b) => b,
        None => defaults::calibrate(&mut state, cfg, &sorted)?,
    };
    let flags = defaults::simulate(&mut state, cfg, &sorted);
    for (pos, &i) in order.iter().enumerate() {
        let r = &mut repayments[i];
        r.paid_date = defaults::paid_date(&sorted[pos], r.due_date, flags[pos], end);
        if r.paid_date.is_some() {
            r.amount_paid = r.amount_due;
        }
    }

    let mut customers = customers;
    customers.sort_by(|a, b| a.customer_id.cmp(&b.customer_id));
    Ok((
        LoanDataset {
            customers,
            contracts,
            guarantees,
            repayments,
        },
        state,
        ids,
    ))
}

/// How strongly defaults cluster by planted community: the mean absolute
/// difference between each community's firm default rate and the overall
/// rate. Only firms with installments count; communities need two of them.
pub fn clustering_index(ds: &LoanDataset, state: &PlantedState, ids: &[String]) -> f64 {
    let with_installments: std::collections::HashSet<&str> = {
        let by_contract: std::collections::HashMap<&str, &str> = ds
            .contracts
            .iter()
            .map(|c| (c.contract_id.as_str(), c.borrower_id.as_str()))
            .collect();
        ds.repayments
            .iter()
            .map(|r| by_contract[r.contract_id.as_str()])
            .collect()
    };
    let firms: Vec<usize> = (0..ids.len())
        .filter(|&v| with_installments.contains(ids[v].as_str()))
        .collect();
    if firms.is_empty() {
        return 0.0;
    }
    let defaulted = |v: usize| f64::from(u8::from(state.first_default[v].is_some()));
    let global = firms.iter().map(|&v| defaulted(v)).sum::<f64>() / firms.len() as f64;
    let mut per: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for &v in &firms {
        let e = per.entry(state.community[v]).or_default();
        e.0 += defaulted(v);
        e.1 += 1;
    }
    let gaps: Vec<f64> = per
        .values()
        .filter(|(_, n)| *n >= 2)
        .map(|(d, n)| (d / *n as f64 - global).abs())
        .collect();
    if gaps.is_empty() {
        0.0
    } else {
        gaps.iter().sum::<f64>() / gaps.len() as f64
    }
}
