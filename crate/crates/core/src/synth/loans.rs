use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::topology::Topology;
use super::SynthConfig;
use crate::calendar::{add_months, month_number};
use crate::loan_data::{Contract, Customer, EnterpriseScale, Guarantee, Money};

pub(crate) const INDUSTRIES: [(&str, f64); 8] = [
    ("manufacturing", 0.10),
    ("wholesale", 0.20),
    ("retail", 0.25),
    ("construction", 0.35),
    ("transport", 0.15),
    ("textiles", 0.30),
    ("chemicals", 0.05),
    ("services", 0.00),
];
pub(crate) const CAPITAL_RETURN: [&str; 3] = ["bullet", "equal_principal", "equal_installment"];
pub(crate) const INTEREST_RETURN: [&str; 3] = ["monthly", "quarterly", "at_maturity"];

const SCALE_WEIGHTS: [f64; 4] = [0.35, 0.35, 0.20, 0.10];

struct ScaleProfile {
    capital: (f64, f64),
    employees: (u32, u32),
    risk: f64,
}

fn scale_profile(scale: EnterpriseScale) -> ScaleProfile {
    match scale {
        EnterpriseScale::Micro => ScaleProfile {
            capital: (1e5, 1e6),
            employees: (1, 9),
            risk: 0.6,
        },
        EnterpriseScale::Small => ScaleProfile {
            capital: (1e6, 5e6),
            employees: (10, 49),
            risk: 0.4,
        },
        EnterpriseScale::Medium => ScaleProfile {
            capital: (5e6, 3e7),
            employees: (50, 299),
            risk: 0.2,
        },
        EnterpriseScale::Large => ScaleProfile {
            capital: (3e7, 2e8),
            employees: (300, 2000),
            risk: 0.0,
        },
    }
}

/// Draws a firm profile and its latent profile risk.
pub(crate) fn draw_customer(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    customer_id: String,
) -> (Customer, f64) {
    let mut x = rng.random::<f64>();
    let mut scale = EnterpriseScale::Large;
    for (s, w) in EnterpriseScale::ALL.into_iter().zip(SCALE_WEIGHTS) {
        if x < w {
            scale = s;
            break;
        }
        x -= w;
    }
    let profile = scale_profile(scale);
    let (lo, hi) = profile.capital;
    let capital = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
    let employees = rng.random_range(profile.employees.0..=profile.employees.1);
    let (nature, industry_risk) = INDUSTRIES[rng.random_range(0..INDUSTRIES.len())];
    let first = NaiveDate::from_ymd_opt(1995, 1, 1).expect("valid date");
    let span = (cfg.start_month - first).num_days().max(1) as u64;
    let registration_date = first + Days::new(rng.random_range(0..span));
    let customer = Customer {
        customer_id,
        business_nature: nature.to_string(),
        registered_capital: round_to(capital, 1000),
        enterprise_scale: scale,
        employee_count: employees,
        registration_date,
    };
    (customer, profile.risk + industry_risk)
}

fn round_to(x: f64, unit: Money) -> Money {
    ((x / unit as f64).round() as Money * unit).max(unit)
}

/// Month index of a date relative to the timeline start.
pub(crate) fn month_index(cfg: &SynthConfig, d: NaiveDate) -> i32 {
    month_number(d) - month_number(cfg.start_month)
}

fn draw_term(mix: &[f64; 3], rng: &mut ChaCha8Rng) -> u32 {
    let x = rng.random::<f64>();
    if x < mix[0] {
        12
    } else if x < mix[0] + mix[1] {
        *[24, 36].choose(rng).expect("non-empty")
    } else {
        *[48, 60].choose(rng).expect("non-empty")
    }
}

fn entry_date(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> NaiveDate {
    let month = if cfg.volume_growth > 0.0 {
        let span = (cfg.n_months * 3 / 4).max(12);
        let weights: Vec<f64> = (0..span)
            .map(|t| (1.0 + cfg.volume_growth).powf(t as f64 / 12.0))
            .collect();
        let mut x = rng.random::<f64>() * weights.iter().sum::<f64>();
        let mut pick = span - 1;
        for (t, w) in weights.iter().enumerate() {
            if x < *w {
                pick = t as u32;
                break;
            }
            x -= w;
        }
        pick
    } else {
        rng.random_range(0..12)
    };
    let first = add_months(cfg.start_month, month);
    let days = (add_months(first, 1) - first).num_days() as u64;
    first + Days::new(rng.random_range(0..days))
}

/// Contract chain of one borrower: back-to-back loans from its entry date
/// until the end of the timeline.
pub(crate) fn draw_contracts(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    customer: &Customer,
    next_id: &mut usize,
) -> Vec<Contract> {
    let mix = cfg.effective_loan_mix();
    let end = cfg.end_date();
    let mut start = entry_date(cfg, rng);
    let mut out = Vec::new();
    while start < end {
        let term = draw_term(&mix, rng);
        let share = 0.1 + 0.5 * rng.random::<f64>();
        let contract = Contract {
            contract_id: format!("K{:06}", *next_id),
            borrower_id: customer.customer_id.clone(),
            loan_amount: round_to(customer.registered_capital as f64 * share, 1000).max(10_000),
            start_date: start,
            term_months: term,
            capital_return_type: CAPITAL_RETURN.choose(rng).expect("non-empty").to_string(),
            interest_return_type: INTEREST_RETURN.choose(rng).expect("non-empty").to_string(),
        };
        *next_id += 1;
        start = contract.maturity() + Days::new(rng.random_range(0..=15));
        out.push(contract);
    }
    out
}

/// Month from which each relation backs new contracts.
pub(crate) fn activation_months(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    topology: &Topology,
) -> Vec<i32> {
    let span = (cfg.n_months * 5 / 6).max(1);
    topology
        .relations
        .iter()
        .map(|_| {
            if !cfg.network_growth || rng.random_bool(0.05) {
                0
            } else {
                (span as f64 * rng.random::<f64>().sqrt()) as i32
            }
        })
        .collect()
}

/// Guarantee rows for a contract: every relation into the borrower that is
/// active when the contract starts.
pub(crate) fn draw_guarantees(
    cfg: &SynthConfig,
    rng: &mut ChaCha8Rng,
    contract: &Contract,
    guarantors: &[(usize, i32)],
    ids: &[String],
) -> Vec<Guarantee> {
    let month = month_index(cfg, contract.start_date);
    guarantors
        .iter()
        .filter(|&&(_, active_from)| active_from <= month)
        .map(|&(g, _)| Guarantee {
            contract_id: contract.contract_id.clone(),
            guarantor_id: ids[g].clone(),
            guarantee_amount: contract.loan_amount,
            signed_date: contract.start_date - Days::new(rng.random_range(0..=14)),
        })
        .collect()
}
