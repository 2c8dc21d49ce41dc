use chrono::{Datelike, Days, NaiveDate};

use super::SynthConfig;
use crate::calendar::whole_months_between;
use crate::error::{Error, Result};
use crate::gbdt::sigmoid;

/// Latent state behind the planted default process.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedState {
    pub n_months: usize,
    /// Guarantors backing the firm's running contract, per month (firm-major).
    pub in_degree: Vec<u16>,
    /// Borrowers the firm backs on running contracts, per month (firm-major).
    pub out_degree: Vec<u16>,
    pub community: Vec<usize>,
    pub community_members: Vec<Vec<usize>>,
    pub profile_risk: Vec<f64>,
    /// Month of each firm's first default, if any.
    pub first_default: Vec<Option<u32>>,
    /// Intercept used for the run (calibrated unless fixed by the config).
    pub intercept: f64,
}

impl PlantedState {
    fn at(&self, v: &[u16], firm: usize, month: usize) -> f64 {
        v[firm * self.n_months + month.min(self.n_months - 1)] as f64
    }

    /// Latent authority in [0, 1]: saturates at four guarantors.
    pub fn authority(&self, firm: usize, month: usize) -> f64 {
        self.at(&self.in_degree, firm, month).min(4.0) / 4.0
    }

    /// Latent hub value in [0, 1).
    pub fn hub(&self, firm: usize, month: usize) -> f64 {
        1.0 - (-self.at(&self.out_degree, firm, month) / 3.0).exp()
    }

    /// Share of the firm's fellow community members that defaulted before `month`.
    pub fn community_pressure(&self, firm: usize, month: usize) -> f64 {
        let members = &self.community_members[self.community[firm]];
        if members.len() < 2 {
            return 0.0;
        }
        let hit = members
            .iter()
            .filter(|&&m| m != firm && self.first_default[m].is_some_and(|d| (d as usize) < month))
            .count();
        hit as f64 / (members.len() - 1) as f64
    }
}

/// Per-installment default probability of `firm` in timeline month `month`
/// (before the late-life reduction).
pub fn planted_hazard(firm: usize, month: usize, state: &PlantedState, cfg: &SynthConfig) -> f64 {
    let h = &cfg.hazard;
    let quarter_end = (cfg.start_month.month0() as usize + month) % 3 == 2;
    let z = state.intercept
        + h.beta_authority * state.authority(firm, month)
        + h.beta_hub * state.hub(firm, month)
        + h.beta_community * state.community_pressure(firm, month)
        + h.beta_quarter_end * f64::from(u8::from(quarter_end))
        + h.beta_profile * state.profile_risk[firm];
    sigmoid(z)
}

/// One scheduled installment with its pre-drawn uniforms.
#[derive(Clone, Debug)]
pub(crate) struct Installment {
    pub firm: usize,
    pub month: usize,
    pub late_life: bool,
    pub u_default: f64,
    pub u_unpaid: f64,
    pub u_days: f64,
}

impl Installment {
    pub fn new(firm: usize, month: usize, start: NaiveDate, due: NaiveDate, u: [f64; 3]) -> Self {
        Installment {
            firm,
            month,
            late_life: whole_months_between(start, due) > 12,
            u_default: u[0],
            u_unpaid: u[1],
            u_days: u[2],
        }
    }
}

/// Runs the default process month by month; `installments` must be sorted by month.
/// Returns the default flag of every installment and fills `first_default`.
pub(crate) fn simulate(
    state: &mut PlantedState,
    cfg: &SynthConfig,
    installments: &[Installment],
) -> Vec<bool> {
    state.first_default.iter_mut().for_each(|d| *d = None);
    let mut out = vec![false; installments.len()];
    let mut i = 0;
    while i < installments.len() {
        let month = installments[i].month;
        let mut j = i;
        while j < installments.len() && installments[j].month == month {
            let inst = &installments[j];
            let mut p = planted_hazard(inst.firm, month, state, cfg);
            if inst.late_life {
                p *= cfg.late_life_factor;
            }
            out[j] = inst.u_default < p;
            j += 1;
        }
        for k in i..j {
            let firm = installments[k].firm;
            if out[k] && state.first_default[firm].is_none() {
                state.first_default[firm] = Some(month as u32);
            }
        }
        i = j;
    }
    out
}

fn realized_rate(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&d| d).count() as f64 / flags.len() as f64
}

pub(crate) const CALIBRATION_STEPS: usize = 20;
const INTERCEPT_RANGE: (f64, f64) = (-15.0, 5.0);

/// Bisection on the intercept so the realized default rate meets the target.
/// Every pilot run reuses the same uniforms, so the rate is monotone in the intercept.
pub(crate) fn calibrate(
    state: &mut PlantedState,
    cfg: &SynthConfig,
    installments: &[Installment],
) -> Result<f64> {
    let target = cfg.target_default_rate;
    let rate_at = |b: f64, state: &mut PlantedState| {
        state.intercept = b;
        realized_rate(&simulate(state, cfg, installments))
    };
    let (mut lo, mut hi) = INTERCEPT_RANGE;
    let (r_lo, r_hi) = (rate_at(lo, state), rate_at(hi, state));
    if !(r_lo <= target && target <= r_hi) {
        return Err(Error::Infeasible(format!(
            "target default rate {target} outside the reachable range [{r_lo:.4}, {r_hi:.4}]"
        )));
    }
    let mut best = (f64::INFINITY, lo);
    for _ in 0..CALIBRATION_STEPS {
        let mid = lo + (hi - lo) / 2.0;
        let r = rate_at(mid, state);
        if (r - target).abs() < best.0 {
            best = ((r - target).abs(), mid);
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.1)
}

/// Payment date of an installment given whether it defaulted.
pub(crate) fn paid_date(
    inst: &Installment,
    due: NaiveDate,
    defaulted: bool,
    end: NaiveDate,
) -> Option<NaiveDate> {
    if !defaulted {
        return Some(due - Days::new((inst.u_days * 11.0) as u64));
    }
    if inst.u_unpaid < 0.5 {
        return None;
    }
    let paid = due + Days::new(1 + (inst.u_days * 60.0) as u64);
    (paid < end).then_some(paid)
}
