use chrono::NaiveDate;
use serde::Serialize;

use crate::calendar::parse_month;
use crate::config::{parse_flag, parse_value};
use crate::error::{Error, Result};

/// Shares of components by size class. The remainder is mid-size (50–299).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentMix {
    /// Fraction of components with fewer than 50 nodes.
    pub share_small: f64,
    /// Fraction of components with more than 300 nodes.
    pub share_large: f64,
    pub small_mean_size: f64,
    pub mid_size: (usize, usize),
    pub large_size: (usize, usize),
}

/// Shares of contracts by term. Drawn per contract; normalised when the
/// shares add up to more than one, the remainder otherwise goes to one-year loans.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoanPeriodMix {
    pub one_year: f64,
    pub two_three_year: f64,
    pub long: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HazardCoefficients {
    /// Fixed intercept; `None` calibrates it to the target default rate.
    pub intercept: Option<f64>,
    pub beta_authority: f64,
    pub beta_hub: f64,
    pub beta_community: f64,
    pub beta_quarter_end: f64,
    /// Weight of the firm's profile risk (size class and capital).
    pub beta_profile: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_customers: usize,
    pub start_month: NaiveDate,
    pub n_months: u32,
    pub target_default_rate: f64,
    pub component_mix: ComponentMix,
    pub loan_period_mix: LoanPeriodMix,
    pub hazard: HazardCoefficients,
    /// Multiplier on the hazard of installments due more than 12 months
    /// after the contract started.
    pub late_life_factor: f64,
    /// Target size of the planted communities inside mid and large components.
    pub community_size: usize,
    /// Spread guarantee relations' first use over the timeline instead of
    /// having them all in place from the start.
    pub network_growth: bool,
    /// Annual growth of new borrowers entering the portfolio (0 = all enter in the first year).
    pub volume_growth: f64,
    /// Chance that a firm without guarantors of its own only acts as guarantor.
    pub guarantor_only_share: f64,
    /// Chance that a guarantor in a clustered component comes from another cluster.
    pub cross_cluster_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_customers: 5000,
            start_month: NaiveDate::from_ymd_opt(2012, 1, 1).expect("valid date"),
            n_months: 48,
            target_default_rate: 0.0677,
            component_mix: ComponentMix {
                share_small: 0.851,
                share_large: 0.066,
                small_mean_size: 3.0,
                mid_size: (50, 299),
                large_size: (301, 420),
            },
            loan_period_mix: LoanPeriodMix {
                one_year: 0.7127,
                two_three_year: 0.13,
                long: 0.16,
            },
            hazard: HazardCoefficients {
                intercept: None,
                beta_authority: 3.0,
                beta_hub: -2.0,
                beta_community: 6.0,
                beta_quarter_end: 0.5,
                beta_profile: 0.8,
            },
            late_life_factor: 0.02,
            community_size: 40,
            network_growth: false,
            volume_growth: 0.0,
            guarantor_only_share: 0.4,
            cross_cluster_share: 0.1,
        }
    }
}

/// Every key accepted by [`SynthConfig::set`].
pub const SYNTH_KEYS: &[&str] = &[
    "seed",
    "n_customers",
    "start_month",
    "n_months",
    "target_default_rate",
    "share_small",
    "share_large",
    "small_mean_size",
    "mid_min_size",
    "mid_max_size",
    "large_min_size",
    "large_max_size",
    "one_year",
    "two_three_year",
    "long",
    "intercept",
    "beta_authority",
    "beta_hub",
    "beta_community",
    "beta_quarter_end",
    "beta_profile",
    "late_life_factor",
    "community_size",
    "network_growth",
    "volume_growth",
    "guarantor_only_share",
    "cross_cluster_share",
];

impl SynthConfig {
    /// Applies one setting. Returns `Ok(false)` for keys this config does not know.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let mix = &mut self.component_mix;
        let loans = &mut self.loan_period_mix;
        let h = &mut self.hazard;
        match key {
            "seed" => self.seed = parse_value(key, value)?,
            "n_customers" => self.n_customers = parse_value(key, value)?,
            "start_month" => self.start_month = parse_month(value)?,
            "n_months" => self.n_months = parse_value(key, value)?,
            "target_default_rate" => self.target_default_rate = parse_value(key, value)?,
            "share_small" => mix.share_small = parse_value(key, value)?,
            "share_large" => mix.share_large = parse_value(key, value)?,
            "small_mean_size" => mix.small_mean_size = parse_value(key, value)?,
            "mid_min_size" => mix.mid_size.0 = parse_value(key, value)?,
            "mid_max_size" => mix.mid_size.1 = parse_value(key, value)?,
            "large_min_size" => mix.large_size.0 = parse_value(key, value)?,
            "large_max_size" => mix.large_size.1 = parse_value(key, value)?,
            "one_year" => loans.one_year = parse_value(key, value)?,
            "two_three_year" => loans.two_three_year = parse_value(key, value)?,
            "long" => loans.long = parse_value(key, value)?,
            "intercept" => {
                h.intercept = match value.trim() {
                    "" | "auto" | "calibrate" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "beta_authority" => h.beta_authority = parse_value(key, value)?,
            "beta_hub" => h.beta_hub = parse_value(key, value)?,
            "beta_community" => h.beta_community = parse_value(key, value)?,
            "beta_quarter_end" => h.beta_quarter_end = parse_value(key, value)?,
            "beta_profile" => h.beta_profile = parse_value(key, value)?,
            "late_life_factor" => self.late_life_factor = parse_value(key, value)?,
            "community_size" => self.community_size = parse_value(key, value)?,
            "network_growth" => self.network_growth = parse_flag(key, value)?,
            "volume_growth" => self.volume_growth = parse_value(key, value)?,
            "guarantor_only_share" => self.guarantor_only_share = parse_value(key, value)?,
            "cross_cluster_share" => self.cross_cluster_share = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Checks ranges. Structural feasibility is checked during generation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let fractions = [
            ("target_default_rate", self.target_default_rate),
            ("share_small", self.component_mix.share_small),
            ("share_large", self.component_mix.share_large),
            ("one_year", self.loan_period_mix.one_year),
            ("two_three_year", self.loan_period_mix.two_three_year),
            ("long", self.loan_period_mix.long),
            ("late_life_factor", self.late_life_factor),
            ("guarantor_only_share", self.guarantor_only_share),
            ("cross_cluster_share", self.cross_cluster_share),
        ];
        for (name, x) in fractions {
            if !(0.0..=1.0).contains(&x) {
                return bad(format!("`{name}` must lie in [0, 1], got {x}"));
            }
        }
        let mix = &self.component_mix;
        if mix.share_small + mix.share_large > 1.0 {
            return bad("share_small + share_large exceeds 1".into());
        }
        if mix.share_small + mix.share_large == 0.0 {
            return bad("share_small and share_large are both zero".into());
        }
        let (lo, hi) = mix.mid_size;
        if !(50..300).contains(&lo) || hi < lo || hi >= 300 {
            return bad(format!(
                "mid component sizes must lie in 50..=299, got {lo}..={hi}"
            ));
        }
        let (lo, hi) = mix.large_size;
        if lo < 301 || hi < lo {
            return bad(format!(
                "large component sizes must exceed 300, got {lo}..={hi}"
            ));
        }
        if !(1.0..49.0).contains(&mix.small_mean_size) {
            return bad("small_mean_size must lie in [1, 49)".into());
        }
        if self.n_customers == 0 {
            return bad("n_customers must be positive".into());
        }
        if self.n_months < 12 {
            return bad("n_months must be at least 12".into());
        }
        if self.community_size < 5 {
            return bad("community_size must be at least 5".into());
        }
        if !(self.volume_growth >= 0.0 && self.volume_growth.is_finite()) {
            return bad("volume_growth must be non-negative".into());
        }
        let h = &self.hazard;
        let betas = [
            h.beta_authority,
            h.beta_hub,
            h.beta_community,
            h.beta_quarter_end,
            h.beta_profile,
            h.intercept.unwrap_or(0.0),
        ];
        if betas.iter().any(|b| !b.is_finite()) {
            return bad("hazard coefficients must be finite".into());
        }
        Ok(())
    }

    /// Loan-period shares actually used: as given when they sum to at most
    /// one (remainder to one-year loans), otherwise rescaled to sum to one.
    pub fn effective_loan_mix(&self) -> [f64; 3] {
        let m = &self.loan_period_mix;
        let total = m.one_year + m.two_three_year + m.long;
        if total > 1.0 {
            [m.one_year / total, m.two_three_year / total, m.long / total]
        } else {
            [1.0 - m.two_three_year - m.long, m.two_three_year, m.long]
        }
    }

    /// First day after the timeline.
    pub fn end_date(&self) -> NaiveDate {
        crate::calendar::add_months(self.start_month, self.n_months)
    }

    /// Settings in `key = value` form, in [`SYNTH_KEYS`] order.
    pub fn to_settings(&self) -> Vec<(String, String)> {
        let m = &self.component_mix;
        let l = &self.loan_period_mix;
        let h = &self.hazard;
        let values = [
            self.seed.to_string(),
            self.n_customers.to_string(),
            self.start_month.format("%Y-%m").to_string(),
            self.n_months.to_string(),
            self.target_default_rate.to_string(),
            m.share_small.to_string(),
            m.share_large.to_string(),
            m.small_mean_size.to_string(),
            m.mid_size.0.to_string(),
            m.mid_size.1.to_string(),
            m.large_size.0.to_string(),
            m.large_size.1.to_string(),
            l.one_year.to_string(),
            l.two_three_year.to_string(),
            l.long.to_string(),
            h.intercept.map_or("auto".into(), |x| x.to_string()),
            h.beta_authority.to_string(),
            h.beta_hub.to_string(),
            h.beta_community.to_string(),
            h.beta_quarter_end.to_string(),
            h.beta_profile.to_string(),
            self.late_life_factor.to_string(),
            self.community_size.to_string(),
            self.network_growth.to_string(),
            self.volume_growth.to_string(),
            self.guarantor_only_share.to_string(),
            self.cross_cluster_share.to_string(),
        ];
        SYNTH_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SynthConfig::default().validate().unwrap();
    }

    #[test]
    fn settings_round_trip() {
        let mut cfg = SynthConfig::default();
        cfg.set("beta_hub", "-2").unwrap();
        cfg.set("network_growth", "true").unwrap();
        let mut back = SynthConfig::default();
        for (k, v) in cfg.to_settings() {
            assert!(back.set(&k, &v).unwrap(), "{k}");
        }
        assert_eq!(back, cfg);
        assert!(!back.set("nonsense", "1").unwrap());
    }

    #[test]
    fn default_loan_mix_is_rescaled() {
        let [a, b, c] = SynthConfig::default().effective_loan_mix();
        assert!((a + b + c - 1.0).abs() < 1e-12);
        assert!((a - 0.7127 / 1.0027).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_fraction() {
        let mut cfg = SynthConfig::default();
        cfg.set("share_small", "1.2").unwrap();
        assert!(cfg.validate().is_err());
    }
}
