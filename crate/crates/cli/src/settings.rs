use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use gnrisk::config::parse_settings;
use gnrisk::eval::RollingConfig;
use gnrisk::synth::SynthConfig;
use gnrisk::Error;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: DATA,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Infeasible(_) | Error::NoWindows => USAGE,
            _ => DATA,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Every configurable value, after layering.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub synth: SynthConfig,
    pub rolling: RollingConfig,
}

impl Settings {
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), Error> {
        if self.synth.set(key, value)? || self.rolling.set(key, value)? {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown key `{key}`")))
        }
    }

    pub fn apply_file(&mut self, path: &Path, text: &str) -> Result<(), CliError> {
        let source = path.display().to_string();
        for s in parse_settings(text, &source)? {
            self.apply(&s.key, &s.value)
                .map_err(|e| CliError::usage(format!("{source}:{}: {e}", s.line)))?;
        }
        Ok(())
    }

    /// Applies one `KEY=VALUE` argument of `--set`.
    pub fn apply_override(&mut self, arg: &str) -> Result<(), CliError> {
        let (key, value) = arg
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set {arg}: expected KEY=VALUE")))?;
        self.apply(key.trim(), value.trim())
            .map_err(|e| CliError::usage(format!("--set {arg}: {e}")))
    }

    pub fn synth_map(&self) -> BTreeMap<String, String> {
        self.synth.to_settings().into_iter().collect()
    }

    /// Evaluation, snapshot and training settings.
    pub fn model_map(&self) -> BTreeMap<String, String> {
        let r = &self.rolling;
        let t = &r.train;
        let ablations: Vec<&str> = r.ablations.iter().map(|a| a.label()).collect();
        [
            ("start", r.start.to_string()),
            ("windows", r.n_windows.to_string()),
            ("ablations", ablations.join(",")),
            ("recall_threshold", r.recall_threshold.to_string()),
            ("community_method", r.snapshot.method.to_string()),
            ("max_communities", r.snapshot.max_communities.to_string()),
            ("rounds", t.rounds.to_string()),
            ("eta", t.eta.to_string()),
            ("max_depth", t.max_depth.to_string()),
            ("gamma", t.gamma.to_string()),
            ("lambda", t.lambda.to_string()),
            ("min_child_hessian", t.min_child_hessian.to_string()),
            ("base_score", t.base_score.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn snapshot_map(&self) -> BTreeMap<String, String> {
        let mut m = self.model_map();
        m.retain(|k, _| k == "community_method" || k == "max_communities");
        m
    }
}
