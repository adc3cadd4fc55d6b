use serde::{Deserialize, Serialize};

use crate::error::{DrrError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Milp,
    Iblp,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Milp => "milp",
            Method::Iblp => "iblp",
        })
    }
}

/// Study parameters. Tolerances are in per-unit on the case base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Derating of flexible capacity for the initial dispatch.
    pub reserve_factor: f64,
    /// Ramp capability as a fraction of each unit's maximum output.
    pub ramp_fraction: f64,
    pub s1_count: usize,
    pub seed: u64,
    /// Big-M for the complementarity constraints; derived from the data
    /// when absent.
    pub big_m: Option<f64>,
    pub eps_term: f64,
    pub eps_alt: f64,
    pub eps_slack: f64,
    pub eps_dual: f64,
    pub perturb_lambda: f64,
    pub max_outer_iters: usize,
    /// Worker threads for scenario evaluation; 0 picks the core count.
    pub thread_count: usize,
    pub alternation_cap: usize,
    pub cut_batch_cap: usize,
    pub gap_tol: f64,
    pub node_limit: usize,
    /// Per-class slack prices used by the feasibility model.
    pub weights: SlackPrices,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            reserve_factor: 0.9,
            ramp_fraction: 0.10,
            s1_count: 100,
            seed: 42,
            big_m: None,
            eps_term: 1e-6,
            eps_alt: 1e-7,
            eps_slack: 1e-6,
            eps_dual: 1e-9,
            perturb_lambda: 0.01,
            max_outer_iters: 200,
            thread_count: 0,
            alternation_cap: 50,
            cut_batch_cap: 20,
            gap_tol: 1e-7,
            node_limit: 500_000,
            weights: SlackPrices::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlackPrices {
    pub balance: f64,
    pub flow_definition: f64,
    pub angle_reference: f64,
    pub flow_limit: f64,
    pub generation: f64,
    pub angle_difference: f64,
}

impl Default for SlackPrices {
    fn default() -> Self {
        Self {
            balance: 1.0,
            flow_definition: 1.0,
            angle_reference: 1.0,
            flow_limit: 1.0,
            generation: 1.0,
            angle_difference: 1.0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DrrError::InvalidConfig(m.into()));
        if !(self.reserve_factor > 0.0 && self.reserve_factor <= 1.0) {
            return bad("reserve_factor must lie in (0, 1]");
        }
        if !(self.ramp_fraction > 0.0 && self.ramp_fraction <= 1.0) {
            return bad("ramp_fraction must lie in (0, 1]");
        }
        if self.s1_count == 0 {
            return bad("s1_count must be at least 1");
        }
        for (name, v) in [
            ("eps_term", self.eps_term),
            ("eps_alt", self.eps_alt),
            ("eps_slack", self.eps_slack),
            ("eps_dual", self.eps_dual),
            ("gap_tol", self.gap_tol),
            ("perturb_lambda", self.perturb_lambda),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if let Some(m) = self.big_m {
            if !(m > 0.0 && m.is_finite()) {
                return bad("big_m must be positive");
            }
        }
        let w = &self.weights;
        for v in [
            w.balance,
            w.flow_definition,
            w.angle_reference,
            w.flow_limit,
            w.generation,
            w.angle_difference,
        ] {
            if !(v > 0.0) {
                return bad("slack prices must be positive");
            }
        }
        if self.alternation_cap == 0 || self.cut_batch_cap == 0 || self.max_outer_iters == 0 {
            return bad("iteration caps must be at least 1");
        }
        Ok(())
    }

    /// Parses a JSON object or, failing that, TOML key-value pairs.
    pub fn from_text(text: &str) -> Result<Self> {
        let cfg: StudyConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text).map_err(|e| DrrError::InvalidConfig(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn threads(&self) -> usize {
        if self.thread_count > 0 {
            self.thread_count
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    /// JSON echo of the settings that influence results; the thread count
    /// is left out because results do not depend on it.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or_default();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("thread_count");
        }
        v
    }
}
