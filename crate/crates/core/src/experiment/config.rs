use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::greedy::{SelectionRule, SelectionVariant, StopCriteria};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelConfig,
    pub domain: DomainConfig,
    pub target: TargetConfig,
    pub rules: Vec<RuleConfig>,
    #[serde(default)]
    pub stop: StopConfig,
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dim: usize,
    /// Number of random points; ignored when `grid_resolution` is set.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub slice: Option<SliceConfig>,
    #[serde(default)]
    pub grid_resolution: Option<usize>,
}

/// Hyperplane `x[axis] = value`; the domain points projected onto it are
/// added to the candidates of rules with `restrict_to_slice`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    pub axis: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    PowerLaw {
        alpha: f64,
    },
    Synthesized {
        centers_seed: u64,
        center_count: usize,
        coeff_seed: u64,
    },
    /// Rows `x_1,...,x_d,f`; these points replace the configured domain.
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    /// `beta`, `f_over_p` or `random`.
    pub variant: String,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub restrict_to_slice: bool,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub power_floor: Option<f64>,
}

impl RuleConfig {
    pub fn selection_rule(&self) -> Result<SelectionRule> {
        let variant = match self.variant.as_str() {
            "beta" => SelectionVariant::Beta(
                self.beta
                    .ok_or_else(|| invalid("rule `beta` needs a `beta` value"))?,
            ),
            "f_over_p" => SelectionVariant::FOverP,
            "random" => SelectionVariant::Random {
                seed: self
                    .seed
                    .ok_or_else(|| invalid("rule `random` needs a `seed`"))?,
            },
            other => return Err(invalid(format!("unknown rule variant `{other}`"))),
        };
        let rule = SelectionRule::new(variant)?;
        match self.power_floor {
            Some(p) => rule.with_power_floor(p),
            None => Ok(rule),
        }
    }

    /// The configured label, or one derived from the variant.
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let base = match self.variant.as_str() {
            "beta" => format!("beta_{}", self.beta.unwrap_or(f64::NAN)),
            "random" => format!("random_{}", self.seed.unwrap_or(0)),
            v => v.to_string(),
        };
        if self.restrict_to_slice {
            format!("{base}_slice")
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    pub max_points: usize,
    pub power_tol: f64,
    pub residual_tol: f64,
}

impl Default for StopConfig {
    fn default() -> Self {
        let d = StopCriteria::default();
        StopConfig {
            max_points: d.max_points,
            power_tol: d.power_tol,
            residual_tol: d.residual_tol,
        }
    }
}

impl StopConfig {
    pub fn criteria(&self) -> Result<StopCriteria> {
        StopCriteria::new(self.max_points, self.power_tol, self.residual_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Path pattern containing `{label}`.
    pub trace_csv: String,
    pub checks_csv: String,
    /// Path pattern containing `{quantity}`.
    pub plot_svg: String,
    #[serde(default = "default_quantities")]
    pub plot_quantities: Vec<String>,
    #[serde(default)]
    pub reference_slopes: Vec<f64>,
    /// Window for the per-rule slope fit of `max_residual`.
    #[serde(default)]
    pub slope_window: Option<[usize; 2]>,
}

fn default_quantities() -> Vec<String> {
    vec!["max_residual".to_string()]
}

/// Quantities that can be plotted: trace columns plus `<column>_gm`, the
/// geometric mean over `n+1..=2n`.
pub fn is_plot_quantity(q: &str) -> bool {
    let base = q.strip_suffix("_gm").unwrap_or(q);
    crate::analysis::NUMERIC_COLUMNS.contains(&base)
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Err(invalid("config has no rules"));
        }
        let d = &self.domain;
        if d.dim == 0 {
            return Err(invalid("domain.dim must be positive"));
        }
        let csv_target = matches!(self.target, TargetConfig::Csv { .. });
        if !csv_target && d.grid_resolution.is_none() && d.count.unwrap_or(0) == 0 {
            return Err(invalid(
                "domain needs a positive count or a grid_resolution",
            ));
        }
        if let Some(s) = d.slice {
            if s.axis >= d.dim {
                return Err(invalid(format!("slice axis {} out of range", s.axis)));
            }
            if !(0.0..=1.0).contains(&s.value) {
                return Err(invalid("slice value must lie in [0, 1]"));
            }
        }
        self.stop.criteria()?;
        let mut labels = BTreeSet::new();
        for r in &self.rules {
            r.selection_rule()?;
            if r.restrict_to_slice && csv_target {
                return Err(invalid(
                    "slice rules need target values off the point list; csv targets have none",
                ));
            }
            if r.restrict_to_slice && d.slice.is_none() {
                return Err(invalid(format!(
                    "rule `{}` is restricted to a slice, but the domain has none",
                    r.label()
                )));
            }
            let label = r.label();
            if label.is_empty() || label.contains(['/', '\\']) {
                return Err(invalid(format!("bad rule label `{label}`")));
            }
            if !labels.insert(label.clone()) {
                return Err(invalid(format!("duplicate rule label `{label}`")));
            }
        }
        match &self.target {
            TargetConfig::PowerLaw { alpha } if !(*alpha > 0.0) => {
                return Err(invalid("power_law alpha must be positive"))
            }
            TargetConfig::PowerLaw { .. } if d.dim != 1 => {
                return Err(invalid("power_law targets need dim = 1"))
            }
            TargetConfig::Synthesized {
                center_count: 0, ..
            } => return Err(invalid("synthesized target needs at least one center")),
            _ => {}
        }
        let o = &self.outputs;
        if self.rules.len() > 1 && !o.trace_csv.contains("{label}") {
            return Err(invalid("outputs.trace_csv must contain `{label}`"));
        }
        if o.plot_quantities.len() > 1 && !o.plot_svg.contains("{quantity}") {
            return Err(invalid("outputs.plot_svg must contain `{quantity}`"));
        }
        for q in &o.plot_quantities {
            if !is_plot_quantity(q) {
                return Err(invalid(format!("unknown plot quantity `{q}`")));
            }
        }
        if let Some([lo, hi]) = o.slope_window {
            if lo == 0 || lo > hi {
                return Err(invalid("slope_window must satisfy 1 <= lo <= hi"));
            }
        }
        Ok(())
    }

    pub fn trace_path(&self, label: &str) -> String {
        self.outputs.trace_csv.replace("{label}", label)
    }

    pub fn plot_path(&self, quantity: &str) -> String {
        self.outputs.plot_svg.replace("{quantity}", quantity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "kernel": {"name": "wendland_k0"},
        "domain": {"dim": 1, "grid_resolution": 11},
        "target": {"kind": "power_law", "alpha": 0.5},
        "rules": [{"variant": "beta", "beta": 1}],
        "outputs": {"trace_csv": "t_{label}.csv", "checks_csv": "c.csv", "plot_svg": "p.svg"}
    }"#;

    #[test]
    fn minimal_parses_with_defaults() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.stop, StopConfig::default());
        assert_eq!(c.rules[0].label(), "beta_1");
        assert_eq!(c.outputs.plot_quantities, vec!["max_residual"]);
        assert_eq!(c.trace_path("x"), "t_x.csv");
    }

    #[test]
    fn empty_rules_rejected() {
        let text = MINIMAL.replace(r#"[{"variant": "beta", "beta": 1}]"#, "[]");
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("no rules"));
    }

    #[test]
    fn unknown_keys_and_variants_rejected() {
        let text = MINIMAL.replace(r#""dim": 1,"#, r#""dim": 1, "bogus": 2,"#);
        assert!(matches!(
            ExperimentConfig::from_json(&text),
            Err(Error::Parse(_))
        ));
        let text = MINIMAL.replace(r#""variant": "beta""#, r#""variant": "gamma""#);
        assert!(ExperimentConfig::from_json(&text).is_err());
        let text = MINIMAL.replace(r#""beta": 1"#, r#""beta": -1"#);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let text = MINIMAL.replace(
            r#"[{"variant": "beta", "beta": 1}]"#,
            r#"[{"variant": "beta", "beta": 1}, {"variant": "beta", "beta": 1}]"#,
        );
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn slice_rules_need_a_slice() {
        let text = MINIMAL.replace(
            r#"{"variant": "beta", "beta": 1}"#,
            r#"{"variant": "beta", "beta": 0, "restrict_to_slice": true}"#,
        );
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn plot_quantities_validated() {
        assert!(is_plot_quantity("nu_gm"));
        assert!(is_plot_quantity("sigma"));
        assert!(!is_plot_quantity("n"));
        assert!(!is_plot_quantity("foo_gm"));
    }

    #[test]
    fn labels_by_variant() {
        let r = |v: &str, beta, seed, slice| RuleConfig {
            variant: v.into(),
            beta,
            seed,
            restrict_to_slice: slice,
            label: None,
            power_floor: None,
        };
        assert_eq!(r("beta", Some(0.25), None, false).label(), "beta_0.25");
        assert_eq!(r("beta", Some(0.0), None, true).label(), "beta_0_slice");
        assert_eq!(r("random", None, Some(3), false).label(), "random_3");
        assert_eq!(r("f_over_p", None, None, false).label(), "f_over_p");
        assert!(r("random", None, None, false).selection_rule().is_err());
    }
}
