use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::convolution::OperatorKind;
use crate::csbm_model::ModelParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PartialSweep,
    Oversmoothing,
    ExactSweep,
    Concentration,
    WalkAudit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PartialSweep => "partial_sweep",
            ExperimentKind::Oversmoothing => "oversmoothing",
            ExperimentKind::ExactSweep => "exact_sweep",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::WalkAudit => "walk_audit",
        }
    }
}

fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// A sweep description. `n`, `p`, `q` and `sigma` accept a scalar or a list
/// and the sweep runs over their cartesian product.
///
/// Without `m`, `sigma` is the noise level of the centered one-dimensional
/// model and features are sampled as `s + N(0, sigma^2)` directly. With
/// `m`, `mu` and `nu`, features are drawn in `m` dimensions and reduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub p: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub q: Vec<f64>,
    #[serde(deserialize_with = "one_or_many")]
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    #[serde(default)]
    pub nu: Option<Vec<f64>>,
    pub k_max: usize,
    pub trials: usize,
    pub kinds: Vec<OperatorKind>,
    pub master_seed: u64,
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        for (name, empty) in [
            ("n", self.n.is_empty()),
            ("p", self.p.is_empty()),
            ("q", self.q.is_empty()),
            ("sigma", self.sigma.is_empty()),
        ] {
            if empty {
                return Err(Error::invalid(format!("{name} must not be empty")));
            }
        }
        if self.experiment == ExperimentKind::WalkAudit {
            if self.k_max == 0 {
                return Err(Error::invalid("walk_audit needs k_max >= 1"));
            }
            return Ok(());
        }
        if self.kinds.is_empty() {
            return Err(Error::invalid("kinds must not be empty"));
        }
        match (&self.m, &self.mu, &self.nu) {
            (None, None, None) => {}
            (Some(m), Some(mu), Some(nu)) => {
                if mu.len() != *m || nu.len() != *m {
                    return Err(Error::invalid(format!(
                        "mu and nu must have length m = {m} (got {} and {})",
                        mu.len(),
                        nu.len()
                    )));
                }
            }
            _ => return Err(Error::invalid("m, mu and nu must be given together")),
        }
        for point in self.grid() {
            self.model_params(&point)?;
        }
        match self.experiment {
            ExperimentKind::Oversmoothing => {
                if !self.kinds.iter().any(|k| k.is_corrected())
                    || self.kinds.iter().all(|k| k.is_corrected())
                {
                    return Err(Error::invalid(
                        "oversmoothing needs a corrected and a vanilla kind",
                    ));
                }
            }
            ExperimentKind::Concentration => {
                if let Some(k) = self.kinds.iter().find(|k| !k.is_symmetric()) {
                    return Err(Error::invalid(format!(
                        "concentration needs symmetric kinds, got {k}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Grid points in `n`-major, then `p`, `q`, `sigma` order.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &p in &self.p {
                for &q in &self.q {
                    for &sigma in &self.sigma {
                        out.push(GridPoint {
                            index: out.len(),
                            n,
                            p,
                            q,
                            sigma,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_one_dim(&self) -> bool {
        self.m.is_none()
    }

    /// Model parameters at a grid point. In the direct one-dimensional mode
    /// the means are placeholders; features bypass them.
    pub fn model_params(&self, point: &GridPoint) -> Result<ModelParams> {
        match (&self.mu, &self.nu) {
            (Some(mu), Some(nu)) => ModelParams::new(
                point.n,
                point.p,
                point.q,
                mu.clone(),
                nu.clone(),
                point.sigma,
            ),
            _ => ModelParams::new(
                point.n,
                point.p,
                point.q,
                vec![1.0],
                vec![-1.0],
                point.sigma,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"experiment": "partial_sweep", "n": 100, "p": [0.2, 0.3], "q": 0.05,
        "sigma": 1.0, "k_max": 3, "trials": 2, "kinds": ["corrected_unnormalized"], "master_seed": 1}"#;

    #[test]
    fn scalars_and_lists() {
        let cfg = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.n, vec![100]);
        assert_eq!(cfg.p, vec![0.2, 0.3]);
        let grid = cfg.grid();
        assert_eq!(grid.len(), 2);
        assert_eq!(grid[1].p, 0.3);
        assert_eq!(grid[1].index, 1);
        assert!(cfg.is_one_dim());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = BASE.replace("\"trials\"", "\"extra\": 1, \"trials\"");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn missing_keys_rejected() {
        let text = BASE.replace(r#""master_seed": 1"#, r#""k": 1"#);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        for (from, to) in [
            (r#""trials": 2"#, r#""trials": 0"#),
            (r#""n": 100"#, r#""n": 101"#),
            (r#""n": 100"#, r#""n": []"#),
            (r#""q": 0.05"#, r#""q": 1.5"#),
            (r#""kinds": ["corrected_unnormalized"]"#, r#""kinds": []"#),
            (
                r#""kinds": ["corrected_unnormalized"]"#,
                r#""kinds": ["a_tilde"]"#,
            ),
            (r#""k_max": 3"#, r#""k_max": 3, "m": 2"#),
            (
                r#""k_max": 3"#,
                r#""k_max": 3, "m": 2, "mu": [1], "nu": [0]"#,
            ),
        ] {
            let text = BASE.replace(from, to);
            assert!(ExperimentConfig::from_json(&text).is_err(), "{to}");
        }
    }

    #[test]
    fn oversmoothing_needs_both_families() {
        let text = BASE.replace("partial_sweep", "oversmoothing");
        assert!(ExperimentConfig::from_json(&text).is_err());
        let text = text.replace(
            r#"["corrected_unnormalized"]"#,
            r#"["corrected_unnormalized", "vanilla_rw"]"#,
        );
        assert!(ExperimentConfig::from_json(&text).is_ok());
    }

    #[test]
    fn concentration_needs_symmetric_kinds() {
        let text = BASE
            .replace("partial_sweep", "concentration")
            .replace(r#"["corrected_unnormalized"]"#, r#"["vanilla_rw"]"#);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn feature_means() {
        let text = BASE.replace(
            r#""k_max": 3"#,
            r#""k_max": 3, "m": 2, "mu": [1, 0], "nu": [0, 1]"#,
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert!(!cfg.is_one_dim());
        assert_eq!(cfg.model_params(&cfg.grid()[0]).unwrap().m, 2);
    }
}
