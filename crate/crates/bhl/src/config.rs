use std::path::{Path, PathBuf};

use bhl_core::quadrature::{DiscRule, InvariantRule};
use bhl_core::symbols::{builtin_family, SymbolPoly};
use bhl_core::weights::RadialWeight;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};
use crate::parse::parse_weight;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub weights: Vec<String>,
    pub symbols: Vec<String>,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
    /// Bergman-disc radii for the local oscillation.
    pub r: Vec<f64>,
    #[serde(rename = "N", alias = "n")]
    pub n: usize,
    pub lattice: LatticeConfig,
    /// Inner truncation used to detect growth of the dλ sums.
    pub trend_r_max: f64,
    /// Relative growth between the two truncations that marks divergence.
    pub growth_threshold: f64,
    pub quadrature: QuadratureConfig,
    pub lemma_grid: GridConfig,
    pub output: OutputConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub r: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub radial: usize,
    pub angular: usize,
    /// Möbius-substituted whole-disc integrals (graded radial map).
    pub graded_radial: usize,
    pub graded_angular: usize,
    /// Smaller Bergman-disc rule for the double-sum and lemma checks.
    pub local_radial: usize,
    pub local_angular: usize,
    pub invariant_panel_order: usize,
    pub invariant_angular: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radial: usize,
    pub angular: usize,
    pub max_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            weights: vec![
                "standard:eta=0".into(),
                "standard:eta=1".into(),
                "logpow:alpha=-0.5,beta=0".into(),
            ],
            symbols: builtin_family().into_iter().map(|(name, _)| name).collect(),
            p: vec![1.0, 2.0, 4.0],
            eta: vec![4.0],
            r: vec![0.5f64.atanh()],
            n: 128,
            lattice: LatticeConfig::default(),
            trend_r_max: 0.98,
            growth_threshold: 0.25,
            quadrature: QuadratureConfig::default(),
            lemma_grid: GridConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { r: 0.5, r_max: 0.995 }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            radial: 128,
            angular: 256,
            graded_radial: 64,
            graded_angular: 128,
            local_radial: 32,
            local_angular: 64,
            invariant_panel_order: 12,
            invariant_angular: 64,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            radial: 10,
            angular: 5,
            max_radius: 0.95,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("bhl-out"),
        }
    }
}

/// A config whose weights and symbols have been parsed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub weights: Vec<(String, RadialWeight)>,
    pub symbols: Vec<(String, SymbolPoly)>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::config(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> HarnessResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(path, e.into_inner())
        })
    }

    pub fn disc_rule(&self) -> HarnessResult<DiscRule> {
        Ok(DiscRule::new(self.quadrature.radial, self.quadrature.angular)?)
    }

    pub fn graded_rule(&self) -> HarnessResult<DiscRule> {
        Ok(DiscRule::graded(
            self.quadrature.graded_radial,
            self.quadrature.graded_angular,
        )?)
    }

    pub fn local_rule(&self) -> HarnessResult<DiscRule> {
        Ok(DiscRule::new(
            self.quadrature.local_radial,
            self.quadrature.local_angular,
        )?)
    }

    pub fn invariant_rule(&self) -> InvariantRule {
        InvariantRule {
            panel_order: self.quadrature.invariant_panel_order,
            angular: self.quadrature.invariant_angular,
        }
    }

    /// Checks every precondition and parses weights and symbols; errors name the offending field.
    pub fn resolve(self) -> HarnessResult<Resolved> {
        let nonempty = |name: &str, len: usize| {
            if len == 0 {
                Err(HarnessError::config(name, "must not be empty"))
            } else {
                Ok(())
            }
        };
        nonempty("weights", self.weights.len())?;
        nonempty("symbols", self.symbols.len())?;
        nonempty("p", self.p.len())?;
        nonempty("eta", self.eta.len())?;
        nonempty("r", self.r.len())?;
        for (i, &p) in self.p.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return Err(HarnessError::config(
                    format!("p[{i}]"),
                    format!("exponent must be positive, got {p}"),
                ));
            }
        }
        for (i, &eta) in self.eta.iter().enumerate() {
            if !(eta > -1.0 && eta.is_finite()) {
                return Err(HarnessError::config(
                    format!("eta[{i}]"),
                    format!("kernel exponent needs η > −1, got {eta}"),
                ));
            }
        }
        for (i, &r) in self.r.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(HarnessError::config(
                    format!("r[{i}]"),
                    format!("disc radius must be positive, got {r}"),
                ));
            }
        }
        if self.n == 0 || self.n > bhl_core::operators::MAX_GRAM_SIZE {
            return Err(HarnessError::config(
                "N",
                format!("truncation must lie in 1..={}", bhl_core::operators::MAX_GRAM_SIZE),
            ));
        }
        if self.lattice.r.is_nan() || self.lattice.r <= 0.0 {
            return Err(HarnessError::config("lattice.r", "separation must be positive"));
        }
        if !(self.lattice.r_max > 0.0 && self.lattice.r_max < 1.0) {
            return Err(HarnessError::config("lattice.r_max", "truncation must lie in (0, 1)"));
        }
        if !(self.trend_r_max > 0.0 && self.trend_r_max < self.lattice.r_max) {
            return Err(HarnessError::config("trend_r_max", "must lie in (0, lattice.r_max)"));
        }
        if self.growth_threshold.is_nan() || self.growth_threshold <= 0.0 {
            return Err(HarnessError::config("growth_threshold", "must be positive"));
        }
        let q = &self.quadrature;
        for (name, v) in [
            ("quadrature.radial", q.radial),
            ("quadrature.angular", q.angular),
            ("quadrature.graded_radial", q.graded_radial),
            ("quadrature.graded_angular", q.graded_angular),
            ("quadrature.local_radial", q.local_radial),
            ("quadrature.local_angular", q.local_angular),
            ("quadrature.invariant_panel_order", q.invariant_panel_order),
            ("quadrature.invariant_angular", q.invariant_angular),
            ("lemma_grid.radial", self.lemma_grid.radial),
            ("lemma_grid.angular", self.lemma_grid.angular),
        ] {
            if v == 0 {
                return Err(HarnessError::config(name, "must be positive"));
            }
        }
        if !(self.lemma_grid.max_radius > 0.0 && self.lemma_grid.max_radius < 1.0) {
            return Err(HarnessError::config("lemma_grid.max_radius", "must lie in (0, 1)"));
        }
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, text)| {
                parse_weight(text)
                    .map(|w| (text.clone(), w))
                    .map_err(|e| HarnessError::config(format!("weights[{i}]"), e))
            })
            .collect::<HarnessResult<Vec<_>>>()?;
        let symbols = self
            .symbols
            .iter()
            .enumerate()
            .map(|(i, text)| {
                text.parse::<SymbolPoly>()
                    .map(|f| (text.clone(), f))
                    .map_err(|e| HarnessError::config(format!("symbols[{i}]"), e))
            })
            .collect::<HarnessResult<Vec<_>>>()?;
        Ok(Resolved {
            config: self,
            weights,
            symbols,
        })
    }
}
