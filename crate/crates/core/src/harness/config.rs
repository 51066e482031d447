use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::metrics::theorem1_threshold;
use crate::model::theorem5_min_dim;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Uniform-box features, one common noise level; sweep over the box width τ.
    Fig1Homoscedastic,
    /// `θ = τ I`, a few features at a high noise level and the rest low; sweep over τ.
    Fig2Heteroscedastic,
    /// Least favorable configuration, homoscedastic; sweep over κ̄.
    Theorem1Check,
    /// Two-feature greedy counterexample; sweep over κ.
    Theorem5Check,
    /// Uniform-box features with the noise described by the config; sweep over τ.
    Custom,
}

impl Scenario {
    pub fn sweep_label(self) -> &'static str {
        match self {
            Scenario::Fig1Homoscedastic | Scenario::Fig2Heteroscedastic | Scenario::Custom => "tau",
            Scenario::Theorem1Check => "kappa_bar",
            Scenario::Theorem5Check => "kappa",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Fig1Homoscedastic => "fig1",
            Scenario::Fig2Heteroscedastic => "fig2",
            Scenario::Theorem1Check => "theorem1",
            Scenario::Theorem5Check => "theorem5",
            Scenario::Custom => "custom",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig1" | "fig1homoscedastic" | "homoscedastic" => Ok(Scenario::Fig1Homoscedastic),
            "fig2" | "fig2heteroscedastic" | "heteroscedastic" => Ok(Scenario::Fig2Heteroscedastic),
            "theorem1" | "theorem1check" => Ok(Scenario::Theorem1Check),
            "theorem5" | "theorem5check" => Ok(Scenario::Theorem5Check),
            "custom" => Ok(Scenario::Custom),
            other => Err(Error::invalid(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub d: usize,
    /// Common noise level (homoscedastic scenarios) or the low level.
    pub sigma: f64,
    /// High noise level for heteroscedastic scenarios.
    pub sigma_high: Option<f64>,
    /// Number of features at the high level; defaults to `max(2, ⌊n/20⌋)`.
    pub high_count: Option<usize>,
    pub sweep: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub estimators: Vec<EstimatorKind>,
    pub record_timing: bool,
}

impl ExperimentConfig {
    /// Homoscedastic uniform-box sweep at desk scale (`n = d = 50`).
    pub fn fig1_desk() -> Self {
        ExperimentConfig {
            scenario: Scenario::Fig1Homoscedastic,
            n: 50,
            d: 50,
            sigma: 1.0,
            sigma_high: None,
            high_count: None,
            sweep: vec![1.4, 1.9, 2.4, 2.9, 3.5],
            trials: 200,
            seed: 1,
            estimators: EstimatorKind::standard(),
            record_timing: false,
        }
    }

    /// Heteroscedastic `θ = τ I` sweep at desk scale (`n = d = 50`).
    pub fn fig2_desk() -> Self {
        ExperimentConfig {
            scenario: Scenario::Fig2Heteroscedastic,
            sigma: 0.5,
            sigma_high: Some(1.0),
            sweep: vec![4.0, 5.5, 7.0, 8.5, 10.0],
            ..Self::fig1_desk()
        }
    }

    /// Original scale: `n = d = 200`, 500 trials.
    pub fn full_scale(mut self) -> Self {
        self.n = 200;
        self.d = 200;
        self.trials = 500;
        if self.scenario == Scenario::Fig2Heteroscedastic {
            self.high_count = Some(10);
        }
        self
    }

    /// Least favorable homoscedastic configuration placed exactly at the
    /// guaranteed separation for level `alpha`.
    pub fn theorem1(n: usize, d: usize, alpha: f64) -> Result<Self> {
        Ok(ExperimentConfig {
            scenario: Scenario::Theorem1Check,
            n,
            d,
            sweep: vec![theorem1_threshold(alpha, n, d, 1.0)?],
            trials: 500,
            ..Self::fig1_desk()
        })
    }

    pub fn theorem5(d: usize, kappas: Vec<f64>) -> Self {
        ExperimentConfig {
            scenario: Scenario::Theorem5Check,
            n: 2,
            d,
            sigma: 1.0,
            sweep: kappas,
            trials: 500,
            estimators: vec![EstimatorKind::Greedy, EstimatorKind::Lsl],
            ..Self::fig1_desk()
        }
    }

    pub fn defaults_for(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Fig1Homoscedastic => Self::fig1_desk(),
            Scenario::Fig2Heteroscedastic => Self::fig2_desk(),
            Scenario::Theorem1Check => Self::theorem1(50, 50, 0.1).expect("valid defaults"),
            Scenario::Theorem5Check => Self::theorem5(theorem5_min_dim(), vec![0.5, 1.0, 1.5, 2.0, 2.5]),
            Scenario::Custom => ExperimentConfig { scenario: Scenario::Custom, ..Self::fig1_desk() },
        }
    }

    /// High-noise feature count used by heteroscedastic scenarios.
    pub fn effective_high_count(&self) -> usize {
        self.high_count.unwrap_or_else(|| (self.n / 20).max(2)).min(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.sweep.is_empty() {
            return Err(Error::invalid("sweep must not be empty"));
        }
        if self.sweep.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("sweep values must be finite and nonnegative"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("no estimators requested"));
        }
        if self.estimators.iter().any(|e| matches!(e, EstimatorKind::GeneralLsl(_))) {
            return Err(Error::invalid("general-criterion LSL is not available in synthetic experiments"));
        }
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("n and d must be positive"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid("sigma must be positive"));
        }
        if let Some(h) = self.sigma_high {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::invalid("sigma_high must be positive"));
            }
        }
        match self.scenario {
            Scenario::Fig2Heteroscedastic if self.d != self.n => Err(Error::invalid(format!(
                "scaled-identity features need d = n, got n = {} and d = {}",
                self.n, self.d
            ))),
            Scenario::Fig2Heteroscedastic if self.sigma_high.is_none() => {
                Err(Error::invalid("heteroscedastic scenario needs sigma_high"))
            }
            Scenario::Theorem1Check if self.n < 2 => Err(Error::invalid("theorem1 scenario needs n >= 2")),
            Scenario::Theorem5Check if self.n != 2 => Err(Error::invalid("theorem5 scenario has n = 2")),
            _ => Ok(()),
        }
    }

    /// Parses a flat `key = value` file; `#` starts a comment. The
    /// `scenario` key selects the defaults that other keys override.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", k + 1)))?;
            pairs.push((k + 1, key.trim().to_ascii_lowercase(), value.trim().to_string()));
        }
        let scenario = pairs
            .iter()
            .find(|(_, k, _)| k == "scenario")
            .map(|(_, _, v)| v.parse::<Scenario>())
            .transpose()?
            .unwrap_or(Scenario::Fig1Homoscedastic);
        let full = pairs
            .iter()
            .find(|(_, k, _)| k == "full_scale")
            .map(|(l, _, v)| parse_bool(*l, v))
            .transpose()?
            .unwrap_or(false);
        let mut cfg = Self::defaults_for(scenario);
        if full {
            cfg = cfg.full_scale();
        }
        let mut alpha = None;
        let mut sweep_given = false;
        for (line, key, value) in &pairs {
            let line = *line;
            match key.as_str() {
                "scenario" | "full_scale" => {}
                "n" => cfg.n = parse_num(line, value)?,
                "d" => cfg.d = parse_num(line, value)?,
                "sigma" | "sigma_low" => cfg.sigma = parse_num(line, value)?,
                "sigma_high" => cfg.sigma_high = Some(parse_num(line, value)?),
                "high_count" => cfg.high_count = Some(parse_num(line, value)?),
                "trials" => cfg.trials = parse_num(line, value)?,
                "seed" => cfg.seed = parse_num(line, value)?,
                "alpha" => alpha = Some(parse_num::<f64>(line, value)?),
                "timing" => cfg.record_timing = parse_bool(line, value)?,
                "sweep" => {
                    cfg.sweep = value
                        .split(',')
                        .filter(|t| !t.trim().is_empty())
                        .map(|t| parse_num(line, t))
                        .collect::<Result<_>>()?;
                    sweep_given = true;
                }
                "estimators" => {
                    cfg.estimators = value
                        .split(',')
                        .filter(|t| !t.trim().is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?;
                }
                other => return Err(Error::Parse(format!("line {line}: unknown key {other:?}"))),
            }
        }
        if scenario == Scenario::Theorem1Check && !sweep_given {
            cfg.sweep = vec![theorem1_threshold(alpha.unwrap_or(0.1), cfg.n, cfg.d, 1.0)?];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num<T: FromStr>(line: usize, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.trim().parse().map_err(|e| Error::Parse(format!("line {line}: {v:?}: {e}")))
}

fn parse_bool(line: usize, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(Error::Parse(format!("line {line}: expected a boolean, got {other:?}"))),
    }
}
