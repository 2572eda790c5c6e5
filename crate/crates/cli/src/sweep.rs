//! Parameter sweeps: spec types, validation, and CSV row evaluation.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use middleman_core::extensions;
use middleman_core::{
    consumer_utility, content_quality, disintermediation_margin, intermediary_utility,
    planner_welfare, social_welfare, CostFamily, CostModel, MarketParams, Regime,
};

use crate::output::fmt_f64;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Nu,
    Alpha,
    Consumers,
    Gamma,
    SupplyCost,
}

impl SweepVar {
    pub fn column_name(self) -> &'static str {
        match self {
            SweepVar::Nu => "nu",
            SweepVar::Alpha => "alpha",
            SweepVar::Consumers => "consumers",
            SweepVar::Gamma => "gamma",
            SweepVar::SupplyCost => "supply_cost",
        }
    }
}

impl FromStr for SweepVar {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "nu" => Ok(SweepVar::Nu),
            "alpha" => Ok(SweepVar::Alpha),
            "consumers" => Ok(SweepVar::Consumers),
            "gamma" => Ok(SweepVar::Gamma),
            "supply_cost" => Ok(SweepVar::SupplyCost),
            other => Err(format!("unknown sweep variable `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Baseline,
    Monopolist,
    Marginal,
    LinearFee,
}

impl FromStr for SweepMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "baseline" => Ok(SweepMode::Baseline),
            "monopolist" => Ok(SweepMode::Monopolist),
            "marginal" => Ok(SweepMode::Marginal),
            "linear_fee" => Ok(SweepMode::LinearFee),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(format!("unknown spacing `{other}` (use linear or log)")),
        }
    }
}

/// Requested metric columns, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputField {
    Quality,
    IntermediaryUtility,
    ConsumerUtility,
    SocialWelfare,
    PlannerWith,
    PlannerWithout,
    Margin,
    Usage,
}

pub const ALL_OUTPUTS: [OutputField; 8] = [
    OutputField::Quality,
    OutputField::IntermediaryUtility,
    OutputField::ConsumerUtility,
    OutputField::SocialWelfare,
    OutputField::PlannerWith,
    OutputField::PlannerWithout,
    OutputField::Margin,
    OutputField::Usage,
];

impl OutputField {
    pub fn column_name(self) -> &'static str {
        match self {
            OutputField::Quality => "quality",
            OutputField::IntermediaryUtility => "intermediary_utility",
            OutputField::ConsumerUtility => "consumer_utility",
            OutputField::SocialWelfare => "social_welfare",
            OutputField::PlannerWith => "planner_with",
            OutputField::PlannerWithout => "planner_without",
            OutputField::Margin => "margin",
            OutputField::Usage => "usage",
        }
    }
}

impl FromStr for OutputField {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "quality" => Ok(OutputField::Quality),
            "intermediary_utility" => Ok(OutputField::IntermediaryUtility),
            "consumer_utility" => Ok(OutputField::ConsumerUtility),
            "social_welfare" => Ok(OutputField::SocialWelfare),
            "planner_with" => Ok(OutputField::PlannerWith),
            "planner_without" => Ok(OutputField::PlannerWithout),
            "margin" => Ok(OutputField::Margin),
            "usage" => Ok(OutputField::Usage),
            other => Err(format!("unknown output `{other}`")),
        }
    }
}

pub fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::Intermediated => "intermediated",
        Regime::Disintermediated => "disintermediated",
    }
}

/// A fully-resolved sweep request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub model: CostModel,
    pub params: MarketParams,
    pub var: SweepVar,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub mode: SweepMode,
    /// Marginal-cost factor used when mode is `marginal` and the sweep
    /// variable is not `gamma`.
    pub gamma: f64,
    pub outputs: Vec<OutputField>,
}

fn allowed_outputs(mode: SweepMode) -> &'static [OutputField] {
    match mode {
        SweepMode::Baseline => &ALL_OUTPUTS,
        SweepMode::Monopolist => &[
            OutputField::Quality,
            OutputField::IntermediaryUtility,
            OutputField::ConsumerUtility,
            OutputField::Usage,
        ],
        SweepMode::Marginal => &[
            OutputField::Quality,
            OutputField::IntermediaryUtility,
            OutputField::ConsumerUtility,
            OutputField::Margin,
            OutputField::Usage,
        ],
        SweepMode::LinearFee => &[OutputField::Margin, OutputField::Usage],
    }
}

fn allowed_vars(mode: SweepMode) -> &'static [SweepVar] {
    match mode {
        SweepMode::Baseline => &[
            SweepVar::Nu,
            SweepVar::Alpha,
            SweepVar::Consumers,
            SweepVar::SupplyCost,
        ],
        SweepMode::Monopolist => &[SweepVar::SupplyCost],
        SweepMode::Marginal => &[SweepVar::Nu, SweepVar::Gamma],
        SweepMode::LinearFee => &[SweepVar::SupplyCost, SweepVar::Alpha, SweepVar::Consumers],
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.lo >= self.hi || self.lo.is_nan() || self.hi.is_nan() {
            return Err(CliError::Usage(format!(
                "need lo < hi, got {} and {}",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(CliError::Usage("a sweep needs at least 2 points".into()));
        }
        if self.spacing == Spacing::Log && self.lo <= 0.0 {
            return Err(CliError::Usage("log spacing needs lo > 0".into()));
        }
        if !allowed_vars(self.mode).contains(&self.var) {
            return Err(CliError::Usage(format!(
                "sweep variable {} is not available in {:?} mode",
                self.var.column_name(),
                self.mode
            )));
        }
        if self.outputs.is_empty() {
            return Err(CliError::Usage("request at least one output column".into()));
        }
        let allowed = allowed_outputs(self.mode);
        for o in &self.outputs {
            if !allowed.contains(o) {
                return Err(CliError::Usage(format!(
                    "output {} is not defined in {:?} mode",
                    o.column_name(),
                    self.mode
                )));
            }
        }
        if self.mode != SweepMode::Baseline && self.model.family() != CostFamily::Power {
            return Err(CliError::Usage(
                "the monopolist/marginal/linear-fee extensions are modeled for the power family only"
                    .into(),
            ));
        }
        if self.var == SweepVar::Gamma && !(self.lo >= 0.0 && self.hi < 1.0) {
            return Err(CliError::Usage(
                "gamma sweeps must stay inside [0, 1)".into(),
            ));
        }
        if self.mode == SweepMode::Marginal && !(0.0..1.0).contains(&self.gamma) {
            return Err(CliError::Usage("gamma must lie in [0, 1)".into()));
        }
        if self.mode == SweepMode::LinearFee {
            let alphas_ok = match self.var {
                SweepVar::Alpha => self.lo > 0.0 && self.hi < 1.0,
                _ => self.params.alpha > 0.0 && self.params.alpha < 1.0,
            };
            if !alphas_ok {
                return Err(CliError::Usage(
                    "linear fees need a fee scaling strictly inside (0, 1)".into(),
                ));
            }
        }
        if self.var == SweepVar::Consumers && self.lo < 2.0 {
            return Err(CliError::Usage("consumer sweeps start at 2".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let v = match self.spacing {
                    Spacing::Linear => self.lo + (self.hi - self.lo) * t,
                    Spacing::Log => self.lo * (self.hi / self.lo).powf(t),
                };
                if self.var == SweepVar::Consumers {
                    v.round().max(2.0)
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn header(&self) -> Vec<&'static str> {
        let mut h = vec![self.var.column_name(), "regime"];
        h.extend(self.outputs.iter().map(|o| o.column_name()));
        h
    }

    /// Evaluate every sweep point into CSV cells (already formatted).
    pub fn rows(&self) -> Result<Vec<Vec<String>>, CliError> {
        self.validate()?;
        let mut rows = Vec::with_capacity(self.points);
        for value in self.values() {
            rows.push(self.row_at(value)?);
        }
        Ok(rows)
    }

    fn row_at(&self, value: f64) -> Result<Vec<String>, CliError> {
        let point = self.evaluate(value)?;
        let mut row = Vec::with_capacity(2 + self.outputs.len());
        row.push(fmt_f64(value));
        row.push(regime_name(point.regime).to_string());
        for output in &self.outputs {
            row.push(point.cell(*output));
        }
        Ok(row)
    }

    fn evaluate(&self, value: f64) -> Result<SweepPoint, CliError> {
        match self.mode {
            SweepMode::Baseline => self.evaluate_baseline(value),
            SweepMode::Monopolist => self.evaluate_monopolist(value),
            SweepMode::Marginal => self.evaluate_marginal(value),
            SweepMode::LinearFee => self.evaluate_linear_fee(value),
        }
    }

    fn evaluate_baseline(&self, value: f64) -> Result<SweepPoint, CliError> {
        let p = &self.params;
        let (params, nu) = match self.var {
            SweepVar::Nu => (*p, value),
            SweepVar::Alpha => {
                let params = MarketParams::new(
                    value,
                    p.consumers,
                    p.suppliers,
                    p.supply_cost,
                    p.human_cost,
                    p.manual_cost,
                )?;
                let nu = params.effective_cost().nu;
                (params, nu)
            }
            SweepVar::Consumers => {
                let params = MarketParams::new(
                    p.alpha,
                    value as u32,
                    p.suppliers,
                    p.supply_cost,
                    p.human_cost,
                    p.manual_cost,
                )?;
                let nu = params.effective_cost().nu;
                (params, nu)
            }
            SweepVar::SupplyCost => {
                let params = MarketParams::new(
                    p.alpha,
                    p.consumers,
                    p.suppliers,
                    value,
                    p.human_cost,
                    p.manual_cost,
                )?;
                let nu = params.effective_cost().nu;
                (params, nu)
            }
            SweepVar::Gamma => unreachable!("rejected by validate"),
        };
        let model = &self.model;
        let margin = disintermediation_margin(model, &params, nu)?;
        let regime = if margin > 0.0 {
            Regime::Disintermediated
        } else {
            Regime::Intermediated
        };
        Ok(SweepPoint {
            regime,
            quality: Some(content_quality(model, &params, nu)?),
            intermediary_utility: Some(intermediary_utility(model, &params, nu)?),
            consumer_utility: Some(consumer_utility(model, &params, nu)?),
            social_welfare: Some(social_welfare(model, &params, nu)?),
            planner_with: Some(planner_welfare(model, &params, nu, true)?),
            planner_without: Some(planner_welfare(model, &params, nu, false)?),
            margin: Some(margin),
            usage: Some(if regime == Regime::Intermediated {
                params.consumers
            } else {
                0
            }),
        })
    }

    fn evaluate_monopolist(&self, supply_cost: f64) -> Result<SweepPoint, CliError> {
        let p = &self.params;
        let beta = self.model.beta();
        let sol = extensions::monopolist_price(beta, p.alpha, p.consumers, supply_cost)?;
        let model = &self.model;
        let regime = if sol.usage > 0 {
            Regime::Intermediated
        } else {
            Regime::Disintermediated
        };
        // Consumers face the monopolist's price as their effective cost.
        let nu = sol.price;
        let u = model.max_direct_utility(nu)?;
        let quality = match regime {
            Regime::Intermediated => p.alpha + u,
            Regime::Disintermediated => model.optimal_quality(nu)?,
        };
        let inter = match regime {
            Regime::Intermediated => {
                (p.alpha * p.consumers_f() - nu * model.g(p.alpha + u)?).max(0.0)
            }
            Regime::Disintermediated => 0.0,
        };
        Ok(SweepPoint {
            regime,
            quality: Some(quality),
            intermediary_utility: Some(inter),
            consumer_utility: Some(u),
            social_welfare: None,
            planner_with: None,
            planner_without: None,
            margin: None,
            usage: Some(sol.usage),
        })
    }

    fn evaluate_marginal(&self, value: f64) -> Result<SweepPoint, CliError> {
        let p = &self.params;
        let beta = self.model.beta();
        let (gamma, nu) = match self.var {
            SweepVar::Gamma => (value, p.effective_cost().nu),
            SweepVar::Nu => (self.gamma, value),
            _ => unreachable!("rejected by validate"),
        };
        let margin = extensions::marginal_margin(beta, p.alpha, p.consumers, gamma, nu)?;
        let regime = if margin > 0.0 {
            Regime::Disintermediated
        } else {
            Regime::Intermediated
        };
        let scaled = nu * (1.0 + gamma);
        let u = self.model.max_direct_utility(scaled)?;
        let quality = match regime {
            Regime::Intermediated => p.alpha + u,
            Regime::Disintermediated => self.model.optimal_quality(scaled)?,
        };
        Ok(SweepPoint {
            regime,
            quality: Some(quality),
            intermediary_utility: Some((-margin).max(0.0)),
            consumer_utility: Some(u),
            social_welfare: None,
            planner_with: None,
            planner_without: None,
            margin: Some(margin),
            usage: Some(if regime == Regime::Intermediated {
                p.consumers
            } else {
                0
            }),
        })
    }

    fn evaluate_linear_fee(&self, value: f64) -> Result<SweepPoint, CliError> {
        let p = &self.params;
        let beta = self.model.beta();
        let (alpha, consumers) = match self.var {
            SweepVar::Alpha => (value, p.consumers),
            SweepVar::Consumers => (p.alpha, value as u32),
            SweepVar::SupplyCost => (p.alpha, p.consumers),
            _ => unreachable!("rejected by validate"),
        };
        let fee = extensions::LinearFeeParams::new(alpha)?;
        let margin = extensions::linear_fee_margin(beta, &fee, consumers)?;
        let usage = extensions::linear_fee_usage(beta, alpha, consumers)?;
        let regime = if usage > 0 {
            Regime::Intermediated
        } else {
            Regime::Disintermediated
        };
        Ok(SweepPoint {
            regime,
            quality: None,
            intermediary_utility: None,
            consumer_utility: None,
            social_welfare: None,
            planner_with: None,
            planner_without: None,
            margin: Some(margin),
            usage: Some(usage),
        })
    }
}

struct SweepPoint {
    regime: Regime,
    quality: Option<f64>,
    intermediary_utility: Option<f64>,
    consumer_utility: Option<f64>,
    social_welfare: Option<f64>,
    planner_with: Option<f64>,
    planner_without: Option<f64>,
    margin: Option<f64>,
    usage: Option<u32>,
}

impl SweepPoint {
    fn cell(&self, field: OutputField) -> String {
        let opt = match field {
            OutputField::Quality => self.quality,
            OutputField::IntermediaryUtility => self.intermediary_utility,
            OutputField::ConsumerUtility => self.consumer_utility,
            OutputField::SocialWelfare => self.social_welfare,
            OutputField::PlannerWith => self.planner_with,
            OutputField::PlannerWithout => self.planner_without,
            OutputField::Margin => self.margin,
            OutputField::Usage => return self.usage.map_or("null".to_string(), |u| u.to_string()),
        };
        match opt {
            Some(v) => fmt_f64(v),
            None => "null".to_string(),
        }
    }
}

/// Parse, dedupe, and canonically order a comma-separated output list.
pub fn parse_outputs(raw: &[String]) -> Result<Vec<OutputField>, CliError> {
    let mut set = Vec::new();
    for item in raw {
        for part in item.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let field = part.parse::<OutputField>().map_err(CliError::Usage)?;
            if !set.contains(&field) {
                set.push(field);
            }
        }
    }
    set.sort();
    Ok(set)
}
