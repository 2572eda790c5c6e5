//! Market primitives: fee, population sizes, and the cost parameters that
//! determine the effective production cost `nu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Baseline market parameters.
///
/// `supply_cost` is the suppliers' marginal cost factor, `human_cost` the
/// human-labor factor stacked on top of any supplier price, and
/// `manual_cost` the factor for producing without the technology
/// (`+inf` models a market where manual production is unavailable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub alpha: f64,
    pub consumers: u32,
    pub suppliers: u32,
    pub supply_cost: f64,
    pub human_cost: f64,
    /// Serialized as `null` when infinite (JSON has no infinity).
    #[serde(with = "unbounded_cost")]
    pub manual_cost: f64,
}

/// JSON mapping for a cost that may be `+inf`: `null` means unbounded.
mod unbounded_cost {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() {
            serializer.serialize_none()
        } else {
            serializer.serialize_some(value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::INFINITY))
    }
}

impl MarketParams {
    pub fn new(
        alpha: f64,
        consumers: u32,
        suppliers: u32,
        supply_cost: f64,
        human_cost: f64,
        manual_cost: f64,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Params(format!(
                "fee alpha must be finite and > 0, got {alpha}"
            )));
        }
        if consumers < 2 {
            return Err(Error::Params(format!(
                "the market needs at least two consumers, got {consumers}"
            )));
        }
        if suppliers < 1 {
            return Err(Error::Params(
                "the market needs at least one supplier".into(),
            ));
        }
        if !(supply_cost.is_finite() && supply_cost > 0.0) {
            return Err(Error::Params(format!(
                "supply cost must be finite and > 0, got {supply_cost}"
            )));
        }
        if !(human_cost.is_finite() && human_cost >= 0.0) {
            return Err(Error::Params(format!(
                "human cost must be finite and >= 0, got {human_cost}"
            )));
        }
        if manual_cost.is_nan() || manual_cost <= 0.0 {
            return Err(Error::Params(format!(
                "manual cost must be > 0 (possibly +inf), got {manual_cost}"
            )));
        }
        Ok(MarketParams {
            alpha,
            consumers,
            suppliers,
            supply_cost,
            human_cost,
            manual_cost,
        })
    }

    /// Convenience constructor: competitive suppliers, no human cost, no
    /// manual fallback. The effective cost then equals `supply_cost`.
    pub fn baseline(alpha: f64, consumers: u32, supply_cost: f64) -> Result<Self> {
        Self::new(alpha, consumers, 2, supply_cost, 0.0, f64::INFINITY)
    }

    pub fn consumers_f(&self) -> f64 {
        f64::from(self.consumers)
    }

    /// Effective cost at competitive prices (every supplier at its marginal
    /// cost): `nu = min(supply_cost + human_cost, manual_cost)`.
    pub fn effective_cost(&self) -> EffectiveCost {
        EffectiveCost::from_prices(self.supply_cost + self.human_cost, self.manual_cost)
    }
}

/// Which production route realizes the effective cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostSource {
    Supplier,
    Manual,
}

/// The effective per-unit cost `nu` together with its source. Suppliers win
/// ties against manual production.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCost {
    pub nu: f64,
    pub source: CostSource,
}

impl EffectiveCost {
    pub fn from_prices(technology_route: f64, manual_route: f64) -> Self {
        if technology_route <= manual_route {
            EffectiveCost {
                nu: technology_route,
                source: CostSource::Supplier,
            }
        } else {
            EffectiveCost {
                nu: manual_route,
                source: CostSource::Manual,
            }
        }
    }
}
