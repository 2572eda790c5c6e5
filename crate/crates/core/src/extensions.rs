//! Model extensions, all for the power family `g(w) = w^beta`: a monopolist
//! supplier that prices strategically, marginal distribution costs, and
//! fees that scale linearly with quality.

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::equilibrium::{closed_form_thresholds_power, Thresholds};
use crate::error::{Error, Result};
use crate::root;
use crate::tolerances;

/// Which branch of the monopolist's piecewise pricing map applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceCase {
    /// `supply_cost < T_L / beta`: plain monopoly markup, disintermediated.
    MarkupBelow,
    /// Price held down at `T_L` to keep the intermediary out.
    SuppressAtLower,
    /// Price pushed up to `T_U`, the highest level the intermediary bears.
    HoldAtUpper,
    /// `supply_cost > T_mon_U`: plain monopoly markup, disintermediated.
    MarkupAbove,
}

/// Monopolist pricing outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonopolistSolution {
    pub price: f64,
    pub t_mon_lower: f64,
    pub t_mon_upper: f64,
    /// `C` when the intermediary survives, else `0`.
    pub usage: u32,
    pub case: PriceCase,
}

/// Marginal-cost extension parameters: each unit distributed costs an extra
/// `gamma * nu * g(w)`, making the market equivalent to a baseline one with
/// `C' = C (1 + gamma) / (1 + gamma C)` consumers and costs scaled by
/// `1 + gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalCostParams {
    pub gamma: f64,
    pub effective_consumers: f64,
}

impl MarginalCostParams {
    pub fn new(gamma: f64, consumers: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Params(format!(
                "marginal factor gamma must lie in [0, 1), got {gamma}"
            )));
        }
        if consumers < 2 {
            return Err(Error::Params("need at least two consumers".into()));
        }
        let c = f64::from(consumers);
        Ok(MarginalCostParams {
            gamma,
            effective_consumers: c * (1.0 + gamma) / (1.0 + gamma * c),
        })
    }
}

/// Linear-fee extension parameters: consumers pay `alpha * w_M` with a fee
/// scaling strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFeeParams {
    pub alpha: f64,
}

impl LinearFeeParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Params(format!(
                "linear fee scaling must lie strictly inside (0, 1), got {alpha}"
            )));
        }
        Ok(LinearFeeParams { alpha })
    }
}

fn check_power_inputs(beta: f64, alpha: f64, consumers: u32) -> Result<f64> {
    if !(beta.is_finite() && beta > 1.0) {
        return Err(Error::Params(format!(
            "beta must be finite and > 1, got {beta}"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Params(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    if consumers < 2 {
        return Err(Error::Params("need at least two consumers".into()));
    }
    Ok(f64::from(consumers))
}

/// `nu * g(w*(nu))` for the power family: `nu^(-1/(beta-1)) beta^(-beta/(beta-1))`.
fn power_expenditure(beta: f64, nu: f64) -> f64 {
    nu.powf(-1.0 / (beta - 1.0)) * beta.powf(-beta / (beta - 1.0))
}

/// The monopolist's switching costs `(T_mon_L, T_mon_U)`.
///
/// `T_mon_U` is the supply cost at which holding the price at `T_U` stops
/// beating the plain markup `beta * supply_cost`:
///
/// ```text
/// C (1 - 1/beta) nu^(-1/(beta-1)) beta^(-(beta+1)/(beta-1)) = C (1 - nu/T_U) alpha
/// ```
///
/// on `(T_U / beta, T_U)`. `T_mon_L` is where suppressing the price at `T_L`
/// stops beating holding at `T_U`:
///
/// ```text
/// C (1 - nu/T_L) T_L g(w*(T_L)) = C (1 - nu/T_U) alpha
/// ```
///
/// on `(T_L / beta, T_L)`. Requires `C > beta / (beta - 1)` so the brackets
/// carry a sign change.
pub fn monopolist_thresholds(beta: f64, alpha: f64, consumers: u32) -> Result<(f64, f64)> {
    let c = check_power_inputs(beta, alpha, consumers)?;
    if c <= beta / (beta - 1.0) {
        return Err(Error::Params(format!(
            "the monopolist analysis needs C > beta/(beta-1) = {}, got C = {c}",
            beta / (beta - 1.0)
        )));
    }
    let base = closed_form_thresholds_power(beta, alpha, c)?;
    let t_l = base.t_lower.expect("power thresholds always exist");
    let t_u = base.t_upper.expect("power thresholds always exist");

    // Upper switch: markup profit (left side) vs. held-price profit.
    let markup_factor = (1.0 - 1.0 / beta) * beta.powf(-(beta + 1.0) / (beta - 1.0));
    let upper_gap =
        |nu: f64| c * markup_factor * nu.powf(-1.0 / (beta - 1.0)) - c * (1.0 - nu / t_u) * alpha;
    let (lo_u, hi_u) = (t_u / beta, t_u);
    let t_mon_upper =
        solve_profit_gap("monopolist upper switch", upper_gap, lo_u, hi_u, c * alpha)?;

    // Lower switch: suppression profit vs. held-price profit.
    let suppression = power_expenditure(beta, t_l);
    let lower_gap = |nu: f64| c * (1.0 - nu / t_l) * suppression - c * (1.0 - nu / t_u) * alpha;
    let (lo_l, hi_l) = (t_l / beta, t_l);
    let t_mon_lower =
        solve_profit_gap("monopolist lower switch", lower_gap, lo_l, hi_l, c * alpha)?;

    Ok((t_mon_lower, t_mon_upper))
}

fn solve_profit_gap(
    op: &'static str,
    gap: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    scale: f64,
) -> Result<f64> {
    let f_lo = gap(lo);
    let f_hi = gap(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_lo * f_hi > 0.0 {
        return Err(Error::solver(
            op,
            format!("no sign change on [{lo}, {hi}]: gap({lo})={f_lo}, gap({hi})={f_hi}"),
        ));
    }
    let root = root::bisect_default(op, &gap, lo, hi, f_lo)?;
    let residual = gap(root);
    if residual.abs() <= tolerances::PROFIT_ROOT_RESIDUAL_REL * scale {
        Ok(root)
    } else {
        Err(Error::solver(
            op,
            format!("profit-gap residual {residual:e} at nu={root} exceeds tolerance"),
        ))
    }
}

/// The monopolist's price map and the implied usage. Assumes manual
/// production is unavailable (`manual_cost = +inf`); consumers break ties
/// toward direct production below `T_U` and toward the intermediary at or
/// above it, so the intermediated interval is `(T_mon_L, T_mon_U]`.
pub fn monopolist_price(
    beta: f64,
    alpha: f64,
    consumers: u32,
    supply_cost: f64,
) -> Result<MonopolistSolution> {
    if !(supply_cost.is_finite() && supply_cost > 0.0) {
        return Err(Error::Params(format!(
            "supply cost must be finite and > 0, got {supply_cost}"
        )));
    }
    let (t_mon_lower, t_mon_upper) = monopolist_thresholds(beta, alpha, consumers)?;
    let base = closed_form_thresholds_power(beta, alpha, f64::from(consumers))?;
    let t_l = base.t_lower.expect("power thresholds always exist");
    let t_u = base.t_upper.expect("power thresholds always exist");

    let (price, usage, case) = if supply_cost < t_l / beta {
        (beta * supply_cost, 0, PriceCase::MarkupBelow)
    } else if supply_cost <= t_mon_lower {
        (t_l, 0, PriceCase::SuppressAtLower)
    } else if supply_cost <= t_mon_upper {
        (t_u, consumers, PriceCase::HoldAtUpper)
    } else {
        (beta * supply_cost, 0, PriceCase::MarkupAbove)
    };
    Ok(MonopolistSolution {
        price,
        t_mon_lower,
        t_mon_upper,
        usage,
        case,
    })
}

/// The disintermediation margin of the marginal-cost market, straight from
/// its entry condition:
/// `nu (1 + gamma C) g(alpha + max_w (w - nu (1 + gamma) g(w))) - alpha C`.
///
/// Deliberately not routed through the reparameterized thresholds so margin
/// signs and threshold intervals can cross-check each other.
pub fn marginal_margin(beta: f64, alpha: f64, consumers: u32, gamma: f64, nu: f64) -> Result<f64> {
    let c = check_power_inputs(beta, alpha, consumers)?;
    MarginalCostParams::new(gamma, consumers)?;
    if nu <= 0.0 || !nu.is_finite() {
        return Err(Error::Params(format!(
            "cost level must be positive and finite, got {nu}"
        )));
    }
    let model = CostModel::power(beta)?;
    let outside_option = model.max_direct_utility(nu * (1.0 + gamma))?;
    Ok(nu * (1.0 + gamma * c) * model.g(alpha + outside_option)? - alpha * c)
}

/// Thresholds under marginal distribution costs:
/// `T_marg = (1 + gamma)^(-1) * T(C', alpha, beta)` on both ends.
pub fn marginal_cost_thresholds(
    beta: f64,
    alpha: f64,
    consumers: u32,
    gamma: f64,
) -> Result<Thresholds> {
    check_power_inputs(beta, alpha, consumers)?;
    let mc = MarginalCostParams::new(gamma, consumers)?;
    let scaled = closed_form_thresholds_power(beta, alpha, mc.effective_consumers)?;
    let shrink = 1.0 / (1.0 + gamma);
    let nu_min = scaled.nu_min * shrink;
    Ok(Thresholds {
        t_lower: scaled.t_lower.map(|t| t * shrink),
        t_upper: scaled.t_upper.map(|t| t * shrink),
        nu_min,
        phi_min: marginal_margin(beta, alpha, consumers, gamma, nu_min)?,
    })
}

/// The linear-fee entry gap
/// `C^(-1/(beta-1)) (beta^(-1/(beta-1)) - beta^(-beta/(beta-1))) - alpha^(1/(beta-1)) (1 - alpha)`;
/// positive means the intermediary cannot enter at any production cost.
pub fn linear_fee_margin(beta: f64, fee: &LinearFeeParams, consumers: u32) -> Result<f64> {
    let c = check_power_inputs(beta, fee.alpha, consumers)?;
    let e = 1.0 / (beta - 1.0);
    let rhs = c.powf(-e) * (beta.powf(-e) - beta.powf(-beta * e));
    let lhs = fee.alpha.powf(e) * (1.0 - fee.alpha);
    Ok(rhs - lhs)
}

/// Usage under quality-proportional fees: `C` when the entry condition
/// holds, else `0` — independent of every production-cost parameter.
pub fn linear_fee_usage(beta: f64, alpha: f64, consumers: u32) -> Result<u32> {
    let fee = LinearFeeParams::new(alpha)?;
    Ok(if linear_fee_margin(beta, &fee, consumers)? <= 0.0 {
        consumers
    } else {
        0
    })
}
