//! Equilibrium quality, per-agent utilities, social welfare, the planner
//! benchmarks, and the bliss point.
//!
//! All metrics are functions of `(model, params, nu)` so sweeps can evaluate
//! counterfactual cost levels; equilibrium callers pass the equilibrium
//! `nu = min(supply_cost + human_cost, manual_cost)`. The regime at `nu` is
//! decided by the sign of the disintermediation margin, which agrees with
//! the threshold interval by U-shapedness.

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::equilibrium::{self, compute_thresholds, disintermediation_margin, is_power, Regime};
use crate::error::Result;
use crate::market::MarketParams;
use crate::root;

/// Welfare snapshot at one cost level. Fees are transfers, so
/// `social_welfare = C * consumer_utility + intermediary_utility +
/// supplier_profit` holds as an accounting identity (supplier profit is zero
/// at the baseline equilibrium: prices equal marginal cost).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareReport {
    pub regime: Regime,
    pub consumer_utility: f64,
    pub intermediary_utility: f64,
    pub supplier_profit: f64,
    pub social_welfare: f64,
    pub planner_with_intermediary: f64,
    pub planner_without_intermediary: f64,
    pub bliss_point: Option<f64>,
}

/// Quality of the content each consumer ends up consuming: the
/// intermediary's `alpha + U(nu)` inside the intermediated interval, the
/// self-produced `w*(nu)` outside it.
pub fn content_quality(model: &CostModel, params: &MarketParams, nu: f64) -> Result<f64> {
    let phi = disintermediation_margin(model, params, nu)?;
    if phi <= 0.0 {
        Ok(params.alpha + model.max_direct_utility(nu)?)
    } else {
        model.optimal_quality(nu)
    }
}

/// Intermediary's equilibrium utility: fee revenue minus the cost of
/// matching the consumers' outside option, zero under disintermediation.
/// Equals `max(0, -phi(nu))`, hence continuous and inverse U-shaped with
/// peak `alpha (C - 1)`.
pub fn intermediary_utility(model: &CostModel, params: &MarketParams, nu: f64) -> Result<f64> {
    let phi = disintermediation_margin(model, params, nu)?;
    Ok((-phi).max(0.0))
}

/// Consumer utility, `U(nu)` in both regimes: the intermediary leaves every
/// consumer exactly at the direct-production payoff, independent of the fee
/// and of the number of consumers.
pub fn consumer_utility(model: &CostModel, _params: &MarketParams, nu: f64) -> Result<f64> {
    model.max_direct_utility(nu)
}

/// Equilibrium social welfare: total consumer utility plus the
/// intermediary's utility (suppliers price at cost and earn nothing).
pub fn social_welfare(model: &CostModel, params: &MarketParams, nu: f64) -> Result<f64> {
    let consumers = params.consumers_f();
    let u = model.max_direct_utility(nu)?;
    let phi = disintermediation_margin(model, params, nu)?;
    Ok(consumers * u + (-phi).max(0.0))
}

/// The planner benchmark: with an intermediary the planner produces once at
/// `max_w (C w - nu g(w))` (first-order condition `g'(w) = C/nu`); without
/// one each consumer self-produces, totalling `C * U(nu)`.
pub fn planner_welfare(
    model: &CostModel,
    params: &MarketParams,
    nu: f64,
    with_intermediary: bool,
) -> Result<f64> {
    let consumers = params.consumers_f();
    if with_intermediary {
        let w = model.optimal_quality(nu / consumers)?;
        Ok(consumers * w - nu * model.g(w)?)
    } else {
        Ok(consumers * model.max_direct_utility(nu)?)
    }
}

/// The unique cost level where equilibrium welfare meets the planner's
/// optimum with an intermediary, when it exists in the intermediated range.
///
/// Power models use the closed form
/// `nu_b = (((C^(1/(beta-1)) - 1) beta^(-1/(beta-1)) + beta^(-beta/(beta-1))) / alpha)^(beta-1)`;
/// other families root-find `alpha + U(nu) = w*(nu / C)`, which has at most
/// one crossing because the difference is strictly monotone in `nu`.
pub fn bliss_point(model: &CostModel, params: &MarketParams) -> Result<Option<f64>> {
    let consumers = params.consumers_f();
    let alpha = params.alpha;
    if is_power(model) {
        let beta = model.beta();
        let e = 1.0 / (beta - 1.0);
        let numer = (consumers.powf(e) - 1.0) * beta.powf(-e) + beta.powf(-beta * e);
        return Ok(Some((numer / alpha).powf(beta - 1.0)));
    }

    let thresholds = compute_thresholds(model, params)?;
    let (lo, hi) = match (thresholds.t_lower, thresholds.t_upper) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Ok(None),
    };
    let gap = |nu: f64| -> f64 {
        let u = match model.max_direct_utility(nu) {
            Ok(u) => u,
            Err(_) => return f64::NAN,
        };
        let planner_quality = match model.optimal_quality(nu / consumers) {
            Ok(w) => w,
            Err(_) => return f64::NAN,
        };
        alpha + u - planner_quality
    };
    let g_lo = gap(lo);
    let g_hi = gap(hi);
    if g_lo.is_nan() || g_hi.is_nan() || g_lo * g_hi > 0.0 {
        return Ok(None);
    }
    match root::bisect_default("bliss point", gap, lo, hi, g_lo) {
        Ok(nu_b) => Ok(Some(nu_b)),
        Err(_) => Ok(None),
    }
}

/// Assemble the full welfare snapshot at one cost level.
pub fn welfare_report(model: &CostModel, params: &MarketParams, nu: f64) -> Result<WelfareReport> {
    let regime = equilibrium::regime_at(model, params, nu)?;
    let consumer = consumer_utility(model, params, nu)?;
    let intermediary = intermediary_utility(model, params, nu)?;
    let supplier_profit = 0.0;
    Ok(WelfareReport {
        regime,
        consumer_utility: consumer,
        intermediary_utility: intermediary,
        supplier_profit,
        social_welfare: params.consumers_f() * consumer + intermediary + supplier_profit,
        planner_with_intermediary: planner_welfare(model, params, nu, true)?,
        planner_without_intermediary: planner_welfare(model, params, nu, false)?,
        bliss_point: bliss_point(model, params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostModel;

    fn power2() -> CostModel {
        CostModel::power(2.0).unwrap()
    }

    fn params_c4() -> MarketParams {
        MarketParams::baseline(1.0, 4, 1.0).unwrap()
    }

    #[test]
    fn quality_in_all_three_regimes() {
        let m = power2();
        let p = params_c4();
        assert!((content_quality(&m, &p, 1.0).unwrap() - 1.25).abs() < 1e-12);
        assert!((content_quality(&m, &p, 4.0).unwrap() - 0.125).abs() < 1e-12);
        assert!((content_quality(&m, &p, 0.01).unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn intermediary_utility_values() {
        let m = power2();
        let p = params_c4();
        // nu_T = 1/(4 alpha) = 0.25 attains the maximum alpha (C - 1) = 3.
        assert!((intermediary_utility(&m, &p, 0.25).unwrap() - 3.0).abs() < 1e-12);
        assert!((intermediary_utility(&m, &p, 1.0).unwrap() - 2.4375).abs() < 1e-12);
        assert_eq!(intermediary_utility(&m, &p, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn consumer_utility_ignores_fee_and_population() {
        let m = power2();
        for &(alpha, c) in &[(0.5, 2u32), (1.0, 4), (2.0, 16)] {
            let p = MarketParams::baseline(alpha, c, 1.0).unwrap();
            let u = consumer_utility(&m, &p, 1.0).unwrap();
            assert_eq!(u, 0.25);
        }
        let p = params_c4();
        assert_eq!(consumer_utility(&m, &p, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn social_welfare_values_and_continuity() {
        let m = power2();
        let p = params_c4();
        assert!((social_welfare(&m, &p, 1.0).unwrap() - 3.4375).abs() < 1e-12);
        assert!((social_welfare(&m, &p, 4.0).unwrap() - 0.25).abs() < 1e-12);
        // The two branches meet where the margin vanishes.
        let t = compute_thresholds(&m, &p).unwrap();
        let t_u = t.t_upper.unwrap();
        let intermediated_branch = p.consumers_f() * (p.alpha + m.max_direct_utility(t_u).unwrap())
            - t_u * m.g(p.alpha + m.max_direct_utility(t_u).unwrap()).unwrap();
        let direct_branch = p.consumers_f() * m.max_direct_utility(t_u).unwrap();
        assert!((intermediated_branch - direct_branch).abs() < 1e-8);
    }

    #[test]
    fn planner_values() {
        let m = power2();
        let p = params_c4();
        assert!((planner_welfare(&m, &p, 1.0, true).unwrap() - 4.0).abs() < 1e-12);
        assert!((planner_welfare(&m, &p, 1.0, false).unwrap() - 1.0).abs() < 1e-12);
        // max_w (C w - nu g(w)) = C * max_w (w - (nu/C) g(w))
        for &nu in &[0.3, 1.0, 2.5] {
            let direct = planner_welfare(&m, &p, nu, true).unwrap();
            let scaled = p.consumers_f() * m.max_direct_utility(nu / p.consumers_f()).unwrap();
            assert!((direct / scaled - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bliss_point_power_closed_form() {
        let m = power2();
        let p = params_c4();
        let nu_b = bliss_point(&m, &p).unwrap().unwrap();
        assert!((nu_b - 1.75).abs() < 1e-12);
        let sw = social_welfare(&m, &p, nu_b).unwrap();
        let planner = planner_welfare(&m, &p, nu_b, true).unwrap();
        assert!((sw - 16.0 / 7.0).abs() < 1e-10);
        assert!((sw - planner).abs() <= 1e-8 * planner);

        let p2 = MarketParams::baseline(1.0, 2, 1.0).unwrap();
        let nu_b2 = bliss_point(&m, &p2).unwrap().unwrap();
        assert!((nu_b2 - 0.75).abs() < 1e-12);
        let t2 = compute_thresholds(&m, &p2).unwrap();
        assert!(t2.t_lower.unwrap() < nu_b2 && nu_b2 < t2.t_upper.unwrap());
    }

    #[test]
    fn bliss_point_general_route_matches_power() {
        // Run the root-finding branch on a non-power family and certify the
        // welfare gap closes there.
        let m = CostModel::power_exp_sqrt(2.0).unwrap();
        let p = params_c4();
        let nu_b = bliss_point(&m, &p)
            .unwrap()
            .expect("bliss point should exist");
        let sw = social_welfare(&m, &p, nu_b).unwrap();
        let planner = planner_welfare(&m, &p, nu_b, true).unwrap();
        assert!(
            (sw - planner).abs() <= 1e-8 * planner,
            "gap {} at nu_b={nu_b}",
            sw - planner
        );
    }

    #[test]
    fn accounting_identity() {
        let m = power2();
        let p = params_c4();
        for &nu in &[0.01, 0.2, 1.0, 3.0, 5.0] {
            let r = welfare_report(&m, &p, nu).unwrap();
            let total =
                p.consumers_f() * r.consumer_utility + r.intermediary_utility + r.supplier_profit;
            assert!((r.social_welfare - total).abs() <= 1e-10);
        }
    }

    #[test]
    fn quality_jump_directions_at_thresholds() {
        let m = power2();
        let p = params_c4();
        let t = compute_thresholds(&m, &p).unwrap();
        let t_l = t.t_lower.unwrap();
        let t_u = t.t_upper.unwrap();
        // Just below the lower threshold the self-produced quality exceeds
        // what the intermediary would offer at the threshold.
        let direct_low = m.optimal_quality(t_l * (1.0 - 1e-9)).unwrap();
        let offered_low = p.alpha + m.max_direct_utility(t_l).unwrap();
        assert!(direct_low > offered_low);
        // Just above the upper threshold self-production falls short of the
        // intermediary's offer at the threshold.
        let direct_high = m.optimal_quality(t_u * (1.0 + 1e-9)).unwrap();
        let offered_high = p.alpha + m.max_direct_utility(t_u).unwrap();
        assert!(direct_high < offered_high);
    }
}
