//! The disintermediation margin, its two zero crossings, and the baseline
//! subgame-perfect equilibrium with competing suppliers.
//!
//! The margin at effective cost `nu` is
//!
//! ```text
//! phi(nu) = nu * g(alpha + U(nu)) - alpha * C
//! ```
//!
//! the gap between what it costs the intermediary to match the consumers'
//! direct-production utility (fee included) and its fee revenue. `phi > 0`
//! means the intermediary cannot profitably retain consumers. `phi` is
//! U-shaped in `nu` with minimum value `alpha - alpha * C` attained where
//! `log_ratio(w*(nu)) = alpha`, so the intermediated region is the interval
//! between the two roots.

use serde::{Deserialize, Serialize};

use crate::cost::{CostFamily, CostModel};
use crate::error::{Error, Result};
use crate::market::{CostSource, EffectiveCost, MarketParams};
use crate::root;
use crate::tolerances;

/// Which of the two equilibrium regimes the market is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Intermediated,
    Disintermediated,
}

/// Boundaries of the intermediated cost interval.
///
/// `t_lower = None` means the margin stays negative as `nu -> 0`, so
/// intermediation persists at arbitrarily cheap production (the power-exp
/// regime); `t_upper = None` means no crossing was found below the bracket
/// expansion cap. `nu_min` is the margin's minimizer (interior when one
/// exists, otherwise the argmin over a log grid) and `phi_min` the margin
/// value there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t_lower: Option<f64>,
    pub t_upper: Option<f64>,
    pub nu_min: f64,
    pub phi_min: f64,
}

impl Thresholds {
    /// Regime at cost level `nu` implied by the interval (closed
    /// boundaries: the intermediary survives where `phi <= 0`).
    pub fn regime_at(&self, nu: f64) -> Regime {
        let below = self.t_lower.is_some_and(|t| nu < t);
        let above = self.t_upper.is_some_and(|t| nu > t);
        if below || above {
            Regime::Disintermediated
        } else {
            Regime::Intermediated
        }
    }

    pub fn width(&self) -> Option<f64> {
        match (self.t_lower, self.t_upper) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }
}

/// The disintermediation margin `phi(nu)`; positive means the intermediary
/// exits at cost level `nu`, non-positive means it stays (consumers break
/// ties toward the intermediary).
pub fn disintermediation_margin(model: &CostModel, params: &MarketParams, nu: f64) -> Result<f64> {
    margin_with(model, params.alpha, params.consumers_f(), nu)
}

/// Margin with explicit (possibly non-integer) fee and consumer mass; the
/// marginal-cost extension reuses it with an effective consumer count.
pub(crate) fn margin_with(model: &CostModel, alpha: f64, consumers: f64, nu: f64) -> Result<f64> {
    let u = model.max_direct_utility(nu)?;
    Ok(nu * model.g(alpha + u)? - alpha * consumers)
}

/// Regime implied by the sign of the margin at `nu`.
pub fn regime_at(model: &CostModel, params: &MarketParams, nu: f64) -> Result<Regime> {
    Ok(if disintermediation_margin(model, params, nu)? > 0.0 {
        Regime::Disintermediated
    } else {
        Regime::Intermediated
    })
}

/// Number of consumers buying from the intermediary at cost level `nu`:
/// `C` inside the intermediated interval, `0` outside.
pub fn usage(model: &CostModel, params: &MarketParams, nu: f64) -> Result<u32> {
    Ok(match regime_at(model, params, nu)? {
        Regime::Intermediated => params.consumers,
        Regime::Disintermediated => 0,
    })
}

/// The interior minimizer of `nu -> nu * g(alpha + U(nu))`: the unique
/// `nu_T` with `log_ratio(w*(nu_T)) = alpha`. Returns `None` when the
/// family's log ratio saturates below `alpha` (power-exp with alpha >= 1)
/// and the margin is monotone increasing instead of U-shaped.
pub fn interior_minimizer(model: &CostModel, alpha: f64) -> Result<Option<f64>> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::domain(
            "interior_minimizer",
            format!("requires a finite fee alpha > 0, got {alpha}"),
        ));
    }
    match model.log_ratio_inverse(alpha)? {
        None => Ok(None),
        Some(w) => {
            // A fee just under the saturating family's ratio supremum pins
            // the matching quality so high that g' overflows and the
            // minimizing cost underflows to zero: a boundary outcome too.
            let nu = 1.0 / model.g_prime(w)?;
            if nu.is_finite() && nu > 0.0 {
                Ok(Some(nu))
            } else {
                Ok(None)
            }
        }
    }
}

/// Fallback pivot when no interior minimizer exists: argmin of the margin
/// over a wide log grid. For a monotone margin this lands on an endpoint,
/// which is all the threshold searches need.
fn grid_argmin_margin(model: &CostModel, alpha: f64, consumers: f64) -> Result<f64> {
    let (lo, hi, points) = (1e-9f64, 1e9f64, 181usize);
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    let mut best = (f64::INFINITY, lo);
    for i in 0..points {
        let nu = lo * (ratio * i as f64).exp();
        let phi = margin_with(model, alpha, consumers, nu)?;
        if phi < best.0 {
            best = (phi, nu);
        }
    }
    Ok(best.1)
}

/// Both zero crossings of the margin for integer consumer counts.
pub fn compute_thresholds(model: &CostModel, params: &MarketParams) -> Result<Thresholds> {
    compute_thresholds_real(model, params.alpha, params.consumers_f())
}

/// Threshold computation for a real-valued consumer mass `consumers > 1`
/// (the marginal-cost extension reparameterizes to non-integer counts).
pub fn compute_thresholds_real(
    model: &CostModel,
    alpha: f64,
    consumers: f64,
) -> Result<Thresholds> {
    if consumers <= 1.0 || consumers.is_nan() {
        return Err(Error::Params(format!(
            "thresholds require a consumer mass > 1, got {consumers}"
        )));
    }
    let pivot = match interior_minimizer(model, alpha)? {
        Some(nu) => nu,
        None => grid_argmin_margin(model, alpha, consumers)?,
    };
    let phi_min = margin_with(model, alpha, consumers, pivot)?;
    if phi_min > 0.0 {
        // The margin never dips below zero: no intermediated interval.
        return Ok(Thresholds {
            t_lower: None,
            t_upper: None,
            nu_min: pivot,
            phi_min,
        });
    }

    let scale = alpha * consumers;
    let phi = |nu: f64| margin_with(model, alpha, consumers, nu).unwrap_or(f64::NAN);

    // The lower search seeds at eps and keeps expanding downward while the
    // margin stays negative; slow-growing families (power-exp-sqrt with
    // beta near 1) can push the crossing below any representable cost, in
    // which case the lower threshold is reported as absent.
    let eps = 1e-12f64.min(pivot * 1e-9);
    let phi_eps = phi(eps);
    let t_lower = if phi_eps > 0.0 {
        let root = root::bisect_default("lower threshold", phi, eps, pivot, phi_eps)?;
        Some(check_margin_root(model, alpha, consumers, root, scale)?)
    } else if phi_eps < 0.0 {
        match root::expand_downward(phi, eps, phi_eps, 100.0, 1e-280) {
            Some((lo, 0.0)) => Some(lo),
            Some((lo, f_lo)) => {
                // The margin is decreasing left of the pivot, so the probe
                // two decades up is still on the negative side.
                let root = root::bisect_default("lower threshold", phi, lo, lo * 100.0, f_lo)?;
                Some(check_margin_root(model, alpha, consumers, root, scale)?)
            }
            None => None,
        }
    } else {
        Some(eps)
    };

    let t_upper =
        match root::expand_upward(phi, pivot, phi_min, 2.0, tolerances::BRACKET_EXPANSION_CAP) {
            Some((hi, _)) => {
                let root = root::bisect_default("upper threshold", phi, pivot, hi, phi_min)?;
                Some(check_margin_root(model, alpha, consumers, root, scale)?)
            }
            None => None,
        };

    Ok(Thresholds {
        t_lower,
        t_upper,
        nu_min: pivot,
        phi_min,
    })
}

fn check_margin_root(
    model: &CostModel,
    alpha: f64,
    consumers: f64,
    root: f64,
    scale: f64,
) -> Result<f64> {
    let residual = margin_with(model, alpha, consumers, root)?;
    if residual.abs() <= tolerances::MARGIN_RESIDUAL_REL * scale {
        Ok(root)
    } else {
        Err(Error::solver(
            "threshold root",
            format!("margin residual {residual:e} at nu={root} exceeds tolerance"),
        ))
    }
}

/// Thresholds for the power family from its explicit scalar equation
///
/// ```text
/// nu^(-1/(beta(beta-1))) (beta^(-1/(beta-1)) - beta^(-beta/(beta-1))) alpha^(-1/beta)
///   + nu^(1/beta) alpha^((beta-1)/beta)  =  C^(1/beta)
/// ```
///
/// solved by the same bisection machinery. An independent route that must
/// agree with [`compute_thresholds`] on power models; also the backbone of
/// the monopolist and marginal-cost extensions. Accepts any real consumer
/// mass `consumers > 1`.
pub fn closed_form_thresholds_power(beta: f64, alpha: f64, consumers: f64) -> Result<Thresholds> {
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
    if consumers <= 1.0 || consumers.is_nan() {
        return Err(Error::Params(format!(
            "thresholds require a consumer mass > 1, got {consumers}"
        )));
    }
    let spread = beta.powf(-1.0 / (beta - 1.0)) - beta.powf(-beta / (beta - 1.0));
    let dec_exp = 1.0 / (beta * (beta - 1.0));
    let inc_exp = 1.0 / beta;
    let dec_coeff = spread * alpha.powf(-1.0 / beta);
    let inc_coeff = alpha.powf((beta - 1.0) / beta);
    let target = consumers.powf(1.0 / beta);

    let lhs = |nu: f64| dec_coeff * nu.powf(-dec_exp) + inc_coeff * nu.powf(inc_exp);
    let f = |nu: f64| lhs(nu) - target;

    // Stationary point of the decreasing-plus-increasing power sum.
    let nu_min = (dec_exp * dec_coeff / (inc_exp * inc_coeff)).powf(beta - 1.0);
    let f_min = f(nu_min);
    // The margin in original units: nu * g(alpha + U) - alpha C = alpha * (lhs^beta - C).
    let phi_min = alpha * (lhs(nu_min).powf(beta) - consumers);
    if f_min >= 0.0 {
        return Ok(Thresholds {
            t_lower: None,
            t_upper: None,
            nu_min,
            phi_min,
        });
    }

    let scale = alpha * consumers;
    let margin_of = |nu: f64| alpha * (lhs(nu).powf(beta) - consumers);

    let (lo, f_lo) = root::expand_downward(f, nu_min, f_min, 10.0, 1e-300)
        .ok_or_else(|| Error::solver("power thresholds", "no lower bracket".to_string()))?;
    let t_lower = root::bisect_default("power lower threshold", f, lo, nu_min, f_lo)?;
    let t_lower = check_power_root(t_lower, margin_of(t_lower), scale)?;

    let (hi, _) = root::expand_upward(f, nu_min, f_min, 2.0, tolerances::BRACKET_EXPANSION_CAP)
        .ok_or_else(|| Error::solver("power thresholds", "no upper bracket".to_string()))?;
    let t_upper = root::bisect_default("power upper threshold", f, nu_min, hi, f_min)?;
    let t_upper = check_power_root(t_upper, margin_of(t_upper), scale)?;

    Ok(Thresholds {
        t_lower: Some(t_lower),
        t_upper: Some(t_upper),
        nu_min,
        phi_min,
    })
}

fn check_power_root(root: f64, residual: f64, scale: f64) -> Result<f64> {
    if residual.abs() <= tolerances::MARGIN_RESIDUAL_REL * scale {
        Ok(root)
    } else {
        Err(Error::solver(
            "power threshold root",
            format!("margin residual {residual:e} at nu={root} exceeds tolerance"),
        ))
    }
}

/// Production route chosen by an agent who produces content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provider {
    /// Zero-based supplier index (ties go to the lowest index).
    Supplier(usize),
    Manual,
}

/// Consumer consumption mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsumerAction {
    Middleman,
    Direct,
}

/// The baseline subgame-perfect equilibrium. Consumers are homogeneous, so
/// one action/quality/provider triple describes all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOutcome {
    pub regime: Regime,
    pub supplier_prices: Vec<f64>,
    pub effective_cost: EffectiveCost,
    pub intermediary_quality: f64,
    pub intermediary_provider: Option<Provider>,
    pub consumer_action: ConsumerAction,
    pub consumer_quality: f64,
    pub consumer_provider: Option<Provider>,
}

/// Solve the baseline game: competing suppliers price at marginal cost, the
/// intermediary matches the consumers' outside option when the margin allows
/// it, and consumers follow the tiebreaks (intermediary over direct,
/// suppliers over manual, lowest index).
pub fn solve_equilibrium(model: &CostModel, params: &MarketParams) -> Result<EquilibriumOutcome> {
    if params.suppliers < 2 {
        return Err(Error::Params(
            "the baseline solver needs competing suppliers (P >= 2); \
             use the monopolist extension for P = 1"
                .into(),
        ));
    }
    let effective_cost = params.effective_cost();
    let nu = effective_cost.nu;
    let phi = disintermediation_margin(model, params, nu)?;
    let prices = vec![params.supply_cost; params.suppliers as usize];
    let producer_route = match effective_cost.source {
        CostSource::Supplier => Provider::Supplier(0),
        CostSource::Manual => Provider::Manual,
    };
    if phi <= 0.0 {
        let quality = params.alpha + model.max_direct_utility(nu)?;
        Ok(EquilibriumOutcome {
            regime: Regime::Intermediated,
            supplier_prices: prices,
            effective_cost,
            intermediary_quality: quality,
            intermediary_provider: Some(producer_route),
            consumer_action: ConsumerAction::Middleman,
            consumer_quality: quality,
            consumer_provider: None,
        })
    } else {
        let quality = model.optimal_quality(nu)?;
        Ok(EquilibriumOutcome {
            regime: Regime::Disintermediated,
            supplier_prices: prices,
            effective_cost,
            intermediary_quality: 0.0,
            intermediary_provider: None,
            consumer_action: ConsumerAction::Direct,
            consumer_quality: quality,
            consumer_provider: Some(producer_route),
        })
    }
}

/// `true` when the model/threshold pair describes a power model, used by
/// callers that need the closed-form route.
pub fn is_power(model: &CostModel) -> bool {
    model.family() == CostFamily::Power
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power2() -> CostModel {
        CostModel::power(2.0).unwrap()
    }

    fn params_c4() -> MarketParams {
        MarketParams::baseline(1.0, 4, 1.0).unwrap()
    }

    // T_L and T_U for beta=2, alpha=1, C=4: substituting x = sqrt(nu*alpha)
    // into the power-threshold equation gives x^2 - sqrt(C) x + 1/4 = 0, so
    // x = (2 +- sqrt(3))/2 and nu = (7 -+ 4 sqrt(3))/4.
    fn expected_lower() -> f64 {
        (7.0 - 4.0 * 3.0f64.sqrt()) / 4.0
    }

    fn expected_upper() -> f64 {
        (7.0 + 4.0 * 3.0f64.sqrt()) / 4.0
    }

    #[test]
    fn margin_hand_values() {
        let m = power2();
        let p = params_c4();
        let phi1 = disintermediation_margin(&m, &p, 1.0).unwrap();
        assert!((phi1 - (-2.4375)).abs() < 1e-12);
        let phi4 = disintermediation_margin(&m, &p, 4.0).unwrap();
        assert!((phi4 - 0.515625).abs() < 1e-12);
        let phi001 = disintermediation_margin(&m, &p, 0.01).unwrap();
        assert!((phi001 - 2.76).abs() < 1e-12);
    }

    #[test]
    fn interior_minimizer_power_closed_form() {
        let m = power2();
        // log_ratio(w) = w/2 hits alpha at w = 2 alpha, and nu = 1/g'(2 alpha).
        let nu_t = interior_minimizer(&m, 1.0).unwrap().unwrap();
        assert!((nu_t - 0.25).abs() < 1e-12);
        let nu_t = interior_minimizer(&m, 0.5).unwrap().unwrap();
        assert!((nu_t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn minimum_value_of_cost_to_match() {
        let m = power2();
        let nu_t = interior_minimizer(&m, 1.0).unwrap().unwrap();
        let value = nu_t * m.g(1.0 + m.max_direct_utility(nu_t).unwrap()).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interior_minimizer_missing_for_saturating_family() {
        let m = CostModel::power_exp(2.0).unwrap();
        assert!(interior_minimizer(&m, 1.5).unwrap().is_none());
        assert!(interior_minimizer(&m, 0.5).unwrap().is_some());
        // A fee just under the ratio supremum drives the minimizing cost
        // below f64 range; that is a boundary outcome, not a zero.
        assert!(interior_minimizer(&m, 0.9978).unwrap().is_none());
        // Downstream threshold computation must still work there.
        let p = MarketParams::baseline(0.9978, 2, 1.0).unwrap();
        let t = compute_thresholds(&m, &p).unwrap();
        assert!(t.nu_min > 0.0);
        assert!(t.t_upper.is_some());
    }

    #[test]
    fn thresholds_match_quadratic() {
        let m = power2();
        let t = compute_thresholds(&m, &params_c4()).unwrap();
        let lo = t.t_lower.unwrap();
        let hi = t.t_upper.unwrap();
        assert!((lo / expected_lower() - 1.0).abs() < 1e-9, "lo={lo}");
        assert!((hi / expected_upper() - 1.0).abs() < 1e-9, "hi={hi}");
        assert!(t.t_lower.unwrap() < t.nu_min && t.nu_min < t.t_upper.unwrap());
        // phi_min = alpha - alpha C
        assert!((t.phi_min - (1.0 - 4.0)).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_quadratic() {
        let t = closed_form_thresholds_power(2.0, 1.0, 4.0).unwrap();
        assert!((t.t_lower.unwrap() / expected_lower() - 1.0).abs() < 1e-9);
        assert!((t.t_upper.unwrap() / expected_upper() - 1.0).abs() < 1e-9);
        // C = 2: x = (sqrt(2) +- 1)/2, nu = (3 -+ 2 sqrt(2))/4
        let t2 = closed_form_thresholds_power(2.0, 1.0, 2.0).unwrap();
        let lo2 = (3.0 - 2.0 * 2.0f64.sqrt()) / 4.0;
        let hi2 = (3.0 + 2.0 * 2.0f64.sqrt()) / 4.0;
        assert!((t2.t_lower.unwrap() / lo2 - 1.0).abs() < 1e-9);
        assert!((t2.t_upper.unwrap() / hi2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lower_threshold_absent_in_counterexample_regime() {
        // power-exp with e^alpha < alpha C keeps the margin negative at 0+.
        let m = CostModel::power_exp(2.0).unwrap();
        let p = MarketParams::baseline(1.5, 4, 1.0).unwrap();
        let t = compute_thresholds(&m, &p).unwrap();
        assert!(t.t_lower.is_none());
        assert!(t.t_upper.is_some());
        for &nu in &[1e-6, 1e-4, 1e-2] {
            assert!(disintermediation_margin(&m, &p, nu).unwrap() < 0.0);
        }
    }

    #[test]
    fn threshold_monotonicity_in_consumers() {
        let m = power2();
        let t4 = compute_thresholds(&m, &MarketParams::baseline(1.0, 4, 1.0).unwrap()).unwrap();
        let t8 = compute_thresholds(&m, &MarketParams::baseline(1.0, 8, 1.0).unwrap()).unwrap();
        assert!(t8.t_lower.unwrap() < t4.t_lower.unwrap());
        assert!(t8.t_upper.unwrap() > t4.t_upper.unwrap());
    }

    #[test]
    fn margin_vanishes_at_roots() {
        let m = power2();
        let p = params_c4();
        let t = compute_thresholds(&m, &p).unwrap();
        for root in [t.t_lower.unwrap(), t.t_upper.unwrap()] {
            let phi = disintermediation_margin(&m, &p, root).unwrap();
            assert!(phi.abs() <= 1e-9 * 4.0, "phi({root}) = {phi:e}");
            // A genuine crossing: opposite signs one relative step away.
            let below = disintermediation_margin(&m, &p, root * (1.0 - 1e-6)).unwrap();
            let above = disintermediation_margin(&m, &p, root * (1.0 + 1e-6)).unwrap();
            assert!(below * above < 0.0, "no sign change around {root}");
        }
    }

    #[test]
    fn equilibrium_intermediated_at_unit_cost() {
        let m = power2();
        let out = solve_equilibrium(&m, &params_c4()).unwrap();
        assert_eq!(out.regime, Regime::Intermediated);
        assert_eq!(out.consumer_action, ConsumerAction::Middleman);
        assert!((out.intermediary_quality - 1.25).abs() < 1e-12);
        assert_eq!(out.consumer_quality, out.intermediary_quality);
        assert_eq!(out.supplier_prices, vec![1.0, 1.0]);
        assert_eq!(out.intermediary_provider, Some(Provider::Supplier(0)));
        assert_eq!(out.consumer_provider, None);
    }

    #[test]
    fn equilibrium_disintermediated_at_high_cost() {
        let m = power2();
        let p = MarketParams::baseline(1.0, 4, 4.0).unwrap();
        let out = solve_equilibrium(&m, &p).unwrap();
        assert_eq!(out.regime, Regime::Disintermediated);
        assert_eq!(out.consumer_action, ConsumerAction::Direct);
        assert!((out.consumer_quality - 0.125).abs() < 1e-12);
        assert_eq!(out.intermediary_quality, 0.0);
        assert_eq!(out.intermediary_provider, None);
        assert_eq!(out.consumer_provider, Some(Provider::Supplier(0)));
    }

    #[test]
    fn equilibrium_routes_through_manual_production() {
        let m = power2();
        let p = MarketParams::new(1.0, 4, 2, 2.0, 0.0, 1.0).unwrap();
        let out = solve_equilibrium(&m, &p).unwrap();
        assert_eq!(out.effective_cost.nu, 1.0);
        assert_eq!(out.effective_cost.source, CostSource::Manual);
        assert_eq!(out.regime, Regime::Intermediated);
        assert_eq!(out.intermediary_provider, Some(Provider::Manual));
    }

    #[test]
    fn equilibrium_requires_competition() {
        let m = power2();
        let p = MarketParams::new(1.0, 4, 1, 1.0, 0.0, f64::INFINITY).unwrap();
        assert!(matches!(solve_equilibrium(&m, &p), Err(Error::Params(_))));
    }

    #[test]
    fn usage_has_three_regimes() {
        let m = power2();
        let p = params_c4();
        let t = compute_thresholds(&m, &p).unwrap();
        let inside = [t.t_lower.unwrap() * 1.5, 1.0, t.t_upper.unwrap() * 0.9];
        let outside = [t.t_lower.unwrap() * 0.5, t.t_upper.unwrap() * 1.5];
        for nu in inside {
            assert_eq!(usage(&m, &p, nu).unwrap(), 4);
            assert_eq!(t.regime_at(nu), Regime::Intermediated);
        }
        for nu in outside {
            assert_eq!(usage(&m, &p, nu).unwrap(), 0);
            assert_eq!(t.regime_at(nu), Regime::Disintermediated);
        }
    }
}
