//! Command implementations shared by the binary and the test suites.

use serde_json::json;

use middleman_core::oracle::{self, SweepComparison};
use middleman_core::{compute_thresholds, tolerances, CostModel, MarketParams, Thresholds};

use crate::output::{csv, fmt_f64, fmt_opt_f64};
use crate::CliError;

/// Engine identification and the tolerance constants baked into solver
/// behavior; recorded in every metadata document.
pub fn engine_metadata() -> serde_json::Value {
    json!({
        "engine": "middleman",
        "version": env!("CARGO_PKG_VERSION"),
        "tolerances": {
            "first_order_residual_abs": tolerances::FOC_RESIDUAL_ABS,
            "root_relative_width": tolerances::ROOT_REL_WIDTH,
            "margin_residual_rel": tolerances::MARGIN_RESIDUAL_REL,
            "bracket_expansion_cap": tolerances::BRACKET_EXPANSION_CAP,
            "profit_root_residual_rel": tolerances::PROFIT_ROOT_RESIDUAL_REL,
            "bliss_welfare_rel": tolerances::BLISS_WELFARE_REL,
        },
    })
}

/// `thresholds` command body: text or JSON rendering of the computed
/// [`Thresholds`].
pub fn run_thresholds(
    model: &CostModel,
    params: &MarketParams,
    json_output: bool,
) -> Result<String, CliError> {
    let thresholds = compute_thresholds(model, params)?;
    if json_output {
        Ok(format!("{}\n", serde_json::to_string_pretty(&thresholds)?))
    } else {
        Ok(render_thresholds_text(&thresholds))
    }
}

pub fn render_thresholds_text(t: &Thresholds) -> String {
    format!(
        "t_lower = {}\nt_upper = {}\nnu_min = {}\nphi_min = {}\n",
        fmt_opt_f64(t.t_lower),
        fmt_opt_f64(t.t_upper),
        fmt_f64(t.nu_min),
        fmt_f64(t.phi_min),
    )
}

/// The standard verification battery behind `oracle-check`: a 50-point
/// baseline cost sweep, a 12-point monopolist supply-cost sweep spanning all
/// four pricing cases, and marginal-cost sweeps at three gammas.
pub fn run_oracle_check(grid_points: usize, json_output: bool) -> Result<(String, bool), CliError> {
    let sweeps = standard_comparisons(grid_points)?;
    let all_ok = sweeps.iter().all(SweepComparison::all_match);
    let report = if json_output {
        let value = json!({
            "metadata": engine_metadata(),
            "grid_points": grid_points,
            "all_match": all_ok,
            "sweeps": sweeps,
        });
        format!("{}\n", serde_json::to_string_pretty(&value)?)
    } else {
        let mut out = String::new();
        for sweep in &sweeps {
            let matched = sweep.points.iter().filter(|p| p.matches()).count();
            out.push_str(&format!(
                "{}: {}/{} points match\n",
                sweep.label,
                matched,
                sweep.points.len()
            ));
            for p in sweep.mismatches() {
                out.push_str(&format!(
                    "  MISMATCH at {} = {}: regime {}/{}, quality {} vs {:?} (tol {}), price {:?} vs {:?}\n",
                    sweep.label,
                    fmt_f64(p.sweep_value),
                    crate::sweep::regime_name(p.analytic_regime),
                    crate::sweep::regime_name(p.oracle_regime),
                    fmt_f64(p.oracle_quality),
                    p.analytic_quality,
                    fmt_f64(p.quality_tolerance),
                    p.oracle_price,
                    p.analytic_price,
                ));
            }
        }
        out.push_str(if all_ok {
            "oracle check: PASS\n"
        } else {
            "oracle check: FAIL\n"
        });
        out
    };
    Ok((report, all_ok))
}

pub fn standard_comparisons(grid_points: usize) -> Result<Vec<SweepComparison>, CliError> {
    let model = CostModel::power(2.0)?;
    let mut sweeps = Vec::new();

    let nus = log_spaced(1e-3, 10.0, 50);
    sweeps.push(oracle::compare_baseline_sweep(
        &model,
        1.0,
        4,
        &nus,
        grid_points,
    )?);

    let rhos = [
        0.002, 0.005, 0.0095, 0.012, 0.0165, 0.02, 0.1, 1.0, 3.0, 3.4, 4.0, 10.0,
    ];
    sweeps.push(oracle::compare_monopolist_sweep(
        2.0,
        1.0,
        4,
        &rhos,
        grid_points,
    )?);

    let marginal_nus = log_spaced(1e-3, 10.0, 16);
    sweeps.extend(oracle::compare_marginal_sweep(
        2.0,
        1.0,
        4,
        &[0.0, 0.25, 0.5],
        &marginal_nus,
        grid_points,
    )?);

    Ok(sweeps)
}

pub fn log_spaced(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (step * i as f64).exp()).collect()
}

/// Threshold band rows (`value, t_lower, t_upper, nu_min`) used by the
/// band-style figures.
pub fn threshold_band_rows<I: IntoIterator<Item = (f64, Thresholds)>>(
    series: I,
) -> Vec<Vec<String>> {
    series
        .into_iter()
        .map(|(value, t)| {
            vec![
                fmt_f64(value),
                fmt_opt_f64(t.t_lower),
                fmt_opt_f64(t.t_upper),
                fmt_f64(t.nu_min),
            ]
        })
        .collect()
}

pub use crate::output::csv as render_csv;

/// Assemble a CSV document.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    csv(header, rows)
}
