//! Data series behind the standard figures: threshold bands over the fee
//! and the consumer count, metric curves across cost levels for a few fee /
//! population choices, and the extension bands. The exact parameter sets
//! are reconstructions (recorded in each figure's metadata), chosen to show
//! the same qualitative shapes as the plots they feed.

use std::path::{Path, PathBuf};

use serde_json::json;

use middleman_core::extensions::{marginal_cost_thresholds, monopolist_price, PriceCase};
use middleman_core::{
    closed_form_thresholds_power, compute_thresholds, consumer_utility, content_quality,
    disintermediation_margin, intermediary_utility, planner_welfare, social_welfare, CostModel,
    MarketParams, Regime,
};

use crate::commands::{engine_metadata, log_spaced, threshold_band_rows, to_csv};
use crate::output::{fmt_f64, fmt_opt_f64};
use crate::sweep::regime_name;
use crate::CliError;

pub const FIGURE_IDS: [&str; 12] = [
    "2a", "2b", "4a", "4b", "5a", "5b", "6a", "6b", "7a", "7b", "8a", "8b",
];

const BETA: f64 = 2.0;
const ALPHA_PANEL: [f64; 3] = [0.5, 1.0, 2.0];
const CONSUMER_PANEL: [u32; 3] = [2, 4, 8];
const DEFAULT_ALPHA: f64 = 1.0;
const DEFAULT_CONSUMERS: u32 = 4;
const NU_RANGE: (f64, f64, usize) = (1e-3, 10.0, 400);

/// Generate the CSV + JSON metadata pair for one figure id. Returns the
/// paths written.
pub fn write_figure(id: &str, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (csv_text, metadata) = render_figure(id)?;
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("fig_{id}.csv"));
    let meta_path = out_dir.join(format!("fig_{id}.meta.json"));
    std::fs::write(&csv_path, csv_text)?;
    std::fs::write(
        &meta_path,
        format!("{}\n", serde_json::to_string_pretty(&metadata)?),
    )?;
    Ok(vec![csv_path, meta_path])
}

pub fn render_figure(id: &str) -> Result<(String, serde_json::Value), CliError> {
    match id {
        "2a" => band_over_alpha(),
        "2b" => band_over_consumers(),
        "4a" => metric_over_alpha_panel("quality", Metric::Quality),
        "4b" => metric_over_consumer_panel("quality", Metric::Quality),
        "5a" => metric_over_alpha_panel("intermediary_utility", Metric::IntermediaryUtility),
        "5b" => metric_over_consumer_panel("intermediary_utility", Metric::IntermediaryUtility),
        "6a" => metric_over_alpha_panel("consumer_utility", Metric::ConsumerUtility),
        "6b" => metric_over_consumer_panel("consumer_utility", Metric::ConsumerUtility),
        "7a" => welfare_over_alpha_panel(),
        "7b" => welfare_over_consumer_panel(),
        "8a" => monopolist_band(),
        "8b" => marginal_band(),
        other => Err(CliError::Usage(format!(
            "unknown figure id `{other}` (available: {})",
            FIGURE_IDS.join(", ")
        ))),
    }
}

#[derive(Clone, Copy)]
enum Metric {
    Quality,
    IntermediaryUtility,
    ConsumerUtility,
}

fn metadata_base(id: &str, description: &str) -> serde_json::Value {
    json!({
        "figure": id,
        "description": description,
        "note": "parameter sets are reconstructions; the source plots do not tabulate values",
        "engine": engine_metadata(),
    })
}

fn band_over_alpha() -> Result<(String, serde_json::Value), CliError> {
    let alphas = log_spaced(0.1, 5.0, 41);
    let mut series = Vec::new();
    for &alpha in &alphas {
        let t = closed_form_thresholds_power(BETA, alpha, f64::from(DEFAULT_CONSUMERS))?;
        series.push((alpha, t));
    }
    let rows = threshold_band_rows(series);
    let csv_text = to_csv(&["alpha", "t_lower", "t_upper", "nu_min"], &rows);
    let mut meta = metadata_base("2a", "intermediation cost band as the fee varies");
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["consumers"] = json!(DEFAULT_CONSUMERS);
    meta["alpha_grid"] = json!({"lo": 0.1, "hi": 5.0, "points": 41, "spacing": "log"});
    Ok((csv_text, meta))
}

fn band_over_consumers() -> Result<(String, serde_json::Value), CliError> {
    let mut series = Vec::new();
    for c in 2..=32u32 {
        let t = closed_form_thresholds_power(BETA, DEFAULT_ALPHA, f64::from(c))?;
        series.push((f64::from(c), t));
    }
    let rows = threshold_band_rows(series);
    let csv_text = to_csv(&["consumers", "t_lower", "t_upper", "nu_min"], &rows);
    let mut meta = metadata_base("2b", "intermediation cost band as the audience grows");
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["alpha"] = json!(DEFAULT_ALPHA);
    meta["consumer_grid"] = json!({"lo": 2, "hi": 32, "step": 1});
    Ok((csv_text, meta))
}

fn metric_value(
    metric: Metric,
    model: &CostModel,
    params: &MarketParams,
    nu: f64,
) -> Result<f64, CliError> {
    Ok(match metric {
        Metric::Quality => content_quality(model, params, nu)?,
        Metric::IntermediaryUtility => intermediary_utility(model, params, nu)?,
        Metric::ConsumerUtility => consumer_utility(model, params, nu)?,
    })
}

fn metric_rows(
    metric: Metric,
    series_name: &'static str,
    combos: &[(f64, u32)],
) -> Result<(Vec<Vec<String>>, serde_json::Value), CliError> {
    let model = CostModel::power(BETA)?;
    let (lo, hi, points) = NU_RANGE;
    let nus = log_spaced(lo, hi, points);
    let mut rows = Vec::new();
    let mut thresholds_meta = Vec::new();
    for &(alpha, consumers) in combos {
        let params = MarketParams::baseline(alpha, consumers, 1.0)?;
        let t = compute_thresholds(&model, &params)?;
        thresholds_meta.push(json!({
            "alpha": alpha,
            "consumers": consumers,
            "t_lower": t.t_lower,
            "t_upper": t.t_upper,
        }));
        let series_value = match series_name {
            "alpha" => alpha,
            _ => f64::from(consumers),
        };
        for &nu in &nus {
            let margin = disintermediation_margin(&model, &params, nu)?;
            let regime = if margin > 0.0 {
                Regime::Disintermediated
            } else {
                Regime::Intermediated
            };
            rows.push(vec![
                fmt_f64(nu),
                fmt_f64(series_value),
                regime_name(regime).to_string(),
                fmt_f64(metric_value(metric, &model, &params, nu)?),
            ]);
        }
    }
    Ok((rows, json!(thresholds_meta)))
}

fn metric_over_alpha_panel(
    name: &'static str,
    metric: Metric,
) -> Result<(String, serde_json::Value), CliError> {
    let combos: Vec<(f64, u32)> = ALPHA_PANEL
        .iter()
        .map(|&a| (a, DEFAULT_CONSUMERS))
        .collect();
    let (rows, thresholds) = metric_rows(metric, "alpha", &combos)?;
    let csv_text = to_csv(&["nu", "alpha", "regime", name], &rows);
    let id = match metric {
        Metric::Quality => "4a",
        Metric::IntermediaryUtility => "5a",
        Metric::ConsumerUtility => "6a",
    };
    let mut meta = metadata_base(id, "metric across cost levels, one series per fee");
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["alpha_series"] = json!(ALPHA_PANEL);
    meta["consumers"] = json!(DEFAULT_CONSUMERS);
    meta["nu_grid"] =
        json!({"lo": NU_RANGE.0, "hi": NU_RANGE.1, "points": NU_RANGE.2, "spacing": "log"});
    meta["thresholds"] = thresholds;
    Ok((csv_text, meta))
}

fn metric_over_consumer_panel(
    name: &'static str,
    metric: Metric,
) -> Result<(String, serde_json::Value), CliError> {
    let combos: Vec<(f64, u32)> = CONSUMER_PANEL.iter().map(|&c| (DEFAULT_ALPHA, c)).collect();
    let (rows, thresholds) = metric_rows(metric, "consumers", &combos)?;
    let csv_text = to_csv(&["nu", "consumers", "regime", name], &rows);
    let id = match metric {
        Metric::Quality => "4b",
        Metric::IntermediaryUtility => "5b",
        Metric::ConsumerUtility => "6b",
    };
    let mut meta = metadata_base(
        id,
        "metric across cost levels, one series per audience size",
    );
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["alpha"] = json!(DEFAULT_ALPHA);
    meta["consumer_series"] = json!(CONSUMER_PANEL);
    meta["nu_grid"] =
        json!({"lo": NU_RANGE.0, "hi": NU_RANGE.1, "points": NU_RANGE.2, "spacing": "log"});
    meta["thresholds"] = thresholds;
    Ok((csv_text, meta))
}

fn welfare_rows(
    combos: &[(f64, u32)],
    series_name: &'static str,
) -> Result<(Vec<Vec<String>>, serde_json::Value), CliError> {
    let model = CostModel::power(BETA)?;
    let (lo, hi, points) = NU_RANGE;
    let nus = log_spaced(lo, hi, points);
    let mut rows = Vec::new();
    let mut thresholds_meta = Vec::new();
    for &(alpha, consumers) in combos {
        let params = MarketParams::baseline(alpha, consumers, 1.0)?;
        let t = compute_thresholds(&model, &params)?;
        thresholds_meta.push(json!({
            "alpha": alpha,
            "consumers": consumers,
            "t_lower": t.t_lower,
            "t_upper": t.t_upper,
        }));
        let series_value = match series_name {
            "alpha" => alpha,
            _ => f64::from(consumers),
        };
        for &nu in &nus {
            let margin = disintermediation_margin(&model, &params, nu)?;
            let regime = if margin > 0.0 {
                Regime::Disintermediated
            } else {
                Regime::Intermediated
            };
            rows.push(vec![
                fmt_f64(nu),
                fmt_f64(series_value),
                regime_name(regime).to_string(),
                fmt_f64(social_welfare(&model, &params, nu)?),
                fmt_f64(planner_welfare(&model, &params, nu, true)?),
                fmt_f64(planner_welfare(&model, &params, nu, false)?),
            ]);
        }
    }
    Ok((rows, json!(thresholds_meta)))
}

fn welfare_over_alpha_panel() -> Result<(String, serde_json::Value), CliError> {
    let combos: Vec<(f64, u32)> = ALPHA_PANEL
        .iter()
        .map(|&a| (a, DEFAULT_CONSUMERS))
        .collect();
    let (rows, thresholds) = welfare_rows(&combos, "alpha")?;
    let header = [
        "nu",
        "alpha",
        "regime",
        "social_welfare",
        "planner_with",
        "planner_without",
    ];
    let csv_text = to_csv(&header, &rows);
    let mut meta = metadata_base(
        "7a",
        "equilibrium welfare against planner benchmarks, per fee",
    );
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["alpha_series"] = json!(ALPHA_PANEL);
    meta["consumers"] = json!(DEFAULT_CONSUMERS);
    meta["thresholds"] = thresholds;
    Ok((csv_text, meta))
}

fn welfare_over_consumer_panel() -> Result<(String, serde_json::Value), CliError> {
    let combos: Vec<(f64, u32)> = CONSUMER_PANEL.iter().map(|&c| (DEFAULT_ALPHA, c)).collect();
    let (rows, thresholds) = welfare_rows(&combos, "consumers")?;
    let header = [
        "nu",
        "consumers",
        "regime",
        "social_welfare",
        "planner_with",
        "planner_without",
    ];
    let csv_text = to_csv(&header, &rows);
    let mut meta = metadata_base(
        "7b",
        "equilibrium welfare against planner benchmarks, per audience size",
    );
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["alpha"] = json!(DEFAULT_ALPHA);
    meta["consumer_series"] = json!(CONSUMER_PANEL);
    meta["thresholds"] = thresholds;
    Ok((csv_text, meta))
}

fn price_case_name(case: PriceCase) -> &'static str {
    match case {
        PriceCase::MarkupBelow => "markup_below",
        PriceCase::SuppressAtLower => "suppress_at_lower",
        PriceCase::HoldAtUpper => "hold_at_upper",
        PriceCase::MarkupAbove => "markup_above",
    }
}

fn monopolist_band() -> Result<(String, serde_json::Value), CliError> {
    let rhos = log_spaced(1e-3, 10.0, 200);
    let mut rows = Vec::new();
    for &rho in &rhos {
        let sol = monopolist_price(BETA, DEFAULT_ALPHA, DEFAULT_CONSUMERS, rho)?;
        let regime = if sol.usage > 0 {
            Regime::Intermediated
        } else {
            Regime::Disintermediated
        };
        rows.push(vec![
            fmt_f64(rho),
            regime_name(regime).to_string(),
            fmt_f64(sol.price),
            sol.usage.to_string(),
            price_case_name(sol.case).to_string(),
        ]);
    }
    let csv_text = to_csv(
        &["supply_cost", "regime", "price", "usage", "price_case"],
        &rows,
    );
    let sol = monopolist_price(BETA, DEFAULT_ALPHA, DEFAULT_CONSUMERS, 1.0)?;
    let mut meta = metadata_base("8a", "monopolist supplier pricing and intermediation band");
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["alpha"] = json!(DEFAULT_ALPHA);
    meta["consumers"] = json!(DEFAULT_CONSUMERS);
    meta["t_mon_lower"] = json!(sol.t_mon_lower);
    meta["t_mon_upper"] = json!(sol.t_mon_upper);
    meta["supply_cost_grid"] = json!({"lo": 1e-3, "hi": 10.0, "points": 200, "spacing": "log"});
    Ok((csv_text, meta))
}

fn marginal_band() -> Result<(String, serde_json::Value), CliError> {
    let mut rows = Vec::new();
    for i in 0..19 {
        let gamma = i as f64 / 20.0;
        let t = marginal_cost_thresholds(BETA, DEFAULT_ALPHA, DEFAULT_CONSUMERS, gamma)?;
        rows.push(vec![
            fmt_f64(gamma),
            fmt_opt_f64(t.t_lower),
            fmt_opt_f64(t.t_upper),
            fmt_f64(t.nu_min),
        ]);
    }
    let csv_text = to_csv(&["gamma", "t_lower", "t_upper", "nu_min"], &rows);
    let mut meta = metadata_base(
        "8b",
        "intermediation band as marginal distribution costs grow",
    );
    meta["model"] = json!({"family": "power", "beta": BETA});
    meta["alpha"] = json!(DEFAULT_ALPHA);
    meta["consumers"] = json!(DEFAULT_CONSUMERS);
    meta["gamma_grid"] = json!({"lo": 0.0, "hi": 0.9, "step": 0.05});
    Ok((csv_text, meta))
}
