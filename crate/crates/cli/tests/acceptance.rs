//! Acceptance battery: every release criterion as one test with a printed
//! verdict line. Run with `cargo test -p middleman-cli --test acceptance --
//! --nocapture` to see the lines for passing criteria too.

use std::time::Instant;

use middleman_cli::commands::{log_spaced, run_oracle_check};
use middleman_cli::sweep::{OutputField, Spacing, SweepMode, SweepSpec, SweepVar};
use middleman_core::extensions::{
    linear_fee_usage, marginal_cost_thresholds, monopolist_thresholds,
};
use middleman_core::{
    bliss_point, closed_form_thresholds_power, compute_thresholds, consumer_utility,
    content_quality, disintermediation_margin, interior_minimizer, intermediary_utility,
    planner_welfare, social_welfare, CostModel, MarketParams,
};

const BETA_GRID: [f64; 5] = [1.2, 1.9, 2.6, 3.3, 4.0];
const ALPHA_GRID: [f64; 5] = [0.2, 0.55, 1.0, 2.3, 5.0];
const CONSUMER_GRID: [u32; 5] = [2, 4, 8, 16, 32];

fn exact_lower() -> f64 {
    (7.0 - 4.0 * 3.0f64.sqrt()) / 4.0
}

fn exact_upper() -> f64 {
    (7.0 + 4.0 * 3.0f64.sqrt()) / 4.0
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Criterion 1: the two threshold routes reproduce the quadratic-derived
/// values at (beta=2, alpha=1, C=4) to 1e-9 relative and agree with each
/// other to 1e-9 across a 5x5x5 parameter grid, in under a second.
#[test]
fn criterion_1_threshold_closed_form() {
    let started = Instant::now();
    let model = CostModel::power(2.0).unwrap();
    let params = MarketParams::baseline(1.0, 4, 1.0).unwrap();
    let general = compute_thresholds(&model, &params).unwrap();
    let closed = closed_form_thresholds_power(2.0, 1.0, 4.0).unwrap();
    for t in [&general, &closed] {
        assert!(rel_gap(t.t_lower.unwrap(), exact_lower()) <= 1e-9);
        assert!(rel_gap(t.t_upper.unwrap(), exact_upper()) <= 1e-9);
    }

    let mut worst: f64 = 0.0;
    for &beta in &BETA_GRID {
        for &alpha in &ALPHA_GRID {
            for &c in &CONSUMER_GRID {
                let model = CostModel::power(beta).unwrap();
                let params = MarketParams::baseline(alpha, c, 1.0).unwrap();
                let general = compute_thresholds(&model, &params).unwrap();
                let closed = closed_form_thresholds_power(beta, alpha, f64::from(c)).unwrap();
                worst = worst
                    .max(rel_gap(general.t_lower.unwrap(), closed.t_lower.unwrap()))
                    .max(rel_gap(general.t_upper.unwrap(), closed.t_upper.unwrap()));
            }
        }
    }
    assert!(worst <= 1e-9, "worst relative gap {worst:e}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 1 (threshold closed form, 125-point grid, {:.0} ms): PASS",
        elapsed.as_secs_f64() * 1e3
    );
}

/// Criterion 2: the matching-cost curve bottoms out at exactly the fee for
/// every strong-condition family across ten (beta, alpha) pairs.
#[test]
fn criterion_2_margin_minimum_value() {
    let pairs: Vec<(f64, f64)> = [1.3, 1.7, 2.0, 2.8, 3.5]
        .iter()
        .flat_map(|&b| [0.4, 2.2].iter().map(move |&a| (b, a)))
        .collect();
    assert_eq!(pairs.len(), 10);
    for family in 0..3 {
        for &(beta, alpha) in &pairs {
            let model = match family {
                0 => CostModel::power(beta).unwrap(),
                1 => CostModel::power_exp_sqrt(beta).unwrap(),
                _ => CostModel::power_log(beta, 2.0).unwrap(),
            };
            let nu_t = interior_minimizer(&model, alpha).unwrap().unwrap();
            let value = nu_t
                * model
                    .g(alpha + model.max_direct_utility(nu_t).unwrap())
                    .unwrap();
            assert!(
                (value - alpha).abs() <= 1e-9 * alpha,
                "{model:?} at alpha={alpha}: minimum {value} vs {alpha}"
            );
        }
    }
    println!("criterion 2 (matching-cost minimum equals the fee, 30 cases): PASS");
}

/// Criterion 3: a 10^4-point log sweep of intermediary utility recovers the
/// peak alpha (C - 1) to 1e-6 relative, at the margin minimizer.
#[test]
fn criterion_3_intermediary_utility_peak() {
    for (model, alpha, consumers) in [
        (CostModel::power(2.0).unwrap(), 1.0, 4u32),
        (CostModel::power_log(1.5, 2.0).unwrap(), 0.7, 8),
    ] {
        let params = MarketParams::baseline(alpha, consumers, 1.0).unwrap();
        let nu_t = interior_minimizer(&model, alpha).unwrap().unwrap();
        let points = 10_000;
        let nus = log_spaced(nu_t / 10.0, nu_t * 10.0, points);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &nu in &nus {
            let v = intermediary_utility(&model, &params, nu).unwrap();
            if v > best.0 {
                best = (v, nu);
            }
        }
        let peak = alpha * (f64::from(consumers) - 1.0);
        assert!(
            (best.0 / peak - 1.0).abs() <= 1e-6,
            "{model:?}: sweep max {} vs peak {peak}",
            best.0
        );
        let step = (nus[1] / nus[0]).ln();
        assert!(
            (best.1 / nu_t).ln().abs() <= step * 1.000001,
            "{model:?}: argmax {} not within one grid step of {nu_t}",
            best.1
        );
    }
    println!("criterion 3 (inverse-U peak = alpha (C-1) over 10^4-point sweeps): PASS");
}

/// Criterion 4: consumer utility is bitwise identical across fees and
/// audience sizes at twenty cost levels.
#[test]
fn criterion_4_consumer_utility_invariance() {
    let model = CostModel::power(2.0).unwrap();
    let nus = log_spaced(1e-3, 1e2, 20);
    for &nu in &nus {
        let mut values = Vec::new();
        for &alpha in &[0.5, 1.0, 2.0] {
            for &c in &[2u32, 4, 16] {
                let params = MarketParams::baseline(alpha, c, 1.0).unwrap();
                values.push(consumer_utility(&model, &params, nu).unwrap());
            }
        }
        assert!(
            values.windows(2).all(|w| w[0] == w[1]),
            "consumer utility differs at nu={nu}: {values:?}"
        );
    }
    println!("criterion 4 (consumer utility exactly invariant to alpha and C): PASS");
}

/// Criterion 5: the bliss point at (beta=2, alpha=1, C=4) is nu = 1.75 with
/// welfare 16/7 matching the planner to 1e-8; the gap is strictly open a
/// tenth away and equilibrium welfare beats the no-intermediary planner
/// throughout the intermediated interval.
#[test]
fn criterion_5_bliss_point() {
    let model = CostModel::power(2.0).unwrap();
    let params = MarketParams::baseline(1.0, 4, 1.0).unwrap();
    let nu_b = bliss_point(&model, &params).unwrap().unwrap();
    assert!((nu_b - 1.75).abs() <= 1e-12);
    let sw = social_welfare(&model, &params, nu_b).unwrap();
    let planner = planner_welfare(&model, &params, nu_b, true).unwrap();
    assert!((sw - 16.0 / 7.0).abs() <= 1e-8);
    assert!((planner - 16.0 / 7.0).abs() <= 1e-8);
    assert!((sw - planner).abs() <= 1e-8 * planner);
    for nu in [nu_b - 0.1, nu_b + 0.1] {
        let gap = planner_welfare(&model, &params, nu, true).unwrap()
            - social_welfare(&model, &params, nu).unwrap();
        assert!(gap > 0.0, "welfare gap not strict at nu={nu}");
    }
    let t = compute_thresholds(&model, &params).unwrap();
    let (lo, hi) = (t.t_lower.unwrap(), t.t_upper.unwrap());
    for i in 1..200 {
        let nu = lo * (hi / lo).powf(i as f64 / 200.0);
        let sw = social_welfare(&model, &params, nu).unwrap();
        let without = planner_welfare(&model, &params, nu, false).unwrap();
        assert!(sw > without, "welfare {sw} not above {without} at nu={nu}");
    }
    println!("criterion 5 (bliss point 1.75, welfare 16/7, strict elsewhere): PASS");
}

/// Criterion 6: the saturating family with e^alpha < alpha C keeps the
/// margin negative at arbitrarily low costs and reports no lower threshold.
#[test]
fn criterion_6_no_lower_threshold_counterexample() {
    let model = CostModel::power_exp(2.0).unwrap();
    let params = MarketParams::baseline(1.5, 4, 1.0).unwrap();
    assert!((1.5f64).exp() < 1.5 * 4.0);
    for &nu in &[1e-6, 1e-4, 1e-2] {
        let phi = disintermediation_margin(&model, &params, nu).unwrap();
        assert!(phi < 0.0, "margin {phi} not negative at nu={nu}");
    }
    let t = compute_thresholds(&model, &params).unwrap();
    assert!(t.t_lower.is_none());
    println!("criterion 6 (intermediation persists at low cost for the saturating family): PASS");
}

/// Criterion 7: the three extensions against independent oracles.
#[test]
fn criterion_7_extensions() {
    // (a) Monopolist switch points from the stated profit-ratio equations,
    // solved independently here (a quadratic and a linear equation).
    let (t_l, t_u) = (exact_lower(), exact_upper());
    let upper_oracle = 0.5 * (t_u + (t_u * t_u - t_u / 4.0).sqrt());
    let lower_oracle = (4.0 - 1.0 / t_l) / (4.0 / t_u - 1.0 / (t_l * t_l));
    let (mon_l, mon_u) = monopolist_thresholds(2.0, 1.0, 4).unwrap();
    assert!(
        (mon_u - upper_oracle).abs() <= 1e-6,
        "{mon_u} vs {upper_oracle}"
    );
    assert!(
        (mon_l - lower_oracle).abs() <= 1e-6,
        "{mon_l} vs {lower_oracle}"
    );
    for &(beta, alpha, c) in &[
        (1.6, 0.5, 4u32),
        (1.6, 2.0, 8),
        (2.0, 1.0, 4),
        (2.0, 0.5, 8),
        (3.0, 1.0, 4),
        (3.0, 2.0, 8),
    ] {
        let (mon_l, mon_u) = monopolist_thresholds(beta, alpha, c).unwrap();
        let base = closed_form_thresholds_power(beta, alpha, f64::from(c)).unwrap();
        let (b_l, b_u) = (base.t_lower.unwrap(), base.t_upper.unwrap());
        assert!(
            b_l / beta < mon_l && mon_l < b_l,
            "chain broken at ({beta},{alpha},{c})"
        );
        assert!(
            b_u / beta < mon_u && mon_u < b_u,
            "chain broken at ({beta},{alpha},{c})"
        );
    }

    // (b) Marginal costs at gamma = 0.5: C' = 2 composes the C = 2
    // quadratic with a 1/(1+gamma) shrink.
    let t = marginal_cost_thresholds(2.0, 1.0, 4, 0.5).unwrap();
    let expect_l = (3.0 - 2.0 * 2.0f64.sqrt()) / 6.0;
    let expect_u = (3.0 + 2.0 * 2.0f64.sqrt()) / 6.0;
    assert!(rel_gap(t.t_lower.unwrap(), expect_l) <= 1e-9);
    assert!(rel_gap(t.t_upper.unwrap(), expect_u) <= 1e-9);

    // (c) Linear fees flip with the scaling and ignore production costs
    // over six orders of magnitude (through the sweep surface).
    assert_eq!(linear_fee_usage(2.0, 0.5, 4).unwrap(), 4);
    assert_eq!(linear_fee_usage(2.0, 0.05, 4).unwrap(), 0);
    let spec = SweepSpec {
        model: CostModel::power(2.0).unwrap(),
        params: MarketParams::baseline(0.5, 4, 1.0).unwrap(),
        var: SweepVar::SupplyCost,
        lo: 1e-3,
        hi: 1e3,
        points: 13,
        spacing: Spacing::Log,
        mode: SweepMode::LinearFee,
        gamma: 0.0,
        outputs: vec![OutputField::Usage],
    };
    let rows = spec.rows().unwrap();
    assert!(
        rows.iter().all(|r| r[2] == "4"),
        "usage not invariant: {rows:?}"
    );
    println!("criterion 7 (monopolist switch points, marginal shrink, linear-fee flip): PASS");
}

/// Criterion 8: the standard oracle battery (50-point baseline sweep,
/// 12-point monopolist sweep, three marginal gammas) passes at 10,001 grid
/// points in under a minute.
#[test]
fn criterion_8_oracle_equivalence() {
    let started = Instant::now();
    let (report, ok) = run_oracle_check(10_001, false).unwrap();
    let elapsed = started.elapsed();
    assert!(ok, "oracle check failed:\n{report}");
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 8 (oracle equivalence battery, {:.2} s): PASS",
        elapsed.as_secs_f64()
    );
}

struct Lcg(u64);

impl Lcg {
    fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo * (hi / lo).powf(self.uniform(0.0, 1.0))
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[(self.next_u64() % items.len() as u64) as usize]
    }
}

fn draw_model(rng: &mut Lcg, strong_only: bool) -> CostModel {
    let beta = rng.uniform(1.25, 4.0);
    let families = if strong_only { 3u64 } else { 4 };
    match rng.next_u64() % families {
        0 => CostModel::power(beta).unwrap(),
        1 => CostModel::power_exp_sqrt(beta).unwrap(),
        2 => CostModel::power_log(beta, rng.uniform(1.2, 3.0)).unwrap(),
        _ => CostModel::power_exp(beta).unwrap(),
    }
}

/// Criterion 9: the randomized property battery — envelope derivative,
/// log-ratio monotonicity, quality/welfare monotone decreasing, and the
/// quality jump directions at both thresholds — over at least 500 draws
/// with zero failures.
#[test]
fn criterion_9_randomized_property_battery() {
    let mut rng = Lcg(0x5eed_cafe_f00d_0001);

    // Envelope + monotonicity + log-concavity, all families.
    for _ in 0..600 {
        let model = draw_model(&mut rng, false);
        let alpha = rng.uniform(0.25, 4.0);
        let consumers = rng.pick(&[2u32, 4, 8, 16, 32]);
        let params = MarketParams::baseline(alpha, consumers, 1.0).unwrap();
        let nu = rng.log_uniform(1e-5, 1e2);

        let h = nu * 1e-6;
        let fd = (model.max_direct_utility(nu + h).unwrap()
            - model.max_direct_utility(nu - h).unwrap())
            / (2.0 * h);
        let envelope = -model.g(model.optimal_quality(nu).unwrap()).unwrap();
        assert!(
            (fd / envelope - 1.0).abs() <= 1e-5,
            "envelope check failed for {model:?} at nu={nu}: fd={fd}, envelope={envelope}"
        );

        let mut prev = 0.0;
        for k in 0..12 {
            let w = 1e-3 * 10f64.powf(6.0 * k as f64 / 11.0);
            let r = model.log_ratio(w).unwrap();
            assert!(r > prev, "log ratio not increasing for {model:?} at w={w}");
            prev = r;
        }

        let nu2 = nu * rng.uniform(1.2, 20.0);
        let q1 = content_quality(&model, &params, nu).unwrap();
        let q2 = content_quality(&model, &params, nu2).unwrap();
        assert!(
            q1 > q2,
            "quality not decreasing for {model:?}: {q1} at {nu}, {q2} at {nu2}"
        );
        let s1 = social_welfare(&model, &params, nu).unwrap();
        let s2 = social_welfare(&model, &params, nu2).unwrap();
        assert!(s1 > s2, "welfare not decreasing for {model:?}");
    }

    // Jump directions need both thresholds on the representable axis; draws
    // whose lower crossing underflows f64 are redrawn.
    let mut jump_cases = 0;
    let mut attempts = 0;
    while jump_cases < 500 && attempts < 3000 {
        attempts += 1;
        let model = draw_model(&mut rng, true);
        let alpha = rng.uniform(0.25, 4.0);
        let consumers = rng.pick(&[2u32, 4, 8, 16, 32]);
        let params = MarketParams::baseline(alpha, consumers, 1.0).unwrap();
        let t = compute_thresholds(&model, &params).unwrap();
        let (Some(t_l), Some(t_u)) = (t.t_lower, t.t_upper) else {
            continue;
        };
        let direct_below = model.optimal_quality(t_l * (1.0 - 1e-9)).unwrap();
        let offered_at_l = alpha + model.max_direct_utility(t_l).unwrap();
        assert!(
            direct_below > offered_at_l,
            "lower jump direction failed for {model:?}"
        );
        let direct_above = model.optimal_quality(t_u * (1.0 + 1e-9)).unwrap();
        let offered_at_u = alpha + model.max_direct_utility(t_u).unwrap();
        assert!(
            direct_above < offered_at_u,
            "upper jump direction failed for {model:?}"
        );
        jump_cases += 1;
    }
    assert!(
        jump_cases >= 500,
        "only {jump_cases} jump-direction cases in {attempts} attempts"
    );
    println!(
        "criterion 9 (600 envelope/monotonicity draws + {jump_cases} jump-direction draws): PASS"
    );
}
