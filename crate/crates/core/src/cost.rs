//! Production-cost families `g(w)` and the consumer's direct-production
//! best response.
//!
//! Every admissible `g` is strictly increasing, strictly convex, strictly
//! log-concave, and satisfies `g(0) = g'(0) = 0` with `g, g' -> inf`. Those
//! properties make `w - nu * g(w)` single-peaked for every cost level
//! `nu > 0`, with the peak pinned by the first-order condition
//! `g'(w) = 1 / nu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root;
use crate::tolerances;

/// The four cost families the engine supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFamily {
    /// `g(w) = w^beta`
    Power,
    /// `g(w) = w^beta * exp(sqrt(w))`
    PowerExpSqrt,
    /// `g(w) = w^beta * ln(w + 1)^eta`
    PowerLog,
    /// `g(w) = w^beta * exp(w)`
    PowerExp,
}

/// A parametrized cost function. `beta > 1` is required uniformly so that
/// `g'(0) = 0` holds and the direct-production optimum is interior; `eta > 1`
/// is the second exponent of the `PowerLog` family and unused elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    family: CostFamily,
    beta: f64,
    eta: Option<f64>,
}

impl CostModel {
    pub fn new(family: CostFamily, beta: f64, eta: Option<f64>) -> Result<Self> {
        if !(beta.is_finite() && beta > 1.0) {
            return Err(Error::Params(format!(
                "beta must be finite and > 1, got {beta}"
            )));
        }
        match family {
            CostFamily::PowerLog => {
                let eta = eta.ok_or_else(|| {
                    Error::Params("the power-log family requires a second exponent eta".into())
                })?;
                if !(eta.is_finite() && eta > 1.0) {
                    return Err(Error::Params(format!(
                        "eta must be finite and > 1, got {eta}"
                    )));
                }
                Ok(CostModel {
                    family,
                    beta,
                    eta: Some(eta),
                })
            }
            _ => {
                if eta.is_some() {
                    return Err(Error::Params(
                        "eta is only meaningful for the power-log family".into(),
                    ));
                }
                Ok(CostModel {
                    family,
                    beta,
                    eta: None,
                })
            }
        }
    }

    pub fn power(beta: f64) -> Result<Self> {
        Self::new(CostFamily::Power, beta, None)
    }

    pub fn power_exp_sqrt(beta: f64) -> Result<Self> {
        Self::new(CostFamily::PowerExpSqrt, beta, None)
    }

    pub fn power_log(beta: f64, eta: f64) -> Result<Self> {
        Self::new(CostFamily::PowerLog, beta, Some(eta))
    }

    pub fn power_exp(beta: f64) -> Result<Self> {
        Self::new(CostFamily::PowerExp, beta, None)
    }

    pub fn family(&self) -> CostFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> Option<f64> {
        self.eta
    }

    /// Cost `g(w)` of producing quality `w`.
    ///
    /// The exponential families are evaluated in log space (`exp` of
    /// `beta*ln w + w` or `+ sqrt(w)`) to delay overflow; a product that
    /// still exceeds `f64::MAX` comes back as `+inf`, which callers treat as
    /// a cost beyond any budget.
    pub fn g(&self, w: f64) -> Result<f64> {
        check_quality("g", w)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        let v = match self.family {
            CostFamily::Power => w.powf(self.beta),
            CostFamily::PowerExpSqrt => (self.beta * w.ln() + w.sqrt()).exp(),
            CostFamily::PowerLog => {
                let l = w.ln_1p();
                (self.beta * w.ln() + self.eta_val() * l.ln()).exp()
            }
            CostFamily::PowerExp => (self.beta * w.ln() + w).exp(),
        };
        Ok(v)
    }

    /// Derivative `g'(w)`, in closed form per family.
    pub fn g_prime(&self, w: f64) -> Result<f64> {
        check_quality("g_prime", w)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        let beta = self.beta;
        let v = match self.family {
            CostFamily::Power => beta * w.powf(beta - 1.0),
            CostFamily::PowerExpSqrt => {
                ((beta - 1.0) * w.ln() + w.sqrt()).exp() * (beta + 0.5 * w.sqrt())
            }
            CostFamily::PowerLog => {
                let l = w.ln_1p();
                let eta = self.eta_val();
                ((beta - 1.0) * w.ln() + (eta - 1.0) * l.ln()).exp()
                    * (beta * l + eta * w / (w + 1.0))
            }
            CostFamily::PowerExp => ((beta - 1.0) * w.ln() + w).exp() * (beta + w),
        };
        Ok(v)
    }

    /// The ratio `g(w) / g'(w)`, simplified per family so it never overflows.
    ///
    /// Strictly increasing in `w` (log-concavity), bounded above by `w`
    /// (convexity), and tends to `0` as `w -> 0`.
    pub fn log_ratio(&self, w: f64) -> Result<f64> {
        if w <= 0.0 || w.is_nan() {
            return Err(Error::domain(
                "log_ratio",
                format!("requires w > 0, got {w}"),
            ));
        }
        let beta = self.beta;
        let v = match self.family {
            CostFamily::Power => w / beta,
            CostFamily::PowerExpSqrt => w / (beta + 0.5 * w.sqrt()),
            CostFamily::PowerLog => {
                let l = w.ln_1p();
                let eta = self.eta_val();
                w * (w + 1.0) * l / (beta * (w + 1.0) * l + eta * w)
            }
            CostFamily::PowerExp => w / (w + beta),
        };
        Ok(v)
    }

    /// Supremum of `log_ratio` over `(0, inf)`. Finite only for the
    /// power-exp family, whose ratio saturates at `1`.
    pub(crate) fn log_ratio_sup(&self) -> f64 {
        match self.family {
            CostFamily::PowerExp => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// Solve `log_ratio(w) = target` for `w`. `None` when the target is at
    /// or above the family's supremum and no solution exists.
    pub(crate) fn log_ratio_inverse(&self, target: f64) -> Result<Option<f64>> {
        if target <= 0.0 || target.is_nan() {
            return Err(Error::domain(
                "log_ratio_inverse",
                format!("requires a positive target, got {target}"),
            ));
        }
        if target >= self.log_ratio_sup() {
            return Ok(None);
        }
        // log_ratio(w) <= w, so the ratio at w = target/2 sits below target.
        let lo = 0.5 * target;
        let f = |w: f64| self.log_ratio(w).unwrap_or(f64::NAN) - target;
        let f_lo = f(lo);
        if f_lo >= 0.0 {
            return Err(Error::solver(
                "log_ratio_inverse",
                format!("lower seed {lo} does not bracket the target {target}"),
            ));
        }
        let (hi, _) = root::expand_upward(f, lo, f_lo, 4.0, f64::MAX / 8.0).ok_or_else(|| {
            Error::solver(
                "log_ratio_inverse",
                format!("no upper bracket for target {target}"),
            )
        })?;
        let w = root::bisect_default("log_ratio_inverse", f, lo, hi, f_lo)?;
        Ok(Some(w))
    }

    /// True for the families with exactly three usage regimes (power,
    /// power-exp-sqrt, power-log); false for power-exp, whose lower
    /// disintermediation regime can be missing.
    pub fn satisfies_strong_condition(&self) -> bool {
        !matches!(self.family, CostFamily::PowerExp)
    }

    /// `g''(w) / g'(w)`, used by the guarded Newton iteration.
    fn curvature_ratio(&self, w: f64) -> f64 {
        let beta = self.beta;
        match self.family {
            CostFamily::Power => (beta - 1.0) / w,
            CostFamily::PowerExpSqrt => {
                let s = w.sqrt();
                (beta * (beta - 1.0) / w + (beta - 0.25) / s + 0.25) / (beta + 0.5 * s)
            }
            CostFamily::PowerLog => {
                let l = w.ln_1p();
                let eta = self.eta_val();
                let wp1 = w + 1.0;
                let num = beta * (beta - 1.0) * l * l
                    + 2.0 * beta * eta * w * l / wp1
                    + eta * (eta - 1.0) * w * w / (wp1 * wp1)
                    - eta * w * w * l / (wp1 * wp1);
                let den = w * l * (beta * l + eta * w / wp1);
                num / den
            }
            CostFamily::PowerExp => (beta * (beta - 1.0) / w + 2.0 * beta + w) / (beta + w),
        }
    }

    /// The utility-maximizing quality `w*(nu) = argmax_w (w - nu * g(w))`,
    /// i.e. the root of `g'(w) = 1/nu`.
    ///
    /// Power uses the closed form `(nu * beta)^(-1/(beta-1))`; the other
    /// families run Newton from that seed, guarded by a geometric bracket
    /// with bisection fallback.
    pub fn optimal_quality(&self, nu: f64) -> Result<f64> {
        check_cost_level("optimal_quality", nu)?;
        let seed = (nu * self.beta).powf(-1.0 / (self.beta - 1.0));
        if self.family == CostFamily::Power {
            return Ok(seed);
        }
        self.solve_first_order(nu, seed)
    }

    fn solve_first_order(&self, nu: f64, seed: f64) -> Result<f64> {
        const OP: &str = "optimal_quality";
        // Sign of g'(w) - 1/nu, computed in log space so extreme magnitudes
        // cannot overflow the comparison.
        let log_target = -nu.ln();
        let score = |w: f64| -> f64 {
            match self.g_prime(w) {
                Ok(gp) if gp > 0.0 => gp.ln() - log_target,
                Ok(_) => f64::NEG_INFINITY,
                Err(_) => f64::NAN,
            }
        };
        let seed = seed.clamp(1e-300, 1e300);
        let s0 = score(seed);
        let (mut lo, mut hi) = if s0 == 0.0 {
            return Ok(seed);
        } else if s0 > 0.0 {
            let (lo, _) = root::expand_downward(score, seed, s0, 2.0, 1e-305).ok_or_else(|| {
                Error::solver(OP, format!("no lower bracket below seed {seed} at nu={nu}"))
            })?;
            (lo, seed)
        } else {
            let (hi, _) = root::expand_upward(score, seed, s0, 2.0, 1e305).ok_or_else(|| {
                Error::solver(OP, format!("no upper bracket above seed {seed} at nu={nu}"))
            })?;
            (seed, hi)
        };

        // Newton on ln g'(w) - ln(1/nu); derivative is g''/g'. Steps that
        // leave the bracket fall back to the geometric midpoint.
        let mut w = (lo * hi).sqrt();
        for _ in 0..tolerances::FOC_MAX_ITER {
            let residual = nu * self.g_prime(w)? - 1.0;
            if residual.abs() <= tolerances::FOC_RESIDUAL_ABS {
                return Ok(w);
            }
            if residual > 0.0 {
                hi = w;
            } else {
                lo = w;
            }
            let s = score(w);
            let slope = self.curvature_ratio(w);
            let mut next = w - s / slope;
            if !next.is_finite() || next <= lo || next >= hi {
                next = (lo * hi).sqrt();
            }
            if next == w {
                break;
            }
            w = next;
        }
        let residual = nu * self.g_prime(w)? - 1.0;
        if residual.abs() <= tolerances::FOC_RESIDUAL_ABS * 10.0 {
            return Ok(w);
        }
        Err(Error::solver(
            OP,
            format!("first-order residual {residual:e} at w={w} (bracket [{lo}, {hi}], nu={nu})"),
        ))
    }

    /// The consumer's best self-production payoff
    /// `U(nu) = max_w (w - nu * g(w))`.
    pub fn max_direct_utility(&self, nu: f64) -> Result<f64> {
        let w = self.optimal_quality(nu)?;
        let u = w - nu * self.g(w)?;
        Ok(u.max(0.0))
    }

    fn eta_val(&self) -> f64 {
        self.eta
            .expect("eta is validated at construction for the power-log family")
    }
}

fn check_quality(op: &'static str, w: f64) -> Result<()> {
    if w < 0.0 || w.is_nan() {
        return Err(Error::domain(op, format!("requires w >= 0, got {w}")));
    }
    Ok(())
}

fn check_cost_level(op: &'static str, nu: f64) -> Result<()> {
    if nu <= 0.0 || !nu.is_finite() {
        return Err(Error::domain(
            op,
            format!("requires a finite cost level nu > 0, got {nu}"),
        ));
    }
    Ok(())
}
