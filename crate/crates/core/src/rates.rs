//! Analytic rate functions for the maximum of the branching random walk and
//! of the independent-walks reference model, together with the 1-D
//! variational minimizer that ties the two representations of the
//! lower-deviation rate together.

use crate::error::{Error, Result};
use crate::gw::OffspringLaw;
use crate::step::{LatticeStepLaw, StepLaw};

/// Model bundle: a validated offspring law and a centered step law.
///
/// The almost-sure speed `alpha = (log m / lambda_plus)^(1/r)` is always
/// recomputed from the parts rather than stored.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub offspring: OffspringLaw,
    pub step: StepLaw,
}

impl ModelParams {
    pub fn new(offspring: OffspringLaw, step: StepLaw) -> Self {
        ModelParams { offspring, step }
    }

    pub fn alpha(&self) -> f64 {
        (self.offspring.mean().ln() / self.step.lambda_plus()).powf(1.0 / self.step.r())
    }

    pub fn rate_model(&self) -> RateModel {
        RateModel {
            r: self.step.r(),
            lambda_plus: self.step.lambda_plus(),
            lambda_minus: self.step.lambda_minus(),
            log_m: self.offspring.mean().ln(),
            rho: self.offspring.rho(),
            k_star: self.offspring.k_star(),
        }
    }
}

/// Parameter-level view of everything the rate functions depend on:
/// `(r, lambda_plus, lambda_minus, log m, rho, k*)`. `rho = +inf` encodes the
/// Böttcher regime. Constructible directly so that rate functions can be
/// exercised on parameter combinations no finite pmf realizes exactly.
#[derive(Debug, Clone, Copy)]
pub struct RateModel {
    r: f64,
    lambda_plus: f64,
    lambda_minus: f64,
    log_m: f64,
    rho: f64,
    k_star: u32,
}

/// Result of the variational minimization: the infimum and, in the Schröder
/// regime, the minimizing branching-time fraction.
#[derive(Debug, Clone, Copy)]
pub struct VariationalMin {
    pub value: f64,
    pub argmin_t: Option<f64>,
}

/// Which asymptotic line of the doubly-exponential reference-model result
/// applies, and on which scale the prediction lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingRegime {
    /// `x >= alpha`: prediction is `log P` on the linear-in-n scale.
    UpperLinear,
    /// `0 <= x < alpha`: prediction is `log |log P|`.
    LowerDoubleLog,
    /// `x < 0`: prediction is `log P` on the `n (k*)^n` scale.
    LowerSuperExponential,
}

#[derive(Debug, Clone, Copy)]
pub struct IndScaling {
    pub regime: ScalingRegime,
    pub predicted: f64,
}

const VARIATIONAL_GRID: usize = 1024;

impl RateModel {
    pub fn new(
        r: f64,
        lambda_plus: f64,
        lambda_minus: f64,
        m: f64,
        rho: f64,
        k_star: u32,
    ) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("r = {r} outside (0, 1)")));
        }
        if lambda_plus <= 0.0 || lambda_minus <= 0.0 {
            return Err(Error::Domain("tail weights must be positive".into()));
        }
        if m <= 1.0 {
            return Err(Error::Domain(format!("mean m = {m} must exceed 1")));
        }
        if rho.is_nan() || rho <= 0.0 {
            return Err(Error::Domain(format!("rho = {rho} must be positive")));
        }
        if k_star < 1 || (rho.is_infinite() && k_star < 2) {
            return Err(Error::Domain(
                "k* must be >= 1, and >= 2 when rho is infinite".into(),
            ));
        }
        Ok(RateModel {
            r,
            lambda_plus,
            lambda_minus,
            log_m: m.ln(),
            rho,
            k_star,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn log_m(&self) -> f64 {
        self.log_m
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn k_star(&self) -> u32 {
        self.k_star
    }

    pub fn is_boettcher(&self) -> bool {
        self.rho.is_infinite()
    }

    /// Almost-sure speed of the rightmost particle on the `n^(1/r)` scale.
    pub fn alpha(&self) -> f64 {
        (self.log_m / self.lambda_plus).powf(1.0 / self.r)
    }

    /// Rate function of a single walk on the `n^(1/r)` scale.
    pub fn rate_i(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.lambda_plus * x.powf(self.r)
        } else {
            self.lambda_minus * (-x).powf(self.r)
        }
    }

    /// Length of the admissible branching-time interval: 1 for `x <= 0`,
    /// `1 - (x/alpha)^r` for `0 < x < alpha`.
    pub fn gamma_exponent(&self, x: f64) -> Result<f64> {
        let alpha = self.alpha();
        if x >= alpha {
            return Err(Error::Domain(format!(
                "gamma is defined for x < alpha = {alpha}, got {x}"
            )));
        }
        if x <= 0.0 {
            Ok(1.0)
        } else {
            Ok(1.0 - (x / alpha).powf(self.r))
        }
    }

    /// Closed-form lower-deviation rate `H(x)` for `x < alpha`.
    pub fn h_closed(&self, x: f64) -> Result<f64> {
        let alpha = self.alpha();
        if x >= alpha {
            return Err(Error::Domain(format!(
                "H is defined for x < alpha = {alpha}, got {x}"
            )));
        }
        if self.is_boettcher() {
            return Ok(f64::from(self.k_star) * self.lambda_minus * (alpha - x).powf(self.r));
        }
        if x <= 0.0 {
            let via_survival = self.rho + self.lambda_minus * (-x).powf(self.r);
            let via_single_line = self.lambda_minus * (alpha - x).powf(self.r);
            Ok(via_survival.min(via_single_line))
        } else {
            let scale = (self.lambda_minus * alpha.powf(self.r)).min(self.rho);
            Ok(scale * (1.0 - (x / alpha).powf(self.r)))
        }
    }

    /// Variational form of `H`: infimum over branching-time fractions
    /// `t` in `[0, gamma(x)]` of `t rho + lambda_minus ((1-t)^(1/r) alpha - x)^r`.
    ///
    /// Minimized by a dense grid followed by golden-section refinement around
    /// the best cell; the objective is not guaranteed unimodal over the whole
    /// interval. In the Böttcher regime delegates to the closed form.
    pub fn h_variational(&self, x: f64, tol: f64) -> Result<VariationalMin> {
        let alpha = self.alpha();
        if x >= alpha {
            return Err(Error::Domain(format!(
                "H is defined for x < alpha = {alpha}, got {x}"
            )));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::Domain(format!("tolerance {tol} must be positive")));
        }
        if self.is_boettcher() {
            return Ok(VariationalMin {
                value: self.h_closed(x)?,
                argmin_t: None,
            });
        }
        // Substituting w = (1-t)^(1/r) alpha maps t in [0, gamma] onto
        // w in [max(x, 0), alpha] and removes the catastrophic cancellation
        // of the raw objective near t = gamma, where the base collapses to 0
        // and float dust gets amplified by ^r.
        let w_lo = x.max(0.0);
        let objective = |w: f64| {
            self.rho * (1.0 - (w / alpha).powf(self.r))
                + self.lambda_minus * (w - x).max(0.0).powf(self.r)
        };

        let span = alpha - w_lo;
        let mut best_i = 0usize;
        let mut best_v = f64::INFINITY;
        for i in 0..=VARIATIONAL_GRID {
            let w = w_lo + span * i as f64 / VARIATIONAL_GRID as f64;
            let v = objective(w);
            if v < best_v {
                best_v = v;
                best_i = i;
            }
        }
        let cell = span / VARIATIONAL_GRID as f64;
        let lo = w_lo + (best_i.saturating_sub(1)) as f64 * cell;
        let hi = w_lo + ((best_i + 1).min(VARIATIONAL_GRID)) as f64 * cell;
        let (w_ref, v_ref) = golden_section_min(&objective, lo, hi, tol);
        let (w_min, value) = if v_ref < best_v {
            (w_ref, v_ref)
        } else {
            (w_lo + best_i as f64 * cell, best_v)
        };
        let t_min = (1.0 - (w_min / alpha).powf(self.r)).clamp(0.0, 1.0);
        Ok(VariationalMin {
            value,
            argmin_t: Some(t_min),
        })
    }

    /// Rate function of the branching random walk on the `n^(1/r)` scale.
    pub fn rate_ibrw(&self, x: f64) -> f64 {
        let alpha = self.alpha();
        if x >= alpha {
            self.upper_rate(x)
        } else {
            self.h_closed(x).expect("x < alpha")
        }
    }

    /// Rate function of the maximum of independent walks. In the Böttcher
    /// regime the value below `alpha` is `+inf` (faster-than-exponential
    /// decay), encoded as an explicit IEEE infinity.
    pub fn rate_iind(&self, x: f64) -> f64 {
        let alpha = self.alpha();
        if x >= alpha {
            return self.upper_rate(x);
        }
        if self.is_boettcher() {
            return f64::INFINITY;
        }
        if x >= 0.0 {
            self.rho * (1.0 - self.lambda_plus * x.powf(self.r) / self.log_m)
        } else {
            f64::from(self.k_star) * self.lambda_minus * (-x).powf(self.r) + self.rho
        }
    }

    /// Shared upper branch `lambda_plus x^r - log m`, used verbatim by both
    /// rate functions so their equality for `x >= alpha` is exact.
    fn upper_rate(&self, x: f64) -> f64 {
        self.lambda_plus * x.powf(self.r) - self.log_m
    }

    /// Predicted asymptotic line for the reference model in the Böttcher
    /// regime, tagged with the scale it lives on.
    pub fn boettcher_ind_scaling(&self, x: f64, n: u32) -> Result<IndScaling> {
        if !self.is_boettcher() {
            return Err(Error::Regime(
                "doubly-exponential scaling applies only when rho is infinite".into(),
            ));
        }
        let alpha = self.alpha();
        let nf = f64::from(n);
        if x >= alpha {
            Ok(IndScaling {
                regime: ScalingRegime::UpperLinear,
                predicted: -(self.upper_rate(x)) * nf,
            })
        } else if x >= 0.0 {
            let log_kstar = f64::from(self.k_star).ln();
            Ok(IndScaling {
                regime: ScalingRegime::LowerDoubleLog,
                predicted: -nf
                    * log_kstar
                    * (1.0 - self.lambda_plus * x.powf(self.r) / self.log_m),
            })
        } else {
            let kstar_pow_n = f64::from(self.k_star).powi(n as i32);
            Ok(IndScaling {
                regime: ScalingRegime::LowerSuperExponential,
                predicted: -nf * kstar_pow_n * self.lambda_minus * (-x).powf(self.r),
            })
        }
    }
}

/// Golden-section minimization of `f` on `[a, b]` down to interval width `tol`.
fn golden_section_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a).abs() > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Which rate function a curve tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    I,
    Igw,
    H,
    Ibrw,
    Iind,
    BoettcherScaling,
}

impl RateKind {
    pub fn label(&self) -> &'static str {
        match self {
            RateKind::I => "I",
            RateKind::Igw => "IGW",
            RateKind::H => "H",
            RateKind::Ibrw => "IBRW",
            RateKind::Iind => "IIND",
            RateKind::BoettcherScaling => "BOETTCHER_SCALING",
        }
    }
}

/// Tabulated rate curve; infinities are explicit IEEE infinities and are
/// serialized as the literal `inf`.
#[derive(Debug, Clone)]
pub struct RateCurve {
    pub kind: RateKind,
    pub x_grid: Vec<f64>,
    pub values: Vec<f64>,
}

pub const RATE_CSV_HEADER: &str = "x,value,kind\n";

impl RateCurve {
    /// CSV with header `x,value,kind`; `+inf` written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(RATE_CSV_HEADER);
        out.push_str(&self.csv_rows());
        out
    }

    /// Data rows only, for callers batching several kinds into one file.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (x, v) in self.x_grid.iter().zip(&self.values) {
            let val = if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v}")
            };
            out.push_str(&format!("{x},{val},{}\n", self.kind.label()));
        }
        out
    }
}

/// Element-wise evaluation of a rate function over a sorted grid.
///
/// `IGW` needs the offspring law (it is a rate for the population, not the
/// position); `BOETTCHER_SCALING` needs the horizon `n`.
pub fn rate_curve(
    model: &RateModel,
    offspring: Option<&OffspringLaw>,
    kind: RateKind,
    x_grid: &[f64],
    scaling_n: Option<u32>,
) -> Result<RateCurve> {
    if x_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("x grid must be sorted ascending".into()));
    }
    let values: Result<Vec<f64>> = x_grid
        .iter()
        .map(|&x| match kind {
            RateKind::I => Ok(model.rate_i(x)),
            RateKind::Igw => offspring
                .ok_or_else(|| {
                    Error::Domain("IGW curve needs the offspring law".into())
                })?
                .rate_igw(x),
            RateKind::H => model.h_closed(x),
            RateKind::Ibrw => Ok(model.rate_ibrw(x)),
            RateKind::Iind => Ok(model.rate_iind(x)),
            RateKind::BoettcherScaling => {
                let n = scaling_n.ok_or_else(|| {
                    Error::Domain("BOETTCHER_SCALING curve needs a horizon n".into())
                })?;
                Ok(model.boettcher_ind_scaling(x, n)?.predicted)
            }
        })
        .collect();
    Ok(RateCurve {
        kind,
        x_grid: x_grid.to_vec(),
        values: values?,
    })
}

/// Legendre transform of the lattice cumulant generating function at `x`,
/// by brute force: coarse scan over the dual variable followed by
/// golden-section refinement. Used as an oracle for linear-speed upper
/// deviations of bounded lattice walks, independently of every other rate
/// evaluator in the crate.
pub fn lattice_rate_dual(law: &LatticeStepLaw, x: f64) -> f64 {
    let objective = |theta: f64| -(theta * x - law.cgf(theta));
    let mut best_t = 0.0;
    let mut best = objective(0.0);
    for i in 1..=4000 {
        let theta = 50.0 * i as f64 / 4000.0;
        let v = objective(theta);
        if v < best {
            best = v;
            best_t = theta;
        }
    }
    let lo = (best_t - 50.0 / 4000.0).max(0.0);
    let hi = best_t + 50.0 / 4000.0;
    let (_, v) = golden_section_min(&objective, lo, hi, 1e-12);
    -v.min(best)
}
