//! Below-threshold error scaling, code-distance selection and patch footprints.

use serde::{Deserialize, Serialize};

use crate::channel::{diamond_distance_bounds, Channel, DiamondOptions};
use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;

/// Distances beyond this are treated as a runaway budget.
pub const MAX_SEARCH_DISTANCE: usize = 10_001;

/// Slack for the closed-form distance when `x` sits exactly on a level.
const CLOSED_FORM_SLACK: f64 = 1e-9;

/// Relative slack in `C·p_L(d) ≤ x`, so that budgets landing exactly on a
/// level (such as `0.1³` against `1e-3`) are not lost to rounding.
pub const BUDGET_REL_SLACK: f64 = 1e-12;

/// `p_L(d) = A (p_phys / p_th)^((d+1)/2)`, with `C` error locations per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingAnsatz {
    #[serde(rename = "A")]
    pub a: f64,
    pub p_phys: f64,
    pub p_th: f64,
    #[serde(rename = "C", default = "unit")]
    pub c: f64,
}

fn unit() -> f64 {
    1.0
}

fn check_distance(d: usize) -> Result<()> {
    if d < 3 || d % 2 == 0 {
        return Err(Error::InvalidParameter(format!("distance must be odd and ≥ 3, got {d}")));
    }
    Ok(())
}

impl ScalingAnsatz {
    pub fn new(a: f64, p_phys: f64, p_th: f64, c: f64) -> Result<Self> {
        let s = Self { a, p_phys, p_th, c };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("A = {} must be positive", self.a)));
        }
        if !(self.p_phys > 0.0 && self.p_phys < self.p_th) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < p_phys < p_th, got p_phys = {}, p_th = {}",
                self.p_phys, self.p_th
            )));
        }
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C = {} must be ≥ 1", self.c)));
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.p_phys / self.p_th
    }

    pub fn logical_error_rate(&self, d: usize) -> Result<f64> {
        self.validate()?;
        check_distance(d)?;
        Ok(self.a * self.ratio().powf((d as f64 + 1.0) / 2.0))
    }

    /// Whether `C·p_L(d) ≤ x`, up to `BUDGET_REL_SLACK`.
    pub fn meets(&self, d: usize, x: f64) -> Result<bool> {
        Ok(self.c * self.logical_error_rate(d)? <= x * (1.0 + BUDGET_REL_SLACK))
    }

    /// Smallest odd `d ≥ 3` with `C·p_L(d) ≤ x`, by direct search.
    pub fn distance_for_budget(&self, x: f64) -> Result<usize> {
        self.validate()?;
        if !(x > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {x} must be positive")));
        }
        let mut d = 3;
        while !self.meets(d, x)? {
            d += 2;
            if d > MAX_SEARCH_DISTANCE {
                return Err(Error::ResourceLimit(format!("no distance up to {MAX_SEARCH_DISTANCE} reaches {x:e}")));
            }
        }
        Ok(d)
    }

    /// `d(x) = 2 log(x/(AC)) / log(p_phys/p_th) − 1`, rounded up to the next
    /// odd distance ≥ 3.
    pub fn closed_form_distance(&self, x: f64) -> Result<usize> {
        self.validate()?;
        if !(x > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {x} must be positive")));
        }
        let raw = 2.0 * (x / (self.a * self.c)).ln() / self.ratio().ln() - 1.0;
        let mut d = (raw - CLOSED_FORM_SLACK).ceil().max(3.0) as usize;
        if d % 2 == 0 {
            d += 1;
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistanceRule {
    /// `x_A = min{ε/m, ζ Δ_tar}`.
    #[default]
    Min,
    /// `x_A = ζ Δ_tar`: the unwanted logical noise only has to stay small
    /// against the dissipation the step is meant to produce.
    TargetAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub epsilon: f64,
    pub m: usize,
    pub zeta: f64,
    pub delta_tar: f64,
    #[serde(default)]
    pub eps_prog_a: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub eps_prog_b: f64,
}

impl BudgetSpec {
    pub fn validate(&self) -> Result<()> {
        let terms = [self.epsilon, self.zeta, self.delta_tar, self.eps_prog_a, self.nu, self.eps_prog_b];
        if terms.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("budget terms must be finite and ≥ 0".into()));
        }
        if self.zeta >= 1.0 {
            return Err(Error::InvalidParameter(format!("zeta = {} must be < 1", self.zeta)));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("step count m must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn per_step(&self) -> f64 {
        self.epsilon / self.m as f64
    }

    pub fn x_a(&self, rule: DistanceRule) -> f64 {
        let target = self.zeta * self.delta_tar;
        match rule {
            DistanceRule::Min => self.per_step().min(target),
            DistanceRule::TargetAware => target,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceChoice {
    pub distance: usize,
    /// Tolerance left for `C·p_L(d)` after the fixed allowances.
    pub tolerance: f64,
    /// The raw threshold before allowances.
    pub threshold: f64,
}

fn choose(ansatz: &ScalingAnsatz, threshold: f64, allowance: f64) -> Result<DistanceChoice> {
    if allowance >= threshold {
        return Err(Error::InfeasibleBudget { allowance, threshold });
    }
    let tolerance = threshold - allowance;
    Ok(DistanceChoice { distance: ansatz.distance_for_budget(tolerance)?, tolerance, threshold })
}

pub fn strategy_a_distance(ansatz: &ScalingAnsatz, budget: &BudgetSpec, rule: DistanceRule) -> Result<DistanceChoice> {
    budget.validate()?;
    choose(ansatz, budget.x_a(rule), budget.eps_prog_a + budget.nu)
}

pub fn strategy_b_distance(ansatz: &ScalingAnsatz, budget: &BudgetSpec) -> Result<DistanceChoice> {
    budget.validate()?;
    choose(ansatz, budget.per_step(), budget.eps_prog_b)
}

/// Physical qubits for `n_logical` rotated patches: `n_L (2d² − 1)`.
pub fn footprint(n_logical: usize, d: usize) -> Result<usize> {
    check_distance(d)?;
    Ok(n_logical * (2 * d * d - 1))
}

/// `(2d_B² − 1) / (2d_A² − 1)`.
pub fn savings_ratio(d_b: usize, d_a: usize) -> Result<f64> {
    Ok(footprint(1, d_b)? as f64 / footprint(1, d_a)? as f64)
}

/// The large-`d` form `(d_B / d_A)²`.
pub fn savings_ratio_square(d_b: usize, d_a: usize) -> Result<f64> {
    check_distance(d_b)?;
    check_distance(d_a)?;
    Ok((d_b as f64 / d_a as f64).powi(2))
}

/// Bounds on `Δ_tar = ‖exp(L_D τ) − id‖_◊` for the dissipative part of `model`
/// (full diamond norm, not halved).
pub fn delta_tar(model: &LindbladModel, tau: f64, options: &DiamondOptions) -> Result<(f64, f64)> {
    let step = model.dissipative_part().exact_step(tau)?;
    let b = diamond_distance_bounds(&step, &Channel::identity(model.dim()), options)?;
    Ok((2.0 * b.lower, 2.0 * b.upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub m: usize,
    pub per_step_lower: f64,
    pub per_step_upper: f64,
    pub m_step_lower: f64,
    pub m_step_upper: f64,
    /// `m_step_lower ≤ m · per_step_upper`.
    pub holds: bool,
}

/// Interval data for the telescoping bound `‖S^m − T^m‖ ≤ m ‖S − T‖`, all
/// in half-diamond units. A violation means a metric bug and is an error.
pub fn multistep_error_check(sim: &Channel, tar: &Channel, m: usize, options: &DiamondOptions) -> Result<ChainReport> {
    let one = diamond_distance_bounds(sim, tar, options)?;
    let many = diamond_distance_bounds(&sim.power(m)?, &tar.power(m)?, options)?;
    let bound = m as f64 * one.upper;
    let holds = many.lower <= bound + 1e-12;
    let report = ChainReport {
        m,
        per_step_lower: one.lower,
        per_step_upper: one.upper,
        m_step_lower: many.lower,
        m_step_upper: many.upper,
        holds,
    };
    if !holds {
        return Err(Error::Numeric(format!("chaining bound violated: {report:?}")));
    }
    Ok(report)
}
