//! Exhaustive search over ESD designs `0 <= k <= n <= n_max`.
//!
//! Raising `k` at fixed `n` (or lowering `n` at fixed `k`) shrinks both
//! acceptance tails. The vacuum tail shrinks faster whenever `P_s > Q_s`,
//! so NESR improves while `S_ESD` drops. The grid is small enough that
//! every point is evaluated and the selection is a plain ordered fold.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::analytics::{
    self, link_metrics_with, EsdDesign, Feasibility, LinkMetrics, RateModel, DEFAULT_N_CAP,
};
use crate::error::{EsdError, Result};
use crate::params::{effective_deflection, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    pub design: EsdDesign,
    pub metrics: LinkMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaxNesr,
    MinQber,
    MaxRate,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MaxNesr => "max_nesr",
            Objective::MinQber => "min_qber",
            Objective::MaxRate => "max_rate",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = EsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "max_nesr" => Ok(Objective::MaxNesr),
            "min_qber" => Ok(Objective::MinQber),
            "max_rate" => Ok(Objective::MaxRate),
            _ => Err(EsdError::invalid(format!(
                "unknown objective {s:?} (expected max_nesr, min_qber or max_rate)"
            ))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignQuery {
    pub objective: Objective,
    pub n_max: u32,
    /// Keep only points with QBER strictly below this.
    pub qber_ceiling: Option<f64>,
    /// Keep only points with NESR at or above this.
    pub nesr_floor: Option<f64>,
}

impl DesignQuery {
    pub fn new(objective: Objective, n_max: u32) -> Self {
        DesignQuery {
            objective,
            n_max,
            qber_ceiling: None,
            nesr_floor: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, bound) in [("qber ceiling", self.qber_ceiling), ("nesr floor", self.nesr_floor)] {
            if let Some(b) = bound {
                if !(b > 0.0 && b < 1.0) {
                    return Err(EsdError::invalid(format!("{name} must be in (0, 1), got {b}")));
                }
            }
        }
        Ok(())
    }

    fn admits(&self, m: &LinkMetrics) -> bool {
        let qber_ok = match self.qber_ceiling {
            Some(c) => m.qber.is_some_and(|q| q < c),
            None => true,
        };
        let nesr_ok = match self.nesr_floor {
            Some(f) => m.nesr.is_some_and(|n| n >= f),
            None => true,
        };
        qber_ok && nesr_ok
    }
}

/// Every design with `0 <= k <= n <= n_max`, ordered by `(n, k)`.
pub fn grid(n_max: u32) -> impl Iterator<Item = EsdDesign> {
    (0..=n_max).flat_map(|n| (0..=n).map(move |k| EsdDesign::new(n, k).expect("k <= n")))
}

pub fn sweep(t: f64, params: &ParamSet, n_max: u32) -> Result<Vec<DesignPoint>> {
    sweep_with(t, params, n_max, DEFAULT_N_CAP, &RateModel::default())
}

pub fn sweep_with(
    t: f64,
    params: &ParamSet,
    n_max: u32,
    n_cap: u32,
    rate_model: &RateModel,
) -> Result<Vec<DesignPoint>> {
    if n_max > n_cap {
        return Err(EsdError::invalid(format!("n_max={n_max} exceeds the cap of {n_cap}")));
    }
    params.check()?;
    let designs: Vec<EsdDesign> = grid(n_max).collect();
    designs
        .into_par_iter()
        .map(|design| {
            link_metrics_with(t, design, params, rate_model)
                .map(|metrics| DesignPoint { design, metrics })
        })
        .collect()
}

/// Score to maximise; `None` excludes the point.
fn score(objective: Objective, m: &LinkMetrics) -> Option<f64> {
    match objective {
        // NESR = 1 / (1 + odds); the odds keep resolving designs after NESR
        // has rounded to 1.0
        Objective::MaxNesr => m.nesr.map(|_| -m.tails().empty_odds(m.t)),
        Objective::MinQber => m.qber.map(|q| -q),
        Objective::MaxRate => Some(m.rate),
    }
}

/// Best admissible point of an already computed sweep. The first point in
/// `(n, k)` order wins ties.
pub fn select(points: &[DesignPoint], query: &DesignQuery) -> Result<DesignPoint> {
    let mut best: Option<(f64, &DesignPoint)> = None;
    for point in points.iter().filter(|p| query.admits(&p.metrics)) {
        let Some(s) = score(query.objective, &point.metrics) else {
            continue;
        };
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, point));
        }
    }
    best.map(|(_, p)| *p).ok_or_else(|| {
        EsdError::Infeasible(format!(
            "no design with n <= {} satisfies the constraints (objective {}, qber < {}, nesr >= {})",
            query.n_max,
            query.objective,
            query.qber_ceiling.map_or("-".into(), |c| c.to_string()),
            query.nesr_floor.map_or("-".into(), |f| f.to_string()),
        ))
    })
}

pub fn optimize(t: f64, params: &ParamSet, query: &DesignQuery) -> Result<DesignPoint> {
    optimize_with(t, params, query, &RateModel::default())
}

pub fn optimize_with(
    t: f64,
    params: &ParamSet,
    query: &DesignQuery,
    rate_model: &RateModel,
) -> Result<DesignPoint> {
    query.validate()?;
    let points = sweep_with(t, params, query.n_max, DEFAULT_N_CAP, rate_model)?;
    select(&points, query)
}

/// Gate condition and error-budget condition, side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub effective_deflection: f64,
    pub prep_error: f64,
    /// Effective deflection strictly above the preparation error.
    pub gate_ok: bool,
    pub error_budget: Feasibility,
    pub channel_error: f64,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "feasibility.effective_deflection={:.16e}", self.effective_deflection);
        let _ = writeln!(out, "feasibility.prep_error={:.16e}", self.prep_error);
        let _ = writeln!(out, "feasibility.gate_condition={}", pass_fail(self.gate_ok));
        let _ = writeln!(out, "feasibility.channel_error={:.16e}", self.channel_error);
        let _ = writeln!(out, "feasibility.error_bound={:.16e}", self.error_budget.error_bound);
        let threshold = self
            .error_budget
            .nesr_threshold
            .map_or("none".into(), |v| format!("{v:.16e}"));
        let _ = writeln!(out, "feasibility.nesr_threshold={threshold}");
        let _ = writeln!(
            out,
            "feasibility.error_budget_condition={}",
            pass_fail(self.error_budget.feasible)
        );
        let _ = writeln!(out, "feasibility.overall={}", pass_fail(self.feasible));
        out
    }
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn feasibility_report(params: &ParamSet) -> FeasibilityReport {
    let gate_ok = analytics::esd_effective(&params.gate, &params.source);
    let error_budget = analytics::feasibility(&params.protocol, &params.detector);
    FeasibilityReport {
        effective_deflection: effective_deflection(&params.gate).value,
        prep_error: params.source.prep_error,
        gate_ok,
        error_budget,
        channel_error: params.protocol.channel_error,
        feasible: gate_ok && error_budget.feasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_size_and_order() {
        let designs: Vec<_> = grid(9).collect();
        assert_eq!(designs.len(), 55);
        assert!(designs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(grid(0).collect::<Vec<_>>(), vec![EsdDesign::NONE]);
    }

    #[test]
    fn trivial_sweep() {
        let pts = sweep(1e-3, &ParamSet::reference(), 0).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].metrics.nesr, Some(1e-3));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(sweep(0.1, &ParamSet::reference(), 65).is_err());
        assert!(sweep_with(0.1, &ParamSet::reference(), 80, 100, &RateModel::default()).is_ok());
    }

    #[test]
    fn max_nesr_prefers_k_equals_n_at_largest_n() {
        let q = DesignQuery::new(Objective::MaxNesr, 9);
        let best = optimize(1e-7, &ParamSet::reference(), &q).unwrap();
        assert_eq!(best.design, EsdDesign::new(9, 9).unwrap());
    }

    #[test]
    fn single_point_grid() {
        let q = DesignQuery::new(Objective::MinQber, 0);
        let best = optimize(0.2, &ParamSet::reference(), &q).unwrap();
        assert_eq!(best.design, EsdDesign::NONE);
    }

    #[test]
    fn unsatisfiable_ceiling_is_infeasible() {
        let mut q = DesignQuery::new(Objective::MaxRate, 9);
        q.qber_ceiling = Some(1e-9);
        let err = optimize(1e-9, &ParamSet::reference(), &q).unwrap_err();
        assert!(matches!(err, EsdError::Infeasible(_)));
    }

    #[test]
    fn ties_go_to_smaller_designs() {
        // at t = 1 every point has NESR = 1 and vacuum odds 0
        let best = optimize(1.0, &ParamSet::reference(), &DesignQuery::new(Objective::MaxNesr, 5))
            .unwrap();
        assert_eq!(best.design, EsdDesign::NONE);
    }

    #[test]
    fn invalid_query_bounds() {
        let mut q = DesignQuery::new(Objective::MaxRate, 3);
        q.qber_ceiling = Some(1.5);
        assert!(matches!(
            optimize(0.1, &ParamSet::reference(), &q),
            Err(EsdError::InvalidParameter(_))
        ));
    }

    #[test]
    fn feasibility_verdicts() {
        let r = feasibility_report(&ParamSet::reference());
        assert!(r.gate_ok && r.error_budget.feasible && r.feasible);

        let mut p = ParamSet::reference();
        p.gate.deflection = 0.001;
        let r = feasibility_report(&p);
        assert!(!r.gate_ok && !r.feasible);

        let mut p = ParamSet::reference();
        p.protocol.channel_error = p.protocol.qber_threshold;
        let r = feasibility_report(&p);
        assert!(r.gate_ok && !r.error_budget.feasible && !r.feasible);
    }
}
