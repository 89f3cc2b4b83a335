//! Reference figures: NESR and QBER against `t` for a handful of designs,
//! and NESR and QBER over the `(n, k)` grid at two fixed transmission
//! rates. Each figure comes with the quantitative claims it is expected to
//! show, checked against the computed data.

use std::fmt::{self, Write as _};

use super::svg::{GridHeatMap, LineChart, Scale, Series};
use super::{csv_table, log_grid};
use crate::analytics::{link_metrics, EsdDesign, LinkMetrics};
use crate::designer::sweep;
use crate::error::{EsdError, Result};
use crate::params::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// NESR and QBER against `t`, at P = 0.99 and P = 0.5.
    NesrQber,
    /// NESR and QBER over `0 <= k <= n <= 9` at t = 1e-7 and t = 1e-9.
    NkGrid,
}

impl Figure {
    pub fn as_str(self) -> &'static str {
        match self {
            Figure::NesrQber => "nesr-qber",
            Figure::NkGrid => "nk-grid",
        }
    }
}

impl std::str::FromStr for Figure {
    type Err = EsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nesr-qber" => Ok(Figure::NesrQber),
            "nk-grid" => Ok(Figure::NkGrid),
            other => Err(EsdError::invalid(format!(
                "unknown figure {other:?} (expected nesr-qber or nk-grid)"
            ))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Designs drawn in the NESR/QBER-vs-`t` panels unless overridden.
pub fn default_designs() -> Vec<EsdDesign> {
    [(0, 0), (3, 2), (5, 3), (7, 3)]
        .into_iter()
        .map(|(n, k)| EsdDesign::new(n, k).expect("k <= n"))
        .collect()
}

pub const QBER_LIMIT: f64 = 0.03;

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOutput {
    pub figure: Figure,
    /// `(file name, contents)`
    pub files: Vec<(String, String)>,
    pub checks: Vec<ClaimCheck>,
}

impl FigureOutput {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "figure={}", self.figure);
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "fail" };
            let _ = writeln!(out, "{}={} ({})", c.name, verdict, c.detail);
        }
        let _ = writeln!(out, "overall={}", if self.all_pass() { "pass" } else { "fail" });
        out
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub designs: Vec<EsdDesign>,
    pub points_per_decade: usize,
    pub n_max: u32,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            designs: default_designs(),
            points_per_decade: 10,
            n_max: 9,
        }
    }
}

pub fn reproduce(figure: Figure, params: &ParamSet, opts: &ReproduceOptions) -> Result<FigureOutput> {
    match figure {
        Figure::NesrQber => nesr_qber(params, opts),
        Figure::NkGrid => nk_grid(params, opts),
    }
}

fn design_label(d: EsdDesign) -> String {
    format!("n={},k={}", d.n(), d.k())
}

fn nesr_qber(params: &ParamSet, opts: &ReproduceOptions) -> Result<FigureOutput> {
    if opts.designs.is_empty() {
        return Err(EsdError::invalid("figure needs at least one design"));
    }
    let ts = log_grid(1e-14, 1.0, 14 * opts.points_per_decade + 1)?;
    let anchor = EsdDesign::new(7, 3).expect("k <= n");
    let mut files = Vec::new();
    let mut checks = Vec::new();

    for (deflection, tag, anchor_t) in [(0.99, "p0.99", 1e-13), (0.5, "p0.5", 1e-12)] {
        let panel = params.with_deflection(deflection);
        let mut rows = Vec::with_capacity(ts.len() * opts.designs.len());
        for &t in &ts {
            for &d in &opts.designs {
                rows.push(link_metrics(t, d, &panel)?);
            }
        }
        let table = csv_table(&rows);
        let series = |pick: fn(&LinkMetrics) -> Option<f64>| -> Vec<Series> {
            opts.designs
                .iter()
                .map(|&d| Series {
                    label: design_label(d),
                    points: rows
                        .iter()
                        .filter(|m| m.design == d)
                        .filter_map(|m| pick(m).map(|v| (m.t, v)))
                        .collect(),
                })
                .collect()
        };
        let nesr_chart = LineChart {
            title: format!("NESR vs t, P={deflection}"),
            x_label: "transmission rate t".into(),
            y_label: "NESR".into(),
            x_scale: Scale::Log10,
            y_scale: Scale::Log10,
            series: series(|m| m.nesr),
            guides: vec![],
        };
        let qber_chart = LineChart {
            title: format!("QBER vs t, P={deflection}"),
            x_label: "transmission rate t".into(),
            y_label: "QBER".into(),
            x_scale: Scale::Log10,
            y_scale: Scale::Linear,
            series: series(|m| m.qber),
            guides: vec![("3%".into(), QBER_LIMIT)],
        };
        files.push((format!("nesr_vs_t_{tag}.csv"), table.clone()));
        files.push((format!("nesr_vs_t_{tag}.svg"), nesr_chart.render()));
        files.push((format!("qber_vs_t_{tag}.csv"), table));
        files.push((format!("qber_vs_t_{tag}.svg"), qber_chart.render()));

        let m = link_metrics(anchor_t, anchor, &panel)?;
        let nesr = m.nesr.unwrap_or(0.0);
        let gain = (nesr / anchor_t).log10();
        let gain_ok = if deflection == 0.99 {
            (7.8..=8.3).contains(&gain)
        } else {
            gain >= 7.0
        };
        let gain_claim = if deflection == 0.99 { "in [7.8, 8.3]" } else { ">= 7" };
        checks.push(ClaimCheck {
            name: format!("{tag}.nesr_gain_7_3_at_t{anchor_t:e}"),
            pass: gain_ok,
            detail: format!("log10(NESR/t) = {gain:.4} {gain_claim}; NESR = {nesr:.6e}"),
        });
        let qber = m.qber.unwrap_or(1.0);
        checks.push(ClaimCheck {
            name: format!("{tag}.qber_7_3_at_t{anchor_t:e}"),
            pass: qber < QBER_LIMIT,
            detail: format!("QBER = {qber:.6} < {QBER_LIMIT}"),
        });
    }
    Ok(FigureOutput {
        figure: Figure::NesrQber,
        files,
        checks,
    })
}

fn nk_grid(params: &ParamSet, opts: &ReproduceOptions) -> Result<FigureOutput> {
    let panel = params.with_deflection(0.99);
    let mut files = Vec::new();
    let mut checks = Vec::new();
    for (t, tag) in [(1e-7, "t1e-7"), (1e-9, "t1e-9")] {
        let points = sweep(t, &panel, opts.n_max)?;
        let rows: Vec<LinkMetrics> = points.iter().map(|p| p.metrics).collect();
        let table = csv_table(&rows);
        let cells = |pick: fn(&LinkMetrics) -> Option<f64>| {
            rows.iter()
                .map(|m| (m.design.n(), m.design.k(), pick(m)))
                .collect::<Vec<_>>()
        };
        let nesr_map = GridHeatMap {
            title: format!("NESR vs (n,k), t={t:e}"),
            value_label: "NESR".into(),
            scale: Scale::Log10,
            n_max: opts.n_max,
            cells: cells(|m| m.nesr),
        };
        let qber_map = GridHeatMap {
            title: format!("QBER vs (n,k), t={t:e}"),
            value_label: "QBER".into(),
            scale: Scale::Linear,
            n_max: opts.n_max,
            cells: cells(|m| m.qber),
        };
        files.push((format!("nesr_vs_nk_{tag}.csv"), table.clone()));
        files.push((format!("nesr_vs_nk_{tag}.svg"), nesr_map.render()));
        files.push((format!("qber_vs_nk_{tag}.csv"), table));
        files.push((format!("qber_vs_nk_{tag}.svg"), qber_map.render()));

        let qber_of = |m: &LinkMetrics| m.qber.unwrap_or(1.0);
        let worst_controlled = |min_k: u32| {
            rows.iter()
                .filter(|m| m.design.k() >= min_k)
                .map(qber_of)
                .fold(0.0f64, f64::max)
        };
        if t == 1e-7 {
            let worst = worst_controlled(1);
            checks.push(ClaimCheck {
                name: format!("{tag}.qber_below_limit_for_k_ge_1"),
                pass: worst < QBER_LIMIT,
                detail: format!("max QBER over k >= 1 = {worst:.6}"),
            });
        } else {
            let worst = worst_controlled(2);
            checks.push(ClaimCheck {
                name: format!("{tag}.qber_below_limit_for_k_ge_2"),
                pass: worst < QBER_LIMIT,
                detail: format!("max QBER over k >= 2 = {worst:.6}"),
            });
            let best_k1 = rows
                .iter()
                .filter(|m| m.design.k() == 1)
                .map(qber_of)
                .fold(1.0f64, f64::min);
            checks.push(ClaimCheck {
                name: format!("{tag}.qber_above_limit_for_k_eq_1"),
                pass: best_k1 > QBER_LIMIT,
                detail: format!("min QBER over k = 1 = {best_k1:.6}"),
            });
        }
    }
    Ok(FigureOutput {
        figure: Figure::NkGrid,
        files,
        checks,
    })
}
