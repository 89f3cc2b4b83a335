//! CSV tables, run manifests and figure data.

pub mod figures;
pub mod svg;

use std::fmt::Write as _;

use crate::analytics::LinkMetrics;
use crate::config;
use crate::error::{EsdError, Result};
use crate::params::ParamSet;

/// Column order of every sweep table.
pub const CSV_HEADER: [&str; 10] = [
    "t", "n", "k", "p_s", "q_s", "p_tail", "q_tail", "nesr", "s_esd", "qber",
];

/// Cell text for an undefined ratio.
pub const UNDEFINED: &str = "undefined";

fn ratio_cell(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), config::fmt_num)
}

/// Renders metric rows in the given order as CSV with a header line.
pub fn csv_table(rows: &[LinkMetrics]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for m in rows {
        writer
            .write_record([
                config::fmt_num(m.t),
                m.design.n().to_string(),
                m.design.k().to_string(),
                config::fmt_num(m.p_s),
                config::fmt_num(m.q_s),
                config::fmt_num(m.p_tail),
                config::fmt_num(m.q_tail),
                ratio_cell(m.nesr),
                config::fmt_num(m.s_esd),
                ratio_cell(m.qber),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// `points` values of `t` evenly spaced in `log10` from `t_min` to `t_max`,
/// endpoints included exactly.
pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(EsdError::invalid("t grid needs at least one point"));
    }
    if !(t_min > 0.0 && t_max <= 1.0 && t_min <= t_max) {
        return Err(EsdError::invalid(format!(
            "t range must satisfy 0 < t_min <= t_max <= 1, got [{t_min}, {t_max}]"
        )));
    }
    if points == 1 {
        if t_min != t_max {
            return Err(EsdError::invalid("a one-point t grid needs t_min == t_max"));
        }
        return Ok(vec![t_min]);
    }
    let (lo, hi) = (t_min.log10(), t_max.log10());
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => t_min,
            i if i == points - 1 => t_max,
            i => 10f64.powf(lo + step * i as f64),
        })
        .collect())
}

/// `key=value` manifest: tool, version, command, command options and the
/// resolved parameter set.
pub fn manifest(command: &str, options: &[(&str, String)], params: &ParamSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tool={}", env!("CARGO_PKG_NAME"));
    let _ = writeln!(out, "version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "command={command}");
    for (k, v) in options {
        let _ = writeln!(out, "{k}={v}");
    }
    out.push_str(&config::render(params));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{link_metrics, EsdDesign};

    #[test]
    fn header_and_row_shape() {
        let p = ParamSet::reference();
        let rows = vec![
            link_metrics(0.5, EsdDesign::NONE, &p).unwrap(),
            link_metrics(0.5, EsdDesign::new(3, 2).unwrap(), &p).unwrap(),
        ];
        let table = csv_table(&rows);
        let lines: Vec<_> = table.lines().collect();
        assert_eq!(lines[0], "t,n,k,p_s,q_s,p_tail,q_tail,nesr,s_esd,qber");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("5.0000000000000000e-1,0,0,"));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 10);
        }
    }

    #[test]
    fn cells_round_trip_exactly() {
        let p = ParamSet::reference();
        let m = link_metrics(1e-13, EsdDesign::new(7, 3).unwrap(), &p).unwrap();
        let table = csv_table(&[m]);
        let row: Vec<f64> = table.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row[7], m.nesr.unwrap());
        assert_eq!(row[9], m.qber.unwrap());
        assert_eq!(row[6], m.q_tail);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-14, 1.0, 15).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g[0], 1e-14);
        assert_eq!(g[14], 1.0);
        assert!((g[1] / 1e-13 - 1.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(log_grid(1e-3, 1e-3, 1).is_ok());
        assert!(log_grid(1e-3, 1e-2, 0).is_err());
        assert!(log_grid(1e-2, 1e-3, 5).is_err());
    }

    #[test]
    fn manifest_has_all_keys() {
        let m = manifest("analyze", &[("n", "7".into())], &ParamSet::reference());
        for key in config::KEYS {
            assert!(m.contains(&format!("{key}=")), "{key}");
        }
        assert!(m.contains("command=analyze\n"));
        assert!(m.contains("n=7\n"));
    }
}
