//! Minimal standalone SVG charts: log/linear line charts and a triangular
//! heat map for `(n, k)` grids.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    scale: Scale,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(scale: Scale, values: impl Iterator<Item = f64>) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            if let Some(u) = transform(scale, v) {
                lo = lo.min(u);
                hi = hi.max(u);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if scale == Scale::Log10 {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        Axis { scale, lo, hi }
    }

    fn fraction(&self, v: f64) -> Option<f64> {
        transform(self.scale, v).map(|u| (u - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match self.scale {
            Scale::Log10 => {
                let span = (self.hi - self.lo) as i64;
                let step = (span / 8).max(1);
                (self.lo as i64..=self.hi as i64)
                    .step_by(step as usize)
                    .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                    .collect()
            }
            Scale::Linear => (0..=5)
                .map(|i| {
                    let f = f64::from(i) / 5.0;
                    let v = self.lo + f * (self.hi - self.lo);
                    (f, format!("{v:.3}"))
                })
                .collect(),
        }
    }
}

fn transform(scale: Scale, v: f64) -> Option<f64> {
    match scale {
        Scale::Linear if v.is_finite() => Some(v),
        Scale::Log10 if v > 0.0 && v.is_finite() => Some(v.log10()),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
    /// Dashed horizontal reference lines, e.g. a QBER threshold.
    pub guides: Vec<(String, f64)>,
}

impl LineChart {
    pub fn render(&self) -> String {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.guides.iter().map(|g| g.1));
        let x_axis = Axis::fit(self.x_scale, xs);
        let y_axis = Axis::fit(self.y_scale, ys);
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let px = |f: f64| LEFT + f * plot_w;
        let py = |f: f64| TOP + (1.0 - f) * plot_h;

        let mut svg = header(&self.title);
        frame(&mut svg, &self.x_label, &self.y_label);
        for (f, label) in x_axis.ticks() {
            let x = px(f);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##,
                TOP + plot_h
            );
            let _ = writeln!(
                svg,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11">{label}</text>"#,
                TOP + plot_h + 16.0
            );
        }
        for (f, label) in y_axis.ticks() {
            let y = py(f);
            let _ = writeln!(
                svg,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
                LEFT + plot_w
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{label}</text>"#,
                LEFT - 6.0,
                y + 4.0
            );
        }
        for (label, value) in &self.guides {
            if let Some(f) = y_axis.fraction(*value) {
                let y = py(f);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#555" stroke-dasharray="6,4"/>"##,
                    LEFT + plot_w
                );
                let _ = writeln!(
                    svg,
                    r##"<text x="{:.2}" y="{:.2}" font-size="11" fill="#555">{}</text>"##,
                    LEFT + plot_w + 4.0,
                    y + 4.0,
                    escape(label)
                );
            }
        }
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let coords: Vec<String> = s
                .points
                .iter()
                .filter_map(|&(x, y)| {
                    let fx = x_axis.fraction(x)?;
                    let fy = y_axis.fraction(y)?;
                    Some(format!("{:.2},{:.2}", px(fx), py(fy)))
                })
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                coords.join(" ")
            );
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = WIDTH - RIGHT + 20.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
                lx + 20.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
                lx + 26.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Lower-triangular heat map over `0 <= k <= n <= n_max`; `n` runs along x
/// and `k` along y.
#[derive(Debug, Clone)]
pub struct GridHeatMap {
    pub title: String,
    pub value_label: String,
    pub scale: Scale,
    pub n_max: u32,
    /// `(n, k, value)`
    pub cells: Vec<(u32, u32, Option<f64>)>,
}

impl GridHeatMap {
    pub fn render(&self) -> String {
        let axis = Axis::fit(self.scale, self.cells.iter().filter_map(|c| c.2));
        let side = f64::from(self.n_max + 1);
        let plot = (HEIGHT - TOP - BOTTOM).min(WIDTH - LEFT - RIGHT);
        let cell = plot / side;
        let mut svg = header(&self.title);
        frame(&mut svg, "n", "k");
        for &(n, k, value) in &self.cells {
            let x = LEFT + f64::from(n) * cell;
            let y = TOP + plot - f64::from(k + 1) * cell;
            let (fill, text) = match value.and_then(|v| axis.fraction(v).map(|f| (v, f))) {
                Some((v, f)) => (color_ramp(f), format!("{v:.2e}")),
                None => ("#cccccc".to_string(), "-".to_string()),
            };
            let _ = writeln!(
                svg,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="{fill}" stroke="#fff"/>"##
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="8">{text}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 3.0
            );
        }
        for i in 0..=self.n_max {
            let c = LEFT + (f64::from(i) + 0.5) * cell;
            let _ = writeln!(
                svg,
                r#"<text x="{c:.2}" y="{:.2}" text-anchor="middle" font-size="11">{i}</text>"#,
                TOP + plot + 16.0
            );
            let r = TOP + plot - (f64::from(i) + 0.5) * cell;
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{i}</text>"#,
                LEFT - 6.0,
                r + 4.0
            );
        }
        // colour bar
        let bx = LEFT + plot + 30.0;
        for i in 0..50 {
            let f = f64::from(i) / 49.0;
            let y = TOP + plot * (1.0 - f) - plot / 50.0;
            let _ = writeln!(
                svg,
                r#"<rect x="{bx:.2}" y="{y:.2}" width="18" height="{:.2}" fill="{}"/>"#,
                plot / 50.0 + 0.5,
                color_ramp(f)
            );
        }
        let fmt_end = |u: f64| match self.scale {
            Scale::Log10 => format!("1e{u:.0}"),
            Scale::Linear => format!("{u:.3}"),
        };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            bx + 22.0,
            TOP + 8.0,
            fmt_end(axis.hi)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            bx + 22.0,
            TOP + plot,
            fmt_end(axis.lo)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            bx,
            TOP - 8.0,
            escape(&self.value_label)
        );
        svg.push_str("</svg>\n");
        svg
    }
}

fn header(title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="15" font-weight="bold">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    svg
}

fn frame(svg: &mut String, x_label: &str, y_label: &str) {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );
}

/// Dark blue through teal to yellow.
fn color_ramp(f: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [68.0, 1.0, 84.0]),
        (0.35, [49.0, 104.0, 142.0]),
        (0.7, [53.0, 183.0, 121.0]),
        (1.0, [253.0, 231.0, 37.0]),
    ];
    let f = f.clamp(0.0, 1.0);
    let i = STOPS.iter().rposition(|s| s.0 <= f).unwrap_or(0).min(STOPS.len() - 2);
    let (f0, c0) = STOPS[i];
    let (f1, c1) = STOPS[i + 1];
    let w = (f - f0) / (f1 - f0);
    let c: Vec<u8> = (0..3).map(|j| (c0[j] + w * (c1[j] - c0[j])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}
