//! Native SVG line charts: no plotting dependency, a fixed minimal grammar.
//! Axes span the data with 5% margins; an optional right-hand axis carries
//! dimensionless series (coverage probability) next to the timing curves.

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 72.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;
const TICKS: usize = 5;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Plot against the right-hand axis instead of the left one.
    pub right_axis: bool,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Label of the right-hand axis; present iff any series uses it.
    pub y2_label: Option<String>,
    pub series: Vec<Series>,
}

/// Data range stretched by 5% on each side; degenerate ranges widen by one.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= 0.0 {
        return (lo - 1.0, hi + 1.0);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs();
    if (0.01..10_000.0).contains(&magnitude) {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn render(&self) -> String {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let (x_lo, x_hi) =
            padded_range(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
        let (y_lo, y_hi) = padded_range(
            self.series.iter().filter(|s| !s.right_axis).flat_map(|s| s.points.iter().map(|p| p.1)),
        );
        let has_right = self.series.iter().any(|s| s.right_axis);
        let (y2_lo, y2_hi) = padded_range(
            self.series.iter().filter(|s| s.right_axis).flat_map(|s| s.points.iter().map(|p| p.1)),
        );

        let x_of = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let y_of = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;
        let y2_of = |y: f64| MARGIN_TOP + plot_h - (y - y2_lo) / (y2_hi - y2_lo) * plot_h;

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // Frame and grid.
        svg.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>\n"
        ));
        for i in 0..=TICKS {
            let f = i as f64 / TICKS as f64;
            let x = MARGIN_LEFT + f * plot_w;
            let y = MARGIN_TOP + plot_h - f * plot_h;
            let xv = x_lo + f * (x_hi - x_lo);
            let yv = y_lo + f * (y_hi - y_lo);
            svg.push_str(&format!(
                "<line x1=\"{x:.1}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n",
                MARGIN_TOP + plot_h
            ));
            svg.push_str(&format!(
                "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                MARGIN_TOP + plot_h + 16.0,
                tick_label(xv)
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 6.0,
                tick_label(yv)
            ));
            if has_right {
                let y2v = y2_lo + f * (y2_hi - y2_lo);
                svg.push_str(&format!(
                    "<text x=\"{:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"start\">{}</text>\n",
                    MARGIN_LEFT + plot_w + 6.0,
                    tick_label(y2v)
                ));
            }
        }

        // Axis labels.
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));
        if let Some(y2) = &self.y2_label {
            let x = WIDTH - 18.0;
            svg.push_str(&format!(
                "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(90 {x:.1} {:.1})\">{}</text>\n",
                MARGIN_TOP + plot_h / 2.0,
                MARGIN_TOP + plot_h / 2.0,
                escape(y2)
            ));
        }

        // Series and legend.
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let project = |p: &(f64, f64)| {
                let x = x_of(p.0);
                let y = if series.right_axis { y2_of(p.1) } else { y_of(p.1) };
                (x, y)
            };
            let path: Vec<String> = series
                .points
                .iter()
                .map(project)
                .map(|(x, y)| format!("{x:.2},{y:.2}"))
                .collect();
            let dash = if series.right_axis { " stroke-dasharray=\"6 3\"" } else { "" };
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>\n",
                path.join(" ")
            ));
            for (x, y) in series.points.iter().map(project) {
                svg.push_str(&format!(
                    "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.6\" fill=\"{color}\"/>\n"
                ));
            }
            let lx = MARGIN_LEFT + 12.0;
            let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
            svg.push_str(&format!(
                "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{:.1}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>\n",
                lx + 22.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                lx + 28.0,
                ly + 4.0,
                escape(&series.label)
            ));
        }

        svg.push_str("</svg>\n");
        svg
    }
}
