//! Minimal static SVG renderer for rate curves. Finite values become
//! polylines; runs of infinite values are drawn as dashed segments clipped
//! to the top edge of the plot area.

use brwlab::rates::RateCurve;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub fn rate_curves_svg(curves: &[RateCurve]) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = 0.0f64;
    let mut y_max = f64::NEG_INFINITY;
    for c in curves {
        for (&x, &v) in c.x_grid.iter().zip(&c.values) {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            if v.is_finite() {
                y_min = y_min.min(v);
                y_max = y_max.max(v);
            }
        }
    }
    if !x_min.is_finite() || !y_max.is_finite() {
        x_min = 0.0;
        x_max = 1.0;
        y_max = 1.0;
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let (y_lo, y_hi) = (y_min - pad, y_max + pad);

    let sx = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes.
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN,
        MARGIN,
        MARGIN,
        HEIGHT - MARGIN
    ));
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * f64::from(i) / 4.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{:.3}</text>\n",
            sx(fx),
            HEIGHT - MARGIN + 18.0,
            fx
        ));
        let fy = y_lo + (y_hi - y_lo) * f64::from(i) / 4.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{:.3}</text>\n",
            MARGIN - 6.0,
            sy(fy) + 4.0,
            fy
        ));
    }

    for (ci, curve) in curves.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |seg: &mut Vec<(f64, f64)>, out: &mut String| {
            if seg.len() >= 2 {
                let pts: Vec<String> = seg
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                    .collect();
                out.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                    pts.join(" ")
                ));
            }
            seg.clear();
        };
        let mut inf_run: Option<(f64, f64)> = None;
        for (&x, &v) in curve.x_grid.iter().zip(&curve.values) {
            if v.is_finite() {
                if let Some((a, b)) = inf_run.take() {
                    out.push_str(&clipped_dashes(sx(a), sx(b), color));
                }
                segment.push((x, v));
            } else {
                flush(&mut segment, &mut out);
                inf_run = match inf_run {
                    None => Some((x, x)),
                    Some((a, _)) => Some((a, x)),
                };
            }
        }
        if let Some((a, b)) = inf_run.take() {
            out.push_str(&clipped_dashes(sx(a), sx(b), color));
        }
        flush(&mut segment, &mut out);

        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" fill=\"{color}\">{}</text>\n",
            WIDTH - MARGIN - 80.0,
            MARGIN + 16.0 * (ci as f64 + 1.0),
            curve.kind.label()
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Dashed segment along the top clip edge marking an infinite stretch.
fn clipped_dashes(x_a: f64, x_b: f64, color: &str) -> String {
    let (a, b) = if x_b > x_a + 1.0 {
        (x_a, x_b)
    } else {
        (x_a - 3.0, x_a + 3.0)
    };
    format!(
        "<line x1=\"{a:.2}\" y1=\"{MARGIN}\" x2=\"{b:.2}\" y2=\"{MARGIN}\" stroke=\"{color}\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n"
    )
}
