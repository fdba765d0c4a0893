//! Minimal SVG line charts.

use vhip_core::f64::TrajectoryLog;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const PAD: f64 = 40.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub fn line_chart(title: &str, series: &[Series]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD);
    let sy = |y: f64| HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * PAD);

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{PAD}\" y=\"20\" font-size=\"13\">{title}</text>\n\
         <rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n\
         <text x=\"{PAD}\" y=\"{}\">{x0:.3}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{x1:.3}</text>\n\
         <text x=\"4\" y=\"{}\">{y1:.3}</text><text x=\"4\" y=\"{}\">{y0:.3}</text>\n",
        WIDTH - 2.0 * PAD,
        HEIGHT - 2.0 * PAD,
        HEIGHT - PAD + 14.0,
        WIDTH - PAD,
        HEIGHT - PAD + 14.0,
        PAD + 4.0,
        HEIGHT - PAD,
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        );
        let ly = PAD + 14.0 * (i as f64 + 1.0);
        out += &format!(
            "<text x=\"{}\" y=\"{ly}\" fill=\"{color}\" text-anchor=\"end\">{}</text>\n",
            WIDTH - PAD - 6.0,
            s.label
        );
    }
    out += "</svg>\n";
    out
}

/// CoM height, `t_g`, CBP height and the horizontal gDCM over time.
pub fn trajectory_chart(log: &TrajectoryLog) -> String {
    let pick = |f: fn(&vhip_core::simulation::LogRow<f64>) -> f64| {
        log.rows.iter().map(|r| (r.t, f(r))).collect()
    };
    let series = [
        Series {
            label: "z",
            points: pick(|r| r.r.z),
        },
        Series {
            label: "t_g",
            points: pick(|r| r.t_g),
        },
        Series {
            label: "z_cg",
            points: pick(|r| r.z_cg),
        },
        Series {
            label: "xi_g x",
            points: pick(|r| r.xi_g.x),
        },
        Series {
            label: "xi_g y",
            points: pick(|r| r.xi_g.y),
        },
    ];
    line_chart(&format!("outcome: {}", log.outcome.tag()), &series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_polyline_per_series() {
        let s = [
            Series {
                label: "a",
                points: vec![(0.0, 0.0), (1.0, 1.0)],
            },
            Series {
                label: "b",
                points: vec![(0.0, 1.0), (1.0, f64::NAN)],
            },
        ];
        let svg = line_chart("t", &s);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_chart_is_well_formed() {
        let svg = line_chart("empty", &[]);
        assert!(svg.contains("</svg>"));
    }
}
