//! Static SVG panels drawn from scan results.

use plotters::prelude::*;

use crate::scan::GeometryResult;

struct Line {
    label: String,
    pts: Vec<(f64, f64)>,
    dashed: bool,
    color: usize,
}

impl Line {
    fn new(label: String, pts: Vec<(f64, f64)>, dashed: bool, color: usize) -> Self {
        Self { label, pts, dashed, color }
    }
}

fn bounds(series: &[Line]) -> ((f64, f64), (f64, f64)) {
    let pts = series.iter().flat_map(|s| s.pts.iter().copied()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    let pad = |a: f64, b: f64| {
        let d = if b > a { 0.05 * (b - a) } else { 0.5 };
        (a - d, b + d)
    };
    (pad(x0, x1), pad(y0, y1))
}

fn chart(title: &str, x_desc: &str, y_desc: &str, series: &[Line]) -> String {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (720, 480)).into_drawing_area();
        let _ = root.fill(&WHITE);
        let ((x0, x1), (y0, y1)) = bounds(series);
        let mut c = match ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(80)
            .build_cartesian_2d(x0..x1, y0..y1)
        {
            Ok(c) => c,
            Err(_) => return svg_fallback(title),
        };
        let _ = c.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw();
        for line in series {
            let style = ShapeStyle::from(&Palette99::pick(line.color).to_rgba()).stroke_width(2);
            let drawn = if line.dashed {
                c.draw_series(DashedLineSeries::new(line.pts.iter().copied(), 6, 4, style))
            } else {
                c.draw_series(LineSeries::new(line.pts.iter().copied(), style))
            };
            if let Ok(d) = drawn {
                if !line.label.is_empty() {
                    d.label(line.label.as_str()).legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], style));
                }
            }
        }
        let _ = c.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw();
        let _ = root.present();
    }
    svg
}

fn svg_fallback(title: &str) -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\"><text x=\"20\" y=\"40\">{}</text></svg>\n", title)
}

fn per_state(results: &[GeometryResult], f: impl Fn(&GeometryResult, usize) -> Option<f64>) -> Vec<Vec<(f64, f64)>> {
    let n = results.iter().map(|r| r.states.len()).max().unwrap_or(0);
    (0..n).map(|i| results.iter().filter(|r| i < r.states.len()).filter_map(|r| f(r, i).map(|v| (r.coordinate, v))).collect()).collect()
}

fn state_label(results: &[GeometryResult], i: usize) -> String {
    results.first().and_then(|r| r.states.get(i)).map_or(format!("state {}", i), |s| format!("{} ({})", i, s.label))
}

/// `(file name, svg)` for every panel: energies with exact dashes, `<S^2>`,
/// `|mu_0i|^2` when dipoles were given, and ansatz sizes.
pub fn panels(results: &[GeometryResult]) -> Vec<(String, String)> {
    let mut out = Vec::new();

    let mut energy = Vec::new();
    let computed = per_state(results, |r, i| Some(r.states[i].energy));
    let exact = per_state(results, |r, i| Some(r.states[i].fci_energy));
    for (i, (c, x)) in computed.into_iter().zip(exact).enumerate() {
        energy.push(Line::new(state_label(results, i), c, false, i));
        energy.push(Line::new(String::new(), x, true, i));
    }
    out.push(("energies.svg".to_string(), chart("Energies (dashed: FCI)", "coordinate", "E / hartree", &energy)));

    let s2: Vec<Line> = per_state(results, |r, i| Some(r.states[i].s2))
        .into_iter()
        .enumerate()
        .map(|(i, p)| Line::new(state_label(results, i), p, false, i))
        .collect();
    out.push(("s2.svg".to_string(), chart("<S^2>", "coordinate", "<S^2>", &s2)));

    if results.iter().any(|r| r.properties.iter().any(|p| p.mu2.is_some())) {
        let mu: Vec<Line> = per_state(results, |r, j| {
            r.properties.iter().find(|p| p.i == 0 && p.j == j).and_then(|p| p.mu2_total()).map(|v| v.max(1e-16).log10())
        })
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(j, p)| Line::new(format!("0-{}", state_label(results, j)), p, false, j))
        .collect();
        out.push(("dipoles.svg".to_string(), chart("|mu_0i|^2", "coordinate", "log10 |mu|^2 / D^2", &mu)));
    }

    let total: Vec<(f64, f64)> = results.iter().map(|r| (r.coordinate, r.summary.total_ops as f64)).collect();
    let distinct: Vec<(f64, f64)> = results.iter().map(|r| (r.coordinate, r.summary.distinct_ops as f64)).collect();
    let sizes = vec![Line::new("total".to_string(), total, false, 0), Line::new("distinct".to_string(), distinct, true, 0)];
    out.push(("ansatz.svg".to_string(), chart("Ansatz size", "coordinate", "operators", &sizes)));
    out
}
