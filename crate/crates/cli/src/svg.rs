//! Minimal static SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Renders one curve as a fixed-size polyline chart with labeled axes.
///
/// The x range spans the data; the y range starts at zero so probability
/// curves keep their absolute scale. Output depends only on the inputs,
/// so identical curves render to identical bytes.
pub fn line_chart(xs: &[f64], ys: &[f64], x_label: &str, y_label: &str) -> String {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());

    let (x_min, x_max) = padded_range(xs[0], xs[xs.len() - 1]);
    let y_top = ys.iter().cloned().fold(0.0, f64::max);
    let (y_min, y_max) = padded_range(0.0, y_top);

    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_width;
    let to_py = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_height;

    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        write!(points, "{:.2},{:.2} ", to_px(*x), to_py(*y)).unwrap();
    }

    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let mut svg = String::new();
    write!(
        svg,
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
        ),
        w = WIDTH,
        h = HEIGHT
    )
    .unwrap();
    write!(
        svg,
        "<path d=\"M {left} {top} V {bottom} H {right}\" fill=\"none\" stroke=\"black\"/>\n"
    )
    .unwrap();
    write!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
        points.trim_end()
    )
    .unwrap();

    for (value, anchor_x) in [(x_min, left), (x_max, right)] {
        write!(
            svg,
            "<text x=\"{anchor_x}\" y=\"{}\" text-anchor=\"middle\">{value:.3}</text>\n",
            bottom + 18.0
        )
        .unwrap();
    }
    for (value, anchor_y) in [(y_min, bottom), (y_max, top)] {
        write!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{value:.3}</text>\n",
            left - 8.0,
            anchor_y + 4.0
        )
        .unwrap();
    }
    write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n",
        (left + right) / 2.0,
        HEIGHT - 12.0
    )
    .unwrap();
    write!(
        svg,
        concat!(
            "<text x=\"16\" y=\"{mid}\" text-anchor=\"middle\" ",
            "transform=\"rotate(-90 16 {mid})\">{label}</text>\n"
        ),
        mid = (top + bottom) / 2.0,
        label = y_label
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

/// Widens a degenerate range so the pixel mapping stays finite.
fn padded_range(low: f64, high: f64) -> (f64, f64) {
    if high > low {
        (low, high)
    } else {
        (low - 0.5, low + 0.5)
    }
}
