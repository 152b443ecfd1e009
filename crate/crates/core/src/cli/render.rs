//! SVG and plain-text views of barcodes and planar point clouds.

use std::fmt::Write as _;

use crate::geometry::PointCloud;
use crate::homology::{Barcode, Interval};

const WIDTH: f64 = 640.0;
const MARGIN_LEFT: f64 = 48.0;
const MARGIN_RIGHT: f64 = 24.0;
const BAR_GAP: f64 = 6.0;
const PANEL_HEAD: f64 = 28.0;
const AXIS_HEIGHT: f64 = 26.0;

/// Birth first, then longer bars first; infinite bars count as longest.
fn display_order(mut bars: Vec<Interval>) -> Vec<Interval> {
    let len = |i: &Interval| i.death.map_or(f64::INFINITY, |d| d - i.birth);
    bars.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(len(b).total_cmp(&len(a))));
    bars
}

fn ticks(max: f64) -> Vec<f64> {
    if !(max > 0.0) {
        return vec![0.0];
    }
    let raw = max / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    (0..).map(|k| k as f64 * step).take_while(|&t| t <= max * (1.0 + 1e-12)).collect()
}

/// One panel per dimension, one horizontal bar per interval, x = filtration
/// value. Infinite bars run to the right edge and end in an arrowhead.
pub fn barcode_svg(barcode: &Barcode) -> String {
    let max_f = barcode.max_filtration();
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let x_of = |t: f64| {
        let t = if max_f > 0.0 { (t / max_f).clamp(0.0, 1.0) } else { 0.0 };
        MARGIN_LEFT + t * plot_w
    };

    let mut body = String::new();
    let mut y = 0.0;
    for dim in 0..=barcode.max_dim() {
        let bars = display_order(barcode.in_dim(dim));
        let _ = writeln!(
            body,
            r#"<text x="{MARGIN_LEFT}" y="{:.1}" font-family="sans-serif" font-size="14">dimension {dim} ({} intervals)</text>"#,
            y + 18.0,
            bars.len()
        );
        y += PANEL_HEAD;
        let top = y;
        for bar in &bars {
            y += BAR_GAP;
            let x0 = x_of(bar.birth);
            match bar.death {
                Some(d) => {
                    let _ = writeln!(
                        body,
                        r#"<line x1="{x0:.2}" y1="{y:.1}" x2="{:.2}" y2="{y:.1}" stroke="black" stroke-width="2"/>"#,
                        x_of(d)
                    );
                }
                None => {
                    let _ = writeln!(
                        body,
                        r#"<line x1="{x0:.2}" y1="{y:.1}" x2="{:.2}" y2="{y:.1}" stroke="black" stroke-width="2" marker-end="url(#arrow)"/>"#,
                        WIDTH - MARGIN_RIGHT
                    );
                }
            }
        }
        y += BAR_GAP;
        let _ = writeln!(
            body,
            r##"<rect x="{MARGIN_LEFT}" y="{top:.1}" width="{plot_w:.1}" height="{:.1}" fill="none" stroke="#999"/>"##,
            y - top
        );
        for t in ticks(max_f) {
            let x = x_of(t);
            let _ = writeln!(
                body,
                r##"<line x1="{x:.2}" y1="{y:.1}" x2="{x:.2}" y2="{:.1}" stroke="#999"/><text x="{x:.2}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"##,
                y + 4.0,
                y + 15.0,
                format_tick(t)
            );
        }
        y += AXIS_HEIGHT;
    }

    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h:.0}" viewBox="0 0 {w} {h:.0}">"#,
            "\n<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"4\" orient=\"auto\">",
            "<path d=\"M0,0 L8,4 L0,8 z\"/></marker></defs>\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
        ),
        w = WIDTH,
        h = y.max(1.0),
        body = body
    )
}

fn format_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Same layout as [`barcode_svg`] in characters: `=` spans the interval and
/// `>` marks a bar that never dies.
pub fn barcode_text(barcode: &Barcode, columns: usize) -> String {
    let columns = columns.max(10);
    let max_f = barcode.max_filtration();
    let col_of = |t: f64| {
        let t = if max_f > 0.0 { (t / max_f).clamp(0.0, 1.0) } else { 0.0 };
        (t * (columns - 1) as f64).round() as usize
    };
    let mut out = String::new();
    for dim in 0..=barcode.max_dim() {
        let bars = display_order(barcode.in_dim(dim));
        let _ = writeln!(out, "dimension {dim}: {} intervals, filtration 0 to {max_f}", bars.len());
        for bar in &bars {
            let start = col_of(bar.birth);
            let mut line = vec![' '; columns];
            match bar.death {
                Some(d) => {
                    let end = col_of(d).max(start);
                    line[start..=end].iter_mut().for_each(|c| *c = '=');
                }
                None => {
                    line[start..].iter_mut().for_each(|c| *c = '=');
                    line[columns - 1] = '>';
                }
            }
            let death = bar.death.map_or("inf".to_string(), |d| format!("{d:.6}"));
            let _ = writeln!(
                out,
                "|{}| [{:.6}, {death})",
                line.into_iter().collect::<String>(),
                bar.birth
            );
        }
    }
    out
}

/// Scatter plot of coordinates `x` and `y` of every point.
pub fn scatter_svg(cloud: &PointCloud, x: usize, y: usize) -> String {
    const SIZE: f64 = 560.0;
    const PAD: f64 = 20.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in cloud.iter() {
        for v in [p[x], p[y]] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let scale = (SIZE - 2.0 * PAD) / span;
    let mut body = String::new();
    for p in cloud.iter() {
        let _ = writeln!(
            body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#,
            PAD + (p[x] - lo) * scale,
            SIZE - PAD - (p[y] - lo) * scale
        );
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Barcode {
        Barcode::new(
            vec![
                Interval { dim: 0, birth: 0.0, death: None },
                Interval { dim: 0, birth: 0.0, death: Some(1.0) },
                Interval { dim: 1, birth: 1.0, death: Some(2f64.sqrt()) },
            ],
            2,
            2.0,
            0,
        )
    }

    #[test]
    fn svg_has_one_line_per_bar_and_arrow_for_infinite() {
        let svg = barcode_svg(&sample());
        assert_eq!(svg.matches("stroke-width=\"2\"").count(), 3);
        assert_eq!(svg.matches("marker-end").count(), 1);
        assert_eq!(svg.matches("dimension ").count(), 3);
    }

    #[test]
    fn order_is_birth_then_longest() {
        let bars = display_order(vec![
            Interval { dim: 1, birth: 0.5, death: Some(0.6) },
            Interval { dim: 1, birth: 0.2, death: Some(0.3) },
            Interval { dim: 1, birth: 0.5, death: Some(0.9) },
        ]);
        assert_eq!(bars[0].birth, 0.2);
        assert_eq!(bars[1].death, Some(0.9));
    }

    #[test]
    fn text_rendering() {
        let text = barcode_text(&sample(), 21);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("|====================>|"));
        assert!(lines[1].ends_with("[0.000000, inf)"));
        assert!(lines[2].starts_with("|===========          |"));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(2.0), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(ticks(0.0), vec![0.0]);
    }

    #[test]
    fn scatter_draws_every_point() {
        let c = PointCloud::from_points(2, &[[0.0, 0.0], [1.0, 1.0], [0.5, -1.0]]).unwrap();
        assert_eq!(scatter_svg(&c, 0, 1).matches("<circle").count(), 3);
    }
}
