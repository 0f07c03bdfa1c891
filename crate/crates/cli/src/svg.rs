//! Minimal SVG line plots and heatmaps.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 420.0;
const M: f64 = 56.0;

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn frame(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">{title}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>\n\
         <text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{ylabel}</text>\n\
         <rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W / 2.0,
        W / 2.0,
        H - 12.0,
        H / 2.0,
        H / 2.0,
        W - 2.0 * M,
        H - 2.0 * M
    );
    for (v, px) in [(x.0, M), (x.1, W - M)] {
        let _ = writeln!(s, "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{v:.3}</text>", H - M + 16.0);
    }
    for (v, py) in [(y.0, H - M), (y.1, M)] {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{py}\" text-anchor=\"end\">{v:.3}</text>", M - 4.0);
    }
    s
}

fn map(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - lo) / (hi - lo) * (b - a)
}

/// Polyline through `pts`, with a marker at each point.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, pts: &[(f64, f64)]) -> String {
    let xb = bounds(pts.iter().map(|p| p.0));
    let yb = bounds(pts.iter().map(|p| p.1));
    let mut s = frame(title, xlabel, ylabel, xb, yb);
    let coords: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .map(|&(x, y)| (map(x, xb, M, W - M), map(y, yb, H - M, M)))
        .collect();
    let path: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>", path.join(" "));
    for (x, y) in coords {
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"steelblue\"/>");
    }
    s.push_str("</svg>\n");
    s
}

/// Cell-centred heatmap of `values[j * nx + i]` over a rectangle, with optional point overlay.
pub fn heatmap(
    title: &str,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    nx: usize,
    ny: usize,
    values: &[f64],
    overlay: &[(f64, f64)],
) -> String {
    let xb = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x1 + 0.5) };
    let yb = if y1 > y0 { (y0, y1) } else { (y0 - 0.5, y1 + 0.5) };
    let vb = bounds(values.iter().copied());
    let mut s = frame(title, "Re z", "Im z", xb, yb);
    let cw = (W - 2.0 * M) / nx as f64;
    let ch = (H - 2.0 * M) / ny as f64;
    for j in 0..ny {
        for i in 0..nx {
            let v = values[j * nx + i];
            let t = if v.is_finite() { ((v - vb.0) / (vb.1 - vb.0)).clamp(0.0, 1.0) } else { 1.0 };
            let (r, g, b) = ((255.0 * t) as u8, (80.0 + 100.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8, (255.0 * (1.0 - t)) as u8);
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>",
                M + i as f64 * cw,
                H - M - (j + 1) as f64 * ch,
                cw + 0.3,
                ch + 0.3
            );
        }
    }
    for &(x, y) in overlay {
        if (xb.0..=xb.1).contains(&x) && (yb.0..=yb.1).contains(&y) {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"black\"/>",
                map(x, xb, M, W - M),
                map(y, yb, H - M, M)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
