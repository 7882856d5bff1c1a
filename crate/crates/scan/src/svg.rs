//! Minimal SVG renderings. Data files are the contract; plots are a
//! convenience and carry no information beyond the CSVs.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        W / 2.0,
        escape(title),
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN,
        W / 2.0,
        H - 16.0,
        escape(xlabel),
        H / 2.0,
        H / 2.0,
        escape(ylabel),
    );
    let _ = writeln!(
        out,
        "<text x=\"{MARGIN}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\n\
         <text x=\"{}\" y=\"{MARGIN}\" text-anchor=\"end\">{:.3}</text>",
        H - MARGIN + 16.0,
        x.0,
        W - MARGIN,
        H - MARGIN + 16.0,
        x.1,
        MARGIN - 4.0,
        H - MARGIN,
        y.0,
        MARGIN - 4.0,
        y.1,
    );
}

fn map(v: f64, (lo, hi): (f64, f64), a: f64, b: f64) -> f64 {
    a + (v - lo) / (hi - lo) * (b - a)
}

/// Named series of (x, y) points.
pub type Series = (String, Vec<(f64, f64)>);

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let xr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, xr, yr);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| {
                format!(
                    "{:.2},{:.2}",
                    map(x, xr, MARGIN, W - MARGIN),
                    map(y, yr, H - MARGIN, MARGIN)
                )
            })
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
             <text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>",
            path.join(" "),
            W - MARGIN + 4.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            escape(name),
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Colour map of `values[i][j]` over `xs[i]` × `ys[j]` (grayscale, dark = low).
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>]) -> String {
    let xr = range(xs.iter().copied());
    let yr = range(ys.iter().copied());
    let vr = range(values.iter().flatten().copied());
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, xr, yr);
    let cw = (W - 2.0 * MARGIN) / xs.len().max(1) as f64;
    let ch = (H - 2.0 * MARGIN) / ys.len().max(1) as f64;
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let level = (map(v, vr, 0.0, 255.0).clamp(0.0, 255.0)) as u8;
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({level},{level},{level})\"/>",
                MARGIN + i as f64 * cw,
                H - MARGIN - (j as f64 + 1.0) * ch,
                cw + 0.05,
                ch + 0.05,
            );
        }
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">range [{:.4}, {:.4}]</text>",
        W - MARGIN,
        MARGIN - 6.0,
        vr.0,
        vr.1
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let s = line_plot(
            "t<1>",
            "x",
            "y",
            &[("a".into(), vec![(0.0, 1.0), (1.0, 0.0), (2.0, f64::NAN)])],
        );
        assert!(s.starts_with("<svg"));
        assert!(s.ends_with("</svg>\n"));
        assert!(s.contains("t&lt;1&gt;"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }

    #[test]
    fn heatmap_has_one_cell_per_value() {
        let v = vec![vec![0.0, 1.0, 2.0], vec![3.0, 4.0, 5.0]];
        let s = heatmap("h", "x", "y", &[0.0, 1.0], &[0.0, 1.0, 2.0], &v);
        assert_eq!(s.matches("fill=\"rgb(").count(), 6);
        assert!(s.contains("rgb(0,0,0)"));
        assert!(s.contains("rgb(255,255,255)"));
    }
}
