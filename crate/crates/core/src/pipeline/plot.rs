use std::fmt::Write as _;

use super::fit::RateFit;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom

/// Standalone SVG of a loss curve: observed points with one-standard-deviation
/// bars, the fitted model, and an optional bound overlay, on log-log axes.
pub fn loss_curve_svg(
    title: &str,
    points: &[(f64, f64, f64)],
    fit: Option<&RateFit>,
    bound: Option<&[(f64, f64)]>,
) -> String {
    let positive = |v: f64| v > 0.0 && v.is_finite();
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).filter(|&x| positive(x)).collect();
    let mut ys: Vec<f64> = points
        .iter()
        .flat_map(|p| [p.1 - p.2, p.1 + p.2, p.1])
        .filter(|&y| positive(y))
        .collect();
    if let Some(b) = bound {
        ys.extend(b.iter().map(|p| p.1).filter(|&y| positive(y)));
        xs.extend(b.iter().map(|p| p.0).filter(|&x| positive(x)));
    }
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi <= lo {
            (lo.log10() - 0.5, lo.log10() + 0.5)
        } else {
            let pad = 0.05 * (hi.log10() - lo.log10());
            (lo.log10() - pad, hi.log10() + pad)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let (l, r, t, b) = MARGIN;
    let px = |x: f64| l + (x.log10() - x0) / (x1 - x0) * (W - l - r);
    let py = |y: f64| H - b - (y.max(10f64.powf(y0)).log10() - y0) / (y1 - y0) * (H - t - b);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - l - r,
        H - t - b
    );
    for k in x0.ceil() as i32..=x1.floor() as i32 {
        let x = px(10f64.powi(k));
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{k}</text>"#, H - b + 16.0);
    }
    for k in y0.ceil() as i32..=y1.floor() as i32 {
        let y = py(10f64.powi(k));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">1e{k}</text>"#, l - 6.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#, W / 2.0, H - 10.0);
    let _ = writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">loss</text>"#, H / 2.0, H / 2.0);

    if let Some(f) = fit {
        let path = polyline((0..=100).map(|i| 10f64.powf(x0 + (x1 - x0) * i as f64 / 100.0)).map(|x| (x, f.predict(x))), &px, &py);
        let _ = writeln!(s, r#"<polyline points="{path}" fill="none" stroke="steelblue" stroke-width="2"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="steelblue">fit: {:.4} + {:.4} n^-{:.3}</text>"#,
            W - r - 230.0,
            t + 18.0,
            f.a0,
            f.a1,
            f.c
        );
    }
    if let Some(bd) = bound {
        let path = polyline(bd.iter().copied(), &px, &py);
        let _ = writeln!(s, r#"<polyline points="{path}" fill="none" stroke="firebrick" stroke-dasharray="6 4"/>"#);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" fill="firebrick">bound</text>"#, W - r - 230.0, t + 34.0);
    }
    for &(x, y, sd) in points.iter().filter(|p| positive(p.0) && positive(p.1)) {
        let (cx, cy) = (px(x), py(y));
        if sd > 0.0 {
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="gray"/>"#,
                py((y - sd).max(1e-300)),
                py(y + sd)
            );
        }
        let _ = writeln!(s, r#"<circle cx="{cx:.1}" cy="{cy:.1}" r="3.5" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

fn polyline(pts: impl Iterator<Item = (f64, f64)>, px: &impl Fn(f64) -> f64, py: &impl Fn(f64) -> f64) -> String {
    pts.filter(|p| p.0 > 0.0 && p.1 > 0.0 && p.1.is_finite())
        .map(|(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_layers() {
        let pts = [(100.0, 0.5, 0.05), (200.0, 0.35, 0.0), (400.0, 0.25, 0.02)];
        let fit = RateFit { a0: 0.0, a1: 5.0, c: 0.5, sse: 0.0, free: true };
        let bound = [(100.0, 2.0), (400.0, 1.0)];
        let svg = loss_curve_svg("torus <H1>", &pts, Some(&fit), Some(&bound));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("torus &lt;H1&gt;"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        let bare = loss_curve_svg("", &[(10.0, 0.0, 0.0)], None, None);
        assert!(!bare.contains("NaN"));
    }
}
