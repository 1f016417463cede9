//! Box-and-whisker plot written as plain SVG.

use std::fmt::Write as _;

use crate::ingest::quantile_sorted;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

struct BoxStats {
    q1: f64,
    median: f64,
    q3: f64,
    lo_whisker: f64,
    hi_whisker: f64,
    outliers: Vec<f64>,
}

/// Quartiles by linear interpolation; whiskers reach the most extreme
/// values within 1.5·IQR of the box, anything beyond is drawn as a dot.
fn box_stats(values: &[f64]) -> BoxStats {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&v, 0.25);
    let q3 = quantile_sorted(&v, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
    BoxStats {
        q1,
        median: quantile_sorted(&v, 0.5),
        q3,
        lo_whisker: inside.first().copied().unwrap_or(q1),
        hi_whisker: inside.last().copied().unwrap_or(q3),
        outliers: v.iter().copied().filter(|x| *x < lo || *x > hi).collect(),
    }
}

/// One box per group, left to right in the given order.
pub fn boxplot_svg(names: &[&str], groups: &[Vec<f64>], title: &str) -> String {
    let all = groups.iter().flatten().copied();
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !(lo < hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_h = H - TOP - BOTTOM;
    let y = |v: f64| TOP + (hi - v) / (hi - lo) * plot_h;
    let slot = (W - LEFT - RIGHT) / groups.len().max(1) as f64;
    let bw = slot * 0.5;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        H - BOTTOM
    );
    for i in 0..=5 {
        let v = lo + (hi - lo) * i as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(s, r#"<line x1="{}" y1="{yy:.2}" x2="{LEFT}" y2="{yy:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, LEFT - 8.0, yy + 4.0);
    }
    for (i, (name, g)) in names.iter().zip(groups).enumerate() {
        let b = box_stats(g);
        let cx = LEFT + slot * (i as f64 + 0.5);
        let (x0, x1) = (cx - bw / 2.0, cx + bw / 2.0);
        let _ = writeln!(s, r#"<g class="group" data-name="{name}">"#);
        let _ = writeln!(s, r#"<line class="whisker" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#, y(b.hi_whisker), y(b.q3));
        let _ = writeln!(s, r#"<line class="whisker" x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#, y(b.q1), y(b.lo_whisker));
        for w in [b.lo_whisker, b.hi_whisker] {
            let _ = writeln!(s, r#"<line class="cap" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#, cx - bw / 4.0, y(w), cx + bw / 4.0, y(w));
        }
        let _ = writeln!(
            s,
            r##"<rect class="box" x="{x0:.2}" y="{:.2}" width="{bw:.2}" height="{:.2}" fill="#9ecae1" stroke="black"/>"##,
            y(b.q3),
            (y(b.q1) - y(b.q3)).max(0.5)
        );
        let _ = writeln!(s, r#"<line class="median" x1="{x0:.2}" y1="{:.2}" x2="{x1:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#, y(b.median), y(b.median));
        for o in &b.outliers {
            let _ = writeln!(s, r#"<circle class="outlier" cx="{cx:.2}" cy="{:.2}" r="3" fill="none" stroke="black"/>"#, y(*o));
        }
        let _ = writeln!(s, r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{name}</text>"#, H - BOTTOM + 20.0);
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
