//! Hand-written SVG: median NE curves with quartile bands, and critical
//! difference diagrams.

use std::fmt::Write as _;

use crate::experiment::{DatasetNe, RankReport};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Median NE over time per method with a first-to-third quartile band, a
/// black dashed line at the baseline's final NE and a grey dashed line at
/// zero error.
pub fn ne_svg(ne: &DatasetNe, grid: &[f64], time_label: &str) -> String {
    let (w, h) = (760.0, 460.0);
    let (left, right, top, bottom) = (70.0, 240.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let zero_error = -ne.gamma_max / (ne.gamma_init - ne.gamma_max);
    let mut lo = zero_error.min(0.0);
    let mut hi: f64 = 1.0;
    for c in &ne.curves {
        for v in c.q1.iter().chain(&c.q3).chain(&c.median) {
            if v.is_finite() {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let (t0, t1) = (
        grid.first().copied().unwrap_or(0.0),
        grid.last().copied().unwrap_or(1.0),
    );
    let tspan = if t1 > t0 { t1 - t0 } else { 1.0 };
    let x = |t: f64| left + (t - t0) / tspan * pw;
    let y = |v: f64| top + (hi - v) / (hi - lo) * ph;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        escape(&ne.dataset)
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for t in ticks(t0, t1, 5) {
        let xt = x(t);
        writeln!(
            s,
            r#"<line x1="{xt:.2}" y1="{}" x2="{xt:.2}" y2="{}" stroke="black"/>"#,
            top + ph,
            top + ph + 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{xt:.2}" y="{}" text-anchor="middle">{}</text>"#,
            top + ph + 18.0,
            fmt_tick(t)
        )
        .unwrap();
    }
    for v in ticks(lo, hi, 5) {
        let yv = y(v);
        writeln!(
            s,
            r#"<line x1="{}" y1="{yv:.2}" x2="{left}" y2="{yv:.2}" stroke="black"/>"#,
            left - 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 8.0,
            yv + 4.0,
            fmt_tick(v)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 15.0,
        escape(time_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">NE</text>"#,
        top + ph / 2.0
    )
    .unwrap();

    for (i, c) in ne.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut band = String::new();
        for (t, v) in grid.iter().zip(&c.q3) {
            write!(band, "{:.2},{:.2} ", x(*t), y(*v)).unwrap();
        }
        for (t, v) in grid.iter().zip(&c.q1).rev() {
            write!(band, "{:.2},{:.2} ", x(*t), y(*v)).unwrap();
        }
        writeln!(
            s,
            r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        )
        .unwrap();
        let line: Vec<String> = grid
            .iter()
            .zip(&c.median)
            .map(|(t, v)| format!("{:.2},{:.2}", x(*t), y(*v)))
            .collect();
        writeln!(
            s,
            r#"<polyline class="median" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        )
        .unwrap();
        let ly = top + 10.0 + 18.0 * i as f64;
        writeln!(
            s,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            w - right + 15.0,
            w - right + 35.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            w - right + 40.0,
            ly + 4.0,
            escape(&c.method)
        )
        .unwrap();
    }
    if let Some(base) = ne.curves.iter().find(|c| c.method == crate::config::BASELINE) {
        let yb = y(*base.median.last().unwrap_or(&0.0));
        writeln!(s, r#"<line class="baseline-final" x1="{left}" y1="{yb:.2}" x2="{}" y2="{yb:.2}" stroke="black" stroke-dasharray="6 4"/>"#, left + pw).unwrap();
    }
    let yz = y(zero_error);
    writeln!(s, r#"<line class="zero-error" x1="{left}" y1="{yz:.2}" x2="{}" y2="{yz:.2}" stroke="grey" stroke-dasharray="6 4"/>"#, left + pw).unwrap();
    s.push_str("</svg>\n");
    s
}

/// Maximal runs of rank-sorted methods whose average ranks lie within `cd`.
pub fn cd_groups(sorted: &[f64], cd: f64) -> Vec<(usize, usize)> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for i in 0..sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] - sorted[i] < cd {
            j += 1;
        }
        if j > i && groups.last().is_none_or(|&(_, e)| j > e) {
            groups.push((i, j));
        }
    }
    groups
}

/// Critical difference diagram: methods placed on an axis of average rank,
/// with bars joining methods not significantly different.
pub fn cd_svg(report: &RankReport) -> String {
    let k = report.methods.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| report.average[a].total_cmp(&report.average[b]));
    let half = k.div_ceil(2);
    let (w, left, right) = (760.0, 200.0, 200.0);
    let axis_y = 70.0;
    let h = axis_y + 60.0 + 22.0 * half as f64 + 20.0;
    let aw = w - left - right;
    let x = |r: f64| left + (r - 1.0) / ((k.max(2) - 1) as f64) * aw;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(&report.criterion)
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{left}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="black"/>"#,
        left + aw
    )
    .unwrap();
    for r in 1..=k.max(2) {
        let xr = x(r as f64);
        writeln!(
            s,
            r#"<line x1="{xr:.2}" y1="{}" x2="{xr:.2}" y2="{axis_y}" stroke="black"/>"#,
            axis_y - 5.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{xr:.2}" y="{}" text-anchor="middle">{r}</text>"#,
            axis_y - 9.0
        )
        .unwrap();
    }
    if let Some(cd) = report.cd {
        let (x0, x1) = (x(1.0), x(1.0 + cd));
        writeln!(
            s,
            r#"<line class="cd" x1="{x0:.2}" y1="36" x2="{x1:.2}" y2="36" stroke="black" stroke-width="2"/>"#
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="32" text-anchor="middle">CD = {:.3}</text>"#,
            (x0 + x1) / 2.0,
            cd
        )
        .unwrap();
    }
    for (pos, &m) in order.iter().enumerate() {
        let xr = x(report.average[m]);
        let (row, on_left) = if pos < half { (pos, true) } else { (k - 1 - pos, false) };
        let ly = axis_y + 40.0 + 22.0 * row as f64;
        let (lx, anchor) = if on_left {
            (left - 10.0, "end")
        } else {
            (left + aw + 10.0, "start")
        };
        writeln!(
            s,
            r#"<polyline points="{xr:.2},{axis_y} {xr:.2},{ly:.2} {:.2},{ly:.2}" fill="none" stroke="black"/>"#,
            if on_left { lx + 5.0 } else { lx - 5.0 }
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{lx:.2}" y="{:.2}" text-anchor="{anchor}">{} ({:.2})</text>"#,
            ly + 4.0,
            escape(&report.methods[m]),
            report.average[m]
        )
        .unwrap();
    }
    if let Some(cd) = report.cd {
        let sorted: Vec<f64> = order.iter().map(|&m| report.average[m]).collect();
        for (g, (a, b)) in cd_groups(&sorted, cd).into_iter().enumerate() {
            let gy = axis_y + 10.0 + 6.0 * g as f64;
            writeln!(
                s,
                r#"<line class="group" x1="{:.2}" y1="{gy}" x2="{:.2}" y2="{gy}" stroke="black" stroke-width="4"/>"#,
                x(sorted[a]) - 3.0,
                x(sorted[b]) + 3.0
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
