use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Groups of methods whose average ranks all lie within `cd` of each other.
///
/// Methods are sorted by rank; a group is a maximal contiguous window of that
/// order whose rank range is at most `cd`. Windows contained in another
/// window are dropped, as are singletons. Each group lists method positions
/// from the input, best rank first.
pub fn cliques(ranks: &[f64], cd: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..ranks.len()).collect();
    order.sort_by(|&a, &b| ranks[a].total_cmp(&ranks[b]).then(a.cmp(&b)));
    let mut windows: Vec<(usize, usize)> = Vec::new();
    let mut end = 0;
    for start in 0..order.len() {
        end = end.max(start);
        while end + 1 < order.len() && ranks[order[end + 1]] - ranks[order[start]] <= cd {
            end += 1;
        }
        // The window from `start` is maximal unless the previous one already
        // reaches as far.
        if end > start && windows.last().is_none_or(|&(_, e)| e < end) {
            windows.push((start, end));
        }
    }
    windows.into_iter().map(|(s, e)| order[s..=e].to_vec()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdDiagram {
    pub svg: String,
    pub text: String,
    pub cliques: Vec<Vec<String>>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 150.0;
const AXIS_Y: f64 = 70.0;
const ROW: f64 = 18.0;

/// Critical-difference diagram as SVG plus a plain-text rendering.
/// Lower average rank is better and sits at the left end of the axis.
pub fn emit_cd_diagram(names: &[String], average_ranks: &[f64], cd: f64) -> Result<CdDiagram> {
    let k = names.len();
    if k < 2 || average_ranks.len() != k {
        return Err(contract("a CD diagram needs at least 2 methods and one rank per method"));
    }
    if !(cd.is_finite() && cd >= 0.0) {
        return Err(contract("critical difference must be finite and non-negative"));
    }
    let kf = k as f64;
    if average_ranks
        .iter()
        .any(|r| !r.is_finite() || *r < 1.0 - 1e-9 || *r > kf + 1e-9)
    {
        return Err(contract(format!("average ranks must lie in [1, {k}]")));
    }

    let groups = cliques(average_ranks, cd);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| average_ranks[a].total_cmp(&average_ranks[b]).then(a.cmp(&b)));

    let span = WIDTH - 2.0 * MARGIN;
    let x = |r: f64| MARGIN + (r - 1.0) / (kf - 1.0) * span;
    let left = k.div_ceil(2);
    let label_rows = left.max(k - left) as f64;
    let clique_top = AXIS_Y + 14.0;
    let labels_top = clique_top + groups.len() as f64 * 8.0 + 16.0;
    let height = labels_top + label_rows * ROW + 10.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // CD bar above the axis, anchored at rank 1.
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="20" x2="{:.2}" y2="20" stroke="black" stroke-width="2"/>"#,
        x(1.0),
        x(1.0) + cd / (kf - 1.0) * span
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="14" text-anchor="start">CD = {cd:.4}</text>"#,
        x(1.0)
    );

    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{AXIS_Y}" x2="{:.2}" y2="{AXIS_Y}" stroke="black"/>"#,
        x(1.0),
        x(kf)
    );
    for t in 1..=k {
        let tx = x(t as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{tx:.2}" y1="{}" x2="{tx:.2}" y2="{AXIS_Y}" stroke="black"/>"#,
            AXIS_Y - 6.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.2}" y="{}" text-anchor="middle">{t}</text>"#,
            AXIS_Y - 10.0
        );
    }

    for (g, group) in groups.iter().enumerate() {
        let lo = group.iter().map(|&m| average_ranks[m]).fold(f64::INFINITY, f64::min);
        let hi = group.iter().map(|&m| average_ranks[m]).fold(f64::NEG_INFINITY, f64::max);
        let y = clique_top + g as f64 * 8.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="3"/>"#,
            x(lo) - 3.0,
            x(hi) + 3.0
        );
    }

    for (pos, &m) in order.iter().enumerate() {
        let r = average_ranks[m];
        let mx = x(r);
        let (row, on_left) = if pos < left { (pos, true) } else { (k - 1 - pos, false) };
        let y = labels_top + row as f64 * ROW;
        let end_x = if on_left { MARGIN - 10.0 } else { WIDTH - MARGIN + 10.0 };
        let _ = writeln!(
            svg,
            r#"<polyline points="{mx:.2},{AXIS_Y} {mx:.2},{y:.2} {end_x:.2},{y:.2}" fill="none" stroke="black"/>"#
        );
        let (tx, anchor) = if on_left { (end_x - 4.0, "end") } else { (end_x + 4.0, "start") };
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.2}" y="{:.2}" text-anchor="{anchor}">{} ({r:.2})</text>"#,
            y + 4.0,
            escape(&names[m])
        );
    }
    svg.push_str("</svg>\n");

    let mut text = String::new();
    let _ = writeln!(text, "CD = {cd:.4}");
    let width = names.iter().map(|n| n.chars().count()).max().unwrap_or(0);
    for &m in &order {
        let _ = writeln!(text, "  {:>7.4}  {:<width$}", average_ranks[m], names[m]);
    }
    let named: Vec<Vec<String>> = groups
        .iter()
        .map(|g| g.iter().map(|&m| names[m].clone()).collect())
        .collect();
    if named.is_empty() {
        let _ = writeln!(text, "no groups within CD");
    }
    for g in &named {
        let _ = writeln!(text, "  [{}]", g.join(", "));
    }

    Ok(CdDiagram {
        svg,
        text,
        cliques: named,
    })
}
