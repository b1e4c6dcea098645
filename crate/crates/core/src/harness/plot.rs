//! Grouped bar chart of a sweep report as standalone SVG.
//!
//! One panel per WSS loss, one bar group per source node and one bar per
//! strategy. Bar height is linear in the normalized mean minimum rate; the
//! right axis labels the same ticks in raw rate units.

use std::fmt::Write as _;
use std::path::Path;

use super::{format_float, format_significant, ExperimentReport};
use crate::allocation::Strategy;
use crate::error::{Error, Result};

const WIDTH: f64 = 960.0;
const PANEL_HEIGHT: f64 = 380.0;
const LEFT: f64 = 100.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const TICKS: usize = 5;
const PALETTE: [&str; 7] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn unique<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// Renders the report as an SVG document.
pub fn render_svg(report: &ExperimentReport) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::InvalidParameter("cannot plot an empty report".into()));
    }
    let losses = unique(report.rows.iter().map(|r| r.wss_loss_db));
    let strategies: Vec<Strategy> = unique(report.rows.iter().map(|r| r.strategy));
    let legend_height = 30.0;
    let height = legend_height + PANEL_HEIGHT * losses.len() as f64;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#);
    for (si, s) in strategies.iter().enumerate() {
        let x = LEFT + si as f64 * 110.0;
        let _ = writeln!(
            w,
            r#"<rect class="legend" x="{x}" y="10" width="12" height="12" fill="{}"/><text x="{}" y="21">{}</text>"#,
            PALETTE[si % PALETTE.len()],
            x + 16.0,
            s
        );
    }

    for (li, &loss) in losses.iter().enumerate() {
        let rows: Vec<_> = report.rows.iter().filter(|r| r.wss_loss_db == loss).collect();
        let sources = unique(rows.iter().map(|r| r.source_node.clone()));
        let reference = report.reference(loss);
        let top = legend_height + li as f64 * PANEL_HEIGHT + TOP;
        let plot_h = PANEL_HEIGHT - TOP - BOTTOM;
        let plot_w = WIDTH - LEFT - RIGHT;
        let base = top + plot_h;

        let max = rows
            .iter()
            .map(|r| r.mean_min_rate_normalized)
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        let y_max = if max > 0.0 { max * 1.1 } else { 1.0 };

        let topology = rows.first().map(|r| r.topology.as_str()).unwrap_or("");
        let _ = writeln!(
            w,
            r#"<g class="panel" data-loss="{}"><text x="{}" y="{}" text-anchor="middle" font-size="14">{}, WSS loss {} dB</text>"#,
            format_float(loss),
            LEFT + plot_w / 2.0,
            top - 12.0,
            escape(topology),
            format_float(loss)
        );
        let _ = writeln!(
            w,
            r#"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/><line x1="{LEFT}" y1="{top}" x2="{LEFT}" y2="{base}" stroke="black"/><line x1="{}" y1="{top}" x2="{}" y2="{base}" stroke="black"/>"#,
            LEFT + plot_w,
            LEFT + plot_w,
            LEFT + plot_w
        );
        for t in 0..=TICKS {
            let v = y_max * t as f64 / TICKS as f64;
            let y = base - plot_h * t as f64 / TICKS as f64;
            let raw = reference.map(|r| format_significant(v * r, 4)).unwrap_or_default();
            let _ = writeln!(
                w,
                r#"<text class="tick-left" x="{}" y="{y:.3}" text-anchor="end">{}</text><text class="tick-right" x="{}" y="{y:.3}">{}</text>"#,
                LEFT - 6.0,
                format_significant(v, 4),
                LEFT + plot_w + 6.0,
                raw
            );
        }
        let mid = top + plot_h / 2.0;
        let _ = writeln!(
            w,
            r#"<text x="20" y="{mid}" transform="rotate(-90 20 {mid})" text-anchor="middle">normalized minimum rate</text><text x="{}" y="{mid}" transform="rotate(90 {} {mid})" text-anchor="middle">minimum rate (arbitrary units)</text>"#,
            WIDTH - 15.0,
            WIDTH - 15.0
        );

        let group_w = plot_w / sources.len().max(1) as f64;
        let bar_w = group_w * 0.8 / strategies.len() as f64;
        for (gi, source) in sources.iter().enumerate() {
            let gx = LEFT + gi as f64 * group_w + group_w * 0.1;
            let _ = writeln!(
                w,
                r#"<text x="{:.3}" y="{}" text-anchor="middle">{}</text>"#,
                gx + group_w * 0.4,
                base + 18.0,
                escape(source)
            );
            for (si, strategy) in strategies.iter().enumerate() {
                let Some(row) = rows
                    .iter()
                    .find(|r| &r.source_node == source && r.strategy == *strategy)
                else {
                    continue;
                };
                let v = row.mean_min_rate_normalized;
                if !v.is_finite() {
                    continue;
                }
                let h = plot_h * v / y_max;
                let _ = writeln!(
                    w,
                    r#"<rect class="bar" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}" data-source="{}" data-strategy="{}" data-value="{}"/>"#,
                    gx + si as f64 * bar_w,
                    base - h,
                    bar_w,
                    h,
                    PALETTE[si % PALETTE.len()],
                    escape(source),
                    strategy,
                    format_float(v)
                );
            }
        }
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle">source node</text></g>"#,
            LEFT + plot_w / 2.0,
            base + 45.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let svg = render_svg(report)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
