//! Trace and SVG writers.

use std::fmt::Write as _;

use crate::arena::{EdgeId, TrackMap};
use crate::geom::Point2;

use super::TraceReport;

/// Serializes a report. Header lines are `# key=value`, followed by one
/// `tick,cart,x,y,heading,phase,event` row per cart per tick (several events
/// in one tick are joined with `;`), then a `# messages` section of link
/// rows `tick,sender,kind,seq,delivered|dropped`.
pub fn write_trace(report: &TraceReport) -> String {
    let mut out = String::new();
    for (k, v) in &report.header {
        let _ = writeln!(out, "# {k}={v}");
    }
    for (i, c) in report.carts.iter().enumerate() {
        let _ = writeln!(out, "# cart{}.outcome={}", i + 1, c.outcome.key());
    }
    let _ = writeln!(out, "# ticks={}", report.ticks_run);
    let _ = writeln!(out, "# max_line_deviation={:.6}", report.max_line_deviation);
    out.push_str("tick,cart,x,y,heading,phase,event\n");
    let mut ev = report.events.iter().peekable();
    for s in &report.samples {
        let mut text = Vec::new();
        while let Some(e) = ev.next_if(|e| (e.tick, e.cart) == (s.tick, s.cart)) {
            text.push(e.event.to_string());
        }
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{},{}",
            s.tick,
            s.cart,
            s.pose.x,
            s.pose.y,
            s.pose.heading,
            s.phase,
            text.join(";").replace(',', " ")
        );
    }
    out.push_str("# messages\n");
    for m in &report.messages {
        let _ = writeln!(out, "{m}");
    }
    out
}

const SCALE: f64 = 200.0;
const MARGIN: f64 = 40.0;
const CART_COLOURS: [&str; 2] = ["#1f77b4", "#d62728"];

/// Map and trajectories as a standalone SVG document.
pub fn render_svg(map: &TrackMap, report: Option<&TraceReport>) -> String {
    let pts = map.nodes.iter().map(|n| n.position);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let w = (x1 - x0) * SCALE + 2.0 * MARGIN;
    let h = (y1 - y0) * SCALE + 2.0 * MARGIN;
    let tx = |p: Point2| ((p.x - x0) * SCALE + MARGIN, (y1 - p.y) * SCALE + MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#f4f4f0"/>"##);
    for i in 0..map.edges.len() {
        let (a, b) = map.segment(EdgeId(i));
        let ((ax, ay), (bx, by)) = (tx(a), tx(b));
        let _ = writeln!(
            out,
            r##"<line x1="{ax:.1}" y1="{ay:.1}" x2="{bx:.1}" y2="{by:.1}" stroke="#333" stroke-width="4"/>"##
        );
    }
    let (px, py) = tx(map.position(map.pharmacy));
    let _ = writeln!(
        out,
        r##"<circle cx="{px:.1}" cy="{py:.1}" r="{:.1}" fill="none" stroke="#2ca02c" stroke-width="2"/>"##,
        map.corridor_width / 2.0 * SCALE
    );
    for e in map.placard_entries() {
        let (cx, cy) = tx(e.position);
        let _ = writeln!(
            out,
            r##"<text x="{cx:.1}" y="{cy:.1}" font-size="10" text-anchor="middle" dominant-baseline="middle" fill="#555">{}</text>"##,
            e.digit
        );
    }
    for w in &map.wards {
        let (cx, cy) = tx(map.position(w.node));
        let _ = writeln!(
            out,
            r##"<text x="{cx:.1}" y="{:.1}" font-size="12" text-anchor="middle" fill="#000">W{}</text>"##,
            cy - 8.0,
            w.id
        );
    }
    if let Some(r) = report {
        for (i, colour) in (1..=r.carts.len()).zip(CART_COLOURS) {
            let pts: Vec<String> = r
                .samples
                .iter()
                .filter(|s| s.cart == i)
                .map(|s| {
                    let (x, y) = tx(s.pose.position());
                    format!("{x:.1},{y:.1}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5" opacity="0.8"/>"#,
                pts.join(" ")
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::default_map;
    use crate::sim::{run_scenario, SimConfig};

    #[test]
    fn trace_layout() {
        let c = SimConfig { max_ticks: 40, ..SimConfig::single(1) };
        let r = run_scenario(&default_map(), &c).unwrap();
        let t = write_trace(&r);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "# generator=chacha8");
        let cols = lines.iter().position(|l| *l == "tick,cart,x,y,heading,phase,event").unwrap();
        assert!(lines[..cols].iter().all(|l| l.starts_with("# ")));
        assert!(lines.contains(&"# cart1.outcome=incomplete"));
        let rows = &lines[cols + 1..];
        assert_eq!(rows.len(), 40 + 1);
        assert_eq!(rows[0], "0,1,0.000000,0.000000,0.000000,await_target,");
        assert!(rows.iter().any(|r| r.ends_with("await_load,target=1;phase=await_load")));
        assert_eq!(*rows.last().unwrap(), "# messages");
        for r in &rows[..40] {
            assert_eq!(r.split(',').count(), 7, "{r}");
        }
    }

    #[test]
    fn svg_has_map_and_path() {
        let map = default_map();
        let plain = render_svg(&map, None);
        assert!(plain.starts_with("<svg"));
        assert!(plain.trim_end().ends_with("</svg>"));
        assert_eq!(plain.matches("<line").count(), map.edges.len());
        let c = SimConfig { max_ticks: 120, ..SimConfig::single(1) };
        let r = run_scenario(&map, &c).unwrap();
        assert!(render_svg(&map, Some(&r)).contains("<polyline"));
    }
}
