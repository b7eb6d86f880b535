//! Standalone SVG renderings of runs.

use std::fmt::Write as _;

use robowet_core::scenario::Scenario;
use robowet_core::sim::SimTrace;
use robowet_core::{Plan, Position2D};

const SIZE: f64 = 600.0;
const PAD: f64 = 30.0;

struct Frame {
    min: Position2D,
    scale: f64,
}

impl Frame {
    fn new(scenario: &Scenario) -> Self {
        let a = &scenario.arena;
        let span = a.width().max(a.height()).max(1e-9);
        Self {
            min: a.min,
            scale: (SIZE - 2.0 * PAD) / span,
        }
    }

    fn x(&self, p: Position2D) -> f64 {
        PAD + (p.x - self.min.x) * self.scale
    }

    // svg y grows downward
    fn y(&self, p: Position2D) -> f64 {
        SIZE - PAD - (p.y - self.min.y) * self.scale
    }
}

/// Arena, harvesters, selected anchors and every agent's path.
pub fn trajectory_svg(scenario: &Scenario, plan: &Plan, trace: &SimTrace) -> String {
    let f = Frame::new(scenario);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let (lo, hi) = (scenario.arena.min, scenario.arena.max);
    let _ = writeln!(
        s,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#888"/>"##,
        f.x(lo),
        f.y(hi),
        f.x(hi) - f.x(lo),
        f.y(lo) - f.y(hi)
    );
    let agents = trace.kinds.len();
    for i in (0..agents).rev() {
        let mut pts = String::new();
        for sample in trace.samples.iter().step_by(4) {
            let p = sample.agents[i].0;
            let _ = write!(pts, "{:.1},{:.1} ", f.x(p), f.y(p));
        }
        let (color, width) = if i == 0 { ("#c0392b", 2.0) } else { ("#bbbbbb", 1.0) };
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#, pts.trim_end());
    }
    for eh in &scenario.ehs {
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#2c7a3f"/>"##, f.x(eh.position), f.y(eh.position));
    }
    for m in plan.selected() {
        let p = plan.anchors[m].position;
        let _ = writeln!(s, r##"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="none" stroke="#1f4e9c" stroke-width="2"/>"##, f.x(p) - 5.0, f.y(p) - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10">{m}</text>"#, f.x(p) + 7.0, f.y(p) - 7.0);
    }
    let title = match trace.completion_s {
        Some(c) => format!("{}: completion {c:.1} s", scenario.name),
        None => format!("{}: did not finish", scenario.name),
    };
    let _ = writeln!(s, r#"<text x="{PAD}" y="18" font-family="sans-serif" font-size="13">{}</text>"#, escape(&title));
    s.push_str("</svg>\n");
    s
}

/// Simulated completion per HIL round as a line chart.
pub fn rounds_svg(title: &str, completions: &[Option<f64>]) -> String {
    let (w, h) = (480.0, 300.0);
    let (left, bottom, top, right) = (60.0, 40.0, 30.0, 20.0);
    let max = completions.iter().flatten().fold(0.0, |a: f64, &b| a.max(b)).max(1.0);
    let n = completions.len().max(2) - 1;
    let px = |i: usize| left + (w - left - right) * i as f64 / n as f64;
    let py = |v: f64| h - bottom - (h - bottom - top) * v / max;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, h - bottom);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - bottom, w - right, h - bottom);
    let mut pts = String::new();
    for (i, c) in completions.iter().enumerate() {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">round {i}</text>"#, px(i), h - bottom + 15.0);
        if let Some(v) = c {
            let _ = write!(pts, "{:.1},{:.1} ", px(i), py(*v));
            let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#1f4e9c"/>"##, px(i), py(*v));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{v:.1}</text>"#, px(i), py(*v) - 6.0);
        }
    }
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f4e9c"/>"##, pts.trim_end());
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
