//! The baseline ladder: fixed transmitter, visit-all, joint, joint + HIL.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hil::hil_iterate;
use crate::pipeline::{build_problem, scenario_anchors, straight_line_distances};
use crate::planner::{fixed_transmitter_check, harvest_table, Plan};
use crate::scenario::{Scenario, FORMAT_VERSION};
use crate::sim::{run_mission, SimTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FixedTransmitter,
    VisitAll,
    Joint,
    JointHil,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::FixedTransmitter, Scheme::VisitAll, Scheme::Joint, Scheme::JointHil];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::FixedTransmitter => "fixed transmitter",
            Scheme::VisitAll => "visit-all",
            Scheme::Joint => "joint",
            Scheme::JointHil => "joint+HIL",
        }
    }
}

/// Means over seeds for one scheme. Time fields are absent when infeasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub scheme: Scheme,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub completion_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub motion_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub charging_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energy_j: Option<f64>,
    pub collisions: usize,
    /// Runs that did not finish.
    pub dnf: usize,
    #[serde(default)]
    pub note: String,
}

/// A row computed from given time and power only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub label: String,
    pub time_s: f64,
    pub power_w: f64,
    pub energy_j: f64,
}

impl ReferenceRow {
    pub fn new(label: &str, time_s: f64, power_w: f64) -> Self {
        Self {
            label: label.into(),
            time_s,
            power_w,
            energy_j: time_s * power_w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub format_version: u32,
    pub scenario: String,
    pub seeds: Vec<u64>,
    pub motion_power_w: f64,
    pub rows: Vec<SchemeRow>,
    #[serde(default)]
    pub references: Vec<ReferenceRow>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn infeasible_row(scheme: Scheme, note: String) -> SchemeRow {
    SchemeRow {
        scheme,
        feasible: false,
        completion_s: None,
        motion_s: None,
        charging_s: None,
        energy_j: None,
        collisions: 0,
        dnf: 0,
        note,
    }
}

/// Row from per-seed (plan, trace) pairs. Motion is everything that is not dwell.
fn sim_row(scheme: Scheme, runs: &[(Plan, SimTrace)], power_w: f64) -> SchemeRow {
    let finished: Vec<(f64, f64)> = runs
        .iter()
        .filter_map(|(p, t)| t.completion_s.map(|c| (c, p.charging_s)))
        .collect();
    let collisions = runs.iter().map(|(_, t)| t.robot_collisions()).sum();
    let dnf = runs.len() - finished.len();
    if finished.is_empty() {
        let mut row = infeasible_row(scheme, "no run finished".into());
        row.feasible = true;
        row.collisions = collisions;
        row.dnf = dnf;
        return row;
    }
    let completion = mean(&finished.iter().map(|f| f.0).collect::<Vec<_>>());
    let charging = mean(&finished.iter().map(|f| f.1).collect::<Vec<_>>());
    SchemeRow {
        scheme,
        feasible: true,
        completion_s: Some(completion),
        motion_s: Some(completion - charging),
        charging_s: Some(charging),
        energy_j: Some(completion * power_w),
        collisions,
        dnf,
        note: String::new(),
    }
}

fn fixed_row(scenario: &Scenario, power_w: f64) -> SchemeRow {
    let scheme = Scheme::FixedTransmitter;
    let tx = scenario.robot.start;
    let check = fixed_transmitter_check(tx, &scenario.ehs, &scenario.codebook, &scenario.channel, &scenario.harvest);
    if !check.feasible {
        let list: Vec<String> = check.flagged.iter().map(usize::to_string).collect();
        return infeasible_row(scheme, format!("below sensitivity: ehs {}", list.join(",")));
    }
    let table = harvest_table(&[tx], &scenario.codebook, &scenario.ehs, &scenario.channel, &scenario.harvest);
    match table.allocate(&[true], &scenario.ehs) {
        Ok(s) => {
            let t = s.total();
            SchemeRow {
                scheme,
                feasible: true,
                completion_s: Some(t),
                motion_s: Some(0.0),
                charging_s: Some(t),
                energy_j: Some(t * power_w),
                collisions: 0,
                dnf: 0,
                note: String::new(),
            }
        }
        Err(e) => infeasible_row(scheme, e.to_string()),
    }
}

/// Runs the four schemes over `seeds`.
///
/// Seeds run in parallel on the current rayon pool; results are merged in
/// seed order. `hil_rounds` bounds the joint+HIL loop.
pub fn run_comparison(scenario: &Scenario, seeds: &[u64], hil_rounds: usize) -> Result<ComparisonReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("at least one seed required".into()));
    }
    scenario.validate()?;
    let power = scenario.robot.motion_power_w;
    let mut rows = vec![fixed_row(scenario, power)];

    let planned = scenario_anchors(scenario).and_then(|a| {
        let d = straight_line_distances(&a);
        build_problem(scenario, a, d)
    });
    let problem = match planned {
        Ok(p) => p,
        Err(e) => {
            for s in [Scheme::VisitAll, Scheme::Joint, Scheme::JointHil] {
                rows.push(infeasible_row(s, e.to_string()));
            }
            return Ok(report(scenario, seeds, power, rows));
        }
    };
    let simulate = |plan: &Plan| -> Result<Vec<(Plan, SimTrace)>> {
        seeds
            .par_iter()
            .map(|&s| run_mission(plan, scenario, s, scenario.sim.dt).map(|t| (plan.clone(), t)))
            .collect()
    };
    match problem.visit_all_baseline() {
        Ok(plan) => rows.push(sim_row(Scheme::VisitAll, &simulate(&plan)?, power)),
        Err(e) => rows.push(infeasible_row(Scheme::VisitAll, e.to_string())),
    }
    // the search is seeded too; each seed plans and runs on its own
    let joint: Vec<Result<(Plan, SimTrace)>> = seeds
        .par_iter()
        .map(|&s| {
            let plan = problem.joint_optimize(&scenario.planner.budget(s))?.plan;
            let trace = run_mission(&plan, scenario, s, scenario.sim.dt)?;
            Ok((plan, trace))
        })
        .collect();
    match joint.into_iter().collect::<Result<Vec<_>>>() {
        Ok(runs) => rows.push(sim_row(Scheme::Joint, &runs, power)),
        Err(e) => rows.push(infeasible_row(Scheme::Joint, e.to_string())),
    }
    let hil: Vec<Result<(Plan, SimTrace)>> = seeds
        .par_iter()
        .map(|&s| {
            let h = hil_iterate(scenario, hil_rounds, scenario.hil.improve_tol, s)?;
            match (h.rounds.into_iter().last(), h.aborted) {
                (Some(r), _) => Ok((r.plan, r.trace)),
                (None, Some(e)) => Err(e),
                (None, None) => Err(Error::InvalidInput("no rounds ran".into())),
            }
        })
        .collect();
    match hil.into_iter().collect::<Result<Vec<_>>>() {
        Ok(runs) => rows.push(sim_row(Scheme::JointHil, &runs, power)),
        Err(e) => rows.push(infeasible_row(Scheme::JointHil, e.to_string())),
    }
    Ok(report(scenario, seeds, power, rows))
}

fn report(scenario: &Scenario, seeds: &[u64], power: f64, rows: Vec<SchemeRow>) -> ComparisonReport {
    ComparisonReport {
        format_version: FORMAT_VERSION,
        scenario: scenario.name.clone(),
        seeds: seeds.to_vec(),
        motion_power_w: power,
        rows,
        references: Vec::new(),
    }
}

impl ComparisonReport {
    pub fn to_toml_string(&self) -> Result<String> {
        crate::scenario::to_toml(self)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        crate::scenario::parse_toml(s)
    }

    /// Fixed-width text table; energies with no decimals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<20} {:>13} {:>10} {:>11} {:>10} {:>10} {:>4}",
            "scheme", "completion_s", "motion_s", "charging_s", "energy_j", "collisions", "dnf"
        );
        for r in &self.rows {
            match r.completion_s {
                Some(c) => {
                    let _ = writeln!(
                        out,
                        "{:<20} {:>13.1} {:>10.1} {:>11.1} {:>10.0} {:>10} {:>4}",
                        r.scheme.label(),
                        c,
                        r.motion_s.unwrap_or(0.0),
                        r.charging_s.unwrap_or(0.0),
                        r.energy_j.unwrap_or(0.0),
                        r.collisions,
                        r.dnf
                    );
                }
                None => {
                    let what = if r.feasible { "dnf" } else { "infeasible" };
                    let _ = writeln!(out, "{:<20} {:>13} {:>10} {:>11} {:>10} {:>10} {:>4}", r.scheme.label(), what, "-", "-", "-", r.collisions, r.dnf);
                }
            }
        }
        for r in &self.references {
            let _ = writeln!(
                out,
                "{:<20} {:>13} {:>10} {:>11} {:>10.0} {:>10} {:>4}",
                r.label,
                format!("{}", r.time_s),
                "-",
                "-",
                r.energy_j,
                "-",
                "-"
            );
        }
        out
    }

    /// Bar chart of mean completion per scheme as a standalone SVG document.
    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 360.0);
        let (left, bottom, top) = (70.0, 60.0, 30.0);
        let bars: Vec<(&str, Option<f64>)> = self
            .rows
            .iter()
            .map(|r| (r.scheme.label(), r.completion_s))
            .chain(self.references.iter().map(|r| (r.label.as_str(), Some(r.time_s))))
            .collect();
        let max = bars.iter().filter_map(|b| b.1).fold(0.0, f64::max).max(1.0);
        let plot_h = h - bottom - top;
        let slot = (w - left - 20.0) / bars.len().max(1) as f64;
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="18" font-family="sans-serif" font-size="14" text-anchor="middle">Mission completion time (s)</text>"#, w / 2.0);
        let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#, h - bottom);
        let _ = writeln!(s, r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, h - bottom, w - 20.0, h - bottom);
        for i in 0..=4 {
            let v = max * i as f64 / 4.0;
            let y = h - bottom - plot_h * i as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{:.0}</text>"#, left - 6.0, y + 3.0, v);
        }
        for (i, (label, v)) in bars.iter().enumerate() {
            let x = left + slot * i as f64 + slot * 0.15;
            let bw = slot * 0.7;
            let cx = x + bw / 2.0;
            match v {
                Some(v) => {
                    let bh = plot_h * v / max;
                    let _ = writeln!(s, r##"<rect x="{x:.1}" y="{:.1}" width="{bw:.1}" height="{bh:.1}" fill="#4a7ab5"/>"##, h - bottom - bh);
                    let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{v:.1}</text>"#, h - bottom - bh - 4.0);
                }
                None => {
                    let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">infeasible</text>"#, h - bottom - 4.0);
                }
            }
            let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#, h - bottom + 16.0, label.replace('&', "&amp;").replace('<', "&lt;"));
        }
        s.push_str("</svg>\n");
        s
    }
}
