//! Simulation records and their export.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::world::{AgentKind, WorldState};
use crate::error::{Error, Result};
use crate::models::{Position2D, Vec2};

/// One time-stamped snapshot: (position, heading, velocity) per agent and energy per harvester.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub agents: Vec<(Position2D, f64, Vec2)>,
    pub harvested_j: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub time: f64,
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

/// One ring edge as driven: leaving anchor `from` after its last dwell, reaching `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTraversal {
    pub from: usize,
    pub to: usize,
    pub depart_s: f64,
    pub arrive_s: f64,
}

impl EdgeTraversal {
    pub fn duration_s(&self) -> f64 {
        self.arrive_s - self.depart_s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub kinds: Vec<AgentKind>,
    pub radii: Vec<f64>,
    pub samples: Vec<Sample>,
    /// Measured seconds per traversed ring edge.
    pub edge_times: BTreeMap<(usize, usize), f64>,
    pub edge_log: Vec<EdgeTraversal>,
    pub collisions: Vec<Collision>,
    /// `None` when the mission did not finish within budget.
    pub completion_s: Option<f64>,
    pub harvested_j: Vec<f64>,
    pub requirements_j: Vec<f64>,
    /// Steps on which the emergency stop overrode the local planner.
    pub estop_steps: usize,
    /// Time spent radiating at anchors, seconds.
    pub charging_s: f64,
    pub end_time_s: f64,
}

impl SimTrace {
    pub(crate) fn new(world: &WorldState, requirements_j: Vec<f64>) -> Self {
        Self {
            kinds: world.agents.iter().map(|a| a.kind).collect(),
            radii: world.agents.iter().map(|a| a.radius).collect(),
            samples: Vec::new(),
            edge_times: BTreeMap::new(),
            edge_log: Vec::new(),
            collisions: Vec::new(),
            completion_s: None,
            harvested_j: world.harvested_j.clone(),
            requirements_j,
            estop_steps: 0,
            charging_s: 0.0,
            end_time_s: 0.0,
        }
    }

    pub fn finished(&self) -> bool {
        self.completion_s.is_some()
    }

    /// Everything but charging: driving, turning, docking, evading. `None` on DNF.
    pub fn motion_s(&self) -> Option<f64> {
        self.completion_s.map(|c| c - self.charging_s)
    }

    /// Time spent driving ring edges, seconds.
    pub fn ring_motion_s(&self) -> f64 {
        self.edge_log.iter().map(EdgeTraversal::duration_s).sum()
    }

    /// Collisions in which agent 0 (the WET robot in missions) takes part.
    pub fn robot_collisions(&self) -> usize {
        self.collisions.iter().filter(|c| c.a == 0 || c.b == 0).count()
    }

    /// Every harvester got at least its requirement.
    pub fn requirements_met(&self) -> bool {
        self.harvested_j.iter().zip(&self.requirements_j).all(|(h, r)| h >= r)
    }

    /// Largest agent-0 speed over all samples.
    pub fn max_robot_speed(&self) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| s.agents.first())
            .map(|a| a.2.norm())
            .fold(0.0, f64::max)
    }

    /// One row per sample: time, then x, y, heading per agent, then joules per harvester.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        for i in 0..self.kinds.len() {
            header.extend([format!("a{i}_x"), format!("a{i}_y"), format!("a{i}_heading")]);
        }
        for k in 0..self.requirements_j.len() {
            header.push(format!("eh{k}_j"));
        }
        let io = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(&header).map_err(io)?;
        for s in &self.samples {
            let mut row = vec![s.time.to_string()];
            for (p, h, _) in &s.agents {
                row.extend([p.x.to_string(), p.y.to_string(), h.to_string()]);
            }
            row.extend(s.harvested_j.iter().map(f64::to_string));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

/// One measured ring edge, as written to summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTime {
    pub from: usize,
    pub to: usize,
    pub seconds: f64,
}

/// What a run achieved, without the per-step samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub format_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub finished: bool,
    /// Absent on DNF.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub completion_s: Option<f64>,
    pub end_time_s: f64,
    pub charging_s: f64,
    pub harvested_j: Vec<f64>,
    pub requirements_j: Vec<f64>,
    pub requirements_met: bool,
    pub robot_collisions: usize,
    pub collisions: Vec<Collision>,
    pub estop_steps: usize,
    pub edges: Vec<EdgeTime>,
}

impl TraceSummary {
    pub fn new(trace: &SimTrace, scenario: &str, seed: u64) -> Self {
        Self {
            format_version: crate::scenario::FORMAT_VERSION,
            scenario: scenario.into(),
            seed,
            finished: trace.finished(),
            completion_s: trace.completion_s,
            end_time_s: trace.end_time_s,
            charging_s: trace.charging_s,
            harvested_j: trace.harvested_j.clone(),
            requirements_j: trace.requirements_j.clone(),
            requirements_met: trace.requirements_met(),
            robot_collisions: trace.robot_collisions(),
            collisions: trace.collisions.clone(),
            estop_steps: trace.estop_steps,
            edges: trace
                .edge_times
                .iter()
                .map(|(&(from, to), &seconds)| EdgeTime { from, to, seconds })
                .collect(),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        crate::scenario::to_toml(self)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        crate::scenario::parse_toml(s)
    }
}

/// Measured time for each traversed ring edge.
pub fn extract_edge_times(trace: &SimTrace) -> BTreeMap<(usize, usize), f64> {
    trace.edge_times.clone()
}
