//! Scenario, plan and summary documents, plus the random scenario generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::anchors::ClusteringParams;
use crate::error::{Error, Result};
use crate::hil::HilConfig;
use crate::models::{ChannelParams, Codebook, EnergyHarvester, HarvestParams, Position2D, RobotParams, Vec2};
use crate::planner::{Plan, SearchBudget};
use crate::sim::SimConfig;

pub const FORMAT_VERSION: u32 = 1;

/// Axis-aligned rectangle the movers wander in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub min: Vec2,
    pub max: Vec2,
}

impl Arena {
    pub fn square(side: f64) -> Self {
        Self {
            min: Vec2::ZERO,
            max: Vec2::new(side, side),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Uniform point at least `margin` inside the walls.
    pub fn sample<R: Rng>(&self, rng: &mut R, margin: f64) -> Position2D {
        let m = margin.min(self.width() / 2.0).min(self.height() / 2.0);
        let x = if self.width() > 2.0 * m { rng.gen_range(self.min.x + m..self.max.x - m) } else { self.min.x + m };
        let y = if self.height() > 2.0 * m { rng.gen_range(self.min.y + m..self.max.y - m) } else { self.min.y + m };
        Vec2::new(x, y)
    }

    pub fn contains(&self, p: Position2D) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSetup {
    pub start: Position2D,
    pub heading_deg: f64,
    /// Cruise speed, m/s.
    pub linear_speed: f64,
    /// Turn-in-place rate, deg/s.
    pub angular_speed: f64,
    pub body_radius: f64,
    /// Electrical draw while operating, W.
    pub motion_power_w: f64,
}

impl Default for RobotSetup {
    fn default() -> Self {
        let p = RobotParams::default();
        Self {
            start: Vec2::ZERO,
            heading_deg: 0.0,
            linear_speed: p.linear_speed,
            angular_speed: p.angular_speed,
            body_radius: p.body_radius,
            motion_power_w: 9.3,
        }
    }
}

impl RobotSetup {
    pub fn params(&self) -> RobotParams {
        RobotParams {
            linear_speed: self.linear_speed,
            angular_speed: self.angular_speed,
            body_radius: self.body_radius,
        }
    }
}

/// Noncooperative movers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObstacleParams {
    pub count: usize,
    pub speed: f64,
    pub radius: f64,
    /// Seed used when none is given on the command line.
    pub seed: u64,
}

impl Default for ObstacleParams {
    fn default() -> Self {
        Self {
            count: 0,
            speed: 0.15,
            radius: 0.18,
            seed: 0,
        }
    }
}

/// Anchor-selection search limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub max_evaluations: usize,
    pub max_kicks: usize,
    pub kick_size: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let b = SearchBudget::default();
        Self {
            max_evaluations: b.max_evaluations,
            max_kicks: b.max_kicks,
            kick_size: b.kick_size,
        }
    }
}

impl PlannerConfig {
    pub fn budget(&self, seed: u64) -> SearchBudget {
        SearchBudget {
            max_evaluations: self.max_evaluations,
            max_kicks: self.max_kicks,
            kick_size: self.kick_size,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub format_version: u32,
    #[serde(default)]
    pub name: String,
    pub robot: RobotSetup,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub harvest: HarvestParams,
    #[serde(default)]
    pub codebook: Codebook,
    #[serde(default)]
    pub clustering: ClusteringParams,
    pub arena: Arena,
    #[serde(default)]
    pub obstacles: ObstacleParams,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub hil: HilConfig,
    pub ehs: Vec<EnergyHarvester>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        check_version(self.format_version)?;
        let r = &self.robot;
        if !r.start.is_finite() || !r.heading_deg.is_finite() || !(r.motion_power_w >= 0.0) {
            return Err(Error::InvalidInput("robot: start, heading and motion_power_w must be finite".into()));
        }
        r.params().validate()?;
        self.channel.validate()?;
        self.harvest.validate()?;
        self.codebook.validate()?;
        if !(self.clustering.eps > 0.0) || self.clustering.min_pts == 0 {
            return Err(Error::InvalidInput("clustering: eps > 0 and min_pts >= 1 required".into()));
        }
        if !(self.arena.width() > 0.0 && self.arena.height() > 0.0) {
            return Err(Error::InvalidInput("arena: max must exceed min".into()));
        }
        let o = &self.obstacles;
        if o.count > 0 && !(o.speed > 0.0 && o.radius > 0.0) {
            return Err(Error::InvalidInput("obstacles: speed and radius must be positive".into()));
        }
        self.sim.validate()?;
        if self.planner.max_evaluations == 0 {
            return Err(Error::InvalidInput("planner: max_evaluations must be positive".into()));
        }
        self.hil.validate()?;
        if self.ehs.is_empty() {
            return Err(Error::InvalidInput("ehs: at least one harvester required".into()));
        }
        for (k, e) in self.ehs.iter().enumerate() {
            if !e.position.is_finite() || !(e.requirement_j > 0.0) || !e.requirement_j.is_finite() {
                return Err(Error::InvalidInput(format!("ehs[{k}]: finite position and requirement_j > 0 required")));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: Scenario = parse_toml(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        to_toml(self)
    }

    /// Same scenario with a different number of movers.
    pub fn with_movers(&self, count: usize) -> Self {
        let mut s = self.clone();
        s.obstacles.count = count;
        s
    }
}

fn check_version(v: u32) -> Result<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::Format(format!("unsupported format_version {v}, expected {FORMAT_VERSION}")))
    }
}

/// Parses a TOML document; errors carry the line and field toml reports.
pub fn parse_toml<T: DeserializeOwned>(s: &str) -> Result<T> {
    toml::from_str(s).map_err(|e| Error::Format(e.to_string()))
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Format(e.to_string()))
}

/// A plan on disk together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub format_version: u32,
    pub scenario: String,
    pub seed: u64,
    /// Selections routed and scheduled by the search.
    pub evaluations: usize,
    pub plan: Plan,
}

impl PlanFile {
    pub fn new(scenario: &Scenario, seed: u64, evaluations: usize, plan: Plan) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            scenario: scenario.name.clone(),
            seed,
            evaluations,
            plan,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let f: PlanFile = parse_toml(s)?;
        check_version(f.format_version)?;
        f.plan.validate_structure()?;
        Ok(f)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        to_toml(self)
    }

    /// Rejects plans whose dimensions do not fit `scenario`.
    pub fn check_compatible(&self, scenario: &Scenario) -> Result<()> {
        if self.plan.schedule.beams() != scenario.codebook.len() {
            return Err(Error::DimensionMismatch {
                expected: scenario.codebook.len(),
                got: self.plan.schedule.beams(),
            });
        }
        for a in &self.plan.anchors {
            if let Some(&bad) = a.cluster.members.iter().find(|&&k| k >= scenario.ehs.len()) {
                return Err(Error::InvalidInput(format!("plan anchor references harvester {bad}, scenario has {}", scenario.ehs.len())));
            }
        }
        Ok(())
    }
}

/// Knobs for [`generate_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub name: String,
    pub ehs: usize,
    pub blobs: usize,
    /// Side of the square arena, meters.
    pub arena_size: f64,
    /// Radius of each blob, meters.
    pub blob_radius: f64,
    /// Harvesters placed uniformly instead of in blobs.
    pub scattered: usize,
    /// Add one harvester in the corner opposite the start.
    pub far_eh: bool,
    pub movers: usize,
    pub requirement_j: f64,
    /// DBSCAN radius written into the scenario, meters.
    pub eps: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            name: "generated".into(),
            ehs: 20,
            blobs: 4,
            arena_size: 10.0,
            blob_radius: 1.2,
            scattered: 4,
            far_eh: false,
            movers: 5,
            requirement_j: 0.02,
            eps: 1.0,
            seed: 0,
        }
    }
}

/// Random scenario: harvesters in round blobs plus a few scattered ones,
/// robot starting in the lower-left corner facing east.
pub fn generate_scenario(p: &GenParams) -> Result<Scenario> {
    if p.ehs == 0 || !(p.arena_size > 2.0) || !(p.requirement_j > 0.0) || p.blob_radius < 0.0 {
        return Err(Error::InvalidInput(format!("invalid generator settings: {p:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let arena = Arena::square(p.arena_size);
    let inner = 1.0 + p.blob_radius;
    let mut centers: Vec<Position2D> = Vec::new();
    for _ in 0..p.blobs {
        let mut c = arena.sample(&mut rng, inner);
        for _ in 0..200 {
            if centers.iter().all(|o| o.distance(c) >= 2.5 * p.blob_radius + 1.0) {
                break;
            }
            c = arena.sample(&mut rng, inner);
        }
        centers.push(c);
    }
    let far_count = usize::from(p.far_eh);
    let base = p.ehs.saturating_sub(far_count);
    let scattered = if centers.is_empty() { base } else { p.scattered.min(base) };
    let mut ehs = Vec::with_capacity(p.ehs);
    for i in 0..base - scattered {
        let c = centers[i % centers.len()];
        let r = p.blob_radius * rng.gen::<f64>().sqrt();
        let th = rng.gen_range(0.0..360.0);
        let q = c + Vec2::from_angle_deg(th) * r;
        ehs.push(EnergyHarvester {
            position: q,
            requirement_j: p.requirement_j,
        });
    }
    for _ in 0..scattered {
        ehs.push(EnergyHarvester {
            position: arena.sample(&mut rng, 0.5),
            requirement_j: p.requirement_j,
        });
    }
    if p.far_eh {
        ehs.push(EnergyHarvester::new(p.arena_size - 0.3, p.arena_size - 0.3, p.requirement_j));
    }
    let sc = Scenario {
        format_version: FORMAT_VERSION,
        name: p.name.clone(),
        robot: RobotSetup {
            start: Vec2::new(0.5, 0.5),
            ..Default::default()
        },
        channel: ChannelParams::default(),
        harvest: HarvestParams::default(),
        codebook: Codebook::three_sector(),
        clustering: ClusteringParams {
            eps: p.eps,
            ..Default::default()
        },
        arena,
        obstacles: ObstacleParams {
            count: p.movers,
            seed: p.seed,
            ..Default::default()
        },
        sim: SimConfig::default(),
        planner: PlannerConfig::default(),
        hil: HilConfig::default(),
        ehs,
    };
    sc.validate()?;
    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_scenario_round_trips() {
        let sc = generate_scenario(&GenParams {
            far_eh: true,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(sc.ehs.len(), 20);
        let text = sc.to_toml_string().unwrap();
        let back = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(back, sc);
        assert_eq!(back.to_toml_string().unwrap(), text);
    }

    #[test]
    fn generator_is_seeded() {
        let a = generate_scenario(&GenParams::default()).unwrap();
        let b = generate_scenario(&GenParams::default()).unwrap();
        let c = generate_scenario(&GenParams { seed: 1, ..Default::default() }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.ehs, c.ehs);
    }

    #[test]
    fn harvesters_stay_near_the_arena() {
        let sc = generate_scenario(&GenParams { seed: 7, ..Default::default() }).unwrap();
        for e in &sc.ehs {
            assert!(sc.arena.contains(e.position), "{:?}", e.position);
        }
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let text = r#"
format_version = 1
[robot]
start = { x = 0.0, y = 0.0 }
heading_deg = 0.0
linear_speed = 0.2
angular_speed = 90.0
body_radius = 0.18
motion_power_w = 9.3
[arena]
min = { x = 0.0, y = 0.0 }
max = { x = 5.0, y = 5.0 }
[[ehs]]
position = { x = 1.0, y = 1.0 }
requirement_j = 0.02
"#;
        let sc = Scenario::from_toml_str(text).unwrap();
        assert_eq!(sc.codebook, Codebook::three_sector());
        assert_eq!(sc.sim, SimConfig::default());
        assert_eq!(sc.obstacles.count, 0);
    }

    #[test]
    fn wrong_version_and_garbage_are_rejected() {
        assert!(matches!(Scenario::from_toml_str("format_version = 2"), Err(Error::Format(_))));
        assert!(matches!(Scenario::from_toml_str("this is = = not toml"), Err(Error::Format(_))));
    }
}
