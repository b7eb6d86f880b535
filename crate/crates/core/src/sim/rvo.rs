//! Sampling-based reciprocal velocity obstacles.

use serde::{Deserialize, Serialize};

use super::world::{AgentKind, AgentState};
use crate::models::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvoParams {
    /// Candidate velocities examined per decision.
    pub samples: usize,
    /// Collisions predicted further out than this are ignored, seconds.
    pub horizon_s: f64,
    /// Added to the combined radius of each pair, meters.
    pub safety_margin: f64,
}

impl Default for RvoParams {
    fn default() -> Self {
        Self {
            samples: 200,
            horizon_s: 5.0,
            safety_margin: 0.06,
        }
    }
}

/// Time until two discs at relative position `rel_pos` (other minus self),
/// closing with relative velocity `rel_vel` (self minus other), first touch
/// at combined radius `radius`. Infinite if they never do; zero if they
/// already overlap and are still approaching.
pub fn time_to_collision(rel_pos: Vec2, rel_vel: Vec2, radius: f64) -> f64 {
    let closing = rel_pos.dot(rel_vel);
    let dist_sq = rel_pos.norm_sq();
    let r_sq = radius * radius;
    if dist_sq <= r_sq {
        return if closing > 0.0 { 0.0 } else { f64::INFINITY };
    }
    if closing <= 0.0 {
        return f64::INFINITY;
    }
    let v_sq = rel_vel.norm_sq();
    let disc = closing * closing - v_sq * (dist_sq - r_sq);
    if disc < 0.0 {
        return f64::INFINITY;
    }
    (closing - disc.sqrt()) / v_sq
}

/// Predicted time to collision if `agent` adopts `v` against `other`.
///
/// Noncooperative neighbors are assumed to keep their velocity, so `agent`
/// takes all the avoidance effort (a plain velocity obstacle). Everybody else
/// is assumed to share it, which moves the cone apex to the mean velocity.
pub fn candidate_ttc(agent: &AgentState, other: &AgentState, v: Vec2, params: &RvoParams) -> f64 {
    delayed_ttc(agent, other, v, 0.0, params)
}

fn relative_velocity(agent: &AgentState, other: &AgentState, v: Vec2) -> Vec2 {
    match other.kind {
        AgentKind::Noncooperative => v - other.velocity,
        _ => v * 2.0 - agent.velocity - other.velocity,
    }
}

/// [`candidate_ttc`] for an agent that stands still for `delay` seconds
/// (turning in place) before moving at `v`.
pub fn delayed_ttc(agent: &AgentState, other: &AgentState, v: Vec2, delay: f64, params: &RvoParams) -> f64 {
    pair_ttc(agent, other, v, delay, params.safety_margin)
}

fn pair_ttc(agent: &AgentState, other: &AgentState, v: Vec2, delay: f64, margin: f64) -> f64 {
    let radius = agent.radius + other.radius + margin;
    let rel_pos = other.position - agent.position;
    if delay > 0.0 {
        let waiting = relative_velocity(agent, other, Vec2::ZERO);
        let t = time_to_collision(rel_pos, waiting, radius);
        if t <= delay {
            return t;
        }
        let later = rel_pos - waiting * delay;
        return delay + time_to_collision(later, relative_velocity(agent, other, v), radius);
    }
    time_to_collision(rel_pos, relative_velocity(agent, other, v), radius)
}

/// Soonest predicted breach of the full margin, of half the margin, and
/// soonest actual contact.
fn min_ttc(agent: &AgentState, neighbors: &[AgentState], v: Vec2, delay: f64, params: &RvoParams) -> [f64; 3] {
    let m = params.safety_margin;
    neighbors.iter().fold([f64::INFINITY; 3], |acc, o| {
        [
            acc[0].min(pair_ttc(agent, o, v, delay, m)),
            acc[1].min(pair_ttc(agent, o, v, delay, 0.5 * m)),
            acc[2].min(pair_ttc(agent, o, v, delay, 0.0)),
        ]
    })
}

/// Slowest rate at which `v` moves `agent` away from neighbors that are
/// already inside the safety margin; zero if there are none.
fn opening_speed(agent: &AgentState, neighbors: &[AgentState], v: Vec2, params: &RvoParams) -> f64 {
    neighbors
        .iter()
        .filter_map(|o| {
            let rel_pos = o.position - agent.position;
            let d = rel_pos.norm();
            (d > 0.0 && d < agent.radius + o.radius + params.safety_margin)
                .then(|| -rel_pos.dot(relative_velocity(agent, o, v)) / d)
        })
        .reduce(f64::min)
        .unwrap_or(0.0)
}

/// Candidate set: the preferred velocity, zero, then rings of speeds over
/// headings fanned out from the preferred direction, clockwise offsets first
/// so that ties resolve consistently to the right.
pub fn candidates(agent: &AgentState, preferred: Vec2, max_speed: f64, samples: usize) -> Vec<Vec2> {
    let preferred = preferred.clamp_norm(max_speed);
    let base = if preferred.norm() > 1e-12 {
        preferred.angle_deg()
    } else if agent.velocity.norm() > 1e-12 {
        agent.velocity.angle_deg()
    } else {
        agent.heading_deg
    };
    const SPEEDS: [f64; 4] = [1.0, 0.75, 0.5, 0.25];
    let per_ring = (samples.saturating_sub(2) / SPEEDS.len()).max(1);
    let half = per_ring / 2;
    let step = 360.0 / per_ring as f64;
    let mut out = Vec::with_capacity(2 + per_ring * SPEEDS.len());
    out.push(preferred);
    out.push(Vec2::ZERO);
    for &frac in &SPEEDS {
        let mut offsets = vec![0.0];
        for i in 1..=half {
            offsets.push(-(i as f64) * step);
            if offsets.len() < per_ring {
                offsets.push(i as f64 * step);
            }
        }
        for off in offsets {
            out.push(Vec2::from_angle_deg(base + off) * (frac * max_speed));
        }
    }
    out
}

/// Velocity for `agent` that avoids every neighbor's (reciprocal) velocity obstacle.
///
/// Among candidates whose predicted collision lies beyond the horizon, returns
/// the one closest to `preferred`. If none is free, returns the candidate that
/// postpones actual contact longest, then half and full margin breach, then
/// is closest to `preferred`.
pub fn rvo_velocity(
    agent: &AgentState,
    neighbors: &[AgentState],
    preferred: Vec2,
    max_speed: f64,
    params: &RvoParams,
) -> Vec2 {
    let p = preferred.clamp_norm(max_speed);
    rvo_velocity_by(agent, neighbors, preferred, max_speed, params, |_| 0.0, |v| (v - p).norm())
}

/// [`rvo_velocity`] with a custom ranking of free candidates, used only when
/// the preferred velocity itself is blocked, and a start-up `delay` per
/// candidate for agents that must turn before they can move.
pub fn rvo_velocity_by(
    agent: &AgentState,
    neighbors: &[AgentState],
    preferred: Vec2,
    max_speed: f64,
    params: &RvoParams,
    delay: impl Fn(Vec2) -> f64,
    cost: impl Fn(Vec2) -> f64,
) -> Vec2 {
    let preferred_c = preferred.clamp_norm(max_speed);
    if neighbors.is_empty() || min_ttc(agent, neighbors, preferred_c, delay(preferred_c), params)[0] > params.horizon_s {
        return preferred_c;
    }
    // mirror-image candidates differ by rounding; the earlier one wins
    const TIE: f64 = 1e-12;
    let cands = candidates(agent, preferred, max_speed, params.samples);
    let mut best_free: Option<(f64, Vec2)> = None;
    // fallback ranks by time to contact, then to shrinking clearance, then by
    // how fast it opens distance to anyone already inside the margin, then cost
    let mut best_fallback: Option<([f64; 5], Vec2)> = None;
    let better = |a: &[f64; 5], b: &[f64; 5]| {
        for i in 0..5 {
            if a[i] > b[i] + TIE {
                return true;
            }
            if a[i] < b[i] - TIE {
                return false;
            }
        }
        false
    };
    for v in cands {
        let [ttc, half, contact] = min_ttc(agent, neighbors, v, delay(v), params);
        let c = cost(v);
        if ttc > params.horizon_s {
            if best_free.is_none_or(|(m, _)| c < m - TIE) {
                best_free = Some((c, v));
            }
        } else {
            let h = params.horizon_s;
            let key = [contact.min(h), half.min(h), ttc, opening_speed(agent, neighbors, v, params), -c];
            if best_fallback.is_none_or(|(k, _)| better(&key, &k)) {
                best_fallback = Some((key, v));
            }
        }
    }
    match (best_free, best_fallback) {
        (Some((_, v)), _) => v,
        (None, Some((_, v))) => v,
        (None, None) => Vec2::ZERO,
    }
}

/// Shortest predicted time to collision with any noncooperative neighbor at velocity `v`.
pub fn noncooperative_ttc(agent: &AgentState, neighbors: &[AgentState], v: Vec2, params: &RvoParams) -> f64 {
    neighbors
        .iter()
        .filter(|o| o.kind == AgentKind::Noncooperative)
        .map(|o| candidate_ttc(agent, o, v, params))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(x: f64, y: f64, kind: AgentKind) -> AgentState {
        AgentState::new(Vec2::new(x, y), 0.0, 0.18, 0.2, kind)
    }

    #[test]
    fn ttc_basics() {
        // 2 m apart, closing at 1 m/s, radius 1 -> touch after 1 s
        let t = time_to_collision(Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0), 1.0);
        assert!((t - 1.0).abs() < 1e-12);
        assert!(time_to_collision(Vec2::new(2.0, 0.0), Vec2::new(-1.0, 0.0), 1.0).is_infinite());
        assert!(time_to_collision(Vec2::new(2.0, 0.0), Vec2::new(0.0, 1.0), 1.0).is_infinite());
        assert_eq!(time_to_collision(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 1.0), 0.0);
    }

    #[test]
    fn no_neighbors_returns_preferred() {
        let a = agent(0.0, 0.0, AgentKind::WetRobot);
        let v = rvo_velocity(&a, &[], Vec2::new(0.1, 0.05), 0.2, &RvoParams::default());
        assert_eq!(v, Vec2::new(0.1, 0.05));
    }

    #[test]
    fn candidate_count_matches_budget() {
        let a = agent(0.0, 0.0, AgentKind::WetRobot);
        let c = candidates(&a, Vec2::new(0.2, 0.0), 0.2, 200);
        assert!(c.len() <= 200 && c.len() >= 190, "{}", c.len());
        assert_eq!(c[0], Vec2::new(0.2, 0.0));
        assert!(c.iter().all(|v| v.norm() <= 0.2 + 1e-12));
    }

    #[test]
    fn static_obstacle_ahead_forces_lateral_deviation() {
        let a = agent(0.0, 0.0, AgentKind::WetRobot);
        let b = agent(0.5, 0.0, AgentKind::Noncooperative);
        let v = rvo_velocity(&a, &[b], Vec2::new(0.2, 0.0), 0.2, &RvoParams::default());
        assert!(v.y.abs() > 1e-6 || v.x <= 0.0, "{v:?}");
        assert!(candidate_ttc(&a, &b, v, &RvoParams::default()) > RvoParams::default().horizon_s);
    }

    #[test]
    fn reciprocal_pair_deviates_to_opposite_sides() {
        // close enough that slowing down alone is not free
        let mut a = agent(-0.8, 0.0, AgentKind::Cooperative);
        let mut b = agent(0.8, 0.0, AgentKind::Cooperative);
        a.velocity = Vec2::new(0.2, 0.0);
        b.velocity = Vec2::new(-0.2, 0.0);
        let p = RvoParams::default();
        let va = rvo_velocity(&a, &[b], Vec2::new(0.2, 0.0), 0.2, &p);
        let vb = rvo_velocity(&b, &[a], Vec2::new(-0.2, 0.0), 0.2, &p);
        // both veer right relative to their own heading
        assert!(va.y < 0.0 && vb.y > 0.0, "{va:?} {vb:?}");
    }
}
