//! Chebyshev centers: the point minimizing the largest distance to a set,
//! optionally constrained so that one codebook beam sees the whole set.

use crate::error::{Error, Result};
use crate::models::{beam_covers, BeamSector, Codebook, Position2D, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Position2D,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPlacement {
    pub center: Position2D,
    /// Index into the codebook.
    pub beam: usize,
    pub radius: f64,
}

/// Largest distance from `c` to any of `points`.
pub fn max_distance(c: Position2D, points: &[Position2D]) -> f64 {
    points.iter().map(|p| c.distance(*p)).fold(0.0, f64::max)
}

/// Minimum enclosing circle of `points`.
pub fn chebyshev_center(points: &[Position2D]) -> Result<Circle> {
    if points.is_empty() {
        return Err(Error::InvalidInput("Chebyshev center of an empty set".into()));
    }
    let mut c = Circle {
        center: points[0],
        radius: 0.0,
    };
    for i in 1..points.len() {
        if inside(&c, points[i]) {
            continue;
        }
        c = Circle {
            center: points[i],
            radius: 0.0,
        };
        for j in 0..i {
            if inside(&c, points[j]) {
                continue;
            }
            c = diametral(points[i], points[j]);
            for k in 0..j {
                if !inside(&c, points[k]) {
                    c = circumscribed(points[i], points[j], points[k]);
                }
            }
        }
    }
    // report the achieved value rather than the construction radius
    c.radius = max_distance(c.center, points);
    Ok(c)
}

fn inside(c: &Circle, p: Position2D) -> bool {
    c.center.distance(p) <= c.radius * (1.0 + 1e-12) + 1e-12
}

fn diametral(a: Position2D, b: Position2D) -> Circle {
    let center = (a + b) * 0.5;
    Circle {
        center,
        radius: center.distance(a).max(center.distance(b)),
    }
}

fn circumscribed(a: Position2D, b: Position2D, c: Position2D) -> Circle {
    let ab = b - a;
    let ac = c - a;
    let det = 2.0 * ab.cross(ac);
    if det.abs() < 1e-14 * (ab.norm_sq() + ac.norm_sq()).max(1e-300) {
        // collinear: the widest pair spans the others
        let cands = [diametral(a, b), diametral(a, c), diametral(b, c)];
        return cands
            .into_iter()
            .max_by(|x, y| x.radius.total_cmp(&y.radius))
            .expect("three candidates");
    }
    let ux = (ac.y * ab.norm_sq() - ab.y * ac.norm_sq()) / det;
    let uy = (ab.x * ac.norm_sq() - ac.x * ab.norm_sq()) / det;
    let center = a + Vec2::new(ux, uy);
    let radius = [a, b, c].iter().map(|p| center.distance(*p)).fold(0.0, f64::max);
    Circle { center, radius }
}

/// Chebyshev center subject to every point lying inside one codebook beam
/// as seen from the center. Returns the best beam; ties go to the lowest index.
///
/// For sectors up to 180° wide, the admissible centers form a wedge bounded
/// by two lines, so the problem is convex per beam: the answer is the
/// unconstrained center when admissible, and otherwise lies on the wedge
/// boundary, where a 1D convex search finds it. Wider non-omni sectors fall
/// back to a 5 cm grid with local refinement.
pub fn beam_constrained_center(points: &[Position2D], codebook: &Codebook) -> Result<BeamPlacement> {
    if points.is_empty() {
        return Err(Error::InvalidInput("Chebyshev center of an empty set".into()));
    }
    codebook.validate()?;
    let free = chebyshev_center(points)?;
    let mut best: Option<BeamPlacement> = None;
    for (idx, sector) in codebook.sectors.iter().enumerate() {
        let Some(center) = best_center_for_beam(points, sector, &free) else {
            continue;
        };
        if !points.iter().all(|p| beam_covers(sector, center, *p)) {
            continue;
        }
        let radius = max_distance(center, points);
        if best.is_none_or(|b| radius < b.radius) {
            best = Some(BeamPlacement {
                center,
                beam: idx,
                radius,
            });
        }
    }
    best.ok_or_else(|| Error::FeasibleBeamNotFound {
        members: (0..points.len()).collect(),
    })
}

fn best_center_for_beam(points: &[Position2D], sector: &BeamSector, free: &Circle) -> Option<Position2D> {
    if sector.is_omni() {
        return Some(free.center);
    }
    if points.iter().all(|p| beam_covers(sector, free.center, *p)) {
        return Some(free.center);
    }
    if sector.width_deg <= 180.0 {
        wedge_search(points, sector)
    } else {
        grid_search(points, sector)
    }
}

/// Admissible centers `c` satisfy `cross(u1, p - c) >= 0` and `cross(p - c, u2) >= 0`
/// for every point `p`, with `u1`, `u2` the sector edge directions. Both families
/// share a normal, so only the tightest point of each matters.
fn wedge_search(points: &[Position2D], sector: &BeamSector) -> Option<Position2D> {
    let u1 = Vec2::from_angle_deg(sector.start_deg);
    let u2 = Vec2::from_angle_deg(sector.end_deg());
    // constraint i:  n_i . c <= b_i
    let n1 = Vec2::new(-u1.y, u1.x);
    let n2 = Vec2::new(u2.y, -u2.x);
    let b1 = points.iter().map(|p| u1.cross(*p)).fold(f64::INFINITY, f64::min);
    let b2 = points.iter().map(|p| p.cross(u2)).fold(f64::INFINITY, f64::min);
    let axis = Vec2::from_angle_deg(sector.center_deg());
    let span = points
        .iter()
        .flat_map(|a| points.iter().map(move |b| a.distance(*b)))
        .fold(0.0, f64::max);

    let f = |c: Position2D| max_distance(c, points);
    let det = n1.cross(n2);
    let candidate = if det.abs() < 1e-12 {
        // half-plane (180° sector): search the boundary line
        let b = b1.min(b2);
        let foot = n1 * (b / n1.norm_sq());
        let dir = n1.perp().normalized();
        let reach = f(foot) + span + 1.0;
        let s = golden_min(|s| f(foot + dir * s), -reach, reach);
        foot + dir * s
    } else {
        // apex: n1 . c = b1, n2 . c = b2
        let apex = Vec2::new((b1 * n2.y - b2 * n1.y) / det, (n1.x * b2 - n2.x * b1) / det);
        // rays along each boundary line, pointing into the wedge (away from the points)
        let mut best: Option<(f64, Position2D)> = None;
        for (n_on, n_other) in [(n1, n2), (n2, n1)] {
            let mut dir = n_on.perp().normalized();
            if n_other.dot(dir) > 0.0 {
                dir = -dir;
            }
            let reach = 2.0 * f(apex) + span + 1.0;
            let s = golden_min(|s| f(apex + dir * s), 0.0, reach);
            let c = apex + dir * s;
            let v = f(c);
            if best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, c));
            }
        }
        best.map(|(_, c)| c)?
    };
    nudge_into_beam(candidate, points, sector, axis)
}

/// Rounding can leave a boundary center a hair outside the sector; step back along -axis.
fn nudge_into_beam(mut c: Position2D, points: &[Position2D], sector: &BeamSector, axis: Vec2) -> Option<Position2D> {
    let mut step = 1e-9;
    for _ in 0..20 {
        if points.iter().all(|p| beam_covers(sector, c, *p)) {
            return Some(c);
        }
        c -= axis * step;
        step *= 4.0;
    }
    None
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    // the interval end can beat the interior probes for monotone f
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi]
        .into_iter()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("nonempty")
}

/// 5 cm grid over an enlarged bounding box, then compass refinement.
fn grid_search(points: &[Position2D], sector: &BeamSector) -> Option<Position2D> {
    const STEP: f64 = 0.05;
    let feasible = |c: Position2D| points.iter().all(|p| beam_covers(sector, c, *p));
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = (hi - lo).norm() + 1.0;
    lo -= Vec2::new(pad, pad);
    hi += Vec2::new(pad, pad);
    let nx = ((hi.x - lo.x) / STEP).ceil() as usize;
    let ny = ((hi.y - lo.y) / STEP).ceil() as usize;
    let mut best: Option<(f64, Position2D)> = None;
    for i in 0..=nx {
        for j in 0..=ny {
            let c = lo + Vec2::new(i as f64 * STEP, j as f64 * STEP);
            if !feasible(c) {
                continue;
            }
            let v = max_distance(c, points);
            if best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, c));
            }
        }
    }
    let (mut val, mut c) = best?;
    let mut h = STEP;
    while h > 1e-6 {
        let mut moved = false;
        for d in [Vec2::new(h, 0.0), Vec2::new(-h, 0.0), Vec2::new(0.0, h), Vec2::new(0.0, -h)] {
            let cand = c + d;
            if feasible(cand) {
                let v = max_distance(cand, points);
                if v < val {
                    val = v;
                    c = cand;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Some(c)
}
