//! Brute-force reference solutions, written without any of the library's solvers.

#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use robowet_core::anchors::max_distance;
use robowet_core::models::{beam_covers, Codebook, DistanceMatrix, Position2D};

/// Length of the closed ring `tour` (first vertex repeated at the end).
pub fn ring_length(d: &DistanceMatrix, tour: &[usize]) -> f64 {
    if tour.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for w in tour.windows(2) {
        total += d.get(w[0], w[1]);
    }
    total + d.get(tour[tour.len() - 1], tour[0])
}

/// Shortest ring through `selected` starting at `start`, by trying every order.
pub fn brute_force_tour(d: &DistanceMatrix, selected: &[usize], start: usize) -> f64 {
    let rest: Vec<usize> = selected.iter().copied().filter(|&m| m != start).collect();
    if rest.is_empty() {
        return 0.0;
    }
    let k = rest.len();
    rest.into_iter()
        .permutations(k)
        .map(|p| {
            let mut tour = vec![start];
            tour.extend(p);
            ring_length(d, &tour)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `min sum(t)` subject to `a t >= b` and `t >= 0`, by visiting every basic
/// solution. `a` is rows x cols. `None` when infeasible.
pub fn vertex_enumeration_min_sum(a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = a.first().map_or(0, Vec::len);
    let rows = a.len();
    // constraint i: a_i t >= b_i for i < rows, then t_j >= 0
    let row = |i: usize| -> (Vec<f64>, f64) {
        if i < rows {
            (a[i].clone(), b[i])
        } else {
            let mut e = vec![0.0; n];
            e[i - rows] = 1.0;
            (e, 0.0)
        }
    };
    let feasible = |t: &[f64]| {
        t.iter().all(|&x| x >= -1e-9)
            && a.iter().zip(b).all(|(r, &bi)| {
                let lhs: f64 = r.iter().zip(t).map(|(x, y)| x * y).sum();
                lhs >= bi - 1e-9 * bi.abs().max(1.0)
            })
    };
    let mut best: Option<f64> = None;
    for active in (0..rows + n).combinations(n) {
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DVector::<f64>::zeros(n);
        for (r, &i) in active.iter().enumerate() {
            let (coeffs, bi) = row(i);
            for (c, v) in coeffs.into_iter().enumerate() {
                m[(r, c)] = v;
            }
            rhs[r] = bi;
        }
        let Some(t) = m.lu().solve(&rhs) else {
            continue;
        };
        let t: Vec<f64> = t.iter().copied().collect();
        if t.iter().any(|x| !x.is_finite()) || !feasible(&t) {
            continue;
        }
        let obj: f64 = t.iter().sum();
        if best.is_none_or(|v| obj < v) {
            best = Some(obj);
        }
    }
    best
}

/// Points on a square grid of pitch `step` covering `[lo, hi]`.
fn grid(lo: Position2D, hi: Position2D, step: f64) -> impl Iterator<Item = Position2D> {
    let nx = ((hi.x - lo.x) / step).ceil() as usize;
    let ny = ((hi.y - lo.y) / step).ceil() as usize;
    (0..=nx).flat_map(move |i| (0..=ny).map(move |j| Position2D::new(lo.x + i as f64 * step, lo.y + j as f64 * step)))
}

fn bounds(points: &[Position2D]) -> (Position2D, Position2D) {
    let lo = Position2D::new(
        points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min),
        points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min),
    );
    let hi = Position2D::new(
        points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
        points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
    );
    (lo, hi)
}

/// Smallest max-distance over a `step` grid on the points' bounding box.
pub fn grid_minmax_radius(points: &[Position2D], step: f64) -> f64 {
    let (lo, hi) = bounds(points);
    grid(lo, hi, step).map(|c| max_distance(c, points)).fold(f64::INFINITY, f64::min)
}

fn beam_minmax_over(points: &[Position2D], codebook: &Codebook, lo: Position2D, hi: Position2D, step: f64) -> f64 {
    grid(lo, hi, step)
        .filter(|&c| codebook.sectors.iter().any(|s| points.iter().all(|p| beam_covers(s, c, *p))))
        .map(|c| max_distance(c, points))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest max-distance over grid centers from which one codebook beam
/// covers every point.
///
/// A coarse pass over the bounding box grown by `reach` gives an upper bound
/// `r`; the fine pass then covers every center within `r` of all points.
pub fn grid_beam_minmax_radius(points: &[Position2D], codebook: &Codebook, step: f64, reach: f64) -> f64 {
    let (lo, hi) = bounds(points);
    let coarse = beam_minmax_over(
        points,
        codebook,
        Position2D::new(lo.x - reach, lo.y - reach),
        Position2D::new(hi.x + reach, hi.y + reach),
        step * 5.0,
    );
    if !coarse.is_finite() {
        return coarse;
    }
    let r = coarse + step;
    // centers at distance <= r from every point
    let flo = Position2D::new(hi.x - r, hi.y - r);
    let fhi = Position2D::new(lo.x + r, lo.y + r);
    beam_minmax_over(points, codebook, flo, fhi, step).min(coarse)
}
