//! Exact ring routing over a subset of anchors by depth-first branch-and-bound.

use super::route::RouteMatrix;
use crate::error::{Error, Result};
use crate::models::DistanceMatrix;

/// Default cap on search nodes before giving up on proving optimality.
pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RouteSolution {
    pub route: RouteMatrix,
    /// Visiting order, starting at the start anchor, without the closing return.
    pub tour: Vec<usize>,
    /// Total length of the closed ring in meters.
    pub length: f64,
    /// False when the node budget ran out before the search finished.
    pub optimal: bool,
    pub nodes: usize,
}

/// Minimum-length ring through exactly `selected`, beginning and ending at `start`.
pub fn solve_route(d: &DistanceMatrix, selected: &[usize], start: usize) -> Result<RouteSolution> {
    solve_route_with_budget(d, selected, start, DEFAULT_NODE_BUDGET)
}

pub fn solve_route_with_budget(
    d: &DistanceMatrix,
    selected: &[usize],
    start: usize,
    node_budget: usize,
) -> Result<RouteSolution> {
    let n = d.len();
    let mut verts: Vec<usize> = selected.to_vec();
    verts.sort_unstable();
    verts.dedup();
    if let Some(&bad) = verts.iter().find(|&&m| m >= n) {
        return Err(Error::UnknownAnchor(bad));
    }
    if !verts.contains(&start) {
        return Err(Error::InvalidInput(format!("start anchor {start} is not selected")));
    }
    // start first, remaining in index order
    verts.retain(|&m| m != start);
    verts.insert(0, start);

    let k = verts.len();
    if k <= 2 {
        let length = if k == 2 {
            d.get(verts[0], verts[1]) + d.get(verts[1], verts[0])
        } else {
            0.0
        };
        return Ok(RouteSolution {
            route: RouteMatrix::from_tour(n, &verts),
            tour: verts,
            length,
            optimal: true,
            nodes: 1,
        });
    }

    let cost: Vec<Vec<f64>> = verts
        .iter()
        .map(|&a| verts.iter().map(|&b| d.get(a, b)).collect())
        .collect();
    let mut search = Search::new(cost, node_budget);
    search.run();

    let tour: Vec<usize> = search.best_path.iter().map(|&i| verts[i]).collect();
    Ok(RouteSolution {
        route: RouteMatrix::from_tour(n, &tour),
        tour,
        length: search.best,
        optimal: !search.exhausted,
        nodes: search.nodes,
    })
}

struct Search {
    cost: Vec<Vec<f64>>,
    budget: usize,
    nodes: usize,
    exhausted: bool,
    best: f64,
    best_path: Vec<usize>,
    path: Vec<usize>,
    visited: Vec<bool>,
}

impl Search {
    fn new(cost: Vec<Vec<f64>>, budget: usize) -> Self {
        let k = cost.len();
        let mut s = Self {
            cost,
            budget,
            nodes: 0,
            exhausted: false,
            best: f64::INFINITY,
            best_path: Vec::new(),
            path: Vec::with_capacity(k),
            visited: vec![false; k],
        };
        s.seed_nearest_neighbor();
        s
    }

    fn seed_nearest_neighbor(&mut self) {
        let k = self.cost.len();
        let mut seen = vec![false; k];
        let mut path = vec![0];
        seen[0] = true;
        let mut len = 0.0;
        let mut cur = 0;
        for _ in 1..k {
            let next = (0..k)
                .filter(|&j| !seen[j])
                .min_by(|&a, &b| self.cost[cur][a].total_cmp(&self.cost[cur][b]))
                .expect("unvisited vertex");
            len += self.cost[cur][next];
            seen[next] = true;
            path.push(next);
            cur = next;
        }
        len += self.cost[cur][0];
        self.best = len;
        self.best_path = path;
    }

    fn run(&mut self) {
        self.path.clear();
        self.path.push(0);
        self.visited[0] = true;
        self.dfs(0.0);
    }

    /// Lower bound on the cost of finishing the ring from the current path end.
    fn completion_bound(&self) -> f64 {
        let k = self.cost.len();
        let last = *self.path.last().expect("nonempty path");
        let unvisited: Vec<usize> = (0..k).filter(|&u| !self.visited[u]).collect();
        if unvisited.is_empty() {
            return self.cost[last][0];
        }
        // every remaining vertex, and the path end, leaves exactly once
        let mut out = unvisited.iter().map(|&u| self.cost[last][u]).fold(f64::INFINITY, f64::min);
        // every remaining vertex, and the start, is entered exactly once
        let mut inc = unvisited.iter().map(|&u| self.cost[u][0]).fold(f64::INFINITY, f64::min);
        for &u in &unvisited {
            let mut best_out = self.cost[u][0];
            let mut best_in = self.cost[last][u];
            for &w in &unvisited {
                if w != u {
                    best_out = best_out.min(self.cost[u][w]);
                    best_in = best_in.min(self.cost[w][u]);
                }
            }
            out += best_out;
            inc += best_in;
        }
        out.max(inc)
    }

    fn dfs(&mut self, len: f64) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let k = self.cost.len();
        let last = *self.path.last().expect("nonempty path");
        if self.path.len() == k {
            let total = len + self.cost[last][0];
            if total < self.best {
                self.best = total;
                self.best_path = self.path.clone();
            }
            return;
        }
        // conservative pruning: equal-length branches are still explored
        if len + self.completion_bound() > self.best * (1.0 + 1e-12) {
            return;
        }
        let mut children: Vec<usize> = (0..k).filter(|&j| !self.visited[j]).collect();
        children.sort_by(|&a, &b| self.cost[last][a].total_cmp(&self.cost[last][b]).then(a.cmp(&b)));
        for j in children {
            if self.exhausted {
                return;
            }
            self.visited[j] = true;
            self.path.push(j);
            self.dfs(len + self.cost[last][j]);
            self.path.pop();
            self.visited[j] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Position2D;

    fn pts(v: &[(f64, f64)]) -> DistanceMatrix {
        DistanceMatrix::euclidean(&v.iter().map(|&(x, y)| Position2D::new(x, y)).collect::<Vec<_>>())
    }

    #[test]
    fn unit_square_corners() {
        let d = pts(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        let s = solve_route(&d, &[0, 1, 2, 3], 0).unwrap();
        assert!((s.length - 4.0).abs() < 1e-12);
        assert!(s.optimal);
        assert_eq!(s.tour[0], 0);
    }

    #[test]
    fn pair_is_out_and_back() {
        let d = pts(&[(0.0, 0.0), (3.0, 0.0), (9.0, 9.0)]);
        let s = solve_route(&d, &[1, 0], 1).unwrap();
        assert!((s.length - 6.0).abs() < 1e-12);
        assert!(s.route.get(0, 1) && s.route.get(1, 0));
        assert_eq!(s.tour, vec![1, 0]);
    }

    #[test]
    fn single_vertex_has_empty_route() {
        let d = pts(&[(0.0, 0.0), (3.0, 0.0)]);
        let s = solve_route(&d, &[1], 1).unwrap();
        assert_eq!(s.route.edge_count(), 0);
        assert_eq!(s.length, 0.0);
    }

    #[test]
    fn start_must_be_selected() {
        let d = pts(&[(0.0, 0.0), (3.0, 0.0)]);
        assert!(solve_route(&d, &[1], 0).is_err());
        assert!(matches!(solve_route(&d, &[0, 5], 0), Err(Error::UnknownAnchor(5))));
    }

    #[test]
    fn asymmetric_distances_pick_the_cheap_direction() {
        let mut m = vec![vec![0.0; 3]; 3];
        // 0->1->2->0 costs 3; the reverse costs 30
        m[0][1] = 1.0;
        m[1][2] = 1.0;
        m[2][0] = 1.0;
        m[1][0] = 10.0;
        m[2][1] = 10.0;
        m[0][2] = 10.0;
        let d = DistanceMatrix::new(m).unwrap();
        let s = solve_route(&d, &[0, 1, 2], 0).unwrap();
        assert_eq!(s.tour, vec![0, 1, 2]);
        assert_eq!(s.length, 3.0);
    }

    #[test]
    fn tiny_budget_flags_suboptimal() {
        let coords: Vec<(f64, f64)> = (0..9).map(|i| ((i * 7 % 9) as f64, (i * 4 % 9) as f64)).collect();
        let d = pts(&coords);
        let all: Vec<usize> = (0..9).collect();
        let s = solve_route_with_budget(&d, &all, 0, 3).unwrap();
        assert!(!s.optimal);
        assert_eq!(s.tour.len(), 9);
    }
}
