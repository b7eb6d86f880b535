//! Selection vectors, route matrices and the ring (subtour-elimination) constraints.

use serde::{Deserialize, Serialize};

/// Big-M constant of the subtour-elimination inequalities.
pub const MTZ_BIG_J: f64 = 1e3;

const MTZ_TOL: f64 = 1e-9;

/// Binary anchor selection `v`, one entry per candidate anchor.
pub type SelectionVector = Vec<bool>;

/// Binary route matrix: `w[m][j] == true` means the robot drives from anchor `m` to `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct RouteMatrix {
    w: Vec<Vec<bool>>,
}

impl RouteMatrix {
    /// All-zero `n x n` matrix: no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            w: vec![vec![false; n]; n],
        }
    }

    /// Closed ring visiting `order` in sequence and returning to `order[0]`.
    ///
    /// A single-vertex order produces no edges; two vertices give the out-and-back pair.
    pub fn from_tour(n: usize, order: &[usize]) -> Self {
        let mut r = Self::empty(n);
        if order.len() >= 2 {
            for (i, &m) in order.iter().enumerate() {
                let j = order[(i + 1) % order.len()];
                r.w[m][j] = true;
            }
        }
        r
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, m: usize, j: usize) -> bool {
        self.w[m][j]
    }

    pub fn set(&mut self, m: usize, j: usize, on: bool) {
        self.w[m][j] = on;
    }

    /// Edges `(m, j)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.w.iter().enumerate().flat_map(|(m, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &on)| on)
                .map(move |(j, _)| (m, j))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Follows successors from `start` until returning to it.
    ///
    /// Returns `None` unless every vertex on the way has exactly one successor
    /// and the walk closes at `start`. An edgeless matrix yields `[start]`.
    pub fn tour_from(&self, start: usize) -> Option<Vec<usize>> {
        if start >= self.len() {
            return None;
        }
        if self.edge_count() == 0 {
            return Some(vec![start]);
        }
        let mut order = vec![start];
        let mut cur = start;
        loop {
            let mut succ = self.w[cur].iter().enumerate().filter(|(_, &on)| on).map(|(j, _)| j);
            let next = succ.next()?;
            if succ.next().is_some() {
                return None;
            }
            if next == start {
                break;
            }
            if order.contains(&next) {
                return None;
            }
            order.push(next);
            cur = next;
        }
        Some(order)
    }
}

impl From<Vec<Vec<u8>>> for RouteMatrix {
    fn from(w: Vec<Vec<u8>>) -> Self {
        Self {
            w: w.into_iter().map(|row| row.into_iter().map(|b| b != 0).collect()).collect(),
        }
    }
}

impl From<RouteMatrix> for Vec<Vec<u8>> {
    fn from(r: RouteMatrix) -> Self {
        r.w.into_iter().map(|row| row.into_iter().map(u8::from).collect()).collect()
    }
}

/// MTZ slack variables `lambda` paired with the big-M constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MtzSlack {
    pub lambda: Vec<f64>,
    pub big_j: f64,
}

impl MtzSlack {
    /// Slack certifying a ring: each vertex's position along the tour from `root`.
    ///
    /// Returns `None` if `w` is not a single ring through `root` covering `v`.
    pub fn for_route(v: &[bool], w: &RouteMatrix, root: usize) -> Option<Self> {
        let tour = w.tour_from(root)?;
        let selected = v.iter().filter(|&&b| b).count();
        if tour.len() != selected || tour.iter().any(|&m| !v[m]) {
            return None;
        }
        let mut lambda = vec![0.0; v.len()];
        for (pos, &m) in tour.iter().enumerate() {
            lambda[m] = pos as f64;
        }
        Some(Self { lambda, big_j: MTZ_BIG_J })
    }
}

/// Checks the route constraints with anchor 0 as the root of the ring.
pub fn check_route_constraints(v: &[bool], w: &RouteMatrix, lambda: &[f64]) -> bool {
    check_route_constraints_rooted(v, w, lambda, 0)
}

/// Checks binary selection, zero diagonal, degree equalities and the MTZ
/// subtour-elimination inequalities with big-M `J = 1e3`, exempting `root`
/// from the slack constraints.
///
/// The degree equalities cannot hold when exactly one anchor is selected, so
/// that case is accepted iff `w` has no edges (the robot charges in place).
pub fn check_route_constraints_rooted(v: &[bool], w: &RouteMatrix, lambda: &[f64], root: usize) -> bool {
    let n = v.len();
    if w.len() != n || lambda.len() != n || root >= n {
        return false;
    }
    // zero diagonal
    if (0..n).any(|m| w.get(m, m)) {
        return false;
    }
    let total = v.iter().filter(|&&b| b).count() as f64;
    if total == 1.0 {
        return w.edge_count() == 0;
    }
    // degree equalities
    for m in 0..n {
        let out = (0..n).filter(|&j| w.get(m, j)).count();
        let inc = (0..n).filter(|&j| w.get(j, m)).count();
        let vm = usize::from(v[m]);
        if out != vm || inc != vm {
            return false;
        }
    }
    let vf = |m: usize| if v[m] { 1.0 } else { 0.0 };
    let wf = |m: usize, j: usize| if w.get(m, j) { 1.0 } else { 0.0 };
    for m in (0..n).filter(|&m| m != root) {
        // slack bounds
        if lambda[m] < vf(m) - MTZ_TOL || lambda[m] > (total - 1.0) * vf(m) + MTZ_TOL {
            return false;
        }
        for j in (0..n).filter(|&j| j != root && j != m) {
            let lhs = lambda[m] - lambda[j] + (total - 1.0) * wf(m, j) + (total - 3.0) * wf(j, m);
            let rhs = total - 2.0 + MTZ_BIG_J * (2.0 - vf(m) - vf(j));
            if lhs > rhs + MTZ_TOL {
                return false;
            }
        }
    }
    true
}
