//! Iterated local search over anchor selections.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Plan, PlanningProblem};
use crate::error::{Error, Result};

/// Limits and seed for [`PlanningProblem::joint_optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Distinct selections to route and schedule before stopping.
    pub max_evaluations: usize,
    /// Consecutive perturbations without a new incumbent before stopping.
    pub max_kicks: usize,
    /// Bits flipped per perturbation.
    pub kick_size: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_evaluations: 4000,
            max_kicks: 40,
            kick_size: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub plan: Plan,
    /// Cost of each new incumbent, starting with the visit-all selection.
    pub accepted: Vec<f64>,
    pub evaluations: usize,
}

struct Evaluator<'a> {
    problem: &'a PlanningProblem,
    cache: HashMap<Vec<bool>, Option<f64>>,
    budget: usize,
}

impl Evaluator<'_> {
    /// Cost of a selection, `None` if it cannot meet every requirement.
    fn cost(&mut self, sel: &[bool]) -> Result<Option<f64>> {
        if let Some(&c) = self.cache.get(sel) {
            return Ok(c);
        }
        let c = if self.problem.covers_all(sel) {
            match self.problem.plan_for_selection(sel) {
                Ok(p) => Some(p.planned_completion_s),
                Err(Error::Infeasible { .. }) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        self.cache.insert(sel.to_vec(), c);
        Ok(c)
    }

    fn exhausted(&self) -> bool {
        self.cache.len() >= self.budget
    }
}

impl PlanningProblem {
    /// Searches anchor subsets for the cheapest plan.
    ///
    /// Starts from the all-selected set, descends by best single-bit flips
    /// (the start anchor stays selected), then repeatedly kicks the incumbent
    /// with a seeded random multi-bit flip and descends again. Stops when the
    /// evaluation budget is spent, every subset has been seen, or `max_kicks`
    /// consecutive kicks fail to improve. Ties are broken by lowest flip index.
    pub fn joint_optimize(&self, budget: &SearchBudget) -> Result<SearchOutcome> {
        let m = self.anchors.len();
        let flippable: Vec<usize> = (0..m).filter(|&i| i != self.start_anchor).collect();
        let space = if flippable.len() >= 63 {
            usize::MAX
        } else {
            1usize << flippable.len()
        };
        let mut eval = Evaluator {
            problem: self,
            cache: HashMap::new(),
            budget: budget.max_evaluations.max(1),
        };
        let all = vec![true; m];
        let Some(all_cost) = eval.cost(&all)? else {
            let missing = self.table().uncovered(&all);
            return Err(Error::Infeasible { ehs: missing });
        };
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        let mut best = (all.clone(), all_cost);
        let mut accepted = vec![all_cost];
        let mut current = best.clone();
        let mut idle_kicks = 0;
        loop {
            current = self.descend(current, &flippable, &mut eval)?;
            if current.1 < best.1 {
                best = current.clone();
                accepted.push(best.1);
                idle_kicks = 0;
            } else {
                idle_kicks += 1;
            }
            if idle_kicks > budget.max_kicks
                || eval.exhausted()
                || eval.cache.len() >= space
                || flippable.is_empty()
            {
                break;
            }
            // perturb the incumbent; infeasible kicks are retried a few times
            let k = budget.kick_size.clamp(1, flippable.len());
            let mut kicked = None;
            for _ in 0..8 {
                let mut sel = best.0.clone();
                for i in sample(&mut rng, flippable.len(), k).iter() {
                    let b = flippable[i];
                    sel[b] = !sel[b];
                }
                if let Some(c) = eval.cost(&sel)? {
                    kicked = Some((sel, c));
                    break;
                }
            }
            current = kicked.unwrap_or_else(|| best.clone());
        }
        let plan = self.plan_for_selection(&best.0)?;
        Ok(SearchOutcome {
            plan,
            accepted,
            evaluations: eval.cache.len(),
        })
    }

    fn descend(
        &self,
        mut current: (Vec<bool>, f64),
        flippable: &[usize],
        eval: &mut Evaluator<'_>,
    ) -> Result<(Vec<bool>, f64)> {
        loop {
            let mut step: Option<(usize, f64)> = None;
            for &b in flippable {
                if eval.exhausted() {
                    break;
                }
                let mut sel = current.0.clone();
                sel[b] = !sel[b];
                if let Some(c) = eval.cost(&sel)? {
                    if c < current.1 && step.is_none_or(|(_, sc)| c < sc) {
                        step = Some((b, c));
                    }
                }
            }
            match step {
                Some((b, c)) => {
                    current.0[b] = !current.0[b];
                    current.1 = c;
                }
                None => return Ok(current),
            }
        }
    }
}
