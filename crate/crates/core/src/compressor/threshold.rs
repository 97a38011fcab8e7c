use serde::{Deserialize, Serialize};

use super::counts::ProductCountDistribution;
use crate::error::{Error, Result};
use crate::protocol::CostLedger;

/// Bits exchanged in every threshold round.
pub const BITS_PER_ROUND: u64 = 4;

const MAX_ROUNDS: u32 = 10_000;

/// Outcome of the threshold protocol.
///
/// `answer` is true iff `m_x + m_y > budget`. The witnesses split the budget
/// (`theta_x + theta_y = budget`) and certify the answer on each side: both
/// counts are at most their witness when the answer is false, and at least
/// it when true.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub answer: bool,
    pub theta_x: i64,
    pub theta_y: i64,
    pub rounds: u32,
    pub bits: u64,
}

/// Smallest `xi` in `[-1, budget]` with
/// `Fx(xi - 1) <= Fy(budget - xi)` and `Fx(xi) >= Fy(budget - xi - 1)`.
pub fn find_xi(d: &ProductCountDistribution, budget: i64) -> Result<i64> {
    (-1..=budget)
        .find(|&xi| {
            d.dx.cdf(xi - 1) <= d.dy.cdf(budget - xi) && d.dx.cdf(xi) >= d.dy.cdf(budget - xi - 1)
        })
        .ok_or_else(|| Error::Invariant(format!("no split point exists for budget {budget}")))
}

#[derive(Clone, Debug)]
struct PlanNode {
    dist: ProductCountDistribution,
    xi: i64,
    /// Child after learning `m_x > xi, m_y < budget - xi`.
    alice_high: Option<usize>,
    /// Child after learning `m_x < xi, m_y > budget - xi`.
    bob_high: Option<usize>,
}

/// Memoized decision tree of the threshold protocol for one budget and
/// starting distribution. Nodes are built the first time a run reaches them.
#[derive(Clone, Debug)]
pub struct ThresholdPlan {
    budget: i64,
    nodes: Vec<PlanNode>,
}

impl ThresholdPlan {
    pub fn new(budget: i64, dist: ProductCountDistribution) -> Result<Self> {
        let xi = find_xi(&dist, budget)?;
        Ok(Self {
            budget,
            nodes: vec![PlanNode {
                dist,
                xi,
                alice_high: None,
                bob_high: None,
            }],
        })
    }

    pub fn budget(&self) -> i64 {
        self.budget
    }

    /// Split point chosen in the first round.
    pub fn root_xi(&self) -> i64 {
        self.nodes[0].xi
    }

    fn child(&mut self, node: usize, alice_high: bool) -> Result<usize> {
        let existing = if alice_high {
            self.nodes[node].alice_high
        } else {
            self.nodes[node].bob_high
        };
        if let Some(c) = existing {
            return Ok(c);
        }
        let PlanNode { dist, xi, .. } = &self.nodes[node];
        let (xi, rest) = (*xi, self.budget - *xi);
        let dist = if alice_high {
            ProductCountDistribution::new(
                dist.dx.condition_greater(xi)?,
                dist.dy.condition_less(rest)?,
            )
        } else {
            ProductCountDistribution::new(
                dist.dx.condition_less(xi)?,
                dist.dy.condition_greater(rest)?,
            )
        };
        let child_xi = find_xi(&dist, self.budget)?;
        self.nodes.push(PlanNode {
            dist,
            xi: child_xi,
            alice_high: None,
            bob_high: None,
        });
        let id = self.nodes.len() - 1;
        if alice_high {
            self.nodes[node].alice_high = Some(id);
        } else {
            self.nodes[node].bob_high = Some(id);
        }
        Ok(id)
    }

    /// Runs the protocol for the private counts `m_x` (Alice) and `m_y` (Bob).
    pub fn run(&mut self, m_x: i64, m_y: i64, ledger: &mut CostLedger) -> Result<ThresholdResult> {
        let mut node = 0;
        let mut rounds = 0u32;
        loop {
            if rounds >= MAX_ROUNDS {
                return Err(Error::Invariant(format!(
                    "threshold did not terminate after {MAX_ROUNDS} rounds"
                )));
            }
            rounds += 1;
            ledger.charge_noiseless(BITS_PER_ROUND);
            let xi = self.nodes[node].xi;
            let rest = self.budget - xi;
            let b1 = m_x == xi;
            let b2 = m_x > xi;
            let b3 = m_y == rest;
            let b4 = m_y > rest;
            let answer = if b1 {
                Some(b4)
            } else if b3 || b2 == b4 {
                Some(b2)
            } else {
                None
            };
            if let Some(answer) = answer {
                return Ok(ThresholdResult {
                    answer,
                    theta_x: xi,
                    theta_y: rest,
                    rounds,
                    bits: u64::from(rounds) * BITS_PER_ROUND,
                });
            }
            node = self.child(node, b2)?;
        }
    }
}

/// One-shot threshold run on `dist` with integer budget `budget`.
pub fn threshold(
    budget: i64,
    dist: &ProductCountDistribution,
    m_x: i64,
    m_y: i64,
    ledger: &mut CostLedger,
) -> Result<ThresholdResult> {
    ThresholdPlan::new(budget, dist.clone())?.run(m_x, m_y, ledger)
}
