//! Unit-demand pricing as a system of difference constraints.

use super::system::{Constraint, FeasibilityResult, LinearSystem, Origin, Relation};
use crate::bundle::ItemSet;
use crate::error::{Error, Result};
use crate::market::{Allocation, Market, Valuation, Value};

/// Edge `from -> to` encodes `x_to - x_from <= weight`.
struct Edge {
    from: usize,
    to: usize,
    weight: i64,
    origin: Constraint,
}

/// Walrasian pricing for a unit-demand market.
///
/// Every constraint of the pricing system involves at most two prices, so
/// with a ground vertex `g` fixed at price 0 it reads `x_v - x_u <= w`. The
/// shortest distances from `g` are then a solution; a negative cycle is an
/// infeasible subsystem.
///
/// For an agent holding item `s`: `p_s - p_j <= v(s) - v(j)` for every other
/// item `j` and `p_s <= v(s)`. For an agent holding nothing:
/// `-p_j <= -v(j)`. Plus `p_j >= 0`, and `p_j <= 0` for unallocated items.
pub fn difference_constraint_pricing(
    market: &Market,
    allocation: &Allocation,
) -> Result<FeasibilityResult> {
    market.check_allocation(allocation)?;
    let m = market.item_count();
    let ground = m;
    let mut edges = Vec::new();
    let mut push = |from: usize, to: usize, weight: i64, origin: Constraint| {
        edges.push(Edge {
            from,
            to,
            weight,
            origin,
        })
    };

    for (agent, valuation) in market.valuations().iter().enumerate() {
        let Valuation::UnitDemand(values) = valuation else {
            return Err(Error::WrongClass {
                agent,
                solver: "difference-constraint pricing",
                expected: "unit-demand",
                found: valuation.class_name(),
            });
        };
        let held = allocation.bundle(agent);
        let v = |j: usize| values[j] as i64;
        match held.len() {
            0 => {
                for j in 0..m {
                    let c = Constraint::new(
                        [(j, 1)],
                        Relation::Ge,
                        v(j),
                        Origin::AgentBundle {
                            agent,
                            bundle: ItemSet::singleton(j),
                        },
                    );
                    push(j, ground, -v(j), c);
                }
            }
            1 => {
                let s = held.iter().next().unwrap();
                let c = Constraint::new(
                    [(s, -1)],
                    Relation::Ge,
                    -v(s),
                    Origin::AgentBundle {
                        agent,
                        bundle: ItemSet::EMPTY,
                    },
                );
                push(ground, s, v(s), c);
                for j in (0..m).filter(|&j| j != s) {
                    let c = Constraint::new(
                        [(j, 1), (s, -1)],
                        Relation::Ge,
                        v(j) - v(s),
                        Origin::AgentBundle {
                            agent,
                            bundle: ItemSet::singleton(j),
                        },
                    );
                    push(j, s, v(s) - v(j), c);
                }
            }
            size => {
                return Err(Error::InvalidAllocation(format!(
                    "unit-demand agent {} holds {size} items",
                    agent + 1
                )))
            }
        }
    }
    let unallocated = allocation.unallocated();
    for item in 0..m {
        if unallocated.contains(item) {
            let c = Constraint::new([(item, 1)], Relation::Eq, 0, Origin::PriceZero { item });
            push(item, ground, 0, c.clone());
            push(ground, item, 0, c);
        } else {
            let c = Constraint::new(
                [(item, 1)],
                Relation::Ge,
                0,
                Origin::PriceNonNegative { item },
            );
            push(item, ground, 0, c);
        }
    }

    match bellman_ford(m + 1, ground, &edges) {
        Ok(dist) => {
            let prices = dist[..m]
                .iter()
                .map(|d| Value::from_integer(d.expect("every item is reachable").into()))
                .collect();
            Ok(FeasibilityResult::Feasible(prices))
        }
        Err(cycle) => {
            let mut witness = LinearSystem::new(m);
            let mut seen = Vec::new();
            for e in cycle {
                let c = &edges[e].origin;
                if !seen.contains(c) {
                    seen.push(c.clone());
                    witness.push(c.clone())?;
                }
            }
            Ok(FeasibilityResult::Infeasible { witness })
        }
    }
}

/// Shortest distances from `source`, or the edge indices of a negative
/// cycle.
fn bellman_ford(
    vertex_count: usize,
    source: usize,
    edges: &[Edge],
) -> std::result::Result<Vec<Option<i64>>, Vec<usize>> {
    let mut dist: Vec<Option<i64>> = vec![None; vertex_count];
    let mut pred: Vec<Option<usize>> = vec![None; vertex_count];
    dist[source] = Some(0);
    let mut last_relaxed = None;
    for _ in 0..vertex_count {
        last_relaxed = None;
        for (idx, e) in edges.iter().enumerate() {
            if let Some(d) = dist[e.from] {
                let candidate = d + e.weight;
                if dist[e.to].is_none_or(|current| candidate < current) {
                    dist[e.to] = Some(candidate);
                    pred[e.to] = Some(idx);
                    last_relaxed = Some(e.to);
                }
            }
        }
        if last_relaxed.is_none() {
            return Ok(dist);
        }
    }
    // Still relaxing after |V| rounds: walk back |V| steps to land on the
    // cycle, then collect it.
    let mut v = last_relaxed.expect("relaxed in the final round");
    for _ in 0..vertex_count {
        v = edges[pred[v].unwrap()].from;
    }
    let start = v;
    let mut cycle = Vec::new();
    loop {
        let e = pred[v].unwrap();
        cycle.push(e);
        v = edges[e].from;
        if v == start {
            break;
        }
    }
    cycle.reverse();
    Err(cycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::lp_feasibility;

    fn ud(rows: &[&[u64]]) -> Market {
        Market::new(
            rows[0].len(),
            rows.iter().map(|r| Valuation::UnitDemand(r.to_vec())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_agent_example() {
        let m = ud(&[&[2, 1], &[1, 2]]);
        let a = Allocation::new(2, vec![ItemSet::singleton(0), ItemSet::singleton(1)]).unwrap();
        assert!(difference_constraint_pricing(&m, &a).unwrap().is_feasible());
    }

    #[test]
    fn single_item_upper_bound() {
        let m = ud(&[&[5]]);
        let a = Allocation::new(1, vec![ItemSet::singleton(0)]).unwrap();
        match difference_constraint_pricing(&m, &a).unwrap() {
            FeasibilityResult::Feasible(p) => {
                assert!(p[0] >= Value::from_integer(0.into()));
                assert!(p[0] <= Value::from_integer(5.into()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn suboptimal_allocation_yields_cycle() {
        // Swapping the items loses welfare, so no prices support it.
        let m = ud(&[&[2, 1], &[1, 2]]);
        let a = Allocation::new(2, vec![ItemSet::singleton(1), ItemSet::singleton(0)]).unwrap();
        match difference_constraint_pricing(&m, &a).unwrap() {
            FeasibilityResult::Infeasible { witness } => {
                assert!(!lp_feasibility(&witness).is_feasible());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_multi_item_bundles() {
        let m = ud(&[&[2, 1]]);
        let a = Allocation::new(2, vec![ItemSet::full(2)]).unwrap();
        assert!(matches!(
            difference_constraint_pricing(&m, &a),
            Err(Error::InvalidAllocation(_))
        ));
    }
}
