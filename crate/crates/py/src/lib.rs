//! Python bindings. Items and agents are 0-indexed; prices are
//! `fractions.Fraction`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kdemand::format::{format_value, parse_instance, parse_prices, serialize_market};
use kdemand::pricing::{solve_walrasian, verify_we, EquilibriumResult, Rejection, WeVerdict};
use kdemand::reductions::{
    from_3dm3, from_3partition, random_market as generate_market, MarketClass, ThreeDm3Instance,
    ThreeDmReduction, ThreePartitionInstance,
};
use kdemand::wd::{dispatch, solve_with};
use kdemand::{Allocation, Algorithm, Budgets, ItemSet, Value};

create_exception!(pykdemand, KDemandError, PyValueError);

fn err(e: kdemand::Error) -> PyErr {
    KDemandError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_value(v),))
}

fn bundles_to_py(allocation: &Allocation) -> Vec<Vec<usize>> {
    allocation.bundles().iter().map(|b| b.to_vec()).collect()
}

fn allocation_from_py(market: &Market, bundles: Vec<Vec<usize>>) -> PyResult<Allocation> {
    let m = market.inner.item_count();
    let mut sets = Vec::with_capacity(bundles.len());
    for items in bundles {
        if let Some(&j) = items.iter().find(|&&j| j >= m) {
            return Err(err(kdemand::Error::ItemOutOfRange {
                item: j,
                item_count: m,
            }));
        }
        sets.push(items.into_iter().collect::<ItemSet>());
    }
    let allocation = Allocation::new(m, sets).map_err(err)?;
    market.inner.check_allocation(&allocation).map_err(err)?;
    Ok(allocation)
}

/// A validated market.
#[pyclass(frozen)]
struct Market {
    inner: kdemand::Market,
}

#[pymethods]
impl Market {
    /// Parses the text instance format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Market> {
        let file = parse_instance(text).map_err(err)?;
        Ok(Market { inner: file.market })
    }

    /// Canonical text form.
    fn to_text(&self) -> String {
        serialize_market(&self.inner)
    }

    #[getter]
    fn agent_count(&self) -> usize {
        self.inner.agent_count()
    }

    #[getter]
    fn item_count(&self) -> usize {
        self.inner.item_count()
    }

    fn value(&self, agent: usize, items: Vec<usize>) -> PyResult<u64> {
        if agent >= self.inner.agent_count() {
            return Err(KDemandError::new_err(format!("no agent {agent}")));
        }
        self.inner
            .eval(agent, items.into_iter().collect())
            .map_err(err)
    }

    fn welfare(&self, allocation: Vec<Vec<usize>>) -> PyResult<u64> {
        let allocation = allocation_from_py(self, allocation)?;
        self.inner.social_welfare(&allocation).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Market(agents={}, items={})",
            self.inner.agent_count(),
            self.inner.item_count()
        )
    }
}

/// Optimal allocation, optionally forcing a solver by tag.
#[pyfunction]
#[pyo3(signature = (market, algorithm=None))]
fn winner<'py>(
    py: Python<'py>,
    market: &Market,
    algorithm: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let budgets = Budgets::default();
    let result = match algorithm {
        Some(tag) => {
            let algo: Algorithm = tag.parse().map_err(err)?;
            solve_with(&market.inner, algo, &budgets)
        }
        None => dispatch(&market.inner, &budgets),
    }
    .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("algorithm", result.algorithm.tag())?;
    out.set_item("allocation", bundles_to_py(&result.allocation))?;
    out.set_item("welfare", result.welfare)?;
    Ok(out)
}

/// Full equilibrium computation. `prices` is None when no equilibrium
/// exists.
#[pyfunction]
fn solve<'py>(py: Python<'py>, market: &Market) -> PyResult<Bound<'py, PyDict>> {
    let result = solve_walrasian(&market.inner, &Budgets::default()).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("equilibrium", result.is_equilibrium())?;
    out.set_item("allocation", bundles_to_py(result.allocation()))?;
    out.set_item("welfare", result.welfare())?;
    match &result {
        EquilibriumResult::Equilibrium {
            pricing, algorithm, ..
        } => {
            let prices = pricing
                .prices()
                .iter()
                .map(|p| fraction(py, p))
                .collect::<PyResult<Vec<_>>>()?;
            out.set_item("algorithm", algorithm.tag())?;
            out.set_item("prices", prices)?;
        }
        EquilibriumResult::NoEquilibrium {
            algorithm, witness, ..
        } => {
            out.set_item("algorithm", algorithm.tag())?;
            out.set_item("prices", py.None())?;
            out.set_item("witness", witness.to_string())?;
        }
    }
    Ok(out)
}

/// Returns `(accepted, reason)`; `reason` is None when accepted.
#[pyfunction]
fn verify(
    market: &Market,
    allocation: Vec<Vec<usize>>,
    prices: Vec<Bound<'_, PyAny>>,
) -> PyResult<(bool, Option<String>)> {
    let allocation = allocation_from_py(market, allocation)?;
    let spec = prices
        .iter()
        .map(|p| p.str().map(|s| s.to_string()))
        .collect::<PyResult<Vec<_>>>()?
        .join(",");
    let pricing = parse_prices(&spec, market.inner.item_count()).map_err(err)?;
    let verdict =
        verify_we(&market.inner, &allocation, &pricing, &Budgets::default()).map_err(err)?;
    Ok(match verdict {
        WeVerdict::Accept => (true, None),
        WeVerdict::Reject(Rejection::UnallocatedPriced { item, price }) => (
            false,
            Some(format!(
                "item {item} is unallocated at price {}",
                format_value(&price)
            )),
        ),
        WeVerdict::Reject(Rejection::Envy { agent, bundle, .. }) => (
            false,
            Some(format!("agent {agent} prefers bundle {bundle}")),
        ),
    })
}

/// Seeded random market. `cls` is one of unit-demand, additive,
/// budget-additive, single-minded, pair, pair-mixed, k-demand, xos.
#[pyfunction]
#[pyo3(signature = (cls, agents, items, max_value, k, seed))]
fn random_market(
    cls: &str,
    agents: usize,
    items: usize,
    max_value: u64,
    k: usize,
    seed: u64,
) -> PyResult<Market> {
    let class = match cls {
        "unit-demand" => MarketClass::UnitDemand,
        "additive" => MarketClass::Additive,
        "budget-additive" => MarketClass::BudgetAdditive,
        "single-minded" => MarketClass::SingleMinded,
        "pair" => MarketClass::MultiMindedPair,
        "pair-mixed" => MarketClass::PairMixed,
        "k-demand" => MarketClass::KDemandTable,
        "xos" => MarketClass::Xos,
        other => return Err(KDemandError::new_err(format!("unknown class `{other}`"))),
    };
    let inner = generate_market(class, agents, items, max_value, k, seed).map_err(err)?;
    Ok(Market { inner })
}

/// Market of the 3DM(3) reduction, or None when some x is in no triple.
#[pyfunction]
fn reduce_3dm3(q: usize, triples: Vec<(usize, usize, usize)>) -> PyResult<Option<Market>> {
    let triples = triples.into_iter().map(|(x, y, z)| [x, y, z]).collect();
    let instance = ThreeDm3Instance::new(q, triples).map_err(err)?;
    Ok(match from_3dm3(&instance).map_err(err)? {
        ThreeDmReduction::Market(inner) => Some(Market { inner }),
        ThreeDmReduction::TriviallyUnsatisfiable { .. } => None,
    })
}

/// Market of the 3-partition reduction.
#[pyfunction]
#[pyo3(signature = (values, n, strict=false))]
fn reduce_3partition(values: Vec<u64>, n: usize, strict: bool) -> PyResult<Market> {
    let instance = ThreePartitionInstance::new(values, n, strict).map_err(err)?;
    let inner = from_3partition(&instance, Budgets::default().bundles).map_err(err)?;
    Ok(Market { inner })
}

#[pymodule]
fn pykdemand(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("KDemandError", m.py().get_type::<KDemandError>())?;
    m.add_class::<Market>()?;
    m.add_function(wrap_pyfunction!(winner, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(random_market, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_3dm3, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_3partition, m)?)?;
    Ok(())
}
