//! Python bindings: graphs, strategy runs, offline optima, sweeps and gadgets.
//!
//! Rationals cross the boundary as `fractions.Fraction`; inputs accept
//! anything whose `str()` parses as `p/q` (ints, Fractions, strings).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tadpole_core::adversaries;
use tadpole_core::engine::{cost_energy, cost_time, run, ChoiceStream, EngineConfig, Exploration, StaticOracle};
use tadpole_core::harness::{self, InstanceClass, InstanceParams, LowerBoundParams, Model, SweepConfig};
use tadpole_core::offline::{self, OptMethod};
use tadpole_core::strategies::PolicyId;
use tadpole_core::{Midpoint, Rational, WeightedGraph};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    obj.str()?.to_str()?.trim().parse().map_err(err)
}

fn rationals(objs: &[Bound<'_, PyAny>]) -> PyResult<Vec<Rational>> {
    objs.iter().map(rational).collect()
}

fn fraction<'py>(py: Python<'py>, r: Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.numer(), r.denom()))
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(err)
}

/// A cycle, tadpole or n-tadpole with exact weights and a start node.
#[pyclass(name = "Graph", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: WeightedGraph,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn cycle(weights: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let g = tadpole_core::build_cycle(&rationals(&weights)?).map_err(err)?;
        Ok(PyGraph { inner: g })
    }

    #[staticmethod]
    #[pyo3(signature = (cycle, attach, tail, start = "c0"))]
    fn tadpole(cycle: Vec<Bound<'_, PyAny>>, attach: usize, tail: Vec<Bound<'_, PyAny>>, start: &str) -> PyResult<Self> {
        let g = tadpole_core::build_tadpole(&rationals(&cycle)?, attach, &rationals(&tail)?, start).map_err(err)?;
        Ok(PyGraph { inner: g })
    }

    /// `tails` is a list of `(attach_index, weights)` pairs.
    #[staticmethod]
    #[pyo3(signature = (cycle, tails, start = "c0"))]
    fn n_tadpole(cycle: Vec<Bound<'_, PyAny>>, tails: Vec<(usize, Vec<Bound<'_, PyAny>>)>, start: &str) -> PyResult<Self> {
        let tails = tails
            .iter()
            .map(|(a, ws)| Ok((*a, rationals(ws)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let g = tadpole_core::build_n_tadpole(&rationals(&cycle)?, &tails, start).map_err(err)?;
        Ok(PyGraph { inner: g })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph {
            inner: WeightedGraph::parse(text).map_err(err)?,
        })
    }

    fn with_start(&self, label: &str) -> PyResult<Self> {
        Ok(PyGraph {
            inner: self.inner.with_start(label).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn start(&self) -> String {
        self.inner.start_label().to_string()
    }

    /// `"cycle"`, `"tadpole"` or `"n-tadpole"`.
    #[getter]
    fn shape(&self) -> &'static str {
        match self.inner.shape() {
            tadpole_core::Shape::Cycle => "cycle",
            tadpole_core::Shape::Tadpole { .. } => "tadpole",
            tadpole_core::Shape::NTadpole { .. } => "n-tadpole",
        }
    }

    #[getter]
    fn tails(&self) -> usize {
        self.inner.tails().len()
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn total_weight<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.total_weight())
    }

    fn distance<'py>(&self, py: Python<'py>, u: &str, v: &str) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.shortest_distance(u, v).map_err(err)?)
    }

    /// Midpoint and distance quantities of the cycle, seen from the start.
    fn geometry<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let g = &self.inner;
        let geo = tadpole_core::cycle_geometry(g);
        let d = PyDict::new(py);
        match geo.midpoint {
            Midpoint::Node(v) => d.set_item("v_mid", g.label(v))?,
            Midpoint::Edge { edge, offset } => {
                let e = g.edge(edge);
                d.set_item("e_mid", (g.label(e.a), g.label(e.b)))?;
                d.set_item("offset", fraction(py, offset)?)?;
            }
        }
        d.set_item("v_long", g.label(geo.v_long))?;
        d.set_item("v_short", g.label(geo.v_short))?;
        for (key, value) in [
            ("cycle_length", geo.cycle_length),
            ("d_long", geo.d_long),
            ("d_short", geo.d_short),
            ("e_mid_length", geo.e_mid_length),
            ("d_i", geo.d_i),
            ("d_t", geo.d_t),
        ] {
            d.set_item(key, fraction(py, value)?)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Graph({:?})", self.inner.to_line())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Outcome of one online run.
#[pyclass(name = "Exploration", frozen)]
struct PyExploration {
    inner: Exploration,
    choices: Vec<usize>,
}

#[pymethods]
impl PyExploration {
    #[getter]
    fn time<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, cost_time(&self.inner.trace))
    }

    #[getter]
    fn energy<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, cost_energy(&self.inner.trace))
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.graph.clone(),
        }
    }

    /// Random choices taken, in order.
    #[getter]
    fn choices(&self) -> Vec<usize> {
        self.choices.clone()
    }

    fn first_visits<'py>(&self, py: Python<'py>) -> PyResult<Vec<(String, Bound<'py, PyAny>)>> {
        self.inner
            .trace
            .first_visits
            .iter()
            .map(|(l, t)| Ok((l.clone(), fraction(py, *t)?)))
            .collect()
    }

    fn traversed_edges(&self) -> Vec<(String, String)> {
        self.inner.trace.traversed_edges()
    }

    fn trace_csv(&self) -> String {
        self.inner.trace.to_csv()
    }
}

fn agents(policy: PolicyId, k: Option<usize>) -> usize {
    k.unwrap_or(policy.default_agents())
}

/// Runs a strategy on a fully known graph revealed online.
#[pyfunction]
#[pyo3(signature = (graph, strategy, agents = None, seed = 0, choices = None))]
fn explore(graph: &PyGraph, strategy: &str, agents: Option<usize>, seed: u64, choices: Option<Vec<usize>>) -> PyResult<PyExploration> {
    let id: PolicyId = parse(strategy)?;
    let k = self::agents(id, agents);
    let mut policy = id.build(k).map_err(err)?;
    let mut stream = match choices {
        Some(script) => ChoiceStream::scripted(script),
        None => ChoiceStream::seeded(seed),
    };
    let mut oracle = StaticOracle::new(graph.inner.clone());
    let inner = run(policy.as_mut(), &mut oracle, k, &mut stream, &EngineConfig::default()).map_err(err)?;
    Ok(PyExploration {
        inner,
        choices: stream.log().iter().map(|&(_, c)| c).collect(),
    })
}

/// Offline optimum as `(makespan, method)`.
#[pyfunction]
#[pyo3(signature = (graph, agents, method = None))]
fn opt<'py>(py: Python<'py>, graph: &PyGraph, agents: usize, method: Option<&str>) -> PyResult<(Bound<'py, PyAny>, String)> {
    let (value, method) = match method {
        Some(m) => {
            let m: OptMethod = parse(m)?;
            (offline::opt_with_method(&graph.inner, agents, m).map_err(err)?.makespan, m)
        }
        None => offline::opt_value(&graph.inner, agents).map_err(err)?,
    };
    Ok((fraction(py, value)?, method.to_string()))
}

/// Optimal closed walks, one label list per agent.
#[pyfunction]
#[pyo3(signature = (graph, agents, method = "structured"))]
fn opt_plan(graph: &PyGraph, agents: usize, method: &str) -> PyResult<Vec<Vec<String>>> {
    let plan = offline::opt_with_method(&graph.inner, agents, parse(method)?).map_err(err)?;
    Ok(plan.walk_labels(&graph.inner))
}

/// Seeded random sweep; returns the summary as a dict.
#[pyfunction]
#[pyo3(signature = (class_, strategy, trials = 100, seed = 0, agents = None, model = "time", all_starts = false, tails = 2))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    class_: &str,
    strategy: &str,
    trials: usize,
    seed: u64,
    agents: Option<usize>,
    model: &str,
    all_starts: bool,
    tails: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let policy: PolicyId = parse(strategy)?;
    let class: InstanceClass = parse(class_)?;
    let summary = py
        .detach(|| {
            harness::cmd_sweep(&SweepConfig {
                class,
                params: InstanceParams {
                    tails,
                    ..InstanceParams::default()
                },
                trials,
                seed,
                policy,
                k: self::agents(policy, agents),
                model: parse(model)?,
                all_starts,
            })
            .map_err(err)
        })?;
    let d = PyDict::new(py);
    d.set_item("runs", summary.runs)?;
    d.set_item("max_ratio", summary.max_ratio.map(|r| fraction(py, r)).transpose()?)?;
    d.set_item("mean_ratio", summary.mean_ratio)?;
    d.set_item("bound", summary.bound.map(|r| fraction(py, r)).transpose()?)?;
    d.set_item("violations", summary.violations)?;
    d.set_item("worst_instance", summary.worst.as_ref().map(|w| w.instance.clone()))?;
    d.set_item("csv", summary.to_csv_row())?;
    Ok(d)
}

/// Runs a strategy against a lower-bound construction.
#[pyfunction]
#[pyo3(signature = (family, epsilon, strategy, j = None, tails = 2, agents = None))]
fn lowerbound<'py>(
    py: Python<'py>,
    family: &str,
    epsilon: &Bound<'py, PyAny>,
    strategy: &str,
    j: Option<usize>,
    tails: usize,
    agents: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut params = LowerBoundParams::new(parse(family)?, rational(epsilon)?, parse(strategy)?);
    params.j = j;
    params.tails = tails;
    params.k = agents;
    let r = harness::cmd_lowerbound(&params).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("online", fraction(py, r.online)?)?;
    d.set_item("opt", fraction(py, r.opt)?)?;
    d.set_item("ratio", fraction(py, r.ratio)?)?;
    d.set_item("model", r.model.to_string())?;
    d.set_item("expected", r.expected.map(|e| e.to_string()))?;
    d.set_item("holds", r.holds())?;
    d.set_item("graph", PyGraph { inner: r.graph })?;
    Ok(d)
}

/// The tadpole gadget on which lightest-edge-first exploration is slow.
#[pyfunction]
#[pyo3(signature = (epsilon, granularity = 10))]
fn ale_lb_tadpole(epsilon: &Bound<'_, PyAny>, granularity: usize) -> PyResult<PyGraph> {
    let inner = adversaries::make_ale_lb_tadpole(rational(epsilon)?, granularity).map_err(err)?;
    Ok(PyGraph { inner })
}

#[pyfunction]
fn energy_lb_cycle(epsilon: &Bound<'_, PyAny>) -> PyResult<PyGraph> {
    let inner = adversaries::make_energy_lb_cycle(rational(epsilon)?).map_err(err)?;
    Ok(PyGraph { inner })
}

#[pyfunction]
fn make_2_5_example(epsilon: &Bound<'_, PyAny>) -> PyResult<PyGraph> {
    let inner = adversaries::make_2_5_example(rational(epsilon)?).map_err(err)?;
    Ok(PyGraph { inner })
}

/// Names accepted by `strategy` arguments.
#[pyfunction]
fn strategies() -> Vec<&'static str> {
    PolicyId::ALL.iter().map(|p| p.name()).collect()
}

#[pyfunction]
fn competitive_ratio<'py>(py: Python<'py>, online: &Bound<'py, PyAny>, opt: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let r = tadpole_core::engine::competitive_ratio(rational(online)?, rational(opt)?).map_err(err)?;
    fraction(py, r)
}

#[pymodule]
fn tadpole_explore(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyExploration>()?;
    m.add_function(wrap_pyfunction!(explore, m)?)?;
    m.add_function(wrap_pyfunction!(opt, m)?)?;
    m.add_function(wrap_pyfunction!(opt_plan, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(lowerbound, m)?)?;
    m.add_function(wrap_pyfunction!(ale_lb_tadpole, m)?)?;
    m.add_function(wrap_pyfunction!(energy_lb_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(make_2_5_example, m)?)?;
    m.add_function(wrap_pyfunction!(strategies, m)?)?;
    m.add_function(wrap_pyfunction!(competitive_ratio, m)?)?;
    m.add("MODELS", [Model::Time.to_string(), Model::Energy.to_string()])?;
    Ok(())
}
