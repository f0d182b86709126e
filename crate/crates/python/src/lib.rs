//! Python bindings for the toolkit's main types and operations. Exact
//! rationals cross the boundary as `"p/q"` strings; distances as floats.

use outerlab::aut::Automorphism;
use outerlab::graph::{rational_from_string, rational_to_string, MarkedGraph};
use outerlab::laminations::RationalLamination;
use outerlab::words::ConjClass;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: outerlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Automorphism")]
#[derive(Clone)]
struct PyAutomorphism {
    inner: Automorphism,
}

#[pymethods]
impl PyAutomorphism {
    #[new]
    fn new(images: Vec<String>, inverse_images: Vec<String>) -> PyResult<Self> {
        let im: Vec<&str> = images.iter().map(String::as_str).collect();
        let inv: Vec<&str> = inverse_images.iter().map(String::as_str).collect();
        Ok(PyAutomorphism {
            inner: Automorphism::parse(&im, &inv).map_err(err)?,
        })
    }

    #[staticmethod]
    fn golden() -> Self {
        PyAutomorphism {
            inner: Automorphism::golden(),
        }
    }

    fn rank(&self) -> u8 {
        self.inner.rank()
    }

    fn images(&self) -> Vec<String> {
        self.inner.images().iter().map(|w| w.to_string()).collect()
    }

    fn apply(&self, word: &str) -> PyResult<String> {
        let w = outerlab::words::Word::parse(word, self.inner.rank()).map_err(err)?;
        Ok(self.inner.apply(&w).to_string())
    }

    fn inverse(&self) -> Self {
        PyAutomorphism {
            inner: self.inner.inverse(),
        }
    }

    fn compose(&self, other: &PyAutomorphism) -> PyResult<Self> {
        Ok(PyAutomorphism {
            inner: self.inner.compose(&other.inner).map_err(err)?,
        })
    }

    fn pow(&self, k: i64) -> Self {
        PyAutomorphism {
            inner: self.inner.pow(k),
        }
    }

    fn is_inner(&self) -> bool {
        self.inner.is_inner().is_inner()
    }

    fn iwip_heuristic(&self) -> bool {
        outerlab::aut::iwip_heuristic(&self.inner).passed()
    }

    fn __repr__(&self) -> String {
        format!("Automorphism({:?})", self.images())
    }
}

#[pyclass(name = "MarkedGraph")]
#[derive(Clone)]
struct PyMarkedGraph {
    inner: MarkedGraph,
}

#[pymethods]
impl PyMarkedGraph {
    /// Rose with the given petal lengths ("p/q" strings).
    #[staticmethod]
    fn rose(lengths: Vec<String>) -> PyResult<Self> {
        let ls = parse_lengths(&lengths)?;
        Ok(PyMarkedGraph {
            inner: outerlab::graph::rose(ls.len() as u8, ls).map_err(err)?,
        })
    }

    #[staticmethod]
    fn standard_rose(rank: u8) -> Self {
        PyMarkedGraph {
            inner: outerlab::graph::standard_rose(rank),
        }
    }

    #[staticmethod]
    fn theta(lengths: Vec<String>) -> PyResult<Self> {
        let ls: [outerlab::Rational; 3] = parse_lengths(&lengths)?
            .try_into()
            .map_err(|_| PyValueError::new_err("theta takes three lengths"))?;
        Ok(PyMarkedGraph {
            inner: outerlab::graph::theta(ls).map_err(err)?,
        })
    }

    #[staticmethod]
    fn barbell(lengths: Vec<String>) -> PyResult<Self> {
        let ls: [outerlab::Rational; 3] = parse_lengths(&lengths)?
            .try_into()
            .map_err(|_| PyValueError::new_err("barbell takes three lengths"))?;
        Ok(PyMarkedGraph {
            inner: outerlab::graph::barbell(ls).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMarkedGraph {
            inner: MarkedGraph::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn rank(&self) -> u8 {
        self.inner.rank()
    }

    fn act(&self, phi: &PyAutomorphism) -> PyResult<Self> {
        Ok(PyMarkedGraph {
            inner: self.inner.act(&phi.inner).map_err(err)?,
        })
    }

    /// Exact translation length of a conjugacy class, as "p/q".
    fn translation_length(&self, word: &str) -> PyResult<String> {
        let c = ConjClass::parse(word, self.inner.rank()).map_err(err)?;
        Ok(rational_to_string(
            &self.inner.translation_length(&c).map_err(err)?,
        ))
    }

    fn systole(&self) -> String {
        rational_to_string(&outerlab::candidates::systole(&self.inner))
    }

    /// Candidate classes with tags and exact lengths.
    fn candidates(&self) -> PyResult<Vec<(String, String, String)>> {
        let mut out = Vec::new();
        for (c, tag) in &outerlab::candidates::candidates(&self.inner).loops {
            out.push((
                c.to_string(),
                format!("{tag:?}"),
                rational_to_string(&self.inner.translation_length(c).map_err(err)?),
            ));
        }
        Ok(out)
    }

    /// Shadow in the free factor graph: (basic class, rank-1 factor).
    fn shadow(&self) -> PyResult<(String, String)> {
        let s = outerlab::factorgraph::upsilon(&self.inner).map_err(err)?;
        Ok((s.class.to_string(), s.vertex.generators[0].to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "MarkedGraph(rank={}, edges={})",
            self.inner.rank(),
            self.inner.num_edges()
        )
    }
}

fn parse_lengths(lengths: &[String]) -> PyResult<Vec<outerlab::Rational>> {
    lengths
        .iter()
        .map(|s| rational_from_string(s).map_err(err))
        .collect()
}

fn parse_support(support: Vec<(String, String)>, rank: u8) -> PyResult<RationalLamination> {
    let sup = support
        .into_iter()
        .map(|(w, c)| {
            Ok((
                ConjClass::parse(&w, rank).map_err(err)?,
                rational_from_string(&c).map_err(err)?,
            ))
        })
        .collect::<PyResult<Vec<_>>>()?;
    RationalLamination::new(sup, rank).map_err(err)
}

/// Exact stretch factors and the symmetrized distance between two graphs:
/// returns (forward "p/q", forward witness, backward "p/q", backward
/// witness, d as float).
#[pyfunction]
fn distance(s: &PyMarkedGraph, t: &PyMarkedGraph) -> PyResult<(String, String, String, String, f64)> {
    let d = outerlab::lipschitz::sym_distance(&s.inner, &t.inner).map_err(err)?;
    Ok((
        rational_to_string(&d.forward.value),
        d.forward.witness.to_string(),
        rational_to_string(&d.backward.value),
        d.backward.witness.to_string(),
        d.log(),
    ))
}

/// Whitehead primitivity: a certified basis containing the class, or None.
#[pyfunction]
fn primitive_basis(word: &str, rank: u8) -> PyResult<Option<Vec<String>>> {
    let c = ConjClass::parse(word, rank).map_err(err)?;
    Ok(outerlab::whitehead::is_primitive(&c)
        .map_err(err)?
        .map(|cert| cert.basis().iter().map(|w| w.to_string()).collect()))
}

/// Common proper free factor decision: ("fills", []) or ("contained",
/// basis) or ("inconclusive", []).
#[pyfunction]
fn common_factor(words: Vec<String>, rank: u8) -> PyResult<(String, Vec<String>)> {
    let classes = words
        .iter()
        .map(|w| ConjClass::parse(w, rank).map_err(err))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(
        match outerlab::whitehead::common_proper_factor(&classes).map_err(err)? {
            outerlab::whitehead::FactorVerdict::Fills => ("fills".into(), vec![]),
            outerlab::whitehead::FactorVerdict::Contained { factor } => (
                "contained".into(),
                factor.iter().map(|w| w.to_string()).collect(),
            ),
            outerlab::whitehead::FactorVerdict::Inconclusive => ("inconclusive".into(), vec![]),
        },
    )
}

/// Minimize a weighted length function over the ε-thick part; returns
/// (graph, exact value "p/q").
#[pyfunction]
fn minimize(
    support: Vec<(String, String)>,
    eps: &str,
    rank: u8,
) -> PyResult<(PyMarkedGraph, String)> {
    let mu = parse_support(support, rank)?;
    let eps = rational_from_string(eps).map_err(err)?;
    let (g, v) = outerlab::minima::min_search(&mu, &eps, &outerlab::graph::standard_rose(rank))
        .map_err(err)?;
    Ok((PyMarkedGraph { inner: g }, rational_to_string(&v)))
}

/// Line of minima for the golden pair: returns (kappa_emp, list of
/// (t, min value) pairs as "p/q" strings).
#[pyfunction]
fn golden_axis(depth: u32, half_steps: i64, eps: &str) -> PyResult<(f64, Vec<(String, String)>)> {
    let spec = outerlab::laminations::IwipAxisSpec::new(
        Automorphism::golden(),
        ConjClass::parse("a", 2).map_err(err)?,
        depth,
    )
    .map_err(err)?;
    let (mu, nu) = outerlab::laminations::iwip_laminations(&spec).map_err(err)?;
    let eps = rational_from_string(eps).map_err(err)?;
    let grid: Vec<outerlab::Rational> = (-4 * half_steps..=4 * half_steps)
        .map(|i| outerlab::ratio(i, half_steps))
        .collect();
    let gamma = outerlab::minima::line_of_minima(&mu, &nu, &eps, &grid).map_err(err)?;
    let rows = (0..gamma.len())
        .map(|i| {
            (
                rational_to_string(&gamma.grid[i]),
                rational_to_string(&gamma.values[i]),
            )
        })
        .collect();
    Ok((gamma.kappa_emp, rows))
}

#[pymodule]
fn outerlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAutomorphism>()?;
    m.add_class::<PyMarkedGraph>()?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(primitive_basis, m)?)?;
    m.add_function(wrap_pyfunction!(common_factor, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(golden_axis, m)?)?;
    Ok(())
}
