//! Python bindings. Qubit indices are 0-based here; the JSON entry points
//! (`analyze`, `enumerate_json`, ...) use the 1-based file formats.

use std::collections::BTreeMap;

use mbqc_cli::{CliError, PairArg};
use mbqc_core::formats::RelationFile;
use mbqc_core::oracle::{self, MbqcProgram};
use mbqc_core::processing;
use mbqc_core::stabilizer::graph_state_tableau;
use mbqc_core::temporal;
use mbqc_core::transforms;
use mbqc_core::{BitMat, Bits, ExtremalPair, Frame, GraphSpec, OrderKind, ProcessingRelations};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cli_err(e: CliError) -> PyErr {
    PyRuntimeError::new_err(format!("exit {}: {}", e.code, e.message))
}

fn to_matrix(rows: &[Vec<u8>], ncols: usize) -> PyResult<BitMat> {
    let mut m = BitMat::zeros(rows.len(), ncols);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(err(format!("row {i} has length {}, expected {ncols}", r.len())));
        }
        for (j, &v) in r.iter().enumerate() {
            if v > 1 {
                return Err(err(format!("entry ({i}, {j}) is {v}")));
            }
            m.set(i, j, v == 1);
        }
    }
    Ok(m)
}

fn frames_or_default(frames: Option<Vec<String>>, n: usize) -> PyResult<Vec<Frame>> {
    match frames {
        None => Ok(vec![Frame::XY; n]),
        Some(f) => f.iter().map(|s| s.parse::<Frame>().map_err(err)).collect(),
    }
}

fn bits_from(v: &[u8]) -> PyResult<Bits> {
    if v.iter().any(|&b| b > 1) {
        return Err(err("bits must be 0 or 1"));
    }
    Ok(Bits::from_u8(v))
}

// `Vec<u8>` would reach Python as `bytes`.
fn bits_to(b: &Bits) -> Vec<u32> {
    (0..b.len()).map(|i| b.get(i) as u32).collect()
}

fn rows(m: &BitMat) -> Vec<Vec<u32>> {
    (0..m.nrows()).map(|r| bits_to(m.row(r))).collect()
}

/// Stabilizer tableau `(Φ || S)` with per-qubit measurement frames.
#[pyclass(frozen, module = "mbqc_temporal")]
struct Tableau {
    inner: mbqc_core::Tableau,
}

#[pymethods]
impl Tableau {
    #[new]
    #[pyo3(signature = (phi, s, frames=None))]
    fn new(phi: Vec<Vec<u8>>, s: Vec<Vec<u8>>, frames: Option<Vec<String>>) -> PyResult<Self> {
        let n = phi.len();
        let frames = frames_or_default(frames, n)?;
        let inner = mbqc_core::Tableau::new(to_matrix(&phi, n)?, to_matrix(&s, n)?, frames).map_err(err)?;
        Ok(Self { inner })
    }

    /// Graph state on `n` vertices.
    #[staticmethod]
    #[pyo3(signature = (n, edges, frames=None))]
    fn graph(n: usize, edges: Vec<(usize, usize)>, frames: Option<Vec<String>>) -> PyResult<Self> {
        let g = GraphSpec::new(n, edges).map_err(err)?;
        let inner = graph_state_tableau(&g, &frames_or_default(frames, n)?).map_err(err)?;
        Ok(Self { inner })
    }

    /// Generators given as Pauli strings such as `"XZI"`.
    #[staticmethod]
    #[pyo3(signature = (paulis, frames=None))]
    fn from_paulis(paulis: Vec<String>, frames: Option<Vec<String>>) -> PyResult<Self> {
        let refs: Vec<&str> = paulis.iter().map(String::as_str).collect();
        let frames = frames_or_default(frames, paulis.len())?;
        let inner = mbqc_core::Tableau::from_paulis(&refs, frames).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn phi(&self) -> Vec<Vec<u32>> {
        rows(self.inner.phi())
    }

    #[getter]
    fn s(&self) -> Vec<Vec<u32>> {
        rows(self.inner.s())
    }

    #[getter]
    fn frames(&self) -> Vec<String> {
        self.inner.frames().iter().map(|f| f.to_string()).collect()
    }

    fn pauli_strings(&self) -> Vec<String> {
        (0..self.inner.n()).map(|r| self.inner.pauli_string(r)).collect()
    }

    fn flip_frame(&self, q: usize) -> PyResult<Self> {
        if q >= self.inner.n() {
            return Err(err(format!("qubit {q} out of range")));
        }
        Ok(Self {
            inner: self.inner.flip_frame(q),
        })
    }

    fn same_group(&self, other: &Tableau) -> bool {
        self.inner.same_group(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!("Tableau({:?}, frames={:?})", self.pauli_strings(), self.frames())
    }
}

/// Processing relations `q = T s + H g`, `o = Z s + R g` for one pair.
#[pyclass(frozen, module = "mbqc_temporal")]
struct Relations {
    inner: ProcessingRelations,
}

#[pymethods]
impl Relations {
    #[new]
    fn new(
        i_gauge: Vec<usize>,
        o_comp: Vec<usize>,
        t: Vec<Vec<u8>>,
        h: Vec<Vec<u8>>,
        z: Vec<Vec<u8>>,
        r: Vec<Vec<u8>>,
    ) -> PyResult<Self> {
        let n = t.len();
        let pair = ExtremalPair::new(i_gauge, o_comp);
        let k = pair.i_gauge.len();
        let inner = ProcessingRelations {
            t: to_matrix(&t, n)?,
            h: to_matrix(&h, k)?,
            z: to_matrix(&z, n)?,
            r: to_matrix(&r, k)?,
            pair,
        };
        inner.check_shapes().map_err(err)?;
        Ok(Self { inner })
    }

    /// Parses the 1-based JSON relation format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: RelationFile = serde_json::from_str(text).map_err(err)?;
        Ok(Self {
            inner: file.to_relations().map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&RelationFile::from_relations(&self.inner)).expect("serializes")
    }

    #[getter]
    fn i_gauge(&self) -> Vec<usize> {
        self.inner.pair.i_gauge.clone()
    }

    #[getter]
    fn o_comp(&self) -> Vec<usize> {
        self.inner.pair.o_comp.clone()
    }

    #[getter(T)]
    fn t(&self) -> Vec<Vec<u32>> {
        rows(&self.inner.t)
    }

    #[getter(H)]
    fn h(&self) -> Vec<Vec<u32>> {
        rows(&self.inner.h)
    }

    #[getter(Z)]
    fn z(&self) -> Vec<Vec<u32>> {
        rows(&self.inner.z)
    }

    #[getter(R)]
    fn r(&self) -> Vec<Vec<u32>> {
        rows(&self.inner.r)
    }

    fn basis_choice(&self, s: Vec<u8>, g: Vec<u8>) -> PyResult<Vec<u32>> {
        Ok(bits_to(&self.inner.basis_choice(&bits_from(&s)?, &bits_from(&g)?)))
    }

    fn output(&self, s: Vec<u8>, g: Vec<u8>) -> PyResult<Vec<u32>> {
        Ok(bits_to(&self.inner.output(&bits_from(&s)?, &bits_from(&g)?)))
    }

    fn __eq__(&self, other: &Relations) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Relations(i_gauge={:?}, o_comp={:?}, T={:?})", self.i_gauge(), self.o_comp(), self.t())
    }
}

type OrderTuple = (Vec<Vec<u32>>, Option<Vec<Vec<usize>>>, Option<Vec<usize>>);

/// Temporal relation of an influence matrix: `(closure, rounds or None, ctc witness or None)`.
#[pyfunction]
fn temporal_order(t: Vec<Vec<u8>>) -> PyResult<OrderTuple> {
    let n = t.len();
    let rel = temporal::closure(&to_matrix(&t, n)?);
    let c = rows(&rel.closure);
    Ok(match rel.kind {
        OrderKind::PartialOrder { rounds } => (c, Some(rounds), None),
        OrderKind::Ctc { witness } => (c, None, Some(witness)),
    })
}

#[pyfunction]
#[pyo3(signature = (tableau, limit=None))]
fn enumerate_pairs(tableau: &Tableau, limit: Option<usize>) -> Vec<Relations> {
    processing::enumerate_pairs(&tableau.inner, limit)
        .map(|(_, inner)| Relations { inner })
        .collect()
}

#[pyfunction]
fn relations_for_pair(tableau: &Tableau, i_gauge: Vec<usize>, o_comp: Vec<usize>) -> PyResult<Relations> {
    let inner = processing::relations_for_pair(&tableau.inner, &ExtremalPair::new(i_gauge, o_comp)).map_err(err)?;
    Ok(Relations { inner })
}

#[pyfunction]
fn relations_from_invariance(tableau: &Tableau, i_gauge: Vec<usize>, o_comp: Vec<usize>) -> PyResult<Relations> {
    let inner =
        transforms::relations_from_invariance(&tableau.inner, &ExtremalPair::new(i_gauge, o_comp)).map_err(err)?;
    Ok(Relations { inner })
}

#[pyfunction]
fn reconstruct(relations: &Relations) -> PyResult<Tableau> {
    let inner = processing::reconstruct_tableau(&relations.inner).map_err(err)?;
    Ok(Tableau { inner })
}

#[pyfunction]
fn flip_plane(relations: &Relations, a: usize) -> PyResult<Relations> {
    let rep = transforms::flip_plane(&relations.inner, a).map_err(err)?;
    Ok(Relations { inner: rep.relations })
}

#[pyfunction]
fn flipped_angle(phi: f64) -> f64 {
    transforms::flipped_angle(phi)
}

/// Diagonal-free flip of an influence matrix: `(T', plane_changes)`.
#[pyfunction]
fn modified_flip(t: Vec<Vec<u8>>, i: usize) -> PyResult<(Vec<Vec<u32>>, Vec<usize>)> {
    let n = t.len();
    let m = transforms::modified_flip(&to_matrix(&t, n)?, i).map_err(err)?;
    Ok((rows(&m.t), m.plane_changes))
}

type FlagRows = (Vec<u32>, Vec<u32>);

/// Self-loop removal: `(flipped tableau, new relations, (flag z, flag r))`.
#[pyfunction]
fn remove_ctc1(tableau: &Tableau, relations: &Relations, i: usize) -> PyResult<(Tableau, Relations, FlagRows)> {
    let rep = transforms::remove_ctc1(&tableau.inner, &relations.inner, i).map_err(err)?;
    let flag = rep.flag_bit.expect("removal reports a flag bit");
    Ok((
        Tableau {
            inner: rep.tableau.expect("removal reports the tableau"),
        },
        Relations { inner: rep.relations },
        (bits_to(&flag.z), bits_to(&flag.r)),
    ))
}

fn program(tableau: &Tableau, angles: Vec<f64>, relations: &Relations) -> PyResult<MbqcProgram> {
    MbqcProgram::new(tableau.inner.clone(), angles, relations.inner.clone()).map_err(err)
}

fn gauge_bits(prog: &MbqcProgram, gauge: Option<Vec<u8>>) -> PyResult<Bits> {
    match gauge {
        Some(g) => bits_from(&g),
        None => Ok(Bits::zeros(prog.gauge_len())),
    }
}

/// Exact output distribution keyed by bit strings.
#[pyfunction]
#[pyo3(signature = (tableau, angles, relations, gauge=None))]
fn run_exact(
    tableau: &Tableau,
    angles: Vec<f64>,
    relations: &Relations,
    gauge: Option<Vec<u8>>,
) -> PyResult<BTreeMap<String, f64>> {
    let prog = program(tableau, angles, relations)?;
    let g = gauge_bits(&prog, gauge)?;
    Ok(oracle::run_exact(&prog, &g).map_err(err)?.probs)
}

/// Renormalized post-selected distribution and the kept probability.
#[pyfunction]
#[pyo3(signature = (tableau, angles, relations, gauge=None))]
fn run_postselected(
    tableau: &Tableau,
    angles: Vec<f64>,
    relations: &Relations,
    gauge: Option<Vec<u8>>,
) -> PyResult<(BTreeMap<String, f64>, f64)> {
    let prog = program(tableau, angles, relations)?;
    let g = gauge_bits(&prog, gauge)?;
    let ps = oracle::run_postselected(&prog, &g).map_err(err)?;
    Ok((ps.distribution.probs, ps.success_prob))
}

/// Largest deviation of the conditional output distribution.
#[pyfunction]
fn verify_determinism(tableau: &Tableau, angles: Vec<f64>, relations: &Relations) -> PyResult<f64> {
    let prog = program(tableau, angles, relations)?;
    Ok(oracle::verify_determinism(&prog).map_err(err)?.max_deviation)
}

#[pyfunction]
fn randomness_check(tableau: &Tableau, angles: Vec<f64>, relations: &Relations, z: Vec<u8>, r: Vec<u8>) -> PyResult<f64> {
    let prog = program(tableau, angles, relations)?;
    oracle::randomness_check(&prog, &bits_from(&z)?, &bits_from(&r)?).map_err(err)
}

fn pair_arg(i_gauge: Option<Vec<usize>>, o_comp: Option<Vec<usize>>) -> PyResult<Option<PairArg>> {
    match (i_gauge, o_comp) {
        (Some(i_gauge), Some(o_comp)) => Ok(Some(PairArg { i_gauge, o_comp })),
        (None, None) => Ok(None),
        _ => Err(err("give both i_gauge and o_comp or neither")),
    }
}

/// JSON analyze report for a state file's text. Labels are 1-based.
#[pyfunction]
#[pyo3(signature = (state_json, i_gauge=None, o_comp=None))]
fn analyze(state_json: &str, i_gauge: Option<Vec<usize>>, o_comp: Option<Vec<usize>>) -> PyResult<String> {
    let pair = pair_arg(i_gauge, o_comp)?;
    mbqc_cli::cmd_analyze(state_json, pair.as_ref())
        .map(|v| v.to_string())
        .map_err(cli_err)
}

/// JSON state file reconstructed from relations or an analyze report.
#[pyfunction]
fn reconstruct_json(relations_json: &str) -> PyResult<String> {
    mbqc_cli::cmd_reconstruct(relations_json)
        .map(|v| v.to_string())
        .map_err(cli_err)
}

#[pyfunction]
#[pyo3(signature = (state_json, limit=None, orders_only=false))]
fn enumerate_json(state_json: &str, limit: Option<usize>, orders_only: bool) -> PyResult<Vec<String>> {
    mbqc_cli::cmd_enumerate(state_json, limit, orders_only)
        .map(|v| v.iter().map(|r| r.to_string()).collect())
        .map_err(cli_err)
}

#[pymodule]
fn mbqc_temporal(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Tableau>()?;
    m.add_class::<Relations>()?;
    m.add_function(wrap_pyfunction!(temporal_order, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(relations_for_pair, m)?)?;
    m.add_function(wrap_pyfunction!(relations_from_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(flip_plane, m)?)?;
    m.add_function(wrap_pyfunction!(flipped_angle, m)?)?;
    m.add_function(wrap_pyfunction!(modified_flip, m)?)?;
    m.add_function(wrap_pyfunction!(remove_ctc1, m)?)?;
    m.add_function(wrap_pyfunction!(run_exact, m)?)?;
    m.add_function(wrap_pyfunction!(run_postselected, m)?)?;
    m.add_function(wrap_pyfunction!(verify_determinism, m)?)?;
    m.add_function(wrap_pyfunction!(randomness_check, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_json, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_json, m)?)?;
    Ok(())
}
