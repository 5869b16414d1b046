//! Python bindings for `ktri-core`.
//!
//! Rationals cross the boundary as `"p/q"` strings (ints are accepted on
//! input), sets as lists of atoms, and structured reports as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use ktri_core::corpus::{
    gen_hump_family, gen_measuroid, gen_random_ksubadditive, gen_scaled_family, load_payload, verify_corpus,
    write_corpus, Payload, ScaleRule,
};
use ktri_core::drewnowski::{
    extract_continuous_subsequence, verify_restricted_continuity, CountableSetFunction, DisjointRule, ExtractionConfig,
};
use ktri_core::lattice::{
    d_converges, fremlin_combine, parse_rational, regulator_sup, IndexMap, LatticeValue, Rational,
    Regulator as CoreRegulator,
};
use ktri_core::limits::{schur_gap, theorem_harness, HarnessConfig, HarnessInputs, SetFunctionFamily, Theorem};
use ktri_core::setfun::{
    check_k_triangular, finite_chain_check, is_monotone, k_triangular_witness, minimal_k, semivariation,
    semivariation_table, SetFunction as CoreSetFunction, WeightRule,
};
use ktri_core::AtomSet;

create_exception!(ktri, KtriError, PyException, "Raised for invalid inputs and failed preconditions.");

/// `(set, value, argmax)`.
type SetRow = (Vec<usize>, String, Option<Vec<usize>>);
/// `(j, gap, witness)`.
type GapRow = (usize, String, Option<Vec<usize>>);

fn err(e: ktri_core::Error) -> PyErr {
    KtriError::new_err(e.to_string())
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ktri_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// A rational given as `int` or `"p/q"` string.
#[derive(FromPyObject)]
enum RationalArg {
    Int(i64),
    Text(String),
}

impl RationalArg {
    fn get(&self) -> PyResult<Rational> {
        match self {
            RationalArg::Int(i) => Ok(Rational::from_integer((*i).into())),
            RationalArg::Text(s) => parse_rational(s).py(),
        }
    }
}

fn value(arg: &RationalArg) -> PyResult<LatticeValue> {
    Ok(LatticeValue::Scalar(arg.get()?))
}

fn atom_set(atoms: Vec<usize>) -> PyResult<AtomSet> {
    AtomSet::from_atoms(atoms).py()
}

fn atoms_of(set: AtomSet) -> Vec<usize> {
    set.atoms().collect()
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| KtriError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn index_maps(phis: Vec<Vec<usize>>) -> PyResult<Vec<IndexMap>> {
    phis.into_iter().map(|p| IndexMap::new(p).py()).collect()
}

/// Set function on the power set of `{1..n}`.
#[pyclass(name = "SetFunction", module = "ktri", frozen, skip_from_py_object)]
#[derive(Clone)]
struct SetFunction {
    inner: CoreSetFunction,
}

#[pymethods]
impl SetFunction {
    /// `m(A) = |Σ_{i∈A} (-1)^{i+1}/i²|` on `n` atoms.
    #[staticmethod]
    fn measuroid(n: usize) -> PyResult<Self> {
        Ok(Self { inner: gen_measuroid(n).py()? })
    }

    /// Series-backed function from a weight rule such as `"alternating-power 2"`.
    #[staticmethod]
    fn from_rule(rule: &str, n: usize) -> PyResult<Self> {
        let rule: WeightRule = rule.parse().py()?;
        Ok(Self { inner: CoreSetFunction::from_rule(&rule, n).py()? })
    }

    /// Explicit table indexed by bitmask (atom `a` is bit `a - 1`).
    #[staticmethod]
    fn from_table(n: usize, values: Vec<RationalArg>) -> PyResult<Self> {
        let values = values.iter().map(value).collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: CoreSetFunction::from_table(n, values).py()? })
    }

    /// Rejection-sampled k-subadditive table.
    #[staticmethod]
    #[pyo3(signature = (n, k, bound=RationalArg::Int(1), seed=0))]
    fn random_ksubadditive(n: usize, k: RationalArg, bound: RationalArg, seed: u64) -> PyResult<Self> {
        let draw = gen_random_ksubadditive(n, &k.get()?, &bound.get()?, seed).py()?;
        Ok(Self { inner: draw.function })
    }

    /// Accepts a set function record or a fixture holding one.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match load_payload(text).py()? {
            Payload::Function { function } | Payload::Factor { function, .. } => Ok(Self { inner: function }),
            _ => Err(KtriError::new_err("payload is not a single set function")),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| KtriError::new_err(e.to_string()))
    }

    #[getter]
    fn atoms(&self) -> usize {
        self.inner.atoms()
    }

    fn eval(&self, set: Vec<usize>) -> PyResult<String> {
        let set = atom_set(set)?;
        self.inner.algebra().check_member(set).py()?;
        Ok(self.inner.eval(set).to_string())
    }

    /// All values in bitmask order.
    fn values(&self) -> PyResult<Vec<String>> {
        Ok(self.inner.values().py()?.iter().map(|v| v.to_string()).collect())
    }

    fn scaled(&self, c: RationalArg) -> PyResult<Self> {
        Ok(Self { inner: self.inner.scaled(&c.get()?).py()? })
    }

    fn semivariation(&self) -> PyResult<Self> {
        Ok(Self { inner: semivariation(&self.inner).py()? })
    }

    /// Rows `(set, v(m)(set), argmax)` in bitmask order.
    fn semivariation_table(&self) -> PyResult<Vec<SetRow>> {
        let table = semivariation_table(&self.inner).py()?;
        Ok(self
            .inner
            .algebra()
            .members()
            .map(|s| {
                let i = s.bits() as usize;
                (atoms_of(s), table.values[i].to_string(), table.argmax.as_ref().map(|a| atoms_of(a[i])))
            })
            .collect())
    }

    #[pyo3(signature = (k=RationalArg::Int(1)))]
    fn check_k_triangular<'py>(&self, py: Python<'py>, k: RationalArg) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &check_k_triangular(&self.inner, &k.get()?).py()?)
    }

    #[pyo3(signature = (k=RationalArg::Int(1)))]
    fn is_k_triangular(&self, k: RationalArg) -> PyResult<bool> {
        Ok(k_triangular_witness(&self.inner, &k.get()?).py()?.is_none())
    }

    /// First disjoint pair `(A, B)` breaking k-triangularity.
    #[pyo3(signature = (k=RationalArg::Int(1)))]
    fn k_triangular_witness(&self, k: RationalArg) -> PyResult<Option<(Vec<usize>, Vec<usize>)>> {
        Ok(k_triangular_witness(&self.inner, &k.get()?).py()?.map(|(a, b)| (atoms_of(a), atoms_of(b))))
    }

    fn minimal_k(&self) -> PyResult<Option<String>> {
        Ok(minimal_k(&self.inner).py()?.map(|k| ktri_core::lattice::format_rational(&k)))
    }

    fn is_monotone<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &is_monotone(&self.inner).py()?)
    }

    fn finite_chain_check<'py>(
        &self,
        py: Python<'py>,
        sets: Vec<Vec<usize>>,
        k: RationalArg,
    ) -> PyResult<Bound<'py, PyAny>> {
        let sets = sets.into_iter().map(atom_set).collect::<PyResult<Vec<_>>>()?;
        to_py(py, &finite_chain_check(&self.inner, &sets, &k.get()?).py()?)
    }

    fn __repr__(&self) -> String {
        format!("SetFunction(atoms={}, carrier={})", self.inner.atoms(), self.inner.carrier())
    }
}

/// Double sequence `(a_{t,l})` of scalar values.
#[pyclass(name = "Regulator", module = "ktri", frozen, from_py_object)]
#[derive(Clone)]
struct Regulator {
    inner: CoreRegulator,
}

#[pymethods]
impl Regulator {
    #[new]
    fn new(entries: Vec<Vec<RationalArg>>) -> PyResult<Self> {
        let entries = entries
            .iter()
            .map(|row| row.iter().map(value).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: CoreRegulator::new(entries).py()? })
    }

    /// Combines member regulators into one dominating each of them.
    #[staticmethod]
    fn combine(regs: Vec<Regulator>, u: RationalArg) -> PyResult<Self> {
        let regs: Vec<CoreRegulator> = regs.into_iter().map(|r| r.inner).collect();
        Ok(Self { inner: fremlin_combine(&regs, &value(&u)?).py()? })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn entries(&self) -> Vec<Vec<String>> {
        self.inner.entries().iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect()
    }

    /// `⋁_t a_{t,φ(t)}` for the index map `phi` (1-based columns).
    fn sup(&self, phi: Vec<usize>) -> PyResult<String> {
        let phi = IndexMap::new(phi).py()?;
        Ok(regulator_sup(&self.inner, &phi).py()?.to_string())
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| KtriError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!("Regulator(rows={}, cols={})", self.inner.rows(), self.inner.cols())
    }
}

/// Sequence of set functions with optional limit and convergence regulator.
#[pyclass(name = "Family", module = "ktri", frozen)]
struct Family {
    inner: SetFunctionFamily,
}

#[pymethods]
impl Family {
    /// `m_j = (1 + 1/j)·m` for `j = 1..members`, converging to `m`.
    #[staticmethod]
    fn scaled(m: &SetFunction, members: usize) -> PyResult<Self> {
        Ok(Self { inner: gen_scaled_family(&m.inner, &ScaleRule::OnePlusInverse, members).py()? })
    }

    #[staticmethod]
    fn constant(m: &SetFunction, copies: usize) -> PyResult<Self> {
        Ok(Self { inner: SetFunctionFamily::constant(m.inner.clone(), copies).py()? })
    }

    /// `m_j(A) = 1` iff atom `j` lies in `A`, for `j = 1..n`; limit zero.
    #[staticmethod]
    fn hump(n: usize) -> PyResult<Self> {
        let humps: Vec<AtomSet> = (1..=n).map(AtomSet::singleton).collect();
        Ok(Self { inner: gen_hump_family(n, &humps).py()? })
    }

    /// Accepts a family record or a fixture holding one.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match load_payload(text).py()? {
            Payload::Family { family } => Ok(Self { inner: family }),
            _ => Err(KtriError::new_err("payload is not a family")),
        }
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| KtriError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Member `j`, 1-based.
    fn member(&self, j: usize) -> PyResult<SetFunction> {
        if j == 0 || j > self.inner.len() {
            return Err(KtriError::new_err(format!("member {j} outside 1..={}", self.inner.len())));
        }
        Ok(SetFunction { inner: self.inner.member(j).clone() })
    }

    fn limit(&self) -> Option<SetFunction> {
        self.inner.limit().map(|m| SetFunction { inner: m.clone() })
    }

    fn equibound(&self) -> String {
        self.inner.equibound().to_string()
    }

    /// Rows `(j, sup_E |m_j(E) - m_0(E)|, witness)`.
    #[pyo3(signature = (n=None))]
    fn schur_gap(&self, n: Option<usize>) -> PyResult<Vec<GapRow>> {
        let rows = schur_gap(&self.inner, n.unwrap_or(self.inner.algebra().atoms())).py()?;
        Ok(rows.into_iter().map(|r| (r.j, r.gap.to_string(), r.witness.map(atoms_of))).collect())
    }

    /// Runs one of `"BJ"`, `"N"`, `"VHS"`, `"S"` on singletons and tail chains.
    #[pyo3(signature = (theorem, k=RationalArg::Int(1), seed=0, random_phis=200))]
    fn harness<'py>(
        &self,
        py: Python<'py>,
        theorem: &str,
        k: RationalArg,
        seed: u64,
        random_phis: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let theorem: Theorem = theorem.parse().py()?;
        let inputs = HarnessInputs::defaults(self.inner.algebra().atoms()).py()?;
        let config = HarnessConfig { k: k.get()?, seed, random_phis };
        to_py(py, &theorem_harness(&self.inner, theorem, &inputs, &config).py()?)
    }

    fn __repr__(&self) -> String {
        format!("Family(members={}, atoms={})", self.inner.len(), self.inner.algebra().atoms())
    }
}

/// Certificate for `seq → limit` against `reg` over the given index maps.
#[pyfunction]
fn converges<'py>(
    py: Python<'py>,
    seq: Vec<RationalArg>,
    limit: RationalArg,
    reg: &Regulator,
    phis: Vec<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    let seq = seq.iter().map(value).collect::<PyResult<Vec<_>>>()?;
    to_py(py, &d_converges(&seq, &value(&limit)?, &reg.inner, &index_maps(phis)?).py()?)
}

/// Extraction trace plus its restricted-continuity certificate.
#[pyfunction]
#[pyo3(signature = (weights, levels, targets=None, sequence="singletons", width=64, depth=None, samples=32, seed=0))]
#[allow(clippy::too_many_arguments)]
fn drewnowski<'py>(
    py: Python<'py>,
    weights: &str,
    levels: usize,
    targets: Option<Vec<RationalArg>>,
    sequence: &str,
    width: u32,
    depth: Option<usize>,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rule: WeightRule = weights.parse().py()?;
    let m = CountableSetFunction::new(rule).py()?;
    let seq: DisjointRule = sequence.parse().py()?;
    let targets = targets.map(|t| t.iter().map(RationalArg::get).collect::<PyResult<Vec<_>>>()).transpose()?;
    let config = ExtractionConfig { width, ..ExtractionConfig::default() };
    let trace = extract_continuous_subsequence(&m, &seq, levels, targets, &config).py()?;
    let cert =
        verify_restricted_continuity(&trace, std::slice::from_ref(&m), depth.unwrap_or(levels), samples, seed).py()?;
    to_py(py, &serde_json::json!({ "trace": trace, "certificate": cert }))
}

/// Per-fixture checksum, regeneration and expectation results.
#[pyfunction]
#[pyo3(signature = (dir, regenerate=false))]
fn corpus_verify<'py>(py: Python<'py>, dir: &str, regenerate: bool) -> PyResult<Bound<'py, PyAny>> {
    let dir = std::path::Path::new(dir);
    if regenerate {
        write_corpus(dir).py()?;
    }
    to_py(py, &verify_corpus(dir).py()?)
}

#[pymodule]
fn ktri(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("KtriError", m.py().get_type::<KtriError>())?;
    m.add_class::<SetFunction>()?;
    m.add_class::<Regulator>()?;
    m.add_class::<Family>()?;
    m.add_function(wrap_pyfunction!(converges, m)?)?;
    m.add_function(wrap_pyfunction!(drewnowski, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_verify, m)?)?;
    Ok(())
}
