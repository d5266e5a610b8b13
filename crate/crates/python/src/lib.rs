//! Python bindings: `check` runs a refinement check and returns the report
//! as a dict, `translate` returns the SAL text of one specification.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use zrefine::emit::emit_sal;
use zrefine::mc::{check_refinement, oracle_downward_sim, CheckOptions};
use zrefine::refine::RefinementProblem;
use zrefine::translate::{derive_bounds, translate as lower, Overrides};
use zrefine::zparse::parse_spec;

#[derive(Default)]
struct Request {
    overrides: Overrides,
    pairing: Option<Vec<(String, String)>>,
    workers: Option<usize>,
    oracle: bool,
}

fn check_json(abs: &str, conc: &str, retrieve: &str, req: &Request) -> zrefine::Result<String> {
    let p = RefinementProblem::from_sources(abs, conc, retrieve, &req.overrides, req.pairing.as_deref())?;
    let mut opts = CheckOptions {
        enum_cap: p.bounds.enum_cap,
        ..CheckOptions::default()
    };
    if let Some(w) = req.workers {
        opts.workers = w.max(1);
    }
    let report = check_refinement(&p, &opts)?;
    let mut v = serde_json::to_value(&report).map_err(|e| zrefine::Error::Io(e.to_string()))?;
    if req.oracle {
        let o = oracle_downward_sim(&p, opts.enum_cap)?;
        v["oracle"] = serde_json::to_value(&o).map_err(|e| zrefine::Error::Io(e.to_string()))?;
    }
    Ok(v.to_string())
}

fn translate_text(spec: &str, context: Option<&str>, ov: &Overrides) -> zrefine::Result<String> {
    let s = parse_spec(spec)?;
    let bounds = derive_bounds(&[&s], ov)?;
    let m = lower(&s, &bounds)?;
    let ctx = context.map_or_else(|| s.name.to_lowercase(), str::to_string);
    Ok(emit_sal(&m, &ctx))
}

fn py_err(e: zrefine::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn overrides(
    nat_hi: Option<i64>,
    given_size: Option<usize>,
    type_sizes: Option<BTreeMap<String, usize>>,
    seq_capacity: Option<u8>,
) -> Overrides {
    Overrides {
        nat_hi,
        given_size,
        type_sizes: type_sizes.unwrap_or_default(),
        seq_capacity,
        enum_cap: None,
    }
}

/// Checks that `concrete` refines `abstract_` under `retrieve` (all LaTeX
/// source text). Returns the report as a dict; `report["verdict"]` is one of
/// "pass", "fail" or "vacuous".
#[pyfunction]
#[pyo3(signature = (abstract_, concrete, retrieve, *, nat_hi=None, given_size=None, type_sizes=None,
                    seq_capacity=None, pairing=None, workers=None, oracle=false))]
#[allow(clippy::too_many_arguments)]
fn check<'py>(
    py: Python<'py>,
    abstract_: &str,
    concrete: &str,
    retrieve: &str,
    nat_hi: Option<i64>,
    given_size: Option<usize>,
    type_sizes: Option<BTreeMap<String, usize>>,
    seq_capacity: Option<u8>,
    pairing: Option<Vec<(String, String)>>,
    workers: Option<usize>,
    oracle: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let req = Request {
        overrides: overrides(nat_hi, given_size, type_sizes, seq_capacity),
        pairing,
        workers,
        oracle,
    };
    let (a, c, r) = (abstract_.to_string(), concrete.to_string(), retrieve.to_string());
    let text = py.detach(move || check_json(&a, &c, &r, &req)).map_err(py_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// SAL text for one specification.
#[pyfunction]
#[pyo3(signature = (spec, *, context=None, nat_hi=None, given_size=None, type_sizes=None, seq_capacity=None))]
fn translate(
    spec: &str,
    context: Option<&str>,
    nat_hi: Option<i64>,
    given_size: Option<usize>,
    type_sizes: Option<BTreeMap<String, usize>>,
    seq_capacity: Option<u8>,
) -> PyResult<String> {
    let ov = overrides(nat_hi, given_size, type_sizes, seq_capacity);
    translate_text(spec, context, &ov).map_err(py_err)
}

#[pymodule]
fn zrefine_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(rel: &str) -> String {
        let p = format!("{}/../core/corpus/{rel}", env!("CARGO_MANIFEST_DIR"));
        std::fs::read_to_string(p).unwrap()
    }

    #[test]
    fn check_reports_json() {
        let req = Request {
            oracle: true,
            ..Request::default()
        };
        let text = check_json(
            &corpus("setseq/abstract.tex"),
            &corpus("setseq/concrete.tex"),
            &corpus("setseq/retrieve.tex"),
            &req,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["verdict"], "pass");
        assert_eq!(v["oracle"]["verdict"], "pass");
    }

    #[test]
    fn translate_names_context() {
        let ov = overrides(Some(2), None, None, None);
        let text = translate_text(&corpus("setseq/abstract.tex"), None, &ov).unwrap();
        assert!(text.starts_with("a : CONTEXT"));
        assert!(text.contains("NAT : TYPE = [0..2];"));
    }

    #[test]
    fn parse_errors_surface() {
        assert!(translate_text("\\begin{schema}{S}\nx : \\nat\n", None, &Overrides::default()).is_err());
    }
}
