//! Python bindings.

use floer_cube::braid::parse_braid;
use floer_cube::cli::{compute_one, ComputeArgs, Format, StageArg, VariantArg};
use floer_cube::homfly::homfly_reduced;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Reduced HOMFLY-PT polynomial of a braid closure as `(a, q, coefficient)` triples.
#[pyfunction]
fn homfly(word: &str, strands: usize) -> PyResult<Vec<(i64, i64, i64)>> {
    let w = parse_braid(word, strands).map_err(value_error)?;
    Ok(homfly_reduced(&w).map_err(value_error)?.terms())
}

/// A page as the same JSON document `floer-cube compute` writes.
#[pyfunction]
#[pyo3(signature = (word, strands, variant = "reduced", edge = 0, stage = "e2", window = None))]
fn compute(
    word: &str,
    strands: usize,
    variant: &str,
    edge: usize,
    stage: &str,
    window: Option<i64>,
) -> PyResult<String> {
    let variant = match variant {
        "reduced" => VariantArg::Reduced,
        "middle" => VariantArg::Middle,
        "unreduced" => VariantArg::Unreduced,
        v => return Err(value_error(format!("unknown variant {v:?}"))),
    };
    let stage = match stage {
        "e1" => StageArg::E1,
        "e2" => StageArg::E2,
        s => return Err(value_error(format!("unknown stage {s:?}"))),
    };
    let args = ComputeArgs {
        word: Some(word.to_string()),
        words_file: None,
        strands,
        variant,
        reduce_edge: edge,
        window,
        stage,
        format: Format::Json,
        output: None,
    };
    compute_one(word, strands, &args).and_then(|e| e.to_json()).map_err(value_error)
}

#[pymodule]
fn floer_cube_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(homfly, m)?)?;
    m.add_function(wrap_pyfunction!(compute, m)?)?;
    Ok(())
}
