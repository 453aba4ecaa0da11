//! Python extension module; see the crate root for the exposed API.

use pyo3::prelude::*;

#[pymodule]
fn tracklab(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
