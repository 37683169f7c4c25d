//! Shared fixtures for the criterion benchmarks.

use hvi_core::{
    assemble_bilinear, assemble_load, build_structured, CsrMatrix, DgSpace, LoadFunctional,
    ProblemCoefficients,
};

/// Space, operator and load of the unit-square benchmark on `level`.
pub fn fixture(level: u32) -> (DgSpace, CsrMatrix, LoadFunctional) {
    let space =
        DgSpace::new(build_structured(level).expect("level within capacity")).expect("valid mesh");
    let matrix = assemble_bilinear(&space, &ProblemCoefficients::default());
    let load = assemble_load(&space, hvi_core::problem::source);
    (space, matrix, load)
}
