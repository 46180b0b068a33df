//! Modal logics between K and KTB: formulas, Kripke semantics, a
//! satisfiability procedure, the QBF-to-modal reduction, and the embedding
//! of K, KB and KTB into their single-variable fragments.

pub mod formula;
pub mod kripke;
pub mod decide;
pub mod onevar;
pub mod qbf;
pub mod suites;

pub use formula::{parse, Formula, ParseError, Substitution};
pub use kripke::{Frame, FrameClass, Model, World};
