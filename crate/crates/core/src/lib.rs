//! Finite-dimensional Banach lattice norms, Köthe duals, Calderón products,
//! semimetric nets and compactness experiments for operators on couples.

pub mod associate;
pub mod calderon;
pub mod conic;
pub mod couple_ops;
pub mod error;
pub mod io;
pub mod measure;
pub mod norm;
pub mod par;
pub mod sampling;
pub mod seminet;
pub mod solve;

pub use associate::{associate_norm, relative_error, second_associate_check};
pub use calderon::{calderon_closed_form, calderon_norm, CoupleSpec, ThetaNorm};
pub use error::{Error, Result};
pub use measure::{FiniteMeasureSpace, LatticeVector};
pub use norm::{Exponent, LatticeNorm, Mask, NormKind};
