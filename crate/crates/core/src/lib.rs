//! Finite, dimension-truncated presheaves over Eilenberg-Zilber shape
//! categories (simplices, cubes, cubes with connections).
//!
//! The crate decides lifting properties by exhaustive search, extracts minimal
//! models and minimal fibrations, and implements a finite Hofmann-Streicher
//! classifier together with the equivalence subobject used for univalence.
//! Every verdict is certified up to the truncation dimension only.

pub mod error;
pub mod fixtures;
pub mod format;
pub mod homotopy;
pub mod lifting;
pub mod minimal;
pub mod presheaf;
pub mod search;
pub mod shape;
pub mod universe;

pub use error::{Error, Result};
pub use presheaf::{Presheaf, PresheafMap, Section, Subpresheaf};
pub use shape::{MorphId, ShapeCategory, ShapeKind, ShapeMorphism, ShapeObject};
