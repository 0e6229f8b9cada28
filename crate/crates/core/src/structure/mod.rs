//! Complete edge-coloured directed graphs, triangle patterns, isomorphism
//! and enumeration of `Forb_c(S)`.

mod complete;
mod iso;
mod symbol;
mod triangle;

pub use complete::{CompleteStructure, VertexId};
pub(crate) use iso::odometer;
pub use iso::{
    canonical_form, canonical_key, canonical_labelling, enumerate_forb, find_isomorphism,
    CanonicalKey, StructureEmbedding, CANONICAL_BOUND, ENUMERATION_BOUND,
};
pub use symbol::{Language, Orientation, OrientedSymbol, SymbolName};
pub use triangle::{
    embeds_forbidden, readings, triangle_of, TrianglePattern, TriangleSet, TriangleTable, Violation,
};
