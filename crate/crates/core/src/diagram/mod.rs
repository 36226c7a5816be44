//! Arcs, boundary curves, Voronoi-like diagrams and their validators.

mod full;
pub mod json;
mod piece;
pub mod validate;
mod vld;

pub use full::{extract_core_sequence, is_ds2_cyclic, CoreArc, CoreArcSequence, Diagram, DiagramError, Elem, Face};
pub(crate) use full::fuse_cycle;
pub use piece::{param_tol, Mode, Piece, Vertex};
pub use vld::{Arc, ArcId, ArcKind, HalfEdge, HeId, Role, VoronoiLike};
