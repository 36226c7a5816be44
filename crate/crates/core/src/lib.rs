//! Abstract Voronoi diagrams under site deletion.

pub mod bench;
pub mod deletion;
pub mod diagram;
pub mod fvd;
pub mod gen;
pub mod insert;
pub mod kernel;
pub mod oracle;
pub mod realize;
pub mod svg;
