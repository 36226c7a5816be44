//! Numeric policy, geometric predicates and the concrete bisector systems.

mod bisector;
mod error;
mod geom;
mod site;
mod system;

pub use bisector::{Bisector, End};
pub use error::KernelError;
pub use geom::{angle_offset, ccw_delta, normalize_angle, Direction, Point};
pub use site::{read_sites, read_sites_csv, read_sites_json, write_sites_csv, write_sites_json, SiteKind, SiteRecord};
pub use system::{RelatedPoint, Side, SiteSystem, Tol};

/// Index of a site inside a [`SiteSystem`].
pub type SiteIdx = usize;
