use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("sites {0} and {1} coincide; their bisector is undefined")]
    IdenticalSites(u32, u32),
    #[error("site set mixes backends {0} and {1}")]
    MixedBackends(String, String),
    #[error("duplicate site id {0}")]
    DuplicateId(u32),
    #[error("site {0} has a negative weight")]
    NegativeWeight(u32),
    #[error("circles of sites {0} and {1} enclose one another")]
    EnclosingCircles(u32, u32),
    #[error("bisectors of sites {0}, {1}, {2} touch tangentially")]
    DegenerateContact(usize, usize, usize),
    #[error("bisectors do not share a site")]
    NotRelated,
    #[error("site set violates general position: {0}")]
    GeneralPosition(String),
    #[error("empty site set")]
    Empty,
    #[error("parse error: {0}")]
    Parse(String),
}
