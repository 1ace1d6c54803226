use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero vector does not define a slope or foliation")]
    ZeroVector,
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
    #[error("invalid partial quotient {0}: quotients after the integer part must be >= 1")]
    BadPartialQuotient(i128),
    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
    #[error("rationality of a floating-point foliation cannot be decided; build it from a slope or continued fraction")]
    InexactRationality,
    #[error("point is not in the upper half-plane (x = {x}, y = {y})")]
    NotInUpperHalfPlane { x: f64, y: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("slope {slope} exceeds the height bound {bound}")]
    OutsideBound { slope: String, bound: u64 },
    #[error("vertex cap of {cap} exceeded while building a Farey ball")]
    VertexCap { cap: usize },
    #[error("no path between {from} and {to} inside the bounded vertex set")]
    Unreachable { from: String, to: String },
    #[error("polygon sides do not close up: side {side} ends at {end} but the next side starts at {next_start}")]
    OpenPolygon { side: usize, end: usize, next_start: usize },
    #[error("cone set {0:?} is empty")]
    EmptyCone(String),
    #[error("index {index} out of range for a sample of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{0}")]
    Widen(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
