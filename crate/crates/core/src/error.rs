use alloc::boxed::Box;
use alloc::string::String;

use crate::ode::OdeProfile;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("degenerate mapping: {fraction:.3e} of nodes have J <= 0 ({count} nodes)")]
    Degenerate { fraction: f64, count: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{count} point(s) outside the domain of {what}; first offender {first_re:.6e}{first_im:+.6e}i")]
    Range {
        what: String,
        count: usize,
        first_re: f64,
        first_im: f64,
    },
    #[error("pole of the Cayley map")]
    Pole,
    #[error("coverage error: only {valid} of {required} nodes usable")]
    Coverage { valid: usize, required: usize },
    #[error("truncation error: {fraction:.3} of nodes left the half-plane window; enlarge the extents")]
    Truncation { fraction: f64 },
    #[error("pairing error: {0}")]
    Pairing(String),
    #[error("invertibility error: {failures} node(s) failed to invert, residual {residual:.3e}")]
    Invertibility { failures: usize, residual: f64 },
    #[error("no admissible descent step at the first iteration")]
    Stall,
    #[error("extent error: {0}")]
    Extent(String),
    #[error("ODE range exhausted at y = {y:.6e}, u = {u:.6e}: the right-hand side left the range of F")]
    RangeExhausted { y: f64, u: f64, partial: Box<OdeProfile> },
}

impl Error {
    pub(crate) fn range(what: impl Into<String>, count: usize, first: num_complex::Complex64) -> Self {
        Error::Range {
            what: what.into(),
            count,
            first_re: first.re,
            first_im: first.im,
        }
    }
}
