use core::fmt;

use crate::curve::CurveError;
use crate::periods::PeriodsError;
use crate::quadrature::QuadratureError;
use crate::solution::SolutionError;
use crate::theta::ThetaError;
use crate::verify::VerifyError;

/// Any failure of the solver pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Error {
    Curve(CurveError),
    Quadrature(QuadratureError),
    Periods(PeriodsError),
    Theta(ThetaError),
    Solution(SolutionError),
    Verify(VerifyError),
}

impl Error {
    /// True for parameter validation failures, as opposed to numerical ones.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Curve(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Curve(e) => write!(f, "{e}"),
            Error::Quadrature(e) => write!(f, "{e}"),
            Error::Periods(e) => write!(f, "{e}"),
            Error::Theta(e) => write!(f, "{e}"),
            Error::Solution(e) => write!(f, "{e}"),
            Error::Verify(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! from_impl {
    ($($t:ty => $v:ident),*) => {
        $(impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Error::$v(e)
            }
        })*
    };
}

from_impl!(CurveError => Curve, QuadratureError => Quadrature, PeriodsError => Periods,
           ThetaError => Theta, SolutionError => Solution, VerifyError => Verify);
