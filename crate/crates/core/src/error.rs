use alloc::string::String;
use core::fmt;

/// Which nose-stretch hypothesis failed in site preparation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    /// The graph point over the check point is not a hull vertex.
    NotExtreme,
    /// The pressure Hessian at the local gradient has no negative eigenvalue.
    NoNegativeEigenvalue,
    /// Singular nodes too close to the check point.
    SingularNearby,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::NotExtreme => "not extreme",
            Hypothesis::NoNegativeEigenvalue => "no negative eigenvalue",
            Hypothesis::SingularNearby => "singular points nearby",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Malformed input that violates a type invariant.
    Invalid(String),
    /// Parameter outside its admissible range.
    Range { what: &'static str, value: f64 },
    /// Sample set without enough affine dimension.
    Degenerate(String),
    /// A domain node lies outside the projection of a body.
    Coverage { x: f64, y: f64 },
    /// Pressure model evaluated where it is not twice differentiable.
    NonSmooth(String),
    /// g(n) requested at a horizontal normal for a model without a declared limit.
    UndefinedLimit,
    Precondition(Hypothesis),
    /// No stretch half-width above grid resolution passes the validity checks.
    Resolution(String),
    /// A family member violates its validity predicates.
    Validity(String),
    /// The support line from the nose touches the working-set boundary.
    SiteTooLarge(String),
    /// Least-squares fit is rank deficient.
    Fit(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid(m) => write!(f, "invalid input: {m}"),
            Error::Range { what, value } => write!(f, "{what} out of range: {value}"),
            Error::Degenerate(m) => write!(f, "degenerate input: {m}"),
            Error::Coverage { x, y } => write!(f, "node ({x}, {y}) lies outside the body projection"),
            Error::NonSmooth(m) => write!(f, "pressure model not smooth: {m}"),
            Error::UndefinedLimit => f.write_str("surface density undefined at horizontal normal"),
            Error::Precondition(h) => write!(f, "site precondition failed: {h}"),
            Error::Resolution(m) => write!(f, "no admissible stretch above grid resolution: {m}"),
            Error::Validity(m) => write!(f, "family validity violated: {m}"),
            Error::SiteTooLarge(m) => write!(f, "site too large: {m}"),
            Error::Fit(m) => write!(f, "fit failed: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
