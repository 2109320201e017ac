use thiserror::Error;

/// Failure while bracketing the root of a period condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SignScan {
    pub lower: f64,
    pub upper: f64,
    pub value_at_lower: f64,
    pub value_at_upper: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub probes: usize,
}

impl std::fmt::Display for SignScan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "scanned [{:.9}, {:.9}] with {} probes: f(lower)={:.6e}, f(upper)={:.6e}, range [{:.6e}, {:.6e}]",
            self.lower,
            self.upper,
            self.probes,
            self.value_at_lower,
            self.value_at_upper,
            self.min_value,
            self.max_value
        )
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid initial density: {0}")]
    InvalidInitial(String),

    #[error(
        "initial density loses too much mass on the grid: captured {captured:.6} of the total"
    )]
    Truncation { captured: f64 },

    #[error("numerical failure at step {step} (t = {time}): {detail}")]
    Numerical {
        step: u64,
        time: f64,
        detail: String,
    },

    #[error("no periodic solution of this family: {reason}; {scan}")]
    NoRoot { reason: String, scan: SignScan },

    #[error("root found at {root:.12} but the profile is not a solution: {reason}")]
    Inadmissible { root: f64, reason: String },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    pub fn is_construction(&self) -> bool {
        matches!(
            self,
            Error::NoRoot { .. } | Error::Inadmissible { .. } | Error::InvalidProfile(_)
        )
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            expected: "finite and > 0",
        })
    }
}

pub(crate) fn check_non_negative(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            expected: "finite and >= 0",
        })
    }
}
