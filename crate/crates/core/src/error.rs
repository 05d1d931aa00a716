use alloc::string::String;

/// Errors raised by the model, sampling and law-evaluation layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("horizon must be positive and finite, got {0}")]
    NonPositiveHorizon(f64),

    #[error("invalid interval ({start}, {end}]")]
    InvalidInterval { start: f64, end: f64 },

    #[error("Laplace argument must be non-negative, got {0}")]
    NegativeArgument(f64),

    #[error("the mixed Poisson measure has dependent increments; this operation needs an additive model")]
    NonAdditive,

    #[error("jump distribution has no finite moment of order {order}")]
    MomentDivergence { order: usize },

    #[error("cannot place {n} points on ({start}, {end}] which carries zero mass")]
    ZeroMass { n: usize, start: f64, end: f64 },

    #[error("joint law with n = {n} exceeds the expansion guard n <= {max}")]
    ExpansionTooLarge { n: usize, max: usize },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be non-negative and finite",
        })
    }
}

pub(crate) fn check_horizon(horizon: f64) -> Result<f64> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(horizon)
    } else {
        Err(Error::NonPositiveHorizon(horizon))
    }
}

pub(crate) fn check_interval(start: f64, end: f64) -> Result<()> {
    if start.is_finite() && end.is_finite() && 0.0 <= start && start < end {
        Ok(())
    } else {
        Err(Error::InvalidInterval { start, end })
    }
}
