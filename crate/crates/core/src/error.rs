use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("moment of order {order} is undefined for alpha = {alpha}: the tail is too heavy (requires alpha > {order})")]
    MomentUndefined { order: u32, alpha: f64 },

    #[error("tail truncation: cumulative probability reached only {cumulative} after {support} support points")]
    Truncation { support: u64, cumulative: f64 },

    #[error("refusing non-stationary specification: {0}")]
    NonStationary(String),

    #[error("non-finite log-likelihood contribution at t = {t}")]
    FilterFailure { t: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
