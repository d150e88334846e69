use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("epsilon must lie in (0, 1], got {0}")]
    Epsilon(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

pub fn check_epsilon_delta(epsilon: f64, delta: f64) -> Result<(), ParamError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ParamError::Epsilon(epsilon));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ParamError::Delta(delta));
    }
    Ok(())
}

pub fn check_positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ParamError::NonPositive { name, value })
    }
}

/// `log2 n`, never below 1 so that divisions stay finite on tiny graphs.
pub fn log2n(n: usize) -> f64 {
    (n as f64).log2().max(1.0)
}
