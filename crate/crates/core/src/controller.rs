//! Positional PID on the normalized line offset, and differential steering.
//!
//! The controller output at step K is
//!
//! ```text
//! u_K = kp*e_K + ki*sum(e_0..e_K) + kd*(e_K - e_{K-1})
//! ```
//!
//! which is the classical `Kp*[e_K + T/Ti*sum + Td*(e_K - e_{K-1})/T]` once
//! `ki = kp*T/Ti` and `kd = kp*Td/T` (see [`gains_from_classical`]).

use thiserror::Error;

use crate::vehicle::MotorCommand;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GainsError {
    #[error("integral time must be positive, got {0}")]
    IntegralTime(f64),
    #[error("sample period must be positive, got {0}")]
    SamplePeriod(f64),
    #[error("`{0}` limit must be positive")]
    Limit(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Sample period T, seconds.
    pub sample_period: f64,
    /// Bound on the magnitude of the integral term `ki * sum`.
    pub integral_limit: f64,
    pub output_limit: f64,
}

impl PidGains {
    /// Direct-form gains with both limits disabled.
    pub fn new(kp: f64, ki: f64, kd: f64, sample_period: f64) -> Result<Self, GainsError> {
        if !(sample_period > 0.0) {
            return Err(GainsError::SamplePeriod(sample_period));
        }
        Ok(Self {
            kp,
            ki,
            kd,
            sample_period,
            integral_limit: f64::INFINITY,
            output_limit: f64::INFINITY,
        })
    }

    pub fn with_limits(self, integral_limit: f64, output_limit: f64) -> Result<Self, GainsError> {
        if !(integral_limit > 0.0) {
            return Err(GainsError::Limit("integral"));
        }
        if !(output_limit > 0.0) {
            return Err(GainsError::Limit("output"));
        }
        Ok(Self { integral_limit, output_limit, ..self })
    }

    /// The same continuous-time controller sampled with a different period:
    /// `ki` scales with T and `kd` with 1/T.
    pub fn resampled(&self, sample_period: f64) -> Result<Self, GainsError> {
        if !(sample_period > 0.0) {
            return Err(GainsError::SamplePeriod(sample_period));
        }
        let r = sample_period / self.sample_period;
        Ok(Self { ki: self.ki * r, kd: self.kd / r, sample_period, ..*self })
    }
}

/// Converts `(Kp, Ti, Td, T)` into direct-form gains (limits disabled).
pub fn gains_from_classical(kp: f64, ti: f64, td: f64, t: f64) -> Result<PidGains, GainsError> {
    if !(ti > 0.0) {
        return Err(GainsError::IntegralTime(ti));
    }
    if !(t > 0.0) {
        return Err(GainsError::SamplePeriod(t));
    }
    PidGains::new(kp, kp * t / ti, kp * td / t, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub error_sum: f64,
    pub prev_error: f64,
    pub initialized: bool,
}

/// One controller update. The derivative term is zero on the first call,
/// the integral term is clamped (and the accumulator with it) before it is
/// added, and the output is clamped last.
pub fn pid_step(state: &PidState, gains: &PidGains, error: f64) -> (f64, PidState) {
    let prev = if state.initialized { state.prev_error } else { error };
    let mut sum = state.error_sum + error;
    let mut integral = gains.ki * sum;
    if integral.abs() > gains.integral_limit {
        integral = gains.integral_limit.copysign(integral);
        sum = integral / gains.ki;
    }
    let u = gains.kp * error + integral + gains.kd * (error - prev);
    let u = u.clamp(-gains.output_limit, gains.output_limit);
    (u, PidState { error_sum: sum, prev_error: error, initialized: true })
}

/// Mixes the controller output into wheel duties. Positive `u` (line to the
/// right of center) speeds up the left wheel and turns the cart right.
pub fn steer(u: f64, base_duty: f64) -> MotorCommand {
    MotorCommand::new(base_duty + u, base_duty - u)
}
