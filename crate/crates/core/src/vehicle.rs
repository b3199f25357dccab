//! Differential-drive cart: motor model, pose integration, payload switch and
//! indicator LEDs.
//!
//! Each wheel speed relaxes toward `duty * v_max` with a first-order lag. The
//! heading is integrated in closed form; the position integral is a closed
//! arc once the lag has died out and composite Gauss-Legendre quadrature over
//! the transient, which is exact to rounding for the step sizes used here.

use thiserror::Error;

use crate::geom::Pose;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("payload mass must be nonnegative, got {0} g")]
    NegativePayload(f64),
    #[error("vehicle parameter `{0}` must be strictly positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Distance between the two drive wheels, meters.
    pub track_width: f64,
    /// Wheel speed at full duty, m/s.
    pub v_max: f64,
    pub motor_time_constant: f64,
    /// Payload mass that closes the contact switch, grams.
    pub switch_threshold: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self { track_width: 0.16, v_max: 0.5, motor_time_constant: 0.05, switch_threshold: 200.0 }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), VehicleError> {
        for (name, v) in [
            ("track_width", self.track_width),
            ("v_max", self.v_max),
            ("motor_time_constant", self.motor_time_constant),
            ("switch_threshold", self.switch_threshold),
        ] {
            if !(v > 0.0) {
                return Err(VehicleError::NonPositive(name));
            }
        }
        Ok(())
    }
}

/// PWM duty per wheel, in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorCommand {
    pub duty_left: f64,
    pub duty_right: f64,
}

impl MotorCommand {
    pub fn new(duty_left: f64, duty_right: f64) -> Self {
        Self { duty_left: clamp_duty(duty_left), duty_right: clamp_duty(duty_right) }
    }

    pub const STOP: MotorCommand = MotorCommand { duty_left: 0.0, duty_right: 0.0 };
}

fn clamp_duty(d: f64) -> f64 {
    if d.is_nan() {
        0.0
    } else {
        d.clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelSpeeds {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub pose: Pose,
    pub wheel_speed: WheelSpeeds,
    pub payload_grams: f64,
    pub loaded: bool,
    pub led_red: bool,
    pub led_yellow: bool,
    /// Signed forward travel of the axle midpoint since start, meters.
    pub odometer: f64,
}

impl VehicleState {
    pub fn at(pose: Pose) -> Self {
        Self { pose, ..Self::default() }
    }

    pub fn forward_speed(&self) -> f64 {
        0.5 * (self.wheel_speed.left + self.wheel_speed.right)
    }

    pub fn yaw_rate(&self, params: &VehicleParams) -> f64 {
        (self.wheel_speed.right - self.wheel_speed.left) / params.track_width
    }
}

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Past this many time constants the motor transient is below rounding.
const SETTLE_TAUS: f64 = 40.0;

/// Advances the cart by `dt` seconds under a constant command.
pub fn apply_motor(
    state: &VehicleState,
    cmd: MotorCommand,
    params: &VehicleParams,
    dt: f64,
) -> VehicleState {
    assert!(dt > 0.0, "dt must be positive");
    let cmd = MotorCommand::new(cmd.duty_left, cmd.duty_right);
    let tau = params.motor_time_constant;
    let target_l = cmd.duty_left * params.v_max;
    let target_r = cmd.duty_right * params.v_max;

    // Mean speed and yaw rate share the same exponential relaxation.
    let v_ss = 0.5 * (target_l + target_r);
    let w_ss = (target_r - target_l) / params.track_width;
    let v0 = state.forward_speed();
    let w0 = state.yaw_rate(params);
    let dv = v0 - v_ss;
    let dw = w0 - w_ss;

    let decay = |t: f64| (-t / tau).exp();
    let theta0 = state.pose.heading;
    let heading_at = |t: f64| theta0 + w_ss * t + dw * tau * (1.0 - decay(t));
    let speed_at = |t: f64| v_ss + dv * decay(t);

    let mut x = state.pose.x;
    let mut y = state.pose.y;

    // Transient part, integrated numerically.
    let transient = if dv == 0.0 && dw == 0.0 { 0.0 } else { dt.min(SETTLE_TAUS * tau) };
    if transient > 0.0 {
        let w_peak = w0.abs().max(w_ss.abs());
        let panels_by_tau = (2.0 * transient / tau).ceil();
        let panels_by_turn = (w_peak * transient / 0.25).ceil();
        let panels = panels_by_tau.max(panels_by_turn).clamp(1.0, 100_000.0) as usize;
        let h = transient / panels as f64;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                let t = mid + 0.5 * h * node;
                let v = speed_at(t);
                let th = heading_at(t);
                x += 0.5 * h * weight * v * th.cos();
                y += 0.5 * h * weight * v * th.sin();
            }
        }
    }

    // Settled part: constant speeds, exact arc.
    let rest = dt - transient;
    if rest > 0.0 {
        let th_a = heading_at(transient);
        let th_b = th_a + w_ss * rest;
        if w_ss.abs() > 1e-12 {
            let r = v_ss / w_ss;
            x += r * (th_b.sin() - th_a.sin());
            y -= r * (th_b.cos() - th_a.cos());
        } else {
            x += v_ss * rest * th_a.cos();
            y += v_ss * rest * th_a.sin();
        }
    }

    let k = decay(dt);
    let travel = v_ss * dt + dv * tau * (1.0 - k);
    VehicleState {
        pose: Pose::new(x, y, heading_at(dt)),
        wheel_speed: WheelSpeeds {
            left: target_l + (state.wheel_speed.left - target_l) * k,
            right: target_r + (state.wheel_speed.right - target_r) * k,
        },
        odometer: state.odometer + travel,
        ..*state
    }
}

/// Updates the payload mass and recomputes the contact switch.
pub fn set_payload(
    state: &VehicleState,
    grams: f64,
    params: &VehicleParams,
) -> Result<VehicleState, VehicleError> {
    if !(grams >= 0.0) {
        return Err(VehicleError::NegativePayload(grams));
    }
    Ok(VehicleState { payload_grams: grams, loaded: grams >= params.switch_threshold, ..*state })
}

pub fn set_leds(state: &VehicleState, red: bool, yellow: bool) -> VehicleState {
    VehicleState { led_red: red, led_yellow: yellow, ..*state }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instant() -> VehicleParams {
        VehicleParams { motor_time_constant: 1e-9, v_max: 1.0, ..VehicleParams::default() }
    }

    #[test]
    fn straight_line_motion() {
        let s = apply_motor(&VehicleState::default(), MotorCommand::new(0.5, 0.5), &instant(), 1.0);
        assert!((s.pose.x - 0.5).abs() < 1e-9);
        assert!(s.pose.y.abs() < 1e-12);
        assert!(s.pose.heading.abs() < 1e-12);
        assert!((s.odometer - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rotation_in_place() {
        let s =
            apply_motor(&VehicleState::default(), MotorCommand::new(-0.5, 0.5), &instant(), 0.3);
        assert!(s.pose.x.abs() < 1e-12 && s.pose.y.abs() < 1e-12);
        assert!(s.pose.heading > 0.0);
    }

    #[test]
    fn arc_about_left_wheel() {
        let params = VehicleParams { track_width: 0.2, ..instant() };
        let mut s = VehicleState::default();
        // Left wheel sits at (0, 0.1); the center must stay 0.1 m from it.
        for _ in 0..50 {
            s = apply_motor(&s, MotorCommand::new(0.0, 1.0), &params, 0.01);
            let d = s.pose.x.hypot(s.pose.y - 0.1);
            assert!((d - 0.1).abs() < 1e-9, "radius {d}");
        }
    }

    #[test]
    fn duties_are_clamped() {
        let c = MotorCommand::new(3.0, -7.0);
        assert_eq!((c.duty_left, c.duty_right), (1.0, -1.0));
    }

    #[test]
    fn payload_switch() {
        let p = VehicleParams::default();
        let s = VehicleState::default();
        assert!(set_payload(&s, 200.0, &p).unwrap().loaded);
        assert!(!set_payload(&s, 0.0, &p).unwrap().loaded);
        assert!(!set_payload(&s, 150.0, &p).unwrap().loaded);
        assert_eq!(set_payload(&s, -1.0, &p), Err(VehicleError::NegativePayload(-1.0)));
    }

    #[test]
    fn leds_stored() {
        let s = VehicleState::default();
        let off = set_leds(&s, false, false);
        assert!(!off.led_red && !off.led_yellow);
        let red = set_leds(&s, true, false);
        assert!(red.led_red && !red.led_yellow);
        let yellow = set_leds(&s, false, true);
        assert!(!yellow.led_red && yellow.led_yellow);
    }

    #[test]
    fn params_validation() {
        assert!(VehicleParams::default().validate().is_ok());
        let bad = VehicleParams { v_max: 0.0, ..VehicleParams::default() };
        assert_eq!(bad.validate(), Err(VehicleError::NonPositive("v_max")));
    }
}
