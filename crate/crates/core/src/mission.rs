//! Per-cart mission state machine.
//!
//! A cart reads its target from a card held in front of the camera, waits
//! for the payload, drives the planned route to the ward, waits for unload
//! and drives back. Progress along each leg comes from wheel odometry; the
//! camera keeps the cart on the line and cross-checks the plan against the
//! placards at each junction.

use std::fmt;

use crate::arena::{route_to, JunctionAction, RoutePlan, TrackMap};
use crate::comms::{CartId, Message, MessageKind, ProceedSender};
use crate::geom::{wrap_angle, Point2};
use crate::vehicle::MotorCommand;
use crate::vision::{DigitDetection, LineReading};

#[derive(Debug, Clone, PartialEq)]
pub enum FaultReason {
    LineLost,
    /// The target placard sits on the other side from the planned turn.
    Contradiction { expected: JunctionAction, seen: JunctionAction },
    NoRoute(u8),
    PausePointOffRoute,
}

impl fmt::Display for FaultReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultReason::LineLost => f.write_str("line lost"),
            FaultReason::Contradiction { expected, seen } => {
                write!(f, "placard says {seen}, plan says {expected}")
            }
            FaultReason::NoRoute(w) => write!(f, "no route to ward {w}"),
            FaultReason::PausePointOffRoute => f.write_str("pause point is not on the route"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MissionPhase {
    AwaitTarget,
    AwaitLoad,
    Outbound,
    PausedAtPoint,
    AtWard,
    AwaitUnload,
    Returning,
    Done,
    Fault(FaultReason),
}

impl MissionPhase {
    pub fn led_red(&self) -> bool {
        matches!(self, MissionPhase::AtWard | MissionPhase::AwaitUnload)
    }

    pub fn led_yellow(&self) -> bool {
        matches!(self, MissionPhase::PausedAtPoint)
    }

    /// Phases in which the cart must stand still.
    pub fn stationary(&self) -> bool {
        !matches!(self, MissionPhase::Outbound | MissionPhase::Returning)
    }

    /// Position in the legal chain; `None` for faults.
    pub fn rank(&self) -> Option<u8> {
        Some(match self {
            MissionPhase::AwaitTarget => 0,
            MissionPhase::AwaitLoad => 1,
            MissionPhase::Outbound | MissionPhase::PausedAtPoint => 2,
            MissionPhase::AtWard => 3,
            MissionPhase::AwaitUnload => 4,
            MissionPhase::Returning => 5,
            MissionPhase::Done => 6,
            MissionPhase::Fault(_) => return None,
        })
    }
}

impl fmt::Display for MissionPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissionPhase::AwaitTarget => "await_target",
            MissionPhase::AwaitLoad => "await_load",
            MissionPhase::Outbound => "outbound",
            MissionPhase::PausedAtPoint => "paused",
            MissionPhase::AtWard => "at_ward",
            MissionPhase::AwaitUnload => "await_unload",
            MissionPhase::Returning => "returning",
            MissionPhase::Done => "done",
            MissionPhase::Fault(_) => "fault",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Solo,
    Leader,
    Follower,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Solo => "solo",
            Role::Leader => "leader",
            Role::Follower => "follower",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionConfig {
    pub id: CartId,
    pub role: Role,
    /// Follower only. Defaults to the middle of the leg that reaches the
    /// ward's junction.
    pub pause_point: Option<Point2>,
    pub junction_center_tolerance: f64,
    pub confirm_frames: u32,
    pub decision_range: f64,
    pub lost_line_timeout: f64,
    pub retry_interval_ticks: u64,
    /// Motor time constant, used to start braking ahead of a stop point.
    pub motor_lag: f64,
    /// Rotation error at which an in-place turn is considered complete.
    pub turn_tolerance: f64,
    /// Speed below which the cart counts as stopped, m/s.
    pub settle_speed: f64,
    /// Distance before a junction over which the cart coasts, m.
    pub coast_distance: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            id: CartId(1),
            role: Role::Solo,
            pause_point: None,
            junction_center_tolerance: 10.0,
            confirm_frames: 5,
            decision_range: 0.35,
            lost_line_timeout: 1.0,
            retry_interval_ticks: 20,
            motor_lag: 0.05,
            turn_tolerance: 0.015,
            settle_speed: 0.02,
            coast_distance: 0.22,
        }
    }
}

/// What the cart perceives in one tick.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensorBundle {
    pub line: Option<LineReading>,
    pub detections: Vec<DigitDetection>,
    pub loaded: bool,
    /// Signed forward travel since start, m.
    pub odometry_distance: f64,
    /// Unwrapped heading integrated from the wheels, rad.
    pub odometry_heading: f64,
    pub speed: f64,
    pub yaw_rate: f64,
    pub tick: u64,
    pub dt: f64,
    pub frame_width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intent {
    /// Steer on the line reading.
    Follow,
    /// Drive straight without steering. Used on the final stretch into a
    /// junction, where crossing branches pull the line centroid aside.
    Coast,
    /// Rotate in place; `remaining` is the signed rotation still to go.
    Turn { action: JunctionAction, remaining: f64 },
    Halt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MissionEvent {
    Phase(MissionPhase),
    Target(u8),
    Decision { junction: String, action: JunctionAction, seen: bool },
    Sent(Message),
    Received(Message),
}

impl fmt::Display for MissionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MissionEvent::Phase(MissionPhase::Fault(r)) => write!(f, "phase=fault ({r})"),
            MissionEvent::Phase(p) => write!(f, "phase={p}"),
            MissionEvent::Target(w) => write!(f, "target={w}"),
            MissionEvent::Decision { junction, action, seen } => {
                write!(f, "junction={junction} {action} ({})", if *seen { "seen" } else { "plan" })
            }
            MissionEvent::Sent(m) => write!(f, "send={} seq {}", m.kind, m.seq),
            MissionEvent::Received(m) => write!(f, "recv={} seq {} from {}", m.kind, m.seq, m.sender),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub intent: Intent,
    pub outbox: Vec<Message>,
    pub events: Vec<MissionEvent>,
}

/// Confirms a target digit shown on a card.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TargetAcquirer {
    candidate: Option<u8>,
    streak: u32,
}

impl TargetAcquirer {
    /// Feeds one frame. Returns the digit once the nearest detection has
    /// shown the same digit for `confirm_frames` frames in a row.
    pub fn observe(&mut self, detections: &[DigitDetection], confirm_frames: u32) -> Option<u8> {
        let nearest = detections.iter().min_by(|a, b| a.range_z.total_cmp(&b.range_z));
        match nearest {
            None => {
                self.candidate = None;
                self.streak = 0;
            }
            Some(d) if self.candidate == Some(d.digit) => self.streak += 1,
            Some(d) => {
                self.candidate = Some(d.digit);
                self.streak = 1;
            }
        }
        (self.streak >= confirm_frames.max(1)).then_some(self.candidate).flatten()
    }
}

/// Replays a whole frame sequence through a fresh [`TargetAcquirer`].
pub fn acquire_target(frames: &[Vec<DigitDetection>], confirm_frames: u32) -> Option<u8> {
    let mut acq = TargetAcquirer::default();
    frames.iter().find_map(|d| acq.observe(d, confirm_frames))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionDecision {
    pub action: JunctionAction,
    /// Whether the target placard was seen, as opposed to falling back on
    /// the plan.
    pub seen: bool,
}

/// Decides the action at the coming junction. `None` means no placard is
/// in range.
pub fn junction_decide(
    target: u8,
    detections: &[DigitDetection],
    planned: JunctionAction,
    frame_width: usize,
    decision_range: f64,
    tolerance_px: f64,
) -> Result<Option<JunctionDecision>, FaultReason> {
    let in_range: Vec<&DigitDetection> =
        detections.iter().filter(|d| d.range_z < decision_range).collect();
    if in_range.is_empty() {
        return Ok(None);
    }
    let Some(t) = in_range.iter().find(|d| d.digit == target) else {
        return Ok(Some(JunctionDecision { action: planned, seen: false }));
    };
    let center = frame_width as f64 / 2.0;
    let seen = if t.image_x < center - tolerance_px {
        JunctionAction::Left
    } else if t.image_x > center + tolerance_px {
        JunctionAction::Right
    } else {
        JunctionAction::Straight
    };
    if seen != planned {
        return Err(FaultReason::Contradiction { expected: planned, seen });
    }
    Ok(Some(JunctionDecision { action: seen, seen: true }))
}

/// Wheel duties for an in-place rotation with `remaining` radians to go;
/// positive turns counter-clockwise.
pub fn turn_command(remaining: f64) -> MotorCommand {
    let d = (1.5 * remaining.abs()).clamp(0.05, 0.4) * remaining.signum();
    MotorCommand::new(-d, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Motion {
    /// Following the line along leg `leg`, which began at odometer `start`.
    Drive { leg: usize, start: f64 },
    /// Braking before a turn or the end of the route.
    Brake { leg: usize },
    Rotate { next_leg: usize, action: JunctionAction, target: f64 },
    /// Letting the rotation die down before following again.
    Settle { next_leg: usize },
}

#[derive(Debug, Clone)]
pub struct Mission {
    config: MissionConfig,
    phase: MissionPhase,
    target: Option<u8>,
    acquirer: TargetAcquirer,
    start_heading: f64,
    outbound: RoutePlan,
    inbound: RoutePlan,
    motion: Option<Motion>,
    pause: Option<(usize, f64)>,
    proceed_received: bool,
    sender: ProceedSender,
    next_seq: u64,
    line_lost_for: f64,
    contradiction_streak: u32,
    /// Per outbound leg: `None` until decided, then whether the placard was
    /// seen.
    decided: Vec<Option<bool>>,
}

impl Mission {
    /// A mission for a cart standing at the pharmacy facing `start_heading`.
    pub fn new(config: MissionConfig, start_heading: f64) -> Self {
        Self {
            config,
            phase: MissionPhase::AwaitTarget,
            target: None,
            acquirer: TargetAcquirer::default(),
            start_heading,
            outbound: RoutePlan::default(),
            inbound: RoutePlan::default(),
            motion: None,
            pause: None,
            proceed_received: false,
            sender: ProceedSender::default(),
            next_seq: 0,
            line_lost_for: 0.0,
            contradiction_streak: 0,
            decided: Vec::new(),
        }
    }

    pub fn phase(&self) -> &MissionPhase {
        &self.phase
    }

    pub fn config(&self) -> &MissionConfig {
        &self.config
    }

    pub fn target(&self) -> Option<u8> {
        self.target
    }

    pub fn outbound_plan(&self) -> &RoutePlan {
        &self.outbound
    }

    /// Resolved pause position as (leg index, distance along the leg).
    pub fn pause_point(&self) -> Option<(usize, f64)> {
        self.pause
    }

    pub fn proceed_received(&self) -> bool {
        self.proceed_received
    }

    pub fn step(&mut self, map: &TrackMap, sensors: &SensorBundle, inbox: &[Message]) -> StepOutput {
        let mut out = StepOutput { intent: Intent::Halt, outbox: Vec::new(), events: Vec::new() };
        self.handle_inbox(inbox, &mut out);

        out.intent = match self.phase.clone() {
            MissionPhase::AwaitTarget => {
                if let Some(w) = self.acquirer.observe(&sensors.detections, self.config.confirm_frames) {
                    out.events.push(MissionEvent::Target(w));
                    self.target = Some(w);
                    match self.plan_routes(map, w) {
                        Ok(()) => self.set_phase(MissionPhase::AwaitLoad, &mut out),
                        Err(r) => self.set_phase(MissionPhase::Fault(r), &mut out),
                    }
                }
                Intent::Halt
            }
            MissionPhase::AwaitLoad => {
                if sensors.loaded {
                    self.set_phase(MissionPhase::Outbound, &mut out);
                    self.motion = Some(self.initial_motion(sensors, 0, self.start_heading));
                    self.line_lost_for = 0.0;
                    self.drive(map, sensors, &mut out)
                } else {
                    Intent::Halt
                }
            }
            MissionPhase::Outbound | MissionPhase::Returning => self.drive(map, sensors, &mut out),
            MissionPhase::PausedAtPoint => {
                if self.proceed_received {
                    self.set_phase(MissionPhase::Outbound, &mut out);
                    self.drive(map, sensors, &mut out)
                } else {
                    Intent::Halt
                }
            }
            MissionPhase::AtWard => {
                if sensors.speed.abs() < self.config.settle_speed {
                    self.set_phase(MissionPhase::AwaitUnload, &mut out);
                }
                Intent::Halt
            }
            MissionPhase::AwaitUnload => {
                if !sensors.loaded {
                    self.set_phase(MissionPhase::Returning, &mut out);
                    if self.config.role == Role::Leader {
                        self.sender.start(sensors.tick);
                    }
                    // Turn around on the spot, then retrace the route.
                    self.motion = Some(Motion::Rotate {
                        next_leg: 0,
                        action: JunctionAction::Left,
                        target: sensors.odometry_heading + std::f64::consts::PI,
                    });
                    self.line_lost_for = 0.0;
                    self.drive(map, sensors, &mut out)
                } else {
                    Intent::Halt
                }
            }
            MissionPhase::Done | MissionPhase::Fault(_) => Intent::Halt,
        };

        if self.sender.poll(sensors.tick, self.config.retry_interval_ticks) {
            let m = self.message(MessageKind::Proceed);
            out.events.push(MissionEvent::Sent(m));
            out.outbox.push(m);
        }
        if self.phase.stationary() {
            out.intent = Intent::Halt;
        }
        out
    }

    fn handle_inbox(&mut self, inbox: &[Message], out: &mut StepOutput) {
        for &m in inbox {
            if m.sender == self.config.id {
                continue;
            }
            out.events.push(MissionEvent::Received(m));
            match m.kind {
                MessageKind::Proceed if self.config.role == Role::Follower => {
                    self.proceed_received = true;
                    let ack = self.message(MessageKind::Ack);
                    out.events.push(MissionEvent::Sent(ack));
                    out.outbox.push(ack);
                }
                MessageKind::Ack if self.config.role == Role::Leader => self.sender.on_ack(),
                _ => {}
            }
        }
    }

    fn message(&mut self, kind: MessageKind) -> Message {
        let m = Message { kind, sender: self.config.id, seq: self.next_seq };
        self.next_seq += 1;
        m
    }

    fn set_phase(&mut self, p: MissionPhase, out: &mut StepOutput) {
        if self.phase != p {
            self.phase = p.clone();
            out.events.push(MissionEvent::Phase(p));
        }
    }

    fn plan_routes(&mut self, map: &TrackMap, ward: u8) -> Result<(), FaultReason> {
        self.outbound = route_to(map, ward).map_err(|_| FaultReason::NoRoute(ward))?;
        self.inbound = self.outbound.reversed();
        self.decided = vec![None; self.outbound.legs.len()];
        if self.config.role == Role::Follower {
            self.pause = Some(self.resolve_pause()?);
        }
        Ok(())
    }

    fn resolve_pause(&self) -> Result<(usize, f64), FaultReason> {
        let legs = &self.outbound.legs;
        if legs.is_empty() {
            return Err(FaultReason::PausePointOffRoute);
        }
        let Some(p) = self.config.pause_point else {
            let i = legs.len().saturating_sub(2);
            return Ok((i, legs[i].length() / 2.0));
        };
        let mut best: Option<(f64, usize, f64)> = None;
        for (i, leg) in legs.iter().enumerate() {
            let dir = leg.end - leg.start;
            let len = dir.norm();
            let s = ((p - leg.start).dot(dir) / len).clamp(0.0, len);
            let d = p.distance(leg.start + dir * (s / len));
            if best.is_none_or(|b| d < b.0) {
                best = Some((d, i, s));
            }
        }
        match best {
            Some((d, i, s)) if d <= 0.05 => Ok((i, s)),
            _ => Err(FaultReason::PausePointOffRoute),
        }
    }

    fn plan(&self) -> &RoutePlan {
        if self.phase == MissionPhase::Returning {
            &self.inbound
        } else {
            &self.outbound
        }
    }

    /// Starts leg `leg`, first rotating onto it if the cart faces elsewhere.
    fn initial_motion(&self, sensors: &SensorBundle, leg: usize, heading: f64) -> Motion {
        let Some(l) = self.plan().legs.get(leg) else {
            return Motion::Brake { leg };
        };
        let delta = wrap_angle(l.heading() - heading);
        if delta.abs() > self.config.turn_tolerance {
            let action = if delta > 0.0 { JunctionAction::Left } else { JunctionAction::Right };
            Motion::Rotate { next_leg: leg, action, target: sensors.odometry_heading + delta }
        } else {
            Motion::Drive { leg, start: sensors.odometry_distance }
        }
    }

    /// Distance needed to coast to rest from the current speed, plus one
    /// tick of travel before the halt takes effect.
    fn braking_distance(&self, sensors: &SensorBundle) -> f64 {
        sensors.speed.max(0.0) * (self.config.motor_lag + sensors.dt)
    }

    fn drive(&mut self, map: &TrackMap, sensors: &SensorBundle, out: &mut StepOutput) -> Intent {
        loop {
            let Some(motion) = self.motion else { return Intent::Halt };
            match motion {
                Motion::Drive { leg, start } => {
                    return self.drive_leg(map, sensors, out, leg, start);
                }
                Motion::Brake { leg } => {
                    if sensors.speed.abs() >= self.config.settle_speed {
                        return Intent::Halt;
                    }
                    let plan = self.plan();
                    if leg + 1 >= plan.legs.len() {
                        self.motion = None;
                        let next = if self.phase == MissionPhase::Returning {
                            MissionPhase::Done
                        } else {
                            MissionPhase::AtWard
                        };
                        self.set_phase(next, out);
                        return Intent::Halt;
                    }
                    let action = plan.legs[leg].action;
                    let target = sensors.odometry_heading + plan.turn_angle(leg);
                    self.motion = Some(Motion::Rotate { next_leg: leg + 1, action, target });
                }
                Motion::Rotate { next_leg, action, target } => {
                    let remaining = target - sensors.odometry_heading;
                    if remaining.abs() > self.config.turn_tolerance {
                        return Intent::Turn { action, remaining };
                    }
                    self.motion = Some(Motion::Settle { next_leg });
                }
                Motion::Settle { next_leg } => {
                    if sensors.yaw_rate.abs() > 0.2 {
                        return Intent::Halt;
                    }
                    self.line_lost_for = 0.0;
                    self.motion = Some(Motion::Drive { leg: next_leg, start: sensors.odometry_distance });
                }
            }
        }
    }

    fn drive_leg(
        &mut self,
        map: &TrackMap,
        sensors: &SensorBundle,
        out: &mut StepOutput,
        leg: usize,
        start: f64,
    ) -> Intent {
        let near_junction = {
            let l = &self.plan().legs[leg];
            map.neighbours(l.to).count() > 2
                && l.length() - (sensors.odometry_distance - start) < self.config.coast_distance
        };
        if sensors.line.is_none() && !near_junction {
            self.line_lost_for += sensors.dt;
            if self.line_lost_for > self.config.lost_line_timeout {
                self.motion = None;
                self.set_phase(MissionPhase::Fault(FaultReason::LineLost), out);
                return Intent::Halt;
            }
        } else {
            self.line_lost_for = 0.0;
        }

        let outbound = self.phase == MissionPhase::Outbound;
        let l = &self.plan().legs[leg];
        let (len, action, junction) = (l.length(), l.action, l.to);
        let crossing = map.neighbours(junction).count() > 2;
        let travelled = sensors.odometry_distance - start;
        let brake = self.braking_distance(sensors);

        if outbound && action != JunctionAction::Stop {
            if let Some(target) = self.target {
                match junction_decide(
                    target,
                    &sensors.detections,
                    action,
                    sensors.frame_width,
                    self.config.decision_range,
                    self.config.junction_center_tolerance,
                ) {
                    Ok(Some(d)) => {
                        self.contradiction_streak = 0;
                        let upgrade = match self.decided[leg] {
                            None => true,
                            Some(seen) => d.seen && !seen,
                        };
                        if upgrade {
                            self.decided[leg] = Some(d.seen);
                            out.events.push(MissionEvent::Decision {
                                junction: map.node(junction).name.clone(),
                                action: d.action,
                                seen: d.seen,
                            });
                        }
                    }
                    Ok(None) => self.contradiction_streak = 0,
                    Err(reason) => {
                        self.contradiction_streak += 1;
                        if self.contradiction_streak >= self.config.confirm_frames {
                            self.motion = None;
                            self.set_phase(MissionPhase::Fault(reason), out);
                            return Intent::Halt;
                        }
                    }
                }
            }
        }

        if outbound && !self.proceed_received {
            if let Some((pleg, at)) = self.pause {
                if pleg == leg && travelled + brake >= at {
                    self.set_phase(MissionPhase::PausedAtPoint, out);
                    return Intent::Halt;
                }
            }
        }

        match action {
            JunctionAction::Straight if travelled >= len => {
                self.contradiction_streak = 0;
                if outbound && self.decided[leg].is_none() {
                    out.events.push(MissionEvent::Decision {
                        junction: map.node(junction).name.clone(),
                        action,
                        seen: false,
                    });
                    self.decided[leg] = Some(false);
                }
                self.motion = Some(Motion::Drive { leg: leg + 1, start: start + len });
                Intent::Follow
            }
            JunctionAction::Left | JunctionAction::Right | JunctionAction::Stop
                if travelled + brake >= len =>
            {
                self.contradiction_streak = 0;
                self.motion = Some(Motion::Brake { leg });
                Intent::Halt
            }
            _ if crossing && len - travelled < self.config.coast_distance => Intent::Coast,
            _ => Intent::Follow,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::default_map;

    fn det(digit: u8, image_x: f64, range_z: f64) -> DigitDetection {
        DigitDetection { digit, image_x, image_y: 40.0, range_z, score: 0.9 }
    }

    #[test]
    fn target_needs_consecutive_frames() {
        let two = vec![det(2, 80.0, 0.1)];
        let three = vec![det(3, 80.0, 0.1)];
        let frames = vec![two.clone(), two.clone(), three, two.clone(), two.clone(), two.clone()];
        assert_eq!(acquire_target(&frames, 3), Some(2));
        assert_eq!(acquire_target(&frames[..5], 3), None);
        assert_eq!(acquire_target(&[vec![], two.clone()], 1), Some(2));
    }

    #[test]
    fn gap_resets_streak() {
        let two = vec![det(2, 80.0, 0.1)];
        assert_eq!(acquire_target(&[two.clone(), vec![], two.clone()], 2), None);
    }

    #[test]
    fn nearest_detection_wins() {
        let frame = vec![det(5, 20.0, 0.3), det(6, 100.0, 0.1)];
        assert_eq!(acquire_target(&[frame], 1), Some(6));
    }

    #[test]
    fn decide_by_side() {
        let d = [det(4, 120.0, 0.2), det(3, 40.0, 0.2)];
        let got = junction_decide(4, &d, JunctionAction::Right, 160, 0.35, 10.0).unwrap();
        assert_eq!(got, Some(JunctionDecision { action: JunctionAction::Right, seen: true }));
        let got = junction_decide(3, &d, JunctionAction::Left, 160, 0.35, 10.0).unwrap();
        assert_eq!(got, Some(JunctionDecision { action: JunctionAction::Left, seen: true }));
        let mid = [det(5, 84.0, 0.2)];
        let got = junction_decide(5, &mid, JunctionAction::Straight, 160, 0.35, 10.0).unwrap();
        assert_eq!(got.map(|d| d.action), Some(JunctionAction::Straight));
    }

    #[test]
    fn out_of_range_is_no_decision() {
        let d = [det(4, 120.0, 0.5)];
        assert_eq!(junction_decide(4, &d, JunctionAction::Right, 160, 0.35, 10.0), Ok(None));
        assert_eq!(junction_decide(4, &[], JunctionAction::Right, 160, 0.35, 10.0), Ok(None));
    }

    #[test]
    fn absent_target_falls_back_to_plan() {
        let d = [det(1, 60.0, 0.2), det(2, 100.0, 0.2)];
        let got = junction_decide(5, &d, JunctionAction::Straight, 160, 0.35, 10.0).unwrap();
        assert_eq!(got, Some(JunctionDecision { action: JunctionAction::Straight, seen: false }));
    }

    #[test]
    fn wrong_side_is_contradiction() {
        let d = [det(4, 30.0, 0.2)];
        assert_eq!(
            junction_decide(4, &d, JunctionAction::Right, 160, 0.35, 10.0),
            Err(FaultReason::Contradiction { expected: JunctionAction::Right, seen: JunctionAction::Left })
        );
    }

    #[test]
    fn turn_command_is_pure_rotation() {
        for rem in [-3.0, -0.5, -0.01, 0.01, 0.2, 3.0] {
            let c = turn_command(rem);
            assert_eq!(c.duty_left, -c.duty_right);
            assert_eq!(c.duty_right.signum(), rem.signum());
            assert!((0.05..=0.4).contains(&c.duty_right.abs()));
        }
    }

    #[test]
    fn leds_follow_phase() {
        use MissionPhase::*;
        for p in [AwaitTarget, AwaitLoad, Outbound, PausedAtPoint, AtWard, AwaitUnload, Returning, Done] {
            assert_eq!(p.led_yellow(), p == PausedAtPoint);
            assert_eq!(p.led_red(), matches!(p, AtWard | AwaitUnload));
        }
        assert_eq!(PausedAtPoint.to_string(), "paused");
        assert_eq!(AwaitUnload.to_string(), "await_unload");
    }

    fn sensors(tick: u64, detections: Vec<DigitDetection>, loaded: bool) -> SensorBundle {
        SensorBundle { detections, loaded, tick, dt: 0.02, frame_width: 160, ..SensorBundle::default() }
    }

    #[test]
    fn card_then_load_starts_outbound() {
        let map = default_map();
        let mut m = Mission::new(MissionConfig::default(), 0.0);
        for t in 0..4 {
            let out = m.step(&map, &sensors(t, vec![det(3, 80.0, 0.1)], false), &[]);
            assert_eq!(out.intent, Intent::Halt);
            assert_eq!(m.phase(), &MissionPhase::AwaitTarget);
        }
        let out = m.step(&map, &sensors(4, vec![det(3, 80.0, 0.1)], false), &[]);
        assert!(out.events.contains(&MissionEvent::Target(3)));
        assert_eq!(m.phase(), &MissionPhase::AwaitLoad);
        assert_eq!(m.outbound_plan().junction_actions(), vec![JunctionAction::Straight, JunctionAction::Left]);

        assert_eq!(m.step(&map, &sensors(5, vec![], false), &[]).intent, Intent::Halt);
        let out = m.step(&map, &sensors(6, vec![], true), &[]);
        assert_eq!(m.phase(), &MissionPhase::Outbound);
        assert_ne!(out.intent, Intent::Halt);
    }

    #[test]
    fn lost_line_faults_after_timeout() {
        let map = default_map();
        let mut m = Mission::new(MissionConfig { confirm_frames: 1, ..MissionConfig::default() }, 0.0);
        m.step(&map, &sensors(0, vec![det(2, 80.0, 0.1)], false), &[]);
        let mut t = 1;
        while !matches!(m.phase(), MissionPhase::Fault(_)) {
            m.step(&map, &sensors(t, vec![], true), &[]);
            t += 1;
            assert!(t < 200, "no fault after {t} ticks");
        }
        assert_eq!(m.phase(), &MissionPhase::Fault(FaultReason::LineLost));
        // Timeout is one second at 50 Hz.
        assert!((50..=53).contains(&t), "faulted at tick {t}");
    }

    #[test]
    fn follower_acks_proceed() {
        let map = default_map();
        let cfg = MissionConfig { id: CartId(2), role: Role::Follower, ..MissionConfig::default() };
        let mut m = Mission::new(cfg, 0.0);
        let proceed = Message { kind: MessageKind::Proceed, sender: CartId(1), seq: 0 };
        let out = m.step(&map, &sensors(0, vec![], false), &[proceed]);
        assert!(m.proceed_received());
        assert_eq!(out.outbox, vec![Message { kind: MessageKind::Ack, sender: CartId(2), seq: 0 }]);
    }

    #[test]
    fn follower_pause_defaults_to_leg_before_ward_junction() {
        let map = default_map();
        let cfg = MissionConfig { id: CartId(2), role: Role::Follower, confirm_frames: 1, ..MissionConfig::default() };
        let mut m = Mission::new(cfg, 0.0);
        m.step(&map, &sensors(0, vec![det(4, 80.0, 0.1)], false), &[]);
        assert_eq!(m.pause_point(), Some((1, 0.5)));
    }

    #[test]
    fn off_route_pause_point_faults() {
        let map = default_map();
        let cfg = MissionConfig {
            role: Role::Follower,
            confirm_frames: 1,
            pause_point: Some(Point2::new(1.0, 0.4)),
            ..MissionConfig::default()
        };
        let mut m = Mission::new(cfg, 0.0);
        m.step(&map, &sensors(0, vec![det(2, 80.0, 0.1)], false), &[]);
        assert_eq!(m.phase(), &MissionPhase::Fault(FaultReason::PausePointOffRoute));
    }
}
