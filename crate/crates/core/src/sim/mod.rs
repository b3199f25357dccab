//! Fixed-timestep engine for one or two carts.
//!
//! Each tick first delivers due messages, then advances cart 1 and cart 2 in
//! that order through sense, control, actuate, mission and send. Control acts
//! on the intent the mission issued the tick before. Messages sent during a
//! tick are visible no earlier than the next one.

mod scenario;
mod trace;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arena::TrackMap;
use crate::comms::{split_seed, CartId, Link, LinkEvent, LinkParams, Message, GENERATOR};
use crate::controller::{pid_step, steer, GainsError, PidGains, PidState};
use crate::geom::{Point2, Pose};
use crate::mission::{
    turn_command, FaultReason, Intent, Mission, MissionConfig, MissionEvent, MissionPhase, Role,
    SensorBundle,
};
use crate::vehicle::{apply_motor, set_leds, set_payload, MotorCommand, VehicleParams, VehicleState};
use crate::vision::{
    analyze_frame, normalized_offset, render_card, CameraModel, CardView, GroundRenderer,
    NoiseParams, SceneStyle, TemplateSet, ViewKind, VisionError, VisionParams,
};

pub use scenario::{load_scenario, parse_scenario, MapSource, Scenario, ScenarioError};
pub use trace::{render_svg, write_trace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gains(#[from] GainsError),
    #[error(transparent)]
    Vision(#[from] VisionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartConfig {
    pub target: u8,
    pub role: Role,
    /// Seconds after the cart starts waiting for its payload until the
    /// operator puts it on.
    pub load_delay: f64,
    /// Seconds after arrival until the payload is taken off.
    pub unload_delay: f64,
    pub payload_grams: f64,
    pub pause_point: Option<Point2>,
}

impl CartConfig {
    pub fn solo(target: u8) -> Self {
        Self {
            target,
            role: Role::Solo,
            load_delay: 0.5,
            unload_delay: 0.5,
            payload_grams: 250.0,
            pause_point: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub max_ticks: u64,
    pub seed: u64,
    pub noise: NoiseParams,
    pub carts: Vec<CartConfig>,
    pub link: LinkParams,
    /// Gains as tuned at `gains.sample_period`; rescaled to `dt` when the
    /// two differ.
    pub gains: PidGains,
    pub base_duty: f64,
    pub vehicle: VehicleParams,
    pub camera: CameraModel,
    pub vision: VisionParams,
    pub mission: MissionConfig,
    /// Start heading at the pharmacy; `None` faces along the first edge
    /// leaving it.
    pub start_heading: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            max_ticks: 6000,
            seed: 0,
            noise: NoiseParams::default(),
            carts: vec![CartConfig::solo(1)],
            link: LinkParams::default(),
            gains: PidGains::new(0.8, 0.02, 0.3, 0.02).expect("default gains are valid"),
            base_duty: 0.5,
            vehicle: VehicleParams::default(),
            camera: CameraModel::default(),
            vision: VisionParams::default(),
            mission: MissionConfig::default(),
            start_heading: None,
        }
    }
}

impl SimConfig {
    /// Single cart to `ward` with everything else at defaults.
    pub fn single(ward: u8) -> Self {
        Self { carts: vec![CartConfig::solo(ward)], ..Self::default() }
    }

    /// Leader to `leader_ward`, follower to `follower_ward`.
    pub fn pair(leader_ward: u8, follower_ward: u8) -> Self {
        let leader = CartConfig { role: Role::Leader, ..CartConfig::solo(leader_ward) };
        let follower =
            CartConfig { role: Role::Follower, load_delay: 1.5, ..CartConfig::solo(follower_ward) };
        Self { carts: vec![leader, follower], ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self.carts.is_empty() || self.carts.len() > 2 {
            return bad("carts must be 1 or 2");
        }
        for c in &self.carts {
            if !(1..=8).contains(&c.target) {
                return bad("cart target must be a ward in 1..=8");
            }
            if !(c.load_delay >= 0.0 && c.unload_delay >= 0.0) {
                return bad("operator delays must be non-negative");
            }
        }
        if self.carts.len() == 2
            && !(self.carts[0].role == Role::Leader && self.carts[1].role == Role::Follower)
        {
            return bad("two-cart runs need cart1 as leader and cart2 as follower");
        }
        if !(0.0..=1.0).contains(&self.link.drop_probability) {
            return bad("link drop probability must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.base_duty) {
            return bad("base duty must lie in [0, 1]");
        }
        if self.noise.sigma < 0.0 || !self.noise.sigma.is_finite() {
            return bad("noise sigma must be non-negative");
        }
        self.vehicle.validate().map_err(|e| SimError::Config(e.to_string()))?;
        self.camera.with_k1(self.noise.k1).validate()?;
        Ok(())
    }

    /// `key=value` pairs echoed at the top of a trace.
    pub fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![
            ("generator".to_string(), GENERATOR.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("dt".to_string(), self.dt.to_string()),
            ("max_ticks".to_string(), self.max_ticks.to_string()),
            ("noise.brightness".to_string(), self.noise.brightness.to_string()),
            ("noise.sigma".to_string(), self.noise.sigma.to_string()),
            ("noise.k1".to_string(), self.noise.k1.to_string()),
            ("carts".to_string(), self.carts.len().to_string()),
        ];
        for (i, c) in self.carts.iter().enumerate() {
            h.push((format!("cart{}.target", i + 1), c.target.to_string()));
            h.push((format!("cart{}.role", i + 1), c.role.to_string()));
        }
        h.extend([
            ("link.drop".to_string(), self.link.drop_probability.to_string()),
            ("link.latency".to_string(), self.link.latency_ticks.to_string()),
            ("link.retry".to_string(), self.link.retry_interval_ticks.to_string()),
            ("pid.kp".to_string(), self.gains.kp.to_string()),
            ("pid.ki".to_string(), self.gains.ki.to_string()),
            ("pid.kd".to_string(), self.gains.kd.to_string()),
            ("pid.period".to_string(), self.gains.sample_period.to_string()),
            ("base_duty".to_string(), self.base_duty.to_string()),
        ]);
        h
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    DeliveredAndReturned,
    Delivered,
    Incomplete,
    Fault(FaultReason),
}

impl Outcome {
    /// Scenario-file spelling.
    pub fn key(&self) -> &'static str {
        match self {
            Outcome::DeliveredAndReturned => "delivered_and_returned",
            Outcome::Delivered => "delivered",
            Outcome::Incomplete => "incomplete",
            Outcome::Fault(_) => "fault",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Fault(r) => write!(f, "fault ({r})"),
            o => f.write_str(o.key()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseSample {
    pub tick: u64,
    pub cart: usize,
    pub pose: Pose,
    pub phase: MissionPhase,
    pub led_red: bool,
    pub led_yellow: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub tick: u64,
    pub cart: usize,
    pub event: MissionEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartSummary {
    pub outcome: Outcome,
    /// Target read off the card, if any.
    pub recognized: Option<u8>,
    /// Whether the target placard was seen at a junction.
    pub placard_seen: bool,
    /// Tick at which the cart reached `Done`.
    pub completion_tick: Option<u64>,
    pub pause_point: Option<Point2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceReport {
    pub header: Vec<(String, String)>,
    pub carts: Vec<CartSummary>,
    pub events: Vec<TraceEvent>,
    /// One sample per cart per tick, taken after the tick's update.
    pub samples: Vec<PoseSample>,
    pub messages: Vec<LinkEvent>,
    pub ticks_run: u64,
    pub max_line_deviation: f64,
}

impl TraceReport {
    /// Last tick at which any cart finished; `None` unless every cart did.
    pub fn completion_ticks(&self) -> Option<u64> {
        self.carts.iter().map(|c| c.completion_tick).collect::<Option<Vec<_>>>()?.into_iter().max()
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.carts.iter().map(|c| c.outcome.clone()).collect()
    }

    /// Events of `cart` rendered as text, in order.
    pub fn cart_events(&self, cart: usize) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.cart == cart)
    }
}

/// Largest distance from the guide line over the samples taken while a
/// cart was driving.
pub fn measure_line_deviation(samples: &[PoseSample], map: &TrackMap) -> f64 {
    samples
        .iter()
        .filter(|s| matches!(s.phase, MissionPhase::Outbound | MissionPhase::Returning))
        .map(|s| map.distance_to_line(s.pose.position()))
        .fold(0.0, f64::max)
}

struct Cart {
    state: VehicleState,
    mission: Mission,
    pid: PidState,
    intent: Intent,
    rng: ChaCha8Rng,
    cfg: CartConfig,
    waiting_since: Option<u64>,
    recognized: Option<u8>,
    placard_seen: bool,
    completion_tick: Option<u64>,
}

fn start_heading(map: &TrackMap, config: &SimConfig) -> f64 {
    config.start_heading.unwrap_or_else(|| {
        map.neighbours(map.pharmacy)
            .next()
            .map_or(0.0, |(_, n)| (map.position(n) - map.position(map.pharmacy)).angle())
    })
}

/// Runs a scenario to completion or until `max_ticks`.
pub fn run_scenario(map: &TrackMap, config: &SimConfig) -> Result<TraceReport, SimError> {
    config.validate()?;
    let gains = if (config.gains.sample_period - config.dt).abs() > 1e-15 {
        config.gains.resampled(config.dt)?
    } else {
        config.gains
    };
    let cam = config.camera.with_k1(config.noise.k1);
    let ground = GroundRenderer::new(cam, SceneStyle::default());
    let templates = TemplateSet::default();
    let card_view = CardView { width: cam.width, height: cam.height, scale: 4.0, dx: 0, dy: 0 };
    let card_cam = cam;
    let mut link =
        Link::new(config.link.latency_ticks, config.link.drop_probability, split_seed(config.seed, 0));

    let heading0 = start_heading(map, config);
    let origin = map.position(map.pharmacy);
    let mut carts: Vec<Cart> = config
        .carts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mc = MissionConfig {
                id: CartId(i as u8 + 1),
                role: c.role,
                pause_point: c.pause_point,
                retry_interval_ticks: config.link.retry_interval_ticks,
                motor_lag: config.vehicle.motor_time_constant,
                ..config.mission.clone()
            };
            Cart {
                state: VehicleState::at(Pose::new(origin.x, origin.y, heading0)),
                mission: Mission::new(mc, heading0),
                pid: PidState::default(),
                intent: Intent::Halt,
                rng: ChaCha8Rng::seed_from_u64(split_seed(config.seed, i as u64 + 1)),
                cfg: c.clone(),
                waiting_since: None,
                recognized: None,
                placard_seen: false,
                completion_tick: None,
            }
        })
        .collect();

    let mut events = Vec::new();
    let mut samples = Vec::new();
    let mut ticks_run = 0;
    for tick in 0..config.max_ticks {
        if carts.iter().all(|c| finished(c.mission.phase())) {
            break;
        }
        ticks_run = tick + 1;
        let delivered = link.poll(tick);
        for (i, cart) in carts.iter_mut().enumerate() {
            let id = CartId(i as u8 + 1);
            let inbox: Vec<Message> = delivered.iter().copied().filter(|m| m.sender != id).collect();
            operate(cart, tick, config.dt, &config.vehicle);

            // Sense.
            let phase = cart.mission.phase().clone();
            let (line, detections) = match phase {
                MissionPhase::AwaitTarget => {
                    let frame = render_card(cart.cfg.target, &card_view, &config.noise, &mut cart.rng);
                    let a = analyze_frame(&frame, &card_cam, &templates, &config.vision, ViewKind::Card)?;
                    (None, a.detections)
                }
                MissionPhase::Outbound | MissionPhase::Returning => {
                    let frame = ground.render(map, &cart.state.pose, &config.noise, &mut cart.rng);
                    let a = analyze_frame(&frame, &cam, &templates, &config.vision, ViewKind::Floor)?;
                    (a.line, a.detections)
                }
                _ => (None, Vec::new()),
            };

            // Control, on last tick's intent.
            let cmd = match cart.intent {
                Intent::Follow => match &line {
                    Some(r) => {
                        let e = normalized_offset(r, cam.width);
                        let (u, next) = pid_step(&cart.pid, &gains, e);
                        cart.pid = next;
                        steer(u, config.base_duty)
                    }
                    None => steer(0.0, config.base_duty),
                },
                Intent::Coast => {
                    cart.pid = PidState::default();
                    steer(0.0, config.base_duty)
                }
                Intent::Turn { remaining, .. } => {
                    cart.pid = PidState::default();
                    turn_command(remaining)
                }
                Intent::Halt => {
                    cart.pid = PidState::default();
                    MotorCommand::STOP
                }
            };

            // Actuate.
            cart.state = apply_motor(&cart.state, cmd, &config.vehicle, config.dt);

            // Mission.
            let sensors = SensorBundle {
                line,
                detections,
                loaded: cart.state.loaded,
                odometry_distance: cart.state.odometer,
                odometry_heading: cart.state.pose.heading,
                speed: cart.state.forward_speed(),
                yaw_rate: cart.state.yaw_rate(&config.vehicle),
                tick,
                dt: config.dt,
                frame_width: cam.width,
            };
            let out = cart.mission.step(map, &sensors, &inbox);
            cart.intent = out.intent;
            let phase = cart.mission.phase().clone();
            cart.state = set_leds(&cart.state, phase.led_red(), phase.led_yellow());
            for e in out.events {
                match &e {
                    MissionEvent::Target(w) => cart.recognized = Some(*w),
                    MissionEvent::Decision { seen: true, .. } => cart.placard_seen = true,
                    MissionEvent::Phase(MissionPhase::Done) => cart.completion_tick = Some(tick),
                    _ => {}
                }
                events.push(TraceEvent { tick, cart: i + 1, event: e });
            }

            // Send.
            for m in out.outbox {
                link.send(m, tick);
            }

            samples.push(PoseSample {
                tick,
                cart: i + 1,
                pose: cart.state.pose,
                phase,
                led_red: cart.state.led_red,
                led_yellow: cart.state.led_yellow,
            });
        }
    }

    let zone = map.corridor_width / 2.0;
    let summaries = carts
        .iter()
        .map(|c| CartSummary {
            outcome: outcome(c.mission.phase(), c.state.pose.position().distance(origin) <= zone),
            recognized: c.recognized,
            placard_seen: c.placard_seen,
            completion_tick: c.completion_tick,
            pause_point: c.mission.pause_point().and_then(|(leg, s)| {
                let l = c.mission.outbound_plan().legs.get(leg)?;
                Some(l.start + (l.end - l.start).normalized() * s)
            }),
        })
        .collect();
    Ok(TraceReport {
        header: config.header(),
        carts: summaries,
        max_line_deviation: measure_line_deviation(&samples, map),
        events,
        samples,
        messages: link.log().to_vec(),
        ticks_run,
    })
}

fn finished(p: &MissionPhase) -> bool {
    matches!(p, MissionPhase::Done | MissionPhase::Fault(_))
}

fn outcome(phase: &MissionPhase, home: bool) -> Outcome {
    match phase {
        MissionPhase::Done if home => Outcome::DeliveredAndReturned,
        MissionPhase::Done | MissionPhase::AtWard | MissionPhase::AwaitUnload | MissionPhase::Returning => {
            Outcome::Delivered
        }
        MissionPhase::Fault(r) => Outcome::Fault(r.clone()),
        _ => Outcome::Incomplete,
    }
}

/// The operator: loads the payload `load_delay` after the cart starts
/// waiting for it and takes it off `unload_delay` after arrival.
fn operate(cart: &mut Cart, tick: u64, dt: f64, params: &VehicleParams) {
    let (waiting, delay, grams) = match cart.mission.phase() {
        MissionPhase::AwaitLoad => (true, cart.cfg.load_delay, cart.cfg.payload_grams),
        MissionPhase::AwaitUnload => (true, cart.cfg.unload_delay, 0.0),
        _ => (false, 0.0, 0.0),
    };
    if !waiting {
        cart.waiting_since = None;
        return;
    }
    let since = *cart.waiting_since.get_or_insert(tick);
    if (tick - since) as f64 * dt >= delay {
        if let Ok(s) = set_payload(&cart.state, grams, params) {
            cart.state = s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::default_map;

    fn sample(tick: u64, x: f64, y: f64, phase: MissionPhase) -> PoseSample {
        PoseSample { tick, cart: 1, pose: Pose::new(x, y, 0.0), phase, led_red: false, led_yellow: false }
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = SimConfig::single(2);
        c.dt = 0.0;
        assert!(matches!(c.validate(), Err(SimError::Config(_))));
        let mut c = SimConfig::single(9);
        assert!(c.validate().is_err());
        c = SimConfig::single(2);
        c.carts.clear();
        assert!(c.validate().is_err());
        c = SimConfig::single(2);
        c.link.drop_probability = 1.5;
        assert!(c.validate().is_err());
        c = SimConfig::single(2);
        c.noise.k1 = -5.0;
        assert!(matches!(c.validate(), Err(SimError::Vision(_))));
    }

    #[test]
    fn header_names_generator() {
        let h = SimConfig::single(2).header();
        assert!(h.contains(&("generator".to_string(), GENERATOR.to_string())));
        assert!(h.iter().any(|(k, v)| k == "cart1.target" && v == "2"));
    }

    #[test]
    fn zero_budget_is_incomplete() {
        let c = SimConfig { max_ticks: 0, ..SimConfig::single(2) };
        let r = run_scenario(&default_map(), &c).unwrap();
        assert_eq!(r.outcomes(), vec![Outcome::Incomplete]);
        assert!(r.events.is_empty());
        assert!(r.samples.is_empty());
        assert_eq!(r.ticks_run, 0);
    }

    #[test]
    fn light_payload_never_departs() {
        let mut c = SimConfig { max_ticks: 200, ..SimConfig::single(2) };
        c.carts[0].payload_grams = 150.0;
        let r = run_scenario(&default_map(), &c).unwrap();
        assert_eq!(r.outcomes(), vec![Outcome::Incomplete]);
        let last = r.samples.last().unwrap();
        assert_eq!(last.phase, MissionPhase::AwaitLoad);
        assert!(r.samples.iter().all(|s| s.pose == Pose::new(0.0, 0.0, 0.0)));
    }

    #[test]
    fn deviation_on_line_is_zero() {
        let map = default_map();
        let s: Vec<_> = (0..10).map(|i| sample(i, 0.1 * i as f64, 0.0, MissionPhase::Outbound)).collect();
        assert_eq!(measure_line_deviation(&s, &map), 0.0);
    }

    #[test]
    fn deviation_constant_offset() {
        let map = default_map();
        let s: Vec<_> = (0..5).map(|i| sample(i, 1.2 + 0.1 * i as f64, 0.03, MissionPhase::Returning)).collect();
        assert!((measure_line_deviation(&s, &map) - 0.03).abs() < 1e-12);
    }

    #[test]
    fn deviation_ignores_stationary_phases() {
        let map = default_map();
        let s = vec![sample(0, 1.5, 0.2, MissionPhase::AwaitUnload), sample(1, 1.5, 0.01, MissionPhase::Outbound)];
        assert!((measure_line_deviation(&s, &map) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn outcome_keys() {
        assert_eq!(Outcome::DeliveredAndReturned.key(), "delivered_and_returned");
        assert_eq!(Outcome::Fault(FaultReason::LineLost).to_string(), "fault (line lost)");
    }
}
