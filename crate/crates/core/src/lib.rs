//! Deterministic desk-scale simulator of autonomous ward-delivery carts.
//!
//! A cart follows a dark guide line with a downward-pitched camera, reads
//! digit placards at junctions to pick its branch, delivers a payload to one
//! of eight wards and drives back to the pharmacy. Two carts can run
//! together, with the second one pausing on the way until the first has
//! unloaded and signalled it over a lossy link.
//!
//! The crate is organised bottom-up:
//!
//! - [`arena`]: track graph, wards, placards and route planning.
//! - [`vehicle`]: differential-drive kinematics with a first-order motor.
//! - [`vision`]: synthetic camera rendering and the recognition pipeline.
//! - [`controller`]: positional PID and differential steering.
//! - [`mission`]: the per-cart state machine.
//! - [`comms`]: seeded lossy link and the proceed/ack exchange.
//! - [`sim`]: the fixed-timestep engine, scenarios and trace output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arena;
pub mod comms;
pub mod controller;
pub mod geom;
pub mod mission;
pub mod sim;
pub mod vehicle;
pub mod vision;

pub use arena::{
    classify_ward, default_map, load_map, route_to, serialize_map, JunctionAction, MapError,
    RoutePlan, Tier, TrackMap,
};
pub use comms::{CartId, Link, Message, MessageKind};
pub use controller::{gains_from_classical, pid_step, steer, PidGains, PidState};
pub use geom::{Point2, Pose};
pub use mission::{Mission, MissionConfig, MissionPhase, Role, SensorBundle};
pub use sim::{run_scenario, Outcome, Scenario, SimConfig, TraceReport};
pub use vehicle::{apply_motor, MotorCommand, VehicleParams, VehicleState};
pub use vision::{CameraModel, DigitDetection, Frame, NoiseParams, TemplateSet};
