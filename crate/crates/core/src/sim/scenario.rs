//! Scenario files: `key = value` lines, `#` comments.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::arena::{default_map, load_map, MapError, TrackMap};
use crate::geom::Point2;
use crate::mission::Role;

use super::{CartConfig, SimConfig};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario not found: {0}")]
    NotFound(PathBuf),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("map: {0}")]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    Builtin,
    /// Relative paths resolve against the scenario file's directory.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub map: MapSource,
    pub config: SimConfig,
    /// Expected outcome key for every cart, e.g. `delivered_and_returned`.
    pub expect: Option<String>,
}

const OUTCOME_KEYS: [&str; 4] = ["delivered_and_returned", "delivered", "incomplete", "fault"];

impl Scenario {
    pub fn load_map(&self, base: &Path) -> Result<TrackMap, ScenarioError> {
        match &self.map {
            MapSource::Builtin => Ok(default_map()),
            MapSource::File(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ScenarioError::Io { path: path.clone(), message: e.to_string() })?;
                Ok(load_map(&text)?)
            }
        }
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ScenarioError> {
    v.parse().map_err(|_| ScenarioError::Parse { line, message: format!("bad value for {key}: {v}") })
}

fn point(line: usize, key: &str, v: &str) -> Result<Point2, ScenarioError> {
    let parts: Vec<&str> = v.split([',', ' ']).filter(|s| !s.is_empty()).collect();
    match parts.as_slice() {
        [x, y] => Ok(Point2::new(number(line, key, x)?, number(line, key, y)?)),
        _ => Err(ScenarioError::Parse { line, message: format!("{key} expects x,y") }),
    }
}

/// Parses scenario text; `name` is used unless the file sets one.
pub fn parse_scenario(text: &str, name: &str) -> Result<Scenario, ScenarioError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ScenarioError::Parse { line: i + 1, message: format!("expected key = value, got {line:?}") });
        };
        pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }

    let carts = match pairs.iter().rev().find(|p| p.1 == "carts") {
        Some((line, _, v)) => number::<usize>(*line, "carts", v)?,
        None => 1,
    };
    let mut config = match carts {
        1 => SimConfig::default(),
        2 => SimConfig::pair(1, 1),
        n => return Err(ScenarioError::Invalid(format!("carts must be 1 or 2, got {n}"))),
    };
    let mut scenario =
        Scenario { name: name.to_string(), map: MapSource::Builtin, config: SimConfig::default(), expect: None };
    let mut gains = config.gains;

    for (line, key, v) in &pairs {
        let line = *line;
        let v = v.as_str();
        match key.as_str() {
            "name" => scenario.name = v.to_string(),
            "map" => {
                scenario.map = if v == "builtin:default" { MapSource::Builtin } else { MapSource::File(v.into()) }
            }
            "carts" => {}
            "dt" => config.dt = number(line, key, v)?,
            "max_ticks" => config.max_ticks = number(line, key, v)?,
            "seed" => config.seed = number(line, key, v)?,
            "base_duty" => config.base_duty = number(line, key, v)?,
            "start_heading" => config.start_heading = Some(number(line, key, v)?),
            "noise.brightness" => config.noise.brightness = number(line, key, v)?,
            "noise.sigma" => config.noise.sigma = number(line, key, v)?,
            "noise.k1" => config.noise.k1 = number(line, key, v)?,
            "link.drop" => config.link.drop_probability = number(line, key, v)?,
            "link.latency" => config.link.latency_ticks = number(line, key, v)?,
            "link.retry" => config.link.retry_interval_ticks = number(line, key, v)?,
            "pid.kp" => gains.kp = number(line, key, v)?,
            "pid.ki" => gains.ki = number(line, key, v)?,
            "pid.kd" => gains.kd = number(line, key, v)?,
            "pid.integral_limit" => gains.integral_limit = number(line, key, v)?,
            "pid.output_limit" => gains.output_limit = number(line, key, v)?,
            "pid.period" => gains.sample_period = number(line, key, v)?,
            "expect" => {
                if !OUTCOME_KEYS.contains(&v) {
                    return Err(ScenarioError::Parse { line, message: format!("unknown outcome {v:?}") });
                }
                scenario.expect = Some(v.to_string());
            }
            k if k.starts_with("cart") => {
                let (idx, field) = k[4..]
                    .split_once('.')
                    .ok_or_else(|| ScenarioError::Parse { line, message: format!("unknown key {k}") })?;
                let idx: usize = number(line, k, idx)?;
                let cart = idx
                    .checked_sub(1)
                    .and_then(|i| config.carts.get_mut(i))
                    .ok_or_else(|| ScenarioError::Parse { line, message: format!("no cart {idx}") })?;
                apply_cart(cart, line, k, field, v)?;
            }
            k => return Err(ScenarioError::Parse { line, message: format!("unknown key {k}") }),
        }
    }
    config.gains = crate::controller::PidGains::new(gains.kp, gains.ki, gains.kd, gains.sample_period)
        .and_then(|g| g.with_limits(gains.integral_limit, gains.output_limit))
        .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    config.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    scenario.config = config;
    Ok(scenario)
}

fn apply_cart(cart: &mut CartConfig, line: usize, key: &str, field: &str, v: &str) -> Result<(), ScenarioError> {
    match field {
        "target" => cart.target = number(line, key, v)?,
        "role" => {
            cart.role = match v {
                "solo" => Role::Solo,
                "leader" => Role::Leader,
                "follower" => Role::Follower,
                _ => return Err(ScenarioError::Parse { line, message: format!("unknown role {v:?}") }),
            }
        }
        "load_delay" => cart.load_delay = number(line, key, v)?,
        "unload_delay" => cart.unload_delay = number(line, key, v)?,
        "payload" => cart.payload_grams = number(line, key, v)?,
        "pause" => cart.pause_point = Some(point(line, key, v)?),
        _ => return Err(ScenarioError::Parse { line, message: format!("unknown key {key}") }),
    }
    Ok(())
}

/// Reads a scenario file and the map it names.
pub fn load_scenario(path: &Path) -> Result<(Scenario, TrackMap), ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => ScenarioError::NotFound(path.to_path_buf()),
        _ => ScenarioError::Io { path: path.to_path_buf(), message: e.to_string() },
    })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let scenario = parse_scenario(&text, stem)?;
    let map = scenario.load_map(path.parent().unwrap_or(Path::new(".")))?;
    Ok((scenario, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let s = parse_scenario("cart1.target = 2\nexpect = delivered_and_returned\n", "w2").unwrap();
        assert_eq!(s.name, "w2");
        assert_eq!(s.map, MapSource::Builtin);
        assert_eq!(s.config.carts[0].target, 2);
        assert_eq!(s.expect.as_deref(), Some("delivered_and_returned"));
    }

    #[test]
    fn two_carts_default_roles() {
        let s = parse_scenario("carts = 2\ncart1.target = 3\ncart2.target = 4\ncart2.pause = 1.5, 0\n", "c").unwrap();
        assert_eq!(s.config.carts[0].role, Role::Leader);
        assert_eq!(s.config.carts[1].role, Role::Follower);
        assert_eq!(s.config.carts[1].pause_point, Some(Point2::new(1.5, 0.0)));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_scenario("seed = 1\n\nbogus = 3\n", "x").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 3, .. }), "{e}");
        let e = parse_scenario("cart3.target = 1\n", "x").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 1, .. }));
        assert!(matches!(parse_scenario("cart1.target = 9\n", "x"), Err(ScenarioError::Invalid(_))));
    }
}
