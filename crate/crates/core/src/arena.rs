//! Hospital-corridor world: guide-line graph, wards, placards and routing.
//!
//! Maps are read from a line-oriented text format:
//!
//! ```text
//! node <id> <x> <y>
//! edge <id> <node-a> <node-b>
//! ward <digit> <node> [<digit> <node> ...]
//! pharmacy <node>
//! width <meters>
//! placard <junction> <digit> <x> <y> <heading> <glyph-height>
//! ```
//!
//! `#` starts a comment. Every edge is a straight guide line between its two
//! nodes. Pause points are not stored in the file; one is generated at the
//! midpoint of every edge.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::FRAC_PI_4;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::geom::{segment_distance, wrap_angle, Point2};

/// Width of a placard glyph on the ground relative to its length along the
/// approach direction.
pub const GLYPH_ASPECT: f64 = 2.0 / 3.0;

/// Default corridor width in meters.
pub const DEFAULT_CORRIDOR_WIDTH: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid map: {0}")]
    Validation(String),
    #[error("ward id {0} out of range 1..=8")]
    WardOutOfRange(u8),
    #[error("ward {0} is not on the map")]
    UnknownWard(u8),
    #[error("no route from node {from} to node {to}")]
    Unreachable { from: String, to: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    Near,
    Mid,
    Far,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Near => "near",
            Tier::Mid => "mid",
            Tier::Far => "far",
        })
    }
}

/// Tier of a ward by its number: 1–2 near, 3–4 mid, 5–8 far.
pub fn classify_ward(id: u8) -> Result<Tier, MapError> {
    match id {
        1 | 2 => Ok(Tier::Near),
        3 | 4 => Ok(Tier::Mid),
        5..=8 => Ok(Tier::Far),
        _ => Err(MapError::WardOutOfRange(id)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub position: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub name: String,
    pub a: NodeId,
    pub b: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ward {
    pub id: u8,
    pub node: NodeId,
    pub tier: Tier,
}

/// One digit glyph painted on the floor. `heading` is the direction a cart
/// approaches from; the glyph reads upright to that cart.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacardEntry {
    pub digit: u8,
    pub position: Point2,
    pub heading: f64,
    pub glyph_height: f64,
}

impl PlacardEntry {
    pub fn glyph_width(&self) -> f64 {
        self.glyph_height * GLYPH_ASPECT
    }
}

/// The placards shown on the approach to one junction.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacardGroup {
    pub junction: NodeId,
    pub entries: Vec<PlacardEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PausePoint {
    pub position: Point2,
    pub edge: EdgeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackMap {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub wards: Vec<Ward>,
    pub pharmacy: NodeId,
    pub corridor_width: f64,
    pub placard_groups: Vec<PlacardGroup>,
    pub pause_points: Vec<PausePoint>,
}

impl TrackMap {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn position(&self, id: NodeId) -> Point2 {
        self.nodes[id.0].position
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    pub fn ward(&self, id: u8) -> Option<&Ward> {
        self.wards.iter().find(|w| w.id == id)
    }

    /// Endpoints of an edge's centerline.
    pub fn segment(&self, id: EdgeId) -> (Point2, Point2) {
        let e = &self.edges[id.0];
        (self.position(e.a), self.position(e.b))
    }

    pub fn edge_length(&self, id: EdgeId) -> f64 {
        let (a, b) = self.segment(id);
        a.distance(b)
    }

    /// Distance from `p` to the nearest point of any guide line.
    pub fn distance_to_line(&self, p: Point2) -> f64 {
        (0..self.edges.len())
            .map(|i| {
                let (a, b) = self.segment(EdgeId(i));
                segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Edges incident to `node`, in file order, with the neighbour on the
    /// other end.
    pub fn neighbours(&self, node: NodeId) -> impl Iterator<Item = (EdgeId, NodeId)> + '_ {
        self.edges.iter().enumerate().filter_map(move |(i, e)| {
            if e.a == node {
                Some((EdgeId(i), e.b))
            } else if e.b == node {
                Some((EdgeId(i), e.a))
            } else {
                None
            }
        })
    }

    /// The placard group read right before turning into a ward: the group at
    /// a junction adjacent to the ward node that shows the ward's digit.
    pub fn ward_placards(&self, ward: u8) -> Option<&PlacardGroup> {
        let w = self.ward(ward)?;
        let adjacent: Vec<NodeId> = self.neighbours(w.node).map(|(_, n)| n).collect();
        self.placard_groups.iter().find(|g| {
            adjacent.contains(&g.junction) && g.entries.iter().any(|e| e.digit == ward)
        })
    }

    pub fn placard_entries(&self) -> impl Iterator<Item = &PlacardEntry> {
        self.placard_groups.iter().flat_map(|g| g.entries.iter())
    }

    fn validate(&self) -> Result<(), MapError> {
        let invalid = |m: String| Err(MapError::Validation(m));
        if self.nodes.is_empty() {
            return invalid("map has no nodes".into());
        }
        if !(self.corridor_width > 0.0) {
            return invalid("corridor width must be positive".into());
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.a == e.b {
                return invalid(format!("edge {} is a self loop", e.name));
            }
            if self.edge_length(EdgeId(i)) <= 0.0 {
                return invalid(format!("edge {} has zero length", e.name));
            }
        }
        // Connectivity from the pharmacy.
        let reach = self.reachable_from(self.pharmacy);
        if let Some(n) = reach.iter().position(|r| !r) {
            return invalid(format!(
                "graph is not connected: node {} unreachable from the pharmacy",
                self.nodes[n].name
            ));
        }
        let mut seen = [false; 9];
        for w in &self.wards {
            if classify_ward(w.id).is_err() {
                return invalid(format!("ward id {} out of range", w.id));
            }
            if seen[w.id as usize] {
                return invalid(format!("duplicate ward {}", w.id));
            }
            seen[w.id as usize] = true;
            if w.tier != classify_ward(w.id)? {
                return invalid(format!("ward {} has the wrong tier", w.id));
            }
        }
        let half = self.corridor_width / 2.0;
        for g in &self.placard_groups {
            if g.entries.is_empty() || g.entries.len() > 4 {
                return invalid(format!(
                    "placard group at {} must have 1 to 4 entries, found {}",
                    self.node(g.junction).name,
                    g.entries.len()
                ));
            }
            for e in &g.entries {
                if !(1..=8).contains(&e.digit) {
                    return invalid(format!("placard digit {} out of range", e.digit));
                }
                if !(e.glyph_height > 0.0) {
                    return invalid(format!("placard {} has a nonpositive height", e.digit));
                }
                if self.distance_to_line(e.position) > half {
                    return invalid(format!(
                        "placard {} at ({}, {}) lies outside the corridor",
                        e.digit, e.position.x, e.position.y
                    ));
                }
            }
        }
        Ok(())
    }

    fn reachable_from(&self, start: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start.0] = true;
        while let Some(n) = queue.pop_front() {
            for (_, m) in self.neighbours(n) {
                if !seen[m.0] {
                    seen[m.0] = true;
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    fn generate_pause_points(&mut self) {
        self.pause_points = (0..self.edges.len())
            .map(|i| {
                let (a, b) = self.segment(EdgeId(i));
                PausePoint { position: (a + b) * 0.5, edge: EdgeId(i) }
            })
            .collect();
    }
}

enum Record {
    Node(String, f64, f64),
    Edge(String, String, String),
    Ward(u8, String),
    Pharmacy(String),
    Width(f64),
    Placard { junction: String, entry: (u8, f64, f64, f64, f64) },
}

fn parse_err(line: usize, message: impl Into<String>) -> MapError {
    MapError::Parse { line, message: message.into() }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, MapError> {
    tok.parse().map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

fn parse_record(tokens: &[&str], line: usize) -> Result<Vec<Record>, MapError> {
    let arity = |n: usize| {
        if tokens.len() == n {
            Ok(())
        } else {
            Err(parse_err(
                line,
                format!("`{}` expects {} fields, found {}", tokens[0], n - 1, tokens.len() - 1),
            ))
        }
    };
    let rec = match tokens[0] {
        "node" => {
            arity(4)?;
            Record::Node(
                tokens[1].to_string(),
                num(tokens[2], line, "coordinate")?,
                num(tokens[3], line, "coordinate")?,
            )
        }
        "edge" => {
            arity(4)?;
            Record::Edge(tokens[1].to_string(), tokens[2].to_string(), tokens[3].to_string())
        }
        "ward" => {
            if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
                return Err(parse_err(line, "`ward` expects <digit> <node> pairs"));
            }
            return tokens[1..]
                .chunks(2)
                .map(|p| Ok(Record::Ward(num(p[0], line, "ward digit")?, p[1].to_string())))
                .collect();
        }
        "pharmacy" => {
            arity(2)?;
            Record::Pharmacy(tokens[1].to_string())
        }
        "width" => {
            arity(2)?;
            Record::Width(num(tokens[1], line, "width")?)
        }
        "placard" => {
            arity(7)?;
            Record::Placard {
                junction: tokens[1].to_string(),
                entry: (
                    num(tokens[2], line, "placard digit")?,
                    num(tokens[3], line, "coordinate")?,
                    num(tokens[4], line, "coordinate")?,
                    num(tokens[5], line, "heading")?,
                    num(tokens[6], line, "glyph height")?,
                ),
            }
        }
        other => return Err(parse_err(line, format!("unknown record `{other}`"))),
    };
    Ok(vec![rec])
}

/// Parses and validates a map file.
pub fn load_map(text: &str) -> Result<TrackMap, MapError> {
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        for r in parse_record(&tokens, line)? {
            records.push((line, r));
        }
    }
    if records.is_empty() {
        return Err(parse_err(1, "map is empty"));
    }

    let mut nodes = Vec::new();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    for (line, r) in &records {
        if let Record::Node(name, x, y) = r {
            if index.insert(name.clone(), NodeId(nodes.len())).is_some() {
                return Err(MapError::Validation(format!("duplicate node {name} (line {line})")));
            }
            nodes.push(Node { name: name.clone(), position: Point2::new(*x, *y) });
        }
    }
    let lookup = |name: &str, line: usize| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| parse_err(line, format!("unknown node `{name}`")))
    };

    let mut edges: Vec<Edge> = Vec::new();
    let mut wards = Vec::new();
    let mut pharmacy = None;
    let mut width = None;
    let mut groups: Vec<PlacardGroup> = Vec::new();
    for (line, r) in &records {
        let line = *line;
        match r {
            Record::Node(..) => {}
            Record::Edge(name, a, b) => {
                if edges.iter().any(|e| &e.name == name) {
                    return Err(MapError::Validation(format!("duplicate edge {name}")));
                }
                edges.push(Edge { name: name.clone(), a: lookup(a, line)?, b: lookup(b, line)? });
            }
            Record::Ward(id, node) => {
                let tier = classify_ward(*id).map_err(|_| {
                    MapError::Validation(format!("ward id {id} out of range (line {line})"))
                })?;
                wards.push(Ward { id: *id, node: lookup(node, line)?, tier });
            }
            Record::Pharmacy(node) => {
                if pharmacy.is_some() {
                    return Err(MapError::Validation("more than one pharmacy".into()));
                }
                pharmacy = Some(lookup(node, line)?);
            }
            Record::Width(w) => width = Some(*w),
            Record::Placard { junction, entry: (digit, x, y, heading, height) } => {
                let junction = lookup(junction, line)?;
                let entry = PlacardEntry {
                    digit: *digit,
                    position: Point2::new(*x, *y),
                    heading: *heading,
                    glyph_height: *height,
                };
                match groups.iter_mut().find(|g| g.junction == junction) {
                    Some(g) => g.entries.push(entry),
                    None => groups.push(PlacardGroup { junction, entries: vec![entry] }),
                }
            }
        }
    }
    let pharmacy = pharmacy.ok_or_else(|| MapError::Validation("missing pharmacy".into()))?;
    let mut map = TrackMap {
        nodes,
        edges,
        wards,
        pharmacy,
        corridor_width: width.unwrap_or(DEFAULT_CORRIDOR_WIDTH),
        placard_groups: groups,
        pause_points: Vec::new(),
    };
    map.validate()?;
    map.generate_pause_points();
    Ok(map)
}

/// Writes a map back out in the text format accepted by [`load_map`].
pub fn serialize_map(map: &TrackMap) -> String {
    let mut out = String::new();
    for n in &map.nodes {
        let _ = writeln!(out, "node {} {} {}", n.name, n.position.x, n.position.y);
    }
    for e in &map.edges {
        let _ = writeln!(out, "edge {} {} {}", e.name, map.node(e.a).name, map.node(e.b).name);
    }
    let _ = writeln!(out, "pharmacy {}", map.node(map.pharmacy).name);
    let _ = writeln!(out, "width {}", map.corridor_width);
    for w in &map.wards {
        let _ = writeln!(out, "ward {} {}", w.id, map.node(w.node).name);
    }
    for g in &map.placard_groups {
        for p in &g.entries {
            let _ = writeln!(
                out,
                "placard {} {} {} {} {} {}",
                map.node(g.junction).name,
                p.digit,
                p.position.x,
                p.position.y,
                p.heading,
                p.glyph_height
            );
        }
    }
    out
}

/// Text of the built-in map.
///
/// A 1 m spine runs east from the pharmacy through three junctions. The first
/// two are crosses with 0.5 m ward stubs (wards 1/3 on the left, 2/4 on the
/// right). The third is a T whose 1 m arms end in two more T junctions
/// serving wards 5/6 (north) and 7/8 (south). Placards sit 0.22 m before
/// each junction.
pub const DEFAULT_MAP_TEXT: &str = "\
# built-in ward map
width 0.3
node P 0 0
node J1 1 0
node J2 2 0
node J3 3 0
node J4 3 1
node J5 3 -1
node W1 1 0.5
node W2 1 -0.5
node W3 2 0.5
node W4 2 -0.5
node W5 2.5 1
node W6 3.5 1
node W7 3.5 -1
node W8 2.5 -1
pharmacy P
edge s1 P J1
edge s2 J1 J2
edge s3 J2 J3
edge a1 J1 W1
edge a2 J1 W2
edge a3 J2 W3
edge a4 J2 W4
edge n1 J3 J4
edge n2 J3 J5
edge a5 J4 W5
edge a6 J4 W6
edge a7 J5 W7
edge a8 J5 W8
ward 1 W1 2 W2
ward 3 W3 4 W4
ward 5 W5 6 W6
ward 7 W7 8 W8
# near cross
placard J1 1 0.78 0.06 0 0.06
placard J1 2 0.78 -0.06 0 0.06
# mid cross
placard J2 3 1.78 0.06 0 0.06
placard J2 4 1.78 -0.06 0 0.06
# far fork: 5 and 6 lie to the north, 7 and 8 to the south
placard J3 5 2.78 0.12 0 0.06
placard J3 6 2.78 0.045 0 0.06
placard J3 7 2.78 -0.045 0 0.06
placard J3 8 2.78 -0.12 0 0.06
placard J4 5 2.94 0.78 1.5707963267948966 0.06
placard J4 6 3.06 0.78 1.5707963267948966 0.06
placard J5 7 3.06 -0.78 -1.5707963267948966 0.06
placard J5 8 2.94 -0.78 -1.5707963267948966 0.06
";

/// The built-in competition-style map.
pub fn default_map() -> TrackMap {
    load_map(DEFAULT_MAP_TEXT).expect("built-in map is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JunctionAction {
    Straight,
    Left,
    Right,
    Stop,
}

impl JunctionAction {
    pub fn mirrored(self) -> Self {
        match self {
            JunctionAction::Left => JunctionAction::Right,
            JunctionAction::Right => JunctionAction::Left,
            other => other,
        }
    }
}

impl fmt::Display for JunctionAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JunctionAction::Straight => "straight",
            JunctionAction::Left => "left",
            JunctionAction::Right => "right",
            JunctionAction::Stop => "stop",
        })
    }
}

/// Classifies the turn from travel direction `incoming` to `outgoing`.
pub fn turn_action(incoming: Point2, outgoing: Point2) -> JunctionAction {
    let (i, o) = (incoming.normalized(), outgoing.normalized());
    if i.dot(o) > FRAC_PI_4.cos() {
        JunctionAction::Straight
    } else if i.cross(o) > 0.0 {
        JunctionAction::Left
    } else {
        JunctionAction::Right
    }
}

/// One edge of a route, traversed from `from` to `to`. `action` is what the
/// cart does on reaching `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub edge: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    pub start: Point2,
    pub end: Point2,
    pub action: JunctionAction,
}

impl Leg {
    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    pub fn heading(&self) -> f64 {
        (self.end - self.start).angle()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutePlan {
    pub legs: Vec<Leg>,
}

impl RoutePlan {
    /// Action at the end of every leg; a zero-length route is `[Stop]`.
    pub fn actions(&self) -> Vec<JunctionAction> {
        if self.legs.is_empty() {
            vec![JunctionAction::Stop]
        } else {
            self.legs.iter().map(|l| l.action).collect()
        }
    }

    /// Actions taken at intermediate junctions (the final `Stop` excluded).
    pub fn junction_actions(&self) -> Vec<JunctionAction> {
        self.legs.iter().filter(|l| l.action != JunctionAction::Stop).map(|l| l.action).collect()
    }

    pub fn length(&self) -> f64 {
        self.legs.iter().map(Leg::length).sum()
    }

    /// Signed in-place rotation needed between leg `i` and leg `i + 1`.
    pub fn turn_angle(&self, i: usize) -> f64 {
        wrap_angle(self.legs[i + 1].heading() - self.legs[i].heading())
    }

    /// The same path driven backwards.
    pub fn reversed(&self) -> RoutePlan {
        let mut legs: Vec<Leg> = self
            .legs
            .iter()
            .rev()
            .map(|l| Leg {
                edge: l.edge,
                from: l.to,
                to: l.from,
                start: l.end,
                end: l.start,
                action: JunctionAction::Stop,
            })
            .collect();
        assign_actions(&mut legs);
        RoutePlan { legs }
    }
}

fn assign_actions(legs: &mut [Leg]) {
    for i in 0..legs.len() {
        legs[i].action = match legs.get(i + 1) {
            Some(next) => turn_action(legs[i].end - legs[i].start, next.end - next.start),
            None => JunctionAction::Stop,
        };
    }
}

/// Shortest route (fewest edges, breadth-first) between two nodes.
pub fn route_between(map: &TrackMap, from: NodeId, to: NodeId) -> Result<RoutePlan, MapError> {
    let mut parent: Vec<Option<(EdgeId, NodeId)>> = vec![None; map.nodes.len()];
    let mut seen = vec![false; map.nodes.len()];
    let mut queue = VecDeque::from([from]);
    seen[from.0] = true;
    while let Some(n) = queue.pop_front() {
        if n == to {
            break;
        }
        for (e, m) in map.neighbours(n) {
            if !seen[m.0] {
                seen[m.0] = true;
                parent[m.0] = Some((e, n));
                queue.push_back(m);
            }
        }
    }
    if !seen[to.0] {
        return Err(MapError::Unreachable {
            from: map.node(from).name.clone(),
            to: map.node(to).name.clone(),
        });
    }
    let mut legs = Vec::new();
    let mut cur = to;
    while let Some((edge, prev)) = parent[cur.0] {
        legs.push(Leg {
            edge,
            from: prev,
            to: cur,
            start: map.position(prev),
            end: map.position(cur),
            action: JunctionAction::Stop,
        });
        cur = prev;
    }
    legs.reverse();
    assign_actions(&mut legs);
    Ok(RoutePlan { legs })
}

/// Route from the pharmacy to a ward.
pub fn route_to(map: &TrackMap, ward: u8) -> Result<RoutePlan, MapError> {
    classify_ward(ward)?;
    let w = map.ward(ward).ok_or(MapError::UnknownWard(ward))?;
    route_between(map, map.pharmacy, w.node)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_map_has_eight_wards_and_pharmacy_at_origin() {
        let m = default_map();
        assert_eq!(m.wards.len(), 8);
        assert_eq!(m.position(m.pharmacy), Point2::new(0.0, 0.0));
        assert_eq!(m.corridor_width, 0.30);
        assert_eq!(m.pause_points.len(), m.edges.len());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_ward(1), Ok(Tier::Near));
        assert_eq!(classify_ward(4), Ok(Tier::Mid));
        assert_eq!(classify_ward(7), Ok(Tier::Far));
        assert_eq!(classify_ward(0), Err(MapError::WardOutOfRange(0)));
        assert_eq!(classify_ward(9), Err(MapError::WardOutOfRange(9)));
    }

    #[test]
    fn default_map_tiers_match_table() {
        let m = default_map();
        for w in &m.wards {
            assert_eq!(w.tier, classify_ward(w.id).unwrap());
        }
    }

    #[test]
    fn empty_text_is_parse_error() {
        assert!(matches!(load_map(""), Err(MapError::Parse { .. })));
        assert!(matches!(load_map("# nothing\n\n"), Err(MapError::Parse { .. })));
    }

    #[test]
    fn duplicate_ward_rejected() {
        let text = "node a 0 0\nnode b 1 0\nnode c 0 1\nedge e1 a b\nedge e2 a c\npharmacy a\nward 3 b\nward 3 c\n";
        match load_map(text) {
            Err(MapError::Validation(m)) => assert!(m.contains("duplicate ward"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "node a 0 0\nnode b x 0\n";
        match load_map(text) {
            Err(MapError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match load_map("node a 0 0\npharmacy a\nbogus 1\n") {
            Err(MapError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn disconnected_graph_rejected() {
        let text = "node a 0 0\nnode b 1 0\nnode c 5 5\nedge e a b\npharmacy a\n";
        match load_map(text) {
            Err(MapError::Validation(m)) => assert!(m.contains("not connected")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_or_double_pharmacy_rejected() {
        assert!(matches!(load_map("node a 0 0\n"), Err(MapError::Validation(_))));
        let two = "node a 0 0\nnode b 1 0\nedge e a b\npharmacy a\npharmacy b\n";
        assert!(matches!(load_map(two), Err(MapError::Validation(_))));
    }

    #[test]
    fn placard_outside_corridor_rejected() {
        let text = "node a 0 0\nnode b 1 0\nedge e a b\npharmacy a\nplacard b 1 0.5 0.5 0 0.06\n";
        assert!(matches!(load_map(text), Err(MapError::Validation(_))));
    }

    #[test]
    fn too_many_placards_rejected() {
        let mut text = String::from("node a 0 0\nnode b 1 0\nedge e a b\npharmacy a\n");
        for d in 1..=5 {
            text.push_str(&format!("placard b {d} 0.5 0 0 0.06\n"));
        }
        assert!(matches!(load_map(&text), Err(MapError::Validation(_))));
    }

    #[test]
    fn ward_record_accepts_pairs() {
        let text = "node a 0 0\nnode b 1 0\nnode c 0 1\nedge e1 a b\nedge e2 a c\npharmacy a\nward 1 b 2 c\n";
        let m = load_map(text).unwrap();
        assert_eq!(m.wards.len(), 2);
        assert!(matches!(
            load_map("node a 0 0\npharmacy a\nward 1\n"),
            Err(MapError::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn round_trip_default_map() {
        let m = default_map();
        let again = load_map(&serialize_map(&m)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn near_wards_single_junction_actions() {
        let m = default_map();
        assert_eq!(route_to(&m, 2).unwrap().junction_actions(), vec![JunctionAction::Right]);
        assert_eq!(route_to(&m, 1).unwrap().junction_actions(), vec![JunctionAction::Left]);
        let far = route_to(&m, 6).unwrap();
        assert_eq!(
            far.junction_actions(),
            vec![
                JunctionAction::Straight,
                JunctionAction::Straight,
                JunctionAction::Left,
                JunctionAction::Right
            ]
        );
        assert_eq!(far.actions().last(), Some(&JunctionAction::Stop));
    }

    #[test]
    fn ward_on_pharmacy_is_zero_length() {
        let text = "node a 0 0\nnode b 1 0\nedge e a b\npharmacy a\nward 1 a\n";
        let m = load_map(text).unwrap();
        let plan = route_to(&m, 1).unwrap();
        assert_eq!(plan.actions(), vec![JunctionAction::Stop]);
        assert_eq!(plan.length(), 0.0);
    }

    #[test]
    fn unknown_ward_is_error() {
        let text = "node a 0 0\nnode b 1 0\nedge e a b\npharmacy a\nward 1 b\n";
        let m = load_map(text).unwrap();
        assert_eq!(route_to(&m, 5), Err(MapError::UnknownWard(5)));
    }

    #[test]
    fn ward_placards_found_at_last_junction() {
        let m = default_map();
        let g = m.ward_placards(5).unwrap();
        assert_eq!(m.node(g.junction).name, "J4");
        let g = m.ward_placards(2).unwrap();
        assert_eq!(m.node(g.junction).name, "J1");
    }
}
