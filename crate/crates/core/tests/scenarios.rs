//! Closed-loop runs of the full engine.

use wardsim::mission::MissionPhase;
use wardsim::sim::{write_trace, Outcome, SimConfig, TraceReport};
use wardsim::{default_map, run_scenario, route_to, NoiseParams, Point2, TrackMap, VehicleParams};

fn run(config: &SimConfig) -> TraceReport {
    run_scenario(&default_map(), config).unwrap()
}

fn cart_samples(r: &TraceReport, cart: usize) -> impl Iterator<Item = &wardsim::sim::PoseSample> {
    r.samples.iter().filter(move |s| s.cart == cart)
}

/// Distance travelled along the follower's outbound route up to the point
/// nearest `p`.
fn arc_position(map: &TrackMap, ward: u8, p: Point2) -> f64 {
    let plan = route_to(map, ward).unwrap();
    let mut best = (f64::INFINITY, 0.0);
    let mut base = 0.0;
    for leg in &plan.legs {
        let d = leg.end - leg.start;
        let len = d.norm();
        let t = ((p - leg.start).dot(d) / (len * len)).clamp(0.0, 1.0);
        let q = leg.start + d * t;
        let dist = q.distance(p);
        if dist < best.0 {
            best = (dist, base + t * len);
        }
        base += len;
    }
    best.1
}

#[test]
fn ward2_lossless_run() {
    let r = run(&SimConfig::single(2));
    assert_eq!(r.outcomes(), vec![Outcome::DeliveredAndReturned]);
    assert!(r.max_line_deviation < 0.10, "deviation {}", r.max_line_deviation);
    assert_eq!(r.carts[0].recognized, Some(2));
    assert!(r.carts[0].placard_seen);
}

#[test]
fn equal_seeds_give_equal_traces() {
    let mut c = SimConfig::single(4);
    c.seed = 99;
    c.noise = NoiseParams { brightness: 20.0, sigma: 8.0, k1: 0.05 };
    let a = write_trace(&run(&c));
    assert_eq!(a, write_trace(&run(&c)));
    c.seed = 100;
    assert_ne!(a, write_trace(&run(&c)));
}

#[test]
fn halving_dt_keeps_completion_time() {
    let base = run(&SimConfig::single(2));
    let fine = run(&SimConfig { dt: 0.01, max_ticks: 12_000, ..SimConfig::single(2) });
    let t0 = base.completion_ticks().unwrap() as f64 * 0.02;
    let t1 = fine.completion_ticks().unwrap() as f64 * 0.01;
    assert_eq!(fine.outcomes(), vec![Outcome::DeliveredAndReturned]);
    assert!(((t1 - t0) / t0).abs() < 0.10, "{t0} s vs {t1} s");
}

#[test]
fn no_teleportation() {
    let c = SimConfig::pair(3, 4);
    let r = run(&c);
    let v_max = VehicleParams::default().v_max;
    for cart in 1..=2 {
        let s: Vec<_> = cart_samples(&r, cart).collect();
        for w in s.windows(2) {
            assert!(w[1].pose.position().distance(w[0].pose.position()) <= v_max * c.dt + 1e-9);
        }
    }
}

#[test]
fn phases_follow_the_legal_chain() {
    for c in [SimConfig::single(6), SimConfig::pair(3, 4)] {
        let r = run(&c);
        for cart in 1..=c.carts.len() {
            let mut last: Option<MissionPhase> = None;
            let mut chain = Vec::new();
            for s in cart_samples(&r, cart) {
                assert_eq!(s.led_yellow, s.phase == MissionPhase::PausedAtPoint);
                assert_eq!(s.led_red, matches!(s.phase, MissionPhase::AtWard | MissionPhase::AwaitUnload));
                if last.as_ref() != Some(&s.phase) {
                    chain.push(s.phase.clone());
                    last = Some(s.phase.clone());
                }
            }
            use MissionPhase::*;
            let expected = if c.carts[cart - 1].role == wardsim::Role::Follower {
                vec![AwaitTarget, AwaitLoad, Outbound, PausedAtPoint, Outbound, AtWard, AwaitUnload, Returning, Done]
            } else {
                vec![AwaitTarget, AwaitLoad, Outbound, AtWard, AwaitUnload, Returning, Done]
            };
            assert_eq!(chain, expected, "cart {cart}");
        }
    }
}

#[test]
fn carts_end_at_the_pharmacy() {
    let map = default_map();
    let r = run(&SimConfig::single(8));
    let last = cart_samples(&r, 1).last().unwrap();
    assert_eq!(last.phase, MissionPhase::Done);
    assert!(last.pose.position().distance(map.position(map.pharmacy)) <= map.corridor_width / 2.0);
}

#[test]
fn follower_holds_until_proceed() {
    let map = default_map();
    for seed in 0..4 {
        let mut c = SimConfig::pair(3, 4);
        c.seed = seed;
        c.link.drop_probability = 0.5;
        let r = run(&c);
        let pause = r.carts[1].pause_point.unwrap();
        let pause_arc = arc_position(&map, 4, pause);
        let leader_returning = cart_samples(&r, 1).find(|s| s.phase == MissionPhase::Returning).unwrap().tick;
        for s in cart_samples(&r, 2).filter(|s| s.tick < leader_returning) {
            assert!(arc_position(&map, 4, s.pose.position()) <= pause_arc + 1e-3, "seed {seed} tick {}", s.tick);
        }
        assert_eq!(r.outcomes(), vec![Outcome::DeliveredAndReturned; 2]);
    }
}

#[test]
fn lossy_link_still_completes() {
    let lossless = run(&SimConfig::pair(3, 4)).completion_ticks().unwrap();
    for seed in 0..5 {
        let mut c = SimConfig::pair(3, 4);
        c.seed = seed;
        c.link.drop_probability = 0.9;
        c.max_ticks = 10 * lossless;
        let r = run(&c);
        assert_eq!(r.outcomes(), vec![Outcome::DeliveredAndReturned; 2], "seed {seed}");
    }
}

#[test]
fn dead_link_without_retry_strands_follower() {
    let mut c = SimConfig::pair(3, 4);
    c.link.drop_probability = 1.0;
    c.link.retry_interval_ticks = 0;
    c.max_ticks = 3000;
    let r = run(&c);
    assert_eq!(r.carts[0].outcome, Outcome::DeliveredAndReturned);
    assert_eq!(r.carts[1].outcome, Outcome::Incomplete);
    assert_eq!(cart_samples(&r, 2).last().unwrap().phase, MissionPhase::PausedAtPoint);
}
