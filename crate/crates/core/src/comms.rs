//! Two-cart message link with fixed latency and seeded random loss.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name of the pseudo-random generator behind every seeded stream.
pub const GENERATOR: &str = "chacha8";

/// Derives an independent 64-bit seed for `stream` from a global seed
/// (splitmix64 finalizer).
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CartId(pub u8);

impl fmt::Display for CartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Proceed,
    Ack,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MessageKind::Proceed => "proceed",
            MessageKind::Ack => "ack",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Message {
    pub kind: MessageKind,
    pub sender: CartId,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Delivered,
    Dropped,
}

/// One line of the link log: `tick,sender,kind,seq,delivered|dropped`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkEvent {
    pub tick: u64,
    pub message: Message,
    pub delivery: Delivery,
}

impl fmt::Display for LinkEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.delivery {
            Delivery::Delivered => "delivered",
            Delivery::Dropped => "dropped",
        };
        write!(
            f,
            "{},{},{},{},{}",
            self.tick, self.message.sender, self.message.kind, self.message.seq, status
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub latency_ticks: u64,
    pub drop_probability: f64,
    /// Proceed resend period; 0 sends once and never retries.
    pub retry_interval_ticks: u64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self { latency_ticks: 2, drop_probability: 0.0, retry_interval_ticks: 20 }
    }
}

#[derive(Debug, Clone)]
struct InFlight {
    deliver_at: u64,
    message: Message,
}

#[derive(Debug, Clone)]
pub struct Link {
    pub latency_ticks: u64,
    pub drop_probability: f64,
    rng: ChaCha8Rng,
    in_flight: VecDeque<InFlight>,
    log: Vec<LinkEvent>,
}

impl Link {
    pub fn new(latency_ticks: u64, drop_probability: f64, seed: u64) -> Self {
        Self {
            latency_ticks,
            drop_probability: drop_probability.clamp(0.0, 1.0),
            rng: ChaCha8Rng::seed_from_u64(seed),
            in_flight: VecDeque::new(),
            log: Vec::new(),
        }
    }

    /// Queues `msg` for delivery at `now + latency`, unless the loss draw
    /// discards it. One draw is consumed per send.
    pub fn send(&mut self, msg: Message, now: u64) -> Delivery {
        let draw: f64 = self.rng.random();
        if draw < self.drop_probability {
            self.log.push(LinkEvent { tick: now, message: msg, delivery: Delivery::Dropped });
            return Delivery::Dropped;
        }
        self.in_flight.push_back(InFlight { deliver_at: now + self.latency_ticks, message: msg });
        Delivery::Delivered
    }

    /// Removes and returns every message due by `now`, in send order. A
    /// message is held back while a lower-numbered message from the same
    /// sender is still in flight.
    pub fn poll(&mut self, now: u64) -> Vec<Message> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.in_flight.len() {
            let f = &self.in_flight[i];
            let blocked = self.in_flight.iter().any(|g| {
                g.message.sender == f.message.sender && g.message.seq < f.message.seq
            });
            if f.deliver_at <= now && !blocked {
                let f = self.in_flight.remove(i).expect("index in range");
                self.log.push(LinkEvent {
                    tick: now,
                    message: f.message,
                    delivery: Delivery::Delivered,
                });
                out.push(f.message);
                // A removal may unblock an earlier-scanned message.
                i = 0;
            } else {
                i += 1;
            }
        }
        out
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    pub fn log(&self) -> &[LinkEvent] {
        &self.log
    }
}

/// Leader side of the proceed exchange: send Proceed, then resend every
/// `retry_interval` ticks until any Ack comes back.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProceedSender {
    started: bool,
    acked: bool,
    next_send: u64,
}

impl ProceedSender {
    pub fn start(&mut self, now: u64) {
        if !self.started {
            self.started = true;
            self.next_send = now;
        }
    }

    pub fn on_ack(&mut self) {
        self.acked = true;
    }

    pub fn acked(&self) -> bool {
        self.acked
    }

    pub fn started(&self) -> bool {
        self.started
    }

    /// Whether a Proceed should go out at `now`.
    pub fn poll(&mut self, now: u64, retry_interval: u64) -> bool {
        if !self.started || self.acked || now < self.next_send {
            return false;
        }
        self.next_send = if retry_interval == 0 { u64::MAX } else { now + retry_interval };
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(sender: u8, seq: u64) -> Message {
        Message { kind: MessageKind::Proceed, sender: CartId(sender), seq }
    }

    #[test]
    fn fixed_latency() {
        let mut link = Link::new(3, 0.0, 1);
        assert_eq!(link.send(msg(1, 0), 10), Delivery::Delivered);
        assert!(link.poll(12).is_empty());
        assert_eq!(link.poll(13), vec![msg(1, 0)]);
        assert!(link.poll(14).is_empty());
    }

    #[test]
    fn always_drop() {
        let mut link = Link::new(0, 1.0, 1);
        for i in 0..100 {
            assert_eq!(link.send(msg(1, i), i), Delivery::Dropped);
        }
        assert!(link.poll(1000).is_empty());
    }

    #[test]
    fn poll_empty_and_partial() {
        let mut link = Link::new(0, 0.0, 1);
        assert!(link.poll(0).is_empty());
        let mut link = Link::new(5, 0.0, 1);
        link.send(msg(1, 0), 0);
        link.send(msg(2, 0), 10);
        assert_eq!(link.poll(6), vec![msg(1, 0)]);
        assert_eq!(link.in_flight(), 1);
    }

    #[test]
    fn fifo_restored_for_out_of_order_enqueue() {
        let mut link = Link::new(2, 0.0, 1);
        link.send(msg(1, 1), 0);
        link.send(msg(1, 0), 1);
        // seq 1 is due at tick 2 but waits for seq 0.
        assert!(link.poll(2).is_empty());
        assert_eq!(link.poll(3), vec![msg(1, 0), msg(1, 1)]);
    }

    #[test]
    fn sender_retries_until_ack() {
        let mut s = ProceedSender::default();
        assert!(!s.poll(0, 20));
        s.start(5);
        assert!(s.poll(5, 20));
        assert!(!s.poll(6, 20));
        assert!(s.poll(25, 20));
        s.on_ack();
        assert!(!s.poll(45, 20));
    }

    #[test]
    fn sender_without_retry_sends_once() {
        let mut s = ProceedSender::default();
        s.start(0);
        assert!(s.poll(0, 0));
        assert!(!s.poll(1_000_000, 0));
    }

    #[test]
    fn split_seed_streams_differ() {
        assert_ne!(split_seed(7, 1), split_seed(7, 2));
        assert_eq!(split_seed(7, 1), split_seed(7, 1));
    }
}
