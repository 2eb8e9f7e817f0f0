//! Simulation clock and same-instant event ordering.
//!
//! Time is integer milliseconds internally so long schedules never drift;
//! public accessors report seconds. Events that share a timestamp fire in
//! [`EventPriority`] order: disturbance, microclimate step, sensor read,
//! controller, actuator, camera. The controller therefore always sees the
//! freshest reading and the camera records post-actuation state.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub const MS_PER_S: u64 = 1_000;

/// Monotonically non-decreasing simulation clock.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    now_ms: u64,
}

impl SimClock {
    pub fn new() -> Self {
        SimClock { now_ms: 0 }
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn now_s(&self) -> f64 {
        self.now_ms as f64 / MS_PER_S as f64
    }

    /// Advance to an absolute time. Panics on attempts to move backwards,
    /// which would indicate a scheduler bug.
    pub fn advance_to_ms(&mut self, t_ms: u64) {
        assert!(
            t_ms >= self.now_ms,
            "clock moved backwards: {} -> {}",
            self.now_ms,
            t_ms
        );
        self.now_ms = t_ms;
    }
}

/// Rank of an event within one simulated instant; lower fires first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum EventPriority {
    Disturbance = 0,
    MicroclimateStep = 1,
    SensorRead = 2,
    Controller = 3,
    Actuator = 4,
    Camera = 5,
}

/// Min-ordered event queue keyed on `(time, priority, insertion order)`.
///
/// The insertion counter makes pops total and deterministic even when two
/// events share both timestamp and priority.
#[derive(Debug)]
pub struct EventQueue<K> {
    heap: BinaryHeap<Reverse<Entry<K>>>,
    seq: u64,
}

#[derive(Debug)]
struct Entry<K> {
    t_ms: u64,
    priority: EventPriority,
    seq: u64,
    kind: K,
}

impl<K> PartialEq for Entry<K> {
    fn eq(&self, other: &Self) -> bool {
        self.t_ms == other.t_ms && self.priority == other.priority && self.seq == other.seq
    }
}

impl<K> Eq for Entry<K> {}

impl<K> PartialOrd for Entry<K> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<K> Ord for Entry<K> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.t_ms, self.priority, self.seq).cmp(&(other.t_ms, other.priority, other.seq))
    }
}

impl<K> EventQueue<K> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            seq: 0,
        }
    }

    pub fn push(&mut self, t_ms: u64, priority: EventPriority, kind: K) {
        let seq = self.seq;
        self.seq += 1;
        self.heap.push(Reverse(Entry {
            t_ms,
            priority,
            seq,
            kind,
        }));
    }

    pub fn pop(&mut self) -> Option<(u64, EventPriority, K)> {
        self.heap
            .pop()
            .map(|Reverse(e)| (e.t_ms, e.priority, e.kind))
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

impl<K> Default for EventQueue<K> {
    fn default() -> Self {
        Self::new()
    }
}
