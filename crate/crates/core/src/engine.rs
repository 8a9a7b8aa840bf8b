//! Discrete-event core: a time-ordered queue with a monotonic tiebreak.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("event scheduled at t={at} before current time t={now}")]
    Causality { at: f64, now: f64 },
    #[error("event time must be finite, got {0}")]
    NonFiniteTime(f64),
}

/// A scheduled event. `seq_no` is unique per queue and breaks time ties in
/// insertion order.
#[derive(Debug, Clone)]
pub struct Event<P> {
    pub time: f64,
    pub seq_no: u64,
    pub payload: P,
}

impl<P> PartialEq for Event<P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<P> Eq for Event<P> {}

impl<P> PartialOrd for Event<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Event<P> {
    // Reversed so that BinaryHeap (a max-heap) pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq_no.cmp(&self.seq_no))
    }
}

#[derive(Debug)]
pub struct EventQueue<P> {
    heap: BinaryHeap<Event<P>>,
    now: f64,
    next_seq: u64,
    executed: u64,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        Self { heap: BinaryHeap::new(), now: 0.0, next_seq: 0, executed: 0 }
    }

    /// Current simulation time.
    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Number of events ever scheduled.
    pub fn scheduled(&self) -> u64 {
        self.next_seq
    }

    /// Number of events handed out by `pop`/`pop_until`.
    pub fn executed(&self) -> u64 {
        self.executed
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn schedule(&mut self, time: f64, payload: P) -> Result<u64, EngineError> {
        if !time.is_finite() {
            return Err(EngineError::NonFiniteTime(time));
        }
        if time < self.now {
            return Err(EngineError::Causality { at: time, now: self.now });
        }
        let seq_no = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq_no, payload });
        Ok(seq_no)
    }

    /// Schedules `payload` at `now + delay`.
    pub fn schedule_in(&mut self, delay: f64, payload: P) -> Result<u64, EngineError> {
        self.schedule(self.now + delay, payload)
    }

    pub fn pop(&mut self) -> Option<Event<P>> {
        let ev = self.heap.pop()?;
        self.now = ev.time;
        self.executed += 1;
        Some(ev)
    }

    /// Pops the next event only if it is due at or before `t_end`.
    pub fn pop_until(&mut self, t_end: f64) -> Option<Event<P>> {
        match self.peek_time() {
            Some(t) if t <= t_end => self.pop(),
            _ => None,
        }
    }

    /// Moves the clock forward to `t` if no earlier event is pending.
    pub fn advance_to(&mut self, t: f64) {
        let blocked = self.peek_time().is_some_and(|next| next < t);
        if t > self.now && !blocked {
            self.now = t;
        }
    }

    /// Runs `handler` on every event due at or before `t_end`, in order.
    /// Events scheduled past `t_end` stay queued and are never executed by
    /// this call.
    pub fn run_until<F>(&mut self, t_end: f64, mut handler: F)
    where
        F: FnMut(&mut Self, Event<P>),
    {
        while let Some(ev) = self.pop_until(t_end) {
            handler(self, ev);
        }
        self.advance_to(t_end);
    }
}
