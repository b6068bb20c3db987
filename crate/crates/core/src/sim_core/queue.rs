//! Event queue with a total (fire_at, seq_no) order.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::time::SimTime;

/// A scheduled occurrence. `seq_no` is assigned by the queue at insertion.
#[derive(Debug, Clone)]
pub struct Event<K> {
    pub fire_at: SimTime,
    pub seq_no: u64,
    pub kind: K,
}

impl<K> PartialEq for Event<K> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq_no == other.seq_no
    }
}

impl<K> Eq for Event<K> {}

impl<K> PartialOrd for Event<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K> Ord for Event<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.fire_at
            .cmp(&other.fire_at)
            .then(self.seq_no.cmp(&other.seq_no))
    }
}

/// Simulation clock plus pending events.
#[derive(Debug)]
pub struct EventQueue<K> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Reverse<Event<K>>>,
}

impl<K> Default for EventQueue<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K> EventQueue<K> {
    pub fn new() -> Self {
        EventQueue {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Enqueue `kind` to fire at `at`. Returns the assigned sequence number.
    ///
    /// Scheduling before the current clock is a programming error and panics.
    pub fn schedule(&mut self, at: SimTime, kind: K) -> u64 {
        assert!(
            at >= self.now,
            "event scheduled in the past: fire_at={at} < clock={}",
            self.now
        );
        let seq_no = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event {
            fire_at: at,
            seq_no,
            kind,
        }));
        seq_no
    }

    pub fn schedule_in(&mut self, delay_s: f64, kind: K) -> u64 {
        let at = self.now + delay_s;
        self.schedule(at, kind)
    }

    /// Pop the next event if it fires at or before `end`, advancing the clock to it.
    pub fn pop_until(&mut self, end: SimTime) -> Option<Event<K>> {
        match self.heap.peek() {
            Some(Reverse(ev)) if ev.fire_at <= end => {
                let Reverse(ev) = self.heap.pop().expect("peeked");
                debug_assert!(ev.fire_at >= self.now);
                self.now = ev.fire_at;
                Some(ev)
            }
            _ => None,
        }
    }

    /// Process every event with `fire_at <= end`, then set the clock to `end`.
    ///
    /// The handler gets the queue back so it can schedule follow-up events.
    pub fn run_until<F>(&mut self, end: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, Event<K>),
    {
        assert!(
            end >= self.now,
            "run_until target {end} is before the clock {}",
            self.now
        );
        let mut processed = 0;
        while let Some(ev) = self.pop_until(end) {
            handler(self, ev);
            processed += 1;
        }
        self.now = end;
        processed
    }
}
