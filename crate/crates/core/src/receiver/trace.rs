use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Decode,
    Subtract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Slot initialization, including instantaneous cancellation.
    Init,
    Sic,
}

/// One decode or subtraction. `iteration` counts buffer pops and is 0 during
/// initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub frame: u64,
    pub slot: usize,
    pub pilot: usize,
    pub user: usize,
    pub kind: EventKind,
    pub phase: Phase,
    pub iteration: usize,
}

impl fmt::Display for TraceEvent {
    /// `frame=3 slot=12 pilot=40 user=17 event=decode phase=init iter=0`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            EventKind::Decode => "decode",
            EventKind::Subtract => "subtract",
        };
        let phase = match self.phase {
            Phase::Init => "init",
            Phase::Sic => "sic",
        };
        write!(
            f,
            "frame={} slot={} pilot={} user={} event={kind} phase={phase} iter={}",
            self.frame, self.slot, self.pilot, self.user, self.iteration
        )
    }
}

pub trait Tracer {
    fn event(&mut self, e: &TraceEvent);
}

/// Discards every event.
impl Tracer for () {
    fn event(&mut self, _: &TraceEvent) {}
}

impl Tracer for Vec<TraceEvent> {
    fn event(&mut self, e: &TraceEvent) {
        self.push(*e);
    }
}

impl<T: Tracer + ?Sized> Tracer for &mut T {
    fn event(&mut self, e: &TraceEvent) {
        (**self).event(e);
    }
}
