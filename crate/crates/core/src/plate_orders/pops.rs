//! Plate Order Protection System handshake.
//!
//! ```text
//! Idle --request--> Requested --acknowledge--> Acknowledged --put_in_effect--> InEffect
//!   --request_release--> ReleaseRequested --release--> Released
//! any non-idle state --abort--> Idle
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::PlateLibrary;
use crate::ids::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PopsState {
    Idle,
    Requested,
    Acknowledged,
    InEffect,
    ReleaseRequested,
    Released,
}

impl PopsState {
    pub const ALL: [PopsState; 6] = [
        PopsState::Idle,
        PopsState::Requested,
        PopsState::Acknowledged,
        PopsState::InEffect,
        PopsState::ReleaseRequested,
        PopsState::Released,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PopsEvent {
    Request,
    Acknowledge,
    PutInEffect,
    RequestRelease,
    Release,
    Abort,
}

impl PopsEvent {
    pub const ALL: [PopsEvent; 6] = [
        PopsEvent::Request,
        PopsEvent::Acknowledge,
        PopsEvent::PutInEffect,
        PopsEvent::RequestRelease,
        PopsEvent::Release,
        PopsEvent::Abort,
    ];

    /// The role that originates the event. Abort may come from either side.
    pub fn role(self) -> Option<Role> {
        match self {
            PopsEvent::Request | PopsEvent::RequestRelease => Some(Role::Director),
            PopsEvent::Acknowledge | PopsEvent::PutInEffect | PopsEvent::Release => Some(Role::Dispatcher),
            PopsEvent::Abort => None,
        }
    }
}

/// Control-room roles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Director,
    Dispatcher,
}

macro_rules! text_enum {
    ($ty:ty { $($variant:path => $text:literal),* $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $text),* })
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($variant),)*
                    other => Err(format!("unknown {} `{other}`", stringify!($ty))),
                }
            }
        }
    };
}

text_enum!(PopsState {
    PopsState::Idle => "idle",
    PopsState::Requested => "requested",
    PopsState::Acknowledged => "acknowledged",
    PopsState::InEffect => "in_effect",
    PopsState::ReleaseRequested => "release_requested",
    PopsState::Released => "released",
});

text_enum!(PopsEvent {
    PopsEvent::Request => "request",
    PopsEvent::Acknowledge => "acknowledge",
    PopsEvent::PutInEffect => "put_in_effect",
    PopsEvent::RequestRelease => "request_release",
    PopsEvent::Release => "release",
    PopsEvent::Abort => "abort",
});

text_enum!(Role {
    Role::Director => "director",
    Role::Dispatcher => "dispatcher",
});

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopsTransition {
    pub from: PopsState,
    pub to: PopsState,
    pub event: PopsEvent,
    /// Simulation seconds.
    pub at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PopsError {
    #[error("ILLEGAL_TRANSITION: {event} not allowed in state {state}")]
    IllegalTransition { state: PopsState, event: PopsEvent },
}

impl PopsError {
    pub fn code(&self) -> &'static str {
        "ILLEGAL_TRANSITION"
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PopsSession {
    pub plate_order: PlateOrderId,
    pub state: PopsState,
    pub director: PersonId,
    pub dispatcher: PersonId,
    pub log: Vec<PopsTransition>,
}

impl PopsSession {
    pub fn new(plate_order: PlateOrderId, director: PersonId, dispatcher: PersonId) -> Self {
        Self { plate_order, state: PopsState::Idle, director, dispatcher, log: Vec::new() }
    }

    /// Apply an event in place; an illegal event leaves the session untouched.
    pub fn apply(&mut self, event: PopsEvent, at: u64) -> Result<(), PopsError> {
        let to = next_state(self.state, event).ok_or(PopsError::IllegalTransition { state: self.state, event })?;
        self.log.push(PopsTransition { from: self.state, to, event, at });
        self.state = to;
        Ok(())
    }

    /// Blocked switches are operation-locked exactly while the order is in effect.
    pub fn locks_active(&self) -> bool {
        self.state == PopsState::InEffect
    }

    pub fn locked_switches(&self, library: &PlateLibrary) -> BTreeSet<SwitchId> {
        if !self.locks_active() {
            return BTreeSet::new();
        }
        library.get(self.plate_order.as_str()).map(|o| o.blocked_switches.clone()).unwrap_or_default()
    }
}

/// The transition table. `None` marks an illegal event.
pub fn next_state(state: PopsState, event: PopsEvent) -> Option<PopsState> {
    use PopsEvent as E;
    use PopsState as S;
    match (state, event) {
        (S::Idle, E::Request) => Some(S::Requested),
        (S::Requested, E::Acknowledge) => Some(S::Acknowledged),
        (S::Acknowledged, E::PutInEffect) => Some(S::InEffect),
        (S::InEffect, E::RequestRelease) => Some(S::ReleaseRequested),
        (S::ReleaseRequested, E::Release) => Some(S::Released),
        (S::Idle, E::Abort) => None,
        (_, E::Abort) => Some(S::Idle),
        _ => None,
    }
}

/// Pure form of [`PopsSession::apply`].
pub fn pops_transition(session: &PopsSession, event: PopsEvent, at: u64) -> Result<PopsSession, PopsError> {
    let mut next = session.clone();
    next.apply(event, at)?;
    Ok(next)
}
