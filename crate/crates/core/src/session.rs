//! Capture session lifecycle.
//!
//! ```text
//! Initialized --start--> Recording --stop--> Stopped --save--> Saved
//!                                                    \--discard--> Discarded
//! ```

use core::fmt;
use core::str::FromStr;

use crate::error::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionState {
    Initialized,
    Recording,
    Stopped,
    Saved,
    Discarded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionAction {
    Start,
    Stop,
    Save,
    Discard,
}

impl SessionState {
    pub const ALL: [SessionState; 5] = [
        SessionState::Initialized,
        SessionState::Recording,
        SessionState::Stopped,
        SessionState::Saved,
        SessionState::Discarded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SessionState::Initialized => "initialized",
            SessionState::Recording => "recording",
            SessionState::Stopped => "stopped",
            SessionState::Saved => "saved",
            SessionState::Discarded => "discarded",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, SessionState::Saved | SessionState::Discarded)
    }

    /// The state reached by `action`, or an error if the edge does not exist.
    pub fn apply(self, action: SessionAction) -> Result<SessionState, CoreError> {
        use SessionAction::*;
        use SessionState::*;
        match (self, action) {
            (Initialized, Start) => Ok(Recording),
            (Recording, Stop) => Ok(Stopped),
            (Stopped, Save) => Ok(Saved),
            (Stopped, Discard) => Ok(Discarded),
            (from, action) => Err(CoreError::IllegalTransition { from, action }),
        }
    }

    pub fn legal_actions(self) -> impl Iterator<Item = SessionAction> {
        SessionAction::ALL.into_iter().filter(move |a| self.apply(*a).is_ok())
    }
}

impl SessionAction {
    pub const ALL: [SessionAction; 4] =
        [SessionAction::Start, SessionAction::Stop, SessionAction::Save, SessionAction::Discard];

    pub fn as_str(self) -> &'static str {
        match self {
            SessionAction::Start => "start",
            SessionAction::Stop => "stop",
            SessionAction::Save => "save",
            SessionAction::Discard => "discard",
        }
    }
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for SessionAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SessionAction {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SessionAction::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| CoreError::Parse {
            line: 0,
            reason: alloc::format!("unknown session action {s:?}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    #[test]
    fn exhaustive_transition_table() {
        use SessionAction::*;
        use SessionState::*;
        let allowed = [
            (Initialized, Start, Recording),
            (Recording, Stop, Stopped),
            (Stopped, Save, Saved),
            (Stopped, Discard, Discarded),
        ];
        for s in SessionState::ALL {
            for a in SessionAction::ALL {
                let expected = allowed.iter().find(|(f, act, _)| *f == s && *act == a).map(|e| e.2);
                match (s.apply(a), expected) {
                    (Ok(next), Some(want)) => assert_eq!(next, want),
                    (Err(CoreError::IllegalTransition { from, action }), None) => {
                        assert_eq!((from, action), (s, a))
                    }
                    (got, want) => panic!("{s} --{a}--> {got:?}, expected {want:?}"),
                }
            }
        }
    }

    #[test]
    fn legal_actions_per_state() {
        let legal: Vec<_> = SessionState::Initialized.legal_actions().collect();
        assert_eq!(legal, [SessionAction::Start]);
        let legal: Vec<_> = SessionState::Stopped.legal_actions().collect();
        assert_eq!(legal, [SessionAction::Save, SessionAction::Discard]);
        assert_eq!(SessionState::Saved.legal_actions().count(), 0);
        assert_eq!(SessionState::Discarded.legal_actions().count(), 0);
    }

    #[test]
    fn no_path_returns_to_recording() {
        // Walk every reachable state; Recording is only entered from Initialized.
        let mut frontier = Vec::from([SessionState::Initialized]);
        let mut visited = Vec::new();
        while let Some(s) = frontier.pop() {
            if visited.contains(&s) {
                continue;
            }
            visited.push(s);
            for a in s.legal_actions() {
                let next = s.apply(a).unwrap();
                if next == SessionState::Recording {
                    assert_eq!(s, SessionState::Initialized);
                }
                frontier.push(next);
            }
        }
        assert_eq!(visited.len(), 5);
    }
}
