use alloc::string::String;
use core::fmt;

use crate::session::{SessionAction, SessionState};

#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Projection of a point at or behind the camera plane.
    ProjectionDomain { z: f64 },
    /// Zero depth where a measured depth is required.
    InvalidDepth,
    InvalidIntrinsics(&'static str),
    /// Synthetic time or body index outside the gesture's domain.
    GestureDomain(&'static str),
    DuplicateBodyIndex(u8),
    TooManyBodies(usize),
    /// A session folder name component is empty after sanitization.
    InvalidName(String),
    IllegalTransition { from: SessionState, action: SessionAction },
    Parse { line: usize, reason: String },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::ProjectionDomain { z } => {
                write!(f, "cannot project point with non-positive depth z={z}")
            }
            CoreError::InvalidDepth => f.write_str("depth must be positive"),
            CoreError::InvalidIntrinsics(why) => write!(f, "invalid camera intrinsics: {why}"),
            CoreError::GestureDomain(why) => write!(f, "gesture domain error: {why}"),
            CoreError::DuplicateBodyIndex(b) => write!(f, "duplicate body index {b}"),
            CoreError::TooManyBodies(n) => write!(f, "{n} bodies exceeds the tracking limit"),
            CoreError::InvalidName(raw) => {
                write!(f, "name {raw:?} is empty after sanitization")
            }
            CoreError::IllegalTransition { from, action } => {
                write!(f, "cannot {action} a session in state {from}")
            }
            CoreError::Parse { line, reason } => write!(f, "line {line}: {reason}"),
        }
    }
}

impl core::error::Error for CoreError {}
