//! Hardware-independent core of a sign-gesture collection system.
//!
//! Everything in this crate is pure computation over in-memory values: the
//! multi-modality frame model of a time-of-flight body-tracking sensor, the
//! pinhole geometry tying camera, depth and color spaces together, a
//! deterministic synthetic gesture source, and the text formats used for
//! skeleton rows and camera parameters. File and network IO live in the
//! `signcol` crate.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod camera_params;
pub mod category;
pub mod error;
pub mod frame;
pub mod mapping;
pub mod naming;
pub mod session;
pub mod skeleton_csv;
pub mod source;
pub mod synth;

pub use category::SignCategory;
pub use error::CoreError;
pub use frame::{
    BodyIndexFrame, ColorFrame, DepthFrame, FrameBundle, InfraredFrame, Joint, JointType,
    MappedBodyFrame, Point2, Point3, Skeleton, TrackingState, Violation,
};
pub use mapping::{CameraIntrinsics, DeviceCalibration, Projection};
pub use session::{SessionAction, SessionState};
pub use source::FrameSource;
pub use synth::{GestureSpec, MotionKind, SyntheticSource};
