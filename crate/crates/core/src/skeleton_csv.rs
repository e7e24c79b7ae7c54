//! Per-frame skeleton rows.
//!
//! Each body contributes 25 LF-terminated rows in joint ordinal order:
//!
//! ```text
//! JointType:,WristRight,CameraSpacePoint:,X:0.120000 Y:0.310000 Z:2.050000,DepthSpacePoint:,X:277.365854 Y:156.809756,ColorSpacePoint:,X:1004.321000 Y:380.222000
//! ```
//!
//! Bodies follow each other in body-index order. Values carry six decimals.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::CoreError;
use crate::frame::{Joint, JointType, Point2, Point3, Skeleton, TrackingState, JOINT_COUNT};

pub fn write_joint_row(out: &mut String, joint: &Joint) {
    let Joint { camera: c, depth: d, color: k, .. } = joint;
    // Writing into a String cannot fail.
    let _ = writeln!(
        out,
        "JointType:,{},CameraSpacePoint:,X:{:.6} Y:{:.6} Z:{:.6},DepthSpacePoint:,X:{:.6} Y:{:.6},ColorSpacePoint:,X:{:.6} Y:{:.6}",
        joint.joint_type.name(),
        c.x,
        c.y,
        c.z,
        d.x,
        d.y,
        k.x,
        k.y
    );
}

/// Serializes skeletons in body-index order, joints in ordinal order.
pub fn serialize_skeleton_rows(skeletons: &[Skeleton]) -> String {
    let mut ordered: Vec<&Skeleton> = skeletons.iter().collect();
    ordered.sort_by_key(|s| s.body_index);
    let mut out = String::with_capacity(ordered.len() * JOINT_COUNT * 140);
    for s in ordered {
        let mut joints: Vec<&Joint> = s.joints.iter().collect();
        joints.sort_by_key(|j| j.joint_type.ordinal());
        for j in joints {
            write_joint_row(&mut out, j);
        }
    }
    out
}

fn parse_err(line: usize, reason: impl Into<String>) -> CoreError {
    CoreError::Parse { line, reason: reason.into() }
}

/// Parses `X:<x> Y:<y>[ Z:<z>]` into its numbers, checking the axis labels.
fn parse_coords<const N: usize>(line: usize, field: &str) -> Result<[f64; N], CoreError> {
    const AXES: [&str; 3] = ["X:", "Y:", "Z:"];
    let mut out = [0.0; N];
    let mut parts = field.split(' ');
    for (slot, axis) in out.iter_mut().zip(AXES) {
        let part = parts.next().ok_or_else(|| parse_err(line, format!("missing {axis}")))?;
        let num = part
            .strip_prefix(axis)
            .ok_or_else(|| parse_err(line, format!("expected {axis} in {part:?}")))?;
        *slot = num.parse().map_err(|_| parse_err(line, format!("bad number {num:?}")))?;
    }
    if parts.next().is_some() {
        return Err(parse_err(line, format!("trailing data in {field:?}")));
    }
    Ok(out)
}

/// Parses one row. `line` is 1-based and only used in error messages.
pub fn parse_joint_row(line: usize, row: &str) -> Result<Joint, CoreError> {
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 8 {
        return Err(parse_err(line, format!("expected 8 fields, found {}", fields.len())));
    }
    for (i, label) in
        [(0, "JointType:"), (2, "CameraSpacePoint:"), (4, "DepthSpacePoint:"), (6, "ColorSpacePoint:")]
    {
        if fields[i] != label {
            return Err(parse_err(line, format!("expected {label:?}, found {:?}", fields[i])));
        }
    }
    let joint_type = JointType::from_name(fields[1])
        .ok_or_else(|| parse_err(line, format!("unknown joint {:?}", fields[1])))?;
    let [x, y, z] = parse_coords::<3>(line, fields[3])?;
    let [dx, dy] = parse_coords::<2>(line, fields[5])?;
    let [cx, cy] = parse_coords::<2>(line, fields[7])?;
    // Tracking state is not persisted; a positive depth is the best evidence.
    let tracking = if z > 0.0 { TrackingState::Tracked } else { TrackingState::NotTracked };
    Ok(Joint::new(
        joint_type,
        Point3::new(x, y, z),
        Point2::new(dx, dy),
        Point2::new(cx, cy),
        tracking,
    ))
}

/// Parses a skeleton file. Bodies receive sequential indices from 0; the
/// caller may relabel them.
pub fn parse_skeleton_rows(text: &str) -> Result<Vec<Skeleton>, CoreError> {
    let mut skeletons = Vec::new();
    let mut current: Vec<Joint> = Vec::with_capacity(JOINT_COUNT);
    let mut rows = 0;
    for (i, row) in text.split_terminator('\n').enumerate() {
        let line = i + 1;
        let joint = parse_joint_row(line, row)?;
        let expected = JointType::ALL[current.len()];
        if joint.joint_type != expected {
            return Err(parse_err(
                line,
                format!("expected joint {expected}, found {}", joint.joint_type),
            ));
        }
        current.push(joint);
        rows += 1;
        if current.len() == JOINT_COUNT {
            let body_index = u8::try_from(skeletons.len())
                .map_err(|_| parse_err(line, "too many bodies"))?;
            skeletons.push(Skeleton { body_index, joints: core::mem::take(&mut current) });
        }
    }
    if !current.is_empty() {
        return Err(parse_err(rows, format!("{rows} rows is not a multiple of {JOINT_COUNT}")));
    }
    Ok(skeletons)
}
