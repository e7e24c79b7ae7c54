//! `camera_parameters.txt`: one `key=value` per line, LF endings.

use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use crate::error::CoreError;
use crate::frame::Point3;
use crate::mapping::{CameraIntrinsics, DeviceCalibration};

const KEYS: [&str; 15] = [
    "depth.fx",
    "depth.fy",
    "depth.cx",
    "depth.cy",
    "depth.width",
    "depth.height",
    "color.fx",
    "color.fy",
    "color.cx",
    "color.cy",
    "color.width",
    "color.height",
    "t.x",
    "t.y",
    "t.z",
];

fn write_intrinsics(out: &mut String, prefix: &str, c: &CameraIntrinsics) {
    let _ = writeln!(out, "{prefix}.fx={:.6}", c.focal_x);
    let _ = writeln!(out, "{prefix}.fy={:.6}", c.focal_y);
    let _ = writeln!(out, "{prefix}.cx={:.6}", c.principal_x);
    let _ = writeln!(out, "{prefix}.cy={:.6}", c.principal_y);
    let _ = writeln!(out, "{prefix}.width={}", c.width);
    let _ = writeln!(out, "{prefix}.height={}", c.height);
}

pub fn write_camera_parameters(calib: &DeviceCalibration) -> String {
    let mut out = String::new();
    write_intrinsics(&mut out, "depth", &calib.depth);
    write_intrinsics(&mut out, "color", &calib.color);
    let t = calib.depth_to_color_translation;
    let _ = writeln!(out, "t.x={:.6}", t.x);
    let _ = writeln!(out, "t.y={:.6}", t.y);
    let _ = writeln!(out, "t.z={:.6}", t.z);
    out
}

/// Parses the file written by [`write_camera_parameters`]. Every key must be
/// present exactly once; unknown keys are rejected.
pub fn parse_camera_parameters(text: &str) -> Result<DeviceCalibration, CoreError> {
    let mut values: [Option<&str>; 15] = [None; 15];
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CoreError::Parse {
            line: line_no,
            reason: format!("expected key=value, found {line:?}"),
        })?;
        let slot = KEYS.iter().position(|k| *k == key.trim()).ok_or_else(|| CoreError::Parse {
            line: line_no,
            reason: format!("unknown key {key:?}"),
        })?;
        if values[slot].replace(value.trim()).is_some() {
            return Err(CoreError::Parse { line: line_no, reason: format!("duplicate key {key:?}") });
        }
    }
    let get = |slot: usize| -> Result<&str, CoreError> {
        values[slot].ok_or_else(|| CoreError::Parse {
            line: 0,
            reason: format!("missing key {:?}", KEYS[slot]),
        })
    };
    let float = |slot: usize| -> Result<f64, CoreError> {
        let v = get(slot)?;
        v.parse().map_err(|_| CoreError::Parse {
            line: 0,
            reason: format!("{}: bad number {v:?}", KEYS[slot]),
        })
    };
    let int = |slot: usize| -> Result<usize, CoreError> {
        let v = get(slot)?;
        v.parse().map_err(|_| CoreError::Parse {
            line: 0,
            reason: format!("{}: bad integer {v:?}", KEYS[slot]),
        })
    };
    let intrinsics = |base: usize| -> Result<CameraIntrinsics, CoreError> {
        Ok(CameraIntrinsics {
            focal_x: float(base)?,
            focal_y: float(base + 1)?,
            principal_x: float(base + 2)?,
            principal_y: float(base + 3)?,
            width: int(base + 4)?,
            height: int(base + 5)?,
        })
    };
    Ok(DeviceCalibration {
        depth: intrinsics(0)?,
        color: intrinsics(6)?,
        depth_to_color_translation: Point3::new(float(12)?, float(13)?, float(14)?),
    })
}
