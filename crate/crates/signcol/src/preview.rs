//! Downscaled live-preview messages.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use signcol_core::frame::{COLOR_WIDTH, DEPTH_WIDTH, MAX_DEPTH_MM};
use signcol_core::FrameBundle;

pub const COLOR_THUMB_WIDTH: usize = 480;
pub const COLOR_THUMB_HEIGHT: usize = 270;
pub const DEPTH_THUMB_WIDTH: usize = 256;
pub const DEPTH_THUMB_HEIGHT: usize = 212;

/// One preview frame as sent over the stream. Thumbnails are raw row-major
/// pixels, base64-encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreviewMessage {
    pub frame_index: u64,
    pub timestamp: u64,
    pub color_width: usize,
    pub color_height: usize,
    /// 8-bit RGB.
    pub color: String,
    pub depth_width: usize,
    pub depth_height: usize,
    /// 8-bit gray, depth scaled so 8000 mm maps to 255.
    pub depth: String,
    /// Depth-image coordinates of every joint, bodies concatenated.
    pub joints: Vec<[f64; 2]>,
}

fn color_thumbnail(bundle: &FrameBundle) -> Vec<u8> {
    let step = COLOR_WIDTH / COLOR_THUMB_WIDTH;
    let mut out = Vec::with_capacity(COLOR_THUMB_WIDTH * COLOR_THUMB_HEIGHT * 3);
    for y in 0..COLOR_THUMB_HEIGHT {
        for x in 0..COLOR_THUMB_WIDTH {
            out.extend_from_slice(&bundle.color.pixel(x * step, y * step));
        }
    }
    out
}

fn depth_thumbnail(bundle: &FrameBundle) -> Vec<u8> {
    let step = DEPTH_WIDTH / DEPTH_THUMB_WIDTH;
    let mut out = Vec::with_capacity(DEPTH_THUMB_WIDTH * DEPTH_THUMB_HEIGHT);
    for y in 0..DEPTH_THUMB_HEIGHT {
        for x in 0..DEPTH_THUMB_WIDTH {
            let d = u32::from(bundle.depth.data[y * step * DEPTH_WIDTH + x * step].min(MAX_DEPTH_MM));
            out.push((d * 255 / u32::from(MAX_DEPTH_MM)) as u8);
        }
    }
    out
}

impl PreviewMessage {
    pub fn from_bundle(bundle: &FrameBundle) -> Self {
        let mut skeletons: Vec<_> = bundle.skeletons.iter().collect();
        skeletons.sort_by_key(|s| s.body_index);
        PreviewMessage {
            frame_index: bundle.frame_index,
            timestamp: bundle.timestamp_ms,
            color_width: COLOR_THUMB_WIDTH,
            color_height: COLOR_THUMB_HEIGHT,
            color: STANDARD.encode(color_thumbnail(bundle)),
            depth_width: DEPTH_THUMB_WIDTH,
            depth_height: DEPTH_THUMB_HEIGHT,
            depth: STANDARD.encode(depth_thumbnail(bundle)),
            joints: skeletons.iter().flat_map(|s| s.joints.iter()).map(|j| [j.depth.x, j.depth.y]).collect(),
        }
    }
}
