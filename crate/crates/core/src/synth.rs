//! Deterministic synthetic gestures and the sensor images they would produce.
//!
//! Every body stands facing the camera in a canonical pose while its right
//! hand traces the gesture trajectory. Bodies are spread laterally 0.8 m
//! apart. Images are rendered as filled disks around each projected joint,
//! which keeps per-pixel occlusion checkable by brute force.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::category::SignCategory;
use crate::error::CoreError;
use crate::frame::{
    BodyIndexFrame, ColorFrame, DepthFrame, FrameBundle, InfraredFrame, Joint, JointType,
    MappedBodyFrame, Point2, Point3, Skeleton, TrackingState, BACKGROUND, COLOR_HEIGHT,
    COLOR_PIXELS, COLOR_WIDTH, DEPTH_HEIGHT, DEPTH_PIXELS, DEPTH_WIDTH, JOINT_COUNT, MAX_BODIES,
    MAX_DEPTH_MM, MIN_DEPTH_MM,
};
use crate::mapping::{camera_to_color, camera_to_depth, render_mapped_bodies, DeviceCalibration};
use crate::source::{timestamp_ms, FrameSource};

/// Lateral spacing between bodies, meters.
pub const BODY_SPACING: f64 = 0.8;
/// Full circles drawn per gesture duration by [`MotionKind::Circle`].
pub const CIRCLE_TURNS: f64 = 2.0;

pub const BACKGROUND_GRAY: [u8; 3] = [128, 128, 128];

/// Solid color of each body in the synthetic color image.
pub const BODY_COLORS: [[u8; 3]; MAX_BODIES] = [
    [230, 60, 50],
    [50, 160, 70],
    [40, 90, 220],
    [240, 190, 30],
    [160, 60, 200],
    [30, 200, 210],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MotionKind {
    Arc,
    StraightLine,
    Circle,
    Static,
}

impl MotionKind {
    pub const ALL: [MotionKind; 4] =
        [MotionKind::Arc, MotionKind::StraightLine, MotionKind::Circle, MotionKind::Static];

    pub fn as_str(self) -> &'static str {
        match self {
            MotionKind::Arc => "arc",
            MotionKind::StraightLine => "straight-line",
            MotionKind::Circle => "circle",
            MotionKind::Static => "static",
        }
    }

    /// Default movement used when capturing an item of `category`.
    pub fn for_category(category: SignCategory) -> MotionKind {
        match category {
            SignCategory::NumberBelowTen | SignCategory::AlphabetLetter => MotionKind::Static,
            SignCategory::NumberAboveTen
            | SignCategory::WordByLetters
            | SignCategory::SentenceByWords => MotionKind::StraightLine,
            SignCategory::WordBySign => MotionKind::Arc,
            SignCategory::SentenceBySigns | SignCategory::ArbitrarySentence => MotionKind::Circle,
        }
    }
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotionKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        MotionKind::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s) || (s.eq_ignore_ascii_case("line") && *m == MotionKind::StraightLine))
            .ok_or(CoreError::GestureDomain("unknown motion kind"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GestureSpec {
    pub motion: MotionKind,
    /// Seconds.
    pub duration: f64,
    pub body_count: u8,
    pub seed: u64,
}

impl GestureSpec {
    pub fn new(motion: MotionKind, duration: f64, body_count: u8, seed: u64) -> Result<Self, CoreError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(CoreError::GestureDomain("duration must be positive"));
        }
        if body_count == 0 || usize::from(body_count) > MAX_BODIES {
            return Err(CoreError::GestureDomain("body count must be in 1..=6"));
        }
        Ok(GestureSpec { motion, duration, body_count, seed })
    }

    /// Period of the circular trajectory, seconds.
    pub fn circle_period(&self) -> f64 {
        self.duration / CIRCLE_TURNS
    }
}

/// splitmix64 step.
fn mix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit(state: &mut u64) -> f64 {
    (mix(state) >> 11) as f64 / (1u64 << 53) as f64
}

/// Per-body variation drawn from the gesture seed.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BodyParams {
    height_scale: f64,
    radius: f64,
    phase: f64,
}

impl BodyParams {
    fn new(seed: u64, body: u8) -> Self {
        let mut state = seed ^ (u64::from(body) + 1).wrapping_mul(0xD6E8_FEB8_6659_FD93);
        BodyParams {
            height_scale: 0.92 + 0.16 * unit(&mut state),
            radius: 0.10 + 0.06 * unit(&mut state),
            phase: 2.0 * PI * unit(&mut state),
        }
    }
}

/// Right-wrist displacement from its rest position at time `t`.
fn trajectory(spec: &GestureSpec, params: &BodyParams, t: f64) -> Point3 {
    let r = params.radius;
    match spec.motion {
        MotionKind::Static => Point3::default(),
        MotionKind::StraightLine => Point3::new(-r + 2.0 * r * (t / spec.duration), 0.0, 0.0),
        MotionKind::Arc => {
            let theta = PI * t / spec.duration;
            Point3::new(-r * libm::cos(theta), r * libm::sin(theta), 0.0)
        }
        MotionKind::Circle => {
            let w = 2.0 * PI * t / spec.circle_period() + params.phase;
            Point3::new(r * libm::cos(w), r * libm::sin(w), 0.0)
        }
    }
}

/// Position of body `body`'s SpineBase for a scene of `body_count` bodies.
pub fn body_root(body: u8, body_count: u8) -> Point3 {
    let centered = f64::from(body) - (f64::from(body_count) - 1.0) / 2.0;
    Point3::new(centered * BODY_SPACING, -0.1, 2.5 + 0.25 * (f64::from(body_count) - 1.0))
}

/// Joint offsets from SpineBase of a standing body facing the camera, meters
/// at unit height scale. The right arm is replaced by the gesture.
const REST_POSE: [(f64, f64, f64); JOINT_COUNT] = [
    (0.0, 0.0, 0.0),       // SpineBase
    (0.0, 0.30, 0.0),      // SpineMid
    (0.0, 0.58, 0.0),      // Neck
    (0.0, 0.72, 0.0),      // Head
    (0.18, 0.48, 0.0),     // ShoulderLeft
    (0.22, 0.22, 0.02),    // ElbowLeft
    (0.24, 0.0, 0.0),      // WristLeft
    (0.25, -0.07, 0.0),    // HandLeft
    (-0.18, 0.48, 0.0),    // ShoulderRight
    (-0.22, 0.22, 0.02),   // ElbowRight
    (-0.24, 0.0, 0.0),     // WristRight
    (-0.25, -0.07, 0.0),   // HandRight
    (0.09, -0.05, 0.0),    // HipLeft
    (0.10, -0.48, 0.0),    // KneeLeft
    (0.10, -0.88, 0.0),    // AnkleLeft
    (0.10, -0.93, -0.10),  // FootLeft
    (-0.09, -0.05, 0.0),   // HipRight
    (-0.10, -0.48, 0.0),   // KneeRight
    (-0.10, -0.88, 0.0),   // AnkleRight
    (-0.10, -0.93, -0.10), // FootRight
    (0.0, 0.50, 0.0),      // SpineShoulder
    (0.25, -0.14, 0.0),    // HandTipLeft
    (0.22, -0.09, -0.03),  // ThumbLeft
    (-0.25, -0.14, 0.0),   // HandTipRight
    (-0.22, -0.09, -0.03), // ThumbRight
];

/// Rest position of the signing wrist relative to SpineBase: raised in front
/// of the chest.
const SIGNING_WRIST: (f64, f64, f64) = (-0.12, 0.42, -0.30);

fn p3((x, y, z): (f64, f64, f64)) -> Point3 {
    Point3::new(x, y, z)
}

/// Camera-space joint positions of one signing body.
pub fn body_pose(root: Point3, height_scale: f64, wrist_displacement: Point3) -> [Point3; JOINT_COUNT] {
    let mut out = [Point3::default(); JOINT_COUNT];
    for (slot, offset) in out.iter_mut().zip(REST_POSE) {
        *slot = root + p3(offset).scale(height_scale);
    }
    let h = height_scale;
    let shoulder = out[JointType::ShoulderRight.ordinal()];
    let wrist = root + p3(SIGNING_WRIST).scale(h) + wrist_displacement;
    let elbow = shoulder + (wrist - shoulder).scale(0.5) + Point3::new(-0.06, -0.12, 0.06).scale(h);
    out[JointType::WristRight.ordinal()] = wrist;
    out[JointType::ElbowRight.ordinal()] = elbow;
    out[JointType::HandRight.ordinal()] = wrist + Point3::new(0.0, 0.07, -0.01).scale(h);
    out[JointType::HandTipRight.ordinal()] = wrist + Point3::new(0.0, 0.15, -0.01).scale(h);
    out[JointType::ThumbRight.ordinal()] = wrist + Point3::new(0.04, 0.08, -0.03).scale(h);
    out
}

/// Attaches depth- and color-image coordinates to camera-space positions.
pub fn skeleton_from_positions(
    body_index: u8,
    positions: &[Point3; JOINT_COUNT],
    calib: &DeviceCalibration,
) -> Skeleton {
    let joints = JointType::ALL
        .iter()
        .zip(positions)
        .map(|(&jt, &camera)| {
            match (camera_to_depth(camera, &calib.depth), camera_to_color(camera, calib)) {
                (Ok(d), Ok(c)) => Joint::new(jt, camera, d.point, c.point, TrackingState::Tracked),
                _ => Joint::new(jt, camera, Point2::new(-1.0, -1.0), Point2::new(-1.0, -1.0), TrackingState::NotTracked),
            }
        })
        .collect();
    Skeleton { body_index, joints }
}

/// Skeleton of `body` at `t` seconds into the gesture.
pub fn synthetic_skeleton(
    spec: &GestureSpec,
    body: u8,
    t: f64,
    calib: &DeviceCalibration,
) -> Result<Skeleton, CoreError> {
    if !(0.0..=spec.duration).contains(&t) {
        return Err(CoreError::GestureDomain("time outside the gesture duration"));
    }
    if body >= spec.body_count {
        return Err(CoreError::GestureDomain("body index outside the scene"));
    }
    let params = BodyParams::new(spec.seed, body);
    let positions = body_pose(
        body_root(body, spec.body_count),
        params.height_scale,
        trajectory(spec, &params, t),
    );
    Ok(skeleton_from_positions(body, &positions, calib))
}

/// Physical radius of the disk drawn around each joint, meters.
pub fn joint_radius(joint: JointType) -> f64 {
    use JointType::*;
    match joint {
        SpineBase | SpineMid => 0.12,
        SpineShoulder => 0.11,
        Head => 0.10,
        HipLeft | HipRight => 0.08,
        ShoulderLeft | ShoulderRight => 0.07,
        Neck | KneeLeft | KneeRight => 0.06,
        ElbowLeft | ElbowRight | FootLeft | FootRight => 0.05,
        HandLeft | HandRight | AnkleLeft | AnkleRight => 0.045,
        WristLeft | WristRight => 0.04,
        HandTipLeft | HandTipRight | ThumbLeft | ThumbRight => 0.025,
    }
}

/// A filled image-space disk: pixel (u, v) is covered when its center lies
/// within `radius` of `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub fn covers(&self, u: usize, v: usize) -> bool {
        let dx = u as f64 - self.center.x;
        let dy = v as f64 - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }

    /// Visits every covered pixel inside a `width`x`height` image.
    fn for_each_pixel(&self, width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
        let r = self.radius;
        let lo = |c: f64| libm::ceil(c - r).max(0.0);
        let (x0, y0) = (lo(self.center.x), lo(self.center.y));
        let x1 = libm::floor(self.center.x + r).min(width as f64 - 1.0);
        let y1 = libm::floor(self.center.y + r).min(height as f64 - 1.0);
        if !(x0 <= x1 && y0 <= y1) {
            return;
        }
        for v in y0 as usize..=y1 as usize {
            for u in x0 as usize..=x1 as usize {
                if self.covers(u, v) {
                    f(u, v);
                }
            }
        }
    }
}

/// Depth reading a sensor would return for camera-space depth `z` meters,
/// or `None` outside the measurable range.
pub fn depth_reading(z: f64) -> Option<u16> {
    let mm = libm::round(z * 1000.0);
    (f64::from(MIN_DEPTH_MM)..=f64::from(MAX_DEPTH_MM)).contains(&mm).then_some(mm as u16)
}

/// Disk drawn for `joint` in the depth image, with its depth reading.
pub fn depth_disk(joint: &Joint, calib: &DeviceCalibration) -> Option<(Disk, u16)> {
    let depth = depth_reading(joint.camera.z)?;
    let center = camera_to_depth(joint.camera, &calib.depth).ok()?.point;
    let radius = joint_radius(joint.joint_type) * calib.depth.focal_x / joint.camera.z;
    Some((Disk { center, radius }, depth))
}

fn color_disk(joint: &Joint, calib: &DeviceCalibration) -> Option<(Disk, f64)> {
    let p = joint.camera + calib.depth_to_color_translation;
    let center = camera_to_color(joint.camera, calib).ok()?.point;
    Some((Disk { center, radius: joint_radius(joint.joint_type) * calib.color.focal_x / p.z }, p.z))
}

/// Infrared intensity for a depth reading: `255 * (1 - d / 8000)`, rounded;
/// pixels without a reading are dark.
pub fn infrared_intensity(depth_mm: u16) -> u8 {
    if depth_mm == 0 {
        return 0;
    }
    let d = u32::from(depth_mm.min(MAX_DEPTH_MM));
    let max = u32::from(MAX_DEPTH_MM);
    ((255 * (max - d) + max / 2) / max) as u8
}

/// All image modalities of one synthetic instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFrames {
    pub color: ColorFrame,
    pub depth: DepthFrame,
    pub infrared: InfraredFrame,
    pub body_index: BodyIndexFrame,
    pub mapped_body: MappedBodyFrame,
}

impl SceneFrames {
    pub fn into_bundle(self, frame_index: u64, timestamp_ms: u64, skeletons: Vec<Skeleton>) -> FrameBundle {
        FrameBundle {
            frame_index,
            timestamp_ms,
            color: self.color,
            depth: self.depth,
            infrared: self.infrared,
            body_index: self.body_index,
            mapped_body: self.mapped_body,
            skeletons,
        }
    }
}

/// Renders what the sensor would capture of `skeletons`. The nearest surface
/// wins every pixel; equal depths keep the body drawn first (lowest index).
pub fn rasterize(skeletons: &[Skeleton], calib: &DeviceCalibration) -> Result<SceneFrames, CoreError> {
    if skeletons.len() > MAX_BODIES {
        return Err(CoreError::TooManyBodies(skeletons.len()));
    }
    let mut ordered: Vec<&Skeleton> = skeletons.iter().collect();
    ordered.sort_by_key(|s| s.body_index);
    for (i, s) in ordered.iter().enumerate() {
        if usize::from(s.body_index) >= MAX_BODIES {
            return Err(CoreError::GestureDomain("body index out of range"));
        }
        if i > 0 && ordered[i - 1].body_index == s.body_index {
            return Err(CoreError::DuplicateBodyIndex(s.body_index));
        }
    }

    let mut depth = DepthFrame::empty();
    let mut body_index = BodyIndexFrame::background();
    let mut color = ColorFrame::filled(BACKGROUND_GRAY);
    let mut color_z = vec![f64::INFINITY; COLOR_PIXELS];

    for s in &ordered {
        let label = s.body_index;
        let rgb = BODY_COLORS[usize::from(label)];
        for joint in &s.joints {
            if let Some((disk, mm)) = depth_disk(joint, calib) {
                disk.for_each_pixel(DEPTH_WIDTH, DEPTH_HEIGHT, |u, v| {
                    let i = v * DEPTH_WIDTH + u;
                    if depth.data[i] == 0 || mm < depth.data[i] {
                        depth.data[i] = mm;
                        body_index.data[i] = label;
                    }
                });
            }
            if let Some((disk, z)) = color_disk(joint, calib) {
                if z > 0.0 {
                    disk.for_each_pixel(COLOR_WIDTH, COLOR_HEIGHT, |u, v| {
                        let i = v * COLOR_WIDTH + u;
                        if z < color_z[i] {
                            color_z[i] = z;
                            color.data[i * 3..i * 3 + 3].copy_from_slice(&rgb);
                        }
                    });
                }
            }
        }
    }
    debug_assert_eq!(depth.data.len(), DEPTH_PIXELS);

    let infrared = InfraredFrame { data: depth.data.iter().map(|&d| infrared_intensity(d)).collect() };
    let mapped_body = render_mapped_bodies(&color, &depth, &body_index, calib);
    debug_assert!(body_index.data.iter().all(|&b| b == BACKGROUND || usize::from(b) < MAX_BODIES));
    Ok(SceneFrames { color, depth, infrared, body_index, mapped_body })
}

/// Synthetic stand-in for the sensor, looping the gesture indefinitely or
/// for a fixed number of frames.
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    spec: GestureSpec,
    calib: DeviceCalibration,
    rate: f64,
    limit: Option<u64>,
    next_index: u64,
}

impl SyntheticSource {
    pub fn new(spec: GestureSpec, calib: DeviceCalibration, rate: f64) -> Result<Self, CoreError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(CoreError::GestureDomain("frame rate must be positive"));
        }
        Ok(SyntheticSource { spec, calib, rate, limit: None, next_index: 0 })
    }

    /// Ends the stream after `frames` bundles.
    pub fn with_limit(mut self, frames: u64) -> Self {
        self.limit = Some(frames);
        self
    }

    pub fn spec(&self) -> &GestureSpec {
        &self.spec
    }

    /// Gesture time of frame `index`, wrapping at the gesture duration.
    pub fn gesture_time(&self, index: u64) -> f64 {
        let t = index as f64 / self.rate;
        t - libm::floor(t / self.spec.duration) * self.spec.duration
    }

    pub fn bundle_at(&self, index: u64) -> Result<FrameBundle, CoreError> {
        let t = self.gesture_time(index).min(self.spec.duration);
        let skeletons = (0..self.spec.body_count)
            .map(|b| synthetic_skeleton(&self.spec, b, t, &self.calib))
            .collect::<Result<Vec<_>, _>>()?;
        let frames = rasterize(&skeletons, &self.calib)?;
        Ok(frames.into_bundle(index, timestamp_ms(index, self.rate), skeletons))
    }
}

impl FrameSource for SyntheticSource {
    type Error = CoreError;

    fn calibration(&self) -> DeviceCalibration {
        self.calib
    }

    fn nominal_rate(&self) -> f64 {
        self.rate
    }

    fn next_bundle(&mut self) -> Result<Option<FrameBundle>, CoreError> {
        if self.limit.is_some_and(|l| self.next_index >= l) {
            return Ok(None);
        }
        let bundle = self.bundle_at(self.next_index)?;
        self.next_index += 1;
        Ok(Some(bundle))
    }
}
