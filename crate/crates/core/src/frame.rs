//! Modality frames, skeletons and synchronized frame bundles.
//!
//! Frame buffers are plain row-major vectors so that invalid values can be
//! represented; [`FrameBundle::validate`] reports every invariant violation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub const COLOR_WIDTH: usize = 1920;
pub const COLOR_HEIGHT: usize = 1080;
pub const DEPTH_WIDTH: usize = 512;
pub const DEPTH_HEIGHT: usize = 424;
pub const DEPTH_PIXELS: usize = DEPTH_WIDTH * DEPTH_HEIGHT;
pub const COLOR_PIXELS: usize = COLOR_WIDTH * COLOR_HEIGHT;

pub const JOINT_COUNT: usize = 25;
pub const MAX_BODIES: usize = 6;

/// Nearest valid depth reading, millimeters.
pub const MIN_DEPTH_MM: u16 = 500;
/// Farthest valid depth reading, millimeters.
pub const MAX_DEPTH_MM: u16 = 8000;
/// Body-index label for pixels that belong to no body.
pub const BACKGROUND: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum JointType {
    SpineBase = 0,
    SpineMid,
    Neck,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
    SpineShoulder,
    HandTipLeft,
    ThumbLeft,
    HandTipRight,
    ThumbRight,
}

impl JointType {
    /// All joints in ordinal order; this is the row order of skeleton files.
    pub const ALL: [JointType; JOINT_COUNT] = [
        JointType::SpineBase,
        JointType::SpineMid,
        JointType::Neck,
        JointType::Head,
        JointType::ShoulderLeft,
        JointType::ElbowLeft,
        JointType::WristLeft,
        JointType::HandLeft,
        JointType::ShoulderRight,
        JointType::ElbowRight,
        JointType::WristRight,
        JointType::HandRight,
        JointType::HipLeft,
        JointType::KneeLeft,
        JointType::AnkleLeft,
        JointType::FootLeft,
        JointType::HipRight,
        JointType::KneeRight,
        JointType::AnkleRight,
        JointType::FootRight,
        JointType::SpineShoulder,
        JointType::HandTipLeft,
        JointType::ThumbLeft,
        JointType::HandTipRight,
        JointType::ThumbRight,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<JointType> {
        Self::ALL.get(ordinal).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            JointType::SpineBase => "SpineBase",
            JointType::SpineMid => "SpineMid",
            JointType::Neck => "Neck",
            JointType::Head => "Head",
            JointType::ShoulderLeft => "ShoulderLeft",
            JointType::ElbowLeft => "ElbowLeft",
            JointType::WristLeft => "WristLeft",
            JointType::HandLeft => "HandLeft",
            JointType::ShoulderRight => "ShoulderRight",
            JointType::ElbowRight => "ElbowRight",
            JointType::WristRight => "WristRight",
            JointType::HandRight => "HandRight",
            JointType::HipLeft => "HipLeft",
            JointType::KneeLeft => "KneeLeft",
            JointType::AnkleLeft => "AnkleLeft",
            JointType::FootLeft => "FootLeft",
            JointType::HipRight => "HipRight",
            JointType::KneeRight => "KneeRight",
            JointType::AnkleRight => "AnkleRight",
            JointType::FootRight => "FootRight",
            JointType::SpineShoulder => "SpineShoulder",
            JointType::HandTipLeft => "HandTipLeft",
            JointType::ThumbLeft => "ThumbLeft",
            JointType::HandTipRight => "HandTipRight",
            JointType::ThumbRight => "ThumbRight",
        }
    }

    pub fn from_name(name: &str) -> Option<JointType> {
        Self::ALL.iter().copied().find(|j| j.name() == name)
    }
}

impl fmt::Display for JointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Camera-space point in meters: X right, Y up, Z forward from the depth camera.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn scale(self, s: f64) -> Self {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl core::ops::Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl core::ops::Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Image-space point in pixels; rows grow downwards.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn within(self, width: usize, height: usize) -> bool {
        self.x >= 0.0 && self.x < width as f64 && self.y >= 0.0 && self.y < height as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackingState {
    Tracked,
    Inferred,
    NotTracked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint {
    pub joint_type: JointType,
    pub camera: Point3,
    pub depth: Point2,
    pub color: Point2,
    pub depth_in_frame: bool,
    pub color_in_frame: bool,
    pub tracking_state: TrackingState,
}

impl Joint {
    /// Builds a joint whose in-frame flags are derived from the image bounds.
    pub fn new(
        joint_type: JointType,
        camera: Point3,
        depth: Point2,
        color: Point2,
        tracking_state: TrackingState,
    ) -> Self {
        Joint {
            joint_type,
            camera,
            depth,
            color,
            depth_in_frame: depth.within(DEPTH_WIDTH, DEPTH_HEIGHT),
            color_in_frame: color.within(COLOR_WIDTH, COLOR_HEIGHT),
            tracking_state,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub body_index: u8,
    /// One joint per [`JointType`], in ordinal order.
    pub joints: Vec<Joint>,
}

impl Skeleton {
    pub fn joint(&self, joint_type: JointType) -> Option<&Joint> {
        self.joints.iter().find(|j| j.joint_type == joint_type)
    }
}

/// 8-bit RGB, 1920x1080.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorFrame {
    pub data: Vec<u8>,
}

impl ColorFrame {
    pub fn filled(rgb: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(COLOR_PIXELS * 3);
        for _ in 0..COLOR_PIXELS {
            data.extend_from_slice(&rgb);
        }
        ColorFrame { data }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * COLOR_WIDTH + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// 16-bit depth in millimeters, 512x424; 0 marks an invalid reading.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    pub data: Vec<u16>,
}

impl DepthFrame {
    pub fn empty() -> Self {
        DepthFrame { data: vec![0; DEPTH_PIXELS] }
    }
}

/// 8-bit infrared intensity, 512x424.
#[derive(Debug, Clone, PartialEq)]
pub struct InfraredFrame {
    pub data: Vec<u8>,
}

/// Per-depth-pixel body label, 512x424: 0..=5 or [`BACKGROUND`].
#[derive(Debug, Clone, PartialEq)]
pub struct BodyIndexFrame {
    pub data: Vec<u8>,
}

impl BodyIndexFrame {
    pub fn background() -> Self {
        BodyIndexFrame { data: vec![BACKGROUND; DEPTH_PIXELS] }
    }
}

/// Color pixels of tracked bodies resampled onto the depth image grid, 8-bit
/// RGB 512x424, black elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedBodyFrame {
    pub data: Vec<u8>,
}

impl MappedBodyFrame {
    pub fn black() -> Self {
        MappedBodyFrame { data: vec![0; DEPTH_PIXELS * 3] }
    }

    pub fn pixel(&self, index: usize) -> [u8; 3] {
        let i = index * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn is_black(&self, index: usize) -> bool {
        self.pixel(index) == [0, 0, 0]
    }
}

/// Everything captured at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub frame_index: u64,
    /// Milliseconds since session start.
    pub timestamp_ms: u64,
    pub color: ColorFrame,
    pub depth: DepthFrame,
    pub infrared: InfraredFrame,
    pub body_index: BodyIndexFrame,
    pub mapped_body: MappedBodyFrame,
    pub skeletons: Vec<Skeleton>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Color,
    Depth,
    Infrared,
    BodyIndex,
    MappedBody,
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameKind::Color => "ColorFrame",
            FrameKind::Depth => "DepthFrame",
            FrameKind::Infrared => "InfraredFrame",
            FrameKind::BodyIndex => "BodyIndexFrame",
            FrameKind::MappedBody => "MappedBodyFrame",
        })
    }
}

/// One broken invariant. Pixel-level violations are aggregated per frame and
/// carry the first offending pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    FrameSize { frame: FrameKind, expected: usize, actual: usize },
    DepthOutOfRange { count: usize, first_pixel: usize, value: u16 },
    BodyIndexValue { count: usize, first_pixel: usize, value: u8 },
    MappedOutsideMask { count: usize, first_pixel: usize },
    TooManySkeletons { count: usize },
    DuplicateBodyIndex { body_index: u8 },
    SkeletonBodyIndex { body_index: u8 },
    JointCount { body_index: u8, count: usize },
    JointCoverage { body_index: u8, missing: JointType },
    TrackedJointDepth { body_index: u8, joint: JointType },
    DepthPointFlag { body_index: u8, joint: JointType },
    ColorPointFlag { body_index: u8, joint: JointType },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FrameSize { frame, expected, actual } => {
                write!(f, "{frame}: expected {expected} samples, found {actual}")
            }
            Violation::DepthOutOfRange { count, first_pixel, value } => write!(
                f,
                "DepthFrame: {count} samples outside [{MIN_DEPTH_MM}, {MAX_DEPTH_MM}] mm \
                 (first at pixel {first_pixel}: {value})"
            ),
            Violation::BodyIndexValue { count, first_pixel, value } => write!(
                f,
                "BodyIndexFrame: {count} samples outside {{0..5, 255}} \
                 (first at pixel {first_pixel}: {value})"
            ),
            Violation::MappedOutsideMask { count, first_pixel } => write!(
                f,
                "MappedBodyFrame: {count} non-black pixels outside the body mask \
                 (first at pixel {first_pixel})"
            ),
            Violation::TooManySkeletons { count } => {
                write!(f, "{count} skeletons exceeds the limit of {MAX_BODIES}")
            }
            Violation::DuplicateBodyIndex { body_index } => {
                write!(f, "duplicate skeleton body index {body_index}")
            }
            Violation::SkeletonBodyIndex { body_index } => {
                write!(f, "skeleton body index {body_index} out of range")
            }
            Violation::JointCount { body_index, count } => {
                write!(f, "skeleton {body_index}: {count} joints, expected {JOINT_COUNT}")
            }
            Violation::JointCoverage { body_index, missing } => {
                write!(f, "skeleton {body_index}: joint {missing} missing")
            }
            Violation::TrackedJointDepth { body_index, joint } => {
                write!(f, "skeleton {body_index}: tracked joint {joint} has non-positive Z")
            }
            Violation::DepthPointFlag { body_index, joint } => write!(
                f,
                "skeleton {body_index}: joint {joint} depth point disagrees with its in-frame flag"
            ),
            Violation::ColorPointFlag { body_index, joint } => write!(
                f,
                "skeleton {body_index}: joint {joint} color point disagrees with its in-frame flag"
            ),
        }
    }
}

impl Skeleton {
    pub fn validate(&self, report: &mut Vec<Violation>) {
        let body_index = self.body_index;
        if usize::from(body_index) >= MAX_BODIES {
            report.push(Violation::SkeletonBodyIndex { body_index });
        }
        if self.joints.len() != JOINT_COUNT {
            report.push(Violation::JointCount { body_index, count: self.joints.len() });
        }
        for jt in JointType::ALL {
            if !self.joints.iter().any(|j| j.joint_type == jt) {
                report.push(Violation::JointCoverage { body_index, missing: jt });
            }
        }
        for j in &self.joints {
            let joint = j.joint_type;
            // `!(z > 0)` also rejects NaN.
            if j.tracking_state == TrackingState::Tracked && !(j.camera.z > 0.0) {
                report.push(Violation::TrackedJointDepth { body_index, joint });
            }
            if j.depth_in_frame != j.depth.within(DEPTH_WIDTH, DEPTH_HEIGHT) {
                report.push(Violation::DepthPointFlag { body_index, joint });
            }
            if j.color_in_frame != j.color.within(COLOR_WIDTH, COLOR_HEIGHT) {
                report.push(Violation::ColorPointFlag { body_index, joint });
            }
        }
    }
}

fn check_len(report: &mut Vec<Violation>, frame: FrameKind, expected: usize, actual: usize) -> bool {
    if expected != actual {
        report.push(Violation::FrameSize { frame, expected, actual });
        false
    } else {
        true
    }
}

impl FrameBundle {
    /// Lists every invariant violation of the bundle; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        check_len(&mut report, FrameKind::Color, COLOR_PIXELS * 3, self.color.data.len());
        check_len(&mut report, FrameKind::Infrared, DEPTH_PIXELS, self.infrared.data.len());

        if check_len(&mut report, FrameKind::Depth, DEPTH_PIXELS, self.depth.data.len()) {
            let mut bad = self
                .depth
                .data
                .iter()
                .enumerate()
                .filter(|(_, &d)| d != 0 && !(MIN_DEPTH_MM..=MAX_DEPTH_MM).contains(&d));
            if let Some((first_pixel, &value)) = bad.next() {
                let count = 1 + bad.count();
                report.push(Violation::DepthOutOfRange { count, first_pixel, value });
            }
        }

        let body_ok =
            check_len(&mut report, FrameKind::BodyIndex, DEPTH_PIXELS, self.body_index.data.len());
        if body_ok {
            let mut bad = self
                .body_index
                .data
                .iter()
                .enumerate()
                .filter(|(_, &b)| b != BACKGROUND && usize::from(b) >= MAX_BODIES);
            if let Some((first_pixel, &value)) = bad.next() {
                let count = 1 + bad.count();
                report.push(Violation::BodyIndexValue { count, first_pixel, value });
            }
        }

        let mapped_ok = check_len(
            &mut report,
            FrameKind::MappedBody,
            DEPTH_PIXELS * 3,
            self.mapped_body.data.len(),
        );
        if body_ok && mapped_ok {
            let mut bad = (0..DEPTH_PIXELS).filter(|&i| {
                self.body_index.data[i] == BACKGROUND && !self.mapped_body.is_black(i)
            });
            if let Some(first_pixel) = bad.next() {
                let count = 1 + bad.count();
                report.push(Violation::MappedOutsideMask { count, first_pixel });
            }
        }

        if self.skeletons.len() > MAX_BODIES {
            report.push(Violation::TooManySkeletons { count: self.skeletons.len() });
        }
        let mut seen = [false; 256];
        for s in &self.skeletons {
            let slot = &mut seen[usize::from(s.body_index)];
            if *slot {
                report.push(Violation::DuplicateBodyIndex { body_index: s.body_index });
            }
            *slot = true;
            s.validate(&mut report);
        }
        report
    }
}

/// Convenience wrapper over [`FrameBundle::validate`].
pub fn validate_bundle(bundle: &FrameBundle) -> Vec<Violation> {
    bundle.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn joint(jt: JointType) -> Joint {
        Joint::new(
            jt,
            Point3::new(0.0, 0.0, 2.0),
            Point2::new(256.0, 212.0),
            Point2::new(960.0, 540.0),
            TrackingState::Tracked,
        )
    }

    fn skeleton(body_index: u8) -> Skeleton {
        Skeleton { body_index, joints: JointType::ALL.iter().map(|&j| joint(j)).collect() }
    }

    fn bundle() -> FrameBundle {
        FrameBundle {
            frame_index: 0,
            timestamp_ms: 0,
            color: ColorFrame::filled([128, 128, 128]),
            depth: DepthFrame::empty(),
            infrared: InfraredFrame { data: vec![0; DEPTH_PIXELS] },
            body_index: BodyIndexFrame::background(),
            mapped_body: MappedBodyFrame::black(),
            skeletons: vec![skeleton(0)],
        }
    }

    #[test]
    fn joint_ordinals_are_dense_and_named_uniquely() {
        for (i, jt) in JointType::ALL.iter().enumerate() {
            assert_eq!(jt.ordinal(), i);
            assert_eq!(JointType::from_ordinal(i), Some(*jt));
            assert_eq!(JointType::from_name(jt.name()), Some(*jt));
        }
        assert_eq!(JointType::from_ordinal(25), None);
        assert_eq!(JointType::WristRight.name(), "WristRight");
        assert_eq!(JointType::HandRight.name(), "HandRight");
    }

    #[test]
    fn well_formed_bundle_is_valid() {
        assert!(bundle().validate().is_empty());
    }

    #[test]
    fn body_index_value_seven_is_reported() {
        let mut b = bundle();
        b.body_index.data[1000] = 7;
        assert_eq!(
            b.validate(),
            vec![Violation::BodyIndexValue { count: 1, first_pixel: 1000, value: 7 }]
        );
    }

    #[test]
    fn duplicate_body_indices_are_reported() {
        let mut b = bundle();
        b.skeletons.push(skeleton(0));
        assert_eq!(b.validate(), vec![Violation::DuplicateBodyIndex { body_index: 0 }]);
    }

    #[test]
    fn depth_range_and_sizes() {
        let mut b = bundle();
        b.depth.data[3] = 499;
        b.depth.data[4] = 8001;
        b.depth.data[5] = 500;
        b.infrared.data.pop();
        let report = b.validate();
        assert_eq!(report.len(), 2);
        assert!(report.contains(&Violation::DepthOutOfRange { count: 2, first_pixel: 3, value: 499 }));
        assert!(report.contains(&Violation::FrameSize {
            frame: FrameKind::Infrared,
            expected: DEPTH_PIXELS,
            actual: DEPTH_PIXELS - 1
        }));
    }

    #[test]
    fn mapped_pixels_outside_mask() {
        let mut b = bundle();
        b.mapped_body.data[30] = 9;
        assert_eq!(
            b.validate(),
            vec![Violation::MappedOutsideMask { count: 1, first_pixel: 10 }]
        );
        b.body_index.data[10] = 2;
        assert!(b.validate().is_empty());
    }

    #[test]
    fn skeleton_defects() {
        let mut b = bundle();
        b.skeletons[0].joints.pop();
        b.skeletons[0].joints[0].camera.z = 0.0;
        b.skeletons[0].joints[1].depth_in_frame = false;
        let report = b.validate();
        assert!(report.contains(&Violation::JointCount { body_index: 0, count: 24 }));
        assert!(report.contains(&Violation::JointCoverage {
            body_index: 0,
            missing: JointType::ThumbRight
        }));
        assert!(report.contains(&Violation::TrackedJointDepth {
            body_index: 0,
            joint: JointType::SpineBase
        }));
        assert!(report.contains(&Violation::DepthPointFlag {
            body_index: 0,
            joint: JointType::SpineMid
        }));
        assert_eq!(report.len(), 4);
    }

    #[test]
    fn inferred_joint_may_have_zero_depth() {
        let mut b = bundle();
        b.skeletons[0].joints[0].camera.z = 0.0;
        b.skeletons[0].joints[0].tracking_state = TrackingState::Inferred;
        assert!(b.validate().is_empty());
    }

    #[test]
    fn seven_skeletons_and_bad_index() {
        let mut b = bundle();
        b.skeletons = (0..7).map(skeleton).collect();
        let report = b.validate();
        assert_eq!(
            report,
            vec![
                Violation::TooManySkeletons { count: 7 },
                Violation::SkeletonBodyIndex { body_index: 6 }
            ]
        );
    }
}
