//! Valid bundles with exactly one injected defect must be reported with
//! exactly that defect.

use std::mem::discriminant;
use std::sync::OnceLock;

use proptest::prelude::*;
use signcol_core::frame::{FrameKind, BACKGROUND, DEPTH_PIXELS};
use signcol_core::frame::validate_bundle;
use signcol_core::{DeviceCalibration, FrameBundle, GestureSpec, JointType, MotionKind, SyntheticSource, Violation};

fn bases() -> &'static [FrameBundle] {
    static BASES: OnceLock<Vec<FrameBundle>> = OnceLock::new();
    BASES.get_or_init(|| {
        [(MotionKind::Arc, 2u8, 0u64), (MotionKind::Circle, 3, 5), (MotionKind::StraightLine, 6, 9)]
            .iter()
            .map(|&(m, bodies, index)| {
                let spec = GestureSpec::new(m, 2.0, bodies, 17).unwrap();
                SyntheticSource::new(spec, DeviceCalibration::default(), 30.0).unwrap().bundle_at(index).unwrap()
            })
            .collect()
    })
}

#[derive(Debug, Clone)]
enum Defect {
    ShortColor(usize),
    ShortInfrared(usize),
    DepthValue { pixel: usize, value: u16 },
    BodyLabel { pixel: usize, value: u8 },
    MappedLeak { pixel: usize },
    DuplicateIndex,
    SkeletonIndex { skeleton: usize, value: u8 },
    ExtraJoint { skeleton: usize, joint: usize },
    RelabeledJoint { skeleton: usize, joint: usize },
    TrackedAtZeroDepth { skeleton: usize, joint: usize },
    DepthFlag { skeleton: usize, joint: usize },
    ColorFlag { skeleton: usize, joint: usize },
}

fn defect() -> impl Strategy<Value = Defect> {
    let sj = (0usize..6, 0usize..25);
    prop_oneof![
        (1usize..100).prop_map(Defect::ShortColor),
        (1usize..100).prop_map(Defect::ShortInfrared),
        (0..DEPTH_PIXELS, prop_oneof![1u16..500, 8001u16..=u16::MAX])
            .prop_map(|(pixel, value)| Defect::DepthValue { pixel, value }),
        (0..DEPTH_PIXELS, 6u8..255).prop_map(|(pixel, value)| Defect::BodyLabel { pixel, value }),
        (0..DEPTH_PIXELS).prop_map(|pixel| Defect::MappedLeak { pixel }),
        Just(Defect::DuplicateIndex),
        (0usize..6, 6u8..=255).prop_map(|(skeleton, value)| Defect::SkeletonIndex { skeleton, value }),
        sj.clone().prop_map(|(skeleton, joint)| Defect::ExtraJoint { skeleton, joint }),
        sj.clone().prop_map(|(skeleton, joint)| Defect::RelabeledJoint { skeleton, joint }),
        sj.clone().prop_map(|(skeleton, joint)| Defect::TrackedAtZeroDepth { skeleton, joint }),
        sj.clone().prop_map(|(skeleton, joint)| Defect::DepthFlag { skeleton, joint }),
        sj.prop_map(|(skeleton, joint)| Defect::ColorFlag { skeleton, joint }),
    ]
}

/// Applies the defect and returns the violation it must produce.
fn inject(b: &mut FrameBundle, d: &Defect) -> Violation {
    let n = b.skeletons.len();
    match *d {
        Defect::ShortColor(k) => {
            let expected = b.color.data.len();
            b.color.data.truncate(expected - k);
            Violation::FrameSize { frame: FrameKind::Color, expected, actual: expected - k }
        }
        Defect::ShortInfrared(k) => {
            b.infrared.data.truncate(DEPTH_PIXELS - k);
            Violation::FrameSize { frame: FrameKind::Infrared, expected: DEPTH_PIXELS, actual: DEPTH_PIXELS - k }
        }
        Defect::DepthValue { pixel, value } => {
            b.depth.data[pixel] = value;
            Violation::DepthOutOfRange { count: 1, first_pixel: pixel, value }
        }
        Defect::BodyLabel { pixel, value } => {
            // Keep the mask/mapped relation intact: a labelled pixel may be lit.
            b.body_index.data[pixel] = value;
            Violation::BodyIndexValue { count: 1, first_pixel: pixel, value }
        }
        Defect::MappedLeak { pixel } => {
            // Move the leak onto a background pixel.
            let pixel = (pixel..DEPTH_PIXELS).chain(0..pixel).find(|&i| b.body_index.data[i] == BACKGROUND).unwrap();
            b.mapped_body.data[pixel * 3] = 200;
            Violation::MappedOutsideMask { count: 1, first_pixel: pixel }
        }
        Defect::DuplicateIndex => {
            let first = b.skeletons[0].body_index;
            b.skeletons[1].body_index = first;
            Violation::DuplicateBodyIndex { body_index: first }
        }
        Defect::SkeletonIndex { skeleton, value } => {
            b.skeletons[skeleton % n].body_index = value;
            Violation::SkeletonBodyIndex { body_index: value }
        }
        Defect::ExtraJoint { skeleton, joint } => {
            let s = &mut b.skeletons[skeleton % n];
            let copy = s.joints[joint];
            s.joints.push(copy);
            Violation::JointCount { body_index: s.body_index, count: 26 }
        }
        Defect::RelabeledJoint { skeleton, joint } => {
            let s = &mut b.skeletons[skeleton % n];
            let missing = s.joints[joint].joint_type;
            s.joints[joint].joint_type = JointType::ALL[(joint + 1) % 25];
            Violation::JointCoverage { body_index: s.body_index, missing }
        }
        Defect::TrackedAtZeroDepth { skeleton, joint } => {
            let s = &mut b.skeletons[skeleton % n];
            s.joints[joint].camera.z = 0.0;
            Violation::TrackedJointDepth { body_index: s.body_index, joint: s.joints[joint].joint_type }
        }
        Defect::DepthFlag { skeleton, joint } => {
            let s = &mut b.skeletons[skeleton % n];
            s.joints[joint].depth_in_frame = !s.joints[joint].depth_in_frame;
            Violation::DepthPointFlag { body_index: s.body_index, joint: s.joints[joint].joint_type }
        }
        Defect::ColorFlag { skeleton, joint } => {
            let s = &mut b.skeletons[skeleton % n];
            s.joints[joint].color_in_frame = !s.joints[joint].color_in_frame;
            Violation::ColorPointFlag { body_index: s.body_index, joint: s.joints[joint].joint_type }
        }
    }
}

#[test]
fn base_bundles_are_valid() {
    for b in bases() {
        assert_eq!(validate_bundle(b), []);
        assert!(b.skeletons.iter().all(|s| s.joints.iter().all(|j| j.tracking_state == signcol_core::TrackingState::Tracked)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn single_defect_is_found_exactly(which in 0usize..3, d in defect()) {
        let mut b = bases()[which].clone();
        let expected = inject(&mut b, &d);
        let report = validate_bundle(&b);
        prop_assert_eq!(report.len(), 1, "{:?} -> {:?}", d, report);
        prop_assert_eq!(discriminant(&report[0]), discriminant(&expected));
        prop_assert_eq!(report[0], expected);
    }
}

#[test]
fn seven_skeletons_are_too_many() {
    let mut b = bases()[2].clone();
    let extra = b.skeletons[0].clone();
    b.skeletons.push(extra);
    let report = validate_bundle(&b);
    assert!(report.contains(&Violation::TooManySkeletons { count: 7 }), "{report:?}");
}
