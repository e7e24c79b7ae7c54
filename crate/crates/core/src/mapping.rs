//! Pinhole geometry between camera space, the depth image and the color image.
//!
//! No lens distortion is modeled, so projection and back-projection are exact
//! inverses. Camera space has +Y up while image rows grow downwards, hence the
//! sign flip on the vertical axis.

use crate::error::CoreError;
use crate::frame::{
    BodyIndexFrame, ColorFrame, DepthFrame, MappedBodyFrame, Point2, Point3, BACKGROUND,
    COLOR_HEIGHT, COLOR_WIDTH, DEPTH_HEIGHT, DEPTH_WIDTH,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub focal_x: f64,
    pub focal_y: f64,
    pub principal_x: f64,
    pub principal_y: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(
        focal_x: f64,
        focal_y: f64,
        principal_x: f64,
        principal_y: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, CoreError> {
        let intr = CameraIntrinsics { focal_x, focal_y, principal_x, principal_y, width, height };
        intr.check()?;
        Ok(intr)
    }

    pub fn check(&self) -> Result<(), CoreError> {
        if !(self.focal_x > 0.0 && self.focal_y > 0.0) {
            return Err(CoreError::InvalidIntrinsics("focal lengths must be positive"));
        }
        if !(self.principal_x > 0.0 && self.principal_x < self.width as f64) {
            return Err(CoreError::InvalidIntrinsics("principal x outside the image"));
        }
        if !(self.principal_y > 0.0 && self.principal_y < self.height as f64) {
            return Err(CoreError::InvalidIntrinsics("principal y outside the image"));
        }
        Ok(())
    }

    pub fn default_depth() -> Self {
        CameraIntrinsics {
            focal_x: 365.0,
            focal_y: 365.0,
            principal_x: 256.0,
            principal_y: 212.0,
            width: DEPTH_WIDTH,
            height: DEPTH_HEIGHT,
        }
    }

    pub fn default_color() -> Self {
        CameraIntrinsics {
            focal_x: 1060.0,
            focal_y: 1060.0,
            principal_x: 960.0,
            principal_y: 540.0,
            width: COLOR_WIDTH,
            height: COLOR_HEIGHT,
        }
    }
}

/// A projected image point together with whether it lands inside the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: Point2,
    pub in_frame: bool,
}

/// Largest accepted depth-to-color baseline, meters.
pub const MAX_BASELINE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceCalibration {
    pub depth: CameraIntrinsics,
    pub color: CameraIntrinsics,
    /// Offset added to a depth-camera point to express it in color-camera space.
    pub depth_to_color_translation: Point3,
}

impl Default for DeviceCalibration {
    fn default() -> Self {
        DeviceCalibration {
            depth: CameraIntrinsics::default_depth(),
            color: CameraIntrinsics::default_color(),
            depth_to_color_translation: Point3::new(-0.052, 0.0, 0.0),
        }
    }
}

impl DeviceCalibration {
    /// Checks intrinsics, sensor dimensions and baseline length.
    pub fn check(&self) -> Result<(), CoreError> {
        self.depth.check()?;
        self.color.check()?;
        if (self.depth.width, self.depth.height) != (DEPTH_WIDTH, DEPTH_HEIGHT) {
            return Err(CoreError::InvalidIntrinsics("depth camera must be 512x424"));
        }
        if (self.color.width, self.color.height) != (COLOR_WIDTH, COLOR_HEIGHT) {
            return Err(CoreError::InvalidIntrinsics("color camera must be 1920x1080"));
        }
        let t = self.depth_to_color_translation;
        if !(libm::sqrt(t.x * t.x + t.y * t.y + t.z * t.z) < MAX_BASELINE) {
            return Err(CoreError::InvalidIntrinsics("depth-to-color baseline too long"));
        }
        Ok(())
    }
}

/// Projects a camera-space point (meters) onto the image of `intr`.
pub fn project(point: Point3, intr: &CameraIntrinsics) -> Result<Projection, CoreError> {
    if !(point.z > 0.0) {
        return Err(CoreError::ProjectionDomain { z: point.z });
    }
    let p = Point2::new(
        intr.focal_x * point.x / point.z + intr.principal_x,
        intr.principal_y - intr.focal_y * point.y / point.z,
    );
    Ok(Projection { point: p, in_frame: p.within(intr.width, intr.height) })
}

pub fn camera_to_depth(point: Point3, intr: &CameraIntrinsics) -> Result<Projection, CoreError> {
    project(point, intr)
}

/// Back-projects a depth pixel with its depth reading (mm) into camera space.
pub fn depth_to_camera(
    pixel: Point2,
    depth_mm: u16,
    intr: &CameraIntrinsics,
) -> Result<Point3, CoreError> {
    if depth_mm == 0 {
        return Err(CoreError::InvalidDepth);
    }
    let z = f64::from(depth_mm) / 1000.0;
    Ok(Point3::new(
        (pixel.x - intr.principal_x) * z / intr.focal_x,
        (intr.principal_y - pixel.y) * z / intr.focal_y,
        z,
    ))
}

pub fn camera_to_color(point: Point3, calib: &DeviceCalibration) -> Result<Projection, CoreError> {
    project(point + calib.depth_to_color_translation, &calib.color)
}

pub fn depth_pixel_to_color(
    pixel: Point2,
    depth_mm: u16,
    calib: &DeviceCalibration,
) -> Result<Projection, CoreError> {
    let p = depth_to_camera(pixel, depth_mm, &calib.depth)?;
    camera_to_color(p, calib)
}

/// Nearest pixel to a continuous image coordinate, if inside `width`x`height`.
pub(crate) fn nearest_pixel(p: Point2, width: usize, height: usize) -> Option<(usize, usize)> {
    let x = libm::floor(p.x + 0.5);
    let y = libm::floor(p.y + 0.5);
    if x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64 {
        Some((x as usize, y as usize))
    } else {
        None
    }
}

/// Paints every body pixel of the depth image with the color seen at its
/// registered location in the color image; everything else stays black.
pub fn render_mapped_bodies(
    color: &ColorFrame,
    depth: &DepthFrame,
    body_index: &BodyIndexFrame,
    calib: &DeviceCalibration,
) -> MappedBodyFrame {
    let mut out = MappedBodyFrame::black();
    for v in 0..DEPTH_HEIGHT {
        for u in 0..DEPTH_WIDTH {
            let i = v * DEPTH_WIDTH + u;
            if body_index.data[i] == BACKGROUND {
                continue;
            }
            let Ok(proj) = depth_pixel_to_color(Point2::new(u as f64, v as f64), depth.data[i], calib)
            else {
                continue;
            };
            if !proj.in_frame {
                continue;
            }
            if let Some((cx, cy)) = nearest_pixel(proj.point, COLOR_WIDTH, COLOR_HEIGHT) {
                out.data[i * 3..i * 3 + 3].copy_from_slice(&color.pixel(cx, cy));
            }
        }
    }
    out
}
