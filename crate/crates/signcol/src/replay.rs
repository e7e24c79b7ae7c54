//! Reads a saved session back as a [`FrameSource`].

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use signcol_core::camera_params::parse_camera_parameters;
use signcol_core::frame::{BACKGROUND, DEPTH_HEIGHT, DEPTH_WIDTH, MAX_BODIES};
use signcol_core::skeleton_csv::parse_skeleton_rows;
use signcol_core::source::DEFAULT_RATE;
use signcol_core::{DeviceCalibration, FrameBundle, FrameSource, Skeleton};

use crate::layout::{self, frame_path, parse_timestamps, timestamps_path, validate_session, CAMERA_PARAMETERS};
use crate::png_io::{self, PngError};

#[derive(Debug, thiserror::Error)]
#[error("replay format error in {}: {reason}", file.display())]
pub struct ReplayError {
    pub file: PathBuf,
    pub reason: String,
}

fn format_err(file: impl Into<PathBuf>, reason: impl ToString) -> ReplayError {
    ReplayError { file: file.into(), reason: reason.to_string() }
}

#[derive(Debug)]
pub struct ReplaySource {
    folder: PathBuf,
    calib: DeviceCalibration,
    timestamps: Vec<u64>,
    rate: f64,
    next: usize,
}

/// Opens a session folder for replay. The folder must pass
/// [`validate_session`]; otherwise the first violation is reported against
/// the file it concerns.
pub fn open_replay(folder: &Path) -> Result<ReplaySource, ReplayError> {
    let report = validate_session(folder);
    if let Some(v) = report.violations.first() {
        return Err(format_err(folder.join(v.subject()), v));
    }
    let params = folder.join(CAMERA_PARAMETERS);
    let text = fs::read_to_string(&params).map_err(|e| format_err(&params, e))?;
    let calib = parse_camera_parameters(&text).map_err(|e| format_err(&params, e))?;
    let ts_path = timestamps_path(folder);
    let text = fs::read_to_string(&ts_path).map_err(|e| format_err(&ts_path, e))?;
    let rows = parse_timestamps(&text)
        .map_err(|(line, content)| format_err(&ts_path, format!("line {line}: {content:?}")))?;
    let timestamps: Vec<u64> = rows.into_iter().map(|(_, ts)| ts).collect();
    Ok(ReplaySource {
        folder: folder.to_path_buf(),
        calib,
        rate: estimate_rate(&timestamps),
        timestamps,
        next: 0,
    })
}

/// Mean frame rate implied by the timestamps; the default rate when there
/// are too few frames to tell.
fn estimate_rate(timestamps: &[u64]) -> f64 {
    match (timestamps.first(), timestamps.last()) {
        (Some(&a), Some(&b)) if b > a => (timestamps.len() - 1) as f64 * 1000.0 / (b - a) as f64,
        _ => DEFAULT_RATE,
    }
}

/// Restores body indices that the skeleton file does not carry: each body
/// takes the label found under most of its joints in the body-index image,
/// falling back to the lowest free index.
fn relabel_bodies(skeletons: &mut [Skeleton], body_index: &[u8]) {
    let mut taken = [false; MAX_BODIES];
    let mut unresolved = Vec::new();
    for (n, s) in skeletons.iter_mut().enumerate() {
        let mut votes = [0usize; MAX_BODIES];
        for j in s.joints.iter().filter(|j| j.depth_in_frame) {
            let (u, v) = (j.depth.x.round() as usize, j.depth.y.round() as usize);
            if u < DEPTH_WIDTH && v < DEPTH_HEIGHT {
                let label = body_index[v * DEPTH_WIDTH + u];
                if label != BACKGROUND && usize::from(label) < MAX_BODIES {
                    votes[usize::from(label)] += 1;
                }
            }
        }
        let best = (0..MAX_BODIES)
            .filter(|&b| !taken[b] && votes[b] > 0)
            .max_by_key(|&b| (votes[b], std::cmp::Reverse(b)));
        match best {
            Some(b) => {
                taken[b] = true;
                s.body_index = b as u8;
            }
            None => unresolved.push(n),
        }
    }
    for n in unresolved {
        if let Some(b) = (0..MAX_BODIES).find(|&b| !taken[b]) {
            taken[b] = true;
            skeletons[n].body_index = b as u8;
        }
    }
}

impl ReplaySource {
    pub fn folder(&self) -> &Path {
        &self.folder
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    fn read_frame(&self, index: u64) -> Result<FrameBundle, ReplayError> {
        fn image<T>(
            path: PathBuf,
            read: impl FnOnce(File) -> Result<T, PngError>,
        ) -> Result<T, ReplayError> {
            let file = File::open(&path).map_err(|e| format_err(&path, e))?;
            read(file).map_err(|e| format_err(&path, e))
        }
        let folder = &self.folder;
        let color = image(frame_path(folder, layout::COLOR_DIR, index), png_io::read_color)?;
        let depth = image(frame_path(folder, layout::DEPTH_DIR, index), png_io::read_depth)?;
        let infrared = image(frame_path(folder, layout::INFRARED_DIR, index), png_io::read_infrared)?;
        let body_index = image(frame_path(folder, layout::BODY_INDEX_DIR, index), png_io::read_body_index)?;
        let mapped_body = image(frame_path(folder, layout::MAPPED_DIR, index), png_io::read_mapped)?;
        let csv = frame_path(folder, layout::SKELETON_DIR, index);
        let text = fs::read_to_string(&csv).map_err(|e| format_err(&csv, e))?;
        let mut skeletons = parse_skeleton_rows(&text).map_err(|e| format_err(&csv, e))?;
        if skeletons.len() > MAX_BODIES {
            return Err(format_err(&csv, format!("{} bodies", skeletons.len())));
        }
        relabel_bodies(&mut skeletons, &body_index.data);
        Ok(FrameBundle {
            frame_index: index,
            timestamp_ms: self.timestamps[index as usize],
            color,
            depth,
            infrared,
            body_index,
            mapped_body,
            skeletons,
        })
    }
}

impl FrameSource for ReplaySource {
    type Error = ReplayError;

    fn calibration(&self) -> DeviceCalibration {
        self.calib
    }

    fn nominal_rate(&self) -> f64 {
        self.rate
    }

    fn next_bundle(&mut self) -> Result<Option<FrameBundle>, ReplayError> {
        if self.next >= self.timestamps.len() {
            return Ok(None);
        }
        let bundle = self.read_frame(self.next as u64)?;
        self.next += 1;
        Ok(Some(bundle))
    }
}
