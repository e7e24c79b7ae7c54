//! On-disk session layout and its validation.
//!
//! ```text
//! <root>/<Language>_<catN>_<Item>_<Performer>_<suffix>/
//!   camera_parameters.txt
//!   color_frames/frame_000000.png ...
//!   depth_frames/frame_000000.png ...
//!   infrared_frames/frame_000000.png ...
//!   bodyindex_frames/frame_000000.png ...
//!   mapped_frames/frame_000000.png ...
//!   skeleton/frame_000000.csv ...
//!   timing/timestamps.csv
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use signcol_core::camera_params::parse_camera_parameters;
use signcol_core::frame::JOINT_COUNT;
use signcol_core::naming::parse_folder_name;
use signcol_core::skeleton_csv::parse_skeleton_rows;

pub const COLOR_DIR: &str = "color_frames";
pub const DEPTH_DIR: &str = "depth_frames";
pub const INFRARED_DIR: &str = "infrared_frames";
pub const BODY_INDEX_DIR: &str = "bodyindex_frames";
pub const MAPPED_DIR: &str = "mapped_frames";
pub const SKELETON_DIR: &str = "skeleton";
pub const TIMING_DIR: &str = "timing";

pub const IMAGE_DIRS: [&str; 5] = [COLOR_DIR, DEPTH_DIR, INFRARED_DIR, BODY_INDEX_DIR, MAPPED_DIR];
/// Per-frame directories: the image modalities plus skeleton rows.
pub const FRAME_DIRS: [&str; 6] =
    [COLOR_DIR, DEPTH_DIR, INFRARED_DIR, BODY_INDEX_DIR, MAPPED_DIR, SKELETON_DIR];
pub const SUBDIRS: [&str; 7] =
    [COLOR_DIR, DEPTH_DIR, INFRARED_DIR, BODY_INDEX_DIR, MAPPED_DIR, SKELETON_DIR, TIMING_DIR];

pub const CAMERA_PARAMETERS: &str = "camera_parameters.txt";
pub const TIMESTAMPS: &str = "timestamps.csv";

pub fn frame_file_name(index: u64, ext: &str) -> String {
    format!("frame_{index:06}.{ext}")
}

pub fn frame_path(folder: &Path, dir: &str, index: u64) -> PathBuf {
    let ext = if dir == SKELETON_DIR { "csv" } else { "png" };
    folder.join(dir).join(frame_file_name(index, ext))
}

pub fn timestamps_path(folder: &Path) -> PathBuf {
    folder.join(TIMING_DIR).join(TIMESTAMPS)
}

fn parse_frame_file_name(name: &str, ext: &str) -> Option<u64> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(ext)?.strip_suffix('.')?;
    if digits.len() < 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses `timing/timestamps.csv` into `(frame index, milliseconds)` rows.
pub fn parse_timestamps(text: &str) -> Result<Vec<(u64, u64)>, (usize, String)> {
    text.split_terminator('\n')
        .enumerate()
        .map(|(i, line)| {
            let parsed = line
                .split_once(',')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
            parsed.ok_or_else(|| (i + 1, line.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionViolation {
    NotADirectory,
    FolderName { name: String },
    MissingDirectory { dir: String },
    MissingFile { file: String },
    StrayFile { file: String },
    ModalityCount { dir: String, count: usize, expected: usize },
    IndexGap { dir: String, missing: u64 },
    SkeletonRowCount { file: String, rows: usize },
    SkeletonMalformed { file: String, reason: String },
    TimingRowCount { rows: usize, expected: usize },
    TimingMalformed { line: usize, content: String },
    TimingOrder { line: usize },
    CameraParameters { reason: String },
}

impl SessionViolation {
    /// File or directory the violation is about, relative to the session.
    pub fn subject(&self) -> String {
        use SessionViolation::*;
        match self {
            NotADirectory | FolderName { .. } => ".".into(),
            MissingDirectory { dir } | ModalityCount { dir, .. } | IndexGap { dir, .. } => dir.clone(),
            MissingFile { file } | StrayFile { file } => file.clone(),
            SkeletonRowCount { file, .. } | SkeletonMalformed { file, .. } => file.clone(),
            TimingRowCount { .. } | TimingMalformed { .. } | TimingOrder { .. } => {
                format!("{TIMING_DIR}/{TIMESTAMPS}")
            }
            CameraParameters { .. } => CAMERA_PARAMETERS.into(),
        }
    }
}

impl fmt::Display for SessionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SessionViolation::*;
        match self {
            NotADirectory => f.write_str("session path is not a directory"),
            FolderName { name } => write!(f, "folder name {name:?} does not follow the naming policy"),
            MissingDirectory { dir } => write!(f, "missing directory {dir}/"),
            MissingFile { file } => write!(f, "missing file {file}"),
            StrayFile { file } => write!(f, "unexpected file {file}"),
            ModalityCount { dir, count, expected } => {
                write!(f, "modality count mismatch: {dir}/ holds {count} frames, expected {expected}")
            }
            IndexGap { dir, missing } => write!(f, "{dir}/ is missing frame {missing}"),
            SkeletonRowCount { file, rows } => {
                write!(f, "{file}: {rows} rows is not a multiple of {JOINT_COUNT}")
            }
            SkeletonMalformed { file, reason } => write!(f, "{file}: {reason}"),
            TimingRowCount { rows, expected } => {
                write!(f, "timing has {rows} rows, expected {expected}")
            }
            TimingMalformed { line, content } => {
                write!(f, "timing line {line} is malformed: {content:?}")
            }
            TimingOrder { line } => write!(f, "timing line {line} is out of order"),
            CameraParameters { reason } => write!(f, "{CAMERA_PARAMETERS}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SessionReport {
    pub violations: Vec<SessionViolation>,
}

impl SessionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: SessionViolation) {
        self.violations.push(v);
    }
}

impl fmt::Display for SessionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Frame indices present in one per-frame directory.
fn frame_indices(dir: &Path, ext: &str, report: &mut SessionReport, rel: &str) -> Vec<u64> {
    let mut indices = Vec::new();
    let Ok(entries) = fs::read_dir(dir) else {
        return indices;
    };
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        match parse_frame_file_name(&name, ext) {
            Some(i) => indices.push(i),
            None => report.push(SessionViolation::StrayFile { file: format!("{rel}/{name}") }),
        }
    }
    indices.sort_unstable();
    indices
}

/// Checks a session folder against the layout; the report lists every
/// violation found.
pub fn validate_session(folder: &Path) -> SessionReport {
    let mut report = SessionReport::default();
    if !folder.is_dir() {
        report.push(SessionViolation::NotADirectory);
        return report;
    }
    let name = folder.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    if parse_folder_name(&name).is_none() {
        report.push(SessionViolation::FolderName { name });
    }

    let mut present: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for dir in SUBDIRS {
        if !folder.join(dir).is_dir() {
            report.push(SessionViolation::MissingDirectory { dir: dir.into() });
            continue;
        }
        if dir != TIMING_DIR {
            let ext = if dir == SKELETON_DIR { "csv" } else { "png" };
            present.insert(dir, frame_indices(&folder.join(dir), ext, &mut report, dir));
        }
    }

    // The frame count is the most common per-directory count, so a single
    // damaged modality is the one reported.
    let mut tally: BTreeMap<usize, usize> = BTreeMap::new();
    for v in present.values() {
        *tally.entry(v.len()).or_default() += 1;
    }
    let expected = tally
        .iter()
        .max_by_key(|(count, votes)| (**votes, **count))
        .map(|(count, _)| *count)
        .unwrap_or(0);
    for (dir, indices) in &present {
        if indices.len() != expected {
            report.push(SessionViolation::ModalityCount {
                dir: dir.to_string(),
                count: indices.len(),
                expected,
            });
        }
        if let Some(missing) = (0..indices.len() as u64).find(|i| indices.binary_search(i).is_err()) {
            report.push(SessionViolation::IndexGap { dir: dir.to_string(), missing });
        }
    }

    if let Some(indices) = present.get(SKELETON_DIR) {
        for &i in indices {
            let rel = format!("{SKELETON_DIR}/{}", frame_file_name(i, "csv"));
            let text = match fs::read_to_string(folder.join(&rel)) {
                Ok(t) => t,
                Err(e) => {
                    report.push(SessionViolation::SkeletonMalformed { file: rel, reason: e.to_string() });
                    continue;
                }
            };
            let rows = text.split_terminator('\n').count();
            if rows % JOINT_COUNT != 0 {
                report.push(SessionViolation::SkeletonRowCount { file: rel, rows });
            } else if let Err(e) = parse_skeleton_rows(&text) {
                report.push(SessionViolation::SkeletonMalformed { file: rel, reason: e.to_string() });
            }
        }
    }

    if folder.join(TIMING_DIR).is_dir() {
        match fs::read_to_string(timestamps_path(folder)) {
            Err(_) => report.push(SessionViolation::MissingFile {
                file: format!("{TIMING_DIR}/{TIMESTAMPS}"),
            }),
            Ok(text) => match parse_timestamps(&text) {
                Err((line, content)) => {
                    report.push(SessionViolation::TimingMalformed { line, content })
                }
                Ok(rows) => {
                    if rows.len() != expected {
                        report.push(SessionViolation::TimingRowCount { rows: rows.len(), expected });
                    }
                    let mut prev_ts = 0;
                    for (i, &(index, ts)) in rows.iter().enumerate() {
                        if index != i as u64 || ts < prev_ts {
                            report.push(SessionViolation::TimingOrder { line: i + 1 });
                            break;
                        }
                        prev_ts = ts;
                    }
                }
            },
        }
    }

    match fs::read_to_string(folder.join(CAMERA_PARAMETERS)) {
        Err(_) => report.push(SessionViolation::MissingFile { file: CAMERA_PARAMETERS.into() }),
        Ok(text) => {
            if let Err(e) = parse_camera_parameters(&text) {
                report.push(SessionViolation::CameraParameters { reason: e.to_string() });
            }
        }
    }
    report
}
