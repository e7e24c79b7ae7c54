//! Capture sessions and their synchronized persistence.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use signcol_core::camera_params::write_camera_parameters;
use signcol_core::naming::{session_folder_name, MAX_SUFFIX};
use signcol_core::skeleton_csv::serialize_skeleton_rows;
use signcol_core::{
    CoreError, DeviceCalibration, FrameBundle, SessionAction, SessionState, SignCategory,
};

use crate::layout::{self, frame_path, timestamps_path, CAMERA_PARAMETERS, SUBDIRS};
use crate::png_io::{self, PngError};

/// Folder-name draws before giving up on collisions.
pub const MAX_NAME_ATTEMPTS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum RecordingError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Png { path: PathBuf, source: PngError },
    #[error("session is {state}; cannot {action}")]
    State { state: SessionState, action: &'static str },
    #[error("no free folder name after {MAX_NAME_ATTEMPTS} attempts")]
    CollisionsExhausted,
    #[error(transparent)]
    Core(#[from] CoreError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RecordingError + '_ {
    move |source| RecordingError::Io { path: path.to_path_buf(), source }
}

/// Who and what a session records, with the catalog ids for registration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionLabels {
    pub language: String,
    pub category: SignCategory,
    pub item: String,
    pub performer: String,
    pub item_id: i64,
    pub performer_id: i64,
}

/// What a saved session hands to the catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SavedRecording {
    pub folder: PathBuf,
    pub item_id: i64,
    pub performer_id: i64,
    pub frame_count: u64,
}

#[derive(Debug)]
pub struct Session {
    /// The folder name; unique under one output root.
    pub id: String,
    state: SessionState,
    labels: SessionLabels,
    random_suffix: u32,
    folder: PathBuf,
    frames_written: u64,
}

/// Creates the session folder with its modality directories and camera
/// parameters. The folder suffix comes from a generator seeded with `seed`
/// and is redrawn when the name is taken.
pub fn create_session(
    labels: SessionLabels,
    output_root: &Path,
    seed: u64,
    calib: &DeviceCalibration,
) -> Result<Session, RecordingError> {
    let category = labels.category;
    fs::create_dir_all(output_root).map_err(io_err(output_root))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_NAME_ATTEMPTS {
        let suffix = rng.random_range(0..=MAX_SUFFIX);
        let name =
            session_folder_name(&labels.language, category, &labels.item, &labels.performer, suffix)?;
        let folder = output_root.join(&name);
        match fs::create_dir(&folder) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(io_err(&folder)(e)),
        }
        let session = Session {
            id: name,
            state: SessionState::Initialized,
            labels,
            random_suffix: suffix,
            folder,
            frames_written: 0,
        };
        if let Err(e) = session.populate(calib) {
            let _ = fs::remove_dir_all(&session.folder);
            return Err(e);
        }
        return Ok(session);
    }
    Err(RecordingError::CollisionsExhausted)
}

fn write_synced(path: &Path, write: impl FnOnce(&mut BufWriter<&File>) -> Result<(), RecordingError>) -> Result<(), RecordingError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut buf = BufWriter::new(&file);
    write(&mut buf)?;
    buf.flush().map_err(io_err(path))?;
    drop(buf);
    file.sync_all().map_err(io_err(path))
}

fn png_to(path: &Path, f: impl FnOnce(&mut BufWriter<&File>) -> Result<(), PngError>) -> Result<(), RecordingError> {
    write_synced(path, |w| f(w).map_err(|source| RecordingError::Png { path: path.to_path_buf(), source }))
}

impl Session {
    fn populate(&self, calib: &DeviceCalibration) -> Result<(), RecordingError> {
        for dir in SUBDIRS {
            let p = self.folder.join(dir);
            fs::create_dir(&p).map_err(io_err(&p))?;
        }
        let params = self.folder.join(CAMERA_PARAMETERS);
        let text = write_camera_parameters(calib);
        write_synced(&params, |w| w.write_all(text.as_bytes()).map_err(io_err(&params)))?;
        let ts = timestamps_path(&self.folder);
        File::create(&ts).map_err(io_err(&ts))?;
        Ok(())
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn labels(&self) -> &SessionLabels {
        &self.labels
    }

    pub fn random_suffix(&self) -> u32 {
        self.random_suffix
    }

    pub fn folder(&self) -> &Path {
        &self.folder
    }

    pub fn frames_written(&self) -> u64 {
        self.frames_written
    }

    fn transition(&mut self, action: SessionAction) -> Result<(), RecordingError> {
        self.state = self
            .state
            .apply(action)
            .map_err(|_| RecordingError::State { state: self.state, action: action.as_str() })?;
        Ok(())
    }

    pub fn start(&mut self) -> Result<(), RecordingError> {
        self.transition(SessionAction::Start)
    }

    pub fn stop(&mut self) -> Result<(), RecordingError> {
        self.transition(SessionAction::Stop)
    }

    /// Marks the session saved and returns its registration payload.
    pub fn save(&mut self) -> Result<SavedRecording, RecordingError> {
        self.transition(SessionAction::Save)?;
        Ok(SavedRecording {
            folder: self.folder.clone(),
            item_id: self.labels.item_id,
            performer_id: self.labels.performer_id,
            frame_count: self.frames_written,
        })
    }

    /// Marks the session discarded and deletes its folder.
    pub fn discard(&mut self) -> Result<(), RecordingError> {
        if self.state != SessionState::Stopped {
            return Err(RecordingError::State { state: self.state, action: "discard" });
        }
        fs::remove_dir_all(&self.folder).map_err(io_err(&self.folder))?;
        self.transition(SessionAction::Discard)
    }

    /// Writes every modality of `bundle` as the next frame and returns its
    /// index. The six per-frame files are written concurrently and synced
    /// before the timing row is appended; on error the frame is not counted.
    pub fn append_frame(&mut self, bundle: &FrameBundle) -> Result<u64, RecordingError> {
        if self.state != SessionState::Recording {
            return Err(RecordingError::State { state: self.state, action: "append a frame" });
        }
        let index = self.frames_written;
        let folder = &self.folder;
        let path = |dir| frame_path(folder, dir, index);
        let skeleton_text = serialize_skeleton_rows(&bundle.skeletons);

        let results: Vec<Result<(), RecordingError>> = std::thread::scope(|s| {
            let jobs = [
                s.spawn(|| png_to(&path(layout::COLOR_DIR), |w| png_io::write_color(w, &bundle.color))),
                s.spawn(|| png_to(&path(layout::DEPTH_DIR), |w| png_io::write_depth(w, &bundle.depth))),
                s.spawn(|| {
                    png_to(&path(layout::INFRARED_DIR), |w| png_io::write_infrared(w, &bundle.infrared))
                }),
                s.spawn(|| {
                    png_to(&path(layout::BODY_INDEX_DIR), |w| png_io::write_body_index(w, &bundle.body_index))
                }),
                s.spawn(|| {
                    png_to(&path(layout::MAPPED_DIR), |w| png_io::write_mapped(w, &bundle.mapped_body))
                }),
                s.spawn(|| {
                    let p = path(layout::SKELETON_DIR);
                    write_synced(&p, |w| w.write_all(skeleton_text.as_bytes()).map_err(io_err(&p)))
                }),
            ];
            jobs.into_iter().map(|j| j.join().expect("frame writer panicked")).collect()
        });
        results.into_iter().collect::<Result<(), _>>()?;

        let ts = timestamps_path(folder);
        let mut file = OpenOptions::new().append(true).open(&ts).map_err(io_err(&ts))?;
        file.write_all(format!("{index},{}\n", bundle.timestamp_ms).as_bytes()).map_err(io_err(&ts))?;
        file.sync_all().map_err(io_err(&ts))?;

        self.frames_written += 1;
        Ok(index)
    }
}
