//! Glue between the catalog, frame sources and the recorder, shared by the
//! CLI and the HTTP service so both produce identical sessions.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use signcol_core::source::DEFAULT_RATE;
use signcol_core::{CoreError, DeviceCalibration, FrameBundle, FrameSource, GestureSpec, MotionKind, SyntheticSource};

use crate::catalog::{Catalog, CatalogError, RecordingEntry, OPTION_FRAME_RATE, OPTION_OUTPUT_ROOT};
use crate::layout::{validate_session, SessionReport};
use crate::recording::{create_session, RecordingError, SavedRecording, Session, SessionLabels};
use crate::replay::{open_replay, ReplayError, ReplaySource};

pub const DEFAULT_DURATION: f64 = 2.0;
/// Session folders go here inside the data directory unless configured.
pub const SESSIONS_DIR: &str = "sessions";

/// Gesture parameters for a synthetic capture. Missing values fall back to
/// defaults derived from the item's category.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct CaptureParams {
    pub motion: Option<String>,
    pub bodies: Option<u8>,
    pub duration: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CaptureError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Recording(#[from] RecordingError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("session folder failed validation:\n{0}")]
    Invalid(SessionReport),
}

/// Where frames come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceConfig {
    Synthetic,
    Replay(PathBuf),
}

impl std::str::FromStr for SourceConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synthetic" => Ok(SourceConfig::Synthetic),
            _ => match s.strip_prefix("replay:") {
                Some(path) if !path.is_empty() => Ok(SourceConfig::Replay(path.into())),
                _ => Err(format!("expected `synthetic` or `replay:<path>`, found {s:?}")),
            },
        }
    }
}

/// Either kind of source behind one type.
#[derive(Debug)]
pub enum AnySource {
    Synthetic(SyntheticSource),
    Replay(ReplaySource),
}

impl FrameSource for AnySource {
    type Error = CaptureError;

    fn calibration(&self) -> DeviceCalibration {
        match self {
            AnySource::Synthetic(s) => s.calibration(),
            AnySource::Replay(s) => s.calibration(),
        }
    }

    fn nominal_rate(&self) -> f64 {
        match self {
            AnySource::Synthetic(s) => s.nominal_rate(),
            AnySource::Replay(s) => s.nominal_rate(),
        }
    }

    fn next_bundle(&mut self) -> Result<Option<FrameBundle>, CaptureError> {
        match self {
            AnySource::Synthetic(s) => Ok(s.next_bundle()?),
            AnySource::Replay(s) => Ok(s.next_bundle()?),
        }
    }
}

/// An explicit output root, else the stored option, else the data
/// directory's `sessions` folder.
pub fn resolve_output_root(catalog: &Catalog, data_dir: &Path, explicit: Option<PathBuf>) -> Result<PathBuf, CatalogError> {
    match explicit {
        Some(p) => Ok(p),
        None => Ok(catalog.option(OPTION_OUTPUT_ROOT)?.map_or_else(|| data_dir.join(SESSIONS_DIR), PathBuf::from)),
    }
}

/// An explicit frame rate, else the stored option, else the default.
pub fn resolve_rate(catalog: &Catalog, explicit: Option<f64>) -> Result<f64, CatalogError> {
    let rate = match explicit {
        Some(r) => r,
        None => match catalog.option(OPTION_FRAME_RATE)? {
            Some(r) => r.parse().map_err(|_| CatalogError::Validation(format!("stored frame rate {r:?}")))?,
            None => DEFAULT_RATE,
        },
    };
    if rate.is_finite() && rate > 0.0 {
        Ok(rate)
    } else {
        Err(CatalogError::Validation(format!("frame rate must be positive, got {rate}")))
    }
}

/// Looks up the names a session folder is built from.
pub fn session_labels(catalog: &Catalog, item_id: i64, performer_id: i64) -> Result<SessionLabels, CatalogError> {
    let item = catalog.item(item_id)?;
    let performer = catalog.performer(performer_id)?;
    let language = catalog.language(item.language_id)?;
    Ok(SessionLabels {
        language: language.name,
        category: item.category,
        item: item.name,
        performer: performer.name,
        item_id,
        performer_id,
    })
}

pub fn gesture_spec(labels: &SessionLabels, params: &CaptureParams, seed: u64) -> Result<GestureSpec, CoreError> {
    let motion = match &params.motion {
        Some(m) => m.parse()?,
        None => MotionKind::for_category(labels.category),
    };
    GestureSpec::new(motion, params.duration.unwrap_or(DEFAULT_DURATION), params.bodies.unwrap_or(1), seed)
}

/// Builds the frame source for a session. `frames` caps the stream length.
pub fn build_source(
    config: &SourceConfig,
    labels: &SessionLabels,
    params: &CaptureParams,
    seed: u64,
    rate: f64,
    frames: Option<u64>,
) -> Result<AnySource, CaptureError> {
    match config {
        SourceConfig::Synthetic => {
            let spec = gesture_spec(labels, params, seed)?;
            let src = SyntheticSource::new(spec, DeviceCalibration::default(), rate)?;
            Ok(AnySource::Synthetic(match frames {
                Some(n) => src.with_limit(n),
                None => src,
            }))
        }
        SourceConfig::Replay(path) => Ok(AnySource::Replay(open_replay(path)?)),
    }
}

/// Appends every bundle of `source` (up to `limit`) to a recording session.
pub fn drain_into<S>(source: &mut S, session: &mut Session, limit: Option<u64>) -> Result<u64, CaptureError>
where
    S: FrameSource,
    CaptureError: From<S::Error>,
{
    let mut n = 0;
    while limit.is_none_or(|l| n < l) {
        let Some(bundle) = source.next_bundle()? else { break };
        session.append_frame(&bundle)?;
        n += 1;
    }
    Ok(n)
}

/// Validates a stopped session's folder, saves it and registers it.
pub fn save_and_register(catalog: &mut Catalog, session: &mut Session) -> Result<RecordingEntry, CaptureError> {
    let report = validate_session(session.folder());
    if !report.is_valid() {
        return Err(CaptureError::Invalid(report));
    }
    let saved: SavedRecording = session.save()?;
    Ok(catalog.register_recording(&saved)?)
}

/// A complete unattended synthetic capture of `frames` frames, registered
/// in the catalog.
pub fn record_scripted(
    catalog: &mut Catalog,
    output_root: &Path,
    item_id: i64,
    performer_id: i64,
    frames: u64,
    params: &CaptureParams,
    rate: f64,
) -> Result<(Session, RecordingEntry), CaptureError> {
    let labels = session_labels(catalog, item_id, performer_id)?;
    let seed = params.seed.unwrap_or(0);
    let mut source = build_source(&SourceConfig::Synthetic, &labels, params, seed, rate, Some(frames))?;
    let mut session = create_session(labels, output_root, seed, &source.calibration())?;
    session.start()?;
    drain_into(&mut source, &mut session, Some(frames))?;
    session.stop()?;
    let entry = save_and_register(catalog, &mut session)?;
    Ok((session, entry))
}

/// Copies a saved session into a new session folder under `output_root`,
/// frame by frame through the replay source.
pub fn rerecord(folder: &Path, output_root: &Path, labels: SessionLabels, seed: u64) -> Result<Session, CaptureError> {
    let mut source = open_replay(folder)?;
    let mut session = create_session(labels, output_root, seed, &source.calibration())?;
    session.start()?;
    drain_into(&mut source, &mut session, None)?;
    session.stop()?;
    Ok(session)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_config_parsing() {
        assert_eq!("synthetic".parse(), Ok(SourceConfig::Synthetic));
        assert_eq!("replay:/a/b".parse(), Ok(SourceConfig::Replay("/a/b".into())));
        assert!("replay:".parse::<SourceConfig>().is_err());
        assert!("kinect".parse::<SourceConfig>().is_err());
    }
}
