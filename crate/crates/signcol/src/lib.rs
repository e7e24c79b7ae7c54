//! Storage, catalog, service and command-line layers on top of
//! [`signcol_core`].
//!
//! * [`recording`] writes capture sessions to disk and [`layout`] checks them.
//! * [`replay`] reads a saved session back as a frame source.
//! * [`catalog`] is the SQLite-backed store of languages, items, performers
//!   and recordings.
//! * [`service`] exposes all of it over HTTP; [`cli`] drives it headless.

pub mod capture;
pub mod catalog;
pub mod cli;
pub mod layout;
pub mod png_io;
pub mod preview;
pub mod recording;
pub mod replay;
pub mod service;

pub use signcol_core as core;
