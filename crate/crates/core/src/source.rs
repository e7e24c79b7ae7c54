use crate::frame::FrameBundle;
use crate::mapping::DeviceCalibration;

/// Default capture rate, frames per second.
pub const DEFAULT_RATE: f64 = 30.0;

/// A stream of synchronized frame bundles standing in for the sensor.
///
/// Frame indices start at 0 and increase by one; timestamps never decrease.
/// A source is single-consumer.
pub trait FrameSource {
    type Error;

    fn calibration(&self) -> DeviceCalibration;

    /// Nominal frames per second.
    fn nominal_rate(&self) -> f64;

    /// The next bundle, or `None` at end of stream.
    fn next_bundle(&mut self) -> Result<Option<FrameBundle>, Self::Error>;
}

/// Milliseconds since session start of frame `index` at `rate` frames/s.
pub fn timestamp_ms(index: u64, rate: f64) -> u64 {
    libm::floor(index as f64 * 1000.0 / rate) as u64
}
