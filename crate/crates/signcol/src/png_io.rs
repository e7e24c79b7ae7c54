//! Lossless PNG encoding of the image modalities.

use std::io::{BufReader, Read, Seek, Write};

use png::{BitDepth, ColorType};
use signcol_core::frame::{COLOR_HEIGHT, COLOR_WIDTH, DEPTH_HEIGHT, DEPTH_WIDTH};
use signcol_core::{BodyIndexFrame, ColorFrame, DepthFrame, InfraredFrame, MappedBodyFrame};

#[derive(Debug, thiserror::Error)]
pub enum PngError {
    #[error(transparent)]
    Encode(#[from] png::EncodingError),
    #[error(transparent)]
    Decode(#[from] png::DecodingError),
    #[error("expected {expected}, found {found}")]
    Format { expected: String, found: String },
}

fn encode<W: Write>(
    out: W,
    width: usize,
    height: usize,
    color: ColorType,
    depth: BitDepth,
    data: &[u8],
) -> Result<(), PngError> {
    let mut enc = png::Encoder::new(out, width as u32, height as u32);
    enc.set_color(color);
    enc.set_depth(depth);
    enc.set_compression(png::Compression::Fast);
    let mut writer = enc.write_header()?;
    writer.write_image_data(data)?;
    writer.finish()?;
    Ok(())
}

/// Decodes an image, insisting on the given geometry and sample format.
fn decode<R: Read + Seek>(
    input: R,
    width: usize,
    height: usize,
    color: ColorType,
    depth: BitDepth,
) -> Result<Vec<u8>, PngError> {
    let decoder = png::Decoder::new(BufReader::new(input));
    let mut reader = decoder.read_info()?;
    let info = reader.info();
    let found = (info.width as usize, info.height as usize, info.color_type, info.bit_depth);
    if found != (width, height, color, depth) {
        return Err(PngError::Format {
            expected: format!("{width}x{height} {color:?} {depth:?}"),
            found: format!("{}x{} {:?} {:?}", found.0, found.1, found.2, found.3),
        });
    }
    let size = reader.output_buffer_size().ok_or_else(|| PngError::Format {
        expected: "bounded image".into(),
        found: "oversized image".into(),
    })?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf)?;
    buf.truncate(frame.buffer_size());
    Ok(buf)
}

pub fn write_color<W: Write>(out: W, frame: &ColorFrame) -> Result<(), PngError> {
    encode(out, COLOR_WIDTH, COLOR_HEIGHT, ColorType::Rgb, BitDepth::Eight, &frame.data)
}

/// 16-bit grayscale; PNG stores samples big-endian.
pub fn write_depth<W: Write>(out: W, frame: &DepthFrame) -> Result<(), PngError> {
    let bytes: Vec<u8> = frame.data.iter().flat_map(|d| d.to_be_bytes()).collect();
    encode(out, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Grayscale, BitDepth::Sixteen, &bytes)
}

pub fn write_infrared<W: Write>(out: W, frame: &InfraredFrame) -> Result<(), PngError> {
    encode(out, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Grayscale, BitDepth::Eight, &frame.data)
}

pub fn write_body_index<W: Write>(out: W, frame: &BodyIndexFrame) -> Result<(), PngError> {
    encode(out, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Grayscale, BitDepth::Eight, &frame.data)
}

pub fn write_mapped<W: Write>(out: W, frame: &MappedBodyFrame) -> Result<(), PngError> {
    encode(out, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Rgb, BitDepth::Eight, &frame.data)
}

pub fn read_color<R: Read + Seek>(input: R) -> Result<ColorFrame, PngError> {
    let data = decode(input, COLOR_WIDTH, COLOR_HEIGHT, ColorType::Rgb, BitDepth::Eight)?;
    Ok(ColorFrame { data })
}

pub fn read_depth<R: Read + Seek>(input: R) -> Result<DepthFrame, PngError> {
    let bytes = decode(input, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Grayscale, BitDepth::Sixteen)?;
    let data = bytes.chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect();
    Ok(DepthFrame { data })
}

pub fn read_infrared<R: Read + Seek>(input: R) -> Result<InfraredFrame, PngError> {
    let data = decode(input, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Grayscale, BitDepth::Eight)?;
    Ok(InfraredFrame { data })
}

pub fn read_body_index<R: Read + Seek>(input: R) -> Result<BodyIndexFrame, PngError> {
    let data = decode(input, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Grayscale, BitDepth::Eight)?;
    Ok(BodyIndexFrame { data })
}

pub fn read_mapped<R: Read + Seek>(input: R) -> Result<MappedBodyFrame, PngError> {
    let data = decode(input, DEPTH_WIDTH, DEPTH_HEIGHT, ColorType::Rgb, BitDepth::Eight)?;
    Ok(MappedBodyFrame { data })
}
