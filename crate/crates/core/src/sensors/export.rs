//! File formats for synthesized frames.

use std::io::Write;

use super::boxes::InstanceBoxes;
use super::image::{DepthImage, InstanceImage, RgbImage};
use super::SensorError;

fn io_err(e: impl std::fmt::Display) -> SensorError {
    SensorError::Io(e.to_string())
}

/// PFM greyscale, little-endian, bottom row first.
pub fn write_pfm<W: Write>(img: &DepthImage, mut w: W) -> Result<(), SensorError> {
    write!(w, "Pf\n{} {}\n-1.0\n", img.width, img.height).map_err(io_err)?;
    for y in (0..img.height).rev() {
        let bytes: Vec<u8> = img.row(y).iter().flat_map(|v| v.to_le_bytes()).collect();
        w.write_all(&bytes).map_err(io_err)?;
    }
    Ok(())
}

pub fn read_pfm(bytes: &[u8]) -> Result<DepthImage, SensorError> {
    let bad = || SensorError::Io("malformed PFM".into());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
    }
    pos += 1;
    if fields[0] != "Pf" {
        return Err(bad());
    }
    let width: u32 = fields[1].parse().map_err(|_| bad())?;
    let height: u32 = fields[2].parse().map_err(|_| bad())?;
    let scale: f64 = fields[3].parse().map_err(|_| bad())?;
    let n = width as usize * height as usize;
    let body = bytes.get(pos..pos + 4 * n).ok_or_else(bad)?;
    let mut img = DepthImage::zeros(width, height);
    for (i, c) in body.chunks_exact(4).enumerate() {
        let raw = [c[0], c[1], c[2], c[3]];
        let v = if scale < 0.0 { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (row, col) = (i / width as usize, i % width as usize);
        img.data[(height as usize - 1 - row) * width as usize + col] = v;
    }
    Ok(img)
}

fn png_writer<W: Write>(w: W, width: u32, height: u32, color: png::ColorType, depth: png::BitDepth) -> Result<png::Writer<W>, SensorError> {
    let mut enc = png::Encoder::new(w, width, height);
    enc.set_color(color);
    enc.set_depth(depth);
    enc.write_header().map_err(io_err)
}

/// 16-bit greyscale PNG in millimetres (saturating at 65.535 m).
pub fn write_depth_png<W: Write>(img: &DepthImage, w: W) -> Result<(), SensorError> {
    let data: Vec<u8> = img
        .data
        .iter()
        .flat_map(|&z| ((z as f64 * 1000.0).round().clamp(0.0, 65535.0) as u16).to_be_bytes())
        .collect();
    let mut wr = png_writer(w, img.width, img.height, png::ColorType::Grayscale, png::BitDepth::Sixteen)?;
    wr.write_image_data(&data).map_err(io_err)
}

/// 16-bit greyscale PNG of instance ids.
pub fn write_instance_png<W: Write>(img: &InstanceImage, w: W) -> Result<(), SensorError> {
    let mut data = Vec::with_capacity(img.data.len() * 2);
    for &id in &img.data {
        let v = u16::try_from(id).map_err(|_| SensorError::Io(format!("instance id {id} does not fit 16 bits")))?;
        data.extend_from_slice(&v.to_be_bytes());
    }
    let mut wr = png_writer(w, img.width, img.height, png::ColorType::Grayscale, png::BitDepth::Sixteen)?;
    wr.write_image_data(&data).map_err(io_err)
}

/// Reads a 16-bit greyscale instance PNG written by [`write_instance_png`].
pub fn read_instance_png(bytes: &[u8]) -> Result<InstanceImage, SensorError> {
    let mut reader = png::Decoder::new(std::io::Cursor::new(bytes)).read_info().map_err(io_err)?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(SensorError::Io("instance PNG must be 16-bit greyscale".into()));
    }
    let (width, height) = (info.width, info.height);
    let mut buf = vec![0u8; reader.output_buffer_size().ok_or_else(|| io_err("PNG too large"))?];
    reader.next_frame(&mut buf).map_err(io_err)?;
    let data = buf
        .chunks_exact(2)
        .take(width as usize * height as usize)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
        .collect();
    Ok(InstanceImage { width, height, data })
}

pub fn write_rgb_png<W: Write>(img: &RgbImage, w: W) -> Result<(), SensorError> {
    let mut wr = png_writer(w, img.width, img.height, png::ColorType::Rgb, png::BitDepth::Eight)?;
    wr.write_image_data(&img.data).map_err(io_err)
}

/// One JSON object per instance: `{frame, instance, tight, loose, bbox3d, visible}`.
pub fn boxes_json_lines(frame: u64, boxes: &[InstanceBoxes]) -> String {
    let mut s = String::new();
    for b in boxes {
        let v = serde_json::json!({
            "frame": frame,
            "instance": b.instance,
            "tight": b.tight,
            "loose": b.loose,
            "bbox3d": [[b.bbox3d.min.x, b.bbox3d.min.y, b.bbox3d.min.z], [b.bbox3d.max.x, b.bbox3d.max.y, b.bbox3d.max.z]],
            "visible": b.visible,
        });
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}
