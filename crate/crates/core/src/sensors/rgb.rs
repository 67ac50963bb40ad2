use super::image::{DepthImage, InstanceImage, RgbImage};
use super::SensorError;

/// Bijective 32-bit mixer (murmur3 finaliser).
fn fmix32(mut h: u32) -> u32 {
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^= h >> 16;
    h
}

/// Hue in degrees `[0, 360)` for an instance id; distinct ids get distinct hues.
pub fn instance_hue(id: u32) -> f64 {
    fmix32(id) as f64 / 4_294_967_296.0 * 360.0
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |f: f64| ((f + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// False-colour image: hue from the instance id, value `1 − depth/value_range`.
pub fn proxy_rgb(depth: &DepthImage, instances: &InstanceImage, value_range: f64) -> Result<RgbImage, SensorError> {
    if depth.width != instances.width || depth.height != instances.height {
        return Err(SensorError::SizeMismatch);
    }
    let mut out = RgbImage::black(depth.width, depth.height);
    for (i, (&z, &id)) in depth.data.iter().zip(&instances.data).enumerate() {
        if id == 0 {
            continue;
        }
        let v = if value_range.is_finite() { (1.0 - z as f64 / value_range).clamp(0.0, 1.0) } else { 1.0 };
        out.data[3 * i..3 * i + 3].copy_from_slice(&hsv_to_rgb(instance_hue(id), 0.85, v));
    }
    Ok(out)
}
