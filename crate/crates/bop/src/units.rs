//! Meter/millimeter conversion and 16-bit depth coding.

use crate::{BopError, DepthImage, Result};

pub fn m_to_mm(m: f64) -> f64 {
    m * 1000.0
}

/// Inverse of [`m_to_mm`] on its image: returns the double nearest to
/// `mm / 1000` that converts back to exactly `mm`, so that re-exporting an
/// imported value reproduces it bit for bit.
pub fn mm_to_m(mm: f64) -> f64 {
    let q = mm / 1000.0;
    if !q.is_finite() || m_to_mm(q) == mm {
        return q;
    }
    let (mut down, mut up) = (q, q);
    for _ in 0..4 {
        down = down.next_down();
        up = up.next_up();
        for c in [down, up] {
            if m_to_mm(c) == mm {
                return c;
            }
        }
    }
    q
}

/// Stored value `round(z_mm / depth_scale)` per pixel.
pub fn encode_depth(depth_z_m: &[f64], width: u32, height: u32, depth_scale: f64) -> Result<DepthImage> {
    if !(depth_scale > 0.0) {
        return Err(BopError::Invalid(format!("depth_scale must be positive, got {depth_scale}")));
    }
    assert_eq!(depth_z_m.len(), width as usize * height as usize, "depth buffer size");
    let mut data = Vec::with_capacity(depth_z_m.len());
    for &z in depth_z_m {
        let mm = m_to_mm(z);
        let stored = (mm / depth_scale).round();
        if !(0.0..=u16::MAX as f64).contains(&stored) {
            return Err(BopError::DepthOverflow { depth_mm: mm, depth_scale });
        }
        data.push(stored as u16);
    }
    Ok(DepthImage::from_vec(width, height, data).expect("depth size matches its data"))
}

/// Depth in millimeters.
pub fn decode_depth(img: &DepthImage, depth_scale: f64) -> Vec<f64> {
    img.as_raw().iter().map(|&v| v as f64 * depth_scale).collect()
}
