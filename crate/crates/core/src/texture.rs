//! Float texel grids with an explicit color-space tag, and PNG/HDR I/O.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::TextureError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    Linear,
    Srgb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wrap {
    Repeat,
    Clamp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TextureMap {
    width: u32,
    height: u32,
    channels: usize,
    data: Vec<f32>,
    pub color_space: ColorSpace,
    pub wrap: Wrap,
}

impl TextureMap {
    pub fn new(
        width: u32,
        height: u32,
        channels: usize,
        data: Vec<f32>,
        color_space: ColorSpace,
        wrap: Wrap,
    ) -> Result<Self, TextureError> {
        if width == 0 || height == 0 {
            return Err(TextureError::Invalid("empty texture".into()));
        }
        if !matches!(channels, 1 | 3 | 4) {
            return Err(TextureError::Invalid(format!("{channels} channels (expected 1, 3 or 4)")));
        }
        let expected = width as usize * height as usize * channels;
        if data.len() != expected {
            return Err(TextureError::Invalid(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(TextureError::Invalid("non-finite texel".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
            color_space,
            wrap,
        })
    }

    /// Constant texture; `value.len()` gives the channel count.
    pub fn filled(width: u32, height: u32, value: &[f32], color_space: ColorSpace) -> Self {
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * value.len())
            .collect();
        Self::new(width, height, value.len(), data, color_space, Wrap::Repeat).expect("valid constant texture")
    }

    /// Builds a texture from a per-texel function.
    pub fn from_fn(
        width: u32,
        height: u32,
        channels: usize,
        color_space: ColorSpace,
        mut f: impl FnMut(u32, u32, &mut [f32]),
    ) -> Self {
        let mut data = vec![0.0; width as usize * height as usize * channels];
        for y in 0..height {
            for x in 0..width {
                let i = (y as usize * width as usize + x as usize) * channels;
                f(x, y, &mut data[i..i + channels]);
            }
        }
        Self::new(width, height, channels, data, color_space, Wrap::Repeat).expect("valid generated texture")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Mutable texel storage. Callers must keep values finite.
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels
    }

    #[inline]
    pub fn texel(&self, x: u32, y: u32) -> &[f32] {
        let i = self.offset(x, y);
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn texel_mut(&mut self, x: u32, y: u32) -> &mut [f32] {
        let i = self.offset(x, y);
        let c = self.channels;
        &mut self.data[i..i + c]
    }

    /// Texel at integer coordinates resolved with the texture's wrap mode.
    #[inline]
    pub fn fetch(&self, x: i64, y: i64) -> &[f32] {
        let (x, y) = match self.wrap {
            Wrap::Repeat => (x.rem_euclid(self.width as i64), y.rem_euclid(self.height as i64)),
            Wrap::Clamp => (x.clamp(0, self.width as i64 - 1), y.clamp(0, self.height as i64 - 1)),
        };
        self.texel(x as u32, y as u32)
    }

    /// Bilinear sample at texture coordinate `(u, v)` with texel centers at
    /// `(i + 0.5) / width`. Unused trailing channels are zero.
    pub fn sample_bilinear(&self, u: f64, v: f64) -> [f32; 4] {
        let fx = u * self.width as f64 - 0.5;
        let fy = v * self.height as f64 - 0.5;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let tx = fx - x0;
        let ty = fy - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        // Accumulate in f64 so the result never leaves the range of the corners.
        let mut acc = [0.0f64; 4];
        let corners = [
            (x0, y0, (1.0 - tx) * (1.0 - ty)),
            (x0 + 1, y0, tx * (1.0 - ty)),
            (x0, y0 + 1, (1.0 - tx) * ty),
            (x0 + 1, y0 + 1, tx * ty),
        ];
        for (x, y, w) in corners {
            if w == 0.0 {
                continue;
            }
            for (o, t) in acc.iter_mut().zip(self.fetch(x, y)) {
                *o += w * *t as f64;
            }
        }
        acc.map(|v| v as f32)
    }

    /// Bilinearly resampled copy at a new size; identical copy when the size matches.
    pub fn resized(&self, width: u32, height: u32) -> TextureMap {
        if (width, height) == (self.width, self.height) {
            return self.clone();
        }
        let c = self.channels;
        let mut t = TextureMap::from_fn(width, height, c, self.color_space, |x, y, out| {
            let s = self.sample_bilinear(
                (x as f64 + 0.5) / width as f64,
                (y as f64 + 0.5) / height as f64,
            );
            out.copy_from_slice(&s[..c]);
        });
        t.wrap = self.wrap;
        t
    }

    /// Copy with color channels decoded to linear (alpha untouched).
    pub fn to_linear(&self) -> TextureMap {
        let mut out = self.clone();
        if self.color_space == ColorSpace::Srgb {
            let color = self.channels.min(3);
            for texel in out.data.chunks_mut(self.channels) {
                for v in &mut texel[..color] {
                    *v = srgb_to_linear(*v);
                }
            }
            out.color_space = ColorSpace::Linear;
        }
        out
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut sum = vec![0.0f64; self.channels];
        for texel in self.data.chunks(self.channels) {
            for (s, v) in sum.iter_mut().zip(texel) {
                *s += *v as f64;
            }
        }
        let n = (self.width as usize * self.height as usize) as f64;
        sum.into_iter().map(|s| s / n).collect()
    }

    /// Loads PNG (8/16-bit) or Radiance HDR. HDR data is always linear;
    /// PNG data is normalized to [0, 1] and tagged with `color_space`.
    pub fn load(path: &Path, color_space: ColorSpace) -> Result<Self, TextureError> {
        let img = image::open(path).map_err(|source| TextureError::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let is_hdr = matches!(img, DynamicImage::ImageRgb32F(_) | DynamicImage::ImageRgba32F(_));
        let (w, h) = (img.width(), img.height());
        let channels = img.color().channel_count();
        let tex = match channels {
            1 | 2 => {
                let buf = img.to_luma32f();
                Self::new(w, h, 1, buf.into_raw(), color_space, Wrap::Repeat)
            }
            4 if !is_hdr => {
                let buf = img.to_rgba32f();
                Self::new(w, h, 4, buf.into_raw(), color_space, Wrap::Repeat)
            }
            _ => {
                let buf = img.to_rgb32f();
                let cs = if is_hdr { ColorSpace::Linear } else { color_space };
                Self::new(w, h, 3, buf.into_raw(), cs, Wrap::Repeat)
            }
        };
        tex.map_err(|e| match e {
            TextureError::Invalid(m) => TextureError::Invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Saves as 8- or 16-bit PNG, clamping to [0, 1] with round-half-up.
    pub fn save_png(&self, path: &Path, sixteen_bit: bool) -> Result<(), TextureError> {
        let map_err = |source| TextureError::Image {
            path: path.to_path_buf(),
            source,
        };
        let (w, h) = (self.width, self.height);
        let q8 = |v: f32| (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8;
        let q16 = |v: f32| (v.clamp(0.0, 1.0) * 65535.0 + 0.5).floor() as u16;
        let color = self.channels.min(3);
        match (color, sixteen_bit) {
            (1, false) => ImageBuffer::<Luma<u8>, _>::from_raw(w, h, self.data.iter().map(|&v| q8(v)).collect::<Vec<_>>())
                .expect("sized buffer")
                .save(path),
            (1, true) => ImageBuffer::<Luma<u16>, _>::from_raw(w, h, self.data.iter().map(|&v| q16(v)).collect::<Vec<_>>())
                .expect("sized buffer")
                .save(path),
            (_, false) => {
                let raw = self.data.chunks(self.channels).flat_map(|t| t[..3].iter().map(|&v| q8(v))).collect();
                ImageBuffer::<Rgb<u8>, Vec<u8>>::from_raw(w, h, raw).expect("sized buffer").save(path)
            }
            (_, true) => {
                let raw = self.data.chunks(self.channels).flat_map(|t| t[..3].iter().map(|&v| q16(v))).collect();
                ImageBuffer::<Rgb<u16>, Vec<u16>>::from_raw(w, h, raw).expect("sized buffer").save(path)
            }
        }
        .map_err(map_err)
    }

    /// Writes an RGB Radiance `.hdr` file.
    pub fn save_hdr(&self, path: &Path) -> Result<(), TextureError> {
        let map_err = |source| TextureError::Image {
            path: path.to_path_buf(),
            source,
        };
        let raw: Vec<f32> = self
            .data
            .chunks(self.channels)
            .flat_map(|t| {
                if t.len() >= 3 {
                    [t[0], t[1], t[2]]
                } else {
                    [t[0]; 3]
                }
            })
            .collect();
        let buf = ImageBuffer::<Rgb<f32>, Vec<f32>>::from_raw(self.width, self.height, raw).expect("sized buffer");
        DynamicImage::ImageRgb32F(buf).save(path).map_err(map_err)
    }
}

/// sRGB electro-optical transfer function.
#[inline]
pub fn srgb_to_linear(v: f32) -> f32 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
pub fn linear_to_srgb(v: f32) -> f32 {
    if v <= 0.003_130_8 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}
