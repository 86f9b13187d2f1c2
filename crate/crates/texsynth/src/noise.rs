//! 2D simplex gradient noise and fractal (fBm) sums.

use partsynth_core::rng::{tag, RandomStream};

use crate::TexsynthError;

const F2: f64 = 0.366_025_403_784_438_6; // (√3 − 1) / 2
const G2: f64 = 0.211_324_865_405_187_1; // (3 − √3) / 6

const GRAD3: [[f64; 2]; 12] = [
    [1.0, 1.0],
    [-1.0, 1.0],
    [1.0, -1.0],
    [-1.0, -1.0],
    [1.0, 0.0],
    [-1.0, 0.0],
    [1.0, 0.0],
    [-1.0, 0.0],
    [0.0, 1.0],
    [0.0, -1.0],
    [0.0, 1.0],
    [0.0, -1.0],
];

/// Simplex noise with a permutation table shuffled from a seed.
#[derive(Clone, Debug)]
pub struct SimplexNoise {
    perm: [u8; 512],
    grad_index: [u8; 512],
}

impl SimplexNoise {
    pub fn new(seed: u64) -> Self {
        let mut p: [u8; 256] = std::array::from_fn(|i| i as u8);
        let mut rng = RandomStream::new(seed).derive(tag("simplex-permutation"));
        for i in (1..256).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            p.swap(i, j);
        }
        let perm: [u8; 512] = std::array::from_fn(|i| p[i & 255]);
        let grad_index = perm.map(|v| v % 12);
        Self { perm, grad_index }
    }

    /// The doubled 512-entry permutation table.
    pub fn permutation(&self) -> &[u8; 512] {
        &self.perm
    }

    /// Noise value in [−1, 1].
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let s = (x + y) * F2;
        let i = (x + s).floor();
        let j = (y + s).floor();
        let t = (i + j) * G2;
        let x0 = x - (i - t);
        let y0 = y - (j - t);
        let (i1, j1) = if x0 > y0 { (1, 0) } else { (0, 1) };
        let x1 = x0 - i1 as f64 + G2;
        let y1 = y0 - j1 as f64 + G2;
        let x2 = x0 - 1.0 + 2.0 * G2;
        let y2 = y0 - 1.0 + 2.0 * G2;

        let ii = (i as i64 & 255) as usize;
        let jj = (j as i64 & 255) as usize;
        let g0 = self.grad_index[ii + self.perm[jj] as usize];
        let g1 = self.grad_index[ii + i1 + self.perm[jj + j1] as usize];
        let g2 = self.grad_index[ii + 1 + self.perm[jj + 1] as usize];

        let corner = |g: u8, dx: f64, dy: f64| {
            let t = 0.5 - dx * dx - dy * dy;
            if t < 0.0 {
                0.0
            } else {
                let g = GRAD3[g as usize];
                let t2 = t * t;
                t2 * t2 * (g[0] * dx + g[1] * dy)
            }
        };
        let n = corner(g0, x0, y0) + corner(g1, x1, y1) + corner(g2, x2, y2);
        (70.0 * n).clamp(-1.0, 1.0)
    }
}

/// One-shot simplex noise. Builds the permutation table on every call;
/// use [`SimplexNoise`] for repeated sampling.
pub fn simplex2(x: f64, y: f64, seed: u64) -> f64 {
    SimplexNoise::new(seed).sample(x, y)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    pub seed: u64,
    /// Cycles per UV unit.
    pub frequency: f64,
    pub octaves: u32,
    pub lacunarity: f64,
    pub gain: f64,
    /// Mask threshold in [−1, 1].
    pub threshold: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            seed: 0,
            frequency: 4.0,
            octaves: 4,
            lacunarity: 2.0,
            gain: 0.5,
            threshold: 0.0,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<(), TexsynthError> {
        let bad = |m: &str| Err(TexsynthError::InvalidNoise(m.into()));
        if self.octaves < 1 {
            return bad("octaves must be >= 1");
        }
        if !(self.lacunarity > 1.0) {
            return bad("lacunarity must be > 1");
        }
        if !(self.gain > 0.0 && self.gain < 1.0) {
            return bad("gain must lie in (0, 1)");
        }
        if !self.frequency.is_finite() {
            return bad("frequency must be finite");
        }
        Ok(())
    }
}

/// Octave sum of an arbitrary noise function, normalized by the total
/// octave weight so that the result stays in [−1, 1].
pub fn fbm_with(noise: impl Fn(f64, f64) -> f64, x: f64, y: f64, params: &NoiseParams) -> f64 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut amplitude = 1.0;
    let mut scale = params.frequency;
    for _ in 0..params.octaves {
        sum += amplitude * noise(x * scale, y * scale);
        norm += amplitude;
        amplitude *= params.gain;
        scale *= params.lacunarity;
    }
    sum / norm
}

/// Simplex fBm at `(x, y)` using `params.seed` for every octave.
pub fn fbm(x: f64, y: f64, params: &NoiseParams) -> f64 {
    let noise = SimplexNoise::new(params.seed);
    fbm_with(|a, b| noise.sample(a, b), x, y, params)
}

/// Reusable fBm evaluator holding the permutation table.
#[derive(Clone, Debug)]
pub struct Fbm {
    noise: SimplexNoise,
    params: NoiseParams,
}

impl Fbm {
    pub fn new(params: NoiseParams) -> Self {
        Self {
            noise: SimplexNoise::new(params.seed),
            params,
        }
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        fbm_with(|a, b| self.noise.sample(a, b), x, y, &self.params)
    }
}
