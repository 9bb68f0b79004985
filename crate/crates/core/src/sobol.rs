//! Two-dimensional Sobol points and their images in the disk.

use std::f64::consts::PI;

use num_complex::Complex64;

const BITS: usize = 32;

/// Gray-code Sobol sequence in [0, 1)^2. The first coordinate is the van der
/// Corput sequence; the second uses the primitive polynomial x + 1.
#[derive(Clone, Debug)]
pub struct Sobol2 {
    v: [[u32; BITS]; 2],
    x: [u32; 2],
    index: u32,
}

impl Default for Sobol2 {
    fn default() -> Self {
        Self::new()
    }
}

impl Sobol2 {
    pub fn new() -> Self {
        let mut v = [[0u32; BITS]; 2];
        for k in 0..BITS {
            v[0][k] = 1u32 << (31 - k);
        }
        v[1][0] = 1u32 << 31;
        for k in 1..BITS {
            v[1][k] = v[1][k - 1] ^ (v[1][k - 1] >> 1);
        }
        Self { v, x: [0, 0], index: 0 }
    }
}

impl Iterator for Sobol2 {
    type Item = [f64; 2];

    /// Skips the all-zero first point.
    fn next(&mut self) -> Option<[f64; 2]> {
        let c = self.index.trailing_ones() as usize;
        if c >= BITS {
            return None;
        }
        for d in 0..2 {
            self.x[d] ^= self.v[d][c];
        }
        self.index += 1;
        let scale = 1.0 / (1u64 << 32) as f64;
        Some([self.x[0] as f64 * scale, self.x[1] as f64 * scale])
    }
}

/// `count` points sqrt(a) r e^{2 pi i b}, uniform in area on the disk of radius r.
pub fn disk_points(count: usize, radius: f64) -> Vec<Complex64> {
    Sobol2::new()
        .take(count)
        .map(|[a, b]| Complex64::from_polar(radius * a.sqrt(), 2.0 * PI * b))
        .collect()
}
