//! Counter-based deterministic random streams and matrix ensembles.
//!
//! A [`SeedStream`] is keyed by `(master_seed, stream_id)` and produces its
//! output purely as a function of `(key, counter)` via the Threefry-2x64
//! block cipher (20 rounds). Streams with distinct ids are statistically
//! independent, and a stream's output depends only on its own draw count,
//! so parallel and serial sampling agree bit-for-bit.

use super::matrix::{Complex64, ComplexMatrix};
use super::state::PureState;

const THREEFRY_PARITY: u64 = 0x1BD1_1BDA_A9FC_1A22;
const ROTATIONS: [u32; 8] = [16, 42, 12, 31, 16, 32, 24, 21];
const ROUNDS: usize = 20;

/// Threefry-2x64-20 block function: encrypts `counter` under `key`.
fn threefry2x64(key: [u64; 2], counter: [u64; 2]) -> [u64; 2] {
    let ks = [key[0], key[1], THREEFRY_PARITY ^ key[0] ^ key[1]];
    let mut x0 = counter[0].wrapping_add(ks[0]);
    let mut x1 = counter[1].wrapping_add(ks[1]);
    for round in 0..ROUNDS {
        x0 = x0.wrapping_add(x1);
        x1 = x1.rotate_left(ROTATIONS[round % 8]);
        x1 ^= x0;
        if (round + 1) % 4 == 0 {
            let s = (round + 1) / 4;
            x0 = x0.wrapping_add(ks[s % 3]);
            x1 = x1.wrapping_add(ks[(s + 1) % 3]).wrapping_add(s as u64);
        }
    }
    [x0, x1]
}

/// Deterministic counter-based random stream.
#[derive(Debug, Clone)]
pub struct SeedStream {
    key: [u64; 2],
    counter: u64,
    block: [u64; 2],
    block_pos: usize,
    cached_normal: Option<f64>,
}

impl SeedStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            key: [master_seed, stream_id],
            counter: 0,
            block: [0, 0],
            block_pos: 2,
            cached_normal: None,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.key[0]
    }

    pub fn stream_id(&self) -> u64 {
        self.key[1]
    }

    pub fn next_u64(&mut self) -> u64 {
        if self.block_pos >= 2 {
            self.block = threefry2x64(self.key, [self.counter, 0]);
            self.counter = self.counter.wrapping_add(1);
            self.block_pos = 0;
        }
        let v = self.block[self.block_pos];
        self.block_pos += 1;
        v
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Pair of independent standard normals (Box–Muller).
    pub fn next_normal_pair(&mut self) -> (f64, f64) {
        // Shift u1 into (0, 1] so the logarithm is always finite.
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Single standard normal; pairs are cached so draws stay aligned.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let (a, b) = self.next_normal_pair();
        self.cached_normal = Some(b);
        a
    }

    /// Complex entry with independent standard-normal real and imaginary
    /// parts, so `E|z|² = 2`.
    pub fn next_complex_normal(&mut self) -> Complex64 {
        let (re, im) = self.next_normal_pair();
        Complex64::new(re, im)
    }
}

/// Ginibre matrix: i.i.d. entries with standard-normal real and imaginary parts.
pub fn random_ginibre(rows: usize, cols: usize, stream: &mut SeedStream) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| stream.next_complex_normal()).collect();
    ComplexMatrix::new(rows, cols, data)
}

/// Haar-distributed random unitary.
///
/// QR of a Ginibre draw via modified Gram–Schmidt with reorthogonalization;
/// MGS produces the unique factor with positive real diagonal in R, which is
/// exactly the Haar-distributed one.
pub fn haar_unitary(n: usize, stream: &mut SeedStream) -> ComplexMatrix {
    let g = random_ginibre(n, n, stream);
    let mut q = ComplexMatrix::zeros(n, n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for r in 0..n {
            col[r] = g.get(r, j);
        }
        // Two orthogonalization passes keep orthonormality near machine precision.
        for _pass in 0..2 {
            for i in 0..j {
                let mut overlap = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    overlap += q.get(r, i).conj() * col[r];
                }
                for r in 0..n {
                    let v = col[r] - q.get(r, i) * overlap;
                    col[r] = v;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        // A Ginibre draw is singular with probability zero; a tiny residual
        // norm would only arise from a broken generator.
        assert!(norm > 1e-200, "degenerate Ginibre draw in haar_unitary");
        for r in 0..n {
            q.set(r, j, col[r].scale(1.0 / norm));
        }
    }
    q
}

/// Haar-random pure state: normalized vector of i.i.d. complex normals.
pub fn random_pure_state(dim: usize, stream: &mut SeedStream) -> PureState {
    loop {
        let amps: Vec<Complex64> = (0..dim).map(|_| stream.next_complex_normal()).collect();
        let norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq > 1e-200 {
            let norm = norm_sq.sqrt();
            return PureState::new_unchecked(amps.iter().map(|z| z.scale(1.0 / norm)).collect());
        }
    }
}
