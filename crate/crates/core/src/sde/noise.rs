//! Counter-addressed Gaussian increments.
//!
//! Every `(seed, member, step, component)` maps to one fixed normal draw:
//! the ChaCha key is derived from `seed`, the stream id is the ensemble
//! member, and the word position is a pure function of `step`. Normals come
//! from Box–Muller pairs so each step consumes a fixed number of words.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Increments `ΔW_k ~ N(0, q_j·dt)` for a Q-Wiener process with diagonal
/// covariance `q`.
#[derive(Debug, Clone)]
pub struct BrownianDriver {
    seed: u64,
    q_sqrt: Vec<f64>,
    dt: f64,
}

impl BrownianDriver {
    pub fn new(seed: u64, q_diag: &[f64], dt: f64) -> Self {
        Self {
            seed,
            q_sqrt: q_diag.iter().map(|q| q.max(0.0).sqrt()).collect(),
            dt,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn noise_dim(&self) -> usize {
        self.q_sqrt.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Sequential stream for one member, starting at `step`.
    pub fn stream(&self, member: u64, step: u64) -> IncrementStream {
        IncrementStream::new(self.seed, member, step, &self.q_sqrt, self.dt.sqrt())
    }

    /// Random access to a single increment vector.
    pub fn increment(&self, member: u64, step: u64, out: &mut [f64]) {
        self.stream(member, step).next_into(out);
    }
}

/// Standard normals for `(seed, member)` laid out in blocks of `width`
/// per step.
pub struct NormalStream {
    rng: ChaCha8Rng,
    width: usize,
}

impl NormalStream {
    /// 32-bit words consumed per step: two `u64` per normal pair.
    fn words_per_step(width: usize) -> u128 {
        (width.div_ceil(2) * 4) as u128
    }

    pub fn new(seed: u64, member: u64, step: u64, width: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(member);
        rng.set_word_pos(step as u128 * Self::words_per_step(width));
        Self { rng, width }
    }

    fn uniform(&mut self) -> f64 {
        // (0, 1]
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// Fills the next step's `width` standard normals.
    pub fn next_step(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.width);
        let mut i = 0;
        while i < self.width {
            let (a, b) = self.pair();
            out[i] = a;
            if i + 1 < self.width {
                out[i + 1] = b;
            }
            i += 2;
        }
    }

    /// One standard normal per step (`width == 1` streams).
    pub fn next_normal(&mut self) -> f64 {
        assert_eq!(self.width, 1, "next_normal needs a width-1 stream");
        let mut buf = [0.0];
        self.next_step(&mut buf);
        buf[0]
    }
}

pub struct IncrementStream {
    normals: NormalStream,
    scale: Vec<f64>,
}

impl IncrementStream {
    fn new(seed: u64, member: u64, step: u64, q_sqrt: &[f64], sqrt_dt: f64) -> Self {
        Self {
            normals: NormalStream::new(seed, member, step, q_sqrt.len()),
            scale: q_sqrt.iter().map(|q| q * sqrt_dt).collect(),
        }
    }

    pub fn next_into(&mut self, out: &mut [f64]) {
        self.normals.next_step(out);
        for (o, s) in out.iter_mut().zip(&self.scale) {
            *o *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let driver = BrownianDriver::new(11, &[1.0, 0.5, 2.0], 0.01);
        let mut seq = driver.stream(4, 0);
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for step in 0..50 {
            seq.next_into(&mut a);
            driver.increment(4, step, &mut b);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn reproducible_and_member_dependent() {
        let d1 = BrownianDriver::new(3, &[1.0], 0.1);
        let d2 = BrownianDriver::new(3, &[1.0], 0.1);
        let mut x = [0.0];
        let mut y = [0.0];
        d1.increment(7, 123, &mut x);
        d2.increment(7, 123, &mut y);
        assert_eq!(x[0].to_bits(), y[0].to_bits());
        d1.increment(8, 123, &mut y);
        assert_ne!(x[0], y[0]);
        BrownianDriver::new(4, &[1.0], 0.1).increment(7, 123, &mut y);
        assert_ne!(x[0], y[0]);
    }

    #[test]
    fn increment_variance() {
        let q = [0.25, 4.0];
        let dt = 0.02;
        let driver = BrownianDriver::new(99, &q, dt);
        let n = 40_000usize;
        let mut sums = [0.0; 2];
        let mut sq = [0.0; 2];
        let mut buf = [0.0; 2];
        let mut s = driver.stream(0, 0);
        for _ in 0..n {
            s.next_into(&mut buf);
            for j in 0..2 {
                sums[j] += buf[j];
                sq[j] += buf[j] * buf[j];
            }
        }
        for j in 0..2 {
            let var = sq[j] / n as f64 - (sums[j] / n as f64).powi(2);
            let target = q[j] * dt;
            // standard error of a Gaussian sample variance: target·sqrt(2/n)
            let se = target * (2.0 / n as f64).sqrt();
            assert!((var - target).abs() < 4.0 * se, "{j}: {var} vs {target}");
        }
    }

    #[test]
    fn members_are_uncorrelated() {
        let driver = BrownianDriver::new(5, &[1.0], 1.0);
        let steps = 20_000;
        let a: Vec<f64> = {
            let mut s = driver.stream(0, 0);
            (0..steps)
                .map(|_| {
                    let mut b = [0.0];
                    s.next_into(&mut b);
                    b[0]
                })
                .collect()
        };
        for m in 1..6 {
            let mut s = driver.stream(m, 0);
            let b: Vec<f64> = (0..steps)
                .map(|_| {
                    let mut v = [0.0];
                    s.next_into(&mut v);
                    v[0]
                })
                .collect();
            let corr: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / steps as f64;
            assert!(corr.abs() < 4.0 / (steps as f64).sqrt(), "member {m}: {corr}");
        }
    }
}
