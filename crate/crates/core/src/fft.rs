//! Radix-2 complex FFT for power-of-two lengths.
//!
//! Forward transform uses `exp(-2πi jk/n)` and is unnormalized; the inverse
//! carries the `1/n` factor so that `inverse(forward(x)) == x`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::{Complex, Error, Result};

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    /// Per-stage twiddles `exp(−2πik/len)`, `k < len/2`, for `len = 4, 8, …, n`,
    /// stored back to back.
    forward_twiddles: Vec<Complex>,
    inverse_twiddles: Vec<Complex>,
    bit_reverse: Vec<u32>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let bits = n.trailing_zeros();
        let mut forward_twiddles = Vec::with_capacity(n);
        let mut len = 4;
        while len <= n {
            for k in 0..len / 2 {
                let theta = -2.0 * PI * k as f64 / len as f64;
                forward_twiddles.push(Complex::new(theta.cos(), theta.sin()));
            }
            len <<= 1;
        }
        let inverse_twiddles = forward_twiddles.iter().map(|w| w.conj()).collect();
        let bit_reverse = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(Self {
            n,
            forward_twiddles,
            inverse_twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex]) {
        self.transform(data, &self.forward_twiddles);
    }

    pub fn inverse(&self, data: &mut [Complex]) {
        self.transform(data, &self.inverse_twiddles);
        let scale = 1.0 / self.n as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex], twiddles: &[Complex]) {
        assert_eq!(data.len(), self.n, "FFT length mismatch");
        for (i, &j) in self.bit_reverse.iter().enumerate() {
            let j = j as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        if self.n < 2 {
            return;
        }
        // Length-2 butterflies need no twiddles.
        for pair in data.chunks_exact_mut(2) {
            let t = pair[1];
            pair[1] = pair[0] - t;
            pair[0] += t;
        }
        let mut len = 4;
        let mut offset = 0;
        while len <= self.n {
            let half = len / 2;
            let w = &twiddles[offset..offset + half];
            for block in data.chunks_exact_mut(len) {
                let (lo, hi) = block.split_at_mut(half);
                for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(w) {
                    let t = *b * *w;
                    *b = *a - t;
                    *a += t;
                }
            }
            offset += half;
            len <<= 1;
        }
    }
}
