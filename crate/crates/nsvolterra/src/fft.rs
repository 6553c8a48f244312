//! Minimal 3D FFT plumbing on top of `rustfft`.
//!
//! Plans are cached per thread; scratch buffers are never shared across
//! threads, so concurrent transforms on distinct fields are safe.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, inverse))
            .or_insert_with(|| {
                let dir = if inverse {
                    FftDirection::Inverse
                } else {
                    FftDirection::Forward
                };
                FftPlanner::new().plan_fft(len, dir)
            })
            .clone()
    })
}

/// In-place unnormalized 3D DFT of a cube of side `m`, laid out with index
/// `(ix * m + iy) * m + iz`. `inverse` uses the `e^{+i}` kernel.
pub fn fft3_inplace(data: &mut [Complex64], m: usize, inverse: bool) {
    assert_eq!(data.len(), m * m * m);
    let fft = plan(m, inverse);
    let mut line = vec![Complex64::default(); m];

    // axis 2 (contiguous)
    for chunk in data.chunks_exact_mut(m) {
        fft.process(chunk);
    }
    // axis 1 (stride m)
    for ix in 0..m {
        for iz in 0..m {
            let base = ix * m * m + iz;
            for iy in 0..m {
                line[iy] = data[base + iy * m];
            }
            fft.process(&mut line);
            for iy in 0..m {
                data[base + iy * m] = line[iy];
            }
        }
    }
    // axis 0 (stride m*m)
    for iy in 0..m {
        for iz in 0..m {
            let base = iy * m + iz;
            for ix in 0..m {
                line[ix] = data[base + ix * m * m];
            }
            fft.process(&mut line);
            for ix in 0..m {
                data[base + ix * m * m] = line[ix];
            }
        }
    }
}

/// Smallest integer `>= n` whose prime factors are all in {2, 3, 5}.
pub fn next_fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2usize, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn next_fast_sizes() {
        assert_eq!(next_fast_size(25), 25);
        assert_eq!(next_fast_size(26), 27);
        assert_eq!(next_fast_size(7), 8);
        assert_eq!(next_fast_size(1), 1);
    }

    #[test]
    fn forward_then_inverse_is_identity_times_m3() {
        let m = 6;
        let mut data: Vec<Complex64> = (0..m * m * m)
            .map(|i| Complex64::new(i as f64 * 0.37 - 1.0, (i as f64).sin()))
            .collect();
        let orig = data.clone();
        fft3_inplace(&mut data, m, false);
        fft3_inplace(&mut data, m, true);
        let scale = (m * m * m) as f64;
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }
}
