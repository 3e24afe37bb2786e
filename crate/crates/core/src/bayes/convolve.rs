//! Convolution of a grid field with a radially symmetric distance kernel.
//!
//! The kernel value between two cells depends only on their center-to-center
//! distance, so on a uniform grid it is a function of the row/column offset.
//! Two evaluation routes produce the same sum: a sparse direct loop over the
//! nonzero input cells, and a zero-padded FFT for dense inputs.

use crate::grid::GridSpec;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// FFT outputs below this fraction of the peak are round-off and are zeroed.
const FFT_NOISE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// Pick whichever route is cheaper for the input's support.
    #[default]
    Auto,
    Direct,
    Fft,
}

pub struct DistanceConvolver {
    spec: GridSpec,
    /// `offset_distance[dr * n_cols + dc]` for nonnegative offsets.
    offset_distance: Vec<f64>,
    pad_rows: usize,
    pad_cols: usize,
    row_fft: Arc<dyn Fft<f64>>,
    row_ifft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
    col_ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DistanceConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistanceConvolver")
            .field("spec", &self.spec)
            .field("pad_rows", &self.pad_rows)
            .field("pad_cols", &self.pad_cols)
            .finish()
    }
}

impl DistanceConvolver {
    pub fn new(spec: GridSpec) -> Self {
        let (rows, cols) = (spec.n_rows(), spec.n_cols());
        let res = spec.resolution();
        let mut offset_distance = Vec::with_capacity(rows * cols);
        for dr in 0..rows {
            for dc in 0..cols {
                offset_distance.push(res * (dr as f64).hypot(dc as f64));
            }
        }
        // Linear convolution of two R-long signals needs at least 2R-1 points.
        let pad_rows = 2 * rows;
        let pad_cols = 2 * cols;
        let mut planner = FftPlanner::new();
        Self {
            spec,
            offset_distance,
            pad_rows,
            pad_cols,
            row_fft: planner.plan_fft_forward(pad_cols),
            row_ifft: planner.plan_fft_inverse(pad_cols),
            col_fft: planner.plan_fft_forward(pad_rows),
            col_ifft: planner.plan_fft_inverse(pad_rows),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// `out[p] = sum_q input[q] * kernel(dist(p, q))`.
    pub fn convolve<K>(&self, input: &[f64], kernel: K, method: ConvolutionMethod) -> Vec<f64>
    where
        K: Fn(f64) -> f64,
    {
        assert_eq!(input.len(), self.spec.n_cells());
        let table: Vec<f64> = self.offset_distance.iter().map(|&d| kernel(d)).collect();
        let method = match method {
            ConvolutionMethod::Auto => self.choose(input),
            m => m,
        };
        match method {
            ConvolutionMethod::Fft => self.convolve_fft(input, &table),
            _ => self.convolve_direct(input, &table),
        }
    }

    fn choose(&self, input: &[f64]) -> ConvolutionMethod {
        let nnz = input.iter().filter(|&&v| v > 0.0).count() as f64;
        let n = self.spec.n_cells() as f64;
        let padded = (self.pad_rows * self.pad_cols) as f64;
        let fft_cost = padded * (3.0 * padded.log2() + 10.0);
        if nnz * n <= fft_cost {
            ConvolutionMethod::Direct
        } else {
            ConvolutionMethod::Fft
        }
    }

    fn convolve_direct(&self, input: &[f64], table: &[f64]) -> Vec<f64> {
        let (rows, cols) = (self.spec.n_rows(), self.spec.n_cols());
        let mut out = vec![0.0; rows * cols];
        for qr in 0..rows {
            for qc in 0..cols {
                let w = input[qr * cols + qc];
                if w == 0.0 {
                    continue;
                }
                for pr in 0..rows {
                    let dr = pr.abs_diff(qr);
                    let krow = &table[dr * cols..(dr + 1) * cols];
                    let orow = &mut out[pr * cols..(pr + 1) * cols];
                    for (pc, o) in orow.iter_mut().enumerate() {
                        *o += w * krow[pc.abs_diff(qc)];
                    }
                }
            }
        }
        out
    }

    fn convolve_fft(&self, input: &[f64], table: &[f64]) -> Vec<f64> {
        let (rows, cols) = (self.spec.n_rows(), self.spec.n_cols());
        let (pr, pc) = (self.pad_rows, self.pad_cols);
        // Pack kernel (real part) and input (imaginary part) into one signal.
        let mut buf = vec![Complex::new(0.0, 0.0); pr * pc];
        for r in 0..pr {
            let dr = if r < rows {
                r
            } else if r > pr - rows {
                pr - r
            } else {
                continue;
            };
            for c in 0..pc {
                let dc = if c < cols {
                    c
                } else if c > pc - cols {
                    pc - c
                } else {
                    continue;
                };
                buf[r * pc + c].re = table[dr * cols + dc];
            }
        }
        for r in 0..rows {
            for c in 0..cols {
                buf[r * pc + c].im = input[r * cols + c];
            }
        }

        // Forward: rows, transpose, rows. Spectrum is held transposed (pc x pr).
        self.row_fft.process(&mut buf);
        let mut spec_t = transpose(&buf, pr, pc);
        self.col_fft.process(&mut spec_t);

        // Unpack the two real spectra and multiply.
        let mut prod = vec![Complex::new(0.0, 0.0); pr * pc];
        for u in 0..pc {
            let nu = (pc - u) % pc;
            for v in 0..pr {
                let nv = (pr - v) % pr;
                let z = spec_t[u * pr + v];
                let zc = spec_t[nu * pr + nv].conj();
                let k = (z + zc) * 0.5;
                let x = (z - zc) * Complex::new(0.0, -0.5);
                prod[u * pr + v] = k * x;
            }
        }

        self.col_ifft.process(&mut prod);
        let mut back = transpose(&prod, pc, pr);
        self.row_ifft.process(&mut back);

        let scale = 1.0 / (pr * pc) as f64;
        let mut out: Vec<f64> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| back[r * pc + c].re * scale)
            .collect();
        let peak = out.iter().cloned().fold(0.0, f64::max);
        let floor = peak * FFT_NOISE_FLOOR;
        for v in out.iter_mut() {
            if *v < floor {
                *v = 0.0;
            }
        }
        out
    }
}

fn transpose(data: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut out = vec![Complex::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(spec: &GridSpec, input: &[f64], kernel: impl Fn(f64) -> f64) -> Vec<f64> {
        let centers: Vec<_> = spec.centers().collect();
        centers
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .zip(input)
                    .map(|(q, w)| w * kernel(p.distance_to(*q)))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn both_routes_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(w, h, res) in &[(10.0, 10.0, 1.0), (14.0, 9.0, 1.0), (40.0, 40.0, 2.0)] {
            let spec = GridSpec::new(w, h, res).unwrap();
            let conv = DistanceConvolver::new(spec);
            let input: Vec<f64> = (0..spec.n_cells())
                .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random() })
                .collect();
            let kernel = |d: f64| (-(d - 6.0).powi(2) / 8.0).exp();
            let oracle = brute(&spec, &input, kernel);
            for method in [ConvolutionMethod::Direct, ConvolutionMethod::Fft] {
                let got = conv.convolve(&input, kernel, method);
                let peak = oracle.iter().cloned().fold(0.0, f64::max);
                for (g, o) in got.iter().zip(&oracle) {
                    assert!((g - o).abs() <= 1e-12 * peak.max(1.0), "{method:?}: {g} vs {o}");
                }
            }
        }
    }

    #[test]
    fn auto_prefers_direct_for_sparse_input() {
        let spec = GridSpec::new(100.0, 100.0, 2.0).unwrap();
        let conv = DistanceConvolver::new(spec);
        let mut sparse = vec![0.0; spec.n_cells()];
        sparse[7] = 1.0;
        assert_eq!(conv.choose(&sparse), ConvolutionMethod::Direct);
        assert_eq!(conv.choose(&vec![1.0; spec.n_cells()]), ConvolutionMethod::Fft);
    }
}
