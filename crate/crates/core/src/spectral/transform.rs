//! Sine and cosine transforms on coefficient/sample arrays.
//!
//! All kernels act on `Array2<Complex64>`; real data is carried with zero
//! imaginary part. Every transform is a real matrix, so real inputs produce real
//! outputs up to round-off.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{s, Array2, ArrayViewMut1, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid2D;

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    planner
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .plan_fft_forward(len)
}

/// Apply `kernel` to every 1-D lane of `arr` along `axis`.
fn for_each_lane<F>(arr: &mut Array2<Complex64>, axis: Axis, mut kernel: F)
where
    F: FnMut(&mut ArrayViewMut1<'_, Complex64>),
{
    for mut lane in arr.lanes_mut(axis) {
        kernel(&mut lane);
    }
}

/// In-place unnormalized DST-I along `axis`:
/// `y_k = Σ_{j=1}^{n} x_j sin(π j k / (n + 1))`.
pub(crate) fn dst1_axis(arr: &mut Array2<Complex64>, axis: Axis) {
    let n = arr.len_of(axis);
    let len = 2 * (n + 1);
    let fft = plan(len);
    let mut buf = vec![Complex64::default(); len];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let half_i = Complex64::new(0.0, 0.5);
    for_each_lane(arr, axis, |lane| {
        buf[0] = Complex64::default();
        buf[n + 1] = Complex64::default();
        for (j, &x) in lane.iter().enumerate() {
            buf[j + 1] = x;
            buf[len - 1 - j] = -x;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (k, y) in lane.iter_mut().enumerate() {
            *y = buf[k + 1] * half_i;
        }
    });
}

/// Zero-pad along `axis` to `m` entries (the leading entries are kept).
fn pad_axis(arr: &Array2<Complex64>, axis: Axis, m: usize) -> Array2<Complex64> {
    let (r, c) = arr.dim();
    let shape = if axis == Axis(0) { (m, c) } else { (r, m) };
    let mut out = Array2::zeros(shape);
    out.slice_mut(s![..r, ..c]).assign(arr);
    out
}

/// Evaluate the sine series with coefficients `coeffs` (orthonormal basis of
/// `grid`) at the `mx × my` interior nodes `x_j = j lx / (mx + 1)`.
/// Requires `mx ≥ nx`, `my ≥ ny`.
pub(crate) fn synthesize_padded(
    coeffs: &Array2<Complex64>,
    grid: &Grid2D,
    mx: usize,
    my: usize,
) -> Array2<Complex64> {
    debug_assert!(mx >= grid.nx() && my >= grid.ny());
    let mut a = pad_axis(coeffs, Axis(0), mx);
    dst1_axis(&mut a, Axis(0));
    let mut b = pad_axis(&a, Axis(1), my);
    dst1_axis(&mut b, Axis(1));
    let scale = (2.0 / grid.lx()).sqrt() * (2.0 / grid.ly()).sqrt();
    b.mapv_inplace(|z| z * scale);
    b
}

/// Coefficients of the band-limited interpolant of `samples` taken at the
/// `mx × my` interior nodes, truncated to the grid's `nx × ny` modes.
pub(crate) fn analyze_padded(samples: &Array2<Complex64>, grid: &Grid2D) -> Array2<Complex64> {
    let (mx, my) = samples.dim();
    debug_assert!(mx >= grid.nx() && my >= grid.ny());
    let mut a = samples.clone();
    dst1_axis(&mut a, Axis(0));
    let mut b = a.slice(s![..grid.nx(), ..]).to_owned();
    dst1_axis(&mut b, Axis(1));
    let mut c = b.slice(s![.., ..grid.ny()]).to_owned();
    let scale = (2.0 * grid.lx()).sqrt() / (mx + 1) as f64 * (2.0 * grid.ly()).sqrt()
        / (my + 1) as f64;
    c.mapv_inplace(|z| z * scale);
    c
}

/// Cosine-to-sine projection table for one axis:
/// `T[p][m] = w_m ∫_0^π cos(mθ) sin(pθ) dθ`, `p = 1..=n`, `m = 0..=k`,
/// with the DCT-I end weights `w_0 = w_k = 1/2`.
fn cosine_to_sine_table(n: usize, k: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * (k + 1)];
    for p in 1..=n {
        for m in 0..=k {
            if (p + m) % 2 == 1 {
                let w = if m == 0 || m == k { 0.5 } else { 1.0 };
                let (pf, mf) = (p as f64, m as f64);
                t[(p - 1) * (k + 1) + m] = w * 2.0 * pf / (pf * pf - mf * mf);
            }
        }
    }
    t
}

/// Along `axis`, replace lanes of interior samples `g_1..g_{k-1}` of a cosine
/// polynomial of degree ≤ `k` (which vanishes at both ends) by its exact
/// projection onto the first `n` sine modes of `(0, π)`.
fn cosine_project_axis(arr: &Array2<Complex64>, axis: Axis, n: usize) -> Array2<Complex64> {
    let m_int = arr.len_of(axis);
    let k = m_int + 1;
    let len = 2 * k;
    let fft = plan(len);
    let table = cosine_to_sine_table(n, k);
    let mut buf = vec![Complex64::default(); len];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let (r, c) = arr.dim();
    let shape = if axis == Axis(0) { (n, c) } else { (r, n) };
    let mut out = Array2::<Complex64>::zeros(shape);
    let inv_k = 1.0 / k as f64;
    for (lane_in, mut lane_out) in arr.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
        buf[0] = Complex64::default();
        buf[k] = Complex64::default();
        for (j, &g) in lane_in.iter().enumerate() {
            buf[j + 1] = g;
            buf[len - 1 - j] = g;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (p, y) in lane_out.iter_mut().enumerate() {
            let row = &table[p * (k + 1)..(p + 1) * (k + 1)];
            let mut acc = Complex64::default();
            // only (p + m) odd entries are nonzero
            let start = (p + 2) % 2;
            for m in (start..=k).step_by(2) {
                acc += buf[m] * row[m];
            }
            *y = acc * inv_k;
        }
    }
    out
}

/// Exact L² projection onto the grid's sine modes of a function that is, along
/// each axis, a cosine polynomial of degree ≤ `mx + 1` (resp. `my + 1`)
/// vanishing on the boundary, given by its values at the `mx × my` interior
/// nodes. Products of two sine series of the grid are of this form once
/// `mx + 1 ≥ 2 nx`.
pub(crate) fn project_cosine_samples(
    samples: &Array2<Complex64>,
    grid: &Grid2D,
) -> Array2<Complex64> {
    let a = cosine_project_axis(samples, Axis(0), grid.nx());
    let mut b = cosine_project_axis(&a, Axis(1), grid.ny());
    let scale = (2.0 * grid.lx()).sqrt() / PI * (2.0 * grid.ly()).sqrt() / PI;
    b.mapv_inplace(|z| z * scale);
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dst(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (1..=n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| v * (PI * ((j + 1) * k) as f64 / (n + 1) as f64).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn dst_matches_direct_sum() {
        let x = [0.3, -1.2, 2.5, 0.7, 0.1];
        let expect = naive_dst(&x);
        let mut arr = Array2::from_shape_fn((5, 2), |(j, c)| Complex64::new(x[j], c as f64 * x[j]));
        dst1_axis(&mut arr, Axis(0));
        for k in 0..5 {
            assert!((arr[[k, 0]].re - expect[k]).abs() < 1e-12);
            assert!(arr[[k, 0]].im.abs() < 1e-12);
            assert!((arr[[k, 1]].im - expect[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_table_projects_constant() {
        // ∫_0^π sin(pθ) dθ = 2/p for odd p; the m = 0 entry carries weight 1/2
        let t = cosine_to_sine_table(3, 6);
        assert!((t[0] - 1.0).abs() < 1e-15);
        assert_eq!(t[7], 0.0);
        assert!((t[2 * 7] - 1.0 / 3.0).abs() < 1e-15);
    }
}
