//! Scoring functions and their analytic gradients.
//!
//! All functions operate on raw storage slices: length k for TransE,
//! DistMult, and HolE; length 2k with interleaved (real, imaginary) pairs
//! for ComplEx.

use super::Scorer;

/// Circular correlation: corr(a, b)[i] = Σ_j a[j] · b[(j + i) mod k].
pub fn circular_correlation(a: &[f64], b: &[f64]) -> Vec<f64> {
    let k = a.len();
    let mut out = vec![0.0; k];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..k {
            acc += a[j] * b[(j + i) % k];
        }
        *o = acc;
    }
    out
}

/// Circular convolution: conv(a, b)[i] = Σ_j a[j] · b[(i - j) mod k].
fn circular_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    let k = a.len();
    let mut out = vec![0.0; k];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..k {
            acc += a[j] * b[(k + i - j) % k];
        }
        *o = acc;
    }
    out
}

pub(crate) fn score_slices(scorer: Scorer, k: usize, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    match scorer {
        Scorer::TransE => -(0..k).map(|i| (h[i] + r[i] - t[i]).abs()).sum::<f64>(),
        Scorer::DistMult => (0..k).map(|i| h[i] * r[i] * t[i]).sum(),
        Scorer::HolE => {
            let corr = circular_correlation(h, t);
            (0..k).map(|i| r[i] * corr[i]).sum()
        }
        Scorer::ComplEx => {
            let mut acc = 0.0;
            for i in 0..k {
                let (hr, hi) = (h[2 * i], h[2 * i + 1]);
                let (rr, ri) = (r[2 * i], r[2 * i + 1]);
                let (tr, ti) = (t[2 * i], t[2 * i + 1]);
                // Re(h · r · conj(t))
                acc += hr * rr * tr + hi * ri * tr + hr * ri * ti - hi * rr * ti;
            }
            acc
        }
    }
}

/// Fill `gh`, `gr`, `gt` with ∂score/∂h, ∂score/∂r, ∂score/∂t.
pub(crate) fn grad_slices(
    scorer: Scorer,
    k: usize,
    h: &[f64],
    r: &[f64],
    t: &[f64],
    gh: &mut [f64],
    gr: &mut [f64],
    gt: &mut [f64],
) {
    match scorer {
        Scorer::TransE => {
            for i in 0..k {
                let s = (h[i] + r[i] - t[i]).signum();
                gh[i] = -s;
                gr[i] = -s;
                gt[i] = s;
            }
        }
        Scorer::DistMult => {
            for i in 0..k {
                gh[i] = r[i] * t[i];
                gr[i] = h[i] * t[i];
                gt[i] = h[i] * r[i];
            }
        }
        Scorer::HolE => {
            // score = Σ_i r_i · corr(h, t)_i
            gr.copy_from_slice(&circular_correlation(h, t));
            gh.copy_from_slice(&circular_correlation(r, t));
            gt.copy_from_slice(&circular_convolution(r, h));
        }
        Scorer::ComplEx => {
            for i in 0..k {
                let (hr, hi) = (h[2 * i], h[2 * i + 1]);
                let (rr, ri) = (r[2 * i], r[2 * i + 1]);
                let (tr, ti) = (t[2 * i], t[2 * i + 1]);
                gh[2 * i] = rr * tr + ri * ti;
                gh[2 * i + 1] = ri * tr - rr * ti;
                gr[2 * i] = hr * tr - hi * ti;
                gr[2 * i + 1] = hi * tr + hr * ti;
                gt[2 * i] = hr * rr + hi * ri;
                gt[2 * i + 1] = hr * ri - hi * rr;
            }
        }
    }
}
