//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's numerical code.

#![allow(dead_code)]

use appdemog::SparseBinaryMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random binary matrix with entry density `density`.
pub fn random_binary(rows: usize, cols: usize, density: f64, seed: u64) -> SparseBinaryMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random_bool(density) {
                pairs.push((i, j));
            }
        }
    }
    SparseBinaryMatrix::from_triplets(&pairs, rows, cols).unwrap()
}

/// Singular values (descending) of the dense 0/1 copy of `x`, by one-sided
/// Jacobi rotations on the columns.
pub fn jacobi_singular_values(x: &SparseBinaryMatrix) -> Vec<f64> {
    let dense = x.to_dense();
    let (m, n) = (dense.len(), dense.first().map_or(0, |r| r.len()));
    // Work on the orientation with fewer columns.
    let mut cols: Vec<Vec<f64>> = if n <= m {
        (0..n).map(|j| (0..m).map(|i| dense[i][j]).collect()).collect()
    } else {
        dense.clone()
    };
    let k = cols.len();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..k {
            for q in p + 1..k {
                let alpha: f64 = cols[p].iter().map(|v| v * v).sum();
                let beta: f64 = cols[q].iter().map(|v| v * v).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..cols[p].len() {
                    let a = cols[p][i];
                    let b = cols[q][i];
                    cols[p][i] = c * a - s * b;
                    cols[q][i] = s * a + c * b;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Optimal rank-k Frobenius error from the full spectrum.
pub fn optimal_rank_k_error(sv: &[f64], k: usize) -> f64 {
    sv[k.min(sv.len())..].iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// P(score⁺ > score⁻) + ½ P(score⁺ = score⁻) over all pairs.
pub fn mann_whitney_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// Welch statistic, Welch–Satterthwaite df, and the one-sided upper-tail p
/// computed by tanh-sinh quadrature of the Student t density.
pub fn welch_reference(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma) / a.len() as f64, var(b, mb) / b.len() as f64);
    let t = (ma - mb) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    (t, df, t_upper_tail(t, df))
}

/// `P(T > t)` for Student's t with `df` degrees of freedom.
///
/// With `x = √ν·tan θ` and `φ = π/2 − |θ|` the density becomes
/// `sin^{ν−1} φ`, so the upper tail beyond `|t|` is
/// `∫_0^{φ_t} sin^{ν−1}φ dφ / (2∫_0^{π/2} sin^{ν−1}φ dφ)`, with the only
/// singularity at the exactly representable endpoint 0.
pub fn t_upper_tail(t: f64, df: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f = |phi: f64| phi.sin().powf(df - 1.0);
    let phi_t = half_pi - (t.abs() / df.sqrt()).atan();
    let tail = tanh_sinh(&f, 0.0, phi_t) / (2.0 * tanh_sinh(&f, 0.0, half_pi));
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Double-exponential quadrature on `[a, b]`. Nodes near either endpoint
/// are formed as `endpoint ± distance`, so singularities at an endpoint
/// are resolved to full precision.
pub fn tanh_sinh(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let n = (4.5 / h) as i64;
    let mut sum = 0.0;
    for k in -n..=n {
        let t = k as f64 * h;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        // Distance from the nearer endpoint: half·(1 − tanh|u|).
        let dist = 2.0 * half / (1.0 + (2.0 * u.abs()).exp());
        if dist <= 0.0 || w == 0.0 {
            continue;
        }
        let x = if u < 0.0 { a + dist } else { b - dist };
        let fx = f(x);
        if fx.is_finite() {
            sum += w * fx;
        }
    }
    sum * h * half
}

/// Penalized logistic loss of a dense design, written out directly.
pub fn logistic_objective(rows: &[Vec<f64>], y: &[u8], w: &[f64], b: f64, lambda: f64) -> f64 {
    let mut loss = 0.0;
    for (r, &yi) in rows.iter().zip(y) {
        let m: f64 = r.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() + b;
        // log(1 + e^m) − y·m, evaluated without overflow.
        loss += m.max(0.0) + (-m.abs()).exp().ln_1p() - yi as f64 * m;
    }
    loss + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>()
}

/// Minimizer of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Random scored instances of size at most 200, with both classes present
/// and plenty of tied scores.
pub fn auc_instances(n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<u8>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|c| {
            let len = rng.random_range(2..=200);
            let mut labels: Vec<u8> = (0..len).map(|_| rng.random_bool(0.5) as u8).collect();
            labels[0] = 1;
            labels[1] = 0;
            let levels = if c % 2 == 0 { 5 } else { 1_000_000 };
            let scores = (0..len)
                .map(|_| rng.random_range(0..levels) as f64 / levels as f64)
                .collect();
            (scores, labels)
        })
        .collect()
}

/// Two-sample cases with nonzero pooled variance: binary flags and
/// continuous samples of unequal sizes and spreads.
pub fn welch_cases(n: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let (na, nb) = (rng.random_range(2..=300), rng.random_range(2..=300));
        let (a, b): (Vec<f64>, Vec<f64>) = if out.len() % 2 == 0 {
            let (pa, pb) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
            (
                (0..na).map(|_| rng.random_bool(pa) as u8 as f64).collect(),
                (0..nb).map(|_| rng.random_bool(pb) as u8 as f64).collect(),
            )
        } else {
            let (sa, sb) = (rng.random_range(0.1..5.0), rng.random_range(0.1..5.0));
            let shift = rng.random_range(-2.0..2.0);
            (
                (0..na).map(|_| sa * (rng.random::<f64>() - 0.5) + shift).collect(),
                (0..nb).map(|_| sb * (rng.random::<f64>() - 0.5)).collect(),
            )
        };
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
        };
        if var(&a) > 0.0 && var(&b) > 0.0 {
            out.push((a, b));
        }
    }
    out
}
