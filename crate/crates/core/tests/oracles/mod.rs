//! Independent reference implementations used to check the library.
//!
//! Each oracle takes a different route from the code under test: quadrature
//! instead of continued fractions, a full sort instead of partial selection,
//! active-set enumeration instead of SMO, QR iteration on the explicit
//! non-symmetric matrix instead of whitening.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

/// `Γ(m/2)` for positive integer `m`, by exact recurrences.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0);
    if m % 2 == 0 {
        (1..m / 2).map(f64::from).product()
    } else {
        let k = (m - 1) / 2;
        PI.sqrt() * (0..k).map(|i| f64::from(i) + 0.5).product::<f64>()
    }
}

/// Student t density with integer degrees of freedom.
pub fn t_density(x: f64, df: u32) -> f64 {
    let nu = f64::from(df);
    let norm = gamma_half(df + 1) / ((nu * PI).sqrt() * gamma_half(df));
    norm * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `P(T > t)` by integrating the density from 0 to `|t|`.
pub fn t_sf_by_quadrature(t: f64, df: u32) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let mass = integrate(&|x| t_density(x, df), 0.0, t.abs(), 1e-14);
    if t > 0.0 {
        0.5 - mass
    } else {
        0.5 + mass
    }
}

/// Exhaustive-scan KNN: full sort by (distance, index), then majority vote
/// with ties broken by smaller summed distance and then lower class id.
pub fn knn_oracle(rows: &[Vec<f64>], labels: &[usize], query: &[f64], k: usize, manhattan: bool) -> usize {
    let mut d: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let v = if manhattan {
                r.iter().zip(query).map(|(a, b)| (a - b).abs()).sum()
            } else {
                r.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            };
            (v, i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut tally: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &(dist, i) in &d[..k] {
        let e = tally.entry(labels[i]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += dist;
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for (&c, &(n, s)) in &tally {
        best = match best {
            None => Some((c, n, s)),
            Some((bc, bn, bs)) => {
                if n > bn || (n == bn && s < bs) {
                    Some((c, n, s))
                } else {
                    Some((bc, bn, bs))
                }
            }
        };
    }
    best.unwrap().0
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting; `None`
/// if a pivot falls below `1e-12` times the largest entry.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn dual_value(alpha: &[f64], y: &[f64], k: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Exact maximum of the SVM dual by enumerating which multipliers sit at 0,
/// at `c`, or strictly between. For each pattern the free block solves the
/// equality-constrained stationarity system; feasible solutions are scored
/// and the best kept. Exponential in n, so only for n ≤ 8 or so.
pub fn brute_force_dual(k: &[Vec<f64>], y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut r = code;
        for s in state.iter_mut() {
            *s = (r % 3) as u8;
            r /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if free.is_empty() {
            let bal: f64 = (0..n).map(|i| y[i] * alpha[i]).sum();
            if bal.abs() > 1e-12 {
                continue;
            }
        } else {
            // [Q_FF  y_F; y_Fᵀ 0]·[α_F; ν] = [1 − Q_FB·α_B; −y_Bᵀα_B]
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q(i, j);
                }
                a[r][m] = y[i];
                a[m][r] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|&j| state[j] == 1).map(|j| q(i, j) * c).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|&j| state[j] == 1).map(|j| y[j] * c).sum::<f64>();
            let Some(sol) = gauss_solve(a, rhs) else { continue };
            if free.iter().enumerate().any(|(r, _)| sol[r] < -1e-12 || sol[r] > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        let v = dual_value(&alpha, y, k);
        if v > best.0 {
            best = (v, alpha);
        }
    }
    best
}

fn qr_step(a: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    // modified Gram–Schmidt on the columns
    let n = a.len();
    let mut q = vec![vec![0.0; n]; n];
    let mut r = vec![vec![0.0; n]; n];
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a[i][j]).collect()).collect();
    for j in 0..n {
        let nrm = v[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        r[j][j] = nrm;
        let qj: Vec<f64> = if nrm > 0.0 { v[j].iter().map(|x| x / nrm).collect() } else { vec![0.0; n] };
        for i in 0..n {
            q[i][j] = qj[i];
        }
        for l in j + 1..n {
            let d: f64 = (0..n).map(|i| qj[i] * v[l][i]).sum();
            r[j][l] = d;
            for i in 0..n {
                v[l][i] -= d * qj[i];
            }
        }
    }
    (q, r)
}

/// Eigenvalues of a real matrix known to have a real spectrum, by shifted QR
/// iteration with deflation. Returned in descending order.
pub fn real_eigenvalues_qr(a: &[Vec<f64>]) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut out = Vec::new();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    while !m.is_empty() {
        let n = m.len();
        if n == 1 {
            out.push(m[0][0]);
            break;
        }
        let mut iter = 0;
        loop {
            let last_row_off = (0..n - 1).map(|j| m[n - 1][j].abs()).fold(0.0, f64::max);
            if last_row_off <= 1e-15 * scale {
                break;
            }
            iter += 1;
            assert!(iter < 100_000, "QR iteration did not converge");
            // Wilkinson shift from the trailing 2×2 block (real part if complex)
            let (p, qv, r2, s) = (m[n - 2][n - 2], m[n - 2][n - 1], m[n - 1][n - 2], m[n - 1][n - 1]);
            let tr = p + s;
            let det = p * s - qv * r2;
            let disc = tr * tr / 4.0 - det;
            let mu = if disc >= 0.0 {
                let l1 = tr / 2.0 + disc.sqrt();
                let l2 = tr / 2.0 - disc.sqrt();
                if (l1 - s).abs() < (l2 - s).abs() {
                    l1
                } else {
                    l2
                }
            } else {
                tr / 2.0
            };
            let mu = if iter % 11 == 0 { mu + 1e-3 * scale } else { mu };
            let shifted: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| m[i][j] - if i == j { mu } else { 0.0 }).collect())
                .collect();
            let (q, r) = qr_step(&shifted);
            m = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|l| r[i][l] * q[l][j]).sum::<f64>() + if i == j { mu } else { 0.0 })
                        .collect()
                })
                .collect();
        }
        out.push(m[n - 1][n - 1]);
        m.truncate(n - 1);
        for row in &mut m {
            row.truncate(n - 1);
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// `trace(Aᵏ)` for `k = 1..=kmax`.
pub fn power_traces(a: &[Vec<f64>], kmax: usize) -> Vec<f64> {
    let n = a.len();
    let mut p = a.to_vec();
    let mut out = Vec::with_capacity(kmax);
    for _ in 0..kmax {
        out.push((0..n).map(|i| p[i][i]).sum());
        p = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|l| p[i][l] * a[l][j]).sum()).collect())
            .collect();
    }
    out
}

/// Nearest-centroid classifier, for separability sanity checks.
pub fn nearest_centroid(train: &[Vec<f64>], labels: &[usize], n_classes: usize, query: &[f64]) -> usize {
    let d = query.len();
    let mut sums = vec![vec![0.0; d]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (r, &c) in train.iter().zip(labels) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(r) {
            *s += v;
        }
    }
    (0..n_classes)
        .filter(|&c| counts[c] > 0)
        .map(|c| {
            let dist: f64 = sums[c]
                .iter()
                .zip(query)
                .map(|(s, q)| (s / counts[c] as f64 - q).powi(2))
                .sum();
            (dist, c)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap()
        .1
}

/// Planted Gaussian blobs: class `c` is centred at `spacing·c` along every
/// axis, with unit noise. Returns rows and labels in class order.
pub fn blobs(seed: u64, n_per_class: usize, n_classes: usize, dim: usize, spacing: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut state = seed;
    let mut next = move || {
        // SplitMix64, then Box–Muller
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut gauss = move || {
        let u1 = next().max(1e-300);
        let u2 = next();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    };
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..n_classes {
        for _ in 0..n_per_class {
            rows.push((0..dim).map(|_| spacing * c as f64 + gauss()).collect());
            labels.push(c);
        }
    }
    (rows, labels)
}

/// Largest violation of the soft-margin KKT conditions, given every
/// training multiplier and `m_i = y_i·f(x_i)`:
/// `α = 0 ⇒ m ≥ 1`, `0 < α < C ⇒ m = 1`, `α = C ⇒ m ≤ 1`.
pub fn kkt_violation(alpha: &[f64], margins: &[f64], c: f64) -> f64 {
    alpha
        .iter()
        .zip(margins)
        .map(|(&a, &m)| {
            if a <= 0.0 {
                (1.0 - m).max(0.0)
            } else if a >= c {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}
