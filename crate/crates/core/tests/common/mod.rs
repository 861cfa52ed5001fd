//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's numerical code:
//! each oracle recomputes its quantity the slow, obvious way.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use xfer_score::{FeatureMatrix, PredictionMatrix, TargetLabels};

/// A random scoring instance as plain vectors plus validated wrappers.
pub struct Instance {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub c: usize,
    pub pred: PredictionMatrix,
    pub targets: TargetLabels,
}

/// Random instance with n ≤ max_n, 2 ≤ m ≤ max_m, 2 ≤ c ≤ max_c, every class
/// present. Rows mix dense, peaked and sparse (exact zeros) shapes so that
/// unsupported source labels occur.
pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize, max_c: usize) -> Instance {
    let c = rng.random_range(2..=max_c);
    let m = rng.random_range(2..=max_m);
    let n = rng.random_range(c.max(2)..=max_n.max(c));
    let mut labels: Vec<usize> = (0..n).map(|i| if i < c { i } else { rng.random_range(0..c) }).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let concentration = [0.1, 1.0, 10.0][rng.random_range(0..3)];
    let gamma = Gamma::new(concentration, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| loop {
            let mut row: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
            if rng.random_bool(0.3) {
                let k = rng.random_range(0..m);
                row[k] = 0.0;
            }
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                break row.iter().map(|v| v / total).collect();
            }
        })
        .collect();
    let pred = PredictionMatrix::from_rows(&rows).unwrap();
    let rows = pred.rows().map(|r| r.to_vec()).collect();
    let targets = TargetLabels::from_indices(&labels, Some(c)).unwrap();
    Instance { rows, labels, c, pred, targets }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_features(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    let values = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    FeatureMatrix::new(n, d, values).unwrap()
}

/// Joint distribution, one plain loop per term.
pub fn naive_joint(rows: &[Vec<f64>], labels: &[usize], c: usize) -> Vec<Vec<f64>> {
    let n = rows.len();
    let m = rows[0].len();
    let mut joint = vec![vec![0.0; m]; c];
    for y in 0..c {
        for z in 0..m {
            let mut s = 0.0;
            for i in 0..n {
                if labels[i] == y {
                    s += rows[i][z];
                }
            }
            joint[y][z] = s / n as f64;
        }
    }
    joint
}

pub fn naive_conditional(joint: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let c = joint.len();
    let m = joint[0].len();
    let mut cond = vec![vec![0.0; m]; c];
    for z in 0..m {
        let mut pz = 0.0;
        for row in joint {
            pz += row[z];
        }
        if pz > 0.0 {
            for y in 0..c {
                cond[y][z] = joint[y][z] / pz;
            }
        }
    }
    cond
}

/// LEEP by the textbook triple loop.
pub fn naive_leep(rows: &[Vec<f64>], labels: &[usize], c: usize) -> f64 {
    let cond = naive_conditional(&naive_joint(rows, labels, c));
    let n = rows.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut s = 0.0;
        for z in 0..rows[i].len() {
            s += cond[labels[i]][z] * rows[i][z];
        }
        total += s.ln();
    }
    total / n as f64
}

pub fn naive_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for z in 1..row.len() {
        if row[z] > row[best] {
            best = z;
        }
    }
    best
}

/// NCE by counting pairs for every example separately.
pub fn naive_nce(ys: &[usize], zs: &[usize]) -> f64 {
    let n = ys.len();
    let mut total = 0.0;
    for i in 0..n {
        let both = (0..n).filter(|&j| ys[j] == ys[i] && zs[j] == zs[i]).count();
        let given = (0..n).filter(|&j| zs[j] == zs[i]).count();
        total += (both as f64 / given as f64).ln();
    }
    total / n as f64
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors as columns).
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; d]; d];
    for (k, row) in v.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|p| (0..d).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        let scale: f64 = (0..d).map(|p| a[p][p] * a[p][p]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = cs * vkp - sn * vkq;
                    row[q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    ((0..d).map(|k| a[k][k]).collect(), v)
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    (0..r).map(|i| (0..c).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

/// H-score with an explicit pseudo-inverse matrix and a full matrix product.
pub fn dense_h_score(features: &[Vec<f64>], labels: &[usize], c: usize, rcond: f64) -> f64 {
    let n = features.len();
    let d = features[0].len();
    let mean: Vec<f64> = (0..d).map(|k| features.iter().map(|r| r[k]).sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> = features.iter().map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect()).collect();
    let mut cov_f = vec![vec![0.0; d]; d];
    for r in &centered {
        for a in 0..d {
            for b in 0..d {
                cov_f[a][b] += r[a] * r[b] / n as f64;
            }
        }
    }
    let mut cov_g = vec![vec![0.0; d]; d];
    for y in 0..c {
        let members: Vec<&Vec<f64>> = centered.iter().zip(labels).filter(|(_, &l)| l == y).map(|(r, _)| r).collect();
        let g: Vec<f64> = (0..d).map(|k| members.iter().map(|r| r[k]).sum::<f64>() / members.len() as f64).collect();
        let w = members.len() as f64 / n as f64;
        for a in 0..d {
            for b in 0..d {
                cov_g[a][b] += w * g[a] * g[b];
            }
        }
    }
    let (vals, vecs) = jacobi_eigen(&cov_f);
    let lmax = vals.iter().copied().fold(0.0, f64::max);
    let mut pinv = vec![vec![0.0; d]; d];
    for (k, &lambda) in vals.iter().enumerate() {
        if lmax > 0.0 && lambda > rcond * lmax {
            for a in 0..d {
                for b in 0..d {
                    pinv[a][b] += vecs[a][k] * vecs[b][k] / lambda;
                }
            }
        }
    }
    let prod = matmul(&pinv, &cov_g);
    (0..d).map(|k| prod[k][k]).sum()
}

/// Average log-likelihood of softmax(W x + b) on (features, labels); W is c×d.
pub fn softmax_loglik(w: &[Vec<f64>], b: &[f64], features: &[Vec<f64>], labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let logits: Vec<f64> =
            w.iter().zip(b).map(|(row, bias)| bias + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        total += logits[y] - lse;
    }
    total / features.len() as f64
}

/// Maximizes the (optionally L2-penalized) average log-likelihood of a
/// linear-softmax head by full-batch gradient ascent with backtracking.
/// Returns the unpenalized average log-likelihood at the optimum.
pub fn full_batch_head_optimum(features: &[Vec<f64>], labels: &[usize], c: usize, l2: f64) -> f64 {
    let d = features[0].len();
    let n = features.len() as f64;
    let mut w = vec![vec![0.0; d]; c];
    let mut b = vec![0.0; c];
    let objective = |w: &[Vec<f64>], b: &[f64]| {
        softmax_loglik(w, b, features, labels) - 0.5 * l2 * w.iter().flatten().map(|v| v * v).sum::<f64>()
    };
    let mut step = 1.0;
    for _ in 0..200_000 {
        let mut gw = vec![vec![0.0; d]; c];
        let mut gb = vec![0.0; c];
        for (x, &y) in features.iter().zip(labels) {
            let logits: Vec<f64> =
                w.iter().zip(&b).map(|(row, bias)| bias + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()).collect();
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            for k in 0..c {
                let resid = if k == y { 1.0 } else { 0.0 } - exps[k] / z;
                gb[k] += resid / n;
                for j in 0..d {
                    gw[k][j] += resid * x[j] / n;
                }
            }
        }
        for k in 0..c {
            for j in 0..d {
                gw[k][j] -= l2 * w[k][j];
            }
        }
        let norm2: f64 = gw.iter().flatten().chain(&gb).map(|g| g * g).sum();
        if norm2.sqrt() < 1e-9 {
            break;
        }
        let current = objective(&w, &b);
        step *= 2.0;
        loop {
            let w2: Vec<Vec<f64>> =
                w.iter().zip(&gw).map(|(r, g)| r.iter().zip(g).map(|(a, d)| a + step * d).collect()).collect();
            let b2: Vec<f64> = b.iter().zip(&gb).map(|(a, d)| a + step * d).collect();
            if objective(&w2, &b2) >= current + 0.5 * step * norm2 || step < 1e-12 {
                w = w2;
                b = b2;
                break;
            }
            step *= 0.5;
        }
    }
    softmax_loglik(&w, &b, features, labels)
}

/// Pearson r from the definition.
pub fn naive_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7.
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (k, g) in G.iter().enumerate().skip(1) {
        a += g / (x + k as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Two-sided Student-t tail probability by composite Simpson quadrature of
/// the density over [0, |t|].
pub fn t_tail_quadrature(t: f64, nu: f64) -> f64 {
    let norm = (ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0)).exp() / (nu * std::f64::consts::PI).sqrt();
    let f = |s: f64| norm * (1.0 + s * s / nu).powf(-(nu + 1.0) / 2.0);
    let steps = 20_000;
    let h = t.abs() / steps as f64;
    let mut acc = f(0.0) + f(t.abs());
    for k in 1..steps {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    1.0 - 2.0 * acc * h / 3.0
}

pub fn t_statistic(r: f64, n: usize) -> f64 {
    r * ((n as f64 - 2.0) / (1.0 - r * r)).sqrt()
}
