//! Dense adjacency spectra via cyclic Jacobi, and the expander mixing
//! lemma check for regular graphs.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const SPECTRAL_MAX_N: usize = 500;

/// (n,d,lambda) data for a regular graph.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectralInfo {
    pub n: usize,
    /// Regularity degree.
    pub d: usize,
    /// Largest absolute value among non-principal eigenvalues.
    pub lambda: f64,
    /// Eigensolver tolerance (off-diagonal Frobenius norm at exit).
    pub tol: f64,
}

fn regularity(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let d = g.degree(0);
    if (1..n).any(|v| g.degree(v) != d) {
        return Err(Error::NotRegular);
    }
    Ok(d)
}

/// All adjacency eigenvalues by cyclic Jacobi sweeps, unsorted.
/// Iterates until the off-diagonal Frobenius norm drops below `tol`.
pub fn jacobi_eigenvalues(g: &Graph, tol: f64) -> Result<Vec<f64>> {
    let n = g.n();
    if n > SPECTRAL_MAX_N {
        return Err(Error::CapExceeded {
            n,
            cap: SPECTRAL_MAX_N,
        });
    }
    let mut a = vec![0.0f64; n * n];
    for u in 0..n {
        for v in g.neighbors(u) {
            a[u * n + v] = 1.0;
        }
    }
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += a[p * n + q] * a[p * n + q];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > tol {
        sweeps += 1;
        assert!(sweeps <= 100, "Jacobi failed to converge in 100 sweeps");
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i * n + i]).collect())
}

/// lambda of a regular graph: the principal eigenvalue is the (one copy
/// of the) largest, which equals d; lambda is the max absolute value of
/// the rest. For disconnected regular graphs d itself recurs and is
/// correctly reported as lambda.
pub fn second_eigenvalue(g: &Graph, tol: f64) -> Result<SpectralInfo> {
    let d = regularity(g)?;
    let mut eig = jacobi_eigenvalues(g, tol)?;
    let principal = eig
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty spectrum");
    debug_assert!((eig[principal] - d as f64).abs() < tol.max(1e-6) * g.n() as f64 + 1e-6);
    eig.swap_remove(principal);
    let lambda = eig.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok(SpectralInfo {
        n: g.n(),
        d,
        lambda,
        tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub spectral: SpectralInfo,
    pub trials: usize,
    pub passes: usize,
    pub holds: bool,
    /// Largest observed |e(X,Y) - d|X||Y|/n| / bound ratio.
    pub max_ratio: f64,
}

/// Exact count of edges with one endpoint in `x` and the other in `y`
/// (sets assumed disjoint).
pub fn edges_between(g: &Graph, x: &VertexSet, y: &VertexSet) -> usize {
    x.iter().map(|u| y.count_row_hits(g.row(u))).sum()
}

/// Expander mixing lemma on seeded random disjoint pairs:
/// |e(X,Y) - (d/n)|X||Y|| <= lambda * sqrt(|X||Y|(1-|X|/n)(1-|Y|/n)).
pub fn mixing_check(g: &Graph, trials: usize, seed: u64) -> Result<MixingReport> {
    let info = second_eigenvalue(g, 1e-9)?;
    let n = g.n();
    if n < 2 {
        return Err(Error::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passes = 0;
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let xs = rng.gen_range(1..n);
        let ys = rng.gen_range(1..=(n - xs));
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let x = VertexSet::from_iter(n, perm[..xs].iter().copied());
        let y = VertexSet::from_iter(n, perm[xs..xs + ys].iter().copied());
        let e = edges_between(g, &x, &y) as f64;
        let nf = n as f64;
        let expected = info.d as f64 / nf * xs as f64 * ys as f64;
        let bound = info.lambda
            * (xs as f64 * ys as f64 * (1.0 - xs as f64 / nf) * (1.0 - ys as f64 / nf)).sqrt();
        let deviation = (e - expected).abs();
        // eigensolver tolerance folded in, plus float slack
        let slack = info.tol * (xs as f64 * ys as f64).sqrt() + 1e-9;
        if deviation <= bound + slack {
            passes += 1;
        }
        if bound > 0.0 {
            max_ratio = max_ratio.max(deviation / bound);
        }
    }
    Ok(MixingReport {
        spectral: info,
        trials,
        passes,
        holds: passes == trials,
        max_ratio,
    })
}
