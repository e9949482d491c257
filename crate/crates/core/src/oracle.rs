//! Independent checks: Monte-Carlo mass and barycenter by exact Gaussian
//! sampling, and a rasterized planar perimeter. Only set membership and the
//! matrix factors are used here.

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::sets::SetRegion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Samples per independently seeded batch.
pub const BATCH: usize = 1 << 16;
pub const MIN_RESOLUTION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

// Box–Muller on (0, 1] × [0, 1).
fn normal_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// Per-batch sums of f(x) and f(x)² over x ~ γ_A, in batch order.
fn sample<const K: usize>(a: &SpdMatrix, n: usize, seed: u64, f: &(dyn Fn(&[f64]) -> [f64; K] + Sync)) -> [(f64, f64); K] {
    let dim = a.dim();
    let batches = n.div_ceil(BATCH);
    let parts: Vec<[(f64, f64); K]> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BATCH.min(n - b * BATCH);
            let mut acc = [(0.0, 0.0); K];
            let mut g = vec![0.0; dim + 1];
            for _ in 0..count {
                for pair in g.chunks_mut(2) {
                    let (x, y) = normal_pair(&mut rng);
                    pair[0] = x;
                    if pair.len() > 1 {
                        pair[1] = y;
                    }
                }
                let x = a.inv_sqrt().mul_vec(&g[..dim]);
                let v = f(&x);
                for k in 0..K {
                    acc[k].0 += v[k];
                    acc[k].1 += v[k] * v[k];
                }
            }
            acc
        })
        .collect();
    let mut out = [(0.0, 0.0); K];
    for p in &parts {
        for k in 0..K {
            out[k].0 += p[k].0;
            out[k].1 += p[k].1;
        }
    }
    out
}

fn estimate(sum: f64, sumsq: f64, n: usize, seed: u64) -> McEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    McEstimate { value: mean, std_error: (var / nf).sqrt(), n_samples: n, seed }
}

fn check(a: &SpdMatrix, e: &SetRegion, n: usize) -> Result<()> {
    a.check_dim(e.dim())?;
    if n == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    Ok(())
}

pub fn mc_mass(a: &SpdMatrix, e: &SetRegion, n: usize, seed: u64) -> Result<McEstimate> {
    check(a, e, n)?;
    let [(s, ss)] = sample::<1>(a, n, seed, &|x| [if e.contains(x) { 1.0 } else { 0.0 }]);
    Ok(estimate(s, ss, n, seed))
}

pub fn mc_barycenter(a: &SpdMatrix, e: &SetRegion, n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    check(a, e, n)?;
    let dim = a.dim();
    if dim > 4 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let f = |x: &[f64]| -> [f64; 4] {
        let mut out = [0.0; 4];
        if e.contains(x) {
            out[..dim].copy_from_slice(x);
        }
        out
    };
    let sums = sample::<4>(a, n, seed, &f);
    Ok(sums[..dim].iter().map(|&(s, ss)| estimate(s, ss, n, seed)).collect())
}

/// Marching-squares perimeter over [−R, R]² with R the tail radius for
/// `tail_tol`; edge crossings located by bisection on membership.
pub fn grid_perimeter_2d(a: &SpdMatrix, e: &SetRegion, resolution: usize, tail_tol: f64) -> Result<f64> {
    a.check_dim(e.dim())?;
    if a.dim() != 2 {
        return Err(Error::UnsupportedDimension(a.dim()));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooLow(resolution));
    }
    let r = a.tail_radius(tail_tol);
    let h = 2.0 * r / resolution as f64;
    let nn = resolution + 1;
    let at = |i: usize, j: usize| [-r + i as f64 * h, -r + j as f64 * h];
    let inside: Vec<bool> = (0..nn * nn).into_par_iter().map(|k| e.contains(&at(k / nn, k % nn))).collect();
    let crossing = |p: [f64; 2], q: [f64; 2], p_in: bool| -> [f64; 2] {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..30 {
            let m = 0.5 * (lo + hi);
            let x = [p[0] + m * (q[0] - p[0]), p[1] + m * (q[1] - p[1])];
            if e.contains(&x) == p_in {
                lo = m;
            } else {
                hi = m;
            }
        }
        let m = 0.5 * (lo + hi);
        [p[0] + m * (q[0] - p[0]), p[1] + m * (q[1] - p[1])]
    };
    let seg = |p: [f64; 2], q: [f64; 2]| -> f64 {
        let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        (p[0] - q[0]).hypot(p[1] - q[1]) * (-0.5 * a.quad(&mid)).exp()
    };
    let rows: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..resolution {
                // corners counterclockwise from the lower left
                let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let s: Vec<bool> = c.iter().map(|&(x, y)| inside[x * nn + y]).collect();
                if s.iter().all(|&b| b == s[0]) {
                    continue;
                }
                let pts: Vec<[f64; 2]> = c.iter().map(|&(x, y)| at(x, y)).collect();
                let mut cut: [Option<[f64; 2]>; 4] = [None; 4];
                for k in 0..4 {
                    let l = (k + 1) % 4;
                    if s[k] != s[l] {
                        cut[k] = Some(crossing(pts[k], pts[l], s[k]));
                    }
                }
                let edges: Vec<usize> = (0..4).filter(|&k| cut[k].is_some()).collect();
                if edges.len() == 2 {
                    acc += seg(cut[edges[0]].unwrap(), cut[edges[1]].unwrap());
                } else {
                    let centre = [pts[0][0] + 0.5 * h, pts[0][1] + 0.5 * h];
                    let pairs = if e.contains(&centre) == s[0] { [(0, 1), (2, 3)] } else { [(3, 0), (1, 2)] };
                    for (p, q) in pairs {
                        acc += seg(cut[p].unwrap(), cut[q].unwrap());
                    }
                }
            }
            acc
        })
        .collect();
    Ok(a.det().sqrt() / (2.0 * PI).sqrt() * rows.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussline::std_normal_cdf;
    use crate::linalg::Direction;
    use crate::sets::{BoxSet, HalfSpaceSet, PolytopeSet};

    #[test]
    fn whole_space_is_exact() {
        let e = SetRegion::Polytope(PolytopeSet::everything(2).unwrap());
        let m = mc_mass(&SpdMatrix::identity(2), &e, 1000, 7).unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(m.std_error, 0.0);
    }

    #[test]
    fn seed_determinism() {
        let a = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = SetRegion::Box(BoxSet::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap());
        let x = mc_mass(&a, &e, 200_000, 42).unwrap();
        let y = mc_mass(&a, &e, 200_000, 42).unwrap();
        assert_eq!(x, y);
        assert_ne!(x.value, mc_mass(&a, &e, 200_000, 43).unwrap().value);
    }

    #[test]
    fn halfspace_mass_and_barycenter() {
        let a = SpdMatrix::identity(2);
        let e = SetRegion::HalfSpace(HalfSpaceSet::new(Direction::axis(2, 0), 0.0));
        let m = mc_mass(&a, &e, 1_000_000, 1).unwrap();
        assert!((m.value - 0.5).abs() < 4.0 * m.std_error);
        let b = mc_barycenter(&a, &e, 1_000_000, 2).unwrap();
        assert!((b[0].value + 1.0 / (2.0 * PI).sqrt()).abs() < 4.0 * b[0].std_error);
        assert!(b[1].value.abs() < 4.0 * b[1].std_error);
        let d = SpdMatrix::new(&crate::linalg::Matrix::diag(&[4.0, 1.0])).unwrap();
        let h = SetRegion::HalfSpace(HalfSpaceSet::new(Direction::axis(2, 0), 1.0));
        let m = mc_mass(&d, &h, 1_000_000, 3).unwrap();
        assert!((m.value - std_normal_cdf(2.0)).abs() < 4.0 * m.std_error);
    }

    #[test]
    fn raster_halfspace() {
        let e = SetRegion::HalfSpace(HalfSpaceSet::new(Direction::axis(2, 0), 0.0));
        let p = grid_perimeter_2d(&SpdMatrix::identity(2), &e, 1024, 1e-12).unwrap();
        assert!((p - 1.0).abs() < 0.02);
        assert!(matches!(grid_perimeter_2d(&SpdMatrix::identity(2), &e, 32, 1e-12), Err(Error::ResolutionTooLow(32))));
    }
}
