//! Nested adaptive Gauss–Legendre over polytopes in an affine frame, with the
//! innermost direction integrated in closed form along lines.
//!
//! A frame is x = o + Σ z_i f_i + t f_axis with orthonormal f. The weight
//! e^{−⟨Ax,x⟩/2} restricts to e^{−(vᵀMv + 2cᵀv + q0)/2} in v = (z, t). Each
//! z-level is truncated to the conditional Gaussian range of that coordinate
//! and split at projections of polytope vertices, so every panel integrand is
//! smooth.

use crate::gaussline::{std_normal_quantile, IntervalUnion, LineGaussian};
use crate::linalg::{dot, Matrix, SpdMatrix};
use crate::polyhedra::{self, Halfspace, MAXD};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Legendre nodes and weights on [−1, 1].
pub(crate) struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub(crate) fn gauss_legendre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(n).or_insert_with(|| Arc::new(build_rule(n))).clone()
}

fn build_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Integrand values: scalar or small fixed vectors.
pub(crate) trait Value: Copy {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    fn size(&self) -> f64;
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn size(&self) -> f64 {
        self.abs()
    }
}

impl<const N: usize> Value for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn add(mut self, o: Self) -> Self {
        for i in 0..N {
            self[i] += o[i];
        }
        self
    }
    fn scale(mut self, s: f64) -> Self {
        for v in &mut self {
            *v *= s;
        }
        self
    }
    fn size(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Integral<V> {
    pub value: V,
    pub error: f64,
    pub converged: bool,
}

// One Gauss–Legendre pass on [a, b]; also integrates the inner error estimates.
fn panel<V: Value>(f: &mut dyn FnMut(f64) -> (V, f64), rule: &Rule, a: f64, b: f64) -> (V, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = V::zero();
    let mut err = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let (v, e) = f(mid + half * x);
        acc = acc.add(v.scale(w * half));
        err += e * w * half;
    }
    (acc, err)
}

/// Adaptive bisection on each interval between consecutive `breaks`.
/// A panel is accepted once its rule value agrees with the sum over its two
/// halves to the width-proportional share of `tol`.
pub(crate) fn adaptive<V: Value>(
    f: &mut dyn FnMut(f64) -> (V, f64),
    breaks: &[f64],
    tol: f64,
    rule_size: usize,
    max_panels: usize,
) -> Integral<V> {
    let rule = gauss_legendre(rule_size);
    let total = breaks.last().unwrap() - breaks[0];
    let mut value = V::zero();
    let mut error = 0.0;
    let mut converged = true;
    if !(total > 0.0) {
        return Integral { value, error, converged };
    }
    let mut panels = 0usize;
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let first = panel(f, &rule, w[0], w[1]);
        let mut stack = vec![(w[0], w[1], first)];
        while let Some((a, b, whole)) = stack.pop() {
            let m = 0.5 * (a + b);
            let left = panel(f, &rule, a, m);
            let right = panel(f, &rule, m, b);
            let sum = left.0.add(right.0);
            let diff = whole.0.add(sum.scale(-1.0)).size();
            let share = tol * (b - a) / total;
            panels += 1;
            let floor = 1e-14 * sum.size();
            if diff <= share.max(floor) || (b - a) <= 1e-13 * total || panels >= max_panels {
                if diff > share.max(floor) {
                    converged = false;
                }
                value = value.add(sum);
                error += diff + left.1 + right.1;
            } else {
                stack.push((m, b, right));
                stack.push((a, m, left));
            }
        }
    }
    Integral { value, error, converged }
}

/// Restricted quadratic form and truncation data for one frame.
pub(crate) struct Frame {
    pub k: usize,
    pub origin: Vec<f64>,
    /// k base directions followed by the line axis.
    pub dirs: Vec<Vec<f64>>,
    m: [[f64; MAXD]; MAXD],
    c: [f64; MAXD],
    q0: f64,
    mean: [f64; MAXD],
    cond_coef: [[f64; MAXD]; MAXD],
    cond_sd: [f64; MAXD],
    box_lo: [f64; MAXD],
    box_hi: [f64; MAXD],
    radius: f64,
    log_full: f64,
}

impl Frame {
    pub fn new(a: &SpdMatrix, origin: Vec<f64>, dirs: Vec<Vec<f64>>, tail_tol: f64) -> Self {
        let d = dirs.len();
        let k = d - 1;
        let mut m = [[0.0; MAXD]; MAXD];
        let mut c = [0.0; MAXD];
        let ao = a.apply(&origin);
        for i in 0..d {
            let af = a.apply(&dirs[i]);
            for j in 0..d {
                m[i][j] = dot(&af, &dirs[j]);
            }
            c[i] = dot(&ao, &dirs[i]);
        }
        let q0 = dot(&ao, &origin);
        let mm = Matrix::from_rows(&(0..d).map(|i| m[i][..d].to_vec()).collect::<Vec<_>>()).unwrap();
        let cov = mm.inverse().expect("restricted form is positive definite");
        let mut mean = [0.0; MAXD];
        for i in 0..d {
            mean[i] = -(0..d).map(|j| cov[(i, j)] * c[j]).sum::<f64>();
        }
        let mut cond_coef = [[0.0; MAXD]; MAXD];
        let mut cond_sd = [0.0; MAXD];
        for j in 0..d {
            if j == 0 {
                cond_sd[0] = cov[(0, 0)].sqrt();
                continue;
            }
            let sub = Matrix::from_rows(&(0..j).map(|r| (0..j).map(|s| cov[(r, s)]).collect()).collect::<Vec<_>>()).unwrap();
            let sub_inv = sub.inverse().expect("covariance block is positive definite");
            let cross: Vec<f64> = (0..j).map(|s| cov[(j, s)]).collect();
            let coef = sub_inv.mul_vec(&cross);
            cond_coef[j][..j].copy_from_slice(&coef);
            cond_sd[j] = (cov[(j, j)] - dot(&coef, &cross)).max(0.0).sqrt();
        }
        let radius = -std_normal_quantile(0.5 * tail_tol).unwrap();
        let r_box = radius * (1.0 + (d as f64).sqrt());
        let mut box_lo = [0.0; MAXD];
        let mut box_hi = [0.0; MAXD];
        for i in 0..d {
            let s = cov[(i, i)].sqrt();
            box_lo[i] = mean[i] - r_box * s;
            box_hi[i] = mean[i] + r_box * s;
        }
        let ctc = (0..d).map(|i| c[i] * mean[i]).sum::<f64>();
        let log_full = 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * mm.determinant().ln()
            - 0.5 * (q0 + ctc);
        Self { k, origin, dirs, m, c, q0, mean, cond_coef, cond_sd, box_lo, box_hi, radius, log_full }
    }

    /// ∫ over the whole frame of the restricted weight.
    pub fn full_integral(&self) -> f64 {
        self.log_full.exp()
    }

    /// Frame constraint a·v ≤ b for ⟨x, ω⟩ < t.
    pub fn constraint(&self, omega: &[f64], t: f64) -> Halfspace {
        let a: Vec<f64> = self.dirs.iter().map(|f| dot(f, omega)).collect();
        Halfspace::new(&a, t - dot(&self.origin, omega))
    }

    pub fn line(&self, z: &[f64]) -> LineGaussian {
        let k = self.k;
        let mut beta = self.c[k];
        let mut gamma0 = self.q0;
        for i in 0..k {
            beta += self.m[k][i] * z[i];
            gamma0 += 2.0 * self.c[i] * z[i];
            for j in 0..k {
                gamma0 += self.m[i][j] * z[i] * z[j];
            }
        }
        LineGaussian::new(self.m[k][k], beta, gamma0)
    }

    fn cond_range(&self, j: usize, z: &[f64]) -> (f64, f64) {
        let mut mu = self.mean[j];
        for i in 0..j {
            mu += self.cond_coef[j][i] * (z[i] - self.mean[i]);
        }
        let r = self.radius * self.cond_sd[j];
        (mu - r, mu + r)
    }
}

/// Integrates `inner` (called once per line with the clipped slice of each
/// polytope) over the base coordinates. `tol` is absolute in frame units.
pub(crate) fn integrate<V: Value>(
    frame: &Frame,
    polys: &[Vec<Halfspace>],
    rule: usize,
    max_panels: usize,
    tol: f64,
    inner: &dyn Fn(&[f64], &LineGaussian, &[IntervalUnion]) -> V,
) -> Integral<V> {
    let mut z = [0.0; MAXD];
    let mut out = level(frame, polys, 0, &mut z, rule, max_panels, tol, inner);
    let tail = frame.k as f64 * (2.0 * crate::gaussline::std_normal_sf(frame.radius)) * frame.full_integral();
    out.error += tail;
    out
}

#[allow(clippy::too_many_arguments)]
fn level<V: Value>(
    frame: &Frame,
    polys: &[Vec<Halfspace>],
    j: usize,
    z: &mut [f64; MAXD],
    rule: usize,
    max_panels: usize,
    tol: f64,
    inner: &dyn Fn(&[f64], &LineGaussian, &[IntervalUnion]) -> V,
) -> Integral<V> {
    let k = frame.k;
    if j == k {
        let line = frame.line(&z[..k]);
        let slices: Vec<IntervalUnion> = polys.iter().map(|p| clip(p, k, &z[..k])).collect();
        return Integral { value: inner(&z[..k], &line, &slices), error: 0.0, converged: true };
    }
    // remaining variables: z_j..z_{k−1}, t
    let d = k + 1 - j;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut cuts: Vec<f64> = Vec::new();
    for p in polys {
        let mut sys: Vec<Halfspace> = Vec::with_capacity(p.len() + 2 * d);
        let mut empty = false;
        for c in p {
            let mut a = [0.0; MAXD];
            a[..d].copy_from_slice(&c.a[j..=k]);
            let b = c.b - (0..j).map(|i| c.a[i] * z[i]).sum::<f64>();
            if a[..d].iter().all(|&x| x == 0.0) {
                if b < 0.0 {
                    empty = true;
                    break;
                }
                continue;
            }
            sys.push(Halfspace { a, b });
        }
        if empty {
            continue;
        }
        for r in 0..d {
            sys.push(Halfspace::axis_upper(r, frame.box_hi[j + r]));
            sys.push(Halfspace::axis_lower(r, frame.box_lo[j + r]));
        }
        for v in polyhedra::vertices(&sys, d) {
            lo = lo.min(v[0]);
            hi = hi.max(v[0]);
            cuts.push(v[0]);
        }
    }
    let (clo, chi) = frame.cond_range(j, &z[..j]);
    let (lo, hi) = (lo.max(clo), hi.min(chi));
    if !(hi > lo) {
        return Integral { value: V::zero(), error: 0.0, converged: true };
    }
    let mut breaks: Vec<f64> = cuts.into_iter().filter(|&c| c > lo && c < hi).collect();
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (hi - lo));
    let inner_tol = tol / (2.0 * (hi - lo));
    let mut converged = true;
    let mut f = |x: f64| {
        z[j] = x;
        let r = level(frame, polys, j + 1, z, rule, max_panels, inner_tol, inner);
        converged &= r.converged;
        (r.value, r.error)
    };
    let mut out = adaptive(&mut f, &breaks, tol, rule, max_panels);
    out.converged &= converged;
    out
}

// Interval of t along the line at base point z.
fn clip(p: &[Halfspace], k: usize, z: &[f64]) -> IntervalUnion {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for c in p {
        let s = c.a[k];
        let r = c.b - (0..k).map(|i| c.a[i] * z[i]).sum::<f64>();
        if s.abs() <= 1e-15 {
            if r < 0.0 {
                return IntervalUnion::empty();
            }
        } else if s > 0.0 {
            hi = hi.min(r / s);
        } else {
            lo = lo.max(r / s);
        }
    }
    IntervalUnion::single(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        for n in [2, 3, 8, 32] {
            let r = gauss_legendre(n);
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // exact through degree 2n − 1
            let deg = 2 * n - 2;
            let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_breakpoint() {
        let mut f = |x: f64| ((x - 0.3).abs().sqrt() * 0.0 + if x < 0.3 { x } else { 1.0 }, 0.0);
        let r: Integral<f64> = adaptive(&mut f, &[0.0, 0.3, 1.0], 1e-12, 8, 1000);
        assert!((r.value - (0.045 + 0.7)).abs() < 1e-13);
    }

    #[test]
    fn frame_full_integral_matches_normalization() {
        let a = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let f = Frame::new(&a, vec![0.0, 0.0], vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1e-12);
        let want = 2.0 * std::f64::consts::PI / a.det().sqrt();
        assert!((f.full_integral() - want).abs() < 1e-13);
    }
}
