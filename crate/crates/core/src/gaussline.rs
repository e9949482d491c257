//! One-dimensional Gaussian quantities along lines, all in closed form.

use crate::error::{Error, Result};
use crate::linalg::{dot, Direction, SpdMatrix};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// 1 − Φ(x), accurate in the upper tail.
pub fn std_normal_sf(x: f64) -> f64 {
    std_normal_cdf(-x)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Φ(b) − Φ(a) for a ≤ b, avoiding cancellation in either tail.
pub fn std_normal_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        0.0
    } else if a >= 0.0 {
        std_normal_sf(a) - std_normal_sf(b)
    } else if b <= 0.0 {
        std_normal_cdf(b) - std_normal_cdf(a)
    } else {
        1.0 - std_normal_cdf(a) - std_normal_sf(b)
    }
}

/// Φ^{-1}(p) for p in (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange { value: p, range: "(0, 1)" });
    }
    if p > 0.5 {
        // 1 − p is exact here
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let mut x = if p < 0.024_25 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let dens = std_normal_pdf(x);
        if dens == 0.0 {
            break;
        }
        x -= (std_normal_cdf(x) - p) / dens;
    }
    x
}

/// The weight t ↦ e^{−(αt² + 2βt + γ₀)/2} along a line z + tu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGaussian {
    pub alpha: f64,
    pub beta: f64,
    pub gamma0: f64,
}

impl LineGaussian {
    pub fn new(alpha: f64, beta: f64, gamma0: f64) -> Self {
        debug_assert!(alpha > 0.0);
        Self { alpha, beta, gamma0 }
    }

    /// Location of the peak, −β/α.
    pub fn center(&self) -> f64 {
        -self.beta / self.alpha
    }

    /// log of the peak weight, −(γ₀ − β²/α)/2.
    pub fn log_peak(&self) -> f64 {
        -(self.gamma0 - self.beta * self.beta / self.alpha) / 2.0
    }

    /// e^{−q(t)/2}, evaluated around the peak.
    pub fn weight(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        let d = t - self.center();
        (self.log_peak() - 0.5 * self.alpha * d * d).exp()
    }

    pub fn total_mass(&self) -> f64 {
        self.log_peak().exp() * (2.0 * PI / self.alpha).sqrt()
    }

    /// Standardized coordinate √α(t − center).
    pub fn standardize(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return t;
        }
        self.alpha.sqrt() * (t - self.center())
    }

    pub fn interval_mass(&self, l: f64, r: f64) -> f64 {
        self.total_mass() * std_normal_interval(self.standardize(l), self.standardize(r))
    }

    /// ∫_l^r t·weight(t) dt.
    pub fn interval_first_moment(&self, l: f64, r: f64) -> f64 {
        if l >= r {
            return 0.0;
        }
        self.center() * self.interval_mass(l, r) - (self.weight(r) - self.weight(l)) / self.alpha
    }
}

/// α = ⟨Au,u⟩, β = ⟨Az,u⟩, γ₀ = ⟨Az,z⟩.
pub fn line_gaussian(a: &SpdMatrix, z: &[f64], u: &Direction) -> Result<LineGaussian> {
    a.check_dim(z.len())?;
    a.check_dim(u.dim())?;
    let az = a.apply(z);
    Ok(LineGaussian::new(a.quad(u.as_slice()), dot(&az, u.as_slice()), dot(&az, z)))
}

/// Finite disjoint union of open intervals, sorted, with touching pieces merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    pub fn single(l: f64, r: f64) -> Self {
        Self::new(vec![(l, r)])
    }

    /// Canonicalizes arbitrary (possibly overlapping or empty) pieces.
    pub fn new(mut pieces: Vec<(f64, f64)>) -> Self {
        pieces.retain(|&(l, r)| l < r);
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pieces.len());
        for (l, r) in pieces {
            match out.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(r),
                _ => out.push((l, r)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(l, r)| l < t && t < r)
    }

    pub fn complement(&self) -> Self {
        let mut pieces = Vec::with_capacity(self.intervals.len() + 1);
        let mut prev = f64::NEG_INFINITY;
        for &(l, r) in &self.intervals {
            pieces.push((prev, l));
            prev = r;
        }
        pieces.push((prev, f64::INFINITY));
        Self::new(pieces)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut pieces = Vec::new();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                pieces.push((a.max(c), b.min(d)));
            }
        }
        Self::new(pieces)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.intervals.iter().chain(&other.intervals).copied().collect())
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.intersect(&other.complement()).union(&other.intersect(&self.complement()))
    }

    /// Finite endpoints in increasing order.
    pub fn finite_endpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|&(l, r)| [l, r])
            .filter(|t| t.is_finite())
            .collect()
    }
}

pub fn line_mass(l: &LineGaussian, s: &IntervalUnion) -> f64 {
    s.intervals().iter().map(|&(a, b)| l.interval_mass(a, b)).sum()
}

/// Mass of `s` and of its complement, each as a fraction of the line total and
/// each computed directly so that neither suffers cancellation.
pub fn line_fractions(l: &LineGaussian, s: &IntervalUnion) -> (f64, f64) {
    let frac = |u: &IntervalUnion| -> f64 {
        u.intervals()
            .iter()
            .map(|&(a, b)| std_normal_interval(l.standardize(a), l.standardize(b)))
            .sum()
    };
    (frac(s), frac(&s.complement()))
}

pub fn line_first_moment(l: &LineGaussian, s: &IntervalUnion) -> f64 {
    s.intervals().iter().map(|&(a, b)| l.interval_first_moment(a, b)).sum()
}

/// Σ of the weight over finite endpoints.
pub fn slice_perimeter(l: &LineGaussian, s: &IntervalUnion) -> f64 {
    s.finite_endpoints().iter().map(|&t| l.weight(t)).sum()
}

/// t with line_mass(L, (−∞, t)) = mass.
pub fn line_quantile(l: &LineGaussian, mass: f64) -> Result<f64> {
    let total = l.total_mass();
    let slack = 1e-12 * total;
    if !(mass >= -slack && mass <= total + slack) {
        return Err(Error::MassOutOfRange { mass, total });
    }
    let p = (mass / total).clamp(0.0, 1.0);
    quantile_from_fractions(l, p, 1.0 - p)
}

/// Quantile given the lower fraction and its complement; whichever is smaller
/// drives the inversion.
pub fn quantile_from_fractions(l: &LineGaussian, lower: f64, upper: f64) -> Result<f64> {
    if lower <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if upper <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let x = if lower <= upper { std_normal_quantile(lower)? } else { -std_normal_quantile(upper)? };
    Ok(l.center() + x / l.alpha.sqrt())
}
