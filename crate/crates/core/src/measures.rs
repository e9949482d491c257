//! γ_A mass, perimeter and barycenter of set regions.

use crate::error::{Error, Result};
use crate::gaussline::{line_first_moment, line_mass, std_normal_cdf, IntervalUnion, LineGaussian};
use crate::graph;
use crate::linalg::{dot, orthonormal_complement, Direction, SpdMatrix};
use crate::polyhedra::Halfspace;
use crate::quadrature::{integrate, Frame, Integral};
use crate::sets::{HalfSpaceSet, PolytopeSet, SetRegion};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub base_rule: usize,
    /// Adaptive splitting limit per integration axis.
    pub panels_per_axis: usize,
    /// Neglected Gaussian tail mass.
    pub tail_tol: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { base_rule: 32, panels_per_axis: 1 << 12, tail_tol: 1e-12, rel_tol: 1e-9 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_rule == 0 || self.panels_per_axis == 0 {
            return Err(Error::InvalidInput("quadrature sizes must be positive".into()));
        }
        if !(self.tail_tol > 0.0 && self.rel_tol > 0.0 && self.tail_tol < self.rel_tol) {
            return Err(Error::InvalidInput("need 0 < tail_tol < rel_tol".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    SliceQuadrature,
    GraphQuadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::SliceQuadrature => "slice_quadrature",
            Self::GraphQuadrature => "graph_quadrature",
            Self::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
}

impl MeasureResult {
    pub(crate) fn closed(value: f64) -> Self {
        Self { value, error_estimate: 4.0 * f64::EPSILON * value.abs(), method: Method::ClosedForm }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorResult {
    pub value: Vec<f64>,
    pub error_estimate: f64,
    pub method: Method,
}

/// |(√A)^{-1}ω| = √⟨A^{-1}ω, ω⟩.
pub fn normal_scale(a: &SpdMatrix, omega: &Direction) -> f64 {
    let w = omega.as_slice();
    dot(&a.inverse().mul_vec(w), w).sqrt()
}

fn check_halfspace(a: &SpdMatrix, h: &HalfSpaceSet) -> Result<f64> {
    a.check_dim(h.dim())?;
    Ok(normal_scale(a, &h.omega))
}

pub fn halfspace_mass(a: &SpdMatrix, h: &HalfSpaceSet) -> Result<MeasureResult> {
    let s = check_halfspace(a, h)?;
    Ok(MeasureResult::closed(std_normal_cdf(h.t / s)))
}

pub fn halfspace_perimeter(a: &SpdMatrix, h: &HalfSpaceSet) -> Result<MeasureResult> {
    let s = check_halfspace(a, h)?;
    Ok(MeasureResult::closed((-0.5 * (h.t / s).powi(2)).exp() / s))
}

pub fn halfspace_barycenter(a: &SpdMatrix, h: &HalfSpaceSet) -> Result<Vec<f64>> {
    let s = check_halfspace(a, h)?;
    let c = -(-0.5 * (h.t / s).powi(2)).exp() / ((2.0 * PI).sqrt() * s);
    Ok(a.inverse().mul_vec(h.omega.as_slice()).into_iter().map(|x| c * x).collect())
}

fn mass_prefactor(a: &SpdMatrix) -> f64 {
    a.det().sqrt() / (2.0 * PI).powf(0.5 * a.dim() as f64)
}

fn perimeter_prefactor(a: &SpdMatrix) -> f64 {
    a.det().sqrt() / (2.0 * PI).powf(0.5 * (a.dim() as f64 - 1.0))
}

fn check_region(a: &SpdMatrix, e: &SetRegion, cfg: &QuadratureConfig) -> Result<()> {
    cfg.validate()?;
    a.check_dim(e.dim())
}

fn finish<V: Copy>(r: Integral<V>, scale: f64, budget: f64) -> Result<(V, f64)> {
    let err = r.error * scale;
    if !r.converged && err > budget {
        return Err(Error::QuadratureNotConverged { error_estimate: err });
    }
    Ok((r.value, err))
}

fn whole_space_frame(a: &SpdMatrix, tail_tol: f64) -> Frame {
    let n = a.dim();
    let dirs = (0..n).map(|k| Direction::axis(n, k).as_slice().to_vec()).collect();
    Frame::new(a, vec![0.0; n], dirs, tail_tol)
}

fn frame_constraints(frame: &Frame, p: &PolytopeSet) -> Vec<Halfspace> {
    p.constraints().iter().map(|c| frame.constraint(c.omega.as_slice(), c.t)).collect()
}

// [mass, first moments...] over a polytope, in probability units.
fn polytope_moments(a: &SpdMatrix, p: &PolytopeSet, cfg: &QuadratureConfig) -> Result<([f64; 5], f64)> {
    let n = a.dim();
    let frame = whole_space_frame(a, cfg.tail_tol);
    let polys = [frame_constraints(&frame, p)];
    let pre = mass_prefactor(a);
    let spread = a.inv_sqrt_norm().max(1.0);
    let inner = |z: &[f64], l: &LineGaussian, s: &[IntervalUnion]| -> [f64; 5] {
        let m = line_mass(l, &s[0]);
        let mut out = [0.0; 5];
        out[0] = m;
        out[1..n].iter_mut().zip(z).for_each(|(o, z)| *o = z * m);
        out[n] = line_first_moment(l, &s[0]);
        out
    };
    let r = integrate(&frame, &polys, cfg.base_rule, cfg.panels_per_axis, cfg.rel_tol / pre, &inner);
    let (v, err) = finish(r, pre, cfg.rel_tol * spread)?;
    Ok((v.map(|x| x * pre), err))
}

fn mass_only(a: &SpdMatrix, polys: &[PolytopeSet], cfg: &QuadratureConfig) -> Result<(Vec<f64>, f64)> {
    let frame = whole_space_frame(a, cfg.tail_tol);
    let cons: Vec<Vec<Halfspace>> = polys.iter().map(|p| frame_constraints(&frame, p)).collect();
    let pre = mass_prefactor(a);
    let inner = |_: &[f64], l: &LineGaussian, s: &[IntervalUnion]| -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, s) in out.iter_mut().zip(s) {
            *o = line_mass(l, s);
        }
        out
    };
    let r = integrate(&frame, &cons, cfg.base_rule, cfg.panels_per_axis, cfg.rel_tol / pre, &inner);
    let (v, err) = finish(r, pre, cfg.rel_tol)?;
    Ok((v[..polys.len()].iter().map(|x| x * pre).collect(), err))
}

pub fn mass(a: &SpdMatrix, e: &SetRegion, cfg: &QuadratureConfig) -> Result<MeasureResult> {
    check_region(a, e, cfg)?;
    match e {
        SetRegion::HalfSpace(h) => halfspace_mass(a, h),
        SetRegion::Subgraph(s) => Ok(graph::moments(a, s, cfg)?.0),
        _ => {
            let (v, err) = mass_only(a, &[e.to_polytope()?], cfg)?;
            Ok(MeasureResult { value: v[0].clamp(0.0, 1.0), error_estimate: err, method: Method::SliceQuadrature })
        }
    }
}

pub fn barycenter(a: &SpdMatrix, e: &SetRegion, cfg: &QuadratureConfig) -> Result<VectorResult> {
    check_region(a, e, cfg)?;
    match e {
        SetRegion::HalfSpace(h) => {
            let b = halfspace_barycenter(a, h)?;
            let err = 4.0 * f64::EPSILON * b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Ok(VectorResult { value: b, error_estimate: err, method: Method::ClosedForm })
        }
        SetRegion::Subgraph(s) => Ok(graph::moments(a, s, cfg)?.1),
        _ => {
            let (v, err) = polytope_moments(a, &e.to_polytope()?, cfg)?;
            Ok(VectorResult { value: v[1..=a.dim()].to_vec(), error_estimate: err, method: Method::SliceQuadrature })
        }
    }
}

/// Mass and barycenter in one pass.
pub fn mass_and_barycenter(
    a: &SpdMatrix,
    e: &SetRegion,
    cfg: &QuadratureConfig,
) -> Result<(MeasureResult, VectorResult)> {
    check_region(a, e, cfg)?;
    match e {
        SetRegion::HalfSpace(_) => Ok((mass(a, e, cfg)?, barycenter(a, e, cfg)?)),
        SetRegion::Subgraph(s) => graph::moments(a, s, cfg),
        _ => {
            let (v, err) = polytope_moments(a, &e.to_polytope()?, cfg)?;
            Ok((
                MeasureResult { value: v[0].clamp(0.0, 1.0), error_estimate: err, method: Method::SliceQuadrature },
                VectorResult { value: v[1..=a.dim()].to_vec(), error_estimate: err, method: Method::SliceQuadrature },
            ))
        }
    }
}

pub fn perimeter(a: &SpdMatrix, e: &SetRegion, cfg: &QuadratureConfig) -> Result<MeasureResult> {
    check_region(a, e, cfg)?;
    match e {
        SetRegion::HalfSpace(h) => halfspace_perimeter(a, h),
        SetRegion::Subgraph(s) => graph::perimeter(a, s, cfg),
        _ => {
            polytope_perimeter(a, &e.to_polytope()?, cfg)
        }
    }
}

fn polytope_perimeter(a: &SpdMatrix, p: &PolytopeSet, cfg: &QuadratureConfig) -> Result<MeasureResult> {
    let n = p.dim();
    let pre = perimeter_prefactor(a);
    let cons = p.constraints();
    let mut value = 0.0;
    let mut error = 0.0;
    if n == 1 {
        // facets are the endpoints
        let a11 = a.entries()[(0, 0)];
        for (i, c) in cons.iter().enumerate() {
            let x = c.t * c.omega.as_slice()[0];
            let inside = cons.iter().enumerate().all(|(j, d)| j == i || x * d.omega.as_slice()[0] < d.t);
            if inside {
                value += pre * (-0.5 * a11 * x * x).exp();
            }
        }
        return Ok(MeasureResult { value, error_estimate: 4.0 * f64::EPSILON * value, method: Method::SliceQuadrature });
    }
    for (i, c) in cons.iter().enumerate() {
        let w = c.omega.as_slice();
        let origin: Vec<f64> = w.iter().map(|x| c.t * x).collect();
        let frame = Frame::new(a, origin, orthonormal_complement(w), cfg.tail_tol);
        let facet: Vec<Halfspace> = cons
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, d)| frame.constraint(d.omega.as_slice(), d.t))
            .collect();
        let budget = cfg.rel_tol * frame.full_integral().max(1e-300);
        let inner = |_: &[f64], l: &LineGaussian, s: &[IntervalUnion]| line_mass(l, &s[0]);
        let r = integrate(&frame, &[facet], cfg.base_rule, cfg.panels_per_axis, budget, &inner);
        let (v, err) = finish(r, pre, budget * pre)?;
        value += v * pre;
        error += err;
    }
    Ok(MeasureResult { value, error_estimate: error, method: Method::SliceQuadrature })
}

/// (γ_A(E Δ F), γ_A(E^s Δ F^s)) with both symmetrized along `u`. Per line the
/// symmetrized slices are nested half-lines, so the second integrand is
/// |v_E − v_F|.
pub fn symmetric_difference_mass_pair(
    e: &SetRegion,
    f: &SetRegion,
    a: &SpdMatrix,
    u: &Direction,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    a.check_dim(e.dim())?;
    a.check_dim(f.dim())?;
    a.check_dim(u.dim())?;
    let n = a.dim();
    let (pe, pf) = (e.to_polytope()?, f.to_polytope()?);
    let mut dirs = orthonormal_complement(u.as_slice());
    dirs.push(u.as_slice().to_vec());
    let frame = Frame::new(a, vec![0.0; n], dirs, cfg.tail_tol);
    let polys = [frame_constraints(&frame, &pe), frame_constraints(&frame, &pf)];
    let pre = mass_prefactor(a);
    let inner = |_: &[f64], l: &LineGaussian, s: &[IntervalUnion]| -> [f64; 2] {
        let d = line_mass(l, &s[0].symmetric_difference(&s[1]));
        [d, (line_mass(l, &s[0]) - line_mass(l, &s[1])).abs()]
    };
    let r = integrate(&frame, &polys, cfg.base_rule, cfg.panels_per_axis, cfg.rel_tol / pre, &inner);
    let (v, _) = finish(r, pre, cfg.rel_tol)?;
    Ok((v[0] * pre, v[1] * pre))
}

/// (‖√A‖^{-1}P_A(E), P_I(√A E), ‖(√A)^{-1}‖P_A(E)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub error_estimate: f64,
}

impl Sandwich {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.middle + slack && self.middle <= self.upper + slack
    }
}

pub fn perimeter_sandwich_check(a: &SpdMatrix, e: &SetRegion, cfg: &QuadratureConfig) -> Result<Sandwich> {
    if matches!(e, SetRegion::Subgraph(_)) {
        return Err(Error::UnsupportedVariant("subgraph"));
    }
    let pa = perimeter(a, e, cfg)?;
    let image = e.transform(a.sqrt())?;
    let pi = perimeter(&SpdMatrix::identity(a.dim()), &image, cfg)?;
    Ok(Sandwich {
        lower: pa.value / a.sqrt_norm(),
        middle: pi.value,
        upper: a.inv_sqrt_norm() * pa.value,
        error_estimate: pa.error_estimate * a.inv_sqrt_norm().max(1.0 / a.sqrt_norm()) + pi.error_estimate,
    })
}

/// Largest angular step between support normals that keeps the arc sagitta
/// within 1e-4·ε for both the chord and the tangent approximations.
fn arc_step() -> f64 {
    2.0 * (1.0 / (1.0 + 1e-4f64)).acos()
}

// Normals sampled along the arc at each vertex, from the incoming edge normal
// to the outgoing one.
fn vertex_normals(poly: &[[f64; 2]]) -> Vec<(usize, Vec<[f64; 2]>)> {
    let m = poly.len();
    let normal = |i: usize| {
        let (p, q) = (poly[i], poly[(i + 1) % m]);
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let l = dx.hypot(dy);
        [dy / l, -dx / l]
    };
    let step = arc_step();
    (0..m)
        .map(|i| {
            let n0 = normal((i + m - 1) % m);
            let n1 = normal(i);
            let a0 = n0[1].atan2(n0[0]);
            let mut turn = n1[1].atan2(n1[0]) - a0;
            while turn < 0.0 {
                turn += 2.0 * PI;
            }
            let pieces = (turn / step).ceil().max(1.0) as usize;
            let ns = (0..=pieces)
                .map(|j| {
                    let th = a0 + turn * j as f64 / pieces as f64;
                    [th.cos(), th.sin()]
                })
                .collect();
            (i, ns)
        })
        .collect()
}

fn enlarge_check(e: &SetRegion, eps: f64) -> Result<Option<Vec<[f64; 2]>>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange { value: eps, range: "(0, ∞)" });
    }
    match e {
        SetRegion::HalfSpace(_) => Ok(None),
        SetRegion::Polytope(_) | SetRegion::Box(_) if e.dim() == 2 => {
            let p = e.to_polytope()?;
            p.vertices_2d().map(Some).ok_or(Error::UnsupportedVariant("unbounded polygon"))
        }
        _ => Err(Error::UnsupportedVariant(e.kind())),
    }
}

/// E + εB̄ as a polygon containing it: tangent lines to the rounded corners
/// at closely spaced normals.
pub fn minkowski_enlarge(e: &SetRegion, eps: f64) -> Result<SetRegion> {
    let Some(poly) = enlarge_check(e, eps)? else {
        let SetRegion::HalfSpace(h) = e else { unreachable!() };
        return Ok(SetRegion::HalfSpace(HalfSpaceSet::new(h.omega.clone(), h.t + eps)));
    };
    let mut cons = Vec::new();
    for (i, ns) in vertex_normals(&poly) {
        let v = poly[i];
        for nrm in ns.iter().skip(1) {
            let t = v[0] * nrm[0] + v[1] * nrm[1] + eps;
            cons.push(HalfSpaceSet::new(Direction::new(nrm.to_vec())?, t));
        }
    }
    Ok(SetRegion::Polytope(PolytopeSet::new(2, cons)?))
}

/// E + εB̄ as a polygon contained in it: chords of the rounded corners.
pub fn minkowski_enlarge_inner(e: &SetRegion, eps: f64) -> Result<SetRegion> {
    let Some(poly) = enlarge_check(e, eps)? else {
        return minkowski_enlarge(e, eps);
    };
    let mut pts = Vec::new();
    for (i, ns) in vertex_normals(&poly) {
        let v = poly[i];
        pts.extend(ns.iter().map(|n| [v[0] + eps * n[0], v[1] + eps * n[1]]));
    }
    Ok(SetRegion::Polytope(PolytopeSet::from_vertices_2d(&pts)?))
}
