//! Ehrhard symmetrization along an arbitrary direction and the report that
//! checks the perimeter inequality with its barycenter correction.
//!
//! Everything happens in the frame x = O·(z, y) with O(−e_n) = u, where the
//! symmetrized set is the lower subgraph {y < h(z)} and slices run along +e_n.

use crate::error::{Error, Result};
use crate::gaussline::{
    line_fractions, line_first_moment, line_mass, quantile_from_fractions, slice_perimeter, IntervalUnion,
    LineGaussian,
};
use crate::linalg::{
    conjugate, dot, eigen_residual, eigenspace_membership, rotation_to_minus_en, Direction, Rotation, SpdMatrix,
};
use crate::measures::{mass_and_barycenter, perimeter, MeasureResult, QuadratureConfig, VectorResult};
use crate::polyhedra::{self, Halfspace};
use crate::sets::{rotate_into_frame, HalfSpaceSet, PolytopeSet, SetRegion, SubgraphRegion};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Slices lighter than this become dust (h = −∞).
pub const DUST_MASS: f64 = 1e-300;
/// Slices whose complement holds at most this fraction become full (h = +∞).
pub const FULL_FRACTION: f64 = 1e-12;
/// Fewest grid intervals per base axis.
pub const MIN_INTERVALS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Nodes per base axis; odd counts enable the coarse-grid error estimate.
    pub nodes: usize,
    /// Tail mass allowed beyond a truncated base rectangle.
    pub tail_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nodes: 257, tail_tol: 1e-12 }
    }
}

enum Source {
    Poly(PolytopeSet),
    Graph(SubgraphRegion),
}

/// A set seen from the frame of a direction.
struct Framed {
    rotation: Rotation,
    /// OᵀAO.
    form: SpdMatrix,
    source: Source,
}

impl Framed {
    fn new(a: &SpdMatrix, e: &SetRegion, u: &Direction) -> Result<Self> {
        a.check_dim(e.dim())?;
        a.check_dim(u.dim())?;
        let n = a.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if let SetRegion::Subgraph(s) = e {
            let axis = s.rotation().axis_direction();
            if axis.iter().zip(u.as_slice()).any(|(x, y)| (x - y).abs() > 1e-12) {
                return Err(Error::UnsupportedSliceDirection);
            }
            let form = conjugate(a, s.rotation())?;
            return Ok(Self { rotation: s.rotation().clone(), form, source: Source::Graph(s.clone()) });
        }
        let rotation = rotation_to_minus_en(u);
        let form = conjugate(a, &rotation)?;
        let p = rotate_into_frame(&e.to_polytope()?, &rotation)?;
        Ok(Self { rotation, form, source: Source::Poly(p) })
    }

    fn k(&self) -> usize {
        self.form.dim() - 1
    }

    /// Weight along the vertical line over base point z.
    fn line(&self, z: &[f64]) -> LineGaussian {
        let m = self.form.entries();
        let k = self.k();
        let beta = (0..k).map(|i| m[(k, i)] * z[i]).sum();
        let gamma0 = (0..k).map(|i| (0..k).map(|j| m[(i, j)] * z[i] * z[j]).sum::<f64>()).sum();
        LineGaussian::new(m[(k, k)], beta, gamma0)
    }

    /// Slice {y : (z, y) ∈ E} in the frame.
    fn slice(&self, z: &[f64]) -> IntervalUnion {
        let k = self.k();
        match &self.source {
            Source::Graph(s) => {
                let h = s.height_at(z);
                if h == f64::NEG_INFINITY {
                    IntervalUnion::empty()
                } else {
                    IntervalUnion::single(f64::NEG_INFINITY, h)
                }
            }
            Source::Poly(p) => {
                let mut x = z.to_vec();
                x.push(0.0);
                let mut up = vec![0.0; k + 1];
                up[k] = 1.0;
                p.slice(&x, &up)
            }
        }
    }
}

/// Base rectangle, grid size and truncation flags for the frame shadow.
struct Base {
    lo: Vec<f64>,
    hi: Vec<f64>,
    nodes: Vec<usize>,
    truncated: Vec<[bool; 2]>,
}

fn base_for(f: &Framed, a: &SpdMatrix, grid: &GridSpec) -> Result<Base> {
    let k = f.k();
    let n = k + 1;
    if let Source::Graph(s) = &f.source {
        return Ok(Base { lo: s.lo().to_vec(), hi: s.hi().to_vec(), nodes: s.nodes().to_vec(), truncated: s.truncated().to_vec() });
    }
    let Source::Poly(p) = &f.source else { unreachable!() };
    let radius = a.tail_radius(grid.tail_tol);
    let mut sys: Vec<Halfspace> = p.constraints().iter().map(|c| Halfspace::new(c.omega.as_slice(), c.t)).collect();
    for i in 0..n {
        sys.push(Halfspace::axis_upper(i, 2.0 * radius));
        sys.push(Halfspace::axis_lower(i, -2.0 * radius));
    }
    let verts = polyhedra::vertices(&sys, n);
    if verts.is_empty() {
        return Err(Error::InvalidInput("set has no mass inside the truncation radius".into()));
    }
    let (mut lo, mut hi, mut truncated) = (vec![0.0; k], vec![0.0; k], vec![[false; 2]; k]);
    for i in 0..k {
        let mn = verts.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
        let mx = verts.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
        lo[i] = mn.max(-radius);
        hi[i] = mx.min(radius);
        truncated[i] = [mn < -radius, mx > radius];
        if !(hi[i] > lo[i]) {
            return Err(Error::InvalidInput("set has an empty shadow inside the truncation radius".into()));
        }
    }
    let intervals = grid.nodes.saturating_sub(1);
    if intervals < MIN_INTERVALS {
        let diameter = lo.iter().zip(&hi).map(|(l, h)| (h - l).powi(2)).sum::<f64>().sqrt();
        let spacing = (hi[0] - lo[0]) / intervals.max(1) as f64;
        return Err(Error::GridTooCoarse { spacing, diameter });
    }
    Ok(Base { lo, hi, nodes: vec![grid.nodes; k], truncated })
}

/// Height of the lower half-line carrying the same mass as `slice`.
pub(crate) fn symmetric_height(line: &LineGaussian, slice: &IntervalUnion) -> Result<f64> {
    let (lower, upper) = line_fractions(line, slice);
    if lower * line.total_mass() < DUST_MASS {
        return Ok(f64::NEG_INFINITY);
    }
    if upper <= FULL_FRACTION {
        return Ok(f64::INFINITY);
    }
    quantile_from_fractions(line, lower, upper)
}

/// One grid node: base point, the slice used there and its line.
struct Node {
    z: Vec<f64>,
    line: LineGaussian,
    slice: IntervalUnion,
    height: f64,
}

fn grid_nodes(f: &Framed, base: &Base) -> Result<Vec<Node>> {
    let k = f.k();
    let poly = matches!(f.source, Source::Poly(_));
    let coord = |axis: usize, i: usize| -> f64 {
        let c = base.nodes[axis] - 1;
        let h = (base.hi[axis] - base.lo[axis]) / c as f64;
        // open sets have empty slices on their own shadow boundary; sample the
        // limit from inside instead
        let nudge = if poly && !base.truncated[axis][0] && i == 0 {
            1e-9 * h
        } else if poly && !base.truncated[axis][1] && i == c {
            -1e-9 * h
        } else {
            0.0
        };
        if i == c { base.hi[axis] + nudge } else { base.lo[axis] + i as f64 * h + nudge }
    };
    let idx: Vec<Vec<usize>> = match k {
        1 => (0..base.nodes[0]).map(|i| vec![i]).collect(),
        _ => (0..base.nodes[0]).flat_map(|i| (0..base.nodes[1]).map(move |j| vec![i, j])).collect(),
    };
    idx.par_iter()
        .map(|ix| {
            let z: Vec<f64> = ix.iter().enumerate().map(|(axis, &i)| coord(axis, i)).collect();
            let line = f.line(&z);
            let slice = f.slice(&z);
            let height = symmetric_height(&line, &slice)?;
            Ok(Node { z, line, slice, height })
        })
        .collect()
}

fn region_from(f: &Framed, base: &Base, nodes: &[Node]) -> Result<SubgraphRegion> {
    SubgraphRegion::new(
        f.rotation.clone(),
        base.lo.clone(),
        base.hi.clone(),
        base.nodes.clone(),
        nodes.iter().map(|n| n.height).collect(),
        base.truncated.clone(),
    )
}

/// E^s along u as a lower subgraph in the frame of u.
pub fn ehrhard_symmetrize(a: &SpdMatrix, e: &SetRegion, u: &Direction, grid: &GridSpec) -> Result<SubgraphRegion> {
    let f = Framed::new(a, e, u)?;
    let base = base_for(&f, a, grid)?;
    let nodes = grid_nodes(&f, &base)?;
    region_from(&f, &base, &nodes)
}

/// ∇'h(0) = −(2/A''_nn)·(A''_{1n}, …, A''_{n−1,n}) with A'' = OᵀAO.
pub fn direction_gradient(a: &SpdMatrix, u: &Direction) -> Result<Vec<f64>> {
    a.check_dim(u.dim())?;
    let m = conjugate(a, &rotation_to_minus_en(u))?;
    let k = a.dim() - 1;
    let m = m.entries();
    Ok((0..k).map(|i| -2.0 * m[(i, k)] / m[(k, k)]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub z: Vec<f64>,
    pub height: f64,
    pub slice_perimeter: f64,
    pub symmetric_slice_perimeter: f64,
}

#[derive(Debug, Clone)]
pub struct SymmetrizationReport {
    pub mass_before: MeasureResult,
    pub mass_after: MeasureResult,
    pub perimeter_before: MeasureResult,
    pub perimeter_after: MeasureResult,
    pub barycenter_before: VectorResult,
    pub barycenter_after: VectorResult,
    /// ⟨b(E^s) − b(E), u⟩.
    pub barycenter_shift: f64,
    /// √(2π)·|Au − ⟨Au,u⟩u|·⟨b(E^s) − b(E), u⟩.
    pub error_term: f64,
    /// perimeter_before + error_term − perimeter_after.
    pub inequality_slack: f64,
    /// 10× the combined error estimates of the slack.
    pub slack_tolerance: f64,
    pub slices_sampled: usize,
    pub slice_decrease_violations: usize,
    pub dust_nodes: usize,
    pub full_nodes: usize,
    pub direction_gradient: Vec<f64>,
    pub direction_is_eigen: bool,
    pub profile: Vec<ProfileRow>,
    pub symmetrized: SubgraphRegion,
}

impl SymmetrizationReport {
    pub fn mass_preserved(&self) -> bool {
        (self.mass_before.value - self.mass_after.value).abs()
            <= 10.0 * (self.mass_before.error_estimate + self.mass_after.error_estimate) + 1e-12
    }

    pub fn inequality_holds(&self) -> bool {
        self.inequality_slack >= -self.slack_tolerance
    }
}

/// Per-slice perimeter tolerance.
pub const SLICE_TOL: f64 = 1e-10;

pub fn symmetrization_report(
    a: &SpdMatrix,
    e: &SetRegion,
    u: &Direction,
    cfg: &QuadratureConfig,
    grid: &GridSpec,
) -> Result<SymmetrizationReport> {
    let f = Framed::new(a, e, u)?;
    let base = base_for(&f, a, grid)?;
    let nodes = grid_nodes(&f, &base)?;
    let symmetrized = region_from(&f, &base, &nodes)?;
    let sym = SetRegion::Subgraph(symmetrized.clone());

    let (mass_before, barycenter_before) = mass_and_barycenter(a, e, cfg)?;
    let (mass_after, barycenter_after) = mass_and_barycenter(a, &sym, cfg)?;
    let perimeter_before = perimeter(a, e, cfg)?;
    let perimeter_after = perimeter(a, &sym, cfg)?;

    let diff: Vec<f64> = barycenter_after.value.iter().zip(&barycenter_before.value).map(|(x, y)| x - y).collect();
    let barycenter_shift = dot(&diff, u.as_slice());
    let factor = (2.0 * PI).sqrt() * eigen_residual(a, u);
    let error_term = factor * barycenter_shift;
    let inequality_slack = perimeter_before.value + error_term - perimeter_after.value;
    let slack_tolerance = 10.0
        * (perimeter_before.error_estimate
            + perimeter_after.error_estimate
            + factor * (barycenter_before.error_estimate + barycenter_after.error_estimate))
        + 1e-12;

    let mut violations = 0;
    let mut profile = Vec::with_capacity(nodes.len());
    for nd in &nodes {
        let p_e = slice_perimeter(&nd.line, &nd.slice);
        let p_s = if nd.height.is_finite() { nd.line.weight(nd.height) } else { 0.0 };
        if p_s > p_e + SLICE_TOL {
            violations += 1;
        }
        profile.push(ProfileRow { z: nd.z.clone(), height: nd.height, slice_perimeter: p_e, symmetric_slice_perimeter: p_s });
    }

    Ok(SymmetrizationReport {
        mass_before,
        mass_after,
        perimeter_before,
        perimeter_after,
        barycenter_before,
        barycenter_after,
        barycenter_shift,
        error_term,
        inequality_slack,
        slack_tolerance,
        slices_sampled: nodes.len(),
        slice_decrease_violations: violations,
        dust_nodes: nodes.iter().filter(|n| n.height == f64::NEG_INFINITY).count(),
        full_nodes: nodes.iter().filter(|n| n.height == f64::INFINITY).count(),
        direction_gradient: direction_gradient(a, u)?,
        direction_is_eigen: eigenspace_membership(a, u, 1e-9).is_some(),
        profile,
        symmetrized,
    })
}

/// [−α, α]^{n−1} × (0, ∞) in the frame of u, mapped back: a thin column whose
/// open end points against u.
pub fn thin_column(u: &Direction, alpha: f64) -> Result<SetRegion> {
    let n = u.dim();
    let o = rotation_to_minus_en(u);
    let mut cons = Vec::new();
    let mut push = |w: Vec<f64>, t: f64| -> Result<()> {
        cons.push(HalfSpaceSet::new(Direction::new(o.apply(&w))?, t));
        Ok(())
    };
    for i in 0..n - 1 {
        for s in [1.0, -1.0] {
            let mut w = vec![0.0; n];
            w[i] = s;
            push(w, alpha)?;
        }
    }
    let mut w = vec![0.0; n];
    w[n - 1] = -1.0;
    push(w, 0.0)?;
    Ok(SetRegion::Polytope(PolytopeSet::new(n, cons)?))
}

/// 2[[a, b], [b, c]].
pub fn counterexample_matrix(a: f64, b: f64, c: f64) -> Result<SpdMatrix> {
    SpdMatrix::from_rows(&[vec![2.0 * a, 2.0 * b], vec![2.0 * b, 2.0 * c]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub alpha: f64,
    pub perimeter_set: f64,
    pub perimeter_symmetrized: f64,
    pub error_term: f64,
    /// (P(E_α) − P(E^s_α))/α.
    pub gap_quotient: f64,
    /// (error_term + P(E_α) − P(E^s_α))/α.
    pub corrected_quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleScan {
    pub rows: Vec<ScanRow>,
    pub gap_slope: f64,
    pub error_term_slope: f64,
    pub corrected_slope: f64,
    pub analytic_gap_slope: f64,
    pub analytic_error_term_slope: f64,
    pub analytic_corrected_slope: f64,
    pub empirical_order: f64,
    /// h(0) and the central-difference h'(0) on the smallest α grid.
    pub height_at_origin: f64,
    pub slope_at_origin: f64,
}

// Value at 0 of the quadratic through three points.
fn extrapolate(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if j != i {
                w *= x[j] / (x[j] - x[i]);
            }
        }
        s += w * y[i];
    }
    s
}

pub fn counterexample_scan(
    a: f64,
    b: f64,
    c: f64,
    alphas: &[f64],
    cfg: &QuadratureConfig,
    grid: &GridSpec,
) -> Result<CounterexampleScan> {
    let m = counterexample_matrix(a, b, c)?;
    if alphas.len() < 3 {
        return Err(Error::InvalidInput("need at least three alphas".into()));
    }
    if alphas.iter().any(|&x| !(x > 0.0 && x.is_finite())) || alphas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::InvalidInput("alphas must be positive and strictly descending".into()));
    }
    let u = Direction::axis(2, 1).negated();
    let mut rows = Vec::new();
    let mut last = None;
    for &alpha in alphas {
        let e = thin_column(&u, alpha)?;
        let r = symmetrization_report(&m, &e, &u, cfg, grid)?;
        let gap = r.perimeter_before.value - r.perimeter_after.value;
        rows.push(ScanRow {
            alpha,
            perimeter_set: r.perimeter_before.value,
            perimeter_symmetrized: r.perimeter_after.value,
            error_term: r.error_term,
            gap_quotient: gap / alpha,
            corrected_quotient: (gap + r.error_term) / alpha,
        });
        last = Some(r.symmetrized);
    }
    let tail = &rows[rows.len() - 3..];
    let xs = [tail[0].alpha, tail[1].alpha, tail[2].alpha];
    let gap_slope = extrapolate(&xs, &[tail[0].gap_quotient, tail[1].gap_quotient, tail[2].gap_quotient]);
    let error_term_slope = extrapolate(
        &xs,
        &[tail[0].error_term / xs[0], tail[1].error_term / xs[1], tail[2].error_term / xs[2]],
    );
    let corrected_slope =
        extrapolate(&xs, &[tail[0].corrected_quotient, tail[1].corrected_quotient, tail[2].corrected_quotient]);
    let d1 = tail[0].gap_quotient - tail[1].gap_quotient;
    let d2 = tail[1].gap_quotient - tail[2].gap_quotient;
    let empirical_order = if d1 != 0.0 && d2 != 0.0 {
        (d1 / d2).abs().ln() / (xs[0] / xs[1]).ln()
    } else {
        f64::NAN
    };
    let pre = 2.0 * m.det().sqrt() / (2.0 * PI).sqrt();
    let root = (1.0 + 4.0 * b * b / (c * c)).sqrt();
    let s = last.expect("at least three alphas");
    let mid = s.nodes()[0] / 2;
    let dz = s.spacing(0);
    let (height_at_origin, slope_at_origin) = if s.nodes()[0] % 2 == 1 {
        (s.heights()[mid], (s.heights()[mid + 1] - s.heights()[mid - 1]) / (2.0 * dz))
    } else {
        (s.height_at(&[0.0]), (s.height_at(&[dz]) - s.height_at(&[-dz])) / (2.0 * dz))
    };
    Ok(CounterexampleScan {
        rows,
        gap_slope,
        error_term_slope,
        corrected_slope,
        analytic_gap_slope: pre * (1.0 - root),
        analytic_error_term_slope: pre * 2.0 * b.abs() / c,
        analytic_corrected_slope: pre * ((1.0 + 2.0 * b.abs() / c) - root),
        empirical_order,
        height_at_origin,
        slope_at_origin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTerm {
    /// |∫_{E_z} ∇'w dy − ∫_{E^s_z} ∇'w dy|.
    pub lhs: f64,
    /// (∫_{E_z} y dμ − ∫_{E^s_z} y dμ)·|A''e_n − ⟨A''e_n, e_n⟩e_n|.
    pub rhs: f64,
    pub moment_gap: f64,
}

/// Cross-term identity at the frame base point z.
pub fn cross_term_identity_check(a: &SpdMatrix, e: &SetRegion, u: &Direction, z: &[f64]) -> Result<CrossTerm> {
    let f = Framed::new(a, e, u)?;
    let k = f.k();
    if z.len() != k {
        return Err(Error::DimensionMismatch { expected: k, found: z.len() });
    }
    let line = f.line(z);
    let slice = f.slice(z);
    let h = symmetric_height(&line, &slice)?;
    let sym = if h == f64::NEG_INFINITY { IntervalUnion::empty() } else { IntervalUnion::single(f64::NEG_INFINITY, h) };
    let m = f.form.entries();
    // ∇'w = −w·(A''_zz z + A''_{z,n} y)
    let grad = |s: &IntervalUnion| -> Vec<f64> {
        let (mass, first) = (line_mass(&line, s), line_first_moment(&line, s));
        (0..k)
            .map(|i| -((0..k).map(|j| m[(i, j)] * z[j]).sum::<f64>() * mass + m[(i, k)] * first))
            .collect()
    };
    let (ge, gs) = (grad(&slice), grad(&sym));
    let lhs = ge.iter().zip(&gs).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let moment_gap = line_first_moment(&line, &slice) - line_first_moment(&line, &sym);
    let off = (0..k).map(|i| m[(i, k)].powi(2)).sum::<f64>().sqrt();
    Ok(CrossTerm { lhs, rhs: moment_gap * off, moment_gap })
}
