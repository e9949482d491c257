//! Set families and the one primitive everything else needs: the exact
//! intersection of a line z + tu with a set.

use crate::error::{Error, Result};
use crate::gaussline::IntervalUnion;
use crate::linalg::{dot, norm, Direction, Matrix, Rotation};
use crate::polyhedra::{self, Halfspace};

/// Polytopes produced by enlargement of many-sided polygons need room beyond
/// the usual handful of facets.
pub const MAX_CONSTRAINTS: usize = 512;

/// Largest ambient dimension for polytopes and boxes (vertex enumeration and
/// nested quadrature cost grow steeply beyond it).
pub const MAX_POLYTOPE_DIM: usize = 4;

/// H(ω, t) = {x : ⟨x,ω⟩ < t}.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceSet {
    pub omega: Direction,
    pub t: f64,
}

impl HalfSpaceSet {
    pub fn new(omega: Direction, t: f64) -> Self {
        Self { omega, t }
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dot(x, self.omega.as_slice()) < self.t
    }

    /// Exact image under an invertible M: H((Mᵀ)^{-1}ω/|·|, t/|(Mᵀ)^{-1}ω|).
    pub fn transform_with_inverse(&self, m_inv: &Matrix) -> Self {
        let w = m_inv.tr_mul_vec(self.omega.as_slice());
        let s = norm(&w);
        Self { omega: Direction::new(w).expect("image normal is nonzero"), t: self.t / s }
    }
}

/// Intersection of open half-spaces; may be unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeSet {
    dim: usize,
    constraints: Vec<HalfSpaceSet>,
    witness: Vec<f64>,
}

impl PolytopeSet {
    pub fn new(dim: usize, constraints: Vec<HalfSpaceSet>) -> Result<Self> {
        if dim == 0 || dim > MAX_POLYTOPE_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::TooManyConstraints(constraints.len()));
        }
        let mut kept: Vec<HalfSpaceSet> = Vec::with_capacity(constraints.len());
        for c in constraints {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
            }
            if !c.t.is_finite() {
                if c.t == f64::INFINITY {
                    continue;
                }
                return Err(Error::EmptyInterior);
            }
            // parallel duplicates: keep the tighter one so facets are not double counted
            match kept.iter_mut().find(|k| {
                k.omega.as_slice().iter().zip(c.omega.as_slice()).all(|(a, b)| (a - b).abs() < 1e-12)
            }) {
                Some(k) => k.t = k.t.min(c.t),
                None => kept.push(c),
            }
        }
        let witness = interior_witness(dim, &kept)?;
        Ok(Self { dim, constraints: kept, witness })
    }

    /// The whole space.
    pub fn everything(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// Convex hull of planar points (counterclockwise facets).
    pub fn from_vertices_2d(points: &[[f64; 2]]) -> Result<Self> {
        let hull = convex_hull(points);
        if hull.len() < 3 {
            return Err(Error::EmptyInterior);
        }
        let mut cons = Vec::with_capacity(hull.len());
        for i in 0..hull.len() {
            let p = hull[i];
            let q = hull[(i + 1) % hull.len()];
            let nrm = Direction::new(vec![q[1] - p[1], p[0] - q[0]])?;
            let t = dot(nrm.as_slice(), &p);
            cons.push(HalfSpaceSet::new(nrm, t));
        }
        Self::new(2, cons)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[HalfSpaceSet] {
        &self.constraints
    }

    pub fn witness(&self) -> &[f64] {
        &self.witness
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.contains(x))
    }

    /// {t : z + tu ∈ E}, always a single interval.
    pub fn slice(&self, z: &[f64], u: &[f64]) -> IntervalUnion {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for c in &self.constraints {
            let s = dot(u, c.omega.as_slice());
            let r = c.t - dot(z, c.omega.as_slice());
            if s.abs() <= 1e-15 {
                if r <= 0.0 {
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

    /// Vertices in counterclockwise order for a bounded planar polytope.
    pub fn vertices_2d(&self) -> Option<Vec<[f64; 2]>> {
        if self.dim != 2 {
            return None;
        }
        let cons: Vec<Halfspace> =
            self.constraints.iter().map(|c| Halfspace::new(c.omega.as_slice(), c.t)).collect();
        let raw = polyhedra::vertices(&cons, 2);
        let pts: Vec<[f64; 2]> = raw.iter().map(|v| [v[0], v[1]]).collect();
        let hull = convex_hull(&pts);
        // bounded iff every facet direction is blocked: check by comparing with a boxed hull
        let boxed = {
            let mut c = cons.clone();
            let big = 1e9;
            for k in 0..2 {
                c.push(Halfspace::axis_upper(k, big));
                c.push(Halfspace::axis_lower(k, -big));
            }
            polyhedra::vertices(&c, 2)
        };
        if boxed.iter().any(|v| v[0].abs() > 1e8 || v[1].abs() > 1e8) || hull.len() < 3 {
            return None;
        }
        Some(hull)
    }

    fn transform_with_inverse(&self, m_inv: &Matrix) -> Result<Self> {
        Self::new(self.dim, self.constraints.iter().map(|c| c.transform_with_inverse(m_inv)).collect())
    }
}

fn interior_witness(dim: usize, cons: &[HalfSpaceSet]) -> Result<Vec<f64>> {
    let scale = cons.iter().fold(1.0f64, |m, c| m.max(c.t.abs()));
    let big = 1e3 * scale;
    let mut sys: Vec<Halfspace> = cons.iter().map(|c| Halfspace::new(c.omega.as_slice(), c.t)).collect();
    for k in 0..dim {
        sys.push(Halfspace::axis_upper(k, big));
        sys.push(Halfspace::axis_lower(k, -big));
    }
    let verts = polyhedra::vertices(&sys, dim);
    if verts.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let mut w = vec![0.0; dim];
    for v in &verts {
        for k in 0..dim {
            w[k] += v[k] / verts.len() as f64;
        }
    }
    let wn = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let slack = cons.iter().map(|c| c.t - dot(&w, c.omega.as_slice())).fold(f64::INFINITY, f64::min);
    if !(slack > 1e-12 * (1.0 + wn)) {
        return Err(Error::EmptyInterior);
    }
    Ok(w)
}

// Andrew's monotone chain; counterclockwise, collinear points dropped.
fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p: Vec<[f64; 2]> = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if p.len() < 3 {
        return p;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 1e-14 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Axis-aligned box with extended-real bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.is_empty() {
            return Err(Error::InvalidInput("box must have at least one coordinate".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || *l == f64::INFINITY || *h == f64::NEG_INFINITY) {
            return Err(Error::EmptyInterior);
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((x, l), h)| l < x && x < h)
    }

    pub fn to_polytope(&self) -> Result<PolytopeSet> {
        let n = self.dim();
        let mut cons = Vec::new();
        for k in 0..n {
            if self.hi[k].is_finite() {
                cons.push(HalfSpaceSet::new(Direction::axis(n, k), self.hi[k]));
            }
            if self.lo[k].is_finite() {
                cons.push(HalfSpaceSet::new(Direction::axis(n, k).negated(), -self.lo[k]));
            }
        }
        PolytopeSet::new(n, cons)
    }
}

/// {O·(z, y) : z ∈ B, y < h(z)} with h interpolated from a regular grid over
/// the rectangle B ⊂ R^{n−1} (linear for n = 2, bilinear for n = 3).
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphRegion {
    rotation: Rotation,
    lo: Vec<f64>,
    hi: Vec<f64>,
    nodes: Vec<usize>,
    heights: Vec<f64>,
    truncated: Vec<[bool; 2]>,
}

impl SubgraphRegion {
    /// `heights` is row-major with the last base axis fastest. `truncated`
    /// marks rectangle sides that cut an unbounded shadow rather than follow
    /// the set's own boundary.
    pub fn new(
        rotation: Rotation,
        lo: Vec<f64>,
        hi: Vec<f64>,
        nodes: Vec<usize>,
        heights: Vec<f64>,
        truncated: Vec<[bool; 2]>,
    ) -> Result<Self> {
        let n = rotation.dim();
        let k = n.checked_sub(1).ok_or(Error::UnsupportedDimension(n))?;
        if !(1..=2).contains(&k) {
            return Err(Error::UnsupportedDimension(n));
        }
        for len in [lo.len(), hi.len(), nodes.len(), truncated.len()] {
            if len != k {
                return Err(Error::DimensionMismatch { expected: k, found: len });
            }
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
            return Err(Error::InvalidInput("subgraph base must be a bounded rectangle".into()));
        }
        if nodes.iter().any(|&c| c < 2) {
            return Err(Error::InvalidInput("subgraph grid needs at least two nodes per axis".into()));
        }
        let count: usize = nodes.iter().product();
        if heights.len() != count {
            return Err(Error::DimensionMismatch { expected: count, found: heights.len() });
        }
        if heights.iter().any(|h| h.is_nan()) {
            return Err(Error::InvalidInput("NaN height".into()));
        }
        Ok(Self { rotation, lo, hi, nodes, heights, truncated })
    }

    pub fn dim(&self) -> usize {
        self.rotation.dim()
    }

    pub fn base_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn truncated(&self) -> &[[bool; 2]] {
        &self.truncated
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.nodes[axis] - 1) as f64
    }

    pub fn node_coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.nodes[axis] {
            return self.hi[axis];
        }
        self.lo[axis] + i as f64 * self.spacing(axis)
    }

    /// Height at a multi-index.
    pub fn node_height(&self, idx: &[usize]) -> f64 {
        self.heights[self.flat(idx)]
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        match idx.len() {
            1 => idx[0],
            _ => idx[0] * self.nodes[1] + idx[1],
        }
    }

    /// Same region sampled on every other node; needs odd node counts.
    pub fn coarsened(&self) -> Option<Self> {
        if self.nodes.iter().any(|&c| c % 2 == 0 || c < 5) {
            return None;
        }
        let nodes: Vec<usize> = self.nodes.iter().map(|c| c.div_ceil(2)).collect();
        let heights = match self.base_dim() {
            1 => (0..nodes[0]).map(|i| self.heights[2 * i]).collect(),
            _ => (0..nodes[0])
                .flat_map(|i| (0..nodes[1]).map(move |j| (i, j)))
                .map(|(i, j)| self.node_height(&[2 * i, 2 * j]))
                .collect(),
        };
        Some(Self { nodes, heights, ..self.clone() })
    }

    /// Cell index and local coordinate along one axis; None outside [lo, hi].
    fn locate(&self, axis: usize, z: f64) -> Option<(usize, f64)> {
        if !(z >= self.lo[axis] && z <= self.hi[axis]) {
            return None;
        }
        let s = (z - self.lo[axis]) / self.spacing(axis);
        let i = (s.floor() as usize).min(self.nodes[axis] - 2);
        Some((i, s - i as f64))
    }

    /// Interpolated h at a base point; −∞ outside the rectangle.
    pub fn height_at(&self, z: &[f64]) -> f64 {
        match self.base_dim() {
            1 => match self.locate(0, z[0]) {
                None => f64::NEG_INFINITY,
                Some((i, s)) => combine(&[self.heights[i], self.heights[i + 1]], &[1.0 - s, s]),
            },
            _ => match (self.locate(0, z[0]), self.locate(1, z[1])) {
                (Some((i, s)), Some((j, r))) => combine(
                    &[
                        self.node_height(&[i, j]),
                        self.node_height(&[i + 1, j]),
                        self.node_height(&[i, j + 1]),
                        self.node_height(&[i + 1, j + 1]),
                    ],
                    &[(1.0 - s) * (1.0 - r), s * (1.0 - r), (1.0 - s) * r, s * r],
                ),
                _ => f64::NEG_INFINITY,
            },
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let xr = self.rotation.apply_inverse(x);
        let k = self.base_dim();
        xr[k] < self.height_at(&xr[..k])
    }

    /// Slice along ±(own axis) = ±O(−e_n).
    pub fn slice(&self, z: &[f64], u: &[f64]) -> Result<IntervalUnion> {
        let axis = self.rotation.axis_direction();
        let sign = if axis.iter().zip(u).all(|(a, b)| (a - b).abs() < 1e-9) {
            1.0
        } else if axis.iter().zip(u).all(|(a, b)| (a + b).abs() < 1e-9) {
            -1.0
        } else {
            return Err(Error::UnsupportedSliceDirection);
        };
        let zr = self.rotation.apply_inverse(z);
        let k = self.base_dim();
        let h = self.height_at(&zr[..k]);
        if h == f64::NEG_INFINITY {
            return Ok(IntervalUnion::empty());
        }
        if h == f64::INFINITY {
            return Ok(IntervalUnion::full());
        }
        // along the axis the frame height is y = zr_n − sign·t
        Ok(if sign > 0.0 {
            IntervalUnion::single(zr[k] - h, f64::INFINITY)
        } else {
            IntervalUnion::single(f64::NEG_INFINITY, h - zr[k])
        })
    }
}

// Linear/bilinear blend with the dust-dominates convention: any −∞ corner
// empties the cell, otherwise any +∞ corner fills it.
fn combine(vals: &[f64], w: &[f64]) -> f64 {
    if vals.contains(&f64::NEG_INFINITY) {
        return f64::NEG_INFINITY;
    }
    if vals.contains(&f64::INFINITY) {
        return f64::INFINITY;
    }
    vals.iter().zip(w).map(|(v, w)| v * w).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetRegion {
    HalfSpace(HalfSpaceSet),
    Polytope(PolytopeSet),
    Box(BoxSet),
    Subgraph(SubgraphRegion),
}

impl SetRegion {
    pub fn dim(&self) -> usize {
        match self {
            Self::HalfSpace(h) => h.dim(),
            Self::Polytope(p) => p.dim(),
            Self::Box(b) => b.dim(),
            Self::Subgraph(s) => s.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::HalfSpace(_) => "halfspace",
            Self::Polytope(_) => "polytope",
            Self::Box(_) => "box",
            Self::Subgraph(_) => "subgraph",
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::HalfSpace(h) => h.contains(x),
            Self::Polytope(p) => p.contains(x),
            Self::Box(b) => b.contains(x),
            Self::Subgraph(s) => s.contains(x),
        }
    }

    /// {t : z + tu ∈ E}.
    pub fn slice(&self, z: &[f64], u: &Direction) -> Result<IntervalUnion> {
        let n = self.dim();
        for len in [z.len(), u.dim()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        let u = u.as_slice();
        Ok(match self {
            Self::HalfSpace(h) => {
                let s = dot(u, h.omega.as_slice());
                let r = h.t - dot(z, h.omega.as_slice());
                if s.abs() <= 1e-15 {
                    if r > 0.0 { IntervalUnion::full() } else { IntervalUnion::empty() }
                } else if s > 0.0 {
                    IntervalUnion::single(f64::NEG_INFINITY, r / s)
                } else {
                    IntervalUnion::single(r / s, f64::INFINITY)
                }
            }
            Self::Polytope(p) => p.slice(z, u),
            Self::Box(b) => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for k in 0..n {
                    if u[k].abs() <= 1e-15 {
                        if !(b.lo[k] < z[k] && z[k] < b.hi[k]) {
                            return Ok(IntervalUnion::empty());
                        }
                    } else {
                        let (a, c) = ((b.lo[k] - z[k]) / u[k], (b.hi[k] - z[k]) / u[k]);
                        lo = lo.max(a.min(c));
                        hi = hi.min(a.max(c));
                    }
                }
                IntervalUnion::single(lo, hi)
            }
            Self::Subgraph(s) => s.slice(z, u)?,
        })
    }

    /// Constraint form of half-spaces, polytopes and boxes.
    pub fn to_polytope(&self) -> Result<PolytopeSet> {
        match self {
            Self::HalfSpace(h) => PolytopeSet::new(h.dim(), vec![h.clone()]),
            Self::Polytope(p) => Ok(p.clone()),
            Self::Box(b) => b.to_polytope(),
            Self::Subgraph(_) => Err(Error::UnsupportedVariant("subgraph")),
        }
    }

    /// Exact image M(E).
    pub fn transform(&self, m: &Matrix) -> Result<SetRegion> {
        if m.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: m.dim() });
        }
        let m_inv = m.inverse()?;
        match self {
            Self::HalfSpace(h) => Ok(Self::HalfSpace(h.transform_with_inverse(&m_inv))),
            Self::Polytope(p) => Ok(Self::Polytope(p.transform_with_inverse(&m_inv)?)),
            Self::Box(b) => Ok(Self::Polytope(b.to_polytope()?.transform_with_inverse(&m_inv)?)),
            Self::Subgraph(_) => Err(Error::UnsupportedVariant("subgraph")),
        }
    }
}

/// Polytope `E` expressed in the frame x' = Oᵀx.
pub(crate) fn rotate_into_frame(p: &PolytopeSet, o: &Rotation) -> Result<PolytopeSet> {
    PolytopeSet::new(
        p.dim(),
        p.constraints()
            .iter()
            .map(|c| HalfSpaceSet::new(Direction::new(o.apply_inverse(c.omega.as_slice())).unwrap(), c.t))
            .collect(),
    )
}
