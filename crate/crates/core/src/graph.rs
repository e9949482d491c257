//! Mass, barycenter and perimeter of subgraph regions, computed in the
//! rotated frame where the region is {(z, y) : y < h(z)}.

use crate::error::Result;
use crate::gaussline::LineGaussian;
use crate::linalg::{conjugate, SpdMatrix};
use crate::measures::{Method, MeasureResult, QuadratureConfig, VectorResult};
use crate::quadrature::gauss_legendre;
use crate::sets::SubgraphRegion;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Column {
    Outside,
    Dust,
    Full,
    Finite,
}

fn column(corners: &[f64]) -> Column {
    if corners.contains(&f64::NEG_INFINITY) {
        Column::Dust
    } else if corners.contains(&f64::INFINITY) {
        Column::Full
    } else {
        Column::Finite
    }
}

// Top of a column given the height of the finite interpolant at that point.
fn top(c: Column, h: f64) -> f64 {
    match c {
        Column::Outside | Column::Dust => f64::NEG_INFINITY,
        Column::Full => f64::INFINITY,
        Column::Finite => h,
    }
}

/// Restricted form in the rotated frame: vertical lines and the full quadratic.
struct FrameForm {
    m: Vec<Vec<f64>>,
}

impl FrameForm {
    fn vertical(&self, z: &[f64]) -> LineGaussian {
        let k = z.len();
        let beta = (0..k).map(|i| self.m[k][i] * z[i]).sum();
        let gamma0 = (0..k).map(|i| (0..k).map(|j| self.m[i][j] * z[i] * z[j]).sum::<f64>()).sum();
        LineGaussian::new(self.m[k][k], beta, gamma0)
    }

    fn quad(&self, x: &[f64]) -> f64 {
        (0..x.len()).map(|i| (0..x.len()).map(|j| self.m[i][j] * x[i] * x[j]).sum::<f64>()).sum()
    }

    fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..x.len()).map(|i| (0..x.len()).map(|j| self.m[i][j] * x[i] * y[j]).sum::<f64>()).sum()
    }
}

fn frame_form(a: &SpdMatrix, s: &SubgraphRegion) -> Result<FrameForm> {
    let app = conjugate(a, s.rotation())?;
    Ok(FrameForm { m: app.entries().rows() })
}

fn add(acc: &mut [f64], v: &[f64]) {
    acc.iter_mut().zip(v).for_each(|(a, v)| *a += v);
}

// [mass, ∫z_0, …, ∫y] over the region in frame units, using `m` nodes per
// cell axis.
fn raw_moments(form: &FrameForm, s: &SubgraphRegion, m: usize) -> Vec<f64> {
    let k = s.base_dim();
    let rule = gauss_legendre(m);
    let point = |z: &[f64], h: f64, col: Column, w: f64, acc: &mut [f64]| {
        let line = form.vertical(z);
        let (mass, first) = match col {
            Column::Full => (line.total_mass(), line.interval_first_moment(f64::NEG_INFINITY, f64::INFINITY)),
            _ => (line.interval_mass(f64::NEG_INFINITY, h), line.interval_first_moment(f64::NEG_INFINITY, h)),
        };
        acc[0] += w * mass;
        for i in 0..k {
            acc[1 + i] += w * z[i] * mass;
        }
        acc[1 + k] += w * first;
    };
    if k == 1 {
        let dz = s.spacing(0);
        let mut acc = vec![0.0; 3];
        for i in 0..s.nodes()[0] - 1 {
            let (h0, h1) = (s.heights()[i], s.heights()[i + 1]);
            let col = column(&[h0, h1]);
            if col == Column::Dust {
                continue;
            }
            let z0 = s.node_coord(0, i);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let r = 0.5 * (x + 1.0);
                point(&[z0 + r * dz], h0 + r * (h1 - h0), col, 0.5 * w * dz, &mut acc);
            }
        }
        acc
    } else {
        let (d0, d1) = (s.spacing(0), s.spacing(1));
        let rows: Vec<Vec<f64>> = (0..s.nodes()[0] - 1)
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![0.0; 4];
                for j in 0..s.nodes()[1] - 1 {
                    let c = [
                        s.node_height(&[i, j]),
                        s.node_height(&[i + 1, j]),
                        s.node_height(&[i, j + 1]),
                        s.node_height(&[i + 1, j + 1]),
                    ];
                    let col = column(&c);
                    if col == Column::Dust {
                        continue;
                    }
                    let (z0, z1) = (s.node_coord(0, i), s.node_coord(1, j));
                    for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
                        let p = 0.5 * (x + 1.0);
                        for (y, wy) in rule.nodes.iter().zip(&rule.weights) {
                            let r = 0.5 * (y + 1.0);
                            let h = c[0] * (1.0 - p) * (1.0 - r) + c[1] * p * (1.0 - r) + c[2] * (1.0 - p) * r + c[3] * p * r;
                            point(&[z0 + p * d0, z1 + r * d1], h, col, 0.25 * wx * wy * d0 * d1, &mut acc);
                        }
                    }
                }
                acc
            })
            .collect();
        let mut acc = vec![0.0; 4];
        for r in &rows {
            add(&mut acc, r);
        }
        acc
    }
}

fn truncated_sides(s: &SubgraphRegion) -> usize {
    s.truncated().iter().flatten().filter(|&&t| t).count()
}

/// Mass and barycenter of a subgraph region.
pub(crate) fn moments(
    a: &SpdMatrix,
    s: &SubgraphRegion,
    cfg: &QuadratureConfig,
) -> Result<(MeasureResult, VectorResult)> {
    a.check_dim(s.dim())?;
    let n = s.dim();
    let form = frame_form(a, s)?;
    let order = if n == 2 { 8 } else { 4 };
    let fine = raw_moments(&form, s, order);
    let low = raw_moments(&form, s, order / 2);
    let mut err = fine.iter().zip(&low).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if let Some(c) = s.coarsened() {
        let coarse = raw_moments(&form, &c, order);
        err = err.max(fine.iter().zip(&coarse).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())));
    }
    let pre = a.det().sqrt() / (2.0 * PI).powf(0.5 * n as f64);
    let err = err * pre + cfg.tail_tol * truncated_sides(s) as f64;
    let frame_b: Vec<f64> = fine[1..].iter().map(|x| x * pre).collect();
    Ok((
        MeasureResult { value: (fine[0] * pre).clamp(0.0, 1.0), error_estimate: err, method: Method::GraphQuadrature },
        VectorResult {
            value: s.rotation().apply(&frame_b),
            error_estimate: err * a.inv_sqrt_norm().max(1.0),
            method: Method::GraphQuadrature,
        },
    ))
}

/// (value, error) of the graph and wall integrals in frame units.
fn raw_perimeter(form: &FrameForm, s: &SubgraphRegion, m: usize) -> (f64, f64) {
    if s.base_dim() == 1 {
        perimeter_2d(form, s)
    } else {
        perimeter_3d(form, s, m)
    }
}

fn perimeter_2d(form: &FrameForm, s: &SubgraphRegion) -> (f64, f64) {
    let n = s.nodes()[0];
    let h = s.heights();
    let dz = s.spacing(0);
    let cell = |i: isize| -> Column {
        if i < 0 || i as usize >= n - 1 {
            Column::Outside
        } else {
            column(&[h[i as usize], h[i as usize + 1]])
        }
    };
    let mut value = 0.0;
    let mut error = 0.0;
    for i in 0..n - 1 {
        if cell(i as isize) != Column::Finite {
            continue;
        }
        let p = [s.node_coord(0, i), h[i]];
        let d = [dz, h[i + 1] - h[i]];
        let len = d[0].hypot(d[1]);
        let e = [d[0] / len, d[1] / len];
        let line = LineGaussian::new(form.quad(&e), form.bilinear(&p, &e), form.quad(&p));
        value += line.interval_mass(0.0, len);
    }
    for i in 0..n {
        let (l, r) = (cell(i as isize - 1), cell(i as isize));
        let (tl, tr) = (top(l, h[i]), top(r, h[i]));
        if tl == tr {
            continue;
        }
        let wall = form.vertical(&[s.node_coord(0, i)]).interval_mass(tl.min(tr), tl.max(tr));
        let side = if i == 0 { Some(0) } else if i == n - 1 { Some(1) } else { None };
        if side.is_some_and(|k| s.truncated()[0][k]) {
            error += wall;
        } else {
            value += wall;
        }
    }
    (value, error)
}

fn perimeter_3d(form: &FrameForm, s: &SubgraphRegion, m: usize) -> (f64, f64) {
    let (n0, n1) = (s.nodes()[0], s.nodes()[1]);
    let (d0, d1) = (s.spacing(0), s.spacing(1));
    let rule = gauss_legendre(m);
    let low = gauss_legendre((m / 2).max(1));
    let cell = |i: isize, j: isize| -> (Column, [f64; 4]) {
        if i < 0 || j < 0 || i as usize >= n0 - 1 || j as usize >= n1 - 1 {
            return (Column::Outside, [0.0; 4]);
        }
        let (i, j) = (i as usize, j as usize);
        let c = [
            s.node_height(&[i, j]),
            s.node_height(&[i + 1, j]),
            s.node_height(&[i, j + 1]),
            s.node_height(&[i + 1, j + 1]),
        ];
        (column(&c), c)
    };
    let graph = |rule: &crate::quadrature::Rule, z0: f64, z1: f64, c: &[f64; 4]| -> f64 {
        let mut acc = 0.0;
        for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
            let p = 0.5 * (x + 1.0);
            for (y, wy) in rule.nodes.iter().zip(&rule.weights) {
                let r = 0.5 * (y + 1.0);
                let h = c[0] * (1.0 - p) * (1.0 - r) + c[1] * p * (1.0 - r) + c[2] * (1.0 - p) * r + c[3] * p * r;
                let g0 = ((c[1] - c[0]) * (1.0 - r) + (c[3] - c[2]) * r) / d0;
                let g1 = ((c[2] - c[0]) * (1.0 - p) + (c[3] - c[1]) * p) / d1;
                let x = [z0 + p * d0, z1 + r * d1, h];
                acc += 0.25 * wx * wy * d0 * d1 * (-0.5 * form.quad(&x)).exp() * (1.0 + g0 * g0 + g1 * g1).sqrt();
            }
        }
        acc
    };
    // wall along an edge from `start` in direction `axis`, heights ha → hb
    let wall = |start: [f64; 2], axis: usize, len: f64, l: Column, r: Column, ha: f64, hb: f64| -> f64 {
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let q = 0.5 * (x + 1.0);
            let mut z = start;
            z[axis] += q * len;
            let h = ha + q * (hb - ha);
            let (tl, tr) = (top(l, h), top(r, h));
            if tl != tr {
                acc += 0.5 * w * len * form.vertical(&z).interval_mass(tl.min(tr), tl.max(tr));
            }
        }
        acc
    };
    let stair = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let rows: Vec<(f64, f64)> = (0..n0)
        .into_par_iter()
        .map(|i| {
            let (mut value, mut error) = (0.0, 0.0);
            let z0 = s.node_coord(0, i);
            for j in 0..n1 {
                let z1 = s.node_coord(1, j);
                let (col, c) = cell(i as isize, j as isize);
                if col == Column::Finite {
                    let g = graph(&rule, z0, z1, &c);
                    value += g;
                    error += (g - graph(&low, z0, z1, &c)).abs();
                }
                // edge at z0 = node i spanning [z1, z1 + d1]
                if j + 1 < n1 {
                    let (l, _) = cell(i as isize - 1, j as isize);
                    let ha = s.node_height(&[i, j]);
                    let hb = s.node_height(&[i, j + 1]);
                    let w = wall([z0, z1], 1, d1, l, col, ha, hb);
                    if i == 0 || i == n0 - 1 {
                        if s.truncated()[0][usize::from(i != 0)] {
                            error += w;
                        } else {
                            value += w;
                        }
                    } else {
                        value += w;
                        error += stair * w;
                    }
                }
                // edge at z1 = node j spanning [z0, z0 + d0]
                if i + 1 < n0 {
                    let (b, _) = cell(i as isize, j as isize - 1);
                    let ha = s.node_height(&[i, j]);
                    let hb = s.node_height(&[i + 1, j]);
                    let w = wall([z0, z1], 0, d0, b, col, ha, hb);
                    if j == 0 || j == n1 - 1 {
                        if s.truncated()[1][usize::from(j != 0)] {
                            error += w;
                        } else {
                            value += w;
                        }
                    } else {
                        value += w;
                        error += stair * w;
                    }
                }
            }
            (value, error)
        })
        .collect();
    rows.iter().fold((0.0, 0.0), |(v, e), (a, b)| (v + a, e + b))
}

/// Perimeter of a subgraph region: graph area plus vertical walls.
pub(crate) fn perimeter(a: &SpdMatrix, s: &SubgraphRegion, cfg: &QuadratureConfig) -> Result<MeasureResult> {
    a.check_dim(s.dim())?;
    let n = s.dim();
    let form = frame_form(a, s)?;
    let (value, mut err) = raw_perimeter(&form, s, 4);
    if let Some(c) = s.coarsened() {
        err += (value - raw_perimeter(&form, &c, 4).0).abs();
    }
    let pre = a.det().sqrt() / (2.0 * PI).powf(0.5 * (n as f64 - 1.0));
    let tail = cfg.tail_tol * truncated_sides(s) as f64;
    Ok(MeasureResult { value: value * pre, error_estimate: err * pre + tail, method: Method::GraphQuadrature })
}
