//! Brute-force vertex enumeration for small H-polyhedra.

pub(crate) const MAXD: usize = 5;

/// a·x ≤ b in at most `MAXD` variables.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Halfspace {
    pub a: [f64; MAXD],
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: &[f64], b: f64) -> Self {
        let mut arr = [0.0; MAXD];
        arr[..a.len()].copy_from_slice(a);
        Self { a: arr, b }
    }

    /// x_k ≤ hi.
    pub fn axis_upper(k: usize, hi: f64) -> Self {
        let mut a = [0.0; MAXD];
        a[k] = 1.0;
        Self { a, b: hi }
    }

    /// x_k ≥ lo.
    pub fn axis_lower(k: usize, lo: f64) -> Self {
        let mut a = [0.0; MAXD];
        a[k] = -1.0;
        Self { a, b: -lo }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum()
    }
}

// Gaussian elimination with partial pivoting on a d×d system.
fn solve(d: usize, rows: &[&Halfspace]) -> Option<[f64; MAXD]> {
    let mut m = [[0.0; MAXD + 1]; MAXD];
    let mut scale = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            m[i][j] = rows[i].a[j];
            scale = scale.max(m[i][j].abs());
        }
        m[i][d] = rows[i].b;
    }
    for k in 0..d {
        let mut p = k;
        for i in k + 1..d {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(p, k);
        for i in k + 1..d {
            let l = m[i][k] / m[k][k];
            if l != 0.0 {
                for j in k..=d {
                    m[i][j] -= l * m[k][j];
                }
            }
        }
    }
    let mut x = [0.0; MAXD];
    for i in (0..d).rev() {
        let mut s = m[i][d];
        for j in i + 1..d {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

pub(crate) fn feasible(cons: &[Halfspace], d: usize, x: &[f64; MAXD], rel: f64) -> bool {
    let xs = x[..d].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    cons.iter().all(|c| {
        let an = c.a[..d].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        c.eval(&x[..d]) <= c.b + rel * (1.0 + c.b.abs() + an * xs)
    })
}

/// All vertices of {x ∈ R^d : a_i·x ≤ b_i}. The system must be bounded for the
/// result to describe it (callers add box faces).
pub(crate) fn vertices(cons: &[Halfspace], d: usize) -> Vec<[f64; MAXD]> {
    let m = cons.len();
    let mut out = Vec::new();
    if d == 0 || m < d {
        return out;
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let rows: Vec<&Halfspace> = idx.iter().map(|&i| &cons[i]).collect();
        if let Some(x) = solve(d, &rows) {
            if feasible(cons, d, &x, 1e-9) {
                out.push(x);
            }
        }
        // next combination
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < m - d + k {
                idx[k] += 1;
                for j in k + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
