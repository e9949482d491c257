use crate::input::{load_matrix, load_set, matrix_json, parse_direction, parse_list, set_json, Res};
use crate::json::Json;
use crate::{AuditArgs, CounterexampleArgs, EnlargeArgs, IsoArgs, OracleArgs, Quadrature, SetArgs, SymmetrizeArgs};
use anigauss::gaussline::{std_normal_pdf, std_normal_quantile};
use anigauss::isoperimetry::iso_bound;
use anigauss::linalg::{eigen_residual, eigenspace_membership, norm, Direction, SpdMatrix};
use anigauss::measures::{
    halfspace_perimeter, mass, mass_and_barycenter, minkowski_enlarge_inner, normal_scale, perimeter, MeasureResult,
    QuadratureConfig, VectorResult,
};
use anigauss::oracle::{grid_perimeter_2d, mc_barycenter, mc_mass, McEstimate};
use anigauss::sets::{HalfSpaceSet, SetRegion};
use anigauss::symmetrize::{counterexample_scan, direction_gradient, symmetrization_report, GridSpec};

pub struct Outcome {
    pub report: Json,
    pub csv: Option<String>,
    /// Set when a checked inequality fails beyond its tolerance.
    pub violation: Option<String>,
}

impl Outcome {
    fn report(report: Json) -> Self {
        Self { report, csv: None, violation: None }
    }
}

/// Gradient norms at or below this count as zero.
const FLAT: f64 = 1e-10;
/// Relative eigen-residual tolerance.
const EIGEN_TOL: f64 = 1e-9;
/// Absolute slack allowed in the enlargement inequality.
const ENLARGE_TOL: f64 = 1e-7;

fn lib<T>(r: anigauss::Result<T>) -> Res<T> {
    r.map_err(|e| e.to_string())
}

fn config(q: &Quadrature) -> Res<QuadratureConfig> {
    let mut cfg = QuadratureConfig::default();
    if let Some(r) = q.rel_tol {
        cfg.rel_tol = r;
    }
    if let Some(t) = q.tail_tol {
        cfg.tail_tol = t;
    }
    lib(cfg.validate())?;
    Ok(cfg)
}

fn config_json(cfg: &QuadratureConfig) -> Json {
    Json::obj(vec![
        ("base_rule", cfg.base_rule.into()),
        ("panels_per_axis", cfg.panels_per_axis.into()),
        ("rel_tol", cfg.rel_tol.into()),
        ("tail_tol", cfg.tail_tol.into()),
    ])
}

struct Loaded {
    a: SpdMatrix,
    e: SetRegion,
    cfg: QuadratureConfig,
}

impl Loaded {
    fn echo(&self) -> Vec<(&'static str, Json)> {
        vec![
            ("matrix", matrix_json(self.a.entries())),
            ("set", set_json(&self.e)),
            ("quadrature", config_json(&self.cfg)),
        ]
    }
}

fn load(args: &SetArgs) -> Res<Loaded> {
    let a = load_matrix(&args.matrix)?;
    let e = load_set(&args.set)?;
    if a.dim() != e.dim() {
        return Err(format!("the matrix is {0}×{0} but the set lives in dimension {1}", a.dim(), e.dim()));
    }
    Ok(Loaded { a, e, cfg: config(&args.quad)? })
}

fn measure_json(m: &MeasureResult) -> Json {
    Json::obj(vec![
        ("value", m.value.into()),
        ("error_estimate", m.error_estimate.into()),
        ("method", m.method.as_str().into()),
    ])
}

fn vector_json(v: &VectorResult) -> Json {
    Json::obj(vec![
        ("value", v.value.as_slice().into()),
        ("error_estimate", v.error_estimate.into()),
        ("method", v.method.as_str().into()),
    ])
}

fn mc_json(m: &McEstimate) -> Json {
    Json::obj(vec![
        ("value", m.value.into()),
        ("std_error", m.std_error.into()),
        ("n_samples", m.n_samples.into()),
        ("seed", m.seed.into()),
    ])
}

fn csv_num(x: f64) -> String {
    crate::json::number(x).trim_matches('"').to_string()
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| csv_num(v)).collect::<Vec<_>>().join(",") + "\n"
}

fn single(command: &str, l: &Loaded, key: &str, value: Json) -> Outcome {
    let mut f = vec![("command", command.into()), ("set_kind", l.e.kind().into()), ("dim", l.a.dim().into()), (key, value)];
    f.push(("config", Json::obj(l.echo())));
    Outcome::report(Json::obj(f))
}

pub fn measure(args: &SetArgs) -> Res<Outcome> {
    let l = load(args)?;
    let m = lib(mass(&l.a, &l.e, &l.cfg))?;
    Ok(single("measure", &l, "mass", measure_json(&m)))
}

pub fn perimeter_report(args: &SetArgs) -> Res<Outcome> {
    let l = load(args)?;
    let p = lib(perimeter(&l.a, &l.e, &l.cfg))?;
    Ok(single("perimeter", &l, "perimeter", measure_json(&p)))
}

pub fn barycenter(args: &SetArgs) -> Res<Outcome> {
    let l = load(args)?;
    let b = lib(anigauss::measures::barycenter(&l.a, &l.e, &l.cfg))?;
    Ok(single("barycenter", &l, "barycenter", vector_json(&b)))
}

pub fn symmetrize(args: &SymmetrizeArgs) -> Res<Outcome> {
    let l = load(&args.set)?;
    let u = parse_direction(&args.direction, l.a.dim())?;
    let grid = GridSpec { nodes: args.grid, ..Default::default() };
    let r = lib(symmetrization_report(&l.a, &l.e, &u, &l.cfg, &grid))?;

    let mut problems = Vec::new();
    if !r.inequality_holds() {
        problems.push(format!("inequality slack {:e} below −{:e}", r.inequality_slack, r.slack_tolerance));
    }
    if !r.mass_preserved() {
        problems.push(format!("mass drift {:e}", r.mass_after.value - r.mass_before.value));
    }
    if r.slice_decrease_violations > 0 {
        problems.push(format!("{} slices with increased perimeter", r.slice_decrease_violations));
    }

    let k = l.a.dim() - 1;
    let mut csv = String::new();
    csv.push_str(if k == 1 { "z,h,p_E,p_Es\n" } else { "z1,z2,h,p_E,p_Es\n" });
    for row in &r.profile {
        let mut v = row.z.clone();
        v.extend([row.height, row.slice_perimeter, row.symmetric_slice_perimeter]);
        csv.push_str(&csv_row(&v));
    }

    let mut echo = l.echo();
    echo.push(("direction", u.as_slice().into()));
    echo.push(("grid", Json::obj(vec![("nodes", grid.nodes.into()), ("tail_tol", grid.tail_tol.into())])));
    let report = Json::obj(vec![
        ("command", "symmetrize".into()),
        ("mass_before", measure_json(&r.mass_before)),
        ("mass_after", measure_json(&r.mass_after)),
        ("mass_preserved", r.mass_preserved().into()),
        ("perimeter_before", measure_json(&r.perimeter_before)),
        ("perimeter_after", measure_json(&r.perimeter_after)),
        ("barycenter_before", vector_json(&r.barycenter_before)),
        ("barycenter_after", vector_json(&r.barycenter_after)),
        ("barycenter_shift", r.barycenter_shift.into()),
        ("error_term", r.error_term.into()),
        ("inequality_slack", r.inequality_slack.into()),
        ("slack_tolerance", r.slack_tolerance.into()),
        ("inequality_holds", r.inequality_holds().into()),
        ("slices_sampled", r.slices_sampled.into()),
        ("slice_decrease_violations", r.slice_decrease_violations.into()),
        ("dust_nodes", r.dust_nodes.into()),
        ("full_nodes", r.full_nodes.into()),
        ("direction_gradient", r.direction_gradient.as_slice().into()),
        ("direction_is_eigen", r.direction_is_eigen.into()),
        ("symmetrized", set_json(&SetRegion::Subgraph(r.symmetrized.clone()))),
        ("config", Json::obj(echo)),
    ]);
    Ok(Outcome { report, csv: Some(csv), violation: (!problems.is_empty()).then(|| problems.join("; ")) })
}

pub fn iso_check(args: &IsoArgs) -> Res<Outcome> {
    let l = load(&args.set)?;
    let r = lib(anigauss::isoperimetry::iso_check(&l.a, &l.e, &l.cfg))?;

    // half-spaces normal to the input's own normal, or to the top eigenvector
    let omega = match &l.e {
        SetRegion::HalfSpace(h) => h.omega.clone(),
        _ => lib(Direction::new(l.a.eigenvectors().column(l.a.dim() - 1)))?,
    };
    let scale = normal_scale(&l.a, &omega);
    let mut csv = String::from("mass,bound,halfspace_perimeter,deficit\n");
    for i in 1..100 {
        let m = i as f64 / 100.0;
        let h = HalfSpaceSet::new(omega.clone(), lib(std_normal_quantile(m))? * scale);
        let p = lib(halfspace_perimeter(&l.a, &h))?.value;
        let b = lib(iso_bound(&l.a, m))?;
        csv.push_str(&csv_row(&[m, b, p, p - b]));
    }

    let mut echo = l.echo();
    echo.push(("curve_normal", omega.as_slice().into()));
    let report = Json::obj(vec![
        ("command", "iso-check".into()),
        ("mass", measure_json(&r.mass)),
        ("perimeter", measure_json(&r.perimeter)),
        ("bound", r.bound.into()),
        ("deficit", r.deficit.into()),
        ("tolerance", r.tolerance.into()),
        ("holds", r.holds().into()),
        ("config", Json::obj(echo)),
    ]);
    let violation = (!r.holds()).then(|| format!("deficit {:e} below −{:e}", r.deficit, r.tolerance));
    Ok(Outcome { report, csv: Some(csv), violation })
}

pub fn enlarge_check(args: &EnlargeArgs) -> Res<Outcome> {
    let l = load(&args.set)?;
    let eps = args.epsilon;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(format!("--epsilon must be positive, got {eps}"));
    }
    let grown = lib(minkowski_enlarge_inner(&l.e, eps))?;
    let m0 = lib(mass(&l.a, &l.e, &l.cfg))?;
    let m1 = lib(mass(&l.a, &grown, &l.cfg))?;
    let quantile = |m: f64| lib(std_normal_quantile(m)).map_err(|e| format!("mass {m} has no finite quantile: {e}"));
    let (q0, q1) = (quantile(m0.value)?, quantile(m1.value)?);
    let gain = q1 - q0;
    let bound = eps / l.a.inv_sqrt_norm();
    let tolerance =
        ENLARGE_TOL + 10.0 * (m0.error_estimate / std_normal_pdf(q0) + m1.error_estimate / std_normal_pdf(q1));
    let slack = gain - bound;
    let facets = match &grown {
        SetRegion::Polytope(p) => p.constraints().len(),
        _ => 1,
    };
    let mut echo = l.echo();
    echo.push(("epsilon", eps.into()));
    let report = Json::obj(vec![
        ("command", "enlarge-check".into()),
        ("mass", measure_json(&m0)),
        ("enlarged_mass", measure_json(&m1)),
        ("enlarged_facets", facets.into()),
        ("quantile_gain", gain.into()),
        ("bound", bound.into()),
        ("slack", slack.into()),
        ("tolerance", tolerance.into()),
        ("holds", (slack >= -tolerance).into()),
        ("config", Json::obj(echo)),
    ]);
    let violation = (slack < -tolerance).then(|| format!("quantile gain {gain:e} below ε/‖(√A)^-1‖ = {bound:e}"));
    Ok(Outcome { report, csv: None, violation })
}

pub fn counterexample(args: &CounterexampleArgs) -> Res<Outcome> {
    let alphas = parse_list(&args.alphas, "--alphas")?;
    let cfg = config(&args.quad)?;
    let grid = GridSpec { nodes: args.grid, ..Default::default() };
    let s = lib(counterexample_scan(args.a, args.b, args.c, &alphas, &cfg, &grid))?;
    let strict = s.rows.iter().all(|r| r.perimeter_symmetrized > r.perimeter_set);

    let mut csv = String::from("alpha,P_E,P_Es,error_term,slope1,slope2\n");
    let mut rows = Vec::new();
    for r in &s.rows {
        let slope2 = r.error_term / r.alpha;
        csv.push_str(&csv_row(&[r.alpha, r.perimeter_set, r.perimeter_symmetrized, r.error_term, r.gap_quotient, slope2]));
        rows.push(Json::obj(vec![
            ("alpha", r.alpha.into()),
            ("P_E", r.perimeter_set.into()),
            ("P_Es", r.perimeter_symmetrized.into()),
            ("error_term", r.error_term.into()),
            ("slope1", r.gap_quotient.into()),
            ("slope2", slope2.into()),
            ("corrected_quotient", r.corrected_quotient.into()),
        ]));
    }
    let report = Json::obj(vec![
        ("command", "counterexample".into()),
        ("rows", Json::Arr(rows)),
        ("strict_increase", strict.into()),
        ("gap_slope", s.gap_slope.into()),
        ("analytic_gap_slope", s.analytic_gap_slope.into()),
        ("error_term_slope", s.error_term_slope.into()),
        ("analytic_error_term_slope", s.analytic_error_term_slope.into()),
        ("corrected_slope", s.corrected_slope.into()),
        ("analytic_corrected_slope", s.analytic_corrected_slope.into()),
        ("empirical_order", s.empirical_order.into()),
        ("height_at_origin", s.height_at_origin.into()),
        ("slope_at_origin", s.slope_at_origin.into()),
        ("analytic_slope_at_origin", (-2.0 * args.b / args.c).into()),
        (
            "config",
            Json::obj(vec![
                ("a", args.a.into()),
                ("b", args.b.into()),
                ("c", args.c.into()),
                ("alphas", alphas.into()),
                ("grid", Json::obj(vec![("nodes", grid.nodes.into()), ("tail_tol", grid.tail_tol.into())])),
                ("quadrature", config_json(&cfg)),
            ]),
        ),
    ]);
    Ok(Outcome { report, csv: Some(csv), violation: None })
}

struct AuditRow {
    u: Direction,
    gradient: Vec<f64>,
    residual: f64,
    eigenvalue: Option<f64>,
}

impl AuditRow {
    fn new(a: &SpdMatrix, u: Direction) -> Res<Self> {
        Ok(Self {
            gradient: lib(direction_gradient(a, &u))?,
            residual: eigen_residual(a, &u),
            eigenvalue: eigenspace_membership(a, &u, EIGEN_TOL),
            u,
        })
    }

    fn flat(&self) -> bool {
        norm(&self.gradient) <= FLAT
    }

    fn consistent(&self) -> bool {
        self.flat() == self.eigenvalue.is_some()
    }

    fn json(&self) -> Json {
        Json::obj(vec![
            ("direction", self.u.as_slice().into()),
            ("gradient", self.gradient.as_slice().into()),
            ("gradient_norm", norm(&self.gradient).into()),
            ("eigen_residual", self.residual.into()),
            ("eigenvalue", self.eigenvalue.into()),
            ("is_eigen", self.eigenvalue.is_some().into()),
            ("consistent", self.consistent().into()),
        ])
    }
}

pub fn direction_audit(args: &AuditArgs) -> Res<Outcome> {
    let a = load_matrix(&args.matrix)?;
    let n = a.dim();
    if n < 2 {
        return Err("direction audit needs dimension at least 2".into());
    }
    let mut rows = Vec::new();
    if let Some(d) = &args.direction {
        rows.push(AuditRow::new(&a, parse_direction(d, n)?)?);
    } else {
        if args.samples == 0 {
            return Err("--samples must be positive".into());
        }
        let v = a.eigenvectors();
        for j in 0..n {
            rows.push(AuditRow::new(&a, lib(Direction::new(v.column(j)))?)?);
        }
        // rotate between each pair of eigenvectors, endpoints excluded
        for i in 0..n {
            for j in i + 1..n {
                let (vi, vj) = (v.column(i), v.column(j));
                for k in 1..=args.samples {
                    let th = k as f64 / (args.samples + 1) as f64 * std::f64::consts::FRAC_PI_2;
                    let u: Vec<f64> = vi.iter().zip(&vj).map(|(x, y)| th.cos() * x + th.sin() * y).collect();
                    rows.push(AuditRow::new(&a, lib(Direction::new(u))?)?);
                }
            }
        }
    }
    let mismatches = rows.iter().filter(|r| !r.consistent()).count();
    let eigen = rows.iter().filter(|r| r.eigenvalue.is_some()).count();

    let header: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    let mut csv = header.join(",") + ",gradient_norm,eigen_residual,is_eigen,consistent\n";
    for r in &rows {
        let mut v = r.u.as_slice().to_vec();
        v.extend([norm(&r.gradient), r.residual]);
        let line = csv_row(&v);
        csv.push_str(&format!("{},{},{}\n", line.trim_end(), r.eigenvalue.is_some(), r.consistent()));
    }
    let report = Json::obj(vec![
        ("command", "direction-audit".into()),
        ("directions", rows.len().into()),
        ("eigen_directions", eigen.into()),
        ("mismatches", mismatches.into()),
        ("eigenvalues", a.eigenvalues().into()),
        ("is_multiple_of_identity", (a.eigenvalues()[n - 1] - a.eigenvalues()[0] <= EIGEN_TOL * a.norm()).into()),
        ("rows", Json::Arr(rows.iter().map(AuditRow::json).collect())),
        (
            "config",
            Json::obj(vec![
                ("matrix", matrix_json(a.entries())),
                ("flat_tol", FLAT.into()),
                ("eigen_tol", EIGEN_TOL.into()),
                ("samples", args.samples.into()),
            ]),
        ),
    ]);
    let violation =
        (mismatches > 0).then(|| format!("{mismatches} directions where a vanishing gradient and eigenvector membership disagree"));
    Ok(Outcome { report, csv: Some(csv), violation })
}

pub fn oracle(args: &OracleArgs) -> Res<Outcome> {
    let l = load(&args.set)?;
    if args.samples == 0 {
        return Err("--samples must be positive".into());
    }
    let (qm, qb) = lib(mass_and_barycenter(&l.a, &l.e, &l.cfg))?;
    let mm = lib(mc_mass(&l.a, &l.e, args.samples, args.seed))?;
    let z = |mc: &McEstimate, q: f64| if mc.std_error > 0.0 { (mc.value - q) / mc.std_error } else { 0.0 };
    let mut fields = vec![
        ("command", "oracle".into()),
        (
            "mass",
            Json::obj(vec![
                ("quadrature", measure_json(&qm)),
                ("monte_carlo", mc_json(&mm)),
                ("z_score", z(&mm, qm.value).into()),
            ]),
        ),
    ];
    // barycenter sampling shares the mass seed on a disjoint stream family
    let mb = lib(mc_barycenter(&l.a, &l.e, args.samples, args.seed ^ 0x9e37_79b9_7f4a_7c15))?;
    let comps: Vec<Json> = mb
        .iter()
        .zip(&qb.value)
        .map(|(m, &q)| Json::obj(vec![("quadrature", q.into()), ("monte_carlo", mc_json(m)), ("z_score", z(m, q).into())]))
        .collect();
    fields.push((
        "barycenter",
        Json::obj(vec![("error_estimate", qb.error_estimate.into()), ("components", Json::Arr(comps))]),
    ));
    let planar = if l.a.dim() == 2 {
        let p = lib(perimeter(&l.a, &l.e, &l.cfg))?;
        let g = lib(grid_perimeter_2d(&l.a, &l.e, args.resolution, l.cfg.tail_tol))?;
        Json::obj(vec![
            ("quadrature", measure_json(&p)),
            ("raster", g.into()),
            ("resolution", args.resolution.into()),
            ("relative_deviation", ((g - p.value) / p.value).into()),
        ])
    } else {
        Json::Null
    };
    fields.push(("perimeter", planar));
    let mut echo = l.echo();
    echo.push(("seed", args.seed.into()));
    echo.push(("samples", args.samples.into()));
    fields.push(("config", Json::obj(echo)));
    Ok(Outcome::report(Json::obj(fields)))
}
