//! Reading matrices, sets and flag values, and writing sets back out in the
//! same schema.

use crate::json::Json;
use anigauss::linalg::{Direction, Matrix, Rotation, SpdMatrix};
use anigauss::sets::{BoxSet, HalfSpaceSet, PolytopeSet, SetRegion, SubgraphRegion};
use serde_json::Value;
use std::path::Path;

pub type Res<T> = std::result::Result<T, String>;

fn read(path: &Path) -> Res<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{} is not valid JSON: {e}", path.display()))
}

fn field<'a>(v: &'a Value, key: &str, ctx: &str) -> Res<&'a Value> {
    v.get(key).ok_or_else(|| format!("{ctx}: missing field \"{key}\""))
}

/// A number, or one of the strings "inf", "+inf", "-inf".
fn num(v: &Value, ctx: &str) -> Res<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| format!("{ctx}: number out of range")),
        Value::String(s) => match s.as_str() {
            "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
            "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
            _ => Err(format!("{ctx}: expected a number or \"inf\"/\"-inf\", found \"{s}\"")),
        },
        _ => Err(format!("{ctx}: expected a number, found {v}")),
    }
}

fn nums(v: &Value, ctx: &str) -> Res<Vec<f64>> {
    v.as_array().ok_or_else(|| format!("{ctx}: expected an array"))?.iter().map(|x| num(x, ctx)).collect()
}

fn rows(v: &Value, ctx: &str) -> Res<Vec<Vec<f64>>> {
    v.as_array().ok_or_else(|| format!("{ctx}: expected an array of rows"))?.iter().map(|r| nums(r, ctx)).collect()
}

fn lib<T>(r: anigauss::Result<T>, ctx: &str) -> Res<T> {
    r.map_err(|e| format!("{ctx}: {e}"))
}

pub fn load_matrix(path: &Path) -> Res<SpdMatrix> {
    let ctx = path.display().to_string();
    let v = read(path)?;
    let r = rows(field(&v, "matrix", &ctx)?, &ctx)?;
    lib(SpdMatrix::from_rows(&r), &ctx)
}

pub fn load_set(path: &Path) -> Res<SetRegion> {
    let ctx = path.display().to_string();
    parse_set(&read(path)?, &ctx)
}

fn halfspace(v: &Value, ctx: &str) -> Res<HalfSpaceSet> {
    let omega = lib(Direction::new(nums(field(v, "omega", ctx)?, ctx)?), ctx)?;
    Ok(HalfSpaceSet::new(omega, num(field(v, "t", ctx)?, ctx)?))
}

pub fn parse_set(v: &Value, ctx: &str) -> Res<SetRegion> {
    let kind = field(v, "type", ctx)?.as_str().ok_or_else(|| format!("{ctx}: \"type\" must be a string"))?;
    match kind {
        "halfspace" => Ok(SetRegion::HalfSpace(halfspace(v, ctx)?)),
        "polytope" => {
            let cons: Vec<HalfSpaceSet> = field(v, "constraints", ctx)?
                .as_array()
                .ok_or_else(|| format!("{ctx}: \"constraints\" must be an array"))?
                .iter()
                .map(|c| halfspace(c, ctx))
                .collect::<Res<_>>()?;
            let dim = match v.get("dim") {
                Some(d) => d.as_u64().ok_or_else(|| format!("{ctx}: \"dim\" must be a positive integer"))? as usize,
                None => cons.first().map(|c| c.dim()).ok_or_else(|| format!("{ctx}: an empty polytope needs \"dim\""))?,
            };
            Ok(SetRegion::Polytope(lib(PolytopeSet::new(dim, cons), ctx)?))
        }
        "box" => {
            let lo = nums(field(v, "lo", ctx)?, ctx)?;
            let hi = nums(field(v, "hi", ctx)?, ctx)?;
            Ok(SetRegion::Box(lib(BoxSet::new(lo, hi), ctx)?))
        }
        "subgraph" => {
            let grid = field(v, "grid", ctx)?;
            let nodes: Vec<usize> = field(grid, "nodes", ctx)?
                .as_array()
                .ok_or_else(|| format!("{ctx}: \"nodes\" must be an array"))?
                .iter()
                .map(|n| n.as_u64().map(|n| n as usize).ok_or_else(|| format!("{ctx}: node counts must be integers")))
                .collect::<Res<_>>()?;
            let truncated: Vec<[bool; 2]> = field(grid, "truncated", ctx)?
                .as_array()
                .ok_or_else(|| format!("{ctx}: \"truncated\" must be an array"))?
                .iter()
                .map(|p| match p.as_array().map(|a| a.as_slice()) {
                    Some([Value::Bool(a), Value::Bool(b)]) => Ok([*a, *b]),
                    _ => Err(format!("{ctx}: \"truncated\" entries must be [bool, bool]")),
                })
                .collect::<Res<_>>()?;
            let rotation = lib(Matrix::from_rows(&rows(field(v, "rotation", ctx)?, ctx)?), ctx)?;
            let region = SubgraphRegion::new(
                lib(Rotation::from_matrix(rotation), ctx)?,
                nums(field(grid, "lo", ctx)?, ctx)?,
                nums(field(grid, "hi", ctx)?, ctx)?,
                nodes,
                nums(field(v, "heights", ctx)?, ctx)?,
                truncated,
            );
            Ok(SetRegion::Subgraph(lib(region, ctx)?))
        }
        other => Err(format!("{ctx}: unknown set type \"{other}\" (expected halfspace, polytope, box or subgraph)")),
    }
}

fn halfspace_json(h: &HalfSpaceSet) -> Vec<(&'static str, Json)> {
    vec![("omega", h.omega.as_slice().into()), ("t", h.t.into())]
}

pub fn set_json(e: &SetRegion) -> Json {
    let mut f: Vec<(&str, Json)> = vec![("type", e.kind().into())];
    match e {
        SetRegion::HalfSpace(h) => f.extend(halfspace_json(h)),
        SetRegion::Polytope(p) => {
            f.push(("dim", p.dim().into()));
            f.push(("constraints", Json::Arr(p.constraints().iter().map(|c| Json::obj(halfspace_json(c))).collect())));
        }
        SetRegion::Box(b) => {
            f.push(("lo", b.lo().into()));
            f.push(("hi", b.hi().into()));
        }
        SetRegion::Subgraph(s) => {
            f.push((
                "grid",
                Json::obj(vec![
                    ("lo", s.lo().into()),
                    ("hi", s.hi().into()),
                    ("nodes", Json::Arr(s.nodes().iter().map(|&n| n.into()).collect())),
                    ("truncated", Json::Arr(s.truncated().iter().map(|t| Json::Arr(vec![t[0].into(), t[1].into()])).collect())),
                ]),
            ));
            f.push(("heights", s.heights().into()));
            f.push(("rotation", matrix_json(s.rotation().matrix())));
        }
    }
    Json::obj(f)
}

pub fn matrix_json(m: &Matrix) -> Json {
    Json::Arr(m.rows().into_iter().map(Json::from).collect())
}

/// Comma-separated floats, e.g. "0.6,-0.8".
pub fn parse_list(s: &str, what: &str) -> Res<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("{what}: cannot parse \"{}\" as a number", p.trim())))
        .collect()
}

pub fn parse_direction(s: &str, dim: usize) -> Res<Direction> {
    let v = parse_list(s, "--direction")?;
    if v.len() != dim {
        return Err(format!("--direction has {} components but the matrix is {dim}×{dim}", v.len()));
    }
    lib(Direction::new(v), "--direction")
}
