//! JSON import and export. Rationals are written as `"p/q"` strings, pairs as
//! `[birth, death]` with `null` for an infinite death, and object keys come out sorted.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::complex::{FiltrationValues, SimplicialComplex};
use crate::error::{Error, Result};
use crate::generators::InstabilityReport;
use crate::persistence::{Pair, PairSet, PersistenceDiagram};
use crate::rational::{self, Rational};
use crate::sheaf::{CellularSheaf, GlobalSections, MonodromyReport, Section};
use crate::stratify::{BaseMesh, Geometry, PLFibration, Point, Stratification};
use crate::vineyard::{PairBijection, Vine};

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema(format!("missing field {key:?}")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(format!("{what} must be an array")))
}

fn index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| schema(format!("{what} must be a non-negative integer")))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn rational_json(r: &Rational) -> Value {
    Value::String(rational::format(r))
}

fn opt_rational_json(r: &Option<Rational>) -> Value {
    r.as_ref().map_or(Value::Null, rational_json)
}

pub fn point_json(p: &Point) -> Value {
    json!([rational::format(&p.x), rational::format(&p.y)])
}

pub fn point_from_json(v: &Value) -> Result<Point> {
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => Ok(Point::new(rational::from_json(x)?, rational::from_json(y)?)),
        _ => Err(schema("a point is a two-element array")),
    }
}

pub fn pair_json(p: &Pair) -> Value {
    json!([p.birth, p.death])
}

pub fn pair_from_json(v: &Value) -> Result<Pair> {
    match v.as_array().map(Vec::as_slice) {
        Some([b, Value::Null]) => Ok(Pair::essential(index(b, "birth")?)),
        Some([b, d]) => Ok(Pair::finite(index(b, "birth")?, index(d, "death")?)),
        _ => Err(schema("a pair is [birth, death]")),
    }
}

fn pairs_json(pairs: &[Pair]) -> Value {
    Value::Array(pairs.iter().map(pair_json).collect())
}

fn bijection_json(b: &PairBijection) -> Value {
    Value::Array(b.entries().map(|(x, y)| json!([pair_json(&x), pair_json(&y)])).collect())
}

pub fn complex_json(k: &SimplicialComplex) -> Value {
    json!({ "simplices": k.simplices().iter().map(|s| s.vertices().to_vec()).collect::<Vec<_>>() })
}

pub fn complex_from_json(v: &Value) -> Result<SimplicialComplex> {
    let lists = array(field(v, "simplices")?, "simplices")?
        .iter()
        .map(|s| {
            array(s, "a simplex")?
                .iter()
                .map(|x| x.as_u64().ok_or_else(|| schema("vertex labels are non-negative integers")))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SimplicialComplex::from_lists(lists)
}

/// `{"simplices": [...], "values": [...]}`, or the complex nested under `"complex"`.
pub fn filtration_from_json(v: &Value) -> Result<(SimplicialComplex, FiltrationValues)> {
    let k = complex_from_json(v.get("complex").unwrap_or(v))?;
    let values = array(field(v, "values")?, "values")?
        .iter()
        .map(rational::from_json)
        .collect::<Result<Vec<_>>>()?;
    if values.len() != k.len() {
        return Err(schema(format!("{} values for {} simplices", values.len(), k.len())));
    }
    let f = FiltrationValues::new(&k, values)?;
    Ok((k, f))
}

pub fn filtration_json(k: &SimplicialComplex, f: &FiltrationValues) -> Value {
    json!({
        "complex": complex_json(k),
        "values": f.as_slice().iter().map(rational_json).collect::<Vec<_>>(),
    })
}

pub fn diagrams_json(diagrams: &[PersistenceDiagram]) -> Value {
    let list: Vec<Value> = diagrams
        .iter()
        .map(|d| {
            json!({
                "degree": d.degree,
                "points": d.points.iter().map(|p| json!({
                    "birth": rational_json(&p.birth),
                    "death": opt_rational_json(&p.death),
                    "pair": pair_json(&p.pair),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "diagrams": list })
}

pub fn fibration_json(fib: &PLFibration, metadata: Option<Value>) -> Value {
    let values: Map<String, Value> = fib
        .values
        .iter()
        .enumerate()
        .map(|(s, row)| (s.to_string(), Value::Array(row.iter().map(rational_json).collect())))
        .collect();
    let mut out = json!({
        "complex": complex_json(&fib.complex),
        "mesh": {
            "vertices": fib.mesh.vertices.iter().map(point_json).collect::<Vec<_>>(),
            "triangles": fib.mesh.triangles,
        },
        "values": values,
    });
    if let Some(m) = metadata {
        out["metadata"] = m;
    }
    out
}

/// Reads a fibration; `values` maps each 0-based simplex id to one value per mesh vertex.
pub fn fibration_from_json(v: &Value) -> Result<PLFibration> {
    let complex = complex_from_json(field(v, "complex")?)?;
    let mesh_v = field(v, "mesh")?;
    let vertices = array(field(mesh_v, "vertices")?, "mesh vertices")?
        .iter()
        .map(point_from_json)
        .collect::<Result<Vec<_>>>()?;
    let triangles = array(field(mesh_v, "triangles")?, "triangles")?
        .iter()
        .map(|t| match array(t, "a triangle")?.as_slice() {
            [a, b, c] => Ok([index(a, "vertex")?, index(b, "vertex")?, index(c, "vertex")?]),
            _ => Err(schema("a triangle has three vertices")),
        })
        .collect::<Result<Vec<_>>>()?;
    let mesh = BaseMesh::new(vertices, triangles)?;
    let table = field(v, "values")?
        .as_object()
        .ok_or_else(|| schema("values must map simplex ids to value lists"))?;
    let mut rows: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    for (key, row) in table {
        let s: usize = key.parse().map_err(|_| schema(format!("bad simplex id {key:?}")))?;
        if s >= complex.len() {
            return Err(Error::IndexOutOfRange { index: s, len: complex.len() });
        }
        let row = array(row, "a value list")?
            .iter()
            .map(rational::from_json)
            .collect::<Result<Vec<_>>>()?;
        rows.insert(s, row);
    }
    if let Some(missing) = (0..complex.len()).find(|s| !rows.contains_key(s)) {
        return Err(schema(format!("no values for simplex {missing}")));
    }
    PLFibration::new(complex, mesh, rows.into_values().collect())
}

fn geometry_json(g: &Geometry) -> Value {
    let kind = match g {
        Geometry::Point(_) => "point",
        Geometry::Segment(..) => "segment",
        Geometry::Polygon(_) => "polygon",
    };
    json!({ "type": kind, "points": g.points().iter().map(point_json).collect::<Vec<_>>() })
}

fn pair_set_json(p: &PairSet) -> Value {
    pairs_json(&p.elements())
}

pub fn stratification_json(s: &Stratification) -> Value {
    let cells: Vec<Value> = s
        .cells
        .iter()
        .map(|c| {
            json!({
                "id": c.id,
                "dim": c.dim,
                "pieces": c.pieces.iter().map(geometry_json).collect::<Vec<_>>(),
                "representative": point_json(&c.representative),
                "triangle": c.triangle,
                "faces": c.faces,
                "pairs": pair_set_json(&c.pairs),
                "indexing": c.indexing.order(),
            })
        })
        .collect();
    json!({ "merged": s.is_merged(), "cells": cells })
}

pub fn sheaf_json(sheaf: &CellularSheaf) -> Value {
    let vertices: Vec<Value> = sheaf
        .stalks()
        .iter()
        .map(|(c, stalk)| json!({ "cell": c, "dim": sheaf.dim(*c), "stalk": pairs_json(stalk) }))
        .collect();
    let edges: Vec<Value> = sheaf
        .edges()
        .iter()
        .map(|e| {
            json!({
                "face": e.face,
                "coface": e.coface,
                "identity": e.morphism.is_identity(),
                "morphism": bijection_json(&e.morphism),
            })
        })
        .collect();
    json!({ "degree": sheaf.degree, "vertices": vertices, "edges": edges })
}

fn section_json(s: &Section) -> Value {
    let m: Map<String, Value> = s.assignment.iter().map(|(c, p)| (c.to_string(), pair_json(p))).collect();
    Value::Object(m)
}

/// Per-component sections plus the combined list (omitted above `limit`).
pub fn sections_json(degree: usize, g: &GlobalSections, limit: usize) -> Value {
    let comps: Vec<Value> = g
        .components
        .iter()
        .map(|c| {
            json!({
                "root": c.root,
                "cells": c.cells,
                "sections": c.sections.iter().map(section_json).collect::<Vec<_>>(),
                "obstructed": c.obstructed.iter().map(|(x, cycle)| json!({
                    "seed": pair_json(x),
                    "cycle": cycle,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let combined = g.combined(limit);
    json!({
        "degree": degree,
        "count": g.count().to_string(),
        "components": comps,
        "truncated": combined.is_none(),
        "sections": combined.unwrap_or_default().iter().map(section_json).collect::<Vec<_>>(),
    })
}

pub fn monodromy_json(report: &MonodromyReport, strat: &Stratification) -> Value {
    let loops: Vec<Value> = report
        .loops
        .iter()
        .map(|l| {
            json!({
                "center": l.center,
                "center_point": point_json(&strat.cell(l.center).representative),
                "cycle": l.cycle,
                "nontrivial": l.nontrivial,
                "permutation": bijection_json(&l.permutation),
            })
        })
        .collect();
    json!({
        "loops": loops,
        "nontrivial_count": report.nontrivial().count(),
        "obstructed_seeds": report.obstructed_seeds.iter().map(|(c, x)| json!({
            "cell": c,
            "pair": pair_json(x),
        })).collect::<Vec<_>>(),
    })
}

fn vine_json(v: &Vine) -> Value {
    json!({
        "id": v.id,
        "degree": v.degree,
        "samples": v.samples.iter().map(|s| json!({
            "t": rational_json(&s.t),
            "birth": rational_json(&s.birth),
            "death": opt_rational_json(&s.death),
            "pair": pair_json(&s.pair),
        })).collect::<Vec<_>>(),
    })
}

pub fn instability_json(r: &InstabilityReport) -> Value {
    json!({
        "epsilon": rational_json(&r.epsilon),
        "gap": rational_json(&r.gap),
        "delta": rational_json(&r.delta),
        "parameters": r.parameters.iter().map(rational_json).collect::<Vec<_>>(),
        "sup_distance": rational_json(&r.sup_distance),
        "matching_distances": {
            "identity": rational_json(&r.matching_distances[0]),
            "swap": rational_json(&r.matching_distances[1]),
        },
        "min_over_bijections": rational_json(&r.min_over_bijections),
        "vines_plus": r.vines_plus.iter().map(vine_json).collect::<Vec<_>>(),
        "vines_minus": r.vines_minus.iter().map(vine_json).collect::<Vec<_>>(),
        "warning": r.warning,
    })
}

/// `{"fibration": {...}, "points": [[x, y], ...], "t": [...]?}`.
pub fn vineyard_input_from_json(v: &Value) -> Result<(PLFibration, Vec<Point>, Option<Vec<Rational>>)> {
    let fib = fibration_from_json(field(v, "fibration")?)?;
    let points = array(field(v, "points")?, "points")?
        .iter()
        .map(point_from_json)
        .collect::<Result<Vec<_>>>()?;
    let t = match v.get("t") {
        None | Some(Value::Null) => None,
        Some(t) => Some(array(t, "t")?.iter().map(rational::from_json).collect::<Result<Vec<_>>>()?),
    };
    Ok((fib, points, t))
}
