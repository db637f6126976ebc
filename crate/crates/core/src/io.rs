//! Text formats and exports: complex files, tetrahedral fixture files,
//! DOT graphs and CSV results.
//!
//! The complex file format is line oriented and whitespace delimited, with
//! `#` comments:
//!
//! ```text
//! vertex <id> <x> <y> <z>
//! triangle <id> <v0> <v1> <v2> [r=<val> | d=<val> mu=<val>]
//! loop_current <triangle> <amperes>
//! mmf_source <triangle> <value>
//! ```
//!
//! Triangles default to unit reluctance; `d`/`mu` pairs convert to
//! reluctance as `d / (mu * area)`. Fixture files reuse the vertex section
//! and add `tet <id> <v0> <v1> <v2> <v3>` lines, orientation as written.
//!
//! Serialization is deterministic and floats round-trip exactly.

use crate::complex::OrientedComplex2;
use crate::network::{DeviceSpec, NetworkSolution, TellegenDiagnostics};
use crate::oracle::{OracleError, TetFixture};
use crate::tag::{DualGraph, TagGraph};
use crate::vec3::Vec3;
use crate::{Complex64, Device64};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("complex construction failed: {0}")]
    Complex(#[from] crate::complex::ComplexError),
    #[error("fixture construction failed: {0}")]
    Fixture(#[from] OracleError),
}

fn err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, IoError> {
    tok.parse::<T>()
        .map_err(|_| err(line, format!("invalid {what} `{tok}`")))
}

fn tokens(raw: &str) -> Vec<&str> {
    let stripped = raw.split('#').next().unwrap_or("");
    stripped.split_whitespace().collect()
}

/// Parse a complex file into a complex and its device table.
pub fn parse_complex(text: &str) -> Result<(Complex64, Device64), IoError> {
    struct TriRec {
        label: u64,
        verts: [u64; 3],
        reluctance: f64,
    }
    let mut vertices: Vec<(u64, Vec3<f64>)> = Vec::new();
    let mut vertex_pos: HashMap<u64, Vec3<f64>> = HashMap::new();
    let mut tris: Vec<TriRec> = Vec::new();
    let mut tri_index: HashMap<u64, usize> = HashMap::new();
    let mut loop_currents: Vec<(usize, f64)> = Vec::new();
    let mut mmf_sources: Vec<(usize, f64)> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "vertex" => {
                if toks.len() != 5 {
                    return Err(err(line, "expected `vertex <id> <x> <y> <z>`"));
                }
                let id: u64 = parse_num(toks[1], line, "vertex id")?;
                let x: f64 = parse_num(toks[2], line, "coordinate")?;
                let y: f64 = parse_num(toks[3], line, "coordinate")?;
                let z: f64 = parse_num(toks[4], line, "coordinate")?;
                if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                    return Err(err(line, "coordinates must be finite"));
                }
                if vertex_pos.insert(id, Vec3::new(x, y, z)).is_some() {
                    return Err(err(line, format!("duplicate vertex id {id}")));
                }
                vertices.push((id, Vec3::new(x, y, z)));
            }
            "triangle" => {
                if toks.len() < 5 {
                    return Err(err(
                        line,
                        "expected `triangle <id> <v0> <v1> <v2> [r=.. | d=.. mu=..]`",
                    ));
                }
                let id: u64 = parse_num(toks[1], line, "triangle id")?;
                if tri_index.contains_key(&id) {
                    return Err(err(line, format!("duplicate triangle id {id}")));
                }
                let mut verts = [0u64; 3];
                for (k, tok) in toks[2..5].iter().enumerate() {
                    let v: u64 = parse_num(tok, line, "vertex reference")?;
                    if !vertex_pos.contains_key(&v) {
                        return Err(err(line, format!("undefined vertex {v}")));
                    }
                    verts[k] = v;
                }
                let mut r: Option<f64> = None;
                let mut d: Option<f64> = None;
                let mut mu: Option<f64> = None;
                for tok in &toks[5..] {
                    let (key, val) = tok
                        .split_once('=')
                        .ok_or_else(|| err(line, format!("expected key=value, got `{tok}`")))?;
                    let v: f64 = parse_num(val, line, "parameter")?;
                    match key {
                        "r" => r = Some(v),
                        "d" => d = Some(v),
                        "mu" => mu = Some(v),
                        _ => return Err(err(line, format!("unknown parameter `{key}`"))),
                    }
                }
                let reluctance = match (r, d, mu) {
                    (Some(r), None, None) => {
                        if !(r > 0.0) {
                            return Err(err(line, "reluctance must be positive"));
                        }
                        r
                    }
                    (None, Some(d), Some(mu)) => {
                        if !(d > 0.0 && mu > 0.0) {
                            return Err(err(line, "thickness and permeability must be positive"));
                        }
                        let [a, b, c] = verts.map(|v| vertex_pos[&v]);
                        let area = b.sub(a).cross(c.sub(a)).norm() / 2.0;
                        if area == 0.0 {
                            return Err(err(line, format!("triangle {id} is degenerate")));
                        }
                        d / (mu * area)
                    }
                    (None, None, None) => 1.0,
                    _ => {
                        return Err(err(
                            line,
                            "give either r=<val> or both d=<val> and mu=<val>",
                        ))
                    }
                };
                tri_index.insert(id, tris.len());
                tris.push(TriRec {
                    label: id,
                    verts,
                    reluctance,
                });
            }
            "loop_current" | "mmf_source" => {
                if toks.len() != 3 {
                    return Err(err(
                        line,
                        format!("expected `{} <triangle> <value>`", toks[0]),
                    ));
                }
                let id: u64 = parse_num(toks[1], line, "triangle reference")?;
                let val: f64 = parse_num(toks[2], line, "value")?;
                if !val.is_finite() {
                    return Err(err(line, "value must be finite"));
                }
                let &t = tri_index
                    .get(&id)
                    .ok_or_else(|| err(line, format!("undefined triangle {id}")))?;
                if toks[0] == "loop_current" {
                    loop_currents.push((t, val));
                } else {
                    mmf_sources.push((t, val));
                }
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }

    let complex =
        OrientedComplex2::new(vertices, tris.iter().map(|t| (t.label, t.verts)).collect())?;
    let mut device = DeviceSpec::uniform(tris.len(), 1.0);
    for (t, rec) in tris.iter().enumerate() {
        device.reluctance[t] = rec.reluctance;
    }
    for (t, v) in loop_currents {
        device.loop_current[t] += v;
    }
    for (t, v) in mmf_sources {
        device.mmf_source[t] += v;
    }
    Ok((complex, device))
}

/// Serialize a complex and device table; `parse_complex` of the output
/// reproduces both exactly.
pub fn serialize_complex(complex: &Complex64, device: &Device64) -> String {
    let mut out = String::new();
    for v in complex.vertices() {
        let _ = writeln!(
            out,
            "vertex {} {} {} {}",
            v.label, v.pos.x, v.pos.y, v.pos.z
        );
    }
    for (t, tri) in complex.triangles().iter().enumerate() {
        let [a, b, c] = tri.vertices.map(|v| complex.vertex(v).label);
        let _ = writeln!(
            out,
            "triangle {} {} {} {} r={}",
            tri.label, a, b, c, device.reluctance[t]
        );
    }
    for (t, tri) in complex.triangles().iter().enumerate() {
        if device.loop_current[t] != 0.0 {
            let _ = writeln!(out, "loop_current {} {}", tri.label, device.loop_current[t]);
        }
    }
    for (t, tri) in complex.triangles().iter().enumerate() {
        if device.mmf_source[t] != 0.0 {
            let _ = writeln!(out, "mmf_source {} {}", tri.label, device.mmf_source[t]);
        }
    }
    out
}

/// Parse a tetrahedral fixture file (vertex table plus `tet` lines).
pub fn parse_tets(text: &str) -> Result<TetFixture, IoError> {
    let mut positions: Vec<Vec3<f64>> = Vec::new();
    let mut vertex_index: HashMap<u64, usize> = HashMap::new();
    let mut tets: Vec<[usize; 4]> = Vec::new();
    let mut tet_ids: HashMap<u64, ()> = HashMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "vertex" => {
                if toks.len() != 5 {
                    return Err(err(line, "expected `vertex <id> <x> <y> <z>`"));
                }
                let id: u64 = parse_num(toks[1], line, "vertex id")?;
                let x: f64 = parse_num(toks[2], line, "coordinate")?;
                let y: f64 = parse_num(toks[3], line, "coordinate")?;
                let z: f64 = parse_num(toks[4], line, "coordinate")?;
                if vertex_index.insert(id, positions.len()).is_some() {
                    return Err(err(line, format!("duplicate vertex id {id}")));
                }
                positions.push(Vec3::new(x, y, z));
            }
            "tet" => {
                if toks.len() != 6 {
                    return Err(err(line, "expected `tet <id> <v0> <v1> <v2> <v3>`"));
                }
                let id: u64 = parse_num(toks[1], line, "tet id")?;
                if tet_ids.insert(id, ()).is_some() {
                    return Err(err(line, format!("duplicate tet id {id}")));
                }
                let mut t = [0usize; 4];
                for (k, tok) in toks[2..6].iter().enumerate() {
                    let v: u64 = parse_num(tok, line, "vertex reference")?;
                    t[k] = *vertex_index
                        .get(&v)
                        .ok_or_else(|| err(line, format!("undefined vertex {v}")))?;
                }
                tets.push(t);
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }
    Ok(TetFixture::new(positions, tets)?)
}

/// DOT rendering of the tag graph; side vertices are named `t<i>+`/`t<i>-`.
pub fn tag_to_dot(tag: &TagGraph) -> String {
    let name = |side: usize| {
        format!(
            "\"t{}{}\"",
            crate::tag::side_triangle(side),
            if crate::tag::side_sign(side) > 0 {
                "+"
            } else {
                "-"
            }
        )
    };
    let mut out = String::from("graph tag {\n");
    for side in 0..tag.side_count() {
        let _ = writeln!(out, "  {};", name(side));
    }
    for &(a, b) in tag.edges() {
        let _ = writeln!(out, "  {} -- {};", name(a), name(b));
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of the dual multigraph with triangle labels on edges.
pub fn dual_to_dot(complex: &Complex64, dual: &DualGraph) -> String {
    let mut out = String::from("digraph dual {\n");
    for n in 0..dual.node_count() {
        let _ = writeln!(out, "  n{n};");
    }
    for (t, &(from, to)) in dual.edges().iter().enumerate() {
        let label = complex.triangle(t).label;
        let _ = writeln!(out, "  n{from} -> n{to} [label=\"{label}\"];");
    }
    out.push_str("}\n");
    out
}

/// CSV rendering of a solution with a trailing diagnostics block.
pub fn solution_to_csv(
    complex: &Complex64,
    solution: &NetworkSolution<f64>,
    diagnostics: &TellegenDiagnostics<f64>,
    method: &str,
) -> String {
    let mut out = String::from("triangle_id,flux_weber,mmf_adjusted,mmf_raw\n");
    for (t, tri) in complex.triangles().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            tri.label, solution.flux[t], solution.adjusted_mmf[t], solution.raw_mmf[t]
        );
    }
    let _ = writeln!(out, "# method,{method}");
    let _ = writeln!(out, "# solve_residual,{}", solution.residual);
    let _ = writeln!(
        out,
        "# tellegen_inner_product,{}",
        diagnostics.inner_product
    );
    let _ = writeln!(
        out,
        "# node_flux_residual,{}",
        diagnostics.node_flux_residual
    );
    let _ = writeln!(out, "# cycle_residual,{}", diagnostics.cycle_residual);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = "\
# one triangle
vertex 0 0 0 0
vertex 1 1 0 0
vertex 2 0 1 0
triangle 0 0 1 2
";

    #[test]
    fn parse_single_triangle() {
        let (c, d) = parse_complex(SINGLE).unwrap();
        assert_eq!(c.triangle_count(), 1);
        assert_eq!(c.edge_count(), 3);
        assert_eq!(d.reluctance, vec![1.0]);
    }

    #[test]
    fn physical_reluctance_from_thickness_and_permeability() {
        let text = "\
vertex 0 0 0 0
vertex 1 1 0 0
vertex 2 0 1 0
triangle 7 0 1 2 d=0.001 mu=1.0
loop_current 7 2.5
";
        let (c, d) = parse_complex(text).unwrap();
        assert_eq!(c.triangle(0).label, 7);
        // area 1/2, so r = 0.001 / 0.5
        assert!((d.reluctance[0] - 0.002).abs() < 1e-18);
        assert_eq!(d.loop_current[0], 2.5);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_ref = "vertex 0 0 0 0\ntriangle 0 0 1 2\n";
        match parse_complex(bad_ref) {
            Err(IoError::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("undefined vertex 1"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let dup = "vertex 0 0 0 0\nvertex 0 1 1 1\n";
        match parse_complex(dup) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_r = "\
vertex 0 0 0 0
vertex 1 1 0 0
vertex 2 0 1 0
triangle 0 0 1 2 r=-2
";
        assert!(matches!(
            parse_complex(bad_r),
            Err(IoError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let c = crate::fixtures::glued_tetrahedra();
        let mut d = crate::network::DeviceSpec::uniform(7, 1.0);
        d.reluctance[2] = 0.1 + 0.2; // deliberately non-representable sum
        d.loop_current[0] = 1.0 / 3.0;
        d.mmf_source[5] = -2.75;
        let text = serialize_complex(&c, &d);
        let (c2, d2) = parse_complex(&text).unwrap();
        assert_eq!(c, c2);
        assert_eq!(d, d2);
        assert_eq!(text, serialize_complex(&c2, &d2));
    }

    #[test]
    fn tets_round_trip_through_fixture() {
        let text = "\
vertex 0 0 0 0
vertex 1 1 0 0
vertex 2 0 1 0
vertex 3 0 0 1
tet 0 0 1 2 3
";
        let fixture = parse_tets(text).unwrap();
        assert_eq!(fixture.tet_count(), 1);
        assert_eq!(fixture.face_count(), 4);
        assert!(fixture.verify_incidence_transpose());
        let inverted = "\
vertex 0 0 0 0
vertex 1 1 0 0
vertex 2 0 1 0
vertex 3 0 0 1
tet 0 0 2 1 3
";
        assert!(parse_tets(inverted).is_err());
    }

    #[test]
    fn dot_export_is_deterministic() {
        let c = crate::fixtures::glued_tetrahedra();
        let p = crate::tag::region_graph(&c, crate::tag::ExternalFusion::Off).unwrap();
        let a = dual_to_dot(&c, &p.dual);
        let b = dual_to_dot(&c, &p.dual);
        assert_eq!(a, b);
        assert!(a.starts_with("digraph dual {"));
        assert!(a.contains("n0 -> n1"));
        let t = tag_to_dot(&p.tag);
        assert!(t.contains("\"t0+\""));
    }
}
