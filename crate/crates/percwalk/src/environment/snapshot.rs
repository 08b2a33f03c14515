//! Textual environment snapshots: a commented header with the sampling
//! metadata followed by one line per edge, `x_coords y_coords weight`,
//! with vertex coordinates comma-separated. Floats use Rust's shortest
//! round-trip formatting, so import reproduces weights bit-exactly.

use super::{ConductanceLaw, EdgeRecord, Environment};
use crate::error::{Error, Result};
use crate::lattice::{DomainSpec, Vertex};
use std::io::{BufRead, Write};

fn format_law(law: &ConductanceLaw) -> String {
    match *law {
        ConductanceLaw::Constant { w } => format!("constant w={w}"),
        ConductanceLaw::Bernoulli { p1 } => format!("bernoulli p1={p1}"),
        ConductanceLaw::UniformOnInterval { a, b, p1 } => {
            format!("uniform a={a} b={b} p1={p1}")
        }
        ConductanceLaw::ParetoLowerBounded { c, exponent, p1 } => {
            format!("pareto c={c} exponent={exponent} p1={p1}")
        }
    }
}

fn format_domain(domain: &DomainSpec) -> String {
    match *domain {
        DomainSpec::FullLattice { d } => format!("full-lattice d={d}"),
        DomainSpec::Orthant { d1, d2 } => format!("orthant d1={d1} d2={d2}"),
        DomainSpec::Box { d, n } => format!("box d={d} n={n}"),
    }
}

pub fn export_snapshot<W: Write>(env: &Environment, mut out: W) -> Result<()> {
    writeln!(out, "# percwalk-env v1")?;
    writeln!(out, "# domain: {}", format_domain(&env.domain()))?;
    writeln!(out, "# window: {}", env.window())?;
    writeln!(out, "# extended: {}", env.extended_window())?;
    writeln!(out, "# law: {}", format_law(&env.law()))?;
    writeln!(out, "# seed: {}", env.seed())?;
    writeln!(out, "# truncation: {}", env.truncation())?;
    for rec in env.edges() {
        let (a, b) = env.edge_endpoints(rec);
        writeln!(
            out,
            "{} {} {}",
            join_coords(&a),
            join_coords(&b),
            rec.weight
        )?;
    }
    Ok(())
}

fn join_coords(v: &Vertex) -> String {
    v.coords()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_coords(s: &str, line: usize) -> Result<Vertex> {
    let coords: std::result::Result<Vec<i32>, _> =
        s.split(',').map(|p| p.parse::<i32>()).collect();
    match coords {
        Ok(c) if !c.is_empty() => Ok(Vertex::new(&c)),
        _ => Err(Error::SnapshotParse {
            line,
            message: format!("bad coordinates `{s}`"),
        }),
    }
}

fn header_field<'a>(rest: &'a str, key: &str, line: usize) -> Result<&'a str> {
    rest.strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| Error::SnapshotParse {
            line,
            message: format!("expected `{key}=...` in `{rest}`"),
        })
}

fn parse_law(body: &str, line: usize) -> Result<ConductanceLaw> {
    let mut parts = body.split_whitespace();
    let kind = parts.next().unwrap_or("");
    let fields: Vec<&str> = parts.collect();
    let parse = |s: &str, key: &str| -> Result<f64> {
        header_field(s, key, line)?.parse::<f64>().map_err(|_| Error::SnapshotParse {
            line,
            message: format!("bad number in `{s}`"),
        })
    };
    match kind {
        "constant" if fields.len() == 1 => Ok(ConductanceLaw::Constant {
            w: parse(fields[0], "w")?,
        }),
        "bernoulli" if fields.len() == 1 => Ok(ConductanceLaw::Bernoulli {
            p1: parse(fields[0], "p1")?,
        }),
        "uniform" if fields.len() == 3 => Ok(ConductanceLaw::UniformOnInterval {
            a: parse(fields[0], "a")?,
            b: parse(fields[1], "b")?,
            p1: parse(fields[2], "p1")?,
        }),
        "pareto" if fields.len() == 3 => Ok(ConductanceLaw::ParetoLowerBounded {
            c: parse(fields[0], "c")?,
            exponent: parse(fields[1], "exponent")?,
            p1: parse(fields[2], "p1")?,
        }),
        _ => Err(Error::SnapshotParse {
            line,
            message: format!("unknown law `{body}`"),
        }),
    }
}

fn parse_domain(body: &str, line: usize) -> Result<DomainSpec> {
    let mut parts = body.split_whitespace();
    let kind = parts.next().unwrap_or("");
    let fields: Vec<&str> = parts.collect();
    let parse_usize = |s: &str, key: &str| -> Result<usize> {
        header_field(s, key, line)?.parse::<usize>().map_err(|_| Error::SnapshotParse {
            line,
            message: format!("bad integer in `{s}`"),
        })
    };
    match kind {
        "full-lattice" if fields.len() == 1 => Ok(DomainSpec::FullLattice {
            d: parse_usize(fields[0], "d")?,
        }),
        "orthant" if fields.len() == 2 => Ok(DomainSpec::Orthant {
            d1: parse_usize(fields[0], "d1")?,
            d2: parse_usize(fields[1], "d2")?,
        }),
        "box" if fields.len() == 2 => Ok(DomainSpec::Box {
            d: parse_usize(fields[0], "d")?,
            n: parse_usize(fields[1], "n")? as i32,
        }),
        _ => Err(Error::SnapshotParse {
            line,
            message: format!("unknown domain `{body}`"),
        }),
    }
}

/// Read a snapshot back into an environment. Vertices are re-enumerated from
/// the recorded domain and extended window; every edge line must connect two
/// enumerated vertices.
pub fn import_snapshot<R: BufRead>(input: R) -> Result<Environment> {
    let mut domain: Option<DomainSpec> = None;
    let mut window: Option<i32> = None;
    let mut extended: Option<i32> = None;
    let mut law: Option<ConductanceLaw> = None;
    let mut seed: Option<u64> = None;
    let mut truncation: Option<f64> = None;
    let mut raw_edges: Vec<(Vertex, Vertex, f64)> = Vec::new();

    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(body) = rest.strip_prefix("domain:") {
                domain = Some(parse_domain(body.trim(), lineno)?);
            } else if let Some(body) = rest.strip_prefix("window:") {
                window = body.trim().parse().ok();
            } else if let Some(body) = rest.strip_prefix("extended:") {
                extended = body.trim().parse().ok();
            } else if let Some(body) = rest.strip_prefix("law:") {
                law = Some(parse_law(body.trim(), lineno)?);
            } else if let Some(body) = rest.strip_prefix("seed:") {
                seed = body.trim().parse().ok();
            } else if let Some(body) = rest.strip_prefix("truncation:") {
                truncation = body.trim().parse().ok();
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (a, b, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(w), None) => (a, b, w),
            _ => {
                return Err(Error::SnapshotParse {
                    line: lineno,
                    message: "expected `a_coords b_coords weight`".into(),
                })
            }
        };
        let va = parse_coords(a, lineno)?;
        let vb = parse_coords(b, lineno)?;
        let weight: f64 = w.parse().map_err(|_| Error::SnapshotParse {
            line: lineno,
            message: format!("bad weight `{w}`"),
        })?;
        raw_edges.push((va, vb, weight));
    }

    let missing = |what: &str| Error::SnapshotParse {
        line: 0,
        message: format!("missing header field `{what}`"),
    };
    let domain = domain.ok_or_else(|| missing("domain"))?;
    let window = window.ok_or_else(|| missing("window"))?;
    let extended = extended.ok_or_else(|| missing("extended"))?;
    let law = law.ok_or_else(|| missing("law"))?;
    let seed = seed.ok_or_else(|| missing("seed"))?;
    let truncation = truncation.ok_or_else(|| missing("truncation"))?;

    let vertices = crate::lattice::enumerate_vertices(&domain, extended)?;
    let mut ids = std::collections::HashMap::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        ids.insert(*v, i as u32);
    }
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (idx, (a, b, w)) in raw_edges.into_iter().enumerate() {
        let ia = *ids.get(&a).ok_or_else(|| Error::SnapshotParse {
            line: idx + 1,
            message: format!("vertex {a} outside the recorded window"),
        })?;
        let ib = *ids.get(&b).ok_or_else(|| Error::SnapshotParse {
            line: idx + 1,
            message: format!("vertex {b} outside the recorded window"),
        })?;
        let (lo, hi) = if ia <= ib { (ia, ib) } else { (ib, ia) };
        edges.push(EdgeRecord { a: lo, b: hi, weight: w });
    }
    edges.sort_unstable_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
    Ok(Environment::from_parts(
        domain, window, extended, law, seed, truncation, vertices, edges,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::sample_environment;

    #[test]
    fn snapshot_round_trips_bit_exactly() {
        let law = ConductanceLaw::ParetoLowerBounded { c: 1.0, exponent: 1.5, p1: 0.75 };
        let env = sample_environment(
            DomainSpec::Orthant { d1: 1, d2: 1 },
            4,
            law,
            77,
            Some(4.0),
        )
        .unwrap();
        let mut buf = Vec::new();
        export_snapshot(&env, &mut buf).unwrap();
        let back = import_snapshot(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.domain(), env.domain());
        assert_eq!(back.window(), env.window());
        assert_eq!(back.seed(), env.seed());
        assert_eq!(back.truncation(), env.truncation());
        assert_eq!(back.law(), env.law());
        assert_eq!(back.edges().len(), env.edges().len());
        for (x, y) in back.edges().iter().zip(env.edges()) {
            assert_eq!(x.a, y.a);
            assert_eq!(x.b, y.b);
            assert_eq!(x.weight.to_bits(), y.weight.to_bits());
        }
        // and the export of the import is byte-identical
        let mut buf2 = Vec::new();
        export_snapshot(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn import_rejects_malformed_lines() {
        let text = "# percwalk-env v1\n0,0 0,1\n";
        assert!(import_snapshot(std::io::BufReader::new(text.as_bytes())).is_err());
    }
}
