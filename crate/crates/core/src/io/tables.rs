use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use super::IoError;
use crate::closure::{ClosureError, ClosureTrace, SetApprox, Verdict};
use crate::shadowing::{PseudoOrbit, ShadowError};
use crate::torus::{HyperbolicMap, TorusPoint};

fn reader(text: &str) -> csv::Reader<&[u8]> {
    ReaderBuilder::new()
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn line_of(rec: &StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn csv_err(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    IoError::Csv {
        line,
        msg: e.to_string(),
    }
}

fn parse_row(rec: &StringRecord, skip: usize) -> Result<Vec<f64>, IoError> {
    rec.iter()
        .skip(skip)
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| IoError::Csv {
                    line: line_of(rec),
                    msg: format!("'{f}' is not a finite number"),
                })
        })
        .collect()
}

/// Reads `j,x0,x1,…` rows with consecutive indices `j`.
pub fn read_pseudo_orbit_csv<M: HyperbolicMap + ?Sized>(
    map: &M,
    text: &str,
    periodic: bool,
) -> Result<PseudoOrbit, IoError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("j") || headers.len() != map.dim() + 1 {
        return Err(IoError::Csv {
            line: 1,
            msg: format!("expected header j,x0..x{}", map.dim() - 1),
        });
    }
    let mut start = None;
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        let j: i64 = rec[0].parse().map_err(|_| IoError::Csv {
            line,
            msg: format!("index '{}' is not an integer", &rec[0]),
        })?;
        let s = *start.get_or_insert(j);
        if j != s + points.len() as i64 {
            return Err(IoError::Csv {
                line,
                msg: format!("index {j} breaks the consecutive run from {s}"),
            });
        }
        points.push(TorusPoint::new(parse_row(&rec, 1)?));
    }
    let start = start.unwrap_or(0);
    let built = if periodic {
        PseudoOrbit::periodic(map, start, points)
    } else {
        PseudoOrbit::new(map, start, points)
    };
    built.map_err(|e: ShadowError| IoError::Csv {
        line: 0,
        msg: e.to_string(),
    })
}

fn write_rows(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = WriterBuilder::new().from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

fn coord_header(dim: usize) -> impl Iterator<Item = String> {
    (0..dim).map(|i| format!("x{i}"))
}

pub fn write_pseudo_orbit_csv(po: &PseudoOrbit) -> String {
    let dim = po.points().first().map_or(0, TorusPoint::dim);
    let header = std::iter::once("j".to_string()).chain(coord_header(dim)).collect();
    write_rows(
        header,
        po.points().iter().enumerate().map(|(k, p)| {
            std::iter::once((po.start() + k as i64).to_string())
                .chain(p.coords().iter().map(f64::to_string))
                .collect()
        }),
    )
}

/// Reads `x0,x1,…` rows into a net at `resolution`.
pub fn read_set_csv(text: &str, resolution: f64, label: &str) -> Result<SetApprox, IoError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || !headers.iter().enumerate().all(|(i, h)| h == format!("x{i}")) {
        return Err(IoError::Csv {
            line: 1,
            msg: "expected header x0,x1,…".into(),
        });
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        points.push(TorusPoint::new(parse_row(&rec, 0)?));
    }
    SetApprox::new(points, resolution, label).map_err(|e: ClosureError| IoError::Csv {
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_set_csv(set: &SetApprox) -> String {
    write_rows(
        coord_header(set.dim().unwrap_or(0)).collect(),
        set.points()
            .iter()
            .map(|p| p.coords().iter().map(f64::to_string).collect()),
    )
}

/// Plot series: one row per iterate with `ν_j = d_H(Λ_{j+1}, Λ_j)` (blank
/// on the last row) and the verdict on the row where it was reached.
pub fn trace_csv(trace: &ClosureTrace) -> String {
    let (verdict, at) = match trace.verdict {
        Verdict::Stabilized(j) => ("stabilized", j),
        Verdict::EscapedNeighborhood(j) => ("escaped_neighborhood", j),
        Verdict::BudgetExhausted => ("budget_exhausted", trace.iterates.len() - 1),
    };
    let header = ["j", "nu", "size", "spread", "verdict"].map(String::from).to_vec();
    write_rows(
        header,
        trace.iterates.iter().enumerate().map(|(j, set)| {
            vec![
                j.to_string(),
                trace.nus.get(j).map_or(String::new(), f64::to_string),
                set.len().to_string(),
                trace.spread[j].to_string(),
                if j == at { verdict.to_string() } else { String::new() },
            ]
        }),
    )
}
