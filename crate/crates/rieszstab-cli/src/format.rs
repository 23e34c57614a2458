//! Text formats: RaySet JSON, DeficitReport JSON/CSV and table emitters.
//!
//! Numbers are written with 17 significant digits so every f64 survives a
//! round trip; non-finite values become `null` in JSON and `nan` in CSV.

use std::fmt::Write as _;
use std::sync::Arc;

use rieszstab::{AngularGrid, DeficitReport, RaySet};
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Input(format!("unknown format {s:?}, expected csv or json"))),
        }
    }
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".into()
    }
}

pub fn json_str(s: &str) -> String {
    Value::String(s.to_owned()).to_string()
}

/// A JSON scalar, array or object, pre-rendered.
#[derive(Debug, Clone)]
pub enum Field {
    Num(f64),
    Int(i64),
    Str(String),
    Bool(bool),
    Raw(String),
}

impl Field {
    fn json(&self) -> String {
        match self {
            Field::Num(x) => num(*x),
            Field::Int(i) => i.to_string(),
            Field::Str(s) => json_str(s),
            Field::Bool(b) => b.to_string(),
            Field::Raw(r) => r.clone(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Field::Num(x) => csv_num(*x),
            Field::Int(i) => i.to_string(),
            Field::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Field::Str(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
            Field::Raw(r) => r.clone(),
        }
    }
}

/// Ordered key/value record.
#[derive(Debug, Clone, Default)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn new() -> Record {
        Record(Vec::new())
    }

    pub fn push(&mut self, key: &str, f: Field) -> &mut Record {
        self.0.push((key.to_owned(), f));
        self
    }

    pub fn num(&mut self, key: &str, x: f64) -> &mut Record {
        self.push(key, Field::Num(x))
    }

    pub fn int(&mut self, key: &str, i: i64) -> &mut Record {
        self.push(key, Field::Int(i))
    }

    pub fn str(&mut self, key: &str, s: &str) -> &mut Record {
        self.push(key, Field::Str(s.to_owned()))
    }

    pub fn json(&self) -> String {
        let body: Vec<String> = self.0.iter().map(|(k, v)| format!("{}:{}", json_str(k), v.json())).collect();
        format!("{{{}}}", body.join(","))
    }

    pub fn csv_header(&self) -> String {
        self.0.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join(",")
    }

    pub fn csv_row(&self) -> String {
        self.0.iter().map(|(_, v)| v.csv()).collect::<Vec<_>>().join(",")
    }
}

pub fn json_array(items: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", items.into_iter().collect::<Vec<_>>().join(","))
}

/// Rows plus a summary record, as CSV (rows, blank line, summary) or as one
/// JSON object `{summary..., "rows": [...]}`.
pub fn emit_table(rows: &[Record], summary: &Record, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = summary.clone();
            s.push("rows", Field::Raw(json_array(rows.iter().map(Record::json))));
            s.json() + "\n"
        }
        Format::Csv => {
            let mut out = String::new();
            if let Some(first) = rows.first() {
                writeln!(out, "{}", first.csv_header()).unwrap();
                for r in rows {
                    writeln!(out, "{}", r.csv_row()).unwrap();
                }
                out.push('\n');
            }
            writeln!(out, "{}", summary.csv_header()).unwrap();
            writeln!(out, "{}", summary.csv_row()).unwrap();
            out
        }
    }
}

/// DeficitReport fields in schema order.
pub fn report_record(r: &DeficitReport) -> Record {
    let mut rec = Record::new();
    rec.int("schema_version", SCHEMA_VERSION as i64)
        .int("n", r.n as i64)
        .num("lambda", r.lambda)
        .str("family", &r.family)
        .num("eps", r.eps)
        .num("family_eps", r.family_eps)
        .num("alpha", r.alpha)
        .num("t_opt", r.t_opt)
        .num("first_variation", r.first_variation)
        .num("second_variation", r.second_variation)
        .num("delta", r.delta)
        .num("m_plus_norm_sq", r.m_plus_norm_sq)
        .num("m_minus_norm_sq", r.m_minus_norm_sq)
        .num("spherical_v", r.spherical_v)
        .num("spherical_w", r.spherical_w)
        .num("spherical_w_residual", r.spherical_w_residual)
        .num("toy_bound", r.toy_bound)
        .num("quad_error", r.quad_error)
        .num("mc_error", r.mc_error);
    match r.seed {
        Some(s) => rec.push("seed", Field::Raw(s.to_string())),
        None => rec.push("seed", Field::Raw("null".into())),
    };
    rec
}

pub fn report_to_json(r: &DeficitReport) -> String {
    report_record(r).json()
}

pub fn report_from_json(text: &str) -> Result<DeficitReport> {
    let v: Value = serde_json::from_str(text)?;
    let o = v.as_object().ok_or_else(|| CliError::Input("report must be a JSON object".into()))?;
    check_schema(o)?;
    let f = |k: &str| -> Result<f64> {
        match o.get(k) {
            Some(Value::Null) => Ok(f64::NAN),
            Some(x) => x.as_f64().ok_or_else(|| CliError::Input(format!("field {k} must be a number"))),
            None => Err(CliError::Input(format!("missing field {k}"))),
        }
    };
    Ok(DeficitReport {
        n: f("n")? as usize,
        lambda: f("lambda")?,
        family: o.get("family").and_then(Value::as_str).unwrap_or_default().to_owned(),
        eps: f("eps")?,
        family_eps: f("family_eps")?,
        alpha: f("alpha")?,
        t_opt: f("t_opt")?,
        first_variation: f("first_variation")?,
        second_variation: f("second_variation")?,
        delta: f("delta")?,
        m_plus_norm_sq: f("m_plus_norm_sq")?,
        m_minus_norm_sq: f("m_minus_norm_sq")?,
        spherical_v: f("spherical_v")?,
        spherical_w: f("spherical_w")?,
        spherical_w_residual: f("spherical_w_residual")?,
        toy_bound: f("toy_bound")?,
        quad_error: f("quad_error")?,
        mc_error: f("mc_error")?,
        seed: o.get("seed").and_then(Value::as_u64),
    })
}

fn check_schema(o: &serde_json::Map<String, Value>) -> Result<()> {
    match o.get("schema_version").and_then(Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
        Some(v) => Err(CliError::Input(format!("unsupported schema_version {v}"))),
        None => Err(CliError::Input("missing schema_version".into())),
    }
}

pub fn rayset_to_json(a: &RaySet) -> String {
    let g = a.grid();
    let intervals = json_array(
        a.rays().iter().map(|ivs| json_array(ivs.iter().map(|(x, y)| format!("[{},{}]", num(*x), num(*y))))),
    );
    let mut rec = Record::new();
    rec.int("schema_version", SCHEMA_VERSION as i64)
        .int("n", a.dim() as i64)
        .push("nodes", Field::Raw(json_array(g.theta().iter().map(|t| num(*t)))))
        .push("weights", Field::Raw(json_array(g.weights().iter().map(|w| num(*w)))))
        .push("intervals", Field::Raw(intervals));
    rec.json() + "\n"
}

fn f64_array(v: &Value, what: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| CliError::Input(format!("{what} must be an array")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| CliError::Input(format!("{what} must hold numbers"))))
        .collect()
}

pub fn rayset_from_json(text: &str) -> Result<RaySet> {
    let v: Value = serde_json::from_str(text)?;
    let o = v.as_object().ok_or_else(|| CliError::Input("RaySet must be a JSON object".into()))?;
    check_schema(o)?;
    let get = |k: &str| o.get(k).ok_or_else(|| CliError::Input(format!("missing field {k}")));
    let n = get("n")?.as_u64().ok_or_else(|| CliError::Input("n must be a positive integer".into()))? as usize;
    let nodes = f64_array(get("nodes")?, "nodes")?;
    let weights = f64_array(get("weights")?, "weights")?;
    let rays = get("intervals")?
        .as_array()
        .ok_or_else(|| CliError::Input("intervals must be an array".into()))?
        .iter()
        .map(|ray| {
            ray.as_array()
                .ok_or_else(|| CliError::Input("each ray must be an array of intervals".into()))?
                .iter()
                .map(|iv| match f64_array(iv, "interval")?.as_slice() {
                    [a, b] => Ok((*a, *b)),
                    _ => Err(CliError::Input("an interval has exactly two endpoints".into())),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = Arc::new(AngularGrid::from_parts(n, nodes, weights)?);
    Ok(RaySet::new(grid, rays)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rieszstab::{angular_grid, make_family, FamilyKind, FamilyOptions, Functionals, KernelParams};

    #[test]
    fn rayset_round_trip_is_exact() {
        let g = Arc::new(angular_grid(3, 24).unwrap());
        let a = make_family(FamilyKind::Ring, g, 0.03, FamilyOptions::default()).unwrap();
        let b = rayset_from_json(&rayset_to_json(&a)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_round_trip_is_exact() {
        let f = Functionals::new(KernelParams::new(3, 2.0).unwrap(), 16).unwrap();
        let g = Arc::new(angular_grid(3, 32).unwrap());
        let a = make_family(FamilyKind::Squeeze, g, 0.02, FamilyOptions::default()).unwrap();
        let mut r = f.deficit(&a).unwrap();
        r.family = "squeeze".into();
        r.family_eps = 0.02;
        r.seed = Some(7);
        assert_eq!(report_from_json(&report_to_json(&r)).unwrap(), r);
    }

    #[test]
    fn rejects_bad_schema() {
        assert!(matches!(rayset_from_json("{\"n\":3}"), Err(CliError::Input(_))));
        assert!(matches!(rayset_from_json("[1,2"), Err(CliError::Input(_))));
    }
}
