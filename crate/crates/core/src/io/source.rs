//! Source point-cloud parsers: ASCII PLY and whitespace-separated `x y z label [remission]` text.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::model::{ClassId, LabeledCloud, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceFormat {
    AsciiPly,
    XyzLabelText,
}

impl FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ply" | "ascii-ply" => Ok(SourceFormat::AsciiPly),
            "xyzl" | "xyz" | "txt" => Ok(SourceFormat::XyzLabelText),
            other => Err(format!(
                "unknown source format {other:?} (expected ply or xyzl)"
            )),
        }
    }
}

/// Quality-control tally for one parsed file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcReport {
    pub total_points: usize,
    pub kept_points: usize,
    pub dropped_nonfinite: usize,
    pub remission_out_of_range: usize,
    /// The file carried no label column for its points.
    pub label_count_mismatch: bool,
}

/// Points in file order, their verbatim source labels, and the QC tally.
///
/// Labels in `cloud` are all unassigned until a remap table is applied to
/// `raw_labels`.
#[derive(Debug, Clone)]
pub struct ParsedSource {
    pub cloud: LabeledCloud,
    pub raw_labels: Vec<String>,
    pub qc: QcReport,
}

pub fn parse_source(path: &Path, format: SourceFormat, label_field: &str) -> Result<ParsedSource> {
    let text = fs::read_to_string(path).at(path)?;
    parse_source_str(&text, format, label_field)
}

pub fn parse_source_str(
    text: &str,
    format: SourceFormat,
    label_field: &str,
) -> Result<ParsedSource> {
    let mut acc = Accumulator::default();
    match format {
        SourceFormat::XyzLabelText => parse_xyzl(text, &mut acc)?,
        SourceFormat::AsciiPly => parse_ascii_ply(text, label_field, &mut acc)?,
    }
    acc.finish()
}

#[derive(Default)]
struct Accumulator {
    points: Vec<Point3>,
    raw_labels: Vec<String>,
    qc: QcReport,
}

impl Accumulator {
    fn push(&mut self, p: Point3, label: String) {
        self.qc.total_points += 1;
        if !p.is_finite() || !p.remission.is_finite() {
            self.qc.dropped_nonfinite += 1;
            return;
        }
        if !(0.0..=1.0).contains(&p.remission) {
            self.qc.remission_out_of_range += 1;
        }
        self.points.push(p);
        self.raw_labels.push(label);
    }

    fn finish(mut self) -> Result<ParsedSource> {
        if self.points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if self.qc.dropped_nonfinite > 0 {
            log::warn!("dropped {} non-finite points", self.qc.dropped_nonfinite);
        }
        self.qc.kept_points = self.points.len();
        let n = self.points.len();
        Ok(ParsedSource {
            cloud: LabeledCloud::from_labels(self.points, vec![ClassId::UNASSIGNED; n])?,
            raw_labels: self.raw_labels,
            qc: self.qc,
        })
    }
}

fn parse_f32(tok: &str, line: usize, what: &str) -> Result<f32> {
    tok.parse::<f32>().map_err(|_| Error::MalformedRecord {
        line,
        message: format!("cannot parse {what} {tok:?} as a number"),
    })
}

fn parse_xyzl(text: &str, acc: &mut Accumulator) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = t.split_whitespace().collect();
        if cols.len() != 4 && cols.len() != 5 {
            return Err(Error::MalformedRecord {
                line,
                message: format!("expected 4 or 5 columns, found {}", cols.len()),
            });
        }
        let mut p = Point3::new(
            parse_f32(cols[0], line, "x")?,
            parse_f32(cols[1], line, "y")?,
            parse_f32(cols[2], line, "z")?,
        );
        if let Some(r) = cols.get(4) {
            p.remission = parse_f32(r, line, "remission")?;
        }
        acc.push(p, cols[3].to_string());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScalarKind {
    Int,
    Float,
}

fn scalar_kind(ty: &str) -> Option<ScalarKind> {
    match ty {
        "char" | "uchar" | "short" | "ushort" | "int" | "uint" | "int8" | "uint8" | "int16"
        | "uint16" | "int32" | "uint32" => Some(ScalarKind::Int),
        "float" | "double" | "float32" | "float64" => Some(ScalarKind::Float),
        _ => None,
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, kind: ScalarKind },
    List { name: String },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

fn header_err(msg: impl Into<String>) -> Error {
    Error::MalformedHeader(msg.into())
}

fn parse_ply_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<Vec<Element>> {
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(header_err("file does not start with `ply`")),
    }
    let mut format_seen = false;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let Some((line, raw)) = lines.next() else {
            return Err(header_err("missing end_header"));
        };
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            [] => continue,
            ["comment", ..] | ["obj_info", ..] => continue,
            ["format", "ascii", "1.0"] => format_seen = true,
            ["format", other, ..] => {
                return Err(header_err(format!(
                    "unsupported PLY format {other:?} (only ascii 1.0)"
                )))
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| header_err(format!("line {line}: bad element count {count:?}")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count_ty, item_ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(format!("line {line}: property before element")))?;
                if scalar_kind(count_ty) != Some(ScalarKind::Int) || scalar_kind(item_ty).is_none()
                {
                    return Err(header_err(format!("line {line}: bad list property types")));
                }
                el.properties.push(Property::List {
                    name: name.to_string(),
                });
            }
            ["property", ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| header_err(format!("line {line}: property before element")))?;
                let kind = scalar_kind(ty).ok_or_else(|| {
                    header_err(format!("line {line}: unknown property type {ty:?}"))
                })?;
                el.properties.push(Property::Scalar {
                    name: name.to_string(),
                    kind,
                });
            }
            ["end_header"] => break,
            _ => {
                return Err(header_err(format!(
                    "line {line}: unrecognized header line {raw:?}"
                )))
            }
        }
    }
    if !format_seen {
        return Err(header_err("missing format line"));
    }
    Ok(elements)
}

/// Numeric labels are re-rendered from their parsed value, so `3`, `3.0` and `+3` all become `3`.
fn stringify_label(tok: &str, kind: ScalarKind, line: usize) -> Result<String> {
    let bad = || Error::MalformedRecord {
        line,
        message: format!("cannot parse label {tok:?} as a number"),
    };
    match kind {
        ScalarKind::Int => tok.parse::<i64>().map(|v| v.to_string()).map_err(|_| bad()),
        ScalarKind::Float => {
            let v: f64 = tok.parse().map_err(|_| bad())?;
            if v.fract() == 0.0 && v.abs() < 1e15 {
                Ok((v as i64).to_string())
            } else {
                Ok(v.to_string())
            }
        }
    }
}

fn parse_ascii_ply(text: &str, label_field: &str, acc: &mut Accumulator) -> Result<()> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let elements = parse_ply_header(&mut lines)?;

    let vertex = elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| header_err("no `vertex` element"))?;
    let find = |wanted: &str| {
        vertex.properties.iter().position(|p| match p {
            Property::Scalar { name, .. } => name == wanted,
            Property::List { .. } => false,
        })
    };
    let (Some(ix), Some(iy), Some(iz)) = (find("x"), find("y"), find("z")) else {
        return Err(header_err("vertex element lacks x, y and z properties"));
    };
    let label_col = find(label_field).map(|i| match vertex.properties[i] {
        Property::Scalar { kind, .. } => (i, kind),
        Property::List { .. } => unreachable!(),
    });
    let remission_col = find("remission").or_else(|| find("intensity"));
    if label_col.is_none() {
        acc.qc.label_count_mismatch = true;
        log::warn!("PLY has no `{label_field}` property; every point gets an empty source label");
    }

    let mut data = lines.filter(|(_, l)| !l.trim().is_empty());
    for el in &elements {
        for _ in 0..el.count {
            let Some((line, raw)) = data.next() else {
                return Err(Error::MalformedRecord {
                    line: text.lines().count() + 1,
                    message: format!("file ends before all {} `{}` records", el.count, el.name),
                });
            };
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let values = split_record(&toks, &el.properties, line)?;
            if el.name != "vertex" {
                continue;
            }
            let mut p = Point3::new(
                parse_f32(values[ix], line, "x")?,
                parse_f32(values[iy], line, "y")?,
                parse_f32(values[iz], line, "z")?,
            );
            if let Some(ir) = remission_col {
                p.remission = parse_f32(values[ir], line, "remission")?;
            }
            let label = match label_col {
                Some((il, kind)) => stringify_label(values[il], kind, line)?,
                None => String::new(),
            };
            acc.push(p, label);
        }
    }
    if let Some((line, _)) = data.next() {
        return Err(Error::MalformedRecord {
            line,
            message: "data after the last declared element".into(),
        });
    }
    Ok(())
}

/// Splits one record into per-property tokens; list properties collapse to their count token.
fn split_record<'a>(toks: &[&'a str], props: &[Property], line: usize) -> Result<Vec<&'a str>> {
    let mut out = Vec::with_capacity(props.len());
    let mut pos = 0;
    let short = || Error::MalformedRecord {
        line,
        message: "too few values for the declared properties".into(),
    };
    for p in props {
        match p {
            Property::Scalar { name, kind } => {
                let tok = *toks.get(pos).ok_or_else(short)?;
                let ok = match kind {
                    ScalarKind::Int => tok.parse::<i64>().is_ok(),
                    ScalarKind::Float => tok.parse::<f64>().is_ok(),
                };
                if !ok {
                    return Err(Error::MalformedRecord {
                        line,
                        message: format!("cannot parse property {name} value {tok:?}"),
                    });
                }
                out.push(tok);
                pos += 1;
            }
            Property::List { name } => {
                let tok = *toks.get(pos).ok_or_else(short)?;
                let n: usize = tok.parse().map_err(|_| Error::MalformedRecord {
                    line,
                    message: format!("bad list length {tok:?} for {name}"),
                })?;
                out.push(tok);
                pos += 1 + n;
                if pos > toks.len() {
                    return Err(short());
                }
            }
        }
    }
    if pos != toks.len() {
        return Err(Error::MalformedRecord {
            line,
            message: format!("expected {pos} values, found {}", toks.len()),
        });
    }
    Ok(out)
}
