//! Text formats.
//!
//! * Discrete measure CSV: one atom per row, `x_1,...,x_d,weight`.
//! * Grid density CSV: first row `origin,step`, then one density value per
//!   row. An optional literal `origin,step` label row may precede it.
//! * JSON: every float is written with 17 significant digits.
//!
//! Blank lines and lines starting with `#` are ignored on input.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::transport::{DiscreteMeasure, GridDensity, Measure};

/// Float with 17 significant digits; round-trips through `str::parse`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with floats in the [`fmt_f64`] form.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::InvalidParameter(format!("JSON encoding failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Non-comment lines with their 1-based line numbers, split on commas.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split(',').map(str::trim).collect()))
        }
    })
}

fn parse_number(line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse { line, message: format!("`{field}` is not a number") })
}

fn is_grid_label(fields: &[&str]) -> bool {
    fields.len() == 2 && fields[0].eq_ignore_ascii_case("origin") && fields[1].eq_ignore_ascii_case("step")
}

/// Parses the discrete measure CSV format.
pub fn parse_discrete_csv(text: &str) -> Result<DiscreteMeasure> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut width = None;
    let mut last_line = 0;
    for (line, fields) in records(text) {
        last_line = line;
        if fields.len() < 2 {
            return Err(Error::Parse { line, message: "expected `x_1,...,x_d,weight`".into() });
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Parse { line, message: format!("expected {w} fields, found {}", fields.len()) })
            }
            _ => {}
        }
        let nums = fields.iter().map(|f| parse_number(line, f)).collect::<Result<Vec<f64>>>()?;
        let (w, x) = nums.split_last().expect("at least two fields");
        points.push(x.to_vec());
        weights.push(*w);
    }
    if points.is_empty() {
        return Err(Error::Parse { line: last_line, message: "no atoms".into() });
    }
    DiscreteMeasure::new(points, weights).map_err(|e| Error::Parse { line: last_line, message: e.to_string() })
}

/// Parses the grid density CSV format.
pub fn parse_grid_csv(text: &str) -> Result<GridDensity> {
    let mut rows = records(text).peekable();
    if rows.peek().is_some_and(|(_, f)| is_grid_label(f)) {
        rows.next();
    }
    let (line, header) = rows.next().ok_or(Error::Parse { line: 0, message: "empty grid file".into() })?;
    if header.len() != 2 {
        return Err(Error::Parse { line, message: "expected `origin,step`".into() });
    }
    let origin = parse_number(line, header[0])?;
    let step = parse_number(line, header[1])?;
    let mut values = Vec::new();
    let mut last_line = line;
    for (line, fields) in rows {
        last_line = line;
        if fields.len() != 1 {
            return Err(Error::Parse { line, message: "expected one density value per line".into() });
        }
        values.push(parse_number(line, fields[0])?);
    }
    GridDensity::new(origin, step, values).map_err(|e| Error::Parse { line: last_line, message: e.to_string() })
}

/// Parses either format. A file is a grid when it carries the `origin,step`
/// label or its second record has a single field.
pub fn parse_measure_csv(text: &str) -> Result<Measure> {
    let mut recs = records(text);
    let first = recs.next();
    let second = recs.next();
    let grid = match (&first, &second) {
        (Some((_, f)), _) if is_grid_label(f) => true,
        (Some((_, f)), Some((_, s))) => f.len() == 2 && s.len() == 1,
        _ => false,
    };
    if grid {
        parse_grid_csv(text).map(Measure::Grid)
    } else {
        parse_discrete_csv(text).map(Measure::Discrete)
    }
}

pub fn discrete_to_csv(m: &DiscreteMeasure) -> String {
    let mut out = String::new();
    for (p, w) in m.atoms() {
        let mut fields: Vec<String> = p.iter().map(|x| fmt_f64(*x)).collect();
        fields.push(fmt_f64(w));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn grid_to_csv(g: &GridDensity) -> String {
    let mut out = format!("{},{}\n", fmt_f64(g.origin()), fmt_f64(g.step()));
    for v in g.values() {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_uses_full_precision() {
        #[derive(Serialize)]
        struct S {
            x: f64,
            v: Vec<f64>,
        }
        let s = to_json(&S { x: 0.1, v: vec![1.0] }).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn parses_discrete() {
        let m = parse_discrete_csv("# comment\n0,0.5\n1,0.5\n").unwrap();
        assert_eq!(m.len(), 2);
        let planar = parse_discrete_csv("0,0,0.25\n3,4,0.75\n").unwrap();
        assert_eq!(planar.dim(), 2);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_discrete_csv("0,0.5\n\nx,0.5\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, message: "`x` is not a number".into() });
        assert!(matches!(parse_discrete_csv("0,0.5\n1,2,0.5\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn grid_round_trip() {
        let g = GridDensity::new(-0.5, 0.5, vec![0.5, 1.0, 0.5]).unwrap();
        let text = grid_to_csv(&g);
        assert_eq!(parse_grid_csv(&text).unwrap(), g);
        let labelled = format!("origin,step\n{text}");
        assert!(matches!(parse_measure_csv(&labelled).unwrap(), Measure::Grid(_)));
        assert!(matches!(parse_measure_csv(&text).unwrap(), Measure::Grid(_)));
        assert!(matches!(parse_measure_csv("0,0.5\n1,0.5\n").unwrap(), Measure::Discrete(_)));
    }
}
