use std::io::Write;

use serde_json::{Map, Number, Value};

/// One field of an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Int(u128),
    Float(f64),
    Text(String),
    Ints(Vec<u128>),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match header"
        );
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(csv_text))?;
        }
        writer.flush()?;
        Ok(())
    }

    /// A JSON array with one object per row, keys in column order.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let object: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(name, cell)| (name.to_string(), json_value(cell)))
                    .collect();
                Value::Object(object)
            })
            .collect();
        Value::Array(rows)
    }
}

fn csv_text(cell: &Cell) -> String {
    match cell {
        Cell::Null => String::new(),
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x).unwrap_or_default(),
        Cell::Text(s) => s.clone(),
        Cell::Ints(xs) => xs.iter().map(u128::to_string).collect::<Vec<_>>().join(";"),
    }
}

fn number(text: &str) -> Value {
    Value::Number(
        text.parse::<Number>()
            .expect("formatted number is valid JSON"),
    )
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Null => Value::Null,
        Cell::Int(i) => number(&i.to_string()),
        Cell::Float(x) => format_float(*x).map_or(Value::Null, |t| number(&t)),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Ints(xs) => Value::Array(xs.iter().map(|i| number(&i.to_string())).collect()),
    }
}

/// Shortest `%.17g`-style rendering: 17 significant digits with trailing
/// zeros removed, positional for exponents in `-4..17`. `None` for
/// non-finite values.
pub fn format_float(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(if x.is_sign_negative() { "-0" } else { "0" }.to_owned());
    }
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };

    let body = if (-4..17).contains(&exponent) {
        let (int, frac) = if exponent >= 0 {
            let split = exponent as usize + 1;
            (digits[..split].to_owned(), digits[split..].to_owned())
        } else {
            (
                "0".to_owned(),
                "0".repeat((-exponent - 1) as usize) + &digits,
            )
        };
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int
        } else {
            format!("{int}.{frac}")
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        if rest.is_empty() {
            format!("{lead}e{exponent}")
        } else {
            format!("{lead}.{rest}e{exponent}")
        }
    };
    Some(format!("{sign}{body}"))
}
