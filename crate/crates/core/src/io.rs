//! Plain-text formats: relations, fuzzy sets and solver results as CSV or JSON.
//!
//! CSV is comma separated with `.` decimals; a first row that does not parse
//! as numbers is taken to be a header.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::approx::{GranularApproximation, LossSpec};
use crate::error::{Error, Result};
use crate::relation::FuzzyRelation;
use crate::rough::FuzzySet;

/// Decimal places written for result values.
pub const RESULT_DECIMALS: i32 = 6;

/// A numeric CSV table with its optional header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn width(&self) -> usize {
        self.rows
            .first()
            .map(Vec::len)
            .or_else(|| self.header.as_ref().map(Vec::len))
            .unwrap_or(0)
    }
}

fn parse_number(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Reads a rectangular numeric table.
pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("line {}: {e}", line + 1)))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Option<Vec<f64>> = record.iter().map(parse_number).collect();
        match parsed {
            Some(row) => {
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(Error::Parse(format!(
                            "line {}: expected {} fields, found {}",
                            line + 1,
                            first.len(),
                            row.len()
                        )));
                    }
                }
                rows.push(row);
            }
            None if line == 0 => {
                header = Some(record.iter().map(str::to_string).collect());
            }
            None => {
                let bad = record.iter().find(|f| parse_number(f).is_none()).unwrap_or("");
                return Err(Error::Parse(format!("line {}: not a number: {bad:?}", line + 1)));
            }
        }
    }
    if let (Some(h), Some(first)) = (&header, rows.first()) {
        if h.len() != first.len() {
            return Err(Error::Parse(format!(
                "header has {} fields but rows have {}",
                h.len(),
                first.len()
            )));
        }
    }
    Ok(Table { header, rows })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    read_table(BufReader::new(File::open(path)?))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn relation_from_csv<R: Read>(reader: R) -> Result<FuzzyRelation> {
    let table = read_table(reader)?;
    let n = table.rows.len();
    if table.rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!(
            "relation matrix must be square: {n} rows of {} values",
            table.width()
        )));
    }
    FuzzyRelation::from_rows(&table.rows)
}

pub fn relation_to_csv<W: Write>(r: &FuzzyRelation, mut w: W) -> Result<()> {
    for row in r.rows() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// `{"n": n, "values": [row-major]}`.
pub fn relation_from_json(text: &str) -> Result<FuzzyRelation> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = v
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("relation JSON needs an integer \"n\"".into()))? as usize;
    let values = number_array(v.get("values"), "values")?;
    FuzzyRelation::new(n, values)
}

pub fn relation_to_json(r: &FuzzyRelation) -> String {
    json!({ "n": r.n(), "values": r.values() }).to_string()
}

/// Loads a relation, choosing the format from the file extension.
pub fn read_relation(path: &Path) -> Result<FuzzyRelation> {
    if is_json(path) {
        relation_from_json(&std::fs::read_to_string(path)?)
    } else {
        relation_from_csv(BufReader::new(File::open(path)?))
    }
}

/// A single column; with several columns the last one is used.
pub fn fuzzy_set_from_csv<R: Read>(reader: R) -> Result<FuzzySet> {
    let table = read_table(reader)?;
    let w = table.width();
    if w == 0 {
        return Err(Error::Parse("fuzzy set file has no values".into()));
    }
    FuzzySet::new(table.column(w - 1))
}

pub fn fuzzy_set_from_json(text: &str) -> Result<FuzzySet> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    FuzzySet::new(number_array(Some(&v), "fuzzy set")?)
}

pub fn read_fuzzy_set(path: &Path) -> Result<FuzzySet> {
    if is_json(path) {
        fuzzy_set_from_json(&std::fs::read_to_string(path)?)
    } else {
        fuzzy_set_from_csv(BufReader::new(File::open(path)?))
    }
}

pub fn fuzzy_set_to_csv<W: Write>(a: &FuzzySet, mut w: W) -> Result<()> {
    for x in a.memberships() {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

fn number_array(v: Option<&Value>, what: &str) -> Result<Vec<f64>> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse(format!("{what} must be a JSON array of numbers")))?;
    arr.iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| Error::Parse(format!("{what} contains a non-number: {x}")))
        })
        .collect()
}

/// Rounds to [`RESULT_DECIMALS`] places; `-0` becomes `0`.
pub fn round_result(x: f64) -> f64 {
    let scale = 10f64.powi(RESULT_DECIMALS);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// One serialized solver result.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub loss: LossSpec,
    /// `"lower"` or `"upper"` for the two ends of a quantile band.
    pub bound: Option<String>,
    pub memberships: Vec<f64>,
    pub phi_values: Vec<f64>,
    pub objective: f64,
    pub feasibility_residual: f64,
}

impl ResultRecord {
    pub fn from_approximation(ga: &GranularApproximation, bound: Option<&str>) -> Self {
        ResultRecord {
            loss: ga.loss,
            bound: bound.map(str::to_string),
            memberships: ga.memberships.memberships().iter().map(|&x| round_result(x)).collect(),
            phi_values: ga.phi_values.iter().map(|&x| round_result(x)).collect(),
            objective: round_result(ga.objective),
            feasibility_residual: round_result(ga.feasibility_residual),
        }
    }

    /// Column label used in CSV output, e.g. `p=0.25`, `mse` or `p=0.5:lower`.
    pub fn label(&self) -> String {
        let base = match self.loss {
            LossSpec::Quantile(p) => format!("p={p}"),
            LossSpec::SquaredError => "mse".to_string(),
        };
        match &self.bound {
            Some(b) => format!("{base}:{b}"),
            None => base,
        }
    }

    fn to_value(&self) -> Value {
        let p = match self.loss {
            LossSpec::Quantile(p) => json!(p),
            LossSpec::SquaredError => json!("mse"),
        };
        let mut v = json!({
            "p": p,
            "memberships": self.memberships,
            "phi_values": self.phi_values,
            "objective": self.objective,
            "feasibility_residual": self.feasibility_residual,
        });
        if let Some(b) = &self.bound {
            v["bound"] = json!(b);
        }
        v
    }

    fn from_value(v: &Value) -> Result<Self> {
        let loss = match v.get("p") {
            Some(Value::String(s)) if s == "mse" => LossSpec::SquaredError,
            Some(x) => LossSpec::quantile(
                x.as_f64()
                    .ok_or_else(|| Error::Parse(format!("\"p\" must be a number or \"mse\": {x}")))?,
            )?,
            None => return Err(Error::Parse("result is missing \"p\"".into())),
        };
        let scalar = |key: &str| {
            v.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Parse(format!("result is missing number \"{key}\"")))
        };
        Ok(ResultRecord {
            loss,
            bound: v.get("bound").and_then(Value::as_str).map(str::to_string),
            memberships: number_array(v.get("memberships"), "memberships")?,
            phi_values: number_array(v.get("phi_values"), "phi_values")?,
            objective: scalar("objective")?,
            feasibility_residual: scalar("feasibility_residual")?,
        })
    }
}

/// A single record as an object, several as an array.
pub fn results_to_json(records: &[ResultRecord]) -> String {
    let v = if records.len() == 1 {
        records[0].to_value()
    } else {
        Value::Array(records.iter().map(ResultRecord::to_value).collect())
    };
    let mut s = serde_json::to_string_pretty(&v).expect("values are finite");
    s.push('\n');
    s
}

pub fn results_from_json(text: &str) -> Result<Vec<ResultRecord>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match &v {
        Value::Array(items) => items.iter().map(ResultRecord::from_value).collect(),
        other => Ok(vec![ResultRecord::from_value(other)?]),
    }
}

/// `instance,input,output` for one record; one output column per record
/// (headed by its label) otherwise.
pub fn results_to_csv(input: &[f64], records: &[ResultRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["instance".to_string(), "input".to_string()];
    if records.len() == 1 {
        header.push("output".to_string());
    } else {
        header.extend(records.iter().map(ResultRecord::label));
    }
    w.write_record(&header).map_err(csv_err)?;
    for (u, &x) in input.iter().enumerate() {
        let mut row = vec![u.to_string(), round_result(x).to_string()];
        for rec in records {
            let y = rec.memberships.get(u).ok_or(Error::DimensionMismatch {
                expected: input.len(),
                found: rec.memberships.len(),
            })?;
            row.push(y.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads back [`results_to_csv`]: the input column and `(label, outputs)`.
pub fn results_from_csv<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<(String, Vec<f64>)>)> {
    let table = read_table(reader)?;
    let header = table
        .header
        .clone()
        .ok_or_else(|| Error::Parse("result CSV needs a header".into()))?;
    if header.len() < 3 || header[0] != "instance" || header[1] != "input" {
        return Err(Error::Parse(format!("unexpected result header {header:?}")));
    }
    let outputs = (2..header.len())
        .map(|j| (header[j].clone(), table.column(j)))
        .collect();
    Ok((table.column(1), outputs))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
