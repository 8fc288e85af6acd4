//! Reading strata tables and allocations.
//!
//! Strata tables are CSV with a `stratum` (or `label`) column followed by either
//! `A,m,M` or `N,S` with optional `m,M`. Allocations are CSV with `stratum,x`
//! and an optional `role` column, or the JSON document written by `solve`.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::CliError;
use crate::popgen::{
    population_to_problem, stsi_coefficients, BoundPolicy, SampleSize, StrataPopulation, Stratum,
};
use crate::problem::{BoxProblem, Role};

/// Lower bound used for `N,S` tables without an `m` column: `min(2, N_h / 2)`.
pub const DEFAULT_LOWER: BoundPolicy = BoundPolicy::ConstantOrHalf(2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// `stratum,A,m,M`
    Coefficients,
    /// `stratum,N,S[,m,M]`
    Population,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrataTable {
    pub schema: Schema,
    pub labels: Vec<String>,
    /// `A_h` for the coefficient schema, `N_h` for the population schema.
    pub first: Vec<f64>,
    /// Empty for the coefficient schema.
    pub std_dev: Vec<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn label_column(headers: &csv::StringRecord) -> Result<usize, CliError> {
    column(headers, "stratum")
        .or_else(|| column(headers, "label"))
        .ok_or_else(|| CliError::io("missing `stratum` or `label` column"))
}

fn number(record: &csv::StringRecord, idx: usize, row: usize, name: &str) -> Result<f64, CliError> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse::<f64>()
        .map_err(|_| CliError::io(format!("row {row}: `{name}` value `{raw}` is not a number")))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn parse_strata(text: &str) -> Result<StrataTable, CliError> {
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(CliError::csv)?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CliError::io("empty strata table"));
    }
    let label = label_column(&headers)?;
    let (schema, first, second) = match (
        column(&headers, "A"),
        column(&headers, "N"),
        column(&headers, "S"),
    ) {
        (Some(a), None, _) => (Schema::Coefficients, a, None),
        (None, Some(n), Some(s)) => (Schema::Population, n, Some(s)),
        _ => {
            return Err(CliError::io(
                "header must contain either `A,m,M` or `N,S` columns",
            ))
        }
    };
    let (lo_col, hi_col) = (column(&headers, "m"), column(&headers, "M"));
    if schema == Schema::Coefficients && (lo_col.is_none() || hi_col.is_none()) {
        return Err(CliError::io("coefficient tables need `m` and `M` columns"));
    }

    let mut table = StrataTable {
        schema,
        labels: Vec::new(),
        first: Vec::new(),
        std_dev: Vec::new(),
        lower: lo_col.map(|_| Vec::new()),
        upper: hi_col.map(|_| Vec::new()),
    };
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(CliError::csv)?;
        let row = i + 2;
        table
            .labels
            .push(record.get(label).unwrap_or("").to_string());
        table
            .first
            .push(number(&record, first, row, &headers[first])?);
        if let Some(s) = second {
            table.std_dev.push(number(&record, s, row, "S")?);
        }
        if let (Some(c), Some(v)) = (lo_col, table.lower.as_mut()) {
            v.push(number(&record, c, row, "m")?);
        }
        if let (Some(c), Some(v)) = (hi_col, table.upper.as_mut()) {
            v.push(number(&record, c, row, "M")?);
        }
    }
    if table.labels.is_empty() {
        return Err(CliError::io("strata table has no rows"));
    }
    Ok(table)
}

fn population(table: &StrataTable) -> Result<StrataPopulation, CliError> {
    let strata = table
        .labels
        .iter()
        .zip(&table.first)
        .zip(&table.std_dev)
        .map(|((label, &n), &s)| {
            if n.fract() != 0.0 || n < 1.0 {
                return Err(CliError::io(format!(
                    "stratum `{label}`: N = {n} is not a positive integer"
                )));
            }
            Ok(Stratum {
                label: label.clone(),
                size: n as u64,
                std_dev: s,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StrataPopulation::new(strata)?)
}

/// Total sample size given on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TotalArg {
    Total(f64),
    Fraction(f64),
}

/// Builds the allocation problem described by a strata table.
///
/// Population tables are converted with `A_h = N_h S_h`; missing bounds
/// default to `m_h = min(2, N_h / 2)` and `M_h = N_h`.
pub fn to_problem(table: &StrataTable, total: TotalArg) -> Result<BoxProblem, CliError> {
    match table.schema {
        Schema::Coefficients => {
            let n = match total {
                TotalArg::Total(n) => n,
                TotalArg::Fraction(_) => {
                    return Err(CliError::io("--fraction needs a table with `N,S` columns"))
                }
            };
            Ok(BoxProblem::with_labels(
                table.labels.clone(),
                table.first.clone(),
                table.lower.clone().unwrap_or_default(),
                table.upper.clone().unwrap_or_default(),
                n,
            )?)
        }
        Schema::Population => {
            let pop = population(table)?;
            let size = match total {
                TotalArg::Total(n) => SampleSize::Total(n),
                TotalArg::Fraction(f) => SampleSize::Fraction(f),
            };
            if table.lower.is_none() && table.upper.is_none() {
                return Ok(population_to_problem(
                    &pop,
                    size,
                    DEFAULT_LOWER,
                    BoundPolicy::StratumSize,
                )?);
            }
            // explicit bounds replace the defaults column by column
            let sizes = pop.sizes();
            let lower = table.lower.clone().unwrap_or_else(|| {
                pop.strata()
                    .iter()
                    .map(|s| DEFAULT_LOWER.apply(s.size))
                    .collect()
            });
            let upper = table.upper.clone().unwrap_or(sizes);
            let (coefficients, _) = stsi_coefficients(&pop)?;
            let n = match size {
                SampleSize::Total(n) => n,
                SampleSize::Fraction(f) => (f * pop.total_size() as f64).round(),
            };
            Ok(BoxProblem::with_labels(
                pop.labels(),
                coefficients,
                lower,
                upper,
                n,
            )?)
        }
    }
}

/// Stratum entry of an allocation file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct AllocationEntry {
    pub label: String,
    pub x: f64,
    #[serde(default)]
    pub role: Option<String>,
}

#[derive(Deserialize)]
struct AllocationDocument {
    strata: Vec<AllocationEntry>,
}

pub fn parse_role(raw: &str) -> Result<Role, CliError> {
    match raw {
        "min" => Ok(Role::Min),
        "neyman" => Ok(Role::Neyman),
        "max" => Ok(Role::Max),
        other => Err(CliError::io(format!("unknown role `{other}`"))),
    }
}

/// Reads an allocation from CSV (`stratum,x[,role]`) or from a `solve` document.
pub fn parse_allocation(text: &str) -> Result<Vec<AllocationEntry>, CliError> {
    if text.trim_start().starts_with('{') {
        let doc: AllocationDocument = serde_json::from_str(text)
            .map_err(|e| CliError::io(format!("allocation document: {e}")))?;
        if doc.strata.is_empty() {
            return Err(CliError::io("allocation document has no strata"));
        }
        return Ok(doc.strata);
    }
    let mut rdr = reader(text);
    let headers = rdr.headers().map_err(CliError::csv)?.clone();
    let label = label_column(&headers)?;
    let x = column(&headers, "x").ok_or_else(|| CliError::io("missing `x` column"))?;
    let role = column(&headers, "role");
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(CliError::csv)?;
        out.push(AllocationEntry {
            label: record.get(label).unwrap_or("").to_string(),
            x: number(&record, x, i + 2, "x")?,
            role: role
                .and_then(|c| record.get(c))
                .filter(|r| !r.is_empty())
                .map(str::to_string),
        });
    }
    if out.is_empty() {
        return Err(CliError::io("allocation has no rows"));
    }
    Ok(out)
}
