//! Tables, provenance headers and the CSV / JSON-lines writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Column names per command; the same lists drive `schema` and the writers.
pub const SCHEMAS: &[(&str, &[&str])] = &[
    (
        "constants",
        &[
            "m", "p", "gamma", "k", "A_prime", "A_double_prime", "A", "B", "abs_A", "abs_B", "Q", "star_ok", "gamma_crit",
            "hypothesis_ok",
        ],
    ),
    ("identities", &["identity", "params", "lhs", "rhs", "abs_err", "rel_err", "exact", "holds"]),
    ("tabulate-iterlog", &["t", "X1..Xr", "eta", "zeta", "theta"]),
    ("integrate", &["i", "j", "eps", "value", "err_estimate", "panels", "evaluations", "substitution", "converged"]),
    (
        "check-inequality",
        &[
            "m", "p", "gamma", "k", "D", "R", "r", "lhs", "t0", "series_terms", "remainder", "quotient", "error_budget",
            "hypothesis_ok", "star_ok", "converged",
        ],
    ),
    ("sharpness-a", &["kind", "eps_0", "quotient_A", "gap", "gap_ratio", "err"]),
    ("sharpness-b", &["kind", "eps", "quotient", "numerator", "denominator", "err"]),
    ("d-sweep", &["kind", "D", "probe", "remainder", "error_budget", "series_terms"]),
];

pub fn schema_of(command: &str) -> Vec<String> {
    SCHEMAS
        .iter()
        .find(|(c, _)| *c == command)
        .map(|(_, cols)| cols.iter().map(|c| c.to_string()).collect())
        .unwrap_or_default()
}

/// Human-readable schema listing.
pub fn schema_docs() -> String {
    let mut out = String::from(
        "Every output starts with one provenance record (CSV: a line beginning with '#'; JSON lines: an object with key \"provenance\").\n\
         Real numbers are decimal strings that round-trip at the working precision; vectors are ';'-joined.\n\n",
    );
    for (cmd, cols) in SCHEMAS {
        out.push_str(&format!("{cmd}: {}\n", cols.join(", ")));
    }
    out.push_str("\ntabulate-iterlog expands X1..Xr into one column per depth.\n");
    out.push_str("kind is one of sample, extrapolated, reference, theta, threshold where it appears.\n");
    out
}

pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Ordered key/value pairs written before the rows.
pub type Provenance = Vec<(String, String)>;

pub fn write(table: &Table, provenance: &Provenance, format: Format, out: Option<&Path>) -> io::Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match format {
        Format::Csv => write_csv(table, provenance, sink),
        Format::Json => write_json(table, provenance, sink),
    }
}

fn write_csv(table: &Table, provenance: &Provenance, mut sink: Box<dyn Write>) -> io::Result<()> {
    let header: Vec<String> = provenance.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(sink, "# {}", header.join(" "))?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()
}

fn write_json(table: &Table, provenance: &Provenance, mut sink: Box<dyn Write>) -> io::Result<()> {
    let mut prov = Map::new();
    for (k, v) in provenance {
        prov.insert(k.clone(), Value::String(v.clone()));
    }
    let mut head = Map::new();
    head.insert("provenance".into(), Value::Object(prov));
    writeln!(sink, "{}", Value::Object(head))?;
    for row in &table.rows {
        let mut obj = Map::new();
        for (c, v) in table.columns.iter().zip(row) {
            obj.insert(c.clone(), Value::String(v.clone()));
        }
        writeln!(sink, "{}", Value::Object(obj))?;
    }
    sink.flush()
}
