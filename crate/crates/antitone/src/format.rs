//! JSON system files.
//!
//! ```json
//! { "n": 2, "k": [-9, -10], "M": [[0.75, 1], [1, 1]], "box": { "lo": [1e-3, 1e-3], "hi": [100, 100] } }
//! ```
//!
//! A file may instead carry a `grid` block with `Y_LL`, `V_star` and `P_c`,
//! which is reduced to `(k, M)` on load. `classify` also accepts a bare
//! matrix (an array of rows).

use std::io::Read;
use std::path::Path;

use antitone_core::linalg::SquareMatrix;
use antitone_core::solve::SearchBox;
use antitone_core::system::{ingest_grid, reduce_grid, ElectricSystem, GridReduction, GridSpec};
use antitone_core::vecorder::{OrderedVector, PositiveVector};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: Option<usize>,
    pub k: Option<Vec<f64>>,
    #[serde(rename = "M")]
    pub m: Option<Vec<Vec<f64>>>,
    #[serde(rename = "box")]
    pub search_box: Option<BoxSpec>,
    pub grid: Option<GridBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(rename = "Y_LL")]
    pub y_ll: Vec<Vec<f64>>,
    #[serde(rename = "V_star")]
    pub v_star: Vec<f64>,
    #[serde(rename = "P_c")]
    pub p_c: Vec<f64>,
}

/// A validated system plus the optional search box from the file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub system: ElectricSystem,
    pub search_box: Option<SearchBox>,
}

fn field(name: &'static str, msg: impl Into<String>) -> CliError {
    CliError::Field { field: name, msg: msg.into() }
}

/// Reads a path, or stdin when the path is `-`.
pub fn read_source(path: &str, stdin: &mut dyn Read) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(Path::new(path))?)
    }
}

pub fn parse_matrix(name: &'static str, rows: &[Vec<f64>], n: Option<usize>) -> Result<SquareMatrix, CliError> {
    let n = n.unwrap_or(rows.len());
    if n == 0 {
        return Err(field(name, "matrix is empty"));
    }
    if rows.len() != n {
        return Err(field(name, format!("expected {n} rows, found {}", rows.len())));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(field(name, format!("row {} has {} entries, expected {n}", i + 1, r.len())));
    }
    SquareMatrix::from_rows(rows).map_err(|e| field(name, e.to_string()))
}

fn parse_vector(name: &'static str, v: &[f64], n: usize) -> Result<OrderedVector, CliError> {
    if v.len() != n {
        return Err(field(name, format!("expected {n} entries, found {}", v.len())));
    }
    OrderedVector::from_slice(v).map_err(|e| field(name, e.to_string()))
}

fn parse_positive(name: &'static str, v: &[f64], n: usize) -> Result<PositiveVector, CliError> {
    PositiveVector::try_from(parse_vector(name, v, n)?).map_err(|e| field(name, e.to_string()))
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    fn grid_spec(&self) -> Result<Option<GridSpec>, CliError> {
        let Some(g) = &self.grid else { return Ok(None) };
        let y_ll = parse_matrix("grid.Y_LL", &g.y_ll, self.n)?;
        let n = y_ll.dim();
        Ok(Some(GridSpec {
            y_ll,
            v_star: parse_positive("grid.V_star", &g.v_star, n)?,
            p_c: parse_vector("grid.P_c", &g.p_c, n)?,
        }))
    }

    /// Grid reduction without the antitone acceptance test.
    pub fn reduce(&self) -> Result<(GridSpec, GridReduction), CliError> {
        let spec = self.grid_spec()?.ok_or_else(|| field("grid", "missing grid block"))?;
        let red = reduce_grid(&spec)?;
        Ok((spec, red))
    }

    pub fn into_system(self) -> Result<Loaded, CliError> {
        let direct = self.k.is_some() || self.m.is_some();
        let system = match (direct, self.grid.is_some()) {
            (true, true) => return Err(field("grid", "give either (k, M) or grid, not both")),
            (false, false) => return Err(field("M", "missing; give (k, M) or a grid block")),
            (false, true) => {
                let spec = self.grid_spec()?.expect("grid present");
                ingest_grid(&spec)?
            }
            (true, false) => {
                let n = self.n.ok_or_else(|| field("n", "missing"))?;
                let m = parse_matrix("M", self.m.as_deref().ok_or_else(|| field("M", "missing"))?, Some(n))?;
                let k = parse_vector("k", self.k.as_deref().ok_or_else(|| field("k", "missing"))?, n)?;
                ElectricSystem::new(k, m)?
            }
        };
        let n = system.dim();
        let search_box = match &self.search_box {
            None => None,
            Some(b) => Some(SearchBox::Explicit { lo: parse_positive("box.lo", &b.lo, n)?, hi: parse_positive("box.hi", &b.hi, n)? }),
        };
        Ok(Loaded { system, search_box })
    }
}

/// Matrix to classify: a bare array of rows, or the `M` of a system file.
pub fn parse_classify_input(text: &str) -> Result<SquareMatrix, CliError> {
    let value: Value = serde_json::from_str(text)?;
    if value.is_array() {
        let rows: Vec<Vec<f64>> = serde_json::from_value(value)?;
        return parse_matrix("matrix", &rows, None);
    }
    let file: SystemFile = serde_json::from_value(value)?;
    match &file.m {
        Some(rows) => parse_matrix("M", rows, file.n),
        None => Ok(file.into_system()?.system.m().clone()),
    }
}

/// `"a,b,c"` to a list of reals.
pub fn parse_list(name: &'static str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| field(name, format!("`{t}` is not a number"))))
        .collect()
}

/// `"lo1,lo2:hi1,hi2"` to an explicit box.
pub fn parse_box(s: &str, n: usize) -> Result<SearchBox, CliError> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| field("box", "expected LO:HI with comma-separated corners"))?;
    Ok(SearchBox::Explicit {
        lo: parse_positive("box.lo", &parse_list("box.lo", lo)?, n)?,
        hi: parse_positive("box.hi", &parse_list("box.hi", hi)?, n)?,
    })
}

pub fn parse_start(s: &str, n: usize) -> Result<PositiveVector, CliError> {
    parse_positive("start", &parse_list("start", s)?, n)
}
