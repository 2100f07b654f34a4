//! Table reproduction and rendering.

use rayon::prelude::*;
use serde_json::{json, Value};

use sepdim::dim::{self, ProbeConfig};
use sepdim::SystemShape;

use crate::tables::{table1_row, table2_row};

/// Outcome of comparing one certified value with the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Certified value equals the table entry.
    Match,
    /// Certified value is below the table entry: the probe did not reach
    /// the bound; retry with more trials or a larger box.
    Unsaturated,
    /// Certified value is above the table entry.
    AboveTable,
    /// Certified rank above the theoretical bound: a hard inconsistency.
    ExceedsBound,
    /// No table entry for this cell.
    NoExpectation,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Match => "match",
            Status::Unsaturated => "unsaturated",
            Status::AboveTable => "above-table",
            Status::ExceedsBound => "exceeds-bound",
            Status::NoExpectation => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub shape: SystemShape,
    pub r: usize,
    pub real: bool,
    pub rank: usize,
    pub bound: usize,
    pub saturated: bool,
    pub seed: u64,
    pub expected: Option<usize>,
    pub status: Status,
}

impl Row {
    /// Affine dimension: rank minus one.
    pub fn dim(&self) -> usize {
        self.rank.saturating_sub(1)
    }

    pub fn mode(&self) -> &'static str {
        if self.real {
            "real"
        } else {
            "complex"
        }
    }
}

fn status(rank: usize, bound: usize, expected: Option<usize>) -> Status {
    let dim = rank.saturating_sub(1);
    if rank > bound {
        Status::ExceedsBound
    } else {
        match expected {
            None => Status::NoExpectation,
            Some(e) if e == dim => Status::Match,
            Some(e) if dim < e => Status::Unsaturated,
            Some(_) => Status::AboveTable,
        }
    }
}

/// Certified `dim S'_r` for `r = 1..=r_max` (default: the plateau start `l`).
pub fn table1(shape: &SystemShape, r_max: Option<usize>, cfg: ProbeConfig) -> sepdim::Result<Vec<Row>> {
    let r_max = r_max.unwrap_or_else(|| dim::length_lower_bound(shape));
    let certs = dim::probe_profile(shape, r_max, false, cfg)?;
    let row = table1_row(shape.dims());
    Ok(certs
        .into_iter()
        .map(|c| {
            let expected = row.and_then(|t| t.expected(c.r));
            Row {
                status: status(c.jacobian_rank, c.upper_bound, expected),
                shape: shape.clone(),
                r: c.r,
                real: false,
                rank: c.jacobian_rank,
                bound: c.upper_bound,
                saturated: c.saturated,
                seed: c.seed,
                expected,
            }
        })
        .collect())
}

/// Certified lower bounds for `dim S^G_r` on `M x N`, `r` up to the row
/// length of the table (or until `dim H^G` is reached).
pub fn table2(m: usize, n: usize, cfg: ProbeConfig) -> sepdim::Result<Vec<Row>> {
    let shape = SystemShape::new(vec![m, n])?;
    let row = table2_row(m, n);
    let r_max = match row {
        Some(t) => t.values.len(),
        None => dim::dim_h_g(&shape).div_ceil(dim::per_term_dim(&shape, true)),
    };
    let certs = dim::probe_profile(&shape, r_max, true, cfg)?;
    Ok(certs
        .into_iter()
        .map(|c| {
            let expected = row.map(|t| t.values[c.r - 1]);
            Row {
                status: status(c.jacobian_rank, c.upper_bound, expected),
                shape: shape.clone(),
                r: c.r,
                real: true,
                rank: c.jacobian_rank,
                bound: c.upper_bound,
                saturated: c.saturated,
                seed: c.seed,
                expected,
            }
        })
        .collect())
}

/// Runs several shapes concurrently; output order follows the input.
pub fn table1_many(shapes: &[SystemShape], cfg: ProbeConfig) -> sepdim::Result<Vec<Row>> {
    let parts: Vec<Vec<Row>> = shapes
        .par_iter()
        .map(|s| table1(s, None, cfg))
        .collect::<sepdim::Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

pub fn table2_many(pairs: &[(usize, usize)], cfg: ProbeConfig) -> sepdim::Result<Vec<Row>> {
    let parts: Vec<Vec<Row>> = pairs
        .par_iter()
        .map(|&(m, n)| table2(m, n, cfg))
        .collect::<sepdim::Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn shape_label(shape: &SystemShape) -> String {
    shape
        .dims()
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

pub const CSV_HEADER: &str = "shape,r,mode,rank,dim,bound,saturated,seed";

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            shape_label(&row.shape),
            row.r,
            row.mode(),
            row.rank,
            row.dim(),
            row.bound,
            row.saturated,
            row.seed
        ));
    }
    out
}

pub fn rows_to_json(table: &str, rows: &[Row]) -> Value {
    json!({
        "table": table,
        "rows": rows.iter().map(|row| json!({
            "shape": row.shape.dims(),
            "r": row.r,
            "mode": row.mode(),
            "rank": row.rank,
            "dim": row.dim(),
            "bound": row.bound,
            "saturated": row.saturated,
            "seed": row.seed,
            "expected": row.expected,
            "status": row.status.as_str(),
        })).collect::<Vec<_>>(),
    })
}

pub fn rows_to_text(rows: &[Row]) -> String {
    let mut out = String::new();
    let mut current: Option<&SystemShape> = None;
    for row in rows {
        if current != Some(&row.shape) {
            out.push_str(&format!(
                "shape {} ({})\n{:>4} {:>6} {:>6} {:>6} {:>9} {:>9}  status\n",
                row.shape,
                row.mode(),
                "r",
                "rank",
                "dim",
                "bound",
                "saturated",
                "expected"
            ));
            current = Some(&row.shape);
        }
        let expected = row.expected.map_or("-".to_string(), |e| e.to_string());
        out.push_str(&format!(
            "{:>4} {:>6} {:>6} {:>6} {:>9} {:>9}  {}\n",
            row.r,
            row.rank,
            row.dim(),
            row.bound,
            row.saturated,
            expected,
            row.status.as_str()
        ));
    }
    out
}

/// Any row whose certified rank exceeds its bound.
pub fn has_hard_failure(rows: &[Row]) -> bool {
    rows.iter().any(|r| r.status == Status::ExceedsBound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_rules() {
        assert_eq!(status(10, 10, Some(9)), Status::Match);
        assert_eq!(status(9, 10, Some(9)), Status::Unsaturated);
        assert_eq!(status(10, 10, Some(8)), Status::AboveTable);
        assert_eq!(status(11, 10, Some(10)), Status::ExceedsBound);
        assert_eq!(status(5, 10, None), Status::NoExpectation);
    }

    #[test]
    fn two_by_three_row() {
        let shape = SystemShape::new(vec![2, 3]).unwrap();
        let rows = table1(&shape, None, ProbeConfig::default()).unwrap();
        let dims: Vec<usize> = rows.iter().map(Row::dim).collect();
        assert_eq!(dims, vec![6, 13, 20, 27, 33, 35]);
        assert!(rows.iter().all(|r| r.status == Status::Match));
        let csv = rows_to_csv(&rows);
        assert!(csv.starts_with("shape,r,mode,rank,dim,bound,saturated,seed\n2x3,1,complex,7,6,7,true,0\n"));
    }
}
