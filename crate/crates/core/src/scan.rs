//! Parameter sweeps over single-parameter families, with named columns
//! and sign-change location by bisection.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{QcorrError, Result};
use crate::optim::OptimizerConfig;
use crate::relations::{evaluate_profile, fmt_num, profile, Measure, Profile, RelationId, RelationReport, CSV_SCHEMA};
use crate::states::{party_letter, Family, FamilySpec, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combo {
    /// `Q(X:Y) + Q(XY:Z)`
    Chain,
    /// `Q(YZ:X) + Q(XZ:Y)`
    Upper,
    /// `Q(X:Y) + Q(X:Z)`
    Pairs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregate {
    /// Roles in the original party order.
    Identity,
    Min,
    Max,
}

/// A parsed column name.
///
/// * `p`: the family parameter
/// * `D_A_B_C`, `E_BC_A`, `T_A_B`: a measure on a grouping, blocks joined by `_`
/// * `D_chain`, `D_upper`, `D_pairs`, optionally suffixed `_min` / `_max`
///   for the extremum over the six role assignments
/// * `res_R_D_C2_BAC`: residual of a relation under a permutation;
///   `res_R_D_C2_min` is the smallest over permutations
#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Param,
    Value(Measure, Partition),
    Combination(Measure, Combo, Aggregate),
    Residual(RelationId, Option<String>),
}

fn parse_perm(s: &str) -> Option<String> {
    let mut letters: Vec<char> = s.chars().collect();
    if letters.len() != 3 {
        return None;
    }
    letters.sort_unstable();
    (letters == ['A', 'B', 'C']).then(|| s.to_string())
}

impl Column {
    pub fn parse(name: &str) -> Result<Self> {
        let bad = || QcorrError::Param(format!("unknown column {name:?}"));
        if name == "p" {
            return Ok(Column::Param);
        }
        if let Some(rest) = name.strip_prefix("res_") {
            let (id, tail) = rest.rsplit_once('_').ok_or_else(bad)?;
            let id: RelationId = id.parse().map_err(|_| bad())?;
            return match tail {
                "min" => Ok(Column::Residual(id, None)),
                t => parse_perm(t).map(|p| Column::Residual(id, Some(p))).ok_or_else(bad),
            };
        }
        let (m, rest) = name.split_once('_').ok_or_else(bad)?;
        let m: Measure = m.parse().map_err(|_| bad())?;
        let (combo, agg) = match rest.split_once('_') {
            Some((c, "min")) => (c, Aggregate::Min),
            Some((c, "max")) => (c, Aggregate::Max),
            _ => (rest, Aggregate::Identity),
        };
        let combo = match combo {
            "chain" => Some(Combo::Chain),
            "upper" => Some(Combo::Upper),
            "pairs" => Some(Combo::Pairs),
            _ => None,
        };
        if let Some(c) = combo {
            return Ok(Column::Combination(m, c, agg));
        }
        let part = Partition::parse(&rest.replace('_', ":")).map_err(|_| bad())?;
        if part.blocks().len() < 2 || part.parties().iter().any(|&p| p > 2) {
            return Err(bad());
        }
        Ok(Column::Value(m, part))
    }

    /// Measures the column depends on.
    pub fn measures(&self) -> Vec<Measure> {
        match self {
            Column::Param => vec![],
            Column::Value(m, _) | Column::Combination(m, _, _) => vec![*m],
            Column::Residual(id, _) => vec![id.measure()],
        }
    }
}

/// Default column set for the given measures.
pub fn default_columns(measures: &[Measure]) -> Vec<String> {
    let mut out = vec!["p".to_string()];
    for m in measures {
        for part in ["A_B_C", "A_BC", "AC_B", "AB_C", "A_B", "A_C", "B_C"] {
            out.push(format!("{m}_{part}"));
        }
        for c in ["chain", "upper", "pairs"] {
            out.push(format!("{m}_{c}"));
            out.push(format!("{m}_{c}_min"));
            out.push(format!("{m}_{c}_max"));
        }
    }
    out
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn combo_value(p: &Profile, m: Measure, c: Combo, [x, y, z]: [usize; 3]) -> Result<f64> {
    let get = |blocks: Vec<Vec<usize>>| -> Result<f64> {
        let part = Partition::new(blocks)?;
        p.get(m, &part)
            .map(|t| t.value)
            .ok_or_else(|| QcorrError::Param(format!("{m}({part}) was not evaluated")))
    };
    Ok(match c {
        Combo::Chain => get(vec![vec![x], vec![y]])? + get(vec![vec![x, y], vec![z]])?,
        Combo::Upper => get(vec![vec![y, z], vec![x]])? + get(vec![vec![x, z], vec![y]])?,
        Combo::Pairs => get(vec![vec![x], vec![y]])? + get(vec![vec![x], vec![z]])?,
    })
}

/// Value of a column given the evaluated profile (and relation report when
/// residual columns are requested).
pub fn column_value(col: &Column, p_param: f64, prof: &Profile, report: Option<&RelationReport>) -> Result<f64> {
    match col {
        Column::Param => Ok(p_param),
        Column::Value(m, part) => prof
            .get(*m, part)
            .map(|t| t.value)
            .ok_or_else(|| QcorrError::Param(format!("{m}({part}) was not evaluated"))),
        Column::Combination(m, c, agg) => {
            let vals = match agg {
                Aggregate::Identity => vec![combo_value(prof, *m, *c, [0, 1, 2])?],
                _ => PERMS.iter().map(|&q| combo_value(prof, *m, *c, q)).collect::<Result<_>>()?,
            };
            Ok(match agg {
                Aggregate::Max => vals.into_iter().fold(f64::NEG_INFINITY, f64::max),
                _ => vals.into_iter().fold(f64::INFINITY, f64::min),
            })
        }
        Column::Residual(id, perm) => {
            let r = report.ok_or_else(|| QcorrError::Param("relations were not evaluated".into()))?;
            let rows = r.rows_for(*id).filter(|row| perm.as_ref().is_none_or(|q| &row.permutation == q));
            Ok(rows.map(|row| row.residual).fold(f64::INFINITY, f64::min))
        }
    }
}

fn needed_measures(cols: &[Column]) -> Vec<Measure> {
    let mut ms: Vec<Measure> = cols.iter().flat_map(Column::measures).collect();
    ms.sort();
    ms.dedup();
    ms
}

/// Evaluates all columns for one parameter value.
pub fn scan_point(family: Family, p: f64, cols: &[Column], cfg: &OptimizerConfig) -> Result<Vec<f64>> {
    let s = FamilySpec::with_p(family, p).build::<f64>()?;
    let ms = needed_measures(cols);
    let prof = profile(&s, &ms, cfg)?;
    let report = if cols.iter().any(|c| matches!(c, Column::Residual(..))) {
        Some(evaluate_profile(None, prof.clone(), &ms, cfg)?)
    } else {
        None
    };
    cols.iter().map(|c| column_value(c, p, &prof, report.as_ref())).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanTable {
    pub family: Family,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScanTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{CSV_SCHEMA}")?;
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| fmt_num(x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn single_parameter(family: Family) -> Result<()> {
    if family.is_single_parameter() {
        Ok(())
    } else {
        Err(QcorrError::Param(format!("{family} has no parameter to sweep")))
    }
}

pub fn scan(family: Family, grid: &[f64], columns: &[String], cfg: &OptimizerConfig) -> Result<ScanTable> {
    single_parameter(family)?;
    let cols: Vec<Column> = columns.iter().map(|c| Column::parse(c)).collect::<Result<_>>()?;
    let rows = grid
        .iter()
        .map(|&p| scan_point(family, p, &cols, cfg))
        .collect::<Result<_>>()?;
    Ok(ScanTable {
        family,
        columns: columns.to_vec(),
        rows,
    })
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Crossing {
    pub column: String,
    /// Midpoint of the final bracket.
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub evaluations: usize,
}

/// First sign change of `f` along `grid`, narrowed by bisection to width
/// `p_tol`. Returns the final bracket and the number of evaluations.
pub fn bisect_sign_change(
    grid: &[f64],
    p_tol: f64,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<Option<(f64, f64, usize)>> {
    let mut evaluations = 0;
    let mut prev: Option<(f64, f64)> = None;
    for &p in grid {
        let v = f(p)?;
        evaluations += 1;
        if let Some((p0, v0)) = prev {
            if v0.signum() != v.signum() || v == 0.0 {
                let (mut lo, mut hi, mut vlo) = (p0, p, v0);
                while hi - lo > p_tol {
                    let mid = 0.5 * (lo + hi);
                    let vm = f(mid)?;
                    evaluations += 1;
                    if vm.signum() == vlo.signum() && vm != 0.0 {
                        lo = mid;
                        vlo = vm;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(Some((lo, hi, evaluations)));
            }
        }
        prev = Some((p, v));
    }
    Ok(None)
}

/// Locates the first sign change of `column` along the grid. Returns
/// `None` when the column keeps its sign over the whole grid.
pub fn find_crossing(
    family: Family,
    grid: &[f64],
    column: &str,
    p_tol: f64,
    cfg: &OptimizerConfig,
) -> Result<Option<Crossing>> {
    single_parameter(family)?;
    let col = [Column::parse(column)?];
    let found = bisect_sign_change(grid, p_tol, |p| Ok(scan_point(family, p, &col, cfg)?[0]))?;
    Ok(found.map(|(lower, upper, evaluations)| Crossing {
        column: column.to_string(),
        p: 0.5 * (lower + upper),
        lower,
        upper,
        evaluations,
    }))
}

/// Column names grouped by measure, for help output.
pub fn column_help() -> BTreeMap<&'static str, String> {
    let parts: Vec<String> = ["A:B:C", "A:BC", "AB:C", "AC:B", "A:B", "A:C", "B:C"]
        .iter()
        .map(|p| p.replace(':', "_"))
        .collect();
    BTreeMap::from([
        ("param", "p".to_string()),
        ("value", format!("<Q>_<grouping>, Q in T,D,E,C; grouping in {}", parts.join(", "))),
        ("combination", "<Q>_chain, <Q>_upper, <Q>_pairs, each with optional _min or _max".to_string()),
        (
            "residual",
            format!(
                "res_<relation>_<permutation> or res_<relation>_min, e.g. res_R_D_C2_{}{}{}",
                party_letter(1),
                party_letter(0),
                party_letter(2)
            ),
        ),
    ])
}
