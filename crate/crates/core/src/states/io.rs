//! JSON state files.
//!
//! Matrix form: `{"dims":[2,2,2], "label":"...", "matrix":[[[re,im],...],...]}`
//! (row-major). Named shorthand: `{"family":"ghz_plus","params":{"p":0.3}}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use super::{named_state, FamilySpec, MultipartiteState};
use crate::error::{QcorrError, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::{Real, C};

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0.0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn state_to_json<T: Real>(state: &MultipartiteState<T>) -> String {
    let mut out = String::from("{\n  \"dims\": [");
    let dims: Vec<String> = state.dims().iter().map(|d| d.to_string()).collect();
    out.push_str(&dims.join(", "));
    out.push_str("],\n");
    if let Some(label) = state.label() {
        let _ = writeln!(out, "  \"label\": {},", Value::String(label.to_string()));
    }
    if let Some(origin) = state.origin() {
        let _ = writeln!(out, "  \"family\": \"{}\",", origin.family);
        let params: Vec<String> = origin
            .params
            .iter()
            .map(|(k, v)| format!("{}: {}", Value::String(k.clone()), num(*v)))
            .collect();
        let _ = writeln!(out, "  \"params\": {{{}}},", params.join(", "));
    }
    out.push_str("  \"matrix\": [\n");
    let n = state.dim();
    for i in 0..n {
        out.push_str("    [");
        let row: Vec<String> = (0..n)
            .map(|j| {
                let z = state.rho()[(i, j)];
                format!("[{}, {}]", num(z.re.to_f64_lossy()), num(z.im.to_f64_lossy()))
            })
            .collect();
        out.push_str(&row.join(", "));
        out.push_str(if i + 1 < n { "],\n" } else { "]\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

fn format_err(msg: impl Into<String>) -> QcorrError {
    QcorrError::Format(msg.into())
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| format_err(format!("{what} is not a number")))
}

pub fn state_from_json<T: Real>(text: &str) -> Result<MultipartiteState<T>> {
    let v: Value = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| format_err("top level is not an object"))?;

    let origin = match obj.get("family") {
        Some(f) => {
            let family = f
                .as_str()
                .ok_or_else(|| format_err("\"family\" is not a string"))?
                .parse()
                .map_err(|e: QcorrError| format_err(e.to_string()))?;
            let mut params = BTreeMap::new();
            if let Some(p) = obj.get("params") {
                let p = p.as_object().ok_or_else(|| format_err("\"params\" is not an object"))?;
                for (k, x) in p {
                    params.insert(k.clone(), as_f64(x, k)?);
                }
            }
            Some(FamilySpec::new(family, params))
        }
        None => None,
    };

    let Some(matrix) = obj.get("matrix") else {
        let fam_spec = origin.ok_or_else(|| format_err("neither \"matrix\" nor \"family\" present"))?;
        return named_state(fam_spec.family.name(), &fam_spec.params);
    };

    let dims: Vec<usize> = obj
        .get("dims")
        .and_then(Value::as_array)
        .ok_or_else(|| format_err("missing \"dims\" array"))?
        .iter()
        .map(|d| {
            d.as_u64()
                .filter(|&d| d > 0)
                .map(|d| d as usize)
                .ok_or_else(|| format_err("dims must be positive integers"))
        })
        .collect::<Result<_>>()?;
    let n: usize = dims.iter().product();
    let rows = matrix.as_array().ok_or_else(|| format_err("\"matrix\" is not an array"))?;
    if rows.len() != n {
        return Err(format_err(format!(
            "dims {dims:?} need {n} rows, matrix has {}",
            rows.len()
        )));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| format_err(format!("row {i} is not an array")))?;
        if row.len() != n {
            return Err(format_err(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, z) in row.iter().enumerate() {
            let pair = z
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| format_err(format!("entry ({i},{j}) is not [re, im]")))?;
            let re = as_f64(&pair[0], "real part")?;
            let im = as_f64(&pair[1], "imaginary part")?;
            data.push(C::new(T::of(re), T::of(im)));
        }
    }
    let rho = ComplexMatrix::from_row_major(n, n, data)?;
    let label = obj.get("label").and_then(Value::as_str).map(str::to_string);
    let state = MultipartiteState::new(dims, rho, label)?;
    Ok(match origin {
        Some(o) => state.with_origin(o),
        None => state,
    })
}

pub fn save_state<T: Real>(state: &MultipartiteState<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, state_to_json(state))?;
    Ok(())
}

pub fn load_state<T: Real>(path: impl AsRef<Path>) -> Result<MultipartiteState<T>> {
    state_from_json(&std::fs::read_to_string(path)?)
}
