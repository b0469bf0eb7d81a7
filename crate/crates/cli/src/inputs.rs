use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use relu_forge::encoders::BitTable;

fn is_json(path: &Path, text: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('[')
}

/// CSV cells, one `Vec` per record, blank records skipped.
fn csv_records(text: &str) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let cells: Vec<String> = rec.iter().filter(|c| !c.is_empty()).map(str::to_string).collect();
        if !cells.is_empty() {
            out.push(cells);
        }
    }
    Ok(out)
}

/// A bit table from JSON (`[[0,1],[1,1]]` or `[0,1,1]`) or CSV (one row per line).
/// A single row or a flat array becomes a single column.
pub fn read_bits(path: &Path) -> Result<BitTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows: Vec<Vec<u8>> = if is_json(path, &text) {
        let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let arr = v.as_array().context("bit table must be a JSON array")?;
        if arr.iter().all(|x| x.is_array()) {
            arr.iter()
                .map(|row| {
                    row.as_array()
                        .expect("checked")
                        .iter()
                        .map(|b| b.as_u64().and_then(|b| u8::try_from(b).ok()).context("bits must be 0 or 1"))
                        .collect()
                })
                .collect::<Result<_>>()?
        } else {
            vec![arr
                .iter()
                .map(|b| b.as_u64().and_then(|b| u8::try_from(b).ok()).context("bits must be 0 or 1"))
                .collect::<Result<_>>()?]
        }
    } else {
        csv_records(&text)?
            .into_iter()
            .map(|r| r.iter().map(|c| c.parse::<u8>().with_context(|| format!("bad bit `{c}`"))).collect())
            .collect::<Result<_>>()?
    };
    if rows.is_empty() {
        bail!("{} holds no bits", path.display());
    }
    let table = if rows.len() == 1 {
        BitTable::flat(rows.into_iter().next().expect("one row"))
    } else {
        BitTable::from_rows(rows)
    };
    Ok(table?)
}

/// Coefficients `ξ_i` from a JSON array or CSV of reals.
pub fn read_coeffs(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let xi: Vec<f64> = if is_json(path, &text) {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        csv_records(&text)?
            .into_iter()
            .flatten()
            .map(|c| c.parse::<f64>().with_context(|| format!("bad coefficient `{c}`")))
            .collect::<Result<_>>()?
    };
    if xi.is_empty() {
        bail!("{} holds no coefficients", path.display());
    }
    Ok(xi)
}
