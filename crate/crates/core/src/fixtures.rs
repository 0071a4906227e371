//! Reference `C` matrices for `m = 2..=7` as rational expressions in `p`.
//!
//! File format: a `[m=N]` header, then `N` rows of `|`-separated expressions.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::evaluate_at;
use crate::matrix::RationalMatrix;

const SOURCE: &str = include_str!("../fixtures/c_matrices.txt");

pub type ExpressionTable = Vec<Vec<String>>;

pub fn parse_fixture(src: &str) -> Result<BTreeMap<u32, ExpressionTable>> {
    let mut out: BTreeMap<u32, ExpressionTable> = BTreeMap::new();
    let mut current: Option<u32> = None;
    for (lineno, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(header) = line.strip_prefix("[m=").and_then(|h| h.strip_suffix(']')) {
            let m: u32 = header.parse().map_err(|_| Error::Parse(format!("line {}: bad header", lineno + 1)))?;
            if out.insert(m, Vec::new()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate block m={m}", lineno + 1)));
            }
            current = Some(m);
            continue;
        }
        let m = current.ok_or_else(|| Error::Parse(format!("line {}: row before any header", lineno + 1)))?;
        out.get_mut(&m).expect("inserted at header").push(line.split('|').map(|e| e.trim().to_string()).collect());
    }
    for (m, rows) in &out {
        let n = *m as usize;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse(format!("block m={m} is not {n}x{n}")));
        }
    }
    Ok(out)
}

/// Bundled expression tables, keyed by `m`.
pub fn reference_tables() -> BTreeMap<u32, ExpressionTable> {
    parse_fixture(SOURCE).expect("bundled fixture parses")
}

pub fn available_sizes() -> Vec<u32> {
    reference_tables().keys().copied().collect()
}

/// The reference matrix for `m`, evaluated at `p`.
pub fn reference_matrix(p: u64, m: u32) -> Result<RationalMatrix> {
    let tables = reference_tables();
    let table = tables.get(&m).ok_or_else(|| Error::InvalidParams(format!("no reference matrix for m={m}")))?;
    let rows = table
        .iter()
        .map(|row| row.iter().map(|e| evaluate_at(e, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    RationalMatrix::from_rows(rows)
}

/// Every table is bisymmetric at each sample prime.
pub fn audit_bisymmetry(samples: &[u64]) -> Vec<(u32, u64)> {
    let mut bad = Vec::new();
    for m in available_sizes() {
        for &p in samples {
            match reference_matrix(p, m) {
                Ok(c) if c.is_bisymmetric() => {}
                _ => bad.push((m, p)),
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn bundled_tables() {
        assert_eq!(available_sizes(), vec![2, 3, 4, 5, 6, 7]);
        assert!(audit_bisymmetry(&[2, 3, 5, 7, 11, 13]).is_empty());
    }

    #[test]
    fn spot_values() {
        assert_eq!(*reference_matrix(2, 4).unwrap().get(0, 0), frac(-272, 135));
        let c = reference_matrix(3, 2).unwrap();
        assert_eq!(*c.get(0, 0), frac(-27, 16));
        assert_eq!(*c.get(1, 1), frac(-27, 16));
        assert_eq!(*reference_matrix(2, 3).unwrap().get(1, 0), frac(-2, 3));
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_fixture("1 | 2\n").is_err());
        assert!(parse_fixture("[m=2]\n1 | 2\n").is_err());
        assert!(parse_fixture("[m=x]\n").is_err());
        assert!(parse_fixture("[m=1]\n0\n[m=1]\n0\n").is_err());
        let ok = parse_fixture("# note\n[m=1]\n\n0\n").unwrap();
        assert_eq!(ok[&1], vec![vec!["0".to_string()]]);
        assert!(reference_matrix(2, 9).is_err());
    }
}
