//! Bundled reference values for maximum admissible sets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::zmod::DigitSet;

const EXPECTED_CSV: &str = include_str!("../../data/expected.csv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    /// No reducible set of this size was found; admissibility needs the program.
    Starred,
    /// The printed set is malformed, so only its size is recorded.
    UnverifiableAsPrinted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpectedRow {
    pub p: u32,
    pub k: usize,
    pub max_size: usize,
    /// `false` when only a lower bound is known.
    pub exact: bool,
    pub count: Option<u64>,
    pub first_set: Option<DigitSet>,
    /// Initial matrices that reduce `first_set`: any of `A`, `RREF`.
    pub initial: Vec<String>,
    /// Size of the general construction, where one is printed.
    pub parenthetical: Option<usize>,
    pub status: RowStatus,
}

pub fn parse_expected(text: &str) -> Result<Vec<ExpectedRow>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("expected-values line {}: {what}", lineno + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad("wrong number of fields"));
        }
        let num = |s: &str, what: &str| s.parse::<u64>().map_err(|_| bad(what));
        let p = num(f[0], "p")? as u32;
        let status = match f[8] {
            "ok" => RowStatus::Ok,
            "starred" => RowStatus::Starred,
            "unverifiable-as-printed" => RowStatus::UnverifiableAsPrinted,
            _ => return Err(bad("status")),
        };
        rows.push(ExpectedRow {
            p,
            k: num(f[1], "k")? as usize,
            max_size: num(f[2], "max_size")? as usize,
            exact: match f[3] {
                "=" => true,
                ">=" => false,
                _ => return Err(bad("bound")),
            },
            count: if f[4].is_empty() { None } else { Some(num(f[4], "count")?) },
            first_set: if f[5].is_empty() {
                None
            } else {
                Some(DigitSet::parse_compact(p, f[5])?)
            },
            initial: f[6].split(';').filter(|s| !s.is_empty()).map(str::to_string).collect(),
            parenthetical: if f[7].is_empty() {
                None
            } else {
                Some(num(f[7], "parenthetical")? as usize)
            },
            status,
        });
    }
    Ok(rows)
}

/// The bundled table rows.
pub fn expected_rows() -> Vec<ExpectedRow> {
    parse_expected(EXPECTED_CSV).expect("bundled expected values parse")
}

pub fn expected_row(p: u32, k: usize) -> Option<ExpectedRow> {
    expected_rows().into_iter().find(|r| r.p == p && r.k == k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_rows_are_consistent() {
        let rows = expected_rows();
        assert_eq!(rows.len(), 54);
        for r in &rows {
            match (&r.first_set, r.status) {
                (Some(d), _) => assert_eq!(d.len(), r.max_size, "({}, {})", r.p, r.k),
                (None, status) => assert_eq!(status, RowStatus::UnverifiableAsPrinted),
            }
            if r.status == RowStatus::Starred {
                assert!(r.initial.is_empty());
            }
        }
    }

    #[test]
    fn malformed_row_keeps_only_its_size() {
        let r = expected_row(29, 6).unwrap();
        assert!(r.first_set.is_none());
        // [0,15] ∪ {17,18,23} ∪ [25,27] has 16 + 3 + 3 elements.
        assert_eq!(r.max_size, 16 + 3 + 3);
        assert!(!r.exact);
    }

    #[test]
    fn rejects_bad_lines() {
        let header = "p,k,max_size,bound,count,first_set,initial,parenthetical,status\n";
        assert!(parse_expected(&format!("{header}5,3,3,~,10,0:2,A,,ok")).is_err());
        assert!(parse_expected(&format!("{header}5,3,3,=,10,0:2,A,,maybe")).is_err());
        assert!(parse_expected(&format!("{header}5,3,3,=,10,0:2")).is_err());
    }
}
