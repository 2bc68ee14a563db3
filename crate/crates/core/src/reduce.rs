//! Reducibility: a sign-consistent nonzero row of `B = T·A` forces every
//! variable it touches to zero, so those columns can be deleted. If every
//! column goes, the only nonnegative kernel vector is zero.
//!
//! Rows are never renumbered: a row index in a trace refers to the initial
//! matrix `B`, and rows that have become zero are simply skipped.

use std::fmt;

use crate::constraints::ConstraintSystem;
use crate::error::{Error, Result};
use crate::matrix::{mat_mul, RatMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialMatrix {
    A,
    Rref,
    Custom(RatMatrix),
}

impl InitialMatrix {
    pub fn label(&self) -> &'static str {
        match self {
            InitialMatrix::A => "A",
            InitialMatrix::Rref => "RREF",
            InitialMatrix::Custom(_) => "CUSTOM",
        }
    }

    /// Materialises `B` for a system.
    pub fn apply(&self, system: &ConstraintSystem) -> Result<RatMatrix> {
        match self {
            InitialMatrix::A => Ok(system.matrix.clone()),
            InitialMatrix::Rref => Ok(system.matrix.rref().0),
            InitialMatrix::Custom(t) => {
                if t.cols() != system.matrix.rows() {
                    return Err(Error::DimensionMismatch(format!(
                        "T has {} columns but A has {} rows",
                        t.cols(),
                        system.matrix.rows()
                    )));
                }
                if !t.is_invertible() {
                    return Err(Error::NotInvertible);
                }
                mat_mul(t, &system.matrix)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionStep {
    pub row: usize,
    pub sign: Sign,
    /// Deleted columns, original numbering, ascending.
    pub cols: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Reduced,
    Stuck,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Reduced => "REDUCED",
            Outcome::Stuck => "STUCK",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTrace {
    pub initial: InitialMatrix,
    pub steps: Vec<ReductionStep>,
    pub outcome: Outcome,
    pub surviving_columns: Vec<usize>,
}

/// Order in which candidate rows are scanned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RowOrder {
    #[default]
    TopmostFirst,
    BottommostFirst,
}

pub fn reduce(system: &ConstraintSystem, initial: InitialMatrix) -> Result<ReductionTrace> {
    reduce_with(system, initial, RowOrder::default())
}

pub fn reduce_with(system: &ConstraintSystem, initial: InitialMatrix, order: RowOrder) -> Result<ReductionTrace> {
    let b = initial.apply(system)?;
    let (steps, surviving_columns) = reduce_matrix(&b, order);
    let outcome = if surviving_columns.is_empty() {
        Outcome::Reduced
    } else {
        Outcome::Stuck
    };
    Ok(ReductionTrace {
        initial,
        steps,
        outcome,
        surviving_columns,
    })
}

/// Runs the deletion loop on `b`: take the first nonzero sign-consistent
/// row in `order`, delete its support, and rescan until none is left.
pub fn reduce_matrix(b: &RatMatrix, order: RowOrder) -> (Vec<ReductionStep>, Vec<usize>) {
    let support: Vec<Vec<(usize, bool)>> = (0..b.rows())
        .map(|r| {
            (0..b.cols())
                .filter_map(|c| {
                    let s = b.get(r, c).signum();
                    (s != 0).then_some((c, s > 0))
                })
                .collect()
        })
        .collect();
    let mut alive = vec![true; b.cols()];
    let mut live_rows: Vec<usize> = (0..b.rows()).filter(|&r| !support[r].is_empty()).collect();
    if order == RowOrder::BottommostFirst {
        live_rows.reverse();
    }
    let mut steps = Vec::new();
    loop {
        let mut chosen = None;
        live_rows.retain(|&r| support[r].iter().any(|&(c, _)| alive[c]));
        for &r in &live_rows {
            let mut pos = false;
            let mut neg = false;
            for &(c, p) in &support[r] {
                if alive[c] {
                    if p {
                        pos = true;
                    } else {
                        neg = true;
                    }
                    if pos && neg {
                        break;
                    }
                }
            }
            if pos != neg {
                chosen = Some((r, if pos { Sign::Plus } else { Sign::Minus }));
                break;
            }
        }
        let Some((row, sign)) = chosen else { break };
        let cols: Vec<usize> = support[row].iter().map(|&(c, _)| c).filter(|&c| alive[c]).collect();
        for &c in &cols {
            alive[c] = false;
        }
        steps.push(ReductionStep { row, sign, cols });
    }
    let surviving = (0..b.cols()).filter(|&c| alive[c]).collect();
    (steps, surviving)
}

/// Replays `trace` against a freshly materialised `B` and checks every
/// step and the final claim.
pub fn verify_trace(system: &ConstraintSystem, trace: &ReductionTrace) -> bool {
    let Ok(b) = trace.initial.apply(system) else {
        return false;
    };
    let mut alive = vec![true; b.cols()];
    for step in &trace.steps {
        if step.row >= b.rows() {
            return false;
        }
        let live: Vec<usize> = (0..b.cols())
            .filter(|&c| alive[c] && !b.get(step.row, c).is_zero())
            .collect();
        if live.is_empty() || live != step.cols {
            return false;
        }
        let want = match step.sign {
            Sign::Plus => 1,
            Sign::Minus => -1,
        };
        if live.iter().any(|&c| b.get(step.row, c).signum() != want) {
            return false;
        }
        for &c in &live {
            alive[c] = false;
        }
    }
    let surviving: Vec<usize> = (0..b.cols()).filter(|&c| alive[c]).collect();
    if surviving != trace.surviving_columns {
        return false;
    }
    match trace.outcome {
        Outcome::Reduced => surviving.is_empty(),
        Outcome::Stuck => {
            // A STUCK claim must leave no usable row behind.
            !surviving.is_empty()
                && (0..b.rows()).all(|r| {
                    let signs: Vec<i8> = surviving
                        .iter()
                        .map(|&c| b.get(r, c).signum())
                        .filter(|&s| s != 0)
                        .collect();
                    signs.is_empty() || (signs.contains(&1) && signs.contains(&-1))
                })
        }
    }
}

impl ReductionTrace {
    /// Line-oriented text form: `initial=…`, one `row=… sign=… cols=…` line
    /// per step, then `outcome=…`.
    pub fn to_text(&self) -> String {
        let mut s = format!("initial={}\n", self.initial.label());
        for step in &self.steps {
            let cols: Vec<String> = step.cols.iter().map(usize::to_string).collect();
            s.push_str(&format!("row={} sign={} cols={}\n", step.row, step.sign.symbol(), cols.join(",")));
        }
        s.push_str(&format!("outcome={}\n", self.outcome));
        s
    }

    /// Parses [`ReductionTrace::to_text`] output. `CUSTOM` traces need the
    /// transform supplied separately; surviving columns are derived from
    /// `num_columns`.
    pub fn from_text(text: &str, num_columns: usize, custom: Option<RatMatrix>) -> Result<ReductionTrace> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let bad = |msg: &str| Error::Parse(format!("trace: {msg}"));
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let initial = match header.strip_prefix("initial=") {
            Some("A") => InitialMatrix::A,
            Some("RREF") => InitialMatrix::Rref,
            Some("CUSTOM") => InitialMatrix::Custom(custom.ok_or_else(|| bad("CUSTOM trace without T"))?),
            _ => return Err(bad(&format!("bad header {header:?}"))),
        };
        let mut steps = Vec::new();
        let mut outcome = None;
        for line in lines {
            if outcome.is_some() {
                return Err(bad("content after outcome"));
            }
            if let Some(o) = line.strip_prefix("outcome=") {
                outcome = Some(match o {
                    "REDUCED" => Outcome::Reduced,
                    "STUCK" => Outcome::Stuck,
                    _ => return Err(bad(&format!("bad outcome {o:?}"))),
                });
                continue;
            }
            let mut row = None;
            let mut sign = None;
            let mut cols = None;
            for field in line.split_whitespace() {
                match field.split_once('=') {
                    Some(("row", v)) => row = Some(v.parse::<usize>().map_err(|_| bad(line))?),
                    Some(("sign", "+")) => sign = Some(Sign::Plus),
                    Some(("sign", "-")) => sign = Some(Sign::Minus),
                    Some(("cols", v)) => {
                        cols = Some(
                            v.split(',')
                                .map(|c| c.parse::<usize>().map_err(|_| bad(line)))
                                .collect::<Result<Vec<_>>>()?,
                        )
                    }
                    _ => return Err(bad(line)),
                }
            }
            match (row, sign, cols) {
                (Some(row), Some(sign), Some(cols)) => steps.push(ReductionStep { row, sign, cols }),
                _ => return Err(bad(line)),
            }
        }
        let outcome = outcome.ok_or_else(|| bad("missing outcome"))?;
        let mut alive = vec![true; num_columns];
        for step in &steps {
            for &c in &step.cols {
                if c >= num_columns {
                    return Err(bad(&format!("column {c} out of range")));
                }
                alive[c] = false;
            }
        }
        Ok(ReductionTrace {
            initial,
            steps,
            outcome,
            surviving_columns: (0..num_columns).filter(|&c| alive[c]).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{build_system, PairScheme};
    use crate::zmod::DigitSet;

    fn appendix() -> ConstraintSystem {
        build_system(&DigitSet::interval(11, 0, 5).unwrap(), 3, PairScheme::FirstToAll).unwrap()
    }

    #[test]
    fn appendix_reduces_both_ways() {
        let s = appendix();
        for init in [InitialMatrix::A, InitialMatrix::Rref] {
            let t = reduce(&s, init).unwrap();
            assert_eq!(t.outcome, Outcome::Reduced);
            assert!(t.surviving_columns.is_empty());
            assert!(verify_trace(&s, &t));
        }
    }

    #[test]
    fn empty_system_is_vacuously_reduced() {
        let s = build_system(&DigitSet::new(7, [3]).unwrap(), 3, PairScheme::FirstToAll).unwrap();
        let t = reduce(&s, InitialMatrix::Rref).unwrap();
        assert_eq!(t.outcome, Outcome::Reduced);
        assert!(t.steps.is_empty());
        assert!(verify_trace(&s, &t));
    }

    #[test]
    fn fabricated_steps_are_rejected() {
        let s = appendix();
        let mut t = reduce(&s, InitialMatrix::Rref).unwrap();
        // Row 0 of A_ech is mixed-sign.
        t.steps.insert(
            0,
            ReductionStep {
                row: 0,
                sign: Sign::Plus,
                cols: vec![0, 7, 8, 11],
            },
        );
        assert!(!verify_trace(&s, &t));

        let mut t = reduce(&s, InitialMatrix::Rref).unwrap();
        t.steps.pop();
        assert!(!verify_trace(&s, &t));
        // Claiming REDUCED while columns survive.
        let last = t.steps.len();
        t.surviving_columns = vec![];
        assert!(last > 0 && !verify_trace(&s, &t));
    }

    #[test]
    fn stuck_claim_is_checked() {
        let d = DigitSet::interval(7, 0, 4).unwrap();
        let s = build_system(&d, 3, PairScheme::FirstToAll).unwrap();
        let t = reduce(&s, InitialMatrix::A).unwrap();
        assert_eq!(t.outcome, Outcome::Stuck);
        assert!(verify_trace(&s, &t));
        let mut forged = t.clone();
        forged.outcome = Outcome::Reduced;
        assert!(!verify_trace(&s, &forged));
    }

    #[test]
    fn custom_transform_must_be_invertible() {
        let s = appendix();
        let singular = RatMatrix::zeros(12, 12);
        assert!(matches!(reduce(&s, InitialMatrix::Custom(singular)), Err(Error::NotInvertible)));
        let wrong = RatMatrix::identity(5);
        assert!(reduce(&s, InitialMatrix::Custom(wrong)).is_err());
        let t = reduce(&s, InitialMatrix::Custom(RatMatrix::identity(12))).unwrap();
        assert_eq!(t.outcome, Outcome::Reduced);
        assert!(verify_trace(&s, &t));
    }

    #[test]
    fn text_roundtrip() {
        let s = appendix();
        let t = reduce(&s, InitialMatrix::Rref).unwrap();
        let text = t.to_text();
        assert!(text.starts_with("initial=RREF\nrow=5 sign=+ cols=5,8\nrow=7 sign=+ cols=10,11\n"));
        assert!(text.ends_with("outcome=REDUCED\n"));
        let back = ReductionTrace::from_text(&text, s.num_columns(), None).unwrap();
        assert_eq!(back, t);
        assert!(ReductionTrace::from_text("initial=CUSTOM\noutcome=STUCK\n", 1, None).is_err());
        assert!(ReductionTrace::from_text("initial=A\nrow=x\noutcome=STUCK\n", 1, None).is_err());
    }

    #[test]
    fn deterministic() {
        let s = appendix();
        let a = reduce(&s, InitialMatrix::Rref).unwrap().to_text();
        let b = reduce(&s, InitialMatrix::Rref).unwrap().to_text();
        assert_eq!(a, b);
    }
}
