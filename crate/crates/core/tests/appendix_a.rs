use progfree_core::reduce::{reduce, verify_trace, InitialMatrix, Outcome, ReductionTrace};
use progfree_core::{build_system, DigitSet, PairScheme, RatMatrix};

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn int_rows(text: &str) -> Vec<Vec<i64>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn system() -> progfree_core::ConstraintSystem {
    build_system(&DigitSet::interval(11, 0, 5).unwrap(), 3, PairScheme::FirstToAll).unwrap()
}

#[test]
fn progressions_in_printed_order() {
    let s = system();
    let printed = int_rows(&golden("appendix_a_progressions.txt"));
    assert_eq!(s.progressions.len(), 12);
    for (p, want) in s.progressions.iter().zip(&printed) {
        let got: Vec<i64> = p.terms.iter().map(|&t| t as i64).collect();
        assert_eq!(&got, want);
    }
}

#[test]
fn matrix_and_echelon_form_match() {
    let s = system();
    let a = RatMatrix::parse_dump(&golden("appendix_a_matrix.txt")).unwrap();
    assert_eq!(s.matrix, a);
    assert_eq!(s.matrix.to_dump(), golden("appendix_a_matrix.txt"));
    let (r, rank) = s.matrix.rref();
    assert_eq!(rank, 8);
    assert_eq!(r, RatMatrix::parse_dump(&golden("appendix_a_rref.txt")).unwrap());
}

#[test]
fn trace_matches_golden() {
    let s = system();
    let t = reduce(&s, InitialMatrix::Rref).unwrap();
    assert_eq!(t.to_text(), golden("appendix_a_trace_rref.txt"));
    let parsed = ReductionTrace::from_text(&golden("appendix_a_trace_rref.txt"), 12, None).unwrap();
    assert!(verify_trace(&s, &parsed));
    let a = reduce(&s, InitialMatrix::A).unwrap();
    assert_eq!(a.outcome, Outcome::Reduced);
    assert!(verify_trace(&s, &a));
}

/// Deletes, in one round, the supports of all sign-consistent rows of the
/// current matrix, as the printed figure does.
fn round(m: &[Vec<i64>]) -> (Vec<usize>, Vec<Vec<i64>>) {
    let cols = m.first().map_or(0, Vec::len);
    let mut gone = vec![false; cols];
    for row in m {
        let nonzero = row.iter().any(|&v| v != 0);
        if nonzero && (row.iter().all(|&v| v >= 0) || row.iter().all(|&v| v <= 0)) {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    gone[c] = true;
                }
            }
        }
    }
    let kept: Vec<usize> = (0..cols).filter(|&c| !gone[c]).collect();
    let next = m.iter().map(|r| kept.iter().map(|&c| r[c]).collect()).collect();
    ((0..cols).filter(|&c| gone[c]).collect(), next)
}

#[test]
fn rounds_match_the_printed_figure() {
    let start = int_rows(&golden("appendix_a_rref.txt"));
    let mut labels: Vec<usize> = (1..=12).collect();
    let (del, m1) = round(&start);
    assert_eq!(del.iter().map(|&c| labels[c]).collect::<Vec<_>>(), vec![6, 9, 11, 12]);
    labels.retain(|l| ![6, 9, 11, 12].contains(l));
    let printed_m1 = int_rows(
        "1 0 0 0 0 0 -1 0\n0 1 0 0 0 0 1 0\n0 0 1 0 0 0 -1 -1\n0 0 0 1 0 0 0 1\n0 0 0 0 1 0 -1 -1\n\
         0 0 0 0 0 0 0 0\n0 0 0 0 0 1 0 -1\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0\n\
         0 0 0 0 0 0 0 0\n0 0 0 0 0 0 0 0",
    );
    assert_eq!(m1, printed_m1);
    let (del, m2) = round(&m1);
    assert_eq!(del.iter().map(|&c| labels[c]).collect::<Vec<_>>(), vec![2, 4, 8, 10]);
    let printed_m2 = int_rows(
        "1 0 0 0\n0 0 0 0\n0 1 0 0\n0 0 0 0\n0 0 1 0\n0 0 0 0\n0 0 0 1\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0",
    );
    assert_eq!(m2, printed_m2);
    let (del, m3) = round(&m2);
    assert_eq!(del.len(), 4);
    assert!(m3.iter().all(Vec::is_empty));

    // The engine deletes one row's support at a time but reaches the same end.
    let t = reduce(&system(), InitialMatrix::Rref).unwrap();
    let mut order: Vec<usize> = t.steps.iter().flat_map(|s| s.cols.iter().copied()).collect();
    assert_eq!(&order[..4], &[5, 8, 10, 11]);
    order.sort_unstable();
    assert_eq!(order, (0..12).collect::<Vec<_>>());
}
