//! Explicit digit-set constructions and the numeric lower bounds they give.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::zmod::{DigitSet, Modulus};

fn modulus(m: u32) -> Result<Modulus> {
    Modulus::new(m)
}

/// `{0, …, ⌊(k−1)m/(k+1)⌋}` for odd `k >= 5` and `P^-(m) >= (k+2)/2`.
pub fn construct_kodd(m: u32, k: usize) -> Result<DigitSet> {
    let md = modulus(m)?;
    if k < 5 || k.is_multiple_of(2) {
        return Err(Error::Hypothesis(format!("k = {k} must be odd and at least 5")));
    }
    if (2 * md.least_prime_factor() as usize) < k + 2 {
        return Err(Error::Hypothesis(format!(
            "least prime factor {} of m = {m} is below (k+2)/2",
            md.least_prime_factor()
        )));
    }
    let top = (k as u64 - 1) * m as u64 / (k as u64 + 1);
    DigitSet::interval(m, 0, top as u32)
}

/// `{0, …, ⌊(k−2)m/k⌋} ∪ {((k−1)m−1)/k}` for even `k >= 4`,
/// `m ≡ −1 (mod k)` and `P^-(m) >= k`.
pub fn construct_keven(m: u32, k: usize) -> Result<DigitSet> {
    let md = modulus(m)?;
    if k < 4 || k % 2 == 1 {
        return Err(Error::Hypothesis(format!("k = {k} must be even and at least 4")));
    }
    if !(m as u64 + 1).is_multiple_of(k as u64) {
        return Err(Error::Hypothesis(format!("m = {m} is not -1 mod {k}")));
    }
    if (md.least_prime_factor() as usize) < k {
        return Err(Error::Hypothesis(format!(
            "least prime factor {} of m = {m} is below k = {k}",
            md.least_prime_factor()
        )));
    }
    let (m64, k64) = (m as u64, k as u64);
    let top = (k64 - 2) * m64 / k64;
    let extra = ((k64 - 1) * m64 - 1) / k64;
    DigitSet::new(m, (0..=top as u32).chain([extra as u32]))
}

/// `{0, …, ⌊m/2⌋}`, the classical three-term digit set.
pub fn construct_k3(m: u32) -> Result<DigitSet> {
    DigitSet::interval(m, 0, m / 2)
}

/// `{0, …, (p−1)/2} ∪ {(p+3)/2}` for primes `p >= 13`, `p ≡ 1 (mod 4)`.
/// Only a candidate: nothing here asserts it is admissible.
pub fn construct_conjecture(p: u32) -> Result<DigitSet> {
    let md = modulus(p)?;
    if !md.is_prime() || p < 13 || p % 4 != 1 {
        return Err(Error::Hypothesis(format!("p = {p} must be a prime at least 13 with p = 1 mod 4")));
    }
    DigitSet::new(p, (0..=(p - 1) / 2).chain([(p + 3) / 2]))
}

/// The construction matching `(m, k)`: the three-term set, the odd-`k`
/// interval, or the even-`k` interval with one extra digit.
pub fn construct_for(m: u32, k: usize) -> Result<DigitSet> {
    match k {
        3 => construct_k3(m),
        k if k % 2 == 1 => construct_kodd(m, k),
        k => construct_keven(m, k),
    }
}

pub fn multinomial(n: usize, parts: &[usize]) -> BigUint {
    let mut acc = BigUint::one();
    let mut placed = 0usize;
    for &p in parts {
        for i in 1..=p {
            acc = acc * BigUint::from(placed + i) / BigUint::from(i);
        }
        placed += p;
    }
    debug_assert_eq!(placed, n);
    acc
}

/// `|S(D, n)|`.
pub fn exact_size(d: &DigitSet, n: usize) -> Result<BigUint> {
    let size = d.len();
    if !n.is_multiple_of(size) {
        return Err(Error::Divisibility { size, n });
    }
    Ok(multinomial(n, &vec![n / size; size]))
}

/// `⌊(p^{2(k−1)} + p^{k−1} − 1)^{n/2k}⌋`, and whether the exponent is an
/// integer.
pub fn lin_wolf_bound(p: u32, k: usize, n: usize) -> (BigUint, bool) {
    let pk = BigUint::from(p).pow(k as u32 - 1);
    let base = &pk * &pk + &pk - BigUint::one();
    let exact = n.is_multiple_of(2 * k);
    if n == 0 {
        return (BigUint::one(), true);
    }
    if exact {
        return (base.pow((n / (2 * k)) as u32), true);
    }
    (base.pow(n as u32).nth_root(2 * k as u32), false)
}

/// Base of the three-term bound: `(m+1)/2` for odd `m`, `(m+2)/2` for even `m`.
pub fn ep_r3_base(m: u32) -> Rat {
    if m % 2 == 1 {
        Rat::new(m as i64 + 1, 2)
    } else {
        Rat::new(m as i64 + 2, 2)
    }
}

/// `base^n / n^exponent`, the shape of the asymptotic bound up to its
/// implicit constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Growth {
    pub base: u64,
    pub exponent: Rat,
}

pub fn kodd_growth(m: u32, k: usize) -> Growth {
    let f = (k as u64 - 1) * m as u64 / (k as u64 + 1);
    Growth {
        base: f + 1,
        exponent: Rat::new(f as i64, 2),
    }
}

pub fn keven_growth(m: u32, k: usize) -> Growth {
    let f = (k as u64 - 2) * m as u64 / k as u64;
    Growth {
        base: f + 2,
        exponent: Rat::new(f as i64 + 1, 2),
    }
}

fn big_as_string<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub m: u32,
    pub k: usize,
    pub n: usize,
    pub construction: String,
    pub construction_size: usize,
    #[serde(serialize_with = "big_as_string")]
    pub exact_size: Option<BigUint>,
    #[serde(serialize_with = "big_as_string")]
    pub lin_wolf: Option<BigUint>,
    pub lin_wolf_exact: Option<bool>,
    pub ep_r3: Option<Rat>,
    pub growth: Option<Growth>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn to_text(&self) -> String {
        let opt = |v: &Option<BigUint>| v.as_ref().map_or("-".to_string(), |v| v.to_string());
        let mut rows = vec![
            ("m", self.m.to_string()),
            ("k", self.k.to_string()),
            ("n", self.n.to_string()),
            ("construction", self.construction.clone()),
            ("size", self.construction_size.to_string()),
            ("exact_size", opt(&self.exact_size)),
            ("lin_wolf", opt(&self.lin_wolf)),
        ];
        if let Some(b) = &self.ep_r3 {
            rows.push(("ep_r3_base", b.to_string()));
        }
        if let Some(g) = &self.growth {
            rows.push(("growth", format!("{}^n / n^({})", g.base, g.exponent)));
        }
        for note in &self.notes {
            rows.push(("note", note.clone()));
        }
        let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
    }
}

pub fn bound_report(m: u32, k: usize, n: usize) -> Result<BoundReport> {
    if k < 3 {
        return Err(Error::InvalidLength(k));
    }
    let d = construct_for(m, k)?;
    let mut notes = Vec::new();
    let exact_size = match exact_size(&d, n) {
        Ok(v) => Some(v),
        Err(_) => {
            notes.push(format!("|D| = {} does not divide n = {n}; exact_size omitted", d.len()));
            None
        }
    };
    let md = modulus(m)?;
    let (lin_wolf, lin_wolf_exact) = if md.is_prime() && k as u32 <= m {
        let (v, exact) = lin_wolf_bound(m, k, n);
        if !exact {
            notes.push(format!("2k = {} does not divide n; lin_wolf is the floor of a real power", 2 * k));
        }
        (Some(v), Some(exact))
    } else {
        notes.push("lin_wolf needs a prime modulus p with k <= p".into());
        (None, None)
    };
    let growth = match k {
        3 => None,
        k if k % 2 == 1 => Some(kodd_growth(m, k)),
        k => Some(keven_growth(m, k)),
    };
    Ok(BoundReport {
        m,
        k,
        n,
        construction: d.to_interval_notation(),
        construction_size: d.len(),
        exact_size,
        lin_wolf,
        lin_wolf_exact,
        ep_r3: (k == 3).then(|| ep_r3_base(m)),
        growth,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u64) -> BigUint {
        (1..=n).map(BigUint::from).product()
    }

    #[test]
    fn odd_constructions() {
        assert_eq!(construct_kodd(11, 5).unwrap().len(), 8);
        assert_eq!(construct_kodd(13, 5).unwrap().len(), 9);
        assert_eq!(construct_kodd(13, 7).unwrap(), DigitSet::interval(13, 0, 9).unwrap());
        assert!(matches!(construct_kodd(13, 4), Err(Error::Hypothesis(_))));
        // P^-(15) = 3 < 7/2.
        assert!(matches!(construct_kodd(15, 5), Err(Error::Hypothesis(_))));
        assert!(construct_kodd(25, 7).is_ok());
    }

    #[test]
    fn even_constructions() {
        assert_eq!(construct_keven(11, 4).unwrap().to_compact(), "0:5;8");
        assert_eq!(construct_keven(7, 4).unwrap().to_compact(), "0:3;5");
        assert_eq!(construct_keven(11, 6).unwrap().to_compact(), "0:7;9");
        assert!(matches!(construct_keven(13, 4), Err(Error::Hypothesis(_))));
        assert!(matches!(construct_keven(15, 4), Err(Error::Hypothesis(_))));
        assert!(matches!(construct_keven(11, 5), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn conjecture_sets() {
        assert_eq!(construct_conjecture(13).unwrap().to_compact(), "0:6;8");
        assert_eq!(construct_conjecture(17).unwrap().to_compact(), "0:8;10");
        assert_eq!(construct_conjecture(29).unwrap().to_compact(), "0:14;16");
        for bad in [5, 11, 19, 21, 25] {
            assert!(construct_conjecture(bad).is_err());
        }
    }

    #[test]
    fn sizes() {
        let d2 = DigitSet::new(5, [0, 1]).unwrap();
        let d3 = DigitSet::new(5, [0, 1, 2]).unwrap();
        let d6 = DigitSet::interval(11, 0, 5).unwrap();
        assert_eq!(exact_size(&d2, 2).unwrap(), BigUint::from(2u32));
        assert_eq!(exact_size(&d3, 3).unwrap(), BigUint::from(6u32));
        assert_eq!(exact_size(&d6, 12).unwrap(), BigUint::from(7_484_400u32));
        assert!(matches!(exact_size(&d6, 13), Err(Error::Divisibility { .. })));
        for n in (0..=60).step_by(6) {
            let expected = factorial(n as u64) / factorial(n as u64 / 6).pow(6);
            assert_eq!(exact_size(&d6, n).unwrap(), expected);
        }
    }

    #[test]
    fn size_grows_like_the_stirling_shape() {
        // |S(D,n)| >= c |D|^n / n^{(d-1)/2} with c fixed at n = d, squared out:
        // S(n)^2 n^{d-1} d^{2d} >= S(d)^2 d^{d-1} d^{2n}.
        for d in 2..=7usize {
            let set = DigitSet::interval(17, 0, d as u32 - 1).unwrap();
            let base = exact_size(&set, d).unwrap();
            let dd = BigUint::from(d);
            for n in (d..=30 * d).step_by(d) {
                let s = exact_size(&set, n).unwrap();
                let lhs = &s * &s * BigUint::from(n).pow(d as u32 - 1) * dd.pow(2 * d as u32);
                let rhs = &base * &base * dd.pow(d as u32 - 1) * dd.pow(2 * n as u32);
                assert!(lhs >= rhs, "d = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn lin_wolf_values() {
        assert_eq!(lin_wolf_bound(5, 4, 8), (BigUint::from(15_749u32), true));
        assert_eq!(lin_wolf_bound(3, 3, 6), (BigUint::from(89u32), true));
        assert_eq!(lin_wolf_bound(7, 5, 0), (BigUint::one(), true));
        // 89^{1/2} lies between 9 and 10.
        assert_eq!(lin_wolf_bound(3, 3, 3), (BigUint::from(9u32), false));
        let (v, exact) = lin_wolf_bound(5, 4, 12);
        assert!(!exact);
        let base = BigUint::from(15_749u32);
        assert!(v.pow(8) <= base.pow(12) && (&v + 1u32).pow(8) > base.pow(12));
    }

    #[test]
    fn three_term_base() {
        assert_eq!(ep_r3_base(11), Rat::from_int(6));
        assert_eq!(ep_r3_base(10), Rat::from_int(6));
        assert_eq!(ep_r3_base(2), Rat::from_int(2));
        for m in 2..40 {
            assert_eq!(Rat::from_int(construct_k3(m).unwrap().len() as i64), ep_r3_base(m));
        }
    }

    #[test]
    fn extra_digit_distance_identity() {
        let mut checked = 0;
        for m in 2..=1000u32 {
            for k in (4..=m as usize + 1).step_by(2) {
                let Ok(d) = construct_keven(m, k) else { continue };
                let (m64, k64) = (m as u64, k as u64);
                let h = ((k64 - 1) * m64 - 1) / k64;
                let top = (k64 - 2) * m64 / k64;
                assert_eq!(m64 - h, (m64 + 1) / k64);
                assert_eq!(h - top, (m64 + 1) / k64);
                assert_eq!(d.len() as u64, top + 2);
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn growth_base_is_construction_size() {
        for (m, k) in [(11, 5), (13, 7), (17, 5)] {
            let g = kodd_growth(m, k);
            assert_eq!(g.base as usize, construct_kodd(m, k).unwrap().len());
            assert_eq!(g.exponent, Rat::new(g.base as i64 - 1, 2));
        }
        for (m, k) in [(11, 4), (11, 6), (23, 8)] {
            let g = keven_growth(m, k);
            assert_eq!(g.base as usize, construct_keven(m, k).unwrap().len());
            assert_eq!(g.exponent, Rat::new(g.base as i64 - 1, 2));
        }
    }

    #[test]
    fn report_for_eleven_five() {
        let r = bound_report(11, 5, 16).unwrap();
        assert_eq!(r.construction, "[0,7]");
        assert_eq!(r.exact_size, Some(factorial(16) / BigUint::from(256u32)));
        assert_eq!(r.exact_size, Some(BigUint::from(81_729_648_000u64)));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["exact_size"], "81729648000");
        assert_eq!(json["lin_wolf_exact"], false);
    }
}
