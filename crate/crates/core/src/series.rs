//! Multivariate power series in `t_1, t_2, ...` truncated at a weighted
//! degree, where `t_j` has degree `j`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::{fmt_rational, parse_rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("constant term must be {expected}, got {got}")]
    ConstantTerm { expected: &'static str, got: String },
    #[error("series truncations differ ({0} vs {1})")]
    Truncation(usize, usize),
    #[error("malformed series data: {0}")]
    Malformed(String),
}

/// Multidegrees are stored as `v_1..v_W`; terms of weighted degree above
/// `W` are dropped on insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    w: usize,
    terms: BTreeMap<Vec<u32>, Scalar>,
}

pub fn weight_of(v: &[u32]) -> usize {
    v.iter().enumerate().map(|(i, &x)| (i + 1) * x as usize).sum()
}

impl TruncatedSeries {
    pub fn zero(w: usize) -> Self {
        TruncatedSeries { w, terms: BTreeMap::new() }
    }

    pub fn one(w: usize) -> Self {
        let mut s = Self::zero(w);
        s.add_term(&[], Scalar::one());
        s
    }

    /// The monomial `t_j`.
    pub fn variable(w: usize, j: usize) -> Self {
        let mut s = Self::zero(w);
        let mut v = vec![0; j];
        v[j - 1] = 1;
        s.add_term(&v, Scalar::one());
        s
    }

    pub fn max_weighted_degree(&self) -> usize {
        self.w
    }

    fn normalize(&self, v: &[u32]) -> Option<Vec<u32>> {
        if weight_of(v) > self.w {
            return None;
        }
        let mut key = v.to_vec();
        key.resize(self.w, 0);
        Some(key)
    }

    pub fn add_term(&mut self, v: &[u32], c: Scalar) {
        let Some(key) = self.normalize(v) else { return };
        let entry = self.terms.entry(key).or_default();
        *entry += &c;
        if entry.is_zero() {
            let key = self.normalize(v).expect("in range");
            self.terms.remove(&key);
        }
    }

    pub fn coeff(&self, v: &[u32]) -> Scalar {
        self.normalize(v).and_then(|k| self.terms.get(&k).cloned()).unwrap_or_default()
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&[])
    }

    /// Nonzero terms in lexicographic multidegree order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, o: &Self) -> Result<(), SeriesError> {
        if self.w != o.w {
            return Err(SeriesError::Truncation(self.w, o.w));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, SeriesError> {
        self.check(o)?;
        let mut out = self.clone();
        for (v, c) in &o.terms {
            out.add_term(v, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, SeriesError> {
        self.add(&o.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.w);
        for (v, c) in &self.terms {
            out.add_term(v, c * s);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self, SeriesError> {
        self.check(o)?;
        let mut out = Self::zero(self.w);
        for (a, x) in &self.terms {
            let wa = weight_of(a);
            for (b, y) in &o.terms {
                if wa + weight_of(b) > self.w {
                    continue;
                }
                let v: Vec<u32> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                out.add_term(&v, x * y);
            }
        }
        Ok(out)
    }

    /// `log s = sum_m (-1)^{m+1} (s-1)^m / m`; requires constant term 1.
    pub fn log(&self) -> Result<Self, SeriesError> {
        let c = self.constant_term();
        if !c.is_one() {
            return Err(SeriesError::ConstantTerm { expected: "1", got: c.to_string() });
        }
        let u = self.sub(&Self::one(self.w))?;
        let mut power = u.clone();
        let mut out = Self::zero(self.w);
        for m in 1..=self.w.max(1) as i64 {
            let sign = if m % 2 == 1 { 1 } else { -1 };
            out = out.add(&power.scale(&Scalar::from_ratio(sign, m)))?;
            power = power.mul(&u)?;
            if power.is_zero() {
                break;
            }
        }
        Ok(out)
    }

    /// `exp s = sum_m s^m / m!`; requires constant term 0.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        let c = self.constant_term();
        if !c.is_zero() {
            return Err(SeriesError::ConstantTerm { expected: "0", got: c.to_string() });
        }
        let mut out = Self::one(self.w);
        let mut term = Self::one(self.w);
        for m in 1..=self.w as i64 {
            term = term.mul(self)?.scale(&Scalar::from_ratio(1, m));
            if term.is_zero() {
                break;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Substitutes `t_j -> beta t_j`, scaling each term by `beta^{sum v_j}`.
    pub fn substitute_scale(&self, beta: &Scalar) -> Self {
        let mut out = Self::zero(self.w);
        for (v, c) in &self.terms {
            let vertices: u32 = v.iter().sum();
            out.add_term(v, c * &beta.pow(vertices as i64).expect("nonnegative power"));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesTermJson {
    pub v: Vec<u32>,
    pub re: String,
    pub im: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesJson {
    #[serde(rename = "W")]
    pub w: usize,
    pub terms: Vec<SeriesTermJson>,
}

impl TruncatedSeries {
    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            w: self.w,
            terms: self
                .terms
                .iter()
                .map(|(v, c)| SeriesTermJson { v: v.clone(), re: fmt_rational(&c.re), im: fmt_rational(&c.im) })
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self, SeriesError> {
        let mut s = Self::zero(j.w);
        for t in &j.terms {
            if weight_of(&t.v) > j.w {
                return Err(SeriesError::Malformed(format!("term {:?} exceeds W = {}", t.v, j.w)));
            }
            let re = parse_rational(&t.re).map_err(|e| SeriesError::Malformed(e.to_string()))?;
            let im = parse_rational(&t.im).map_err(|e| SeriesError::Malformed(e.to_string()))?;
            s.add_term(&t.v, Scalar::new(re, im));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_series(w: usize) -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec((proptest::collection::vec(0u32..3, 3), -5i64..6, 1i64..4), 0..6).prop_map(
            move |terms| {
                let mut s = TruncatedSeries::zero(w);
                for (v, p, q) in terms {
                    s.add_term(&v, Scalar::from_ratio(p, q));
                }
                s
            },
        )
    }

    #[test]
    fn log_of_one_is_zero() {
        assert!(TruncatedSeries::one(5).log().unwrap().is_zero());
    }

    #[test]
    fn log_exp_t1() {
        let t1 = TruncatedSeries::variable(4, 1);
        let e = t1.exp().unwrap();
        assert_eq!(e.coeff(&[3]), Scalar::from_ratio(1, 6));
        assert_eq!(e.log().unwrap(), t1);
    }

    #[test]
    fn log_requires_unit_constant() {
        let s = TruncatedSeries::one(3).scale(&Scalar::from_int(2));
        assert!(matches!(s.log(), Err(SeriesError::ConstantTerm { .. })));
        assert!(TruncatedSeries::one(3).exp().is_err());
    }

    #[test]
    fn truncation_drops_heavy_terms() {
        let t2 = TruncatedSeries::variable(3, 2);
        assert!(t2.mul(&t2).unwrap().is_zero());
        let t1 = TruncatedSeries::variable(3, 1);
        assert_eq!(t1.mul(&t2).unwrap().coeff(&[1, 1]), Scalar::one());
        assert_eq!(t1.mul(&TruncatedSeries::variable(4, 1)), Err(SeriesError::Truncation(3, 4)));
    }

    #[test]
    fn json_roundtrip() {
        let s = TruncatedSeries::variable(4, 1).exp().unwrap();
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert!(text.starts_with("{\"W\":4"));
        assert_eq!(TruncatedSeries::from_json(&serde_json::from_str(&text).unwrap()).unwrap(), s);
    }

    proptest! {
        #[test]
        fn exp_log_inverse(s in arb_series(5)) {
            let mut u = s.clone();
            u.add_term(&[], -s.constant_term());
            prop_assert_eq!(u.exp().unwrap().log().unwrap(), u.clone());
            let one_plus = u.add(&TruncatedSeries::one(5)).unwrap();
            prop_assert_eq!(one_plus.log().unwrap().exp().unwrap(), one_plus);
        }

        #[test]
        fn log_turns_products_into_sums(a in arb_series(4), b in arb_series(4)) {
            let fix = |s: &TruncatedSeries| {
                let mut t = s.clone();
                t.add_term(&[], Scalar::one() - s.constant_term());
                t
            };
            let (a, b) = (fix(&a), fix(&b));
            let lhs = a.mul(&b).unwrap().log().unwrap();
            prop_assert_eq!(lhs, a.log().unwrap().add(&b.log().unwrap()).unwrap());
        }
    }
}
