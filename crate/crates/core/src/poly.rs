//! Polynomials in rate parameters with exact rational coefficients.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::Q;

/// `Σ c_m · Π_{i ∈ m} κ_i`. Monomials are sorted multisets of parameter
/// indices; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly(pub BTreeMap<Vec<usize>, Q>);

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(Vec::new(), c)
    }

    pub fn param(i: usize) -> Self {
        Self::monomial(alloc::vec![i], Q::one())
    }

    pub fn monomial(mut m: Vec<usize>, c: Q) -> Self {
        m.sort_unstable();
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, m: Vec<usize>, c: Q) {
        let e = self.0.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn add(&mut self, other: &Poly) {
        for (m, c) in &other.0 {
            self.add_term(m.clone(), *c);
        }
    }

    pub fn scaled(&self, c: Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, d)| (m.clone(), d * c)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m: Vec<usize> = m1.iter().chain(m2).copied().collect();
                m.sort_unstable();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    /// Largest parameter index referenced, if any.
    pub fn max_param(&self) -> Option<usize> {
        self.0.keys().flat_map(|m| m.iter().copied()).max()
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|(m, c)| {
                let coef = c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN);
                m.iter().fold(coef, |acc, &i| acc * params[i])
            })
            .sum()
    }

    /// `2·ν₋ + ε₊`-style rendering; `names[i]` names parameter `i`.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let mut s = String::new();
        for (n, (m, c)) in self.0.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            match (n, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            let mut parts: Vec<String> = Vec::new();
            if !a.is_one() || m.is_empty() {
                parts.push(alloc::format!("{}", a));
            }
            parts.extend(m.iter().map(|&i| names.get(i).cloned().unwrap_or_else(|| alloc::format!("k{}", i))));
            let _ = write!(s, "{}", parts.join("*"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn arithmetic_and_rendering() {
        let names = vec![String::from("a"), String::from("b")];
        let mut p = Poly::param(1).scaled(Q::from_integer(2));
        p.add(&Poly::param(0));
        assert_eq!(p.render(&names), "a + 2*b");
        let sq = p.mul(&p);
        assert_eq!(sq.eval(&[1.0, 3.0]), 49.0);
        let mut z = p.clone();
        z.add(&p.scaled(-Q::one()));
        assert!(z.is_zero());
        assert_eq!(Poly::constant(Q::new(-1, 2)).render(&names), "-1/2");
    }
}
