//! Exact arithmetic in Q and in iterated infinitesimal extensions
//! Q⟨ε₁⟩…⟨ε_m⟩, with sign evaluation and bounded limits.
//!
//! Elements are fractions of polynomials in the tower symbols. In the unique
//! ordering of the extension field, 0 < ε_m ≪ ε_{m-1} ≪ ⋯ ≪ ε_1 ≪ 1: a later
//! symbol is infinitesimal relative to everything built from earlier ones.
//! The dominant monomial of a polynomial is therefore the one that is
//! lexicographically smallest when exponents are read last-symbol-first.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of_rat(r: &Rat) -> Sign {
        if r.is_zero() {
            Sign::Zero
        } else if r.is_positive() {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }

    pub fn from_i32(v: i32) -> Sign {
        match v.cmp(&0) {
            Ordering::Less => Sign::Neg,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Pos,
        }
    }

    pub fn mul(self, other: Sign) -> Sign {
        Sign::from_i32(self.as_i32() * other.as_i32())
    }

    pub fn neg(self) -> Sign {
        Sign::from_i32(-self.as_i32())
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }
}

/// Ordered list of infinitesimal symbols; earlier entries dominate later ones.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct InfinitesimalTower {
    symbols: Arc<Vec<String>>,
}

impl fmt::Debug for InfinitesimalTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tower{:?}", self.symbols)
    }
}

impl InfinitesimalTower {
    pub fn rationals() -> Self {
        InfinitesimalTower {
            symbols: Arc::new(Vec::new()),
        }
    }

    pub fn new(symbols: &[&str]) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in symbols {
            if !seen.insert(*s) {
                return Err(Error::TowerMismatch(format!("duplicate symbol {s}")));
            }
        }
        Ok(InfinitesimalTower {
            symbols: Arc::new(symbols.iter().map(|s| s.to_string()).collect()),
        })
    }

    /// Adjoins a new, smaller infinitesimal at the end.
    pub fn extend(&self, symbol: &str) -> Result<Self> {
        if self.symbols.iter().any(|s| s == symbol) {
            return Err(Error::TowerMismatch(format!("duplicate symbol {symbol}")));
        }
        let mut v = (*self.symbols).clone();
        v.push(symbol.to_string());
        Ok(InfinitesimalTower {
            symbols: Arc::new(v),
        })
    }

    /// The tower with the last (smallest) symbol removed.
    pub fn parent(&self) -> Result<Self> {
        if self.symbols.is_empty() {
            return Err(Error::TowerMismatch("empty tower has no parent".into()));
        }
        let mut v = (*self.symbols).clone();
        v.pop();
        Ok(InfinitesimalTower {
            symbols: Arc::new(v),
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn last(&self) -> Option<&str> {
        self.symbols.last().map(|s| s.as_str())
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    /// True when `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &InfinitesimalTower) -> bool {
        self.symbols.len() <= other.symbols.len()
            && self
                .symbols
                .iter()
                .zip(other.symbols.iter())
                .all(|(a, b)| a == b)
    }
}

/// Compares two exponent vectors by dominance: the smaller one names the
/// larger monomial. Exponents are read last-symbol-first, ascending.
pub fn mono_cmp(a: &[u32], b: &[u32]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Sparse polynomial in the tower symbols, terms sorted dominant-first.
#[derive(Clone, PartialEq, Eq)]
pub struct TowerPoly {
    /// (exponents, coefficient), sorted by `mono_cmp`, no zero coefficients.
    terms: Vec<(Vec<u32>, Rat)>,
    nsym: usize,
}

impl fmt::Debug for TowerPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("{}*{:?}", c, e))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl TowerPoly {
    pub fn zero(nsym: usize) -> Self {
        TowerPoly {
            terms: Vec::new(),
            nsym,
        }
    }

    pub fn constant(nsym: usize, c: Rat) -> Self {
        if c.is_zero() {
            Self::zero(nsym)
        } else {
            TowerPoly {
                terms: vec![(vec![0; nsym], c)],
                nsym,
            }
        }
    }

    pub fn symbol(nsym: usize, idx: usize) -> Self {
        let mut e = vec![0; nsym];
        e[idx] = 1;
        TowerPoly {
            terms: vec![(e, Rat::one())],
            nsym,
        }
    }

    pub fn from_terms(nsym: usize, mut terms: Vec<(Vec<u32>, Rat)>) -> Self {
        terms.retain(|(_, c)| !c.is_zero());
        terms.sort_by(|a, b| mono_cmp(&a.0, &b.0));
        let mut merged: Vec<(Vec<u32>, Rat)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            if let Some(last) = merged.last_mut() {
                if last.0 == e {
                    last.1 += c;
                    if last.1.is_zero() {
                        merged.pop();
                    }
                    continue;
                }
            }
            merged.push((e, c));
        }
        TowerPoly {
            terms: merged,
            nsym,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nsym(&self) -> usize {
        self.nsym
    }

    pub fn terms(&self) -> &[(Vec<u32>, Rat)] {
        &self.terms
    }

    /// The dominant (largest in the field order) term.
    pub fn dominant(&self) -> Option<&(Vec<u32>, Rat)> {
        self.terms.first()
    }

    pub fn sign(&self) -> Sign {
        match self.dominant() {
            None => Sign::Zero,
            Some((_, c)) => Sign::of_rat(c),
        }
    }

    pub fn add(&self, other: &TowerPoly) -> TowerPoly {
        debug_assert_eq!(self.nsym, other.nsym);
        let mut out: Vec<(Vec<u32>, Rat)> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match mono_cmp(&self.terms[i].0, &other.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        TowerPoly {
            terms: out,
            nsym: self.nsym,
        }
    }

    pub fn neg(&self) -> TowerPoly {
        TowerPoly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
            nsym: self.nsym,
        }
    }

    pub fn sub(&self, other: &TowerPoly) -> TowerPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &TowerPoly) -> TowerPoly {
        debug_assert_eq!(self.nsym, other.nsym);
        if self.is_zero() || other.is_zero() {
            return TowerPoly::zero(self.nsym);
        }
        let mut acc: std::collections::BTreeMap<Vec<u32>, Rat> = std::collections::BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                let c = ca * cb;
                let entry = acc.entry(e).or_insert_with(Rat::zero);
                *entry += c;
            }
        }
        TowerPoly::from_terms(
            self.nsym,
            acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        )
    }

    pub fn scale(&self, c: &Rat) -> TowerPoly {
        if c.is_zero() {
            return TowerPoly::zero(self.nsym);
        }
        TowerPoly {
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
            nsym: self.nsym,
        }
    }

    /// Rational content (positive), 0 for the zero polynomial.
    pub fn content(&self) -> Rat {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            num_gcd = num_integer::Integer::gcd(&num_gcd, c.numer());
            den_lcm = num_integer::Integer::lcm(&den_lcm, c.denom());
        }
        if num_gcd.is_zero() {
            Rat::zero()
        } else {
            Rat::new(num_gcd, den_lcm)
        }
    }

    /// Minimum exponent of each symbol over all terms (the common monomial factor).
    pub fn min_exponents(&self) -> Vec<u32> {
        let mut m = match self.terms.first() {
            None => return vec![0; self.nsym],
            Some((e, _)) => e.clone(),
        };
        for (e, _) in &self.terms[1..] {
            for (mi, ei) in m.iter_mut().zip(e.iter()) {
                *mi = (*mi).min(*ei);
            }
        }
        m
    }

    pub fn shift_down(&self, by: &[u32]) -> TowerPoly {
        TowerPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    (
                        e.iter().zip(by.iter()).map(|(x, y)| x - y).collect(),
                        c.clone(),
                    )
                })
                .collect(),
            nsym: self.nsym,
        }
    }

    /// Least exponent of symbol `idx` appearing in any term.
    pub fn min_order(&self, idx: usize) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e[idx]).min()
    }

    pub fn max_order(&self, idx: usize) -> Option<u32> {
        self.terms.iter().map(|(e, _)| e[idx]).max()
    }

    /// Sets symbol `idx` to zero (keeps terms with zero exponent there).
    pub fn set_symbol_zero(&self, idx: usize) -> TowerPoly {
        TowerPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[idx] == 0)
                .cloned()
                .collect(),
            nsym: self.nsym,
        }
    }

    /// Drops the last symbol column; requires no term to use it.
    pub fn drop_last_symbol(&self) -> TowerPoly {
        TowerPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e[..self.nsym - 1].to_vec(), c.clone()))
                .collect(),
            nsym: self.nsym - 1,
        }
    }

    /// Appends zero exponent columns for `extra` new (smaller) symbols.
    pub fn widen(&self, extra: usize) -> TowerPoly {
        TowerPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.extend(std::iter::repeat(0).take(extra));
                    (e2, c.clone())
                })
                .collect(),
            nsym: self.nsym + extra,
        }
    }

    /// Substitutes a rational value for symbol `idx`.
    pub fn eval_symbol(&self, idx: usize, value: &Rat) -> TowerPoly {
        let mut terms: Vec<(Vec<u32>, Rat)> = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            let mut p = Rat::one();
            for _ in 0..e[idx] {
                p *= value;
            }
            let mut e2 = e.clone();
            e2[idx] = 0;
            terms.push((e2, c * p));
        }
        TowerPoly::from_terms(self.nsym, terms)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }
}

/// Element of Q⟨ε₁,…,ε_m⟩ as a canonical fraction of polynomials.
#[derive(Clone)]
pub struct FieldTowerElement {
    tower: InfinitesimalTower,
    num: TowerPoly,
    den: TowerPoly,
}

impl fmt::Debug for FieldTowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den_is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

impl FieldTowerElement {
    fn make(tower: InfinitesimalTower, num: TowerPoly, den: TowerPoly) -> Self {
        debug_assert!(!den.is_zero(), "zero denominator");
        let mut num = num;
        let mut den = den;
        // strip the common monomial factor
        if !num.is_zero() {
            let mn = num.min_exponents();
            let md = den.min_exponents();
            let common: Vec<u32> = mn.iter().zip(md.iter()).map(|(a, b)| *a.min(b)).collect();
            if common.iter().any(|&e| e > 0) {
                num = num.shift_down(&common);
                den = den.shift_down(&common);
            }
        } else {
            den = TowerPoly::constant(den.nsym(), Rat::one());
        }
        // strip the common rational content; normalize denominator sign
        let cn = num.content();
        let cd = den.content();
        let c = if cn.is_zero() {
            cd.clone()
        } else {
            // gcd of two positive rationals
            Rat::new(
                num_integer::Integer::gcd(cn.numer(), cd.numer()),
                num_integer::Integer::lcm(cn.denom(), cd.denom()),
            )
        };
        if !c.is_zero() && !c.is_one() {
            let inv = c.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        if den.sign() == Sign::Neg {
            num = num.neg();
            den = den.neg();
        }
        FieldTowerElement { tower, num, den }
    }

    pub fn from_rat(tower: &InfinitesimalTower, r: Rat) -> Self {
        let n = tower.len();
        FieldTowerElement::make(
            tower.clone(),
            TowerPoly::constant(n, r),
            TowerPoly::constant(n, Rat::one()),
        )
    }

    pub fn zero(tower: &InfinitesimalTower) -> Self {
        Self::from_rat(tower, Rat::zero())
    }

    pub fn one(tower: &InfinitesimalTower) -> Self {
        Self::from_rat(tower, Rat::one())
    }

    pub fn from_int(tower: &InfinitesimalTower, v: i64) -> Self {
        Self::from_rat(tower, rat_int(v))
    }

    /// The infinitesimal named `symbol`.
    pub fn symbol(tower: &InfinitesimalTower, symbol: &str) -> Result<Self> {
        let idx = tower
            .index_of(symbol)
            .ok_or_else(|| Error::TowerMismatch(format!("unknown symbol {symbol}")))?;
        Ok(FieldTowerElement::make(
            tower.clone(),
            TowerPoly::symbol(tower.len(), idx),
            TowerPoly::constant(tower.len(), Rat::one()),
        ))
    }

    pub fn from_parts(tower: &InfinitesimalTower, num: TowerPoly, den: TowerPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Internal("division by zero".into()));
        }
        if num.nsym() != tower.len() || den.nsym() != tower.len() {
            return Err(Error::TowerMismatch("polynomial width != tower length".into()));
        }
        Ok(FieldTowerElement::make(tower.clone(), num, den))
    }

    pub fn tower(&self) -> &InfinitesimalTower {
        &self.tower
    }

    pub fn numerator(&self) -> &TowerPoly {
        &self.num
    }

    pub fn denominator(&self) -> &TowerPoly {
        &self.den
    }

    pub fn den_is_one(&self) -> bool {
        self.den.terms().len() == 1
            && self.den.terms()[0].0.iter().all(|&e| e == 0)
            && self.den.terms()[0].1.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_rational(&self) -> Option<Rat> {
        let constant = |p: &TowerPoly| -> Option<Rat> {
            if p.is_zero() {
                return Some(Rat::zero());
            }
            if p.terms().len() == 1 && p.terms()[0].0.iter().all(|&e| e == 0) {
                return Some(p.terms()[0].1.clone());
            }
            None
        };
        let n = constant(&self.num)?;
        let d = constant(&self.den)?;
        Some(n / d)
    }

    fn check_tower(&self, other: &FieldTowerElement) -> Result<()> {
        if self.tower != other.tower {
            return Err(Error::TowerMismatch(format!(
                "{:?} vs {:?}",
                self.tower, other.tower
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldTowerElement) -> FieldTowerElement {
        debug_assert!(self.check_tower(other).is_ok());
        FieldTowerElement::make(
            self.tower.clone(),
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &FieldTowerElement) -> FieldTowerElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldTowerElement {
        FieldTowerElement {
            tower: self.tower.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &FieldTowerElement) -> FieldTowerElement {
        debug_assert!(self.check_tower(other).is_ok());
        FieldTowerElement::make(
            self.tower.clone(),
            self.num.mul(&other.num),
            self.den.mul(&other.den),
        )
    }

    pub fn div(&self, other: &FieldTowerElement) -> Result<FieldTowerElement> {
        self.check_tower(other)?;
        if other.is_zero() {
            return Err(Error::Internal("division by zero".into()));
        }
        Ok(FieldTowerElement::make(
            self.tower.clone(),
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn recip(&self) -> Result<FieldTowerElement> {
        FieldTowerElement::one(&self.tower).div(self)
    }

    pub fn scale_rat(&self, c: &Rat) -> FieldTowerElement {
        FieldTowerElement::make(self.tower.clone(), self.num.scale(c), self.den.clone())
    }

    pub fn pow(&self, mut e: u32) -> FieldTowerElement {
        let mut base = self.clone();
        let mut acc = FieldTowerElement::one(&self.tower);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Sign in the ordered tower: dominant terms of numerator and denominator.
    pub fn sign(&self) -> Sign {
        self.num.sign().mul(self.den.sign())
    }

    /// sign(self - other); requires equal towers.
    pub fn compare(&self, other: &FieldTowerElement) -> Result<Sign> {
        self.check_tower(other)?;
        Ok(self.sub(other).sign())
    }

    pub fn equals(&self, other: &FieldTowerElement) -> bool {
        self.tower == other.tower && self.num.mul(&other.den) == other.num.mul(&self.den)
    }

    /// Order of the element in symbol `s` (net lowest exponent), as i64.
    pub fn order_in(&self, s: &str) -> Result<i64> {
        let idx = self
            .tower
            .index_of(s)
            .ok_or_else(|| Error::TowerMismatch(format!("unknown symbol {s}")))?;
        if self.is_zero() {
            return Ok(i64::MAX);
        }
        let on = self.num.min_order(idx).unwrap() as i64;
        let od = self.den.min_order(idx).unwrap() as i64;
        Ok(on - od)
    }

    /// Image under s ↦ 0 where `s` must be the last (smallest) tower symbol.
    /// Errors when the element is unbounded over the subtower.
    pub fn limit(&self, s: &str) -> Result<FieldTowerElement> {
        match self.tower.last() {
            Some(last) if last == s => {}
            _ => {
                return Err(Error::TowerMismatch(format!(
                    "{s} is not the smallest tower symbol"
                )))
            }
        }
        let idx = self.tower.len() - 1;
        let parent = self.tower.parent()?;
        if self.is_zero() {
            return Ok(FieldTowerElement::zero(&parent));
        }
        let on = self.num.min_order(idx).unwrap();
        let od = self.den.min_order(idx).unwrap();
        if od > on {
            return Err(Error::UnboundedElement(s.to_string()));
        }
        // cancel the common power s^od, then set s = 0
        let mut by = vec![0; self.tower.len()];
        by[idx] = od;
        let num = self.num.shift_down(&by).set_symbol_zero(idx).drop_last_symbol();
        let den = self.den.shift_down(&by).set_symbol_zero(idx).drop_last_symbol();
        FieldTowerElement::from_parts(&parent, num, den)
    }

    /// Lifts the element into a longer tower having this one as a prefix.
    pub fn lift(&self, to: &InfinitesimalTower) -> Result<FieldTowerElement> {
        if !self.tower.is_prefix_of(to) {
            return Err(Error::TowerMismatch(format!(
                "{:?} is not a prefix of {:?}",
                self.tower, to
            )));
        }
        let extra = to.len() - self.tower.len();
        Ok(FieldTowerElement {
            tower: to.clone(),
            num: self.num.widen(extra),
            den: self.den.widen(extra),
        })
    }

    /// Substitutes a rational value for the last symbol (numeric cross-checks;
    /// only valid for sufficiently small positive values).
    pub fn eval_last_symbol(&self, value: &Rat) -> Result<FieldTowerElement> {
        if self.tower.is_empty() {
            return Err(Error::TowerMismatch("empty tower".into()));
        }
        let idx = self.tower.len() - 1;
        let parent = self.tower.parent()?;
        let num = self.num.eval_symbol(idx, value).drop_last_symbol();
        let den = self.den.eval_symbol(idx, value).drop_last_symbol();
        if den.is_zero() {
            return Err(Error::Internal("denominator vanished at sample".into()));
        }
        FieldTowerElement::from_parts(&parent, num, den)
    }
}

impl PartialEq for FieldTowerElement {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> InfinitesimalTower {
        InfinitesimalTower::new(&["gamma", "zeta"]).unwrap()
    }

    #[test]
    fn sign_of_positive_infinitesimal() {
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        assert_eq!(z.sign(), Sign::Pos);
    }

    #[test]
    fn earlier_symbol_dominates() {
        // sign(zeta - gamma) = -1 since zeta ≪ gamma
        let tw = t3();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        let g = FieldTowerElement::symbol(&tw, "gamma").unwrap();
        assert_eq!(z.sub(&g).sign(), Sign::Neg);
        assert_eq!(g.compare(&z).unwrap(), Sign::Pos);
    }

    #[test]
    fn one_dominates_infinitesimal() {
        let tw = InfinitesimalTower::new(&["eps"]).unwrap();
        let e = FieldTowerElement::symbol(&tw, "eps").unwrap();
        let one = FieldTowerElement::one(&tw);
        assert_eq!(one.sub(&e).sign(), Sign::Pos);
    }

    #[test]
    fn compare_examples() {
        let tw = t3();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        let two = FieldTowerElement::from_int(&tw, 2);
        assert_eq!(z.compare(&z).unwrap(), Sign::Zero);
        assert_eq!(two.add(&z).compare(&two).unwrap(), Sign::Pos);
    }

    #[test]
    fn limit_examples() {
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        let three = FieldTowerElement::from_int(&tw, 3);
        let x = three.add(&z.scale_rat(&rat_int(2)));
        let lim = x.limit("zeta").unwrap();
        assert_eq!(lim.is_rational().unwrap(), rat_int(3));

        // (gamma^2 + gamma)/gamma -> 1 as gamma -> 0
        let tg = InfinitesimalTower::new(&["gamma"]).unwrap();
        let g = FieldTowerElement::symbol(&tg, "gamma").unwrap();
        let y = g.mul(&g).add(&g).div(&g).unwrap();
        assert_eq!(y.limit("gamma").unwrap().is_rational().unwrap(), rat_int(1));

        // 1/zeta is unbounded
        let inv = z.recip().unwrap();
        assert!(matches!(inv.limit("zeta"), Err(Error::UnboundedElement(_))));
    }

    #[test]
    fn sign_limit_consistency() {
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        let x = FieldTowerElement::from_rat(&tw, rat(7, 3)).sub(&z);
        let l = x.limit("zeta").unwrap();
        assert_eq!(l.sign(), x.sign());
    }

    #[test]
    fn field_axioms_smoke() {
        let tw = t3();
        let g = FieldTowerElement::symbol(&tw, "gamma").unwrap();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        let a = g.add(&z.scale_rat(&rat(1, 2)));
        let b = z.sub(&FieldTowerElement::one(&tw));
        let c = a.mul(&b).div(&b).unwrap();
        assert!(c.equals(&a));
        assert_eq!(a.mul(&b).sign(), a.sign().mul(b.sign()));
    }

    #[test]
    fn eval_agrees_with_sign() {
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        // x = 1/4 - zeta: positive, and positive at zeta = 1e-9
        let x = FieldTowerElement::from_rat(&tw, rat(1, 4)).sub(&z);
        let v = x.eval_last_symbol(&rat(1, 1_000_000_000)).unwrap();
        assert_eq!(v.sign(), x.sign());
    }
}
