//! Adaptive-precision arithmetic for tower scalars.
//!
//! A `WScalar` stores, exactly, the lowest-order terms (in the field's
//! dominance order) of an element of the fraction field of Q[ε₁,…,ε_m],
//! together with a horizon below which the stored picture is complete.
//! Signs read from a nonempty window are exact. A sign or zero query that
//! falls beyond the horizon reports `Indet`, and callers retry at a larger
//! window (ultimately with full exact arithmetic), so no decision is ever
//! approximate.
//!
//! Exponents are integers (negative powers appear through division).

use num_traits::{One, Zero};
use std::cmp::Ordering;

use crate::scalars::{FieldTowerElement, Rat, Sign};

/// Truncation marker: decisions that hit the horizon must escalate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Indet;

pub type CResult<T> = std::result::Result<T, Indet>;

/// Ring-with-signs interface shared by exact tower elements and windows.
pub trait CoeffRing: Clone {
    fn c_add(&self, o: &Self) -> Self;
    fn c_sub(&self, o: &Self) -> Self;
    fn c_mul(&self, o: &Self) -> Self;
    fn c_neg(&self) -> Self;
    /// Field division; `o` must be nonzero (guarded by callers).
    fn c_div(&self, o: &Self) -> CResult<Self>;
    fn c_is_zero(&self) -> CResult<bool>;
    fn c_sign(&self) -> CResult<Sign>;
    fn c_zero(&self) -> Self;
    fn c_one(&self) -> Self;
}

impl CoeffRing for FieldTowerElement {
    fn c_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn c_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn c_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn c_neg(&self) -> Self {
        self.neg()
    }
    fn c_div(&self, o: &Self) -> CResult<Self> {
        Ok(self.div(o).expect("exact division by zero"))
    }
    fn c_is_zero(&self) -> CResult<bool> {
        Ok(self.is_zero())
    }
    fn c_sign(&self) -> CResult<Sign> {
        Ok(self.sign())
    }
    fn c_zero(&self) -> Self {
        FieldTowerElement::zero(self.tower())
    }
    fn c_one(&self) -> Self {
        FieldTowerElement::one(self.tower())
    }
}

type Mono = Vec<i64>;

/// Dominance order on monomials: smaller = more dominant (larger element).
fn mcmp(a: &[i64], b: &[i64]) -> Ordering {
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn madd(a: &[i64], b: &[i64]) -> Mono {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

fn msub(a: &[i64], b: &[i64]) -> Mono {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Horizon {
    /// Every term of the element is stored.
    Complete,
    /// All terms strictly below `m` (in dominance order) are stored.
    Trunc(Mono),
    /// Nothing is known.
    Bottom,
}

#[derive(Clone)]
pub struct WScalar {
    /// Sorted dominant-first, nonzero coefficients, all below the horizon.
    terms: Vec<(Mono, Rat)>,
    horizon: Horizon,
    nsym: usize,
    cap: usize,
}

impl std::fmt::Debug for WScalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "W[")?;
        for (m, c) in self.terms.iter().take(4) {
            write!(f, "{c}*{m:?} ")?;
        }
        write!(f, "| {:?}]", self.horizon)
    }
}

impl WScalar {
    pub fn zero(nsym: usize, cap: usize) -> Self {
        WScalar {
            terms: Vec::new(),
            horizon: Horizon::Complete,
            nsym,
            cap,
        }
    }

    pub fn from_rat(nsym: usize, cap: usize, r: Rat) -> Self {
        let mut s = Self::zero(nsym, cap);
        if !r.is_zero() {
            s.terms.push((vec![0; nsym], r));
        }
        s
    }

    fn from_sorted(nsym: usize, cap: usize, terms: Vec<(Mono, Rat)>, horizon: Horizon) -> Self {
        let mut s = WScalar {
            terms,
            horizon,
            nsym,
            cap,
        };
        s.enforce_cap();
        s
    }

    fn enforce_cap(&mut self) {
        if let Horizon::Trunc(h) = &self.horizon {
            let h = h.clone();
            self.terms.retain(|(m, _)| mcmp(m, &h) == Ordering::Less);
        }
        if self.terms.len() > self.cap {
            let cut = self.terms[self.cap].0.clone();
            self.terms.truncate(self.cap);
            self.horizon = match &self.horizon {
                Horizon::Trunc(h) if mcmp(h, &cut) == Ordering::Less => Horizon::Trunc(h.clone()),
                _ => Horizon::Trunc(cut),
            };
        }
        if self.horizon == Horizon::Bottom {
            self.terms.clear();
        }
    }

    /// Converts an exact element, truncating long numerators/denominators.
    pub fn from_exact(x: &FieldTowerElement, cap: usize) -> Self {
        let nsym = x.tower().len();
        let to_w = |p: &crate::scalars::TowerPoly| -> WScalar {
            let terms: Vec<(Mono, Rat)> = p
                .terms()
                .iter()
                .map(|(e, c)| (e.iter().map(|&u| u as i64).collect(), c.clone()))
                .collect();
            WScalar::from_sorted(nsym, cap, terms, Horizon::Complete)
        };
        let n = to_w(x.numerator());
        let d = to_w(x.denominator());
        n.c_div(&d).expect("canonical denominator is nonzero")
    }

    fn lowest_bound(&self) -> Option<Mono> {
        // A lower bound for every (known or unknown) term of the element.
        match (self.terms.first(), &self.horizon) {
            (Some((m, _)), _) => Some(m.clone()),
            (None, Horizon::Trunc(h)) => Some(h.clone()),
            (None, Horizon::Complete) => None, // exact zero
            (None, Horizon::Bottom) => None,
        }
    }

    fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.horizon == Horizon::Complete
    }
}

fn merge_terms(a: &[(Mono, Rat)], b: &[(Mono, Rat)]) -> Vec<(Mono, Rat)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match mcmp(&a[i].0, &b[j].0) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                let c = &a[i].1 + &b[j].1;
                if !c.is_zero() {
                    out.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn horizon_min(a: &Horizon, b: &Horizon) -> Horizon {
    match (a, b) {
        (Horizon::Bottom, _) | (_, Horizon::Bottom) => Horizon::Bottom,
        (Horizon::Complete, x) => x.clone(),
        (x, Horizon::Complete) => x.clone(),
        (Horizon::Trunc(x), Horizon::Trunc(y)) => {
            if mcmp(x, y) == Ordering::Less {
                Horizon::Trunc(x.clone())
            } else {
                Horizon::Trunc(y.clone())
            }
        }
    }
}

impl CoeffRing for WScalar {
    fn c_add(&self, o: &Self) -> Self {
        let horizon = horizon_min(&self.horizon, &o.horizon);
        WScalar::from_sorted(
            self.nsym,
            self.cap.max(o.cap),
            merge_terms(&self.terms, &o.terms),
            horizon,
        )
    }

    fn c_sub(&self, o: &Self) -> Self {
        self.c_add(&o.c_neg())
    }

    fn c_neg(&self) -> Self {
        WScalar {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
            horizon: self.horizon.clone(),
            nsym: self.nsym,
            cap: self.cap,
        }
    }

    fn c_mul(&self, o: &Self) -> Self {
        if self.is_exact_zero() || o.is_exact_zero() {
            return WScalar::zero(self.nsym, self.cap.max(o.cap));
        }
        // Unknown contributions sit at or above horizon_self + lowest(other).
        let mut horizon = Horizon::Complete;
        if let Horizon::Trunc(h) = &self.horizon {
            horizon = match o.lowest_bound() {
                Some(lb) => horizon_min(&horizon, &Horizon::Trunc(madd(h, &lb))),
                None => horizon.clone(),
            };
        }
        if self.horizon == Horizon::Bottom || o.horizon == Horizon::Bottom {
            horizon = Horizon::Bottom;
        }
        if let Horizon::Trunc(h) = &o.horizon {
            horizon = match self.lowest_bound() {
                Some(lb) => horizon_min(&horizon, &Horizon::Trunc(madd(h, &lb))),
                None => horizon,
            };
        }
        let mut acc: std::collections::BTreeMap<Vec<i64>, Rat> = Default::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m = madd(ma, mb);
                let e = acc.entry(m).or_insert_with(Rat::zero);
                *e += ca * cb;
            }
        }
        let mut terms: Vec<(Mono, Rat)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|x, y| mcmp(&x.0, &y.0));
        WScalar::from_sorted(self.nsym, self.cap.max(o.cap), terms, horizon)
    }

    fn c_div(&self, o: &Self) -> CResult<Self> {
        if o.is_exact_zero() {
            panic!("windowed division by exact zero");
        }
        if o.terms.is_empty() {
            // divisor's leading term unknown
            return Err(Indet);
        }
        if self.is_exact_zero() {
            return Ok(WScalar::zero(self.nsym, self.cap.max(o.cap)));
        }
        let cap = self.cap.max(o.cap);
        let (bm, bc) = (&o.terms[0].0, &o.terms[0].1);
        // budget: horizon of the quotient implied by the operands
        let mut q_horizon = Horizon::Complete;
        if let Horizon::Trunc(h) = &self.horizon {
            q_horizon = horizon_min(&q_horizon, &Horizon::Trunc(msub(h, bm)));
        }
        if let Horizon::Trunc(h) = &o.horizon {
            if let Some(lb) = self.lowest_bound() {
                // a/b unknown beyond (h_b - m_b) + (lb_a - m_b)
                let rel = msub(&madd(h, &lb), &madd(bm, bm));
                q_horizon = horizon_min(&q_horizon, &Horizon::Trunc(rel));
            }
        }
        if self.horizon == Horizon::Bottom || o.horizon == Horizon::Bottom {
            q_horizon = Horizon::Bottom;
        }
        let mut rem = self.clone();
        rem.cap = cap;
        let mut q_terms: Vec<(Mono, Rat)> = Vec::new();
        while q_terms.len() < cap {
            if rem.terms.is_empty() {
                break;
            }
            let qm = msub(&rem.terms[0].0, bm);
            let qc = &rem.terms[0].1 / bc;
            // rem -= (qc * qm) * o
            let single = WScalar {
                terms: vec![(qm.clone(), qc.clone())],
                horizon: Horizon::Complete,
                nsym: self.nsym,
                cap,
            };
            rem = rem.c_sub(&single.c_mul(o));
            q_terms.push((qm, qc));
        }
        let final_h = match (&rem.horizon, rem.terms.first()) {
            (Horizon::Bottom, _) => Horizon::Bottom,
            (_, Some((m, _))) => horizon_min(&q_horizon, &Horizon::Trunc(msub(m, bm))),
            (Horizon::Trunc(h), None) => horizon_min(&q_horizon, &Horizon::Trunc(msub(h, bm))),
            (Horizon::Complete, None) => q_horizon,
        };
        Ok(WScalar::from_sorted(self.nsym, cap, q_terms, final_h))
    }

    fn c_is_zero(&self) -> CResult<bool> {
        if !self.terms.is_empty() {
            return Ok(false);
        }
        match self.horizon {
            Horizon::Complete => Ok(true),
            _ => Err(Indet),
        }
    }

    fn c_sign(&self) -> CResult<Sign> {
        match self.terms.first() {
            Some((_, c)) => Ok(Sign::of_rat(c)),
            None => match self.horizon {
                Horizon::Complete => Ok(Sign::Zero),
                _ => Err(Indet),
            },
        }
    }

    fn c_zero(&self) -> Self {
        WScalar::zero(self.nsym, self.cap)
    }

    fn c_one(&self) -> Self {
        WScalar::from_rat(self.nsym, self.cap, Rat::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat_int, InfinitesimalTower};

    #[test]
    fn window_sign_matches_exact() {
        let tw = InfinitesimalTower::new(&["w", "z"]).unwrap();
        let w = FieldTowerElement::symbol(&tw, "w").unwrap();
        let z = FieldTowerElement::symbol(&tw, "z").unwrap();
        let x = w.mul(&w).sub(&z); // w^2 - z > 0 since z ≪ w^2
        assert_eq!(x.sign(), Sign::Pos);
        let wx = WScalar::from_exact(&x, 8);
        assert_eq!(wx.c_sign().unwrap(), Sign::Pos);
    }

    #[test]
    fn division_produces_series() {
        let tw = InfinitesimalTower::new(&["w"]).unwrap();
        let w = FieldTowerElement::symbol(&tw, "w").unwrap();
        let one = FieldTowerElement::one(&tw);
        // 1/(1+w) = 1 - w + w^2 - ...
        let a = WScalar::from_exact(&one, 6);
        let b = WScalar::from_exact(&one.add(&w), 6);
        let q = a.c_div(&b).unwrap();
        assert_eq!(q.terms.len(), 6);
        assert_eq!(q.terms[0].1, rat_int(1));
        assert_eq!(q.terms[1].1, rat_int(-1));
        assert_eq!(q.terms[5].1, rat_int(-1));
        // beyond the window the sum is indeterminate only above horizon;
        // the sign is still decidable from the first term
        assert_eq!(q.c_sign().unwrap(), Sign::Pos);
    }

    #[test]
    fn truncation_reports_indeterminate() {
        let tw = InfinitesimalTower::new(&["w"]).unwrap();
        let w = FieldTowerElement::symbol(&tw, "w").unwrap();
        let one = FieldTowerElement::one(&tw);
        let a = WScalar::from_exact(&one, 4);
        let b = WScalar::from_exact(&one.add(&w), 4);
        let q = a.c_div(&b).unwrap(); // known to w^3
        let back = q.c_mul(&WScalar::from_exact(&one.add(&w), 4));
        // back = 1 + unknown tail beyond w^3: subtracting 1 is not provably zero
        let d = back.c_sub(&WScalar::from_exact(&one, 4));
        assert!(d.c_is_zero().is_err());
        // but adding something dominant decides the sign
        let e = d.c_add(&WScalar::from_exact(&one, 4));
        assert_eq!(e.c_sign().unwrap(), Sign::Pos);
    }

    #[test]
    fn exact_division_stays_complete() {
        let tw = InfinitesimalTower::new(&["w"]).unwrap();
        let w = FieldTowerElement::symbol(&tw, "w").unwrap();
        let one = FieldTowerElement::one(&tw);
        // (1 - w^2)/(1 + w) = 1 - w exactly
        let a = WScalar::from_exact(&one.sub(&w.mul(&w)), 16);
        let b = WScalar::from_exact(&one.add(&w), 16);
        let q = a.c_div(&b).unwrap();
        assert_eq!(q.terms.len(), 2);
        assert!(q.c_is_zero() == Ok(false));
        let z = q.c_sub(&WScalar::from_exact(&one.sub(&w), 16));
        assert_eq!(z.c_is_zero(), Ok(true));
    }
}
