//! Sparse multivariate polynomials over tower coefficients, with
//! block-variable bookkeeping, symmetry validation, Newton sums and the
//! equivariant deformation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::scalars::{rat_int, FieldTowerElement, InfinitesimalTower, Rat};
use crate::{Error, Result};

/// Sizes of the variable blocks; the i-th block is acted on by the full
/// symmetric group on its coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    block_sizes: Vec<usize>,
}

impl BlockSpec {
    pub fn new(block_sizes: Vec<usize>) -> Result<Self> {
        if block_sizes.is_empty() || block_sizes.iter().any(|&k| k == 0) {
            return Err(Error::PreconditionViolated(
                "block sizes must be positive".into(),
            ));
        }
        Ok(BlockSpec { block_sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn omega(&self) -> usize {
        self.block_sizes.len()
    }

    pub fn k(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// Appends a fresh singleton block (used when padding with an extra variable).
    pub fn with_singleton(&self) -> BlockSpec {
        let mut v = self.block_sizes.clone();
        v.push(1);
        BlockSpec { block_sizes: v }
    }

    /// Flat index of variable j (0-based) of block i (0-based).
    pub fn var_index(&self, block: usize, j: usize) -> usize {
        self.block_sizes[..block].iter().sum::<usize>() + j
    }

    /// Block of a flat variable index.
    pub fn block_of(&self, var: usize) -> usize {
        let mut acc = 0;
        for (i, &k) in self.block_sizes.iter().enumerate() {
            acc += k;
            if var < acc {
                return i;
            }
        }
        panic!("variable index out of range");
    }

    /// Canonical variable names: X1..Xk for one block, Bi_j otherwise.
    pub fn canonical_vars(&self) -> Vec<String> {
        if self.omega() == 1 {
            (1..=self.k()).map(|i| format!("X{i}")).collect()
        } else {
            let mut v = Vec::with_capacity(self.k());
            for (i, &ki) in self.block_sizes.iter().enumerate() {
                for j in 1..=ki {
                    v.push(format!("B{}_{}", i + 1, j));
                }
            }
            v
        }
    }
}

/// Sparse polynomial with tower coefficients; exponent vectors are dense over
/// the declared variable list.
#[derive(Clone)]
pub struct SparsePoly {
    vars: Arc<Vec<String>>,
    tower: InfinitesimalTower,
    terms: BTreeMap<Vec<u32>, FieldTowerElement>,
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl SparsePoly {
    pub fn zero(vars: Arc<Vec<String>>, tower: &InfinitesimalTower) -> Self {
        SparsePoly {
            vars,
            tower: tower.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<Vec<String>>, c: FieldTowerElement) -> Self {
        let tower = c.tower().clone();
        let mut p = SparsePoly::zero(vars, &tower);
        if !c.is_zero() {
            p.terms.insert(vec![0; p.vars.len()], c);
        }
        p
    }

    pub fn from_int(vars: Arc<Vec<String>>, tower: &InfinitesimalTower, v: i64) -> Self {
        Self::constant(vars.clone(), FieldTowerElement::from_int(tower, v))
    }

    pub fn var(vars: Arc<Vec<String>>, tower: &InfinitesimalTower, idx: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[idx] = 1;
        let mut p = SparsePoly::zero(vars, tower);
        p.terms.insert(e, FieldTowerElement::one(tower));
        p
    }

    pub fn from_terms(
        vars: Arc<Vec<String>>,
        tower: &InfinitesimalTower,
        terms: Vec<(Vec<u32>, FieldTowerElement)>,
    ) -> Self {
        let mut p = SparsePoly::zero(vars, tower);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: FieldTowerElement) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(e.len(), self.vars.len());
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn tower(&self) -> &InfinitesimalTower {
        &self.tower
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldTowerElement)> {
        self.terms.iter()
    }

    /// Leading term under the lexicographic exponent order.
    pub fn leading_term(&self) -> Option<(&Vec<u32>, &FieldTowerElement)> {
        self.terms.iter().next_back()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_value(&self) -> Option<FieldTowerElement> {
        if self.terms.is_empty() {
            return Some(FieldTowerElement::zero(&self.tower));
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|e| e[idx]).max().unwrap_or(0)
    }

    fn assert_compatible(&self, other: &SparsePoly) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || *self.vars == *other.vars,
            "variable-set mismatch"
        );
        assert_eq!(self.tower, other.tower, "tower mismatch");
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        self.assert_compatible(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SparsePoly {
        SparsePoly {
            vars: self.vars.clone(),
            tower: self.tower.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        self.assert_compatible(other);
        let mut out = SparsePoly::zero(self.vars.clone(), &self.tower);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb.iter()).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &FieldTowerElement) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero(self.vars.clone(), &self.tower);
        }
        SparsePoly {
            vars: self.vars.clone(),
            tower: self.tower.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k.mul(c)))
                .collect(),
        }
    }

    pub fn scale_rat(&self, c: &Rat) -> SparsePoly {
        self.scale(&FieldTowerElement::from_rat(&self.tower, c.clone()))
    }

    pub fn pow(&self, mut e: u32) -> SparsePoly {
        let mut base = self.clone();
        let mut acc = SparsePoly::from_int(self.vars.clone(), &self.tower, 1);
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

    pub fn partial_derivative(&self, idx: usize) -> SparsePoly {
        let mut out = SparsePoly::zero(self.vars.clone(), &self.tower);
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] -= 1;
            let factor = FieldTowerElement::from_rat(&self.tower, rat_int(e[idx] as i64));
            out.add_term(e2, c.mul(&factor));
        }
        out
    }

    /// Substitutes each variable by the polynomial `images[i]`, all of which
    /// must share a variable set and tower.
    pub fn substitute(&self, images: &[SparsePoly]) -> Result<SparsePoly> {
        if images.len() != self.vars.len() {
            return Err(Error::VariableClash(format!(
                "expected {} images, got {}",
                self.vars.len(),
                images.len()
            )));
        }
        let (tvars, ttower) = match images.first() {
            Some(p) => (p.vars.clone(), p.tower.clone()),
            None => (self.vars.clone(), self.tower.clone()),
        };
        for p in images {
            if *p.vars != *tvars || p.tower != ttower {
                return Err(Error::VariableClash(
                    "substitution images disagree on variables or tower".into(),
                ));
            }
        }
        let mut out = SparsePoly::zero(tvars.clone(), &ttower);
        for (e, c) in &self.terms {
            let mut term = SparsePoly::constant(
                tvars.clone(),
                c.lift(&ttower).map_err(|e| Error::TowerMismatch(e.to_string()))?,
            );
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = term.mul(&images[i].pow(exp));
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Evaluates at a point given by tower elements.
    pub fn eval(&self, point: &[FieldTowerElement]) -> Result<FieldTowerElement> {
        if point.len() != self.vars.len() {
            return Err(Error::VariableClash("wrong point dimension".into()));
        }
        let mut acc = FieldTowerElement::zero(&self.tower);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    t = t.mul(&point[i].pow(exp));
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Reindexes variables: `perm[i]` is the new position of old variable i.
    pub fn permute_vars(&self, perm: &[usize], new_vars: Arc<Vec<String>>) -> SparsePoly {
        let mut out = SparsePoly::zero(new_vars.clone(), &self.tower);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; new_vars.len()];
            for (i, &exp) in e.iter().enumerate() {
                e2[perm[i]] += exp;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Widens the variable list (old variables keep their positions).
    pub fn widen_vars(&self, new_vars: Arc<Vec<String>>) -> SparsePoly {
        assert!(new_vars.len() >= self.vars.len());
        let mut out = SparsePoly::zero(new_vars.clone(), &self.tower);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.resize(new_vars.len(), 0);
            out.add_term(e2, c.clone());
        }
        out
    }

    pub fn lift_tower(&self, to: &InfinitesimalTower) -> Result<SparsePoly> {
        let mut out = SparsePoly::zero(self.vars.clone(), to);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.lift(to)?);
        }
        Ok(out)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(
        &self,
        tower: &InfinitesimalTower,
        f: impl Fn(&FieldTowerElement) -> Result<FieldTowerElement>,
    ) -> Result<SparsePoly> {
        let mut out = SparsePoly::zero(self.vars.clone(), tower);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Swaps two variables in place (same variable list).
    pub fn swap_vars(&self, a: usize, b: usize) -> SparsePoly {
        let mut out = SparsePoly::zero(self.vars.clone(), &self.tower);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.swap(a, b);
            out.add_term(e2, c.clone());
        }
        out
    }

    /// True iff the polynomial is invariant under every adjacent transposition
    /// within each block (those generate the full block-wise symmetric group).
    /// Variables beyond the blocks are extras with no symmetry requirement.
    pub fn is_symmetric_in_blocks(&self, b: &BlockSpec) -> bool {
        if b.k() > self.vars.len() {
            return false;
        }
        for (i, &ki) in b.sizes().iter().enumerate() {
            for j in 0..ki.saturating_sub(1) {
                let a = b.var_index(i, j);
                let swapped = self.swap_vars(a, a + 1);
                if !self.equals(&swapped) {
                    return false;
                }
            }
        }
        true
    }

    pub fn equals(&self, other: &SparsePoly) -> bool {
        if self.terms.len() != other.terms.len() {
            return false;
        }
        self.terms.iter().zip(other.terms.iter()).all(|((e1, c1), (e2, c2))| {
            e1 == e2 && c1.equals(c2)
        })
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        // dominant-last map order is fine for display; sort by degree descending
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (e, c) in items {
            let mut factors = Vec::new();
            if let Some(r) = c.is_rational() {
                if !(r.is_integer() && r.numer().magnitude().to_string() == "1")
                    || e.iter().all(|&x| x == 0)
                {
                    factors.push(format!("{}", r));
                } else if num_traits::Signed::is_negative(&r) {
                    factors.push("-1".to_string());
                }
            } else {
                factors.push(format!("({:?})", c));
            }
            for (i, &exp) in e.iter().enumerate() {
                if exp == 1 {
                    factors.push(self.vars[i].clone());
                } else if exp > 1 {
                    factors.push(format!("{}^{}", self.vars[i], exp));
                }
            }
            if factors.is_empty() {
                factors.push("1".to_string());
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

/// The d-th Newton power sum over the first `k` variables of `vars`.
pub fn newton_sum(
    vars: Arc<Vec<String>>,
    tower: &InfinitesimalTower,
    d: u32,
    k: usize,
) -> SparsePoly {
    assert!(d >= 1, "newton sum needs d >= 1");
    let mut p = SparsePoly::zero(vars.clone(), tower);
    for i in 0..k {
        let mut e = vec![0; vars.len()];
        e[i] = d;
        p.add_term(e, FieldTowerElement::one(tower));
    }
    p
}

/// The equivariant deformation P - ζ(1 + p_d) over all `k` variables of P.
/// `zeta` must be the smallest (last) tower symbol of P's coefficient ring.
pub fn deform(p: &SparsePoly, d: u32, zeta: &str) -> Result<SparsePoly> {
    let tower = p.tower().clone();
    match tower.last() {
        Some(s) if s == zeta => {}
        _ => {
            return Err(Error::TowerMismatch(format!(
                "{zeta} is not the smallest tower symbol"
            )))
        }
    }
    if d % 2 != 0 {
        return Err(Error::PreconditionViolated("deformation degree must be even".into()));
    }
    let z = FieldTowerElement::symbol(&tower, zeta)?;
    let k = p.nvars();
    let one = SparsePoly::from_int(p.vars().clone(), &tower, 1);
    let bump = one.add(&newton_sum(p.vars().clone(), &tower, d, k));
    Ok(p.sub(&bump.scale(&z)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qtower() -> InfinitesimalTower {
        InfinitesimalTower::rationals()
    }

    fn vars2() -> Arc<Vec<String>> {
        Arc::new(vec!["X1".into(), "X2".into()])
    }

    #[test]
    fn derivative_example() {
        let tw = qtower();
        let v = vars2();
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        let p = x1.pow(2).mul(&x2);
        let d = p.partial_derivative(0);
        let expected = x1.mul(&x2).scale_rat(&rat_int(2));
        assert!(d.equals(&expected));
    }

    #[test]
    fn product_example() {
        let tw = qtower();
        let v = vars2();
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        let p = x1.add(&x2).mul(&x1.sub(&x2));
        let expected = x1.pow(2).sub(&x2.pow(2));
        assert!(p.equals(&expected));
    }

    #[test]
    fn substitute_example() {
        let tw = qtower();
        let v = vars2();
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        let p = x1.pow(2).add(&x2.pow(2));
        // X2 -> X1 gives 2 X1^2
        let images = vec![x1.clone(), x1.clone()];
        let q = p.substitute(&images).unwrap();
        assert!(q.equals(&x1.pow(2).scale_rat(&rat_int(2))));
    }

    #[test]
    fn newton_sums() {
        let tw = qtower();
        let v = vars2();
        let p12 = newton_sum(v.clone(), &tw, 1, 2);
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        assert!(p12.equals(&x1.add(&x2)));
        let v3: Arc<Vec<String>> = Arc::new(vec!["X1".into(), "X2".into(), "X3".into()]);
        let p23 = newton_sum(v3.clone(), &tw, 2, 3);
        assert_eq!(p23.num_terms(), 3);
        assert_eq!(p23.total_degree(), 2);
        let v1: Arc<Vec<String>> = Arc::new(vec!["X1".into()]);
        let p41 = newton_sum(v1.clone(), &tw, 4, 1);
        assert_eq!(p41.total_degree(), 4);
        assert_eq!(p41.num_terms(), 1);
    }

    #[test]
    fn deform_examples() {
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let v1: Arc<Vec<String>> = Arc::new(vec!["X1".into()]);
        let x1 = SparsePoly::var(v1.clone(), &tw, 0);
        let p = x1.pow(2);
        let d = deform(&p, 2, "zeta").unwrap();
        // X1^2 - zeta (1 + X1^2)
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        let expected = p.sub(
            &SparsePoly::from_int(v1.clone(), &tw, 1)
                .add(&x1.pow(2))
                .scale(&z),
        );
        assert!(d.equals(&expected));
        // deform at zeta = 0 recovers P
        let back = d
            .map_coeffs(&tw, |c| c.eval_last_symbol(&Rat::from_integer(0.into()))?.lift(&tw))
            .unwrap();
        assert!(back.equals(&p));
        // deforming the zero polynomial
        let zp = SparsePoly::zero(v1.clone(), &tw);
        let dz = deform(&zp, 2, "zeta").unwrap();
        let expected0 = SparsePoly::from_int(v1.clone(), &tw, 1)
            .add(&x1.pow(2))
            .scale(&z)
            .neg();
        assert!(dz.equals(&expected0));
    }

    #[test]
    fn symmetry_examples() {
        let tw = qtower();
        let v = vars2();
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        let b2 = BlockSpec::new(vec![2]).unwrap();
        assert!(x1.mul(&x2).add(&x1).add(&x2).is_symmetric_in_blocks(&b2));
        assert!(!x1.sub(&x2).is_symmetric_in_blocks(&b2));
        // blocks (2,1): X1+X2+Y1^2 symmetric
        let v3: Arc<Vec<String>> = Arc::new(vec!["B1_1".into(), "B1_2".into(), "B2_1".into()]);
        let a = SparsePoly::var(v3.clone(), &tw, 0);
        let b = SparsePoly::var(v3.clone(), &tw, 1);
        let y = SparsePoly::var(v3.clone(), &tw, 2);
        let b21 = BlockSpec::new(vec![2, 1]).unwrap();
        assert!(a.add(&b).add(&y.pow(2)).is_symmetric_in_blocks(&b21));
        assert!(!a.add(&y).is_symmetric_in_blocks(&b21));
    }

    #[test]
    fn deform_preserves_symmetry() {
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let v = Arc::new(vec!["X1".to_string(), "X2".to_string()]);
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        let p = x1.mul(&x2).add(&x1.add(&x2).pow(2));
        let b = BlockSpec::new(vec![2]).unwrap();
        assert!(p.is_symmetric_in_blocks(&b));
        let d = deform(&p, 4, "zeta").unwrap();
        assert!(d.is_symmetric_in_blocks(&b));
    }
}
