//! Partition combinatorics and the equivariant reductions: enumeration of
//! block partitions, variable collapse, the per-partition critical system,
//! multinomial weights and deformation-degree selection.

use std::sync::Arc;

use crate::polys::{BlockSpec, SparsePoly};
use crate::scalars::{FieldTowerElement, Rat, Sign};
use crate::zerodim::{sign_at_point, RealAlgebraicPoint};
use crate::{Error, Result};

/// One partition per block; parts are positive and non-increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: BlockSpec,
    parts: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(blocks: BlockSpec, parts: Vec<Vec<usize>>) -> Result<Self> {
        if parts.len() != blocks.omega() {
            return Err(Error::PreconditionViolated(
                "one partition per block required".into(),
            ));
        }
        for (i, p) in parts.iter().enumerate() {
            if p.is_empty() || p.iter().any(|&x| x == 0) {
                return Err(Error::PreconditionViolated("parts must be positive".into()));
            }
            if p.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::PreconditionViolated("parts must be non-increasing".into()));
            }
            if p.iter().sum::<usize>() != blocks.sizes()[i] {
                return Err(Error::PreconditionViolated("parts must sum to the block size".into()));
            }
        }
        Ok(BlockPartition { blocks, parts })
    }

    pub fn blocks(&self) -> &BlockSpec {
        &self.blocks
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    /// Total number of parts across blocks.
    pub fn length(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    /// Flattened part sizes in block order.
    pub fn flat_parts(&self) -> Vec<usize> {
        self.parts.iter().flatten().copied().collect()
    }

    /// Block index of each flattened part.
    pub fn part_blocks(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.length());
        for (i, p) in self.parts.iter().enumerate() {
            v.extend(std::iter::repeat(i).take(p.len()));
        }
        v
    }

    /// For each flattened part, the range of original (flat) variable indices
    /// that collapse onto it.
    pub fn part_var_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.length());
        let mut base = 0usize;
        for (i, p) in self.parts.iter().enumerate() {
            let mut offset = 0usize;
            for &sz in p {
                out.push(base + offset..base + offset + sz);
                offset += sz;
            }
            base += self.blocks.sizes()[i];
        }
        out
    }

    /// Canonical Z-variable names for the collapsed polynomial.
    pub fn collapsed_vars(&self) -> Arc<Vec<String>> {
        let mut v = Vec::with_capacity(self.length());
        for (i, p) in self.parts.iter().enumerate() {
            for j in 1..=p.len() {
                v.push(format!("Z{}_{}", i + 1, j));
            }
        }
        Arc::new(v)
    }

    pub fn render(&self) -> String {
        let blocks: Vec<String> = self
            .parts
            .iter()
            .map(|p| {
                let inner: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                format!("({})", inner.join(","))
            })
            .collect();
        blocks.join("x")
    }
}

/// Per-block caps on the number of parts.
#[derive(Clone, Debug)]
pub struct PartitionBudget {
    caps: Vec<usize>,
}

impl PartitionBudget {
    /// min(k_i, cap) per block.
    pub fn capped(blocks: &BlockSpec, cap: usize) -> Self {
        PartitionBudget {
            caps: blocks.sizes().iter().map(|&k| k.min(cap.max(1))).collect(),
        }
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }
}

/// Smallest even d' with d < d' and d'-1 prime; d' ≤ 2d for every d ≥ 2.
/// `pad` signals that d'-1 divides k, so a padding variable is required.
pub fn pick_deformation_degree(d: u32, k: usize) -> (u32, bool) {
    let is_prime = |n: u32| -> bool {
        if n < 2 {
            return false;
        }
        let mut m = 2;
        while m * m <= n {
            if n % m == 0 {
                return false;
            }
            m += 1;
        }
        true
    };
    let mut dp = if d % 2 == 0 { d + 2 } else { d + 1 };
    while !is_prime(dp - 1) {
        dp += 2;
    }
    let pad = (k as u32) % (dp - 1) == 0;
    (dp, pad)
}

fn partitions_of(n: usize, max_parts: usize) -> Vec<Vec<usize>> {
    // partitions with at most max_parts parts, parts non-increasing,
    // enumerated with larger first parts first
    fn rec(n: usize, max_part: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        if slots == 0 {
            return;
        }
        let hi = n.min(max_part);
        // a partition into `slots` parts needs each part ≥ ceil(n / slots)
        let lo = n.div_ceil(slots);
        for p in (lo..=hi).rev() {
            prefix.push(p);
            rec(n - p, p, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    rec(n, n, max_parts, &mut prefix, &mut out);
    out
}

/// Every block partition whose per-block part counts respect the budget,
/// each exactly once, in a deterministic order.
pub fn enumerate_partitions(blocks: &BlockSpec, budget: &PartitionBudget) -> Vec<BlockPartition> {
    let per_block: Vec<Vec<Vec<usize>>> = blocks
        .sizes()
        .iter()
        .zip(budget.caps().iter())
        .map(|(&k, &cap)| partitions_of(k, cap.min(k)))
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_block.len()];
    'outer: loop {
        let parts: Vec<Vec<usize>> = idx
            .iter()
            .enumerate()
            .map(|(i, &j)| per_block[i][j].clone())
            .collect();
        out.push(BlockPartition {
            blocks: blocks.clone(),
            parts,
        });
        // odometer
        for i in (0..idx.len()).rev() {
            idx[i] += 1;
            if idx[i] < per_block[i].len() {
                continue 'outer;
            }
            idx[i] = 0;
            if i == 0 {
                break 'outer;
            }
        }
    }
    out
}

/// Substitution images realizing the collapse X ↦ Z over the collapsed
/// variable set; extra (non-block) variables keep their own fresh slots.
pub fn collapse_images(
    q: &SparsePoly,
    pi: &BlockPartition,
) -> Result<(Arc<Vec<String>>, Vec<SparsePoly>)> {
    let k = pi.blocks.k();
    let nextra = q
        .nvars()
        .checked_sub(k)
        .ok_or_else(|| Error::PreconditionViolated("polynomial has fewer variables than blocks".into()))?;
    let mut names = (*pi.collapsed_vars()).clone();
    for e in 0..nextra {
        names.push(q.vars()[k + e].clone());
    }
    let zvars = Arc::new(names);
    let ranges = pi.part_var_ranges();
    let mut images = vec![SparsePoly::zero(zvars.clone(), q.tower()); q.nvars()];
    for (m, range) in ranges.iter().enumerate() {
        for v in range.clone() {
            images[v] = SparsePoly::var(zvars.clone(), q.tower(), m);
        }
    }
    for e in 0..nextra {
        images[k + e] = SparsePoly::var(zvars.clone(), q.tower(), pi.length() + e);
    }
    Ok((zvars, images))
}

/// Q_π: each group of π_j^{(i)} consecutive block-i variables replaced by one
/// Z-variable.
pub fn collapse(q: &SparsePoly, pi: &BlockPartition) -> Result<SparsePoly> {
    let (_, images) = collapse_images(q, pi)?;
    q.substitute(&images)
}

/// The per-partition critical system: Q_π together with the pairwise
/// conditions that the per-coordinate partial derivatives agree, i.e.
/// (1/w_m) ∂Q_π/∂Z_m all equal (weights cleared to keep coefficients
/// polynomial: w_{m'} ∂_m Q_π − w_m ∂_{m'} Q_π).
pub fn critical_system(q: &SparsePoly, pi: &BlockPartition) -> Result<Vec<SparsePoly>> {
    let qp = collapse(q, pi)?;
    let weights = pi.flat_parts();
    let n = weights.len();
    let mut sys = vec![qp.clone()];
    let ders: Vec<SparsePoly> = (0..n).map(|m| qp.partial_derivative(m)).collect();
    for m in 0..n {
        for mp in m + 1..n {
            let a = ders[m].scale_rat(&Rat::from_integer((weights[mp] as i64).into()));
            let b = ders[mp].scale_rat(&Rat::from_integer((weights[m] as i64).into()));
            let e = a.sub(&b);
            if !e.is_zero() {
                sys.push(e);
            }
        }
    }
    Ok(sys)
}

/// The single sum-of-squares polynomial with the same real zero set as the
/// critical system; retained as a verification predicate.
pub fn critical_square_form(q: &SparsePoly, pi: &BlockPartition) -> Result<SparsePoly> {
    let sys = critical_system(q, pi)?;
    let mut acc = sys[0].mul(&sys[0]);
    for p in &sys[1..] {
        acc = acc.add(&p.mul(p));
    }
    Ok(acc)
}

/// k! / (π_1! … π_ℓ!) for a partition of k.
pub fn multinomial(k: usize, parts: &[usize]) -> i64 {
    debug_assert_eq!(parts.iter().sum::<usize>(), k);
    let mut num = num_bigint::BigInt::from(1);
    for i in 2..=k {
        num *= i as i64;
    }
    for &p in parts {
        for i in 2..=p {
            num = num / (i as i64);
        }
    }
    i64::try_from(num).expect("multinomial fits i64")
}

/// Orbit weight of a block partition: the product of per-block multinomials.
pub fn orbit_weight(pi: &BlockPartition) -> i64 {
    pi.blocks
        .sizes()
        .iter()
        .zip(pi.parts.iter())
        .map(|(&k, p)| multinomial(k, p))
        .product()
}

/// One isotypic scalar: the collapsed (∂²q/∂X_a² − ∂²q/∂X_a∂X_b) for the
/// first two variables of the given flattened part (size ≥ 2 required).
pub fn isotypic_scalar_of_part(
    q: &SparsePoly,
    pi: &BlockPartition,
    part_index: usize,
) -> Result<SparsePoly> {
    let ranges = pi.part_var_ranges();
    let range = &ranges[part_index];
    if range.len() < 2 {
        return Err(Error::PreconditionViolated("part has a single variable".into()));
    }
    let a = range.start;
    let b = range.start + 1;
    let daa = q.partial_derivative(a).partial_derivative(a);
    let dab = q.partial_derivative(a).partial_derivative(b);
    collapse(&daa.sub(&dab), pi)
}

/// Sign of Σ_m ∂Q_π/∂Z_m at a collapsed point.
pub fn contribution_sign(q_pi: &SparsePoly, p: &RealAlgebraicPoint) -> Result<Sign> {
    let n = q_pi.nvars();
    let mut s = SparsePoly::zero(q_pi.vars().clone(), q_pi.tower());
    for m in 0..n {
        s = s.add(&q_pi.partial_derivative(m));
    }
    sign_at_point(&s, p)
}

/// The collapse embedding evaluated at tower elements (for tests): maps a
/// Z-point back into the full variable space.
pub fn expand_point(pi: &BlockPartition, z: &[FieldTowerElement]) -> Vec<FieldTowerElement> {
    let ranges = pi.part_var_ranges();
    let k = pi.blocks.k();
    let mut out = vec![z[0].clone(); k + (z.len() - pi.length())];
    for (m, range) in ranges.iter().enumerate() {
        for v in range.clone() {
            out[v] = z[m].clone();
        }
    }
    for e in pi.length()..z.len() {
        out[k + e - pi.length()] = z[e].clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat_int, InfinitesimalTower};

    fn q() -> InfinitesimalTower {
        InfinitesimalTower::rationals()
    }

    #[test]
    fn deformation_degree_examples() {
        assert_eq!(pick_deformation_degree(4, 7), (6, false));
        assert_eq!(pick_deformation_degree(4, 10), (6, true)); // 5 | 10
        assert_eq!(pick_deformation_degree(2, 7), (4, false));
        assert_eq!(pick_deformation_degree(6, 10), (8, false)); // 7 does not divide 10
        assert_eq!(pick_deformation_degree(8, 3), (12, false)); // 9 composite, 11 prime
    }

    #[test]
    fn enumerate_partition_examples() {
        let b = BlockSpec::new(vec![2]).unwrap();
        let budget = PartitionBudget::capped(&b, 2);
        let pis = enumerate_partitions(&b, &budget);
        let rendered: Vec<String> = pis.iter().map(|p| p.render()).collect();
        assert_eq!(rendered, vec!["(2)", "(1,1)"]);

        let b4 = BlockSpec::new(vec![4]).unwrap();
        let pis = enumerate_partitions(&b4, &PartitionBudget::capped(&b4, 2));
        let rendered: Vec<String> = pis.iter().map(|p| p.render()).collect();
        assert_eq!(rendered, vec!["(4)", "(3,1)", "(2,2)"]);

        let b21 = BlockSpec::new(vec![2, 1]).unwrap();
        let pis = enumerate_partitions(&b21, &PartitionBudget::capped(&b21, 2));
        let rendered: Vec<String> = pis.iter().map(|p| p.render()).collect();
        assert_eq!(rendered, vec!["(2)x(1)", "(1,1)x(1)"]);
    }

    #[test]
    fn collapse_examples() {
        let tw = q();
        let b = BlockSpec::new(vec![2]).unwrap();
        let vars = Arc::new(vec!["X1".to_string(), "X2".to_string()]);
        let x1 = SparsePoly::var(vars.clone(), &tw, 0);
        let x2 = SparsePoly::var(vars.clone(), &tw, 1);

        let pi2 = BlockPartition::new(b.clone(), vec![vec![2]]).unwrap();
        let c = collapse(&x1.add(&x2), &pi2).unwrap();
        assert_eq!(c.render(), "2*Z1_1");
        let c = collapse(&x1.mul(&x2), &pi2).unwrap();
        assert_eq!(c.render(), "Z1_1^2");

        let pi11 = BlockPartition::new(b, vec![vec![1, 1]]).unwrap();
        let c = collapse(&x1.mul(&x2), &pi11).unwrap();
        assert_eq!(c.render(), "Z1_1*Z1_2");
    }

    #[test]
    fn critical_system_shapes() {
        let tw = q();
        // Q = Z^2 in one variable: no pair equations
        let b1 = BlockSpec::new(vec![1]).unwrap();
        let v1 = Arc::new(vec!["X1".to_string()]);
        let z = SparsePoly::var(v1.clone(), &tw, 0);
        let pi = BlockPartition::new(b1, vec![vec![1]]).unwrap();
        let sys = critical_system(&z.pow(2), &pi).unwrap();
        assert_eq!(sys.len(), 1);

        // two unit parts: {Q_pi, d1 - d2}
        let b2 = BlockSpec::new(vec![2]).unwrap();
        let v2 = Arc::new(vec!["X1".to_string(), "X2".to_string()]);
        let x1 = SparsePoly::var(v2.clone(), &tw, 0);
        let x2 = SparsePoly::var(v2.clone(), &tw, 1);
        let qq = x1.pow(2).add(&x2.pow(2));
        let pi11 = BlockPartition::new(b2, vec![vec![1, 1]]).unwrap();
        let sys = critical_system(&qq, &pi11).unwrap();
        assert_eq!(sys.len(), 2);
        // d1 - d2 = 2Z1 - 2Z2
        let zv = sys[1].vars().clone();
        let z1 = SparsePoly::var(zv.clone(), &tw, 0);
        let z2 = SparsePoly::var(zv.clone(), &tw, 1);
        assert!(sys[1].equals(&z1.sub(&z2).scale_rat(&rat_int(2))));
    }

    #[test]
    fn cross_weights_on_uneven_parts() {
        // sphere in 3 vars collapsed by (2,1): criticality of p1 forces the
        // collapsed coordinates equal, so the system must imply Z1 = Z2
        let tw = q();
        let b = BlockSpec::new(vec![3]).unwrap();
        let vars = Arc::new(vec!["X1".to_string(), "X2".to_string(), "X3".to_string()]);
        let mut p2 = SparsePoly::zero(vars.clone(), &tw);
        for i in 0..3 {
            p2 = p2.add(&SparsePoly::var(vars.clone(), &tw, i).pow(2));
        }
        let one = SparsePoly::from_int(vars.clone(), &tw, 1);
        let sphere = p2.sub(&one);
        let pi = BlockPartition::new(b, vec![vec![2, 1]]).unwrap();
        let sys = critical_system(&sphere, &pi).unwrap();
        // Q_pi = 2 Z1^2 + Z2^2 - 1; pair equation: 1*(4Z1) - 2*(2Z2) = 4(Z1 - Z2)
        let zv = sys[0].vars().clone();
        let z1 = SparsePoly::var(zv.clone(), &tw, 0);
        let z2 = SparsePoly::var(zv.clone(), &tw, 1);
        assert!(sys[1].equals(&z1.sub(&z2).scale_rat(&rat_int(4))));
        // and the square form has the same zero set: solutions only at Z1 = Z2
        let pts = crate::zerodim::exact_solve(&sys).unwrap();
        for p in &pts {
            assert_eq!(sign_at_point(&z1.sub(&z2), p).unwrap(), Sign::Zero);
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(2, &[1, 1]), 2);
        assert_eq!(multinomial(2, &[2]), 1);
        assert_eq!(multinomial(4, &[2, 2]), 6);
        assert_eq!(multinomial(8, &[1; 8]), 40320);
    }

    #[test]
    fn orbit_size_identity() {
        // Σ over distinct coordinate assignments equals the orbit weight:
        // spot-check by direct enumeration for k = 4, π = (2,1,1)
        let b = BlockSpec::new(vec![4]).unwrap();
        let pi = BlockPartition::new(b, vec![vec![2, 1, 1]]).unwrap();
        // assignments of {a,a,b,c} over 4 slots: 4!/2! = 12
        assert_eq!(orbit_weight(&pi), 12);
    }
}
