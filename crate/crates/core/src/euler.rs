//! The top-level operations: generalized Euler-Poincaré characteristic of
//! bounded symmetric algebraic sets, of general symmetric algebraic sets,
//! realizable sign conditions, Euler-Poincaré queries, per-sign-condition
//! characteristics and semi-algebraic aggregation.

use std::sync::Arc;

use crate::equivariant::{
    collapse, contribution_sign, critical_system, enumerate_partitions, isotypic_scalar_of_part,
    orbit_weight, pick_deformation_degree, BlockPartition, PartitionBudget,
};
use crate::polys::{deform, newton_sum, BlockSpec, SparsePoly};
use crate::realroots::UniPoly;
use crate::scalars::{rat, rat_int, FieldTowerElement, InfinitesimalTower, Rat, Sign};
use crate::zerodim::{
    berkowitz_charpoly, compare_algebraic_values, descartes_negative_count, drop_unbounded,
    exact_solve, limit_bounded_points, matrix_push_through, negative_eigenvalue_count,
    negative_eigenspace_in_fixed, RealAlgebraicPoint, UnivariateRepresentation,
};
use crate::{Error, Result};

/// The pair (χ^gen, equivariant χ^gen) of a symmetric set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EPResult {
    pub chi_gen: i64,
    pub chi_equivariant: i64,
}

impl EPResult {
    pub fn zero() -> Self {
        EPResult {
            chi_gen: 0,
            chi_equivariant: 0,
        }
    }
}

/// A union of sign conditions over a symmetric family.
#[derive(Debug, Clone)]
pub struct SemiAlgebraicInput {
    pub blocks: BlockSpec,
    pub family: Vec<SparsePoly>,
    pub conditions: Vec<Vec<Sign>>,
}

fn fresh_symbol(tower: &InfinitesimalTower, base: &str) -> String {
    if tower.index_of(base).is_none() {
        return base.to_string();
    }
    let mut i = 1;
    loop {
        let name = format!("{base}{i}");
        if tower.index_of(&name).is_none() {
            return name;
        }
        i += 1;
    }
}

/// The family must be stable (as a set) under every adjacent transposition
/// within each block; the sum of squares is then block-symmetric.
fn check_family_symmetry(parts: &[SparsePoly], blocks: &BlockSpec) -> Result<()> {
    for (i, &ki) in blocks.sizes().iter().enumerate() {
        for j in 0..ki.saturating_sub(1) {
            let a = blocks.var_index(i, j);
            for p in parts {
                let swapped = p.swap_vars(a, a + 1);
                if !parts.iter().any(|q| q.equals(&swapped)) {
                    return Err(Error::PreconditionViolated(
                        "the square parts are not symmetric as a family".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn check_symmetry(p: &SparsePoly, blocks: &BlockSpec) -> Result<()> {
    if !p.is_symmetric_in_blocks(blocks) {
        return Err(Error::PreconditionViolated(
            "input polynomial is not symmetric in the declared blocks".into(),
        ));
    }
    Ok(())
}

/// Deterministic pseudo-random rationals for spot checks.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    fn rat(&mut self) -> Rat {
        let n = (self.next() % 17) as i64 - 8;
        let d = (self.next() % 7) as i64 + 1;
        rat(n, d)
    }
}

fn spot_check_nonnegative(p: &SparsePoly) -> Result<()> {
    let mut rng = Rng(0x5eed_cafe_f00d_1234);
    let tower = p.tower().clone();
    for _ in 0..24 {
        let point: Vec<FieldTowerElement> = (0..p.nvars())
            .map(|_| FieldTowerElement::from_rat(&tower, rng.rat()))
            .collect();
        if p.eval(&point)?.sign() == Sign::Neg {
            return Err(Error::PreconditionViolated(
                "negative value witnessed; input must be non-negative".into(),
            ));
        }
    }
    Ok(())
}

/// Exact polynomial square root, if the input is a perfect square.
pub fn poly_sqrt(p: &SparsePoly) -> Option<SparsePoly> {
    if p.is_zero() {
        return Some(p.clone());
    }
    let (le, lc) = p.leading_term()?;
    if le.iter().any(|&e| e % 2 != 0) {
        return None;
    }
    let lr = lc.is_rational()?;
    if num_traits::Signed::is_negative(&lr) {
        return None;
    }
    let num = lr.numer().sqrt();
    let den = lr.denom().sqrt();
    if &(&num * &num) != lr.numer() || &(&den * &den) != lr.denom() {
        return None;
    }
    let tower = p.tower().clone();
    let half: Vec<u32> = le.iter().map(|&e| e / 2).collect();
    let mut a = SparsePoly::from_terms(
        p.vars().clone(),
        &tower,
        vec![(half, FieldTowerElement::from_rat(&tower, Rat::new(num, den)))],
    );
    let two = FieldTowerElement::from_int(&tower, 2);
    loop {
        let r = p.sub(&a.mul(&a));
        if r.is_zero() {
            return Some(a);
        }
        let (re, rc) = r.leading_term()?;
        let (ae, ac) = a.leading_term()?;
        let qe: Vec<u32> = re
            .iter()
            .zip(ae.iter())
            .map(|(x, y)| x.checked_sub(*y))
            .collect::<Option<Vec<u32>>>()?;
        let qc = rc.div(&two.mul(ac)).ok()?;
        let t = SparsePoly::from_terms(p.vars().clone(), &tower, vec![(qe, qc)]);
        if t.leading_term()?.0 >= a.leading_term()?.0 {
            return None; // not decreasing: not a square
        }
        a = a.add(&t);
    }
}

// ---------------------------------------------------------------------------
// the per-stratum Morse data engine for sums of squares
// ---------------------------------------------------------------------------

/// Morse data of one branch of deformed critical points over a limit point.
#[derive(Debug, Clone)]
pub struct MorseRow {
    pub partition: String,
    pub index: usize,
    pub sign: Sign,
    pub in_fixed: bool,
    pub counted: bool,
}

struct StratumData {
    /// (ind, verdict) per counted canonical orbit representative
    counted: Vec<(usize, bool)>,
    /// full rows for reporting, with a sort key for the critical value
    report: Vec<(MorseRow, Arc<UnivariateRepresentation>, usize, i32)>,
}

fn det_sparse(m: &[Vec<SparsePoly>]) -> SparsePoly {
    let n = m.len();
    let proto = &m[0][0];
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = SparsePoly::zero(proto.vars().clone(), proto.tower());
    for j in 0..n {
        let mut minor: Vec<Vec<SparsePoly>> = Vec::with_capacity(n - 1);
        for row in m.iter().skip(1) {
            let mut r: Vec<SparsePoly> = Vec::with_capacity(n - 1);
            for (jj, entry) in row.iter().enumerate() {
                if jj != j {
                    r.push(entry.clone());
                }
            }
            minor.push(r);
        }
        let term = m[0][j].mul(&det_sparse(&minor));
        if j % 2 == 0 {
            acc = acc.add(&term);
        } else {
            acc = acc.sub(&term);
        }
    }
    acc
}

/// Cramer solve M x = b over the polynomial ring: returns (det M, numerators).
fn cramer(m: &[Vec<SparsePoly>], b: &[SparsePoly]) -> (SparsePoly, Vec<SparsePoly>) {
    let n = m.len();
    let d = det_sparse(m);
    let mut nums = Vec::with_capacity(n);
    for i in 0..n {
        let mut mi: Vec<Vec<SparsePoly>> = m.to_vec();
        for (r, row) in mi.iter_mut().enumerate() {
            row[i] = b[r].clone();
        }
        nums.push(det_sparse(&mi));
    }
    (d, nums)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] + 1 <= n - (k - i) {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Solves the limit critical system of the stratum and extracts per-branch
/// Morse data, entirely over the base tower (the deformation never appears:
/// bounded deformed critical points come in two branches over each limit
/// point, and every sign decision stabilizes at the limit).
fn sos_stratum(
    parts: &[SparsePoly],
    pi: &BlockPartition,
    want_report: bool,
) -> Result<StratumData> {
    let tower = parts[0].tower().clone();
    let mut a_pi: Vec<SparsePoly> = Vec::new();
    for p in parts {
        let c = collapse(p, pi)?;
        if !c.is_zero() {
            a_pi.push(c);
        }
    }
    let mut out = StratumData {
        counted: Vec::new(),
        report: Vec::new(),
    };
    if a_pi.is_empty() {
        return Err(Error::PreconditionViolated(
            "zero polynomial has unbounded zero set".into(),
        ));
    }
    // a nonzero constant part: empty variety on this stratum
    if a_pi
        .iter()
        .any(|p| p.constant_value().map(|c| !c.is_zero()).unwrap_or(false))
    {
        return Ok(out);
    }
    let c = a_pi.len();
    let l = pi.length();
    let zvars = a_pi[0].vars().clone();
    let weights = pi.flat_parts();
    let wvec: Vec<SparsePoly> = weights
        .iter()
        .map(|&w| SparsePoly::from_int(zvars.clone(), &tower, w as i64))
        .collect();
    // Jacobian: rows = parts, columns = Z-variables
    let jac: Vec<Vec<SparsePoly>> = a_pi
        .iter()
        .map(|p| (0..l).map(|m| p.partial_derivative(m)).collect())
        .collect();
    // limit system: all parts vanish; [Jacᵀ | w] drops rank when c < l
    let mut system = a_pi.clone();
    if c < l {
        for rows in combinations(l, c + 1) {
            // minor of the L×(c+1) matrix [Jacᵀ | w] on these rows
            let mat: Vec<Vec<SparsePoly>> = rows
                .iter()
                .map(|&r| {
                    let mut row: Vec<SparsePoly> =
                        (0..c).map(|i| jac[i][r].clone()).collect();
                    row.push(wvec[r].clone());
                    row
                })
                .collect();
            let d = det_sparse(&mat);
            if !d.is_zero() {
                system.push(d);
            }
        }
    }
    let t_solve = std::time::Instant::now();
    let pts = match exact_solve(&system) {
        Ok(p) => p,
        Err(Error::NotZeroDimensional) => {
            return Err(Error::Degenerate(
                "critical set is not finite on a stratum".into(),
            ))
        }
        Err(e) => return Err(e),
    };
    if std::env::var("SYMCHI_TRACE").is_ok() {
        eprintln!("  solve {} eqs in {} vars took {:?} -> {} pts", system.len(), l, t_solve.elapsed(), pts.len());
    }
    if pts.is_empty() {
        return Ok(out);
    }
    let rep = pts[0].rep.clone();
    debug_assert!(pts.iter().all(|p| Arc::ptr_eq(&p.rep, &rep)));

    // multiplier direction and Hessian data, symbolically over Z-space
    let (dnum, anum, unum) = if c < l {
        // Gram = Jac Jacᵀ (c×c); â = Gram⁻¹ Jac w; u = Jacᵀ Gram⁻¹ â
        let mut gram = vec![vec![SparsePoly::zero(zvars.clone(), &tower); c]; c];
        for i in 0..c {
            for j in 0..c {
                let mut acc = SparsePoly::zero(zvars.clone(), &tower);
                for m in 0..l {
                    acc = acc.add(&jac[i][m].mul(&jac[j][m]));
                }
                gram[i][j] = acc;
            }
        }
        let bvec: Vec<SparsePoly> = (0..c)
            .map(|i| {
                let mut acc = SparsePoly::zero(zvars.clone(), &tower);
                for m in 0..l {
                    acc = acc.add(&jac[i][m].scale_rat(&rat_int(weights[m] as i64)));
                }
                acc
            })
            .collect();
        let (d, anum) = cramer(&gram, &bvec);
        // unum_m = Σ_i Jac[i][m] * (adj(Gram) anum)_i; reuse cramer with anum
        let (_, a2) = cramer(&gram, &anum);
        let unum: Vec<SparsePoly> = (0..l)
            .map(|m| {
                let mut acc = SparsePoly::zero(zvars.clone(), &tower);
                for i in 0..c {
                    acc = acc.add(&jac[i][m].mul(&a2[i]));
                }
                acc
            })
            .collect();
        (d, anum, unum)
    } else {
        // JtJ = JacᵀJac (l×l); u = JtJ⁻¹ w; â = Jac u
        let mut jtj = vec![vec![SparsePoly::zero(zvars.clone(), &tower); l]; l];
        for m in 0..l {
            for n in 0..l {
                let mut acc = SparsePoly::zero(zvars.clone(), &tower);
                for i in 0..c {
                    acc = acc.add(&jac[i][m].mul(&jac[i][n]));
                }
                jtj[m][n] = acc;
            }
        }
        let (d, unum) = cramer(&jtj, &wvec);
        let anum: Vec<SparsePoly> = (0..c)
            .map(|i| {
                let mut acc = SparsePoly::zero(zvars.clone(), &tower);
                for m in 0..l {
                    acc = acc.add(&jac[i][m].mul(&unum[m]));
                }
                acc
            })
            .collect();
        (d, anum, unum)
    };
    // scaled tangential Hessian: −Σ anum_i Hess(a_pi[i])
    let hess: Vec<Vec<SparsePoly>> = (0..l)
        .map(|m| {
            (0..l)
                .map(|n| {
                    let mut acc = SparsePoly::zero(zvars.clone(), &tower);
                    for i in 0..c {
                        acc = acc.add(
                            &anum[i].mul(&a_pi[i].partial_derivative(m).partial_derivative(n)),
                        );
                    }
                    acc.neg()
                })
                .collect()
        })
        .collect();
    // isotypic scalars per part of size > 1. The transverse Hessian entry
    // (∂²Q/∂X_a² − ∂²Q/∂X_a∂X_b) on the branch expands as
    //   2 Σ_i ∂_aA_i (∂_aA_i − ∂_bA_i)  +  2√ζ Σ_i a_i (∂²_{aa}A_i − ∂²_{ab}A_i) + …
    // The first term vanishes identically when every A_i is symmetric; it is
    // branch-sign dependent otherwise (after dividing by the multiplier).
    let flat = pi.flat_parts();
    let mut scalar_grad: Vec<SparsePoly> = Vec::new(); // leading gradient term, collapsed
    let mut scalar_polys: Vec<SparsePoly> = Vec::new(); // √ζ-order term in the anum scaling
    let mut scalar_part: Vec<usize> = Vec::new();
    let ranges = pi.part_var_ranges();
    for (j, &w) in flat.iter().enumerate() {
        if w < 2 {
            continue;
        }
        let a = ranges[j].start;
        let b = ranges[j].start + 1;
        let mut grad = SparsePoly::zero(zvars.clone(), &tower);
        let mut acc = SparsePoly::zero(zvars.clone(), &tower);
        for part in parts.iter() {
            let coll = collapse(part, pi)?;
            if coll.is_zero() {
                continue;
            }
            let da = part.partial_derivative(a);
            let db = part.partial_derivative(b);
            grad = grad.add(&collapse(&da.mul(&da.sub(&db)), pi)?);
            let idx = a_pi.iter().position(|x| x.equals(&coll)).unwrap();
            let d2 = isotypic_scalar_of_part(part, pi, j)?;
            acc = acc.add(&anum[idx].mul(&d2));
        }
        scalar_grad.push(grad);
        scalar_polys.push(acc.neg());
        scalar_part.push(j);
    }

    // same-block pairs for exactness and adjacent equal-size pairs for the
    // canonical representative filter
    let blocks_of = pi.part_blocks();
    let mut pair_queries: Vec<(usize, usize)> = Vec::new();
    for m in 0..l {
        for n in m + 1..l {
            if blocks_of[m] == blocks_of[n] {
                pair_queries.push((m, n));
            }
        }
    }

    // batched sign queries over the coordinates (Z-space polynomials)
    let mut zqueries: Vec<SparsePoly> = Vec::new();
    zqueries.push(dnum.clone());
    for (g, s) in scalar_grad.iter().zip(scalar_polys.iter()) {
        zqueries.push(g.clone());
        zqueries.push(s.clone());
    }
    let base = zqueries.len();
    for &(m, n) in &pair_queries {
        let zm = SparsePoly::var(zvars.clone(), &tower, m);
        let zn = SparsePoly::var(zvars.clone(), &tower, n);
        zqueries.push(zm.sub(&zn));
        zqueries.push(unum[m].sub(&unum[n]));
    }
    let refs: Vec<&SparsePoly> = zqueries.iter().collect();
    let zrows = rep.signs_of(&refs)?;

    // bordered characteristic polynomial for the tangential index
    let tdim = l.saturating_sub(c.min(l));
    let mut chib_rows: Vec<Vec<Sign>> = Vec::new();
    if tdim > 0 {
        let size = l + c;
        let zero = SparsePoly::zero(zvars.clone(), &tower);
        let mut b = vec![vec![zero.clone(); size]; size];
        for m in 0..l {
            for n in 0..l {
                b[m][n] = hess[m][n].clone();
            }
        }
        for i in 0..c {
            for m in 0..l {
                b[m][l + i] = jac[i][m].clone();
                b[l + i][m] = jac[i][m].clone();
            }
        }
        let pushed = matrix_push_through(&rep, &b)?;
        let chi = berkowitz_charpoly(&pushed, &rep.f);
        chib_rows = rep.signs_of_unipolys(&chi)?;
    }

    // iterate over verified solutions
    for p in &pts {
        let r = p.root_index;
        let row = &zrows[r];
        let dsign = row[0];
        if dsign == Sign::Zero {
            return Err(Error::DegenerateHessian);
        }
        if dsign == Sign::Neg {
            return Err(Error::Internal("gram determinant negative at a real point".into()));
        }
        // per-branch isotypic scalar signs (branch −1 counted, +1 companion)
        let mut counted_scalars: Vec<Sign> = Vec::with_capacity(scalar_polys.len());
        let mut other_scalars: Vec<Sign> = Vec::with_capacity(scalar_polys.len());
        for i in 0..scalar_polys.len() {
            let gsign = row[1 + 2 * i];
            let ssign = row[2 + 2 * i];
            if scalar_grad[i].is_zero() {
                if ssign == Sign::Zero {
                    return Err(Error::DegenerateHessian);
                }
                counted_scalars.push(ssign);
                other_scalars.push(ssign);
            } else {
                if gsign == Sign::Zero {
                    return Err(Error::DegenerateHessian);
                }
                counted_scalars.push(gsign);
                other_scalars.push(gsign.neg());
            }
        }
        // branch-dependent exactness and canonical filters; branch = -1 is
        // the counted branch, +1 the companion
        let branch_ok = |branch: i32| -> Result<bool> {
            for (qi, &(m, n)) in pair_queries.iter().enumerate() {
                let lim = row[base + 2 * qi];
                let tie = row[base + 2 * qi + 1];
                let eff = if lim != Sign::Zero {
                    lim
                } else if tie != Sign::Zero {
                    // coordinates split at the deformation scale
                    if branch < 0 {
                        tie.neg()
                    } else {
                        tie
                    }
                } else if flat[m] == flat[n] {
                    // swapping two equal parts is a stabilizer symmetry, so a
                    // branch over a swap-fixed limit point is itself fixed:
                    // the point lives on a coarser stratum and is counted
                    // there
                    return Ok(false);
                } else {
                    return Err(Error::Degenerate(
                        "unresolved coordinate tie on a stratum".into(),
                    ));
                };
                // canonical ordering among equal-size parts: strictly
                // decreasing values pick one representative per orbit
                if flat[m] == flat[n] && eff != Sign::Pos {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let tang = if tdim > 0 {
            let signs = &chib_rows[r];
            let total = descartes_negative_count(signs)?;
            total
                .checked_sub(c)
                .ok_or_else(|| Error::Internal("bordered index below the constraint count".into()))?
        } else {
            0
        };
        let iso_of = |signs: &[Sign]| -> usize {
            scalar_part
                .iter()
                .zip(signs.iter())
                .map(|(&j, s)| if *s == Sign::Neg { flat[j] - 1 } else { 0 })
                .sum()
        };
        let verdict_of = |signs: &[Sign]| -> bool { signs.iter().all(|s| *s == Sign::Pos) };
        let sph = l - 1 - tdim;
        // counted branch
        if branch_ok(-1)? {
            let ind = tang + iso_of(&counted_scalars);
            let verdict = verdict_of(&counted_scalars);
            out.counted.push((ind, verdict));
            if want_report {
                out.report.push((
                    MorseRow {
                        partition: pi.render(),
                        index: ind,
                        sign: Sign::Neg,
                        in_fixed: verdict,
                        counted: true,
                    },
                    rep.clone(),
                    r,
                    -1,
                ));
            }
        }
        if want_report && branch_ok(1)? {
            out.report.push((
                MorseRow {
                    partition: pi.render(),
                    index: tang + sph + iso_of(&other_scalars),
                    sign: Sign::Pos,
                    in_fixed: verdict_of(&other_scalars),
                    counted: false,
                },
                rep.clone(),
                r,
                1,
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// the general (unstructured) per-stratum path over the deformed tower
// ---------------------------------------------------------------------------

fn general_stratum(
    q_def: &SparsePoly,
    pi: &BlockPartition,
    zeta: &str,
) -> Result<Vec<(usize, bool)>> {
    let sys = critical_system(q_def, pi)?;
    let pts = exact_solve(&sys)?;
    let pts = drop_unbounded(pts, zeta)?;
    let q_pi = collapse(q_def, pi)?;
    let l = pi.length();
    let flat = pi.flat_parts();
    let blocks_of = pi.part_blocks();
    let tower = q_pi.tower().clone();
    let zvars = q_pi.vars().clone();
    let mut out = Vec::new();
    // restricted Hessian basis b_m = w_1 e_m - w_m e_1, m = 2..l
    let hq: Vec<Vec<SparsePoly>> = (0..l)
        .map(|m| {
            (0..l)
                .map(|n| q_pi.partial_derivative(m).partial_derivative(n))
                .collect()
        })
        .collect();
    let mut hfixed: Vec<Vec<SparsePoly>> = Vec::new();
    for m in 1..l {
        let mut row = Vec::new();
        for n in 1..l {
            // bᵀ H b for b_m, b_n
            let w1 = rat_int(flat[0] as i64);
            let wm = rat_int(flat[m] as i64);
            let wn = rat_int(flat[n] as i64);
            let t1 = hq[m][n].scale_rat(&(w1.clone() * w1.clone()));
            let t2 = hq[m][0].scale_rat(&(w1.clone() * wn.clone()));
            let t3 = hq[0][n].scale_rat(&(wm.clone() * w1.clone()));
            let t4 = hq[0][0].scale_rat(&(wm * wn));
            row.push(t1.sub(&t2).sub(&t3).add(&t4));
        }
        hfixed.push(row);
    }
    for p in &pts {
        // exactness and canonical ordering on the stratum
        let mut ok = true;
        for m in 0..l {
            for n in m + 1..l {
                if blocks_of[m] != blocks_of[n] {
                    continue;
                }
                let zm = SparsePoly::var(zvars.clone(), &tower, m);
                let zn = SparsePoly::var(zvars.clone(), &tower, n);
                let s = crate::zerodim::sign_at_point(&zm.sub(&zn), p)?;
                if s == Sign::Zero {
                    ok = false; // lives on a coarser stratum
                    break;
                }
                if flat[m] == flat[n] && s != Sign::Pos {
                    ok = false; // not the canonical orbit representative
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        let cs = contribution_sign(&q_pi, p)?;
        if cs == Sign::Zero {
            return Err(Error::DegenerateHessian);
        }
        if cs != Sign::Neg {
            continue;
        }
        let tang = if l > 1 {
            negative_eigenvalue_count(&hfixed, p)?
        } else {
            0
        };
        let mut iso = 0usize;
        let mut verdict = true;
        for (j, &w) in flat.iter().enumerate() {
            if w < 2 {
                continue;
            }
            let d2 = isotypic_scalar_of_part(q_def, pi, j)?;
            let s = crate::zerodim::sign_at_point(&d2, p)?;
            match s {
                Sign::Zero => return Err(Error::DegenerateHessian),
                Sign::Neg => {
                    iso += w - 1;
                    verdict = false;
                }
                Sign::Pos => {}
            }
        }
        debug_assert_eq!(
            verdict,
            negative_eigenspace_in_fixed(q_def, pi, p)?
        );
        out.push((tang + iso, verdict));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Algorithm: χ of bounded symmetric algebraic sets
// ---------------------------------------------------------------------------

/// χ^gen and equivariant χ^gen of Zer(Σ parts_i², R^k) for a bounded zero
/// set: the primary structured entry point.
pub fn ep_bounded_sos(parts: &[SparsePoly], blocks: &BlockSpec) -> Result<EPResult> {
    let (res, _) = ep_bounded_inner(parts, blocks, false)?;
    Ok(res)
}

/// χ of Zer(P) for non-negative symmetric P with bounded zero set. Inputs
/// with a recognizable sum-of-squares structure use the structured engine;
/// other inputs go through the deformed-tower route (practical at small
/// sizes).
pub fn ep_bounded(p: &SparsePoly, blocks: &BlockSpec) -> Result<EPResult> {
    check_symmetry(p, blocks)?;
    if p.is_zero() {
        return Err(Error::PreconditionViolated(
            "the zero polynomial has unbounded zero set".into(),
        ));
    }
    if let Some(parts) = sos_split(p) {
        return ep_bounded_sos(&parts, blocks);
    }
    spot_check_nonnegative(p)?;
    ep_bounded_general(p, blocks)
}

/// Parts with the same real zero set as P and Σ parts² non-negative, when a
/// structure is syntactically evident: a perfect square, or a positive
/// combination of even monomials (whose common zeros are the monomial
/// zeros).
pub fn sos_split(p: &SparsePoly) -> Option<Vec<SparsePoly>> {
    if p.is_zero() {
        return None;
    }
    if let Some(a) = poly_sqrt(p) {
        return Some(vec![a]);
    }
    let tower = p.tower().clone();
    let mut parts = Vec::new();
    for (e, c) in p.terms() {
        if e.iter().any(|&x| x % 2 != 0) {
            return None;
        }
        let r = c.is_rational()?;
        if !num_traits::Signed::is_positive(&r) {
            return None;
        }
        let half: Vec<u32> = e.iter().map(|&x| x / 2).collect();
        parts.push(SparsePoly::from_terms(
            p.vars().clone(),
            &tower,
            vec![(half, FieldTowerElement::one(&tower))],
        ));
    }
    Some(parts)
}

fn pad_parts(
    parts: &[SparsePoly],
    blocks: &BlockSpec,
) -> (Vec<SparsePoly>, BlockSpec) {
    let tower = parts[0].tower().clone();
    let k = blocks.k();
    let mut names = (**parts[0].vars()).clone();
    names.push(format!("Xpad{}", k + 1));
    let wide: Arc<Vec<String>> = Arc::new(names);
    let mut out: Vec<SparsePoly> = parts.iter().map(|p| p.widen_vars(wide.clone())).collect();
    out.push(SparsePoly::var(wide.clone(), &tower, k));
    (out, blocks.with_singleton())
}

fn ep_bounded_inner(
    parts: &[SparsePoly],
    blocks: &BlockSpec,
    want_report: bool,
) -> Result<(EPResult, Vec<MorseRow>)> {
    let mut parts: Vec<SparsePoly> = parts.iter().filter(|p| !p.is_zero()).cloned().collect();
    if parts.is_empty() {
        return Err(Error::PreconditionViolated(
            "the zero polynomial has unbounded zero set".into(),
        ));
    }
    for p in &parts {
        if p.nvars() != blocks.k() {
            return Err(Error::PreconditionViolated(
                "parts must be polynomials in the block variables".into(),
            ));
        }
    }
    check_family_symmetry(&parts, blocks)?;
    let d = 2 * parts.iter().map(|p| p.total_degree()).max().unwrap_or(1).max(1);
    let (dp, pad) = pick_deformation_degree(d, blocks.k());
    let mut blocks = blocks.clone();
    if pad {
        let (np, nb) = pad_parts(&parts, &blocks);
        parts = np;
        blocks = nb;
    }
    let budget = PartitionBudget::capped(&blocks, dp as usize);
    let mut chi: i64 = 0;
    let mut chieq: i64 = 0;
    let mut rows: Vec<(MorseRow, Arc<UnivariateRepresentation>, usize, i32)> = Vec::new();
    for pi in enumerate_partitions(&blocks, &budget) {
        let t0 = std::time::Instant::now();
        let data = sos_stratum(&parts, &pi, want_report)?;
        if std::env::var("SYMCHI_TRACE").is_ok() {
            eprintln!("stratum {} took {:?}", pi.render(), t0.elapsed());
        }
        let weight = orbit_weight(&pi);
        for (ind, verdict) in &data.counted {
            let s = if ind % 2 == 0 { 1 } else { -1 };
            chi += s * weight;
            if *verdict {
                chieq += s;
            }
        }
        rows.extend(data.report);
    }
    let report = if want_report {
        sort_report(rows)?
    } else {
        Vec::new()
    };
    Ok((
        EPResult {
            chi_gen: chi,
            chi_equivariant: chieq,
        },
        report,
    ))
}

/// Orders report rows by the critical value of the sum of the coordinates,
/// branches over the same limit point ordered counted-first.
fn sort_report(
    mut rows: Vec<(MorseRow, Arc<UnivariateRepresentation>, usize, i32)>,
) -> Result<Vec<MorseRow>> {
    use std::cmp::Ordering;
    // value function per row: Σ over original coordinates of the point; the
    // representation's coordinates are collapsed, so weight by part sizes —
    // encoded in the expanded gs of the witness representation. Here the reps
    // come from collapsed strata, so recover weights from the row's partition
    // string is fragile; instead compare by the stored numerators Σ w g_m.
    // The builder stores the weighted-sum polynomials in rep.gs order, so we
    // recompute from the partition sizes parsed out of the render.
    let weights_of = |pi: &str| -> Vec<i64> {
        pi.split('x')
            .flat_map(|b| {
                b.trim_matches(|c| c == '(' || c == ')')
                    .split(',')
                    .map(|x| x.parse::<i64>().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let value_fn = |row: &(MorseRow, Arc<UnivariateRepresentation>, usize, i32)| -> (UniPoly<FieldTowerElement>, UniPoly<FieldTowerElement>) {
        let rep = &row.1;
        let w = weights_of(&row.0.partition);
        let tower = &rep.tower;
        let mut num = UniPoly::new(vec![FieldTowerElement::zero(tower)]);
        for (m, g) in rep.gs.iter().enumerate() {
            if m < w.len() {
                num = num.add(&g.scale(&FieldTowerElement::from_int(tower, w[m])));
            }
        }
        (num, rep.g0.clone())
    };
    let mut err: Option<Error> = None;
    rows.sort_by(|a, b| {
        if err.is_some() {
            return Ordering::Equal;
        }
        let (na, da) = value_fn(a);
        let (nb, db) = value_fn(b);
        match compare_algebraic_values((&a.1, a.2, &na, &da), (&b.1, b.2, &nb, &db)) {
            Ok(Ordering::Equal) => a.3.cmp(&b.3),
            Ok(o) => o,
            Err(e) => {
                err = Some(e);
                Ordering::Equal
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(rows.into_iter().map(|r| r.0).collect())
}

/// Full per-branch Morse rows (sorted by critical value) together with the
/// characteristic pair, for structured bounded inputs.
pub fn ep_bounded_sos_report(
    parts: &[SparsePoly],
    blocks: &BlockSpec,
) -> Result<(EPResult, Vec<MorseRow>)> {
    ep_bounded_inner(parts, blocks, true)
}

/// The deformed-tower route for inputs without a recognized sum-of-squares
/// structure: collapse, solve the critical system over R⟨ζ⟩, discard points
/// that are unbounded over the base, and read the Morse data at the deformed
/// points.
fn ep_bounded_general(p: &SparsePoly, blocks: &BlockSpec) -> Result<EPResult> {
    let d = p.total_degree().max(1);
    let (dp, pad) = pick_deformation_degree(d, blocks.k());
    let mut blocks = blocks.clone();
    let mut p = p.clone();
    if pad {
        let mut names = (**p.vars()).clone();
        let k = blocks.k();
        names.push(format!("Xpad{}", k + 1));
        let wide: Arc<Vec<String>> = Arc::new(names);
        let xpad = SparsePoly::var(wide.clone(), p.tower(), k);
        p = p.widen_vars(wide).add(&xpad.pow(2));
        blocks = blocks.with_singleton();
    }
    let zeta = fresh_symbol(p.tower(), "zeta");
    let tz = p.tower().extend(&zeta)?;
    let q = deform(&p.lift_tower(&tz)?, dp, &zeta)?;
    let budget = PartitionBudget::capped(&blocks, dp as usize);
    let mut chi = 0i64;
    let mut chieq = 0i64;
    for pi in enumerate_partitions(&blocks, &budget) {
        let weight = orbit_weight(&pi);
        for (ind, verdict) in general_stratum(&q, &pi, &zeta)? {
            let s = if ind % 2 == 0 { 1 } else { -1 };
            chi += s * weight;
            if verdict {
                chieq += s;
            }
        }
    }
    Ok(EPResult {
        chi_gen: chi,
        chi_equivariant: chieq,
    })
}

// ---------------------------------------------------------------------------
// Algorithm: χ of general symmetric algebraic sets
// ---------------------------------------------------------------------------

/// χ of the (possibly unbounded) zero set of the sum of squares of `parts`,
/// via the large-sphere double cover: ½(χ⁽¹⁾ − χ⁽²⁾) componentwise.
pub fn ep_algebraic_sos(parts: &[SparsePoly], blocks: &BlockSpec) -> Result<EPResult> {
    let parts: Vec<SparsePoly> = parts.iter().filter(|p| !p.is_zero()).cloned().collect();
    let tower0 = match parts.first() {
        Some(p) => p.tower().clone(),
        None => {
            return Err(Error::PreconditionViolated(
                "whole-space zero sets are unbounded; cannot take χ of Zer(0)".into(),
            ))
        }
    };
    let omega = fresh_symbol(&tower0, "w");
    let tower = tower0.extend(&omega)?;
    let wsym = FieldTowerElement::symbol(&tower, &omega)?;
    let k = blocks.k();
    // P2-parts: parts together with w² p₂ − 1 over the k variables
    let p2_parts: Vec<SparsePoly> = {
        let mut v: Vec<SparsePoly> = parts
            .iter()
            .map(|p| p.lift_tower(&tower))
            .collect::<Result<_>>()?;
        let vars = v[0].vars().clone();
        let sphere = newton_sum(vars.clone(), &tower, 2, k)
            .scale(&wsym.mul(&wsym))
            .sub(&SparsePoly::from_int(vars, &tower, 1));
        v.push(sphere);
        v
    };
    let chi2 = ep_bounded_sos(&p2_parts, blocks)?;
    // P1-parts: parts widened by X_{k+1}, sphere includes the new variable
    let blocks1 = blocks.with_singleton();
    let p1_parts: Vec<SparsePoly> = {
        let mut names = (**parts[0].vars()).clone();
        names.push(format!("X{}", k + 1));
        let wide: Arc<Vec<String>> = Arc::new(names);
        let mut v: Vec<SparsePoly> = parts
            .iter()
            .map(|p| Ok(p.lift_tower(&tower)?.widen_vars(wide.clone())))
            .collect::<Result<_>>()?;
        let sphere = newton_sum(wide.clone(), &tower, 2, k + 1)
            .scale(&wsym.mul(&wsym))
            .sub(&SparsePoly::from_int(wide, &tower, 1));
        v.push(sphere);
        v
    };
    let chi1 = ep_bounded_sos(&p1_parts, &blocks1)?;
    let num = chi1.chi_gen - chi2.chi_gen;
    let numeq = chi1.chi_equivariant - chi2.chi_equivariant;
    if num % 2 != 0 || numeq % 2 != 0 {
        return Err(Error::Internal("odd double-cover difference".into()));
    }
    Ok(EPResult {
        chi_gen: num / 2,
        chi_equivariant: numeq / 2,
    })
}

/// χ^gen(Zer(P, R^k)) and the equivariant value for any block-symmetric P.
pub fn ep_algebraic(p: &SparsePoly, blocks: &BlockSpec) -> Result<EPResult> {
    check_symmetry(p, blocks)?;
    if p.is_zero() {
        return Err(Error::PreconditionViolated(
            "χ^gen(R^k) is (−1)^k; the zero polynomial is excluded".into(),
        ));
    }
    if p.nvars() != blocks.k() {
        return Err(Error::PreconditionViolated(
            "polynomial must live in the block variables".into(),
        ));
    }
    match sos_split(p) {
        Some(parts) => ep_algebraic_sos(&parts, blocks),
        None => ep_algebraic_sos(std::slice::from_ref(p), blocks),
    }
}

// ---------------------------------------------------------------------------
// Algorithm: Euler-Poincaré query
// ---------------------------------------------------------------------------

/// EQ(P, Zer(Q)) = χ^gen(P>0 on Z) − χ^gen(P<0 on Z) and its equivariant
/// counterpart, via double covers over the levels P = ±μ for a fresh
/// infinitesimal μ. Shifting by μ keeps the covers nonsingular even when P
/// has repeated factors (μ is not a critical value of P on Z), and by
/// additivity the half-open collar {0 < P ≤ μ} has χ^gen = 0, so
/// χ^gen(P > 0 on Z) = χ^gen(P > μ on Z) = ½(χ(Zer(Q, P−μ−X²)) − χ(Zer(Q, P−μ))).
pub fn ep_query(p: &SparsePoly, qpoly: &SparsePoly, blocks: &BlockSpec) -> Result<(i64, i64)> {
    check_symmetry(p, blocks)?;
    check_symmetry(qpoly, blocks)?;
    let mu_name = fresh_symbol(p.tower(), "mu");
    let tower = p.tower().extend(&mu_name)?;
    let mu = FieldTowerElement::symbol(&tower, &mu_name)?;
    let k = blocks.k();
    let mut names = (**p.vars()).clone();
    names.push(format!("X{}", k + 1));
    let wide: Arc<Vec<String>> = Arc::new(names);
    let blocks1 = blocks.with_singleton();
    let x = SparsePoly::var(wide.clone(), &tower, k);
    let pw = p.lift_tower(&tower)?.widen_vars(wide.clone());
    let qw = qpoly.lift_tower(&tower)?.widen_vars(wide.clone());
    let qn = qpoly.lift_tower(&tower)?;
    let pn = p.lift_tower(&tower)?;
    let muk = SparsePoly::constant(pn.vars().clone(), mu.clone());
    let muk1 = SparsePoly::constant(wide.clone(), mu.clone());
    let with_q = |base: &SparsePoly, q: &SparsePoly| -> Vec<SparsePoly> {
        let mut v = Vec::new();
        if !q.is_zero() {
            v.push(q.clone());
        }
        v.push(base.clone());
        v
    };
    // χ of the side {P > μ}: half of (cover minus level)
    let cover_plus = ep_algebraic_sos(&with_q(&pw.sub(&muk1).sub(&x.pow(2)), &qw), &blocks1)?;
    let level_plus = ep_algebraic_sos(&with_q(&pn.sub(&muk), &qn), blocks)?;
    // χ of the side {P < −μ}
    let cover_minus = ep_algebraic_sos(&with_q(&pw.add(&muk1).add(&x.pow(2)), &qw), &blocks1)?;
    let level_minus = ep_algebraic_sos(&with_q(&pn.add(&muk), &qn), blocks)?;
    let twice = (cover_plus.chi_gen - level_plus.chi_gen)
        - (cover_minus.chi_gen - level_minus.chi_gen);
    let twice_eq = (cover_plus.chi_equivariant - level_plus.chi_equivariant)
        - (cover_minus.chi_equivariant - level_minus.chi_equivariant);
    if twice % 2 != 0 || twice_eq % 2 != 0 {
        return Err(Error::Internal("odd query difference".into()));
    }
    Ok((twice / 2, twice_eq / 2))
}

// ---------------------------------------------------------------------------
// Algorithm: realizable sign conditions
// ---------------------------------------------------------------------------

/// A realizable sign condition together with a witness point.
#[derive(Clone, Debug)]
pub struct RealizedCondition {
    pub signs: Vec<Sign>,
    pub witness: RealAlgebraicPoint,
}

/// SIGN(𝒫) with witnesses, for a family of block-symmetric polynomials.
pub fn realizable_sign_conditions(
    family: &[SparsePoly],
    blocks: &BlockSpec,
) -> Result<Vec<RealizedCondition>> {
    for p in family {
        check_symmetry(p, blocks)?;
    }
    if family.is_empty() {
        return Err(Error::PreconditionViolated("empty family".into()));
    }
    let s = family.len();
    let k = blocks.k();
    let d = family
        .iter()
        .map(|p| p.total_degree())
        .max()
        .unwrap_or(1)
        .max(1) as usize;
    let dprime: usize = blocks.sizes().iter().map(|&ki| ki.min(d)).sum();
    let base = family[0].tower().clone();
    // tower: ε ≫ δ_1 ≫ … ≫ δ_s ≫ γ
    let mut tower = base.extend(&fresh_symbol(&base, "eps"))?;
    let eps_name = tower.last().unwrap().to_string();
    let mut delta_names = Vec::with_capacity(s);
    for _ in 0..s {
        let n = fresh_symbol(&tower, "delta");
        tower = tower.extend(&n)?;
        delta_names.push(n);
    }
    let gamma_name = fresh_symbol(&tower, "gamma");
    tower = tower.extend(&gamma_name)?;
    let eps = FieldTowerElement::symbol(&tower, &eps_name)?;
    let gamma = FieldTowerElement::symbol(&tower, &gamma_name)?;
    let lifted: Vec<SparsePoly> = family
        .iter()
        .map(|p| p.lift_tower(&tower))
        .collect::<Result<_>>()?;
    let vars = lifted[0].vars().clone();
    let one = SparsePoly::from_int(vars.clone(), &tower, 1);
    let sphere_trap = newton_sum(vars.clone(), &tower, 2, k)
        .scale(&eps)
        .sub(&one);
    let budget = PartitionBudget::capped(blocks, 4 * d);
    let partitions = enumerate_partitions(blocks, &budget);

    let mut found: Vec<RealizedCondition> = Vec::new();
    let mut record = |signs: Vec<Sign>, witness: RealAlgebraicPoint| {
        if !found.iter().any(|r| r.signs == signs) {
            found.push(RealizedCondition { signs, witness });
        }
    };

    // perturbation choices per selected polynomial: ±δ_i and ±γδ_i
    let choices = [(1i64, false), (-1, false), (1, true), (-1, true)];
    for subset in all_subsets(s, dprime) {
        let nchoice = choices.len().pow(subset.len() as u32);
        for mask in 0..nchoice {
            let mut parts: Vec<SparsePoly> = Vec::new();
            let mut m = mask;
            for &i in &subset {
                let (sgn, with_gamma) = choices[m % choices.len()];
                m /= choices.len();
                let delta = FieldTowerElement::symbol(&tower, &delta_names[i])?;
                let mut shift = delta.scale_rat(&rat_int(sgn));
                if with_gamma {
                    shift = shift.mul(&gamma);
                }
                parts.push(lifted[i].sub(&SparsePoly::constant(vars.clone(), shift)));
            }
            for with_trap in [false, true] {
                let mut ps = parts.clone();
                if with_trap {
                    ps.push(sphere_trap.clone());
                }
                if ps.is_empty() {
                    continue;
                }
                for pi in &partitions {
                    let samples = sample_stratum(&ps, pi)?;
                    if samples.is_empty() {
                        continue;
                    }
                    // γ-limits of bounded samples are genuine witness points
                    let limited = limit_bounded_points(&samples, &gamma_name)?;
                    for w in &limited {
                        let collapsed_family: Vec<SparsePoly> = family
                            .iter()
                            .map(|p| {
                                collapse(&p.lift_tower(&w.rep.tower)?, pi)
                            })
                            .collect::<Result<_>>()?;
                        let refs: Vec<&SparsePoly> = collapsed_family.iter().collect();
                        let rows = w.rep.signs_of(&refs)?;
                        let signs = rows[w.root_index].clone();
                        record(signs, expand_witness(w, pi)?);
                    }
                }
            }
        }
    }
    found.sort_by_key(|r| r.signs.iter().map(|s| sign_order_key(*s)).collect::<Vec<_>>());
    Ok(found)
}

/// Samples the stratum of the variety of the parts: the limit critical
/// points of the coordinate-sum on the deformation tube, which meet every
/// bounded connected component. All real solutions of the limit system are
/// genuine points of the variety and are kept.
fn sample_stratum(parts: &[SparsePoly], pi: &BlockPartition) -> Result<Vec<RealAlgebraicPoint>> {
    let tower = parts[0].tower().clone();
    let mut a_pi: Vec<SparsePoly> = Vec::new();
    for p in parts {
        let c = collapse(p, pi)?;
        if !c.is_zero() {
            a_pi.push(c);
        }
    }
    if a_pi.is_empty() {
        return Ok(Vec::new());
    }
    if a_pi
        .iter()
        .any(|p| p.constant_value().map(|c| !c.is_zero()).unwrap_or(false))
    {
        return Ok(Vec::new());
    }
    let c = a_pi.len();
    let l = pi.length();
    let zvars = a_pi[0].vars().clone();
    let weights = pi.flat_parts();
    let jac: Vec<Vec<SparsePoly>> = a_pi
        .iter()
        .map(|p| (0..l).map(|m| p.partial_derivative(m)).collect())
        .collect();
    let mut system = a_pi.clone();
    if c < l {
        let wvec: Vec<SparsePoly> = weights
            .iter()
            .map(|&w| SparsePoly::from_int(zvars.clone(), &tower, w as i64))
            .collect();
        for rows in combinations(l, c + 1) {
            let mat: Vec<Vec<SparsePoly>> = rows
                .iter()
                .map(|&r| {
                    let mut row: Vec<SparsePoly> = (0..c).map(|i| jac[i][r].clone()).collect();
                    row.push(wvec[r].clone());
                    row
                })
                .collect();
            let det = det_sparse(&mat);
            if !det.is_zero() {
                system.push(det);
            }
        }
    }
    match exact_solve(&system) {
        Ok(pts) => Ok(pts),
        Err(Error::NotZeroDimensional) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Expands a collapsed witness into the full variable space: coordinates are
/// repeated per part.
fn expand_witness(p: &RealAlgebraicPoint, pi: &BlockPartition) -> Result<RealAlgebraicPoint> {
    let ranges = pi.part_var_ranges();
    let k = pi.blocks().k();
    let mut gs = vec![p.rep.g0.clone(); k];
    for (m, range) in ranges.iter().enumerate() {
        for v in range.clone() {
            gs[v] = p.rep.gs[m].clone();
        }
    }
    let rep = Arc::new(UnivariateRepresentation {
        tower: p.rep.tower.clone(),
        f: p.rep.f.clone(),
        g0: p.rep.g0.clone(),
        gs,
    });
    Ok(RealAlgebraicPoint {
        rep,
        root_index: p.root_index,
        thom: p.thom.clone(),
    })
}

fn all_subsets(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for size in 1..=max_size.min(n) {
        out.extend(combinations(n, size));
    }
    out
}

fn sign_order_key(s: Sign) -> u8 {
    // the paper's lexicographic order on signs: 0 ≺ 1 ≺ −1
    match s {
        Sign::Zero => 0,
        Sign::Pos => 1,
        Sign::Neg => 2,
    }
}

// ---------------------------------------------------------------------------
// Algorithm: χ of sign conditions, and semi-algebraic aggregation
// ---------------------------------------------------------------------------

/// χ^gen(σ) and the equivariant value for every realizable sign condition of
/// the family, by inverting the adapted sign matrix against Euler-Poincaré
/// queries of the products 𝒫^α over R^k.
pub fn ep_sign_conditions(
    family: &[SparsePoly],
    blocks: &BlockSpec,
) -> Result<Vec<(Vec<Sign>, EPResult)>> {
    let realized = realizable_sign_conditions(family, blocks)?;
    if realized.is_empty() {
        return Ok(Vec::new());
    }
    let sigma: Vec<Vec<Sign>> = realized.iter().map(|r| r.signs.clone()).collect();
    let adapted = crate::realroots::adapted_matrix(&sigma)?;
    let zero = SparsePoly::zero(family[0].vars().clone(), family[0].tower());
    let mut eq = Vec::with_capacity(adapted.exponents.len());
    let mut eqe = Vec::with_capacity(adapted.exponents.len());
    for alpha in &adapted.exponents {
        let mut prod = SparsePoly::from_int(family[0].vars().clone(), family[0].tower(), 1);
        for (i, &e) in alpha.iter().enumerate() {
            for _ in 0..e {
                prod = prod.mul(&family[i]);
            }
        }
        let (q, qe) = ep_query(&prod, &zero, blocks)?;
        eq.push(Rat::from_integer(q.into()));
        eqe.push(Rat::from_integer(qe.into()));
    }
    let chi = crate::realroots::solve_integer_system(&adapted.entries, &eq)?;
    let chieq = crate::realroots::solve_integer_system(&adapted.entries, &eqe)?;
    let mut out = Vec::with_capacity(sigma.len());
    for (j, s) in sigma.into_iter().enumerate() {
        let a = &chi[j];
        let b = &chieq[j];
        if !a.is_integer() || !b.is_integer() {
            return Err(Error::Internal("non-integral χ from the linear system".into()));
        }
        out.push((
            s,
            EPResult {
                chi_gen: i64::try_from(a.to_integer()).map_err(|_| Error::Internal("χ overflow".into()))?,
                chi_equivariant: i64::try_from(b.to_integer())
                    .map_err(|_| Error::Internal("χ overflow".into()))?,
            },
        ));
    }
    Ok(out)
}

/// χ of a union of sign conditions: sums the per-condition values over the
/// realizable conditions contained in the union.
pub fn ep_semialgebraic(input: &SemiAlgebraicInput) -> Result<EPResult> {
    let per_sigma = ep_sign_conditions(&input.family, &input.blocks)?;
    let mut total = EPResult::zero();
    for (sigma, val) in &per_sigma {
        if input.conditions.iter().any(|c| c == sigma) {
            total.chi_gen += val.chi_gen;
            total.chi_equivariant += val.chi_equivariant;
        }
    }
    Ok(total)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> InfinitesimalTower {
        InfinitesimalTower::rationals()
    }

    fn xvars(k: usize) -> Arc<Vec<String>> {
        Arc::new((1..=k).map(|i| format!("X{i}")).collect())
    }

    #[test]
    fn bounded_single_point() {
        // P = X1² + X2²: the origin: (1, 1)
        let tw = q();
        let v = xvars(2);
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        let b = BlockSpec::new(vec![2]).unwrap();
        // as a permuted family of parts
        let res = ep_bounded_sos(&[x1.clone(), x2.clone()], &b).unwrap();
        assert_eq!(res, EPResult { chi_gen: 1, chi_equivariant: 1 });
        // and through the public entry with structure recognition
        let res = ep_bounded(&x1.pow(2).add(&x2.pow(2)), &b).unwrap();
        assert_eq!(res, EPResult { chi_gen: 1, chi_equivariant: 1 });
    }

    #[test]
    fn bounded_four_points() {
        // P = (X1²−1)² + (X2²−1)²: the four vertices (±1, ±1): (4, 3)
        let tw = q();
        let v = xvars(2);
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let a1 = SparsePoly::var(v.clone(), &tw, 0).pow(2).sub(&one);
        let a2 = SparsePoly::var(v.clone(), &tw, 1).pow(2).sub(&one);
        let b = BlockSpec::new(vec![2]).unwrap();
        let res = ep_bounded_sos(&[a1, a2], &b).unwrap();
        assert_eq!(res, EPResult { chi_gen: 4, chi_equivariant: 3 });
    }

    #[test]
    fn bounded_circle() {
        // P = (p2 − 1)²: the unit circle: χ = 0, quotient is an arc: 1
        let tw = q();
        let v = xvars(2);
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let p2 = SparsePoly::var(v.clone(), &tw, 0)
            .pow(2)
            .add(&SparsePoly::var(v.clone(), &tw, 1).pow(2));
        let b = BlockSpec::new(vec![2]).unwrap();
        let res = ep_bounded_sos(&[p2.sub(&one)], &b).unwrap();
        assert_eq!(res, EPResult { chi_gen: 0, chi_equivariant: 1 });
    }

    #[test]
    fn bounded_general_path_matches_on_small_input() {
        // general path on (X1² − 1)² (k = 1): two points
        let tw = q();
        let v = xvars(1);
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let a = SparsePoly::var(v.clone(), &tw, 0).pow(2).sub(&one);
        let b = BlockSpec::new(vec![1]).unwrap();
        let p = a.mul(&a);
        let fast = ep_bounded_sos(&[a.clone()], &b).unwrap();
        let gen = ep_bounded_general(&p, &b).unwrap();
        assert_eq!(fast, EPResult { chi_gen: 2, chi_equivariant: 2 });
        assert_eq!(gen, fast);
    }

    #[test]
    fn algebraic_empty_line_sphere() {
        let tw = q();
        // empty: p2 + 1
        let v = xvars(2);
        let p2 = SparsePoly::var(v.clone(), &tw, 0)
            .pow(2)
            .add(&SparsePoly::var(v.clone(), &tw, 1).pow(2));
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let b2 = BlockSpec::new(vec![2]).unwrap();
        let res = ep_algebraic(&p2.add(&one), &b2).unwrap();
        assert_eq!(res, EPResult { chi_gen: 0, chi_equivariant: 0 });
        // a line: X1 + X2 = 0: χ = −1; quotient is a closed ray: 0
        let x1 = SparsePoly::var(v.clone(), &tw, 0);
        let x2 = SparsePoly::var(v.clone(), &tw, 1);
        let res = ep_algebraic(&x1.add(&x2), &b2).unwrap();
        assert_eq!(res, EPResult { chi_gen: -1, chi_equivariant: 0 });
    }

    #[test]
    fn algebraic_sphere_k3() {
        let tw = q();
        let v = xvars(3);
        let mut p2 = SparsePoly::zero(v.clone(), &tw);
        for i in 0..3 {
            p2 = p2.add(&SparsePoly::var(v.clone(), &tw, i).pow(2));
        }
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let b = BlockSpec::new(vec![3]).unwrap();
        let res = ep_algebraic(&p2.sub(&one), &b).unwrap();
        assert_eq!(res, EPResult { chi_gen: 2, chi_equivariant: 1 });
    }

    #[test]
    fn query_identities() {
        let tw = q();
        let v = xvars(2);
        let p2 = SparsePoly::var(v.clone(), &tw, 0)
            .pow(2)
            .add(&SparsePoly::var(v.clone(), &tw, 1).pow(2));
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let b = BlockSpec::new(vec![2]).unwrap();
        // P = 1 + p1², Z = {p2 = 0} = origin: EQ = 1
        let p1 = SparsePoly::var(v.clone(), &tw, 0).add(&SparsePoly::var(v.clone(), &tw, 1));
        let p = one.add(&p1.pow(2));
        let (eq, eqe) = ep_query(&p, &p2, &b).unwrap();
        assert_eq!((eq, eqe), (1, 1));
        let (eqm, eqme) = ep_query(&p.neg(), &p2, &b).unwrap();
        assert_eq!((eqm, eqme), (-1, -1));
    }

    #[test]
    fn signs_univariate() {
        // 𝒫 = {X1 + X2} on blocks (2): signs {−1, 0, +1}
        let tw = q();
        let v = xvars(2);
        let p1 = SparsePoly::var(v.clone(), &tw, 0).add(&SparsePoly::var(v.clone(), &tw, 1));
        let b = BlockSpec::new(vec![2]).unwrap();
        let rows = realizable_sign_conditions(&[p1], &b).unwrap();
        let signs: Vec<Vec<Sign>> = rows.iter().map(|r| r.signs.clone()).collect();
        assert_eq!(signs.len(), 3);
        assert!(signs.contains(&vec![Sign::Neg]));
        assert!(signs.contains(&vec![Sign::Zero]));
        assert!(signs.contains(&vec![Sign::Pos]));
    }

    #[test]
    fn signs_nonnegative_family() {
        let tw = q();
        let v = xvars(2);
        let p2 = SparsePoly::var(v.clone(), &tw, 0)
            .pow(2)
            .add(&SparsePoly::var(v.clone(), &tw, 1).pow(2));
        let b = BlockSpec::new(vec![2]).unwrap();
        let rows = realizable_sign_conditions(&[p2.clone()], &b).unwrap();
        let signs: Vec<Vec<Sign>> = rows.iter().map(|r| r.signs.clone()).collect();
        assert_eq!(signs.len(), 2);
        assert!(signs.contains(&vec![Sign::Zero]));
        assert!(signs.contains(&vec![Sign::Pos]));
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let rows = realizable_sign_conditions(&[p2.add(&one)], &b).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].signs, vec![Sign::Pos]);
    }
}
