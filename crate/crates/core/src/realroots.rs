//! Exact univariate real algebra over the tower: signed remainder sequences,
//! Tarski queries, sign determination of polynomial families at the real
//! roots of f (with Thom encodings), and adapted-matrix construction.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalars::{FieldTowerElement, Rat, Sign};
use crate::window::{CResult, CoeffRing, Indet, WScalar};
use crate::{Error, Result};

/// Dense univariate polynomial over a coefficient ring.
#[derive(Clone, Debug)]
pub struct UniPoly<C> {
    /// coeffs[i] multiplies T^i; the top entry is nonzero once normalized.
    pub coeffs: Vec<C>,
}

impl<C: CoeffRing> UniPoly<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        UniPoly { coeffs }
    }

    pub fn zero_like(proto: &C) -> Self {
        UniPoly {
            coeffs: vec![proto.c_zero()],
        }
    }

    /// Removes provably-zero top coefficients; errors if a top coefficient's
    /// vanishing cannot be decided at the current precision.
    pub fn normalized(mut self) -> CResult<Self> {
        while self.coeffs.len() > 1 {
            let top = self.coeffs.last().unwrap();
            if top.c_is_zero()? {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.is_empty() {
            panic!("empty coefficient vector");
        }
        Ok(self)
    }

    pub fn is_zero(&self) -> CResult<bool> {
        for c in &self.coeffs {
            if !c.c_is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Degree of a normalized polynomial (zero polynomial has degree 0 here;
    /// use `is_zero` to distinguish).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn lc(&self) -> &C {
        self.coeffs.last().unwrap()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let proto = &self.coeffs[0];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| proto.c_zero());
            let b = other.coeffs.get(i).cloned().unwrap_or_else(|| proto.c_zero());
            out.push(a.c_add(&b));
        }
        UniPoly { coeffs: out }
    }

    pub fn neg(&self) -> Self {
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| c.c_neg()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let proto = &self.coeffs[0];
        let mut out = vec![proto.c_zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].c_add(&a.c_mul(b));
            }
        }
        UniPoly { coeffs: out }
    }

    pub fn scale(&self, c: &C) -> Self {
        UniPoly {
            coeffs: self.coeffs.iter().map(|a| a.c_mul(c)).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return UniPoly {
                coeffs: vec![self.coeffs[0].c_zero()],
            };
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        let one = self.coeffs[0].c_one();
        let mut k = one.c_zero();
        for c in self.coeffs.iter().skip(1) {
            k = k.c_add(&one);
            out.push(c.c_mul(&k));
        }
        UniPoly { coeffs: out }
    }

    pub fn eval(&self, x: &C) -> C {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.c_mul(x).c_add(c);
        }
        acc
    }

    /// Euclidean remainder of `self` by a normalized nonzero `d`, over the
    /// coefficient field.
    pub fn rem(&self, d: &Self) -> CResult<Self> {
        let mut r = self.clone().normalized()?;
        let dd = d.degree();
        let dlc = d.lc();
        while !r.is_zero()? {
            r = r.normalized()?;
            let rd = r.degree();
            if rd < dd || (rd == 0 && r.coeffs[0].c_is_zero()?) {
                break;
            }
            let q = r.lc().c_div(dlc)?;
            let shift = rd - dd;
            let mut sub = vec![r.coeffs[0].c_zero(); shift];
            for c in &d.coeffs {
                sub.push(c.c_mul(&q));
            }
            r = r.sub(&UniPoly { coeffs: sub });
            // the top term cancels exactly; drop it without a zero test
            r.coeffs.truncate(rd);
            if r.coeffs.is_empty() {
                r.coeffs.push(d.coeffs[0].c_zero());
            }
        }
        r.normalized()
    }

    /// `self` modulo d, by repeated subtraction (alias of rem).
    pub fn reduce_mod(&self, d: &Self) -> CResult<Self> {
        if self.coeffs.len() <= d.degree() {
            return Ok(self.clone());
        }
        self.rem(d)
    }

    /// Divides every coefficient by the absolute value of the leading one
    /// (a positive unit), preserving all signs.
    fn sign_normalize(&self) -> CResult<Self> {
        let lc = self.lc();
        let s = lc.c_sign()?;
        if s == Sign::Zero {
            return Ok(self.clone());
        }
        let denom = if s == Sign::Neg { lc.c_neg() } else { lc.clone() };
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.c_div(&denom)?);
        }
        Ok(UniPoly { coeffs: out })
    }
}

impl UniPoly<FieldTowerElement> {
    pub fn constant_exact(c: FieldTowerElement) -> Self {
        UniPoly { coeffs: vec![c] }
    }

    pub fn to_windowed(&self, cap: usize) -> UniPoly<WScalar> {
        UniPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| WScalar::from_exact(c, cap))
                .collect(),
        }
    }
}

/// Number of sign changes in a sequence, zeros skipped.
fn variations(signs: &[Sign]) -> i64 {
    let mut count = 0;
    let mut last: Option<Sign> = None;
    for &s in signs {
        if s == Sign::Zero {
            continue;
        }
        if let Some(prev) = last {
            if prev != s {
                count += 1;
            }
        }
        last = Some(s);
    }
    count
}

/// Signed remainder sequence of (p, q), sign-normalized at each step.
fn signed_remainder_sequence<C: CoeffRing>(p: &UniPoly<C>, q: &UniPoly<C>) -> CResult<Vec<UniPoly<C>>> {
    let mut seq = Vec::new();
    let a = p.clone().normalized()?;
    if a.is_zero()? {
        return Ok(seq);
    }
    seq.push(a.sign_normalize()?);
    let b = q.clone().normalized()?;
    if b.is_zero()? {
        return Ok(seq);
    }
    seq.push(b.sign_normalize()?);
    loop {
        let n = seq.len();
        let r = seq[n - 2].rem(&seq[n - 1])?;
        if r.is_zero()? {
            break;
        }
        seq.push(r.neg().sign_normalize()?);
    }
    Ok(seq)
}

/// Tarski query over a generic coefficient ring: Σ over distinct real roots x
/// of f of sign(g(x)), via the signed remainder sequence of (f, f'·g).
fn tarski_query_generic<C: CoeffRing>(g: &UniPoly<C>, f: &UniPoly<C>) -> CResult<i64> {
    let f = f.clone().normalized()?;
    if f.is_zero()? {
        panic!("tarski query with zero f");
    }
    if f.degree() == 0 {
        return Ok(0);
    }
    let fg = f.derivative().mul(g);
    let fg = fg.reduce_mod(&f)?;
    let seq = signed_remainder_sequence(&f, &fg)?;
    let mut at_pos = Vec::with_capacity(seq.len());
    let mut at_neg = Vec::with_capacity(seq.len());
    for s in &seq {
        let lead = s.lc().c_sign()?;
        at_pos.push(lead);
        if s.degree() % 2 == 0 {
            at_neg.push(lead);
        } else {
            at_neg.push(lead.neg());
        }
    }
    Ok(variations(&at_neg) - variations(&at_pos))
}

const WINDOW_LADDER: [usize; 3] = [24, 96, 384];

/// Runs `body` with windowed arithmetic at increasing precision, falling back
/// to full exact arithmetic if every window is inconclusive.
fn with_escalation<T>(
    exact_inputs: &[&UniPoly<FieldTowerElement>],
    nsym: usize,
    body: impl Fn(&[UniPoly<WScalar>]) -> CResult<T>,
    exact_body: impl Fn() -> CResult<T>,
) -> T {
    if nsym > 0 {
        for cap in WINDOW_LADDER {
            let ws: Vec<UniPoly<WScalar>> =
                exact_inputs.iter().map(|p| p.to_windowed(cap)).collect();
            if let Ok(v) = body(&ws) {
                return v;
            }
        }
    }
    match exact_body() {
        Ok(v) => v,
        Err(Indet) => unreachable!("exact arithmetic cannot be indeterminate"),
    }
}

/// Σ over distinct real roots x of f of sign(g(x)).
pub fn tarski_query(g: &UniPoly<FieldTowerElement>, f: &UniPoly<FieldTowerElement>) -> i64 {
    let nsym = f
        .coeffs
        .first()
        .map(|c| c.tower().len())
        .unwrap_or(0);
    with_escalation(
        &[g, f],
        nsym,
        |ws| tarski_query_generic(&ws[0], &ws[1]),
        || tarski_query_generic(g, f),
    )
}

/// Number of distinct real roots of f.
pub fn count_real_roots(f: &UniPoly<FieldTowerElement>) -> i64 {
    let one = UniPoly::constant_exact(f.coeffs[0].c_one());
    tarski_query(&one, f)
}

/// Sign condition: one sign per polynomial of a family.
pub type SignCondition = Vec<Sign>;

/// Thom encoding data: signs of a prefix of the derivatives f', f'', …
/// (highest order first in `der_signs[i]` for derivative of order
/// `first_order - i`), enough to single out the root among the real roots
/// of f, plus the root's index in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThomEncoding {
    /// signs of f^{(j)} at the root for j = deg f - 1 down to `low_order`.
    pub der_signs: Vec<Sign>,
    pub low_order: usize,
    /// index of the root in ascending order among the real roots of f.
    pub root_index: usize,
}

/// Result row of a sign determination: one real root of f.
#[derive(Clone, Debug)]
pub struct RootSigns {
    pub thom: ThomEncoding,
    /// signs of the query polynomials at this root, in input order.
    pub signs: SignCondition,
}

struct SignDetState<C> {
    f: UniPoly<C>,
    /// adapted exponent rows over the processed polynomials
    adapted: Vec<Vec<u8>>,
    /// realized sign vectors over the processed polynomials, with counts
    conditions: Vec<(Vec<Sign>, i64)>,
    /// reduced-mod-f powers of each processed polynomial (p^1, p^2)
    powers: Vec<[UniPoly<C>; 2]>,
}

fn solve_rational_system(m: &[Vec<i64>], rhs: &[i64]) -> Option<Vec<BigRational>> {
    let n = rhs.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|&v| BigRational::from_integer(v.into())).collect())
        .collect();
    let mut b: Vec<BigRational> = rhs
        .iter()
        .map(|&v| BigRational::from_integer(v.into()))
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for j in col..n {
            a[col][j] = &a[col][j] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in col..n {
                    a[r][j] = &a[r][j] - &factor * &a[col][j];
                }
                b[r] = &b[r] - &factor * &b[col];
            }
        }
    }
    Some(b)
}

fn sign_pow(s: Sign, e: u8) -> i64 {
    match e {
        0 => 1,
        1 => s.as_i32() as i64,
        _ => (s.as_i32() as i64) * (s.as_i32() as i64),
    }
}

impl<C: CoeffRing> SignDetState<C> {
    fn new(f: UniPoly<C>, total_roots: i64) -> Self {
        SignDetState {
            f,
            adapted: vec![vec![]],
            conditions: vec![(vec![], total_roots)],
            powers: Vec::new(),
        }
    }

    fn query(&self, alpha: &[u8], extra: Option<(&UniPoly<C>, u8)>) -> CResult<i64> {
        let mut g = UniPoly::new(vec![self.f.coeffs[0].c_one()]);
        for (i, &e) in alpha.iter().enumerate() {
            if e > 0 {
                g = g.mul(&self.powers[i][(e - 1) as usize]).reduce_mod(&self.f)?;
            }
        }
        if let Some((p, e)) = extra {
            if e > 0 {
                for _ in 0..e {
                    g = g.mul(p).reduce_mod(&self.f)?;
                }
            }
        }
        tarski_query_generic(&g, &self.f)
    }

    /// Extends the determination by one more polynomial.
    fn extend(&mut self, p: &UniPoly<C>) -> CResult<()> {
        let p = p.reduce_mod(&self.f)?;
        let m = self.adapted.len();
        // queries TaQ(P^A · p^e) for e = 1, 2 (e = 0 gives the current counts)
        let mut taq: Vec<[i64; 3]> = Vec::with_capacity(m);
        for (i, alpha) in self.adapted.iter().enumerate() {
            let q0: i64 = self
                .conditions
                .iter()
                .map(|(sigma, c)| {
                    let v: i64 = sigma
                        .iter()
                        .zip(alpha.iter())
                        .map(|(s, e)| sign_pow(*s, *e))
                        .product();
                    v * c
                })
                .sum();
            let q1 = self.query(&self.adapted[i], Some((&p, 1)))?;
            let q2 = self.query(&self.adapted[i], Some((&p, 2)))?;
            taq.push([q0, q1, q2]);
        }
        // solve (M ⊗ V) x = taq for counts of (σ, s), s ∈ {0, 1, -1}
        let nm = 3 * m;
        let mut bigm: Vec<Vec<i64>> = vec![vec![0; nm]; nm];
        let mut rhs: Vec<i64> = vec![0; nm];
        let signs = [Sign::Zero, Sign::Pos, Sign::Neg];
        for (ai, alpha) in self.adapted.iter().enumerate() {
            for e in 0..3usize {
                let row = 3 * ai + e;
                rhs[row] = taq[ai][e];
                for (ci, (sigma, _)) in self.conditions.iter().enumerate() {
                    for (si, s) in signs.iter().enumerate() {
                        let col = 3 * ci + si;
                        let v: i64 = sigma
                            .iter()
                            .zip(alpha.iter())
                            .map(|(x, y)| sign_pow(*x, *y))
                            .product::<i64>()
                            * sign_pow(*s, e as u8);
                        bigm[row][col] = v;
                    }
                }
            }
        }
        let counts = solve_rational_system(&bigm, &rhs).expect("tensor matrix is invertible");
        // collect realized extensions
        let mut new_conditions: Vec<(Vec<Sign>, i64)> = Vec::new();
        for (ci, (sigma, _)) in self.conditions.iter().enumerate() {
            for (si, s) in signs.iter().enumerate() {
                let c = &counts[3 * ci + si];
                assert!(c.is_integer(), "non-integral root count");
                let c = c.to_integer();
                let c: i64 = i64::try_from(c).expect("count fits i64");
                assert!(c >= 0, "negative root count");
                if c > 0 {
                    let mut v = sigma.clone();
                    v.push(*s);
                    new_conditions.push((v, c));
                }
            }
        }
        // rebuild an adapted exponent list: greedy rank completion over the
        // candidate rows (old rows × {0,1,2}), preferring low exponents
        let ncols = new_conditions.len();
        let mut chosen: Vec<Vec<u8>> = Vec::with_capacity(ncols);
        let mut matrix: Vec<Vec<BigRational>> = Vec::new();
        'candidates: for e in 0..3u8 {
            for alpha in &self.adapted {
                let mut cand = alpha.clone();
                cand.push(e);
                let row: Vec<BigRational> = new_conditions
                    .iter()
                    .map(|(sigma, _)| {
                        let v: i64 = sigma
                            .iter()
                            .zip(cand.iter())
                            .map(|(s, x)| sign_pow(*s, *x))
                            .product();
                        BigRational::from_integer(v.into())
                    })
                    .collect();
                if rank_increases(&matrix, &row) {
                    matrix.push(row);
                    chosen.push(cand);
                    if chosen.len() == ncols {
                        break 'candidates;
                    }
                }
            }
        }
        assert_eq!(chosen.len(), ncols, "adapted completion failed");
        self.adapted = chosen;
        self.conditions = new_conditions;
        let p2 = p.mul(&p).reduce_mod(&self.f)?;
        self.powers.push([p, p2]);
        Ok(())
    }
}

/// Gaussian rank test: does `row` increase the row span of `rows`?
fn rank_increases(rows: &[Vec<BigRational>], row: &[BigRational]) -> bool {
    let mut r = row.to_vec();
    for base in rows {
        // eliminate using base's leading nonzero entry
        let lead = match base.iter().position(|x| !x.is_zero()) {
            Some(i) => i,
            None => continue,
        };
        if !r[lead].is_zero() {
            let factor = &r[lead] / &base[lead];
            for j in 0..r.len() {
                r[j] = &r[j] - &factor * &base[j];
            }
        }
    }
    r.iter().any(|x| !x.is_zero())
}

/// Puts rows into a self-consistent echelon-ish shape as they are added.
/// (rank_increases keeps the invariant by construction: each kept row is
/// reduced against the previous ones before the nonzero test.)
fn echelonize(rows: &mut Vec<Vec<BigRational>>) {
    let mut out: Vec<Vec<BigRational>> = Vec::new();
    for row in rows.iter() {
        let mut r = row.clone();
        for base in &out {
            let lead = base.iter().position(|x| !x.is_zero()).unwrap();
            if !r[lead].is_zero() {
                let factor = &r[lead] / &base[lead];
                for j in 0..r.len() {
                    r[j] = &r[j] - &factor * &base[j];
                }
            }
        }
        if r.iter().any(|x| !x.is_zero()) {
            out.push(r);
        }
    }
    *rows = out;
}

fn sign_determination_generic<C: CoeffRing>(
    f: &UniPoly<C>,
    queries: &[UniPoly<C>],
) -> CResult<Vec<(Vec<Sign>, Vec<Sign>)>> {
    let f = f.clone().normalized()?;
    let one = UniPoly::new(vec![f.coeffs[0].c_one()]);
    let total = tarski_query_generic(&one, &f)?;
    if total == 0 {
        return Ok(Vec::new());
    }
    let mut state = SignDetState::new(f.clone(), total);
    for q in queries {
        state.extend(q)?;
    }
    // refine with derivative signs, highest order first, until every root is
    // singled out (full derivative signs would be the complete Thom encoding)
    let n = f.degree();
    let mut ders: Vec<UniPoly<C>> = Vec::new();
    {
        let mut d = f.derivative();
        for _ in 1..n.max(1) {
            ders.push(d.clone());
            d = d.derivative();
        }
    }
    // ders[0] = f', ..., ders[n-2] = f^(n-1); process from the end.
    // Ordering the roots needs the derivative signs alone to separate them.
    let nq = queries.len();
    let separated = |conds: &[(Vec<Sign>, i64)]| -> bool {
        if conds.iter().any(|(_, c)| *c != 1) {
            return false;
        }
        let mut suffixes: Vec<&[Sign]> = conds.iter().map(|(s, _)| &s[nq..]).collect();
        suffixes.sort();
        suffixes.windows(2).all(|w| w[0] != w[1])
    };
    for d in ders.iter().rev() {
        if separated(&state.conditions) {
            break;
        }
        state.extend(d)?;
    }
    // order roots by the Thom comparison rule on the derivative block
    let mut rows: Vec<(Vec<Sign>, Vec<Sign>)> = state
        .conditions
        .iter()
        .map(|(sigma, c)| {
            assert_eq!(*c, 1, "unseparated roots after full refinement");
            let (qsigns, dsigns) = sigma.split_at(nq);
            (dsigns.to_vec(), qsigns.to_vec())
        })
        .collect();
    let lead_sign = f.lc().c_sign()?;
    rows.sort_by(|a, b| thom_cmp(&a.0, &b.0, n, lead_sign));
    Ok(rows)
}

/// Orders two roots from the signs of derivatives f^{(n-1)}, f^{(n-2)}, …
/// stored highest-first; `lead` is the sign of the leading coefficient,
/// giving the (constant) sign of f^{(n)}.
pub(crate) fn thom_cmp(a: &[Sign], b: &[Sign], _deg: usize, lead: Sign) -> std::cmp::Ordering {
    debug_assert_eq!(a.len(), b.len());
    // walk from the highest derivative down; the first disagreement decides,
    // oriented by the sign of the previous (higher) derivative at both roots
    let mut prev = lead;
    for i in 0..a.len() {
        if a[i] == b[i] {
            if a[i] != Sign::Zero {
                prev = a[i];
            }
            continue;
        }
        assert!(prev != Sign::Zero, "thom ordering hit a zero guide sign");
        let base = (a[i].as_i32()).cmp(&b[i].as_i32());
        return if prev == Sign::Pos { base } else { base.reverse() };
    }
    std::cmp::Ordering::Equal
}

/// Sign determination of the family `queries` at the real roots of f.
/// Returns one row per distinct real root, in ascending root order.
pub fn sign_determination(
    f: &UniPoly<FieldTowerElement>,
    queries: &[UniPoly<FieldTowerElement>],
) -> Result<Vec<RootSigns>> {
    let nsym = f.coeffs.first().map(|c| c.tower().len()).unwrap_or(0);
    let mut inputs: Vec<&UniPoly<FieldTowerElement>> = vec![f];
    inputs.extend(queries.iter());
    let rows = with_escalation(
        &inputs,
        nsym,
        |ws| sign_determination_generic(&ws[0], &ws[1..]),
        || sign_determination_generic(f, queries),
    );
    let deg = {
        // degree of the exact normalized f (cheap: exact zero tests)
        let fe = f.clone().normalized().unwrap();
        fe.degree()
    };
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, (dsigns, qsigns))| RootSigns {
            thom: ThomEncoding {
                low_order: deg.saturating_sub(dsigns.len()),
                der_signs: dsigns,
                root_index: i,
            },
            signs: qsigns,
        })
        .collect())
}

/// Signs of each query polynomial at the root of f selected by `root_index`.
pub fn signs_at_root(
    f: &UniPoly<FieldTowerElement>,
    root_index: usize,
    queries: &[UniPoly<FieldTowerElement>],
) -> Result<Vec<Sign>> {
    let rows = sign_determination(f, queries)?;
    rows.get(root_index)
        .map(|r| r.signs.clone())
        .ok_or_else(|| Error::Internal("root index out of range".into()))
}

/// Adapted exponent list and sign matrix for a duplicate-free list of sign
/// conditions, columns ordered by the input order of `sigma`.
pub struct SignMatrix {
    pub exponents: Vec<Vec<u8>>,
    pub entries: Vec<Vec<i64>>,
}

/// Builds an adapted exponent list A with Mat(A, Σ) invertible, by greedy
/// rank completion over {0,1,2}^P in lexicographic order.
pub fn adapted_matrix(sigma: &[SignCondition]) -> Result<SignMatrix> {
    if sigma.is_empty() {
        return Err(Error::PreconditionViolated("empty sign-condition list".into()));
    }
    let npolys = sigma[0].len();
    let n = sigma.len();
    let mut chosen: Vec<Vec<u8>> = Vec::new();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut cand = vec![0u8; npolys];
    loop {
        let row: Vec<BigRational> = sigma
            .iter()
            .map(|s| {
                let v: i64 = s
                    .iter()
                    .zip(cand.iter())
                    .map(|(x, e)| sign_pow(*x, *e))
                    .product();
                BigRational::from_integer(v.into())
            })
            .collect();
        if rank_increases(&rows, &row) {
            rows.push(row);
            echelonize(&mut rows);
            chosen.push(cand.clone());
            if chosen.len() == n {
                break;
            }
        }
        // next exponent vector in lexicographic order (leftmost fastest would
        // be colex; the adapted lists in use are small, order just needs to be
        // deterministic and start at 0)
        let mut i = npolys;
        loop {
            if i == 0 {
                return Err(Error::SingularMatrix);
            }
            i -= 1;
            if cand[i] < 2 {
                cand[i] += 1;
                for c in cand.iter_mut().skip(i + 1) {
                    *c = 0;
                }
                break;
            }
        }
    }
    let entries: Vec<Vec<i64>> = chosen
        .iter()
        .map(|alpha| {
            sigma
                .iter()
                .map(|s| {
                    s.iter()
                        .zip(alpha.iter())
                        .map(|(x, e)| sign_pow(*x, *e))
                        .product()
                })
                .collect()
        })
        .collect();
    Ok(SignMatrix {
        exponents: chosen,
        entries,
    })
}

/// Exact determinant of an integer matrix (for tests and invariants).
pub fn det_i64(m: &[Vec<i64>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
        .collect();
    let mut det = BigRational::one();
    for col in 0..n {
        let piv = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(p) => p,
            None => return BigRational::zero(),
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let factor = &a[r][col] / &p;
                for j in col..n {
                    a[r][j] = &a[r][j] - &factor * &a[col][j];
                }
            }
        }
    }
    det
}

/// Solves the integer linear system M x = rhs exactly; errors if singular.
pub fn solve_integer_system(m: &[Vec<i64>], rhs: &[BigRational]) -> Result<Vec<BigRational>> {
    let n = rhs.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|&v| BigRational::from_integer(v.into())).collect())
        .collect();
    let mut b: Vec<BigRational> = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::SingularMatrix)?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for j in col..n {
            a[col][j] = &a[col][j] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in col..n {
                    a[r][j] = &a[r][j] - &factor * &a[col][j];
                }
                b[r] = &b[r] - &factor * &b[col];
            }
        }
    }
    Ok(b)
}

/// Isolating intervals (a, b] with a < root ≤ b for all real roots of a
/// rational-coefficient polynomial, by Sturm bisection. Used as an
/// independent oracle.
pub fn isolate_rational_roots(coeffs: &[Rat]) -> Vec<(Rat, Rat)> {
    // build the classical Sturm chain over Q
    let trim = |v: &mut Vec<Rat>| {
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
    };
    let mut f = coeffs.to_vec();
    trim(&mut f);
    if f.len() <= 1 {
        return Vec::new();
    }
    let der: Vec<Rat> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Rat::from_integer(i.into()))
        .collect();
    let rem = |a: &[Rat], b: &[Rat]| -> Vec<Rat> {
        let mut r = a.to_vec();
        while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
            let q = r.last().unwrap() / b.last().unwrap();
            let shift = r.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                let idx = i + shift;
                let t = c * &q;
                r[idx] = &r[idx] - &t;
            }
            r.pop();
            trim(&mut r);
            if r.iter().all(|c| c.is_zero()) {
                return vec![Rat::zero()];
            }
        }
        r
    };
    let mut chain = vec![f.clone(), der];
    loop {
        let n = chain.len();
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if r.iter().all(|c| c.is_zero()) {
            break;
        }
        chain.push(r.iter().map(|c| -c).collect());
    }
    let var_at = |x: &Rat| -> i64 {
        let signs: Vec<Sign> = chain
            .iter()
            .map(|p| {
                let mut acc = Rat::zero();
                for c in p.iter().rev() {
                    acc = acc * x + c;
                }
                Sign::of_rat(&acc)
            })
            .collect();
        variations(&signs)
    };
    // Cauchy bound
    let lc = f.last().unwrap().clone();
    let mut bound = Rat::one();
    for c in &f[..f.len() - 1] {
        let t = (c / &lc).abs();
        if t > bound {
            bound = t;
        }
    }
    bound += Rat::one();
    let mut stack = vec![(-bound.clone(), bound.clone())];
    let mut out = Vec::new();
    while let Some((a, b)) = stack.pop() {
        let n = var_at(&a) - var_at(&b);
        if n <= 0 {
            continue;
        }
        if n == 1 {
            out.push((a, b));
            continue;
        }
        let mid = (&a + &b) / Rat::from_integer(2.into());
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{rat_int, InfinitesimalTower};

    fn q() -> InfinitesimalTower {
        InfinitesimalTower::rationals()
    }

    fn upoly(coeffs: &[i64]) -> UniPoly<FieldTowerElement> {
        let tw = q();
        UniPoly::new(
            coeffs
                .iter()
                .map(|&c| FieldTowerElement::from_int(&tw, c))
                .collect(),
        )
    }

    #[test]
    fn tarski_query_examples() {
        // g = 1, f = X^2 - 1 -> 2 (counts real roots)
        assert_eq!(tarski_query(&upoly(&[1]), &upoly(&[-1, 0, 1])), 2);
        // g = X, f = X^2 - 1 -> 0
        assert_eq!(tarski_query(&upoly(&[0, 1]), &upoly(&[-1, 0, 1])), 0);
        // g = X + 2, f = X^3 - X -> 3 (roots -1, 0, 1; g positive at all)
        assert_eq!(tarski_query(&upoly(&[2, 1]), &upoly(&[0, -1, 0, 1])), 3);
    }

    #[test]
    fn tarski_counts_distinct_roots_of_powers() {
        // f = (X-1)^2 has one distinct real root
        assert_eq!(count_real_roots(&upoly(&[1, -2, 1])), 1);
        assert_eq!(count_real_roots(&upoly(&[1, 0, 1])), 0);
        // multiplying by a positive quadratic changes nothing
        let f = upoly(&[-2, 0, 1]); // X^2 - 2
        let g = upoly(&[0, 1]);
        let fq = f.mul(&upoly(&[3, 0, 1])); // (X^2-2)(X^2+3)
        assert_eq!(tarski_query(&g, &f), tarski_query(&g, &fq));
    }

    #[test]
    fn sign_determination_examples() {
        // f = X^2 - 2, G = [X]: signs (-1) then (+1) in root order
        let rows = sign_determination(&upoly(&[-2, 0, 1]), &[upoly(&[0, 1])]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].signs, vec![Sign::Neg]);
        assert_eq!(rows[1].signs, vec![Sign::Pos]);
        assert_eq!(rows[0].thom.root_index, 0);

        // f = X, G = [X^2+1, X]: one root with signs (+1, 0)
        let rows = sign_determination(&upoly(&[0, 1]), &[upoly(&[1, 0, 1]), upoly(&[0, 1])]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].signs, vec![Sign::Pos, Sign::Zero]);

        // f = X^2 + 1: no real roots
        let rows = sign_determination(&upoly(&[1, 0, 1]), &[upoly(&[0, 1])]).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn sign_determination_orders_roots() {
        // f = X^3 - X: roots -1, 0, 1
        let f = upoly(&[0, -1, 0, 1]);
        let rows = sign_determination(&f, &[upoly(&[0, 1])]).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(
            rows.iter().map(|r| r.signs[0]).collect::<Vec<_>>(),
            vec![Sign::Neg, Sign::Zero, Sign::Pos]
        );
    }

    #[test]
    fn sign_determination_with_infinitesimal() {
        // f = X^2 - zeta: two roots ±sqrt(zeta); sign of X - 1 is negative at both
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let z = FieldTowerElement::symbol(&tw, "zeta").unwrap();
        let one = FieldTowerElement::one(&tw);
        let f = UniPoly::new(vec![z.neg(), FieldTowerElement::zero(&tw), one.clone()]);
        let g = UniPoly::new(vec![one.neg(), one.clone()]);
        let rows = sign_determination(&f, &[g]).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.signs[0] == Sign::Neg));
        // and X is negative at the first root, positive at the second
        let gx = UniPoly::new(vec![FieldTowerElement::zero(&tw), one.clone()]);
        let rows = sign_determination(&f, &[gx]).unwrap();
        assert_eq!(rows[0].signs[0], Sign::Neg);
        assert_eq!(rows[1].signs[0], Sign::Pos);
    }

    #[test]
    fn adapted_matrix_examples() {
        use Sign::*;
        // Σ = {0, 1, -1} on one polynomial
        let m = adapted_matrix(&[vec![Zero], vec![Pos], vec![Neg]]).unwrap();
        assert_eq!(m.exponents, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            m.entries,
            vec![vec![1, 1, 1], vec![0, 1, -1], vec![0, 1, 1]]
        );
        assert_eq!(det_i64(&m.entries), BigRational::from_integer(2.into()));

        let m = adapted_matrix(&[vec![Pos]]).unwrap();
        assert_eq!(m.exponents, vec![vec![0]]);
        assert_eq!(m.entries, vec![vec![1]]);

        let m = adapted_matrix(&[vec![Zero], vec![Pos]]).unwrap();
        assert_eq!(m.exponents, vec![vec![0], vec![1]]);
        assert_eq!(m.entries, vec![vec![1, 1], vec![0, 1]]);
        assert!(!det_i64(&m.entries).is_zero());
    }

    #[test]
    fn isolation_cross_check() {
        // X^3 - X: three roots; count matches the Tarski query
        let f = vec![rat_int(0), rat_int(-1), rat_int(0), rat_int(1)];
        let iv = isolate_rational_roots(&f);
        assert_eq!(iv.len() as i64, count_real_roots(&upoly(&[0, -1, 0, 1])));
    }
}
