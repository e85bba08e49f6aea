//! Zero-dimensional solving into real univariate representations, limits of
//! bounded points, polynomial sign evaluation at represented points, and
//! symmetric-matrix eigenvalue sign counting over the quotient ring D[T]/(f).

use std::sync::Arc;

use crate::polys::SparsePoly;
use crate::realroots::{sign_determination, ThomEncoding, UniPoly};
use crate::scalars::{FieldTowerElement, InfinitesimalTower, Rat, Sign};
use crate::window::CoeffRing;
use crate::{Error, Result};

type F = FieldTowerElement;

// ---------------------------------------------------------------------------
// multivariate elimination: pseudo-division, subresultants, resultants
// ---------------------------------------------------------------------------

/// Coefficients of `p` as a dense polynomial in variable `v`; each coefficient
/// is a SparsePoly with zero exponent in `v`.
fn var_coeffs(p: &SparsePoly, v: usize) -> Vec<SparsePoly> {
    let d = p.degree_in(v) as usize;
    let mut out = vec![SparsePoly::zero(p.vars().clone(), p.tower()); d + 1];
    for (e, c) in p.terms() {
        let mut e2 = e.clone();
        let k = e2[v] as usize;
        e2[v] = 0;
        out[k] = out[k].add(&SparsePoly::from_terms(
            p.vars().clone(),
            p.tower(),
            vec![(e2, c.clone())],
        ));
    }
    out
}

fn from_var_coeffs(coeffs: &[SparsePoly], v: usize, proto: &SparsePoly) -> SparsePoly {
    let mut out = SparsePoly::zero(proto.vars().clone(), proto.tower());
    let x = SparsePoly::var(proto.vars().clone(), proto.tower(), v);
    for (k, c) in coeffs.iter().enumerate() {
        out = out.add(&c.mul(&x.pow(k as u32)));
    }
    out
}

fn trim_coeffs(coeffs: &mut Vec<SparsePoly>) {
    while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
        coeffs.pop();
    }
}

/// Exact multivariate division (panics if not exact; internal use only, on
/// divisions guaranteed by subresultant theory).
fn exact_div(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    assert!(!b.is_zero(), "division by zero polynomial");
    let vars = a.vars().clone();
    let tower = a.tower().clone();
    let mut rem = a.clone();
    let mut quo = SparsePoly::zero(vars.clone(), &tower);
    // leading term under the lexicographic exponent order
    let lead = |p: &SparsePoly| -> (Vec<u32>, F) {
        let (e, c) = p.leading_term().expect("leading term of zero polynomial");
        (e.clone(), c.clone())
    };
    let (be, bc) = lead(b);
    while !rem.is_zero() {
        let (re, rc) = lead(&rem);
        let qe: Vec<u32> = re
            .iter()
            .zip(be.iter())
            .map(|(x, y)| x.checked_sub(*y).expect("inexact division (monomial)"))
            .collect();
        let qc = rc.div(&bc).expect("inexact division (coefficient)");
        let qterm = SparsePoly::from_terms(vars.clone(), &tower, vec![(qe, qc)]);
        quo = quo.add(&qterm);
        rem = rem.sub(&qterm.mul(b));
    }
    quo
}

/// Subresultant pseudo-remainder sequence of p, q in variable `v` (Collins).
/// Returns the chain; the last element has the lowest degree in `v`.
fn subres_prs(p: &SparsePoly, q: &SparsePoly, v: usize) -> Vec<SparsePoly> {
    let mut a = p.clone();
    let mut b = q.clone();
    if a.degree_in(v) < b.degree_in(v) {
        std::mem::swap(&mut a, &mut b);
    }
    let mut chain = vec![a.clone(), b.clone()];
    let one = SparsePoly::from_int(p.vars().clone(), p.tower(), 1);
    let mut g = one.clone();
    let mut h = one.clone();
    loop {
        let da = a.degree_in(v) as i64;
        let db = b.degree_in(v) as i64;
        if b.is_zero() {
            chain.pop();
            break;
        }
        if db == 0 {
            break;
        }
        let delta = (da - db).max(0) as u32;
        // pseudo-remainder: lc(b)^{delta+1} * a mod b
        let bc = var_coeffs(&b, v);
        let lcb = bc.last().unwrap().clone();
        let mut r = a.scale(&FieldTowerElement::one(a.tower())).clone();
        r = r.mul(&lcb.pow(delta + 1));
        r = pseudo_mod(&r, &b, v);
        if r.is_zero() {
            break;
        }
        a = b;
        let divisor = g.mul(&h.pow(delta));
        b = exact_div(&r, &divisor);
        g = var_coeffs(&a, v).last().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            // h^{1-delta} g^{delta}
            let gd = g.pow(delta);
            if delta == 1 {
                gd
            } else {
                exact_div(&gd, &h.pow(delta - 1))
            }
        };
        chain.push(b.clone());
    }
    chain
}

/// Plain polynomial remainder after premultiplication (no content control);
/// caller has scaled `a` so all divisions are exact.
fn pseudo_mod(a: &SparsePoly, b: &SparsePoly, v: usize) -> SparsePoly {
    let db = b.degree_in(v);
    let bc = var_coeffs(b, v);
    let lcb = bc.last().unwrap().clone();
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db && db > 0 {
        let dr = r.degree_in(v);
        let rc = var_coeffs(&r, v);
        let lcr = rc.last().unwrap().clone();
        let x = SparsePoly::var(r.vars().clone(), r.tower(), v);
        // r = r*lcb - lcr * x^{dr-db} * b  keeps exactness under premultiplied a
        let t = lcr.mul(&x.pow(dr - db)).mul(b);
        r = r.mul(&lcb).sub(&t);
        // normalize spurious content growth cheaply
        r = strip_rational_content(&r);
        if r.degree_in(v) == dr {
            // leading terms must cancel
            let rc2 = var_coeffs(&r, v);
            if !rc2.last().unwrap().is_zero() {
                panic!("pseudo-division failed to reduce degree");
            }
        }
    }
    r
}

fn strip_rational_content(p: &SparsePoly) -> SparsePoly {
    // divides all coefficients by the gcd of their rational contents; keeps
    // signs of nothing in particular (used only inside resultant chains where
    // results are taken up to nonzero factors)
    let mut contents: Vec<Rat> = Vec::new();
    for (_, c) in p.terms() {
        if let Some(r) = c.is_rational() {
            contents.push(r);
        } else {
            return p.clone();
        }
    }
    if contents.is_empty() {
        return p.clone();
    }
    let mut num = num_bigint::BigInt::from(0);
    let mut den = num_bigint::BigInt::from(1);
    for r in &contents {
        num = num_integer::Integer::gcd(&num, r.numer());
        den = num_integer::Integer::lcm(&den, r.denom());
    }
    if num.is_zero() {
        return p.clone();
    }
    let c = Rat::new(num, den);
    p.scale_rat(&c.recip())
}

use num_traits::{One, Zero};

/// Resultant of p and q with respect to variable v, up to a nonzero factor
/// in the remaining variables being irrelevant for zero sets: this returns
/// the last degree-0 element of the subresultant chain (or zero if the chain
/// ends early, meaning a common factor in v).
fn resultant(p: &SparsePoly, q: &SparsePoly, v: usize) -> SparsePoly {
    if p.is_zero() || q.is_zero() {
        return SparsePoly::zero(p.vars().clone(), p.tower());
    }
    if p.degree_in(v) == 0 {
        return p.clone();
    }
    if q.degree_in(v) == 0 {
        return q.clone();
    }
    let chain = subres_prs(p, q, v);
    let last = chain.last().unwrap();
    if last.degree_in(v) > 0 {
        SparsePoly::zero(p.vars().clone(), p.tower())
    } else {
        last.clone()
    }
}

/// The order-1 element of the subresultant chain of (p, q) in v, split as
/// (coefficient of v, constant term). None when the chain skips order 1.
fn sres1(p: &SparsePoly, q: &SparsePoly, v: usize) -> Option<(SparsePoly, SparsePoly)> {
    let chain = subres_prs(p, q, v);
    for el in chain.iter().rev() {
        if el.degree_in(v) == 1 {
            let c = var_coeffs(el, v);
            let b = c[0].clone();
            let a = c[1].clone();
            return Some((a, b));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// univariate representations and points
// ---------------------------------------------------------------------------

/// Exact parametrization of a finite point set: coordinates are g_i/g0 at the
/// roots of f. f and g0 are co-prime.
#[derive(Clone, Debug)]
pub struct UnivariateRepresentation {
    pub tower: InfinitesimalTower,
    pub f: UniPoly<F>,
    pub g0: UniPoly<F>,
    pub gs: Vec<UniPoly<F>>,
}

/// One real point of a representation: a Thom-encoded root of f.
#[derive(Clone, Debug)]
pub struct RealAlgebraicPoint {
    pub rep: Arc<UnivariateRepresentation>,
    pub root_index: usize,
    pub thom: ThomEncoding,
}

impl RealAlgebraicPoint {
    pub fn dim(&self) -> usize {
        self.rep.gs.len()
    }
}

fn unipoly_mulmod(a: &UniPoly<F>, b: &UniPoly<F>, f: &UniPoly<F>) -> UniPoly<F> {
    a.mul(b).reduce_mod(f).expect("exact reduce")
}

fn unipoly_powmod(a: &UniPoly<F>, e: u32, f: &UniPoly<F>) -> UniPoly<F> {
    let tower_zeroes = a.coeffs[0].c_zero();
    let mut acc = UniPoly::new(vec![tower_zeroes.c_one()]);
    let mut base = a.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = unipoly_mulmod(&acc, &base, f);
        }
        e >>= 1;
        if e > 0 {
            base = unipoly_mulmod(&base, &base, f);
        }
    }
    acc
}

impl UnivariateRepresentation {
    pub fn nvars(&self) -> usize {
        self.gs.len()
    }

    /// Numerator of P(g1/g0, …, gn/g0) after clearing g0^deg(P), reduced mod
    /// f, together with the parity of the cleared power.
    pub fn push_through(&self, p: &SparsePoly) -> Result<(UniPoly<F>, u32)> {
        if p.nvars() != self.gs.len() {
            return Err(Error::VariableClash(format!(
                "point dimension {} vs polynomial in {} variables",
                self.gs.len(),
                p.nvars()
            )));
        }
        let d = p.total_degree();
        let zero = FieldTowerElement::zero(&self.tower);
        let mut acc = UniPoly::new(vec![zero.clone()]);
        for (e, c) in p.terms() {
            let c = c.lift(&self.tower)?;
            let mut term = UniPoly::new(vec![c]);
            let mut total = 0;
            for (i, &exp) in e.iter().enumerate() {
                if exp > 0 {
                    term = unipoly_mulmod(&term, &unipoly_powmod(&self.gs[i], exp, &self.f), &self.f);
                    total += exp;
                }
            }
            if d > total {
                term = unipoly_mulmod(&term, &unipoly_powmod(&self.g0, d - total, &self.f), &self.f);
            }
            acc = acc.add(&term);
        }
        Ok((acc.reduce_mod(&self.f).expect("exact reduce"), d))
    }

    /// Signs of each polynomial at every real root of f, corrected by the
    /// parity of the cleared denominator power. Rows are indexed by the root
    /// order of f (ascending).
    pub fn signs_of(&self, polys: &[&SparsePoly]) -> Result<Vec<Vec<Sign>>> {
        let mut queries: Vec<UniPoly<F>> = Vec::with_capacity(polys.len() + 1);
        let mut parities: Vec<u32> = Vec::with_capacity(polys.len());
        for p in polys {
            let (n, d) = self.push_through(p)?;
            queries.push(n);
            parities.push(d % 2);
        }
        queries.push(self.g0.clone());
        let rows = sign_determination(&self.f, &queries)?;
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let g0_sign = *row.signs.last().unwrap();
            let mut signs = Vec::with_capacity(polys.len());
            for (i, s) in row.signs[..polys.len()].iter().enumerate() {
                let corrected = if parities[i] == 1 { s.mul(g0_sign) } else { *s };
                signs.push(corrected);
            }
            out.push(signs);
        }
        Ok(out)
    }

    /// Signs of raw univariate polynomials in T at every real root of f.
    pub fn signs_of_unipolys(&self, queries: &[UniPoly<F>]) -> Result<Vec<Vec<Sign>>> {
        let rows = sign_determination(&self.f, queries)?;
        Ok(rows.into_iter().map(|r| r.signs).collect())
    }

    /// Thom-encoded points for the real roots whose indices are listed.
    pub fn points(self: &Arc<Self>, indices: &[usize]) -> Result<Vec<RealAlgebraicPoint>> {
        let rows = sign_determination(&self.f, &[])?;
        indices
            .iter()
            .map(|&i| {
                rows.get(i)
                    .map(|r| RealAlgebraicPoint {
                        rep: self.clone(),
                        root_index: i,
                        thom: r.thom.clone(),
                    })
                    .ok_or_else(|| Error::Internal("root index out of range".into()))
            })
            .collect()
    }
}

/// Sign of P at a represented point.
pub fn sign_at_point(p: &SparsePoly, point: &RealAlgebraicPoint) -> Result<Sign> {
    let rows = point.rep.signs_of(&[p])?;
    rows.get(point.root_index)
        .map(|r| r[0])
        .ok_or_else(|| Error::Internal("root index out of range".into()))
}

// ---------------------------------------------------------------------------
// exact zero-dimensional solving (sheared elimination + parametrization)
// ---------------------------------------------------------------------------

/// Exact-solve mode of algebraic sampling: all real solutions of a system
/// with finitely many common complex-projection values along a generic
/// direction. Fails with NotZeroDimensional when elimination collapses.
pub fn exact_solve(system: &[SparsePoly]) -> Result<Vec<RealAlgebraicPoint>> {
    let system: Vec<SparsePoly> = system.iter().filter(|p| !p.is_zero()).cloned().collect();
    if system.is_empty() {
        return Err(Error::NotZeroDimensional);
    }
    let tower = system[0].tower().clone();
    let nvars = system[0].nvars();
    if system.iter().any(|p| p.constant_value().map(|c| !c.is_zero()).unwrap_or(false)) {
        return Ok(Vec::new()); // a nonzero constant equation: empty zero set
    }
    if nvars == 1 {
        return solve_univariate(&system, &tower);
    }
    // An isolated real zero of a single polynomial in several variables is a
    // singular zero; adjoining the gradient keeps isolated zeros and makes
    // elimination possible.
    let mut system = system;
    if system.len() == 1 {
        let p = system[0].clone();
        for i in 0..nvars {
            system.push(p.partial_derivative(i));
        }
        system.retain(|q| !q.is_zero());
    }
    let mut last_err = Error::NotZeroDimensional;
    for c in 1..=6i64 {
        match try_solve_sheared(&system, &tower, nvars, c) {
            Ok(points) => return Ok(points),
            Err(e @ Error::NotZeroDimensional) => return Err(e),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn solve_univariate(system: &[SparsePoly], tower: &InfinitesimalTower) -> Result<Vec<RealAlgebraicPoint>> {
    // common roots of all the univariate polynomials: verify against each
    let to_uni = |p: &SparsePoly| -> UniPoly<F> {
        let d = p.degree_in(0) as usize;
        let mut coeffs = vec![FieldTowerElement::zero(tower); d + 1];
        for (e, c) in p.terms() {
            coeffs[e[0] as usize] = c.clone();
        }
        UniPoly::new(coeffs)
    };
    let polys: Vec<UniPoly<F>> = system.iter().map(to_uni).collect();
    let f = polys
        .iter()
        .min_by_key(|p| p.coeffs.len())
        .unwrap()
        .clone();
    if f.coeffs.len() == 1 {
        return Err(Error::NotZeroDimensional);
    }
    let one = FieldTowerElement::one(tower);
    let rep = Arc::new(UnivariateRepresentation {
        tower: tower.clone(),
        f: f.clone(),
        g0: UniPoly::new(vec![one.clone()]),
        gs: vec![UniPoly::new(vec![FieldTowerElement::zero(tower), one])],
    });
    // verify the other equations at each root
    let rows = rep.signs_of_unipolys(&polys)?;
    let mut indices = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.iter().all(|s| *s == Sign::Zero) {
            indices.push(i);
        }
    }
    rep.points(&indices)
}

fn shear_vars(nvars: usize) -> Arc<Vec<String>> {
    let mut v = vec!["T".to_string()];
    for i in 2..=nvars {
        v.push(format!("S{i}"));
    }
    Arc::new(v)
}

fn try_solve_sheared(
    system: &[SparsePoly],
    tower: &InfinitesimalTower,
    nvars: usize,
    c: i64,
) -> Result<Vec<RealAlgebraicPoint>> {
    // substitute X1 = T - c X2 - c^2 X3 - …; keep X2..Xn as-is
    let svars = shear_vars(nvars);
    let mut images: Vec<SparsePoly> = Vec::with_capacity(nvars);
    let mut x1_image = SparsePoly::var(svars.clone(), tower, 0);
    for j in 1..nvars {
        let coef = FieldTowerElement::from_rat(tower, Rat::from_integer(c.into()).pow(j as i32));
        x1_image = x1_image.sub(&SparsePoly::var(svars.clone(), tower, j).scale(&coef));
    }
    images.push(x1_image);
    for j in 1..nvars {
        images.push(SparsePoly::var(svars.clone(), tower, j));
    }
    let sheared: Vec<SparsePoly> = system
        .iter()
        .map(|p| p.substitute(&images))
        .collect::<Result<_>>()?;

    // eliminate variables nvars-1 … 1 (positions in svars) down to T only,
    // remembering for each coordinate a bivariate pair in (T, S_i)
    let f = cascade_to_univariate(&sheared, (1..nvars).collect::<Vec<_>>().as_slice())?;
    let f_uni = sparse_to_uni(&f, 0, tower);
    if f_uni.coeffs.len() == 1 {
        return Err(Error::NotZeroDimensional);
    }

    // coordinate parametrizations
    let mut denoms: Vec<SparsePoly> = Vec::new();
    let mut numers: Vec<SparsePoly> = Vec::new();
    for i in 1..nvars {
        let keep: Vec<usize> = (1..nvars).filter(|&j| j != i).collect();
        let pair = cascade_to_pair(&sheared, &keep, i)?;
        let (a, b) = match sres1(&pair.0, &pair.1, i) {
            Some(ab) => ab,
            None => return Err(Error::Degenerate("no order-1 subresultant".into())),
        };
        if a.is_zero() {
            return Err(Error::Degenerate("vanishing coordinate denominator".into()));
        }
        denoms.push(a);
        numers.push(b.neg());
    }

    // assemble the common-denominator representation, reduced mod f
    let zero = FieldTowerElement::zero(tower);
    let one = FieldTowerElement::one(tower);
    let t_poly = UniPoly::new(vec![zero.clone(), one.clone()]);
    let mut g0 = UniPoly::new(vec![one.clone()]);
    let den_unis: Vec<UniPoly<F>> = denoms.iter().map(|p| sparse_to_uni(p, 0, tower)).collect();
    let num_unis: Vec<UniPoly<F>> = numers.iter().map(|p| sparse_to_uni(p, 0, tower)).collect();
    for d in &den_unis {
        g0 = unipoly_mulmod(&g0, d, &f_uni);
    }
    if g0.clone().is_zero().unwrap_or(false) {
        return Err(Error::Degenerate("denominator reduces to zero mod f".into()));
    }
    let mut gs: Vec<UniPoly<F>> = Vec::with_capacity(nvars);
    // coordinates X2..Xn: numer_i * prod_{j != i} den_j
    let mut tail: Vec<UniPoly<F>> = Vec::new();
    for i in 0..nvars - 1 {
        let mut g = num_unis[i].clone();
        for (j, d) in den_unis.iter().enumerate() {
            if j != i {
                g = unipoly_mulmod(&g, d, &f_uni);
            }
        }
        tail.push(g);
    }
    // X1 = T - sum c^{j-1} Xj  =>  g1 = g0*T - sum c^{j-1} g_{j}
    let mut g1 = unipoly_mulmod(&g0, &t_poly, &f_uni);
    for (j, g) in tail.iter().enumerate() {
        let coef = FieldTowerElement::from_rat(tower, Rat::from_integer(c.into()).pow((j + 1) as i32));
        g1 = g1.sub(&g.scale(&coef)).reduce_mod(&f_uni).expect("exact reduce");
    }
    gs.push(g1);
    gs.extend(tail);

    let rep = Arc::new(UnivariateRepresentation {
        tower: tower.clone(),
        f: f_uni,
        g0,
        gs,
    });

    // verify: all system polynomials vanish and all per-coordinate
    // denominators are nonzero at accepted roots
    let mut checks: Vec<&SparsePoly> = Vec::new();
    let originals: Vec<SparsePoly> = system.to_vec();
    for p in &originals {
        checks.push(p);
    }
    let sign_rows = rep.signs_of(&checks)?;
    let den_rows = rep.signs_of_unipolys(&den_unis)?;
    let mut indices = Vec::new();
    for i in 0..sign_rows.len() {
        let solves = sign_rows[i].iter().all(|s| *s == Sign::Zero);
        let dens_ok = den_rows[i].iter().all(|s| *s != Sign::Zero);
        if solves {
            if !dens_ok {
                return Err(Error::Degenerate(
                    "vanishing denominator at a candidate root".into(),
                ));
            }
            indices.push(i);
        }
    }
    rep.points(&indices)
}

fn sparse_to_uni(p: &SparsePoly, v: usize, tower: &InfinitesimalTower) -> UniPoly<F> {
    let d = p.degree_in(v) as usize;
    let mut coeffs = vec![FieldTowerElement::zero(tower); d + 1];
    for (e, c) in p.terms() {
        debug_assert!(e
            .iter()
            .enumerate()
            .all(|(i, &x)| i == v || x == 0));
        coeffs[e[v] as usize] = coeffs[e[v] as usize].add(c);
    }
    UniPoly::new(coeffs)
}

/// Eliminates the listed variables (in order) from the system, producing one
/// univariate polynomial in the remaining variable(s); used with all-but-T.
fn cascade_to_univariate(system: &[SparsePoly], elim: &[usize]) -> Result<SparsePoly> {
    let mut working: Vec<SparsePoly> = dedupe(system);
    for &v in elim {
        working = eliminate_one(&working, v)?;
    }
    // pick the lowest positive-degree univariate
    working
        .into_iter()
        .filter(|p| !p.is_zero() && p.total_degree() > 0)
        .min_by_key(|p| p.total_degree())
        .ok_or(Error::NotZeroDimensional)
}

/// Eliminates the listed variables, returning two independent polynomials in
/// the remaining pair of variables.
fn cascade_to_pair(
    system: &[SparsePoly],
    elim: &[usize],
    _keep: usize,
) -> Result<(SparsePoly, SparsePoly)> {
    let mut working: Vec<SparsePoly> = dedupe(system);
    for &v in elim {
        working = eliminate_one(&working, v)?;
    }
    let mut nonzero: Vec<SparsePoly> = working
        .into_iter()
        .filter(|p| !p.is_zero() && p.total_degree() > 0)
        .collect();
    nonzero.sort_by_key(|p| p.total_degree());
    nonzero.dedup_by(|a, b| a.equals(b));
    if nonzero.len() < 2 {
        return Err(Error::Degenerate("pair cascade collapsed".into()));
    }
    Ok((nonzero[0].clone(), nonzero[1].clone()))
}

fn dedupe(system: &[SparsePoly]) -> Vec<SparsePoly> {
    let mut out: Vec<SparsePoly> = Vec::new();
    for p in system {
        if p.is_zero() {
            continue;
        }
        let p = strip_rational_content(p);
        if !out.iter().any(|q| q.equals(&p)) {
            out.push(p);
        }
    }
    out
}

fn eliminate_one(working: &[SparsePoly], v: usize) -> Result<Vec<SparsePoly>> {
    let mut with_v: Vec<&SparsePoly> = Vec::new();
    let mut without: Vec<SparsePoly> = Vec::new();
    for p in working {
        if p.degree_in(v) > 0 {
            with_v.push(p);
        } else if !p.is_zero() {
            without.push(p.clone());
        }
    }
    if with_v.is_empty() {
        return Ok(without);
    }
    // pivot: minimal degree in v
    with_v.sort_by_key(|p| p.degree_in(v));
    let pivot = with_v[0];
    let mut out = without;
    for q in with_v.iter().skip(1) {
        let r = resultant(pivot, q, v);
        if !r.is_zero() {
            out.push(strip_rational_content(&r));
        }
    }
    if out.is_empty() {
        // a single equation cannot pin down the variable: positive dimension
        return Err(Error::NotZeroDimensional);
    }
    out.sort_by_key(|p| p.total_degree());
    out.dedup_by(|a, b| a.equals(b));
    Ok(out)
}

// ---------------------------------------------------------------------------
// boundedness and limits over the smallest tower symbol
// ---------------------------------------------------------------------------

fn clear_denominators(p: &UniPoly<F>, tower: &InfinitesimalTower) -> UniPoly<F> {
    use crate::scalars::TowerPoly;
    let mut dens: Vec<TowerPoly> = Vec::new();
    for c in &p.coeffs {
        let d = c.denominator().clone();
        let is_one = d.terms().len() == 1
            && d.terms()[0].0.iter().all(|&e| e == 0)
            && d.terms()[0].1.is_one();
        if !is_one && !dens.iter().any(|x| *x == d) {
            dens.push(d);
        }
    }
    if dens.is_empty() {
        return p.clone();
    }
    let mut m = FieldTowerElement::one(tower);
    for d in dens {
        let e = FieldTowerElement::from_parts(tower, d, TowerPoly::constant(tower.len(), Rat::one()))
            .expect("denominator is nonzero");
        m = m.mul(&e);
    }
    p.scale(&m)
}

/// Strips the largest common power of the last symbol from a family of
/// denominator-free polynomials (jointly, preserving their ratios).
fn strip_last_symbol_content(polys: &mut [UniPoly<F>], tower: &InfinitesimalTower) {
    let idx = tower.len() - 1;
    let mut min_ord: Option<u32> = None;
    for p in polys.iter() {
        for c in &p.coeffs {
            if c.is_zero() {
                continue;
            }
            let o = c.numerator().min_order(idx).unwrap_or(0);
            min_ord = Some(min_ord.map_or(o, |m: u32| m.min(o)));
        }
    }
    let Some(o) = min_ord else { return };
    if o == 0 {
        return;
    }
    let s = FieldTowerElement::symbol(tower, tower.last().unwrap()).unwrap();
    let inv = s.pow(o).recip().unwrap();
    for p in polys.iter_mut() {
        *p = p.scale(&inv);
    }
}

fn drop_symbol_uni(p: &UniPoly<F>, parent: &InfinitesimalTower) -> UniPoly<F> {
    UniPoly::new(
        p.coeffs
            .iter()
            .map(|c| {
                c.limit(c.tower().last().unwrap())
                    .unwrap_or_else(|_| FieldTowerElement::zero(parent))
            })
            .collect(),
    )
}

fn widen_uni(p: &UniPoly<F>, to: &InfinitesimalTower) -> UniPoly<F> {
    UniPoly::new(p.coeffs.iter().map(|c| c.lift(to).expect("prefix tower")).collect())
}

/// Rows of limit signs (value of sign after the last symbol goes to 0) for
/// each query polynomial, per real root of rep.f. A value whose order in the
/// symbol is positive has limit sign zero.
pub fn limit_signs(rep: &UnivariateRepresentation, queries: &[UniPoly<F>]) -> Result<Vec<Vec<Sign>>> {
    let tower = &rep.tower;
    let s = FieldTowerElement::symbol(tower, tower.last().ok_or_else(|| {
        Error::TowerMismatch("limit over the empty tower".into())
    })?)?;
    let fdeg = rep.f.degree().max(1) as u32;
    let m4 = 4 * fdeg;
    let s2inv = s.pow(2).recip()?;
    let mut all: Vec<UniPoly<F>> = Vec::with_capacity(2 * queries.len());
    for q in queries {
        all.push(q.clone());
        let pow = unipoly_powmod(q, m4, &rep.f);
        let expr = pow
            .scale(&s2inv)
            .add(&UniPoly::new(vec![FieldTowerElement::from_int(tower, -1)]));
        all.push(expr);
    }
    let rows = rep.signs_of_unipolys(&all)?;
    Ok(rows
        .into_iter()
        .map(|row| {
            (0..queries.len())
                .map(|i| {
                    let v = row[2 * i];
                    let infinitesimal = row[2 * i + 1] == Sign::Neg;
                    if infinitesimal {
                        Sign::Zero
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect())
}

/// True for each real root of rep.f whose associated point has all
/// coordinates bounded over the subtower (finite limit as the last symbol
/// goes to 0).
pub fn bounded_flags(rep: &UnivariateRepresentation, _symbol: &str) -> Result<Vec<bool>> {
    let tower = &rep.tower;
    let s = FieldTowerElement::symbol(tower, tower.last().unwrap())?;
    let fdeg = rep.f.degree().max(1) as u32;
    let m4 = 4 * fdeg;
    let g0m = unipoly_powmod(&rep.g0, m4, &rep.f);
    let s2 = s.pow(2);
    let mut queries = Vec::with_capacity(rep.gs.len());
    for g in &rep.gs {
        // g^{4M} s^2 - g0^{4M}: positive iff the coordinate is unbounded
        let gm = unipoly_powmod(g, m4, &rep.f).scale(&s2);
        queries.push(gm.sub(&g0m));
    }
    let rows = rep.signs_of_unipolys(&queries)?;
    Ok(rows
        .into_iter()
        .map(|row| row.iter().all(|&x| x == Sign::Neg))
        .collect())
}

/// Drops points with any coordinate unbounded over the subtower.
pub fn drop_unbounded(points: Vec<RealAlgebraicPoint>, symbol: &str) -> Result<Vec<RealAlgebraicPoint>> {
    let mut out = Vec::new();
    let mut cache: Vec<(*const UnivariateRepresentation, Vec<bool>)> = Vec::new();
    for p in points {
        let key = Arc::as_ptr(&p.rep);
        let flags = match cache.iter().find(|(k, _)| *k == key) {
            Some((_, f)) => f.clone(),
            None => {
                let f = bounded_flags(&p.rep, symbol)?;
                cache.push((key, f.clone()));
                f
            }
        };
        if *flags.get(p.root_index).unwrap_or(&false) {
            out.push(p);
        }
    }
    Ok(out)
}

fn uni_divmod_field(a: &UniPoly<F>, b: &UniPoly<F>) -> (UniPoly<F>, UniPoly<F>) {
    let mut r = a.clone().normalized().unwrap();
    let b = b.clone().normalized().unwrap();
    let zero = a.coeffs[0].c_zero();
    let mut q = vec![zero.clone(); r.coeffs.len().max(1)];
    let db = b.degree();
    loop {
        if r.is_zero().unwrap() {
            break;
        }
        r = r.normalized().unwrap();
        let dr = r.degree();
        if dr < db {
            break;
        }
        let c = r.lc().div(b.lc()).expect("field division");
        q[dr - db] = q[dr - db].add(&c);
        let mut sub = vec![zero.clone(); dr - db];
        for bc in &b.coeffs {
            sub.push(bc.mul(&c));
        }
        r = r.sub(&UniPoly::new(sub));
        r.coeffs.truncate(dr);
        if r.coeffs.is_empty() {
            r.coeffs.push(zero.clone());
        }
    }
    (UniPoly::new(q).normalized().unwrap(), r)
}

/// Monic gcd over the tower fraction field.
pub fn uni_gcd(a: &UniPoly<F>, b: &UniPoly<F>) -> UniPoly<F> {
    let mut x = a.clone().normalized().unwrap();
    let mut y = b.clone().normalized().unwrap();
    if x.is_zero().unwrap() {
        return y;
    }
    loop {
        if y.is_zero().unwrap() {
            break;
        }
        let (_, r) = uni_divmod_field(&x, &y);
        x = y;
        y = r;
    }
    // make monic
    let lc = x.lc().clone();
    if !lc.is_zero() {
        x = x.scale(&lc.recip().unwrap());
    }
    x
}

/// Full derivative list of f (f', f'', …, f^(deg-1)).
fn all_derivatives(f: &UniPoly<F>) -> Vec<UniPoly<F>> {
    let n = f.degree();
    let mut out = Vec::new();
    let mut d = f.derivative();
    for _ in 1..n.max(1) {
        out.push(d.clone());
        d = d.derivative();
    }
    out
}

/// The image of the listed points under the limit over the smallest tower
/// symbol: bounded points map to their coordinatewise limits (as points over
/// the shortened tower), unbounded points are dropped, duplicates merged.
pub fn limit_bounded_points(
    points: &[RealAlgebraicPoint],
    symbol: &str,
) -> Result<Vec<RealAlgebraicPoint>> {
    let mut out: Vec<RealAlgebraicPoint> = Vec::new();
    // group points by representation
    let mut groups: Vec<(Arc<UnivariateRepresentation>, Vec<usize>)> = Vec::new();
    for p in points {
        match p.rep.tower.last() {
            Some(last) if last == symbol => {}
            _ => {
                return Err(Error::TowerMismatch(format!(
                    "{symbol} is not the smallest tower symbol of the representation"
                )))
            }
        }
        match groups.iter_mut().find(|(r, _)| Arc::ptr_eq(r, &p.rep)) {
            Some((_, v)) => v.push(p.root_index),
            None => groups.push((p.rep.clone(), vec![p.root_index])),
        }
    }
    for (rep, indices) in groups {
        let limited = limit_group(&rep, &indices, symbol, 0)?;
        for q in limited {
            if !out.iter().map(|o| points_equal(o, &q)).collect::<Result<Vec<_>>>()?.iter().any(|&b| b) {
                out.push(q);
            }
        }
    }
    Ok(out)
}

fn limit_group(
    rep: &Arc<UnivariateRepresentation>,
    indices: &[usize],
    symbol: &str,
    depth: usize,
) -> Result<Vec<RealAlgebraicPoint>> {
    let tower = rep.tower.clone();
    let parent = tower.parent()?;
    let flags = bounded_flags(rep, symbol)?;
    let kept: Vec<usize> = indices
        .iter()
        .copied()
        .filter(|&i| *flags.get(i).unwrap_or(&false))
        .collect();
    if kept.is_empty() {
        return Ok(Vec::new());
    }
    // clear denominators and strip symbol content jointly for (f) and for the
    // coordinate tuple (g0, gs)
    let mut fpack = vec![clear_denominators(&rep.f, &tower)];
    strip_last_symbol_content(&mut fpack, &tower);
    let f_tilde = fpack.pop().unwrap();
    let f0 = drop_symbol_uni(&f_tilde, &parent).normalized().unwrap();
    if f0.is_zero().unwrap() || f0.degree() == 0 {
        return Err(Error::Internal("limit polynomial degenerated".into()));
    }
    let mut gpack: Vec<UniPoly<F>> = Vec::with_capacity(rep.gs.len() + 1);
    gpack.push(clear_denominators(&rep.g0, &tower));
    for g in &rep.gs {
        gpack.push(clear_denominators(g, &tower));
    }
    strip_last_symbol_content(&mut gpack, &tower);
    let g0_limit_ok = {
        // limit sign of the cleared g0 at each kept root must be nonzero
        let rows = limit_signs(rep, &gpack[..1])?;
        kept.iter().all(|&i| rows[i][0] != Sign::Zero)
    };
    if !g0_limit_ok {
        if depth >= 2 {
            return Err(Error::Degenerate(
                "coordinate denominator vanishes in the limit".into(),
            ));
        }
        // re-present the same points through a fresh solve and retry
        return resolve_and_limit(rep, &kept, symbol, depth);
    }
    // co-prime normalization: remove factors of f0 sharing roots with g0^0
    let g00 = drop_symbol_uni(&gpack[0], &parent);
    let mut fhat = f0.clone();
    loop {
        let g = uni_gcd(&fhat, &g00);
        if g.degree() == 0 {
            break;
        }
        let (q, _) = uni_divmod_field(&fhat, &g);
        fhat = q;
    }
    if fhat.degree() == 0 {
        return Err(Error::Internal("limit polynomial lost all roots".into()));
    }
    let limit_rep = Arc::new(UnivariateRepresentation {
        tower: parent.clone(),
        f: fhat.clone(),
        g0: g00,
        gs: gpack[1..].iter().map(|g| drop_symbol_uni(g, &parent)).collect(),
    });
    // identify each kept root's limit among the roots of fhat by matching
    // full derivative limit-signs
    let ders0 = all_derivatives(&fhat);
    let ders_lifted: Vec<UniPoly<F>> = ders0.iter().map(|d| widen_uni(d, &tower)).collect();
    let lim_rows = limit_signs(rep, &ders_lifted)?;
    let target_rows = limit_rep.signs_of_unipolys(&ders0)?;
    let mut chosen: Vec<usize> = Vec::new();
    for &i in &kept {
        let want = &lim_rows[i];
        let mut found: Option<usize> = None;
        for (j, have) in target_rows.iter().enumerate() {
            if have == want {
                found = Some(j);
                break;
            }
        }
        let j = found.ok_or_else(|| Error::Internal("limit root not identified".into()))?;
        if !chosen.contains(&j) {
            chosen.push(j);
        }
    }
    limit_rep.points(&chosen)
}

fn resolve_and_limit(
    rep: &Arc<UnivariateRepresentation>,
    kept: &[usize],
    symbol: &str,
    depth: usize,
) -> Result<Vec<RealAlgebraicPoint>> {
    let tower = rep.tower.clone();
    let n = rep.gs.len();
    // joint system in (X1..Xn, U): f(U) = 0, X_i g0(U) - g_i(U) = 0
    let mut names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    names.push("U".to_string());
    let vars = Arc::new(names);
    let u = SparsePoly::var(vars.clone(), &tower, n);
    let uni_to_sparse = |p: &UniPoly<F>| -> SparsePoly {
        let mut acc = SparsePoly::zero(vars.clone(), &tower);
        for (i, c) in p.coeffs.iter().enumerate() {
            acc = acc.add(&SparsePoly::constant(vars.clone(), c.clone()).mul(&u.pow(i as u32)));
        }
        acc
    };
    let mut system = vec![uni_to_sparse(&rep.f)];
    let g0s = uni_to_sparse(&rep.g0);
    for (i, g) in rep.gs.iter().enumerate() {
        let xi = SparsePoly::var(vars.clone(), &tower, i);
        system.push(xi.mul(&g0s).sub(&uni_to_sparse(g)));
    }
    let resolved = exact_solve(&system)?;
    // keep the resolved points whose U-coordinate matches a kept root of f
    let mut matched: Vec<RealAlgebraicPoint> = Vec::new();
    for rp in &resolved {
        let new_rep = &rp.rep;
        let u_num = new_rep.gs[n].clone();
        let u_den = new_rep.g0.clone();
        for &i in kept {
            let t_num = {
                let zero = FieldTowerElement::zero(&tower);
                let one = FieldTowerElement::one(&tower);
                UniPoly::new(vec![zero, one])
            };
            let t_den = UniPoly::new(vec![FieldTowerElement::one(&tower)]);
            let ord = compare_algebraic_values(
                (rep, i, &t_num, &t_den),
                (new_rep, rp.root_index, &u_num, &u_den),
            )?;
            if ord == std::cmp::Ordering::Equal {
                matched.push(rp.clone());
                break;
            }
        }
    }
    // drop the auxiliary U-coordinate before limiting
    let mut shrunk: Vec<RealAlgebraicPoint> = Vec::new();
    let mut shrunk_reps: Vec<(Arc<UnivariateRepresentation>, Arc<UnivariateRepresentation>)> = Vec::new();
    for p in matched {
        let small = match shrunk_reps.iter().find(|(a, _)| Arc::ptr_eq(a, &p.rep)) {
            Some((_, b)) => b.clone(),
            None => {
                let b = Arc::new(UnivariateRepresentation {
                    tower: p.rep.tower.clone(),
                    f: p.rep.f.clone(),
                    g0: p.rep.g0.clone(),
                    gs: p.rep.gs[..n].to_vec(),
                });
                shrunk_reps.push((p.rep.clone(), b.clone()));
                b
            }
        };
        shrunk.push(RealAlgebraicPoint {
            rep: small,
            root_index: p.root_index,
            thom: p.thom.clone(),
        });
    }
    let mut groups: Vec<(Arc<UnivariateRepresentation>, Vec<usize>)> = Vec::new();
    for p in &shrunk {
        match groups.iter_mut().find(|(r, _)| Arc::ptr_eq(r, &p.rep)) {
            Some((_, v)) => v.push(p.root_index),
            None => groups.push((p.rep.clone(), vec![p.root_index])),
        }
    }
    let mut out = Vec::new();
    for (r, idx) in groups {
        out.extend(limit_group(&r, &idx, symbol, depth + 1)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// comparison of algebraic values across representations
// ---------------------------------------------------------------------------

/// Composes outer(num/den), clearing den^deg(outer); returns the numerator
/// reduced mod f.
fn rational_compose(
    f: &UniPoly<F>,
    num: &UniPoly<F>,
    den: &UniPoly<F>,
    outer: &UniPoly<F>,
) -> (UniPoly<F>, u32) {
    let d = outer.coeffs.len() as u32 - 1;
    let zero = outer.coeffs[0].c_zero();
    let mut acc = UniPoly::new(vec![zero]);
    for (m, c) in outer.coeffs.iter().enumerate() {
        let mut term = UniPoly::new(vec![c.clone()]);
        if m > 0 {
            term = unipoly_mulmod(&term, &unipoly_powmod(num, m as u32, f), f);
        }
        if (m as u32) < d {
            term = unipoly_mulmod(&term, &unipoly_powmod(den, d - m as u32, f), f);
        }
        acc = acc.add(&term);
    }
    (acc.reduce_mod(f).expect("exact reduce"), d)
}

/// Minimal-polynomial-style annihilator of num/den over the tower: the
/// resultant in T of f(T) and Y·den(T) − num(T).
fn value_annihilator(
    f: &UniPoly<F>,
    num: &UniPoly<F>,
    den: &UniPoly<F>,
    tower: &InfinitesimalTower,
) -> Result<UniPoly<F>> {
    let vars: Arc<Vec<String>> = Arc::new(vec!["T".to_string(), "Y".to_string()]);
    let t = SparsePoly::var(vars.clone(), tower, 0);
    let y = SparsePoly::var(vars.clone(), tower, 1);
    let lift = |p: &UniPoly<F>| -> SparsePoly {
        let mut acc = SparsePoly::zero(vars.clone(), tower);
        for (i, c) in p.coeffs.iter().enumerate() {
            acc = acc.add(&SparsePoly::constant(vars.clone(), c.clone()).mul(&t.pow(i as u32)));
        }
        acc
    };
    let fs = lift(f);
    let link = y.mul(&lift(den)).sub(&lift(num));
    let r = resultant(&fs, &link, 0);
    if r.is_zero() {
        return Err(Error::Degenerate("value annihilator vanished".into()));
    }
    Ok(sparse_to_uni(&r, 1, tower))
}

/// Exact comparison of two real algebraic values given as coordinate
/// functions at Thom-encoded roots of (possibly different) representations.
pub fn compare_algebraic_values(
    a: (&UnivariateRepresentation, usize, &UniPoly<F>, &UniPoly<F>),
    b: (&UnivariateRepresentation, usize, &UniPoly<F>, &UniPoly<F>),
) -> Result<std::cmp::Ordering> {
    let (rep_a, ia, num_a, den_a) = a;
    let (rep_b, ib, num_b, den_b) = b;
    let tower = &rep_a.tower;
    if *tower != rep_b.tower {
        return Err(Error::TowerMismatch("comparing values over different towers".into()));
    }
    let ra = value_annihilator(&rep_a.f, num_a, den_a, tower)?;
    let rb = value_annihilator(&rep_b.f, num_b, den_b, tower)?;
    let pi = ra.mul(&rb);
    let pi = pi.normalized().expect("exact");
    let n = pi.degree();
    let mut ders = Vec::new();
    {
        let mut d = pi.derivative();
        for _ in 1..n.max(1) {
            ders.push(d.clone());
            d = d.derivative();
        }
    }
    // signs of all derivatives at each value, highest order first
    let signs_at = |rep: &UnivariateRepresentation,
                    root: usize,
                    num: &UniPoly<F>,
                    den: &UniPoly<F>|
     -> Result<Vec<Sign>> {
        let mut queries = Vec::with_capacity(ders.len() + 1);
        let mut parities = Vec::with_capacity(ders.len());
        for d in &ders {
            let (q, deg) = rational_compose(&rep.f, num, den, d);
            queries.push(q);
            parities.push(deg % 2);
        }
        queries.push(den.clone());
        let rows = rep.signs_of_unipolys(&queries)?;
        let row = rows
            .get(root)
            .ok_or_else(|| Error::Internal("root index out of range".into()))?;
        let den_sign = *row.last().unwrap();
        if den_sign == Sign::Zero {
            return Err(Error::Degenerate("denominator vanishes at the root".into()));
        }
        let mut out: Vec<Sign> = Vec::with_capacity(ders.len());
        for (i, s) in row[..ders.len()].iter().enumerate() {
            out.push(if parities[i] == 1 { s.mul(den_sign) } else { *s });
        }
        out.reverse(); // highest derivative first
        Ok(out)
    };
    let sa = signs_at(rep_a, ia, num_a, den_a)?;
    let sb = signs_at(rep_b, ib, num_b, den_b)?;
    let lead = pi.lc().sign();
    Ok(crate::realroots::thom_cmp(&sa, &sb, n, lead))
}

/// Exact equality of two represented points (same dimension required).
pub fn points_equal(p: &RealAlgebraicPoint, q: &RealAlgebraicPoint) -> Result<bool> {
    if p.dim() != q.dim() {
        return Ok(false);
    }
    if Arc::ptr_eq(&p.rep, &q.rep) {
        return Ok(p.root_index == q.root_index);
    }
    for i in 0..p.dim() {
        let ord = compare_algebraic_values(
            (&p.rep, p.root_index, &p.rep.gs[i], &p.rep.g0),
            (&q.rep, q.root_index, &q.rep.gs[i], &q.rep.g0),
        )?;
        if ord != std::cmp::Ordering::Equal {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// characteristic polynomials and eigenvalue sign counts over D[T]/(f)
// ---------------------------------------------------------------------------

/// Characteristic polynomial det(λI − M) of a square matrix with entries in
/// D[T]/(f), by the division-free Berkowitz algorithm. Returns coefficients
/// lowest power first; the top coefficient is 1.
pub fn berkowitz_charpoly(m: &[Vec<UniPoly<F>>], f: &UniPoly<F>) -> Vec<UniPoly<F>> {
    let n = m.len();
    let zero = f.coeffs[0].c_zero();
    let one_c = f.coeffs[0].c_one();
    let upone = UniPoly::new(vec![one_c.clone()]);
    let upzero = UniPoly::new(vec![zero.clone()]);
    assert!(n > 0, "empty matrix");
    // vectors hold coefficients highest power first
    let mut v: Vec<UniPoly<F>> = vec![upone.clone(), m[0][0].neg()];
    for r in 2..=n {
        // S_j = row · A^j · col for the principal (r-1) block
        let row: Vec<UniPoly<F>> = (0..r - 1).map(|j| m[r - 1][j].clone()).collect();
        let col: Vec<UniPoly<F>> = (0..r - 1).map(|i| m[i][r - 1].clone()).collect();
        let mut svals: Vec<UniPoly<F>> = Vec::with_capacity(r.saturating_sub(1));
        // iterate w = A^j col
        let mut w = col.clone();
        for _ in 0..r - 1 {
            let mut s = upzero.clone();
            for i in 0..r - 1 {
                s = s.add(&unipoly_mulmod(&row[i], &w[i], f));
            }
            svals.push(s);
            // w = A w
            let mut nw = vec![upzero.clone(); r - 1];
            for i in 0..r - 1 {
                let mut acc = upzero.clone();
                for j in 0..r - 1 {
                    acc = acc.add(&unipoly_mulmod(&m[i][j], &w[j], f));
                }
                nw[i] = acc;
            }
            w = nw;
        }
        // first column of the Toeplitz operator: [1, -M_rr, -S_0, -S_1, …]
        let mut tcol: Vec<UniPoly<F>> = Vec::with_capacity(r + 1);
        tcol.push(upone.clone());
        tcol.push(m[r - 1][r - 1].neg());
        for s in svals.iter().take(r - 1) {
            tcol.push(s.neg());
        }
        // v_new[i] = Σ_j tcol[i - j] v[j]
        let mut nv: Vec<UniPoly<F>> = vec![upzero.clone(); r + 1];
        for (i, slot) in nv.iter_mut().enumerate() {
            let mut acc = upzero.clone();
            for (j, vj) in v.iter().enumerate() {
                if i >= j && i - j < tcol.len() {
                    acc = acc.add(&unipoly_mulmod(&tcol[i - j], vj, f));
                }
            }
            *slot = acc;
        }
        v = nv;
    }
    v.reverse();
    v
}

/// Number of negative eigenvalues from the signs of the characteristic
/// polynomial coefficients (lowest first): the sign-variation count of
/// χ(−λ), exact for real-rooted polynomials. The constant coefficient must be
/// nonzero (nondegeneracy).
pub fn descartes_negative_count(coeff_signs: &[Sign]) -> Result<usize> {
    if coeff_signs.first().copied() == Some(Sign::Zero) {
        return Err(Error::DegenerateHessian);
    }
    let mut count = 0usize;
    let mut last: Option<Sign> = None;
    for (i, &s) in coeff_signs.iter().enumerate() {
        let adj = if i % 2 == 1 { s.neg() } else { s };
        if adj == Sign::Zero {
            continue;
        }
        if let Some(prev) = last {
            if prev != adj {
                count += 1;
            }
        }
        last = Some(adj);
    }
    Ok(count)
}

/// Pushes a matrix of multivariate polynomials through the representation
/// with a uniform even denominator power, preserving the inertia at each
/// root. Returns entries in D[T]/(f).
pub fn matrix_push_through(
    rep: &UnivariateRepresentation,
    entries: &[Vec<SparsePoly>],
) -> Result<Vec<Vec<UniPoly<F>>>> {
    let dmax = entries
        .iter()
        .flatten()
        .map(|p| p.total_degree())
        .max()
        .unwrap_or(0);
    let target = if dmax % 2 == 0 { dmax } else { dmax + 1 };
    let mut out = Vec::with_capacity(entries.len());
    for row in entries {
        let mut orow = Vec::with_capacity(row.len());
        for p in row {
            let (n, d) = rep.push_through(p)?;
            let bump = target - d % 2 - ((d / 2) * 2).min(target); // target - d, kept explicit
            let _ = bump;
            let extra = target - d;
            let n = if extra > 0 {
                unipoly_mulmod(&n, &unipoly_powmod(&rep.g0, extra, &rep.f), &rep.f)
            } else {
                n
            };
            orow.push(n);
        }
        out.push(orow);
    }
    Ok(out)
}

/// The number of negative eigenvalues of a symmetric matrix of polynomials
/// evaluated at the point, via the characteristic polynomial and Descartes
/// counting (all eigenvalues are real).
pub fn negative_eigenvalue_count(
    entries: &[Vec<SparsePoly>],
    point: &RealAlgebraicPoint,
) -> Result<usize> {
    let mat = matrix_push_through(&point.rep, entries)?;
    let chi = berkowitz_charpoly(&mat, &point.rep.f);
    let rows = point.rep.signs_of_unipolys(&chi)?;
    let signs = rows
        .get(point.root_index)
        .ok_or_else(|| Error::Internal("root index out of range".into()))?;
    descartes_negative_count(signs)
}

/// Whether the negative eigenspace of the restricted Hessian at the collapsed
/// critical point lies inside L ∩ L_π: true iff every isotypic scalar with
/// part size > 1 is positive at the point.
pub fn negative_eigenspace_in_fixed(
    q: &SparsePoly,
    pi: &crate::equivariant::BlockPartition,
    point: &RealAlgebraicPoint,
) -> Result<bool> {
    let scalars = isotypic_scalars(q, pi)?;
    if scalars.is_empty() {
        return Ok(true);
    }
    let refs: Vec<&SparsePoly> = scalars.iter().collect();
    let rows = point.rep.signs_of(&refs)?;
    let row = rows
        .get(point.root_index)
        .ok_or_else(|| Error::Internal("root index out of range".into()))?;
    if row.iter().any(|s| *s == Sign::Zero) {
        return Err(Error::DegenerateHessian);
    }
    Ok(row.iter().all(|s| *s == Sign::Pos))
}

/// The isotypic Hessian scalars of Q on the stratum π: for each part of size
/// > 1, the collapsed (∂²Q/∂X_a² − ∂²Q/∂X_a∂X_b) with a, b the first two
/// variables merged into that part.
pub fn isotypic_scalars(
    q: &SparsePoly,
    pi: &crate::equivariant::BlockPartition,
) -> Result<Vec<SparsePoly>> {
    let mut out = Vec::new();
    for range in pi.part_var_ranges() {
        if range.len() < 2 {
            continue;
        }
        let a = range.start;
        let b = range.start + 1;
        let daa = q.partial_derivative(a).partial_derivative(a);
        let dab = q.partial_derivative(a).partial_derivative(b);
        out.push(crate::equivariant::collapse(&daa.sub(&dab), pi)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polys::BlockSpec;
    use crate::scalars::rat_int;

    fn q() -> InfinitesimalTower {
        InfinitesimalTower::rationals()
    }

    fn vars(names: &[&str]) -> Arc<Vec<String>> {
        Arc::new(names.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn solve_single_double_root() {
        // {Z^2}: one point Z = 0
        let tw = q();
        let v = vars(&["Z"]);
        let z = SparsePoly::var(v.clone(), &tw, 0);
        let pts = exact_solve(&[z.pow(2)]).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(sign_at_point(&z, &pts[0]).unwrap(), Sign::Zero);
    }

    #[test]
    fn solve_sum_of_squares_point() {
        // {(Z-1)^2 + (W+2)^2}: single point (1, -2)
        let tw = q();
        let v = vars(&["Z", "W"]);
        let z = SparsePoly::var(v.clone(), &tw, 0);
        let w = SparsePoly::var(v.clone(), &tw, 1);
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let p = z.sub(&one).pow(2).add(&w.add(&one.scale_rat(&rat_int(2))).pow(2));
        let pts = exact_solve(&[p]).unwrap();
        assert_eq!(pts.len(), 1);
        let zm1 = z.sub(&one);
        let wp2 = w.add(&one.scale_rat(&rat_int(2)));
        assert_eq!(sign_at_point(&zm1, &pts[0]).unwrap(), Sign::Zero);
        assert_eq!(sign_at_point(&wp2, &pts[0]).unwrap(), Sign::Zero);
    }

    #[test]
    fn solve_two_points() {
        // {Z^2 - 2}: ±sqrt 2
        let tw = q();
        let v = vars(&["Z"]);
        let z = SparsePoly::var(v.clone(), &tw, 0);
        let two = SparsePoly::from_int(v.clone(), &tw, 2);
        let pts = exact_solve(&[z.pow(2).sub(&two)]).unwrap();
        assert_eq!(pts.len(), 2);
        let signs: Vec<Sign> = pts
            .iter()
            .map(|p| sign_at_point(&z, p).unwrap())
            .collect();
        assert_eq!(signs, vec![Sign::Neg, Sign::Pos]);
    }

    #[test]
    fn solve_circle_line() {
        // {x^2+y^2-2, x-y}: points (±1, ±1)
        let tw = q();
        let v = vars(&["X", "Y"]);
        let x = SparsePoly::var(v.clone(), &tw, 0);
        let y = SparsePoly::var(v.clone(), &tw, 1);
        let two = SparsePoly::from_int(v.clone(), &tw, 2);
        let sys = [x.pow(2).add(&y.pow(2)).sub(&two), x.sub(&y)];
        let pts = exact_solve(&sys).unwrap();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            assert_eq!(sign_at_point(&sys[0], p).unwrap(), Sign::Zero);
            assert_eq!(sign_at_point(&sys[1], p).unwrap(), Sign::Zero);
            let sx = sign_at_point(&x, p).unwrap();
            let sy = sign_at_point(&y, p).unwrap();
            assert_eq!(sx, sy);
            assert_ne!(sx, Sign::Zero);
        }
    }

    #[test]
    fn solve_trivariate() {
        // {x+y+z, x*y+2, z-1}: x+y=-1, xy=2 has no real solutions? disc = 1-8<0: none
        let tw = q();
        let v = vars(&["X", "Y", "Z"]);
        let x = SparsePoly::var(v.clone(), &tw, 0);
        let y = SparsePoly::var(v.clone(), &tw, 1);
        let z = SparsePoly::var(v.clone(), &tw, 2);
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        // {x+y+z, xy+2, z-1}: x+y = -1, xy = -2: points (1,-2,1), (-2,1,1)
        let sys = [
            x.add(&y).add(&z),
            x.mul(&y).add(&one.scale_rat(&rat_int(2))),
            z.sub(&one),
        ];
        let pts = exact_solve(&sys).unwrap();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            for s in &sys {
                assert_eq!(sign_at_point(s, p).unwrap(), Sign::Zero);
            }
        }
        // {x+y-3, xy-2, z-5}: x,y = 1,2
        let sys2 = [
            x.add(&y).sub(&one.scale_rat(&rat_int(3))),
            x.mul(&y).sub(&one.scale_rat(&rat_int(2))),
            z.sub(&one.scale_rat(&rat_int(5))),
        ];
        let pts = exact_solve(&sys2).unwrap();
        assert_eq!(pts.len(), 2);
        for p in &pts {
            for s in &sys2 {
                assert_eq!(sign_at_point(s, p).unwrap(), Sign::Zero);
            }
            assert_eq!(sign_at_point(&z.sub(&one.scale_rat(&rat_int(5))), p).unwrap(), Sign::Zero);
        }
    }

    #[test]
    fn berkowitz_and_descartes() {
        let tw = q();
        let one = FieldTowerElement::one(&tw);
        let zero = FieldTowerElement::zero(&tw);
        // f = T (dummy quotient), constant matrices
        let f = UniPoly::new(vec![zero.clone(), one.clone()]);
        let c = |v: i64| UniPoly::new(vec![FieldTowerElement::from_int(&tw, v)]);
        // diag(1, -1): one negative eigenvalue
        let m = vec![vec![c(1), c(0)], vec![c(0), c(-1)]];
        let chi = berkowitz_charpoly(&m, &f);
        // chi = λ^2 - 0λ - 1
        let signs: Vec<Sign> = chi.iter().map(|p| p.coeffs[0].sign()).collect();
        assert_eq!(descartes_negative_count(&signs).unwrap(), 1);
        // identity 3x3: none
        let m3 = vec![
            vec![c(1), c(0), c(0)],
            vec![c(0), c(1), c(0)],
            vec![c(0), c(0), c(1)],
        ];
        let chi = berkowitz_charpoly(&m3, &f);
        let signs: Vec<Sign> = chi.iter().map(|p| p.coeffs[0].sign()).collect();
        assert_eq!(descartes_negative_count(&signs).unwrap(), 0);
        // [[0,1],[1,0]]: eigenvalues ±1
        let m = vec![vec![c(0), c(1)], vec![c(1), c(0)]];
        let chi = berkowitz_charpoly(&m, &f);
        let signs: Vec<Sign> = chi.iter().map(|p| p.coeffs[0].sign()).collect();
        assert_eq!(descartes_negative_count(&signs).unwrap(), 1);
        // complementarity on a random-ish symmetric rational matrix
        let m = vec![
            vec![c(2), c(1), c(0)],
            vec![c(1), c(-3), c(2)],
            vec![c(0), c(2), c(1)],
        ];
        let chi = berkowitz_charpoly(&m, &f);
        let signs: Vec<Sign> = chi.iter().map(|p| p.coeffs[0].sign()).collect();
        let neg = descartes_negative_count(&signs).unwrap();
        let mneg: Vec<Vec<UniPoly<F>>> = m.iter().map(|r| r.iter().map(|p| p.neg()).collect()).collect();
        let chin = berkowitz_charpoly(&mneg, &f);
        let signsn: Vec<Sign> = chin.iter().map(|p| p.coeffs[0].sign()).collect();
        let pos = descartes_negative_count(&signsn).unwrap();
        assert_eq!(neg + pos, 3);
    }

    #[test]
    fn limits_of_points() {
        // points x = 1 + gamma and x = 1/gamma over Q<gamma>:
        // the first limits to 1, the second is dropped
        let tw = InfinitesimalTower::new(&["gamma"]).unwrap();
        let v = vars(&["X"]);
        let x = SparsePoly::var(v.clone(), &tw, 0);
        let g = SparsePoly::constant(v.clone(), FieldTowerElement::symbol(&tw, "gamma").unwrap());
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        // (x - 1 - gamma)(gamma x - 1) = 0
        let p = x.sub(&one).sub(&g).mul(&g.mul(&x).sub(&one));
        let pts = exact_solve(&[p]).unwrap();
        assert_eq!(pts.len(), 2);
        let limited = limit_bounded_points(&pts, "gamma").unwrap();
        assert_eq!(limited.len(), 1);
        let q0 = InfinitesimalTower::rationals();
        let vv = vars(&["X"]);
        let xm1 = SparsePoly::var(vv.clone(), &q0, 0).sub(&SparsePoly::from_int(vv.clone(), &q0, 1));
        assert_eq!(sign_at_point(&xm1, &limited[0]).unwrap(), Sign::Zero);
    }

    #[test]
    fn limits_merge_duplicates() {
        // {sqrt2 + gamma, sqrt2 - gamma}: single limit sqrt2
        let tw = InfinitesimalTower::new(&["gamma"]).unwrap();
        let v = vars(&["X"]);
        let x = SparsePoly::var(v.clone(), &tw, 0);
        let g = SparsePoly::constant(v.clone(), FieldTowerElement::symbol(&tw, "gamma").unwrap());
        let two = SparsePoly::from_int(v.clone(), &tw, 2);
        // ((x-gamma)^2 - 2)((x+gamma)^2 - 2) = 0: roots ±sqrt2 ± gamma
        let p = x.sub(&g).pow(2).sub(&two).mul(&x.add(&g).pow(2).sub(&two));
        let pts = exact_solve(&[p]).unwrap();
        assert_eq!(pts.len(), 4);
        let limited = limit_bounded_points(&pts, "gamma").unwrap();
        assert_eq!(limited.len(), 2);
        let q0 = InfinitesimalTower::rationals();
        let vv = vars(&["X"]);
        let xx = SparsePoly::var(vv.clone(), &q0, 0);
        let sq = xx.pow(2).sub(&SparsePoly::from_int(vv.clone(), &q0, 2));
        for l in &limited {
            assert_eq!(sign_at_point(&sq, l).unwrap(), Sign::Zero);
        }
    }

    #[test]
    fn drop_unbounded_keeps_bounded() {
        let tw = InfinitesimalTower::new(&["g"]).unwrap();
        let v = vars(&["X"]);
        let x = SparsePoly::var(v.clone(), &tw, 0);
        let g = SparsePoly::constant(v.clone(), FieldTowerElement::symbol(&tw, "g").unwrap());
        let one = SparsePoly::from_int(v.clone(), &tw, 1);
        let p = x.sub(&one).mul(&g.mul(&x).sub(&one));
        let pts = exact_solve(&[p]).unwrap();
        assert_eq!(pts.len(), 2);
        let kept = drop_unbounded(pts, "g").unwrap();
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn solve_with_infinitesimal_coeffs() {
        // {x^2 + y^2 - zeta}: circle of radius sqrt(zeta): not zero-dim... use
        // {x^2 - zeta, y}: two points (±sqrt zeta, 0)
        let tw = InfinitesimalTower::new(&["zeta"]).unwrap();
        let v = vars(&["X", "Y"]);
        let x = SparsePoly::var(v.clone(), &tw, 0);
        let y = SparsePoly::var(v.clone(), &tw, 1);
        let zeta = SparsePoly::constant(
            v.clone(),
            FieldTowerElement::symbol(&tw, "zeta").unwrap(),
        );
        let sys = [x.pow(2).sub(&zeta), y.clone()];
        let pts = exact_solve(&sys).unwrap();
        assert_eq!(pts.len(), 2);
        // both roots are infinitesimal but nonzero, of opposite signs
        let signs: Vec<Sign> = pts.iter().map(|p| sign_at_point(&x, p).unwrap()).collect();
        assert_eq!(signs, vec![Sign::Neg, Sign::Pos]);
        let b = BlockSpec::new(vec![2]).unwrap();
        let _ = b;
    }
}
