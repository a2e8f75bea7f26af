//! Tame local Galois representations as matrix pairs `(T, S)` with
//! `S·T·S⁻¹ = T^q`, their classification by type functions, and the
//! constructive lifting engine to `W(k)/ℓ^m`.
//!
//! The inertia image `T` of a pair over `k` is classified, up to
//! conjugation, by a type function: for each `q`-power orbit `x` of its
//! eigenvalues, the non-increasing exponent list of `P̄_x` in the primary
//! decomposition of the `k[T]`-module. Lifting fixes `T` to the exact
//! standard matrix over `W(k)/ℓ^m` (whose blocks are companions of the
//! `P_x^t` with Teichmüller-lifted roots) and Hensel-solves for `S` alone,
//! layer by layer; by smoothness of the tame condition every layer is
//! consistent, and an inconsistent layer is surfaced as an internal defect.

use std::sync::Arc;

use crate::cohom;
use crate::error::{Error, Result};
use crate::linalg::{self, kpoly, solve_k, solve_w, standard_inertia_matrix_k, MatK, MatW};
use crate::rings::{
    gcd, mult_order, principal_unit_nth_root, teichmuller, FieldElem, FieldSpec, QOrbit, WittElem,
    WittSpec,
};
use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// type functions
// ---------------------------------------------------------------------------

/// One primary part: a `q`-orbit of eigenvalues together with the
/// non-increasing exponents of its blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypePart {
    pub orbit: QOrbit,
    pub exponents: Vec<u32>,
}

/// The finitely supported map `(orbit, part index) ↦ exponent` classifying
/// a tame pair's inertia action. Parts are kept in canonical order (orbits
/// by smallest representative, exponents non-increasing) so equality of
/// type functions is plain structural equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeFunction {
    parts: Vec<TypePart>,
}

impl TypeFunction {
    pub fn new(mut parts: Vec<TypePart>) -> Result<TypeFunction> {
        if parts.is_empty() {
            return Err(Error::BadInput(
                "a type function needs at least one part".into(),
            ));
        }
        let q = parts[0].orbit.q();
        for p in &parts {
            p.orbit.validate()?;
            if p.orbit.q() != q {
                return Err(Error::BadInput("orbits with mixed q".into()));
            }
            if p.exponents.is_empty() || p.exponents.contains(&0) {
                return Err(Error::BadInput("exponents must be ≥ 1".into()));
            }
            if p.exponents.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::BadInput("exponents must be non-increasing".into()));
            }
        }
        parts.sort_by_key(|p| p.orbit.rep().index());
        for w in parts.windows(2) {
            if w[0].orbit.rep() == w[1].orbit.rep() {
                return Err(Error::BadInput("duplicate orbit in type function".into()));
            }
        }
        Ok(TypeFunction { parts })
    }

    pub fn parts(&self) -> &[TypePart] {
        &self.parts
    }

    pub fn q(&self) -> u64 {
        self.parts[0].orbit.q()
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.parts[0].orbit.spec()
    }

    /// Total degree `Σ |x| · t(x, i)`; equals the ambient dimension.
    pub fn dimension(&self) -> usize {
        self.parts
            .iter()
            .map(|p| p.orbit.len() * p.exponents.iter().map(|&e| e as usize).sum::<usize>())
            .sum()
    }
}

/// `P_x` over `k`: the monic polynomial with the orbit as its root set.
pub fn p_poly_k(orbit: &QOrbit) -> Vec<FieldElem> {
    kpoly::from_roots(orbit.elements(), orbit.spec())
}

/// `P_x` over `W(k)/ℓ^m`: roots are the Teichmüller lifts of the orbit.
pub fn p_poly_w(orbit: &QOrbit, wspec: &Arc<WittSpec>) -> Vec<WittElem> {
    let mut f = vec![WittElem::one(wspec)];
    for alpha in orbit.elements() {
        let root = teichmuller(wspec, alpha);
        f = wpoly_mul(&f, &[root.neg(), WittElem::one(wspec)], wspec);
    }
    f
}

fn wpoly_mul(f: &[WittElem], g: &[WittElem], wspec: &Arc<WittSpec>) -> Vec<WittElem> {
    let mut out = vec![WittElem::zero(wspec); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            out[i + j] = out[i + j].add(&a.mul(b));
        }
    }
    out
}

fn companion_w(f: &[WittElem], wspec: &Arc<WittSpec>) -> MatW {
    let d = f.len() - 1;
    assert!(d >= 1 && f[d].is_one());
    let mut m = MatW::zero(wspec, d, d);
    for i in 0..d - 1 {
        m.set(i + 1, i, WittElem::one(wspec));
    }
    for i in 0..d {
        m.set(i, d - 1, f[i].neg());
    }
    m
}

/// Standard inertia matrix of a type over `k`: block companions of `P̄_x^t`.
pub fn standard_tau_k(t: &TypeFunction) -> MatK {
    let parts: Vec<(QOrbit, Vec<u32>)> = t
        .parts()
        .iter()
        .map(|p| (p.orbit.clone(), p.exponents.clone()))
        .collect();
    standard_inertia_matrix_k(&parts, t.spec())
}

/// Standard inertia matrix over `W(k)/ℓ^m`; reduces mod ℓ to
/// [`standard_tau_k`].
pub fn standard_tau_w(t: &TypeFunction, wspec: &Arc<WittSpec>) -> MatW {
    let mut blocks = vec![];
    for part in t.parts() {
        let p = p_poly_w(&part.orbit, wspec);
        for &e in &part.exponents {
            let mut pe = vec![WittElem::one(wspec)];
            for _ in 0..e {
                pe = wpoly_mul(&pe, &p, wspec);
            }
            blocks.push(companion_w(&pe, wspec));
        }
    }
    MatW::block_diag(wspec, &blocks)
}

// ---------------------------------------------------------------------------
// pairs and validation
// ---------------------------------------------------------------------------

/// A tame pair over `k`: `τ ↦ T`, `σ ↦ S` with `S·T·S⁻¹ = T^q` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TamePair {
    q: u64,
    t: MatK,
    s: MatK,
}

/// A tame pair over `W(k)/ℓ^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TamePairW {
    q: u64,
    t: MatW,
    s: MatW,
}

/// One violated invariant, with entry coordinates when it is entry-wise.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PairViolation {
    pub what: String,
    pub row: Option<usize>,
    pub col: Option<usize>,
}

/// Outcome of checking the pair invariants; violations are reported, not
/// thrown.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PairCheck {
    pub ok: bool,
    pub violations: Vec<PairViolation>,
}

fn violation(what: impl Into<String>) -> PairViolation {
    PairViolation {
        what: what.into(),
        row: None,
        col: None,
    }
}

pub fn pair_validate_k(q: u64, t: &MatK, s: &MatK) -> PairCheck {
    let mut v = vec![];
    if !t.is_square() || !s.is_square() || t.rows() != s.rows() {
        v.push(violation("T and S must be square of equal size"));
        return PairCheck {
            ok: false,
            violations: v,
        };
    }
    if q < 2 {
        v.push(violation("q must be at least 2"));
    }
    if gcd(q, t.spec().ell()) != 1 {
        v.push(violation(format!(
            "q = {q} is not coprime to ell = {}",
            t.spec().ell()
        )));
    }
    if !t.is_invertible() {
        v.push(violation("T is not invertible"));
    }
    if !s.is_invertible() {
        v.push(violation("S is not invertible"));
    }
    if v.is_empty() {
        let lhs = s.mul(t);
        let rhs = t.pow(q).mul(s);
        for i in 0..t.rows() {
            for j in 0..t.cols() {
                if lhs.at(i, j) != rhs.at(i, j) {
                    v.push(PairViolation {
                        what: "relation S·T·S⁻¹ = T^q fails".into(),
                        row: Some(i),
                        col: Some(j),
                    });
                }
            }
        }
    }
    PairCheck {
        ok: v.is_empty(),
        violations: v,
    }
}

pub fn pair_validate_w(q: u64, t: &MatW, s: &MatW) -> PairCheck {
    let mut v = vec![];
    if !t.is_square() || !s.is_square() || t.rows() != s.rows() {
        v.push(violation("T and S must be square of equal size"));
        return PairCheck {
            ok: false,
            violations: v,
        };
    }
    if q < 2 {
        v.push(violation("q must be at least 2"));
    }
    if gcd(q, t.spec().ell()) != 1 {
        v.push(violation(format!(
            "q = {q} is not coprime to ell = {}",
            t.spec().ell()
        )));
    }
    if !t.is_invertible() {
        v.push(violation("T is not invertible"));
    }
    if !s.is_invertible() {
        v.push(violation("S is not invertible"));
    }
    if v.is_empty() {
        let lhs = s.mul(t);
        let rhs = t.pow(q).mul(s);
        for i in 0..t.rows() {
            for j in 0..t.cols() {
                if lhs.at(i, j) != rhs.at(i, j) {
                    v.push(PairViolation {
                        what: "relation S·T·S⁻¹ = T^q fails".into(),
                        row: Some(i),
                        col: Some(j),
                    });
                }
            }
        }
    }
    PairCheck {
        ok: v.is_empty(),
        violations: v,
    }
}

impl TamePair {
    pub fn new(q: u64, t: MatK, s: MatK) -> Result<TamePair> {
        let check = pair_validate_k(q, &t, &s);
        if !check.ok {
            return Err(Error::PairRelationViolated);
        }
        Ok(TamePair { q, t, s })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.t.rows()
    }

    pub fn tau(&self) -> &MatK {
        &self.t
    }

    pub fn sigma(&self) -> &MatK {
        &self.s
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.t.spec()
    }

    pub fn validate(&self) -> PairCheck {
        pair_validate_k(self.q, &self.t, &self.s)
    }

    /// `(C·T·C⁻¹, C·S·C⁻¹)`.
    pub fn conjugate(&self, c: &MatK) -> Result<TamePair> {
        let ci = c.inverse()?;
        TamePair::new(self.q, c.mul(&self.t).mul(&ci), c.mul(&self.s).mul(&ci))
    }
}

impl TamePairW {
    pub fn new(q: u64, t: MatW, s: MatW) -> Result<TamePairW> {
        let check = pair_validate_w(q, &t, &s);
        if !check.ok {
            return Err(Error::PairRelationViolated);
        }
        Ok(TamePairW { q, t, s })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.t.rows()
    }

    pub fn tau(&self) -> &MatW {
        &self.t
    }

    pub fn sigma(&self) -> &MatW {
        &self.s
    }

    pub fn spec(&self) -> &Arc<WittSpec> {
        self.t.spec()
    }

    pub fn validate(&self) -> PairCheck {
        pair_validate_w(self.q, &self.t, &self.s)
    }

    pub fn reduce(&self) -> TamePair {
        TamePair {
            q: self.q,
            t: self.t.reduce(),
            s: self.s.reduce(),
        }
    }

    pub fn conjugate(&self, c: &MatW) -> Result<TamePairW> {
        let ci = c.inverse()?;
        TamePairW::new(self.q, c.mul(&self.t).mul(&ci), c.mul(&self.s).mul(&ci))
    }
}

/// Some invertible `S` with `S·T·S⁻¹ = T^q`, found in the intertwiner span
/// of `T` against `T^q`. Errors when no tame pair with this inertia matrix
/// exists for the given `q`.
pub fn frobenius_for_tau(t: &MatK, q: u64, seed: u64) -> Result<MatK> {
    let basis = linalg::intertwiner_basis(&[(t, &t.pow(q))]);
    let mut rng = SplitMix64::new(seed);
    match linalg::find_invertible_in_span(&basis, &mut rng) {
        linalg::InvertibleSearch::Found(s) => Ok(s),
        linalg::InvertibleSearch::ExhaustedNone => Err(Error::pre(
            "no invertible S satisfies S·T·S⁻¹ = T^q; T is not conjugate to T^q",
        )),
        linalg::InvertibleSearch::Undecided { space_dim } => {
            Err(Error::SimilarityUndecided { space_dim })
        }
    }
}

/// Conjugator taking `p1` exactly to `p2` (both generators), if one exists.
pub fn is_similar_pair(p1: &TamePair, p2: &TamePair) -> Result<Option<MatK>> {
    if p1.spec() != p2.spec() {
        return Err(Error::RingMismatch("pairs over different fields".into()));
    }
    if p1.q() != p2.q() || p1.n() != p2.n() {
        return Err(Error::DimensionMismatch(
            "pair q or dimension mismatch".into(),
        ));
    }
    if p1 == p2 {
        return Ok(Some(MatK::identity(p1.spec(), p1.n())));
    }
    let mut rng = SplitMix64::new(0);
    linalg::simultaneous_conjugator(&p1.t, &p1.s, &p2.t, &p2.s, &mut rng)
}

// ---------------------------------------------------------------------------
// classification and lifting
// ---------------------------------------------------------------------------

/// Type function of a pair over `k`, with a conjugator `C` such that
/// `C⁻¹·T·C` is the standard inertia matrix of that type.
pub fn type_of(p: &TamePair) -> Result<(TypeFunction, MatK)> {
    let pd = linalg::primary_decomposition(&p.t, p.q)?;
    let parts = pd
        .parts
        .into_iter()
        .map(|(orbit, exponents)| TypePart { orbit, exponents })
        .collect();
    Ok((TypeFunction::new(parts)?, pd.conjugator))
}

/// Lift a residual tame pair to precision `m`. The inertia matrix of the
/// output is exactly the standard matrix of the pair's type over
/// `W(k)/ℓ^m`, and the returned conjugator `C̄` satisfies
/// `(C̄⁻¹·T̄·C̄, C̄⁻¹·S̄·C̄) = output mod ℓ`.
pub fn lift_tame(p: &TamePair, m: u32) -> Result<(TamePairW, MatK)> {
    let (tf, cbar) = type_of(p)?;
    let wspec = WittSpec::new(p.spec(), m)?;
    let t_w = standard_tau_w(&tf, &wspec);
    let cbar_inv = cbar.inverse()?;
    let s_bar = cbar_inv.mul(&p.s).mul(&cbar);
    if t_w.reduce() != cbar_inv.mul(&p.t).mul(&cbar) {
        return Err(Error::defect(
            "standard inertia matrix does not reduce to the conjugated input",
        ));
    }

    let s_w = if m == 1 {
        MatW::lift(&wspec, &s_bar)
    } else {
        let s0 = MatW::lift(&wspec, &s_bar);
        let residual = s0.mul(&t_w).sub(&t_w.pow(p.q).mul(&s0));
        if !residual.divisible_by_ell() {
            return Err(Error::defect("initial lift residual not divisible by ell"));
        }
        let low = wspec.with_precision(m - 1)?;
        let rhs_mat = residual.div_exact_ell(&low);
        let t_low = t_w.reduce_precision(&low);
        let n = p.n();
        // unknown Y over W_{m−1}: Y·T − T^q·Y = −residual/ℓ
        let op = MatW::identity(&low, n)
            .kron(&t_low.transpose())
            .sub(&t_low.pow(p.q).kron(&MatW::identity(&low, n)));
        let rhs: Vec<WittElem> = rhs_mat.vec().iter().map(|e| e.neg()).collect();
        let sol = solve_w(&op, &rhs).map_err(|e| match e {
            Error::InconsistentAtLayer { layer } => Error::defect(format!(
                "Hensel layer {} inconsistent while lifting sigma; smoothness violated; \
                 residual: {:?}",
                layer + 1,
                rhs_mat
            )),
            other => other,
        })?;
        let y = MatW::new(&low, n, n, sol.particular);
        let ell_scalar = WittElem::from_int(&wspec, wspec.ell() as i64);
        s0.add(&y.lift_precision(&wspec).scalar_mul(&ell_scalar))
    };

    let lifted = TamePairW::new(p.q, t_w, s_w)
        .map_err(|_| Error::defect("lifted pair fails the tame relation; smoothness violated"))?;
    // type must be preserved
    let (tf_out, _) = type_of(&lifted.reduce())?;
    if tf_out != tf {
        return Err(Error::defect("lift changed the type function"));
    }
    Ok((lifted, cbar))
}

// ---------------------------------------------------------------------------
// scalar extension
// ---------------------------------------------------------------------------

/// Extension of scalars along the canonical embedding `GF(ℓ^r) ↪ GF(ℓ^r')`
/// (the generator is sent to the root of the small modulus with smallest
/// index). Eigenvalues that were missing from `k` become available for
/// `type_of` after extension.
pub fn extend_scalars(p: &TamePair, r_new: usize) -> Result<TamePair> {
    let spec = p.spec().clone();
    let r = spec.r();
    if !r_new.is_multiple_of(r) {
        return Err(Error::pre(format!("{r} does not divide {r_new}")));
    }
    if r_new == r {
        return Ok(p.clone());
    }
    let big = FieldSpec::generate(spec.ell(), r_new)?;
    // root of the small modulus in the big field, smallest index first
    let modulus: Vec<FieldElem> = spec
        .modulus()
        .iter()
        .map(|&c| FieldElem::from_int(&big, c as i64))
        .collect();
    let mut beta = None;
    for idx in 0..big.order() {
        let cand = FieldElem::from_index(&big, idx);
        if kpoly::eval(&modulus, &cand, &big).is_zero() {
            beta = Some(cand);
            break;
        }
    }
    let beta = beta.ok_or_else(|| Error::defect("no root of the subfield modulus found"))?;
    let embed = |x: &FieldElem| -> FieldElem {
        let mut acc = FieldElem::zero(&big);
        let mut pw = FieldElem::one(&big);
        for &c in x.coeffs() {
            acc = acc.add(&pw.mul(&FieldElem::from_int(&big, c as i64)));
            pw = pw.mul(&beta);
        }
        acc
    };
    let t = MatK::from_fn(&big, p.n(), p.n(), |i, j| embed(p.t.at(i, j)));
    let s = MatK::from_fn(&big, p.n(), p.n(), |i, j| embed(p.s.at(i, j)));
    TamePair::new(p.q, t, s)
}

// ---------------------------------------------------------------------------
// products and twists
// ---------------------------------------------------------------------------

/// Tensor product in the basis order `v₁⊗w₁, …, v₁⊗w_m, …`.
pub fn tensor(p1: &TamePair, p2: &TamePair) -> Result<TamePair> {
    if p1.spec() != p2.spec() {
        return Err(Error::RingMismatch("tensor over different fields".into()));
    }
    if p1.q() != p2.q() {
        return Err(Error::DimensionMismatch("tensor with mismatched q".into()));
    }
    TamePair::new(p1.q, p1.t.kron(&p2.t), p1.s.kron(&p2.s))
}

pub fn tensor_w(p1: &TamePairW, p2: &TamePairW) -> Result<TamePairW> {
    if p1.spec() != p2.spec() {
        return Err(Error::RingMismatch("tensor over different rings".into()));
    }
    if p1.q() != p2.q() {
        return Err(Error::DimensionMismatch("tensor with mismatched q".into()));
    }
    TamePairW::new(p1.q, p1.t.kron(&p2.t), p1.s.kron(&p2.s))
}

/// Tate twist: `S ↦ q̄^j·S` over `k`. Inertia is untouched.
pub fn tate_twist(p: &TamePair, j: i64) -> TamePair {
    let qbar = FieldElem::from_int(p.spec(), p.q as i64);
    let factor = qbar.pow_i(j).expect("q is a unit in k");
    TamePair {
        q: p.q,
        t: p.t.clone(),
        s: p.s.scalar_mul(&factor),
    }
}

/// Tate twist over `W(k)/ℓ^m`: the cyclotomic value of Frobenius is the
/// integer `q`, never its Teichmüller lift.
pub fn tate_twist_w(p: &TamePairW, j: i64) -> TamePairW {
    let qw = WittElem::from_int(p.spec(), p.q as i64);
    let factor = qw.pow_i(j).expect("q is a unit in W");
    TamePairW {
        q: p.q,
        t: p.t.clone(),
        s: p.s.scalar_mul(&factor),
    }
}

/// Twist by an unramified character: `S ↦ c·S`.
pub fn twist_unramified(p: &TamePair, c: &FieldElem) -> Result<TamePair> {
    if c.is_zero() {
        return Err(Error::NotInvertible);
    }
    Ok(TamePair {
        q: p.q,
        t: p.t.clone(),
        s: p.s.scalar_mul(c),
    })
}

pub fn twist_unramified_w(p: &TamePairW, c: &WittElem) -> Result<TamePairW> {
    if c.reduce().is_zero() {
        return Err(Error::NotInvertible);
    }
    Ok(TamePairW {
        q: p.q,
        t: p.t.clone(),
        s: p.s.scalar_mul(c),
    })
}

// ---------------------------------------------------------------------------
// determinant control
// ---------------------------------------------------------------------------

/// A target determinant character, given by its values on the two
/// generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetTarget {
    pub on_sigma: WittElem,
    pub on_tau: WittElem,
}

impl DetTarget {
    pub fn new(on_sigma: WittElem, on_tau: WittElem) -> Result<DetTarget> {
        if on_sigma.reduce().is_zero() || on_tau.reduce().is_zero() {
            return Err(Error::NotInvertible);
        }
        Ok(DetTarget { on_sigma, on_tau })
    }

    /// The determinant of a pair, as a character of the tame group.
    pub fn of_pair(p: &TamePairW) -> DetTarget {
        DetTarget {
            on_sigma: p.sigma().det(),
            on_tau: p.tau().det(),
        }
    }

    /// Teichmüller lift of the determinant of a residual pair.
    pub fn teichmuller_of(p: &TamePair, wspec: &Arc<WittSpec>) -> DetTarget {
        DetTarget {
            on_sigma: teichmuller(wspec, &p.sigma().det()),
            on_tau: teichmuller(wspec, &p.tau().det()),
        }
    }
}

/// Twist a pair over `W(k)/ℓ^m` by the unique principal-unit character `ψ`
/// with `ψ^n = χ·det(p)⁻¹`, so the output has determinant exactly `χ` on
/// both generators.
pub fn twist_to_determinant(p: &TamePairW, chi: &DetTarget) -> Result<TamePairW> {
    let wspec = p.spec().clone();
    let n = p.n() as u64;
    if n.is_multiple_of(wspec.ell()) {
        return Err(Error::RootDegreeDivisibleByEll {
            n,
            ell: wspec.ell(),
        });
    }
    // any character of the tame group kills τ^(q−1)
    if !chi.on_tau.pow(p.q - 1).is_one() {
        return Err(Error::pre(
            "target on_tau is not a character value of tame inertia: on_tau^(q−1) ≠ 1",
        ));
    }
    let det_t = p.t.det();
    let det_s = p.s.det();
    if !det_t.pow(p.q - 1).is_one() {
        return Err(Error::defect("pair determinant violates det(T)^(q−1) = 1"));
    }
    let ratio_t = chi.on_tau.mul(&det_t.inverse()?);
    let ratio_s = chi.on_sigma.mul(&det_s.inverse()?);
    if !ratio_t.is_principal_unit() || !ratio_s.is_principal_unit() {
        return Err(Error::NotPrincipalUnit);
    }
    let psi_t = principal_unit_nth_root(&ratio_t, n)?;
    let psi_s = principal_unit_nth_root(&ratio_s, n)?;
    let out = TamePairW::new(p.q, p.t.scalar_mul(&psi_t), p.s.scalar_mul(&psi_s))?;
    if out.t.det() != chi.on_tau || out.s.det() != chi.on_sigma {
        return Err(Error::defect("determinant twist missed the target"));
    }
    Ok(out)
}

/// Lift, then twist the result to the Teichmüller lift of the residual
/// determinant: the unique lifting with Teichmüller determinant.
pub fn lift_with_teichmuller_det(p: &TamePair, m: u32) -> Result<(TamePairW, MatK)> {
    if (p.n() as u64).is_multiple_of(p.spec().ell()) {
        return Err(Error::RootDegreeDivisibleByEll {
            n: p.n() as u64,
            ell: p.spec().ell(),
        });
    }
    let (lifted, cbar) = lift_tame(p, m)?;
    let chi = DetTarget::teichmuller_of(p, lifted.spec());
    let out = twist_to_determinant(&lifted, &chi)?;
    Ok((out, cbar))
}

// ---------------------------------------------------------------------------
// induction from the unramified subextension of degree n
// ---------------------------------------------------------------------------

/// Induce a pair for the index-`n` subgroup `⟨σ^n, τ⟩` (whose residue size
/// is `q^n`) up to the full group. The output's `S` carries `p`'s Frobenius
/// block in the top-right corner with identity blocks below the diagonal,
/// and its `T` is block-diagonal in conjugated `q`-power twists of `p`'s
/// inertia. Restricting the output to `⟨σ^n, τ⟩` gives `p` back as the
/// first diagonal block.
pub fn induce_unramified(p: &TamePair, n: usize, q_base: u64) -> Result<TamePair> {
    if n < 2 {
        return Err(Error::pre("induction degree n must be at least 2"));
    }
    let expected = (q_base as u128).checked_pow(n as u32);
    if expected != Some(p.q as u128) {
        return Err(Error::pre(format!(
            "pair residue size {} is not q^n = {q_base}^{n}",
            p.q
        )));
    }
    let spec = p.spec().clone();
    let d = p.n();
    let s_inv = p.s.inverse()?;
    let qpow = (q_base as u128).pow((n - 1) as u32);
    if qpow > u64::MAX as u128 {
        return Err(Error::SizeLimit("q^(n−1) exceeds 64 bits".into()));
    }
    // T blocks: T_1 = T, T_{i+1} = S⁻¹·T_i^(q^(n−1))·S
    let mut t_blocks = vec![p.t.clone()];
    for _ in 1..n {
        let prev = t_blocks.last().unwrap();
        t_blocks.push(s_inv.mul(&prev.pow(qpow as u64)).mul(&p.s));
    }
    let t = MatK::block_diag(&spec, &t_blocks);
    let mut s = MatK::zero(&spec, n * d, n * d);
    for blk in 0..n - 1 {
        // B_blk → B_{blk+1} via the identity
        for i in 0..d {
            s.set((blk + 1) * d + i, blk * d + i, FieldElem::one(&spec));
        }
    }
    for i in 0..d {
        for j in 0..d {
            s.set(i, (n - 1) * d + j, p.s.at(i, j).clone());
        }
    }
    let induced = TamePair::new(q_base, t, s)
        .map_err(|_| Error::defect("induced pair fails the tame relation"))?;
    // restriction check: (T, S^n) is block-diagonal with p as the first block
    let s_n = induced.s.pow(n as u64);
    for i in 0..d {
        for j in 0..d {
            if s_n.at(i, j) != p.s.at(i, j) || induced.t.at(i, j) != p.t.at(i, j) {
                return Err(Error::defect(
                    "restriction does not contain the inducing pair",
                ));
            }
        }
        for j in d..n * d {
            if !s_n.at(i, j).is_zero() {
                return Err(Error::defect("restricted Frobenius is not block-diagonal"));
            }
        }
    }
    Ok(induced)
}

// ---------------------------------------------------------------------------
// Ramakrishna pairs
// ---------------------------------------------------------------------------

fn cyclotomic_diag(n: usize, q: u64, spec: &Arc<FieldSpec>) -> Result<MatK> {
    let qbar = FieldElem::from_int(spec, q as i64);
    if qbar.is_zero() {
        return Err(Error::NotCoprime {
            a: q,
            b: spec.ell(),
        });
    }
    let ord = mult_order(&qbar)?;
    if ord <= n as u64 {
        return Err(Error::pre(format!(
            "order of q̄ = {ord} must exceed the dimension n = {n}"
        )));
    }
    let mut s = MatK::zero(spec, n, n);
    for i in 0..n {
        s.set(i, i, qbar.pow((n - 1 - i) as u64));
    }
    Ok(s)
}

/// The Borel-shaped member of the Ramakrishna family: `S` is the
/// cyclotomic diagonal `diag(q̄^(n−1), …, q̄, 1)` and `T = exp(N̄)` for the
/// regular nilpotent superdiagonal `N̄` (truncated exponential, valid for
/// `ℓ > n`).
pub fn build_ramakrishna_pair(n: usize, q: u64, spec: &Arc<FieldSpec>) -> Result<TamePair> {
    if spec.ell() <= n as u64 {
        return Err(Error::pre(format!(
            "need ell > n, got ell = {}, n = {n}",
            spec.ell()
        )));
    }
    let s = cyclotomic_diag(n, q, spec)?;
    let mut nil = MatK::zero(spec, n, n);
    for i in 0..n - 1 {
        nil.set(i, i + 1, FieldElem::one(spec));
    }
    let mut t = MatK::identity(spec, n);
    let mut term = MatK::identity(spec, n);
    let mut factorial = FieldElem::one(spec);
    for j in 1..n {
        term = term.mul(&nil);
        factorial = factorial.mul(&FieldElem::from_int(spec, j as i64));
        t = t.add(&term.scalar_mul(&factorial.inverse()?));
    }
    TamePair::new(q, t, s)
}

/// The residual (unramified) shape of the Ramakrishna condition: `T = I`
/// and `S = diag(q̄^(n−1), …, q̄, 1)`. This is the diagonal cyclotomic
/// shape whose adjoint cohomology carries the `H¹ = H¹_nr ⊕ (tangent)`
/// complement property.
pub fn ramakrishna_residual_pair(n: usize, q: u64, spec: &Arc<FieldSpec>) -> Result<TamePair> {
    let s = cyclotomic_diag(n, q, spec)?;
    TamePair::new(q, MatK::identity(spec, n), s)
}

// ---------------------------------------------------------------------------
// block decomposition over W
// ---------------------------------------------------------------------------

/// Split a pair over `W(k)/ℓ^m` whose reduction is exactly block-diagonal
/// into lifts of its residual blocks. Requires hom-vanishing between the
/// residual blocks at every twist, which is what makes the decomposition
/// unique; returns the conjugator (≡ I mod ℓ) and the diagonal blocks.
pub fn decompose_blocks(p: &TamePairW, residual: &[TamePair]) -> Result<(MatW, Vec<TamePairW>)> {
    let wspec = p.spec().clone();
    let kspec = wspec.field().clone();
    let dims: Vec<usize> = residual.iter().map(|b| b.n()).collect();
    let total: usize = dims.iter().sum();
    if total != p.n() {
        return Err(Error::DimensionMismatch(
            "block dimensions do not sum to n".into(),
        ));
    }
    for b in residual {
        if b.q() != p.q() {
            return Err(Error::DimensionMismatch("block q mismatch".into()));
        }
        if b.spec() != &kspec {
            return Err(Error::RingMismatch("block field mismatch".into()));
        }
    }
    // reduction must be exactly block-diagonal with the given blocks
    let tbar = MatK::block_diag(
        &kspec,
        &residual.iter().map(|b| b.tau().clone()).collect::<Vec<_>>(),
    );
    let sbar = MatK::block_diag(
        &kspec,
        &residual
            .iter()
            .map(|b| b.sigma().clone())
            .collect::<Vec<_>>(),
    );
    if p.t.reduce() != tbar || p.s.reduce() != sbar {
        return Err(Error::pre(
            "reduction of the pair is not block-diagonal with the given blocks",
        ));
    }
    // uniqueness requires Hom(ρ̄_i, ρ̄_j(r)) = 0 for i ≠ j and all twists
    for i in 0..residual.len() {
        for j in 0..residual.len() {
            if i == j {
                continue;
            }
            if let Some(witness) = cohom::hom_vanishing_witness(&residual[i], &residual[j])? {
                return Err(Error::HomVanishingFails { i, j, witness });
            }
        }
    }

    let offsets: Vec<usize> = {
        let mut acc = 0;
        let mut v = vec![];
        for &d in &dims {
            v.push(acc);
            acc += d;
        }
        v
    };
    let mut t = p.t.clone();
    let mut s = p.s.clone();
    let mut u_total = MatW::identity(&wspec, total);
    let mut ell_pow = wspec.ell();
    for layer in 1..wspec.m() {
        // assemble the off-diagonal corrector X block by block
        let mut x = MatW::zero(&wspec, total, total);
        for i in 0..residual.len() {
            for j in 0..residual.len() {
                if i == j {
                    continue;
                }
                let (di, dj) = (dims[i], dims[j]);
                let t_off = t.submatrix(offsets[i], offsets[j], di, dj);
                let s_off = s.submatrix(offsets[i], offsets[j], di, dj);
                // divide by ℓ^layer and reduce mod ℓ
                let shift = |m: &MatW| -> Result<MatK> {
                    let mut out = MatK::zero(&kspec, m.rows(), m.cols());
                    for a in 0..m.rows() {
                        for b in 0..m.cols() {
                            let coeffs: Vec<u64> = m
                                .at(a, b)
                                .coeffs()
                                .iter()
                                .map(|&v| {
                                    if v % ell_pow != 0 {
                                        u64::MAX
                                    } else {
                                        (v / ell_pow) % wspec.ell()
                                    }
                                })
                                .collect();
                            if coeffs.contains(&u64::MAX) {
                                return Err(Error::defect(
                                    "off-diagonal block not divisible at current layer",
                                ));
                            }
                            out.set(a, b, FieldElem::new(&kspec, coeffs));
                        }
                    }
                    Ok(out)
                };
                let ct = shift(&t_off)?;
                let cs = shift(&s_off)?;
                // unknown X_ij over k: X·t̄_j − t̄_i·X = −ct and same for s̄
                let op_t = MatK::identity(&kspec, di)
                    .kron(&residual[j].tau().transpose())
                    .sub(&residual[i].tau().kron(&MatK::identity(&kspec, dj)));
                let op_s = MatK::identity(&kspec, di)
                    .kron(&residual[j].sigma().transpose())
                    .sub(&residual[i].sigma().kron(&MatK::identity(&kspec, dj)));
                let op = op_t.vstack(&op_s);
                let mut rhs: Vec<FieldElem> = ct.vec().iter().map(|e| e.neg()).collect();
                rhs.extend(cs.vec().iter().map(|e| e.neg()));
                let sol = solve_k(&op, &rhs)?;
                let Some(xv) = sol.particular else {
                    return Err(Error::defect(format!(
                        "block-cleaning layer {layer} inconsistent"
                    )));
                };
                if !sol.kernel.is_empty() {
                    return Err(Error::defect(
                        "nonzero intertwiner despite hom-vanishing precondition",
                    ));
                }
                let xm = MatK::from_vec(&kspec, di, dj, xv);
                for a in 0..di {
                    for b in 0..dj {
                        let lifted = WittElem::lift(&wspec, xm.at(a, b))
                            .mul(&WittElem::from_int(&wspec, ell_pow as i64));
                        x.set(offsets[i] + a, offsets[j] + b, lifted);
                    }
                }
            }
        }
        let u = MatW::identity(&wspec, total).add(&x);
        let u_inv = u.inverse()?;
        t = u.mul(&t).mul(&u_inv);
        s = u.mul(&s).mul(&u_inv);
        u_total = u.mul(&u_total);
        ell_pow *= wspec.ell();
    }

    // off-diagonal parts must now vanish exactly
    for i in 0..residual.len() {
        for j in 0..residual.len() {
            if i == j {
                continue;
            }
            if !t
                .submatrix(offsets[i], offsets[j], dims[i], dims[j])
                .is_zero()
                || !s
                    .submatrix(offsets[i], offsets[j], dims[i], dims[j])
                    .is_zero()
            {
                return Err(Error::defect("off-diagonal blocks survive all layers"));
            }
        }
    }
    if !u_total.reduce().is_identity() {
        return Err(Error::defect("conjugator is not ≡ I mod ell"));
    }
    let mut blocks = vec![];
    for (i, b) in residual.iter().enumerate() {
        let tb = t.submatrix(offsets[i], offsets[i], dims[i], dims[i]);
        let sb = s.submatrix(offsets[i], offsets[i], dims[i], dims[i]);
        let block = TamePairW::new(p.q, tb, sb)?;
        if block.reduce() != *b {
            return Err(Error::defect(
                "recovered block does not reduce to its residual",
            ));
        }
        blocks.push(block);
    }
    Ok((u_total, blocks))
}
