//! Finite fields `GF(ℓ^r)` and truncated Witt rings `W(k)/ℓ^m`.
//!
//! `GF(ℓ^r)` is realised as `(Z/ℓ)[x]/(f)` for a monic irreducible `f`, and
//! `W(k)/ℓ^m` as `(Z/ℓ^m)[x]/(f̃)` where `f̃` is the entry-wise integer lift
//! of `f`. Any choice of lift gives the same ring up to isomorphism; the
//! Teichmüller structure is recovered by iterating the `ℓ^r`-power map, not
//! from the modulus.
//!
//! Elements are little-endian coefficient vectors of least non-negative
//! residues, which is also their serialised form.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// scalar and raw-polynomial helpers
// ---------------------------------------------------------------------------

#[inline]
fn addm(a: u64, b: u64, n: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % n as u128) as u64
}

#[inline]
fn subm(a: u64, b: u64, n: u64) -> u64 {
    let s = a as u128 + (n - b % n) as u128;
    (s % n as u128) as u64
}

#[inline]
fn mulm(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn powm(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulm(acc, base, n);
        }
        base = mulm(base, base, n);
        exp >>= 1;
    }
    acc
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse mod a prime.
fn inv_mod_prime(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    powm(a, p - 2, p)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense polynomials over `Z/p`, `p` prime; coefficient vectors are
/// little-endian and trimmed. Only what modulus validation needs.
mod zpoly {
    use super::{addm, inv_mod_prime, mulm, subm};

    pub fn trim(mut f: Vec<u64>) -> Vec<u64> {
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    pub fn mul(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
        if f.is_empty() || g.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; f.len() + g.len() - 1];
        for (i, &a) in f.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in g.iter().enumerate() {
                out[i + j] = addm(out[i + j], mulm(a, b, p), p);
            }
        }
        trim(out)
    }

    /// Remainder of `f` modulo monic-normalisable `g`.
    pub fn rem(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
        let g = trim(g.to_vec());
        assert!(!g.is_empty());
        let lead_inv = inv_mod_prime(*g.last().unwrap(), p);
        let mut r = trim(f.to_vec());
        while r.len() >= g.len() {
            let k = r.len() - g.len();
            let c = mulm(*r.last().unwrap(), lead_inv, p);
            for (i, &gc) in g.iter().enumerate() {
                r[k + i] = subm(r[k + i], mulm(c, gc, p), p);
            }
            r = trim(r);
        }
        r
    }

    pub fn gcd(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(f.to_vec());
        let mut b = trim(g.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        // normalise monic
        if let Some(&lead) = a.last() {
            let li = inv_mod_prime(lead, p);
            for c in &mut a {
                *c = mulm(*c, li, p);
            }
        }
        a
    }

    pub fn pow_mod(f: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut base = rem(f, modulus, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &base, p), modulus, p);
            }
            base = rem(&mul(&base, &base, p), modulus, p);
            e >>= 1;
        }
        acc
    }
}

/// Rabin's irreducibility test for a monic degree-`r` polynomial over `Z/p`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let r = f.len() - 1;
    if r == 0 {
        return false;
    }
    if r == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // x^(p^r) ≡ x mod f
    let mut fr = x.clone();
    for _ in 0..r {
        fr = zpoly::pow_mod(&fr, p, f, p);
    }
    if zpoly::trim(fr.clone()) != zpoly::trim(x.clone()) {
        return false;
    }
    // gcd(x^(p^(r/t)) - x, f) = 1 for each prime t | r
    let mut rr = r;
    let mut t = 2;
    let mut prime_divs = vec![];
    while rr > 1 {
        if rr.is_multiple_of(t) {
            prime_divs.push(t);
            while rr.is_multiple_of(t) {
                rr /= t;
            }
        }
        t += 1;
    }
    for t in prime_divs {
        let mut g = x.clone();
        for _ in 0..(r / t) {
            g = zpoly::pow_mod(&g, p, f, p);
        }
        // g - x
        let mut diff = g;
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = subm(diff[1], 1, p);
        let diff = zpoly::trim(diff);
        if diff.is_empty() {
            return false;
        }
        if zpoly::gcd(&diff, f, p).len() != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// FieldSpec / FieldElem
// ---------------------------------------------------------------------------

/// The coefficient field `k = GF(ℓ^r)`, presented as `(Z/ℓ)[x]/(modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    ell: u64,
    r: usize,
    /// Monic, degree `r`, irreducible over `Z/ℓ`; constant term first.
    modulus: Vec<u64>,
}

impl FieldSpec {
    pub fn new(ell: u64, r: usize, modulus: Option<Vec<u64>>) -> Result<Arc<FieldSpec>> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if r == 0 {
            return Err(Error::BadModulus { ell, degree: r });
        }
        let modulus = match modulus {
            Some(mut f) => {
                for c in &mut f {
                    *c %= ell;
                }
                if f.len() != r + 1 || *f.last().unwrap() != 1 || !is_irreducible(&f, ell) {
                    return Err(Error::BadModulus { ell, degree: r });
                }
                f
            }
            None => {
                if r == 1 {
                    vec![0, 1] // k = Z/ℓ as (Z/ℓ)[x]/(x)
                } else {
                    return Self::generate(ell, r);
                }
            }
        };
        // keep ℓ^(r·something) representable; desk scale only
        (ell as u128)
            .checked_pow(r as u32)
            .filter(|&o| o <= 1 << 62)
            .ok_or_else(|| Error::SizeLimit(format!("field order {ell}^{r} too large")))?;
        Ok(Arc::new(FieldSpec { ell, r, modulus }))
    }

    /// First irreducible monic polynomial of degree `r` in index order.
    pub fn generate(ell: u64, r: usize) -> Result<Arc<FieldSpec>> {
        if !is_prime(ell) {
            return Err(Error::NotPrime(ell));
        }
        if r == 1 {
            return FieldSpec::new(ell, 1, None);
        }
        let total = (ell as u128).pow(r as u32);
        if total > 1 << 24 {
            return Err(Error::SizeLimit("modulus search space too large".into()));
        }
        for idx in 0..total {
            let mut f = Vec::with_capacity(r + 1);
            let mut v = idx;
            for _ in 0..r {
                f.push((v % ell as u128) as u64);
                v /= ell as u128;
            }
            f.push(1);
            if is_irreducible(&f, ell) {
                return Ok(Arc::new(FieldSpec { ell, r, modulus: f }));
            }
        }
        unreachable!("irreducible polynomials exist in every degree");
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// `ℓ^r`, the number of field elements.
    pub fn order(&self) -> u64 {
        (self.ell as u128).pow(self.r as u32) as u64
    }
}

/// An element of `GF(ℓ^r)` in power-basis coordinates, constant term first.
#[derive(Clone)]
pub struct FieldElem {
    spec: Arc<FieldSpec>,
    c: Vec<u64>,
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.r == 1 {
            write!(f, "{}", self.c[0])
        } else {
            write!(f, "{:?}", self.c)
        }
    }
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.c == other.c
    }
}
impl Eq for FieldElem {}

impl FieldElem {
    pub fn new(spec: &Arc<FieldSpec>, mut coeffs: Vec<u64>) -> FieldElem {
        coeffs.resize(spec.r, 0);
        for c in &mut coeffs {
            *c %= spec.ell;
        }
        FieldElem {
            spec: spec.clone(),
            c: coeffs,
        }
    }

    pub fn zero(spec: &Arc<FieldSpec>) -> FieldElem {
        FieldElem {
            spec: spec.clone(),
            c: vec![0; spec.r],
        }
    }

    pub fn one(spec: &Arc<FieldSpec>) -> FieldElem {
        let mut c = vec![0; spec.r];
        c[0] = 1;
        FieldElem {
            spec: spec.clone(),
            c,
        }
    }

    pub fn from_int(spec: &Arc<FieldSpec>, v: i64) -> FieldElem {
        let ell = spec.ell as i64;
        let mut c = vec![0; spec.r];
        c[0] = v.rem_euclid(ell) as u64;
        FieldElem {
            spec: spec.clone(),
            c,
        }
    }

    /// Element with little-endian base-ℓ digits of `idx` as coordinates.
    pub fn from_index(spec: &Arc<FieldSpec>, mut idx: u64) -> FieldElem {
        let mut c = vec![0; spec.r];
        for slot in c.iter_mut() {
            *slot = idx % spec.ell;
            idx /= spec.ell;
        }
        FieldElem {
            spec: spec.clone(),
            c,
        }
    }

    /// Inverse of [`FieldElem::from_index`]; a canonical discrete ordering.
    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        for &c in self.c.iter().rev() {
            idx = idx * self.spec.ell + c;
        }
        idx
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&c| c == 0)
    }

    fn assert_same(&self, other: &FieldElem) {
        assert!(self.spec == other.spec, "field spec mismatch");
    }

    pub fn add(&self, other: &FieldElem) -> FieldElem {
        self.assert_same(other);
        let ell = self.spec.ell;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| addm(a, b, ell))
            .collect();
        FieldElem {
            spec: self.spec.clone(),
            c,
        }
    }

    pub fn sub(&self, other: &FieldElem) -> FieldElem {
        self.assert_same(other);
        let ell = self.spec.ell;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| subm(a, b, ell))
            .collect();
        FieldElem {
            spec: self.spec.clone(),
            c,
        }
    }

    pub fn neg(&self) -> FieldElem {
        let ell = self.spec.ell;
        let c = self.c.iter().map(|&a| subm(0, a, ell)).collect();
        FieldElem {
            spec: self.spec.clone(),
            c,
        }
    }

    pub fn mul(&self, other: &FieldElem) -> FieldElem {
        self.assert_same(other);
        let ell = self.spec.ell;
        let r = self.spec.r;
        let mut prod = vec![0u64; 2 * r - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                prod[i + j] = addm(prod[i + j], mulm(a, b, ell), ell);
            }
        }
        // reduce by the monic modulus
        for i in (r..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (j, &fc) in self.spec.modulus[..r].iter().enumerate() {
                prod[i - r + j] = subm(prod[i - r + j], mulm(c, fc, ell), ell);
            }
        }
        prod.truncate(r);
        FieldElem {
            spec: self.spec.clone(),
            c: prod,
        }
    }

    pub fn pow(&self, mut e: u64) -> FieldElem {
        let mut acc = FieldElem::one(&self.spec);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn inverse(&self) -> Result<FieldElem> {
        if self.is_zero() {
            return Err(Error::NotInvertible);
        }
        // x^(ℓ^r - 2); the group of units is cyclic of order ℓ^r - 1
        Ok(self.pow(self.spec.order() - 2))
    }

    /// Power with arbitrary sign; negative exponents invert first.
    pub fn pow_i(&self, e: i64) -> Result<FieldElem> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }
}

/// Smallest `n ≥ 1` with `a^n = 1`; divides `ℓ^r − 1`.
pub fn mult_order(a: &FieldElem) -> Result<u64> {
    if a.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut acc = a.clone();
    let mut n = 1u64;
    while !acc.is_one() {
        acc = acc.mul(a);
        n += 1;
    }
    Ok(n)
}

// ---------------------------------------------------------------------------
// q-orbits
// ---------------------------------------------------------------------------

/// One orbit of `α ↦ α^q` on the elements of `k^×` of order prime to `q`,
/// listed as the cycle `[rep, rep^q, rep^(q²), …]` starting from the element
/// of smallest index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QOrbit {
    q: u64,
    elements: Vec<FieldElem>,
}

impl QOrbit {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn elements(&self) -> &[FieldElem] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn rep(&self) -> &FieldElem {
        &self.elements[0]
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.elements[0].spec()
    }

    pub fn contains(&self, x: &FieldElem) -> bool {
        self.elements.iter().any(|e| e == x)
    }

    /// Rebuild the orbit of `x` and check it is exactly this one; validates
    /// closure under `α ↦ α^q` and the order condition.
    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::BadInput("empty orbit".into()));
        }
        let rebuilt = QOrbit::of_element(self.rep(), self.q)?;
        if rebuilt != *self {
            return Err(Error::BadInput(
                "malformed orbit: not a minimal q-power cycle".into(),
            ));
        }
        Ok(())
    }

    /// The orbit through a given nonzero element of order prime to `q`.
    pub fn of_element(x: &FieldElem, q: u64) -> Result<QOrbit> {
        if x.is_zero() {
            return Err(Error::ZeroElement);
        }
        let ord = mult_order(x)?;
        if gcd(ord, q) != 1 {
            return Err(Error::OrbitOrderSharesFactor { order: ord, q });
        }
        let mut cycle = vec![x.clone()];
        let mut cur = x.pow(q);
        while cur != *x {
            cycle.push(cur.clone());
            cur = cur.pow(q);
        }
        // canonical start: smallest index
        let min_pos = cycle
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| e.index())
            .map(|(i, _)| i)
            .unwrap();
        cycle.rotate_left(min_pos);
        Ok(QOrbit { q, elements: cycle })
    }
}

/// All orbits of `α ↦ α^q` on `{α ∈ k^× : gcd(ord(α), q) = 1}`, sorted by
/// smallest representative index.
pub fn q_orbits(spec: &Arc<FieldSpec>, q: u64) -> Result<Vec<QOrbit>> {
    if q < 2 {
        return Err(Error::BadInput(format!("q = {q} must be at least 2")));
    }
    if gcd(q, spec.ell()) != 1 {
        return Err(Error::NotCoprime {
            a: q,
            b: spec.ell(),
        });
    }
    let mut seen = vec![false; spec.order() as usize];
    let mut orbits = vec![];
    for idx in 1..spec.order() {
        if seen[idx as usize] {
            continue;
        }
        let x = FieldElem::from_index(spec, idx);
        let ord = mult_order(&x)?;
        if gcd(ord, q) != 1 {
            seen[idx as usize] = true;
            continue;
        }
        let orbit = QOrbit::of_element(&x, q)?;
        for e in orbit.elements() {
            seen[e.index() as usize] = true;
        }
        orbits.push(orbit);
    }
    orbits.sort_by_key(|o| o.rep().index());
    Ok(orbits)
}

// ---------------------------------------------------------------------------
// WittSpec / WittElem
// ---------------------------------------------------------------------------

/// The truncated Witt ring `W(k)/ℓ^m`, presented as
/// `(Z/ℓ^m)[x]/(lifted modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittSpec {
    field: Arc<FieldSpec>,
    m: u32,
    ellm: u64,
    /// Entry-wise integer lift of the field modulus.
    modulus: Vec<u64>,
}

impl WittSpec {
    pub fn new(field: &Arc<FieldSpec>, m: u32) -> Result<Arc<WittSpec>> {
        if m == 0 {
            return Err(Error::BadInput("precision m must be at least 1".into()));
        }
        let ellm = (field.ell() as u128)
            .checked_pow(m)
            .filter(|&v| v <= 1 << 62)
            .ok_or_else(|| Error::SizeLimit(format!("ell^m = {}^{} too large", field.ell(), m)))?
            as u64;
        Ok(Arc::new(WittSpec {
            field: field.clone(),
            m,
            ellm,
            modulus: field.modulus().to_vec(),
        }))
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn ell(&self) -> u64 {
        self.field.ell()
    }

    pub fn r(&self) -> usize {
        self.field.r()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// The coefficient modulus `ℓ^m`.
    pub fn ellm(&self) -> u64 {
        self.ellm
    }

    pub fn lifted_modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Same field, lower precision.
    pub fn with_precision(&self, m: u32) -> Result<Arc<WittSpec>> {
        WittSpec::new(&self.field, m)
    }
}

/// An element of `W(k)/ℓ^m`; coefficients in `[0, ℓ^m)`, constant term first.
#[derive(Clone)]
pub struct WittElem {
    spec: Arc<WittSpec>,
    c: Vec<u64>,
}

impl fmt::Debug for WittElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.spec.r() == 1 {
            write!(f, "{}", self.c[0])
        } else {
            write!(f, "{:?}", self.c)
        }
    }
}

impl PartialEq for WittElem {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.c == other.c
    }
}
impl Eq for WittElem {}

impl WittElem {
    pub fn new(spec: &Arc<WittSpec>, mut coeffs: Vec<u64>) -> WittElem {
        coeffs.resize(spec.r(), 0);
        for c in &mut coeffs {
            *c %= spec.ellm;
        }
        WittElem {
            spec: spec.clone(),
            c: coeffs,
        }
    }

    pub fn zero(spec: &Arc<WittSpec>) -> WittElem {
        WittElem {
            spec: spec.clone(),
            c: vec![0; spec.r()],
        }
    }

    pub fn one(spec: &Arc<WittSpec>) -> WittElem {
        let mut c = vec![0; spec.r()];
        c[0] = 1;
        WittElem {
            spec: spec.clone(),
            c,
        }
    }

    pub fn from_int(spec: &Arc<WittSpec>, v: i64) -> WittElem {
        let n = spec.ellm as i64;
        let mut c = vec![0; spec.r()];
        c[0] = v.rem_euclid(n) as u64;
        WittElem {
            spec: spec.clone(),
            c,
        }
    }

    /// Entry-wise lift of a field element (least non-negative residues).
    pub fn lift(spec: &Arc<WittSpec>, x: &FieldElem) -> WittElem {
        assert!(x.spec() == spec.field(), "field spec mismatch");
        WittElem {
            spec: spec.clone(),
            c: x.coeffs().to_vec(),
        }
    }

    pub fn spec(&self) -> &Arc<WittSpec> {
        &self.spec
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&c| c == 0)
    }

    /// Reduction mod ℓ.
    pub fn reduce(&self) -> FieldElem {
        let ell = self.spec.ell();
        FieldElem::new(self.spec.field(), self.c.iter().map(|&c| c % ell).collect())
    }

    /// Reduction to a lower precision `m'`.
    pub fn reduce_precision(&self, target: &Arc<WittSpec>) -> WittElem {
        assert!(target.field() == self.spec.field() && target.m() <= self.spec.m());
        WittElem::new(target, self.c.clone())
    }

    /// Reinterpret at higher precision via the entry-wise digit lift.
    pub fn lift_precision(&self, target: &Arc<WittSpec>) -> WittElem {
        assert!(target.field() == self.spec.field() && target.m() >= self.spec.m());
        WittElem::new(target, self.c.clone())
    }

    /// True when every coefficient is divisible by ℓ.
    pub fn divisible_by_ell(&self) -> bool {
        let ell = self.spec.ell();
        self.c.iter().all(|&c| c % ell == 0)
    }

    /// Exact coefficient-wise division by ℓ, landing in precision `m − 1`.
    pub fn div_exact_ell(&self, target: &Arc<WittSpec>) -> WittElem {
        assert!(self.divisible_by_ell(), "element not divisible by ell");
        assert_eq!(target.m() + 1, self.spec.m());
        let ell = self.spec.ell();
        WittElem::new(target, self.c.iter().map(|&c| c / ell).collect())
    }

    pub fn is_principal_unit(&self) -> bool {
        self.reduce().is_one()
    }

    fn assert_same(&self, other: &WittElem) {
        assert!(self.spec == other.spec, "witt spec mismatch");
    }

    pub fn add(&self, other: &WittElem) -> WittElem {
        self.assert_same(other);
        let n = self.spec.ellm;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| addm(a, b, n))
            .collect();
        WittElem {
            spec: self.spec.clone(),
            c,
        }
    }

    pub fn sub(&self, other: &WittElem) -> WittElem {
        self.assert_same(other);
        let n = self.spec.ellm;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| subm(a, b, n))
            .collect();
        WittElem {
            spec: self.spec.clone(),
            c,
        }
    }

    pub fn neg(&self) -> WittElem {
        let n = self.spec.ellm;
        let c = self.c.iter().map(|&a| subm(0, a, n)).collect();
        WittElem {
            spec: self.spec.clone(),
            c,
        }
    }

    pub fn mul(&self, other: &WittElem) -> WittElem {
        self.assert_same(other);
        let n = self.spec.ellm;
        let r = self.spec.r();
        let mut prod = vec![0u64; 2 * r - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                prod[i + j] = addm(prod[i + j], mulm(a, b, n), n);
            }
        }
        for i in (r..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (j, &fc) in self.spec.modulus[..r].iter().enumerate() {
                prod[i - r + j] = subm(prod[i - r + j], mulm(c, fc, n), n);
            }
        }
        prod.truncate(r);
        WittElem {
            spec: self.spec.clone(),
            c: prod,
        }
    }

    pub fn pow(&self, mut e: u64) -> WittElem {
        let mut acc = WittElem::one(&self.spec);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Newton lift of the residual inverse; errors on non-units.
    pub fn inverse(&self) -> Result<WittElem> {
        let res_inv = self.reduce().inverse()?;
        let mut x = WittElem::lift(&self.spec, &res_inv);
        // x ← x(2 − ax) doubles the precision of agreement each round
        let two = WittElem::from_int(&self.spec, 2);
        let mut prec = 1u32;
        while prec < self.spec.m() {
            x = x.mul(&two.sub(&self.mul(&x)));
            prec *= 2;
        }
        if !self.mul(&x).is_one() {
            return Err(Error::defect("unit inverse iteration failed to converge"));
        }
        Ok(x)
    }

    pub fn pow_i(&self, e: i64) -> Result<WittElem> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs()))
        }
    }
}

/// Teichmüller lift: the unique lift of `x` fixed by the `ℓ^r`-power map.
/// Computed by iterating `a ↦ a^(ℓ^r)` from the entry-wise lift; each
/// iteration gains at least one ℓ-adic digit of agreement, so `m − 1`
/// rounds suffice.
pub fn teichmuller(spec: &Arc<WittSpec>, x: &FieldElem) -> WittElem {
    let q = spec.field().order();
    let mut a = WittElem::lift(spec, x);
    for _ in 0..spec.m().saturating_sub(1) {
        a = a.pow(q);
    }
    debug_assert!(a.pow(q) == a, "Teichmüller iterate not fixed");
    a
}

/// The unique principal unit `ψ` with `ψ^n = u`, for `u ≡ 1 mod ℓ` and
/// `gcd(n, ℓ) = 1`. Hensel iteration with exact division by the unit `n`.
pub fn principal_unit_nth_root(u: &WittElem, n: u64) -> Result<WittElem> {
    let spec = u.spec().clone();
    if n == 0 || n.is_multiple_of(spec.ell()) {
        return Err(Error::RootDegreeDivisibleByEll { n, ell: spec.ell() });
    }
    if !u.is_principal_unit() {
        return Err(Error::NotPrincipalUnit);
    }
    let n_elem = WittElem::from_int(&spec, n as i64);
    let mut psi = WittElem::one(&spec);
    for _ in 0..=spec.m().ilog2() + 1 {
        if psi.pow(n) == *u {
            break;
        }
        // ψ ← ψ − (ψ^n − u) / (n ψ^(n−1))
        let deriv = n_elem.mul(&psi.pow(n - 1));
        let step = psi.pow(n).sub(u).mul(&deriv.inverse()?);
        psi = psi.sub(&step);
    }
    if psi.pow(n) != *u || !psi.is_principal_unit() {
        return Err(Error::defect(
            "principal-unit root iteration failed to converge",
        ));
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(ell: u64) -> Arc<FieldSpec> {
        FieldSpec::new(ell, 1, None).unwrap()
    }

    fn w(ell: u64, m: u32) -> Arc<WittSpec> {
        WittSpec::new(&f(ell), m).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            FieldSpec::new(6, 1, None),
            Err(Error::NotPrime(6))
        ));
        // x^2 + 1 is reducible mod 5 (roots ±2) but irreducible mod 7
        assert!(FieldSpec::new(5, 2, Some(vec![1, 0, 1])).is_err());
        assert!(FieldSpec::new(7, 2, Some(vec![1, 0, 1])).is_ok());
        let gen = FieldSpec::generate(5, 2).unwrap();
        assert!(is_irreducible(gen.modulus(), 5));
        assert_eq!(gen.order(), 25);
    }

    #[test]
    fn field_arithmetic_f25() {
        let k = FieldSpec::generate(5, 2).unwrap();
        // exhaustive: a * a^-1 = 1
        for idx in 1..k.order() {
            let a = FieldElem::from_index(&k, idx);
            assert!(a.mul(&a.inverse().unwrap()).is_one());
        }
        // the unit group has order 24
        for idx in 1..k.order() {
            let a = FieldElem::from_index(&k, idx);
            assert!(a.pow(24).is_one());
        }
    }

    #[test]
    fn mult_order_examples() {
        let k7 = f(7);
        assert_eq!(mult_order(&FieldElem::from_int(&k7, 1)).unwrap(), 1);
        assert_eq!(mult_order(&FieldElem::from_int(&k7, 3)).unwrap(), 6);
        let k5 = f(5);
        assert_eq!(mult_order(&FieldElem::from_int(&k5, 4)).unwrap(), 2);
        assert!(matches!(
            mult_order(&FieldElem::zero(&k5)),
            Err(Error::ZeroElement)
        ));
    }

    #[test]
    fn q_orbit_examples() {
        // F_7, q = 2: odd-order elements {1, 2, 4} split as {1}, {2, 4}
        let k7 = f(7);
        let orbits = q_orbits(&k7, 2).unwrap();
        let as_ints: Vec<Vec<u64>> = orbits
            .iter()
            .map(|o| o.elements().iter().map(|e| e.index()).collect())
            .collect();
        assert_eq!(as_ints, vec![vec![1], vec![2, 4]]);

        // F_5, q = 3: {1}, {2, 3}, {4}
        let k5 = f(5);
        let orbits = q_orbits(&k5, 3).unwrap();
        let as_ints: Vec<Vec<u64>> = orbits
            .iter()
            .map(|o| o.elements().iter().map(|e| e.index()).collect())
            .collect();
        assert_eq!(as_ints, vec![vec![1], vec![2, 3], vec![4]]);

        // q ≡ 1 mod ℓ−1 fixes everything: all singletons
        let orbits = q_orbits(&k7, 13).unwrap();
        assert_eq!(orbits.len(), 6);
        assert!(orbits.iter().all(|o| o.len() == 1));

        assert!(q_orbits(&k5, 10).is_err());
    }

    #[test]
    fn q_orbit_cycle_property() {
        // applying α ↦ α^q walks each orbit cyclically with period = size
        for (ell, q) in [(7u64, 2u64), (13, 2), (13, 3), (5, 3)] {
            let k = f(ell);
            for orbit in q_orbits(&k, q).unwrap() {
                let n = orbit.len();
                for (i, e) in orbit.elements().iter().enumerate() {
                    let next = e.pow(q);
                    assert_eq!(&next, &orbit.elements()[(i + 1) % n]);
                }
                orbit.validate().unwrap();
            }
        }
    }

    #[test]
    fn teichmuller_worked_values() {
        // ℓ=5, m=2: Teichmüller lift of 2 is 7 in Z/25
        let w25 = w(5, 2);
        let t = teichmuller(&w25, &FieldElem::from_int(&f(5), 2));
        assert_eq!(t.coeffs(), &[7]);
        // ℓ=7, m=2: lift of 3 is 31 in Z/49
        let w49 = w(7, 2);
        let t = teichmuller(&w49, &FieldElem::from_int(&f(7), 3));
        assert_eq!(t.coeffs(), &[31]);
        // idempotents lift to themselves
        assert!(teichmuller(&w25, &FieldElem::from_int(&f(5), 1)).is_one());
        assert!(teichmuller(&w25, &FieldElem::zero(&f(5))).is_zero());
    }

    #[test]
    fn teichmuller_multiplicative_exhaustive() {
        // exhaustive over ℓ^r ≤ 25, m ∈ {2, 3}
        for (ell, r) in [(5u64, 1usize), (7, 1), (13, 1), (3, 2), (5, 2)] {
            let k = FieldSpec::generate(ell, r).unwrap();
            for m in [2u32, 3] {
                let ws = WittSpec::new(&k, m).unwrap();
                for i in 0..k.order() {
                    for j in 0..k.order() {
                        let x = FieldElem::from_index(&k, i);
                        let y = FieldElem::from_index(&k, j);
                        let lhs = teichmuller(&ws, &x).mul(&teichmuller(&ws, &y));
                        let rhs = teichmuller(&ws, &x.mul(&y));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn teichmuller_unique_fixed_lift() {
        // at m = 2 the Teichmüller lift is the only lift fixed by x ↦ x^(ℓ^r)
        for (ell, r) in [(5u64, 1usize), (7, 1), (3, 2), (5, 2)] {
            let k = FieldSpec::generate(ell, r).unwrap();
            let ws = WittSpec::new(&k, 2).unwrap();
            let q = k.order();
            for idx in 0..k.order() {
                let x = FieldElem::from_index(&k, idx);
                let teich = teichmuller(&ws, &x);
                let mut fixed = 0;
                // enumerate all lifts of x: add ℓ·(anything) coefficient-wise
                let r_len = k.r();
                let total = ell.pow((r_len * ((ws.m() - 1) as usize)) as u32);
                for lift_idx in 0..total {
                    let mut c = x.coeffs().to_vec();
                    let mut v = lift_idx;
                    for slot in c.iter_mut() {
                        *slot += ell * (v % ell.pow(ws.m() - 1));
                        v /= ell.pow(ws.m() - 1);
                    }
                    let cand = WittElem::new(&ws, c);
                    if cand.pow(q) == cand {
                        fixed += 1;
                        assert_eq!(cand, teich);
                    }
                }
                assert_eq!(fixed, 1);
            }
        }
    }

    #[test]
    fn principal_unit_root_worked_values() {
        // ℓ=5, m=2: the cube root of 6 in 1 + 5·Z/25 is 11
        let w25 = w(5, 2);
        let u = WittElem::from_int(&w25, 6);
        let psi = principal_unit_nth_root(&u, 3).unwrap();
        assert_eq!(psi.coeffs(), &[11]);
        // ℓ=7, m=2: square root of 8 ≡ 1 mod 7
        let w49 = w(7, 2);
        let u = WittElem::from_int(&w49, 8);
        let psi = principal_unit_nth_root(&u, 2).unwrap();
        assert!(psi.is_principal_unit());
        assert_eq!(psi.pow(2), u);
        assert_eq!(psi.coeffs(), &[29]);
        // identity
        let one = WittElem::one(&w25);
        assert!(principal_unit_nth_root(&one, 4).unwrap().is_one());
        // errors
        assert!(principal_unit_nth_root(&WittElem::from_int(&w25, 2), 3).is_err());
        assert!(principal_unit_nth_root(&u, 7).is_err());
    }

    #[test]
    fn principal_unit_root_inverts_power_map() {
        // exhaustive on 1-units for ℓ^m ≤ 343
        for (ell, m) in [(5u64, 2u32), (5, 3), (7, 2), (7, 3), (3, 3)] {
            let ws = w(ell, m);
            let count = ell.pow(m - 1);
            for n in [2u64, 3, 4, 6] {
                if n % ell == 0 {
                    continue;
                }
                for t in 0..count {
                    let u = WittElem::from_int(&ws, (1 + ell * t) as i64);
                    let root = principal_unit_nth_root(&u, n).unwrap();
                    assert_eq!(root.pow(n), u);
                    // power-then-root is also the identity
                    assert_eq!(principal_unit_nth_root(&u.pow(n), n).unwrap(), u);
                }
            }
        }
    }

    #[test]
    fn witt_inverse_and_reduction() {
        let k = FieldSpec::generate(5, 2).unwrap();
        let ws = WittSpec::new(&k, 3).unwrap();
        for idx in 0..200 {
            let a = WittElem::new(&ws, vec![idx % 125, (idx * 7 + 3) % 125]);
            if a.reduce().is_zero() {
                assert!(a.inverse().is_err());
            } else {
                let inv = a.inverse().unwrap();
                assert!(a.mul(&inv).is_one());
            }
        }
        // reduce ∘ lift = id on field elements
        for idx in 0..k.order() {
            let x = FieldElem::from_index(&k, idx);
            assert_eq!(WittElem::lift(&ws, &x).reduce(), x);
        }
    }
}
