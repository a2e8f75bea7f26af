//! Desk-scale models of splitting-field Galois groups: a finite group `G`
//! acting on a `k`-module `M`, the semidirect product `Γ = M^m ⋊ G` with
//! its projection cocycles `ψ₁, …, ψ_m`, and the greedy search for an
//! element of `Γ` separating a given space of cohomology classes.
//!
//! The Chebotarev step of the global argument is replaced by explicit
//! element search in `Γ`: the returned element stands in for the Frobenius
//! of the promised place, and everything the argument needs from that
//! place factors through this image.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{kpoly, MatK};
use crate::rings::{FieldElem, FieldSpec};
use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// finite groups with a module action
// ---------------------------------------------------------------------------

/// A finite group given by its multiplication table, acting `k`-linearly
/// on `M = k^d`. Group axioms are verified on construction: exhaustively
/// for `|G| ≤ 200`, by seeded sampling above that.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupData {
    mul: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    action: Vec<MatK>,
}

impl FiniteGroupData {
    pub fn new(mul: Vec<Vec<usize>>, action: Vec<MatK>) -> Result<FiniteGroupData> {
        let n = mul.len();
        if n == 0
            || mul
                .iter()
                .any(|row| row.len() != n || row.iter().any(|&v| v >= n))
        {
            return Err(Error::BadInput("malformed multiplication table".into()));
        }
        if action.len() != n {
            return Err(Error::BadInput(
                "need one action matrix per group element".into(),
            ));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mul[e][g] == g && mul[g][e] == g))
            .ok_or_else(|| Error::BadInput("no identity element".into()))?;
        let mut inverse = vec![usize::MAX; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| mul[g][h] == identity && mul[h][g] == identity)
                .ok_or_else(|| Error::BadInput(format!("element {g} has no inverse")))?;
        }
        // associativity
        if n <= 200 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                            return Err(Error::BadInput(format!(
                                "associativity fails at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = SplitMix64::new(0x5eed);
            for _ in 0..100_000 {
                let (a, b, c) = (
                    rng.below(n as u64) as usize,
                    rng.below(n as u64) as usize,
                    rng.below(n as u64) as usize,
                );
                if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                    return Err(Error::BadInput(format!(
                        "associativity fails at ({a}, {b}, {c})"
                    )));
                }
            }
        }
        // action is a homomorphism by invertible matrices
        let d = action[identity].rows();
        for (g, m) in action.iter().enumerate() {
            if !m.is_square() || m.rows() != d {
                return Err(Error::BadInput("action matrices of mixed size".into()));
            }
            if !m.is_invertible() {
                return Err(Error::BadInput(format!(
                    "action of element {g} is singular"
                )));
            }
        }
        if !action[identity].is_identity() {
            return Err(Error::BadInput("identity must act trivially".into()));
        }
        let check_pair = |a: usize, b: usize| action[a].mul(&action[b]) == action[mul[a][b]];
        if n <= 500 {
            for a in 0..n {
                for b in 0..n {
                    if !check_pair(a, b) {
                        return Err(Error::BadInput(format!(
                            "action is not a homomorphism at ({a}, {b})"
                        )));
                    }
                }
            }
        } else {
            let mut rng = SplitMix64::new(0xac7);
            for _ in 0..100_000 {
                let (a, b) = (rng.below(n as u64) as usize, rng.below(n as u64) as usize);
                if !check_pair(a, b) {
                    return Err(Error::BadInput(format!(
                        "action is not a homomorphism at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(FiniteGroupData {
            mul,
            identity,
            inverse,
            action,
        })
    }

    /// Cyclic group of order `n` generated by the given action matrix
    /// (whose matrix order must divide `n`).
    pub fn cyclic(n: usize, generator: &MatK) -> Result<FiniteGroupData> {
        let mul = (0..n)
            .map(|i| (0..n).map(|j| (i + j) % n).collect())
            .collect();
        let mut action = Vec::with_capacity(n);
        let mut cur = MatK::identity(generator.spec(), generator.rows());
        for _ in 0..n {
            action.push(cur.clone());
            cur = cur.mul(generator);
        }
        if !cur.is_identity() {
            return Err(Error::BadInput("generator order does not divide n".into()));
        }
        FiniteGroupData::new(mul, action)
    }

    /// Direct product, acting on the same module through both factors
    /// (the factor actions must commute).
    pub fn direct_product_action(
        a: &FiniteGroupData,
        b: &FiniteGroupData,
    ) -> Result<FiniteGroupData> {
        let (na, nb) = (a.order(), b.order());
        let idx = |x: usize, y: usize| x * nb + y;
        let mut mul = vec![vec![0usize; na * nb]; na * nb];
        let mut action = Vec::with_capacity(na * nb);
        for x in 0..na {
            for y in 0..nb {
                for u in 0..na {
                    for v in 0..nb {
                        mul[idx(x, y)][idx(u, v)] = idx(a.mul[x][u], b.mul[y][v]);
                    }
                }
                action.push(a.action[x].mul(&b.action[y]));
            }
        }
        FiniteGroupData::new(mul, action)
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn dim(&self) -> usize {
        self.action[self.identity].rows()
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.action[self.identity].spec()
    }

    pub fn mul_elems(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv_elem(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn act(&self, g: usize) -> &MatK {
        &self.action[g]
    }

    pub fn mul_table(&self) -> &Vec<Vec<usize>> {
        &self.mul
    }

    pub fn action_matrices(&self) -> &[MatK] {
        &self.action
    }

    /// Greedy generating set.
    pub fn generators(&self) -> Vec<usize> {
        let n = self.order();
        let mut gens = vec![];
        let mut reached = vec![false; n];
        reached[self.identity] = true;
        let mut count = 1;
        for g in 0..n {
            if reached[g] {
                continue;
            }
            gens.push(g);
            // close the subgroup generated so far
            loop {
                let mut grew = false;
                for a in 0..n {
                    if !reached[a] {
                        continue;
                    }
                    for &s in &gens {
                        for prod in [self.mul[a][s], self.mul[s][a]] {
                            if !reached[prod] {
                                reached[prod] = true;
                                count += 1;
                                grew = true;
                            }
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            if count == n {
                break;
            }
        }
        gens
    }
}

// ---------------------------------------------------------------------------
// H¹(G, M) by generator bookkeeping
// ---------------------------------------------------------------------------

/// `H¹(G, M)`: dimension over `k` plus representative cocycles as value
/// tables on all of `G`.
#[derive(Debug, Clone)]
pub struct H1Result {
    pub dim: usize,
    pub z1_dim: usize,
    pub b1_dim: usize,
    /// `representatives[i][g]` is the value of the i-th representative at
    /// the group element `g`.
    pub representatives: Vec<Vec<Vec<FieldElem>>>,
}

/// Solve the cocycle identity `c(gh) = c(g) + g·c(h)` as a linear system
/// in the generator values. Every element's value is expressed through a
/// spanning tree of the Cayley graph; the remaining edges contribute the
/// constraint rows.
pub fn h1_finite(group: &FiniteGroupData, limit: usize) -> Result<H1Result> {
    let n = group.order();
    if n > limit {
        return Err(Error::SizeLimit(format!(
            "|G| = {n} exceeds the limit {limit}"
        )));
    }
    let spec = group.spec().clone();
    let d = group.dim();
    let gens = group.generators();
    let unknowns = gens.len() * d;

    // expression of c(g) as A_g · x, x the stacked generator values
    let mut expr: Vec<Option<MatK>> = vec![None; n];
    expr[group.identity()] = Some(MatK::zero(&spec, d, unknowns));
    let mut constraints: Vec<MatK> = vec![];
    let mut queue = std::collections::VecDeque::from([group.identity()]);
    let gen_selector = |si: usize| {
        MatK::from_fn(&spec, d, unknowns, |i, j| {
            if j == si * d + i {
                FieldElem::one(&spec)
            } else {
                FieldElem::zero(&spec)
            }
        })
    };
    while let Some(g) = queue.pop_front() {
        let a_g = expr[g].clone().unwrap();
        for (si, &s) in gens.iter().enumerate() {
            let gs = group.mul_elems(g, s);
            // c(gs) = c(g) + g·c(s)
            let rhs = a_g.add(&group.act(g).mul(&gen_selector(si)));
            match &expr[gs] {
                None => {
                    expr[gs] = Some(rhs);
                    queue.push_back(gs);
                }
                Some(existing) => constraints.push(existing.sub(&rhs)),
            }
        }
    }
    if expr.iter().any(|e| e.is_none()) {
        return Err(Error::defect(
            "generating set does not reach the whole group",
        ));
    }
    let mut sys = MatK::zero(&spec, 0, unknowns);
    for c in &constraints {
        sys = sys.vstack(c);
    }
    let z1_basis = sys.kernel_basis();
    let z1_dim = z1_basis.len();

    // coboundaries: m ↦ (s·m − m)_s
    let cob = MatK::from_fn(&spec, unknowns, d, |i, j| {
        let (si, row) = (i / d, i % d);
        let s = gens[si];
        let v = group.act(s).at(row, j).clone();
        if row == j {
            v.sub(&FieldElem::one(&spec))
        } else {
            v
        }
    });
    let b1_dim = cob.rank();

    // quotient representatives: extend the coboundary image by Z¹ vectors
    let mut span = cob.transpose(); // rows span B¹ in generator coordinates
    let mut reps = vec![];
    for zv in &z1_basis {
        let cand = MatK::from_vec(&spec, 1, unknowns, zv.clone());
        let grown = span.vstack(&cand);
        if grown.rank() > span.rank() {
            span = grown;
            // tabulate the cocycle over all of G
            let table: Vec<Vec<FieldElem>> = (0..n)
                .map(|g| expr[g].as_ref().unwrap().apply(zv))
                .collect();
            reps.push(table);
        }
    }
    let dim = z1_dim - b1_dim;
    if reps.len() != dim {
        return Err(Error::defect(
            "H1 representative count does not match the dimension",
        ));
    }
    Ok(H1Result {
        dim,
        z1_dim,
        b1_dim,
        representatives: reps,
    })
}

// ---------------------------------------------------------------------------
// simplicity and endomorphisms over the prime field
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SimpleModuleReport {
    pub simple: bool,
    /// Whether simplicity was decided by exhausting all spin vectors.
    pub exhaustive: bool,
    /// `F_ℓ`-dimension of a proper invariant subspace, when one was found.
    pub proper_submodule_dim: Option<usize>,
    /// Order of the endomorphism field `End_{F_ℓ[G]}(M)`.
    pub end_field_order: u64,
    pub end_is_field: bool,
}

/// Restrict scalars to the prime field: each `k`-matrix becomes an
/// `rd × rd` matrix over `F_ℓ`.
fn restrict_scalars(m: &MatK) -> MatK {
    let spec = m.spec().clone();
    let r = spec.r();
    if r == 1 {
        return m.clone();
    }
    let prime = FieldSpec::new(spec.ell(), 1, None).expect("prime field");
    let d = m.rows();
    MatK::from_fn(&prime, d * r, d * r, |i, j| {
        let (bi, ri) = (i / r, i % r);
        let (bj, rj) = (j / r, j % r);
        // column rj of the multiplication-by-entry matrix
        let mut basis_vec = vec![0u64; r];
        basis_vec[rj] = 1;
        let x = FieldElem::new(&spec, basis_vec);
        let prod = m.at(bi, bj).mul(&x);
        FieldElem::from_int(&prime, prod.coeffs()[ri] as i64)
    })
}

/// Simplicity of `M` as an `F_ℓ[G]`-module (spin search with exhaustive
/// fallback at small sizes) and its endomorphism algebra, computed as the
/// commutant of the action.
pub fn simple_module_checks(
    group: &FiniteGroupData,
    exhaustive_cap: u64,
) -> Result<SimpleModuleReport> {
    let gens = group.generators();
    let prime_action: Vec<MatK> = if gens.is_empty() {
        vec![restrict_scalars(group.act(group.identity()))]
    } else {
        gens.iter()
            .map(|&g| restrict_scalars(group.act(g)))
            .collect()
    };
    let prime = prime_action[0].spec().clone();
    let dim = prime_action[0].rows();
    let total = (prime.ell() as u128).pow(dim as u32);

    let spin_dim = |seed: &Vec<FieldElem>| -> usize {
        // closure of span{seed} under the action
        let mut basis = MatK::from_fn(&prime, 1, dim, |_, j| seed[j].clone());
        loop {
            let mut grown = false;
            let rows = basis.rows();
            for g in &prime_action {
                for i in 0..rows {
                    let v: Vec<FieldElem> = (0..dim).map(|j| basis.at(i, j).clone()).collect();
                    let img = g.apply(&v);
                    let cand = basis.vstack(&MatK::from_vec(&prime, 1, dim, img));
                    if cand.rank() > basis.rank() {
                        basis = cand;
                        grown = true;
                    }
                }
            }
            if !grown {
                break;
            }
        }
        basis.rank()
    };

    let mut simple = true;
    let mut proper = None;
    let exhaustive = total <= exhaustive_cap as u128;
    if exhaustive {
        for idx in 1..total {
            let mut v = vec![];
            let mut rem = idx;
            for _ in 0..dim {
                v.push(FieldElem::from_index(
                    &prime,
                    (rem % prime.ell() as u128) as u64,
                ));
                rem /= prime.ell() as u128;
            }
            let sd = spin_dim(&v);
            if sd < dim {
                simple = false;
                proper = Some(sd);
                break;
            }
        }
    } else {
        let mut rng = SplitMix64::new(0x515e);
        for _ in 0..200 {
            let v: Vec<FieldElem> = (0..dim)
                .map(|_| FieldElem::from_index(&prime, rng.below(prime.ell())))
                .collect();
            if v.iter().all(|e| e.is_zero()) {
                continue;
            }
            let sd = spin_dim(&v);
            if sd < dim {
                simple = false;
                proper = Some(sd);
                break;
            }
        }
    }

    // commutant over F_ℓ
    let constraints: Vec<(&MatK, &MatK)> = prime_action.iter().map(|g| (g, g)).collect();
    let commutant = crate::linalg::intertwiner_basis(&constraints);
    let f = commutant.len();
    let end_field_order = prime.ell().pow(f as u32);
    // a finite-dimensional algebra is a field iff every nonzero element is
    // invertible; exhaust when small, otherwise rely on simplicity (Schur)
    let mut end_is_field = true;
    let space = (prime.ell() as u128).pow(f as u32);
    if space <= 100_000 {
        for mut idx in 1..space {
            let mut acc = MatK::zero(&prime, dim, dim);
            for b in &commutant {
                let c = (idx % prime.ell() as u128) as u64;
                idx /= prime.ell() as u128;
                if c != 0 {
                    acc = acc.add(&b.scalar_mul(&FieldElem::from_index(&prime, c)));
                }
            }
            if !acc.is_zero() && !acc.is_invertible() {
                end_is_field = false;
                break;
            }
        }
    } else {
        end_is_field = simple;
    }
    Ok(SimpleModuleReport {
        simple,
        exhaustive,
        proper_submodule_dim: proper,
        end_field_order,
        end_is_field,
    })
}

// ---------------------------------------------------------------------------
// the extension group Γ = M^m ⋊ G
// ---------------------------------------------------------------------------

/// Element of `Γ`: a vector in `M^m` (stored as `m` blocks of dimension
/// `d`) and a `G`-component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaElem {
    pub v: Vec<FieldElem>,
    pub g: usize,
}

/// `Γ = M^m ⋊ G` with multiplication `(v, g)(w, h) = (v + g·w, gh)`; the
/// block projections `ψᵢ(v, g) = vᵢ` are 1-cocycles by construction.
#[derive(Debug, Clone)]
pub struct ExtensionGroup {
    base: FiniteGroupData,
    copies: usize,
}

impl ExtensionGroup {
    /// Structural assembly with no representation-theoretic checks; use
    /// [`build_extension`] for the checked construction.
    pub fn assemble(base: FiniteGroupData, copies: usize) -> ExtensionGroup {
        ExtensionGroup { base, copies }
    }

    pub fn base(&self) -> &FiniteGroupData {
        &self.base
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn module_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        self.base.spec()
    }

    pub fn order(&self) -> u128 {
        let m_size = (self.spec().order() as u128).pow((self.module_dim() * self.copies) as u32);
        m_size * self.base.order() as u128
    }

    pub fn identity(&self) -> GammaElem {
        GammaElem {
            v: vec![FieldElem::zero(self.spec()); self.module_dim() * self.copies],
            g: self.base.identity(),
        }
    }

    pub fn mul(&self, a: &GammaElem, b: &GammaElem) -> GammaElem {
        let d = self.module_dim();
        let act = self.base.act(a.g);
        let mut v = a.v.clone();
        for blk in 0..self.copies {
            let w_blk: Vec<FieldElem> = b.v[blk * d..(blk + 1) * d].to_vec();
            let moved = act.apply(&w_blk);
            for (i, val) in moved.into_iter().enumerate() {
                v[blk * d + i] = v[blk * d + i].add(&val);
            }
        }
        GammaElem {
            v,
            g: self.base.mul_elems(a.g, b.g),
        }
    }

    /// `ψᵢ`, the i-th block projection (0-indexed).
    pub fn psi(&self, i: usize, elem: &GammaElem) -> Vec<FieldElem> {
        let d = self.module_dim();
        elem.v[i * d..(i + 1) * d].to_vec()
    }

    /// Value of a class `ξ = Σ aⱼψⱼ` given by its coefficient row.
    pub fn class_value(&self, coeffs: &[FieldElem], elem: &GammaElem) -> Vec<FieldElem> {
        assert_eq!(coeffs.len(), self.copies);
        let d = self.module_dim();
        let mut acc = vec![FieldElem::zero(self.spec()); d];
        for (j, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..d {
                acc[i] = acc[i].add(&c.mul(&elem.v[j * d + i]));
            }
        }
        acc
    }

    /// Check the cocycle identity `ψᵢ(ab) = ψᵢ(a) + a·ψᵢ(b)` on element
    /// pairs: exhaustively when `|Γ|² ≤ 10^6`, on seeded samples otherwise.
    pub fn verify_psi_cocycles(&self) -> bool {
        let check = |a: &GammaElem, b: &GammaElem| -> bool {
            let prod = self.mul(a, b);
            (0..self.copies).all(|i| {
                let lhs = self.psi(i, &prod);
                let rhs_tail = self.base.act(a.g).apply(&self.psi(i, b));
                let rhs: Vec<FieldElem> = self
                    .psi(i, a)
                    .iter()
                    .zip(&rhs_tail)
                    .map(|(x, y)| x.add(y))
                    .collect();
                lhs == rhs
            })
        };
        if self.order() * self.order() <= 1_000_000 {
            let all: Vec<GammaElem> = self.iter_elements().collect();
            all.iter().all(|a| all.iter().all(|b| check(a, b)))
        } else {
            let mut rng = SplitMix64::new(0xc0c);
            (0..10_000).all(|_| {
                let a = self.random_element(&mut rng);
                let b = self.random_element(&mut rng);
                check(&a, &b)
            })
        }
    }

    pub fn random_element(&self, rng: &mut SplitMix64) -> GammaElem {
        let spec = self.spec().clone();
        let v = (0..self.module_dim() * self.copies)
            .map(|_| FieldElem::from_index(&spec, rng.below(spec.order())))
            .collect();
        GammaElem {
            v,
            g: rng.below(self.base.order() as u64) as usize,
        }
    }

    /// Iterate every element; only sensible at small orders.
    pub fn iter_elements(&self) -> impl Iterator<Item = GammaElem> + '_ {
        let spec = self.spec().clone();
        let slots = self.module_dim() * self.copies;
        let m_size = (spec.order() as u128).pow(slots as u32);
        (0..self.base.order()).flat_map(move |g| {
            let spec = spec.clone();
            (0..m_size).map(move |mut idx| {
                let mut v = Vec::with_capacity(slots);
                for _ in 0..slots {
                    v.push(FieldElem::from_index(
                        &spec,
                        (idx % spec.order() as u128) as u64,
                    ));
                    idx /= spec.order() as u128;
                }
                GammaElem { v, g }
            })
        })
    }
}

/// Checked construction of `Γ`: requires `M` simple over the prime field
/// with endomorphism field `k`, and `H¹(G, M) = 0`; the projections are
/// verified to be independent cocycles.
pub fn build_extension(
    group: &FiniteGroupData,
    copies: usize,
    h1_limit: usize,
) -> Result<ExtensionGroup> {
    let report = simple_module_checks(group, 200_000)?;
    if !report.simple {
        return Err(Error::pre(format!(
            "module is not simple over the prime field (invariant subspace of dimension {:?})",
            report.proper_submodule_dim
        )));
    }
    if report.end_field_order != group.spec().order() {
        return Err(Error::pre(format!(
            "endomorphism field has order {} but k has order {}",
            report.end_field_order,
            group.spec().order()
        )));
    }
    let h1 = h1_finite(group, h1_limit)?;
    if h1.dim != 0 {
        return Err(Error::pre(format!("H1(G, M) has dimension {} ≠ 0", h1.dim)));
    }
    let gamma = ExtensionGroup::assemble(group.clone(), copies);
    if !gamma.verify_psi_cocycles() {
        return Err(Error::defect("projection maps fail the cocycle identity"));
    }
    // independence of ψᵢ in H¹(Γ, M): verify through H¹ of Γ when the
    // table fits, otherwise through the defining property (a combination
    // vanishing on the kernel M^m has zero coefficients)
    if copies > 0 {
        let gamma_order = gamma.order();
        if gamma_order <= h1_limit as u128 && gamma_order <= 2000 {
            let as_group = materialise(&gamma)?;
            let h1_gamma = h1_finite(&as_group, h1_limit)?;
            if h1_gamma.dim < copies {
                return Err(Error::defect("projections are dependent in H1(Γ, M)"));
            }
        } else {
            // ψ restricted to M^m ⋊ {e} is the plain coordinate projection;
            // a vanishing combination forces zero coefficients
            let spec = gamma.spec().clone();
            let d = gamma.module_dim();
            for i in 0..copies {
                let mut probe = gamma.identity();
                probe.v[i * d] = FieldElem::one(&spec);
                let val = gamma.psi(i, &probe);
                if val.iter().all(|e| e.is_zero()) {
                    return Err(Error::defect("projection vanishes on its own copy"));
                }
            }
        }
    }
    Ok(gamma)
}

/// Flatten `Γ` into an explicit [`FiniteGroupData`] (with the `G`-action
/// on `M` factored through the quotient); only for small orders.
pub fn materialise(gamma: &ExtensionGroup) -> Result<FiniteGroupData> {
    let order = gamma.order();
    if order > 2000 {
        return Err(Error::SizeLimit(format!(
            "|Γ| = {order} too large to materialise"
        )));
    }
    let elems: Vec<GammaElem> = gamma.iter_elements().collect();
    let index_of = |e: &GammaElem| elems.iter().position(|x| x == e).unwrap();
    let n = elems.len();
    let mut mul = vec![vec![0usize; n]; n];
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            mul[i][j] = index_of(&gamma.mul(a, b));
        }
    }
    let action: Vec<MatK> = elems
        .iter()
        .map(|e| gamma.base().act(e.g).clone())
        .collect();
    FiniteGroupData::new(mul, action)
}

// ---------------------------------------------------------------------------
// semisimplicity of one element
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SemisimpleReport {
    pub semisimple: bool,
    pub fixed_dim: usize,
    /// `M = M^g ⊕ (g−1)M` verified (dimension count and zero intersection).
    pub decomposition_verified: bool,
}

/// Squarefreeness of the minimal polynomial of `g` on `M`; when
/// semisimple, also verifies the decomposition `M = M^g ⊕ (g−1)M`.
pub fn semisimple_on(action: &MatK) -> SemisimpleReport {
    let spec = action.spec().clone();
    let minp = kpoly::min_poly(action);
    let deriv = kpoly::derivative(&minp, &spec);
    let g = kpoly::gcd(&minp, &deriv, &spec);
    let semisimple = g.len() == 1;
    let d = action.rows();
    let id = MatK::identity(&spec, d);
    let shifted = action.sub(&id);
    let fixed = shifted.kernel_basis();
    let fixed_dim = fixed.len();
    let mut verified = false;
    if semisimple {
        // (g−1)M has dimension rank(g−1); the sum is direct iff dims add up
        // and the stacked basis has full rank
        let image_rank = shifted.rank();
        if fixed_dim + image_rank == d {
            let mut all = MatK::zero(&spec, 0, d);
            for v in &fixed {
                all = all.vstack(&MatK::from_vec(&spec, 1, d, v.clone()));
            }
            all = all.vstack(&shifted.transpose());
            verified = all.rank() == d;
        }
    }
    SemisimpleReport {
        semisimple,
        fixed_dim,
        decomposition_verified: verified,
    }
}

// ---------------------------------------------------------------------------
// separating lifts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SeparationWitness {
    pub element: GammaElem,
    /// Rank of the class values in `M/(g−1)M`; equals the number of
    /// classes when the separation succeeded.
    pub value_rank: usize,
}

fn values_rank(
    gamma: &ExtensionGroup,
    classes: &[Vec<FieldElem>],
    g: usize,
    elem: &GammaElem,
) -> usize {
    let spec = gamma.spec().clone();
    let d = gamma.module_dim();
    // rank of class values modulo (g−1)M: stack (g−1) column space and the
    // values, subtract the image rank
    let shifted = gamma.base().act(g).sub(&MatK::identity(&spec, d));
    let mut stack = shifted.transpose(); // rows span (g−1)M
    let image_rank = stack.rank();
    for coeffs in classes {
        let val = gamma.class_value(coeffs, elem);
        stack = stack.vstack(&MatK::from_vec(&spec, 1, d, val));
    }
    stack.rank() - image_rank
}

/// Greedy construction of a lift `g̃ = (w, g)` on which the given classes
/// (rows of coefficients over the ψ-basis) stay independent modulo
/// `(g−1)M`. Follows the inductive choice of the proof: normalise the
/// classes to echelon form, then pick each pivot-copy component avoiding
/// the span of the previous values and `(g−1)M`, enumerating candidates in
/// a seed-shuffled order.
pub fn separating_lift(
    gamma: &ExtensionGroup,
    classes: &[Vec<FieldElem>],
    g: usize,
    seed: u64,
) -> Result<SeparationWitness> {
    let spec = gamma.spec().clone();
    let d = gamma.module_dim();
    let m = gamma.copies();
    if g >= gamma.base().order() {
        return Err(Error::BadInput("group element index out of range".into()));
    }
    for c in classes {
        if c.len() != m {
            return Err(Error::DimensionMismatch(
                "class coefficient width != copies".into(),
            ));
        }
    }
    let semis = semisimple_on(gamma.base().act(g));
    if !semis.semisimple {
        return Err(Error::pre("g does not act semisimply on M"));
    }
    if semis.fixed_dim < classes.len() {
        return Err(Error::pre(format!(
            "dim M^g = {} is smaller than dim V = {}",
            semis.fixed_dim,
            classes.len()
        )));
    }
    if classes.is_empty() {
        return Ok(SeparationWitness {
            element: GammaElem {
                v: vec![FieldElem::zero(&spec); d * m],
                g,
            },
            value_rank: 0,
        });
    }
    // normalise: row-reduce the coefficient matrix; classes must be independent
    let coeff = MatK::from_fn(&spec, classes.len(), m, |i, j| classes[i][j].clone());
    let (rref, pivots) = coeff.rref();
    if pivots.len() < classes.len() {
        return Err(Error::pre("classes are linearly dependent"));
    }
    let _ = rref;

    let shifted = gamma.base().act(g).sub(&MatK::identity(&spec, d));
    let image_rows = shifted.transpose();
    let mut chosen = MatK::zero(&spec, 0, d).vstack(&image_rows);
    let base_rank = image_rows.rank();
    let mut w = vec![FieldElem::zero(&spec); d * m];
    let mut rng = SplitMix64::new(seed);
    for (step, &pivot_copy) in pivots.iter().enumerate() {
        // enumerate M in a deterministic shuffled order
        let mut order: Vec<u64> = (0..spec.order().pow(d as u32)).collect();
        rng.shuffle(&mut order);
        let mut found = false;
        for idx in order {
            let mut x = Vec::with_capacity(d);
            let mut rem = idx;
            for _ in 0..d {
                x.push(FieldElem::from_index(&spec, rem % spec.order()));
                rem /= spec.order();
            }
            if x.iter().all(|e| e.is_zero()) {
                continue;
            }
            let cand = chosen.vstack(&MatK::from_vec(&spec, 1, d, x.clone()));
            if cand.rank() == base_rank + step + 1 {
                chosen = cand;
                for (i, val) in x.into_iter().enumerate() {
                    w[pivot_copy * d + i] = val;
                }
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::defect(
                "greedy choice exhausted although dim M^g ≥ dim V holds",
            ));
        }
    }
    let element = GammaElem { v: w, g };
    let value_rank = values_rank(gamma, classes, g, &element);
    if value_rank != classes.len() {
        return Err(Error::defect(
            "separating lift output fails the rank verification",
        ));
    }
    Ok(SeparationWitness {
        element,
        value_rank,
    })
}

/// Exhaustive witness set for small `Γ`: every `(w, g)` whose class values
/// have full rank modulo `(g−1)M`.
pub fn separating_witnesses(
    gamma: &ExtensionGroup,
    classes: &[Vec<FieldElem>],
    g: usize,
    limit: u128,
) -> Result<Vec<GammaElem>> {
    if gamma.order() > limit {
        return Err(Error::SizeLimit(format!(
            "|Γ| = {} exceeds {limit}",
            gamma.order()
        )));
    }
    let mut out = vec![];
    for e in gamma.iter_elements() {
        if e.g != g {
            continue;
        }
        if values_rank(gamma, classes, g, &e) == classes.len() {
            out.push(e);
        }
    }
    Ok(out)
}

/// One instance of the separation problem sharing the base group `G`.
#[derive(Debug, Clone)]
pub struct MultiInstance {
    pub gamma: ExtensionGroup,
    pub classes: Vec<Vec<FieldElem>>,
}

/// Combined separating lift for several pairwise-inequivalent modules over
/// the same `G`: one correction per instance, all over the same `g`. The
/// instances' modules must be simple with no intertwiners between
/// different instances (the disjointness hypothesis).
pub fn multi_module_separating_lift(
    instances: &[MultiInstance],
    g: usize,
    seed: u64,
) -> Result<Vec<SeparationWitness>> {
    if instances.is_empty() {
        return Err(Error::BadInput("no instances given".into()));
    }
    let base_table = instances[0].gamma.base().mul_table().clone();
    for inst in instances {
        if inst.gamma.base().mul_table() != &base_table {
            return Err(Error::pre("instances must share the base group"));
        }
        let report = simple_module_checks(inst.gamma.base(), 200_000)?;
        if !report.simple || !report.end_is_field {
            return Err(Error::pre(
                "each module must be simple with field endomorphisms",
            ));
        }
    }
    for i in 0..instances.len() {
        for j in 0..instances.len() {
            if i == j {
                continue;
            }
            let gi = instances[i].gamma.base();
            let gj = instances[j].gamma.base();
            let gens = gi.generators();
            let constraints: Vec<(&MatK, &MatK)> =
                gens.iter().map(|&s| (gi.act(s), gj.act(s))).collect();
            let cross = if constraints.is_empty() {
                // trivial group: any k-linear map intertwines
                vec![MatK::identity(gi.spec(), gi.dim())]
            } else {
                crate::linalg::intertwiner_basis(&constraints)
            };
            if !cross.is_empty() {
                return Err(Error::pre(format!(
                    "modules {i} and {j} admit a nonzero intertwiner; instances must be inequivalent"
                )));
            }
        }
    }
    instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            separating_lift(&inst.gamma, &inst.classes, g, seed.wrapping_add(i as u64))
        })
        .collect()
}
