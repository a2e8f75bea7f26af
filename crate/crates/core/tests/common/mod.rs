#![allow(dead_code)]

//! Shared instance generators for the acceptance suite. Everything is
//! driven by the deterministic SplitMix64 stream, so failures reproduce.

use std::sync::Arc;

use galois_lift::cohom::{self, LocalModule};
use galois_lift::linalg::MatK;
use galois_lift::rings::{q_orbits, FieldElem, FieldSpec};
use galois_lift::rng::SplitMix64;
use galois_lift::tame::{
    frobenius_for_tau, standard_tau_k, twist_unramified, TamePair, TypeFunction, TypePart,
};

pub fn field(ell: u64) -> Arc<FieldSpec> {
    FieldSpec::new(ell, 1, None).unwrap()
}

pub fn random_invertible(spec: &Arc<FieldSpec>, n: usize, rng: &mut SplitMix64) -> MatK {
    loop {
        let c = MatK::from_fn(spec, n, n, |_, _| {
            FieldElem::from_index(spec, rng.below(spec.order()))
        });
        if c.is_invertible() {
            return c;
        }
    }
}

/// Random type function over the available q-orbits with total degree ≤ max_dim.
pub fn random_type_function(
    spec: &Arc<FieldSpec>,
    q: u64,
    max_dim: usize,
    rng: &mut SplitMix64,
) -> TypeFunction {
    let orbits = q_orbits(spec, q).unwrap();
    loop {
        let mut per_orbit: Vec<Vec<u32>> = vec![vec![]; orbits.len()];
        let mut total = 0usize;
        let parts_wanted = 1 + rng.below(3) as usize;
        for _ in 0..parts_wanted {
            let oi = rng.below(orbits.len() as u64) as usize;
            let e = 1 + rng.below(2) as u32;
            let cost = orbits[oi].len() * e as usize;
            if total + cost > max_dim {
                continue;
            }
            per_orbit[oi].push(e);
            total += cost;
        }
        if total == 0 {
            continue;
        }
        let mut parts = vec![];
        for (oi, mut exps) in per_orbit.into_iter().enumerate() {
            if exps.is_empty() {
                continue;
            }
            exps.sort_unstable_by(|a, b| b.cmp(a));
            parts.push(TypePart {
                orbit: orbits[oi].clone(),
                exponents: exps,
            });
        }
        if let Ok(tf) = TypeFunction::new(parts) {
            return tf;
        }
    }
}

/// Random valid tame pair: a standard inertia matrix of a random type, a
/// solved Frobenius twisted by a random unramified unit, the whole pair
/// conjugated by a random invertible matrix.
pub fn random_pair(
    spec: &Arc<FieldSpec>,
    q: u64,
    max_dim: usize,
    rng: &mut SplitMix64,
) -> TamePair {
    let tf = random_type_function(spec, q, max_dim, rng);
    let t = standard_tau_k(&tf);
    let s = frobenius_for_tau(&t, q, rng.next_u64()).expect("standard type admits a Frobenius");
    let p = TamePair::new(q, t, s).expect("constructed pair satisfies the relation");
    let unit = FieldElem::from_index(spec, 1 + rng.below(spec.order() - 1));
    let p = twist_unramified(&p, &unit).unwrap();
    let c = random_invertible(spec, p.n(), rng);
    p.conjugate(&c).expect("conjugation preserves the relation")
}

/// Random valid local module of dimension ≤ 4, built from derived modules
/// of random pairs and unramified lines, with a random twist and dual.
pub fn random_module(spec: &Arc<FieldSpec>, q: u64, rng: &mut SplitMix64) -> LocalModule {
    loop {
        let p1 = random_pair(spec, q, 2, rng);
        let base = match rng.below(4) {
            0 => cohom::ad(&p1),
            1 => {
                if p1.n() == 1 {
                    cohom::ad(&p1)
                } else {
                    cohom::ad0(&p1)
                }
            }
            2 => {
                let p2 = random_pair(spec, q, 2, rng);
                match cohom::hom(&p1, &p2) {
                    Ok(m) => m,
                    Err(_) => continue,
                }
            }
            _ => {
                let phi = FieldElem::from_index(spec, 1 + rng.below(spec.order() - 1));
                let line = LocalModule::line(spec, q, &phi, &FieldElem::one(spec)).unwrap();
                match cohom::direct_sum(&line, &cohom::ad(&random_pair(spec, q, 1, rng))) {
                    Ok(m) => m,
                    Err(_) => continue,
                }
            }
        };
        if base.dim() > 4 || base.dim() == 0 {
            continue;
        }
        let twisted = cohom::twist(&base, rng.below(6) as i64 - 2);
        return if rng.below(2) == 0 {
            cohom::dual(&twisted)
        } else {
            twisted
        };
    }
}
