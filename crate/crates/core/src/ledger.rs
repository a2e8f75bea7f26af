//! Global dimension bookkeeping: Wiles' formula, the tangent-space
//! inequality, relation bounds for the global deformation ring, the
//! big-image thresholds, and the `N = 3` classification of local shapes
//! at ℓ.
//!
//! Everything here is dimension arithmetic over explicitly supplied local
//! data. Archimedean places enter with `dim T = 0` and their `H⁰`
//! subtracted, the convention matching the odd-ℓ form of the formula;
//! `ℓ = 2` is rejected wherever a residue characteristic appears.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rings::is_prime;

// ---------------------------------------------------------------------------
// local data and global problems
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaceKind {
    FiniteAwayFromEll,
    AboveEll,
    Real,
    Complex,
}

impl PlaceKind {
    pub fn is_archimedean(self) -> bool {
        matches!(self, PlaceKind::Real | PlaceKind::Complex)
    }
}

/// Per-place record: the local tangent dimension, `dim H⁰(F_v, ad⁰ρ̄)`,
/// smoothness of the local condition, and the relation count of its
/// deformation ring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalDatum {
    pub label: String,
    pub kind: PlaceKind,
    pub dim_t: u64,
    pub dim_h0: u64,
    #[serde(default)]
    pub smooth: bool,
    #[serde(default)]
    pub gen_jv: u64,
}

/// The ramification-set ledger for one global problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalProblem {
    pub n: u64,
    pub degree: u64,
    pub places: Vec<LocalDatum>,
    pub dual_selmer_dim: u64,
}

impl GlobalProblem {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::BadInput("N must be at least 2".into()));
        }
        if self.degree < 1 {
            return Err(Error::BadInput("[F:Q] must be at least 1".into()));
        }
        for p in &self.places {
            if p.kind.is_archimedean() && p.dim_t != 0 {
                return Err(Error::BadInput(format!(
                    "archimedean place {} must have dim_t = 0",
                    p.label
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Wiles' formula and its consequences
// ---------------------------------------------------------------------------

/// `Σ_v (dim T𝒟_v − dim H⁰(F_v, ad⁰ρ̄))` over every listed place; equals
/// `dim Selmer − dim dual Selmer`.
pub fn wiles_difference(p: &GlobalProblem) -> Result<i64> {
    p.validate()?;
    Ok(p.places
        .iter()
        .map(|d| d.dim_t as i64 - d.dim_h0 as i64)
        .sum())
}

/// `Σ dim T ≥ (N−2) + Σ dim H⁰`, with the margin
/// `Σ dim T − Σ dim H⁰ − (N−2)` reported.
pub fn tangent_inequality(p: &GlobalProblem) -> Result<(bool, i64)> {
    let diff = wiles_difference(p)?;
    let margin = diff - (p.n as i64 - 2);
    Ok((margin >= 0, margin))
}

/// `dim H⁰(ℝ, ad⁰ρ̄)` for complex conjugation with `m` eigenvalues `+1`:
/// `m² + (N−m)² − 1`.
pub fn infinity_h0(n: u64, m: u64) -> Result<u64> {
    if m > n {
        return Err(Error::BadInput(format!("m = {m} exceeds N = {n}")));
    }
    Ok(m * m + (n - m) * (n - m) - 1)
}

/// Number of power-series variables of the global deformation ring when
/// every finite local condition is smooth and the dual Selmer group dies:
/// `Σ dim T − Σ dim H⁰`.
pub fn smooth_variable_count(p: &GlobalProblem) -> Result<i64> {
    p.validate()?;
    for d in &p.places {
        if !d.kind.is_archimedean() && !d.smooth {
            return Err(Error::pre(format!(
                "place {} is not flagged smooth",
                d.label
            )));
        }
    }
    wiles_difference(p)
}

/// Upper bound for the relation count of the global deformation ring:
/// `Σ gen(J_v) + dim dual Selmer`. Zero exactly when all local rings are
/// smooth and the dual Selmer group is trivial.
pub fn relation_bound(p: &GlobalProblem) -> Result<u64> {
    p.validate()?;
    Ok(p.places.iter().map(|d| d.gen_jv).sum::<u64>() + p.dual_selmer_dim)
}

// ---------------------------------------------------------------------------
// big-image thresholds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigCheckInput {
    pub ell: u64,
    pub n: u64,
    pub degree: u64,
    /// `[F(χ̃):F]`
    pub d: u64,
    /// `(ℓ−1)/e = [F(χ̃, ω̄):F(χ̃)]`
    pub e: u64,
    /// For the `N = 3`, `F = Q`, `ℓ = 7` rule: the fixed field of `ad⁰ρ̄`
    /// avoids `cos(2π/7)`.
    #[serde(default)]
    pub gl3_cos2pi7_excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub threshold: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigCheckReport {
    pub criteria: Vec<Criterion>,
    pub fired: Option<String>,
    pub big: bool,
}

/// Evaluate each big-image criterion separately:
///   (i)  `ℓ > max(5, 2edN + 1)`;
///   (ii) `ℓ > 2·[F:Q]·N³ + 1` (sufficient with no knowledge of e, d);
///   (iii) `ℓ > N^(3·[F:Q]·N)`, in exact big-integer arithmetic;
///   (iv) the `GL₃/Q` rule `ℓ ≥ 7`, and for `ℓ = 7` the cosine exclusion.
pub fn big_check(input: &BigCheckInput) -> Result<BigCheckReport> {
    if !is_prime(input.ell) || input.ell == 2 {
        return Err(Error::BadInput(format!(
            "ell = {} must be an odd prime",
            input.ell
        )));
    }
    if input.n < 2 || input.degree < 1 || input.d < 1 || input.e < 1 {
        return Err(Error::BadInput(
            "N ≥ 2, degree ≥ 1, d ≥ 1, e ≥ 1 required".into(),
        ));
    }
    if !(input.ell - 1).is_multiple_of(input.e) {
        return Err(Error::BadInput(format!(
            "e = {} does not divide ℓ−1 = {}",
            input.e,
            input.ell - 1
        )));
    }
    if input.d > input.n {
        return Err(Error::BadInput(format!(
            "d = {} exceeds N = {}",
            input.d, input.n
        )));
    }
    if input.n * input.d < input.e {
        return Err(Error::BadInput(format!(
            "N·d = {} is smaller than e = {}",
            input.n * input.d,
            input.e
        )));
    }

    let mut criteria = vec![];
    let c1 = std::cmp::max(5, 2 * input.e * input.d * input.n + 1);
    criteria.push(Criterion {
        name: "C = max(5, 2edN+1)".into(),
        threshold: c1.to_string(),
        pass: input.ell > c1,
    });
    let c2 = 2 * input.degree * input.n.pow(3) + 1;
    criteria.push(Criterion {
        name: "2·[F:Q]·N^3 + 1".into(),
        threshold: c2.to_string(),
        pass: input.ell > c2,
    });
    let exponent = 3 * input.degree * input.n;
    let c3 = BigUint::from(input.n).pow(exponent as u32);
    criteria.push(Criterion {
        name: "N^(3·[F:Q]·N)".into(),
        threshold: c3.to_string(),
        pass: BigUint::from(input.ell) > c3,
    });
    if input.n == 3 && input.degree == 1 {
        let pass = input.ell >= 7 && (input.ell != 7 || input.gl3_cos2pi7_excluded);
        criteria.push(Criterion {
            name: "GL3/Q: ℓ ≥ 7 with cos(2π/7) exclusion at ℓ = 7".into(),
            threshold: "7".into(),
            pass,
        });
    }
    let fired = criteria.iter().find(|c| c.pass).map(|c| c.name.clone());
    let big = fired.is_some();
    Ok(BigCheckReport {
        criteria,
        fired,
        big,
    })
}

// ---------------------------------------------------------------------------
// N = 3 classification of the shape at ℓ
// ---------------------------------------------------------------------------

/// Description of one diagonal character `ω̄^power · (unramified)`, or a
/// ramified character that is not a cyclotomic power.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonDesc {
    OmegaPower { power: i64, unramified_twist: bool },
    NotOmegaPower,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gl3ShapeKind {
    /// Upper triangular with diagonal `(1, ω̄, ω̄²)·η`.
    TypeA,
    /// Upper triangular `(1, ε, ω̄)·η` with extension entries `x`, `z`.
    TypeB {
        epsilon: EpsilonDesc,
        x_split: bool,
        z_split: bool,
    },
    /// `ρ̄ ∼ ρ̄(1)` absolutely irreducible at residue characteristic `p`.
    TypeC { p: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllShapeGL3 {
    pub ell: u64,
    pub kind: Gl3ShapeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalCase {
    /// Upper-triangular deformations; `𝒩` = trace-zero upper triangular.
    A,
    /// Block shape `[[*,*,*],[*,*,*],[0,0,*]]`.
    B,
    /// Block shape `[[*,*,*],[0,*,*],[0,*,*]]`.
    C,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gl3Classification {
    pub shape_type: char,
    /// Local condition case and subspace data; absent for Type C, which is
    /// handled through the finite-image condition instead.
    pub case: Option<LocalCase>,
    pub dim_subspace: Option<u64>,
    pub subspace: Option<String>,
    pub obligations: Vec<String>,
    /// For Type C: the admissible `(p, ℓ)`.
    pub type_c: Option<(u64, u64)>,
}

/// Classify the shape of `ρ̄` at ℓ for `N = 3` and select the local
/// subspace `𝒩 ⊆ ad⁰ρ̄` defining the condition there.
pub fn classify_ell_gl3(shape: &EllShapeGL3) -> Result<Gl3Classification> {
    if !is_prime(shape.ell) || shape.ell < 7 {
        return Err(Error::BadInput(format!(
            "ell = {} must be a prime ≥ 7 for the N = 3 classification",
            shape.ell
        )));
    }
    let omega_order = shape.ell - 1; // order of ω̄ on Q_ℓ
    let norm = |p: i64| -> u64 { p.rem_euclid(omega_order as i64) as u64 };
    let mut obligations =
        vec!["composition series of N has no quotient isomorphic to k(1)".to_string()];
    match &shape.kind {
        Gl3ShapeKind::TypeA => Ok(Gl3Classification {
            shape_type: 'A',
            case: Some(LocalCase::A),
            dim_subspace: Some(5),
            subspace: Some("upper-triangular trace-zero".into()),
            obligations,
            type_c: None,
        }),
        Gl3ShapeKind::TypeB {
            epsilon,
            x_split,
            z_split,
        } => {
            // ε as an exact cyclotomic power, if it is one
            let power = match epsilon {
                EpsilonDesc::OmegaPower {
                    power,
                    unramified_twist: false,
                } => Some(norm(*power)),
                _ => None,
            };
            // non-splitting hypotheses of the Type B shape
            if power == Some(norm(-1)) {
                if *x_split {
                    return Err(Error::BadInput(
                        "Type B with ε = ω̄⁻¹ requires the extension class x to be non-split".into(),
                    ));
                }
                obligations.push("x is non-split (ε = ω̄⁻¹)".into());
            }
            if power == Some(2) {
                if *z_split {
                    return Err(Error::BadInput(
                        "Type B with ε = ω̄² requires the extension class z to be non-split".into(),
                    ));
                }
                obligations.push("z is non-split (ε = ω̄²)".into());
            }
            let (case, dim, subspace) = match power {
                Some(p) if p == 0 || p == norm(-1) => (
                    LocalCase::B,
                    6,
                    "rows 1-2 full, row 3 = (0, 0, *), trace zero",
                ),
                Some(1) | Some(2) => (
                    LocalCase::C,
                    6,
                    "row 1 full, rows 2-3 = (0, *, *), trace zero",
                ),
                _ => (LocalCase::A, 5, "upper-triangular trace-zero"),
            };
            Ok(Gl3Classification {
                shape_type: 'B',
                case: Some(case),
                dim_subspace: Some(dim),
                subspace: Some(subspace.into()),
                obligations,
                type_c: None,
            })
        }
        Gl3ShapeKind::TypeC { p } => {
            // comparing determinants of ρ̄ and ρ̄(1) gives ω̄³ = 1
            let cube = ((*p % shape.ell).pow(3)) % shape.ell;
            if cube != 1 || *p % shape.ell == 1 {
                return Err(Error::BadInput(
                    "Type C is inconsistent: comparing determinants gives ω̄³ = 1, \
                     which fails at this (p, ℓ)"
                        .into(),
                ));
            }
            if !is_prime(*p) {
                return Err(Error::BadInput(format!("p = {p} must be prime")));
            }
            obligations.push("ρ̄ at p is induced from a character of the ζ_ℓ-extension".into());
            Ok(Gl3Classification {
                shape_type: 'C',
                case: None,
                dim_subspace: None,
                subspace: None,
                obligations,
                type_c: Some((*p, shape.ell)),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// main-theorem dimension chain
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainLedgerReport {
    /// `Σ_{v|ℓ} [F_v:Q_ℓ](N²−1) = [F:Q](N²−1)`.
    pub ell_term: u64,
    /// `dim H⁰(ℝ, ad⁰ρ̄) = m² + (N−m)² − 1` at the distinguished real place.
    pub infinity_term: u64,
    /// Upper bound for the total archimedean `H⁰`: `([F:Q]−1)(N²−1)` plus
    /// the distinguished term.
    pub infinity_bound_total: u64,
    /// `ell_term − infinity_bound_total = 2m(N−m)`.
    pub margin: i64,
    pub tangent_inequality_holds: bool,
    /// Lower bound on the power-series variable count.
    pub variable_count_lower: i64,
    /// `N − 2`, the bound the variable count must meet.
    pub required_variables: u64,
}

/// Reproduce the dimension chain of the main-theorem count for a problem
/// with places above ℓ of the given degrees and a real place where
/// complex conjugation has `m` eigenvalues `+1`.
pub fn main_theorem_ledger(
    n: u64,
    degree: u64,
    m: u64,
    ell_places: &[u64],
    h3_holds: bool,
) -> Result<MainLedgerReport> {
    if n < 2 {
        return Err(Error::BadInput("N must be at least 2".into()));
    }
    if !h3_holds {
        return Err(Error::pre(
            "hypothesis H3 (vanishing of H⁰(F_v, ad⁰ρ̄(1)) above ℓ) must be asserted",
        ));
    }
    if m == 0 || m >= n {
        return Err(Error::pre(format!(
            "m = {m} must satisfy 1 ≤ m ≤ N−1 (ρ̄(c) is not scalar)"
        )));
    }
    if ell_places.is_empty() || ell_places.contains(&0) {
        return Err(Error::BadInput(
            "each place above ℓ needs degree ≥ 1".into(),
        ));
    }
    if ell_places.iter().sum::<u64>() != degree {
        return Err(Error::BadInput(format!(
            "Σ [F_v:Q_ℓ] = {} must equal [F:Q] = {degree}",
            ell_places.iter().sum::<u64>()
        )));
    }
    let nsq = n * n - 1;
    let ell_term = degree * nsq;
    let infinity_term = infinity_h0(n, m)?;
    let infinity_bound_total = (degree - 1) * nsq + infinity_term;
    let margin = ell_term as i64 - infinity_bound_total as i64;
    debug_assert_eq!(margin, (2 * m * (n - m)) as i64);
    Ok(MainLedgerReport {
        ell_term,
        infinity_term,
        infinity_bound_total,
        margin,
        tangent_inequality_holds: margin >= n as i64 - 2,
        variable_count_lower: margin,
        required_variables: n - 2,
    })
}
