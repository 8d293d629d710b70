//! Brute-force checks of the three-atom operator algebra and of the
//! cancellation and vanishing claims built on it.
//!
//! Identities are stored as term lists: a coefficient times an ordered
//! product of single-atom factors, written compactly as `"2 1x2y3z"` or
//! `"i3/8 I"`. Both sides are rebuilt as dense 8x8 matrices and compared
//! entrywise.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::RotationAngles;
use crate::moments::{entanglement_s, entanglement_s_full, CorrelatorMode, RouteTolerance};
use crate::operators::{
    anticommutator_check, collective_op, collective_op_along, collective_op_dicke, single_atom_op,
    single_atom_op_along, total_spin_squared, Axis, Observable, OperatorMatrix, Space,
};
use crate::states::{binomial, full_to_dicke, FullState, ProductState, SymmetricState};

/// Residual bound for the three-atom identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Residual bound for commutator and spin-length checks.
pub const ALGEBRA_TOL: f64 = 1e-13;
/// Bound on S for uncorrelated product states.
pub const VANISHING_TOL: f64 = 1e-10;

const ORACLE_ATOMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub identity_id: String,
    pub max_abs_residual: f64,
    pub dim: usize,
    pub passed: bool,
}

impl IdentityResult {
    pub fn new(identity_id: impl Into<String>, max_abs_residual: f64, dim: usize, tol: f64) -> Self {
        Self { identity_id: identity_id.into(), max_abs_residual, dim, passed: max_abs_residual <= tol }
    }
}

/// One product `coeff * J_{a1 x1} J_{a2 x2} ...`; no factors means the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub factors: Vec<(usize, Axis)>,
}

impl Term {
    pub fn new(coeff: Complex64, factors: Vec<(usize, Axis)>) -> Self {
        Self { coeff, factors }
    }

    /// Number of distinct atoms the term acts on.
    pub fn order(&self) -> usize {
        let mut atoms: Vec<usize> = self.factors.iter().map(|f| f.0).collect();
        atoms.sort_unstable();
        atoms.dedup();
        atoms.len()
    }

    /// Factors on different atoms commute, so this sorts by atom where it can.
    fn canonical_key(&self) -> String {
        let mut f = self.factors.clone();
        if self.order() == f.len() {
            f.sort();
        }
        if f.is_empty() {
            return "I".into();
        }
        f.iter().map(|(a, x)| format!("{a}{}", x.as_char())).collect()
    }

    pub fn to_matrix(&self, n_atoms: usize) -> Result<OperatorMatrix> {
        let mut m = OperatorMatrix::identity(n_atoms, Space::Full);
        for &(atom, axis) in &self.factors {
            m = m.mul(&single_atom_op(atom, axis, n_atoms)?)?;
        }
        Ok(m.scale(self.coeff))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) {}", self.coeff.re, self.coeff.im, self.canonical_key())
    }
}

fn parse_coeff(tok: &str) -> Result<Complex64> {
    let bad = || Error::Internal(format!("bad coefficient {tok:?}"));
    let (imag, rest) = match tok.strip_prefix('i') {
        Some(r) => (true, r),
        None => (false, tok),
    };
    let value = if rest.is_empty() {
        1.0
    } else if let Some((a, b)) = rest.split_once('/') {
        a.parse::<f64>().map_err(|_| bad())? / b.parse::<f64>().map_err(|_| bad())?
    } else {
        rest.parse::<f64>().map_err(|_| bad())?
    };
    Ok(if imag { Complex64::new(0.0, value) } else { Complex64::new(value, 0.0) })
}

fn parse_factors(tok: &str) -> Result<Vec<(usize, Axis)>> {
    if tok == "I" {
        return Ok(Vec::new());
    }
    let chars: Vec<char> = tok.chars().collect();
    if !chars.len().is_multiple_of(2) {
        return Err(Error::Internal(format!("bad factor list {tok:?}")));
    }
    chars
        .chunks(2)
        .map(|c| {
            let atom = c[0].to_digit(10).ok_or_else(|| Error::Internal(format!("bad atom in {tok:?}")))? as usize;
            let axis = Axis::from_char(c[1]).ok_or_else(|| Error::Internal(format!("bad axis in {tok:?}")))?;
            Ok((atom, axis))
        })
        .collect()
}

/// Parse `"7/4 1x + -i 1y2z + i3/8 I"`. A bare factor list has coefficient 1;
/// a leading `-` on the coefficient negates it.
pub fn parse_terms(src: &str) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for chunk in src.split('+').map(str::trim).filter(|c| !c.is_empty()) {
        let parts: Vec<&str> = chunk.split_whitespace().collect();
        let (coeff_tok, factor_tok) = match parts.as_slice() {
            [f] => ("1", *f),
            [c, f] => (*c, *f),
            _ => return Err(Error::Internal(format!("bad term {chunk:?}"))),
        };
        let (sign, coeff_tok) = match coeff_tok.strip_prefix('-') {
            Some(r) => (-1.0, if r.is_empty() { "1" } else { r }),
            None => (1.0, coeff_tok),
        };
        out.push(Term::new(parse_coeff(coeff_tok)? * sign, parse_factors(factor_tok)?));
    }
    Ok(out)
}

/// A collective product `J_a J_b J_c` (three atoms) and its expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Identity {
    pub id: String,
    pub word: [Axis; 3],
    pub rhs: Vec<Term>,
}

fn word_id(word: [Axis; 3]) -> String {
    word.iter().map(|a| format!("J{}", a.as_char())).collect()
}

// Single sums like 3/4 (J_1y + J_2y + J_3y) are spelled out term by term.
const IDENTITY_TABLE: [(&str, &str); 27] = [
    ("xxx", "7/4 1x + 7/4 2x + 7/4 3x + 6 1x2x3x"),
    (
        "xxy",
        "3/4 1y + 3/4 2y + 3/4 3y + i 1z2x + i 1x2z + i 1z3x + i 1x3z + i 2z3x + i 2x3z \
         + 2 1x2x3y + 2 1x2y3x + 2 1y2x3x",
    ),
    (
        "xxz",
        "3/4 1z + 3/4 2z + 3/4 3z + -i 1y2x + -i 1x2y + -i 1y3x + -i 1x3y + -i 2y3x + -i 2x3y \
         + 2 1x2x3z + 2 1x2z3x + 2 1z2x3x",
    ),
    (
        "yyx",
        "3/4 1x + 3/4 2x + 3/4 3x + -i 1z2y + -i 1y2z + -i 1z3y + -i 1y3z + -i 2z3y + -i 2y3z \
         + 2 1y2y3x + 2 1y2x3y + 2 1x2y3y",
    ),
    ("yyy", "7/4 1y + 7/4 2y + 7/4 3y + 6 1y2y3y"),
    (
        "yyz",
        "3/4 1z + 3/4 2z + 3/4 3z + i 1x2y + i 1y2x + i 1x3y + i 1y3x + i 2x3y + i 2y3x \
         + 2 1y2y3z + 2 1y2z3y + 2 1z2y3y",
    ),
    (
        "zzx",
        "3/4 1x + 3/4 2x + 3/4 3x + i 1y2z + i 1y3z + i 2y3z + i 1z2y + i 1z3y + i 2z3y \
         + 2 1z2z3x + 2 1z2x3z + 2 1x2z3z",
    ),
    (
        "zzy",
        "3/4 1y + 3/4 2y + 3/4 3y + -i 1x2z + -i 1x3z + -i 1z2x + -i 1z3x + -i 2x3z + -i 2z3x \
         + 2 1y2z3z + 2 1z2z3y + 2 1z2y3z",
    ),
    ("zzz", "7/4 1z + 7/4 2z + 7/4 3z + 6 1z2z3z"),
    ("xyx", "1/4 1y + 1/4 2y + 1/4 3y + 2 1x2y3x + 2 1x2x3y + 2 1y2x3x"),
    (
        "yxx",
        "3/4 1y + 3/4 2y + 3/4 3y + -i 1z2x + -i 1z3x + -i 1x2z + -i 1x3z + -i 2z3x + -i 2x3z \
         + 2 1y2x3x + 2 1x2y3x + 2 1x2x3y",
    ),
    (
        "xyy",
        "3/4 1x + 3/4 2x + 3/4 3x + i 1z2y + i 1z3y + i 1y2z + i 1y3z + i 2z3y + i 2y3z \
         + 2 1x2y3y + 2 1y2x3y + 2 1y2y3x",
    ),
    ("yxy", "1/4 1x + 1/4 2x + 1/4 3x + 2 1y2x3y + 2 1y2y3x + 2 1x2y3y"),
    (
        "xyz",
        "i3/8 I + i 1z2z + i 1z3z + -i 1y2y + i 1x2x + -i 1y3y + i 1x3x + i 2z3z + -i 2y3y + i 2x3x \
         + 1x2y3z + 1x2z3y + 1y2x3z + 1z2x3y + 1y2z3x + 1z2y3x",
    ),
    (
        "yxz",
        "-i3/8 I + -i 1z2z + -i 1z3z + i 1x2x + -i 1y2y + -i 1y3y + i 1x3x + -i 2z3z + -i 2y3y + i 2x3x \
         + 1y2x3z + 1y2z3x + 1x2y3z + 1z2y3x + 1x2z3y + 1z2x3y",
    ),
    ("xzx", "1/4 1z + 1/4 2z + 1/4 3z + 2 1x2z3x + 2 1x2x3z + 2 1z2x3x"),
    (
        "zxx",
        "3/4 1z + 3/4 2z + 3/4 3z + i 1y2x + i 1y3x + i 1x2y + i 2y3x + i 1x3y + i 2x3y \
         + 2 1x2z3x + 2 1x2x3z + 2 1z2x3x",
    ),
    (
        "xzy",
        "-i3/8 I + -i 1y2y + -i 1y3y + i 1z2z + -i 1x2x + i 1z3z + -i 1x3x + -i 2y3y + i 2z3z + -i 2x3x \
         + 1x2z3y + 1x2y3z + 1z2x3y + 1y2x3z + 1z2y3x + 1y2z3x",
    ),
    (
        "zxy",
        "i3/8 I + i 1y2y + i 1y3y + -i 1x2x + i 1z2z + -i 1x3x + i 1z3z + i 2y3y + -i 2x3x + i 2z3z \
         + 1z2x3y + 1z2y3x + 1x2z3y + 1y2z3x + 1x2y3z + 1y2x3z",
    ),
    (
        "xzz",
        "3/4 1x + 3/4 2x + 3/4 3x + -i 1y2z + -i 1y3z + -i 1z2y + -i 2y3z + -i 1z3y + -i 2z3y \
         + 2 1x2z3z + 2 1z2x3z + 2 1z2z3x",
    ),
    ("zxz", "1/4 1x + 1/4 2x + 1/4 3x + 2 1z2x3z + 2 1z2z3x + 2 1x2z3z"),
    (
        "yzx",
        "i3/8 I + i 1x2x + i 1x3x + -i 1z2z + i 1y2y + -i 1z3z + i 1y3y + i 2x3x + -i 2z3z + i 2y3y \
         + 1y2z3x + 1y2x3z + 1z2y3x + 1x2y3z + 1z2x3y + 1x2z3y",
    ),
    (
        "zyx",
        "-i3/8 I + -i 1x2x + -i 1x3x + i 1y2y + -i 1z2z + i 1y3y + -i 1z3z + -i 2x3x + i 2y3y + -i 2z3z \
         + 1z2y3x + 1z2x3y + 1y2z3x + 1x2z3y + 1y2x3z + 1x2y3z",
    ),
    ("yzy", "1/4 1z + 1/4 2z + 1/4 3z + 2 1y2z3y + 2 1y2y3z + 2 1z2y3y"),
    (
        "zyy",
        "3/4 1z + 3/4 2z + 3/4 3z + -i 1x2y + -i 1x3y + -i 1y2x + -i 2x3y + -i 1y3x + -i 2y3x \
         + 2 1z2y3y + 2 1y2z3y + 2 1y2y3z",
    ),
    (
        "yzz",
        "3/4 1y + 3/4 2y + 3/4 3y + i 1x2z + i 1x3z + i 1z2x + i 2x3z + i 1z3x + i 2z3x \
         + 2 1y2z3z + 2 1z2y3z + 2 1z2z3y",
    ),
    ("zyz", "1/4 1y + 1/4 2y + 1/4 3y + 2 1z2y3z + 2 1z2z3y + 2 1y2z3z"),
];

fn parse_word(w: &str) -> Result<[Axis; 3]> {
    let axes: Vec<Axis> = w.chars().filter_map(Axis::from_char).collect();
    axes.try_into().map_err(|_| Error::Internal(format!("bad word {w:?}")))
}

/// The 27 three-atom expansions of collective products.
pub fn identity_table() -> Vec<Identity> {
    IDENTITY_TABLE
        .iter()
        .map(|(w, rhs)| {
            let word = parse_word(w).expect("identity word");
            Identity { id: word_id(word), word, rhs: parse_terms(rhs).expect("identity terms") }
        })
        .collect()
}

/// Same-atom relations: squares, cubes and the cyclic products.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleAtomRelation {
    pub id: &'static str,
    pub lhs: Vec<Axis>,
    pub coeff: Complex64,
    pub rhs: Option<Axis>,
}

pub fn single_atom_relations() -> Vec<SingleAtomRelation> {
    use Axis::*;
    let quarter = Complex64::new(0.25, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let rel = |id, lhs: &[Axis], coeff, rhs| SingleAtomRelation { id, lhs: lhs.to_vec(), coeff, rhs };
    vec![
        rel("single_square_x", &[X, X], quarter, None),
        rel("single_square_y", &[Y, Y], quarter, None),
        rel("single_square_z", &[Z, Z], quarter, None),
        rel("single_cube_x", &[X, X, X], quarter, Some(X)),
        rel("single_cube_y", &[Y, Y, Y], quarter, Some(Y)),
        rel("single_cube_z", &[Z, Z, Z], quarter, Some(Z)),
        rel("single_xy", &[X, Y], half_i, Some(Z)),
        rel("single_yz", &[Y, Z], half_i, Some(X)),
        rel("single_zx", &[Z, X], half_i, Some(Y)),
    ]
}

fn sum_terms(terms: &[Term], n_atoms: usize) -> Result<OperatorMatrix> {
    let mut m = OperatorMatrix::zeros(n_atoms, Space::Full);
    for t in terms {
        m = m.add(&t.to_matrix(n_atoms)?)?;
    }
    Ok(m)
}

fn collective_word(word: &[Axis], n_atoms: usize) -> Result<OperatorMatrix> {
    let mut m = OperatorMatrix::identity(n_atoms, Space::Full);
    for &a in word {
        m = m.mul(&collective_op(a, n_atoms)?)?;
    }
    Ok(m)
}

fn check_identity(id: &Identity, tol: f64) -> Result<IdentityResult> {
    let lhs = collective_word(&id.word, ORACLE_ATOMS)?;
    let rhs = sum_terms(&id.rhs, ORACLE_ATOMS)?;
    Ok(IdentityResult::new(id.id.clone(), lhs.max_abs_diff(&rhs)?, lhs.dim(), tol))
}

fn check_relation(rel: &SingleAtomRelation, tol: f64) -> Result<IdentityResult> {
    let mut worst: f64 = 0.0;
    for atom in 1..=ORACLE_ATOMS {
        let factors = rel.lhs.iter().map(|&a| (atom, a)).collect();
        let lhs = Term::new(Complex64::new(1.0, 0.0), factors).to_matrix(ORACLE_ATOMS)?;
        let rhs = Term::new(rel.coeff, rel.rhs.map(|a| vec![(atom, a)]).unwrap_or_default()).to_matrix(ORACLE_ATOMS)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    Ok(IdentityResult::new(rel.id, worst, 1 << ORACLE_ATOMS, tol))
}

/// All 27 collective-product identities followed by the 9 same-atom relations.
pub fn verify_identity_suite() -> Vec<IdentityResult> {
    verify_identity_suite_with(IDENTITY_TOL, None)
}

/// `corrupt` names an identity whose first right-hand term gets its sign
/// flipped before checking; used to confirm that failures are detected.
pub fn verify_identity_suite_with(tol: f64, corrupt: Option<&str>) -> Vec<IdentityResult> {
    let mut out = Vec::new();
    for mut id in identity_table() {
        if corrupt == Some(id.id.as_str()) {
            if let Some(t) = id.rhs.first_mut() {
                t.coeff = -t.coeff;
            }
        }
        out.push(check_identity(&id, tol).unwrap_or_else(|_| IdentityResult::new(id.id.clone(), f64::INFINITY, 8, tol)));
    }
    for rel in single_atom_relations() {
        let mut rel = rel;
        if corrupt == Some(rel.id) {
            rel.coeff = -rel.coeff;
        }
        out.push(check_relation(&rel, tol).unwrap_or_else(|_| IdentityResult::new(rel.id, f64::INFINITY, 8, tol)));
    }
    out
}

/// Terms of the cube `(u . J)^3` obtained by weighting each collective word
/// by `u_a u_b u_c` and substituting its expansion, with like terms merged.
pub fn expanded_cube_terms(u: [f64; 3]) -> Vec<Term> {
    let mut merged: BTreeMap<String, Term> = BTreeMap::new();
    for id in identity_table() {
        let w: f64 = id.word.iter().map(|a| u[a.index()]).product();
        for t in id.rhs {
            let key = t.canonical_key();
            let mut factors = t.factors.clone();
            factors.sort();
            merged
                .entry(key)
                .and_modify(|e| e.coeff += t.coeff * w)
                .or_insert_with(|| Term::new(t.coeff * w, factors));
        }
    }
    merged.into_values().collect()
}

/// Largest coefficient among merged terms acting on fewer than three atoms,
/// excluding the single-atom terms (which survive).
pub fn bipartite_remainder(u: [f64; 3]) -> f64 {
    expanded_cube_terms(u).iter().filter(|t| t.order() != 1 && t.order() != 3).map(|t| t.coeff.norm()).fold(0.0, f64::max)
}

/// Reduced form: `(7/4) sum_n u.J_n + sum over ordered distinct (p,q,r)` of
/// `(u.J_p)(u.J_q)(u.J_r)`, expanded into single and triple terms only.
pub fn reduced_cube_terms(u: [f64; 3]) -> Vec<Term> {
    let n = ORACLE_ATOMS;
    let single = (3.0 * n as f64 - 2.0) / 4.0;
    let mut out = Vec::new();
    for atom in 1..=n {
        for a in Axis::ALL {
            out.push(Term::new(Complex64::new(single * u[a.index()], 0.0), vec![(atom, a)]));
        }
    }
    for p in 1..=n {
        for q in (1..=n).filter(|&q| q != p) {
            for r in (1..=n).filter(|&r| r != p && r != q) {
                for a in Axis::ALL {
                    for b in Axis::ALL {
                        for c in Axis::ALL {
                            let w = u[a.index()] * u[b.index()] * u[c.index()];
                            out.push(Term::new(Complex64::new(w, 0.0), vec![(p, a), (q, b), (r, c)]));
                        }
                    }
                }
            }
        }
    }
    out
}

fn cube_along(u: [f64; 3], n_atoms: usize) -> Result<OperatorMatrix> {
    let j = collective_op_along(u, n_atoms)?;
    j.mul(&j)?.mul(&j)
}

/// Cube of the rotated x' operator against its reduced form.
pub fn verify_cancellation(theta: f64, phi: f64) -> Result<IdentityResult> {
    let a = RotationAngles::from_angles(theta, phi)?;
    verify_cancellation_along("cancellation_xp", a.x_prime())
}

/// Same check for y', which depends on phi only.
pub fn verify_cancellation_yp(phi: f64) -> Result<IdentityResult> {
    let a = RotationAngles::from_angles(0.0, phi)?;
    verify_cancellation_along("cancellation_yp", a.y_prime())
}

/// Reduced form along an arbitrary unit direction. The reduced side is built
/// without any two-atom terms; that is checked before comparing matrices.
pub fn verify_cancellation_along(id: &str, u: [f64; 3]) -> Result<IdentityResult> {
    let terms = reduced_cube_terms(u);
    if terms.iter().any(|t| t.order() == 2 || t.factors.is_empty()) {
        return Err(Error::Internal("reduced form contains a two-atom or constant term".into()));
    }
    let lhs = cube_along(u, ORACLE_ATOMS)?;
    let rhs = sum_terms(&terms, ORACLE_ATOMS)?;
    Ok(IdentityResult::new(id, lhs.max_abs_diff(&rhs)?, lhs.dim(), IDENTITY_TOL))
}

/// Cube of the x' operator against the weighted sum of all 27 expansions.
pub fn verify_expansion(theta: f64, phi: f64) -> Result<IdentityResult> {
    let a = RotationAngles::from_angles(theta, phi)?;
    let u = a.x_prime();
    let lhs = cube_along(u, ORACLE_ATOMS)?;
    let rhs = sum_terms(&expanded_cube_terms(u), ORACLE_ATOMS)?;
    Ok(IdentityResult::new("expansion_xp", lhs.max_abs_diff(&rhs)?, lhs.dim(), IDENTITY_TOL))
}

/// Cancellation over `trials` seeded random (theta, phi) pairs, theta in [0, pi].
pub fn verify_cancellation_sweep(trials: usize, seed: u64) -> Result<Vec<IdentityResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for k in 0..trials {
        let theta = rng.random::<f64>() * std::f64::consts::PI;
        let phi = (rng.random::<f64>() * 2.0 - 1.0) * std::f64::consts::PI;
        let mut r = verify_cancellation(theta, phi)?;
        r.identity_id = format!("cancellation_xp[{k}]");
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteSummary {
    pub n_atoms: usize,
    pub trials: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub max_rel_dev: f64,
    pub passed: bool,
}

fn per_trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.random()).collect()
}

/// Direct and sum routes on random symmetric states in the full product
/// basis, with every correlator summed over all ordered triples. A GHZ-type
/// state (no mean spin) is appended to the corpus and must be skipped.
pub fn verify_sum_route(n_atoms: usize, trials: usize, seed: u64) -> Result<RouteSummary> {
    verify_sum_route_with(n_atoms, trials, seed, &RouteTolerance::default())
}

pub fn verify_sum_route_with(n_atoms: usize, trials: usize, seed: u64, tol: &RouteTolerance) -> Result<RouteSummary> {
    if !(3..=6).contains(&n_atoms) {
        return Err(Error::InvalidArgument(format!("sum-route sweep supports 3..=6 atoms, got {n_atoms}")));
    }
    let mut corpus = Vec::with_capacity(trials + 1);
    for s in per_trial_seeds(seed, trials) {
        corpus.push(SymmetricState::random(n_atoms, s)?.to_full()?);
    }
    corpus.push(ghz(n_atoms)?.to_full()?);
    let (mut evaluated, mut skipped, mut worst) = (0, 0, 0.0_f64);
    for f in &corpus {
        match entanglement_s_full(f, CorrelatorMode::BruteForce) {
            Ok(r) => {
                evaluated += 1;
                worst = worst
                    .max(tol.deviation(r.m3_xp_direct(), r.m3_xp_sum()))
                    .max(tol.deviation(r.m3_yp_direct(), r.m3_yp_sum()));
            }
            Err(Error::FrameUndefined { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(RouteSummary { n_atoms, trials: corpus.len(), evaluated, skipped, max_rel_dev: worst, passed: worst <= tol.rel })
}

/// `(|0...0> + |1...1>) / sqrt 2` in the Dicke basis.
pub fn ghz(n_atoms: usize) -> Result<SymmetricState> {
    let mut c = vec![Complex64::new(0.0, 0.0); n_atoms + 1];
    c[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    c[n_atoms] = c[0];
    SymmetricState::new(n_atoms, c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingSummary {
    pub n_atoms: usize,
    pub trials: usize,
    pub max_s: f64,
    pub max_abs_m3: f64,
    pub skipped: usize,
    pub passed: bool,
}

/// S on random identical-qubit product states, built in the full product
/// basis and projected onto the Dicke basis.
pub fn verify_product_vanishing(n_atoms: usize, trials: usize, seed: u64) -> Result<VanishingSummary> {
    verify_product_vanishing_with(n_atoms, trials, seed, VANISHING_TOL)
}

pub fn verify_product_vanishing_with(n_atoms: usize, trials: usize, seed: u64, tol: f64) -> Result<VanishingSummary> {
    if n_atoms < 3 {
        return Err(Error::InvalidArgument(format!("product sweep needs at least 3 atoms, got {n_atoms}")));
    }
    let (mut max_s, mut max_m3, mut skipped) = (0.0_f64, 0.0_f64, 0);
    for s in per_trial_seeds(seed, trials) {
        let full: FullState = ProductState::random_identical(n_atoms, s)?.to_full()?;
        match entanglement_s(&full_to_dicke(&full)?) {
            Ok(r) => {
                max_s = max_s.max(r.s_parameter);
                max_m3 = max_m3.max(r.m3_xp_direct().abs()).max(r.m3_yp_direct().abs());
            }
            Err(Error::FrameUndefined { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(VanishingSummary { n_atoms, trials, max_s, max_abs_m3: max_m3, skipped, passed: max_s <= tol && skipped == 0 })
}

/// Commutators, spin length on the symmetric subspace, same-atom relations
/// and anticommutation, in both spaces where they apply.
pub fn verify_algebra(n_atoms: usize) -> Result<Vec<IdentityResult>> {
    verify_algebra_with(n_atoms, ALGEBRA_TOL)
}

pub fn verify_algebra_with(n_atoms: usize, tol: f64) -> Result<Vec<IdentityResult>> {
    let mut out = Vec::new();
    let i = Complex64::new(0.0, 1.0);
    for space in [Space::Full, Space::Dicke] {
        let j = |a: Axis| match space {
            Space::Full => collective_op(a, n_atoms),
            Space::Dicke => collective_op_dicke(a, n_atoms),
        };
        let tag = match space {
            Space::Full => "full",
            Space::Dicke => "dicke",
        };
        for (a, b, c) in [(Axis::X, Axis::Y, Axis::Z), (Axis::Y, Axis::Z, Axis::X), (Axis::Z, Axis::X, Axis::Y)] {
            let (ja, jb, jc) = (j(a)?, j(b)?, j(c)?);
            let r = ja.commutator(&jb)?.max_abs_diff(&jc.scale(i))?;
            let id = format!("commutator_{}{}_{tag}", a.as_char(), b.as_char());
            out.push(IdentityResult::new(id, r, ja.dim(), tol));
        }
    }

    let jj = n_atoms as f64 / 2.0;
    let casimir = jj * (jj + 1.0);
    let dicke_sq = total_spin_squared(Space::Dicke, n_atoms)?;
    let target = OperatorMatrix::identity(n_atoms, Space::Dicke).scale(Complex64::new(casimir, 0.0));
    out.push(IdentityResult::new("spin_length_dicke", dicke_sq.max_abs_diff(&target)?, dicke_sq.dim(), tol));

    let full_sq = total_spin_squared(Space::Full, n_atoms)?;
    let mut worst: f64 = 0.0;
    for k in 0..=n_atoms {
        let amp = Complex64::new(1.0 / binomial(n_atoms, k).sqrt(), 0.0);
        let v: Vec<Complex64> = (0..1usize << n_atoms)
            .map(|b| if b.count_ones() as usize == k { amp } else { Complex64::new(0.0, 0.0) })
            .collect();
        for (x, y) in full_sq.apply(&v).iter().zip(&v) {
            worst = worst.max((x - y * casimir).norm());
        }
    }
    out.push(IdentityResult::new("spin_length_symmetric_full", worst, full_sq.dim(), tol));

    for rel in single_atom_relations() {
        let mut worst: f64 = 0.0;
        for atom in 1..=n_atoms {
            let mut lhs = OperatorMatrix::identity(n_atoms, Space::Full);
            for &a in &rel.lhs {
                lhs = lhs.mul(&single_atom_op(atom, a, n_atoms)?)?;
            }
            let rhs = match rel.rhs {
                Some(a) => single_atom_op(atom, a, n_atoms)?,
                None => OperatorMatrix::identity(n_atoms, Space::Full),
            }
            .scale(rel.coeff);
            worst = worst.max(lhs.max_abs_diff(&rhs)?);
        }
        out.push(IdentityResult::new(rel.id, worst, 1 << n_atoms, tol));
    }

    for (a, b) in [(Axis::X, Axis::Y), (Axis::Y, Axis::Z), (Axis::Z, Axis::X)] {
        let mut worst: f64 = 0.0;
        for atom in 1..=n_atoms {
            worst = worst.max(anticommutator_check(atom, a, b, n_atoms)?);
        }
        out.push(IdentityResult::new(format!("anticommutator_{}{}", a.as_char(), b.as_char()), worst, 1 << n_atoms, tol));
    }

    let u = [0.36, -0.48, 0.8];
    let d = single_atom_op_along(1, u, n_atoms)?;
    let sq = d.mul(&d)?;
    let quarter = OperatorMatrix::identity(n_atoms, Space::Full).scale(Complex64::new(0.25, 0.0));
    out.push(IdentityResult::new("single_square_oblique", sq.max_abs_diff(&quarter)?, sq.dim(), tol));
    Ok(out)
}
