//! State representations and conversions between them.
//!
//! A [`SymmetricState`] stores the N+1 Dicke amplitudes ordered from
//! m = +N/2 down to m = -N/2, so `coeffs[k]` multiplies the Dicke state with
//! k atoms in the lower level. A [`FullState`] stores 2^N product-basis
//! amplitudes. A [`ProductState`] is the factorizable case, one qubit per atom.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Space;
use crate::NORM_TOL;

/// Largest N for which full-space vectors are built without an override.
pub const MAX_FULL_ATOMS: usize = 14;

/// Residual norm outside the symmetric subspace above which a full state is rejected.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Smallest atom count accepted by [`SymmetricState`].
pub const MIN_SYMMETRIC_ATOMS: usize = 3;

/// Anything that carries a state vector in one of the two spaces.
pub trait StateVector {
    fn n_atoms(&self) -> usize;
    fn space(&self) -> Space;
    fn amplitudes(&self) -> &[Complex64];

    fn dim(&self) -> usize {
        self.amplitudes().len()
    }
}

/// Binomial coefficient as a float; exact for every N this crate can reach.
pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn check_norm(v: &[Complex64], what: &str) -> Result<()> {
    let n = norm_sqr(v);
    if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidState(format!(
            "{what} has squared norm {n}, expected 1 within {NORM_TOL:e}"
        )));
    }
    Ok(())
}

fn normalized(v: &[Complex64], what: &str) -> Result<Vec<Complex64>> {
    let n = norm_sqr(v).sqrt();
    if !n.is_finite() || n == 0.0 {
        return Err(Error::InvalidState(format!("{what} cannot be normalized (norm {n})")));
    }
    Ok(v.iter().map(|c| c / n).collect())
}

fn check_full_cap(n_atoms: usize, allow_large: bool) -> Result<()> {
    if n_atoms > MAX_FULL_ATOMS && !allow_large {
        return Err(Error::TooLarge { n_atoms, cap: MAX_FULL_ATOMS });
    }
    if n_atoms >= usize::BITS as usize - 1 {
        return Err(Error::TooLarge { n_atoms, cap: usize::BITS as usize - 2 });
    }
    Ok(())
}

/// Pure symmetric state of N atoms in the Dicke basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetricState {
    n_atoms: usize,
    coeffs: Vec<Complex64>,
}

impl SymmetricState {
    pub fn new(n_atoms: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::check_shape(n_atoms, &coeffs)?;
        check_norm(&coeffs, "Dicke coefficient vector")?;
        Ok(Self { n_atoms, coeffs })
    }

    /// Like [`SymmetricState::new`] but rescales the coefficients to unit norm.
    pub fn new_normalized(n_atoms: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::check_shape(n_atoms, &coeffs)?;
        let coeffs = normalized(&coeffs, "Dicke coefficient vector")?;
        Ok(Self { n_atoms, coeffs })
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        let n_atoms = coeffs.len().saturating_sub(1);
        Self::new(n_atoms, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    fn check_shape(n_atoms: usize, coeffs: &[Complex64]) -> Result<()> {
        if n_atoms < MIN_SYMMETRIC_ATOMS {
            return Err(Error::InvalidState(format!(
                "symmetric states need at least {MIN_SYMMETRIC_ATOMS} atoms, got {n_atoms}"
            )));
        }
        if coeffs.len() != n_atoms + 1 {
            return Err(Error::InvalidState(format!(
                "expected {} Dicke coefficients for {n_atoms} atoms, got {}",
                n_atoms + 1,
                coeffs.len()
            )));
        }
        Ok(())
    }

    /// The Dicke state with `k` atoms in the lower level.
    pub fn dicke(n_atoms: usize, k: usize) -> Result<Self> {
        if k > n_atoms {
            return Err(Error::IndexOutOfRange { index: k, n_atoms });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_atoms + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self::new(n_atoms, coeffs)
    }

    /// Coherent spin state: every atom in `up |u> + down |l>`.
    ///
    /// Uses `coeffs[r] = sqrt(C(N, r)) up^(N-r) down^r`.
    pub fn coherent(n_atoms: usize, up: Complex64, down: Complex64) -> Result<Self> {
        check_norm(&[up, down], "single-atom state")?;
        let coeffs = (0..=n_atoms)
            .map(|r| binomial(n_atoms, r).sqrt() * up.powu((n_atoms - r) as u32) * down.powu(r as u32))
            .collect();
        Self::new_normalized(n_atoms, coeffs)
    }

    /// Independent complex Gaussian amplitudes, normalized.
    pub fn random(n_atoms: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..=n_atoms)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::new_normalized(n_atoms, coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Multiply every amplitude by `e^{i phase}`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let f = Complex64::from_polar(1.0, phase);
        Self { n_atoms: self.n_atoms, coeffs: self.coeffs.iter().map(|c| c * f).collect() }
    }

    pub fn to_full(&self) -> Result<FullState> {
        dicke_to_full(self)
    }
}

impl StateVector for SymmetricState {
    fn n_atoms(&self) -> usize {
        self.n_atoms
    }
    fn space(&self) -> Space {
        Space::Dicke
    }
    fn amplitudes(&self) -> &[Complex64] {
        &self.coeffs
    }
}

/// Product of single-atom states, `(a_up, a_down)` per atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductState {
    qubits: Vec<(Complex64, Complex64)>,
}

impl ProductState {
    pub fn new(qubits: Vec<(Complex64, Complex64)>) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::InvalidState("product state needs at least one atom".into()));
        }
        for (i, &(u, d)) in qubits.iter().enumerate() {
            check_norm(&[u, d], &format!("atom {}", i + 1))?;
        }
        Ok(Self { qubits })
    }

    pub fn new_normalized(qubits: Vec<(Complex64, Complex64)>) -> Result<Self> {
        let qubits = qubits
            .into_iter()
            .enumerate()
            .map(|(i, (u, d))| {
                let v = normalized(&[u, d], &format!("atom {}", i + 1))?;
                Ok((v[0], v[1]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(qubits)
    }

    pub fn identical(n_atoms: usize, up: Complex64, down: Complex64) -> Result<Self> {
        Self::new(vec![(up, down); n_atoms])
    }

    /// N copies of one random qubit drawn from normalized complex Gaussians.
    pub fn random_identical(n_atoms: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        };
        let (u, d) = (draw(), draw());
        Self::new_normalized(vec![(u, d); n_atoms])
    }

    pub fn n_atoms(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[(Complex64, Complex64)] {
        &self.qubits
    }

    pub fn to_full(&self) -> Result<FullState> {
        product_to_full(self)
    }
}

/// State vector over the 2^N product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    n_atoms: usize,
    amplitudes: Vec<Complex64>,
}

impl FullState {
    pub fn new(n_atoms: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new_with(n_atoms, amplitudes, false)
    }

    /// `allow_large` lifts the [`MAX_FULL_ATOMS`] cap.
    pub fn new_with(n_atoms: usize, amplitudes: Vec<Complex64>, allow_large: bool) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidState("full state needs at least one atom".into()));
        }
        check_full_cap(n_atoms, allow_large)?;
        if amplitudes.len() != 1usize << n_atoms {
            return Err(Error::DimensionMismatch { expected: 1usize << n_atoms, got: amplitudes.len() });
        }
        check_norm(&amplitudes, "full state vector")?;
        Ok(Self { n_atoms, amplitudes })
    }

    pub fn new_normalized(n_atoms: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let amplitudes = normalized(&amplitudes, "full state vector")?;
        Self::new(n_atoms, amplitudes)
    }

    /// Relabel atoms: atom `i + 1` of the result is atom `perm[i] + 1` of `self`.
    pub fn permute_atoms(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_atoms;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (b, amp) in self.amplitudes.iter().enumerate() {
            let mut target = 0usize;
            for (i, &src) in perm.iter().enumerate() {
                let bit = (b >> (n - 1 - src)) & 1;
                target |= bit << (n - 1 - i);
            }
            out[target] = *amp;
        }
        Ok(Self { n_atoms: n, amplitudes: out })
    }

    /// Squared norm of the component orthogonal to the symmetric subspace, square-rooted.
    pub fn asymmetric_residual(&self) -> f64 {
        let coeffs = project_to_dicke(self);
        let back = dicke_amplitudes(self.n_atoms, &coeffs);
        self.amplitudes
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl StateVector for FullState {
    fn n_atoms(&self) -> usize {
        self.n_atoms
    }
    fn space(&self) -> Space {
        Space::Full
    }
    fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

fn dicke_amplitudes(n_atoms: usize, coeffs: &[Complex64]) -> Vec<Complex64> {
    let scale: Vec<f64> = (0..=n_atoms).map(|r| binomial(n_atoms, r).sqrt().recip()).collect();
    (0..1usize << n_atoms)
        .map(|b| {
            let r = b.count_ones() as usize;
            coeffs[r] * scale[r]
        })
        .collect()
}

fn project_to_dicke(f: &FullState) -> Vec<Complex64> {
    let n = f.n_atoms;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    for (b, amp) in f.amplitudes.iter().enumerate() {
        coeffs[b.count_ones() as usize] += amp;
    }
    for (r, c) in coeffs.iter_mut().enumerate() {
        *c /= binomial(n, r).sqrt();
    }
    coeffs
}

/// Expand Dicke amplitudes into the product basis (capped at [`MAX_FULL_ATOMS`]).
pub fn dicke_to_full(s: &SymmetricState) -> Result<FullState> {
    dicke_to_full_with(s, false)
}

pub fn dicke_to_full_with(s: &SymmetricState, allow_large: bool) -> Result<FullState> {
    check_full_cap(s.n_atoms, allow_large)?;
    let amplitudes = dicke_amplitudes(s.n_atoms, &s.coeffs);
    FullState::new_with(s.n_atoms, amplitudes, allow_large)
}

pub fn product_to_full(p: &ProductState) -> Result<FullState> {
    product_to_full_with(p, false)
}

pub fn product_to_full_with(p: &ProductState, allow_large: bool) -> Result<FullState> {
    let n = p.n_atoms();
    check_full_cap(n, allow_large)?;
    let amplitudes = (0..1usize << n)
        .map(|b| {
            p.qubits.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (i, &(u, d))| {
                if (b >> (n - 1 - i)) & 1 == 0 {
                    acc * u
                } else {
                    acc * d
                }
            })
        })
        .collect();
    FullState::new_with(n, amplitudes, allow_large)
}

/// Recover Dicke amplitudes; fails with [`Error::NotSymmetric`] when the
/// state has weight outside the symmetric subspace.
pub fn full_to_dicke(f: &FullState) -> Result<SymmetricState> {
    let residual = f.asymmetric_residual();
    if residual > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { residual });
    }
    SymmetricState::new_normalized(f.n_atoms, project_to_dicke(f))
}

/// Parsed contents of a state JSON file.
#[derive(Debug, Clone, PartialEq)]
pub enum StateInput {
    Dicke(SymmetricState),
    Product(ProductState),
}

impl StateInput {
    pub fn n_atoms(&self) -> usize {
        match self {
            StateInput::Dicke(s) => s.n_atoms,
            StateInput::Product(p) => p.n_atoms(),
        }
    }

    /// Bring either representation into the Dicke subspace. Product input
    /// goes through the full space, so it obeys the full-space cap.
    pub fn into_symmetric(self, allow_large: bool) -> Result<SymmetricState> {
        match self {
            StateInput::Dicke(s) => Ok(s),
            StateInput::Product(p) => full_to_dicke(&product_to_full_with(&p, allow_large)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dicke,
    Product,
}

/// On-disk state schema. Complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_atoms: usize,
    pub representation: Representation,
    pub coeffs: serde_json::Value,
    /// Rescale to unit norm instead of rejecting slightly-off inputs.
    #[serde(default)]
    pub normalize: bool,
}

impl StateFile {
    pub fn from_symmetric(s: &SymmetricState) -> Self {
        Self {
            n_atoms: s.n_atoms,
            representation: Representation::Dicke,
            coeffs: serde_json::to_value(&s.coeffs).expect("complex vectors serialize"),
            normalize: false,
        }
    }

    pub fn parse(self, force_normalize: bool) -> Result<StateInput> {
        let normalize = self.normalize || force_normalize;
        let bad = |e: serde_json::Error| Error::InvalidState(format!("malformed coeffs: {e}"));
        match self.representation {
            Representation::Dicke => {
                let coeffs: Vec<Complex64> = serde_json::from_value(self.coeffs).map_err(bad)?;
                let s = if normalize {
                    SymmetricState::new_normalized(self.n_atoms, coeffs)?
                } else {
                    SymmetricState::new(self.n_atoms, coeffs)?
                };
                Ok(StateInput::Dicke(s))
            }
            Representation::Product => {
                let qubits: Vec<(Complex64, Complex64)> =
                    serde_json::from_value(self.coeffs).map_err(bad)?;
                if qubits.len() != self.n_atoms {
                    return Err(Error::InvalidState(format!(
                        "n_atoms is {} but {} qubits were given",
                        self.n_atoms,
                        qubits.len()
                    )));
                }
                let p = if normalize {
                    ProductState::new_normalized(qubits)?
                } else {
                    ProductState::new(qubits)?
                };
                Ok(StateInput::Product(p))
            }
        }
    }
}

/// Parse a state JSON document.
pub fn parse_state_json(text: &str, force_normalize: bool) -> Result<StateInput> {
    let file: StateFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidState(format!("state JSON: {e}")))?;
    file.parse(force_normalize)
}
