//! Simulated projective measurements of collective operators and moment
//! estimates from the resulting outcome histograms.
//!
//! Generator: ChaCha8 seeded with `seed_from_u64`. Shots use stream 0,
//! bootstrap resampling uses stream 1 of the same seed, so a record plus its
//! seed replays bit-exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{mean_spin, rotated_ops, rotation_angles};
use crate::operators::{check_matching, OperatorMatrix, Space};
use crate::states::{StateVector, SymmetricState};

/// Eigenvalues closer than this are treated as one outcome.
pub const DEGENERACY_TOL: f64 = 1e-10;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
pub const MIN_MOMENT_SHOTS: u64 = 100;
pub const MIN_S_SHOTS: u64 = 1000;

const SPECTRUM_SLACK: f64 = 1e-9;
const COMMUTE_TOL: f64 = 1e-10;

/// Outcome distribution of a hermitian operator in a given state.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl Spectrum {
    pub fn mean(&self) -> f64 {
        self.eigenvalues.iter().zip(&self.probabilities).map(|(x, p)| x * p).sum()
    }

    pub fn central_moment(&self, order: i32) -> f64 {
        let mu = self.mean();
        self.eigenvalues.iter().zip(&self.probabilities).map(|(x, p)| p * (x - mu).powi(order)).sum()
    }
}

struct Eigenspaces {
    values: Vec<f64>,
    vectors: Vec<DMatrix<Complex64>>,
}

/// Eigenspaces with near-equal eigenvalues merged, in ascending order.
fn eigenspaces(m: &DMatrix<Complex64>) -> Eigenspaces {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match clusters.last_mut() {
            Some(c) if eig.eigenvalues[i] - eig.eigenvalues[*c.last().unwrap()] <= DEGENERACY_TOL => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    let values = clusters.iter().map(|c| c.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / c.len() as f64).collect();
    let vectors = clusters
        .iter()
        .map(|c| DMatrix::from_columns(&c.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>()))
        .collect();
    Eigenspaces { values, vectors }
}

fn check_observable(state: &impl StateVector, op: &OperatorMatrix) -> Result<()> {
    if !op.is_hermitian() {
        return Err(Error::InvalidArgument("measured operator must be hermitian".into()));
    }
    check_matching(state, op)
}

fn spectrum_bound(n_atoms: usize) -> f64 {
    n_atoms as f64 / 2.0 + SPECTRUM_SLACK
}

/// Born-rule probabilities of each distinct eigenvalue.
pub fn outcome_distribution(state: &impl StateVector, op: &OperatorMatrix) -> Result<Spectrum> {
    check_observable(state, op)?;
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    let spaces = eigenspaces(op.matrix());
    let mut probabilities: Vec<f64> =
        spaces.vectors.iter().map(|v| (v.adjoint() * &psi).iter().map(|c| c.norm_sqr()).sum()).collect();
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Internal(format!("outcome probabilities sum to {total}")));
    }
    probabilities.iter_mut().for_each(|p| *p /= total);
    Ok(Spectrum { eigenvalues: spaces.values, probabilities })
}

/// Central-moment estimates with bootstrap standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub se_mean: f64,
    pub se_m2: f64,
    pub se_m3: f64,
    pub bootstrap_resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub operator_tag: String,
    pub eigenvalues: Vec<f64>,
    pub counts: Vec<u64>,
    #[serde(rename = "M")]
    pub n_shots: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<MomentEstimates>,
}

impl MeasurementRecord {
    /// Checks that the counts add up to the shot number.
    pub fn new(operator_tag: impl Into<String>, eigenvalues: Vec<f64>, counts: Vec<u64>, seed: u64) -> Result<Self> {
        if eigenvalues.len() != counts.len() {
            return Err(Error::DimensionMismatch { expected: eigenvalues.len(), got: counts.len() });
        }
        if eigenvalues.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::InvalidArgument("eigenvalues must be sorted and distinct".into()));
        }
        let n_shots = counts.iter().sum();
        if n_shots == 0 {
            return Err(Error::InvalidArgument("a record needs at least one shot".into()));
        }
        Ok(Self { operator_tag: operator_tag.into(), eigenvalues, counts, n_shots, seed, estimates: None })
    }

    pub fn with_estimates(mut self) -> Result<Self> {
        self.estimates = Some(estimate_moments(&self)?);
        Ok(self)
    }
}

fn draw(spectrum: &Spectrum, shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(spectrum.probabilities.len());
    let mut acc = 0.0;
    for p in &spectrum.probabilities {
        acc += p;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    let mut counts = vec![0; cdf.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    counts
}

/// `shots` independent projective measurements of `op` on fresh copies of `state`.
pub fn projective_sample(
    state: &impl StateVector,
    op: &OperatorMatrix,
    operator_tag: &str,
    shots: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    if shots == 0 {
        return Err(Error::InsufficientShots { got: 0, min: 1 });
    }
    let spectrum = outcome_distribution(state, op)?;
    let bound = spectrum_bound(op.n_atoms());
    if spectrum.eigenvalues.iter().any(|e| e.abs() > bound) {
        return Err(Error::InvalidArgument(format!("{operator_tag} has eigenvalues outside [-N/2, N/2]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = draw(&spectrum, shots, &mut rng);
    MeasurementRecord::new(operator_tag, spectrum.eigenvalues, counts, seed)
}

fn moments_of(values: &[f64], counts: &[u64], shots: u64) -> [f64; 3] {
    let m = shots as f64;
    let mean = values.iter().zip(counts).map(|(x, &c)| x * c as f64).sum::<f64>() / m;
    let (mut m2, mut m3) = (0.0, 0.0);
    for (x, &c) in values.iter().zip(counts) {
        let d = x - mean;
        m2 += c as f64 * d * d;
        m3 += c as f64 * d * d * d;
    }
    [mean, m2 / m, m3 / m]
}

fn multinomial(shots: u64, weights: &[u64], total: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut out = vec![0; weights.len()];
    let (mut left, mut mass) = (shots, total);
    for (k, &w) in weights.iter().enumerate() {
        if left == 0 || mass == 0 {
            break;
        }
        let p = (w as f64 / mass as f64).min(1.0);
        let n = if p >= 1.0 { left } else { Binomial::new(left, p).expect("valid binomial").sample(rng) };
        out[k] = n;
        left -= n;
        mass -= w;
    }
    out
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Plug-in mean, second and third central moments, with standard errors
/// from `BOOTSTRAP_RESAMPLES` multinomial resamples of the histogram.
pub fn estimate_moments(record: &MeasurementRecord) -> Result<MomentEstimates> {
    if record.n_shots < MIN_MOMENT_SHOTS {
        return Err(Error::InsufficientShots { got: record.n_shots, min: MIN_MOMENT_SHOTS });
    }
    let total: u64 = record.counts.iter().sum();
    if total != record.n_shots {
        return Err(Error::InvalidArgument(format!("counts sum to {total}, expected {}", record.n_shots)));
    }
    let [mean, m2, m3] = moments_of(&record.eigenvalues, &record.counts, record.n_shots);
    let mut rng = ChaCha8Rng::seed_from_u64(record.seed);
    rng.set_stream(1);
    let mut boot = [Vec::new(), Vec::new(), Vec::new()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let counts = multinomial(record.n_shots, &record.counts, total, &mut rng);
        let m = moments_of(&record.eigenvalues, &counts, record.n_shots);
        for k in 0..3 {
            boot[k].push(m[k]);
        }
    }
    Ok(MomentEstimates {
        mean,
        m2,
        m3,
        se_mean: std_dev(&boot[0]),
        se_m2: std_dev(&boot[1]),
        se_m3: std_dev(&boot[2]),
        bootstrap_resamples: BOOTSTRAP_RESAMPLES,
    })
}

/// Sampled S with its propagated standard error and the two underlying records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SEstimate {
    pub s_hat: f64,
    pub standard_error: f64,
    pub seed: u64,
    pub records: Vec<MeasurementRecord>,
}

/// SplitMix64 finalizer over `seed + k`, used to give each preparation its own seed.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `S_hat = (1/2) sqrt(a^2 + b^2)` from separate x' and y' runs, with
/// `SE = (1/2) sqrt(a^2 se_a^2 + b^2 se_b^2) / sqrt(a^2 + b^2)`.
pub fn combine_s(a: &MomentEstimates, b: &MomentEstimates) -> (f64, f64) {
    let r = a.m3.hypot(b.m3);
    let se = if r > 0.0 {
        0.5 * ((a.m3 * a.se_m3).powi(2) + (b.m3 * b.se_m3).powi(2)).sqrt() / r
    } else {
        0.5 * a.se_m3.hypot(b.se_m3)
    };
    (0.5 * r, se)
}

/// Measures J_x' and J_y' on independent preparations (they do not commute).
pub fn estimate_s_from_samples(state: &SymmetricState, shots: u64, seed: u64) -> Result<SEstimate> {
    if shots < MIN_S_SHOTS {
        return Err(Error::InsufficientShots { got: shots, min: MIN_S_SHOTS });
    }
    let angles = rotation_angles(&mean_spin(state)?)?;
    let [xp, yp, _] = rotated_ops(&angles, state.n_atoms(), Space::Dicke)?;
    let rx = projective_sample(state, &xp, "Jx'", shots, derive_seed(seed, 1))?.with_estimates()?;
    let ry = projective_sample(state, &yp, "Jy'", shots, derive_seed(seed, 2))?.with_estimates()?;
    let (s_hat, standard_error) = combine_s(rx.estimates.as_ref().unwrap(), ry.estimates.as_ref().unwrap());
    Ok(SEstimate { s_hat, standard_error, seed, records: vec![rx, ry] })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRecord {
    pub operator_tags: [String; 2],
    pub outcomes: Vec<[f64; 2]>,
    pub probabilities: Vec<f64>,
    pub counts: Vec<u64>,
    #[serde(rename = "M")]
    pub n_shots: u64,
    pub seed: u64,
}

impl JointRecord {
    /// Counts summed over the second operator's outcomes.
    pub fn first_marginal(&self) -> Vec<(f64, u64)> {
        let mut out: Vec<(f64, u64)> = Vec::new();
        for (o, &c) in self.outcomes.iter().zip(&self.counts) {
            match out.last_mut() {
                Some(last) if (last.0 - o[0]).abs() <= DEGENERACY_TOL => last.1 += c,
                _ => out.push((o[0], c)),
            }
        }
        out
    }
}

/// Joint measurement of two commuting observables: `a` is diagonalized, then
/// `b` within each eigenspace of `a`.
pub fn joint_sample(
    state: &impl StateVector,
    ops: [(&OperatorMatrix, &str); 2],
    shots: u64,
    seed: u64,
) -> Result<JointRecord> {
    let [(a, tag_a), (b, tag_b)] = ops;
    check_observable(state, a)?;
    check_observable(state, b)?;
    if shots == 0 {
        return Err(Error::InsufficientShots { got: 0, min: 1 });
    }
    if a.commutator(b)?.max_abs() > COMMUTE_TOL {
        return Err(Error::InvalidArgument(format!("{tag_a} and {tag_b} do not commute")));
    }
    let psi = nalgebra::DVector::from_column_slice(state.amplitudes());
    let mut outcomes = Vec::new();
    let mut probabilities = Vec::new();
    let outer = eigenspaces(a.matrix());
    for (va, basis) in outer.values.iter().zip(&outer.vectors) {
        let restricted = basis.adjoint() * b.matrix() * basis;
        let inner = eigenspaces(&restricted);
        let coords = basis.adjoint() * &psi;
        for (vb, w) in inner.values.iter().zip(&inner.vectors) {
            outcomes.push([*va, *vb]);
            probabilities.push((w.adjoint() * &coords).iter().map(|c| c.norm_sqr()).sum::<f64>());
        }
    }
    let spectrum = Spectrum { eigenvalues: vec![0.0; outcomes.len()], probabilities: probabilities.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = draw(&spectrum, shots, &mut rng);
    Ok(JointRecord {
        operator_tags: [tag_a.to_string(), tag_b.to_string()],
        outcomes,
        probabilities,
        counts,
        n_shots: shots,
        seed,
    })
}
