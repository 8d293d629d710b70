//! Single-atom and collective pseudo-spin operators.
//!
//! Dense matrices are built in either the full 2^N product space or the
//! (N+1)-dimensional Dicke subspace. For large N the full-space collective
//! components are also available matrix-free through [`CollectiveComponent`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::{StateVector, MAX_FULL_ATOMS};

/// Hermiticity tolerance for the flag on [`OperatorMatrix`].
pub const HERMITIAN_TOL: f64 = 1e-13;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn direction(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c {
            'x' | 'X' => Some(Axis::X),
            'y' | 'Y' => Some(Axis::Y),
            'z' | 'Z' => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Full,
    Dicke,
}

impl Space {
    pub fn dim(self, n_atoms: usize) -> usize {
        match self {
            Space::Full => 1usize << n_atoms,
            Space::Dicke => n_atoms + 1,
        }
    }
}

/// 2x2 spin-1/2 component along `d` in the (upper, lower) basis:
/// `(1/2) [[dz, dx - i dy], [dx + i dy, -dz]]`.
pub fn spin_half(d: [f64; 3]) -> [[Complex64; 2]; 2] {
    let [dx, dy, dz] = d;
    [
        [Complex64::new(0.5 * dz, 0.0), Complex64::new(0.5 * dx, -0.5 * dy)],
        [Complex64::new(0.5 * dx, 0.5 * dy), Complex64::new(-0.5 * dz, 0.0)],
    ]
}

/// Dense operator tagged with its space and a hermiticity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    n_atoms: usize,
    space: Space,
    hermitian: bool,
    matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(n_atoms: usize, space: Space, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = space.dim(n_atoms);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let hermitian = hermitian_residual(&matrix) <= HERMITIAN_TOL;
        Ok(Self { n_atoms, space, hermitian, matrix })
    }

    fn from_parts(n_atoms: usize, space: Space, matrix: DMatrix<Complex64>) -> Self {
        let hermitian = hermitian_residual(&matrix) <= HERMITIAN_TOL;
        Self { n_atoms, space, hermitian, matrix }
    }

    pub fn identity(n_atoms: usize, space: Space) -> Self {
        let d = space.dim(n_atoms);
        Self::from_parts(n_atoms, space, DMatrix::identity(d, d))
    }

    pub fn zeros(n_atoms: usize, space: Space) -> Self {
        let d = space.dim(n_atoms);
        Self::from_parts(n_atoms, space, DMatrix::zeros(d, d))
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }
    pub fn space(&self) -> Space {
        self.space
    }
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.space != other.space || self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_parts(self.n_atoms, self.space, &self.matrix * &other.matrix))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_parts(self.n_atoms, self.space, &self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self::from_parts(self.n_atoms, self.space, &self.matrix - &other.matrix))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_parts(self.n_atoms, self.space, self.matrix.map(|x| x * c))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Debug dump: `{"space", "dim", "hermitian", "re": [[..]], "im": [[..]]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..self.dim()).map(|i| (0..self.dim()).map(|j| f(&self.matrix[(i, j)])).collect()).collect()
        };
        serde_json::json!({
            "space": self.space,
            "n_atoms": self.n_atoms,
            "dim": self.dim(),
            "hermitian": self.hermitian,
            "re": rows(|c| c.re),
            "im": rows(|c| c.im),
        })
    }
}

fn hermitian_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_full_dims(n_atoms: usize) -> Result<()> {
    if n_atoms == 0 {
        return Err(Error::InvalidArgument("operators need at least one atom".into()));
    }
    if n_atoms > MAX_FULL_ATOMS {
        return Err(Error::TooLarge { n_atoms, cap: MAX_FULL_ATOMS });
    }
    Ok(())
}

#[inline]
fn atom_mask(n_atoms: usize, atom: usize) -> usize {
    1usize << (n_atoms - atom)
}

/// Spin-1/2 operator on atom `atom` (1-based) along `direction`, identity elsewhere.
pub fn single_atom_op_along(atom: usize, direction: [f64; 3], n_atoms: usize) -> Result<OperatorMatrix> {
    check_full_dims(n_atoms)?;
    if atom == 0 || atom > n_atoms {
        return Err(Error::IndexOutOfRange { index: atom, n_atoms });
    }
    let m = spin_half(direction);
    let mask = atom_mask(n_atoms, atom);
    let dim = 1usize << n_atoms;
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for b in 0..dim {
        let s = usize::from(b & mask != 0);
        out[(b, b)] += m[s][s];
        out[(b, b ^ mask)] += m[s][1 - s];
    }
    Ok(OperatorMatrix::from_parts(n_atoms, Space::Full, out))
}

/// `J_{n,axis}` in the full space.
pub fn single_atom_op(atom: usize, axis: Axis, n_atoms: usize) -> Result<OperatorMatrix> {
    single_atom_op_along(atom, axis.direction(), n_atoms)
}

/// Collective component `sum_n d . J_n` in the full space.
pub fn collective_op_along(direction: [f64; 3], n_atoms: usize) -> Result<OperatorMatrix> {
    check_full_dims(n_atoms)?;
    let m = spin_half(direction);
    let dim = 1usize << n_atoms;
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for atom in 1..=n_atoms {
        let mask = atom_mask(n_atoms, atom);
        for b in 0..dim {
            let s = usize::from(b & mask != 0);
            out[(b, b)] += m[s][s];
            out[(b, b ^ mask)] += m[s][1 - s];
        }
    }
    Ok(OperatorMatrix::from_parts(n_atoms, Space::Full, out))
}

pub fn collective_op(axis: Axis, n_atoms: usize) -> Result<OperatorMatrix> {
    collective_op_along(axis.direction(), n_atoms)
}

/// Collective component along `direction` in the Dicke basis `|j, j-k>`,
/// from the ladder elements `<k-1|J+|k> = sqrt(k (N - k + 1))`.
pub fn collective_op_dicke_along(direction: [f64; 3], n_atoms: usize) -> Result<OperatorMatrix> {
    if n_atoms == 0 {
        return Err(Error::InvalidArgument("operators need at least one atom".into()));
    }
    let [dx, dy, dz] = direction;
    let dim = n_atoms + 1;
    let j = n_atoms as f64 / 2.0;
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for k in 0..dim {
        out[(k, k)] = Complex64::new(dz * (j - k as f64), 0.0);
        if k > 0 {
            let ladder = ((k * (n_atoms - k + 1)) as f64).sqrt();
            // J+ = Jx + iJy raises m, i.e. lowers k
            out[(k - 1, k)] = Complex64::new(0.5 * dx * ladder, -0.5 * dy * ladder);
            out[(k, k - 1)] = Complex64::new(0.5 * dx * ladder, 0.5 * dy * ladder);
        }
    }
    Ok(OperatorMatrix::from_parts(n_atoms, Space::Dicke, out))
}

pub fn collective_op_dicke(axis: Axis, n_atoms: usize) -> Result<OperatorMatrix> {
    collective_op_dicke_along(axis.direction(), n_atoms)
}

/// Collective component in whichever space is requested.
pub fn collective_in(space: Space, direction: [f64; 3], n_atoms: usize) -> Result<OperatorMatrix> {
    match space {
        Space::Full => collective_op_along(direction, n_atoms),
        Space::Dicke => collective_op_dicke_along(direction, n_atoms),
    }
}

/// `J^2 = Jx^2 + Jy^2 + Jz^2` in the requested space.
pub fn total_spin_squared(space: Space, n_atoms: usize) -> Result<OperatorMatrix> {
    let mut acc = OperatorMatrix::zeros(n_atoms, space);
    for axis in Axis::ALL {
        let j = collective_in(space, axis.direction(), n_atoms)?;
        acc = acc.add(&j.mul(&j)?)?;
    }
    Ok(acc)
}

/// Largest entry of `{J_{n,a}, J_{n,b}}`; zero for distinct axes.
pub fn anticommutator_check(atom: usize, a: Axis, b: Axis, n_atoms: usize) -> Result<f64> {
    if a == b {
        return Err(Error::InvalidArgument(format!(
            "anticommutator check needs distinct axes, got {a:?} twice"
        )));
    }
    let ja = single_atom_op(atom, a, n_atoms)?;
    let jb = single_atom_op(atom, b, n_atoms)?;
    Ok(ja.anticommutator(&jb)?.max_abs())
}

/// Apply a 2x2 single-atom matrix to atom `atom` (1-based) of a full-space vector.
pub fn apply_single_atom(v: &[Complex64], n_atoms: usize, atom: usize, m: &[[Complex64; 2]; 2]) -> Vec<Complex64> {
    let mask = atom_mask(n_atoms, atom);
    (0..v.len())
        .map(|b| {
            let s = usize::from(b & mask != 0);
            m[s][s] * v[b] + m[s][1 - s] * v[b ^ mask]
        })
        .collect()
}

/// Something that can act on a state vector.
pub trait Observable {
    fn n_atoms(&self) -> usize;
    fn space(&self) -> Space;
    fn dim(&self) -> usize;
    fn is_hermitian(&self) -> bool;
    fn apply(&self, v: &[Complex64]) -> Vec<Complex64>;
}

impl Observable for OperatorMatrix {
    fn n_atoms(&self) -> usize {
        self.n_atoms
    }
    fn space(&self) -> Space {
        self.space
    }
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn is_hermitian(&self) -> bool {
        self.hermitian
    }
    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let out = &self.matrix * DVector::from_column_slice(v);
        out.as_slice().to_vec()
    }
}

/// `<psi|A|psi>` with matching space and dimension checks.
pub fn expectation(state: &impl StateVector, op: &impl Observable) -> Result<Complex64> {
    check_matching(state, op)?;
    let v = state.amplitudes();
    Ok(inner(v, &op.apply(v)))
}

pub(crate) fn check_matching(state: &impl StateVector, op: &impl Observable) -> Result<()> {
    if state.space() != op.space() || state.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), got: op.dim() });
    }
    Ok(())
}

/// `<a|b>`, conjugating the left argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Matrix-free full-space collective component `sum_n d . J_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveComponent {
    pub n_atoms: usize,
    pub direction: [f64; 3],
}

impl CollectiveComponent {
    pub fn new(n_atoms: usize, direction: [f64; 3]) -> Self {
        Self { n_atoms, direction }
    }

    pub fn axis(n_atoms: usize, axis: Axis) -> Self {
        Self::new(n_atoms, axis.direction())
    }
}

impl Observable for CollectiveComponent {
    fn n_atoms(&self) -> usize {
        self.n_atoms
    }
    fn space(&self) -> Space {
        Space::Full
    }
    fn dim(&self) -> usize {
        1usize << self.n_atoms
    }
    fn is_hermitian(&self) -> bool {
        true
    }
    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let m = spin_half(self.direction);
        let n = self.n_atoms;
        (0..v.len())
            .map(|b| {
                (1..=n).fold(ZERO, |acc, atom| {
                    let mask = atom_mask(n, atom);
                    let s = usize::from(b & mask != 0);
                    acc + m[s][s] * v[b] + m[s][1 - s] * v[b ^ mask]
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    #[test]
    fn single_atom_z_and_x_squared() {
        let z = single_atom_op(1, Axis::Z, 1).unwrap();
        assert_eq!(z.matrix()[(0, 0)], Complex64::new(0.5, 0.0));
        assert_eq!(z.matrix()[(1, 1)], Complex64::new(-0.5, 0.0));
        assert_eq!(z.matrix()[(0, 1)], ZERO);
        let x = single_atom_op(1, Axis::X, 1).unwrap();
        let quarter = OperatorMatrix::identity(1, Space::Full).scale(Complex64::new(0.25, 0.0));
        assert_eq!(x.mul(&x).unwrap().max_abs_diff(&quarter).unwrap(), 0.0);
        assert!(x.is_hermitian() && z.is_hermitian());
    }

    #[test]
    fn relabeling_atoms_conjugates_single_atom_ops() {
        // permutation matrix swapping atoms 1 and 2 (bits 2 and 1 of a 3-bit index)
        let dim = 8;
        let swap = |b: usize| {
            let a1 = (b >> 2) & 1;
            let a2 = (b >> 1) & 1;
            (b & 1) | (a1 << 1) | (a2 << 2)
        };
        let mut p = DMatrix::from_element(dim, dim, ZERO);
        for b in 0..dim {
            p[(swap(b), b)] = Complex64::new(1.0, 0.0);
        }
        let y1 = single_atom_op(1, Axis::Y, 3).unwrap().into_matrix();
        let y2 = single_atom_op(2, Axis::Y, 3).unwrap().into_matrix();
        let conj = &p * y1 * p.transpose();
        assert!((conj - y2).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(single_atom_op(0, Axis::X, 3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(single_atom_op(4, Axis::X, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn collective_commutators_full_space() {
        let jx = collective_op(Axis::X, 3).unwrap();
        let jy = collective_op(Axis::Y, 3).unwrap();
        let jz = collective_op(Axis::Z, 3).unwrap();
        let r = jx.commutator(&jy).unwrap().max_abs_diff(&jz.scale(i())).unwrap();
        assert!(r <= 1e-13);
        let j1x = single_atom_op(1, Axis::X, 3).unwrap();
        let j2y = single_atom_op(2, Axis::Y, 3).unwrap();
        assert_eq!(j1x.commutator(&j2y).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn jz_eigenvalues_on_dicke_states() {
        use crate::states::SymmetricState;
        let jz = collective_op(Axis::Z, 4).unwrap();
        for k in 0..=4 {
            let f = SymmetricState::dicke(4, k).unwrap().to_full().unwrap();
            let v = crate::states::StateVector::amplitudes(&f);
            let out = jz.apply(v);
            let m = 2.0 - k as f64;
            for (o, a) in out.iter().zip(v) {
                assert!((o - a * m).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dicke_jz_and_casimir() {
        let jz = collective_op_dicke(Axis::Z, 3).unwrap();
        let want = [1.5, 0.5, -0.5, -1.5];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(jz.matrix()[(k, k)], Complex64::new(*w, 0.0));
        }
        for n in 3..=8 {
            let j = n as f64 / 2.0;
            let casimir = total_spin_squared(Space::Dicke, n).unwrap();
            let target = OperatorMatrix::identity(n, Space::Dicke).scale(Complex64::new(j * (j + 1.0), 0.0));
            assert!(casimir.max_abs_diff(&target).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn anticommutator_rejects_equal_axes() {
        assert!(anticommutator_check(1, Axis::X, Axis::Y, 3).unwrap() <= 1e-13);
        assert!(anticommutator_check(2, Axis::Y, Axis::Z, 3).unwrap() <= 1e-13);
        assert!(anticommutator_check(1, Axis::X, Axis::X, 3).is_err());
    }

    #[test]
    fn matrix_free_matches_dense() {
        use crate::states::{StateVector, SymmetricState};
        let f = SymmetricState::random(5, 2).unwrap().to_full().unwrap();
        let d = [0.3, -0.7, 0.2];
        let dense = collective_op_along(d, 5).unwrap().apply(f.amplitudes());
        let free = CollectiveComponent::new(5, d).apply(f.amplitudes());
        for (a, b) in dense.iter().zip(&free) {
            assert!((a - b).norm() < 1e-14);
        }
        let single = apply_single_atom(f.amplitudes(), 5, 3, &spin_half(d));
        let dense_single = single_atom_op_along(3, d, 5).unwrap().apply(f.amplitudes());
        for (a, b) in single.iter().zip(&dense_single) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn json_dump_shape() {
        let v = collective_op_dicke(Axis::Y, 3).unwrap().to_json();
        assert_eq!(v["dim"], 4);
        assert_eq!(v["space"], "dicke");
        assert_eq!(v["im"][0][1], -(3f64.sqrt()) / 2.0);
    }
}
