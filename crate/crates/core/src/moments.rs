//! Central moments along the rotated axes, triple-correlator sums and the
//! tripartite parameter `S = (1/2) sqrt(m3_x'^2 + m3_y'^2)`.
//!
//! Third moments are computed two independent ways:
//!
//! - *direct*: `<(A - <A>)^3>` with `A` the explicitly rotated collective
//!   operator. This is the value `S` is built from.
//! - *sum*: a weighted sum of the ten triple-correlator sums
//!   `sum_{p != q != r} <J_{p a} J_{q b} J_{r c}>`, weighted by the mean spin.
//!
//! Agreement of the two routes is the numerical statement that every
//! one- and two-atom contribution to the third moment cancels.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frame::{mean_spin, rotated_components, rotated_ops, rotation_angles, MeanSpin, RotationAngles};
use crate::operators::{
    apply_single_atom, check_matching, collective_op_dicke, inner, spin_half, Axis, Observable, OperatorMatrix,
    Space,
};
use crate::states::{FullState, StateVector, SymmetricState, MIN_SYMMETRIC_ATOMS, SYMMETRY_TOL};
use crate::FRAME_EPS;

/// Largest imaginary part accepted on a moment or correlator.
pub const IMAG_TOL: f64 = 1e-10;

/// `<(A - <A>)^order>` for `order` in {2, 3}. Does not assume `<A> = 0`.
pub fn central_moment(state: &impl StateVector, op: &impl Observable, order: u32) -> Result<f64> {
    if !(2..=3).contains(&order) {
        return Err(Error::InvalidArgument(format!("central moment order must be 2 or 3, got {order}")));
    }
    if !op.is_hermitian() {
        return Err(Error::InvalidArgument("central moments need a hermitian operator".into()));
    }
    check_matching(state, op)?;
    let v = state.amplitudes();
    let av = op.apply(v);
    let mean = inner(v, &av);
    if mean.im.abs() > IMAG_TOL {
        return Err(Error::Internal(format!("<A> has imaginary part {:e}", mean.im)));
    }
    let shifted: Vec<Complex64> = av.iter().zip(v).map(|(a, x)| a - x * mean.re).collect();
    let value = if order == 2 {
        inner(&shifted, &shifted)
    } else {
        let again: Vec<Complex64> =
            op.apply(&shifted).iter().zip(&shifted).map(|(a, x)| a - x * mean.re).collect();
        inner(&shifted, &again)
    };
    if value.im.abs() > IMAG_TOL {
        return Err(Error::Internal(format!("central moment has imaginary part {:e}", value.im)));
    }
    Ok(value.re)
}

/// The ten axis patterns of a three-atom correlator, up to reordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Xxx,
    Yyy,
    Zzz,
    Xyz,
    Xxy,
    Xxz,
    Xyy,
    Yyz,
    Xzz,
    Yzz,
}

impl Pattern {
    pub const ALL: [Pattern; 10] = [
        Pattern::Xxx,
        Pattern::Yyy,
        Pattern::Zzz,
        Pattern::Xyz,
        Pattern::Xxy,
        Pattern::Xxz,
        Pattern::Xyy,
        Pattern::Yyz,
        Pattern::Xzz,
        Pattern::Yzz,
    ];

    pub fn axes(self) -> [Axis; 3] {
        use Axis::*;
        match self {
            Pattern::Xxx => [X, X, X],
            Pattern::Yyy => [Y, Y, Y],
            Pattern::Zzz => [Z, Z, Z],
            Pattern::Xyz => [X, Y, Z],
            Pattern::Xxy => [X, X, Y],
            Pattern::Xxz => [X, X, Z],
            Pattern::Xyy => [X, Y, Y],
            Pattern::Yyz => [Y, Y, Z],
            Pattern::Xzz => [X, Z, Z],
            Pattern::Yzz => [Y, Z, Z],
        }
    }

    /// Number of distinct orderings of the axes (1, 3 or 6).
    pub fn multiplicity(self) -> f64 {
        let [a, b, c] = self.axes();
        match (a == b, b == c, a == c) {
            (true, true, _) => 1.0,
            (false, false, false) => 6.0,
            _ => 3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Xxx => "xxx",
            Pattern::Yyy => "yyy",
            Pattern::Zzz => "zzz",
            Pattern::Xyz => "xyz",
            Pattern::Xxy => "xxy",
            Pattern::Xxz => "xxz",
            Pattern::Xyy => "xyy",
            Pattern::Yyz => "yyz",
            Pattern::Xzz => "xzz",
            Pattern::Yzz => "yzz",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `sum over ordered distinct (p, q, r)` of `<J_{p a} J_{q b} J_{r c}>` for each pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleCorrelatorSet {
    values: [Complex64; 10],
}

impl TripleCorrelatorSet {
    fn from_values(values: [Complex64; 10]) -> Result<Self> {
        let set = Self { values };
        let worst = set.max_imag();
        if worst > IMAG_TOL {
            return Err(Error::Internal(format!("triple correlator has imaginary part {worst:e}")));
        }
        Ok(set)
    }

    pub fn get(&self, p: Pattern) -> f64 {
        self.values[p.index()].re
    }

    pub fn complex(&self, p: Pattern) -> Complex64 {
        self.values[p.index()]
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Serialize for TripleCorrelatorSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(10))?;
        for p in Pattern::ALL {
            map.serialize_entry(p.name(), &self.get(p))?;
        }
        map.end()
    }
}

fn ordered_triples(n: usize) -> f64 {
    (n * (n - 1) * (n - 2)) as f64
}

fn check_three_atoms(n: usize) -> Result<()> {
    if n < MIN_SYMMETRIC_ATOMS {
        return Err(Error::InvalidArgument(format!("triple correlators need at least 3 atoms, got {n}")));
    }
    Ok(())
}

/// `<v| J_{p a} J_{q b} J_{r c} |v>` by three matrix-free single-atom applications.
fn triple_expectation(v: &[Complex64], n: usize, atoms: [usize; 3], axes: [Axis; 3]) -> Complex64 {
    let mut w = apply_single_atom(v, n, atoms[2], &spin_half(axes[2].direction()));
    w = apply_single_atom(&w, n, atoms[1], &spin_half(axes[1].direction()));
    w = apply_single_atom(&w, n, atoms[0], &spin_half(axes[0].direction()));
    inner(v, &w)
}

/// Brute-force sum over every ordered triple of distinct atoms.
pub fn triple_correlators_full(f: &FullState) -> Result<TripleCorrelatorSet> {
    let n = f.n_atoms();
    check_three_atoms(n)?;
    let v = f.amplitudes();
    let mut values = [Complex64::new(0.0, 0.0); 10];
    for p in Pattern::ALL {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 1..=n {
            for b in (1..=n).filter(|&b| b != a) {
                for c in (1..=n).filter(|&c| c != a && c != b) {
                    acc += triple_expectation(v, n, [a, b, c], p.axes());
                }
            }
        }
        values[p.index()] = acc;
    }
    TripleCorrelatorSet::from_values(values)
}

/// Exchange-symmetric shortcut: atoms (1, 2, 3) times N(N-1)(N-2).
pub fn triple_correlators_symmetric_fast(f: &FullState) -> Result<TripleCorrelatorSet> {
    let n = f.n_atoms();
    check_three_atoms(n)?;
    let residual = f.asymmetric_residual();
    if residual > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { residual });
    }
    let v = f.amplitudes();
    let count = ordered_triples(n);
    let mut values = [Complex64::new(0.0, 0.0); 10];
    for p in Pattern::ALL {
        values[p.index()] = triple_expectation(v, n, [1, 2, 3], p.axes()) * count;
    }
    TripleCorrelatorSet::from_values(values)
}

type Mat2 = [[Complex64; 2]; 2];

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `sum_p O_p` in the Dicke basis for a single-atom 2x2 operator `O`,
/// through `O = o0 I + sum_c o_c sigma_c` and `sum_p sigma_{p c} = 2 J_c`.
fn summed_single_atom_dicke(o: &Mat2, n: usize) -> Result<DMatrix<Complex64>> {
    let o0 = (o[0][0] + o[1][1]) * 0.5;
    let mut out = DMatrix::identity(n + 1, n + 1) * (o0 * n as f64);
    for axis in Axis::ALL {
        let half = spin_half(axis.direction());
        // o_c = tr(sigma_c O) / 2 = tr(half O)
        let coeff = half[0][0] * o[0][0] + half[0][1] * o[1][0] + half[1][0] * o[0][1] + half[1][1] * o[1][1];
        out += collective_op_dicke(axis, n)?.into_matrix() * (coeff * 2.0);
    }
    Ok(out)
}

/// Correlator sums directly in the (N+1)-dimensional Dicke space.
///
/// Splitting `J_a J_b J_c = sum_{p,q,r}` by which indices coincide gives
/// `D_abc = J_a J_b J_c - K_ab J_c - J_b K_ac - J_a K_bc + T_abc + T_bac`
/// with `K_ab = sum_p a_p b_p` and `T_abc = sum_p a_p b_p c_p`, both of which
/// reduce to collective operators.
pub fn triple_correlators_dicke(s: &SymmetricState) -> Result<TripleCorrelatorSet> {
    let n = s.n_atoms();
    check_three_atoms(n)?;
    let v = nalgebra::DVector::from_column_slice(s.amplitudes());
    let j: Vec<DMatrix<Complex64>> =
        Axis::ALL.iter().map(|&a| collective_op_dicke(a, n).map(OperatorMatrix::into_matrix)).collect::<Result<_>>()?;
    let half: Vec<Mat2> = Axis::ALL.iter().map(|a| spin_half(a.direction())).collect();
    let pair = |a: Axis, b: Axis| summed_single_atom_dicke(&mat2_mul(&half[a.index()], &half[b.index()]), n);
    let triple = |a: Axis, b: Axis, c: Axis| {
        summed_single_atom_dicke(&mat2_mul(&mat2_mul(&half[a.index()], &half[b.index()]), &half[c.index()]), n)
    };
    let mut values = [Complex64::new(0.0, 0.0); 10];
    for p in Pattern::ALL {
        let [a, b, c] = p.axes();
        let (ja, jb, jc) = (&j[a.index()], &j[b.index()], &j[c.index()]);
        let d = ja * jb * jc - pair(a, b)? * jc - jb * pair(a, c)? - ja * pair(b, c)? + triple(a, b, c)?
            + triple(b, a, c)?;
        values[p.index()] = v.dotc(&(d * &v));
    }
    TripleCorrelatorSet::from_values(values)
}

/// Correlator sums in the state's own space: Dicke inclusion-exclusion for
/// symmetric states, brute force over triples for full states.
pub fn triple_correlators<S: StateVector + AsCorrelatorSource>(state: &S) -> Result<TripleCorrelatorSet> {
    state.correlators()
}

pub trait AsCorrelatorSource {
    fn correlators(&self) -> Result<TripleCorrelatorSet>;
}

impl AsCorrelatorSource for SymmetricState {
    fn correlators(&self) -> Result<TripleCorrelatorSet> {
        triple_correlators_dicke(self)
    }
}

impl AsCorrelatorSource for FullState {
    fn correlators(&self) -> Result<TripleCorrelatorSet> {
        triple_correlators_full(self)
    }
}

/// Normalization of the x' correlator-sum formula written in mean-spin components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorConvention {
    /// `1 / (|<J>|^3 rho^3)`, the form obtained by substituting the frame
    /// angles into the angle-form sum. Agrees with the direct route.
    #[default]
    Consistent,
    /// `1 / (|<J>| rho^3)`. Off from the direct route by a factor `|<J>|^2`;
    /// kept only so that discrepancy stays pinned by a test.
    AsPrinted,
}

fn check_frame(mean: &MeanSpin) -> Result<()> {
    if mean.magnitude.is_nan() || mean.magnitude <= FRAME_EPS {
        return Err(Error::FrameUndefined { magnitude: mean.magnitude });
    }
    Ok(())
}

/// Angle-form x' sum, regular for every (theta, phi).
pub fn third_moment_angle_form_xp(angles: &RotationAngles, c: &TripleCorrelatorSet) -> f64 {
    use Pattern::*;
    let (ct, st, cp, sp) = (angles.cos_theta, angles.sin_theta, angles.cos_phi, angles.sin_phi);
    c.get(Xxx) * ct.powi(3) * cp.powi(3) + c.get(Yyy) * ct.powi(3) * sp.powi(3) - c.get(Zzz) * st.powi(3)
        - 6.0 * c.get(Xyz) * st * ct * ct * sp * cp
        + 3.0 * c.get(Xxy) * ct.powi(3) * sp * cp * cp
        - 3.0 * c.get(Xxz) * st * ct * ct * cp * cp
        + 3.0 * c.get(Xyy) * ct.powi(3) * sp * sp * cp
        - 3.0 * c.get(Yyz) * st * ct * ct * sp * sp
        + 3.0 * c.get(Xzz) * st * st * ct * cp
        + 3.0 * c.get(Yzz) * st * st * ct * sp
}

/// Angle-form y' sum.
pub fn third_moment_angle_form_yp(angles: &RotationAngles, c: &TripleCorrelatorSet) -> f64 {
    use Pattern::*;
    let (cp, sp) = (angles.cos_phi, angles.sin_phi);
    -c.get(Xxx) * sp.powi(3) + c.get(Yyy) * cp.powi(3) + 3.0 * c.get(Xxy) * sp * sp * cp
        - 3.0 * c.get(Xyy) * sp * cp * cp
}

/// x' third moment from the correlator sums, weighted by mean-spin components.
///
/// Falls back to the angle form (with phi = 0) when the transverse mean spin
/// is below `FRAME_EPS`, where the component form is 0/0.
pub fn third_moment_sum_xp(mean: &MeanSpin, angles: &RotationAngles, c: &TripleCorrelatorSet) -> Result<f64> {
    third_moment_sum_xp_with(mean, angles, c, PrefactorConvention::Consistent)
}

pub fn third_moment_sum_xp_with(
    mean: &MeanSpin,
    angles: &RotationAngles,
    c: &TripleCorrelatorSet,
    convention: PrefactorConvention,
) -> Result<f64> {
    use Pattern::*;
    check_frame(mean)?;
    let (jx, jy, jz) = (mean.jx, mean.jy, mean.jz);
    let rho2 = jx * jx + jy * jy;
    if rho2.sqrt() <= FRAME_EPS {
        return Ok(third_moment_angle_form_xp(angles, c));
    }
    let rho4 = jx.powi(4) + jy.powi(4) + 2.0 * jx * jx * jy * jy;
    let rho6 = jx.powi(6) + jy.powi(6) + 3.0 * jx.powi(4) * jy * jy + 3.0 * jx * jx * jy.powi(4);
    let bracket = c.get(Xxx) * jz.powi(3) * jx.powi(3) + c.get(Yyy) * jz.powi(3) * jy.powi(3)
        - c.get(Zzz) * rho6
        - 6.0 * c.get(Xyz) * rho2 * jz * jz * jx * jy
        + 3.0 * c.get(Xxy) * jz.powi(3) * jx * jx * jy
        - 3.0 * c.get(Xxz) * rho2 * jx * jx * jz * jz
        + 3.0 * c.get(Xyy) * jz.powi(3) * jx * jy * jy
        - 3.0 * c.get(Yyz) * rho2 * jy * jy * jz * jz
        + 3.0 * c.get(Xzz) * jx * jz * rho4
        + 3.0 * c.get(Yzz) * jy * jz * rho4;
    let power = match convention {
        PrefactorConvention::Consistent => 3,
        PrefactorConvention::AsPrinted => 1,
    };
    Ok(bracket / (mean.magnitude.powi(power) * rho2.powf(1.5)))
}

/// y' third moment from the correlator sums.
pub fn third_moment_sum_yp(mean: &MeanSpin, angles: &RotationAngles, c: &TripleCorrelatorSet) -> Result<f64> {
    use Pattern::*;
    check_frame(mean)?;
    let (jx, jy) = (mean.jx, mean.jy);
    let rho2 = jx * jx + jy * jy;
    if rho2.sqrt() <= FRAME_EPS {
        return Ok(third_moment_angle_form_yp(angles, c));
    }
    let bracket = -c.get(Xxx) * jy.powi(3) + c.get(Yyy) * jx.powi(3) + 3.0 * c.get(Xxy) * jx * jy * jy
        - 3.0 * c.get(Xyy) * jx * jx * jy;
    Ok(bracket / rho2.powf(1.5))
}

/// `(1/2) sqrt(m3_x'^2 + m3_y'^2)`.
pub fn s_parameter(m3_xp: f64, m3_yp: f64) -> f64 {
    0.5 * m3_xp.hypot(m3_yp)
}

/// Relative tolerance with an absolute floor for comparing the two routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteTolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for RouteTolerance {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12 }
    }
}

impl RouteTolerance {
    /// `|a - b| / max(|a|, abs / rel)`; `<= rel` exactly when
    /// `|a - b| <= max(rel |a|, abs)`.
    pub fn deviation(&self, direct: f64, sum: f64) -> f64 {
        (direct - sum).abs() / direct.abs().max(self.abs / self.rel)
    }

    pub fn accepts(&self, direct: f64, sum: f64) -> bool {
        self.deviation(direct, sum) <= self.rel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisPair {
    pub m3_xp: f64,
    pub m3_yp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Routes {
    pub direct: AxisPair,
    pub sum: AxisPair,
    pub max_rel_dev: f64,
}

/// Everything computed for one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub n_atoms: usize,
    pub space: Space,
    pub mean_spin: MeanSpin,
    pub angles: RotationAngles,
    pub var_xp: f64,
    pub var_yp: f64,
    pub routes: Routes,
    pub correlators: TripleCorrelatorSet,
    pub s_parameter: f64,
}

impl MomentReport {
    pub fn m3_xp_direct(&self) -> f64 {
        self.routes.direct.m3_xp
    }
    pub fn m3_yp_direct(&self) -> f64 {
        self.routes.direct.m3_yp
    }
    pub fn m3_xp_sum(&self) -> f64 {
        self.routes.sum.m3_xp
    }
    pub fn m3_yp_sum(&self) -> f64 {
        self.routes.sum.m3_yp
    }

    pub fn routes_agree(&self, tol: &RouteTolerance) -> bool {
        tol.accepts(self.m3_xp_direct(), self.m3_xp_sum()) && tol.accepts(self.m3_yp_direct(), self.m3_yp_sum())
    }

    fn assemble(
        n_atoms: usize,
        space: Space,
        mean: MeanSpin,
        angles: RotationAngles,
        var: [f64; 2],
        direct: [f64; 2],
        correlators: TripleCorrelatorSet,
    ) -> Result<Self> {
        let sum = [
            third_moment_sum_xp(&mean, &angles, &correlators)?,
            third_moment_sum_yp(&mean, &angles, &correlators)?,
        ];
        let tol = RouteTolerance::default();
        let max_rel_dev = tol.deviation(direct[0], sum[0]).max(tol.deviation(direct[1], sum[1]));
        Ok(Self {
            n_atoms,
            space,
            mean_spin: mean,
            angles,
            var_xp: var[0],
            var_yp: var[1],
            routes: Routes {
                direct: AxisPair { m3_xp: direct[0], m3_yp: direct[1] },
                sum: AxisPair { m3_xp: sum[0], m3_yp: sum[1] },
                max_rel_dev,
            },
            correlators,
            s_parameter: s_parameter(direct[0], direct[1]),
        })
    }
}

/// Full report through the (N+1)-dimensional Dicke path.
pub fn entanglement_s(s: &SymmetricState) -> Result<MomentReport> {
    let n = s.n_atoms();
    let mean = mean_spin(s)?;
    let angles = rotation_angles(&mean)?;
    let [xp, yp, _] = rotated_ops(&angles, n, Space::Dicke)?;
    let var = [central_moment(s, &xp, 2)?, central_moment(s, &yp, 2)?];
    let direct = [central_moment(s, &xp, 3)?, central_moment(s, &yp, 3)?];
    MomentReport::assemble(n, Space::Dicke, mean, angles, var, direct, triple_correlators_dicke(s)?)
}

/// How the full-space path obtains correlator sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelatorMode {
    /// Every ordered triple; works for any state.
    BruteForce,
    /// One triple scaled by N(N-1)(N-2); exchange-symmetric states only.
    SymmetricFastPath,
}

/// Full report through the 2^N oracle path, using matrix-free operators.
pub fn entanglement_s_full(f: &FullState, mode: CorrelatorMode) -> Result<MomentReport> {
    let n = f.n_atoms();
    check_three_atoms(n)?;
    let mean = mean_spin(f)?;
    let angles = rotation_angles(&mean)?;
    let [xp, yp, _] = rotated_components(&angles, n);
    let var = [central_moment(f, &xp, 2)?, central_moment(f, &yp, 2)?];
    let direct = [central_moment(f, &xp, 3)?, central_moment(f, &yp, 3)?];
    let correlators = match mode {
        CorrelatorMode::BruteForce => triple_correlators_full(f)?,
        CorrelatorMode::SymmetricFastPath => triple_correlators_symmetric_fast(f)?,
    };
    MomentReport::assemble(n, Space::Full, mean, angles, var, direct, correlators)
}
