use std::fmt::Write as _;
use std::process::ExitCode;

use serde::{Deserialize, Serialize};

use trimoment::{entanglement_s, mean_spin, Complex64, Error, SymmetricState};

use crate::commands::route_tolerance;
use crate::envelope::{sha256_hex, unix_now, write_output, Failure, RunResult, EXIT_INVALID_INPUT};
use crate::ScanArgs;

pub const COLUMNS: [&str; 13] = [
    "index",
    "alpha",
    "s",
    "m3_xp",
    "m3_yp",
    "var_xp",
    "var_yp",
    "jx",
    "jy",
    "jz",
    "theta",
    "phi",
    "frame_undefined",
];

/// The family `coeffs[i] = cos(alpha)`, `coeffs[j] = sin(alpha)`, others zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub n_atoms: usize,
    #[serde(default = "default_indices")]
    pub indices: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

fn default_indices() -> [usize; 2] {
    [0, 1]
}

impl Grid {
    pub fn parse(text: &str, n_override: Option<usize>) -> Result<Self, String> {
        let mut g: Grid = serde_json::from_str(text).map_err(|e| format!("malformed grid: {e}"))?;
        if let Some(n) = n_override {
            g.n_atoms = n;
        }
        if g.n_atoms < 3 {
            return Err(format!("grid needs at least 3 atoms, got {}", g.n_atoms));
        }
        let [i, j] = g.indices;
        if i == j || i > g.n_atoms || j > g.n_atoms {
            return Err(format!("indices {:?} must be distinct and at most {}", g.indices, g.n_atoms));
        }
        match (&g.alpha, &g.alphas) {
            (Some(r), None) => {
                if r.points == 0 || !r.start.is_finite() || !r.stop.is_finite() {
                    return Err("alpha range needs finite bounds and at least one point".into());
                }
            }
            (None, Some(v)) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err("alphas must be a non-empty list of finite numbers".into());
                }
            }
            _ => return Err("give exactly one of \"alpha\" or \"alphas\"".into()),
        }
        Ok(g)
    }

    pub fn alpha_values(&self) -> Vec<f64> {
        match (&self.alpha, &self.alphas) {
            (Some(r), _) if r.points == 1 => vec![r.start],
            (Some(r), _) => {
                let step = (r.stop - r.start) / (r.points - 1) as f64;
                (0..r.points).map(|k| if k == r.points - 1 { r.stop } else { r.start + step * k as f64 }).collect()
            }
            (None, Some(v)) => v.clone(),
            (None, None) => Vec::new(),
        }
    }

    pub fn state(&self, alpha: f64) -> Result<SymmetricState, Error> {
        let mut c = vec![Complex64::new(0.0, 0.0); self.n_atoms + 1];
        c[self.indices[0]] = Complex64::new(alpha.cos(), 0.0);
        c[self.indices[1]] = Complex64::new(alpha.sin(), 0.0);
        SymmetricState::new_normalized(self.n_atoms, c)
    }
}

fn row(index: usize, alpha: f64, grid: &Grid) -> Result<String, Error> {
    let state = grid.state(alpha)?;
    let cells: Vec<String> = match entanglement_s(&state) {
        Ok(r) => {
            let m = r.mean_spin;
            let vals = [
                r.s_parameter,
                r.m3_xp_direct(),
                r.m3_yp_direct(),
                r.var_xp,
                r.var_yp,
                m.jx,
                m.jy,
                m.jz,
                r.angles.theta,
                r.angles.phi,
            ];
            vals.iter().map(|v| format!("{v:?}")).chain(["0".to_string()]).collect()
        }
        Err(Error::FrameUndefined { .. }) => {
            let m = mean_spin(&state)?;
            let blank = || String::new();
            [blank(), blank(), blank(), blank(), blank(), format!("{:?}", m.jx), format!("{:?}", m.jy), format!("{:?}", m.jz)]
                .into_iter()
                .chain([blank(), blank(), "1".to_string()])
                .collect()
        }
        Err(e) => return Err(e),
    };
    Ok(format!("{index},{alpha:?},{}", cells.join(",")))
}

pub fn run(a: &ScanArgs) -> RunResult<ExitCode> {
    route_tolerance(&a.common)?;
    let grid = Grid::parse(&a.grid, a.n_atoms).map_err(|m| Failure::new(EXIT_INVALID_INPUT, m))?;
    let canonical = serde_json::to_string(&grid).expect("grid serializes");
    let mut out = String::new();
    let _ = writeln!(out, "# tool=trimoment version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        "# command=scan seed={} tolerance_rel={:?} tolerance_abs={:?}",
        a.common.seed, a.common.tolerance_rel, a.common.tolerance_abs
    );
    let _ = writeln!(out, "# input_sha256={}", sha256_hex(a.grid.as_bytes()));
    let _ = writeln!(out, "# generated_unix={}", unix_now());
    let _ = writeln!(out, "# grid={canonical}");
    let _ = writeln!(
        out,
        "# family: coeffs[{}] = cos(alpha), coeffs[{}] = sin(alpha), other coefficients 0",
        grid.indices[0], grid.indices[1]
    );
    let _ = writeln!(
        out,
        "# s, m3_* and var_* are along the rotated axes; frame_undefined = 1 leaves them and the angles empty"
    );
    let _ = writeln!(out, "{}", COLUMNS.join(","));
    for (k, alpha) in grid.alpha_values().into_iter().enumerate() {
        let line = row(k, alpha, &grid).map_err(|e| Failure::new(crate::envelope::exit_code(&e), e.to_string()))?;
        out.push_str(&line);
        out.push('\n');
    }
    write_output(a.common.output.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}
