//! Interaction matrices V_nn'(r), already scaled to the radial equation
//! u'' + (k^2 - l(l+1)/r^2) u = V u. A potential must vanish exponentially;
//! the pairwise decay rates feed the convergence-margin checks.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{JostError, Result};

pub trait RadialPotential: Send + Sync {
    fn n_channels(&self) -> usize;

    /// Writes V(r) into `out` (row-major, n^2 entries).
    fn evaluate_into(&self, r: Complex64, out: &mut [Complex64]) -> Result<()>;

    /// Pairwise asymptotic decay rates lambda_nn' of |V_nn'(r)| ~ e^(-lambda r).
    fn decay_rates(&self) -> DMatrix<f64>;

    /// Largest |theta| for which the potential keeps decaying along the ray
    /// r = |r| e^(i theta).
    fn max_rotation(&self) -> f64;

    fn min_decay_rate(&self) -> f64 {
        self.decay_rates().iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    fn evaluate(&self, r: Complex64) -> Result<DMatrix<Complex64>> {
        let n = self.n_channels();
        let mut out = vec![Complex64::ZERO; n * n];
        self.evaluate_into(r, &mut out)?;
        Ok(DMatrix::from_row_slice(n, n, &out))
    }
}

fn check_r(r: Complex64) -> Result<()> {
    if !r.re.is_finite() || !r.im.is_finite() {
        return Err(JostError::InvalidInput("non-finite radius".into()));
    }
    Ok(())
}

/// The two-channel benchmark of Noro and Taylor:
/// V(r) = [[-1.0, -7.5], [-7.5, 7.5]] r^2 e^(-r).
#[derive(Debug, Clone, Copy, Default)]
pub struct NoroTaylorPotential;

pub const NORO_TAYLOR_STRENGTH: [[f64; 2]; 2] = [[-1.0, -7.5], [-7.5, 7.5]];

impl RadialPotential for NoroTaylorPotential {
    fn n_channels(&self) -> usize {
        2
    }

    fn evaluate_into(&self, r: Complex64, out: &mut [Complex64]) -> Result<()> {
        check_r(r)?;
        let shape = r * r * (-r).exp();
        for i in 0..2 {
            for j in 0..2 {
                out[2 * i + j] = NORO_TAYLOR_STRENGTH[i][j] * shape;
            }
        }
        Ok(())
    }

    fn decay_rates(&self) -> DMatrix<f64> {
        DMatrix::from_element(2, 2, 1.0)
    }

    fn max_rotation(&self) -> f64 {
        FRAC_PI_2
    }
}

/// V(r) = C r^p e^(-rate r) with a constant coupling matrix C.
#[derive(Debug, Clone)]
pub struct PolyExpPotential {
    strength: DMatrix<f64>,
    power: u32,
    rate: f64,
}

impl PolyExpPotential {
    pub fn new(strength: DMatrix<f64>, power: u32, rate: f64) -> Result<Self> {
        if !strength.is_square() || strength.is_empty() {
            return Err(JostError::InvalidInput("strength matrix must be square".into()));
        }
        if strength.iter().any(|v| !v.is_finite()) {
            return Err(JostError::InvalidInput("non-finite strength entry".into()));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(JostError::InvalidInput(format!("decay rate must be positive, got {rate}")));
        }
        Ok(PolyExpPotential { strength, power, rate })
    }
}

impl RadialPotential for PolyExpPotential {
    fn n_channels(&self) -> usize {
        self.strength.nrows()
    }

    fn evaluate_into(&self, r: Complex64, out: &mut [Complex64]) -> Result<()> {
        check_r(r)?;
        let shape = r.powu(self.power) * (-self.rate * r).exp();
        let n = self.n_channels();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.strength[(i, j)] * shape;
            }
        }
        Ok(())
    }

    fn decay_rates(&self) -> DMatrix<f64> {
        let n = self.n_channels();
        DMatrix::from_element(n, n, self.rate)
    }

    fn max_rotation(&self) -> f64 {
        FRAC_PI_2
    }
}

/// No interaction at all; Jost matrices collapse to I/2 and S to I.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPotential {
    n: usize,
}

impl ZeroPotential {
    pub fn new(n: usize) -> Self {
        ZeroPotential { n }
    }
}

impl RadialPotential for ZeroPotential {
    fn n_channels(&self) -> usize {
        self.n
    }

    fn evaluate_into(&self, r: Complex64, out: &mut [Complex64]) -> Result<()> {
        check_r(r)?;
        out.fill(Complex64::ZERO);
        Ok(())
    }

    fn decay_rates(&self) -> DMatrix<f64> {
        DMatrix::from_element(self.n, self.n, f64::INFINITY)
    }

    fn max_rotation(&self) -> f64 {
        FRAC_PI_2
    }
}

/// Potential sampled on a radial grid, e.g. from another program's output.
///
/// File layout: a `# r V11 V12 ... VNN` header, then one row per radius with
/// 1 + N^2 whitespace-separated values (row-major matrix), radii strictly
/// increasing. Interpolation is cubic Hermite inside the grid; beyond the
/// last point every entry continues with the exponential tail fitted to the
/// final grid points. Grid data only exists on the real axis, so complex
/// rotation is not available.
#[derive(Debug, Clone)]
pub struct TabulatedPotential {
    radii: Vec<f64>,
    /// values[i] is the row-major matrix at radii[i]
    values: Vec<Vec<f64>>,
    slopes: Vec<Vec<f64>>,
    decay: DMatrix<f64>,
    n: usize,
}

impl TabulatedPotential {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let bad = |msg: String| JostError::Potential(msg);
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| bad("empty potential table".into()))?;
        if !header.trim_start().starts_with('#') {
            return Err(bad("potential table must start with a '# r V11 ...' header".into()));
        }
        let mut radii = Vec::new();
        let mut values: Vec<Vec<f64>> = Vec::new();
        let mut n = 0usize;
        for (lineno, line) in lines {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| bad(format!("line {}: cannot parse {tok:?}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if values.is_empty() {
                let m = nums.len().saturating_sub(1);
                let root = (m as f64).sqrt().round() as usize;
                if m == 0 || root * root != m {
                    return Err(bad(format!(
                        "line {}: {} value columns do not form a square matrix",
                        lineno + 1,
                        m
                    )));
                }
                n = root;
            } else if nums.len() != 1 + n * n {
                return Err(bad(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    1 + n * n,
                    nums.len()
                )));
            }
            if let Some(&last) = radii.last() {
                if nums[0] <= last {
                    return Err(bad(format!(
                        "line {}: radii must be strictly increasing ({} after {})",
                        lineno + 1,
                        nums[0],
                        last
                    )));
                }
            } else if nums[0] < 0.0 {
                return Err(bad(format!("line {}: negative radius", lineno + 1)));
            }
            radii.push(nums[0]);
            values.push(nums[1..].to_vec());
        }
        if radii.len() < 4 {
            return Err(bad(format!("need at least 4 grid points, found {}", radii.len())));
        }
        let decay = fit_tail_decay(&radii, &values, n)?;
        let slopes = hermite_slopes(&radii, &values, n);
        Ok(TabulatedPotential { radii, values, slopes, decay, n })
    }

    /// Renders a table in the file format; useful for round-trip tests.
    pub fn render(radii: &[f64], rows: &[Vec<f64>], n: usize) -> String {
        let mut out = String::from("# r");
        for i in 1..=n {
            for j in 1..=n {
                let _ = write!(out, " V{i}{j}");
            }
        }
        out.push('\n');
        for (r, row) in radii.iter().zip(rows) {
            let _ = write!(out, "{r:.17e}");
            for v in row {
                let _ = write!(out, " {v:.17e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Least-squares slope of ln|V| over the last few usable points, per entry.
fn fit_tail_decay(radii: &[f64], values: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    let mut decay = DMatrix::zeros(n, n);
    let tail = 4.min(radii.len());
    for e in 0..n * n {
        let pts: Vec<(f64, f64)> = (radii.len() - tail..radii.len())
            .filter(|&i| values[i][e].abs() > 1e-290)
            .map(|i| (radii[i], values[i][e].abs().ln()))
            .collect();
        if pts.len() < 2 {
            // entry is flat zero at the tail; it cannot limit convergence
            decay[(e / n, e % n)] = f64::INFINITY;
            continue;
        }
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        if !slope.is_finite() || slope >= 0.0 {
            return Err(JostError::Potential(format!(
                "entry V{}{} does not decay at the end of the grid",
                e / n + 1,
                e % n + 1
            )));
        }
        decay[(e / n, e % n)] = -slope;
    }
    Ok(decay)
}

fn hermite_slopes(radii: &[f64], values: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let last = radii.len() - 1;
    (0..=last)
        .map(|i| {
            (0..n * n)
                .map(|e| {
                    if i == 0 {
                        (values[1][e] - values[0][e]) / (radii[1] - radii[0])
                    } else if i == last {
                        (values[last][e] - values[last - 1][e]) / (radii[last] - radii[last - 1])
                    } else {
                        (values[i + 1][e] - values[i - 1][e]) / (radii[i + 1] - radii[i - 1])
                    }
                })
                .collect()
        })
        .collect()
}

impl RadialPotential for TabulatedPotential {
    fn n_channels(&self) -> usize {
        self.n
    }

    fn evaluate_into(&self, r: Complex64, out: &mut [Complex64]) -> Result<()> {
        check_r(r)?;
        if r.im != 0.0 {
            return Err(JostError::Potential(
                "tabulated potential is only defined on the real axis; disable complex rotation"
                    .into(),
            ));
        }
        let x = r.re;
        let nn = self.n * self.n;
        if x >= *self.radii.last().unwrap() {
            let r0 = *self.radii.last().unwrap();
            let v0 = self.values.last().unwrap();
            for e in 0..nn {
                let lam = self.decay[(e / self.n, e % self.n)];
                let tail = if lam.is_finite() { (-lam * (x - r0)).exp() } else { 0.0 };
                out[e] = Complex64::new(v0[e] * tail, 0.0);
            }
            return Ok(());
        }
        if x <= self.radii[0] {
            for e in 0..nn {
                out[e] = Complex64::new(self.values[0][e], 0.0);
            }
            return Ok(());
        }
        let hi = self.radii.partition_point(|&g| g < x);
        let lo = hi - 1;
        let h = self.radii[hi] - self.radii[lo];
        let t = (x - self.radii[lo]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        for e in 0..nn {
            let v = h00 * self.values[lo][e]
                + h10 * h * self.slopes[lo][e]
                + h01 * self.values[hi][e]
                + h11 * h * self.slopes[hi][e];
            out[e] = Complex64::new(v, 0.0);
        }
        Ok(())
    }

    fn decay_rates(&self) -> DMatrix<f64> {
        self.decay.clone()
    }

    fn max_rotation(&self) -> f64 {
        0.0
    }
}
