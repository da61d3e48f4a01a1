//! Semi-analytic Jost matrices: a Taylor table of the factorized matrices
//! around a center energy, its evaluation on any sheet, the convergence
//! domain of the underlying radial integrals, and accuracy maps comparing
//! the expansion against fresh direct solutions.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelSet, SheetSelector};
use crate::error::{JostError, Result};
use crate::potential::RadialPotential;
use crate::solver::{
    full_margin, integrate_tilde, jost_from_tilde, JostPair, SolverSettings, TildePair,
};

/// Taylor coefficients a_j, b_j of the factorized pair around `center`.
/// Sheet-independent: one table serves the whole Riemann surface. The table
/// embeds the channel set and solver settings it was built with, so a saved
/// file is self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct ExpansionTable {
    center: Complex64,
    a: Vec<DMatrix<Complex64>>,
    b: Vec<DMatrix<Complex64>>,
    channels: ChannelSet,
    theta: f64,
    settings: SolverSettings,
}

impl ExpansionTable {
    pub(crate) fn new(
        center: Complex64,
        a: Vec<DMatrix<Complex64>>,
        b: Vec<DMatrix<Complex64>>,
        channels: ChannelSet,
        theta: f64,
        settings: SolverSettings,
    ) -> Self {
        ExpansionTable { center, a, b, channels, theta, settings }
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    /// Highest retained power of (E - E0).
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn coefficient(&self, j: usize) -> Option<(&DMatrix<Complex64>, &DMatrix<Complex64>)> {
        self.a.get(j).map(|a| (a, &self.b[j]))
    }

    /// Horner evaluation of the factorized pair at `energy`.
    pub fn evaluate(&self, energy: Complex64) -> TildePair {
        let de = energy - self.center;
        let last = self.a.len() - 1;
        let mut a = self.a[last].clone();
        let mut b = self.b[last].clone();
        for j in (0..last).rev() {
            a = a * de + &self.a[j];
            b = b * de + &self.b[j];
        }
        TildePair { a, b, energy, theta: self.theta, steps: 0 }
    }

    /// Assemble the Jost pair at `energy` on `sheet` from the table alone.
    pub fn jost(&self, energy: Complex64, sheet: &SheetSelector) -> Result<JostPair> {
        let tp = self.evaluate(energy);
        jost_from_tilde(&self.channels, &tp, sheet)
    }

    /// A copy truncated to a lower order, for studying convergence in M.
    pub fn truncated(&self, order: usize) -> Result<ExpansionTable> {
        if order > self.order() {
            return Err(JostError::InvalidInput(format!(
                "cannot truncate order {} table to {order}",
                self.order()
            )));
        }
        Ok(ExpansionTable {
            center: self.center,
            a: self.a[..=order].to_vec(),
            b: self.b[..=order].to_vec(),
            channels: self.channels.clone(),
            theta: self.theta,
            settings: self.settings,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk form: complex numbers as [re, im], matrices row-major.
#[derive(Serialize, Deserialize)]
struct TableRepr {
    center: [f64; 2],
    order: usize,
    theta: f64,
    channels: ChannelSet,
    settings: SolverSettings,
    a: Vec<Vec<[f64; 2]>>,
    b: Vec<Vec<[f64; 2]>>,
}

fn mat_to_rows(m: &DMatrix<Complex64>) -> Vec<[f64; 2]> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            out.push([m[(r, c)].re, m[(r, c)].im]);
        }
    }
    out
}

fn rows_to_mat(rows: &[[f64; 2]], n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |r, c| Complex64::new(rows[r * n + c][0], rows[r * n + c][1]))
}

impl From<ExpansionTable> for TableRepr {
    fn from(t: ExpansionTable) -> Self {
        TableRepr {
            center: [t.center.re, t.center.im],
            order: t.order(),
            theta: t.theta,
            channels: t.channels,
            settings: t.settings,
            a: t.a.iter().map(mat_to_rows).collect(),
            b: t.b.iter().map(mat_to_rows).collect(),
        }
    }
}

impl TryFrom<TableRepr> for ExpansionTable {
    type Error = String;

    fn try_from(r: TableRepr) -> std::result::Result<Self, String> {
        let n = r.channels.len();
        if r.a.len() != r.order + 1 || r.b.len() != r.order + 1 {
            return Err(format!(
                "expected {} coefficient matrices, found {} and {}",
                r.order + 1,
                r.a.len(),
                r.b.len()
            ));
        }
        if r.a.iter().chain(r.b.iter()).any(|m| m.len() != n * n) {
            return Err(format!("coefficient matrices must have {n}x{n} entries"));
        }
        if !(r.center[0].is_finite() && r.center[1].is_finite()) {
            return Err("non-finite expansion center".into());
        }
        Ok(ExpansionTable {
            center: Complex64::new(r.center[0], r.center[1]),
            a: r.a.iter().map(|m| rows_to_mat(m, n)).collect(),
            b: r.b.iter().map(|m| rows_to_mat(m, n)).collect(),
            channels: r.channels,
            theta: r.theta,
            settings: r.settings,
        })
    }
}

/// Margin of the unrotated convergence domain at E: the slowest potential
/// decay must beat the combined growth of the free solutions of every channel
/// pair. Positive inside the domain.
pub fn domain_margin(cs: &ChannelSet, pot: &dyn RadialPotential, energy: Complex64) -> Result<f64> {
    let k = cs.momenta(energy, &cs.physical_sheet())?;
    Ok(full_margin(&k, &pot.decay_rates(), 0.0))
}

pub fn domain_contains(cs: &ChannelSet, pot: &dyn RadialPotential, energy: Complex64) -> Result<bool> {
    Ok(domain_margin(cs, pot, energy)? > 0.0)
}

/// Where the domain boundary crosses the real axis inside [lo, hi]: bisect
/// the margin's sign change. None if the margin does not change sign.
pub fn real_axis_crossing(
    cs: &ChannelSet,
    pot: &dyn RadialPotential,
    lo: f64,
    hi: f64,
) -> Result<Option<f64>> {
    let m = |e: f64| domain_margin(cs, pot, Complex64::new(e, 0.0));
    let (mut lo, mut hi) = (lo, hi);
    let (mut mlo, mhi) = (m(lo)?, m(hi)?);
    if mlo == 0.0 {
        return Ok(Some(lo));
    }
    if mlo * mhi > 0.0 {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mm = m(mid)?;
        if mm == 0.0 || hi - lo < 1e-12 * (1.0 + mid.abs()) {
            return Ok(Some(mid));
        }
        if mlo * mm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            mlo = mm;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Rectangular grid in the complex energy plane, inclusive of its corners.
/// Point counts default to 101 per axis when deserialized from a config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re_min: f64,
    pub re_max: f64,
    #[serde(default = "default_grid_n")]
    pub n_re: usize,
    pub im_min: f64,
    pub im_max: f64,
    #[serde(default = "default_grid_n")]
    pub n_im: usize,
}

fn default_grid_n() -> usize {
    101
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_re == 0 || self.n_im == 0 {
            return Err(JostError::InvalidInput("grid needs at least one point per axis".into()));
        }
        if !(self.re_min.is_finite()
            && self.re_max.is_finite()
            && self.im_min.is_finite()
            && self.im_max.is_finite())
        {
            return Err(JostError::InvalidInput("non-finite grid bounds".into()));
        }
        if self.re_max < self.re_min || self.im_max < self.im_min {
            return Err(JostError::InvalidInput("grid bounds out of order".into()));
        }
        Ok(())
    }

    fn axis(&self, min: f64, max: f64, n: usize, i: usize) -> f64 {
        if n == 1 {
            min
        } else {
            min + (max - min) * i as f64 / (n - 1) as f64
        }
    }

    pub fn point(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(
            self.axis(self.re_min, self.re_max, self.n_re, i_re),
            self.axis(self.im_min, self.im_max, self.n_im, i_im),
        )
    }

    /// Row-major points, imaginary axis outer and ascending.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_re * self.n_im);
        for i_im in 0..self.n_im {
            for i_re in 0..self.n_re {
                out.push(self.point(i_re, i_im));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Relative error of the expansion's det F_in against a direct solution, per
/// grid point. Cells where the direct solver has no convergent contour are
/// None rather than poisoning the map.
#[derive(Debug, Clone)]
pub struct AccuracyMap {
    pub grid: GridSpec,
    pub sheet: SheetSelector,
    pub rel_err: Vec<Option<f64>>,
}

impl AccuracyMap {
    pub fn value(&self, i_re: usize, i_im: usize) -> Option<f64> {
        self.rel_err[i_im * self.grid.n_re + i_re]
    }

    /// How many computed cells are below the given relative error.
    pub fn cells_below(&self, threshold: f64) -> usize {
        self.rel_err.iter().flatten().filter(|&&e| e < threshold).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_E,im_E,rel_err\n");
        for i_im in 0..self.grid.n_im {
            for i_re in 0..self.grid.n_re {
                let e = self.grid.point(i_re, i_im);
                let v = self.value(i_re, i_im);
                match v {
                    Some(x) => out.push_str(&format!("{},{},{:e}\n", e.re, e.im, x)),
                    None => out.push_str(&format!("{},{},\n", e.re, e.im)),
                }
            }
        }
        out
    }
}

/// det F_in via the threshold-safe half-sum form: momenta enter only through
/// k^(2l+1), never in a denominator.
pub(crate) fn det_fin_tilde(
    cs: &ChannelSet,
    tp: &TildePair,
    sheet: &SheetSelector,
) -> Result<Complex64> {
    let n = cs.len();
    let k = cs.momenta(tp.energy, sheet)?;
    let mut h = DMatrix::zeros(n, n);
    for (m, ch) in cs.channels().iter().enumerate() {
        let kpow = k[m].powi(2 * ch.angular_momentum as i32 + 1);
        for q in 0..n {
            h[(m, q)] = 0.5 * tp.a[(m, q)] - Complex64::new(0.0, 0.5) * kpow * tp.b[(m, q)];
        }
    }
    Ok(h.lu().determinant())
}

/// Compare the table against direct solutions of the same problem over a
/// grid. Parallel over grid points; the output ordering is fixed by the grid,
/// not by worker scheduling.
pub fn accuracy_map(
    table: &ExpansionTable,
    pot: &dyn RadialPotential,
    grid: &GridSpec,
    sheet: &SheetSelector,
    settings: &SolverSettings,
) -> Result<AccuracyMap> {
    grid.validate()?;
    let cs = table.channels();
    let points = grid.points();
    let rel_err: Vec<Option<f64>> = points
        .par_iter()
        .map(|&e| {
            let exp_det = det_fin_tilde(cs, &table.evaluate(e), sheet).ok()?;
            let tp = integrate_tilde(cs, pot, e, settings).ok()?;
            let dir_det = det_fin_tilde(cs, &tp, sheet).ok()?;
            if dir_det.norm() == 0.0 {
                return None;
            }
            Some((exp_det - dir_det).norm() / dir_det.norm())
        })
        .collect();
    Ok(AccuracyMap { grid: *grid, sheet: sheet.clone(), rel_err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{NoroTaylorPotential, ZeroPotential};
    use crate::solver::integrate_coefficients;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_potential_table_is_identity_plus_nothing() {
        let cs = ChannelSet::noro_taylor();
        let pot = ZeroPotential::new(2);
        let s = SolverSettings::default();
        let t = integrate_coefficients(&cs, &pot, c(3.0, 0.5), 3, &s).unwrap();
        assert_eq!(t.order(), 3);
        let (a0, b0) = t.coefficient(0).unwrap();
        for m in 0..2 {
            for q in 0..2 {
                let want = if m == q { Complex64::ONE } else { Complex64::ZERO };
                assert!((a0[(m, q)] - want).norm() < 1e-12);
                assert!(b0[(m, q)].norm() < 1e-12);
            }
        }
        for j in 1..=3 {
            let (aj, bj) = t.coefficient(j).unwrap();
            assert!(aj.iter().all(|v| v.norm() < 1e-12));
            assert!(bj.iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn zeroth_coefficient_matches_tilde_solution() {
        let cs = ChannelSet::noro_taylor();
        let pot = NoroTaylorPotential;
        let s = SolverSettings::default();
        let e0 = c(5.0, 0.0);
        let t = integrate_coefficients(&cs, &pot, e0, 4, &s).unwrap();
        let tp = integrate_tilde(&cs, &pot, e0, &s).unwrap();
        let ev = t.evaluate(e0);
        let scale = tp.a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for m in 0..2 {
            for q in 0..2 {
                assert!((ev.a[(m, q)] - tp.a[(m, q)]).norm() < 1e-10 * scale);
                assert!((ev.b[(m, q)] - tp.b[(m, q)]).norm() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn expansion_tracks_direct_solution_nearby() {
        let cs = ChannelSet::noro_taylor();
        let pot = NoroTaylorPotential;
        let s = SolverSettings::default();
        let t = integrate_coefficients(&cs, &pot, c(5.0, 0.0), 5, &s).unwrap();
        let sheet: SheetSelector = "--".parse().unwrap();
        // 4.8 sits close to the det zero at the narrow resonance, which
        // amplifies the relative error; the other tolerances scale with the
        // distance from the expansion center (truncation goes like |dE|^6)
        for (e, tol) in [(c(4.8, 0.0), 1e-3), (c(5.2, -0.1), 5e-4), (c(4.9, 0.15), 1e-4)] {
            let de = det_fin_tilde(&cs, &t.evaluate(e), &sheet).unwrap();
            let tp = integrate_tilde(&cs, &pot, e, &s).unwrap();
            let dd = det_fin_tilde(&cs, &tp, &sheet).unwrap();
            let rel = (de - dd).norm() / dd.norm();
            assert!(rel < tol, "rel {rel} at {e}");
        }
    }

    #[test]
    fn json_roundtrip_preserves_table() {
        let cs = ChannelSet::noro_taylor();
        let pot = NoroTaylorPotential;
        let s = SolverSettings::default();
        let t = integrate_coefficients(&cs, &pot, c(5.0, 0.0), 2, &s).unwrap();
        let text = t.to_json().unwrap();
        let back = ExpansionTable::from_json(&text).unwrap();
        assert_eq!(t, back);
        // and the serialization is stable
        assert_eq!(text, back.to_json().unwrap());
    }

    #[test]
    fn malformed_table_is_rejected() {
        let bad = r#"{"center":[5.0,0.0],"order":2,"theta":0.0,
            "channels":{"channels":[{"threshold":0.0,"reduced_mass":1.0,"angular_momentum":0}],"hbar":1.0},
            "settings":{"r_min":1e-6,"r_max":30.0,"rotation":"auto","rel_tol":1e-12,"abs_tol":1e-14,"max_steps":1000000},
            "a":[[[1.0,0.0]]],"b":[[[0.0,0.0]]]}"#;
        assert!(ExpansionTable::from_json(bad).is_err());
    }

    #[test]
    fn domain_boundary_crosses_at_minus_point_o25() {
        // the second channel's threshold at 0.1 drives the boundary:
        // 1 = 2 sqrt(2 (0.1 - E)) at E = -0.025 exactly
        let cs = ChannelSet::noro_taylor();
        let pot = NoroTaylorPotential;
        let x = real_axis_crossing(&cs, &pot, -1.0, 0.05).unwrap().unwrap();
        assert!((x + 0.025).abs() < 1e-6, "crossing at {x}");
        assert!(domain_contains(&cs, &pot, c(0.0, 0.0)).unwrap());
        assert!(!domain_contains(&cs, &pot, c(-1.0, 0.0)).unwrap());
    }

    #[test]
    fn grid_points_are_row_major_and_inclusive() {
        let g = GridSpec { re_min: 0.0, re_max: 1.0, n_re: 3, im_min: -1.0, im_max: 0.0, n_im: 2 };
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], c(0.0, -1.0));
        assert_eq!(p[2], c(1.0, -1.0));
        assert_eq!(p[5], c(1.0, 0.0));
    }

    #[test]
    fn accuracy_map_is_tiny_at_center_and_grows_outward() {
        let cs = ChannelSet::noro_taylor();
        let pot = NoroTaylorPotential;
        let s = SolverSettings::default();
        let t = integrate_coefficients(&cs, &pot, c(5.0, 0.0), 5, &s).unwrap();
        let grid = GridSpec { re_min: 4.0, re_max: 6.0, n_re: 3, im_min: 0.0, im_max: 0.0, n_im: 1 };
        let map = accuracy_map(&t, &pot, &grid, &"--".parse().unwrap(), &s).unwrap();
        let center = map.value(1, 0).unwrap();
        assert!(center < 1e-10, "center rel err {center}");
        assert!(map.value(0, 0).unwrap() > center);
        assert!(map.value(2, 0).unwrap() > center);
        let csv = map.to_csv();
        assert!(csv.starts_with("re_E,im_E,rel_err\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
