//! Parameter sweeps: coincidence curves, model discrepancy scans and bunching windows.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{coincidence_entangled_or_limit, coincidence_literature, InterferenceModel};
use crate::engine::{coincidence_probability, DelayPair, QuadratureSpec};
use crate::model::{
    apply_beamsplitter, make_detuned_spectrum, make_entangled_spectrum, GridSpectrum, JointWaveFunction,
    ReducedSpectrum, SourceParams,
};
use crate::{Error, Result};

/// Golden-section refinement stops when the bracket is narrower than this, in ps.
pub const DTAU_MAX_TOLERANCE: f64 = 1e-4;

/// Fixed 12-significant-digit rendering used by every CSV writer.
pub fn format_number(x: f64) -> String {
    // avoid a distinct "-0" rendering
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Evenly spaced samples `start..=end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRange {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl LinearRange {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::Domain(format!("range bounds must be finite, got {start}:{end}")));
        }
        if start >= end {
            return Err(Error::Domain(format!("range start {start} must be below end {end}")));
        }
        if steps < 2 {
            return Err(Error::Domain(format!("range needs at least 2 steps, got {steps}")));
        }
        Ok(Self { start, end, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let h = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.end } else { self.start + i as f64 * h })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalPath {
    ClosedForm,
    Engine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub model: InterferenceModel,
    pub dtau_range: LinearRange,
    /// Frequency separations `ν = μ/2π` in THz for discrepancy scans.
    pub nu_range: Option<LinearRange>,
    pub params: SourceParams,
    pub path: EvalPath,
    /// Tabulated spectrum replacing the sinc source; engine path only.
    pub grid: Option<GridSpectrum>,
}

impl SweepSpec {
    /// `Δτ ∈ [−3, 3]` ps with 601 points, `ν ∈ [0.01, 2]` THz with 100 points, closed forms.
    pub fn with_defaults(model: InterferenceModel, params: SourceParams) -> Self {
        Self {
            model,
            dtau_range: LinearRange { start: -3.0, end: 3.0, steps: 601 },
            nu_range: Some(LinearRange { start: 0.01, end: 2.0, steps: 100 }),
            params,
            path: EvalPath::ClosedForm,
            grid: None,
        }
    }

    fn wave_function(&self) -> Result<JointWaveFunction> {
        let spectrum = match (&self.grid, self.model) {
            (Some(g), _) => ReducedSpectrum::Grid(g.clone()),
            (None, InterferenceModel::EntangledFull) => make_entangled_spectrum(&self.params),
            (None, InterferenceModel::Detuned) => make_detuned_spectrum(&self.params),
            (None, InterferenceModel::EntangledLiterature) => {
                return Err(Error::Unsupported(
                    "the literature approximation has no wave function; use the closed-form path".into(),
                ))
            }
        };
        Ok(apply_beamsplitter(&spectrum, &self.params))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub model: InterferenceModel,
    pub path: EvalPath,
    pub params: SourceParams,
    pub grid_source: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceCurve {
    /// `(Δτ [ps], P^c)` in increasing `Δτ`.
    pub points: Vec<(f64, f64)>,
    pub metadata: CurveMetadata,
}

impl CoincidenceCurve {
    /// CSV with header `dtau_ps,pc`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["dtau_ps", "pc"])?;
        for &(dtau, pc) in &self.points {
            w.write_record([format_number(dtau), format_number(pc)])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    /// Maximal delay intervals where `P^c < 1/2`, by linear interpolation between samples.
    pub fn bunching_intervals(&self) -> Vec<(f64, f64)> {
        let below = |p: f64| p < 0.5;
        let crossing = |(x0, y0): (f64, f64), (x1, y1): (f64, f64)| x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0);
        let mut out = Vec::new();
        let mut start = None;
        for (i, &(x, y)) in self.points.iter().enumerate() {
            match (start, below(y)) {
                (None, true) => {
                    start = Some(if i == 0 { x } else { crossing(self.points[i - 1], (x, y)) });
                }
                (Some(s), false) => {
                    out.push((s, crossing(self.points[i - 1], (x, y))));
                    start = None;
                }
                _ => {}
            }
        }
        if let (Some(s), Some(&(x, _))) = (start, self.points.last()) {
            out.push((s, x));
        }
        out
    }
}

/// Coincidence probability versus delay for the configured model.
pub fn sweep_delay(spec: &SweepSpec) -> Result<CoincidenceCurve> {
    let delays = spec.dtau_range.values();
    let mu = spec.params.detuning_mu();
    let xi = spec.params.bandwidth_xi();
    let phi = spec.params.symmetry_phase_phi();
    let pcs: Vec<f64> = match spec.path {
        EvalPath::ClosedForm => {
            if spec.grid.is_some() {
                return Err(Error::Unsupported("tabulated spectra need the engine path".into()));
            }
            delays
                .par_iter()
                .map(|&dtau| spec.model.coincidence(mu, xi, phi, dtau))
                .collect::<Result<_>>()?
        }
        EvalPath::Engine => {
            let wf = spec.wave_function()?;
            let quad = QuadratureSpec::default_for(&wf);
            delays
                .par_iter()
                .map(|&dtau| coincidence_probability(&wf, DelayPair::from_difference(dtau)?, &quad))
                .collect::<Result<_>>()?
        }
    };
    Ok(CoincidenceCurve {
        points: delays.into_iter().zip(pcs).collect(),
        metadata: CurveMetadata {
            model: spec.model,
            path: spec.path,
            params: spec.params,
            grid_source: spec.grid.is_some(),
        },
    })
}

/// `|P^c_full − P^c_literature|` at one delay.
pub fn model_discrepancy(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
    Ok((coincidence_entangled_or_limit(mu, xi, phi, dtau)? - coincidence_literature(mu, xi, phi, dtau)?).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRow {
    pub nu_thz: f64,
    pub dtau_max_ps: f64,
    pub max_abs_dpc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyTable {
    pub rows: Vec<DiscrepancyRow>,
    pub xi: f64,
    pub phi: f64,
    pub dtau_range: LinearRange,
}

impl DiscrepancyTable {
    /// CSV with header `nu_thz,dtau_max_ps,max_abs_dpc`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["nu_thz", "dtau_max_ps", "max_abs_dpc"])?;
        for r in &self.rows {
            w.write_record([r.nu_thz, r.dtau_max_ps, r.max_abs_dpc].map(format_number))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

/// Maximum of `f` on `[a, b]` by golden-section search, assuming one peak.
fn golden_max<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Delay of the largest model discrepancy for one `μ`.
///
/// The delay grid locates the peak; golden-section search then refines it to
/// [`DTAU_MAX_TOLERANCE`]. Equal grid values resolve toward the smallest `|Δτ|`.
pub fn max_discrepancy(mu: f64, xi: f64, phi: f64, delays: &[f64]) -> Result<(f64, f64)> {
    let values: Vec<f64> = delays
        .iter()
        .map(|&t| model_discrepancy(mu, xi, phi, t))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        let better = v > values[best] || (v == values[best] && delays[i].abs() < delays[best].abs());
        if better {
            best = i;
        }
    }
    let lo = delays[best.saturating_sub(1)];
    let hi = delays[(best + 1).min(delays.len() - 1)];
    let (x, fx) = golden_max(|t| model_discrepancy(mu, xi, phi, t), lo, hi, DTAU_MAX_TOLERANCE)?;
    if fx > values[best] {
        Ok((x, fx))
    } else {
        Ok((delays[best], values[best]))
    }
}

/// Largest `|P^c_full − P^c_literature|` and its delay for every `ν` in the scan range.
pub fn discrepancy_scan(spec: &SweepSpec) -> Result<DiscrepancyTable> {
    let nu_range = spec
        .nu_range
        .ok_or_else(|| Error::Domain("discrepancy scan needs a frequency range".into()))?;
    let xi = spec.params.bandwidth_xi();
    let phi = spec.params.symmetry_phase_phi();
    let delays = spec.dtau_range.values();
    let rows = nu_range
        .values()
        .par_iter()
        .map(|&nu| {
            if nu < 0.0 {
                return Err(Error::Domain(format!("frequency separation must be >= 0, got {nu}")));
            }
            let (dtau, value) = max_discrepancy(TAU * nu, xi, phi, &delays)?;
            Ok(DiscrepancyRow {
                nu_thz: nu,
                dtau_max_ps: dtau,
                max_abs_dpc: value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscrepancyTable {
        rows,
        xi,
        phi,
        dtau_range: spec.dtau_range,
    })
}

/// Bunching window of the zero-detuning, `φ = π` curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BunchingWindow {
    /// Inner edge `|Δτ|` where `P^c` crosses 1/2, in ps.
    pub inner_ps: f64,
    /// Outer edge, the end of the interference support `2/ξ`.
    pub outer_ps: f64,
    /// Delay of the deepest bunching.
    pub extremum_ps: f64,
    /// `P^c` at the extremum.
    pub min_pc: f64,
}

/// In `x = ξ|Δτ|/2` the zero-detuning curve is `P^c = (1 − d)/2` with
/// `d = (1 − x)(2x² + 2x − 1)`, positive on `x ∈ ((√3 − 1)/2, 1)` with its peak at `x = 1/√2`.
pub fn zero_detuning_bunching_window(xi: f64) -> Result<BunchingWindow> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Domain(format!("xi must be > 0, got {xi}")));
    }
    let to_ps = |x: f64| 2.0 * x / xi;
    let peak = std::f64::consts::FRAC_1_SQRT_2;
    let d = (1.0 - peak) * (2.0 * peak * peak + 2.0 * peak - 1.0);
    Ok(BunchingWindow {
        inner_ps: to_ps((3f64.sqrt() - 1.0) / 2.0),
        outer_ps: to_ps(1.0),
        extremum_ps: to_ps(peak),
        min_pc: (1.0 - d) / 2.0,
    })
}

/// Convenience for the default antisymmetric source.
pub fn default_params(nu_thz: f64, xi: f64) -> Result<SourceParams> {
    SourceParams::sinc_source(TAU * nu_thz, xi, PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(nu: f64, model: InterferenceModel) -> SweepSpec {
        SweepSpec::with_defaults(model, default_params(nu, 1.356).unwrap())
    }

    #[test]
    fn range_validation_and_endpoints() {
        assert!(LinearRange::new(3.0, -3.0, 10).is_err());
        assert!(LinearRange::new(-3.0, 3.0, 1).is_err());
        let r = LinearRange::new(-3.0, 3.0, 601).unwrap().values();
        assert_eq!(r.len(), 601);
        assert_eq!(r[0], -3.0);
        assert_eq!(r[600], 3.0);
        assert!(r[300].abs() < 1e-15);
    }

    #[test]
    fn antibunching_peak_and_flat_wings() {
        let curve = sweep_delay(&spec(1.7, InterferenceModel::EntangledFull)).unwrap();
        let at = |t: f64| {
            curve
                .points
                .iter()
                .find(|(d, _)| (d - t).abs() < 1e-9)
                .unwrap()
                .1
        };
        assert!((at(0.0) - 1.0).abs() < 1e-12);
        assert_eq!(at(1.5), 0.5);
        assert_eq!(at(-2.0), 0.5);
    }

    #[test]
    fn engine_path_matches_closed_form() {
        let mut s = spec(0.265, InterferenceModel::EntangledFull);
        s.dtau_range = LinearRange::new(-1.6, 1.6, 9).unwrap();
        let closed = sweep_delay(&s).unwrap();
        s.path = EvalPath::Engine;
        let engine = sweep_delay(&s).unwrap();
        for (a, b) in closed.points.iter().zip(&engine.points) {
            assert!((a.1 - b.1).abs() < 1e-6, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn literature_model_has_no_engine_path() {
        let mut s = spec(0.265, InterferenceModel::EntangledLiterature);
        s.path = EvalPath::Engine;
        assert!(matches!(sweep_delay(&s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_detuning_window() {
        let w = zero_detuning_bunching_window(1.356).unwrap();
        assert!((w.inner_ps - 0.5399).abs() < 1e-3);
        assert!((w.outer_ps - 1.4749).abs() < 1e-3);
        assert!((w.extremum_ps - 1.0430).abs() < 1e-3);
        assert!((w.min_pc - (1.0 - (2f64.sqrt() - 1.0)) / 2.0).abs() < 1e-14);

        let mut s = spec(0.0, InterferenceModel::EntangledFull);
        s.dtau_range = LinearRange::new(0.0, 3.0, 3001).unwrap();
        let intervals = sweep_delay(&s).unwrap().bunching_intervals();
        assert_eq!(intervals.len(), 1);
        assert!((intervals[0].0 - w.inner_ps).abs() < 1e-3);
        assert!((intervals[0].1 - w.outer_ps).abs() < 1e-3);
    }

    #[test]
    fn discrepancy_decays_with_separation() {
        let mut s = spec(0.0, InterferenceModel::EntangledFull);
        s.nu_range = Some(LinearRange::new(1.0, 10.0, 2).unwrap());
        let t = discrepancy_scan(&s).unwrap();
        assert!(t.rows[1].max_abs_dpc < t.rows[0].max_abs_dpc);
        assert!(t.rows[1].max_abs_dpc > 0.0);
    }

    #[test]
    fn large_separation_bound() {
        let xi = 1.356;
        let mu = TAU * 20.0;
        let delays = LinearRange::new(-3.0, 3.0, 601).unwrap().values();
        let (_, v) = max_discrepancy(mu, xi, PI, &delays).unwrap();
        let bound = xi / (2.0 * mu) + crate::special::sinc(2.0 * mu / xi).abs();
        assert!(v <= bound && v < 0.01, "{v} vs {bound}");
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_max(|t| Ok(1.0 - (t - 0.3).powi(2)), 0.0, 1.0, 1e-8).unwrap();
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn number_format_has_twelve_digits() {
        assert_eq!(format_number(0.5), "5.00000000000e-1");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
    }
}
