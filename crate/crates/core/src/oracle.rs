//! Independent verification of the interference integrals.
//!
//! Everything here is computed from the spectrum alone, without the closed
//! forms or the engine's quadrature, so agreement between paths is a real check.
//! The central quantity is the overlap ratio
//!
//! ```text
//! d(Δτ) = Re ∫ g(Ω) g*(−Ω) e^{2iΩΔτ} dΩ / ∫ |g(Ω)|² dΩ
//! ```
//!
//! Two methods are provided. The time-domain method uses the Fourier pair
//! `sinc(b(Ω − c)) ↔ (π/b)·e^{−ict}·1[|t| ≤ b]` and reduces both integrals to
//! overlaps of boxcars carrying complex exponentials, which integrate exactly.
//! The frequency-domain method is plain composite Simpson on a window with an
//! explicit bound on the truncated tail.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::InterferenceModel;
use crate::engine::{DelayPair, QuadratureSpec};
use crate::model::{
    apply_beamsplitter, make_detuned_spectrum, make_entangled_spectrum, JointWaveFunction, PortPair,
    ReducedSpectrum, SourceParams,
};
use crate::special::one_minus_sinc;
use crate::{Error, Result};

/// Simpson refinements stop once successive values agree to this fraction of the norm.
const SIMPSON_TOLERANCE: f64 = 1e-10;
const SIMPSON_MAX_INTERVALS: usize = 1 << 24;

/// Rows pass when the closed form is within the oracle bound plus this slack.
pub const COMPARISON_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    TimeDomainExact,
    FreqDomainQuadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub value: f64,
    pub method: OracleMethod,
    pub error_bound: f64,
    pub evaluations: usize,
    /// `∫|g|² dΩ`, the denominator of `value`.
    pub norm: f64,
}

/// Sinc components `(a_k, c_k)` of `g(Ω) = Σ a_k sinc(b(Ω − c_k))`, and `b`.
fn sinc_components(spec: &ReducedSpectrum) -> Result<(Vec<(Complex64, f64)>, f64)> {
    match *spec {
        ReducedSpectrum::SincDetuned { mu, xi } => Ok((vec![(Complex64::new(1.0, 0.0), mu / 2.0)], 2.0 / xi)),
        ReducedSpectrum::SincEntangled { mu, xi, phi } => Ok((
            vec![
                (Complex64::new(1.0, 0.0), mu / 2.0),
                (Complex64::from_polar(1.0, phi), -mu / 2.0),
            ],
            2.0 / xi,
        )),
        ReducedSpectrum::Grid(_) => Err(Error::Unsupported(
            "the time-domain oracle only handles sinc-family spectra".into(),
        )),
    }
}

/// `∫_lo^hi U(t) V(t) dt` with `U(t) = Σ u_k e^{−iα_k (t − s)}` and
/// `V(t) = Σ v_j e^{−iβ_j t}`, plus an absolute rounding bound.
///
/// Written as `L·U(m)·V(m)` minus a correction built from `1 − sinc`, so that
/// nearly cancelling exponentials are summed once instead of pairwise.
fn boxcar_overlap(
    u: &[(Complex64, f64)],
    shift: f64,
    v: &[(Complex64, f64)],
    lo: f64,
    hi: f64,
) -> (Complex64, f64) {
    let len = hi - lo;
    if len <= 0.0 {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let mid = 0.5 * (lo + hi);
    let ut: Vec<Complex64> = u
        .iter()
        .map(|&(a, alpha)| a * Complex64::from_polar(1.0, -alpha * (mid - shift)))
        .collect();
    let vt: Vec<Complex64> = v
        .iter()
        .map(|&(a, beta)| a * Complex64::from_polar(1.0, -beta * mid))
        .collect();
    let big_u: Complex64 = ut.iter().sum();
    let big_v: Complex64 = vt.iter().sum();
    let u_abs: f64 = u.iter().map(|(a, _)| a.norm()).sum();
    let v_abs: f64 = v.iter().map(|(a, _)| a.norm()).sum();

    let mut correction = Complex64::new(0.0, 0.0);
    let mut correction_abs = 0.0;
    for (uk, &(_, alpha)) in ut.iter().zip(u) {
        for (vj, &(_, beta)) in vt.iter().zip(v) {
            let w = one_minus_sinc((alpha + beta) * len / 2.0);
            correction += uk * vj * w;
            correction_abs += uk.norm() * vj.norm() * w.abs();
        }
    }
    let value = (big_u * big_v - correction) * len;
    let scale = len * (u_abs * big_v.norm() + big_u.norm() * v_abs + correction_abs) + value.norm();
    (value, 8.0 * f64::EPSILON * scale)
}

/// Exact overlap ratio for sinc-family spectra.
pub fn overlap_time_domain(spec: &ReducedSpectrum, dtau: f64) -> Result<OracleReport> {
    if !dtau.is_finite() {
        return Err(Error::Domain(format!("dtau must be finite, got {dtau}")));
    }
    let (atoms, b) = sinc_components(spec)?;
    let prefactor = (PI / b).powi(2) / (2.0 * PI);

    // norm: G(t)·conj G(t) on [−b, b]
    let g = &atoms;
    let g_conj: Vec<(Complex64, f64)> = atoms.iter().map(|&(a, c)| (a.conj(), -c)).collect();
    let (n, n_err) = boxcar_overlap(g, 0.0, &g_conj, -b, b);
    let norm = prefactor * n.re;
    let norm_err = prefactor * n_err;

    // interference: G(t − 2Δτ) on |t − 2Δτ| ≤ b against conj G(−t) on |t| ≤ b
    let g_mirror: Vec<(Complex64, f64)> = atoms.iter().map(|&(a, c)| (a.conj(), c)).collect();
    let shift = 2.0 * dtau;
    let lo = (shift - b).max(-b);
    let hi = (shift + b).min(b);
    let (i, i_err) = boxcar_overlap(g, shift, &g_mirror, lo, hi);
    let interference = prefactor * i.re;
    let interference_err = prefactor * i_err;

    if norm.is_nan() || norm <= norm_err {
        return Err(Error::Spectrum(format!(
            "spectrum norm {norm:e} is not resolved above rounding ({norm_err:e})"
        )));
    }
    let value = interference / norm;
    let error_bound = (interference_err + value.abs() * norm_err) / (norm - norm_err);
    Ok(OracleReport {
        value,
        method: OracleMethod::TimeDomainExact,
        error_bound,
        evaluations: 2,
        norm,
    })
}

/// Composite Simpson over `breaks`, each segment split into `n` (even) intervals.
fn simpson<F: Fn(f64) -> [f64; 3]>(f: &F, breaks: &[f64], n: usize) -> ([f64; 3], usize) {
    let mut acc = [0.0; 3];
    let mut evaluations = 0;
    for seg in breaks.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let h = (hi - lo) / n as f64;
        for i in 0..=n {
            let weight = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let y = f(lo + i as f64 * h);
            for (a, v) in acc.iter_mut().zip(y) {
                *a += weight * h / 3.0 * v;
            }
        }
        evaluations += n + 1;
    }
    (acc, evaluations)
}

/// Overlap ratio by windowed Simpson quadrature.
///
/// Sinc-family tails are bounded with the envelope `|g(Ω)| ≤ Σ|a_k| / (b(|Ω| − c))`,
/// which gives `∫_{|Ω|>W} |g(Ω)||g(−Ω)| dΩ ≤ 2(Σ|a_k|/b)² / (W − c)`. Grid
/// spectra vanish outside their samples and have no tail.
pub fn overlap_quadrature(spec: &ReducedSpectrum, dtau: f64, quad: &QuadratureSpec) -> Result<OracleReport> {
    if !dtau.is_finite() {
        return Err(Error::Domain(format!("dtau must be finite, got {dtau}")));
    }
    let (tail, mut breaks) = match spec {
        ReducedSpectrum::Grid(grid) => {
            let (lo, hi) = grid.range();
            let w = quad.window_halfwidth.min(lo.abs().max(hi.abs()));
            let mut breaks: Vec<f64> = grid
                .omega()
                .iter()
                .flat_map(|&x| [x, -x])
                .filter(|x| x.abs() < w)
                .collect();
            breaks.extend([-w, w]);
            (0.0, breaks)
        }
        _ => {
            let (atoms, b) = sinc_components(spec)?;
            let c = atoms.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max);
            let w = quad.window_halfwidth;
            if w <= c {
                return Err(Error::Domain(format!("window {w} does not cover the peaks at ±{c}")));
            }
            let amp: f64 = atoms.iter().map(|(a, _)| a.norm()).sum();
            (2.0 * (amp / b).powi(2) / (w - c), vec![-w, w])
        }
    };
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let integrand = |omega: f64| -> [f64; 3] {
        let plus = spec.eval(omega);
        let minus = spec.eval(-omega);
        let term = plus * minus.conj() * Complex64::from_polar(1.0, 2.0 * omega * dtau);
        [plus.norm_sqr(), term.re, term.im]
    };

    let segments = breaks.len() - 1;
    let mut n = (quad.points / segments).max(2);
    n += n % 2;
    let (mut prev, mut evaluations) = simpson(&integrand, &breaks, n);
    loop {
        n *= 2;
        if n * segments > SIMPSON_MAX_INTERVALS {
            return Err(Error::NonConvergence {
                difference: f64::NAN,
                tolerance: SIMPSON_TOLERANCE,
                evaluations,
            });
        }
        let (next, used) = simpson(&integrand, &breaks, n);
        evaluations += used;
        let dn = (next[0] - prev[0]).abs();
        let di = (next[1] - prev[1]).abs();
        prev = next;
        if dn + di <= SIMPSON_TOLERANCE * next[0].abs() {
            let norm = next[0];
            // Richardson estimate of the remaining discretization error, doubled for safety
            let n_err = 2.0 * dn / 15.0 + tail;
            let i_err = 2.0 * di / 15.0 + tail;
            if norm.is_nan() || norm <= n_err {
                return Err(Error::Spectrum(format!(
                    "spectrum norm {norm:e} is not resolved above its error ({n_err:e})"
                )));
            }
            let value = next[1] / norm;
            let error_bound = (i_err + value.abs() * n_err) / (norm - n_err);
            return Ok(OracleReport {
                value,
                method: OracleMethod::FreqDomainQuadrature,
                error_bound,
                evaluations,
                norm,
            });
        }
    }
}

/// Coincidence probability `P_UL + P_LU` assembled from the overlap ratio.
///
/// Each unnormalized entry is `(|c₁₂|² + |c₂₁|²) N + 2 Re(c₁₂ c₂₁*) Re I`, so the
/// wave function must share one spectrum across its entries.
pub fn oracle_coincidence(wf: &JointWaveFunction, delays: DelayPair, method: OracleMethod) -> Result<OracleReport> {
    let spectrum = wf
        .common_spectrum()
        .ok_or_else(|| Error::Unsupported("the oracle needs one spectrum shared by all entries".into()))?;
    let overlap = match method {
        OracleMethod::TimeDomainExact => overlap_time_domain(spectrum, delays.delta())?,
        OracleMethod::FreqDomainQuadrature => {
            overlap_quadrature(spectrum, delays.delta(), &QuadratureSpec::default_for(wf))?
        }
    };
    let assemble = |d: f64| -> f64 {
        let mut total = 0.0;
        let mut coincidence = 0.0;
        for ports in PortPair::all() {
            let a = wf.coefficient(ports);
            let b = wf.coefficient(ports.swapped());
            let p = a.norm_sqr() + b.norm_sqr() + 2.0 * (a * b.conj()).re * d;
            total += p;
            if !ports.is_bunching() {
                coincidence += p;
            }
        }
        coincidence / total
    };
    let d = overlap.value;
    let value = assemble(d);
    let spread = (assemble(d + overlap.error_bound) - value)
        .abs()
        .max((assemble(d - overlap.error_bound) - value).abs());
    Ok(OracleReport {
        value,
        method,
        error_bound: spread + 4.0 * f64::EPSILON,
        evaluations: overlap.evaluations,
        norm: overlap.norm,
    })
}

/// One `(μ, ξ, φ, Δτ)` point of a comparison grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub mu: f64,
    pub xi: f64,
    pub phi: f64,
    pub dtau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub points: Vec<GridPoint>,
}

impl ParameterGrid {
    /// Cartesian product over `μ = ratio·ξ` and `Δτ = 2x/ξ` with both signs of `Δτ`.
    pub fn from_axes(xi: f64, mu_over_xi: &[f64], phis: &[f64], xs: &[f64]) -> Self {
        let mut points = Vec::new();
        for &ratio in mu_over_xi {
            for &phi in phis {
                for &x in xs {
                    let dtau = 2.0 * x / xi;
                    points.push(GridPoint { mu: ratio * xi, xi, phi, dtau });
                    if x != 0.0 {
                        points.push(GridPoint { mu: ratio * xi, xi, phi, dtau: -dtau });
                    }
                }
            }
        }
        Self { points }
    }

    /// `ξ = 1.356`, `μ/ξ ∈ {0.01, 0.5, 1, 2.456, 10, 100}`, `φ ∈ {0, π/2, π}`,
    /// `ξ|Δτ|/2 ∈ {0, 0.322, 0.5, 1, 1.5}`.
    pub fn default_grid() -> Self {
        Self::from_axes(
            1.356,
            &[0.01, 0.5, 1.0, 2.456, 10.0, 100.0],
            &[0.0, PI / 2.0, PI],
            &[0.0, 0.322, 0.5, 1.0, 1.5],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub mu: f64,
    pub xi: f64,
    pub phi: f64,
    pub dtau: f64,
    pub closed: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub bound: f64,
}

impl ComparisonRow {
    pub fn passed(&self) -> bool {
        self.abs_err <= self.bound + COMPARISON_TOLERANCE
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model: InterferenceModel,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(ComparisonRow::passed)
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed()).count()
    }

    pub fn max_abs_err(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_err).fold(0.0, f64::max)
    }

    /// CSV with header `mu,xi,phi,dtau,closed,oracle,abs_err,bound`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["mu", "xi", "phi", "dtau", "closed", "oracle", "abs_err", "bound"])?;
        for r in &self.rows {
            w.write_record(
                [r.mu, r.xi, r.phi, r.dtau, r.closed, r.oracle, r.abs_err, r.bound].map(crate::experiments::format_number),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates `model` and the time-domain oracle at every grid point.
///
/// The oracle always describes the physical source: the detuned spectrum for
/// the detuned model and the entangled spectrum otherwise, so the literature
/// approximation shows up as a discrepancy.
pub fn compare_closed_forms(grid: &ParameterGrid, model: InterferenceModel) -> Result<ComparisonReport> {
    let rows = grid
        .points
        .par_iter()
        .map(|p| -> Result<ComparisonRow> {
            let closed = model.coincidence(p.mu, p.xi, p.phi, p.dtau)?;
            let params = SourceParams::sinc_source(p.mu, p.xi, p.phi)?;
            let spectrum = match model {
                InterferenceModel::Detuned => make_detuned_spectrum(&params),
                _ => make_entangled_spectrum(&params),
            };
            let wf = apply_beamsplitter(&spectrum, &params);
            let oracle = oracle_coincidence(&wf, DelayPair::from_difference(p.dtau)?, OracleMethod::TimeDomainExact)?;
            Ok(ComparisonRow {
                mu: p.mu,
                xi: p.xi,
                phi: p.phi,
                dtau: p.dtau,
                closed,
                oracle: oracle.value,
                abs_err: (closed - oracle.value).abs(),
                bound: oracle.error_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { model, rows })
}
