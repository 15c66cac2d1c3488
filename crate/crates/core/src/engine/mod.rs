//! Detection statistics by symmetrization and numerical quadrature.
//!
//! For an ordered port pair `(s₁, s₂)` the delay-dependent symmetrized amplitude
//! in reduced coordinates is
//!
//! ```text
//! A(Ω) = c₁₂ g₁₂(Ω) e^{iΩΔτ} + c₂₁ g₂₁(−Ω) e^{−iΩΔτ}
//! ```
//!
//! and the unnormalized probability is `∫ |A(Ω)|² dΩ`. The four ordered pairs
//! are integrated together on one mesh and normalized by their sum. The common
//! phase `e^{i(ω_p/2)(τ₁+τ₂)}` is dropped since it cancels in `|A|²`.
//!
//! Sinc-family spectra decay like `1/Ω`, so the truncated window alone would
//! leave an `O(1/W)` bias. The region beyond the window is added exactly by
//! [`tail::squared_tail`].

pub mod quadrature;
pub mod tail;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use quadrature::QuadRule;

use crate::model::{JointWaveFunction, Port, PortPair, ReducedSpectrum};
use crate::{Error, Result};
use quadrature::{integrate_refined, GL_ORDER};
use tail::Atom;

/// Successive refinements must agree to this fraction of the total probability mass.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;

/// Optical delays applied to the two photons, in ps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayPair {
    pub tau1: f64,
    pub tau2: f64,
}

impl DelayPair {
    pub fn new(tau1: f64, tau2: f64) -> Result<Self> {
        if !tau1.is_finite() || !tau2.is_finite() {
            return Err(Error::Domain(format!("delays must be finite, got ({tau1}, {tau2})")));
        }
        Ok(Self { tau1, tau2 })
    }

    /// Delays `(Δτ, 0)`.
    pub fn from_difference(dtau: f64) -> Result<Self> {
        Self::new(dtau, 0.0)
    }

    pub fn delta(&self) -> f64 {
        self.tau1 - self.tau2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub window_halfwidth: f64,
    pub points: usize,
    pub rule: QuadRule,
}

impl QuadratureSpec {
    pub fn new(window_halfwidth: f64, points: usize, rule: QuadRule) -> Result<Self> {
        if !(window_halfwidth.is_finite() && window_halfwidth > 0.0) {
            return Err(Error::Domain(format!(
                "window_halfwidth must be > 0, got {window_halfwidth}"
            )));
        }
        if points < 16 {
            return Err(Error::Domain(format!("points must be >= 16, got {points}")));
        }
        Ok(Self {
            window_halfwidth,
            points,
            rule,
        })
    }

    /// Window `μ + 10·ξ` for sinc spectra, the sample range for grids,
    /// composite Gauss-Legendre. The sinc tails beyond the window are added
    /// exactly, so the window only has to clear the spectral peaks.
    pub fn default_for(wf: &JointWaveFunction) -> Self {
        let mut window: f64 = 0.0;
        for ports in PortPair::all() {
            let w = match wf.spectrum(ports) {
                ReducedSpectrum::Grid(g) => {
                    let (lo, hi) = g.range();
                    lo.abs().max(hi.abs())
                }
                s => {
                    let (mu, xi) = s.sinc_params().expect("sinc family");
                    mu + 10.0 * xi
                }
            };
            window = window.max(w);
        }
        Self {
            window_halfwidth: window,
            points: 1024,
            rule: QuadRule::GaussLegendreComposite,
        }
    }
}

/// The symmetrized, delay-dependent amplitude of one ordered port pair.
#[derive(Clone, Copy, Debug)]
pub struct Symmetrized<'a> {
    forward: Complex64,
    forward_spectrum: &'a ReducedSpectrum,
    exchanged: Complex64,
    exchanged_spectrum: &'a ReducedSpectrum,
    dtau: f64,
}

impl Symmetrized<'_> {
    pub fn eval(&self, omega: f64) -> Complex64 {
        let (direct, exchanged) = self.terms(omega);
        direct + exchanged
    }

    /// The direct and argument-exchanged terms separately.
    pub fn terms(&self, omega: f64) -> (Complex64, Complex64) {
        let phase = Complex64::from_polar(1.0, omega * self.dtau);
        (
            self.forward * self.forward_spectrum.eval(omega) * phase,
            self.exchanged * self.exchanged_spectrum.eval(-omega) * phase.conj(),
        )
    }
}

pub fn symmetrize(wf: &JointWaveFunction, ports: PortPair, delays: DelayPair) -> Symmetrized<'_> {
    let (forward, forward_spectrum) = wf.entry(ports);
    let (exchanged, exchanged_spectrum) = wf.entry(ports.swapped());
    Symmetrized {
        forward,
        forward_spectrum,
        exchanged,
        exchanged_spectrum,
        dtau: delays.delta(),
    }
}

/// Normalized joint detection probabilities, indexed by ordered port pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMatrix {
    p: [[f64; 2]; 2],
    error_bound: f64,
    evaluations: usize,
}

impl ProbabilityMatrix {
    pub fn get(&self, ports: PortPair) -> f64 {
        self.p[ports.first.index()][ports.second.index()]
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        self.p
    }

    /// `P_UL + P_LU`.
    pub fn coincidence(&self) -> f64 {
        self.p[0][1] + self.p[1][0]
    }

    /// `Σ_s̄ P(s, s̄)`.
    pub fn single_port(&self, port: Port) -> f64 {
        self.p[port.index()].iter().sum()
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    /// Bound on the absolute quadrature error of any entry.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

fn spectrum_atoms(spectrum: &ReducedSpectrum) -> Vec<(Complex64, f64, f64)> {
    match *spectrum {
        ReducedSpectrum::SincDetuned { mu, xi } => vec![(Complex64::new(1.0, 0.0), mu / 2.0, 2.0 / xi)],
        ReducedSpectrum::SincEntangled { mu, xi, phi } => vec![
            (Complex64::new(1.0, 0.0), mu / 2.0, 2.0 / xi),
            (Complex64::from_polar(1.0, phi), -mu / 2.0, 2.0 / xi),
        ],
        ReducedSpectrum::Grid(_) => Vec::new(),
    }
}

/// Sinc atoms of the symmetrized amplitude; grid entries contribute none.
fn symmetrized_atoms(wf: &JointWaveFunction, ports: PortPair, dtau: f64) -> Vec<Atom> {
    let (forward, fs) = wf.entry(ports);
    let (exchanged, es) = wf.entry(ports.swapped());
    let mut atoms = Vec::new();
    for (amp, center, width) in spectrum_atoms(fs) {
        atoms.push(Atom {
            coef: forward * amp,
            rate: dtau,
            width,
            center,
        });
    }
    for (amp, center, width) in spectrum_atoms(es) {
        atoms.push(Atom {
            coef: exchanged * amp,
            rate: -dtau,
            width,
            center: -center,
        });
    }
    atoms
}

/// Joint detection probabilities for all four ordered port pairs.
///
/// Every pair is integrated on the same mesh and the mesh is refined until the
/// four integrals stop moving by more than [`CONVERGENCE_TOLERANCE`] of their sum.
/// The reported matrix is symmetrized, `P(s₁,s₂) = P(s₂,s₁)`.
pub fn joint_probability(
    wf: &JointWaveFunction,
    delays: DelayPair,
    quad: &QuadratureSpec,
) -> Result<ProbabilityMatrix> {
    let dtau = delays.delta();
    let pairs = PortPair::all();
    let atoms: Vec<Vec<Atom>> = pairs.iter().map(|&p| symmetrized_atoms(wf, p, dtau)).collect();
    let has_sinc = atoms.iter().any(|a| !a.is_empty());

    let mut knots = Vec::new();
    for ports in pairs {
        if let ReducedSpectrum::Grid(g) = wf.spectrum(ports) {
            for &w in g.omega() {
                knots.push(w);
                knots.push(-w);
            }
        }
    }
    let grid_extent = knots.iter().map(|w| w.abs()).fold(0.0, f64::max);

    let window = if has_sinc {
        quad.window_halfwidth.max(grid_extent)
    } else {
        quad.window_halfwidth.min(grid_extent)
    };
    let centers = atoms.iter().map(|a| tail::max_center(a)).fold(0.0, f64::max);
    if has_sinc && window <= 2.0 * centers {
        return Err(Error::Domain(format!(
            "quadrature window {window} does not cover the spectral peaks at ±{centers}"
        )));
    }

    let mut breaks = vec![-window, window];
    breaks.extend(knots.into_iter().filter(|w| w.abs() < window));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * window);

    let nodes_per_panel = match quad.rule {
        QuadRule::GaussLegendreComposite => GL_ORDER,
        QuadRule::Trapezoid => 1,
    };
    let segments = breaks.len() - 1;
    let mut subdivisions = quad.points.div_ceil(segments * nodes_per_panel);
    if quad.rule == QuadRule::GaussLegendreComposite {
        // keep every panel within a few radians of the fastest oscillation
        let rate = atoms
            .iter()
            .map(|a| tail::max_rate(a))
            .fold(2.0 * dtau.abs(), f64::max);
        if rate > 0.0 {
            let longest = breaks.windows(2).map(|s| s[1] - s[0]).fold(0.0, f64::max);
            subdivisions = subdivisions.max((longest * rate / 4.0).ceil() as usize);
        }
    }

    let amplitudes: Vec<Symmetrized<'_>> = pairs.iter().map(|&p| symmetrize(wf, p, delays)).collect();
    let common = wf.common_spectrum();
    let coefficients: Vec<(Complex64, Complex64)> = pairs
        .iter()
        .map(|&p| (wf.coefficient(p), wf.coefficient(p.swapped())))
        .collect();
    // the fifth component is the incoherent sum, the scale against which cancellation is judged
    let integrand = |omega: f64| -> [f64; 5] {
        let mut out = [0.0; 5];
        let mut accumulate = |i: usize, direct: Complex64, exchanged: Complex64| {
            out[i] = (direct + exchanged).norm_sqr();
            out[4] += direct.norm_sqr() + exchanged.norm_sqr();
        };
        match common {
            // one spectrum: two evaluations serve all four pairs
            Some(g) => {
                let phase = Complex64::from_polar(1.0, omega * dtau);
                let plus = g.eval(omega) * phase;
                let minus = g.eval(-omega) * phase.conj();
                for (i, &(c12, c21)) in coefficients.iter().enumerate() {
                    accumulate(i, c12 * plus, c21 * minus);
                }
            }
            None => {
                for (i, a) in amplitudes.iter().enumerate() {
                    let (direct, exchanged) = a.terms(omega);
                    accumulate(i, direct, exchanged);
                }
            }
        }
        out
    };
    let refined = integrate_refined(
        &integrand,
        &breaks,
        subdivisions,
        quad.rule,
        CONVERGENCE_TOLERANCE,
        |v| v[..4].iter().sum(),
    )?;

    let mut raw: [f64; 4] = refined.values[..4].try_into().expect("four pairs");
    // ∫ sinc²(b(Ω − c)) dΩ = π/b per atom, so cancellation inside a spectrum is caught too
    let atom_scale: f64 = atoms.iter().flatten().map(|a| a.coef.norm_sqr() * PI / a.width).sum();
    let incoherent = refined.values[4] + atom_scale;
    if has_sinc {
        for (r, a) in raw.iter_mut().zip(&atoms) {
            *r += tail::squared_tail(a, window);
        }
    }
    let total: f64 = raw.iter().sum();
    if !(total.is_finite() && total > 1e-13 * incoherent) {
        return Err(Error::Spectrum(format!(
            "symmetrized wave function has no weight (total {total:e}); \
             the spectrum may vanish identically"
        )));
    }
    let entry = |i: usize| (raw[i] / total).max(0.0);
    let off_diagonal = 0.5 * (entry(1) + entry(2));
    let p = [[entry(0), off_diagonal], [off_diagonal, entry(3)]];

    let discretization: f64 = refined.differences[..4].iter().sum();
    let rounding = 64.0 * f64::EPSILON * incoherent.max(total);
    let error_bound = (2.0 * discretization + rounding) / total;

    Ok(ProbabilityMatrix {
        p,
        error_bound,
        evaluations: refined.evaluations,
    })
}

pub fn coincidence_probability(wf: &JointWaveFunction, delays: DelayPair, quad: &QuadratureSpec) -> Result<f64> {
    Ok(joint_probability(wf, delays, quad)?.coincidence())
}

pub fn single_port_probability(
    wf: &JointWaveFunction,
    delays: DelayPair,
    quad: &QuadratureSpec,
    port: Port,
) -> Result<f64> {
    Ok(joint_probability(wf, delays, quad)?.single_port(port))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{apply_beamsplitter, make_detuned_spectrum, make_entangled_spectrum, SourceParams};

    fn entangled(mu: f64, xi: f64, phi: f64, theta: f64) -> JointWaveFunction {
        let p = SourceParams::new(0.0, mu, xi, phi, theta).unwrap();
        apply_beamsplitter(&make_entangled_spectrum(&p), &p)
    }

    fn matrix(wf: &JointWaveFunction, dtau: f64) -> ProbabilityMatrix {
        let quad = QuadratureSpec::default_for(wf);
        joint_probability(wf, DelayPair::from_difference(dtau).unwrap(), &quad).unwrap()
    }

    #[test]
    fn symmetrize_antisymmetric_bunching_pair_vanishes() {
        let wf = entangled(1.0, 1.0, PI, 0.3);
        let a = symmetrize(&wf, PortPair::new(Port::U, Port::U), DelayPair::new(0.0, 0.0).unwrap());
        for &w in &[0.0, 0.4, -1.3, 7.9] {
            assert!(a.eval(w).norm() < 1e-15);
        }
    }

    #[test]
    fn symmetrize_port_exchange_mirrors_omega() {
        let wf = entangled(1.3, 0.9, 0.7, 0.4);
        let ports = PortPair::new(Port::U, Port::L);
        let a = symmetrize(&wf, ports, DelayPair::new(0.6, 0.1).unwrap());
        let b = symmetrize(&wf, ports.swapped(), DelayPair::new(0.6, 0.1).unwrap());
        // the swapped pair carries the same amplitude mirrored in Ω
        for &w in &[0.0, 0.25, -2.0, 5.5] {
            assert!((a.eval(w) - b.eval(-w)).norm() < 1e-14);
        }
    }

    #[test]
    fn symmetrize_detuned_definition() {
        let p = SourceParams::sinc_source(0.8, 1.1, 0.0).unwrap();
        let g = make_detuned_spectrum(&p);
        let one = Complex64::new(1.0, 0.0);
        let wf = JointWaveFunction::new(
            0.0,
            [[one, one], [one, one]],
            [[g.clone(), g.clone()], [g.clone(), g.clone()]],
        )
        .unwrap();
        let a = symmetrize(&wf, PortPair::new(Port::U, Port::U), DelayPair::new(0.0, 0.0).unwrap());
        for &w in &[0.0, 0.3, -0.9] {
            assert!((a.eval(w) - (g.eval(w) + g.eval(-w))).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_delay_endpoints() {
        let m = matrix(&entangled(1.0, 1.356, 0.0, 0.9), 0.0);
        assert!((m.get(PortPair::new(Port::U, Port::U)) - 0.5).abs() < 1e-10);
        assert!((m.get(PortPair::new(Port::L, Port::L)) - 0.5).abs() < 1e-10);
        assert!(m.coincidence().abs() < 1e-10);

        let m = matrix(&entangled(1.0, 1.356, PI, 0.0), 0.0);
        assert!((m.get(PortPair::new(Port::U, Port::L)) - 0.5).abs() < 1e-10);
        assert!((m.coincidence() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn working_point_value() {
        // reference computed independently by direct quadrature
        let wf = entangled(std::f64::consts::TAU * 0.265, 1.356, PI, 0.0);
        let m = matrix(&wf, 1.0);
        assert!((m.coincidence() - 0.2845551).abs() < 1e-6, "{}", m.coincidence());
        assert!(m.error_bound() < 1e-7);
    }

    #[test]
    fn marginals_and_sum() {
        let m = matrix(&entangled(2.1, 0.7, 1.1, 2.0), 0.37);
        assert!((m.sum() - 1.0).abs() < 1e-12);
        for port in Port::ALL {
            assert!((m.single_port(port) - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn far_delay_is_half() {
        let wf = entangled(1.7, 1.356, PI, 0.0);
        for &dtau in &[1.6, -2.0, 3.0] {
            let m = matrix(&wf, dtau);
            assert!((m.coincidence() - 0.5).abs() < 1e-9 + m.error_bound());
        }
    }

    #[test]
    fn rejects_bad_quadrature_specs() {
        assert!(QuadratureSpec::new(0.0, 64, QuadRule::Trapezoid).is_err());
        assert!(QuadratureSpec::new(10.0, 8, QuadRule::Trapezoid).is_err());
        let wf = entangled(50.0, 1.0, 0.0, 0.0);
        let tiny = QuadratureSpec::new(10.0, 64, QuadRule::GaussLegendreComposite).unwrap();
        let r = joint_probability(&wf, DelayPair::new(0.0, 0.0).unwrap(), &tiny);
        assert!(matches!(r, Err(Error::Domain(_))));
        assert!(DelayPair::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn vanishing_spectrum_is_an_error() {
        let wf = entangled(0.0, 1.0, PI, 0.0);
        let quad = QuadratureSpec::default_for(&wf);
        assert!(joint_probability(&wf, DelayPair::new(0.0, 0.0).unwrap(), &quad).is_err());
    }
}
