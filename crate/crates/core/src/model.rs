//! Photon-pair sources and the beam-splitter transformation.
//!
//! Spectra are written in the reduced coordinate `Ω = (ω₁ − ω₂)/2` on the
//! energy-conservation line `ω₁ + ω₂ = ω_p`. The delta constraint of the
//! monochromatic pump is eliminated analytically: its square only contributes
//! a constant detection-time factor that cancels once probabilities are
//! normalized, so a spectrum is a single complex function of `Ω`.

use std::fmt;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::special::{reduce_phase, sinc};
use crate::{Error, Result};

/// Physical parameters of the photon-pair source and the interfering beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    pump_freq: f64,
    detuning_mu: f64,
    bandwidth_xi: f64,
    symmetry_phase_phi: f64,
    bs_phase_theta: f64,
}

impl SourceParams {
    /// Validates the parameters and reduces both phases to `[0, 2π)`.
    ///
    /// A negative detuning only relabels the photons, so it is rejected rather
    /// than silently folded.
    pub fn new(pump_freq: f64, detuning_mu: f64, bandwidth_xi: f64, phi: f64, theta: f64) -> Result<Self> {
        for (name, v) in [
            ("pump_freq", pump_freq),
            ("detuning_mu", detuning_mu),
            ("bandwidth_xi", bandwidth_xi),
            ("symmetry_phase_phi", phi),
            ("bs_phase_theta", theta),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if bandwidth_xi <= 0.0 {
            return Err(Error::Domain(format!("bandwidth_xi must be > 0, got {bandwidth_xi}")));
        }
        if detuning_mu < 0.0 {
            return Err(Error::Domain(format!("detuning_mu must be >= 0, got {detuning_mu}")));
        }
        Ok(Self {
            pump_freq,
            detuning_mu,
            bandwidth_xi,
            symmetry_phase_phi: reduce_phase(phi),
            bs_phase_theta: reduce_phase(theta),
        })
    }

    /// Source with zero pump frequency and zero beam-splitter phase; neither
    /// affects any detection probability.
    pub fn sinc_source(detuning_mu: f64, bandwidth_xi: f64, phi: f64) -> Result<Self> {
        Self::new(0.0, detuning_mu, bandwidth_xi, phi, 0.0)
    }

    pub fn pump_freq(&self) -> f64 {
        self.pump_freq
    }

    pub fn detuning_mu(&self) -> f64 {
        self.detuning_mu
    }

    pub fn bandwidth_xi(&self) -> f64 {
        self.bandwidth_xi
    }

    pub fn symmetry_phase_phi(&self) -> f64 {
        self.symmetry_phase_phi
    }

    pub fn bs_phase_theta(&self) -> f64 {
        self.bs_phase_theta
    }

    pub fn with_detuning(&self, detuning_mu: f64) -> Result<Self> {
        Self::new(
            self.pump_freq,
            detuning_mu,
            self.bandwidth_xi,
            self.symmetry_phase_phi,
            self.bs_phase_theta,
        )
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(
            self.pump_freq,
            self.detuning_mu,
            self.bandwidth_xi,
            self.symmetry_phase_phi,
            theta,
        )
    }
}

/// Output port of the 50:50 beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    U,
    L,
}

impl Port {
    pub const ALL: [Port; 2] = [Port::U, Port::L];

    pub(crate) fn index(self) -> usize {
        match self {
            Port::U => 0,
            Port::L => 1,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::U => "U",
            Port::L => "L",
        })
    }
}

/// Ordered pair of detection ports `(s₁, s₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PortPair {
    pub first: Port,
    pub second: Port,
}

impl PortPair {
    pub const fn new(first: Port, second: Port) -> Self {
        Self { first, second }
    }

    /// All four ordered pairs in `(U,U), (U,L), (L,U), (L,L)` order.
    pub fn all() -> [PortPair; 4] {
        [
            PortPair::new(Port::U, Port::U),
            PortPair::new(Port::U, Port::L),
            PortPair::new(Port::L, Port::U),
            PortPair::new(Port::L, Port::L),
        ]
    }

    pub fn swapped(self) -> Self {
        Self::new(self.second, self.first)
    }

    pub fn is_bunching(self) -> bool {
        self.first == self.second
    }
}

/// Piecewise-linear spectrum sampled on a strictly increasing `Ω` grid.
///
/// Outside the sampled range the amplitude is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpectrum {
    omega: Vec<f64>,
    amplitude: Vec<Complex64>,
}

impl GridSpectrum {
    pub fn new(samples: Vec<(f64, Complex64)>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::Spectrum(format!(
                "grid spectrum needs at least 3 samples, got {}",
                samples.len()
            )));
        }
        for (i, (w, a)) in samples.iter().enumerate() {
            if !w.is_finite() || !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::Spectrum(format!("sample {i} is not finite")));
            }
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Spectrum(format!(
                    "omega must be strictly increasing: sample {} ({}) <= sample {} ({})",
                    i + 1,
                    pair[1].0,
                    i,
                    pair[0].0
                )));
            }
        }
        if samples.iter().all(|(_, a)| a.norm_sqr() == 0.0) {
            return Err(Error::Spectrum("all amplitudes are zero".into()));
        }
        let (omega, amplitude) = samples.into_iter().unzip();
        Ok(Self { omega, amplitude })
    }

    /// Parses CSV with header `omega_radps,re,im`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["omega_radps", "re", "im"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Spectrum(format!(
                "expected header `omega_radps,re,im`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 3 {
                return Err(Error::Spectrum(format!("row {}: expected 3 fields", line + 1)));
            }
            let mut vals = [0.0; 3];
            for (slot, field) in vals.iter_mut().zip(record.iter()) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Spectrum(format!("row {}: cannot parse `{field}`", line + 1)))?;
                if !v.is_finite() {
                    return Err(Error::Spectrum(format!("row {}: non-finite value `{field}`", line + 1)));
                }
                *slot = v;
            }
            samples.push((vals[0], Complex64::new(vals[1], vals[2])));
        }
        Self::new(samples)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn eval(&self, omega: f64) -> Complex64 {
        let (lo, hi) = self.range();
        if omega < lo || omega > hi {
            return Complex64::new(0.0, 0.0);
        }
        // first knot strictly greater than omega
        let idx = self.omega.partition_point(|&w| w <= omega);
        if idx == self.omega.len() {
            return self.amplitude[idx - 1];
        }
        let (w0, w1) = (self.omega[idx - 1], self.omega[idx]);
        let t = (omega - w0) / (w1 - w0);
        self.amplitude[idx - 1] * (1.0 - t) + self.amplitude[idx] * t
    }
}

/// Complex spectral amplitude over the reduced detuning coordinate `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReducedSpectrum {
    /// `sinc((2Ω − μ)/ξ)`
    SincDetuned { mu: f64, xi: f64 },
    /// `sinc((2Ω − μ)/ξ) + e^{iφ} sinc((2Ω + μ)/ξ)`
    SincEntangled { mu: f64, xi: f64, phi: f64 },
    Grid(GridSpectrum),
}

impl ReducedSpectrum {
    pub fn eval(&self, omega: f64) -> Complex64 {
        match self {
            ReducedSpectrum::SincDetuned { mu, xi } => Complex64::new(sinc((2.0 * omega - mu) / xi), 0.0),
            ReducedSpectrum::SincEntangled { mu, xi, phi } => {
                let a = sinc((2.0 * omega - mu) / xi);
                let b = sinc((2.0 * omega + mu) / xi);
                Complex64::new(a, 0.0) + Complex64::from_polar(b, *phi)
            }
            ReducedSpectrum::Grid(grid) => grid.eval(omega),
        }
    }

    pub fn is_sinc_family(&self) -> bool {
        !matches!(self, ReducedSpectrum::Grid(_))
    }

    /// `(μ, ξ)` for the analytic spectra.
    pub fn sinc_params(&self) -> Option<(f64, f64)> {
        match *self {
            ReducedSpectrum::SincDetuned { mu, xi } | ReducedSpectrum::SincEntangled { mu, xi, .. } => {
                Some((mu, xi))
            }
            ReducedSpectrum::Grid(_) => None,
        }
    }
}

/// Spectrum of a frequency-detuned pair: each photon's frequency tied to its path.
pub fn make_detuned_spectrum(params: &SourceParams) -> ReducedSpectrum {
    ReducedSpectrum::SincDetuned {
        mu: params.detuning_mu(),
        xi: params.bandwidth_xi(),
    }
}

/// Spectrum of a frequency-entangled pair: the detuned spectrum plus its
/// argument-swapped copy weighted by `e^{iφ}`.
pub fn make_entangled_spectrum(params: &SourceParams) -> ReducedSpectrum {
    ReducedSpectrum::SincEntangled {
        mu: params.detuning_mu(),
        xi: params.bandwidth_xi(),
        phi: params.symmetry_phase_phi(),
    }
}

/// Joint two-photon wave function after the beam splitter, one entry per
/// ordered output-port pair.
#[derive(Clone, Debug, PartialEq)]
pub struct JointWaveFunction {
    pump_freq: f64,
    coefficients: [[Complex64; 2]; 2],
    spectra: [[ReducedSpectrum; 2]; 2],
}

impl JointWaveFunction {
    /// Builds a wave function from explicit per-port entries, indexed
    /// `[s₁][s₂]` with `U = 0`, `L = 1`.
    pub fn new(
        pump_freq: f64,
        coefficients: [[Complex64; 2]; 2],
        spectra: [[ReducedSpectrum; 2]; 2],
    ) -> Result<Self> {
        if !pump_freq.is_finite() {
            return Err(Error::Domain("pump_freq must be finite".into()));
        }
        if coefficients.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("wave-function coefficients must be finite".into()));
        }
        Ok(Self {
            pump_freq,
            coefficients,
            spectra,
        })
    }

    pub fn pump_freq(&self) -> f64 {
        self.pump_freq
    }

    pub fn coefficient(&self, ports: PortPair) -> Complex64 {
        self.coefficients[ports.first.index()][ports.second.index()]
    }

    pub fn spectrum(&self, ports: PortPair) -> &ReducedSpectrum {
        &self.spectra[ports.first.index()][ports.second.index()]
    }

    pub fn entry(&self, ports: PortPair) -> (Complex64, &ReducedSpectrum) {
        (self.coefficient(ports), self.spectrum(ports))
    }

    pub fn coefficients(&self) -> [[Complex64; 2]; 2] {
        self.coefficients
    }

    /// The spectrum shared by every entry, if there is one.
    pub fn common_spectrum(&self) -> Option<&ReducedSpectrum> {
        let first = &self.spectra[0][0];
        self.spectra.iter().flatten().all(|s| s == first).then_some(first)
    }
}

/// Sends a two-photon state through the 50:50 beam splitter.
///
/// The coefficient matrix is `[[e^{iθ}, 1], [−1, −e^{−iθ}]]` in `(U, L)` order and
/// every entry carries the input spectrum unchanged.
pub fn apply_beamsplitter(spectrum: &ReducedSpectrum, params: &SourceParams) -> JointWaveFunction {
    let theta = params.bs_phase_theta();
    let one = Complex64::new(1.0, 0.0);
    let coefficients = [
        [Complex64::from_polar(1.0, theta), one],
        [-one, -Complex64::from_polar(1.0, -theta)],
    ];
    let spectra = [
        [spectrum.clone(), spectrum.clone()],
        [spectrum.clone(), spectrum.clone()],
    ];
    JointWaveFunction {
        pump_freq: params.pump_freq(),
        coefficients,
        spectra,
    }
}
