//! Composite quadrature over a list of breakpoints.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nodes per Gauss-Legendre panel.
pub const GL_ORDER: usize = 16;

/// Hard cap on the number of integrand evaluations per refinement level.
pub const MAX_POINTS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadRule {
    Trapezoid,
    GaussLegendreComposite,
}

impl QuadRule {
    pub fn name(self) -> &'static str {
        match self {
            QuadRule::Trapezoid => "trapezoid",
            QuadRule::GaussLegendreComposite => "gauss-legendre-composite",
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Integrates a vector-valued function over `[breaks[0], breaks[last]]`, splitting
/// every breakpoint interval into `subdivisions` equal panels.
///
/// Returns the integrals and the number of evaluations used.
pub fn integrate_composite<const N: usize, F>(
    f: &F,
    breaks: &[f64],
    subdivisions: usize,
    rule: QuadRule,
) -> ([f64; N], usize)
where
    F: Fn(f64) -> [f64; N],
{
    let mut acc = [0.0; N];
    let mut evals = 0;
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let h = (b - a) / subdivisions as f64;
        match rule {
            QuadRule::GaussLegendreComposite => {
                for k in 0..subdivisions {
                    let lo = a + k as f64 * h;
                    let mid = lo + 0.5 * h;
                    let mut panel = [0.0; N];
                    for &(x, w) in gl_table() {
                        let v = f(mid + 0.5 * h * x);
                        for (p, vi) in panel.iter_mut().zip(v) {
                            *p += w * vi;
                        }
                    }
                    for (a, p) in acc.iter_mut().zip(panel) {
                        *a += 0.5 * h * p;
                    }
                    evals += GL_ORDER;
                }
            }
            QuadRule::Trapezoid => {
                let mut panel = [0.0; N];
                for k in 0..=subdivisions {
                    let w = if k == 0 || k == subdivisions { 0.5 } else { 1.0 };
                    let v = f(a + k as f64 * h);
                    for (p, vi) in panel.iter_mut().zip(v) {
                        *p += w * vi;
                    }
                }
                for (a, p) in acc.iter_mut().zip(panel) {
                    *a += h * p;
                }
                evals += subdivisions + 1;
            }
        }
    }
    (acc, evals)
}

/// Result of an adaptively refined composite integration.
#[derive(Clone, Copy, Debug)]
pub struct Refined<const N: usize> {
    pub values: [f64; N],
    /// Componentwise difference between the last two refinement levels.
    pub differences: [f64; N],
    pub evaluations: usize,
}

/// Doubles the panel count until successive estimates differ by less than
/// `rel_tol` times `scale(values)`.
pub fn integrate_refined<const N: usize, F, S>(
    f: &F,
    breaks: &[f64],
    initial_subdivisions: usize,
    rule: QuadRule,
    rel_tol: f64,
    scale: S,
) -> Result<Refined<N>>
where
    F: Fn(f64) -> [f64; N],
    S: Fn(&[f64; N]) -> f64,
{
    let mut subdivisions = initial_subdivisions.max(1);
    let (mut prev, mut evaluations) = integrate_composite(f, breaks, subdivisions, rule);
    loop {
        subdivisions *= 2;
        let (next, used) = integrate_composite(f, breaks, subdivisions, rule);
        evaluations += used;
        let mut differences = [0.0; N];
        for ((d, a), b) in differences.iter_mut().zip(next).zip(prev) {
            *d = (a - b).abs();
        }
        let worst = differences.iter().cloned().fold(0.0, f64::max);
        let reference = scale(&next).abs();
        if worst <= rel_tol * reference || (reference == 0.0 && worst == 0.0) {
            return Ok(Refined {
                values: next,
                differences,
                evaluations,
            });
        }
        if used * 2 > MAX_POINTS {
            return Err(Error::NonConvergence {
                difference: if reference > 0.0 { worst / reference } else { f64::INFINITY },
                tolerance: rel_tol,
                evaluations,
            });
        }
        prev = next;
    }
}
