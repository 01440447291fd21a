//! Technology-choice frontier model.
//!
//! Firms pick a factor-augmenting technology mix `a = (a_k, a_l, a_e)` on a
//! frontier `[(a_k/A_k)^η + (a_l/A_l)^η + (a_e/A_e)^η]^{1/η} ≤ B` to maximize
//! CES output at given inputs. With curvature `σ < 1` and `η > σ/(1−σ)` (the
//! second-order condition) the optimum is interior on the frontier and has a
//! closed form; substituting it back yields an *effective* CES in the inputs
//! with exponent `ησ/(η−σ) < 1`, so the long-run substitution elasticity
//! `(η−σ)/(η−σ−ησ)` exceeds the short-run `1/(1−σ)`.
//!
//! [`optimal_mix`] implements the closed form; [`ascent_oracle`] solves the
//! same program by projected gradient ascent with multi-start and serves as
//! an independent numerical check.

use serde::{Deserialize, Serialize};

use crate::ces::{ces_output, CesSpec};
use crate::{Error, Result};

/// Margin below which `η` is considered to violate the second-order
/// condition `η > σ/(1−σ)`.
pub const SOC_TOL: f64 = 1e-6;

/// A frontier specification: potential technology levels `A_i`, frontier
/// height `B`, frontier curvature `η`, and production curvature `σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSpec {
    pub potentials: [f64; 3],
    pub height: f64,
    pub eta: f64,
    pub sigma: f64,
}

impl FrontierSpec {
    /// Validates the second-order condition and parameter domains.
    pub fn new(potentials: [f64; 3], height: f64, eta: f64, sigma: f64) -> Result<Self> {
        for &a in &potentials {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "potential technology levels must be strictly positive, got {a}"
                )));
            }
        }
        if !height.is_finite() || height <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "frontier height B must be strictly positive, got {height}"
            )));
        }
        if !sigma.is_finite() || sigma >= 1.0 || sigma == 0.0 {
            return Err(Error::InvalidSpec(format!(
                "sigma must be finite, below 1, and non-zero, got {sigma}"
            )));
        }
        if !eta.is_finite() || eta.abs() <= SOC_TOL {
            return Err(Error::InvalidSpec(format!(
                "eta must be finite and non-zero, got {eta}"
            )));
        }
        let bound = sigma / (1.0 - sigma);
        if eta <= bound + SOC_TOL {
            return Err(Error::InvalidSpec(format!(
                "second-order condition violated: eta = {eta} must exceed sigma/(1-sigma) = {bound}"
            )));
        }
        Ok(FrontierSpec {
            potentials,
            height,
            eta,
            sigma,
        })
    }

    /// Exponent of the effective CES: `ησ/(η−σ)`, strictly below 1.
    pub fn effective_exponent(&self) -> f64 {
        self.eta * self.sigma / (self.eta - self.sigma)
    }

    /// Short-run elasticity of substitution `1/(1−σ)`.
    pub fn short_run_elasticity(&self) -> f64 {
        1.0 / (1.0 - self.sigma)
    }

    /// Long-run (technology-adjusted) elasticity `(η−σ)/(η−σ−ησ)`.
    pub fn effective_elasticity(&self) -> f64 {
        let d = self.eta - self.sigma;
        d / (d - self.eta * self.sigma)
    }

    /// Distance of `a` from the frontier: `[Σ (a_i/A_i)^η]^{1/η} − B`
    /// (zero when the frontier binds).
    pub fn frontier_gap(&self, a: &[f64; 3]) -> f64 {
        self.frontier_norm(a) - self.height
    }

    fn frontier_norm(&self, a: &[f64; 3]) -> f64 {
        let sum: f64 = a
            .iter()
            .zip(&self.potentials)
            .map(|(ai, bigai)| (ai / bigai).powf(self.eta))
            .sum();
        sum.powf(1.0 / self.eta)
    }
}

fn check_inputs(x: &[f64; 3]) -> Result<()> {
    for &v in x {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!(
                "inputs must be strictly positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

/// Closed-form optimal technology mix at inputs `x`:
///
/// `a_i = B · S^{−1/η} · A_i^{η/(η−σ)} · x_i^{σ/(η−σ)}` with
/// `S = Σ_j (A_j x_j)^{ησ/(η−σ)}`. The frontier binds exactly at the result.
pub fn optimal_mix(spec: &FrontierSpec, x: &[f64; 3]) -> Result<[f64; 3]> {
    check_inputs(x)?;
    let theta = spec.effective_exponent();
    let d = spec.eta - spec.sigma;
    let s: f64 = spec
        .potentials
        .iter()
        .zip(x)
        .map(|(a, xi)| (a * xi).powf(theta))
        .sum();
    let scale = spec.height * s.powf(-1.0 / spec.eta);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = scale
            * spec.potentials[i].powf(spec.eta / d)
            * x[i].powf(spec.sigma / d);
    }
    Ok(out)
}

/// Output of the effective (long-run) CES, Eq. obtained by substituting the
/// optimal mix into the production function:
/// `y = [Σ (A_i B x_i)^{ησ/(η−σ)}]^{(η−σ)/(ησ)}`.
pub fn effective_ces(spec: &FrontierSpec, x: &[f64; 3]) -> Result<f64> {
    check_inputs(x)?;
    let theta = spec.effective_exponent();
    if theta == 0.0 {
        return Err(Error::InvalidSpec(
            "effective exponent ησ/(η−σ) is zero; the effective CES is undefined".into(),
        ));
    }
    let s: f64 = spec
        .potentials
        .iter()
        .zip(x)
        .map(|(a, xi)| (a * spec.height * xi).powf(theta))
        .sum();
    Ok(s.powf(1.0 / theta))
}

/// Recovers the combined potential levels `A_i B` from an observed cell on
/// the effective CES, using the same share inversion as short-run
/// measurement but with the long-run elasticity:
/// `A_i B = s_i^{1/θ} · y / x_i` with `θ = ησ/(η−σ)`.
pub fn recover_potentials(
    spec: &FrontierSpec,
    shares: &[f64; 3],
    y: f64,
    x: &[f64; 3],
) -> Result<[f64; 3]> {
    check_inputs(x)?;
    if !(y.is_finite() && y > 0.0) {
        return Err(Error::Domain(format!("output must be positive, got {y}")));
    }
    let total: f64 = shares.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "factor shares must sum to 1, got {total}"
        )));
    }
    let theta = spec.effective_exponent();
    let mut out = [0.0; 3];
    for i in 0..3 {
        if !(shares[i].is_finite() && shares[i] > 0.0) {
            return Err(Error::Domain(format!(
                "factor shares must be strictly positive, got {}",
                shares[i]
            )));
        }
        out[i] = shares[i].powf(1.0 / theta) * y / x[i];
    }
    Ok(out)
}

/// Result of the numerical frontier solver.
#[derive(Debug, Clone)]
pub struct AscentSolution {
    pub mix: [f64; 3],
    pub output: f64,
    /// Objective reached by each start, for diagnosis.
    pub start_objectives: Vec<f64>,
}

/// Projected gradient ascent on the frontier manifold with multi-start.
///
/// Maximizes CES output in `ln a`, rescaling back onto the frontier after
/// every step (the frontier norm is homogeneous of degree one in `a`, so the
/// radial projection is exact). Independent of the closed form; used as an
/// oracle in tests. `tol` bounds the relative objective improvement at
/// convergence (1e-8 unless overridden by callers).
pub fn ascent_oracle(
    spec: &FrontierSpec,
    x: &[f64; 3],
    starts: usize,
    tol: f64,
) -> Result<AscentSolution> {
    check_inputs(x)?;
    let ces = CesSpec::one_level(spec.sigma)?;
    let project = |a: &mut [f64; 3]| {
        let norm = spec.frontier_norm(a);
        for v in a.iter_mut() {
            *v *= spec.height / norm;
        }
    };
    let objective = |a: &[f64; 3]| -> f64 {
        ces_output(&ces, a, x).unwrap_or(f64::NEG_INFINITY)
    };
    // Deterministic start grid: perturb the potentials by fixed multipliers.
    let multipliers = [
        [1.0, 1.0, 1.0],
        [4.0, 1.0, 1.0],
        [1.0, 4.0, 1.0],
        [1.0, 1.0, 4.0],
        [0.25, 1.0, 2.0],
        [2.0, 0.25, 1.0],
        [1.0, 2.0, 0.25],
        [0.5, 0.5, 2.0],
    ];
    let mut best: Option<AscentSolution> = None;
    let mut start_objectives = Vec::new();
    for m in multipliers.iter().cycle().take(starts.max(1)) {
        let mut a = [
            spec.potentials[0] * m[0],
            spec.potentials[1] * m[1],
            spec.potentials[2] * m[2],
        ];
        project(&mut a);
        let mut value = objective(&a);
        let mut step = 0.25;
        for _ in 0..20_000 {
            // Gradient in ln a of ln y: s_i = (a_i x_i)^σ / Σ_j (a_j x_j)^σ,
            // minus the frontier-tangent component so steps stay near the
            // manifold before the exact radial projection.
            let y = objective(&a);
            let mut g = [0.0; 3];
            let mut denom = 0.0;
            for i in 0..3 {
                g[i] = (a[i] * x[i] / y).powf(spec.sigma);
                denom += g[i];
            }
            for v in g.iter_mut() {
                *v /= denom;
            }
            // Tangent direction: remove the component along the frontier
            // normal in ln-space, n_i ∝ (a_i/A_i)^η.
            let mut n = [0.0; 3];
            let mut n_norm2 = 0.0;
            for i in 0..3 {
                n[i] = (a[i] / spec.potentials[i]).powf(spec.eta);
                n_norm2 += n[i] * n[i];
            }
            let dot: f64 = g.iter().zip(&n).map(|(gi, ni)| gi * ni).sum();
            for i in 0..3 {
                g[i] -= dot * n[i] / n_norm2;
            }
            let g_norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if g_norm < 1e-16 {
                break;
            }
            let mut improved = false;
            while step > 1e-14 {
                let mut trial = a;
                for i in 0..3 {
                    trial[i] = (a[i].ln() + step * g[i]).exp();
                }
                project(&mut trial);
                let trial_value = objective(&trial);
                if trial_value > value {
                    let rel = (trial_value - value) / value.abs().max(1e-300);
                    a = trial;
                    value = trial_value;
                    improved = true;
                    step *= 1.5;
                    if rel < tol * 1e-3 {
                        improved = false; // converged: negligible gain
                    }
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        start_objectives.push(value);
        let better = match &best {
            Some(b) => value > b.output,
            None => true,
        };
        if better {
            best = Some(AscentSolution {
                mix: a,
                output: value,
                start_objectives: Vec::new(),
            });
        }
    }
    let mut solution = best.ok_or_else(|| Error::NonConvergence(Vec::new()))?;
    solution.start_objectives = start_objectives;
    Ok(solution)
}
