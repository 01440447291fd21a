//! CES production-function kernels and measurement of factor-augmenting
//! technologies.
//!
//! A cell's technology levels are recovered by inverting the cost-minimization
//! first-order conditions of a CES aggregate: each factor's technology is a
//! power of its compensation share times its average product. The module
//! supports four variants sharing that logic:
//!
//! * one-level CES in (k, l, e) under constant returns,
//! * two-level CES nesting (k, l) against e,
//! * one-level CES with a scale elasticity `mu`,
//! * one-level CES in (k, l, e, m).
//!
//! Substitution parameters are the curvature exponents (`sigma`, and for the
//! two-level variant the outer `outer` and inner `inner` exponents), all
//! strictly below one; the implied elasticity of substitution is
//! `eps = 1/(1 - sigma)`. An elasticity within [`UNIT_ELASTICITY_TOL`] of one
//! makes the residual exponent `eps/(eps - 1) = 1/sigma` singular and is
//! rejected at construction.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::panel::PanelCell;
use crate::{Error, Result};

/// Elasticities closer to one than this are rejected: the measurement
/// exponent `eps/(eps-1)` diverges at one.
pub const UNIT_ELASTICITY_TOL: f64 = 1e-6;

/// Default capital-labor-energy substitution elasticity for measurement runs.
pub const DEFAULT_ELASTICITY: f64 = 0.444;

/// Alternative elasticities used in sensitivity passes.
pub const SENSITIVITY_ELASTICITIES: [f64; 5] = [0.02, 0.95, 1.25, 0.343, 0.580];

/// A CES production-function specification.
///
/// Construct through the checked constructors; the invariants (curvature
/// below one, non-unit elasticities, positive scale) are enforced there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum CesSpec {
    /// `y = [ (a_k k)^σ + (a_l l)^σ + (a_e e)^σ ]^{1/σ}` with constant returns.
    OneLevel { sigma: f64 },
    /// `y = [ ((a_k k)^ρ + (a_l l)^ρ)^{ς/ρ} + (a_e e)^ς ]^{1/ς}`;
    /// `outer` is the energy vs. non-energy exponent ς, `inner` the
    /// capital vs. labor exponent ρ.
    TwoLevel { outer: f64, inner: f64 },
    /// One-level CES raised to a scale elasticity: `y = [...]^{μ/σ}`.
    OneLevelScale { sigma: f64, mu: f64 },
    /// One-level CES over four inputs (k, l, e, m) with constant returns.
    FourInput { sigma: f64 },
}

fn check_curvature(name: &str, sigma: f64) -> Result<f64> {
    if !sigma.is_finite() {
        return Err(Error::InvalidSpec(format!("{name} must be finite, got {sigma}")));
    }
    if sigma >= 1.0 {
        return Err(Error::InvalidSpec(format!(
            "{name} must lie strictly below 1, got {sigma}"
        )));
    }
    let eps = 1.0 / (1.0 - sigma);
    if (eps - 1.0).abs() <= UNIT_ELASTICITY_TOL {
        return Err(Error::UnitElasticity {
            value: eps,
            tol: UNIT_ELASTICITY_TOL,
        });
    }
    Ok(sigma)
}

impl CesSpec {
    /// One-level CES with curvature `sigma < 1`, `sigma != 0`.
    pub fn one_level(sigma: f64) -> Result<Self> {
        Ok(CesSpec::OneLevel {
            sigma: check_curvature("sigma", sigma)?,
        })
    }

    /// One-level CES parameterized by the substitution elasticity
    /// `eps = 1/(1-sigma) > 0`.
    pub fn one_level_from_elasticity(eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "elasticity must be strictly positive and finite, got {eps}"
            )));
        }
        Self::one_level(1.0 - 1.0 / eps)
    }

    /// Two-level CES with outer (energy) exponent ς and inner (capital-labor)
    /// exponent ρ, both strictly below one and away from zero.
    pub fn two_level(outer: f64, inner: f64) -> Result<Self> {
        Ok(CesSpec::TwoLevel {
            outer: check_curvature("outer", outer)?,
            inner: check_curvature("inner", inner)?,
        })
    }

    /// One-level CES with scale elasticity `mu > 0`.
    pub fn one_level_scale(sigma: f64, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "scale elasticity mu must be strictly positive and finite, got {mu}"
            )));
        }
        Ok(CesSpec::OneLevelScale {
            sigma: check_curvature("sigma", sigma)?,
            mu,
        })
    }

    /// Four-input one-level CES.
    pub fn four_input(sigma: f64) -> Result<Self> {
        Ok(CesSpec::FourInput {
            sigma: check_curvature("sigma", sigma)?,
        })
    }

    /// Number of inputs the variant aggregates (3 or 4).
    pub fn n_inputs(&self) -> usize {
        match self {
            CesSpec::FourInput { .. } => 4,
            _ => 3,
        }
    }

    /// The substitution elasticity `1/(1-sigma)`; for the two-level variant
    /// this is the outer (energy vs. non-energy) elasticity.
    pub fn elasticity(&self) -> f64 {
        match self {
            CesSpec::OneLevel { sigma }
            | CesSpec::OneLevelScale { sigma, .. }
            | CesSpec::FourInput { sigma } => 1.0 / (1.0 - sigma),
            CesSpec::TwoLevel { outer, .. } => 1.0 / (1.0 - outer),
        }
    }

    /// Inner capital-labor elasticity for the two-level variant.
    pub fn inner_elasticity(&self) -> Option<f64> {
        match self {
            CesSpec::TwoLevel { inner, .. } => Some(1.0 / (1.0 - inner)),
            _ => None,
        }
    }

    /// Scale elasticity μ (1 unless the scale variant).
    pub fn scale_elasticity(&self) -> f64 {
        match self {
            CesSpec::OneLevelScale { mu, .. } => *mu,
            _ => 1.0,
        }
    }

    /// Primary curvature exponent (σ, or ς for the two-level variant).
    pub fn sigma(&self) -> f64 {
        match self {
            CesSpec::OneLevel { sigma }
            | CesSpec::OneLevelScale { sigma, .. }
            | CesSpec::FourInput { sigma } => *sigma,
            CesSpec::TwoLevel { outer, .. } => *outer,
        }
    }
}

fn check_vectors(spec: &CesSpec, a: &[f64], x: &[f64]) -> Result<()> {
    let n = spec.n_inputs();
    if a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.len(),
            context: "technology vector".into(),
        });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
            context: "input vector".into(),
        });
    }
    for (i, &v) in a.iter().chain(x.iter()).enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!(
                "technology/input entries must be strictly positive and finite, got {v} at position {i}"
            )));
        }
    }
    Ok(())
}

/// Evaluates the CES aggregate at technology vector `a` and input vector `x`.
///
/// # Examples
///
/// ```
/// use augtech::ces::{ces_output, CesSpec};
///
/// // Symmetric anchor: eps = 0.5 (sigma = -1), unit inputs, a_i = 9.
/// let spec = CesSpec::one_level(-1.0).unwrap();
/// let y = ces_output(&spec, &[9.0, 9.0, 9.0], &[1.0, 1.0, 1.0]).unwrap();
/// assert!((y - 3.0).abs() < 1e-12);
/// ```
pub fn ces_output(spec: &CesSpec, a: &[f64], x: &[f64]) -> Result<f64> {
    check_vectors(spec, a, x)?;
    match *spec {
        CesSpec::OneLevel { sigma } | CesSpec::FourInput { sigma } => {
            let sum: f64 = a
                .iter()
                .zip(x)
                .map(|(ai, xi)| (ai * xi).powf(sigma))
                .sum();
            Ok(sum.powf(1.0 / sigma))
        }
        CesSpec::OneLevelScale { sigma, mu } => {
            let sum: f64 = a
                .iter()
                .zip(x)
                .map(|(ai, xi)| (ai * xi).powf(sigma))
                .sum();
            Ok(sum.powf(mu / sigma))
        }
        CesSpec::TwoLevel { outer, inner } => {
            let nest = (a[0] * x[0]).powf(inner) + (a[1] * x[1]).powf(inner);
            let sum = nest.powf(outer / inner) + (a[2] * x[2]).powf(outer);
            Ok(sum.powf(1.0 / outer))
        }
    }
}

/// What to do when a factor share required by measurement is zero or
/// otherwise undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSharePolicy {
    /// Abort measurement with a per-cell error (default).
    #[default]
    FailFast,
    /// Skip the offending year and record it in [`TechPath::skipped`].
    Skip,
}

/// Options for [`measure_technologies`].
#[derive(Debug, Clone, Copy, Default)]
pub struct MeasureOptions {
    pub zero_share_policy: ZeroSharePolicy,
}

/// Measured factor-augmenting technology levels for one (country, sector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechPath {
    pub country: String,
    pub sector: crate::panel::Sector,
    pub spec: CesSpec,
    pub years: Vec<i32>,
    pub capital_aug: Vec<f64>,
    pub labor_aug: Vec<f64>,
    pub energy_aug: Vec<f64>,
    /// Present only for the four-input variant.
    pub material_aug: Option<Vec<f64>>,
    /// Pointwise confidence band around the (normalized) energy path,
    /// populated by [`ci_band_ae`].
    pub energy_band: Option<Vec<(f64, f64)>>,
    /// True when levels are expressed relative to the first year
    /// (log differences from `t0`; the value at `t0` is 0 in logs).
    pub normalized: bool,
    /// Years skipped under [`ZeroSharePolicy::Skip`], with reasons.
    pub skipped: Vec<(i32, String)>,
}

impl TechPath {
    /// Returns the path with every factor level divided by its first-year
    /// value, so logs are differences from `t0`. Idempotent.
    pub fn normalized(&self) -> TechPath {
        let mut out = self.clone();
        let norm = |v: &mut Vec<f64>| {
            if let Some(&first) = v.first() {
                for x in v.iter_mut() {
                    *x /= first;
                }
            }
        };
        norm(&mut out.capital_aug);
        norm(&mut out.labor_aug);
        let e0 = out.energy_aug.first().copied().unwrap_or(1.0);
        norm(&mut out.energy_aug);
        if let Some(m) = out.material_aug.as_mut() {
            norm(m);
        }
        if let Some(band) = out.energy_band.as_mut() {
            for (lo, hi) in band.iter_mut() {
                *lo /= e0;
                *hi /= e0;
            }
        }
        out.normalized = true;
        out
    }

    fn len(&self) -> usize {
        self.years.len()
    }
}

struct MeasuredCell {
    techs: Vec<f64>,
}

/// Inverts the first-order conditions of one cell into technology levels.
///
/// For the one-level variants each factor's technology is
/// `a_i = s_i^{1/σ} · (ŷ / x_i)` where `s_i` is the factor's compensation
/// share and `ŷ = y^{1/μ}`; the two-level variant applies the outer exponent
/// to the energy/non-energy split and the inner exponent to the capital/labor
/// split within the nest.
fn measure_cell(cell: &PanelCell, spec: &CesSpec) -> Result<MeasuredCell> {
    cell.validate(spec)?;
    let comps = cell.compensations(spec)?;
    let quantities = cell.quantities(spec)?;
    let total: f64 = comps.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Domain(format!(
            "{} {} {}: total factor compensation must be positive, got {total}",
            cell.country, cell.sector, cell.year
        )));
    }
    for (i, &c) in comps.iter().enumerate() {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::Domain(format!(
                "{} {} {}: compensation share of input {i} is zero or undefined",
                cell.country, cell.sector, cell.year
            )));
        }
    }
    let y_eff = cell.output.powf(1.0 / spec.scale_elasticity());
    let techs = match *spec {
        CesSpec::OneLevel { sigma }
        | CesSpec::OneLevelScale { sigma, .. }
        | CesSpec::FourInput { sigma } => comps
            .iter()
            .zip(&quantities)
            .map(|(&c, &x)| (c / total).powf(1.0 / sigma) * y_eff / x)
            .collect(),
        CesSpec::TwoLevel { outer, inner } => {
            let nest = comps[0] + comps[1];
            let nest_share = nest / total;
            let a_k = nest_share.powf(1.0 / outer)
                * (comps[0] / nest).powf(1.0 / inner)
                * y_eff
                / quantities[0];
            let a_l = nest_share.powf(1.0 / outer)
                * (comps[1] / nest).powf(1.0 / inner)
                * y_eff
                / quantities[1];
            let a_e = (comps[2] / total).powf(1.0 / outer) * y_eff / quantities[2];
            vec![a_k, a_l, a_e]
        }
    };
    for &a in &techs {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::Domain(format!(
                "{} {} {}: measured technology is not a positive finite number",
                cell.country, cell.sector, cell.year
            )));
        }
    }
    Ok(MeasuredCell { techs })
}

/// Measures factor-augmenting technology levels year by year for one
/// (country, sector) series of cells.
///
/// Cells must share country and sector and be strictly increasing in year.
/// The returned path is in levels (`normalized == false`).
pub fn measure_technologies(
    cells: &[PanelCell],
    spec: &CesSpec,
    options: &MeasureOptions,
) -> Result<TechPath> {
    if cells.is_empty() {
        return Err(Error::MissingData(
            "measure_technologies requires at least one cell".into(),
        ));
    }
    let country = cells[0].country.clone();
    let sector = cells[0].sector;
    let mut path = TechPath {
        country: country.clone(),
        sector,
        spec: *spec,
        years: Vec::new(),
        capital_aug: Vec::new(),
        labor_aug: Vec::new(),
        energy_aug: Vec::new(),
        material_aug: if spec.n_inputs() == 4 {
            Some(Vec::new())
        } else {
            None
        },
        energy_band: None,
        normalized: false,
        skipped: Vec::new(),
    };
    let mut last_year = None;
    for cell in cells {
        if cell.country != country || cell.sector != sector {
            return Err(Error::Domain(format!(
                "measure_technologies: cells mix ({country}, {sector}) with ({}, {})",
                cell.country, cell.sector
            )));
        }
        if let Some(prev) = last_year {
            if cell.year <= prev {
                return Err(Error::Domain(format!(
                    "measure_technologies: years must be strictly increasing ({prev} then {})",
                    cell.year
                )));
            }
        }
        last_year = Some(cell.year);
        match measure_cell(cell, spec) {
            Ok(m) => {
                path.years.push(cell.year);
                path.capital_aug.push(m.techs[0]);
                path.labor_aug.push(m.techs[1]);
                path.energy_aug.push(m.techs[2]);
                if let Some(mat) = path.material_aug.as_mut() {
                    mat.push(m.techs[3]);
                }
            }
            Err(e) => match options.zero_share_policy {
                ZeroSharePolicy::FailFast => return Err(e),
                ZeroSharePolicy::Skip => path.skipped.push((cell.year, e.to_string())),
            },
        }
    }
    if path.years.is_empty() {
        return Err(Error::MissingData(format!(
            "{country} {sector}: every cell was skipped during measurement"
        )));
    }
    Ok(path)
}

/// Log gaps between the price ratios implied by the marginal-rate-of-
/// technical-substitution conditions and the observed ones:
/// `gap = ln(implied ratio) − ln(observed ratio)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrtsGaps {
    /// Wage/rental-price condition.
    pub wage_rental: f64,
    /// Wage/energy-price condition.
    pub wage_energy: f64,
}

/// Evaluates the first-order-condition residuals of a cell at a candidate
/// technology vector `a`.
///
/// At the measured technologies both gaps are zero by construction. Doubling
/// `a_l` relative to the measured value moves `wage_rental` by `σ·ln 2` for
/// the one-level variants (`ρ·ln 2` for the two-level variant).
pub fn mrts_residuals(cell: &PanelCell, a: &[f64], spec: &CesSpec) -> Result<MrtsGaps> {
    cell.validate(spec)?;
    let x = cell.quantities(spec)?;
    check_vectors(spec, a, &x)?;
    let obs_wr = cell.wage / cell.capital_price;
    let obs_wv = cell.wage / cell.energy_price;
    let (imp_wr, imp_wv) = match *spec {
        CesSpec::OneLevel { sigma }
        | CesSpec::OneLevelScale { sigma, .. }
        | CesSpec::FourInput { sigma } => {
            let wr = (a[1] / a[0]).powf(sigma) * (x[1] / x[0]).powf(sigma - 1.0);
            let wv = (a[1] / a[2]).powf(sigma) * (x[1] / x[2]).powf(sigma - 1.0);
            (wr, wv)
        }
        CesSpec::TwoLevel { outer, inner } => {
            let wr = (a[1] / a[0]).powf(inner) * (x[1] / x[0]).powf(inner - 1.0);
            let nest_ratio = ((a[0] * x[0]) / (a[1] * x[1])).powf(inner) + 1.0;
            let wv = nest_ratio.powf((outer - inner) / inner)
                * (a[1] / a[2]).powf(outer)
                * (x[1] / x[2]).powf(outer - 1.0);
            (wr, wv)
        }
    };
    Ok(MrtsGaps {
        wage_rental: imp_wr.ln() - obs_wr.ln(),
        wage_energy: imp_wv.ln() - obs_wv.ln(),
    })
}

/// Cumulative change in the energy-augmenting technology from the first
/// observation, computed directly from average products and shares:
/// `Δln a_e = Δln(y/e) + (1/σ)·Δln s_e` where `s_e` is the energy share.
///
/// `series` holds per-year pairs `(y/e, s_e)`. The result has the same
/// length, starts at zero, and uses the elasticity of `spec` (outer
/// elasticity for the two-level variant, for which the same formula holds).
///
/// # Examples
///
/// ```
/// use augtech::ces::{delta_ln_ae, CesSpec};
///
/// let spec = CesSpec::one_level(-1.0).unwrap();
/// // Constant share, y/e up by 10 log points: Δln a_e = 0.10.
/// let d = delta_ln_ae(&[(1.0, 0.2), (1.0f64.exp().powf(0.10) * 1.0, 0.2)], &spec).unwrap();
/// assert!((d[1] - 0.10).abs() < 1e-12);
/// ```
pub fn delta_ln_ae(series: &[(f64, f64)], spec: &CesSpec) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::MissingData("delta_ln_ae requires observations".into()));
    }
    for &(ape, share) in series {
        if !(ape.is_finite() && ape > 0.0) {
            return Err(Error::Domain(format!(
                "average product of energy must be positive, got {ape}"
            )));
        }
        if !(share.is_finite() && share > 0.0 && share <= 1.0) {
            return Err(Error::Domain(format!(
                "energy share must lie in (0, 1], got {share}"
            )));
        }
    }
    let inv_sigma = 1.0 / spec.sigma();
    let (ape0, s0) = series[0];
    Ok(series
        .iter()
        .map(|&(ape, s)| (ape.ln() - ape0.ln()) + inv_sigma * (s.ln() - s0.ln()))
        .collect())
}

/// Fraction of the base-year energy requirement still needed after an
/// energy-technology change of `delta_ln_ae` log points: `exp(−Δln a_e)`.
pub fn energy_requirement_ratio(delta_ln_ae: f64) -> f64 {
    (-delta_ln_ae).exp()
}

/// Sensitivity of the normalized energy-technology path to the substitution
/// elasticity: `∂ Δln a_e / ∂ ε = −Δln s_e / (ε − 1)²`.
pub fn dln_ae_elasticity_gradient(share: f64, share_t0: f64, eps: f64) -> f64 {
    -(share.ln() - share_t0.ln()) / ((eps - 1.0) * (eps - 1.0))
}

/// Measures the normalized technology path of one series and attaches a
/// pointwise delta-method confidence band to the energy path, reflecting
/// sampling error `se` in the estimated substitution elasticity.
///
/// The band is on the normalized path: at the base year it is degenerate, and
/// it is degenerate everywhere when the energy share is constant or `se = 0`.
pub fn ci_band_ae(
    cells: &[PanelCell],
    spec: &CesSpec,
    se: f64,
    level: f64,
    options: &MeasureOptions,
) -> Result<TechPath> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must lie in (0,1), got {level}"
        )));
    }
    if !(se.is_finite() && se >= 0.0) {
        return Err(Error::Domain(format!(
            "standard error must be non-negative and finite, got {se}"
        )));
    }
    let path = measure_technologies(cells, spec, options)?.normalized();
    let eps = spec.elasticity();
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + level / 2.0);
    // Energy shares for the retained years only (skipped years are absent
    // from the path).
    let mut shares = Vec::with_capacity(path.len());
    for cell in cells {
        if path.years.contains(&cell.year) {
            let comps = cell.compensations(spec)?;
            let total: f64 = comps.iter().sum();
            shares.push(comps[2] / total);
        }
    }
    let s0 = shares[0];
    let band: Vec<(f64, f64)> = path
        .energy_aug
        .iter()
        .zip(&shares)
        .map(|(&ae, &s)| {
            let grad = dln_ae_elasticity_gradient(s, s0, eps);
            let half = z * grad.abs() * se;
            let ln_ae = ae.ln();
            ((ln_ae - half).exp(), (ln_ae + half).exp())
        })
        .collect();
    let mut out = path;
    out.energy_band = Some(band);
    Ok(out)
}
