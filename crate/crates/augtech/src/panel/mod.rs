//! Panel-data types and construction of analysis-ready country-sector cells.
//!
//! The raw inputs are component-level series: capital broken into asset types
//! (e.g. equipment and structures), labor into skill groups, energy into
//! carriers, all optionally at subsector (industry) detail. This module turns
//! those into one [`PanelCell`] per (country, sector, year) holding
//! composition-adjusted prices and quantities plus gross output, via
//!
//! 1. rental prices of capital ([`capital`]),
//! 2. composition adjustment of component aggregates ([`composition`]),
//! 3. gross output from factor compensations and a markup ([`gross_output`]).
//!
//! CSV ingestion and writing live in [`io`].

pub mod capital;
pub mod composition;
pub mod io;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ces::CesSpec;
use crate::{Error, Result};

/// Broad sector of the economy. The panel distinguishes exactly two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Goods,
    Service,
}

impl Sector {
    pub const ALL: [Sector; 2] = [Sector::Goods, Sector::Service];

    /// The opposite sector, used as the donor in shift-share instruments.
    pub fn other(self) -> Sector {
        match self {
            Sector::Goods => Sector::Service,
            Sector::Service => Sector::Goods,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Goods => write!(f, "goods"),
            Sector::Service => write!(f, "service"),
        }
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "goods" => Ok(Sector::Goods),
            "service" => Ok(Sector::Service),
            other => Err(Error::Domain(format!(
                "unknown sector `{other}` (expected `goods` or `service`)"
            ))),
        }
    }
}

/// Kind of production input a component series belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Capital,
    Labor,
    Energy,
    Material,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputKind::Capital => write!(f, "capital"),
            InputKind::Labor => write!(f, "labor"),
            InputKind::Energy => write!(f, "energy"),
            InputKind::Material => write!(f, "material"),
        }
    }
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "capital" => Ok(InputKind::Capital),
            "labor" => Ok(InputKind::Labor),
            "energy" => Ok(InputKind::Energy),
            "material" => Ok(InputKind::Material),
            other => Err(Error::Domain(format!(
                "unknown input kind `{other}` (expected capital|labor|energy|material)"
            ))),
        }
    }
}

/// One component-level series: a (country, sector, subsector, input kind,
/// component) key with per-year price, quantity, and compensation.
///
/// Years are strictly increasing but need not be contiguous; operations that
/// require lags skip over interior gaps and flag them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawComponentSeries {
    pub country: String,
    pub sector: Sector,
    pub subsector: String,
    pub input_kind: InputKind,
    pub component: String,
    pub years: Vec<i32>,
    pub prices: Vec<f64>,
    pub quantities: Vec<f64>,
    pub compensations: Vec<f64>,
}

impl RawComponentSeries {
    /// Index of `year` within the series, if observed.
    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.years.binary_search(&year).ok()
    }
}

/// Capital detail for one asset component: investment price, stock,
/// investment flow, and observed capital compensation per year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalComponentSeries {
    pub country: String,
    pub sector: Sector,
    pub component: String,
    pub years: Vec<i32>,
    /// Investment (asset) price `q_jt`.
    pub investment_prices: Vec<f64>,
    /// Real capital stock `k_jt`.
    pub stocks: Vec<f64>,
    /// Real investment flow `i_jt`.
    pub investments: Vec<f64>,
    /// Nominal capital compensation accruing to this component.
    pub compensations: Vec<f64>,
}

impl CapitalComponentSeries {
    pub fn year_index(&self, year: i32) -> Option<usize> {
        self.years.binary_search(&year).ok()
    }
}

/// One analysis-ready observation: composition-adjusted factor prices and
/// quantities plus markup and gross output for a (country, sector, year).
///
/// All prices and quantities are strictly positive in a valid cell; the
/// constructors and the ingestion path enforce this, and measurement
/// operations re-check it so that hand-built cells fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelCell {
    pub country: String,
    pub sector: Sector,
    pub year: i32,
    /// Capital quantity `k` and rental price `r`.
    pub capital: f64,
    pub capital_price: f64,
    /// Labor quantity `l` and wage `w`.
    pub labor: f64,
    pub wage: f64,
    /// Energy quantity `e` and energy price `v`.
    pub energy: f64,
    pub energy_price: f64,
    /// Material quantity `m` and price `τ`; present only for four-input data.
    pub material: Option<f64>,
    pub material_price: Option<f64>,
    /// Markup `ω ≥ 1`.
    pub markup: f64,
    /// Gross output `y`.
    pub output: f64,
}

impl PanelCell {
    pub fn comp_capital(&self) -> f64 {
        self.capital_price * self.capital
    }

    pub fn comp_labor(&self) -> f64 {
        self.wage * self.labor
    }

    pub fn comp_energy(&self) -> f64 {
        self.energy_price * self.energy
    }

    pub fn comp_material(&self) -> Option<f64> {
        match (self.material_price, self.material) {
            (Some(p), Some(q)) => Some(p * q),
            _ => None,
        }
    }

    /// Input quantities in canonical order `[k, l, e]` or `[k, l, e, m]`.
    pub fn quantities(&self, spec: &CesSpec) -> Result<Vec<f64>> {
        let mut q = vec![self.capital, self.labor, self.energy];
        if spec.n_inputs() == 4 {
            q.push(self.material.ok_or_else(|| {
                Error::MissingData(format!(
                    "{} {} {}: four-input spec but cell has no material quantity",
                    self.country, self.sector, self.year
                ))
            })?);
        }
        Ok(q)
    }

    /// Factor compensations in canonical order, matching [`Self::quantities`].
    pub fn compensations(&self, spec: &CesSpec) -> Result<Vec<f64>> {
        let mut c = vec![self.comp_capital(), self.comp_labor(), self.comp_energy()];
        if spec.n_inputs() == 4 {
            c.push(self.comp_material().ok_or_else(|| {
                Error::MissingData(format!(
                    "{} {} {}: four-input spec but cell has no material price/quantity",
                    self.country, self.sector, self.year
                ))
            })?);
        }
        Ok(c)
    }

    /// Validates positivity and finiteness of every entry used downstream.
    pub fn validate(&self, spec: &CesSpec) -> Result<()> {
        let mut checks = vec![
            ("capital", self.capital),
            ("capital_price", self.capital_price),
            ("labor", self.labor),
            ("wage", self.wage),
            ("energy", self.energy),
            ("energy_price", self.energy_price),
            ("markup", self.markup),
            ("output", self.output),
        ];
        if spec.n_inputs() == 4 {
            match (self.material, self.material_price) {
                (Some(m), Some(p)) => {
                    checks.push(("material", m));
                    checks.push(("material_price", p));
                }
                _ => {
                    return Err(Error::MissingData(format!(
                        "{} {} {}: four-input spec but cell has no material data",
                        self.country, self.sector, self.year
                    )))
                }
            }
        }
        for (name, v) in checks {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "{} {} {}: {name} must be strictly positive and finite, got {v}",
                    self.country, self.sector, self.year
                )));
            }
        }
        Ok(())
    }
}

/// First and last observed year for a country (minimum over its sectors).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub first_year: i32,
    pub last_year: i32,
}

/// A full panel: analysis-ready cells plus the subsector detail needed for
/// shift-share instruments, with coverage bookkeeping.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PanelDataset {
    pub cells: Vec<PanelCell>,
    /// Subsector-level component series retained for instrument construction.
    pub subsector_detail: Vec<RawComponentSeries>,
    /// Per-country first/last observed year (the base year `t0` varies by country).
    pub coverage: BTreeMap<String, Coverage>,
    /// Missing interior years per (country, sector), flagged at assembly.
    pub gaps: BTreeMap<(String, Sector), Vec<i32>>,
}

impl PanelDataset {
    /// Builds a dataset from cells, deriving coverage and gap flags.
    pub fn from_cells(cells: Vec<PanelCell>, subsector_detail: Vec<RawComponentSeries>) -> Self {
        let mut ds = PanelDataset {
            cells,
            subsector_detail,
            coverage: BTreeMap::new(),
            gaps: BTreeMap::new(),
        };
        ds.rebuild_coverage();
        ds
    }

    /// Recomputes `coverage` and `gaps` from the current cells. Cells are
    /// sorted to the canonical (country, sector, year) order as a side effect.
    pub fn rebuild_coverage(&mut self) {
        self.cells.sort_by(|a, b| {
            (&a.country, a.sector, a.year).cmp(&(&b.country, b.sector, b.year))
        });
        self.coverage.clear();
        self.gaps.clear();
        let mut per_pair: BTreeMap<(String, Sector), Vec<i32>> = BTreeMap::new();
        for cell in &self.cells {
            per_pair
                .entry((cell.country.clone(), cell.sector))
                .or_default()
                .push(cell.year);
        }
        for ((country, sector), years) in per_pair {
            let first = *years.first().expect("non-empty");
            let last = *years.last().expect("non-empty");
            let missing: Vec<i32> = (first..=last).filter(|y| !years.contains(y)).collect();
            if !missing.is_empty() {
                self.gaps.insert((country.clone(), sector), missing);
            }
            self.coverage
                .entry(country)
                .and_modify(|c| {
                    c.first_year = c.first_year.min(first);
                    c.last_year = c.last_year.max(last);
                })
                .or_insert(Coverage {
                    first_year: first,
                    last_year: last,
                });
        }
    }

    /// Looks up a single cell.
    pub fn cell(&self, country: &str, sector: Sector, year: i32) -> Option<&PanelCell> {
        self.cells
            .iter()
            .find(|c| c.country == country && c.sector == sector && c.year == year)
    }

    /// All cells of one (country, sector), sorted by year.
    pub fn series(&self, country: &str, sector: Sector) -> Vec<&PanelCell> {
        let mut v: Vec<&PanelCell> = self
            .cells
            .iter()
            .filter(|c| c.country == country && c.sector == sector)
            .collect();
        v.sort_by_key(|c| c.year);
        v
    }

    /// Distinct countries in canonical order.
    pub fn countries(&self) -> Vec<String> {
        self.coverage.keys().cloned().collect()
    }

    /// Observed years of one (country, sector), sorted.
    pub fn years(&self, country: &str, sector: Sector) -> Vec<i32> {
        self.series(country, sector).iter().map(|c| c.year).collect()
    }
}

/// Gross output implied by factor compensations and the markup.
///
/// Under the maintained production structure, output equals markup times
/// total factor compensation; under decreasing returns (`mu < 1` is allowed
/// but the typical calibration has `mu ≥ 1`) the scale elasticity divides the
/// markup. `compensations` is `[rk, wl, ve]` for three-input variants and
/// `[rk, wl, ve, τm]` for the four-input variant.
///
/// # Examples
///
/// ```
/// use augtech::ces::CesSpec;
/// use augtech::panel::gross_output;
///
/// let spec = CesSpec::one_level(-1.0).unwrap();
/// let y = gross_output(&[1.0, 1.0, 1.0], 1.0, &spec).unwrap();
/// assert!((y - 3.0).abs() < 1e-15);
///
/// let scaled = CesSpec::one_level_scale(-1.0, 1.2).unwrap();
/// let y = gross_output(&[1.0, 1.0, 1.0], 1.0, &scaled).unwrap();
/// assert!((y - 2.5).abs() < 1e-15);
/// ```
pub fn gross_output(compensations: &[f64], markup: f64, spec: &CesSpec) -> Result<f64> {
    let n = spec.n_inputs();
    if compensations.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: compensations.len(),
            context: "factor compensations for gross output".into(),
        });
    }
    if !markup.is_finite() || markup <= 0.0 {
        return Err(Error::Domain(format!(
            "markup must be strictly positive and finite, got {markup}"
        )));
    }
    let mut total = 0.0;
    for (i, &c) in compensations.iter().enumerate() {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Domain(format!(
                "compensation {i} must be strictly positive and finite, got {c}"
            )));
        }
        total += c;
    }
    Ok(total * markup / spec.scale_elasticity())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell() -> PanelCell {
        PanelCell {
            country: "AAA".into(),
            sector: Sector::Goods,
            year: 2000,
            capital: 1.0,
            capital_price: 2.0,
            labor: 3.0,
            wage: 4.0,
            energy: 5.0,
            energy_price: 6.0,
            material: None,
            material_price: None,
            markup: 1.1,
            output: 10.0,
        }
    }

    #[test]
    fn compensation_accessors_multiply_price_and_quantity() {
        let c = cell();
        assert_eq!(c.comp_capital(), 2.0);
        assert_eq!(c.comp_labor(), 12.0);
        assert_eq!(c.comp_energy(), 30.0);
        assert_eq!(c.comp_material(), None);
    }

    #[test]
    fn gross_output_three_input_crs() {
        let spec = CesSpec::one_level(-1.0).unwrap();
        let y = gross_output(&[1.0, 1.0, 1.0], 1.0, &spec).unwrap();
        assert!((y - 3.0).abs() < 1e-15);
        let y = gross_output(&[1.0, 2.0, 3.0], 1.5, &spec).unwrap();
        assert!((y - 9.0).abs() < 1e-15);
    }

    #[test]
    fn gross_output_divides_markup_by_scale_elasticity() {
        let spec = CesSpec::one_level_scale(-1.0, 1.2).unwrap();
        let y = gross_output(&[1.0, 1.0, 1.0], 1.2, &spec).unwrap();
        assert!((y - 3.0).abs() < 1e-15);
        let y = gross_output(&[1.0, 1.0, 1.0], 1.0, &spec).unwrap();
        assert!((y - 2.5).abs() < 1e-15);
    }

    #[test]
    fn gross_output_four_input_needs_four_compensations() {
        let spec = CesSpec::four_input(-1.0).unwrap();
        assert!(gross_output(&[1.0, 1.0, 1.0], 1.0, &spec).is_err());
        let y = gross_output(&[1.0, 1.0, 1.0, 1.0], 1.0, &spec).unwrap();
        assert!((y - 4.0).abs() < 1e-15);
    }

    #[test]
    fn gross_output_rejects_nonpositive_inputs() {
        let spec = CesSpec::one_level(-1.0).unwrap();
        assert!(gross_output(&[1.0, 0.0, 1.0], 1.0, &spec).is_err());
        assert!(gross_output(&[1.0, 1.0, 1.0], 0.0, &spec).is_err());
        assert!(gross_output(&[1.0, 1.0, 1.0], f64::NAN, &spec).is_err());
    }

    #[test]
    fn coverage_tracks_first_last_and_gaps() {
        let mut cells = Vec::new();
        for year in [1995, 1996, 1998, 1999] {
            let mut c = cell();
            c.year = year;
            cells.push(c);
        }
        let mut c2 = cell();
        c2.sector = Sector::Service;
        c2.year = 1997;
        cells.push(c2);
        let ds = PanelDataset::from_cells(cells, Vec::new());
        let cov = ds.coverage.get("AAA").unwrap();
        assert_eq!(cov.first_year, 1995);
        assert_eq!(cov.last_year, 1999);
        assert_eq!(
            ds.gaps.get(&("AAA".to_string(), Sector::Goods)).unwrap(),
            &vec![1997]
        );
        assert!(!ds.gaps.contains_key(&("AAA".to_string(), Sector::Service)));
    }

    #[test]
    fn sector_and_input_kind_round_trip_strings() {
        for s in Sector::ALL {
            assert_eq!(s.to_string().parse::<Sector>().unwrap(), s);
        }
        assert_eq!(Sector::Goods.other(), Sector::Service);
        for k in [
            InputKind::Capital,
            InputKind::Labor,
            InputKind::Energy,
            InputKind::Material,
        ] {
            assert_eq!(k.to_string().parse::<InputKind>().unwrap(), k);
        }
        assert!("widgets".parse::<Sector>().is_err());
    }
}
