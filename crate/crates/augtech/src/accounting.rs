//! Exact Shapley decomposition of output growth.
//!
//! Log output growth between two endpoint years is attributed to each
//! "determinant" (input quantities and technology levels) by its Shapley
//! value: the average, over all orders in which determinants are switched
//! from initial to final values, of the log-output change caused by switching
//! that determinant. The decomposition is exact — contributions sum to the
//! total log change — and treats every determinant symmetrically.
//!
//! [`shapley`] evaluates the characteristic function once per subset
//! (2^M evaluations) and combines marginals with the usual
//! `|S|!(M−|S|−1)!/M!` weights; [`shapley_by_permutations`] is the factorial
//! enumeration used as a testing oracle.

use serde::{Deserialize, Serialize};

use crate::ces::{ces_output, CesSpec, TechPath};
use crate::panel::{PanelCell, Sector};
use crate::{Error, Result};

/// Maximum number of determinants (2^M characteristic evaluations).
pub const MAX_DETERMINANTS: usize = 20;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Shapley values for `m` determinants of the characteristic function
/// `gamma`, called with a bitmask selecting which determinants take their
/// final value (bit `i` set ⇒ determinant `i` is switched).
///
/// Returns one contribution per determinant; they sum to
/// `gamma(full) − gamma(empty)` exactly up to rounding.
pub fn shapley<F: FnMut(u32) -> Result<f64>>(m: usize, mut gamma: F) -> Result<Vec<f64>> {
    if m == 0 || m > MAX_DETERMINANTS {
        return Err(Error::Domain(format!(
            "number of determinants must lie in 1..={MAX_DETERMINANTS}, got {m}"
        )));
    }
    let size = 1usize << m;
    let mut values = Vec::with_capacity(size);
    for mask in 0..size {
        values.push(gamma(mask as u32)?);
    }
    let m_fact = factorial(m);
    // weight(|S|) for S not containing the player being added.
    let weights: Vec<f64> = (0..m)
        .map(|s| factorial(s) * factorial(m - 1 - s) / m_fact)
        .collect();
    let mut out = vec![0.0; m];
    for (player, contribution) in out.iter_mut().enumerate() {
        let bit = 1usize << player;
        let mut total = 0.0;
        for mask in 0..size {
            if mask & bit != 0 {
                continue;
            }
            let s = (mask as u32).count_ones() as usize;
            total += weights[s] * (values[mask | bit] - values[mask]);
        }
        *contribution = total;
    }
    Ok(out)
}

/// Factorial-enumeration oracle: averages marginal contributions over all
/// `m!` switch orders. Exponential; only suitable for small `m` in tests.
pub fn shapley_by_permutations<F: FnMut(u32) -> Result<f64>>(
    m: usize,
    mut gamma: F,
) -> Result<Vec<f64>> {
    if m == 0 || m > 10 {
        return Err(Error::Domain(format!(
            "permutation oracle supports 1..=10 determinants, got {m}"
        )));
    }
    let size = 1usize << m;
    let mut values = Vec::with_capacity(size);
    for mask in 0..size {
        values.push(gamma(mask as u32)?);
    }
    let mut order: Vec<usize> = (0..m).collect();
    let mut out = vec![0.0; m];
    let mut count = 0usize;
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; m];
    let mut accumulate = |order: &[usize], out: &mut Vec<f64>| {
        let mut mask = 0usize;
        for &player in order {
            let next = mask | (1 << player);
            out[player] += values[next] - values[mask];
            mask = next;
        }
    };
    accumulate(&order, &mut out);
    count += 1;
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            accumulate(&order, &mut out);
            count += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let n = count as f64;
    for v in out.iter_mut() {
        *v /= n;
    }
    Ok(out)
}

/// Annualized Shapley contributions (log points × 100 per year) for each
/// determinant of one (country, sector) growth episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contributions {
    pub capital: f64,
    pub labor: f64,
    pub energy: f64,
    pub material: Option<f64>,
    pub capital_aug: f64,
    pub labor_aug: f64,
    pub energy_aug: f64,
    pub material_aug: Option<f64>,
}

impl Contributions {
    /// Paired input-plus-technology sums `(a_k k, a_l l, a_e e[, a_m m])`.
    pub fn paired(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("capital", self.capital + self.capital_aug),
            ("labor", self.labor + self.labor_aug),
            ("energy", self.energy + self.energy_aug),
        ];
        if let (Some(m), Some(am)) = (self.material, self.material_aug) {
            out.push(("material", m + am));
        }
        out
    }

    /// Total technology (TFP-like) contribution: the sum over the
    /// factor-augmenting terms.
    pub fn tfp(&self) -> f64 {
        self.capital_aug + self.labor_aug + self.energy_aug + self.material_aug.unwrap_or(0.0)
    }

    fn sum(&self) -> f64 {
        self.capital
            + self.labor
            + self.energy
            + self.material.unwrap_or(0.0)
            + self.tfp()
    }
}

/// One row of the growth-decomposition table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleyTable {
    pub country: String,
    pub sector: Sector,
    pub start_year: i32,
    pub end_year: i32,
    /// Annualized output growth, 100·Δln y / (T − t0).
    pub output_growth: f64,
    /// Annualized markup change, reported alongside but not a determinant.
    pub markup_growth: f64,
    pub contributions: Contributions,
    /// Set when the row is a difference against a reference country.
    pub reference: Option<String>,
}

impl ShapleyTable {
    /// Span of the episode in years.
    pub fn span(&self) -> i32 {
        self.end_year - self.start_year
    }
}

fn tech_at<'a>(path: &'a TechPath, year: i32) -> Result<Vec<f64>> {
    let idx = path
        .years
        .iter()
        .position(|&y| y == year)
        .ok_or_else(|| Error::MissingData(format!("technology path has no year {year}")))?;
    let mut v = vec![
        path.capital_aug[idx],
        path.labor_aug[idx],
        path.energy_aug[idx],
    ];
    if let Some(m) = &path.material_aug {
        v.push(m[idx]);
    }
    Ok(v)
}

/// Decomposes log output growth of one (country, sector) episode between the
/// first and last year of the technology path into exact Shapley
/// contributions of input quantities and technology levels.
///
/// The path must be in levels (not normalized) and measured under `spec`;
/// the round-trip identity then makes the decomposition exactly exhaust
/// `Δln y`. All reported numbers are annualized log points × 100.
pub fn growth_table(
    cells: &[PanelCell],
    path: &TechPath,
    spec: &CesSpec,
) -> Result<ShapleyTable> {
    if path.spec != *spec {
        return Err(Error::SpecMismatch(format!(
            "technology path measured under {:?}, decomposition requested under {:?}",
            path.spec, spec
        )));
    }
    if path.normalized {
        return Err(Error::SpecMismatch(
            "growth decomposition needs technology levels, not a normalized path".into(),
        ));
    }
    let (&start_year, &end_year) = match (path.years.first(), path.years.last()) {
        (Some(a), Some(b)) if a < b => (a, b),
        _ => {
            return Err(Error::MissingData(
                "growth decomposition needs at least two measured years".into(),
            ))
        }
    };
    let find_cell = |year: i32| -> Result<&PanelCell> {
        cells
            .iter()
            .find(|c| c.country == path.country && c.sector == path.sector && c.year == year)
            .ok_or_else(|| {
                Error::MissingData(format!(
                    "{} {} {year}: no cell for decomposition endpoint",
                    path.country, path.sector
                ))
            })
    };
    let start = find_cell(start_year)?;
    let end = find_cell(end_year)?;
    let x0 = start.quantities(spec)?;
    let x1 = end.quantities(spec)?;
    let a0 = tech_at(path, start_year)?;
    let a1 = tech_at(path, end_year)?;
    let n = spec.n_inputs();
    let m = 2 * n; // determinants: quantities then technologies
    let gamma = |mask: u32| -> Result<f64> {
        let mut x = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n);
        for i in 0..n {
            x.push(if mask & (1 << i) != 0 { x1[i] } else { x0[i] });
            let j = n + i;
            a.push(if mask & (1 << j) != 0 { a1[i] } else { a0[i] });
        }
        Ok(ces_output(spec, &a, &x)?.ln())
    };
    let lambda = shapley(m, gamma)?;
    let total: f64 = lambda.iter().sum();
    let dln_y = end.output.ln() - start.output.ln();
    if (total - dln_y).abs() > 1e-9 {
        return Err(Error::SpecMismatch(format!(
            "decomposition does not exhaust output growth ({total} vs {dln_y}); \
             were the technologies measured from these cells under the same spec?"
        )));
    }
    let span = f64::from(end_year - start_year);
    let annual = |v: f64| 100.0 * v / span;
    let contributions = Contributions {
        capital: annual(lambda[0]),
        labor: annual(lambda[1]),
        energy: annual(lambda[2]),
        material: (n == 4).then(|| annual(lambda[3])),
        capital_aug: annual(lambda[n]),
        labor_aug: annual(lambda[n + 1]),
        energy_aug: annual(lambda[n + 2]),
        material_aug: (n == 4).then(|| annual(lambda[n + 3])),
    };
    Ok(ShapleyTable {
        country: path.country.clone(),
        sector: path.sector,
        start_year,
        end_year,
        output_growth: annual(dln_y),
        markup_growth: annual(end.markup.ln() - start.markup.ln()),
        contributions,
        reference: None,
    })
}

/// Subtracts the reference country's table from every table with the same
/// sector and period. Tables for the reference country itself difference to
/// exact zeros. Errors if a (sector, period) lacks a reference row.
pub fn difference_vs_reference(
    tables: &[ShapleyTable],
    reference: &str,
) -> Result<Vec<ShapleyTable>> {
    let mut out = Vec::new();
    for t in tables {
        if t.country == reference {
            continue;
        }
        let r = tables
            .iter()
            .find(|r| {
                r.country == reference
                    && r.sector == t.sector
                    && r.start_year == t.start_year
                    && r.end_year == t.end_year
            })
            .ok_or_else(|| {
                Error::MissingData(format!(
                    "no {reference} table for sector {} over {}-{} to difference against",
                    t.sector, t.start_year, t.end_year
                ))
            })?;
        let sub_opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        };
        out.push(ShapleyTable {
            country: t.country.clone(),
            sector: t.sector,
            start_year: t.start_year,
            end_year: t.end_year,
            output_growth: t.output_growth - r.output_growth,
            markup_growth: t.markup_growth - r.markup_growth,
            contributions: Contributions {
                capital: t.contributions.capital - r.contributions.capital,
                labor: t.contributions.labor - r.contributions.labor,
                energy: t.contributions.energy - r.contributions.energy,
                material: sub_opt(t.contributions.material, r.contributions.material),
                capital_aug: t.contributions.capital_aug - r.contributions.capital_aug,
                labor_aug: t.contributions.labor_aug - r.contributions.labor_aug,
                energy_aug: t.contributions.energy_aug - r.contributions.energy_aug,
                material_aug: sub_opt(t.contributions.material_aug, r.contributions.material_aug),
            },
            reference: Some(reference.to_string()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ces::{measure_technologies, MeasureOptions};

    #[test]
    fn product_game_hand_case() {
        // Γ = d1 · d2 with initial (1,1), final (2,3):
        // Λ1 = ((2−1) + (6−3)) / 2 = 2, Λ2 = ((3−1) + (6−2)) / 2 = 3.
        let values = |mask: u32| {
            let d1 = if mask & 1 != 0 { 2.0 } else { 1.0 };
            let d2 = if mask & 2 != 0 { 3.0 } else { 1.0 };
            Ok(d1 * d2)
        };
        let lambda = shapley(2, values).unwrap();
        assert!((lambda[0] - 2.0).abs() < 1e-15);
        assert!((lambda[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn dummy_and_symmetric_players() {
        // Player 2 never changes the value; players 0 and 1 are symmetric.
        let values = |mask: u32| {
            let a = if mask & 1 != 0 { 2.0 } else { 1.0 };
            let b = if mask & 2 != 0 { 2.0 } else { 1.0 };
            Ok(a + b)
        };
        let lambda = shapley(3, values).unwrap();
        assert_eq!(lambda[0], lambda[1]);
        assert_eq!(lambda[2], 0.0);
    }

    #[test]
    fn matches_permutation_oracle_on_ces_instances() {
        let spec = CesSpec::one_level(-1.0).unwrap();
        let x0 = [1.0, 2.0, 0.7];
        let x1 = [1.4, 1.8, 0.9];
        let a0 = [3.0, 1.5, 2.2];
        let a1 = [3.3, 1.9, 2.0];
        let gamma = |mask: u32| {
            let mut x = [0.0; 3];
            let mut a = [0.0; 3];
            for i in 0..3 {
                x[i] = if mask & (1 << i) != 0 { x1[i] } else { x0[i] };
                a[i] = if mask & (1 << (3 + i)) != 0 { a1[i] } else { a0[i] };
            }
            Ok(ces_output(&spec, &a, &x)?.ln())
        };
        let fast = shapley(6, gamma).unwrap();
        let slow = shapley_by_permutations(6, gamma).unwrap();
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).abs() < 1e-12, "{f} vs {s}");
        }
        let total: f64 = fast.iter().sum();
        let expect = gamma(0b111111).unwrap() - gamma(0).unwrap();
        assert!((total - expect).abs() < 1e-12);
    }

    fn cell(year: i32, q: [f64; 3], p: [f64; 3], markup: f64) -> PanelCell {
        let comp: f64 = q.iter().zip(&p).map(|(a, b)| a * b).sum();
        PanelCell {
            country: "USA".into(),
            sector: Sector::Goods,
            year,
            capital: q[0],
            capital_price: p[0],
            labor: q[1],
            wage: p[1],
            energy: q[2],
            energy_price: p[2],
            material: None,
            material_price: None,
            markup,
            output: comp * markup,
        }
    }

    #[test]
    fn growth_table_is_exact_and_annualized() {
        let spec = CesSpec::one_level_from_elasticity(0.444).unwrap();
        let cells = vec![
            cell(1978, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1.1),
            cell(2005, [1.9, 1.4, 0.8], [1.3, 2.1, 2.4], 1.25),
        ];
        let path = measure_technologies(&cells, &spec, &MeasureOptions::default()).unwrap();
        let table = growth_table(&cells, &path, &spec).unwrap();
        assert_eq!(table.span(), 27);
        let dln_y = cells[1].output.ln() - cells[0].output.ln();
        assert!((table.output_growth - 100.0 * dln_y / 27.0).abs() < 1e-12);
        // Contributions exhaust output growth exactly (annualized alike).
        assert!((table.contributions.sum() - table.output_growth).abs() < 1e-10);
        // Markup column is informational, not a determinant.
        let dln_omega = (1.25f64 / 1.1).ln();
        assert!((table.markup_growth - 100.0 * dln_omega / 27.0).abs() < 1e-12);
    }

    #[test]
    fn growth_table_rejects_mismatched_spec_or_normalized_path() {
        let spec = CesSpec::one_level_from_elasticity(0.444).unwrap();
        let other = CesSpec::one_level_from_elasticity(0.58).unwrap();
        let cells = vec![
            cell(2000, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1.0),
            cell(2001, [1.1, 1.0, 0.9], [1.0, 1.2, 1.1], 1.0),
        ];
        let path = measure_technologies(&cells, &spec, &MeasureOptions::default()).unwrap();
        assert!(matches!(
            growth_table(&cells, &path, &other),
            Err(Error::SpecMismatch(_))
        ));
        let norm = path.normalized();
        assert!(matches!(
            growth_table(&cells, &norm, &spec),
            Err(Error::SpecMismatch(_))
        ));
    }

    #[test]
    fn reference_differencing_zeroes_self_and_errors_on_missing_period() {
        let spec = CesSpec::one_level_from_elasticity(0.444).unwrap();
        let us_cells = vec![
            cell(1978, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1.0),
            cell(2005, [1.9, 1.4, 0.8], [1.3, 2.1, 2.4], 1.0),
        ];
        let us_path = measure_technologies(&us_cells, &spec, &MeasureOptions::default()).unwrap();
        let us = growth_table(&us_cells, &us_path, &spec).unwrap();
        let mut jp_cells = us_cells.clone();
        for c in jp_cells.iter_mut() {
            c.country = "JPN".into();
            c.energy *= 1.1;
        }
        let jp_path = measure_technologies(&jp_cells, &spec, &MeasureOptions::default()).unwrap();
        let jp = growth_table(&jp_cells, &jp_path, &spec).unwrap();

        let diffs = difference_vs_reference(&[us.clone(), jp.clone()], "USA").unwrap();
        assert_eq!(diffs.len(), 1);
        assert_eq!(diffs[0].country, "JPN");
        assert_eq!(diffs[0].reference.as_deref(), Some("USA"));
        assert!(
            (diffs[0].output_growth - (jp.output_growth - us.output_growth)).abs() < 1e-12
        );
        // Self-difference is exactly zero.
        let self_diff = difference_vs_reference(&[us.clone(), us.clone()], "USA").unwrap();
        assert!(self_diff.is_empty());

        // Period mismatch: JPN observed over a different window.
        let mut late = jp.clone();
        late.start_year = 1994;
        match difference_vs_reference(&[us, late], "USA") {
            Err(Error::MissingData(msg)) => {
                assert!(msg.contains("1994"), "{msg}");
            }
            other => panic!("expected missing reference period, got {other:?}"),
        }
    }

    #[test]
    fn four_input_decomposition_uses_eight_determinants() {
        let spec = CesSpec::four_input(-1.0).unwrap();
        let mk = |year: i32, scale: f64| {
            let mut c = cell(year, [1.0, 1.0, 1.0], [1.0, 1.0, 1.0], 1.0);
            c.material = Some(1.0 * scale);
            c.material_price = Some(1.0);
            c.output = (3.0 + scale) * 1.0;
            c
        };
        let cells = vec![mk(2000, 1.0), mk(2010, 1.3)];
        let path = measure_technologies(&cells, &spec, &MeasureOptions::default()).unwrap();
        let table = growth_table(&cells, &path, &spec).unwrap();
        assert!(table.contributions.material.is_some());
        assert!(table.contributions.material_aug.is_some());
        assert!((table.contributions.sum() - table.output_growth).abs() < 1e-10);
    }
}
