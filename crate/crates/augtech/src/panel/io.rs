//! CSV ingestion and emission for panel data.
//!
//! Input schemas (all with headers):
//!
//! * `panel.csv`: `country,sector,subsector,year,input_kind,component,price,quantity,compensation`
//!   — component-level series at subsector detail; `compensation` may be
//!   empty, in which case `price × quantity` is used.
//! * `capital.csv`: `country,sector,component,year,investment_price,capital_stock,investment,capital_compensation`
//!   — capital asset detail for rental-price construction.
//! * `markup.csv`: `country,year,markup` — optional; markups default to 1.
//!
//! The emitted `cells.csv` holds one analysis-ready cell per row:
//! `country,sector,year,capital,labor,energy,material,capital_price,wage,energy_price,material_price,markup,output`.
//! Numbers are written in Rust's shortest round-trip decimal form, so parsing
//! a written file reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::capital::{rental_prices, RateApproach, RateScope};
use super::composition::{adjust_composition, aggregate_subsectors};
use super::{
    gross_output, CapitalComponentSeries, InputKind, PanelCell, PanelDataset, RawComponentSeries,
    Sector,
};
use crate::ces::CesSpec;
use crate::{Error, Result};

/// Relative tolerance for the `compensation ≈ price × quantity` consistency
/// check during ingestion.
pub const COMPENSATION_TOL: f64 = 1e-9;

struct Header {
    indices: Vec<usize>,
}

impl Header {
    fn new(file: &str, headers: &csv::StringRecord, required: &[&str]) -> Result<Header> {
        let mut indices = Vec::with_capacity(required.len());
        for &name in required {
            let idx = headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::MissingColumn {
                    file: file.to_string(),
                    column: name.to_string(),
                })?;
            indices.push(idx);
        }
        Ok(Header { indices })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, slot: usize) -> &'r str {
        record.get(self.indices[slot]).unwrap_or("").trim()
    }
}

fn row_of(record: &csv::StringRecord) -> usize {
    record
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or_default()
}

fn parse_f64(file: &str, row: usize, column: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::InvalidRow {
        file: file.to_string(),
        row,
        message: format!("column `{column}`: cannot parse `{raw}` as a number"),
    })
}

fn parse_i32(file: &str, row: usize, column: &str, raw: &str) -> Result<i32> {
    raw.parse::<i32>().map_err(|_| Error::InvalidRow {
        file: file.to_string(),
        row,
        message: format!("column `{column}`: cannot parse `{raw}` as a year"),
    })
}

fn require_positive(file: &str, row: usize, column: &str, value: f64) -> Result<f64> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidRow {
            file: file.to_string(),
            row,
            message: format!("column `{column}`: must be strictly positive, got {value}"),
        });
    }
    Ok(value)
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path.display().to_string(), e))
}

/// Loads component-level panel series from `panel.csv`.
pub fn load_panel_csv(path: &Path) -> Result<Vec<RawComponentSeries>> {
    let file = path.display().to_string();
    let mut reader = open_reader(path)?;
    let header = Header::new(
        &file,
        reader.headers().map_err(|e| Error::csv(&*file, e))?,
        &[
            "country",
            "sector",
            "subsector",
            "year",
            "input_kind",
            "component",
            "price",
            "quantity",
            "compensation",
        ],
    )?;
    type Key = (String, Sector, String, InputKind, String);
    let mut grouped: BTreeMap<Key, BTreeMap<i32, (f64, f64, f64, usize)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(&*file, e))?;
        let row = row_of(&record);
        let country = header.get(&record, 0).to_string();
        if country.is_empty() {
            return Err(Error::InvalidRow {
                file: file.clone(),
                row,
                message: "column `country`: must not be empty".into(),
            });
        }
        let sector = Sector::from_str(header.get(&record, 1)).map_err(|e| Error::InvalidRow {
            file: file.clone(),
            row,
            message: e.to_string(),
        })?;
        let subsector = header.get(&record, 2).to_string();
        let year = parse_i32(&file, row, "year", header.get(&record, 3))?;
        let input_kind =
            InputKind::from_str(header.get(&record, 4)).map_err(|e| Error::InvalidRow {
                file: file.clone(),
                row,
                message: e.to_string(),
            })?;
        let component = header.get(&record, 5).to_string();
        let price = require_positive(
            &file,
            row,
            "price",
            parse_f64(&file, row, "price", header.get(&record, 6))?,
        )?;
        let quantity = require_positive(
            &file,
            row,
            "quantity",
            parse_f64(&file, row, "quantity", header.get(&record, 7))?,
        )?;
        let comp_raw = header.get(&record, 8);
        let compensation = if comp_raw.is_empty() {
            price * quantity
        } else {
            let c = parse_f64(&file, row, "compensation", comp_raw)?;
            let implied = price * quantity;
            let scale = implied.abs().max(c.abs()).max(1.0);
            if (c - implied).abs() > COMPENSATION_TOL * scale {
                return Err(Error::InvalidRow {
                    file: file.clone(),
                    row,
                    message: format!(
                        "compensation {c} inconsistent with price × quantity = {implied}"
                    ),
                });
            }
            c
        };
        let key = (country, sector, subsector, input_kind, component);
        let entry = grouped.entry(key.clone()).or_default();
        if entry.contains_key(&year) {
            return Err(Error::DuplicateKey {
                file: file.clone(),
                row,
                key: format!(
                    "({}, {}, {}, {year}, {}, {})",
                    key.0, key.1, key.2, key.3, key.4
                ),
            });
        }
        entry.insert(year, (price, quantity, compensation, row));
    }
    let mut out = Vec::new();
    for ((country, sector, subsector, input_kind, component), by_year) in grouped {
        let mut series = RawComponentSeries {
            country,
            sector,
            subsector,
            input_kind,
            component,
            years: Vec::new(),
            prices: Vec::new(),
            quantities: Vec::new(),
            compensations: Vec::new(),
        };
        for (year, (p, q, c, _)) in by_year {
            series.years.push(year);
            series.prices.push(p);
            series.quantities.push(q);
            series.compensations.push(c);
        }
        out.push(series);
    }
    Ok(out)
}

/// Loads capital asset detail from `capital.csv`.
pub fn load_capital_csv(path: &Path) -> Result<Vec<CapitalComponentSeries>> {
    let file = path.display().to_string();
    let mut reader = open_reader(path)?;
    let header = Header::new(
        &file,
        reader.headers().map_err(|e| Error::csv(&*file, e))?,
        &[
            "country",
            "sector",
            "component",
            "year",
            "investment_price",
            "capital_stock",
            "investment",
            "capital_compensation",
        ],
    )?;
    type Key = (String, Sector, String);
    let mut grouped: BTreeMap<Key, BTreeMap<i32, (f64, f64, f64, f64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(&*file, e))?;
        let row = row_of(&record);
        let country = header.get(&record, 0).to_string();
        let sector = Sector::from_str(header.get(&record, 1)).map_err(|e| Error::InvalidRow {
            file: file.clone(),
            row,
            message: e.to_string(),
        })?;
        let component = header.get(&record, 2).to_string();
        let year = parse_i32(&file, row, "year", header.get(&record, 3))?;
        let q = require_positive(
            &file,
            row,
            "investment_price",
            parse_f64(&file, row, "investment_price", header.get(&record, 4))?,
        )?;
        let k = require_positive(
            &file,
            row,
            "capital_stock",
            parse_f64(&file, row, "capital_stock", header.get(&record, 5))?,
        )?;
        let inv = parse_f64(&file, row, "investment", header.get(&record, 6))?;
        if !inv.is_finite() || inv < 0.0 {
            return Err(Error::InvalidRow {
                file: file.clone(),
                row,
                message: format!("column `investment`: must be non-negative, got {inv}"),
            });
        }
        let comp = require_positive(
            &file,
            row,
            "capital_compensation",
            parse_f64(&file, row, "capital_compensation", header.get(&record, 7))?,
        )?;
        let key = (country, sector, component);
        let entry = grouped.entry(key.clone()).or_default();
        if entry.contains_key(&year) {
            return Err(Error::DuplicateKey {
                file: file.clone(),
                row,
                key: format!("({}, {}, {}, {year})", key.0, key.1, key.2),
            });
        }
        entry.insert(year, (q, k, inv, comp));
    }
    let mut out = Vec::new();
    for ((country, sector, component), by_year) in grouped {
        let mut series = CapitalComponentSeries {
            country,
            sector,
            component,
            years: Vec::new(),
            investment_prices: Vec::new(),
            stocks: Vec::new(),
            investments: Vec::new(),
            compensations: Vec::new(),
        };
        for (year, (q, k, inv, comp)) in by_year {
            series.years.push(year);
            series.investment_prices.push(q);
            series.stocks.push(k);
            series.investments.push(inv);
            series.compensations.push(comp);
        }
        out.push(series);
    }
    Ok(out)
}

/// Loads the markup series from `markup.csv`, keyed by (country, year).
pub fn load_markup_csv(path: &Path) -> Result<BTreeMap<(String, i32), f64>> {
    let file = path.display().to_string();
    let mut reader = open_reader(path)?;
    let header = Header::new(
        &file,
        reader.headers().map_err(|e| Error::csv(&*file, e))?,
        &["country", "year", "markup"],
    )?;
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(&*file, e))?;
        let row = row_of(&record);
        let country = header.get(&record, 0).to_string();
        let year = parse_i32(&file, row, "year", header.get(&record, 1))?;
        let markup = parse_f64(&file, row, "markup", header.get(&record, 2))?;
        if !markup.is_finite() || markup < 1.0 {
            return Err(Error::InvalidRow {
                file: file.clone(),
                row,
                message: format!("column `markup`: must be at least 1, got {markup}"),
            });
        }
        if out.insert((country.clone(), year), markup).is_some() {
            return Err(Error::DuplicateKey {
                file: file.clone(),
                row,
                key: format!("({country}, {year})"),
            });
        }
    }
    Ok(out)
}

/// Options controlling panel assembly.
#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    /// Production variant; decides whether materials are required and how
    /// gross output is formed.
    pub spec: CesSpec,
    pub rate_approach: RateApproach,
    pub rate_scope: RateScope,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            spec: CesSpec::one_level_from_elasticity(crate::ces::DEFAULT_ELASTICITY)
                .expect("default elasticity is valid"),
            rate_approach: RateApproach::default(),
            rate_scope: RateScope::default(),
        }
    }
}

/// Assembles analysis-ready cells from component data.
///
/// Labor, energy, and material series are aggregated across subsectors and
/// composition-adjusted per (country, sector). Capital rentals come from
/// `capital_series` under the configured rate approach and scope, then feed
/// the same composition adjustment with stocks as quantities. A cell exists
/// for every year in which all inputs (and the markup, if supplied) are
/// available; gross output is markup times total factor compensation
/// (divided by the scale elasticity for the scale variant).
pub fn assemble(
    panel_rows: &[RawComponentSeries],
    capital_series: &[CapitalComponentSeries],
    markups: Option<&BTreeMap<(String, i32), f64>>,
    options: &AssembleOptions,
) -> Result<PanelDataset> {
    let four_input = options.spec.n_inputs() == 4;
    let aggregated = aggregate_subsectors(panel_rows)?;

    // Composition-adjusted labor/energy/material per (country, sector).
    let mut adjusted: BTreeMap<(String, Sector, InputKind), super::composition::AdjustedInput> =
        BTreeMap::new();
    let mut pair_keys: Vec<(String, Sector)> = Vec::new();
    for kind in [InputKind::Labor, InputKind::Energy, InputKind::Material] {
        let mut by_pair: BTreeMap<(String, Sector), Vec<RawComponentSeries>> = BTreeMap::new();
        for s in aggregated.iter().filter(|s| s.input_kind == kind) {
            by_pair
                .entry((s.country.clone(), s.sector))
                .or_default()
                .push(s.clone());
        }
        for ((country, sector), comps) in by_pair {
            let adj = adjust_composition(&comps)?;
            if !pair_keys.contains(&(country.clone(), sector)) {
                pair_keys.push((country.clone(), sector));
            }
            adjusted.insert((country, sector, kind), adj);
        }
    }

    // Capital rentals per scope group, then composition adjustment.
    let mut capital_groups: BTreeMap<String, Vec<CapitalComponentSeries>> = BTreeMap::new();
    for s in capital_series {
        let key = match options.rate_scope {
            RateScope::CountrySector => format!("{}\u{1f}{}", s.country, s.sector),
            RateScope::Economy => s.country.clone(),
        };
        capital_groups.entry(key).or_default().push(s.clone());
    }
    let mut capital_adjusted: BTreeMap<(String, Sector), super::composition::AdjustedInput> =
        BTreeMap::new();
    for group in capital_groups.values() {
        let rentals = rental_prices(group, options.rate_approach)?;
        let mut by_pair: BTreeMap<(String, Sector), Vec<RawComponentSeries>> = BTreeMap::new();
        for r in rentals {
            for (idx, &year) in r.years.iter().enumerate() {
                if r.prices[idx] <= 0.0 {
                    return Err(Error::Domain(format!(
                        "{} {} {} {year}: non-positive rental price {}; consider the external rate approach",
                        r.country, r.sector, r.component, r.prices[idx]
                    )));
                }
            }
            by_pair
                .entry((r.country.clone(), r.sector))
                .or_default()
                .push(RawComponentSeries {
                    country: r.country.clone(),
                    sector: r.sector,
                    subsector: "ALL".into(),
                    input_kind: InputKind::Capital,
                    component: r.component.clone(),
                    compensations: r
                        .prices
                        .iter()
                        .zip(&r.stocks)
                        .map(|(p, k)| p * k)
                        .collect(),
                    years: r.years,
                    prices: r.prices,
                    quantities: r.stocks,
                });
        }
        for ((country, sector), comps) in by_pair {
            let adj = adjust_composition(&comps)?;
            if !pair_keys.contains(&(country.clone(), sector)) {
                pair_keys.push((country.clone(), sector));
            }
            capital_adjusted.insert((country, sector), adj);
        }
    }

    // Join on years and build cells.
    pair_keys.sort();
    let mut cells = Vec::new();
    for (country, sector) in pair_keys {
        let cap = match capital_adjusted.get(&(country.clone(), sector)) {
            Some(c) => c,
            None => {
                return Err(Error::MissingData(format!(
                    "{country} {sector}: no capital data"
                )))
            }
        };
        let lab = adjusted
            .get(&(country.clone(), sector, InputKind::Labor))
            .ok_or_else(|| Error::MissingData(format!("{country} {sector}: no labor data")))?;
        let ene = adjusted
            .get(&(country.clone(), sector, InputKind::Energy))
            .ok_or_else(|| Error::MissingData(format!("{country} {sector}: no energy data")))?;
        let mat = adjusted.get(&(country.clone(), sector, InputKind::Material));
        if four_input && mat.is_none() {
            return Err(Error::MissingData(format!(
                "{country} {sector}: four-input variant requires material data"
            )));
        }
        for (ci, &year) in cap.years.iter().enumerate() {
            let li = match lab.years.binary_search(&year) {
                Ok(i) => i,
                Err(_) => continue,
            };
            let ei = match ene.years.binary_search(&year) {
                Ok(i) => i,
                Err(_) => continue,
            };
            let mi = if four_input {
                match mat.unwrap().years.binary_search(&year) {
                    Ok(i) => Some(i),
                    Err(_) => continue,
                }
            } else {
                None
            };
            let markup = match markups {
                Some(m) => match m.get(&(country.clone(), year)) {
                    Some(&v) => v,
                    None => {
                        return Err(Error::MissingData(format!(
                            "{country} {year}: no markup for a year with complete input data"
                        )))
                    }
                },
                None => 1.0,
            };
            let mut comps = vec![
                cap.prices[ci] * cap.quantities[ci],
                lab.prices[li] * lab.quantities[li],
                ene.prices[ei] * ene.quantities[ei],
            ];
            if let Some(mi) = mi {
                let m = mat.unwrap();
                comps.push(m.prices[mi] * m.quantities[mi]);
            }
            let output = gross_output(&comps, markup, &options.spec)?;
            cells.push(PanelCell {
                country: country.clone(),
                sector,
                year,
                capital: cap.quantities[ci],
                capital_price: cap.prices[ci],
                labor: lab.quantities[li],
                wage: lab.prices[li],
                energy: ene.quantities[ei],
                energy_price: ene.prices[ei],
                material: mi.map(|i| mat.unwrap().quantities[i]),
                material_price: mi.map(|i| mat.unwrap().prices[i]),
                markup,
                output,
            });
        }
    }
    if cells.is_empty() {
        return Err(Error::MissingData(
            "assembly produced no complete (country, sector, year) cells".into(),
        ));
    }
    Ok(PanelDataset::from_cells(cells, panel_rows.to_vec()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `cells.csv`.
pub fn write_cells_csv(dataset: &PanelDataset, path: &Path) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::csv(path.display().to_string(), e))?;
    writer
        .write_record([
            "country",
            "sector",
            "year",
            "capital",
            "labor",
            "energy",
            "material",
            "capital_price",
            "wage",
            "energy_price",
            "material_price",
            "markup",
            "output",
        ])
        .map_err(|e| Error::csv(path.display().to_string(), e))?;
    for cell in &dataset.cells {
        writer
            .write_record([
                cell.country.clone(),
                cell.sector.to_string(),
                cell.year.to_string(),
                cell.capital.to_string(),
                cell.labor.to_string(),
                cell.energy.to_string(),
                fmt_opt(cell.material),
                cell.capital_price.to_string(),
                cell.wage.to_string(),
                cell.energy_price.to_string(),
                fmt_opt(cell.material_price),
                cell.markup.to_string(),
                cell.output.to_string(),
            ])
            .map_err(|e| Error::csv(path.display().to_string(), e))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Reads `cells.csv` back into a dataset (without subsector detail).
pub fn load_cells_csv(path: &Path) -> Result<PanelDataset> {
    let file = path.display().to_string();
    let mut reader = open_reader(path)?;
    let header = Header::new(
        &file,
        reader.headers().map_err(|e| Error::csv(&*file, e))?,
        &[
            "country",
            "sector",
            "year",
            "capital",
            "labor",
            "energy",
            "material",
            "capital_price",
            "wage",
            "energy_price",
            "material_price",
            "markup",
            "output",
        ],
    )?;
    let mut cells = Vec::new();
    let mut seen: BTreeMap<(String, Sector, i32), usize> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::csv(&*file, e))?;
        let row = row_of(&record);
        let country = header.get(&record, 0).to_string();
        let sector = Sector::from_str(header.get(&record, 1)).map_err(|e| Error::InvalidRow {
            file: file.clone(),
            row,
            message: e.to_string(),
        })?;
        let year = parse_i32(&file, row, "year", header.get(&record, 2))?;
        if seen.insert((country.clone(), sector, year), row).is_some() {
            return Err(Error::DuplicateKey {
                file: file.clone(),
                row,
                key: format!("({country}, {sector}, {year})"),
            });
        }
        let req = |slot: usize, name: &str| -> Result<f64> {
            require_positive(&file, row, name, parse_f64(&file, row, name, header.get(&record, slot))?)
        };
        let opt = |slot: usize, name: &str| -> Result<Option<f64>> {
            let raw = header.get(&record, slot);
            if raw.is_empty() {
                Ok(None)
            } else {
                Ok(Some(require_positive(
                    &file,
                    row,
                    name,
                    parse_f64(&file, row, name, raw)?,
                )?))
            }
        };
        cells.push(PanelCell {
            country,
            sector,
            year,
            capital: req(3, "capital")?,
            labor: req(4, "labor")?,
            energy: req(5, "energy")?,
            material: opt(6, "material")?,
            capital_price: req(7, "capital_price")?,
            wage: req(8, "wage")?,
            energy_price: req(9, "energy_price")?,
            material_price: opt(10, "material_price")?,
            markup: req(11, "markup")?,
            output: req(12, "output")?,
        });
    }
    if cells.is_empty() {
        return Err(Error::MissingData(format!("{file}: no cells")));
    }
    Ok(PanelDataset::from_cells(cells, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_panel_groups_series_and_validates() {
        let f = write_temp(
            "country,sector,subsector,year,input_kind,component,price,quantity,compensation\n\
             USA,goods,ind1,2000,labor,skilled,2.0,3.0,6.0\n\
             USA,goods,ind1,2001,labor,skilled,2.1,3.1,\n\
             USA,goods,ind1,2000,energy,oil,1.0,5.0,5.0\n",
        );
        let series = load_panel_csv(f.path()).unwrap();
        assert_eq!(series.len(), 2);
        let labor = series
            .iter()
            .find(|s| s.input_kind == InputKind::Labor)
            .unwrap();
        assert_eq!(labor.years, vec![2000, 2001]);
        assert!((labor.compensations[1] - 2.1 * 3.1).abs() < 1e-12);
    }

    #[test]
    fn load_panel_rejects_bad_rows() {
        // Missing column.
        let f = write_temp("country,sector,subsector,year,input_kind,component,price,quantity\nUSA,goods,i,2000,labor,a,1,1\n");
        match load_panel_csv(f.path()) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "compensation"),
            other => panic!("expected missing column, got {other:?}"),
        }
        // Non-positive quantity, with the row number in the message.
        let f = write_temp(
            "country,sector,subsector,year,input_kind,component,price,quantity,compensation\n\
             USA,goods,i,2000,labor,a,1.0,0.0,0.0\n",
        );
        match load_panel_csv(f.path()) {
            Err(Error::InvalidRow { row, message, .. }) => {
                assert_eq!(row, 2);
                assert!(message.contains("quantity"), "{message}");
            }
            other => panic!("expected invalid row, got {other:?}"),
        }
        // Inconsistent compensation.
        let f = write_temp(
            "country,sector,subsector,year,input_kind,component,price,quantity,compensation\n\
             USA,goods,i,2000,labor,a,2.0,3.0,7.0\n",
        );
        assert!(matches!(
            load_panel_csv(f.path()),
            Err(Error::InvalidRow { .. })
        ));
        // Duplicate key.
        let f = write_temp(
            "country,sector,subsector,year,input_kind,component,price,quantity,compensation\n\
             USA,goods,i,2000,labor,a,2.0,3.0,6.0\n\
             USA,goods,i,2000,labor,a,2.0,3.0,6.0\n",
        );
        assert!(matches!(
            load_panel_csv(f.path()),
            Err(Error::DuplicateKey { row: 3, .. })
        ));
        // Unknown sector.
        let f = write_temp(
            "country,sector,subsector,year,input_kind,component,price,quantity,compensation\n\
             USA,mining,i,2000,labor,a,2.0,3.0,6.0\n",
        );
        assert!(matches!(
            load_panel_csv(f.path()),
            Err(Error::InvalidRow { .. })
        ));
    }

    #[test]
    fn markup_below_one_rejected() {
        let f = write_temp("country,year,markup\nUSA,2000,0.98\n");
        assert!(load_markup_csv(f.path()).is_err());
        let f = write_temp("country,year,markup\nUSA,2000,1.15\n");
        let m = load_markup_csv(f.path()).unwrap();
        assert_eq!(m.get(&("USA".to_string(), 2000)), Some(&1.15));
    }

    fn panel_csv_content() -> String {
        // Two years of single-component labor and energy for one pair.
        let mut s = String::from(
            "country,sector,subsector,year,input_kind,component,price,quantity,compensation\n",
        );
        for (year, wage, labor) in [(2000, 1.0, 10.0), (2001, 1.1, 10.5)] {
            s.push_str(&format!(
                "USA,goods,ind1,{year},labor,all,{wage},{labor},\n"
            ));
        }
        for (year, v, e) in [(2000, 2.0, 3.0), (2001, 2.2, 2.9)] {
            s.push_str(&format!("USA,goods,ind1,{year},energy,all,{v},{e},\n"));
        }
        s
    }

    fn capital_csv_content() -> String {
        let mut s = String::from(
            "country,sector,component,year,investment_price,capital_stock,investment,capital_compensation\n",
        );
        for (year, q, k, inv, comp) in [
            (1999, 1.0, 100.0, 10.0, 12.0),
            (2000, 1.0, 100.0, 10.0, 12.0),
            (2001, 1.0, 100.0, 10.0, 12.5),
        ] {
            s.push_str(&format!("USA,goods,all,{year},{q},{k},{inv},{comp}\n"));
        }
        s
    }

    #[test]
    fn assemble_builds_cells_with_external_rentals() {
        let panel = write_temp(&panel_csv_content());
        let capital = write_temp(&capital_csv_content());
        let rows = load_panel_csv(panel.path()).unwrap();
        let caps = load_capital_csv(capital.path()).unwrap();
        let options = AssembleOptions::default();
        let ds = assemble(&rows, &caps, None, &options).unwrap();
        assert_eq!(ds.cells.len(), 2);
        let cell = &ds.cells[0];
        assert_eq!(cell.year, 2000);
        // delta = 0.1 (single component, i=10, k constant), external rate:
        // r = 0.1 * 1 + 0.035 * 1 = 0.135.
        assert!((cell.capital_price - 0.135).abs() < 1e-12);
        assert!((cell.capital - 100.0).abs() < 1e-12);
        // y = (rk + wl + ve) * 1.
        let expect_y = 13.5 + 10.0 + 6.0;
        assert!((cell.output - expect_y).abs() < 1e-12);
    }

    #[test]
    fn assemble_requires_markup_when_supplied() {
        let panel = write_temp(&panel_csv_content());
        let capital = write_temp(&capital_csv_content());
        let rows = load_panel_csv(panel.path()).unwrap();
        let caps = load_capital_csv(capital.path()).unwrap();
        let mut markups = BTreeMap::new();
        markups.insert(("USA".to_string(), 2000), 1.2);
        // 2001 missing: hard error.
        let err = assemble(&rows, &caps, Some(&markups), &AssembleOptions::default());
        assert!(matches!(err, Err(Error::MissingData(_))));
        markups.insert(("USA".to_string(), 2001), 1.2);
        let ds = assemble(&rows, &caps, Some(&markups), &AssembleOptions::default()).unwrap();
        assert!((ds.cells[0].markup - 1.2).abs() < 1e-15);
    }

    #[test]
    fn cells_csv_round_trips_bitwise() {
        let panel = write_temp(&panel_csv_content());
        let capital = write_temp(&capital_csv_content());
        let rows = load_panel_csv(panel.path()).unwrap();
        let caps = load_capital_csv(capital.path()).unwrap();
        let ds = assemble(&rows, &caps, None, &AssembleOptions::default()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_cells_csv(&ds, out.path()).unwrap();
        let back = load_cells_csv(out.path()).unwrap();
        assert_eq!(back.cells.len(), ds.cells.len());
        for (a, b) in ds.cells.iter().zip(&back.cells) {
            assert_eq!(a, b, "cells differ after round trip");
        }
    }
}
