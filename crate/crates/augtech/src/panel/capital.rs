//! Rental prices of capital.
//!
//! Capital has no directly observed price; its per-component rental price is
//! constructed from investment prices, stocks, depreciation, and a rate of
//! return. Two approaches are supported:
//!
//! * **internal**: the rate of return clears observed capital compensation
//!   within the chosen scope, so that the implied rentals exactly exhaust
//!   capital income; and
//! * **external**: a constant real rate (3.5% by default) is imposed and
//!   asset-price capital gains are ignored.

use serde::{Deserialize, Serialize};

use super::CapitalComponentSeries;
use crate::{Error, Result};

/// Constant real rate of return for the external approach.
pub const DEFAULT_EXTERNAL_RATE: f64 = 0.035;

/// How the rate of return entering rental prices is determined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "approach", rename_all = "snake_case")]
pub enum RateApproach {
    /// Internal rate that exhausts observed capital compensation; includes
    /// asset-specific capital gains.
    Internal,
    /// Fixed real rate; capital gains are ignored.
    External { rate: f64 },
}

impl Default for RateApproach {
    fn default() -> Self {
        RateApproach::External {
            rate: DEFAULT_EXTERNAL_RATE,
        }
    }
}

/// Scope over which the internal rate of return is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateScope {
    /// One rate per (country, sector, year) — the default.
    #[default]
    CountrySector,
    /// One rate per (country, year), pooling sectors.
    Economy,
}

/// Time-averaged geometric depreciation rate of one capital component,
/// with the per-year rates it was averaged from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepreciationRate {
    pub component: String,
    /// Mean of the per-year implied rates.
    pub rate: f64,
    /// `(year, δ_jt)` for each year with `t` and `t+1` both observed.
    pub per_year: Vec<(i32, f64)>,
    /// Years with negative implied depreciation; flagged, never clamped.
    pub negative_years: Vec<i32>,
}

/// Implied depreciation rates from the stock accumulation identity
/// `k_{t+1} = (1 − δ_t) k_t + i_t`, i.e. `δ_t = (i_t − (k_{t+1} − k_t)) / k_t`,
/// averaged over all adjacent observed year pairs.
///
/// # Examples
///
/// ```
/// use augtech::panel::{capital::depreciation_rate, CapitalComponentSeries, Sector};
///
/// let series = CapitalComponentSeries {
///     country: "USA".into(),
///     sector: Sector::Goods,
///     component: "equipment".into(),
///     years: vec![2000, 2001, 2002],
///     investment_prices: vec![1.0, 1.0, 1.0],
///     stocks: vec![100.0, 100.0, 105.0],
///     investments: vec![10.0, 10.0, 10.0],
///     compensations: vec![12.0, 12.0, 12.0],
/// };
/// let d = depreciation_rate(&series).unwrap();
/// // δ_2000 = (10 − 0)/100 = 0.10, δ_2001 = (10 − 5)/100 = 0.05.
/// assert!((d.rate - 0.075).abs() < 1e-15);
/// ```
pub fn depreciation_rate(series: &CapitalComponentSeries) -> Result<DepreciationRate> {
    let mut per_year = Vec::new();
    let mut negative_years = Vec::new();
    for i in 0..series.years.len().saturating_sub(1) {
        if series.years[i + 1] != series.years[i] + 1 {
            continue; // interior gap: the pair straddling it is skipped
        }
        let k0 = series.stocks[i];
        let k1 = series.stocks[i + 1];
        let inv = series.investments[i];
        if k0 <= 0.0 || !k0.is_finite() {
            return Err(Error::Domain(format!(
                "{} {} {}: capital stock must be positive in {}",
                series.country, series.sector, series.component, series.years[i]
            )));
        }
        let delta = (inv - (k1 - k0)) / k0;
        if delta < 0.0 {
            negative_years.push(series.years[i]);
        }
        per_year.push((series.years[i], delta));
    }
    if per_year.is_empty() {
        return Err(Error::MissingData(format!(
            "{} {} {}: depreciation needs at least two consecutive years",
            series.country, series.sector, series.component
        )));
    }
    let rate = per_year.iter().map(|&(_, d)| d).sum::<f64>() / per_year.len() as f64;
    Ok(DepreciationRate {
        component: series.component.clone(),
        rate,
        per_year,
        negative_years,
    })
}

/// Internal rate of return at `year` for a group of capital components
/// (the grouping defines the scope):
///
/// `ι_t = (Σ_j comp_jt − Σ_j δ_j q_jt k_jt + Σ_j (q_jt − q_{j,t−1}) k_jt) / Σ_j q_{j,t−1} k_jt`.
///
/// Every component must be observed at `year` and `year − 1`.
pub fn internal_rate_of_return(
    group: &[&CapitalComponentSeries],
    deltas: &[f64],
    year: i32,
) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::MissingData(
            "internal rate of return needs at least one capital component".into(),
        ));
    }
    if deltas.len() != group.len() {
        return Err(Error::DimensionMismatch {
            expected: group.len(),
            got: deltas.len(),
            context: "depreciation rates per capital component".into(),
        });
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (series, &delta) in group.iter().zip(deltas) {
        let t = series.year_index(year).ok_or_else(|| {
            Error::MissingData(format!(
                "{} {} {}: no capital data in {year}",
                series.country, series.sector, series.component
            ))
        })?;
        let t_prev = series.year_index(year - 1).ok_or_else(|| {
            Error::MissingData(format!(
                "{} {} {}: internal rate needs the lagged year {}",
                series.country,
                series.sector,
                series.component,
                year - 1
            ))
        })?;
        let q = series.investment_prices[t];
        let q_prev = series.investment_prices[t_prev];
        let k = series.stocks[t];
        numerator += series.compensations[t] - delta * q * k + (q - q_prev) * k;
        denominator += q_prev * k;
    }
    if denominator <= 0.0 || !denominator.is_finite() {
        return Err(Error::Domain(format!(
            "internal rate of return in {year}: lagged capital valuation must be positive, got {denominator}"
        )));
    }
    Ok(numerator / denominator)
}

/// Rental prices of one capital component over the years where the lagged
/// investment price is observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RentalPriceSeries {
    pub country: String,
    pub sector: super::Sector,
    pub component: String,
    pub years: Vec<i32>,
    pub prices: Vec<f64>,
    /// Stocks aligned with `years`, kept for composition adjustment.
    pub stocks: Vec<f64>,
    /// Years with a non-positive rental price; flagged, never clamped.
    pub nonpositive_years: Vec<i32>,
}

/// Rental price of one component at one year.
///
/// Internal: `r_jt = δ_j q_jt + ι_t q_{j,t−1} − (q_jt − q_{j,t−1})`, which is
/// `δ_j q_jt + (ι_t − capital-gain rate) q_{j,t−1}`. External with rate `ι̃`:
/// `r_jt = δ_j q_jt + ι̃ q_{j,t−1}`.
pub fn rental_price(
    series: &CapitalComponentSeries,
    delta: f64,
    approach: RateApproach,
    internal_rate: Option<f64>,
    year: i32,
) -> Result<f64> {
    let t = series.year_index(year).ok_or_else(|| {
        Error::MissingData(format!(
            "{} {} {}: no capital data in {year}",
            series.country, series.sector, series.component
        ))
    })?;
    let t_prev = series.year_index(year - 1).ok_or_else(|| {
        Error::MissingData(format!(
            "{} {} {}: rental price needs the lagged year {}",
            series.country,
            series.sector,
            series.component,
            year - 1
        ))
    })?;
    let q = series.investment_prices[t];
    let q_prev = series.investment_prices[t_prev];
    match approach {
        RateApproach::Internal => {
            let iota = internal_rate.ok_or_else(|| {
                Error::MissingData("internal approach requires the internal rate".into())
            })?;
            Ok(delta * q + iota * q_prev - (q - q_prev))
        }
        RateApproach::External { rate } => Ok(delta * q + rate * q_prev),
    }
}

/// Builds the full rental-price series for a scope group of components under
/// the chosen approach. For the internal approach the rate of return is
/// computed per year from the same group, so the rentals exhaust observed
/// capital compensation year by year (the closure identity).
pub fn rental_prices(
    group: &[CapitalComponentSeries],
    approach: RateApproach,
) -> Result<Vec<RentalPriceSeries>> {
    let refs: Vec<&CapitalComponentSeries> = group.iter().collect();
    let deltas: Vec<f64> = group
        .iter()
        .map(|s| depreciation_rate(s).map(|d| d.rate))
        .collect::<Result<_>>()?;
    // Years usable by every component in the group (year and lag observed).
    let mut years: Vec<i32> = Vec::new();
    if let Some(first) = group.first() {
        for &year in &first.years {
            let ok = group
                .iter()
                .all(|s| s.year_index(year).is_some() && s.year_index(year - 1).is_some());
            if ok {
                years.push(year);
            }
        }
    }
    if years.is_empty() {
        return Err(Error::MissingData(format!(
            "{}: no year has current and lagged data for every capital component",
            group
                .first()
                .map(|s| format!("{} {}", s.country, s.sector))
                .unwrap_or_default()
        )));
    }
    let mut out: Vec<RentalPriceSeries> = group
        .iter()
        .map(|s| RentalPriceSeries {
            country: s.country.clone(),
            sector: s.sector,
            component: s.component.clone(),
            years: Vec::new(),
            prices: Vec::new(),
            stocks: Vec::new(),
            nonpositive_years: Vec::new(),
        })
        .collect();
    for &year in &years {
        let iota = match approach {
            RateApproach::Internal => Some(internal_rate_of_return(&refs, &deltas, year)?),
            RateApproach::External { .. } => None,
        };
        for ((series, &delta), rec) in group.iter().zip(&deltas).zip(out.iter_mut()) {
            let r = rental_price(series, delta, approach, iota, year)?;
            let t = series.year_index(year).expect("checked above");
            rec.years.push(year);
            rec.prices.push(r);
            rec.stocks.push(series.stocks[t]);
            if r <= 0.0 {
                rec.nonpositive_years.push(year);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Sector;

    fn series(
        component: &str,
        years: Vec<i32>,
        q: Vec<f64>,
        k: Vec<f64>,
        i: Vec<f64>,
        comp: Vec<f64>,
    ) -> CapitalComponentSeries {
        CapitalComponentSeries {
            country: "USA".into(),
            sector: Sector::Goods,
            component: component.into(),
            years,
            investment_prices: q,
            stocks: k,
            investments: i,
            compensations: comp,
        }
    }

    #[test]
    fn depreciation_hand_cases() {
        let s = series(
            "equipment",
            vec![2000, 2001],
            vec![1.0, 1.0],
            vec![100.0, 100.0],
            vec![10.0, 10.0],
            vec![12.0, 12.0],
        );
        let d = depreciation_rate(&s).unwrap();
        assert!((d.rate - 0.10).abs() < 1e-15);

        let s = series(
            "equipment",
            vec![2000, 2001],
            vec![1.0, 1.0],
            vec![100.0, 105.0],
            vec![10.0, 10.0],
            vec![12.0, 12.0],
        );
        assert!((depreciation_rate(&s).unwrap().rate - 0.05).abs() < 1e-15);
    }

    #[test]
    fn depreciation_needs_consecutive_years_and_flags_negatives() {
        let s = series(
            "equipment",
            vec![2000, 2002],
            vec![1.0, 1.0],
            vec![100.0, 100.0],
            vec![10.0, 10.0],
            vec![12.0, 12.0],
        );
        assert!(depreciation_rate(&s).is_err());

        // Stock grows faster than investment: negative implied depreciation.
        let s = series(
            "equipment",
            vec![2000, 2001],
            vec![1.0, 1.0],
            vec![100.0, 120.0],
            vec![10.0, 10.0],
            vec![12.0, 12.0],
        );
        let d = depreciation_rate(&s).unwrap();
        assert!(d.rate < 0.0);
        assert_eq!(d.negative_years, vec![2000]);
    }

    #[test]
    fn internal_rate_hand_case() {
        // Single component, constant q = 1, delta = 0, comp = 5, k = 100:
        // iota = 5 / 100 = 0.05.
        let s = series(
            "all",
            vec![2000, 2001],
            vec![1.0, 1.0],
            vec![100.0, 100.0],
            vec![0.0, 0.0],
            vec![5.0, 5.0],
        );
        let iota = internal_rate_of_return(&[&s], &[0.0], 2001).unwrap();
        assert!((iota - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rental_internal_offsets_capital_gains() {
        // q rises 1.0 -> 1.1 (10% gain), delta = 0.05, iota = 0.10:
        // r = 0.05*1.1 + (0.10 - 0.10)*1.0 = 0.055.
        let s = series(
            "equipment",
            vec![2000, 2001],
            vec![1.0, 1.1],
            vec![100.0, 100.0],
            vec![5.0, 5.0],
            vec![12.0, 12.0],
        );
        let r = rental_price(&s, 0.05, RateApproach::Internal, Some(0.10), 2001).unwrap();
        assert!((r - 0.055).abs() < 1e-15);
    }

    #[test]
    fn rental_external_hand_cases() {
        let s = series(
            "equipment",
            vec![2000, 2001],
            vec![1.0, 1.0],
            vec![100.0, 100.0],
            vec![10.0, 10.0],
            vec![12.0, 12.0],
        );
        let r = rental_price(&s, 0.1, RateApproach::External { rate: 0.035 }, None, 2001).unwrap();
        assert!((r - 0.135).abs() < 1e-15);

        // delta = 0, lagged price 2: r = 0.035 * 2 = 0.07.
        let s = series(
            "equipment",
            vec![2000, 2001],
            vec![2.0, 1.0],
            vec![100.0, 100.0],
            vec![10.0, 10.0],
            vec![12.0, 12.0],
        );
        let r = rental_price(&s, 0.0, RateApproach::External { rate: 0.035 }, None, 2001).unwrap();
        assert!((r - 0.07).abs() < 1e-15);

        // Zero rate override: r = delta * q_t.
        let r = rental_price(&s, 0.5, RateApproach::External { rate: 0.0 }, None, 2001).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }

    #[test]
    fn internal_rentals_exhaust_compensation() {
        // Two components with different price paths and stocks; the closure
        // identity Σ_j r_jt k_jt = Σ_j comp_jt holds by construction.
        let a = series(
            "equipment",
            vec![2000, 2001, 2002],
            vec![1.0, 1.05, 1.12],
            vec![80.0, 84.0, 90.0],
            vec![12.0, 13.0, 14.0],
            vec![9.0, 9.5, 10.0],
        );
        let b = series(
            "structure",
            vec![2000, 2001, 2002],
            vec![1.0, 0.98, 1.01],
            vec![150.0, 151.0, 153.0],
            vec![6.0, 6.5, 6.2],
            vec![11.0, 11.2, 11.5],
        );
        let rentals = rental_prices(&[a.clone(), b.clone()], RateApproach::Internal).unwrap();
        for (idx, &year) in rentals[0].years.iter().enumerate() {
            let paid: f64 = rentals
                .iter()
                .map(|r| r.prices[idx] * r.stocks[idx])
                .sum();
            let observed: f64 = [&a, &b]
                .iter()
                .map(|s| s.compensations[s.year_index(year).unwrap()])
                .sum();
            assert!(
                (paid - observed).abs() < 1e-9,
                "closure fails in {year}: {paid} vs {observed}"
            );
        }
    }

    #[test]
    fn rental_series_skips_years_without_lag() {
        let s = series(
            "equipment",
            vec![2000, 2001, 2003],
            vec![1.0, 1.0, 1.0],
            vec![100.0, 100.0, 100.0],
            vec![10.0, 10.0, 10.0],
            vec![12.0, 12.0, 12.0],
        );
        let rentals = rental_prices(
            &[s],
            RateApproach::External {
                rate: DEFAULT_EXTERNAL_RATE,
            },
        )
        .unwrap();
        // 2001 has a lag; 2000 and 2003 do not.
        assert_eq!(rentals[0].years, vec![2001]);
    }
}
