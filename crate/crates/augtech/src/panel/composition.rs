//! Composition adjustment of component-level inputs.
//!
//! Aggregating heterogeneous components (skill groups, energy carriers, asset
//! types) by simple sums confounds within-input composition shifts with
//! technology. The adjusted aggregates hold composition weights fixed at their
//! time means:
//!
//! * adjusted price: `p_t = Σ_j θ̄_j p̃_jt` with `θ̄_j` the time-mean quantity
//!   share of component `j`;
//! * adjusted quantity: `x_t = Σ_j (p̄_j / p̄) x̃_jt` with `p̄_j` the time-mean
//!   component price and `p̄` the cross-component mean of the `p̄_j`,
//!
//! so a shift toward higher-priced (higher-efficiency) components raises the
//! adjusted quantity rather than the residual technology.

use serde::{Deserialize, Serialize};

use super::{InputKind, RawComponentSeries, Sector};
use crate::{Error, Result};

/// A composition-adjusted input series for one (country, sector, input kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedInput {
    pub country: String,
    pub sector: Sector,
    pub input_kind: InputKind,
    pub years: Vec<i32>,
    pub prices: Vec<f64>,
    pub quantities: Vec<f64>,
    /// Years dropped because some component was missing there.
    pub dropped_years: Vec<i32>,
}

/// Sums subsector rows into sector-level component series; the component
/// price becomes the compensation-weighted unit value.
///
/// Series sharing (country, sector, input kind, component) are merged across
/// subsectors; within one series years must be unique.
pub fn aggregate_subsectors(series: &[RawComponentSeries]) -> Result<Vec<RawComponentSeries>> {
    use std::collections::BTreeMap;
    let mut grouped: BTreeMap<(String, Sector, InputKind, String), BTreeMap<i32, (f64, f64)>> =
        BTreeMap::new();
    for s in series {
        let key = (
            s.country.clone(),
            s.sector,
            s.input_kind,
            s.component.clone(),
        );
        let entry = grouped.entry(key).or_default();
        for (i, &year) in s.years.iter().enumerate() {
            let (q, c) = entry.entry(year).or_insert((0.0, 0.0));
            *q += s.quantities[i];
            *c += s.compensations[i];
        }
    }
    let mut out = Vec::new();
    for ((country, sector, input_kind, component), by_year) in grouped {
        let mut years = Vec::new();
        let mut prices = Vec::new();
        let mut quantities = Vec::new();
        let mut compensations = Vec::new();
        for (year, (q, c)) in by_year {
            if q <= 0.0 || !q.is_finite() {
                return Err(Error::Domain(format!(
                    "{country} {sector} {input_kind} {component} {year}: aggregated quantity must be positive, got {q}"
                )));
            }
            years.push(year);
            prices.push(c / q);
            quantities.push(q);
            compensations.push(c);
        }
        out.push(RawComponentSeries {
            country,
            sector,
            subsector: "ALL".into(),
            input_kind,
            component,
            years,
            prices,
            quantities,
            compensations,
        });
    }
    Ok(out)
}

/// Composition-adjusts a set of sector-level component series belonging to
/// one (country, sector, input kind).
///
/// Years where any component is missing are dropped (and recorded); the
/// fixed weights are computed over the retained years.
///
/// # Examples
///
/// ```
/// use augtech::panel::composition::adjust_composition;
/// use augtech::panel::{InputKind, RawComponentSeries, Sector};
///
/// let mk = |component: &str, price: f64| RawComponentSeries {
///     country: "USA".into(),
///     sector: Sector::Goods,
///     subsector: "ALL".into(),
///     input_kind: InputKind::Labor,
///     component: component.into(),
///     years: vec![2000, 2001],
///     prices: vec![price, price],
///     quantities: vec![1.0, 1.0],
///     compensations: vec![price, price],
/// };
/// let adj = adjust_composition(&[mk("skilled", 3.0), mk("unskilled", 1.0)]).unwrap();
/// // Equal quantities: price is the simple mean, and the efficiency-weighted
/// // quantity is (3/2 + 1/2) = 2 per year.
/// assert!((adj.prices[0] - 2.0).abs() < 1e-12);
/// assert!((adj.quantities[0] - 2.0).abs() < 1e-12);
/// ```
pub fn adjust_composition(components: &[RawComponentSeries]) -> Result<AdjustedInput> {
    let first = components.first().ok_or_else(|| {
        Error::MissingData("composition adjustment needs at least one component".into())
    })?;
    for c in components {
        if c.country != first.country || c.sector != first.sector || c.input_kind != first.input_kind
        {
            return Err(Error::Domain(format!(
                "composition adjustment mixes keys: ({}, {}, {}) vs ({}, {}, {})",
                first.country, first.sector, first.input_kind, c.country, c.sector, c.input_kind
            )));
        }
    }
    // Retained years: observed in every component.
    let mut years: Vec<i32> = first.years.clone();
    years.retain(|y| components.iter().all(|c| c.year_index(*y).is_some()));
    let mut dropped: Vec<i32> = Vec::new();
    for c in components {
        for &y in &c.years {
            if !years.contains(&y) && !dropped.contains(&y) {
                dropped.push(y);
            }
        }
    }
    dropped.sort_unstable();
    if years.is_empty() {
        return Err(Error::MissingData(format!(
            "{} {} {}: no year is observed for every component",
            first.country, first.sector, first.input_kind
        )));
    }
    let n_years = years.len();
    let n_comp = components.len();
    // Per-component positions of the retained years.
    let positions: Vec<Vec<usize>> = components
        .iter()
        .map(|c| years.iter().map(|y| c.year_index(*y).unwrap()).collect())
        .collect();
    for (c, pos) in components.iter().zip(&positions) {
        for &t in pos {
            if c.prices[t] <= 0.0 || !c.prices[t].is_finite() {
                return Err(Error::Domain(format!(
                    "{} {} {} {}: component price must be positive, got {}",
                    c.country, c.sector, c.input_kind, c.years[t], c.prices[t]
                )));
            }
            if c.quantities[t] <= 0.0 || !c.quantities[t].is_finite() {
                return Err(Error::Domain(format!(
                    "{} {} {} {}: component quantity must be positive, got {}",
                    c.country, c.sector, c.input_kind, c.years[t], c.quantities[t]
                )));
            }
        }
    }
    // Time-mean quantity shares θ̄_j.
    let mut mean_share = vec![0.0; n_comp];
    for t in 0..n_years {
        let total: f64 = (0..n_comp)
            .map(|j| components[j].quantities[positions[j][t]])
            .sum();
        for j in 0..n_comp {
            mean_share[j] += components[j].quantities[positions[j][t]] / total;
        }
    }
    for s in mean_share.iter_mut() {
        *s /= n_years as f64;
    }
    // Time-mean prices p̄_j and their cross-component mean p̄.
    let mut mean_price = vec![0.0; n_comp];
    for j in 0..n_comp {
        for t in 0..n_years {
            mean_price[j] += components[j].prices[positions[j][t]];
        }
        mean_price[j] /= n_years as f64;
    }
    let grand_mean: f64 = mean_price.iter().sum::<f64>() / n_comp as f64;
    let mut prices = Vec::with_capacity(n_years);
    let mut quantities = Vec::with_capacity(n_years);
    for t in 0..n_years {
        let p: f64 = (0..n_comp)
            .map(|j| mean_share[j] * components[j].prices[positions[j][t]])
            .sum();
        let x: f64 = (0..n_comp)
            .map(|j| mean_price[j] / grand_mean * components[j].quantities[positions[j][t]])
            .sum();
        prices.push(p);
        quantities.push(x);
    }
    Ok(AdjustedInput {
        country: first.country.clone(),
        sector: first.sector,
        input_kind: first.input_kind,
        years,
        prices,
        quantities,
        dropped_years: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn component(
        name: &str,
        years: Vec<i32>,
        prices: Vec<f64>,
        quantities: Vec<f64>,
    ) -> RawComponentSeries {
        let compensations = prices
            .iter()
            .zip(&quantities)
            .map(|(p, q)| p * q)
            .collect();
        RawComponentSeries {
            country: "USA".into(),
            sector: Sector::Goods,
            subsector: "ALL".into(),
            input_kind: InputKind::Labor,
            component: name.into(),
            years,
            prices,
            quantities,
            compensations,
        }
    }

    #[test]
    fn single_component_is_identity() {
        let c = component("all", vec![2000, 2001], vec![1.5, 1.7], vec![10.0, 11.0]);
        let adj = adjust_composition(&[c.clone()]).unwrap();
        assert_eq!(adj.years, c.years);
        for t in 0..2 {
            assert!((adj.prices[t] - c.prices[t]).abs() < 1e-15);
            assert!((adj.quantities[t] - c.quantities[t]).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_quantities_average_prices_and_weight_quantities() {
        let hi = component("skilled", vec![2000, 2001], vec![3.0, 3.0], vec![1.0, 1.0]);
        let lo = component(
            "unskilled",
            vec![2000, 2001],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
        );
        let adj = adjust_composition(&[hi, lo]).unwrap();
        assert!((adj.prices[0] - 2.0).abs() < 1e-12);
        // x = (3/2)*1 + (1/2)*1 = 2.
        assert!((adj.quantities[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn composition_shift_raises_quantity_not_price_weights() {
        // Quantities shift toward the high-price component over time; the
        // adjusted quantity grows faster than the raw sum.
        let hi = component("skilled", vec![2000, 2001], vec![3.0, 3.0], vec![1.0, 2.0]);
        let lo = component(
            "unskilled",
            vec![2000, 2001],
            vec![1.0, 1.0],
            vec![2.0, 1.0],
        );
        let adj = adjust_composition(&[hi, lo]).unwrap();
        let raw_growth = 3.0f64 / 3.0; // raw sum constant at 3
        let adj_growth = adj.quantities[1] / adj.quantities[0];
        assert!(adj_growth > raw_growth);
        // Prices: θ̄ = (1/2, 1/2) since shares swap symmetrically.
        assert!((adj.prices[0] - 2.0).abs() < 1e-12);
        assert!((adj.prices[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_all_quantities_doubles_x_and_keeps_p() {
        let a = component("a", vec![2000, 2001], vec![2.0, 2.4], vec![1.0, 1.3]);
        let b = component("b", vec![2000, 2001], vec![1.0, 0.9], vec![2.0, 2.2]);
        let base = adjust_composition(&[a.clone(), b.clone()]).unwrap();
        let double = |mut c: RawComponentSeries| {
            for q in c.quantities.iter_mut() {
                *q *= 2.0;
            }
            for v in c.compensations.iter_mut() {
                *v *= 2.0;
            }
            c
        };
        let doubled = adjust_composition(&[double(a), double(b)]).unwrap();
        for t in 0..2 {
            assert!((doubled.quantities[t] - 2.0 * base.quantities[t]).abs() < 1e-12);
            assert!((doubled.prices[t] - base.prices[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_component_years_are_dropped_and_flagged() {
        let a = component("a", vec![2000, 2001, 2002], vec![1.0; 3], vec![1.0; 3]);
        let b = component("b", vec![2000, 2002], vec![1.0; 2], vec![1.0; 2]);
        let adj = adjust_composition(&[a, b]).unwrap();
        assert_eq!(adj.years, vec![2000, 2002]);
        assert_eq!(adj.dropped_years, vec![2001]);
    }

    #[test]
    fn aggregate_subsectors_sums_and_unit_values() {
        let mut a = component("all", vec![2000], vec![2.0], vec![1.0]);
        a.subsector = "ind1".into();
        let mut b = component("all", vec![2000], vec![1.0], vec![3.0]);
        b.subsector = "ind2".into();
        let agg = aggregate_subsectors(&[a, b]).unwrap();
        assert_eq!(agg.len(), 1);
        assert!((agg[0].quantities[0] - 4.0).abs() < 1e-15);
        // Unit value: (2*1 + 1*3) / 4 = 1.25.
        assert!((agg[0].prices[0] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn mixed_keys_rejected() {
        let a = component("a", vec![2000], vec![1.0], vec![1.0]);
        let mut b = component("b", vec![2000], vec![1.0], vec![1.0]);
        b.sector = Sector::Service;
        assert!(adjust_composition(&[a, b]).is_err());
    }
}
