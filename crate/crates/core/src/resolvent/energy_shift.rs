//! Stability of goodness under small energy shifts.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::FiniteVolumeOperator;
use crate::resolvent::classify::{classify_with_spectrum, QualityKind};
use crate::Result;

/// Report of one energy-shift lemma instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyShiftReport {
    pub e0: f64,
    pub mass: f64,
    pub beta: f64,
    /// `(m, E0)`-regular held.
    pub regular_at_e0: bool,
    /// `dist(σ, E0) >= exp(-L^beta)` held.
    pub resolvent_bounded: bool,
    pub hypotheses_hold: bool,
    /// Shift radius `η = exp(-mL - 2L^β)/2`.
    pub eta: f64,
    /// Target mass `m - 100 ln(2)/L` for the shifted energies.
    pub shifted_mass: f64,
    /// Grid energies and per-energy goodness; `None` when hypotheses fail.
    pub grid: Option<Vec<(f64, bool)>>,
    pub all_good: Option<bool>,
}

/// Shift radius `η = exp(-mL - 2L^β)/2`.
pub fn shift_radius(m: f64, l: f64, beta: f64) -> f64 {
    0.5 * (-m * l - 2.0 * l.powf(beta)).exp()
}

/// Check that a `(m, E0)`-regular box with a subexponential resolvent
/// bound stays good on a 21-point grid across `(E0 - η, E0 + η)`.
///
/// This is a theorem instance: when the hypotheses hold the grid verdicts
/// must all be true.
pub fn energy_shift_check(
    op: &FiniteVolumeOperator,
    e0: f64,
    m: f64,
    beta: f64,
) -> Result<EnergyShiftReport> {
    let l = op
        .rect()
        .cube_side()
        .ok_or_else(|| Error::Contract("energy-shift check needs a cubic box".into()))?;
    let spec = op.spectrum(false)?;
    let regular_at_e0 =
        classify_with_spectrum(op, &spec, e0, QualityKind::Regular { m })?.verdict;
    let resolvent_bounded = spec.dist(e0) >= (-l.powf(beta)).exp();
    let hypotheses_hold = regular_at_e0 && resolvent_bounded;
    let eta = shift_radius(m, l, beta);
    let shifted_mass = m - 100.0 * std::f64::consts::LN_2 / l;

    if !hypotheses_hold {
        return Ok(EnergyShiftReport {
            e0,
            mass: m,
            beta,
            regular_at_e0,
            resolvent_bounded,
            hypotheses_hold,
            eta,
            shifted_mass,
            grid: None,
            all_good: None,
        });
    }

    let mut grid = Vec::with_capacity(21);
    for i in 0..21 {
        let e = e0 + eta * (i as f64 - 10.0) / 10.0;
        let nonresonant =
            !classify_with_spectrum(op, &spec, e, QualityKind::Resonant { beta })?.verdict;
        let regular = classify_with_spectrum(
            op,
            &spec,
            e,
            QualityKind::Regular { m: shifted_mass },
        )?
        .verdict;
        grid.push((e, nonresonant && regular));
    }
    let all_good = grid.iter().all(|&(_, good)| good);
    Ok(EnergyShiftReport {
        e0,
        mass: m,
        beta,
        regular_at_e0,
        resolvent_bounded,
        hypotheses_hold,
        eta,
        shifted_mass,
        grid: Some(grid),
        all_good: Some(all_good),
    })
}
