//! Experiment configuration: schema, parsing, and cross-field checks.

use std::path::PathBuf;

use anderson_lab::geometry::{hausdorff_distance, ParticleRectangle, RealCenter};
use anderson_lab::model::{DensitySpec, Interaction, ModelParams};
use anderson_lab::resolvent::{MsaMode, QualityKind};
use anderson_lab::stochastic::{validate_exponent_chain, ExponentTuple};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub experiment: ExperimentSpec,
}

/// Model section shared by all experiment kinds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub d: usize,
    pub r0: f64,
    pub lambda: f64,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default = "default_amplitude")]
    pub interaction_amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_table: Option<Vec<(Vec<i64>, f64)>>,
    /// Constant diagonal shift (0 keeps the graph-Laplacian convention).
    #[serde(default)]
    pub diagonal_shift: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn to_params(&self) -> anderson_lab::Result<ModelParams> {
        ModelParams::new(
            self.n,
            self.d,
            self.r0,
            Interaction {
                amplitude: self.interaction_amplitude,
                table: self.interaction_table.clone(),
            },
            self.lambda,
            self.density,
        )
        .map(|p| p.with_diagonal_shift(self.diagonal_shift))
    }
}

/// Which experiment to run and its parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// Mean eigenvalue count in an interval against the volume bound.
    Wegner {
        center: Vec<f64>,
        sides: Vec<f64>,
        interval: (f64, f64),
        samples: u64,
    },
    /// Probability that a box fails a quality predicate at one energy.
    BoxQuality {
        center: Vec<f64>,
        side: f64,
        energy: f64,
        quality: QualityKind,
        samples: u64,
    },
    /// Spectral-distance probability for two rectangles in one field,
    /// against the two-box volume bound.
    TwoBox {
        center1: Vec<f64>,
        sides1: Vec<f64>,
        center2: Vec<f64>,
        sides2: Vec<f64>,
        epsilon: f64,
        samples: u64,
    },
    /// Joint nonregularity on an energy grid for two distant boxes.
    IntervalEvent {
        center1: Vec<f64>,
        center2: Vec<f64>,
        side: f64,
        mass: f64,
        interval: (f64, f64),
        #[serde(default = "default_grid_points")]
        grid_points: usize,
        samples: u64,
    },
    /// Scale-step hypotheses and conclusion on sampled parents.
    MsaCheck {
        center: Vec<f64>,
        l: f64,
        ell: f64,
        energy: f64,
        j_budget: usize,
        mode: MsaMode,
        samples: u64,
    },
    /// Scale recursions; no sampling.
    Recursion {
        variant: RecursionVariant,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chain: Option<ExponentTuple>,
    },
    /// Decay profiles, kernel medians, and eigenfunction-correlation
    /// ratios at one geometry.
    Localization {
        center: Vec<f64>,
        side: f64,
        samples: u64,
        /// Hausdorff distances at which kernel medians are reported.
        #[serde(default = "default_kernel_distances")]
        kernel_distances: Vec<f64>,
        /// Emit per-eigenvector CSV rows for this many leading samples.
        #[serde(default = "default_profile_csv_samples")]
        profile_csv_samples: u64,
    },
    /// Covering and bad-region invariants over a geometry grid.
    CoverSelftest {
        /// Inclusive range of scales ell.
        ell_range: (u32, u32),
        /// Inclusive range of ratios L/ell.
        ratio_range: (u32, u32),
        /// Random bad-center sets checked against the postconditions.
        bad_region_trials: u64,
    },
}

fn default_grid_points() -> usize {
    101
}

fn default_kernel_distances() -> Vec<f64> {
    vec![2.0, 6.0]
}

fn default_profile_csv_samples() -> u64 {
    4
}

/// Recursion engines exposed by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecursionVariant {
    Msa1 {
        p0: f64,
        y: f64,
        p: f64,
        #[serde(default = "default_j")]
        j: u64,
        l0: f64,
    },
    Msa2 {
        l0: f64,
        m0: f64,
        gamma: f64,
        kappa: f64,
        p: f64,
    },
    Msa3 {
        p0: f64,
        y: f64,
        zeta0: f64,
        zeta1: f64,
        l0: f64,
    },
}

fn default_j() -> u64 {
    1
}

/// Validation output: hard errors stop a run; warnings do not.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

fn center(n: usize, d: usize, coords: &[f64], what: &str, out: &mut Vec<String>) -> Option<RealCenter> {
    match RealCenter::new(n, d, coords.to_vec()) {
        Ok(c) => Some(c),
        Err(e) => {
            out.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Full cross-field constraint report for a parsed configuration.
pub fn validate(config: &ExperimentConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    if config.schema_version != SCHEMA_VERSION {
        report.errors.push(format!(
            "schema_version {} unsupported; this binary expects {}",
            config.schema_version, SCHEMA_VERSION
        ));
    }
    let m = &config.model;
    if m.n == 0 || m.d == 0 {
        report.errors.push("model requires n >= 1 and d >= 1".into());
    }
    if m.lambda < 0.0 {
        report.errors.push("lambda must be >= 0".into());
    }
    if let Err(e) = m.to_params() {
        report.errors.push(format!("model: {e}"));
    }
    let nf = m.n as f64;

    match &config.experiment {
        ExperimentSpec::Wegner {
            center: c,
            sides,
            interval,
            samples,
        } => {
            if let Some(ctr) = center(m.n, m.d, c, "wegner center", &mut report.errors) {
                if let Err(e) = ParticleRectangle::new(ctr, sides.clone()) {
                    report.errors.push(format!("wegner rectangle: {e}"));
                }
            }
            if interval.0 > interval.1 {
                report.errors.push("wegner interval is empty".into());
            }
            if *samples == 0 {
                report.errors.push("wegner needs samples >= 1".into());
            }
        }
        ExperimentSpec::BoxQuality {
            center: c,
            side,
            samples,
            ..
        } => {
            center(m.n, m.d, c, "box center", &mut report.errors);
            if *side < 1.0 {
                report.errors.push("box side must be >= 1".into());
            }
            if *samples < 100 {
                report
                    .errors
                    .push("box-quality needs samples >= 100".into());
            }
        }
        ExperimentSpec::TwoBox {
            center1,
            sides1,
            center2,
            sides2,
            epsilon,
            samples,
        } => {
            let r1 = center(m.n, m.d, center1, "first center", &mut report.errors)
                .and_then(|c| ParticleRectangle::new(c, sides1.clone()).ok());
            let r2 = center(m.n, m.d, center2, "second center", &mut report.errors)
                .and_then(|c| ParticleRectangle::new(c, sides2.clone()).ok());
            if let (Some(r1), Some(r2)) = (r1, r2) {
                if !r1.partially_separated(&r2) {
                    report.errors.push(
                        "two-box rectangles are not partially separated; the bound does not apply"
                            .into(),
                    );
                }
            }
            if *epsilon < 0.0 {
                report.errors.push("epsilon must be >= 0".into());
            }
            if *samples == 0 {
                report.errors.push("two-box needs samples >= 1".into());
            }
        }
        ExperimentSpec::IntervalEvent {
            center1,
            center2,
            side,
            interval,
            samples,
            ..
        } => {
            let c1 = center(m.n, m.d, center1, "first center", &mut report.errors);
            let c2 = center(m.n, m.d, center2, "second center", &mut report.errors);
            if let (Some(c1), Some(c2)) = (c1, c2) {
                match hausdorff_distance(&c1, &c2) {
                    Ok(dh) if dh < *side => report.errors.push(format!(
                        "interval-event requires d_H(x, y) >= L: {dh} < {side}"
                    )),
                    Err(e) => report.errors.push(format!("centers: {e}")),
                    _ => {}
                }
            }
            if interval.0 > interval.1 {
                report.errors.push("interval is empty".into());
            }
            if *samples == 0 {
                report.errors.push("interval-event needs samples >= 1".into());
            }
        }
        ExperimentSpec::MsaCheck { l, ell, samples, .. } => {
            if *ell > *l / 6.0 {
                report.errors.push(format!(
                    "cover requires ell <= L/6: ell = {ell}, L/6 = {}",
                    l / 6.0
                ));
            }
            if anderson_lab::geometry::suitable_cover(
                *l,
                *ell,
                &RealCenter::new(m.n, m.d, vec![0.0; m.n * m.d]).unwrap(),
            )
            .is_err()
            {
                report.errors.push(format!(
                    "no valid alpha: [3/5,4/5] misses {{(L-ell)/(2 ell k)}} for L={l}, ell={ell}"
                ));
            }
            if *samples == 0 {
                report.errors.push("msa-check needs samples >= 1".into());
            }
        }
        ExperimentSpec::Recursion { variant, chain } => {
            match variant {
                RecursionVariant::Msa1 { p0, y, j, .. } => {
                    let y_min = 4000.0 * *j as f64 * nf.powi(m.n as i32 + 1);
                    if *y < y_min {
                        report.warnings.push(format!(
                            "Y = {y} below the threshold Y >= 4000*J*N^(N+1) = {y_min}; iteration runs outside the guaranteed regime"
                        ));
                    }
                    let cap = 0.5 * (2.0 * y).powi(-((m.n * m.d) as i32));
                    if !(*p0 < cap) {
                        report.warnings.push(format!(
                            "p0 = {p0} not below (2Y)^(-Nd)/2 = {cap:.3e}; finiteness is not guaranteed"
                        ));
                    }
                }
                RecursionVariant::Msa2 { gamma, p, .. } => {
                    let cap = 1.0 + p / (p + 2.0 * (m.n * m.d) as f64);
                    if !(*gamma > 1.0 && *gamma < cap) {
                        report.warnings.push(format!(
                            "gamma = {gamma} outside (1, 1 + p/(p+2Nd)) = (1, {cap})"
                        ));
                    }
                }
                RecursionVariant::Msa3 { y, zeta0, zeta1, .. } => {
                    let y_min = (3800.0 * nf.powi(m.n as i32 + 1)).powf(1.0 / (1.0 - zeta0));
                    if *y < y_min {
                        report.warnings.push(format!(
                            "Y = {y} below (3800 N^(N+1))^(1/(1-zeta0)) = {y_min:.3e}"
                        ));
                    }
                    if !(zeta1 < zeta0) {
                        report
                            .errors
                            .push(format!("need zeta1 < zeta0, got {zeta1} >= {zeta0}"));
                    }
                }
            }
            if let Some(t) = chain {
                for violation in validate_exponent_chain(t, m.n, m.d) {
                    report
                        .warnings
                        .push(format!("exponent chain: {}", violation.constraint));
                }
            }
        }
        ExperimentSpec::Localization {
            center: c,
            side,
            samples,
            ..
        } => {
            center(m.n, m.d, c, "localization center", &mut report.errors);
            if *side < 2.0 {
                report
                    .errors
                    .push("localization needs side >= 2 for distance bins".into());
            }
            if *samples == 0 {
                report.errors.push("localization needs samples >= 1".into());
            }
        }
        ExperimentSpec::CoverSelftest {
            ell_range,
            ratio_range,
            ..
        } => {
            if ell_range.0 == 0 || ell_range.0 > ell_range.1 {
                report.errors.push("empty ell range".into());
            }
            if ratio_range.0 < 6 {
                report
                    .errors
                    .push("cover ratios below 6 violate ell <= L/6".into());
            }
            if ratio_range.0 > ratio_range.1 {
                report.errors.push("empty ratio range".into());
            }
        }
    }
    report
}

/// Parse a configuration file, separating IO/schema errors.
pub fn load(path: &std::path::Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("schema violation: {e}"))
}

/// A machine-readable description of the accepted schema.
pub fn schema_description() -> serde_json::Value {
    serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "config": {
            "schema_version": "u32, must equal the supported version",
            "seed": "u64 master seed; sample k draws from stream (seed, k)",
            "output_dir": "optional path; the run command's --out overrides it",
            "model": {
                "n": "particle count >= 1",
                "d": "spatial dimension >= 1",
                "r0": "interaction range (sup-norm)",
                "lambda": "disorder strength >= 0",
                "density": "uniform01 | uniform_sym | triangular",
                "interaction_amplitude": "u0 for the default step interaction",
                "interaction_table": "optional [(offset in Z^d, value)] even table"
            },
            "experiment": {
                "kind": [
                    "wegner", "box-quality", "two-box", "interval-event",
                    "msa-check", "recursion", "localization", "cover-selftest"
                ]
            }
        },
        "outputs": ["summary.json", "records.jsonl", "*.csv", "manifest.json"]
    })
}
