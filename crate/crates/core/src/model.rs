//! Shared domain types: dense complex matrices, the scenario
//! configuration, PA parameters and beam selections.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::error::{Error, Result};

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix storage",
                left: format!("{}x{}", rows, cols),
                right: format!("{} entries", data.len()),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Builds a matrix from `f(row, col)`. Panics if `f` yields a non-finite entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let z = f(r, c);
                assert!(
                    z.re.is_finite() && z.im.is_finite(),
                    "non-finite entry at ({}, {})",
                    r,
                    c
                );
                data.push(z);
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                context: "ragged rows",
                left: format!("{} columns", n_cols),
                right: "rows of differing length".into(),
            });
        }
        Self::new(n_rows, n_cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matmul inner dimension",
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            let out_row = &mut out[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    pub fn scale(&self, factor: f64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// `a * self + b * other`, elementwise.
    pub fn weighted_sum(&self, a: f64, other: &ComplexMatrix, b: f64) -> Result<ComplexMatrix> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                context: "elementwise sum",
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sqr(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum()
    }
}

/// Rician K-factor; `Infinite` is the pure line-of-sight limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RicianFactor {
    Finite(f64),
    Infinite,
}

impl RicianFactor {
    /// Weights `(sqrt(k/(k+1)), sqrt(1/(k+1)))` applied to the LOS and NLOS parts.
    pub fn weights(self) -> (f64, f64) {
        match self {
            RicianFactor::Finite(k) => ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt()),
            RicianFactor::Infinite => (1.0, 0.0),
        }
    }

    pub fn is_valid(self) -> bool {
        match self {
            RicianFactor::Finite(k) => k.is_finite() && k >= 0.0,
            RicianFactor::Infinite => true,
        }
    }
}

impl fmt::Display for RicianFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RicianFactor::Finite(k) => write!(f, "{}", k),
            RicianFactor::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for RicianFactor {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" => Ok(RicianFactor::Infinite),
            other => other
                .parse::<f64>()
                .map_err(|e| e.to_string())
                .and_then(|k| {
                    if k.is_infinite() && k > 0.0 {
                        Ok(RicianFactor::Infinite)
                    } else {
                        Ok(RicianFactor::Finite(k))
                    }
                }),
        }
    }
}

/// Off-diagonal constant used for the deterministic LOS matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LosFormula {
    /// Off-diagonal amplitude chosen so the average per-entry power is one.
    #[default]
    Normalized,
    /// `sqrt((MN - min(M,N) beta^2) / min(M,N))`, kept for comparison.
    Verbatim,
}

impl fmt::Display for LosFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LosFormula::Normalized => "normalized",
            LosFormula::Verbatim => "verbatim",
        })
    }
}

impl FromStr for LosFormula {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "normalized" => Ok(LosFormula::Normalized),
            "verbatim" => Ok(LosFormula::Verbatim),
            other => Err(format!("expected `normalized` or `verbatim`, got `{}`", other)),
        }
    }
}

/// Power-amplifier efficiency parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaParams {
    /// Power efficiency, in (0, 1].
    pub epsilon: f64,
    /// PA-class exponent, in [0, 1].
    pub mu: f64,
    /// Maximum output power in dB; `f64::INFINITY` for an unbounded PA.
    pub rho_max_db: f64,
}

impl PaParams {
    pub const IDEAL: PaParams = PaParams {
        epsilon: 1.0,
        mu: 0.0,
        rho_max_db: f64::INFINITY,
    };

    pub fn is_ideal(&self) -> bool {
        self.epsilon == 1.0 && self.mu == 0.0 && self.rho_max_db == f64::INFINITY
    }

    pub fn rho_max_linear(&self) -> f64 {
        db_to_linear(self.rho_max_db)
    }
}

impl Default for PaParams {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// `10^(x/10)`; `+inf` maps to `+inf`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Every scenario scalar of one simulation point.
///
/// Field names follow their role; the config-file keys (`M`, `N`, `N_vec`,
/// `P_dB`, ...) are listed in [`crate::config`].
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas (M).
    pub antennas: usize,
    /// Single-antenna users (N).
    pub users: usize,
    /// DFT codebook columns (N_vec).
    pub codebook_size: usize,
    pub rician_k: RicianFactor,
    /// Diagonal LOS amplitude.
    pub los_beta: f64,
    pub los_formula: LosFormula,
    /// Total (consumed) power budget in dB, noise-normalised.
    pub power_db: f64,
    /// Relative delay cost per GA iteration.
    pub alpha: f64,
    /// GA iteration budget (N_it).
    pub max_iterations: usize,
    /// GA population size (L).
    pub population: usize,
    /// Mutants generated around the Queen each iteration (S).
    pub mutants: usize,
    pub mutation_fraction: f64,
    /// Outage SINR threshold in dB.
    pub theta_db: f64,
    pub pa: PaParams,
    pub realizations: usize,
    pub seed: u64,
}

impl SystemConfig {
    /// Defaults for every optional key, with the given dimensions.
    pub fn with_dimensions(antennas: usize, users: usize, codebook_size: usize) -> Self {
        Self {
            antennas,
            users,
            codebook_size,
            rician_k: RicianFactor::Finite(0.0),
            los_beta: 0.2,
            los_formula: LosFormula::Normalized,
            power_db: 10.0,
            alpha: 0.001,
            max_iterations: 500,
            population: 10,
            mutants: 5,
            mutation_fraction: 0.10,
            theta_db: 0.0,
            pa: PaParams::IDEAL,
            realizations: 500,
            seed: 1,
        }
    }

    /// Consumed power budget in linear scale.
    pub fn power_linear(&self) -> f64 {
        db_to_linear(self.power_db)
    }

    pub fn theta_linear(&self) -> f64 {
        db_to_linear(self.theta_db)
    }

    /// Number of positions a mutation rewrites: `max(1, ceil(fraction * N))`.
    pub fn mutation_count(&self) -> usize {
        // The small offset keeps products like 0.1 * 30 = 3.0000000000000004 at 3.
        let raw = (self.mutation_fraction * self.users as f64 - 1e-9).ceil();
        (raw.max(1.0) as usize).min(self.users.max(1))
    }

    pub fn immigrants(&self) -> usize {
        self.population.saturating_sub(self.mutants + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let v = validate_config(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// One violated constraint of a [`SystemConfig`].
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("dimensions must be positive (M={antennas}, N={users}, N_vec={codebook_size})")]
    ZeroDimension {
        antennas: usize,
        users: usize,
        codebook_size: usize,
    },
    #[error("N ≤ M violated (N={users}, M={antennas})")]
    UsersExceedAntennas { users: usize, antennas: usize },
    #[error("M ≤ N_vec violated (M={antennas}, N_vec={codebook_size})")]
    AntennasExceedCodebook { antennas: usize, codebook_size: usize },
    #[error("N ≤ N_vec violated (N={users}, N_vec={codebook_size})")]
    UsersExceedCodebook { users: usize, codebook_size: usize },
    #[error("αN_it < 1 violated (α={alpha}, N_it={max_iterations}, product {product})")]
    DelayBudget {
        alpha: f64,
        max_iterations: usize,
        product: f64,
    },
    #[error("alpha must be finite and non-negative (alpha={0})")]
    NegativeAlpha(f64),
    #[error("N_it ≥ 1 violated")]
    NoIterations,
    #[error("S + 1 < L violated (S={mutants}, L={population})")]
    Population { mutants: usize, population: usize },
    #[error("0 < mutation_fraction ≤ 1 violated (mutation_fraction={0})")]
    MutationFraction(f64),
    #[error("k must be non-negative or inf (k={0})")]
    RicianFactor(String),
    #[error("beta must satisfy 0 ≤ beta and 2·beta² ≤ 1 (beta={0})")]
    Beta(f64),
    #[error("epsilon ∈ (0,1] violated (epsilon={0})")]
    Epsilon(f64),
    #[error("mu ∈ [0,1] violated (mu={0})")]
    Mu(f64),
    #[error("rho_max_dB must be a number or inf (rho_max_dB={0})")]
    RhoMax(f64),
    #[error("{key} must be finite (got {value})")]
    NonFinite { key: &'static str, value: f64 },
    #[error("realizations ≥ 1 violated")]
    NoRealizations,
}

/// Returns every violated constraint; an empty list means the config is usable.
pub fn validate_config(cfg: &SystemConfig) -> Vec<ConfigViolation> {
    use ConfigViolation as V;
    let mut out = Vec::new();

    if cfg.antennas == 0 || cfg.users == 0 || cfg.codebook_size == 0 {
        out.push(V::ZeroDimension {
            antennas: cfg.antennas,
            users: cfg.users,
            codebook_size: cfg.codebook_size,
        });
    }
    if cfg.users > cfg.antennas {
        out.push(V::UsersExceedAntennas {
            users: cfg.users,
            antennas: cfg.antennas,
        });
    }
    if cfg.antennas > cfg.codebook_size {
        out.push(V::AntennasExceedCodebook {
            antennas: cfg.antennas,
            codebook_size: cfg.codebook_size,
        });
    }
    if cfg.users > cfg.codebook_size {
        out.push(V::UsersExceedCodebook {
            users: cfg.users,
            codebook_size: cfg.codebook_size,
        });
    }
    if !cfg.alpha.is_finite() || cfg.alpha < 0.0 {
        out.push(V::NegativeAlpha(cfg.alpha));
    } else {
        let product = cfg.alpha * cfg.max_iterations as f64;
        if product >= 1.0 {
            out.push(V::DelayBudget {
                alpha: cfg.alpha,
                max_iterations: cfg.max_iterations,
                product,
            });
        }
    }
    if cfg.max_iterations == 0 {
        out.push(V::NoIterations);
    }
    if cfg.mutants + 1 >= cfg.population {
        out.push(V::Population {
            mutants: cfg.mutants,
            population: cfg.population,
        });
    }
    if !(cfg.mutation_fraction > 0.0 && cfg.mutation_fraction <= 1.0) {
        out.push(V::MutationFraction(cfg.mutation_fraction));
    }
    if !cfg.rician_k.is_valid() {
        out.push(V::RicianFactor(cfg.rician_k.to_string()));
    }
    let beta_ok = match cfg.los_formula {
        LosFormula::Normalized => cfg.los_beta >= 0.0 && 2.0 * cfg.los_beta * cfg.los_beta <= 1.0,
        LosFormula::Verbatim => cfg.los_beta >= 0.0 && cfg.los_beta.is_finite(),
    };
    if !beta_ok {
        out.push(V::Beta(cfg.los_beta));
    }
    if !(cfg.pa.epsilon > 0.0 && cfg.pa.epsilon <= 1.0) {
        out.push(V::Epsilon(cfg.pa.epsilon));
    }
    if !(cfg.pa.mu >= 0.0 && cfg.pa.mu <= 1.0) {
        out.push(V::Mu(cfg.pa.mu));
    }
    if cfg.pa.rho_max_db.is_nan() || cfg.pa.rho_max_db == f64::NEG_INFINITY {
        out.push(V::RhoMax(cfg.pa.rho_max_db));
    }
    if !cfg.power_db.is_finite() {
        out.push(V::NonFinite {
            key: "P_dB",
            value: cfg.power_db,
        });
    }
    if !cfg.theta_db.is_finite() {
        out.push(V::NonFinite {
            key: "theta_dB",
            value: cfg.theta_db,
        });
    }
    if cfg.realizations == 0 {
        out.push(V::NoRealizations);
    }
    out
}

/// Ordered, distinct codebook column indices; position `i` is user `i`'s beam.
///
/// Indices are 1-based (`1..=N_vec`), matching how selections are reported.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeamSelection {
    indices: Vec<usize>,
}

impl BeamSelection {
    pub fn new(indices: Vec<usize>, codebook_size: usize) -> Result<Self> {
        let mut seen = vec![false; codebook_size];
        for &index in &indices {
            if index == 0 || index > codebook_size {
                return Err(Error::IndexOutOfRange {
                    index,
                    codebook_size,
                });
            }
            if std::mem::replace(&mut seen[index - 1], true) {
                return Err(Error::DuplicateIndex { index });
            }
        }
        Ok(Self { indices })
    }

    /// Caller guarantees the invariants; checked in debug builds only.
    pub(crate) fn from_raw(indices: Vec<usize>) -> Self {
        debug_assert!({
            let mut s = indices.clone();
            s.sort_unstable();
            s.dedup();
            s.len() == indices.len() && s.first().is_none_or(|&i| i >= 1)
        });
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Zero-based codebook column for user `i`.
    #[inline]
    pub fn column(&self, user: usize) -> usize {
        self.indices[user] - 1
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    /// Checks length and index range against a configuration.
    pub fn check_against(&self, cfg: &SystemConfig) -> Result<()> {
        if self.len() != cfg.users {
            return Err(Error::SelectionLength {
                got: self.len(),
                expected: cfg.users,
            });
        }
        BeamSelection::new(self.indices.clone(), cfg.codebook_size).map(|_| ())
    }
}

impl fmt::Display for BeamSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}
