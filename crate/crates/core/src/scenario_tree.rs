//! Wind-forecast-error scenario trees.
//!
//! The tree has a common root (zero error at the first stage), branches once
//! into one child per quantile level, and then each branch evolves
//! deterministically through the AR(1) persistence coefficient.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical quantile levels, stored ascending.
pub const DEFAULT_QUANTILES: [f64; 5] = [0.01, 0.1, 0.5, 0.9, 0.99];

/// Branch probabilities used by default for [`DEFAULT_QUANTILES`].
pub const DEFAULT_PROBABILITIES: [f64; 5] = [0.05556, 0.24444, 0.4, 0.24444, 0.05556];

pub const DEFAULT_PHI: f64 = 1.2;
pub const DEFAULT_EPS_C: f64 = 0.14;

/// Strictly increasing probability levels in (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantileSet(Vec<f64>);

impl QuantileSet {
    /// A single level is accepted so that degenerate one-branch trees can be
    /// expressed; callers that need real branching should use two or more.
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain("quantile set is empty"));
        }
        for &q in &levels {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::domain(format!("quantile level {q} is outside (0, 1)")));
            }
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("quantile levels must be strictly increasing"));
        }
        Ok(Self(levels))
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when `q_i + q_{N+1-i} = 1` for every level.
    pub fn is_symmetric(&self) -> bool {
        let n = self.0.len();
        (0..n).all(|i| (self.0[i] + self.0[n - 1 - i] - 1.0).abs() < 1e-12)
    }

    pub fn is_canonical(&self) -> bool {
        self.0 == DEFAULT_QUANTILES
    }
}

impl Default for QuantileSet {
    fn default() -> Self {
        Self(DEFAULT_QUANTILES.to_vec())
    }
}

impl TryFrom<Vec<f64>> for QuantileSet {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuantileSet> for Vec<f64> {
    fn from(q: QuantileSet) -> Self {
        q.0
    }
}

/// AR(1) persistence and error-scaling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArParams {
    pub phi: f64,
    pub eps_c: f64,
}

impl ArParams {
    pub fn new(phi: f64, eps_c: f64) -> Result<Self> {
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::domain(format!("phi must be positive, got {phi}")));
        }
        if !(eps_c >= 0.0) || !eps_c.is_finite() {
            return Err(Error::domain(format!("eps_c must be non-negative, got {eps_c}")));
        }
        Ok(Self { phi, eps_c })
    }
}

impl Default for ArParams {
    fn default() -> Self {
        Self { phi: DEFAULT_PHI, eps_c: DEFAULT_EPS_C }
    }
}

/// Tolerance on the probability sum accepted by [`ProbabilityVector::new`].
pub const PROB_SUM_TOL: f64 = 1e-6;

/// Non-negative branch probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Accepts vectors whose sum is within [`PROB_SUM_TOL`] of one and stores
    /// them unchanged.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::domain("probability vector is empty"));
        }
        if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::domain(format!("probability entry {bad} is negative or not finite")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::domain(format!("probabilities sum to {sum}, expected 1")));
        }
        Ok(Self(p))
    }

    /// Like [`ProbabilityVector::new`] but divides through by the sum.
    pub fn normalized(p: Vec<f64>) -> Result<Self> {
        let v = Self::new(p)?;
        let sum: f64 = v.0.iter().sum();
        Ok(Self(v.0.into_iter().map(|x| x / sum).collect()))
    }

    /// Wraps a vector the caller has already checked.
    pub(crate) fn from_checked(p: Vec<f64>) -> Self {
        debug_assert!(p.iter().all(|x| *x >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() <= PROB_SUM_TOL);
        Self(p)
    }

    /// All mass on branch `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut p = vec![0.0; len];
        p[index] = 1.0;
        Self(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// The configured default for a quantile set: the fixed five-branch
    /// vector for the canonical levels, the midpoint rule otherwise.
    pub fn default_for(quantiles: &QuantileSet) -> Self {
        if quantiles.is_canonical() {
            Self(DEFAULT_PROBABILITIES.to_vec())
        } else {
            branch_probabilities(quantiles)
        }
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}

impl fmt::Display for ProbabilityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

/// Quantile function of Normal(mu, sigma).
///
/// Wichura's AS241 (PPND16) rational approximations, accurate to about
/// 1e-16 relative on the standard normal.
pub fn inverse_normal_cdf(q: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("probability level {q} is outside (0, 1)")));
    }
    if !(sigma >= 0.0) {
        return Err(Error::domain(format!("standard deviation {sigma} is negative")));
    }
    if sigma == 0.0 {
        return Ok(mu);
    }
    Ok(mu + sigma * ppnd16(q))
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_546,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.043_131_055_804_065_5e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Midpoint-interval probabilities: each level owns the interval between the
/// midpoints to its neighbours, with the outermost intervals running to 0 and 1.
pub fn branch_probabilities(quantiles: &QuantileSet) -> ProbabilityVector {
    let q = quantiles.levels();
    let n = q.len();
    if n == 1 {
        return ProbabilityVector(vec![1.0]);
    }
    let bounds: Vec<f64> = q.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut p = Vec::with_capacity(n);
    p.push(bounds[0]);
    for w in bounds.windows(2) {
        p.push(w[1] - w[0]);
    }
    p.push(1.0 - bounds[n - 2]);
    // The telescoping sum is exact up to rounding in the last entry.
    let sum: f64 = p.iter().sum();
    p[n - 1] += 1.0 - sum;
    ProbabilityVector(p)
}

/// Per-branch, per-stage wind forecast errors with branch probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTree {
    quantiles: QuantileSet,
    params: ArParams,
    stages: usize,
    /// 1-based stage at which the tree branches.
    branch_stage: usize,
    /// `errors[n][k]`, `k` 0-based.
    errors: Vec<Vec<f64>>,
    probabilities: ProbabilityVector,
}

/// Builds the error tree, branching at stage 2.
///
/// Stage 1 carries zero error, stage 2 injects `eps_c * z(q_n)` and every
/// later stage multiplies the previous error by `phi`.
pub fn build_error_tree(quantiles: &QuantileSet, params: ArParams, stages: usize) -> Result<ScenarioTree> {
    if stages < 1 {
        return Err(Error::domain("scenario tree needs at least one stage"));
    }
    let branch_stage = 2;
    let mut errors = Vec::with_capacity(quantiles.len());
    for &q in quantiles.levels() {
        let shock = params.eps_c * inverse_normal_cdf(q, 0.0, 1.0)?;
        let mut row = vec![0.0; stages];
        for k in 1..stages {
            let carried = params.phi * row[k - 1];
            row[k] = if k + 1 == branch_stage { carried + shock } else { carried };
        }
        errors.push(row);
    }
    Ok(ScenarioTree {
        quantiles: quantiles.clone(),
        params,
        stages,
        branch_stage,
        errors,
        probabilities: ProbabilityVector::default_for(quantiles),
    })
}

/// How tree errors turn a point forecast into scenario wind power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    /// `forecast * (1 + error)`
    #[default]
    PerUnit,
    /// `forecast + error * wind_cap`
    AbsoluteGw,
}

impl ScenarioTree {
    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn branches(&self) -> usize {
        self.errors.len()
    }

    pub fn branch_stage(&self) -> usize {
        self.branch_stage
    }

    pub fn quantiles(&self) -> &QuantileSet {
        &self.quantiles
    }

    pub fn params(&self) -> ArParams {
        self.params
    }

    /// Error of branch `n` at 0-based stage `k`.
    pub fn error(&self, n: usize, k: usize) -> f64 {
        self.errors[n][k]
    }

    pub fn errors(&self) -> &[Vec<f64>] {
        &self.errors
    }

    pub fn probabilities(&self) -> &ProbabilityVector {
        &self.probabilities
    }

    pub fn with_probabilities(mut self, probabilities: ProbabilityVector) -> Result<Self> {
        if probabilities.len() != self.branches() {
            return Err(Error::domain(format!(
                "{} probabilities supplied for {} branches",
                probabilities.len(),
                self.branches()
            )));
        }
        self.probabilities = probabilities;
        Ok(self)
    }

    /// Scenario wind power `[branch][stage]` in GW, clamped to `[0, wind_cap]`.
    pub fn apply_errors(&self, forecast: &[f64], wind_cap: f64, mode: ErrorMode) -> Result<Vec<Vec<f64>>> {
        if forecast.len() != self.stages {
            return Err(Error::domain(format!(
                "forecast has {} entries, tree has {} stages",
                forecast.len(),
                self.stages
            )));
        }
        if !(wind_cap > 0.0) {
            return Err(Error::domain(format!("wind cap must be positive, got {wind_cap}")));
        }
        if let Some(bad) = forecast.iter().find(|f| !(**f >= 0.0)) {
            return Err(Error::domain(format!("negative wind forecast {bad}")));
        }
        Ok(self
            .errors
            .iter()
            .map(|row| {
                row.iter()
                    .zip(forecast)
                    .map(|(&e, &f)| {
                        let w = match mode {
                            ErrorMode::PerUnit => f * (1.0 + e),
                            ErrorMode::AbsoluteGw => f + e * wind_cap,
                        };
                        w.clamp(0.0, wind_cap)
                    })
                    .collect()
            })
            .collect())
    }

    /// Plain-text dump: one line per branch with its level, probability and
    /// errors at 10 significant digits.
    pub fn render(&self) -> String {
        let mut out = format!(
            "stages {}\nbranches {}\nbranch_stage {}\nphi {}\neps_c {}\n",
            self.stages,
            self.branches(),
            self.branch_stage,
            self.params.phi,
            self.params.eps_c
        );
        for (n, row) in self.errors.iter().enumerate() {
            out.push_str(&format!(
                "branch {} q={} p={}",
                n + 1,
                self.quantiles.levels()[n],
                self.probabilities.as_slice()[n]
            ));
            for e in row {
                out.push(' ');
                out.push_str(&sig10(*e));
            }
            out.push('\n');
        }
        out
    }
}

/// Formats with 10 significant digits, collapsing signed zero.
pub(crate) fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
