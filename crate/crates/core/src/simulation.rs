//! Gaussian Z-statistic simulations: correlated test statistics, p-values,
//! per-replicate error events and power counts, plus the Benjamini-Hochberg
//! step-up baseline.
//!
//! Everything here is sequential and allocation-light; the parallel driver
//! that aggregates replicates lives in the `mfdp` crate. Each replicate owns
//! its own ChaCha8 stream selected by `(seed, replicate index)`, so results
//! do not depend on how replicates are scheduled.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::control::adjusted_pvalues_sorted;
use crate::envelope::{build_envelope, improve_envelope, CandidateFamilyConfig, Envelope, EnvelopeCurve};
use crate::normal::{right_sided_pvalue, two_sided_pvalue};
use crate::{Error, PValueSet, Result, ThresholdWindow};

/// Correlation structure of the test statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dependence {
    /// Independent statistics (IN).
    Independent,
    /// One common correlation `rho` between all pairs (HO).
    Homogeneous {
        /// Pairwise correlation.
        rho: f64,
    },
    /// Independent blocks with correlation `rho` inside each block (BL).
    Blocks {
        /// Number of equally sized blocks.
        n_blocks: usize,
        /// Within-block correlation.
        rho: f64,
    },
    /// Blocks with correlation `rho_within` inside and `rho_between` across
    /// blocks (NE when `rho_between < 0`).
    NegativeBlocks {
        /// Number of equally sized blocks.
        n_blocks: usize,
        /// Within-block correlation.
        rho_within: f64,
        /// Cross-block correlation.
        rho_between: f64,
    },
}

impl Dependence {
    /// The five-block structure with within-block correlation `rho`.
    pub fn five_blocks(rho: f64) -> Self {
        Dependence::Blocks { n_blocks: 5, rho }
    }

    /// 50 blocks, within-block correlation 0.5 and cross-block -0.01.
    pub fn negative_blocks() -> Self {
        Dependence::NegativeBlocks {
            n_blocks: 50,
            rho_within: 0.5,
            rho_between: -0.01,
        }
    }

    /// Two-letter setting code.
    pub fn code(&self) -> &'static str {
        match self {
            Dependence::Independent => "IN",
            Dependence::Homogeneous { .. } => "HO",
            Dependence::Blocks { .. } => "BL",
            Dependence::NegativeBlocks { .. } => "NE",
        }
    }

    /// The headline correlation: `rho`, or the cross-block value for NE.
    pub fn rho(&self) -> f64 {
        match *self {
            Dependence::Independent => 0.0,
            Dependence::Homogeneous { rho } | Dependence::Blocks { rho, .. } => rho,
            Dependence::NegativeBlocks { rho_between, .. } => rho_between,
        }
    }
}

/// Which tail the p-values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sidedness {
    /// `2 (1 - Φ(|Z|))`.
    TwoSided,
    /// `1 - Φ(Z)`.
    RightSided,
}

/// How correlated statistics are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    /// O(m) factor construction.
    Factor,
    /// O(m²) draw through a dense Cholesky factor; for cross-checking.
    DenseCholesky,
}

/// User-facing simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of hypotheses.
    pub m: usize,
    /// Fraction of true nulls.
    pub pi0: f64,
    /// Mean shift added to the false hypotheses' statistics.
    pub delta: f64,
    /// Correlation structure.
    pub dependence: Dependence,
    /// P-value sidedness.
    pub sidedness: Sidedness,
    /// Monte Carlo replicates.
    pub reps: u64,
    /// Base seed.
    pub seed: u64,
    /// Threshold window.
    pub window: ThresholdWindow,
    /// Envelope intercept; `None` means `1 / (2m)`.
    pub c: Option<f64>,
    /// Target FDP values for power.
    pub gamma_grid: Vec<f64>,
    /// Benjamini-Hochberg levels for power.
    pub bh_alpha: Vec<f64>,
    /// Use the improved envelope when computing power.
    pub improved_for_power: bool,
    /// Statistic sampler.
    pub sampler: SamplerKind,
}

impl ScenarioConfig {
    /// The default setting: `m = 1000`, window `[0, 0.1]`, `c = 1/(2m)`,
    /// `γ ∈ {0.01, 0.05, 0.1}`, BH at 0.05, `10⁴` replicates, two-sided
    /// p-values (right-sided for NE).
    pub fn new(dependence: Dependence, pi0: f64, delta: f64) -> Self {
        let sidedness = match dependence {
            Dependence::NegativeBlocks { .. } => Sidedness::RightSided,
            _ => Sidedness::TwoSided,
        };
        ScenarioConfig {
            m: 1000,
            pi0,
            delta,
            dependence,
            sidedness,
            reps: 10_000,
            seed: 1,
            window: ThresholdWindow::default(),
            c: None,
            gamma_grid: alloc::vec![0.01, 0.05, 0.1],
            bh_alpha: alloc::vec![0.05],
            improved_for_power: true,
            sampler: SamplerKind::Factor,
        }
    }
}

/// Which hypotheses are true nulls, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthMask {
    is_null: Vec<bool>,
}

impl TruthMask {
    /// The first `n_false` hypotheses are false, the rest true.
    pub fn leading_false(m: usize, n_false: usize) -> Self {
        TruthMask {
            is_null: (0..m).map(|i| i >= n_false).collect(),
        }
    }

    /// Null flags in input order.
    pub fn is_null(&self) -> &[bool] {
        &self.is_null
    }

    /// Number of true nulls.
    pub fn n_null(&self) -> usize {
        self.is_null.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BlockStructure {
    n_blocks: usize,
    block_size: usize,
    rho_within: f64,
    rho_between: f64,
}

impl BlockStructure {
    fn from_dependence(m: usize, dep: Dependence) -> Result<Self> {
        let (n_blocks, rho_within, rho_between) = match dep {
            Dependence::Independent => (m, 0.0, 0.0),
            Dependence::Homogeneous { rho } => (1, rho, 0.0),
            Dependence::Blocks { n_blocks, rho } => (n_blocks, rho, 0.0),
            Dependence::NegativeBlocks {
                n_blocks,
                rho_within,
                rho_between,
            } => (n_blocks, rho_within, rho_between),
        };
        if n_blocks == 0 || m % n_blocks != 0 {
            return Err(Error::param("n_blocks", "must divide m"));
        }
        let within_ok = (-1.0..=1.0).contains(&rho_within);
        let between_ok = (-1.0..=1.0).contains(&rho_between);
        if !within_ok || !between_ok {
            return Err(Error::param("rho", "correlations must lie in [-1, 1]"));
        }
        Ok(BlockStructure {
            n_blocks,
            block_size: m / n_blocks,
            rho_within,
            rho_between,
        })
    }

    /// Eigenvalues of the implied correlation matrix (without multiplicity).
    fn min_eigenvalue(&self) -> f64 {
        let n = self.block_size as f64;
        let m = (self.block_size * self.n_blocks) as f64;
        let (rw, rb) = (self.rho_within, self.rho_between);
        let mut min = 1.0 + (n - 1.0) * rw + (m - n) * rb;
        if self.block_size > 1 {
            min = min.min(1.0 - rw);
        }
        if self.n_blocks > 1 {
            min = min.min(1.0 + (n - 1.0) * rw - n * rb);
        }
        min
    }

    fn correlation(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else if i / self.block_size == j / self.block_size {
            self.rho_within
        } else {
            self.rho_between
        }
    }
}

/// A validated simulation scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: ScenarioConfig,
    structure: BlockStructure,
    n_false: usize,
    family: CandidateFamilyConfig,
    truth: TruthMask,
    dense: Option<Vec<f64>>,
}

impl Scenario {
    /// Validates the configuration, including positive semi-definiteness of
    /// the implied correlation matrix.
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        if config.m == 0 {
            return Err(Error::param("m", "must be positive"));
        }
        if !(0.0..=1.0).contains(&config.pi0) {
            return Err(Error::param("pi0", "must lie in [0,1]"));
        }
        if !config.delta.is_finite() {
            return Err(Error::param("delta", "must be finite"));
        }
        if config.gamma_grid.iter().any(|g| !(0.0..=1.0).contains(g)) {
            return Err(Error::param("gamma", "must lie in [0,1]"));
        }
        if config.bh_alpha.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(Error::param("alpha", "must lie in (0,1)"));
        }
        let structure = BlockStructure::from_dependence(config.m, config.dependence)?;
        let min_eigenvalue = structure.min_eigenvalue();
        if min_eigenvalue < -1e-12 {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
        }
        if config.sampler == SamplerKind::Factor
            && (structure.rho_within < 0.0 || (structure.rho_within == 0.0 && structure.rho_between != 0.0))
        {
            return Err(Error::param(
                "dependence",
                "factor sampler needs non-negative within-block correlation",
            ));
        }
        let family = match config.c {
            Some(c) => CandidateFamilyConfig::new(c, config.window)?,
            None => CandidateFamilyConfig::with_default_c(config.m, config.window),
        };
        let n_false = libm::round((1.0 - config.pi0) * config.m as f64) as usize;
        let truth = TruthMask::leading_false(config.m, n_false);
        let dense = match config.sampler {
            SamplerKind::DenseCholesky => Some(cholesky(&structure, config.m)?),
            SamplerKind::Factor => None,
        };
        Ok(Scenario {
            config,
            structure,
            n_false,
            family,
            truth,
            dense,
        })
    }

    /// Configuration this scenario was built from.
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Number of false hypotheses, `round((1 - π0) m)`.
    pub fn n_false(&self) -> usize {
        self.n_false
    }

    /// Truth mask shared by all replicates.
    pub fn truth(&self) -> &TruthMask {
        &self.truth
    }

    /// Candidate family used for every replicate.
    pub fn family(&self) -> &CandidateFamilyConfig {
        &self.family
    }

    /// Short human-readable label, e.g. `HO(0.5)`.
    pub fn label(&self) -> String {
        alloc::format!("{}({})", self.config.dependence.code(), self.config.dependence.rho())
    }

    /// Smallest eigenvalue of the implied correlation matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.structure.min_eigenvalue()
    }

    /// The independent stream for replicate `rep`.
    pub fn replicate_rng(&self, rep: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(rep);
        rng
    }

    /// Draws one vector of test statistics, including the mean shift.
    pub fn sample_statistics<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = self.config.m;
        let mut z = match &self.dense {
            Some(l) => dense_draw(l, m, rng),
            None => factor_draw(&self.structure, rng),
        };
        for zi in &mut z[..self.n_false] {
            *zi += self.config.delta;
        }
        z
    }

    /// Draws one replicate's p-values.
    pub fn sample_pvalues<R: Rng + ?Sized>(&self, rng: &mut R) -> PValueSet {
        let z = self.sample_statistics(rng);
        let to_p = match self.config.sidedness {
            Sidedness::TwoSided => two_sided_pvalue,
            Sidedness::RightSided => right_sided_pvalue,
        };
        let p: Vec<f64> = z.into_iter().map(to_p).collect();
        PValueSet::new(&p).expect("normal tail probabilities are clamped into (0,1]")
    }

    /// `∃ t ∈ T: V(t) > B̃(t)` for replicate `rep`.
    pub fn error_event(&self, rep: u64) -> bool {
        let p = self.sample_pvalues(&mut self.replicate_rng(rep));
        let env = build_envelope(&p, &self.family);
        exceeds_envelope(&p, &self.truth, &env)
    }

    /// Rejected false hypotheses per `γ` and per BH level for replicate `rep`.
    pub fn power_sample(&self, rep: u64) -> PowerSample {
        let p = self.sample_pvalues(&mut self.replicate_rng(rep));
        let base = build_envelope(&p, &self.family);
        let is_null = self.truth.is_null();
        let perm = p.perm();
        let count_false = |ad: &[crate::AdjustedPValue], gamma: f64| -> u64 {
            ad.iter()
                .zip(perm)
                .filter(|(a, &orig)| !is_null[orig] && a.is_at_most(gamma))
                .count() as u64
        };
        let by_gamma = if self.config.improved_for_power {
            let env = improve_envelope(&p, &base).expect("fresh envelope");
            let ad = adjusted_pvalues_sorted(&p, &env);
            self.config.gamma_grid.iter().map(|&g| count_false(&ad, g)).collect()
        } else {
            let ad = adjusted_pvalues_sorted(&p, &base);
            self.config.gamma_grid.iter().map(|&g| count_false(&ad, g)).collect()
        };
        let bh = self
            .config
            .bh_alpha
            .iter()
            .map(|&a| {
                let k = bh_count(&p, a);
                perm[..k].iter().filter(|&&orig| !is_null[orig]).count() as u64
            })
            .collect();
        PowerSample {
            rejected_false_by_gamma: by_gamma,
            rejected_false_bh: bh,
        }
    }
}

/// Oracle check of the envelope against the true null set: whether some
/// `t` in the window has more true nulls at or below it than `env(t)`.
///
/// `V` only jumps at null p-values and `env` is non-decreasing, so it is
/// enough to look at `s1` and at the null p-values in the window.
pub fn exceeds_envelope<E: Envelope>(p: &PValueSet, truth: &TruthMask, env: &E) -> bool {
    let window = env.window();
    let is_null = truth.is_null();
    let mut nulls = 0u64;
    let mut checked_s1 = false;
    for (k, &v) in p.values().iter().enumerate() {
        if v > window.s2() {
            break;
        }
        if !checked_s1 && v > window.s1() {
            checked_s1 = true;
            if nulls > env.bound_at(window.s1()) {
                return true;
            }
        }
        if is_null[p.perm()[k]] {
            nulls += 1;
            if v >= window.s1() && nulls > env.bound_at(v) {
                return true;
            }
        }
    }
    !checked_s1 && nulls > env.bound_at(window.s1())
}

/// Per-replicate rejection counts among the false hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSample {
    /// One entry per `γ` in the grid.
    pub rejected_false_by_gamma: Vec<u64>,
    /// One entry per BH level.
    pub rejected_false_bh: Vec<u64>,
}

fn bh_count(p: &PValueSet, alpha: f64) -> usize {
    let m = p.len() as f64;
    p.values()
        .iter()
        .enumerate()
        .rev()
        .find(|&(k, &v)| v <= (k + 1) as f64 * alpha / m)
        .map_or(0, |(k, _)| k + 1)
}

/// Benjamini-Hochberg step-up: the largest `k` with `p_(k) <= k α / m`.
pub fn bh_rejections(p: &PValueSet, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", "must lie in (0,1)"));
    }
    Ok(bh_count(p, alpha))
}

/// Draws one replicate's p-values and the (fixed) truth mask.
pub fn sample_pvalues<R: Rng + ?Sized>(scn: &Scenario, rng: &mut R) -> (PValueSet, TruthMask) {
    (scn.sample_pvalues(rng), scn.truth.clone())
}

fn factor_draw<R: Rng + ?Sized>(s: &BlockStructure, rng: &mut R) -> Vec<f64> {
    let m = s.n_blocks * s.block_size;
    let rw = s.rho_within;
    let mut factors: Vec<f64> = Vec::new();
    if rw > 0.0 {
        let nb = s.n_blocks;
        let r = if nb > 1 { s.rho_between / rw } else { 0.0 };
        let h: Vec<f64> = (0..nb).map(|_| rng.sample(StandardNormal)).collect();
        if r >= 0.0 {
            let g: f64 = if r > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
            let (a, b) = (libm::sqrt(1.0 - r), libm::sqrt(r));
            factors.extend(h.iter().map(|&hb| b * g + a * hb));
        } else {
            // equicorrelated with negative r: a H_b + beta * mean(H)
            let a = libm::sqrt(1.0 - r);
            let beta = libm::sqrt((1.0 + (nb as f64 - 1.0) * r).max(0.0)) - a;
            let mean = h.iter().sum::<f64>() / nb as f64;
            factors.extend(h.iter().map(|&hb| a * hb + beta * mean));
        }
    }
    let (load, noise) = (libm::sqrt(rw.max(0.0)), libm::sqrt(1.0 - rw.max(0.0)));
    let mut z = Vec::with_capacity(m);
    for i in 0..m {
        let e: f64 = rng.sample(StandardNormal);
        let f = if factors.is_empty() {
            0.0
        } else {
            factors[i / s.block_size]
        };
        z.push(load * f + noise * e);
    }
    z
}

/// Row-major lower Cholesky factor; zero pivots of a singular PSD matrix
/// give zero columns.
fn cholesky(s: &BlockStructure, m: usize) -> Result<Vec<f64>> {
    let mut l = alloc::vec![0.0; m * m];
    for j in 0..m {
        let mut d = s.correlation(j, j);
        for k in 0..j {
            d -= l[j * m + k] * l[j * m + k];
        }
        if d < -1e-10 {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: d });
        }
        let pivot = if d > 1e-14 { libm::sqrt(d) } else { 0.0 };
        l[j * m + j] = pivot;
        for i in (j + 1)..m {
            let mut v = s.correlation(i, j);
            for k in 0..j {
                v -= l[i * m + k] * l[j * m + k];
            }
            l[i * m + j] = if pivot > 0.0 { v / pivot } else { 0.0 };
        }
    }
    Ok(l)
}

fn dense_draw<R: Rng + ?Sized>(l: &[f64], m: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    (0..m)
        .map(|i| l[i * m..i * m + i + 1].iter().zip(&e).map(|(a, b)| a * b).sum())
        .collect()
}

/// A Monte Carlo proportion with its standard error `sqrt(r (1 - r) / n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    /// Estimated proportion.
    pub estimate: f64,
    /// Monte Carlo standard error.
    pub se: f64,
}

impl Rate {
    /// From a proportion over `reps` replicates.
    pub fn new(estimate: f64, reps: u64) -> Self {
        let se = libm::sqrt(estimate * (1.0 - estimate) / reps as f64);
        Rate { estimate, se }
    }
}

/// Aggregated Monte Carlo output for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    /// Probability that the envelope is exceeded somewhere in the window.
    pub error_rate: Option<Rate>,
    /// Power of mFDP control per `γ`.
    pub power_by_gamma: Vec<(f64, Rate)>,
    /// Power of BH per level.
    pub bh_power: Vec<(f64, Rate)>,
    /// Replicates behind each estimate.
    pub reps_used: u64,
}

impl McResult {
    /// Error rate from a count of replicates with an error event.
    pub fn from_error_count(events: u64, reps: u64) -> Self {
        McResult {
            error_rate: Some(Rate::new(events as f64 / reps as f64, reps)),
            power_by_gamma: Vec::new(),
            bh_power: Vec::new(),
            reps_used: reps,
        }
    }

    /// Power from per-level totals of rejected false hypotheses.
    pub fn with_power(mut self, scn: &Scenario, gamma_totals: &[u64], bh_totals: &[u64], reps: u64) -> Self {
        let denom = (scn.n_false() as u64 * reps) as f64;
        let cfg = scn.config();
        self.power_by_gamma = cfg
            .gamma_grid
            .iter()
            .zip(gamma_totals)
            .map(|(&g, &t)| (g, Rate::new(t as f64 / denom, reps)))
            .collect();
        self.bh_power = cfg
            .bh_alpha
            .iter()
            .zip(bh_totals)
            .map(|(&a, &t)| (a, Rate::new(t as f64 / denom, reps)))
            .collect();
        self.reps_used = reps;
        self
    }
}

/// Helper for callers that need an envelope exactly as the simulations
/// build it.
pub fn scenario_envelope(scn: &Scenario, p: &PValueSet) -> EnvelopeCurve {
    build_envelope(p, scn.family())
}
