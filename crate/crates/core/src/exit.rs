//! Protograph EXIT analysis of the joint graph and channel thresholds.
//!
//! Mutual information is tracked per protograph edge class under the usual
//! consistent-Gaussian approximation. Transmitted channel columns see an
//! AWGN term `sigma_ch^2 = 8 Es/N0`, punctured columns none. Source columns
//! carry the Bernoulli prior: by default the prior LLR `+-L0` is added to the
//! Gaussian extrinsic message and the information is averaged over the two
//! source values ([`SourceModel::Biased`]); the cruder equivalent-BSC term
//! `sigma_s = J^-1(1 - H_b(p1))` is available as [`SourceModel::Bsc`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::protograph::{CodeError, JointCode};
use crate::scalar::Real;

const SIGMA_STEP: f64 = 0.002;
const SIGMA_MAX: f64 = 40.0;
const QUAD_HALF_WIDTH: f64 = 10.0;
const QUAD_PANELS: usize = 600;

#[derive(Debug, Error)]
pub enum ExitError {
    #[error("{0} is outside the domain of the J function")]
    Domain(f64),
    #[error("no convergence even at the upper bracket end {0} dB")]
    Bracket(f64),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[inline]
fn softplus_neg(x: f64) -> f64 {
    // ln(1 + e^-x)
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// `1 - E[log2(1 + e^-L)]` for `L ~ N(sigma^2/2 + mu, sigma^2)`, by Simpson
/// quadrature over the standardised variable.
pub fn j_mu(sigma: f64, mu: f64) -> f64 {
    if sigma <= 0.0 {
        return 1.0 - softplus_neg(mu) / std::f64::consts::LN_2;
    }
    let m = sigma * sigma / 2.0 + mu;
    let h = 2.0 * QUAD_HALF_WIDTH / QUAD_PANELS as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = 0.0;
    for k in 0..=QUAD_PANELS {
        let t = -QUAD_HALF_WIDTH + k as f64 * h;
        let w = if k == 0 || k == QUAD_PANELS {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * norm * (-t * t / 2.0).exp() * softplus_neg(m + sigma * t);
    }
    1.0 - acc * h / 3.0 / std::f64::consts::LN_2
}

fn grid_len() -> usize {
    (SIGMA_MAX / SIGMA_STEP).round() as usize + 1
}

fn tabulate(f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..grid_len()).map(|k| f(k as f64 * SIGMA_STEP)).collect()
}

fn base_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| tabulate(|s| j_mu(s, 0.0)))
}

fn source_table(p1: f64) -> Arc<Vec<f64>> {
    static TABLES: OnceLock<Mutex<HashMap<u64, Arc<Vec<f64>>>>> = OnceLock::new();
    let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = map.lock().expect("table cache").get(&p1.to_bits()) {
        return t.clone();
    }
    let l0 = (1.0 - p1) / p1;
    let l0 = l0.ln();
    let table = Arc::new(tabulate(|s| (1.0 - p1) * j_mu(s, l0) + p1 * j_mu(s, -l0)));
    map.lock()
        .expect("table cache")
        .entry(p1.to_bits())
        .or_insert(table)
        .clone()
}

/// Tabulated, linearly interpolated `I(sigma)` on a uniform grid.
#[derive(Debug, Clone)]
pub struct JTable<T: Real> {
    values: Vec<T>,
    step: T,
}

impl<T: Real> JTable<T> {
    fn from_f64(values: &[f64]) -> Self {
        JTable {
            values: values.iter().map(|&v| T::of(v)).collect(),
            step: T::of(SIGMA_STEP),
        }
    }

    /// The consistent-Gaussian J function.
    pub fn standard() -> Self {
        Self::from_f64(base_table())
    }

    /// Source-column transfer for a Bernoulli(`p1`) prior.
    pub fn biased_source(p1: f64) -> Self {
        Self::from_f64(&source_table(p1))
    }

    pub fn sigma_max(&self) -> T {
        self.step * T::of((self.values.len() - 1) as f64)
    }

    /// Evaluates at `sigma >= 0`; saturates beyond the grid.
    #[inline]
    pub fn eval(&self, sigma: T) -> T {
        let x = sigma / self.step;
        if x <= T::zero() {
            return self.values[0];
        }
        let k = x.floor().to_usize().unwrap_or(usize::MAX);
        if k + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let f = x - T::of(k as f64);
        self.values[k] + f * (self.values[k + 1] - self.values[k])
    }

    /// Inverse of an increasing table; saturates at both ends.
    #[inline]
    pub fn inverse(&self, i: T) -> T {
        let v = &self.values;
        if i <= v[0] {
            return T::zero();
        }
        if i >= v[v.len() - 1] {
            return self.sigma_max();
        }
        let k = v.partition_point(|&x| x <= i) - 1;
        let span = v[k + 1] - v[k];
        let f = if span > T::zero() {
            (i - v[k]) / span
        } else {
            T::zero()
        };
        (T::of(k as f64) + f) * self.step
    }
}

fn standard_f64() -> &'static JTable<f64> {
    static J: OnceLock<JTable<f64>> = OnceLock::new();
    J.get_or_init(JTable::standard)
}

/// `J(sigma)`, the mutual information of a consistent Gaussian LLR.
pub fn j_fun(sigma: f64) -> Result<f64, ExitError> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(ExitError::Domain(sigma));
    }
    Ok(standard_f64().eval(sigma))
}

/// Numerical inverse of [`j_fun`] on `[0, 1)`.
pub fn j_inv(i: f64) -> Result<f64, ExitError> {
    if !(0.0..1.0).contains(&i) {
        return Err(ExitError::Domain(i));
    }
    Ok(standard_f64().inverse(i))
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Equivalent-BSC prior information `1 - H_b(p1)` and its J-inverse.
pub fn source_prior_mi(p1: f64) -> (f64, f64) {
    let i = 1.0 - binary_entropy(p1);
    (i, standard_f64().inverse(i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceModel {
    /// Gaussian extrinsic message shifted by the prior LLR, averaged over
    /// the two source values.
    #[default]
    Biased,
    /// The prior as an extra channel observation with `1 - H_b(p1)` bits.
    Bsc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitConfig {
    pub eps_conv: f64,
    pub max_iter: usize,
    pub resolution_db: f64,
    pub lo_db: f64,
    pub hi_db: f64,
    pub source_model: SourceModel,
}

impl Default for ExitConfig {
    fn default() -> Self {
        ExitConfig {
            eps_conv: 1e-5,
            max_iter: 1000,
            resolution_db: 0.001,
            lo_db: -15.0,
            hi_db: 5.0,
            source_model: SourceModel::Biased,
        }
    }
}

/// One bisection probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub esn0_db: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    /// Smallest converging Es/N0 per channel symbol (dB).
    pub threshold_db: f64,
    /// The same threshold per source symbol, `threshold_db - 10 log10 R`.
    pub threshold_source_db: f64,
    pub rate: f64,
    pub iterations_at_threshold: usize,
    pub trace: Vec<Probe>,
    pub config: ExitConfig,
}

/// Outcome of one EXIT run at a fixed Es/N0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergence {
    pub converged: bool,
    pub iterations: usize,
}

/// EXIT recursion state for one code, reusable across Es/N0 values.
#[derive(Debug, Clone)]
pub struct Pexit<T: Real> {
    m: usize,
    n: usize,
    n_s: usize,
    /// Edge multiplicities, row-major.
    b: Vec<T>,
    punctured: Vec<bool>,
    j: JTable<T>,
    src: Option<JTable<T>>,
    bsc_sigma: T,
    config: ExitConfig,
    rate: f64,
}

impl<T: Real> Pexit<T> {
    pub fn new(code: &JointCode, config: ExitConfig) -> Result<Self, ExitError> {
        let joint = code.assemble_joint();
        let l = code.layout();
        let rate = code.rates()?.overall;
        let (src, bsc_sigma) = match config.source_model {
            SourceModel::Biased => (Some(JTable::biased_source(code.p1())), T::zero()),
            SourceModel::Bsc => (None, T::of(source_prior_mi(code.p1()).1)),
        };
        Ok(Pexit {
            m: joint.rows(),
            n: joint.cols(),
            n_s: l.n_s,
            b: joint.entries().iter().map(|&v| T::of(v as f64)).collect(),
            punctured: (0..joint.cols())
                .map(|c| code.is_punctured_joint_col(c))
                .collect(),
            j: JTable::standard(),
            src,
            bsc_sigma,
            config,
            rate,
        })
    }

    pub fn config(&self) -> &ExitConfig {
        &self.config
    }

    fn channel_sigma(&self, esn0_db: f64) -> Vec<T> {
        let sch = T::of((8.0 * 10f64.powf(esn0_db / 10.0)).sqrt());
        (0..self.n)
            .map(|c| {
                if c < self.n_s {
                    self.bsc_sigma
                } else if self.punctured[c] {
                    T::zero()
                } else {
                    sch
                }
            })
            .collect()
    }

    #[inline]
    fn var_out(&self, c: usize, sigma2: T) -> T {
        let s = sigma2.max(T::zero()).sqrt();
        match &self.src {
            Some(src) if c < self.n_s => src.eval(s),
            _ => self.j.eval(s),
        }
    }

    /// Runs the recursion at `esn0_db`; converged when every column's
    /// a-posteriori information reaches `1 - eps_conv`.
    pub fn run(&self, esn0_db: f64) -> Convergence {
        let (m, n) = (self.m, self.n);
        let ch = self.channel_sigma(esn0_db);
        let ch2: Vec<T> = ch.iter().map(|&s| s * s).collect();
        let target = T::one() - T::of(self.config.eps_conv);
        let stall = T::of(1e-13);
        // squared J^-1 of the check-to-variable information per edge class
        let mut xc = vec![T::zero(); m * n];
        let mut xv = vec![T::zero(); m * n];
        let mut col_sum = vec![T::zero(); n];
        let mut prev_app = vec![T::zero(); n];
        for it in 1..=self.config.max_iter {
            for c in 0..n {
                col_sum[c] = (0..m).fold(T::zero(), |a, r| a + self.b[r * n + c] * xc[r * n + c]);
            }
            for r in 0..m {
                for c in 0..n {
                    let k = r * n + c;
                    if self.b[k] > T::zero() {
                        let iev = self.var_out(c, col_sum[c] - xc[k] + ch2[c]);
                        let s = self.j.inverse(T::one() - iev);
                        xv[k] = s * s;
                    }
                }
            }
            for r in 0..m {
                let row = r * n..(r + 1) * n;
                let total = row.clone().fold(T::zero(), |a, k| a + self.b[k] * xv[k]);
                for k in row {
                    if self.b[k] > T::zero() {
                        let iec = T::one() - self.j.eval((total - xv[k]).max(T::zero()).sqrt());
                        let s = self.j.inverse(iec);
                        xc[k] = s * s;
                    }
                }
            }
            let mut done = true;
            let mut moved = false;
            for c in 0..n {
                let s2 = (0..m).fold(T::zero(), |a, r| a + self.b[r * n + c] * xc[r * n + c]);
                let app = self.var_out(c, s2 + ch2[c]);
                if app < target {
                    done = false;
                }
                if (app - prev_app[c]).abs() > stall {
                    moved = true;
                }
                prev_app[c] = app;
            }
            if done {
                return Convergence {
                    converged: true,
                    iterations: it,
                };
            }
            if !moved {
                // fixed point below the target
                return Convergence {
                    converged: false,
                    iterations: it,
                };
            }
        }
        Convergence {
            converged: false,
            iterations: self.config.max_iter,
        }
    }

    /// Bisection for the smallest converging Es/N0.
    pub fn threshold(&self) -> Result<ThresholdReport, ExitError> {
        let cfg = self.config;
        let mut trace = Vec::new();
        let top = self.run(cfg.hi_db);
        trace.push(Probe {
            esn0_db: cfg.hi_db,
            converged: top.converged,
            iterations: top.iterations,
        });
        if !top.converged {
            return Err(ExitError::Bracket(cfg.hi_db));
        }
        let (mut lo, mut hi) = (cfg.lo_db, cfg.hi_db);
        let mut hi_iters = top.iterations;
        while hi - lo > cfg.resolution_db {
            let mid = 0.5 * (lo + hi);
            let r = self.run(mid);
            trace.push(Probe {
                esn0_db: mid,
                converged: r.converged,
                iterations: r.iterations,
            });
            if r.converged {
                hi = mid;
                hi_iters = r.iterations;
            } else {
                lo = mid;
            }
        }
        Ok(ThresholdReport {
            threshold_db: hi,
            threshold_source_db: hi - 10.0 * self.rate.log10(),
            rate: self.rate,
            iterations_at_threshold: hi_iters,
            trace,
            config: cfg,
        })
    }
}

/// Convenience wrapper around [`Pexit::run`] with the default source model.
pub fn pexit_converges(code: &JointCode, esn0_db: f64, max_iter: usize, eps_conv: f64) -> bool {
    let config = ExitConfig {
        max_iter,
        eps_conv,
        ..ExitConfig::default()
    };
    Pexit::<f64>::new(code, config)
        .map(|p| p.run(esn0_db).converged)
        .unwrap_or(false)
}

/// Channel threshold of `code` under `config`.
pub fn channel_threshold(
    code: &JointCode,
    config: ExitConfig,
) -> Result<ThresholdReport, ExitError> {
    Pexit::<f64>::new(code, config)?.threshold()
}

/// Shannon limits for transmitting a Bernoulli(`p1`) source at `rate` source
/// bits per channel symbol, in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShannonLimit {
    /// Gaussian-input capacity, Es/N0 per channel symbol.
    pub gaussian_db: f64,
    /// Binary-input AWGN capacity; `None` when `R H_b(p1) >= 1`.
    pub biawgn_db: Option<f64>,
    pub gaussian_source_db: f64,
    pub biawgn_source_db: Option<f64>,
}

pub fn shannon_limit(p1: f64, rate: f64) -> ShannonLimit {
    let need = rate * binary_entropy(p1);
    let to_db = |x: f64| 10.0 * x.log10();
    let shift = 10.0 * rate.log10();
    let gaussian_db = to_db(((2f64).powf(2.0 * need) - 1.0) / 2.0);
    // C_BIAWGN(Es/N0) = J(sqrt(8 Es/N0))
    let biawgn_db = (need < 1.0).then(|| {
        let s = standard_f64().inverse(need);
        to_db(s * s / 8.0)
    });
    ShannonLimit {
        gaussian_db,
        biawgn_db,
        gaussian_source_db: gaussian_db - shift,
        biawgn_source_db: biawgn_db.map(|d| d - shift),
    }
}
