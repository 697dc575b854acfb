//! Relative-volume estimation for channels with prescribed stationary
//! states, plus the corresponding analytic formulas.
//!
//! Random CPTP maps are drawn from the Hilbert–Schmidt-uniform ensemble on
//! the Choi body, realized as the induced measure with environment
//! dimension `K = N_A·N_B`: take a square Ginibre matrix `G`, form the
//! Wishart matrix `W = GG†`, and normalize the `B`-trace,
//! `E = (Y^{-1/2} ⊗ 1_B) W (Y^{-1/2} ⊗ 1_B)` with `Y = Tr_B W`. The result
//! is exactly trace preserving and PSD by construction.
//!
//! A draw "stores" the first `M` computational basis states at basin width
//! `ε` when every diagonal element `⟨μμ|E|μμ⟩` lies in `[1−ε/2, 1+ε/2]`.
//! Those elements never exceed 1 for a TP Choi, so the window is
//! effectively `[1−ε/2, 1]`. By the unitary invariance of the ensemble the
//! estimate does not depend on which orthonormal pattern set is used.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChoiCandidate, ChoiMatrix};
use crate::error::Error;
use crate::linalg::{
    eig_hermitian, partial_trace, random_ginibre, BipartiteDims, ComplexMatrix, SeedStream,
    Subsystem,
};

/// Parameters of a Monte Carlo volume estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GardnerConfig {
    /// Hilbert space dimension (input = output).
    pub n: usize,
    /// Number of stored patterns; `0` means no constraints.
    pub m: usize,
    /// Basin width of the stationarity window.
    pub epsilon: f64,
    pub samples: u64,
    pub master_seed: u64,
}

impl GardnerConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if self.m > self.n {
            return Err(Error::InvalidParameter(format!(
                "pattern count {} exceeds dimension {}",
                self.m, self.n
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be in (0, 2], got {}",
                self.epsilon
            )));
        }
        if self.samples < 1 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Monte Carlo estimate of a relative volume with binomial error bars.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub fraction: f64,
    /// `√(f(1−f)/samples)`.
    pub stderr: f64,
    pub samples: u64,
    pub hits: u64,
    /// 95% upper confidence bound by the rule of three, reported when no
    /// sample hit the window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_hit_upper95: Option<f64>,
    pub config: GardnerConfig,
}

/// Degrees of freedom of the CPTP body on an `N`-dimensional space:
/// `N⁴` real parameters of a Hermitian Choi operator minus the `N²` real
/// trace-preservation constraints.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ManifoldDims {
    pub n: usize,
    pub d: u64,
}

impl ManifoldDims {
    pub fn for_dimension(n: usize) -> Self {
        let n4 = (n as u64).pow(4);
        let n2 = (n as u64).pow(2);
        Self { n, d: n4 - n2 }
    }

    pub fn d_f64(&self) -> f64 {
        self.d as f64
    }
}

/// One draw from the Hilbert–Schmidt-uniform CPTP ensemble.
///
/// Deterministic given the stream; the marked-impossible singular branch
/// retries with further draws from the same stream.
pub fn sample_cptp(dims: BipartiteDims, stream: &mut SeedStream) -> ChoiMatrix {
    let total = dims.total();
    loop {
        let g = random_ginibre(total, total, stream);
        let w = g.matmul(&g.adjoint());
        let y = partial_trace(&w, dims, Subsystem::B).expect("dims consistent");
        let eig = eig_hermitian(&y.hermitize(), f64::INFINITY).expect("Hermitian by construction");
        // Y = Tr_B GG† is positive definite with probability one.
        if eig.min_eigenvalue() <= 1e-12 * eig.max_eigenvalue().max(1.0) {
            continue;
        }
        let y_inv_sqrt = eig.map_eigenvalues(|x| 1.0 / x.sqrt());
        let sandwich = y_inv_sqrt.kron(&ComplexMatrix::identity(dims.dim_b));
        let e = sandwich.matmul(&w).matmul(&sandwich);
        let cand = ChoiCandidate::new(dims, e).expect("square by construction");
        return ChoiMatrix::trusted(cand);
    }
}

/// True when all of the first `m` patterns sit inside the basin window:
/// `⟨μμ|E|μμ⟩ ∈ [1−ε/2, 1+ε/2]` for `μ = 0..m`.
pub fn stationarity_indicator(choi: &ChoiMatrix, m: usize, epsilon: f64) -> bool {
    let lo = 1.0 - epsilon / 2.0;
    let hi = 1.0 + epsilon / 2.0;
    (0..m).all(|mu| {
        let x = choi.as_candidate().element(mu, mu, mu, mu).re;
        (lo..=hi).contains(&x)
    })
}

/// Monte Carlo estimate of the fraction of CPTP maps storing the first `M`
/// basis states at basin width `ε`.
///
/// Sample `i` draws from the stream `(master_seed, i)` and the hit count is
/// an exact integer sum, so the result is bit-identical for any thread
/// count and any execution order.
pub fn estimate_relative_volume(config: &GardnerConfig) -> Result<VolumeEstimate, Error> {
    config.validate()?;
    let dims = BipartiteDims::square(config.n);
    let hits: u64 = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = SeedStream::new(config.master_seed, i);
            let choi = sample_cptp(dims, &mut stream);
            u64::from(stationarity_indicator(&choi, config.m, config.epsilon))
        })
        .sum();
    Ok(finish_estimate(config.clone(), hits))
}

/// Like [`estimate_relative_volume`] but reusing one shared sample set for
/// several `(m, ε)` settings, preserving the exact nesting of the events.
pub fn estimate_on_shared_samples(
    n: usize,
    samples: u64,
    master_seed: u64,
    settings: &[(usize, f64)],
) -> Result<Vec<VolumeEstimate>, Error> {
    for &(m, epsilon) in settings {
        GardnerConfig {
            n,
            m,
            epsilon,
            samples,
            master_seed,
        }
        .validate()?;
    }
    let dims = BipartiteDims::square(n);
    let counts: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = SeedStream::new(master_seed, i);
            let choi = sample_cptp(dims, &mut stream);
            let mut local = vec![0u64; settings.len()];
            for (slot, &(m, epsilon)) in settings.iter().enumerate() {
                local[slot] = u64::from(stationarity_indicator(&choi, m, epsilon));
            }
            local
        })
        .reduce(
            || vec![0u64; settings.len()],
            |mut acc, local| {
                for (a, l) in acc.iter_mut().zip(&local) {
                    *a += l;
                }
                acc
            },
        );
    Ok(settings
        .iter()
        .zip(counts)
        .map(|(&(m, epsilon), hits)| {
            finish_estimate(
                GardnerConfig {
                    n,
                    m,
                    epsilon,
                    samples,
                    master_seed,
                },
                hits,
            )
        })
        .collect())
}

fn finish_estimate(config: GardnerConfig, hits: u64) -> VolumeEstimate {
    let samples = config.samples;
    let fraction = hits as f64 / samples as f64;
    let stderr = (fraction * (1.0 - fraction) / samples as f64).sqrt();
    let zero_hit_upper95 = if hits == 0 {
        Some(3.0 / samples as f64)
    } else {
        None
    };
    VolumeEstimate {
        fraction,
        stderr,
        samples,
        hits,
        zero_hit_upper95,
        config,
    }
}

/// Value carried in both linear and log domain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnalyticVolume {
    pub value: f64,
    pub log_value: f64,
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Asymptotic volume of the CPTP body at manifold dimension `d`:
/// `π^{d/2} / Γ(d/2 + 1) · e^{−d/4}`, evaluated in the log domain.
pub fn analytic_v_cptp(d: f64) -> Result<AnalyticVolume, Error> {
    if d <= 0.0 {
        return Err(Error::InvalidParameter(format!("d must be positive, got {d}")));
    }
    let log_value = 0.5 * d * LN_PI - ln_gamma(0.5 * d + 1.0) - 0.25 * d;
    Ok(AnalyticVolume {
        value: log_value.exp(),
        log_value,
    })
}

/// Asymptotic volume of the maps storing `m` patterns at basin width `ε`:
/// `ε^m · π^{(d−m)/2} / Γ((d−m)/2 + 1) · e^{−(d−m)/4}`.
pub fn analytic_v_aqnn(epsilon: f64, m: f64, d: f64) -> Result<AnalyticVolume, Error> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    if !(m >= 0.0 && m < d) {
        return Err(Error::InvalidParameter(format!(
            "require 0 ≤ m < d, got m={m}, d={d}"
        )));
    }
    let dm = d - m;
    let log_value = m * epsilon.ln() + 0.5 * dm * LN_PI - ln_gamma(0.5 * dm + 1.0) - 0.25 * dm;
    Ok(AnalyticVolume {
        value: log_value.exp(),
        log_value,
    })
}

/// Relative volume with a validity flag.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RelativeVolume {
    pub value: f64,
    pub log_value: f64,
    /// A relative volume above 1 signals that `ε` is too large for the
    /// constraint-count approximation to be meaningful.
    pub exceeds_unit: bool,
}

/// Relative volume `ε^K · e^{K/4} · π^{−K/2} · Γ(d/2+1) / Γ((d−K)/2+1)` for
/// `K` scalar constraints in a `d`-dimensional body. `K = M` for pure
/// patterns; `K = M·N²` serves the mixed-state constraint count.
pub fn analytic_relative_volume(epsilon: f64, k: f64, d: f64) -> Result<RelativeVolume, Error> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    if !(k > 0.0 && k < d) {
        return Err(Error::InvalidParameter(format!(
            "require 0 < K < d, got K={k}, d={d}"
        )));
    }
    let log_value =
        k * epsilon.ln() + 0.25 * k - 0.5 * k * LN_PI + ln_gamma(0.5 * d + 1.0)
            - ln_gamma(0.5 * (d - k) + 1.0);
    let value = log_value.exp();
    Ok(RelativeVolume {
        value,
        log_value,
        exceeds_unit: value > 1.0,
    })
}

/// Stirling approximation of the log relative volume:
/// `(M/2)·ln(√e·d·ε²/(2π)) − M²/(4d)`. Valid for `1 ≪ M ≪ d`.
pub fn analytic_log_vr_stirling(epsilon: f64, m: f64, d: f64) -> f64 {
    // Grouped so the logarithm term cancels exactly at the optimal ε.
    let log_arg = 0.5 + d.ln() + 2.0 * epsilon.ln() - (2.0 * std::f64::consts::PI).ln();
    0.5 * m * log_arg - m * m / (4.0 * d)
}

/// Basin width maximizing the Stirling estimate subject to `V_R < 1`:
/// `ε* = e^{−1/4} √(2π/d)`.
pub fn optimal_epsilon(d: f64) -> f64 {
    (-0.25f64).exp() * (2.0 * std::f64::consts::PI / d).sqrt()
}

/// Relative volume at the optimal basin width: `exp(−M²/(4d))`.
pub fn vr_optimal(m: f64, d: f64) -> f64 {
    (-m * m / (4.0 * d)).exp()
}

/// One row of the qubit capacity table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityRow {
    pub n_qubits: u32,
    /// Hilbert space dimension `2^n`.
    pub dimension: u64,
    /// CPTP manifold dimension `N⁴ − N²`.
    pub manifold_dim: u64,
    /// Maximum number of storable linearly independent pure states (= N).
    pub max_patterns: u64,
    /// `vr_optimal(2^{n/2}, d)`: the relative volume at a pattern load of
    /// the square root of the capacity.
    pub vr_at_sqrt_capacity: f64,
}

/// Capacity table over a range of qubit counts.
pub fn capacity_table(n_qubits: impl IntoIterator<Item = u32>) -> Vec<CapacityRow> {
    n_qubits
        .into_iter()
        .map(|n| {
            let dimension = 1u64 << n;
            let dims = ManifoldDims::for_dimension(dimension as usize);
            let m = (2.0f64).powf(n as f64 / 2.0);
            CapacityRow {
                n_qubits: n,
                dimension,
                manifold_dim: dims.d,
                max_patterns: dimension,
                vr_at_sqrt_capacity: vr_optimal(m, dims.d_f64()),
            }
        })
        .collect()
}
