// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo simulation of the kinetic and overdamped dynamics
//!   dX = V dt,                dV = -U'(X) dt - gamma V dt + sqrt(2 gamma) dW
//!   dX = -U'(X) dt + sqrt(2) dW
//! with per-path counter-based random streams and observable-level
//! decay-rate estimation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::classical::PotentialSpec;
use crate::error::{HypoflowError, Result};

const BLOW_UP_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    EulerMaruyama,
    Baoab,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Deterministic start; `v0` is ignored by the overdamped dynamics.
    Point { x0: f64, v0: f64 },
    /// Draw from the stationary measure: v ~ N(0,1), x from e^{-U}.
    Stationary,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    pub potential: PotentialSpec,
    /// Friction; required by the kinetic dynamics, ignored overdamped.
    pub gamma: Option<f64>,
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub integrator: Integrator,
    pub initial: InitialCondition,
}

impl SimConfig {
    /// dt * max(gamma, frequency scale, 1): the stability control product.
    pub fn stability_product(&self) -> f64 {
        let scale = self
            .potential
            .frequency_scale()
            .max(self.gamma.unwrap_or(0.0))
            .max(1.0);
        self.dt * scale
    }

    fn validate(&self, needs_gamma: bool) -> Result<bool> {
        self.potential.validate()?;
        if !(self.dt > 0.0) || self.n_steps == 0 || self.n_paths == 0 {
            return Err(HypoflowError::InvalidModel(
                "dt, n_steps and n_paths must be positive".into(),
            ));
        }
        if needs_gamma && !self.gamma.map_or(false, |g| g > 0.0) {
            return Err(HypoflowError::InvalidModel(
                "kinetic simulation requires gamma > 0".into(),
            ));
        }
        let product = self.stability_product();
        if product > 0.5 {
            return Err(HypoflowError::UnstableTimeStep { product });
        }
        // Warn (via the return flag) above 0.1.
        Ok(product > 0.1)
    }
}

/// Ensemble means of the recorded observables with standard errors.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TrajectoryEnsemble {
    pub times: Vec<f64>,
    pub observable_names: Vec<String>,
    /// means[obs][time_index].
    pub means: Vec<Vec<f64>>,
    /// Sample standard deviation / sqrt(n_paths), same layout.
    pub stderrs: Vec<Vec<f64>>,
    pub config: SimConfig,
    /// True when dt * max(gamma, sqrt(m), 1) exceeded 0.1 (still below the
    /// hard 0.5 limit).
    pub stability_warning: bool,
}

impl TrajectoryEnsemble {
    pub fn observable_index(&self, name: &str) -> Option<usize> {
        self.observable_names.iter().position(|n| n == name)
    }
}

fn draw_stationary_x(potential: &PotentialSpec, rng: &mut ChaCha8Rng) -> f64 {
    match potential {
        PotentialSpec::Quadratic { m } => {
            let z: f64 = StandardNormal.sample(rng);
            z / m.sqrt()
        }
        PotentialSpec::Periodic { .. } => {
            // Rejection sampling against the uniform proposal on [0, 2pi).
            let u_min = (0..1024)
                .map(|i| potential.value(2.0 * std::f64::consts::PI * i as f64 / 1024.0))
                .fold(f64::INFINITY, f64::min);
            loop {
                let x = 2.0 * std::f64::consts::PI * rand::Rng::random::<f64>(rng);
                let u: f64 = rand::Rng::random(rng);
                if u < (-(potential.value(x) - u_min)).exp() {
                    return x;
                }
            }
        }
    }
}

struct Accumulator {
    /// sums[obs][t], sums of squares likewise.
    sums: Vec<Vec<f64>>,
    sq_sums: Vec<Vec<f64>>,
}

impl Accumulator {
    fn new(n_obs: usize, n_times: usize) -> Self {
        Self {
            sums: vec![vec![0.0; n_times]; n_obs],
            sq_sums: vec![vec![0.0; n_times]; n_obs],
        }
    }

    fn record(&mut self, t_idx: usize, values: &[f64]) {
        for (o, &v) in values.iter().enumerate() {
            self.sums[o][t_idx] += v;
            self.sq_sums[o][t_idx] += v * v;
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.sq_sums.iter_mut().zip(other.sq_sums) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }

    fn finish(self, n_paths: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = n_paths as f64;
        let means: Vec<Vec<f64>> = self
            .sums
            .iter()
            .map(|row| row.iter().map(|s| s / n).collect())
            .collect();
        let stderrs = self
            .sq_sums
            .iter()
            .zip(means.iter())
            .map(|(sq, mean)| {
                sq.iter()
                    .zip(mean.iter())
                    .map(|(&s2, &mu)| {
                        let var = ((s2 / n - mu * mu) * n / (n - 1.0).max(1.0)).max(0.0);
                        (var / n).sqrt()
                    })
                    .collect()
            })
            .collect();
        (means, stderrs)
    }
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

fn run_paths<F>(
    config: &SimConfig,
    n_obs: usize,
    simulate_one: F,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)>
where
    F: Fn(&mut ChaCha8Rng, &mut Accumulator) -> Result<()> + Sync,
{
    let n_times = config.n_steps + 1;
    let acc = (0..config.n_paths)
        .into_par_iter()
        .try_fold(
            || Accumulator::new(n_obs, n_times),
            |mut acc, path| -> Result<Accumulator> {
                let mut rng = path_rng(config.seed, path as u64);
                simulate_one(&mut rng, &mut acc)?;
                Ok(acc)
            },
        )
        .try_reduce(
            || Accumulator::new(n_obs, n_times),
            |a, b| Ok(a.merge(b)),
        )?;
    Ok(acc.finish(config.n_paths))
}

/// Kinetic simulation; observables are x, x^2, v, v^2 at every step.
pub fn simulate_langevin(config: &SimConfig) -> Result<TrajectoryEnsemble> {
    let stability_warning = config.validate(true)?;
    let gamma = config.gamma.unwrap();
    let dt = config.dt;
    let potential = config.potential.clone();
    let integrator = config.integrator;
    let initial = config.initial;

    // Exact Ornstein-Uhlenbeck substep coefficients for the O part.
    let c1 = (-gamma * dt).exp();
    let c2 = (1.0 - c1 * c1).sqrt();

    let (means, stderrs) = run_paths(config, 4, |rng, acc| {
        let (mut x, mut v) = match initial {
            InitialCondition::Point { x0, v0 } => (x0, v0),
            InitialCondition::Stationary => {
                let x = draw_stationary_x(&potential, rng);
                let v: f64 = StandardNormal.sample(rng);
                (x, v)
            }
        };
        acc.record(0, &[x, x * x, v, v * v]);
        for step in 1..=config.n_steps {
            let xi: f64 = StandardNormal.sample(rng);
            match integrator {
                Integrator::Baoab => {
                    v += 0.5 * dt * (-potential.derivative(x));
                    x += 0.5 * dt * v;
                    v = c1 * v + c2 * xi;
                    x += 0.5 * dt * v;
                    v += 0.5 * dt * (-potential.derivative(x));
                }
                Integrator::EulerMaruyama => {
                    let force = -potential.derivative(x);
                    let x_new = x + dt * v;
                    let v_new = v + dt * (force - gamma * v) + (2.0 * gamma * dt).sqrt() * xi;
                    x = x_new;
                    v = v_new;
                }
            }
            if x.abs() > BLOW_UP_LIMIT || v.abs() > BLOW_UP_LIMIT {
                return Err(HypoflowError::BlowUp { step });
            }
            acc.record(step, &[x, x * x, v, v * v]);
        }
        Ok(())
    })?;

    Ok(TrajectoryEnsemble {
        times: (0..=config.n_steps).map(|i| i as f64 * dt).collect(),
        observable_names: vec!["x".into(), "x2".into(), "v".into(), "v2".into()],
        means,
        stderrs,
        config: config.clone(),
        stability_warning,
    })
}

/// Overdamped simulation; observables are x and x^2.
pub fn simulate_overdamped(config: &SimConfig) -> Result<TrajectoryEnsemble> {
    let stability_warning = config.validate(false)?;
    let dt = config.dt;
    let potential = config.potential.clone();
    let initial = config.initial;

    let (means, stderrs) = run_paths(config, 2, |rng, acc| {
        let mut x = match initial {
            InitialCondition::Point { x0, .. } => x0,
            InitialCondition::Stationary => draw_stationary_x(&potential, rng),
        };
        acc.record(0, &[x, x * x]);
        for step in 1..=config.n_steps {
            let xi: f64 = StandardNormal.sample(rng);
            x += dt * (-potential.derivative(x)) + (2.0 * dt).sqrt() * xi;
            if x.abs() > BLOW_UP_LIMIT {
                return Err(HypoflowError::BlowUp { step });
            }
            acc.record(step, &[x, x * x]);
        }
        Ok(())
    })?;

    Ok(TrajectoryEnsemble {
        times: (0..=config.n_steps).map(|i| i as f64 * dt).collect(),
        observable_names: vec!["x".into(), "x2".into()],
        means,
        stderrs,
        config: config.clone(),
        stability_warning,
    })
}

/// Exponential decay rate of an observable mean, with 95% confidence
/// interval from the weighted regression covariance.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RateEstimate {
    pub nu_hat: f64,
    pub ci_95: f64,
    pub n_points_used: usize,
}

/// Weighted log-linear fit of |E[f(t)] - equilibrium| over `fit_window`.
///
/// The first 10% of the window is excluded (non-normal transient carries a
/// prefactor), and points must exceed 3x their standard error; fewer than
/// 10 usable points aborts the fit.
pub fn estimate_decay_rate(
    ensemble: &TrajectoryEnsemble,
    observable: &str,
    fit_window: (f64, f64),
    equilibrium: f64,
) -> Result<RateEstimate> {
    let obs = ensemble
        .observable_index(observable)
        .ok_or_else(|| HypoflowError::InvalidModel(format!("unknown observable '{observable}'")))?;
    let (a, b) = fit_window;
    assert!(b > a && a >= 0.0, "bad fit window");
    let start = a + 0.1 * (b - a);

    let mut ts = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (i, &t) in ensemble.times.iter().enumerate() {
        if t < start || t > b {
            continue;
        }
        let y = (ensemble.means[obs][i] - equilibrium).abs();
        let se = ensemble.stderrs[obs][i];
        if y > 3.0 * se && y > 0.0 && se > 0.0 {
            ts.push(t);
            ys.push(y.ln());
            // Delta method: var(ln y) ~ (se / y)^2.
            ws.push((y / se) * (y / se));
        }
    }
    if ts.len() < 10 {
        return Err(HypoflowError::NoisyWindow { usable: ts.len() });
    }

    let wsum: f64 = ws.iter().sum();
    let t_bar: f64 = ts.iter().zip(&ws).map(|(t, w)| t * w).sum::<f64>() / wsum;
    let y_bar: f64 = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = ts
        .iter()
        .zip(&ws)
        .map(|(t, w)| w * (t - t_bar) * (t - t_bar))
        .sum();
    let sxy: f64 = ts
        .iter()
        .zip(ys.iter())
        .zip(&ws)
        .map(|((t, y), w)| w * (t - t_bar) * (y - y_bar))
        .sum();
    let slope = sxy / sxx;
    let ci_95 = 1.96 / sxx.sqrt();
    Ok(RateEstimate {
        nu_hat: -slope,
        ci_95,
        n_points_used: ts.len(),
    })
}
