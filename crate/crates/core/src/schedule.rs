//! Discrete noise schedules and inference step maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::LatentVideo;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaKind {
    Linear,
    /// Linear in `√β`, squared.
    ScaledLinear,
}

/// Reverse-step noise level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaKind {
    /// `σ_t² = β_t`
    Beta,
    /// `σ_t² = (1 − ᾱ_{t−1}) / (1 − ᾱ_t) · β_t`
    BetaTilde,
}

/// The serialized form of a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleParams {
    #[serde(rename = "T")]
    pub train_steps: usize,
    pub kind: BetaKind,
    pub beta_start: f64,
    pub beta_end: f64,
    pub sigma_kind: SigmaKind,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self {
            train_steps: 1000,
            kind: BetaKind::Linear,
            beta_start: 1e-4,
            beta_end: 0.02,
            sigma_kind: SigmaKind::Beta,
        }
    }
}

impl ScheduleParams {
    pub fn build(&self) -> Result<NoiseSchedule> {
        make_schedule(
            self.train_steps,
            self.beta_start,
            self.beta_end,
            self.kind,
            self.sigma_kind,
        )
    }
}

/// β/α/ᾱ/σ tables for timesteps `1..=T`. Index 0 of each table is timestep 1.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSchedule {
    params: ScheduleParams,
    betas: Vec<f64>,
    alphas: Vec<f64>,
    alpha_bars: Vec<f64>,
    sigmas: Vec<f64>,
}

/// Coefficients of one reverse step `t → t_prev`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_bar: f64,
    pub alpha_bar_prev: f64,
    pub sigma: f64,
}

fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let step = (end - start) / (n - 1) as f64;
    (0..n).map(|i| start + step * i as f64).collect()
}

pub fn make_schedule(
    train_steps: usize,
    beta_start: f64,
    beta_end: f64,
    kind: BetaKind,
    sigma_kind: SigmaKind,
) -> Result<NoiseSchedule> {
    if train_steps == 0 {
        return Err(Error::InvalidSchedule("T must be at least 1".into()));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::InvalidSchedule(format!(
            "need 0 < beta_start <= beta_end < 1, got {beta_start} and {beta_end}"
        )));
    }
    let betas = match kind {
        BetaKind::Linear => linspace(beta_start, beta_end, train_steps),
        BetaKind::ScaledLinear => linspace(beta_start.sqrt(), beta_end.sqrt(), train_steps)
            .into_iter()
            .map(|b| b * b)
            .collect(),
    };
    if betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) || betas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidSchedule(
            "betas not monotone within (0, 1)".into(),
        ));
    }
    let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
    let mut alpha_bars = Vec::with_capacity(train_steps);
    let mut acc = 1.0;
    for &a in &alphas {
        acc *= a;
        alpha_bars.push(acc);
    }
    if alpha_bars.iter().any(|&a| a <= 0.0) {
        return Err(Error::InvalidSchedule("alpha_bar underflows to zero".into()));
    }
    let sigmas = (0..train_steps)
        .map(|i| {
            let prev = if i == 0 { 1.0 } else { alpha_bars[i - 1] };
            sigma_for(sigma_kind, betas[i], alpha_bars[i], prev)
        })
        .collect();
    Ok(NoiseSchedule {
        params: ScheduleParams {
            train_steps,
            kind,
            beta_start,
            beta_end,
            sigma_kind,
        },
        betas,
        alphas,
        alpha_bars,
        sigmas,
    })
}

fn sigma_for(kind: SigmaKind, beta: f64, alpha_bar: f64, alpha_bar_prev: f64) -> f64 {
    match kind {
        SigmaKind::Beta => beta.sqrt(),
        SigmaKind::BetaTilde => ((1.0 - alpha_bar_prev) / (1.0 - alpha_bar) * beta).sqrt(),
    }
}

impl NoiseSchedule {
    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    pub fn train_steps(&self) -> usize {
        self.betas.len()
    }

    pub fn check_timestep(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.train_steps() {
            return Err(Error::TimestepOutOfRange {
                t,
                max: self.train_steps(),
            });
        }
        Ok(())
    }

    // Accessors take 1-based timesteps and panic outside 1..=T.

    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t - 1]
    }

    pub fn alpha(&self, t: usize) -> f64 {
        self.alphas[t - 1]
    }

    /// `ᾱ_t`, with `ᾱ_0 = 1`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        if t == 0 {
            1.0
        } else {
            self.alpha_bars[t - 1]
        }
    }

    pub fn sigma(&self, t: usize) -> f64 {
        self.sigmas[t - 1]
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars
    }

    /// Coefficients for the reverse step `t → t_prev`. Adjacent steps read
    /// the tables directly; wider jumps use `α = ᾱ_t / ᾱ_{t_prev}`.
    pub fn step_coefficients(&self, t: usize, t_prev: usize) -> Result<StepCoefficients> {
        self.check_timestep(t)?;
        if t_prev >= t {
            return Err(Error::Domain(format!(
                "step must move to an earlier timestep, got {t} -> {t_prev}"
            )));
        }
        if t_prev + 1 == t {
            return Ok(StepCoefficients {
                alpha: self.alpha(t),
                beta: self.beta(t),
                alpha_bar: self.alpha_bar(t),
                alpha_bar_prev: self.alpha_bar(t_prev),
                sigma: self.sigma(t),
            });
        }
        let alpha_bar = self.alpha_bar(t);
        let alpha_bar_prev = self.alpha_bar(t_prev);
        let alpha = alpha_bar / alpha_bar_prev;
        let beta = 1.0 - alpha;
        Ok(StepCoefficients {
            alpha,
            beta,
            alpha_bar,
            alpha_bar_prev,
            sigma: sigma_for(self.params.sigma_kind, beta, alpha_bar, alpha_bar_prev),
        })
    }
}

/// `s_t = √ᾱ_t·s0 + √(1−ᾱ_t)·eps`.
pub fn forward_perturb(
    s0: &LatentVideo,
    t: usize,
    eps: &LatentVideo,
    sched: &NoiseSchedule,
) -> Result<LatentVideo> {
    sched.check_timestep(t)?;
    let ab = sched.alpha_bar(t);
    s0.lincomb(ab.sqrt(), eps, (1.0 - ab).sqrt())
}

/// Training timesteps visited at inference, strictly decreasing from `T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepMap {
    pub train_steps: usize,
    pub indices: Vec<usize>,
}

impl StepMap {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `(t, t_prev)` for every reverse step; the last step lands on 0.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.indices.iter().enumerate().map(|(i, &t)| {
            let prev = self.indices.get(i + 1).copied().unwrap_or(0);
            (t, prev)
        })
    }
}

/// Evenly spaced timesteps `T, T−k, T−2k, …` with stride `k = ⌊T / steps⌋`.
pub fn make_step_map(train_steps: usize, infer_steps: usize) -> Result<StepMap> {
    if infer_steps == 0 || infer_steps > train_steps {
        return Err(Error::param(
            "infer_steps",
            format!("must be in 1..={train_steps}, got {infer_steps}"),
        ));
    }
    let stride = train_steps / infer_steps;
    let indices = (0..infer_steps).map(|i| train_steps - i * stride).collect();
    Ok(StepMap {
        train_steps,
        indices,
    })
}
