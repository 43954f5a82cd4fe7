//! Monte-Carlo symmetric-rate evaluation over i.i.d. Rayleigh channels.
//!
//! Each draw gets its own random substream derived from the seed and the draw
//! index, and every SNR point of a draw reuses the same channel vectors, so
//! schemes and beamformers compared under one seed see identical channels.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::beamforming::{
    solve_maxmin, solve_zero_forcing, ChannelRealization, SolverError, SolverOptions,
};
use crate::delivery::{mod1, StreamDescriptor};
use crate::error::Error;
use crate::grouping::{build_scheme, build_unfiltered};
use crate::params::{Scheme, SchemeParams};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamformerKind {
    /// Max-min SINR beamformers from uplink-downlink duality.
    MaxMin,
    ZeroForcing,
}

impl BeamformerKind {
    pub fn label(self) -> &'static str {
        match self {
            BeamformerKind::MaxMin => "maxmin",
            BeamformerKind::ZeroForcing => "zf",
        }
    }
}

impl fmt::Display for BeamformerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BeamformerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "maxmin" | "max-min" | "duality" | "maxmin-duality" => Ok(BeamformerKind::MaxMin),
            "zf" | "zero-forcing" => Ok(BeamformerKind::ZeroForcing),
            other => Err(Error::InvalidParams(format!(
                "unknown beamformer '{other}'"
            ))),
        }
    }
}

/// When channels are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    /// One realization per draw, shared by every transmission.
    #[default]
    Slow,
    /// A fresh realization for every transmission.
    Fast,
}

impl FromStr for Fading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "slow" => Ok(Fading::Slow),
            "fast" | "fast-fading" => Ok(Fading::Fast),
            other => Err(Error::InvalidParams(format!(
                "unknown fading mode '{other}'"
            ))),
        }
    }
}

/// What happens to phantom streams during simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhantomSlotPolicy {
    /// Phantom streams are dropped before beamforming; emptied transmissions take no time.
    #[default]
    Skip,
    /// Phantom streams stay in the beamformer design and consume power and time.
    Keep,
}

impl PhantomSlotPolicy {
    pub fn label(self) -> &'static str {
        match self {
            PhantomSlotPolicy::Skip => "skip",
            PhantomSlotPolicy::Keep => "keep",
        }
    }
}

impl FromStr for PhantomSlotPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "skip" => Ok(PhantomSlotPolicy::Skip),
            "keep" => Ok(PhantomSlotPolicy::Keep),
            other => Err(Error::InvalidParams(format!(
                "unknown phantom slot policy '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SchemeParams,
    /// LIN, RED or NoCC.
    pub scheme: Scheme,
    pub beamformer: BeamformerKind,
    pub snr_points_db: Vec<f64>,
    pub draws: usize,
    pub seed: u64,
    pub fading: Fading,
    pub phantom_policy: PhantomSlotPolicy,
    pub solver: SolverOptions,
}

impl SimConfig {
    /// Max-min beamformers, slow fading, 100 draws, seed 0 and no SNR points yet.
    pub fn new(params: SchemeParams, scheme: Scheme) -> Self {
        SimConfig {
            params,
            scheme,
            beamformer: BeamformerKind::MaxMin,
            snr_points_db: Vec::new(),
            draws: 100,
            seed: 0,
            fading: Fading::Slow,
            phantom_policy: PhantomSlotPolicy::Skip,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(self) -> Result<Self, Error> {
        let params = self.params.clone().validate()?;
        if !matches!(self.scheme, Scheme::Lin | Scheme::Red | Scheme::NoCc) {
            return Err(Error::InvalidParams(format!(
                "only LIN, RED and NoCC can be simulated, not {}",
                self.scheme
            )));
        }
        if self.draws == 0 {
            return Err(Error::InvalidParams("draws must be at least 1".into()));
        }
        if self.snr_points_db.is_empty() {
            return Err(Error::InvalidParams("SNR list is empty".into()));
        }
        if let Some(bad) = self.snr_points_db.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "SNR point {bad} is not finite"
            )));
        }
        Ok(SimConfig { params, ..self })
    }
}

/// One transmission as the rate computation sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledTransmission {
    pub streams: Vec<StreamDescriptor>,
    /// Amount of file every stream carries, in file-size units.
    pub payload: f64,
}

/// Transmissions of a delivery session and the demand they serve.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub transmissions: Vec<ScheduledTransmission>,
    /// Real users whose demand the session delivers.
    pub users: usize,
    pub file_size: f64,
}

/// Unicast baseline without coded caching: transmission `i` serves the `alpha`
/// users `i, i+1, ...` (cyclically) with one uncached piece each, suppressing
/// every stream at the other served users.
pub fn nocc_plan(params: &SchemeParams) -> Result<Schedule, Error> {
    let users = params.users;
    let alpha = params.multiplexing;
    if alpha == 0 || alpha > params.antennas || alpha > users {
        return Err(Error::InvalidParams(format!(
            "NoCC needs 1 <= alpha <= min(L, K), got alpha = {alpha}, L = {}, K = {users}",
            params.antennas
        )));
    }
    let cached = params.caching_gain as f64 / params.effective_users() as f64;
    let payload = (1.0 - cached) * params.file_size / alpha as f64;
    let transmissions = (1..=users)
        .map(|i| {
            let served: Vec<usize> = (0..alpha).map(|m| mod1((i + m) as i64, users)).collect();
            // a user served at offset m of the window receives its piece m + 1
            let streams = served
                .iter()
                .enumerate()
                .map(|(n, &user)| StreamDescriptor {
                    position: n + 1,
                    user,
                    packet: (user + users - i) % users + 1,
                    subpacket: 1,
                    suppress_at: served.iter().copied().filter(|&u| u != user).collect(),
                    group: None,
                })
                .collect();
            ScheduledTransmission { streams, payload }
        })
        .collect();
    Ok(Schedule {
        transmissions,
        users,
        file_size: params.file_size,
    })
}

/// Schedule simulated for `config`.
pub fn build_schedule(config: &SimConfig) -> Result<Schedule, Error> {
    let params = &config.params;
    if config.scheme == Scheme::NoCc {
        return nocc_plan(params);
    }
    let plan = match config.phantom_policy {
        PhantomSlotPolicy::Skip => build_scheme(params, config.scheme)?,
        PhantomSlotPolicy::Keep => build_unfiltered(params, config.scheme)?,
    };
    let payload = params.file_size / plan.subpacketization() as f64;
    Ok(Schedule {
        transmissions: plan
            .transmissions
            .into_iter()
            .map(|t| ScheduledTransmission {
                streams: t.streams,
                payload,
            })
            .collect(),
        users: params.users,
        file_size: params.file_size,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricRate<T> {
    pub rate: T,
    /// Some transmission had zero rate, so the session never completes.
    pub degenerate: bool,
}

/// `K f / sum_i (payload_i / rate_i)` with one rate per transmission.
pub fn symmetric_rate<T: Real>(schedule: &Schedule, rates: &[T]) -> SymmetricRate<T> {
    assert_eq!(
        rates.len(),
        schedule.transmissions.len(),
        "one rate per transmission"
    );
    if rates
        .iter()
        .any(|r| r.partial_cmp(&T::zero()) != Some(Ordering::Greater))
    {
        return SymmetricRate {
            rate: T::zero(),
            degenerate: true,
        };
    }
    let time = schedule
        .transmissions
        .iter()
        .zip(rates)
        .fold(T::zero(), |acc, (tx, &r)| acc + T::lit(tx.payload) / r);
    SymmetricRate {
        rate: T::lit(schedule.users as f64 * schedule.file_size) / time,
        degenerate: false,
    }
}

/// Random substream of draw `draw`.
pub fn channel_stream(seed: u64, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    rng
}

/// Transmit power for an SNR in dB at unit noise power.
pub fn power_budget(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Channels of all users (phantoms included) with i.i.d. unit-variance
/// circularly-symmetric complex Gaussian entries; unit noise power.
pub fn draw_channel<T: Real, R: Rng + ?Sized>(
    params: &SchemeParams,
    snr_db: f64,
    rng: &mut R,
) -> ChannelRealization<T> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let channels = (0..params.effective_users())
        .map(|_| {
            DVector::from_fn(params.antennas, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re * scale), T::lit(im * scale))
            })
        })
        .collect();
    ChannelRealization::new(channels, T::one(), T::lit(power_budget(snr_db)))
        .expect("drawn channels are well formed")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] Error),

    #[error("solver failed at {snr_db} dB, draw {draw}, transmission {transmission}: {source}")]
    Solver {
        snr_db: f64,
        draw: usize,
        transmission: usize,
        source: SolverError,
    },
}

/// Balanced SINR of every transmission in `schedule`, with `channels` holding
/// one realization (slow fading) or one per transmission. Errors carry the
/// 0-based transmission index.
pub fn balanced_sinrs<T: Real>(
    schedule: &Schedule,
    channels: &[ChannelRealization<T>],
    beamformer: BeamformerKind,
    options: &SolverOptions,
) -> Result<Vec<T>, (usize, SolverError)> {
    schedule
        .transmissions
        .iter()
        .enumerate()
        .map(|(i, tx)| {
            let channel = &channels[if channels.len() == 1 { 0 } else { i }];
            let solution = match beamformer {
                BeamformerKind::MaxMin => solve_maxmin(channel, &tx.streams, options),
                BeamformerKind::ZeroForcing => solve_zero_forcing(channel, &tx.streams),
            };
            solution.map(|s| s.balanced_sinr).map_err(|e| (i, e))
        })
        .collect()
}

/// Channels of draw `draw` at `snr_db`: one per draw or one per transmission.
pub fn draw_channels<T: Real>(
    config: &SimConfig,
    schedule: &Schedule,
    draw: usize,
    snr_db: f64,
) -> Vec<ChannelRealization<T>> {
    let mut rng = channel_stream(config.seed, draw as u64);
    let count = match config.fading {
        Fading::Slow => 1,
        Fading::Fast => schedule.transmissions.len(),
    };
    (0..count)
        .map(|_| draw_channel(&config.params, snr_db, &mut rng))
        .collect()
}

/// Symmetric rate at every SNR point for one draw, and whether it degenerated.
fn run_draw<T: Real>(
    config: &SimConfig,
    schedule: &Schedule,
    draw: usize,
) -> Result<Vec<SymmetricRate<T>>, SimError> {
    config
        .snr_points_db
        .iter()
        .map(|&snr_db| {
            let channels = draw_channels::<T>(config, schedule, draw, snr_db);
            let sinrs = balanced_sinrs(schedule, &channels, config.beamformer, &config.solver)
                .map_err(|(transmission, source)| SimError::Solver {
                    snr_db,
                    draw,
                    transmission,
                    source,
                })?;
            let rates: Vec<T> = sinrs.into_iter().map(|g| (T::one() + g).ln()).collect();
            Ok(symmetric_rate(schedule, &rates))
        })
        .collect()
}

/// Mean symmetric rate over the draws at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint<T> {
    pub snr_db: f64,
    /// Nats per channel use, for unit file size.
    pub mean_rate: T,
    pub std_err: T,
    pub per_draw: Vec<T>,
    pub degenerate_draws: usize,
}

/// Runs the Monte-Carlo sweep. Results depend only on the configuration,
/// not on thread scheduling.
pub fn simulate<T: Real>(config: &SimConfig) -> Result<Vec<RatePoint<T>>, SimError> {
    let config = config.clone().validate()?;
    let schedule = build_schedule(&config)?;
    let per_draw: Vec<Vec<SymmetricRate<T>>> = (0..config.draws)
        .into_par_iter()
        .map(|draw| run_draw(&config, &schedule, draw))
        .collect::<Result<_, _>>()?;
    let n = T::lit(config.draws as f64);
    Ok(config
        .snr_points_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let rates: Vec<T> = per_draw.iter().map(|d| d[i].rate).collect();
            let mean = rates.iter().fold(T::zero(), |a, &r| a + r) / n;
            let std_err = if config.draws > 1 {
                let ss = rates
                    .iter()
                    .fold(T::zero(), |a, &r| a + (r - mean) * (r - mean));
                (ss / (n - T::one()) / n).sqrt()
            } else {
                T::zero()
            };
            RatePoint {
                snr_db,
                mean_rate: mean,
                std_err,
                per_draw: rates,
                degenerate_draws: per_draw.iter().filter(|d| d[i].degenerate).count(),
            }
        })
        .collect())
}
