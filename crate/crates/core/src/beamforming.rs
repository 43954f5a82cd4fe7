//! Per-transmission beamformer design.
//!
//! Every stream of a transmission must be decodable at its user while the
//! streams that user does not cache are suppressed there. The max-min SINR
//! design works on the dual uplink: bisection on a common target SINR, a
//! fixed-point search for the uplink powers meeting it, and a linear solve
//! that maps the normalized MMSE receivers back to downlink powers. A
//! zero-forcing design is provided as a baseline.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use thiserror::Error;

use crate::delivery::StreamDescriptor;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("stream {stream} refers to user {user}, outside the {users} users with a channel")]
    UnknownUser {
        stream: usize,
        user: usize,
        users: usize,
    },

    #[error("user {user} has an all-zero channel")]
    ZeroChannel { user: usize },

    #[error("users suppressed by stream {stream} have linearly dependent channels")]
    RankDeficient { stream: usize },

    #[error("singular matrix while {0}")]
    Singular(&'static str),

    #[error("could not bracket the balanced SINR: {0}")]
    Bracket(String),
}

/// Channel vectors of all users plus noise power and transmit power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T: Real> {
    channels: Vec<DVector<Complex<T>>>,
    noise_power: T,
    power_budget: T,
}

impl<T: Real> ChannelRealization<T> {
    pub fn new(
        channels: Vec<DVector<Complex<T>>>,
        noise_power: T,
        power_budget: T,
    ) -> Result<Self, SolverError> {
        let antennas = channels.first().map_or(0, |h| h.len());
        if antennas == 0 {
            return Err(SolverError::InvalidChannel(
                "need at least one user and one antenna".into(),
            ));
        }
        if let Some(k) = channels.iter().position(|h| h.len() != antennas) {
            return Err(SolverError::InvalidChannel(format!(
                "user {} has {} antennas, expected {antennas}",
                k + 1,
                channels[k].len()
            )));
        }
        if !(noise_power > T::zero() && power_budget > T::zero()) {
            return Err(SolverError::InvalidChannel(format!(
                "noise power and power budget must be positive, got {noise_power} and {power_budget}"
            )));
        }
        Ok(ChannelRealization {
            channels,
            noise_power,
            power_budget,
        })
    }

    pub fn users(&self) -> usize {
        self.channels.len()
    }

    pub fn antennas(&self) -> usize {
        self.channels[0].len()
    }

    pub fn noise_power(&self) -> T {
        self.noise_power
    }

    pub fn power_budget(&self) -> T {
        self.power_budget
    }

    /// Same channels under another power budget.
    pub fn with_power_budget(&self, power_budget: T) -> Result<Self, SolverError> {
        Self::new(self.channels.clone(), self.noise_power, power_budget)
    }

    /// Channel of `user` (1-based); panics when out of range.
    pub fn channel(&self, user: usize) -> &DVector<Complex<T>> {
        &self.channels[user - 1]
    }
}

/// Who interferes with whom inside one transmission, by stream index (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamCoupling {
    /// Owner of each stream.
    pub users: Vec<usize>,
    /// Streams whose suppress set contains this stream's user: the residual
    /// downlink interference it sees.
    pub downlink_interferers: Vec<Vec<usize>>,
    /// Streams whose users are in this stream's suppress set: the interference
    /// its receiver sees in the dual uplink.
    pub uplink_interferers: Vec<Vec<usize>>,
}

impl StreamCoupling {
    pub fn new(streams: &[StreamDescriptor]) -> Self {
        let users: Vec<usize> = streams.iter().map(|s| s.user).collect();
        let pairs = |interferes: &dyn Fn(usize, usize) -> bool| -> Vec<Vec<usize>> {
            (0..streams.len())
                .map(|n| {
                    (0..streams.len())
                        .filter(|&b| b != n && interferes(n, b))
                        .collect()
                })
                .collect()
        };
        let downlink_interferers = pairs(&|n, b| streams[b].suppress_at.contains(&users[n]));
        let uplink_interferers = pairs(&|n, b| streams[n].suppress_at.contains(&users[b]));
        StreamCoupling {
            users,
            downlink_interferers,
            uplink_interferers,
        }
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    fn check_users<T: Real>(&self, channel: &ChannelRealization<T>) -> Result<(), SolverError> {
        for (stream, &user) in self.users.iter().enumerate() {
            if user == 0 || user > channel.users() {
                return Err(SolverError::UnknownUser {
                    stream: stream + 1,
                    user,
                    users: channel.users(),
                });
            }
        }
        Ok(())
    }
}

/// Tolerances of the max-min solver, relative to the power budget or target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bisection stops once the uplink power is this close to the budget, relative.
    pub power_tolerance: f64,
    /// Fixed point stops once every uplink SINR is this close to the target, relative.
    pub inner_tolerance: f64,
    pub max_inner_iterations: usize,
    pub max_outer_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            power_tolerance: 1e-8,
            inner_tolerance: 1e-9,
            max_inner_iterations: 500,
            max_outer_iterations: 200,
        }
    }
}

/// Uplink quantities at the max-min solution.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityWorkspace<T: Real> {
    pub uplink_powers: Vec<T>,
    /// Unit-norm MMSE receive vectors, reused as downlink beam directions.
    pub receive_vectors: Vec<DVector<Complex<T>>>,
    /// `coupling[(n, b)] = |h_n^H v_b|^2` when `b == n` or stream `b` interferes at stream `n`'s user.
    pub coupling: DMatrix<T>,
    pub scalings: Vec<T>,
    pub target: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSolution<T: Real> {
    pub beamformers: Vec<DVector<Complex<T>>>,
    /// Downlink power of each stream, `|w_n|^2`.
    pub powers: Vec<T>,
    /// Downlink SINR each stream achieves.
    pub sinrs: Vec<T>,
    /// Common SINR level the design targets; the rate of the transmission follows from it.
    pub balanced_sinr: T,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Present for the duality design only.
    pub workspace: Option<DualityWorkspace<T>>,
}

impl<T: Real> BeamformerSolution<T> {
    pub fn total_power(&self) -> T {
        self.powers.iter().fold(T::zero(), |a, &p| a + p)
    }

    pub fn min_sinr(&self) -> T {
        self.sinrs
            .iter()
            .copied()
            .reduce(|a, b| if b < a { b } else { a })
            .unwrap_or_else(T::zero)
    }
}

/// How a fixed-point run for one target SINR ended.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedPoint<T: Real> {
    Converged {
        powers: Vec<T>,
        iterations: usize,
    },
    /// The powers passed the cap, so the target is infeasible under it.
    Exceeded {
        iterations: usize,
    },
    NotConverged {
        powers: Vec<T>,
        iterations: usize,
    },
}

fn norm_sqr<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

fn inner<T: Real>(a: &DVector<Complex<T>>, b: &DVector<Complex<T>>) -> Complex<T> {
    a.dotc(b)
}

fn sum<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |a, &b| a + b)
}

/// `C^{-1} h` for the uplink interference-plus-noise matrix of stream `n`.
fn uplink_filter<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
    uplink_powers: &[T],
    n: usize,
) -> Result<DVector<Complex<T>>, SolverError> {
    let l = channel.antennas();
    let mut cov =
        DMatrix::<Complex<T>>::identity(l, l) * Complex::new(channel.noise_power(), T::zero());
    for &b in &coupling.uplink_interferers[n] {
        let nu = uplink_powers[b];
        if nu > T::zero() {
            let h = channel.channel(coupling.users[b]);
            cov.gerc(
                Complex::new(nu, T::zero()),
                h,
                h,
                Complex::new(T::one(), T::zero()),
            );
        }
    }
    let h = channel.channel(coupling.users[n]);
    cov.cholesky()
        .map(|c| c.solve(h))
        .ok_or(SolverError::Singular("inverting the uplink covariance"))
}

/// `h_n^H C_n^{-1} h_n` for every stream: the uplink SINR per unit uplink power.
fn uplink_gains<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
    uplink_powers: &[T],
) -> Result<Vec<T>, SolverError> {
    (0..coupling.len())
        .map(|n| {
            let x = uplink_filter(channel, coupling, uplink_powers, n)?;
            Ok(inner(channel.channel(coupling.users[n]), &x).re)
        })
        .collect()
}

/// Dual-uplink SINR of stream `n` (0-based) under `uplink_powers`.
pub fn uplink_sinr<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
    uplink_powers: &[T],
    n: usize,
) -> Result<T, SolverError> {
    coupling.check_users(channel)?;
    let x = uplink_filter(channel, coupling, uplink_powers, n)?;
    Ok(uplink_powers[n] * inner(channel.channel(coupling.users[n]), &x).re)
}

/// Iterates `nu_n <- target / (h_n^H C_n^{-1} h_n)` from `start` (zero when
/// absent). From below the iterates increase monotonically, so passing
/// `power_cap` proves the target infeasible under that cap.
pub fn inner_power_fixed_point<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
    target: T,
    start: Option<&[T]>,
    power_cap: Option<T>,
    options: &SolverOptions,
) -> Result<FixedPoint<T>, SolverError> {
    coupling.check_users(channel)?;
    let tol = T::tolerance(options.inner_tolerance) * target;
    let mut powers = start.map_or_else(|| vec![T::zero(); coupling.len()], <[T]>::to_vec);
    for iteration in 0..options.max_inner_iterations {
        let gains = uplink_gains(channel, coupling, &powers)?;
        let converged = powers
            .iter()
            .zip(&gains)
            .all(|(&nu, &g)| (nu * g - target).abs() <= tol);
        for (nu, g) in powers.iter_mut().zip(gains) {
            *nu = target / g;
        }
        if converged {
            return Ok(FixedPoint::Converged {
                powers,
                iterations: iteration + 1,
            });
        }
        if power_cap.is_some_and(|cap| sum(&powers) > cap) {
            return Ok(FixedPoint::Exceeded {
                iterations: iteration + 1,
            });
        }
    }
    Ok(FixedPoint::NotConverged {
        powers,
        iterations: options.max_inner_iterations,
    })
}

fn check_served_channels<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
) -> Result<(), SolverError> {
    coupling.check_users(channel)?;
    for &user in &coupling.users {
        if channel.channel(user).norm_squared() <= T::zero() {
            return Err(SolverError::ZeroChannel { user });
        }
    }
    Ok(())
}

/// Powers that meet `target` exactly with the normalized MMSE receivers of
/// `uplink_powers`, or `None` when no positive solution exists. Any such
/// point proves the target feasible; it bounds the minimal powers from above.
fn feasibility_certificate<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
    target: T,
    uplink_powers: &[T],
) -> Result<Option<Vec<T>>, SolverError> {
    let n_streams = coupling.len();
    let mut system = DMatrix::<T>::identity(n_streams, n_streams);
    let mut rhs = DVector::<T>::zeros(n_streams);
    for n in 0..n_streams {
        let x = uplink_filter(channel, coupling, uplink_powers, n)?;
        let v = x.unscale(x.norm());
        let own = norm_sqr(inner(channel.channel(coupling.users[n]), &v));
        for &b in &coupling.uplink_interferers[n] {
            system[(n, b)] -=
                target * norm_sqr(inner(channel.channel(coupling.users[b]), &v)) / own;
        }
        rhs[n] = target * channel.noise_power() / own;
    }
    Ok(system
        .lu()
        .solve(&rhs)
        .filter(|nu| nu.iter().all(|&p| p > T::zero() && p.is_finite()))
        .map(|nu| nu.iter().copied().collect()))
}

/// Max-min SINR beamformers for one transmission under the total power budget.
pub fn solve_maxmin<T: Real>(
    channel: &ChannelRealization<T>,
    streams: &[StreamDescriptor],
    options: &SolverOptions,
) -> Result<BeamformerSolution<T>, SolverError> {
    let coupling = StreamCoupling::new(streams);
    check_served_channels(channel, &coupling)?;
    if coupling.is_empty() {
        return Err(SolverError::InvalidChannel(
            "transmission has no streams".into(),
        ));
    }
    let budget = channel.power_budget();
    let power_tol = T::tolerance(options.power_tolerance) * budget;
    let max_gain = coupling
        .users
        .iter()
        .map(|&u| channel.channel(u).norm_squared())
        .fold(T::zero(), |a, b| if b > a { b } else { a });

    let mut low = T::zero();
    let mut high = budget * max_gain / channel.noise_power();
    // lower iterate of the last feasible target: a valid warm start for any higher target
    let mut warm: Option<Vec<T>> = None;
    let mut best: Option<(T, Vec<T>)> = None;
    let mut inner_iterations = 0;
    let mut outer = 0;
    let (target, uplink_powers) = loop {
        if outer == options.max_outer_iterations || high - low <= T::default_epsilon() * high {
            // the budget cannot be resolved any finer; the last feasible target is max-min
            // optimal to working precision
            match best {
                Some(found) => break found,
                None => {
                    return Err(SolverError::Bracket(format!(
                        "no feasible target in [{low}, {high}] after {outer} steps"
                    )))
                }
            }
        }
        outer += 1;
        let mid = (low + high) / T::lit(2.0);
        let (lower, candidate) = match inner_power_fixed_point(
            channel,
            &coupling,
            mid,
            warm.as_deref(),
            Some(budget),
            options,
        )? {
            FixedPoint::Converged { powers, iterations } => {
                inner_iterations += iterations;
                (powers.clone(), Some(powers))
            }
            FixedPoint::NotConverged { powers, iterations } => {
                inner_iterations += iterations;
                let certificate = feasibility_certificate(channel, &coupling, mid, &powers)?;
                (powers, certificate)
            }
            FixedPoint::Exceeded { iterations } => {
                inner_iterations += iterations;
                high = mid;
                continue;
            }
        };
        match candidate {
            Some(powers) => {
                let slack = budget - sum(&powers);
                if slack.abs() < power_tol {
                    break (mid, powers);
                }
                if slack > T::zero() {
                    low = mid;
                    warm = Some(lower);
                    best = Some((mid, powers));
                } else {
                    high = mid;
                }
            }
            None => high = mid,
        }
    };

    let workspace = recover_downlink(channel, &coupling, uplink_powers, target)?;
    let powers = downlink_powers(channel, &workspace)?;
    let beamformers: Vec<_> = workspace
        .receive_vectors
        .iter()
        .zip(&powers)
        .map(|(v, &p)| v * Complex::new(p.max(T::zero()).sqrt(), T::zero()))
        .collect();
    let sinrs = downlink_sinrs(channel, &coupling, &beamformers);
    Ok(BeamformerSolution {
        beamformers,
        powers,
        sinrs,
        balanced_sinr: target,
        outer_iterations: outer,
        inner_iterations,
        workspace: Some(workspace),
    })
}

/// Normalized MMSE receivers, coupling matrix and scalings at uplink powers `uplink_powers`.
fn recover_downlink<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
    uplink_powers: Vec<T>,
    target: T,
) -> Result<DualityWorkspace<T>, SolverError> {
    let n_streams = coupling.len();
    let mut receive_vectors = Vec::with_capacity(n_streams);
    let mut uplink_sinrs = Vec::with_capacity(n_streams);
    for n in 0..n_streams {
        let x = uplink_filter(channel, coupling, &uplink_powers, n)?;
        let h = channel.channel(coupling.users[n]);
        uplink_sinrs.push(uplink_powers[n] * inner(h, &x).re);
        let norm = x.norm();
        receive_vectors.push(x.unscale(norm));
    }
    let mut g = DMatrix::<T>::zeros(n_streams, n_streams);
    for n in 0..n_streams {
        let h = channel.channel(coupling.users[n]);
        for &b in std::iter::once(&n).chain(&coupling.downlink_interferers[n]) {
            g[(n, b)] = norm_sqr(inner(h, &receive_vectors[b]));
        }
    }
    let scalings = (0..n_streams)
        .map(|n| {
            let gamma = uplink_sinrs[n];
            gamma / ((T::one() + gamma) * g[(n, n)])
        })
        .collect();
    Ok(DualityWorkspace {
        uplink_powers,
        receive_vectors,
        coupling: g,
        scalings,
        target,
    })
}

/// Downlink powers `(I - D G)^{-1} N0 a` with `D = diag(a)`.
fn downlink_powers<T: Real>(
    channel: &ChannelRealization<T>,
    workspace: &DualityWorkspace<T>,
) -> Result<Vec<T>, SolverError> {
    let n = workspace.scalings.len();
    let a = DVector::from_vec(workspace.scalings.clone());
    let system = DMatrix::<T>::identity(n, n) - DMatrix::from_diagonal(&a) * &workspace.coupling;
    let rhs = a * channel.noise_power();
    system
        .lu()
        .solve(&rhs)
        .map(|rho| rho.iter().copied().collect())
        .ok_or(SolverError::Singular("recovering downlink powers"))
}

/// Downlink SINR of every stream: cached streams are cancelled before
/// detection, so only streams that are supposed to be suppressed at the user
/// count as interference.
pub fn downlink_sinrs<T: Real>(
    channel: &ChannelRealization<T>,
    coupling: &StreamCoupling,
    beamformers: &[DVector<Complex<T>>],
) -> Vec<T> {
    (0..coupling.len())
        .map(|n| {
            let h = channel.channel(coupling.users[n]);
            let signal = norm_sqr(inner(h, &beamformers[n]));
            let interference = coupling.downlink_interferers[n]
                .iter()
                .map(|&b| norm_sqr(inner(h, &beamformers[b])))
                .fold(T::zero(), |a, b| a + b);
            signal / (interference + channel.noise_power())
        })
        .collect()
}

/// Zero-forcing beamformers: each stream is projected onto the null space of
/// the channels it must be suppressed at, and powers equalize the SINRs under
/// the budget. A stream whose projection vanishes gets no power and SINR 0.
pub fn solve_zero_forcing<T: Real>(
    channel: &ChannelRealization<T>,
    streams: &[StreamDescriptor],
) -> Result<BeamformerSolution<T>, SolverError> {
    let coupling = StreamCoupling::new(streams);
    check_served_channels(channel, &coupling)?;
    if coupling.is_empty() {
        return Err(SolverError::InvalidChannel(
            "transmission has no streams".into(),
        ));
    }
    let l = channel.antennas();
    let rank_tol = T::lit(1e-10);
    let mut directions = Vec::with_capacity(streams.len());
    let mut gains = Vec::with_capacity(streams.len());
    for (n, stream) in streams.iter().enumerate() {
        for &u in &stream.suppress_at {
            if u == 0 || u > channel.users() {
                return Err(SolverError::UnknownUser {
                    stream: n + 1,
                    user: u,
                    users: channel.users(),
                });
            }
        }
        let h = channel.channel(stream.user);
        let m = stream.suppress_at.len();
        let projected = if m == 0 {
            h.clone()
        } else {
            if m >= l {
                return Err(SolverError::RankDeficient { stream: n + 1 });
            }
            let columns: Vec<_> = stream
                .suppress_at
                .iter()
                .map(|&u| channel.channel(u).clone())
                .collect();
            let scale = columns
                .iter()
                .map(|c| c.norm())
                .fold(T::zero(), |a, b| if b > a { b } else { a });
            let qr = DMatrix::from_columns(&columns).qr();
            let r = qr.r();
            if (0..m).any(|i| r[(i, i)].modulus() <= rank_tol * scale) {
                return Err(SolverError::RankDeficient { stream: n + 1 });
            }
            let q = qr.q();
            h - &q * q.ad_mul(h)
        };
        let gain = projected.norm_squared();
        if gain <= rank_tol * rank_tol * h.norm_squared() {
            directions.push(DVector::zeros(l));
            gains.push(T::zero());
        } else {
            directions.push(projected.unscale(gain.sqrt()));
            gains.push(gain);
        }
    }
    let noise = channel.noise_power();
    let inverse_sum = gains
        .iter()
        .filter(|&&g| g > T::zero())
        .fold(T::zero(), |a, &g| a + noise / g);
    let level = channel.power_budget() / inverse_sum;
    let powers: Vec<T> = gains
        .iter()
        .map(|&g| {
            if g > T::zero() {
                level * noise / g
            } else {
                T::zero()
            }
        })
        .collect();
    let beamformers: Vec<_> = directions
        .into_iter()
        .zip(&powers)
        .map(|(v, &p)| v * Complex::new(p.sqrt(), T::zero()))
        .collect();
    let sinrs = downlink_sinrs(channel, &coupling, &beamformers);
    let balanced_sinr = if gains.iter().any(|&g| g <= T::zero()) {
        T::zero()
    } else {
        level
    };
    Ok(BeamformerSolution {
        beamformers,
        powers,
        sinrs,
        balanced_sinr,
        outer_iterations: 0,
        inner_iterations: 0,
        workspace: None,
    })
}
