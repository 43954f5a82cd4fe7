//! Network parameters and closed-form complexity figures.
//!
//! Subpacketization and transmission counts are exact big integers: the
//! multi-server and multi-antenna baselines exceed `u128` long before the
//! cyclic schemes stop being practical.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Validated network parameters.
///
/// `users` counts real users only; `phantoms` extra users may be added to
/// enlarge the grouping factor. Every other module that needs the effective
/// network works on [`SchemeParams::effective`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub users: usize,
    /// Coded caching gain, `users * cache_size / library_size`.
    pub caching_gain: usize,
    pub antennas: usize,
    /// Spatial multiplexing gain.
    pub multiplexing: usize,
    pub phantoms: usize,
    pub library_size: usize,
    pub file_size: f64,
}

impl SchemeParams {
    /// Parameters with no phantoms, a library of exactly `users` files and unit file size.
    pub fn new(users: usize, caching_gain: usize, antennas: usize, multiplexing: usize) -> Self {
        SchemeParams {
            users,
            caching_gain,
            antennas,
            multiplexing,
            phantoms: 0,
            library_size: users,
            file_size: 1.0,
        }
    }

    pub fn with_phantoms(mut self, phantoms: usize) -> Self {
        self.phantoms = phantoms;
        self
    }

    pub fn with_library_size(mut self, library_size: usize) -> Self {
        self.library_size = library_size;
        self
    }

    pub fn with_file_size(mut self, file_size: f64) -> Self {
        self.file_size = file_size;
        self
    }

    /// Returns the parameters unchanged if every constraint holds.
    pub fn validate(self) -> Result<Self> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        for (name, value) in [
            ("K (users)", self.users),
            ("t (caching gain)", self.caching_gain),
            ("L (antennas)", self.antennas),
            ("alpha (multiplexing gain)", self.multiplexing),
            ("N (library size)", self.library_size),
        ] {
            if value == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        if !(self.file_size.is_finite() && self.file_size > 0.0) {
            return fail(format!(
                "file size must be positive, got {}",
                self.file_size
            ));
        }
        if self.caching_gain > self.multiplexing {
            return fail(format!(
                "t <= alpha violated: t = {} > alpha = {}",
                self.caching_gain, self.multiplexing
            ));
        }
        if self.multiplexing > self.antennas {
            return fail(format!(
                "alpha <= L violated: alpha = {} > L = {}",
                self.multiplexing, self.antennas
            ));
        }
        if self.library_size < self.users {
            return fail(format!(
                "N >= K violated: N = {} < K = {}",
                self.library_size, self.users
            ));
        }
        if self.effective_users() <= self.caching_gain {
            return fail(format!(
                "K + K_f > t violated: K + K_f = {} <= t = {}",
                self.effective_users(),
                self.caching_gain
            ));
        }
        if self.effective_users() < self.caching_gain + self.multiplexing {
            return fail(format!(
                "K + K_f >= t + alpha violated: K + K_f = {} < t + alpha = {}",
                self.effective_users(),
                self.caching_gain + self.multiplexing
            ));
        }
        Ok(self)
    }

    /// Users including phantoms.
    pub fn effective_users(&self) -> usize {
        self.users + self.phantoms
    }

    /// Parameters of the network the scheme is actually built on: phantoms
    /// become ordinary users.
    pub fn effective(&self) -> SchemeParams {
        SchemeParams {
            users: self.effective_users(),
            phantoms: 0,
            library_size: self.library_size.max(self.effective_users()),
            ..self.clone()
        }
    }

    /// Grouping factor of the effective network.
    pub fn phi(&self) -> usize {
        phi(self.effective_users(), self.caching_gain, self.multiplexing)
    }

    /// Per-user cache size in files, `t N / K`.
    pub fn cache_size(&self) -> f64 {
        self.caching_gain as f64 * self.library_size as f64 / self.users as f64
    }

    /// Streams served by every cyclic-scheme transmission.
    pub fn streams_per_transmission(&self) -> usize {
        self.caching_gain + self.multiplexing
    }
}

/// Greatest common divisor of the three gains.
pub fn phi(users: usize, caching_gain: usize, multiplexing: usize) -> usize {
    users.gcd(&caching_gain).gcd(&multiplexing)
}

/// Schemes covered by the complexity comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Cyclic caching without user grouping.
    Lin,
    /// Cyclic caching with user grouping.
    Red,
    /// Multi-server scheme with joint decoding.
    Ms,
    /// Group-based scheme requiring `alpha | t` and `alpha | K`.
    Le,
    /// Reduced-subpacketization MISO scheme requiring `(t+alpha)/(t+1)` integral.
    Mb,
    /// Local caching plus spatial multiplexing, no coded caching.
    NoCc,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Ms,
        Scheme::Lin,
        Scheme::Red,
        Scheme::Le,
        Scheme::Mb,
        Scheme::NoCc,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Lin => "LIN",
            Scheme::Red => "RED",
            Scheme::Ms => "MS",
            Scheme::Le => "LE",
            Scheme::Mb => "MB",
            Scheme::NoCc => "NoCC",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "LIN" => Ok(Scheme::Lin),
            "RED" => Ok(Scheme::Red),
            "MS" => Ok(Scheme::Ms),
            "LE" => Ok(Scheme::Le),
            "MB" => Ok(Scheme::Mb),
            "NOCC" => Ok(Scheme::NoCc),
            _ => Err(Error::InvalidParams(format!("unknown scheme '{s}'"))),
        }
    }
}

/// An exact count, or a marker when the scheme does not apply to the parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Count {
    Exact(BigUint),
    Unavailable,
}

impl Count {
    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Count::Exact(n) => Some(n),
            Count::Unavailable => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.exact().and_then(|n| u64::try_from(n).ok())
    }
}

impl From<u64> for Count {
    fn from(value: u64) -> Self {
        Count::Exact(BigUint::from(value))
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Exact(n) => write!(f, "{n}"),
            Count::Unavailable => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityReport {
    pub scheme: Scheme,
    pub subpacketization: Count,
    pub transmissions: Count,
}

impl ComplexityReport {
    fn unavailable(scheme: Scheme) -> Self {
        ComplexityReport {
            scheme,
            subpacketization: Count::Unavailable,
            transmissions: Count::Unavailable,
        }
    }
}

fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

fn big(n: usize) -> BigUint {
    BigUint::from(n)
}

/// Subpacketization and transmission counts of `scheme` on the effective
/// network (phantoms included).
///
/// Schemes whose structural constraints fail report [`Count::Unavailable`].
pub fn complexity_report(params: &SchemeParams, scheme: Scheme) -> ComplexityReport {
    counts(params, scheme, true)
}

/// Like [`complexity_report`] but ignores applicability constraints wherever
/// the closed form is still defined (MS and MB); useful for rough comparisons.
pub fn nominal_report(params: &SchemeParams, scheme: Scheme) -> ComplexityReport {
    counts(params, scheme, false)
}

fn counts(params: &SchemeParams, scheme: Scheme, enforce: bool) -> ComplexityReport {
    let k = params.effective_users();
    let t = params.caching_gain;
    let a = params.multiplexing;
    if k <= t || a == 0 || t == 0 {
        return ComplexityReport::unavailable(scheme);
    }
    let (subpacketization, transmissions) = match scheme {
        Scheme::Lin => (big(k * (t + a)), big(k * (k - t))),
        Scheme::Red => {
            let phi2 = params.phi().pow(2);
            (big(k * (t + a) / phi2), big(k * (k - t) / phi2))
        }
        Scheme::Ms => {
            // every multicast group has t+alpha users; each subfile is split
            // further across the alpha-1 remaining spatial slots
            if k < t + a {
                return ComplexityReport::unavailable(scheme);
            }
            (binom(k, t) * binom(k - t - 1, a - 1), binom(k, t + a))
        }
        Scheme::Le => {
            if t < a || !t.is_multiple_of(a) || !k.is_multiple_of(a) {
                return ComplexityReport::unavailable(scheme);
            }
            let groups = k / a;
            let tg = t / a;
            (binom(groups, tg), binom(groups, tg + 1))
        }
        Scheme::Mb => {
            if enforce && !(t + a).is_multiple_of(t + 1) {
                return ComplexityReport::unavailable(scheme);
            }
            // K * C(K-1, t) missing subfiles, t+alpha of them per transmission
            let sub = binom(k, t);
            let missing = &sub * big(k - t);
            let per_tx = big(t + a);
            let tx = missing.div_ceil(&per_tx);
            (sub, tx)
        }
        Scheme::NoCc => {
            // the uncached part of every request is split over alpha transmissions
            let a = params.multiplexing.min(params.users);
            (big(a), big(params.users))
        }
    };
    ComplexityReport {
        scheme,
        subpacketization: Count::Exact(subpacketization),
        transmissions: Count::Exact(transmissions),
    }
}

/// Asymptotic order labels for subpacketization and transmission count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityOrder {
    pub subpacketization: &'static str,
    pub transmissions: &'static str,
}

/// Order of growth in `K`, for fixed `t` or for `t` scaling with `K`
/// (constant cache ratio `γ = M/N`, `H` the base-2 binary entropy).
pub fn complexity_order(scheme: Scheme, t_scales: bool) -> ComplexityOrder {
    let (subpacketization, transmissions) = match (scheme, t_scales) {
        (Scheme::Ms, false) => ("O(K^t K^{L-1})", "O(K^{t+L})"),
        (Scheme::Ms, true) => ("O(2^{K·H(γ)} K^{L-1})", "O(2^{K·H(γ)})"),
        (Scheme::Lin | Scheme::Red, false) => ("O(K)", "O(K^2)"),
        (Scheme::Lin | Scheme::Red, true) => ("O(K^2)", "O(K^2)"),
        (Scheme::Le, false) => ("O(K^{t/L})", "O(K^{t/L+1})"),
        (Scheme::Le, true) => ("O(2^{K·H(γ)/L^2})", "O(2^{K·H(γ)/L})"),
        (Scheme::Mb, false) => ("O(K^t)", "O(K^{t+1})"),
        (Scheme::Mb, true) => ("O(2^{K·H(γ)})", "O(2^{K·H(γ)})"),
        (Scheme::NoCc, _) => ("O(1)", "O(K)"),
    };
    ComplexityOrder {
        subpacketization,
        transmissions,
    }
}

/// Binary entropy in bits. `H(0) = H(1) = 0`.
pub fn binary_entropy(gamma: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(gamma) + term(1.0 - gamma)
}
