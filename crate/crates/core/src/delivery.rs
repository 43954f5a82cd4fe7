//! Delivery plan for the cyclic scheme.
//!
//! Delivery runs in `K` rounds of `K - t` transmissions. Transmission `j` of
//! round `r` serves the users of a user index vector with the packets of a
//! packet index vector, one stream per user. Round 1 is built directly; every
//! later round is the previous one shifted diagonally by one user and one
//! packet. User `k` is assumed to request file `k`, so subpacket counters are
//! keyed by `(user, packet)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{check_index, Error, Result};
use crate::grouping::GroupingMap;
use crate::params::SchemeParams;
use crate::placement::PlacementMatrix;

/// Modulo with an offset of one: maps any integer into `1..=modulus`.
pub fn mod1(value: i64, modulus: usize) -> usize {
    assert!(modulus >= 1, "mod1 needs a positive modulus");
    ((value - 1).rem_euclid(modulus as i64) + 1) as usize
}

/// User and packet index vectors of one transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexVectors {
    pub users: Vec<usize>,
    pub packets: Vec<usize>,
}

/// Index vectors of transmission `slot` in round `round`, on the effective
/// network of `params`.
pub fn index_vectors(params: &SchemeParams, slot: usize, round: usize) -> Result<IndexVectors> {
    let k = params.effective_users();
    let t = params.caching_gain;
    let alpha = params.multiplexing;
    if t >= k {
        return Err(Error::InvalidParams(format!(
            "need t < K, got t = {t}, K = {k}"
        )));
    }
    check_index("slot", slot, k - t)?;
    check_index("round", round, k)?;
    let span = k - t;
    let (slot, t_i) = (slot as i64, t as i64);

    let mut users: Vec<usize> = (1..=t).collect();
    users.extend((1..=alpha as i64).map(|m| mod1(m + slot - 1, span) + t));

    let mut packets: Vec<usize> = (1..=t_i)
        .map(|i| mod1(t_i + slot - i, span) + i as usize)
        .collect();
    packets.extend(std::iter::repeat_n(1, alpha));

    // round 1 is unshifted; round r moves r-1 steps down the diagonal
    let shift = round as i64 - 1;
    if shift > 0 {
        for x in users.iter_mut().chain(packets.iter_mut()) {
            *x = mod1(*x as i64 + shift, k);
        }
    }
    Ok(IndexVectors { users, packets })
}

/// Served users, other than the owner of position `position`, that do not
/// cache that position's packet.
///
/// The result must hold exactly `alpha - 1` users, where `alpha` is the number
/// of served users minus the caching gain; anything else means the vectors do
/// not come from a valid plan.
pub fn interference_set(
    placement: &PlacementMatrix,
    users: &[usize],
    packets: &[usize],
    position: usize,
) -> Result<Vec<usize>> {
    check_index("position", position, users.len())?;
    if packets.len() != users.len() {
        return Err(Error::Inconsistent(format!(
            "{} users but {} packets",
            users.len(),
            packets.len()
        )));
    }
    let owner = users[position - 1];
    let packet = packets[position - 1];
    let mut set: Vec<usize> = users
        .iter()
        .copied()
        .filter(|&u| u != owner && !placement.caches(packet, u))
        .collect();
    set.sort_unstable();
    let expected = users.len().checked_sub(placement.caching_gain() + 1);
    if Some(set.len()) != expected {
        return Err(Error::Inconsistent(format!(
            "suppress set of position {position} has {} users, expected {}",
            set.len(),
            expected.map_or_else(|| "a non-negative count".to_string(), |e| e.to_string())
        )));
    }
    Ok(set)
}

/// One stream of a transmission: a subpacket of `packet` of the file requested by `user`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamDescriptor {
    pub position: usize,
    pub user: usize,
    pub packet: usize,
    pub subpacket: usize,
    /// Served users at which this stream must be suppressed by beamforming, ascending.
    pub suppress_at: Vec<usize>,
    /// Virtual group of `user` in grouped plans.
    pub group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub round: usize,
    pub slot: usize,
    pub streams: Vec<StreamDescriptor>,
}

impl Transmission {
    pub fn users(&self) -> impl Iterator<Item = usize> + '_ {
        self.streams.iter().map(|s| s.user)
    }
}

/// What each user holds in its cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheLayout {
    /// One cyclic placement row per packet, one column per user.
    Cyclic(PlacementMatrix),
    /// Users of a group share the cache of the group's virtual user.
    Grouped {
        placement: PlacementMatrix,
        grouping: GroupingMap,
    },
}

impl CacheLayout {
    pub fn placement(&self) -> &PlacementMatrix {
        match self {
            CacheLayout::Cyclic(v) | CacheLayout::Grouped { placement: v, .. } => v,
        }
    }

    /// Users covered by the layout (phantoms included).
    pub fn users(&self) -> usize {
        match self {
            CacheLayout::Cyclic(v) => v.users(),
            CacheLayout::Grouped { grouping, .. } => grouping.users(),
        }
    }

    pub fn packets(&self) -> usize {
        self.placement().users()
    }

    /// Users that move together in one diagonal shift step.
    pub fn group_size(&self) -> usize {
        match self {
            CacheLayout::Cyclic(_) => 1,
            CacheLayout::Grouped { grouping, .. } => grouping.phi(),
        }
    }

    pub fn caches(&self, user: usize, packet: usize) -> bool {
        match self {
            CacheLayout::Cyclic(v) => v.caches(packet, user),
            CacheLayout::Grouped {
                placement,
                grouping,
            } => placement.caches(packet, grouping.group_of(user)),
        }
    }
}

/// A complete delivery schedule together with the cache layout it relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionPlan {
    /// Parameters the plan was requested for (phantoms not yet merged).
    pub params: SchemeParams,
    pub layout: CacheLayout,
    /// Subpackets per packet; also the file subpacketization divided by the packet count.
    pub subpackets: usize,
    pub transmissions: Vec<Transmission>,
    /// Next unused subpacket index per `(user, packet)` after the whole plan.
    pub counters: BTreeMap<(usize, usize), usize>,
    /// Users `1..=real_users` are real; higher indices are phantoms.
    pub real_users: usize,
}

impl TransmissionPlan {
    /// Number of pieces every file is split into.
    pub fn subpacketization(&self) -> usize {
        self.layout.packets() * self.subpackets
    }

    pub fn stream_count(&self) -> usize {
        self.transmissions.iter().map(|t| t.streams.len()).sum()
    }

    pub fn has_phantoms(&self) -> bool {
        self.real_users < self.layout.users()
    }

    /// Suppress set size every stream carries before phantom filtering.
    pub fn suppress_size(&self) -> usize {
        self.params.multiplexing - 1
    }
}

/// Builds all `K(K-t)` transmissions for the effective network of `params`.
pub fn build_plan(params: &SchemeParams, placement: &PlacementMatrix) -> Result<TransmissionPlan> {
    let k = params.effective_users();
    let t = params.caching_gain;
    if placement.users() != k || placement.caching_gain() != t {
        return Err(Error::InvalidParams(format!(
            "placement is for K = {}, t = {} but parameters give K = {k}, t = {t}",
            placement.users(),
            placement.caching_gain()
        )));
    }
    if k < t + params.multiplexing {
        return Err(Error::InvalidParams(format!(
            "t + alpha = {} exceeds K = {k}",
            t + params.multiplexing
        )));
    }
    let mut counters: HashMap<(usize, usize), usize> = HashMap::new();
    let mut transmissions = Vec::with_capacity(k * (k - t));
    for round in 1..=k {
        for slot in 1..=k - t {
            let iv = index_vectors(params, slot, round)?;
            let mut streams = Vec::with_capacity(iv.users.len());
            for (n, (&user, &packet)) in iv.users.iter().zip(&iv.packets).enumerate() {
                let counter = counters.entry((user, packet)).or_insert(1);
                let subpacket = *counter;
                *counter += 1;
                streams.push(StreamDescriptor {
                    position: n + 1,
                    user,
                    packet,
                    subpacket,
                    suppress_at: interference_set(placement, &iv.users, &iv.packets, n + 1)?,
                    group: None,
                });
            }
            transmissions.push(Transmission {
                round,
                slot,
                streams,
            });
        }
    }
    Ok(TransmissionPlan {
        params: params.clone(),
        layout: CacheLayout::Cyclic(placement.clone()),
        subpackets: t + params.multiplexing,
        transmissions,
        counters: counters.into_iter().collect(),
        real_users: k,
    })
}

/// A broken plan property. Transmission indices are 0-based positions in the
/// plan's transmission list (messages count from 1); stream positions are the
/// 1-based positions stored in the descriptors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TransmissionCount {
        found: usize,
        expected: usize,
    },
    StreamCount {
        transmission: usize,
        found: usize,
        expected: usize,
    },
    IndexOutOfRange {
        transmission: usize,
        position: usize,
    },
    DuplicateUser {
        transmission: usize,
        user: usize,
    },
    CachedPacketDelivered {
        transmission: usize,
        position: usize,
    },
    SuppressSize {
        transmission: usize,
        position: usize,
        found: usize,
        expected: usize,
    },
    /// A suppress set names its own user, an unserved user, or a user that
    /// already caches the packet.
    SuppressMember {
        transmission: usize,
        position: usize,
        user: usize,
    },
    /// The victim neither caches the interferer's packet nor is in its suppress set.
    Dichotomy {
        transmission: usize,
        victim: usize,
        interferer: usize,
    },
    Coverage {
        user: usize,
        packet: usize,
        found: usize,
        expected: usize,
    },
    SubpacketIndices {
        user: usize,
        packet: usize,
        indices: Vec<usize>,
    },
}

impl Violation {
    /// `(transmission, position)` the violation points at, when it is local to one stream.
    pub fn location(&self) -> Option<(usize, usize)> {
        use Violation::*;
        match *self {
            IndexOutOfRange {
                transmission,
                position,
            }
            | CachedPacketDelivered {
                transmission,
                position,
            }
            | SuppressSize {
                transmission,
                position,
                ..
            }
            | SuppressMember {
                transmission,
                position,
                ..
            } => Some((transmission, position)),
            Dichotomy {
                transmission,
                interferer,
                ..
            } => Some((transmission, interferer)),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            TransmissionCount { found, expected } => {
                write!(f, "plan has {found} transmissions, expected {expected}")
            }
            StreamCount {
                transmission,
                found,
                expected,
            } => write!(
                f,
                "transmission {} has {found} streams, expected {expected}", transmission + 1
            ),
            IndexOutOfRange {
                transmission,
                position,
            } => write!(
                f,
                "transmission {} position {position}: user or packet index out of range", transmission + 1
            ),
            DuplicateUser { transmission, user } => {
                write!(f, "transmission {} serves user {user} twice", transmission + 1)
            }
            CachedPacketDelivered {
                transmission,
                position,
            } => write!(
                f,
                "transmission {} position {position} delivers a packet its user caches", transmission + 1
            ),
            SuppressSize {
                transmission,
                position,
                found,
                expected,
            } => write!(
                f,
                "transmission {} position {position}: suppress set has {found} users, expected {expected}", transmission + 1
            ),
            SuppressMember {
                transmission,
                position,
                user,
            } => write!(
                f,
                "transmission {} position {position}: user {user} does not belong in the suppress set", transmission + 1
            ),
            Dichotomy {
                transmission,
                victim,
                interferer,
            } => write!(
                f,
                "transmission {}: stream at position {interferer} reaches the user at position {victim} neither cached nor suppressed", transmission + 1
            ),
            Coverage {
                user,
                packet,
                found,
                expected,
            } => write!(
                f,
                "user {user} packet {packet}: delivered {found} times, expected {expected}"
            ),
            SubpacketIndices {
                user,
                packet,
                indices,
            } => write!(
                f,
                "user {user} packet {packet}: subpacket indices {indices:?} are not a permutation"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    pub streams_checked: usize,
    pub pairs_covered: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks coverage, cache consistency, suppress sets and the decodability
/// dichotomy of a plan. Coverage is only required for real users.
pub fn verify_plan(plan: &TransmissionPlan) -> VerificationReport {
    let mut report = VerificationReport::default();
    let layout = &plan.layout;
    let all_users = layout.users();
    let packets = layout.packets();
    let filtered = plan.has_phantoms();
    let expected_suppress = plan.suppress_size();
    let expected_streams = plan.params.caching_gain + plan.params.multiplexing;

    if !filtered {
        let virtual_users = packets;
        let phi = layout.group_size();
        let t_virtual = plan.params.caching_gain / phi;
        let expected = virtual_users * virtual_users.saturating_sub(t_virtual);
        if plan.transmissions.len() != expected {
            report.violations.push(Violation::TransmissionCount {
                found: plan.transmissions.len(),
                expected,
            });
        }
    }

    let mut deliveries: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (ti, tx) in plan.transmissions.iter().enumerate() {
        if !filtered && tx.streams.len() != expected_streams {
            report.violations.push(Violation::StreamCount {
                transmission: ti,
                found: tx.streams.len(),
                expected: expected_streams,
            });
        }
        let mut served = BTreeSet::new();
        for s in &tx.streams {
            if !served.insert(s.user) {
                report.violations.push(Violation::DuplicateUser {
                    transmission: ti,
                    user: s.user,
                });
            }
        }
        let in_range = |s: &StreamDescriptor| {
            (1..=all_users).contains(&s.user)
                && (1..=packets).contains(&s.packet)
                && s.suppress_at.iter().all(|u| (1..=all_users).contains(u))
        };
        for s in &tx.streams {
            report.streams_checked += 1;
            if !in_range(s) {
                report.violations.push(Violation::IndexOutOfRange {
                    transmission: ti,
                    position: s.position,
                });
                continue;
            }
            if layout.caches(s.user, s.packet) {
                report.violations.push(Violation::CachedPacketDelivered {
                    transmission: ti,
                    position: s.position,
                });
            }
            let size_ok = if filtered {
                s.suppress_at.len() <= expected_suppress
            } else {
                s.suppress_at.len() == expected_suppress
            };
            if !size_ok {
                report.violations.push(Violation::SuppressSize {
                    transmission: ti,
                    position: s.position,
                    found: s.suppress_at.len(),
                    expected: expected_suppress,
                });
            }
            for &u in &s.suppress_at {
                if u == s.user || !served.contains(&u) || layout.caches(u, s.packet) {
                    report.violations.push(Violation::SuppressMember {
                        transmission: ti,
                        position: s.position,
                        user: u,
                    });
                }
            }
            if s.user <= plan.real_users {
                deliveries
                    .entry((s.user, s.packet))
                    .or_default()
                    .push(s.subpacket);
            }
        }
        for victim in &tx.streams {
            for interferer in &tx.streams {
                if victim.position == interferer.position
                    || !in_range(victim)
                    || !in_range(interferer)
                {
                    continue;
                }
                let cached = layout.caches(victim.user, interferer.packet);
                let suppressed = interferer.suppress_at.contains(&victim.user);
                if !cached && !suppressed {
                    report.violations.push(Violation::Dichotomy {
                        transmission: ti,
                        victim: victim.position,
                        interferer: interferer.position,
                    });
                }
            }
        }
    }

    for user in 1..=plan.real_users.min(all_users) {
        for packet in 1..=packets {
            if layout.caches(user, packet) {
                continue;
            }
            let mut indices = deliveries.remove(&(user, packet)).unwrap_or_default();
            if indices.len() != plan.subpackets {
                report.violations.push(Violation::Coverage {
                    user,
                    packet,
                    found: indices.len(),
                    expected: plan.subpackets,
                });
                continue;
            }
            indices.sort_unstable();
            if indices.iter().enumerate().any(|(i, &q)| q != i + 1) {
                report.violations.push(Violation::SubpacketIndices {
                    user,
                    packet,
                    indices,
                });
                continue;
            }
            report.pairs_covered += 1;
        }
    }
    report
}

/// Whether every round is the previous round shifted diagonally: users move by
/// one group, packets by one.
pub fn shift_check(plan: &TransmissionPlan) -> bool {
    let users = plan.layout.users();
    let packets = plan.layout.packets();
    let step = plan.layout.group_size() as i64;
    let by_key: HashMap<(usize, usize), &Transmission> = plan
        .transmissions
        .iter()
        .map(|t| ((t.round, t.slot), t))
        .collect();
    if by_key.len() != plan.transmissions.len() {
        return false;
    }
    // order matters: the plan lists round r before r+1
    let mut last = (0, 0);
    for tx in &plan.transmissions {
        if (tx.round, tx.slot) < last {
            return false;
        }
        last = (tx.round, tx.slot);
    }
    plan.transmissions.iter().filter(|t| t.round > 1).all(|tx| {
        match by_key.get(&(tx.round - 1, tx.slot)) {
            None => false,
            Some(prev) => {
                prev.streams.len() == tx.streams.len()
                    && prev.streams.iter().zip(&tx.streams).all(|(a, b)| {
                        b.user == mod1(a.user as i64 + step, users)
                            && b.packet == mod1(a.packet as i64 + 1, packets)
                    })
            }
        }
    })
}
