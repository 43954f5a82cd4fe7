//! User grouping and phantom users.
//!
//! With `phi = gcd(K, t, alpha)`, contiguous blocks of `phi` users share one
//! cache. The scheme is solved on a virtual network of `K / phi` users and
//! lifted back: each virtual stream becomes `phi` streams, one per member of
//! the group. Phantom users pad the network to a larger `phi` and are removed
//! from the finished plan.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::delivery::{build_plan, CacheLayout, StreamDescriptor, Transmission, TransmissionPlan};
use crate::error::{Error, Result};
use crate::params::{Scheme, SchemeParams};
use crate::placement::{CacheContents, PlacementMatrix};

/// Partition of `phi * virtual_users` users into contiguous groups of `phi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingMap {
    phi: usize,
    virtual_users: usize,
}

impl GroupingMap {
    pub fn new(phi: usize, virtual_users: usize) -> Result<Self> {
        if phi == 0 || virtual_users == 0 {
            return Err(Error::InvalidParams(format!(
                "grouping needs positive sizes, got phi = {phi}, {virtual_users} groups"
            )));
        }
        Ok(GroupingMap { phi, virtual_users })
    }

    /// Grouping of the effective network of `params` by its grouping factor.
    pub fn for_params(params: &SchemeParams) -> Self {
        let phi = params.phi();
        GroupingMap {
            phi,
            virtual_users: params.effective_users() / phi,
        }
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn virtual_users(&self) -> usize {
        self.virtual_users
    }

    /// Users covered, phantoms included.
    pub fn users(&self) -> usize {
        self.phi * self.virtual_users
    }

    /// Virtual user (group) of `user`; panics when out of range.
    pub fn group_of(&self, user: usize) -> usize {
        assert!(
            (1..=self.users()).contains(&user),
            "user {user} outside 1..={}",
            self.users()
        );
        (user - 1) / self.phi + 1
    }

    /// Users of `group`; panics when out of range.
    pub fn members(&self, group: usize) -> RangeInclusive<usize> {
        assert!(
            (1..=self.virtual_users).contains(&group),
            "group {group} outside 1..={}",
            self.virtual_users
        );
        self.phi * (group - 1) + 1..=self.phi * group
    }
}

/// Parameters of the virtual network: every gain divided by the grouping
/// factor, with as many antennas as the virtual multiplexing gain.
pub fn virtual_params(params: &SchemeParams) -> SchemeParams {
    let phi = params.phi();
    let users = params.effective_users() / phi;
    let multiplexing = params.multiplexing / phi;
    SchemeParams {
        users,
        caching_gain: params.caching_gain / phi,
        antennas: multiplexing,
        multiplexing,
        phantoms: 0,
        library_size: users,
        file_size: params.file_size,
    }
}

/// Cache contents of every user: each member of a group holds its virtual user's packets.
pub fn elevate_placement(
    placement: &PlacementMatrix,
    grouping: &GroupingMap,
) -> Result<Vec<CacheContents>> {
    if placement.users() != grouping.virtual_users() {
        return Err(Error::Inconsistent(format!(
            "virtual placement has {} users but the grouping has {} groups",
            placement.users(),
            grouping.virtual_users()
        )));
    }
    (1..=grouping.users())
        .map(|user| {
            let packets = placement.cache_contents(grouping.group_of(user))?.packets;
            Ok(CacheContents { user, packets })
        })
        .collect()
}

/// Expands a verified virtual plan onto the grouped network described by `params`.
pub fn elevate_plan(
    virtual_plan: &TransmissionPlan,
    grouping: &GroupingMap,
    params: &SchemeParams,
) -> Result<TransmissionPlan> {
    let placement = virtual_plan.layout.placement().clone();
    if placement.users() != grouping.virtual_users() {
        return Err(Error::Inconsistent(format!(
            "virtual plan has {} users but the grouping has {} groups",
            placement.users(),
            grouping.virtual_users()
        )));
    }
    let expected = params.multiplexing - 1;
    let mut transmissions = Vec::with_capacity(virtual_plan.transmissions.len());
    for tx in &virtual_plan.transmissions {
        let mut streams = Vec::with_capacity(tx.streams.len() * grouping.phi());
        for vs in &tx.streams {
            for user in grouping.members(vs.user) {
                let mut suppress_at: Vec<usize> = grouping
                    .members(vs.user)
                    .filter(|&u| u != user)
                    .chain(vs.suppress_at.iter().flat_map(|&g| grouping.members(g)))
                    .collect();
                suppress_at.sort_unstable();
                if suppress_at.len() != expected {
                    return Err(Error::Inconsistent(format!(
                        "elevated suppress set of user {user} in round {} slot {} has {} users, expected {expected}",
                        tx.round,
                        tx.slot,
                        suppress_at.len()
                    )));
                }
                streams.push(StreamDescriptor {
                    position: streams.len() + 1,
                    user,
                    packet: vs.packet,
                    subpacket: vs.subpacket,
                    suppress_at,
                    group: Some(vs.user),
                });
            }
        }
        transmissions.push(Transmission {
            round: tx.round,
            slot: tx.slot,
            streams,
        });
    }
    let counters = virtual_plan
        .counters
        .iter()
        .flat_map(|(&(group, packet), &next)| {
            grouping
                .members(group)
                .map(move |user| ((user, packet), next))
        })
        .collect();
    Ok(TransmissionPlan {
        params: params.clone(),
        layout: CacheLayout::Grouped {
            placement,
            grouping: grouping.clone(),
        },
        subpackets: virtual_plan.subpackets,
        transmissions,
        counters,
        real_users: grouping.users(),
    })
}

/// Phantom users `first..=last` appended after the real users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhantomSet {
    pub real_users: usize,
    pub phantoms: usize,
}

impl PhantomSet {
    pub fn contains(&self, user: usize) -> bool {
        user > self.real_users && user <= self.real_users + self.phantoms
    }

    pub fn users(&self) -> RangeInclusive<usize> {
        self.real_users + 1..=self.real_users + self.phantoms
    }
}

/// Parameters of the network the scheme is built on, and the phantom users in it.
pub fn apply_phantoms(params: &SchemeParams) -> (SchemeParams, PhantomSet) {
    (
        params.effective(),
        PhantomSet {
            real_users: params.users,
            phantoms: params.phantoms,
        },
    )
}

/// Removes streams owned by phantom users, strips phantoms from suppress
/// sets, renumbers positions and skips transmissions left empty.
pub fn drop_phantoms(plan: &TransmissionPlan) -> TransmissionPlan {
    let real = plan.real_users;
    let transmissions = plan
        .transmissions
        .iter()
        .filter_map(|tx| {
            let streams: Vec<StreamDescriptor> = tx
                .streams
                .iter()
                .filter(|s| s.user <= real)
                .enumerate()
                .map(|(i, s)| StreamDescriptor {
                    position: i + 1,
                    suppress_at: s
                        .suppress_at
                        .iter()
                        .copied()
                        .filter(|&u| u <= real)
                        .collect(),
                    ..s.clone()
                })
                .collect();
            (!streams.is_empty()).then_some(Transmission {
                round: tx.round,
                slot: tx.slot,
                streams,
            })
        })
        .collect();
    let counters: BTreeMap<_, _> = plan
        .counters
        .iter()
        .filter(|(&(user, _), _)| user <= real)
        .map(|(&key, &next)| (key, next))
        .collect();
    TransmissionPlan {
        transmissions,
        counters,
        ..plan.clone()
    }
}

/// Full plan over the effective network, phantom streams still present.
/// Users above `params.users` are phantoms.
pub fn build_unfiltered(params: &SchemeParams, scheme: Scheme) -> Result<TransmissionPlan> {
    let params = params.clone().validate()?;
    let (effective, phantoms) = apply_phantoms(&params);
    let mut plan = match scheme {
        Scheme::Lin => {
            let placement = PlacementMatrix::cyclic(effective.users, effective.caching_gain)?;
            let mut plan = build_plan(&effective, &placement)?;
            plan.params = params.clone();
            plan
        }
        Scheme::Red => {
            let grouping = GroupingMap::for_params(&effective);
            let virtual_net = virtual_params(&effective);
            let placement = PlacementMatrix::cyclic(virtual_net.users, virtual_net.caching_gain)?;
            let virtual_plan = build_plan(&virtual_net, &placement)?;
            elevate_plan(&virtual_plan, &grouping, &params)?
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "no delivery plan is built for the {other} scheme"
            )))
        }
    };
    plan.real_users = phantoms.real_users;
    Ok(plan)
}

/// Delivery plan of `scheme` (LIN or RED) with phantom streams removed.
pub fn build_scheme(params: &SchemeParams, scheme: Scheme) -> Result<TransmissionPlan> {
    Ok(drop_phantoms(&build_unfiltered(params, scheme)?))
}
