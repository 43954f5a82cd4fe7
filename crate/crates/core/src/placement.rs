//! Circulant cache placement.
//!
//! Row `p` of the placement matrix is packet `p`, column `k` is user `k`; a one
//! means user `k` caches packet `p` of every file (all of its subpackets).
//! Indices are 1-based throughout.

use std::collections::BTreeSet;

use crate::error::{check_index, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementMatrix {
    users: usize,
    caching_gain: usize,
    bits: Vec<bool>,
}

/// Packets user `user` stores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContents {
    pub user: usize,
    pub packets: BTreeSet<usize>,
}

impl CacheContents {
    /// All `(packet, subpacket)` pairs cached per file, given `subpackets` per packet.
    pub fn subpackets(&self, subpackets: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.packets
            .iter()
            .flat_map(move |&p| (1..=subpackets).map(move |q| (p, q)))
    }
}

impl PlacementMatrix {
    /// First row holds `caching_gain` leading ones; each following row is the
    /// previous one rotated right by one column.
    pub fn cyclic(users: usize, caching_gain: usize) -> Result<Self> {
        if caching_gain == 0 || caching_gain >= users {
            return Err(Error::InvalidParams(format!(
                "placement needs 1 <= t < K, got K = {users}, t = {caching_gain}"
            )));
        }
        let mut bits = vec![false; users * users];
        for p in 0..users {
            for offset in 0..caching_gain {
                bits[p * users + (p + offset) % users] = true;
            }
        }
        Ok(PlacementMatrix {
            users,
            caching_gain,
            bits,
        })
    }

    /// Rebuilds a matrix from `0`/`1` row strings, checking that it is the
    /// cyclic placement for its size and row weight.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let users = rows.len();
        let mut bits = Vec::with_capacity(users * users);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != users {
                return Err(Error::InvalidParams(format!(
                    "placement row {} has {} columns, expected {users}",
                    i + 1,
                    row.len()
                )));
            }
            for c in row.chars() {
                match c {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    other => {
                        return Err(Error::InvalidParams(format!(
                            "placement row {} contains '{other}'",
                            i + 1
                        )))
                    }
                }
            }
        }
        let caching_gain = bits.iter().take(users).filter(|&&b| b).count();
        let expected = Self::cyclic(users, caching_gain)?;
        if expected.bits != bits {
            return Err(Error::InvalidParams(
                "placement rows are not the cyclic placement".into(),
            ));
        }
        Ok(expected)
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn caching_gain(&self) -> usize {
        self.caching_gain
    }

    /// Whether `user` caches `packet`. Both 1-based; panics when out of range.
    pub fn caches(&self, packet: usize, user: usize) -> bool {
        assert!(
            (1..=self.users).contains(&packet) && (1..=self.users).contains(&user),
            "placement index ({packet}, {user}) out of range for K = {}",
            self.users
        );
        self.bits[(packet - 1) * self.users + (user - 1)]
    }

    pub fn row(&self, packet: usize) -> &[bool] {
        let start = (packet - 1) * self.users;
        &self.bits[start..start + self.users]
    }

    /// Row as a `0`/`1` string.
    pub fn row_string(&self, packet: usize) -> String {
        self.row(packet)
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn row_strings(&self) -> Vec<String> {
        (1..=self.users).map(|p| self.row_string(p)).collect()
    }

    pub fn cache_contents(&self, user: usize) -> Result<CacheContents> {
        check_index("user", user, self.users)?;
        let packets = (1..=self.users).filter(|&p| self.caches(p, user)).collect();
        Ok(CacheContents { user, packets })
    }
}
