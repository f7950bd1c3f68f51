//! Frame construction: replica placement, random pilot choice and ACK driven
//! suppression of replicas that are no longer needed.

mod dump;

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::channel::Coherence;
use crate::error::{invalid, Error, Result};

pub use dump::{format_dump, parse_dump};

/// Access protocol run by the devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// `r` replicas in `r` uniformly chosen slots, no feedback.
    Baseline,
    /// `r` replicas in consecutive slots, with per-slot ACKs that stop the
    /// remaining replicas of decoded users.
    ScAck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConfig {
    pub n_slots: usize,
    pub n_pilots: usize,
    pub repetitions: usize,
    pub k_active: usize,
    pub protocol: Protocol,
    pub coherence: Coherence,
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 || self.repetitions > self.n_slots {
            return Err(invalid(alloc::format!(
                "repetitions must be in 1..={} (slots per frame), got {}",
                self.n_slots,
                self.repetitions
            )));
        }
        if self.n_pilots == 0 {
            return Err(invalid("at least one pilot is required"));
        }
        Ok(())
    }
}

/// A single transmitted copy of a user's packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Replica {
    pub slot: usize,
    pub pilot: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserPlacement {
    /// Replicas sorted by slot.
    pub replicas: Vec<Replica>,
    /// `false` once an ACK stopped this replica before transmission.
    pub transmitted: Vec<bool>,
}

impl UserPlacement {
    pub fn active_replicas(&self) -> impl Iterator<Item = (usize, Replica)> + '_ {
        self.replicas
            .iter()
            .enumerate()
            .filter(|(i, _)| self.transmitted[*i])
            .map(|(i, r)| (i, *r))
    }

    pub fn replica_in_slot(&self, slot: usize) -> Option<usize> {
        self.replicas.iter().position(|r| r.slot == slot)
    }
}

/// Replica placement of all active users in one frame plus the derived
/// slot × pilot occupancy map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAllocation {
    n_slots: usize,
    n_pilots: usize,
    users: Vec<UserPlacement>,
    /// `occupancy[slot * n_pilots + pilot]`: users currently transmitting there.
    occupancy: Vec<Vec<usize>>,
}

impl FrameAllocation {
    /// Builds an allocation from explicit replica lists (sorted internally).
    pub fn from_replicas(
        n_slots: usize,
        n_pilots: usize,
        placements: Vec<Vec<Replica>>,
    ) -> Result<Self> {
        let mut users = Vec::with_capacity(placements.len());
        let mut occupancy = vec![Vec::new(); n_slots * n_pilots];
        for (u, mut replicas) in placements.into_iter().enumerate() {
            replicas.sort();
            for w in replicas.windows(2) {
                if w[0].slot == w[1].slot {
                    return Err(invalid(alloc::format!(
                        "user {u} has two replicas in slot {}",
                        w[0].slot
                    )));
                }
            }
            for r in &replicas {
                if r.slot >= n_slots || r.pilot >= n_pilots {
                    return Err(invalid(alloc::format!(
                        "user {u}: resource ({}, {}) outside {n_slots}x{n_pilots} frame",
                        r.slot,
                        r.pilot
                    )));
                }
                occupancy[r.slot * n_pilots + r.pilot].push(u);
            }
            let transmitted = vec![true; replicas.len()];
            users.push(UserPlacement {
                replicas,
                transmitted,
            });
        }
        Ok(Self {
            n_slots,
            n_pilots,
            users,
            occupancy,
        })
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn n_pilots(&self) -> usize {
        self.n_pilots
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[UserPlacement] {
        &self.users
    }

    pub fn user(&self, u: usize) -> &UserPlacement {
        &self.users[u]
    }

    /// Users transmitting on `(slot, pilot)`.
    pub fn occupants(&self, slot: usize, pilot: usize) -> &[usize] {
        &self.occupancy[slot * self.n_pilots + pilot]
    }

    /// `(user, replica index)` pairs transmitting in `slot`.
    pub fn slot_users(&self, slot: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_pilots).flat_map(move |p| {
            self.occupants(slot, p).iter().map(move |&u| {
                let i = self.users[u]
                    .replica_in_slot(slot)
                    .expect("occupancy map lists only users with a replica in the slot");
                (u, i)
            })
        })
    }

    pub fn slot_load(&self, slot: usize) -> usize {
        (0..self.n_pilots)
            .map(|p| self.occupants(slot, p).len())
            .sum()
    }

    /// Number of replicas that are (or will be) transmitted.
    pub fn transmitted_replicas(&self) -> usize {
        self.users
            .iter()
            .map(|u| u.transmitted.iter().filter(|t| **t).count())
            .sum()
    }

    /// Stops every replica of `user` in slots strictly after `decoded_at_slot`.
    /// Returns how many replicas were removed.
    pub fn apply_ack(
        &mut self,
        protocol: Protocol,
        user: usize,
        decoded_at_slot: usize,
    ) -> Result<usize> {
        if protocol != Protocol::ScAck {
            return Err(Error::ProtocolViolation(alloc::format!(
                "ACK for user {user} under {protocol:?} protocol"
            )));
        }
        let placement = self
            .users
            .get_mut(user)
            .ok_or_else(|| invalid(alloc::format!("no user {user}")))?;
        if placement.replica_in_slot(decoded_at_slot).is_none() {
            return Err(invalid(alloc::format!(
                "user {user} has no replica in slot {decoded_at_slot}"
            )));
        }
        let mut removed = 0;
        for (i, r) in placement.replicas.iter().enumerate() {
            if r.slot > decoded_at_slot && placement.transmitted[i] {
                placement.transmitted[i] = false;
                let cell = &mut self.occupancy[r.slot * self.n_pilots + r.pilot];
                cell.retain(|&u| u != user);
                removed += 1;
            }
        }
        Ok(removed)
    }
}

/// Baseline placement: each user picks a uniform `r`-subset of the slots and
/// an independent uniform pilot per replica.
pub fn place_uniform<R: Rng + ?Sized>(cfg: &FrameConfig, rng: &mut R) -> Result<FrameAllocation> {
    cfg.validate()?;
    let placements = (0..cfg.k_active)
        .map(|_| {
            index::sample(rng, cfg.n_slots, cfg.repetitions)
                .into_iter()
                .map(|slot| Replica {
                    slot,
                    pilot: rng.random_range(0..cfg.n_pilots),
                })
                .collect()
        })
        .collect();
    FrameAllocation::from_replicas(cfg.n_slots, cfg.n_pilots, placements)
}

/// Intra-frame spatial coupling: each user occupies `r` consecutive slots
/// starting at a uniform position in `0..=N_s - r` (no wraparound).
pub fn place_spatially_coupled<R: Rng + ?Sized>(
    cfg: &FrameConfig,
    rng: &mut R,
) -> Result<FrameAllocation> {
    cfg.validate()?;
    let placements = (0..cfg.k_active)
        .map(|_| {
            let start = rng.random_range(0..=cfg.n_slots - cfg.repetitions);
            (start..start + cfg.repetitions)
                .map(|slot| Replica {
                    slot,
                    pilot: rng.random_range(0..cfg.n_pilots),
                })
                .collect()
        })
        .collect();
    FrameAllocation::from_replicas(cfg.n_slots, cfg.n_pilots, placements)
}

/// Placement rule implied by the protocol.
pub fn place<R: Rng + ?Sized>(cfg: &FrameConfig, rng: &mut R) -> Result<FrameAllocation> {
    match cfg.protocol {
        Protocol::Baseline => place_uniform(cfg, rng),
        Protocol::ScAck => place_spatially_coupled(cfg, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, Streams};

    fn cfg(k: usize, r: usize, ns: usize, np: usize, protocol: Protocol) -> FrameConfig {
        FrameConfig {
            n_slots: ns,
            n_pilots: np,
            repetitions: r,
            k_active: k,
            protocol,
            coherence: Coherence::PerSlot,
        }
    }

    fn rng(i: u64) -> crate::rng::StreamRng {
        Streams::new(5).frame(i).stream(Domain::Allocation, 0)
    }

    #[test]
    fn single_user_three_distinct_slots() {
        let a = place_uniform(&cfg(1, 3, 78, 64, Protocol::Baseline), &mut rng(0)).unwrap();
        let slots: Vec<usize> = a.user(0).replicas.iter().map(|r| r.slot).collect();
        assert_eq!(slots.len(), 3);
        assert!(slots.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((0..78).filter(|&s| a.slot_load(s) > 0).count(), 3);
    }

    #[test]
    fn full_occupancy_when_r_equals_slots() {
        for place_fn in [
            place_uniform::<crate::rng::StreamRng>,
            place_spatially_coupled,
        ] {
            let a = place_fn(&cfg(5, 4, 4, 3, Protocol::Baseline), &mut rng(1)).unwrap();
            for s in 0..4 {
                assert_eq!(a.slot_load(s), 5);
            }
        }
    }

    #[test]
    fn r_larger_than_slots_is_rejected() {
        assert!(place_uniform(&cfg(1, 5, 4, 2, Protocol::Baseline), &mut rng(0)).is_err());
        assert!(place_spatially_coupled(&cfg(1, 5, 4, 2, Protocol::ScAck), &mut rng(0)).is_err());
    }

    #[test]
    fn spatially_coupled_slots_are_consecutive() {
        let a =
            place_spatially_coupled(&cfg(200, 3, 78, 64, Protocol::ScAck), &mut rng(2)).unwrap();
        for u in a.users() {
            let s: Vec<usize> = u.replicas.iter().map(|r| r.slot).collect();
            assert_eq!(s, [s[0], s[0] + 1, s[0] + 2]);
        }
    }

    #[test]
    fn ack_frees_later_replicas_only() {
        let mut a = FrameAllocation::from_replicas(
            10,
            2,
            vec![vec![
                Replica { slot: 5, pilot: 0 },
                Replica { slot: 6, pilot: 1 },
                Replica { slot: 7, pilot: 0 },
            ]],
        )
        .unwrap();
        assert_eq!(a.apply_ack(Protocol::ScAck, 0, 7).unwrap(), 0);
        assert_eq!(a.apply_ack(Protocol::ScAck, 0, 5).unwrap(), 2);
        assert_eq!(a.user(0).transmitted, [true, false, false]);
        assert!(a.occupants(6, 1).is_empty());
        assert!(a.occupants(7, 0).is_empty());
        assert_eq!(a.occupants(5, 0), &[0]);
        assert_eq!(a.transmitted_replicas(), 1);
    }

    #[test]
    fn ack_errors() {
        let mut a = FrameAllocation::from_replicas(
            4,
            2,
            vec![vec![
                Replica { slot: 1, pilot: 0 },
                Replica { slot: 2, pilot: 0 },
            ]],
        )
        .unwrap();
        assert!(matches!(
            a.apply_ack(Protocol::Baseline, 0, 1),
            Err(Error::ProtocolViolation(_))
        ));
        assert!(a.apply_ack(Protocol::ScAck, 0, 3).is_err());
        assert!(a.apply_ack(Protocol::ScAck, 1, 1).is_err());
    }

    #[test]
    fn duplicate_slot_is_rejected() {
        let r = FrameAllocation::from_replicas(
            4,
            2,
            vec![vec![
                Replica { slot: 1, pilot: 0 },
                Replica { slot: 1, pilot: 1 },
            ]],
        );
        assert!(r.is_err());
    }
}
