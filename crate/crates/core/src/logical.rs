//! Collision channel over resources.
//!
//! A resource is a `(slot, pilot)` pair. A replica alone on its resource is
//! always decoded; two or more replicas on a resource are never decoded. With
//! SIC, a decoded user's replicas are removed everywhere (peeling), which may
//! leave other replicas alone on their resources.

use alloc::vec;
use alloc::vec::Vec;

use crate::mac::{FrameAllocation, Replica};

/// Bipartite user ↔ resource graph built from the transmitted replicas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceGraph {
    n_pilots: usize,
    user_edges: Vec<Vec<usize>>,
    resource_users: Vec<Vec<usize>>,
}

impl ResourceGraph {
    pub fn from_allocation(alloc: &FrameAllocation) -> Self {
        let n_pilots = alloc.n_pilots();
        let mut resource_users = vec![Vec::new(); alloc.n_slots() * n_pilots];
        let user_edges = alloc
            .users()
            .iter()
            .enumerate()
            .map(|(u, placement)| {
                placement
                    .active_replicas()
                    .map(|(_, r)| {
                        let id = r.slot * n_pilots + r.pilot;
                        resource_users[id].push(u);
                        id
                    })
                    .collect()
            })
            .collect();
        Self {
            n_pilots,
            user_edges,
            resource_users,
        }
    }

    pub fn n_users(&self) -> usize {
        self.user_edges.len()
    }

    pub fn resource(&self, id: usize) -> Replica {
        Replica {
            slot: id / self.n_pilots,
            pilot: id % self.n_pilots,
        }
    }

    pub fn user_resources(&self, u: usize) -> &[usize] {
        &self.user_edges[u]
    }

    pub fn resource_degree(&self, id: usize) -> usize {
        self.resource_users[id].len()
    }

    pub fn n_resources(&self) -> usize {
        self.resource_users.len()
    }
}

/// One step of the peeling decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeelStep {
    pub user: usize,
    /// 0 for users decoded before any cancellation.
    pub wave: usize,
    /// First degree-one resource on which the user was found in its wave.
    pub resource: Replica,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelingResult {
    pub decoded: Vec<bool>,
    pub order: Vec<PeelStep>,
}

impl PeelingResult {
    pub fn n_decoded(&self) -> usize {
        self.order.len()
    }

    pub fn decoded_users(&self) -> Vec<usize> {
        self.order.iter().map(|s| s.user).collect()
    }
}

/// Iterative peeling to the fixpoint.
///
/// Each wave scans resources by ascending slot then pilot, collects every
/// user holding a degree-one resource, then removes all edges of those users.
/// The decoded set does not depend on the scan order; the order only fixes
/// which decode sequence is reported.
pub fn peel_with_sic(g: &ResourceGraph) -> PeelingResult {
    let mut degree: Vec<usize> = g.resource_users.iter().map(Vec::len).collect();
    let mut decoded = vec![false; g.n_users()];
    let mut order = Vec::new();
    let mut wave = 0;
    loop {
        let mut found = Vec::new();
        for (id, users) in g.resource_users.iter().enumerate() {
            if degree[id] != 1 {
                continue;
            }
            // the only remaining user may already have been found in this wave
            let Some(u) = users.iter().copied().find(|&u| !decoded[u]) else {
                continue;
            };
            decoded[u] = true;
            found.push(u);
            order.push(PeelStep {
                user: u,
                wave,
                resource: g.resource(id),
            });
        }
        if found.is_empty() {
            break;
        }
        for u in found {
            for &id in &g.user_edges[u] {
                degree[id] -= 1;
            }
        }
        wave += 1;
    }
    PeelingResult { decoded, order }
}

/// Single pass without cancellation: a user is decoded iff one of its
/// resources has degree one in the original graph.
pub fn decode_no_sic(g: &ResourceGraph) -> Vec<bool> {
    g.user_edges
        .iter()
        .map(|edges| edges.iter().any(|&id| g.resource_users[id].len() == 1))
        .collect()
}

/// Reference peeling that decodes one user at a time: repeatedly takes the
/// first undecoded user in `priority` holding a degree-one resource and
/// removes its edges. `priority` must list every user.
pub fn peel_sequential(g: &ResourceGraph, priority: &[usize]) -> Vec<bool> {
    debug_assert_eq!(priority.len(), g.n_users());
    let mut degree: Vec<usize> = g.resource_users.iter().map(Vec::len).collect();
    let mut decoded = vec![false; g.n_users()];
    'outer: loop {
        for &u in priority {
            if !decoded[u] && g.user_edges[u].iter().any(|&id| degree[id] == 1) {
                decoded[u] = true;
                for &id in &g.user_edges[u] {
                    degree[id] -= 1;
                }
                continue 'outer;
            }
        }
        return decoded;
    }
}
