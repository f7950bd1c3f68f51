//! Peeling decoder against the one-user-at-a-time reference on every small
//! graph.

use gfcsa_core::logical::{decode_no_sic, peel_sequential, peel_with_sic, ResourceGraph};
use gfcsa_core::mac::{FrameAllocation, Replica};

const N_PILOTS: usize = 2;
const MAX_USERS: usize = 5;
const MAX_SLOTS: usize = 4;
const MAX_DEGREE: usize = 2;

/// Every replica set a user can pick: one or two resources in distinct slots.
fn replica_sets(n_slots: usize) -> Vec<Vec<Replica>> {
    let res: Vec<Replica> = (0..n_slots)
        .flat_map(|slot| (0..N_PILOTS).map(move |pilot| Replica { slot, pilot }))
        .collect();
    let mut out: Vec<Vec<Replica>> = res.iter().map(|&r| vec![r]).collect();
    for (i, &a) in res.iter().enumerate() {
        for &b in &res[i + 1..] {
            if a.slot != b.slot && MAX_DEGREE >= 2 {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

/// Non-decreasing index sequences of length `k` over `0..n`: one
/// representative per graph up to relabelling of users.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] + 1 < n) else {
            return out;
        };
        cur[i] += 1;
        let v = cur[i];
        cur[i + 1..].iter_mut().for_each(|c| *c = v);
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn for_each_graph(mut f: impl FnMut(&ResourceGraph)) -> usize {
    let mut count = 0;
    for n_slots in 1..=MAX_SLOTS {
        let sets = replica_sets(n_slots);
        for k in 1..=MAX_USERS {
            for pick in multisets(sets.len(), k) {
                let placements = pick.iter().map(|&i| sets[i].clone()).collect();
                let alloc = FrameAllocation::from_replicas(n_slots, N_PILOTS, placements).unwrap();
                f(&ResourceGraph::from_allocation(&alloc));
                count += 1;
            }
        }
    }
    count
}

#[test]
fn decoded_set_is_independent_of_processing_order() {
    let perms: Vec<Vec<Vec<usize>>> = (0..=MAX_USERS).map(permutations).collect();
    let graphs = for_each_graph(|g| {
        let peeled = peel_with_sic(g).decoded;
        for p in &perms[g.n_users()] {
            assert_eq!(peel_sequential(g, p), peeled, "order {p:?}");
        }
    });
    // 1..=4 slots, 1..=5 users
    assert!(graphs > 400_000, "{graphs}");
}

#[test]
fn no_sic_is_contained_in_sic() {
    for_each_graph(|g| {
        let sic = peel_with_sic(g).decoded;
        for (u, d) in decode_no_sic(g).into_iter().enumerate() {
            assert!(!d || sic[u]);
        }
    });
}

#[test]
fn collision_free_graphs_decode_everyone() {
    for_each_graph(|g| {
        if (0..g.n_resources()).all(|id| g.resource_degree(id) <= 1) {
            assert!(peel_with_sic(g).decoded.iter().all(|&d| d));
            assert!(decode_no_sic(g).iter().all(|&d| d));
        }
    });
}

#[test]
fn report_is_consistent_with_decoded_mask() {
    for_each_graph(|g| {
        let r = peel_with_sic(g);
        assert_eq!(r.n_decoded(), r.decoded.iter().filter(|&&d| d).count());
        let mut seen = vec![false; g.n_users()];
        let mut last_wave = 0;
        for step in &r.order {
            assert!(!seen[step.user], "user reported twice");
            seen[step.user] = true;
            assert!(step.wave >= last_wave);
            last_wave = step.wave;
        }
    });
}
