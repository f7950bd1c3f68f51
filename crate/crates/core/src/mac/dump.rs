//! Text form of a [`FrameAllocation`], used for fixtures.
//!
//! ```text
//! # slots=8 pilots=2
//! 1: (3,1) (8,1)
//! 2: (2,1) (4,1)
//! ```
//!
//! One line per user, `user_id: (slot,pilot) ...`. User ids, slots and pilots
//! are 1-based. Ids must be exactly `1..=K` (in any order). The optional
//! header fixes the frame size; without it the size is the smallest frame
//! that holds every listed resource. Blank lines and other `#` lines are
//! ignored. Only transmitted replicas are written.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{FrameAllocation, Replica};
use crate::error::{Error, Result};

pub fn format_dump(alloc: &FrameAllocation) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# slots={} pilots={}",
        alloc.n_slots(),
        alloc.n_pilots()
    );
    for (u, placement) in alloc.users().iter().enumerate() {
        let _ = write!(out, "{}:", u + 1);
        for (_, r) in placement.active_replicas() {
            let _ = write!(out, " ({},{})", r.slot + 1, r.pilot + 1);
        }
        out.push('\n');
    }
    out
}

pub fn parse_dump(text: &str) -> Result<FrameAllocation> {
    let mut header: Option<(usize, usize)> = None;
    let mut entries: Vec<(usize, Vec<Replica>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| Error::Parse {
            line: lineno + 1,
            msg,
        };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(h) = parse_header(comment) {
                header = Some(h.map_err(err)?);
            }
            continue;
        }
        let (id, rest) = line
            .split_once(':')
            .ok_or_else(|| err("expected `user_id: (slot,pilot) ...`".into()))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| err(alloc::format!("bad user id `{}`", id.trim())))?;
        if id == 0 {
            return Err(err("user ids are 1-based".into()));
        }
        let mut replicas = Vec::new();
        let mut rest = rest.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .and_then(|r| r.split_once(')'))
                .ok_or_else(|| err(alloc::format!("malformed resource near `{rest}`")))?;
            let (pair, tail) = body;
            let (s, p) = pair
                .split_once(',')
                .ok_or_else(|| err(alloc::format!("resource `({pair})` needs slot,pilot")))?;
            let slot: usize = s
                .trim()
                .parse()
                .map_err(|_| err(alloc::format!("bad slot `{s}`")))?;
            let pilot: usize = p
                .trim()
                .parse()
                .map_err(|_| err(alloc::format!("bad pilot `{p}`")))?;
            if slot == 0 || pilot == 0 {
                return Err(err("slots and pilots are 1-based".into()));
            }
            replicas.push(Replica {
                slot: slot - 1,
                pilot: pilot - 1,
            });
            rest = tail.trim_start();
        }
        entries.push((id, replicas));
    }

    let k = entries.len();
    let mut placements: Vec<Option<Vec<Replica>>> = (0..k).map(|_| None).collect();
    for (id, reps) in entries {
        let slot = placements.get_mut(id - 1).ok_or_else(|| Error::Parse {
            line: 0,
            msg: alloc::format!("user id {id} outside 1..={k}"),
        })?;
        if slot.replace(reps).is_some() {
            return Err(Error::Parse {
                line: 0,
                msg: alloc::format!("user id {id} listed twice"),
            });
        }
    }
    let placements: Vec<Vec<Replica>> = placements
        .into_iter()
        .map(|p| p.unwrap_or_default())
        .collect();
    let (n_slots, n_pilots) = header.unwrap_or_else(|| {
        let max = |f: fn(&Replica) -> usize| {
            placements
                .iter()
                .flatten()
                .map(|r| f(r) + 1)
                .max()
                .unwrap_or(1)
        };
        (max(|r| r.slot), max(|r| r.pilot))
    });
    FrameAllocation::from_replicas(n_slots, n_pilots, placements)
}

fn parse_header(comment: &str) -> Option<core::result::Result<(usize, usize), String>> {
    let mut slots = None;
    let mut pilots = None;
    for tok in comment.split_whitespace() {
        match tok.split_once('=') {
            Some(("slots", v)) => slots = Some(v.parse::<usize>()),
            Some(("pilots", v)) => pilots = Some(v.parse::<usize>()),
            _ => {}
        }
    }
    match (slots, pilots) {
        (Some(Ok(s)), Some(Ok(p))) => Some(Ok((s, p))),
        (None, None) => None,
        _ => Some(Err("header needs numeric `slots=` and `pilots=`".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Coherence;
    use crate::mac::{place_uniform, FrameConfig, Protocol};
    use crate::rng::{Domain, Streams};

    #[test]
    fn roundtrip_random_allocation() {
        let cfg = FrameConfig {
            n_slots: 12,
            n_pilots: 4,
            repetitions: 3,
            k_active: 9,
            protocol: Protocol::Baseline,
            coherence: Coherence::PerSlot,
        };
        let mut rng = Streams::new(2).frame(0).stream(Domain::Allocation, 0);
        let a = place_uniform(&cfg, &mut rng).unwrap();
        let text = format_dump(&a);
        assert_eq!(parse_dump(&text).unwrap(), a);
    }

    #[test]
    fn parses_without_header_and_any_id_order() {
        let a = parse_dump("2: (4,1) (2,1)\n\n# comment\n1: (1,2) (3,1)\n").unwrap();
        assert_eq!((a.n_slots(), a.n_pilots()), (4, 2));
        assert_eq!(a.occupants(3, 0), &[1]);
        assert_eq!(a.occupants(0, 1), &[0]);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "1 (1,1)",
            "0: (1,1)",
            "1: (0,1)",
            "1: (1,1",
            "1: (1;1)",
            "1: (1,1)\n1: (2,1)",
            "3: (1,1)",
        ] {
            assert!(parse_dump(bad).is_err(), "{bad:?}");
        }
        assert!(matches!(
            parse_dump("# slots=2 pilots=2\n1: (3,1)"),
            Err(Error::InvalidParameter(_))
        ));
    }
}
