//! Reference interpreter for the hop semantics, invariant checks and the
//! exhaustive small-instance driver.

use hopsim_core::audio::{ReactionTable, StreamUsage};
use hopsim_core::superdevice::{AppProfile, HopEffect, HopFault, Op};
use hopsim_core::{AudioStatus, ResolutionMatrix, SuperDevice};
use proptest::prelude::*;

use super::reference;

pub const DEVICES: [&str; 3] = ["d1", "d2", "d3"];
pub const APPS: [&str; 4] = ["a1", "a2", "a3", "a4"];

fn rank(s: &str) -> u8 {
    match s {
        "PLAY" => 0,
        "DUCK" => 1,
        "PAUSE_RESUME" => 2,
        "PAUSE" => 3,
        "STOP" => 4,
        other => panic!("bad status {other}"),
    }
}

fn play_like(s: &str) -> bool {
    matches!(s, "PLAY" | "DUCK" | "PAUSE_RESUME")
}

fn conflict_only(s: &str) -> bool {
    matches!(s, "DUCK" | "PAUSE_RESUME")
}

/// (app, usage, status, sink) with apps and devices as indices.
pub type Inst = (u8, Option<StreamUsage>, &'static str, u8);
/// Per device stacks, front first, plus (source, app, target).
pub type Canon = ([Vec<Inst>; 3], Option<(u8, u8, u8)>);

fn di(d: &str) -> Option<u8> {
    DEVICES.iter().position(|x| *x == d).map(|i| i as u8)
}

fn ai(a: &str) -> u8 {
    APPS.iter().position(|x| *x == a).expect("known app") as u8
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefSd {
    pub stacks: [Vec<Inst>; 3],
    pub hop: Option<(u8, u8, u8)>,
}

fn add(stack: &mut Vec<Inst>, mut inst: Inst) {
    if play_like(inst.2) {
        let post_usage = inst.1.expect("audible apps have a usage");
        let mut own = "PLAY";
        for h in stack.iter_mut().filter(|h| h.2 == "PLAY") {
            if let Some(pre_usage) = h.1 {
                let (pre, post) = reference(pre_usage, post_usage);
                h.2 = pre;
                if rank(post) > rank(own) {
                    own = post;
                }
            }
        }
        inst.2 = own;
    }
    stack.insert(0, inst);
}

fn replay(stack: &mut Vec<Inst>) {
    let old = std::mem::take(stack);
    for mut i in old.into_iter().rev() {
        if conflict_only(i.2) {
            i.2 = "PLAY";
        }
        add(stack, i);
    }
}

fn rmv(stack: &mut Vec<Inst>, app: u8) -> Inst {
    let idx = stack.iter().position(|i| i.0 == app).expect("present");
    let r = stack.remove(idx);
    if play_like(r.2) {
        replay(stack);
    }
    r
}

impl RefSd {
    pub fn new() -> Self {
        Self {
            stacks: Default::default(),
            hop: None,
        }
    }

    fn locate(&self, app: u8) -> Option<u8> {
        self.stacks
            .iter()
            .position(|s| s.iter().any(|i| i.0 == app))
            .map(|d| d as u8)
    }

    fn resident(&self, d: &str, app: u8) -> Option<usize> {
        di(d)
            .map(usize::from)
            .filter(|&i| self.stacks[i].iter().any(|x| x.0 == app))
    }

    fn end_hop(&mut self) -> bool {
        let Some((s, a, t)) = self.hop.take() else {
            return false;
        };
        let mut inst = rmv(&mut self.stacks[t as usize], a);
        inst.3 = s;
        add(&mut self.stacks[s as usize], inst);
        true
    }

    /// Apply `op` with every app fault-free and following the matrix.
    /// Returns false, leaving the state alone, when `op` is not applicable.
    pub fn apply(&mut self, op: &Op) -> bool {
        match op {
            Op::Launch { device, app } => {
                let Some(d) = di(device.as_str()) else { return false };
                let a = ai(app.as_str());
                if self.locate(a).is_some() {
                    return false;
                }
                self.stacks[d as usize].push((a, None, "STOP", d));
            }
            Op::Close { device, app } => {
                let a = ai(app.as_str());
                let Some(d) = self.resident(device.as_str(), a) else { return false };
                rmv(&mut self.stacks[d], a);
                if self.hop.is_some_and(|h| h.1 == a) {
                    self.hop = None;
                }
            }
            Op::RequestFocus { device, app, usage } => {
                let a = ai(app.as_str());
                let Some(d) = self.resident(device.as_str(), a) else { return false };
                let mut inst = rmv(&mut self.stacks[d], a);
                inst.1 = Some(*usage);
                inst.2 = "PLAY";
                add(&mut self.stacks[d], inst);
            }
            Op::ReleaseFocus { device, app, status } => {
                if !matches!(status, AudioStatus::Stop | AudioStatus::Pause) {
                    return false;
                }
                let a = ai(app.as_str());
                let Some(d) = self.resident(device.as_str(), a) else { return false };
                let stack = &mut self.stacks[d];
                let i = stack.iter_mut().find(|i| i.0 == a).unwrap();
                let was = play_like(i.2);
                i.2 = status.as_str();
                if was {
                    replay(stack);
                }
            }
            Op::StartHop { source, app, target } => {
                let (Some(s), Some(t)) = (di(source.as_str()), di(target.as_str())) else { return false };
                let a = ai(app.as_str());
                if s == t {
                    return false;
                }
                let location = match self.hop {
                    Some(h) if h.1 == a => Some(h.0),
                    _ => self.locate(a),
                };
                if location != Some(s) {
                    return false;
                }
                self.end_hop();
                let mut inst = rmv(&mut self.stacks[s as usize], a);
                inst.3 = t;
                add(&mut self.stacks[t as usize], inst);
                self.hop = Some((s, a, t));
            }
            Op::EndHop => return self.end_hop(),
        }
        true
    }

    pub fn canon(&self) -> Canon {
        (self.stacks.clone(), self.hop)
    }
}

pub fn canon(sd: &SuperDevice) -> Canon {
    let mut stacks: [Vec<Inst>; 3] = Default::default();
    for d in sd.devices() {
        let idx = di(d.device.as_str()).expect("known device");
        stacks[idx as usize] = d
            .stack
            .iter()
            .map(|i| (ai(i.app.as_str()), i.usage, i.status.as_str(), di(i.sink.as_str()).expect("known sink")))
            .collect();
    }
    let hop = sd.hop().map(|h| {
        (
            di(h.source.as_str()).unwrap(),
            ai(h.app.as_str()),
            di(h.target.as_str()).unwrap(),
        )
    });
    (stacks, hop)
}

pub fn fresh(seed: u64) -> SuperDevice {
    SuperDevice::new(DEVICES, ResolutionMatrix::default(), seed).unwrap()
}

pub fn op(kind: u8, d: usize, a: usize, x: usize) -> Op {
    let device = DEVICES[d % 3].into();
    let app = APPS[a % 4].into();
    match kind % 6 {
        0 => Op::Launch { device, app },
        1 => Op::Close { device, app },
        2 => Op::RequestFocus {
            device,
            app,
            usage: StreamUsage::ALL[x % 4],
        },
        3 => Op::ReleaseFocus {
            device,
            app,
            status: if x.is_multiple_of(2) { AudioStatus::Stop } else { AudioStatus::Pause },
        },
        4 => Op::StartHop {
            source: device,
            app,
            target: DEVICES[(d + 1 + x % 2) % 3].into(),
        },
        _ => Op::EndHop,
    }
}

/// Every operation over the small universe: 121 in total.
pub fn alphabet() -> Vec<Op> {
    let mut ops = Vec::new();
    for d in 0..3 {
        for a in 0..4 {
            ops.push(op(0, d, a, 0));
            ops.push(op(1, d, a, 0));
            for x in 0..4 {
                ops.push(op(2, d, a, x));
            }
            for x in 0..2 {
                ops.push(op(3, d, a, x));
                ops.push(op(4, d, a, x));
            }
        }
    }
    ops.push(Op::EndHop);
    ops
}

pub fn op_strategy() -> impl Strategy<Value = Op> {
    (0u8..6, 0usize..3, 0usize..4, 0usize..4).prop_map(|(k, d, a, x)| op(k, d, a, x))
}

/// Launches for a random initial placement, then random operations.
pub fn ops_strategy(max_len: usize) -> impl Strategy<Value = Vec<Op>> {
    (
        proptest::collection::vec(proptest::option::of(0usize..3), 4),
        proptest::collection::vec(op_strategy(), 1..=max_len),
    )
        .prop_map(|(placement, rest)| {
            let mut ops: Vec<Op> = placement
                .iter()
                .enumerate()
                .filter_map(|(a, d)| d.map(|d| op(0, d, a, 0)))
                .collect();
            ops.extend(rest);
            ops
        })
}

fn status_strategy() -> impl Strategy<Value = AudioStatus> {
    proptest::sample::select(AudioStatus::ALL.to_vec())
}

fn table_strategy() -> impl Strategy<Value = ReactionTable> {
    proptest::collection::vec((any::<bool>(), 0usize..4, status_strategy()), 0..3).prop_map(|entries| {
        entries.into_iter().fold(ReactionTable::default(), |t, (pre, u, s)| {
            if pre {
                t.with_pre(StreamUsage::ALL[u], s)
            } else {
                t.with_post(StreamUsage::ALL[u], s)
            }
        })
    })
}

/// Profiles with arbitrary reactions and sporadic or certain stuck sinks.
pub fn profiles_strategy() -> impl Strategy<Value = Vec<AppProfile>> {
    let profile = (table_strategy(), table_strategy(), proptest::sample::select(vec![0.0, 0.5, 1.0]))
        .prop_map(|(normal, hopping, p)| AppProfile {
            normal,
            hopping,
            fault: if p > 0.0 { HopFault::stuck(p) } else { HopFault::default() },
        });
    proptest::collection::vec(profile, 4)
}

pub fn with_profiles(seed: u64, profiles: &[AppProfile]) -> SuperDevice {
    let mut sd = fresh(seed);
    for (a, p) in APPS.iter().zip(profiles) {
        sd.set_profile((*a).into(), p.clone());
    }
    sd
}

fn apps_sorted(c: &Canon) -> Vec<u8> {
    let mut v: Vec<u8> = c.0.iter().flat_map(|s| s.iter().map(|i| i.0)).collect();
    v.sort();
    v
}

/// I-1: the hop relation, when present, is well formed.
pub fn check_hop(c: &Canon) -> Result<(), String> {
    if let Some((s, a, t)) = c.1 {
        if s == t {
            return Err(format!("hop with source = target {s}"));
        }
        if !c.0[t as usize].iter().any(|i| i.0 == a) {
            return Err(format!("hopped app {a} is not on {t}"));
        }
    }
    Ok(())
}

/// I-3: conflict-only statuses always have a play-like companion.
pub fn check_conflict_only(c: &Canon) -> Result<(), String> {
    for (d, st) in c.0.iter().enumerate() {
        for i in st.iter().filter(|i| conflict_only(i.2)) {
            if !st.iter().any(|o| o.0 != i.0 && play_like(o.2)) {
                return Err(format!("{} is {} alone on {}", APPS[i.0 as usize], i.2, DEVICES[d]));
            }
        }
    }
    Ok(())
}

/// I-4: audio comes out of the hosting device.
pub fn check_sinks(c: &Canon) -> Result<(), String> {
    for (d, st) in c.0.iter().enumerate() {
        if let Some(i) = st.iter().find(|i| usize::from(i.3) != d) {
            return Err(format!("{} on {} emits on {}", APPS[i.0 as usize], DEVICES[d], DEVICES[i.3 as usize]));
        }
    }
    Ok(())
}

fn settled(st: &[Inst]) -> bool {
    let mut r = st.to_vec();
    replay(&mut r);
    r == st
}

/// Conditions under which a start/end hop pair restores the original state
/// when all apps follow the matrix: both stacks equal their own replay, the
/// hopped app is the newest on the source, and everything else is audible.
pub fn round_trip_applies(before: &Canon, source: u8, app: u8, target: u8) -> bool {
    let src = &before.0[source as usize];
    let tgt = &before.0[target as usize];
    settled(src)
        && settled(tgt)
        && src.first().is_some_and(|i| i.0 == app)
        && src.iter().skip(1).all(|i| play_like(i.2))
        && tgt.iter().all(|i| play_like(i.2))
}

fn resumable(e: &HopEffect) -> bool {
    !e.fault_fired && e.left.iter().chain(&e.arrived).all(|a| a.is_resumable())
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Tally {
    pub applied: u64,
    pub rejected: u64,
    pub auto_end: u64,
    pub round_trips: u64,
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, o: Self) {
        self.applied += o.applied;
        self.rejected += o.rejected;
        self.auto_end += o.auto_end;
        self.round_trips += o.round_trips;
    }
}

/// Apply `op` to both interpreters and check every fault-free property.
pub fn step(sd: &mut SuperDevice, r: &mut RefSd, op: &Op, tally: &mut Tally) -> Result<bool, String> {
    let before = canon(sd);
    step_from(sd, r, op, &before, tally)
}

fn step_from(sd: &mut SuperDevice, r: &mut RefSd, op: &Op, before: &Canon, tally: &mut Tally) -> Result<bool, String> {
    let ok_ref = r.apply(op);
    let probe = match (op, before.1) {
        (Op::StartHop { .. }, Some(_)) if ok_ref => Some(sd.clone()),
        _ => None,
    };
    let (ok_lib, effect) = match op {
        Op::StartHop { source, app, target } => match sd.start_hop(source, app, target) {
            Ok(e) => (true, Some(e)),
            Err(_) => (false, None),
        },
        _ => (sd.apply(op).is_ok(), None),
    };
    if ok_ref != ok_lib {
        return Err(format!("{op}: library ok={ok_lib} reference ok={ok_ref} on {before:?}"));
    }
    if !ok_lib {
        tally.rejected += 1;
        return if canon(sd) == *before {
            Ok(false)
        } else {
            Err(format!("{op} failed but changed the state"))
        };
    }
    tally.applied += 1;
    let after = canon(sd);
    if after != r.canon() {
        return Err(format!("{op} on {before:?}\nlibrary   {after:?}\nreference {:?}", r.canon()));
    }
    check_hop(&after)?;
    check_conflict_only(&after).map_err(|e| format!("{op}: {e}"))?;
    check_sinks(&after).map_err(|e| format!("{op}: {e}"))?;
    if matches!(op, Op::StartHop { .. } | Op::EndHop) && apps_sorted(before) != apps_sorted(&after) {
        return Err(format!("{op} did not conserve apps"));
    }
    if let Op::StartHop { source, app, target } = op {
        if let Some(mut probe) = probe {
            tally.auto_end += 1;
            probe.end_hop().map_err(|e| e.to_string())?;
            probe.start_hop(source, app, target).map_err(|e| e.to_string())?;
            if &probe != sd {
                return Err(format!("{op}: auto-end differs from explicit end"));
            }
        } else {
            let (s, a, t) = after.1.expect("hop recorded");
            if effect.as_ref().is_some_and(resumable) && round_trip_applies(before, s, a, t) {
                let mut rt = sd.clone();
                rt.end_hop().map_err(|e| e.to_string())?;
                if canon(&rt) != *before {
                    return Err(format!("{op}: round trip from {before:?} ended in {:?}", canon(&rt)));
                }
                tally.round_trips += 1;
            }
        }
    }
    Ok(true)
}

/// Apply `op` under arbitrary profiles and check the properties that hold
/// with faults and deviating reactions: failed operations change nothing,
/// the hop relation stays well formed, hops conserve apps, auto-end equals
/// an explicit end, and only the hopped app can emit away from its host.
pub fn faulty_step(sd: &mut SuperDevice, op: &Op) -> Result<(), String> {
    let probe = sd.clone();
    let before = canon(sd);
    if sd.apply(op).is_err() {
        return if *sd == probe { Ok(()) } else { Err(format!("{op} failed but changed the state")) };
    }
    let after = canon(sd);
    check_hop(&after)?;
    if matches!(op, Op::StartHop { .. } | Op::EndHop) && apps_sorted(&before) != apps_sorted(&after) {
        return Err(format!("{op} did not conserve apps"));
    }
    if let (Op::StartHop { source, app, target }, Some(_)) = (op, before.1) {
        let mut explicit = probe;
        explicit.end_hop().map_err(|e| e.to_string())?;
        explicit.start_hop(source, app, target).map_err(|e| e.to_string())?;
        if explicit != *sd {
            return Err(format!("{op}: auto-end differs from explicit end"));
        }
    }
    for (d, st) in after.0.iter().enumerate() {
        for i in st.iter().filter(|i| usize::from(i.3) != d) {
            let stuck_hop = after.1.is_some_and(|(s, a, t)| a == i.0 && s == i.3 && usize::from(t) == d);
            if !stuck_hop {
                return Err(format!("{} emits away from {} outside a stuck hop", APPS[i.0 as usize], DEVICES[d]));
            }
        }
    }
    Ok(())
}

/// Depth-first over every operation sequence of length <= `depth`.
pub fn exhaust(sd: &SuperDevice, r: &RefSd, depth: usize, ops: &[Op], tally: &mut Tally) -> Result<(), String> {
    if depth == 0 {
        return Ok(());
    }
    let before = canon(sd);
    for op in ops {
        let mut s = sd.clone();
        let mut q = r.clone();
        if step_from(&mut s, &mut q, op, &before, tally)? {
            exhaust(&s, &q, depth - 1, ops, tally)?;
        }
    }
    Ok(())
}

fn build(ops: &[Op]) -> (SuperDevice, RefSd) {
    let mut sd = fresh(0);
    let mut r = RefSd::new();
    let mut t = Tally::default();
    for o in ops {
        assert!(step(&mut sd, &mut r, o, &mut t).unwrap(), "setup op {o} rejected");
    }
    (sd, r)
}

/// Starting points for the exhaustive run: empty, the four-app walkthrough
/// layout, and a crowded device.
pub fn seeds() -> Vec<(SuperDevice, RefSd)> {
    use StreamUsage::*;
    let rf = |d: usize, a: usize, u: StreamUsage| op(2, d, a, StreamUsage::ALL.iter().position(|x| *x == u).unwrap());
    let walk = vec![
        op(0, 0, 1, 0),
        rf(0, 1, Movie),
        op(0, 0, 0, 0),
        rf(0, 0, Navig),
        op(0, 1, 2, 0),
        rf(1, 2, Music),
        op(0, 2, 3, 0),
        rf(2, 3, Commu),
    ];
    let crowded = vec![
        op(0, 0, 0, 0),
        op(0, 0, 1, 0),
        op(0, 0, 2, 0),
        rf(0, 0, Music),
        rf(0, 1, Navig),
        rf(0, 2, Commu),
        op(0, 1, 3, 0),
        rf(1, 3, Movie),
    ];
    vec![build(&[]), build(&walk), build(&crowded)]
}
