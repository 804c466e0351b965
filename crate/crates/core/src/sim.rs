//! Scripted adversarial scenarios.
//!
//! Each scenario drives simulated transmitters and receivers with explicit
//! step clocks; the adversary only sees, drops, delays, copies or mutates
//! frame bytes. Every run is a pure function of `(kind, config)`.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::aead::SecretKey;
use crate::counter_store::{CounterStore, MemoryJournal, RECORD_LEN};
use crate::frame::{AssetId, FRAME_LEN, Iv, PAYLOAD_LEN, Timestamp};
use crate::replay::ReplayState;
use crate::sweep::{self, Exec, map_indices};
use crate::txrx::{
    AcceptancePolicy, Clock, FixedClock, ManualClock, VerdictKind, receive, transmit,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid scenario config: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    TimeRollback,
    PowerLoss,
    ReplayInjection,
    CrossSiteReplay,
    DtnWindow,
    BitflipSweep,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::TimeRollback,
        ScenarioKind::PowerLoss,
        ScenarioKind::ReplayInjection,
        ScenarioKind::CrossSiteReplay,
        ScenarioKind::DtnWindow,
        ScenarioKind::BitflipSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::TimeRollback => "time-rollback",
            ScenarioKind::PowerLoss => "power-loss",
            ScenarioKind::ReplayInjection => "replay-injection",
            ScenarioKind::CrossSiteReplay => "cross-site-replay",
            ScenarioKind::DtnWindow => "dtn-window",
            ScenarioKind::BitflipSweep => "bitflip-sweep",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Ground stations in cross-site-replay.
    pub stations: usize,
    /// How far the sender RTC is stepped back in time-rollback.
    pub rollback_s: u64,
    /// Store-and-forward delay applied in dtn-window.
    pub dtn_delay_s: u64,
    pub dtn_window_s: u64,
    /// Extra redeliveries of the captured frame in replay-injection.
    pub replays: usize,
    /// Clean transmits before the first crash in power-loss.
    pub warmup_frames: usize,
    /// Bytes of the in-flight journal record that survive each crash.
    pub crash_offsets: Vec<usize>,
    /// Appends swept (at every offset) by the independent crash traces.
    pub crash_records: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            stations: 2,
            rollback_s: 3_600,
            dtn_delay_s: 3_600,
            dtn_window_s: crate::txrx::DTN_WINDOW_SECS,
            replays: 1,
            warmup_frames: 4,
            crash_offsets: (0..=RECORD_LEN).collect(),
            crash_records: 4,
        }
    }
}

impl ScenarioConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.stations < 2 {
            return Err(SimError::Config(
                "cross-site replay needs at least two stations",
            ));
        }
        if self.crash_offsets.iter().any(|&o| o > RECORD_LEN) {
            return Err(SimError::Config("crash offset beyond record length"));
        }
        if self.dtn_delay_s <= crate::txrx::NORMAL_WINDOW_SECS
            || self.dtn_delay_s > self.dtn_window_s
        {
            return Err(SimError::Config(
                "dtn delay must exceed the normal window and fit the dtn window",
            ));
        }
        if self.rollback_s <= crate::txrx::NORMAL_WINDOW_SECS {
            return Err(SimError::Config("rollback must exceed the normal window"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub config: ScenarioConfig,
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        Self {
            kind,
            config: ScenarioConfig::default(),
        }
    }

    pub fn parse(name: &str, config: ScenarioConfig) -> Result<Self, SimError> {
        Ok(Self {
            kind: name.parse()?,
            config,
        })
    }
}

/// What a step is expected to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Verdict(VerdictKind),
    /// Anything but `OK`.
    Rejected,
    UniqueIv,
    Count(usize),
    Synced,
}

/// What a step actually produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observed {
    Verdict(VerdictKind),
    UniqueIv,
    ReusedIv,
    Count(usize),
    Synced,
    Diverged,
}

impl Expect {
    pub fn matches(self, observed: Observed) -> bool {
        match (self, observed) {
            (Expect::Verdict(e), Observed::Verdict(o)) => e == o,
            (Expect::Rejected, Observed::Verdict(o)) => o != VerdictKind::Ok,
            (Expect::UniqueIv, Observed::UniqueIv) => true,
            (Expect::Count(e), Observed::Count(o)) => e == o,
            (Expect::Synced, Observed::Synced) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Verdict(v) => write!(f, "{v}"),
            Expect::Rejected => f.write_str("REJECTED"),
            Expect::UniqueIv => f.write_str("UNIQUE_IV"),
            Expect::Count(n) => write!(f, "COUNT({n})"),
            Expect::Synced => f.write_str("SYNCED"),
        }
    }
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Verdict(v) => write!(f, "{v}"),
            Observed::UniqueIv => f.write_str("UNIQUE_IV"),
            Observed::ReusedIv => f.write_str("REUSED_IV"),
            Observed::Count(n) => write!(f, "COUNT({n})"),
            Observed::Synced => f.write_str("SYNCED"),
            Observed::Diverged => f.write_str("DIVERGED"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub action: String,
    pub expected: Expect,
    pub observed: Observed,
}

impl Step {
    pub fn passed(&self) -> bool {
        self.expected.matches(self.observed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub steps: Vec<Step>,
    pub passed: bool,
}

impl ScenarioReport {
    fn new(kind: ScenarioKind, seed: u64, steps: Vec<Step>) -> Self {
        let passed = steps.iter().all(Step::passed);
        Self {
            kind,
            seed,
            steps,
            passed,
        }
    }

    pub fn observed_verdicts(&self) -> Vec<VerdictKind> {
        self.steps
            .iter()
            .filter_map(|s| match s.observed {
                Observed::Verdict(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} (seed {})\n", self.kind, self.seed);
        for (i, step) in self.steps.iter().enumerate() {
            let mark = if step.passed() { "ok  " } else { "FAIL" };
            let _ = writeln!(
                out,
                "  [{mark}] {i:>3} {}: expected {}, observed {}",
                step.action, step.expected, step.observed
            );
        }
        let _ = writeln!(
            out,
            "  => {}",
            if self.passed { "PASSED" } else { "FAILED" }
        );
        out
    }

    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario = {}", self.kind);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "steps = {}", self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let _ = writeln!(out, "step.{i}.action = {}", step.action);
            let _ = writeln!(out, "step.{i}.expected = {}", step.expected);
            let _ = writeln!(out, "step.{i}.observed = {}", step.observed);
        }
        let _ = writeln!(out, "passed = {}", self.passed);
        out
    }
}

/// Deterministic actors derived from the seed.
struct World {
    key: SecretKey,
    asset: AssetId,
    start: Timestamp,
    rng: ChaCha8Rng,
}

impl World {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        let asset = AssetId(rng.next_u32() as u16);
        // Somewhere in 2023..2025, whole seconds.
        let start = Timestamp(1_672_531_200 + rng.next_u64() % (2 * 365 * 86_400));
        Self {
            key: SecretKey::from_bytes(&key),
            asset,
            start,
            rng,
        }
    }

    fn payload(&mut self) -> [u8; PAYLOAD_LEN] {
        let mut p = [0u8; PAYLOAD_LEN];
        self.rng.fill_bytes(&mut p);
        // Low six bits of the last byte are SGB padding.
        p[PAYLOAD_LEN - 1] &= 0xc0;
        p
    }

    fn send(
        &mut self,
        store: &mut CounterStore<MemoryJournal>,
        clock: &impl Clock,
    ) -> [u8; FRAME_LEN] {
        let payload = self.payload();
        transmit(&self.key, self.asset, &payload, clock, store)
            .expect("simulated journal does not fail")
            .to_bytes()
    }

    fn deliver(
        &self,
        frame: &[u8],
        clock: &impl Clock,
        state: &mut ReplayState,
        policy: &AcceptancePolicy,
    ) -> Observed {
        Observed::Verdict(receive(&self.key, frame, clock, state, policy).kind())
    }
}

fn verdict_step(action: impl Into<String>, expected: VerdictKind, observed: Observed) -> Step {
    Step {
        action: action.into(),
        expected: Expect::Verdict(expected),
        observed,
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport, SimError> {
    run_scenario_with(scenario, Exec::default())
}

/// As [`run_scenario`], choosing how internal sweeps execute. The report is
/// identical either way.
pub fn run_scenario_with(scenario: &Scenario, exec: Exec) -> Result<ScenarioReport, SimError> {
    let config = &scenario.config;
    config.validate()?;
    let steps = match scenario.kind {
        ScenarioKind::TimeRollback => time_rollback(config),
        ScenarioKind::PowerLoss => power_loss(config, exec),
        ScenarioKind::ReplayInjection => replay_injection(config),
        ScenarioKind::CrossSiteReplay => cross_site_replay(config),
        ScenarioKind::DtnWindow => dtn_window(config),
        ScenarioKind::BitflipSweep => bitflip(config, exec),
    };
    Ok(ScenarioReport::new(scenario.kind, config.seed, steps))
}

/// Every scenario with one config; scenarios run concurrently under
/// [`Exec::Parallel`].
pub fn run_all(config: &ScenarioConfig, exec: Exec) -> Result<Vec<ScenarioReport>, SimError> {
    config.validate()?;
    map_indices(exec, ScenarioKind::ALL.len(), |i| {
        let scenario = Scenario {
            kind: ScenarioKind::ALL[i],
            config: config.clone(),
        };
        run_scenario_with(&scenario, exec)
    })
    .into_iter()
    .collect()
}

fn time_rollback(config: &ScenarioConfig) -> Vec<Step> {
    let mut w = World::new(config.seed);
    let mut store = CounterStore::recover(&[]);
    let ground = ManualClock::new(w.start);
    let rtc = ManualClock::new(w.start);
    rtc.rewind(config.rollback_s);

    let mut state = ReplayState::new();
    let normal = AcceptancePolicy::normal();
    let counter_only = AcceptancePolicy::counter_only();
    let mut steps = Vec::new();

    let f1 = w.send(&mut store, &rtc);
    rtc.advance(1);
    ground.advance(1);
    let f2 = w.send(&mut store, &rtc);

    let obs = w.deliver(&f1, &ground, &mut state, &normal);
    steps.push(verdict_step(
        "normal: frame 1 from rolled-back RTC",
        VerdictKind::Stale,
        obs,
    ));
    let obs = w.deliver(&f2, &ground, &mut state, &normal);
    steps.push(verdict_step(
        "normal: frame 2 from rolled-back RTC",
        VerdictKind::Stale,
        obs,
    ));
    let obs = w.deliver(&f1, &ground, &mut state, &counter_only);
    steps.push(verdict_step("counter-only: frame 1", VerdictKind::Ok, obs));
    let obs = w.deliver(&f1, &ground, &mut state, &counter_only);
    steps.push(verdict_step(
        "counter-only: frame 1 replayed",
        VerdictKind::Replay,
        obs,
    ));
    let obs = w.deliver(&f2, &ground, &mut state, &counter_only);
    steps.push(verdict_step("counter-only: frame 2", VerdictKind::Ok, obs));

    let iv = |f: &[u8; FRAME_LEN]| Iv::from_bytes(f[2..14].try_into().unwrap());
    steps.push(Step {
        action: "IVs distinct despite rollback".into(),
        expected: Expect::UniqueIv,
        observed: if iv(&f1) != iv(&f2) {
            Observed::UniqueIv
        } else {
            Observed::ReusedIv
        },
    });

    rtc.set(ground.now());
    ground.advance(1);
    rtc.advance(1);
    let f3 = w.send(&mut store, &rtc);
    let obs = w.deliver(&f3, &ground, &mut state, &normal);
    steps.push(verdict_step(
        "normal after resync: frame 3",
        VerdictKind::Ok,
        obs,
    ));
    steps
}

fn power_loss(config: &ScenarioConfig, exec: Exec) -> Vec<Step> {
    let w = World::new(config.seed);
    let ivs = sweep::chained_crash_trace(
        &w.key,
        w.asset,
        w.start,
        config.warmup_frames,
        &config.crash_offsets,
    );
    let mut seen = HashSet::new();
    let mut steps = Vec::with_capacity(ivs.len() + 2);
    for (i, iv) in ivs.iter().enumerate() {
        let action = match i.checked_sub(config.warmup_frames) {
            None => format!("clean transmit, R={}", iv.counter),
            Some(c) => format!(
                "crash after {} journal bytes, recover, transmit R={}",
                config.crash_offsets[c], iv.counter
            ),
        };
        steps.push(Step {
            action,
            expected: Expect::UniqueIv,
            observed: if seen.insert(*iv) {
                Observed::UniqueIv
            } else {
                Observed::ReusedIv
            },
        });
    }
    steps.push(Step {
        action: "distinct IVs across chained trace".into(),
        expected: Expect::Count(ivs.len()),
        observed: Observed::Count(seen.len()),
    });

    if config.crash_records > 0 {
        let traces = sweep::crash_sweep(&w.key, w.asset, w.start, config.crash_records, 2, exec);
        steps.push(Step {
            action: format!(
                "independent traces: crash at every byte of the first {} appends",
                config.crash_records
            ),
            expected: Expect::Count(traces.len()),
            observed: Observed::Count(traces.iter().filter(|t| t.ivs_unique()).count()),
        });
    }
    steps
}

fn replay_injection(config: &ScenarioConfig) -> Vec<Step> {
    let mut w = World::new(config.seed);
    let mut store = CounterStore::recover(&[]);
    let sender = FixedClock(w.start);
    let ground = ManualClock::new(w.start);
    let mut state = ReplayState::new();
    let policy = AcceptancePolicy::normal();

    let captured = w.send(&mut store, &sender);
    ground.advance(1);
    let mut steps = vec![verdict_step(
        "genuine frame delivered",
        VerdictKind::Ok,
        w.deliver(&captured, &ground, &mut state, &policy),
    )];
    for i in 0..config.replays {
        steps.push(verdict_step(
            format!("adversary re-sends captured copy #{}", i + 1),
            VerdictKind::Replay,
            w.deliver(&captured, &ground, &mut state, &policy),
        ));
    }
    steps
}

fn cross_site_replay(config: &ScenarioConfig) -> Vec<Step> {
    let mut w = World::new(config.seed);
    let mut store = CounterStore::recover(&[]);
    let sender = ManualClock::new(w.start);
    let ground = ManualClock::new(w.start);
    let policy = AcceptancePolicy::dtn(config.dtn_window_s);
    let mut stations = vec![ReplayState::new(); config.stations];
    let mut steps = Vec::new();

    let f1 = w.send(&mut store, &sender);
    sender.advance(1);
    let f2 = w.send(&mut store, &sender);
    ground.advance(config.dtn_delay_s);

    let obs = w.deliver(&f1, &ground, &mut stations[0], &policy);
    steps.push(verdict_step("station 1: frame 1", VerdictKind::Ok, obs));
    let obs = w.deliver(&f1, &ground, &mut stations[1], &policy);
    steps.push(verdict_step(
        "station 2: frame 1 replayed before sync (accepted)",
        VerdictKind::Ok,
        obs,
    ));
    let obs = w.deliver(&f2, &ground, &mut stations[0], &policy);
    steps.push(verdict_step("station 1: frame 2", VerdictKind::Ok, obs));

    let joined = stations
        .iter()
        .fold(ReplayState::new(), |acc, s| acc.merge(s));
    for s in stations.iter_mut() {
        *s = s.merge(&joined);
    }
    steps.push(Step {
        action: format!("merge replay state across {} stations", stations.len()),
        expected: Expect::Synced,
        observed: if stations.iter().all(|s| *s == joined) {
            Observed::Synced
        } else {
            Observed::Diverged
        },
    });

    for (i, state) in stations.iter_mut().enumerate().skip(1) {
        for (name, frame) in [("frame 2", &f2), ("frame 1", &f1)] {
            let obs = w.deliver(frame, &ground, state, &policy);
            steps.push(verdict_step(
                format!("station {}: {name} replayed after sync", i + 1),
                VerdictKind::Replay,
                obs,
            ));
        }
    }
    steps
}

fn dtn_window(config: &ScenarioConfig) -> Vec<Step> {
    let mut w = World::new(config.seed);
    let mut store = CounterStore::recover(&[]);
    let sender = FixedClock(w.start);
    let ground = ManualClock::new(w.start);
    let normal = AcceptancePolicy::normal();
    let dtn = AcceptancePolicy::dtn(config.dtn_window_s);
    let mut state = ReplayState::new();

    let frame = w.send(&mut store, &sender);
    ground.advance(config.dtn_delay_s);
    let mut steps = Vec::new();
    let obs = w.deliver(&frame, &ground, &mut state, &normal);
    steps.push(verdict_step(
        format!("normal: delivered {} s late", config.dtn_delay_s),
        VerdictKind::Stale,
        obs,
    ));
    let obs = w.deliver(&frame, &ground, &mut state, &dtn);
    steps.push(verdict_step(
        "dtn-relaxed: same frame",
        VerdictKind::Ok,
        obs,
    ));
    let obs = w.deliver(&frame, &ground, &mut state, &dtn);
    steps.push(verdict_step(
        "dtn-relaxed: redelivered",
        VerdictKind::Replay,
        obs,
    ));

    ground.advance(config.dtn_window_s);
    let mut fresh = ReplayState::new();
    let obs = w.deliver(&frame, &ground, &mut fresh, &dtn);
    steps.push(verdict_step(
        "dtn-relaxed: beyond the relaxed window",
        VerdictKind::Stale,
        obs,
    ));
    steps
}

fn bitflip(config: &ScenarioConfig, exec: Exec) -> Vec<Step> {
    let mut w = World::new(config.seed);
    let mut store = CounterStore::recover(&[]);
    let clock = FixedClock(w.start);
    let frame = w.send(&mut store, &clock);
    let policy = AcceptancePolicy::normal();

    let mut steps = Vec::with_capacity(FRAME_LEN * 8 + 1);
    let baseline = receive(&w.key, &frame, &clock, &mut ReplayState::new(), &policy);
    steps.push(verdict_step(
        "unmodified frame",
        VerdictKind::Ok,
        Observed::Verdict(baseline.kind()),
    ));
    let verdicts =
        sweep::bitflip_sweep(&w.key, &frame, w.start, &ReplayState::new(), &policy, exec);
    steps.extend(verdicts.into_iter().enumerate().map(|(bit, v)| Step {
        action: format!(
            "flip bit {bit} (byte {}, mask {:#04x})",
            bit / 8,
            0x80u8 >> (bit % 8)
        ),
        expected: Expect::Rejected,
        observed: Observed::Verdict(v),
    }));
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for kind in ScenarioKind::ALL {
            assert_eq!(kind.name().parse::<ScenarioKind>().unwrap(), kind);
        }
        assert_eq!(
            "jamming".parse::<ScenarioKind>(),
            Err(SimError::UnknownScenario("jamming".into()))
        );
    }

    #[test]
    fn replay_injection_default() {
        let report = run_scenario(&Scenario::new(ScenarioKind::ReplayInjection)).unwrap();
        assert_eq!(
            report.observed_verdicts(),
            vec![VerdictKind::Ok, VerdictKind::Replay]
        );
        assert!(report.passed);
    }

    #[test]
    fn bitflip_has_448_mutations() {
        let report = run_scenario(&Scenario::new(ScenarioKind::BitflipSweep)).unwrap();
        assert_eq!(report.steps.len(), 449);
        assert_eq!(
            report
                .observed_verdicts()
                .iter()
                .filter(|v| **v == VerdictKind::Ok)
                .count(),
            1
        );
        assert!(report.passed);
    }

    #[test]
    fn power_loss_without_crashes_matches_clean_run() {
        let config = ScenarioConfig {
            crash_offsets: vec![],
            crash_records: 0,
            ..ScenarioConfig::default()
        };
        let report = run_scenario(&Scenario {
            kind: ScenarioKind::PowerLoss,
            config: config.clone(),
        })
        .unwrap();
        let w = World::new(config.seed);
        let mut store = CounterStore::recover(&[]);
        let clean: Vec<String> = (0..config.warmup_frames)
            .map(|_| {
                let f =
                    transmit(&w.key, w.asset, &[0; 26], &FixedClock(w.start), &mut store).unwrap();
                format!("clean transmit, R={}", f.iv.counter)
            })
            .collect();
        let actions: Vec<String> = report.steps[..config.warmup_frames]
            .iter()
            .map(|s| s.action.clone())
            .collect();
        assert_eq!(actions, clean);
        assert_eq!(report.steps.len(), config.warmup_frames + 1);
        assert!(report.passed);
    }

    #[test]
    fn every_scenario_passes_and_is_deterministic() {
        let config = ScenarioConfig::default();
        let a = run_all(&config, Exec::Parallel).unwrap();
        let b = run_all(&config, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.passed, "{}", r.to_text());
        }
    }

    #[test]
    fn config_errors() {
        let bad = ScenarioConfig {
            stations: 1,
            ..ScenarioConfig::default()
        };
        assert!(matches!(
            run_scenario(&Scenario {
                kind: ScenarioKind::CrossSiteReplay,
                config: bad
            }),
            Err(SimError::Config(_))
        ));
        let bad = ScenarioConfig {
            crash_offsets: vec![17],
            ..ScenarioConfig::default()
        };
        assert!(
            run_scenario(&Scenario {
                kind: ScenarioKind::PowerLoss,
                config: bad
            })
            .is_err()
        );
    }

    #[test]
    fn failing_step_fails_report() {
        let steps = vec![verdict_step(
            "x",
            VerdictKind::Ok,
            Observed::Verdict(VerdictKind::Replay),
        )];
        let report = ScenarioReport::new(ScenarioKind::ReplayInjection, 1, steps);
        assert!(!report.passed);
        assert!(report.to_key_value().ends_with("passed = false\n"));
    }
}
