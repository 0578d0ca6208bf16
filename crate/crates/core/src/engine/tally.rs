//! Raw outcome counts and the estimates derived from them.

use serde::{Deserialize, Serialize};

use crate::engine::measure::Outcome;
use crate::error::{Error, Result};
use crate::quantities::PhaseSliceIndex;
use crate::rates::config::Protocol;
use crate::stats::binomial_std_err;

/// Per-party mode: X basis / key state / Z window versus everything used only
/// for parameter estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Key,
    Test,
}

impl Mode {
    const ALL: [Mode; 2] = [Self::Key, Self::Test];
}

/// How the two random phases of a pair relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceRelation {
    Same,
    Opposite,
    Other,
}

impl SliceRelation {
    const ALL: [SliceRelation; 3] = [Self::Same, Self::Opposite, Self::Other];

    pub fn of(a: PhaseSliceIndex, b: PhaseSliceIndex) -> Self {
        if a == b {
            Self::Same
        } else if a.opposite() == b {
            Self::Opposite
        } else {
            Self::Other
        }
    }
}

/// Grouping key of one tallied pulse pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TallyKey {
    pub alice_level: u8,
    pub bob_level: u8,
    pub alice_mode: Mode,
    pub bob_mode: Mode,
    pub relation: SliceRelation,
    pub bits_agree: bool,
    pub outcome: Outcome,
}

impl TallyKey {
    fn index(&self, levels: usize) -> usize {
        let mut i = self.alice_level as usize;
        i = i * levels + self.bob_level as usize;
        i = i * 2 + self.alice_mode as usize;
        i = i * 2 + self.bob_mode as usize;
        i = i * 3 + self.relation as usize;
        i = i * 2 + self.bits_agree as usize;
        i * 4 + self.outcome.index()
    }

    fn from_index(mut i: usize, levels: usize) -> Self {
        let outcome = Outcome::ALL[i % 4];
        i /= 4;
        let bits_agree = i % 2 == 1;
        i /= 2;
        let relation = SliceRelation::ALL[i % 3];
        i /= 3;
        let bob_mode = Mode::ALL[i % 2];
        i /= 2;
        let alice_mode = Mode::ALL[i % 2];
        i /= 2;
        let bob_level = (i % levels) as u8;
        let alice_level = (i / levels) as u8;
        Self { alice_level, bob_level, alice_mode, bob_mode, relation, bits_agree, outcome }
    }

    fn both(&self, mode: Mode) -> bool {
        self.alice_mode == mode && self.bob_mode == mode
    }

    fn levels(&self, a: u8, b: u8) -> bool {
        self.alice_level == a && self.bob_level == b
    }
}

/// Counts keyed by [`TallyKey`]. Counts always sum to `pulses`.
#[derive(Debug, Clone, PartialEq)]
pub struct TallyTable {
    protocol: Protocol,
    slice_count: u32,
    levels: Vec<f64>,
    pulses: u64,
    counts: Vec<u64>,
}

impl TallyTable {
    /// Empty table. `levels` are the total intensities indexed by the key's
    /// level fields.
    pub fn new(protocol: Protocol, slice_count: u32, levels: Vec<f64>) -> Self {
        let n = levels.len().max(1);
        Self { protocol, slice_count, levels, pulses: 0, counts: vec![0; n * n * 192] }
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn slice_count(&self) -> u32 {
        self.slice_count
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn pulses(&self) -> u64 {
        self.pulses
    }

    pub fn record(&mut self, key: TallyKey) {
        let i = key.index(self.levels.len());
        self.counts[i] += 1;
        self.pulses += 1;
    }

    pub fn count(&self, key: &TallyKey) -> u64 {
        self.counts[key.index(self.levels.len())]
    }

    /// Non-zero entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (TallyKey, u64)> + '_ {
        let levels = self.levels.len();
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (TallyKey::from_index(i, levels), c))
    }

    /// Total count over keys accepted by `filter`.
    pub fn count_where<F: Fn(&TallyKey) -> bool>(&self, filter: F) -> u64 {
        self.entries().filter(|(k, _)| filter(k)).map(|(_, c)| c).sum()
    }

    pub fn is_compatible(&self, other: &Self) -> bool {
        self.protocol == other.protocol && self.slice_count == other.slice_count && self.levels == other.levels
    }

    /// Adds another table's counts into this one.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if !self.is_compatible(other) {
            return Err(Error::IncompatibleTallies(format!(
                "{} (M={}, levels {:?}) vs {} (M={}, levels {:?})",
                self.protocol, self.slice_count, self.levels, other.protocol, other.slice_count, other.levels
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.pulses += other.pulses;
        Ok(())
    }

    /// Whether a single click is a bit error, for keys in an error-rate group.
    fn is_error(&self, key: &TallyKey) -> bool {
        if self.protocol == Protocol::Sns && key.both(Mode::Key) {
            return !key.bits_agree;
        }
        let expect_d0 = key.bits_agree ^ (key.relation == SliceRelation::Opposite);
        (key.outcome == Outcome::D0Only) != expect_d0
    }

    /// Pairs contributing to the gain `Q_μ`.
    fn in_signal_group(&self, key: &TallyKey) -> bool {
        match self.protocol {
            Protocol::TfGllp | Protocol::TfStar | Protocol::Pm => key.levels(0, 0),
            Protocol::Npp | Protocol::PmMdi | Protocol::Sns => key.both(Mode::Key),
        }
    }

    /// Pairs whose single clicks form the sifted key.
    fn in_key_group(&self, key: &TallyKey) -> bool {
        match self.protocol {
            Protocol::TfGllp | Protocol::TfStar => {
                key.levels(0, 0) && key.both(Mode::Key) && key.relation == SliceRelation::Same
            }
            Protocol::Pm => key.levels(0, 0) && key.relation != SliceRelation::Other,
            Protocol::Npp | Protocol::PmMdi | Protocol::Sns => key.both(Mode::Key),
        }
    }

    /// Pairs used to estimate the phase error.
    fn in_phase_group(&self, key: &TallyKey) -> bool {
        let matched = key.relation != SliceRelation::Other;
        match self.protocol {
            Protocol::TfGllp | Protocol::TfStar => key.levels(0, 0) && key.both(Mode::Test) && matched,
            Protocol::Pm => {
                let level = if self.levels.len() > 1 { 1 } else { 0 };
                key.levels(level, level) && matched
            }
            Protocol::Npp | Protocol::PmMdi => key.levels(0, 0) && key.both(Mode::Test) && matched,
            Protocol::Sns => key.levels(1, 1) && key.both(Mode::Test) && matched,
        }
    }
}

/// A binomial proportion with its standard error. When no successes were
/// seen the error is the one-sided 68.27 % upper limit `1 − 0.3173^{1/n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let value = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Self { value, std_err: binomial_std_err(successes, trials), successes, trials }
    }
}

/// Point estimates recovered from a tally table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatedStats {
    /// Single clicks per signal pulse pair.
    pub gain: Estimate,
    /// Bit errors among sifted single clicks.
    pub qber_z: Estimate,
    /// Errors among matched estimation pairs.
    pub phase_error_x: Estimate,
    /// Sifted single clicks per simulated pulse.
    pub sifted_fraction: Estimate,
}

fn ratio(table: &TallyTable, group: &str, member: impl Fn(&TallyKey) -> bool, hit: impl Fn(&TallyKey) -> bool) -> Result<Estimate> {
    let (mut successes, mut trials) = (0, 0);
    for (key, c) in table.entries().filter(|(k, _)| member(k)) {
        trials += c;
        if hit(&key) {
            successes += c;
        }
    }
    if trials == 0 {
        return Err(Error::EmptyGroup { group: group.to_string() });
    }
    Ok(Estimate::from_counts(successes, trials))
}

/// Gains and error rates with binomial standard errors.
pub fn tallies_to_stats(table: &TallyTable) -> Result<EstimatedStats> {
    if table.pulses == 0 {
        return Err(Error::EmptyGroup { group: "all pulses".into() });
    }
    let gain = ratio(table, "signal pairs", |k| table.in_signal_group(k), |k| k.outcome.is_single())?;
    let single = |k: &TallyKey| k.outcome.is_single();
    let qber_z = ratio(
        table,
        "sifted key clicks",
        |k| table.in_key_group(k) && single(k),
        |k| table.is_error(k),
    )?;
    let phase_error_x = ratio(
        table,
        "phase-estimation clicks",
        |k| table.in_phase_group(k) && single(k),
        |k| table.is_error(k),
    )?;
    let sifted = table.count_where(|k| table.in_key_group(k) && single(k));
    Ok(EstimatedStats {
        gain,
        qber_z,
        phase_error_x,
        sifted_fraction: Estimate::from_counts(sifted, table.pulses),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(outcome: Outcome, relation: SliceRelation, bits_agree: bool) -> TallyKey {
        TallyKey {
            alice_level: 0,
            bob_level: 0,
            alice_mode: Mode::Key,
            bob_mode: Mode::Key,
            relation,
            bits_agree,
            outcome,
        }
    }

    #[test]
    fn index_round_trip() {
        let levels = 3;
        for i in 0..levels * levels * 192 {
            assert_eq!(TallyKey::from_index(i, levels).index(levels), i);
        }
    }

    #[test]
    fn planted_counts_are_recovered() {
        let mut t = TallyTable::new(Protocol::TfGllp, 16, vec![0.4, 0.1, 0.0]);
        let plant = [
            (key(Outcome::D0Only, SliceRelation::Same, true), 90),
            (key(Outcome::D1Only, SliceRelation::Same, true), 10),
            (key(Outcome::NoClick, SliceRelation::Same, true), 899_900),
            (key(Outcome::NoClick, SliceRelation::Other, true), 100_000),
        ];
        for (k, n) in plant {
            for _ in 0..n {
                t.record(k);
            }
        }
        let mut test_key = key(Outcome::D1Only, SliceRelation::Opposite, true);
        test_key.alice_mode = Mode::Test;
        test_key.bob_mode = Mode::Test;
        t.record(test_key);
        assert_eq!(t.pulses(), 1_000_001);
        let s = tallies_to_stats(&t).unwrap();
        assert_eq!(s.gain.successes, 101);
        assert_eq!(s.qber_z.value, 0.1);
        assert_eq!(s.phase_error_x.value, 0.0);
        assert_eq!(s.sifted_fraction.successes, 100);
    }

    #[test]
    fn zero_errors_give_one_sided_error_bar() {
        let mut t = TallyTable::new(Protocol::Npp, 16, vec![0.4, 0.0]);
        for _ in 0..100 {
            t.record(key(Outcome::D0Only, SliceRelation::Same, true));
        }
        let mut k = key(Outcome::D1Only, SliceRelation::Opposite, true);
        k.alice_mode = Mode::Test;
        k.bob_mode = Mode::Test;
        t.record(k);
        let s = tallies_to_stats(&t).unwrap();
        assert_eq!(s.qber_z.value, 0.0);
        assert!((s.qber_z.std_err - (1.0 - 0.3173f64.powf(0.01))).abs() < 1e-12);
    }

    #[test]
    fn empty_group_is_named() {
        let t = TallyTable::new(Protocol::Sns, 16, vec![0.4, 0.1, 0.0]);
        assert!(matches!(tallies_to_stats(&t), Err(Error::EmptyGroup { .. })));
        let mut t = t;
        t.record(key(Outcome::NoClick, SliceRelation::Other, true));
        match tallies_to_stats(&t) {
            Err(Error::EmptyGroup { group }) => assert_eq!(group, "sifted key clicks"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn merge_checks_compatibility() {
        let mut a = TallyTable::new(Protocol::Pm, 16, vec![0.4]);
        let b = TallyTable::new(Protocol::Pm, 8, vec![0.4]);
        assert!(a.merge(&b).is_err());
        let mut c = TallyTable::new(Protocol::Pm, 16, vec![0.4]);
        c.record(key(Outcome::D0Only, SliceRelation::Same, true));
        a.merge(&c).unwrap();
        a.merge(&c).unwrap();
        assert_eq!(a.pulses(), 2);
        assert_eq!(a.count(&key(Outcome::D0Only, SliceRelation::Same, true)), 2);
    }
}
