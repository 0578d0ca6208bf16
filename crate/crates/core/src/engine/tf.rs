use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Mode, PartyChoice, Scheme, SliceRelation, TallyTable};
use crate::quantities::{slice_unchecked, Phase};
use crate::rates::config::{Protocol, ProtocolConfig};

/// TF-QKD: random level, bit, basis and global phase per party. The phase
/// matching variant keeps β = 0 so every pair is in the key basis.
pub(crate) struct TwinField {
    protocol: Protocol,
    slice_count: u32,
    levels: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TwinField {
    pub(crate) fn new(config: &ProtocolConfig) -> Self {
        Self {
            protocol: config.variant,
            slice_count: config.slice_count,
            levels: config.intensity_levels(),
            cumulative: cumulative(&config.level_weights()),
        }
    }

    fn party(&self, rng: &mut ChaCha8Rng) -> PartyChoice {
        let level = pick(&self.cumulative, rng);
        let bit_phase = if rng.random::<bool>() { PI } else { 0.0 };
        let test = self.protocol != Protocol::Pm && rng.random::<bool>();
        PartyChoice {
            level,
            intensity: self.levels[level as usize] / 2.0,
            bit_phase,
            basis_phase: if test { FRAC_PI_2 } else { 0.0 },
            random_phase: rng.random::<f64>() * TAU,
            mode: if test { Mode::Test } else { Mode::Key },
            sends: true,
        }
    }
}

impl Scheme for TwinField {
    fn choose(&self, rng: &mut ChaCha8Rng) -> (PartyChoice, PartyChoice) {
        let alice = self.party(rng);
        (alice, self.party(rng))
    }

    fn classify(&self, alice: &PartyChoice, bob: &PartyChoice) -> (SliceRelation, bool) {
        let slice = |p: &PartyChoice| slice_unchecked(Phase::new(p.random_phase), self.slice_count);
        (SliceRelation::of(slice(alice), slice(bob)), alice.bit_phase == bob.bit_phase)
    }

    fn table(&self) -> TallyTable {
        TallyTable::new(self.protocol, self.slice_count, self.levels.clone())
    }
}

pub(super) fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Draws an index from cumulative weights ending at 1.
pub(super) fn pick(cumulative: &[f64], rng: &mut ChaCha8Rng) -> u8 {
    if cumulative.len() == 1 {
        return 0;
    }
    let u: f64 = rng.random();
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1) as u8
}
