use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::tf::{cumulative, pick};
use super::{Mode, PartyChoice, Scheme, SliceRelation, TallyTable};
use crate::quantities::{slice_unchecked, Phase};
use crate::rates::config::{Protocol, ProtocolConfig};

/// Key states are phase-locked coherent pulses `|±√(μ/2)⟩`; test states are
/// phase-randomised at any level. PM-MDI draws test phases from
/// {0, π/2, π, 3π/2}, NPP from the full circle.
pub(crate) struct KeyTest {
    protocol: Protocol,
    slice_count: u32,
    key_prob: f64,
    levels: Vec<f64>,
    cumulative: Vec<f64>,
}

impl KeyTest {
    pub(crate) fn new(config: &ProtocolConfig) -> Self {
        Self {
            protocol: config.variant,
            slice_count: config.slice_count,
            key_prob: config.key_mode_prob,
            levels: config.intensity_levels(),
            cumulative: cumulative(&config.level_weights()),
        }
    }

    fn party(&self, rng: &mut ChaCha8Rng) -> PartyChoice {
        if rng.random::<f64>() < self.key_prob {
            let bit_phase = if rng.random::<bool>() { PI } else { 0.0 };
            return PartyChoice {
                level: 0,
                intensity: self.levels[0] / 2.0,
                bit_phase,
                basis_phase: 0.0,
                random_phase: 0.0,
                mode: Mode::Key,
                sends: true,
            };
        }
        let level = pick(&self.cumulative, rng);
        let random_phase = if self.protocol == Protocol::PmMdi {
            FRAC_PI_2 * rng.random_range(0..4u8) as f64
        } else {
            rng.random::<f64>() * TAU
        };
        PartyChoice {
            level,
            intensity: self.levels[level as usize] / 2.0,
            bit_phase: 0.0,
            basis_phase: 0.0,
            random_phase,
            mode: Mode::Test,
            sends: true,
        }
    }
}

impl Scheme for KeyTest {
    fn choose(&self, rng: &mut ChaCha8Rng) -> (PartyChoice, PartyChoice) {
        let alice = self.party(rng);
        (alice, self.party(rng))
    }

    fn classify(&self, alice: &PartyChoice, bob: &PartyChoice) -> (SliceRelation, bool) {
        let bits_agree = alice.bit_phase == bob.bit_phase;
        let relation = match (alice.mode, bob.mode) {
            // key states share the locked reference phase
            (Mode::Key, Mode::Key) => SliceRelation::Same,
            (Mode::Test, Mode::Test) => {
                let slice = |p: &PartyChoice| slice_unchecked(Phase::new(p.random_phase), self.slice_count);
                SliceRelation::of(slice(alice), slice(bob))
            }
            _ => SliceRelation::Other,
        };
        (relation, bits_agree)
    }

    fn table(&self) -> TallyTable {
        TallyTable::new(self.protocol, self.slice_count, self.levels.clone())
    }
}
