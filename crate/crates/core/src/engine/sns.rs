use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Mode, PartyChoice, Scheme, SliceRelation, TallyTable};
use crate::rates::config::{Protocol, ProtocolConfig, SnsCondition};

const SIGNAL: u8 = 0;
const TEST: u8 = 1;
const VACUUM: u8 = 2;

/// Sending or not sending. Levels are `[μ, μ′, 0]`. In the Z window Alice's
/// sending encodes 0 and Bob's encodes 1, so a correct bit needs exactly one
/// sender; X-window pulses carry random phases and are kept when the test
/// condition holds.
pub(crate) struct SendNotSend {
    slice_count: u32,
    key_prob: f64,
    send_prob: f64,
    lambda: f64,
    condition: SnsCondition,
    levels: Vec<f64>,
}

impl SendNotSend {
    pub(crate) fn new(config: &ProtocolConfig) -> Self {
        Self {
            slice_count: config.slice_count,
            key_prob: config.key_mode_prob,
            send_prob: config.send_prob,
            lambda: config.sns_test_param,
            condition: config.sns_condition,
            levels: vec![config.signal_intensity, config.sns_test_intensity, 0.0],
        }
    }

    fn party(&self, rng: &mut ChaCha8Rng) -> PartyChoice {
        let z = rng.random::<f64>() < self.key_prob;
        let (level, mode, sends) = if z {
            let sends = rng.random::<f64>() < self.send_prob;
            (if sends { SIGNAL } else { VACUUM }, Mode::Key, sends)
        } else {
            (TEST, Mode::Test, true)
        };
        PartyChoice {
            level,
            intensity: self.levels[level as usize] / 2.0,
            bit_phase: 0.0,
            basis_phase: 0.0,
            random_phase: rng.random::<f64>() * TAU,
            mode,
            sends,
        }
    }
}

impl Scheme for SendNotSend {
    fn choose(&self, rng: &mut ChaCha8Rng) -> (PartyChoice, PartyChoice) {
        let alice = self.party(rng);
        (alice, self.party(rng))
    }

    fn classify(&self, alice: &PartyChoice, bob: &PartyChoice) -> (SliceRelation, bool) {
        match (alice.mode, bob.mode) {
            // Alice's bit is 0 when she sends, Bob's is 1 when he sends
            (Mode::Key, Mode::Key) => (SliceRelation::Other, alice.sends != bob.sends),
            (Mode::Test, Mode::Test) => {
                let (ra, rb) = (alice.random_phase, bob.random_phase);
                let relation = if !self.condition.accepts(ra, rb, self.lambda) {
                    SliceRelation::Other
                } else if (ra - rb).cos() >= 0.0 {
                    SliceRelation::Same
                } else {
                    SliceRelation::Opposite
                };
                (relation, true)
            }
            _ => (SliceRelation::Other, true),
        }
    }

    fn table(&self) -> TallyTable {
        TallyTable::new(Protocol::Sns, self.slice_count, self.levels.clone())
    }
}
