use super::blocks::{BPSK, QAM16, QAM64, QPSK, RATE_1_2, RATE_2_3, RATE_3_4};
use crate::sim::Scenario;
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mode {
    pub index: usize,
    pub code_rate: i64,
    pub modulation: i64,
    pub repetition: i64,
}

/// The seven mandatory modes of operation.
pub const MODES: [Mode; 7] = [
    Mode { index: 0, code_rate: RATE_1_2, modulation: BPSK, repetition: 1 },
    Mode { index: 1, code_rate: RATE_1_2, modulation: QPSK, repetition: 2 },
    Mode { index: 2, code_rate: RATE_1_2, modulation: QAM16, repetition: 1 },
    Mode { index: 3, code_rate: RATE_3_4, modulation: QPSK, repetition: 1 },
    Mode { index: 4, code_rate: RATE_3_4, modulation: QAM16, repetition: 1 },
    Mode { index: 5, code_rate: RATE_2_3, modulation: QAM64, repetition: 1 },
    Mode { index: 6, code_rate: RATE_3_4, modulation: QAM64, repetition: 1 },
];

impl Mode {
    pub fn name(&self) -> String {
        format!("mode_{}", self.index)
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            name: self.name(),
            bindings: vec![
                ("CODE_RATE".into(), Term::int(self.code_rate)),
                ("MODULATION".into(), Term::int(self.modulation)),
                ("REPETITION".into(), Term::int(self.repetition)),
            ],
        }
    }
}

pub fn mode_by_name(name: &str) -> Option<Mode> {
    MODES.iter().copied().find(|m| m.name() == name)
}

/// Single control scenario: mode 0 only.
pub fn single() -> Vec<Scenario> {
    vec![MODES[0].scenario()]
}

/// Multiple control scenario: all seven modes.
pub fn multiple() -> Vec<Scenario> {
    MODES.iter().map(Mode::scenario).collect()
}
