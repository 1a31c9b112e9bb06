use serde::{Deserialize, Serialize};

use crate::params::NodeState;

/// Base-3 little-endian code of a network state: node 0 is the least
/// significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChainState(pub u64);

impl ChainState {
    pub fn encode(states: &[NodeState]) -> Self {
        let code = states
            .iter()
            .rev()
            .fold(0u64, |acc, s| acc * 3 + u64::from(s.digit()));
        ChainState(code)
    }

    pub fn decode(self, n: usize) -> Vec<NodeState> {
        let mut code = self.0;
        (0..n)
            .map(|_| {
                let d = (code % 3) as u8;
                code /= 3;
                NodeState::from_digit(d)
            })
            .collect()
    }

    pub fn uniform(n: usize, state: NodeState) -> Self {
        Self::encode(&vec![state; n])
    }

    pub fn node(self, i: usize) -> NodeState {
        NodeState::from_digit(((self.0 / pow3(i)) % 3) as u8)
    }

    pub fn code(self) -> u64 {
        self.0
    }
}

pub(crate) fn pow3(i: usize) -> u64 {
    3u64.pow(i as u32)
}

/// Number of network states, `3^n`.
pub(crate) fn state_count(n: usize) -> u64 {
    pow3(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn digit_layout() {
        let s = ChainState::encode(&[NodeState::I, NodeState::S, NodeState::R]);
        assert_eq!(s.0, 1 + 2 * 9);
        assert_eq!(s.node(0), NodeState::I);
        assert_eq!(s.node(2), NodeState::R);
        assert_eq!(ChainState::uniform(3, NodeState::S).0, 0);
        assert_eq!(ChainState::uniform(2, NodeState::R).0, 8);
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(n in 1usize..12, raw in any::<u64>()) {
            let code = raw % state_count(n);
            let s = ChainState(code);
            prop_assert_eq!(ChainState::encode(&s.decode(n)), s);
        }
    }
}
