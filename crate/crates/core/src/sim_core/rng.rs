//! Named, independent random streams derived from the scenario seed.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// The fixed set of stochastic subsystems. Each gets its own stream so that
/// drawing more from one never shifts another's sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StreamLabel {
    Mobility,
    KChoice,
    FlowSelection,
    Loss,
}

impl StreamLabel {
    pub const ALL: [StreamLabel; 4] = [
        StreamLabel::Mobility,
        StreamLabel::KChoice,
        StreamLabel::FlowSelection,
        StreamLabel::Loss,
    ];

    fn stream_id(self) -> u64 {
        match self {
            StreamLabel::Mobility => 1,
            StreamLabel::KChoice => 2,
            StreamLabel::FlowSelection => 3,
            StreamLabel::Loss => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StreamLabel::Mobility => "mobility",
            StreamLabel::KChoice => "k_choice",
            StreamLabel::FlowSelection => "flow_selection",
            StreamLabel::Loss => "loss",
        }
    }
}

impl fmt::Display for StreamLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown random stream label `{0}` (expected one of mobility, k_choice, flow_selection, loss)")]
pub struct UnknownStream(pub String);

impl FromStr for StreamLabel {
    type Err = UnknownStream;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StreamLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| UnknownStream(s.to_string()))
    }
}

/// Fresh stream for `(seed, label)`. Same inputs always yield the same sequence.
pub fn rng_stream(seed: u64, label: StreamLabel) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label.stream_id());
    rng
}

/// Lookup by name. Unknown labels are a configuration bug and panic.
pub fn rng_stream_named(seed: u64, label: &str) -> SimRng {
    match label.parse() {
        Ok(l) => rng_stream(seed, l),
        Err(e) => panic!("{e}"),
    }
}

/// All four streams of one run.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub mobility: SimRng,
    pub k_choice: SimRng,
    pub flow_selection: SimRng,
    pub loss: SimRng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        RngStreams {
            mobility: rng_stream(seed, StreamLabel::Mobility),
            k_choice: rng_stream(seed, StreamLabel::KChoice),
            flow_selection: rng_stream(seed, StreamLabel::FlowSelection),
            loss: rng_stream(seed, StreamLabel::Loss),
        }
    }
}
