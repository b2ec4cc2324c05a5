//! Shared inputs for the criterion benches.

use assim_core::synth::{generate_triple, SynthConfig, SynthTriple};

/// A synthetic triple with `n_interests` interests and mixture weight 0.5.
pub fn synthetic(n_interests: usize) -> SynthTriple {
    generate_triple(&SynthConfig {
        n_interests,
        alpha: 0.5,
        seed: 42,
        ..SynthConfig::default()
    })
    .expect("benchmark config is valid")
}
