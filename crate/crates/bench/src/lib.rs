//! Shared setup for the criterion benchmarks.

use banditbench::policies::ArmSpec;
use banditbench::posterior::ArmPosteriorState;
use banditbench::rng::stream_rng;

/// The scalar unit-variance Gaussian arm used across benchmarks.
pub fn bench_arm() -> ArmSpec {
    ArmSpec::gaussian(0.5, 0.0, 1.0, 1.0).expect("valid arm")
}

/// A posterior state holding `n` seeded draws from the arm's truth.
pub fn bench_state(arm: &ArmSpec, n: usize, seed: u64) -> ArmPosteriorState {
    let mut rng = stream_rng(&[seed, n as u64]);
    let mut state = ArmPosteriorState::new();
    for _ in 0..n {
        state.push_reward(arm.truth.draw_reward(&mut rng));
    }
    state
}
