//! Runs greedy selection on a target that is not group-invariant with the
//! invariant, ordinary and mixed term pools, using sampled candidate shells
//! and a fixed seed.
//!
//! ```text
//! cargo run --release --example mixed_pool
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symmaxent::action::GroupAction;
use symmaxent::builder::{greedy_build, BuilderConfig, PoolChoice, TermSpace};
use symmaxent::distribution::Distribution;
use symmaxent::generators::GeneratorSet;
use symmaxent::group::GroupSpec;
use symmaxent::lattice::LatticeSpace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let action = GroupAction::new(GroupSpec::microimage(), LatticeSpace::microimages(4, 2)?)?;
    let space = TermSpace::new(action, GeneratorSet::microimage())?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let raw: Vec<f64> = (0..space.space_len()).map(|_| rng.random_range(0.05..1.0)).collect();
    let target = Distribution::from_weights(&raw)?;

    for pool in [PoolChoice::Invariant, PoolChoice::Ordinary, PoolChoice::Mixed] {
        let config = BuilderConfig {
            pool,
            lookahead: 12,
            sample_size: Some(6),
            ordinary_lookahead: Some(12),
            ordinary_sample_size: Some(6),
            rng_seed: 7,
            max_terms: Some(12),
            ..Default::default()
        };
        let path = greedy_build(&space, &target, &config)?;
        let terms: Vec<String> = path.terms().iter().skip(1).map(|t| t.pretty()).collect();
        println!(
            "{pool:?}: {} terms, D = {:.6e}, terminal {:?}",
            path.len(),
            path.final_step().kl,
            path.terminal
        );
        println!("  {}", terms.join(" "));
    }
    Ok(())
}
