//! Builds a model path for a group-invariant target with the invariant term
//! pool, comparing greedy lookahead with plain stepwise addition, and checks
//! that the final model recovers the target.
//!
//! ```text
//! cargo run --release --example greedy_invariant
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symmaxent::action::GroupAction;
use symmaxent::builder::{greedy_build, stepwise_build, verify_halting, BuilderConfig, ModelPath, TermSpace};
use symmaxent::distribution::Distribution;
use symmaxent::generators::GeneratorSet;
use symmaxent::group::GroupSpec;
use symmaxent::lattice::LatticeSpace;

fn show(name: &str, path: &ModelPath) {
    println!("{name}: {} terms, terminal {:?}", path.len(), path.terminal);
    for step in path.steps.iter().take(8) {
        let term = step.added.as_ref().map_or("1".to_string(), |t| t.pretty());
        println!("  l={:>2}  {term:<10} D = {:.6e}", step.l, step.kl);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let action = GroupAction::new(GroupSpec::microimage(), LatticeSpace::microimages(4, 2)?)?;
    let space = TermSpace::new(action, GeneratorSet::microimage())?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let raw: Vec<f64> = (0..space.space_len()).map(|_| rng.random_range(0.1..1.0)).collect();
    let target = space.action().symmetrize_distribution(&Distribution::from_weights(&raw)?)?;

    let greedy = greedy_build(&space, &target, &BuilderConfig { lookahead: 3, ..Default::default() })?;
    let stepwise = stepwise_build(&space, &target, &BuilderConfig::default())?;
    show("greedy r=3", &greedy);
    show("stepwise", &stepwise);

    let report = verify_halting(&greedy, space.action(), &target)?;
    println!(
        "halting check passed: {} after {} of at most {} steps",
        report.passed, report.steps, report.max_steps
    );
    println!("sup |P_final - target| = {:.3e}", greedy.final_step().model.density.sup_distance(&target));
    Ok(())
}
