//! Fits one maximum-entropy model with a fixed list of invariant terms,
//! checks that it reproduces the target moments, and reports the
//! entropy/divergence bookkeeping.
//!
//! ```text
//! cargo run --example fit_maxent
//! ```

use symmaxent::action::GroupAction;
use symmaxent::builder::TermSpace;
use symmaxent::distribution::Distribution;
use symmaxent::features::Term;
use symmaxent::generators::GeneratorSet;
use symmaxent::group::GroupSpec;
use symmaxent::lattice::LatticeSpace;
use symmaxent::maxent::{entropy, solve_maxent, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let action = GroupAction::new(GroupSpec::microimage(), LatticeSpace::microimages(4, 2)?)?;
    let space = TermSpace::new(action, GeneratorSet::microimage())?;

    // A peaked target with a mild preference for equal horizontal neighbours.
    let weights: Vec<f64> = (0..space.space_len())
        .map(|k| {
            let x = space.action().space().point_f64(k);
            (-x.iter().map(|v| v * v).sum::<f64>() + 0.5 * x[0] * x[1]).exp()
        })
        .collect();
    let target = Distribution::from_weights(&weights)?;

    let terms: Vec<Term> = ["1", "f1", "f3", "f2^2"]
        .iter()
        .map(|t| Term::parse(t, 5, 4))
        .collect::<Result<_, _>>()?;
    let constraints = space.constraints(&terms, &target)?;
    let (model, report) = solve_maxent(&constraints, &SolverOptions::default())?;

    for (term, lambda) in model.terms.iter().zip(&model.lambda) {
        println!("{:>6}  lambda = {lambda:+.6e}", term.pretty());
    }
    println!("newton iterations   {}", report.iterations);
    println!("moment residual     {:.3e}", report.residual_inf);
    let kl = model.kl_from(&target);
    println!("H(P_A)              {:.9}", model.entropy());
    println!("H(P_A) - H(target)  {:.3e}", model.entropy() - entropy(&target));
    println!("D(target || P_A)    {kl:.3e}");
    Ok(())
}
