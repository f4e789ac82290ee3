//! Enumerates the orbits of the 2x2 microimage group on lattices with an
//! even number of levels and compares them with the closed-form orbit counts.
//!
//! ```text
//! cargo run --example orbit_enumeration
//! ```

use symmaxent::action::{orbit_count_formula, GroupAction, OrbitCounts};
use symmaxent::group::GroupSpec;
use symmaxent::lattice::LatticeSpace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let group = GroupSpec::microimage();
    println!("group order {}", group.order());
    println!("{:>3} {:>6} {:>5}  sizes 2/4/8/16", "L", "K", "M");
    for levels in [2, 4, 6, 8] {
        let action = GroupAction::new(group.clone(), LatticeSpace::microimages(levels, 2)?)?;
        let enumerated = OrbitCounts::from_histogram(&action.orbits().size_histogram());
        let formula = orbit_count_formula(levels)?;
        assert_eq!(enumerated, formula);
        println!(
            "{levels:>3} {:>6} {:>5}  {}/{}/{}/{}",
            action.space().len(),
            enumerated.total,
            enumerated.size2,
            enumerated.size4,
            enumerated.size8,
            enumerated.size16
        );
    }

    let action = GroupAction::new(group, LatticeSpace::microimages(2, 2)?)?;
    for orbit in 0..action.orbits().len() {
        let rep = action.space().point(action.orbits().representative(orbit));
        let rep: Vec<String> = rep.iter().map(ToString::to_string).collect();
        println!("L=2 orbit {orbit}: size {} representative ({})", action.orbits().size(orbit), rep.join(", "));
    }
    Ok(())
}
