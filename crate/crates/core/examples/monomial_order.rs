//! Walks the graded lexicographic order on exponent vectors, converts between
//! indices and ranks, and lists the candidate shell around a set of terms.
//!
//! ```text
//! cargo run --example monomial_order
//! ```

use symmaxent::order::{CandidatePolicy, MonomialOrder, MultiIndex};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let order = MonomialOrder::graded_lex(5);
    println!("first 21 exponent vectors:");
    for (r, a) in order.enumerate(None, 21)?.iter().enumerate() {
        println!("  {r:>2}  {a}  {}", a.pretty("f"));
    }

    let a = MultiIndex(vec![0, 1, 2, 0, 1]);
    let r = order.rank(&a)?;
    println!("rank of {} is {r}; unrank gives {}", a.pretty("f"), order.unrank(r));

    let members = [MultiIndex::zero(5), MultiIndex::unit(5, 2)];
    for policy in [CandidatePolicy::LiteralShell, CandidatePolicy::SucceedingOnly] {
        let shell = order.shell(&members, 3, policy)?;
        let names: Vec<String> = shell.iter().map(|m| m.pretty("f")).collect();
        println!("{policy:?} shell of depth 3 around {{1, f3}}: {}", names.join(", "));
    }
    Ok(())
}
