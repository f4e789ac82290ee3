//! Synthesizes a small image corpus, writes it as PGM files, reads it back,
//! quantizes it into 2x2 microimages, augments it with the 16 symmetric
//! variants of every image and fits an invariant model path to the
//! pooled microimage frequencies.
//!
//! ```text
//! cargo run --release --example image_statistics
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symmaxent::action::GroupAction;
use symmaxent::builder::{greedy_build, BuilderConfig, TermSpace};
use symmaxent::generators::GeneratorSet;
use symmaxent::group::GroupSpec;
use symmaxent::imagery::{aggregate, extract_counts, preprocess, ImageGray, PreprocessConfig};
use symmaxent::lattice::LatticeSpace;

fn synthetic(rng: &mut ChaCha8Rng, size: usize) -> ImageGray {
    let (fx, fy) = (rng.random_range(0.1..0.4), rng.random_range(0.1..0.4));
    let pixels = (0..size * size)
        .map(|k| {
            let (row, col) = ((k / size) as f64, (k % size) as f64);
            let smooth = 1.0 + (fx * col).sin() * (fy * row).cos();
            let value = 1000.0 * smooth + rng.random_range(0.0..2000.0);
            value as u16
        })
        .collect();
    ImageGray::new(size, size, pixels).expect("dimensions match")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("symmaxent-image-statistics");
    std::fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = PreprocessConfig::default();
    let space = TermSpace::new(
        GroupAction::new(GroupSpec::microimage(), LatticeSpace::microimages(cfg.levels, cfg.patch)?)?,
        GeneratorSet::microimage(),
    )?;

    let mut counts = Vec::new();
    for i in 0..6 {
        let path = dir.join(format!("image_{i}.pgm"));
        synthetic(&mut rng, 48).write_pgm(&path)?;
        let quantized = preprocess(&ImageGray::load_pgm(&path)?, &cfg)?;
        for variant in quantized.symmetric_variants() {
            counts.push(extract_counts(&variant, cfg.patch, space.action().space())?);
        }
    }
    let empirical = aggregate(&counts)?;
    let total: u64 = empirical.pooled.iter().sum();
    let seen = empirical.pooled.iter().filter(|&&c| c > 0).count();
    println!("{} images, {total} patches, {seen} of {} microimages observed", empirical.images, space.space_len());

    let config = BuilderConfig {
        lookahead: 3,
        max_terms: Some(12),
        ..Default::default()
    };
    let path = greedy_build(&space, &empirical.probs, &config)?;
    for step in &path.steps {
        let term = step.added.as_ref().map_or("1".to_string(), |t| t.pretty());
        let sym = step.kl_symmetrized.unwrap_or(f64::NAN);
        println!("l={:>2} {term:<10} D = {:.5e}  D(sym) = {sym:.5e}", step.l, step.kl);
    }
    println!("terminal {:?}", path.terminal);
    Ok(())
}
