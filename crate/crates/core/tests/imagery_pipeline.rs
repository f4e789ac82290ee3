use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symmaxent::action::GroupAction;
use symmaxent::group::GroupSpec;
use symmaxent::imagery::{aggregate, extract_counts, preprocess, ImageGray, PreprocessConfig, QuantizedImage};
use symmaxent::lattice::LatticeSpace;

fn setup() -> (GroupAction, QuantizedImage) {
    let space = LatticeSpace::microimages(4, 2).unwrap();
    let action = GroupAction::new(GroupSpec::microimage(), space).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (w, h) = (11, 9);
    let pixels: Vec<u16> = (0..w * h).map(|_| rng.random_range(0..4000)).collect();
    let img = ImageGray::new(w, h, pixels).unwrap();
    let q = preprocess(&img, &PreprocessConfig::default()).unwrap();
    (action, q)
}

fn element(action: &GroupAction, label: &str) -> usize {
    action
        .group()
        .elements()
        .iter()
        .position(|e| e.label.as_deref() == Some(label))
        .unwrap_or_else(|| panic!("no element labelled {label}"))
}

fn with_image(q: &QuantizedImage, image: ImageGray) -> QuantizedImage {
    QuantizedImage { image, ..q.clone() }
}

fn permuted(counts: &[u64], perm: &[usize]) -> Vec<u64> {
    let mut out = vec![0; counts.len()];
    for (k, &c) in counts.iter().enumerate() {
        out[perm[k]] = c;
    }
    out
}

#[test]
fn rotating_the_image_applies_the_rotation_generator() {
    let (action, q) = setup();
    let space = action.space();
    let base = extract_counts(&q, 2, space).unwrap();
    let rotated = extract_counts(&with_image(&q, q.image.rotate_ccw()), 2, space).unwrap();
    assert_eq!(rotated.total, base.total);
    let r = element(&action, "r");
    assert_eq!(rotated.counts, permuted(&base.counts, action.permutation(r)));
}

#[test]
fn flips_and_inversion_act_as_group_elements() {
    let (action, q) = setup();
    let space = action.space();
    let base = extract_counts(&q, 2, space).unwrap();
    for transformed in [with_image(&q, q.image.flip_horizontal()), q.inverted()] {
        let counts = extract_counts(&transformed, 2, space).unwrap().counts;
        let hit = (0..action.group().elements().len())
            .any(|g| permuted(&base.counts, action.permutation(g)) == counts);
        assert!(hit);
    }
    let i = element(&action, "i");
    let inv = extract_counts(&q.inverted(), 2, space).unwrap().counts;
    assert_eq!(inv, permuted(&base.counts, action.permutation(i)));
}

#[test]
fn symmetric_variant_corpus_is_invariant() {
    let (action, q) = setup();
    let space = action.space();
    let variants = q.symmetric_variants();
    assert_eq!(variants.len(), 16);
    let counts: Vec<_> = variants.iter().map(|v| extract_counts(v, 2, space).unwrap()).collect();
    let emp = aggregate(&counts).unwrap();
    assert_eq!(emp.images, 16);
    for g in 0..action.group().elements().len() {
        assert_eq!(permuted(&emp.pooled, action.permutation(g)), emp.pooled);
    }
    assert!(action.is_invariant(emp.probs.probs(), 1e-15));
}
