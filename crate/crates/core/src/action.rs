//! Permutation action of a finite group on a lattice, orbits, and the
//! Reynolds averaging of functions and distributions.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::distribution::Distribution;
use crate::group::GroupSpec;
use crate::lattice::LatticeSpace;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("group dimension {group} does not match space dimension {space}")]
    DimensionMismatch { group: usize, space: usize },
    #[error("element {element} maps point {point} outside the space")]
    SpaceNotInvariant { element: String, point: String },
    #[error("vector of length {got} does not live on a space of {expected} points")]
    SpaceMismatch { expected: usize, got: usize },
    #[error("L = {0} must be even and at least 2")]
    OddL(usize),
}

/// Partition of `{0..K}` into orbits.
///
/// Orbits are numbered `0..M` in increasing order of their smallest member,
/// which is also the orbit representative.
#[derive(Debug, Clone)]
pub struct OrbitSpace {
    orbit_of: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl OrbitSpace {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn orbit_of(&self, k: usize) -> usize {
        self.orbit_of[k]
    }

    pub fn members(&self, orbit: usize) -> &[usize] {
        &self.members[orbit]
    }

    pub fn size(&self, orbit: usize) -> usize {
        self.members[orbit].len()
    }

    pub fn representative(&self, orbit: usize) -> usize {
        self.members[orbit][0]
    }

    /// Orbit size -> number of orbits of that size.
    pub fn size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for m in &self.members {
            *h.entry(m.len()).or_insert(0) += 1;
        }
        h
    }

    fn from_permutations(k: usize, perms: &[Vec<usize>]) -> Self {
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for perm in perms {
            for (x, &y) in perm.iter().enumerate() {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                if a != b {
                    // smaller index becomes the root
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    parent[hi] = lo;
                }
            }
        }
        let mut orbit_of = vec![usize::MAX; k];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut root_to_orbit = vec![usize::MAX; k];
        for (x, slot) in orbit_of.iter_mut().enumerate() {
            let root = find(&mut parent, x);
            if root_to_orbit[root] == usize::MAX {
                root_to_orbit[root] = members.len();
                members.push(Vec::new());
            }
            *slot = root_to_orbit[root];
            members[root_to_orbit[root]].push(x);
        }
        Self { orbit_of, members }
    }
}

/// The induced permutation action of a finite group on an invariant lattice.
#[derive(Debug, Clone)]
pub struct GroupAction {
    group: GroupSpec,
    space: LatticeSpace,
    /// `perms[g][k]` is the index of `g * ω_k`.
    perms: Vec<Vec<usize>>,
    orbits: OrbitSpace,
}

impl GroupAction {
    /// Builds permutation tables, verifying that every element maps the
    /// space onto itself.
    pub fn new(group: GroupSpec, space: LatticeSpace) -> Result<Self, ActionError> {
        if group.dimension() != space.dimension() {
            return Err(ActionError::DimensionMismatch {
                group: group.dimension(),
                space: space.dimension(),
            });
        }
        let k = space.len();
        let mut perms = Vec::with_capacity(group.order());
        for (gi, g) in group.elements().iter().enumerate() {
            let mut perm = Vec::with_capacity(k);
            for x in 0..k {
                let image = g
                    .act_doubled(space.doubled(x))
                    .and_then(|y| space.index_of_doubled(&y))
                    .ok_or_else(|| ActionError::SpaceNotInvariant {
                        element: g.label.clone().unwrap_or_else(|| format!("#{gi}")),
                        point: space.format_point(x),
                    })?;
                perm.push(image);
            }
            perms.push(perm);
        }
        let orbits = OrbitSpace::from_permutations(k, &perms);
        Ok(Self {
            group,
            space,
            perms,
            orbits,
        })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn space(&self) -> &LatticeSpace {
        &self.space
    }

    pub fn orbits(&self) -> &OrbitSpace {
        &self.orbits
    }

    pub fn permutation(&self, element: usize) -> &[usize] {
        &self.perms[element]
    }

    /// Checks `perm(g h) = perm(g) ∘ perm(h)` for all pairs.
    pub fn is_homomorphism(&self) -> bool {
        let n = self.group.order();
        (0..n).all(|a| {
            (0..n).all(|b| {
                let gh = &self.perms[self.group.product_index(a, b)];
                let (pa, pb) = (&self.perms[a], &self.perms[b]);
                (0..self.space.len()).all(|x| gh[x] == pa[pb[x]])
            })
        })
    }

    fn check_len(&self, len: usize) -> Result<(), ActionError> {
        if len != self.space.len() {
            return Err(ActionError::SpaceMismatch {
                expected: self.space.len(),
                got: len,
            });
        }
        Ok(())
    }

    /// Reynolds operator on functions: `(1/|G|) Σ_g f(g⁻¹ ω)`.
    pub fn reynolds_apply(&self, f: &[f64]) -> Result<Vec<f64>, ActionError> {
        self.check_len(f.len())?;
        let n = self.group.order() as f64;
        let mut out = vec![0.0; f.len()];
        for gi in 0..self.group.order() {
            let inv = &self.perms[self.group.inverse_index(gi)];
            for (x, o) in out.iter_mut().enumerate() {
                *o += f[inv[x]];
            }
        }
        out.iter_mut().for_each(|v| *v /= n);
        Ok(out)
    }

    /// Exact Reynolds operator on rational-valued functions.
    pub fn reynolds_apply_exact(&self, f: &[BigRational]) -> Result<Vec<BigRational>, ActionError> {
        self.check_len(f.len())?;
        let n = BigRational::from_integer(self.group.order().into());
        let mut out = vec![BigRational::zero(); f.len()];
        for gi in 0..self.group.order() {
            let inv = &self.perms[self.group.inverse_index(gi)];
            for (x, o) in out.iter_mut().enumerate() {
                *o += &f[inv[x]];
            }
        }
        Ok(out.into_iter().map(|v| v / &n).collect())
    }

    /// Adjoint action on distributions: `(1/|G|) Σ_g gP`.
    pub fn symmetrize_distribution(&self, p: &Distribution) -> Result<Distribution, ActionError> {
        self.check_len(p.len())?;
        let n = self.group.order() as f64;
        let mut out = vec![0.0; p.len()];
        for perm in &self.perms {
            // (gP)({g ω}) = P({ω})
            for (x, &gx) in perm.iter().enumerate() {
                out[gx] += p.probs()[x];
            }
        }
        out.iter_mut().for_each(|v| *v /= n);
        Ok(Distribution::from_weights(&out).expect("average of distributions"))
    }

    pub fn is_invariant(&self, f: &[f64], tol: f64) -> bool {
        f.len() == self.space.len()
            && self
                .perms
                .iter()
                .all(|perm| (0..f.len()).all(|x| (f[perm[x]] - f[x]).abs() <= tol))
    }
}

/// Orbit statistics of the 16-element microimage group on `Ω_2^L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitCounts {
    pub total: u64,
    pub size2: u64,
    pub size4: u64,
    pub size8: u64,
    pub size16: u64,
}

impl OrbitCounts {
    pub fn from_histogram(h: &BTreeMap<usize, usize>) -> Self {
        let get = |s| h.get(&s).copied().unwrap_or(0) as u64;
        Self {
            total: h.values().map(|&c| c as u64).sum(),
            size2: get(2),
            size4: get(4),
            size8: get(8),
            size16: get(16),
        }
    }
}

/// Closed-form orbit counts for even `L`.
pub fn orbit_count_formula(levels: usize) -> Result<OrbitCounts, ActionError> {
    if levels < 2 || !levels.is_multiple_of(2) {
        return Err(ActionError::OddL(levels));
    }
    let l = levels as u64;
    Ok(OrbitCounts {
        total: (l.pow(4) + 2 * l.pow(3) + 6 * l * l + 4 * l) / 16,
        size2: l,
        size4: l * l / 4,
        size8: (2 * l.pow(3) + 3 * l * l - 10 * l) / 8,
        size16: (l.pow(4) + 8 * l - 2 * l.pow(3) - 4 * l * l) / 16,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;
    use crate::rational::RatMatrix;

    fn micro(levels: usize) -> GroupAction {
        GroupAction::new(
            GroupSpec::microimage(),
            LatticeSpace::microimages(levels, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn microimage_orbits_l4() {
        let a = micro(4);
        assert_eq!(a.orbits().len(), 31);
        assert!(a.is_homomorphism());
        assert_eq!(
            OrbitCounts::from_histogram(&a.orbits().size_histogram()),
            orbit_count_formula(4).unwrap()
        );
    }

    #[test]
    fn formula_values() {
        let c = orbit_count_formula(4).unwrap();
        assert_eq!((c.total, c.size2, c.size4, c.size8, c.size16), (31, 4, 4, 17, 6));
        let c = orbit_count_formula(2).unwrap();
        assert_eq!((c.total, c.size2, c.size4, c.size8, c.size16), (4, 2, 1, 1, 0));
        let c = orbit_count_formula(6).unwrap();
        assert_eq!((c.total, c.size2, c.size4, c.size8, c.size16), (123, 6, 9, 60, 48));
        assert_eq!(orbit_count_formula(3), Err(ActionError::OddL(3)));
        assert_eq!(orbit_count_formula(0), Err(ActionError::OddL(0)));
    }

    #[test]
    fn trivial_group_gives_singletons() {
        let a = GroupAction::new(GroupSpec::trivial(2), LatticeSpace::centered_grid(3, 2).unwrap())
            .unwrap();
        assert_eq!(a.orbits().len(), 9);
    }

    #[test]
    fn sign_inversion_on_two_points() {
        let space = LatticeSpace::from_doubled(1, vec![vec![-1], vec![1]]).unwrap();
        let a = GroupAction::new(GroupSpec::sign_inversion(1), space).unwrap();
        assert_eq!(a.orbits().len(), 1);
        assert_eq!(a.orbits().size(0), 2);
    }

    #[test]
    fn non_invariant_space_names_witness() {
        let space = LatticeSpace::from_doubled(1, vec![vec![1], vec![3]]).unwrap();
        let err = GroupAction::new(GroupSpec::sign_inversion(1), space).unwrap_err();
        assert_eq!(
            err,
            ActionError::SpaceNotInvariant {
                element: "n1".into(),
                point: "1/2".into()
            }
        );
    }

    #[test]
    fn off_lattice_image_rejected() {
        let half = RatMatrix::from_rows(vec![vec![crate::rational::ratio(1, 2)]]).unwrap();
        assert_eq!(GroupElement::new(half).act_doubled(&[1]), None);
    }

    #[test]
    fn reynolds_on_point_indicator() {
        let a = micro(4);
        let orbit = (0..a.orbits().len()).find(|&o| a.orbits().size(o) == 8).unwrap();
        let w = a.orbits().representative(orbit);
        let mut f = vec![0.0; 256];
        f[w] = 1.0;
        let rf = a.reynolds_apply(&f).unwrap();
        for (k, v) in rf.iter().enumerate() {
            let expected = if a.orbits().orbit_of(k) == orbit { 0.125 } else { 0.0 };
            assert_eq!(*v, expected);
        }
    }

    #[test]
    fn reynolds_kills_coordinate_function() {
        let a = micro(4);
        let f: Vec<f64> = (0..256).map(|k| a.space().point_f64(k)[0]).collect();
        assert!(a.reynolds_apply(&f).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn symmetrize_point_mass() {
        let a = micro(4);
        let orbit = (0..a.orbits().len()).find(|&o| a.orbits().size(o) == 8).unwrap();
        let w = a.orbits().representative(orbit);
        let p = a.symmetrize_distribution(&Distribution::point_mass(256, w)).unwrap();
        for k in 0..256 {
            let expected = if a.orbits().orbit_of(k) == orbit { 0.125 } else { 0.0 };
            assert!((p.probs()[k] - expected).abs() < 1e-15);
        }
        let u = Distribution::uniform(256);
        assert!(a.symmetrize_distribution(&u).unwrap().sup_distance(&u) < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let a = micro(2);
        assert_eq!(
            a.reynolds_apply(&[1.0; 3]),
            Err(ActionError::SpaceMismatch { expected: 16, got: 3 })
        );
    }
}
