//! The sign involution `[x, y, a, b] -> [x, -y, a, -b]` and its type with
//! respect to the three complex structures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quiver::CometQuiver;
use crate::rep::{quaternion_apply, random_representation_with, seeded_rng, Quaternion, Representation};

/// Relative defect below which a commutator or anticommutator counts as zero.
pub const VANISHING_DEFECT: f64 = 1e-12;

pub fn sign_involution(rep: &Representation) -> Representation {
    rep.map_slots(|m, momentum| if momentum { -m } else { m.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BraneType {
    /// Commutes with the structure (holomorphic).
    B,
    /// Anticommutes with the structure.
    A,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub structure: Quaternion,
    pub classification: BraneType,
    /// Largest `|S I v - I S v| / |v|` over the sample.
    pub commutator_defect: f64,
    /// Largest `|S I v + I S v| / |v|` over the sample.
    pub anticommutator_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraneReport {
    pub structures: Vec<StructureReport>,
    pub samples: usize,
    pub seed: u64,
}

impl BraneReport {
    /// Classifications in the order I, J, K.
    pub fn signature(&self) -> Vec<BraneType> {
        self.structures.iter().map(|s| s.classification).collect()
    }
}

fn defects(rep: &Representation, s: Quaternion) -> (f64, f64) {
    let si = quaternion_apply(&sign_involution(rep), s);
    let is = sign_involution(&quaternion_apply(rep, s));
    let scale = rep.norm().max(f64::MIN_POSITIVE);
    (si.sub(&is).norm() / scale, si.add(&is).norm() / scale)
}

/// Sample `samples` random representations from child streams of `seed` and
/// classify the involution against each complex structure.
pub fn involution_type_report(q: &CometQuiver, samples: usize, seed: u64) -> Result<BraneReport> {
    if samples == 0 {
        return Err(Error::InvalidOption("need at least one sample".into()));
    }
    let per_sample: Vec<[(f64, f64); 3]> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let rep = random_representation_with(q, &mut seeded_rng(seed, k as u64), 1.0);
            Quaternion::ALL.map(|s| defects(&rep, s))
        })
        .collect();
    let mut structures = Vec::with_capacity(3);
    for (i, s) in Quaternion::ALL.into_iter().enumerate() {
        let commutator_defect = per_sample.iter().map(|d| d[i].0).fold(0.0, f64::max);
        let anticommutator_defect = per_sample.iter().map(|d| d[i].1).fold(0.0, f64::max);
        let classification = if commutator_defect < VANISHING_DEFECT {
            BraneType::B
        } else if anticommutator_defect < VANISHING_DEFECT {
            BraneType::A
        } else {
            return Err(Error::Inconclusive(format!("{s:?}")));
        };
        structures.push(StructureReport { structure: s, classification, commutator_defect, anticommutator_defect });
    }
    Ok(BraneReport { structures, samples, seed })
}

/// `|y|` and `|b|` both below `tol`: the point lies on the polygon locus.
pub fn fixed_locus_check(rep: &Representation, tol: f64) -> bool {
    let ys = rep.arms.iter().flat_map(|a| &a.edges).flat_map(|e| &e.y).all(|m| crate::linalg::frob(m) < tol);
    ys && rep.loops.iter().all(|l| crate::linalg::frob(&l.b) < tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::{circle_action, random_representation};

    fn q() -> CometQuiver {
        CometQuiver::with_rank(3, vec![vec![1, 2, 3], vec![1, 3]], 1, Some(vec![vec![1, 2], vec![1]])).unwrap()
    }

    #[test]
    fn involution_twice_is_identity() {
        let rep = random_representation(&q(), 1, 1.0);
        assert_eq!(sign_involution(&sign_involution(&rep)), rep);
    }

    #[test]
    fn involution_is_circle_at_pi() {
        let rep = random_representation(&q(), 2, 1.0);
        assert_eq!(circle_action(&rep, std::f64::consts::PI), sign_involution(&rep));
    }

    #[test]
    fn classification_is_baa() {
        let report = involution_type_report(&q(), 20, 4).unwrap();
        assert_eq!(report.signature(), vec![BraneType::B, BraneType::A, BraneType::A]);
        assert_eq!(report.structures[0].commutator_defect, 0.0);
        assert!(report.structures[2].anticommutator_defect < 1e-12);
        assert!(matches!(involution_type_report(&q(), 0, 4), Err(Error::InvalidOption(_))));
    }

    #[test]
    fn fixed_locus() {
        let rep = random_representation(&q(), 3, 1.0);
        assert!(!fixed_locus_check(&rep, 1e-12));
        let polygon = rep.positions_only();
        assert!(fixed_locus_check(&polygon, 1e-12));
        assert_eq!(sign_involution(&polygon), polygon);
    }
}
