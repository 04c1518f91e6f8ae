//! Fibre hyperkahler triple and the total-space complex structures.

use super::local::{add, jw, map_faces, scale, FaceState, FaceTangent};
use super::KahlerError;
use crate::fields::config::{Configuration, TangentVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureSelector {
    FibreI,
    FibreJ,
    FibreK,
    TotalJ,
    TotalI,
}

impl StructureSelector {
    pub const ALL: [StructureSelector; 5] = [Self::FibreI, Self::FibreJ, Self::FibreK, Self::TotalJ, Self::TotalI];

    pub fn is_fibre(self) -> bool {
        matches!(self, Self::FibreI | Self::FibreJ | Self::FibreK)
    }
}

pub fn apply_face(sel: StructureSelector, s: &FaceState, v: &FaceTangent) -> FaceTangent {
    let j = &s.j;
    match sel {
        StructureSelector::FibreI => FaceTangent { jdot: v.jdot * 0.0, a: jw(v.a, j), psidot: scale(jw(v.psidot, j), -1.0) },
        StructureSelector::FibreJ => FaceTangent { jdot: v.jdot * 0.0, a: scale(v.psidot, -1.0), psidot: v.a },
        StructureSelector::FibreK => {
            FaceTangent { jdot: v.jdot * 0.0, a: scale(jw(v.psidot, j), -1.0), psidot: scale(jw(v.a, j), -1.0) }
        }
        StructureSelector::TotalJ => FaceTangent { jdot: j * v.jdot, a: scale(v.psidot, -1.0), psidot: v.a },
        StructureSelector::TotalI => FaceTangent {
            jdot: j * v.jdot,
            a: jw(v.a, j),
            psidot: add(scale(jw(v.psidot, j), -1.0), s.psi_of(&v.jdot)),
        },
    }
}

pub fn apply_structure(sel: StructureSelector, x: &Configuration, v: &TangentVector) -> Result<TangentVector, KahlerError> {
    if sel.is_fibre() && !v.is_vertical() {
        return Err(KahlerError::NotVertical);
    }
    Ok(map_faces(x, v, |s, t| apply_face(sel, s, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_dec::mesh::build_surface;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup(seed: u64) -> (Configuration, TangentVector, TangentVector) {
        let mesh = Arc::new(build_surface(1 + (seed as usize % 2), 0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Configuration::random(mesh, &mut rng, 0.4, 1.0);
        let v = TangentVector::random(&x, &mut rng, 1.0);
        let w = TangentVector::random_vertical(&x, &mut rng, 1.0);
        (x, v, w)
    }

    #[test]
    fn fibre_i_matches_definition() {
        let (x, _, w) = setup(1);
        let iw = apply_structure(StructureSelector::FibreI, &x, &w).unwrap();
        assert_eq!(iw.a, w.a.apply_j(&x.j.j));
        assert_eq!(iw.psidot, w.psidot.apply_j(&x.j.j).scale(-1.0));
    }

    #[test]
    fn fibre_structures_reject_base_directions() {
        let (x, v, _) = setup(2);
        assert!(matches!(apply_structure(StructureSelector::FibreJ, &x, &v), Err(KahlerError::NotVertical)));
    }

    #[test]
    fn total_structures_preserve_tangency() {
        let (x, v, _) = setup(3);
        for sel in [StructureSelector::TotalJ, StructureSelector::TotalI] {
            apply_structure(sel, &x, &v).unwrap().check(&x).unwrap();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn squares_are_minus_identity(seed in 0u64..10_000) {
            let (x, v, w) = setup(seed);
            for sel in StructureSelector::ALL {
                let u = if sel.is_fibre() { &w } else { &v };
                let s1 = apply_structure(sel, &x, u).unwrap();
                let s2 = apply_structure(sel, &x, &s1).unwrap();
                prop_assert!(s2.add(u).norm_sq().sqrt() < 1e-12 * (1.0 + u.norm_sq().sqrt()));
            }
        }

        #[test]
        fn quaternion_relations(seed in 0u64..10_000) {
            let (x, _, w) = setup(seed);
            let ap = |s, u: &TangentVector| apply_structure(s, &x, u).unwrap();
            use StructureSelector::*;
            let n = 1e-12 * (1.0 + w.norm_sq().sqrt());
            prop_assert!(ap(FibreI, &ap(FibreJ, &w)).sub(&ap(FibreK, &w)).norm_sq().sqrt() < n);
            prop_assert!(ap(FibreJ, &ap(FibreK, &w)).sub(&ap(FibreI, &w)).norm_sq().sqrt() < n);
            prop_assert!(ap(FibreK, &ap(FibreI, &w)).sub(&ap(FibreJ, &w)).norm_sq().sqrt() < n);
        }
    }
}
