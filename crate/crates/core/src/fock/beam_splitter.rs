use nalgebra::DMatrix;

use super::operator::FieldOperator;
use super::space::SpaceDescriptor;
use crate::error::{ensure_param, Error, Result};
use crate::linalg::expm::HermitianEigen;
use crate::linalg::sparse::CsrMatrix;
use crate::linalg::C64;

/// `U = exp[θ(a†b - ab†)]` with `θ = arccos √T`, so that
/// `U†aU = √T a + √R b` and `U†bU = -√R a + √T b`.
///
/// The generator conserves total photon number, so `U` is assembled block by
/// block over the states with `n_a + n_b = N` that survive truncation.
pub fn beam_splitter(space: &SpaceDescriptor, transmissivity: f64) -> Result<FieldOperator> {
    if space.n_modes() != 2 {
        return Err(Error::Contract(format!(
            "beam splitter needs a two-mode space, got {} modes",
            space.n_modes()
        )));
    }
    ensure_param((0.0..=1.0).contains(&transmissivity), || {
        format!("transmissivity {transmissivity} outside [0, 1]")
    })?;
    let theta = transmissivity.sqrt().acos();
    let (da, db) = (space.dim(0), space.dim(1));
    let mut trip = Vec::new();
    for total in 0..(da + db - 1) {
        let states: Vec<usize> = (0..da).filter(|&na| total >= na && total - na < db).collect();
        let m = states.len();
        // i·(a†b - ab†) restricted to the block, hermitian and tridiagonal in n_a.
        let mut h = DMatrix::<C64>::zeros(m, m);
        for (k, &na) in states.iter().enumerate() {
            let nb = total - na;
            if k + 1 < m {
                // ⟨na+1, nb-1| a†b |na, nb⟩ = √(na+1)√nb
                let v = ((na + 1) as f64 * nb as f64).sqrt();
                h[(k + 1, k)] = C64::new(0.0, v);
                h[(k, k + 1)] = C64::new(0.0, -v);
            }
        }
        let u = if m == 1 {
            DMatrix::from_element(1, 1, C64::new(1.0, 0.0))
        } else {
            HermitianEigen::new(&h)?.unitary(theta)
        };
        for (r, &nr) in states.iter().enumerate() {
            for (c, &nc) in states.iter().enumerate() {
                let v = u[(r, c)];
                if v.norm() > 0.0 {
                    trip.push((nr * db + (total - nr), nc * db + (total - nc), v));
                }
            }
        }
    }
    let n = space.total_dim();
    FieldOperator::from_csr(space, CsrMatrix::from_triplets(n, n, trip), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operator::annihilation;
    use crate::fock::space::make_space;
    use crate::fock::state::coherent_state;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unitary_and_limits() {
        let s = make_space(&[6, 5]).unwrap();
        for t in [0.0, 0.3, 0.5, 1.0] {
            let u = beam_splitter(&s, t).unwrap();
            let id = FieldOperator::identity(&s);
            assert!(u.mul(&u.adjoint()).unwrap().max_abs_diff(&id).unwrap() < 1e-10);
        }
        let u = beam_splitter(&s, 1.0).unwrap();
        assert!(u.max_abs_diff(&FieldOperator::identity(&s)).unwrap() < 1e-15);
        assert!(matches!(beam_splitter(&s, 1.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn mode_transformation_on_safe_subspace() {
        let s = make_space(&[8, 8]).unwrap();
        let t: f64 = 0.3;
        let (st, sr) = (t.sqrt(), (1.0 - t).sqrt());
        let u = beam_splitter(&s, t).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        let ua = u.adjoint().mul(&a).unwrap().mul(&u).unwrap();
        let ub = u.adjoint().mul(&b).unwrap().mul(&u).unwrap();
        let ea = a.scale(c(st, 0.0)).axpy(c(sr, 0.0), &b).unwrap();
        let eb = a.scale(c(-sr, 0.0)).axpy(c(st, 0.0), &b).unwrap();
        // Compare on states with n_a + n_b < 7, where no truncation is felt.
        for i in 0..64 {
            for j in 0..64 {
                let (oi, oj) = (s.occupation(i), s.occupation(j));
                if oi[0] + oi[1] < 7 && oj[0] + oj[1] < 7 {
                    assert!((ua.get(i, j) - ea.get(i, j)).norm() < 1e-10);
                    assert!((ub.get(i, j) - eb.get(i, j)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn swap_at_zero_transmission() {
        let s = make_space(&[4, 4]).unwrap();
        let u = beam_splitter(&s, 0.0).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        let ua = u.adjoint().mul(&a).unwrap().mul(&u).unwrap();
        let ub = u.adjoint().mul(&b).unwrap().mul(&u).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let (oi, oj) = (s.occupation(i), s.occupation(j));
                if oi[0] + oi[1] < 3 && oj[0] + oj[1] < 3 {
                    assert!((ua.get(i, j) - b.get(i, j)).norm() < 1e-12);
                    assert!((ub.get(i, j) + a.get(i, j)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn coherent_inputs_stay_coherent() {
        let s = make_space(&[30, 30]).unwrap();
        let (al, be) = (c(1.0, 0.5), c(-0.4, 0.8));
        let out = coherent_state(&s, &[al, be]).unwrap().transform(&beam_splitter(&s, 0.5).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = coherent_state(&s, &[(al + be) * r, (be - al) * r]).unwrap();
        let overlap: C64 = out
            .vector()
            .unwrap()
            .iter()
            .zip(expected.vector().unwrap().iter())
            .map(|(x, y)| x.conj() * y)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-9);
    }
}
