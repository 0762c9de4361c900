//! Periodic tensegrities and the three rigidity operators: the periodic
//! (real) matrix, the affine extension with d^2 lattice-deformation columns,
//! and the complex phase matrix attached to a quotient character.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{reduce_mod_sublattice, transversal, Lattice, QuotientCharacter, Sublattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Bar,
    Cable,
    Strut,
}

/// One canonical member: from vertex `i` in the home cell to vertex `j`
/// shifted by `offset` in lattice coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contact {
    pub i: usize,
    pub j: usize,
    pub offset: Vec<i64>,
    pub kind: ContactKind,
}

/// A periodic tensegrity on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensegrity {
    pub lattice: Lattice,
    pub vertices: Vec<DVector<f64>>,
    pub contacts: Vec<Contact>,
}

/// Vertex motions, optionally with a lattice deformation block.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexVector {
    pub per_vertex: Vec<DVector<f64>>,
    pub affine: Option<DMatrix<f64>>,
}

impl FlexVector {
    pub fn periodic(per_vertex: Vec<DVector<f64>>) -> Self {
        FlexVector {
            per_vertex,
            affine: None,
        }
    }

    /// Flatten to the column layout of the rigidity operators.
    pub fn to_column(&self) -> DVector<f64> {
        let d = self.per_vertex.first().map_or(0, |v| v.len());
        let extra = self.affine.as_ref().map_or(0, |a| a.len());
        let mut out = DVector::zeros(self.per_vertex.len() * d + extra);
        for (i, v) in self.per_vertex.iter().enumerate() {
            for k in 0..d {
                out[i * d + k] = v[k];
            }
        }
        if let Some(a) = &self.affine {
            let base = self.per_vertex.len() * d;
            for r in 0..d {
                for c in 0..d {
                    out[base + r * d + c] = a[(r, c)];
                }
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.to_column().norm()
    }
}

impl Tensegrity {
    pub fn new(
        lattice: Lattice,
        vertices: Vec<DVector<f64>>,
        contacts: Vec<Contact>,
    ) -> Result<Self> {
        let t = Tensegrity {
            lattice,
            vertices,
            contacts,
        };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        let n = self.vertices.len();
        for (k, c) in self.contacts.iter().enumerate() {
            for &v in [c.i, c.j].iter() {
                if v >= n {
                    return Err(Error::VertexOutOfRange { k, v, n });
                }
            }
            if c.i == c.j && c.offset.iter().all(|&o| o == 0) {
                return Err(Error::DegenerateSelfContact(k));
            }
            if self.edge_vector(k).norm() < 1e-12 {
                return Err(Error::ZeroEdgeVector(k));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_contacts(&self) -> usize {
        self.contacts.len()
    }

    /// e_k = p_j + T offset - p_i.
    pub fn edge_vector(&self, k: usize) -> DVector<f64> {
        let c = &self.contacts[k];
        &self.vertices[c.j] + self.lattice.vector(&c.offset) - &self.vertices[c.i]
    }

    /// Same tensegrity with every member turned into a bar.
    pub fn as_bars(&self) -> Tensegrity {
        let mut t = self.clone();
        for c in &mut t.contacts {
            c.kind = ContactKind::Bar;
        }
        t
    }

    /// Periodic rigidity matrix: row k is +e_k on block j and -e_k on block
    /// i; a self-contact row is identically zero. Row k applied to a flex
    /// gives e_k . (p'_j - p'_i).
    pub fn rigidity_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(self.contacts.len(), self.vertices.len() * d);
        for (k, c) in self.contacts.iter().enumerate() {
            if c.i == c.j {
                continue;
            }
            let e = self.edge_vector(k);
            for a in 0..d {
                m[(k, c.j * d + a)] += e[a];
                m[(k, c.i * d + a)] -= e[a];
            }
        }
        m
    }

    /// Affine rigidity matrix: the vertex blocks of `rigidity_matrix` plus
    /// d^2 columns for the deformation A, row-major, with coefficient
    /// e_k[a] * e_k[b] on entry A[a][b] so that a row evaluates
    /// e_k . (p'_j - p'_i + A e_k).
    pub fn affine_rigidity_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.vertices.len();
        let mut m = DMatrix::zeros(self.contacts.len(), n * d + d * d);
        let vertex_part = self.rigidity_matrix();
        m.view_mut((0, 0), (self.contacts.len(), n * d))
            .copy_from(&vertex_part);
        for (k, _) in self.contacts.iter().enumerate() {
            let e = self.edge_vector(k);
            for a in 0..d {
                for b in 0..d {
                    m[(k, n * d + a * d + b)] = e[a] * e[b];
                }
            }
        }
        m
    }

    /// Complex phase matrix for a character: the j block is multiplied by
    /// rho(offset); a self-contact row holds (rho(offset) - 1) e_k. At the
    /// trivial character this equals `rigidity_matrix` entrywise.
    pub fn phase_matrix(&self, chi: &QuotientCharacter) -> DMatrix<Complex<f64>> {
        let d = self.dim();
        let one = Complex::new(1.0, 0.0);
        let mut m = DMatrix::zeros(self.contacts.len(), self.vertices.len() * d);
        for (k, c) in self.contacts.iter().enumerate() {
            let e = self.edge_vector(k);
            let rho = if chi.is_trivial() {
                one
            } else {
                chi.eval(&c.offset)
            };
            for a in 0..d {
                let ev = Complex::new(e[a], 0.0);
                m[(k, c.j * d + a)] += rho * ev;
                m[(k, c.i * d + a)] -= ev;
            }
        }
        m
    }

    /// The tensegrity on the cover torus of a finite-index sublattice:
    /// index-many copies of each vertex placed over a transversal, with
    /// contact offsets rewritten in sublattice coordinates.
    pub fn cover(&self, s: &Sublattice) -> Result<Tensegrity> {
        let d = self.dim();
        let reps = transversal(s)?;
        let m = reps.len();
        let rep_index = |rep: &[i64]| -> usize {
            reps.iter().position(|r| r.as_slice() == rep).expect("transversal closure")
        };
        let mut vertices = Vec::with_capacity(self.vertices.len() * m);
        for v in &self.vertices {
            for rep in &reps {
                vertices.push(v + self.lattice.vector(rep));
            }
        }
        let mut contacts = Vec::with_capacity(self.contacts.len() * m);
        for c in &self.contacts {
            for (t, rep) in reps.iter().enumerate() {
                let shifted: Vec<i64> = rep.iter().zip(&c.offset).map(|(a, b)| a + b).collect();
                let (target_rep, quot) = reduce_mod_sublattice(s, &shifted)?;
                contacts.push(Contact {
                    i: c.i * m + t,
                    j: c.j * m + rep_index(&target_rep),
                    offset: quot,
                    kind: c.kind,
                });
            }
        }
        let cover_basis = self.lattice.basis()
            * DMatrix::from_fn(d, d, |r, c| s.coeffs()[(r, c)] as f64);
        Tensegrity::new(Lattice::new(cover_basis)?, vertices, contacts)
    }

    /// The d translation flexes, as flat columns of the periodic operator.
    pub fn translation_flexes(&self) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.vertices.len();
        let mut m = DMatrix::zeros(n * d, d);
        for a in 0..d {
            for i in 0..n {
                m[(i * d + a, a)] = 1.0 / (n as f64).sqrt();
            }
        }
        m
    }

    /// Trivial affine flexes: d translations plus d(d-1)/2 rotations
    /// (skew A with p' = 0), as flat columns of the affine operator.
    pub fn affine_trivial_flexes(&self) -> DMatrix<f64> {
        let d = self.dim();
        let n = self.vertices.len();
        let cols = d + d * (d - 1) / 2;
        let mut m = DMatrix::zeros(n * d + d * d, cols);
        for a in 0..d {
            for i in 0..n {
                m[(i * d + a, a)] = 1.0;
            }
        }
        let mut col = d;
        for a in 0..d {
            for b in a + 1..d {
                m[(n * d + a * d + b, col)] = 1.0;
                m[(n * d + b * d + a, col)] = -1.0;
                col += 1;
            }
        }
        m
    }
}

/// Component of `v` orthogonal to the column span of `basis`.
pub fn deflate(v: &DVector<f64>, basis: &DMatrix<f64>) -> DVector<f64> {
    let mut out = v.clone();
    for c in 0..basis.ncols() {
        let col = basis.column(c);
        let denom = col.dot(&col);
        if denom > 0.0 {
            let coef = out.dot(&col) / denom;
            out -= col * coef;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_characters, smith_normal_form};
    use approx::assert_relative_eq;

    fn one_disk_square_struts() -> Tensegrity {
        Tensegrity::new(
            Lattice::standard(2),
            vec![DVector::zeros(2)],
            vec![
                Contact {
                    i: 0,
                    j: 0,
                    offset: vec![1, 0],
                    kind: ContactKind::Strut,
                },
                Contact {
                    i: 0,
                    j: 0,
                    offset: vec![0, 1],
                    kind: ContactKind::Strut,
                },
            ],
        )
        .unwrap()
    }

    fn one_disk_triangular_struts() -> Tensegrity {
        let basis = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.5, 3f64.sqrt() / 2.0]);
        Tensegrity::new(
            Lattice::new(basis).unwrap(),
            vec![DVector::zeros(2)],
            vec![
                Contact {
                    i: 0,
                    j: 0,
                    offset: vec![1, 0],
                    kind: ContactKind::Strut,
                },
                Contact {
                    i: 0,
                    j: 0,
                    offset: vec![0, 1],
                    kind: ContactKind::Strut,
                },
                Contact {
                    i: 0,
                    j: 0,
                    offset: vec![1, -1],
                    kind: ContactKind::Strut,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn edge_vectors_match_hand_values() {
        let two = Tensegrity::new(
            Lattice::standard(2),
            vec![DVector::zeros(2), DVector::from_column_slice(&[1.0, 0.0])],
            vec![Contact {
                i: 0,
                j: 1,
                offset: vec![0, 0],
                kind: ContactKind::Bar,
            }],
        )
        .unwrap();
        assert_eq!(two.edge_vector(0), DVector::from_column_slice(&[1.0, 0.0]));

        let sq = one_disk_square_struts();
        assert_eq!(sq.edge_vector(0), DVector::from_column_slice(&[1.0, 0.0]));

        let tri = one_disk_triangular_struts();
        let e = tri.edge_vector(1);
        assert_relative_eq!(e[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(e[1], 3f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn self_contact_rows_vanish_in_the_periodic_matrix() {
        let m = one_disk_square_struts().rigidity_matrix();
        assert_eq!(m, DMatrix::zeros(2, 2));
    }

    #[test]
    fn single_bar_row_has_signed_edge_blocks() {
        let t = Tensegrity::new(
            Lattice::standard(2),
            vec![DVector::zeros(2), DVector::from_column_slice(&[1.0, 0.0])],
            vec![Contact {
                i: 0,
                j: 1,
                offset: vec![0, 0],
                kind: ContactKind::Bar,
            }],
        )
        .unwrap();
        let m = t.rigidity_matrix();
        assert_eq!(
            m,
            DMatrix::from_row_slice(1, 4, &[-1.0, 0.0, 1.0, 0.0])
        );
    }

    #[test]
    fn translations_are_always_in_the_kernel() {
        for t in [one_disk_square_struts(), one_disk_triangular_struts()] {
            let m = t.rigidity_matrix();
            let tr = t.translation_flexes();
            assert!((m * tr).norm() < 1e-12);
        }
    }

    #[test]
    fn skew_deformations_are_affine_null_directions() {
        let t = one_disk_square_struts();
        let m = t.affine_rigidity_matrix();
        let trivial = t.affine_trivial_flexes();
        assert!((m * trivial).norm() < 1e-12);
    }

    #[test]
    fn affine_nullities_of_the_two_one_disk_packings() {
        use crate::numkernel::{rank_nullspace, DEFAULT_RANK_TOL};
        let sq = one_disk_square_struts().affine_rigidity_matrix();
        assert_eq!(rank_nullspace(&sq, DEFAULT_RANK_TOL).unwrap().nullity, 4);
        let tri = one_disk_triangular_struts().affine_rigidity_matrix();
        assert_eq!(rank_nullspace(&tri, DEFAULT_RANK_TOL).unwrap().nullity, 3);
    }

    #[test]
    fn phase_matrix_at_trivial_character_equals_rigidity_matrix() {
        let t = one_disk_triangular_struts();
        let chi = QuotientCharacter::trivial(2);
        let p = t.phase_matrix(&chi);
        let r = t.rigidity_matrix();
        for k in 0..p.nrows() {
            for c in 0..p.ncols() {
                assert_eq!(p[(k, c)], Complex::new(r[(k, c)], 0.0));
            }
        }
    }

    #[test]
    fn phase_matrix_of_square_at_minus_one_has_nullity_one() {
        use crate::numkernel::{rank_nullspace, DEFAULT_RANK_TOL};
        use num_rational::Ratio;
        let t = one_disk_square_struts();
        let chi = QuotientCharacter::from_turns(vec![Ratio::new(1, 2), Ratio::new(0, 1)]);
        let m = t.phase_matrix(&chi);
        assert_relative_eq!(m[(0, 0)].re, -2.0, epsilon = 1e-12);
        assert!(m[(1, 0)].norm() < 1e-12 && m[(1, 1)].norm() < 1e-12);
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.nullity, 1);
        // the flex direction is vertical
        let flex = r.nullspace.column(0);
        assert!(flex[0].norm() < 1e-12);
        assert!(flex[1].norm() > 0.9);
    }

    #[test]
    fn phase_matrix_of_square_at_cube_root_has_nullity_one() {
        use crate::numkernel::{rank_nullspace, DEFAULT_RANK_TOL};
        use num_rational::Ratio;
        let t = one_disk_square_struts();
        let chi = QuotientCharacter::from_turns(vec![Ratio::new(1, 3), Ratio::new(0, 1)]);
        let m = t.phase_matrix(&chi);
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.nullity, 1);
    }

    #[test]
    fn cover_of_index_one_is_isomorphic() {
        let t = one_disk_triangular_struts();
        let c = t.cover(&Sublattice::identity(2)).unwrap();
        assert_eq!(c.num_vertices(), 1);
        assert_eq!(c.num_contacts(), 3);
    }

    #[test]
    fn cover_of_square_by_diag_2_1() {
        let t = one_disk_square_struts();
        let s = Sublattice::from_columns(&[&[2, 0], &[0, 1]]).unwrap();
        let c = t.cover(&s).unwrap();
        assert_eq!(c.num_vertices(), 2);
        assert_eq!(c.num_contacts(), 4);
        // edge vectors are preserved under covering
        for k in 0..c.num_contacts() {
            assert_relative_eq!(c.edge_vector(k).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dodecagon_cover_quadruples_under_diag_2_2() {
        let t = crate::catalog::get_packing("dodecagon_16")
            .unwrap()
            .detect_contacts(1e-9)
            .unwrap();
        let s = Sublattice::from_columns(&[&[2, 0], &[0, 2]]).unwrap();
        let cover = t.cover(&s).unwrap();
        assert_eq!(cover.num_vertices(), 64);
        assert_eq!(cover.num_contacts(), 136);
    }

    #[test]
    fn phase_nullvectors_lift_to_cover_nullvectors() {
        let t = one_disk_square_struts();
        let s = Sublattice::from_columns(&[&[3, 2], &[3, -2]]).unwrap();
        let q = smith_normal_form(&s).unwrap();
        let cover = t.cover(&s).unwrap();
        let cover_matrix = cover.rigidity_matrix().map(|x| Complex::new(x, 0.0));
        let reps = transversal(&s).unwrap();
        for chi in enumerate_characters(&q, &s) {
            let m = t.phase_matrix(&chi);
            let r = crate::numkernel::rank_nullspace(&m, 1e-9).unwrap();
            for c in 0..r.nullity {
                let base = r.nullspace.column(c);
                // lift q_(i, rep) = rho(rep) q_i over the transversal
                let d = t.dim();
                let mut lifted =
                    DVector::<Complex<f64>>::zeros(cover.num_vertices() * d);
                for i in 0..t.num_vertices() {
                    for (ti, rep) in reps.iter().enumerate() {
                        let rho = chi.eval(rep);
                        for a in 0..d {
                            lifted[(i * reps.len() + ti) * d + a] = rho * base[i * d + a];
                        }
                    }
                }
                let image = &cover_matrix * &lifted;
                assert!(
                    image.norm() < 1e-9,
                    "lifted nullvector must stay null, got {}",
                    image.norm()
                );
            }
        }
    }

    #[test]
    fn linearity_gives_negation_closure() {
        let t = one_disk_square_struts();
        let m = t.affine_rigidity_matrix();
        let v = DVector::from_fn(m.ncols(), |i, _| (i as f64 * 0.37).sin());
        let image = &m * &v;
        let image_neg = &m * (-&v);
        assert_relative_eq!((image + image_neg).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_edge_vector_is_rejected() {
        let r = Tensegrity::new(
            Lattice::standard(2),
            vec![DVector::zeros(2), DVector::zeros(2)],
            vec![Contact {
                i: 0,
                j: 1,
                offset: vec![0, 0],
                kind: ContactKind::Bar,
            }],
        );
        assert!(matches!(r, Err(Error::ZeroEdgeVector(0))));
    }
}
