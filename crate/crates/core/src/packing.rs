//! Periodic ball packings: overlap validation, tangency detection, density.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::framework::{Contact, ContactKind, Tensegrity};
use crate::lattice::Lattice;

#[derive(Debug, Clone, PartialEq)]
pub struct Disk {
    pub center: DVector<f64>,
    pub radius: f64,
}

/// Finitely many balls per fundamental cell, repeated by the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPacking {
    pub lattice: Lattice,
    pub disks: Vec<Disk>,
}

/// An overlapping pair, reported in lattice offset coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub offset: Vec<i64>,
    pub depth: f64,
}

impl PeriodicPacking {
    pub fn new(lattice: Lattice, disks: Vec<Disk>) -> Self {
        PeriodicPacking { lattice, disks }
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    /// Default tangency tolerance, scaled to the packing: 1e-9 times the
    /// mean radius.
    pub fn default_contact_tol(&self) -> f64 {
        let mean = self.disks.iter().map(|d| d.radius).sum::<f64>() / self.disks.len() as f64;
        1e-9 * mean
    }

    /// All pairs closer than the radius sum minus `tol`, across every
    /// relevant lattice offset. Empty means the packing is valid.
    pub fn validate(&self, tol: f64) -> Result<Vec<Violation>> {
        if tol < 0.0 {
            return Err(Error::NegativeTolerance(tol));
        }
        for (i, d) in self.disks.iter().enumerate() {
            if d.radius <= 0.0 {
                return Err(Error::NonPositiveRadius(i, d.radius));
            }
        }
        let mut violations = Vec::new();
        self.for_each_pair_within(0.0, |i, j, offset, dist| {
            let gap = self.disks[i].radius + self.disks[j].radius - dist;
            if gap > tol {
                violations.push(Violation {
                    i,
                    j,
                    offset: offset.to_vec(),
                    depth: gap,
                });
            }
        })?;
        Ok(violations)
    }

    /// Tangent pairs as a strut tensegrity. One canonical contact per
    /// unordered tangency: i <= j, and a lexicographically positive offset
    /// when i = j.
    pub fn detect_contacts(&self, tol: f64) -> Result<Tensegrity> {
        let mut contacts = Vec::new();
        self.for_each_pair_within(tol, |i, j, offset, dist| {
            let target = self.disks[i].radius + self.disks[j].radius;
            if (dist - target).abs() <= tol {
                contacts.push(Contact {
                    i,
                    j,
                    offset: offset.to_vec(),
                    kind: ContactKind::Strut,
                });
            }
        })?;
        let vertices = self.disks.iter().map(|d| d.center.clone()).collect();
        Tensegrity::new(self.lattice.clone(), vertices, contacts)
    }

    /// Ball volume over cell volume.
    pub fn density(&self) -> f64 {
        let total: f64 = self
            .disks
            .iter()
            .map(|d| ball_volume(self.dim(), d.radius))
            .sum();
        total / self.lattice.cell_volume()
    }

    /// Visit each canonical pair (i <= j, lex-positive offset for i = j)
    /// whose center distance is at most r_i + r_j + slack.
    fn for_each_pair_within<F>(&self, slack: f64, mut visit: F) -> Result<()>
    where
        F: FnMut(usize, usize, &[i64], f64),
    {
        let dim = self.dim();
        let dual = self.lattice.dual_rows()?;
        let n = self.disks.len();
        for i in 0..n {
            for j in i..n {
                let reach = self.disks[i].radius + self.disks[j].radius + slack + 1e-9;
                let diff = &self.disks[j].center - &self.disks[i].center;
                // |diff + T lambda| <= reach, solved per dual row for an
                // exact integer bounding box on lambda
                let shift = &dual * &diff;
                let mut ranges = Vec::with_capacity(dim);
                for m in 0..dim {
                    let half = dual.row(m).norm() * reach;
                    let lo = (-shift[m] - half).ceil() as i64;
                    let hi = (-shift[m] + half).floor() as i64;
                    ranges.push((lo, hi));
                }
                let mut offset = vec![0i64; dim];
                self.scan_offsets(&ranges, 0, &mut offset, &mut |offset: &[i64]| {
                    if i == j && !lex_positive(offset) {
                        return;
                    }
                    let sep = &diff + self.lattice.vector(offset);
                    let dist = sep.norm();
                    if dist <= reach {
                        visit(i, j, offset, dist);
                    }
                });
            }
        }
        Ok(())
    }

    fn scan_offsets(
        &self,
        ranges: &[(i64, i64)],
        axis: usize,
        offset: &mut Vec<i64>,
        visit: &mut impl FnMut(&[i64]),
    ) {
        if axis == ranges.len() {
            visit(offset);
            return;
        }
        for v in ranges[axis].0..=ranges[axis].1 {
            offset[axis] = v;
            self.scan_offsets(ranges, axis + 1, offset, visit);
        }
    }
}

fn lex_positive(offset: &[i64]) -> bool {
    for &v in offset {
        if v > 0 {
            return true;
        }
        if v < 0 {
            return false;
        }
    }
    false
}

/// Volume of a d-ball via the two-step recursion.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0 * radius,
        _ => 2.0 * std::f64::consts::PI * radius * radius / dim as f64 * ball_volume(dim - 2, radius),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Sublattice;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn one_disk_square() -> PeriodicPacking {
        PeriodicPacking::new(
            Lattice::standard(2),
            vec![Disk {
                center: DVector::zeros(2),
                radius: 0.5,
            }],
        )
    }

    fn one_disk_triangular() -> PeriodicPacking {
        let basis = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.5, 3f64.sqrt() / 2.0]);
        PeriodicPacking::new(
            Lattice::new(basis).unwrap(),
            vec![Disk {
                center: DVector::zeros(2),
                radius: 0.5,
            }],
        )
    }

    #[test]
    fn unit_square_single_disk_is_valid() {
        assert!(one_disk_square().validate(1e-9).unwrap().is_empty());
    }

    #[test]
    fn oversized_disk_overlaps_its_own_translate() {
        let mut p = one_disk_square();
        p.disks[0].radius = 0.6;
        let v = p.validate(1e-9).unwrap();
        assert!(!v.is_empty());
        let worst = v
            .iter()
            .max_by(|a, b| a.depth.partial_cmp(&b.depth).unwrap())
            .unwrap();
        assert_relative_eq!(worst.depth, 0.2, epsilon = 1e-12);
        assert_eq!(worst.i, 0);
        assert_eq!(worst.j, 0);
    }

    #[test]
    fn non_positive_radius_is_an_error() {
        let mut p = one_disk_square();
        p.disks[0].radius = 0.0;
        assert!(matches!(
            p.validate(1e-9),
            Err(Error::NonPositiveRadius(0, _))
        ));
    }

    #[test]
    fn square_packing_has_two_canonical_contacts() {
        let t = one_disk_square().detect_contacts(1e-9).unwrap();
        assert_eq!(t.contacts.len(), 2);
        let offsets: Vec<&[i64]> = t.contacts.iter().map(|c| c.offset.as_slice()).collect();
        assert!(offsets.contains(&[1, 0].as_slice()));
        assert!(offsets.contains(&[0, 1].as_slice()));
        assert!(t.contacts.iter().all(|c| c.kind == ContactKind::Strut));
    }

    #[test]
    fn triangular_packing_has_three_canonical_contacts() {
        let t = one_disk_triangular().detect_contacts(1e-9).unwrap();
        assert_eq!(t.contacts.len(), 3);
    }

    #[test]
    fn densities_match_closed_forms() {
        use std::f64::consts::PI;
        assert_relative_eq!(one_disk_square().density(), PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(
            one_disk_triangular().density(),
            PI / 12f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn contacts_are_invariant_under_rotation() {
        let theta: f64 = 0.7;
        let rot = DMatrix::from_row_slice(
            2,
            2,
            &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
        );
        let p = one_disk_triangular();
        let rotated = PeriodicPacking::new(
            Lattice::new(&rot * p.lattice.basis()).unwrap(),
            vec![Disk {
                center: DVector::zeros(2),
                radius: 0.5,
            }],
        );
        let a = p.detect_contacts(1e-9).unwrap();
        let b = rotated.detect_contacts(1e-9).unwrap();
        assert_eq!(a.contacts.len(), b.contacts.len());
        let mut x: Vec<Vec<i64>> = a.contacts.iter().map(|c| c.offset.clone()).collect();
        let mut y: Vec<Vec<i64>> = b.contacts.iter().map(|c| c.offset.clone()).collect();
        x.sort();
        y.sort();
        assert_eq!(x, y);
    }

    #[test]
    fn cover_contact_count_scales_with_index() {
        let t = one_disk_square().detect_contacts(1e-9).unwrap();
        for s in [
            Sublattice::from_columns(&[&[2, 0], &[0, 1]]).unwrap(),
            Sublattice::from_columns(&[&[3, 2], &[3, -2]]).unwrap(),
        ] {
            let cover = t.cover(&s).unwrap();
            assert_eq!(cover.contacts.len() as i64, s.index() * 2);
            assert_eq!(cover.vertices.len() as i64, s.index());
        }
    }

    #[test]
    fn density_is_invariant_under_covers() {
        let p = one_disk_triangular();
        let s = Sublattice::from_columns(&[&[2, 1], &[0, 3]]).unwrap();
        // build the cover packing explicitly
        let reps = crate::lattice::transversal(&s).unwrap();
        let basis = p.lattice.basis()
            * DMatrix::from_fn(2, 2, |r, c| s.coeffs()[(r, c)] as f64);
        let mut disks = Vec::new();
        for rep in &reps {
            disks.push(Disk {
                center: &p.disks[0].center + p.lattice.vector(rep),
                radius: 0.5,
            });
        }
        let cover = PeriodicPacking::new(Lattice::new(basis).unwrap(), disks);
        assert!(cover.validate(1e-9).unwrap().is_empty());
        assert_relative_eq!(cover.density(), p.density(), epsilon = 1e-12);
    }
}
