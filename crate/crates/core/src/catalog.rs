//! Built-in example packings with known jamming behavior.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::packing::{Disk, PeriodicPacking};

/// Expected invariants of a catalog entry, checked by the test suite.
#[derive(Debug, Clone, Copy)]
pub struct Expected {
    pub vertices: usize,
    pub contacts: usize,
    /// (triangles, squares, dodecagons) where the contact graph is planar.
    pub faces: Option<(usize, usize, usize)>,
    pub density: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub expected: Expected,
}

/// Stable, ordered list of the built-in packings.
pub fn list_catalog() -> Vec<CatalogEntry> {
    let s3 = 3f64.sqrt();
    vec![
        CatalogEntry {
            name: "one_disk_square",
            description: "one disk on the square torus; collectively jammed, \
                          not strictly jammed, first unjammed on an index-2 sublattice",
            expected: Expected {
                vertices: 1,
                contacts: 2,
                faces: Some((0, 1, 0)),
                density: std::f64::consts::PI / 4.0,
            },
        },
        CatalogEntry {
            name: "one_disk_triangular",
            description: "one disk on the triangular torus; strictly jammed and \
                          consistently jammed at every tested index",
            expected: Expected {
                vertices: 1,
                contacts: 3,
                faces: Some((2, 0, 0)),
                density: std::f64::consts::PI / 12f64.sqrt(),
            },
        },
        CatalogEntry {
            name: "dodecagon_16",
            description: "sixteen disks around a dodecagonal hole; low density, \
                          consistently collectively jammed, not strictly jammed",
            expected: Expected {
                vertices: 16,
                contacts: 34,
                faces: Some((12, 5, 1)),
                density: 4.0 * std::f64::consts::PI / (6.0 * s3 + 11.0),
            },
        },
    ]
}

/// Catalog packing by name.
pub fn get_packing(name: &str) -> Result<PeriodicPacking> {
    match name {
        "one_disk_square" => Ok(one_disk_square()),
        "one_disk_triangular" => Ok(one_disk_triangular()),
        "dodecagon_16" => Ok(dodecagon_16()),
        other => Err(Error::UnknownCatalogEntry(other.to_string())),
    }
}

fn half_disk(x: f64, y: f64) -> Disk {
    Disk {
        center: DVector::from_column_slice(&[x, y]),
        radius: 0.5,
    }
}

fn one_disk_square() -> PeriodicPacking {
    PeriodicPacking::new(Lattice::standard(2), vec![half_disk(0.0, 0.0)])
}

fn one_disk_triangular() -> PeriodicPacking {
    let basis = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.5, 3f64.sqrt() / 2.0]);
    PeriodicPacking::new(Lattice::new(basis).unwrap(), vec![half_disk(0.0, 0.0)])
}

/// Sixteen unit-diameter disks per cell: twelve on a regular unit-edge
/// dodecagon ring and four forming a small square, on the square lattice
/// generated by (sqrt3 + 1, -sqrt3 - 2) and its quarter turn. Squares sit
/// flush on four dodecagon edges, triangles interlock neighboring rings,
/// and the four extra disks close a unit square between cells: 12 triangle
/// faces, 5 square faces, 1 dodecagon face per cell.
fn dodecagon_16() -> PeriodicPacking {
    let s3 = 3f64.sqrt();
    let g1 = [s3 + 1.0, -s3 - 2.0];
    let g2 = [s3 + 2.0, s3 + 1.0];
    let basis = DMatrix::from_column_slice(2, 2, &[g1[0], g1[1], g2[0], g2[1]]);

    // ring vertices at angles 15 + 30k degrees, circumradius (sqrt6 + sqrt2)/2
    let a = (2.0 + s3) / 2.0;
    let b = (1.0 + s3) / 2.0;
    let mut disks = vec![
        half_disk(a, 0.5),
        half_disk(b, b),
        half_disk(0.5, a),
        half_disk(-0.5, a),
        half_disk(-b, b),
        half_disk(-a, 0.5),
        half_disk(-a, -0.5),
        half_disk(-b, -b),
        half_disk(-0.5, -a),
        half_disk(0.5, -a),
        half_disk(b, -b),
        half_disk(a, -0.5),
    ];
    // the four square-closing disks, one quarter turn apart
    disks.push(half_disk(1.0, 1.0 + s3));
    disks.push(half_disk(-1.0 - s3, 1.0));
    disks.push(half_disk(-1.0, -1.0 - s3));
    disks.push(half_disk(1.0 + s3, -1.0));

    PeriodicPacking::new(Lattice::new(basis).unwrap(), disks)
}
