//! The planar edge-flex calculus: rotation-system face tracing on the
//! torus, vertex/edge flex conversion, the scalar rotation space of a bar
//! framework, and the triangle/rhombus equalities.

use nalgebra::{DMatrix, DVector};
use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::framework::{ContactKind, FlexVector, Tensegrity};
use crate::numkernel::{rank_nullspace, DEFAULT_RANK_TOL};

/// One traversal direction of a contact: `forward` runs from vertex i to
/// vertex j along +e_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dart {
    pub contact: usize,
    pub forward: bool,
}

impl Dart {
    fn twin(self) -> Dart {
        Dart {
            contact: self.contact,
            forward: !self.forward,
        }
    }
}

/// A face of the embedded contact graph, as the cyclic dart sequence of its
/// counterclockwise boundary walk.
#[derive(Debug, Clone)]
pub struct Face {
    pub darts: Vec<Dart>,
}

#[derive(Debug, Clone)]
pub struct FaceStructure {
    pub faces: Vec<Face>,
    pub vertex_count: usize,
    pub edge_count: usize,
}

impl FaceStructure {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count as i64 + self.faces.len() as i64
    }

    /// Histogram of face lengths.
    pub fn census(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for f in &self.faces {
            *h.entry(f.darts.len()).or_insert(0) += 1;
        }
        h
    }
}

fn dart_base(t: &Tensegrity, d: Dart) -> usize {
    let c = &t.contacts[d.contact];
    if d.forward {
        c.i
    } else {
        c.j
    }
}

fn dart_direction(t: &Tensegrity, d: Dart) -> DVector<f64> {
    let e = t.edge_vector(d.contact);
    if d.forward {
        e
    } else {
        -e
    }
}

fn dart_offset(t: &Tensegrity, d: Dart) -> Vec<i64> {
    let c = &t.contacts[d.contact];
    if d.forward {
        c.offset.clone()
    } else {
        c.offset.iter().map(|&o| -o).collect()
    }
}

/// Faces of the straight-line torus embedding, traced from the angular
/// rotation system; rejects crossing edges and checks the Euler count.
pub fn trace_faces(t: &Tensegrity) -> Result<FaceStructure> {
    if t.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: t.dim(),
        });
    }
    check_no_crossings(t)?;

    let n_darts = 2 * t.num_contacts();
    let all_darts: Vec<Dart> = (0..n_darts)
        .map(|id| Dart {
            contact: id / 2,
            forward: id % 2 == 0,
        })
        .collect();

    // rotation system: darts at each vertex in counterclockwise angular order
    let mut at_vertex: Vec<Vec<Dart>> = vec![Vec::new(); t.num_vertices()];
    for &d in &all_darts {
        at_vertex[dart_base(t, d)].push(d);
    }
    for darts in &mut at_vertex {
        darts.sort_by(|&a, &b| {
            let da = dart_direction(t, a);
            let db = dart_direction(t, b);
            let ta = da[1].atan2(da[0]);
            let tb = db[1].atan2(db[0]);
            ta.partial_cmp(&tb)
                .unwrap()
                .then_with(|| (a.contact, a.forward).cmp(&(b.contact, b.forward)))
        });
    }

    // next dart of a face walk: the counterclockwise predecessor of the twin
    // at the twin's base vertex (keeps the face on the left)
    let next = |d: Dart| -> Dart {
        let tw = d.twin();
        let ring = &at_vertex[dart_base(t, tw)];
        let pos = ring.iter().position(|&x| x == tw).expect("dart is present");
        ring[(pos + ring.len() - 1) % ring.len()]
    };

    let mut seen = vec![false; n_darts];
    let dart_id = |d: Dart| d.contact * 2 + usize::from(!d.forward);
    let mut faces = Vec::new();
    for &start in &all_darts {
        if seen[dart_id(start)] {
            continue;
        }
        let mut walk = Vec::new();
        let mut d = start;
        loop {
            seen[dart_id(d)] = true;
            walk.push(d);
            d = next(d);
            if d == start {
                break;
            }
        }
        faces.push(Face { darts: walk });
    }

    let fs = FaceStructure {
        faces,
        vertex_count: t.num_vertices(),
        edge_count: t.num_contacts(),
    };
    let chi = fs.euler_characteristic();
    if chi != 0 {
        return Err(Error::EulerViolation(chi));
    }
    Ok(fs)
}

/// Pairwise segment test over every lattice translate that could touch;
/// touching at a shared endpoint is fine, anything else is a crossing.
fn check_no_crossings(t: &Tensegrity) -> Result<()> {
    let dual = t.lattice.dual_rows()?;
    let segments: Vec<(DVector<f64>, DVector<f64>)> = (0..t.num_contacts())
        .map(|k| {
            let a = t.vertices[t.contacts[k].i].clone();
            let b = &a + t.edge_vector(k);
            (a, b)
        })
        .collect();
    let lengths: Vec<f64> = segments.iter().map(|(a, b)| (b - a).norm()).collect();
    for k in 0..segments.len() {
        for l in k..segments.len() {
            let (a1, b1) = &segments[k];
            let (a2, b2) = &segments[l];
            let mid1 = (a1 + b1) * 0.5;
            let mid2 = (a2 + b2) * 0.5;
            let reach = (lengths[k] + lengths[l]) * 0.5 + 1e-6;
            let shift = &dual * (&mid1 - &mid2);
            let mut ranges = Vec::new();
            for m in 0..2 {
                let half = dual.row(m).norm() * reach;
                ranges.push(((shift[m] - half).ceil() as i64, (shift[m] + half).floor() as i64));
            }
            for o1 in ranges[0].0..=ranges[0].1 {
                for o2 in ranges[1].0..=ranges[1].1 {
                    if k == l && o1 == 0 && o2 == 0 {
                        continue;
                    }
                    let shift_vec = t.lattice.vector(&[o1, o2]);
                    let a2s = a2 + &shift_vec;
                    let b2s = b2 + &shift_vec;
                    if segments_cross(a1, b1, &a2s, &b2s) {
                        return Err(Error::EdgeCrossing(k, l));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Proper crossing test: intersection anywhere except a shared endpoint.
fn segments_cross(a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>) -> bool {
    const EPS: f64 = 1e-9;
    let same = |p: &DVector<f64>, q: &DVector<f64>| (p - q).norm() < EPS;
    let shared_ends =
        usize::from(same(a, c)) + usize::from(same(a, d)) + usize::from(same(b, c))
            + usize::from(same(b, d));
    if shared_ends >= 2 {
        return false; // the same or the reversed segment
    }

    let cross = |o: &DVector<f64>, p: &DVector<f64>, q: &DVector<f64>| {
        (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
    };
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    let collinear = d1.abs() < EPS && d2.abs() < EPS && d3.abs() < EPS && d4.abs() < EPS;

    if collinear {
        // overlap of the projections longer than a point is a crossing,
        // whether or not an endpoint is shared
        let dir = b - a;
        let len2 = dir.dot(&dir);
        let s = dir.dot(&(c - a)) / len2;
        let e = dir.dot(&(d - a)) / len2;
        let (lo, hi) = if s < e { (s, e) } else { (e, s) };
        return hi.min(1.0) - lo.max(0.0) > EPS;
    }
    if shared_ends == 1 {
        return false; // segments joined at a vertex, not collinear
    }

    let opposite = |x: f64, y: f64| (x > EPS && y < -EPS) || (x < -EPS && y > EPS);
    // proper crossing, or an endpoint in the other segment's interior
    (opposite(d1, d2) && opposite(d3, d4))
        || (d1.abs() < EPS && on_segment(a, b, c))
        || (d2.abs() < EPS && on_segment(a, b, d))
        || (d3.abs() < EPS && on_segment(c, d, a))
        || (d4.abs() < EPS && on_segment(c, d, b))
}

fn on_segment(a: &DVector<f64>, b: &DVector<f64>, p: &DVector<f64>) -> bool {
    const EPS: f64 = 1e-9;
    let dir = b - a;
    let len2 = dir.dot(&dir);
    let s = dir.dot(&(p - a)) / len2;
    s > EPS && s < 1.0 - EPS
}

/// Per-contact edge motions e'_k.
#[derive(Debug, Clone)]
pub struct EdgeFlex {
    pub per_contact: Vec<DVector<f64>>,
}

impl EdgeFlex {
    /// Sign pattern of e_k . e'_k per kind: zero on bars, nonpositive on
    /// cables, nonnegative on struts. Returns offending contacts.
    pub fn sign_violations(&self, t: &Tensegrity, tol: f64) -> Vec<usize> {
        let mut bad = Vec::new();
        for (k, ef) in self.per_contact.iter().enumerate() {
            let dot = t.edge_vector(k).dot(ef);
            let ok = match t.contacts[k].kind {
                ContactKind::Bar => dot.abs() <= tol,
                ContactKind::Cable => dot <= tol,
                ContactKind::Strut => dot >= -tol,
            };
            if !ok {
                bad.push(k);
            }
        }
        bad
    }
}

/// e'_k = p'_j - p'_i, plus A e_k when the flex carries an affine block.
pub fn vertex_to_edge_flex(t: &Tensegrity, flex: &FlexVector) -> EdgeFlex {
    let per_contact = (0..t.num_contacts())
        .map(|k| {
            let c = &t.contacts[k];
            let mut ef = &flex.per_vertex[c.j] - &flex.per_vertex[c.i];
            if let Some(a) = &flex.affine {
                ef += a * t.edge_vector(k);
            }
            ef
        })
        .collect();
    EdgeFlex { per_contact }
}

/// Integrate an edge flex back to vertex motions from an anchor vertex.
/// Each traversed dart contributes e' - A e (A zero for a periodic flex),
/// so the recovered vertices satisfy e'_k = p'_j - p'_i + A e_k. Every
/// closed quotient walk must telescope to zero, tours included; any
/// violation is rejected with the offending contact.
pub fn edge_to_vertex_flex(
    t: &Tensegrity,
    ef: &EdgeFlex,
    anchor: usize,
    affine: Option<&DMatrix<f64>>,
) -> Result<FlexVector> {
    let d = t.dim();
    let n = t.num_vertices();
    let zero = DVector::zeros(d);
    let dart_step = |dart: Dart| -> DVector<f64> {
        let sign = if dart.forward { 1.0 } else { -1.0 };
        let mut v = &ef.per_contact[dart.contact] * sign;
        if let Some(a) = affine {
            v -= a * t.edge_vector(dart.contact) * sign;
        }
        v
    };
    let mut incident: Vec<Vec<Dart>> = vec![Vec::new(); n];
    for k in 0..t.num_contacts() {
        incident[t.contacts[k].i].push(Dart {
            contact: k,
            forward: true,
        });
        incident[t.contacts[k].j].push(Dart {
            contact: k,
            forward: false,
        });
    }
    // spanning forest by BFS
    let mut value: Vec<Option<DVector<f64>>> = vec![None; n];
    value[anchor] = Some(zero.clone());
    let mut queue = VecDeque::from([anchor]);
    while let Some(v) = queue.pop_front() {
        let v_flex = value[v].clone().expect("visited");
        for &dart in &incident[v] {
            let w = dart_base(t, dart.twin());
            if value[w].is_none() {
                value[w] = Some(&v_flex + dart_step(dart));
                queue.push_back(w);
            }
        }
    }
    // every contact must telescope, which covers all cycle and tour sums
    for k in 0..t.num_contacts() {
        let c = &t.contacts[k];
        let fi = value[c.i].clone().ok_or(Error::MissingTour(0))?;
        let fj = value[c.j].clone().ok_or(Error::MissingTour(0))?;
        let residual = (&fi
            + dart_step(Dart {
                contact: k,
                forward: true,
            })
            - &fj)
            .norm();
        if residual > 1e-9 {
            return Err(Error::InconsistentCycleSum { face: k, residual });
        }
    }
    let per_vertex = value
        .into_iter()
        .map(|v| v.unwrap_or_else(|| zero.clone()))
        .collect();
    Ok(FlexVector {
        per_vertex,
        affine: affine.cloned(),
    })
}

/// Scalar infinitesimal rotations of a planar bar framework, one per
/// contact, with e'_k = alpha_k R(pi/2) e_k.
#[derive(Debug, Clone)]
pub struct RotationVector {
    pub per_contact: Vec<f64>,
}

impl RotationVector {
    pub fn to_edge_flex(&self, t: &Tensegrity) -> EdgeFlex {
        let per_contact = (0..t.num_contacts())
            .map(|k| rot90(&t.edge_vector(k)) * self.per_contact[k])
            .collect();
        EdgeFlex { per_contact }
    }
}

fn rot90(e: &DVector<f64>) -> DVector<f64> {
    DVector::from_column_slice(&[-e[1], e[0]])
}

type WalkState = (usize, Vec<i64>);

/// Shortest dart walks realizing each lattice generator, found by BFS over
/// (vertex, accumulated offset) states.
pub fn generator_tours(t: &Tensegrity) -> Result<Vec<Vec<Dart>>> {
    let d = t.dim();
    let n = t.num_vertices();
    let window = 2 + t
        .contacts
        .iter()
        .flat_map(|c| c.offset.iter().map(|o| o.abs()))
        .max()
        .unwrap_or(1);
    let mut incident: Vec<Vec<Dart>> = vec![Vec::new(); n];
    for k in 0..t.num_contacts() {
        incident[t.contacts[k].i].push(Dart {
            contact: k,
            forward: true,
        });
        incident[t.contacts[k].j].push(Dart {
            contact: k,
            forward: false,
        });
    }
    let mut tours = Vec::new();
    for g in 0..d {
        let mut target = vec![0i64; d];
        target[g] = 1;
        let start = (0usize, vec![0i64; d]);
        let mut parents: HashMap<WalkState, (WalkState, Dart)> = HashMap::new();
        let mut queue = VecDeque::from([start.clone()]);
        let mut found = false;
        'bfs: while let Some((v, off)) = queue.pop_front() {
            for &dart in &incident[v] {
                let w = dart_base(t, dart.twin());
                let step = dart_offset(t, dart);
                let n_off: Vec<i64> = off.iter().zip(&step).map(|(a, b)| a + b).collect();
                if n_off.iter().any(|o| o.abs() > window) {
                    continue;
                }
                let state = (w, n_off.clone());
                if state == start {
                    continue;
                }
                if parents.contains_key(&state) {
                    continue;
                }
                parents.insert(state.clone(), ((v, off.clone()), dart));
                if w == 0 && n_off == target {
                    found = true;
                    break 'bfs;
                }
                queue.push_back(state);
            }
        }
        if !found {
            return Err(Error::MissingTour(g));
        }
        let mut walk = Vec::new();
        let mut cursor = (0usize, target);
        while cursor != start {
            let (prev, dart) = parents[&cursor].clone();
            walk.push(dart);
            cursor = prev;
        }
        walk.reverse();
        tours.push(walk);
    }
    Ok(tours)
}

/// Basis of the rotation space: nullspace of the stacked face-cycle rows
/// (two per face) and generator-tour rows (two per generator) over the
/// per-contact rotations.
pub fn rotation_flex_space(t: &Tensegrity) -> Result<Vec<RotationVector>> {
    let faces = trace_faces(t)?;
    let tours = generator_tours(t)?;
    let n_contacts = t.num_contacts();
    let n_rows = 2 * (faces.faces.len() + tours.len());
    let mut m = DMatrix::<f64>::zeros(n_rows, n_contacts);
    let mut row = 0;
    let add_walk = |m: &mut DMatrix<f64>, row: usize, walk: &[Dart]| {
        for &dart in walk {
            let e = t.edge_vector(dart.contact);
            let r = rot90(&e);
            let sign = if dart.forward { 1.0 } else { -1.0 };
            m[(row, dart.contact)] += sign * r[0];
            m[(row + 1, dart.contact)] += sign * r[1];
        }
    };
    for f in &faces.faces {
        add_walk(&mut m, row, &f.darts);
        row += 2;
    }
    for tour in &tours {
        add_walk(&mut m, row, tour);
        row += 2;
    }
    let r = rank_nullspace(&m, DEFAULT_RANK_TOL)?;
    Ok((0..r.nullity)
        .map(|c| RotationVector {
            per_contact: r.nullspace.column(c).iter().copied().collect(),
        })
        .collect())
}

/// A face that breaks one of the two edge-rotation equalities.
#[derive(Debug, Clone)]
pub struct LemmaViolation {
    pub face: usize,
    pub detail: String,
}

/// Rotations around a triangle must be equal; rotations of parallel edges
/// of a rhombus must be equal.
pub fn check_triangle_rhombus(
    t: &Tensegrity,
    faces: &FaceStructure,
    alpha: &RotationVector,
) -> Vec<LemmaViolation> {
    const TOL: f64 = 1e-8;
    let mut violations = Vec::new();
    for (fi, f) in faces.faces.iter().enumerate() {
        let a: Vec<f64> = f
            .darts
            .iter()
            .map(|d| alpha.per_contact[d.contact])
            .collect();
        match f.darts.len() {
            3 => {
                if a.iter().any(|&x| (x - a[0]).abs() > TOL) {
                    violations.push(LemmaViolation {
                        face: fi,
                        detail: format!("triangle rotations differ: {a:?}"),
                    });
                }
            }
            4 => {
                let dirs: Vec<DVector<f64>> = f
                    .darts
                    .iter()
                    .map(|&d| dart_direction(t, d))
                    .collect();
                let parallel = |u: &DVector<f64>, v: &DVector<f64>| {
                    (u[0] * v[1] - u[1] * v[0]).abs() < 1e-9
                        && (u.norm() - v.norm()).abs() < 1e-9
                };
                let rhombus = parallel(&dirs[0], &dirs[2]) && parallel(&dirs[1], &dirs[3]);
                if rhombus && ((a[0] - a[2]).abs() > TOL || (a[1] - a[3]).abs() > TOL) {
                    violations.push(LemmaViolation {
                        face: fi,
                        detail: format!("rhombus pairs differ: {a:?}"),
                    });
                }
            }
            _ => {}
        }
    }
    violations
}
