//! Jamming decision procedures with certificates: collective jamming via
//! bar rigidity plus an equilibrium stress, strict jamming via affine
//! rigidity plus a strict stress, sublattice scans through quotient
//! characters, and the N_min search.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::Result;
use crate::framework::{deflate, ContactKind, FlexVector, Tensegrity};
use crate::lattice::{
    enumerate_characters, enumerate_sublattices, smith_normal_form, transversal,
    QuotientCharacter, Sublattice,
};
use crate::numkernel::{rank_nullspace, solve_lp, LpProblem, LpStatus, DEFAULT_RANK_TOL};

/// Strict-feasibility margin: a maximized slack t must clear this to count.
pub const STRICT_MARGIN: f64 = 1e-7;
/// Residual tolerance when re-verifying certificates.
pub const CERT_TOL: f64 = 1e-8;

/// Per-contact weights, single-counted over canonical contacts.
#[derive(Debug, Clone, PartialEq)]
pub struct StressVector {
    pub per_contact: Vec<f64>,
}

impl StressVector {
    /// Max vertex-balance residual of the equilibrium condition.
    pub fn equilibrium_residual(&self, t: &Tensegrity) -> f64 {
        let m = t.rigidity_matrix();
        let w = DVector::from_column_slice(&self.per_contact);
        (m.transpose() * w).amax()
    }

    /// Max entry of sum_k w_k e_k e_k^T + I_d.
    pub fn strict_residual(&self, t: &Tensegrity) -> f64 {
        let d = t.dim();
        let mut acc = DMatrix::<f64>::identity(d, d);
        for (k, &w) in self.per_contact.iter().enumerate() {
            let e = t.edge_vector(k);
            acc += (&e * e.transpose()) * w;
        }
        acc.amax()
    }

    /// Signs respect the member kinds: negative on struts, positive on cables.
    pub fn signs_ok(&self, t: &Tensegrity) -> bool {
        self.per_contact
            .iter()
            .zip(&t.contacts)
            .all(|(&w, c)| match c.kind {
                ContactKind::Strut => w < 0.0,
                ContactKind::Cable => w > 0.0,
                ContactKind::Bar => true,
            })
    }
}

/// Rigidity of the bar framework on the torus: only translations flex.
pub fn bar_periodically_rigid(t: &Tensegrity) -> Result<(bool, usize, Option<FlexVector>)> {
    let d = t.dim();
    let m = t.as_bars().rigidity_matrix();
    let r = rank_nullspace(&m, DEFAULT_RANK_TOL)?;
    if r.nullity == d {
        return Ok((true, d, None));
    }
    // extract one nullvector that is not a translation
    let translations = t.translation_flexes();
    let mut flex = None;
    for c in 0..r.nullity {
        let v = r.nullspace.column(c).into_owned();
        let deflated = deflate(&v, &translations);
        if deflated.norm() > 1e-8 {
            let unit = &deflated / deflated.norm();
            flex = Some(FlexVector::periodic(split_vertexwise(&unit, t.num_vertices(), d)));
            break;
        }
    }
    Ok((false, r.nullity, flex))
}

fn split_vertexwise(v: &DVector<f64>, n: usize, d: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| DVector::from_fn(d, |a, _| v[i * d + a]))
        .collect()
}

/// Equilibrium stress by LP feasibility: R^T w = 0 with w <= -1 on struts
/// and w >= 1 on cables (the cone is scale invariant, so unit margins lose
/// nothing). Internally struts take w = -1 - u and cables w = 1 + u with
/// u >= 0, which keeps the tableau to the equality rows alone.
pub fn equilibrium_stress(t: &Tensegrity) -> Result<Option<StressVector>> {
    let m = t.rigidity_matrix();
    let n_contacts = t.num_contacts();
    let n_coords = m.ncols();
    let sign = |kind: ContactKind| match kind {
        ContactKind::Strut => -1.0,
        ContactKind::Cable => 1.0,
        ContactKind::Bar => 0.0,
    };
    let mut equalities = Vec::with_capacity(n_coords);
    for c in 0..n_coords {
        let mut row = vec![0.0; n_contacts];
        let mut rhs = 0.0;
        for (k, contact) in t.contacts.iter().enumerate() {
            let a = m[(k, c)];
            match contact.kind {
                ContactKind::Bar => row[k] = a,
                _ => {
                    row[k] = sign(contact.kind) * a;
                    rhs -= sign(contact.kind) * a;
                }
            }
        }
        equalities.push((row, rhs));
    }
    let nonneg = t
        .contacts
        .iter()
        .map(|c| c.kind != ContactKind::Bar)
        .collect();
    let out = solve_lp(&LpProblem {
        objective: vec![0.0; n_contacts],
        equalities,
        inequalities: Vec::new(),
        nonneg,
    })?;
    match out.status {
        LpStatus::Optimal => {
            let per_contact = t
                .contacts
                .iter()
                .zip(&out.witness)
                .map(|(c, &u)| match c.kind {
                    ContactKind::Strut => -1.0 - u,
                    ContactKind::Cable => 1.0 + u,
                    ContactKind::Bar => u,
                })
                .collect();
            Ok(Some(StressVector { per_contact }))
        }
        _ => Ok(None),
    }
}

/// Strict equilibrium stress: maximize t subject to vertex equilibrium,
/// sum_k w_k e_k e_k^T = -I_d and w_k <= -t on struts (w_k >= t on
/// cables); strict iff the optimum clears the margin. Internally struts
/// take w = -t - u and cables w = t + u with u >= 0.
pub fn strict_equilibrium_stress(t: &Tensegrity) -> Result<Option<StressVector>> {
    let d = t.dim();
    let m = t.rigidity_matrix();
    let n_contacts = t.num_contacts();
    // variables: u_1..u_E, then t
    let n_vars = n_contacts + 1;
    let subst = |kind: ContactKind| -> (f64, f64) {
        // w_k = s * u_k + tau * t
        match kind {
            ContactKind::Strut => (-1.0, -1.0),
            ContactKind::Cable => (1.0, 1.0),
            ContactKind::Bar => (1.0, 0.0),
        }
    };
    let mut equalities = Vec::new();
    let push_functional = |coeffs: &dyn Fn(usize) -> f64, rhs: f64, eqs: &mut Vec<(Vec<f64>, f64)>| {
        let mut row = vec![0.0; n_vars];
        for (k, contact) in t.contacts.iter().enumerate() {
            let (s, tau) = subst(contact.kind);
            let a = coeffs(k);
            row[k] = s * a;
            row[n_contacts] += tau * a;
        }
        eqs.push((row, rhs));
    };
    for c in 0..m.ncols() {
        push_functional(&|k| m[(k, c)], 0.0, &mut equalities);
    }
    // the d(d+1)/2 distinct entries of the second-moment condition
    for a in 0..d {
        for b in a..d {
            let rhs = if a == b { -1.0 } else { 0.0 };
            push_functional(&|k| {
                let e = t.edge_vector(k);
                e[a] * e[b]
            }, rhs, &mut equalities);
        }
    }
    let mut nonneg: Vec<bool> = t
        .contacts
        .iter()
        .map(|c| c.kind != ContactKind::Bar)
        .collect();
    nonneg.push(false); // t itself is free
    let mut objective = vec![0.0; n_vars];
    objective[n_contacts] = 1.0;
    let out = solve_lp(&LpProblem {
        objective,
        equalities,
        inequalities: Vec::new(),
        nonneg,
    })?;
    match out.status {
        LpStatus::Optimal if out.optimum > STRICT_MARGIN => {
            let margin = out.witness[n_contacts];
            let per_contact = t
                .contacts
                .iter()
                .zip(&out.witness)
                .map(|(c, &u)| {
                    let (s, tau) = subst(c.kind);
                    s * u + tau * margin
                })
                .collect();
            Ok(Some(StressVector { per_contact }))
        }
        _ => Ok(None),
    }
}

/// Certificate carried by the collective-jamming verdict.
#[derive(Debug, Clone)]
pub enum CollectiveCertificate {
    Stress(StressVector),
    Flex(FlexVector),
}

/// Collective jamming: bar rigidity together with an equilibrium stress.
pub fn collectively_jammed(t: &Tensegrity) -> Result<(bool, CollectiveCertificate)> {
    let (rigid, _, flex) = bar_periodically_rigid(t)?;
    if !rigid {
        return Ok((false, CollectiveCertificate::Flex(flex.expect("nonrigid has a flex"))));
    }
    match equilibrium_stress(t)? {
        Some(stress) => Ok((true, CollectiveCertificate::Stress(stress))),
        None => {
            // rigid bars but no stress: some strut can strictly expand; the
            // LP route below recovers such a motion as the certificate
            let flex = strut_escape_flex(t)?;
            Ok((false, CollectiveCertificate::Flex(flex)))
        }
    }
}

/// A strut flex with positive total slack, found by the direct LP; used as
/// the unjammed certificate when the bar framework is rigid.
fn strut_escape_flex(t: &Tensegrity) -> Result<FlexVector> {
    let (_, _, witness) = strut_lp_internal(t)?;
    Ok(FlexVector::periodic(split_vertexwise(
        &witness,
        t.num_vertices(),
        t.dim(),
    )))
}

/// Direct LP test on the strut operator: maximize capped slacks of
/// R p' >= s with translations pinned. Rigid iff the optimum is zero and
/// the bar nullity is exactly d.
pub fn strut_rigid_direct_lp(t: &Tensegrity) -> Result<bool> {
    let (optimum, nullity, _) = strut_lp_internal(t)?;
    Ok(optimum <= STRICT_MARGIN && nullity == t.dim())
}

fn strut_lp_internal(t: &Tensegrity) -> Result<(f64, usize, DVector<f64>)> {
    let d = t.dim();
    let n = t.num_vertices();
    let m = t.rigidity_matrix();
    let n_contacts = t.num_contacts();
    // variables: p' (n d, free), slacks s (one per contact, 0 <= s <= 1)
    let n_vars = n * d + n_contacts;
    let mut inequalities = Vec::new();
    for k in 0..n_contacts {
        // s_k - (R p')_k <= 0
        let mut row = vec![0.0; n_vars];
        for c in 0..n * d {
            row[c] = -m[(k, c)];
        }
        row[n * d + k] = 1.0;
        inequalities.push((row, 0.0));
        // s_k <= 1
        let mut cap = vec![0.0; n_vars];
        cap[n * d + k] = 1.0;
        inequalities.push((cap, 1.0));
    }
    let mut equalities = Vec::new();
    for a in 0..d {
        let mut row = vec![0.0; n_vars];
        for i in 0..n {
            row[i * d + a] = 1.0;
        }
        equalities.push((row, 0.0));
    }
    let mut objective = vec![0.0; n_vars];
    for k in 0..n_contacts {
        objective[n * d + k] = 1.0;
    }
    let mut nonneg = vec![false; n_vars];
    for k in 0..n_contacts {
        nonneg[n * d + k] = true;
    }
    let out = solve_lp(&LpProblem {
        objective,
        equalities,
        inequalities,
        nonneg,
    })?;
    let nullity = rank_nullspace(&t.as_bars().rigidity_matrix(), DEFAULT_RANK_TOL)?.nullity;
    let witness = DVector::from_fn(n * d, |c, _| {
        out.witness.get(c).copied().unwrap_or(0.0)
    });
    Ok((out.optimum.max(0.0), nullity, witness))
}

/// Affine rigidity of the bar framework: nullity of the affine operator
/// equals the trivial count d + d(d-1)/2.
pub fn affinely_rigid(t: &Tensegrity) -> Result<(bool, usize)> {
    let d = t.dim();
    let m = t.as_bars().affine_rigidity_matrix();
    let r = rank_nullspace(&m, DEFAULT_RANK_TOL)?;
    let trivial = d + d * (d - 1) / 2;
    Ok((r.nullity == trivial, r.nullity))
}

/// Certificates for the strict verdict.
#[derive(Debug, Clone)]
pub struct StrictOutcome {
    pub strict: bool,
    pub affinely_rigid: bool,
    pub affine_nullity: usize,
    pub stress: Option<StressVector>,
    /// A nontrivial affine flex when affine rigidity fails.
    pub affine_flex: Option<FlexVector>,
}

/// Strict jamming: affine rigidity of the bars plus a strict stress.
pub fn strictly_jammed(t: &Tensegrity) -> Result<StrictOutcome> {
    let d = t.dim();
    let n = t.num_vertices();
    let (rigid, nullity) = affinely_rigid(t)?;
    let stress = strict_equilibrium_stress(t)?;
    let affine_flex = if rigid {
        None
    } else {
        let m = t.as_bars().affine_rigidity_matrix();
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL)?;
        let trivial = t.affine_trivial_flexes();
        let mut found = None;
        for c in 0..r.nullity {
            let v = r.nullspace.column(c).into_owned();
            let deflated = deflate(&v, &trivial);
            if deflated.norm() > 1e-8 {
                let unit = &deflated / deflated.norm();
                let per_vertex = split_vertexwise(&unit, n, d);
                let mut a = DMatrix::zeros(d, d);
                for row in 0..d {
                    for col in 0..d {
                        a[(row, col)] = unit[n * d + row * d + col];
                    }
                }
                found = Some(FlexVector {
                    per_vertex: per_vertex.into_iter().take(n).collect(),
                    affine: Some(a),
                });
                break;
            }
        }
        found
    };
    Ok(StrictOutcome {
        strict: rigid && stress.is_some(),
        affinely_rigid: rigid,
        affine_nullity: nullity,
        stress,
        affine_flex,
    })
}

/// Result of the per-character sublattice test.
#[derive(Debug, Clone)]
pub struct SublatticeVerdict {
    pub jammed: bool,
    /// Nontrivial characters whose phase matrix has a nullspace.
    pub flexing_characters: Vec<QuotientCharacter>,
}

/// Jamming with respect to a sublattice, by enumerating the quotient
/// characters: unjammed iff some nontrivial character's phase matrix has
/// positive nullity. Callers with an unjammed base get an immediate verdict.
pub fn sublattice_jammed(t: &Tensegrity, s: &Sublattice) -> Result<SublatticeVerdict> {
    let (base_rigid, _, _) = bar_periodically_rigid(t)?;
    if !base_rigid {
        return Ok(SublatticeVerdict {
            jammed: false,
            flexing_characters: vec![QuotientCharacter::trivial(t.dim())],
        });
    }
    let q = smith_normal_form(s)?;
    let bars = t.as_bars();
    let mut flexing = Vec::new();
    for chi in enumerate_characters(&q, s) {
        if chi.is_trivial() {
            continue;
        }
        let m = bars.phase_matrix(&chi);
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL)?;
        if r.nullity > 0 {
            flexing.push(chi);
        }
    }
    Ok(SublatticeVerdict {
        jammed: flexing.is_empty(),
        flexing_characters: flexing,
    })
}

/// Real part of a lifted phase flex: a genuine flex on the cover by the
/// given sublattice (falls back to the imaginary part when the real part
/// vanishes).
pub fn cover_flex_from_character(
    t: &Tensegrity,
    s: &Sublattice,
    chi: &QuotientCharacter,
) -> Result<Option<FlexVector>> {
    let d = t.dim();
    let m = t.as_bars().phase_matrix(chi);
    let r = rank_nullspace(&m, DEFAULT_RANK_TOL)?;
    if r.nullity == 0 {
        return Ok(None);
    }
    let base = r.nullspace.column(0).into_owned();
    let reps = transversal(s)?;
    let n_cover = t.num_vertices() * reps.len();
    let mut real = Vec::with_capacity(n_cover);
    let mut imag = Vec::with_capacity(n_cover);
    for i in 0..t.num_vertices() {
        for rep in &reps {
            let rho = chi.eval(rep);
            let mut re = DVector::zeros(d);
            let mut im = DVector::zeros(d);
            for a in 0..d {
                let val: Complex<f64> = rho * base[i * d + a];
                re[a] = val.re;
                im[a] = val.im;
            }
            real.push(re);
            imag.push(im);
        }
    }
    let norm_re: f64 = real.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let flex = if norm_re > 1e-9 {
        FlexVector::periodic(real)
    } else {
        FlexVector::periodic(imag)
    };
    Ok(Some(flex))
}

/// gcd law for the one-disk square packing: a sublattice with columns
/// (a, b), (c, d) flexes iff gcd(a, c) * gcd(b, d) != 1.
pub fn one_disk_gcd_predicate(s: &Sublattice) -> bool {
    assert_eq!(s.dim(), 2, "the gcd law is a planar statement");
    let c0 = s.column(0);
    let c1 = s.column(1);
    let g1 = gcd(c0[0], c1[0]);
    let g2 = gcd(c0[1], c1[1]);
    g1 * g2 != 1
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Bounded N_min verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NMin {
    /// Smallest unjamming sublattice index.
    Finite(i64),
    /// No unjamming sublattice up to the tested bound (exclusive).
    AtLeast(i64),
}

impl std::fmt::Display for NMin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NMin::Finite(m) => write!(f, "{m}"),
            NMin::AtLeast(m) => write!(f, ">= {m}"),
        }
    }
}

/// First unjamming sublattice found by the index scan.
#[derive(Debug, Clone)]
pub struct UnjammedWitness {
    pub sublattice: Sublattice,
    pub characters: Vec<QuotientCharacter>,
}

/// Scan sublattice indices 2..=max_index in order; the verdict is the
/// smallest index with an unjammed sublattice, with the lexicographically
/// first Hermite matrix as witness.
pub fn n_min(t: &Tensegrity, max_index: i64) -> Result<(NMin, Option<UnjammedWitness>)> {
    for m in 2..=max_index {
        for s in enumerate_sublattices(t.dim(), m)? {
            let verdict = sublattice_jammed(t, &s)?;
            if !verdict.jammed {
                return Ok((
                    NMin::Finite(m),
                    Some(UnjammedWitness {
                        sublattice: s,
                        characters: verdict.flexing_characters,
                    }),
                ));
            }
        }
    }
    Ok((NMin::AtLeast(max_index + 1), None))
}

/// Aggregate report for one packing-derived tensegrity.
#[derive(Debug, Clone)]
pub struct JammingReport {
    pub collective: bool,
    pub strict: bool,
    pub n_min: NMin,
    pub tested_index_bound: i64,
    pub consistent_collective_up_to_bound: bool,
    pub consistent_strict_up_to_bound: bool,
    pub collective_certificate: CollectiveCertificate,
    pub strict_outcome: StrictOutcome,
    pub first_unjammed: Option<UnjammedWitness>,
    /// Max residual of the lifted strict stress check
    /// || sum w e e^T + m I || over all scanned sublattices (strict case).
    pub stress_scaling_residual: Option<f64>,
}

impl JammingReport {
    /// Re-verify every carried certificate against its defining conditions.
    pub fn verify(&self, t: &Tensegrity) -> Result<bool> {
        let mut ok = true;
        match &self.collective_certificate {
            CollectiveCertificate::Stress(s) => {
                ok &= s.equilibrium_residual(t) <= CERT_TOL && s.signs_ok(t);
            }
            CollectiveCertificate::Flex(f) => {
                // a strut flex: every member may only expand, and the motion
                // is not a bare translation
                let m = t.rigidity_matrix();
                let col = f.to_column();
                let image = m * &col;
                let min = image.iter().cloned().fold(f64::INFINITY, f64::min);
                let nontrivial = deflate(&col, &t.translation_flexes()).norm() > 1e-9;
                ok &= min >= -CERT_TOL && nontrivial;
            }
        }
        if let Some(s) = &self.strict_outcome.stress {
            ok &= s.equilibrium_residual(t) <= CERT_TOL;
            ok &= s.strict_residual(t) <= CERT_TOL;
            ok &= s.signs_ok(t);
        }
        if let Some(f) = &self.strict_outcome.affine_flex {
            let m = t.as_bars().affine_rigidity_matrix();
            let col = f.to_column();
            ok &= (m * &col).amax() <= CERT_TOL && col.norm() > 1e-9;
        }
        Ok(ok)
    }
}

/// Full consistency report: collective and strict verdicts, the N_min scan,
/// and the lifted-stress scaling cross-check on every scanned sublattice.
pub fn consistency_report(t: &Tensegrity, max_index: i64) -> Result<JammingReport> {
    let (collective, collective_certificate) = collectively_jammed(t)?;
    let strict_outcome = strictly_jammed(t)?;
    let (n_min_verdict, first_unjammed) = if collective {
        n_min(t, max_index)?
    } else {
        (NMin::Finite(1), None)
    };
    let consistent_collective = collective && matches!(n_min_verdict, NMin::AtLeast(_));
    let consistent_strict = strict_outcome.strict && consistent_collective;

    // SURdecomp cross-check: a strict stress lifted to an index-m cover has
    // second moment -m I before rescaling.
    let stress_scaling_residual = if let Some(stress) = &strict_outcome.stress {
        let d = t.dim();
        let mut worst: f64 = 0.0;
        for m in 1..=max_index {
            for s in enumerate_sublattices(t.dim(), m)? {
                let cover = t.cover(&s)?;
                let copies = transversal(&s)?.len();
                let mut acc = DMatrix::<f64>::identity(d, d) * m as f64;
                for k in 0..cover.num_contacts() {
                    let w = stress.per_contact[k / copies];
                    let e = cover.edge_vector(k);
                    acc += (&e * e.transpose()) * w;
                }
                worst = worst.max(acc.amax());
            }
        }
        Some(worst)
    } else {
        None
    };

    Ok(JammingReport {
        collective,
        strict: strict_outcome.strict,
        n_min: n_min_verdict,
        tested_index_bound: max_index,
        consistent_collective_up_to_bound: consistent_collective,
        consistent_strict_up_to_bound: consistent_strict,
        collective_certificate,
        strict_outcome,
        first_unjammed,
        stress_scaling_residual,
    })
}
