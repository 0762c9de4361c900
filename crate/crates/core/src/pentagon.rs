//! Closed-form analytics for the twenty-disk example: the equilateral
//! pentagon realization, its shape constant, the phase-flex determinant and
//! quadratic, tour-equation rigidity, and the symmetric squishing family.

use nalgebra::DMatrix;
use num_complex::Complex;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use crate::error::{Error, Result};
use crate::numkernel::{rank_nullspace, DEFAULT_RANK_TOL};

/// Edge directions of the unit-edge pentagon, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PentagonAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub phi: f64,
}

impl PentagonAngles {
    pub fn as_array(&self) -> [f64; 5] {
        [self.alpha, self.beta, self.gamma, self.delta, self.phi]
    }

    /// |sum of the five unit edge vectors|; zero for a closed pentagon.
    pub fn closure_residual(&self) -> f64 {
        let (mut x, mut y) = (0.0, 0.0);
        for t in self.as_array() {
            x += t.cos();
            y += t.sin();
        }
        (x * x + y * y).sqrt()
    }
}

/// Coefficients of A mu'^2 + B mu' + C = 0 after the common mu factor is
/// removed; A = C always.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticCoefficients {
    /// Both roots in mu', as complex numbers.
    pub fn roots(&self) -> (Complex<f64>, Complex<f64>) {
        let disc = Complex::new(self.b * self.b - 4.0 * self.a * self.c, 0.0);
        let sq = disc.sqrt();
        let two_a = 2.0 * self.a;
        (
            (-self.b + sq.re) / two_a + Complex::new(0.0, sq.im / two_a),
            (-self.b - sq.re) / two_a - Complex::new(0.0, sq.im / two_a),
        )
    }
}

/// The reference realization: AF = arcsin(4/5), AT = arcsin(3/10).
pub fn reference_realization() -> PentagonAngles {
    let af = (4.0f64 / 5.0).asin();
    let at = (3.0f64 / 10.0).asin();
    PentagonAngles {
        alpha: 0.0,
        beta: -af - at,
        gamma: af - at + PI,
        delta: -2.0 * at + PI,
        phi: FRAC_PI_2 - at,
    }
}

fn cot(t: f64) -> f64 {
    t.cos() / t.sin()
}

/// Angles whose difference to alpha is a multiple of pi do not describe a
/// packing (the cotangents blow up).
fn relative_angles(angles: &PentagonAngles) -> Result<(f64, f64, f64)> {
    let b = angles.beta - angles.alpha;
    let g = angles.gamma - angles.alpha;
    let d = angles.delta - angles.alpha;
    for u in [b, g, d] {
        if u.sin().abs() < 1e-12 {
            return Err(Error::DegeneratePentagon);
        }
    }
    Ok((b, g, d))
}

/// The shape constant x, a ratio of cotangent differences of the angles
/// relative to alpha.
pub fn shape_constant(angles: &PentagonAngles) -> Result<f64> {
    let (b, g, d) = relative_angles(angles)?;
    let den = cot(b) - cot(g);
    if den.abs() < 1e-12 {
        return Err(Error::DegeneratePentagon);
    }
    Ok((cot(d) - cot(g)) / den)
}

/// Determinant of the 4 x 4 phase-flex system (rotations of the pentagon
/// edges b, c, d with r = 0), angles taken relative to alpha.
pub fn flex_determinant(
    angles: &PentagonAngles,
    mu: Complex<f64>,
    mu_p: Complex<f64>,
) -> Complex<f64> {
    let b = angles.beta - angles.alpha;
    let g = angles.gamma - angles.alpha;
    let d = angles.delta - angles.alpha;
    let re = |x: f64| Complex::new(x, 0.0);
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let m = DMatrix::<Complex<f64>>::from_row_slice(
        4,
        4,
        &[
            one,
            re(b.cos()),
            re(g.cos()),
            re(d.cos()),
            zero,
            re(b.sin()),
            re(g.sin()),
            re(d.sin()),
            one,
            mu_p * b.cos(),
            mu_p * mu * g.cos(),
            mu * d.cos(),
            zero,
            mu_p * b.sin(),
            mu_p * mu * g.sin(),
            mu * d.sin(),
        ],
    );
    m.determinant()
}

/// The real quadratic in mu' for fixed unit mu: A = cot(beta) - cot(gamma),
/// B = -2 cot(beta) + (2 - 2 Re mu) cot(delta) + 2 Re mu cot(gamma), C = A,
/// angles relative to alpha.
pub fn quadratic(angles: &PentagonAngles, mu: Complex<f64>) -> Result<QuadraticCoefficients> {
    let (b, g, d) = relative_angles(angles)?;
    let a = cot(b) - cot(g);
    if a.abs() < 1e-12 {
        return Err(Error::DegeneratePentagon);
    }
    let re_mu = mu.re;
    let bb = -2.0 * cot(b) + (2.0 - 2.0 * re_mu) * cot(d) + 2.0 * re_mu * cot(g);
    Ok(QuadraticCoefficients { a, b: bb, c: a })
}

/// Re(mu') = -B / 2A, and whether that value admits unit-modulus roots
/// (|B / 2A| <= 1 puts the conjugate pair on the unit circle).
pub fn critical_real_part(angles: &PentagonAngles, mu: Complex<f64>) -> Result<(f64, bool)> {
    let q = quadratic(angles, mu)?;
    let re = -q.b / (2.0 * q.a);
    Ok((re, re.abs() <= 1.0))
}

const PHASE_TOL: f64 = 1e-8;

/// Does the unit phase pair admit a flex? Tested through the closed-form
/// ratio (Re(mu') - 1) / (Re(mu) - 1) = x, with the reciprocal form when
/// mu = 1; agrees with the vanishing of `flex_determinant`.
pub fn phase_flex_predicate(
    angles: &PentagonAngles,
    mu: Complex<f64>,
    mu_p: Complex<f64>,
) -> Result<bool> {
    let one = Complex::new(1.0, 0.0);
    if (mu - one).norm() < PHASE_TOL && (mu_p - one).norm() < PHASE_TOL {
        return Err(Error::TrivialPhasePair);
    }
    let x = shape_constant(angles)?;
    if (mu - one).norm() >= PHASE_TOL {
        Ok(((mu_p.re - 1.0) - x * (mu.re - 1.0)).abs() <= PHASE_TOL)
    } else {
        // mu = 1: the symmetric reciprocal form (Re mu - 1) = (Re mu' - 1)/x
        Ok(((mu.re - 1.0) - (mu_p.re - 1.0) / x).abs() <= PHASE_TOL)
    }
}

/// The five tour equations on the edge rotations (a, b, c, d, r) of the
/// lower pentagon: the nearly vertical tour, the horizontal tour, and the
/// pentagon's own sine closure row.
pub fn rotation_system_matrix(angles: &PentagonAngles) -> DMatrix<f64> {
    let PentagonAngles {
        alpha,
        beta,
        gamma,
        delta,
        phi,
    } = *angles;
    DMatrix::from_row_slice(
        5,
        5,
        &[
            1.0, 0.0, 0.0, delta.cos(), 4.0 * phi.cos(),
            0.0, 0.0, 0.0, delta.sin(), 4.0 * phi.sin(),
            0.0, 0.0, gamma.cos(), delta.cos(), 3.0 * (phi + FRAC_PI_3).cos() - phi.cos(),
            0.0, 0.0, gamma.sin(), delta.sin(), 3.0 * (phi + FRAC_PI_3).sin() - phi.sin(),
            alpha.sin(), beta.sin(), gamma.sin(), delta.sin(), phi.sin(),
        ],
    )
}

/// Infinitesimal rigidity of the realization: the 5 x 5 tour system admits
/// only the zero rotation.
pub fn realization_rigidity_check(angles: &PentagonAngles) -> Result<bool> {
    let m = rotation_system_matrix(angles);
    let r = rank_nullspace(&m, DEFAULT_RANK_TOL)?;
    Ok(r.nullity == 0)
}

/// Squish the pentagon while keeping its bilateral symmetry about the phi
/// axis: delta = 2 phi - alpha, gamma = 2 phi - beta, and beta solves the
/// axis component of the closure sum, 2 cos(phi - alpha) + 2 cos(phi - beta)
/// + 1 = 0, by bisection.
pub fn solve_symmetric_pentagon(alpha: f64, phi: f64) -> Result<PentagonAngles> {
    let rhs = -(1.0 + 2.0 * (phi - alpha).cos()) / 2.0;
    if rhs.abs() > 1.0 {
        return Err(Error::NoRootInBracket);
    }
    // root of cos(t) = rhs with t = phi - beta in (0, pi)
    let f = |t: f64| t.cos() - rhs;
    let (mut lo, mut hi) = (1e-12, PI - 1e-12);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(Error::NoRootInBracket);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = phi - 0.5 * (lo + hi);
    Ok(PentagonAngles {
        alpha,
        beta,
        gamma: 2.0 * phi - beta,
        delta: 2.0 * phi - alpha,
        phi,
    })
}

/// Tangent direction (d alpha, d beta, d gamma, d delta, d phi) of the
/// symmetric family at `angles`, normalized to d alpha = 1. Differentiating
/// the axis closure gives d beta / d alpha = -sin(phi - alpha) / sin(phi - beta).
pub fn symmetric_family_tangent(angles: &PentagonAngles) -> [f64; 5] {
    let dbeta = -(angles.phi - angles.alpha).sin() / (angles.phi - angles.beta).sin();
    [1.0, dbeta, -dbeta, -1.0, 0.0]
}

/// Gradient of the shape constant in the five angles (phi does not appear).
pub fn shape_gradient(angles: &PentagonAngles) -> Result<[f64; 5]> {
    let (b, g, d) = relative_angles(angles)?;
    let den = cot(b) - cot(g);
    if den.abs() < 1e-12 {
        return Err(Error::DegeneratePentagon);
    }
    let num = cot(d) - cot(g);
    let csc2 = |t: f64| 1.0 / (t.sin() * t.sin());
    let dx_db = num * csc2(b) / (den * den);
    let dx_dg = csc2(g) * (den - num) / (den * den);
    let dx_dd = -csc2(d) / den;
    let dnum_da = csc2(d) - csc2(g);
    let dden_da = csc2(b) - csc2(g);
    let dx_da = (dnum_da * den - num * dden_da) / (den * den);
    Ok([dx_da, dx_db, dx_dg, dx_dd, 0.0])
}

/// Chain rule of the shape constant along an arbitrary angle direction.
pub fn shape_directional_derivative(angles: &PentagonAngles, direction: &[f64; 5]) -> Result<f64> {
    let grad = shape_gradient(angles)?;
    Ok(grad.iter().zip(direction).map(|(g, d)| g * d).sum())
}

/// dx/d alpha along the symmetric family.
pub fn shape_derivative(angles: &PentagonAngles) -> Result<f64> {
    shape_directional_derivative(angles, &symmetric_family_tangent(angles))
}

/// Root-find alpha in `bracket` so the symmetric pentagon at the reference
/// phi attains the target shape constant; None when the target is not
/// bracketed.
pub fn find_shape_for_x(x_target: f64, bracket: (f64, f64)) -> Result<Option<PentagonAngles>> {
    let phi = reference_realization().phi;
    let eval = |alpha: f64| -> Result<f64> {
        Ok(shape_constant(&solve_symmetric_pentagon(alpha, phi)?)? - x_target)
    };
    let (mut lo, mut hi) = bracket;
    let (flo, fhi) = match (eval(lo), eval(hi)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return Ok(None),
    };
    if flo == 0.0 {
        return Ok(Some(solve_symmetric_pentagon(lo, phi)?));
    }
    if fhi == 0.0 {
        return Ok(Some(solve_symmetric_pentagon(hi, phi)?));
    }
    if flo * fhi > 0.0 {
        return Ok(None);
    }
    let mut sign_lo = flo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = eval(mid)?;
        if fmid == 0.0 {
            break;
        }
        if fmid.signum() == sign_lo {
            lo = mid;
            sign_lo = fmid.signum();
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let angles = solve_symmetric_pentagon(alpha, phi)?;
    Ok(Some(angles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn reference_realization_closes_to_machine_precision() {
        let p = reference_realization();
        assert!(p.closure_residual() <= 1e-12);
        // delta is pi - 2 arcsin(3/10) by construction
        assert_relative_eq!(p.delta, PI - 2.0 * (0.3f64).asin(), epsilon = 1e-15);
        // bilateral symmetry about the phi axis
        assert_relative_eq!(2.0 * p.phi - p.beta, p.gamma, epsilon = 1e-12);
        assert_relative_eq!(2.0 * p.phi - p.alpha, p.delta, epsilon = 1e-12);
    }

    #[test]
    fn shape_constant_of_the_reference_realization() {
        let x = shape_constant(&reference_realization()).unwrap();
        assert!((x - 1.619).abs() < 1e-3, "x = {x}");
    }

    #[test]
    fn shape_constant_degenerate_numerators() {
        let p = reference_realization();
        // delta = gamma makes the numerator vanish
        let zero_num = PentagonAngles { delta: p.gamma, ..p };
        assert_relative_eq!(shape_constant(&zero_num).unwrap(), 0.0, epsilon = 1e-12);
        // delta = beta makes numerator equal denominator
        let one_num = PentagonAngles { delta: p.beta, ..p };
        assert_relative_eq!(shape_constant(&one_num).unwrap(), 1.0, epsilon = 1e-12);
        // beta = gamma is the degenerate denominator
        let degenerate = PentagonAngles { beta: p.gamma, ..p };
        assert!(matches!(
            shape_constant(&degenerate),
            Err(Error::DegeneratePentagon)
        ));
    }

    #[test]
    fn determinant_vanishes_at_the_trivial_pair_and_not_generically() {
        let p = reference_realization();
        let one = Complex::new(1.0, 0.0);
        assert!(flex_determinant(&p, one, one).norm() < 1e-14);
        let mu = Complex::from_polar(1.0, PI / 3.0);
        let mu_p = Complex::from_polar(1.0, PI / 7.0);
        assert!(flex_determinant(&p, mu, mu_p).norm() > 1e-4);
    }

    #[test]
    fn determinant_vanishes_at_the_closed_form_root() {
        let p = reference_realization();
        let mu = Complex::new(-1.0, 0.0);
        let (re, on_circle) = critical_real_part(&p, mu).unwrap();
        // at mu = -1 the root is far off the unit circle
        let x = shape_constant(&p).unwrap();
        assert_relative_eq!(re, 1.0 - 2.0 * x, epsilon = 1e-9);
        assert!(!on_circle);
        // pick instead a mu whose root lands on the circle and check the det
        let theta: f64 = 0.5;
        let mu = Complex::from_polar(1.0, theta);
        let (re, on_circle) = critical_real_part(&p, mu).unwrap();
        assert!(on_circle);
        let mu_p = Complex::new(re, (1.0 - re * re).sqrt());
        assert!(flex_determinant(&p, mu, mu_p).norm() <= 1e-10);
    }

    #[test]
    fn quadratic_has_equal_outer_coefficients_and_unit_root_product() {
        let p = reference_realization();
        for theta in [0.3, 1.0, 2.2, -0.8] {
            let q = quadratic(&p, Complex::from_polar(1.0, theta)).unwrap();
            assert_eq!(q.a, q.c);
            let (r1, r2) = q.roots();
            assert!(((r1 * r2) - Complex::new(1.0, 0.0)).norm() < 1e-10);
            // unit-circle dichotomy
            let (re, on_circle) = critical_real_part(&p, Complex::from_polar(1.0, theta)).unwrap();
            if on_circle {
                assert_relative_eq!(r1.norm(), 1.0, epsilon = 1e-8);
                assert_relative_eq!(r2.norm(), 1.0, epsilon = 1e-8);
                assert_relative_eq!(r1.re, re, epsilon = 1e-8);
            } else {
                assert!((r1.norm() - 1.0).abs() > 1e-8);
                assert!((r2.norm() - 1.0).abs() > 1e-8);
            }
        }
    }

    #[test]
    fn quadratic_at_mu_one_degenerates_to_double_root_one() {
        let p = reference_realization();
        let q = quadratic(&p, Complex::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(q.b, -2.0 * q.a, epsilon = 1e-12);
        let (r1, r2) = q.roots();
        assert!((r1 - Complex::new(1.0, 0.0)).norm() < 1e-7);
        assert!((r2 - Complex::new(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn predicate_rejects_the_trivial_pair_and_finds_constructed_roots() {
        let p = reference_realization();
        let one = Complex::new(1.0, 0.0);
        assert!(matches!(
            phase_flex_predicate(&p, one, one),
            Err(Error::TrivialPhasePair)
        ));
        // construct a pair with the exact ratio
        let x = shape_constant(&p).unwrap();
        let mu = Complex::from_polar(1.0, 0.5);
        let re_p = 1.0 + x * (mu.re - 1.0);
        let mu_p = Complex::new(re_p, (1.0 - re_p * re_p).sqrt());
        assert!(phase_flex_predicate(&p, mu, mu_p).unwrap());
        // and a plainly generic pair
        assert!(!phase_flex_predicate(
            &p,
            Complex::from_polar(1.0, 1.0),
            Complex::from_polar(1.0, 2.0)
        )
        .unwrap());
    }

    #[test]
    fn realization_is_rigid_and_stays_rigid_nearby() {
        let p = reference_realization();
        assert!(realization_rigidity_check(&p).unwrap());
        // rigidity is an open condition
        for (da, db) in [(0.05, -0.03), (-0.04, 0.05), (0.02, 0.02)] {
            let perturbed = PentagonAngles {
                alpha: p.alpha + da,
                beta: p.beta + db,
                gamma: p.gamma - da,
                delta: p.delta + db * 0.5,
                phi: p.phi - da * 0.3,
            };
            assert!(realization_rigidity_check(&perturbed).unwrap());
        }
    }

    #[test]
    fn all_zero_rotations_always_solve_the_tour_system() {
        let m = rotation_system_matrix(&reference_realization());
        let zero = DVector::<f64>::zeros(5);
        assert!((m * zero).norm() < 1e-15);
    }

    #[test]
    fn symmetric_solver_reproduces_the_reference_realization() {
        let p = reference_realization();
        let solved = solve_symmetric_pentagon(p.alpha, p.phi).unwrap();
        assert_relative_eq!(solved.beta, p.beta, epsilon = 1e-9);
        assert_relative_eq!(solved.gamma, p.gamma, epsilon = 1e-9);
        assert_relative_eq!(solved.delta, p.delta, epsilon = 1e-9);
        assert!(solved.closure_residual() <= 1e-10);
        // reflection identities hold exactly by construction
        assert_eq!(solved.delta, 2.0 * solved.phi - solved.alpha);
        assert_eq!(solved.gamma, 2.0 * solved.phi - solved.beta);
    }

    #[test]
    fn family_tangent_matches_finite_differences() {
        let p = reference_realization();
        let h = 1e-6;
        let plus = solve_symmetric_pentagon(p.alpha + h, p.phi).unwrap();
        let minus = solve_symmetric_pentagon(p.alpha - h, p.phi).unwrap();
        let fd_dbeta = (plus.beta - minus.beta) / (2.0 * h);
        // the closure-consistent tangent: d beta / d alpha = -sqrt(91)/6
        let expected = -(91f64).sqrt() / 6.0;
        assert_relative_eq!(fd_dbeta, expected, epsilon = 1e-4);
        let tangent = symmetric_family_tangent(&p);
        assert_relative_eq!(tangent[1], expected, epsilon = 1e-12);
        // d delta / d alpha is exactly -1 from the reflection identity
        let fd_ddelta = (plus.delta - minus.delta) / (2.0 * h);
        assert_relative_eq!(fd_ddelta, -1.0, epsilon = 1e-9);
        assert_eq!(tangent[3], -1.0);
    }

    #[test]
    fn closure_is_stationary_along_the_family_tangent_only() {
        let p = reference_realization();
        let tangent = symmetric_family_tangent(&p);
        let printed = [1.0, -6.0 / (91f64).sqrt(), 6.0 / (91f64).sqrt(), -1.0, 0.0];
        let h = 1e-6;
        let residual_along = |dir: &[f64; 5]| {
            let shifted = PentagonAngles {
                alpha: p.alpha + h * dir[0],
                beta: p.beta + h * dir[1],
                gamma: p.gamma + h * dir[2],
                delta: p.delta + h * dir[3],
                phi: p.phi + h * dir[4],
            };
            shifted.closure_residual()
        };
        assert!(residual_along(&tangent) < 1e-11);
        assert!(residual_along(&printed) > 1e-7);
    }

    #[test]
    fn chain_rule_matches_finite_differences_along_the_family() {
        let p = reference_realization();
        let analytic = shape_derivative(&p).unwrap();
        assert!(analytic.abs() > 1e-3, "dx/dalpha must be nonzero");
        let h = 1e-6;
        let xp = shape_constant(&solve_symmetric_pentagon(p.alpha + h, p.phi).unwrap()).unwrap();
        let xm = shape_constant(&solve_symmetric_pentagon(p.alpha - h, p.phi).unwrap()).unwrap();
        let fd = (xp - xm) / (2.0 * h);
        assert_relative_eq!(analytic, fd, max_relative = 1e-4);
    }

    #[test]
    fn zero_direction_gives_zero_derivative() {
        let p = reference_realization();
        let d = shape_directional_derivative(&p, &[0.0; 5]).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn determinant_and_ratio_agree_on_perturbed_pentagons() {
        // the algebraic equivalence is angle generic, not tied to closure
        let base = reference_realization();
        let mut state = 0x1234_5678_9abc_def1u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut flexing_cases = 0;
        for trial in 0..100 {
            let p = PentagonAngles {
                alpha: base.alpha + 0.2 * (next() - 0.5),
                beta: base.beta + 0.2 * (next() - 0.5),
                gamma: base.gamma + 0.2 * (next() - 0.5),
                delta: base.delta + 0.2 * (next() - 0.5),
                phi: base.phi + 0.2 * (next() - 0.5),
            };
            if shape_constant(&p).is_err() {
                continue;
            }
            let (mu, mu_p) = if trial % 3 == 0 {
                // construct a flexing pair when the root lies on the circle
                let mu = Complex::from_polar(1.0, next() * PI);
                match critical_real_part(&p, mu) {
                    Ok((re, true)) => {
                        flexing_cases += 1;
                        (mu, Complex::new(re, (1.0 - re * re).sqrt()))
                    }
                    _ => (mu, Complex::from_polar(1.0, next() * PI)),
                }
            } else {
                (
                    Complex::from_polar(1.0, next() * PI),
                    Complex::from_polar(1.0, next() * PI),
                )
            };
            if (mu - Complex::new(1.0, 0.0)).norm() < 1e-8
                && (mu_p - Complex::new(1.0, 0.0)).norm() < 1e-8
            {
                continue;
            }
            let det_zero = flex_determinant(&p, mu, mu_p).norm() <= 1e-8;
            let predicate = phase_flex_predicate(&p, mu, mu_p).unwrap();
            assert_eq!(det_zero, predicate, "trial {trial} disagrees");
        }
        assert!(flexing_cases > 5, "both branches must be exercised");
    }

    #[test]
    fn find_shape_inverts_the_shape_constant() {
        // x decreases through alpha = 0 and turns around shortly after, so
        // a bracket that straddles the sign change recovers alpha = 0
        let p = reference_realization();
        let x0 = shape_constant(&p).unwrap();
        let found = find_shape_for_x(x0, (-0.05, 0.005)).unwrap().unwrap();
        assert!(found.alpha.abs() < 1e-8);
        assert!(
            (shape_constant(&found).unwrap() - x0).abs() < 1e-8,
            "residual target"
        );

        // a target inside the attainable range of the family
        let found = find_shape_for_x(1.64, (-0.05, 0.0)).unwrap().unwrap();
        assert!((shape_constant(&found).unwrap() - 1.64).abs() < 1e-8);
        assert!(found.closure_residual() < 1e-10);

        assert!(find_shape_for_x(50.0, (-0.2, 0.2)).unwrap().is_none());
    }
}
