//! Truncated volume of a tetrahedron with one ideal and three hyperideal
//! vertices, the ideal tetrahedron volume, and the related volume formulas.
//!
//! Angles of one tetrahedron are ordered `(α₁₂, α₂₃, α₃₁, γ₁, γ₂, γ₃)`. The
//! edge angle `α_ij` belongs to the side from vertex `i` to vertex `j`, the
//! angle `γ_i` to the edge from the ideal vertex to vertex `i`.

use thiserror::Error;

use crate::lob::{lob_deriv, lob_second_deriv, lob_unchecked, reduce_mod_pi, LobError};
use crate::scalar::Real;

/// Absolute tolerance on each defining constraint of Δ, Δ̄ and Δ₀.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Minimum distance of every Lobachevsky argument from a multiple of π
/// before derivatives are evaluated.
pub const SINGULARITY_GUARD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("angles {0:?} are not in the closed domain (violated: {1})")]
    OutsideClosure(Vec<f64>, &'static str),
    #[error("triple {0:?} is not in the closed ideal domain")]
    NotIdeal([f64; 3]),
    #[error("argument {arg} of term {term} is within {SINGULARITY_GUARD} of a multiple of pi")]
    NearSingular { term: usize, arg: f64 },
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error(transparent)]
    Lob(#[from] LobError),
}

/// Dihedral angles of a tetrahedron with one ideal and three hyperideal vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetAngles<T> {
    /// `(α₁₂, α₂₃, α₃₁)`
    pub alpha: [T; 3],
    /// `(γ₁, γ₂, γ₃)`
    pub gamma: [T; 3],
}

/// Angles of an ideal tetrahedron (opposite edges carry equal angles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealTriple<T>(pub [T; 3]);

/// The five ideal tetrahedra whose volumes add up to twice the truncated volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveTetra<T> {
    /// `(γ₁′, γ₂′, γ₃′)`
    pub primed: IdealTriple<T>,
    /// `(γ₁″, γ₂″, γ₃″)`
    pub double_primed: IdealTriple<T>,
    /// `(γᵢ, μᵢ, νᵢ)` for `i = 1, 2, 3`
    pub vertex: [IdealTriple<T>; 3],
}

/// Boundary classification of a point of Δ̄.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    Interior,
    MildlyDegenerate,
    BadlyDegenerate,
    AlphaDegenerate,
}

/// Shape of a single ideal triple on the closed simplex Δ̄₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripleShape {
    Interior,
    /// On an open side: one angle vanishes.
    Mild,
    /// At a corner: a permutation of `(0, 0, π)`.
    Bad,
}

fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

impl<T: Real> IdealTriple<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self([a, b, c])
    }

    pub fn sum(&self) -> T {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn in_closure(&self) -> bool {
        let tol = T::lit(MEMBERSHIP_TOL);
        self.0.iter().all(|&g| g >= -tol) && (self.sum() - T::PI()).abs() <= tol
    }

    pub fn in_open(&self) -> bool {
        let tol = T::lit(MEMBERSHIP_TOL);
        self.0.iter().all(|&g| g > tol) && (self.sum() - T::PI()).abs() <= tol
    }

    pub fn shape(&self) -> TripleShape {
        let tol = T::lit(MEMBERSHIP_TOL);
        match self.0.iter().filter(|&&g| g <= tol).count() {
            0 => TripleShape::Interior,
            1 => TripleShape::Mild,
            _ => TripleShape::Bad,
        }
    }

    fn as_f64(&self) -> [f64; 3] {
        self.0.map(to_f64)
    }
}

/// One Lobachevsky term of `2V`: argument `(half_pi_count·π + Σ coeff·x) / 2`.
#[derive(Debug, Clone, Copy)]
struct Term {
    pi_count: i8,
    coeff: [i8; 6],
}

impl Term {
    fn arg<T: Real>(&self, x: &[T; 6]) -> T {
        let mut s = T::lit(self.pi_count as f64) * T::PI();
        for (c, v) in self.coeff.iter().zip(x) {
            if *c != 0 {
                s = s + T::lit(*c as f64) * *v;
            }
        }
        s / T::lit(2.0)
    }
}

/// The fifteen terms of `2V`, grouped by vertex: `Л(γᵢ)`, then the four
/// half-angle terms `γᵢ′, γᵢ″, μᵢ, νᵢ`.
fn terms() -> [Term; 15] {
    let mut out = [Term { pi_count: 0, coeff: [0; 6] }; 15];
    // (incoming side, outgoing side) at vertex i: α_ki and α_ij.
    let sides = [(2usize, 0usize), (0, 1), (1, 2)];
    for (i, &(prev, next)) in sides.iter().enumerate() {
        let g = 3 + i;
        let base = 5 * i;
        out[base].coeff[g] = 2;
        for (k, (sp, sn)) in [(1i8, -1i8), (-1, 1), (1, 1), (-1, -1)].into_iter().enumerate() {
            let t = &mut out[base + 1 + k];
            t.pi_count = 1;
            t.coeff[prev] = sp;
            t.coeff[next] = sn;
            t.coeff[g] = -1;
        }
    }
    out
}

impl<T: Real> TetAngles<T> {
    pub fn new(alpha: [T; 3], gamma: [T; 3]) -> Self {
        Self { alpha, gamma }
    }

    /// From `(α₁₂, α₂₃, α₃₁, γ₁, γ₂, γ₃)`.
    pub fn from_array(x: [T; 6]) -> Self {
        Self { alpha: [x[0], x[1], x[2]], gamma: [x[3], x[4], x[5]] }
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.alpha[0], self.alpha[1], self.alpha[2], self.gamma[0], self.gamma[1], self.gamma[2]]
    }

    /// `π − γᵢ − α_ij − α_ki` for `i = 1, 2, 3`.
    pub fn delta_slacks(&self) -> [T; 3] {
        let [a12, a23, a31] = self.alpha;
        let [g1, g2, g3] = self.gamma;
        [T::PI() - g1 - a12 - a31, T::PI() - g2 - a23 - a12, T::PI() - g3 - a31 - a23]
    }

    fn violated(&self, strict: bool) -> Option<&'static str> {
        let tol = T::lit(MEMBERSHIP_TOL);
        let bad = |v: T| if strict { v <= tol } else { v < -tol };
        if (self.gamma[0] + self.gamma[1] + self.gamma[2] - T::PI()).abs() > tol {
            return Some("gamma angle sum");
        }
        if self.alpha.iter().any(|&a| bad(a)) {
            return Some("alpha positivity");
        }
        if self.gamma.iter().any(|&g| bad(g)) {
            return Some("gamma positivity");
        }
        if self.delta_slacks().iter().any(|&s| bad(s)) {
            return Some("gamma + alpha + alpha < pi");
        }
        None
    }

    /// Membership in the open set Δ.
    pub fn in_open(&self) -> bool {
        self.violated(true).is_none()
    }

    /// Membership in the closure Δ̄.
    pub fn in_closure(&self) -> bool {
        self.violated(false).is_none()
    }

    fn require_closure(&self) -> Result<(), EnergyError> {
        match self.violated(false) {
            None => Ok(()),
            Some(what) => Err(EnergyError::OutsideClosure(
                self.to_array().iter().map(|v| to_f64(*v)).collect(),
                what,
            )),
        }
    }
}

/// Volume of the ideal tetrahedron with angles `t`: `Л(γ₁)+Л(γ₂)+Л(γ₃)`.
pub fn v0<T: Real>(t: &IdealTriple<T>) -> Result<T, EnergyError> {
    if !t.in_closure() {
        return Err(EnergyError::NotIdeal(t.as_f64()));
    }
    Ok(t.0.iter().fold(T::zero(), |acc, &g| acc + lob_unchecked(g)))
}

fn half_angles<T: Real>(t: &TetAngles<T>) -> ([T; 3], [T; 3], [T; 3], [T; 3]) {
    let two = T::lit(2.0);
    let [a12, a23, a31] = t.alpha;
    let pairs = [(a31, a12), (a12, a23), (a23, a31)];
    let mut primed = [T::zero(); 3];
    let mut double_primed = [T::zero(); 3];
    let mut mu = [T::zero(); 3];
    let mut nu = [T::zero(); 3];
    for i in 0..3 {
        let (prev, next) = pairs[i];
        let g = t.gamma[i];
        primed[i] = (T::PI() + prev - next - g) / two;
        double_primed[i] = (T::PI() - prev + next - g) / two;
        mu[i] = (T::PI() + prev + next - g) / two;
        nu[i] = (T::PI() - prev - next - g) / two;
    }
    (primed, double_primed, mu, nu)
}

/// The five ideal tetrahedra associated with a point of Δ̄.
pub fn five_tetra<T: Real>(t: &TetAngles<T>) -> Result<FiveTetra<T>, EnergyError> {
    t.require_closure()?;
    let (p, pp, mu, nu) = half_angles(t);
    Ok(FiveTetra {
        primed: IdealTriple(p),
        double_primed: IdealTriple(pp),
        vertex: [0, 1, 2].map(|i| IdealTriple::new(t.gamma[i], mu[i], nu[i])),
    })
}

/// The alternative five-tetrahedra split:
/// `(γ₁,γ₂,γ₃), (γ″), (γ₁′,μ₂,ν₃), (γ₂′,μ₃,ν₁), (γ₃′,μ₁,ν₂)`.
pub fn five_tetra_alt<T: Real>(t: &TetAngles<T>) -> Result<[IdealTriple<T>; 5], EnergyError> {
    t.require_closure()?;
    let (p, pp, mu, nu) = half_angles(t);
    Ok([
        IdealTriple(t.gamma),
        IdealTriple(pp),
        IdealTriple::new(p[0], mu[1], nu[2]),
        IdealTriple::new(p[1], mu[2], nu[0]),
        IdealTriple::new(p[2], mu[0], nu[1]),
    ])
}

impl<T: Real> FiveTetra<T> {
    pub fn triples(&self) -> [IdealTriple<T>; 5] {
        [self.primed, self.double_primed, self.vertex[0], self.vertex[1], self.vertex[2]]
    }
}

/// Truncated volume `V(α₁₂, α₂₃, α₃₁, γ₁, γ₂, γ₃)` as the fifteen-term sum.
pub fn tet_volume<T: Real>(t: &TetAngles<T>) -> Result<T, EnergyError> {
    t.require_closure()?;
    let x = t.to_array();
    let twice = terms().iter().fold(T::zero(), |acc, term| acc + lob_unchecked(term.arg(&x)));
    Ok(twice / T::lit(2.0))
}

fn checked_args<T: Real>(t: &TetAngles<T>) -> Result<([T; 6], [T; 15]), EnergyError> {
    t.require_closure()?;
    let x = t.to_array();
    let ts = terms();
    let mut args = [T::zero(); 15];
    for (k, term) in ts.iter().enumerate() {
        let a = term.arg(&x);
        if reduce_mod_pi(a).abs() < T::lit(SINGULARITY_GUARD) {
            return Err(EnergyError::NearSingular { term: k, arg: to_f64(a) });
        }
        args[k] = a;
    }
    Ok((x, args))
}

/// Gradient `(∂V/∂α₁₂, ∂V/∂α₂₃, ∂V/∂α₃₁, ∂V/∂γ₁, ∂V/∂γ₂, ∂V/∂γ₃)`.
///
/// `-2 ∂V/∂α_ij` is the truncated hyperbolic length of edge `ij`.
pub fn tet_volume_grad<T: Real>(t: &TetAngles<T>) -> Result<[T; 6], EnergyError> {
    let (_, args) = checked_args(t)?;
    let quarter = T::lit(0.25);
    let mut g = [T::zero(); 6];
    for (term, arg) in terms().iter().zip(args) {
        let d = lob_deriv(arg)?;
        for (gk, c) in g.iter_mut().zip(term.coeff) {
            if c != 0 {
                *gk = *gk + quarter * T::lit(c as f64) * d;
            }
        }
    }
    Ok(g)
}

/// Hessian of `V` in the same coordinates, from `Л''(x) = -cot x`.
pub fn tet_volume_hess<T: Real>(t: &TetAngles<T>) -> Result<[[T; 6]; 6], EnergyError> {
    let (_, args) = checked_args(t)?;
    let eighth = T::lit(0.125);
    let mut h = [[T::zero(); 6]; 6];
    for (term, arg) in terms().iter().zip(args) {
        let d2 = lob_second_deriv(arg)?;
        for i in 0..6 {
            if term.coeff[i] == 0 {
                continue;
            }
            for j in 0..6 {
                if term.coeff[j] != 0 {
                    let c = T::lit((term.coeff[i] * term.coeff[j]) as f64);
                    h[i][j] = h[i][j] + eighth * c * d2;
                }
            }
        }
    }
    Ok(h)
}

/// Classifies a point of Δ̄ by how its five ideal tetrahedra degenerate.
pub fn classify<T: Real>(t: &TetAngles<T>) -> Result<Degeneracy, EnergyError> {
    t.require_closure()?;
    if t.in_open() {
        return Ok(Degeneracy::Interior);
    }
    let shapes = five_tetra(t)?.triples().map(|tr| tr.shape());
    Ok(if shapes.contains(&TripleShape::Mild) {
        Degeneracy::MildlyDegenerate
    } else if shapes.contains(&TripleShape::Bad) {
        Degeneracy::BadlyDegenerate
    } else {
        Degeneracy::AlphaDegenerate
    })
}

/// Birectangular tetrahedron with two ideal vertices: `½ Л(α)`, `α ∈ (0, π/2)`.
pub fn vol_p1<T: Real>(alpha: T) -> Result<T, EnergyError> {
    if !(alpha > T::zero() && alpha < T::FRAC_PI_2()) {
        return Err(EnergyError::Precondition("alpha must lie in (0, pi/2)"));
    }
    Ok(lob_unchecked(alpha) / T::lit(2.0))
}

fn hyperbolic_triangle_angles<T: Real>(a: T, b: T, c: T) -> Result<(), EnergyError> {
    if !(a > T::zero() && b > T::zero() && c > T::zero()) {
        return Err(EnergyError::Precondition("angles must be positive"));
    }
    if !(a + b + c < T::PI()) {
        return Err(EnergyError::Precondition("angle sum must be below pi"));
    }
    Ok(())
}

/// Ideal triangular prism with dihedral angles `α, β, γ` at the lateral edges.
pub fn vol_prism<T: Real>(alpha: T, beta: T, gamma: T) -> Result<T, EnergyError> {
    hyperbolic_triangle_angles(alpha, beta, gamma)?;
    let two = T::lit(2.0);
    let pi = T::PI();
    let l = lob_unchecked::<T>;
    Ok(l(alpha)
        + l(beta)
        + l(gamma)
        + l((pi + alpha - beta - gamma) / two)
        + l((pi - alpha + beta - gamma) / two)
        + l((pi - alpha - beta + gamma) / two)
        + l((pi - alpha - beta - gamma) / two))
}

/// Truncated volume of a tetrahedron with one hyperideal and three ideal vertices.
pub fn vol_p3<T: Real>(alpha: T, beta: T, gamma: T) -> Result<T, EnergyError> {
    Ok(vol_prism(alpha, beta, gamma)? / T::lit(2.0))
}

/// Truncated volume of the special pyramid with hyperideal base vertex.
///
/// `α` or `β` may exceed π/2 (self-intersecting base); the formula is signed.
pub fn vol_p4<T: Real>(alpha: T, beta: T, gamma: T) -> Result<T, EnergyError> {
    let pi = T::PI();
    if !(gamma > T::zero() && gamma < pi) {
        return Err(EnergyError::Precondition("gamma must lie in (0, pi)"));
    }
    if !(alpha > T::zero() && alpha < pi && beta > T::zero() && beta < pi) {
        return Err(EnergyError::Precondition("alpha and beta must lie in (0, pi)"));
    }
    if !(alpha + beta + gamma < pi) {
        return Err(EnergyError::Precondition("alpha + beta + gamma must be below pi"));
    }
    let two = T::lit(2.0);
    let l = lob_unchecked::<T>;
    Ok((l(gamma) + l((pi + alpha - beta - gamma) / two) + l((pi - alpha + beta - gamma) / two)
        - l((pi - alpha - beta + gamma) / two)
        + l((pi - alpha - beta - gamma) / two))
        / two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};

    fn tet(a: [f64; 3], g: [f64; 3]) -> TetAngles<f64> {
        TetAngles::new(a, g)
    }

    #[test]
    fn ideal_volumes() {
        let reg = v0(&IdealTriple::new(FRAC_PI_3, FRAC_PI_3, FRAC_PI_3)).unwrap();
        assert!((reg - 1.014_941_606_409_653_6).abs() < 1e-14);
        let cat = v0(&IdealTriple::new(PI / 2.0, FRAC_PI_4, FRAC_PI_4)).unwrap();
        assert!((cat - 0.915_965_594_177_219).abs() < 1e-14);
        for beta in [0.1, 1.0, 2.5] {
            assert!(v0(&IdealTriple::new(0.0, beta, PI - beta)).unwrap().abs() < 1e-15);
        }
        assert!(matches!(v0(&IdealTriple::new(1.0, 1.0, 1.0)), Err(EnergyError::NotIdeal(_))));
    }

    #[test]
    fn five_tetra_symmetric_point() {
        let a = 0.3;
        let f = five_tetra(&tet([a; 3], [FRAC_PI_3; 3])).unwrap();
        for v in f.primed.0.iter().chain(f.double_primed.0.iter()) {
            assert!((v - FRAC_PI_3).abs() < 1e-15);
        }
        for tr in f.vertex {
            assert!((tr.0[0] - FRAC_PI_3).abs() < 1e-15);
            assert!((tr.0[1] - (FRAC_PI_3 + a)).abs() < 1e-15);
            assert!((tr.0[2] - (FRAC_PI_3 - a)).abs() < 1e-15);
        }
    }

    #[test]
    fn five_tetra_zero_alpha() {
        let g = [0.5, 1.2, PI - 1.7];
        let f = five_tetra(&tet([0.0; 3], g)).unwrap();
        for i in 0..3 {
            let half = (PI - g[i]) / 2.0;
            assert!((f.primed.0[i] - half).abs() < 1e-15);
            assert!((f.double_primed.0[i] - half).abs() < 1e-15);
            assert!((f.vertex[i].0[1] - half).abs() < 1e-15);
            assert!((f.vertex[i].0[2] - half).abs() < 1e-15);
        }
    }

    #[test]
    fn badly_degenerate_point() {
        let t = tet([0.0, PI, 0.0], [PI, 0.0, 0.0]);
        let f = five_tetra(&t).unwrap();
        for tr in f.triples() {
            assert_eq!(tr.shape(), TripleShape::Bad);
            let mut s = tr.0;
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(s, [0.0, 0.0, PI]);
        }
        assert_eq!(tet_volume(&t).unwrap(), 0.0);
        assert_eq!(classify(&t).unwrap(), Degeneracy::BadlyDegenerate);
    }

    #[test]
    fn classifier_examples() {
        let alpha_deg = tet([0.0, 0.3, 0.3], [FRAC_PI_3; 3]);
        assert_eq!(classify(&alpha_deg).unwrap(), Degeneracy::AlphaDegenerate);
        let mild = tet([0.2; 3], [0.0, PI / 2.0, PI / 2.0]);
        assert_eq!(classify(&mild).unwrap(), Degeneracy::MildlyDegenerate);
        let f = five_tetra(&mild).unwrap();
        assert_eq!(f.vertex[0].0[0], 0.0);
        assert!(f.vertex[0].0[1] > 0.0 && f.vertex[0].0[1] < PI);
        assert_eq!(classify(&tet([0.3; 3], [FRAC_PI_3; 3])).unwrap(), Degeneracy::Interior);
        assert!(classify(&tet([0.3; 3], [1.0; 3])).is_err());
    }

    #[test]
    fn symmetric_volume_matches_decomposition() {
        let t = tet([FRAC_PI_4; 3], [FRAC_PI_3; 3]);
        let reg = v0(&IdealTriple::new(FRAC_PI_3, FRAC_PI_3, FRAC_PI_3)).unwrap();
        let side = v0(&IdealTriple::new(FRAC_PI_3, FRAC_PI_3 + FRAC_PI_4, FRAC_PI_3 - FRAC_PI_4)).unwrap();
        assert!((tet_volume(&t).unwrap() - 0.5 * (2.0 * reg + 3.0 * side)).abs() < 1e-13);
    }

    #[test]
    fn gradient_is_symmetric_and_alpha_even() {
        let g = tet_volume_grad(&tet([0.4; 3], [FRAC_PI_3; 3])).unwrap();
        assert!((g[3] - g[4]).abs() < 1e-14 && (g[4] - g[5]).abs() < 1e-14);
        let g = tet_volume_grad(&tet([1e-9, 0.4, 0.5], [1.0, 1.1, PI - 2.1])).unwrap();
        assert!(g[0].abs() < 1e-8);
    }

    #[test]
    fn gradient_rejects_singular_arguments() {
        // γ₁ = 0 puts Л(γ₁) at its singularity.
        let t = tet([0.2; 3], [0.0, PI / 2.0, PI / 2.0]);
        assert!(matches!(tet_volume_grad(&t), Err(EnergyError::NearSingular { .. })));
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let t = tet([0.3, 0.5, 0.2], [0.9, 1.3, PI - 2.2]);
        let h = tet_volume_hess(&t).unwrap();
        let x = t.to_array();
        let step = 1e-6;
        for j in 0..6 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += step;
            xm[j] -= step;
            // Leaves Δ's affine hull; the formula is still smooth there.
            let gp = grad_raw(&xp);
            let gm = grad_raw(&xm);
            for i in 0..6 {
                let fd = (gp[i] - gm[i]) / (2.0 * step);
                assert!((fd - h[i][j]).abs() < 1e-6, "H[{i}][{j}] {fd} vs {}", h[i][j]);
            }
        }
    }

    fn grad_raw(x: &[f64; 6]) -> [f64; 6] {
        let mut g = [0.0; 6];
        for term in terms() {
            let d = lob_deriv(term.arg(x)).unwrap();
            for k in 0..6 {
                g[k] += 0.25 * term.coeff[k] as f64 * d;
            }
        }
        g
    }

    #[test]
    fn small_volume_formulas() {
        assert!((vol_p1(FRAC_PI_6).unwrap() - 0.253_735_401_602_413_4).abs() < 1e-15);
        assert!((vol_p1(FRAC_PI_4).unwrap() - 0.228_991_398_544_304_75).abs() < 1e-15);
        assert!(vol_p1(1e-12_f64).unwrap().abs() < 1e-10);
        assert!(vol_p1(2.0).is_err());
        let p = vol_prism(0.3, 0.5, 0.7).unwrap();
        for (a, b, c) in [(0.3_f64, 0.7, 0.5), (0.5, 0.3, 0.7), (0.5, 0.7, 0.3), (0.7, 0.3, 0.5), (0.7, 0.5, 0.3)] {
            assert!((vol_prism(a, b, c).unwrap() - p).abs() < 1e-15);
        }
        assert_eq!(vol_p3(0.3, 0.5, 0.7).unwrap(), p / 2.0);
        assert!((vol_p4(0.3_f64, 1.7, 0.6).unwrap() - vol_p4(1.7, 0.3, 0.6).unwrap()).abs() < 1e-15);
        assert!(vol_prism(1.0, 1.0, 1.2).is_err());
        assert!(vol_p4(0.3, 0.3, 0.0).is_err());
    }
}
