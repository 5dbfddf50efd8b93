//! The linearized deformation operator on the flat model plane Π = ℝ⁴×0:
//! polynomial and pole-weighted normal fields, exact kernel dimensions,
//! critical-rate scans, the principal symbol, the special-Lagrangian
//! correspondence and the quadric-cone verification.
//!
//! The operator is `Dv = Σᵢ eᵢ × ∂ᵢ v`, mapping normal fields (components
//! along e₅..e₈) to sections of E_Π, expanded in the fixed orthonormal
//! basis `êⱼ = 2·(e₁ × e₄₊ⱼ)`.

use crate::forms::VecN;
use crate::linalg::Mat;
use crate::planes::FourPlane;
use crate::scalar::{Rat, Scalar};
use crate::spin7::{self, cross, CayleyStructure, CAYLEY_TOLERANCE};
use crate::{Error, Result};
use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Monomial exponents in (x₁, x₂, x₃, x₄).
pub type Mono = [u8; 4];

fn mono_degree(m: &Mono) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

/// All monomials of the given total degree, lexicographically ordered.
pub fn monomials(degree: usize) -> Vec<Mono> {
    let mut out = Vec::new();
    for a in 0..=degree {
        for b in 0..=(degree - a) {
            for c in 0..=(degree - a - b) {
                let d = degree - a - b - c;
                out.push([a as u8, b as u8, c as u8, d as u8]);
            }
        }
    }
    out
}

/// A polynomial map ℝ⁴ → ℝ⁴ divided by an even power of |x|:
/// `v = P(x) / |x|^{2m}`. Component index 0..3 refers to the four target
/// directions (normal directions e₅..e₈ for domain fields, the orthonormal
/// E-basis for codomain fields).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField<S> {
    coeffs: BTreeMap<(Mono, u8), S>,
    pole_power: u32,
}

/// Codomain fields of the deformation operator, expanded in `êⱼ`.
pub type EField<S> = PolyField<S>;

impl<S: Scalar> PolyField<S> {
    pub fn zero() -> Self {
        PolyField {
            coeffs: BTreeMap::new(),
            pole_power: 0,
        }
    }

    pub fn with_pole(pole_power: u32) -> Self {
        PolyField {
            coeffs: BTreeMap::new(),
            pole_power,
        }
    }

    /// Constant field in the given component (0..3).
    pub fn constant(component: u8, value: S) -> Self {
        let mut f = Self::zero();
        f.set([0, 0, 0, 0], component, value);
        f
    }

    pub fn set(&mut self, mono: Mono, component: u8, value: S) {
        assert!(component < 4, "component index out of range");
        if value.is_zero() {
            self.coeffs.remove(&(mono, component));
        } else {
            self.coeffs.insert((mono, component), value);
        }
    }

    pub fn coeff(&self, mono: Mono, component: u8) -> S {
        self.coeffs
            .get(&(mono, component))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn pole_power(&self) -> u32 {
        self.pole_power
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Mono, u8), &S)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Homogeneity `deg(P) − 2m` when every monomial has the same degree.
    pub fn homogeneity(&self) -> Option<i64> {
        let mut degs = self.coeffs.keys().map(|(m, _)| mono_degree(m));
        let first = degs.next()?;
        if degs.all(|d| d == first) {
            Some(first as i64 - 2 * self.pole_power as i64)
        } else {
            None
        }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|(m, _)| mono_degree(m))
            .max()
            .unwrap_or(0)
    }

    fn add_assign(&mut self, mono: Mono, component: u8, value: S) {
        let cur = self.coeff(mono, component);
        self.set(mono, component, cur + value);
    }
}

impl PolyField<f64> {
    /// Evaluate at a point of ℝ⁴, returning the four components.
    pub fn evaluate(&self, x: &[f64; 4]) -> [f64; 4] {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let weight = 1.0 / r2.powi(self.pole_power as i32);
        let mut out = [0.0; 4];
        for ((m, c), v) in &self.coeffs {
            let mut term = *v;
            for (xi, &e) in x.iter().zip(m.iter()) {
                term *= xi.powi(e as i32);
            }
            out[*c as usize] += term * weight;
        }
        out
    }
}

/// Coefficient of `ê_a` in `2·(e_i × e_{4+b})`: the Clifford matrices of
/// the flat model, derived from the cross product once and cached.
pub fn clifford_matrices() -> &'static [[[i64; 4]; 4]; 4] {
    use std::sync::OnceLock;
    static CACHE: OnceLock<[[[i64; 4]; 4]; 4]> = OnceLock::new();
    CACHE.get_or_init(|| {
        let structure = CayleyStructure::<Rat>::standard();
        let ehat: Vec<_> = (1..=4)
            .map(|j| {
                cross(
                    &VecN::<Rat>::basis(8, 1),
                    &VecN::basis(8, 4 + j),
                    &structure,
                )
                .unwrap()
                .scale(&Rat::from_int(2))
            })
            .collect();
        let mut out = [[[0i64; 4]; 4]; 4];
        for i in 0..4 {
            for b in 0..4 {
                let w = cross(
                    &VecN::<Rat>::basis(8, i + 1),
                    &VecN::basis(8, 5 + b),
                    &structure,
                )
                .unwrap()
                .scale(&Rat::from_int(2));
                for (a, h) in ehat.iter().enumerate() {
                    let c = w.inner(h).unwrap().to_f64();
                    let r = c.round();
                    assert!((c - r).abs() < 1e-12);
                    out[i][a][b] = r as i64;
                }
            }
        }
        out
    })
}

/// Apply the deformation operator `Dv = Σᵢ eᵢ × ∂ᵢ v`. Polynomial fields
/// lose one degree; pole fields gain one pole power by clearing |x|²:
/// `D(P/|x|^{2m}) = [Σᵢ (|x|² ∂ᵢP − 2m xᵢ P) ⊗ cᵢ] / |x|^{2m+2}`.
pub fn dirac_apply<S: Scalar>(v: &PolyField<S>) -> EField<S> {
    let cliff = clifford_matrices();
    let half = S::one() / S::from_int(2); // cached matrices are 2x the cross
    let m = v.pole_power;
    if m == 0 {
        let mut out = EField::zero();
        for ((mono, c), coeff) in v.terms() {
            for i in 0..4 {
                if mono[i] == 0 {
                    continue;
                }
                let mut dm = *mono;
                dm[i] -= 1;
                let dcoeff = coeff.clone() * S::from_int(mono[i] as i64) * half.clone();
                for a in 0..4 {
                    let w = cliff[i][a][*c as usize];
                    if w != 0 {
                        out.add_assign(dm, a as u8, dcoeff.clone() * S::from_int(w));
                    }
                }
            }
        }
        out
    } else {
        let mut out = EField::with_pole(m + 1);
        for ((mono, c), coeff) in v.terms() {
            for i in 0..4 {
                // |x|^2 dP/dx_i
                if mono[i] > 0 {
                    for k in 0..4 {
                        let mut dm = *mono;
                        dm[i] -= 1;
                        dm[k] += 2;
                        let dcoeff = coeff.clone() * S::from_int(mono[i] as i64) * half.clone();
                        for a in 0..4 {
                            let w = cliff[i][a][*c as usize];
                            if w != 0 {
                                out.add_assign(dm, a as u8, dcoeff.clone() * S::from_int(w));
                            }
                        }
                    }
                }
                // -2m x_i P
                let mut dm = *mono;
                dm[i] += 1;
                let dcoeff = coeff.clone() * S::from_int(-2 * m as i64) * half.clone();
                for a in 0..4 {
                    let w = cliff[i][a][*c as usize];
                    if w != 0 {
                        out.add_assign(dm, a as u8, dcoeff.clone() * S::from_int(w));
                    }
                }
            }
        }
        out
    }
}

/// Matrix of the |x|²-cleared operator on homogeneous fields
/// `P/|x|^s` with deg P = `degree`: numerator `Σᵢ(|x|²∂ᵢP − s·xᵢP) ⊗ cᵢ`.
/// Its nullity equals the kernel dimension of the operator on that family
/// (multiplication by |x|² is injective on polynomials).
fn numerator_matrix(degree: usize, s: i64) -> Mat<Rat> {
    numerator_matrix_with(degree, s, false)
}

/// As [`numerator_matrix`], optionally for the formal adjoint system
/// (transposed Clifford matrices, mapping E-valued fields to normal fields).
fn numerator_matrix_with(degree: usize, s: i64, adjoint: bool) -> Mat<Rat> {
    let base = clifford_matrices();
    let mut cliff = *base;
    if adjoint {
        for i in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    cliff[i][a][b] = base[i][b][a];
                }
            }
        }
    }
    let cliff = &cliff;
    let cols: Vec<(Mono, u8)> = monomials(degree)
        .into_iter()
        .flat_map(|m| (0..4u8).map(move |c| (m, c)))
        .collect();
    let out_monos = monomials(degree + 1);
    let row_index: BTreeMap<(Mono, u8), usize> = out_monos
        .iter()
        .flat_map(|m| (0..4u8).map(move |a| (*m, a)))
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    let mut mat: Mat<Rat> = Mat::zeros(row_index.len(), cols.len());
    for (col, (mono, c)) in cols.iter().enumerate() {
        for i in 0..4 {
            if mono[i] > 0 {
                for k in 0..4 {
                    let mut dm = *mono;
                    dm[i] -= 1;
                    dm[k] += 2;
                    let coeff = Rat::from_int(mono[i] as i64);
                    for a in 0..4u8 {
                        let w = cliff[i][a as usize][*c as usize];
                        if w != 0 {
                            let row = row_index[&(dm, a)];
                            let cur = mat.get(row, col).clone();
                            mat.set(row, col, cur + coeff.clone() * Rat::from_int(w));
                        }
                    }
                }
            }
            if s != 0 {
                let mut dm = *mono;
                dm[i] += 1;
                let coeff = Rat::from_int(-s);
                for a in 0..4u8 {
                    let w = cliff[i][a as usize][*c as usize];
                    if w != 0 {
                        let row = row_index[&(dm, a)];
                        let cur = mat.get(row, col).clone();
                        mat.set(row, col, cur + coeff.clone() * Rat::from_int(w));
                    }
                }
            }
        }
    }
    mat
}

/// Exact dimension of the kernel of the operator on homogeneous degree-`d`
/// polynomial fields (rate d solutions).
pub fn homogeneous_kernel_dim(d: usize) -> usize {
    numerator_matrix(d, 0).nullity()
}

/// Kernel dimension of the formal adjoint on degree-`d` E-valued polynomial
/// fields; feeds the cokernel side of index bookkeeping.
pub fn adjoint_homogeneous_kernel_dim(d: usize) -> usize {
    numerator_matrix_with(d, 0, true).nullity()
}

/// Exact kernel basis on degree-`d` polynomial fields.
pub fn homogeneous_kernel_basis(d: usize) -> Vec<PolyField<Rat>> {
    let cols: Vec<(Mono, u8)> = monomials(d)
        .into_iter()
        .flat_map(|m| (0..4u8).map(move |c| (m, c)))
        .collect();
    numerator_matrix(d, 0)
        .nullspace()
        .into_iter()
        .map(|v| {
            let mut f = PolyField::zero();
            for (val, (mono, c)) in v.into_iter().zip(cols.iter()) {
                if !val.is_zero() {
                    f.set(*mono, *c, val);
                }
            }
            f
        })
        .collect()
}

/// Kernel dimension in the pole ansatz, with its stabilization history.
#[derive(Clone, Debug, Serialize)]
pub struct InvertedKernel {
    pub dim: usize,
    /// Numerator degree at which the dimension first repeated.
    pub stabilized_at_degree: usize,
    /// (numerator degree, kernel dimension) for each admissible pole power.
    pub history: Vec<(usize, usize)>,
}

/// Dimension of homogeneity-`lambda` solutions in the family
/// `P(x)/|x|^{2m}` with `deg P = lambda + 2m ≤ deg_max`, stabilized over
/// increasing pole power.
pub fn inverted_kernel_dim(lambda: i64, deg_max: usize) -> Result<InvertedKernel> {
    if lambda >= 0 {
        return Err(Error::invalid(
            "inverted ansatz applies to negative homogeneities",
        ));
    }
    let mut history = Vec::new();
    let mut m = 1i64;
    while lambda + 2 * m <= deg_max as i64 {
        let deg = lambda + 2 * m;
        if deg >= 0 {
            let dim = numerator_matrix(deg as usize, 2 * m).nullity();
            history.push((deg as usize, dim));
        }
        m += 1;
    }
    if history.is_empty() {
        return Err(Error::invalid(format!(
            "homogeneity {lambda} is not realizable as deg(P) - 2m with deg(P) <= {deg_max}"
        )));
    }
    let dim = history.last().unwrap().1;
    let stabilized_at = history
        .windows(2)
        .find(|w| w[0].1 == w[1].1)
        .map(|w| w[1].0)
        .unwrap_or(history.last().unwrap().0);
    if history.len() >= 2 && history[history.len() - 2].1 != dim {
        return Err(Error::NonConvergence(format!(
            "kernel dimension at homogeneity {lambda} has not stabilized by degree {deg_max}: {history:?}"
        )));
    }
    Ok(InvertedKernel {
        dim,
        stabilized_at_degree: stabilized_at,
        history,
    })
}

/// One critical rate with its multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub rate: f64,
    pub multiplicity: usize,
}

/// Ordered list of critical rates inside a scan window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSpectrum {
    pub entries: Vec<RateEntry>,
    pub window: (f64, f64),
}

impl RateSpectrum {
    /// Validated constructor: rates strictly increasing, multiplicities ≥ 1,
    /// all inside the window.
    pub fn new(entries: Vec<RateEntry>, window: (f64, f64)) -> Result<Self> {
        if window.0 >= window.1 {
            return Err(Error::invalid("empty scan window"));
        }
        for w in entries.windows(2) {
            if w[0].rate >= w[1].rate {
                return Err(Error::invalid("rates must be strictly increasing"));
            }
        }
        for e in &entries {
            if e.multiplicity == 0 {
                return Err(Error::invalid("multiplicities must be at least 1"));
            }
            if e.rate <= window.0 || e.rate >= window.1 {
                return Err(Error::invalid(format!(
                    "rate {} outside the window ({}, {})",
                    e.rate, window.0, window.1
                )));
            }
        }
        Ok(RateSpectrum { entries, window })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let s: RateSpectrum = serde_json::from_value(v.clone())
            .map_err(|e| Error::invalid(format!("bad spectrum JSON: {e}")))?;
        RateSpectrum::new(s.entries, s.window)
    }
}

/// Enumerate critical rates of the flat-plane operator inside the window by
/// exact rank computations over integer homogeneity candidates. The window
/// must sit inside (−4, 2), the validated range of the two ansatz families.
pub fn critical_rate_scan(window: (f64, f64), deg_max: usize) -> Result<RateSpectrum> {
    if window.0 >= window.1 {
        return Err(Error::invalid("scan window is inverted or empty"));
    }
    if window.0 < -4.0 || window.1 > 2.0 {
        return Err(Error::invalid(
            "scan window must lie inside (-4, 2) for the flat-plane families",
        ));
    }
    let lo = window.0.floor() as i64;
    let hi = window.1.ceil() as i64;
    let mut entries = Vec::new();
    for lambda in lo..=hi {
        let r = lambda as f64;
        if r <= window.0 || r >= window.1 {
            continue;
        }
        let mult = if lambda >= 0 {
            homogeneous_kernel_dim(lambda as usize)
        } else {
            inverted_kernel_dim(lambda, deg_max)?.dim
        };
        if mult > 0 {
            entries.push(RateEntry {
                rate: r,
                multiplicity: mult,
            });
        }
    }
    RateSpectrum::new(entries, window)
}

/// Principal symbol at a Cayley plane: the matrix of `v ↦ π_E(ξ♯ × v)` in
/// the orthonormal fiber basis over the plane's normal frame. Invertible
/// for ξ ≠ 0 with |det| = |ξ|⁴/16.
pub fn symbol_matrix(
    xi: &[f64; 4],
    plane: &FourPlane,
    structure: &CayleyStructure<f64>,
) -> Result<Matrix4<f64>> {
    let tau = crate::planes::tau_norm(plane, structure);
    if tau > CAYLEY_TOLERANCE {
        return Err(Error::NotCayley {
            tau_norm: tau,
            tolerance: CAYLEY_TOLERANCE,
        });
    }
    let frame = plane.frame();
    let normals = plane.orthonormal_normals();
    let fiber = spin7::e_fiber(frame, &normals, structure)?;
    let mut sharp = VecN::zero(8);
    for (i, c) in xi.iter().enumerate() {
        sharp = sharp.add(&frame[i].scale(c));
    }
    let mut m = Matrix4::zeros();
    for (b, n) in normals.iter().enumerate() {
        let image = cross(&sharp, n, structure)?;
        for (a, h) in fiber.iter().enumerate() {
            m[(a, b)] = image.inner(h)?;
        }
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Special-Lagrangian correspondence
// ---------------------------------------------------------------------------

/// A polynomial 1-form on ℝ⁴: component c (0..3) holds the dx_{c+1}
/// coefficient polynomial.
pub type Poly1Form = PolyField<f64>;

/// Target of the identified operator: a volume-form coefficient polynomial
/// and three anti-self-dual coefficients on α₁₂, α₁₃, α₁₄
/// (α₁ₘ = dx₁ₘ − dx_{kl}, (1,m,k,l) positively oriented).
#[derive(Clone, Debug, PartialEq)]
pub struct SlTarget {
    pub volume: BTreeMap<Mono, f64>,
    pub asd: [BTreeMap<Mono, f64>; 3],
}

fn poly_derivative(p: &BTreeMap<Mono, f64>, i: usize) -> BTreeMap<Mono, f64> {
    let mut out = BTreeMap::new();
    for (m, v) in p {
        if m[i] > 0 {
            let mut dm = *m;
            dm[i] -= 1;
            *out.entry(dm).or_insert(0.0) += v * m[i] as f64;
        }
    }
    out.retain(|_, v| *v != 0.0);
    out
}

/// The normal field `m(η) = J η♯` of a polynomial 1-form: under the block
/// complex structure J e_c = e_{4+c}, the dx_c coefficient becomes the
/// e_{4+c} component unchanged.
pub fn sl_field_of_one_form(eta: &Poly1Form) -> PolyField<f64> {
    eta.clone()
}

/// The identification `n`: E-fields to (Ω⁴, Ω²⁻) data. In the orthonormal
/// fiber basis: `n(ê₁) = 2·dvol`, `n(ê₁₊ₘ) = α₁,₁₊ₘ`.
pub fn sl_identify(e: &EField<f64>) -> SlTarget {
    assert_eq!(e.pole_power(), 0, "polynomial fields only");
    let mut volume = BTreeMap::new();
    let mut asd: [BTreeMap<Mono, f64>; 3] = [BTreeMap::new(), BTreeMap::new(), BTreeMap::new()];
    for ((mono, c), v) in e.terms() {
        if *c == 0 {
            *volume.entry(*mono).or_insert(0.0) += 2.0 * v;
        } else {
            *asd[*c as usize - 1].entry(*mono).or_insert(0.0) += v;
        }
    }
    volume.retain(|_, v| *v != 0.0);
    for a in asd.iter_mut() {
        a.retain(|_, v| *v != 0.0);
    }
    SlTarget { volume, asd }
}

/// Right-hand side `d⋆η ⊕ π⁻dη` of the correspondence, computed symbolically
/// on polynomial coefficients.
pub fn sl_reference(eta: &Poly1Form) -> SlTarget {
    assert_eq!(eta.pole_power(), 0, "polynomial 1-forms only");
    // components a_c as polynomials
    let mut a: [BTreeMap<Mono, f64>; 4] = Default::default();
    for ((mono, c), v) in eta.terms() {
        a[*c as usize].insert(*mono, *v);
    }
    // d * eta = (sum_c da_c/dx_c) dvol
    let mut volume = BTreeMap::new();
    for c in 0..4 {
        for (m, v) in poly_derivative(&a[c], c) {
            *volume.entry(m).or_insert(0.0) += v;
        }
    }
    volume.retain(|_, v| *v != 0.0);
    // d eta = sum_{i<j} (da_j/dx_i - da_i/dx_j) dx_ij; project onto the
    // anti-self-dual alpha basis: coeff on alpha_1m = (c_{1m} - c_{kl}) / 2
    let mut curl: BTreeMap<(usize, usize), BTreeMap<Mono, f64>> = BTreeMap::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut entry = poly_derivative(&a[j], i);
            for (m, v) in poly_derivative(&a[i], j) {
                *entry.entry(m).or_insert(0.0) -= v;
            }
            entry.retain(|_, v| *v != 0.0);
            curl.insert((i, j), entry);
        }
    }
    // complements: (1,2)~(3,4), (1,3)~(4,2), (1,4)~(2,3) in 1-based labels
    let pairs = [
        ((0, 1), (2, 3), 1.0),
        ((0, 2), (1, 3), -1.0),
        ((0, 3), (1, 2), 1.0),
    ];
    let mut asd: [BTreeMap<Mono, f64>; 3] = Default::default();
    for (slot, ((i, j), (k, l), sign)) in pairs.into_iter().enumerate() {
        let mut acc = curl.get(&(i, j)).cloned().unwrap_or_default();
        if let Some(other) = curl.get(&(k, l)) {
            for (m, v) in other {
                *acc.entry(*m).or_insert(0.0) -= sign * v;
            }
        }
        for v in acc.values_mut() {
            *v *= 0.5;
        }
        acc.retain(|_, v| *v != 0.0);
        asd[slot] = acc;
    }
    SlTarget { volume, asd }
}

/// Sup-norm over monomial coefficients of `n(D(m(η))) − (d⋆η ⊕ π⁻dη)`.
pub fn sl_correspondence_residual(eta: &Poly1Form) -> f64 {
    let lhs = sl_identify(&dirac_apply(&sl_field_of_one_form(eta)));
    let rhs = sl_reference(eta);
    let mut worst: f64 = 0.0;
    let keys: std::collections::BTreeSet<Mono> = lhs
        .volume
        .keys()
        .chain(rhs.volume.keys())
        .copied()
        .collect();
    for k in keys {
        worst = worst.max(
            (lhs.volume.get(&k).copied().unwrap_or(0.0)
                - rhs.volume.get(&k).copied().unwrap_or(0.0))
            .abs(),
        );
    }
    for slot in 0..3 {
        let keys: std::collections::BTreeSet<Mono> = lhs.asd[slot]
            .keys()
            .chain(rhs.asd[slot].keys())
            .copied()
            .collect();
        for k in keys {
            worst = worst.max(
                (lhs.asd[slot].get(&k).copied().unwrap_or(0.0)
                    - rhs.asd[slot].get(&k).copied().unwrap_or(0.0))
                .abs(),
            );
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Quadric verification: the complex surface x² + y² + z² = ε, u = 0
// ---------------------------------------------------------------------------

/// Map ℂ⁴ to ℝ⁸ with the block identification z_j = x_j + i·x_{4+j}.
fn c4_to_r8(z: &[Complex64; 4]) -> VecN<f64> {
    VecN::from_f64(&[
        z[0].re, z[1].re, z[2].re, z[3].re, z[0].im, z[1].im, z[2].im, z[3].im,
    ])
}

fn quadric_value(p: &[Complex64; 3]) -> Complex64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

/// A point of the cone {x²+y²+z² = 0} from the rational parametrization
/// (a² − b², i(a² + b²), 2ab); avoids root solving.
fn cone_point(a: Complex64, b: Complex64) -> [Complex64; 3] {
    [
        a * a - b * b,
        Complex64::i() * (a * a + b * b),
        (a * b) * 2.0,
    ]
}

fn herm_norm_sq(p: &[Complex64; 3]) -> f64 {
    p.iter().map(|z| z.norm_sqr()).sum()
}

/// The normal-section point of the smoothed surface over a cone point:
/// `p + ε p̄ / (2|p|²)`; lands exactly on {x²+y²+z² = ε}.
pub fn quadric_section(p: &[Complex64; 3], epsilon: Complex64) -> [Complex64; 3] {
    let n2 = herm_norm_sq(p);
    [
        p[0] + epsilon * p[0].conj() / (2.0 * n2),
        p[1] + epsilon * p[1].conj() / (2.0 * n2),
        p[2] + epsilon * p[2].conj() / (2.0 * n2),
    ]
}

/// Oriented tangent plane of the surface {x²+y²+z² = ε, u = 0} at a point:
/// a complex orthonormal basis {v, w} of ker(z·) completed to the real frame
/// (v, Jv, w, Jw).
pub fn quadric_tangent_plane(point3: &[Complex64; 3]) -> Result<FourPlane> {
    let g = [point3[0], point3[1], point3[2]];
    let gn = herm_norm_sq(&g);
    if gn < 1e-12 {
        return Err(Error::invalid("tangent plane at the cone vertex"));
    }
    // two hermitian-orthonormal solutions of sum g_i v_i = 0
    let mut basis: Vec<[Complex64; 3]> = Vec::new();
    for k in 0..3 {
        let mut cand = [Complex64::new(0.0, 0.0); 3];
        cand[k] = Complex64::new(1.0, 0.0);
        // remove the component violating the linear condition:
        // <v, conj(g)> = sum g_i v_i
        let viol: Complex64 = (0..3).map(|i| g[i] * cand[i]).sum();
        let mut v = cand;
        for i in 0..3 {
            v[i] -= g[i].conj() * viol / gn;
        }
        for prev in &basis {
            let inner: Complex64 = (0..3).map(|i| prev[i].conj() * v[i]).sum();
            for i in 0..3 {
                v[i] -= prev[i] * inner;
            }
        }
        let n = herm_norm_sq(&v).sqrt();
        if n > 1e-8 {
            for c in v.iter_mut() {
                *c /= n;
            }
            basis.push(v);
        }
        if basis.len() == 2 {
            break;
        }
    }
    if basis.len() != 2 {
        return Err(Error::NonConvergence(
            "failed to build a tangent basis".into(),
        ));
    }
    let embed = |v: &[Complex64; 3], rot: Complex64| -> VecN<f64> {
        c4_to_r8(&[v[0] * rot, v[1] * rot, v[2] * rot, Complex64::new(0.0, 0.0)])
    };
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();
    Ok(FourPlane::from_orthonormal_frame([
        embed(&basis[0], one),
        embed(&basis[0], i),
        embed(&basis[1], one),
        embed(&basis[1], i),
    ]))
}

/// Report of the smoothed-quadric verification.
#[derive(Clone, Debug, Serialize)]
pub struct QuadricReport {
    pub samples: usize,
    pub max_tau_norm: f64,
    pub min_calibration: f64,
    pub max_section_defect: f64,
}

/// Sample the surface {x²+y²+z² = ε, u = 0} through the cone
/// parametrization and evaluate τ and calibration on its tangent planes.
pub fn verify_complex_surface_cayley(
    epsilon: Complex64,
    n_samples: usize,
    seed: u64,
    structure: &CayleyStructure<f64>,
) -> Result<QuadricReport> {
    if epsilon.norm() == 0.0 {
        return Err(Error::invalid(
            "the singular fiber has no smooth tangent planes at the vertex",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_tau: f64 = 0.0;
    let mut min_cal = f64::INFINITY;
    let mut max_defect: f64 = 0.0;
    let mut produced = 0;
    while produced < n_samples {
        let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = cone_point(a, b);
        if herm_norm_sq(&p) < 0.05 {
            continue;
        }
        let q = quadric_section(&p, epsilon);
        max_defect = max_defect.max((quadric_value(&q) - epsilon).norm());
        let plane = quadric_tangent_plane(&q)?;
        max_tau = max_tau.max(crate::planes::tau_norm(&plane, structure));
        min_cal = min_cal.min(crate::planes::calibration(&plane, structure));
        produced += 1;
    }
    Ok(QuadricReport {
        samples: produced,
        max_tau_norm: max_tau,
        min_calibration: min_cal,
        max_section_defect: max_defect,
    })
}

/// Least-squares decay fit of the smoothed surface against its cone.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub radii: Vec<f64>,
    pub mean_distances: Vec<f64>,
}

/// Fit the decay exponent of dist(A_ε, cone) against the radius: samples
/// cone points at each radius, measures the normal-section displacement and
/// fits log-distance against log-radius.
pub fn decay_rate_fit(
    epsilon: Complex64,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
) -> Result<DecayFit> {
    if epsilon.norm() == 0.0 {
        return Err(Error::invalid("decay fit requires a nonzero smoothing"));
    }
    if radii.len() < 2 || radii.iter().any(|r| *r <= 0.0) {
        return Err(Error::invalid("need at least two positive radii"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean_distances = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut acc = 0.0;
        let mut count = 0;
        while count < samples_per_radius {
            let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let mut p = cone_point(a, b);
            let n = herm_norm_sq(&p).sqrt();
            if n < 0.1 {
                continue;
            }
            for c in p.iter_mut() {
                *c *= r / n;
            }
            let q = quadric_section(&p, epsilon);
            let dist = (0..3).map(|i| (q[i] - p[i]).norm_sqr()).sum::<f64>().sqrt();
            acc += dist;
            count += 1;
        }
        mean_distances.push(acc / samples_per_radius as f64);
    }
    // least-squares slope of log(dist) vs log(r)
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = mean_distances.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("degenerate radii list"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(DecayFit {
        slope: sxy / sxx,
        radii: radii.to_vec(),
        mean_distances,
    })
}
