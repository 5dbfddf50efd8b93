//! The Spin(7) structure on ℝ⁸: Cayley form, two-form splitting,
//! cross/triple/quadruple products, E-fibers, Clifford multiplication,
//! the Sp(1)³ stabilizer action and the spin(7) Lie algebra.
//!
//! Conventions, fixed once and validated by the test suite:
//!
//! * iterated contraction fills slots left to right, so the triple product
//!   is `(u × v × w)♭ = Φ(u, v, w, ·)` and `triple(e₁,e₂,e₃) = e₄`;
//! * `π₇(ω) = ¼(ω + ⋆(Φ∧ω))` is the spectral projector onto the +3
//!   eigenspace of `ω ↦ ⋆(Φ∧ω)` (idempotence forces this sign), and the
//!   cross product is `u × v = π₇(u♭∧v♭) = ¼(u♭∧v♭ + Φ(u,v,·,·))`;
//! * the quadruple product is the full antisymmetrization
//!   `τ(u₁,…,u₄) = Σᵢ (−1)^{i−1} uᵢ × triple(rest)`, normalized so that
//!   `‖τ‖` on an orthonormal frame equals `2·sqrt(1 − calibration²)`.

use crate::forms::{contract2, musical_flat, musical_sharp, KForm, MultiIndex, VecN};
use crate::linalg::Mat;
use crate::scalar::{Rat, Scalar};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Terms of the standard Cayley form: (sign, indices).
pub const CAYLEY_FORM_TERMS: [(i8, [u8; 4]); 14] = [
    (1, [1, 2, 3, 4]),
    (-1, [1, 2, 5, 6]),
    (-1, [1, 2, 7, 8]),
    (-1, [1, 3, 5, 7]),
    (1, [1, 3, 6, 8]),
    (-1, [1, 4, 5, 8]),
    (-1, [1, 4, 6, 7]),
    (-1, [2, 3, 5, 8]),
    (-1, [2, 3, 6, 7]),
    (1, [2, 4, 5, 7]),
    (-1, [2, 4, 6, 8]),
    (-1, [3, 4, 5, 6]),
    (-1, [3, 4, 7, 8]),
    (1, [5, 6, 7, 8]),
];

/// The standard Cayley form Φ₀ on ℝ⁸ (14 signed unit terms, self-dual).
pub fn standard_cayley_form<S: Scalar>() -> KForm<S> {
    let mut phi = KForm::zero(8, 4);
    for (sign, idx) in CAYLEY_FORM_TERMS {
        phi.add_term(&idx, S::from_int(sign as i64))
            .expect("static table");
    }
    phi
}

/// How a Cayley structure was obtained; only constructions that are
/// pointwise equivalent to the standard form are allowed.
#[derive(Clone, Debug)]
pub enum Provenance {
    Standard,
    /// Pullback of the standard form by an explicit orthogonal matrix.
    PulledBack,
}

/// A Cayley form on ℝ⁸ together with its provenance.
#[derive(Clone, Debug)]
pub struct CayleyStructure<S> {
    phi: KForm<S>,
    provenance: Provenance,
}

impl<S: Scalar> CayleyStructure<S> {
    pub fn standard() -> Self {
        CayleyStructure {
            phi: standard_cayley_form(),
            provenance: Provenance::Standard,
        }
    }

    /// Pullback of Φ₀ by an orthogonal 8×8 matrix (rows of `m`).
    pub fn pulled_back(m: &[Vec<S>]) -> Result<Self> {
        if m.len() != 8 || m.iter().any(|r| r.len() != 8) {
            return Err(Error::invalid("expected an 8x8 matrix"));
        }
        // orthogonality: M^T M = I within 1e-10 (exact for rationals)
        for i in 0..8 {
            for j in 0..8 {
                let mut acc = S::zero();
                for k in 0..8 {
                    acc = acc + m[k][i].clone() * m[k][j].clone();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (acc.to_f64() - expect).abs() > 1e-10 {
                    return Err(Error::invalid("pullback matrix is not orthogonal"));
                }
            }
        }
        let phi = standard_cayley_form::<S>().pullback(m)?;
        Ok(CayleyStructure {
            phi,
            provenance: Provenance::PulledBack,
        })
    }

    pub fn phi(&self) -> &KForm<S> {
        &self.phi
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

/// Orthogonal splitting of a 2-form into its Λ²₇ and Λ²₂₁ parts.
#[derive(Clone, Debug)]
pub struct TwoFormSplit<S> {
    pub omega7: KForm<S>,
    pub omega21: KForm<S>,
}

/// Projection onto Λ²₇: ¼(ω + ⋆(Φ∧ω)).
pub fn pi7<S: Scalar>(omega: &KForm<S>, structure: &CayleyStructure<S>) -> Result<KForm<S>> {
    if omega.degree() != 2 || omega.dim() != 8 {
        return Err(Error::Mismatch {
            what: "pi7",
            detail: format!("expected a 2-form on R^8, got degree {}", omega.degree()),
        });
    }
    let star = structure.phi.wedge(omega)?.hodge_star()?;
    let quarter = S::one() / S::from_int(4);
    Ok(omega.add(&star)?.scale(&quarter))
}

/// Spectral splitting into the +3 and −1 eigenspaces of ω ↦ ⋆(Φ∧ω).
pub fn split_two_form<S: Scalar>(
    omega: &KForm<S>,
    structure: &CayleyStructure<S>,
) -> Result<TwoFormSplit<S>> {
    let omega7 = pi7(omega, structure)?;
    let omega21 = omega.sub(&omega7)?;
    Ok(TwoFormSplit { omega7, omega21 })
}

/// Cross product `u × v = π₇(u♭∧v♭) = ¼(u♭∧v♭ + Φ(u,v,·,·))`, valued in Λ²₇.
pub fn cross<S: Scalar>(
    u: &VecN<S>,
    v: &VecN<S>,
    structure: &CayleyStructure<S>,
) -> Result<KForm<S>> {
    if u.dim() != 8 || v.dim() != 8 {
        return Err(Error::invalid("cross product requires vectors in R^8"));
    }
    let wedge = musical_flat(u).wedge(&musical_flat(v))?;
    let contracted = contract2(&structure.phi, u, v)?;
    let quarter = S::one() / S::from_int(4);
    Ok(wedge.add(&contracted)?.scale(&quarter))
}

/// Triple product `(u × v × w)♭ = Φ(u,v,w,·)`; completes an independent
/// triple to its unique Cayley plane.
pub fn triple<S: Scalar>(
    u: &VecN<S>,
    v: &VecN<S>,
    w: &VecN<S>,
    structure: &CayleyStructure<S>,
) -> Result<VecN<S>> {
    let c1 = KForm::interior(u, &structure.phi)?;
    let c2 = KForm::interior(v, &c1)?;
    let c3 = KForm::interior(w, &c2)?;
    musical_sharp(&c3)
}

/// Quadruple product: Λ²₇-valued alternating 4-form that vanishes exactly
/// on Cayley planes.
pub fn quadruple_tau<S: Scalar>(
    args: [&VecN<S>; 4],
    structure: &CayleyStructure<S>,
) -> Result<KForm<S>> {
    let mut acc = KForm::zero(8, 2);
    for i in 0..4 {
        let rest: Vec<&VecN<S>> = (0..4).filter(|&j| j != i).map(|j| args[j]).collect();
        let t = triple(rest[0], rest[1], rest[2], structure)?;
        let c = cross(args[i], &t, structure)?;
        acc = if i % 2 == 0 {
            acc.add(&c)?
        } else {
            acc.sub(&c)?
        };
    }
    Ok(acc)
}

/// τ-norm of an orthonormal frame; `‖τ‖² + 4·calibration² = 4` on
/// orthonormal frames, so values lie in [0, 2].
pub fn tau_norm_frame(frame: &[VecN<f64>; 4], structure: &CayleyStructure<f64>) -> Result<f64> {
    let t = quadruple_tau([&frame[0], &frame[1], &frame[2], &frame[3]], structure)?;
    Ok(t.inner(&t)?.sqrt())
}

/// Default tolerance under which a plane counts as Cayley.
pub const CAYLEY_TOLERANCE: f64 = 1e-8;

/// Orthonormal basis of the fiber `E_ξ = {ω ∈ Λ²₇ : ω|_ξ = 0}` over a
/// Cayley plane given by an orthonormal frame: `2·(f₁ × nⱼ)` over an
/// orthonormal basis `nⱼ` of ξ^⊥. For Π = ℝ⁴×0 this is the normalized
/// `π₇(dx₁∧dxᵢ)`, i = 5..8.
pub fn e_fiber(
    frame: &[VecN<f64>; 4],
    normals: &[VecN<f64>; 4],
    structure: &CayleyStructure<f64>,
) -> Result<[KForm<f64>; 4]> {
    let tau = tau_norm_frame(frame, structure)?;
    if tau > CAYLEY_TOLERANCE {
        return Err(Error::NotCayley {
            tau_norm: tau,
            tolerance: CAYLEY_TOLERANCE,
        });
    }
    let two = 2.0;
    let mut out = Vec::with_capacity(4);
    for n in normals {
        out.push(cross(&frame[0], n, structure)?.scale(&two));
    }
    Ok([
        out[0].clone(),
        out[1].clone(),
        out[2].clone(),
        out[3].clone(),
    ])
}

/// Orthogonal projection of a 2-form onto `E_ξ`.
pub fn pi_e(omega: &KForm<f64>, fiber: &[KForm<f64>; 4]) -> Result<KForm<f64>> {
    let mut acc = KForm::zero(8, 2);
    for b in fiber {
        let c = omega.inner(b)?;
        acc = acc.add(&b.scale(&c))?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Quaternions, the stabilizer action and Clifford multiplication
// ---------------------------------------------------------------------------

/// Quaternion `w + xi + yj + zk`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn one() -> Self {
        Quat::new(1.0, 0.0, 0.0, 0.0)
    }

    pub fn mul(&self, b: &Quat) -> Quat {
        Quat::new(
            self.w * b.w - self.x * b.x - self.y * b.y - self.z * b.z,
            self.w * b.x + self.x * b.w + self.y * b.z - self.z * b.y,
            self.w * b.y - self.x * b.z + self.y * b.w + self.z * b.x,
            self.w * b.z + self.x * b.y - self.y * b.x + self.z * b.w,
        )
    }

    pub fn conj(&self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sq(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: f64) -> Quat {
        Quat::new(self.w * c, self.x * c, self.y * c, self.z * c)
    }
}

/// Clifford multiplication on ℍ⊕ℍ: `c(h)(v₁,v₂) = (v₂·h̄, −v₁·h)`.
/// Satisfies `c(h)∘c(h) = −|h|²·id`.
pub fn clifford(h: &Quat, s: (&Quat, &Quat)) -> (Quat, Quat) {
    (s.1.mul(&h.conj()), s.0.mul(h).scale(-1.0))
}

/// ℝ⁸ ↔ ℍ⊕ℍ identification used by the stabilizer action and the
/// Clifford/cross matching: coordinates enter through quaternion
/// conjugation, `x ↔ (x₁ − x₂i − x₃j − x₄k, x₅ − x₆i − x₇j − x₈k)`.
/// This is the unique variant (among sign/side choices) under which the
/// action below preserves Φ₀ and `c` restricted to `TΠ × ν(Π)` equals
/// twice the cross product in the orthonormal E-basis.
pub fn r8_to_quat_pair(x: &VecN<f64>) -> (Quat, Quat) {
    let c = x.components();
    (
        Quat::new(c[0], -c[1], -c[2], -c[3]),
        Quat::new(c[4], -c[5], -c[6], -c[7]),
    )
}

pub fn quat_pair_to_r8(u: &Quat, v: &Quat) -> VecN<f64> {
    VecN::from_f64(&[u.w, -u.x, -u.y, -u.z, v.w, -v.x, -v.y, -v.z])
}

/// An element `[p₁, p₂, q]` of `(Sp(1)×Sp(1)×Sp(1))/±1`, the stabilizer of
/// the Cayley plane ℝ⁴×0 inside Spin(7).
#[derive(Clone, Copy, Debug)]
pub struct QuatTriple {
    pub p1: Quat,
    pub p2: Quat,
    pub q: Quat,
}

impl QuatTriple {
    pub fn identity() -> Self {
        QuatTriple {
            p1: Quat::one(),
            p2: Quat::one(),
            q: Quat::one(),
        }
    }

    pub fn new(p1: Quat, p2: Quat, q: Quat) -> Result<Self> {
        for (name, u) in [("p1", &p1), ("p2", &p2), ("q", &q)] {
            if (u.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("{name} is not a unit quaternion")));
            }
        }
        Ok(QuatTriple { p1, p2, q })
    }
}

/// Action `[p₁,p₂,q]·(u,v) = (p₁uq̄, p₂vq̄)` on ℝ⁸ ≅ ℍ⊕ℍ; orthogonal,
/// preserves Φ₀ and the plane ℝ⁴×0.
pub fn h_action(t: &QuatTriple, x: &VecN<f64>) -> VecN<f64> {
    let (u, v) = r8_to_quat_pair(x);
    let qc = t.q.conj();
    let u2 = t.p1.mul(&u).mul(&qc);
    let v2 = t.p2.mul(&v).mul(&qc);
    quat_pair_to_r8(&u2, &v2)
}

/// Matrix of the action in the standard basis (rows act on column vectors).
pub fn h_action_matrix(t: &QuatTriple) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; 8]; 8];
    for j in 0..8 {
        let mut comps = vec![0.0; 8];
        comps[j] = 1.0;
        let x = VecN::from_f64(&comps);
        let y = h_action(t, &x);
        for i in 0..8 {
            m[i][j] = *y.component(i + 1);
        }
    }
    m
}

// ---------------------------------------------------------------------------
// The spin(7) Lie algebra and random structure-preserving rotations
// ---------------------------------------------------------------------------

/// Infinitesimal pullback action of a matrix on the Cayley form:
/// `(L_A Φ)(v₁..v₄) = Σₛ Φ(v₁,…,A vₛ,…,v₄)`.
fn lie_derivative_phi(a: &[Vec<Rat>]) -> KForm<Rat> {
    let phi = standard_cayley_form::<Rat>();
    let mut out = KForm::zero(8, 4);
    for target in MultiIndex::all(8, 4) {
        let idx = target.labels();
        let mut acc = Rat::zero();
        for slot in 0..4 {
            // v_slot = A e_{idx[slot]}
            let mut vectors: Vec<VecN<Rat>> =
                idx.iter().map(|&i| VecN::basis(8, i as usize)).collect();
            let col: Vec<Rat> = (0..8)
                .map(|r| a[r][idx[slot] as usize - 1].clone())
                .collect();
            vectors[slot] = VecN::new(col);
            acc = acc + phi.evaluate(&vectors).expect("degree 4");
        }
        if !acc.is_zero() {
            let mut term = KForm::zero(8, 4);
            term.add_term(idx, acc).unwrap();
            out = out.add(&term).unwrap();
        }
    }
    out
}

/// Basis of so(8): `E_{ab} − E_{ba}` for a < b, as 8×8 rational matrices.
fn so8_basis() -> Vec<Vec<Vec<Rat>>> {
    let mut out = Vec::with_capacity(28);
    for a in 0..8 {
        for b in (a + 1)..8 {
            let mut m = vec![vec![Rat::zero(); 8]; 8];
            m[a][b] = Rat::one();
            m[b][a] = -Rat::one();
            out.push(m);
        }
    }
    out
}

/// Exact basis of the stabilizer algebra spin(7) ⊂ so(8): the nullspace of
/// `A ↦ L_A Φ₀`. Returns 21 antisymmetric matrices.
pub fn spin7_lie_algebra() -> Vec<Vec<Vec<Rat>>> {
    let (basis, null) = spin7_algebra_nullspace();
    null.iter()
        .map(|coeffs| {
            let mut m = vec![vec![Rat::zero(); 8]; 8];
            for (c, b) in coeffs.iter().zip(&basis) {
                if c.is_zero() {
                    continue;
                }
                for i in 0..8 {
                    for j in 0..8 {
                        if !b[i][j].is_zero() {
                            m[i][j] = m[i][j].clone() + c.clone() * b[i][j].clone();
                        }
                    }
                }
            }
            m
        })
        .collect()
}

/// Rank of the action map so(8) → Λ⁴, exposed for the dimension count
/// 28 − rank = 21.
pub fn spin7_action_rank() -> usize {
    let (_, action) = action_matrix();
    action.rank()
}

/// Exact eigenspace dimensions of ω ↦ ⋆(Φ₀∧ω) on 2-forms: (+3 eigenspace,
/// −1 eigenspace) = (7, 21), computed as rational nullities.
pub fn two_form_splitting_dims() -> (usize, usize) {
    let s = CayleyStructure::<Rat>::standard();
    let two_forms = MultiIndex::all(8, 2);
    let mut m3 = Mat::zeros(28, 28);
    let mut m1 = Mat::zeros(28, 28);
    for (col, idx) in two_forms.iter().enumerate() {
        let mut basis = KForm::zero(8, 2);
        basis.add_term(idx.labels(), Rat::one()).unwrap();
        let image = s.phi().wedge(&basis).unwrap().hodge_star().unwrap();
        for (row, ridx) in two_forms.iter().enumerate() {
            let c = image.coeff(ridx.labels());
            let c3 = c.clone()
                - if row == col {
                    Rat::from_int(3)
                } else {
                    Rat::zero()
                };
            if !c3.is_zero() {
                m3.set(row, col, c3);
            }
            let c1 = c + if row == col { Rat::one() } else { Rat::zero() };
            if !c1.is_zero() {
                m1.set(row, col, c1);
            }
        }
    }
    (m3.nullity(), m1.nullity())
}

fn action_matrix() -> (Vec<Vec<Vec<Rat>>>, Mat<Rat>) {
    let basis = so8_basis();
    let rows_idx = MultiIndex::all(8, 4);
    let mut m = Mat::zeros(rows_idx.len(), basis.len());
    for (col, b) in basis.iter().enumerate() {
        let image = lie_derivative_phi(b);
        for (row, idx) in rows_idx.iter().enumerate() {
            let c = image.coeff(idx.labels());
            if !c.is_zero() {
                m.set(row, col, c);
            }
        }
    }
    (basis, m)
}

fn spin7_algebra_nullspace() -> (Vec<Vec<Vec<Rat>>>, Vec<Vec<Rat>>) {
    let (basis, m) = action_matrix();
    let null = m.nullspace();
    (basis, null)
}

/// The stabilizer algebra basis as a JSON array of 8×8 matrices with
/// exact "p/q" entries.
pub fn spin7_lie_algebra_json() -> serde_json::Value {
    let basis = spin7_lie_algebra();
    serde_json::json!(basis
        .iter()
        .map(|m| {
            m.iter()
                .map(|row| {
                    row.iter()
                        .map(|x| format!("{}/{}", x.numer(), x.denom()))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>())
}

/// Deterministic random Spin(7) rotation: the exponential of a random
/// element of the stabilizer algebra. Pullback of Φ₀ matches Φ₀ to ~1e−12.
pub fn random_spin7(seed: u64) -> Vec<Vec<f64>> {
    random_spin7_scaled(seed, 0.4)
}

/// As [`random_spin7`], with coefficient scale 0 giving the identity.
pub fn random_spin7_scaled(seed: u64, scale: f64) -> Vec<Vec<f64>> {
    let algebra = spin7_lie_algebra_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![vec![0.0f64; 8]; 8];
    for b in algebra.iter() {
        let c: f64 = rng.gen_range(-1.0..1.0) * scale;
        for i in 0..8 {
            for j in 0..8 {
                a[i][j] += c * b[i][j];
            }
        }
    }
    matrix_exp(&a)
}

/// Float copy of the exact algebra basis (cached).
pub fn spin7_lie_algebra_f64() -> &'static Vec<Vec<Vec<f64>>> {
    use std::sync::OnceLock;
    static CACHE: OnceLock<Vec<Vec<Vec<f64>>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        spin7_lie_algebra()
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| row.iter().map(|x| x.to_f64()).collect())
                    .collect()
            })
            .collect()
    })
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn matrix_exp(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm: f64 = a
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let scale = 1.0 / f64::powi(2.0, squarings as i32);
    let sm: Vec<Vec<f64>> = a
        .iter()
        .map(|r| r.iter().map(|x| x * scale).collect())
        .collect();
    // exp(sm) by Taylor series; after scaling the norm is ~2^-4 so 16 terms
    // reach full double precision
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=16 {
        term = mat_mul(&term, &sm);
        let f = 1.0 / factorial(k);
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j] * f;
            }
        }
    }
    let mut out = result;
    for _ in 0..squarings {
        out = mat_mul(&out, &out);
    }
    out
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

// ---------------------------------------------------------------------------
// Reference coordinate table for τ and its reconciliation
// ---------------------------------------------------------------------------

/// Transcribed coordinate table for τ in the basis `{e₁×e_j}`, kept verbatim
/// including its repeated monomials. Each row j (j = 2..8) lists the
/// (sign, 4-index) monomials of the `e₁×e_j` component.
pub const REFERENCE_TAU_TABLE: [(u8, [(i8, [u8; 4]); 8]); 7] = [
    (
        2,
        [
            (1, [1, 3, 5, 8]),
            (1, [1, 3, 6, 7]),
            (-1, [1, 4, 5, 7]),
            (1, [1, 4, 6, 8]),
            (-1, [2, 3, 5, 7]),
            (1, [2, 3, 6, 8]),
            (-1, [2, 4, 5, 8]),
            (-1, [2, 4, 6, 7]),
        ],
    ),
    (
        3,
        [
            (-1, [1, 2, 5, 8]),
            (-1, [1, 2, 6, 7]),
            (1, [1, 4, 5, 6]),
            (1, [1, 4, 7, 8]),
            (1, [2, 3, 5, 6]),
            (1, [2, 3, 7, 8]),
            (-1, [3, 4, 5, 8]),
            (-1, [3, 4, 6, 7]),
        ],
    ),
    (
        4,
        [
            (1, [1, 2, 5, 7]),
            (-1, [1, 2, 6, 8]),
            (-1, [1, 3, 5, 6]),
            (-1, [1, 3, 7, 8]),
            (1, [2, 4, 5, 6]),
            (1, [2, 4, 7, 8]),
            (1, [3, 4, 5, 7]),
            (-1, [3, 4, 6, 8]),
        ],
    ),
    (
        5,
        [
            (1, [1, 2, 3, 8]),
            (-1, [1, 2, 4, 7]),
            (1, [1, 3, 4, 6]),
            (-1, [1, 6, 7, 8]),
            (-1, [2, 3, 4, 5]),
            (1, [2, 5, 7, 8]),
            (-1, [3, 5, 6, 8]),
            (1, [4, 5, 6, 7]),
        ],
    ),
    (
        6,
        [
            (1, [1, 2, 3, 7]),
            (1, [1, 2, 4, 8]),
            (-1, [1, 3, 4, 5]),
            (1, [1, 5, 7, 8]),
            (-1, [2, 3, 4, 6]),
            (1, [2, 6, 7, 8]),
            (-1, [3, 5, 6, 8]),
            (-1, [4, 5, 6, 8]),
        ],
    ),
    (
        7,
        [
            (-1, [1, 2, 3, 6]),
            (1, [1, 2, 4, 5]),
            (1, [1, 3, 4, 8]),
            (-1, [1, 5, 6, 8]),
            (-1, [2, 3, 4, 7]),
            (1, [2, 5, 6, 7]),
            (1, [3, 6, 7, 8]),
            (-1, [1, 5, 6, 8]),
        ],
    ),
    (
        8,
        [
            (-1, [1, 2, 3, 5]),
            (-1, [1, 2, 4, 6]),
            (-1, [1, 3, 4, 7]),
            (1, [1, 5, 6, 8]),
            (-1, [2, 3, 4, 8]),
            (1, [2, 5, 6, 8]),
            (1, [3, 5, 7, 8]),
            (1, [4, 6, 7, 8]),
        ],
    ),
];

/// Regenerated table: entry `(j, I) = ⟨τ(e_I), e₁×e_j⟩` over the exact
/// backend. Rows are j = 2..8, keyed by increasing 4-index.
pub fn regenerate_tau_table() -> Vec<(u8, Vec<([u8; 4], Rat)>)> {
    let structure = CayleyStructure::<Rat>::standard();
    let cross_basis: Vec<KForm<Rat>> = (2..=8)
        .map(|j| cross(&VecN::basis(8, 1), &VecN::basis(8, j), &structure).expect("basis vectors"))
        .collect();
    let mut rows = Vec::new();
    for (jpos, j) in (2..=8u8).enumerate() {
        let mut row = Vec::new();
        for idx in MultiIndex::all(8, 4) {
            let vs: Vec<VecN<Rat>> = idx
                .labels()
                .iter()
                .map(|&i| VecN::basis(8, i as usize))
                .collect();
            let t = quadruple_tau([&vs[0], &vs[1], &vs[2], &vs[3]], &structure).unwrap();
            let c = t.inner(&cross_basis[jpos]).unwrap();
            if !c.is_zero() {
                let mut key = [0u8; 4];
                key.copy_from_slice(idx.labels());
                row.push((key, c));
            }
        }
        rows.push((j, row));
    }
    rows
}

/// Max deviation between the float-backend regeneration of the τ table and
/// the exact one; exercises backend agreement on a nontrivial pipeline.
pub fn tau_table_float_deviation() -> f64 {
    let exact = regenerate_tau_table();
    let structure = CayleyStructure::<f64>::standard();
    let cross_basis: Vec<KForm<f64>> = (2..=8)
        .map(|j| cross(&VecN::basis(8, 1), &VecN::basis(8, j), &structure).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for (jpos, (_, row)) in exact.iter().enumerate() {
        let by_idx: std::collections::BTreeMap<[u8; 4], f64> =
            row.iter().map(|(i, c)| (*i, c.to_f64())).collect();
        for idx in MultiIndex::all(8, 4) {
            let vs: Vec<VecN<f64>> = idx
                .labels()
                .iter()
                .map(|&i| VecN::basis(8, i as usize))
                .collect();
            let t = quadruple_tau([&vs[0], &vs[1], &vs[2], &vs[3]], &structure).unwrap();
            let c = t.inner(&cross_basis[jpos]).unwrap();
            let mut key = [0u8; 4];
            key.copy_from_slice(idx.labels());
            let e = by_idx.get(&key).copied().unwrap_or(0.0);
            worst = worst.max((c - e).abs());
        }
    }
    worst
}

/// One entrywise difference between the reference table and the
/// regenerated one.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct TauTableMismatch {
    /// Component row: the j of `e₁×e_j`.
    pub row: u8,
    pub idx: [u8; 4],
    /// Coefficient in the reference table (duplicates summed).
    pub reference: i64,
    /// Coefficient in the regenerated table.
    pub regenerated: i64,
}

/// Compare the regenerated τ table with the transcribed reference table.
/// Duplicated monomials in the reference rows accumulate before comparison.
pub fn tau_table_reconciliation() -> Vec<TauTableMismatch> {
    let regen = regenerate_tau_table();
    let mut out = Vec::new();
    for (row_ref, row_regen) in REFERENCE_TAU_TABLE.iter().zip(&regen) {
        assert_eq!(row_ref.0, row_regen.0);
        let mut reference: std::collections::BTreeMap<[u8; 4], i64> = Default::default();
        for (sign, idx) in row_ref.1 {
            *reference.entry(idx).or_insert(0) += sign as i64;
        }
        let mut regenerated: std::collections::BTreeMap<[u8; 4], i64> = Default::default();
        for (idx, c) in &row_regen.1 {
            let f = c.to_f64();
            let i = f.round() as i64;
            debug_assert!((f - i as f64).abs() < 1e-12, "non-integer table entry");
            regenerated.insert(*idx, i);
        }
        let keys: std::collections::BTreeSet<[u8; 4]> = reference
            .keys()
            .chain(regenerated.keys())
            .copied()
            .collect();
        for k in keys {
            let a = reference.get(&k).copied().unwrap_or(0);
            let b = regenerated.get(&k).copied().unwrap_or(0);
            if a != b {
                out.push(TauTableMismatch {
                    row: row_ref.0,
                    idx: k,
                    reference: a,
                    regenerated: b,
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// SU(4) compatibility: Kähler data whose induced 4-form is exactly Φ₀
// ---------------------------------------------------------------------------

/// The complex structure of the block identification `z_j = x_j + i·x_{4+j}`:
/// `J e_j = e_{4+j}`, `J e_{4+j} = −e_j`. Under it, `Re Ω + ½ ω∧ω` equals the
/// standard Cayley form exactly.
pub fn complex_structure_j(x: &VecN<f64>) -> VecN<f64> {
    let c = x.components();
    VecN::from_f64(&[-c[4], -c[5], -c[6], -c[7], c[0], c[1], c[2], c[3]])
}

/// The Kähler form ω = Σ dx_j ∧ dx_{4+j} of the block identification.
pub fn kaehler_form<S: Scalar>() -> KForm<S> {
    let mut om = KForm::zero(8, 2);
    for j in 1..=4u8 {
        om.add_term(&[j, j + 4], S::one()).unwrap();
    }
    om
}

/// Re Ω for Ω = dz₁∧dz₂∧dz₃∧dz₄ in the block identification.
pub fn re_omega<S: Scalar>() -> KForm<S> {
    let mut out = KForm::zero(8, 4);
    // expand prod_j (dx_j + i dy_j), keep terms with an even number of dy's
    for mask in 0u8..16 {
        let ones = mask.count_ones();
        if ones % 2 == 1 {
            continue;
        }
        let sign = if ones % 4 == 2 { -1 } else { 1 };
        let idx: Vec<u8> = (0..4)
            .map(|j| if mask >> j & 1 == 1 { j + 5 } else { j + 1 })
            .collect();
        out.add_term(&idx, S::from_int(sign)).unwrap();
    }
    out
}
