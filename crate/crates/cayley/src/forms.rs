//! Sparse exterior algebra over Euclidean ℝⁿ.
//!
//! Forms are stored as maps from strictly increasing multi-indices to
//! coefficients. Λ⁴ℝ⁸ has 70 components but the forms appearing here
//! (the Cayley form, two-form projections, E-fiber bases) carry a
//! handful of terms, so sparse maps dominate dense arrays.
//!
//! The metric is the standard Euclidean one and the orientation is the
//! standard dx₁∧…∧dxₙ throughout; the multi-index basis {dx_I} is
//! orthonormal for the form inner product.

use crate::scalar::{Rat, Scalar};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Strictly increasing list of axis labels in `1..=n`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    /// Build from a strictly increasing sequence.
    pub fn new(indices: Vec<u8>) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "multi-index {:?} is not strictly increasing",
                indices
            )));
        }
        if indices.iter().any(|&i| i == 0) {
            return Err(Error::invalid("axis labels start at 1"));
        }
        Ok(MultiIndex(indices))
    }

    /// Sort an arbitrary index tuple, returning the sign of the permutation,
    /// or `None` when an index repeats.
    pub fn sort_with_sign(mut indices: Vec<u8>) -> Option<(Self, i8)> {
        let mut sign = 1i8;
        let n = indices.len();
        for i in 0..n {
            for j in 0..n.saturating_sub(1 + i) {
                if indices[j] > indices[j + 1] {
                    indices.swap(j, j + 1);
                    sign = -sign;
                } else if indices[j] == indices[j + 1] {
                    return None;
                }
            }
        }
        Some((MultiIndex(indices), sign))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    /// Complementary index set in `1..=n`, with the permutation sign of
    /// `(self, complement)` relative to `(1,…,n)`.
    pub fn complement(&self, n: u8) -> (MultiIndex, i8) {
        let comp: Vec<u8> = (1..=n).filter(|i| !self.0.contains(i)).collect();
        let mut joined = self.0.clone();
        joined.extend_from_slice(&comp);
        let (_, sign) = MultiIndex::sort_with_sign(joined).expect("disjoint by construction");
        (MultiIndex(comp), sign)
    }

    /// All strictly increasing `k`-subsets of `1..=n`.
    pub fn all(n: u8, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(start: u8, n: u8, k: usize, cur: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            if cur.len() == k {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for i in start..=n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        rec(1, n, k, &mut cur, &mut out);
        out
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dx")?;
        for i in &self.0 {
            write!(f, "{}", i)?;
        }
        Ok(())
    }
}

/// A vector in ℝⁿ with the implicit Euclidean metric.
#[derive(Clone, Debug, PartialEq)]
pub struct VecN<S> {
    components: Vec<S>,
}

impl<S: Scalar> VecN<S> {
    pub fn new(components: Vec<S>) -> Self {
        VecN { components }
    }

    pub fn zero(dim: usize) -> Self {
        VecN {
            components: vec![S::zero(); dim],
        }
    }

    /// Standard basis vector `e_i` (1-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zero(dim);
        v.components[i - 1] = S::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &S {
        &self.components[i - 1]
    }

    pub fn components(&self) -> &[S] {
        &self.components
    }

    pub fn dot(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for (a, b) in self.components.iter().zip(&other.components) {
            acc = acc + a.clone() * b.clone();
        }
        acc
    }

    pub fn scale(&self, c: &S) -> Self {
        VecN {
            components: self
                .components
                .iter()
                .map(|x| x.clone() * c.clone())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        VecN {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VecN {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl VecN<f64> {
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        self.scale(&(1.0 / n))
    }

    pub fn from_f64(components: &[f64]) -> Self {
        VecN {
            components: components.to_vec(),
        }
    }
}

/// A degree-`k` exterior form on ℝⁿ as a sparse coefficient map.
///
/// Absent keys mean coefficient zero. The zero form may carry a degree
/// label larger than `n` (the wedge of high-degree forms); any nonzero
/// term forces `degree ≤ n`.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm<S> {
    dim: u8,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> KForm<S> {
    pub fn zero(dim: u8, degree: usize) -> Self {
        KForm {
            dim,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// Assemble from (index tuple, coefficient) terms; tuples are sorted and
    /// signed, repeated tuples accumulate.
    pub fn from_terms(dim: u8, degree: usize, terms: &[(&[u8], S)]) -> Result<Self> {
        let mut f = KForm::zero(dim, degree);
        for (idx, c) in terms {
            f.add_term(idx, c.clone())?;
        }
        Ok(f)
    }

    /// Add `c · dx_{idx}` (idx in any order; vanishes on repeats).
    pub fn add_term(&mut self, idx: &[u8], c: S) -> Result<()> {
        if idx.len() != self.degree {
            return Err(Error::invalid(format!(
                "term of length {} in a degree-{} form",
                idx.len(),
                self.degree
            )));
        }
        if idx.iter().any(|&i| i == 0 || i > self.dim) {
            return Err(Error::invalid(format!(
                "axis label out of range 1..={}",
                self.dim
            )));
        }
        if let Some((key, sign)) = MultiIndex::sort_with_sign(idx.to_vec()) {
            let signed = if sign < 0 { -c } else { c };
            let entry = self.coeffs.entry(key).or_insert_with(S::zero);
            *entry = entry.clone() + signed;
            if entry.is_zero() {
                let key2 = MultiIndex::sort_with_sign(idx.to_vec()).unwrap().0;
                self.coeffs.remove(&key2);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, idx: &[u8]) -> S {
        match MultiIndex::sort_with_sign(idx.to_vec()) {
            Some((key, sign)) => match self.coeffs.get(&key) {
                Some(c) if sign < 0 => -c.clone(),
                Some(c) => c.clone(),
                None => S::zero(),
            },
            None => S::zero(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.coeffs.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::Mismatch {
                what: "form addition",
                detail: format!(
                    "({},{}) vs ({},{})",
                    self.dim, self.degree, other.dim, other.degree
                ),
            });
        }
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            let entry = out.coeffs.entry(k.clone()).or_insert_with(S::zero);
            *entry = entry.clone() + v.clone();
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return KForm::zero(self.dim, self.degree);
        }
        KForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Exterior product. Degree overflow past `n` yields the zero form.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Mismatch {
                what: "wedge",
                detail: format!("dim {} vs {}", self.dim, other.dim),
            });
        }
        let degree = self.degree + other.degree;
        let mut out = KForm::zero(self.dim, degree);
        if degree > self.dim as usize {
            return Ok(out);
        }
        for (ka, va) in &self.coeffs {
            for (kb, vb) in &other.coeffs {
                let mut joined = ka.0.clone();
                joined.extend_from_slice(&kb.0);
                if let Some((key, sign)) = MultiIndex::sort_with_sign(joined) {
                    let c = va.clone() * vb.clone();
                    let c = if sign < 0 { -c } else { c };
                    let entry = out.coeffs.entry(key).or_insert_with(S::zero);
                    *entry = entry.clone() + c;
                }
            }
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Hodge star for the standard metric and orientation.
    /// Satisfies ⋆⋆ = (−1)^{k(n−k)} id.
    pub fn hodge_star(&self) -> Result<Self> {
        if self.degree > self.dim as usize {
            return Err(Error::invalid("hodge star of overflowed-degree form"));
        }
        let n = self.dim;
        let mut out = KForm::zero(n, n as usize - self.degree);
        for (k, v) in &self.coeffs {
            let (comp, sign) = k.complement(n);
            let c = if sign < 0 { -v.clone() } else { v.clone() };
            out.coeffs.insert(comp, c);
        }
        Ok(out)
    }

    /// Interior product ι(v): contracts `v` into the first slot.
    ///
    /// Iterating in argument order fills slots left to right:
    /// `interior(w, &interior(v, &a)?)? = a(v, w, ·, …)`.
    pub fn interior(v: &VecN<S>, a: &Self) -> Result<Self> {
        if v.dim() != a.dim as usize {
            return Err(Error::Mismatch {
                what: "interior product",
                detail: format!("vector dim {} vs form dim {}", v.dim(), a.dim),
            });
        }
        if a.degree == 0 {
            return Err(Error::invalid("interior product of a 0-form"));
        }
        let mut out = KForm::zero(a.dim, a.degree - 1);
        for (k, c) in &a.coeffs {
            for (pos, &axis) in k.0.iter().enumerate() {
                let vc = v.component(axis as usize);
                if vc.is_zero() {
                    continue;
                }
                let mut rest = k.0.clone();
                rest.remove(pos);
                let term = c.clone() * vc.clone();
                let term = if pos % 2 == 1 { -term } else { term };
                let key = MultiIndex(rest);
                let entry = out.coeffs.entry(key).or_insert_with(S::zero);
                *entry = entry.clone() + term;
            }
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// Inner product with the multi-index basis orthonormal;
    /// ⟨a,b⟩ dvol = a ∧ ⋆b.
    pub fn inner(&self, other: &Self) -> Result<S> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(Error::Mismatch {
                what: "form inner product",
                detail: format!(
                    "({},{}) vs ({},{})",
                    self.dim, self.degree, other.dim, other.degree
                ),
            });
        }
        let mut acc = S::zero();
        for (k, v) in &self.coeffs {
            if let Some(w) = other.coeffs.get(k) {
                acc = acc + v.clone() * w.clone();
            }
        }
        Ok(acc)
    }

    /// Pullback along the linear map with matrix `m` (row-major, n×n):
    /// `(m*ω)(v₁,…,v_k) = ω(m v₁, …, m v_k)`.
    pub fn pullback(&self, m: &[Vec<S>]) -> Result<Self> {
        let n = self.dim as usize;
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::Mismatch {
                what: "pullback",
                detail: format!("matrix is not {n}x{n}"),
            });
        }
        let k = self.degree;
        let mut out = KForm::zero(self.dim, k);
        if self.coeffs.is_empty() {
            return Ok(out);
        }
        for target in MultiIndex::all(self.dim, k) {
            let mut acc = S::zero();
            for (src, c) in &self.coeffs {
                // minor: rows = src labels, columns = target labels
                let sub: Vec<Vec<S>> = src
                    .0
                    .iter()
                    .map(|&r| {
                        target
                            .0
                            .iter()
                            .map(|&cidx| m[r as usize - 1][cidx as usize - 1].clone())
                            .collect()
                    })
                    .collect();
                let d = det(&sub);
                acc = acc + c.clone() * d;
            }
            if !acc.is_zero() {
                out.coeffs.insert(target, acc);
            }
        }
        Ok(out)
    }

    /// Evaluate on `k` vectors (fills all slots).
    pub fn evaluate(&self, vectors: &[VecN<S>]) -> Result<S> {
        if vectors.len() != self.degree {
            return Err(Error::invalid(format!(
                "evaluating a degree-{} form on {} vectors",
                self.degree,
                vectors.len()
            )));
        }
        let mut acc = S::zero();
        for (k, c) in &self.coeffs {
            let sub: Vec<Vec<S>> = vectors
                .iter()
                .map(|v| {
                    k.0.iter()
                        .map(|&i| v.component(i as usize).clone())
                        .collect()
                })
                .collect();
            // rows = vectors, columns = axis labels: det gives dx_I(v1..vk)
            acc = acc + c.clone() * det(&sub);
        }
        Ok(acc)
    }
}

impl KForm<f64> {
    pub fn norm(&self) -> f64 {
        self.inner(self).expect("same shape").sqrt()
    }

    /// Drop terms with |coefficient| ≤ eps.
    pub fn prune(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|_, v| v.abs() > eps);
        out
    }

    pub fn to_rational(&self, denominator_bound: i64) -> KForm<Rat> {
        let mut out = KForm::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            let approx = (v * denominator_bound as f64).round() as i64;
            out.coeffs
                .insert(k.clone(), crate::scalar::rat(approx, denominator_bound));
        }
        out
    }
}

impl KForm<Rat> {
    pub fn to_f64(&self) -> KForm<f64> {
        let mut out = KForm::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            out.coeffs.insert(k.clone(), v.to_f64());
        }
        out
    }
}

/// Exact determinant by cofactor expansion; the minors here are at most 8×8
/// and usually 2×2 or 4×4.
fn det<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    match n {
        0 => S::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone(),
        _ => {
            let mut acc = S::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<S>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][j].clone() * det(&minor);
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

/// Musical isomorphism ♭: vectors to 1-forms.
pub fn musical_flat<S: Scalar>(v: &VecN<S>) -> KForm<S> {
    let mut out = KForm::zero(v.dim() as u8, 1);
    for (i, c) in v.components().iter().enumerate() {
        if !c.is_zero() {
            out.coeffs
                .insert(MultiIndex(vec![(i + 1) as u8]), c.clone());
        }
    }
    out
}

/// Musical isomorphism ♯: 1-forms to vectors.
pub fn musical_sharp<S: Scalar>(a: &KForm<S>) -> Result<VecN<S>> {
    if a.degree != 1 {
        return Err(Error::Mismatch {
            what: "sharp",
            detail: format!("expected degree 1, got {}", a.degree),
        });
    }
    let mut v = VecN::zero(a.dim as usize);
    for (k, c) in &a.coeffs {
        v.components[k.0[0] as usize - 1] = c.clone();
    }
    Ok(v)
}

/// Iterated first-slot contraction: `contract2(a, u, v) = a(u, v, ·, …)`.
pub fn contract2<S: Scalar>(a: &KForm<S>, u: &VecN<S>, v: &VecN<S>) -> Result<KForm<S>> {
    KForm::interior(v, &KForm::interior(u, a)?)
}

// ---------------------------------------------------------------------------
// JSON serialization: {"dim":n,"degree":k,"terms":[{"idx":[..],"c":...}]}
// with c a number (float backend) or "p/q" string (rational backend).
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct JsonForm {
    dim: u8,
    degree: usize,
    terms: Vec<JsonTerm>,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    idx: Vec<u8>,
    c: serde_json::Value,
}

/// Coefficient encoding for the JSON form schema.
pub trait JsonScalar: Scalar {
    fn to_json(&self) -> serde_json::Value;
    fn from_json(v: &serde_json::Value) -> Result<Self>;
}

impl JsonScalar for f64 {
    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
    fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::invalid("coefficient out of f64 range")),
            serde_json::Value::String(s) => {
                let r = Rat::from_json(v).map(|r| r.to_f64());
                r.or_else(|_| {
                    s.parse::<f64>()
                        .map_err(|e| Error::invalid(format!("bad coefficient {s:?}: {e}")))
                })
            }
            _ => Err(Error::invalid("coefficient must be number or \"p/q\"")),
        }
    }
}

impl JsonScalar for Rat {
    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(format!("{}/{}", self.numer(), self.denom()))
    }
    fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) => {
                let (num, den) = match s.split_once('/') {
                    Some((a, b)) => (a, b),
                    None => (s.as_str(), "1"),
                };
                let n = num_bigint::BigInt::from_str(num.trim())
                    .map_err(|e| Error::invalid(format!("bad numerator {num:?}: {e}")))?;
                let d = num_bigint::BigInt::from_str(den.trim())
                    .map_err(|e| Error::invalid(format!("bad denominator {den:?}: {e}")))?;
                if num_traits::Zero::is_zero(&d) {
                    return Err(Error::invalid("zero denominator"));
                }
                Ok(Rat::new(n, d))
            }
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Self::from_int(i))
                } else {
                    Err(Error::invalid(
                        "non-integer numeric coefficient in rational form; use \"p/q\"",
                    ))
                }
            }
            _ => Err(Error::invalid("coefficient must be number or \"p/q\"")),
        }
    }
}

impl<S: JsonScalar> KForm<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<JsonTerm> = self
            .coeffs
            .iter()
            .map(|(k, v)| JsonTerm {
                idx: k.0.clone(),
                c: v.to_json(),
            })
            .collect();
        serde_json::to_value(JsonForm {
            dim: self.dim,
            degree: self.degree,
            terms,
        })
        .expect("plain data")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let jf: JsonForm = serde_json::from_value(v.clone())
            .map_err(|e| Error::invalid(format!("bad form JSON: {e}")))?;
        let mut out = KForm::zero(jf.dim, jf.degree);
        for t in &jf.terms {
            out.add_term(&t.idx, S::from_json(&t.c)?)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn dx(dim: u8, idx: &[u8]) -> KForm<Rat> {
        KForm::from_terms(dim, idx.len(), &[(idx, Rat::one())]).unwrap()
    }

    #[test]
    fn wedge_basis() {
        let a = dx(8, &[1]);
        let b = dx(8, &[2]);
        let ab = a.wedge(&b).unwrap();
        assert_eq!(ab, dx(8, &[1, 2]));
        let ba = b.wedge(&a).unwrap();
        assert_eq!(ba, ab.neg());
    }

    #[test]
    fn wedge_alternating() {
        let a = KForm::from_terms(8, 1, &[(&[1], rat(2, 1)), (&[3], rat(-5, 7))]).unwrap();
        assert!(a.wedge(&a).unwrap().is_zero());
    }

    #[test]
    fn wedge_degree_overflow_is_zero_form() {
        let a = dx(4, &[1, 2, 3]);
        let b = dx(4, &[2, 3]);
        let w = a.wedge(&b).unwrap();
        assert!(w.is_zero());
        assert_eq!(w.degree(), 5);
    }

    #[test]
    fn hodge_basis_case() {
        let a = dx(8, &[1]);
        assert_eq!(a.hodge_star().unwrap(), dx(8, &[2, 3, 4, 5, 6, 7, 8]));
    }

    #[test]
    fn hodge_involution_on_two_forms() {
        // k(n-k) = 2*6 even on R^8
        let w = KForm::from_terms(8, 2, &[(&[1, 5], rat(3, 2)), (&[2, 7], rat(-1, 3))]).unwrap();
        assert_eq!(w.hodge_star().unwrap().hodge_star().unwrap(), w);
    }

    #[test]
    fn interior_basis_cases() {
        let e1: VecN<Rat> = VecN::basis(8, 1);
        let e3: VecN<Rat> = VecN::basis(8, 3);
        let a = dx(8, &[1, 2]);
        assert_eq!(KForm::interior(&e1, &a).unwrap(), dx(8, &[2]));
        assert!(KForm::interior(&e3, &a).unwrap().is_zero());
    }

    #[test]
    fn iterated_contraction_of_cayley_form() {
        // slot-filling order: contract2(phi, e1, e2) = phi(e1, e2, ., .)
        let phi = crate::spin7::standard_cayley_form::<Rat>();
        let e1: VecN<Rat> = VecN::basis(8, 1);
        let e2: VecN<Rat> = VecN::basis(8, 2);
        let got = contract2(&phi, &e1, &e2).unwrap();
        let expected = KForm::from_terms(
            8,
            2,
            &[
                (&[3u8, 4u8][..], rat(1, 1)),
                (&[5, 6], rat(-1, 1)),
                (&[7, 8], rat(-1, 1)),
            ],
        )
        .unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn interior_of_zero_form_errors() {
        let c = KForm::from_terms(8, 0, &[(&[], rat(1, 1))]).unwrap();
        let e1: VecN<Rat> = VecN::basis(8, 1);
        assert!(KForm::interior(&e1, &c).is_err());
    }

    #[test]
    fn interior_squares_to_zero() {
        let v = VecN::new(vec![rat(1, 2), rat(-2, 3), rat(0, 1), rat(5, 1)]);
        let a =
            KForm::from_terms(4, 3, &[(&[1, 2, 3], rat(1, 1)), (&[2, 3, 4], rat(7, 3))]).unwrap();
        let once = KForm::interior(&v, &a).unwrap();
        let twice = KForm::interior(&v, &once).unwrap();
        assert!(twice.is_zero());
    }

    #[test]
    fn musical_inverse_pair() {
        let v = VecN::new(vec![rat(1, 3), rat(0, 1), rat(-4, 5), rat(2, 1)]);
        assert_eq!(musical_sharp(&musical_flat(&v)).unwrap(), v);
        let e1: VecN<Rat> = VecN::basis(8, 1);
        assert_eq!(musical_flat(&e1), dx(8, &[1]));
    }

    #[test]
    fn inner_matches_wedge_star() {
        let a = KForm::from_terms(8, 2, &[(&[1, 2], rat(2, 1)), (&[3, 7], rat(-1, 2))]).unwrap();
        let b = KForm::from_terms(8, 2, &[(&[1, 2], rat(1, 3)), (&[4, 5], rat(9, 1))]).unwrap();
        let lhs = a.wedge(&b.hodge_star().unwrap()).unwrap();
        let vol_coeff = lhs.coeff(&[1, 2, 3, 4, 5, 6, 7, 8]);
        assert_eq!(vol_coeff, a.inner(&b).unwrap());
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = dx(8, &[1]);
        let b = dx(4, &[1]);
        assert!(a.wedge(&b).is_err());
        assert!(a.inner(&b).is_err());
    }

    #[test]
    fn pullback_identity_and_scaling() {
        let a = dx(4, &[1, 2]);
        let id: Vec<Vec<Rat>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                    .collect()
            })
            .collect();
        assert_eq!(a.pullback(&id).unwrap(), a);
        let two: Vec<Vec<Rat>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| if i == j { rat(2, 1) } else { Rat::zero() })
                    .collect()
            })
            .collect();
        assert_eq!(a.pullback(&two).unwrap(), a.scale(&rat(4, 1)));
    }

    #[test]
    fn evaluate_matches_coeff() {
        let a = dx(8, &[2, 5]);
        let e2: VecN<Rat> = VecN::basis(8, 2);
        let e5: VecN<Rat> = VecN::basis(8, 5);
        assert_eq!(a.evaluate(&[e2.clone(), e5.clone()]).unwrap(), rat(1, 1));
        assert_eq!(a.evaluate(&[e5, e2]).unwrap(), rat(-1, 1));
    }

    #[test]
    fn json_roundtrip_rational_and_float() {
        let a = KForm::from_terms(8, 2, &[(&[1, 2], rat(-3, 7)), (&[5, 8], rat(2, 1))]).unwrap();
        let j = a.to_json();
        let back = KForm::<Rat>::from_json(&j).unwrap();
        assert_eq!(a, back);
        let f = a.to_f64();
        let jf = f.to_json();
        let backf = KForm::<f64>::from_json(&jf).unwrap();
        assert_eq!(f, backf);
        // rational parser also reads the float-backend integers
        let mixed: serde_json::Value = serde_json::json!(
            {"dim": 8, "degree": 1, "terms": [{"idx": [3], "c": "1/2"}]}
        );
        let m = KForm::<f64>::from_json(&mixed).unwrap();
        assert_eq!(m.coeff(&[3]), 0.5);
    }
}
