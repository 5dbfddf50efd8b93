//! Desk-scale laboratory for weighted function spaces on conical ends:
//! weighted Sobolev and Hölder norm quadrature over geometric radial
//! meshes, divergence detection by domain refinement, the classical
//! non-Fredholm witness family on the line, and Sobolev-embedding spot
//! checks on radial probe functions.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which end of the cone the mesh models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndType {
    /// Conically singular: the end is r → 0; refinement halves r_min.
    ConicallySingular,
    /// Asymptotically conical: the end is r → ∞; refinement doubles r_max.
    AsymptoticallyConical,
}

/// Quadrature mesh on a model cone (0, ∞) × L: a geometric radial grid and
/// link nodes with positive weights summing to the link volume.
#[derive(Clone, Debug)]
pub struct ConeMesh {
    pub dim: usize,
    pub end_type: EndType,
    link_weights: Vec<f64>,
    link_volume: f64,
    radial: Vec<f64>,
}

/// Volume of the unit round 3-sphere.
pub const S3_VOLUME: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;

impl ConeMesh {
    /// Geometric radial grid `r_j = r_lo · q^j` up to `r_hi`, with
    /// `nodes_per_octave` setting q = 2^{1/nodes_per_octave}.
    pub fn new(
        dim: usize,
        end_type: EndType,
        link_weights: Vec<f64>,
        link_volume: f64,
        r_lo: f64,
        r_hi: f64,
        nodes_per_octave: usize,
    ) -> Result<Self> {
        if r_lo <= 0.0 || r_hi <= r_lo {
            return Err(Error::invalid("need 0 < r_lo < r_hi"));
        }
        if nodes_per_octave == 0 {
            return Err(Error::invalid("nodes_per_octave must be positive"));
        }
        if link_weights.is_empty() || link_weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::invalid("link weights must be positive"));
        }
        let total: f64 = link_weights.iter().sum();
        if (total - link_volume).abs() > 0.01 * link_volume {
            return Err(Error::invalid(
                "link weights must sum to the link volume within 1%",
            ));
        }
        let q = 2f64.powf(1.0 / nodes_per_octave as f64);
        let mut radial = vec![r_lo];
        while radial.last().unwrap() * q < r_hi * (1.0 - 1e-12) {
            radial.push(radial.last().unwrap() * q);
        }
        radial.push(r_hi);
        if radial.len() < 5 {
            return Err(Error::invalid("radial grid too coarse for stencils"));
        }
        Ok(ConeMesh {
            dim,
            end_type,
            link_weights,
            link_volume,
            radial,
        })
    }

    /// Model mesh over the round S³ link (uniform weights) for a
    /// 4-dimensional cone.
    pub fn round_s3(
        end_type: EndType,
        r_lo: f64,
        r_hi: f64,
        nodes_per_octave: usize,
        n_link: usize,
    ) -> Result<Self> {
        let w = S3_VOLUME / n_link as f64;
        ConeMesh::new(
            4,
            end_type,
            vec![w; n_link],
            S3_VOLUME,
            r_lo,
            r_hi,
            nodes_per_octave,
        )
    }

    /// Single-point cross-section (link volume 1) in any dimension.
    pub fn point_link(
        dim: usize,
        end_type: EndType,
        r_lo: f64,
        r_hi: f64,
        nodes_per_octave: usize,
    ) -> Result<Self> {
        ConeMesh::new(dim, end_type, vec![1.0], 1.0, r_lo, r_hi, nodes_per_octave)
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial
    }

    pub fn n_link(&self) -> usize {
        self.link_weights.len()
    }

    pub fn link_volume(&self) -> f64 {
        self.link_volume
    }

    /// Extend the domain toward the end once (halve r_min / double r_max).
    pub fn extended_once(&self) -> ConeMesh {
        let per_octave = self.nodes_per_octave();
        let (r_lo, r_hi) = match self.end_type {
            EndType::ConicallySingular => (self.radial[0] / 2.0, *self.radial.last().unwrap()),
            EndType::AsymptoticallyConical => (self.radial[0], self.radial.last().unwrap() * 2.0),
        };
        ConeMesh::new(
            self.dim,
            self.end_type,
            self.link_weights.clone(),
            self.link_volume,
            r_lo,
            r_hi,
            per_octave,
        )
        .expect("extension of a valid mesh")
    }

    /// Double the radial resolution on the same domain.
    pub fn refined_resolution(&self) -> ConeMesh {
        ConeMesh::new(
            self.dim,
            self.end_type,
            self.link_weights.clone(),
            self.link_volume,
            self.radial[0],
            *self.radial.last().unwrap(),
            self.nodes_per_octave() * 2,
        )
        .expect("refinement of a valid mesh")
    }

    fn nodes_per_octave(&self) -> usize {
        let q = self.radial[1] / self.radial[0];
        (1.0 / q.log2()).round() as usize
    }
}

/// Values of a section on the mesh: `values[j][l]` at radius j, link node l.
#[derive(Clone, Debug)]
pub struct SampledSection {
    values: Vec<Vec<f64>>,
}

impl SampledSection {
    pub fn from_fn(mesh: &ConeMesh, f: impl Fn(f64, usize) -> f64) -> Self {
        let values = mesh
            .radial
            .iter()
            .map(|&r| (0..mesh.n_link()).map(|l| f(r, l)).collect())
            .collect();
        SampledSection { values }
    }

    /// Section depending on the radius only.
    pub fn from_radial(mesh: &ConeMesh, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(mesh, |r, _| f(r))
    }

    pub fn scale(&self, c: f64) -> Self {
        SampledSection {
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v * c).collect())
                .collect(),
        }
    }

    fn check_finite(&self) -> Result<()> {
        if self
            .values
            .iter()
            .any(|row| row.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::invalid("section has non-finite samples"));
        }
        Ok(())
    }
}

/// First and second radial derivatives on the non-uniform grid via
/// three-point stencils (one-sided at the ends).
fn radial_derivatives(radial: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = radial.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for j in 0..n {
        let (a, b, c) = if j == 0 {
            (0, 1, 2)
        } else if j == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (j - 1, j, j + 1)
        };
        let (xa, xb, xc) = (radial[a], radial[b], radial[c]);
        let (fa, fb, fc) = (values[a], values[b], values[c]);
        let x = radial[j];
        // Lagrange derivative of the quadratic through the three nodes
        let la = (2.0 * x - xb - xc) / ((xa - xb) * (xa - xc));
        let lb = (2.0 * x - xa - xc) / ((xb - xa) * (xb - xc));
        let lc = (2.0 * x - xa - xb) / ((xc - xa) * (xc - xb));
        d1[j] = fa * la + fb * lb + fc * lc;
        d2[j] = 2.0
            * (fa / ((xa - xb) * (xa - xc))
                + fb / ((xb - xa) * (xb - xc))
                + fc / ((xc - xa) * (xc - xb)));
    }
    (d1, d2)
}

/// Weighted Sobolev norm
/// `(Σ_{i≤k} ∫ |∇ⁱs · ρ^{−δ+i}|^p ρ^{−n} dμ)^{1/p}` by trapezoid quadrature
/// over the geometric radial grid. Covariant derivatives of radial sections
/// are modeled radially, with the cone's angular Hessian term
/// `(∂_r s / r)` entering at order two.
pub fn weighted_sobolev_norm(
    mesh: &ConeMesh,
    s: &SampledSection,
    p: f64,
    k: usize,
    delta: f64,
) -> Result<f64> {
    if k > 2 {
        return Err(Error::invalid(
            "derivative order beyond the supported stencils (k <= 2)",
        ));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid("need p >= 1"));
    }
    s.check_finite()?;
    if s.values.len() != mesh.radial.len() {
        return Err(Error::invalid("section sampled on a different mesh"));
    }
    let n = mesh.dim as f64;
    let nl = mesh.n_link();
    let nr = mesh.radial.len();
    // per-link radial profiles and their derivatives
    let mut prof: Vec<Vec<f64>> = vec![vec![0.0; nr]; nl];
    for j in 0..nr {
        for l in 0..nl {
            prof[l][j] = s.values[j][l];
        }
    }
    let derivs: Vec<(Vec<f64>, Vec<f64>)> = prof
        .iter()
        .map(|v| radial_derivatives(&mesh.radial, v))
        .collect();
    // integrand g(r) summed over link nodes, then trapezoid in r
    let mut node_vals = vec![0.0; nr];
    for j in 0..nr {
        let r = mesh.radial[j];
        let mut acc = 0.0;
        for l in 0..nl {
            let w = mesh.link_weights[l];
            let v0 = prof[l][j].abs();
            let mut terms = vec![v0 * r.powf(-delta)];
            if k >= 1 {
                terms.push(derivs[l].0[j].abs() * r.powf(-delta + 1.0));
            }
            if k >= 2 {
                let hess =
                    (derivs[l].1[j].powi(2) + (n - 1.0) * (derivs[l].0[j] / r).powi(2)).sqrt();
                terms.push(hess * r.powf(-delta + 2.0));
            }
            let sum_p: f64 = terms.iter().map(|t| t.powf(p)).sum();
            acc += w * sum_p;
        }
        // rho^{-n} dmu = r^{-n} r^{n-1} dr dvol_L = r^{-1} dr dvol_L
        node_vals[j] = acc / r;
    }
    let mut integral = 0.0;
    for j in 0..nr - 1 {
        let h = mesh.radial[j + 1] - mesh.radial[j];
        integral += 0.5 * h * (node_vals[j] + node_vals[j + 1]);
    }
    Ok(integral.powf(1.0 / p))
}

/// Norm value together with the divergence verdict from domain refinement.
#[derive(Clone, Debug, Serialize)]
pub struct NormVerdict {
    pub value: f64,
    pub finite: bool,
    /// Norm values on the successively extended domains.
    pub refinements: Vec<f64>,
}

/// Growth factor (on the p-th power of the norm) above which a refinement
/// step counts as divergent.
pub const DIVERGENCE_GROWTH: f64 = 0.25;

/// Evaluate the norm of a radial profile and classify it as finite or
/// divergent: the domain is extended toward the end three times and the
/// norm is declared infinite when its p-th power grows by more than 25%
/// twice consecutively.
pub fn weighted_sobolev_norm_with_verdict(
    mesh: &ConeMesh,
    profile: &dyn Fn(f64) -> f64,
    p: f64,
    k: usize,
    delta: f64,
) -> Result<NormVerdict> {
    let mut meshes = vec![mesh.clone()];
    for _ in 0..3 {
        meshes.push(meshes.last().unwrap().extended_once());
    }
    let mut values = Vec::new();
    for m in &meshes {
        let s = SampledSection::from_radial(m, profile);
        values.push(weighted_sobolev_norm(m, &s, p, k, delta)?);
    }
    let mut consecutive = 0;
    let mut divergent = false;
    for w in values.windows(2) {
        let growth = (w[1].powf(p) - w[0].powf(p)) / w[0].powf(p).max(f64::MIN_POSITIVE);
        if growth > DIVERGENCE_GROWTH {
            consecutive += 1;
            if consecutive >= 2 {
                divergent = true;
            }
        } else {
            consecutive = 0;
        }
    }
    Ok(NormVerdict {
        value: *values.last().unwrap(),
        finite: !divergent,
        refinements: values,
    })
}

/// Weighted Hölder norm `‖s‖_{C^k_δ} + [ρ^{k−δ+α}∇ᵏs]_α` with the seminorm
/// evaluated over node pairs within one radial band (the mesh stand-in for
/// the geodesic-neighbourhood convention).
pub fn weighted_holder_norm(
    mesh: &ConeMesh,
    s: &SampledSection,
    k: usize,
    alpha: f64,
    delta: f64,
) -> Result<f64> {
    if k > 2 {
        return Err(Error::invalid(
            "derivative order beyond the supported stencils (k <= 2)",
        ));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("need 0 < alpha <= 1"));
    }
    s.check_finite()?;
    let n = mesh.dim as f64;
    let nl = mesh.n_link();
    let nr = mesh.radial.len();
    let mut prof: Vec<Vec<f64>> = vec![vec![0.0; nr]; nl];
    for j in 0..nr {
        for l in 0..nl {
            prof[l][j] = s.values[j][l];
        }
    }
    let derivs: Vec<(Vec<f64>, Vec<f64>)> = prof
        .iter()
        .map(|v| radial_derivatives(&mesh.radial, v))
        .collect();
    let order_value = |l: usize, j: usize, i: usize| -> f64 {
        match i {
            0 => prof[l][j],
            1 => derivs[l].0[j],
            _ => {
                let r = mesh.radial[j];
                (derivs[l].1[j].powi(2) + (n - 1.0) * (derivs[l].0[j] / r).powi(2)).sqrt()
            }
        }
    };
    // C^k_delta part
    let mut ck = 0.0;
    for i in 0..=k {
        let mut sup: f64 = 0.0;
        for j in 0..nr {
            let r = mesh.radial[j];
            for l in 0..nl {
                sup = sup.max((order_value(l, j, i) * r.powf(i as f64 - delta)).abs());
            }
        }
        ck += sup;
    }
    // Hölder seminorm of rho^{k-delta+alpha} grad^k s over adjacent radii
    let mut semi: f64 = 0.0;
    for j in 0..nr - 1 {
        let (ra, rb) = (mesh.radial[j], mesh.radial[j + 1]);
        let d = rb - ra;
        for l in 0..nl {
            let fa = order_value(l, j, k) * ra.powf(k as f64 - delta + alpha);
            let fb = order_value(l, j + 1, k) * rb.powf(k as f64 - delta + alpha);
            semi = semi.max((fa - fb).abs() / d.powf(alpha));
        }
    }
    Ok(ck + semi)
}

// ---------------------------------------------------------------------------
// The non-Fredholm witness family on the line
// ---------------------------------------------------------------------------

/// Quadrature data of the witness family `f_n`:
/// t on [0,1], constant 1 on [1,n], n/t beyond, extended evenly... the
/// family is odd, its derivative even; squared norms integrate over the
/// symmetric grid.
#[derive(Clone, Debug, Serialize)]
pub struct DtFamilyReport {
    pub n: u32,
    /// L² norm of f_n (grows without bound in n).
    pub norm_f: f64,
    /// Squared L² norm of f_n′; analytically 2 + 2/(3n) up to tail cutoff.
    pub norm_df_sq: f64,
    /// Squared L² distance of f_n′ to the indicator of [−1,1]; 2/(3n).
    pub dist_to_char_sq: f64,
}

/// Evaluate the witness family on a symmetric grid covering
/// [−R·n, R·n] with midpoint quadrature on piecewise-smooth segments.
/// The grid must cover at least [−2n, 2n].
pub fn dt_family_report(n: u32, half_width_factor: f64) -> Result<DtFamilyReport> {
    if n < 1 {
        return Err(Error::invalid("need n >= 1"));
    }
    if half_width_factor < 2.0 {
        return Err(Error::invalid("grid must cover [-2n, 2n]"));
    }
    let nf = n as f64;
    let f = |t: f64| -> f64 {
        let a = t.abs();
        let v = if a <= 1.0 {
            a
        } else if a <= nf {
            1.0
        } else {
            nf / a
        };
        v * t.signum()
    };
    let fp = |t: f64| -> f64 {
        let a = t.abs();
        if a <= 1.0 {
            1.0
        } else if a <= nf {
            0.0
        } else {
            -nf / (a * a)
        }
    };
    let chi = |t: f64| -> f64 {
        if t.abs() <= 1.0 {
            1.0
        } else {
            0.0
        }
    };
    // midpoint cells on [0, 1], [1, n], geometric on [n, R n]; doubled by
    // symmetry (all three integrands are even)
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (midpoint, width)
    let uniform = |a: f64, b: f64, count: usize, cells: &mut Vec<(f64, f64)>| {
        if b <= a {
            return;
        }
        let h = (b - a) / count as f64;
        for i in 0..count {
            cells.push((a + (i as f64 + 0.5) * h, h));
        }
    };
    uniform(0.0, 1.0, 4000, &mut cells);
    if nf > 1.0 {
        uniform(1.0, nf, 2000, &mut cells);
    }
    let r_hi = half_width_factor * nf;
    let mut r = nf;
    let q = 2f64.powf(1.0 / 256.0);
    while r < r_hi {
        let next = (r * q).min(r_hi);
        cells.push(((r + next) / 2.0, next - r));
        r = next;
    }
    let integrate =
        |g: &dyn Fn(f64) -> f64| -> f64 { 2.0 * cells.iter().map(|(t, w)| g(*t) * w).sum::<f64>() };
    Ok(DtFamilyReport {
        n,
        norm_f: integrate(&|t| f(t) * f(t)).sqrt(),
        norm_df_sq: integrate(&|t| fp(t) * fp(t)),
        dist_to_char_sq: integrate(&|t| (fp(t) - chi(t)).powi(2)),
    })
}

// ---------------------------------------------------------------------------
// Sobolev embedding spot checks
// ---------------------------------------------------------------------------

/// Parameters of one side of the embedding.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpaceParams {
    pub p: f64,
    pub k: usize,
    pub delta: f64,
}

/// Result for a single radial probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeResult {
    pub exponent: f64,
    pub source_finite: bool,
    pub target_finite: bool,
    /// False exactly when the source is finite but the target is not.
    pub consistent: bool,
}

/// Outcome of the embedding spot check.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub hypotheses_met: bool,
    pub probes: Vec<ProbeResult>,
    pub counterexamples: usize,
}

/// Check the weighted-embedding conditions
/// (k − k̄ ≥ n(1/p − 1/p̄), p ≤ p̄ with δ̄ ≤ δ (CS) / δ̄ ≥ δ (AC), or the
/// strict variant for p̄ < p).
pub fn embedding_hypotheses(
    dim: usize,
    source: SpaceParams,
    target: SpaceParams,
    end_type: EndType,
) -> bool {
    let n = dim as f64;
    if source.k < target.k {
        return false;
    }
    let smoothness = (source.k - target.k) as f64 >= n * (1.0 / source.p - 1.0 / target.p);
    if !smoothness {
        return false;
    }
    let weight_ok = |strict: bool| match end_type {
        EndType::ConicallySingular => {
            if strict {
                target.delta < source.delta
            } else {
                target.delta <= source.delta
            }
        }
        EndType::AsymptoticallyConical => {
            if strict {
                target.delta > source.delta
            } else {
                target.delta >= source.delta
            }
        }
    };
    if source.p > 1.0 && source.p <= target.p {
        weight_ok(false)
    } else if target.p > 1.0 && target.p < source.p {
        weight_ok(true)
    } else {
        false
    }
}

/// Probe the embedding with radial powers r^a: whenever the hypotheses hold,
/// finiteness of the source norm must imply finiteness of the target norm.
pub fn embedding_spotcheck(
    mesh: &ConeMesh,
    source: SpaceParams,
    target: SpaceParams,
    probe_exponents: &[f64],
) -> Result<EmbeddingReport> {
    let hypotheses_met = embedding_hypotheses(mesh.dim, source, target, mesh.end_type);
    if !hypotheses_met {
        return Ok(EmbeddingReport {
            hypotheses_met,
            probes: Vec::new(),
            counterexamples: 0,
        });
    }
    let mut probes = Vec::new();
    let mut counterexamples = 0;
    for &a in probe_exponents {
        let profile = move |r: f64| r.powf(a);
        let sv =
            weighted_sobolev_norm_with_verdict(mesh, &profile, source.p, source.k, source.delta)?;
        let tv =
            weighted_sobolev_norm_with_verdict(mesh, &profile, target.p, target.k, target.delta)?;
        let consistent = !sv.finite || tv.finite;
        if !consistent {
            counterexamples += 1;
        }
        probes.push(ProbeResult {
            exponent: a,
            source_finite: sv.finite,
            target_finite: tv.finite,
            consistent,
        });
    }
    Ok(EmbeddingReport {
        hypotheses_met,
        probes,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs_mesh() -> ConeMesh {
        // two-octave window near the singular point of a 4-cone
        ConeMesh::round_s3(EndType::ConicallySingular, 0.25, 1.0, 32, 8).unwrap()
    }

    #[test]
    fn mesh_validation() {
        assert!(ConeMesh::round_s3(EndType::ConicallySingular, 1.0, 0.5, 8, 4).is_err());
        assert!(ConeMesh::new(
            4,
            EndType::ConicallySingular,
            vec![1.0, -1.0],
            0.0,
            0.1,
            1.0,
            8
        )
        .is_err());
        // weights must sum to the declared link volume within 1%
        assert!(ConeMesh::new(
            4,
            EndType::ConicallySingular,
            vec![1.0; 3],
            4.0,
            0.1,
            1.0,
            8
        )
        .is_err());
        let m = cs_mesh();
        assert!((m.link_volume() - S3_VOLUME).abs() < 1e-12);
        let q = m.radial_nodes()[1] / m.radial_nodes()[0];
        assert!(q > 1.0);
    }

    #[test]
    fn zero_section_zero_norms() {
        let m = cs_mesh();
        let z = SampledSection::from_radial(&m, |_| 0.0);
        assert_eq!(weighted_sobolev_norm(&m, &z, 2.0, 2, 0.5).unwrap(), 0.0);
        assert_eq!(weighted_holder_norm(&m, &z, 1, 0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn norm_homogeneity() {
        let m = cs_mesh();
        let s = SampledSection::from_radial(&m, |r| r.powf(1.3) + 0.2 * r.powf(2.0));
        let base = weighted_sobolev_norm(&m, &s, 2.0, 2, 0.5).unwrap();
        let scaled = weighted_sobolev_norm(&m, &s.scale(-3.0), 2.0, 2, 0.5).unwrap();
        assert!((scaled - 3.0 * base).abs() < 1e-9 * base);
        let h = weighted_holder_norm(&m, &s, 1, 0.5, 0.5).unwrap();
        let h2 = weighted_holder_norm(&m, &s.scale(-3.0), 1, 0.5, 0.5).unwrap();
        assert!((h2 - 3.0 * h).abs() < 1e-9 * h);
    }

    #[test]
    fn radial_power_norm_matches_closed_form() {
        // k = 0: ||r^a||^p = vol(L) * integral r^{(a-delta)p - 1} dr
        let m = cs_mesh();
        let (a, delta, p) = (2.0, 0.5, 2.0);
        let s = SampledSection::from_radial(&m, |r| r.powf(a));
        let got = weighted_sobolev_norm(&m, &s, p, 0, delta).unwrap();
        let e = (a - delta) * p;
        let (r0, r1) = (0.25f64, *m.radial_nodes().last().unwrap());
        let exact = (S3_VOLUME * (r1.powf(e) - r0.powf(e)) / e).powf(1.0 / p);
        assert!(
            (got - exact).abs() < 5e-3 * exact,
            "quadrature {got} vs closed form {exact}"
        );
    }

    #[test]
    fn quadrature_stable_under_resolution_doubling() {
        let m = cs_mesh();
        let m2 = m.refined_resolution();
        for (p, k, delta, a) in [(2.0, 0, 0.5, 2.0), (2.0, 2, 0.5, 2.5), (3.0, 1, -0.5, 1.5)] {
            let s1 = SampledSection::from_radial(&m, |r| r.powf(a));
            let s2 = SampledSection::from_radial(&m2, |r| r.powf(a));
            let v1 = weighted_sobolev_norm(&m, &s1, p, k, delta).unwrap();
            let v2 = weighted_sobolev_norm(&m2, &s2, p, k, delta).unwrap();
            assert!((v1 - v2).abs() < 0.01 * v2, "p={p} k={k}: {v1} vs {v2}");
        }
    }

    #[test]
    fn divergence_detection() {
        let m = cs_mesh();
        // a > delta: finite and stable under halving r_min within 2%
        let finite = weighted_sobolev_norm_with_verdict(&m, &|r| r.powf(2.0), 2.0, 0, 0.5).unwrap();
        assert!(finite.finite);
        let last = finite.refinements[finite.refinements.len() - 1];
        let prev = finite.refinements[finite.refinements.len() - 2];
        assert!((last - prev).abs() < 0.02 * last);
        // a = delta: log-divergent
        let log_div =
            weighted_sobolev_norm_with_verdict(&m, &|r| r.powf(0.5), 2.0, 0, 0.5).unwrap();
        assert!(!log_div.finite);
        // a < delta: power divergence
        let pow_div =
            weighted_sobolev_norm_with_verdict(&m, &|r| r.powf(-1.0), 2.0, 0, 0.5).unwrap();
        assert!(!pow_div.finite);
        // AC mirror: finite iff a < delta
        let ac = ConeMesh::round_s3(EndType::AsymptoticallyConical, 1.0, 4.0, 32, 8).unwrap();
        let ac_fin =
            weighted_sobolev_norm_with_verdict(&ac, &|r| r.powf(-2.0), 2.0, 0, -0.5).unwrap();
        assert!(ac_fin.finite);
        let ac_div =
            weighted_sobolev_norm_with_verdict(&ac, &|r| r.powf(0.5), 2.0, 0, -0.5).unwrap();
        assert!(!ac_div.finite);
    }

    #[test]
    fn holder_norm_values() {
        let m = cs_mesh();
        // s = r^delta: the C0_delta part is exactly 1
        let delta = 0.7;
        let s = SampledSection::from_radial(&m, |r| r.powf(delta));
        let c0 = weighted_holder_norm(&m, &s, 0, 0.5, delta).unwrap();
        // seminorm of a smooth weight-compensated profile is small but
        // nonnegative; the sup part is exactly 1
        assert!(c0 >= 1.0 - 1e-12 && c0 < 1.2, "{c0}");
        // Lipschitz sample: seminorm bounded by Lipschitz constant * mesh factor
        let lip = SampledSection::from_radial(&m, |r| r);
        let h = weighted_holder_norm(&m, &lip, 0, 1.0, 0.0).unwrap();
        // alpha = 1, delta = 0: the seminorm compares the weighted profile
        // r^{0-0+1} * s = r^2, so the value is sup r + sup (r_a + r_b) over
        // adjacent pairs, bounded by the weighted Lipschitz constant 2 r_max
        let r = m.radial_nodes();
        let rmax = r.last().unwrap();
        let expected = rmax + r[r.len() - 1] + r[r.len() - 2];
        assert!((h - expected).abs() < 1e-9, "{h} vs {expected}");
        assert!(h - rmax <= 2.0 * rmax + 1e-9);
    }

    #[test]
    fn dt_family_matches_analytic_values() {
        for (n, tol) in [(1u32, 0.01), (10, 0.01), (100, 0.02)] {
            let rep = dt_family_report(n, 64.0).unwrap();
            let expect_df = 2.0 + 2.0 / (3.0 * n as f64);
            let expect_dist = 2.0 / (3.0 * n as f64);
            assert!(
                (rep.norm_df_sq - expect_df).abs() < tol * expect_df,
                "n={n}: {} vs {}",
                rep.norm_df_sq,
                expect_df
            );
            assert!(
                (rep.dist_to_char_sq - expect_dist).abs() < tol * expect_dist,
                "n={n}: {} vs {}",
                rep.dist_to_char_sq,
                expect_dist
            );
        }
        // the primitive norm grows without bound
        let n1 = dt_family_report(1, 64.0).unwrap().norm_f;
        let n10 = dt_family_report(10, 64.0).unwrap().norm_f;
        let n100 = dt_family_report(100, 64.0).unwrap().norm_f;
        assert!(n1 < n10 && n10 < n100);
        // grid must cover [-2n, 2n]
        assert!(dt_family_report(5, 1.5).is_err());
    }

    #[test]
    fn embedding_spotchecks() {
        let m = cs_mesh();
        let source = SpaceParams {
            p: 2.0,
            k: 0,
            delta: 0.5,
        };
        // CS: lowering the target weight keeps finiteness
        let target = SpaceParams {
            p: 2.0,
            k: 0,
            delta: 0.0,
        };
        let probes: Vec<f64> = (0..20).map(|i| -1.0 + 0.25 * i as f64).collect();
        let rep = embedding_spotcheck(&m, source, target, &probes).unwrap();
        assert!(rep.hypotheses_met);
        assert_eq!(rep.counterexamples, 0, "{:?}", rep.probes);
        // hypothesis-violating pair: raising the weight on a CS end
        let bad_target = SpaceParams {
            p: 2.0,
            k: 0,
            delta: 1.0,
        };
        let rep2 = embedding_spotcheck(&m, source, bad_target, &probes).unwrap();
        assert!(!rep2.hypotheses_met);
        assert!(rep2.probes.is_empty());
        // AC: mirrored condition, raising the weight is allowed
        let ac = ConeMesh::round_s3(EndType::AsymptoticallyConical, 1.0, 4.0, 32, 8).unwrap();
        let rep3 = embedding_spotcheck(
            &ac,
            SpaceParams {
                p: 2.0,
                k: 0,
                delta: -0.5,
            },
            SpaceParams {
                p: 2.0,
                k: 0,
                delta: 0.0,
            },
            &probes,
        )
        .unwrap();
        assert!(rep3.hypotheses_met);
        assert_eq!(rep3.counterexamples, 0);
        // integrability trade: p < pbar requires smoothness headroom
        assert!(!embedding_hypotheses(
            4,
            SpaceParams {
                p: 2.0,
                k: 0,
                delta: 0.5
            },
            SpaceParams {
                p: 4.0,
                k: 0,
                delta: 0.5
            },
            EndType::ConicallySingular,
        ));
        assert!(embedding_hypotheses(
            4,
            SpaceParams {
                p: 2.0,
                k: 1,
                delta: 0.5
            },
            SpaceParams {
                p: 4.0,
                k: 0,
                delta: 0.5
            },
            EndType::ConicallySingular,
        ));
    }

    #[test]
    fn duality_pairing_bound_on_probes() {
        // |∫ s t| <= ||s||_{L^p_delta} ||t||_{L^q_{-n-delta}} on radial probes
        let m = cs_mesh();
        let n = m.dim as f64;
        let (p, q) = (2.0, 2.0);
        let delta = 0.3;
        for (a, b) in [(1.0, 1.5), (2.0, 0.5), (0.8, 2.2)] {
            let s = SampledSection::from_radial(&m, |r| r.powf(a));
            let t = SampledSection::from_radial(&m, |r| r.powf(b));
            // plain pairing integral over the cone
            let mut pairing = 0.0;
            let radial = m.radial_nodes();
            for j in 0..radial.len() - 1 {
                let h = radial[j + 1] - radial[j];
                let f0 = radial[j].powf(a + b) * radial[j].powf(n - 1.0);
                let f1 = radial[j + 1].powf(a + b) * radial[j + 1].powf(n - 1.0);
                pairing += 0.5 * h * (f0 + f1) * m.link_volume();
            }
            let ns = weighted_sobolev_norm(&m, &s, p, 0, delta).unwrap();
            let nt = weighted_sobolev_norm(&m, &t, q, 0, -n - delta).unwrap();
            assert!(
                pairing.abs() <= ns * nt * (1.0 + 1e-9),
                "pairing {pairing} vs bound {}",
                ns * nt
            );
        }
    }
}
