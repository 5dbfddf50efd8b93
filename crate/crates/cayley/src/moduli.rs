//! Expected-dimension calculators for Cayley moduli spaces: the compact
//! index formula, its asymptotically conical and conically singular
//! variants, rate-crossing corrections and the gluing additivity check.
//!
//! Link invariants (the η-type constants) are never computed here; only
//! combinations pinned by worked examples enter, stored as exact rationals
//! so that half-integer constants stay exact and every final index is
//! asserted integral.

use crate::dirac::{RateEntry, RateSpectrum};
use crate::scalar::{rat, Rat, Scalar};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Topological inputs to the index formulas.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TopologyData {
    /// Signature σ(N).
    pub sigma: i64,
    /// Euler characteristic χ(N).
    pub chi: i64,
    #[serde(default)]
    pub b1: u64,
    #[serde(default)]
    pub b2_minus: u64,
    /// Self-intersection numbers keyed by boundary homotopy class label.
    #[serde(default)]
    pub self_intersection: BTreeMap<String, i64>,
    /// Dimension of the structure family 𝒮.
    #[serde(default)]
    pub dim_s: u64,
    /// Dimension of the cone configuration family ℱ (conically singular).
    #[serde(default)]
    pub dim_f: u64,
}

impl TopologyData {
    pub fn self_intersection(&self, class: &str) -> Result<i64> {
        self.self_intersection
            .get(class)
            .copied()
            .ok_or_else(|| Error::invalid(format!("no self-intersection for class {class:?}")))
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(v.clone())
            .map_err(|e| Error::invalid(format!("bad topology JSON: {e}")))
    }
}

/// Per-link constants for the conical index formulas. The only analytic
/// inputs are the combined constant η̃(L) − dim M(L) (an exact rational,
/// possibly half-integral) and, when known, the link moduli dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinkConstants {
    pub name: String,
    /// η̃(L) − dim M(L) as an exact rational, serialized as "p/q".
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_opt_rat",
        deserialize_with = "de_opt_rat"
    )]
    pub eta_tilde_minus_dim_g2: Option<Rat>,
    /// dim M(L): the link's associative moduli dimension, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_g2_moduli: Option<i64>,
    /// Critical-rate spectrum of the cone over this link, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<RateSpectrum>,
    /// Euler characteristic of the link (0 for closed odd dimension).
    #[serde(default)]
    pub chi_link: i64,
}

fn ser_opt_rat<S: serde::Serializer>(
    v: &Option<Rat>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

fn de_opt_rat<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Option<Rat>, D::Error> {
    let raw: Option<serde_json::Value> = Option::deserialize(d)?;
    match raw {
        None => Ok(None),
        Some(v) => {
            use crate::forms::JsonScalar;
            Rat::from_json(&v)
                .map(Some)
                .map_err(|e| serde::de::Error::custom(e.to_string()))
        }
    }
}

impl LinkConstants {
    pub fn combined(&self) -> Result<Rat> {
        self.eta_tilde_minus_dim_g2
            .clone()
            .ok_or_else(|| Error::MissingLinkConstants(self.name.clone()))
    }

    pub fn dim_g2(&self) -> Result<i64> {
        self.dim_g2_moduli
            .ok_or_else(|| Error::MissingLinkConstants(format!("{} (moduli dim)", self.name)))
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(v.clone())
            .map_err(|e| Error::invalid(format!("bad link constants JSON: {e}")))
    }
}

/// Built-in constants table keyed by link name.
pub fn builtin_link_constants(name: &str) -> Option<LinkConstants> {
    match name {
        // round 3-sphere link of a flat plane: combined constant 4 1/2
        "S3-round" => Some(LinkConstants {
            name: name.into(),
            eta_tilde_minus_dim_g2: Some(rat(9, 2)),
            dim_g2_moduli: None,
            spectrum: None,
            chi_link: 0,
        }),
        // link of the quadric cone x^2+y^2+z^2 = 0 with its rate spectrum
        "quadric-link" => Some(LinkConstants {
            name: name.into(),
            eta_tilde_minus_dim_g2: None,
            dim_g2_moduli: Some(22),
            spectrum: Some(
                RateSpectrum::new(
                    vec![
                        RateEntry {
                            rate: -1.0,
                            multiplicity: 2,
                        },
                        RateEntry {
                            rate: 0.0,
                            multiplicity: 8,
                        },
                        RateEntry {
                            rate: 1.0,
                            multiplicity: 22,
                        },
                        RateEntry {
                            rate: 5f64.sqrt() - 1.0,
                            multiplicity: 6,
                        },
                    ],
                    (-2.0, 2.0),
                )
                .expect("static table"),
            ),
            chi_link: 0,
        }),
        _ => None,
    }
}

fn require_integer(value: Rat, what: &str) -> Result<i64> {
    if value.denom() == &num_bigint::BigInt::from(1) {
        use num_traits::ToPrimitive;
        value
            .numer()
            .to_i64()
            .ok_or_else(|| Error::invalid(format!("{what} out of i64 range")))
    } else {
        Err(Error::Parity(format!("{what} is not an integer: {value}")))
    }
}

fn half(n: i64) -> Rat {
    rat(n, 2)
}

/// Compact index: ½(σ + χ) − [N]·[N] + dim 𝒮. Errors when σ + χ is odd.
pub fn index_compact(t: &TopologyData, class: &str) -> Result<i64> {
    if (t.sigma + t.chi).rem_euclid(2) != 0 {
        return Err(Error::Parity(format!(
            "sigma + chi = {} must be even",
            t.sigma + t.chi
        )));
    }
    let v = half(t.sigma + t.chi) - Rat::from_int(t.self_intersection(class)?)
        + Rat::from_int(t.dim_s as i64);
    require_integer(v, "compact index")
}

/// Asymptotically conical index at rates below the top critical rate:
/// ½(σ + χ) − [A]·[A] + Σ (η̃ᵢ − dim Mᵢ), one combined constant per end.
pub fn index_ac(t: &TopologyData, links: &[LinkConstants], class: &str) -> Result<i64> {
    if links.is_empty() {
        return Err(Error::MissingLinkConstants("no ends supplied".into()));
    }
    let mut v = half(t.sigma + t.chi) - Rat::from_int(t.self_intersection(class)?);
    for lc in links {
        v = v + lc.combined()?;
    }
    require_integer(v, "AC index")
}

/// Special-Lagrangian reduction of the AC index:
/// ½(σ − χ) + Σ (η̃ᵢ − dim Mᵢ). The intersection term is traded for χ via
/// the Lagrangian normal bundle.
pub fn index_ac_sl(t: &TopologyData, links: &[LinkConstants]) -> Result<i64> {
    if links.is_empty() {
        return Err(Error::MissingLinkConstants("no ends supplied".into()));
    }
    let mut v = half(t.sigma - t.chi);
    for lc in links {
        v = v + lc.combined()?;
    }
    require_integer(v, "AC special-Lagrangian index")
}

/// Index jump across a rate interval: the sum of multiplicities strictly
/// between the endpoints. Errors when an endpoint is itself critical.
pub fn rate_crossing(spec: &RateSpectrum, d1: f64, d2: f64) -> Result<i64> {
    if d1 >= d2 {
        return Err(Error::invalid(format!("need d1 < d2, got {d1} >= {d2}")));
    }
    const EPS: f64 = 1e-9;
    for e in &spec.entries {
        if (e.rate - d1).abs() < EPS {
            return Err(Error::CriticalRate(d1));
        }
        if (e.rate - d2).abs() < EPS {
            return Err(Error::CriticalRate(d2));
        }
    }
    Ok(spec
        .entries
        .iter()
        .filter(|e| e.rate > d1 && e.rate < d2)
        .map(|e| e.multiplicity as i64)
        .sum())
}

/// Transport an index along a rate change: the index grows with the rate,
/// by the total multiplicity crossed.
pub fn index_with_rate(
    base_index: i64,
    base_rate: f64,
    spec: &RateSpectrum,
    target_rate: f64,
) -> Result<i64> {
    if (base_rate - target_rate).abs() < 1e-12 {
        return Ok(base_index);
    }
    if base_rate < target_rate {
        Ok(base_index + rate_crossing(spec, base_rate, target_rate)?)
    } else {
        Ok(base_index - rate_crossing(spec, target_rate, base_rate)?)
    }
}

/// Conically singular index:
/// ½(σ + χ) − [N]·[N] − Σ (η(Lᵢ) + T([uᵢ])) + dim ℱ, where the per-link
/// η + T is reconstructed as (η̃ − dim M) + dim M and therefore requires
/// both stored constants.
pub fn index_cs(t: &TopologyData, links: &[LinkConstants], class: &str) -> Result<i64> {
    if links.is_empty() {
        return Err(Error::MissingLinkConstants(
            "no singular points supplied".into(),
        ));
    }
    let mut v = half(t.sigma + t.chi) - Rat::from_int(t.self_intersection(class)?)
        + Rat::from_int(t.dim_f as i64);
    for lc in links {
        let eta_plus_t = lc.combined()? + Rat::from_int(lc.dim_g2()?);
        v = v - eta_plus_t;
    }
    require_integer(v, "CS index")
}

/// An index value with unevaluated per-link η-terms: value = constant +
/// Σ coeff·(η(L)+T([u])). Used to verify that gluing cancels the analytic
/// constants without ever knowing them.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicIndex {
    pub constant: Rat,
    pub eta_coefficients: BTreeMap<String, i64>,
}

impl SymbolicIndex {
    fn new(constant: Rat) -> Self {
        SymbolicIndex {
            constant,
            eta_coefficients: BTreeMap::new(),
        }
    }

    fn with_eta(mut self, link: &str, coeff: i64) -> Self {
        *self.eta_coefficients.entry(link.to_string()).or_insert(0) += coeff;
        self.eta_coefficients.retain(|_, c| *c != 0);
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant = out.constant + other.constant.clone();
        for (k, c) in &other.eta_coefficients {
            *out.eta_coefficients.entry(k.clone()).or_insert(0) += c;
        }
        out.eta_coefficients.retain(|_, c| *c != 0);
        out
    }

    pub fn is_numeric(&self) -> bool {
        self.eta_coefficients.is_empty()
    }
}

/// AC index at a rate above the link-moduli rate, symbolically:
/// ½(σ+χ) − [A]·[A] + Σ (η + T); the combined constant plus the moduli
/// dimension recombine into the bare η-term.
pub fn index_ac_above_symbolic(
    t: &TopologyData,
    links: &[LinkConstants],
    class: &str,
) -> Result<SymbolicIndex> {
    let mut s =
        SymbolicIndex::new(half(t.sigma + t.chi) - Rat::from_int(t.self_intersection(class)?));
    for lc in links {
        s = s.with_eta(&lc.name, 1);
    }
    Ok(s)
}

/// CS index with points and cones fixed, symbolically:
/// ½(σ+χ) − [N]·[N] − Σ (η + T).
pub fn index_cs_fix_symbolic(
    t: &TopologyData,
    links: &[LinkConstants],
    class: &str,
) -> Result<SymbolicIndex> {
    let mut s =
        SymbolicIndex::new(half(t.sigma + t.chi) - Rat::from_int(t.self_intersection(class)?));
    for lc in links {
        s = s.with_eta(&lc.name, -1);
    }
    Ok(s)
}

/// Report of the gluing additivity check.
#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub lhs: i64,
    pub rhs: i64,
    pub equal: bool,
    /// True when the per-link η-terms cancelled between the two pieces.
    pub eta_cancelled: bool,
}

/// Verify that the conical indices glue: ind(AC at rate μ) + ind(CS fixed)
/// equals the compact index of the glued manifold computed through σ/χ and
/// intersection additivity. Links must have vanishing Euler characteristic
/// and the class labels must match on both sides.
pub fn additivity_check(
    t_cs: &TopologyData,
    t_ac: &TopologyData,
    link: &LinkConstants,
    class: &str,
) -> Result<AdditivityReport> {
    if link.chi_link != 0 {
        return Err(Error::invalid(format!(
            "link {} has nonzero Euler characteristic {}; gluing requires 0",
            link.name, link.chi_link
        )));
    }
    if !t_cs.self_intersection.contains_key(class) || !t_ac.self_intersection.contains_key(class) {
        return Err(Error::invalid(format!(
            "class label {class:?} must be present on both sides"
        )));
    }
    let links = [link.clone()];
    let ac = index_ac_above_symbolic(t_ac, &links, class)?;
    let cs = index_cs_fix_symbolic(t_cs, &links, class)?;
    let sum = ac.add(&cs);
    let eta_cancelled = sum.is_numeric();
    if !eta_cancelled {
        return Err(Error::invalid(
            "link constants failed to cancel; incompatible end data",
        ));
    }
    let lhs = require_integer(sum.constant, "glued index (piecewise)")?;
    let glued = TopologyData {
        sigma: t_cs.sigma + t_ac.sigma,
        chi: t_cs.chi + t_ac.chi,
        b1: 0,
        b2_minus: 0,
        self_intersection: BTreeMap::from([(
            class.to_string(),
            t_cs.self_intersection(class)? + t_ac.self_intersection(class)?,
        )]),
        dim_s: 0,
        dim_f: 0,
    };
    let rhs = index_compact(&glued, class)?;
    Ok(AdditivityReport {
        lhs,
        rhs,
        equal: lhs == rhs,
        eta_cancelled,
    })
}

/// Lower bound for the obstruction space of a compact special Lagrangian:
/// b₂⁻ + 1.
pub fn obstruction_bound_sl(t: &TopologyData) -> i64 {
    t.b2_minus as i64 + 1
}
