//! The asymptotic parameter system: every parameter is a rational power of a
//! small `X = (ρa³)^m`, and each `f ≪ g` relation holds iff the exponent of
//! `f/g` in `X` is strictly positive. All margins are exact rationals.

mod dsl;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use dsl::parse_relations;

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `p/q`, or `p` for integers.
pub fn fmt_rational(r: &Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ser_rational<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(r))
}

fn ser_opt_rational<S: Serializer>(r: &Option<Rational64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_rational(r)),
        None => s.serialize_none(),
    }
}

/// A parameter `X^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerQuantity {
    pub name: String,
    #[serde(serialize_with = "ser_rational")]
    pub exponent: Rational64,
    pub note: String,
}

/// One multiplicative factor of a relation side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Quantity(String),
    /// `ρa³`, whose exponent in `X` is `1/m`.
    RhoA3,
    /// `R/a`; only comparable once concrete values are supplied.
    ROverA,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Monomial(pub Vec<(Factor, Rational64)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    fn with(mut self, f: Factor, p: Rational64) -> Self {
        self.0.push((f, p));
        self
    }

    fn has_r(&self) -> bool {
        self.0.iter().any(|(f, _)| *f == Factor::ROverA)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, (fac, p)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " * ")?;
            }
            let name = match fac {
                Factor::Quantity(n) => n.as_str(),
                Factor::RhoA3 => "(rho_a3)",
                Factor::ROverA => "(R/a)",
            };
            write!(f, "{name}")?;
            if *p != Rational64::from_integer(1) {
                write!(f, "^{}", fmt_rational(p))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    MuchLess,
    MuchGreater,
    LeqWithConstant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    /// Group label; several relations can share one (a chain `a ≪ b ≪ c`).
    pub group: String,
    pub lhs: Monomial,
    pub rhs: Monomial,
    pub kind: RelationKind,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            RelationKind::MuchLess => "<<",
            RelationKind::MuchGreater => ">>",
            RelationKind::LeqWithConstant => "<=C",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

impl Relation {
    fn new(group: &str, lhs: Monomial, kind: RelationKind, rhs: Monomial) -> Self {
        Self { group: group.to_owned(), lhs, rhs, kind }
    }
}

/// Concrete inputs needed by relations that involve `R/a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Concrete {
    pub rho_a3: f64,
    pub r_over_a: f64,
}

#[derive(Clone, Debug)]
pub struct System {
    /// `X = (ρa³)^m`.
    pub m: Rational64,
    pub kappa: Option<Rational64>,
    /// Regularity of the localisation function.
    pub big_m: u32,
    pub quantities: Vec<PowerQuantity>,
    pub relations: Vec<Relation>,
}

/// A κ just below ¼; every quantity of the standard system agrees with the
/// `κ → ¼⁻` limit.
pub fn kappa_near_quarter() -> Rational64 {
    q(1, 4) - q(1, 1_000_000)
}

/// `m = min{1/928, κ/11}`.
pub fn x_exponent(kappa: Rational64) -> Rational64 {
    q(1, 928).min(kappa / 11)
}

/// Smallest multiple of 4 strictly above `max{79, (11/12)κ⁻¹}`.
pub fn regularity(kappa: Rational64) -> u32 {
    let floor = Rational64::from_integer(79).max(q(11, 12) / kappa);
    let mut big_m = (floor.to_integer() as u32 / 4) * 4;
    while Rational64::from_integer(i64::from(big_m)) <= floor {
        big_m += 4;
    }
    big_m
}

fn base_quantities(m: Rational64) -> Vec<PowerQuantity> {
    let pq =
        |name: &str, e: Rational64, note: &str| PowerQuantity { name: name.into(), exponent: e, note: note.into() };
    let inv_m = m.recip();
    vec![
        pq("s", q(1, 1), "small"),
        pq("d", q(6, 1), "small box ratio"),
        pq("epsT", q(23, 4), "kinetic energy split"),
        pq("Kl", q(-3, 2), "box size ℓ = Kl (ρa)^(-1/2)"),
        pq("KB", q(-6, 1), "a priori bound"),
        pq("KN", q(-1, 1), "εN = KN^-1 (ρa³)^(1/2)"),
        pq("KR", q(-1, 1), "prefactor 𝒞 dropped"),
        pq("KH2", q(-13, 1), "momentum localisation"),
        pq("KH1", q(-14, 1), "high-momentum cut"),
        pq("KM", q(-46, 1), "excitation cap 𝓜^L = KM^-1 ρℓ³"),
        pq("epsN", q(1, 1) + inv_m / 2, "KN^-1 (ρa³)^(1/2)"),
        pq("rho_l3", q(-9, 2) - inv_m / 2, "ρℓ³ = Kl³ (ρa³)^(-1/2)"),
        pq("ML", q(46, 1) - q(9, 2) - inv_m / 2, "KM^-1 ρℓ³"),
    ]
}

fn name(n: &str) -> Factor {
    Factor::Quantity(n.to_owned())
}

fn mono(parts: &[(&str, Rational64)]) -> Monomial {
    Monomial(parts.iter().map(|(n, p)| (name(n), *p)).collect())
}

fn i(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn standard_relations(big_m: u32) -> Vec<Relation> {
    use RelationKind::{MuchGreater as Gg, MuchLess as Ll};
    let bm = i64::from(big_m);
    let rho = |p: Rational64| Monomial::one().with(Factor::RhoA3, p);
    let mut out = Vec::new();
    let mut push = |g: &str, l: Monomial, k: RelationKind, r: Monomial| out.push(Relation::new(g, l, k, r));

    for small in ["s", "d", "epsT"] {
        push("scales", mono(&[(small, i(1))]), Ll, Monomial::one());
    }
    for large in ["Kl", "KM", "KH1", "KH2", "KB", "KN", "KR"] {
        push("scales", Monomial::one(), Ll, mono(&[(large, i(1))]));
    }
    push("eT-dK", mono(&[("d", i(2)), ("Kl", i(2))]), Ll, mono(&[("epsT", i(1)), ("Kl", i(-2))]));
    push("eT-dK", mono(&[("epsT", i(1)), ("Kl", i(-2))]), Ll, mono(&[("epsT", i(1))]));
    push("eT-dK", mono(&[("epsT", i(1))]), Ll, mono(&[("s", i(1)), ("d", i(1)), ("Kl", i(1))]));
    push("sKl", mono(&[("s", i(1)), ("Kl", i(1))]), Gg, Monomial::one());
    push("sdKl-KB", mono(&[("s", i(1)), ("d", i(1)), ("Kl", i(1))]), Gg, mono(&[("KB", i(-1))]));
    push("disjoint", mono(&[("d", i(-2))]), Ll, mono(&[("KH2", i(1))]));
    push("disjoint", mono(&[("KH2", i(1))]), Ll, mono(&[("KH1", i(1))]));
    push("KH2-KM", mono(&[("Kl", i(4)), ("KH2", i(3))]), Ll, mono(&[("KM", i(1))]));
    push("KB-Kl", mono(&[("KB", i(3)), ("Kl", i(2))]), Ll, rho(q(-1, 4)));
    push("KB-Kl-KM", mono(&[("KM", i(1)), ("KB", i(3)), ("Kl", i(2))]), Ll, rho(q(-1, 2)));
    push("constants", mono(&[("KN", q(1, 2)), ("Kl", i(1)), ("KB", i(3)), ("KH1", i(3))]), Ll, rho(q(-1, 4)));
    push(
        "localisation-error",
        mono(&[("KM", i(1)), ("KR", q(1, 2)), ("KN", q(1, 8)), ("KH1", q(3, 4)), ("KB", q(3, 4))]),
        Ll,
        mono(&[("Kl", q(5, 2))]).with(Factor::RhoA3, q(-1, 16)),
    );
    push("small-boxes", mono(&[("Kl", i(1)), ("d", i(1))]), Gg, rho(q(1, 6)));
    push(
        "range",
        Monomial::one().with(Factor::ROverA, i(1)),
        Ll,
        mono(&[("d", i(1)), ("Kl", i(1))]).with(Factor::RhoA3, q(-1, 2)),
    );
    // ρaR² ≪ εR ≪ Kl⁻²KB⁻³ ≪ 1 with εR the geometric mean of its neighbours
    let rho_ar2 = rho(i(1)).with(Factor::ROverA, i(2));
    let eps_r = rho(q(1, 2)).with(Factor::ROverA, i(1)).with(name("Kl"), i(-1)).with(name("KB"), q(-3, 2));
    push("epsR", rho_ar2, Ll, eps_r.clone());
    push("epsR", eps_r, Ll, mono(&[("Kl", i(-2)), ("KB", i(-3))]));
    push("epsR", mono(&[("Kl", i(-2)), ("KB", i(-3))]), Ll, Monomial::one());
    push("d-s", mono(&[("d", i(-5)), ("s", i(bm - 2))]), Ll, Monomial::one());
    let km_inv = mono(&[("KM", i(-1))]);
    push("fourier-tails", mono(&[("d", i(2 * bm))]), Ll, km_inv.clone());
    push("fourier-tails", mono(&[("KH2", q(-bm, 2))]), Ll, km_inv.clone());
    push("fourier-tails", mono(&[("d", i(-4 * bm)), ("KH2", i(-2 * bm))]), Ll, km_inv.clone());
    push("fourier-tails", mono(&[("KH2", i(bm)), ("KH1", i(-bm))]), Ll, km_inv);
    push("dM", mono(&[("d", i(2 * bm))]), Ll, rho(q(1, 2)));
    push("bogoliubov-error", mono(&[("KH2", i(4 - bm)), ("Kl", q(3, 2))]), Ll, rho(q(3, 4)));
    out
}

/// Consequences that must follow from the standard system.
pub fn derived_relations() -> Vec<Relation> {
    use RelationKind::MuchLess as Ll;
    vec![
        Relation::new("derived", mono(&[("Kl", i(1))]), Ll, mono(&[("s", i(1)), ("d", i(-1))])),
        Relation::new("derived", mono(&[("s", i(1)), ("d", i(-1))]), Ll, mono(&[("d", i(-1))])),
        Relation::new("derived", mono(&[("d", i(-1))]), Ll, mono(&[("d", i(-2))])),
        Relation::new("derived", mono(&[("d", i(-2))]), Ll, mono(&[("KH2", i(1))])),
        Relation::new("derived", mono(&[("epsT", i(1)), ("d", i(-2)), ("s", i(-2))]), Ll, mono(&[("KH1", i(2))])),
    ]
}

/// Quantity table and full relation list for `0 < κ < ¼`.
pub fn standard_system(kappa: Rational64) -> Result<System> {
    if kappa <= i(0) || kappa >= q(1, 4) {
        return Err(Error::Precondition(format!("κ must lie in (0, 1/4), got {}", fmt_rational(&kappa))));
    }
    let m = x_exponent(kappa);
    let big_m = regularity(kappa);
    Ok(System { m, kappa: Some(kappa), big_m, quantities: base_quantities(m), relations: standard_relations(big_m) })
}

impl System {
    /// A system with the standard quantity table at exponent `m` and the
    /// given relations.
    pub fn custom(m: Rational64, relations: Vec<Relation>) -> Self {
        Self { m, kappa: None, big_m: 0, quantities: base_quantities(m), relations }
    }

    pub fn exponent_of(&self, name: &str) -> Option<Rational64> {
        self.quantities.iter().find(|p| p.name == name).map(|p| p.exponent)
    }

    /// Replace the exponent of one quantity.
    pub fn with_exponent(mut self, name: &str, exponent: Rational64) -> Result<Self> {
        let q = self
            .quantities
            .iter_mut()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownQuantity(name.to_owned()))?;
        q.exponent = exponent;
        Ok(self)
    }

    /// Number of distinct relation groups.
    pub fn group_count(&self) -> usize {
        let mut g: Vec<&str> = self.relations.iter().map(|r| r.group.as_str()).collect();
        g.sort_unstable();
        g.dedup();
        g.len()
    }

    fn exact_exponent(&self, side: &Monomial, m: Rational64) -> Result<Rational64> {
        side.0.iter().try_fold(i(0), |acc, (f, p)| {
            let e = match f {
                Factor::Quantity(n) => self.exponent_of(n).ok_or_else(|| Error::UnknownQuantity(n.clone()))?,
                Factor::RhoA3 => m.recip(),
                Factor::ROverA => unreachable!("R/a has no exact exponent"),
            };
            Ok(acc + e * p)
        })
    }

    fn float_exponent(&self, side: &Monomial, m: Rational64, c: Concrete) -> Result<f64> {
        let ln_x = c.rho_a3.ln() * ratio_f64(m);
        side.0.iter().try_fold(0.0, |acc, (f, p)| {
            let e = match f {
                Factor::Quantity(n) => ratio_f64(self.exponent_of(n).ok_or_else(|| Error::UnknownQuantity(n.clone()))?),
                Factor::RhoA3 => ratio_f64(m.recip()),
                Factor::ROverA => c.r_over_a.ln() / ln_x,
            };
            Ok(acc + e * ratio_f64(*p))
        })
    }
}

fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Margin {
    #[serde(serialize_with = "ser_rational")]
    Exact(Rational64),
    /// Involves `R/a`; evaluated at concrete inputs.
    Approximate(f64),
    /// Involves `R/a` and no concrete inputs were given.
    Conditional,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub group: String,
    pub relation: String,
    pub kind: RelationKind,
    #[serde(serialize_with = "ser_opt_rational")]
    pub lhs_exponent: Option<Rational64>,
    #[serde(serialize_with = "ser_opt_rational")]
    pub rhs_exponent: Option<Rational64>,
    pub margin: Margin,
    /// `None` for conditional relations.
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemReport {
    #[serde(serialize_with = "ser_rational")]
    pub m: Rational64,
    pub big_m: u32,
    pub relations: Vec<RelationReport>,
    #[serde(serialize_with = "ser_opt_rational")]
    pub min_margin: Option<Rational64>,
    pub min_margin_relation: Option<String>,
    pub failing: Vec<String>,
    pub conditional: usize,
    pub pass: bool,
}

impl SystemReport {
    /// Pass only if every exact margin also clears `floor`.
    pub fn passes_with_floor(&self, floor: Rational64) -> bool {
        self.pass && self.min_margin.is_none_or(|m| m >= floor)
    }
}

/// Margins of every relation at `X = (ρa³)^m`.
pub fn check(system: &System, m: Rational64, concrete: Option<Concrete>) -> Result<SystemReport> {
    if m <= i(0) {
        return Err(Error::Precondition("m must be positive".into()));
    }
    let mut reports = Vec::with_capacity(system.relations.len());
    for rel in &system.relations {
        let (small, large) = match rel.kind {
            RelationKind::MuchGreater => (&rel.rhs, &rel.lhs),
            _ => (&rel.lhs, &rel.rhs),
        };
        let strict = rel.kind != RelationKind::LeqWithConstant;
        let (lhs_e, rhs_e, margin, pass) = if small.has_r() || large.has_r() {
            match concrete {
                Some(c) => {
                    let mg = system.float_exponent(small, m, c)? - system.float_exponent(large, m, c)?;
                    (None, None, Margin::Approximate(mg), Some(if strict { mg > 0.0 } else { mg >= 0.0 }))
                }
                None => (None, None, Margin::Conditional, None),
            }
        } else {
            let (a, b) = (system.exact_exponent(&rel.lhs, m)?, system.exact_exponent(&rel.rhs, m)?);
            let mg = match rel.kind {
                RelationKind::MuchGreater => b - a,
                _ => a - b,
            };
            (Some(a), Some(b), Margin::Exact(mg), Some(if strict { mg > i(0) } else { mg >= i(0) }))
        };
        reports.push(RelationReport {
            group: rel.group.clone(),
            relation: rel.to_string(),
            kind: rel.kind,
            lhs_exponent: lhs_e,
            rhs_exponent: rhs_e,
            margin,
            pass,
        });
    }
    let mut min: Option<(Rational64, String)> = None;
    for r in &reports {
        if let Margin::Exact(mg) = r.margin {
            if r.kind != RelationKind::LeqWithConstant && min.as_ref().is_none_or(|(best, _)| mg < *best) {
                min = Some((mg, r.relation.clone()));
            }
        }
    }
    let failing: Vec<String> = reports.iter().filter(|r| r.pass == Some(false)).map(|r| r.relation.clone()).collect();
    let conditional = reports.iter().filter(|r| r.pass.is_none()).count();
    Ok(SystemReport {
        m,
        big_m: system.big_m,
        pass: failing.is_empty(),
        min_margin: min.as_ref().map(|x| x.0),
        min_margin_relation: min.map(|x| x.1),
        failing,
        conditional,
        relations: reports,
    })
}

/// Numerical values of the parameters and the scales derived from them.
#[derive(Clone, Debug, Serialize)]
pub struct Evaluation {
    pub rho_a3: f64,
    pub x: f64,
    pub quantities: BTreeMap<String, f64>,
    pub ell: f64,
    pub eps_n: f64,
    pub excitation_cap: f64,
    pub eps_r: f64,
    pub rho_ell3: f64,
}

pub fn evaluate(system: &System, rho_a3: f64, a: f64, r: f64) -> Result<Evaluation> {
    if !(rho_a3 > 0.0 && rho_a3 < 1.0) || !(a > 0.0) || !(r >= 0.0) {
        return Err(Error::Precondition(format!("need 0 < ρa³ < 1, a > 0, R ≥ 0 (got {rho_a3}, {a}, {r})")));
    }
    let x = rho_a3.powf(ratio_f64(system.m));
    let quantities: BTreeMap<String, f64> =
        system.quantities.iter().map(|p| (p.name.clone(), x.powf(ratio_f64(p.exponent)))).collect();
    let get = |n: &str| quantities.get(n).copied().ok_or_else(|| Error::UnknownQuantity(n.to_owned()));
    let (kl, kn, km, kb) = (get("Kl")?, get("KN")?, get("KM")?, get("KB")?);
    let sqrt = rho_a3.sqrt();
    let rho_ell3 = kl.powi(3) / sqrt;
    Ok(Evaluation {
        rho_a3,
        x,
        ell: kl * a / sqrt,
        eps_n: sqrt / kn,
        excitation_cap: rho_ell3 / km,
        eps_r: (rho_a3 * (r / a).powi(2) / (kl * kl * kb.powi(3))).sqrt(),
        rho_ell3,
        quantities,
    })
}
