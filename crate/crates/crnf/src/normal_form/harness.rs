//! Observed constants of the a priori, product, composition, remainder and
//! homotopy estimates over seeded ensembles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{gauge_transverse, transverse_contact_field};
use crate::contact_fields::{complex_contact_from_f, contact_from_generating, v_field};
use crate::contact_flow::{composition_term, e_remainder_with, pullback_deformation, ContactDiffeo, DeformationTensor, FlowConfig};
use crate::cr_operators::{FieldForm01, OperatorSuite, ScalarForm01};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Exec};
use crate::random;
use crate::C64;

/// Ensemble settings shared by every family.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub degrees: Vec<usize>,
    pub seeds: Vec<u64>,
    pub s_min: usize,
    pub s_max: usize,
    /// Polynomial degree of all random inputs.
    pub input_degree: usize,
    /// Γ^6 size of random fields and deformations.
    pub size: f64,
    pub flow: FlowConfig,
    pub exec: Exec,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            degrees: vec![6, 8, 10],
            seeds: (0..8).collect(),
            s_min: 1,
            s_max: 6,
            input_degree: 4,
            size: 5e-3,
            flow: FlowConfig::default(),
            exec: Exec::default(),
        }
    }
}

const SIZE_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Product,
    Composition,
    Remainder,
    RemainderLipschitz,
    ScalarHomotopy,
    FieldHomotopy,
    AprioriX,
    AprioriY,
    AprioriPsi,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Product,
        Family::Composition,
        Family::Remainder,
        Family::RemainderLipschitz,
        Family::ScalarHomotopy,
        Family::FieldHomotopy,
        Family::AprioriX,
        Family::AprioriY,
        Family::AprioriPsi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Product => "product",
            Family::Composition => "composition",
            Family::Remainder => "remainder",
            Family::RemainderLipschitz => "remainder_lipschitz",
            Family::ScalarHomotopy => "scalar_homotopy",
            Family::FieldHomotopy => "field_homotopy",
            Family::AprioriX => "apriori_x",
            Family::AprioriY => "apriori_y",
            Family::AprioriPsi => "apriori_psi",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown estimate family {s}")))
    }
}

/// One observed ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateRow {
    pub family: &'static str,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: usize,
    pub ratio: f64,
}

/// One row of the a priori table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriRow {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: usize,
    #[serde(rename = "ratio_X")]
    pub ratio_x: f64,
    #[serde(rename = "ratio_Y")]
    pub ratio_y: f64,
    pub ratio_psi: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    num / den
}

fn s_range(cfg: &HarnessConfig) -> std::ops::RangeInclusive<usize> {
    cfg.s_min.max(1)..=cfg.s_max
}

/// Ratios of one family for one seed at one N.
fn instance(ops: &OperatorSuite, family: Family, seed: u64, cfg: &HarnessConfig) -> Result<Vec<(usize, f64)>> {
    let sp = &ops.space;
    let d = cfg.input_degree;
    let mut rng = random::rng(seed ^ (family as u64) << 32);
    let scaled = |f: crate::SpectralScalar| {
        let n = sp.fs_norm(&f, SIZE_ORDER);
        f.scale_re(cfg.size / n)
    };
    let mut out = Vec::new();
    match family {
        Family::Product => {
            let f = random::scalar(sp, d, &mut rng);
            let g = random::scalar(sp, d, &mut rng);
            let fg = sp.multiply(&f, &g);
            for s in s_range(cfg) {
                let den = sp.fs_norm(&f, s) * sp.fs_norm(&g, s - 1) + sp.fs_norm(&f, s - 1) * sp.fs_norm(&g, s);
                out.push((s, ratio(sp.fs_norm(&fg, s), den)));
            }
        }
        Family::Composition => {
            let phi = scaled(random::scalar(sp, d, &mut rng));
            let x = contact_from_generating(ops, &random::real_scalar(sp, d, &mut rng))?;
            let x = x.scale(cfg.size / x.norm(ops, SIZE_ORDER));
            let f = ContactDiffeo::flow(sp, &x, cfg.flow)?;
            let (pc, _) = composition_term(sp, &DeformationTensor::new(phi.clone()), &f);
            for s in s_range(cfg) {
                let (p, p1) = (sp.fs_norm(&phi, s), sp.fs_norm(&phi, s - 1));
                let den = p + p * x.norm(ops, s - 1) + p1 * x.norm(ops, s);
                out.push((s, ratio(sp.fs_norm(&pc.phi, s), den)));
            }
        }
        Family::Remainder => {
            let phi = DeformationTensor::new(scaled(random::scalar(sp, d, &mut rng)));
            let x = contact_from_generating(ops, &random::real_scalar(sp, d, &mut rng))?;
            let x = x.scale(cfg.size / x.norm(ops, SIZE_ORDER));
            let f = ContactDiffeo::flow(sp, &x, cfg.flow)?;
            let e = e_remainder_with(ops, &f, &x, &f, &phi)?;
            let (pc, _) = composition_term(sp, &phi, &f);
            for s in s_range(cfg) {
                let den = (x.norm(ops, s) + sp.fs_norm(&pc.phi, s)) * x.norm(ops, s + 1);
                out.push((s, ratio(ops.norm_form(&e, s), den)));
            }
        }
        Family::RemainderLipschitz => {
            let phi = DeformationTensor::new(scaled(random::scalar(sp, d, &mut rng)));
            let mut field = || -> Result<crate::contact_fields::ContactField> {
                let x = contact_from_generating(ops, &random::real_scalar(sp, d, &mut rng))?;
                Ok(x.scale(cfg.size / x.norm(ops, SIZE_ORDER)))
            };
            let (x1, x2, x0) = (field()?, field()?, field()?);
            let f0 = ContactDiffeo::flow(sp, &x0, cfg.flow)?;
            let f1 = ContactDiffeo::flow(sp, &x1, cfg.flow)?;
            let f2 = ContactDiffeo::flow(sp, &x2, cfg.flow)?;
            let e1 = e_remainder_with(ops, &f1, &x1, &f0, &phi)?;
            let e2 = e_remainder_with(ops, &f2, &x2, &f0, &phi)?;
            let (pc, _) = composition_term(sp, &phi, &f0);
            let dx = x1.hol().sub(&x2.hol());
            for s in s_range(cfg) {
                let n = |v: &crate::contact_fields::ContactField, k: usize| v.norm(ops, k);
                let (dxs, dxs1) = (ops.norm_field(&dx, s), ops.norm_field(&dx, s + 1));
                let den = (n(&x1, s + 1) + n(&x2, s + 1)) * dxs
                    + (n(&x1, s) + n(&x2, s)) * dxs1
                    + 2.0 * sp.fs_norm(&pc.phi, s) * dxs1;
                out.push((s, ratio(ops.norm_form(&e1.sub(&e2), s), den)));
            }
        }
        Family::ScalarHomotopy => {
            let a = ScalarForm01 { a: random::scalar(sp, d, &mut rng) };
            let pa = ops.p_sc(&a);
            for s in s_range(cfg) {
                out.push((s, ratio(sp.fs_norm(&pa, s), sp.fs_norm(&a.a, s + 1))));
            }
        }
        Family::FieldHomotopy => {
            let phi = FieldForm01::horizontal(random::scalar(sp, d, &mut rng));
            let pp = ops.cal_p(&phi);
            for s in s_range(cfg) {
                out.push((s, ratio(ops.norm_field(&pp, s + 1), ops.norm_form(&phi, s))));
            }
        }
        Family::AprioriX | Family::AprioriY | Family::AprioriPsi => {
            unreachable!("a priori families come from apriori_instance")
        }
    }
    Ok(out)
}

/// Forward-constructed solved instance with a nonzero defect μ; returns
/// rows (s, ratio_X, ratio_Y, ratio_psi).
fn apriori_instance(ops: &OperatorSuite, seed: u64, cfg: &HarnessConfig) -> Result<Vec<(usize, f64, f64, f64)>> {
    let sp = &ops.space;
    let d = cfg.input_degree;
    let mut rng = random::rng(seed);
    let x = transverse_contact_field(ops, d, SIZE_ORDER, cfg.size, &mut rng)?;
    let r = sp.real_part(&random::scalar_on(sp, &mut rng, |l| gauge_transverse(l) && l.degree() <= d));
    let mut y = sp.zero();
    for (l, rg) in sp.basis.blocks.iter().enumerate() {
        for (i, k) in rg.clone().enumerate() {
            y.coeffs[k] = r.coeffs[k] / (C64::new(1.0, 0.0) + ops.box_b.blocks[l][(i, i)]);
        }
    }
    let y = y.scale_re(cfg.size / complex_contact_from_f(ops, &y).norm(ops, SIZE_ORDER));
    let yf = v_field(ops, &y);
    let psi = ops.cal_q(&FieldForm01::horizontal(random::scalar(sp, d, &mut rng))).q;
    let psi = psi.scale_re(cfg.size / sp.fs_norm(&psi, SIZE_ORDER));
    let mu0 = random::scalar(sp, d, &mut rng);
    let mu0 = mu0.scale_re(0.2 * cfg.size / sp.fs_norm(&mu0, SIZE_ORDER));
    let target = ops.dbar_field(&yf.y.field).q.scale(C64::new(0.0, 1.0)).add(&psi).add(&mu0);
    let inverse = ContactDiffeo::flow(sp, &x.scale(-1.0), cfg.flow)?;
    let (phi, _) = pullback_deformation(sp, &inverse, &DeformationTensor::new(target))?;
    let fx = ContactDiffeo::flow(sp, &x, cfg.flow)?;
    let (pulled, _) = pullback_deformation(sp, &fx, &phi)?;
    let mu = pulled.phi.sub(&ops.dbar_field(&yf.y.field).q.scale(C64::new(0.0, 1.0))).sub(&psi);
    Ok(s_range(cfg)
        .map(|s| {
            let den = sp.fs_norm(&phi.phi, s + 2) + sp.fs_norm(&mu, s + 2);
            (s, x.norm(ops, s + 3) / den, yf.y.norm(ops, s + 3) / den, sp.fs_norm(&psi, s + 2) / den)
        })
        .collect())
}

/// The a priori table over every (N, seed, s).
pub fn apriori_harness(cfg: &HarnessConfig) -> Result<Vec<AprioriRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.degrees {
        let ops = OperatorSuite::shared(n);
        let per_seed = map_indexed(cfg.exec, cfg.seeds.len(), |i| apriori_instance(&ops, cfg.seeds[i], cfg));
        for (i, res) in per_seed.into_iter().enumerate() {
            for (s, ratio_x, ratio_y, ratio_psi) in res? {
                rows.push(AprioriRow { seed: cfg.seeds[i], n, s, ratio_x, ratio_y, ratio_psi });
            }
        }
    }
    Ok(rows)
}

/// Observed ratios of every family (the a priori table flattened into three families).
pub fn estimate_harness(families: &[Family], cfg: &HarnessConfig) -> Result<Vec<EstimateRow>> {
    let mut rows = Vec::new();
    let wants = |f: Family| families.contains(&f);
    for &fam in families.iter().filter(|f| !matches!(f, Family::AprioriX | Family::AprioriY | Family::AprioriPsi)) {
        for &n in &cfg.degrees {
            let ops = OperatorSuite::shared(n);
            let per_seed = map_indexed(cfg.exec, cfg.seeds.len(), |i| instance(&ops, fam, cfg.seeds[i], cfg));
            for (i, res) in per_seed.into_iter().enumerate() {
                for (s, ratio) in res? {
                    rows.push(EstimateRow { family: fam.name(), seed: cfg.seeds[i], n, s, ratio });
                }
            }
        }
    }
    if wants(Family::AprioriX) || wants(Family::AprioriY) || wants(Family::AprioriPsi) {
        for r in apriori_harness(cfg)? {
            for (fam, ratio) in [(Family::AprioriX, r.ratio_x), (Family::AprioriY, r.ratio_y), (Family::AprioriPsi, r.ratio_psi)] {
                if wants(fam) {
                    rows.push(EstimateRow { family: fam.name(), seed: r.seed, n: r.n, s: r.s, ratio });
                }
            }
        }
    }
    Ok(rows)
}

/// Per (family, s): the ensemble maximum at each N and the spread max/min across N.
#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub family: &'static str,
    pub s: usize,
    pub maxima: Vec<(usize, f64)>,
    pub spread: f64,
    pub all_finite: bool,
}

pub fn stability(rows: &[EstimateRow]) -> Vec<Stability> {
    let mut groups: BTreeMap<(&'static str, usize), BTreeMap<usize, (f64, bool)>> = BTreeMap::new();
    for r in rows {
        let e = groups.entry((r.family, r.s)).or_default().entry(r.n).or_insert((0.0, true));
        e.0 = e.0.max(r.ratio);
        e.1 &= r.ratio.is_finite();
    }
    groups
        .into_iter()
        .map(|((family, s), per_n)| {
            let maxima: Vec<(usize, f64)> = per_n.iter().map(|(n, (m, _))| (*n, *m)).collect();
            let all_finite = per_n.values().all(|(m, ok)| *ok && m.is_finite());
            let hi = maxima.iter().map(|m| m.1).fold(f64::MIN, f64::max);
            let lo = maxima.iter().map(|m| m.1).fold(f64::MAX, f64::min);
            Stability { family, s, maxima, spread: hi / lo, all_finite }
        })
        .collect()
}
