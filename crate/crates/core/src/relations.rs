//! Additivity relations between multipartite correlation measures,
//! evaluated over all party permutations with bound bookkeeping.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::{discord, discord_pure_bipartite, DiscordResult};
use crate::entanglement::{pure_bipartite_ree, ree_closed_form, ree_upper_bound_seeded};
use crate::error::{QcorrError, Result};
use crate::measures::{classical_correlation, subsystem_entropy, total_mutual_information};
use crate::optim::OptimizerConfig;
use crate::states::{party_letter, rng_for, sample_random_pure_from, MultipartiteState, Partition, SamplingMethod};

/// Residual tolerance when every term is exact.
pub const EXACT_TOL: f64 = 1e-9;
/// Optimizer values at or below this are exact zeros (the measures are
/// nonnegative).
pub const ZERO_TOL: f64 = 1e-9;
/// Tolerance when comparing pairwise discords for the party ordering.
pub const ORDERING_TOL: f64 = 1e-6;
/// A sample violates the conjecture when its residual is below `-CAMPAIGN_SLACK`.
pub const CAMPAIGN_SLACK: f64 = 1e-6;

/// The seven groupings of three parties, canonical form.
pub const PARTITIONS: [&str; 7] = ["A:B:C", "A:BC", "AB:C", "AC:B", "A:B", "A:C", "B:C"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measure {
    /// Total mutual information.
    T,
    /// Relative entropy of discord.
    D,
    /// Relative entropy of entanglement.
    E,
    /// Classical correlation of the closest classical state.
    C,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::T, Measure::D, Measure::E, Measure::C];
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Measure {
    type Err = QcorrError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "T" | "t" => Ok(Measure::T),
            "D" | "d" => Ok(Measure::D),
            "E" | "e" => Ok(Measure::E),
            "C" | "c" => Ok(Measure::C),
            _ => Err(QcorrError::Param(format!("unknown measure {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFlag {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermValue {
    pub value: f64,
    pub flag: BoundFlag,
    /// How the value was obtained: `entropy`, `catalog`, `pure_bipartite`,
    /// `optimizer` or `separable_ansatz`.
    pub source: &'static str,
    /// Optimizer starts agreeing with the reported value (0 when not
    /// applicable).
    pub consensus: usize,
}

impl TermValue {
    fn exact(value: f64, source: &'static str) -> Self {
        Self {
            value,
            flag: BoundFlag::Exact,
            source,
            consensus: 0,
        }
    }

    fn bound(value: f64, source: &'static str, consensus: usize) -> Self {
        let flag = if value <= ZERO_TOL {
            BoundFlag::Exact
        } else {
            BoundFlag::UpperBound
        };
        Self {
            value,
            flag,
            source,
            consensus,
        }
    }
}

/// Every measure requested on every grouping, plus all marginal entropies.
#[derive(Clone, Debug, Serialize)]
pub struct Profile {
    pub pure: bool,
    pub purity: f64,
    /// Keyed by party letters, e.g. `"AB"`.
    pub entropies: BTreeMap<String, f64>,
    /// Keyed like `"D(A:BC)"` with canonical partitions.
    pub values: BTreeMap<String, TermValue>,
    #[serde(skip)]
    pub discord_results: BTreeMap<String, DiscordResult<f64>>,
}

fn key(m: Measure, part: &Partition) -> String {
    format!("{m}({})", part.canonical())
}

fn letters(parties: &[usize]) -> String {
    parties.iter().map(|&p| party_letter(p)).collect()
}

impl Profile {
    pub fn get(&self, m: Measure, part: &Partition) -> Option<&TermValue> {
        self.values.get(&key(m, part))
    }

    pub fn value(&self, m: Measure, part: &str) -> Option<f64> {
        let p = Partition::parse(part).ok()?;
        self.get(m, &p).map(|t| t.value)
    }

    pub fn entropy(&self, parties: &[usize]) -> Option<f64> {
        let mut p = parties.to_vec();
        p.sort_unstable();
        self.entropies.get(&letters(&p)).copied()
    }
}

/// Evaluates the requested measures on the seven groupings of a 3-party
/// state. Catalog values are used for states built from a cataloged family.
pub fn profile(s: &MultipartiteState<f64>, measures: &[Measure], cfg: &OptimizerConfig) -> Result<Profile> {
    if s.n_parties() != 3 {
        return Err(QcorrError::Dimension(format!(
            "relations need 3 parties, got {}",
            s.n_parties()
        )));
    }
    let pure = s.is_pure();
    let mut out = Profile {
        pure,
        purity: s.purity(),
        entropies: BTreeMap::new(),
        values: BTreeMap::new(),
        discord_results: BTreeMap::new(),
    };
    for subset in [vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
        out.entropies.insert(letters(&subset), subsystem_entropy(s, &subset)?);
    }
    let want = |m| measures.contains(&m);
    let need_discord = want(Measure::D) || want(Measure::E) || want(Measure::C);

    for name in PARTITIONS {
        let part = Partition::parse(name)?;
        let bip = part.blocks().len() == 2;
        let restricted_pure = s.restrict(&part)?.0.is_pure();
        if want(Measure::T) {
            out.values
                .insert(key(Measure::T, &part), TermValue::exact(total_mutual_information(s, &part)?, "entropy"));
        }
        let fast_pure = bip && restricted_pure;
        let needs_search = need_discord && (!fast_pure || want(Measure::C) || want(Measure::E));
        let d = if needs_search {
            Some(discord(s, &part, cfg)?)
        } else {
            None
        };
        if want(Measure::D) {
            let tv = if fast_pure {
                TermValue::exact(discord_pure_bipartite(s, &part)?, "pure_bipartite")
            } else {
                let d = d.as_ref().expect("search ran");
                TermValue::bound(d.value, "optimizer", d.consensus())
            };
            out.values.insert(key(Measure::D, &part), tv);
        }
        if want(Measure::C) {
            let d = d.as_ref().expect("search ran");
            let c = classical_correlation(s, &part, d)?;
            // χ comes from an optimizer; C inherits no bound direction
            out.values.insert(key(Measure::C, &part), TermValue::bound(c, "optimizer", d.consensus()));
        }
        if want(Measure::E) {
            let catalog = s.origin().and_then(|o| ree_closed_form(o, &part).ok());
            let tv = if let Some(v) = catalog {
                TermValue::exact(v, "catalog")
            } else if fast_pure {
                TermValue::exact(pure_bipartite_ree(s, &part)?, "pure_bipartite")
            } else {
                let d = d.as_ref().expect("search ran");
                if d.value <= ZERO_TOL {
                    TermValue::exact(0.0, "optimizer")
                } else {
                    let r = ree_upper_bound_seeded(s, &part, cfg, Some(d))?;
                    TermValue::bound(r.value, "separable_ansatz", 0)
                }
            };
            out.values.insert(key(Measure::E, &part), tv);
        }
        if let Some(d) = d {
            out.discord_results.insert(part.canonical().to_string(), d);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationId {
    #[serde(rename = "R_T_EQ")]
    TEq,
    #[serde(rename = "R_T1")]
    T1,
    #[serde(rename = "R_T2")]
    T2,
    #[serde(rename = "R_T3")]
    T3,
    #[serde(rename = "R_SSA")]
    Ssa,
    #[serde(rename = "R_E_EQ")]
    EEq,
    #[serde(rename = "R_E1")]
    E1,
    #[serde(rename = "R_E2")]
    E2,
    #[serde(rename = "R_E2S")]
    E2s,
    #[serde(rename = "R_D_T1")]
    DT1,
    #[serde(rename = "R_D_T2")]
    DT2,
    #[serde(rename = "R_D_C1")]
    DC1,
    #[serde(rename = "R_D_C2")]
    DC2,
    #[serde(rename = "R_D_C3")]
    DC3,
    #[serde(rename = "R_D_C2S")]
    DC2s,
    #[serde(rename = "R_D_CONJ")]
    DConj,
    #[serde(rename = "R_D_OPEN")]
    DOpen,
}

impl RelationId {
    pub const ALL: [RelationId; 17] = [
        RelationId::TEq,
        RelationId::T1,
        RelationId::T2,
        RelationId::T3,
        RelationId::Ssa,
        RelationId::EEq,
        RelationId::E1,
        RelationId::E2,
        RelationId::E2s,
        RelationId::DT1,
        RelationId::DT2,
        RelationId::DC1,
        RelationId::DC2,
        RelationId::DC3,
        RelationId::DC2s,
        RelationId::DConj,
        RelationId::DOpen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationId::TEq => "R_T_EQ",
            RelationId::T1 => "R_T1",
            RelationId::T2 => "R_T2",
            RelationId::T3 => "R_T3",
            RelationId::Ssa => "R_SSA",
            RelationId::EEq => "R_E_EQ",
            RelationId::E1 => "R_E1",
            RelationId::E2 => "R_E2",
            RelationId::E2s => "R_E2S",
            RelationId::DT1 => "R_D_T1",
            RelationId::DT2 => "R_D_T2",
            RelationId::DC1 => "R_D_C1",
            RelationId::DC2 => "R_D_C2",
            RelationId::DC3 => "R_D_C3",
            RelationId::DC2s => "R_D_C2S",
            RelationId::DConj => "R_D_CONJ",
            RelationId::DOpen => "R_D_OPEN",
        }
    }

    /// Measure the relation is stated in; entropy relations use `T`.
    pub fn measure(self) -> Measure {
        use RelationId::*;
        match self {
            TEq | T1 | T2 | T3 | Ssa => Measure::T,
            EEq | E1 | E2 | E2s => Measure::E,
            _ => Measure::D,
        }
    }

    fn pure_only(self) -> bool {
        use RelationId::*;
        matches!(self, EEq | E2 | E2s | DT1 | DT2 | DC1 | DC2 | DC3 | DC2s)
    }

    fn needs_ordering(self) -> bool {
        matches!(self, RelationId::DC1 | RelationId::DC2 | RelationId::DC3)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RelationId {
    type Err = QcorrError;
    fn from_str(s: &str) -> Result<Self> {
        RelationId::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| QcorrError::Param(format!("unknown relation {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// lhs = rhs
    Eq,
    /// lhs ≥ rhs
    Ge,
    /// lhs ≤ rhs
    Le,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationStatus {
    Identity,
    Theorem,
    Conjecture,
    /// Reported only; includes pure-state theorems evaluated on mixed
    /// states and ordering-dependent relations under other orderings.
    Exploratory,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermRecord {
    pub label: String,
    pub side: &'static str,
    pub coefficient: f64,
    pub value: f64,
    pub flag: BoundFlag,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationRow {
    pub id: RelationId,
    /// Parties playing the roles of A, B, C, e.g. `"BAC"`.
    pub permutation: String,
    pub direction: Direction,
    pub lhs: f64,
    pub rhs: f64,
    /// Nonnegative when the relation holds.
    pub residual: f64,
    pub verdict: Verdict,
    pub status: RelationStatus,
    pub gating: bool,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub label: Option<String>,
    pub pure: bool,
    pub purity: f64,
    /// Permutation achieving D(A:B) ≥ D(B:C) ≥ D(A:C), when discord was
    /// evaluated.
    pub ordering: Option<String>,
    pub measures: Vec<Measure>,
    pub profile: Profile,
    pub rows: Vec<RelationRow>,
    pub gating_violations: usize,
}

impl RelationReport {
    pub fn rows_for(&self, id: RelationId) -> impl Iterator<Item = &RelationRow> {
        self.rows.iter().filter(move |r| r.id == id)
    }

    pub fn row(&self, id: RelationId, permutation: &str) -> Option<&RelationRow> {
        self.rows.iter().find(|r| r.id == id && r.permutation == permutation)
    }
}

#[derive(Clone, Debug)]
enum TermRef {
    M(Measure, Vec<Vec<usize>>),
    S(Vec<usize>),
}

#[derive(Clone, Debug)]
enum Side {
    Sum(Vec<(f64, TermRef)>),
    Max(Vec<TermRef>),
}

fn permutations() -> [[usize; 3]; 6] {
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

/// Relation sides with roles A, B, C played by `x`, `y`, `z`.
fn sides(id: RelationId, [x, y, z]: [usize; 3]) -> (Side, Direction, Side) {
    use RelationId::*;
    let m = |me: Measure, blocks: &[&[usize]]| TermRef::M(me, blocks.iter().map(|b| b.to_vec()).collect());
    let one = |t: TermRef| vec![(1.0, t)];
    let me = id.measure();
    let xyz = |me| m(me, &[&[x], &[y], &[z]]);
    let xy = |me| m(me, &[&[x], &[y]]);
    let yz = |me| m(me, &[&[y], &[z]]);
    let xz = |me| m(me, &[&[x], &[z]]);
    let xy_z = |me| m(me, &[&[x, y], &[z]]);
    let yz_x = |me| m(me, &[&[y, z], &[x]]);
    let xz_y = |me| m(me, &[&[x, z], &[y]]);
    let sum = |v: Vec<(f64, TermRef)>| Side::Sum(v);
    match id {
        TEq => (sum(one(xyz(me))), Direction::Eq, sum(vec![(1.0, xy(me)), (1.0, xy_z(me))])),
        T1 | E1 | DC1 => (sum(one(xy_z(me))), Direction::Ge, sum(one(xz(me)))),
        T2 | E2 | DC2 => (sum(one(xyz(me))), Direction::Ge, sum(vec![(1.0, xy(me)), (1.0, xz(me))])),
        T3 => (sum(one(xyz(me))), Direction::Le, sum(vec![(1.0, yz_x(me)), (1.0, xz_y(me))])),
        Ssa => (
            sum(vec![(1.0, TermRef::S(vec![x, y])), (1.0, TermRef::S(vec![y, z]))]),
            Direction::Ge,
            sum(vec![(1.0, TermRef::S(vec![x, y, z])), (1.0, TermRef::S(vec![y]))]),
        ),
        EEq | DT1 => (sum(one(xyz(me))), Direction::Ge, sum(vec![(1.0, xy(me)), (1.0, xy_z(me))])),
        E2s | DC2s => (
            sum(one(xyz(me))),
            Direction::Ge,
            sum(vec![(2.0 / 3.0, xy(me)), (2.0 / 3.0, yz(me)), (2.0 / 3.0, xz(me))]),
        ),
        DT2 => (sum(one(xy_z(me))), Direction::Ge, sum(vec![(0.5, xz(me)), (0.5, yz(me))])),
        DC3 => (
            sum(vec![(1.0, yz_x(me)), (1.0, xz_y(me))]),
            Direction::Ge,
            sum(vec![(1.0, xy(me)), (1.0, xz(me))]),
        ),
        DConj => (sum(one(xy_z(me))), Direction::Ge, Side::Max(vec![yz(me), xz(me)])),
        DOpen => (sum(one(xyz(me))), Direction::Le, sum(vec![(1.0, yz_x(me)), (1.0, xz_y(me))])),
    }
}

fn term_label(t: &TermRef) -> String {
    match t {
        TermRef::M(me, blocks) => {
            let b: Vec<String> = blocks.iter().map(|b| letters(b)).collect();
            format!("{me}({})", b.join(":"))
        }
        TermRef::S(p) => format!("S({})", letters(p)),
    }
}

fn lookup(p: &Profile, t: &TermRef) -> Result<TermValue> {
    match t {
        TermRef::M(me, blocks) => {
            let part = Partition::new(blocks.clone())?;
            p.get(*me, &part)
                .cloned()
                .ok_or_else(|| QcorrError::Param(format!("{} was not evaluated", term_label(t))))
        }
        TermRef::S(parties) => p
            .entropy(parties)
            .map(|v| TermValue::exact(v, "entropy"))
            .ok_or_else(|| QcorrError::Param(format!("{} was not evaluated", term_label(t)))),
    }
}

/// Side value plus the terms that determine it.
fn side_value(p: &Profile, side: &Side, label: &'static str, out: &mut Vec<TermRecord>) -> Result<(f64, Vec<TermValue>)> {
    match side {
        Side::Sum(terms) => {
            let mut total = 0.0;
            let mut used = Vec::new();
            for (c, t) in terms {
                let v = lookup(p, t)?;
                total += c * v.value;
                out.push(TermRecord {
                    label: term_label(t),
                    side: label,
                    coefficient: *c,
                    value: v.value,
                    flag: v.flag,
                });
                used.push(v);
            }
            Ok((total, used))
        }
        Side::Max(terms) => {
            let mut vals = Vec::new();
            for t in terms {
                let v = lookup(p, t)?;
                out.push(TermRecord {
                    label: term_label(t),
                    side: label,
                    coefficient: 1.0,
                    value: v.value,
                    flag: v.flag,
                });
                vals.push(v);
            }
            let best = vals.iter().map(|v| v.value).fold(f64::NEG_INFINITY, f64::max);
            Ok((best, vals))
        }
    }
}

fn verdict(residual: f64, direction: Direction, lhs: &[TermValue], rhs: &[TermValue], slack: f64) -> Verdict {
    let any_bound = lhs.iter().chain(rhs).any(|t| t.flag == BoundFlag::UpperBound);
    let tol = if any_bound { slack } else { EXACT_TOL };
    if residual >= -tol {
        return Verdict::Satisfied;
    }
    let lesser = match direction {
        Direction::Ge => rhs,
        Direction::Le => lhs,
        Direction::Eq => {
            return if any_bound {
                Verdict::Inconclusive
            } else {
                Verdict::Violated
            }
        }
    };
    // an upper bound on the smaller side could still be above the truth
    // unless independent starts agree on it
    let undecided = lesser
        .iter()
        .any(|t| t.flag == BoundFlag::UpperBound && t.consensus < 2);
    if undecided {
        Verdict::Inconclusive
    } else {
        Verdict::Violated
    }
}

fn perm_string(p: [usize; 3]) -> String {
    letters(&p)
}

/// First permutation in lexicographic order with
/// `D(X:Y) ≥ D(Y:Z) ≥ D(X:Z)`, comparisons within [`ORDERING_TOL`].
pub fn ordering_from_profile(p: &Profile) -> Option<[usize; 3]> {
    let d = |a: usize, b: usize| {
        let part = Partition::new(vec![vec![a], vec![b]]).ok()?;
        p.get(Measure::D, &part).map(|t| t.value)
    };
    for [x, y, z] in permutations() {
        let (dxy, dyz, dxz) = (d(x, y)?, d(y, z)?, d(x, z)?);
        if dxy >= dyz - ORDERING_TOL && dyz >= dxz - ORDERING_TOL {
            return Some([x, y, z]);
        }
    }
    None
}

pub fn ordering_permutation(s: &MultipartiteState<f64>, cfg: &OptimizerConfig) -> Result<[usize; 3]> {
    let p = profile(s, &[Measure::D], cfg)?;
    Ok(ordering_from_profile(&p).expect("some permutation orders three numbers"))
}

/// Evaluates every relation whose measure was requested, for all six
/// permutations.
pub fn evaluate(s: &MultipartiteState<f64>, measures: &[Measure], cfg: &OptimizerConfig) -> Result<RelationReport> {
    let mut ms: Vec<Measure> = measures.to_vec();
    ms.sort();
    ms.dedup();
    let p = profile(s, &ms, cfg)?;
    evaluate_profile(s.label().map(str::to_string), p, &ms, cfg)
}

pub fn evaluate_profile(
    label: Option<String>,
    p: Profile,
    measures: &[Measure],
    cfg: &OptimizerConfig,
) -> Result<RelationReport> {
    let ordering = if measures.contains(&Measure::D) {
        ordering_from_profile(&p)
    } else {
        None
    };
    let mut rows = Vec::new();
    for id in RelationId::ALL {
        if !measures.contains(&id.measure()) {
            continue;
        }
        for perm in permutations() {
            let (l, direction, r) = sides(id, perm);
            let mut terms = Vec::new();
            let (lhs, lv) = side_value(&p, &l, "lhs", &mut terms)?;
            let (rhs, rv) = side_value(&p, &r, "rhs", &mut terms)?;
            let residual = match direction {
                Direction::Ge => lhs - rhs,
                Direction::Le => rhs - lhs,
                Direction::Eq => -(lhs - rhs).abs(),
            };
            let status = match id {
                RelationId::TEq => RelationStatus::Identity,
                RelationId::DConj => RelationStatus::Conjecture,
                RelationId::DOpen => RelationStatus::Exploratory,
                _ if id.pure_only() && !p.pure => RelationStatus::Exploratory,
                _ if id.needs_ordering() && ordering != Some(perm) => RelationStatus::Exploratory,
                _ => RelationStatus::Theorem,
            };
            rows.push(RelationRow {
                id,
                permutation: perm_string(perm),
                direction,
                lhs,
                rhs,
                residual,
                verdict: verdict(residual, direction, &lv, &rv, cfg.slack),
                status,
                gating: matches!(status, RelationStatus::Identity | RelationStatus::Theorem),
                terms,
            });
        }
    }
    let gating_violations = rows
        .iter()
        .filter(|r| r.gating && r.verdict == Verdict::Violated)
        .count();
    Ok(RelationReport {
        label,
        pure: p.pure,
        purity: p.purity,
        ordering: ordering.map(perm_string),
        measures: measures.to_vec(),
        profile: p,
        rows,
        gating_violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignSample {
    pub index: u64,
    /// `D(XY:Z) = S(Z)` for the worst distinguished party `Z`.
    pub lhs: f64,
    /// `max{D(X:Z), D(Y:Z)}`
    pub rhs: f64,
    pub residual: f64,
    /// Distinguished split, e.g. `"AB:C"`.
    pub permutation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignSummary {
    pub n: u64,
    pub seed: u64,
    pub method: SamplingMethod,
    pub slack: f64,
    pub violation_count: usize,
    pub min_residual: f64,
    pub samples: Vec<CampaignSample>,
}

/// Worst case of `D(XY:Z) ≥ max{D(X:Z), D(Y:Z)}` over the distinguished
/// party of a pure 3-party state. The left side is exact for pure states;
/// the right side is an optimizer upper bound, so a nonnegative residual
/// certifies the inequality.
pub fn conjecture_residual(s: &MultipartiteState<f64>, cfg: &OptimizerConfig) -> Result<(f64, f64, f64, String)> {
    let purity = s.purity();
    if !s.is_pure() {
        return Err(QcorrError::Purity(purity));
    }
    let pair = |a: usize, b: usize| -> Result<f64> {
        Ok(discord(s, &Partition::new(vec![vec![a], vec![b]])?, cfg)?.value)
    };
    let d = [[0.0; 3]; 3];
    let mut d = d;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let v = pair(a, b)?;
        d[a][b] = v;
        d[b][a] = v;
    }
    let mut worst: Option<(f64, f64, f64, String)> = None;
    for z in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&k| k != z).collect();
        let lhs = subsystem_entropy(s, &[z])?;
        let rhs = d[others[0]][z].max(d[others[1]][z]);
        let residual = lhs - rhs;
        if worst.as_ref().is_none_or(|w| residual < w.2) {
            worst = Some((lhs, rhs, residual, format!("{}:{}", letters(&others), party_letter(z))));
        }
    }
    Ok(worst.expect("three parties"))
}

/// Random-sample test of the conjecture on `n` pure states. Sample `i` is
/// drawn from its own stream of `seed`, so results do not depend on
/// scheduling. Only optimal values are needed, so local searches stop on
/// the value criterion alone.
pub fn conjecture_campaign(n: u64, seed: u64, method: SamplingMethod, cfg: &OptimizerConfig) -> Result<CampaignSummary> {
    if n == 0 {
        return Err(QcorrError::Param("campaign needs n >= 1".into()));
    }
    let search = OptimizerConfig {
        xtol: f64::INFINITY,
        ..cfg.clone()
    };
    let samples = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let s = sample_random_pure_from::<f64, _>(&mut rng, method);
            let (lhs, rhs, residual, permutation) = conjecture_residual(&s, &search)?;
            Ok(CampaignSample {
                index: i,
                lhs,
                rhs,
                residual,
                permutation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violation_count = samples.iter().filter(|s| s.residual < -CAMPAIGN_SLACK).count();
    let min_residual = samples.iter().map(|s| s.residual).fold(f64::INFINITY, f64::min);
    Ok(CampaignSummary {
        n,
        seed,
        method,
        slack: CAMPAIGN_SLACK,
        violation_count,
        min_residual,
        samples,
    })
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest round-trip form of `x` rounded to 12 significant digits;
/// very small or large magnitudes use an exponent.
pub fn fmt_num(x: f64) -> String {
    // `+ 0.0` turns -0.0 into 0.0
    format!("{:?}", round12(x) + 0.0)
}

pub const CSV_SCHEMA: &str = "# qcorr-csv v1";

pub fn write_campaign_csv(summary: &CampaignSummary, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{CSV_SCHEMA}")?;
    writeln!(w, "index,lhs,rhs,residual,permutation")?;
    for s in &summary.samples {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.index,
            fmt_num(s.lhs),
            fmt_num(s.rhs),
            fmt_num(s.residual),
            s.permutation
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::states::named_state;

    fn fam(name: &str, p: Option<f64>) -> MultipartiteState<f64> {
        let mut m = BTreeMap::new();
        if let Some(p) = p {
            m.insert("p".to_string(), p);
        }
        named_state(name, &m).unwrap()
    }

    fn cfg() -> OptimizerConfig {
        OptimizerConfig {
            starts: 6,
            ..Default::default()
        }
    }

    #[test]
    fn ghz_satisfies_everything() {
        let r = evaluate(&fam("ghz", None), &[Measure::T, Measure::D, Measure::E], &cfg()).unwrap();
        assert_eq!(r.rows.len(), 17 * 6);
        for row in &r.rows {
            assert_eq!(row.verdict, Verdict::Satisfied, "{row:?}");
        }
        let t1 = r.row(RelationId::DT1, "ABC").unwrap();
        assert!(t1.residual.abs() < 1e-6);
        assert_eq!(r.ordering.as_deref(), Some("ABC"));
    }

    #[test]
    fn ordering_of_ghz_plus() {
        let o = ordering_permutation(&fam("ghz_plus", Some(0.3)), &cfg()).unwrap();
        // the B:C marginal is entangled, so its discord exceeds the other pairs
        assert_eq!(o, [1, 2, 0]);
        let w = ordering_permutation(&fam("w", None), &cfg()).unwrap();
        assert_eq!(w, [0, 1, 2]);
    }

    #[test]
    fn total_correlation_identity_on_mixed_state() {
        let s = crate::states::sample_random_mixed::<f64>(3, 4);
        let r = evaluate(&s, &[Measure::T], &cfg()).unwrap();
        for row in r.rows_for(RelationId::TEq) {
            assert!(row.residual.abs() <= 1e-9);
        }
        assert!(r.rows.iter().all(|row| row.verdict == Verdict::Satisfied));
    }

    #[test]
    fn permutation_plumbing_matches_explicit_blocks() {
        let s = crate::states::sample_random_mixed::<f64>(9, 3);
        let r = evaluate(&s, &[Measure::T], &cfg()).unwrap();
        for perm in permutations() {
            let row = r.row(RelationId::T1, &perm_string(perm)).unwrap();
            let [x, y, z] = perm;
            let lhs = total_mutual_information(&s, &Partition::new(vec![vec![x, y], vec![z]]).unwrap()).unwrap();
            let rhs = total_mutual_information(&s, &Partition::new(vec![vec![x], vec![z]]).unwrap()).unwrap();
            assert!((row.residual - (lhs - rhs)).abs() <= 1e-12);
        }
    }

    #[test]
    fn verdict_rules() {
        let ex = TermValue::exact(1.0, "entropy");
        let ub = TermValue::bound(1.0, "optimizer", 1);
        let ub_agreed = TermValue::bound(1.0, "optimizer", 3);
        assert_eq!(verdict(-1e-3, Direction::Ge, &[ex.clone()], &[ex.clone()], 1e-4), Verdict::Violated);
        assert_eq!(verdict(-1e-3, Direction::Ge, &[ub.clone()], &[ex.clone()], 1e-4), Verdict::Violated);
        assert_eq!(verdict(-1e-3, Direction::Ge, &[ex.clone()], &[ub.clone()], 1e-4), Verdict::Inconclusive);
        assert_eq!(verdict(-1e-3, Direction::Ge, &[ex.clone()], &[ub_agreed], 1e-4), Verdict::Violated);
        assert_eq!(verdict(-5e-5, Direction::Ge, &[ex.clone()], &[ub], 1e-4), Verdict::Satisfied);
        assert_eq!(verdict(-5e-5, Direction::Ge, &[ex.clone()], &[ex], 1e-4), Verdict::Violated);
    }

    #[test]
    fn campaign_is_reproducible_and_ghz_residual_is_one() {
        let a = conjecture_campaign(2, 7, SamplingMethod::AcinUniform, &cfg()).unwrap();
        let b = conjecture_campaign(2, 7, SamplingMethod::AcinUniform, &cfg()).unwrap();
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        write_campaign_csv(&a, &mut ca).unwrap();
        write_campaign_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        let (lhs, rhs, res, _) = conjecture_residual(&fam("ghz", None), &cfg()).unwrap();
        assert!((lhs - 1.0).abs() < 1e-12 && rhs.abs() < 1e-8 && (res - 1.0).abs() < 1e-8);
        assert!(matches!(conjecture_campaign(0, 1, SamplingMethod::Haar, &cfg()), Err(QcorrError::Param(_))));
    }

    #[test]
    fn number_format_has_twelve_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(0.0), "0.0");
        assert_eq!(fmt_num(-0.0), "0.0");
    }
}
