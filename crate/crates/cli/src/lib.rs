//! Experiment driver: parses a config file, dispatches to the library
//! pipelines, and emits a structured report plus optional CSV tables.

use gaudin_core::covering::{
    compose_perm, concat, n3_circle_loop, swap_loop, track_eigenlines, trivial_loop,
};
use gaudin_core::gaudin::{verify_commuting, GaudinParams, GaudinSystem};
use gaudin_core::lie::{build_algebra, sl2_singular_multiplicities, AlgebraName, TensorSpace};
use gaudin_core::limits::{collision_limit_check, limit_spectrum_suite, OperadTree};
use gaudin_core::oper::{
    count_bijection, miura_oper, monodromy_report, residue_check, solve_bethe, BetheConfig,
};
use gaudin_core::scalar::{parse_rational, rat, rat_int, rat_to_f64};
use gaudin_core::spectral::{SimpleVerdict, SpectralContext, Tolerances};
use gaudin_core::{Gaussian, Rat, SparseMat, C64};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

/// A number from the config file: exact rational syntax ("p/q", "3",
/// "0.25" stays exact; "1/2+1/3i" for complex) or a float literal.
/// Any float anywhere demotes the run to the floating pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberSpec {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedNumber {
    pub exact: Option<(Rat, Rat)>,
    pub value: C64,
}

impl NumberSpec {
    pub fn parse(&self) -> Result<ParsedNumber, String> {
        match self {
            NumberSpec::Int(n) => Ok(ParsedNumber {
                exact: Some((rat_int(*n), Rat::zero())),
                value: C64::new(*n as f64, 0.0),
            }),
            NumberSpec::Float(x) => Ok(ParsedNumber {
                exact: None,
                value: C64::new(*x, 0.0),
            }),
            NumberSpec::Text(s) => {
                let (re, im) = parse_complex(s).ok_or_else(|| format!("bad number: {:?}", s))?;
                let value = C64::new(rat_to_f64(&re), rat_to_f64(&im));
                Ok(ParsedNumber {
                    exact: Some((re, im)),
                    value,
                })
            }
        }
    }
}

/// "a", "a+bi", "a-bi", "bi" with rational a, b.
fn parse_complex(s: &str) -> Option<(Rat, Rat)> {
    let s = s.trim();
    if let Some(body) = s.strip_suffix('i') {
        // locate the sign separating re and im (not the leading sign)
        for (pos, ch) in body.char_indices().rev() {
            if (ch == '+' || ch == '-') && pos > 0 {
                let re = parse_rational(&body[..pos])?;
                let im_str = &body[pos..];
                let im = if im_str == "+" || im_str == "-" {
                    if im_str == "+" {
                        rat_int(1)
                    } else {
                        rat_int(-1)
                    }
                } else {
                    parse_rational(im_str)?
                };
                return Some((re, im));
            }
        }
        let im = if body.is_empty() {
            rat_int(1)
        } else {
            parse_rational(body)?
        };
        return Some((Rat::zero(), im));
    }
    Some((parse_rational(s)?, Rat::zero()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algebra: String,
    /// sl2 highest weights, one per point; ignored for sl3 (defining
    /// representations at every point).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<u32>,
    pub points: Vec<NumberSpec>,
    /// Twist element by basis label, e.g. { h = "1/2" }.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub mu: BTreeMap<String, NumberSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Number of auxiliary roots for `bethe` / `oper-check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector_m: Option<usize>,
    /// Collision tree for `limit`, e.g. "((1 2) 3)".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian_required: Option<bool>,
    /// Diagonalize on the full space instead of the singular subspace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_space: Option<bool>,
    /// Loop kind for `cover`: "trivial", "circle", "swap".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover_loop: Option<String>,
    /// 1-based pair of factors for the "swap" loop.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {}", e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn parsed_points(&self) -> Result<Vec<ParsedNumber>, String> {
        let pts: Vec<ParsedNumber> = self
            .points
            .iter()
            .map(|p| p.parse())
            .collect::<Result<_, _>>()?;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if (pts[i].value - pts[j].value).norm() == 0.0 {
                    return Err(format!("coincident points {} and {}", i + 1, j + 1));
                }
            }
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CommuteCheck,
    Spectrum,
    Cyclicity,
    Bethe,
    OperCheck,
    BijectionCount,
    Limit,
    Cover,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "commute-check" => Command::CommuteCheck,
            "spectrum" => Command::Spectrum,
            "cyclicity" => Command::Cyclicity,
            "bethe" => Command::Bethe,
            "oper-check" => Command::OperCheck,
            "bijection-count" => Command::BijectionCount,
            "limit" => Command::Limit,
            "cover" => Command::Cover,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::CommuteCheck => "commute-check",
            Command::Spectrum => "spectrum",
            Command::Cyclicity => "cyclicity",
            Command::Bethe => "bethe",
            Command::OperCheck => "oper-check",
            Command::BijectionCount => "bijection-count",
            Command::Limit => "limit",
            Command::Cover => "cover",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seed: u64,
    pub tol: f64,
    /// True when the mathematical claim the command checks held.
    pub verdict: bool,
    pub results: serde_json::Value,
    pub wall_time_ms: u128,
    pub library_version: String,
}

/// CSV tables keyed by file stem; first row is the header.
pub type Tables = BTreeMap<String, Vec<Vec<String>>>;

#[derive(Debug)]
pub struct RunOutput {
    pub report: Report,
    pub tables: Tables,
}

fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut h = DefaultHasher::new();
    cfg.to_toml().hash(&mut h);
    format!("{:016x}", h.finish())
}

struct Prepared {
    space: TensorSpace,
    points: Vec<ParsedNumber>,
    mu_exact: Option<Vec<Gaussian>>,
    mu_c64: Vec<C64>,
    all_exact: bool,
    all_real: bool,
    weights: Vec<u32>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared, String> {
    let algebra = build_algebra(&cfg.algebra).map_err(|e| e.to_string())?;
    let points = cfg.parsed_points()?;
    let n = points.len();
    let (space, weights) = match algebra.name {
        AlgebraName::Sl2 => {
            if cfg.weights.len() != n {
                return Err(format!(
                    "{} weights for {} points",
                    cfg.weights.len(),
                    n
                ));
            }
            let w = cfg.weights.clone();
            (
                TensorSpace::sl2(algebra, &w).map_err(|e| e.to_string())?,
                w,
            )
        }
        AlgebraName::Sln(_) => (
            TensorSpace::sln_defining(algebra, n).map_err(|e| e.to_string())?,
            vec![1; n],
        ),
    };
    let dim = space.algebra.labels.len();
    let mut mu_exact_v = vec![Gaussian::zero(); dim];
    let mut mu_c64 = vec![C64::new(0.0, 0.0); dim];
    let mut mu_all_exact = true;
    for (label, num) in &cfg.mu {
        let idx = space
            .algebra
            .basis_index(label)
            .ok_or_else(|| format!("unknown basis label {:?}", label))?;
        let p = num.parse()?;
        mu_c64[idx] = p.value;
        match &p.exact {
            Some((re, im)) => mu_exact_v[idx] = Gaussian::new(re.clone(), im.clone()),
            None => mu_all_exact = false,
        }
    }
    let points_exact = points.iter().all(|p| p.exact.is_some());
    let all_real = points.iter().all(|p| p.value.im == 0.0)
        && mu_c64.iter().all(|m| m.im == 0.0);
    Ok(Prepared {
        space,
        mu_exact: if mu_all_exact { Some(mu_exact_v) } else { None },
        mu_c64,
        all_exact: points_exact && mu_all_exact,
        all_real,
        points,
        weights,
    })
}

impl Prepared {
    fn exact_params(&self) -> Option<GaudinParams<Gaussian>> {
        let mu = self.mu_exact.clone()?;
        let z: Option<Vec<Gaussian>> = self
            .points
            .iter()
            .map(|p| {
                p.exact
                    .as_ref()
                    .map(|(re, im)| Gaussian::new(re.clone(), im.clone()))
            })
            .collect();
        Some(GaudinParams::twisted(z?, mu))
    }

    fn float_params(&self) -> GaudinParams<C64> {
        GaudinParams::twisted(
            self.points.iter().map(|p| p.value).collect(),
            self.mu_c64.clone(),
        )
    }

    fn z_c64(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.value).collect()
    }

    fn full_generators(&self) -> bool {
        matches!(self.space.algebra.name, AlgebraName::Sl2)
    }

    /// Numeric family restricted to V^sing (or the full space).
    fn context(&self, full_space: bool, tol: &Tolerances) -> Result<SpectralContext, String> {
        let sys = GaudinSystem::new(&self.space, self.float_params()).map_err(|e| e.to_string())?;
        let gens = sys
            .generator_set(self.full_generators(), 1e-8)
            .map_err(|e| e.to_string())?;
        let ops: Vec<(String, SparseMat<C64>)> = gens
            .into_iter()
            .map(|(l, m)| (l.to_string(), m))
            .collect();
        let gram: Vec<f64> = self.space.gram_diag().iter().map(rat_to_f64).collect();
        let sub: Vec<Vec<C64>> = if full_space {
            Vec::new()
        } else {
            self.space
                .singular_subspace()
                .map_err(|e| e.to_string())?
                .iter()
                .map(|v| v.iter().map(|x| x.to_c64()).collect())
                .collect()
        };
        SpectralContext::new(&ops, &gram, &sub, tol).map_err(|e| e.to_string())
    }
}

fn parse_tree(text: &str, n: usize) -> Result<OperadTree, String> {
    let mut tokens: Vec<String> = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    fn node(tokens: &[String], pos: &mut usize) -> Result<OperadTree, String> {
        if *pos >= tokens.len() {
            return Err("unexpected end of tree".into());
        }
        let t = &tokens[*pos];
        *pos += 1;
        if t == "(" {
            let mut children = Vec::new();
            while *pos < tokens.len() && tokens[*pos] != ")" {
                children.push(node(tokens, pos)?);
            }
            if *pos >= tokens.len() {
                return Err("unbalanced tree parentheses".into());
            }
            *pos += 1; // consume ")"
            let k = children.len() as i64;
            let coords = (0..k).map(rat_int).collect();
            Ok(OperadTree::Internal { children, coords })
        } else if t == ")" {
            Err("unexpected ')'".into())
        } else {
            let leaf: usize = t
                .parse()
                .map_err(|_| format!("bad leaf label {:?}", t))?;
            if leaf == 0 {
                return Err("leaf labels are 1-based".into());
            }
            Ok(OperadTree::Leaf(leaf - 1))
        }
    }
    let mut pos = 0;
    let tree = node(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err("trailing tokens after tree".into());
    }
    tree.validate(n).map_err(|e| e.to_string())?;
    Ok(tree)
}

fn tuple_row(prefix: Vec<String>, tuple: &[f64]) -> Vec<String> {
    let mut row = prefix;
    row.extend(tuple.iter().map(|x| format!("{:.12e}", x)));
    row
}

pub fn run(command: Command, cfg: &ExperimentConfig, seed: u64, tol: f64) -> Result<RunOutput, String> {
    let t0 = std::time::Instant::now();
    let prep = prepare(cfg)?;
    let tols = Tolerances {
        gap: tol.max(Tolerances::default().gap),
        ..Tolerances::default()
    };
    let mut tables: Tables = BTreeMap::new();
    let (verdict, results) = match command {
        Command::CommuteCheck => {
            if let (true, Some(params)) = (prep.all_exact, prep.exact_params()) {
                let sys = GaudinSystem::new(&prep.space, params).map_err(|e| e.to_string())?;
                let gens = sys
                    .generator_set(prep.full_generators(), 0.0)
                    .map_err(|e| e.to_string())?;
                let ok = verify_commuting(&gens, 0.0).is_ok();
                (
                    ok,
                    json!({
                        "mode": "exact",
                        "generators": gens.len(),
                        "message": if ok { "all commutators zero (exact)" } else { "nonzero commutator" },
                    }),
                )
            } else {
                let sys = GaudinSystem::new(&prep.space, prep.float_params())
                    .map_err(|e| e.to_string())?;
                let gens = sys
                    .generator_set(prep.full_generators(), f64::INFINITY)
                    .map_err(|e| e.to_string())?;
                let ok = verify_commuting(&gens, tol).is_ok();
                (
                    ok,
                    json!({
                        "mode": "float",
                        "generators": gens.len(),
                        "tolerance": tol,
                    }),
                )
            }
        }
        Command::Spectrum => {
            if !prep.all_real {
                return Err("Hermiticity unavailable for non-real parameters".into());
            }
            let full = cfg.full_space.unwrap_or(false);
            let ctx = prep.context(full, &tols)?;
            let spec = ctx.joint_spectrum(&tols).map_err(|e| e.to_string())?;
            let (simple, min_gap) = spec.simple_spectrum(&tols);
            let mut rows = vec![{
                let mut h = vec!["index".to_string(), "multiplicity".to_string()];
                h.extend(spec.labels.iter().cloned());
                h
            }];
            for (i, item) in spec.items.iter().enumerate() {
                rows.push(tuple_row(
                    vec![i.to_string(), item.multiplicity().to_string()],
                    &item.tuple,
                ));
            }
            tables.insert("spectrum".into(), rows);
            (
                simple == SimpleVerdict::Simple,
                json!({
                    "space": if full { "full" } else { "singular" },
                    "dimension": ctx.dim,
                    "eigenspaces": spec.items.len(),
                    "max_residual": spec.max_residual,
                    "min_gap": min_gap,
                    "simple": format!("{:?}", simple),
                }),
            )
        }
        Command::Cyclicity => {
            if !prep.all_real {
                return Err("Hermiticity unavailable for non-real parameters".into());
            }
            let full = cfg.full_space.unwrap_or(false);
            let ctx = prep.context(full, &tols)?;
            let rep = ctx.cyclicity(cfg.trials.unwrap_or(20), seed, 1e-10);
            (
                rep.cyclic,
                json!({
                    "space": if full { "full" } else { "singular" },
                    "dimension": rep.target,
                    "trials": rep.trials,
                    "achieved": rep.achieved,
                    "cyclic": rep.cyclic,
                }),
            )
        }
        Command::Bethe | Command::OperCheck => {
            if !matches!(prep.space.algebra.name, AlgebraName::Sl2) {
                return Err("Bethe pipeline supports sl2 only".into());
            }
            let total: i64 = prep.weights.iter().map(|&l| l as i64).sum();
            let m = match cfg.sector_m {
                Some(m) => m,
                None => return Err("sector_m required".into()),
            };
            let expected = sl2_singular_multiplicities(&prep.weights)
                .iter()
                .find(|&&(nu, _)| nu as i64 == total - 2 * m as i64)
                .map(|&(_, c)| c)
                .unwrap_or(0);
            let z = prep.z_c64();
            let sols = solve_bethe(&z, &prep.weights, m, seed, 400);
            let mut rows = vec![vec![
                "solution".to_string(),
                "root".to_string(),
                "re".to_string(),
                "im".to_string(),
            ]];
            for (si, cfg_roots) in sols.iter().enumerate() {
                for (ri, w) in cfg_roots.roots.iter().enumerate() {
                    rows.push(vec![
                        si.to_string(),
                        ri.to_string(),
                        format!("{:.12e}", w.re),
                        format!("{:.12e}", w.im),
                    ]);
                }
            }
            tables.insert("bethe_roots".into(), rows);
            if command == Command::Bethe {
                (
                    sols.len() == expected,
                    json!({
                        "sector_m": m,
                        "expected": expected,
                        "found": sols.len(),
                    }),
                )
            } else {
                let mut checked = 0usize;
                let mut monodromy_free = 0usize;
                let mut oper_rows = vec![vec![
                    "solution".to_string(),
                    "residue_ok".to_string(),
                    "max_obstruction".to_string(),
                ]];
                for (si, sol) in sols.iter().enumerate() {
                    let sol = BetheConfig {
                        roots: sol.roots.clone(),
                    };
                    let oper = miura_oper(&sol, &z, &prep.weights, 1e-8)
                        .map_err(|e| e.to_string())?;
                    let res_ok = residue_check(&oper, 1e-9);
                    let rep = monodromy_report(&oper, 1e-8).map_err(|e| e.to_string())?;
                    checked += 1;
                    if res_ok && rep.verdict {
                        monodromy_free += 1;
                    }
                    let max_obs = rep
                        .obstructions
                        .iter()
                        .map(|o| o.norm())
                        .fold(0.0f64, f64::max);
                    oper_rows.push(vec![
                        si.to_string(),
                        res_ok.to_string(),
                        format!("{:.3e}", max_obs),
                    ]);
                }
                tables.insert("opers".into(), oper_rows);
                (
                    checked == expected && monodromy_free == checked,
                    json!({
                        "sector_m": m,
                        "expected": expected,
                        "checked": checked,
                        "monodromy_free": monodromy_free,
                    }),
                )
            }
        }
        Command::BijectionCount => {
            if !matches!(prep.space.algebra.name, AlgebraName::Sl2) {
                return Err("bijection count supports sl2 only".into());
            }
            let z_exact: Vec<Rat> = prep
                .points
                .iter()
                .map(|p| match &p.exact {
                    Some((re, im)) if im.is_zero() => Ok(re.clone()),
                    _ => Err("bijection count needs exact real rational points".to_string()),
                })
                .collect::<Result<_, _>>()?;
            let rep = count_bijection(&prep.weights, &z_exact, seed, &tols)
                .map_err(|e| e.to_string())?;
            let mut rows = vec![vec![
                "sector_weight".to_string(),
                "roots".to_string(),
                "expected".to_string(),
                "eigen_tuples".to_string(),
                "bethe_validated".to_string(),
                "all_matched".to_string(),
            ]];
            for s in &rep.sectors {
                rows.push(vec![
                    s.nu.to_string(),
                    s.root_count.to_string(),
                    s.expected.to_string(),
                    s.eigen_tuples.to_string(),
                    s.bethe_validated.to_string(),
                    s.all_matched.to_string(),
                ]);
            }
            tables.insert("sectors".into(), rows);
            (
                rep.agree && rep.search_complete,
                json!({
                    "eigen_total": rep.eigen_total,
                    "bethe_total": rep.bethe_total,
                    "agree": rep.agree,
                    "search_complete": rep.search_complete,
                }),
            )
        }
        Command::Limit => {
            let text = cfg
                .tree
                .as_deref()
                .ok_or_else(|| "tree required".to_string())?;
            let tree = parse_tree(text, prep.points.len())?;
            let rep = limit_spectrum_suite(&tree, &prep.space, seed, &tols)
                .map_err(|e| e.to_string())?;
            let coll = collision_limit_check(&tree, &prep.space, rat(1, 10000))
                .map_err(|e| e.to_string())?;
            let max_ratio = coll
                .targets
                .iter()
                .filter(|t| t.deviation_s > 1e-12)
                .map(|t| t.ratio)
                .fold(0.0f64, f64::max);
            (
                rep.cyclic && rep.simple && coll.flat && coll.max_deviation <= 1e-6,
                json!({
                    "singular_dimension": rep.dim,
                    "cyclic": rep.cyclic,
                    "simple": rep.simple,
                    "min_gap": rep.min_gap,
                    "collision_deviation": coll.max_deviation,
                    "convergence_ratio": max_ratio,
                    "degree2_ranks": coll.pbw_ranks,
                    "flat": coll.flat,
                }),
            )
        }
        Command::Cover => {
            if !prep.all_real {
                return Err("Hermiticity unavailable for non-real parameters".into());
            }
            let base: Vec<f64> = prep.points.iter().map(|p| p.value.re).collect();
            let delta = cfg.delta.unwrap_or(1e-3);
            let kind = cfg.cover_loop.as_deref().unwrap_or("trivial");
            let path = match kind {
                "trivial" => {
                    let excursion: Vec<f64> = base
                        .iter()
                        .enumerate()
                        .map(|(i, x)| x + 0.05 * (i as f64 + 1.0))
                        .collect();
                    trivial_loop(base.clone(), excursion)
                }
                "circle" => {
                    if base.len() != 3 {
                        return Err("circle loop needs 3 points".into());
                    }
                    n3_circle_loop(delta)
                }
                "swap" => {
                    let [i, j] = cfg.swap.ok_or_else(|| "swap pair required".to_string())?;
                    if i == 0 || j == 0 || i > base.len() || j > base.len() || i == j {
                        return Err("bad swap pair".into());
                    }
                    swap_loop(base.clone(), i - 1, j - 1, delta)
                }
                other => return Err(format!("unknown loop kind {:?}", other)),
            };
            let r1 = track_eigenlines(&path, &prep.space, 0.9).map_err(|e| e.to_string())?;
            let mut fine = path.clone();
            fine.max_step /= 2.0;
            let r2 = track_eigenlines(&fine, &prep.space, 0.9).map_err(|e| e.to_string())?;
            let doubled = concat(&path, &path.relabeled(&path.closing_relabel))
                .map_err(|e| e.to_string())?;
            let rd = track_eigenlines(&doubled, &prep.space, 0.9).map_err(|e| e.to_string())?;
            let composed_ok = rd.perm == compose_perm(&r1.perm, &r1.perm);
            let mut rows = vec![vec!["line".to_string(), "image".to_string()]];
            for (i, &p) in r1.perm.iter().enumerate() {
                rows.push(vec![i.to_string(), p.to_string()]);
            }
            tables.insert("permutation".into(), rows);
            (
                r1.perm == r2.perm && composed_ok,
                json!({
                    "loop": kind,
                    "permutation": r1.perm,
                    "min_gap": r1.min_gap,
                    "steps": r1.steps,
                    "stable_under_step_halving": r1.perm == r2.perm,
                    "doubled_permutation": rd.perm,
                    "path_hash": format!("{:016x}", r1.path_hash),
                }),
            )
        }
    };
    let report = Report {
        schema_version: 1,
        command: command.name().to_string(),
        config: cfg.clone(),
        config_hash: config_hash(cfg),
        seed,
        tol,
        verdict,
        results,
        wall_time_ms: t0.elapsed().as_millis(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(RunOutput { report, tables })
}

pub fn write_outputs(out_dir: &std::path::Path, output: &RunOutput) -> Result<(), String> {
    std::fs::create_dir_all(out_dir).map_err(|e| e.to_string())?;
    let report_path = out_dir.join("report.json");
    let body = serde_json::to_string_pretty(&output.report).map_err(|e| e.to_string())?;
    std::fs::write(&report_path, body).map_err(|e| e.to_string())?;
    for (stem, rows) in &output.tables {
        let csv: String = rows
            .iter()
            .map(|r| r.join(","))
            .collect::<Vec<_>>()
            .join("\n");
        std::fs::write(out_dir.join(format!("{}.csv", stem)), csv + "\n")
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}
