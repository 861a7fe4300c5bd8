//! Dispatch of `<group> <action>` commands against a loaded scenario.

use std::time::Instant;

use bridgeland_local::ext_quiver::pairwise_merge_check;
use bridgeland_local::gaussian::GaussianRational;
use bridgeland_local::lattice::LatticeVector;
use bridgeland_local::quiver_rep::{destabilizer_search, in_zero_fiber, jh_search, moment_map, SearchConfig};
use bridgeland_local::rational::format_rational;
use bridgeland_local::stability::{
    chi_sigma, classical_git_weight, filtration_weight, k_class_of_filtration, theta_unstable, StabilityFunction,
};
use bridgeland_local::wall_analysis::{
    analyze_stratum, classify_wall_tss, product_shape, simple_near_stable_bridge, Effectivity, HyperbolicPair,
};
use bridgeland_local::walls::{enumerate_walls, gamma_map, locate_chamber, on_slice, wall_correspondence_check, xi_map, CharacterPoint};
use bridgeland_local::lattice::GramLattice;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::scenario::{ClassRef, Scenario};

pub const COMMANDS: &[&str] = &[
    "lattice pair",
    "lattice square",
    "lattice classify",
    "lattice signature",
    "lattice isotropic",
    "quiver build",
    "quiver dim",
    "quiver roots",
    "quiver simple-exists",
    "quiver merge-check",
    "rep moment-map",
    "rep check-fiber",
    "rep destabilize",
    "rep jh",
    "stability normalize",
    "stability phase",
    "stability slope",
    "stability weight",
    "stability theta-unstable",
    "stability chi-sigma",
    "stability classical-weight",
    "stability kclass",
    "walls enumerate",
    "walls locate",
    "walls xi",
    "walls gamma",
    "walls slice-check",
    "walls correspondence",
    "wall classify-tss",
    "stratum analyze",
    "stratum product-shape",
    "stratum simple-bridge",
];

/// Overrides from the command line; unset fields fall back to the scenario budgets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub bound: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    pub scenario_digest: String,
    pub results: Value,
    pub trace: Vec<String>,
    pub timing_ms: u128,
}

impl Report {
    /// SHA-256 of the canonical results payload.
    pub fn results_digest(&self) -> String {
        let text = serde_json::to_string(&self.results).expect("value serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    args: &'a [String],
    options: &'a RunOptions,
    trace: Vec<String>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

impl Ctx<'_> {
    fn arg(&self, k: usize, what: &str) -> Result<&str, CliError> {
        self.args
            .get(k)
            .map(String::as_str)
            .ok_or_else(|| CliError::Usage(format!("missing argument {}: {what}", k + 1)))
    }

    fn vector(&self, k: usize) -> Result<LatticeVector, CliError> {
        self.scenario.vector_arg(self.arg(k, "vector name or [coordinates]")?)
    }

    fn stability(&self, k: usize) -> Result<&StabilityFunction, CliError> {
        self.scenario.stability(self.arg(k, "stability function name")?)
    }

    fn root_budget(&self) -> usize {
        self.options.budget.unwrap_or(self.scenario.budgets().root_budget)
    }

    fn bound(&self) -> u32 {
        self.options.bound.unwrap_or(self.scenario.budgets().box_bound)
    }

    fn search_config(&self) -> SearchConfig {
        SearchConfig {
            max_candidates: self.options.budget.unwrap_or(self.scenario.budgets().search_budget),
            prng_seed: self.options.seed.unwrap_or(self.scenario.budgets().prng_seed),
            ..SearchConfig::default()
        }
    }

    /// `Z_0(v)` from the reference function named by argument `k`, the
    /// scenario `reference`, or a function called `Z0`.
    fn z0_of_v(&mut self, k: usize) -> Result<GaussianRational, CliError> {
        let name = match self.args.get(k) {
            Some(n) => n.clone(),
            None => self.scenario.file().reference.clone().unwrap_or_else(|| "Z0".into()),
        };
        let z0 = self.scenario.stability(&name)?;
        let v = self.scenario.decomposition()?.total_class();
        let value = z0.evaluate(&v).map_err(|e| CliError::domain("reference value", e))?;
        self.trace.push(format!("Z0(v) = {value} from `{name}`"));
        Ok(value)
    }
}

fn domain(context: &str) -> impl Fn(bridgeland_local::Error) -> CliError + '_ {
    move |e| CliError::domain(context, e)
}

pub fn run_command(scenario: &Scenario, command: &str, args: &[String], options: &RunOptions) -> Result<Report, CliError> {
    let command = command.split_whitespace().collect::<Vec<_>>().join(" ");
    if !COMMANDS.contains(&command.as_str()) {
        return Err(CliError::Usage(format!("unknown command `{command}`")));
    }
    let start = Instant::now();
    let mut ctx = Ctx {
        scenario,
        args,
        options,
        trace: Vec::new(),
    };
    let results = dispatch(&mut ctx, &command)?;
    Ok(Report {
        command,
        args: args.to_vec(),
        scenario_digest: scenario.digest(),
        results,
        trace: ctx.trace,
        timing_ms: start.elapsed().as_millis(),
    })
}

fn dispatch(ctx: &mut Ctx, command: &str) -> Result<Value, CliError> {
    let s = ctx.scenario;
    let lattice = s.lattice();
    Ok(match command {
        "lattice pair" => {
            let (a, b) = (ctx.vector(0)?, ctx.vector(1)?);
            json!({ "pair": lattice.pair(&a, &b).map_err(domain("pair"))? })
        }
        "lattice square" => json!({ "square": lattice.square(&ctx.vector(0)?).map_err(domain("square"))? }),
        "lattice classify" => json!({ "kind": lattice.classify(&ctx.vector(0)?).map_err(domain("classify"))? }),
        "lattice signature" => {
            let sig = lattice.signature();
            json!({ "signature": sig, "hyperbolic_plane": sig.is_hyperbolic_plane() })
        }
        "lattice isotropic" => {
            let bound = ctx.bound();
            if bound == 0 {
                return Err(CliError::Usage("bound must be at least 1".into()));
            }
            json!({ "bound": bound, "found": lattice.find_isotropic(bound) })
        }
        "quiver build" => {
            let q = s.quiver()?;
            let arrows = q.arrows();
            json!({ "quiver": q, "arrows": arrows })
        }
        "quiver dim" => {
            let (q, n) = (s.quiver()?, s.n()?);
            let info = q.dimension_info(&n).map_err(domain("dimension"))?;
            let mut out = to_value(&info);
            if let Ok(d) = s.decomposition() {
                let sq = lattice.square(&d.total_class()).map_err(domain("v²"))?;
                out["v_squared"] = json!(sq);
            }
            out
        }
        "quiver roots" => {
            let budget = ctx.root_budget();
            to_value(&s.quiver()?.root_report(&s.n()?, budget).map_err(domain("roots"))?)
        }
        "quiver simple-exists" => {
            let budget = ctx.root_budget();
            to_value(&s.quiver()?.simple_rep_exists(&s.n()?, budget).map_err(domain("simple representation"))?)
        }
        "quiver merge-check" => {
            if ctx.args.len() >= 2 {
                let (a, b) = (ctx.vector(0)?, ctx.vector(1)?);
                to_value(&pairwise_merge_check(lattice, &a, &b).map_err(domain("merge check"))?)
            } else {
                let d = s.decomposition()?;
                let classes: Vec<_> = d.classes().collect();
                let mut pairs = Vec::new();
                for i in 0..classes.len() {
                    for j in i + 1..classes.len() {
                        let check = pairwise_merge_check(lattice, classes[i], classes[j]).map_err(domain("merge check"))?;
                        pairs.push(json!({ "i": i, "j": j, "check": check }));
                    }
                }
                json!({ "pairs": pairs })
            }
        }
        "rep moment-map" => {
            let mu = moment_map(&s.representation()?);
            json!({ "blocks": mu.blocks, "total_trace": format_rational(&mu.total_trace()) })
        }
        "rep check-fiber" => json!({ "in_zero_fiber": in_zero_fiber(&s.representation()?) }),
        "rep destabilize" => {
            let config = ctx.search_config();
            ctx.trace.push(format!("search budget {} candidates, seed {}", config.max_candidates, config.prng_seed));
            to_value(&destabilizer_search(&s.representation()?, &s.theta()?, &config).map_err(domain("destabilizer search"))?)
        }
        "rep jh" => {
            let config = ctx.search_config();
            ctx.trace.push(format!("search budget {} candidates, seed {}", config.max_candidates, config.prng_seed));
            to_value(&jh_search(&s.representation()?, &s.theta()?, &config).map_err(domain("Jordan-Hölder search"))?)
        }
        "stability normalize" => {
            let (z, v) = (ctx.stability(0)?, ctx.vector(1)?);
            to_value(&z.normalize(&v).map_err(domain("normalize"))?)
        }
        "stability phase" => {
            let (z, v) = (ctx.stability(0)?, ctx.vector(1)?);
            let phase = z.phase(&v).map_err(domain("phase"))?;
            json!({ "direction": phase, "known_value": phase.known_value().map(|q| format_rational(&q)) })
        }
        "stability slope" => {
            let (z, v) = (ctx.stability(0)?, ctx.vector(1)?);
            to_value(&z.slope(&v).map_err(domain("slope"))?)
        }
        "stability weight" => {
            let z = ctx.stability(0)?;
            let w = filtration_weight(z, &s.filtration()?).map_err(domain("filtration weight"))?;
            json!({ "weight": format_rational(&w) })
        }
        "stability theta-unstable" => {
            let z = ctx.stability(0)?;
            let total = match ctx.args.get(1) {
                Some(a) => s.vector_arg(a)?,
                None => s.decomposition()?.total_class(),
            };
            to_value(&theta_unstable(z, &total, &s.subobjects()?).map_err(domain("Θ-instability"))?)
        }
        "stability chi-sigma" => {
            let z = ctx.stability(0)?;
            let chi = chi_sigma(z, s.decomposition()?).map_err(domain("χ_σ"))?;
            let (k, integral) = chi.integral_multiple();
            json!({
                "character": chi,
                "integral_multiple": { "factor": k.to_string(), "exponents": integral.iter().map(ToString::to_string).collect::<Vec<_>>() },
            })
        }
        "stability classical-weight" => {
            let spec = s
                .file()
                .classical_weight
                .as_ref()
                .ok_or_else(|| CliError::Usage("scenario has no classical_weight".into()))?;
            let w = classical_git_weight(&spec.terms, spec.ell).map_err(domain("classical weight"))?;
            json!({ "weight": w.to_string() })
        }
        "stability kclass" => {
            let k = k_class_of_filtration(&s.filtration()?);
            json!({ "terms": k.terms(), "at_u_equals_one": k.at_u_equals_one() })
        }
        "walls enumerate" => {
            let budget = ctx.root_budget();
            json!({ "walls": enumerate_walls(&s.quiver()?, &s.n()?, budget).map_err(domain("walls"))? })
        }
        "walls locate" => {
            let budget = ctx.root_budget();
            let n = s.n()?;
            let walls = enumerate_walls(&s.quiver()?, &n, budget).map_err(domain("walls"))?;
            let theta = CharacterPoint::new(s.theta()?, n).map_err(domain("θ"))?;
            to_value(&locate_chamber(&theta, &walls))
        }
        "walls xi" => {
            let z0v = ctx.z0_of_v(1)?;
            let z = ctx.stability(0)?;
            to_value(&xi_map(z, &z0v, s.decomposition()?).map_err(domain("Ξ"))?)
        }
        "walls gamma" => {
            let z0v = ctx.z0_of_v(1)?;
            let z = ctx.stability(0)?;
            let gamma = gamma_map(z, &z0v, s.decomposition()?).map_err(domain("γ"))?;
            json!({ "gamma": gamma.iter().map(format_rational).collect::<Vec<_>>() })
        }
        "walls slice-check" => {
            let z0v = ctx.z0_of_v(1)?;
            let z = ctx.stability(0)?;
            json!({ "on_slice": on_slice(z, &z0v, s.decomposition()?).map_err(domain("slice"))? })
        }
        "walls correspondence" => {
            let z0v = ctx.z0_of_v(0)?;
            let alpha = s
                .file()
                .alpha
                .clone()
                .ok_or_else(|| CliError::Usage("scenario has no alpha".into()))?;
            let names = s.file().samples.clone().unwrap_or_default();
            let samples = names
                .iter()
                .map(|n| s.stability(n).cloned())
                .collect::<Result<Vec<_>, _>>()?;
            let holds = wall_correspondence_check(&alpha, &samples, &z0v, s.decomposition()?).map_err(domain("wall correspondence"))?;
            json!({ "alpha": alpha, "samples": samples.len(), "holds": holds })
        }
        "wall classify-tss" => {
            let (hp, z0) = hyperbolic(ctx)?;
            let effectivity = Effectivity::central_charge(&z0, &hp).map_err(domain("effectivity"))?;
            ctx.trace.push(format!("effectivity: {}", effectivity.description()));
            let bound = ctx.bound();
            json!({
                "lattice": hp.lattice(),
                "v": hp.v(),
                "verdict": classify_wall_tss(&hp, &effectivity, bound).map_err(domain("totally semistable wall"))?,
            })
        }
        "stratum analyze" => to_value(&analyze_stratum(s.decomposition()?).map_err(domain("stratum"))?),
        "stratum product-shape" => {
            let report = analyze_stratum(s.decomposition()?).map_err(domain("stratum"))?;
            json!({ "verdict": report.verdict, "factors": product_shape(&report).map_err(domain("product shape"))? })
        }
        "stratum simple-bridge" => {
            let budget = ctx.root_budget();
            json!({ "stable_deformation": simple_near_stable_bridge(s.decomposition()?, budget).map_err(domain("simple representation"))? })
        }
        other => unreachable!("command `{other}` is listed but not dispatched"),
    })
}

/// The hyperbolic plane of the scenario and `Z_0` restricted to it.
fn hyperbolic(ctx: &Ctx) -> Result<(HyperbolicPair, StabilityFunction), CliError> {
    let s = ctx.scenario;
    let spec = s
        .file()
        .hyperbolic
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no hyperbolic".into()))?;
    let name = ctx
        .args
        .first()
        .cloned()
        .or_else(|| spec.z0.clone())
        .ok_or_else(|| CliError::Usage("no stability function given for effectivity".into()))?;
    let z0 = s.stability(&name)?;
    match (&spec.gram, &spec.basis) {
        (Some(gram), _) => {
            let lattice = GramLattice::new(gram.clone()).map_err(domain("hyperbolic.gram"))?;
            let ClassRef::Coords(v) = &spec.v else {
                return Err(CliError::Usage("hyperbolic.v must be coordinates".into()));
            };
            let hp = HyperbolicPair::new(lattice, v.clone()).map_err(domain("hyperbolic pair"))?;
            if z0.rank() != 2 {
                return Err(CliError::Usage(format!("`{name}` is not defined on H")));
            }
            Ok((hp, z0.clone()))
        }
        (None, Some(basis)) => {
            let b = [s.resolve(&basis[0])?, s.resolve(&basis[1])?];
            let v = s.resolve(&spec.v)?;
            let hp = HyperbolicPair::from_embedding(s.lattice(), b.clone(), &v).map_err(domain("hyperbolic pair"))?;
            let restricted = b
                .iter()
                .map(|x| z0.evaluate(x))
                .collect::<Result<Vec<_>, _>>()
                .map_err(domain("restriction of Z0"))?;
            Ok((hp, StabilityFunction::new(restricted)))
        }
        (None, None) => Err(CliError::Usage("hyperbolic needs gram or basis".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::load_scenario;

    fn run(text: &str, command: &str, args: &[&str]) -> Result<Report, CliError> {
        let s = load_scenario(text).unwrap();
        let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        run_command(&s, command, &args, &RunOptions::default())
    }

    const AFFINE: &str = r#"{"lattice": {"gram": [[-2, 2], [2, -2]]}, "vectors": {"a": [1, 0], "b": [0, 1]},
        "decomposition": [{"class": "a", "multiplicity": 1}, {"class": "b", "multiplicity": 1}]}"#;

    const W_PLUS_S: &str = r#"{"lattice": {"gram": [[2, 1], [1, -2]]}, "vectors": {"w": [1, 0], "s": [0, 1]},
        "decomposition": [{"class": "w", "multiplicity": 1}, {"class": "s", "multiplicity": 1}]}"#;

    #[test]
    fn quiver_dim_on_affine_a1() {
        let r = run(AFFINE, "quiver dim", &[]).unwrap();
        assert_eq!(r.results["expected_dim"], json!(2));
        assert_eq!(r.results["v_squared"], json!(0));
    }

    #[test]
    fn stratum_analyze_on_w_plus_s() {
        let r = run(W_PLUS_S, "stratum analyze", &[]).unwrap();
        assert_eq!(r.results["verdict"]["verdict"], json!("totally_semistable_shape"));
    }

    #[test]
    fn unknown_command_is_a_usage_error() {
        let err = run(AFFINE, "quiver frobnicate", &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn domain_errors_exit_with_one() {
        let err = run(AFFINE, "stratum analyze", &[]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn every_command_is_dispatched() {
        for c in COMMANDS {
            // must not reach the unreachable arm; errors are fine
            let _ = run(AFFINE, c, &[]);
        }
    }
}
