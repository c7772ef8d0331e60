//! Command-line front end and the instance file format.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dac::{check_irreducibility, enforce_dac, is_dac, solve_tree, TreeStructure, VariableOrder};
use crate::error::{Error, Result};
use crate::gac::{enforce_gac, enforce_sac_strict, enumerate_closures, is_gac, is_gac_strict, Check, GacOptions};
use crate::model::{Assignment, CostFunction, VarId, Vcsp};
use crate::oracle::{brute_equivalent, brute_optimum, OracleCaps, OptimumResult};
use crate::transforms::Move;
use crate::valuation::{verify_structure, Structure, Valuation, VerifyMode};

/// Instances shipped with the crate, addressable by name on the command line.
pub const BUNDLED: [(&str, &str); 5] = [
    ("fig1a", include_str!("../fixtures/fig1a.toml")),
    ("fig1b", include_str!("../fixtures/fig1b.toml")),
    ("fig2a", include_str!("../fixtures/fig2a.toml")),
    ("fig4", include_str!("../fixtures/fig4.toml")),
    ("fig5a", include_str!("../fixtures/fig5a.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub structure: StructureSpec,
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub scope: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<CostLiteral>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub costs: Vec<TupleCost>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleCost {
    pub tuple: Vec<String>,
    pub cost: CostLiteral,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostLiteral {
    Integer(u64),
    Text(String),
}

impl CostLiteral {
    fn of(v: Valuation) -> Self {
        let text = v.to_string();
        match text.parse::<u64>() {
            Ok(n) => CostLiteral::Integer(n),
            Err(_) => CostLiteral::Text(text),
        }
    }

    fn parse(&self, s: &Structure, location: &str) -> Result<Valuation> {
        let text = match self {
            CostLiteral::Integer(n) => n.to_string(),
            CostLiteral::Text(t) => t.clone(),
        };
        s.parse_valuation(&text).map_err(|_| Error::Parse {
            location: location.to_string(),
            message: format!("cost {text:?} is not a valuation of {s}"),
        })
    }
}

fn parse_error(location: impl Into<String>, message: impl ToString) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.to_string(),
    }
}

impl InstanceFile {
    /// Parses TOML, or JSON when `json` is set.
    pub fn parse(text: &str, json: bool, origin: &str) -> Result<Self> {
        if json {
            serde_json::from_str(text).map_err(|e| parse_error(origin, e))
        } else {
            toml::from_str(text).map_err(|e| parse_error(origin, e.to_string().trim_end()))
        }
    }

    pub fn to_text(&self, json: bool) -> String {
        if json {
            serde_json::to_string_pretty(self).expect("instance files serialize") + "\n"
        } else {
            toml::to_string_pretty(self).expect("instance files serialize")
        }
    }

    pub fn to_problem(&self) -> Result<Vcsp> {
        let s = Structure::from_kind(&self.structure.kind, &self.structure.params)
            .map_err(|e| parse_error("structure", e))?;
        let mut v = Vcsp::new(s);
        for (k, var) in self.variables.iter().enumerate() {
            v.add_variable(var.name.clone(), var.domain.iter().cloned())
                .map_err(|e| parse_error(format!("variables[{k}]"), e))?;
        }
        let mut unary_seen = vec![false; v.n()];
        for (k, c) in self.constraints.iter().enumerate() {
            let at = format!("constraints[{k}]");
            let scope: Vec<VarId> = c
                .scope
                .iter()
                .map(|name| {
                    v.var_by_name(name)
                        .ok_or_else(|| parse_error(format!("{at}.scope"), format!("unknown variable {name:?}")))
                })
                .collect::<Result<_>>()?;
            if scope.is_empty() {
                return Err(parse_error(format!("{at}.scope"), "empty scope"));
            }
            let sizes: Vec<usize> = scope.iter().map(|&x| v.domain_size(x)).collect();
            let default = match &c.default {
                Some(lit) => lit.parse(&s, &format!("{at}.default"))?,
                None => s.bottom(),
            };
            let mut f = CostFunction::filled(scope.clone(), sizes, default).map_err(|e| parse_error(&at, e))?;
            for (j, entry) in c.costs.iter().enumerate() {
                let here = format!("{at}.costs[{j}]");
                if entry.tuple.len() != scope.len() {
                    return Err(parse_error(
                        &here,
                        format!("tuple has {} values, scope has {}", entry.tuple.len(), scope.len()),
                    ));
                }
                let tuple: Vec<usize> = scope
                    .iter()
                    .zip(&entry.tuple)
                    .map(|(&x, label)| {
                        v.variable(x).domain.index_of(label).ok_or_else(|| {
                            parse_error(&here, format!("{label:?} is not in the domain of {}", v.variable(x).name))
                        })
                    })
                    .collect::<Result<_>>()?;
                f.set(&tuple, entry.cost.parse(&s, &format!("{here}.cost"))?);
            }
            if scope.len() == 1 {
                let x = scope[0];
                if unary_seen[x.0] {
                    return Err(parse_error(&at, Error::DuplicateScope(v.variable(x).name.clone())));
                }
                unary_seen[x.0] = true;
                for (a, &cost) in f.table().iter().enumerate() {
                    v.set_unary_cost(x, a, cost).map_err(|e| parse_error(&at, e))?;
                }
            } else {
                v.add_constraint(f).map_err(|e| parse_error(&at, e))?;
            }
        }
        Ok(v)
    }

    /// The canonical file form: unary tables first, then the other
    /// constraints, each listing only entries that differ from its most
    /// frequent cost.
    pub fn from_problem(v: &Vcsp) -> Result<Self> {
        let v = v.materialized()?;
        let s = v.structure();
        let name = |x: VarId| v.variable(x).name.clone();
        let label = |x: VarId, a: usize| v.variable(x).domain.label(a).to_string();
        let describe = |scope: &[VarId], sizes: &[usize], table: &[Valuation]| -> ConstraintSpec {
            let mut counts: BTreeMap<Valuation, usize> = BTreeMap::new();
            for &c in table {
                *counts.entry(c).or_default() += 1;
            }
            let default = counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(&c, _)| c)
                .expect("tables are non-empty");
            let costs = crate::model::tuples(sizes)
                .zip(table)
                .filter(|(_, &c)| c != default)
                .map(|(t, &c)| TupleCost {
                    tuple: scope.iter().zip(&t).map(|(&x, &a)| label(x, a)).collect(),
                    cost: CostLiteral::of(c),
                })
                .collect();
            ConstraintSpec {
                scope: scope.iter().map(|&x| name(x)).collect(),
                default: (default != s.bottom()).then(|| CostLiteral::of(default)),
                costs,
            }
        };
        let mut constraints = Vec::new();
        for x in v.var_ids() {
            let table = v.unary(x);
            if table.iter().any(|&c| c != s.bottom()) {
                constraints.push(describe(&[x], &[table.len()], table));
            }
        }
        for c in v.constraints() {
            let f = c.to_dense(s)?;
            constraints.push(describe(f.scope(), f.sizes(), f.table()));
        }
        Ok(InstanceFile {
            structure: StructureSpec {
                kind: s.kind().to_string(),
                params: s.params(),
            },
            variables: v
                .variables()
                .iter()
                .map(|x| VariableSpec {
                    name: x.name.clone(),
                    domain: x.domain.labels().to_vec(),
                })
                .collect(),
            constraints,
        })
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// A problem read from disk or from the bundled set, with its raw bytes.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub problem: Vcsp,
    pub bytes: Vec<u8>,
}

pub fn load_instance(source: &str) -> Result<Loaded> {
    let path = Path::new(source);
    let (text, json) = if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| parse_error(source, e))?;
        (text, is_json(path))
    } else if let Some(text) = bundled(source) {
        (text.to_string(), false)
    } else {
        return Err(parse_error(source, "no such file or bundled instance"));
    };
    let file = InstanceFile::parse(&text, json, source)?;
    let problem = file.to_problem().map_err(|e| match e {
        Error::Parse { location, message } => parse_error(format!("{source}: {location}"), message),
        other => other,
    })?;
    Ok(Loaded {
        problem,
        bytes: text.into_bytes(),
    })
}

pub fn write_instance(v: &Vcsp, path: &Path) -> Result<()> {
    let text = InstanceFile::from_problem(v)?.to_text(is_json(path));
    std::fs::write(path, text).map_err(|e| parse_error(path.display().to_string(), e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<InstanceFile>,
    pub results: BTreeMap<String, Value>,
    pub witnesses: BTreeMap<String, Value>,
    pub counters: BTreeMap<String, Value>,
}

impl Report {
    fn new(command: &str, inputs: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        for bytes in inputs {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        Report {
            command: command.to_string(),
            input_digest: hex::encode(h.finalize()),
            problem: None,
            results: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            counters: BTreeMap::new(),
        }
    }

    fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), json!(value));
    }

    fn witness(&mut self, key: &str, value: impl Serialize) {
        self.witnesses.insert(key.into(), json!(value));
    }

    fn counter(&mut self, key: &str, value: impl Serialize) {
        self.counters.insert(key.into(), json!(value));
    }

    fn problem(&mut self, v: &Vcsp) -> Result<()> {
        self.problem = Some(InstanceFile::from_problem(v)?);
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

fn valuation_json(v: Valuation) -> Value {
    match v.to_string().parse::<u64>() {
        Ok(n) => json!(n),
        Err(_) => json!(v.to_string()),
    }
}

fn assignment_json(v: &Vcsp, t: &Assignment) -> Value {
    let map: BTreeMap<String, String> = t
        .iter()
        .map(|(&x, &a)| (v.variable(x).name.clone(), v.variable(x).domain.label(a).to_string()))
        .collect();
    json!(map)
}

fn check_json(c: &Check) -> Value {
    json!(c.witness)
}

#[derive(Parser, Debug)]
#[command(name = "softac", version, about = "Soft arc consistency toolkit for valued CSPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Instance file (.toml or .json) or bundled instance name.
    pub instance: String,
}

#[derive(Args, Debug, Clone)]
pub struct Transform {
    /// Instance file (.toml or .json) or bundled instance name.
    pub instance: String,
    /// Also write the resulting problem to this instance file.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Cross-check the result against the brute-force oracle.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Parse and validate an instance.
    Check(Input),
    /// Enforce generalized arc consistency.
    Gac {
        #[command(flatten)]
        io: Transform,
        /// Process stale queue entries too.
        #[arg(long)]
        no_stale_guard: bool,
    },
    /// Arc consistency for strictly monotonic structures.
    SacStrict(Transform),
    /// Check generalized arc consistency.
    CheckGac(Input),
    /// Enforce directional arc consistency along an order.
    Dac {
        #[command(flatten)]
        io: Transform,
        /// Comma-separated variable names, earliest first.
        #[arg(long, value_delimiter = ',', required = true)]
        order: Vec<String>,
    },
    /// Check directional arc consistency along an order.
    CheckDac {
        instance: String,
        #[arg(long, value_delimiter = ',', required = true)]
        order: Vec<String>,
    },
    /// Solve a tree-structured instance exactly.
    SolveTree {
        instance: String,
        #[arg(long)]
        root: String,
        #[arg(long)]
        verify: bool,
    },
    /// Search for f_min-improving pair transformations.
    Irreducible {
        instance: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Print the f_min lower bound.
    Fmin(Input),
    /// Apply one projection.
    Proj {
        #[command(flatten)]
        io: Transform,
        #[arg(long, value_delimiter = ',', required = true)]
        scope: Vec<String>,
        #[arg(long)]
        var: String,
        #[arg(long)]
        value: String,
    },
    /// Apply one extension.
    Ext {
        #[command(flatten)]
        io: Transform,
        #[arg(long)]
        var: String,
        #[arg(long)]
        value: String,
        #[arg(long, value_delimiter = ',', required = true)]
        scope: Vec<String>,
    },
    /// Exhaustive optimum.
    Optimum {
        instance: String,
        #[arg(long)]
        cap: Option<u128>,
    },
    /// Check that two instances are equivalent.
    Equiv {
        left: String,
        right: String,
        #[arg(long)]
        cap: Option<u128>,
        #[arg(long)]
        verify: bool,
    },
    /// Enumerate arc consistency closures reachable within a budget.
    Closures {
        instance: String,
        #[arg(long, default_value_t = 6)]
        budget: usize,
    },
    /// Check the axioms of a valuation structure.
    VerifyStructure {
        /// e.g. weighted, bounded-sum(5), financial-life(3,3)
        #[arg(long)]
        structure: String,
        /// Number of random cases instead of an exhaustive scan.
        #[arg(long, requires = "seed")]
        sampled: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Gac { .. } => "gac",
            Command::SacStrict(_) => "sac-strict",
            Command::CheckGac(_) => "check-gac",
            Command::Dac { .. } => "dac",
            Command::CheckDac { .. } => "check-dac",
            Command::SolveTree { .. } => "solve-tree",
            Command::Irreducible { .. } => "irreducible",
            Command::Fmin(_) => "fmin",
            Command::Proj { .. } => "proj",
            Command::Ext { .. } => "ext",
            Command::Optimum { .. } => "optimum",
            Command::Equiv { .. } => "equiv",
            Command::Closures { .. } => "closures",
            Command::VerifyStructure { .. } => "verify-structure",
        }
    }
}

/// A report and whether the property the command checks holds.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub holds: bool,
}

fn var_named(v: &Vcsp, name: &str) -> Result<VarId> {
    v.var_by_name(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
}

fn value_named(v: &Vcsp, x: VarId, label: &str) -> Result<usize> {
    v.variable(x).domain.index_of(label).ok_or_else(|| Error::ValueOutOfDomain {
        variable: v.variable(x).name.clone(),
        value: label.to_string(),
    })
}

fn scope_named(v: &Vcsp, names: &[String]) -> Result<Vec<VarId>> {
    names.iter().map(|n| var_named(v, n)).collect()
}

fn order_named(v: &Vcsp, names: &[String]) -> Result<VariableOrder> {
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    VariableOrder::from_names(v, &refs)
}

/// Runs `work` on the problem while the exhaustive optimum of the input is
/// computed on another thread, then checks equivalence and the f_min bound.
fn with_oracle<T>(
    report: &mut Report,
    input: &Vcsp,
    verify: bool,
    work: impl FnOnce() -> Result<(Vcsp, T)>,
) -> Result<(Vcsp, T, bool)> {
    if !verify {
        let (out, extra) = work()?;
        return Ok((out, extra, true));
    }
    let (result, optimum) = std::thread::scope(|scope| {
        let oracle = scope.spawn(|| brute_optimum(input, OracleCaps::default()));
        let result = work();
        (result, oracle.join().expect("oracle thread panicked"))
    });
    let (out, extra) = result?;
    let optimum = optimum?;
    let equivalent = brute_equivalent(input, &out, OracleCaps::default())?;
    let bound = out.f_min()? <= optimum.valuation;
    report.result("oracle_equivalent", equivalent);
    report.result("oracle_lower_bound", bound);
    report.result("oracle_optimum", valuation_json(optimum.valuation));
    Ok((out, extra, equivalent && bound))
}

fn finish_transform(report: &mut Report, out: &Vcsp, output: &Option<PathBuf>) -> Result<()> {
    report.result("f_min", valuation_json(out.f_min()?));
    report.problem(out)?;
    if let Some(path) = output {
        write_instance(out, path)?;
    }
    Ok(())
}

fn optimum_report(report: &mut Report, v: &Vcsp, r: &OptimumResult) {
    report.result("optimum", valuation_json(r.valuation));
    report.witness("assignment", assignment_json(v, &r.assignment));
    report.counter("enumerated", r.enumerated);
}

/// Executes one parsed command.
pub fn execute(command: &Command) -> Result<Outcome> {
    let name = command.name();
    let loaded = |source: &str| load_instance(source);
    let mut holds = true;
    let report = match command {
        Command::Check(Input { instance }) => {
            let l = loaded(instance)?;
            let v = &l.problem;
            let mut r = Report::new(name, &[&l.bytes]);
            r.result("structure", v.structure().to_string());
            r.result("f_min", valuation_json(v.f_min()?));
            r.counter("n", v.n());
            r.counter("e", v.e());
            r.counter("d", v.d());
            r.counter("r", v.r());
            r.counter("search_space", v.search_space().to_string());
            r.problem(v)?;
            r
        }
        Command::Gac { io, no_stale_guard } => {
            let l = loaded(&io.instance)?;
            let mut r = Report::new(name, &[&l.bytes]);
            let options = GacOptions {
                stale_guard: !no_stale_guard,
            };
            let (out, stats, ok) = with_oracle(&mut r, &l.problem, io.verify, || {
                let mut v = l.problem.clone();
                let stats = enforce_gac(&mut v, options)?;
                Ok((v, stats))
            })?;
            holds = ok;
            let check = is_gac(&out)?;
            r.result("gac", check.holds);
            r.witness("gac", check_json(&check));
            r.counter("iterations", stats.iterations);
            r.counter("iteration_bound", stats.iteration_bound.to_string());
            r.counter("proj_calls", stats.proj_calls);
            r.counter("ext_calls", stats.ext_calls);
            r.counter("pushes", stats.pushes);
            r.counter("stale_skips", stats.stale_skips);
            finish_transform(&mut r, &out, &io.output)?;
            r
        }
        Command::SacStrict(io) => {
            let l = loaded(&io.instance)?;
            let mut r = Report::new(name, &[&l.bytes]);
            let (out, stats, ok) = with_oracle(&mut r, &l.problem, io.verify, || {
                let mut v = l.problem.clone();
                let stats = enforce_sac_strict(&mut v)?;
                Ok((v, stats))
            })?;
            holds = ok;
            let check = is_gac(&out)?;
            r.result("gac", check.holds);
            r.witness("gac", check_json(&check));
            r.counter("deleted", stats.ac.deleted);
            r.counter("revisions", stats.ac.revisions);
            r.counter("proj_calls", stats.proj_calls);
            r.counter("delta_storage", stats.delta_storage);
            finish_transform(&mut r, &out, &io.output)?;
            r
        }
        Command::CheckGac(Input { instance }) => {
            let l = loaded(instance)?;
            let v = &l.problem;
            let mut r = Report::new(name, &[&l.bytes]);
            let check = is_gac(v)?;
            holds = check.holds;
            r.result("gac", check.holds);
            r.witness("gac", check_json(&check));
            if v.structure().is_strictly_monotonic() {
                let strict = is_gac_strict(v)?;
                r.result("gac_strict", strict.holds);
                r.witness("gac_strict", check_json(&strict));
            }
            r
        }
        Command::Dac { io, order } => {
            let l = loaded(&io.instance)?;
            let order = order_named(&l.problem, order)?;
            let mut r = Report::new(name, &[&l.bytes]);
            let (out, stats, ok) = with_oracle(&mut r, &l.problem, io.verify, || {
                let mut v = l.problem.clone();
                let stats = enforce_dac(&mut v, &order)?;
                Ok((v, stats))
            })?;
            holds = ok;
            let check = is_dac(&out, &order)?;
            r.result("dac", check.holds);
            r.witness("dac", check_json(&check));
            r.counter("ext_calls", stats.ext_calls);
            r.counter("proj_calls", stats.proj_calls);
            r.counter("call_bound", stats.call_bound);
            finish_transform(&mut r, &out, &io.output)?;
            r
        }
        Command::CheckDac { instance, order } => {
            let l = loaded(instance)?;
            let order = order_named(&l.problem, order)?;
            let mut r = Report::new(name, &[&l.bytes]);
            let check = is_dac(&l.problem, &order)?;
            holds = check.holds;
            r.result("dac", check.holds);
            r.witness("dac", check_json(&check));
            r
        }
        Command::SolveTree { instance, root, verify } => {
            let l = loaded(instance)?;
            let v = &l.problem;
            let tree = TreeStructure::from_problem(v, var_named(v, root)?)?;
            let mut r = Report::new(name, &[&l.bytes]);
            let (solution, optimum) = std::thread::scope(|scope| {
                let oracle = verify.then(|| scope.spawn(|| brute_optimum(v, OracleCaps::default())));
                let solution = solve_tree(v, &tree);
                (solution, oracle.map(|h| h.join().expect("oracle thread panicked")))
            });
            let solution = solution?;
            r.result("optimum", valuation_json(solution.valuation));
            r.witness("assignment", assignment_json(v, &solution.assignment));
            r.counter("ext_calls", solution.stats.ext_calls);
            r.counter("proj_calls", solution.stats.proj_calls);
            if let Some(optimum) = optimum {
                let optimum = optimum?;
                holds = optimum.valuation == solution.valuation;
                r.result("oracle_optimum", valuation_json(optimum.valuation));
                r.result("oracle_agrees", holds);
            }
            r
        }
        Command::Irreducible { instance, depth, seed } => {
            let l = loaded(instance)?;
            let v = &l.problem;
            let mut r = Report::new(name, &[&l.bytes]);
            let report = check_irreducibility(v, *depth, *seed)?;
            holds = report.irreducible();
            r.result("irreducible", holds);
            r.result("exhaustive", report.exhaustive);
            r.result("f_min", valuation_json(report.f_min));
            r.counter("pairs", report.pairs);
            r.counter("states", report.states);
            let improving: Vec<Value> = report
                .improving
                .iter()
                .map(|imp| {
                    json!({
                        "pair": imp.pair.iter().map(|&k| v.variable(VarId(k)).name.clone()).collect::<Vec<_>>(),
                        "moves": imp.moves.iter().map(|m| m.describe(v)).collect::<Vec<_>>(),
                        "f_min": valuation_json(imp.f_min),
                    })
                })
                .collect();
            r.witness("improving", improving);
            r
        }
        Command::Fmin(Input { instance }) => {
            let l = loaded(instance)?;
            let mut r = Report::new(name, &[&l.bytes]);
            r.result("f_min", valuation_json(l.problem.f_min()?));
            r
        }
        Command::Proj { io, scope, var, value } | Command::Ext { io, var, value, scope } => {
            let l = loaded(&io.instance)?;
            let v = &l.problem;
            let scope = scope_named(v, scope)?;
            let x = var_named(v, var)?;
            let a = value_named(v, x, value)?;
            let step = if name == "proj" {
                Move::Proj { scope, var: x, value: a }
            } else {
                Move::Ext { var: x, value: a, scope }
            };
            let mut r = Report::new(name, &[&l.bytes]);
            let (out, moved, ok) = with_oracle(&mut r, v, io.verify, || {
                let mut w = v.clone();
                let moved = step.apply(&mut w)?;
                Ok((w, moved))
            })?;
            holds = ok;
            r.result("moved", valuation_json(moved));
            r.witness("move", step.describe(v));
            finish_transform(&mut r, &out, &io.output)?;
            r
        }
        Command::Optimum { instance, cap } => {
            let l = loaded(instance)?;
            let mut r = Report::new(name, &[&l.bytes]);
            let caps = cap.map_or_else(OracleCaps::default, |assignments| OracleCaps { assignments });
            let result = brute_optimum(&l.problem, caps)?;
            optimum_report(&mut r, &l.problem, &result);
            r
        }
        Command::Equiv {
            left,
            right,
            cap,
            verify,
        } => {
            let (a, b) = (loaded(left)?, loaded(right)?);
            let mut r = Report::new(name, &[&a.bytes, &b.bytes]);
            let cap = cap.unwrap_or(crate::model::ASSIGNMENT_CAP);
            holds = a.problem.equivalent_capped(&b.problem, cap)?;
            r.result("equivalent", holds);
            if *verify {
                let oracle = brute_equivalent(&a.problem, &b.problem, OracleCaps { assignments: cap })?;
                r.result("oracle_equivalent", oracle);
                holds &= oracle;
            }
            r
        }
        Command::Closures { instance, budget } => {
            let l = loaded(instance)?;
            let v = &l.problem;
            let mut r = Report::new(name, &[&l.bytes]);
            let report = enumerate_closures(v, *budget)?;
            r.result("closures", report.closures.len());
            r.result("complete", report.complete);
            r.result("min_f_min", report.min_f_min.map(valuation_json));
            r.result("max_f_min", report.max_f_min.map(valuation_json));
            r.counter("states", report.states);
            let closures = report
                .closures
                .iter()
                .map(|c| {
                    Ok(json!({
                        "f_min": valuation_json(c.f_min),
                        "moves": c.moves.iter().map(|m| m.describe(v)).collect::<Vec<_>>(),
                        "problem": InstanceFile::from_problem(&c.problem)?,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            r.witness("closures", closures);
            r
        }
        Command::VerifyStructure { structure, sampled, seed } => {
            let s: Structure = structure.parse()?;
            let mode = match sampled {
                Some(count) => VerifyMode::Sampled {
                    count: *count,
                    seed: seed.expect("clap enforces --seed"),
                },
                None => VerifyMode::Exhaustive,
            };
            let report = verify_structure(&s, mode)?;
            let mut r = Report::new(name, &[structure.as_bytes()]);
            holds = report.all_passed();
            r.result("structure", &report.structure);
            r.result("mode", &report.mode);
            r.result("all_passed", holds);
            r.result("fair", report.check(crate::valuation::Axiom::Fairness).passed());
            r.result("idempotent", report.idempotent.holds);
            r.result("strictly_monotonic", report.strictly_monotonic.holds);
            for check in &report.checks {
                let key = serde_json::to_value(check.axiom).expect("axioms serialize");
                let key = key.as_str().expect("axioms serialize as strings").to_string();
                r.counter(&format!("{key}_cases"), check.cases);
                if let Some(w) = &check.witness {
                    r.witness(&key, w);
                }
            }
            if let Some(w) = &report.idempotent.witness {
                r.witness("not_idempotent", w);
            }
            if let Some(w) = &report.strictly_monotonic.witness {
                r.witness("not_strictly_monotonic", w);
            }
            r
        }
    };
    Ok(Outcome { report, holds })
}

/// Parses arguments, runs the command and writes the report. Returns the
/// process exit code: 0 success, 1 property false, 2 usage or input error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            if out.write_all(outcome.report.to_json().as_bytes()).is_err() {
                return 2;
            }
            if outcome.holds {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
