//! Command-line front end: model and formula parsing, command dispatch,
//! machine-readable output.
//!
//! Exit codes: 0 when a verdict was computed (the verdict itself lives in
//! the payload), 2 on input errors, 3 when a resource guard tripped.

use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tempo_core::accel::{
    c_clamped_or_numeric, least_acceleration, least_acceleration_numeric, Acceleration,
};
use tempo_core::anomaly::{detect_anomaly, strong_monotonic};
use tempo_core::cdf::CompositionKind;
use tempo_core::fasterthan::{faster_than_unambiguous, time_bounded_additive_faster, FtError};
use tempo_core::ratio::{parse_rat, rat_to_f64, rat_to_string};
use tempo_core::simdist::{raw_residence_acceleration, simulation_distance};
use tempo_core::smp::{Scheduler, Smp, SmpError};
use tempo_core::tml::{model_check_tml, parse_tml, reachability_prob};
use tempo_core::wlwb::{parse_wlwb, satisfiable_wlwb, SatResult};
use tempo_core::wts::{axiom_soundness_suite, gen_weighted_bisim, model_check_wlwb, weighted_bisim, Wts};
use tempo_core::GridSpec;

#[derive(Parser)]
#[command(name = "tempo", version, about = "Behavioural preorders and logics for weighted transition systems and semi-Markov decision processes")]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Grid resolution for numeric CDF comparisons (>= 16); also read from
    /// TEMPO_GRID_POINTS
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Comparison tolerance (> 0)
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for the randomized suites
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Cap on enumerated schedulers
    #[arg(long, global = true, default_value_t = 1e6)]
    sched_limit: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Model-check a WLWB formula on a weighted transition system
    McWlwb { model: String, state: String, formula: String },
    /// Decide WLWB satisfiability; on success print the extracted model
    SatWlwb { formula: String },
    /// Exact weighted bisimilarity of two WTS states
    Bisim { model: String, s: String, t: String },
    /// Generalized (bounds-only) weighted bisimilarity
    GenBisim { model: String, s: String, t: String },
    /// Simulation distance between two SMP states
    Simdist { model: String, s1: String, s2: String },
    /// Does s2 eps-simulate s1?
    EpsSim { model: String, s1: String, s2: String, eps: String },
    /// Model-check a timed Markovian logic formula
    McTml { model: String, state: String, formula: String },
    /// Print the eps-perturbation of a TML formula
    Perturb { formula: String, eps: String },
    /// Trace-based faster-than comparison of two pointed processes
    FasterThan {
        model_u: String,
        model_v: String,
        /// use the exact decision procedure for unambiguous generative processes
        #[arg(long)]
        unambiguous: bool,
        /// time-bounded additive approximation: eps then bound
        #[arg(long, num_args = 2, value_names = ["EPS", "BOUND"])]
        approx: Option<Vec<f64>>,
        /// word-length cap for the approximation
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Bounded-horizon time-bounded reachability probability interval
    Reach { model: String, state: String, beta: String, t: f64, horizon: usize },
    /// Parallel composition of two reactive processes
    Compose {
        model1: String,
        model2: String,
        #[arg(long)]
        star: String,
        /// write the composed model here instead of stdout
        #[arg(short, long)]
        output: Option<String>,
    },
    /// Strong monotonicity check (sufficient to exclude timing anomalies)
    CheckMonotonic {
        model_u: String,
        model_v: String,
        model_w: String,
        model_w_prime: Option<String>,
        #[arg(long)]
        star: String,
    },
    /// Reproduce a timing-anomaly scenario on a witness cylinder
    Anomaly {
        model_u: String,
        model_v: String,
        model_w: String,
        #[arg(long)]
        star: String,
        #[arg(long)]
        word: String,
        #[arg(long)]
        t: f64,
    },
    /// Run the axiom-soundness suite on random systems
    Axioms {
        #[arg(long, default_value_t = 200)]
        models: usize,
    },
    /// Reproduce the worked examples and print expected vs actual
    Selftest,
}

enum CliError {
    Input(String),
    Guard(String),
}

impl From<SmpError> for CliError {
    fn from(e: SmpError) -> Self {
        match e {
            SmpError::ExplosionGuard { .. } => CliError::Guard(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<FtError> for CliError {
    fn from(e: FtError) -> Self {
        match e {
            FtError::Smp(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut points = cli.grid_points.or_else(|| {
        std::env::var("TEMPO_GRID_POINTS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(p) = points {
        if p < 16 {
            eprintln!("error: grid points must be at least 16");
            return ExitCode::from(2);
        }
        points = Some(p);
    }
    if cli.tol <= 0.0 {
        eprintln!("error: tolerance must be positive");
        return ExitCode::from(2);
    }
    let grid = GridSpec { points: points.unwrap_or(2048), tol: cli.tol };
    match run(&cli, &grid) {
        Ok(payload) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&payload).unwrap(),
                Format::Text => render_text(&payload),
            };
            // tolerate closed pipes (e.g. `tempo ... | head`)
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Guard(msg)) => {
            eprintln!("resource guard: {msg}");
            ExitCode::from(3)
        }
    }
}

fn render_text(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match val {
                    Value::String(s) if s.contains('\n') => {
                        out.push_str(&format!("{k}:\n"));
                        for line in s.lines() {
                            out.push_str(&format!("  {line}\n"));
                        }
                    }
                    _ => out.push_str(&format!("{k}: {val}\n")),
                }
            }
        }
        other => out.push_str(&format!("{other}\n")),
    }
    out.pop();
    out
}

/// Formula and model arguments name a file when one exists at that path,
/// otherwise they are parsed inline.
fn load_arg(arg: &str) -> Result<String, CliError> {
    if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn load_wts(path: &str) -> Result<Wts, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    Wts::parse(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

fn load_smp(path: &str) -> Result<Smp, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    Smp::parse(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

fn star_of(name: &str) -> Result<CompositionKind, CliError> {
    CompositionKind::parse(name)
        .ok_or_else(|| CliError::Input(format!("unknown composition kind `{name}`")))
}

fn accel_json(a: &Acceleration<f64>) -> Value {
    match a {
        Acceleration::Finite(v) => json!(v),
        Acceleration::Infinite => json!("inf"),
    }
}

fn run(cli: &Cli, grid: &GridSpec<f64>) -> Result<Value, CliError> {
    match &cli.command {
        Command::McWlwb { model, state, formula } => {
            let wts = load_wts(model)?;
            let s = wts.state_id(state).map_err(|e| CliError::Input(e.to_string()))?;
            let phi = parse_wlwb(&load_arg(formula)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let verdict = model_check_wlwb(&wts, s, &phi);
            Ok(json!({ "command": "mc-wlwb", "state": state, "formula": phi.to_string(), "holds": verdict }))
        }
        Command::SatWlwb { formula } => {
            let phi = parse_wlwb(&load_arg(formula)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            match satisfiable_wlwb(&phi) {
                SatResult::Unsat => {
                    Ok(json!({ "command": "sat-wlwb", "formula": phi.to_string(), "sat": false }))
                }
                SatResult::Sat { model, witness } => Ok(json!({
                    "command": "sat-wlwb",
                    "formula": phi.to_string(),
                    "sat": true,
                    "witness": model.state_name(witness),
                    "model": model.to_text(),
                })),
            }
        }
        Command::Bisim { model, s, t } => {
            let wts = load_wts(model)?;
            let si = wts.state_id(s).map_err(|e| CliError::Input(e.to_string()))?;
            let ti = wts.state_id(t).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({ "command": "bisim", "bisimilar": weighted_bisim(&wts, si, ti) }))
        }
        Command::GenBisim { model, s, t } => {
            let wts = load_wts(model)?;
            let si = wts.state_id(s).map_err(|e| CliError::Input(e.to_string()))?;
            let ti = wts.state_id(t).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({ "command": "gen-bisim", "bisimilar": gen_weighted_bisim(&wts, si, ti) }))
        }
        Command::Simdist { model, s1, s2 } => {
            let smp = load_smp(model)?;
            let a = smp.state_id(s1).map_err(|e| CliError::Input(e.to_string()))?;
            let b = smp.state_id(s2).map_err(|e| CliError::Input(e.to_string()))?;
            let d = simulation_distance(&smp, a, b, grid, true)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let raw = raw_residence_acceleration(&smp, a, b, grid);
            Ok(json!({
                "command": "simdist",
                "distance": accel_json(&d),
                "raw_residence_acceleration": accel_json(&raw),
            }))
        }
        Command::EpsSim { model, s1, s2, eps } => {
            let smp = load_smp(model)?;
            let a = smp.state_id(s1).map_err(|e| CliError::Input(e.to_string()))?;
            let b = smp.state_id(s2).map_err(|e| CliError::Input(e.to_string()))?;
            let eps_rat = parse_rat(eps).map_err(CliError::Input)?;
            let eps_f = rat_to_f64(&eps_rat);
            if eps_f <= 0.0 {
                return Err(CliError::Input("eps must be positive".into()));
            }
            let relation = tempo_core::simdist::eps_simulation_relation(&smp, eps_f, grid)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let verdict = relation[a][b];
            let witness: Option<Vec<[String; 2]>> = verdict.then(|| {
                let mut pairs = Vec::new();
                for (x, row) in relation.iter().enumerate() {
                    for (y, member) in row.iter().enumerate() {
                        if *member {
                            pairs.push([
                                smp.state_name(x).to_string(),
                                smp.state_name(y).to_string(),
                            ]);
                        }
                    }
                }
                pairs
            });
            Ok(json!({
                "command": "eps-sim",
                "eps": rat_to_string(&eps_rat),
                "simulates": verdict,
                "witness_relation": witness,
            }))
        }
        Command::McTml { model, state, formula } => {
            let smp = load_smp(model)?;
            let s = smp.state_id(state).map_err(|e| CliError::Input(e.to_string()))?;
            let phi = parse_tml(&load_arg(formula)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let verdict =
                model_check_tml(&smp, s, &phi).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({ "command": "mc-tml", "formula": phi.to_string(), "holds": verdict }))
        }
        Command::Perturb { formula, eps } => {
            let phi = parse_tml(&load_arg(formula)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let eps = parse_rat(eps).map_err(CliError::Input)?;
            Ok(json!({
                "command": "perturb",
                "eps": rat_to_string(&eps),
                "formula": phi.to_string(),
                "perturbed": phi.perturb(&eps).to_string(),
            }))
        }
        Command::FasterThan { model_u, model_v, unambiguous, approx, horizon } => {
            let mu = load_smp(model_u)?;
            let mv = load_smp(model_v)?;
            if *unambiguous {
                let verdict = faster_than_unambiguous(&mu, &mv, 0, 0, grid)?;
                Ok(json!({
                    "command": "faster-than",
                    "method": "unambiguous exact decision procedure",
                    "faster": verdict,
                }))
            } else if let Some(args) = approx {
                let (eps, b) = (args[0], args[1]);
                if eps <= 0.0 || b < 0.0 {
                    return Err(CliError::Input("--approx needs eps > 0 and bound >= 0".into()));
                }
                let verdict = time_bounded_additive_faster(
                    &mu, &mv, 0, 0, eps, b, *horizon, cli.sched_limit, grid,
                )?;
                let witness = verdict.witness.as_ref().map(|(w, t, adv)| {
                    json!({ "word": w, "t": t, "adversary_scheduler": adv })
                });
                Ok(json!({
                    "command": "faster-than",
                    "method": verdict.method,
                    "faster": verdict.holds,
                    "word_length_bound": verdict.n_bound,
                    "words_checked": verdict.words_checked,
                    "witness": witness,
                }))
            } else {
                Err(CliError::Input(
                    "choose a method: --unambiguous or --approx <eps> <bound>".into(),
                ))
            }
        }
        Command::Reach { model, state, beta, t, horizon } => {
            let smp = load_smp(model)?;
            let s = smp.state_id(state).map_err(|e| CliError::Input(e.to_string()))?;
            let phi = parse_wlwb(&load_arg(beta)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let (lo, hi) =
                reachability_prob(&smp, &Scheduler::Trivial, s, &phi, *t, *horizon, None)
                    .map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({ "command": "reach", "lower": lo, "upper": hi }))
        }
        Command::Compose { model1, model2, star, output } => {
            let m1 = load_smp(model1)?;
            let m2 = load_smp(model2)?;
            let star = star_of(star)?;
            let composed = Smp::compose(&m1, &m2, star)?;
            let text = composed.to_text();
            if let Some(path) = output {
                std::fs::write(path, &text)
                    .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
                Ok(json!({ "command": "compose", "star": star.name(), "written": path, "states": composed.state_count() }))
            } else {
                Ok(json!({ "command": "compose", "star": star.name(), "model": text }))
            }
        }
        Command::CheckMonotonic { model_u, model_v, model_w, model_w_prime, star } => {
            let u = load_smp(model_u)?;
            let v = load_smp(model_v)?;
            let w = load_smp(model_w)?;
            let wp = match model_w_prime {
                Some(p) => load_smp(p)?,
                None => w.clone(),
            };
            let star = star_of(star)?;
            let verdict = strong_monotonic(&u, &v, &w, &wp, star, grid)
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({
                "command": "check-monotonic",
                "strongly_monotonic": verdict.holds,
                "violated_condition": verdict.violated.map(|c| c.to_string()),
                "witness": verdict.witness,
                "path_bound": verdict.path_bound,
                "provenance": if verdict.numeric { "numeric" } else { "closed-form" },
            }))
        }
        Command::Anomaly { model_u, model_v, model_w, star, word, t } => {
            let u = load_smp(model_u)?;
            let v = load_smp(model_v)?;
            let w = load_smp(model_w)?;
            let star = star_of(star)?;
            let letters: Vec<String> = word.chars().map(|c| c.to_string()).collect();
            let report = detect_anomaly(&u, &v, &w, star, &letters, *t)
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok(json!({
                "command": "anomaly",
                "p_u_star_w": report.p_uw,
                "p_v_star_w": report.p_vw,
                "p_u": report.p_u,
                "p_v": report.p_v,
                "anomaly": report.anomaly,
            }))
        }
        Command::Axioms { models } => {
            let report = axiom_soundness_suite(cli.seed, *models);
            Ok(json!({
                "command": "axioms",
                "models": report.models_checked,
                "instances": report.instances_checked,
                "violations": report.violations,
                "sound": report.ok(),
            }))
        }
        Command::Selftest => selftest(grid),
    }
}

fn selftest(grid: &GridSpec<f64>) -> Result<Value, CliError> {
    use tempo_core::cdf::{parse_cdf, Cdf};
    use tempo_core::fixtures;
    use tempo_core::simdist::bisimilar;
    use tempo_core::smp::{cylinder_prob, TimeBoundedCylinder};

    let mut rows: Vec<Value> = Vec::new();
    let mut push = |name: &str, expected: String, actual: String, ok: bool| {
        rows.push(json!({ "check": name, "expected": expected, "actual": actual, "pass": ok }));
    };

    // simulation distances on the two-state exponential model
    let pair = fixtures::exp_selfloop_pair(4.0, 2.0);
    let d12 = simulation_distance(&pair, 0, 1, grid, false)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let d21 = simulation_distance(&pair, 1, 0, grid, false)
        .map_err(|e| CliError::Input(e.to_string()))?;
    push("simdist d(s1,s2)", "2".into(), format!("{d12}"), d12 == Acceleration::Finite(2.0));
    push("simdist d(s2,s1)", "1".into(), format!("{d21}"), d21 == Acceleration::Finite(1.0));

    // the three timing anomalies at word aa, t = 2
    let u = fixtures::chain3("u", &["exp(2)", "exp(0.5)", "exp(1)"]);
    let v = fixtures::chain3("v", &["exp(0.5)", "exp(2)", "exp(1)"]);
    let aa = ["a".to_string(), "a".to_string()];
    for (name, star, mu_p, nu_p, e_uw, e_vw) in [
        ("product", CompositionKind::ProductRate, "exp(10)", "exp(0.1)", 0.09, 0.30),
        ("minimum", CompositionKind::MinCdf, "exp(1)", "exp(2)", 0.40, 0.51),
        ("maximum", CompositionKind::MaxCdf, "exp(2)", "exp(1)", 0.75, 0.91),
    ] {
        let w = fixtures::chain3("w", &[mu_p, nu_p, "exp(1)"]);
        let rep = detect_anomaly(&u, &v, &w, star, &aa, 2.0)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let ok = (rep.p_uw - e_uw).abs() < 0.01 && (rep.p_vw - e_vw).abs() < 0.01 && rep.anomaly;
        push(
            &format!("anomaly {name} composition"),
            format!("{e_uw:.2} vs {e_vw:.2}, anomaly"),
            format!("{:.4} vs {:.4}, anomaly={}", rep.p_uw, rep.p_vw, rep.anomaly),
            ok,
        );
    }

    // WLWB satisfiability
    let phi = parse_wlwb("!( !(L 2 p1 & M 5 (L 1 p1)) & !(M 2 p2) )").unwrap();
    let sat = satisfiable_wlwb(&phi);
    let ok = match &sat {
        SatResult::Sat { model, witness } => model_check_wlwb(model, *witness, &phi),
        SatResult::Unsat => false,
    };
    push("sat-wlwb thesis example", "sat, self-checks".into(), format!("sat={}", sat.is_sat()), ok);
    for (text, expect) in [("p & !p", false), ("L 2 p & M 1 p", false)] {
        let result = satisfiable_wlwb(&parse_wlwb(text).unwrap()).is_sat();
        push(&format!("sat-wlwb `{text}`"), "unsat".into(), format!("sat={result}"), result == expect);
    }

    // the bisimulation figure
    let figure = Wts::parse(
        "wts\nstate s {a}\nstate sp {b}\nstate t {a}\nstate tp {b}\n\
         trans s 1 sp\ntrans s 2 sp\ntrans s 3 sp\ntrans t 1 tp\ntrans t 3 tp\n",
    )
    .unwrap();
    let (s, t) = (figure.state_id("s").unwrap(), figure.state_id("t").unwrap());
    let gen = gen_weighted_bisim(&figure, s, t);
    let exact = weighted_bisim(&figure, s, t);
    push("gen-bisim figure", "s ~ t".into(), format!("{gen}"), gen);
    push("bisim figure", "s !~_W t".into(), format!("{exact}"), !exact);

    // acceleration constants, closed form vs numeric oracle
    let cases: Vec<(&str, &str, Option<f64>)> = vec![
        ("exp(2)", "exp(4)", Some(2.0)),
        ("unif(0,3)", "exp(0.5)", Some(1.5)),
        ("unif(1,4)", "unif(2,3)", Some(4.0 / 3.0)),
        ("exp(1)", "unif(0,1)", None),
    ];
    for (f, g, expected) in cases {
        let cf: Cdf<f64> = parse_cdf(f).unwrap();
        let cg: Cdf<f64> = parse_cdf(g).unwrap();
        let closed = least_acceleration(&cf, &cg).map_err(|e| CliError::Input(e.to_string()))?;
        let numeric = least_acceleration_numeric(&cf, &cg, grid);
        let ok = match (expected, &closed, &numeric) {
            (Some(v), Acceleration::Finite(c), Acceleration::Finite(n)) => {
                (c - v).abs() < 1e-9 && (c - n).abs() <= 1e-6 * c.max(1.0)
            }
            (None, Acceleration::Infinite, Acceleration::Infinite) => true,
            _ => false,
        };
        push(
            &format!("least acceleration {f} vs {g}"),
            expected.map_or("inf".into(), |v| format!("{v:.4}")),
            format!("closed={closed}, numeric={numeric}"),
            ok,
        );
    }
    let clamped = c_clamped_or_numeric(
        &parse_cdf::<f64>("exp(4)").unwrap(),
        &parse_cdf::<f64>("exp(2)").unwrap(),
        grid,
    );
    push("clamped c(exp4, exp2)", "1".into(), format!("{clamped}"), clamped == Acceleration::Finite(1.0));

    // incomparability: bisimilar but not faster
    let lhs = fixtures::two_input_selfloop("exp(1)");
    let rhs = fixtures::branching_selfloop("exp(1)");
    let mut joint = lhs.clone();
    let offset = joint.absorb(&rhs).map_err(|e| CliError::Input(e.to_string()))?;
    let bis = bisimilar(&joint, 0, offset, grid).map_err(|e| CliError::Input(e.to_string()))?;
    let adversary = fixtures::half_half_scheduler(&rhs);
    // at horizon 2 the adversary halves both pure words; a single-state
    // responder cannot cover both
    let mut beaten = true;
    'resp: for (qa, qb) in [(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)] {
        for (word, is_a) in [(vec![0usize, 0], true), (vec![1usize, 1], false)] {
            let target = cylinder_prob(
                &rhs,
                &adversary,
                0,
                &TimeBoundedCylinder { word: word.clone(), bound: 2.0 },
            )
            .map_err(|e| CliError::Input(e.to_string()))?;
            let q: f64 = if is_a { qa } else { qb };
            let mine = q * q
                * cylinder_prob(
                    &lhs,
                    &Scheduler::Trivial,
                    0,
                    &TimeBoundedCylinder { word: vec![0, 0], bound: 2.0 },
                )
                .map_err(|e| CliError::Input(e.to_string()))?;
            if mine < target - 1e-12 {
                continue 'resp; // this responder fails
            }
        }
        beaten = false; // a responder covered every cylinder
        break;
    }
    push(
        "incomparability example",
        "bisimilar, not faster".into(),
        format!("bisimilar={bis}, faster={}", !beaten),
        bis && beaten,
    );

    // slow bound: direct Poisson(4)-tail summation
    let n = tempo_core::fasterthan::slow_bound_n(&[2.0, 0.5], 0.01, 2.0)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let direct = {
        let lambda = 4.0f64;
        let mut pmf = (-lambda).exp();
        let mut cum = 0.0;
        let mut k = 0usize;
        loop {
            if 1.0 - cum <= 0.01 {
                break k;
            }
            cum += pmf;
            k += 1;
            pmf *= lambda / k as f64;
        }
    };
    push("slow bound N(theta=2, b=2, eps=0.01)", format!("{direct}"), format!("{n}"), n == direct);
    let self_fast = time_bounded_additive_faster(&u, &u, 0, 0, 0.01, 2.0, None, 1e6, grid)
        .map_err(|e: FtError| CliError::Input(e.to_string()))?;
    push("additive approx reflexive", "true".into(), format!("{}", self_fast.holds), self_fast.holds);

    // keep the unused v binding honest: u is faster than its swap
    let swap_ok = faster_than_unambiguous(&u, &v, 0, 0, grid)
        .map_err(|e| CliError::Input(e.to_string()))?;
    push("two-chain faster-than", "true".into(), format!("{swap_ok}"), swap_ok);

    let all_pass = rows.iter().all(|r| r["pass"] == json!(true));
    Ok(json!({ "command": "selftest", "all_pass": all_pass, "checks": rows }))
}
