use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use amtree::io;
use amtree::measure::MeasureTree;
use amtree::random::{
    beta_splitting_tree, comb_tree, random_atomic, random_t2, random_tree, symmetric_binary, Beta,
};
use amtree::rng::mix;
use amtree::shapes::{shape_distribution, Mode, ShapeDistribution};
use amtree::stats::{
    distance_polynomial_empirical, distance_polynomial_exact, glivenko_cantelli_sup, massdist,
    vc_shatter_check, wasserstein_linf, Family, MatrixFn,
};
use amtree::tree::{verify_axioms, CheckMode};
use amtree::triangulation::{
    self, decode as decode_tree, hausdorff_distance, render_svg, uniform_triangulation, PlanarChoice,
    Triangulation,
};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::{
    CheckArgs, CodeArgs, CompareArgs, DecodeArgs, GenArgs, Metric, Model, RenderArgs, SampleArgs,
    Stat, Suite,
};

fn meta<A: Serialize>(command: &str, args: &A) -> Value {
    json!({
        "tool": "amt",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": args,
    })
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| CliError::Usage(format!("{what} is random and needs --seed")))
}

fn need<T>(v: Option<T>, flag: &str, model: &str) -> Result<T> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for {model}")))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            let res = out
                .write_all(text.as_bytes())
                .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
                .and_then(|_| out.flush());
            match res {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn hash(mt: &MeasureTree) -> String {
    let digest = Sha256::digest(mt.canonical_form().0.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn json_value(path: &Path, text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| amtree::Error::Parse(format!("{}: {e}", path.display())).into())
}

fn is_triangulation(v: &Value) -> bool {
    v.get("triangles").is_some() || v.get("boundary").is_some()
}

fn read_tree(path: &Path) -> Result<MeasureTree> {
    Ok(io::measure_tree_from_json(&read(path)?)?)
}

fn read_triangulation(path: &Path) -> Result<Triangulation> {
    let t = io::triangulation_from_json(&read(path)?)?;
    let report = t.validate();
    if !report.ok() {
        return Err(CliError::Verify(format!(
            "{}: invalid triangulation: {}",
            path.display(),
            report.violations.join("; ")
        )));
    }
    Ok(t)
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let beta: Beta = a.beta.parse()?;
    let mt = match a.model {
        Model::Beta => {
            let seed = need_seed(a.seed, "the beta model")?;
            beta_splitting_tree(need(a.n, "n", "beta")?, beta, seed)?
        }
        Model::Comb => comb_tree(need(a.n, "n", "comb")?)?,
        Model::Symmetric => symmetric_binary(need(a.k, "k", "symmetric")?)?,
        Model::Triangulation => {
            let seed = need_seed(a.seed, "the triangulation model")?;
            uniform_triangulation(need(a.n, "n", "triangulation")?, seed)?.code()?
        }
        Model::Random => {
            let seed = need_seed(a.seed, "the random model")?;
            random_atomic(random_tree(need(a.n, "n", "random")?, seed)?, mix(seed, 1))
        }
    };
    write_out(&a.out, &io::measure_tree_to_json(&mt, Some(meta("gen", a))))?;
    let line = format!("canonical {}", hash(&mt));
    if a.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

pub fn code(a: &CodeArgs) -> Result<()> {
    let t = read_triangulation(&a.input)?;
    let mt = t.code()?;
    if a.verify {
        let back = decode_tree(&mt, None, PlanarChoice::Canonical)?;
        if !triangulation::equivalent(&t, &back)? {
            return Err(CliError::Verify("decoding the coded tree gives an inequivalent triangulation".into()));
        }
    }
    write_out(&a.out, &io::measure_tree_to_json(&mt, Some(meta("code", a))))
}

pub fn decode(a: &DecodeArgs) -> Result<()> {
    let mt = read_tree(&a.input)?;
    let choice = match a.seed {
        Some(s) => PlanarChoice::Random(s),
        None => PlanarChoice::Canonical,
    };
    let t = decode_tree(&mt, a.rho, choice)?;
    if a.verify && !t.code()?.equivalent(&mt) {
        return Err(CliError::Verify("coding the triangulation gives an inequivalent tree".into()));
    }
    write_out(&a.out, &io::triangulation_to_json(&t, Some(meta("decode", a))))
}

fn mode(exact: bool, samples: usize, seed: Option<u64>) -> Result<Mode> {
    if exact {
        Ok(Mode::Exact)
    } else {
        Ok(Mode::Sampled {
            samples,
            seed: need_seed(seed, "sampling")?,
        })
    }
}

pub fn sample(a: &SampleArgs) -> Result<()> {
    let mt = read_tree(&a.input)?;
    let meta = meta("sample", a);
    let text = match a.stat {
        Stat::Shape => io::shape_csv(&shape_distribution(&mt, a.m, mode(a.exact, a.samples, a.seed)?)?, &meta),
        Stat::Mass => io::tensor_distribution_to_json(&massdist(&mt, a.m, mode(a.exact, a.samples, a.seed)?)?, Some(meta)),
        Stat::Distance => {
            let phi = MatrixFn::mean_offdiagonal();
            let v = if a.exact {
                json!({ "meta": meta, "phi": distance_polynomial_exact(&mt, a.m, &phi)?, "exact": true })
            } else {
                let seed = need_seed(a.seed, "sampling")?;
                let (est, trials) = distance_polynomial_empirical(&mt, a.m, &phi, a.samples, a.trials, seed)?;
                json!({
                    "meta": meta,
                    "phi": est.estimate,
                    "std_error": est.std_error,
                    "trials": trials.iter().map(|t| t.phi_empirical).collect::<Vec<_>>(),
                    "exact": false,
                })
            };
            serde_json::to_string_pretty(&v).expect("json value")
        }
    };
    write_out(&a.out, &text)
}

fn shape_law(path: &Path, a: &CompareArgs) -> Result<ShapeDistribution> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        let m = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .and_then(|l| serde_json::from_str::<Value>(l).ok())
            .and_then(|v| v["config"]["m"].as_u64())
            .ok_or_else(|| amtree::Error::Parse(format!("{}: no m in header", path.display())))?;
        return Ok(io::shape_csv_read(&text, m as usize)?);
    }
    let mt = io::measure_tree_from_json(&text)?;
    Ok(shape_distribution(&mt, a.m, mode(a.exact, a.samples, a.seed)?)?)
}

fn tensor_law(path: &Path, a: &CompareArgs) -> Result<amtree::dist::Distribution<amtree::stats::MassTensor>> {
    let text = read(path)?;
    let v = json_value(path, &text)?;
    if v.get("rows").is_some() {
        return Ok(io::tensor_distribution_from_json(&text)?);
    }
    let mt = io::measure_tree_from_json(&text)?;
    Ok(massdist(&mt, a.m, mode(a.exact, a.samples, a.seed)?)?)
}

fn polynomial(path: &Path, a: &CompareArgs) -> Result<f64> {
    let mt = read_tree(path)?;
    let phi = MatrixFn::mean_offdiagonal();
    if a.exact {
        Ok(distance_polynomial_exact(&mt, a.m, &phi)?)
    } else {
        let seed = need_seed(a.seed, "sampling")?;
        Ok(distance_polynomial_empirical(&mt, a.m, &phi, a.samples, 20, seed)?.0.estimate)
    }
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    // both sides share the seed, so identical inputs compare to zero
    let (distance, method) = match a.metric {
        Metric::Tv => {
            let (x, y) = (shape_law(&a.a, a)?, shape_law(&a.b, a)?);
            (x.tv_distance(&y)?, "total_variation".to_string())
        }
        Metric::Wasserstein => {
            let w = wasserstein_linf(&tensor_law(&a.a, a)?, &tensor_law(&a.b, a)?)?;
            let method = serde_json::to_value(w.method).expect("enum");
            (w.distance, method.as_str().unwrap_or_default().to_string())
        }
        Metric::Polynomial => ((polynomial(&a.a, a)? - polynomial(&a.b, a)?).abs(), "absolute_difference".into()),
        Metric::Hausdorff => {
            let (x, y) = (read_triangulation(&a.a)?, read_triangulation(&a.b)?);
            (hausdorff_distance(&x, &y, a.tol)?, "grid".into())
        }
    };
    let v = json!({ "meta": meta("compare", a), "distance": distance, "method": method });
    write_out(&None, &serde_json::to_string_pretty(&v).expect("json value"))?;
    Ok(())
}

struct Outcome {
    suite: &'static str,
    cases: usize,
    failures: Vec<String>,
}

fn trial_size(seed: u64, i: usize, lo: usize, hi: usize) -> usize {
    lo + (mix(seed, i as u64) % (hi - lo + 1) as u64) as usize
}

fn check_axioms(trees: &[MeasureTree]) -> Outcome {
    let mut failures = Vec::new();
    for (i, mt) in trees.iter().enumerate() {
        let r = verify_axioms(mt.tree(), CheckMode::Exhaustive);
        if !r.ok() {
            failures.push(format!("tree {i}: {:?}", r.violations.first()));
        }
    }
    Outcome { suite: "axioms", cases: trees.len(), failures }
}

fn check_oracle(trees: &[MeasureTree]) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for (i, mt) in trees.iter().enumerate() {
        if !mt.is_atomic() {
            continue;
        }
        cases += 1;
        if mt.branch_point_distribution()? != mt.branch_point_distribution_bruteforce()? {
            failures.push(format!("tree {i}: closed form differs from enumeration"));
        }
        if mt.total_length()? != mt.edge_length_sum()? {
            failures.push(format!("tree {i}: total length differs from the edge sum"));
        }
    }
    Ok(Outcome { suite: "oracle", cases, failures })
}

fn check_coding(trees: &[MeasureTree]) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for (i, mt) in trees.iter().enumerate() {
        if !mt.in_t2() {
            continue;
        }
        cases += 1;
        let t = decode_tree(mt, None, PlanarChoice::Random(i as u64))?;
        if !t.validate().ok() || !t.code()?.equivalent(mt) {
            failures.push(format!("tree {i}: round trip failed"));
        }
    }
    Ok(Outcome { suite: "coding", cases, failures })
}

fn check_vc(trees: &[MeasureTree]) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for (i, mt) in trees.iter().enumerate() {
        if mt.len() > 24 {
            continue;
        }
        cases += 1;
        for (family, k) in [(Family::Intervals, 3), (Family::Components, 4)] {
            let r = vc_shatter_check(mt.tree(), family, k)?;
            if r.shattered {
                failures.push(format!("tree {i}: {family:?} shatter {:?}", r.witness));
            }
        }
    }
    Ok(Outcome { suite: "vc", cases, failures })
}

fn check_gc(mt: &MeasureTree, trials: usize, seed: u64) -> Result<Outcome> {
    let mut failures = Vec::new();
    for family in [Family::Intervals, Family::Components] {
        let r = glivenko_cantelli_sup(mt, family, 1000, trials, seed)?;
        if !r.bound_holds() {
            failures.push(format!("{family:?}: sup {} above {}", r.max_sup, r.bound));
        }
    }
    Ok(Outcome { suite: "gc", cases: 2 * trials, failures })
}

pub fn check(a: &CheckArgs) -> Result<()> {
    let wants = |s: Suite| a.suite == Suite::All || a.suite == s;
    let random_needed = a.input.is_none() || wants(Suite::Gc);
    let seed = if random_needed { need_seed(a.seed, "check")? } else { 0 };
    if a.max_n == 0 {
        return Err(CliError::Usage("--max-n must be positive".into()));
    }
    let trees: Vec<MeasureTree> = match &a.input {
        Some(p) => vec![read_tree(p)?],
        None => (0..a.trials)
            .map(|i| {
                let n = trial_size(seed, i, 1, a.max_n);
                random_tree(n, mix(seed, i as u64 + 1)).map(|t| random_atomic(t, mix(seed, i as u64 + 2)))
            })
            .collect::<Result<_, _>>()?,
    };
    let mut outcomes = Vec::new();
    if wants(Suite::Axioms) {
        outcomes.push(check_axioms(&trees));
    }
    if wants(Suite::Oracle) {
        outcomes.push(check_oracle(&trees)?);
    }
    if wants(Suite::Coding) {
        let coded: Vec<MeasureTree> = match &a.input {
            Some(_) => trees.clone(),
            None => (0..a.trials)
                .map(|i| random_t2(trial_size(seed, i, 1, 4 * a.max_n), mix(seed, i as u64 + 3)))
                .collect::<Result<_, _>>()?,
        };
        outcomes.push(check_coding(&coded)?);
    }
    if wants(Suite::Vc) {
        outcomes.push(check_vc(&trees)?);
    }
    if wants(Suite::Gc) {
        let mt = match &a.input {
            Some(_) => trees[0].clone(),
            None => random_atomic(random_tree(a.max_n, mix(seed, 4))?, mix(seed, 5)),
        };
        outcomes.push(check_gc(&mt, a.trials.min(100), seed)?);
    }
    let mut failed = 0;
    for o in &outcomes {
        let status = if o.failures.is_empty() { "pass" } else { "FAIL" };
        println!("{:<8} {status}  {} cases", o.suite, o.cases);
        for f in o.failures.iter().take(5) {
            println!("    {f}");
        }
        failed += usize::from(!o.failures.is_empty());
    }
    if failed > 0 {
        return Err(CliError::CheckFailed(failed));
    }
    Ok(())
}

pub fn render(a: &RenderArgs) -> Result<()> {
    let text = read(&a.input)?;
    let t = if is_triangulation(&json_value(&a.input, &text)?) {
        read_triangulation(&a.input)?
    } else {
        decode_tree(&io::measure_tree_from_json(&text)?, None, PlanarChoice::Canonical)?
    };
    let comment = serde_json::to_string(&meta("render", a)).expect("json value");
    write_out(&a.out, &render_svg(&t, a.dual, Some(&comment))?)
}
