//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the report is always printed. The process
//! fails only when a criterion outside `KNOWN_SHORTFALLS` fails; the known
//! shortfall is still reported as FAIL.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use asp_pomdp::experiments::{compare, run_suite, summarize, write_csv, Metric, Suite, SummaryRow, TrialRow};
use asp_pomdp::kb::{solve_program, GroundLiteral, KbError};
use asp_pomdp::rule_lang::parse_program;
use asp_pomdp::sim::ScenarioConfig;

const TRIALS: u64 = 500;
const SEED: u64 = 42;
const KNOWN_SHORTFALLS: &[&str] = &["h3_existence"];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn lits(items: &[&str]) -> BTreeSet<GroundLiteral> {
    items.iter().map(|s| GroundLiteral::parse(s).unwrap()).collect()
}

fn kb_replication() -> Verdict {
    let printer = include_str!("../kb/printer.kb");
    let climb = include_str!("../kb/climb_stairs.kb");
    let step2 = |src: &str| -> BTreeSet<GroundLiteral> {
        let a = solve_program(&parse_program(src).unwrap()).unwrap();
        a.literals()
            .filter(|l| l.atom.predicate == "holds" && l.atom.args[1].as_int() == Some(2))
            .collect()
    };
    let without = step2(printer)
        == lits(&[
            "holds(in(printer1, lab), 2)",
            "holds(exists(printer, lab), 2)",
            "-holds(in(printer1, office), 2)",
        ]);
    let with = step2(&format!("{printer}\nholds(in(printer1, office), 2)."))
        == lits(&[
            "holds(in(printer1, office), 2)",
            "holds(exists(printer, office), 2)",
            "-holds(in(printer1, lab), 2)",
        ]);
    let a = solve_program(&parse_program(climb).unwrap()).unwrap();
    let nao_open = !a.contains(&GroundLiteral::parse("clmbstair(nao)").unwrap())
        && !a.contains(&GroundLiteral::parse("-clmbstair(nao)").unwrap());
    let peoplebot = a.contains(&GroundLiteral::parse("-clmbstair(peoplebot)").unwrap());
    verdict(
        without && with && nao_open && peoplebot,
        format!(
            "printer without/with statement {without}/{with}, -clmbstair(peoplebot) {peoplebot}, nao undetermined {nao_open}"
        ),
    )
}

fn solver_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 1000;
    let mut agree = 0;
    for _ in 0..n {
        let p = common::random_stratified(&mut rng, 12, true);
        let models = common::stable_models(&p);
        let ok = match solve_program(&parse_program(&p.to_text()).unwrap()) {
            Ok(a) => {
                let got: BTreeSet<usize> = a
                    .positive
                    .iter()
                    .map(|x| x.predicate[1..].parse().unwrap())
                    .collect();
                models.len() == 1 && got == models[0]
            }
            Err(KbError::ConstraintViolated { .. }) => models.is_empty(),
            Err(_) => false,
        };
        agree += ok as usize;
    }
    verdict(agree == n, format!("{agree}/{n} programs match brute-force enumeration"))
}

fn equation_suite() -> Verdict {
    let cases = common::equations::cases();
    let failed: Vec<&str> = cases.iter().filter(|c| !c.ok()).map(|c| c.name).collect();
    let detail = if failed.is_empty() {
        format!("{} oracle cases within tolerance", cases.len())
    } else {
        format!("off-tolerance: {}", failed.join(", "))
    };
    verdict(failed.is_empty(), detail)
}

fn point<'a>(table: &'a [SummaryRow], condition: &str, x: &str) -> &'a SummaryRow {
    table
        .iter()
        .find(|r| r.condition == condition && r.x == x)
        .unwrap_or_else(|| panic!("no summary for {condition} at {x}"))
}

fn h1(cfg: &ScenarioConfig) -> Verdict {
    let asp = summarize(&run_suite(Suite::H1AspOnly, cfg, TRIALS, SEED).unwrap());
    let acc: Vec<f64> = asp.iter().map(|r| r.accuracy).collect();
    let monotone = acc.windows(2).all(|w| w[1] >= w[0]);
    let full = *acc.last().unwrap();

    let rows = run_suite(Suite::H1Combined, cfg, TRIALS, SEED).unwrap();
    let table = summarize(&rows);
    let tests = compare(&rows, &rows, Metric::Accuracy, Some("combined"), Some("pomdp_only"), 10_000).unwrap();
    let mut beats = true;
    let mut worst_p: f64 = 0.0;
    for t in tests.iter().filter(|t| t.x.parse::<f64>().unwrap() >= 50.0) {
        beats &= t.diff > 0.0 && t.p_value < 0.01;
        worst_p = worst_p.max(t.p_value);
    }
    let combined_full = point(&table, "combined", "100").accuracy;
    let pomdp_full = point(&table, "pomdp_only", "100").accuracy;
    let levels: Vec<String> = acc.iter().map(|a| format!("{a:.3}")).collect();
    verdict(
        monotone && full == 1.0 && beats && combined_full >= 0.9,
        format!(
            "room inference [{}] non-decreasing {monotone}; combined {combined_full:.3} vs pomdp-only {pomdp_full:.3} at 100%; combined > pomdp-only at >=50% {beats} (max p {worst_p:.4})",
            levels.join(" ")
        ),
    )
}

fn merge_ordering(cfg: &ScenarioConfig) -> Verdict {
    let table = summarize(&run_suite(Suite::MergeComparison, cfg, TRIALS, SEED).unwrap());
    let bayes = table.iter().find(|r| r.condition == "bayesian").unwrap();
    let q = |r: &SummaryRow| (r.error_q50.unwrap_or(f64::INFINITY), r.error_q80.unwrap_or(f64::INFINITY));
    let (b50, b80) = q(bayes);
    let mut pass = true;
    let mut parts = vec![format!("bayesian q50 {b50:.2} q80 {b80:.2}")];
    for r in table.iter().filter(|r| r.condition != "bayesian") {
        let (o50, o80) = q(r);
        pass &= b50 <= o50 && b80 <= o80;
        parts.push(format!("{} q50 {o50:.2} q80 {o80:.2}", r.condition));
    }
    verdict(pass, parts.join("; "))
}

fn h2(cfg: &ScenarioConfig) -> Verdict {
    let table = summarize(&run_suite(Suite::H2EntropySweep, cfg, TRIALS, SEED).unwrap());
    let acc: Vec<f64> = table.iter().map(|r| r.accuracy).collect();
    let n = acc.len();
    let (best_i, best) = acc[1..n - 1]
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |(bi, b), (i, &a)| if a > b { (i + 1, a) } else { (bi, b) });
    let interior = best > acc[0] && best > acc[n - 1];
    let mut run = 0;
    let mut longest = 0;
    for &a in &acc {
        run = if best - a <= 0.02 { run + 1 } else { 0 };
        longest = longest.max(run);
    }
    verdict(
        interior && longest >= 3,
        format!(
            "gate {} best {best:.3}; ends {:.3}/{:.3}; plateau {longest} gates within 2pp",
            table[best_i].x,
            acc[0],
            acc[n - 1]
        ),
    )
}

fn h3(cfg: &ScenarioConfig) -> Verdict {
    let table = summarize(&run_suite(Suite::H3Existence, cfg, TRIALS, SEED).unwrap());
    let t = table.iter().find(|r| r.condition == "tracking").unwrap();
    let b = table.iter().find(|r| r.condition == "baseline").unwrap();
    let absent = |r: &SummaryRow| r.absent_mean_time.unwrap_or(f64::INFINITY);
    let within = t.within_75 >= 0.9;
    let earlier = absent(t) < absent(b);
    let accurate = t.accuracy >= b.accuracy;
    let faster = t.mean_time < b.mean_time;
    verdict(
        within && earlier && accurate && faster,
        format!(
            "within 75% of limit {:.3} ({within}); absent mean time {:.1} vs {:.1} ({earlier}); accuracy {:.3} vs {:.3} ({accurate}); mean time {:.1} vs {:.1} ({faster})",
            t.within_75,
            absent(t),
            absent(b),
            t.accuracy,
            b.accuracy,
            t.mean_time,
            b.mean_time
        ),
    )
}

fn determinism(cfg: &ScenarioConfig) -> Verdict {
    let csv = |suite| {
        let rows: Vec<TrialRow> = run_suite(suite, cfg, 100, 7).unwrap();
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        out
    };
    let mut same = true;
    for suite in [Suite::H1AspOnly, Suite::MergeComparison, Suite::H3Existence] {
        same &= csv(suite) == csv(suite);
    }
    verdict(same, "reruns with equal seed and config give byte-identical CSV")
}

fn main() -> ExitCode {
    let cfg = ScenarioConfig::default();
    let criteria: [(&str, &dyn Fn() -> Verdict); 8] = [
        ("kb_replication", &kb_replication),
        ("solver_oracle", &solver_oracle),
        ("equation_suite", &equation_suite),
        ("h1_knowledge", &|| h1(&cfg)),
        ("merge_ordering", &|| merge_ordering(&cfg)),
        ("h2_entropy_gate", &|| h2(&cfg)),
        ("h3_existence", &|| h3(&cfg)),
        ("determinism", &|| determinism(&cfg)),
    ];
    let mut unexpected = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass && !KNOWN_SHORTFALLS.contains(&name) {
            unexpected.push(name);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
