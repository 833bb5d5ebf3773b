//! Batteries for the labelled claims and the rendered claim table.

use palinword::morphisms::{verify_cubefree_transfer_nonuniform, TransferResult};
use palinword::repetitions::return_words;
use palinword::words::insert_marker;
use palinword::{fixtures, languages, Rational, Word};

use crate::cert::{show_word, Certificate, Status};
use crate::commands::{self, census_of_images, morphism_battery, CliError, CliResult, ConstraintArgs, Expect, Global};

pub const LABELS: [&str; 14] = ["3.a", "3.b", "3.c", "3.d", "3.e", "3.f", "lp.a", "lp.b", "lp.c", "3", "5", "8", "012", "table1"];

/// Copies `child`'s results under `prefix.` and folds in its status.
fn merge(parent: &mut Certificate, prefix: &str, child: Certificate) {
    for (k, v) in child.result {
        parent.result(&format!("{prefix}.{k}"), v);
    }
    parent.result(&format!("{prefix}.status"), child.status.label());
    parent.status(child.status);
}

/// Runs `f` on a fresh certificate; errors become a status with a message.
fn step(parent: &mut Certificate, prefix: &str, f: impl FnOnce(&mut Certificate) -> CliResult<()>) -> CliResult<Status> {
    let mut child = Certificate::new(prefix);
    match f(&mut child) {
        Ok(()) => {}
        Err(CliError::Run(s, msg)) => {
            child.result("error", msg);
            child.status(s);
        }
        Err(e) => return Err(e),
    }
    let s = child.status;
    merge(parent, prefix, child);
    Ok(s)
}

pub fn reproduce(label: &str, g: &Global) -> CliResult<Certificate> {
    if !LABELS.contains(&label) {
        return Err(CliError::Usage(format!("unknown claim {label:?}; expected one of {}", LABELS.join(", "))));
    }
    let mut cert = Certificate::new("reproduce");
    cert.input("claim", label).input("long", g.long).input("budget", g.budget);
    if g.check_only {
        cert.result("check_only", "inputs parsed");
        return Ok(cert);
    }
    if label == "table1" {
        table1(&mut cert, g)?;
    } else {
        run_claim(&mut cert, label, g)?;
    }
    Ok(cert)
}

fn run_claim(cert: &mut Certificate, label: &str, g: &Global) -> CliResult<Status> {
    match label {
        "3.a" => step(cert, label, claim_3a),
        "3" => step(cert, label, |c| optimality(c, g)),
        "5" => step(cert, label, battery_5),
        "8" => step(cert, label, |c| battery_8(c, g)),
        "012" => step(cert, label, |c| {
            commands::palindrome_census(c, &fixtures::word("periodic-012", 10_000)?, Some(4));
            Ok(())
        }),
        _ => step(cert, label, |c| {
            let claim = fixtures::transfer_claim(label)?;
            let m = fixtures::morphism(claim.morphism)?;
            let pattern = claim.pattern.map(str::parse).transpose()?;
            c.result("morphism", claim.morphism).result("alpha", claim.alpha).result("beta", claim.beta);
            morphism_battery(c, &m, claim.alpha, claim.beta, claim.palindromes, pattern.as_ref())
        }),
    }
}

/// Cube-free binary words of length 24 and their f-images.
fn claim_3a(c: &mut Certificate) -> CliResult<()> {
    let tc = verify_cubefree_transfer_nonuniform()?;
    c.result("alpha", tc.alpha).result("beta", tc.beta);
    c.result("max_source_length", tc.max_source_length).result("words_checked", tc.words_checked).result("words_at_max_length", tc.words_at_max_length);
    match &tc.result {
        TransferResult::Pass => {
            c.result("transfer", "PASS");
        }
        TransferResult::Fail { source_word, .. } => {
            c.result("transfer", "FAIL").result("counterexample", source_word);
            c.status(Status::Refuted);
        }
    }
    census_of_images(c, &fixtures::morphism("f")?, tc.alpha, Some(5))
}

/// Finiteness searches: no long word meets these constraints.
fn optimality(c: &mut Certificate, g: &Global) -> CliResult<()> {
    for name in ["4122-17-palindromes", "sqfree-010-16"] {
        let cs = ConstraintArgs::named(name).build()?;
        let mut child = Certificate::new(name);
        commands::search(&mut child, &cs, 10_000, Expect::Exhausted, g, None, None)?;
        merge(c, name, child);
    }
    Ok(())
}

fn battery_5(c: &mut Certificate) -> CliResult<()> {
    let t = fixtures::word("t", 10_000)?;
    let mut sub = Certificate::new("census");
    commands::palindrome_census(&mut sub, &t, Some(6));
    merge(c, "census", sub);

    let mut sub = Certificate::new("exponent");
    commands::exponent_of(&mut sub, &t, Some(Rational::from_integer(2)))?;
    merge(c, "exponent", sub);

    let allowed: Vec<Word> = ["201", "2001", "2011", "20011"].iter().map(|s| s.parse().unwrap()).collect();
    let rs = return_words(&t, &"2".parse()?)?;
    let inside = rs.returns.iter().all(|r| allowed.contains(r));
    c.result("returns_to_2", rs.returns.iter().map(show_word).collect::<Vec<_>>().join(","));
    c.result("returns_within_listed_set", inside);
    c.status(if inside { Status::Verified } else { Status::Refuted });

    let marker = |n: usize| insert_marker(&fixtures::thue_morse(n), &"10".parse().unwrap(), 2).unwrap();
    let equal = languages::factor_sets_equal(fixtures::t_word, marker, 50)?;
    c.result("factor_sets_equal_insertion_50", equal);
    c.status(if equal { Status::Verified } else { Status::Refuted });
    Ok(())
}

pub const WITNESS_PERIODS: [&str; 2] = ["2012101202120102012021", "1201020121012021201210"];

/// The factor `period^(41/22)` of length 41.
pub fn witness_power(period: &str) -> Word {
    let p: Word = period.parse().unwrap();
    let n = p.len() * 41 / 22;
    Word::new(p.letters().iter().cycle().take(n).copied().collect())
}

fn battery_8(c: &mut Certificate, g: &Global) -> CliResult<()> {
    let mut sub = Certificate::new("census");
    commands::palindrome_census(&mut sub, &fixtures::word("g-h", 10_000)?, Some(16));
    merge(c, "census", sub);

    let w = fixtures::word("g-h", 100_000)?;
    let mut sub = Certificate::new("exponent");
    commands::exponent_of(&mut sub, &w, Some(Rational::new(41, 22)))?;
    for (i, p) in WITNESS_PERIODS.iter().enumerate() {
        let found = w.contains_factor(witness_power(p).letters());
        sub.result(&format!("witness_{}_found", i + 1), found);
        sub.status(if found { Status::Verified } else { Status::Refuted });
    }
    merge(c, "exponent", sub);

    let mut sub = Certificate::new("ddp");
    commands::ddp(&mut sub, &commands::word_spec("g-h")?, 200, 63, Some(Rational::new(41, 22)), false)?;
    merge(c, "critical_exponent", sub);

    let cores: [(&str, &str, usize); 2] = if g.long { [("eta-good", "eta", 58), ("gamma-good", "gamma-eta", 186)] } else { [("eta-good", "eta", 20), ("gamma-good", "gamma-eta", 20)] };
    for (cs, word, len) in cores {
        let lang = languages::extendable_core(&ConstraintArgs::named(cs).build()?, len, Some(g.budget))?;
        let mut sub = Certificate::new("core");
        sub.result("length", len).result("core_size", lang.len());
        commands::compare_with_word(&mut sub, &lang, word)?;
        merge(c, &format!("core.{cs}"), sub);
    }

    let sixteen = languages::extendable_core(&ConstraintArgs::named("16-good").build()?, 21, Some(g.budget))?;
    let graph = languages::rauzy_graph(&sixteen)?;
    let mut sub = Certificate::new("rauzy");
    commands::rauzy_report(&mut sub, &graph, &"0120".parse()?, Some("gamma-eta"))?;
    let comps = graph.weak_components().len();
    sub.status(if comps == 2 { Status::Verified } else { Status::Refuted });
    let better = languages::extendable_core(&ConstraintArgs::named("17-better").build()?, 21, Some(g.budget))?;
    let cond = languages::rauzy_graph(&better)?.condensation();
    let iso = cond.induced.isomorphic(&graph.condensation().induced);
    sub.result("scc_isomorphic_17_better", iso);
    sub.status(if iso { Status::Verified } else { Status::Refuted });
    merge(c, "rauzy.16-good", sub);
    Ok(())
}

/// Labelled cells: (label, palindromes, column).
const CELLS: [(&str, usize, usize); 9] = [("3.f", 18, 0), ("3.e", 17, 2), ("8", 16, 1), ("3.d", 16, 3), ("3.c", 7, 4), ("5", 6, 4), ("3.b", 6, 5), ("3.a", 5, 6), ("012", 4, 7)];
const COLUMNS: [&str; 8] = ["7/4+", "41/22+", "25/13+", "52/27+", "2+", "9/4+", "10/3+", "inf"];

fn table1(cert: &mut Certificate, g: &Global) -> CliResult<()> {
    let mut statuses = Vec::new();
    for (label, _, _) in CELLS {
        statuses.push((label, run_claim(cert, label, g)?));
    }
    if g.long {
        statuses.push(("3", run_claim(cert, "3", g)?));
    } else {
        cert.result("3", "skipped (needs --long)");
    }
    let mark = |s: Status| match s {
        Status::Verified => "ok",
        Status::Refuted => "FAIL",
        Status::Inconclusive => "?",
        Status::NotApplicable => "n/a",
    };
    let width = 10;
    let mut out = format!("{:>4} |", "p");
    for col in COLUMNS {
        out.push_str(&format!(" {col:<width$}|"));
    }
    out.push('\n');
    for p in (4..=18).rev() {
        out.push_str(&format!("{p:>4} |"));
        for col in 0..COLUMNS.len() {
            let cell = CELLS.iter().find(|&&(_, q, c)| q == p && c == col).map(|&(l, _, _)| {
                let s = statuses.iter().find(|(x, _)| *x == l).map(|x| x.1).unwrap();
                format!("{l} {}", mark(s))
            });
            out.push_str(&format!(" {:<width$}|", cell.unwrap_or_default()));
        }
        out.push('\n');
    }
    cert.report = Some(out);
    Ok(())
}
