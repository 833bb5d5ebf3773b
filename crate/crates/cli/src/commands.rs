use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use palinword::avoidance::{backtrack_with, BacktrackOptions, Checkpoint, ConstraintSet, LetterPattern, Outcome};
use palinword::bispecial::{self, DdpOptions, Provenance, WordSpec};
use palinword::languages::{self, FactorLanguage, RauzyGraph};
use palinword::morphisms::{image_palindromes, images_avoid_pattern, verify_transfer, Morphism, TransferResult};
use palinword::repetitions::max_exponent;
use palinword::words::distinct_palindromes;
use palinword::{fixtures, Error, Rational, Threshold, Word};

use crate::cert::{show_word, Certificate, Status};

/// Why a command did not produce a certificate.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Status, String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::AlphabetSize(_)
            | Error::LetterOutOfRange { .. }
            | Error::WordSyntax(_)
            | Error::ThresholdSyntax(_)
            | Error::ThresholdRange(_)
            | Error::Morphism(_)
            | Error::Constraints(_)
            | Error::UnknownFixture(_)
            | Error::Checkpoint(_) => CliError::Usage(msg),
            Error::Budget(_) | Error::Unstable(_) => CliError::Run(Status::Inconclusive, msg),
            _ => CliError::Run(Status::NotApplicable, msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Options shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Global {
    pub check_only: bool,
    pub jobs: usize,
    pub long: bool,
    pub budget: u64,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// A built-in name, or a path to a file in the morphism format.
pub fn load_morphism(spec: &str) -> CliResult<Morphism> {
    if fixtures::morphism_names().contains(&spec) {
        return Ok(fixtures::morphism(spec)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(usage(format!("{spec}: neither a built-in morphism ({}) nor a file", fixtures::morphism_names().join(", "))));
    }
    Ok(read_file(path)?.parse()?)
}

fn parse_threshold(s: &str) -> CliResult<Threshold> {
    Ok(s.parse()?)
}

fn parse_rational(s: &str) -> CliResult<Rational> {
    let bad = || usage(format!("invalid rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

#[derive(Args, Debug, Clone, Default)]
pub struct ConstraintArgs {
    /// Built-in constraint set or a constraint file (key=value lines)
    #[arg(long, short = 'c')]
    pub constraints: Option<String>,
    #[arg(long)]
    pub alphabet: Option<usize>,
    /// Repetition threshold, e.g. 7/4+ (strict) or 41/22
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub max_palindromes: Option<usize>,
    /// Forbidden factors, comma separated
    #[arg(long, value_delimiter = ',')]
    pub forbid: Vec<String>,
    #[arg(long)]
    pub square_free: bool,
    /// Letter patterns to avoid, comma separated
    #[arg(long, value_delimiter = ',')]
    pub letter_patterns: Vec<String>,
    /// Forbid overpals
    #[arg(long)]
    pub no_overpals: bool,
    /// Palindromes must be factors of one of these words
    #[arg(long, value_delimiter = ',')]
    pub allowed_palindromes: Vec<String>,
    /// At most k of the listed factors occur: k:w1,w2,...
    #[arg(long)]
    pub at_most: Vec<String>,
}

impl ConstraintArgs {
    pub fn named(name: &str) -> Self {
        ConstraintArgs { constraints: Some(name.to_string()), ..Default::default() }
    }

    pub fn build(&self) -> CliResult<ConstraintSet> {
        let mut text = match &self.constraints {
            None => String::new(),
            Some(name) if fixtures::constraint_names().contains(&name.as_str()) => fixtures::constraints(name)?.to_string(),
            Some(path) => {
                let p = Path::new(path);
                if !p.exists() {
                    return Err(usage(format!("{path}: neither a built-in constraint set ({}) nor a file", fixtures::constraint_names().join(", "))));
                }
                read_file(p)?
            }
        };
        let mut line = |k: &str, v: String| text.push_str(&format!("\n{k}={v}"));
        if let Some(a) = self.alphabet {
            line("alphabet", a.to_string());
        }
        if let Some(t) = &self.threshold {
            line("threshold", t.clone());
        }
        if let Some(k) = self.max_palindromes {
            line("max_palindromes", k.to_string());
        }
        if !self.forbid.is_empty() {
            line("forbid", self.forbid.join(","));
        }
        if self.square_free {
            line("square_free", "yes".into());
        }
        if !self.letter_patterns.is_empty() {
            line("letter_patterns", self.letter_patterns.join(","));
        }
        if self.no_overpals {
            line("overpals", "no".into());
        }
        if !self.allowed_palindromes.is_empty() {
            line("allowed_palindromes", self.allowed_palindromes.join(","));
        }
        for l in &self.at_most {
            line("at_most", l.clone());
        }
        if text.trim().is_empty() {
            return Err(usage("no constraints given"));
        }
        Ok(text.parse()?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct WordArgs {
    /// Built-in infinite word: periodic-012, thue-morse, t, eta, h, gamma-eta, g-h
    #[arg(long, conflicts_with = "text")]
    pub word: Option<String>,
    /// Prefix length of the built-in word
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    /// A finite word given literally
    #[arg(long)]
    pub text: Option<String>,
}

impl WordArgs {
    pub fn build(&self) -> CliResult<(String, Word)> {
        match (&self.word, &self.text) {
            (Some(name), None) => Ok((format!("{name}[..{}]", self.length), fixtures::word(name, self.length)?)),
            (None, Some(t)) => Ok((t.clone(), t.parse()?)),
            _ => Err(usage("give --word NAME or --text WORD")),
        }
    }
}

fn check_only(mut cert: Certificate) -> Certificate {
    cert.result("check_only", "inputs parsed");
    cert
}

#[derive(Args, Debug, Clone)]
pub struct VerifyMorphismArgs {
    /// Built-in morphism or a morphism file (lines `a -> image`)
    #[arg(long, short = 'm')]
    pub morphism: String,
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub beta: String,
    /// Claimed bound on the number of palindromes in images
    #[arg(long)]
    pub palindromes: Option<usize>,
    /// Letter pattern claimed absent from images
    #[arg(long)]
    pub pattern: Option<String>,
}

pub fn verify_morphism(a: &VerifyMorphismArgs, g: &Global) -> CliResult<Certificate> {
    let m = load_morphism(&a.morphism)?;
    let (alpha, beta) = (parse_threshold(&a.alpha)?, parse_threshold(&a.beta)?);
    let pattern: Option<LetterPattern> = a.pattern.as_deref().map(str::parse).transpose()?;
    let mut cert = Certificate::new("verify-morphism");
    cert.input("morphism", &m).input("alpha", alpha).input("beta", beta);
    if let Some(p) = a.palindromes {
        cert.input("palindrome_bound", p);
    }
    if let Some(p) = &pattern {
        cert.input("pattern", p);
    }
    if g.check_only {
        return Ok(check_only(cert));
    }
    morphism_battery(&mut cert, &m, alpha, beta, a.palindromes, pattern.as_ref())?;
    Ok(cert)
}

/// Classification, transfer check, image palindrome census and pattern check.
pub fn morphism_battery(cert: &mut Certificate, m: &Morphism, alpha: Threshold, beta: Threshold, bound: Option<usize>, pattern: Option<&LetterPattern>) -> CliResult<()> {
    let class = m.classify();
    cert.result("uniform_length", class.uniform_length.map_or("none".to_string(), |q| q.to_string()));
    cert.result("synchronizing", class.synchronizing);
    match verify_transfer(m, alpha, beta) {
        Ok(tc) => {
            cert.result("t", tc.t.map_or("none".to_string(), |t| t.to_string()));
            cert.result("max_source_length", tc.max_source_length);
            cert.result("words_checked", tc.words_checked);
            cert.result("words_at_max_length", tc.words_at_max_length);
            match &tc.result {
                TransferResult::Pass => {
                    cert.result("transfer", "PASS");
                }
                TransferResult::Fail { source_word, repetition, factor } => {
                    cert.result("transfer", "FAIL");
                    cert.result("counterexample", source_word);
                    cert.result("image_factor", show_word(factor));
                    cert.result("exponent", repetition.exponent());
                    cert.status(Status::Refuted);
                }
            }
        }
        Err(Error::TransferInapplicable(msg)) => {
            cert.result("transfer", format!("not applicable: {msg}"));
            cert.status(Status::NotApplicable);
        }
        Err(e) => return Err(e.into()),
    }
    census_of_images(cert, m, alpha, bound)?;
    if let Some(p) = pattern {
        match images_avoid_pattern(m, alpha, p)? {
            Ok(()) => {
                cert.result("pattern", "absent");
            }
            Err(src) => {
                cert.result("pattern", format!("present in the image of {src}"));
                cert.status(Status::Refuted);
            }
        }
    }
    Ok(())
}

pub fn census_of_images(cert: &mut Certificate, m: &Morphism, alpha: Threshold, bound: Option<usize>) -> CliResult<()> {
    match image_palindromes(m, alpha) {
        Ok(pals) => {
            cert.result("image_palindromes", pals.len());
            if pals.len() <= 32 {
                cert.result("image_palindrome_list", pals.iter().map(show_word).collect::<Vec<_>>().join(","));
            }
            if let Some(b) = bound {
                cert.status(if pals.len() <= b { Status::Verified } else { Status::Refuted });
            }
        }
        Err(Error::Unstable(lambda)) => {
            cert.result("image_palindromes", format!("unbounded below length {lambda}"));
            if bound.is_some() {
                cert.status(Status::Inconclusive);
            }
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Expect {
    Reached,
    Exhausted,
}

#[derive(Args, Debug, Clone)]
pub struct BacktrackArgs {
    #[command(flatten)]
    pub constraints: ConstraintArgs,
    /// Length of the word searched for
    #[arg(long)]
    pub target: usize,
    /// The claimed outcome
    #[arg(long, value_enum, default_value_t = Expect::Reached)]
    pub expect: Expect,
    /// Write a resumable checkpoint here if the budget runs out
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Resume from a checkpoint file
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

const CHECKPOINT_FORMAT: &str = "palinword-checkpoint/1";

fn write_checkpoint(path: &Path, c: &ConstraintSet, target: usize, cp: &Checkpoint) -> CliResult<()> {
    let text = format!(
        "format={CHECKPOINT_FORMAT}\nconstraints={}\ntarget={target}\nfrontier={}\nnodes={}\nlongest={}\n",
        c.to_string().lines().collect::<Vec<_>>().join(";"),
        cp.frontier,
        cp.nodes,
        cp.longest
    );
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_checkpoint(path: &Path, c: &ConstraintSet, target: usize) -> CliResult<Checkpoint> {
    let text = read_file(path)?;
    let field = |k: &str| -> CliResult<&str> {
        text.lines()
            .find_map(|l| l.strip_prefix(k).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| CliError::from(Error::Checkpoint(format!("missing field {k}"))))
    };
    if field("format")? != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint("unknown format".into()).into());
    }
    let saved: ConstraintSet = field("constraints")?.replace(';', "\n").parse()?;
    if &saved != c || field("target")?.parse::<usize>().ok() != Some(target) {
        return Err(Error::Checkpoint("checkpoint belongs to a different search".into()).into());
    }
    let word = |k: &str| -> CliResult<Word> { Ok(field(k)?.parse()?) };
    Ok(Checkpoint {
        frontier: word("frontier")?,
        nodes: field("nodes")?.parse().map_err(|_| CliError::from(Error::Checkpoint("bad node count".into())))?,
        longest: word("longest")?,
    })
}

pub fn backtrack(a: &BacktrackArgs, g: &Global) -> CliResult<Certificate> {
    let c = a.constraints.build()?;
    let resume = a.resume.as_deref().map(|p| read_checkpoint(p, &c, a.target)).transpose()?;
    let mut cert = Certificate::new("backtrack");
    cert.input("constraints", &c).input("target", a.target).input("expect", format!("{:?}", a.expect).to_lowercase()).input("budget", g.budget);
    if let Some(r) = &resume {
        cert.input("resume_frontier", &r.frontier).input("resume_nodes", r.nodes);
    }
    if g.check_only {
        return Ok(check_only(cert));
    }
    search(&mut cert, &c, a.target, a.expect, g, resume, a.checkpoint.as_deref())?;
    Ok(cert)
}

pub fn search(cert: &mut Certificate, c: &ConstraintSet, target: usize, expect: Expect, g: &Global, resume: Option<Checkpoint>, checkpoint: Option<&Path>) -> CliResult<()> {
    let opts = BacktrackOptions { budget: Some(g.budget), symmetry: None, resume, jobs: g.jobs };
    let sc = backtrack_with(c, target, &opts)?;
    cert.result("outcome", sc.outcome.label());
    cert.result("symmetry", sc.symmetry);
    match &sc.outcome {
        Outcome::Exhausted { longest, witness } => {
            cert.result("nodes", sc.nodes_expanded);
            cert.result("longest", longest).result("witness", show_word(witness));
            cert.status(if expect == Expect::Exhausted { Status::Verified } else { Status::Refuted });
        }
        Outcome::Reached { witness, .. } => {
            cert.result("witness", show_word(witness));
            cert.status(if expect == Expect::Reached { Status::Verified } else { Status::Refuted });
        }
        Outcome::Budget { nodes, frontier, longest, witness } => {
            cert.result("nodes", nodes).result("frontier", frontier).result("longest", longest).result("witness", show_word(witness));
            if let Some(path) = checkpoint {
                write_checkpoint(path, c, target, &Checkpoint { frontier: frontier.clone(), nodes: *nodes, longest: witness.clone() })?;
                cert.result("checkpoint", path.display());
            }
            cert.status(Status::Inconclusive);
        }
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct CensusArgs {
    #[command(flatten)]
    pub word: WordArgs,
    /// Claimed number of distinct palindromes, the empty word included
    #[arg(long)]
    pub expect: Option<usize>,
}

pub fn census(a: &CensusArgs, g: &Global) -> CliResult<Certificate> {
    let (label, w) = a.word.build()?;
    let mut cert = Certificate::new("census");
    cert.input("word", label);
    if let Some(e) = a.expect {
        cert.input("expect", e);
    }
    if g.check_only {
        return Ok(check_only(cert));
    }
    palindrome_census(&mut cert, &w, a.expect);
    Ok(cert)
}

pub fn palindrome_census(cert: &mut Certificate, w: &Word, expect: Option<usize>) {
    let pals = distinct_palindromes(w);
    cert.result("palindromes", pals.len());
    if pals.len() <= 64 {
        cert.result("palindrome_list", pals.iter().map(show_word).collect::<Vec<_>>().join(","));
    }
    if let Some(e) = expect {
        cert.status(if pals.len() == e { Status::Verified } else { Status::Refuted });
    }
}

#[derive(Args, Debug, Clone)]
pub struct MaxExponentArgs {
    #[command(flatten)]
    pub word: WordArgs,
    /// Claimed maximal exponent, e.g. 41/22
    #[arg(long)]
    pub expect: Option<String>,
}

pub fn max_exponent_cmd(a: &MaxExponentArgs, g: &Global) -> CliResult<Certificate> {
    let (label, w) = a.word.build()?;
    let expect = a.expect.as_deref().map(parse_rational).transpose()?;
    let mut cert = Certificate::new("max-exponent");
    cert.input("word", label);
    if let Some(e) = expect {
        cert.input("expect", e);
    }
    if g.check_only {
        return Ok(check_only(cert));
    }
    exponent_of(&mut cert, &w, expect)?;
    Ok(cert)
}

pub fn exponent_of(cert: &mut Certificate, w: &Word, expect: Option<Rational>) -> CliResult<Rational> {
    let (e, rep) = max_exponent(w)?;
    cert.result("max_exponent", e);
    cert.result("witness", format!("start={} period={} length={} factor={}", rep.start, rep.period, rep.length, show_word(&w.factor(rep.start, rep.length))));
    if let Some(x) = expect {
        cert.status(if e == x { Status::Verified } else { Status::Refuted });
    }
    Ok(e)
}

#[derive(Args, Debug, Clone)]
pub struct CoreArgs {
    #[command(flatten)]
    pub constraints: ConstraintArgs,
    /// Factor length
    #[arg(long)]
    pub length: usize,
    /// Letters required on each side of a factor (default: the length)
    #[arg(long)]
    pub margin: Option<usize>,
    /// Built-in infinite word whose factor set the core should equal
    #[arg(long)]
    pub compare: Option<String>,
}

pub fn core(a: &CoreArgs, g: &Global) -> CliResult<Certificate> {
    let c = a.constraints.build()?;
    let margin = a.margin.unwrap_or(a.length);
    let mut cert = Certificate::new("core");
    cert.input("constraints", &c).input("length", a.length).input("margin", margin);
    if let Some(w) = &a.compare {
        fixtures::word(w, 1)?;
        cert.input("compare", w);
    }
    if g.check_only {
        return Ok(check_only(cert));
    }
    let lang = languages::extendable_core_with_margin(&c, a.length, margin, Some(g.budget))?;
    cert.result("core_size", lang.len());
    if let Some(name) = &a.compare {
        compare_with_word(&mut cert, &lang, name)?;
    }
    Ok(cert)
}

pub fn word_factors(name: &str, len: usize) -> CliResult<FactorLanguage> {
    let name = name.to_string();
    let (lang, _) = languages::stable_factors(move |n| fixtures::word(&name, n).unwrap(), len, languages::DEFAULT_MAX_PREFIX)?;
    Ok(lang)
}

pub fn compare_with_word(cert: &mut Certificate, lang: &FactorLanguage, name: &str) -> CliResult<()> {
    let factors = word_factors(name, lang.length)?;
    cert.result("factor_set_size", factors.len());
    let extra: Vec<&Word> = lang.members.difference(&factors.members).collect();
    let missing: Vec<&Word> = factors.members.difference(&lang.members).collect();
    cert.result("equal", extra.is_empty() && missing.is_empty());
    cert.result("core_only", extra.len()).result("factors_only", missing.len());
    if let Some(w) = extra.first() {
        cert.result("first_core_only", w);
    }
    if let Some(w) = missing.first() {
        cert.result("first_factor_only", w);
    }
    cert.status(if extra.is_empty() && missing.is_empty() { Status::Verified } else { Status::Refuted });
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct RauzyArgs {
    #[command(flatten)]
    pub constraints: ConstraintArgs,
    /// Order of the graph: arcs are factors of this length
    #[arg(long)]
    pub order: usize,
    #[arg(long)]
    pub margin: Option<usize>,
    /// Factor whose weak component is compared with `--compare`
    #[arg(long, default_value = "0120")]
    pub anchor: String,
    /// Built-in infinite word whose Rauzy graph the anchor component should equal
    #[arg(long)]
    pub compare: Option<String>,
    /// Constraint set whose graph should be isomorphic to this one on the
    /// nontrivial strongly connected components
    #[arg(long)]
    pub scc_isomorphic_to: Option<String>,
}

fn graph_of(c: &ConstraintSet, order: usize, margin: usize, budget: u64) -> CliResult<RauzyGraph> {
    let lang = languages::extendable_core_with_margin(c, order, margin, Some(budget))?;
    Ok(languages::rauzy_graph(&lang)?)
}

pub fn rauzy(a: &RauzyArgs, g: &Global) -> CliResult<Certificate> {
    let c = a.constraints.build()?;
    let other = a.scc_isomorphic_to.as_deref().map(|n| ConstraintArgs::named(n).build()).transpose()?;
    let anchor: Word = a.anchor.parse()?;
    let margin = a.margin.unwrap_or(a.order);
    let mut cert = Certificate::new("rauzy");
    cert.input("constraints", &c).input("order", a.order).input("margin", margin).input("anchor", &anchor);
    if let Some(w) = &a.compare {
        fixtures::word(w, 1)?;
        cert.input("compare", w);
    }
    if let Some(o) = &other {
        cert.input("scc_isomorphic_to", o);
    }
    if g.check_only {
        return Ok(check_only(cert));
    }
    let graph = graph_of(&c, a.order, margin, g.budget)?;
    rauzy_report(&mut cert, &graph, &anchor, a.compare.as_deref())?;
    if let Some(o) = &other {
        let og = graph_of(o, a.order, margin, g.budget)?;
        let (mine, theirs) = (graph.condensation(), og.condensation());
        cert.result("scc_induced_arcs", mine.induced.arcs.len()).result("other_scc_induced_arcs", theirs.induced.arcs.len());
        let iso = mine.induced.isomorphic(&theirs.induced);
        cert.result("scc_isomorphic", iso);
        if !iso {
            let extra: Vec<&Word> = mine.induced.arcs.iter().filter(|x| !theirs.induced.arcs.contains(x)).collect();
            cert.result("arcs_not_in_other", extra.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","));
        }
        cert.status(if iso { Status::Verified } else { Status::Refuted });
    }
    Ok(cert)
}

pub fn rauzy_report(cert: &mut Certificate, graph: &RauzyGraph, anchor: &Word, compare: Option<&str>) -> CliResult<()> {
    cert.result("vertices", graph.vertices.len()).result("arcs", graph.arcs.len());
    let comps = graph.weak_components();
    cert.result("weak_components", comps.len());
    cert.result("weak_component_arcs", comps.iter().map(|c| c.arcs.len().to_string()).collect::<Vec<_>>().join(","));
    let reversal_closed = comps.iter().all(|c| {
        let r = c.reversed();
        comps.iter().any(|d| d.arcs == r.arcs)
    });
    cert.result("reversal_symmetric", reversal_closed);
    let cond = graph.condensation();
    cert.result("strong_components", cond.components.len()).result("nontrivial_strong_components", cond.nontrivial());
    cert.result("condensation_arcs", cond.dag_arcs.len());
    if let Some(name) = compare {
        let comp = graph.component_containing(anchor);
        let word_graph = languages::rauzy_graph(&word_factors(name, graph.order)?)?;
        let equal = comp.as_ref().is_some_and(|c| c.arcs == word_graph.arcs);
        cert.result("anchor_component_arcs", comp.map_or(0, |c| c.arcs.len()));
        cert.result("word_graph_arcs", word_graph.arcs.len());
        cert.result("anchor_component_equals_word_graph", equal);
        cert.status(if equal { Status::Verified } else { Status::Refuted });
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct BispecialArgs {
    /// Built-in infinite word
    #[arg(long, default_value = "g-h")]
    pub word: String,
    /// Longest bispecial factor listed
    #[arg(long, default_value_t = 30)]
    pub max_len: usize,
    /// List the initial triplets of this morphism and their f-image chains instead
    #[arg(long)]
    pub triplets: Option<String>,
    /// f-image steps per initial triplet
    #[arg(long, default_value_t = 2)]
    pub steps: usize,
}

pub fn bispecial_cmd(a: &BispecialArgs, g: &Global) -> CliResult<Certificate> {
    let mut cert = Certificate::new("bispecial");
    if let Some(name) = &a.triplets {
        let m = load_morphism(name)?;
        cert.input("morphism", &m).input("steps", a.steps);
        if g.check_only {
            return Ok(check_only(cert));
        }
        let initials = bispecial::initial_triplets(&m, 0, 16)?;
        cert.result("initial_triplets", initials.len());
        for (i, chain) in bispecial::iterate_f_images(&initials, &m, a.steps)?.iter().enumerate() {
            let shown: Vec<String> = chain.iter().map(|t| t.to_string()).collect();
            cert.result(&format!("family.{}", i + 1), shown.join(" -> "));
        }
        return Ok(cert);
    }
    fixtures::word(&a.word, 1)?;
    cert.input("word", &a.word).input("max_len", a.max_len);
    if g.check_only {
        return Ok(check_only(cert));
    }
    let name = a.word.clone();
    let (profiles, prefix) = bispecial::stable_bispecials(move |n| fixtures::word(&name, n).unwrap(), a.max_len, 1 << 24)?;
    cert.result("prefix_length", prefix.len()).result("bispecials", profiles.len());
    for (i, p) in profiles.iter().enumerate() {
        let ret = bispecial::shortest_return_word(&prefix, &p.word)?;
        cert.result(
            &format!("bispecial.{i}"),
            format!(
                "{} left={} right={} b={} return={} ratio={}",
                show_word(&p.word),
                letters(&p.left),
                letters(&p.right),
                p.b,
                show_word(&ret.minimal[0]),
                Rational::new(p.word.len() as i64, ret.shortest_len as i64)
            ),
        );
    }
    Ok(cert)
}

fn letters(s: &BTreeSet<u8>) -> String {
    s.iter().map(|l| l.to_string()).collect()
}

#[derive(Args, Debug, Clone)]
pub struct CriticalExponentArgs {
    /// t, thue-morse, eta, h, gamma-eta or g-h
    #[arg(long, default_value = "g-h")]
    pub word: String,
    /// Longest bispecial factor treated by brute force
    #[arg(long, default_value_t = 200)]
    pub max_len: usize,
    /// f-image steps per family when the word is a morphic image (0 skips)
    #[arg(long, default_value_t = 63)]
    pub steps: usize,
    /// Claimed critical exponent, e.g. 41/22
    #[arg(long)]
    pub expect: Option<String>,
    /// Include every audit record
    #[arg(long)]
    pub audit: bool,
}

pub fn word_spec(name: &str) -> CliResult<WordSpec> {
    let m = |n: &str| fixtures::morphism(n).map_err(CliError::from);
    Ok(match name {
        "t" | "thue-morse" | "eta" | "h" => WordSpec::fixed_point(m(name)?, 0),
        "gamma-eta" => WordSpec::image(m("gamma")?, m("eta")?, 0),
        "g-h" => WordSpec::image(m("g")?, m("h")?, 0),
        _ => return Err(usage(format!("{name}: expected one of t, thue-morse, eta, h, gamma-eta, g-h"))),
    })
}

pub fn critical_exponent(a: &CriticalExponentArgs, g: &Global) -> CliResult<Certificate> {
    let spec = word_spec(&a.word)?;
    let expect = a.expect.as_deref().map(parse_rational).transpose()?;
    let mut cert = Certificate::new("critical-exponent");
    cert.input("word", &a.word).input("max_len", a.max_len).input("steps", a.steps);
    if let Some(e) = expect {
        cert.input("expect", e);
    }
    if g.check_only {
        return Ok(check_only(cert));
    }
    ddp(&mut cert, &spec, a.max_len, a.steps, expect, a.audit)?;
    Ok(cert)
}

pub fn ddp(cert: &mut Certificate, spec: &WordSpec, max_len: usize, steps: usize, expect: Option<Rational>, audit: bool) -> CliResult<()> {
    let opts = DdpOptions { max_len, family_steps: (steps > 0).then_some(steps), ..Default::default() };
    let report = bispecial::critical_exponent_ddp(spec, &opts)?;
    let brute = report.records.iter().filter(|r| r.provenance == Provenance::BruteForce).count();
    cert.result("exponent", &report.exponent).result("max_ratio", &report.max_ratio);
    cert.result("argmax", &report.records[report.argmax]);
    if let Some(w) = &report.records[report.argmax].word {
        cert.result("argmax_word", show_word(w));
    }
    cert.result("prefix_length", report.prefix_len);
    cert.result("brute_force_records", brute).result("family_records", report.records.len() - brute);
    if audit {
        for (i, r) in report.records.iter().enumerate() {
            cert.result(&format!("record.{i}"), r);
        }
    }
    if let Some(e) = expect {
        cert.status(if report.exponent.to_string() == e.to_string() { Status::Verified } else { Status::Refuted });
    }
    Ok(())
}
