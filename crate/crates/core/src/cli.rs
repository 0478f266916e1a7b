//! Command-line front end.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser as ClapParser, Subcommand};

use crate::advice::{sentence_advice, AdviceFile, Corpus, Sentence};
use crate::error::{Error, Result};
use crate::eval::{run_experiment, Resources, Variant, VariantConfig};
use crate::lexicon::{Lexicon, Token};
use crate::ontology::Ontology;
use crate::parser::{Grammar, ParserConfig};
use crate::sensemap::{SenseMap, SynsetGraph};

/// Exit status when a parse succeeded but did not span the sentence.
pub const EXIT_FRAGMENTED: u8 = 2;

#[derive(Debug, ClapParser)]
#[command(
    name = "sensechart",
    version,
    about = "Sense-hinted semantic chart parser"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse one sentence and print its logical form.
    Parse(ParseArgs),
    /// Run parser variants over a corpus and print the metrics report.
    Eval(EvalArgs),
    /// Print the semantic factor of every ontology type.
    Factorize(FactorizeArgs),
    /// Print the ontology type every synset subsumes under.
    Map(MapArgs),
}

#[derive(Debug, Args)]
pub struct ResourceArgs {
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub synsets: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub grammar: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub beam_width: u64,
    /// Agenda pop budget (default 10·n² for an n-token sentence).
    #[arg(long)]
    pub max_pops: Option<usize>,
    #[arg(long, default_value_t = 0.0, value_parser = unit_interval)]
    pub accept_threshold: f64,
}

impl TuningArgs {
    fn config(&self, variant: Variant) -> VariantConfig {
        VariantConfig {
            alpha: self.alpha,
            parser: ParserConfig {
                beam_width: usize::try_from(self.beam_width).unwrap_or(usize::MAX),
                max_pops: self.max_pops,
                accept_threshold: self.accept_threshold,
            },
            ..VariantConfig::new(variant)
        }
    }
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub resources: ResourceArgs,
    /// Sentence text; read from standard input when absent. Tokens may be
    /// written `surface/lemma/TAG` or `surface/TAG`.
    #[arg(long)]
    pub sentence: Option<String>,
    /// Take the sentence from a corpus file instead (needs --sentence-id).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Sentence id used to select corpus and advice records.
    #[arg(long, default_value = "input")]
    pub sentence_id: String,
    #[arg(long)]
    pub advice: Option<PathBuf>,
    #[arg(long, default_value = "plain")]
    pub variant: Variant,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub resources: ResourceArgs,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Advice file; without one every variant runs unadvised.
    #[arg(long)]
    pub advice: Option<PathBuf>,
    /// Comma-separated variants to run.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "plain,pre,prog,comb,fixed"
    )]
    pub variants: Vec<Variant>,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub ontology: PathBuf,
    #[arg(long)]
    pub synsets: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn load_resources(args: &ResourceArgs) -> Result<Resources> {
    let ontology = Ontology::load(&args.ontology)?;
    let senses = SenseMap::new(SynsetGraph::load(&args.synsets)?, &ontology);
    let lexicon = Lexicon::load(&args.lexicon, &ontology)?;
    let grammar = Grammar::load(&args.grammar)?;
    Ok(Resources::new(ontology, senses, lexicon, grammar))
}

/// Whitespace tokenization with a lexicon-driven lemma and tag guess.
///
/// A bare word is lowercased and, if unknown, stripped of a common
/// inflectional suffix until a known lemma appears; its tag is the category
/// of the lemma's first core entry (`N` for words known only from synsets).
pub fn tokenize(text: &str, resources: &Resources) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut offset = 0;
    for piece in text.split_whitespace() {
        let start = offset + text[offset..].find(piece).expect("piece comes from text");
        offset = start + piece.len();
        let parts: Vec<&str> = piece.split('/').collect();
        let token = match parts.as_slice() {
            [surface, lemma, pos] => {
                Token::new(surface, lemma, pos, (start, start + surface.len()))
            }
            [surface, pos] => Token::new(
                surface,
                &surface.to_lowercase(),
                pos,
                (start, start + surface.len()),
            ),
            _ => {
                let (lemma, pos) = guess_lemma(piece, resources);
                Token::new(piece, &lemma, &pos, (start, offset))
            }
        };
        tokens.push(token);
    }
    tokens
}

fn guess_lemma(surface: &str, resources: &Resources) -> (String, String) {
    let lower = surface.to_lowercase();
    let mut candidates = vec![lower.clone()];
    for suffix in ["ed", "d", "es", "s", "ing"] {
        if let Some(stem) = lower.strip_suffix(suffix).filter(|s| !s.is_empty()) {
            candidates.push(stem.to_string());
        }
    }
    for c in &candidates {
        if let Some(e) = resources.lexicon.entries().iter().find(|e| &e.word == c) {
            return (c.clone(), e.category.clone());
        }
        if !resources.senses.graph().containing(c).is_empty() {
            return (c.clone(), "N".to_string());
        }
    }
    (lower, "X".to_string())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

pub fn cmd_parse(args: &ParseArgs) -> Result<u8> {
    let resources = load_resources(&args.resources)?;
    let sentence = match &args.corpus {
        Some(path) => {
            let corpus = Corpus::load(path)?;
            corpus
                .sentences
                .into_iter()
                .find(|s| s.id == args.sentence_id)
                .ok_or_else(|| {
                    Error::parse(
                        &path.display().to_string(),
                        0,
                        format!("no sentence `{}`", args.sentence_id),
                    )
                })?
        }
        None => {
            let text = match &args.sentence {
                Some(s) => s.clone(),
                None => {
                    let mut buf = String::new();
                    io::stdin()
                        .read_to_string(&mut buf)
                        .map_err(|source| Error::Io {
                            path: "<stdin>".into(),
                            source,
                        })?;
                    buf
                }
            };
            let tokens = tokenize(&text, &resources);
            Sentence {
                id: args.sentence_id.clone(),
                gold: vec![None; tokens.len()],
                tokens,
            }
        }
    };
    let config = args.tuning.config(args.variant);
    let advice = match &args.advice {
        Some(p) => {
            let a = AdviceFile::load(p)?;
            a.validate(resources.senses.graph())?;
            a
        }
        None => AdviceFile::default(),
    };
    let built = sentence_advice(
        &sentence,
        advice.for_sentence(&sentence.id),
        &resources.senses,
        config.alpha,
    )?;
    let (result, _) = resources.parse(&sentence.id, &sentence.tokens, &built.map, &config)?;
    write_output(args.output.as_deref(), &result.logical_form.to_string())?;
    Ok(if result.spanning { 0 } else { EXIT_FRAGMENTED })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<u8> {
    let resources = load_resources(&args.resources)?;
    let corpus = Corpus::load(&args.corpus)?;
    let advice = match &args.advice {
        Some(p) => AdviceFile::load(p)?,
        None => AdviceFile::default(),
    };
    let base = args.tuning.config(Variant::Plain);
    let experiment = run_experiment(&resources, &corpus, &advice, &args.variants, &base)?;
    write_output(args.output.as_deref(), &experiment.report.to_tsv())?;
    if let Some(path) = &args.diagnostics {
        let mut text = experiment.diagnostics.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        write_output(Some(path), &text)?;
    }
    Ok(0)
}

pub fn factor_table(ontology: &Ontology) -> String {
    let factors = ontology.factorize();
    let mut out = String::from("type\tfactor\tdepth\tfactor_head\n");
    for (t, f) in factors.assignments() {
        out.push_str(&format!(
            "{t}\t{}\t{}\t{}\n",
            f.0,
            factors.factor_depth(f),
            factors.factor_head(f)
        ));
    }
    out
}

pub fn cmd_factorize(args: &FactorizeArgs) -> Result<u8> {
    let ontology = Ontology::load(&args.ontology)?;
    write_output(args.output.as_deref(), &factor_table(&ontology))?;
    Ok(0)
}

pub fn mapping_listing(senses: &SenseMap) -> String {
    let mut out = String::new();
    for s in senses.graph().synsets() {
        let t = senses.assign_type(&s.id).ok().flatten().unwrap_or("NONE");
        out.push_str(&format!("{} → {t}\n", s.id));
    }
    for a in senses.ambiguities() {
        out.push_str(&format!(
            "# ambiguous {}: candidates {} chose {}\n",
            a.synset,
            a.candidates.join(","),
            a.chosen
        ));
    }
    out
}

pub fn cmd_map(args: &MapArgs) -> Result<u8> {
    let ontology = Ontology::load(&args.ontology)?;
    let senses = SenseMap::new(SynsetGraph::load(&args.synsets)?, &ontology);
    write_output(args.output.as_deref(), &mapping_listing(&senses))?;
    Ok(0)
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Factorize(a) => cmd_factorize(a),
        Command::Map(a) => cmd_map(a),
    }
}
