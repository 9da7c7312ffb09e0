use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use grammarlr::corpus::{documents_to_jsonl, load_documents, read_tagged_document, DocumentSource};
use grammarlr::experiment::{sweep_csv, GenreCorpus};
use grammarlr::masking::{load_lexicon, mask_document, masked};
use grammarlr::{
    crossgenre, decide, evaluate, load_corpus, render, split_by_author, sweep, synth_corpus_with,
    verify_problem, write_corpus, zscore_bins, CalibrationModel, Corpus, DiscountSchedule,
    DiscountSetting, Error, Format, Harness, LambdaConfig, Result, SynthOptions,
};

/// Authorship verification with likelihood ratios of grammar models.
#[derive(Parser)]
#[command(name = "grammarlr", version)]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mask content words of a corpus or a tagged document.
    Mask {
        input: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score one verification problem and write a trace and a report.
    Verify {
        corpus: PathBuf,
        /// Problem id; may be omitted when the corpus holds a single problem.
        #[arg(long)]
        problem: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        inputs: InputArgs,
        /// Calibration model JSON as written by `evaluate`.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Report the calibrated log-LR; requires `--calibration`.
        #[arg(long)]
        calibrated: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
    },
    /// Fit calibration on a train split and report metrics on a test split.
    Evaluate {
        test: PathBuf,
        /// Train split used to fit the calibration.
        #[arg(long)]
        calibration: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
    },
    /// Accuracy over a grid of orders and reference counts.
    Sweep {
        test: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 10])]
        order: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 30])]
        refs: Vec<usize>,
        #[arg(long, default_value = "0.75")]
        discount: String,
        #[arg(long, value_enum, default_value_t = DiscountMode::Constant)]
        discount_mode: DiscountMode,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Evaluate every corpus with reference documents of every other one.
    /// Each directory must contain `train.jsonl` and `test.jsonl`.
    Crossgenre {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
    },
    /// Generate a synthetic corpus as author-disjoint train and test files.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        authors: usize,
        #[arg(long, default_value_t = 5)]
        problems_per_author: usize,
        #[arg(long, default_value_t = 0.5)]
        divergence: f64,
        #[arg(long, default_value_t = 0.4)]
        train_fraction: f64,
        /// Prefix for every generated token.
        #[arg(long, default_value = "")]
        alphabet_tag: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 10)]
    order: usize,
    #[arg(long, default_value_t = 100)]
    refs: usize,
    /// One value, or `d1,d2,d3` with `--discount-mode modified`.
    #[arg(long, default_value = "0.75")]
    discount: String,
    #[arg(long, value_enum, default_value_t = DiscountMode::Constant)]
    discount_mode: DiscountMode,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct InputArgs {
    /// Reference documents (JSONL); defaults to the corpus sidecar.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Masking lexicon; defaults to the built-in one.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiscountMode {
    Constant,
    Modified,
    /// Modified schedule estimated from the training counts.
    Estimated,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Html,
}

fn discount_setting(value: &str, mode: DiscountMode) -> Result<DiscountSetting> {
    let parsed: Vec<f64> = value
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Usage(format!("invalid --discount `{value}`")))?;
    let schedule = match (mode, parsed.as_slice()) {
        (DiscountMode::Estimated, _) => return Ok(DiscountSetting::EstimatedModified),
        (DiscountMode::Constant, [d]) => DiscountSchedule::constant(*d)?,
        (DiscountMode::Modified, [d]) => DiscountSchedule::modified(*d, *d, *d)?,
        (DiscountMode::Modified, [d1, d2, d3]) => DiscountSchedule::modified(*d1, *d2, *d3)?,
        _ => return Err(Error::Usage(format!("--discount `{value}` does not fit the discount mode"))),
    };
    Ok(DiscountSetting::Fixed(schedule))
}

fn harness(model: &ModelArgs, lexicon: Option<&Path>, parallel: Option<usize>) -> Result<Harness> {
    let lambda = LambdaConfig {
        order: model.order,
        refs: model.refs,
        seed: model.seed,
        discounts: discount_setting(&model.discount, model.discount_mode)?,
        ..LambdaConfig::default()
    };
    lambda.validate()?;
    let mut h = Harness::new(lambda);
    if let Some(p) = parallel {
        if p == 0 {
            return Err(Error::Usage("--parallel must be at least 1".into()));
        }
        h.parallel = p;
    }
    if let Some(path) = lexicon {
        h.lexicon = lexicon_at(path)?;
    }
    Ok(h)
}

fn lexicon_at(path: &Path) -> Result<grammarlr::MaskingLexicon> {
    if !path.is_file() {
        return Err(Error::Usage(format!("lexicon {} not found", path.display())));
    }
    load_lexicon(path)
}

fn corpus_with_reference(path: &Path, reference: Option<&Path>) -> Result<Corpus> {
    let corpus = load_corpus(path)?;
    match reference {
        Some(r) => corpus.with_reference_docs(load_documents(r)?),
        None => Ok(corpus),
    }
}

fn write_out(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.to_path_buf(),
                source: e,
            })?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    let parallel = cli.parallel;
    match cli.command {
        Command::Mask { input, lexicon, out } => {
            let lex = lexicon_at(&lexicon)?;
            let is_corpus = input.extension().is_some_and(|e| e == "jsonl");
            if is_corpus {
                let corpus = load_corpus(&input)?;
                let mask_all = |docs: &[DocumentSource]| -> Result<Vec<DocumentSource>> {
                    docs.iter().map(|d| Ok(DocumentSource::Masked(masked(d, &lex)?))).collect()
                };
                let mut problems = corpus.problems.clone();
                for p in &mut problems {
                    p.unknown = mask_all(&p.unknown)?;
                    p.known = mask_all(&p.known)?;
                }
                let masked_corpus = Corpus::new(problems, mask_all(&corpus.reference_docs)?, corpus.partition)?;
                write_corpus(&masked_corpus, &out)?;
            } else {
                let id = input
                    .file_stem()
                    .map_or_else(|| "document".to_string(), |s| s.to_string_lossy().into_owned());
                let doc = mask_document(&read_tagged_document(&input, &id)?, &lex)?;
                let text = documents_to_jsonl(&[DocumentSource::Masked(doc)]);
                fs::write(&out, text).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            }
            log::info!("wrote {}", out.display());
            Ok(())
        }
        Command::Verify {
            corpus,
            problem,
            model,
            inputs,
            calibration,
            calibrated,
            out,
            format,
        } => {
            if calibrated && calibration.is_none() {
                return Err(Error::Usage("--calibrated requires --calibration".into()));
            }
            let h = harness(&model, inputs.lexicon.as_deref(), parallel)?;
            let corpus = corpus_with_reference(&corpus, inputs.reference.as_deref())?;
            let p = match &problem {
                Some(id) => corpus
                    .problems
                    .iter()
                    .find(|p| &p.id == id)
                    .ok_or_else(|| Error::Data(format!("no problem with id {id}")))?,
                None if corpus.problems.len() == 1 => &corpus.problems[0],
                None => return Err(Error::Usage("corpus has several problems; pass --problem".into())),
            };
            let cal: Option<CalibrationModel> = match &calibration {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    Some(serde_json::from_str(&text)?)
                }
                None => None,
            };
            let trace = verify_problem(p, &corpus.reference_docs, &h.lambda, &h.lexicon)?;
            let log_lr = cal.map(|c| c.apply(trace.total));
            let summary = json!({
                "problem": p.id,
                "lambda": trace.total,
                "log_lr": log_lr,
                "decision": log_lr.map(|l| decide(l).to_string()),
                "label": p.label.map(|l| l.to_string()),
            });
            let summary = format!("{}\n", serde_json::to_string_pretty(&summary)?);
            let html = render(&zscore_bins(&trace), Format::Html);
            match &out {
                Some(dir) => {
                    ensure_dir(dir)?;
                    write_out(Some(dir), "trace.json", &trace.to_json())?;
                    write_out(Some(dir), "result.json", &summary)?;
                    write_out(Some(dir), "report.html", &html)?;
                }
                None => match format {
                    OutFormat::Html => print!("{html}"),
                    OutFormat::Json => print!("{summary}"),
                    OutFormat::Csv => {
                        println!("sentence,lambda");
                        for (i, s) in trace.sentence_scores.iter().enumerate() {
                            println!("{i},{s}");
                        }
                    }
                },
            }
            Ok(())
        }
        Command::Evaluate {
            test,
            calibration,
            model,
            inputs,
            out,
            format,
        } => {
            let h = harness(&model, inputs.lexicon.as_deref(), parallel)?;
            let train = corpus_with_reference(&calibration, inputs.reference.as_deref())?;
            let test = corpus_with_reference(&test, inputs.reference.as_deref())?;
            let ev = evaluate(&train, &test, None, &h)?;
            let text = match format {
                OutFormat::Json => format!("{}\n", ev.metrics_json()),
                OutFormat::Csv => {
                    let m = &ev.metrics;
                    format!(
                        "n,accuracy,auc,f1,precision,recall,tp,fn,fp,tn,cllr_raw,cllr,cllr_min,cllr_cal\n\
                         {},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                        m.n, m.accuracy, m.auc, m.f1, m.precision, m.recall, m.confusion.tp,
                        m.confusion.fn_, m.confusion.fp, m.confusion.tn,
                        m.cllr_raw.unwrap_or(f64::NAN), m.cllr, m.cllr_min, m.cllr_cal
                    )
                }
                OutFormat::Html => return Err(Error::Usage("evaluate writes json or csv".into())),
            };
            let name = if format == OutFormat::Csv { "metrics.csv" } else { "metrics.json" };
            write_out(out.as_deref(), name, &text)?;
            if let Some(dir) = &out {
                let cal = serde_json::to_string_pretty(&ev.calibration)? + "\n";
                write_out(Some(dir), "calibration.json", &cal)?;
            }
            Ok(())
        }
        Command::Sweep {
            test,
            calibration,
            order,
            refs,
            discount,
            discount_mode,
            seed,
            inputs,
            out,
            format,
        } => {
            let model = ModelArgs {
                order: order.first().copied().unwrap_or(10),
                refs: refs.first().copied().unwrap_or(100),
                discount,
                discount_mode,
                seed,
            };
            let h = harness(&model, inputs.lexicon.as_deref(), parallel)?;
            let train = corpus_with_reference(&calibration, inputs.reference.as_deref())?;
            let test = corpus_with_reference(&test, inputs.reference.as_deref())?;
            let cells = sweep(&train, &test, &order, &refs, &h)?;
            let text = match format {
                OutFormat::Csv => sweep_csv(&cells),
                OutFormat::Json => serde_json::to_string_pretty(&cells)? + "\n",
                OutFormat::Html => return Err(Error::Usage("sweep writes csv or json".into())),
            };
            let name = if format == OutFormat::Csv { "sweep.csv" } else { "sweep.json" };
            write_out(out.as_deref(), name, &text)
        }
        Command::Crossgenre {
            corpora,
            model,
            lexicon,
            out,
            format,
        } => {
            let h = harness(&model, lexicon.as_deref(), parallel)?;
            let genres = corpora
                .iter()
                .map(|dir| {
                    Ok(GenreCorpus {
                        name: dir
                            .file_name()
                            .map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned()),
                        train: load_corpus(&dir.join("train.jsonl"))?,
                        test: load_corpus(&dir.join("test.jsonl"))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let result = crossgenre(&genres, &h)?;
            let text = match format {
                OutFormat::Csv => result.to_csv(),
                OutFormat::Json => serde_json::to_string_pretty(&result)? + "\n",
                OutFormat::Html => return Err(Error::Usage("crossgenre writes csv or json".into())),
            };
            let name = if format == OutFormat::Csv { "crossgenre.csv" } else { "crossgenre.json" };
            write_out(out.as_deref(), name, &text)
        }
        Command::Synth {
            seed,
            authors,
            problems_per_author,
            divergence,
            train_fraction,
            alphabet_tag,
            out,
        } => {
            let opts = SynthOptions::new(seed, authors, problems_per_author, divergence)
                .with_alphabet_tag(alphabet_tag);
            let corpus = synth_corpus_with(&opts)?;
            let (train, test) = split_by_author(&corpus, train_fraction)?;
            ensure_dir(&out)?;
            write_corpus(&train, &out.join("train.jsonl"))?;
            write_corpus(&test, &out.join("test.jsonl"))?;
            log::info!(
                "wrote {} train and {} test problems to {}",
                train.problems.len(),
                test.problems.len(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRAMMARLR_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
