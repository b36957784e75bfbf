use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::seq::SliceRandom;

use super::*;
use crate::corpus::io::{load_dataset, read_vocabulary, save_dataset};
use crate::corpus::{
    build_mrmds, build_vocabulary, derive_sentiment_tags, preprocess, synth_corpus, synth_lexicon, vectorize,
    Corpus, Document, MrmdsSpec, PreprocessConfig, SentimentLexicon, StemmerKind, SynthSpec, NEGATIVE, POSITIVE,
};
use crate::error::Error;
use crate::eval::{perplexity, AisSettings, Conditioning, Estimator, PartitionTable};
use crate::model::{load_params, save_params, ModelParams};
use crate::rng::{self, Stream};
use crate::tasks::{
    accuracy, classification_csv, classify_sentiment, mlp_finetune, pr_curve, topic_sentiment_report,
    ClassificationRow, CountBaseline, MlpConfig,
};
use crate::training::{log_to_csv, train, IterationUnit, TrainConfig};

pub(super) fn dispatch(command: Command, s: &mut Settings) -> Result<(), CliError> {
    match command {
        Command::Prepare(Prepare::Synth(a)) => prepare_synth(a, s),
        Command::Prepare(Prepare::Text(a)) => prepare_text(a, s),
        Command::Prepare(Prepare::Tag(a)) => prepare_tag(a, s),
        Command::Prepare(Prepare::Merge(a)) => prepare_merge(a, s),
        Command::Train(a) => cmd_train(a, s),
        Command::Eval(Eval::Perplexity(a)) => eval_perplexity(a, s),
        Command::Eval(Eval::Classify(a)) => eval_classify(a, s),
        Command::Eval(Eval::Retrieve(a)) => eval_retrieve(a, s),
        Command::Eval(Eval::Topics(a)) => eval_topics(a, s),
        Command::Eval(Eval::Mlp(a)) => eval_mlp(a, s),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

/// Dataset directory plus the resolved options that produced it.
fn save_prepared(dir: &Path, corpus: &Corpus, s: &Settings) -> Result<(), CliError> {
    save_dataset(dir, corpus)?;
    write_file(&dir.join("prepare.cfg"), &s.render())?;
    println!(
        "wrote {}: K = {}, {} train / {} test documents",
        dir.display(),
        corpus.vocabulary().len(),
        corpus.train().len(),
        corpus.test().len()
    );
    Ok(())
}

fn prepare_synth(a: SynthArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "prepare synth");
    let d = SynthSpec::default();
    let spec = SynthSpec {
        vocab_size: s.value("k", a.k, d.vocab_size)?,
        sentiments: s.value("sentiments", a.sentiments, d.sentiments)?,
        topics: s.value("topics", a.topics, d.topics)?,
        docs_per_class: s.value("docs", a.docs, d.docs_per_class)?,
        min_len: s.value("min-len", a.min_len, d.min_len)?,
        max_len: s.value("max-len", a.max_len, d.max_len)?,
        skew: s.value("skew", a.skew, d.skew)?,
        topic_strength: s.value("topic-strength", a.topic_strength, d.topic_strength)?,
        sentiment_fraction: s.value("sentiment-fraction", a.sentiment_fraction, d.sentiment_fraction)?,
        test_fraction: s.value("test-fraction", a.test_fraction, d.test_fraction)?,
        lexicon_coverage: s.value("lexicon-coverage", a.lexicon_coverage, d.lexicon_coverage)?,
    };
    let seed = s.seed(a.seed)?;
    let out = s.path("out", a.out)?;
    let corpus = synth_corpus(&spec, seed).map_err(usage_on_invalid)?;
    save_prepared(&out, &corpus, s)?;
    write_file(&out.join("lexicon.txt"), &synth_lexicon(&spec)?.to_text())?;
    Ok(())
}

/// Bad option values surface from the library as invalid input.
fn usage_on_invalid(e: Error) -> CliError {
    match e {
        Error::InvalidInput(m) => CliError::Usage(m),
        e => CliError::Run(e),
    }
}

fn parse_raw_field(field: &str, line: usize, path: &Path) -> Result<Option<usize>, CliError> {
    match field.trim() {
        "-" | "" => Ok(None),
        x => x.parse().map(Some).map_err(|_| {
            CliError::Run(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("bad label {x:?}"),
            })
        }),
    }
}

fn prepare_text(a: TextArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "prepare text");
    let input = s.input("input", a.input)?;
    let out = s.path("out", a.out)?;
    let stemmer = s.value("stemmer", a.stemmer, StemmerChoice::Porter)?;
    let mut config = PreprocessConfig::english();
    config.stemmer = match stemmer {
        StemmerChoice::Porter => StemmerKind::Porter,
        StemmerChoice::Identity => StemmerKind::Identity,
    };
    if let Some(p) = s.opt_path("stopwords", a.stopwords) {
        let list = fs::read_to_string(&p).map_err(|e| Error::io(format!("reading {}", p.display()), e))?;
        config = config.with_stop_words(&list);
    }
    let test_fraction = s.value("test-fraction", a.test_fraction, 0.25)?;
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(CliError::Usage("--test-fraction must lie in [0, 1]".into()));
    }
    let seed = s.seed(a.seed)?;

    let text = fs::read_to_string(&input).map_err(|e| Error::io(format!("reading {}", input.display()), e))?;
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.splitn(3, '\t');
        let (label, topic, body) = (f.next().unwrap_or(""), f.next(), f.next());
        let (Some(topic), Some(body)) = (topic, body) else {
            return Err(CliError::Run(Error::Parse {
                path: input.clone(),
                line: i + 1,
                message: "expected label<TAB>topic<TAB>text".into(),
            }));
        };
        raw.push((
            parse_raw_field(label, i + 1, &input)?,
            parse_raw_field(topic, i + 1, &input)?,
            preprocess(body, &config),
        ));
    }
    let vocab = match s.opt_path("vocab", a.vocab) {
        Some(p) => read_vocabulary(p)?,
        None => {
            let size = s.value("vocab-size", a.vocab_size, 2000)?;
            if size == 0 {
                return Err(CliError::Usage("--vocab-size must be at least 1".into()));
            }
            build_vocabulary(raw.iter().map(|r| &r.2), size)?
        }
    };
    let mut docs = Vec::new();
    for (label, topic, tokens) in &raw {
        let mut d = vectorize(tokens, &vocab);
        if d.is_empty() {
            continue;
        }
        d.sentiment = *label;
        d.topic = *topic;
        docs.push(d);
    }
    if docs.len() < raw.len() {
        warn!("dropped {} documents with no in-vocabulary words", raw.len() - docs.len());
    }
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut rng::stream(seed, Stream::Split));
    let n_test = (docs.len() as f64 * test_fraction).round() as usize;
    let mut is_test = vec![false; docs.len()];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    let (mut train_docs, mut test_docs) = (Vec::new(), Vec::new());
    for (d, t) in docs.into_iter().zip(is_test) {
        if t {
            test_docs.push(d);
        } else {
            train_docs.push(d);
        }
    }
    let corpus = Corpus::from_parts(vocab, train_docs, test_docs)?;
    save_prepared(&out, &corpus, s)
}

fn prepare_tag(a: TagArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "prepare tag");
    let data = s.input("data", a.data)?;
    let lex = SentimentLexicon::load(s.input("lexicon", a.lexicon)?)?;
    let out = s.path("out", a.out)?;
    let corpus = load_dataset(&data)?;
    let tagged = derive_sentiment_tags(&corpus, &lex);
    info!("{} of {} documents tagged", tagged.len(), corpus.len());
    save_prepared(&out, &tagged, s)
}

fn prepare_merge(a: MergeArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "prepare merge");
    let mr = s.input("mr", a.mr)?;
    let mds = s.required("mds", a.mds)?;
    if mds.0.len() != 4 {
        return Err(CliError::Usage(format!(
            "--mds needs 4 directories (book, dvd, electronics, kitchen), got {}",
            mds.0.len()
        )));
    }
    for p in &mds.0 {
        if !p.exists() {
            return Err(CliError::Usage(format!("--mds: {} does not exist", p.display())));
        }
    }
    let d = MrmdsSpec::default();
    let spec = MrmdsSpec {
        per_class: s.value("per-class", a.per_class, d.per_class)?,
        train_per_class: s.value("train-per-class", a.train_per_class, d.train_per_class)?,
    };
    let seed = s.seed(a.seed)?;
    let out = s.path("out", a.out)?;
    let mr = load_dataset(&mr)?;
    let parts = mds.0.iter().map(load_dataset).collect::<crate::Result<Vec<_>>>()?;
    let merged = build_mrmds(&mr, [&parts[0], &parts[1], &parts[2], &parts[3]], spec, seed)?;
    save_prepared(&out, &merged, s)
}

fn cmd_train(a: TrainArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "train");
    let data = s.input("data", a.data)?;
    let out = s.path("out", a.out)?;
    let mode = s.required("mode", a.mode)?;
    let d = TrainConfig::default();
    let config = TrainConfig {
        hidden_units: s.required("hidden", a.hidden)?,
        iterations: s.value("epochs", a.epochs, d.iterations)?,
        iteration_unit: match s.value("iteration-unit", a.iteration_unit, UnitChoice::Epochs)? {
            UnitChoice::Epochs => IterationUnit::Epochs,
            UnitChoice::Updates => IterationUnit::Updates,
        },
        learning_rate: s.value("lr", a.lr, d.learning_rate)?,
        batch_size: s.value("batch", a.batch, d.batch_size)?,
        cd_steps: s.value("cd", a.cd, d.cd_steps)?,
        init_sigma: s.value("sigma", a.sigma, d.init_sigma)?,
        sentiments: s.value("sentiments", a.sentiments, d.sentiments)?,
        momentum: s.value("momentum", a.momentum, d.momentum)?,
        weight_decay: s.value("weight-decay", a.weight_decay, d.weight_decay)?,
        seed: s.seed(a.seed)?,
        probe_every: 0,
    };
    config.validate().map_err(usage_on_invalid)?;
    let log_path = s.opt_path("log", a.log);
    let probe_every = s.value("probe-every", a.probe_every, usize::from(log_path.is_some()))?;
    let checkpoint_every = s.value("checkpoint-every", a.checkpoint_every, 0usize)?;
    let config = TrainConfig {
        probe_every: gcd(probe_every, checkpoint_every),
        ..config
    };

    let corpus = load_dataset(&data)?;
    let header = s.render();
    let mut checkpoint_error = None;
    let mut observer = |epoch: usize, params: &ModelParams| -> crate::Result<Vec<(String, f64)>> {
        if checkpoint_every > 0 && epoch > 0 && epoch % checkpoint_every == 0 {
            let path = PathBuf::from(format!("{}.epoch{epoch}", out.display()));
            if let Err(e) = save_params(&path, params, &header) {
                checkpoint_error.get_or_insert(e);
            }
        }
        Ok(Vec::new())
    };
    let outcome = train(&corpus, &config, mode, &mut observer);
    if let Some(e) = checkpoint_error {
        return Err(e.into());
    }
    let outcome = outcome?;
    save_params(&out, &outcome.params, &header)?;
    if let Some(p) = log_path {
        // probes may fire more often than requested when checkpoints need them
        let last = outcome.log.last().map_or(0, |e| e.epoch);
        let rows: Vec<_> = outcome
            .log
            .into_iter()
            .filter(|e| probe_every > 0 && (e.epoch % probe_every == 0 || e.epoch == last))
            .collect();
        write_file(&p, &(s.header() + &log_to_csv(&rows)))?;
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

struct Loaded {
    params: ModelParams,
    corpus: Corpus,
    docs: Vec<Document>,
    out: PathBuf,
}

fn load_model_data(io: ModelData, s: &mut Settings) -> Result<Loaded, CliError> {
    let model = s.input("model", io.model)?;
    let data = s.input("data", io.data)?;
    let split = s.value("split", io.split, SplitChoice::Test)?;
    let out = s.path("out", io.out)?;
    let (params, _) = load_params(&model)?;
    let corpus = load_dataset(&data)?;
    if corpus.vocabulary().len() != params.vocab_size() {
        return Err(Error::Dimension(format!(
            "model has K = {} but the dataset vocabulary has {} words",
            params.vocab_size(),
            corpus.vocabulary().len()
        ))
        .into());
    }
    let docs: Vec<Document> = match split {
        SplitChoice::Train => corpus.train(),
        SplitChoice::Test => corpus.test(),
    }
    .into_iter()
    .cloned()
    .collect();
    if docs.is_empty() {
        return Err(Error::InvalidInput(format!("the {split} split is empty")).into());
    }
    Ok(Loaded {
        params,
        corpus,
        docs,
        out,
    })
}

fn eval_perplexity(a: PerplexityArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "eval perplexity");
    let l = load_model_data(a.io, s)?;
    let estimator = match s.value("estimator", a.estimator, EstimatorChoice::Ais)? {
        EstimatorChoice::Exact => Estimator::Exact,
        EstimatorChoice::Ais => {
            let d = AisSettings::default();
            Estimator::Ais(AisSettings {
                runs: s.value("ais-runs", a.ais_runs, d.runs)?,
                temperatures: s.value("ais-temps", a.ais_temps, d.temperatures)?,
                bootstrap: s.value("bootstrap", a.bootstrap, d.bootstrap)?,
                seed: s.seed(a.seed)?,
                ..d
            })
        }
    };
    let conditioning = match s.value("conditioning", a.conditioning, ConditioningChoice::Marginal)? {
        ConditioningChoice::Marginal => Conditioning::Marginal,
        ConditioningChoice::Gold => Conditioning::GoldLabel,
    };
    let bucketing = s.value("bucketing", a.bucketing, false)?;
    let table = PartitionTable::build(&l.params, &l.docs, &estimator, conditioning, bucketing)
        .map_err(usage_on_invalid)?;
    let report = perplexity(&l.params, &l.docs, &table, conditioning)?;
    write_file(&l.out, &(s.header() + &report.to_csv()))?;
    println!("perplexity {}", report.perplexity);
    Ok(())
}

fn eval_classify(a: ClassifyArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "eval classify");
    let l = load_model_data(a.io, s)?;
    let lexicon = s.opt_path("lexicon", a.lexicon);
    let tie = match s.value("tie", a.tie, TieChoice::Negative)? {
        TieChoice::Negative => NEGATIVE,
        TieChoice::Positive => POSITIVE,
    };
    let mut rows = Vec::with_capacity(l.docs.len());
    for (i, d) in l.docs.iter().enumerate() {
        let c = classify_sentiment(&l.params, d)?;
        rows.push(ClassificationRow {
            doc_id: i,
            gold: d.sentiment,
            predicted: c.label,
            probs: c.probs,
        });
    }
    let mut csv = s.header() + &classification_csv(&rows);
    let predicted: Vec<usize> = rows.iter().map(|r| r.predicted).collect();
    let labeled = l.docs.iter().all(|d| d.sentiment.is_some());
    if labeled {
        let acc = accuracy(&predicted, &l.docs)?;
        csv += &format!("# accuracy={acc}\n");
        println!("accuracy {acc}");
        if let Some(p) = lexicon {
            let lex = SentimentLexicon::load(&p)?;
            let baseline = CountBaseline::new(l.corpus.vocabulary(), &lex).with_tie_label(tie);
            let b: Vec<usize> = l.docs.iter().map(|d| baseline.predict(d)).collect();
            let bacc = accuracy(&b, &l.docs)?;
            csv += &format!("# baseline_accuracy={bacc}\n");
            println!("baseline accuracy {bacc}");
        }
    } else {
        warn!("documents without gold labels: accuracy not computed");
    }
    write_file(&l.out, &csv)
}

fn eval_retrieve(a: RetrieveArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "eval retrieve");
    let l = load_model_data(a.io, s)?;
    let grid = s.value("k-grid", a.k_grid, KGrid(vec![1, 3, 5, 10, 20, 50, 100]))?;
    let train_docs: Vec<Document> = l.corpus.train().into_iter().cloned().collect();
    let curve = pr_curve(&l.params, &l.docs, &train_docs, &grid.0).map_err(usage_on_invalid)?;
    write_file(&l.out, &(s.header() + &curve.to_csv()))?;
    for (k, (r, p)) in curve.k_grid.iter().zip(&curve.points) {
        println!("k {k}: recall {r:.4} precision {p:.4}");
    }
    Ok(())
}

fn eval_topics(a: TopicsArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "eval topics");
    let l = load_model_data(a.io, s)?;
    let lex = SentimentLexicon::load(s.input("lexicon", a.lexicon)?)?;
    let report = topic_sentiment_report(&l.params, l.corpus.vocabulary(), &lex)?;
    write_file(&l.out, &(s.header() + &report.to_csv()))?;
    println!(
        "tagged {} topics per side, precision {}",
        report.tagged_per_side, report.precision
    );
    Ok(())
}

fn eval_mlp(a: MlpArgs, s: &mut Settings) -> Result<(), CliError> {
    s.record("command", "eval mlp");
    let l = load_model_data(a.io, s)?;
    let d = MlpConfig::default();
    let config = MlpConfig {
        epochs: s.value("epochs", a.epochs, d.epochs)?,
        learning_rate: s.value("lr", a.lr, d.learning_rate)?,
        init_sigma: s.value("sigma", a.sigma, d.init_sigma)?,
        seed: s.seed(a.seed)?,
    };
    let train_docs: Vec<Document> = l.corpus.train().into_iter().cloned().collect();
    let cmp = mlp_finetune(&l.params, &train_docs, &l.docs, &config)?;
    let csv = format!(
        "arm,accuracy\nwarm,{}\nrandom,{}\n",
        cmp.warm.accuracy, cmp.random.accuracy
    );
    write_file(&l.out, &(s.header() + &csv))?;
    println!("warm-start accuracy {} / random-init accuracy {}", cmp.warm.accuracy, cmp.random.accuracy);
    Ok(())
}
