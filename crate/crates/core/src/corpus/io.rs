//! On-disk formats for vocabularies, sparse documents and prepared datasets.
//!
//! Document lines are `label<TAB>topic<TAB>idx:count idx:count ...` with
//! 0-based indices; `-` marks an absent label or topic. A prepared dataset is
//! a directory holding `vocab.txt`, `train.docs` and `test.docs`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Corpus, Document, Split, Vocabulary};
use crate::error::{Error, Result};

pub const VOCAB_FILE: &str = "vocab.txt";
pub const TRAIN_FILE: &str = "train.docs";
pub const TEST_FILE: &str = "test.docs";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_vocabulary(path: impl AsRef<Path>) -> Result<Vocabulary> {
    let path = path.as_ref();
    let words = read(path)?
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    Vocabulary::new(words)
}

pub fn format_vocabulary(vocab: &Vocabulary) -> String {
    vocab.words().iter().map(|w| format!("{w}\n")).collect()
}

pub fn write_vocabulary(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<()> {
    write(path.as_ref(), &format_vocabulary(vocab))
}

pub fn format_document(doc: &Document) -> String {
    let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
    let mut line = format!("{}\t{}\t", opt(doc.sentiment), opt(doc.topic));
    for (i, (k, c)) in doc.nonzeros().enumerate() {
        if i > 0 {
            line.push(' ');
        }
        let _ = write!(line, "{k}:{c}");
    }
    line
}

pub fn format_documents<'a>(docs: impl IntoIterator<Item = &'a Document>) -> String {
    docs.into_iter().map(|d| format_document(d) + "\n").collect()
}

/// Parses document lines against a vocabulary of size `k`.
pub fn parse_documents(text: &str, k: usize, path: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let mut fields = line.splitn(3, '\t');
        let label = parse_optional(fields.next().unwrap_or(""), "label").map_err(err)?;
        let topic = parse_optional(fields.next().ok_or_else(|| err("missing topic field".into()))?, "topic")
            .map_err(err)?;
        let mut counts = vec![0u32; k];
        for pair in fields.next().unwrap_or("").split_whitespace() {
            let (idx, count) = pair
                .split_once(':')
                .ok_or_else(|| err(format!("expected idx:count, found {pair:?}")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index {idx:?}")))?;
            let count: u32 = count.parse().map_err(|_| err(format!("bad count {count:?}")))?;
            if idx >= k {
                return Err(err(format!("index {idx} outside vocabulary of {k}")));
            }
            counts[idx] += count;
        }
        let mut doc = Document::from_counts(counts);
        doc.sentiment = label;
        doc.topic = topic;
        docs.push(doc);
    }
    Ok(docs)
}

fn parse_optional(field: &str, what: &str) -> std::result::Result<Option<usize>, String> {
    match field.trim() {
        "-" => Ok(None),
        s => s
            .parse()
            .map(Some)
            .map_err(|_| format!("bad {what} {s:?}")),
    }
}

pub fn read_documents(path: impl AsRef<Path>, k: usize) -> Result<Vec<Document>> {
    let path = path.as_ref();
    parse_documents(&read(path)?, k, path)
}

pub fn write_documents<'a>(path: impl AsRef<Path>, docs: impl IntoIterator<Item = &'a Document>) -> Result<()> {
    write(path.as_ref(), &format_documents(docs))
}

pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Corpus> {
    let dir = dir.as_ref();
    let vocab = read_vocabulary(dir.join(VOCAB_FILE))?;
    let k = vocab.len();
    let train = read_documents(dir.join(TRAIN_FILE), k)?;
    let test_path = dir.join(TEST_FILE);
    let test = if test_path.exists() {
        read_documents(test_path, k)?
    } else {
        Vec::new()
    };
    Corpus::from_parts(vocab, train, test)
}

pub fn save_dataset(dir: impl AsRef<Path>, corpus: &Corpus) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    write_vocabulary(dir.join(VOCAB_FILE), corpus.vocabulary())?;
    let pick = |which: Split| {
        corpus
            .documents()
            .iter()
            .zip(corpus.splits())
            .filter(move |(_, &s)| s == which)
            .map(|(d, _)| d)
    };
    write_documents(dir.join(TRAIN_FILE), pick(Split::Train))?;
    write_documents(dir.join(TEST_FILE), pick(Split::Test))
}
