//! Reading query logs and Total/Valid/Unique accounting.

use std::borrow::Cow;
use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use percent_encoding::percent_decode;
use serde::Serialize;
use xxhash_rust::xxh3::xxh3_128;

use crate::ast::Query;
use crate::parser::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    /// One percent-encoded query per line.
    Lines,
    /// A directory of `*.rq` files, one query per file.
    RqDir,
    /// `timestamp<TAB>query` with a percent-encoded query column.
    Tsv,
}

impl FromStr for LogFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lines" => Ok(LogFormat::Lines),
            "rq-dir" => Ok(LogFormat::RqDir),
            "tsv" => Ok(LogFormat::Tsv),
            _ => Err(format!("unknown log format `{s}` (expected lines, rq-dir or tsv)")),
        }
    }
}

impl fmt::Display for LogFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogFormat::Lines => "lines",
            LogFormat::RqDir => "rq-dir",
            LogFormat::Tsv => "tsv",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordSource {
    pub file: PathBuf,
    /// 1-based line number; always 1 for `rq-dir` files.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    /// Position in log order, counted across all files of one run.
    pub index: usize,
    pub raw: String,
    pub source: RecordSource,
}

/// Decode one log line: `+` becomes a space, then percent escapes are
/// resolved. Invalid UTF-8 is replaced rather than rejected.
pub fn decode_line(line: &[u8]) -> String {
    let plus: Vec<u8> = line
        .iter()
        .map(|&b| if b == b'+' { b' ' } else { b })
        .collect();
    let bytes: Vec<u8> = percent_decode(&plus).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

enum Inner {
    Lines {
        reader: Box<dyn BufRead + Send>,
        file: PathBuf,
        line: usize,
        tsv: bool,
    },
    Files {
        files: std::vec::IntoIter<PathBuf>,
    },
}

/// Streaming iterator over the records of one log.
pub struct LogReader {
    inner: Inner,
    next_index: usize,
}

impl LogReader {
    /// Continue indices from `start` (used when several files form one log).
    pub fn starting_at(mut self, start: usize) -> Self {
        self.next_index = start;
        self
    }

    fn emit(&mut self, raw: String, file: PathBuf, line: usize) -> LogRecord {
        let index = self.next_index;
        self.next_index += 1;
        LogRecord {
            index,
            raw,
            source: RecordSource { file, line },
        }
    }
}

impl Iterator for LogReader {
    type Item = io::Result<LogRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        match &mut self.inner {
            Inner::Lines {
                reader,
                file,
                line,
                tsv,
            } => {
                let mut buf = Vec::new();
                loop {
                    buf.clear();
                    match reader.read_until(b'\n', &mut buf) {
                        Ok(0) => return None,
                        Ok(_) => {}
                        Err(e) => return Some(Err(e)),
                    }
                    *line += 1;
                    while matches!(buf.last(), Some(b'\n' | b'\r')) {
                        buf.pop();
                    }
                    if buf.iter().all(u8::is_ascii_whitespace) {
                        continue;
                    }
                    let raw = if *tsv {
                        let mut cols = buf.splitn(2, |&b| b == b'\t');
                        let first = cols.next().unwrap_or_default();
                        let query = cols.next();
                        if *line == 1 && first.eq_ignore_ascii_case(b"timestamp") {
                            continue;
                        }
                        query.map(decode_line).unwrap_or_default()
                    } else {
                        decode_line(&buf)
                    };
                    let (file, line) = (file.clone(), *line);
                    return Some(Ok(self.emit(raw, file, line)));
                }
            }
            Inner::Files { files } => {
                let path = files.next()?;
                match std::fs::read(&path) {
                    Ok(bytes) => {
                        let raw = String::from_utf8_lossy(&bytes).into_owned();
                        Some(Ok(self.emit(raw, path, 1)))
                    }
                    Err(e) => Some(Err(io::Error::new(
                        e.kind(),
                        format!("{}: {e}", path.display()),
                    ))),
                }
            }
        }
    }
}

/// Open a log for streaming. Records come out in file order; for `rq-dir`
/// the files are taken in lexicographic order of their names.
pub fn read_log(path: &Path, format: LogFormat) -> io::Result<LogReader> {
    let inner = match format {
        LogFormat::Lines | LogFormat::Tsv => {
            let f = File::open(path)
                .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            Inner::Lines {
                reader: Box::new(BufReader::with_capacity(1 << 16, f)),
                file: path.to_path_buf(),
                line: 0,
                tsv: format == LogFormat::Tsv,
            }
        }
        LogFormat::RqDir => {
            let mut files = Vec::new();
            for entry in std::fs::read_dir(path)
                .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?
            {
                let p = entry?.path();
                if p.is_file() && p.extension().is_some_and(|e| e == "rq") {
                    files.push(p);
                }
            }
            files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
            Inner::Files {
                files: files.into_iter(),
            }
        }
    };
    Ok(LogReader {
        inner,
        next_index: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DedupMode {
    /// Raw byte equality.
    Exact,
    /// Equality after whitespace normalization (see [`normalize_whitespace`]).
    #[default]
    Whitespace,
}

impl FromStr for DedupMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(DedupMode::Exact),
            "whitespace" => Ok(DedupMode::Whitespace),
            _ => Err(format!("unknown dedup mode `{s}` (expected exact or whitespace)")),
        }
    }
}

fn is_delimiter(c: char) -> bool {
    matches!(c, '{' | '}' | '(' | ')' | '[' | ']' | '.' | ',' | ';')
}

/// Length in bytes of an IRI reference starting at `s` (which begins with
/// `<`), or `None` when the `<` is an operator.
fn iri_len(s: &str) -> Option<usize> {
    for (i, c) in s.char_indices().skip(1) {
        match c {
            '>' => return Some(i + 1),
            '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => return None,
            c if c.is_whitespace() => return None,
            _ => {}
        }
    }
    None
}

/// Length in bytes of a string literal starting at `s`.
fn string_len(s: &str) -> usize {
    let q = s.as_bytes()[0];
    let long = s.len() >= 3 && s.as_bytes()[1] == q && s.as_bytes()[2] == q;
    let bytes = s.as_bytes();
    let mut i = if long { 3 } else { 1 };
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\\' {
            i += 2;
            continue;
        }
        if long {
            if b == q && i + 2 < bytes.len() && bytes[i + 1] == q && bytes[i + 2] == q {
                return i + 3;
            }
        } else if b == q || b == b'\n' {
            return i + 1;
        }
        i += 1;
    }
    s.len()
}

/// Duplicate key text: trims the query, drops whitespace next to the
/// punctuation `{ } ( ) [ ] . , ;` and collapses every other whitespace run
/// to one space. IRIs, string literals and comments are kept verbatim.
pub fn normalize_whitespace(raw: &str) -> String {
    let s = raw.trim();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    let mut pending_space = false;
    let mut after_comment = false;
    while i < s.len() {
        let rest = &s[i..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            pending_space = true;
            i += c.len_utf8();
            continue;
        }
        if pending_space {
            let prev_delim = out.chars().last().is_some_and(is_delimiter);
            if after_comment {
                out.push('\n');
            } else if !prev_delim && !is_delimiter(c) {
                out.push(' ');
            }
            pending_space = false;
            after_comment = false;
        }
        let len = match c {
            '<' => iri_len(rest).unwrap_or(1),
            '"' | '\'' => string_len(rest),
            '#' => {
                let end = rest.find('\n').unwrap_or(rest.len());
                out.push_str(&rest[..end]);
                after_comment = true;
                i += end;
                continue;
            }
            c => c.len_utf8(),
        };
        out.push_str(&rest[..len]);
        i += len;
    }
    out
}

pub fn dedup_key(raw: &str, mode: DedupMode) -> Cow<'_, str> {
    match mode {
        DedupMode::Exact => Cow::Borrowed(raw),
        DedupMode::Whitespace => Cow::Owned(normalize_whitespace(raw)),
    }
}

/// 128-bit fingerprint of the duplicate key.
pub fn fingerprint(raw: &str, mode: DedupMode) -> u128 {
    xxh3_128(dedup_key(raw, mode).as_bytes())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusCounts {
    pub total: u64,
    pub valid: u64,
    pub unique: u64,
}

impl std::ops::AddAssign for CorpusCounts {
    fn add_assign(&mut self, o: Self) {
        self.total += o.total;
        self.valid += o.valid;
        self.unique += o.unique;
    }
}

/// Streaming duplicate filter. Only fingerprints of valid queries are kept.
#[derive(Debug)]
pub struct Deduplicator {
    mode: DedupMode,
    enabled: bool,
    seen: HashSet<u128>,
    counts: CorpusCounts,
}

impl Deduplicator {
    pub fn new(mode: DedupMode, enabled: bool) -> Self {
        Deduplicator {
            mode,
            enabled,
            seen: HashSet::new(),
            counts: CorpusCounts::default(),
        }
    }

    pub fn mode(&self) -> DedupMode {
        self.mode
    }

    /// Account for one record; returns true when it is counted as unique.
    pub fn push(&mut self, raw: &str, valid: bool) -> bool {
        self.push_fingerprint(fingerprint(raw, self.mode), valid)
    }

    pub fn push_fingerprint(&mut self, fp: u128, valid: bool) -> bool {
        self.counts.total += 1;
        if !valid {
            return false;
        }
        self.counts.valid += 1;
        if self.enabled && !self.seen.insert(fp) {
            return false;
        }
        self.counts.unique += 1;
        true
    }

    pub fn counts(&self) -> CorpusCounts {
        self.counts
    }
}

/// Keep the first occurrence of every duplicate class among the valid
/// records. With `enabled = false` every valid record is kept.
pub fn deduplicate<I>(
    records: I,
    mode: DedupMode,
    enabled: bool,
) -> (Vec<(LogRecord, Query)>, CorpusCounts)
where
    I: IntoIterator<Item = (LogRecord, Result<Query, ParseError>)>,
{
    let mut d = Deduplicator::new(mode, enabled);
    let mut out = Vec::new();
    for (rec, parsed) in records {
        let keep = d.push(&rec.raw, parsed.is_ok());
        if keep {
            if let Ok(q) = parsed {
                out.push((rec, q));
            }
        }
    }
    (out, d.counts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_query;
    use std::io::Write;

    fn records(texts: &[&str]) -> Vec<(LogRecord, Result<Query, ParseError>)> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let rec = LogRecord {
                    index: i,
                    raw: t.to_string(),
                    source: RecordSource {
                        file: PathBuf::from("mem"),
                        line: i + 1,
                    },
                };
                (rec, parse_query(t))
            })
            .collect()
    }

    #[test]
    fn percent_and_plus_decoding() {
        assert_eq!(
            decode_line(b"SELECT%20%2A%20WHERE%20%7B%3Fs%20%3Fp%20%3Fo%7D"),
            "SELECT * WHERE {?s ?p ?o}"
        );
        assert_eq!(decode_line(b"ASK+%7B%3Fs+%3Fp+1%2B1%7D"), "ASK {?s ?p 1+1}");
        assert_eq!(decode_line(b"bad%FFbyte"), "bad\u{FFFD}byte");
    }

    #[test]
    fn lines_format_skips_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log.txt");
        let mut f = File::create(&p).unwrap();
        writeln!(f, "ASK%20%7B%7D\r\n\n  \nSELECT+*+%7B%7D").unwrap();
        drop(f);
        let recs: Vec<_> = read_log(&p, LogFormat::Lines)
            .unwrap()
            .map(Result::unwrap)
            .collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].raw, "ASK {}");
        assert_eq!(recs[1].raw, "SELECT * {}");
        assert_eq!(recs[1].index, 1);
        assert_eq!(recs[1].source.line, 4);
    }

    #[test]
    fn rq_dir_is_read_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.rq", "a.rq", "c.rq", "notes.txt"] {
            std::fs::write(dir.path().join(name), name).unwrap();
        }
        let raws: Vec<String> = read_log(dir.path(), LogFormat::RqDir)
            .unwrap()
            .map(|r| r.unwrap().raw)
            .collect();
        assert_eq!(raws, ["a.rq", "b.rq", "c.rq"]);
    }

    #[test]
    fn tsv_takes_second_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log.tsv");
        std::fs::write(
            &p,
            "timestamp\tquery\n2017-01-01\tASK%20%7B%7D\n2017-01-02\tSELECT%20*%20%7B%7D\nlonely\n",
        )
        .unwrap();
        let raws: Vec<String> = read_log(&p, LogFormat::Tsv)
            .unwrap()
            .map(|r| r.unwrap().raw)
            .collect();
        assert_eq!(raws, ["ASK {}", "SELECT * {}", ""]);
    }

    #[test]
    fn missing_path_is_an_error() {
        assert!(read_log(Path::new("/nonexistent/log"), LogFormat::Lines).is_err());
    }

    #[test]
    fn counting_examples() {
        let q = "SELECT * WHERE { ?s ?p ?o }";
        let q2 = "ASK { ?s ?p ?o }";
        let (_, c) = deduplicate(records(&[q, q, q2]), DedupMode::Whitespace, true);
        assert_eq!(
            c,
            CorpusCounts {
                total: 3,
                valid: 3,
                unique: 2
            }
        );
        let (kept, c) = deduplicate(records(&[q, "SELECT {", q]), DedupMode::Whitespace, true);
        assert_eq!((c.total, c.valid, c.unique), (3, 2, 1));
        assert_eq!(kept[0].0.index, 0);
        let (_, c) = deduplicate(records(&[q, q, q2]), DedupMode::Whitespace, false);
        assert_eq!((c.total, c.valid, c.unique), (3, 3, 3));
    }

    /// Rewrites whitespace until nothing changes; only valid for text
    /// without IRIs, strings or comments.
    fn brute_normalize(s: &str) -> String {
        let mut cur: String = s
            .trim()
            .chars()
            .map(|c| if c.is_whitespace() { ' ' } else { c })
            .collect();
        loop {
            let mut next = cur.replace("  ", " ");
            for d in ["{", "}", "(", ")", "[", "]", ".", ",", ";"] {
                next = next.replace(&format!(" {d}"), d).replace(&format!("{d} "), d);
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    #[test]
    fn whitespace_variants_share_a_duplicate_class() {
        let a = "SELECT * WHERE{?s ?p ?o}";
        let b = "SELECT  *  WHERE { ?s ?p ?o }";
        assert_eq!(normalize_whitespace(a), brute_normalize(a));
        assert_eq!(normalize_whitespace(b), brute_normalize(b));
        assert_eq!(normalize_whitespace(a), normalize_whitespace(b));
        assert_eq!(fingerprint(a, DedupMode::Whitespace), fingerprint(b, DedupMode::Whitespace));
        assert_ne!(fingerprint(a, DedupMode::Exact), fingerprint(b, DedupMode::Exact));
    }

    #[test]
    fn literals_and_iris_keep_their_whitespace() {
        let a = "ASK { ?s <p> \"a  b\" }";
        let b = "ASK { ?s <p> \"a b\" }";
        assert_ne!(normalize_whitespace(a), normalize_whitespace(b));
        assert_eq!(normalize_whitespace("ASK {?x < ?y}"), "ASK{?x < ?y}");
        assert_eq!(
            normalize_whitespace("ASK # c  omment\n { }"),
            "ASK # c  omment\n{}"
        );
    }

    proptest::proptest! {
        #[test]
        fn normalization_matches_rewriting(s in "[a-z?*{}().,;\\[\\] \t\n]{0,40}") {
            proptest::prop_assert_eq!(normalize_whitespace(&s), brute_normalize(&s));
        }

        #[test]
        fn normalization_is_idempotent(s in "[a-z?*{}\"<>#. \t\n]{0,40}") {
            let once = normalize_whitespace(&s);
            proptest::prop_assert_eq!(normalize_whitespace(&once), once.clone());
        }

        #[test]
        fn counts_are_ordered(picks in proptest::collection::vec(0usize..4, 0..30), dedup: bool) {
            let pool = ["ASK {}", "ASK  { }", "SELECT {", "SELECT * { ?s ?p ?o }"];
            let texts: Vec<&str> = picks.iter().map(|&i| pool[i]).collect();
            let (kept, c) = deduplicate(records(&texts), DedupMode::Whitespace, dedup);
            proptest::prop_assert!(c.unique <= c.valid && c.valid <= c.total);
            proptest::prop_assert_eq!(kept.len() as u64, c.unique);
            if !dedup {
                proptest::prop_assert_eq!(c.unique, c.valid);
            }
            if dedup {
                let again: Vec<&str> = kept.iter().map(|(r, _)| r.raw.as_str()).collect();
                let (_, c2) = deduplicate(records(&again), DedupMode::Whitespace, true);
                proptest::prop_assert_eq!((c2.total, c2.valid, c2.unique), (c.unique, c.unique, c.unique));
            }
        }
    }
}
