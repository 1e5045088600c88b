//! Streaks: windowed chains of similar queries in log order.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

pub const DEFAULT_WINDOW: usize = 30;
pub const DEFAULT_THRESHOLD: f64 = 0.25;

const KEYWORDS: [&str; 4] = ["select", "ask", "construct", "describe"];

/// The suffix starting at the first query-form keyword outside IRIs,
/// strings and comments; the whole text if there is none.
pub fn strip_prologue(raw: &str) -> &str {
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'<' => i = skip_until(bytes, i + 1, b'>'),
            b'#' => i = skip_until(bytes, i + 1, b'\n'),
            q @ (b'"' | b'\'') => i = skip_string(bytes, i, q),
            c if is_word(c) => {
                let start = i;
                while i < bytes.len() && is_word(bytes[i]) {
                    i += 1;
                }
                let word = &raw[start..i];
                let before = start.checked_sub(1).map(|p| bytes[p]);
                let after = bytes.get(i).copied();
                let standalone = !matches!(before, Some(b'?' | b'$' | b':' | b'@'))
                    && after != Some(b':');
                if standalone && KEYWORDS.iter().any(|k| word.eq_ignore_ascii_case(k)) {
                    return &raw[start..];
                }
            }
            _ => i += 1,
        }
    }
    raw
}

fn is_word(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b >= 0x80
}

/// Index just past the next `end` byte at or after `i`.
fn skip_until(bytes: &[u8], i: usize, end: u8) -> usize {
    bytes[i.min(bytes.len())..]
        .iter()
        .position(|&b| b == end)
        .map_or(bytes.len(), |p| i + p + 1)
}

fn skip_string(bytes: &[u8], start: usize, quote: u8) -> usize {
    let long = bytes.len() >= start + 3 && bytes[start + 1] == quote && bytes[start + 2] == quote;
    let mut i = start + if long { 3 } else { 1 };
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b if b == quote => {
                if !long {
                    return i + 1;
                }
                if bytes.len() >= i + 3 && bytes[i + 1] == quote && bytes[i + 2] == quote {
                    return i + 3;
                }
                i += 1;
            }
            b'\n' if !long => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len()
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

/// Edit distance if it is at most `max`, computed on a diagonal band of
/// width `2 * max + 1` with early exit.
pub fn levenshtein_bounded<T: PartialEq>(a: &[T], b: &[T], max: usize) -> Option<usize> {
    // Common prefixes and suffixes never need edits.
    let pre = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[pre..], &b[pre..]);
    let suf = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[..a.len() - suf], &b[..b.len() - suf]);
    let (n, m) = (a.len(), b.len());
    if n.abs_diff(m) > max {
        return None;
    }
    if n == 0 || m == 0 {
        return Some(n.max(m));
    }
    const INF: usize = usize::MAX / 2;
    // prev[j] holds D[i-1][j] for j in the band of row i-1.
    let mut prev = vec![INF; m + 1];
    let mut cur = vec![INF; m + 1];
    for (j, p) in prev.iter_mut().enumerate().take(max.min(m) + 1) {
        *p = j;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(max).max(1);
        let hi = (i + max).min(m);
        cur[lo - 1] = if lo == 1 && i <= max { i } else { INF };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            cur[hi + 1] = INF;
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
        if lo >= 2 {
            prev[lo - 2] = INF;
        }
    }
    let d = prev[m];
    (d <= max).then_some(d)
}

/// Edit distance divided by the longer length; 0 for two empty strings.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let m = a.len().max(b.len());
    if m == 0 {
        return 0.0;
    }
    levenshtein(&a, &b) as f64 / m as f64
}

/// Normalized distance at most `threshold`, decided with the banded
/// algorithm.
pub fn similar<T: PartialEq>(a: &[T], b: &[T], threshold: f64) -> bool {
    let m = a.len().max(b.len());
    if m == 0 {
        return true;
    }
    let max = (threshold * m as f64).floor() as usize;
    levenshtein_bounded(a, b, max).is_some_and(|d| d as f64 / m as f64 <= threshold)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreakConfig {
    pub window: usize,
    pub threshold: f64,
}

impl Default for StreakConfig {
    fn default() -> Self {
        StreakConfig {
            window: DEFAULT_WINDOW,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Streak {
    /// Log indices, strictly increasing.
    pub members: Vec<usize>,
}

impl Streak {
    pub fn start(&self) -> usize {
        self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

struct Pending {
    index: usize,
    text: Vec<char>,
    /// Streaks whose last member is this query.
    tails: Vec<usize>,
}

/// Single pass over a log in order. Keeps only queries that are still
/// waiting for their match inside the window.
pub struct StreakDetector {
    config: StreakConfig,
    pending: VecDeque<Pending>,
    open: HashMap<usize, Vec<usize>>,
    next_id: usize,
    done: Vec<Streak>,
}

impl StreakDetector {
    pub fn new(config: StreakConfig) -> Self {
        StreakDetector {
            config,
            pending: VecDeque::new(),
            open: HashMap::new(),
            next_id: 0,
            done: Vec::new(),
        }
    }

    /// Feed the next query; `index` is its position in the original log
    /// and must increase.
    pub fn push(&mut self, index: usize, raw: &str) {
        let w = self.config.window;
        while self.pending.front().is_some_and(|p| p.index + w < index) {
            let p = self.pending.pop_front().unwrap();
            self.close(p.tails);
        }
        let text: Vec<char> = strip_prologue(raw).chars().collect();
        let mut tails = Vec::new();
        let threshold = self.config.threshold;
        // The first similar successor is the match, so a matched query
        // leaves the window at once.
        self.pending.retain_mut(|p| {
            if similar(&p.text, &text, threshold) {
                tails.append(&mut p.tails);
                false
            } else {
                true
            }
        });
        if tails.is_empty() {
            let id = self.next_id;
            self.next_id += 1;
            self.open.insert(id, vec![index]);
            tails.push(id);
        } else {
            for id in &tails {
                self.open.get_mut(id).unwrap().push(index);
            }
        }
        self.pending.push_back(Pending { index, text, tails });
    }

    fn close(&mut self, ids: Vec<usize>) {
        for id in ids {
            let members = self.open.remove(&id).unwrap();
            self.done.push(Streak { members });
        }
    }

    /// Streaks completed so far, in no particular order.
    pub fn drain_finished(&mut self) -> Vec<Streak> {
        std::mem::take(&mut self.done)
    }

    /// All remaining streaks; the result is sorted by start index.
    pub fn finish(mut self) -> Vec<Streak> {
        while let Some(p) = self.pending.pop_front() {
            self.close(p.tails);
        }
        let mut out = self.done;
        out.sort();
        out
    }
}

/// Maximal streaks of a log given as `(index, text)` in order.
pub fn detect_streaks<'a, I>(log: I, config: StreakConfig) -> Vec<Streak>
where
    I: IntoIterator<Item = (usize, &'a str)>,
{
    let mut d = StreakDetector::new(config);
    for (i, text) in log {
        d.push(i, text);
    }
    d.finish()
}

/// Counts per length bucket: 1-10, 11-20, ..., 91-100, >100.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StreakHistogram {
    pub counts: [u64; 11],
}

impl StreakHistogram {
    pub const LABELS: [&'static str; 11] = [
        "1-10", "11-20", "21-30", "31-40", "41-50", "51-60", "61-70", "71-80", "81-90", "91-100",
        ">100",
    ];

    pub fn add(&mut self, len: usize) {
        let bucket = if len > 100 { 10 } else { len.saturating_sub(1) / 10 };
        self.counts[bucket] += 1;
    }
}

pub fn streak_histogram(streaks: &[Streak]) -> StreakHistogram {
    let mut h = StreakHistogram::default();
    for s in streaks {
        h.add(s.len());
    }
    h
}
