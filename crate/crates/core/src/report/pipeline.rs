//! Ingest, parallel per-query analysis and ordered streak detection.

use std::collections::{BTreeMap, HashSet};
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::tables::{Table, TableKind};
use super::{analyze_query, AnalysisOptions, GroupReport, QueryAnalysis};
use crate::ingest::{fingerprint, read_log, DedupMode, Deduplicator, LogFormat, LogRecord};
use crate::parser::parse_query;
use crate::streak::{StreakConfig, StreakDetector, Streak, StreakHistogram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub format: LogFormat,
    pub dedup: bool,
    pub dedup_mode: DedupMode,
    pub analysis: AnalysisOptions,
    /// Run streak detection over the analyzed queries of each input.
    pub streaks: Option<StreakConfig>,
    /// Keep one row per analyzed query.
    pub details: bool,
    /// Records read before a parallel analysis step.
    pub chunk_size: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            format: LogFormat::Lines,
            dedup: true,
            dedup_mode: DedupMode::default(),
            analysis: AnalysisOptions::default(),
            streaks: None,
            details: false,
            chunk_size: 4096,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryRow {
    pub index: usize,
    pub line: usize,
    pub analysis: QueryAnalysis,
}

#[derive(Debug, Clone)]
pub struct ReportGroup {
    pub name: String,
    /// `None` for the merged group.
    pub source: Option<PathBuf>,
    pub report: GroupReport,
    pub streaks: Vec<Streak>,
    pub details: Vec<QueryRow>,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    /// One group per readable input, then the merged group `all`.
    pub groups: Vec<ReportGroup>,
    /// Inputs that could not be read, with the error.
    pub skipped: Vec<(PathBuf, String)>,
}

fn group_name(path: &Path, taken: &mut HashSet<String>) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let base: String = stem
        .chars()
        .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    let base = if base.is_empty() { "input".to_owned() } else { base };
    let mut name = base.clone();
    let mut n = 2;
    while !taken.insert(name.clone()) {
        name = format!("{base}-{n}");
        n += 1;
    }
    name
}

/// Analyze every input in order. Inputs that cannot be opened are logged
/// and skipped; a read error inside an input ends that input.
pub fn run_pipeline(inputs: &[PathBuf], opts: &PipelineOptions) -> ReportBundle {
    let mut taken = HashSet::from(["all".to_owned()]);
    let mut groups = Vec::new();
    let mut skipped = Vec::new();
    let mut next_index = 0;
    for path in inputs {
        let reader = match read_log(path, opts.format) {
            Ok(r) => r.starting_at(next_index),
            Err(e) => {
                log::error!("skipping {}: {e}", path.display());
                skipped.push((path.clone(), e.to_string()));
                continue;
            }
        };
        log::info!("reading {}", path.display());
        let (group, end) = run_one(reader, next_index, opts, group_name(path, &mut taken), path);
        next_index = end;
        log::info!(
            "{}: {} total, {} valid, {} analyzed",
            path.display(),
            group.report.corpus.total,
            group.report.corpus.valid,
            group.report.analyzed
        );
        groups.push(group);
    }
    let mut all = GroupReport::new();
    let mut streaks = Vec::new();
    for g in &groups {
        all.merge(&g.report);
        streaks.extend(g.streaks.iter().cloned());
    }
    if opts.streaks.is_some() && all.streaks.is_none() {
        all.streaks = Some(StreakHistogram::default());
    }
    groups.push(ReportGroup {
        name: "all".to_owned(),
        source: None,
        report: all,
        streaks,
        details: Vec::new(),
    });
    ReportBundle { groups, skipped }
}

fn run_one(
    mut reader: impl Iterator<Item = io::Result<LogRecord>>,
    first_index: usize,
    opts: &PipelineOptions,
    name: String,
    path: &Path,
) -> (ReportGroup, usize) {
    let mut dedup = Deduplicator::new(opts.dedup_mode, opts.dedup);
    let mut report = GroupReport::new();
    let mut detector = opts.streaks.map(StreakDetector::new);
    let mut details = Vec::new();
    let mut end = first_index;
    let chunk_size = opts.chunk_size.max(1);
    let mut failed = false;
    while !failed {
        let mut chunk = Vec::with_capacity(chunk_size);
        for rec in reader.by_ref() {
            match rec {
                Ok(r) => {
                    end = r.index + 1;
                    chunk.push(r);
                    if chunk.len() == chunk_size {
                        break;
                    }
                }
                Err(e) => {
                    log::error!("{}: read error, stopping this input: {e}", path.display());
                    failed = true;
                    break;
                }
            }
        }
        if chunk.is_empty() {
            break;
        }
        let last = chunk.len() < chunk_size;
        let parsed: Vec<_> = chunk
            .par_iter()
            .map(|r| {
                let q = parse_query(&r.raw);
                if let Err(e) = &q {
                    log::debug!("{}:{}: {e}", path.display(), r.source.line);
                }
                let fp = q.is_ok().then(|| fingerprint(&r.raw, opts.dedup_mode));
                (q.ok(), fp)
            })
            .collect();
        let kept: Vec<_> = chunk
            .iter()
            .zip(parsed)
            .filter_map(|(r, (q, fp))| {
                let keep = dedup.push_fingerprint(fp.unwrap_or(0), q.is_some());
                keep.then(|| (r, q.unwrap()))
            })
            .collect();
        let analysis = &opts.analysis;
        let (analyses, ()) = rayon::join(
            || {
                kept.par_iter()
                    .map(|(_, q)| analyze_query(q, analysis))
                    .collect::<Vec<_>>()
            },
            || {
                if let Some(d) = detector.as_mut() {
                    for (r, _) in &kept {
                        d.push(r.index, &r.raw);
                    }
                }
            },
        );
        for ((r, _), a) in kept.iter().zip(analyses) {
            report.add(&a);
            if opts.details {
                details.push(QueryRow {
                    index: r.index,
                    line: r.source.line,
                    analysis: a,
                });
            }
        }
        if last {
            break;
        }
    }
    report.corpus = dedup.counts();
    let streaks = detector.map(|d| d.finish()).unwrap_or_default();
    if opts.streaks.is_some() {
        let mut h = StreakHistogram::default();
        for s in &streaks {
            h.add(s.len());
        }
        report.streaks = Some(h);
        report.longest_streak = streaks.iter().map(Streak::len).max();
    }
    let group = ReportGroup {
        name,
        source: Some(path.to_path_buf()),
        report,
        streaks,
        details,
    };
    (group, end)
}

const DETAIL_HEADER: [&str; 20] = [
    "index",
    "line",
    "query_type",
    "triples",
    "operators",
    "aof",
    "cq",
    "cqf",
    "cqfo",
    "well_designed",
    "interface_width",
    "shape",
    "memberships",
    "girth",
    "flower",
    "treewidth",
    "acyclic",
    "hypertree_width",
    "decomposition_nodes",
    "paths",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn detail_record(row: &QueryRow) -> Vec<String> {
    let a = &row.analysis;
    let p = &a.profile;
    let f = a.fragments.as_ref();
    let flag = |get: fn(&crate::fragment::FragmentProfile) -> bool| opt(f.map(get));
    let shape = a.graph.as_ref().map(|g| &g.shape);
    let w = a.widths.as_ref();
    vec![
        row.index.to_string(),
        row.line.to_string(),
        format!("{:?}", p.query_type),
        p.triple_count.to_string(),
        p.operators.map(|o| match o {
            crate::profile::OperatorClass::Set(s) if s.is_empty() => "none".to_owned(),
            crate::profile::OperatorClass::Set(s) => s.to_string(),
            crate::profile::OperatorClass::Other => "other".to_owned(),
        })
        .unwrap_or_default(),
        flag(|f| f.is_aof),
        flag(|f| f.is_cq),
        flag(|f| f.is_cqf),
        flag(|f| f.is_cqfo),
        opt(f.and_then(|f| f.is_well_designed)),
        opt(f.and_then(|f| f.interface_width)),
        opt(shape.map(|s| s.most_specific)),
        shape
            .map(|s| s.memberships.iter().map(|m| m.name()).collect::<Vec<_>>().join(";"))
            .unwrap_or_default(),
        opt(shape.and_then(|s| s.girth)),
        shape
            .and_then(|s| s.flower_stats)
            .map(|s| format!("{}/{}/{}", s.petals, s.stamens, s.stems))
            .unwrap_or_default(),
        opt(w.and_then(|w| w.treewidth)),
        opt(w.map(|w| w.acyclic)),
        opt(w.map(|w| w.hypertree_width.clone())),
        opt(w.and_then(|w| w.decomposition_nodes)),
        a.paths
            .iter()
            .map(|c| c.template.notation())
            .collect::<Vec<_>>()
            .join(";"),
    ]
}

impl ReportGroup {
    pub fn table(&self, kind: TableKind) -> Table {
        kind.render(&self.report)
    }
}

impl ReportBundle {
    pub fn group(&self, name: &str) -> Option<&ReportGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn all(&self) -> &ReportGroup {
        self.groups.last().expect("the merged group is always present")
    }

    /// Write `<out>/<group>/<table>.csv` for the selected tables, the streak
    /// list and per-query rows when present, and `<out>/summary.json`.
    pub fn write_dir(&self, out: &Path, kinds: &[TableKind]) -> io::Result<()> {
        std::fs::create_dir_all(out)?;
        let mut summary = Vec::new();
        // Streak ids number the merged list, which concatenates the inputs.
        let mut first_id = 0;
        for g in &self.groups {
            if g.source.is_none() {
                first_id = 0;
            }
            let dir = out.join(&g.name);
            std::fs::create_dir_all(&dir)?;
            let mut tables = BTreeMap::new();
            for &k in kinds {
                if k == TableKind::StreakHistogram && g.report.streaks.is_none() {
                    continue;
                }
                let t = g.table(k);
                t.write_csv(&dir.join(format!("{}.csv", k.name())))?;
                tables.insert(k.name(), t);
            }
            if g.report.streaks.is_some() && kinds.contains(&TableKind::StreakHistogram) {
                let mut w = csv::Writer::from_path(dir.join("streaks.csv"))?;
                w.write_record(["streak_id", "start_index", "length"])?;
                for (i, s) in g.streaks.iter().enumerate() {
                    let id = first_id + i;
                    w.write_record([id.to_string(), s.start().to_string(), s.len().to_string()])?;
                }
                w.flush()?;
            }
            first_id += g.streaks.len();
            if !g.details.is_empty() {
                let mut w = csv::Writer::from_path(dir.join("queries.csv"))?;
                w.write_record(DETAIL_HEADER)?;
                for row in &g.details {
                    w.write_record(detail_record(row))?;
                }
                w.flush()?;
            }
            summary.push(serde_json::json!({
                "name": g.name,
                "source": g.source.as_ref().map(|p| p.display().to_string()),
                "longest_streak": g.report.longest_streak,
                "tables": tables,
            }));
        }
        let skipped: Vec<_> = self
            .skipped
            .iter()
            .map(|(p, e)| serde_json::json!({"input": p.display().to_string(), "error": e}))
            .collect();
        let doc = serde_json::json!({ "groups": summary, "skipped": skipped });
        let mut text = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(out.join("summary.json"), text)
    }
}
