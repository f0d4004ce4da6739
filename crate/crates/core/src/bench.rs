//! Repeated seeded runs over a set of instances and the summary tables.
//!
//! Runs are collected as [`RunRecord`]s first; reports are computed from the
//! records alone, so a saved `runs.csv` can be re-aggregated into identical
//! tables.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::memetic::{multi_start_tabu, single_tabu, solve, MemeticParams, RunResult};

/// Runs whose best is within this of the overall best count as successes.
pub const SUCCESS_TOLERANCE: f64 = 1e-6;

/// Smallest equality tolerance used against reference values.
pub const MIN_REFERENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    #[default]
    Memetic,
    MultiStart,
    Tabu,
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mammdp" | "memetic" | "ma" => Ok(Algorithm::Memetic),
            "mts" => Ok(Algorithm::MultiStart),
            "ts" | "tabu" => Ok(Algorithm::Tabu),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Memetic => "mammdp",
            Algorithm::MultiStart => "mts",
            Algorithm::Tabu => "ts",
        })
    }
}

pub fn run_algorithm(
    algo: Algorithm,
    inst: &Instance,
    params: &MemeticParams,
) -> Result<RunResult> {
    match algo {
        Algorithm::Memetic => solve(inst, params),
        Algorithm::MultiStart => multi_start_tabu(inst, params),
        Algorithm::Tabu => single_tabu(inst, params),
    }
}

/// Wall-clock cutoff by instance size: the first rule whose bound is
/// `>= n` applies, otherwise the fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffTable {
    pub rules: Vec<(usize, f64)>,
    pub fallback: f64,
}

impl Default for CutoffTable {
    /// 10 s up to n = 150, 100 s up to 1000, 1000 s up to 3000, 2000 s beyond.
    fn default() -> Self {
        CutoffTable {
            rules: vec![(150, 10.0), (1000, 100.0), (3000, 1000.0)],
            fallback: 2000.0,
        }
    }
}

impl CutoffTable {
    pub fn fixed(seconds: f64) -> Self {
        CutoffTable {
            rules: Vec::new(),
            fallback: seconds,
        }
    }

    pub fn seconds_for(&self, n: usize) -> f64 {
        self.rules
            .iter()
            .find(|&&(max_n, _)| n <= max_n)
            .map_or(self.fallback, |&(_, s)| s)
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Base parameters; run `r` uses seed `params.seed + r` and the cutoff
    /// from `cutoffs` unless `params.max_iters` is set.
    pub params: MemeticParams,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub cutoffs: CutoffTable,
    /// Worker threads; each run is single-threaded.
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            params: MemeticParams::default(),
            algorithm: Algorithm::Memetic,
            runs: 20,
            cutoffs: CutoffTable::default(),
            workers: 1,
        }
    }
}

/// One finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub n: usize,
    pub run: usize,
    pub seed: u64,
    pub f: f64,
    pub time_to_best: f64,
    pub iters_to_best: u64,
    pub cutoff: f64,
}

/// Result of comparing a best value with a literature reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Better,
    Equal,
    Worse,
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Comparison::Better => "better",
            Comparison::Equal => "equal",
            Comparison::Worse => "worse",
        })
    }
}

pub fn classify(achieved: f64, reference: f64, tolerance: f64) -> Comparison {
    if achieved > reference + tolerance {
        Comparison::Better
    } else if achieved < reference - tolerance {
        Comparison::Worse
    } else {
        Comparison::Equal
    }
}

/// A reference objective value as printed, with the equality tolerance its
/// precision allows: half a unit in the last printed digit, at least
/// [`MIN_REFERENCE_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub text: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Reference {
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        let value: f64 = text.parse().ok().filter(|v: &f64| v.is_finite())?;
        let mantissa = text.split(['e', 'E']).next().unwrap_or(text);
        let decimals = mantissa.split_once('.').map_or(0, |(_, frac)| frac.len());
        let tolerance = (0.5 * 10f64.powi(-(decimals as i32))).max(MIN_REFERENCE_TOLERANCE);
        Some(Reference {
            text: text.to_string(),
            value,
            tolerance,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceSet {
    values: HashMap<String, Reference>,
}

impl ReferenceSet {
    /// Reads a CSV with an `instance` column and the named value column
    /// (normally `f_pre`). Other columns are ignored; unparsable values are
    /// skipped with a warning.
    pub fn from_csv<R: Read>(reader: R, column: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("reference file has no `{name}` column"),
                })
        };
        let (name_col, value_col) = (find("instance")?, find(column)?);
        let mut values = HashMap::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line() as usize);
            let name = row.get(name_col).unwrap_or_default().to_string();
            match row.get(value_col).and_then(Reference::parse) {
                Some(r) => {
                    values.insert(name, r);
                }
                None => warn!("reference line {line}: no usable `{column}` value for `{name}`"),
            }
        }
        Ok(ReferenceSet { values })
    }

    pub fn from_file(path: impl AsRef<Path>, column: &str) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?, column)
    }

    pub fn insert(&mut self, instance: impl Into<String>, reference: Reference) {
        self.values.insert(instance.into(), reference);
    }

    pub fn get(&self, instance: &str) -> Option<&Reference> {
        self.values.get(instance)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-instance summary over all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub n: usize,
    pub runs: usize,
    pub f_best: f64,
    pub f_avg: f64,
    /// Runs that reached `f_best`.
    pub sr: usize,
    /// Mean seconds to each run's own best.
    pub t_best_avg: f64,
    pub reference: Option<Reference>,
    pub comparison: Option<Comparison>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub better: usize,
    pub equal: usize,
    pub worse: usize,
}

impl Tally {
    pub fn of(reports: &[RunReport]) -> Self {
        let mut t = Tally::default();
        for c in reports.iter().filter_map(|r| r.comparison) {
            match c {
                Comparison::Better => t.better += 1,
                Comparison::Equal => t.equal += 1,
                Comparison::Worse => t.worse += 1,
            }
        }
        t
    }
}

/// Executes `cfg.runs` runs per instance on a pool of `cfg.workers`
/// threads. Records come back ordered by instance, then run.
pub fn run_benchmark(instances: &[Instance], cfg: &BenchConfig) -> Result<Vec<RunRecord>> {
    cfg.params.validate()?;
    if cfg.runs == 0 {
        return Err(Error::InvalidConfig("at least one run is required".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..cfg.runs).map(move |r| (i, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(i, r)| {
                let inst = &instances[i];
                let cutoff = cfg.cutoffs.seconds_for(inst.n());
                let seed = cfg.params.seed.wrapping_add(r as u64);
                let params = MemeticParams {
                    seed,
                    time_limit: if cfg.params.max_iters.is_some() {
                        None
                    } else {
                        Some(cutoff)
                    },
                    ..cfg.params.clone()
                };
                let result = run_algorithm(cfg.algorithm, inst, &params)?;
                info!(
                    "{} run {r}: f={:.6} t={:.2}s",
                    inst.name(),
                    result.f(),
                    result.time_to_best.as_secs_f64()
                );
                Ok(RunRecord {
                    instance: inst.name().to_string(),
                    n: inst.n(),
                    run: r,
                    seed,
                    f: result.f(),
                    time_to_best: result.time_to_best.as_secs_f64(),
                    iters_to_best: result.iters_to_best,
                    cutoff: params.time_limit.unwrap_or(0.0),
                })
            })
            .collect()
    })
}

/// Summarises records per instance, in order of first appearance.
pub fn aggregate(records: &[RunRecord], references: Option<&ReferenceSet>) -> Vec<RunReport> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&RunRecord>> = HashMap::new();
    for r in records {
        let entry = groups.entry(r.instance.as_str()).or_default();
        if entry.is_empty() {
            order.push(r.instance.as_str());
        }
        entry.push(r);
    }
    order
        .into_iter()
        .map(|name| {
            let runs = &groups[name];
            let f_best = runs.iter().map(|r| r.f).fold(f64::NEG_INFINITY, f64::max);
            let f_avg = runs.iter().map(|r| r.f).sum::<f64>() / runs.len() as f64;
            let sr = runs
                .iter()
                .filter(|r| r.f >= f_best - SUCCESS_TOLERANCE)
                .count();
            let t_best_avg = runs.iter().map(|r| r.time_to_best).sum::<f64>() / runs.len() as f64;
            let reference = references.and_then(|refs| refs.get(name)).cloned();
            if references.is_some() && reference.is_none() {
                warn!("no reference value for `{name}`");
            }
            let comparison = reference
                .as_ref()
                .map(|r| classify(f_best, r.value, r.tolerance));
            RunReport {
                instance: name.to_string(),
                n: runs[0].n,
                runs: runs.len(),
                f_best,
                f_avg,
                sr,
                t_best_avg,
                reference,
                comparison,
            }
        })
        .collect()
}

const RECORD_HEADER: [&str; 8] = [
    "instance",
    "n",
    "run",
    "seed",
    "f",
    "time_to_best",
    "iters_to_best",
    "cutoff",
];

pub fn write_records_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            // shortest round-trip text, so re-aggregation is exact
            r.f.to_string(),
            r.time_to_best.to_string(),
            r.iters_to_best.to_string(),
            r.cutoff.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let row = row?;
        let line = k + 2;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let bad = |what: &str| Error::Parse {
            line,
            msg: format!("bad `{what}` field"),
        };
        out.push(RunRecord {
            instance: field(0).to_string(),
            n: field(1).parse().map_err(|_| bad("n"))?,
            run: field(2).parse().map_err(|_| bad("run"))?,
            seed: field(3).parse().map_err(|_| bad("seed"))?,
            f: field(4).parse().map_err(|_| bad("f"))?,
            time_to_best: field(5).parse().map_err(|_| bad("time_to_best"))?,
            iters_to_best: field(6).parse().map_err(|_| bad("iters_to_best"))?,
            cutoff: field(7).parse().map_err(|_| bad("cutoff"))?,
        });
    }
    Ok(out)
}

pub fn write_report_csv<W: Write>(reports: &[RunReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance",
        "n",
        "f_pre",
        "f_best",
        "f_avg",
        "sr",
        "runs",
        "t_best_avg",
        "comparison",
    ])?;
    for r in reports {
        w.write_record([
            r.instance.clone(),
            r.n.to_string(),
            r.reference
                .as_ref()
                .map(|x| x.text.clone())
                .unwrap_or_default(),
            format!("{:.6}", r.f_best),
            format!("{:.6}", r.f_avg),
            r.sr.to_string(),
            r.runs.to_string(),
            format!("{:.2}", r.t_best_avg),
            r.comparison.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Markdown table with columns Instance, n, f_pre, f_best, f_avg, SR, t(s),
/// followed by the better/equal/worse tally when references were given.
pub fn render_markdown(reports: &[RunReport]) -> String {
    let mut s = String::new();
    s.push_str("| Instance | n | f_pre | f_best | f_avg | SR | t(s) |\n");
    s.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
    for r in reports {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.6} | {:.6} | {}/{} | {:.2} |",
            r.instance,
            r.n,
            r.reference.as_ref().map_or("", |x| x.text.as_str()),
            r.f_best,
            r.f_avg,
            r.sr,
            r.runs,
            r.t_best_avg
        );
    }
    if reports.iter().any(|r| r.comparison.is_some()) {
        let t = Tally::of(reports);
        let _ = write!(
            s,
            "\n#Better: {}  #Equal: {}  #Worse: {}\n",
            t.better, t.equal, t.worse
        );
    }
    s
}

/// Writes `runs.csv`, `report.csv` and `report.md` into `dir`.
pub fn write_outputs(
    dir: impl AsRef<Path>,
    records: &[RunRecord],
    reports: &[RunReport],
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_records_csv(records, std::fs::File::create(dir.join("runs.csv"))?)?;
    write_report_csv(reports, std::fs::File::create(dir.join("report.csv"))?)?;
    std::fs::write(dir.join("report.md"), render_markdown(reports))?;
    Ok(())
}

/// Instance paths listed one per line; `#` starts a comment. Relative
/// paths are resolved against the manifest's directory.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let p = Path::new(l);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(instance: &str, run: usize, f: f64) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            n: 20,
            run,
            seed: run as u64,
            f,
            time_to_best: 0.5 * run as f64,
            iters_to_best: 10,
            cutoff: 10.0,
        }
    }

    #[test]
    fn equal_runs() {
        let reports = aggregate(
            &[rec("a", 0, 3.5), rec("a", 1, 3.5), rec("a", 2, 3.5)],
            None,
        );
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!((r.sr, r.runs), (3, 3));
        assert_eq!(r.f_avg, r.f_best);
        assert!((r.t_best_avg - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mixed_runs() {
        let records = [
            rec("b", 0, 1.0),
            rec("a", 0, 2.0),
            rec("b", 1, 3.0),
            rec("b", 2, 3.0),
        ];
        let reports = aggregate(&records, None);
        assert_eq!(reports[0].instance, "b");
        assert_eq!(reports[0].f_best, 3.0);
        assert_eq!(reports[0].sr, 2);
        assert!((reports[0].f_avg - 7.0 / 3.0).abs() < 1e-12);
        assert!(reports[0].f_avg <= reports[0].f_best);
        assert_eq!(reports[1].instance, "a");
    }

    #[test]
    fn reference_precision() {
        let r = Reference::parse("77.60").unwrap();
        assert_eq!(r.tolerance, 5e-3);
        assert_eq!(
            classify(78.610216, r.value, r.tolerance),
            Comparison::Better
        );
        assert_eq!(classify(77.604, r.value, r.tolerance), Comparison::Equal);
        assert_eq!(classify(77.59, r.value, r.tolerance), Comparison::Worse);

        let exact = Reference::parse("81.277044").unwrap();
        assert_eq!(exact.tolerance, MIN_REFERENCE_TOLERANCE);
        assert_eq!(
            classify(81.277044 - 2e-6, exact.value, exact.tolerance),
            Comparison::Worse
        );
        assert_eq!(
            classify(81.2770445, exact.value, exact.tolerance),
            Comparison::Equal
        );
        assert!(Reference::parse("n/a").is_none());
    }

    #[test]
    fn reference_csv_and_tally() {
        let csv = "instance,f_pre\nMDPI2_500,77.60\nMDPI1_500,81.28\n# trailing comment\n";
        let refs = ReferenceSet::from_csv(csv.as_bytes(), "f_pre").unwrap();
        assert_eq!(refs.len(), 2);
        let records = [
            rec("MDPI2_500", 0, 78.610216),
            rec("MDPI1_500", 0, 81.277044),
            rec("other", 0, 1.0),
        ];
        let reports = aggregate(&records, Some(&refs));
        assert_eq!(reports[0].comparison, Some(Comparison::Better));
        assert_eq!(reports[1].comparison, Some(Comparison::Equal));
        assert_eq!(reports[2].comparison, None);
        assert_eq!(
            Tally::of(&reports),
            Tally {
                better: 1,
                equal: 1,
                worse: 0
            }
        );
        let md = render_markdown(&reports);
        assert!(md.starts_with("| Instance | n | f_pre | f_best | f_avg | SR | t(s) |"));
        assert!(md.contains("| MDPI2_500 | 20 | 77.60 | 78.610216 | 78.610216 | 1/1 | 0.00 |"));
        assert!(md.contains("#Better: 1  #Equal: 1  #Worse: 0"));
    }

    #[test]
    fn missing_reference_column() {
        let err = ReferenceSet::from_csv("instance,value\na,1\n".as_bytes(), "f_pre").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn records_reaggregate_identically() {
        let records = vec![
            rec("x", 0, 1.0 / 3.0),
            rec("x", 1, 2.0 / 7.0),
            rec("y", 0, 12.345678901),
        ];
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        let back = read_records_csv(buf.as_slice()).unwrap();
        assert_eq!(back, records);
        assert_eq!(aggregate(&back, None), aggregate(&records, None));
    }

    #[test]
    fn default_cutoffs() {
        let t = CutoffTable::default();
        assert_eq!(t.seconds_for(20), 10.0);
        assert_eq!(t.seconds_for(150), 10.0);
        assert_eq!(t.seconds_for(500), 100.0);
        assert_eq!(t.seconds_for(1000), 100.0);
        assert_eq!(t.seconds_for(3000), 1000.0);
        assert_eq!(t.seconds_for(5000), 2000.0);
        assert_eq!(CutoffTable::fixed(2.0).seconds_for(5000), 2.0);
    }

    #[test]
    fn manifest_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.txt");
        std::fs::write(&path, "# instances\na.txt\n\n/abs/b.txt  # absolute\n").unwrap();
        let paths = read_manifest(&path).unwrap();
        assert_eq!(
            paths,
            vec![dir.path().join("a.txt"), PathBuf::from("/abs/b.txt")]
        );
    }
}
