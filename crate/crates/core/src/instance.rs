//! Problem instances: the distance matrix, random generation of the two
//! standard instance families, and the text file format.
//!
//! The canonical file layout is
//!
//! ```text
//! # comment lines start with '#'
//! n
//! i j d_ij        (one line per pair, 1-based, i < j, n(n-1)/2 lines)
//! ```
//!
//! The reader also accepts a full-matrix layout: the `n` header followed by
//! `n` rows of `n` whitespace-separated reals. Symmetry is checked to within
//! [`SYMMETRY_TOLERANCE`]; diagonal entries are ignored.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest asymmetry accepted when reading a full matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Maximum rounding precision accepted by the generator.
pub const MAX_DECIMALS: u32 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    /// Off-diagonal distances uniform on [-10, 10].
    TypeI,
    /// Off-diagonal distances uniform on [-10, -5] ∪ [5, 10].
    TypeII,
    /// Anything read from a file without a recognised kind tag.
    External,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::TypeI => "TypeI",
            InstanceKind::TypeII => "TypeII",
            InstanceKind::External => "External",
        })
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TypeI" | "I" | "1" => Ok(InstanceKind::TypeI),
            "TypeII" | "II" | "2" => Ok(InstanceKind::TypeII),
            "External" => Ok(InstanceKind::External),
            other => Err(Error::InvalidConfig(format!(
                "unknown instance kind `{other}`"
            ))),
        }
    }
}

/// A symmetric distance matrix over `n >= 2` elements.
///
/// Immutable once built; share it by reference across concurrent runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    d: Vec<f64>,
    name: String,
    kind: InstanceKind,
}

impl Instance {
    /// Builds an instance from a row-major `n * n` matrix.
    ///
    /// The lower triangle is taken from the upper one and the diagonal is
    /// forced to zero, so only entries with `i < j` are read.
    pub fn from_dense(
        n: usize,
        mut d: Vec<f64>,
        name: impl Into<String>,
        kind: InstanceKind,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "instance needs n >= 2, got {n}"
            )));
        }
        if d.len() != n * n {
            return Err(Error::InvalidConfig(format!(
                "matrix has {} entries, expected {}",
                d.len(),
                n * n
            )));
        }
        for i in 0..n {
            d[i * n + i] = 0.0;
            for j in (i + 1)..n {
                d[j * n + i] = d[i * n + j];
            }
        }
        Ok(Instance {
            n,
            d,
            name: name.into(),
            kind,
        })
    }

    /// Builds an instance from `(i, j, d_ij)` triples with 0-based indices.
    /// Pairs not listed get distance 0.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let mut d = vec![0.0; n * n];
        for (i, j, v) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::InvalidConfig(format!(
                    "bad pair ({i}, {j}) for n = {n}"
                )));
            }
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
        Instance::from_dense(n, d, name, InstanceKind::External)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Row `i` of the matrix, `row(i)[j] == dist(i, j)`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Iterates `(i, j, d_ij)` over the upper triangle, 0-based.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.dist(i, j))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub kind: InstanceKind,
    pub seed: u64,
    /// Distances are rounded to this many decimal places.
    pub decimals: u32,
}

impl GeneratorConfig {
    pub fn new(n: usize, kind: InstanceKind, seed: u64) -> Self {
        GeneratorConfig {
            n,
            kind,
            seed,
            decimals: 2,
        }
    }

    pub fn decimals(mut self, decimals: u32) -> Self {
        self.decimals = decimals;
        self
    }
}

/// Draws a Type I or Type II instance. Deterministic in `cfg.seed`.
///
/// Type II picks each interval with a fair coin and then a uniform value
/// inside it.
pub fn generate(cfg: &GeneratorConfig) -> Result<Instance> {
    if cfg.n < 2 {
        return Err(Error::InvalidConfig(format!(
            "generator needs n >= 2, got {}",
            cfg.n
        )));
    }
    if cfg.decimals > MAX_DECIMALS {
        return Err(Error::InvalidConfig(format!(
            "decimals must be at most {MAX_DECIMALS}, got {}",
            cfg.decimals
        )));
    }
    let scale = 10f64.powi(cfg.decimals as i32);
    let round = |v: f64| (v * scale).round() / scale;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = match cfg.kind {
                InstanceKind::TypeI => rng.random_range(-10.0..=10.0),
                InstanceKind::TypeII => {
                    let magnitude: f64 = rng.random_range(5.0..=10.0);
                    if rng.random_bool(0.5) {
                        magnitude
                    } else {
                        -magnitude
                    }
                }
                InstanceKind::External => {
                    return Err(Error::InvalidConfig(
                        "cannot generate an External instance".into(),
                    ))
                }
            };
            d[i * n + j] = round(v);
        }
    }
    let tag = match cfg.kind {
        InstanceKind::TypeI => "I",
        _ => "II",
    };
    let name = format!("gen{tag}_n{}_s{}", n, cfg.seed);
    Instance::from_dense(n, d, name, cfg.kind)
}

/// Writes the canonical pair layout. A leading comment records the name
/// and kind so that [`read_instance`] restores them.
pub fn write_instance<W: Write>(inst: &Instance, mut sink: W) -> Result<()> {
    writeln!(sink, "# name={} kind={}", inst.name, inst.kind)?;
    writeln!(sink, "{}", inst.n)?;
    for (i, j, v) in inst.pairs() {
        // `{}` on f64 prints the shortest text that parses back to the same bits.
        writeln!(sink, "{} {} {}", i + 1, j + 1, v)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn write_instance_file(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_instance(inst, std::io::BufWriter::new(file))
}

/// Reads either the canonical pair layout or the full-matrix layout.
pub fn read_instance<R: BufRead>(source: R) -> Result<Instance> {
    let mut name = String::from("instance");
    let mut kind = InstanceKind::External;
    let mut lines: Vec<(usize, String)> = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            for token in comment.split_whitespace() {
                if let Some(v) = token.strip_prefix("name=") {
                    name = v.to_string();
                } else if let Some(v) = token.strip_prefix("kind=") {
                    kind = v.parse().unwrap_or(InstanceKind::External);
                }
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        lines.push((idx + 1, trimmed.to_string()));
    }

    let mut iter = lines.into_iter();
    let (header_line, header) = iter.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file, expected element count".into(),
    })?;
    let n: usize = header.parse().map_err(|_| Error::Parse {
        line: header_line,
        msg: format!("malformed header `{header}`, expected a single element count"),
    })?;
    if n < 2 {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("n must be >= 2, got {n}"),
        });
    }
    let body: Vec<(usize, String)> = iter.collect();

    let d = if looks_like_matrix(n, &body) {
        parse_matrix(n, header_line, &body)?
    } else {
        parse_pairs(n, header_line, &body)?
    };
    Instance::from_dense(n, d, name, kind)
}

pub fn read_instance_file(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let mut inst = read_instance(std::io::BufReader::new(file))?;
    if inst.name == "instance" {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            inst.name = stem.to_string();
        }
    }
    Ok(inst)
}

// A matrix row 1 starts with d_11 = 0, a pair line with index 1, which
// separates the layouts when n = 3 and both have three tokens per line.
fn looks_like_matrix(n: usize, body: &[(usize, String)]) -> bool {
    let Some((_, first)) = body.first() else {
        return false;
    };
    let tokens: Vec<&str> = first.split_whitespace().collect();
    if tokens.len() != n {
        return false;
    }
    if n != 3 {
        return true;
    }
    matches!(tokens[0].parse::<f64>(), Ok(v) if v == 0.0)
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{token}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite distance `{token}`"),
        });
    }
    Ok(v)
}

fn parse_pairs(n: usize, header_line: usize, body: &[(usize, String)]) -> Result<Vec<f64>> {
    let expected = n * (n - 1) / 2;
    let mut d = vec![0.0; n * n];
    let mut seen = vec![false; n * n];
    for (count, (line, text)) in body.iter().enumerate() {
        let line = *line;
        if count >= expected {
            return Err(Error::Parse {
                line,
                msg: format!("more than the {expected} pair lines declared by n = {n}"),
            });
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected `i j d`, found {} field(s)", tokens.len()),
            });
        }
        let index = |t: &str| -> Result<usize> {
            let v: usize = t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("`{t}` is not an index"),
            })?;
            if v == 0 || v > n {
                return Err(Error::Parse {
                    line,
                    msg: format!("index {v} out of range 1..={n}"),
                });
            }
            Ok(v - 1)
        };
        let (i, j) = (index(tokens[0])?, index(tokens[1])?);
        if i == j {
            return Err(Error::Parse {
                line,
                msg: format!("self-pair ({}, {})", i + 1, j + 1),
            });
        }
        let (i, j) = (i.min(j), i.max(j));
        if seen[i * n + j] {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate pair ({}, {})", i + 1, j + 1),
            });
        }
        seen[i * n + j] = true;
        d[i * n + j] = parse_f64(tokens[2], line)?;
    }
    if body.len() < expected {
        let line = body.last().map_or(header_line, |(l, _)| *l);
        return Err(Error::Parse {
            line,
            msg: format!(
                "missing entries: found {} of {expected} pair lines",
                body.len()
            ),
        });
    }
    Ok(d)
}

fn parse_matrix(n: usize, header_line: usize, body: &[(usize, String)]) -> Result<Vec<f64>> {
    let mut d = vec![0.0; n * n];
    for (row, (line, text)) in body.iter().enumerate() {
        if row >= n {
            return Err(Error::Parse {
                line: *line,
                msg: format!("more than {n} matrix rows"),
            });
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != n {
            return Err(Error::Parse {
                line: *line,
                msg: format!("matrix row has {} entries, expected {n}", tokens.len()),
            });
        }
        for (col, token) in tokens.iter().enumerate() {
            d[row * n + col] = parse_f64(token, *line)?;
        }
    }
    if body.len() < n {
        let line = body.last().map_or(header_line, |(l, _)| *l);
        return Err(Error::Parse {
            line,
            msg: format!("missing entries: found {} of {n} matrix rows", body.len()),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (d[i * n + j] - d[j * n + i]).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Parse {
                    line: body[j].0,
                    msg: format!(
                        "asymmetric entries d[{}][{}] = {} and d[{}][{}] = {}",
                        i + 1,
                        j + 1,
                        d[i * n + j],
                        j + 1,
                        i + 1,
                        d[j * n + i]
                    ),
                });
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Instance> {
        read_instance(text.as_bytes())
    }

    #[test]
    fn generate_two_elements() {
        let inst = generate(&GeneratorConfig::new(2, InstanceKind::TypeI, 7)).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.dist(0, 0), 0.0);
        assert_eq!(inst.dist(1, 1), 0.0);
        assert_eq!(inst.dist(0, 1), inst.dist(1, 0));
        assert!((-10.0..=10.0).contains(&inst.dist(0, 1)));
    }

    #[test]
    fn type_two_magnitudes() {
        let inst = generate(&GeneratorConfig::new(100, InstanceKind::TypeII, 1)).unwrap();
        for (_, _, v) in inst.pairs() {
            assert!((5.0..=10.0).contains(&v.abs()), "{v}");
        }
        let negatives = inst.pairs().filter(|&(_, _, v)| v < 0.0).count();
        let total = 100 * 99 / 2;
        // fair coin: 4950 draws, sd ~ 35
        assert!(
            (negatives as f64 - total as f64 / 2.0).abs() < 200.0,
            "{negatives}"
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig::new(50, InstanceKind::TypeI, 42);
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate(&GeneratorConfig::new(50, InstanceKind::TypeI, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn type_one_mean_near_zero() {
        let inst = generate(&GeneratorConfig::new(500, InstanceKind::TypeI, 3)).unwrap();
        let (sum, count) = inst
            .pairs()
            .fold((0.0, 0usize), |(s, c), (_, _, v)| (s + v, c + 1));
        let mean = sum / count as f64;
        assert!(mean.abs() <= 0.5, "{mean}");
        assert!(inst.pairs().all(|(_, _, v)| (-10.0..=10.0).contains(&v)));
    }

    #[test]
    fn rounding_precision() {
        let inst = generate(&GeneratorConfig::new(30, InstanceKind::TypeI, 5).decimals(1)).unwrap();
        for (_, _, v) in inst.pairs() {
            assert!(((v * 10.0).round() - v * 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn generator_rejects_bad_config() {
        assert!(matches!(
            generate(&GeneratorConfig::new(1, InstanceKind::TypeI, 0)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            generate(&GeneratorConfig::new(5, InstanceKind::TypeI, 0).decimals(10)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn parse_pair_layout() {
        let inst = parse("3\n1 2 4.0\n1 3 -2.0\n2 3 0.5\n").unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.dist(0, 1), 4.0);
        assert_eq!(inst.dist(1, 0), 4.0);
        assert_eq!(inst.dist(0, 2), -2.0);
        assert_eq!(inst.dist(2, 1), 0.5);
    }

    #[test]
    fn parse_matrix_layout() {
        let inst = parse("# full\n3\n0 4 -2\n4 0 0.5\n-2 0.5 0\n").unwrap();
        assert_eq!(inst.dist(0, 1), 4.0);
        assert_eq!(inst.dist(1, 2), 0.5);
        assert_eq!(inst.dist(2, 0), -2.0);

        let four = parse("4\n0 1 2 3\n1 0 4 5\n2 4 0 6\n3 5 6 0\n").unwrap();
        assert_eq!(four.dist(3, 2), 6.0);
    }

    #[test]
    fn missing_pair_lines() {
        let err = parse("3\n1 2 4.0\n1 3 -2.0\n").unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 3);
                assert!(msg.contains("missing"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_name_lines() {
        let cases = [
            ("three\n", 1),
            ("3\n1 2 4.0\n1 4 1.0\n2 3 0.5\n", 3),
            ("3\n1 2 4.0\n1 2 1.0\n2 3 0.5\n", 3),
            ("3\n1 2 4.0\n1 3\n2 3 0.5\n", 3),
            ("3\n1 2 x\n1 3 1\n2 3 0.5\n", 2),
            ("# c\n\n4\n0 1 2 3\n1 0 4 5\n2 4 0 6\n3 5 6.5 0\n", 7),
            ("3\n1 2 4\n1 3 1\n2 3 1\n1 2 3\n", 5),
        ];
        for (text, expected_line) in cases {
            match parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, expected_line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn round_trip_generated() {
        let inst = generate(&GeneratorConfig::new(20, InstanceKind::TypeI, 9).decimals(9)).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = read_instance(buf.as_slice()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn from_pairs_mirrors() {
        let inst = Instance::from_pairs(3, [(2, 0, 1.5), (0, 1, -1.0)], "t").unwrap();
        assert_eq!(inst.dist(0, 2), 1.5);
        assert_eq!(inst.dist(2, 0), 1.5);
        assert_eq!(inst.dist(1, 0), -1.0);
        assert_eq!(inst.dist(1, 2), 0.0);
    }
}
