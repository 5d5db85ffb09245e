//! Run configuration: flags, an optional JSON file, and defaults, merged with
//! flags taking precedence.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use qgsw_core::{Pinned, Sign};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides the output directory unless `--out`
/// is given.
pub const OUT_DIR_ENV: &str = "QGSW_VSTATES_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Discriminants and eigenvalue pairs over (λ, b, n).
    Spectrum,
    /// Bifurcation data at Ω_m^±: kernels, transversality, harmonics.
    Eigen,
    /// Trace the bifurcating branches.
    Branch,
    /// Built-in numerical self-checks.
    Verify,
    /// Euler and small-b limits of the spectrum.
    Limits,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Eigen => "eigen",
            Command::Branch => "branch",
            Command::Verify => "verify",
            Command::Limits => "limits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignChoice {
    Minus,
    Plus,
    Both,
}

impl SignChoice {
    pub fn signs(self) -> Vec<Sign> {
        match self {
            SignChoice::Minus => vec![Sign::Minus],
            SignChoice::Plus => vec![Sign::Plus],
            SignChoice::Both => Sign::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PinChoice {
    /// The interface carrying the larger kernel component.
    Auto,
    Outer,
    Inner,
}

impl PinChoice {
    pub fn pinned(self) -> Option<Pinned> {
        match self {
            PinChoice::Auto => None,
            PinChoice::Outer => Some(Pinned::Outer),
            PinChoice::Inner => Some(Pinned::Inner),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// `count` evenly spaced values from `start` to `end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRange {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl RealRange {
    pub fn single(value: f64) -> Self {
        RealRange { start: value, end: value, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            c => (0..c)
                .map(|i| {
                    if i + 1 == c {
                        self.end
                    } else {
                        self.start + (self.end - self.start) * i as f64 / (c - 1) as f64
                    }
                })
                .collect(),
        }
    }

    /// `"x"` or `"start:end:count"`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let real = |s: &str| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
        match parts.as_slice() {
            [x] => Ok(RealRange::single(real(x)?)),
            [a, b, c] => {
                let count = c.parse::<usize>().map_err(|_| format!("`{c}` is not a count"))?;
                Ok(RealRange { start: real(a)?, end: real(b)?, count })
            }
            _ => Err(format!("`{text}` is neither a number nor start:end:count")),
        }
    }
}

impl fmt::Display for RealRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}:{}:{}", self.start, self.end, self.count)
        }
    }
}

/// An endpoint of an [`IndexRange`]: a fixed index or an offset from the
/// threshold `N` of the current `(λ, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Absolute(i64),
    Threshold(i64),
}

impl Endpoint {
    fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix('N') {
            let rest = rest.trim();
            if rest.is_empty() {
                return Ok(Endpoint::Threshold(0));
            }
            let (sign, digits) = match rest.split_at(1) {
                ("+", d) => (1, d),
                ("-", d) => (-1, d),
                _ => return Err(format!("`{text}` is not of the form N, N+k or N-k")),
            };
            let k = digits.trim().parse::<i64>().map_err(|_| format!("`{text}` has a bad offset"))?;
            Ok(Endpoint::Threshold(sign * k))
        } else {
            t.parse::<i64>().map(Endpoint::Absolute).map_err(|_| format!("`{text}` is not an index"))
        }
    }

    fn resolve(self, threshold: Option<u32>) -> Option<i64> {
        match self {
            Endpoint::Absolute(k) => Some(k),
            Endpoint::Threshold(k) => threshold.map(|n| i64::from(n) + k),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Endpoint::Absolute(k) => write!(f, "{k}"),
            Endpoint::Threshold(0) => f.write_str("N"),
            Endpoint::Threshold(k) if k > 0 => write!(f, "N+{k}"),
            Endpoint::Threshold(k) => write!(f, "N-{}", -k),
        }
    }
}

/// Inclusive index range such as `3..12`, `N..N+10` or `N+2`. A range whose
/// end precedes its start is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub start: Endpoint,
    pub end: Endpoint,
}

impl IndexRange {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text.split_once("..") {
            Some((a, b)) => Ok(IndexRange { start: Endpoint::parse(a)?, end: Endpoint::parse(b)? }),
            None => {
                let e = Endpoint::parse(text)?;
                Ok(IndexRange { start: e, end: e })
            }
        }
    }

    pub fn needs_threshold(&self) -> bool {
        matches!(self.start, Endpoint::Threshold(_)) || matches!(self.end, Endpoint::Threshold(_))
    }

    /// Concrete indices given the threshold `N` (needed only for relative
    /// endpoints). Every index must be at least 1.
    pub fn resolve(&self, threshold: Option<u32>) -> Result<Vec<u32>, String> {
        let missing = || format!("range {self} is relative to N but no threshold is available");
        let a = self.start.resolve(threshold).ok_or_else(missing)?;
        let b = self.end.resolve(threshold).ok_or_else(missing)?;
        if b < a {
            return Ok(Vec::new());
        }
        if a < 1 {
            return Err(format!("range {self} starts at {a}; indices must be at least 1"));
        }
        (a..=b)
            .map(|k| u32::try_from(k).map_err(|_| format!("index {k} is too large")))
            .collect()
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

#[derive(Debug, Parser, Default)]
#[command(name = "qgsw-vstates", version, about = "Spectrum, branches and checks for doubly-connected QGSW V-states")]
pub struct Args {
    /// What to run; may instead come from the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// λ values: a number or start:end:count.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// b values in (0, 1): a number or start:end:count.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<String>,
    /// Mode range for `spectrum`, e.g. 3..12 or N..N+10.
    #[arg(long)]
    pub n: Option<String>,
    /// Fold range for `eigen` and `branch`, e.g. N+2 or 4..8.
    #[arg(long)]
    pub m: Option<String>,
    /// Window of the threshold search.
    #[arg(long)]
    pub window: Option<u32>,
    /// Number of quadrature nodes P.
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// m-fold modes per interface in the branch solver.
    #[arg(long)]
    pub trunc: Option<usize>,
    /// Largest branch amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    /// Branch points per trace.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub sign: Option<SignChoice>,
    /// Interface whose leading coefficient is the amplitude.
    #[arg(long, value_enum)]
    pub pin: Option<PinChoice>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Newton residual tolerance.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Flip the inner-interface orientation inside `verify`.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// A real range as it may appear in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RealSpec {
    Number(f64),
    Text(String),
    Full { start: f64, end: f64, count: usize },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    lambda: Option<RealSpec>,
    b: Option<RealSpec>,
    n: Option<String>,
    m: Option<String>,
    window: Option<u32>,
    grid_size: Option<usize>,
    trunc: Option<usize>,
    s_max: Option<f64>,
    steps: Option<usize>,
    sign: Option<SignChoice>,
    pin: Option<PinChoice>,
    out: Option<PathBuf>,
    format: Option<Format>,
    jobs: Option<usize>,
    tol: Option<f64>,
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Flag,
    Config { path: PathBuf, line: Option<usize> },
    Env,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag => f.write_str("command line"),
            Origin::Config { path, line: Some(l) } => write!(f, "{} line {l}", path.display()),
            Origin::Config { path, line: None } => write!(f, "{}", path.display()),
            Origin::Env => write!(f, "environment {OUT_DIR_ENV}"),
            Origin::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub origin: Origin,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}` ({}): {}", self.field, self.origin, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub lambda: RealRange,
    pub b: RealRange,
    pub n: IndexRange,
    pub m: IndexRange,
    pub window: u32,
    pub grid_size: usize,
    pub trunc: usize,
    pub s_max: f64,
    pub steps: usize,
    pub sign: SignChoice,
    pub pin: PinChoice,
    pub out: PathBuf,
    pub format: Format,
    pub jobs: usize,
    pub tol: f64,
    pub inject_fault: bool,
}

/// The parts of [`RunConfig`] that determine the results, echoed into every
/// summary. Output location and thread count are left out so that they do not
/// change the output bytes.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub command: Command,
    pub lambda: String,
    pub b: String,
    pub n: String,
    pub m: String,
    pub window: u32,
    pub grid_size: usize,
    pub trunc: usize,
    pub s_max: f64,
    pub steps: usize,
    pub sign: SignChoice,
    pub pin: PinChoice,
    pub format: Format,
    pub tol: f64,
}

impl RunConfig {
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            command: self.command,
            lambda: self.lambda.to_string(),
            b: self.b.to_string(),
            n: self.n.to_string(),
            m: self.m.to_string(),
            window: self.window,
            grid_size: self.grid_size,
            trunc: self.trunc,
            s_max: self.s_max,
            steps: self.steps,
            sign: self.sign,
            pin: self.pin,
            format: self.format,
            tol: self.tol,
        }
    }
}

fn default_m(command: Command) -> &'static str {
    match command {
        Command::Eigen => "N+1..N+10",
        _ => "N+2",
    }
}

/// Line of the first occurrence of `"key"` in the config text.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}

struct Merger<'a> {
    path: Option<&'a Path>,
    text: String,
}

impl Merger<'_> {
    fn origin(&self, from_flag: bool, from_file: bool, key: &str) -> Origin {
        if from_flag {
            Origin::Flag
        } else if from_file {
            Origin::Config { path: self.path.unwrap_or(Path::new("")).to_path_buf(), line: key_line(&self.text, key) }
        } else {
            Origin::Default
        }
    }

    fn pick<T>(&self, key: &str, flag: Option<T>, file: Option<T>, default: T) -> (T, Origin) {
        let origin = self.origin(flag.is_some(), file.is_some(), key);
        (flag.or(file).unwrap_or(default), origin)
    }
}

fn error(field: &str, origin: Origin, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), origin, message: message.into() }
}

fn real_range(spec: RealSpec) -> Result<RealRange, String> {
    match spec {
        RealSpec::Number(x) => Ok(RealRange::single(x)),
        RealSpec::Text(t) => RealRange::parse(&t),
        RealSpec::Full { start, end, count } => Ok(RealRange { start, end, count }),
    }
}

/// Merges flags, the config file named by `--config`, the output-directory
/// environment override and defaults, then validates the result.
pub fn resolve(args: &Args) -> Result<RunConfig, ConfigError> {
    resolve_with_env(args, std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

/// [`resolve`] with the environment override passed in explicitly.
pub fn resolve_with_env(args: &Args, env_out: Option<PathBuf>) -> Result<RunConfig, ConfigError> {
    let (file, text) = match &args.config {
        Some(path) => {
            let origin = Origin::Config { path: path.clone(), line: None };
            let text = std::fs::read_to_string(path)
                .map_err(|e| error("config", origin.clone(), format!("cannot read file: {e}")))?;
            let file: FileConfig = serde_json::from_str(&text).map_err(|e| {
                let origin = Origin::Config { path: path.clone(), line: Some(e.line()) };
                error("config", origin, e.to_string())
            })?;
            (file, text)
        }
        None => (FileConfig::default(), String::new()),
    };
    let merger = Merger { path: args.config.as_deref(), text };

    let command = args.command.or(file.command).ok_or_else(|| {
        error("command", Origin::Default, "no command given (spectrum, eigen, branch, verify or limits)")
    })?;

    let real = |key: &str, flag: &Option<String>, spec: Option<RealSpec>, default: f64| {
        let origin = merger.origin(flag.is_some(), spec.is_some(), key);
        let parsed = match (flag, spec) {
            (Some(t), _) => RealRange::parse(t),
            (None, Some(s)) => real_range(s),
            (None, None) => Ok(RealRange::single(default)),
        };
        parsed.map(|r| (r, origin.clone())).map_err(|m| error(key, origin, m))
    };
    let (lambda, lambda_origin) = real("lambda", &args.lambda, file.lambda, 1.0)?;
    let (b, b_origin) = real("b", &args.b, file.b, 0.5)?;

    let index = |key: &str, flag: &Option<String>, text: Option<String>, default: &str| {
        let origin = merger.origin(flag.is_some(), text.is_some(), key);
        let source = flag.clone().or(text).unwrap_or_else(|| default.to_string());
        IndexRange::parse(&source).map_err(|m| error(key, origin, m))
    };
    let n = index("n", &args.n, file.n, "N..N+10")?;
    let m = index("m", &args.m, file.m, default_m(command))?;

    let (window, window_origin) = merger.pick("window", args.window, file.window, 50);
    let (grid_size, grid_origin) = merger.pick("grid_size", args.grid_size, file.grid_size, 256);
    let (trunc, trunc_origin) = merger.pick("trunc", args.trunc, file.trunc, 16);
    let (s_max, s_max_origin) = merger.pick("s_max", args.s_max, file.s_max, 5e-3);
    let (steps, steps_origin) = merger.pick("steps", args.steps, file.steps, 8);
    let (sign, _) = merger.pick("sign", args.sign, file.sign, SignChoice::Both);
    let (pin, _) = merger.pick("pin", args.pin, file.pin, PinChoice::Auto);
    let (format, _) = merger.pick("format", args.format, file.format, Format::Csv);
    let default_jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let (jobs, jobs_origin) = merger.pick("jobs", args.jobs, file.jobs, default_jobs);
    let (tol, tol_origin) = merger.pick("tol", args.tol, file.tol, 1e-10);
    let out = match (&args.out, env_out, file.out) {
        (Some(p), _, _) => p.clone(),
        (None, Some(p), _) => p,
        (None, None, Some(p)) => p,
        (None, None, None) => PathBuf::from("."),
    };

    let lambdas = lambda.values();
    if lambdas.is_empty() {
        return Err(error("lambda", lambda_origin, "the λ grid is empty"));
    }
    if let Some(x) = lambdas.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(error("lambda", lambda_origin, format!("λ = {x} must be positive and finite")));
    }
    let bs = b.values();
    if bs.is_empty() {
        return Err(error("b", b_origin, "the b grid is empty"));
    }
    if let Some(x) = bs.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(error("b", b_origin, format!("b = {x} must lie strictly inside (0, 1)")));
    }
    if window < 10 {
        return Err(error("window", window_origin, format!("window must be at least 10 (got {window})")));
    }
    if grid_size < 8 || grid_size % 2 != 0 {
        return Err(error("grid_size", grid_origin, format!("grid size must be even and at least 8 (got {grid_size})")));
    }
    if trunc < 1 {
        return Err(error("trunc", trunc_origin, "truncation must be at least 1"));
    }
    if !(s_max.is_finite() && s_max > 0.0) {
        return Err(error("s_max", s_max_origin, format!("amplitude must be positive (got {s_max})")));
    }
    if steps < 1 {
        return Err(error("steps", steps_origin, "need at least one step"));
    }
    if jobs < 1 {
        return Err(error("jobs", jobs_origin, "need at least one worker"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(error("tol", tol_origin, format!("tolerance must be positive (got {tol})")));
    }

    Ok(RunConfig {
        command,
        lambda,
        b,
        n,
        m,
        window,
        grid_size,
        trunc,
        s_max,
        steps,
        sign,
        pin,
        out,
        format,
        jobs,
        tol,
        inject_fault: args.inject_fault,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_ranges() {
        assert_eq!(RealRange::parse("1.5").unwrap().values(), vec![1.5]);
        let r = RealRange::parse("0.5:2:4").unwrap();
        assert_eq!(r.values(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(r.to_string(), "0.5:2:4");
        assert!(RealRange::parse("a").is_err());
        assert!(RealRange::parse("1:2").is_err());
    }

    #[test]
    fn index_ranges() {
        let r = IndexRange::parse("N..N+10").unwrap();
        assert!(r.needs_threshold());
        assert_eq!(r.resolve(Some(3)).unwrap(), (3..=13).collect::<Vec<_>>());
        assert_eq!(r.to_string(), "N..N+10");
        assert_eq!(IndexRange::parse("N+2").unwrap().resolve(Some(3)).unwrap(), vec![5]);
        assert_eq!(IndexRange::parse("4..7").unwrap().resolve(None).unwrap(), vec![4, 5, 6, 7]);
        assert!(IndexRange::parse("7..4").unwrap().resolve(None).unwrap().is_empty());
        assert!(IndexRange::parse("N-5").unwrap().resolve(Some(3)).is_err());
        assert!(IndexRange::parse("N..5").unwrap().resolve(None).is_err());
        assert!(IndexRange::parse("M+1").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("qgsw-config-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, "{\n  \"command\": \"spectrum\",\n  \"b\": 0.3,\n  \"window\": 20\n}\n").unwrap();
        let args = Args { config: Some(path.clone()), window: Some(30), ..Args::default() };
        let config = resolve_with_env(&args, None).unwrap();
        assert_eq!(config.command, Command::Spectrum);
        assert_eq!(config.b, RealRange::single(0.3));
        assert_eq!(config.window, 30);

        std::fs::write(&path, "{\n  \"command\": \"spectrum\",\n  \"b\": 1.0\n}\n").unwrap();
        let err = resolve_with_env(&Args { config: Some(path.clone()), ..Args::default() }, None).unwrap_err();
        assert_eq!(err.field, "b");
        assert_eq!(err.origin, Origin::Config { path: path.clone(), line: Some(3) });
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn output_directory_precedence() {
        let env = Some(PathBuf::from("/env"));
        let args = Args { command: Some(Command::Verify), ..Args::default() };
        assert_eq!(resolve_with_env(&args, env.clone()).unwrap().out, PathBuf::from("/env"));
        let args = Args { out: Some(PathBuf::from("/flag")), ..args };
        assert_eq!(resolve_with_env(&args, env).unwrap().out, PathBuf::from("/flag"));
    }

    #[test]
    fn domain_guards() {
        let args = Args { command: Some(Command::Spectrum), b: Some("1".into()), ..Args::default() };
        let err = resolve_with_env(&args, None).unwrap_err();
        assert_eq!((err.field.as_str(), err.origin), ("b", Origin::Flag));
        let args = Args { command: Some(Command::Spectrum), lambda: Some("-1".into()), ..Args::default() };
        assert_eq!(resolve_with_env(&args, None).unwrap_err().field, "lambda");
        assert_eq!(resolve_with_env(&Args::default(), None).unwrap_err().field, "command");
    }
}
