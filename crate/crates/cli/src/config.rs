//! Experiment configuration: flags override config-file values, which override
//! per-problem defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use nepcontour::problems::{
    self, ProblemDefaults, BUTTERFLY_DEFAULTS, DEFICIENT_A, DEFICIENT_B,
    DEFICIENT_QUADRATIC_DEFAULTS, DEFICIENT_SEED, GUN_DEFAULTS, HADELER_ALPHA, HADELER_DEFAULTS,
    HADELER_DIM,
};
use nepcontour::{c64, Contour, Execution, Linearization, Nep, SolverOptions};
use serde::Deserialize;

/// A configuration problem the user has to fix; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Butterfly,
    DeficientQuadratic,
    Hadeler,
    Gun,
    LinearDiag,
    Cosine,
}

pub const PROBLEMS: [ProblemKind; 6] = [
    ProblemKind::Butterfly,
    ProblemKind::DeficientQuadratic,
    ProblemKind::Hadeler,
    ProblemKind::Gun,
    ProblemKind::LinearDiag,
    ProblemKind::Cosine,
];

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Butterfly => "butterfly",
            ProblemKind::DeficientQuadratic => "deficient-quadratic",
            ProblemKind::Hadeler => "hadeler",
            ProblemKind::Gun => "gun",
            ProblemKind::LinearDiag => "linear-diag",
            ProblemKind::Cosine => "cosine",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ProblemKind::Butterfly => "quartic polynomial on an 8x8 grid, n = 64",
            ProblemKind::DeficientQuadratic => {
                "quadratic T0 + (z-a)(z-b)T1 with a shared eigenvector for a and b, n = 15"
            }
            ProblemKind::Hadeler => "(e^z - 1)B1 + z^2 B2 - alpha I, n = 200 by default",
            ProblemKind::Gun => "sparse RF gun cavity, n = 9956; needs --gun-data or NEPCONTOUR_DATA",
            ProblemKind::LinearDiag => "zI - diag(d) with d from --matrix",
            ProblemKind::Cosine => "scalar cos(z)",
        }
    }

    pub fn defaults(self) -> Option<ProblemDefaults> {
        match self {
            ProblemKind::Butterfly => Some(BUTTERFLY_DEFAULTS),
            ProblemKind::DeficientQuadratic => Some(DEFICIENT_QUADRATIC_DEFAULTS),
            ProblemKind::Hadeler => Some(HADELER_DEFAULTS),
            ProblemKind::Gun => Some(GUN_DEFAULTS),
            ProblemKind::LinearDiag | ProblemKind::Cosine => None,
        }
    }
}

impl FromStr for ProblemKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        PROBLEMS
            .into_iter()
            .find(|p| p.name() == s || (s == "test_deficient" && *p == ProblemKind::DeficientQuadratic))
            .ok_or_else(|| {
                let names: Vec<_> = PROBLEMS.iter().map(|p| p.name()).collect();
                usage(format!("unknown problem '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

/// Flags shared by `solve` and `sweep`. Every value is optional so that config
/// files and problem defaults can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Problem name (see `list-problems`).
    #[arg(value_name = "PROBLEM")]
    pub problem_pos: Option<String>,
    #[arg(long)]
    pub problem: Option<String>,
    /// Contour center as "re,im" or "re".
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Quadrature node count; a comma list for `sweep`.
    #[arg(long)]
    pub nodes: Option<String>,
    /// Probing subspace size m.
    #[arg(long)]
    pub subspace: Option<usize>,
    /// Number of moment pairs K.
    #[arg(long)]
    pub moments: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Refinement passes after the first pass.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// qr or svd.
    #[arg(long)]
    pub linearization: Option<String>,
    /// on or off.
    #[arg(long)]
    pub cache_factorizations: Option<String>,
    /// Worker threads for node-level parallelism (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Directory holding the gun matrices K.mtx, M.mtx, W1.mtx, W2.mtx.
    #[arg(long)]
    pub gun_data: Option<PathBuf>,
    /// TOML file with any of these settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Diagonal entries for linear-diag, comma separated ("0.1,0.9,3.0", "1+2i,...").
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// Hadeler dimension.
    #[arg(long)]
    pub size: Option<usize>,
    /// Hadeler alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Shared roots of the deficient quadratic as "a,b".
    #[arg(long, allow_hyphen_values = true)]
    pub roots: Option<String>,
    /// Seed for randomly generated problem coefficients.
    #[arg(long)]
    pub problem_seed: Option<u64>,
}

/// Config-file mirror of [`RunArgs`].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub problem: Option<String>,
    pub center: Option<String>,
    pub radius: Option<f64>,
    pub nodes: Option<NodesValue>,
    pub subspace: Option<usize>,
    pub moments: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub linearization: Option<String>,
    pub cache_factorizations: Option<String>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub gun_data: Option<PathBuf>,
    pub matrix: Option<String>,
    pub size: Option<usize>,
    pub alpha: Option<f64>,
    pub roots: Option<String>,
    pub problem_seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NodesValue {
    One(usize),
    List(Vec<usize>),
    Text(String),
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).map_err(|e| usage(format!("invalid config file {}: {e}", path.display())))
    }
}

/// Fully resolved, validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub contour: Contour,
    pub nodes: Vec<usize>,
    pub opts: SolverOptions,
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
    pub gun_data: Option<PathBuf>,
    pub diag: Vec<c64>,
    pub size: usize,
    pub alpha: f64,
    pub roots: (f64, f64),
    pub problem_seed: u64,
}

fn parse_complex(s: &str) -> anyhow::Result<c64> {
    let s = s.trim();
    if let Some((re, im)) = s.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|_| usage(format!("invalid number '{re}'")))?;
        let im: f64 = im.trim().parse().map_err(|_| usage(format!("invalid number '{im}'")))?;
        return Ok(c64::new(re, im));
    }
    num_complex::Complex::<f64>::from_str(s).map_err(|_| usage(format!("invalid complex number '{s}'")))
}

fn parse_nodes(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| usage(format!("invalid node count '{t}'")))
        })
        .collect()
}

fn parse_switch(s: &str) -> anyhow::Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(usage(format!("expected 'on' or 'off', got '{other}'"))),
    }
}

fn finite(name: &str, v: f64) -> anyhow::Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("{name} must be finite")))
    }
}

impl ExperimentConfig {
    /// Merges flags, the optional config file and problem defaults, and checks
    /// every numeric range before any work is done.
    pub fn resolve(args: &RunArgs, sweep: bool) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        if let (Some(a), Some(b)) = (&args.problem_pos, &args.problem) {
            if a != b {
                return Err(usage(format!("problem given twice: '{a}' and '{b}'")));
            }
        }
        let problem: ProblemKind = args
            .problem
            .clone()
            .or_else(|| args.problem_pos.clone())
            .or(file.problem.clone())
            .ok_or_else(|| usage("no problem given; pass --problem NAME (see list-problems)"))?
            .parse()?;
        let defaults = problem.defaults();

        let center = match args.center.as_deref().or(file.center.as_deref()) {
            Some(s) => parse_complex(s)?,
            None => defaults.map_or(c64::new(0.0, 0.0), |d| d.center),
        };
        let radius = args
            .radius
            .or(file.radius)
            .or(defaults.map(|d| d.radius))
            .ok_or_else(|| usage(format!("--radius is required for problem '{}'", problem.name())))?;
        let contour = Contour::new(center, radius).map_err(|e| usage(e.to_string()))?;

        let nodes = match (&args.nodes, &file.nodes) {
            (Some(s), _) => parse_nodes(s)?,
            (None, Some(NodesValue::One(n))) => vec![*n],
            (None, Some(NodesValue::List(v))) => v.clone(),
            (None, Some(NodesValue::Text(s))) => parse_nodes(s)?,
            (None, None) => vec![defaults.map_or(32, |d| d.nodes)],
        };
        if nodes.is_empty() {
            return Err(usage("node list is empty"));
        }
        if !sweep && nodes.len() != 1 {
            return Err(usage("solve takes a single --nodes value; use sweep for a list"));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("node list must be strictly ascending"));
        }

        let linearization = match args.linearization.as_deref().or(file.linearization.as_deref()) {
            Some(s) => s.parse::<Linearization>().map_err(|e| usage(e.to_string()))?,
            None => Linearization::Svd,
        };
        let cache = match args
            .cache_factorizations
            .as_deref()
            .or(file.cache_factorizations.as_deref())
        {
            Some(s) => parse_switch(s)?,
            None => true,
        };
        let base = SolverOptions::default();
        let opts = SolverOptions {
            subspace: args
                .subspace
                .or(file.subspace)
                .or(defaults.map(|d| d.subspace))
                .unwrap_or(base.subspace),
            nodes: nodes[0],
            moments: args
                .moments
                .or(file.moments)
                .or(defaults.map(|d| d.moments))
                .unwrap_or(1),
            max_iterations: args.max_iter.or(file.max_iter).unwrap_or(base.max_iterations),
            tolerance: finite("--tol", args.tol.or(file.tol).unwrap_or(base.tolerance))?,
            seed: args.seed.or(file.seed).unwrap_or(0),
            linearization,
            svd_filter_tol: base.svd_filter_tol,
            cache_factorizations: cache,
            execution: Execution::Parallel,
        };

        let workers = args.workers.or(file.workers);
        if workers == Some(0) {
            return Err(usage("--workers must be at least 1"));
        }

        let diag = match args.matrix.as_deref().or(file.matrix.as_deref()) {
            Some(s) => s
                .split(',')
                .map(parse_complex)
                .collect::<anyhow::Result<Vec<_>>>()?,
            None if problem == ProblemKind::LinearDiag => {
                return Err(usage("linear-diag needs --matrix with the diagonal entries"))
            }
            None => Vec::new(),
        };
        if problem == ProblemKind::LinearDiag && diag.is_empty() {
            return Err(usage("--matrix is empty"));
        }
        let roots = match args.roots.as_deref().or(file.roots.as_deref()) {
            Some(s) => {
                let z = parse_complex(s)?;
                (finite("root a", z.re)?, finite("root b", z.im)?)
            }
            None => (DEFICIENT_A, DEFICIENT_B),
        };
        if roots.0 == roots.1 {
            return Err(usage("--roots must be two distinct values"));
        }
        let size = args.size.or(file.size).unwrap_or(HADELER_DIM);
        if size < 2 {
            return Err(usage("--size must be at least 2"));
        }
        let alpha = finite("--alpha", args.alpha.or(file.alpha).unwrap_or(HADELER_ALPHA))?;

        let gun_data = args
            .gun_data
            .clone()
            .or(file.gun_data.clone())
            .or_else(|| std::env::var_os("NEPCONTOUR_DATA").map(PathBuf::from));

        let mut config = ExperimentConfig {
            problem,
            contour,
            nodes,
            opts,
            workers,
            output_dir: args
                .output_dir
                .clone()
                .or(file.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("nepcontour-out")),
            gun_data,
            diag,
            size,
            alpha,
            roots,
            problem_seed: args.problem_seed.or(file.problem_seed).unwrap_or(DEFICIENT_SEED),
        };
        if args.subspace.or(file.subspace).is_none() && defaults.is_none() {
            config.opts.subspace = config.opts.subspace.min(config.dim());
        }
        config.validate()?;
        Ok(config)
    }

    fn dim(&self) -> usize {
        match self.problem {
            ProblemKind::Butterfly => 64,
            ProblemKind::DeficientQuadratic => problems::DEFICIENT_DIM,
            ProblemKind::Hadeler => self.size,
            ProblemKind::Gun => problems::GUN_DIM,
            ProblemKind::LinearDiag => self.diag.len(),
            ProblemKind::Cosine => 1,
        }
    }

    fn validate(&self) -> anyhow::Result<()> {
        let dim = self.dim();
        for &n in &self.nodes {
            SolverOptions { nodes: n, ..self.opts.clone() }
                .validate(dim)
                .map_err(|e| usage(e.to_string()))?;
        }
        Ok(())
    }

    /// Directory with the gun matrices, accepting either the directory itself
    /// or a parent holding a `gun/` subdirectory.
    fn gun_dir(&self) -> anyhow::Result<PathBuf> {
        let base = self.gun_data.clone().ok_or_else(|| {
            usage("the gun problem needs --gun-data DIR or NEPCONTOUR_DATA (see README for the data files)")
        })?;
        for dir in [base.clone(), base.join("gun")] {
            if problems::gun_data_present(&dir) {
                return Ok(dir);
            }
        }
        bail!(
            "no gun data in {}: expected {}",
            base.display(),
            problems::GUN_FILES.join(", ")
        )
    }

    pub fn build_problem(&self) -> anyhow::Result<Box<dyn Nep>> {
        Ok(match self.problem {
            ProblemKind::Butterfly => Box::new(problems::make_butterfly()),
            ProblemKind::DeficientQuadratic => Box::new(problems::make_deficient_quadratic(
                self.roots.0,
                self.roots.1,
                self.problem_seed,
            )?),
            ProblemKind::Hadeler => Box::new(problems::make_hadeler(self.size, self.alpha)?),
            ProblemKind::Gun => {
                let dir = self.gun_dir()?;
                Box::new(problems::make_gun_from_dir(&dir).map_err(|e| anyhow!(e))?)
            }
            ProblemKind::LinearDiag => Box::new(problems::make_linear_diag(&self.diag)?),
            ProblemKind::Cosine => Box::new(problems::make_cosine()),
        })
    }

    /// Key/value pairs describing the run, for file headers.
    pub fn describe(&self) -> Vec<(String, String)> {
        let c = self.contour.center();
        let mut out = vec![
            ("problem".to_string(), self.problem.name().to_string()),
            ("center".to_string(), format!("{},{}", c.re, c.im)),
            ("radius".to_string(), self.contour.radius().to_string()),
            (
                "nodes".to_string(),
                self.nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("subspace".to_string(), self.opts.subspace.to_string()),
            ("moments".to_string(), self.opts.moments.to_string()),
            ("tol".to_string(), format!("{:e}", self.opts.tolerance)),
            ("max-iter".to_string(), self.opts.max_iterations.to_string()),
            ("seed".to_string(), self.opts.seed.to_string()),
            (
                "linearization".to_string(),
                match self.opts.linearization {
                    Linearization::Qr => "qr",
                    Linearization::Svd => "svd",
                }
                .to_string(),
            ),
            (
                "cache-factorizations".to_string(),
                if self.opts.cache_factorizations { "on" } else { "off" }.to_string(),
            ),
        ];
        match self.problem {
            ProblemKind::DeficientQuadratic => {
                out.push(("roots".into(), format!("{},{}", self.roots.0, self.roots.1)));
                out.push(("problem-seed".into(), self.problem_seed.to_string()));
            }
            ProblemKind::Hadeler => {
                out.push(("size".into(), self.size.to_string()));
                out.push(("alpha".into(), self.alpha.to_string()));
            }
            ProblemKind::LinearDiag => {
                let d: Vec<String> = self.diag.iter().map(|z| format!("{z}")).collect();
                out.push(("matrix".into(), d.join(",")));
            }
            _ => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(problem: &str) -> RunArgs {
        RunArgs {
            problem: Some(problem.into()),
            ..Default::default()
        }
    }

    #[test]
    fn gallery_defaults_fill_everything() {
        let cfg = ExperimentConfig::resolve(&args("butterfly"), false).unwrap();
        assert_eq!(cfg.contour.center(), c64::new(1.0, 1.0));
        assert_eq!(cfg.contour.radius(), 0.5);
        assert_eq!(cfg.opts.subspace, 30);
        assert_eq!(cfg.nodes, vec![16]);
        let cfg = ExperimentConfig::resolve(&args("deficient-quadratic"), false).unwrap();
        assert_eq!(cfg.opts.moments, 2);
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "problem = \"hadeler\"\nradius = 5.0\nsubspace = 10\nnodes = [8, 16]\n").unwrap();
        let a = RunArgs {
            config: Some(path),
            subspace: Some(12),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(&a, true).unwrap();
        assert_eq!(cfg.problem, ProblemKind::Hadeler);
        assert_eq!(cfg.contour.radius(), 5.0);
        assert_eq!(cfg.opts.subspace, 12);
        assert_eq!(cfg.nodes, vec![8, 16]);
        assert_eq!(cfg.contour.center(), c64::new(-30.0, 0.0));
    }

    #[test]
    fn usage_errors() {
        let is_usage = |r: anyhow::Result<ExperimentConfig>| r.unwrap_err().downcast_ref::<UsageError>().is_some();
        let mut a = args("linear-diag");
        a.matrix = Some("0.1,0.9,3.0".into());
        assert!(is_usage(ExperimentConfig::resolve(&a, false)));
        a.radius = Some(1.0);
        assert!(ExperimentConfig::resolve(&a, false).is_ok());
        a.radius = Some(-1.0);
        assert!(is_usage(ExperimentConfig::resolve(&a, false)));
        assert!(is_usage(ExperimentConfig::resolve(&args("nope"), false)));
        let mut b = args("butterfly");
        b.nodes = Some("16,8".into());
        assert!(is_usage(ExperimentConfig::resolve(&b, true)));
        b.nodes = Some("8,16".into());
        assert!(is_usage(ExperimentConfig::resolve(&b, false)));
        b.nodes = Some("1".into());
        assert!(is_usage(ExperimentConfig::resolve(&b, false)));
        let mut c = args("butterfly");
        c.linearization = Some("lu".into());
        assert!(is_usage(ExperimentConfig::resolve(&c, false)));
        c.linearization = None;
        c.subspace = Some(65);
        assert!(is_usage(ExperimentConfig::resolve(&c, false)));
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1,1").unwrap(), c64::new(1.0, 1.0));
        assert_eq!(parse_complex("-30").unwrap(), c64::new(-30.0, 0.0));
        assert_eq!(parse_complex("1+2i").unwrap(), c64::new(1.0, 2.0));
        assert!(parse_complex("x").is_err());
    }
}
