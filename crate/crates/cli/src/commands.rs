use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use szlab_core::asym_coeffs::{ga, predicted_w1, w0};
use szlab_core::experiments::{
    bound_sweep, cross_growth_sweep, hs_vs_spectral_suite, jump_sweep, szego_sweep, BoundConfig, BoundTheorem,
    CrossConfig, GeometryConfig, HsSuiteConfig, JumpConfig, SweepResult, SzegoConfig,
};
use szlab_core::func_classes::{registry, seminorm_n};
use szlab_core::hs_calculus::{hs_apply, spectral_apply, QuadratureSpec, Scheme};
use szlab_core::matrix_io::{read_operator, write_operator};
use szlab_core::qa_extension::{build_extension, empirical_omega_constant, omega_profile, verify_l1_weight};
use szlab_core::wiener_hopf::symbol_registry;
use szlab_core::{Error, C64};

use crate::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(PathBuf, std::io::Error),
    Output(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Core(e) if e.is_numeric() => 2,
            CliError::Core(Error::Parse(_) | Error::UnknownLabel(_)) => 64,
            CliError::Core(Error::Io(_)) | CliError::Io(..) | CliError::Output(_) => 74,
            CliError::Core(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, text: &str) -> CliResult<()> {
        let p = self.dir.join(name);
        fs::write(&p, text).map_err(|e| CliError::Io(p, e))
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<String> {
        let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))? + "\n";
        self.write(name, &s)?;
        Ok(s)
    }

    /// Writes the fully resolved settings as a loadable TOML file, with the run
    /// parameters as a comment header.
    fn echo<T: Serialize>(&self, cli: &Cli, sub: &str, settings: &T) -> CliResult<()> {
        let c = &cli.common;
        let mut s = format!("# subcommand: {sub}\n");
        if let Some(p) = &c.config {
            let _ = writeln!(s, "# config: {}", p.display());
        }
        let _ = writeln!(s, "# seed: {}", c.seed.unwrap_or(0));
        let _ = writeln!(s, "# threads: {}", c.threads);
        let _ = writeln!(s, "# out: {}", c.out.display());
        if let Some(t) = c.tol {
            let _ = writeln!(s, "# tolerance: {t:e}");
        }
        s.push('\n');
        s += &toml::to_string(settings).map_err(|e| CliError::Output(e.to_string()))?;
        self.write("config.resolved.toml", &s)
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    if cli.common.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build_global();
    }
    if let Some(p) = &cli.common.config {
        if !p.exists() {
            return Err(CliError::Usage(format!("config file {} does not exist", p.display())));
        }
    }
    let out = Output::new(&cli.common.out)?;
    let cfg = cli.common.config.as_deref();
    match &cli.command {
        Command::HsApply(a) => hs_apply_cmd(cli, &out, a),
        Command::QaExtension(a) => qa_cmd(cli, &out, a),
        Command::BoundSweep(a) => {
            let mut c: BoundConfig = load(cfg)?;
            if let Some(t) = &a.theorem {
                c.theorem = t.parse::<BoundTheorem>().map_err(|_| CliError::Usage(format!("unknown theorem `{t}`")))?;
            }
            if let Some(n) = a.trials {
                c.trials = n;
            }
            if let Some(seed) = cli.common.seed {
                c.seed = seed;
            }
            out.echo(cli, "bound-sweep", &c)?;
            let r = bound_sweep(&c)?;
            let mut csv = String::from("instance,dim,params,value\n");
            for row in &r.rows {
                let _ = writeln!(csv, "{},{},\"{}\",{:e}", row.instance, row.dim, row.params, row.value);
            }
            out.write("bounds.csv", &csv)?;
            print!("{}", out.json("summary.json", &r.summary)?);
            Ok(())
        }
        Command::Coeffs(a) => coeffs_cmd(cli, &out, a),
        Command::Szego => {
            let c: SzegoConfig = load(cfg)?;
            out.echo(cli, "szego", &c)?;
            let r = szego_sweep(&c)?;
            write_sweep(&out, &r, c.geometry.lambda.dim)
        }
        Command::Jump => {
            let c: JumpConfig = load(cfg)?;
            out.echo(cli, "jump", &c)?;
            let r = jump_sweep(&c)?;
            write_sweep(&out, &r, c.geometry.lambda.dim)
        }
        Command::CrossGrowth => {
            let c: CrossConfig = load(cfg)?;
            out.echo(cli, "cross-growth", &c)?;
            let t = cross_growth_sweep(&c)?;
            let mut csv = String::from("alpha,points,quasi_norm_q,normalized\n");
            let mut tsv = String::from("# alpha\tnormalized\n");
            for r in &t.rows {
                let _ = writeln!(csv, "{},{},{:e},{:e}", r.alpha, r.points, r.quasi_norm_q, r.normalized);
                let _ = writeln!(tsv, "{}\t{:e}", r.alpha, r.normalized);
            }
            out.write("cross.csv", &csv)?;
            out.write("cross.tsv", &tsv)?;
            print!("{}", out.json("summary.json", &t)?);
            Ok(())
        }
        Command::HsSuite => {
            let mut c: HsSuiteConfig = load(cfg)?;
            if let Some(seed) = cli.common.seed {
                c.seed = seed;
            }
            if let Some(t) = cli.common.tol {
                for case in &mut c.cases {
                    case.tolerance = t;
                }
            }
            out.echo(cli, "hs-suite", &c)?;
            let r = hs_vs_spectral_suite(&c)?;
            let mut csv = String::from("function,matrix,deviation,error_estimate,threshold,pass\n");
            for k in &r.cases {
                let _ = writeln!(
                    csv,
                    "{},{},{:e},{:e},{:e},{}",
                    k.function, k.matrix, k.deviation, k.error_estimate, k.threshold, k.pass
                );
            }
            out.write("cases.csv", &csv)?;
            #[derive(Serialize)]
            struct Summary {
                cases: usize,
                failures: usize,
                all_pass: bool,
                max_deviation: f64,
            }
            let s = Summary {
                cases: r.cases.len(),
                failures: r.cases.iter().filter(|k| !k.pass).count(),
                all_pass: r.all_pass,
                max_deviation: r.max_deviation,
            };
            print!("{}", out.json("summary.json", &s)?);
            eprintln!("hs-suite finished in {:.1} s", r.seconds);
            Ok(())
        }
    }
}

fn write_sweep(out: &Output, r: &SweepResult, dim: usize) -> CliResult<()> {
    let norm = r.normalized(dim);
    let mut csv = String::from("alpha,trace,normalized,uncertainty\n");
    let mut tsv = String::from("# alpha\tnormalized\tfit\n");
    for (i, a) in r.alpha_values.iter().enumerate() {
        let _ = writeln!(csv, "{},{:e},{:e},{:e}", a, r.traces[i], norm[i], r.uncertainties[i]);
        let fit = r.fitted_c1 * a.ln() + r.fitted_c2;
        let _ = writeln!(tsv, "{}\t{:e}\t{:e}", a, norm[i], fit);
    }
    out.write("traces.csv", &csv)?;
    out.write("traces.tsv", &tsv)?;
    print!("{}", out.json("summary.json", r)?);
    Ok(())
}

fn hs_apply_cmd(cli: &Cli, out: &Output, a: &crate::HsApplyArgs) -> CliResult<()> {
    if !a.matrix.exists() {
        return Err(CliError::Usage(format!("matrix file {} does not exist", a.matrix.display())));
    }
    let scheme: Scheme = a.scheme.parse().map_err(|_| CliError::Usage(format!("unknown scheme `{}`", a.scheme)))?;
    let spec = QuadratureSpec {
        target_tolerance: cli.common.tol.unwrap_or(1e-7),
        scheme,
        ..Default::default()
    };
    #[derive(Serialize)]
    struct Settings<'a> {
        matrix: String,
        f: &'a str,
        order: usize,
        method: &'a str,
        quadrature: QuadratureSpec,
    }
    out.echo(
        cli,
        "hs-apply",
        &Settings {
            matrix: a.matrix.display().to_string(),
            f: &a.f,
            order: a.order,
            method: &a.method,
            quadrature: spec,
        },
    )?;
    let m = read_operator(&a.matrix)?;
    let m = szlab_core::DenseOperator::hermitian(m.into_entries())?;
    let f = registry(&a.f, a.order)?;
    match a.method.as_str() {
        "hs" => {
            let ext = build_extension(&f)?;
            let r = hs_apply(&ext, &m, &spec)?;
            write_operator(&out.dir.join("result.txt"), &r.operator)?;
            print!("{}", out.json("certificate.json", &r.certificate(&spec))?);
        }
        "spectral" => {
            let r = spectral_apply(&f, &m)?;
            write_operator(&out.dir.join("result.txt"), &r)?;
        }
        other => return Err(CliError::Usage(format!("unknown method `{other}`"))),
    }
    Ok(())
}

fn qa_cmd(cli: &Cli, out: &Output, a: &crate::QaArgs) -> CliResult<()> {
    #[derive(Serialize)]
    struct Settings<'a> {
        f: &'a str,
        order: usize,
        nx: usize,
        nv: usize,
    }
    out.echo(
        cli,
        "qa-extension",
        &Settings {
            f: &a.f,
            order: a.order,
            nx: a.nx,
            nv: a.nv,
        },
    )?;
    let f = registry(&a.f, a.order)?;
    let ext = build_extension(&f)?;
    let sn = seminorm_n(&f)?.value;
    let prof = omega_profile(&ext, sn, a.nx, a.nv);
    let mut csv = String::from("x,y,omega_abs,majorant\n");
    for s in &prof {
        let _ = writeln!(csv, "{:e},{:e},{:e},{:e}", s.x, s.y, s.omega_abs, s.majorant);
    }
    out.write("omega.csv", &csv)?;
    let l1 = verify_l1_weight(&ext)?;
    #[derive(Serialize)]
    struct Summary {
        seminorm: f64,
        omega_constant: f64,
        l1_weight: f64,
        l1_relative_change: f64,
        samples: usize,
    }
    print!(
        "{}",
        out.json(
            "summary.json",
            &Summary {
                seminorm: sn,
                omega_constant: empirical_omega_constant(&prof),
                l1_weight: l1.value,
                l1_relative_change: l1.relative_change,
                samples: prof.len(),
            },
        )?
    );
    Ok(())
}

#[derive(Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
struct Domains {
    lambda: szlab_core::wiener_hopf::DomainSpec,
    omega: szlab_core::wiener_hopf::DomainSpec,
}

impl Default for Domains {
    fn default() -> Self {
        let g = GeometryConfig::default();
        Domains {
            lambda: g.lambda,
            omega: g.omega,
        }
    }
}

fn coeffs_cmd(cli: &Cli, out: &Output, a: &crate::CoeffsArgs) -> CliResult<()> {
    if let Some(p) = &a.domains {
        if !p.exists() {
            return Err(CliError::Usage(format!("domain file {} does not exist", p.display())));
        }
    }
    let domains: Domains = load(a.domains.as_deref())?;
    #[derive(Serialize)]
    struct Settings<'a> {
        g: &'a str,
        symbol: &'a str,
        s: &'a [f64],
        mesh: usize,
        domains: &'a Domains,
    }
    out.echo(
        cli,
        "coeffs",
        &Settings {
            g: &a.g,
            symbol: &a.symbol,
            s: &a.s,
            mesh: a.mesh,
            domains: &domains,
        },
    )?;
    let g = registry(&a.g, 3)?;
    let sym = symbol_registry(&a.symbol)?;
    let w0r = w0(&sym.compose_real(&g), &domains.lambda, &domains.omega, 200)?;
    let w1r = predicted_w1(&g, &sym, &domains.lambda, &domains.omega, a.mesh)?;
    #[derive(Serialize)]
    struct Sample {
        s: f64,
        value: f64,
        error_estimate: f64,
    }
    #[derive(Serialize)]
    #[allow(non_snake_case)]
    struct Report {
        g: String,
        symbol: String,
        W0: f64,
        W0_error_estimate: f64,
        W1: f64,
        W1_error_estimate: f64,
        GA: Vec<Sample>,
    }
    let samples = a
        .s
        .iter()
        .map(|&s| {
            let r = ga(&g, C64::new(s, 0.0))?;
            Ok(Sample {
                s,
                value: r.value.re,
                error_estimate: r.quadrature_error_estimate,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let rep = Report {
        g: a.g.clone(),
        symbol: a.symbol.clone(),
        W0: w0r.value.re,
        W0_error_estimate: w0r.quadrature_error_estimate,
        W1: w1r.value.re,
        W1_error_estimate: w1r.quadrature_error_estimate,
        GA: samples,
    };
    print!("{}", out.json("coeffs.json", &rep)?);
    Ok(())
}
