use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use magspec::disk_spectrum::{disk_eigenvalues, disk_modes};
use magspec::fem::{solve, solve_extrapolated, solve_with_vectors, SolverConfig, DEFAULT_TOLERANCE};
use magspec::functionals::{BoundInputs, BoundVerdict, PhiFamily};
use magspec::geometry::{factors, DomainConfig, RadiusProfile};
use magspec::output::{self, Command, QRow, RunManifest, SweepRow, TransplantRow, VerdictRow};
use magspec::pauli::{pauli_bound_inputs, pauli_spectrum};
use magspec::perturbation::{perturbation_report, slope_validation, PerturbationProfile, SlopeMesh, DEFAULT_EPS};
use magspec::spectrum::{BoundaryCondition, MagneticSpectrum};
use magspec::transplant::{sum_bound_chain, transplant_identity, DEFAULT_N_ETA};
use magspec::{par, svg};

const SPECTRUM_COLUMNS: &str = "CSV columns: index,eigenvalue,lambda_times_A,bc,beta,provenance";

#[derive(Parser, Debug)]
#[command(
    name = "magspec",
    version,
    about = "Magnetic Laplacian and Pauli spectra on starlike domains, with geometric bound checks",
    after_help = "Every output file starts with a manifest of the run (CSV: '#' lines, JSON: \"manifest\").\n\
                  MAGSPEC_THREADS caps the worker pool. Exit codes: 0 success, 1 computation error, 2 usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Directory for CSV, JSON and plot files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write plots in this format (needs --out)
    #[arg(long, value_enum)]
    plot: Option<PlotFormat>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PlotFormat {
    Svg,
}

#[derive(Clone, Copy, Debug)]
struct MeshSpec {
    n_radial: usize,
    n_angular: usize,
}

#[derive(Args, Debug, Clone, Copy)]
struct MeshArgs {
    /// Fine mesh as RADIALxANGULAR cells
    #[arg(long, default_value = "96x192", value_parser = parse_mesh)]
    mesh: MeshSpec,
    /// Relative eigen-residual tolerance
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BcArg {
    Dirichlet,
    Neumann,
}

impl From<BcArg> for BoundaryCondition {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Dirichlet => BoundaryCondition::Dirichlet,
            BcArg::Neumann => BoundaryCondition::Neumann,
        }
    }
}

#[derive(Clone, Debug)]
struct PhiList(Vec<PhiFamily>);

#[derive(Clone, Copy, Debug)]
struct BetaRange {
    start: f64,
    end: f64,
    step: f64,
}

impl BetaRange {
    fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl std::fmt::Display for BetaRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Geometric factors G0, G1, G, area and polar moment of a domain
    #[command(after_help = "CSV columns: area,polar_moment,g0,g1,g")]
    Factors {
        /// Domain JSON: {"r0":1,"harmonics":[{"n":2,"a":0.3,"b":0}]} or {"samples":[...]}
        #[arg(long)]
        domain: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Analytic Dirichlet spectrum of the unit disk from Kummer roots
    #[command(after_help = SPECTRUM_COLUMNS)]
    Disk {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Finite-element spectrum of a domain
    #[command(after_help = SPECTRUM_COLUMNS)]
    Solve {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, value_enum, default_value = "dirichlet")]
        bc: BcArg,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Extrapolate from the mesh and its half-resolution coarsening
        #[arg(long)]
        richardson: bool,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check the geometric Phi-sum bounds against the disk for k = 1..n
    #[command(after_help = "CSV columns: phi,n,lhs,rhs,margin,holds,error_bar\n\
                            --phi all = identity,power(0.5),log,negpower(-1),negexp(1)")]
    Verify {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, value_enum, default_value = "dirichlet")]
        bc: BcArg,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Comma-separated functionals, or "all"
        #[arg(long, default_value = "all", value_parser = parse_phis)]
        phi: PhiList,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Transplant disk modes onto the domain and evaluate the energy terms
    #[command(after_help = "CSV columns: m,k,eigenvalue,q1_avg,q2_avg,q3_avg,identity_residual,denominator,predicted_sum_bound")]
    Transplant {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        /// Number of lowest disk modes
        #[arg(long, default_value_t = 2)]
        modes: usize,
        /// Rotation samples for the average
        #[arg(long, default_value_t = DEFAULT_N_ETA)]
        n_eta: usize,
        /// Also evaluate the sum-bound chain for this many eigenvalues
        #[arg(long)]
        chain: Option<usize>,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Second-order perturbation coefficients for R = 1 + eps P
    #[command(after_help = "Profile JSON: {\"p\":{\"2\":[0.5,0.0]}}\nCSV columns: n,q_n")]
    Perturb {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        /// Tabulate q_n for n = 1..q_upto
        #[arg(long, default_value_t = 20)]
        q_upto: u32,
        /// Measure the slope with finite-element solves
        #[arg(long)]
        validate: bool,
        /// Comma-separated eps values for --validate
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPS)]
        eps: Vec<f64>,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Dirichlet Pauli spectrum from the magnetic spectrum
    #[command(after_help = "CSV columns: index,eigenvalue,branch,source,shifted_normalized\n\
                            shifted_normalized = (lambda + |beta|/A) A / G")]
    Pauli {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Also check the shifted Phi-sum bounds
        #[arg(long, value_parser = parse_phis)]
        phi: Option<PhiList>,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Lowest eigenvalues over a range of flux values
    #[command(after_help = "CSV columns: beta,index,eigenvalue,lambda_times_A,dominant_mode")]
    Sweep {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_enum, default_value = "dirichlet")]
        bc: BcArg,
        /// Flux range start:end:step
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        beta: BetaRange,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Record the dominant angular mode on the outermost mesh ring
        #[arg(long)]
        track_mode: bool,
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_mesh(s: &str) -> Result<MeshSpec, String> {
    let (a, b) = s.split_once('x').ok_or("expected RADIALxANGULAR, e.g. 96x192")?;
    Ok(MeshSpec {
        n_radial: a.trim().parse().map_err(|e| format!("{e}"))?,
        n_angular: b.trim().parse().map_err(|e| format!("{e}"))?,
    })
}

fn parse_phis(s: &str) -> Result<PhiList, String> {
    if s == "all" {
        return Ok(PhiList(PhiFamily::standard()));
    }
    s.split(',')
        .map(|t| t.trim().parse::<PhiFamily>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map(PhiList)
}

fn parse_range(s: &str) -> Result<BetaRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:end:step".into());
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    let r = BetaRange {
        start: num(parts[0])?,
        end: num(parts[1])?,
        step: num(parts[2])?,
    };
    if !(r.step > 0.0) || !(r.end >= r.start) || !r.start.is_finite() || !r.end.is_finite() {
        return Err("need step > 0 and end >= start".into());
    }
    Ok(r)
}

enum Failure {
    Usage(String),
    Compute(magspec::Error),
}

impl From<magspec::Error> for Failure {
    fn from(e: magspec::Error) -> Self {
        Failure::Compute(e)
    }
}

type Run<T> = Result<T, Failure>;

type Render = Box<dyn FnOnce(&RunManifest) -> magspec::Result<String>>;

/// Files are rendered once the manifest, including the list of outputs,
/// is complete.
struct Outputs {
    dir: Option<PathBuf>,
    plot: bool,
    pending: Vec<(String, Render)>,
}

impl Outputs {
    fn new(args: &OutputArgs) -> Run<Self> {
        if args.plot.is_some() && args.out.is_none() {
            return Err(Failure::Usage("--plot needs --out".into()));
        }
        Ok(Outputs {
            dir: args.out.clone(),
            plot: args.plot.is_some(),
            pending: Vec::new(),
        })
    }

    fn csv<T: Serialize + 'static>(&mut self, name: &str, rows: Vec<T>) {
        self.pending
            .push((name.into(), Box::new(move |m: &RunManifest| output::csv_string(m, &rows))));
    }

    fn json<T: Serialize + 'static>(&mut self, name: &str, value: T) {
        self.pending
            .push((name.into(), Box::new(move |m: &RunManifest| output::json_string(m, &value))));
    }

    fn svg(&mut self, name: &str, text: String) {
        if self.plot {
            self.pending.push((name.into(), Box::new(move |_: &RunManifest| Ok(text))));
        }
    }

    fn finish(self, mut manifest: RunManifest) -> Run<()> {
        let Some(dir) = self.dir else {
            return Ok(());
        };
        manifest.outputs = self.pending.iter().map(|(n, _)| n.clone()).collect();
        for (name, render) in self.pending {
            let text = render(&manifest)?;
            output::write_text(&dir, &name, &text)?;
        }
        Ok(())
    }
}

fn read_json(path: &Path) -> Run<(String, serde_json::Value)> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    Ok((text, value))
}

fn load_domain(path: &Path, manifest: &mut RunManifest) -> Run<RadiusProfile> {
    let (text, value) = read_json(path)?;
    let profile = DomainConfig::from_json(&text)
        .and_then(|c| c.to_profile())
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    manifest.input("domain", &path.display().to_string(), value);
    Ok(profile)
}

fn solver_config(bc: BoundaryCondition, beta: f64, n: usize, mesh: &MeshArgs, manifest: &mut RunManifest) -> Run<SolverConfig> {
    let mut cfg = SolverConfig::new(bc, beta, n).with_mesh(mesh.mesh.n_radial, mesh.mesh.n_angular);
    cfg.tolerance = mesh.tol;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    manifest
        .flag("mesh", format!("{}x{}", cfg.n_radial, cfg.n_angular))
        .flag("tol", cfg.tolerance);
    Ok(cfg)
}

fn print_spectrum(s: &MagneticSpectrum, errors: Option<&[f64]>) {
    println!("# bc={} beta={} area={} provenance={}", s.bc, s.beta, s.area, s.provenance);
    println!("{:>5} {:>22} {:>22}{}", "index", "eigenvalue", "lambda_times_A", if errors.is_some() { "          error" } else { "" });
    for (i, (l, la)) in s.eigenvalues.iter().zip(&s.normalized).enumerate() {
        match errors {
            Some(e) => println!("{:>5} {:>22.15e} {:>22.15e} {:>14.3e}", i + 1, l, la, e[i]),
            None => println!("{:>5} {:>22.15e} {:>22.15e}", i + 1, l, la),
        }
    }
}

fn print_verdicts(verdicts: &[BoundVerdict]) {
    println!(
        "{:<14} {:>3} {:>20} {:>20} {:>12} {:>10} {:>6}",
        "phi", "n", "lhs", "rhs", "margin", "error_bar", "holds"
    );
    for v in verdicts {
        println!(
            "{:<14} {:>3} {:>20.12e} {:>20.12e} {:>12.4e} {:>10.2e} {:>6}",
            v.phi.to_string(),
            v.n,
            v.lhs,
            v.rhs,
            v.margin,
            v.error_bar,
            v.holds
        );
    }
}

fn spectrum_plots(out: &mut Outputs, series: &[(&str, &[f64])], title: &str) {
    out.svg("spectrum.svg", svg::spectrum_plot(series, title, "lambda A"));
    out.svg("counting.svg", svg::step_plot(series, title, "lambda A"));
}

fn verdict_table(inputs: &BoundInputs, phis: &[PhiFamily], n: usize) -> Run<Vec<BoundVerdict>> {
    let mut all = Vec::new();
    for &phi in phis {
        for k in 1..=n {
            all.push(inputs.verdict(phi, k)?);
        }
    }
    Ok(all)
}

fn run(cli: Cli) -> Run<()> {
    match cli.command {
        Cmd::Factors { domain, output } => {
            let mut m = RunManifest::new(Command::Factors);
            let mut out = Outputs::new(&output)?;
            let profile = load_domain(&domain, &mut m)?;
            let f = factors(&profile);
            println!("g0={} g1={} g={} area={}", f.g0, f.g1, f.g, f.area);
            out.csv("factors.csv", vec![f]);
            out.json("factors.json", f);
            out.svg("domain.svg", svg::domain_outline(&profile, "domain"));
            out.finish(m)
        }
        Cmd::Disk { beta, n, output } => {
            let mut m = RunManifest::new(Command::Disk);
            m.flag("beta", beta).flag("n", n);
            let mut out = Outputs::new(&output)?;
            let s = disk_eigenvalues(beta, n)?;
            print_spectrum(&s, None);
            if let Some(labels) = &s.labels {
                let text: Vec<String> = labels.iter().map(|l| format!("({},{})", l.m, l.k)).collect();
                println!("# modes (m,k): {}", text.join(" "));
            }
            out.csv("disk.csv", output::spectrum_rows(&s));
            spectrum_plots(&mut out, &[("disk", &s.normalized)], &format!("disk, beta = {beta}"));
            out.json("disk.json", s);
            out.finish(m)
        }
        Cmd::Solve {
            domain,
            beta,
            bc,
            n,
            richardson,
            mesh,
            output,
        } => {
            let mut m = RunManifest::new(Command::Solve);
            let bc = BoundaryCondition::from(bc);
            m.flag("beta", beta).flag("bc", bc).flag("n", n).flag("richardson", richardson);
            let mut out = Outputs::new(&output)?;
            let profile = load_domain(&domain, &mut m)?;
            let cfg = solver_config(bc, beta, n, &mesh, &mut m)?;
            #[derive(Serialize)]
            struct SolveResult {
                spectrum: MagneticSpectrum,
                error_bars: Option<Vec<f64>>,
            }
            let result = if richardson {
                let ex = solve_extrapolated(&profile, &cfg)?;
                SolveResult {
                    spectrum: ex.spectrum,
                    error_bars: Some(ex.error_bars),
                }
            } else {
                SolveResult {
                    spectrum: solve(&profile, &cfg)?,
                    error_bars: None,
                }
            };
            print_spectrum(&result.spectrum, result.error_bars.as_deref());
            out.csv("solve.csv", output::spectrum_rows(&result.spectrum));
            out.svg("domain.svg", svg::domain_outline(&profile, "domain"));
            spectrum_plots(&mut out, &[("domain", &result.spectrum.normalized)], &format!("{bc}, beta = {beta}"));
            out.json("solve.json", result);
            out.finish(m)
        }
        Cmd::Verify {
            domain,
            beta,
            bc,
            n,
            phi,
            mesh,
            output,
        } => {
            let mut m = RunManifest::new(Command::Verify);
            let bc = BoundaryCondition::from(bc);
            let tags: Vec<String> = phi.0.iter().map(|p| p.to_string()).collect();
            m.flag("beta", beta).flag("bc", bc).flag("n", n).flag("phi", tags.join(","));
            let mut out = Outputs::new(&output)?;
            let profile = load_domain(&domain, &mut m)?;
            let cfg = solver_config(bc, beta, n, &mesh, &mut m)?;
            let inputs = BoundInputs::compute(&profile, beta, bc, n, &cfg)?;
            let verdicts = verdict_table(&inputs, &phi.0, n)?;
            let f = inputs.factors;
            println!("# g0={} g1={} g={} area={}", f.g0, f.g1, f.g, f.area);
            print_verdicts(&verdicts);
            let sandwich = (bc == BoundaryCondition::Dirichlet).then(|| inputs.sandwich());
            if let Some(s) = &sandwich {
                println!(
                    "# sandwich 1 <= lambda1 A / (lambda1(D) pi) = {:.12} <= G = {:.12}: {}",
                    s.ratio,
                    s.g,
                    s.lower_holds && s.upper_holds
                );
            }
            let all = verdicts.iter().all(|v| v.holds);
            println!("# all holds: {all}");
            out.csv("verify.csv", verdicts.iter().map(VerdictRow::from).collect());
            out.svg("domain.svg", svg::domain_outline(&profile, "domain"));
            let scaled: Vec<f64> = inputs.domain.iter().map(|x| x / f.g).collect();
            spectrum_plots(
                &mut out,
                &[("domain lambda A / G", &scaled), ("disk lambda pi", &inputs.disk)],
                &format!("{bc}, beta = {beta}"),
            );
            #[derive(Serialize)]
            struct VerifyResult {
                inputs: BoundInputs,
                verdicts: Vec<BoundVerdict>,
                sandwich: Option<magspec::functionals::Sandwich>,
                all_hold: bool,
            }
            out.json(
                "verify.json",
                VerifyResult {
                    inputs,
                    verdicts,
                    sandwich,
                    all_hold: all,
                },
            );
            out.finish(m)
        }
        Cmd::Transplant {
            domain,
            beta,
            modes,
            n_eta,
            chain,
            mesh,
            output,
        } => {
            let mut m = RunManifest::new(Command::Transplant);
            m.flag("beta", beta).flag("modes", modes).flag("n_eta", n_eta);
            if let Some(c) = chain {
                m.flag("chain", c);
            }
            let mut out = Outputs::new(&output)?;
            let profile = load_domain(&domain, &mut m)?;
            let disk = disk_modes(beta, modes)?;
            let reports = par::map(&disk, |mode| transplant_identity(&profile, mode, n_eta))
                .into_iter()
                .collect::<magspec::Result<Vec<_>>>()?;
            println!(
                "{:>4} {:>3} {:>16} {:>16} {:>12} {:>16} {:>12}",
                "m", "k", "q1_avg", "q3_avg", "q2_avg", "sum_bound", "residual"
            );
            let rows: Vec<TransplantRow> = reports
                .iter()
                .map(|r| TransplantRow {
                    m: r.mode.m,
                    k: r.mode.k,
                    eigenvalue: r.mode.eigenvalue,
                    q1_avg: r.q1_avg,
                    q2_avg: r.q2_avg,
                    q3_avg: r.q3_avg,
                    identity_residual: r.identity_residual,
                    denominator: r.denominator,
                    predicted_sum_bound: r.predicted_sum_bound,
                })
                .collect();
            for r in &rows {
                println!(
                    "{:>4} {:>3} {:>16.10e} {:>16.10e} {:>12.3e} {:>16.10e} {:>12.3e}",
                    r.m, r.k, r.q1_avg, r.q3_avg, r.q2_avg, r.predicted_sum_bound, r.identity_residual
                );
            }
            let chain = match chain {
                Some(c) => {
                    let cfg = solver_config(BoundaryCondition::Dirichlet, beta, c, &mesh, &mut m)?;
                    let ch = sum_bound_chain(&profile, beta, c, &cfg)?;
                    println!(
                        "# chain n={}: sum lambda A = {:.10} <= {:.10} <= G * {:.10} = {:.10}: {}",
                        ch.n,
                        ch.domain_sum,
                        ch.intermediate,
                        ch.rhs,
                        ch.g * ch.rhs,
                        ch.holds()
                    );
                    Some(ch)
                }
                None => None,
            };
            out.csv("transplant.csv", rows);
            out.svg("domain.svg", svg::domain_outline(&profile, "domain"));
            #[derive(Serialize)]
            struct TransplantResult {
                reports: Vec<magspec::transplant::TransplantReport>,
                chain: Option<magspec::transplant::SumBoundChain>,
            }
            out.json("transplant.json", TransplantResult { reports, chain });
            out.finish(m)
        }
        Cmd::Perturb {
            profile,
            beta,
            q_upto,
            validate,
            eps,
            mesh,
            output,
        } => {
            let mut m = RunManifest::new(Command::Perturb);
            m.flag("beta", beta).flag("q_upto", q_upto).flag("validate", validate);
            let mut out = Outputs::new(&output)?;
            let (text, value) = read_json(&profile)?;
            let p = PerturbationProfile::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", profile.display())))?;
            m.input("profile", &profile.display().to_string(), value);
            let mut report = perturbation_report(beta, &p, q_upto)?;
            if validate {
                let list: Vec<String> = eps.iter().map(|e| e.to_string()).collect();
                m.flag("eps", list.join(","))
                    .flag("mesh", format!("{}x{}", mesh.mesh.n_radial, mesh.mesh.n_angular));
                let v = slope_validation(
                    beta,
                    &p,
                    &eps,
                    SlopeMesh {
                        n_radial: mesh.mesh.n_radial,
                        n_angular: mesh.mesh.n_angular,
                    },
                )?;
                report.measured_slope = v.measured_slope;
                report.measured_error = v.measured_error;
                report.disk_lambda_area = v.disk_lambda_area;
                report.relative_mismatch = v.relative_mismatch;
                report.samples = v.samples;
            }
            println!(
                "# beta={} lambda0={} a0={} c={} predicted_slope={}",
                report.beta, report.lambda0, report.a0, report.c, report.predicted_slope
            );
            if let (Some(s), Some(e), Some(r)) = (report.measured_slope, report.measured_error, report.relative_mismatch) {
                println!("# measured_slope={s} error_bar={e} relative_mismatch={r}");
            }
            println!("{:>5} {:>22}", "n", "q_n");
            for (n, q) in &report.q {
                println!("{n:>5} {q:>22.15e}");
            }
            let rows: Vec<QRow> = report.q.iter().map(|(&n, &q)| QRow { n, q_n: q }).collect();
            let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
            let qs: Vec<f64> = rows.iter().map(|r| r.q_n).collect();
            let asymptote: Vec<f64> = ns.iter().map(|n| n + 1.0).collect();
            out.svg(
                "q.svg",
                svg::line_plot(&ns, &[("q_n", &qs), ("n + 1", &asymptote)], &format!("beta = {beta}"), "n", "q_n"),
            );
            out.csv("perturb.csv", rows);
            out.json("perturb.json", report);
            out.finish(m)
        }
        Cmd::Pauli {
            domain,
            beta,
            n,
            phi,
            mesh,
            output,
        } => {
            let mut m = RunManifest::new(Command::Pauli);
            m.flag("beta", beta).flag("n", n);
            if let Some(p) = &phi {
                let tags: Vec<String> = p.0.iter().map(|x| x.to_string()).collect();
                m.flag("phi", tags.join(","));
            }
            let mut out = Outputs::new(&output)?;
            let profile = load_domain(&domain, &mut m)?;
            let cfg = solver_config(BoundaryCondition::Dirichlet, beta, n, &mesh, &mut m)?;
            let g = factors(&profile).g;
            let ex = solve_extrapolated(&profile, &cfg)?;
            let spectrum = pauli_spectrum(&ex.spectrum, n)?.with_g(g);
            println!("# beta={} area={} g={}", beta, spectrum.area, g);
            println!("{:>5} {:>22} {:>10} {:>6} {:>22}", "index", "eigenvalue", "branch", "source", "shifted_normalized");
            let rows = output::pauli_rows(&spectrum);
            for r in &rows {
                println!(
                    "{:>5} {:>22.15e} {:>10} {:>6} {:>22.15e}",
                    r.index,
                    r.eigenvalue,
                    r.branch.to_string(),
                    r.source,
                    r.shifted_normalized
                );
            }
            let verdicts = match &phi {
                Some(list) => {
                    let inputs = pauli_bound_inputs(&profile, beta, n, &cfg)?;
                    let v = verdict_table(&inputs, &list.0, n)?;
                    print_verdicts(&v);
                    out.csv("pauli_verify.csv", v.iter().map(VerdictRow::from).collect());
                    Some(v)
                }
                None => None,
            };
            out.csv("pauli.csv", rows);
            out.svg("domain.svg", svg::domain_outline(&profile, "domain"));
            spectrum_plots(
                &mut out,
                &[("(lambda_P + |beta|/A) A / G", &spectrum.shifted_normalized)],
                &format!("Pauli, beta = {beta}"),
            );
            #[derive(Serialize)]
            struct PauliResult {
                spectrum: magspec::pauli::PauliSpectrum,
                verdicts: Option<Vec<BoundVerdict>>,
            }
            out.json("pauli.json", PauliResult { spectrum, verdicts });
            out.finish(m)
        }
        Cmd::Sweep {
            domain,
            bc,
            beta,
            n,
            track_mode,
            mesh,
            output,
        } => {
            let mut m = RunManifest::new(Command::Sweep);
            let bc = BoundaryCondition::from(bc);
            m.flag("beta", beta).flag("bc", bc).flag("n", n).flag("track_mode", track_mode);
            let mut out = Outputs::new(&output)?;
            let profile = load_domain(&domain, &mut m)?;
            let base = solver_config(bc, 0.0, n, &mesh, &mut m)?;
            let betas = beta.values();
            let points = par::map(&betas, |&b| -> magspec::Result<Vec<SweepRow>> {
                let cfg = SolverConfig { beta: b, ..base };
                let sol = solve_with_vectors(&profile, &cfg)?;
                Ok((0..n)
                    .map(|j| SweepRow {
                        beta: b,
                        index: j + 1,
                        eigenvalue: sol.spectrum.eigenvalues[j],
                        lambda_times_a: sol.spectrum.normalized[j],
                        dominant_mode: track_mode.then(|| sol.dominant_angular_mode(j)),
                    })
                    .collect())
            });
            let rows: Vec<SweepRow> = points
                .into_iter()
                .collect::<magspec::Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            println!("{:>10} {:>5} {:>22} {:>22} {:>6}", "beta", "index", "eigenvalue", "lambda_times_A", "mode");
            for r in &rows {
                let mode = r.dominant_mode.map_or_else(|| "-".to_string(), |d| d.to_string());
                println!(
                    "{:>10} {:>5} {:>22.15e} {:>22.15e} {:>6}",
                    r.beta, r.index, r.eigenvalue, r.lambda_times_a, mode
                );
            }
            let ground: Vec<&SweepRow> = rows.iter().filter(|r| r.index == 1).collect();
            let xs: Vec<f64> = ground.iter().map(|r| r.beta).collect();
            let ys: Vec<f64> = ground.iter().map(|r| r.lambda_times_a).collect();
            out.svg("sweep.svg", svg::line_plot(&xs, &[("lambda_1 A", &ys)], &format!("{bc} sweep"), "beta", "lambda A"));
            if track_mode {
                let modes: Vec<f64> = ground.iter().map(|r| r.dominant_mode.unwrap_or(0) as f64).collect();
                out.svg("modes.svg", svg::line_plot(&xs, &[("dominant mode", &modes)], "ground state", "beta", "m"));
            }
            out.csv("sweep.csv", rows);
            out.finish(m)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let threads = match std::env::var("MAGSPEC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Some(t),
            _ => {
                eprintln!("magspec: usage error: MAGSPEC_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        },
        Err(_) => None,
    };
    match par::with_threads(threads, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("magspec: usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("magspec: error in {}: {e}", e.module());
            ExitCode::from(1)
        }
    }
}
