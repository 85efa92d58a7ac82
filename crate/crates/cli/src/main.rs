use std::fmt::Display;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use jespace::dynamics::{self, check_trajectory_bounds, kinetic_check, InitialConditions};
use jespace::effective::{self, Bracket};
use jespace::oracles::{check_case, LawCase};
use jespace::scanio::{self, Axis};
use jespace::space::{self, full_plane, ur_curve, Classification, ClassifyOptions, Membership};
use jespace::JEState;

mod lawspec;

use lawspec::LawSpec;

const EXIT_MEMBER: u8 = 0;
const EXIT_NON_MEMBER: u8 = 1;
const EXIT_BOUNDARY: u8 = 2;
const EXIT_ERROR: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "jespace", version, about = "Angular momentum-energy states of central-force motion")]
struct Cli {
    /// Print every default and tolerance, then exit.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    /// Radius bracket `lo:hi` for the extremum search.
    #[arg(long, value_parser = parse_bracket)]
    bracket: Option<Bracket>,
    /// Number of log-spaced grid points in the bracket.
    #[arg(long)]
    grid: Option<usize>,
}

impl SearchArgs {
    fn options(&self, law: &jespace::ForceLaw) -> Result<ClassifyOptions, String> {
        let mut opts = ClassifyOptions::for_law(law);
        if let Some(b) = self.bracket {
            opts.search.bracket = b;
        }
        if let Some(n) = self.grid {
            opts.search.n_grid = n;
        }
        opts.search.validate().map_err(|e| e.to_string())?;
        Ok(opts)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    #[value(name = "V")]
    V,
    #[value(name = "W")]
    W,
    #[value(name = "both")]
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a state (J, E) is admissible.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        law: LawSpec,
        #[arg(long = "J", allow_hyphen_values = true)]
        j: f64,
        #[arg(long = "E", allow_hyphen_values = true)]
        e: f64,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value = "V")]
        route: RouteArg,
    },
    /// Classify a lattice of states and write CSV and/or PGM.
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        law: LawSpec,
        /// `lo:hi:n`
        #[arg(long = "J-range", allow_hyphen_values = true)]
        j_range: Axis,
        /// `lo:hi:n`
        #[arg(long = "E-range", allow_hyphen_values = true)]
        e_range: Axis,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pgm: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
        /// Worker threads (default: available parallelism).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Tabulate circular orbits over log-spaced radii (`s,J,E,omega`).
    UrCurve {
        #[arg(long, allow_hyphen_values = true)]
        law: LawSpec,
        /// `lo:hi:n`
        #[arg(long = "s-range")]
        s_range: Axis,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radii where circular orbits exist, one `lo hi` pair per line.
    Radii {
        #[arg(long, allow_hyphen_values = true)]
        law: LawSpec,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Integrate an orbit with fixed-step RK4.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        law: LawSpec,
        #[arg(long)]
        r0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rdot0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi0: f64,
        #[arg(long = "J", allow_hyphen_values = true)]
        j: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether every (J, E) is admissible, from the asymptotic tags.
    FullPlane {
        #[arg(long, allow_hyphen_values = true)]
        law: LawSpec,
    },
    /// Compare the numeric classifier with a closed form on a grid.
    Check {
        /// Case id 4.1 to 4.8 or law name.
        #[arg(long)]
        law_case: String,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<f64>,
        #[arg(long = "J-range", allow_hyphen_values = true, default_value = "-3:3:41")]
        j_range: Axis,
        #[arg(long = "E-range", allow_hyphen_values = true, default_value = "-3:3:41")]
        e_range: Axis,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn parse_bracket(s: &str) -> Result<Bracket, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number '{lo}'"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number '{hi}'"))?;
    let b = Bracket::new(lo, hi);
    b.validate().map_err(|e| e.to_string())?;
    Ok(b)
}

/// Engine failure: message for stderr, exit code 3.
struct Failure(String);

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn show_config(out: &mut impl Write) -> io::Result<()> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let b = effective::DEFAULT_BRACKET;
    let ob = effective::OSCILLATORY_BRACKET;
    writeln!(out, "bracket = {:e}:{:e}", b.lo, b.hi)?;
    writeln!(out, "grid = {}", effective::DEFAULT_GRID)?;
    writeln!(out, "min_grid = {}", effective::MIN_GRID)?;
    writeln!(out, "oscillatory_bracket = {:e}:{:e}", ob.lo, ob.hi)?;
    writeln!(out, "oscillatory_grid = {}", effective::OSCILLATORY_GRID)?;
    writeln!(out, "golden_rtol = {:e}", effective::GOLDEN_RTOL)?;
    writeln!(out, "bisect_rtol = {:e}", effective::BISECT_RTOL)?;
    writeln!(out, "dynamic_range = {:e}", effective::DYNAMIC_RANGE)?;
    writeln!(out, "rel_tol = {:e}", space::REL_TOL)?;
    writeln!(out, "boundary_band = {} * tol", space::BAND_FACTOR)?;
    writeln!(out, "rotation_slack = {:e}", space::ROTATION_SLACK)?;
    writeln!(out, "guard_radii = {:e}:{:e}", dynamics::R_MIN_GUARD, dynamics::R_MAX_GUARD)?;
    writeln!(out, "trajectory_tol = {:e}", dynamics::TRAJECTORY_TOL)?;
    writeln!(out, "threads = {threads}")
}

fn membership_code(m: Membership) -> u8 {
    match m {
        Membership::Yes => EXIT_MEMBER,
        Membership::No => EXIT_NON_MEMBER,
        Membership::BoundaryAttained => EXIT_BOUNDARY,
    }
}

fn report(c: &Classification) {
    let ev = &c.evidence;
    let label = match c.route {
        space::Route::V => "inf V",
        space::Route::W => "sup W",
    };
    println!("route {:?}: {} (margin {:e}, tol {:e})", c.route, c.member, c.margin, c.tol);
    match ev.argmin_r {
        Some(r) => println!("  {label} = {} ({:?}, {:?}) at r = {r}", ev.value, ev.kind, ev.grade),
        None => println!("  {label} = {} ({:?}, {:?})", ev.value, ev.kind, ev.grade),
    }
}

fn cmd_classify(law: &LawSpec, j: f64, e: f64, search: &SearchArgs, route: RouteArg) -> CmdResult {
    let law = &law.0;
    let opts = search.options(law)?;
    let st = JEState::new(j, e);
    println!("law: {law}");
    println!("state: J = {j}, E = {e}");
    let v = (route != RouteArg::W).then(|| space::classify(law, st, &opts)).transpose()?;
    let w = (route != RouteArg::V).then(|| space::classify_via_w(law, st, &opts)).transpose()?;
    for c in v.iter().chain(w.iter()) {
        report(c);
    }
    let primary = v.as_ref().or(w.as_ref()).expect("at least one route");
    println!("verdict: {}", primary.member);
    match space::is_uniform_rotation(law, st, &opts)? {
        Some(s) => println!("uniform rotation witness: s = {s}"),
        None => println!("uniform rotation witness: none"),
    }
    if let (Some(v), Some(w)) = (&v, &w) {
        if !v.in_band() && !w.in_band() && v.member.is_member() != w.member.is_member() {
            return Err(Failure(format!(
                "routes disagree off the boundary band: V says {}, W says {}",
                v.member, w.member
            )));
        }
    }
    Ok(membership_code(primary.member))
}

fn cmd_scan(
    law: &LawSpec,
    j_range: Axis,
    e_range: Axis,
    out: Option<&PathBuf>,
    pgm: Option<&PathBuf>,
    search: &SearchArgs,
    threads: usize,
) -> CmdResult {
    let law = &law.0;
    let opts = search.options(law)?;
    let grid = scanio::scan(law, j_range, e_range, &opts, threads)?;
    if let Some(p) = out {
        scanio::save_csv(&grid, p)?;
    }
    if let Some(p) = pgm {
        scanio::save_pgm(&grid, p)?;
    }
    if out.is_none() && pgm.is_none() {
        scanio::write_csv(&grid, io::stdout().lock())?;
    } else {
        let boundary = grid.cells.iter().filter(|c| c.boundary).count();
        let ur = grid.cells.iter().filter(|c| c.ur).count();
        println!(
            "cells {}  member {}  boundary {}  uniform-rotation {}  errors {}",
            grid.cells.len(),
            grid.member_count(),
            boundary,
            ur,
            grid.errors.len()
        );
    }
    for (idx, msg) in &grid.errors {
        eprintln!("cell {idx}: {msg}");
    }
    Ok(0)
}

fn cmd_ur_curve(law: &LawSpec, s_range: Axis, out: Option<&PathBuf>) -> CmdResult {
    let curve = ur_curve(&law.0, s_range.lo, s_range.hi, s_range.n)?;
    let mut text = String::from("s,J,E,omega\n");
    for ur in &curve {
        text.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", ur.s, ur.j, ur.e, ur.angular_rate));
    }
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(0)
}

fn cmd_radii(law: &LawSpec, search: &SearchArgs) -> CmdResult {
    let opts = search.options(&law.0)?;
    let radii = space::allowed_radii(&law.0, &opts.search)?;
    for (lo, hi) in &radii.0 {
        println!("{lo} {hi}");
    }
    Ok(0)
}

fn cmd_simulate(
    law: &LawSpec,
    init: InitialConditions,
    t_end: f64,
    dt: f64,
    out: Option<&PathBuf>,
) -> CmdResult {
    let law = &law.0;
    let trace = dynamics::simulate(law, init, t_end, dt)?;
    if let Some(p) = out {
        dynamics::save_trace_csv(&trace, p)?;
    }
    let kin = kinetic_check(&trace, law);
    let bounds = check_trajectory_bounds(&trace, law, trace.j0, trace.e0);
    println!("E0 = {}, J0 = {}", trace.e0, trace.j0);
    println!("samples: {}", trace.states.len());
    println!("max |J - J0| = {:e}, max |E - E0| = {:e}", kin.max_j_resid, kin.max_e_resid);
    println!("trajectory inequality violations: {} (tol {:e})", bounds.violations, bounds.tol);
    println!("termination: {}", trace.termination);
    Ok(if trace.termination.is_completed() { 0 } else { EXIT_ERROR })
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    id: &str,
    k: Option<f64>,
    q: Option<f64>,
    n: Option<f64>,
    j_range: Axis,
    e_range: Axis,
    search: &SearchArgs,
    threads: usize,
) -> CmdResult {
    let case = LawCase::from_id(id, k, q, n).map_err(|e| Failure(e.to_string()))?;
    let opts = search.options(&case.force_law())?;
    let res = check_case(case, &j_range.values(), &e_range.values(), &opts, threads)?;
    println!("case: {case}");
    println!("cells: {}", res.cells);
    println!("disagreements: {}", res.disagreements);
    println!("boundary-band cells: {} ({} disagreeing)", res.band_cells, res.band_disagreements);
    println!("route disagreements: {}", res.route_disagreements);
    println!("elapsed: {:.3} s", res.elapsed.as_secs_f64());
    for st in &res.examples {
        println!("  disagrees at J = {}, E = {}", st.j, st.e);
    }
    Ok(if res.passed() { 0 } else { 1 })
}

fn run(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Classify { law, j, e, search, route } => cmd_classify(law, *j, *e, search, *route),
        Command::Scan { law, j_range, e_range, out, pgm, search, threads } => {
            cmd_scan(law, *j_range, *e_range, out.as_ref(), pgm.as_ref(), search, *threads)
        }
        Command::UrCurve { law, s_range, out } => cmd_ur_curve(law, *s_range, out.as_ref()),
        Command::Radii { law, search } => cmd_radii(law, search),
        Command::Simulate { law, r0, rdot0, phi0, j, t_end, dt, out } => cmd_simulate(
            law,
            InitialConditions { r0: *r0, r_dot0: *rdot0, phi0: *phi0, j: *j },
            *t_end,
            *dt,
            out.as_ref(),
        ),
        Command::FullPlane { law } => {
            println!("{}", full_plane(&law.0));
            Ok(0)
        }
        Command::Check { law_case, k, q, n, j_range, e_range, search, threads } => {
            cmd_check(law_case, *k, *q, *n, *j_range, *e_range, search, *threads)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if cli.show_config {
        return match show_config(&mut io::stdout().lock()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(_) => ExitCode::from(EXIT_ERROR),
        };
    }
    let Some(cmd) = cli.command else {
        eprintln!("no command given; see --help");
        return ExitCode::from(EXIT_USAGE);
    };
    match run(&cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
