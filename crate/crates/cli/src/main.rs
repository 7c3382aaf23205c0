use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clonoid_core::clonoid::{closure_level, enumerate_clonoids, member, GeneratorSet};
use clonoid_core::comprep::{comprep_brute_force, comprep_solve, coords_from_level, lattice_counts};
use clonoid_core::funcspace::{FuncTable, ModuleSpec};
use clonoid_core::io;
use clonoid_core::scalars::{field_make, Field, Submodule};
use clonoid_core::theta::{certificate_delta, verify_identity};
use clonoid_core::unifgen::{
    build_arity_certificate, lower_bound, solve_direct_with_stats, Certificate, VERIFY_BUDGET,
};
use clonoid_core::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "clonoids", version, about = "Clonoids from F^k into coprime modules: certificates, closures, CompRep")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Field characteristic.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Field degree, q = p^e.
    #[arg(long, global = true, default_value_t = 1)]
    e: u32,
    /// Dimension of the source space F^k.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Cyclic target module Z/N.
    #[arg(long = "mod", global = true, conflicts_with = "module")]
    modulus: Option<u64>,
    /// Target module Z/d1 × Z/d2 × ….
    #[arg(long, global = true, value_delimiter = ',')]
    module: Option<Vec<u64>>,
    #[arg(long, global = true)]
    arity: Option<usize>,
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for verification loops (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Cap on points × terms for one exhaustive verification.
    #[arg(long, global = true, default_value_t = VERIFY_BUDGET)]
    budget: u64,
    /// Check this many seeded random points instead of all of them.
    #[arg(long, global = true)]
    samples: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the δ = Σ α_n Σ_{Θ_n} δ_V identity exhaustively.
    ThetaVerify,
    /// Build and verify a certificate, optionally writing it as JSON.
    Certify {
        #[arg(long)]
        rank_bound: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Re-verify a certificate file.
    CheckCert,
    /// Howell basis of the m-ary part of the clonoid generated by `--in`.
    Closure {
        #[arg(long)]
        coords_out: Option<PathBuf>,
    },
    /// Is the candidate in the clonoid generated by the generators?
    Member,
    /// Image of a clonoid on a tuple of inputs.
    Comprep {
        #[arg(long, conflicts_with = "generators")]
        coords: Option<PathBuf>,
        #[arg(long)]
        generators: Option<PathBuf>,
    },
    /// Per-level invariant submodule counts and their product.
    Lattice {
        /// Also count clonoids by brute force and compare.
        #[arg(long)]
        brute_force: bool,
    },
    /// Arity lower bound: least m with |R|^m ≥ |A|.
    Bounds {
        #[arg(long)]
        size_a: Option<u64>,
        #[arg(long)]
        size_r: Option<u64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Constructive,
    Solver,
}

enum Failure {
    Exit(u8),
    Err(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Err(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn input_err(msg: impl Into<String>) -> Failure {
    Failure::Err(Error::Schema(msg.into()))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::VerificationFailed(_) | Error::IdentityFailed(_) | Error::CanonicityViolation(_) => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

impl Common {
    fn field(&self) -> Result<Field, Failure> {
        let p = self.p.ok_or_else(|| input_err("--p is required"))?;
        Ok(field_make(p, self.e)?)
    }

    fn k(&self) -> Result<usize, Failure> {
        self.k.ok_or_else(|| input_err("--k is required"))
    }

    fn module(&self) -> Result<ModuleSpec, Failure> {
        match (&self.modulus, &self.module) {
            (Some(n), _) => Ok(ModuleSpec::cyclic(*n)?),
            (None, Some(ds)) => Ok(ModuleSpec::new(ds)?),
            (None, None) => Err(input_err("--mod or --module is required")),
        }
    }

    fn cyclic(&self) -> Result<u64, Failure> {
        let m = self.module()?;
        if m.factors.len() != 1 {
            return Err(input_err("this command needs a cyclic module, use --mod N"));
        }
        Ok(m.n)
    }

    fn read_input(&self) -> Result<String, Failure> {
        let path = self.input.as_ref().ok_or_else(|| input_err("--in is required"))?;
        read(path)
    }

    fn write_out(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => write(path, text),
            None => Ok(()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn print_basis(s: &Submodule) {
    for row in &s.rows {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        println!("  [{}]", cells.join(" "));
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INPUT),
            };
        }
    };
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let c = &cli.common;
    let outcome = match &cli.cmd {
        Cmd::ThetaVerify => theta_verify(c),
        Cmd::Certify { rank_bound, method } => certify(c, *rank_bound, *method),
        Cmd::CheckCert => check_cert(c),
        Cmd::Closure { coords_out } => closure(c, coords_out.as_deref()),
        Cmd::Member => member_cmd(c),
        Cmd::Comprep { coords, generators } => comprep(c, coords.as_deref(), generators.as_deref()),
        Cmd::Lattice { brute_force } => lattice(c, *brute_force),
        Cmd::Bounds { size_a, size_r } => bounds(c, *size_a, *size_r),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Exit(code)) => ExitCode::from(code),
        Err(Failure::Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn theta_verify(c: &Common) -> Outcome {
    let field = c.field()?;
    let k = c.k()?;
    let n = c.cyclic()?;
    let r = verify_identity(&field, k, n)?;
    println!("theta-verify q={} k={k} N={n}", r.q);
    println!("type counts: {:?}", r.type_counts);
    println!("untyped: {} (full rank {})", r.untyped, r.untyped_full_rank);
    println!("theta counts: {:?}", r.theta_counts);
    println!("alpha: {:?}", r.alpha);
    println!("points checked: {}", r.points_checked);
    println!("closed forms: triangular {} binomial {}", r.triangular_form_matches, r.binomial_form_matches);
    println!("counterexamples: {}", r.counterexamples.len());
    println!("incidence failures: {}", r.incidence_failures.len());
    if !r.passed() {
        println!("FAIL");
        return Err(Failure::Exit(EXIT_FAIL));
    }
    if c.out.is_some() {
        let cert = certificate_delta(&field, k, n)?;
        c.write_out(&io::to_string(&io::theta_certificate_to_json(&cert)))?;
    }
    println!("PASS");
    Ok(())
}

fn certify(c: &Common, rank_bound: Option<usize>, method: Method) -> Outcome {
    let field = c.field()?;
    let k = c.k()?;
    let n = c.cyclic()?;
    let arity = c.arity.unwrap_or(k + 1);
    let rank = rank_bound.unwrap_or(k);
    let use_solver = match method {
        Method::Solver => true,
        Method::Constructive => false,
        Method::Auto => rank < k,
    };
    let cert: Certificate = if use_solver {
        if arity != k + 1 {
            return Err(input_err(format!("the solver works at arity k+1 = {}", k + 1)));
        }
        solve(&field, k, n, rank)?
    } else {
        if rank < k {
            return Err(input_err("the constructive route has rank bound k; use --method solver"));
        }
        match build_arity_certificate(&field, k, n, arity) {
            Ok(cert) => (*cert).clone(),
            Err(Error::BudgetExceeded(why)) if method == Method::Auto && arity == k + 1 => {
                println!("constructive route over budget ({why}), falling back to the solver");
                solve(&field, k, n, rank)?
            }
            Err(e) => return Err(e.into()),
        }
    };
    println!(
        "certificate q={} k={k} N={n} arity={} rank_bound={} terms={} provenance={}",
        field.q,
        cert.op.arity,
        cert.op.rank_bound,
        cert.op.len(),
        cert.provenance.tag()
    );
    println!("scope: {}", cert.scope.tag());
    println!("verified");
    c.write_out(&io::to_string(&io::certificate_to_json(&cert)))
}

fn solve(field: &Field, k: usize, n: u64, rank: usize) -> Result<Certificate, Failure> {
    let (cert, stats) = solve_direct_with_stats(field, k, n, rank)?;
    println!(
        "solver: {} unknowns, {} equations ({} before the hyperplane reduction)",
        stats.unknowns, stats.equations_reduced, stats.equations_full
    );
    match cert {
        Some(cert) => Ok(cert),
        None => {
            println!(
                "infeasible: no Z/{n}-combination of {}x{} matrices of rank <= {rank} reproduces every function of O^({}) on F^{k}",
                k + 1,
                k + 1,
                k + 1
            );
            Err(Failure::Exit(EXIT_INFEASIBLE))
        }
    }
}

fn check_cert(c: &Common) -> Outcome {
    let json: io::CertificateJson = io::from_str(&c.read_input()?)?;
    let cert = io::certificate_from_json(&json)?;
    let points = cert.points();
    let failures = match c.samples {
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let mut codes: Vec<u64> = (0..s).map(|_| rng.gen_range(0..points)).collect();
            codes.sort_unstable();
            codes.dedup();
            println!("mode: sampled, {} distinct of {points} points (seed {})", codes.len(), c.seed);
            cert.failures_at(&codes)
        }
        None => {
            let work = points.saturating_mul(cert.op.len().max(1) as u64);
            if work > c.budget {
                return Err(Error::BudgetExceeded(format!(
                    "{points} points x {} terms exceeds --budget {}; use --samples",
                    cert.op.len(),
                    c.budget
                ))
                .into());
            }
            println!("mode: exhaustive, {points} points");
            cert.failures()?
        }
    };
    println!(
        "certificate q={} k={} N={} arity={} terms={} scope={} provenance={}",
        cert.op.field.q,
        cert.k,
        cert.op.modulus,
        cert.op.arity,
        cert.op.len(),
        cert.scope.tag(),
        cert.provenance.tag()
    );
    match failures.first() {
        None => {
            println!("verified");
            Ok(())
        }
        Some(code) => {
            println!("FAILED at {} point(s), first code {code}", failures.len());
            Err(Failure::Exit(EXIT_FAIL))
        }
    }
}

fn tables(list: &[io::FuncTableJson]) -> Result<Vec<FuncTable>, Failure> {
    Ok(list.iter().map(io::table_from_json).collect::<clonoid_core::Result<_>>()?)
}

/// Signature from the first generator, or from the flags when there is none.
fn generator_set(c: &Common, funcs: Vec<FuncTable>) -> Result<GeneratorSet, Failure> {
    let (field, k, module) = match funcs.first() {
        Some(f) => (f.field.clone(), f.k, f.module.clone()),
        None => (c.field()?, c.k()?, c.module()?),
    };
    module.check_coprime(field.p)?;
    Ok(GeneratorSet::new(&field, k, &module, funcs)?)
}

fn read_generators(c: &Common, path: &Path) -> Result<GeneratorSet, Failure> {
    let json: io::GeneratorsJson = io::from_str(&read(path)?)?;
    generator_set(c, tables(&json.generators)?)
}

fn closure(c: &Common, coords_out: Option<&Path>) -> Outcome {
    let path = c.input.as_ref().ok_or_else(|| input_err("--in is required"))?;
    let gens = read_generators(c, path)?;
    let m = c.arity.unwrap_or(gens.k);
    let level = closure_level(&gens, m)?;
    println!(
        "closure q={} k={} module={:?} arity={m} generators={}",
        gens.field.q,
        gens.k,
        gens.module.factors,
        gens.funcs.len()
    );
    println!("howell basis ({} rows):", level.span.rows.len());
    print_basis(&level.span);
    println!("cardinality: {}", level.cardinality());
    c.write_out(&io::to_string(&io::BasisJson {
        basis: level.span.rows.clone(),
    }))?;
    if let Some(path) = coords_out {
        let lk = if m == gens.k { level } else { closure_level(&gens, gens.k)? };
        let coords = coords_from_level(&lk)?;
        println!("|C_i|: {:?}", coords.counts());
        write(path, &io::to_string(&io::coords_to_json(&coords)))?;
    }
    Ok(())
}

fn member_cmd(c: &Common) -> Outcome {
    let json: io::MemberJson = io::from_str(&c.read_input()?)?;
    let candidate = io::table_from_json(&json.candidate)?;
    candidate.module.check_coprime(candidate.field.p)?;
    let gens = GeneratorSet::new(&candidate.field, candidate.k, &candidate.module, tables(&json.generators)?)?;
    let level = closure_level(&gens, candidate.m)?;
    println!("{}", if member(&candidate, &level)? { "yes" } else { "no" });
    Ok(())
}

fn comprep(c: &Common, coords: Option<&Path>, generators: Option<&Path>) -> Outcome {
    let (coords, gens) = match (coords, generators) {
        (Some(path), _) => {
            let json: io::CoordsJson = io::from_str(&read(path)?)?;
            (io::coords_from_json(&json)?, None)
        }
        (None, Some(path)) => {
            let gens = read_generators(c, path)?;
            let coords = coords_from_level(&closure_level(&gens, gens.k)?)?;
            (coords, Some(gens))
        }
        (None, None) => return Err(input_err("--coords or --generators is required")),
    };
    let inst: io::ComprepInstanceJson = io::from_str(&c.read_input()?)?;
    let inputs = io::inputs_from_json(&coords.field, coords.k, &inst)?;
    let image = comprep_solve(&coords, &inputs)?;
    println!(
        "comprep q={} k={} module={:?} inputs={} |C_i| {:?}",
        coords.field.q,
        coords.k,
        coords.module.factors,
        inputs.len(),
        coords.counts()
    );
    println!("image basis ({} rows, {} elements):", image.rows.len(), image.cardinality());
    print_basis(&image);
    c.write_out(&io::to_string(&io::BasisJson {
        basis: image.rows.clone(),
    }))?;
    if let Some(gens) = gens {
        let brute = comprep_brute_force(&gens, &inputs)?;
        if brute != image {
            println!("brute-force image differs");
            return Err(Failure::Exit(EXIT_FAIL));
        }
        println!("brute-force image agrees");
    }
    Ok(())
}

fn lattice(c: &Common, brute_force: bool) -> Outcome {
    let field = c.field()?;
    let k = c.k()?;
    let module = c.module()?;
    module.check_coprime(field.p)?;
    let counts = lattice_counts(&field, k, &module)?;
    for (i, n) in counts.iter().enumerate() {
        println!("level {i}: {n}");
    }
    let total: u128 = counts.iter().map(|&n| n as u128).product();
    println!("clonoids: {total}");
    if brute_force {
        let found = enumerate_clonoids(&field, k, &module, k)?.len() as u128;
        println!("brute force: {found}");
        if found != total {
            return Err(Failure::Exit(EXIT_FAIL));
        }
    }
    Ok(())
}

fn bounds(c: &Common, size_a: Option<u64>, size_r: Option<u64>) -> Outcome {
    let (a, r) = match (size_a, size_r) {
        (Some(a), Some(r)) => (a, r),
        (None, None) => {
            let q = c.field()?.q as u64;
            let a = q
                .checked_pow(c.k()? as u32)
                .ok_or_else(|| input_err("q^k overflows"))?;
            (a, q)
        }
        _ => return Err(input_err("give both --size-a and --size-r")),
    };
    if a < 1 || r < 2 {
        return Err(input_err("need |A| >= 1 and |R| >= 2"));
    }
    println!("|A|={a} |R|={r}");
    println!("{}", lower_bound(a, r));
    Ok(())
}
