//! Command-line front end: one verb per verification artifact.
//!
//! * `sieve`    — run the staged residue-class elimination and emit tables.
//! * `cf`       — continued-fraction expansions (sqrt, general surd, family).
//! * `classno`  — class-number oracles and the n^2+1 scan.
//! * `verify`   — residual checks of the zeta/L-function identities.
//! * `kronecker`— the Kronecker symbol.
//! * `scan`     — family grid checks (expansion agreement, convergent
//!   congruences, norm-form absence).
//!
//! Runs that write files also write a `manifest.txt` recording the command
//! line, config digest, tool version and output list, so identical inputs
//! give byte-identical outputs.

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use quadsieve::charmod::load_stages;
use quadsieve::contfrac::{
    bg_form_coeffs, d_family, expand, family_half_expansion, mcz_expansion,
    norm_values_over_period, CFExpansion, QuadraticSurd,
};
use quadsieve::quadfield::{class_number_checked, family_scan_n2plus1, prop_checks, scan_tsv};
use quadsieve::sieve::{condition_star, run_pipeline, survivors_tsv, table_tsv, SieveStage};
use quadsieve::zeta::{
    lemma31_residual, lemma43_residual, lemma44_residual, odd_char_mod3, odd_char_mod7,
    CharacterExact,
};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "quadsieve", version, about = "class-number verification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// worker threads for scans (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the residue-class sieve over the configured character stages.
    Sieve(SieveArgs),
    /// Continued-fraction expansions.
    Cf(CfArgs),
    /// Class numbers: single field, family member, scans, spot checks.
    Classno(ClassnoArgs),
    /// Residual checks of the zeta identities.
    Verify(VerifyArgs),
    /// Kronecker symbol (a/n).
    Kronecker { a: i64, n: i64 },
    /// Family grid checks: expansion agreement, convergent congruences,
    /// norm-form absence.
    Scan(ScanArgs),
}

#[derive(Args)]
struct SieveArgs {
    /// stage config file (searched in QUADSIEVE_CONFIG_DIR when relative)
    #[arg(long)]
    stages: PathBuf,
    /// directory for the per-stage TSVs, survivors.tsv and manifest.txt
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct CfArgs {
    /// expand sqrt(D)
    #[arg(long)]
    sqrt: Option<u64>,
    /// expand (P + sqrt(D))/Q, given as P,Q,D
    #[arg(long)]
    surd: Option<String>,
    /// family expansion for b,s,k
    #[arg(long)]
    family: Option<String>,
    /// with --family: expand (1 + sqrt(D))/2 instead of sqrt(D)
    #[arg(long)]
    half: bool,
}

#[derive(Args)]
struct ClassnoArgs {
    /// class number of the field with squarefree D (dual oracles)
    #[arg(long)]
    d: Option<u64>,
    /// scan Q(sqrt(n^2+1)) for n up to this bound
    #[arg(long, value_name = "N_MAX")]
    scan_n2plus1: Option<u64>,
    /// restrict the scan to odd n
    #[arg(long)]
    odd_only: bool,
    /// class number of the family member b,s,k
    #[arg(long)]
    family: Option<String>,
    /// run the h > 1 spot checks
    #[arg(long)]
    prop_checks: bool,
    /// directory for TSV output and manifest.txt
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// identity to check: 3.1, 4.3 or 4.4
    #[arg(long)]
    lemma: String,
    /// n for the 3.1 check (class-number-one field n^2+1)
    #[arg(long)]
    n: Option<u64>,
    /// s parameter
    #[arg(long)]
    s: Option<u64>,
    /// b parameter (4.4)
    #[arg(long)]
    b: Option<u64>,
    /// k parameter (4.4)
    #[arg(long)]
    k: Option<u32>,
    /// stage label whose character to use (with --stages)
    #[arg(long)]
    stage: Option<String>,
    /// stage config file
    #[arg(long)]
    stages: Option<PathBuf>,
    /// small built-in test character: 3 or 7
    #[arg(long)]
    conductor: Option<u64>,
    /// L-series truncation length
    #[arg(long, default_value_t = 100_000)]
    terms: u64,
    /// working precision in bits
    #[arg(long, default_value_t = 256)]
    precision: u32,
}

#[derive(Args)]
struct ScanArgs {
    /// grid bounds as bmax,smax,kmax
    #[arg(long, default_value = "4,4,3")]
    grid: String,
    /// directory for TSV output and manifest.txt
    #[arg(long)]
    emit: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    let code = match cli.command {
        Command::Sieve(args) => cmd_sieve(args),
        Command::Cf(args) => cmd_cf(args),
        Command::Classno(args) => cmd_classno(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Kronecker { a, n } => {
            println!("{}", quadsieve::arith::kronecker(a, n));
            Ok(0)
        }
        Command::Scan(args) => cmd_scan(args),
    };
    match code {
        Ok(c) => std::process::exit(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}

/// Resolve a config path, consulting QUADSIEVE_CONFIG_DIR for relative paths.
fn resolve_config(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    if let Ok(dir) = std::env::var("QUADSIEVE_CONFIG_DIR") {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return candidate;
        }
    }
    path.to_path_buf()
}

struct Emitter {
    dir: Option<PathBuf>,
    outputs: Vec<String>,
    config_digest: String,
}

impl Emitter {
    fn new(dir: Option<PathBuf>, config_bytes: &[u8]) -> Result<Emitter, String> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| format!("{}: {e}", d.display()))?;
        }
        let mut hasher = Sha256::new();
        hasher.update(config_bytes);
        Ok(Emitter {
            dir,
            outputs: Vec::new(),
            config_digest: hex_digest(&hasher.finalize()),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), String> {
        if let Some(d) = &self.dir {
            let p = d.join(name);
            std::fs::write(&p, content).map_err(|e| format!("{}: {e}", p.display()))?;
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    fn finish(&self) -> Result<(), String> {
        if let Some(d) = &self.dir {
            let argv: Vec<String> = std::env::args().collect();
            let mut m = String::new();
            m.push_str(&format!("command = {}\n", argv.join(" ")));
            m.push_str(&format!("config_sha256 = {}\n", self.config_digest));
            m.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
            for o in &self.outputs {
                m.push_str(&format!("output = {o}\n"));
            }
            let p = d.join("manifest.txt");
            std::fs::write(&p, m).map_err(|e| format!("{}: {e}", p.display()))?;
        }
        Ok(())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_sieve(args: SieveArgs) -> Result<i32, String> {
    let path = resolve_config(&args.stages);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let stages: Vec<SieveStage> = quadsieve::charmod::parse_stages(&text)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(SieveStage::from)
        .collect();
    if stages.is_empty() {
        return Err("config contains no stages".into());
    }
    for st in &stages {
        if !condition_star(st) {
            return Err(format!("stage {} fails condition (*)", st.chi.label));
        }
    }
    let mut emitter = Emitter::new(args.emit, text.as_bytes())?;
    let result = run_pipeline(&stages, stages[0].conductor()).map_err(|e| e.to_string())?;
    for (stage, rows) in stages.iter().zip(&result.tables) {
        emitter.write(&format!("{}.tsv", stage.chi.label), &table_tsv(rows))?;
    }
    emitter.write("survivors.tsv", &survivors_tsv(&result.survivors))?;
    emitter.finish()?;
    for s in &result.summaries {
        println!(
            "stage {} (q={}, r={}): {} in, {} eliminated by symbol, {} by compatibility, {} survive",
            s.label, s.conductor, s.target_prime, s.input,
            s.eliminated_by_symbol, s.eliminated_by_compatibility, s.surviving
        );
    }
    if result.survivors.is_empty() {
        println!("no residue class survives all stages");
        Ok(0)
    } else {
        println!("{} residue classes survive", result.survivors.len());
        for s in &result.survivors {
            println!("  {s}");
        }
        Ok(1)
    }
}

fn parse_triple(s: &str) -> Result<(u64, u64, u32), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values: {s}"));
    }
    Ok((
        parts[0].trim().parse().map_err(|e| format!("{e}"))?,
        parts[1].trim().parse().map_err(|e| format!("{e}"))?,
        parts[2].trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn cmd_cf(args: CfArgs) -> Result<i32, String> {
    let out: CFExpansion = if let Some(d) = args.sqrt {
        expand(&QuadraticSurd::sqrt_of(d).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
    } else if let Some(spec) = &args.surd {
        let parts: Vec<&str> = spec.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("expected P,Q,D: {spec}"));
        }
        let p: BigInt = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
        let q: BigInt = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
        let d: BigInt = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
        expand(&QuadraticSurd::new(p, q, d).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
    } else if let Some(spec) = &args.family {
        let (b, s, k) = parse_triple(spec)?;
        if args.half {
            family_half_expansion(b, s, k).map_err(|e| e.to_string())?
        } else {
            mcz_expansion(b, s, k).map_err(|e| e.to_string())?
        }
    } else {
        return Err("one of --sqrt, --surd, --family is required".into());
    };
    println!("{out}");
    Ok(0)
}

fn cmd_classno(args: ClassnoArgs) -> Result<i32, String> {
    if let Some(d_value) = args.d {
        let disc = if d_value % 4 == 1 { d_value } else { 4 * d_value };
        let f = class_number_checked(disc).map_err(|e| e.to_string())?;
        println!("D\tdisc\th\th_narrow\tunit_norm");
        println!(
            "{}\t{}\t{}\t{}\t{}",
            f.d_value, f.discriminant, f.h, f.h_narrow, f.unit_norm
        );
        return Ok(0);
    }
    if let Some(n_max) = args.scan_n2plus1 {
        let rows = family_scan_n2plus1(n_max, args.odd_only).map_err(|e| e.to_string())?;
        let tsv = scan_tsv(&rows);
        let mut emitter = Emitter::new(args.emit, tsv.as_bytes())?;
        emitter.write("scan_n2plus1.tsv", &tsv)?;
        emitter.finish()?;
        print!("{tsv}");
        return Ok(0);
    }
    if let Some(spec) = &args.family {
        let (b, s, k) = parse_triple(spec)?;
        let d_big = quadsieve::quadfield::d_mcz(b, s, k);
        let d_value = d_big
            .to_u64()
            .ok_or_else(|| format!("D(b,s,k) = {d_big} exceeds the oracle bound"))?;
        if !quadsieve::arith::is_squarefree(d_value).map_err(|e| e.to_string())? {
            println!("D\tsquarefree\th");
            println!("{d_value}\tfalse\t-");
            return Ok(0);
        }
        let disc = if d_value % 4 == 1 { d_value } else { 4 * d_value };
        let f = class_number_checked(disc).map_err(|e| e.to_string())?;
        println!("D\tsquarefree\th");
        println!("{}\ttrue\t{}", d_value, f.h);
        return Ok(0);
    }
    if args.prop_checks {
        let items = prop_checks().map_err(|e| e.to_string())?;
        println!("check\tb\ts\tk\tD\th\tpass");
        let mut all = true;
        for it in &items {
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                it.label, it.b, it.s, it.k, it.d_value, it.h, it.pass
            );
            all &= it.pass;
        }
        return Ok(if all { 0 } else { 1 });
    }
    Err("one of --d, --scan-n2plus1, --family, --prop-checks is required".into())
}

fn stage_character(args: &VerifyArgs) -> Result<CharacterExact, String> {
    if let Some(label) = &args.stage {
        let path = args
            .stages
            .as_ref()
            .ok_or("--stage requires --stages FILE")?;
        let stages = load_stages(&resolve_config(path)).map_err(|e| e.to_string())?;
        let cfg = stages
            .iter()
            .find(|s| &s.chi.label == label)
            .ok_or_else(|| format!("no stage labelled {label}"))?;
        CharacterExact::sibling_of(&cfg.chi).map_err(|e| e.to_string())
    } else {
        match args.conductor {
            Some(3) => Ok(odd_char_mod3()),
            Some(7) => Ok(odd_char_mod7()),
            Some(c) => Err(format!("no built-in test character of conductor {c}")),
            None => Err("give --stage LABEL --stages FILE, or --conductor 3|7".into()),
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, String> {
    let chi = stage_character(&args)?;
    let prec = args.precision;
    match args.lemma.as_str() {
        "3.1" => {
            let n = args.n.ok_or("--lemma 3.1 requires --n")?;
            let resid = lemma31_residual(n, &chi, prec).map_err(|e| e.to_string())?;
            report("3.1", resid, 1e-10)
        }
        "4.3" => {
            let s = args.s.ok_or("--lemma 4.3 requires --s")?;
            let resid = lemma43_residual(s, &chi, prec).map_err(|e| e.to_string())?;
            report("4.3", resid, 1e-8)
        }
        "4.4" => {
            let b = args.b.ok_or("--lemma 4.4 requires --b")?;
            let s = args.s.ok_or("--lemma 4.4 requires --s")?;
            let k = args.k.ok_or("--lemma 4.4 requires --k")?;
            let (resid, bound) =
                lemma44_residual(b, s, k, &chi, args.terms, prec).map_err(|e| e.to_string())?;
            report("4.4", resid, bound)
        }
        other => Err(format!("unknown lemma {other}; use 3.1, 4.3 or 4.4")),
    }
}

fn report(lemma: &str, resid: f64, bound: f64) -> Result<i32, String> {
    let pass = resid <= bound;
    println!(
        "lemma {lemma}: residual = {resid:.3e}, bound = {bound:.3e}, {}",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { 1 })
}

fn cmd_scan(args: ScanArgs) -> Result<i32, String> {
    let (bmax, smax, kmax) = parse_triple(&args.grid)?;
    let mut rows = String::from("b\ts\tk\tmcz_ok\tladder_ok\tnorm_ok\n");
    let mut all = true;
    for b in 1..=bmax {
        for s in 1..=smax {
            for k in 1..=kmax {
                let (m, l, n) = grid_checks(b, s, k).map_err(|e| e.to_string())?;
                all &= m && l && n;
                rows.push_str(&format!("{b}\t{s}\t{k}\t{m}\t{l}\t{n}\n"));
            }
        }
    }
    let mut emitter = Emitter::new(args.emit, args.grid.as_bytes())?;
    emitter.write("scan_grid.tsv", &rows)?;
    emitter.finish()?;
    print!("{rows}");
    println!("{}", if all { "all grid checks pass" } else { "grid check FAILURES" });
    Ok(if all { 0 } else { 1 })
}

/// The three grid checks for one family member: the closed-form expansion
/// equals the direct one with period 2k+1, the convergent/form congruences
/// mod a prime q | b hold, and q never shows up as a convergent norm.
fn grid_checks(b: u64, s: u64, k: u32) -> Result<(bool, bool, bool), quadsieve::contfrac::CfError> {
    let pattern = mcz_expansion(b, s, k)?;
    let d_big = d_family(b, s, k);
    let mcz_ok = match d_big.to_u64() {
        Some(d) => {
            let direct = expand(&QuadraticSurd::sqrt_of(d)?)?;
            direct == pattern && pattern.period.len() == 2 * k as usize + 1
        }
        None => false,
    };
    let qs = quadsieve::arith::prime_divisors(b);
    let mut ladder_ok = true;
    let mut norm_ok = true;
    if let Some(&q) = qs.first() {
        ladder_ok = convergent_ladder_holds(b, s, k, q)?;
        if let Some(d) = d_big.to_u64() {
            let qi = BigInt::from(q);
            norm_ok = norm_values_over_period(d)?.iter().all(|(_, e)| *e != qi);
        }
    }
    Ok((mcz_ok, ladder_ok, norm_ok))
}

/// p_j, q_j of the tail alternate 0/1 mod q with the exceptional last
/// convergent q_{2k+1} = 2s, and the form coefficients satisfy
/// A_j = (-1)^j, B_j = 2s (j <= 2k), B_{2k+1} = -2s, C_j = (-1)^(j-1).
fn convergent_ladder_holds(
    b: u64,
    s: u64,
    k: u32,
    q: u64,
) -> Result<bool, quadsieve::contfrac::CfError> {
    use num_integer::Integer;
    let cf = mcz_expansion(b, s, k)?;
    let l = 2 * k as usize + 1;
    let qi = BigInt::from(q);
    let red = |x: &BigInt| x.mod_floor(&qi);
    let mut p_prev = BigInt::from(1);
    let mut p = BigInt::from(0);
    let mut q_prev = BigInt::from(0);
    let mut qq = BigInt::from(1);
    let mut ok = true;
    for j in 1..=l {
        let a = &cf.period[j - 1];
        let p_next = a * &p + &p_prev;
        let q_next = a * &qq + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut qq, q_next);
        let (want_p, want_q) = if j == l {
            (BigInt::from(1), BigInt::from(2 * s))
        } else if j % 2 == 1 {
            (BigInt::from(1), BigInt::from(0))
        } else {
            (BigInt::from(0), BigInt::from(1))
        };
        ok &= red(&p) == red(&want_p) && red(&qq) == red(&want_q);
        let f = bg_form_coeffs(b, s, k, j)?;
        let sign = |even: bool| if even { BigInt::from(1) } else { BigInt::from(-1) };
        ok &= red(&f.a) == red(&sign(j % 2 == 0));
        let want_b = if j == l {
            BigInt::from(-(2 * s as i64))
        } else {
            BigInt::from(2 * s)
        };
        ok &= red(&f.b) == red(&want_b);
        ok &= red(&f.c) == red(&sign(j % 2 == 1));
        ok &= f.discriminant() == BigInt::from(4) * d_family(b, s, k);
    }
    Ok(ok)
}
