//! Command-line front end: build circuits, simulate them on basis states,
//! verify them against the software reference model, report Clifford+T
//! costs, compare KQ figures, and reproduce the published resource table.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use qfp::arith;
use qfp::fpcirc::{build_fp_adder_circuit, build_fp_multiplier_circuit, FpBinaryCircuit};
use qfp::ir::{parse_circuit, Circuit};
use qfp::resources::{compare_formats, count_resources, ResourceReport, REFERENCE_COUNTS};
use qfp::sim::{simulate, BasisState};
use qfp::softfloat::{self, decode, encode, parse_format, EncodedFp, FpFormat};

#[derive(Parser)]
#[command(name = "qfp", version, about = "Reversible floating-point arithmetic circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a circuit and emit it in the text format.
    Build(BuildArgs),
    /// Apply a circuit file to a basis state.
    Simulate(SimulateArgs),
    /// Check a floating-point circuit against the software reference model.
    Verify(VerifyArgs),
    /// Report qubit and Clifford+T costs of a circuit file.
    Resources(ResourcesArgs),
    /// Pairwise KQ ratios between circuit files.
    Compare(CompareArgs),
    /// Rebuild the published designs and tabulate measured vs reference counts.
    ReproTable(ReproArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Block {
    Adder,
    Multiplier,
    Comparator,
    Fpadd,
    Fpmul,
}

#[derive(Args)]
struct BuildArgs {
    /// Which circuit to build.
    #[arg(long, value_enum)]
    block: Block,
    /// Operand width for the integer blocks.
    #[arg(long)]
    width: Option<usize>,
    /// Floating-point format such as e8m7 for the fp blocks.
    #[arg(long)]
    format: Option<String>,
    /// Write the circuit text here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Circuit file in the text format.
    #[arg(long)]
    circuit: PathBuf,
    /// Input basis state as a hex bit pattern (bit i of the value is qubit i).
    #[arg(long = "in")]
    input: String,
    /// Output rendering.
    #[arg(long = "out-format", value_enum, default_value = "hex")]
    out_format: StateFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateFormat {
    Hex,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum FpOp {
    Add,
    Mul,
}

#[derive(Args)]
struct VerifyArgs {
    /// Operation to verify.
    #[arg(long, value_enum)]
    op: FpOp,
    /// Floating-point format such as e3m4.
    #[arg(long)]
    format: String,
    /// Verify this circuit file instead of a freshly built circuit. The
    /// operands are taken to sit at qubits [0, w) and [w, 2w) and the
    /// result at [2w, 3w), the layout the build command produces.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Check every ordered operand pair (for operand widths up to 18 bits).
    #[arg(long, conflicts_with = "random")]
    exhaustive: bool,
    /// Check this many seeded random pairs instead.
    #[arg(long)]
    random: Option<u64>,
    /// Seed for random mode.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Emit the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ResourcesArgs {
    /// Circuit file in the text format.
    #[arg(long)]
    circuit: PathBuf,
    /// Report format.
    #[arg(long = "out", value_enum, default_value = "table")]
    out: ReportFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more circuit files.
    #[arg(long = "circuit", required = true, num_args = 1..)]
    circuits: Vec<PathBuf>,
    /// Emit the ratio table as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Markdown,
}

#[derive(Args)]
struct ReproArgs {
    /// Output table format.
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Resources(args) => cmd_resources(args),
        Command::Compare(args) => cmd_compare(args),
        Command::ReproTable(args) => cmd_repro_table(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn required_format(s: &Option<String>) -> Result<FpFormat> {
    let text = s.as_deref().context("--format is required for this block")?;
    parse_format(text).with_context(|| format!("invalid format `{text}`"))
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode> {
    let circuit = match args.block {
        Block::Adder | Block::Multiplier | Block::Comparator => {
            let n = args.width.context("--width is required for integer blocks")?;
            if n == 0 || n > 64 {
                bail!("width must be between 1 and 64");
            }
            let mut c = Circuit::new();
            let a = c.alloc_register(n, "a")?;
            let b = c.alloc_register(n, "b")?;
            match args.block {
                Block::Adder => arith::build_adder(&mut c, &a, &b)?,
                Block::Multiplier => {
                    let out = c.alloc_register(2 * n, "out")?;
                    arith::build_multiplier(&mut c, &a, &b, &out)?;
                }
                Block::Comparator => {
                    let r = c.alloc_register(1, "lt")?;
                    arith::build_comparator(&mut c, &a, &b, r.qubit(0))?;
                }
                _ => unreachable!(),
            }
            c
        }
        Block::Fpadd => build_fp_adder_circuit(&required_format(&args.format)?).circuit,
        Block::Fpmul => build_fp_multiplier_circuit(&required_format(&args.format)?).circuit,
    };
    let text = circuit.to_string();
    match &args.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("qubits: {}", circuit.qubit_count());
        }
        None => {
            print!("{text}");
            eprintln!("qubits: {}", circuit.qubit_count());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_hex_state(hex: &str, qubits: usize) -> Result<BasisState> {
    let digits = hex.trim().trim_start_matches("0x");
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
        bail!("`{hex}` is not a hex bit pattern");
    }
    let mut bits = vec![false; qubits];
    let mut bit = 0usize;
    for c in digits.chars().rev() {
        let nibble = c.to_digit(16).unwrap();
        for k in 0..4 {
            if nibble >> k & 1 == 1 {
                if bit + k >= qubits {
                    bail!("input pattern has more bits than the circuit's {qubits} qubits");
                }
                bits[bit + k] = true;
            }
        }
        bit += 4;
    }
    Ok(BasisState::from_bits(&bits))
}

fn render_state(state: &BasisState, format: StateFormat) -> String {
    match format {
        StateFormat::Hex => {
            let mut nibbles = Vec::new();
            for chunk_start in (0..state.len()).step_by(4) {
                let mut v = 0u32;
                for k in 0..4 {
                    if chunk_start + k < state.len() && state.bits()[chunk_start + k] {
                        v |= 1 << k;
                    }
                }
                nibbles.push(char::from_digit(v, 16).unwrap());
            }
            let s: String = nibbles.into_iter().rev().collect();
            let s = s.trim_start_matches('0');
            format!("0x{}", if s.is_empty() { "0" } else { s })
        }
        StateFormat::Bin => {
            let s: String = state
                .bits()
                .iter()
                .rev()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            format!("0b{s}")
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.circuit)
        .with_context(|| format!("reading {}", args.circuit.display()))?;
    let circuit = parse_circuit(&text)?;
    let state = parse_hex_state(&args.input, circuit.qubit_count())?;
    let out = simulate(&circuit, &state);
    println!("{}", render_state(&out, args.out_format));
    Ok(ExitCode::SUCCESS)
}

/// What to verify and how; exhaustive mode is capped at 18-bit operands so
/// the pair count stays tractable.
struct VerifyPlan {
    format: FpFormat,
    op: FpOp,
    pairs: Vec<(u64, u64)>,
    mode: String,
    seed: Option<u64>,
}

fn make_plan(args: &VerifyArgs) -> Result<VerifyPlan> {
    let format = parse_format(&args.format)?;
    let width = format.width();
    if args.exhaustive || args.random.is_none() {
        if width > 18 {
            bail!(
                "exhaustive verification is limited to operand widths of at most 18 bits; \
                 use --random N"
            );
        }
        let total = 1u64 << width;
        let pairs = (0..total * total).map(|i| (i / total, i % total)).collect();
        Ok(VerifyPlan {
            format,
            op: args.op,
            pairs,
            mode: format!("exhaustive {total}x{total}"),
            seed: None,
        })
    } else {
        let count = args.random.unwrap();
        let mask = (1u64 << width) - 1;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
        let pairs = (0..count)
            .map(|_| (rng.gen::<u64>() & mask, rng.gen::<u64>() & mask))
            .collect();
        Ok(VerifyPlan {
            format,
            op: args.op,
            pairs,
            mode: format!("random {count} samples"),
            seed: Some(args.seed),
        })
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let plan = make_plan(&args)?;
    let f = plan.format;
    let w = f.width() as usize;
    let file_circuit = match &args.circuit {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let circuit = parse_circuit(&text)?;
            if circuit.qubit_count() < 3 * w {
                bail!("circuit has {} qubits but the format needs {}", circuit.qubit_count(), 3 * w);
            }
            Some(circuit)
        }
        None => None,
    };
    let built: Option<FpBinaryCircuit> = match file_circuit {
        Some(_) => None,
        None => Some(match plan.op {
            FpOp::Add => build_fp_adder_circuit(&f),
            FpOp::Mul => build_fp_multiplier_circuit(&f),
        }),
    };
    // run a circuit from a file over the standard register layout
    let run_file = |circuit: &Circuit, a: u64, b: u64| -> u64 {
        let mut bits = vec![false; circuit.qubit_count()];
        for i in 0..w {
            bits[i] = a >> i & 1 == 1;
            bits[w + i] = b >> i & 1 == 1;
        }
        let out = simulate(circuit, &BasisState::from_bits(&bits));
        (0..w).fold(0u64, |acc, i| acc | (out.bits()[2 * w + i] as u64) << i)
    };
    let reference = |a: u64, b: u64| -> u64 {
        let (va, vb) = (decode(&f, EncodedFp(a)), decode(&f, EncodedFp(b)));
        let r = match plan.op {
            FpOp::Add => softfloat::add(&f, &va, &vb),
            FpOp::Mul => softfloat::mul(&f, &va, &vb),
        };
        encode(&f, &r).expect("reference result is always encodable").0
    };
    let failure = plan
        .pairs
        .par_iter()
        .filter_map(|&(a, b)| {
            let outcome = match (&built, &file_circuit) {
                (Some(op), _) => op.run_checked(EncodedFp(a), EncodedFp(b)).map(|g| g.0),
                (None, Some(circuit)) => Ok(run_file(circuit, a, b)),
                (None, None) => unreachable!(),
            };
            match outcome {
                Err(e) => Some((a, b, None, e)),
                Ok(got) => {
                    let want = reference(a, b);
                    if got != want {
                        Some((a, b, Some((got, want)), String::new()))
                    } else {
                        None
                    }
                }
            }
        })
        .min_by_key(|&(a, b, _, _)| (a, b));
    let total = plan.pairs.len();
    let opname = match plan.op {
        FpOp::Add => "add",
        FpOp::Mul => "mul",
    };
    if args.json {
        let report = serde_json::json!({
            "op": opname,
            "format": args.format,
            "mode": plan.mode,
            "seed": plan.seed,
            "total": total,
            "pass": failure.is_none(),
            "counterexample": failure.as_ref().map(|(a, b, gw, err)| serde_json::json!({
                "a": format!("{a:#x}"),
                "b": format!("{b:#x}"),
                "got": gw.map(|(g, _)| format!("{g:#x}")),
                "want": gw.map(|(_, w)| format!("{w:#x}")),
                "error": if err.is_empty() { None } else { Some(err.clone()) },
            })),
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        if let Some(seed) = plan.seed {
            println!("seed: {seed:#x}");
        }
        let dec = |bits: u64| decode(&f, EncodedFp(bits)).to_f64(&f);
        match &failure {
            None => println!("PASS {total}/{total} ({opname} {}, {})", args.format, plan.mode),
            Some((a, b, Some((got, want)), _)) => {
                println!(
                    "FAIL at a={a:#x} ({}) b={b:#x} ({}): got {got:#x} ({}), want {want:#x} ({})",
                    dec(*a),
                    dec(*b),
                    dec(*got),
                    dec(*want)
                )
            }
            Some((a, b, None, err)) => println!("FAIL at a={a:#x} b={b:#x}: {err}"),
        }
    }
    Ok(if failure.is_none() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(serde::Serialize)]
struct ResourceJson {
    qubits: u64,
    toffoli_count: u64,
    fredkin_count: u64,
    t_count: u64,
    t_depth: u64,
    parallel_t_max: u64,
    kq: u64,
}

impl From<ResourceReport> for ResourceJson {
    fn from(r: ResourceReport) -> Self {
        ResourceJson {
            qubits: r.qubits,
            toffoli_count: r.toffoli_count,
            fredkin_count: r.fredkin_count,
            t_count: r.t_count,
            t_depth: r.t_depth,
            parallel_t_max: r.parallel_t_max,
            kq: r.kq,
        }
    }
}

fn cmd_resources(args: ResourcesArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.circuit)
        .with_context(|| format!("reading {}", args.circuit.display()))?;
    let report = count_resources(&parse_circuit(&text)?);
    match args.out {
        ReportFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&ResourceJson::from(report))?)
        }
        ReportFormat::Csv => {
            println!("qubits,toffoli_count,fredkin_count,t_count,t_depth,parallel_t_max,kq");
            println!(
                "{},{},{},{},{},{},{}",
                report.qubits,
                report.toffoli_count,
                report.fredkin_count,
                report.t_count,
                report.t_depth,
                report.parallel_t_max,
                report.kq
            );
        }
        ReportFormat::Table => {
            println!("qubits          {:>12}", report.qubits);
            println!("toffoli_count   {:>12}", report.toffoli_count);
            println!("fredkin_count   {:>12}", report.fredkin_count);
            println!("t_count         {:>12}", report.t_count);
            println!("t_depth         {:>12}", report.t_depth);
            println!("parallel_t_max  {:>12}", report.parallel_t_max);
            println!("kq              {:>12}", report.kq);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    if args.circuits.len() < 2 {
        bail!("compare needs at least two --circuit files");
    }
    let mut reports = Vec::new();
    for path in &args.circuits {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        reports.push((name, count_resources(&parse_circuit(&text)?)));
    }
    let table = compare_formats(&reports);
    if args.json {
        let rows: Vec<_> = table
            .iter()
            .map(|(a, b, r)| serde_json::json!({"numerator": a, "denominator": b, "kq_ratio": r}))
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        for (name, rep) in &reports {
            println!("{name}: qubits {} t_depth {} kq {}", rep.qubits, rep.t_depth, rep.kq);
        }
        for (a, b, ratio) in &table {
            println!("kq({a}) / kq({b}) = {ratio:.3}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_repro_table(args: ReproArgs) -> Result<ExitCode> {
    let rows: Vec<_> = REFERENCE_COUNTS
        .iter()
        .map(|row| {
            let f = FpFormat::new(row.exponent_bits, row.mantissa_bits).unwrap();
            let circuit = if row.design == "adder" {
                build_fp_adder_circuit(&f).circuit
            } else {
                build_fp_multiplier_circuit(&f).circuit
            };
            (row, count_resources(&circuit))
        })
        .collect();
    let mut out = String::new();
    match args.format {
        TableFormat::Csv => {
            writeln!(
                out,
                "design,width,qubits_measured,qubits_paper,tcount_measured,tcount_paper,\
                 tdepth_measured,tdepth_paper,kq_measured,kq_paper"
            )?;
            for (row, rep) in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    row.design,
                    row.width,
                    rep.qubits,
                    row.qubits,
                    rep.t_count,
                    row.t_count,
                    rep.t_depth,
                    row.t_depth,
                    rep.kq,
                    row.t_depth * row.qubits
                )?;
            }
        }
        TableFormat::Markdown => {
            writeln!(
                out,
                "| design | width | qubits | ref | delta | T-count | ref | delta | T-depth | ref | delta | KQ | KQ ref |"
            )?;
            writeln!(out, "|---|---|---|---|---|---|---|---|---|---|---|---|---|")?;
            for (row, rep) in &rows {
                let dq = 100.0 * (rep.qubits as f64 - row.qubits as f64) / row.qubits as f64;
                let dc = 100.0 * (rep.t_count as f64 - row.t_count as f64) / row.t_count as f64;
                let dd = 100.0 * (rep.t_depth as f64 - row.t_depth as f64) / row.t_depth as f64;
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {dq:+.1}% | {} | {} | {dc:+.1}% | {} | {} | {dd:+.1}% | {} | {} |",
                    row.design,
                    row.width,
                    rep.qubits,
                    row.qubits,
                    rep.t_count,
                    row.t_count,
                    rep.t_depth,
                    row.t_depth,
                    rep.kq,
                    row.t_depth * row.qubits
                )?;
            }
        }
    }
    match &args.out {
        Some(path) => fs::write(path, out).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{out}"),
    }
    Ok(ExitCode::SUCCESS)
}
