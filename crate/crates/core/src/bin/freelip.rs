use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use freelip::cycles::{edge_vector_from_json, fundamental_cycle_basis, greedy_cycle_packing, mu, quotient_norm, rank};
use freelip::embed::{diamond_top_level, half_dim_embedding, large_embedding, mod_p_selection};
use freelip::error::{Error, Result};
use freelip::graph::{family_counts, k2n_base, laakso_base, square, FamilyKind, FamilySpec, TwoPoleGraph, DEFAULT_AUTOMORPHISM_VERTEX_CAP};
use freelip::haar::{bounds_row, BoundsRow};
use freelip::lfnorm::{ae_norm, ae_norm_float, lip_dual, lip_dual_lp};
use freelip::metric::{graph_metric, MetricSpace, Molecule};
use freelip::numeric::{fmt_q, to_f64};
use freelip::projection::{
    average_projection, generate_group, graph_symmetries, minimal_projection_lp, orthogonal_projection, preserves_range,
    ProjectionReport, SignedPerm, DEFAULT_GROUP_CAP,
};
use freelip::random::{random_metric, random_tree, rng};
use freelip::recursive::{check_conditions, BaseGraphProfile};
use freelip::report::{reproduce_table, rows_to_csv};
use freelip::witness::{witness, DEFAULT_ENTRY_CAP};
use freelip::SCHEMA;

#[derive(Parser)]
#[command(name = "freelip", version, about = "Lipschitz free-space norms, cycle spaces and projection constants")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Diamond,
    Multidiamond,
    Laakso,
    RandomMetric,
    RandomTree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjMode {
    Minimal,
    Orthogonal,
    Averaged,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a graph family member or a random instance.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 3)]
        branch: usize,
        /// Size of random instances: points or tree edges.
        #[arg(long, default_value_t = 8)]
        size: usize,
        /// Print closed-form sizes instead of the graph.
        #[arg(long)]
        counts: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Earth-mover norm of a molecule with a dual certificate.
    Norm {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        molecule: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm of an edge vector in ℓ₁(E)/Z(G).
    QuotientNorm {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        vector: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fundamental cycle basis and greedy packing.
    Cyclespace {
        #[arg(long)]
        graph: PathBuf,
        /// Where to write the basis.
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Projection onto the cycle space.
    Projconst {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "cycles")]
        subspace: String,
        #[arg(long, value_enum, default_value_t = ProjMode::Orthogonal)]
        mode: ProjMode,
        /// JSON `{"generators":[{"name","perm","sign"}]}` of signed edge maps.
        #[arg(long)]
        generators: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Profile of a base graph for the recursive construction.
    Recursive {
        #[arg(long)]
        base: String,
        #[arg(long)]
        check_conditions: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hierarchical witness `C_r + A_r`.
    Witness {
        #[arg(long)]
        base: String,
        #[arg(long)]
        r: usize,
        /// Comma-separated `t` for rounds 2, 3, …
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Haar bounds for diamonds and multibranching diamonds.
    Haar {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        branch: usize,
        /// CSV file for the bounds row.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Plot data `n lower witness upper` for levels 1..=n.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Large ℓ₁ subspaces of the free space.
    Embed {
        #[arg(long)]
        space: Option<PathBuf>,
        /// Graph for `modp:P`.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// `half`, `modp:P` or `diamond-top`.
        #[arg(long, default_value = "half")]
        strategy: String,
        /// Level for `diamond-top`.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every checked claim and print one table.
    Reproduce {
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, mut v: Value) -> Result<()> {
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), json!(SCHEMA));
    }
    emit(out, &(serde_json::to_string_pretty(&v)? + "\n"))
}

fn base_graph(name: &str) -> Result<TwoPoleGraph> {
    if let Some(k) = name.strip_prefix("k2n:") {
        let k: usize = k.parse().map_err(|_| Error::Invalid(format!("bad branching '{k}'")))?;
        if k < 2 {
            return Err(Error::Invalid("branching must be at least 2".into()));
        }
        return Ok(k2n_base(k));
    }
    match name {
        "square" => Ok(square()),
        "laakso" => Ok(laakso_base()),
        path => TwoPoleGraph::from_json(&read(Path::new(path))?),
    }
}

#[derive(Deserialize)]
struct GeneratorFile {
    generators: Vec<GeneratorJson>,
}

#[derive(Deserialize)]
struct GeneratorJson {
    name: String,
    perm: Vec<usize>,
    sign: Option<Vec<i8>>,
}

fn load_generators(p: &Path, dim: usize) -> Result<Vec<(String, SignedPerm)>> {
    let f: GeneratorFile = serde_json::from_str(&read(p)?)?;
    f.generators
        .into_iter()
        .map(|g| {
            let sign = g.sign.unwrap_or_else(|| vec![1; g.perm.len()]);
            let sp = SignedPerm { perm: g.perm, sign };
            if sp.dim() != dim || !sp.is_valid() {
                return Err(Error::Invalid(format!("generator '{}' is not a signed permutation of {dim} edges", g.name)));
            }
            Ok((g.name, sp))
        })
        .collect()
}

fn projconst(graph: &Path, subspace: &str, mode: ProjMode, generators: Option<&Path>) -> Result<Value> {
    if subspace != "cycles" {
        return Err(Error::Invalid(format!("unknown subspace '{subspace}'")));
    }
    let g = TwoPoleGraph::from_json(&read(graph)?)?;
    let m = g.edge_count();
    let z = fundamental_cycle_basis(&g).vectors;
    let orth = orthogonal_projection(&z, m)?;
    let gens = match generators {
        Some(p) => load_generators(p, m)?,
        None => graph_symmetries(&g, DEFAULT_AUTOMORPHISM_VERTEX_CAP)?
            .into_iter()
            .filter(|s| preserves_range(&orth, s))
            .enumerate()
            .map(|(i, s)| (format!("aut{i}"), s))
            .collect(),
    };
    let mut extra = json!({ "mode": match mode { ProjMode::Minimal => "minimal", ProjMode::Orthogonal => "orthogonal", ProjMode::Averaged => "averaged" } });
    let op = match mode {
        ProjMode::Orthogonal => orth,
        ProjMode::Minimal | ProjMode::Averaged => {
            let mp = minimal_projection_lp(&z, m)?;
            extra["lambda_float"] = json!(mp.lambda_float);
            extra["lambda_minimal"] = json!(fmt_q(&mp.lambda));
            if let ProjMode::Averaged = mode {
                let perms: Vec<SignedPerm> = gens.iter().map(|(_, s)| s.clone()).collect();
                let group = generate_group(&perms, m, DEFAULT_GROUP_CAP)?;
                extra["group_order"] = json!(group.len());
                average_projection(&mp.projection, &group)?
            } else {
                mp.projection
            }
        }
    };
    let report = ProjectionReport::new(op, z, &gens);
    extra["dimension"] = json!(m);
    extra["generators_checked"] = json!(gens.len());
    extra["norm_l1_float"] = json!(to_f64(&report.norm_l1));
    let mut v = report.to_json();
    if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
        a.extend(b);
    }
    Ok(v)
}

fn norm(space: &Path, molecule: &Path, mode: Mode) -> Result<Value> {
    let s = MetricSpace::from_json(&read(space)?)?;
    let m = Molecule::from_json(&s, &read(molecule)?)?;
    let named = |f: &[String]| -> Value {
        s.points().iter().zip(f).map(|(p, v)| (p.clone(), json!(v))).collect::<serde_json::Map<_, _>>().into()
    };
    Ok(match mode {
        Mode::Exact => {
            let (value, plan) = ae_norm(&s, &m)?;
            let dual = lip_dual(&s, &m, None)?;
            let f: Vec<String> = dual.f.values.iter().map(fmt_q).collect();
            json!({
                "mode": "exact",
                "value": fmt_q(&value),
                "value_float": to_f64(&value),
                "plan": plan.to_json(&s),
                "dual": { "value": fmt_q(&dual.value), "f": named(&f) },
                "gap": fmt_q(&(&value - &dual.value)),
            })
        }
        Mode::Float => {
            let value = ae_norm_float(&s, &m)?;
            let (f, dv): (Vec<f64>, f64) = lip_dual_lp(&s, &m, None)?;
            let fs: Vec<String> = f.iter().map(|x| format!("{x}")).collect();
            json!({
                "mode": "float",
                "value": value,
                "dual": { "value": dv, "f": named(&fs) },
                "gap": (value - dv).abs(),
            })
        }
    })
}

fn embed(space: Option<&Path>, graph: Option<&Path>, strategy: &str, n: usize) -> Result<Value> {
    if strategy == "diamond-top" {
        let (s, r) = diamond_top_level(n)?;
        let mut v = r.to_json(&s);
        v["strategy"] = json!(strategy);
        return Ok(v);
    }
    if let Some(p) = strategy.strip_prefix("modp:") {
        let p: usize = p.parse().map_err(|_| Error::Invalid(format!("bad modulus '{p}'")))?;
        let g = graph.ok_or_else(|| Error::Invalid("modp needs --graph".into()))?;
        let g = TwoPoleGraph::from_json(&read(g)?)?;
        let s = graph_metric(&g)?;
        let y = mod_p_selection(&g, p)?;
        let mut v = large_embedding(&s, &y)?.to_json(&s);
        v["strategy"] = json!(strategy);
        return Ok(v);
    }
    if strategy != "half" {
        return Err(Error::Invalid(format!("unknown strategy '{strategy}'")));
    }
    let s = match (space, graph) {
        (Some(p), _) => MetricSpace::from_json(&read(p)?)?,
        (None, Some(g)) => graph_metric(&TwoPoleGraph::from_json(&read(g)?)?)?,
        (None, None) => return Err(Error::Invalid("half needs --space or --graph".into())),
    };
    let mut v = half_dim_embedding(&s)?.to_json(&s);
    v["strategy"] = json!(strategy);
    Ok(v)
}

fn csv_of(rows: &[BoundsRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("UTF-8"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen { family, level, branch, size, counts, out } => {
            let kind = match family {
                Family::Diamond => FamilyKind::Diamond,
                Family::Multidiamond => FamilyKind::Multidiamond(branch),
                Family::Laakso => FamilyKind::Laakso,
                Family::RandomMetric => return emit_json(out.as_deref(), random_metric(size, &mut rng(cli.seed))?.to_json()),
                Family::RandomTree => return emit_json(out.as_deref(), random_tree(size, &mut rng(cli.seed))?.to_json()),
            };
            let spec = FamilySpec { kind, level };
            if counts {
                let c = family_counts(&spec)?;
                emit_json(
                    out.as_deref(),
                    json!({"edges": c.edges.to_string(), "vertices": c.vertices.to_string(), "cycle_dim": c.cycle_dim.to_string()}),
                )
            } else {
                emit_json(out.as_deref(), spec.build()?.to_json())
            }
        }
        Cmd::Norm { space, molecule, mode, out } => emit_json(out.as_deref(), norm(&space, &molecule, mode)?),
        Cmd::QuotientNorm { graph, vector, out } => {
            let g = TwoPoleGraph::from_json(&read(&graph)?)?;
            let x = edge_vector_from_json(&g, &read(&vector)?)?;
            let z = fundamental_cycle_basis(&g).vectors;
            let v = quotient_norm(&g, &x, &z)?;
            emit_json(out.as_deref(), json!({"value": fmt_q(&v), "value_float": to_f64(&v)}))
        }
        Cmd::Cyclespace { graph, basis, out } => {
            let g = TwoPoleGraph::from_json(&read(&graph)?)?;
            let b = fundamental_cycle_basis(&g);
            if let Some(p) = &basis {
                emit_json(Some(p), b.to_json(&g))?;
            }
            let packing = greedy_cycle_packing(&g);
            let cycles: Vec<Vec<&str>> =
                packing.iter().map(|c| c.iter().map(|&e| g.edges()[e].id.as_str()).collect()).collect();
            emit_json(
                out.as_deref(),
                json!({"mu": mu(&g), "rank": rank(&b.vectors), "greedy_packing": packing.len(), "packing": cycles}),
            )
        }
        Cmd::Projconst { graph, subspace, mode, generators, out } => {
            emit_json(out.as_deref(), projconst(&graph, &subspace, mode, generators.as_deref())?)
        }
        Cmd::Recursive { base, check_conditions: check, out } => {
            let b = base_graph(&base)?;
            let mut v = json!({"base": base});
            if check {
                v["conditions"] = check_conditions(&b)?.to_json();
            }
            match BaseGraphProfile::new(&b) {
                Ok(p) => v["profile"] = p.to_json(),
                Err(e) if check => v["profile_error"] = json!(e.to_string()),
                Err(e) => return Err(e),
            }
            emit_json(out.as_deref(), v)
        }
        Cmd::Witness { base, r, schedule, out } => {
            let p = BaseGraphProfile::new(&base_graph(&base)?)?;
            let w = witness(&p, r, schedule.as_deref(), DEFAULT_ENTRY_CAP)?;
            emit_json(out.as_deref(), w.to_json())
        }
        Cmd::Haar { n, branch, report, plot } => {
            let row = bounds_row(n, branch)?;
            if let Some(p) = &plot {
                let mut text = String::from("# n lower witness upper\n");
                for i in 1..=n {
                    let r = bounds_row(i, branch)?;
                    let f = |s: &str| freelip::numeric::parse_q(s).map(|x| to_f64(&x));
                    text += &format!("{} {} {} {}\n", i, f(&r.lower_bound)?, f(&r.witness_value)?, f(&r.upper_bound)?);
                }
                emit(Some(p), &text)?;
            }
            let csv = csv_of(std::slice::from_ref(&row))?;
            match &report {
                Some(p) => {
                    emit(Some(p), &csv)?;
                    emit_json(None, json!({"row": row, "report": p.display().to_string()}))
                }
                None => emit(None, &csv),
            }
        }
        Cmd::Embed { space, graph, strategy, n, out } => {
            emit_json(out.as_deref(), embed(space.as_deref(), graph.as_deref(), &strategy, n)?)
        }
        Cmd::Reproduce { json: as_json, out } => {
            let rows = reproduce_table(cli.seed);
            if as_json {
                emit_json(out.as_deref(), json!({"seed": cli.seed, "rows": rows}))
            } else {
                emit(out.as_deref(), &rows_to_csv(&rows)?)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
