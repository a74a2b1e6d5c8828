//! `eulercalc`: command-line front end.
//!
//! Exit status: 0 on success, 1 when the computation ran and the
//! mathematical claim is false, 2 on data or usage errors and on
//! inconclusive verifications.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use eulercalc::eulerian::{
    self, denote, diagonal, enumerate, EulerianSequence, SequenceFile, Verdict,
};
use eulercalc::falg::{parse_plain_degree, Pairing};
use eulercalc::grouphom::GroupHomology;
use eulercalc::instances::{self, InstanceBundle, MapKind};
use eulercalc::opcatalog::{self, Catalog, OpLabel};
use eulercalc::oracle::{self, PolyElement, SteenrodWord};
use eulercalc::repring::{self, Library, Space};
use eulercalc::wreath::{self, WreathData, WreathFile};
use eulercalc::{Error, RODegree};

const SCHEMA: &str = "eulercalc.report/1";

#[derive(Parser)]
#[command(
    name = "eulercalc",
    version,
    about = "Eulerian sequences and equivariant Steenrod operations"
)]
struct Cli {
    /// Emit a versioned JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Data directory (overrides EULERCALC_DATA_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SeqArgs {
    /// Shipped instance, e.g. classical2, classical_p3, c2equivariant.
    #[arg(long)]
    instance: String,
    /// Sequence file in the instance's module.
    #[arg(long, conflicts_with = "named")]
    sequence: Option<PathBuf>,
    /// A named sequence of the instance, e.g. beta.
    #[arg(long)]
    named: Option<String>,
    /// Shift applied to a named sequence.
    #[arg(long, default_value_t = 0, requires = "named")]
    shift: usize,
}

#[derive(Subcommand)]
enum Command {
    /// List shipped instances.
    Instances,
    /// Print a named sequence in file form.
    Export {
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// Check the Eulerian conditions through the horizon.
    Verify {
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// Degree ‖χ‖ of a sequence.
    Degree {
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// χ[k]: prepend k zeros.
    Shift {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reindex along the k-th power of the Euler element.
    Reindex {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Push through a restriction map of the instance.
    Restrict {
        #[command(flatten)]
        seq: SeqArgs,
        /// Subgroup name.
        #[arg(long)]
        to: String,
    },
    /// Push through a modified geometric fixed-point map of the instance.
    Fix {
        #[command(flatten)]
        seq: SeqArgs,
        /// Subgroup K, by isomorphism type.
        #[arg(long)]
        to: String,
    },
    /// Verify the k-fold diagonal image.
    Diagonal {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Enumerate all Eulerian sequences in a range of degrees.
    Enumerate(EnumerateArgs),
    /// Express a sequence through the named ones and their shifts.
    Denote {
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// χ1 ⊙ χ2 over wreath data.
    Product {
        #[command(flatten)]
        wreath: WreathArgs,
        /// Sequence file over B_n.
        #[arg(long)]
        left: PathBuf,
        /// Sequence file over B_m.
        #[arg(long)]
        right: PathBuf,
    },
    /// Check the axioms of wreath data.
    ValidateWreath {
        #[command(flatten)]
        wreath: WreathArgs,
        /// Horizon for synthetic data.
        #[arg(long, default_value_t = 4)]
        horizon: usize,
    },
    /// Steenrod algebra on polynomial rings.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Group homology from a free resolution.
    #[command(subcommand)]
    Grouphom(GrouphomCmd),
    /// Character-table computations.
    #[command(subcommand)]
    Repring(RepringCmd),
    /// Operation labels.
    #[command(subcommand)]
    Ops(OpsCmd),
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    instance: String,
    #[arg(long)]
    weight: usize,
    /// Largest entry degree (integer-graded instances).
    #[arg(long)]
    max: Option<i64>,
    /// Comma-separated base degrees `D`; entry t lies in t(n−1)V − D.
    #[arg(long, value_delimiter = ',', conflicts_with = "max")]
    degrees: Vec<String>,
    /// Horizon for `--degrees`.
    #[arg(long, default_value_t = 20)]
    horizon: usize,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct WreathArgs {
    /// Wreath data file.
    #[arg(long)]
    wreath: Option<PathBuf>,
    /// Synthetic ladder data `n,m`.
    #[arg(long, value_delimiter = ',')]
    synthetic: Option<Vec<usize>>,
    /// Weight-one data `p,N` on F_p[t]/(t^{N+1}).
    #[arg(long, value_delimiter = ',')]
    weight_one: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Apply a word to a polynomial.
    Apply {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long)]
        word: String,
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 6)]
        vars: usize,
    },
    /// Admissible normal form of a word.
    Adem {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long)]
        word: String,
    },
    /// ν(q) in F_p.
    Nu {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
    },
    /// Compare composition with the normal form on all monomials.
    ComposeCheck {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = 6)]
        degree: u32,
    },
}

#[derive(Subcommand)]
enum GrouphomCmd {
    Compute {
        #[arg(long)]
        group: String,
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 10)]
        max: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Projective,
    Lens,
}

#[derive(Subcommand)]
enum RepringCmd {
    /// One-dimensional characters (real at p = 2, p-th-root valued otherwise).
    Irr1 {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 2)]
        p: u32,
    },
    /// Decompose a degree expression.
    Degree {
        #[arg(long)]
        group: String,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
    /// Orientability fold and ε for (G, p).
    Fold {
        #[arg(long)]
        group: String,
        #[arg(long)]
        p: u32,
    },
    /// Components of the fixed points of P(V) or L_p(V).
    Components {
        #[arg(long)]
        group: String,
        #[arg(long)]
        expr: String,
        #[arg(long, value_enum)]
        space: SpaceArg,
        #[arg(long, default_value_t = 3)]
        p: u32,
    },
}

#[derive(Subcommand)]
enum OpsCmd {
    Degree {
        #[arg(long)]
        label: String,
    },
    Restrict {
        #[arg(long)]
        label: String,
        /// Subgroup name.
        #[arg(long)]
        to: String,
    },
    Fix {
        #[arg(long)]
        label: String,
        /// Subgroup K, by isomorphism type.
        #[arg(long)]
        to: String,
    },
    Underlying {
        #[arg(long)]
        label: String,
    },
    /// All labels for a group and prime up to a multiplier.
    List {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        max_k: u64,
    },
}

/// A finished report: text, JSON body and exit status.
struct Report {
    text: String,
    body: Value,
    status: u8,
}

impl Report {
    fn ok(text: String, body: Value) -> Report {
        Report {
            text,
            body,
            status: 0,
        }
    }
}

fn verdict_status(v: &Verdict) -> u8 {
    match v {
        Verdict::Holds { .. } => 0,
        Verdict::Fails { .. } => 1,
        Verdict::Inconclusive { .. } => 2,
    }
}

fn load_sequence(a: &SeqArgs) -> eulercalc::Result<(Arc<InstanceBundle>, EulerianSequence)> {
    let bundle = instances::load(&a.instance)?;
    let chi = match (&a.sequence, &a.named) {
        (Some(path), _) => {
            read_sequence(path, bundle.pairing.clone(), &|s| bundle.parse_degree(s))?
        }
        (None, Some(name)) => bundle.named(name)?.sequence.shift(a.shift),
        (None, None) => return Err(Error::Precondition("give --sequence or --named".into())),
    };
    Ok((bundle, chi))
}

fn read_sequence(
    path: &Path,
    ambient: Arc<dyn Pairing>,
    parse: &dyn Fn(&str) -> eulercalc::Result<RODegree>,
) -> eulercalc::Result<EulerianSequence> {
    let text = eulercalc::read_file(path)?;
    SequenceFile::parse(&path.display().to_string(), &text)?.build(ambient, parse)
}

fn sequence_json(chi: &EulerianSequence) -> Value {
    serde_json::to_value(SequenceFile::from_sequence(chi)).expect("sequence file serializes")
}

fn write_out(out: &Option<PathBuf>, chi: &EulerianSequence) -> eulercalc::Result<()> {
    if let Some(path) = out {
        let text =
            serde_json::to_string_pretty(&SequenceFile::from_sequence(chi)).expect("serializes");
        std::fs::write(path, text + "\n").map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

fn load_wreath(a: &WreathArgs, horizon: usize) -> eulercalc::Result<WreathData> {
    if let Some(path) = &a.wreath {
        let text = eulercalc::read_file(path)?;
        WreathFile::parse(&path.display().to_string(), &text)?.build()
    } else if let Some(nm) = &a.synthetic {
        if nm.len() != 2 {
            return Err(Error::Precondition("--synthetic takes n,m".into()));
        }
        wreath::synthetic(nm[0], nm[1], horizon)
    } else if let Some(pn) = &a.weight_one {
        if pn.len() != 2 {
            return Err(Error::Precondition("--weight-one takes p,N".into()));
        }
        wreath::weight_one(pn[0] as u32, pn[1])
    } else {
        Err(Error::Precondition(
            "give --wreath, --synthetic or --weight-one".into(),
        ))
    }
}

fn mapped(seq: &SeqArgs, kind: MapKind, to: &str) -> eulercalc::Result<Report> {
    let (bundle, chi) = load_sequence(seq)?;
    let m = bundle.structure_map(kind, to)?;
    let img = eulerian::map_sequence(
        &chi,
        &m.map,
        m.target.pairing.clone(),
        m.euler.clone(),
        m.stability.clone(),
    )?;
    let degree = img.degree().ok().map(|d| d.to_string());
    let text = format!(
        "{} -> {}: {}\ndegree: {}",
        bundle.name,
        m.target.name,
        img.format(),
        degree.as_deref().unwrap_or("undetermined")
    );
    Ok(Report::ok(
        text,
        json!({"target": m.target.name, "sequence": sequence_json(&img), "degree": degree}),
    ))
}

fn enumerate_cmd(a: &EnumerateArgs) -> eulercalc::Result<Report> {
    let bundle = instances::load(&a.instance)?;
    if a.weight != bundle.weight {
        return Err(Error::Precondition(format!(
            "{} carries weight {}, not {}",
            bundle.name, bundle.weight, a.weight
        )));
    }
    let step = &bundle.stability * (a.weight as i64 - 1);
    let targets: Vec<(RODegree, usize)> = if !a.degrees.is_empty() {
        a.degrees
            .iter()
            .map(|d| Ok((bundle.parse_degree(d)?, a.horizon)))
            .collect::<eulercalc::Result<_>>()?
    } else {
        let max = a
            .max
            .ok_or_else(|| Error::Precondition("give --max or --degrees".into()))?;
        if step.is_virtual()
            || step.labels().any(|l| l != eulercalc::rodegree::TRIVIAL)
            || step.trivial_part() <= 0
        {
            return Err(Error::Precondition(
                "--max needs an integer-graded instance; use --degrees".into(),
            ));
        }
        let s = step.trivial_part();
        // Entry t has degree t·s − D ≤ max.
        (-max..=max)
            .filter(|d| max + d >= 0)
            .map(|d| (RODegree::trivial(d), ((max + d) / s) as usize))
            .collect()
    };
    let slices = enumerate(
        bundle.pairing.clone(),
        &bundle.euler,
        a.weight,
        &bundle.stability,
        &targets,
    )?;
    let catalog = bundle.catalog();
    let mut lines = Vec::new();
    let mut items = Vec::new();
    for s in &slices {
        for chi in &s.basis {
            let name = match denote(chi, &catalog)? {
                eulerian::Denotation::Named { terms } => terms
                    .iter()
                    .map(|(n, k, c)| {
                        if *c == 1 {
                            format!("{n}[{k}]")
                        } else {
                            format!("{c}*{n}[{k}]")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" + "),
                eulerian::Denotation::Unnamed { .. } => "unnamed".into(),
            };
            lines.push(format!(
                "D = {}, horizon {}: {name} = {}",
                s.base_degree,
                s.horizon,
                chi.format()
            ));
            items.push(json!({"base_degree": s.base_degree.to_string(), "horizon": s.horizon, "name": name, "sequence": sequence_json(chi)}));
        }
    }
    lines.push(format!("{} sequence(s)", items.len()));
    Ok(Report::ok(
        lines.join("\n"),
        json!({"count": items.len(), "sequences": items}),
    ))
}

fn run(cli: &Cli) -> eulercalc::Result<Report> {
    Ok(match &cli.command {
        Command::Instances => {
            let mut lines = Vec::new();
            let mut items = Vec::new();
            for name in instances::NAMES {
                let b = instances::load(name)?;
                let named: Vec<&str> = b.named.iter().map(|n| n.name.as_str()).collect();
                lines.push(format!(
                    "{name}: G = {}, p = {}, weight {}, named {}",
                    b.group,
                    b.prime,
                    b.weight,
                    named.join(", ")
                ));
                items.push(json!({"name": name, "group": b.group, "prime": b.prime, "weight": b.weight, "named": named}));
            }
            Report::ok(lines.join("\n"), json!({"instances": items}))
        }
        Command::Export { seq } => {
            let (_, chi) = load_sequence(seq)?;
            let v = sequence_json(&chi);
            Report::ok(
                serde_json::to_string_pretty(&v).expect("serializes"),
                json!({"sequence": v}),
            )
        }
        Command::Verify { seq } => {
            let (_, chi) = load_sequence(seq)?;
            let v = chi.verify();
            Report {
                text: v.to_string(),
                status: verdict_status(&v),
                body: serde_json::to_value(&v).expect("serializes"),
            }
        }
        Command::Degree { seq } => {
            let (_, chi) = load_sequence(seq)?;
            match chi.degree() {
                Ok(d) => Report::ok(d.to_string(), json!({"degree": d.to_string()})),
                Err(Error::Degree(m)) => Report {
                    text: format!("no degree: {m}"),
                    body: json!({"degree": null, "reason": m}),
                    status: 1,
                },
                Err(e) => return Err(e),
            }
        }
        Command::Shift { seq, k, out } => {
            let (_, chi) = load_sequence(seq)?;
            let s = chi.shift(*k);
            write_out(out, &s)?;
            Report::ok(s.format(), json!({"sequence": sequence_json(&s)}))
        }
        Command::Reindex { seq, k, out } => {
            let (_, chi) = load_sequence(seq)?;
            let s = chi.reindex(*k)?;
            write_out(out, &s)?;
            Report::ok(s.format(), json!({"sequence": sequence_json(&s)}))
        }
        Command::Restrict { seq, to } => mapped(seq, MapKind::Restriction, to)?,
        Command::Fix { seq, to } => mapped(seq, MapKind::ModifiedFixedPoints, to)?,
        Command::Diagonal { seq, k } => {
            let (_, chi) = load_sequence(seq)?;
            let ps = diagonal(&chi, *k)?;
            let v = ps.verify();
            let h = chi.homology();
            let entries: Vec<String> = ps.entries.iter().map(|x| x.format(h)).collect();
            Report {
                text: format!("Δ_{k}: ({})\n{v}", entries.join(", ")),
                status: verdict_status(&v),
                body: json!({"entries": entries, "verdict": v}),
            }
        }
        Command::Enumerate(a) => enumerate_cmd(a)?,
        Command::Denote { seq } => {
            let (bundle, chi) = load_sequence(seq)?;
            let d = denote(&chi, &bundle.catalog())?;
            match opcatalog::denotation_labels(&bundle, &d) {
                Ok(labels) => {
                    let parts: Vec<String> = labels
                        .iter()
                        .map(|(c, l)| {
                            if *c == 1 {
                                l.to_string()
                            } else {
                                format!("{c}*{l}")
                            }
                        })
                        .collect();
                    let text = if parts.is_empty() {
                        "0".to_string()
                    } else {
                        parts.join(" + ")
                    };
                    Report::ok(text, json!({"denotation": d, "labels": parts}))
                }
                Err(_) => Report {
                    text: "not a combination of named sequences".into(),
                    body: json!({"denotation": d}),
                    status: 1,
                },
            }
        }
        Command::Product {
            wreath,
            left,
            right,
        } => {
            let w = load_wreath(wreath, 8)?;
            let x = read_sequence(left, w.bn.clone(), &parse_plain_degree)?;
            let y = read_sequence(right, w.bm.clone(), &parse_plain_degree)?;
            let z = wreath::product(&x, &y, &w)?;
            let degree = z.degree().ok().map(|d| d.to_string());
            Report::ok(
                format!(
                    "{}\ndegree: {}",
                    z.format(),
                    degree.as_deref().unwrap_or("undetermined")
                ),
                json!({"sequence": sequence_json(&z), "degree": degree}),
            )
        }
        Command::ValidateWreath { wreath, horizon } => {
            let w = load_wreath(wreath, *horizon)?;
            let samples = if wreath.synthetic.is_some() {
                wreath::synthetic_samples(&w)?
            } else {
                wreath::default_samples(&w, 12)?
            };
            let r = wreath::validate(&w, &samples);
            let mut text = format!(
                "{}: checked {} pullback, {} recursion, {} degree conditions",
                w.name, r.checked[0], r.checked[1], r.checked[2]
            );
            for f in &r.failures {
                text.push_str(&format!("\n{:?}: {}", f.axiom, f.witness));
            }
            Report {
                text,
                status: if r.ok() { 0 } else { 1 },
                body: serde_json::to_value(&r).expect("serializes"),
            }
        }
        Command::Oracle(cmd) => oracle_cmd(cmd)?,
        Command::Grouphom(GrouphomCmd::Compute { group, p, max }) => {
            let lib = Library::load_default()?;
            let g = lib.group(group)?;
            let h = GroupHomology::compute(g, *p, *max)?;
            let dims = h.dims();
            let d2 = h.resolution().boundary_squares_vanish();
            Report {
                text: format!("dims H_0..H_{max}: {dims:?}\nboundary squares vanish: {d2}"),
                status: if d2 { 0 } else { 1 },
                body: json!({"dims": dims, "boundary_squares_vanish": d2}),
            }
        }
        Command::Repring(cmd) => repring_cmd(cmd)?,
        Command::Ops(cmd) => ops_cmd(cmd)?,
    })
}

fn oracle_cmd(cmd: &OracleCmd) -> eulercalc::Result<Report> {
    Ok(match cmd {
        OracleCmd::Apply {
            p,
            word,
            poly,
            vars,
        } => {
            let w = SteenrodWord::parse(*p, word)?;
            let x = PolyElement::parse(*p, *vars, poly)?;
            let y = oracle::apply(&w, &x)?;
            Report::ok(y.to_string(), json!({"result": y.to_string()}))
        }
        OracleCmd::Adem { p, word } => {
            let w = SteenrodWord::parse(*p, word)?;
            let c = oracle::adem_normal_form(&w)?;
            let s = oracle::format_combination(*p, &c);
            Report::ok(s.clone(), json!({"normal_form": s}))
        }
        OracleCmd::Nu { p, q } => {
            let v = oracle::nu(*q, *p)?;
            Report::ok(v.to_string(), json!({"nu": v}))
        }
        OracleCmd::ComposeCheck {
            p,
            left,
            right,
            vars,
            degree,
        } => {
            let l = SteenrodWord::parse(*p, left)?;
            let r = SteenrodWord::parse(*p, right)?;
            let rep = oracle::compose_check(&l, &r, *vars, *degree, &oracle::adem_normal_form)?;
            let text = match &rep.witness {
                None => format!("holds on {} monomials", rep.monomials_checked),
                Some(m) => format!("differs on {m}"),
            };
            Report {
                text,
                status: if rep.holds { 0 } else { 1 },
                body: serde_json::to_value(&rep).expect("serializes"),
            }
        }
    })
}

fn repring_cmd(cmd: &RepringCmd) -> eulercalc::Result<Report> {
    let lib = Library::load_default()?;
    Ok(match cmd {
        RepringCmd::Irr1 { group, p } => {
            let t = lib.table(group)?;
            let set = opcatalog::twist_set(&t, *p)?;
            let labels: Vec<&str> = set.labels();
            Report::ok(labels.join(", "), json!({"labels": labels}))
        }
        RepringCmd::Degree { group, expr } => {
            let t = lib.table(group)?;
            let d = t.parse_degree(expr)?;
            let dim = t.dimension(&d)?;
            Report::ok(
                format!("{d} (dimension {dim})"),
                json!({"degree": d.to_string(), "dimension": dim}),
            )
        }
        RepringCmd::Fold { group, p } => {
            let g = lib.group(group)?;
            let fold = repring::orientability_fold(g.order(), *p);
            let eps = repring::epsilon(g.order(), *p);
            let euler = repring::euler_degree(&*lib.table(group)?, *p);
            Report::ok(
                format!("fold {fold}, epsilon {eps}, Euler degree {euler}"),
                json!({"fold": fold, "epsilon": eps, "euler_degree": euler.to_string()}),
            )
        }
        RepringCmd::Components {
            group,
            expr,
            space,
            p,
        } => {
            let t = lib.table(group)?;
            let v = t.parse_degree(expr)?;
            let sp = match space {
                SpaceArg::Projective => Space::Projective,
                SpaceArg::Lens => Space::Lens(*p),
            };
            let comps = repring::fixed_components(&t, &v, sp)?;
            let parts: Vec<String> = comps.iter().map(|(l, m)| format!("{l}:{m}")).collect();
            Report::ok(
                format!("{} component(s): {}", comps.len(), parts.join(", ")),
                json!({"count": comps.len(), "components": comps}),
            )
        }
    })
}

fn ops_cmd(cmd: &OpsCmd) -> eulercalc::Result<Report> {
    let cat = Catalog::load_default()?;
    Ok(match cmd {
        OpsCmd::Degree { label } => {
            let l = OpLabel::parse(label)?;
            let d = cat.degree(&l)?;
            Report::ok(
                d.to_string(),
                json!({"label": l.to_string(), "degree": d.to_string()}),
            )
        }
        OpsCmd::Restrict { label, to } => {
            let l = OpLabel::parse(label)?;
            let k = cat.subgroup_by_name(&l.group, to)?;
            let r = cat.restrict_label(&l, &k)?;
            Report::ok(r.to_string(), json!({"label": r.to_string()}))
        }
        OpsCmd::Fix { label, to } => {
            let l = OpLabel::parse(label)?;
            let k = cat.subgroup_by_name(&l.group, to)?;
            let r = cat.mod_geo_fix_label(&l, &k)?;
            Report::ok(r.to_string(), serde_json::to_value(&r).expect("serializes"))
        }
        OpsCmd::Underlying { label } => {
            let l = OpLabel::parse(label)?;
            let w = cat.underlying(&l)?;
            Report::ok(w.to_string(), json!({"word": w.to_string()}))
        }
        OpsCmd::List { group, p, max_k } => {
            let labels: Vec<String> = cat
                .labels(group, *p, *max_k)?
                .iter()
                .map(|l| l.to_string())
                .collect();
            Report::ok(labels.join("\n"), json!({"labels": labels}))
        }
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Instances => "instances",
        Command::Export { .. } => "export",
        Command::Verify { .. } => "verify",
        Command::Degree { .. } => "degree",
        Command::Shift { .. } => "shift",
        Command::Reindex { .. } => "reindex",
        Command::Restrict { .. } => "restrict",
        Command::Fix { .. } => "fix",
        Command::Diagonal { .. } => "diagonal",
        Command::Enumerate(_) => "enumerate",
        Command::Denote { .. } => "denote",
        Command::Product { .. } => "product",
        Command::ValidateWreath { .. } => "validate-wreath",
        Command::Oracle(_) => "oracle",
        Command::Grouphom(_) => "grouphom",
        Command::Repring(_) => "repring",
        Command::Ops(_) => "ops",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(dir) = &cli.data_dir {
        if !dir.is_dir() {
            eprintln!("error: data directory {} does not exist", dir.display());
            return ExitCode::from(2);
        }
        std::env::set_var("EULERCALC_DATA_DIR", dir);
    }
    let name = command_name(&cli.command);
    match run(&cli) {
        Ok(r) => {
            if cli.json {
                let mut body = r.body;
                if !body.is_object() {
                    body = json!({"result": body});
                }
                let obj = body.as_object_mut().expect("object");
                obj.insert("schema".into(), json!(SCHEMA));
                obj.insert("command".into(), json!(name));
                obj.insert("status".into(), json!(r.status));
                println!(
                    "{}",
                    serde_json::to_string_pretty(&body).expect("serializes")
                );
            } else {
                println!("{}", r.text);
            }
            ExitCode::from(r.status)
        }
        Err(e) => {
            if cli.json {
                let body =
                    json!({"schema": SCHEMA, "command": name, "status": 2, "error": e.to_string()});
                println!(
                    "{}",
                    serde_json::to_string_pretty(&body).expect("serializes")
                );
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
