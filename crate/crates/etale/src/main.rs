//! Command-line surface: parse spec files, dispatch to the library, and
//! emit deterministic machine-readable reports. Exit codes: 0 on success,
//! 1 on a domain error, 2 on a usage error. Timing goes to stderr so that
//! report bytes depend only on inputs and options.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use etale::cocycle::{bundle_from_cocycle, PointedCocycle};
use etale::cover::{localize, OpenCover};
use etale::crossed::{selfequivalence_crossed_module, CrossedModule};
use etale::descent::{length_spectrum, DescentOptions};
use etale::extension::{
    classify_extensions, extension_exists, extension_obstruction, outer_structure, QModule,
};
use etale::groupoid::FiniteGroupoid;
use etale::hom::GroupoidHom;
use etale::isometry::{parse_word, IsometryGroup};
use etale::morphism::{pointed_isomorphism, MorphismSpace, PointedIsoOutcome};
use etale::report::{digest, Report, ReportFormat, Table};
use etale::specfile::{parse_cover, parse_hom, parse_spec, SpecFile};

#[derive(Parser)]
#[command(name = "etale", version, about = "Finite etale groupoid workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Structured)]
    format: Format,
    /// Cap on exhaustive-search steps.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    max_size: usize,
    /// Seed for randomized starts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Structured,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a spec file against its kind's axioms.
    Validate { spec: PathBuf },
    /// Orbit partition of a groupoid spec.
    Orbits { spec: PathBuf },
    /// Localize a groupoid over a cover and check the projection.
    Localize {
        spec: PathBuf,
        #[arg(long)]
        cover: PathBuf,
    },
    /// Enumerate pointed morphism classes or build the morphism groupoid.
    Morphisms {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Star object, by label in the source groupoid.
        #[arg(long)]
        star: String,
        /// List the classes (default).
        #[arg(long)]
        enumerate: bool,
        /// Also build and summarize the morphism groupoid.
        #[arg(long)]
        groupoid: bool,
    },
    /// Bundle calculus on cocycle-presented bundles.
    Bundles {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Middle groupoid spec (for --compose).
        #[arg(long)]
        middle: Option<PathBuf>,
        /// Homomorphism file presenting the first bundle.
        #[arg(long)]
        hom: PathBuf,
        /// Second homomorphism file (for --compose and --pointed-iso).
        #[arg(long)]
        hom2: Option<PathBuf>,
        #[arg(long)]
        compose: bool,
        #[arg(long)]
        invert: bool,
        /// Compare the two pointed bundles at the star.
        #[arg(long)]
        pointed_iso: bool,
        #[arg(long)]
        star: Option<String>,
    },
    /// Minimize twisted-loop energy over an orbifold description.
    Geodesics {
        spec: PathBuf,
        /// Twist word over the generator names, e.g. "a^3*b^4"; repeatable.
        #[arg(long = "twist", required = true)]
        twists: Vec<String>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Convergence tolerance on the sup norm of the descent direction.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// Seeded starts per conjugacy class.
        #[arg(long, default_value_t = 3)]
        seeds: usize,
    },
    /// Classify extensions of a quotient group by a kernel group.
    Extensions {
        #[arg(long)]
        quotient: PathBuf,
        #[arg(long)]
        kernel: PathBuf,
        /// Action file for abelian kernels: `act: <q> <images...>` rows.
        #[arg(long)]
        action: Option<PathBuf>,
    },
    /// The crossed module of self-equivalences of an action (or a group).
    CrossedModule { spec: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let format = match cli.format {
        Format::Structured => ReportFormat::Structured,
        Format::Csv => ReportFormat::Csv,
    };
    match run(&cli) {
        Ok(report) => {
            let rendered = report.render(format);
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, rendered) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            } else {
                print!("{rendered}");
            }
            eprintln!("# elapsed: {:?}", start.elapsed());
            ExitCode::SUCCESS
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_groupoid(path: &PathBuf, report: &mut Report) -> Result<FiniteGroupoid, String> {
    let text = read(path)?;
    report.input(path.display().to_string(), text.as_bytes());
    let spec = parse_spec(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    spec.to_groupoid().ok_or_else(|| {
        format!("{}: spec kind {:?} does not denote a groupoid", path.display(), spec.kind())
    })
}

fn load_group(path: &PathBuf, report: &mut Report) -> Result<etale::FiniteGroup, String> {
    let text = read(path)?;
    report.input(path.display().to_string(), text.as_bytes());
    match parse_spec(&text).map_err(|e| format!("{}: {e}", path.display()))? {
        SpecFile::Group(g) => Ok(g),
        other => Err(format!("{}: expected a group spec, found {}", path.display(), other.kind())),
    }
}

fn star_of(g: &FiniteGroupoid, label: &str) -> Result<usize, String> {
    g.base()
        .find_label(label)
        .ok_or_else(|| format!("unknown star object {label:?}"))
}

fn run(cli: &Cli) -> Result<Report, String> {
    match &cli.command {
        Command::Validate { spec } => cmd_validate(spec),
        Command::Orbits { spec } => cmd_orbits(spec),
        Command::Localize { spec, cover } => cmd_localize(spec, cover),
        Command::Morphisms { source, target, star, enumerate, groupoid } => {
            cmd_morphisms(source, target, star, *enumerate, *groupoid, cli.max_size)
        }
        Command::Bundles {
            source,
            target,
            middle,
            hom,
            hom2,
            compose,
            invert,
            pointed_iso,
            star,
        } => cmd_bundles(source, target, middle, hom, hom2, *compose, *invert, *pointed_iso, star),
        Command::Geodesics { spec, twists, samples, tol, seeds } => {
            cmd_geodesics(spec, twists, *samples, *tol, *seeds, cli.seed)
        }
        Command::Extensions { quotient, kernel, action } => {
            cmd_extensions(quotient, kernel, action, cli.max_size)
        }
        Command::CrossedModule { spec } => cmd_crossed(spec),
    }
}

fn cmd_validate(path: &PathBuf) -> Result<Report, String> {
    let mut report = Report::new(format!("validate {}", path.display()));
    let text = read(path)?;
    report.input(path.display().to_string(), text.as_bytes());
    let spec = parse_spec(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    report.kv("kind", spec.kind());
    match &spec {
        SpecFile::GroupoidExplicit(g) => {
            let violations = g.validate();
            report.kv("violations", violations.len());
            for (i, v) in violations.iter().enumerate() {
                report.kv(format!("violation-{i}"), v);
            }
            report.kv("valid", violations.is_empty());
        }
        SpecFile::GroupoidAction(a) => {
            let g = a.to_groupoid();
            let violations = g.validate();
            report.kv("objects", g.object_count());
            report.kv("arrows", g.arrow_count());
            report.kv("violations", violations.len());
            report.kv("valid", violations.is_empty());
        }
        SpecFile::Group(g) => {
            report.kv("order", g.order());
            report.kv("abelian", g.is_abelian());
            report.kv("valid", true);
        }
        SpecFile::Orbifold(o) => {
            report.kv("geometry", format!("{:?}", o.geometry).to_lowercase());
            report.kv("generators", o.generators.len());
            report.kv("word-bound", o.word_bound);
            report.kv("valid", true);
        }
    }
    Ok(report)
}

fn cmd_orbits(path: &PathBuf) -> Result<Report, String> {
    let mut report = Report::new(format!("orbits {}", path.display()));
    let g = load_groupoid(path, &mut report)?;
    let orbits = g.orbits();
    report.kv("orbit-count", orbits.len());
    for (i, block) in orbits.iter().enumerate() {
        let labels: Vec<&str> = block.iter().map(|&x| g.base().label(x)).collect();
        report.kv(format!("orbit-{i}"), labels.join(" "));
    }
    Ok(report)
}

fn cmd_localize(path: &PathBuf, cover_path: &PathBuf) -> Result<Report, String> {
    let mut report = Report::new(format!(
        "localize {} --cover {}",
        path.display(),
        cover_path.display()
    ));
    let g = load_groupoid(path, &mut report)?;
    let cover_text = read(cover_path)?;
    report.input(cover_path.display().to_string(), cover_text.as_bytes());
    let pieces = parse_cover(&cover_text, g.base()).map_err(|e| e.to_string())?;
    let cover = OpenCover::new(g.base(), pieces).map_err(|e| e.to_string())?;
    let loc = localize(&g, &cover).map_err(|e| e.to_string())?;
    let proj = GroupoidHom::from_localization(&loc);
    report.kv("pieces", cover.piece_count());
    report.kv("localized-objects", loc.groupoid.object_count());
    report.kv("localized-arrows", loc.groupoid.arrow_count());
    report.kv("orbit-count", loc.groupoid.orbits().len());
    report.kv("projection-equivalence", proj.is_equivalence(&loc.groupoid, &g));
    Ok(report)
}

fn cmd_morphisms(
    source: &PathBuf,
    target: &PathBuf,
    star: &str,
    _enumerate: bool,
    groupoid: bool,
    cap: usize,
) -> Result<Report, String> {
    let mut report = Report::new(format!(
        "morphisms --source {} --target {} --star {star}",
        source.display(),
        target.display()
    ));
    let g = load_groupoid(source, &mut report)?;
    let gp = load_groupoid(target, &mut report)?;
    let star_id = star_of(&g, star)?;
    let space = MorphismSpace::enumerate(&g, &gp, star_id, cap).map_err(|e| e.to_string())?;
    report.kv("class-count", space.len());
    for (i, cls) in space.classes.iter().enumerate() {
        let enc = cls.bundle.bundle.encoding();
        let bytes: Vec<u8> = enc.iter().flat_map(|x| x.to_le_bytes()).collect();
        report.kv(
            format!("class-{i}"),
            format!(
                "anchor={} size={} digest={}",
                gp.base().label(cls.anchor),
                cls.bundle.bundle.len(),
                &digest(&bytes)[..16]
            ),
        );
    }
    if groupoid {
        let (mg, _) = space.morphism_groupoid(&g, &gp);
        report.kv("groupoid-objects", mg.object_count());
        report.kv("groupoid-arrows", mg.arrow_count());
        report.kv("groupoid-orbits", mg.orbits().len());
        report.kv("groupoid-valid", mg.validate().is_empty());
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bundles(
    source: &PathBuf,
    target: &PathBuf,
    middle: &Option<PathBuf>,
    hom_path: &PathBuf,
    hom2_path: &Option<PathBuf>,
    compose: bool,
    invert: bool,
    pointed_iso: bool,
    star: &Option<String>,
) -> Result<Report, String> {
    let mode = match (compose, invert, pointed_iso) {
        (true, false, false) => "compose",
        (false, true, false) => "invert",
        (false, false, true) => "pointed-iso",
        _ => return Err("choose exactly one of --compose, --invert, --pointed-iso".into()),
    };
    let mut report = Report::new(format!(
        "bundles --{mode} --source {} --target {}",
        source.display(),
        target.display()
    ));
    let g = load_groupoid(source, &mut report)?;
    let gp = load_groupoid(target, &mut report)?;

    match mode {
        "invert" => {
            let p = build_bundle(&mut report, &g, &gp, hom_path, 0)?;
            report.kv("total-size", p.bundle.len());
            report.kv("valid", p.bundle.validate(&g, &gp).is_empty());
            serialize_bundle(&mut report, &p.bundle, &g, &gp);
            match p.bundle.invert(&g, &gp) {
                Some(inv) => {
                    report.kv("invertible", true);
                    report.kv("inverse-size", inv.len());
                    report.kv("inverse-valid", inv.validate(&gp, &g).is_empty());
                }
                None => report.kv("invertible", false),
            }
        }
        "compose" => {
            let middle_path = middle.as_ref().ok_or("--compose needs --middle")?;
            let hom2_path = hom2_path.as_ref().ok_or("--compose needs --hom2")?;
            let gm = load_groupoid(middle_path, &mut report)?;
            // hom presents E1 over (Gm, G); hom2 presents E2 over (G', Gm)
            let e1 = build_bundle(&mut report, &g, &gm, hom_path, 0)?;
            let e2 = build_bundle(&mut report, &gm, &gp, hom2_path, 0)?;
            let c = etale::bundle::compose_bundles(&e2.bundle, &e1.bundle, &gp, &gm, &g)
                .map_err(|e| e.to_string())?;
            report.kv("total-size", c.len());
            report.kv("valid", c.validate(&g, &gp).is_empty());
            serialize_bundle(&mut report, &c, &g, &gp);
        }
        "pointed-iso" => {
            let hom2_path = hom2_path.as_ref().ok_or("--pointed-iso needs --hom2")?;
            let star_label = star.as_ref().ok_or("--pointed-iso needs --star")?;
            let star_id = star_of(&g, star_label)?;
            let p = build_bundle(&mut report, &g, &gp, hom_path, star_id)?;
            let q = build_bundle(&mut report, &g, &gp, hom2_path, star_id)?;
            match pointed_isomorphism(&p, &q, &g, &gp, None).map_err(|e| e.to_string())? {
                PointedIsoOutcome::Iso(map) => {
                    report.kv("isomorphic", true);
                    report.kv("map-size", map.len());
                }
                PointedIsoOutcome::Conflict { element, detail } => {
                    report.kv("isomorphic", false);
                    report.kv("conflict-element", element);
                    report.kv("conflict-detail", detail);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(report)
}

/// Element list and action tables of a bundle, plus a stable digest of its
/// encoding.
fn serialize_bundle(
    report: &mut Report,
    b: &etale::bundle::Bundle,
    g: &FiniteGroupoid,
    gp: &FiniteGroupoid,
) {
    let enc = b.encoding();
    let bytes: Vec<u8> = enc.iter().flat_map(|x| x.to_le_bytes()).collect();
    report.kv("digest", &digest(&bytes)[..16]);
    for e in 0..b.len() {
        report.kv(
            format!("element-{e}"),
            format!(
                "{} s={} t={}",
                b.label(e),
                g.base().label(b.s(e)),
                gp.base().label(b.t(e))
            ),
        );
    }
    let mut left_rows = Vec::new();
    let mut right_rows = Vec::new();
    for e in 0..b.len() {
        for a in 0..gp.arrow_count() {
            if let Some(v) = b.left_act(a, e) {
                left_rows.push(format!("{} . {e} = {v}", gp.arrow_label(a)));
            }
        }
        for a in 0..g.arrow_count() {
            if let Some(v) = b.right_act(e, a) {
                right_rows.push(format!("{e} . {} = {v}", g.arrow_label(a)));
            }
        }
    }
    report.kv("left-action", left_rows.join("; "));
    report.kv("right-action", right_rows.join("; "));
}

fn build_bundle(
    report: &mut Report,
    src_g: &FiniteGroupoid,
    dst_g: &FiniteGroupoid,
    path: &PathBuf,
    star: usize,
) -> Result<etale::bundle::PointedBundle, String> {
    let text = read(path)?;
    report.input(path.display().to_string(), text.as_bytes());
    let hom = parse_hom(&text, src_g, dst_g).map_err(|e| e.to_string())?;
    let loc = localize(src_g, &OpenCover::by_components(src_g.base())).map_err(|e| e.to_string())?;
    let lifted = GroupoidHom::from_localization(&loc).then(&hom);
    let base_piece = loc
        .cover
        .pieces_containing(star)
        .next()
        .expect("cover covers the star");
    let cocycle = PointedCocycle::unit_pointed(&loc, dst_g, lifted, base_piece, star);
    let (bundle, _) = bundle_from_cocycle(src_g, &loc, dst_g, &cocycle).map_err(|e| e.to_string())?;
    Ok(bundle)
}

fn cmd_geodesics(
    path: &PathBuf,
    twists: &[String],
    samples: usize,
    tol: f64,
    seeds: usize,
    seed: u64,
) -> Result<Report, String> {
    let mut report = Report::new(format!(
        "geodesics {} --twist {} --samples {samples} --tol {tol} --seeds {seeds}",
        path.display(),
        twists.join(" --twist ")
    ));
    let text = read(path)?;
    report.input(path.display().to_string(), text.as_bytes());
    let spec = parse_spec(&text).map_err(|e| e.to_string())?;
    let SpecFile::Orbifold(orb) = spec else {
        return Err("geodesics needs an orbifold spec".into());
    };
    let group = IsometryGroup::enumerate(orb.geometry, orb.generators.clone(), orb.word_bound)
        .map_err(|e| e.to_string())?;
    let twist_elements = twists
        .iter()
        .map(|w| parse_word(&orb.generators, &orb.generator_names, w).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = DescentOptions { grad_tol: tol, ..Default::default() };
    let rows = length_spectrum(&group, &twist_elements, samples, seeds, seed, &opts)
        .map_err(|e| e.to_string())?;
    report.kv("group-elements", group.len());
    report.kv("classes", rows.len());
    report.table = Some(Table {
        header: "class_word,min_length,iterations,converged,degenerate".into(),
        rows: rows
            .iter()
            .map(|r| {
                format!(
                    "{},{:.6},{},{},{}",
                    r.class_word, r.min_length, r.iterations, r.converged, r.degenerate
                )
            })
            .collect(),
    });
    Ok(report)
}

fn cmd_extensions(
    quotient: &PathBuf,
    kernel: &PathBuf,
    action: &Option<PathBuf>,
    cap: usize,
) -> Result<Report, String> {
    let mut report = Report::new(format!(
        "extensions --quotient {} --kernel {}",
        quotient.display(),
        kernel.display()
    ));
    let q = load_group(quotient, &mut report)?;
    let n = load_group(kernel, &mut report)?;
    if n.is_abelian() {
        let module = match action {
            None => QModule::trivial(&q, n.clone()).map_err(|e| e.to_string())?,
            Some(path) => {
                let text = read(path)?;
                report.input(path.display().to_string(), text.as_bytes());
                parse_action_file(&text, &q, &n)?
            }
        };
        let cls = classify_extensions(&q, &module, cap).map_err(|e| e.to_string())?;
        report.kv("kernel-kind", "abelian");
        report.kv("cocycles", cls.cocycle_count);
        report.kv("class-count", cls.classes.len());
        for (i, realized) in cls.realized.iter().enumerate() {
            let mut orders: Vec<usize> =
                (0..realized.order()).map(|e| realized.element_order(e)).collect();
            orders.sort_unstable();
            let orders: Vec<String> = orders.iter().map(|o| o.to_string()).collect();
            report.kv(
                format!("class-{i}"),
                format!("order={} element-orders={}", realized.order(), orders.join(" ")),
            );
        }
    } else {
        report.kv("kernel-kind", "non-abelian");
        let outer = outer_structure(&n);
        report.kv("out-order", outer.out.order());
        let homs = q.homomorphisms(&outer.out);
        report.kv("outer-action-count", homs.len());
        for (i, psi) in homs.iter().enumerate() {
            let ob = extension_obstruction(&q, &n, &outer, psi, cap).map_err(|e| e.to_string())?;
            let exists = extension_exists(&q, &n, &outer, psi, cap)
                .map_err(|e| e.to_string())?
                .is_some();
            report.kv(
                format!("outer-action-{i}"),
                format!("obstruction-vanishes={} extension-exists={exists}", ob.vanishes),
            );
        }
    }
    Ok(report)
}

fn parse_action_file(
    text: &str,
    q: &etale::FiniteGroup,
    c: &etale::FiniteGroup,
) -> Result<QModule, String> {
    let mut rows = vec![None; q.order()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(format!("line {}: expected `act: <q> <images...>`", lineno + 1));
        };
        if key.trim() != "act" {
            continue;
        }
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        if tokens.len() != 1 + c.order() {
            return Err(format!(
                "line {}: expected one quotient element and {} images",
                lineno + 1,
                c.order()
            ));
        }
        let qe = (0..q.order())
            .find(|&i| q.label(i) == tokens[0])
            .ok_or_else(|| format!("line {}: unknown quotient element {:?}", lineno + 1, tokens[0]))?;
        let images = tokens[1..]
            .iter()
            .map(|t| {
                (0..c.order())
                    .find(|&i| c.label(i) == *t)
                    .ok_or_else(|| format!("line {}: unknown kernel element {t:?}", lineno + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows[qe] = Some(images);
    }
    let action = rows
        .into_iter()
        .enumerate()
        .map(|(qe, r)| r.ok_or_else(|| format!("missing act row for {:?}", q.label(qe))))
        .collect::<Result<Vec<_>, _>>()?;
    QModule::new(q, c.clone(), action).map_err(|e| e.to_string())
}

fn cmd_crossed(path: &PathBuf) -> Result<Report, String> {
    let mut report = Report::new(format!("crossed-module {}", path.display()));
    let text = read(path)?;
    report.input(path.display().to_string(), text.as_bytes());
    let spec = parse_spec(&text).map_err(|e| e.to_string())?;
    let (cm, pair_count) = match spec {
        SpecFile::GroupoidAction(action) => {
            let (cm, pairs) = selfequivalence_crossed_module(&action).map_err(|e| e.to_string())?;
            (cm, Some(pairs.len()))
        }
        SpecFile::Group(g) => (CrossedModule::adjoint(&g), None),
        other => {
            return Err(format!(
                "crossed-module needs a groupoid-action or group spec, found {}",
                other.kind()
            ))
        }
    };
    report.kv("gamma-order", cm.gamma.order());
    report.kv("s-order", cm.s.order());
    if let Some(pc) = pair_count {
        report.kv("self-equivalence-pairs", pc);
    }
    let violations = cm.validate();
    report.kv("violations", violations.len());
    for (i, v) in violations.iter().enumerate() {
        report.kv(format!("violation-{i}"), v);
    }
    report.kv("valid", violations.is_empty());
    let mu: Vec<String> = cm.mu.iter().map(|m| cm.s.label(*m).to_string()).collect();
    report.kv("mu", mu.join(" "));
    Ok(report)
}
