//! Subcommand drivers. Each writes its CSV (and SVG where there is a plot)
//! under `output.dir`, named `{subcommand}-{short_hash}.{ext}`.

use std::path::PathBuf;

use schottky_core::expander::{cheeger_bounds_report, lambda1, CHEEGER_CAP};
use schottky_core::geometry::{build_funnel_group, validate_schottky, Disk, MoebiusMap, SchottkyGroup};
use schottky_core::spectra::{artin_takagi_check, cover_gap_report, hausdorff_dimension, locate_zeros, LFunction};
use schottky_core::symbolic::{OrbitCatalog, WordCache};
use schottky_core::{CayleyGraphSpec, Character, Complex64, Discretization, Rect, ScanSettings, TransferOperator};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{real, scatter_svg, vector, write_file, Point, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Validate,
    Delta,
    Zeros,
    Scan,
    FactorCheck,
    Expander,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Validate,
        Subcommand::Delta,
        Subcommand::Zeros,
        Subcommand::Scan,
        Subcommand::FactorCheck,
        Subcommand::Expander,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Validate => "validate",
            Subcommand::Delta => "delta",
            Subcommand::Zeros => "zeros",
            Subcommand::Scan => "scan",
            Subcommand::FactorCheck => "factor-check",
            Subcommand::Expander => "expander",
        }
    }
}

/// Files written and a short human-readable summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    hash: String,
    short: String,
}

impl Context<'_> {
    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.config.output.dir.join(format!("{stem}-{}.{ext}", self.short))
    }

    fn emit_csv(&self, stem: &str, table: &Table, out: &mut Outcome) -> Result<(), CliError> {
        let p = self.path(stem, "csv");
        write_file(&p, &table.render(&self.hash))?;
        out.files.push(p);
        Ok(())
    }

    fn emit_svg(&self, stem: &str, svg: &str, out: &mut Outcome) -> Result<(), CliError> {
        let p = self.path(stem, "svg");
        let (head, body) = svg.split_once('\n').unwrap_or((svg, ""));
        write_file(&p, &format!("{head}\n<!-- config_hash={} -->\n{body}", self.hash))?;
        out.files.push(p);
        Ok(())
    }
}

/// Group described by the config.
pub fn build_group(config: &ExperimentConfig) -> Result<SchottkyGroup, CliError> {
    let g = &config.group;
    if let Some(lengths) = &g.lengths {
        return Ok(build_funnel_group(lengths.len(), lengths)?);
    }
    let disks: Vec<Disk> = g
        .disks
        .as_ref()
        .ok_or_else(|| CliError::Semantic {
            field: "group".into(),
            message: "missing `lengths` or `disks`".into(),
        })?
        .iter()
        .map(|[c, r]| Disk::real(*c, *r))
        .collect();
    match &g.generators {
        None => Ok(SchottkyGroup::from_disks(disks)?),
        Some(gens) => {
            let maps = gens
                .iter()
                .map(|[a, b, c, d]| MoebiusMap::new(*a, *b, *c, *d))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SchottkyGroup::from_parts(disks, maps)?)
        }
    }
}

pub fn build_operator(config: &ExperimentConfig) -> Result<TransferOperator, CliError> {
    let g = build_group(config)?;
    let disc = Discretization::new(config.numerics.degree, config.numerics.tau)?;
    Ok(TransferOperator::new(&g, disc)?)
}

fn cache(config: &ExperimentConfig) -> Result<Option<WordCache>, CliError> {
    config
        .output
        .cache_dir
        .as_ref()
        .map(WordCache::new)
        .transpose()
        .map_err(CliError::from)
}

/// Runs one subcommand. Outputs are written before a certificate failure is
/// reported, so a failing scan still leaves its CSV behind.
pub fn run(sub: Subcommand, config: &ExperimentConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let ctx = Context {
        config,
        hash: config.hash(),
        short: config.short_hash(),
    };
    match sub {
        Subcommand::Validate => validate(&ctx),
        Subcommand::Delta => delta(&ctx),
        Subcommand::Zeros => zeros(&ctx),
        Subcommand::Scan => scan(&ctx),
        Subcommand::FactorCheck => factor_check(&ctx),
        Subcommand::Expander => expander(&ctx),
    }
}

fn validate(ctx: &Context) -> Result<Outcome, CliError> {
    let g = build_group(ctx.config)?;
    let report = validate_schottky(&g);
    let mut t = Table::new(vec!["condition", "indices", "detail"]);
    for v in &report.violations {
        let idx: Vec<i64> = v.indices.iter().map(|&i| i as i64).collect();
        t.push(vec![v.condition.to_string(), vector(&idx), format!("\"{}\"", v.detail.replace('"', "'"))]);
    }
    let mut out = Outcome::default();
    ctx.emit_csv("validate", &t, &mut out)?;
    out.summary = format!(
        "rank {} fingerprint {} violations {} worst margin {:e} (relative {:e})",
        g.rank(),
        g.fingerprint(),
        report.violations.len(),
        report.worst_margin,
        report.worst_relative_margin
    );
    if !report.passed() {
        return Err(CliError::Certificate(format!(
            "group violates {} Schottky condition(s)",
            report.violations.len()
        )));
    }
    Ok(out)
}

fn delta(ctx: &Context) -> Result<Outcome, CliError> {
    let op = build_operator(ctx.config)?;
    let d = hausdorff_dimension(&op, ctx.config.numerics.delta_tol)?;
    let mut t = Table::new(vec![
        "delta",
        "determinant_zero",
        "discrepancy",
        "eigenvalue",
        "bisection_steps",
        "degree",
        "tau",
    ]);
    t.push(vec![
        real(d.delta),
        real(d.determinant_zero),
        real(d.discrepancy()),
        real(d.eigenvalue),
        d.bisection_steps.to_string(),
        ctx.config.numerics.degree.to_string(),
        real(ctx.config.numerics.tau),
    ]);
    let mut out = Outcome::default();
    ctx.emit_csv("delta", &t, &mut out)?;
    out.summary = format!("delta = {:.16} (determinant zero {:.16})", d.delta, d.determinant_zero);
    Ok(out)
}

const ZERO_HEADER: [&str; 11] = [
    "modulus",
    "a",
    "theta_l1",
    "re",
    "im",
    "multiplicity",
    "distance_to_delta",
    "residual",
    "certificate_residual",
    "topological",
    "mirrored",
];

fn zeros(ctx: &Context) -> Result<Outcome, CliError> {
    let c = ctx.config;
    let op = build_operator(c)?;
    let delta = hausdorff_dimension(&op, c.numerics.delta_tol)?.delta;
    let a = if c.zeros.a.is_empty() {
        vec![0; c.rank()]
    } else {
        c.zeros.a.clone()
    };
    let theta = Character::from_fraction(&a, c.zeros.modulus);
    let rect = match c.zeros.rect {
        Some([a, b, cc, d]) => Rect::new(a, b, cc, d),
        None => Rect::centered(Complex64::new(delta, 0.0), c.zeros.radius),
    };
    let l1 = theta.distance_to_trivial();
    let f = LFunction::new(&op, theta);
    let set = locate_zeros(&f, rect, c.numerics.locate_eps)?;
    let mut t = Table::new(ZERO_HEADER.to_vec());
    let mut points = Vec::new();
    let center = Complex64::new(delta, 0.0);
    for z in &set.zeros {
        t.push(vec![
            c.zeros.modulus.to_string(),
            vector(&a),
            real(l1),
            real(z.s.re),
            real(z.s.im),
            z.multiplicity.to_string(),
            real((z.s - center).norm()),
            real(z.residual),
            real(z.certificate_residual()),
            z.is_topological().to_string(),
            "false".into(),
        ]);
        points.push(Point {
            re: z.s.re,
            im: z.s.im,
            weight: l1,
        });
    }
    let mut out = Outcome::default();
    ctx.emit_csv("zeros", &t, &mut out)?;
    let title = format!("zeros of L(s, a/N), a = ({}), N = {}", vector(&a), c.zeros.modulus);
    ctx.emit_svg("zeros", &scatter_svg(&title, &points, delta, "|a/N|_1"), &mut out)?;
    out.summary = format!(
        "{} zero(s) with total multiplicity {} in {}",
        set.zeros.len(),
        set.total_multiplicity(),
        set.rect
    );
    Ok(out)
}

fn optional(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn scan(ctx: &Context) -> Result<Outcome, CliError> {
    let c = ctx.config;
    let op = build_operator(c)?;
    let delta = hausdorff_dimension(&op, c.numerics.delta_tol)?.delta;
    let settings = ScanSettings {
        epsilon: c.scan.epsilon,
        search_radius: c.scan.search_radius,
        locate_eps: c.numerics.locate_eps,
        ..ScanSettings::default()
    };
    let result = cover_gap_report(&op, delta, &c.scan.n_list, settings)?;
    let center = Complex64::new(delta, 0.0);

    let mut rows = Table::new(ZERO_HEADER.to_vec());
    let mut points = Vec::new();
    let mut summary = Table::new(vec![
        "modulus",
        "index",
        "delta",
        "gap_prime",
        "gap_character",
        "count",
        "ratio",
        "failures",
    ]);
    let mut failures = Vec::new();
    for r in &result.reports {
        for ch in &r.characters {
            for z in &ch.zeros {
                rows.push(vec![
                    r.modulus.to_string(),
                    vector(&ch.a),
                    real(ch.theta_l1),
                    real(z.s.re),
                    real(z.s.im),
                    z.multiplicity.to_string(),
                    real((z.s - center).norm()),
                    real(z.residual),
                    real(z.certificate_residual()),
                    z.is_topological().to_string(),
                    ch.mirrored.to_string(),
                ]);
                points.push(Point {
                    re: z.s.re,
                    im: z.s.im,
                    weight: ch.theta_l1,
                });
            }
        }
        summary.push(vec![
            r.modulus.to_string(),
            r.index.to_string(),
            real(r.delta),
            optional(r.gap_prime),
            r.gap_character.as_deref().map(vector).unwrap_or_default(),
            r.count.to_string(),
            real(r.ratio),
            r.failures.len().to_string(),
        ]);
        for (a, e) in &r.failures {
            failures.push(format!("N = {}, a = ({}): {e}", r.modulus, vector(a)));
        }
    }
    let mut out = Outcome::default();
    ctx.emit_csv("scan", &rows, &mut out)?;
    ctx.emit_csv("scan-summary", &summary, &mut out)?;
    let title = format!("zeros near delta, N in {:?}", c.scan.n_list);
    ctx.emit_svg("scan", &scatter_svg(&title, &points, delta, "|a/N|_1"), &mut out)?;
    out.summary = result
        .reports
        .iter()
        .map(|r| {
            format!(
                "N = {}: gap' = {} count = {} ratio = {:.6}",
                r.modulus,
                r.gap_prime.map_or("none".into(), |g| format!("{g:.6}")),
                r.count,
                r.ratio
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    if !failures.is_empty() {
        return Err(CliError::Certificate(format!(
            "{} character search(es) failed: {}",
            failures.len(),
            failures.join("; ")
        )));
    }
    Ok(out)
}

fn factor_check(ctx: &Context) -> Result<Outcome, CliError> {
    let c = ctx.config;
    let fc = &c.factor_check;
    let op = build_operator(c)?;
    let delta = hausdorff_dimension(&op, c.numerics.delta_tol)?.delta;
    let s = Complex64::new(delta + fc.s_offset[0], fc.s_offset[1]);
    let cache = cache(c)?;
    let catalog = OrbitCatalog::build(op.group(), fc.n_max, c.numerics.word_cap, cache.as_ref())?;
    let mut t = Table::new(vec![
        "modulus",
        "n",
        "character_sum_re",
        "character_sum_im",
        "cover_sum_re",
        "cover_sum_im",
        "residual",
    ]);
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for &n in &fc.n_list {
        let report = artin_takagi_check(&catalog, n, s, fc.n_max, fc.tolerance)?;
        for term in &report.terms {
            t.push(vec![
                n.to_string(),
                term.n.to_string(),
                real(term.character_sum.re),
                real(term.character_sum.im),
                real(term.cover_sum.re),
                real(term.cover_sum.im),
                real(term.residual),
            ]);
        }
        lines.push(format!(
            "N = {n}: max residual {:e}, aggregate {:e}",
            report.max_residual(),
            report.aggregate_residual
        ));
        if !report.passed() {
            failed.push(n);
        }
    }
    let mut out = Outcome::default();
    ctx.emit_csv("factor-check", &t, &mut out)?;
    out.summary = lines.join("\n");
    if !failed.is_empty() {
        return Err(CliError::Certificate(format!(
            "factorisation residual reached tolerance {:e} for N in {failed:?}",
            fc.tolerance
        )));
    }
    Ok(out)
}

fn expander(ctx: &Context) -> Result<Outcome, CliError> {
    let e = &ctx.config.expander;
    let rank = e.rank.unwrap_or_else(|| ctx.config.rank());
    let mut t = Table::new(vec![
        "modulus",
        "rank",
        "degree",
        "lambda1",
        "argmin",
        "n2_lambda1",
        "h",
        "lower",
        "upper",
        "lower_holds",
        "upper_holds",
    ]);
    let mut lines = Vec::new();
    for &n in &e.n_list {
        let spec = match &e.generators {
            Some(gens) => CayleyGraphSpec::new(n, rank, gens.clone())?,
            None => CayleyGraphSpec::standard(n, rank)?,
        };
        let n2 = (n * n) as f64;
        if spec.vertex_count() <= CHEEGER_CAP {
            let r = cheeger_bounds_report(&spec)?;
            t.push(vec![
                n.to_string(),
                rank.to_string(),
                r.degree.to_string(),
                real(r.lambda1),
                vector(&r.argmin),
                real(n2 * r.lambda1),
                real(r.h),
                real(r.lower),
                real(r.upper),
                r.lower_holds.to_string(),
                r.upper_holds.to_string(),
            ]);
            lines.push(format!("N = {n}: lambda1 = {:.6}, h = {:.6}", r.lambda1, r.h));
        } else {
            let (l1, argmin) = lambda1(&spec)?;
            let k = spec.degree() as f64;
            t.push(vec![
                n.to_string(),
                rank.to_string(),
                spec.degree().to_string(),
                real(l1),
                vector(&argmin),
                real(n2 * l1),
                String::new(),
                real(0.5 * k * l1),
                real(k * (l1 * (1.0 - l1)).max(0.0).sqrt()),
                String::new(),
                String::new(),
            ]);
            lines.push(format!("N = {n}: lambda1 = {l1:.6}, N^2 lambda1 = {:.6}", n2 * l1));
        }
    }
    let mut out = Outcome::default();
    ctx.emit_csv("expander", &t, &mut out)?;
    out.summary = lines.join("\n");
    Ok(out)
}
