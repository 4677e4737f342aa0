//! `boundary-lab` command line.
//!
//! Exit codes: 0 on success, 1 when a checked property fails (the report is
//! wrapped with a replay line), 2 on usage, parse or build errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::annulus::spiral::SpiralMap;
use crate::annulus::{AnnulusPairSampler, AnnulusPointSampler, AnnulusSpace};
use crate::boundary::{
    boundary_gromov_product, boundary_map_continuity_test, converges_in_gp, find, hausdorff_violation_witness,
    matching_labels, product_table, BoundaryPoint, ContinuityVerdict, ProductSchedule, ProductTable,
};
use crate::complex::{ComplexPairSampler, RayComplex};
use crate::contraction::{
    alpha_log_witnesses, c_lookup, c_table, claim_check, contraction_profile, git_check, neighborhood_basis_check,
    project_onto, t_first_escape, CEntry, CTableSettings,
};
use crate::distortion::qi_distortion_estimate;
use crate::error::{Error, Result};
use crate::metric::{gromov_product, MetricSpace, Point, UnitSpeedRay};
use crate::sampling::PairSampler;
use crate::scalar::{parse_q, Scalar};
use crate::suite::{self, SuiteContext};
use crate::zoo::{self, annulus_boundary, complex_boundary, dsl};

#[derive(Parser, Debug)]
#[command(name = "boundary-lab", version, about = "Contracting-boundary experiments on ray complexes and the punctured-plane cover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sampling commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SpaceArg {
    /// `X:N`, `Y:N`, `Xcat0:N`, `Ycat0:N`, `bare` or a `.space` file.
    #[arg(long)]
    space: String,
}

#[derive(Args, Debug)]
struct RayArg {
    /// Boundary label of the ray (`alpha`, `beta`, `g3`, ...).
    #[arg(long)]
    ray: String,
    /// Representative index: 0 is canonical, 1 the auxiliary one.
    #[arg(long, default_value_t = 0)]
    rep: usize,
}

#[derive(Args, Debug)]
struct Constants {
    /// Contraction constant of the first boundary point (estimated if omitted, annulus only).
    #[arg(long)]
    c_eta: Option<f64>,
    /// Contraction constant of the second boundary point.
    #[arg(long)]
    c_zeta: Option<f64>,
    /// Seed for estimating constants (required when they are estimated).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Distance between two points (`edge:param`, `base`, or `pt:t,r`).
    Dist {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Include a geodesic witness.
        #[arg(long)]
        geodesic: bool,
    },
    /// Gromov product `(x . y)_z`.
    Gromov {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value = "base")]
        z: String,
    },
    /// Closest-point projection onto a ray.
    Project {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        point: String,
        #[command(flatten)]
        ray: RayArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Sampled contraction profile of a ray.
    Profile {
        #[command(flatten)]
        space: SpaceArg,
        #[command(flatten)]
        ray: RayArg,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Scale of sampled ray offsets (complexes) or of heights (annulus).
        #[arg(long, default_value_t = 1024.0)]
        scale: f64,
        /// Add the explicit `g_i(0)`/`cb_i` witness pairs (complexes with that family).
        #[arg(long)]
        witnesses: bool,
    },
    /// Projection diameter of a geodesic segment far from a ray.
    Git {
        #[command(flatten)]
        space: SpaceArg,
        #[command(flatten)]
        ray: RayArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        c: f64,
    },
    /// Last time `beta` is within `2C` of `alpha`.
    Escape {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 0)]
        alpha_rep: usize,
        #[arg(long, default_value_t = 0)]
        beta_rep: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = suite::ESCAPE_HORIZON)]
        horizon: f64,
    },
    /// Escape-time and product residuals for a pair of boundary points.
    Claim {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        zeta: String,
        #[command(flatten)]
        constants: Constants,
    },
    /// Neighbourhood-basis condition at one boundary point.
    Basis {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        r: f64,
        /// One constant for every boundary point (estimated per point if omitted, annulus only).
        #[arg(long)]
        c: Option<f64>,
        /// Seed for estimating constants (required when `--c` is absent).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Gromov product of two boundary points, or the whole table with `--all`.
    Bproduct {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long, required_unless_present = "all")]
        eta: Option<String>,
        #[arg(long, required_unless_present = "all")]
        zeta: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Convergence of a sequence of boundary points in the product topology.
    Converge {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        eta: String,
        /// Comma list, or `g3..g16` for an indexed family.
        #[arg(long)]
        sequence: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        radii: Vec<f64>,
        /// Also look for two distinct limits.
        #[arg(long)]
        hausdorff: bool,
    },
    /// Continuity at `eta` of the boundary map pairing equal labels.
    Continuity {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        sequence: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        radii: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        image_radii: Vec<f64>,
    },
    /// Empirical quasi-isometry constants of the spiral map between annulus spaces.
    Spiral {
        #[arg(long, default_value = "Xcat0:12")]
        from: String,
        #[arg(long, default_value = "Ycat0:12")]
        to: String,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        floor: f64,
        #[arg(long)]
        inverse: bool,
    },
    /// Runs the reproduction criteria.
    PaperSuite {
        /// `all`, or one of X, Y, Xcat0, Ycat0, annulus to run the criteria touching it.
        #[arg(long, default_value = "all")]
        space: String,
        #[arg(long)]
        seed: u64,
        /// Directory of diagnostic fixtures (defaults to the shipped ones when present).
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Parses a `.space` file and prints its canonical form.
    Parse {
        file: PathBuf,
    },
}

enum Loaded {
    Complex(RayComplex),
    Annulus(AnnulusSpace),
}

fn family_size(spec: &str, name: &str) -> Result<i64> {
    spec.parse().map_err(|_| Error::Usage(format!("`{name}:{spec}`: expected an integer size")))
}

fn load_space(spec: &str) -> Result<Loaded> {
    if spec.ends_with(".space") {
        let text = std::fs::read_to_string(spec)?;
        return Ok(Loaded::Complex(dsl::compile_str(&text)?));
    }
    if spec == "bare" {
        return Ok(Loaded::Annulus(AnnulusSpace::bare()));
    }
    let (name, n) = spec.split_once(':').ok_or_else(|| Error::Usage(format!("unknown space `{spec}`")))?;
    let n = family_size(n, name)?;
    Ok(match name {
        "X" => Loaded::Complex(zoo::build_x(n)?),
        "Y" => Loaded::Complex(zoo::build_y(n)?),
        "Xcat0" => Loaded::Annulus(zoo::build_xcat0(n)?),
        "Ycat0" => Loaded::Annulus(zoo::build_ycat0(n)?),
        _ => return Err(Error::Usage(format!("unknown space `{name}` (expected X, Y, Xcat0, Ycat0, bare or a .space file)"))),
    })
}

/// What the command layer needs from a space beyond [`MetricSpace`].
trait CliSpace: MetricSpace {
    fn parse_point(&self, lit: &str) -> Result<Point>;
    fn boundary(&self) -> Result<Vec<BoundaryPoint>>;
    fn pair_sampler(&self, scale: f64) -> Box<dyn PairSampler + '_>;
    fn witnesses(&self, _ray: &str) -> Result<Vec<(Point, Point)>> {
        Ok(Vec::new())
    }
    fn constants(&self, _boundary: &[BoundaryPoint], _seed: u64) -> Result<Vec<CEntry>> {
        Err(Error::Usage("contraction constants must be given explicitly for ray complexes".into()))
    }
}

fn split_literal(lit: &str) -> Result<(&str, &str)> {
    lit.split_once(':').ok_or_else(|| Error::Usage(format!("point literal `{lit}` is not `id:param`")))
}

impl CliSpace for RayComplex {
    fn parse_point(&self, lit: &str) -> Result<Point> {
        if lit == "base" {
            return Ok(self.basepoint());
        }
        let (id, param) = split_literal(lit)?;
        let offset = parse_q(param).ok_or_else(|| Error::Usage(format!("bad parameter `{param}`")))?;
        self.point(id, offset)
    }

    fn boundary(&self) -> Result<Vec<BoundaryPoint>> {
        complex_boundary(self)
    }

    fn pair_sampler(&self, scale: f64) -> Box<dyn PairSampler + '_> {
        Box::new(ComplexPairSampler::new(self, scale))
    }

    fn witnesses(&self, ray: &str) -> Result<Vec<(Point, Point)>> {
        if ray != "alpha" {
            return Err(Error::Usage("explicit witnesses exist for `alpha` only".into()));
        }
        let indices: Vec<i64> = self
            .ray_names()
            .iter()
            .filter_map(|n| n.strip_prefix('g').and_then(|i| i.parse().ok()))
            .collect();
        alpha_log_witnesses(self, indices)
    }
}

impl CliSpace for AnnulusSpace {
    fn parse_point(&self, lit: &str) -> Result<Point> {
        if lit == "base" {
            return Ok(self.basepoint());
        }
        let (id, param) = split_literal(lit)?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Usage(format!("bad number `{s}`")));
        match id {
            "pt" => {
                let (t, r) = param.split_once(',').ok_or_else(|| Error::Usage(format!("`{lit}`: expected pt:t,r")))?;
                self.point(num(t)?, num(r)?)
            }
            "alpha" => self.point(num(param)?, 1.0),
            "beta" => self.point(-num(param)?, 1.0),
            _ => {
                let ray = id
                    .strip_prefix('g')
                    .and_then(|i| i.parse().ok())
                    .ok_or_else(|| Error::UnknownLabel(id.to_string()))?;
                self.attached_point(ray, num(param)?)
            }
        }
    }

    fn boundary(&self) -> Result<Vec<BoundaryPoint>> {
        annulus_boundary(self)
    }

    fn pair_sampler(&self, scale: f64) -> Box<dyn PairSampler + '_> {
        let top = self.rays().iter().map(|r| r.base.t.abs()).fold(0.0, f64::max);
        let points = AnnulusPointSampler::new(self, (-10.0, top + 30.0), (1.0 / 64.0, scale));
        Box::new(AnnulusPairSampler::new(points, 1e-9))
    }

    fn constants(&self, boundary: &[BoundaryPoint], seed: u64) -> Result<Vec<CEntry>> {
        c_table(self, boundary, &CTableSettings { seed, ..CTableSettings::default() })
    }
}

fn rep_of<'a>(boundary: &'a [BoundaryPoint], label: &str, rep: usize) -> Result<&'a UnitSpeedRay> {
    let b = find(boundary, label)?;
    b.reps().get(rep).copied().ok_or_else(|| Error::Usage(format!("{label} has no representative {rep}")))
}

/// Expands `g3..g16` or a comma list.
fn parse_sequence(spec: &str) -> Result<Vec<String>> {
    if let Some((a, b)) = spec.split_once("..") {
        let split = |s: &str| {
            let k = s.find(|c: char| c.is_ascii_digit()).ok_or_else(|| Error::Usage(format!("`{s}` has no index")))?;
            let index: i64 = s[k..].parse().map_err(|_| Error::Usage(format!("bad index in `{s}`")))?;
            Ok::<_, Error>((s[..k].to_string(), index))
        };
        let ((pa, ia), (pb, ib)) = (split(a)?, split(b)?);
        if pa != pb || ia > ib {
            return Err(Error::Usage(format!("bad range `{spec}`")));
        }
        return Ok((ia..=ib).map(|i| format!("{pa}{i}")).collect());
    }
    Ok(spec.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
}

/// A command's report and whether a checked property failed.
struct Outcome {
    report: Value,
    failed: bool,
    /// Field holding the rows for CSV output.
    table: Option<&'static str>,
}

fn ok<T: Serialize>(report: &T) -> Result<Outcome> {
    Ok(Outcome { report: serde_json::to_value(report)?, failed: false, table: None })
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn write_csv_value(out: &mut dyn Write, value: &Value, table: Option<&str>) -> Result<()> {
    let rows: Vec<&Value> = match (table.and_then(|k| value.get(k)), value) {
        (Some(Value::Array(rows)), _) | (None, Value::Array(rows)) => rows.iter().collect(),
        _ => vec![value],
    };
    let mut w = csv::Writer::from_writer(out);
    if let Some(Value::Object(first)) = rows.first() {
        w.write_record(first.keys())?;
        for row in &rows {
            if let Value::Object(map) = row {
                w.write_record(first.keys().map(|k| map.get(k).map(scalar_text).unwrap_or_default()))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn with_space<R>(
    spec: &str,
    complex: impl FnOnce(&RayComplex) -> Result<R>,
    annulus: impl FnOnce(&AnnulusSpace) -> Result<R>,
) -> Result<R> {
    match load_space(spec)? {
        Loaded::Complex(s) => complex(&s),
        Loaded::Annulus(s) => annulus(&s),
    }
}

/// Dispatches a generic command body over the two space kinds.
macro_rules! on_space {
    ($spec:expr, |$s:ident| $body:expr) => {
        with_space($spec, |$s: &RayComplex| $body, |$s: &AnnulusSpace| $body)
    };
}

fn dist<M: CliSpace>(s: &M, from: &str, to: &str, geodesic: bool) -> Result<Outcome> {
    let (p, q) = (s.parse_point(from)?, s.parse_point(to)?);
    let d = s.distance(&p, &q)?;
    let mut report = json!({ "distance": d.to_string() });
    if geodesic {
        report["geodesic"] = serde_json::to_value(s.geodesic(&p, &q, 0.25)?)?;
    }
    Ok(Outcome { report, failed: false, table: None })
}

fn gromov<M: CliSpace>(s: &M, x: &str, y: &str, z: &str) -> Result<Outcome> {
    let v = gromov_product(s, &s.parse_point(x)?, &s.parse_point(y)?, &s.parse_point(z)?)?;
    ok(&json!({ "value": v.to_string() }))
}

fn project<M: CliSpace>(s: &M, point: &str, ray: &RayArg, tol: f64) -> Result<Outcome> {
    let b = s.boundary()?;
    let p = project_onto(s, &s.parse_point(point)?, rep_of(&b, &ray.ray, ray.rep)?, tol)?;
    let intervals: Vec<[String; 2]> = p.intervals.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect();
    ok(&json!({ "distance": p.distance.to_string(), "intervals": intervals }))
}

fn profile<M: CliSpace>(s: &M, ray: &RayArg, samples: usize, seed: u64, scale: f64, witnesses: bool) -> Result<Outcome> {
    let b = s.boundary()?;
    let extra = if witnesses { s.witnesses(&ray.ray)? } else { Vec::new() };
    let sampler = s.pair_sampler(scale);
    let tol = if M::Scalar::EXACT { 0.0 } else { 1e-9 };
    let p = contraction_profile(s, rep_of(&b, &ray.ray, ray.rep)?, sampler.as_ref(), samples, seed, tol, &extra)?;
    let mut report = serde_json::to_value(&p)?;
    if let Some(Value::Array(bins)) = report.get_mut("bins") {
        for bin in bins.iter_mut() {
            if let Some(o) = bin.as_object_mut() {
                o.remove("witness");
            }
        }
    }
    report["witnesses"] = serde_json::to_value(p.bins.iter().map(|b| &b.witness).collect::<Vec<_>>())?;
    Ok(Outcome { report, failed: false, table: Some("bins") })
}

fn git<M: CliSpace>(s: &M, ray: &RayArg, from: &str, to: &str, c: f64) -> Result<Outcome> {
    let b = s.boundary()?;
    let seg = s.geodesic(&s.parse_point(from)?, &s.parse_point(to)?, (c / 8.0).max(1e-3))?;
    let tol = if M::Scalar::EXACT { 0.0 } else { 1e-9 };
    let r = git_check(s, rep_of(&b, &ray.ray, ray.rep)?, &seg, c, tol)?;
    Ok(Outcome { failed: !r.passed, ..ok(&r)? })
}

fn escape<M: CliSpace>(s: &M, a: (&str, usize), b: (&str, usize), c: f64, horizon: f64) -> Result<Outcome> {
    let bd = s.boundary()?;
    ok(&t_first_escape(s, rep_of(&bd, a.0, a.1)?, rep_of(&bd, b.0, b.1)?, c, horizon)?)
}

fn claim<M: CliSpace>(s: &M, eta: &str, zeta: &str, k: &Constants) -> Result<Outcome> {
    let b = s.boundary()?;
    let (c_eta, c_zeta) = match (k.c_eta, k.c_zeta) {
        (Some(a), Some(z)) => (a, z),
        _ => {
            let table = s.constants(&b, need_seed(k.seed)?)?;
            (k.c_eta.map_or_else(|| c_lookup(&table, eta), Ok)?, k.c_zeta.map_or_else(|| c_lookup(&table, zeta), Ok)?)
        }
    };
    let products = product_table(s, &b, &ProductSchedule::default())?;
    let r = claim_check(s, find(&b, eta)?, find(&b, zeta)?, c_eta, c_zeta, &products, suite::ESCAPE_HORIZON)?;
    Ok(Outcome { failed: !r.passed(), table: Some("pairs"), ..ok(&r)? })
}

fn need_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| Error::Usage("estimating contraction constants samples pairs; pass --seed".into()))
}

fn basis<M: CliSpace>(s: &M, eta: &str, r: f64, c: Option<f64>, seed: Option<u64>) -> Result<Outcome> {
    let b = s.boundary()?;
    let products = product_table(s, &b, &ProductSchedule::default())?;
    let table = match c {
        Some(_) => Vec::new(),
        None => s.constants(&b, need_seed(seed)?)?,
    };
    let constants = |l: &str| c.map_or_else(|| c_lookup(&table, l), Ok);
    let tol = if M::Scalar::EXACT { 0.0 } else { 1e-9 };
    let rep = neighborhood_basis_check(&products, eta, r, &constants, tol)?;
    Ok(Outcome { failed: !rep.passed, table: Some("rows"), ..ok(&rep)? })
}

fn bproduct<M: CliSpace>(s: &M, eta: Option<&str>, zeta: Option<&str>) -> Result<Outcome> {
    let b = s.boundary()?;
    let schedule = ProductSchedule::default();
    match (eta, zeta) {
        (Some(e), Some(z)) => ok(&boundary_gromov_product(s, find(&b, e)?, find(&b, z)?, &schedule)?),
        _ => {
            let t = product_table(s, &b, &schedule)?;
            let rows: Vec<Value> = t
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "eta": e.eta,
                        "zeta": e.zeta,
                        "value": e.value.as_ref().map_or("inf".to_string(), ToString::to_string),
                        "status": e.status,
                        "windows": e.windows.len(),
                    })
                })
                .collect();
            Ok(Outcome { report: json!({ "space": t.space, "labels": t.labels, "entries": rows }), failed: false, table: Some("entries") })
        }
    }
}

fn converge<M: CliSpace>(s: &M, eta: &str, sequence: &[String], radii: &[f64], hausdorff: bool) -> Result<Outcome> {
    let b = s.boundary()?;
    let t = product_table(s, &b, &ProductSchedule::default())?;
    let tol = if M::Scalar::EXACT { 0.0 } else { 1e-9 };
    let rep = converges_in_gp(&t, sequence, eta, radii, tol)?;
    let mut report = serde_json::to_value(&rep)?;
    if hausdorff {
        report["hausdorff_witness"] = serde_json::to_value(hausdorff_violation_witness(&t, sequence, radii, tol)?)?;
    }
    Ok(Outcome { report, failed: false, table: Some("rows") })
}

fn table_of(spec: &str) -> Result<AnyTable> {
    let schedule = ProductSchedule::default();
    with_space(
        spec,
        |s| Ok(AnyTable::Exact(product_table(s, &s.boundary()?, &schedule)?)),
        |s| Ok(AnyTable::Float(product_table(s, &s.boundary()?, &schedule)?)),
    )
}

enum AnyTable {
    Exact(ProductTable<crate::scalar::Q>),
    Float(ProductTable<f64>),
}

fn continuity(from: &str, to: &str, eta: &str, sequence: &[String], radii: &[f64], image_radii: &[f64]) -> Result<Outcome> {
    let (a, b) = (table_of(from)?, table_of(to)?);
    macro_rules! go {
        ($x:expr, $y:expr) => {
            boundary_map_continuity_test(&matching_labels($x, $y), $x, $y, sequence, eta, radii, image_radii, 1e-9)?
        };
    }
    let rep = match (&a, &b) {
        (AnyTable::Exact(x), AnyTable::Exact(y)) => go!(x, y),
        (AnyTable::Exact(x), AnyTable::Float(y)) => go!(x, y),
        (AnyTable::Float(x), AnyTable::Exact(y)) => go!(x, y),
        (AnyTable::Float(x), AnyTable::Float(y)) => go!(x, y),
    };
    Ok(Outcome { failed: rep.verdict == ContinuityVerdict::Discontinuous, ..ok(&rep)? })
}

fn spiral(from: &str, to: &str, samples: usize, seed: u64, floor: f64, inverse: bool) -> Result<Outcome> {
    let (Loaded::Annulus(a), Loaded::Annulus(b)) = (load_space(from)?, load_space(to)?) else {
        return Err(Error::Usage("the spiral map needs two annulus spaces".into()));
    };
    let (src, dst) = if inverse { (&b, &a) } else { (&a, &b) };
    let map = if inverse { SpiralMap::new(&a, &b).inverse() } else { SpiralMap::new(&a, &b) };
    let top = src.rays().iter().map(|r| r.base.t.abs()).fold(0.0, f64::max);
    let sampler = AnnulusPointSampler::new(src, (-10.0, top + 10.0), (1.0 / 64.0, 4096.0));
    let rep = qi_distortion_estimate(&map, src, dst, &sampler, samples, floor, seed)?;
    Ok(Outcome { table: Some("buckets"), ..ok(&rep)? })
}

/// Criteria touching each named space.
fn criteria_for(space: &str) -> Result<Vec<u8>> {
    Ok(match space {
        "all" => (1..=14).collect(),
        "X" => vec![1, 3, 4, 12, 13],
        "Y" => vec![2, 4, 13],
        "Xcat0" => vec![4, 7, 9, 10],
        "Ycat0" => vec![4, 8, 10],
        "annulus" | "bare" => vec![5, 6, 11, 14],
        _ => return Err(Error::Usage(format!("unknown suite space `{space}`"))),
    })
}

fn paper_suite(space: &str, seed: u64, fixtures: Option<PathBuf>) -> Result<Outcome> {
    let ids = criteria_for(space)?;
    let fixtures = fixtures.or_else(|| {
        let shipped = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
        shipped.is_dir().then_some(shipped)
    });
    let ctx = SuiteContext::new(seed, fixtures);
    let outcomes: Vec<_> = ids.iter().map(|&id| suite::run(id, &ctx)).collect();
    for o in &outcomes {
        eprintln!("criterion {:>2} {} {}: {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.title, o.detail);
    }
    let failed = outcomes.iter().any(|o| !o.passed);
    Ok(Outcome { report: json!({ "seed": seed, "criteria": outcomes }), failed, table: Some("criteria") })
}

fn parse_file(file: &PathBuf) -> Result<Outcome> {
    let text = std::fs::read_to_string(file)?;
    let space = dsl::compile_str(&text)?;
    Ok(Outcome {
        report: json!({
            "space": space.space_id(),
            "edges": space.edge_count(),
            "vertices": space.vertex_count(),
            "lints": space.lints(),
            "canonical": space.canonical_text(),
        }),
        failed: false,
        table: None,
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Dist { space, from, to, geodesic } => on_space!(&space.space, |s| dist(s, from, to, *geodesic)),
        Command::Gromov { space, x, y, z } => on_space!(&space.space, |s| gromov(s, x, y, z)),
        Command::Project { space, point, ray, tol } => on_space!(&space.space, |s| project(s, point, ray, *tol)),
        Command::Profile { space, ray, samples, seed, scale, witnesses } => {
            on_space!(&space.space, |s| profile(s, ray, *samples, *seed, *scale, *witnesses))
        }
        Command::Git { space, ray, from, to, c } => on_space!(&space.space, |s| git(s, ray, from, to, *c)),
        Command::Escape { space, alpha, beta, alpha_rep, beta_rep, c, horizon } => {
            on_space!(&space.space, |s| escape(s, (alpha, *alpha_rep), (beta, *beta_rep), *c, *horizon))
        }
        Command::Claim { space, eta, zeta, constants } => on_space!(&space.space, |s| claim(s, eta, zeta, constants)),
        Command::Basis { space, eta, r, c, seed } => on_space!(&space.space, |s| basis(s, eta, *r, *c, *seed)),
        Command::Bproduct { space, eta, zeta, all } => {
            let (e, z) = if *all { (None, None) } else { (eta.as_deref(), zeta.as_deref()) };
            on_space!(&space.space, |s| bproduct(s, e, z))
        }
        Command::Converge { space, eta, sequence, radii, hausdorff } => {
            let seq = parse_sequence(sequence)?;
            on_space!(&space.space, |s| converge(s, eta, &seq, radii, *hausdorff))
        }
        Command::Continuity { from, to, eta, sequence, radii, image_radii } => {
            continuity(from, to, eta, &parse_sequence(sequence)?, radii, image_radii)
        }
        Command::Spiral { from, to, samples, seed, floor, inverse } => spiral(from, to, *samples, *seed, *floor, *inverse),
        Command::PaperSuite { space, seed, fixtures } => paper_suite(space, *seed, fixtures.clone()),
        Command::Parse { file } => parse_file(file),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Build(_) | Error::Diagnostic(_) | Error::UnknownLabel(_) | Error::Io(_) => 2,
        _ => 1,
    }
}

fn emit(cli: &Cli, argv: &[String], outcome: &Outcome) -> Result<()> {
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match cli.format {
        Format::Json => {
            let value = if outcome.failed {
                json!({ "replay": argv.join(" "), "report": outcome.report })
            } else {
                outcome.report.clone()
            };
            writeln!(sink, "{}", serde_json::to_string(&value)?)?;
        }
        Format::Csv => {
            write_csv_value(sink.as_mut(), &outcome.report, outcome.table)?;
            if outcome.failed {
                eprintln!("replay: {}", argv.join(" "));
            }
        }
    }
    sink.flush()?;
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run(argv: impl IntoIterator<Item = String>) -> i32 {
    let argv: Vec<String> = argv.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(jobs) = cli.jobs {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            match &e {
                Error::Diagnostic(d) => eprintln!("{}:{}:{}: {} {}", argv_file(&cli), d.line, d.col, d.code, d.message),
                other => eprintln!("boundary-lab: {other}"),
            }
            return exit_code(&e);
        }
    };
    match emit(&cli, &argv, &outcome) {
        Ok(()) if outcome.failed => 1,
        Ok(()) => 0,
        Err(e) => {
            eprintln!("boundary-lab: {e}");
            2
        }
    }
}

fn argv_file(cli: &Cli) -> String {
    match &cli.command {
        Command::Parse { file } => file.display().to_string(),
        _ => "<space>".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequences() {
        assert_eq!(parse_sequence("g3..g5").unwrap(), vec!["g3", "g4", "g5"]);
        assert_eq!(parse_sequence("alpha, g2").unwrap(), vec!["alpha", "g2"]);
        assert!(parse_sequence("g5..h6").is_err());
    }

    #[test]
    fn literals() {
        let x = zoo::build_x(4).unwrap();
        assert_eq!(x.parse_point("base").unwrap(), x.basepoint());
        assert!(x.parse_point("alpha").is_err());
        let a = zoo::build_xcat0(3).unwrap();
        assert_eq!(a.parse_point("pt:0,1").unwrap(), a.basepoint());
        assert!(a.parse_point("g9:1").is_err());
    }

    #[test]
    fn unknown_space_is_a_usage_error() {
        let e = load_space("Z:3").err().unwrap();
        assert_eq!(exit_code(&e), 2);
        assert_eq!(exit_code(&load_space("Y:2").err().unwrap()), 2);
    }

    #[test]
    fn csv_rows() {
        let mut out = Vec::new();
        write_csv_value(&mut out, &json!({ "rows": [{ "a": 1, "b": "x" }, { "a": 2, "b": null }] }), Some("rows")).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b\n1,x\n2,\n");
    }
}
