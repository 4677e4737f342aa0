//! The reproduction suite: fourteen numbered checks over the example
//! spaces, each reporting pass/fail with a one-line summary.
//!
//! Expensive shared inputs (product tables, contraction constants) are built
//! lazily once per [`SuiteContext`].

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::annulus::mesh::{MeshOracle, MeshWindow};
use crate::annulus::spiral::{spiral_coords, Direction};
use crate::annulus::{kernel, AnnulusPairSampler, AnnulusPointSampler, AnnulusSpace, Polar};
use crate::boundary::{
    boundary_gromov_product, converges_in_gp, find, hausdorff_violation_witness, matching_labels, product_table, u_set,
    BoundaryPoint, ContinuityVerdict, ProductSchedule, ProductTable,
};
use crate::complex::{ComplexPairSampler, ComplexPointSampler, RayComplex};
use crate::contraction::{
    alpha_log_witnesses, c_lookup, c_table, claim_check, contraction_profile, git_check, neighborhood_basis_check,
    project_onto, CEntry, CTableSettings,
};
use crate::error::{Error, Result};
use crate::metric::{metric_axiom_check, MetricSpace, UnitSpeedRay};
use crate::sampling::trial_rng;
use crate::scalar::{q, Q};
use crate::zoo::{self, annulus_boundary, complex_boundary, dsl};

/// Shipped description of `X` with indices `1..=16`.
pub const X_SPACE: &str = include_str!("../spaces/X.space");
/// Shipped description of `Y` with indices `3..=16`.
pub const Y_SPACE: &str = include_str!("../spaces/Y.space");

/// Truncation sizes used throughout the suite.
pub const N_COMPLEX: i64 = 16;
pub const N_XCAT0: i64 = 12;
pub const N_YCAT0: i64 = 14;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const TITLES: [&str; 14] = [
    "exact products in X",
    "exact products in Y",
    "non-Hausdorff limits in X",
    "discontinuity certificates",
    "annulus kernel vs mesh oracle",
    "strong contraction of alpha in the bare cover",
    "Xcat0 products",
    "Ycat0 isolation",
    "escape-time residuals on Xcat0",
    "neighbourhood-basis condition",
    "projections of far segments",
    "logarithmic profile of alpha in X",
    "space description files",
    "property suites",
];

/// Inputs shared by several criteria.
pub struct SuiteContext {
    pub seed: u64,
    /// Directory of `.space` files that must fail with specific diagnostics.
    pub fixtures: Option<PathBuf>,
    pub schedule: ProductSchedule,
    xcat0: OnceLock<Result<Annulus, String>>,
    ycat0: OnceLock<Result<Annulus, String>>,
}

/// An annulus space with its boundary, product table and constants.
pub struct Annulus {
    pub space: AnnulusSpace,
    pub boundary: Vec<BoundaryPoint>,
    pub table: ProductTable<f64>,
    pub constants: Vec<CEntry>,
}

impl Annulus {
    fn build(space: AnnulusSpace, schedule: &ProductSchedule, seed: u64) -> Result<Self> {
        let boundary = annulus_boundary(&space)?;
        let mut table = product_table(&space, &boundary, schedule)?;
        let constants = c_table(&space, &boundary, &CTableSettings { seed, ..CTableSettings::default() })?;
        let map: BTreeMap<String, f64> = constants.iter().map(|e| (e.label.clone(), e.c)).collect();
        table.attach_error_bars(&map);
        Ok(Annulus { space, boundary, table, constants })
    }
}

impl SuiteContext {
    pub fn new(seed: u64, fixtures: Option<PathBuf>) -> Self {
        SuiteContext {
            seed,
            fixtures,
            schedule: ProductSchedule::default(),
            xcat0: OnceLock::new(),
            ycat0: OnceLock::new(),
        }
    }

    pub fn xcat0(&self) -> Result<&Annulus> {
        self.xcat0
            .get_or_init(|| {
                zoo::build_xcat0(N_XCAT0).and_then(|s| Annulus::build(s, &self.schedule, self.seed)).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Inconclusive(e.clone()))
    }

    pub fn ycat0(&self) -> Result<&Annulus> {
        self.ycat0
            .get_or_init(|| {
                zoo::build_ycat0(N_YCAT0).and_then(|s| Annulus::build(s, &self.schedule, self.seed)).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Inconclusive(e.clone()))
    }
}

/// Runs one criterion; errors count as failures.
pub fn run(id: u8, ctx: &SuiteContext) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => exact_products_x(ctx),
        2 => exact_products_y(ctx),
        3 => non_hausdorff(ctx),
        4 => discontinuity(ctx),
        5 => kernel_vs_oracle(ctx),
        6 => alpha_strongly_contracting(ctx),
        7 => xcat0_products(ctx),
        8 => ycat0_isolation(ctx),
        9 => claim_residuals(ctx),
        10 => basis_condition(ctx),
        11 => far_segments(ctx),
        12 => log_profile(ctx),
        13 => description_files(ctx),
        14 => property_suites(ctx),
        _ => Err(Error::Usage(format!("no criterion {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok((ok, detail)) => (ok, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let title = TITLES.get(usize::from(id).wrapping_sub(1)).copied().unwrap_or("unknown");
    CriterionOutcome { id, title, passed, detail, seconds }
}

pub fn run_all(ctx: &SuiteContext) -> Vec<CriterionOutcome> {
    (1..=14).map(|id| run(id, ctx)).collect()
}

type Check = Result<(bool, String)>;

fn labels(prefix: &str, range: std::ops::RangeInclusive<i64>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn complex_table(x: &RayComplex, ctx: &SuiteContext) -> Result<ProductTable<Q>> {
    product_table(x, &complex_boundary(x)?, &ctx.schedule)
}

fn exact_products_x(ctx: &SuiteContext) -> Check {
    let start = Instant::now();
    let x = zoo::build_x(N_COMPLEX)?;
    let t = complex_table(&x, ctx)?;
    let mut bad = Vec::new();
    for i in 1..=N_COMPLEX {
        let g = format!("g{i}");
        for a in ["alpha", "beta"] {
            let e = t.get(a, &g)?;
            if !e.is_converged() || e.value != Some(q(i)) {
                bad.push(format!("({a}, {g}) = {:?}", e.value.as_ref().map(ToString::to_string)));
            }
        }
    }
    let ab = t.get("alpha", "beta")?;
    if ab.value != Some(q(0)) {
        bad.push("(alpha, beta) != 0".into());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((bad.is_empty() && secs < 5.0, format!("{} exact checks, {} wrong, {secs:.2}s (limit 5s) {bad:?}", 2 * N_COMPLEX + 1, bad.len())))
}

fn exact_products_y(ctx: &SuiteContext) -> Check {
    let y = zoo::build_y(N_COMPLEX)?;
    let t = complex_table(&y, ctx)?;
    let mut bad = Vec::new();
    for i in zoo::Y_DEFAULT_START..=N_COMPLEX {
        let g = format!("g{i}");
        for (a, want) in [("alpha", 0), ("beta", i)] {
            let e = t.get(a, &g)?;
            if !e.is_converged() || e.value != Some(q(want)) {
                bad.push(format!("({a}, {g})"));
            }
        }
    }
    Ok((bad.is_empty(), format!("indices {}..={N_COMPLEX}, {} wrong {bad:?}", zoo::Y_DEFAULT_START, bad.len())))
}

fn non_hausdorff(ctx: &SuiteContext) -> Check {
    let x = zoo::build_x(N_COMPLEX)?;
    let t = complex_table(&x, ctx)?;
    let seq = labels("g", 1..=N_COMPLEX);
    let radii: Vec<f64> = (1..=30).map(|k| k as f64 / 2.0).collect();
    let witness = hausdorff_violation_witness(&t, &seq, &radii, 0.0)?;
    let mut ok = witness == Some(("alpha".to_string(), "beta".to_string()));
    let mut mismatches = 0;
    for eta in ["alpha", "beta"] {
        let rep = converges_in_gp(&t, &seq, eta, &radii, 0.0)?;
        for row in &rep.rows {
            if row.first_position != Some(row.r.ceil() as usize) {
                mismatches += 1;
            }
        }
        ok &= rep.converges;
    }
    ok &= mismatches == 0;
    Ok((ok, format!("witness {witness:?}; I(r) = ceil(r) for r = 0.5..15 with {mismatches} mismatches")))
}

fn discontinuity(ctx: &SuiteContext) -> Check {
    let start = Instant::now();
    let x = zoo::build_x_range(zoo::Y_DEFAULT_START, N_COMPLEX)?;
    let y = zoo::build_y(N_COMPLEX)?;
    let (tx, ty) = (complex_table(&x, ctx)?, complex_table(&y, ctx)?);
    let seq = labels("g", zoo::Y_DEFAULT_START..=N_COMPLEX);
    let up_radii = [1.0, 2.0, 4.0, 8.0];
    let rep = crate::boundary::boundary_map_continuity_test(&matching_labels(&tx, &ty), &tx, &ty, &seq, "alpha", &up_radii, &[1.0], 0.0)?;
    let first = certificate_summary(&rep);

    let (xc, yc) = (ctx.xcat0()?, ctx.ycat0()?);
    // The spiral map sends each base (i, 2^i) to (0, 2^i), so it pairs g_i with g_i.
    let mut bases_ok = true;
    for ray in xc.space.rays() {
        let image = spiral_coords(ray.base, Direction::Forward);
        let target = yc.space.base_of(ray.id)?;
        bases_ok &= (image.t - target.t).abs() < 1e-12 && (image.r - target.r).abs() < 1e-12;
    }
    let seq = labels("g", 1..=N_XCAT0);
    let rep2 = crate::boundary::boundary_map_continuity_test(
        &matching_labels(&xc.table, &yc.table),
        &xc.table,
        &yc.table,
        &seq,
        "alpha",
        &up_radii,
        &[1.0],
        1e-9,
    )?;
    let second = certificate_summary(&rep2);
    let secs = start.elapsed().as_secs_f64();
    let ok = first.0 && second.0 && bases_ok && secs < 30.0;
    Ok((ok, format!("X->Y: {}; Xcat0->Ycat0: {}; bases paired: {bases_ok}; {secs:.1}s (limit 30s)", first.1, second.1)))
}

fn certificate_summary(rep: &crate::boundary::ContinuityReport) -> (bool, String) {
    match &rep.certificate {
        Some(c) => {
            let max = c.outside.iter().map(|t| t.product).fold(f64::NEG_INFINITY, f64::max);
            let ok = rep.verdict == ContinuityVerdict::Discontinuous && c.r == 1.0 && max <= 0.5 && c.outside.len() == c.tested_terms;
            (ok, format!("certificate at r = {}, {}/{} terms outside, max image product {max:.4}", c.r, c.outside.len(), c.tested_terms))
        }
        None => (false, format!("no certificate (verdict {:?})", rep.verdict)),
    }
}

/// Oracle window and spacing.
pub const MESH_WINDOW: MeshWindow = MeshWindow { t: (-20.0, 20.0), r: (1.0, 50.0) };
pub const MESH_H: f64 = 0.01;

fn kernel_vs_oracle(ctx: &SuiteContext) -> Check {
    let start = Instant::now();
    let oracle = MeshOracle::new(MESH_WINDOW, MESH_H)?.with_env_cache();
    let (sources, per_source) = (5usize, 20usize);
    let mut rng = trial_rng(ctx.seed, 5);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<Polar> {
        let p = Polar { t: rng.gen_range(-14.0..14.0), r: crate::sampling::log_uniform(rng, 1.0, 30.0) };
        oracle.node_near(p)
    };
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..sources {
        let s = draw(&mut rng)?;
        let mut targets = Vec::new();
        while targets.len() < per_source {
            let p = draw(&mut rng)?;
            if kernel::ann_distance(s, p)? >= 1.0 {
                targets.push(p);
            }
        }
        for (p, m) in targets.iter().zip(oracle.distances_from(s, &targets)?) {
            let d = kernel::ann_distance(s, *p)?;
            worst = worst.max((m.value - d).abs() / d);
            compared += 1;
        }
    }
    // Continuity across the switch between the chord and wrap formulas.
    let mut jump: f64 = 0.0;
    for k in 0..200 {
        let mut r = trial_rng(ctx.seed, 500 + k);
        let (rp, rq) = (1.0 + r.gen::<f64>() * 40.0, 1.0 + r.gen::<f64>() * 40.0);
        let delta = kernel::tangent_angle(rp) + kernel::tangent_angle(rq);
        jump = jump.max((kernel::chord_length(rp, rq, delta) - kernel::wrap_length(rp, rq, delta)).abs());
        let (a, b) = (Polar { t: 0.0, r: rp }, Polar { t: delta, r: rq });
        let nudged = Polar { t: delta * (1.0 - 1e-15), r: rq };
        jump = jump.max((kernel::ann_distance(a, b)? - kernel::ann_distance(a, nudged)?).abs() - 1e-13);
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = compared == 100 && worst <= 0.02 && jump <= 1e-9 && secs < 60.0;
    Ok((ok, format!("{compared} pairs, max relative error {:.3}%, branch jump {jump:.2e}, {secs:.1}s (limit 60s)", 100.0 * worst)))
}

fn alpha_strongly_contracting(ctx: &SuiteContext) -> Check {
    let bare = AnnulusSpace::bare();
    let alpha = bare.alpha();
    let points = AnnulusPointSampler::new(&bare, (-10.0, 40.0), (1.0 / 64.0, 2000.0));
    let sampler = AnnulusPairSampler::new(points, 1e-9);
    let profile = contraction_profile(&bare, &alpha, &sampler, 11_000, ctx.seed, 1e-9, &[])?;
    let admissible = profile.samples - profile.rejected;
    let max = profile.max_diameter();
    let ok = admissible >= 10_000 && max <= std::f64::consts::PI + 0.01;
    Ok((ok, format!("{admissible} admissible pairs, max joint diameter {max:.4} (bound pi + 0.01)")))
}

fn xcat0_products(ctx: &SuiteContext) -> Check {
    let a = ctx.xcat0()?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 2..=N_XCAT0 {
        let e = a.table.get("alpha", &format!("g{i}"))?;
        ok &= e.is_converged();
        worst = worst.max((e.value_f64() - i as f64).abs());
    }
    ok &= worst <= 0.5;
    Ok((ok, format!("max |(alpha . g_i) - i| = {worst:.2e} for i = 2..={N_XCAT0}")))
}

fn ycat0_isolation(ctx: &SuiteContext) -> Check {
    let a = ctx.ycat0()?;
    let mut alpha_max: f64 = 0.0;
    let mut pair_err: f64 = 0.0;
    let mut isolated = 0;
    let mut ok = true;
    for i in 1..=N_YCAT0 {
        let gi = format!("g{i}");
        let e = a.table.get("alpha", &gi)?;
        ok &= e.is_converged();
        alpha_max = alpha_max.max(e.value_f64());
        for j in i + 1..=N_YCAT0 {
            let e = a.table.get(&gi, &format!("g{j}"))?;
            ok &= e.is_converged();
            pair_err = pair_err.max((e.value_f64() - ((i as f64).exp2() - 1.0)).abs());
        }
        if u_set(&a.table, &gi, (i as f64).exp2(), 0.0)? == vec![gi.clone()] {
            isolated += 1;
        }
    }
    ok &= alpha_max <= 0.3 && pair_err <= 1e-6 && isolated == N_YCAT0;
    Ok((
        ok,
        format!("max (alpha . g_i) = {alpha_max:.4}; max |(g_i . g_j) - (2^min - 1)| = {pair_err:.1e}; {isolated}/{N_YCAT0} isolated"),
    ))
}

/// Horizon for escape-time sweeps.
pub const ESCAPE_HORIZON: f64 = 1e7;

fn claim_residuals(ctx: &SuiteContext) -> Check {
    let a = ctx.xcat0()?;
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut worst_ratio: f64 = 0.0;
    for eta in &a.boundary {
        for zeta in &a.boundary {
            if eta.label == zeta.label {
                continue;
            }
            let (ce, cz) = (c_lookup(&a.constants, &eta.label)?, c_lookup(&a.constants, &zeta.label)?);
            let rep = claim_check(&a.space, eta, zeta, ce, cz, &a.table, ESCAPE_HORIZON)?;
            checked += 1;
            worst_ratio = worst_ratio.max(rep.k_residual / ce);
            violations.extend(rep.violations.iter().map(|v| format!("({}, {}): {v}", eta.label, zeta.label)));
        }
    }
    Ok((
        violations.is_empty(),
        format!("{checked} ordered pairs x 4 representative pairs, {} violations, max |T - product| / C = {worst_ratio:.2} {violations:?}", violations.len()),
    ))
}

fn basis_condition(ctx: &SuiteContext) -> Check {
    let mut runs = 0;
    let mut failures = Vec::new();
    for (name, a) in [("Xcat0", ctx.xcat0()?), ("Ycat0", ctx.ycat0()?)] {
        let constants = |l: &str| c_lookup(&a.constants, l);
        for eta in &a.table.labels {
            for r in [1.0, 2.0, 4.0, 8.0] {
                let rep = neighborhood_basis_check(&a.table, eta, r, &constants, 1e-9)?;
                runs += 1;
                if !rep.passed {
                    failures.push(format!("{name}: {eta} at r = {r}"));
                }
            }
        }
    }
    Ok((failures.is_empty(), format!("{runs} (space, eta, r) instances, {} failures {failures:?}", failures.len())))
}

fn far_segments(ctx: &SuiteContext) -> Check {
    let bare = AnnulusSpace::bare();
    let alpha = bare.alpha();
    let c = std::f64::consts::PI;
    let (mut accepted, mut attempts) = (0, 0);
    let mut worst: f64 = 0.0;
    while accepted < 1000 && attempts < 50_000 {
        let mut rng = trial_rng(ctx.seed, 11_000_000 + attempts);
        attempts += 1;
        let mut pick = || bare.point(rng.gen_range(-20.0..40.0), 1.0 + 2.0 * c + crate::sampling::log_uniform(&mut rng, 0.01, 200.0));
        let (p, q) = (pick()?, pick()?);
        let seg = bare.geodesic(&p, &q, 0.25)?;
        match git_check(&bare, &alpha, &seg, c, 1e-9) {
            Ok(r) => {
                accepted += 1;
                worst = worst.max(r.diameter);
            }
            Err(Error::Precondition(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let ok = accepted == 1000 && worst <= 4.0 * c;
    Ok((ok, format!("{accepted} segments at distance >= 2C ({attempts} drawn), max projection diameter {worst:.4} (bound 4 pi)")))
}

fn log_profile(ctx: &SuiteContext) -> Check {
    let x = zoo::build_x(N_COMPLEX)?;
    let alpha = x.rc_ray("alpha")?;
    let sampler = ComplexPairSampler::new(&x, 1024.0);
    let extra = alpha_log_witnesses(&x, 4..=14)?;
    let profile = contraction_profile(&x, &alpha, &sampler, 2000, ctx.seed, 0.0, &extra)?;
    let mut ok = true;
    let mut ratios = Vec::new();
    for i in 4..=14 {
        let bin = profile.bin(i).ok_or_else(|| Error::Inconclusive(format!("bucket {i} empty")))?;
        let ratio = bin.max_diameter / i as f64;
        ok &= bin.max_diameter >= i as f64 && (0.5..=2.5).contains(&ratio);
        ratios.push(ratio);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    Ok((ok, format!("rho(2^i) / i in [{lo:.3}, {hi:.3}] for i = 4..=14")))
}

/// Codes each fixture must produce, keyed by file stem.
pub const FIXTURE_CODES: [(&str, &str); 5] = [
    ("syntax", "E_SYNTAX"),
    ("undeclared", "E_UNDECLARED"),
    ("nonpositive", "E_LENGTH_NONPOSITIVE"),
    ("no_basepoint", "E_NO_BASEPOINT"),
    ("disconnected", "E_DISCONNECTED"),
];

fn description_files(ctx: &SuiteContext) -> Check {
    let x_ok = dsl::compile_str(X_SPACE)?.canonical_text() == zoo::build_x(N_COMPLEX)?.canonical_text();
    let y_ok = dsl::compile_str(Y_SPACE)?.canonical_text() == zoo::build_y(N_COMPLEX)?.canonical_text();
    let mut round_trips = 0;
    for case in 0..50 {
        let text = random_description(&mut trial_rng(ctx.seed, 13_000 + case));
        let first = dsl::compile_str(&text)?;
        let again = dsl::compile_str(&dsl::serialize(&first))?;
        if again.canonical_text() == first.canonical_text() && again.space_id() == first.space_id() {
            round_trips += 1;
        }
    }
    let mut codes = 0;
    let mut notes = Vec::new();
    if let Some(dir) = &ctx.fixtures {
        for (stem, code) in FIXTURE_CODES {
            let text = std::fs::read_to_string(dir.join(format!("{stem}.space")))?;
            match dsl::compile_str(&text) {
                Err(d) if d.code == code => codes += 1,
                other => notes.push(format!("{stem}: {:?}", other.err())),
            }
        }
    } else {
        notes.push("no fixture directory".into());
    }
    let ok = x_ok && y_ok && round_trips == 50 && codes == 5;
    Ok((ok, format!("X.space matches: {x_ok}, Y.space matches: {y_ok}, round trips {round_trips}/50, diagnostics {codes}/5 {notes:?}")))
}

/// A random connected description: a few rays and segments chained by glues.
pub fn random_description(rng: &mut rand_chacha::ChaCha8Rng) -> String {
    let mut text = String::from("ray r0\nbase r0:0\n");
    let n = rng.gen_range(1..8);
    let mut anchors = vec![("r0".to_string(), None::<i64>)];
    for k in 1..=n {
        let id = format!("e{k}");
        let (host, len) = anchors[rng.gen_range(0..anchors.len())].clone();
        let at = match len {
            Some(l) => rng.gen_range(0..=l),
            None => rng.gen_range(0..20),
        };
        if rng.gen_bool(0.4) {
            text.push_str(&format!("ray {id}\n"));
            anchors.push((id.clone(), None));
        } else {
            let l = rng.gen_range(1..12);
            let den = rng.gen_range(1..4);
            text.push_str(&format!("seg {id} {l}/{den}\n"));
            anchors.push((id.clone(), Some(0)));
        }
        text.push_str(&format!("glue {id}:0 {host}:{at}\n"));
    }
    text
}

fn property_suites(ctx: &SuiteContext) -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    // Metric axioms.
    let x = zoo::build_x(8)?;
    let xs = ComplexPointSampler::new(&x, 64.0);
    let ax = metric_axiom_check(&x, &xs, 300, ctx.seed)?;
    let xc = zoo::build_xcat0(6)?;
    let cs = AnnulusPointSampler::new(&xc, (-10.0, 20.0), (0.01, 100.0));
    let ac = metric_axiom_check(&xc, &cs, 3000, ctx.seed)?;
    let axioms = ax.passed() && ac.passed();
    notes.push(format!("axioms {axioms}"));

    // Projection idempotence.
    let mut idem = true;
    let rays: Vec<UnitSpeedRay> = vec![xc.alpha(), xc.beta(), xc.ray_through("g3", 3, Polar { t: 0.0, r: 1.0 })?];
    for trial in 0..200u64 {
        let p = crate::sampling::PointSampler::sample(&cs, &mut trial_rng(ctx.seed, trial));
        let ray = &rays[trial as usize % rays.len()];
        let proj = project_onto(&xc, &p, ray, 1e-9)?;
        let foot = xc.ray_point(ray, &proj.intervals[0].0)?;
        let again = project_onto(&xc, &foot, ray, 1e-9)?;
        idem &= again.distance <= 1e-7 && again.intervals.iter().any(|&(lo, hi)| lo - 1e-6 <= proj.intervals[0].0 && proj.intervals[0].0 <= hi + 1e-6);
    }
    let xb = complex_boundary(&x)?;
    let alpha = x.rc_ray("alpha")?;
    for trial in 0..100u64 {
        let p = crate::sampling::PointSampler::sample(&xs, &mut trial_rng(ctx.seed, trial));
        let proj = project_onto(&x, &p, &alpha, 0.0)?;
        let foot = x.ray_point(&alpha, &proj.intervals[0].0)?;
        idem &= project_onto(&x, &foot, &alpha, 0.0)?.distance == q(0);
    }
    notes.push(format!("idempotence {idem}"));

    // Product symmetry.
    let mut sym = true;
    for a in &xb {
        for b in &xb {
            let (ab, ba) = (boundary_gromov_product(&x, a, b, &ctx.schedule)?, boundary_gromov_product(&x, b, a, &ctx.schedule)?);
            sym &= ab.value == ba.value;
        }
    }
    let ab = annulus_boundary(&xc)?;
    for a in &ab {
        for b in &ab {
            let (p, q) = (boundary_gromov_product(&xc, a, b, &ctx.schedule)?, boundary_gromov_product(&xc, b, a, &ctx.schedule)?);
            sym &= p.value == q.value;
        }
    }
    notes.push(format!("symmetry {sym}"));

    // Determinism under a fixed seed.
    let sampler = AnnulusPairSampler::new(AnnulusPointSampler::new(&xc, (-10.0, 20.0), (0.1, 200.0)), 1e-9);
    let run = || -> Result<String> {
        let p = contraction_profile(&xc, &rays[2], &sampler, 200, ctx.seed, 1e-9, &[])?;
        Ok(serde_json::to_string(&p)?)
    };
    let det = run()? == run()?;
    let g3 = find(&ab, "g3")?;
    let det = det && boundary_gromov_product(&xc, g3, &ab[0], &ctx.schedule)?.value == boundary_gromov_product(&xc, g3, &ab[0], &ctx.schedule)?.value;
    notes.push(format!("determinism {det}"));

    let secs = start.elapsed().as_secs_f64();
    let ok = axioms && idem && sym && det && secs < 120.0;
    Ok((ok, format!("{} in {secs:.1}s (limit 120s)", notes.join(", "))))
}
