//! One function per subcommand, each returning report rows.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use permgram::boson::{self, moment_experiment_with};
use permgram::dense_ops::{pt_singular_law, LegSubset};
use permgram::exact::{factorial, from_int, rational, to_f64};
use permgram::gram::{self, build_gram_with, compare_multisets, spectral_report_with, CayleyBound};
use permgram::locality::{self, BoundReport, OperatorKind};
use permgram::random_moments::{self, cs_unitary_exact, wick_exact};
use permgram::schur_weyl::{exact_spectrum, moment_ratio, moment_ratio_window};
use permgram::setpart::{self, GramVariant};
use permgram::symgroup::{self, CycleType, Permutation};
use permgram::weingarten::{self, invert_gram, MoebiusSign};
use permgram::{Limits, Result};

use crate::report::{Ctx, Rows};

/// Resources available to a run.
#[derive(Clone, Debug)]
pub struct Env {
    pub limits: Limits,
    pub threads: usize,
}

fn q(x: &BigRational) -> (f64, Option<String>) {
    (to_f64(x), Some(x.to_string()))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Exact eigenvalue multiset as `(value, rendering)`, ascending, kernel included.
fn exact_eigenvalues(n: usize, d: usize) -> Result<Vec<(f64, String)>> {
    let spectrum = exact_spectrum(n, d)?;
    let mut out = Vec::new();
    let kernel = num_traits::ToPrimitive::to_usize(&spectrum.kernel_dimension).unwrap_or(0);
    out.extend(std::iter::repeat((0.0, "0".to_string())).take(kernel));
    for e in &spectrum.entries {
        let mult = num_traits::ToPrimitive::to_usize(&e.multiplicity).unwrap_or(0);
        out.extend(std::iter::repeat((to_f64(&e.eigenvalue), e.eigenvalue.to_string())).take(mult));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

const EIG_TOL: f64 = 1e-9;

/// Absolute slack for Monte Carlo entries whose exact value is structurally zero.
const MC_ATOL: f64 = 1e-10;

fn eig_tol(x: f64) -> f64 {
    EIG_TOL * x.abs().max(1.0)
}

pub fn gram(n: usize, d: usize, env: &Env) -> Result<Rows> {
    let ctx = Ctx::new("gram").n(n).d(d);
    let mut rows = Rows::default();
    let g = build_gram_with(n, d, &env.limits)?;
    let report = spectral_report_with(&g, &env.limits)?;
    let exact = exact_eigenvalues(n, d)?;
    for (i, (num, (ex, label))) in report.numeric_eigenvalues.iter().zip(&exact).enumerate() {
        rows.close(&ctx, &format!("eigenvalue[{i}]"), *num, *ex, eig_tol(*ex), "content-product spectrum");
        rows.annotate(label.clone());
    }
    extremal_rows(&mut rows, &ctx, &report, n, d);

    let literal = g.literal_row_sum(0);
    let closed = gram::row_sum(n, d);
    let (v, s) = q(&literal);
    rows.exact(&ctx, "row_sum", v, s, literal == closed, "row-sum product identity");
    cayley_row(&mut rows, &ctx, &closed, n, d);

    let witness = gram::antisymmetric_witness(n, d)?;
    let falling = gram::falling_factorial(d, n);
    rows.exact(
        &ctx,
        "antisymmetric_witness",
        to_f64(&from_int(witness.clone())),
        Some(witness.to_string()),
        witness == falling,
        "signed cycle sum equals falling factorial",
    );
    Ok(rows)
}

fn extremal_rows(rows: &mut Rows, ctx: &Ctx, report: &gram::SpectralReport, n: usize, d: usize) {
    let (lmin, lmin_s) = q(&report.lambda_min_formula);
    let (lmax, lmax_s) = q(&report.lambda_max_formula);
    rows.close(ctx, "lambda_min", report.numeric_min(), lmin, eig_tol(lmin), "extremal eigenvalue products");
    rows.annotate(lmin_s.unwrap_or_default());
    rows.close(ctx, "lambda_max", report.numeric_max(), lmax, eig_tol(lmax), "extremal eigenvalue products");
    rows.annotate(lmax_s.unwrap_or_default());

    let pairs = rational((n * (n - 1)) as i64, 2 * d as i64);
    let floor = BigRational::one() - &pairs;
    rows.lower(
        ctx,
        "lambda_min_lower_bound",
        lmin,
        to_f64(&floor),
        report.lambda_min_formula >= floor,
        "gram eigenvalue window",
    );
    let (exp_lower, _) = locality::exp_interval(&pairs);
    rows.upper(
        ctx,
        "lambda_max_upper_bound",
        lmax,
        to_f64(&pairs).exp(),
        report.lambda_max_formula <= exp_lower,
        "gram eigenvalue window",
    );
    if n <= d {
        let bound = 2f64.sqrt() * n as f64 / d as f64;
        let v = report.trace_distance_to_identity;
        rows.upper(ctx, "trace_norm_distance", v, bound, v <= bound, "normalized trace-norm bound");
    }
    rows.info(ctx, "op_norm_distance", report.op_norm_distance, None, "max |lambda - 1|");
}

fn cayley_row(rows: &mut Rows, ctx: &Ctx, closed: &BigRational, n: usize, d: usize) {
    match gram::cayley_bound(n, d) {
        CayleyBound::Finite(b) => rows.upper(
            ctx,
            "cayley_bound",
            to_f64(closed),
            to_f64(&b),
            *closed <= b,
            "geometric bound from the transposition Cayley graph",
        ),
        CayleyBound::Divergent => rows.info(
            ctx,
            "cayley_bound",
            f64::INFINITY,
            Some("divergent: C(n,2) >= d".into()),
            "geometric bound from the transposition Cayley graph",
        ),
    }
}

pub fn spectrum(n_max: usize, d_max: usize, env: &Env) -> Result<Rows> {
    if n_max < 2 || d_max < 2 {
        return Err(permgram::Error::Precondition("spectrum sweeps 2..=n by 2..=d; need n, d ≥ 2".into()));
    }
    let mut rows = Rows::default();
    for n in 2..=n_max {
        for d in 2..=d_max {
            let ctx = Ctx::new("spectrum").n(n).d(d);
            let g = build_gram_with(n, d, &env.limits)?;
            let report = spectral_report_with(&g, &env.limits)?;
            let exact = exact_spectrum(n, d)?.sorted_values();
            let excess = compare_multisets(&report.numeric_eigenvalues, &exact, 1e-12, EIG_TOL).unwrap_or(f64::INFINITY);
            rows.upper(
                &ctx,
                "multiset_excess",
                excess,
                0.0,
                excess <= 0.0,
                "content-product spectrum with kernel",
            );
            extremal_rows(&mut rows, &ctx, &report, n, d);
        }
    }
    Ok(rows)
}

/// Exact row-sum and falling-factorial identities over a grid.
pub fn identities(n_max: usize, d_max: usize, falling_d_max: usize, env: &Env) -> Result<Rows> {
    let mut rows = Rows::default();
    for n in 1..=n_max {
        for d in 1..=d_max.max(falling_d_max) {
            let ctx = Ctx::new("identities").n(n).d(d);
            if d <= d_max {
                let g = build_gram_with(n, d, &env.limits)?;
                let literal = g.literal_row_sum(0);
                let product = (1..n).fold(BigRational::one(), |acc, j| acc * rational((d + j) as i64, d as i64));
                let (v, s) = q(&literal);
                rows.exact(&ctx, "row_sum", v, s, literal == product, "row-sum product identity");
                if n * (n - 1) / 2 < d {
                    cayley_row(&mut rows, &ctx, &product, n, d);
                }
            }
            let witness = gram::antisymmetric_witness(n, d)?;
            let falling = gram::falling_factorial(d, n);
            let holds = witness == falling && (n <= d || witness.is_zero());
            rows.exact(
                &ctx,
                "antisymmetric_witness",
                to_f64(&from_int(witness.clone())),
                Some(witness.to_string()),
                holds,
                "signed cycle sum equals falling factorial",
            );
        }
    }
    Ok(rows)
}

fn moment_side_ok(n: usize, d: usize) -> bool {
    (d as f64).powi(2 * n as i32) <= 256.0
}

/// Exact inverse, class-function property, class values and Möbius values.
pub fn weingarten_exact(n: usize, d: usize, env: &Env) -> Result<Rows> {
    let ctx = Ctx::new("weingarten").n(n).d(d);
    let mut rows = Rows::default();
    let g = build_gram_with(n, d, &env.limits)?;
    let wg = invert_gram(&g)?;
    let inverts = wg.inverts(&g)?;
    rows.exact(&ctx, "exact_inverse", flag(inverts), None, inverts, "gram times weingarten is the identity");
    let violations = wg.class_function_violations();
    rows.exact(
        &ctx,
        "class_function_violations",
        violations as f64,
        None,
        violations == 0,
        "weingarten entries depend only on the cycle type",
    );
    for (t, v) in wg.class_values() {
        let (f, s) = q(v);
        rows.info(&ctx, &format!("class_value[{t}]"), f, s, "exact weingarten class value");
    }
    for t in wg.class_values().keys() {
        let m = weingarten::moebius(t);
        rows.info(
            &ctx,
            &format!("moebius[{t}]"),
            to_f64(&from_int(m.clone())),
            Some(m.to_string()),
            "signed catalan product",
        );
    }
    Ok(rows)
}

pub fn weingarten(n: usize, d: usize, samples: usize, seed: u64, env: &Env) -> Result<Rows> {
    let mut rows = weingarten_exact(n, d, env)?;
    if (2..=4).contains(&n) {
        rows.extend(asymptotics(n)?);
    }
    if samples > 0 && moment_side_ok(n, d) {
        rows.extend(moments(n, d, samples, seed, env)?);
    }
    Ok(rows)
}

/// Leading-order decay for the `n`-cycle class (`n ≤ 3`) or the fixed check
/// at `n = 4`, `d = 64`.
pub fn asymptotics(n: usize) -> Result<Rows> {
    let t = CycleType::new(vec![n])?;
    let mut rows = Rows::default();
    let convention = weingarten::resolved_sign_convention();
    let ctx = Ctx::new("asymptotics").n(n);
    rows.info(
        &ctx,
        "moebius_sign_convention",
        flag(convention == MoebiusSign::Alternating),
        Some(format!("{convention:?}").to_lowercase()),
        "sign pinned by exact inversion at n=3, d=100",
    );
    if n <= 3 {
        let table = weingarten::asymptotic_check(&t, &[25, 50, 100])?;
        for (w, &(obs, exp)) in table.rows.windows(2).zip(&table.decay) {
            let c = ctx.clone().aux(format!("class={t};d={}->{}", w[0].d, w[1].d));
            rows.close(&c, "residual_decay", obs, exp, 0.3 * exp, "leading weingarten asymptotics");
        }
        let sm = table.sign_matches();
        rows.exact(&ctx, "sign_matches", flag(sm), None, sm, "leading weingarten asymptotics");
    } else {
        let d = 64;
        let value = weingarten::class_value(&t, d)? * from_int(num_traits::pow(num_bigint::BigInt::from(d), n - 1));
        let m = weingarten::moebius(&t);
        let c = ctx.clone().d(d).aux(format!("class={t}"));
        rows.close(&c, "scaled_class_value", to_f64(&value), to_f64(&from_int(m)), 0.5, "leading weingarten asymptotics");
    }
    Ok(rows)
}

/// Monte Carlo Haar and Ginibre tensor moments against the exact formulas.
pub fn moments(n: usize, d: usize, samples: usize, seed: u64, env: &Env) -> Result<Rows> {
    let ctx = Ctx::new("moments").n(n).d(d).aux(format!("samples={samples}"));
    let mut rows = Rows::default();
    let wg = invert_gram(&build_gram_with(n, d, &env.limits)?)?;
    let cs = cs_unitary_exact(&wg)?;
    let wick = wick_exact(n, d)?;
    let nf = to_f64(&from_int(factorial(n)));
    rows.close(&ctx, "haar_exact_trace", cs.trace().re, nf, 1e-9 * nf, "trace of the exact haar moment");

    let haar = random_moments::haar_moment_mc(n, d, samples, seed, env.threads)?;
    let excess = haar.worst_excess(cs.data(), 6.0, MC_ATOL)?;
    rows.upper(&ctx, "haar_mc_excess", excess, 0.0, excess <= 0.0, "haar moment via weingarten, 6 stderr");
    rows.info(&ctx, "haar_mc_max_z", haar.max_z_score(cs.data()), None, "haar moment via weingarten");

    let gin = random_moments::ginibre_moment_mc(n, d, samples, seed, env.threads)?;
    let excess = gin.worst_excess(wick.data(), 6.0, MC_ATOL)?;
    rows.upper(&ctx, "ginibre_mc_excess", excess, 0.0, excess <= 0.0, "ginibre moment via wick, 6 stderr");
    rows.info(&ctx, "ginibre_mc_max_z", gin.max_z_score(wick.data()), None, "ginibre moment via wick");

    let gap = random_moments::wick_haar_gap(n, d)?;
    let dense_gap = wick.sub(&cs)?.operator_norm();
    rows.close(&ctx, "wick_haar_gap", dense_gap, gap, 1e-9, "gap equals max |lambda(G) - 1|");
    if n == 2 {
        rows.close(&ctx, "wick_haar_gap_two", gap, 1.0 / d as f64, 1e-12, "gap equals 1/d at n=2");
    }
    Ok(rows)
}

pub fn norms(n: usize, d: usize, seed: u64) -> Result<Rows> {
    let perms = symgroup::enumerate(n)?;
    let count = perms.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity = vec![0.0; count];
    identity[0] = 1.0;
    let vectors: Vec<(&str, Vec<f64>)> = vec![
        ("identity", identity),
        ("uniform", vec![1.0 / count as f64; count]),
        ("sign", perms.iter().map(|p| symgroup::sign(p) as f64).collect()),
        ("random", (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect()),
    ];
    let mut rows = Rows::default();
    for (label, a) in vectors {
        let ctx = Ctx::new("norms").n(n).d(d).aux(format!("vector={label}"));
        let r = gram::norm_window(&a, n, d)?;
        let w = &r.window;
        let rel = r.quadratic_form / r.a_two_sq;
        let (lo, hi) = (to_f64(&w.two_norm_lower), w.two_norm_upper);
        if !w.valid {
            rows.info(&ctx, "two_norm_ratio", rel, Some(format!("epsilon={} > 1", w.epsilon)), "two-norm window");
            continue;
        }
        rows.lower(&ctx, "two_norm_ratio_lower", rel, lo, rel >= lo - 1e-12, "two-norm window");
        rows.upper(&ctx, "two_norm_ratio_upper", rel, hi, rel <= hi + 1e-12, "two-norm window");
        let Some(m) = &r.measured else { continue };
        let op_rel = m.op_norm / r.a_inf;
        let inf_lower = to_f64(&w.inf_norm_lower);
        rows.lower(
            &ctx,
            "op_norm_ratio_lower",
            op_rel,
            inf_lower,
            r.inf_norm_certified() == Some(true),
            "operator-norm window",
        );
        rows.info_bound(
            &ctx,
            "op_norm_ratio_sharp",
            op_rel,
            to_f64(&w.inf_norm_lower_sharp),
            "operator-norm window with the halved factor, empirical",
        );
        let dn = (d as f64).powi(n as i32);
        rows.lower(
            &ctx,
            "trace_norm_ratio_lower",
            m.trace_norm / (dn * r.a_inf),
            to_f64(&w.trace_norm_lower),
            r.trace_norm_certified(n, d) == Some(true),
            "trace-norm window",
        );
        rows.upper(
            &ctx,
            "op_norm_upper",
            m.op_norm,
            r.a_one,
            r.inf_norm_upper_holds() == Some(true),
            "triangle inequality",
        );
    }
    Ok(rows)
}

pub fn states(n: usize, d: usize, samples: usize, seed: u64) -> Result<Rows> {
    let mut rows = Rows::default();
    let blocks = random_moments::state_moment_operators(n, d)?;
    let (lo, hi) = moment_ratio_window(n, d);
    let in_regime = n * n <= d;
    let mut psi_trace = BigRational::zero();
    let mut u_trace = BigRational::zero();
    for b in &blocks {
        let ctx = Ctx::new("states").n(n).d(d).aux(format!("lambda={:?}", b.partition.parts()));
        let (v, s) = q(&b.ratio);
        let formula = moment_ratio(&b.partition, d);
        rows.exact(&ctx, "ratio_identity", v, s, b.ratio == formula, "block ratio equals the content/rising product");
        if in_regime {
            rows.lower(&ctx, "ratio_lower", v, to_f64(&lo), b.ratio >= lo, "state-moment ratio window");
            rows.upper(&ctx, "ratio_upper", v, to_f64(&hi), b.ratio <= hi, "state-moment ratio window");
        }
        let dim = from_int(b.block_dimension.clone());
        psi_trace += &b.random_state * &dim;
        u_trace += &b.max_entangled * &dim;
    }
    let ctx = Ctx::new("states").n(n).d(d);
    let (v, s) = q(&psi_trace);
    rows.exact(&ctx, "random_state_trace", v, s, psi_trace.is_one(), "moment operators have unit trace");
    let (v, s) = q(&u_trace);
    rows.exact(&ctx, "max_entangled_trace", v, s, u_trace.is_one(), "moment operators have unit trace");
    if moment_side_ok(n, d) {
        let p = random_moments::psi_pi_gram(n, d)?;
        rows.upper(
            &ctx,
            "psi_pi_gram_deviation",
            p.max_deviation,
            EIG_TOL,
            p.max_deviation <= EIG_TOL,
            "twisted-state spectrum equals gram spectrum over n!",
        );
    }
    if n == 2 && samples > 0 {
        let tc = random_moments::two_copy_block_mc(d, samples, seed)?;
        let excess = tc.estimate.worst_excess(&tc.exact, 6.0, MC_ATOL)?;
        let c = ctx.clone().aux(format!("samples={samples}"));
        rows.upper(&c, "two_copy_mc_excess", excess, 0.0, excess <= 0.0, "block coefficients, 6 stderr");
    }
    Ok(rows)
}

pub fn boson(n: usize, t: usize, m: usize, samples: usize, seed: u64, env: &Env) -> Result<Rows> {
    let mut rows = Rows::default();
    let e = moment_experiment_with(m, n, t, samples, seed, &env.limits, env.threads)?;
    let ctx = Ctx::new("boson").n(n).aux(format!("m={m};t={t};samples={samples}"));
    rows.info(&ctx, "haar_moment", e.haar.mean, None, "normalized E|Per V|^(2t)");
    rows.info(&ctx, "haar_stderr", e.haar.stderr, None, "normalized E|Per V|^(2t)");
    rows.info(&ctx, "haar_skewness", e.haar.skewness, None, "heavy-tail diagnostic");
    rows.info(&ctx, "gauss_skewness", e.gauss.skewness, None, "heavy-tail diagnostic");
    let nf = factorial(n);
    let exact = match t {
        1 => Some(from_int(nf)),
        2 => Some(from_int(num_bigint::BigInt::from(n + 1) * &nf * &nf)),
        _ => None,
    };
    match exact {
        Some(x) => {
            rows.close(&ctx, "gauss_moment", e.gauss.mean, to_f64(&x), 5.0 * e.gauss.stderr, "gaussian permanent moment, 5 stderr");
            rows.annotate(x.to_string());
        }
        None => rows.info(&ctx, "gauss_moment", e.gauss.mean, None, "normalized E|Per X|^(2t)"),
    }
    let (lo, hi) = e.window(5.0);
    rows.lower(&ctx, "ratio_lower", e.ratio, lo, e.ratio >= lo, "haar/gaussian moment window");
    rows.upper(&ctx, "ratio_upper", e.ratio, hi, e.ratio <= hi, "haar/gaussian moment window");

    let by_classes = boson::gaussian_fourth_by_classes(n, m)?;
    let direct = boson::gaussian_fourth_exact(n, m);
    let (v, s) = q(&direct);
    let c = ctx.clone().aux(format!("m={m}"));
    rows.exact(&c, "fourth_moment_classes", v, s, by_classes == direct, "class-size route to E|Per X|^4");
    if n <= 4 {
        let sizes: Vec<_> = (0..=n).map(|l| boson::w_class_size(n, l)).collect::<Result<_>>()?;
        let total: num_bigint::BigInt = sizes.iter().sum();
        let c = Ctx::new("boson").n(n);
        rows.exact(
            &c,
            "w_class_total",
            to_f64(&from_int(total.clone())),
            Some(total.to_string()),
            total == factorial(2 * n),
            "w classes partition S_2n",
        );
        let enumerated = boson::w_class_sizes_enumerated(n)?;
        let same = enumerated == sizes;
        rows.exact(&c, "w_class_enumeration", flag(same), None, same, "w classes partition S_2n");
    }
    Ok(rows)
}

pub fn pt(n: usize, d: usize, seed: u64) -> Result<Rows> {
    let mut rows = Rows::default();
    for pi in symgroup::enumerate(n)? {
        let ctx = Ctx::new("pt").n(n).d(d).aux(format!("pi={pi}"));
        let mut worst: f64 = 0.0;
        let mut trace_ok = true;
        for s in LegSubset::all(n) {
            let law = pt_singular_law(&pi, &s, d)?;
            worst = worst.max(law.max_deviation);
            let pred = law.predicted_trace_norm as f64;
            trace_ok &= (law.observed_trace_norm - pred).abs() <= EIG_TOL * pred;
        }
        rows.upper(&ctx, "singular_law_deviation", worst, EIG_TOL, worst <= EIG_TOL, "partial-transpose singular values");
        rows.exact(&ctx, "trace_norm_law", flag(trace_ok), None, trace_ok, "partial-transpose trace norm");
    }
    if n <= 3 && (d as f64).powi(n as i32) <= 64.0 {
        for k in 0..3 {
            let c = locality::random_ppt_effect(n, d, seed.wrapping_add(k))?;
            let r = locality::ppt_coeff_check(&c, n, d, OperatorKind::Effect)?;
            let ctx = Ctx::new("pt")
                .n(n)
                .d(d)
                .aux(format!("effect_seed={};hypothesis={}", seed.wrapping_add(k), r.hypothesis_holds));
            let margin = r.min_margin().unwrap_or(f64::NEG_INFINITY);
            rows.lower(&ctx, "coefficient_margin", margin, 0.0, r.ppt.is_ppt && margin >= 0.0, "ppt coefficient bound");
        }
    }
    Ok(rows)
}

fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Result<Permutation> {
    let mut images: Vec<usize> = (1..=n).collect();
    images.shuffle(rng);
    Permutation::from_one_line(&images)
}

pub fn maxcut(n: usize, instances: usize, seed: u64) -> Result<Rows> {
    let mut rows = Rows::default();
    let ctx = Ctx::new("maxcut").n(n);
    if n <= 8 {
        let mut worst = f64::INFINITY;
        let mut same_side_failures = 0usize;
        for pi in symgroup::enumerate(n)? {
            let cut = locality::deterministic_cut(&pi);
            let half = symgroup::transposition_distance(&pi) as f64 / 2.0;
            worst = worst.min(cut.achieved as f64 - half);
            if (locality::same_side_value(&pi, &cut.subset) as f64) < half {
                same_side_failures += 1;
            }
        }
        rows.lower(&ctx, "deterministic_min_margin", worst, 0.0, worst >= 0.0, "single-permutation cut bound");
        rows.info(
            &ctx,
            "same_side_variant_failures",
            same_side_failures as f64,
            None,
            "permutations where |pi(S) ∩ S| < |pi|/2 for the odd-position cut",
        );
    }
    let mut worst = f64::INFINITY;
    let mut all_met = true;
    for i in 0..instances as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let k = 1 + (i as usize % 4);
        let perms: Vec<Permutation> = (0..k).map(|_| random_permutation(n, &mut rng)).collect::<Result<_>>()?;
        let cut = locality::randomized_cut(&perms, 64, seed.wrapping_add(i))?;
        worst = worst.min(cut.achieved as f64 - to_f64(&cut.target));
        all_met &= cut.meets_target();
    }
    if instances > 0 {
        let c = ctx.clone().aux(format!("instances={instances}"));
        rows.lower(&c, "randomized_min_margin", worst, 0.0, all_met, "multi-permutation cut bound");
    }
    Ok(rows)
}

fn chain_rows(rows: &mut Rows, prefix: &str, report: &BoundReport) {
    let ctx = Ctx::new(prefix).n(report.n).d(report.d).aux(format!("hypothesis={}", report.valid));
    for term in &report.chain {
        let exact = term.exact.as_ref().map(|(lo, hi)| {
            if lo == hi {
                lo.to_string()
            } else {
                format!("[{}, {}]", to_f64(lo), to_f64(hi))
            }
        });
        rows.info(&ctx, &format!("term[{}]", term.label), term.value, exact, "bias bound chain");
    }
    let exact = report.ordered_exactly();
    let holds = exact.unwrap_or_else(|| report.ordered());
    let certified = if exact.is_some() { "certified in rationals" } else { "floating point" };
    if report.valid {
        rows.exact(&ctx, "chain_ordered", flag(holds), Some(certified.into()), holds, "bias bound chain");
    } else {
        rows.info(&ctx, "chain_ordered", flag(holds), Some(certified.into()), "bias bound chain, hypothesis fails");
    }
}

pub fn hiding_chain(n: usize, d: usize) -> Result<Rows> {
    let mut rows = Rows::default();
    chain_rows(&mut rows, "hiding", &locality::hiding_bias_bound(n, d)?);
    Ok(rows)
}

/// Chain at `(n, d)` plus the two-copy demonstration at `d` when it fits the dense cap.
pub fn hiding(n: usize, d: usize, env: &Env) -> Result<Rows> {
    let mut rows = hiding_chain(n, d)?;
    let ctx = Ctx::new("hiding").n(2).d(d);
    if d < 2 {
        return Ok(rows);
    }
    if d.saturating_mul(d) > env.limits.max_dense_side {
        rows.info(&ctx, "demo_skipped", (d * d) as f64, Some("d^2 exceeds the dense cap".into()), "two-copy demonstration");
        return Ok(rows);
    }
    let demo = locality::hiding_demo(d)?;
    let tightest = demo.bound.tightest();
    rows.info(&ctx, "global_bias", demo.global_bias, None, "trace distance of the two hidden states");
    for m in &demo.measurements {
        let c = ctx.clone().aux(format!("measurement={};kind={:?};a={};b={}", m.label, m.kind, m.a, m.b));
        if m.feasible {
            let bias = m.bias.abs();
            if demo.bound.valid {
                rows.upper(&c, "bias", bias, tightest, bias <= tightest + 1e-12, "ppt hiding bias bound");
            } else {
                rows.info_bound(&c, "bias", bias, tightest, "ppt hiding bias bound, hypothesis fails");
            }
            let margin = m.coeff_margin.unwrap_or(f64::NEG_INFINITY);
            rows.lower(&c, "coefficient_margin", margin, 0.0, margin >= 0.0, "ppt coefficient bound");
        } else {
            rows.info(&c, "bias_infeasible", m.bias, None, "excluded: fails the partial-transpose window");
        }
    }
    Ok(rows)
}

pub fn product_test(n: usize, d: usize) -> Result<Rows> {
    let mut rows = Rows::default();
    chain_rows(&mut rows, "product_test", &locality::product_test_bound(n, d)?);
    Ok(rows)
}

pub fn setpart(n: usize, d: usize, env: &Env) -> Result<Rows> {
    let mut rows = Rows::default();
    for k in 0..=n {
        let ctx = Ctx::new("setpart").n(k);
        let count = setpart::enumerate_set_partitions_with(k, &env.limits)?.len();
        let bell = setpart::bell(k);
        let holds = num_bigint::BigInt::from(count) == bell && setpart::bell_by_recurrence(k) == bell;
        rows.exact(&ctx, "bell", count as f64, Some(bell.to_string()), holds, "set partitions counted by bell numbers");
    }
    let ctx = Ctx::new("setpart").n(n).d(d);
    let g = setpart::partition_gram_with(n, d, &env.limits)?;
    if (d as f64).powi(n as i32) <= 4096.0 {
        let mut mismatches = 0usize;
        for i in 0..g.side() {
            for j in 0..g.side() {
                let count = setpart::brute_force_common_strings(&g.partitions[i], &g.partitions[j], d)?;
                if count != (d as u64).pow(g.join_block_count(i, j) as u32) {
                    mismatches += 1;
                }
            }
        }
        rows.exact(&ctx, "closed_form_mismatches", mismatches as f64, None, mismatches == 0, "string counting over the join");
    }
    for variant in [GramVariant::Linear, GramVariant::Squared] {
        let c = ctx.clone().aux(format!("variant={variant:?}").to_lowercase());
        let w = setpart::blowup_witness_with(n, d, variant, &env.limits)?;
        let (v, s) = q(&w.certified_lower);
        rows.info(&c, "witness_certified", v, s, "uniform vector on one-block and two-block partitions");
        rows.info(&c, "witness_rayleigh", w.rayleigh, None, "uniform vector on one-block and two-block partitions");
        if let Some(top) = w.lambda_max {
            rows.lower(&c, "lambda_max", top, v, top >= v - 1e-9, "witness lower bound");
        }
        if n >= 4 {
            let tops: Vec<f64> = (3..=n)
                .map(|k| setpart::blowup_witness_with(k, d, variant, &env.limits).map(|w| w.lambda_max.unwrap_or(f64::NAN)))
                .collect::<Result<_>>()?;
            let increasing = tops.windows(2).all(|p| p[1] > p[0]);
            let rendered = tops.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" < ");
            rows.exact(&c, "lambda_max_increasing", flag(increasing), Some(rendered), increasing, "no collective orthogonality");
        }
    }
    for k in 2..=n.min(5) {
        let dk = k * k;
        let c = Ctx::new("setpart_contrast").n(k).d(dk);
        let report = spectral_report_with(&build_gram_with(k, dk, &env.limits)?, &env.limits)?;
        let bound = ((k * k) as f64 / (2 * dk) as f64).exp();
        let top = report.numeric_max();
        rows.upper(&c, "permutation_lambda_max", top, bound, top <= bound, "gram eigenvalue window");
    }
    Ok(rows)
}

/// Sizes for `verify`.
struct Suite {
    spectrum: (usize, usize),
    identities: (usize, usize, usize),
    gram: Vec<(usize, usize)>,
    weingarten_max_n: usize,
    weingarten_max_d: usize,
    moments: Vec<(usize, usize)>,
    norms: Vec<(usize, usize)>,
    states: Vec<(usize, usize)>,
    states_mc: (usize, usize),
    boson: Vec<(usize, usize, usize)>,
    pt: Vec<(usize, usize)>,
    maxcut_n: usize,
    chains_max_n: usize,
    hiding_demo_d: usize,
    setpart: Vec<(usize, usize)>,
    bell_max_n: usize,
}

fn suite(quick: bool) -> Suite {
    if quick {
        Suite {
            spectrum: (3, 3),
            identities: (3, 3, 3),
            gram: vec![(2, 2), (3, 3)],
            weingarten_max_n: 3,
            weingarten_max_d: 3,
            moments: vec![(1, 2), (2, 2)],
            norms: vec![(1, 2), (2, 3)],
            states: vec![(2, 2), (2, 3), (3, 2)],
            states_mc: (2, 3),
            boson: vec![(2, 1, 64)],
            pt: vec![(2, 2), (2, 3), (3, 2), (3, 3)],
            maxcut_n: 3,
            chains_max_n: 3,
            hiding_demo_d: 3,
            setpart: vec![(3, 3)],
            bell_max_n: 3,
        }
    } else {
        Suite {
            spectrum: (5, 8),
            identities: (7, 8, 10),
            gram: vec![(3, 3), (4, 4), (5, 8)],
            weingarten_max_n: 4,
            weingarten_max_d: 8,
            moments: vec![(1, 2), (2, 2), (2, 4)],
            norms: vec![(2, 8), (2, 16)],
            states: vec![(2, 2), (2, 3), (3, 2), (2, 4), (3, 9), (4, 16), (5, 25), (5, 26)],
            states_mc: (2, 4),
            boson: vec![(2, 1, 64), (2, 2, 64), (3, 1, 128)],
            pt: vec![(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)],
            maxcut_n: 8,
            chains_max_n: 6,
            hiding_demo_d: 16,
            setpart: vec![(4, 3), (6, 4)],
            bell_max_n: 8,
        }
    }
}

pub fn verify(quick: bool, samples: usize, seed: u64, env: &Env) -> Result<Rows> {
    let s = suite(quick);
    let mut rows = Rows::default();
    rows.extend(spectrum(s.spectrum.0, s.spectrum.1, env)?);
    rows.extend(identities(s.identities.0, s.identities.1, s.identities.2, env)?);
    for &(n, d) in &s.gram {
        rows.extend(gram(n, d, env)?);
    }
    for n in 1..=s.weingarten_max_n {
        for d in n.max(2)..=s.weingarten_max_d {
            rows.extend(weingarten_exact(n, d, env)?);
        }
    }
    for n in 2..=s.weingarten_max_n {
        rows.extend(asymptotics(n)?);
    }
    for &(n, d) in &s.moments {
        rows.extend(moments(n, d, samples, seed, env)?);
    }
    for &(n, d) in &s.norms {
        rows.extend(norms(n, d, seed)?);
    }
    for &(n, d) in &s.states {
        let mc = if (n, d) == s.states_mc { samples } else { 0 };
        rows.extend(states(n, d, mc, seed)?);
    }
    for &(n, t, m) in &s.boson {
        rows.extend(boson(n, t, m, samples, seed, env)?);
    }
    for &(n, d) in &s.pt {
        rows.extend(pt(n, d, seed)?);
    }
    rows.extend(maxcut(s.maxcut_n, 100, seed)?);
    for n in 1..=s.chains_max_n {
        for k in [1, 2, 4] {
            let root = k * n * n;
            rows.extend(hiding_chain(n, root * root)?);
            rows.extend(product_test(n, root.pow(4))?);
        }
    }
    rows.extend(hiding(2, s.hiding_demo_d, env)?);
    for &(n, d) in &s.setpart {
        rows.extend(setpart(n, d, env)?);
    }
    for k in 0..=s.bell_max_n {
        let ctx = Ctx::new("bell").n(k);
        let count = setpart::enumerate_set_partitions_with(k, &env.limits)?.len();
        let bell = setpart::bell(k);
        rows.exact(
            &ctx,
            "count",
            count as f64,
            Some(bell.to_string()),
            num_bigint::BigInt::from(count) == bell,
            "set partitions counted by bell numbers",
        );
    }
    Ok(rows)
}
