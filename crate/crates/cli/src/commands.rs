use crate::{
    CircleCmd, Command, Ctx, Failure, FourierCmd, IncrementCmd, LowerboundCmd, Outcome, SetsCmd, EXIT_FAILED, EXIT_OK,
};
use clap::{Args, ValueEnum};
use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdflab::circle::{
    arcs_build, bump_decay_slope, bump_fourier, gauss_sum, major_arc_bound_check, minor_arc_sup,
    square_indicator_fourier, weyl_locate, weyl_sum, SquareWeight,
};
use sdflab::fourier::{
    fitted_gamma, hypercontractivity_verify, level_d_dichotomy, level_d_energy, level_d_energy_operator, lift,
    recommended_hyper_params, DichotomyOptions, DichotomyVerdict, Frequency, GroupFunction, Mode, ModulusSet, C0,
};
use sdflab::increment::{
    bound_curve, frequency_profile, increment_driver, ClauseConstants, DriverConfig, DriverOutcome,
};
use sdflab::lower_bound::{
    build_lower_bound, class_mean_check, square_correlation, square_correlation_routes, verify_lb_properties,
    LowerBoundFunction, LowerBoundOptions,
};
use sdflab::sets::{
    find_square_difference, greedy_growth_exponent, greedy_sequence_from, max_sdf_exact_with_cap, GreedyStart,
    IntegerSet, Progression, DEFAULT_EXACT_CAP,
};
use sdflab::Error;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::PathBuf;

const GREEDY_LIMIT_CAP: u64 = 100_000_000;
const OPERATOR_DENSE_CAP: usize = 1_000_000;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Command path, argument map and input files.
pub(crate) fn describe(cmd: &Command) -> (String, Value, Vec<PathBuf>) {
    fn v<T: Serialize>(a: &T) -> Value {
        serde_json::to_value(a).expect("serializable arguments")
    }
    let none = Vec::new;
    match cmd {
        Command::Sets(c) => match c {
            SetsCmd::Greedy(a) => ("sets greedy".into(), v(a), none()),
            SetsCmd::Exact(a) => ("sets exact".into(), v(a), none()),
            SetsCmd::Check(a) => ("sets check".into(), v(a), vec![a.file.clone()]),
        },
        Command::Fourier(c) => match c {
            FourierCmd::Energy(a) => ("fourier energy".into(), v(a), a.set.iter().cloned().collect()),
            FourierCmd::Dichotomy(a) => ("fourier dichotomy".into(), v(a), a.set.iter().cloned().collect()),
            FourierCmd::Hyper(a) => ("fourier hyper".into(), v(a), none()),
        },
        Command::Circle(c) => match c {
            CircleCmd::Spectrum(a) => ("circle spectrum".into(), v(a), none()),
            CircleCmd::Weyl(a) => ("circle weyl".into(), v(a), none()),
            CircleCmd::Gauss(a) => ("circle gauss".into(), v(a), none()),
            CircleCmd::Minor(a) => ("circle minor".into(), v(a), none()),
            CircleCmd::Major(a) => ("circle major".into(), v(a), none()),
            CircleCmd::Bump(a) => ("circle bump".into(), v(a), none()),
        },
        Command::Increment(c) => match c {
            IncrementCmd::Run(a) => ("increment run".into(), v(a), vec![a.set.clone()]),
            IncrementCmd::Bound(a) => ("increment bound".into(), v(a), none()),
        },
        Command::Lowerbound(c) => match c {
            LowerboundCmd::Build(a) => ("lowerbound build".into(), v(a), none()),
            LowerboundCmd::Verify(a) => ("lowerbound verify".into(), v(a), none()),
        },
        Command::Schema(_) => ("schema".into(), Value::Null, none()),
    }
}

pub(crate) fn dispatch(cmd: &Command, ctx: &Ctx) -> Result<Outcome, Failure> {
    match cmd {
        Command::Sets(SetsCmd::Greedy(a)) => sets_greedy(a, ctx),
        Command::Sets(SetsCmd::Exact(a)) => sets_exact(a, ctx),
        Command::Sets(SetsCmd::Check(a)) => sets_check(a, ctx),
        Command::Fourier(FourierCmd::Energy(a)) => fourier_energy(a, ctx),
        Command::Fourier(FourierCmd::Dichotomy(a)) => fourier_dichotomy(a, ctx),
        Command::Fourier(FourierCmd::Hyper(a)) => fourier_hyper(a, ctx),
        Command::Circle(CircleCmd::Spectrum(a)) => circle_spectrum(a, ctx),
        Command::Circle(CircleCmd::Weyl(a)) => circle_weyl(a, ctx),
        Command::Circle(CircleCmd::Gauss(a)) => circle_gauss(a, ctx),
        Command::Circle(CircleCmd::Minor(a)) => circle_minor(a, ctx),
        Command::Circle(CircleCmd::Major(a)) => circle_major(a, ctx),
        Command::Circle(CircleCmd::Bump(a)) => circle_bump(a, ctx),
        Command::Increment(IncrementCmd::Run(a)) => increment_run(a, ctx),
        Command::Increment(IncrementCmd::Bound(a)) => increment_bound(a, ctx),
        Command::Lowerbound(LowerboundCmd::Build(a)) => lowerbound_build(a, ctx),
        Command::Lowerbound(LowerboundCmd::Verify(a)) => lowerbound_verify(a, ctx),
        Command::Schema(_) => unreachable!("handled before dispatch"),
    }
}

/// Newline-delimited decimal integers; blank lines and `#` comments are skipped.
pub(crate) fn parse_set(bytes: &[u8], universe: Option<u64>) -> Result<IntegerSet, Failure> {
    let text = std::str::from_utf8(bytes).map_err(|_| usage("set file is not UTF-8"))?;
    let mut elements = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n: u64 = line
            .parse()
            .map_err(|_| usage(format!("set file line {}: `{line}` is not a non-negative integer", i + 1)))?;
        elements.push(n);
    }
    let max = elements.iter().copied().max().unwrap_or(0);
    Ok(IntegerSet::from_unsorted(elements, universe.unwrap_or(max).max(max))?)
}

fn check_universe(set: &IntegerSet, x: u64) -> Result<(), Failure> {
    match set.elements().last() {
        Some(&m) if m > x => Err(usage(format!("element {m} exceeds X = {x}"))),
        _ => Ok(()),
    }
}

fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

// ---------------------------------------------------------------- sets

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartArg {
    Zero,
    One,
}

#[derive(Debug, Args, Serialize)]
pub struct GreedyArgs {
    /// Largest integer scanned.
    #[arg(long)]
    pub limit: u64,
    /// First integer scanned.
    #[arg(long, value_enum, default_value_t = StartArg::Zero)]
    pub start: StartArg,
    /// Also fit the growth exponent of the counting function.
    #[arg(long)]
    pub exponent: bool,
}

fn sets_greedy(a: &GreedyArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    if a.limit > GREEDY_LIMIT_CAP {
        return Err(usage(format!("limit {} exceeds {GREEDY_LIMIT_CAP}", a.limit)));
    }
    let start = match a.start {
        StartArg::Zero => GreedyStart::Zero,
        StartArg::One => GreedyStart::One,
    };
    let seq = greedy_sequence_from(start, a.limit);
    if ctx.csv(false, true)? {
        let mut s = String::from("element\n");
        for e in seq.elements() {
            writeln!(s, "{e}").unwrap();
        }
        return Ok(Outcome::csv(EXIT_OK, s));
    }
    let mut v = json!({
        "limit": a.limit,
        "start": a.start,
        "size": seq.len(),
        "elements": seq.elements(),
    });
    if a.exponent {
        if a.limit < 1000 {
            return Err(usage("--exponent needs --limit of at least 1000"));
        }
        v["growth_exponent"] = json_f64(greedy_growth_exponent(a.limit));
    }
    Ok(Outcome::json(EXIT_OK, v))
}

#[derive(Debug, Args, Serialize)]
pub struct ExactArgs {
    /// Solve on [1, X].
    #[arg(long)]
    pub x: u64,
    /// Refuse X above this.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub cap: u64,
}

fn sets_exact(a: &ExactArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    let sol = max_sdf_exact_with_cap(a.x, a.cap)?;
    if ctx.csv(false, true)? {
        let mut s = String::from("n,s_n\n");
        for (n, m) in sol.prefix_maxima.iter().enumerate() {
            writeln!(s, "{n},{m}").unwrap();
        }
        return Ok(Outcome::csv(EXIT_OK, s));
    }
    Ok(Outcome::json(
        EXIT_OK,
        json!({
            "x": a.x,
            "size": sol.size,
            "elements": sol.witness.elements(),
            "prefix_maxima": sol.prefix_maxima,
            "nodes": sol.nodes,
        }),
    ))
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    /// Set file: one non-negative integer per line.
    #[arg(long)]
    pub file: PathBuf,
}

fn sets_check(_a: &CheckArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    let set = parse_set(&ctx.inputs[0], None)?;
    let witness = find_square_difference(&set);
    let exit = if witness.is_some() { EXIT_FAILED } else { EXIT_OK };
    Ok(Outcome::json(
        exit,
        json!({
            "size": set.len(),
            "elements": set.elements(),
            "square_difference_free": witness.is_none(),
            "witness": witness,
        }),
    ))
}

// ---------------------------------------------------------------- fourier

fn parse_moduli(v: &[u64]) -> Result<ModulusSet, Failure> {
    Ok(ModulusSet::new(v.to_vec())?)
}

#[derive(Debug, Args, Serialize)]
pub struct EnergyArgs {
    /// Length of the interval [1, X].
    #[arg(long)]
    pub x: u64,
    /// Density parameter; also the Bernoulli rate when no set is given.
    #[arg(long)]
    pub alpha: f64,
    /// Frequency level.
    #[arg(long)]
    pub d: usize,
    /// Pairwise coprime moduli, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub moduli: Vec<u64>,
    /// Use the indicator of this set instead of a random Bernoulli function.
    #[arg(long)]
    pub set: Option<PathBuf>,
    /// Real frequency twist.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub xi0: f64,
    /// Include the lifted function on G_Q.
    #[arg(long)]
    pub snapshot: bool,
}

fn indicator_on_interval(set: &IntegerSet, x: u64) -> Vec<Complex64> {
    (1..=x).map(|n| Complex64::new(if set.contains(n) { 1.0 } else { 0.0 }, 0.0)).collect()
}

fn bernoulli(rng: &mut ChaCha8Rng, x: u64, p: f64) -> Vec<Complex64> {
    (0..x).map(|_| Complex64::new(if rng.gen::<f64>() < p { 1.0 } else { 0.0 }, 0.0)).collect()
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("alpha = {alpha} outside (0, 1)")))
    }
}

fn fourier_energy(a: &EnergyArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    check_alpha(a.alpha)?;
    if a.x == 0 {
        return Err(usage("X must be at least 1"));
    }
    let q = parse_moduli(&a.moduli)?;
    let (f, source) = match &a.set {
        Some(_) => {
            let set = parse_set(&ctx.inputs[0], Some(a.x))?;
            check_universe(&set, a.x)?;
            (indicator_on_interval(&set, a.x), "set")
        }
        None => (bernoulli(&mut ChaCha8Rng::seed_from_u64(ctx.seed), a.x, a.alpha), "bernoulli"),
    };
    let energy = level_d_energy(&f, &q, a.d, a.xi0)?;
    let operator = match q.dense_size() {
        Ok(n) if n <= OPERATOR_DENSE_CAP && q.product() >= a.x as u128 => {
            Some(level_d_energy_operator(&f, &q, a.d, a.xi0)?)
        }
        _ => None,
    };
    let l = (1.0 / a.alpha).ln();
    let xf = a.x as f64;
    let factor = if a.d == 0 { 1.0 } else { (C0 * l / a.d as f64).powi(a.d as i32) };
    let bound = a.alpha * a.alpha * xf * xf * factor;
    let mut v = json!({
        "x": a.x,
        "alpha": a.alpha,
        "d": a.d,
        "moduli": q.moduli(),
        "xi0": a.xi0,
        "source": source,
        "energy": energy,
        "energy_operator": operator.map(json_f64),
        "bound": bound,
        "ratio": energy / bound,
    });
    if a.snapshot {
        if q.product() < a.x as u128 {
            return Err(Error::NotInjective { product: q.product().min(u64::MAX as u128) as u64, x: a.x }.into());
        }
        let g = lift(&Progression::interval(a.x), a.x, &q, &f)?;
        v["function"] = serde_json::to_value(&g).expect("serializable");
    }
    Ok(Outcome::json(EXIT_OK, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Cycle through the other families.
    Mixed,
    /// 0/1 values with rate alpha.
    Bernoulli,
    /// Uniform in the complex unit disk.
    Disk,
    /// Sparse background with one residue class raised.
    Planted,
}

#[derive(Debug, Args, Serialize)]
pub struct DichotomyArgs {
    /// Length of the interval [1, X].
    #[arg(long, default_value_t = 2000)]
    pub x: u64,
    /// Density parameter of the random functions.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Frequency level.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Pairwise coprime moduli, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "3,5,7,11")]
    pub moduli: Vec<u64>,
    /// Number of random functions.
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Random function family.
    #[arg(long, value_enum, default_value_t = Family::Mixed)]
    pub family: Family,
    /// Report size hypotheses instead of refusing to run.
    #[arg(long)]
    pub relaxed: bool,
    /// Base of the class-density threshold.
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Test the indicator of this set instead of random functions.
    #[arg(long)]
    pub set: Option<PathBuf>,
}

fn random_bounded(rng: &mut ChaCha8Rng, family: Family, x: u64, alpha: f64, moduli: &[u64]) -> Vec<Complex64> {
    match family {
        Family::Mixed => unreachable!("resolved per trial"),
        Family::Bernoulli => bernoulli(rng, x, alpha),
        Family::Disk => (0..x)
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                Complex64::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
            })
            .collect(),
        Family::Planted => {
            let q = moduli[rng.gen_range(0..moduli.len())];
            let b = rng.gen_range(0..q);
            let lift_rate = (alpha * rng.gen_range(1.0..4.0)).min(1.0);
            (1..=x)
                .map(|n| {
                    let p = if n % q == b { lift_rate } else { alpha / 2.0 };
                    Complex64::new(if rng.gen::<f64>() < p { 1.0 } else { 0.0 }, 0.0)
                })
                .collect()
        }
    }
}

fn family_for(family: Family, trial: u64) -> Family {
    match family {
        Family::Mixed => [Family::Bernoulli, Family::Disk, Family::Planted][(trial % 3) as usize],
        f => f,
    }
}

fn fourier_dichotomy(a: &DichotomyArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    check_alpha(a.alpha)?;
    if a.x == 0 {
        return Err(usage("X must be at least 1"));
    }
    let q = parse_moduli(&a.moduli)?;
    let opts = DichotomyOptions { lambda: a.lambda, mode: if a.relaxed { Mode::Relaxed } else { Mode::Strict } };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let trials = if a.set.is_some() { 1 } else { a.trials };
    let fixed = match &a.set {
        Some(_) => {
            let set = parse_set(&ctx.inputs[0], Some(a.x))?;
            check_universe(&set, a.x)?;
            Some(indicator_on_interval(&set, a.x))
        }
        None => None,
    };
    let (mut c1, mut c2, mut both) = (0u64, 0u64, 0u64);
    let mut outcomes = Vec::with_capacity(trials as usize);
    let mut regime = None;
    for t in 0..trials {
        let (f, fam) = match &fixed {
            Some(f) => (f.clone(), "set".to_string()),
            None => {
                let fam = family_for(a.family, t);
                (
                    random_bounded(&mut rng, fam, a.x, a.alpha, q.moduli()),
                    serde_json::to_value(fam).unwrap().as_str().unwrap().to_string(),
                )
            }
        };
        let rep = level_d_dichotomy(&f, &q, a.alpha, a.d, opts)?;
        match rep.verdict {
            DichotomyVerdict::Clause1 => c1 += 1,
            DichotomyVerdict::Clause2 => c2 += 1,
            DichotomyVerdict::BothFailed => both += 1,
        }
        if regime.is_none() {
            regime = Some((rep.in_theorem_regime, rep.violations.clone()));
        }
        outcomes.push(json!({
            "trial": t,
            "family": fam,
            "verdict": rep.verdict,
            "energy": rep.clause1.energy,
            "bound": rep.clause1.bound,
            "witness": rep.clause2,
        }));
    }
    let (in_regime, violations) = regime.unwrap_or((true, Vec::new()));
    Ok(Outcome::json(
        if both > 0 { EXIT_FAILED } else { EXIT_OK },
        json!({
            "x": a.x,
            "alpha": a.alpha,
            "d": a.d,
            "moduli": q.moduli(),
            "mode": opts.mode,
            "seed": ctx.seed,
            "trials": trials,
            "counts": { "clause1": c1, "clause2": c2, "both_failed": both },
            "in_theorem_regime": in_regime,
            "violations": violations,
            "outcomes": outcomes,
        }),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperFamily {
    /// Cycle through the other families.
    Mixed,
    /// Uniform in the complex unit disk.
    Disk,
    /// A few point masses.
    Sparse,
    /// Random combination of constant and level-one characters.
    Smooth,
}

#[derive(Debug, Args, Serialize)]
pub struct HyperArgs {
    /// Pairwise coprime moduli, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
    pub moduli: Vec<u64>,
    /// Globalness radius; fixes m = ceil(r^-2), p = 2m, rho = m^-1/2 / 20.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Number of random functions.
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Random function family.
    #[arg(long, value_enum, default_value_t = HyperFamily::Mixed)]
    pub family: HyperFamily,
}

fn random_group_function(rng: &mut ChaCha8Rng, q: &ModulusSet, family: HyperFamily) -> Result<GroupFunction, Failure> {
    let n = q.dense_size()?;
    let unit =
        |rng: &mut ChaCha8Rng| Complex64::from_polar(rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>());
    let values = match family {
        HyperFamily::Mixed => unreachable!("resolved per trial"),
        HyperFamily::Disk => (0..n).map(|_| unit(rng)).collect(),
        HyperFamily::Sparse => {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for _ in 0..rng.gen_range(1..=3) {
                v[rng.gen_range(0..n)] = unit(rng);
            }
            v
        }
        HyperFamily::Smooth => {
            let mut g = GroupFunction::constant(q.clone(), unit(rng))?;
            for &m in q.moduli() {
                let xi = Frequency::from_pairs(q, &[(m, rng.gen_range(1..m))])?;
                let chi = GroupFunction::character(q.clone(), &xi)?;
                let c = unit(rng) * 0.5;
                let v: Vec<Complex64> = g.values().iter().zip(chi.values()).map(|(a, b)| a + c * b).collect();
                g = GroupFunction::new(q.clone(), v)?;
            }
            return Ok(g);
        }
    };
    Ok(GroupFunction::new(q.clone(), values)?)
}

fn fourier_hyper(a: &HyperArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    if !(a.r > 0.0 && a.r.is_finite()) {
        return Err(usage("r must be positive"));
    }
    let q = parse_moduli(&a.moduli)?;
    let (m, p, rho) = recommended_hyper_params(a.r);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut passes = 0u64;
    let mut worst = 0.0f64;
    let mut ratios = Vec::with_capacity(a.trials as usize);
    let mut rho_bound = 0.0;
    for t in 0..a.trials {
        let fam = match a.family {
            HyperFamily::Mixed => [HyperFamily::Disk, HyperFamily::Sparse, HyperFamily::Smooth][(t % 3) as usize],
            f => f,
        };
        let f = random_group_function(&mut rng, &q, fam)?;
        let gamma = fitted_gamma(&f, a.r)?;
        let rep = hypercontractivity_verify(&f, a.r, gamma, p, rho)?;
        rho_bound = rep.rho_bound;
        let ratio = if rep.rhs > 0.0 { rep.lhs / rep.rhs } else { 0.0 };
        worst = worst.max(ratio);
        passes += rep.pass as u64;
        ratios.push(ratio);
    }
    let failures = a.trials - passes;
    Ok(Outcome::json(
        if failures > 0 { EXIT_FAILED } else { EXIT_OK },
        json!({
            "moduli": q.moduli(),
            "r": a.r,
            "m": m,
            "p": p,
            "rho": rho,
            "rho_bound": rho_bound,
            "seed": ctx.seed,
            "trials": a.trials,
            "passes": passes,
            "failures": failures,
            "worst_ratio": worst,
            "ratios": ratios,
        }),
    ))
}

// ---------------------------------------------------------------- circle

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// Length scale X of the weight.
    #[arg(long)]
    pub x: u64,
    /// Number of grid steps over [0, span].
    #[arg(long)]
    pub theta_grid: u64,
    /// Right end of the frequency range.
    #[arg(long, default_value_t = 0.5)]
    pub span: f64,
    /// Label each frequency with its major arc, given `alpha,C1`.
    #[arg(long)]
    pub arcs: Option<String>,
}

fn circle_spectrum(a: &SpectrumArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    if a.theta_grid == 0 {
        return Err(usage("--theta-grid must be at least 1"));
    }
    let arcs = match &a.arcs {
        None => None,
        Some(s) => {
            let parts: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| usage("--arcs takes `alpha,C1`"))?;
            let [alpha, c1] = parts[..] else {
                return Err(usage("--arcs takes `alpha,C1`"));
            };
            Some(arcs_build(alpha, a.x, c1)?)
        }
    };
    let g = SquareWeight::new(a.x)?;
    let rows: Vec<(f64, f64, Option<String>)> = (0..=a.theta_grid)
        .map(|k| {
            let theta = a.span * k as f64 / a.theta_grid as f64;
            let label = arcs.as_ref().map(|d| match d.containing(theta) {
                Some((p, q)) => format!("{p}/{q}"),
                None => "minor".to_string(),
            });
            (theta, g.spectrum(theta), label)
        })
        .collect();
    if ctx.csv(true, true)? {
        let mut s = String::from(if arcs.is_some() { "theta,re,im,arc\n" } else { "theta,re,im\n" });
        for (t, v, l) in &rows {
            match l {
                Some(l) => writeln!(s, "{t},{v},0,{l}").unwrap(),
                None => writeln!(s, "{t},{v},0").unwrap(),
            }
        }
        return Ok(Outcome::csv(EXIT_OK, s));
    }
    let points: Vec<Value> = rows.iter().map(|(t, v, l)| json!({ "theta": t, "re": v, "im": 0.0, "arc": l })).collect();
    Ok(Outcome::json(
        EXIT_OK,
        json!({
            "x": a.x,
            "theta_grid": a.theta_grid,
            "span": a.span,
            "q_max": arcs.as_ref().map(|d| d.q_max),
            "tau": arcs.as_ref().map(|d| d.tau),
            "points": points,
        }),
    ))
}

#[derive(Debug, Args, Serialize)]
pub struct WeylArgs {
    /// Frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Number of terms.
    #[arg(long)]
    pub x: u64,
    /// Locate a nearby rational when the normalized sum is at least delta.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Constant in the denominator cap c (delta / log X)^2 X^2.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
}

fn circle_weyl(a: &WeylArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    if a.x == 0 {
        return Err(usage("X must be at least 1"));
    }
    let s = weyl_sum(a.theta, a.x);
    let location = match a.delta {
        Some(delta) => Some(weyl_locate(a.theta, delta, a.x, a.c)?),
        None => None,
    };
    Ok(Outcome::json(
        EXIT_OK,
        json!({
            "theta": a.theta,
            "x": a.x,
            "re": s.re,
            "im": s.im,
            "abs": s.norm(),
            "location": location,
        }),
    ))
}

#[derive(Debug, Args, Serialize)]
pub struct GaussArgs {
    /// Numerator.
    #[arg(long, allow_negative_numbers = true)]
    pub a: i64,
    /// Modulus.
    #[arg(long)]
    pub q: u64,
}

fn circle_gauss(a: &GaussArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    let g = gauss_sum(a.a, a.q)?;
    let indicator = match square_indicator_fourier(a.a, a.q) {
        Ok((d, v)) => json!({ "direct": [d.re, d.im], "via_gauss": [v.re, v.im], "diff": (d - v).norm() }),
        Err(Error::NotPrime(_)) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome::json(
        EXIT_OK,
        json!({
            "a": a.a,
            "q": a.q,
            "re": g.re,
            "im": g.im,
            "abs": g.norm(),
            "sqrt_q": (a.q as f64).sqrt(),
            "indicator": indicator,
        }),
    ))
}

#[derive(Debug, Args, Serialize)]
pub struct MinorArgs {
    /// Density parameter fixing the arcs.
    #[arg(long)]
    pub alpha: f64,
    /// Length scale X of the weight.
    #[arg(long)]
    pub x: u64,
    /// Arc constant: denominators up to C1 alpha^-2.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Grid points per major-arc radius.
    #[arg(long, default_value_t = 8.0)]
    pub grid_density: f64,
}

fn circle_minor(a: &MinorArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    let arcs = arcs_build(a.alpha, a.x, a.c1)?;
    let rep = minor_arc_sup(a.alpha, a.x, a.c1, a.grid_density)?;
    let mut v = serde_json::to_value(&rep).expect("serializable");
    v["alpha"] = json!(a.alpha);
    v["x"] = json!(a.x);
    v["c1"] = json!(a.c1);
    v["q_max"] = json!(arcs.q_max);
    v["tau"] = json!(arcs.tau);
    v["overlap"] = serde_json::to_value(&arcs.overlap).expect("serializable");
    Ok(Outcome::json(if rep.pass { EXIT_OK } else { EXIT_FAILED }, v))
}

#[derive(Debug, Args, Serialize)]
pub struct MajorArgs {
    /// Numerator of the rational center.
    #[arg(long)]
    pub a: u64,
    /// Denominator of the rational center.
    #[arg(long)]
    pub q: u64,
    /// Offset from a/q.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Length scale X of the weight.
    #[arg(long)]
    pub x: u64,
    /// Report size hypotheses instead of refusing to run.
    #[arg(long)]
    pub relaxed: bool,
}

fn circle_major(a: &MajorArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    let mode = if a.relaxed { Mode::Relaxed } else { Mode::Strict };
    let rep = major_arc_bound_check(a.a, a.q, a.theta, a.x, mode)?;
    let mut v = serde_json::to_value(&rep).expect("serializable");
    v["a"] = json!(a.a);
    v["q"] = json!(a.q);
    v["theta"] = json!(a.theta);
    v["x"] = json!(a.x);
    Ok(Outcome::json(EXIT_OK, v))
}

#[derive(Debug, Args, Serialize)]
pub struct BumpArgs {
    /// Smallest t.
    #[arg(long, default_value_t = 1.0)]
    pub t_lo: f64,
    /// Largest t.
    #[arg(long, default_value_t = 10_000.0)]
    pub t_hi: f64,
    /// Points, evenly spaced in sqrt(t).
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

fn circle_bump(a: &BumpArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    if !(a.t_lo > 0.0 && a.t_hi > a.t_lo) || a.samples < 2 {
        return Err(usage("need 0 < t-lo < t-hi and at least 2 samples"));
    }
    let (s0, s1) = (a.t_lo.sqrt(), a.t_hi.sqrt());
    let points: Vec<(f64, f64)> = (0..a.samples)
        .map(|i| {
            let s = s0 + (s1 - s0) * i as f64 / (a.samples - 1) as f64;
            (s * s, bump_fourier(s * s))
        })
        .collect();
    if ctx.csv(false, true)? {
        let mut s = String::from("t,w_hat\n");
        for (t, v) in &points {
            writeln!(s, "{t},{v:e}").unwrap();
        }
        return Ok(Outcome::csv(EXIT_OK, s));
    }
    let slope = bump_decay_slope(a.t_lo, a.t_hi, a.samples);
    Ok(Outcome::json(
        EXIT_OK,
        json!({
            "t_lo": a.t_lo,
            "t_hi": a.t_hi,
            "samples": a.samples,
            "slope": slope,
            "points": points.iter().map(|(t, v)| json!({ "t": t, "value": v })).collect::<Vec<_>>(),
        }),
    ))
}

// ---------------------------------------------------------------- increment

#[derive(Debug, Args, Serialize)]
pub struct IncrementRunArgs {
    /// Set file: one integer in [1, X] per line.
    #[arg(long)]
    pub set: PathBuf,
    /// Length of the interval [1, X].
    #[arg(long)]
    pub x: u64,
    /// The constant c of the small-density certificate and the increment alternatives.
    #[arg(long, default_value_t = ClauseConstants::default().c)]
    pub c0: f64,
    /// The exponent constant C of the increment alternatives.
    #[arg(long, default_value_t = ClauseConstants::default().big_c)]
    pub big_c: f64,
    /// Largest denominator scanned.
    #[arg(long, default_value_t = DriverConfig::default().q_cap)]
    pub q_cap: u64,
}

fn increment_run(a: &IncrementRunArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    let set = parse_set(&ctx.inputs[0], Some(a.x))?;
    let cfg = DriverConfig {
        constants: ClauseConstants { c: a.c0, big_c: a.big_c },
        q_cap: a.q_cap,
        ..DriverConfig::default()
    };
    match increment_driver(&set, a.x, &cfg) {
        Ok(DriverOutcome::Witness(w)) => Ok(Outcome::json(
            EXIT_OK,
            json!({
                "clause": w.clauses.first().map_or("none".to_string(), |t| format!("{t:?}")),
                "clauses": w.clauses,
                "route": w.route,
                "progression": w.progression,
                "density_num": w.density_num,
                "density_den": w.density_den,
                "claimed": w.claimed,
                "alpha": w.alpha,
            }),
        )),
        Ok(DriverOutcome::SmallDensity(c)) => Ok(Outcome::json(
            EXIT_OK,
            json!({
                "clause": "small_density",
                "progression": null,
                "density_num": set.len(),
                "density_den": a.x,
                "alpha": c.alpha,
                "threshold": c.threshold,
            }),
        )),
        Err(e @ Error::NoWitnessFound { .. }) => {
            let profile = frequency_profile(&set, a.x, &cfg)?;
            Err(Failure::CoreWith(e, json!({ "profile": profile })))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    /// Top of the range [10, X].
    #[arg(long)]
    pub x: f64,
    /// The constant c0 in X exp(-c0 F(X)).
    #[arg(long)]
    pub c0: f64,
    /// Geometrically spaced points.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
}

fn increment_bound(a: &BoundArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    if a.x.is_nan() || a.x <= 10.0 || a.points < 2 {
        return Err(usage("need X > 10 and at least 2 points"));
    }
    let mut rows = Vec::with_capacity(a.points);
    for i in 0..a.points {
        let x = 10f64 * (a.x / 10.0).powf(i as f64 / (a.points - 1) as f64);
        let (f, b) = bound_curve(x, a.c0)?;
        rows.push((x, f, b));
    }
    if ctx.csv(true, true)? {
        let mut s = String::from("x,f,bound\n");
        for (x, f, b) in &rows {
            writeln!(s, "{x},{f},{b}").unwrap();
        }
        return Ok(Outcome::csv(EXIT_OK, s));
    }
    Ok(Outcome::json(
        EXIT_OK,
        json!({
            "c0": a.c0,
            "points": rows.iter().map(|(x, f, b)| json!({ "x": x, "f": f, "bound": b })).collect::<Vec<_>>(),
        }),
    ))
}

// ---------------------------------------------------------------- lower bound

#[derive(Debug, Args, Serialize)]
pub struct LbArgs {
    /// Length of the interval [1, X].
    #[arg(long)]
    pub x: u64,
    /// Target mean of f.
    #[arg(long)]
    pub alpha: f64,
    /// Primes are taken from [T, 2T]; chosen from alpha when absent.
    #[arg(long = "T")]
    pub t: Option<u64>,
    /// The constant in eps = C (log T)^1/2 T^-1/4.
    #[arg(long = "C", default_value_t = 1.5)]
    pub c: f64,
    /// Use only this many primes.
    #[arg(long)]
    pub primes: Option<usize>,
    /// Refuse parameters outside the asymptotic regime.
    #[arg(long)]
    pub strict: bool,
}

impl LbArgs {
    fn build(&self) -> Result<LowerBoundFunction, Failure> {
        check_alpha(self.alpha)?;
        let opts = LowerBoundOptions { t: self.t, c_big: self.c, prime_count: self.primes, strict: self.strict };
        Ok(build_lower_bound(self.x, self.alpha, &opts)?)
    }
}

fn summary(f: &LowerBoundFunction) -> Value {
    json!({
        "x": f.x,
        "alpha": f.alpha,
        "t": f.t,
        "c_big": f.c_big,
        "n": f.n,
        "c": f.c,
        "c_num": f.c_num,
        "c_den": f.c_den,
        "primes": f.primes,
        "m": f.m,
        "m_full": f.m_full,
        "epsilon": f.epsilon,
        "epsilon_raw": f.epsilon_raw,
        "cutoff": f.cutoff,
        "flags": f.flags,
    })
}

fn lowerbound_build(a: &LbArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    let f = a.build()?;
    let rle = f.values_rle();
    if ctx.csv(false, true)? {
        let mut s = String::from("value,run\n");
        for (v, k) in &rle {
            writeln!(s, "{v},{k}").unwrap();
        }
        return Ok(Outcome::csv(EXIT_OK, s));
    }
    let mut v = summary(&f);
    v["values_rle"] = json!(rle);
    Ok(Outcome::json(EXIT_OK, v))
}

#[derive(Debug, Args, Serialize)]
pub struct LbVerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub build: LbArgs,
    /// Also check class means exhaustively (needs N at most X).
    #[arg(long)]
    pub class_means: bool,
}

fn lowerbound_verify(a: &LbVerifyArgs, ctx: &Ctx) -> Result<Outcome, Failure> {
    ctx.csv(false, false)?;
    let f = a.build.build()?;
    let rep = verify_lb_properties(&f)?;
    let class_means = if a.class_means { Some(class_mean_check(&f)?) } else { None };
    let correlations: Vec<Value> = f
        .primes
        .iter()
        .map(|&p| -> Result<Value, Failure> {
            let (direct, fourier) = square_correlation_routes(p, f.epsilon)?;
            let mut v = json!({ "p": p, "direct": direct, "fourier": fourier });
            match square_correlation(p, f.epsilon) {
                Ok(c) => {
                    v["bound"] = json!(c.bound);
                    v["pass"] = json!(c.pass);
                }
                Err(e @ Error::EpsilonTooSmall { .. }) => v["skipped"] = json!(e.to_string()),
                Err(e) => return Err(e.into()),
            }
            Ok(v)
        })
        .collect::<Result<_, _>>()?;
    let pass = rep.prop1.pass && rep.prop2.pass && rep.prop3.pass && class_means.as_ref().is_none_or(|c| c.pass);
    let mut v = summary(&f);
    v["prop1"] = serde_json::to_value(&rep.prop1).expect("serializable");
    v["prop2"] = serde_json::to_value(&rep.prop2).expect("serializable");
    v["prop3"] = serde_json::to_value(&rep.prop3).expect("serializable");
    v["class_means"] = serde_json::to_value(&class_means).expect("serializable");
    v["correlations"] = json!(correlations);
    v["pass"] = json!(pass);
    Ok(Outcome::json(if pass { EXIT_OK } else { EXIT_FAILED }, v))
}
