//! Oracle suites behind `mwaring selftest` and the acceptance test.
//!
//! Every suite compares the engine with code paths that share nothing with it
//! beyond field arithmetic: cofactor characteristic polynomials, rank
//! sequences, dense powering and brute-force tables.

use std::path::Path;
use std::process::Command;
use std::sync::Mutex;

use mwaring_core::diageq::{census, find_two_var_pair, DEFAULT_CENSUS_BUDGET};
use mwaring_core::gf::prime_power;
use mwaring_core::matrix::{build_bn, charpoly_bn_formula};
use mwaring_core::oracle::{
    charpoly_cofactor, coverage_report, independent_verify, jordan_type_ranks, CoverageOptions, Sampling,
};
use mwaring_core::waring::{
    decompose_nilpotent_nilpotent, decompose_nilpotent_semisimple, decompose_primitive_jordan, Engine, Options,
};
use mwaring_core::{Elem, Error, FieldCtx, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Result of one suite. `details` holds per-case notes such as coverage
/// lines and known gaps; `summary` is a single line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub details: Vec<String>,
}

impl Outcome {
    fn new(id: u8, name: &'static str, failures: Vec<String>, checked: u64, details: Vec<String>) -> Self {
        let passed = failures.is_empty();
        let summary = if passed {
            format!("{checked} cases")
        } else {
            format!("{} of {checked} cases failed; first: {}", failures.len(), failures[0])
        };
        let mut details = details;
        details.extend(failures.into_iter().map(|f| format!("failure: {f}")));
        Outcome { id, name, passed, summary, details }
    }

    pub fn line(&self) -> String {
        format!("{} criterion {} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.name, self.summary)
    }
}

fn field(q: u64) -> FieldCtx {
    let (p, m) = prime_power(q).expect("prime power");
    FieldCtx::new(p, m).expect("field")
}

fn prime_powers_up_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&q| prime_power(q).is_some()).collect()
}

fn random_elem(ctx: &FieldCtx, rng: &mut ChaCha8Rng) -> Elem {
    ctx.elem(rng.random_range(0..ctx.q()))
}

fn random_matrix(ctx: &FieldCtx, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let rows = (0..n).map(|_| (0..n).map(|_| random_elem(ctx, rng)).collect()).collect();
    Matrix::from_rows(ctx, rows).expect("square")
}

/// Nilpotent split of `J_{0,n}` for `n` in `[2k, 2k+5]`.
pub fn nilpotent_split(fields: &[u64], ks: &[u64]) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for &q in fields {
        let ctx = field(q);
        for &k in ks {
            for n in 2 * k as usize..=2 * k as usize + 5 {
                checked += 1;
                let case = format!("q={q} k={k} n={n}");
                match decompose_nilpotent_nilpotent(&ctx, n, k) {
                    Ok(cert) => {
                        let j = Matrix::jordan(&ctx, Elem::ZERO, n);
                        let nilpotent = |m: &Matrix| jordan_type_ranks(m).is_ok();
                        if !independent_verify(&j, &cert.root_a, &cert.root_junction, k) {
                            failures.push(format!("{case}: roots do not reproduce J_0,n"));
                        } else if !nilpotent(&cert.root_a) || !nilpotent(&cert.root_junction) {
                            failures.push(format!("{case}: a root is not nilpotent"));
                        }
                    }
                    Err(e) => failures.push(format!("{case}: {e}")),
                }
            }
        }
    }
    Outcome::new(1, "nilpotent split of J_0,n", failures, checked, Vec::new())
}

/// Jordan type of `J_{0,n}^k` by rank sequences against the closed form.
pub fn power_jordan_type(max_n: usize) -> Outcome {
    let ctx = field(2);
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 3..=max_n {
        let j = Matrix::jordan(&ctx, Elem::ZERO, n);
        let mut power = j.clone();
        for k in 2..n {
            power = &power * &j;
            checked += 1;
            let m = n % k;
            let mut expected = vec![n / k; k - m];
            expected.extend(vec![n.div_ceil(k); m]);
            match jordan_type_ranks(&power) {
                Ok(found) if found == expected => {}
                Ok(found) => failures.push(format!("n={n} k={k}: got {found:?}, expected {expected:?}")),
                Err(e) => failures.push(format!("n={n} k={k}: {e}")),
            }
        }
    }
    Outcome::new(2, "Jordan type of J_0,n^k", failures, checked, Vec::new())
}

/// Number of solutions of `x_1^k + ... + x_n^k = lambda` by plain enumeration.
fn count_solutions(ctx: &FieldCtx, k: u64, n: usize, lambda: Elem) -> u128 {
    let q = ctx.q() as usize;
    let powers: Vec<Elem> = ctx.elements().map(|x| ctx.pow(x, k)).collect();
    let mut total = 0;
    let mut idx = vec![0usize; n];
    loop {
        let sum = idx.iter().fold(Elem::ZERO, |acc, &i| ctx.add(acc, powers[i]));
        total += u128::from(sum == lambda);
        let mut pos = 0;
        while pos < n {
            idx[pos] += 1;
            if idx[pos] < q {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == n {
            return total;
        }
    }
}

/// Census counts against enumeration and the squared bound
/// `|N - q^(n-1)|^2 <= k^(4n) q^(n-1)`.
pub fn census_bound(max_q: u64) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for q in prime_powers_up_to(max_q) {
        let ctx = field(q);
        for k in [2u64, 3] {
            for n in [2usize, 3] {
                for lambda in [Elem::ONE, ctx.generator()] {
                    checked += 1;
                    let case = format!("q={q} k={k} n={n} lambda={}", ctx.format_elem(lambda));
                    let report = match census(&ctx, k, n, lambda, DEFAULT_CENSUS_BUDGET) {
                        Ok(r) => r,
                        Err(e) => {
                            failures.push(format!("{case}: {e}"));
                            continue;
                        }
                    };
                    let direct = count_solutions(&ctx, k, n, lambda);
                    let main = u128::from(q).pow(n as u32 - 1);
                    let gap = report.solutions.abs_diff(main);
                    let holds = gap * gap <= u128::from(k).pow(4 * n as u32) * main;
                    if report.solutions != direct {
                        failures.push(format!("{case}: census N={} but enumeration gives {direct}", report.solutions));
                    } else if !holds || !report.weil_holds {
                        failures.push(format!("{case}: bound fails (N={direct})"));
                    }
                }
            }
        }
    }
    Outcome::new(3, "diagonal equation census bound", failures, checked, Vec::new())
}

/// Closed-form characteristic polynomial of `B_n` against cofactor expansion.
pub fn bn_charpoly(samples: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut checked = 0;
    for q in [101u64, 8, 9] {
        let ctx = field(q);
        for n in 3..=8 {
            for _ in 0..samples {
                checked += 1;
                let y: Vec<Elem> = (0..n - 1).map(|_| random_elem(&ctx, &mut rng)).collect();
                let z: Vec<Elem> = (0..n - 2).map(|_| random_elem(&ctx, &mut rng)).collect();
                let formula = charpoly_bn_formula(&ctx, &y, &z, n);
                let direct = build_bn(&ctx, &y, &z, n).and_then(|b| charpoly_cofactor(&b));
                match (formula, direct) {
                    (Ok(f), Ok(d)) if f == d => {}
                    (f, d) => failures.push(format!("q={q} n={n} y={y:?} z={z:?}: {f:?} vs {d:?}")),
                }
            }
        }
    }
    Outcome::new(4, "closed-form charpoly of B_n", failures, checked, Vec::new())
}

/// Whether `x^k + y^k = lambda` has two solutions with different `x^k`.
fn pair_exists(ctx: &FieldCtx, k: u64, lambda: Elem) -> bool {
    let mut values: Vec<Elem> = ctx.elements().map(|x| ctx.pow(x, k)).collect();
    values.sort();
    values.dedup();
    values.iter().filter(|&&s| values.contains(&ctx.sub(lambda, s))).count() >= 2
}

/// Bidiagonal split of `J_{lambda,n}` for every nonzero `lambda`.
pub fn bidiagonal_split(fields: &[u64], ks: &[u64], max_n: usize) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut skipped = 0;
    for &q in fields {
        let ctx = field(q);
        for &k in ks {
            for lambda in ctx.elements().filter(|x| !x.is_zero()) {
                let exists = pair_exists(&ctx, k, lambda);
                let found = find_two_var_pair(&ctx, k, lambda).is_ok();
                let tag = format!("q={q} k={k} lambda={}", ctx.format_elem(lambda));
                if exists != found {
                    failures.push(format!("{tag}: pair search says {found}, enumeration says {exists}"));
                    continue;
                }
                if !found {
                    skipped += 1;
                    continue;
                }
                for n in 2..=max_n {
                    checked += 1;
                    let j = Matrix::jordan(&ctx, lambda, n);
                    match decompose_primitive_jordan(&ctx, lambda, n, k) {
                        Ok(cert) if &cert.g + &cert.h != j => failures.push(format!("{tag} n={n}: G + H != J")),
                        Ok(cert) if !independent_verify(&j, &cert.root_g, &cert.root_h, k) => {
                            failures.push(format!("{tag} n={n}: roots do not reproduce J"))
                        }
                        Ok(_) => {}
                        Err(e) => failures.push(format!("{tag} n={n}: {e}")),
                    }
                }
            }
        }
    }
    let details = vec![format!("{skipped} (q, k, lambda) without a solution pair")];
    Outcome::new(5, "bidiagonal split of J_lambda,n", failures, checked, details)
}

/// Whether `count` distinct nonzero `k`-th power values sum to `lambda`.
fn special_exists(ctx: &FieldCtx, k: u64, count: usize, lambda: Elem) -> bool {
    let mut values: Vec<Elem> = ctx.elements().filter(|x| !x.is_zero()).map(|x| ctx.pow(x, k)).collect();
    values.sort();
    values.dedup();
    fn go(ctx: &FieldCtx, values: &[Elem], count: usize, target: Elem) -> bool {
        if count == 0 {
            return target.is_zero();
        }
        (0..values.len()).any(|i| go(ctx, &values[i + 1..], count - 1, ctx.sub(target, values[i])))
    }
    go(ctx, &values, count, lambda)
}

fn distinct_roots_in_field(m: &Matrix) -> Option<usize> {
    let chi = charpoly_cofactor(m).ok()?;
    Some(m.ctx().elements().filter(|&x| chi.eval(x).is_zero()).count())
}

/// Semisimple split of `J_{0,n}`, odd characteristic, `k = 2`.
pub fn semisimple_split(fields: &[u64], ns: &[usize], seed: u64) -> Outcome {
    let k = 2;
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut details = Vec::new();
    for &q in fields {
        let ctx = field(q);
        for &n in ns {
            checked += 1;
            let tag = format!("q={q} k={k} n={n}");
            let exists =
                special_exists(&ctx, k, n, Elem::ONE) && special_exists(&ctx, k, n - 1, ctx.neg(Elem::ONE));
            match decompose_nilpotent_semisimple(&ctx, n, k, seed) {
                Ok(cert) => {
                    let j = Matrix::jordan(&ctx, Elem::ZERO, n);
                    if !independent_verify(&j, &cert.root_a, &cert.root_b, k) {
                        failures.push(format!("{tag}: roots do not reproduce J_0,n"));
                    } else if distinct_roots_in_field(&cert.root_a.pow(k)) != Some(n) {
                        failures.push(format!("{tag}: A^k lacks {n} distinct eigenvalues"));
                    } else if !exists {
                        failures.push(format!("{tag}: construction succeeded where no special solutions exist"));
                    }
                }
                Err(Error::SpecialSolutionNotFound { exhaustive: true, .. }) if !exists => {
                    details.push(format!("{tag}: no special solutions, construction not applicable"));
                }
                Err(e) => failures.push(format!("{tag}: {e}")),
            }
        }
    }
    Outcome::new(6, "semisimple split of J_0,n", failures, checked, details)
}

/// Parameters of one coverage run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoveragePlan {
    pub q: u64,
    pub k: u64,
    pub n: usize,
    pub sampling: Sampling,
}

pub fn coverage_plans(fields: &[u64], ks: &[u64], random_pairs: usize, random_large: usize) -> Vec<CoveragePlan> {
    let mut plans = Vec::new();
    for &q in fields {
        for &k in ks {
            let seed = q * 100 + k;
            plans.push(CoveragePlan { q, k, n: 1, sampling: Sampling::Exhaustive });
            let pairs = if q <= 7 { Sampling::Exhaustive } else { Sampling::Random { count: random_pairs, seed } };
            plans.push(CoveragePlan { q, k, n: 2, sampling: pairs });
            for n in [3, 4] {
                plans.push(CoveragePlan { q, k, n, sampling: Sampling::Random { count: random_large, seed: seed * 10 + n as u64 } });
            }
        }
    }
    plans
}

/// End-to-end runs of the engine; soundness is required, coverage reported.
pub fn coverage(plans: &[CoveragePlan], jobs: usize) -> Outcome {
    let results = parallel_map(plans, jobs, |plan| {
        let ctx = field(plan.q);
        let mut engine = Engine::new(Options::default());
        let opts = CoverageOptions { sampling: plan.sampling, ..CoverageOptions::default() };
        (*plan, coverage_report(&mut engine, &ctx, plan.n, plan.k, opts))
    });
    let mut failures = Vec::new();
    let mut details = Vec::new();
    let (mut total, mut success, mut gaps) = (0u64, 0u64, 0usize);
    for (plan, result) in results {
        let tag = format!("q={} k={} n={}", plan.q, plan.k, plan.n);
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{tag}: {e}"));
                continue;
            }
        };
        total += report.total;
        success += report.engine_success;
        let known: Vec<_> = report.known_gaps().collect();
        gaps += known.len();
        details.push(format!(
            "{tag}: {}/{} decomposed, brute force checked {} ({} decomposable), {} known gaps, {} unclassified, {} not decomposable",
            report.engine_success,
            report.total,
            report.bruteforce_checked,
            report.decomposable_by_bruteforce,
            known.len(),
            report.unclassified().count(),
            report.failures.iter().filter(|f| f.decomposable == Some(false)).count(),
        ));
        for gap in known {
            details.push(format!("known gap {tag}: Z={:?} reason: {}", gap.z.to_rows().iter().map(|r| r.iter().map(|e| e.index()).collect::<Vec<_>>()).collect::<Vec<_>>(), gap.reason));
        }
        for z in &report.unsound {
            failures.push(format!("{tag}: unsound certificate for {:?}", z.to_rows()));
        }
    }
    let mut outcome = Outcome::new(7, "end-to-end coverage", failures, plans.len() as u64, details);
    if outcome.passed {
        outcome.summary = format!("{} runs, {success}/{total} decomposed, all certificates verified, {gaps} known gaps", plans.len());
    }
    outcome
}

/// Hessenberg characteristic polynomial against cofactor expansion.
pub fn charpoly_agreement(samples: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut checked = 0;
    for q in [2u64, 3, 4, 9, 101] {
        let ctx = field(q);
        for _ in 0..samples {
            checked += 1;
            let n = rng.random_range(1..=6);
            let m = random_matrix(&ctx, n, &mut rng);
            match charpoly_cofactor(&m) {
                Ok(c) if c == m.charpoly() => {}
                other => failures.push(format!("q={q} M={:?}: {other:?}", m.to_rows())),
            }
        }
    }
    Outcome::new(8, "charpoly oracle agreement", failures, checked, Vec::new())
}

/// Inline matrix documents used by the determinism suite.
const DETERMINISM_MATRICES: &[(&str, &str)] = &[
    (r#"{"field":"5","rows":[[0,1,0,0],[0,0,1,0],[0,0,0,1],[0,0,0,0]]}"#, "2"),
    (r#"{"field":"2","rows":[[0,1,0,0],[0,0,1,0],[0,0,0,1],[0,0,0,0]]}"#, "2"),
    (r#"{"field":"13","rows":[[0,1,0],[0,0,1],[0,0,0]]}"#, "2"),
    (r#"{"field":"3^2","rows":[[[1,1],[0,0],[2,0]],[[0,1],[1,0],[0,0]],[[2,2],[1,1],[0,1]]]}"#, "3"),
    (r#"{"field":"7","rows":[[3,1,4],[1,5,2],[6,5,3]]}"#, "3"),
    (r#"{"field":"2","rows":[[0,1],[0,0]]}"#, "2"),
    (r#"{"field":"7","rows":[[0,0,0],[0,0,0],[0,0,0]]}"#, "5"),
];

fn run_cli(binary: &Path, args: &[&str]) -> Result<(Option<i32>, Vec<u8>), String> {
    let out = Command::new(binary).args(args).output().map_err(|e| format!("{}: {e}", binary.display()))?;
    Ok((out.status.code(), out.stdout))
}

/// Every subcommand twice with the same seed; outputs must match byte for byte.
pub fn determinism(binary: &Path, seeds: &[u64]) -> Outcome {
    let mut invocations: Vec<Vec<String>> = Vec::new();
    for &seed in seeds {
        let seed = seed.to_string();
        let owned = |args: &[&str]| -> Vec<String> {
            let mut v: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            v.extend(["--seed".to_string(), seed.clone()]);
            v
        };
        for (matrix, k) in DETERMINISM_MATRICES {
            invocations.push(owned(&["decompose", matrix, "--k", k]));
            invocations.push(owned(&["decompose", matrix, "--k", k, "--json-indent", "0"]));
        }
        invocations.push(owned(&["census", "--field", "7", "--k", "2", "--n", "2", "--lambda", "1"]));
        invocations.push(owned(&["census", "--field", "5", "--k", "4", "--n", "2", "--lambda", "2", "--jobs", "2"]));
        invocations.push(owned(&["census", "--field", "2^3", "--k", "3", "--n", "3", "--lambda", "g"]));
        invocations.push(owned(&["constants", "--k", "2", "--n", "1"]));
        invocations.push(owned(&["constants", "--k", "5", "--n", "12"]));
        invocations.push(owned(&["selftest", "--level", "quick", "--jobs", "2"]));
    }
    let mut failures = Vec::new();
    let mut checked = 0;
    for args in &invocations {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run_cli(binary, &refs);
        let second = run_cli(binary, &refs);
        checked += 1;
        match (first, second) {
            (Ok(a), Ok(b)) if a == b => {
                if refs[0] == "decompose" && a.0 == Some(0) {
                    // the certificate must also pass `verify`
                    checked += 1;
                    let cert = String::from_utf8_lossy(&a.1).into_owned();
                    match run_cli(binary, &["verify", refs[1], &cert]) {
                        Ok((Some(0), _)) => {}
                        other => failures.push(format!("verify of {refs:?} output: {other:?}")),
                    }
                }
            }
            (Ok(_), Ok(_)) => failures.push(format!("{refs:?}: outputs differ")),
            (Err(e), _) | (_, Err(e)) => failures.push(e),
        }
    }
    Outcome::new(9, "deterministic CLI output", failures, checked, Vec::new())
}

/// Applies `f` to every item on up to `jobs` threads; results keep input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let next = Mutex::new(0usize);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = {
                    let mut guard = next.lock().expect("lock");
                    let i = *guard;
                    *guard += 1;
                    i
                };
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("lock") = Some(r);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().expect("lock").expect("every item processed")).collect()
}

#[derive(Clone, Copy, Debug)]
enum Suite {
    Nilpotent,
    PowerType,
    Census,
    Bn,
    Bidiagonal,
    Semisimple,
    Coverage,
    Charpoly,
}

fn run_suite(suite: Suite, level: Level, jobs: usize) -> Outcome {
    let full = level == Level::Full;
    match suite {
        Suite::Nilpotent => nilpotent_split(&[2, 3, 4, 5, 7, 9], &[2, 3, 4, 5]),
        Suite::PowerType => power_jordan_type(40),
        Suite::Census => census_bound(if full { 81 } else { 32 }),
        Suite::Bn => bn_charpoly(if full { 100 } else { 20 }, 0),
        Suite::Bidiagonal => {
            bidiagonal_split(if full { &[7, 11, 13, 25] } else { &[7, 11] }, &[2, 3], 8)
        }
        Suite::Semisimple => {
            semisimple_split(if full { &[13, 17, 19, 23, 25] } else { &[13, 17] }, &[3, 4, 5], 0)
        }
        Suite::Coverage => coverage(&coverage_plans(&[3, 5, 7, 9, 11, 13], &[2, 3, 4], 10_000, 1_000), jobs),
        Suite::Charpoly => charpoly_agreement(500, 0),
    }
}

/// Suites for a level: `Quick` runs reduced census, `B_n`, bidiagonal and
/// semisimple suites; `Full` runs criteria 1 to 8 at full size, plus the
/// determinism suite when `binary` is given.
pub fn run(level: Level, jobs: usize, binary: Option<&Path>) -> Vec<Outcome> {
    let suites: &[Suite] = match level {
        Level::Quick => &[Suite::Census, Suite::Bn, Suite::Bidiagonal, Suite::Semisimple],
        Level::Full => &[
            Suite::Nilpotent,
            Suite::PowerType,
            Suite::Census,
            Suite::Bn,
            Suite::Bidiagonal,
            Suite::Semisimple,
            Suite::Coverage,
            Suite::Charpoly,
        ],
    };
    let mut outcomes = parallel_map(suites, jobs, |&s| run_suite(s, level, jobs));
    if let (Level::Full, Some(binary)) = (level, binary) {
        outcomes.push(determinism(binary, &[0, 7]));
    }
    outcomes
}
