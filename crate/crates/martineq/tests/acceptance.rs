//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Runs without the
//! libtest harness so the lines always reach the console.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use martineq::report::{Outcome, Report};
use martineq::{execute, Command, RunOptions};
use martineq_core::ineq::{compare_constants, eval_rio_step_with_constant, taylor_pointwise, RioPair};
use martineq_core::rng::stream;
use martineq_core::sharpness::{asymptotic_gain_probe, rio_gain, Family, Method, ParamRange, SearchConfig};
use martineq_core::wiener::IntegrandSpec;
use martineq_core::{Exponent, InequalityId, Verdict};
use rand::Rng;

type Check = Result<String, String>;

fn p(x: f64) -> Exponent {
    Exponent::new(x).unwrap()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s, || format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn sweep() -> Result<(Report, Duration), String> {
    let started = Instant::now();
    let cmd =
        Command::RandomTrees { count: 500, depth: 5, seed: 20240601, p: [2.0, 2.5, 3.0, 4.0, 8.0].map(p).to_vec() };
    let report = execute(&cmd, &RunOptions::default()).map_err(|e| e.to_string())?;
    Ok((report, started.elapsed()))
}

fn ac1(report: &Report, elapsed: Duration) -> Check {
    let Outcome::Sweep(s) = &report.outcome else { return Err("not a sweep outcome".into()) };
    let evaluated: usize = s.rows.iter().map(|r| r.evaluated).sum();
    let satisfied: usize = s.rows.iter().map(|r| r.satisfied).sum();
    check(s.rows.len() == 30, || format!("expected 6 ids x 5 exponents, got {} rows", s.rows.len()))?;
    check(s.failures.is_empty() && evaluated == satisfied, || {
        format!("{} of {evaluated} failed, first: {:?}", evaluated - satisfied, s.failures.first())
    })?;
    within_time(elapsed, 60.0)?;
    let max_ratio = s.rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(format!(
        "{} trees, {evaluated} checks satisfied at tol 1e-9, max ratio {max_ratio:.12}, {:.2} s",
        s.trees,
        elapsed.as_secs_f64()
    ))
}

fn ac2(report: &Report) -> Check {
    let Outcome::Sweep(s) = &report.outcome else { return Err("not a sweep outcome".into()) };
    let dev = s.p2_main_deviation.ok_or("no p = 2 records")?;
    check(dev <= 1e-10, || format!("max |ratio - 1| = {dev:e}"))?;
    Ok(format!("PROP1-MAIN at p=2: max |ratio - 1| = {dev:e} over all trees and levels"))
}

fn ac3() -> Check {
    let started = Instant::now();
    let g = rio_gain(1.0, 0.01, p(4.0)).map_err(|e| e.to_string())?;
    check((g - 2.99996).abs() <= 1e-3, || format!("rio_gain(1, 0.01, 4) = {g}"))?;
    let mut gaps = Vec::new();
    for q in [3.0, 4.0, 8.0] {
        let probe = asymptotic_gain_probe(p(q), &[1e-1, 1e-2, 1e-3]).map_err(|e| e.to_string())?;
        let last = *probe.gains.last().unwrap();
        check(probe.within_envelope && (q - 1.0 - last) <= 10.0 * 1e-3, || {
            format!("p={q}: gain {last} not within 10b of {}", q - 1.0)
        })?;
        gaps.push(format!("p={q}: {:.2e}", q - 1.0 - last));
        let control = eval_rio_step_with_constant(&RioPair::symmetric(1.0, 1e-3), p(q), 0.9 * (q - 1.0))
            .map_err(|e| e.to_string())?;
        check(control.verdict == Verdict::Violation && !control.satisfied, || {
            format!("p={q}: 0.9(p-1) control not flagged: {control:?}")
        })?;
    }
    within_time(started.elapsed(), 1.0)?;
    Ok(format!(
        "rio_gain(1,0.01,4) = {g:.6}; gap to p-1 at b=1e-3: {}; 0.9(p-1) control flagged; {:.3} s",
        gaps.join(", "),
        started.elapsed().as_secs_f64()
    ))
}

fn ac4() -> Check {
    for q in [2.5, 3.0, 4.0, 8.0, 16.0] {
        let c = compare_constants(p(q));
        check(c.new_main < c.classic_main && c.new_max < c.classic_max, || format!("p={q}: {c:?}"))?;
        check(c.main_improved && c.max_improved, || format!("p={q}: flags {c:?}"))?;
    }
    let c = compare_constants(p(2.0));
    check(c.new_main == c.classic_main && c.new_max == c.classic_max, || format!("p=2: {c:?}"))?;
    Ok("strict improvement for p in {2.5,3,4,8,16}; equality at p=2".into())
}

fn unit_run(q: f64) -> Result<(martineq_core::InequalityReport, Duration), String> {
    let cmd = Command::VerifyContinuous {
        source: None,
        spec: IntegrandSpec::unit(1.0, 1024),
        p: p(q),
        t: 1.0,
        paths: 1_000_000,
        seed: 7,
        ineq: vec![InequalityId::ZakaiMain],
        allow_inconclusive: false,
    };
    let started = Instant::now();
    let report = execute(&cmd, &RunOptions::default()).map_err(|e| e.to_string())?;
    let Outcome::Inequalities { records } = report.outcome else { return Err("no records".into()) };
    Ok((records[0].clone(), started.elapsed()))
}

fn ac5() -> Check {
    let (r, elapsed) = unit_run(4.0)?;
    let target = 3f64.sqrt();
    let rel = (r.lhs - target).abs() / target;
    check(rel < 0.01, || format!("lhs {} is {:.3}% from sqrt(3)", r.lhs, 100.0 * rel))?;
    check(r.rhs == 3.0, || format!("rhs {} != 3", r.rhs))?;
    check(r.verdict == Verdict::Satisfied, || format!("verdict {:?}", r.verdict))?;
    within_time(elapsed, 60.0)?;
    Ok(format!(
        "lhs {:.6} ± {:.2e} ({:.3}% from sqrt 3), rhs {}, satisfied, {:.1} s",
        r.lhs,
        r.lhs_estimate.unwrap().half_width,
        100.0 * rel,
        r.rhs,
        elapsed.as_secs_f64()
    ))
}

fn ac6() -> Check {
    let (r, _) = unit_run(2.0)?;
    let (l, h) = (r.lhs_estimate.unwrap(), r.rhs_estimate.unwrap());
    check((l.estimate - 1.0).abs() <= l.half_width + h.half_width, || {
        format!("lhs {} ± {} excludes 1", l.estimate, l.half_width)
    })?;
    check(r.ratio >= 0.98, || format!("ratio {}", r.ratio))?;
    Ok(format!("lhs {:.6} ± {:.2e}, rhs {}, ratio {:.6}", l.estimate, l.half_width, r.rhs, r.ratio))
}

fn ac7() -> Check {
    let mut rng = stream(77, 0);
    let mut worst: f64 = f64::NEG_INFINITY;
    for case in 0..10_000 {
        let d = rng.random_range(1..=4);
        let mut ball = || -> Vec<f64> {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            let r = rng.random_range(0.0..10.0);
            v.iter().map(|x| x * r / n).collect()
        };
        let (x, y) = (ball(), ball());
        let q = rng.random_range(2.1..12.0);
        let t = taylor_pointwise(&x, &y, p(q)).map_err(|e| format!("case {case}: {e}"))?;
        check(t.satisfied, || format!("case {case}: x={x:?} y={y:?} p={q}: {t:?}"))?;
        worst = worst.max((t.lhs - t.rhs) / t.tolerance);
    }
    let ex = |x: &[f64], y: &[f64], lhs: f64, rhs: f64| -> Result<(), String> {
        let t = taylor_pointwise(x, y, p(4.0)).map_err(|e| e.to_string())?;
        check((t.lhs - lhs).abs() <= 1e-9 && (t.rhs - rhs).abs() <= 1e-9 && t.satisfied, || {
            format!("x={x:?} y={y:?}: {t:?}, expected {lhs} <= {rhs}")
        })
    };
    ex(&[1.0, 0.0], &[0.0, 1.0], 4.0, 8.0)?;
    ex(&[1.5, -2.0], &[0.0, 0.0], 6.25f64.powi(2), 6.25f64.powi(2))?;
    ex(&[1.0], &[-1.0], 0.0, 0.0)?;
    Ok(format!("10^4 cases satisfied (max (lhs - rhs) / tolerance = {worst:.3}); worked examples to 1e-9"))
}

fn ac8() -> Check {
    let (_, mixed) = IntegrandSpec::zoo(64).remove(4);
    let commands = [
        Command::VerifyContinuous {
            source: None,
            spec: mixed,
            p: p(3.0),
            t: 1.0,
            paths: 30_000,
            seed: 11,
            ineq: InequalityId::CONTINUOUS.to_vec(),
            allow_inconclusive: true,
        },
        Command::Sharpness {
            source: None,
            config: SearchConfig {
                family: Family::AsymTwoPoint {
                    a: ParamRange::fixed(1.0),
                    b: ParamRange::log(1e-4, 3.0),
                    q: ParamRange::linear(0.05, 0.95),
                },
                p: p(3.5),
                method: Method::NelderMead,
                budget: 300,
                seed: 4,
                target: InequalityId::RioStep,
                level: None,
            },
        },
        Command::Sharpness {
            source: None,
            config: SearchConfig {
                family: Family::RandomTree { depth: 2, branching: 3, dim: 2, seed: 8 },
                p: p(4.0),
                method: Method::Random,
                budget: 200,
                seed: 4,
                target: InequalityId::Prop1Max,
                level: None,
            },
        },
        Command::RandomTrees { count: 40, depth: 4, seed: 3, p: vec![p(2.5), p(6.0)] },
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (i, cmd) in commands.iter().enumerate() {
        let one = execute(cmd, &RunOptions { threads: 1, ..Default::default() }).map_err(|e| e.to_string())?;
        let four = execute(cmd, &RunOptions { threads: 4, ..Default::default() }).map_err(|e| e.to_string())?;
        one.ensure_same(&four).map_err(|e| format!("{}: threads 1 vs 4: {e}", cmd.name()))?;
        let path = dir.path().join(format!("report-{i}.json"));
        four.write_json(&path).map_err(|e| e.to_string())?;
        let opts = RunOptions { threads: 2, ..Default::default() };
        martineq::replay(&path, &opts).map_err(|e| format!("{}: {e}", cmd.name()))?;
    }
    Ok("MC, Nelder-Mead, random search and sweep manifests replay bit-identically on 1, 2 and 4 threads".into())
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: &str, title: &str, outcome: Check| match outcome {
        Ok(detail) => println!("[PASS] {id} {title}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("[FAIL] {id} {title}: {why}");
        }
    };
    match sweep() {
        Ok((r, elapsed)) => {
            report("AC-1", "universal satisfaction sweep", ac1(&r, elapsed));
            report("AC-2", "p=2 equality", ac2(&r));
        }
        Err(e) => {
            report("AC-1", "universal satisfaction sweep", Err(e.clone()));
            report("AC-2", "p=2 equality", Err(e));
        }
    }
    report("AC-3", "Rio sharpness witness", ac3());
    report("AC-4", "constant improvement", ac4());
    report("AC-5", "continuous f = 1 benchmark", ac5());
    report("AC-6", "Ito isometry control", ac6());
    report("AC-7", "Taylor-bound fuzz", ac7());
    report("AC-8", "reproducibility", ac8());
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
