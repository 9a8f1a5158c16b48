use std::fs;
use std::path::Path;

use etale_growth::algebra::{
    check_weight_submult, sweep_eq41, sweep_interpolation, sweep_lemma44, sweep_norm_bounds,
    sweep_powers, sweep_young, young_triples, Region, WeightedSetup,
};
use etale_growth::groupoid::{BasePath, CompactSet, Orbit};
use etale_growth::growth::{
    coarse_growth_bound, fit_certificate, graph_ball_growth, transfer_certificate,
    verify_certificate, FilteredGroupoid, FiniteMetricSpace, FitReport, GrowthCertificate,
    GrowthSeries,
};
use etale_growth::prime_shift::{bounds_threshold, effective_degree, PrimeShiftTables};
use etale_growth::shift::{ShiftSpec, Word};
use etale_growth::{Error, Result};
use num_rational::Ratio;
use serde_json::{json, Value};

use super::{
    AlgebraCmd, Budgets, CheckKind, Command, Family, GroupoidCmd, GrowthCmd, OrbitArgs, Outcome,
    PrimeCmd, RegionArgs, ShiftCmd,
};

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub fn dispatch(cmd: &Command, budgets: &Budgets) -> Result<Outcome> {
    match cmd {
        Command::Shift(c) => shift(c, budgets),
        Command::PrimeShift(c) => prime_shift(c, budgets),
        Command::Groupoid(c) => groupoid(c, budgets),
        Command::Algebra(c) => algebra(c, budgets),
        Command::Growth(c) => growth(c),
    }
}

fn shift(cmd: &ShiftCmd, budgets: &Budgets) -> Result<Outcome> {
    match cmd {
        ShiftCmd::Enumerate { spec, len } => {
            let s = ShiftSpec::from_name_or_path(&spec.spec)?;
            let words = s.enumerate_language(*len, budgets.enumeration)?;
            let csv = csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["word"])?;
                for word in &words {
                    w.write_record([word.to_string()])?;
                }
                w.flush()?;
                Ok(())
            })?;
            Ok(Outcome {
                passed: true,
                params: json!({ "spec": spec.spec, "len": len }),
                result: json!({
                    "count": words.len(),
                    "words": words.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                }),
                csv: Some(csv),
            })
        }
        ShiftCmd::Complexity { spec, max } => {
            let s = ShiftSpec::from_name_or_path(&spec.spec)?;
            let table = s.complexity(*max, budgets.enumeration)?;
            Ok(Outcome {
                passed: true,
                params: json!({ "spec": spec.spec, "max": max }),
                result: language_json(&table),
                csv: Some(csv_bytes(|buf| table.write_csv(buf))?),
            })
        }
        ShiftCmd::Check { spec, max, word } => {
            let s = ShiftSpec::from_name_or_path(&spec.spec)?;
            let factorial = s.check_factorial(*max, budgets.enumeration)?;
            let admissible = match word {
                Some(w) => Some(s.is_admissible(&Word::parse(w)?)?),
                None => None,
            };
            Ok(Outcome {
                passed: factorial,
                params: json!({ "spec": spec.spec, "max": max, "word": word }),
                result: json!({ "factorial": factorial, "admissible": admissible }),
                csv: None,
            })
        }
    }
}

fn language_json(t: &etale_growth::shift::LanguageTable) -> Value {
    let rows: Vec<Value> = (1..=t.max_len())
        .map(|n| {
            json!({
                "n": n,
                "count": t.count(n).to_string(),
                "cumulative": t.cumulative(n).to_string(),
            })
        })
        .collect();
    json!({ "rows": rows })
}

fn prime_shift(cmd: &PrimeCmd, budgets: &Budgets) -> Result<Outcome> {
    match cmd {
        PrimeCmd::Counts { max } => {
            let t = PrimeShiftTables::new(*max)?;
            Ok(Outcome {
                passed: true,
                params: json!({ "max": max }),
                result: language_json(&t.language),
                csv: Some(csv_bytes(|buf| t.language.write_csv(buf))?),
            })
        }
        PrimeCmd::Bounds { max, max_threshold } => {
            if *max < 2 {
                return Err(invalid("bounds start at n = 2"));
            }
            let t = PrimeShiftTables::new(*max)?;
            let rows = t.bounds()?;
            let threshold = bounds_threshold(&rows);
            let failing: Vec<u64> = rows.iter().filter(|r| !r.holds()).map(|r| r.n).collect();
            let csv = csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["n", "words", "complexity", "lower", "upper", "holds"])?;
                for r in &rows {
                    w.write_record([
                        r.n.to_string(),
                        r.words.to_string(),
                        r.complexity.to_string(),
                        r.lower.to_string(),
                        r.upper.to_string(),
                        r.holds().to_string(),
                    ])?;
                }
                w.flush()?;
                Ok(())
            })?;
            Ok(Outcome {
                passed: threshold.is_some_and(|n0| n0 <= *max_threshold),
                params: json!({ "max": max, "max_threshold": max_threshold }),
                result: json!({ "threshold": threshold, "failing_rows": failing, "rows": rows.len() }),
                csv: Some(csv),
            })
        }
        PrimeCmd::Verify {
            max,
            brute,
            max_threshold,
            degree_points,
        } => {
            let n = (*max).max(*brute).max(2);
            if let Some(&p) = degree_points.iter().find(|&&p| p as usize > n || p < 2) {
                return Err(invalid(format!("degree point {p} is outside 2..={n}")));
            }
            let t = PrimeShiftTables::new(n)?;
            let enumerated = ShiftSpec::prime_shift().complexity(*brute, budgets.enumeration)?;
            let mismatches: Vec<usize> = (0..=*brute)
                .filter(|&i| enumerated.count(i) != t.language.count(i))
                .collect();
            let rows = t.bounds()?;
            let threshold = bounds_threshold(&rows);
            let degrees: Vec<f64> = degree_points
                .iter()
                .map(|&p| effective_degree(t.language.cumulative(p as usize), p))
                .collect();
            let increasing = degrees.windows(2).all(|w| w[1] > w[0] + 1e-9);
            let passed = mismatches.is_empty()
                && threshold.is_some_and(|n0| n0 <= *max_threshold)
                && increasing;
            Ok(Outcome {
                passed,
                params: json!({
                    "max": max,
                    "brute": brute,
                    "max_threshold": max_threshold,
                    "degree_points": degree_points,
                }),
                result: json!({
                    "enumeration_mismatches": mismatches,
                    "threshold": threshold,
                    "effective_degrees": degrees,
                    "degrees_increasing": increasing,
                }),
                csv: None,
            })
        }
    }
}

fn orbit(args: &OrbitArgs) -> Result<Orbit> {
    Orbit::new(ShiftSpec::from_name_or_path(&args.spec.spec)?, BasePath::parse(&args.base)?)
}

/// Parses `a/b` or a nonnegative decimal exactly.
fn parse_ratio(text: &str) -> Result<Ratio<u64>> {
    let bad = || invalid(format!("cannot read {text:?} as a nonnegative rational"));
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(a, b));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if int.is_empty() && frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 18 {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10u64.pow(frac.len() as u32);
    let num = if frac.is_empty() { 0 } else { frac.parse::<u64>().map_err(|_| bad())? };
    let whole = int.checked_mul(den).and_then(|v| v.checked_add(num)).ok_or_else(bad)?;
    Ok(Ratio::new(whole, den))
}

fn ratio_json(r: &Ratio<u64>) -> Value {
    json!({
        "exact": format!("{}/{}", r.numer(), r.denom()),
        "value": *r.numer() as f64 / *r.denom() as f64,
    })
}

fn groupoid(cmd: &GroupoidCmd, budgets: &Budgets) -> Result<Outcome> {
    match cmd {
        GroupoidCmd::Ball { orbit: args, radius } => {
            let o = orbit(args)?;
            let table = o.ball(*radius, budgets.ball)?;
            Ok(Outcome {
                passed: true,
                params: json!({ "orbit": args, "radius": radius }),
                result: json!({
                    "base": o.base().to_string(),
                    "sizes": table.sizes(),
                    "levels": table.level_sizes(),
                }),
                csv: Some(csv_bytes(|buf| table.write_csv(buf))?),
            })
        }
        GroupoidCmd::Folner {
            orbit: args,
            eps,
            k_radius,
            max_radius,
        } => {
            let o = orbit(args)?;
            let e = parse_ratio(eps)?;
            let witness = o.folner_search(&CompactSet::LengthBall(*k_radius), e, *max_radius, budgets.ball)?;
            let result = match &witness {
                Some(w) => json!({
                    "found": true,
                    "radius": w.radius,
                    "f_size": w.f_size,
                    "kf_size": w.kf_size,
                    "ball_ratio": ratio_json(&w.ball_ratio),
                    "ratio": ratio_json(&w.ratio),
                }),
                None => json!({ "found": false }),
            };
            Ok(Outcome {
                passed: witness.is_some_and(|w| w.ratio <= Ratio::from_integer(1) + e),
                params: json!({
                    "orbit": args,
                    "eps": ratio_json(&e),
                    "k_radius": k_radius,
                    "max_radius": max_radius,
                }),
                result,
                csv: None,
            })
        }
    }
}

fn region(args: &RegionArgs, budgets: &Budgets) -> Result<(Region, WeightedSetup)> {
    let r = Region::new(orbit(&args.orbit)?, args.radius, args.cap, budgets.ball)?;
    let setup = r.weighted_setup(
        (args.alpha, args.beta),
        (args.alpha0, args.beta0),
        args.p,
        args.profile_len,
        budgets.ball,
    )?;
    Ok((r, setup))
}

fn setup_json(r: &Region, s: &WeightedSetup) -> Value {
    json!({
        "points": r.points().len(),
        "arrows": r.arrows().len(),
        "weights": s.params,
        "interpolation": s.interp,
        "holder_k": s.holder_k,
        "profile": s.profile.levels(),
    })
}

fn algebra(cmd: &AlgebraCmd, budgets: &Budgets) -> Result<Outcome> {
    match cmd {
        AlgebraCmd::Verify {
            region: args,
            check,
            cases,
            exponents,
        } => {
            let (r, s) = region(args, budgets)?;
            let want = |k: CheckKind| *check == CheckKind::All || *check == k;
            let mut reports = Vec::new();
            // Each suite gets its own stream so that selecting one check
            // reproduces its part of `all`.
            if want(CheckKind::Submult) {
                reports.push(check_weight_submult(&r, &s.params)?);
            }
            if want(CheckKind::Eq41) {
                reports.push(sweep_eq41(&r, &s.params, *cases, args.seed)?);
            }
            if want(CheckKind::Young) {
                let triples = young_triples(exponents);
                if triples.is_empty() {
                    return Err(invalid("no exponent triples satisfy 1 + 1/r = 1/p + 1/q"));
                }
                reports.push(sweep_young(&r, &triples, *cases, args.seed.wrapping_add(1))?);
            }
            if want(CheckKind::Lemma44) {
                reports.push(sweep_lemma44(&r, &s.params, args.p, *cases, args.seed.wrapping_add(2))?);
            }
            if want(CheckKind::Interp) {
                reports.push(sweep_interpolation(
                    &r,
                    &s.params,
                    &s.interp,
                    s.holder_k,
                    *cases,
                    args.seed.wrapping_add(3),
                )?);
            }
            Ok(Outcome {
                passed: reports.iter().all(|c| c.passed()),
                params: json!({ "region": args, "check": check, "cases": cases, "exponents": exponents }),
                result: json!({ "setup": setup_json(&r, &s), "reports": reports }),
                csv: None,
            })
        }
        AlgebraCmd::Norms {
            region: args,
            functions,
            ball_radius,
        } => {
            let (r, s) = region(args, budgets)?;
            let sweep = sweep_norm_bounds(
                &r,
                &s.params,
                args.p,
                s.holder_k,
                *ball_radius,
                *functions,
                args.seed,
                budgets.ball,
            )?;
            let csv = csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["function", "lower", "upper"])?;
                for (i, b) in sweep.bounds.iter().enumerate() {
                    w.write_record([i.to_string(), b.lower.to_string(), b.upper.to_string()])?;
                }
                w.flush()?;
                Ok(())
            })?;
            Ok(Outcome {
                passed: sweep.passed(),
                params: json!({ "region": args, "functions": functions, "ball_radius": ball_radius }),
                result: json!({ "setup": setup_json(&r, &s), "sweep": sweep }),
                csv: Some(csv),
            })
        }
        AlgebraCmd::Powers {
            region: args,
            functions,
            depth,
            max_len,
        } => {
            let (r, s) = region(args, budgets)?;
            let sweep = sweep_powers(&r, &s.params, &s.interp, s.holder_k, *depth, *functions, *max_len, args.seed)?;
            Ok(Outcome {
                passed: sweep.passed(),
                params: json!({ "region": args, "functions": functions, "depth": depth, "max_len": max_len }),
                result: json!({ "setup": setup_json(&r, &s), "sweep": sweep }),
                csv: None,
            })
        }
    }
}

fn read_series(path: &Path) -> Result<GrowthSeries> {
    GrowthSeries::read_csv(read_text(path)?.as_bytes())
}

fn series_json(s: &GrowthSeries) -> Value {
    json!({
        "start": s.start(),
        "values": s.values().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    })
}

fn fit_json(s: &GrowthSeries, fit: &FitReport) -> Result<(bool, Value)> {
    let mut ok = true;
    for c in fit.polynomial.iter().chain(&fit.strong_subexp) {
        ok &= verify_certificate(s, c)?.holds;
    }
    let best = fit.best_polynomial().cloned();
    Ok((ok, json!({ "fit": fit, "best_polynomial": best })))
}

fn growth(cmd: &GrowthCmd) -> Result<Outcome> {
    match cmd {
        GrowthCmd::Fit { input } => {
            let s = read_series(input)?;
            let fit = fit_certificate(&s);
            let (ok, result) = fit_json(&s, &fit)?;
            Ok(Outcome {
                passed: ok,
                params: json!({ "input": input }),
                result,
                csv: None,
            })
        }
        GrowthCmd::Verify {
            input,
            family,
            c,
            d,
            alpha,
            beta,
        } => {
            let s = read_series(input)?;
            let cert = match family {
                Family::Polynomial => {
                    GrowthCertificate::polynomial(*c, d.ok_or_else(|| invalid("--d is required"))?)?
                }
                Family::Subexp => GrowthCertificate::strong_subexp(
                    *c,
                    alpha.ok_or_else(|| invalid("--alpha is required"))?,
                    beta.ok_or_else(|| invalid("--beta is required"))?,
                )?,
            };
            let v = verify_certificate(&s, &cert)?;
            Ok(Outcome {
                passed: v.holds,
                params: json!({ "input": input, "certificate": cert }),
                result: json!(v),
                csv: None,
            })
        }
        GrowthCmd::Graph { input, r_max, m } => {
            let space = FiniteMetricSpace::parse_edge_list(&read_text(input)?)?;
            let f = graph_ball_growth(&space, *r_max);
            let g = coarse_growth_bound(&f, *m)?;
            let fit_f = fit_certificate(&f);
            let fit_g = fit_certificate(&g);
            let mut transferred = Vec::new();
            let mut ok = true;
            for c in fit_f.polynomial.iter().chain(&fit_f.strong_subexp) {
                let t = transfer_certificate(c, *m)?;
                let holds = verify_certificate(&g, &t)?.holds;
                ok &= holds;
                transferred.push(json!({ "from": c, "to": t, "holds": holds }));
            }
            let (ok_f, fit_f_json) = fit_json(&f, &fit_f)?;
            let (ok_g, fit_g_json) = fit_json(&g, &fit_g)?;
            let csv = csv_bytes(|buf| {
                let mut w = csv::Writer::from_writer(buf);
                w.write_record(["r", "f", "coarse"])?;
                for ((r, a), (_, b)) in f.iter().zip(g.iter()) {
                    w.write_record([r.to_string(), a.to_string(), b.to_string()])?;
                }
                w.flush()?;
                Ok(())
            })?;
            Ok(Outcome {
                passed: ok && ok_f && ok_g,
                params: json!({ "input": input, "r_max": r_max, "m": m }),
                result: json!({
                    "points": space.len(),
                    "growth": series_json(&f),
                    "coarse": series_json(&g),
                    "growth_fit": fit_f_json,
                    "coarse_fit": fit_g_json,
                    "transferred": transferred,
                }),
                csv: Some(csv),
            })
        }
        GrowthCmd::Proper { input } => {
            let g = FilteredGroupoid::from_toml_str(&read_text(input)?)?;
            let pl = g.proper_length();
            Ok(Outcome {
                passed: pl.passed(),
                params: json!({ "input": input }),
                result: json!(pl),
                csv: None,
            })
        }
    }
}
