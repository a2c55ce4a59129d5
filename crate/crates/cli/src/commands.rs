use std::io::Write;

use pathmetric::delta::{
    build_invariant_param_lp, build_metric_param_lp, delta_bisect, exact_threshold, is_metric,
    paley29_reduced_subsystem, verify_certificate, AlgebraicThreshold, CertKind, DeltaError, DeltaOptions, Target,
    VerificationReport,
};
use pathmetric::delta::CertViolationKind;
use pathmetric::groups::{cayley_construction, paley_system, petersen_system, sample_x, symmetric_set, CyclicGroup};
use pathmetric::linarith::lpformat::{parse_lp, write_lp};
use pathmetric::linarith::{
    feasible, fm_eliminate, parametric_eliminate, CellStatus, Interval, LinearSystem, ParamCell, ParamSystem,
};
use pathmetric::pathsystem::validate_system;
use pathmetric::rational::{self, Rational};
use serde_json::{json, Value};

use crate::input::{self, list, load_cert, load_system, rational_arg, SystemDoc};
use crate::output::{emit, write_file};
use crate::{scaling, Cli, CliError, Command, DeltaArgs, FmArgs, GenCommand};

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let value = match &cli.command {
        Command::Check { file } => check(file)?,
        Command::Delta(args) => delta(args)?,
        Command::IsMetric { file, invariant } => metric(file, *invariant)?,
        Command::Verify { system, cert } => verify(system, cert)?,
        Command::Gen(GenCommand::Paley29Subsystem) => {
            let sys = paley29_reduced_subsystem(Interval::closed(Rational::from_integer(1.into()), Rational::from_integer(2.into())));
            let text = write_lp(sys.var_names(), sys.rows());
            return crate::output::written(out.write_all(text.as_bytes()));
        }
        Command::Gen(g) => generate(g)?,
        Command::Expand { file } => match load_system(file)? {
            SystemDoc::Invariant(wt) => input_expand(&wt)?,
            SystemDoc::Full(_) => return Err(CliError::Invalid(format!("{file}: expected pathsys-invariant/v1"))),
        },
        Command::Fm(args) => fm(args)?,
        Command::Scaling { config } => {
            let cfg: scaling::ScalingConfig = serde_json::from_str(&input::read(config)?)
                .map_err(|e| CliError::Invalid(format!("{config}: {e}")))?;
            let rows = scaling::run_scaling_experiment(&cfg, err);
            return if cli.csv {
                scaling::write_csv(out, &rows)
            } else {
                emit(out, &json!({ "rows": rows }), false)
            };
        }
    };
    emit(out, &value, cli.csv)
}

fn input_expand(wt: &pathmetric::groups::WordTable) -> Result<Value, CliError> {
    Ok(pathmetric::groups::build_from_words(wt)?.to_json_value())
}

fn check(file: &str) -> Result<Value, CliError> {
    let ps = load_system(file)?.into_full()?;
    let report = validate_system(&ps, None);
    serde_json::to_value(report).map_err(|e| CliError::Invalid(e.to_string()))
}

fn decimal(r: &Rational) -> String {
    rational::to_decimal(r, 12)
}

fn delta(args: &DeltaArgs) -> Result<Value, CliError> {
    let tol = rational_arg("--tol", &args.tol)?;
    let doc = load_system(&args.file)?;
    let opts = DeltaOptions {
        tol,
        float_prepass: args.float_prepass,
        ..Default::default()
    };
    let (result, n) = match (doc, args.invariant) {
        (SystemDoc::Invariant(wt), true) => (delta_bisect(Target::Invariant(&wt), &opts)?, wt.n()),
        (SystemDoc::Full(_), true) => {
            return Err(CliError::Invalid("--invariant needs a pathsys-invariant/v1 file".into()))
        }
        (doc, false) => {
            let ps = doc.into_full()?;
            (delta_bisect(Target::Full(&ps), &opts)?, ps.n())
        }
    };
    let cert = result.certificate.to_json_value();
    if let Some(path) = &args.cert_out {
        write_file(path, &result.certificate.to_json())?;
    }
    let support = result
        .lo_evidence
        .as_ref()
        .map(|y| y.iter().filter(|v| **v != Rational::from_integer(0.into())).count());
    Ok(json!({
        "n": n,
        "kind": result.certificate.kind().as_str(),
        "lo": rational::to_string(&result.lo),
        "hi": rational::to_string(&result.hi),
        "lo_decimal": decimal(&result.lo),
        "hi_decimal": decimal(&result.hi),
        "probes": result.probes,
        "float_probes": result.float_probes,
        "farkas_support_at_lo": support,
        "certificate": cert,
    }))
}

fn farkas_rows(sys: &LinearSystem, y: &[Rational]) -> Value {
    Value::Array(
        sys.rows()
            .iter()
            .zip(y)
            .filter(|(_, v)| **v != Rational::from_integer(0.into()))
            .map(|(row, v)| json!({ "row": row.tag, "y": rational::to_string(v) }))
            .collect(),
    )
}

fn metric(file: &str, invariant: bool) -> Result<Value, CliError> {
    let doc = load_system(file)?;
    let (decision, lp) = match (doc, invariant) {
        (SystemDoc::Invariant(wt), true) => (is_metric(Target::Invariant(&wt))?, build_invariant_param_lp(&wt, true)?),
        (SystemDoc::Full(_), true) => {
            return Err(CliError::Invalid("--invariant needs a pathsys-invariant/v1 file".into()))
        }
        (doc, false) => {
            let ps = doc.into_full()?;
            (is_metric(Target::Full(&ps))?, build_metric_param_lp(&ps, true)?)
        }
    };
    let sys = lp.at(&Rational::from_integer(1.into()));
    Ok(json!({
        "metric": decision.metric,
        "witness": decision.witness.map(|c| c.to_json_value()),
        "farkas": decision.farkas.map(|y| farkas_rows(&sys, &y)),
    }))
}

fn report_json(r: &VerificationReport) -> Value {
    json!({
        "passed": r.passed,
        "t": rational::to_string(&r.t),
        "max_stretch": rational::to_string(&r.max_stretch),
        "max_stretch_decimal": decimal(&r.max_stretch),
        "worst": r.worst,
        "triangle_checks": r.triangle_checks,
        "stretch_checks": r.stretch_checks,
        "violation_count": r.violation_count,
        "violations": r.violations.iter().map(|v| json!({
            "kind": match v.kind { CertViolationKind::Triangle => "triangle", CertViolationKind::Stretch => "stretch" },
            "at": v.at,
            "detail": v.detail,
        })).collect::<Vec<_>>(),
    })
}

fn verify(system: &str, cert: &str) -> Result<Value, CliError> {
    let cert = load_cert(cert)?;
    let report = match (load_system(system)?, cert.kind()) {
        (SystemDoc::Invariant(wt), CertKind::Class) => verify_certificate(Target::Invariant(&wt), &cert)?,
        (doc, _) => {
            let ps = doc.into_full()?;
            verify_certificate(Target::Full(&ps), &cert)?
        }
    };
    Ok(report_json(&report))
}

fn signed_list(n: usize, s: &str) -> Result<Vec<i64>, CliError> {
    let raw = list(s)
        .iter()
        .map(|x| x.parse::<i64>().map_err(|_| CliError::Invalid(format!("--x: bad element {x:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let g = CyclicGroup::new(n)?;
    Ok(symmetric_set(n, &raw).into_iter().map(|a| g.signed(a)).collect())
}

fn construction(n: usize, x: &[i64], m: usize, out: Option<&String>) -> Result<Value, CliError> {
    let (params, wt) = cayley_construction(n, x, m)?;
    if let Some(path) = out {
        write_file(path, &wt.to_json())?;
    }
    Ok(json!({ "params": params.to_json_value(), "system": wt.to_json_value() }))
}

fn generate(g: &GenCommand) -> Result<Value, CliError> {
    match g {
        GenCommand::Petersen => Ok(petersen_system().to_json_value()),
        GenCommand::Paley { p } => Ok(paley_system(*p)?.to_json_value()),
        GenCommand::Cayley { n, x, m, out } => construction(*n, &signed_list(*n, x)?, *m, out.as_ref()),
        GenCommand::Sample {
            n,
            k,
            m,
            seed,
            max_attempts,
            out,
        } => {
            let s = sample_x(*n, *k, *m, *seed, *max_attempts)?;
            let g = CyclicGroup::new(*n)?;
            let x: Vec<i64> = s.x.iter().map(|&a| g.signed(a)).collect();
            let mut v = construction(*n, &x, *m, out.as_ref())?;
            v["sample"] = json!({ "attempts": s.attempts, "diameter": s.diameter, "seed": seed });
            Ok(v)
        }
        GenCommand::Paley29Subsystem => unreachable!("handled by the caller"),
    }
}

fn indices(sys_names: &[String], names: &[String], flag: &str) -> Result<Vec<usize>, CliError> {
    names
        .iter()
        .map(|n| {
            sys_names
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| CliError::Invalid(format!("{flag}: unknown variable {n:?}")))
        })
        .collect()
}

fn cell_json(cell: &ParamCell, names: &[String]) -> Value {
    let (status, poly) = match &cell.status {
        CellStatus::Resolved => ("resolved", None),
        CellStatus::Unresolved { poly } => ("unresolved", Some(poly.to_string())),
    };
    json!({
        "interval": cell.interval.to_string(),
        "status": status,
        "root_of": poly,
        "terminal": cell.terminal.iter().map(|r| r.display(names)).collect::<Vec<_>>(),
    })
}

fn threshold_json(th: &AlgebraicThreshold) -> Value {
    json!({
        "polynomial": th.polynomial.to_string(),
        "interval": [rational::to_string(&th.interval.lo), rational::to_string(&th.interval.hi)],
        "exact": th.exact.as_ref().map(rational::to_string),
        "decimal": th.decimal,
    })
}

fn fm(args: &FmArgs) -> Result<Value, CliError> {
    let doc = parse_lp(&input::read(&args.file)?).map_err(|e| CliError::Invalid(format!("{}: {e}", args.file)))?;
    let names = doc.var_names.clone();
    let keep = indices(&names, &args.keep.as_deref().map(list).unwrap_or_default(), "--keep")?;
    let order = match &args.order {
        Some(o) => indices(&names, &list(o), "--order")?,
        None => (0..names.len()).filter(|v| !keep.contains(v)).collect(),
    };
    if let Some(v) = order.iter().find(|v| keep.contains(v)) {
        return Err(CliError::Invalid(format!("{} is both kept and eliminated", names[*v])));
    }
    let kept: Vec<String> = (0..names.len()).filter(|v| !order.contains(v)).map(|v| names[v].clone()).collect();

    let interval = match &args.param_interval {
        Some(s) => {
            let parts = list(s);
            if parts.len() != 2 {
                return Err(CliError::Invalid("--param-interval expects a,b".into()));
            }
            let (a, b) = (rational_arg("--param-interval", &parts[0])?, rational_arg("--param-interval", &parts[1])?);
            if a > b {
                return Err(CliError::Invalid("--param-interval: a > b".into()));
            }
            Some(Interval::closed(a, b))
        }
        None if doc.is_parametric() => {
            return Err(CliError::Invalid("system mentions t; give --param-interval".into()))
        }
        None => None,
    };

    let Some(interval) = interval else {
        let sys = doc.instantiate(&Rational::from_integer(0.into()));
        let projected = fm_eliminate(&sys, &order)?;
        let rows: Vec<String> = projected.to_lp_text().lines().map(String::from).collect();
        return Ok(json!({
            "kept": kept,
            "feasible": feasible(&sys)?.is_feasible(),
            "rows": rows,
        }));
    };

    let sys: ParamSystem = doc.to_param_system(interval)?;
    if kept.len() == 1 {
        let keep_idx = (0..names.len()).find(|v| !order.contains(v)).expect("one kept variable");
        return Ok(match exact_threshold(&sys, Some(&order), keep_idx) {
            Ok(th) => json!({
                "kept": kept,
                "cells": th.cells.iter().map(|c| cell_json(c, &names)).collect::<Vec<_>>(),
                "threshold": threshold_json(&th),
            }),
            Err(e @ (DeltaError::NoThresholdInInterval | DeltaError::SignAmbiguous(_))) => {
                let cells = parametric_eliminate(&sys, &order)?;
                json!({
                    "kept": kept,
                    "cells": cells.iter().map(|c| cell_json(c, &names)).collect::<Vec<_>>(),
                    "threshold": null,
                    "threshold_note": e.to_string(),
                })
            }
            Err(e) => return Err(e.into()),
        });
    }
    let cells = parametric_eliminate(&sys, &order)?;
    Ok(json!({
        "kept": kept,
        "cells": cells.iter().map(|c| cell_json(c, &names)).collect::<Vec<_>>(),
    }))
}
