use serde::Serialize;
use serde_json::{json, Map, Value};

use super::input::{Input, Source};
use super::{report, CatalogAction, Cli, Command, Format, GlobalArgs, IntegrateArgs, Op, Outcome, EXIT_FAIL, EXIT_OK};
use crate::catalog;
use crate::dynamics::{integrate, integrate_reparam, PoissonSystem, ScalarField, Status, StepControl};
use crate::error::{Error, Result};
use crate::expr::{Domain, Params};
use crate::families::{classify, oplus, otimes};
use crate::reduction::{casimir, darboux, verify_chart_seeded, CasimirFn};
use crate::structure::{CoordinateMap, StructureMatrix, Verdict, DEFAULT_JACOBI_TOL};

const ADAPTIVE_TOL: f64 = 1e-10;

/// Settings echoed into every report.
#[derive(Serialize)]
struct Config<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<&'a Source>,
    params: &'a Params,
    #[serde(skip_serializing_if = "Option::is_none")]
    domain: Option<&'a Domain>,
    tol: Option<f64>,
    samples: usize,
    seed: u64,
    format: Format,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

impl GlobalArgs {
    fn param_map(&self) -> Params {
        self.params.iter().cloned().collect()
    }
}

fn config<'a>(g: &GlobalArgs, params: &'a Params, inp: Option<&'a Input>, tol: Option<f64>) -> Config<'a> {
    Config {
        source: inp.map(|i| &i.source),
        params: inp.map_or(params, |i| &i.structure.params),
        domain: inp.map(|i| &i.structure.domain),
        tol,
        samples: g.samples,
        seed: g.seed,
        format: g.format,
        extra: Map::new(),
    }
}

fn entries_json(j: &StructureMatrix) -> Value {
    json!({ "u": j.u.to_string(), "v": j.v.to_string(), "w": j.w.to_string() })
}

fn code(v: Verdict) -> i32 {
    if v.passed() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn done(code: i32, stdout: String) -> Result<Outcome> {
    Ok(Outcome { code, stdout, stderr: String::new() })
}

pub(super) fn dispatch(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let params = g.param_map();
    let resolve = |args: &super::InputArgs| Input::resolve(args, &params, g.domain.as_ref());
    match &cli.command {
        Command::Verify(args) => {
            let inp = resolve(args)?;
            let tol = g.tol.unwrap_or(DEFAULT_JACOBI_TOL);
            let rep = inp.structure.check_jacobi_seeded(g.samples, tol, g.seed);
            let out = report(
                "verify",
                g.format,
                config(g, &params, Some(&inp), Some(tol)),
                json!({ "entries": entries_json(&inp.structure), "jacobi": rep }),
            )?;
            done(code(rep.verdict), out)
        }
        Command::Classify(args) => {
            let inp = resolve(args)?;
            let c = classify(&inp.structure);
            let out = report(
                "classify",
                g.format,
                config(g, &params, Some(&inp), None),
                json!({ "entries": entries_json(&inp.structure), "tag": c.tag, "evidence": c.evidence, "notes": c.notes }),
            )?;
            done(EXIT_OK, out)
        }
        Command::Casimir(args) => {
            let inp = resolve(args)?;
            let spec = inp.family_spec()?;
            let c = casimir(&spec)?;
            let rep = c.check_seeded(&inp.structure, g.samples, g.seed);
            let out = report(
                "casimir",
                g.format,
                config(g, &params, Some(&inp), Some(rep.tol)),
                json!({
                    "provenance": c.provenance,
                    "closed_form": c.closed_form().map(|e| e.to_string()),
                    "terms": c.terms().iter().map(|t| t.info()).collect::<Vec<_>>(),
                    "check": rep,
                }),
            )?;
            done(code(rep.verdict), out)
        }
        Command::Darboux { input, out: path, alternate } => {
            let inp = resolve(input)?;
            let spec = inp.family_spec()?;
            let chart = darboux(&spec, *alternate)?;
            let rep = verify_chart_seeded(&inp.structure, &chart, g.samples, g.seed);
            let export = chart.export();
            if let Some(path) = path {
                std::fs::write(path, serde_json::to_string_pretty(&export)? + "\n")?;
            }
            let mut cfg = config(g, &params, Some(&inp), Some(rep.tol));
            cfg.extra.insert("alternate".into(), json!(alternate));
            let out = report("darboux", g.format, cfg, json!({ "chart": export, "check": rep }))?;
            done(code(rep.verdict), out)
        }
        Command::Integrate(args) => cmd_integrate(g, &params, args),
        Command::Superpose { op, scalar, catalog: ids, spec: files } => {
            let mut inputs = Vec::new();
            for id in ids {
                let args = super::InputArgs { catalog: Some(id.clone()), ..Default::default() };
                inputs.push(resolve(&args)?);
            }
            for f in files {
                let args = super::InputArgs { spec: Some(f.clone()), ..Default::default() };
                inputs.push(resolve(&args)?);
            }
            let j = match (op, &inputs[..], scalar) {
                (Op::Oplus, [a, b], None) => oplus(&a.structure, &b.structure)?,
                (Op::Otimes, [a], Some(s)) => otimes(*s, &a.structure)?,
                (Op::Oplus, _, _) => {
                    return Err(Error::Invalid("oplus takes two inputs and no --scalar".into()))
                }
                (Op::Otimes, _, _) => {
                    return Err(Error::Invalid("otimes takes one input and --scalar".into()))
                }
            };
            let tol = g.tol.unwrap_or(DEFAULT_JACOBI_TOL);
            let rep = j.check_jacobi_seeded(g.samples, tol, g.seed);
            let mut cfg = config(g, &params, None, Some(tol));
            cfg.extra.insert("op".into(), json!(op));
            cfg.extra.insert("scalar".into(), json!(scalar));
            cfg.extra.insert("inputs".into(), json!(inputs.iter().map(|i| &i.source).collect::<Vec<_>>()));
            let out = report(
                "superpose",
                g.format,
                cfg,
                json!({ "structure": j, "tag": classify(&j).tag, "jacobi": rep }),
            )?;
            done(code(rep.verdict), out)
        }
        Command::Catalog { action } => cmd_catalog(g, &params, action),
    }
}

fn cmd_catalog(g: &GlobalArgs, params: &Params, action: &CatalogAction) -> Result<Outcome> {
    match action {
        CatalogAction::List => {
            if g.format == Format::Text {
                let mut out = String::new();
                for e in catalog::list() {
                    out.push_str(&format!("{:<28} {:<20} {}\n", e.id, e.tag().to_string(), e.name));
                }
                return done(EXIT_OK, out);
            }
            let rows: Vec<Value> = catalog::list()
                .iter()
                .map(|e| json!({ "id": e.id, "name": e.name, "tag": e.tag(), "citation": e.citation }))
                .collect();
            let out = report("catalog list", g.format, config(g, params, None, None), json!({ "version": catalog::version(), "entries": rows }))?;
            done(EXIT_OK, out)
        }
        CatalogAction::Show { id } => {
            let e = catalog::get(id)?;
            let out = report(
                "catalog show",
                g.format,
                config(g, params, None, None),
                json!({ "entry": e, "tag": e.tag() }),
            )?;
            done(EXIT_OK, out)
        }
        CatalogAction::Export => done(EXIT_OK, catalog::export().to_string()),
    }
}

fn cmd_integrate(g: &GlobalArgs, params: &Params, args: &IntegrateArgs) -> Result<Outcome> {
    let inp = Input::resolve(&args.input, params, g.domain.as_ref())?;
    let h = match (&args.hamiltonian, &inp.hamiltonian) {
        (Some(text), _) => text.parse()?,
        (None, Some(h)) => h.clone(),
        (None, None) => {
            return Err(Error::Invalid("no Hamiltonian: pass --hamiltonian EXPR".into()));
        }
    };
    let sys = PoissonSystem::new(inp.structure.clone(), h);
    let x0 = match &args.x0 {
        Some(p) => *p,
        None => sys.domain().center(),
    };
    let tol = args.adaptive.then(|| g.tol.unwrap_or(ADAPTIVE_TOL));
    let control = match tol {
        Some(tol) => StepControl::Adaptive { tol, h_init: args.step },
        None => StepControl::Fixed { h: args.step },
    };
    let spec = inp.family_spec().ok();
    let cas: Option<CasimirFn> = spec.as_ref().and_then(|s| casimir(s).ok());
    let c = cas.as_ref().map(|c| c as &dyn ScalarField);
    let span = (args.t0, args.t_end);
    let (traj, distinguished) = if args.reparam {
        let spec = spec.ok_or_else(|| Error::Invalid("--reparam needs a family spec".into()))?;
        let chart = darboux(&spec, false)?;
        let z0 = chart.forward(&x0)?;
        let traj = integrate_reparam(&sys, &chart, &z0, span, control, c)?;
        let k = chart.distinguished;
        let drift = traj
            .chart_states
            .as_deref()
            .unwrap_or_default()
            .iter()
            .fold(0.0f64, |m, z| m.max((z[k] - z0[k]).abs()));
        (traj, Some(json!({ "index": k, "max_abs_drift": drift })))
    } else {
        (integrate(&sys, &x0, span, control, c)?, None)
    };
    let mut csv = Vec::new();
    traj.write_csv(&mut csv, args.stride)?;
    let csv = String::from_utf8(csv).expect("CSV is ASCII");
    if let Some(path) = &args.out {
        std::fs::write(path, &csv)?;
    }
    if g.format == Format::Csv {
        return done(EXIT_OK, csv);
    }
    let mut cfg = config(g, params, Some(&inp), tol);
    cfg.extra.insert("hamiltonian".into(), json!(sys.hamiltonian.to_string()));
    cfg.extra.insert("x0".into(), json!(x0));
    cfg.extra.insert("span".into(), json!([span.0, span.1]));
    cfg.extra.insert("control".into(), json!(control));
    cfg.extra.insert("reparam".into(), json!(args.reparam));
    let n = traj.len();
    let result = json!({
        "status": traj.status,
        "experimental": traj.experimental,
        "rows": n,
        "t_final": traj.t[n - 1],
        "x_final": traj.x[n - 1],
        "tau_final": traj.tau.as_ref().map(|t| t[n - 1]),
        "casimir": cas.as_ref().map(|c| c.provenance.clone()),
        "drift": traj.column_drift(),
        "distinguished": distinguished,
        "boundary_exit": traj.status == Status::BoundaryExit,
    });
    done(EXIT_OK, report("integrate", g.format, cfg, result)?)
}
