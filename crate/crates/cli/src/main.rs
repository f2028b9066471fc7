//! mwk: evaluate and compare Milnor-Witt K-theory expressions, compute
//! residues, specializations, transfers, differentials and homology of the
//! small-scheme zoo, and run the premodule rule suites.
//!
//! Exit codes: 0 success / all checks pass, 1 a verification failed,
//! 2 usage or input error.

use clap::{Args, Parser, Subcommand};
use mwk_core::expr;
use mwk_core::fields::FieldDesc;
use mwk_core::geom::{self, homology, Scheme, SchemeTwist};
use mwk_core::kmw::KmwElem;
use mwk_core::premodule::{self, verify};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mwk", version, about = "exact Milnor-Witt K-theory computations")]
struct Cli {
    /// emit machine-readable JSON on stdout
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an expression `... in KMW(field, twist)`, optionally
    /// comparing it with a second one
    Eval(EvalArgs),
    /// Residue at a place of GF(q)(t)
    Residue(ResidueArgs),
    /// Specialization at a place with a chosen uniformizer
    Specialize(SpecializeArgs),
    /// Transfer along a finite field extension
    Transfer(TransferArgs),
    /// Differential of a generic cycle on a line
    D(DiffArgs),
    /// Homology of a zoo scheme
    Homology(HomologyArgs),
    /// Run a premodule rule suite
    Verify(VerifyArgs),
    /// Gysin map of a divisor point applied to a generic class
    Gysin(GysinArgs),
    /// Products of cycles
    Product(ProductArgs),
    /// The adjunction with classical Milnor K-theory
    Adjoint(AdjointArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// expression, e.g. "eta*(eta*[-1]+2) in KMW(GF(5),-A1)"
    expr: String,
    /// compare for equality with this expression (same field and twist)
    #[arg(long)]
    equal: Option<String>,
}

#[derive(Args)]
struct ResidueArgs {
    expr: String,
    /// place: a polynomial in t (e.g. "t", "t^2+2") or "inf"
    #[arg(long)]
    at: String,
}

#[derive(Args)]
struct SpecializeArgs {
    expr: String,
    #[arg(long)]
    at: String,
    /// uniformizer to use (defaults to the canonical one)
    #[arg(long)]
    pi: Option<String>,
}

#[derive(Args)]
struct TransferArgs {
    /// element over the larger field, e.g. "<a9#3> in KMW(GF(9),0)"
    expr: String,
    /// source (larger) field, e.g. GF(9)
    #[arg(long)]
    from: String,
    /// target (smaller) field, e.g. GF(3)
    #[arg(long)]
    to: String,
}

#[derive(Args)]
struct DiffArgs {
    /// generic-point element of the function field of the scheme
    expr: String,
    /// scheme: "A1(GF(5))" or "P1(GF(5))"
    #[arg(long)]
    scheme: String,
}

#[derive(Args)]
struct HomologyArgs {
    #[arg(long)]
    scheme: String,
    /// Rost-Schmid style twist: r meaning -T + r*A1, or "a1=..,t=.."
    #[arg(long, default_value = "0")]
    twist: String,
    #[arg(long)]
    p: i64,
    /// coefficients (only KMW in this build)
    #[arg(long, default_value = "KMW")]
    coeff: String,
    /// homological or cohomological indexing
    #[arg(long, default_value = "coh")]
    variance: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    rule: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "GF(5)(t)")]
    field: String,
}

#[derive(Args)]
struct GysinArgs {
    expr: String,
    /// divisor point: "t=0"-style equation, a polynomial, or "inf"
    #[arg(long)]
    divisor: String,
    #[arg(long)]
    scheme: String,
}

#[derive(Args)]
struct ProductArgs {
    /// product kind: "cross" or "intersect"
    kind: String,
    /// generic class on the line scheme
    expr: String,
    #[arg(long)]
    scheme: String,
    /// point class expression over a finite field, e.g. "<2> in KMW(GF(25),0)"
    #[arg(long)]
    with: String,
}

#[derive(Args)]
struct AdjointArgs {
    /// subcommand: "gamma-upper"
    what: String,
    #[arg(long)]
    field: String,
    #[arg(long)]
    degree: i64,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            if cli.json {
                println!(
                    "{}",
                    json!({"schema": 1, "ok": false, "error": msg.to_string()})
                );
            } else {
                eprintln!("error: {msg}");
            }
            2
        }
    };
    std::process::exit(code);
}

type AnyError = Box<dyn std::error::Error>;

fn parse_typed(src: &str) -> Result<(mwk_core::kmw::KmwTwisted, FieldDesc), AnyError> {
    let t = expr::Parser::new(src).typed_expr()?;
    let v = expr::eval_typed(&t)?;
    Ok((v, t.field))
}

fn parse_field(src: &str) -> Result<FieldDesc, AnyError> {
    let mut p = expr::Parser::new(src);
    let f = p.field_desc()?;
    p.finished()?;
    Ok(f)
}

fn parse_scheme(src: &str) -> Result<(Scheme, FieldDesc), AnyError> {
    let s = src.trim();
    let (kind, rest) = s
        .split_once('(')
        .ok_or("scheme syntax: Spec(GF(q)) | A1(GF(q)) | P1(GF(q))")?;
    let inner = rest.strip_suffix(')').ok_or("unbalanced parentheses in scheme")?;
    let field = parse_field(inner)?;
    let scheme = match kind.trim() {
        "Spec" => Scheme::spec(field),
        "A1" => Scheme::affine_line(field),
        "P1" => Scheme::proj_line(field),
        _ => return Err("unknown scheme kind (Spec, A1, P1)".into()),
    };
    Ok((scheme, field))
}

fn parse_scheme_twist(src: &str) -> Result<SchemeTwist, AnyError> {
    let s = src.trim();
    if let Some((a, t)) = s.split_once(',') {
        let a1: i64 = a.trim().trim_start_matches("a1=").parse()?;
        let tg: i64 = t.trim().trim_start_matches("t=").parse()?;
        return Ok(SchemeTwist { a1, tangent: tg });
    }
    // Rost-Schmid normalization: r means -T + r*A1
    let r: i64 = s.parse()?;
    Ok(SchemeTwist { a1: r, tangent: -1 })
}

fn run(cli: &Cli) -> Result<i32, AnyError> {
    match &cli.command {
        Cmd::Eval(a) => {
            let (v, _field) = parse_typed(&a.expr)?;
            match &a.equal {
                None => {
                    let zero = v.raw.is_zero()?;
                    if cli.json {
                        println!(
                            "{}",
                            json!({"schema": 1, "ok": true,
                                   "result": {"value": v.raw.render(), "is_zero": zero},
                                   "witnesses": []})
                        );
                    } else {
                        println!("{}", v.raw.render());
                        println!("is zero: {zero}");
                    }
                    Ok(0)
                }
                Some(rhs) => {
                    let (w, _) = parse_typed(rhs)?;
                    let eq = v.equal(&w)?;
                    if cli.json {
                        println!(
                            "{}",
                            json!({"schema": 1, "ok": true, "result": {"equal": eq},
                                   "witnesses": []})
                        );
                    } else {
                        println!("equal: {eq}");
                    }
                    Ok(if eq { 0 } else { 1 })
                }
            }
        }
        Cmd::Residue(a) => {
            let (v, field) = parse_typed(&a.expr)?;
            let place = expr::parse_place(&a.at, &field)?;
            let out = premodule::residue(&place, &premodule::MValue::kmw(v))?;
            let premodule::MValue::Kmw(res) = out else { unreachable!() };
            emit_element(cli, "residue", &res.raw)
        }
        Cmd::Specialize(a) => {
            let (v, field) = parse_typed(&a.expr)?;
            let place = expr::parse_place(&a.at, &field)?;
            let pi = match &a.pi {
                None => place.uniformizer(),
                Some(src) => {
                    let mut p = expr::Parser::new(src);
                    let fe = p.field_expr()?;
                    p.finished()?;
                    expr::eval_field_expr(&fe, &field)?
                }
            };
            let s = premodule::specialize_raw(&place, &pi, &v.raw)?;
            emit_element(cli, "specialization", &s)
        }
        Cmd::Transfer(a) => {
            let (v, field) = parse_typed(&a.expr)?;
            let from = parse_field(&a.from)?;
            let to = parse_field(&a.to)?;
            if field != from {
                return Err("expression field does not match --from".into());
            }
            let out = premodule::cores(
                &premodule::FieldMor::Embed { from: to, to: from },
                &premodule::MValue::kmw(v),
            )?;
            let premodule::MValue::Kmw(res) = out else { unreachable!() };
            emit_element(cli, "transfer", &res.raw)
        }
        Cmd::D(a) => {
            let (scheme, _) = parse_scheme(&a.scheme)?;
            let ff = scheme.components[0]
                .function_field()
                .ok_or("the differential needs a line")?;
            let t = expr::Parser::new(&a.expr).typed_expr()?;
            if t.field != ff {
                return Err(format!(
                    "expression must live over {}",
                    ff.to_string_desc()
                )
                .into());
            }
            let raw = expr::eval_expr(&t.expr, &ff)?;
            let twist = SchemeTwist::trivial(raw.degree - 1);
            let c = geom::generic_cycle(&scheme, twist, raw)?;
            let d = geom::differential(&c)?;
            let mut parts = vec![];
            for (pt, val) in &d.support {
                let name = match &pt.pt {
                    geom::Pt::Closed(cp) => match cp {
                        geom::ClosedPt::Inf => "inf".to_string(),
                        geom::ClosedPt::At(p) => p.render(),
                    },
                    _ => "?".into(),
                };
                parts.push((name, val.raw.render()));
            }
            if cli.json {
                let items: Vec<_> = parts
                    .iter()
                    .map(|(n, v)| json!({"place": n, "value": v}))
                    .collect();
                println!(
                    "{}",
                    json!({"schema": 1, "ok": true, "result": items, "witnesses": []})
                );
            } else {
                if parts.is_empty() {
                    println!("0");
                }
                for (n, v) in parts {
                    println!("at {n}: {v}");
                }
            }
            Ok(0)
        }
        Cmd::Homology(a) => {
            if a.coeff != "KMW" {
                return Err("only KMW coefficients are built in".into());
            }
            let (scheme, _) = parse_scheme(&a.scheme)?;
            let twist = parse_scheme_twist(&a.twist)?;
            let variance = match a.variance.as_str() {
                "coh" | "cohomological" => homology::Variance::Cohomological,
                "hom" | "homological" => homology::Variance::Homological,
                _ => return Err("variance must be hom or coh".into()),
            };
            let g = homology::compute(&scheme, twist, a.p, variance)?;
            let inv = mwk_core::abgroup::InvariantsJson::from(&g.group);
            let gens: Vec<String> = g
                .group
                .canonical_generators()
                .iter()
                .map(|(d, _)| d.clone())
                .collect();
            if cli.json {
                println!(
                    "{}",
                    json!({"schema": 1, "ok": true,
                           "result": {"invariant_factors": inv.invariant_factors,
                                       "free_rank": inv.free_rank,
                                       "generators": gens},
                           "witnesses": []})
                );
            } else {
                println!("invariant factors: {:?}", inv.invariant_factors);
                println!("free rank: {}", inv.free_rank);
                println!("generators: {}", gens.join(" (+) "));
            }
            Ok(0)
        }
        Cmd::Verify(a) => {
            let rule: verify::Rule = a.rule.parse()?;
            let field = {
                let mut p = expr::Parser::new(&a.field);
                let f = p.field_desc()?;
                p.finished()?;
                f
            };
            let cfg = verify::VerifyConfig { samples: a.samples, seed: a.seed, field };
            let report = verify::verify_rule(rule, &cfg);
            if cli.json {
                println!(
                    "{}",
                    json!({"schema": 1, "ok": report.passed(),
                           "result": {"rule": format!("{}", report.rule),
                                       "samples": report.samples,
                                       "failures": report.failures},
                           "witnesses": report.failures})
                );
            } else {
                println!(
                    "rule {}: {} ({} samples)",
                    report.rule,
                    if report.passed() { "pass" } else { "FAIL" },
                    report.samples
                );
                for f in &report.failures {
                    println!("  {f}");
                }
            }
            Ok(if report.passed() { 0 } else { 1 })
        }
        Cmd::Gysin(a) => {
            let (scheme, field) = parse_scheme(&a.scheme)?;
            let ff = scheme.components[0]
                .function_field()
                .ok_or("gysin needs a line")?;
            let divisor = parse_divisor(&a.divisor, &ff)?;
            let t = expr::Parser::new(&a.expr).typed_expr()?;
            let raw = expr::eval_expr(&t.expr, &ff)?;
            let c = geom::generic_cycle(&scheme, SchemeTwist::trivial(0), raw)?;
            let g = mwk_core::gysin_products::gysin_divisor(&scheme, &divisor, &c)?;
            let _ = field;
            let val = g
                .support
                .values()
                .next()
                .map(|v| v.raw.render())
                .unwrap_or_else(|| "0".into());
            if cli.json {
                println!(
                    "{}",
                    json!({"schema": 1, "ok": true, "result": {"value": val},
                           "witnesses": []})
                );
            } else {
                println!("{val}");
            }
            Ok(0)
        }
        Cmd::Product(a) => {
            let (scheme, _) = parse_scheme(&a.scheme)?;
            let ff = scheme.components[0]
                .function_field()
                .ok_or("products need a line scheme")?;
            let t = expr::Parser::new(&a.expr).typed_expr()?;
            let rho_raw = expr::eval_expr(&t.expr, &ff)?;
            let rho = geom::generic_cycle(&scheme, SchemeTwist::trivial(0), rho_raw)?;
            let (muv, mufield) = parse_typed(&a.with)?;
            let spec = Scheme::spec(mufield);
            let mu = geom::Cycle::single(
                spec,
                SchemeTwist::trivial(muv.raw.degree),
                geom::PointRef { component: 0, pt: geom::Pt::Spec },
                muv,
            )?;
            match a.kind.as_str() {
                "cross" => {
                    let prod =
                        mwk_core::gysin_products::cross_line_with_points(&rho, &mu)?;
                    let mut out = vec![];
                    for (k, c) in &prod.fibers {
                        for (pt, v) in &c.support {
                            out.push(json!({
                                "over": k.to_string_desc(),
                                "point": format!("{:?}", pt.pt),
                                "value": v.raw.render(),
                            }));
                        }
                    }
                    if cli.json {
                        println!(
                            "{}",
                            json!({"schema": 1, "ok": true, "result": out,
                                   "witnesses": []})
                        );
                    } else {
                        for o in out {
                            println!("{o}");
                        }
                    }
                    Ok(0)
                }
                _ => Err("product kind must be cross".into()),
            }
        }
        Cmd::Adjoint(a) => {
            if a.what != "gamma-upper" {
                return Err("supported: adjoint gamma-upper".into());
            }
            let field = parse_field(&a.field)?;
            let (g, _) = mwk_core::adjunction::gamma_upper_group(field, a.degree);
            let inv = mwk_core::abgroup::InvariantsJson::from(&g);
            if cli.json {
                println!(
                    "{}",
                    json!({"schema": 1, "ok": true,
                           "result": {"invariant_factors": inv.invariant_factors,
                                       "free_rank": inv.free_rank},
                           "witnesses": []})
                );
            } else {
                println!(
                    "invariant factors: {:?}, free rank: {}",
                    inv.invariant_factors, inv.free_rank
                );
            }
            Ok(0)
        }
    }
}

fn parse_divisor(src: &str, ff: &FieldDesc) -> Result<geom::ClosedPt, AnyError> {
    let s = src.trim();
    if s == "inf" {
        return Ok(geom::ClosedPt::Inf);
    }
    // accept "t=a" as shorthand for the place at t - a
    if let Some((lhs, rhs)) = s.split_once('=') {
        if lhs.trim() == "t" {
            let mut p = expr::Parser::new(rhs.trim());
            let fe = p.field_expr()?;
            p.finished()?;
            let a = expr::eval_field_expr(&fe, ff)?;
            let pt = ff.gen_t().sub(&a);
            let place = expr::parse_place(&pt.render(), ff)?;
            return Ok(geom::ClosedPt::At(place));
        }
        return Err("divisor syntax: t=a, a polynomial, or inf".into());
    }
    Ok(geom::ClosedPt::At(expr::parse_place(s, ff)?))
}

fn emit_element(cli: &Cli, label: &str, x: &KmwElem) -> Result<i32, AnyError> {
    let zero = x.is_zero()?;
    if cli.json {
        println!(
            "{}",
            json!({"schema": 1, "ok": true,
                   "result": {label: x.render(), "is_zero": zero},
                   "witnesses": []})
        );
    } else {
        println!("{}", x.render());
    }
    Ok(0)
}
