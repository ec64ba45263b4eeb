use emeasure::certify::{self, GrowthReport, LinearForm};
use emeasure::factor::{self, check_column_exponents, extract_common_factor};
use emeasure::hermite_pade::{build_system, determinant_shape};
use emeasure::measure::{self, SparseBound};
use emeasure::{BallReal, Error, Result};
use rug::Integer;
use serde_json::{json, Value};

use crate::report::{ball_json, Report};
use crate::ML;

type Outcome = Result<(Report, u8)>;

fn ok(report: Report) -> Outcome {
    Ok((report, 0))
}

fn parse_ball(s: &str, what: &str, prec: u32) -> Result<BallReal> {
    BallReal::parse_decimal(s, prec).map_err(|e| Error::Precondition(format!("{what}: {e}")))
}

pub fn approx(a: &ML) -> Outcome {
    let system = build_system(a.m, a.l)?;
    let mut polys = Vec::new();
    let mut rows = Vec::new();
    for k in 0..=a.m {
        let mut row = Vec::new();
        for j in 0..=a.m {
            let p = system.poly(k, j);
            row.push(json!({ "degree": p.degree(), "coefficients": p.to_decimal_strings() }));
            for (i, c) in p.coeffs().iter().enumerate() {
                rows.push(vec![k.to_string(), j.to_string(), i.to_string(), c.to_string()]);
            }
        }
        polys.push(Value::Array(row));
    }
    let json = json!({ "m": a.m, "l": a.l, "big_l": system.big_l(), "polys": polys });
    ok(Report::new(json, &["k", "j", "power", "coefficient"], rows))
}

pub fn det(a: &ML) -> Outcome {
    let (c, e) = determinant_shape(a.m, a.l)?;
    let json = json!({ "m": a.m, "l": a.l, "coefficient": c.to_string(), "exponent": e });
    ok(Report::single(
        json,
        vec![("m", a.m.to_string()), ("l", a.l.to_string()), ("coefficient", c.to_string()), ("exponent", e.to_string())],
    ))
}

pub fn factor(a: &ML) -> Outcome {
    let mut system = build_system(a.m, a.l)?;
    check_column_exponents(&system)?;
    let cf = extract_common_factor(&mut system)?;
    let rows = cf
        .nu_exact
        .iter()
        .map(|(p, e)| vec![p.to_string(), e.to_string(), cf.nu_lower[p].to_string()])
        .collect();
    let json = serde_json::to_value(&cf).expect("plain report");
    ok(Report::new(json, &["p", "nu_exact", "nu_lower"], rows))
}

pub fn kappa(m: Option<u32>, limit: bool, tol: f64, prec: u32) -> Outcome {
    if limit {
        let k = factor::kappa_limit_detailed(tol)?;
        let json = json!({
            "kappa": ball_json(&k.enclosure),
            "cutoff": k.cutoff,
            "method": k.method,
        });
        let pairs = vec![
            ("kappa", k.enclosure.to_string()),
            ("cutoff", k.cutoff.to_string()),
            ("method", json["method"].as_str().unwrap_or_default().to_string()),
        ];
        return ok(Report::single(json, pairs));
    }
    let m = m.expect("clap requires --m without --limit");
    let k = factor::kappa_m_prec(m, prec)?;
    let terms: Vec<Value> = k
        .terms
        .iter()
        .map(|t| json!({ "p": t.p, "min_floor_sum": t.min_floor_sum, "w": ball_json(&t.w) }))
        .collect();
    let json = json!({ "m": m, "kappa": ball_json(&k.value), "terms": terms });
    ok(Report::single(json, vec![("m", m.to_string()), ("kappa", k.value.to_string()), ("kappa_lower", k.value.lo_string(12))]))
}

pub fn kappa_table(m_max: u32) -> Outcome {
    let rows = factor::kappa_table(m_max)?;
    let mut table = Vec::new();
    let mut json_rows = Vec::new();
    for r in &rows {
        let lower = r.kappa.lo_string(10);
        let margin = format!("{:.3e}", r.margin());
        table.push(vec![r.m.to_string(), lower.clone(), format!("{:.6}", r.published), margin.clone()]);
        json_rows.push(json!({ "m": r.m, "kappa_lower": lower, "paper_value": r.published, "margin": margin }));
    }
    ok(Report::new(Value::Array(json_rows), &["m", "kappa_lower", "paper_value", "margin"], table))
}

pub fn fm_table() -> Outcome {
    let rows = measure::fm_table(5, 14)?;
    let mut table = Vec::new();
    let mut json_rows = Vec::new();
    for r in &rows {
        let f = r.f.lo_string(10);
        let p = r.product.lo_string(10);
        let matches = r.matches_published();
        table.push(vec![
            r.m.to_string(),
            f.clone(),
            p.clone(),
            format!("{:.4}", r.published_f),
            format!("{:.4}", r.published_product),
            matches.to_string(),
        ]);
        json_rows.push(json!({
            "m": r.m, "f": f, "product": p,
            "published_f": r.published_f, "published_product": r.published_product, "matches": matches,
        }));
    }
    let status = if rows.iter().all(|r| r.matches_published()) { 0 } else { 3 };
    let headers = ["m", "f", "product", "published_f", "published_product", "matches"];
    Ok((Report::new(Value::Array(json_rows), &headers, table), status))
}

pub fn bound(m: u32, log_h: &str, prec: u32) -> Outcome {
    let log_h = parse_ball(log_h, "logH", prec)?;
    let params = measure::params_for_e_prec(m, prec)?;
    let g = measure::generic_lower_bound(&params, &log_h)?;
    let c = measure::corollary_bound(&params, &log_h)?;
    let json = json!({
        "m": m,
        "logH": log_h.to_string(),
        "epsilon": ball_json(&g.epsilon),
        "exponent": ball_json(&g.exponent),
        "prefactor": ball_json(&g.prefactor),
        "log_bound": ball_json(&g.log_bound),
        "corollary_exponent": ball_json(&c.exponent),
        "corollary_log_bound": ball_json(&c.log_bound),
    });
    ok(Report::single(
        json,
        vec![
            ("m", m.to_string()),
            ("epsilon", g.epsilon.to_string()),
            ("exponent", g.exponent.to_string()),
            ("log_bound_lo", g.log_bound.lo_string(15)),
            ("corollary_exponent", c.exponent.to_string()),
            ("corollary_log_bound_lo", c.log_bound.lo_string(15)),
        ],
    ))
}

pub fn omega(m: u32, loglog_h: &str, prec: u32) -> Outcome {
    let ll = parse_ball(loglog_h, "loglogH", prec)?;
    let w = measure::omega_upper(m, &ll)?;
    let c = measure::omega_coefficient(m, prec)?;
    let json = json!({ "m": m, "loglogH": ll.to_string(), "omega": ball_json(&w), "coefficient": ball_json(&c) });
    ok(Report::single(
        json,
        vec![("m", m.to_string()), ("omega", w.to_string()), ("omega_hi", w.hi_string(12)), ("coefficient", c.to_string())],
    ))
}

fn sparse_report(b: &SparseBound) -> Report {
    let json = json!({
        "m1": b.m1,
        "m2": b.m2,
        "rho": b.rho,
        "exponent": ball_json(&b.exponent),
        "generic_exponent": b.generic.as_ref().map(|g| ball_json(&g.exponent)),
    });
    let generic = b.generic.as_ref().map(|g| g.exponent.to_string()).unwrap_or_default();
    Report::single(
        json,
        vec![
            ("m1", b.m1.to_string()),
            ("m2", b.m2.to_string()),
            ("rho", b.rho.to_string()),
            ("exponent", b.exponent.to_string()),
            ("generic_exponent", generic),
        ],
    )
}

pub fn sparse(m1: u32, m2: u32, loglog_h: &str, prec: u32) -> Outcome {
    let ll = parse_ball(loglog_h, "loglogH", prec)?;
    ok(sparse_report(&measure::sparse_bound(m1, m2, &ll)?))
}

pub fn power(dexp: u32, m: u32, loglog_h: &str, prec: u32) -> Outcome {
    let ll = parse_ball(loglog_h, "loglogH", prec)?;
    ok(sparse_report(&measure::power_measure(dexp, m, &ll)?))
}

fn parse_lambda(s: &str) -> Result<LinearForm> {
    let lambda = s
        .split(',')
        .map(|x| {
            Integer::from_str_radix(x.trim(), 10).map_err(|e| Error::Precondition(format!("lambda entry {x:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    LinearForm::new(lambda)
}

pub fn verify(lambda: &str, log_h: &str, prec: u32) -> Outcome {
    let form = parse_lambda(lambda)?;
    let log_h = parse_ball(log_h, "logH", prec)?;
    let cert = certify::verify_measure(&form, &log_h)?;
    let rec = cert.record();
    let json = serde_json::to_value(&rec).expect("plain record");
    let status = if cert.passed { 0 } else { 3 };
    let report = Report::single(
        json,
        vec![
            ("lambda", rec.lambda.join(",")),
            ("m", rec.m.to_string()),
            ("logH", rec.log_h.clone()),
            ("value_lo", rec.value_lo.clone()),
            ("value_hi", rec.value_hi.clone()),
            ("bound_hi", rec.bound_hi.clone()),
            ("passed", rec.passed.to_string()),
            ("bits", rec.bits.to_string()),
        ],
    );
    Ok((report, status))
}

fn growth_rows(kind: &str, r: &GrowthReport, out: &mut Vec<Vec<String>>) {
    for row in &r.rows {
        out.push(vec![
            kind.to_string(),
            row.k.to_string(),
            format!("{:.6}", row.log_value_hi),
            format!("{:.6}", row.log_bound_lo),
            format!("{:.4e}", row.ratio()),
        ]);
    }
}

pub fn qr_check(m: usize, l: u32, heavy: bool) -> Outcome {
    let (q, r) = certify::check_qr(m, l, heavy)?;
    let mut rows = Vec::new();
    growth_rows("Q", &q, &mut rows);
    growth_rows("R", &r, &mut rows);
    let json = json!({
        "m": m,
        "l": l,
        "q": serde_json::to_value(&q).expect("plain report"),
        "r": serde_json::to_value(&r).expect("plain report"),
        "passed": true,
    });
    ok(Report::new(json, &["check", "k", "log_value_hi", "log_bound_lo", "ratio"], rows))
}

pub fn search(m: usize, bx: u32) -> Outcome {
    let r = certify::empirical_min_search(m, bx)?;
    let lambda: Vec<String> = r.form.lambda().iter().map(|x| x.to_string()).collect();
    let json = json!({
        "m": m,
        "box": bx,
        "lambda": lambda,
        "value": ball_json(&r.value),
        "candidates": r.candidates,
    });
    ok(Report::single(
        json,
        vec![
            ("m", m.to_string()),
            ("box", bx.to_string()),
            ("lambda", lambda.join(",")),
            ("value", r.value.to_string()),
        ],
    ))
}
