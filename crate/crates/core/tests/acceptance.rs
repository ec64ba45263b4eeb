use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

use emeasure::certify::{check_qr, e_convergents, empirical_min_search, verify_measure, LinearForm};
use emeasure::factor::{extract_common_factor, kappa_limit, kappa_table, KAPPA_LIMIT_DECIMAL};
use emeasure::hermite_pade::{build_a0, build_aj, build_system, determinant_shape, MultiIndex};
use emeasure::measure::{
    fm_table, implied_omega, loglog_threshold, omega_upper, params_for_e, z_inverse, z_iterates,
    z_upper_bound,
};
use emeasure::numtheory::{vp_big, vp_factorial, vp_factorial_bounds};
use emeasure::{BallReal, Result};

fn ball(x: f64) -> BallReal {
    BallReal::from_rational(&Rational::from_f64(x).unwrap(), 128)
}

/// Runs one criterion, prints a single PASS/FAIL line and returns the verdict.
fn run(id: u32, title: &str, limit: Duration, check: impl FnOnce() -> Result<String>) -> bool {
    let start = Instant::now();
    let outcome = check();
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took {took:.2?}, limit {limit:?}")),
        Err(e) => (false, e.to_string()),
    };
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("{tag} {id:>2} {title}: {detail} [{took:.2?}]");
    ok
}

fn fail(msg: String) -> emeasure::Error {
    emeasure::Error::Consistency(msg)
}

fn c1() -> Result<String> {
    let rows = kappa_table(14)?;
    let mut worst = f64::INFINITY;
    for r in &rows {
        // one-sided: the certified lower end must reach the published value up to 1e-6
        if r.margin() < -1e-6 {
            return Err(fail(format!("m = {}: κ = {} below {}", r.m, r.kappa, r.published)));
        }
        worst = worst.min(r.margin());
    }
    Ok(format!("{} rows, smallest margin {worst:.3e}", rows.len()))
}

fn c2() -> Result<String> {
    let k = kappa_limit(1e-9)?;
    let target = BallReal::parse_decimal(KAPPA_LIMIT_DECIMAL, 128)?;
    if !k.contains_ball(&target) {
        return Err(fail(format!("{k} does not contain {KAPPA_LIMIT_DECIMAL}")));
    }
    Ok(format!("κ ∈ {k}, width {:.2e}", k.width().to_f64()))
}

fn c3() -> Result<String> {
    let rows = fm_table(5, 14)?;
    for r in &rows {
        if !r.matches_published() {
            return Err(fail(format!("m = {}: f = {}, product = {}", r.m, r.f, r.product)));
        }
        if !r.f.certainly_le(&r.product) {
            return Err(fail(format!("m = {}: f(m) not below the product", r.m)));
        }
    }
    Ok(format!("{} rows to 4 decimals, f(m) ≤ product throughout", rows.len()))
}

fn c4() -> Result<String> {
    let mut cells = 0;
    for m in 1..=3usize {
        for l in 2..=8u32 {
            let system = build_system(m, l)?;
            let need = (m + 1) * l as usize;
            for k in 0..=m {
                for j in 0..=m {
                    let deg = system.poly(k, j).degree().map(|d| d as u64);
                    if deg != Some(system.expected_degree(k, j)) {
                        return Err(fail(format!("m={m} l={l} k={k} j={j}: degree {deg:?}")));
                    }
                    if j == 0 {
                        continue;
                    }
                    let series = system.remainder(k, j, need + 4)?;
                    if series.coefficients()[..need].iter().any(|c| *c != 0) {
                        return Err(fail(format!("m={m} l={l} k={k} j={j}: low coefficient nonzero")));
                    }
                    match series.order_of_vanishing() {
                        Some(o) if o >= need => {}
                        o => return Err(fail(format!("m={m} l={l} k={k} j={j}: vanishing order {o:?}"))),
                    }
                    cells += 1;
                }
            }
        }
    }
    Ok(format!("{cells} remainder series and all degree contracts checked"))
}

/// Integrality via an independent rational route: `A*/(l-1)!` must be integral
/// and equal the normalized system (up to the sign of columns `j ≥ 1`).
fn integral_and_divisible(m: usize, l: u32) -> Result<()> {
    let mut system = build_system(m, l)?;
    let alpha: Vec<i64> = (0..=m as i64).collect();
    let fact = Integer::from(Integer::factorial(l - 1));
    for k in 0..=m {
        let lbar = MultiIndex::for_row(m, l, k)?;
        for j in 0..=m {
            let raw = if j == 0 { build_a0(&lbar, &alpha)? } else { build_aj(&lbar, &alpha, j)? };
            let target = system.poly(k, j);
            for (i, c) in raw.coeffs().iter().enumerate() {
                let q = Rational::from((c.clone(), fact.clone()));
                if !q.is_integer() {
                    return Err(fail(format!("m={m} l={l} k={k} j={j}: coefficient {i} not integral")));
                }
                let mut v = q.numer().clone();
                if j > 0 {
                    v = -v;
                }
                if v != target.coeff(i) {
                    return Err(fail(format!("m={m} l={l} k={k} j={j}: coefficient {i} mismatch")));
                }
            }
        }
    }
    let cf = extract_common_factor(&mut system.clone())?;
    for p in system.iter_polys() {
        if !p.is_divisible_by(&cf.d_lower) {
            return Err(fail(format!("m={m} l={l}: a coefficient is not divisible by D_lower")));
        }
    }
    let _ = extract_common_factor(&mut system)?;
    Ok(())
}

fn c5() -> Result<String> {
    for m in 1..=3usize {
        for l in 2..=8u32 {
            integral_and_divisible(m, l)?;
        }
    }
    let mut system = build_system(3, 38)?;
    let cf = extract_common_factor(&mut system)?;
    let nu2 = cf.nu_exact.get(&2).copied().unwrap_or(0);
    if nu2 < 34 {
        return Err(fail(format!("m=3, l=38: ν_2 = {nu2} < 34")));
    }
    Ok(format!("m ≤ 3, l ≤ 8 integral and divisible; m=3, l=38: ν_2 = {nu2} (lower {})", cf.nu_lower[&2]))
}

fn c6() -> Result<String> {
    let mut out = Vec::new();
    for (m, l) in [(1usize, 2u32), (1, 3), (2, 2), (2, 3), (3, 2)] {
        let (c, e) = determinant_shape(m, l)?;
        if c == 0 || e != (m * (m + 1)) as u64 * l as u64 {
            return Err(fail(format!("m={m} l={l}: c = {c}, exponent {e}")));
        }
        out.push(format!("({m},{l})→t^{e}"));
    }
    Ok(out.join(" "))
}

fn c7() -> Result<String> {
    let mut worst_q: f64 = 0.0;
    let mut worst_r: f64 = 0.0;
    let mut count = 0;
    for (m, ls) in [(2usize, 16..=40u32), (3, 38..=50)] {
        for l in ls {
            let (q, r) = check_qr(m, l, false)?;
            worst_q = worst_q.max(q.max_ratio);
            worst_r = worst_r.max(r.max_ratio);
            count += 1;
        }
    }
    Ok(format!("{count} (m,l) pairs; max |B|/Q = {worst_q:.3e}, max Σ|L|/R = {worst_r:.3e}"))
}

fn c8() -> Result<String> {
    for k in 1..=12 {
        let y = BallReal::from_u64(10u64.pow(k), 128);
        let tol = 1e-15;
        let z = z_inverse(&y, tol)?;
        // |z log z - y| ≤ (log z + 1)·width for z within the enclosure
        let resid = (&(&z * &z.ln()) - &y).abs();
        let allowed = (z.ln().to_f64() + 1.0) * tol;
        if resid.hi().to_f64() > allowed {
            return Err(fail(format!("y = 1e{k}: residual {resid}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let e = std::f64::consts::E;
    for _ in 0..50 {
        let y = ball(rng.gen_range(e + 0.1..1e6));
        let it = z_iterates(&y, 4)?;
        let ordered = it[1].certainly_lt(&it[3]) && it[3].certainly_lt(&it[2]) && it[2].certainly_lt(&it[0]);
        let z = z_inverse(&y, 1e-12)?;
        if !ordered || !(it[3].certainly_le(&z) || it[3].hi() <= z.hi()) || !z.certainly_le(&it[2]) {
            return Err(fail(format!("bracketing fails at y = {y}")));
        }
    }
    let mut points = 0;
    for s in [BallReal::e(128), ball(3.0), ball(4.5), ball(7.0)] {
        let base = &s * &s.exp();
        for f in [1.0, 1.5, 10.0, 1e3, 1e6] {
            let y = &base * &ball(f);
            let z = z_inverse(&y, 1e-9)?;
            let ub = z_upper_bound(&y, &s)?;
            if ub.hi() < z.lo() || !(ub.lo() >= z.lo()) {
                return Err(fail(format!("upper bound {ub} below z = {z} at y = {y}")));
            }
            points += 1;
        }
    }
    Ok(format!("12 residuals, 50 brackets, {points} upper-bound points"))
}

fn c9() -> Result<String> {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for m in 2..=4u32 {
        let params = params_for_e(m)?;
        let start = loglog_threshold(m, 128)?.to_f64().ceil();
        for step in 0..12 {
            let ll = ball(start + step as f64 * 2.5);
            let implied = implied_omega(&params, &ll.exp())?;
            let bound = omega_upper(m, &ll)?;
            if !implied.certainly_le(&bound) {
                return Err(fail(format!("m={m}, loglogH = {ll}: implied {implied} > {bound}")));
            }
            let excess = |x: &BallReal| x.to_f64() - m as f64;
            worst = worst.max(excess(&implied) / excess(&bound));
            points += 1;
        }
    }
    Ok(format!("{points} grid points; largest (implied − m)/(bound − m) = {worst:.3}"))
}

fn c10() -> Result<String> {
    let log_h = BallReal::from_u64(45, 128);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut passed = 0;
    for _ in 0..100 {
        let mut lam: Vec<Integer> = (0..3)
            .map(|_| {
                let bits = rng.gen_range(1..=64u32);
                let mag: u64 = rng.gen::<u64>() >> (64 - bits);
                let v = Integer::from(mag);
                if rng.gen() { -v } else { v }
            })
            .collect();
        if lam.iter().all(|x| *x == 0) {
            lam[2] = Integer::from(1);
        }
        let cert = verify_measure(&LinearForm::new(lam)?, &log_h)?;
        if !cert.passed {
            return Err(fail(format!("random form failed: {:?}", cert.record())));
        }
        passed += 1;
    }
    let q_max = BallReal::from_u64(45, 128).exp().floor_lo();
    let convergents = e_convergents(&q_max);
    for (p, q) in &convergents {
        for lam in [vec![-p.clone(), q.clone(), Integer::new()], vec![Integer::new(), -p.clone(), q.clone()]] {
            let cert = verify_measure(&LinearForm::new(lam)?, &log_h)?;
            if !cert.passed {
                return Err(fail(format!("convergent {p}/{q} failed")));
            }
            passed += 1;
        }
    }
    let r = empirical_min_search(1, 10)?;
    let expect = LinearForm::from_i64s(&[-19, 7])?;
    if r.form != expect || (r.value.to_f64() - 0.0279).abs() > 1e-4 {
        return Err(fail(format!("min search gave {:?} = {}", r.form.lambda(), r.value)));
    }
    Ok(format!("{passed} certificates passed ({} convergents); box 10 minimum |7e − 19| = {}", convergents.len(), r.value))
}

fn c11() -> Result<String> {
    let primes: Vec<u64> = (2..=50u64).filter(|&p| (2..p).all(|d| p % d != 0)).collect();
    let mut fact = Integer::from(1);
    let mut checks = 0;
    for n in 1..=300u64 {
        fact *= n;
        for &p in &primes {
            let direct = vp_big(&fact, p)? as u64;
            let legendre = vp_factorial(n, p)?;
            if direct != legendre {
                return Err(fail(format!("v_{p}({n}!) = {direct}, Legendre gives {legendre}")));
            }
            if n >= 2 && !vp_factorial_bounds(n, p, 128)?.sandwiches(direct) {
                return Err(fail(format!("bounds do not sandwich v_{p}({n}!) = {direct}")));
            }
            checks += 1;
        }
    }
    Ok(format!("{checks} valuations agree and are sandwiched"))
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        run(1, "kappa table", s(1), c1),
        run(2, "kappa limit", s(30), c2),
        run(3, "f(m) table", s(1), c3),
        run(4, "Pade identities", s(30), c4),
        run(5, "integrality and divisibility", s(120), c5),
        run(6, "determinant shape", s(60), c6),
        run(7, "growth inequalities", s(300), c7),
        run(8, "z machinery", s(1), c8),
        run(9, "internal dominance", s(10), c9),
        run(10, "measure verification", s(60), c10),
        run(11, "valuation oracle", s(10), c11),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
