//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use mpf_core::bch::{compute_phi, extensiveness_bound, verify_truncation, BchOptions, TruncationProbe};
use mpf_core::bounds::{
    bch_time_step, check_step_count, log_ratio, log_ratio_threshold, mpf_error_bound, mu_lemma_bound, select_m,
    trotter_number, truncation_order, CostInputs,
};
use mpf_core::commutators::{
    alpha_com, inserted_operator_check, mu_truncated, CommutatorTable, MuSearch, DEFAULT_NESTED_BUDGET,
};
use mpf_core::dense::{log_series_fit, DenseOperator};
use mpf_core::fit::{geometric_grid, linear_fit, loglog_fit, NOISE_FLOOR};
use mpf_core::hamiltonian::{g_scaling_report, heisenberg_chain, long_range_chain, Regime};
use mpf_core::mpf::{MpfEvaluator, MpfSpec};
use mpf_core::trotter::{ProductFormulaPlan, TrotterEvaluator};
use mpf_core::{HamiltonianSpec, NormConfig, Pauli, PauliString, PauliSum};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn chain4() -> HamiltonianSpec {
    heisenberg_chain(4, 1.0, 0.0, true).expect("heisenberg chain")
}

// Dense matrices built directly from 2x2 factors, independent of the library.
fn pauli_2x2(c: char) -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match c {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => unreachable!(),
    }
}

fn label_matrix(label: &str) -> DMatrix<Complex64> {
    label
        .chars()
        .fold(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), |acc, c| acc.kronecker(&pauli_2x2(c)))
}

fn sum_matrix(s: &PauliSum) -> DMatrix<Complex64> {
    let dim = 1usize << s.n_sites();
    let mut out = DMatrix::zeros(dim, dim);
    for (p, c) in s.iter() {
        out += label_matrix(&p.label(s.n_sites())) * *c;
    }
    out
}

fn all_labels(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|pre| "IXYZ".chars().map(move |c| format!("{pre}{c}")))
            .collect();
    }
    out
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn pauli_oracle() -> Outcome {
    let mut worst = 0.0_f64;
    let mut pairs = 0usize;
    for n in 1..=3 {
        let labels = all_labels(n);
        let mats: Vec<_> = labels.iter().map(|l| label_matrix(l)).collect();
        let strings: Vec<_> = labels.iter().map(|l| PauliString::from_label(l).unwrap()).collect();
        for (a, (sa, ma)) in strings.iter().zip(&mats).enumerate() {
            for (b, (sb, mb)) in strings.iter().zip(&mats).enumerate() {
                let (k, prod) = sa.mul(sb);
                let phase = Complex64::new(0.0, 1.0).powu(k as u32);
                let expected = ma * mb;
                worst = worst.max(max_entry(&(label_matrix(&prod.label(n)) * phase - &expected)));

                let pa = PauliSum::from_labels(&[(labels[a].as_str(), 1.0)]).unwrap();
                let pb = PauliSum::from_labels(&[(labels[b].as_str(), 1.0)]).unwrap();
                let comm = pa.commutator(&pb).unwrap();
                let dense_comm = &expected - mb * ma;
                worst = worst.max(max_entry(&(sum_matrix(&comm) - &dense_comm)));
                let prod_sum = pa.multiply(&pb).unwrap();
                worst = worst.max(max_entry(&(sum_matrix(&prod_sum) - &expected)));
                if sa.commutes_with(sb) != (max_entry(&dense_comm) == 0.0) {
                    worst = f64::INFINITY;
                }
                pairs += 1;
            }
        }
    }
    ensure(worst <= 1e-12, format!("{pairs} string pairs, max deviation {worst:.1e}"))
}

fn trotter_order() -> Outcome {
    let ham = chain4();
    let grid = geometric_grid(1e-2, 3e-1, 12);
    let mut details = Vec::new();
    let mut ok = true;
    for p in [1usize, 2, 4] {
        let plan = ProductFormulaPlan::for_spec(&ham, p).map_err(|e| e.to_string())?;
        let ev = TrotterEvaluator::new(&plan, &ham, 12).map_err(|e| e.to_string())?;
        let alpha = alpha_com(&ham, p + 1, NormConfig::default(), DEFAULT_NESTED_BUDGET).map_err(|e| e.to_string())?;
        let errs: Vec<f64> = grid.iter().map(|&t| ev.trotter_error(t)).collect();
        let fit = loglog_fit(&grid, &errs, NOISE_FLOOR).ok_or("no points above noise floor")?;
        // envelope constant from the small-step half of the grid
        let ratio = |i: usize| errs[i] / (alpha * grid[i].powi(p as i32 + 1));
        let c = (0..grid.len() / 2).map(ratio).fold(0.0, f64::max);
        let bound_ok = (0..grid.len()).all(|i| errs[i] <= c * alpha * grid[i].powi(p as i32 + 1) * (1.0 + 1e-12));
        ok &= fit.slope >= p as f64 + 0.8 && bound_ok;
        details.push(format!("p={p} slope {:.3} C {:.3e} bound {}", fit.slope, c, if bound_ok { "ok" } else { "violated" }));
    }
    ensure(ok, details.join("; "))
}

fn commutator_bounds() -> Outcome {
    let mut checks = 0usize;
    let mut violations = Vec::new();
    for n in 3..=6 {
        let families = [
            ("open", heisenberg_chain(n, 1.0, 0.5, true)),
            ("periodic", heisenberg_chain(n, 1.0, 0.5, false)),
            ("decay", long_range_chain(n, 1.5, 1.0)),
        ];
        for (name, spec) in families {
            let spec = spec.map_err(|e| e.to_string())?;
            let table = CommutatorTable::build(&spec, 2..=5, NormConfig::default(), DEFAULT_NESTED_BUDGET)
                .map_err(|e| e.to_string())?;
            let exact = table.alpha_exact.as_ref().ok_or("missing exact values")?;
            for q in 2..=5 {
                let e = exact[&q];
                let tol = 1.0 + 1e-12;
                if e > table.factorial_bound[&q] * tol || e > table.one_norm_power_bound[&q] * tol {
                    violations.push(format!("{name} n={n} q={q}"));
                }
                checks += 2;
            }
            if !table.violations().is_empty() {
                violations.push(format!("{name} n={n} table"));
            }
            let mut o = PauliSum::zero(n);
            o.add_term(PauliString::from_sparse(n, &[(0, Pauli::X), (1, Pauli::X)]), Complex64::new(1.0, 0.0));
            o.add_term(PauliString::from_sparse(n, &[(1, Pauli::Z), (2, Pauli::Y)]), Complex64::new(0.5, 0.0));
            for q in 1..=4 {
                let rows = inserted_operator_check(&spec, &o, q, NormConfig::default(), DEFAULT_NESTED_BUDGET)
                    .map_err(|e| e.to_string())?;
                for r in rows {
                    checks += 1;
                    if !r.holds {
                        violations.push(format!("{name} n={n} q={q} insertion {}", r.position));
                    }
                }
            }
        }
    }
    ensure(
        violations.is_empty(),
        format!("{checks} inequalities checked, {} violations {:?}", violations.len(), violations),
    )
}

fn random_two_qubit_spec(rng: &mut StdRng) -> HamiltonianSpec {
    let labels = all_labels(2);
    let group = |rng: &mut StdRng| {
        let mut g = PauliSum::zero(2);
        for _ in 0..3 {
            let l = &labels[rng.random_range(1..labels.len())];
            g.add_term(PauliString::from_label(l).unwrap(), Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        }
        g
    };
    loop {
        let a = group(rng);
        let b = group(rng);
        if !a.is_empty() && !b.is_empty() {
            return HamiltonianSpec::from_groups(vec![a, b]).unwrap();
        }
    }
}

fn bch_coefficients() -> Outcome {
    let ham = chain4();
    let opts = BchOptions::default();
    let mut problems = Vec::new();
    let mut worst_ratio = 0.0_f64;
    for p in [1usize, 2, 4] {
        let plan = ProductFormulaPlan::for_spec(&ham, p).map_err(|e| e.to_string())?;
        let cp = plan.repetition_count();
        for q in 2..=6 {
            let c = compute_phi(&plan, &ham, q, &opts).map_err(|e| e.to_string())?;
            let norm = c.norm_exact.ok_or("missing exact norm")?;
            if q <= p && c.norm_one > 1e-10 {
                problems.push(format!("p={p} q={q} nonzero below order"));
            }
            if c.hermiticity_defect > 1e-10 {
                problems.push(format!("p={p} q={q} not Hermitian"));
            }
            if norm > c.norm_bound * (1.0 + 1e-12) {
                problems.push(format!("p={p} q={q} norm {norm:.4e} > {:.4e}", c.norm_bound));
            }
            if c.norm_bound > 0.0 {
                worst_ratio = worst_ratio.max(norm / c.norm_bound);
            }
            if c.locality > q * ham.locality() {
                problems.push(format!("p={p} q={q} locality {}", c.locality));
            }
            let ext = extensiveness_bound(q, cp, ham.locality(), ham.extensiveness());
            if c.extensiveness > ext * (1.0 + 1e-12) {
                problems.push(format!("p={p} q={q} extensiveness {:.4e} > {ext:.4e}", c.extensiveness));
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(20_240_517);
    let mut worst_fit = 0.0_f64;
    let h = 0.05;
    let degree = 10;
    for _ in 0..6 {
        let spec = random_two_qubit_spec(&mut rng);
        for p in [1usize, 2] {
            let plan = ProductFormulaPlan::for_spec(&spec, p).map_err(|e| e.to_string())?;
            let ev = TrotterEvaluator::new(&plan, &spec, 12).map_err(|e| e.to_string())?;
            let samples: Vec<(f64, DenseOperator)> = (1..=12)
                .flat_map(|i| {
                    let t = h * i as f64 / 12.0;
                    [(t, ev.evaluate(t)), (-t, ev.evaluate(-t))]
                })
                .collect();
            let fitted = log_series_fit(&samples, degree).map_err(|e| e.to_string())?;
            for q in 2..=4 {
                let phi = mpf_core::bch::phi_operator(&plan, &spec, q).map_err(|e| e.to_string())?;
                let dev = fitted[q - 1].sub(&phi).map_err(|e| e.to_string())?.max_abs_coeff();
                worst_fit = worst_fit.max(dev);
            }
        }
    }
    if worst_fit > 1e-6 {
        problems.push(format!("log-series oracle deviation {worst_fit:.2e}"));
    }
    ensure(
        problems.is_empty(),
        format!(
            "max norm/bound {worst_ratio:.3}, log-series oracle deviation {worst_fit:.1e}{}",
            if problems.is_empty() { String::new() } else { format!(", {problems:?}") }
        ),
    )
}

fn truncation_accuracy() -> Outcome {
    let ham = chain4();
    let eps = 0.3;
    let p0 = truncation_order(ham.n_sites() as f64, eps).map_err(|e| e.to_string())?;
    if p0 != 4 {
        return Err(format!("epsilon {eps} gives p0 = {p0}"));
    }
    let mut details = Vec::new();
    let mut ok = true;
    for p in [1usize, 2] {
        let plan = ProductFormulaPlan::for_spec(&ham, p).map_err(|e| e.to_string())?;
        let check = verify_truncation(&plan, &ham, eps, &BchOptions::default()).map_err(|e| e.to_string())?;
        let holds = check.holds() == Some(true);
        let probe = TruncationProbe::new(&plan, &ham, p0, 12).map_err(|e| e.to_string())?;
        let grid = geometric_grid(1e-2, 2e-1, 8);
        let errs = grid
            .iter()
            .map(|&t| probe.error(t, p0))
            .collect::<mpf_core::Result<Vec<f64>>>()
            .map_err(|e| e.to_string())?;
        let fit = loglog_fit(&grid, &errs, NOISE_FLOOR).ok_or("no points above noise floor")?;
        ok &= holds && fit.slope >= p0 as f64 + 0.8;
        details.push(format!("p={p} boundary {} slope {:.3}", if holds { "ok" } else { "violated" }, fit.slope));
    }
    ensure(ok, format!("p0={p0}; {}", details.join("; ")))
}

fn mpf_order() -> Outcome {
    let ham = chain4();
    let plan = ProductFormulaPlan::for_spec(&ham, 2).map_err(|e| e.to_string())?;
    let grid = geometric_grid(1e-2, 3e-1, 10);
    let mut ok = true;
    let mut details = Vec::new();
    for j in 1..=3 {
        let spec = MpfSpec::richardson_consecutive(2, j).map_err(|e| e.to_string())?;
        let ev = MpfEvaluator::new(&spec, &plan, &ham, 12).map_err(|e| e.to_string())?;
        let errs: Vec<f64> = grid.iter().map(|&t| ev.error(t)).collect();
        let fit = loglog_fit(&grid, &errs, NOISE_FLOOR).ok_or("no points above noise floor")?;
        let res = spec.max_residual();
        ok &= fit.slope >= 2.0 * j as f64 + 0.8 && res <= 1e-10;
        details.push(format!("J={j} slope {:.3} residual {res:.1e}", fit.slope));
    }
    let two = MpfSpec::richardson(2, &[1, 2]).map_err(|e| e.to_string())?;
    let c = two.c_values();
    let exact = (c[0] + 1.0 / 3.0).abs() <= 1e-12 && (c[1] - 4.0 / 3.0).abs() <= 1e-12;
    ok &= exact;
    details.push(format!("k=(1,2) c=({:.15}, {:.15})", c[0], c[1]));
    ensure(ok, details.join("; "))
}

fn mpf_error_bound_check() -> Outcome {
    let ham = chain4();
    let plan = ProductFormulaPlan::for_spec(&ham, 2).map_err(|e| e.to_string())?;
    let cp = plan.repetition_count();
    let (n, k, g) = (ham.n_sites() as f64, ham.locality(), ham.extensiveness());
    let eps_step = 1e-4;
    let p0 = truncation_order(n, eps_step).map_err(|e| e.to_string())?;
    let table = CommutatorTable::build(&ham, 2..=p0, NormConfig::default(), DEFAULT_NESTED_BUDGET)
        .map_err(|e| e.to_string())?;
    let tau_bch = bch_time_step(p0, cp, k, g).map_err(|e| e.to_string())?;
    let lemma = mu_lemma_bound(n, 2, p0, k, g);
    let mut checks = 0usize;
    let mut violations = Vec::new();
    let mut details = Vec::new();
    for j in 1..=2 {
        let spec = MpfSpec::richardson_consecutive(2, j).map_err(|e| e.to_string())?;
        let m = spec.order();
        let mu = mu_truncated(table.best_alpha(), 2, m, p0, MuSearch::default()).map_err(|e| e.to_string())?;
        checks += 1;
        if mu.value > lemma {
            violations.push(format!("J={j} mu {} > {lemma}", mu.value));
        }
        let ev = MpfEvaluator::new(&spec, &plan, &ham, 12).map_err(|e| e.to_string())?;
        let limit = mpf_error_bound(0.0, spec.c_norm(), spec.k_norm(), cp, mu.value, m, eps_step, tau_bch).tau_limit;
        let mut worst = 0.0_f64;
        for f in [1.0, 0.5, 0.25, 0.1] {
            let tau = f * limit;
            let b = mpf_error_bound(tau, spec.c_norm(), spec.k_norm(), cp, mu.value, m, eps_step, tau_bch);
            let measured = ev.error(tau);
            checks += 1;
            if !b.admissible || measured > b.value {
                violations.push(format!("J={j} tau={tau:.3e} measured {measured:.3e} bound {:.3e}", b.value));
            }
            worst = worst.max(measured / b.value);
        }
        details.push(format!(
            "J={j} mu {:.3} (ceiling {:.3}, lemma {lemma:.1}) max measured/bound {worst:.1e}",
            mu.value, mu.ceiling
        ));
    }
    ensure(
        violations.is_empty(),
        format!("p0={p0}; {}; {checks} checks, {} violations {violations:?}", details.join("; "), violations.len()),
    )
}

fn cost_inputs(n: f64, k: usize, g: f64, t: f64, eps: f64, p: usize, cp: usize, terms: usize) -> CostInputs {
    let spec = MpfSpec::richardson_consecutive(2, terms).expect("richardson coefficients");
    CostInputs {
        n_sites: n,
        k,
        g,
        t,
        eps,
        p,
        repetition: cp,
        m: spec.order(),
        c_norm: spec.c_norm(),
        k_norm: spec.k_norm(),
    }
}

fn step_count_consistency() -> Outcome {
    let sizes: Vec<f64> = (0..10).map(|i| (4.0 * 1024f64.powf(i as f64 / 9.0)).round()).collect();
    let (k, g) = (2, 6.0);
    let mut points = 0usize;
    let mut violations = Vec::new();
    let mut max_a = 0.0_f64;
    for &n in &sizes {
        for t in [0.5, 1.0, 2.0, 5.0, 10.0] {
            for eps in [1e-2, 1e-5] {
                let m = select_m(n, g, t, eps).map_err(|e| e.to_string())?;
                let inp = cost_inputs(n, k, g, t, eps, 2, 2, m.div_ceil(2));
                let sc = trotter_number(&inp).map_err(|e| e.to_string())?;
                let chk = check_step_count(&inp, sc.r).map_err(|e| e.to_string())?;
                points += 1;
                max_a = max_a.max(chk.log_parameter);
                if !chk.all_hold() {
                    violations.push(format!("N={n} t={t} eps={eps}"));
                }
            }
        }
    }
    let mut log_checks = 0usize;
    for m in 1..=12 {
        for i in 0..=40 {
            let a = 0.2 * 10f64.powf(-i as f64 / 4.0);
            let x = log_ratio_threshold(a, m);
            log_checks += 1;
            if log_ratio(x, m) > a {
                violations.push(format!("log inequality a={a:.2e} m={m}"));
            }
        }
    }
    ensure(
        violations.is_empty(),
        format!(
            "{points} sweep points, {log_checks} log-inequality samples, max a {max_a:.1e}, {} violations {:?}",
            violations.len(),
            violations.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

fn long_time_simulation() -> Outcome {
    let ham = chain4();
    let plan = ProductFormulaPlan::for_spec(&ham, 2).map_err(|e| e.to_string())?;
    let spec = MpfSpec::richardson_consecutive(2, 2).map_err(|e| e.to_string())?;
    let (t, eps) = (1.0, 1e-3);
    let inp = CostInputs {
        n_sites: ham.n_sites() as f64,
        k: ham.locality(),
        g: ham.extensiveness(),
        t,
        eps,
        p: 2,
        repetition: plan.repetition_count(),
        m: spec.order(),
        c_norm: spec.c_norm(),
        k_norm: spec.k_norm(),
    };
    let sc = trotter_number(&inp).map_err(|e| e.to_string())?;
    let ev = MpfEvaluator::new(&spec, &plan, &ham, 12).map_err(|e| e.to_string())?;
    let err = ev.long_time_error(t, sc.r).map_err(|e| e.to_string())?;
    ensure(err <= eps, format!("r = {}, error {err:.3e} vs epsilon {eps:.0e}", sc.r))
}

fn scaling_exponents() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();

    let sizes = [64, 128, 256, 512, 1024];
    for nu in [0.5, 1.0, 2.0] {
        let report = g_scaling_report(|n| long_range_chain(n, nu, 1.0), &sizes).map_err(|e| e.to_string())?;
        let expected = Regime::for_decay(nu, 1.0);
        let m = report.matches(expected, 0.1);
        ok &= m;
        details.push(format!("nu={nu} g slope {:.3} ({expected:?}) {}", report.power_fit.slope, if m { "ok" } else { "mismatch" }));
    }

    let (k, g, t, eps, p) = (2, 6.0, 1.0, 1e-3, 2);
    let ns: Vec<f64> = (18..=26).map(|e| 10f64.powi(e)).collect();
    let mut rs = Vec::new();
    let mut r1_dominated = true;
    for &n in &ns {
        let sc = trotter_number(&cost_inputs(n, k, g, t, eps, p, 2, 6)).map_err(|e| e.to_string())?;
        r1_dominated &= sc.r1 > sc.r2;
        rs.push(sc.r as f64);
    }
    let fit = loglog_fit(&ns, &rs, 0.0).ok_or("empty step-count fit")?;
    let target = 1.0 / (p as f64 + 1.0);
    let n_ok = r1_dominated && (fit.slope - target).abs() <= 0.05;
    ok &= n_ok;
    details.push(format!("r vs N slope {:.3} (target {target:.3}, r1 dominated {r1_dominated})", fit.slope));

    let n = 64.0;
    let inv_eps: Vec<f64> = (2..=12).map(|e| 10f64.powi(e)).collect();
    let mut rs = Vec::new();
    for &ie in &inv_eps {
        let eps = 1.0 / ie;
        let m = select_m(n, g, t, eps).map_err(|e| e.to_string())?;
        let sc = trotter_number(&cost_inputs(n, k, g, t, eps, p, 2, m.div_ceil(2))).map_err(|e| e.to_string())?;
        rs.push(sc.r as f64);
    }
    let half = inv_eps.len() / 2;
    let early = loglog_fit(&inv_eps[..=half], &rs[..=half], 0.0).ok_or("empty fit")?;
    let late = loglog_fit(&inv_eps[half..], &rs[half..], 0.0).ok_or("empty fit")?;
    let lnln: Vec<f64> = inv_eps.iter().map(|x| x.ln().ln()).collect();
    let lnr: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let poly = linear_fit(&lnln, &lnr).map_err(|e| e.to_string())?;
    let sub = late.slope < early.slope;
    ok &= sub;
    details.push(format!(
        "r vs 1/eps exponent {:.3} -> {:.3}, log-log exponent {:.2} (r2 {:.4})",
        early.slope, late.slope, poly.slope, poly.r_squared
    ));
    ensure(ok, details.join("; "))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "pauli algebra vs dense matrices", limit: Duration::from_secs(10), run: pauli_oracle },
        Criterion { id: 2, name: "product formula order", limit: Duration::from_secs(60), run: trotter_order },
        Criterion { id: 3, name: "nested commutator bounds", limit: Duration::from_secs(300), run: commutator_bounds },
        Criterion { id: 4, name: "BCH coefficients", limit: Duration::from_secs(300), run: bch_coefficients },
        Criterion { id: 5, name: "truncated BCH accuracy", limit: Duration::from_secs(120), run: truncation_accuracy },
        Criterion { id: 6, name: "MPF order", limit: Duration::from_secs(120), run: mpf_order },
        Criterion { id: 7, name: "MPF error bound", limit: Duration::from_secs(300), run: mpf_error_bound_check },
        Criterion { id: 8, name: "step count self-consistency", limit: Duration::from_secs(60), run: step_count_consistency },
        Criterion { id: 9, name: "long-time MPF simulation", limit: Duration::from_secs(120), run: long_time_simulation },
        Criterion { id: 10, name: "scaling exponents", limit: Duration::from_secs(60), run: scaling_exponents },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {}: {} [{:.2} s / {} s]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
