//! Acceptance gate: one printed pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the per-criterion lines
//! always appear in the `cargo test` output.  Exits nonzero when any
//! gating criterion fails; report-only criteria print their measurements
//! and never gate.

use num::{BigRational, Zero};
use twistaff::casimir_ops::{
    coupling_spectrum, d_vec_mu, pairing_check, small_dominant_weights,
    verify_casimir_identity,
};
use twistaff::eta_moebius::{
    norm_estimate_sample, pairing_samples, smoothing_operator_spot, verify_moebius,
};
use twistaff::finite_reps::{Irrep, RepScope};
use twistaff::graded_aut::GradedAlgebra;
use twistaff::homological::{
    boundary, chain_form, coboundary, coboundary_adjoint, duality_dims, graded_cohomology,
    invariant_basis, random_chain, verify_laplacian_oracles, verify_nakano, ChainCtx,
};
use twistaff::scalars::{MarkedCtx, Rat};
use twistaff::simple_lie::{Elt, LieType, Weight};
use twistaff::twisted_affine::{admissible, build_hw_truncation, HWTruncation};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The seven graded-algebra configurations exercised by the exact suites.
const SUITE: [(LieType, u32); 7] = [
    (LieType::A(3), 2),
    (LieType::A(2), 2),
    (LieType::A(4), 2),
    (LieType::A(2), 4),
    (LieType::A(4), 4),
    (LieType::D(4), 2),
    (LieType::D(4), 3),
];

fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(n.into(), d.into())
}

struct Outcome {
    pass: bool,
    gating: bool,
    details: String,
}

fn ok(details: String) -> Outcome {
    Outcome { pass: true, gating: true, details }
}

fn fail(details: String) -> Outcome {
    Outcome { pass: false, gating: true, details }
}

fn report_only(pass: bool, details: String) -> Outcome {
    Outcome { pass, gating: false, details }
}

// ---------------------------------------------------------------------
// criterion 1: graded Casimir partial sums act by 2 p hcheck / m
// ---------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for (t, m) in SUITE {
        let alg = GradedAlgebra::standard(t, m);
        for p in 1..=2 * m {
            let rep = verify_casimir_identity(&alg, p);
            let expect = rat(2 * p as i64 * alg.dual_coxeter(), m as i64);
            if !rep.ok || rep.scalar != expect {
                return fail(format!(
                    "identity fails for ({t}, m={m}) at p={p} (scalar {})",
                    rep.scalar
                ));
            }
            checked += 1;
        }
    }
    ok(format!(
        "scalar 2p*hcheck/m verified exactly on both graded pieces of exponent ±p, \
         {checked} (algebra, p) pairs, p up to 2m"
    ))
}

// ---------------------------------------------------------------------
// criterion 2: named Casimir scalars
// ---------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let mut lines = Vec::new();

    // order-three triality: the grade-0 component acts on the grade-1
    // piece by 4
    let d4 = GradedAlgebra::standard(LieType::D(4), 3);
    let r = verify_casimir_identity(&d4, 1);
    if !r.ok || r.scalar != rat(4, 1) {
        return fail(format!("(D4, m=3): p=1 scalar {} != 4", r.scalar));
    }
    lines.push("(D4,3): C|g_1 = 4".to_string());

    for n in [1usize, 2] {
        // order-four fold of A_{2n}: (2n+1)/2 on grade 1 and the two-term
        // partial sum 2n+1 on grade 2
        let a = GradedAlgebra::standard(LieType::A(2 * n), 4);
        let r1 = verify_casimir_identity(&a, 1);
        if !r1.ok || r1.scalar != rat(2 * n as i64 + 1, 2) {
            return fail(format!("(A{}, m=4): p=1 scalar {} != (2n+1)/2", 2 * n, r1.scalar));
        }
        let r2 = verify_casimir_identity(&a, 2);
        if !r2.ok || r2.scalar != rat(2 * n as i64 + 1, 1) {
            return fail(format!("(A{}, m=4): p=2 scalar {} != 2n+1", 2 * n, r2.scalar));
        }
        lines.push(format!("(A{},4): {} and {}", 2 * n, r1.scalar, r2.scalar));

        // order-two fold of A_{2n}: 2n+1 on grade 1
        let b = GradedAlgebra::standard(LieType::A(2 * n), 2);
        let s1 = verify_casimir_identity(&b, 1);
        if !s1.ok || s1.scalar != rat(2 * n as i64 + 1, 1) {
            return fail(format!("(A{}, m=2): p=1 scalar {} != 2n+1", 2 * n, s1.scalar));
        }
        lines.push(format!("(A{},2): {}", 2 * n, s1.scalar));
    }
    ok(lines.join("; "))
}

// ---------------------------------------------------------------------
// criterion 3: highest-weight pairing identity <theta, theta + 2 rho>
// ---------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let list: [(LieType, u32); 6] = [
        (LieType::A(2), 1),
        (LieType::A(3), 2),
        (LieType::D(4), 2),
        (LieType::D(4), 3),
        (LieType::A(2), 4),
        (LieType::A(4), 4),
    ];
    for (t, m) in list {
        let alg = GradedAlgebra::standard(t, m);
        let rep = pairing_check(&alg);
        if rep.lhs != rep.rhs {
            return fail(format!("({t}, m={m}): {} != {}", rep.lhs, rep.rhs));
        }
        if m == 4 && rep.theta_dual_norm != rat(8, 1) {
            return fail(format!(
                "({t}, m=4): coroot norm {} != 8",
                rep.theta_dual_norm
            ));
        }
    }
    ok("<theta, theta + 2 rho> = 2 hcheck / m exact for all six automorphisms; \
        dual-root norm 8 confirmed for both order-four folds"
        .to_string())
}

// ---------------------------------------------------------------------
// criterion 4: coupling-operator spectra with certified bounds
// ---------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let bound = rat(3, 1);
    let mut verified = 0;
    let mut skipped = Vec::new();
    for (t, m) in SUITE {
        let alg = GradedAlgebra::standard(t, m);
        let mus = small_dominant_weights(&alg.fixed.rs, &bound);
        for grade in 1..m {
            let gdim = alg.dim_grade(grade as i64);
            for mu in &mus {
                let vdim: usize = match alg.fixed.rs.weyl_dim(mu).try_into() {
                    Ok(d) => d,
                    Err(_) => usize::MAX,
                };
                if gdim * vdim > 260 {
                    skipped.push(format!("({t},{m}) grade {grade} dim {}", gdim * vdim));
                    continue;
                }
                let op = coupling_spectrum(&alg, grade, mu);
                let mult_sum: usize = op.spectrum.iter().map(|(_, k)| k).sum();
                if !op.within_bounds || mult_sum != op.dim {
                    return fail(format!(
                        "({t}, m={m}) grade {grade}, mu coords {:?}: bounds violated \
                         or annihilating certification incomplete",
                        mu.0
                    ));
                }
                verified += 1;
            }
        }
    }

    // spot values on the order-two fold of A_2, grade 1
    let alg = GradedAlgebra::standard(LieType::A(2), 2);
    let omega = Weight::fundamental(1, 0);
    let op = coupling_spectrum(&alg, 1, &omega);
    let expect = vec![(rat(-3, 4), 4usize), (rat(1, 2), 6)];
    if op.spectrum != expect {
        return fail(format!("fold spin-module spectrum {:?} unexpected", op.spectrum));
    }
    let op0 = coupling_spectrum(&alg, 1, &Weight::zero(1));
    if op0.spectrum != vec![(Rat::zero(), op0.dim)] {
        return fail("trivial-weight coupling operator is not zero".to_string());
    }
    let skip_note = if skipped.is_empty() {
        String::new()
    } else {
        format!("; skipped oversize products: {}", skipped.join(", "))
    };
    ok(format!(
        "{verified} (sigma, grade, mu) spectra certified by annihilating products with \
         multiplicities summing to dim, all inside the stated interval{skip_note}. \
         Spot values at the A_2 fold, grade 1: mu=omega gives {{-3/4 (x4), 1/2 (x6)}} — \
         the exactly derived spectrum; the quoted reference pair {{-2, 3}} is not \
         reproducible in the normalization under which criterion 3 verifies (the \
         eigenvalue ratio pins an overall rescale AND sign flip; documented mismatch, \
         see the decisions ledger). mu=0 gives {{0}} as claimed."
    ))
}

// ---------------------------------------------------------------------
// criterion 5: smoothing-coefficient identities, exact to degree 30
// ---------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let ctx = MarkedCtx { conductor: 1, points: 1, cap: 44 };
    let rep = verify_moebius(ctx, 0, 12, 30);
    if rep.all_ok {
        ok(format!(
            "branch={} generating-identity={} recursion={} origin={} first-coeff={} \
             conjugation-oracle={} for n <= {} at degree {}, exact polynomial arithmetic",
            rep.branch_ok,
            rep.identity_ok,
            rep.recursion_ok,
            rep.origin_ok,
            rep.first_coefficient_ok,
            rep.residue_ok,
            rep.nmax,
            rep.degree
        ))
    } else {
        fail(format!(
            "branch={} identity={} recursion={} origin={} first={} conjugation={}",
            rep.branch_ok,
            rep.identity_ok,
            rep.recursion_ok,
            rep.origin_ok,
            rep.first_coefficient_ok,
            rep.residue_ok
        ))
    }
}

// ---------------------------------------------------------------------
// shared homological fixtures
// ---------------------------------------------------------------------

fn twisted_alg() -> GradedAlgebra {
    GradedAlgebra::standard(LieType::A(2), 2)
}

fn twisted_module(alg: &GradedAlgebra, level: i64, cutoff: usize) -> HWTruncation {
    build_hw_truncation(alg, &Weight::zero(1), level, cutoff).unwrap()
}

/// Two marked points (the origin plus one formal point carrying the
/// standard evaluation module), monomials truncated at degree 8.
fn two_point_ctx<'a>(alg: &'a GradedAlgebra, h: &'a HWTruncation) -> ChainCtx<'a> {
    let mctx = MarkedCtx { conductor: alg.conductor, points: 2, cap: 8 };
    let evals = vec![
        Irrep::new(alg, RepScope::Fixed, &Weight::zero(alg.fixed.rank())),
        Irrep::new(alg, RepScope::Full, &Weight::fundamental(2, 0)),
    ];
    ChainCtx::new(alg, h, evals, mctx)
}

/// Origin-only context with trivial coefficients: the energy-graded
/// setting for cohomology and duality.
fn graded_ctx<'a>(alg: &'a GradedAlgebra, h: &'a HWTruncation) -> ChainCtx<'a> {
    let mctx = MarkedCtx { conductor: alg.conductor, points: 1, cap: 4 };
    let evals = vec![Irrep::new(alg, RepScope::Fixed, &Weight::zero(alg.fixed.rank()))];
    ChainCtx::new(alg, h, evals, mctx)
}

// ---------------------------------------------------------------------
// criterion 6: six Laplacian closed-form oracles on random chains
// ---------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let alg = twisted_alg();
    let h = twisted_module(&alg, 4, 4);
    let ctx = two_point_ctx(&alg, &h);
    let mut lines = Vec::new();
    for q in [1usize, 2] {
        let rep = verify_laplacian_oracles(&ctx, q, 4, 50, 1000 + q as u64);
        if !rep.all_ok {
            return fail(format!(
                "degree {q}: adjoint1 {}/{} lower {}/{} cochain {}/{} adjoint {}/{} \
                 nine {}/{} regrouped {}/{}",
                rep.adjoint_one_ok,
                rep.chains,
                rep.box_lower_ok,
                rep.chains,
                rep.cochain_model_ok,
                rep.chains,
                rep.adjoint_ok,
                rep.chains,
                rep.nine_term_ok,
                rep.chains,
                rep.regrouped_ok,
                rep.chains
            ));
        }
        lines.push(format!("degree {q}: 6 oracles x {} chains", rep.chains));
    }
    ok(format!(
        "{} — exact agreement of every closed-form operator with its independent \
         composition/adjunction model (energies <= 4, monomial degree <= 8)",
        lines.join("; ")
    ))
}

// ---------------------------------------------------------------------
// criterion 7: Laplacian-difference identity on exact invariant bases
// ---------------------------------------------------------------------

fn criterion_7() -> Outcome {
    // untwisted base case: the identity coefficient is q (c + 2 hcheck)
    let alg1 = GradedAlgebra::standard(LieType::A(1), 1);
    let h1 = build_hw_truncation(&alg1, &Weight::zero(1), 1, 3).unwrap();
    let mctx1 = MarkedCtx { conductor: alg1.conductor, points: 1, cap: 6 };
    let evals1 = vec![Irrep::new(&alg1, RepScope::Fixed, &Weight::zero(1))];
    let ctx1 = ChainCtx::new(&alg1, &h1, evals1, mctx1);
    let rep1 = verify_nakano(&ctx1, 1, 3);
    let inv1: usize = rep1.cases.iter().map(|c| c.invariant_dim).sum();
    if !rep1.all_ok || !rep1.witness_fails || inv1 == 0 {
        return fail(format!(
            "untwisted case: ok={} witness={} invariants={}",
            rep1.all_ok, rep1.witness_fails, inv1
        ));
    }

    // the level-3 twisted configuration requested alongside this criterion
    // is degenerate; report the exact obstructions, then run the suite at
    // the nearest admissible even level (see the decisions ledger)
    let alg = twisted_alg();
    let adm0 = admissible(&alg, &Weight::zero(1), 3);
    let h3 = build_hw_truncation(&alg, &Weight::fundamental(1, 0), 3, 4).unwrap();
    let ctx3 = two_point_ctx(&alg, &h3);
    let mut inv3 = 0usize;
    for q in [1usize, 2] {
        for e in 1..=4 {
            inv3 += invariant_basis(&ctx3, q, e).1.len();
        }
    }
    if adm0.admissible || inv3 != 0 {
        return fail(format!(
            "level-3 degeneracy checks: trivial weight admissible={} (expected false), \
             invariant dimension at the admissible level-3 weight = {inv3} (expected 0)",
            adm0.admissible
        ));
    }

    // main run: order-two fold of A_2 at level 4, trivial weight, one
    // extra marked point with the standard evaluation module (s = 1)
    let h = twisted_module(&alg, 4, 4);
    let ctx = two_point_ctx(&alg, &h);
    let mut lines = Vec::new();
    for q in [1usize, 2] {
        let rep = verify_nakano(&ctx, q, 4);
        let inv: usize = rep.cases.iter().map(|c| c.invariant_dim).sum();
        let zm = rep.cases.iter().all(|c| c.zero_mode_ok);
        if !rep.all_ok || !rep.witness_fails || !zm || inv == 0 {
            return fail(format!(
                "degree {q}: ok={} witness-fails={} zero-mode={} invariant total={}",
                rep.all_ok, rep.witness_fails, zm, inv
            ));
        }
        lines.push(format!(
            "degree {q}: gap scalar {} on {} invariant vectors (energies 1..=4)",
            rep.gap_scalar, inv
        ));
    }
    ok(format!(
        "untwisted coefficient q(c+2 hcheck) exact on {inv1} invariants; twisted run at \
         level 4 with trivial weight (the level-3/trivial-weight configuration is \
         inadmissible — affine-node pairing 3/2 — and the admissible level-3 neighbor \
         has identically zero invariants by spin parity, both verified above; see the \
         decisions ledger): {}; identity fails on a non-invariant witness in every case",
        lines.join("; ")
    ))
}

// ---------------------------------------------------------------------
// criterion 8: graded vanishing of invariant cohomology
// ---------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let alg = twisted_alg();
    let h = twisted_module(&alg, 4, 5);
    let ctx = graded_ctx(&alg, &h);
    let rep = match graded_cohomology(&ctx, 2, 5) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    let mut checked = 0;
    for case in &rep.cases {
        if case.q >= 1 && (case.betti != 0 || !case.consistent) {
            return fail(format!(
                "degree {} energy {}: betti {} harmonic {} consistent {}",
                case.q, case.energy, case.betti, case.harmonic_dim, case.consistent
            ));
        }
        checked += 1;
    }
    if !rep.all_consistent {
        return fail("kernel/image and harmonic computations disagree".to_string());
    }
    ok(format!(
        "invariant cohomology vanishes in degrees 1 and 2 at every energy <= 5 \
         ({checked} (degree, energy) cases), by exact kernel/image ranks, \
         cross-checked against the Laplacian kernel (level 4, trivial weight; \
         see criterion 7 for the level substitution)"
    ))
}

// ---------------------------------------------------------------------
// criterion 9: analytic estimates (floating point, report-only)
// ---------------------------------------------------------------------

fn criterion_9() -> Outcome {
    // slot norms from the grade-1 piece of the fold
    let alg = twisted_alg();
    use num::ToPrimitive;
    let norms: Vec<f64> = alg
        .grade_indices(1)
        .iter()
        .map(|&i| alg.basis[i].norm.to_f64().unwrap())
        .collect();
    let nrep = norm_estimate_sample(&norms, 3, 20, 2, 6.0, 0.1, 20260824);

    let srep = smoothing_operator_spot(0.9, 40);
    let smoothing_ok = srep.positive
        && srep.hermitian_deviation < 1e-12
        && srep.trace <= srep.trace_target + 1e-9
        && srep.trace_square <= srep.trace_square_target + 1e-9;

    let h = twisted_module(&alg, 4, 4);
    let ctx = two_point_ctx(&alg, &h);
    let d = d_vec_mu(&alg, &Weight::zero(1), &[Weight::fundamental(2, 0)]);
    let prep = pairing_samples(&ctx, 1, 3, &d, 6.0, 0.1, 8, 7);

    let pass = nrep.all_within && smoothing_ok && prep.all_within;
    report_only(
        pass,
        format!(
            "norm comparison: {} tuples at pairwise hyperbolic distance >= {}, \
             max ratio {:.6} (tolerance 1+eps = 1.1, truncation tails folded in); \
             smoothing operator: positive={}, hermitian deviation {:.2e}, \
             trace {:.6} <= {:.6}, trace^2 {:.6} <= {:.6}; \
             correction pairing: {} samples, max |pairing| / (q d ||A||^2) = {:.6} \
             with d = {} — all within 1+eps",
            nrep.tuples,
            nrep.min_pairwise_distance,
            nrep.max_ratio,
            srep.positive,
            srep.hermitian_deviation,
            srep.trace,
            srep.trace_target,
            srep.trace_square,
            srep.trace_square_target,
            prep.samples,
            prep.max_ratio,
            d
        ),
    )
}

// ---------------------------------------------------------------------
// criterion 10: duality of cohomology and homology dimension tables
// ---------------------------------------------------------------------

fn criterion_10() -> Outcome {
    let alg = twisted_alg();
    let h = twisted_module(&alg, 4, 5);
    let ctx = graded_ctx(&alg, &h);
    let rep = duality_dims(&ctx, 2, 4);
    if !rep.self_dual_weight || !rep.gamma_ok {
        return fail(format!(
            "preconditions: self-dual weight {}, loop-inversion intertwiner {}",
            rep.self_dual_weight, rep.gamma_ok
        ));
    }
    for case in &rep.cases {
        if !case.equal {
            return fail(format!(
                "degree {} energy {}: cohomology {} != homology {}",
                case.q, case.energy, case.cohomology_dim, case.homology_dim
            ));
        }
    }
    if !rep.all_equal {
        return fail("dimension tables disagree".to_string());
    }
    ok(format!(
        "cohomology and homology dimension tables agree at every (degree <= 2, \
         energy <= 4) — {} cases; self-dual highest weight and the loop-inversion \
         bracket intertwiner both verified (same configuration as criterion 8)",
        rep.cases.len()
    ))
}

// ---------------------------------------------------------------------
// criterion 11: structural identity suites, all exact
// ---------------------------------------------------------------------

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // per-algebra structural identities on sampled basis triples
    for (t, m) in SUITE {
        let alg = GradedAlgebra::standard(t, m);
        let g = &alg.g;
        let dim = g.dim;
        for _ in 0..120 {
            let x = Elt::basis(g.conductor, rng.gen_range(0..dim));
            let y = Elt::basis(g.conductor, rng.gen_range(0..dim));
            let z = Elt::basis(g.conductor, rng.gen_range(0..dim));
            // Jacobi
            let mut acc = g.bracket(&g.bracket(&x, &y), &z);
            acc = acc.add(&g.bracket(&g.bracket(&y, &z), &x));
            acc = acc.add(&g.bracket(&g.bracket(&z, &x), &y));
            if !acc.is_zero() {
                return fail(format!("Jacobi identity fails on ({t}, m={m})"));
            }
            // invariance of the bilinear form
            if g.form(&g.bracket(&x, &y), &z) != g.form(&x, &g.bracket(&y, &z)) {
                return fail(format!("form invariance fails on ({t}, m={m})"));
            }
            // kappa is an involutive antilinear automorphism ...
            if g.kappa(&g.bracket(&x, &y)) != g.bracket(&g.kappa(&x), &g.kappa(&y))
                || g.kappa(&g.kappa(&x)) != x
            {
                return fail(format!("compact involution fails on ({t}, m={m})"));
            }
            // ... contravariant for the Hermitian form: {ad_z x, y} = -{x, ad_{kappa z} y}
            let lhs = g.herm(&g.bracket(&z, &x), &y);
            let rhs = -g.herm(&x, &g.bracket(&g.kappa(&z), &y));
            if lhs != rhs {
                return fail(format!("Hermitian contravariance fails on ({t}, m={m})"));
            }
            // the grading automorphism commutes with the compact involution
            // and respects brackets and the form
            if alg.sigma(&g.kappa(&x)) != g.kappa(&alg.sigma(&x))
                || alg.sigma(&g.bracket(&x, &y)) != g.bracket(&alg.sigma(&x), &alg.sigma(&y))
                || g.form(&alg.sigma(&x), &alg.sigma(&y)) != g.form(&x, &y)
            {
                return fail(format!("grading automorphism identities fail on ({t}, m={m})"));
            }
        }
    }

    // chain-level identities on the twisted two-point configuration
    let alg = twisted_alg();
    let h = twisted_module(&alg, 4, 4);
    let ctx = two_point_ctx(&alg, &h);
    for q in [2usize, 3] {
        for _ in 0..4 {
            let a = random_chain(&ctx, q, 4, 3, &mut rng);
            if !boundary(&ctx, &boundary(&ctx, &a)).is_zero() {
                return fail(format!("boundary does not square to zero in degree {q}"));
            }
        }
    }
    for q in [1usize, 2] {
        for _ in 0..4 {
            let a = random_chain(&ctx, q, 4, 3, &mut rng);
            if !coboundary(&ctx, &coboundary(&ctx, &a)).is_zero() {
                return fail(format!("coboundary does not square to zero in degree {q}"));
            }
            let b = random_chain(&ctx, q + 1, 4, 3, &mut rng);
            if chain_form(&ctx, &coboundary(&ctx, &a), &b)
                != chain_form(&ctx, &a, &coboundary_adjoint(&ctx, &b))
            {
                return fail(format!("coboundary adjunction fails in degree {q}"));
            }
        }
    }
    ok("Jacobi, form invariance, compact-involution contravariance, grading/involution \
        commutation (840 sampled triples over 7 algebras), squared differentials and \
        codifferential adjunction on random twisted chains — all exact"
        .to_string())
}

// ---------------------------------------------------------------------

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("graded Casimir scaling identity, 7 algebras, p <= 2m", criterion_1),
        ("named Casimir component scalars", criterion_2),
        ("graded highest-weight pairing identity", criterion_3),
        ("coupling-operator spectra and bounds", criterion_4),
        ("smoothing-coefficient identities to degree 30", criterion_5),
        ("six Laplacian closed-form oracles, 50 random chains each", criterion_6),
        ("Laplacian-difference identity on exact invariant bases", criterion_7),
        ("graded vanishing of invariant cohomology", criterion_8),
        ("sampled analytic norm/pairing estimates (report-only)", criterion_9),
        ("cohomology/homology duality dimension tables", criterion_10),
        ("structural identity suites", criterion_11),
    ];
    let mut failures = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let out = f();
        let dt = start.elapsed().as_secs_f64();
        let status = match (out.gating, out.pass) {
            (true, true) => "PASS",
            (true, false) => "FAIL",
            (false, true) => "REPORT(ok)",
            (false, false) => "REPORT(out of tolerance)",
        };
        if out.gating && !out.pass {
            failures += 1;
        }
        println!(
            "criterion {:2} [{status}] ({dt:7.2}s) {title}\n              {}",
            i + 1,
            out.details
        );
    }
    if failures > 0 {
        eprintln!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all gating criteria passed");
}
