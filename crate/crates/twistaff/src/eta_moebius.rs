//! Möbius-conjugated smoothing coefficients and the associated norm
//! estimates.
//!
//! For a point `z` in the open unit disc, the coefficients `a_k^n(z)`
//! express the conjugate of the antiderivative-type smoothing operator
//! by the disc automorphism `φ(t) = (t + z)/(1 + z̄ t)`: applying the
//! conjugated operator to `t^n` gives `Σ_{k≥1} a_k^n t^k`.  The closed
//! form is
//!
//! * `a_k^n = (1/k)(1 − (z z̄)^k) z^{n−k}` for `1 ≤ k ≤ n`,
//! * `a_k^n = (1/k) z̄^{k−n} (1 − (z z̄)^n)` for `k ≥ n`,
//!
//! and the same coefficients describe the smoothed negative modes
//! `η_z(t^{−p}) = Σ_n a_p^n t^{−n}` used in the resolvent norm
//! estimates.  Everything in the exact part of this module is verified
//! as a polynomial identity in `z, z̄` with rational coefficients; the
//! sampling estimates at numeric far-apart points are floating point
//! and reported rather than asserted.

use num::complex::Complex64;
use serde::Serialize;

use crate::scalars::{Marked, MarkedCtx, Rat};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// `z z̄` to the `e`-th power at the given point.
fn zz(ctx: MarkedCtx, point: usize, e: u32) -> Marked {
    &Marked::z_pow(ctx, point, e) * &Marked::zbar_pow(ctx, point, e)
}

/// Closed form of `a_k^n` as an exact polynomial (`k, n ≥ 1`).  The two
/// branches agree at `k = n`.
pub fn moebius_closed(ctx: MarkedCtx, point: usize, k: u32, n: u32) -> Marked {
    assert!(k >= 1 && n >= 1);
    let w = rat(1, k as i64);
    if k <= n {
        let window = &Marked::one(ctx) - &zz(ctx, point, k);
        (&window * &Marked::z_pow(ctx, point, n - k)).scale_rat(&w)
    } else {
        let window = &Marked::one(ctx) - &zz(ctx, point, n);
        (&Marked::zbar_pow(ctx, point, k - n) * &window).scale_rat(&w)
    }
}

/// Coefficients of the smoothed negative mode `η_z(t^{−p})` on
/// `t^{−1}, …, t^{−nmax}`.
pub fn eta_apply(ctx: MarkedCtx, point: usize, p: u32, nmax: u32) -> Vec<Marked> {
    (1..=nmax).map(|n| moebius_closed(ctx, point, p, n)).collect()
}

/// Truncated product of two `t`-power series with polynomial
/// coefficients, keeping degrees `0..=deg`.
fn series_mul(a: &[Marked], b: &[Marked], deg: usize, ctx: MarkedCtx) -> Vec<Marked> {
    let mut out = vec![Marked::zero(ctx); deg + 1];
    for (i, ai) in a.iter().enumerate().take(deg + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(deg + 1 - i) {
            if !bj.is_zero() {
                out[i + j] += &(ai * bj);
            }
        }
    }
    out
}

/// Coefficients of the disc automorphism `φ(t) = (t + z)/(1 + z̄ t)` as
/// a `t`-series of the given length.
fn phi_series(ctx: MarkedCtx, point: usize, len: usize) -> Vec<Marked> {
    let mut out = Vec::with_capacity(len);
    out.push(Marked::z_pow(ctx, point, 1));
    let window = &Marked::one(ctx) - &zz(ctx, point, 1);
    for j in 1..len {
        let mut c = &Marked::zbar_pow(ctx, point, (j - 1) as u32) * &window;
        if j % 2 == 0 {
            c = -&c;
        }
        out.push(c);
    }
    out
}

/// Coefficients of the inverse automorphism `φ^{-1}(t) = (t − z)/(1 − z̄ t)`.
fn phi_inv_series(ctx: MarkedCtx, point: usize, len: usize) -> Vec<Marked> {
    let mut out = Vec::with_capacity(len);
    out.push(-&Marked::z_pow(ctx, point, 1));
    let window = &Marked::one(ctx) - &zz(ctx, point, 1);
    for j in 1..len {
        out.push(&Marked::zbar_pow(ctx, point, (j - 1) as u32) * &window);
    }
    out
}

/// Conjugate the antiderivative-type smoothing of `t^n` by the disc
/// automorphism, from first principles: expand `φ(t)^n`, divide the
/// `j`-th coefficient by `j`, and compose with `φ^{-1}`.  Returns the
/// `t`-coefficients `0..=deg`; entries `1..` are the `a_k^n`.
///
/// The computation happens in the degree-truncated polynomial quotient,
/// which is exact whenever the context cap is at least the largest
/// degree `n + deg` appearing in the closed forms.
pub fn moebius_conjugate(ctx: MarkedCtx, point: usize, n: u32, deg: usize) -> Vec<Marked> {
    assert!(n >= 1);
    // phi(t)^n: coefficients of t^j beyond cap + n have z̄-degree
    // greater than the cap and vanish in the quotient
    let len = ctx.cap as usize + n as usize + 1;
    let phi = phi_series(ctx, point, len);
    let mut g = vec![Marked::zero(ctx); len];
    g[0] = Marked::one(ctx);
    // repeated truncated multiplication (n is small)
    for _ in 0..n {
        g = series_mul(&g, &phi, len - 1, ctx);
    }
    // antiderivative-type smoothing: t^j -> t^j / j, constant dropped
    let mut f: Vec<Marked> = Vec::with_capacity(len);
    f.push(Marked::zero(ctx));
    for (j, gj) in g.iter().enumerate().skip(1) {
        f.push(gj.scale_rat(&rat(1, j as i64)));
    }
    // Horner composition with phi^{-1}, truncated at the output degree:
    // Σ_j f_j u^j = u (f_1 + u (f_2 + … ))
    let u = phi_inv_series(ctx, point, deg + 1);
    let mut acc = vec![Marked::zero(ctx); deg + 1];
    for j in (1..len).rev() {
        acc = series_mul(&acc, &u, deg, ctx);
        acc[0] += &f[j];
    }
    // one final multiplication by u accounts for the overall factor
    // `u^1` in `Σ_j f_j u^j = u (f_1 + u (f_2 + …))`
    series_mul(&acc, &u, deg, ctx)
}

#[derive(Serialize)]
pub struct MoebiusReport {
    pub nmax: u32,
    pub degree: usize,
    pub branch_ok: bool,
    pub identity_ok: bool,
    pub recursion_ok: bool,
    pub origin_ok: bool,
    pub first_coefficient_ok: bool,
    pub residue_ok: bool,
    pub all_ok: bool,
}

/// Verify the defining polynomial identities of the `a_k^n` exactly:
/// branch agreement, the generating identity per `t`-degree, the
/// three-term recursion, the origin specialization, the first
/// coefficient, and the agreement of the closed form with the
/// first-principles conjugation.
pub fn verify_moebius(ctx: MarkedCtx, point: usize, nmax: u32, deg: usize) -> MoebiusReport {
    assert!(ctx.cap as usize >= nmax as usize + deg + 2);
    let one = Marked::one(ctx);
    let zp = Marked::z_pow(ctx, point, 1);
    let zbp = Marked::zbar_pow(ctx, point, 1);
    let window = &one - &zz(ctx, point, 1);

    // branch agreement at k = n
    let mut branch_ok = true;
    for n in 1..=nmax {
        let low = (&(&one - &zz(ctx, point, n)) * &Marked::z_pow(ctx, point, 0))
            .scale_rat(&rat(1, n as i64));
        let high = (&Marked::zbar_pow(ctx, point, 0) * &(&one - &zz(ctx, point, n)))
            .scale_rat(&rat(1, n as i64));
        if low != high || low != moebius_closed(ctx, point, n, n) {
            branch_ok = false;
        }
    }

    // generating identity: (t^n − z^n)(1 − z z̄) =
    //   Σ_{k≥1} k a_k^n t^{k−1} (t − z)(1 − z̄ t), compared per t-degree
    let mut identity_ok = true;
    for n in 1..=nmax {
        let a = |k: i64| -> Marked {
            if k < 1 {
                Marked::zero(ctx)
            } else {
                moebius_closed(ctx, point, k as u32, n)
            }
        };
        for d in 0..=deg as i64 {
            // coefficient of t^d of Σ k a_k t^{k-1}(t - z)(1 - z̄ t)
            let lhs = &(&(-&zp).scale_rat(&rat(d + 1, 1)) * &a(d + 1))
                + &(&(&(&one + &zz(ctx, point, 1)).scale_rat(&rat(d, 1)) * &a(d))
                    - &(&zbp.scale_rat(&rat(d - 1, 1)) * &a(d - 1)));
            let mut rhs = Marked::zero(ctx);
            if d == n as i64 {
                rhs += &window;
            }
            if d == 0 {
                rhs -= &(&window * &Marked::z_pow(ctx, point, n));
            }
            if lhs != rhs {
                identity_ok = false;
            }
        }
    }

    // three-term recursion away from the branch switch, in the
    // z-multiplied form: z k a_k = −z̄ (k−2) a_{k−2} + (1 + z z̄)(k−1) a_{k−1}
    let mut recursion_ok = true;
    for n in 1..=nmax {
        for k in 3..=(deg as u32) {
            if k > n && k < n + 3 {
                continue;
            }
            let lhs = (&zp * &moebius_closed(ctx, point, k, n)).scale_rat(&rat(k as i64, 1));
            let rhs = &(&(-&zbp) * &moebius_closed(ctx, point, k - 2, n))
                .scale_rat(&rat(k as i64 - 2, 1))
                + &(&(&one + &zz(ctx, point, 1)) * &moebius_closed(ctx, point, k - 1, n))
                    .scale_rat(&rat(k as i64 - 1, 1));
            if lhs != rhs {
                recursion_ok = false;
            }
        }
    }

    // origin specialization: constant terms are δ_{k,n} / k
    let mut origin_ok = true;
    for n in 1..=nmax {
        for k in 1..=(deg as u32) {
            let c = moebius_closed(ctx, point, k, n).constant_term();
            let expected = if k == n { rat(1, k as i64) } else { rat(0, 1) };
            if c.to_rat() != Some(expected) {
                origin_ok = false;
            }
        }
    }

    // first coefficient
    let mut first_ok = true;
    for n in 1..=nmax {
        let expected = &Marked::z_pow(ctx, point, n - 1) * &window;
        if moebius_closed(ctx, point, 1, n) != expected {
            first_ok = false;
        }
    }

    // first-principles conjugation against the closed form; the
    // constant coefficient is the normalization constant (the conjugate
    // vanishes at t = z rather than t = 0) and is not compared
    let mut residue_ok = true;
    let oracle_n = nmax.min(6);
    let oracle_deg = deg.min(6);
    for n in 1..=oracle_n {
        let composed = moebius_conjugate(ctx, point, n, oracle_deg);
        for k in 1..=oracle_deg {
            if composed[k] != moebius_closed(ctx, point, k as u32, n) {
                residue_ok = false;
            }
        }
    }

    let all_ok =
        branch_ok && identity_ok && recursion_ok && origin_ok && first_ok && residue_ok;
    MoebiusReport {
        nmax,
        degree: deg,
        branch_ok,
        identity_ok,
        recursion_ok,
        origin_ok,
        first_coefficient_ok: first_ok,
        residue_ok,
        all_ok,
    }
}

/// Numeric value of `a_k^n` at a real point `r` in the unit disc.
pub fn moebius_numeric(r: f64, k: u32, n: u32) -> f64 {
    let (k, n) = (k as i32, n as i32);
    if k <= n {
        (1.0 - r.powi(2 * k)) * r.powi(n - k) / k as f64
    } else {
        r.powi(k - n) * (1.0 - r.powi(2 * n)) / k as f64
    }
}

#[derive(Serialize)]
pub struct NormEstimateReport {
    pub tuples: usize,
    pub points_per_tuple: usize,
    pub min_pairwise_distance: f64,
    pub epsilon: f64,
    pub max_ratio: f64,
    pub within: usize,
    pub all_within: bool,
}

/// Sampled smoothing-sum estimate: for far-apart points on a hyperbolic
/// geodesic, the inverse-energy norm of `Σ_k Σ_p x_p^{(k)} η_{z_k}(t^{-p})`
/// must stay within `(1 + ε)` of the direct-sum norm
/// `(Σ_k Σ_p (1/p) ||x_p^{(k)}||²)^{1/2}` of the localized pieces.  The
/// slot space carries the diagonal Gram `norms`; each sample draws
/// random rational-range coefficients for `pmax` energies at every
/// point.  The mode sums are truncated with an explicit geometric tail
/// bound folded into the reported ratio.  Floating point; report-only.
pub fn norm_estimate_sample(
    norms: &[f64],
    pmax: usize,
    tuples: usize,
    points_per_tuple: usize,
    distance: f64,
    epsilon: f64,
    seed: u64,
) -> NormEstimateReport {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = norms.len();
    // points on the real-axis geodesic through the origin at cumulative
    // hyperbolic distances (j+1)·distance; pairwise distances are
    // multiples of `distance`
    let rs: Vec<f64> = (0..points_per_tuple)
        .map(|j| {
            let d = distance * (j as f64 + 1.0);
            (d.exp() - 1.0) / (d.exp() + 1.0)
        })
        .collect();
    let rmax = rs[points_per_tuple - 1];
    // truncation point: r^{2 nmax} must be negligible
    let nmax = (12.0 / (1.0 - rmax * rmax)).ceil() as usize;
    let mut max_ratio: f64 = 0.0;
    let mut within = 0;
    for _ in 0..tuples {
        // random coefficient vectors per (point, mode energy)
        let coeffs: Vec<Vec<Vec<f64>>> = (0..points_per_tuple)
            .map(|_| {
                (0..pmax)
                    .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
                    .collect()
            })
            .collect();
        // direct-sum norm of the localized pieces
        let mut a2 = 0.0;
        for c in &coeffs {
            for (p, cp) in c.iter().enumerate() {
                for (s, x) in cp.iter().enumerate() {
                    a2 += x * x * norms[s] / (p + 1) as f64;
                }
            }
        }
        // smoothed sum, mode by mode
        let mut b2 = 0.0;
        let mut y = vec![0.0; dim];
        for n in 1..=nmax {
            for v in y.iter_mut() {
                *v = 0.0;
            }
            for (j, c) in coeffs.iter().enumerate() {
                for (p, cp) in c.iter().enumerate() {
                    let a = moebius_numeric(rs[j], p as u32 + 1, n as u32);
                    if a == 0.0 {
                        continue;
                    }
                    for (s, x) in cp.iter().enumerate() {
                        y[s] += a * x;
                    }
                }
            }
            for (s, ys) in y.iter().enumerate() {
                b2 += ys * ys * norms[s] / n as f64;
            }
        }
        // tail bound: |a_p^n| <= r^{n-p}/p for n >= p, so the mode-n
        // remainder is dominated by a geometric series
        let mut tail_amp = 0.0;
        for c in &coeffs {
            for (p, cp) in c.iter().enumerate() {
                let norm_x: f64 = cp
                    .iter()
                    .zip(norms)
                    .map(|(x, w)| x * x * w)
                    .sum::<f64>()
                    .sqrt();
                tail_amp += norm_x * rmax.powi(-(p as i32 + 1)) / (p + 1) as f64;
            }
        }
        let tail = tail_amp * tail_amp * rmax.powi(2 * (nmax + 1) as i32)
            / ((nmax + 1) as f64 * (1.0 - rmax * rmax));
        let ratio = (b2 + tail).sqrt() / a2.sqrt();
        max_ratio = max_ratio.max(ratio);
        if ratio <= 1.0 + epsilon {
            within += 1;
        }
    }
    NormEstimateReport {
        tuples,
        points_per_tuple,
        min_pairwise_distance: distance,
        epsilon,
        max_ratio,
        within,
        all_within: within == tuples,
    }
}

#[derive(Serialize)]
pub struct SmoothingOperatorReport {
    pub size: usize,
    pub hermitian_deviation: f64,
    pub positive: bool,
    pub trace: f64,
    pub trace_target: f64,
    pub trace_square: f64,
    pub trace_square_target: f64,
}

/// Spot check of the symmetrized smoothing matrix
/// `T[n,p] = a_p^n sqrt(p/n)` at a real point: Hermitian symmetry,
/// positivity (Cholesky), and the trace identities `tr T = Σ 1/p`,
/// `tr T² = Σ 1/p²` up to explicit truncation tails.  Floating point;
/// report-only.
pub fn smoothing_operator_spot(r: f64, size: usize) -> SmoothingOperatorReport {
    let mut t = vec![vec![0.0f64; size]; size];
    for n in 1..=size {
        for p in 1..=size {
            t[n - 1][p - 1] =
                moebius_numeric(r, p as u32, n as u32) * ((p as f64) / (n as f64)).sqrt();
        }
    }
    let mut dev: f64 = 0.0;
    for i in 0..size {
        for j in 0..size {
            dev = dev.max((t[i][j] - t[j][i]).abs());
        }
    }
    // Cholesky positivity
    let mut chol = t.clone();
    let mut positive = true;
    'outer: for i in 0..size {
        for j in 0..=i {
            let mut sum = chol[i][j];
            for k in 0..j {
                sum -= chol[i][k] * chol[j][k];
            }
            if i == j {
                if sum <= -1e-12 {
                    positive = false;
                    break 'outer;
                }
                chol[i][j] = sum.max(0.0).sqrt();
            } else {
                chol[i][j] = if chol[j][j].abs() > 1e-300 { sum / chol[j][j] } else { 0.0 };
            }
        }
        for j in (i + 1)..size {
            chol[i][j] = 0.0;
        }
    }
    let trace: f64 = (0..size).map(|i| t[i][i]).sum();
    let trace_target: f64 = (1..=size).map(|p| (1.0 - r.powi(2 * p as i32)) / p as f64).sum();
    let mut trace_square = 0.0;
    for i in 0..size {
        for j in 0..size {
            trace_square += t[i][j] * t[j][i];
        }
    }
    // eigenvalues of the untruncated operator are 1/p
    let trace_square_target: f64 = (1..=size).map(|p| 1.0 / ((p * p) as f64)).sum();
    SmoothingOperatorReport {
        size,
        hermitian_deviation: dev,
        positive,
        trace,
        trace_target,
        trace_square,
        trace_square_target,
    }
}

#[derive(Serialize)]
pub struct PairingSampleReport {
    pub samples: usize,
    pub epsilon: f64,
    pub max_ratio: f64,
    pub all_within: bool,
}

/// Sampled bound on the marked-point correction pairing: for random
/// invariant-window chains `A` of wedge degree `q`,
/// `|{T_z A, A}|  ≤ q · d · (1 + ε) · ||A||²` after numeric evaluation
/// at a far real point.  `d` is the coupling bound supplied by the
/// caller.  Floating point; report-only.
pub fn pairing_samples(
    ctx: &crate::homological::ChainCtx,
    q: usize,
    emax: usize,
    d_bound: &Rat,
    distance: f64,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> PairingSampleReport {
    use num::ToPrimitive;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let r = (distance.exp() - 1.0) / (distance.exp() + 1.0);
    let mut pts = vec![Complex64::new(0.0, 0.0); ctx.mctx.points];
    for (i, p) in pts.iter_mut().enumerate().skip(1) {
        *p = Complex64::new(r.powi(i as i32), 0.0);
    }
    let d = d_bound.to_f64().unwrap();
    let mut max_ratio: f64 = 0.0;
    let mut all = true;
    let mut done = 0;
    while done < samples {
        let a = crate::homological::random_chain(ctx, q, emax, 3, &mut rng);
        if a.is_zero() {
            continue;
        }
        done += 1;
        let ta = crate::homological::t_z(ctx, &a);
        let pairing = crate::homological::chain_form(ctx, &ta, &a).embed(&pts).norm();
        let norm2 = crate::homological::chain_form(ctx, &a, &a).embed(&pts).re;
        let bound = q as f64 * d * (1.0 + epsilon) * norm2;
        let ratio = if norm2 > 0.0 { pairing / (q as f64 * d * norm2) } else { 0.0 };
        max_ratio = max_ratio.max(ratio);
        if pairing > bound {
            all = false;
        }
    }
    PairingSampleReport { samples, epsilon, max_ratio, all_within: all }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> MarkedCtx {
        MarkedCtx { conductor: 1, points: 1, cap: 26 }
    }

    #[test]
    fn moebius_identities_hold() {
        let rep = verify_moebius(ctx(), 0, 6, 12);
        assert!(rep.all_ok, "{}", serde_json::to_string(&rep).unwrap());
    }

    #[test]
    fn conjugation_matches_closed_form() {
        let c = ctx();
        for n in 1..=4u32 {
            let composed = moebius_conjugate(c, 0, n, 5);
            for k in 1..=5usize {
                assert_eq!(
                    composed[k],
                    moebius_closed(c, 0, k as u32, n),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn numeric_matches_exact_embedding() {
        let c = ctx();
        let r = 0.37;
        let pts = [Complex64::new(r, 0.0)];
        for n in 1..=5u32 {
            for k in 1..=7u32 {
                let exact = moebius_closed(c, 0, k, n).embed(&pts);
                let num = moebius_numeric(r, k, n);
                assert!((exact.re - num).abs() < 1e-12 && exact.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn smoothing_matrix_is_symmetric_positive() {
        let rep = smoothing_operator_spot(0.9, 40);
        assert!(rep.hermitian_deviation < 1e-13);
        assert!(rep.positive);
        // the truncated traces approach the spectral sums from below
        assert!(rep.trace <= rep.trace_target + 1e-9);
        assert!(rep.trace_square <= rep.trace_square_target + 1e-9);
    }

    #[test]
    fn norm_estimate_within_tolerance() {
        // three slots with mixed weights, three mode energies
        let norms = [1.0, 2.0, 4.0];
        let rep = norm_estimate_sample(&norms, 3, 20, 2, 6.0, 0.1, 7);
        assert_eq!(rep.tuples, 20);
        assert!(rep.all_within, "max ratio {}", rep.max_ratio);
    }
}
