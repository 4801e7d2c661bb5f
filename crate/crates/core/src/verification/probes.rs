//! Deterministic invariant probes on random fields.
//!
//! Each probe draws its fields from a counter-based stream keyed by
//! `(seed, probe id)`, so results do not depend on the order probes run in.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::basis::{build_basis, BasisSpec, Domain};
use crate::dynamics::{constrained_rhs, drift_strat, nonlinearity_f, ModelParams};
use crate::error::Result;
use crate::field::{from_grid, SpectralField};
use crate::geometry::{ito_correction_unchecked, project_tangent, tangent_unchecked, NoiseModel};
use crate::rng::CounterRng;
use crate::sampling::{random_field, random_unit_field, random_v_ball_field};
use crate::verification::defect::{commutation_defect, defect_decay};
use crate::verification::report::{EstimateReport, ReportEntry, Verdict};

pub const DEFAULT_SAMPLES: usize = 1000;
/// Power-law decay of random probe coefficients.
const DECAY: f64 = 2.0;
/// Safety factor on Lipschitz constants that are not given explicitly.
pub const LIPSCHITZ_SAFETY: f64 = 4.0;

pub const PRJ_TOL: f64 = 1e-10;
pub const TANGENCY_TOL: f64 = 1e-12;
pub const FD_REL_TOL: f64 = 1e-6;
pub const FD_EPS: f64 = 1e-5;

fn rng(seed: u64, probe: u64) -> CounterRng {
    CounterRng::with_coords(seed, &[0x5052_4f42, probe])
}

fn max_entry(label: &str, value: f64) -> ReportEntry {
    ReportEntry::exact(label, value)
}

fn report(key: &str, entries: Vec<ReportEntry>, ok: bool, seed: u64) -> EstimateReport {
    EstimateReport::new(key, entries, Verdict::from_pass(ok), seed)
}

/// `|pi_u(-Au - a u - u^(2n-1)) - (-Au + F(u))|` for `a` in `{0, 1, 7.3}`.
pub fn projection_identity(basis: &Arc<BasisSpec>, n_exp: u32, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 1);
    let a_values = [0.0, 1.0, 7.3];
    let mut worst = [0.0f64; 3];
    for _ in 0..samples {
        let u = random_unit_field(basis, &mut r, DECAY);
        let closed = drift_strat(&u, &ModelParams { n_exp, a: 0.0 })?;
        for (w, &a) in worst.iter_mut().zip(&a_values) {
            let direct = constrained_rhs(&u, &ModelParams { n_exp, a })?;
            *w = w.max(direct.sub(&closed).l2_norm());
        }
    }
    let ok = worst.iter().all(|w| *w <= PRJ_TOL);
    let entries = a_values
        .iter()
        .zip(worst)
        .map(|(a, w)| max_entry(&format!("a={a}"), w))
        .collect();
    Ok(report("prj-identity", entries, ok, seed))
}

/// `|<-Au + F(u), u>|` on the sphere.
pub fn drift_tangency(basis: &Arc<BasisSpec>, n_exp: u32, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = random_unit_field(basis, &mut r, DECAY);
        worst = worst.max(drift_strat(&u, &ModelParams { n_exp, a: 1.0 })?.inner(&u).abs());
    }
    Ok(report("drift-tangency", vec![max_entry("max", worst)], worst <= PRJ_TOL, seed))
}

/// Tangency of `B_k(u)` and `pi_u(h)`, and idempotence of `pi_u`.
pub fn tangency(basis: &Arc<BasisSpec>, noise: &NoiseModel, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 3);
    let (mut b_tan, mut pi_tan, mut idem) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let u = random_unit_field(basis, &mut r, DECAY);
        let h = random_field(basis, &mut r, DECAY);
        for f in noise.directions() {
            b_tan = b_tan.max(tangent_unchecked(&u, f).inner(&u).abs());
        }
        let p = project_tangent(&u, &h)?;
        pi_tan = pi_tan.max(p.inner(&u).abs());
        idem = idem.max(project_tangent(&u, &p)?.sub(&p).l2_norm());
    }
    let ok = b_tan <= TANGENCY_TOL && pi_tan <= TANGENCY_TOL && idem <= TANGENCY_TOL;
    Ok(report(
        "tangency",
        vec![max_entry("B_k", b_tan), max_entry("pi_u", pi_tan), max_entry("idempotence", idem)],
        ok,
        seed,
    ))
}

/// Relative error of `m_k` against the central difference of `B_k` along `B_k(u)`.
pub fn ito_correction_fd(basis: &Arc<BasisSpec>, noise: &NoiseModel, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 4);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = random_unit_field(basis, &mut r, DECAY);
        for f in noise.directions() {
            let b = tangent_unchecked(&u, f);
            let m = ito_correction_unchecked(&u, f);
            let mut up = u.clone();
            up.axpy(FD_EPS, &b);
            let mut dn = u.clone();
            dn.axpy(-FD_EPS, &b);
            let fd = tangent_unchecked(&up, f).sub(&tangent_unchecked(&dn, f)).scaled(0.5 / FD_EPS);
            let scale = m.l2_norm();
            if scale > 1e-12 {
                worst = worst.max(fd.sub(&m).l2_norm() / scale);
            }
        }
    }
    Ok(report("ito-correction-fd", vec![max_entry("max_rel_error", worst)], worst <= FD_REL_TOL, seed))
}

/// Half the pairs are independent, half are close, so both the global and the
/// local Lipschitz ratio are sampled.
fn random_pair(basis: &Arc<BasisSpec>, r: &mut CounterRng, i: usize) -> (SpectralField, SpectralField) {
    let u = random_v_ball_field(basis, r, DECAY, 2.0);
    let v = if i.is_multiple_of(2) {
        random_v_ball_field(basis, r, DECAY, 2.0)
    } else {
        let mut v = u.clone();
        let d = random_v_ball_field(basis, r, DECAY, 1e-3);
        v.axpy(1.0, &d);
        let nv = v.norms().v();
        if nv > 2.0 {
            v.scale(2.0 / nv);
        }
        v
    };
    (u, v)
}

/// `|B_k(u) - B_k(v)|_V <= |f_k|_V (|u|_V + |v|_V) |u - v|_V`, with safety factor 4.
pub fn lipschitz_b(basis: &Arc<BasisSpec>, noise: &NoiseModel, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 5);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let (u, v) = random_pair(basis, &mut r, i);
        let (nu, nv, duv) = (u.norms().v(), v.norms().v(), u.sub(&v).norms().v());
        for f in noise.directions() {
            let nf = f.norms().v();
            if nf == 0.0 || duv == 0.0 {
                continue;
            }
            let lhs = tangent_unchecked(&u, f).sub(&tangent_unchecked(&v, f)).norms().v();
            worst = worst.max(lhs / (nf * (nu + nv) * duv));
        }
    }
    let ok = worst.is_finite() && worst <= LIPSCHITZ_SAFETY;
    Ok(report("lipschitz-B", vec![max_entry("max_ratio", worst)], ok, seed))
}

/// `|m_k(u) - m_k(v)|_V / (|f_k|_V^2 [2 + |u|_V^2 + |v|_V^2 + (|u|_V + |v|_V)^2] |u - v|_V)`.
pub fn lipschitz_m(basis: &Arc<BasisSpec>, noise: &NoiseModel, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 6);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let (u, v) = random_pair(basis, &mut r, i);
        let (nu, nv, duv) = (u.norms().v(), v.norms().v(), u.sub(&v).norms().v());
        for f in noise.directions() {
            let nf = f.norms().v();
            if nf == 0.0 || duv == 0.0 {
                continue;
            }
            let lhs = ito_correction_unchecked(&u, f)
                .sub(&ito_correction_unchecked(&v, f))
                .norms()
                .v();
            let rhs = nf * nf * (2.0 + nu * nu + nv * nv + (nu + nv).powi(2)) * duv;
            worst = worst.max(lhs / rhs);
        }
    }
    let ok = worst.is_finite() && worst <= LIPSCHITZ_SAFETY;
    Ok(report("lipschitz-m", vec![max_entry("max_ratio", worst)], ok, seed))
}

/// Growth form for the Lipschitz bound of `F` on V-balls: every term of `F`
/// is a polynomial of degree at most `max(3, 2n+1)` in `u`.
pub fn f_growth(n_exp: u32, a: f64, b: f64) -> f64 {
    (1.0 + a + b).powi((2 * n_exp as i32).max(2))
}

/// `|F(u) - F(v)|_{L2} / |u - v|_V <= C G(|u|_V, |v|_V)` with `C` fitted on
/// the first half of the pairs and checked, times 4, on the second half.
pub fn lipschitz_f(basis: &Arc<BasisSpec>, n_exp: u32, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 7);
    let params = ModelParams { n_exp, a: 1.0 };
    let half = samples / 2;
    let (mut fitted, mut held, mut raw) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..samples {
        let (u, v) = random_pair(basis, &mut r, i);
        let duv = u.sub(&v).norms().v();
        if duv == 0.0 {
            continue;
        }
        let ratio = nonlinearity_f(&u, &params)?.sub(&nonlinearity_f(&v, &params)?).l2_norm() / duv;
        raw = raw.max(ratio);
        let scaled = ratio / f_growth(n_exp, u.norms().v(), v.norms().v());
        if i < half {
            fitted = fitted.max(scaled);
        } else {
            held = held.max(scaled);
        }
    }
    let ok = raw.is_finite() && held <= LIPSCHITZ_SAFETY * fitted;
    Ok(report(
        "lipschitz-F",
        vec![
            max_entry("max_ratio", raw),
            max_entry("fitted_C", fitted),
            max_entry("heldout_C", held),
        ],
        ok,
        seed,
    ))
}

/// `c1 |Au|_V <= |u|_{D(A)} <= c2 |Au|_V` with `c1 = 1/sqrt(1 + 1/mu_1^2)`,
/// `c2 = sqrt(1 + 1/mu_1^2)`, and the chain `|u| <= |u|_V <= |u|_{D(A)}`.
pub fn norm_equivalence(basis: &Arc<BasisSpec>, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 8);
    let mu1 = basis.mu()[0];
    let c2 = (1.0 + 1.0 / (mu1 * mu1)).sqrt();
    let c1 = 1.0 / c2;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut chain = true;
    for _ in 0..samples {
        let u = random_field(basis, &mut r, DECAY);
        let n = u.norms();
        let au_v = u.apply_a().norms().v();
        let q = n.da() / au_v;
        lo = lo.min(q);
        hi = hi.max(q);
        chain &= n.l2() <= n.v() && n.v() <= n.da();
    }
    let slack = 1e-12;
    let ok = chain && lo >= c1 * (1.0 - slack) && hi <= c2 * (1.0 + slack);
    Ok(report(
        "norm-equivalence",
        vec![
            max_entry("min_ratio", lo),
            max_entry("c1", c1),
            max_entry("max_ratio", hi),
            max_entry("c2", c2),
        ],
        ok,
        seed,
    ))
}

/// Parseval against grid quadrature, grid round trip, and the projector laws.
pub fn spectral_consistency(basis: &Arc<BasisSpec>, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 9);
    let (mut parseval, mut round_trip, mut adjoint, mut idem, mut lin) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut monotone = true;
    let w = basis.cell_weight();
    for i in 0..samples {
        let u = random_unit_field(basis, &mut r, DECAY);
        let v = random_unit_field(basis, &mut r, DECAY);
        let g = u.to_grid();
        let quad: f64 = w * g.values().iter().map(|x| x * x).sum::<f64>();
        parseval = parseval.max((quad - u.l2_norm_sq()).abs());
        round_trip = round_trip.max(from_grid(&g)?.max_abs_diff(&u));
        let n = 1 + i % basis.dim();
        let zu = u.project(n)?;
        adjoint = adjoint.max((zu.inner(&v) - u.inner(&v.project(n)?)).abs());
        idem = idem.max(zu.project(n)?.max_abs_diff(&zu));
        let (a, b) = (zu.norms(), u.norms());
        monotone &= a.l2_sq <= b.l2_sq && a.v_sq <= b.v_sq && a.da_sq <= b.da_sq;
        let au = zu.apply_a();
        lin = lin.max(au.project(n)?.max_abs_diff(&au));
    }
    let ok = parseval <= 1e-14 && round_trip <= 1e-12 && adjoint <= 1e-14 && idem == 0.0 && lin == 0.0 && monotone;
    Ok(report(
        "spectral-consistency",
        vec![
            max_entry("parseval", parseval),
            max_entry("round_trip", round_trip),
            max_entry("projector_adjoint", adjoint),
            max_entry("projector_idempotence", idem),
            max_entry("linear_commutation", lin),
        ],
        ok,
        seed,
    ))
}

/// `F(0) = 0` and `F(-u) = -F(u)`.
pub fn f_oddness(basis: &Arc<BasisSpec>, n_exp: u32, samples: usize, seed: u64) -> Result<EstimateReport> {
    let mut r = rng(seed, 10);
    let p = ModelParams { n_exp, a: 1.0 };
    let zero = nonlinearity_f(&SpectralField::zeros(basis), &p)?.l2_norm();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = random_unit_field(basis, &mut r, DECAY);
        worst = worst.max(nonlinearity_f(&u, &p)?.add(&nonlinearity_f(&u.scaled(-1.0), &p)?).l2_norm());
    }
    Ok(report(
        "F-odd",
        vec![max_entry("F(0)", zero), max_entry("max_odd_defect", worst)],
        zero == 0.0 && worst <= 1e-12,
        seed,
    ))
}

/// `|(I - Z_2) F(e_1)|` on `(0, pi)`: `1/(2 pi)` for the cubic power, `0` for the linear one.
pub fn ground_state_defect(seed: u64) -> Result<EstimateReport> {
    let b = Arc::new(build_basis(Domain::unit_interval_pi(), 8, 64)?);
    let e1 = SpectralField::basis_function(&b, 1)?;
    let cubic = commutation_defect(&e1, 2, &ModelParams { n_exp: 2, a: 1.0 })?;
    let linear = commutation_defect(&e1, 2, &ModelParams { n_exp: 1, a: 1.0 })?;
    let expected = 1.0 / (2.0 * PI);
    Ok(report(
        "commutation-defect",
        vec![
            max_entry("n_exp=2", cubic),
            max_entry("expected", expected),
            max_entry("n_exp=1", linear),
        ],
        (cubic - expected).abs() <= 1e-10 && linear == 0.0,
        seed,
    ))
}

/// The full deterministic suite on the basis, model and noise of a run.
pub fn deterministic_suite(
    basis: &Arc<BasisSpec>,
    params: &ModelParams,
    noise: &NoiseModel,
    samples: usize,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    let n = params.n_exp;
    let mut out = vec![
        projection_identity(basis, n, samples, seed)?,
        drift_tangency(basis, n, samples, seed)?,
        tangency(basis, noise, samples, seed)?,
        ito_correction_fd(basis, noise, samples, seed)?,
        lipschitz_b(basis, noise, samples, seed)?,
        lipschitz_m(basis, noise, samples, seed)?,
        lipschitz_f(basis, n, samples, seed)?,
        norm_equivalence(basis, samples, seed)?,
        spectral_consistency(basis, samples, seed)?,
        f_oddness(basis, n, samples, seed)?,
        ground_state_defect(seed)?,
    ];
    let cubic = ModelParams { n_exp: n.max(2), a: 1.0 };
    let mut decay = defect_decay(basis.domain(), &cubic, &[1, 2, 4, 8])?;
    decay.seed = seed;
    out.push(decay);
    Ok(out)
}
