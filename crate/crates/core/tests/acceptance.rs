//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero when any criterion fails.

mod common;

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use catswap::cli::{distance_table, oracle_check, DEFAULT_ATTENUATION};
use catswap::fock_oracle::OracleConfig;
use catswap::metrics::{
    bell_state, fidelity, homodyne_success_probability, vacuum_success_probability, BellSign,
};
use catswap::optics::{apply_balanced_bs, apply_lossy_bs, project_homodyne_point};
use catswap::protocol::modes::D;
use catswap::protocol::{
    post_vacuum_state, run_es_averaged, run_es_fixed, GaussianLossSpec, HeraldedOutcome,
    HomodyneSpec, Peak, ProtocolParams,
};
use catswap::states::{inner_product, CoherentTerm, ComplexAmp, ModeId, PureState, Registry};
use common::equal_loss_hand_expansion;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn f_sign(out: &HeraldedOutcome, alpha: f64, sign: BellSign) -> f64 {
    fidelity(&out.rho, &bell_state(alpha, sign)).unwrap()
}

fn ideal_plateau() -> Verdict {
    let start = Instant::now();
    let mut worst = (f64::INFINITY, 0.0);
    for alpha in grid(2.3, 4.0, 0.025) {
        let out = run_es_fixed(&ProtocolParams::new(alpha, 1.0)).unwrap();
        let f = f_sign(&out, alpha, BellSign::Plus);
        if f < worst.0 {
            worst = (f, alpha);
        }
    }
    let took = start.elapsed();
    verdict(
        worst.0 >= 0.999 && took < Duration::from_secs(10),
        format!(
            "min F+ = {:.6} at alpha = {:.3}; {:.2?}",
            worst.0, worst.1, took
        ),
    )
}

fn mixed_state_limit() -> Verdict {
    let out = run_es_fixed(&ProtocolParams::new(4.0, 0.95)).unwrap();
    let (fp, fm) = (
        f_sign(&out, 4.0, BellSign::Plus),
        f_sign(&out, 4.0, BellSign::Minus),
    );
    verdict(
        (fp - 0.5).abs() <= 0.02 && (fm - 0.5).abs() <= 0.02,
        format!("F+ = {fp:.4}, F- = {fm:.4}"),
    )
}

fn double_peak() -> Verdict {
    let alphas = grid(0.25, 3.5, 0.025);
    let f: Vec<f64> = alphas
        .iter()
        .map(|&a| {
            f_sign(
                &run_es_fixed(&ProtocolParams::new(a, 0.97)).unwrap(),
                a,
                BellSign::Plus,
            )
        })
        .collect();
    let maxima: Vec<String> = (1..f.len() - 1)
        .filter(|&i| f[i] > f[i - 1] && f[i] > f[i + 1])
        .map(|i| format!("{:.3}@{:.3}", f[i], alphas[i]))
        .collect();
    verdict(
        maxima.len() >= 2,
        format!("local maxima {}", maxima.join(", ")),
    )
}

fn averaged_peak(width: f64) -> (f64, f64) {
    grid(0.025, 4.0, 0.025)
        .into_iter()
        .map(|a| {
            let spec = GaussianLossSpec::new(width, 32, 1.0);
            let out = run_es_averaged(&ProtocolParams::new(a, 1.0), &spec).unwrap();
            (f_sign(&out, a, BellSign::Plus), a)
        })
        .fold(
            (f64::NEG_INFINITY, 0.0),
            |m, p| if p.0 > m.0 { p } else { m },
        )
}

fn unequal_loss() -> Verdict {
    let (f5, a5) = averaged_peak(0.05);
    let (f10, a10) = averaged_peak(0.10);
    verdict(
        f5 >= 0.80 && f10 < f5,
        format!("peak F+ {f5:.4}@{a5:.3} (0.05), {f10:.4}@{a10:.3} (0.10)"),
    )
}

fn vacuum_probability() -> Verdict {
    let p0 = vacuum_success_probability(&ProtocolParams::new(0.0, 1.0)).unwrap();
    let p25 = vacuum_success_probability(&ProtocolParams::new(2.5, 1.0)).unwrap();
    verdict(
        (p0 - 1.0).abs() <= 1e-6 && (p25 - 0.25).abs() <= 0.01,
        format!("P0(0) = {p0:.8}, P0(2.5) = {p25:.5}"),
    )
}

fn homodyne_probability() -> Verdict {
    let p = |alpha: f64, dx: f64| {
        homodyne_success_probability(&ProtocolParams::new(alpha, 1.0).with_dx(dx), None).unwrap()
    };
    let wide = p(1.5, 5.0);
    let narrow: Vec<(f64, f64)> = [1.0, 1.5, 2.0]
        .into_iter()
        .map(|a| (a, p(a, 0.25)))
        .collect();
    let pass =
        (wide - 1.0).abs() <= 1e-3 && narrow.iter().all(|&(_, v)| (0.08..=0.17).contains(&v));
    let listed: Vec<String> = narrow.iter().map(|(a, v)| format!("{v:.4}@{a}")).collect();
    verdict(
        pass,
        format!("P(dx=5) = {wide:.6}; P(dx=0.25) = {}", listed.join(", ")),
    )
}

fn homodyne_continuity() -> Verdict {
    let ideal = run_es_fixed(&ProtocolParams::new(1.5, 1.0)).unwrap();
    let banded = run_es_fixed(&ProtocolParams::new(1.5, 1.0).with_dx(0.01)).unwrap();
    let d = ideal.rho.trace_distance(&banded.rho);
    verdict(d <= 1e-3, format!("trace distance {d:.3e}"))
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let checks = oracle_check(&OracleConfig::default()).unwrap();
    let took = start.elapsed();
    let td = checks.iter().map(|c| c.trace_distance).fold(0.0, f64::max);
    let dp = checks.iter().map(|c| c.p_vacuum_diff).fold(0.0, f64::max);
    verdict(
        checks.len() == 36 && td <= 1e-6 && dp <= 1e-8 && took < Duration::from_secs(300),
        format!(
            "{} points, max trace distance {td:.2e}, max |dP0| {dp:.2e}; {took:.2?}",
            checks.len()
        ),
    )
}

fn hand_expansion_anchor() -> Verdict {
    let (alpha, t) = (1.0, 0.95);
    let (vac, _) = post_vacuum_state(alpha, t, t).unwrap();
    let s = project_homodyne_point(&vac, D, FRAC_PI_4, t.sqrt() * alpha).unwrap();
    let lit = equal_loss_hand_expansion(alpha, t);
    let ov = inner_product(&s, &lit).unwrap().norm_sqr() / (s.squared_norm() * lit.squared_norm());
    verdict(
        ov >= 1.0 - 1e-10,
        format!("squared overlap 1 - {:.2e}", 1.0 - ov),
    )
}

const Q: ModeId = ModeId::dv("Q");
const S: ModeId = ModeId::cv("S");
const E: ModeId = ModeId::cv("E");

fn random_state() -> impl Strategy<Value = PureState> {
    let amp = |r: f64| (-r..r, -r..r).prop_map(|(a, b)| ComplexAmp::new(a, b));
    prop::collection::vec((0u8..2, amp(2.5), amp(2.5), amp(1.0)), 1..6)
        .prop_map(|terms| {
            let terms = terms
                .into_iter()
                .map(|(q, s, e, k)| CoherentTerm::new(vec![q], vec![s, e], k))
                .collect();
            PureState::new(Registry::new(vec![Q, S, E]).unwrap(), terms).unwrap()
        })
        .prop_filter("non-zero state", |s| s.squared_norm() > 1e-6)
}

fn random_params() -> impl Strategy<Value = ProtocolParams> {
    (
        0.0f64..4.0,
        0.84f64..=1.0,
        0.0f64..0.1,
        prop::option::of(0.01f64..5.0),
        prop::sample::select(vec![Peak::Plus, Peak::Minus, Peak::Both]),
    )
        .prop_map(|(alpha, t, u, dx, peak)| {
            let p = ProtocolParams::new(alpha, t)
                .with_upsilon(u)
                .with_peak(peak);
            dx.map_or(p, |dx| p.with_dx(dx))
        })
}

fn check_params(p: &ProtocolParams) -> Result<(), TestCaseError> {
    let out = run_es_fixed(p).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let rho = &out.rho;
    prop_assert!(
        rho.hermiticity_error() <= 1e-12,
        "hermiticity {:e}",
        rho.hermiticity_error()
    );
    prop_assert!((rho.trace().re - 1.0).abs() <= 1e-10 && rho.trace().im.abs() <= 1e-10);
    prop_assert!(
        rho.min_eigenvalue() >= -1e-9,
        "eigenvalue {:e}",
        rho.min_eigenvalue()
    );
    let sum = f_sign(&out, p.alpha, BellSign::Plus) + f_sign(&out, p.alpha, BellSign::Minus);
    prop_assert!(sum <= 1.0 + 1e-10, "F+ + F- = {sum}");
    let unit = 0.0..=1.0;
    prop_assert!(unit.contains(&out.p_vacuum), "P0 = {}", out.p_vacuum);
    if matches!(p.homodyne, HomodyneSpec::Banded { .. }) {
        let ph = homodyne_success_probability(p, None)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(unit.contains(&ph), "P_hom = {ph}");
    }
    Ok(())
}

fn check_splitters(s: &PureState, t: f64) -> Result<(), TestCaseError> {
    let n = s.squared_norm();
    for out in [
        apply_balanced_bs(s, S, E).unwrap(),
        apply_lossy_bs(s, S, E, t).unwrap(),
    ] {
        prop_assert!((out.squared_norm() - n).abs() <= 1e-12 * n.max(1.0));
    }
    Ok(())
}

fn property_suites() -> Verdict {
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    if let Err(e) = runner.run(&random_params(), |p| check_params(&p)) {
        return verdict(false, format!("protocol draws: {e}"));
    }
    if let Err(e) = runner.run(&(random_state(), 0.0f64..=1.0), |(s, t)| {
        check_splitters(&s, t)
    }) {
        return verdict(false, format!("beam splitter draws: {e}"));
    }
    verdict(
        true,
        format!("{cases} protocol draws, {cases} beam splitter draws"),
    )
}

fn distance_report() -> Verdict {
    let rows = distance_table(DEFAULT_ATTENUATION).unwrap();
    let expected = [(0.80, 3.0), (0.70, 7.5), (0.60, 10.5)];
    let mut pass = rows.len() == expected.len();
    let mut parts = Vec::new();
    for (row, (th, km)) in rows.iter().zip(expected) {
        pass &= (row.threshold - th).abs() < 1e-12 && (row.separation_km - km).abs() <= 0.5;
        parts.push(format!(
            "{th:.2} -> T = {:.4}, {:.2} km (want {km})",
            row.t, row.separation_km
        ));
    }
    verdict(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("ideal plateau", ideal_plateau),
        ("mixed-state limit", mixed_state_limit),
        ("double peak", double_peak),
        ("unequal loss", unequal_loss),
        ("vacuum success probability", vacuum_probability),
        ("homodyne success probability", homodyne_probability),
        ("imperfect homodyne continuity", homodyne_continuity),
        ("oracle equivalence", oracle_equivalence),
        ("hand-expanded state", hand_expansion_anchor),
        ("property suites", property_suites),
        ("distance report", distance_report),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
