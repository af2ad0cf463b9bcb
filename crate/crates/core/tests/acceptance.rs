//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. Run with `cargo test -p scissorsim-core --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scissorsim_core::measurement::{measure_distribution, Detector};
use scissorsim_core::optics::apply_all;
use scissorsim_core::oracle;
use scissorsim_core::protocols::closed_form_fidelity;
use scissorsim_core::verify::{enumerated_true_false, random_circuit, random_state};
use scissorsim_core::{
    run_scissors, teleport_qudit, teleport_qudit_to_basis, BeamSplitter, Element, FockState, ModeId, ModeRegistry,
    ModeRole, QuditVector, Teleporter,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn eta_grid() -> impl Iterator<Item = f64> {
    (1..=10).map(|k| f64::from(k) / 10.0)
}

fn ac1_scissors_truncation() -> Outcome {
    let alphas = [c(0.5f64.sqrt()), c(0.3f64.sqrt()), c(0.2f64.sqrt())];
    let mut best = Duration::MAX;
    let mut report = None;
    for _ in 0..20 {
        let t = Instant::now();
        report = Some(run_scissors(&alphas, 1.0).unwrap());
        best = best.min(t.elapsed());
    }
    let r = report.unwrap();
    let d1 = r.patterns.iter().find(|p| p.clicks["D1"] == 1).unwrap();
    let out = r.output_amplitudes.clone().unwrap();
    let n = 0.8f64.sqrt();
    let out_dev = (out[0] - c(0.5f64.sqrt() / n))
        .norm()
        .max((out[1] - c(0.3f64.sqrt() / n)).norm());

    // same circuit through the dense oracle
    let mut reg = ModeRegistry::new();
    let a = reg.add("a", ModeRole::AncillaA, "A", "").unwrap();
    let b = reg.add("b", ModeRole::OutputB, "B", "").unwrap();
    let cm = reg.add("c", ModeRole::InputC, "C", "").unwrap();
    let input = FockState::from_components(
        Arc::new(reg),
        3,
        alphas.iter().enumerate().map(|(k, &amp)| (vec![1, 0, k as u32], amp)),
    )
    .unwrap();
    let circuit: [Element; 2] = [
        BeamSplitter::balanced(a, b).unwrap().into(),
        BeamSplitter::balanced(a, cm).unwrap().into(),
    ];
    let table = oracle::enumerate_outcomes(&circuit, &input, &[a, cm]).unwrap();
    let oracle_d1 = table[&vec![1, 0]].probability;
    let oracle_d2 = table[&vec![0, 1]].probability;
    let cond = &table[&vec![1, 0]].conditional;
    let ratio = cond[&vec![1]] / cond[&vec![0]];

    ensure(
        (d1.announcement_probability - 0.2).abs() <= 1e-12
            && (r.success_probability - 0.4).abs() <= 1e-12
            && (oracle_d1 - 0.2).abs() <= 1e-12
            && (oracle_d2 - 0.2).abs() <= 1e-12
            && (ratio - c((0.3f64 / 0.5).sqrt())).norm() <= 1e-12
            && out_dev <= 1e-12
            && best < Duration::from_millis(1),
        format!(
            "P(D1)={:.15} total={:.15} oracle P(D1)={oracle_d1:.15} output dev={out_dev:.1e} runtime={best:?}",
            d1.announcement_probability, r.success_probability
        ),
    )
}

fn ac2_transfer_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let start = Instant::now();
    let (mut amp_dev, mut succ_dev, mut pattern_dev) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut pattern_counts_ok = true;
    for d in 1..=4 {
        let tele = Teleporter::new(d).unwrap();
        for _ in 0..200 {
            let q = QuditVector::haar(d, &mut rng).unwrap();
            let r = tele.run(&q, 1.0).unwrap();
            succ_dev = succ_dev.max((r.success_probability - 0.5f64.powi(d as i32)).abs());
            let transferred = r.transferred_amplitudes().unwrap();
            pattern_counts_ok &= transferred.len() == 1 << d && r.per_pattern.len() == 1 << d;
            for p in &r.per_pattern {
                pattern_dev = pattern_dev.max((p.success_probability - 0.25f64.powi(d as i32)).abs());
            }
            for (_, out) in transferred {
                amp_dev = amp_dev.max(q.deviation_up_to_phase(out.gammas()));
            }
        }
    }
    let elapsed = start.elapsed();

    // dense-oracle cross-check of the per-pattern output for d ≤ 3
    let mut oracle_dev = 0.0_f64;
    for d in 1..=3 {
        let tele = Teleporter::new(d).unwrap();
        let measured: Vec<ModeId> = tele.detectors().iter().flat_map(|det| det.modes.clone()).collect();
        for _ in 0..5 {
            let q = QuditVector::haar(d, &mut rng).unwrap();
            let init = tele.initial_state(&q).unwrap();
            let init = FockState::from_components(
                init.registry().clone(),
                d as u32 + 1,
                init.components().map(|(o, a)| (o.0.clone(), *a)),
            )
            .unwrap();
            let table = oracle::enumerate_outcomes(tele.elements(), &init, &measured).unwrap();
            for pat in tele.accepted_patterns() {
                let outcome = &table[&pat.0];
                oracle_dev = oracle_dev.max((outcome.probability - 0.25f64.powi(d as i32)).abs());
                let mut gammas = vec![Complex64::default(); d];
                for (rest, amp) in &outcome.conditional {
                    let j = rest.iter().position(|&n| n == 1).unwrap();
                    let sign = if pat.clicks(2 * j + 1) == 1 { -1.0 } else { 1.0 };
                    gammas[j] = amp * sign;
                }
                let norm = gammas.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
                let gammas: Vec<Complex64> = gammas.iter().map(|g| g / norm).collect();
                oracle_dev = oracle_dev.max(q.deviation_up_to_phase(&gammas));
            }
        }
    }

    ensure(
        amp_dev <= 1e-10
            && succ_dev <= 1e-12
            && pattern_dev <= 1e-12
            && pattern_counts_ok
            && oracle_dev <= 1e-10
            && elapsed < Duration::from_secs(10),
        format!(
            "d=1..4 x200: max|Δγ|={amp_dev:.1e} max|Δsuccess|={succ_dev:.1e} max|Δpattern|={pattern_dev:.1e} oracle dev={oracle_dev:.1e} runtime={elapsed:?}"
        ),
    )
}

fn ac3_efficiency_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0_f64;
    let mut enum_worst = 0.0_f64;
    for d in 1..=3 {
        let tele = Teleporter::new(d).unwrap();
        let q = QuditVector::haar(d, &mut rng).unwrap();
        for eta in eta_grid() {
            let r = tele.run(&q, eta).unwrap();
            worst = worst.max((r.success_probability - (eta / 2.0).powi(d as i32)).abs());
            if d <= 2 {
                let (p_true, _) = enumerated_true_false(&tele, &q, eta).unwrap();
                enum_worst = enum_worst.max((p_true - (eta / 2.0).powi(d as i32)).abs());
            }
        }
    }
    ensure(
        worst <= 1e-12 && enum_worst <= 1e-12,
        format!("max|success − (η/2)^d|={worst:.1e} enumerated={enum_worst:.1e}"),
    )
}

fn ac4_false_announcement() -> Outcome {
    let tele = Teleporter::new(1).unwrap();
    let q = QuditVector::basis(1, 0).unwrap();
    let (mut report_dev, mut enum_dev) = (0.0_f64, 0.0_f64);
    for eta in eta_grid() {
        let r = tele.run(&q, eta).unwrap();
        report_dev = report_dev.max((r.false_announcement_probability - eta * (1.0 - eta)).abs());
        let (_, p_false) = enumerated_true_false(&tele, &q, eta).unwrap();
        enum_dev = enum_dev.max((p_false - eta * (1.0 - eta)).abs());
    }
    let r = tele.run(&q, 0.8).unwrap();
    let example_ok = (r.success_probability - 0.4).abs() <= 1e-12
        && (r.false_announcement_probability - 0.16).abs() <= 1e-12
        && (r.paper_fidelity - 0.84).abs() <= 1e-12
        && (r.conditional_fidelity.unwrap() - 0.4 / 0.56).abs() <= 1e-12;

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut two_dev = 0.0_f64;
    let mut scaling = Vec::new();
    for d in 1..=3 {
        let q = QuditVector::haar(d, &mut rng).unwrap();
        let r = teleport_qudit(&q, d, 1.0).unwrap();
        two_dev = two_dev.max((r.two_photon_event_probability - 0.5).abs());
        let lossy = teleport_qudit(&q, d, 0.8).unwrap();
        scaling.push(format!("d={d}:{:.4}", lossy.false_announcement_probability));
    }
    ensure(
        report_dev <= 1e-12 && enum_dev <= 1e-12 && two_dev <= 1e-12 && example_ok,
        format!(
            "d=1 max|P_false − η(1−η)|={report_dev:.1e} enumerated={enum_dev:.1e} max|P_2 − 1/2|={two_dev:.1e} P_false(η=0.8) {}",
            scaling.join(" ")
        ),
    )
}

fn ac5_fidelity_figures() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut cond_dev, mut ideal_dev) = (0.0_f64, 0.0_f64);
    for d in 1..=2 {
        let tele = Teleporter::new(d).unwrap();
        let q = QuditVector::haar(d, &mut rng).unwrap();
        for eta in eta_grid() {
            let r = tele.run(&q, eta).unwrap();
            let (t, f) = enumerated_true_false(&tele, &q, eta).unwrap();
            let cf = r.conditional_fidelity.unwrap();
            cond_dev = cond_dev.max((cf - t / (t + f)).abs());
            if eta == 1.0 {
                ideal_dev = ideal_dev.max((cf - 1.0).abs());
            }
        }
    }
    let r = teleport_qudit(&QuditVector::basis(1, 0).unwrap(), 1, 0.9).unwrap();
    let closed_ok = (r.paper_fidelity - 0.91).abs() <= 1e-12 && (closed_form_fidelity(0.8) - 0.84).abs() <= 1e-12;
    ensure(
        cond_dev <= 1e-12 && ideal_dev <= 1e-12 && closed_ok,
        format!(
            "closed form(0.9)={:.4} conditional(0.9)={:.4} max|F_cond − P_true/(P_true+P_false)|={cond_dev:.1e} |F(η=1) − 1|={ideal_dev:.1e}",
            r.paper_fidelity,
            r.conditional_fidelity.unwrap()
        ),
    )
}

fn ac6_basis_change() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst = 0.0_f64;
    let mut degenerate = true;
    for d in 1..=3 {
        let target: Vec<String> = (0..d).map(|i| format!("HG:{i},0")).collect();
        for _ in 0..10 {
            let q = QuditVector::haar(d, &mut rng).unwrap();
            let r = teleport_qudit_to_basis(&q, d, 1.0, &target).unwrap();
            worst = worst.max((r.conditional_fidelity.unwrap() - 1.0).abs());
        }
        let same: Vec<String> = (0..d).map(|i| format!("OAM:{i}")).collect();
        let q = QuditVector::haar(d, &mut rng).unwrap();
        for eta in [1.0, 0.6] {
            degenerate &= teleport_qudit_to_basis(&q, d, eta, &same).unwrap() == teleport_qudit(&q, d, eta).unwrap();
        }
    }
    ensure(
        worst <= 1e-10 && degenerate,
        format!("max|F − 1|={worst:.1e} degenerate case identical={degenerate}"),
    )
}

fn ac7_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let modes = rng.random_range(2..=5);
        let photons = rng.random_range(1..=3);
        let input = random_state(&mut rng, modes, photons).unwrap();
        let circuit = random_circuit(&mut rng, modes).unwrap();
        let sparse = apply_all(&input, &circuit).unwrap();
        let dense = oracle::dense_evolve(&circuit, &input).unwrap();
        worst = worst.max(dense.max_abs_diff(&sparse));
    }
    let mut reg = ModeRegistry::new();
    let m0 = reg.add("x", ModeRole::Other, "X", "").unwrap();
    let m1 = reg.add("y", ModeRole::Other, "Y", "").unwrap();
    let pair = FockState::from_components(Arc::new(reg), 2, [(vec![1, 1], c(1.0))]).unwrap();
    let bs: Element = BeamSplitter::balanced(m0, m1).unwrap().into();
    let sparse = bs.apply(&pair).unwrap();
    let dense = oracle::dense_evolve(std::slice::from_ref(&bs), &pair).unwrap();
    let h = FRAC_1_SQRT_2;
    let hom: BTreeMap<Vec<u32>, Complex64> = [(vec![2, 0], c(h)), (vec![0, 2], c(-h))].into();
    let mut hom_dev = 0.0_f64;
    for occ in [vec![2, 0], vec![1, 1], vec![0, 2]] {
        let expected = hom.get(&occ).copied().unwrap_or_default();
        hom_dev = hom_dev
            .max((sparse.amplitude(&occ) - expected).norm())
            .max((dense.amplitude(&occ) - expected).norm());
    }
    ensure(
        worst <= 1e-10 && hom_dev <= 1e-12,
        format!("100 circuits max|Δamp|={worst:.1e} HOM dev={hom_dev:.1e}"),
    )
}

fn ac8_property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut norm_dev, mut complete_dev, mut linear_dev) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut conserved = true;
    for _ in 0..150 {
        let modes = rng.random_range(2..=5);
        let photons = rng.random_range(1..=3);
        let s = random_state(&mut rng, modes, photons).unwrap();
        let out = apply_all(&s, &random_circuit(&mut rng, modes).unwrap()).unwrap();
        norm_dev = norm_dev.max((out.norm_sqr() - 1.0).abs());
        for n in 0..=photons {
            let sector = |st: &FockState| -> f64 {
                st.components()
                    .filter(|(o, _)| o.total() == n)
                    .map(|(_, a)| a.norm_sqr())
                    .sum()
            };
            conserved &= (sector(&s) - sector(&out)).abs() <= 1e-12;
        }
        conserved &= out.components().all(|(o, _)| o.total() <= photons);

        let eta = rng.random_range(0.0..=1.0);
        let dets: Vec<Detector> = (0..modes)
            .map(|m| Detector::new(format!("D{m}"), vec![ModeId(m)], eta).unwrap())
            .collect();
        let total: f64 = measure_distribution(&out, &dets).unwrap().values().sum();
        complete_dev = complete_dev.max((total - 1.0).abs());

        let t = random_state(&mut rng, modes, photons).unwrap();
        let t = FockState::from_components(
            s.registry().clone(),
            photons,
            t.components().map(|(o, a)| (o.0.clone(), *a)),
        )
        .unwrap();
        let alpha = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let beta = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mode = ModeId(rng.random_range(0..modes));
        let combo = s.scaled(alpha).add(&t.scaled(beta)).unwrap();
        let lhs = combo.annihilate(mode).unwrap();
        let rhs = s
            .annihilate(mode)
            .unwrap()
            .scaled(alpha)
            .add(&t.annihilate(mode).unwrap().scaled(beta))
            .unwrap();
        linear_dev = linear_dev.max(lhs.max_abs_diff(&rhs).unwrap());
        let u = s.inner(&combo).unwrap();
        let v = s.inner(&s).unwrap() * alpha + s.inner(&t).unwrap() * beta;
        linear_dev = linear_dev.max((u - v).norm());
        let circuit = random_circuit(&mut rng, modes).unwrap();
        let lhs = apply_all(&combo, &circuit).unwrap();
        let rhs = apply_all(&s, &circuit)
            .unwrap()
            .scaled(alpha)
            .add(&apply_all(&t, &circuit).unwrap().scaled(beta))
            .unwrap();
        linear_dev = linear_dev.max(lhs.max_abs_diff(&rhs).unwrap());
    }
    ensure(
        norm_dev <= 1e-12 && conserved && complete_dev <= 1e-12 && linear_dev <= 1e-12,
        format!(
            "150 instances: max|Δnorm|={norm_dev:.1e} conserved={conserved} max|Σp − 1|={complete_dev:.1e} linearity={linear_dev:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("AC1 scissors truncation", ac1_scissors_truncation),
        ("AC2 qudit transfer identity", ac2_transfer_identity),
        ("AC3 efficiency scaling", ac3_efficiency_scaling),
        ("AC4 false announcement", ac4_false_announcement),
        ("AC5 fidelity figures", ac5_fidelity_figures),
        ("AC6 basis-change teleportation", ac6_basis_change),
        ("AC7 oracle equivalence", ac7_oracle_equivalence),
        ("AC8 property suites", ac8_property_suites),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
