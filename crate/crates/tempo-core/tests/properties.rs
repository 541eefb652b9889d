//! Module invariants beyond the acceptance criteria: logical
//! characterisations cross-checked against the relational algorithms by an
//! independent semantic route, order/monotonicity laws, and parser
//! round-trips.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tempo_core::accel::GridSpec;
use tempo_core::anomaly::{monotonic_bounded, path_bound_m, strong_monotonic};
use tempo_core::cdf::{Cdf, CompositionKind};
use tempo_core::fasterthan::faster_than_unambiguous;
use tempo_core::fixtures;
use tempo_core::ratio::{parse_rat, rat_frac, rat_from_int, rat_to_f64, rat_to_string, Ext, Rat};
use tempo_core::simdist::{bisimilar, eps_simulates, simulates_accelerated_copy};
use tempo_core::smp::{
    cylinder_prob, Scheduler, Smp, SmpKind, TimeBoundedCylinder,
};
use tempo_core::tml::reachability_prob;
use tempo_core::wlwb::parse_wlwb;
use tempo_core::wts::{gen_weighted_bisim, weighted_bisim, Wts};

fn grid() -> GridSpec<f64> {
    GridSpec::with_points(192)
}

// --- cylinder probabilities ---------------------------------------------------

#[test]
fn cylinder_prob_monotone_and_bounded_by_branch_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let m = random_reactive(&mut rng, 3, 2);
        let sigma = Scheduler::Memoryless {
            choice: (0..3)
                .map(|_| vec![(rat_frac(1, 2), 0), (rat_frac(1, 2), 1)])
                .collect(),
        };
        let word: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..2)).collect();
        let mut prev = 0.0;
        for t in [0.1, 0.5, 1.0, 2.0, 8.0, 64.0] {
            let cyl = TimeBoundedCylinder { word: word.clone(), bound: t };
            let p = cylinder_prob(&m, &sigma, 0, &cyl).unwrap();
            assert!(p + 1e-12 >= prev, "monotonicity in t broke");
            prev = p;
        }
        // the t -> inf limit is the total branch probability
        let huge = TimeBoundedCylinder { word: word.clone(), bound: 1e9 };
        let p_inf = cylinder_prob(&m, &sigma, 0, &huge).unwrap();
        assert!(prev <= p_inf + 1e-12);
    }
}

// --- the WLWB logical characterisation, by an independent semantic route ------

/// All unions of the blocks of the partition induced by the given
/// state-set vectors (the Boolean algebra they generate).
fn boolean_algebra(n: usize, generators: &BTreeSet<u32>) -> BTreeSet<u32> {
    // signature of each state across the generators
    let mut blocks: Vec<u32> = Vec::new();
    let mut sig_of: Vec<Vec<bool>> = vec![Vec::new(); n];
    for (s, sig) in sig_of.iter_mut().enumerate() {
        for g in generators {
            sig.push(g & (1 << s) != 0);
        }
    }
    let mut seen: Vec<Vec<bool>> = Vec::new();
    for (s, sig) in sig_of.iter().enumerate() {
        match seen.iter().position(|x| x == sig) {
            Some(i) => blocks[i] |= 1 << s,
            None => {
                seen.push(sig.clone());
                blocks.push(1 << s);
            }
        }
    }
    let k = blocks.len();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << k) {
        let mut union = 0u32;
        for (i, b) in blocks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                union |= b;
            }
        }
        out.insert(union);
    }
    out
}

/// Semantic enumeration of WLWB distinguishing power: alternate Boolean
/// closure with one modal layer (`L_r`/`M_r` over every set in the algebra,
/// constants drawn from the model's weights), three rounds deep.
fn wlwb_formula_partition(model: &Wts) -> Vec<u32> {
    let n = model.state_count();
    let mut constants: BTreeSet<Rat> = model
        .transitions()
        .iter()
        .map(|(_, w, _)| w.clone())
        .collect();
    constants.insert(rat_from_int(0));
    let mut generators: BTreeSet<u32> = BTreeSet::new();
    let mut atoms: BTreeSet<String> = BTreeSet::new();
    for s in 0..n {
        atoms.extend(model.labels_of(s).iter().cloned());
    }
    for a in &atoms {
        let mut mask = 0u32;
        for s in 0..n {
            if model.labels_of(s).contains(a) {
                mask |= 1 << s;
            }
        }
        generators.insert(mask);
    }
    let mut algebra = boolean_algebra(n, &generators);
    for _ in 0..3 {
        let mut next_gens: BTreeSet<u32> = algebra.clone();
        for target_mask in &algebra {
            let target: Vec<bool> = (0..n).map(|s| target_mask & (1 << s) != 0).collect();
            for r in &constants {
                let mut l_mask = 0u32;
                let mut m_mask = 0u32;
                for s in 0..n {
                    let (lo, hi) = model.image_bounds(s, &target);
                    if lo >= Ext::Fin(r.clone()) {
                        l_mask |= 1 << s;
                    }
                    if hi <= Ext::Fin(r.clone()) {
                        m_mask |= 1 << s;
                    }
                }
                next_gens.insert(l_mask);
                next_gens.insert(m_mask);
            }
        }
        algebra = boolean_algebra(n, &next_gens);
    }
    // the partition blocks of the final algebra, keyed by each state's full
    // membership signature
    let mut block_of = vec![0u32; n];
    let mut reps: Vec<Vec<bool>> = Vec::new();
    for (s, block) in block_of.iter_mut().enumerate() {
        let sig: Vec<bool> = algebra.iter().map(|mask| mask & (1 << s) != 0).collect();
        match reps.iter().position(|x| *x == sig) {
            Some(i) => *block = i as u32,
            None => {
                reps.push(sig);
                *block = (reps.len() - 1) as u32;
            }
        }
    }
    block_of
}

fn random_wts(rng: &mut ChaCha8Rng, n: usize) -> Wts {
    let mut w = Wts::new();
    for i in 0..n {
        let mut labels = BTreeSet::new();
        if rng.gen_bool(0.5) {
            labels.insert("p".to_string());
        }
        if rng.gen_bool(0.3) {
            labels.insert("q".to_string());
        }
        w.add_state(format!("s{i}"), labels);
    }
    let weights = [rat_from_int(1), rat_from_int(2), rat_from_int(3), rat_frac(1, 2)];
    for _ in 0..rng.gen_range(0..=(2 * n)) {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        let weight = weights[rng.gen_range(0..weights.len())].clone();
        w.add_transition(s, weight, t).unwrap();
    }
    w
}

#[test]
fn wlwb_formulas_characterise_generalized_bisimulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for i in 0..300 {
        let model = random_wts(&mut rng, 4);
        let logical = wlwb_formula_partition(&model);
        for s in 0..4 {
            for t in 0..4 {
                let relational = gen_weighted_bisim(&model, s, t);
                let agree = logical[s] == logical[t];
                assert_eq!(
                    relational, agree,
                    "instance {i}: states {s},{t}: refinement says {relational}, formulas say {agree}\n{}",
                    model.to_text()
                );
            }
        }
        // the exact bisimulation refines the bounds one
        for s in 0..4 {
            for t in 0..4 {
                if weighted_bisim(&model, s, t) {
                    assert!(gen_weighted_bisim(&model, s, t));
                }
            }
        }
    }
}

// --- simulation distance laws ---------------------------------------------------

fn random_reactive(rng: &mut ChaCha8Rng, n: usize, inputs: usize) -> Smp {
    let names: Vec<String> =
        (0..inputs).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let mut m = Smp::new(SmpKind::Reactive, names.clone(), names);
    for i in 0..n {
        let rate = (rng.gen_range(1..10) as f64) / 2.0;
        let labels = if rng.gen_bool(0.3) {
            ["odd".to_string()].into_iter().collect()
        } else {
            Default::default()
        };
        m.add_state(format!("q{i}"), Cdf::exponential(rate).unwrap(), labels);
    }
    for s in 0..n {
        for a in 0..inputs {
            match rng.gen_range(0..4) {
                0 => {}
                1 => {
                    let dst = rng.gen_range(0..n);
                    m.add_transition(s, a, rat_from_int(1), dst, a).unwrap();
                }
                _ => {
                    let d1 = rng.gen_range(0..n);
                    let d2 = rng.gen_range(0..n);
                    m.add_transition(s, a, rat_frac(1, 2), d1, a).unwrap();
                    m.add_transition(s, a, rat_frac(1, 2), d2, a).unwrap();
                }
            }
        }
    }
    m
}

#[test]
fn eps_simulation_agrees_with_the_accelerated_copy() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..150 {
        let m = random_reactive(&mut rng, 3, 1);
        let s1 = rng.gen_range(0..3);
        let s2 = rng.gen_range(0..3);
        let eps = 1.0 + rng.gen_range(0..8) as f64 / 4.0;
        let direct = eps_simulates(&m, s1, s2, eps, &grid()).unwrap();
        let via_copy = simulates_accelerated_copy(&m, s1, s2, eps, &grid()).unwrap();
        assert_eq!(direct, via_copy, "eps={eps}\n{}", m.to_text());
    }
}

#[test]
fn bisimilarity_is_two_way_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..200 {
        let m = random_reactive(&mut rng, 3, 2);
        for s in 0..3 {
            for t in 0..3 {
                let bis = bisimilar(&m, s, t, &grid()).unwrap();
                let both = eps_simulates(&m, s, t, 1.0, &grid()).unwrap()
                    && eps_simulates(&m, t, s, 1.0, &grid()).unwrap();
                assert_eq!(bis, both, "states {s},{t}\n{}", m.to_text());
            }
        }
    }
}

// --- TML: bisimulation characterisation and perturbation laws -------------------

/// Semantic TML distinguishing power on a reactive SMP: atoms, residence
/// bounds at pooled constants, probability bounds over the algebra.
fn tml_formula_partition(m: &Smp) -> Vec<u32> {
    let n = m.state_count();
    let mut times: Vec<f64> = (0..n).flat_map(|s| m.residence(s).critical_times()).collect();
    times.retain(|t| t.is_finite() && *t > 0.0);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    times.truncate(12);
    // probability thresholds: residence values at pooled times plus
    // transition masses, with midpoints
    let mut probs: Vec<f64> = Vec::new();
    for s in 0..n {
        for t in &times {
            probs.push(m.residence(s).eval(*t));
        }
        for a in 0..m.inputs.len() {
            for (p, _, _) in m.row(s, a) {
                probs.push(rat_to_f64(p));
            }
        }
    }
    probs.push(0.0);
    probs.push(1.0);
    probs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    probs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mids: Vec<f64> = probs.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    probs.extend(mids);

    let mut generators: BTreeSet<u32> = BTreeSet::new();
    let mut atoms: BTreeSet<String> = BTreeSet::new();
    for s in 0..n {
        atoms.extend(m.labels_of(s).iter().cloned());
    }
    for a in &atoms {
        let mut mask = 0u32;
        for s in 0..n {
            if m.labels_of(s).contains(a) {
                mask |= 1 << s;
            }
        }
        generators.insert(mask);
    }
    for t in &times {
        for p in &probs {
            let mut ell = 0u32;
            for s in 0..n {
                if m.residence(s).eval(*t) >= *p - 1e-12 {
                    ell |= 1 << s;
                }
            }
            generators.insert(ell);
        }
    }
    let mut algebra = boolean_algebra(n, &generators);
    for _ in 0..2 {
        let mut next: BTreeSet<u32> = algebra.clone();
        for target_mask in &algebra {
            for a in 0..m.inputs.len() {
                for p in &probs {
                    let mut mask = 0u32;
                    for s in 0..n {
                        let mass: f64 = m
                            .row(s, a)
                            .iter()
                            .filter(|(_, dst, _)| target_mask & (1 << dst) != 0)
                            .map(|(q, _, _)| rat_to_f64(q))
                            .sum();
                        if mass >= *p - 1e-12 {
                            mask |= 1 << s;
                        }
                    }
                    next.insert(mask);
                }
            }
        }
        algebra = boolean_algebra(n, &next);
    }
    let mut block_of = vec![0u32; n];
    let mut reps: Vec<Vec<bool>> = Vec::new();
    for (s, block) in block_of.iter_mut().enumerate() {
        let sig: Vec<bool> = algebra.iter().map(|mask| mask & (1 << s) != 0).collect();
        match reps.iter().position(|x| *x == sig) {
            Some(i) => *block = i as u32,
            None => {
                reps.push(sig);
                *block = (reps.len() - 1) as u32;
            }
        }
    }
    block_of
}

#[test]
fn tml_formulas_characterise_bisimilarity() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for i in 0..150 {
        let m = random_reactive(&mut rng, 3, 2);
        let logical = tml_formula_partition(&m);
        for s in 0..3 {
            for t in 0..3 {
                let rel = bisimilar(&m, s, t, &grid()).unwrap();
                let agree = logical[s] == logical[t];
                assert_eq!(rel, agree, "instance {i}, states {s},{t}\n{}", m.to_text());
            }
        }
    }
}

#[test]
fn ell_bounds_are_monotone_under_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    use tempo_core::tml::{model_check_tml, Tml};
    for _ in 0..300 {
        let m = random_reactive(&mut rng, 2, 1);
        let s = rng.gen_range(0..2);
        let p = rat_frac(rng.gen_range(0..=4), 4);
        let t = rat_frac(rng.gen_range(1..=8), 2);
        let phi = Tml::EllBound(p, t);
        let eps = rat_frac(rng.gen_range(4..=12), 4);
        if model_check_tml(&m, s, &phi).unwrap() {
            assert!(
                model_check_tml(&m, s, &phi.perturb(&eps)).unwrap(),
                "l-bound not monotone under eps = {eps}"
            );
        }
        assert_eq!(phi.perturb(&rat_from_int(1)), phi);
    }
}

/// All memoryless deterministic schedulers of a process.
fn memoryless_deterministic(m: &Smp) -> Vec<Scheduler> {
    let n = m.state_count();
    let k = m.inputs.len();
    let count = k.pow(n as u32);
    (0..count)
        .map(|mut code| {
            let pick: Vec<usize> = (0..n)
                .map(|_| {
                    let a = code % k;
                    code /= k;
                    a
                })
                .collect();
            Scheduler::memoryless_deterministic(m, &pick)
        })
        .collect()
}

#[test]
fn reachability_preserved_along_eps_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let beta = parse_wlwb("odd").unwrap();
    let mut exercised = 0;
    for _ in 0..400 {
        let m = random_reactive(&mut rng, 3, 2);
        let (s1, s2) = (rng.gen_range(0..3), rng.gen_range(0..3));
        let eps = 1.0 + rng.gen_range(0..6) as f64 / 4.0;
        if !eps_simulates(&m, s1, s2, eps, &grid()).unwrap() {
            continue;
        }
        exercised += 1;
        let t = 0.5 + rng.gen_range(0..4) as f64;
        let horizon = 4;
        let schedulers = memoryless_deterministic(&m);
        for sigma in &schedulers {
            let (lo1, _) =
                reachability_prob(&m, sigma, s1, &beta, t, horizon, None).unwrap();
            let mut best_hi = 0.0f64;
            for sigma2 in &schedulers {
                let (_, hi2) =
                    reachability_prob(&m, sigma2, s2, &beta, eps * t, horizon, None).unwrap();
                best_hi = best_hi.max(hi2);
            }
            assert!(
                lo1 <= best_hi + 1e-9,
                "reachability not preserved: {lo1} > {best_hi} at eps={eps}, t={t}\n{}",
                m.to_text()
            );
        }
        if exercised >= 60 {
            break;
        }
    }
    assert!(exercised >= 30, "too few simulating pairs exercised: {exercised}");
}

// --- trace logic characterises the unambiguous faster-than preorder -------------

fn random_unambiguous(rng: &mut ChaCha8Rng, n: usize) -> Smp {
    let mut m =
        Smp::new(SmpKind::Generative, vec!["tick".into()], vec!["a".into(), "b".into()]);
    for i in 0..n {
        let rate = (rng.gen_range(1..9) as f64) / 2.0;
        m.add_state(format!("g{i}"), Cdf::exponential(rate).unwrap(), Default::default());
    }
    for s in 0..n {
        for out in 0..2 {
            if rng.gen_bool(0.7) {
                let dst = rng.gen_range(0..n);
                m.add_transition(s, 0, rat_frac(1, 2), dst, out).unwrap();
            }
        }
    }
    m
}

#[test]
fn trace_logic_characterises_faster_than() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let g = GridSpec::with_points(96);
    for i in 0..150 {
        let u = random_unambiguous(&mut rng, 2);
        let v = if rng.gen_bool(0.5) {
            let mut out = u.clone();
            for s in 0..out.state_count() {
                let slower = out.residence(s).accelerate(1.0 / 1.5);
                out.set_residence(s, slower);
            }
            out
        } else {
            random_unambiguous(&mut rng, 2)
        };
        let faster = faster_than_unambiguous(&u, &v, 0, 0, &g).unwrap();
        // enumerate trace formulas: words up to length 3, deadlines from the
        // curve structure, thresholds at cylinder values and midpoints
        let mut words: Vec<Vec<usize>> = vec![vec![0], vec![1]];
        for len in 1..3 {
            let prev: Vec<Vec<usize>> =
                words.iter().filter(|w| w.len() == len).cloned().collect();
            for w in prev {
                for out in 0..2 {
                    let mut w2 = w.clone();
                    w2.push(out);
                    words.push(w2);
                }
            }
        }
        let mut times: Vec<f64> = (0..2)
            .flat_map(|s| u.residence(s).critical_times())
            .chain((0..2).flat_map(|s| v.residence(s).critical_times()))
            .collect();
        times.retain(|t| t.is_finite() && *t > 0.0 && *t < 50.0);
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut transfer = true;
        'outer: for w in &words {
            for t in &times {
                let cyl = TimeBoundedCylinder { word: w.clone(), bound: *t };
                let pu = cylinder_prob(&u, &Scheduler::Trivial, 0, &cyl).unwrap();
                let pv = cylinder_prob(&v, &Scheduler::Trivial, 0, &cyl).unwrap();
                // a threshold between the two values separates them: v
                // satisfies P>=p, u does not
                if pu < pv - 1e-7 {
                    transfer = false;
                    break 'outer;
                }
            }
        }
        if faster {
            assert!(transfer, "instance {i}: faster but a trace formula separates");
        } else {
            assert!(!transfer, "instance {i}: not faster but no trace formula separates");
        }
    }
}

// --- anomaly module laws ---------------------------------------------------------

#[test]
fn strong_monotonicity_is_sound_for_the_preorder() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let g = GridSpec::with_points(96);
    let stars = [CompositionKind::MinRate, CompositionKind::MaxRate, CompositionKind::ProductRate];
    let mut exercised = 0;
    for i in 0..300 {
        // U faster than V by construction (same chain, slowed rates)
        let rates: Vec<f64> = (0..3).map(|_| (rng.gen_range(2..9) as f64) / 2.0).collect();
        let u = fixtures::chain3(
            "u",
            &[
                &format!("exp({})", rates[0]),
                &format!("exp({})", rates[1]),
                &format!("exp({})", rates[2]),
            ],
        );
        let factor = 1.0 + rng.gen_range(0..4) as f64 / 4.0;
        let mut v = u.clone();
        for s in 0..v.state_count() {
            let slower = v.residence(s).accelerate(1.0 / factor);
            v.set_residence(s, slower);
        }
        // mirrored context keeps the conditions satisfiable for min-rate
        let w = if rng.gen_bool(0.6) { u.clone() } else { fixtures::chain3("w", &["exp(2)", "exp(1)", "exp(3)"]) };
        let star = stars[i % stars.len()];
        let verdict = strong_monotonic(&u, &v, &w, &w, star, &g).unwrap();
        if !verdict.holds {
            continue;
        }
        exercised += 1;
        assert!(faster_than_unambiguous(&u, &v, 0, 0, &g).unwrap());
        // the sufficient condition must imply cylinder domination of the
        // composites
        let uw = Smp::compose(&u, &w, star).unwrap();
        let vw = Smp::compose(&v, &w, star).unwrap();
        for n in 1..=3 {
            for t in [0.5, 1.5, 4.0] {
                let cyl = TimeBoundedCylinder { word: vec![0; n], bound: t };
                let p_uw = cylinder_prob(&uw, &Scheduler::Trivial, 0, &cyl).unwrap();
                let p_vw = cylinder_prob(&vw, &Scheduler::Trivial, 0, &cyl).unwrap();
                assert!(
                    p_uw >= p_vw - 1e-9,
                    "instance {i}: anomaly despite strong monotonicity ({star:?}, n={n}, t={t})"
                );
            }
        }
        // the corollary direction: strong implies the bounded existential
        // variant
        let weak = monotonic_bounded(&u, &v, &w, &w, star, 3, 1e6, &g).unwrap();
        assert!(weak.holds, "instance {i}: strong holds but bounded search fails");
    }
    assert!(exercised >= 40, "too few strongly-monotonic instances: {exercised}");
}

#[test]
fn path_bound_is_monotone_in_model_sizes() {
    let sizes = [1usize, 2, 3, 5];
    let models: Vec<Smp> = sizes
        .iter()
        .map(|n| fixtures::selfloop_states(&vec!["exp(1)"; *n]))
        .collect();
    for a in 0..models.len() {
        for b in a..models.len() {
            let small = path_bound_m(&models[a], &models[a], &models[a], &models[a]);
            let grown = path_bound_m(&models[b], &models[a], &models[a], &models[a]);
            assert!(grown >= small);
            let grown2 = path_bound_m(&models[a], &models[a], &models[b], &models[a]);
            assert!(grown2 >= small);
        }
    }
}

// --- residence-time composition laws ----------------------------------------------

#[test]
fn composition_functions_are_monotonic() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let g = GridSpec::with_points(128);
    let stars = [
        CompositionKind::MaxCdf,
        CompositionKind::ProductRate,
        CompositionKind::MinRate,
        CompositionKind::MaxRate,
    ];
    let mut checked = 0;
    while checked < 400 {
        let star = stars[checked % stars.len()];
        let exp = |rng: &mut ChaCha8Rng| {
            Cdf::<f64>::exponential((rng.gen_range(1..12) as f64) / 3.0).unwrap()
        };
        // rate compositions need exponentials; max-CDF takes the full family
        let (f, gc, h) = if star == CompositionKind::MaxCdf && rng.gen_bool(0.5) {
            let unif = |rng: &mut ChaCha8Rng| {
                let a = if rng.gen_bool(0.5) { 0.0 } else { (rng.gen_range(1..4) as f64) / 2.0 };
                Cdf::<f64>::uniform(a, a + (rng.gen_range(1..5) as f64) / 2.0).unwrap()
            };
            (unif(&mut rng), unif(&mut rng), exp(&mut rng))
        } else {
            (exp(&mut rng), exp(&mut rng), exp(&mut rng))
        };
        let Ok(c) = tempo_core::least_acceleration(&f, &gc) else { continue };
        let Some(c) = c.finite() else { continue };
        let eps = c.max(1.0) * 1.0000001;
        let left = Cdf::compose(star, &f, &h).unwrap();
        let right = Cdf::compose(star, &gc, &h).unwrap();
        assert!(
            tempo_core::eps_faster(&left, &right, eps, &g),
            "star {star:?} not monotonic: {f} vs {gc} with {h} at eps {eps}"
        );
        checked += 1;
    }
}

#[test]
fn exponential_convolutions_match_monte_carlo_at_1e6() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let samples = 1_000_000usize;
    for _ in 0..4 {
        let k = rng.gen_range(2..=4);
        let parts: Vec<Cdf<f64>> = (0..k)
            .map(|_| Cdf::exponential((rng.gen_range(1..10) as f64) / 3.0).unwrap())
            .collect();
        let conv = Cdf::convolve_all(parts.clone());
        let t = rng.gen_range(1..=6) as f64;
        let exact = conv.eval(t);
        let mut hits = 0usize;
        for _ in 0..samples {
            let total: f64 = parts.iter().map(|p| p.sample(&mut rng).unwrap()).sum();
            if total <= t {
                hits += 1;
            }
        }
        let est = hits as f64 / samples as f64;
        let se = (est * (1.0 - est) / samples as f64).sqrt().max(1e-6);
        assert!(
            (exact - est).abs() <= 3.0 * se + 1e-9,
            "{conv} at {t}: exact {exact}, mc {est}"
        );
    }
}

#[test]
fn parallel_composition_is_commutative_up_to_relabelling() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for star in [
        CompositionKind::MaxCdf,
        CompositionKind::MinCdf,
        CompositionKind::ProductRate,
        CompositionKind::MinRate,
        CompositionKind::MaxRate,
    ] {
        let m1 = random_reactive(&mut rng, 2, 1);
        let m2 = random_reactive(&mut rng, 2, 1);
        let ab = Smp::compose(&m1, &m2, star).unwrap();
        let ba = Smp::compose(&m2, &m1, star).unwrap();
        for s1 in 0..2 {
            for s2 in 0..2 {
                for len in 1..=3 {
                    for t in [0.5, 2.0] {
                        let cyl = TimeBoundedCylinder { word: vec![0; len], bound: t };
                        let p1 = cylinder_prob(&ab, &Scheduler::Trivial, s1 * 2 + s2, &cyl)
                            .unwrap();
                        let p2 = cylinder_prob(&ba, &Scheduler::Trivial, s2 * 2 + s1, &cyl)
                            .unwrap();
                        assert!(
                            (p1 - p2).abs() < 1e-9,
                            "{star:?}: composition not commutative ({p1} vs {p2})"
                        );
                    }
                }
            }
        }
    }
}

// --- parser round trips ----------------------------------------------------------

proptest! {
    #[test]
    fn rational_text_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let r = Rat::new(n.into(), d.into());
        let s = rat_to_string(&r);
        prop_assert_eq!(parse_rat(&s).unwrap(), r);
    }

    #[test]
    fn wts_text_round_trip(seed in 0u64..5_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_wts(&mut rng, 4);
        let parsed = Wts::parse(&w.to_text()).unwrap();
        prop_assert_eq!(w, parsed);
    }

    #[test]
    fn smp_text_round_trip(seed in 0u64..5_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_reactive(&mut rng, 3, 2);
        let parsed = Smp::parse(&m.to_text()).unwrap();
        prop_assert_eq!(m, parsed);
    }
}
