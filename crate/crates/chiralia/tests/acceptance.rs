//! Acceptance suite. Each test covers one numbered criterion and prints a
//! PASS or FAIL line per sub-point; a criterion fails loudly rather than
//! silently narrowing its claim. Two sub-points are known to fail for
//! mathematical reasons recorded in the failure messages: the tight
//! presentation at (3,1,2) collapses below the required order, and the
//! order bound for the fourth candidate presentation breaks at the
//! degenerate residue pair (0,0) for p = 7.

use std::time::Instant;

use chiralia::atlas::{search_pairs, verify_theorem1_corpus};
use chiralia::constructions::{
    build_g_case1, build_g_star, build_p, build_theorem2, build_tight, generator_pair,
    materialize, presentation_suite, residue_sweep, table1_exponents,
    table1_exponents_triangular, verify_lemma_3_1, verify_lemma_3_2, verify_lemma_3_3,
    verify_table1, MaximalClassParams, TheoremTwoParams, TightParams,
};
use chiralia::coset::{self, EnumLimits, Strategy};
use chiralia::group::{ConcreteGroup, EngineLimits};
use chiralia::polytope::{self, Orientation, RotationPair};
use chiralia::{binomial, DedupeMode, SearchFilters};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn engine() -> EngineLimits {
    EngineLimits::default()
}

/// Felsch with a deep table: the candidate presentations collapse heavily
/// and HLT can need millions of intermediate cosets before closing.
fn deep_felsch() -> EnumLimits {
    EnumLimits { max_cosets: coset::DEFAULT_MAX_COSETS, strategy: Strategy::Felsch }
}

fn finish(criterion: u32, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {criterion}: PASS");
    } else {
        for f in &failures {
            println!("criterion {criterion}: FAIL - {f}");
        }
        panic!("criterion {criterion}: {} sub-point(s) failed: {:#?}", failures.len(), failures);
    }
}

#[test]
fn criterion_1_enumeration_oracle_equivalence() {
    let mut failures = Vec::new();
    let suite = presentation_suite().expect("suite builds");
    let mut checked = 0;
    for entry in &suite {
        let label = entry.presentation.label.clone();
        let hlt = coset::enumerate(
            &entry.presentation,
            &[],
            &EnumLimits { max_cosets: 1_000_000, strategy: Strategy::Hlt },
        );
        let felsch = coset::enumerate(
            &entry.presentation,
            &[],
            &EnumLimits { max_cosets: 1_000_000, strategy: Strategy::Felsch },
        );
        let (Some(n_hlt), Some(n_felsch)) = (hlt.order(), felsch.order()) else {
            failures.push(format!("{label}: enumeration did not close"));
            continue;
        };
        if n_hlt != n_felsch {
            failures.push(format!("{label}: HLT found {n_hlt}, Felsch found {n_felsch}"));
            continue;
        }
        if n_hlt > 2000 {
            continue;
        }
        checked += 1;
        let limits = EnumLimits { max_cosets: 1_000_000, strategy: Strategy::Hlt };
        let group = materialize(&entry.presentation, n_hlt, Some(limits)).expect("closed above");
        let closure = group.subgroup_closure(group.generator_elems());
        if closure.len() != n_hlt {
            failures.push(format!(
                "{label}: enumeration order {n_hlt} but element closure has {}",
                closure.len()
            ));
        }
        if let Some(expected) = entry.expected {
            if n_hlt != expected {
                failures.push(format!("{label}: order {n_hlt}, formula gives {expected}"));
            }
        }
        println!("criterion 1: {label} order {n_hlt} (hlt = felsch = closure)");
    }
    assert!(checked >= 40, "suite should hold at least 40 desk-scale presentations");
    finish(1, failures);
}

#[test]
fn criterion_2_tight_family_orders_and_types() {
    let mut failures = Vec::new();
    for (p, l1, l2) in [(3u64, 1u32, 1u32), (3, 2, 1), (3, 1, 2), (5, 1, 1)] {
        let params = TightParams::new(p, l1, l2).expect("valid");
        let required = params.order().expect("small");
        let pres = build_tight(&params).expect("builds");
        let limits = EnumLimits { max_cosets: 1_000_000, strategy: Strategy::Hlt };
        let group = materialize(&pres, required as usize, Some(limits)).expect("closes");
        let pair = generator_pair(&group).expect("generators a, b");
        let report = polytope::classify(&group, &pair, &engine());
        let want_type = [p.pow(l1), 2 * p.pow(l2)];

        let mut point_ok = true;
        if group.order() as u64 != required {
            point_ok = false;
            failures.push(format!(
                "T({p},{l1},{l2}): order {} instead of 2p^(l1+l2) = {required}; \
                 the relators themselves force the collapse: conjugating a^(p^l1) = 1 by b \
                 and using a^b = b^-2 a^-1 gives (b^-2)^(p^l1) = 1, so the central element \
                 b^2 has order dividing p^min(l1,l2) and the presented group has order \
                 2p^(l1+min(l1,l2)) = {}; the bound is attained only when l1 >= l2",
                group.order(),
                params.presented_order().expect("small")
            ));
        }
        if report.schlafli != want_type {
            point_ok = false;
            failures.push(format!(
                "T({p},{l1},{l2}): type ({}, {}) instead of ({}, {})",
                report.schlafli[0], report.schlafli[1], want_type[0], want_type[1]
            ));
        }
        if report.orientation != Orientation::Regular {
            point_ok = false;
            failures.push(format!("T({p},{l1},{l2}): orientation {:?}", report.orientation));
        }
        if !report.tight {
            point_ok = false;
            failures.push(format!("T({p},{l1},{l2}): not tight"));
        }
        if point_ok {
            println!(
                "criterion 2: T({p},{l1},{l2}) order {} type ({}, {}) Regular tight",
                group.order(),
                report.schlafli[0],
                report.schlafli[1]
            );
        }
    }
    finish(2, failures);
}

#[test]
fn criterion_3_extension_case_1() {
    let mut failures = Vec::new();
    let started = Instant::now();

    let params = MaximalClassParams::new(3, 2, 2).expect("valid");
    let built = build_g_case1(&params).expect("builds");
    let g = &built.group;
    let pair = &built.pair;
    if g.order() != 486 {
        failures.push(format!("G(3,2,2): order {}", g.order()));
    }
    let t = g.product(pair.sigma1, pair.sigma2);
    let orders =
        [g.element_order(pair.sigma1), g.element_order(pair.sigma2), g.element_order(t)];
    if orders != [9, 18, 2] {
        failures.push(format!("G(3,2,2): pair orders {orders:?}, want [9, 18, 2]"));
    }
    let report = polytope::classify(g, pair, &engine());
    if !report.intersection_trivial {
        failures.push("G(3,2,2): cyclic subgroups of the pair intersect".into());
    }
    if report.orientation != Orientation::Chiral {
        failures.push(format!("G(3,2,2): orientation {:?}", report.orientation));
    }
    if report.tight {
        failures.push("G(3,2,2): classified tight, but 9 * 18 = 162 != 486".into());
    }
    let elapsed = started.elapsed();
    if elapsed.as_secs() >= 60 {
        failures.push(format!("G(3,2,2): took {elapsed:?}, budget is one minute"));
    }
    println!("criterion 3: G(3,2,2) order 486, orders [9, 18, 2], Chiral, non-tight, {elapsed:?}");

    // the larger instance fits the element cap, so it is not skipped
    let params = MaximalClassParams::new(5, 1, 4).expect("valid");
    let built = build_g_case1(&params).expect("builds");
    let report = polytope::classify(&built.group, &built.pair, &engine());
    if built.group.order() != 6250 {
        failures.push(format!("G(5,1,4): order {}", built.group.order()));
    }
    if report.schlafli != [25, 10] {
        failures.push(format!("G(5,1,4): type {:?}, want (25, 10)", report.schlafli));
    }
    if report.orientation != Orientation::Chiral {
        failures.push(format!("G(5,1,4): orientation {:?}", report.orientation));
    }
    println!("criterion 3: G(5,1,4) order 6250 type (25, 10) Chiral");
    finish(3, failures);
}

#[test]
fn criterion_4_central_extension_and_quotient_criterion() {
    let mut failures = Vec::new();
    let params = MaximalClassParams::new(3, 2, 2).expect("valid");
    let star = build_g_star(&params).expect("builds");
    let gs = &star.group;
    if gs.order() != 1458 {
        failures.push(format!("Gstar(3,2,2): order {}", gs.order()));
    }
    if gs.element_order(star.x) != 3 {
        failures.push(format!("o(x) = {}", gs.element_order(star.x)));
    }
    if !gs.center().contains(star.x) {
        failures.push("x is not central".into());
    }

    let base = build_g_case1(&params).expect("builds");
    let g = &base.group;
    let images: Vec<(&str, u32)> = vec![
        ("s1", g.generator_named("s1").expect("gen")),
        ("s2", g.generator_named("s2").expect("gen")),
        ("b", g.generator_named("b").expect("gen")),
        ("sigma", g.generator_named("sigma").expect("gen")),
        ("x", 0),
    ];
    let hom = gs
        .hom_extends(&images, g)
        .expect("generators known")
        .expect("killing x projects onto the base extension");
    if hom.image_size() != 486 {
        failures.push(format!("quotient image has {} elements", hom.image_size()));
    }
    let kernel = hom.kernel(gs);
    let x_cyclic = gs.cyclic_subgroup(star.x);
    if kernel != x_cyclic {
        failures.push("kernel of the projection is not <x>".into());
    }

    let report = polytope::classify(gs, &star.pair, &engine());
    let t = gs.product(star.pair.sigma1, star.pair.sigma2);
    let orders = [
        gs.element_order(star.pair.sigma1),
        gs.element_order(star.pair.sigma2),
        gs.element_order(t),
    ];
    if report.orientation != Orientation::Chiral {
        failures.push(format!("Gstar pair orientation {:?}", report.orientation));
    }
    if orders != [9, 18, 2] {
        failures.push(format!("Gstar pair orders {orders:?}, want [9, 18, 2]"));
    }

    match polytope::quotient_criterion(gs, &star.pair, &hom, g, &base.pair, &engine()) {
        Ok(true) => {}
        Ok(false) => failures.push("quotient criterion rejected the intersection".into()),
        Err(e) => failures.push(format!("quotient criterion error: {e}")),
    }
    // direct computation of the same condition
    if !report.intersection_trivial {
        failures.push("direct intersection check disagrees with the criterion".into());
    }
    println!("criterion 4: Gstar(3,2,2) order 1458, o(x) = 3 central, quotient 486, Chiral [9, 18, 2]");
    finish(4, failures);
}

#[test]
fn criterion_5_candidate_presentations_are_regular_within_bounds() {
    let mut failures = Vec::new();
    for p in [3u64, 7] {
        let started = Instant::now();
        let mut sweep: Vec<TheoremTwoParams> = Vec::new();
        for variant in 1..=3u8 {
            sweep.push(TheoremTwoParams::new(p, variant, None, None).expect("valid"));
        }
        for variant in 4..=6u8 {
            for (i, j) in residue_sweep(p) {
                sweep.push(TheoremTwoParams::new(p, variant, Some(i), Some(j)).expect("valid"));
            }
        }
        if p < 7 {
            println!("criterion 5: p = {p} is a desk-scale prime below the p >= 7 analysis range");
        }
        for params in sweep {
            let pres = build_theorem2(&params).expect("builds");
            let label = pres.label.clone();
            let bound = params.order_bound();
            let group = match materialize(&pres, bound as usize, Some(deep_felsch())) {
                Ok(g) => g,
                Err(e) => {
                    failures.push(format!("{label}: {e}"));
                    continue;
                }
            };
            let order = group.order() as u64;
            if order > bound {
                failures.push(format!(
                    "{label}: order {order} exceeds the bound {bound}; with t = [a,b^2], \
                     the mixed relator [t,a]^i [t,b^2]^j is the empty word at the residue \
                     pair (0,0), so the presentation loses the dependency that the bound \
                     argument uses to force [t,b^2] central and cyclic; a nontrivial \
                     dependency always exists in the groups the analysis quantifies over, \
                     so (0,0) is vacuous there; the enumerated group is nonetheless \
                     Regular, so the regularity conclusion survives"
                ));
            }
            let pair = generator_pair(&group).expect("generators a, b");
            let report = polytope::classify(&group, &pair, &engine());
            let alpha_extends = report.orientation == Orientation::Regular;
            if !alpha_extends {
                failures.push(format!(
                    "{label}: inverting both generators does not extend ({:?})",
                    report.orientation
                ));
            }
            println!(
                "criterion 5: {label} order {order} (bound {bound}) {:?}",
                report.orientation
            );
        }
        let elapsed = started.elapsed();
        if p == 7 && elapsed.as_secs() >= 300 {
            failures.push(format!("p = 7 sweep took {elapsed:?}, budget is five minutes"));
        }
        println!("criterion 5: p = {p} sweep finished in {elapsed:?}");
    }
    finish(5, failures);
}

#[test]
fn criterion_6_lemma_sweep_over_all_desk_scale_parameters() {
    let mut failures = Vec::new();
    let mut points = Vec::new();
    for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43] {
        for e in 1..=6u32 {
            for r in (2..p as u32).step_by(2) {
                let Ok(params) = MaximalClassParams::new(p, e, r) else { continue };
                if params.m() % 2 != 1 {
                    continue;
                }
                match params.order() {
                    Ok(order) if order <= 100_000 => points.push(params),
                    _ => {}
                }
            }
        }
    }
    assert_eq!(points.len(), 19, "the p^m <= 10^5 window holds nineteen odd-m points");

    for params in points {
        let (p, e, r) = (params.p, params.e, params.r);
        let built = match build_p(&params) {
            Ok(b) => b,
            Err(err) => {
                failures.push(format!("P({p},{e},{r}): build failed: {err}"));
                continue;
            }
        };
        if !verify_lemma_3_1(&built) {
            failures.push(format!("P({p},{e},{r}): inverting s1 extended to an automorphism"));
        }
        if !verify_lemma_3_2(&built) {
            failures.push(format!("P({p},{e},{r}): conjugation formula failed"));
        }
        match verify_lemma_3_3(&built) {
            Ok(true) => {}
            Ok(false) => {
                failures.push(format!("P({p},{e},{r}): sigma is not an order-two automorphism"))
            }
            Err(err) => failures.push(format!("P({p},{e},{r}): {err}")),
        }
        match verify_table1(&built) {
            Ok(true) => {}
            Ok(false) => failures.push(format!("P({p},{e},{r}): exponent table product failed")),
            Err(err) => failures.push(format!("P({p},{e},{r}): {err}")),
        }
        println!("criterion 6: P({p},{e},{r}) order {} checked", built.group.order());
    }
    assert_eq!(
        table1_exponents(3),
        vec![-3, 3, 6, 3],
        "closed forms at p = 3 must give (-3, 3, 6, 3)"
    );
    println!("criterion 6: table exponents at p = 3 are (-3, 3, 6, 3)");
    finish(6, failures);
}

#[test]
fn criterion_7_exhaustive_chiral_corpora() {
    let mut failures = Vec::new();
    let filters = SearchFilters { chiral_only: true, ..Default::default() };
    for star in [false, true] {
        let params = MaximalClassParams::new(3, 2, 2).expect("valid");
        let (label, group) = if star {
            let b = build_g_star(&params).expect("builds");
            (b.presentation.label, b.group)
        } else {
            let b = build_g_case1(&params).expect("builds");
            (b.presentation.label, b.group)
        };
        let records =
            search_pairs(&group, &label, &filters, DedupeMode::Raw, &engine(), true)
                .expect("scan");
        if records.is_empty() {
            failures.push(format!("{label}: no chiral pairs found"));
            continue;
        }
        let summary = verify_theorem1_corpus(&group, &records, &engine()).expect("corpus");
        if !summary.all_pass {
            failures.push(format!(
                "{label}: {} clause failure(s), first: {:?}",
                summary.failures.len(),
                summary.failures.first()
            ));
        }
        // the individual clauses, re-checked explicitly
        let context = polytope::sylow_context(&group, &engine()).expect("2p^m shape");
        let alphabet = group.word_alphabet().clone();
        for rec in &records {
            let s1 = group
                .evaluate_word(&chiralia::words::parse_word(&rec.sigma1, &alphabet).expect("word"))
                .expect("element");
            let s2 = group
                .evaluate_word(&chiralia::words::parse_word(&rec.sigma2, &alphabet).expect("word"))
                .expect("element");
            let pair = RotationPair::new(&group, s1, s2);
            let report =
                polytope::verify_theorem1_cached(&group, &pair, &engine(), Some(&context))
                    .expect("chiral record");
            let clauses = report.clauses.expect("filled");
            let profile = report.sylow_profile.expect("2p^m shape");
            if !clauses.sylow_two_generated {
                failures.push(format!(
                    "{label} ({}, {}): Sylow subgroup is not the two-generated rotation part",
                    rec.sigma1, rec.sigma2
                ));
            }
            if profile.minimal_generators != 2 {
                failures.push(format!("{label} ({}, {}): d != 2", rec.sigma1, rec.sigma2));
            }
            if profile.derived_order <= 1 {
                failures.push(format!("{label} ({}, {}): abelian Sylow", rec.sigma1, rec.sigma2));
            }
            if !clauses.tight_iff_metacyclic {
                failures.push(format!(
                    "{label} ({}, {}): tight {} but metacyclic {}",
                    rec.sigma1, rec.sigma2, report.tight, profile.metacyclic
                ));
            }
        }
        println!("criterion 7: {label} corpus of {} chiral pairs clause-clean", records.len());
    }
    finish(7, failures);
}

#[test]
fn criterion_8_binomial_identities_and_exponent_table() {
    let mut failures = Vec::new();
    let c = |n: i64, m: i64| binomial(n, m);
    for n in 0..=30i64 {
        for m in 0..=30i64 {
            if m <= n && c(n, m) != c(n, n - m) {
                failures.push(format!("symmetry fails at ({n}, {m})"));
            }
            if c(n + 2, m + 1) != c(n + 1, m + 1) + c(n + 1, m) {
                failures.push(format!("addition fails at ({n}, {m})"));
            }
            if n >= 1 {
                let lhs: BigInt = (0..=m)
                    .map(|k| {
                        let sign = if k % 2 == 0 { 1 } else { -1 };
                        c(n, k) * BigInt::from(sign)
                    })
                    .sum();
                let sign = if m % 2 == 0 { 1 } else { -1 };
                if lhs != c(n - 1, m) * BigInt::from(sign) {
                    failures.push(format!("alternating sum fails at ({n}, {m})"));
                }
            }
            // the lower index of C(n-k, m-k) must stay a valid upper index
            for k in 0..=n {
                if c(n, m) * c(m, k) != c(n, k) * c(n - k, m - k) {
                    failures.push(format!("subset-of-subset fails at ({n}, {m}, {k})"));
                }
            }
        }
        if !c(n, -1).is_zero() || !c(n, n + 1).is_zero() {
            failures.push(format!("out-of-range convention fails at n = {n}"));
        }
    }
    println!("criterion 8: binomial identities hold for all n, m, k <= 30");

    for p in [3u64, 5, 7, 11] {
        let closed = table1_exponents(p);
        let triangular = table1_exponents_triangular(p);
        // the triangular sum defines the interior window 2 <= i <= p-1
        let window = &closed[1..(p - 1) as usize];
        if window != triangular.as_slice() {
            failures.push(format!(
                "p = {p}: triangular sums {triangular:?} but closed forms {window:?}"
            ));
        }
    }
    println!("criterion 8: triangular sums match closed forms for p in {{3, 5, 7, 11}}");
    finish(8, failures);
}

#[test]
fn criterion_9_commutator_identities_and_pair_moves() {
    let mut failures = Vec::new();

    // Part one: commutator identities on all triples in every suite group
    // of order at most 100.
    let suite = presentation_suite().expect("suite builds");
    let mut checked_groups = 0;
    for entry in &suite {
        if matches!(entry.expected, Some(n) if n > 100) {
            continue;
        }
        let label = entry.presentation.label.clone();
        let group = match materialize(&entry.presentation, 2000, Some(deep_felsch())) {
            Ok(g) => g,
            Err(e) => {
                failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        let n = group.order();
        if n > 100 {
            continue;
        }
        checked_groups += 1;
        if let Some(detail) = commutator_identity_defect(&group) {
            failures.push(format!("{label}: {detail}"));
        }
        println!("criterion 9: {label} ({n} elements) commutator identities hold on all triples");
    }
    assert!(checked_groups >= 5, "the suite holds several groups of order <= 100");

    // Part two: the enantiomorph and dual moves on seeded random pairs.
    let params = MaximalClassParams::new(3, 2, 2).expect("valid");
    let built = build_g_case1(&params).expect("builds");
    let g = &built.group;
    let involutions: Vec<u32> =
        (0..g.order() as u32).filter(|&x| g.product(x, x) == 0 && x != 0).collect();
    assert!(!involutions.is_empty());
    let mut rng = ChaCha8Rng::seed_from_u64(0x00C1_41A1);
    let mut valid_seen = 0usize;
    for trial in 0..200 {
        let s1: u32 = rng.gen_range(0..g.order() as u32);
        // pairs built through an involution satisfy the rotation relation
        let t = involutions[rng.gen_range(0..involutions.len())];
        let s2 = g.product(g.inverse(s1), t);
        let pair = RotationPair::new(g, s1, s2);
        let e = polytope::enantiomorph(g, &pair);
        let d = polytope::dual(g, &pair);
        let ee = polytope::enantiomorph(g, &e);
        let dd = polytope::dual(g, &d);
        if (ee.sigma1, ee.sigma2) != (pair.sigma1, pair.sigma2) {
            failures.push(format!("trial {trial}: enantiomorph is not an involution"));
            continue;
        }
        if (dd.sigma1, dd.sigma2) != (pair.sigma1, pair.sigma2) {
            failures.push(format!("trial {trial}: dual is not an involution"));
            continue;
        }
        let report = polytope::classify(g, &pair, &engine());
        if !report.is_valid() {
            continue;
        }
        valid_seen += 1;
        let re = polytope::classify(g, &e, &engine());
        let rd = polytope::classify(g, &d, &engine());
        if re.orientation != report.orientation
            || re.tight != report.tight
            || re.schlafli != report.schlafli
        {
            failures.push(format!(
                "trial {trial}: enantiomorph changed the classification \
                 ({:?} {:?} -> {:?} {:?})",
                report.orientation, report.schlafli, re.orientation, re.schlafli
            ));
        }
        if rd.orientation != report.orientation
            || rd.tight != report.tight
            || rd.schlafli != [report.schlafli[1], report.schlafli[0]]
        {
            failures.push(format!(
                "trial {trial}: dual changed more than the type order \
                 ({:?} {:?} -> {:?} {:?})",
                report.orientation, report.schlafli, rd.orientation, rd.schlafli
            ));
        }
    }
    assert!(valid_seen > 0, "the seeded sample must hit valid pairs");
    println!(
        "criterion 9: 200 seeded pair moves are involutive; {valid_seen} valid pairs keep \
         their classification under both moves"
    );
    finish(9, failures);
}

/// Prop-style commutator identities, checked on every ordered triple.
/// Returns a description of the first defect, if any.
fn commutator_identity_defect(g: &ConcreteGroup) -> Option<String> {
    let n = g.order() as u32;
    let comm = |x: u32, y: u32| g.commutator_elems(x, y);
    let conj = |x: u32, y: u32| g.conjugate(x, y);
    let series = g.lower_central_series();
    let gamma4 = if series.len() > 3 { series[3].clone() } else { series.last().unwrap().clone() };
    let exponent_triples: [(i64, i64, i64); 4] = [(2, 1, 1), (1, 2, 1), (1, 1, 2), (2, 2, 2)];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                // product rules
                let lhs = comm(g.product(x, y), z);
                let rhs = g.product(conj(comm(x, z), y), comm(y, z));
                if lhs != rhs {
                    return Some(format!("[xy, z] rule fails at ({x}, {y}, {z})"));
                }
                let lhs = comm(x, g.product(y, z));
                let rhs = g.product(comm(x, z), conj(comm(x, y), z));
                if lhs != rhs {
                    return Some(format!("[x, yz] rule fails at ({x}, {y}, {z})"));
                }
                if z == 0 {
                    // inversion rules need only two elements
                    let lhs = conj(comm(x, g.inverse(y)), y);
                    if lhs != g.inverse(comm(x, y)) {
                        return Some(format!("[x, y^-1] rule fails at ({x}, {y})"));
                    }
                    let lhs = conj(comm(g.inverse(x), y), x);
                    if lhs != g.inverse(comm(x, y)) {
                        return Some(format!("[x^-1, y] rule fails at ({x}, {y})"));
                    }
                    let lhs = conj(comm(g.inverse(x), g.inverse(y)), g.product(x, y));
                    if lhs != comm(x, y) {
                        return Some(format!("double inversion rule fails at ({x}, {y})"));
                    }
                }
                // the left-normed power rule holds modulo the fourth
                // lower-central term
                let base = comm(comm(x, y), z);
                for &(i1, i2, i3) in &exponent_triples {
                    let lhs = comm(comm(g.power(x, i1), g.power(y, i2)), g.power(z, i3));
                    let rhs = g.power(base, i1 * i2 * i3);
                    let defect = g.product(g.inverse(rhs), lhs);
                    if !gamma4.contains(defect) {
                        return Some(format!(
                            "power rule fails mod gamma_4 at ({x}, {y}, {z}) with exponents \
                             ({i1}, {i2}, {i3})"
                        ));
                    }
                }
            }
        }
    }
    None
}
