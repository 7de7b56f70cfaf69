use criterion::{criterion_group, criterion_main, Criterion};

use chiralia::atlas::search_pairs;
use chiralia::constructions::{build_g_case1, MaximalClassParams};
use chiralia::coset::{enumerate, EnumLimits, Strategy};
use chiralia::group::EngineLimits;
use chiralia::words::parse_presentation;
use chiralia::{DedupeMode, SearchFilters};

fn bench_enumeration(c: &mut Criterion) {
    let src = "gens s, t; rels s^3, t^2, (s*t)^2;";
    let pres = parse_presentation(src).unwrap();
    let mut group = c.benchmark_group("enumeration");
    for strategy in [Strategy::Hlt, Strategy::Felsch] {
        group.bench_function(format!("{strategy:?}"), |b| {
            b.iter(|| enumerate(&pres, &[], &EnumLimits::default().with_strategy(strategy)))
        });
    }
    group.finish();
}

/// The full chiral scan of the order-486 extension group, once on the
/// rayon lane and once on the sequential fallback. The record lists must
/// agree element for element; only the wall time may differ.
fn bench_pair_scan(c: &mut Criterion) {
    let params = MaximalClassParams::new(3, 2, 2).unwrap();
    let built = build_g_case1(&params).unwrap();
    let engine = EngineLimits::default();
    let filters = SearchFilters { chiral_only: true, ..Default::default() };

    let seq =
        search_pairs(&built.group, "G(3,2,2)", &filters, DedupeMode::Raw, &engine, false).unwrap();
    let par =
        search_pairs(&built.group, "G(3,2,2)", &filters, DedupeMode::Raw, &engine, true).unwrap();
    assert_eq!(seq.len(), par.len(), "lanes must find the same corpus");

    let mut group = c.benchmark_group("pair_scan");
    group.sample_size(10);
    for (name, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                search_pairs(&built.group, "G(3,2,2)", &filters, DedupeMode::Raw, &engine, parallel)
                    .unwrap()
                    .len()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_enumeration, bench_pair_scan);
criterion_main!(benches);
