use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use palinword::bispecial::*;
use palinword::fixtures::{self, BispecialItem};
use palinword::morphisms::Morphism;
use palinword::repetitions::max_exponent;
use palinword::words::{w, ParikhVector, Word};

fn h() -> Morphism {
    fixtures::morphism("h").unwrap()
}

fn g() -> Morphism {
    fixtures::morphism("g").unwrap()
}

fn ex(expr: &str) -> Word {
    let (h, g) = (h(), g());
    expand(expr, &[('h', &h), ('g', &g)]).unwrap()
}

fn item_triplet(item: &BispecialItem, step: usize) -> BispecialTriplet {
    let (l, core, r) = item.steps[step];
    BispecialTriplet::new(l, ex(core), r, None).unwrap()
}

fn parikh(w: &Word) -> Vec<BigInt> {
    big_vec(&w.parikh(palinword::words::Alphabet::QUATERNARY).0.iter().map(|&x| x as i64).collect::<Vec<_>>())
}

fn m() -> ExactMatrix {
    ExactMatrix::of_morphism(&h())
}

#[test]
fn fixture_items_are_f_image_chains() {
    let h = h();
    let items = fixtures::bispecial_items();
    assert_eq!(items.len(), 18);
    for item in &items {
        assert_eq!(item.steps.len(), 5);
        for k in 0..4 {
            assert_eq!(f_image(&item_triplet(item, k), &h).unwrap(), item_triplet(item, k + 1), "item {} step {k}", item.id);
        }
    }
}

#[test]
fn initial_triplets_cover_the_listed_families() {
    let h = h();
    let items = fixtures::bispecial_items();
    let initials = initial_triplets(&h, 0, 16).unwrap();
    assert_eq!(initials.len(), 18);
    let chains = iterate_f_images(&initials, &h, 4).unwrap();
    let mut matched = BTreeSet::new();
    for chain in &chains {
        let item = items
            .iter()
            .find(|it| same_family(&chain[0], &item_triplet(it, 0), &h).unwrap())
            .unwrap_or_else(|| panic!("no listed family for {}", chain[0]));
        for (k, t) in chain.iter().enumerate().skip(1) {
            assert_eq!(t, &item_triplet(item, k), "item {} step {k}", item.id);
        }
        matched.insert(item.id);
    }
    assert_eq!(matched.len(), 18);
}

#[test]
fn extension_pairs_repeat_with_period_three() {
    let h = h();
    let initials = initial_triplets(&h, 0, 16).unwrap();
    for chain in iterate_f_images(&initials, &h, 10).unwrap() {
        for k in 1..chain.len() - 3 {
            assert_eq!(chain[k].extensions(), chain[k + 3].extensions());
        }
        let text = fixtures::h_word(1 << 17);
        for t in chain.iter().filter(|t| t.core.len() < 2000) {
            assert!(t.occurs_in(text.letters()), "{t}");
        }
    }
}

#[test]
fn parikh_recurrences_of_items_one_and_fifteen() {
    let h = h();
    let m = m();
    let items = fixtures::bispecial_items();
    let (e, a, b, zero) = (big_vec(&[0, 1, 1, 0]), big_vec(&[2, 3, 1, 1]), big_vec(&[1, 1, 1, 0]), big_vec(&[0; 4]));
    let add = |x: &[BigInt], y: &[BigInt]| x.iter().zip(y).map(|(p, q)| p + q).collect::<Vec<_>>();
    let mut chain = vec![item_triplet(&items[0], 0)];
    for _ in 0..8 {
        chain.push(f_image(chain.last().unwrap(), &h).unwrap());
    }
    for k in 1..8 {
        let extra = [&zero, &a, &b][k % 3];
        let expected = add(&add(&e, &m.apply(&parikh(&chain[k].core)).unwrap()), extra);
        assert_eq!(parikh(&chain[k + 1].core), expected, "item 1, k = {k}");
    }
    let mut chain = vec![item_triplet(&items[14], 0)];
    for _ in 0..8 {
        chain.push(f_image(chain.last().unwrap(), &h).unwrap());
    }
    assert_eq!(parikh(&chain[0].core), big_vec(&[0, 1, 0, 1]));
    for k in 0..8 {
        let extra = [&b, &zero, &a][k % 3];
        assert_eq!(parikh(&chain[k + 1].core), add(&m.apply(&parikh(&chain[k].core)).unwrap(), extra), "item 15, k = {k}");
    }
}

#[test]
fn item_return_words() {
    let text = fixtures::h_word(1 << 18);
    for item in fixtures::bispecial_items() {
        let sr = shortest_return_word(&text, &ex(item.return_anchor)).unwrap();
        // words with equal Parikh vectors are interchangeable here
        let expected: Vec<Word> = item.returns.iter().map(|r| ex(r)).collect();
        assert!(expected.iter().all(|r| sr.minimal.contains(r)), "item {}", item.id);
        let pv = |ws: &[Word]| ws.iter().map(|r| r.parikh(h().target())).map(|p| p.0).collect::<BTreeSet<_>>();
        assert_eq!(pv(&sr.minimal), pv(&expected), "item {}", item.id);
    }
}

#[test]
fn table_return_words() {
    let text = fixtures::g_h_word(1 << 17);
    let bispecials = enumerate_bispecial(&text, 200);
    let rows = fixtures::return_rows();
    assert_eq!(rows.len(), 28);
    for row in rows {
        let (b, r) = (ex(row.bispecial), ex(row.return_word));
        assert!(bispecials.contains(&b), "{} is bispecial", row.bispecial);
        let sr = shortest_return_word(&text, &b).unwrap();
        assert!(sr.minimal.contains(&r), "{} {}", row.table, row.bispecial);
        assert_eq!(sr.shortest_len, r.len(), "{} {}", row.table, row.bispecial);
    }
}

#[test]
fn critical_exponent_of_g_h() {
    let spec = WordSpec::image(g(), h(), 0);
    let report = critical_exponent_ddp(&spec, &DdpOptions { family_steps: Some(20), ..Default::default() }).unwrap();
    let bound = ratio_bound();
    assert_eq!(report.exponent, BigRational::new(41.into(), 22.into()));
    assert_eq!(report.max_ratio, bound);
    assert_eq!(report.records[report.argmax].ratio, bound);
    let head = w("12").concat(&g().apply(&w("31")).unwrap()).concat(&w("01"));
    assert!(report.records.iter().any(|r| r.word.as_ref() == Some(&head) && r.ratio == bound));
    assert!(report.records.iter().all(|r| r.ratio <= bound));
    let brute: Vec<&AuditRecord> = report.records.iter().filter(|r| r.provenance == Provenance::BruteForce).collect();
    assert!(brute.iter().any(|r| r.word_len == BigInt::from(200)) || brute.last().unwrap().word_len > BigInt::from(150));
    let row = brute.iter().find(|r| r.word.as_ref() == Some(&w("0120"))).unwrap();
    assert_eq!(row.return_len, BigInt::from(7));
    assert_eq!(row.ratio, BigRational::new(4.into(), 7.into()));
    let tails: BTreeSet<usize> = report
        .records
        .iter()
        .filter_map(|r| match r.provenance {
            Provenance::Family { id, .. } => {
                assert!(r.ratio < bound);
                Some(id)
            }
            Provenance::BruteForce => None,
        })
        .collect();
    assert_eq!(tails.len(), 18);
}

#[test]
fn towers_agree_with_the_family_recurrences() {
    let (g, h) = (g(), h());
    let towers = FamilyTowers::new(&g, &h, 0).unwrap();
    let items = fixtures::bispecial_items();
    let index = |item: usize| {
        towers.initials().iter().position(|t| same_family(t, &item_triplet(&items[item - 1], 0), &h).unwrap()).unwrap() + 1
    };
    let records = towers.sweep(18).unwrap();
    for (family, item, first) in [(Family::One, 1, 2), (Family::Fifteen, 15, 0)] {
        let id = index(item);
        for fr in family_ratio_bound(family, 5).unwrap().iter().filter(|f| f.step >= first) {
            let rec = records.iter().find(|r| r.provenance == Provenance::Family { id, step: fr.step }).unwrap();
            assert_eq!((&rec.word_len, &rec.return_len), (&fr.bispecial_len, &fr.return_len), "{family:?} step {}", fr.step);
        }
    }
}

#[test]
fn witnesses_of_the_critical_exponent() {
    let text = fixtures::g_h_word(100_000);
    for period in ["2012101202120102012021", "1201020121012021201210"] {
        let p = w(period);
        let witness: Vec<u8> = p.letters().iter().cycle().take(41).copied().collect();
        assert!(text.contains_factor(&witness), "{period}");
        assert_eq!(max_exponent(&Word::new(witness)).unwrap().0, Ratio::new(41, 22));
    }
    assert_eq!(max_exponent(&text).unwrap().0, Ratio::new(41, 22));
}

#[test]
fn critical_exponent_of_t() {
    let t = fixtures::morphism("t").unwrap();
    let report = critical_exponent_ddp(&WordSpec::fixed_point(t, 0), &DdpOptions::default()).unwrap();
    assert_eq!(report.exponent, BigRational::from_integer(2.into()));
    assert!(report.records.iter().all(|r| r.ratio <= BigRational::from_integer(1.into())));
}

#[test]
fn non_recurrent_generators_are_rejected() {
    let m: Morphism = "0 -> 01\n1 -> 1".parse().unwrap();
    assert!(matches!(critical_exponent_ddp(&WordSpec::fixed_point(m, 0), &DdpOptions::default()), Err(palinword::Error::Precondition(_))));
}

#[test]
fn pushforward_matches_images() {
    let h = h();
    let text = fixtures::h_word(1 << 16);
    for anchor in ["31", "13", "1201"] {
        let sr = shortest_return_word(&text, &w(anchor)).unwrap();
        for r in &sr.minimal {
            let pv = return_word_pushforward(r, &h).unwrap();
            assert_eq!(pv, ParikhVector::of(h.apply(r).unwrap().letters(), h.target()));
        }
    }
}
