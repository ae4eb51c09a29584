//! Brute-force enumeration of the frequency statistics over explicit sets of
//! research units, dyads and triads, checked against the metrics module.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use padkit_core::fixtures::{mini3, CorpusBuilder};
use padkit_core::metrics::{self, MetricTable};
use padkit_core::{Corpus, Kind, Label};
use proptest::prelude::*;

type Q = Ratio<u64>;

/// One triad flattened to `(ru, [(category number, node label) for P, A, D])`.
type Flat = (String, [(u32, Label); 3]);

struct Oracle {
    n_ru: u64,
    triads: Vec<Flat>,
    categories: BTreeMap<Kind, BTreeSet<u32>>,
}

impl Oracle {
    fn new(corpus: &Corpus) -> Self {
        let triads = corpus
            .triads()
            .map(|t| {
                let slot = |id| {
                    let n = &corpus.nodes[&id];
                    (n.label.category, n.label)
                };
                (t.ru.0.clone(), [slot(t.p), slot(t.a), slot(t.d)])
            })
            .collect();
        let mut categories: BTreeMap<Kind, BTreeSet<u32>> = BTreeMap::new();
        for c in corpus.categories.values() {
            categories
                .entry(c.kind)
                .or_default()
                .insert(c.label.category);
        }
        Oracle {
            n_ru: corpus.research_units.len() as u64,
            triads,
            categories,
        }
    }

    fn cats(&self, kind: Kind) -> Vec<u32> {
        self.categories
            .get(&kind)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    fn slot(kind: Kind) -> usize {
        Kind::ALL.iter().position(|&k| k == kind).unwrap()
    }

    /// Set of research units tackling problem category `k`.
    fn p_units(&self, k: u32) -> BTreeSet<&str> {
        self.triads
            .iter()
            .filter(|(_, s)| s[0].0 == k)
            .map(|(ru, _)| ru.as_str())
            .collect()
    }

    fn share(counts: BTreeMap<u32, u64>) -> BTreeMap<u32, Q> {
        let total: u64 = counts.values().sum();
        counts
            .into_iter()
            .map(|(k, c)| (k, Q::new(c, total)))
            .collect()
    }

    fn f_p(&self) -> BTreeMap<u32, Q> {
        self.cats(Kind::Problem)
            .into_iter()
            .map(|k| (k, Q::new(self.p_units(k).len() as u64, self.n_ru)))
            .collect()
    }

    fn r_p(&self) -> BTreeMap<u32, Q> {
        Self::share(
            self.cats(Kind::Problem)
                .into_iter()
                .map(|k| (k, self.p_units(k).len() as u64))
                .collect(),
        )
    }

    fn avg(&self) -> Q {
        let total: u64 = self
            .cats(Kind::Problem)
            .into_iter()
            .map(|k| self.p_units(k).len() as u64)
            .sum();
        Q::new(total, self.n_ru)
    }

    fn w_p(&self) -> BTreeMap<u32, Q> {
        let dyads: BTreeSet<(u32, u32)> =
            self.triads.iter().map(|(_, s)| (s[0].0, s[1].0)).collect();
        Self::share(
            self.cats(Kind::Problem)
                .into_iter()
                .map(|k| (k, dyads.iter().filter(|(p, _)| *p == k).count() as u64))
                .collect(),
        )
    }

    /// `(ru, member)` presence pairs for members of category `k`.
    fn member_presence(&self, kind: Kind, k: u32) -> BTreeSet<(&str, Label)> {
        let s = Self::slot(kind);
        self.triads
            .iter()
            .filter(|(_, slots)| slots[s].0 == k)
            .map(|(ru, slots)| (ru.as_str(), slots[s].1))
            .collect()
    }

    fn r_member(&self, kind: Kind) -> BTreeMap<u32, Q> {
        Self::share(
            self.cats(kind)
                .into_iter()
                .map(|k| (k, self.member_presence(kind, k).len() as u64))
                .collect(),
        )
    }

    fn u_a(&self) -> BTreeMap<u32, Q> {
        Self::share(
            self.cats(Kind::Approach)
                .into_iter()
                .map(|k| {
                    (
                        k,
                        self.triads.iter().filter(|(_, s)| s[1].0 == k).count() as u64,
                    )
                })
                .collect(),
        )
    }
}

fn by_category(table: &MetricTable) -> BTreeMap<u32, Q> {
    table
        .rows
        .iter()
        .map(|r| (r.label.category, r.value.expect("nonempty table")))
        .collect()
}

fn q(n: u64, d: u64) -> Q {
    Q::new(n, d)
}

fn values(pairs: &[(u32, Q)]) -> BTreeMap<u32, Q> {
    pairs.iter().copied().collect()
}

#[test]
fn oracle_reproduces_hand_counts_on_mini3() {
    // frozen from counting the fixture by hand; the oracle must agree before
    // the implementation is compared with either
    let o = Oracle::new(&mini3());
    assert_eq!(o.f_p(), values(&[(1, q(2, 3)), (2, q(2, 3))]));
    assert_eq!(o.r_p(), values(&[(1, q(1, 2)), (2, q(1, 2))]));
    assert_eq!(o.avg(), q(4, 3));
    assert_eq!(o.w_p(), values(&[(1, q(2, 3)), (2, q(1, 3))]));
    assert_eq!(
        o.r_member(Kind::Approach),
        values(&[(1, q(4, 5)), (2, q(1, 5))])
    );
    assert_eq!(o.u_a(), values(&[(1, q(5, 6)), (2, q(1, 6))]));
    assert_eq!(
        o.r_member(Kind::Development),
        values(&[(1, q(1, 2)), (2, q(1, 3)), (3, q(1, 6))])
    );
}

#[test]
fn mini3_golden_values() {
    let c = mini3();
    assert_eq!(
        by_category(&metrics::f_p(&c).unwrap()),
        values(&[(1, q(2, 3)), (2, q(2, 3))])
    );
    assert_eq!(
        by_category(&metrics::r_p(&c).unwrap()),
        values(&[(1, q(1, 2)), (2, q(1, 2))])
    );
    assert_eq!(metrics::avg_challenges_per_ru(&c).unwrap(), q(4, 3));
    assert_eq!(
        by_category(&metrics::w_p(&c).unwrap()),
        values(&[(1, q(2, 3)), (2, q(1, 3))])
    );
    assert_eq!(
        by_category(&metrics::r_a(&c).unwrap()),
        values(&[(1, q(4, 5)), (2, q(1, 5))])
    );
    assert_eq!(
        by_category(&metrics::u_a(&c).unwrap()),
        values(&[(1, q(5, 6)), (2, q(1, 6))])
    );
    assert_eq!(
        by_category(&metrics::r_d(&c).unwrap()),
        values(&[(1, q(1, 2)), (2, q(1, 3)), (3, q(1, 6))])
    );
}

fn slot() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=4, 1u32..=3)
}

fn corpus() -> impl Strategy<Value = Corpus> {
    let triad = (1u32..=8, slot(), slot(), slot());
    proptest::collection::vec(triad, 1..24).prop_map(|triads| {
        let mut b = CorpusBuilder::new();
        for (ru, p, a, d) in triads {
            b = b.triad(&format!("RU{ru}"), p, a, d);
        }
        b.build()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_match_brute_force(c in corpus()) {
        let o = Oracle::new(&c);
        prop_assert_eq!(by_category(&metrics::f_p(&c).unwrap()), o.f_p());
        prop_assert_eq!(by_category(&metrics::r_p(&c).unwrap()), o.r_p());
        prop_assert_eq!(metrics::avg_challenges_per_ru(&c).unwrap(), o.avg());
        prop_assert_eq!(by_category(&metrics::w_p(&c).unwrap()), o.w_p());
        prop_assert_eq!(by_category(&metrics::r_a(&c).unwrap()), o.r_member(Kind::Approach));
        prop_assert_eq!(by_category(&metrics::u_a(&c).unwrap()), o.u_a());
        prop_assert_eq!(by_category(&metrics::r_d(&c).unwrap()), o.r_member(Kind::Development));
    }
}
