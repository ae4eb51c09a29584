use proptest::prelude::*;

use super::*;
use crate::fixtures::mini3;
use crate::ingest::to_json_string;

fn ru(id: &str) -> RuId {
    RuId::new(id)
}

fn label(text: &str) -> Label {
    Label::parse(text).unwrap()
}

fn add(session: &mut Session, kind: Kind, text: &str) -> NodeId {
    session.add_code(kind, text, &ru("RU1")).unwrap().id
}

fn node_label(session: &Session, id: NodeId) -> String {
    session.corpus().nodes[&id].label.render()
}

/// Builds `n` categories of `kind`, category `i` (1-based) holding `sizes[i-1]` members.
fn categories(session: &mut Session, kind: Kind, sizes: &[usize]) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    for (i, &size) in sizes.iter().enumerate() {
        let first = add(session, kind, &format!("cat{i} code0"));
        let second = add(session, kind, &format!("cat{i} code1"));
        session
            .group_pair(second, first, Some(&format!("category {i}")))
            .unwrap();
        let mut members = vec![first, second];
        for j in 2..size {
            let next = add(session, kind, &format!("cat{i} code{j}"));
            session.group_pair(next, first, None).unwrap();
            members.push(next);
        }
        out.push(members);
    }
    out
}

#[test]
fn add_code_draws_provisional_numbers() {
    let mut s = Session::default();
    let first = s
        .add_code(
            Kind::Problem,
            "high variance across hypervisors",
            &ru("RU4"),
        )
        .unwrap();
    assert_eq!(first.label.render(), "P1");
    let second = s
        .add_code(Kind::Problem, "opaque power draw", &ru("RU4"))
        .unwrap();
    assert_eq!(second.label.render(), "P2");
    let approach = s.add_code(Kind::Approach, "testbed", &ru("RU4")).unwrap();
    assert_eq!(approach.label.render(), "A1");
    assert_eq!(s.revision(), 3);
}

#[test]
fn re_adding_a_code_appends_the_source() {
    let mut s = Session::default();
    let first = s
        .add_code(
            Kind::Problem,
            "high variance across hypervisors",
            &ru("RU4"),
        )
        .unwrap();
    let again = s
        .add_code(
            Kind::Problem,
            "high variance across hypervisors",
            &ru("RU5"),
        )
        .unwrap();
    assert_eq!(first.id, again.id);
    let sources: Vec<&str> = again.sources.iter().map(RuId::as_str).collect();
    assert_eq!(sources, ["RU4", "RU5"]);
    assert_eq!(s.corpus().nodes.len(), 1);
    // same source again changes nothing
    let rev = s.revision();
    s.add_code(
        Kind::Problem,
        "high variance across hypervisors",
        &ru("RU5"),
    )
    .unwrap();
    assert_eq!(s.revision(), rev);
}

#[test]
fn add_code_rejects_empty_and_multiline_text() {
    let mut s = Session::default();
    assert!(matches!(
        s.add_code(Kind::Problem, "  ", &ru("RU1")),
        Err(SessionError::EmptyText(_))
    ));
    assert!(matches!(
        s.add_code(Kind::Problem, "two\nlines", &ru("RU1")),
        Err(SessionError::MultilineText(_))
    ));
    assert_eq!(s.revision(), 0);
}

#[test]
fn grouping_two_ungrouped_codes() {
    let mut s = Session::default();
    let beta = add(&mut s, Kind::Problem, "beta");
    let alpha = add(&mut s, Kind::Problem, "alpha");
    let cat = s
        .group_pair(alpha, beta, Some("power model formulation"))
        .unwrap();
    assert_eq!(cat.label.render(), "P1");
    assert_eq!(cat.category_code, "power model formulation");
    assert_eq!(cat.members, vec![beta, alpha]);
    assert_eq!(node_label(&s, beta), "P1.1");
    assert_eq!(node_label(&s, alpha), "P1.2");
    assert!(s.pool(Some(Kind::Problem)).is_empty());
    let log: Vec<_> = s.relabel_log().map(|e| (e.node, e.reason)).collect();
    assert_eq!(
        log,
        vec![
            (beta, RelabelReason::GroupedAsNeighbor),
            (alpha, RelabelReason::GroupedAsSubject)
        ]
    );
}

#[test]
fn joining_takes_next_item() {
    let mut s = Session::default();
    let beta = add(&mut s, Kind::Approach, "beta");
    let alpha = add(&mut s, Kind::Approach, "alpha");
    s.group_pair(alpha, beta, Some("measurement")).unwrap();
    let third = add(&mut s, Kind::Approach, "gamma");
    let cat = s.group_pair(third, alpha, None).unwrap();
    assert_eq!(node_label(&s, third), "A1.3");
    assert_eq!(cat.members.len(), 3);
    assert_eq!(cat.category_code, "measurement");
}

#[test]
fn joining_with_text_revises_category() {
    let mut s = Session::default();
    let beta = add(&mut s, Kind::Approach, "beta");
    let alpha = add(&mut s, Kind::Approach, "alpha");
    s.group_pair(alpha, beta, Some("measurement")).unwrap();
    let third = add(&mut s, Kind::Approach, "gamma");
    let cat = s
        .group_pair(third, beta, Some("measurement and metering"))
        .unwrap();
    assert_eq!(cat.category_code, "measurement and metering");
}

#[test]
fn grouping_a_grouped_subject_fails_without_change() {
    let mut s = Session::default();
    let beta = add(&mut s, Kind::Problem, "beta");
    let alpha = add(&mut s, Kind::Problem, "alpha");
    s.group_pair(alpha, beta, Some("c")).unwrap();
    let other = add(&mut s, Kind::Problem, "other");
    let before = s.corpus().clone();
    let rev = s.revision();
    assert!(matches!(
        s.group_pair(alpha, other, Some("x")),
        Err(SessionError::AlreadyGrouped(id)) if id == alpha
    ));
    assert_eq!(s.corpus(), &before);
    assert_eq!(s.revision(), rev);
}

#[test]
fn grouping_requires_text_kind_and_distinct_nodes() {
    let mut s = Session::default();
    let p1 = add(&mut s, Kind::Problem, "p1");
    let p2 = add(&mut s, Kind::Problem, "p2");
    let a1 = add(&mut s, Kind::Approach, "a1");
    assert!(matches!(
        s.group_pair(p2, p1, None),
        Err(SessionError::MissingCategoryText)
    ));
    assert!(matches!(
        s.group_pair(p2, p1, Some(" ")),
        Err(SessionError::EmptyText(_))
    ));
    assert!(matches!(
        s.group_pair(p2, a1, Some("x")),
        Err(SessionError::KindMismatch { .. })
    ));
    assert!(matches!(
        s.group_pair(p2, p2, Some("x")),
        Err(SessionError::SameNode)
    ));
    assert!(matches!(
        s.group_pair(p2, NodeId(99), Some("x")),
        Err(SessionError::UnknownNode(_))
    ));
    assert_eq!(s.revision(), 3);
}

#[test]
fn spawn_compacts_the_old_category() {
    let mut s = Session::default();
    let cats = categories(&mut s, Kind::Approach, &[2, 3, 2, 2]);
    let a2 = &cats[1];
    let alpha = add(&mut s, Kind::Approach, "alpha");
    let beta = a2[0];
    let spawned = s.spawn_category(alpha, beta, "new grouping").unwrap();
    assert_eq!(spawned.label.render(), "A5");
    assert_eq!(spawned.members, vec![beta, alpha]);
    assert_eq!(node_label(&s, beta), "A5.1");
    assert_eq!(node_label(&s, alpha), "A5.2");
    assert_eq!(node_label(&s, a2[1]), "A2.1");
    assert_eq!(node_label(&s, a2[2]), "A2.2");
    let old = s
        .corpus()
        .category_by_label(&Label::category(Kind::Approach, 2))
        .unwrap();
    assert_eq!(old.members, vec![a2[1], a2[2]]);
    let compacted = s
        .relabel_log()
        .filter(|e| e.reason == RelabelReason::Compacted)
        .count();
    assert_eq!(compacted, 2);
}

#[test]
fn spawn_from_single_member_category_retires_it() {
    let mut s = Session::default();
    let cats = categories(&mut s, Kind::Development, &[2, 2, 2, 2]);
    let (x, y) = (cats[3][0], cats[3][1]);
    let a1 = add(&mut s, Kind::Development, "alpha one");
    s.spawn_category(a1, x, "first split").unwrap();
    let d4 = Label::category(Kind::Development, 4);
    assert_eq!(s.corpus().category_by_label(&d4).unwrap().members, vec![y]);
    assert_eq!(node_label(&s, y), "D4.1");

    let a2 = add(&mut s, Kind::Development, "alpha two");
    let last = s.spawn_category(a2, y, "second split").unwrap();
    assert!(s.corpus().category_by_label(&d4).is_none());
    assert_eq!(last.label.render(), "D6");

    // the retired number is not reissued
    let b = add(&mut s, Kind::Development, "b");
    let c = add(&mut s, Kind::Development, "c");
    let next = s.group_pair(c, b, Some("later")).unwrap();
    assert_eq!(next.label.render(), "D7");
}

#[test]
fn spawn_requires_grouped_neighbour_and_ungrouped_subject() {
    let mut s = Session::default();
    let cats = categories(&mut s, Kind::Approach, &[2]);
    let loose = add(&mut s, Kind::Approach, "loose");
    let other = add(&mut s, Kind::Approach, "other");
    assert!(matches!(
        s.spawn_category(cats[0][0], cats[0][1], "x"),
        Err(SessionError::AlreadyGrouped(_))
    ));
    assert!(matches!(
        s.spawn_category(loose, other, "x"),
        Err(SessionError::NotGrouped(_))
    ));
}

#[test]
fn keep_orphan_marks_reviewed() {
    let mut s = Session::default();
    let a = add(&mut s, Kind::Problem, "a");
    s.keep_orphan(a).unwrap();
    let pool = s.pool(None);
    assert_eq!(pool.len(), 1);
    assert_eq!(pool[0].status, PoolStatus::Reviewed);

    let b = add(&mut s, Kind::Problem, "b");
    let pool = s.pool(None);
    assert_eq!(pool.len(), 2);
    // newest first
    assert_eq!(pool[0].node.id, b);
    assert_eq!(pool[0].status, PoolStatus::New);
    assert_eq!(pool[1].status, PoolStatus::Reviewed);
}

#[test]
fn keep_orphan_rejects_grouped_node() {
    let mut s = Session::default();
    let cats = categories(&mut s, Kind::Problem, &[2]);
    assert!(matches!(
        s.keep_orphan(cats[0][0]),
        Err(SessionError::AlreadyGrouped(_))
    ));
}

#[test]
fn subcategory_split() {
    let mut s = Session::default();
    let cats = categories(&mut s, Kind::Approach, &[4, 2]);
    let a1 = s
        .corpus()
        .category_by_label(&Label::category(Kind::Approach, 1))
        .unwrap()
        .id;
    let members = &cats[0];
    let sub = s
        .create_subcategory(a1, &[members[1], members[3]], "meters")
        .unwrap();
    assert_eq!(sub.label.render(), "A1.1");
    assert_eq!(sub.parent, Some(a1));
    assert_eq!(node_label(&s, members[1]), "A1.11");
    assert_eq!(node_label(&s, members[3]), "A1.12");
    assert_eq!(node_label(&s, members[0]), "A1.1");
    assert_eq!(node_label(&s, members[2]), "A1.2");

    let joiner = add(&mut s, Kind::Approach, "joins the sub-cluster");
    s.group_pair(joiner, members[3], None).unwrap();
    assert_eq!(node_label(&s, joiner), "A1.13");

    let second = s.create_subcategory(a1, &[members[0]], "other").unwrap();
    assert_eq!(second.label.render(), "A1.2");
    assert_eq!(node_label(&s, members[0]), "A1.21");
    assert_eq!(node_label(&s, members[2]), "A1.1");
}

#[test]
fn subcategory_errors() {
    let mut s = Session::default();
    let cats = categories(&mut s, Kind::Approach, &[4, 2]);
    let a1 = s
        .corpus()
        .category_by_label(&Label::category(Kind::Approach, 1))
        .unwrap()
        .id;
    assert!(matches!(
        s.create_subcategory(a1, &[], "x"),
        Err(SessionError::EmptyMembers)
    ));
    assert!(matches!(
        s.create_subcategory(a1, &[cats[1][0]], "x"),
        Err(SessionError::NotAMember { .. })
    ));
    assert!(matches!(
        s.create_subcategory(a1, &[cats[0][0], cats[0][0]], "x"),
        Err(SessionError::DuplicateMember(_))
    ));
    let sub = s.create_subcategory(a1, &[cats[0][0]], "x").unwrap();
    assert!(matches!(
        s.create_subcategory(sub.id, &[cats[0][0]], "y"),
        Err(SessionError::NestedSubcategory(_))
    ));
}

#[test]
fn revise_text() {
    let mut s = Session::new(mini3()).unwrap();
    let id = s.corpus().categories.keys().next().copied().unwrap();
    let current = s.corpus().categories[&id].category_code.clone();
    let same = s.revise_category_text(id, &current).unwrap();
    assert_eq!(same.category_code, current);
    assert_eq!(s.revision(), 1);
    let changed = s
        .revise_category_text(id, "accuracy of measurement")
        .unwrap();
    assert_eq!(changed.category_code, "accuracy of measurement");
    assert!(matches!(
        s.revise_category_text(id, ""),
        Err(SessionError::EmptyText(_))
    ));
    assert_eq!(s.revision(), 2);
}

#[test]
fn supercategory() {
    let mut s = Session::new(mini3()).unwrap();
    let ds: Vec<CategoryId> = s
        .corpus()
        .categories_of(Kind::Development)
        .map(|c| c.id)
        .collect();
    let sup = s
        .create_supercategory(&ds[..2], "models and policies")
        .unwrap();
    assert_eq!(sup.label.render(), "D4");
    assert!(sup.members.is_empty());
    assert!(s.corpus().is_super_category(&sup));
    assert_eq!(s.corpus().metric_categories(Kind::Development).len(), 3);
    assert!(matches!(
        s.create_supercategory(&ds[..1], "again"),
        Err(SessionError::AlreadyParented(_))
    ));
    let ps: Vec<CategoryId> = s
        .corpus()
        .categories_of(Kind::Problem)
        .map(|c| c.id)
        .collect();
    assert!(matches!(
        s.create_supercategory(&[ds[2], ps[0]], "mixed"),
        Err(SessionError::MixedKinds)
    ));
}

#[test]
fn add_triad_creates_unit_and_sources() {
    let mut s = Session::default();
    let p = add(&mut s, Kind::Problem, "p");
    let a = add(&mut s, Kind::Approach, "a");
    let d = add(&mut s, Kind::Development, "d");
    s.add_triad(&ru("RU7"), p, a, d).unwrap();
    assert_eq!(s.corpus().research_units.len(), 1);
    assert!(s.corpus().nodes[&p].sources.contains(&ru("RU7")));
    assert!(matches!(
        s.add_triad(&ru("RU7"), p, a, d),
        Err(SessionError::DuplicateTriad(_))
    ));
    assert!(matches!(
        s.add_triad(&ru("RU7"), a, p, d),
        Err(SessionError::KindMismatch { .. })
    ));
}

#[test]
fn relabel_log_csv_format() {
    let mut s = Session::default();
    let beta = add(&mut s, Kind::Problem, "beta");
    let alpha = add(&mut s, Kind::Problem, "alpha");
    s.group_pair(alpha, beta, Some("c")).unwrap();
    assert_eq!(
        s.relabel_log_csv(),
        "node_id,old_label,new_label,reason\n1,P1,P1.1,grouped_as_neighbor\n2,P2,P1.2,grouped_as_subject\n"
    );
}

#[test]
fn relabels_do_not_touch_triads() {
    let mut s = Session::new(mini3()).unwrap();
    let triads_before: Vec<Triad> = s.corpus().triads().cloned().collect();
    let a2 = s.corpus().node_by_label(&label("A2.1")).unwrap().id;
    let new_a = add(&mut s, Kind::Approach, "a fresh approach");
    s.spawn_category(new_a, a2, "split").unwrap();
    let triads_after: Vec<Triad> = s.corpus().triads().cloned().collect();
    assert_eq!(triads_before, triads_after);
    assert!(s
        .corpus()
        .category_by_label(&Label::category(Kind::Approach, 2))
        .is_none());
}

// ---------------------------------------------------------------------------
// Random operation sequences

#[derive(Debug, Clone)]
enum Step {
    Add(u8, u8),
    Group(u8, u8, bool),
    Spawn(u8, u8),
    Orphan(u8),
    Sub(u8, u8),
    Revise(u8),
    Triad(u8, u8, u8, u8),
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        3 => (0u8..3, 0u8..12).prop_map(|(k, t)| Step::Add(k, t)),
        3 => (any::<u8>(), any::<u8>(), any::<bool>()).prop_map(|(a, b, t)| Step::Group(a, b, t)),
        1 => (any::<u8>(), any::<u8>()).prop_map(|(a, b)| Step::Spawn(a, b)),
        1 => any::<u8>().prop_map(Step::Orphan),
        1 => (any::<u8>(), any::<u8>()).prop_map(|(c, m)| Step::Sub(c, m)),
        1 => any::<u8>().prop_map(Step::Revise),
        2 => (0u8..4, any::<u8>(), any::<u8>(), any::<u8>()).prop_map(|(r, p, a, d)| Step::Triad(r, p, a, d)),
    ]
}

fn pick<T: Copy>(items: &[T], index: u8) -> Option<T> {
    (!items.is_empty()).then(|| items[index as usize % items.len()])
}

fn run(session: &mut Session, step: &Step) {
    let corpus = session.corpus().clone();
    let nodes: Vec<NodeId> = corpus.nodes.keys().copied().collect();
    let ungrouped: Vec<NodeId> = nodes
        .iter()
        .copied()
        .filter(|&n| !corpus.is_grouped(n))
        .collect();
    let grouped: Vec<NodeId> = nodes
        .iter()
        .copied()
        .filter(|&n| corpus.is_grouped(n))
        .collect();
    let cats: Vec<CategoryId> = corpus.categories.keys().copied().collect();
    let of = |kind: Kind| -> Vec<NodeId> { corpus.nodes_of(kind).map(|n| n.id).collect() };
    // failures are allowed; they must simply leave no trace
    let _ = match *step {
        Step::Add(k, t) => session
            .add_code(
                Kind::ALL[k as usize],
                &format!("code {t}"),
                &RuId::new(format!("RU{}", t % 3)),
            )
            .map(|_| ()),
        Step::Group(a, b, text) => match (pick(&ungrouped, a), pick(&nodes, b)) {
            (Some(a), Some(b)) => session
                .group_pair(a, b, text.then_some("grouping"))
                .map(|_| ()),
            _ => Ok(()),
        },
        Step::Spawn(a, b) => match (pick(&ungrouped, a), pick(&grouped, b)) {
            (Some(a), Some(b)) => session.spawn_category(a, b, "spawned").map(|_| ()),
            _ => Ok(()),
        },
        Step::Orphan(a) => match pick(&ungrouped, a) {
            Some(a) => session.keep_orphan(a).map(|_| ()),
            None => Ok(()),
        },
        Step::Sub(c, m) => match pick(&cats, c) {
            Some(c) => {
                let members = &corpus.categories[&c].members;
                match pick(members, m) {
                    Some(m) => session.create_subcategory(c, &[m], "sub").map(|_| ()),
                    None => Ok(()),
                }
            }
            None => Ok(()),
        },
        Step::Revise(c) => match pick(&cats, c) {
            Some(c) => session.revise_category_text(c, "revised").map(|_| ()),
            None => Ok(()),
        },
        Step::Triad(r, p, a, d) => match (
            pick(&of(Kind::Problem), p),
            pick(&of(Kind::Approach), a),
            pick(&of(Kind::Development), d),
        ) {
            (Some(p), Some(a), Some(d)) => session
                .add_triad(&RuId::new(format!("RU{r}")), p, a, d)
                .map(|_| ()),
            _ => Ok(()),
        },
    };
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn session_invariants_hold(steps in proptest::collection::vec(step(), 1..60), start_with_mini3 in any::<bool>()) {
        let mut session = if start_with_mini3 { Session::new(mini3()).unwrap() } else { Session::default() };
        let mut issued: Vec<(Kind, u32)> = session.corpus().categories.values().map(|c| (c.kind, c.label.category)).collect();
        for step in &steps {
            let before = session.corpus().clone();
            let rev = session.revision();
            run(&mut session, step);
            let corpus = session.corpus();

            // failed operations leave nothing behind; successful ones bump by one
            prop_assert!(session.revision() == rev || session.revision() == rev + 1);
            if session.revision() == rev {
                prop_assert_eq!(corpus, &before);
            }

            prop_assert!(validate_corpus(corpus).is_clean(), "{}", validate_corpus(corpus));

            for c in corpus.categories.values() {
                for (k, m) in c.members.iter().enumerate() {
                    prop_assert_eq!(corpus.nodes[m].label.item, Some(k as u32 + 1));
                }
            }

            // a category number, once issued and later dropped, never comes back
            for c in corpus.categories.values().filter(|c| c.label.subcategory.is_none()) {
                let key = (c.kind, c.label.category);
                if !issued.contains(&key) {
                    prop_assert!(c.label.category > issued.iter().filter(|(k, _)| *k == c.kind).map(|(_, n)| *n).max().unwrap_or(0));
                    issued.push(key);
                }
            }
        }

        let replayed = session.replay().unwrap();
        prop_assert_eq!(&replayed, session.corpus());
        prop_assert_eq!(to_json_string(&replayed), to_json_string(session.corpus()));

        // the relabel entries alone carry every pre-existing node to its final label
        let mut labels: std::collections::BTreeMap<NodeId, Label> =
            session.initial().nodes.iter().map(|(id, n)| (*id, n.label)).collect();
        for change in session.changes() {
            match change {
                Change::NodeAdded(n) => { labels.insert(n.id, n.label); }
                Change::Relabeled(e) => { labels.insert(e.node, e.new); }
                _ => {}
            }
        }
        for (id, n) in &session.corpus().nodes {
            prop_assert_eq!(labels[id], n.label);
        }
    }
}
