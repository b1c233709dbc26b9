use std::sync::Arc;

use diaglogic::dsl::{parse, Decl};
use diaglogic::sketch::{graph_sketch, magma_sketch};
use diaglogic::{check_realization, enumerate_morphisms, restrict_along, Presentation, RealMorphism, Realization};
use proptest::prelude::*;

/// A graph as `(vertex count, edge list)`.
fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..=3).prop_flat_map(|v| (Just(v), prop::collection::vec((0..v, 0..v), 0..=3)))
}

fn graph_realization(v: usize, edges: &[(usize, usize)]) -> Arc<Realization> {
    let mut p = Presentation::new("G", Arc::new(graph_sketch()));
    for i in 0..v {
        p = p.elem(&format!("v{i}"), "V");
    }
    for (k, (a, b)) in edges.iter().enumerate() {
        let e = format!("e{k}");
        p = p.elem(&e, "E").act("s", &e, &format!("v{a}")).act("t", &e, &format!("v{b}"));
    }
    Arc::new(p.into_realization().unwrap())
}

/// A magma on `0..n` with multiplication table `table[x * n + y]`.
fn magma() -> impl Strategy<Value = (usize, Vec<usize>)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), prop::collection::vec(0..n, n * n)))
}

fn magma_realization(n: usize, table: &[usize]) -> Arc<Realization> {
    let mut p = Presentation::new("M", Arc::new(magma_sketch()));
    for i in 0..n {
        p = p.elem(&format!("m{i}"), "M");
    }
    for x in 0..n {
        for y in 0..n {
            let pr = format!("p{x}_{y}");
            p = p.elem(&pr, "M2").act("s", &pr, &format!("m{x}")).act("t", &pr, &format!("m{y}")).act(
                "k",
                &pr,
                &format!("m{}", table[x * n + y]),
            );
        }
    }
    Arc::new(p.into_realization().unwrap())
}

fn all_maps(dom: usize, cod: usize) -> Vec<Vec<usize>> {
    (0..dom).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter().flat_map(|v| (0..cod).map(move |y| [v.clone(), vec![y]].concat())).collect()
    })
}

fn graph_homs(g: &(usize, Vec<(usize, usize)>), h: &(usize, Vec<(usize, usize)>)) -> usize {
    all_maps(g.0, h.0)
        .iter()
        .map(|f| {
            g.1.iter().map(|&(a, b)| h.1.iter().filter(|&&(c, d)| c == f[a] && d == f[b]).count()).product::<usize>()
        })
        .sum()
}

fn magma_homs(m: &(usize, Vec<usize>), n: &(usize, Vec<usize>)) -> usize {
    all_maps(m.0, n.0)
        .iter()
        .filter(|f| (0..m.0).all(|x| (0..m.0).all(|y| f[m.1[x * m.0 + y]] == n.1[f[x] * n.0 + f[y]])))
        .count()
}

fn flip() -> diaglogic::SketchMorphism {
    let ds =
        parse("morphism flip : graph -> graph {\n  obj E => E\n  obj V => V\n  arr s => t\n  arr t => s\n}\n").unwrap();
    let Decl::Morphism(m) = ds.into_iter().next().unwrap() else { panic!() };
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_hom_counts(g in graph(), h in graph()) {
        let homs = enumerate_morphisms(&graph_realization(g.0, &g.1), &graph_realization(h.0, &h.1)).unwrap();
        prop_assert_eq!(homs.len(), graph_homs(&g, &h));
    }

    #[test]
    fn magma_hom_counts(m in magma(), n in magma()) {
        let homs = enumerate_morphisms(&magma_realization(m.0, &m.1), &magma_realization(n.0, &n.1)).unwrap();
        prop_assert_eq!(homs.len(), magma_homs(&m, &n));
    }

    #[test]
    fn restriction_preserves_validity(g in graph()) {
        let r = graph_realization(g.0, &g.1);
        let flipped = restrict_along(&flip(), &r).unwrap();
        prop_assert!(check_realization(&flipped).is_empty());
        let back = restrict_along(&flip(), &flipped).unwrap();
        prop_assert_eq!(back.action("s"), r.action("s"));
    }

    #[test]
    fn homs_include_the_identity(m in magma()) {
        let r = magma_realization(m.0, &m.1);
        let id = RealMorphism::identity(r.clone()).signature();
        let homs = enumerate_morphisms(&r, &r).unwrap();
        prop_assert!(homs.iter().any(|h| h.signature() == id));
    }
}
