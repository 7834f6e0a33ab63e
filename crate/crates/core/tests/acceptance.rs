//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use amtree::measure::{q, MeasureTree, Q};
use amtree::random::{
    random_atomic, random_t2, random_tree, sampling_consistency_test, symmetric_binary, Beta,
    BetaSplitting,
};
use amtree::rng::mix;
use amtree::sample::{SamplePoint, Sampler};
use amtree::shapes::{annealed_shape_distribution, distinct_shape_law, uniform_cladogram_distribution, Mode};
use amtree::stats::{
    distance_polynomial_empirical, distance_polynomial_exact, glivenko_cantelli_sup, log_log_slope, massdist,
    massdist3_by_branch_point, vc_shatter_check, Family, MatrixFn,
};
use amtree::tree::{canonical_form, verify_axioms, CheckMode};
use amtree::triangulation::{decode, PlanarChoice, PolygonSampler, Triangulation};
use amtree::AlgebraicTree;
use num_traits::Zero;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_measure_tree(max_n: usize, seed: u64) -> MeasureTree {
    let n = 1 + (mix(seed, 99) % max_n as u64) as usize;
    random_atomic(random_tree(n, seed).unwrap(), mix(seed, 1))
}

fn axioms() -> Outcome {
    let start = Instant::now();
    let mut bad = 0;
    let mut tuples = 0u64;
    for s in 0..500 {
        let n = 1 + (s % 12) as usize;
        let t = random_tree(n, mix(1, s)).unwrap();
        let r = verify_axioms(&t, CheckMode::Exhaustive);
        tuples += r.tuples_checked;
        bad += r.violation_count;
    }
    let took = start.elapsed();
    outcome(
        bad == 0 && took < Duration::from_secs(60),
        format!("{bad} violations over {tuples} tuples in {:.1}s", took.as_secs_f64()),
    )
}

fn oracle() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for s in 0..200 {
        let mt = random_measure_tree(15, mix(2, s));
        let a = mt.branch_point_distribution().unwrap();
        let b = mt.branch_point_distribution_bruteforce().unwrap();
        if a != b {
            mismatches += 1;
        }
    }
    let took = start.elapsed();
    outcome(
        mismatches == 0 && took < Duration::from_secs(60),
        format!("{mismatches} mismatches on 200 trees in {:.1}s", took.as_secs_f64()),
    )
}

fn metric() -> Outcome {
    let mut identity_failures = 0;
    let mut four_point_failures = 0;
    let mut matrices = 0;
    for s in 0..200 {
        let mt = random_measure_tree(12, mix(3, s));
        let t = mt.tree();
        let n = mt.len();
        let r = |x, y| mt.r_nu(x, y).unwrap();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let c = t.branch_point(x, y, z);
                    if r(x, y) + r(y, z) != r(x, z) + Q::from_integer(2.into()) * r(c, y) {
                        identity_failures += 1;
                    }
                }
            }
        }
        let sampler = Sampler::new(&mt);
        let mut rng = amtree::rng::stream(mix(30, s));
        for _ in 0..25 {
            let vs: Vec<usize> = sampler
                .draw_many(&mut rng, 4)
                .into_iter()
                .map(|p| match p {
                    SamplePoint::Atom { vertex } => vertex,
                    SamplePoint::Arc { .. } => unreachable!(),
                })
                .collect();
            let d = mt.distance_matrix(&vs).unwrap();
            matrices += 1;
            let sums = [
                &d[0][1] + &d[2][3],
                &d[0][2] + &d[1][3],
                &d[0][3] + &d[1][2],
            ];
            for i in 0..3 {
                let others = sums.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).max().unwrap();
                if sums[i] > *others {
                    four_point_failures += 1;
                }
            }
        }
    }
    outcome(
        identity_failures == 0 && four_point_failures == 0,
        format!(
            "{identity_failures} identity failures, {four_point_failures} four-point failures over {matrices} matrices"
        ),
    )
}

fn total_length() -> Outcome {
    let mut bad = 0;
    for s in 0..200 {
        let mt = random_measure_tree(20, mix(4, s));
        if mt.total_length().unwrap() != mt.edge_length_sum().unwrap() {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} of 200 trees differ"))
}

/// The symmetric tree's 3-tensor law read off the closed form, with the
/// coincident samples placed where the subtree masses put them.
fn symmetric_table(levels: u32) -> BTreeMap<Vec<Q>, Q> {
    let big_n = 1i64 << levels;
    let mut out: BTreeMap<Vec<Q>, Q> = BTreeMap::new();
    let mut add = |k: Vec<Q>, w: Q| *out.entry(k).or_insert_with(Q::zero) += w;
    for k in 1..levels {
        let p = 1i64 << k;
        let w = (Q::from_integer(1.into()) - q(1, p)) * q(1, 2 * p);
        let (a, b) = (q(1, 2 * p), Q::from_integer(1.into()) - q(1, p));
        add(vec![a.clone(), a.clone(), b.clone()], w.clone());
        add(vec![a.clone(), b.clone(), a.clone()], w.clone());
        add(vec![b, a.clone(), a], w);
    }
    let w = q(1, big_n) * (Q::from_integer(1.into()) - q(1, big_n));
    let rest = Q::from_integer(1.into()) - q(1, big_n);
    let z = Q::zero();
    add(vec![z.clone(), z.clone(), rest.clone()], w.clone());
    add(vec![z.clone(), rest.clone(), z.clone()], w.clone());
    add(vec![rest, z.clone(), z.clone()], w);
    add(vec![z.clone(), z.clone(), z], q(1, big_n * big_n));
    out
}

fn symmetric_massdist() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for levels in [2u32, 3] {
        let mt = symmetric_binary(levels).unwrap();
        let exact = massdist(&mt, 3, Mode::Exact).unwrap();
        let grouped = massdist3_by_branch_point(&mt).unwrap();
        let want = symmetric_table(levels);
        let ok = exact.weights == want && grouped.weights == want;
        pass &= ok;
        notes.push(format!("N={} {} atoms {}", 1 << levels, exact.len(), if ok { "match" } else { "differ" }));
    }
    let n4 = massdist(&symmetric_binary(2).unwrap(), 3, Mode::Exact).unwrap();
    let mut weights: Vec<String> = n4.weights.values().map(|w| w.to_string()).collect();
    weights.sort();
    notes.push(format!("N=4 weights {}", weights.join(" ")));
    outcome(pass, notes.join(", "))
}

/// The two twelve-leaf trees: a balanced and a comb-like four-leaf part
/// swap places between them.
fn separating_pair() -> (MeasureTree, MeasureTree) {
    // 0 centre, 1 leaf, 2 and 3 its other neighbours, 4 cherry on 3
    let common = [(0, 1), (0, 2), (0, 3), (3, 4), (4, 5), (4, 6), (2, 7)];
    // balanced part rooted at 8, comb part rooted at 15
    let balanced = [(8, 9), (9, 10), (9, 11), (8, 12), (12, 13), (12, 14)];
    let comb = [(15, 16), (15, 17), (17, 18), (18, 19), (18, 20), (17, 21)];
    let build = |a: usize, b: usize| {
        let mut e: Vec<(usize, usize)> = common.to_vec();
        e.extend(balanced);
        e.extend(comb);
        e.push((3, a));
        e.push((2, b));
        MeasureTree::uniform_leaves(AlgebraicTree::from_edges(22, &e).unwrap())
    };
    (build(8, 15), build(15, 8))
}

fn counterexample() -> Outcome {
    let (x, y) = separating_pair();
    let leaves = (x.tree().leaves().len(), y.tree().leaves().len());
    let same_mass = massdist(&x, 3, Mode::Exact).unwrap() == massdist(&y, 3, Mode::Exact).unwrap();
    let distinct = canonical_form(x.tree()) != canonical_form(y.tree()) && !x.equivalent(&y);
    // the shape law at m mixes these laws for all k <= m, so the first
    // difference is the first m whose exact shape laws differ
    let mut separating = None;
    for m in 2..=12 {
        let a = distinct_shape_law(&x, m).unwrap();
        let b = distinct_shape_law(&y, m).unwrap();
        if a != b {
            let (key, pa) = a.iter().find(|(k, p)| b.get(*k) != Some(p)).unwrap();
            let pb = b.get(key).cloned().unwrap_or_else(Q::zero);
            separating = Some((m, format!("{key}: {pa} vs {pb}")));
            break;
        }
    }
    let detail = format!(
        "leaves {:?}, equal 3-tensor law {same_mass}, non-isomorphic {distinct}, {}",
        leaves,
        match &separating {
            Some((m, ev)) => format!("shape laws equal below m={m} and differ at m={m} ({ev})"),
            None => "no separating m".to_string(),
        }
    );
    outcome(leaves == (12, 12) && same_mass && distinct && separating.is_some(), detail)
}

/// Dual edges of the twelve-gon figure, as drawn: triangle centres and
/// arc midpoints in the unit disc.
#[allow(clippy::approx_constant)]
const FIGURE_EDGES: [[(f64, f64); 2]; 21] = [
    [(-0.122008, -0.455342), (0.044658, 0.166667)],
    [(0.455342, -0.455342), (-0.122008, -0.455342)],
    [(-0.965926, -0.258819), (-0.910684, 0.000000)],
    [(-0.577350, 0.333333), (0.044658, 0.166667)],
    [(0.455342, 0.788675), (0.622008, 0.500000)],
    [(0.258819, 0.965926), (0.455342, 0.788675)],
    [(0.622008, 0.500000), (0.965926, 0.258819)],
    [(0.707107, -0.707107), (0.288675, -0.744017)],
    [(0.288675, -0.744017), (0.455342, -0.455342)],
    [(-0.000000, -0.910684), (0.288675, -0.744017)],
    [(0.258819, -0.965926), (-0.000000, -0.910684)],
    [(0.707107, 0.707107), (0.455342, 0.788675)],
    [(-0.707107, 0.707107), (-0.455342, 0.788675)],
    [(-0.258819, -0.965926), (-0.000000, -0.910684)],
    [(-0.910684, 0.000000), (-0.577350, 0.333333)],
    [(0.044658, 0.166667), (0.622008, 0.500000)],
    [(-0.965926, 0.258819), (-0.910684, 0.000000)],
    [(-0.455342, 0.788675), (-0.577350, 0.333333)],
    [(-0.258819, 0.965926), (-0.455342, 0.788675)],
    [(-0.707107, -0.707107), (-0.122008, -0.455342)],
    [(0.965926, -0.258819), (0.455342, -0.455342)],
];

fn twelve_gon() -> Triangulation {
    Triangulation::polygon(
        12,
        vec![
            [0, 7, 8],
            [0, 8, 11],
            [3, 5, 7],
            [1, 2, 3],
            [0, 1, 3],
            [8, 10, 11],
            [8, 9, 10],
            [5, 6, 7],
            [0, 3, 7],
            [3, 4, 5],
        ],
    )
}

fn figure_tree() -> AlgebraicTree {
    let mut ids: Vec<(i64, i64)> = Vec::new();
    let mut id = |p: (f64, f64)| {
        let key = ((p.0 * 1e4).round() as i64, (p.1 * 1e4).round() as i64);
        match ids.iter().position(|&k| k == key) {
            Some(i) => i,
            None => {
                ids.push(key);
                ids.len() - 1
            }
        }
    };
    let edges: Vec<(usize, usize)> = FIGURE_EDGES.iter().map(|[a, b]| (id(*a), id(*b))).collect();
    AlgebraicTree::from_edges(ids.len(), &edges).unwrap()
}

fn coding_round_trip() -> Outcome {
    let mut tree_failures = 0;
    for s in 0..200u64 {
        let leaves = 1 + (mix(7, s) % 50) as usize;
        let mt = random_t2(leaves, mix(70, s)).unwrap();
        let choice = if s % 2 == 0 {
            PlanarChoice::Canonical
        } else {
            PlanarChoice::Random(s)
        };
        let ok = decode(&mt, None, choice)
            .and_then(|c| c.code())
            .map(|back| back.equivalent(&mt))
            .unwrap_or(false);
        if !ok {
            tree_failures += 1;
        }
    }
    let sampler = PolygonSampler::new(30);
    let mut tri_failures = 0;
    for s in 0..200u64 {
        let n = 3 + (mix(8, s) % 28) as usize;
        let c = sampler.sample(n, mix(80, s)).unwrap();
        let ok = c
            .code()
            .and_then(|mt| decode(&mt, None, PlanarChoice::Random(s)).map(|d| (mt, d)))
            .and_then(|(mt, d)| Ok(d.code()?.equivalent(&mt)))
            .unwrap_or(false);
        if !ok {
            tri_failures += 1;
        }
    }
    let coded = twelve_gon().code().unwrap();
    let figure = canonical_form(coded.tree()) == canonical_form(&figure_tree());
    let arcs_ok = coded.tree().leaves().iter().all(|&l| *coded.arc(l) == q(1, 12));
    outcome(
        tree_failures == 0 && tri_failures == 0 && figure && arcs_ok,
        format!(
            "{tree_failures}/200 tree and {tri_failures}/200 triangulation failures, twelve-gon matches figure {figure}, arcs 1/12 {arcs_ok}"
        ),
    )
}

fn crt_limit() -> Outcome {
    let uniform = uniform_cladogram_distribution(4);
    let start = Instant::now();
    let gen = BetaSplitting::new(Beta::Finite(-1.5), 512);
    let beta = annealed_shape_distribution(4, 20_000, 5, 11, |s| gen.tree(512, s)).unwrap();
    let tv_beta = beta.tv_distance(&uniform).unwrap();
    let t_beta = start.elapsed();
    let start = Instant::now();
    let sampler = PolygonSampler::new(512);
    let tri = annealed_shape_distribution(4, 10_000, 10, 12, |s| sampler.sample(512, s)?.code()).unwrap();
    let tv_tri = tri.tv_distance(&uniform).unwrap();
    let t_tri = start.elapsed();
    let limit = Duration::from_secs(300);
    outcome(
        tv_beta <= 0.02 && tv_tri <= 0.02 && t_beta < limit && t_tri < limit,
        format!(
            "beta trees TV {tv_beta:.4} ({:.1}s), triangulations TV {tv_tri:.4} ({:.1}s)",
            t_beta.as_secs_f64(),
            t_tri.as_secs_f64()
        ),
    )
}

fn consistency() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for beta in [-1.5, 0.0, 1.0] {
        let mut kept = 0;
        for rep in 0..20u64 {
            let r = sampling_consistency_test(Beta::new(beta).unwrap(), 10, 4, 10_000, mix(9, rep)).unwrap();
            if !r.rejects(0.01) {
                kept += 1;
            }
        }
        pass &= kept >= 19;
        notes.push(format!("beta {beta}: {kept}/20 not rejected"));
    }
    outcome(pass, notes.join(", "))
}

fn vc_and_gc() -> Outcome {
    let mut shattered = 0;
    for s in 0..200u64 {
        let n = 1 + (s % 12) as usize;
        let t = random_tree(n, mix(10, s)).unwrap();
        if vc_shatter_check(&t, Family::Intervals, 3).unwrap().shattered {
            shattered += 1;
        }
        if vc_shatter_check(&t, Family::Components, 4).unwrap().shattered {
            shattered += 1;
        }
    }
    let mt = random_atomic(random_tree(40, 1010).unwrap(), 1011);
    let ns = [100usize, 1_000, 10_000];
    let mut notes = vec![format!("{shattered} shattered sets")];
    let mut pass = shattered == 0;
    for family in [Family::Intervals, Family::Components] {
        let mut means = Vec::new();
        for &n in &ns {
            let r = glivenko_cantelli_sup(&mt, family, n, 1_000, mix(11, n as u64)).unwrap();
            pass &= r.bound_holds();
            means.push(r.mean_sup);
        }
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let slope = log_log_slope(&xs, &means);
        pass &= (-0.6..=-0.4).contains(&slope);
        notes.push(format!("{family:?} slope {slope:.3} means {:.4}/{:.4}/{:.4}", means[0], means[1], means[2]));
    }
    outcome(pass, notes.join(", "))
}

fn polynomial() -> Outcome {
    let tree = random_tree(20, 1212).unwrap();
    let mut r = amtree::rng::stream(1213);
    let w: Vec<i64> = (0..20).map(|_| r.gen_range(1..10)).collect();
    let total: i64 = w.iter().sum();
    let mt = MeasureTree::atomic(tree, w.iter().map(|&x| q(x, total)).collect()).unwrap();
    let phi = MatrixFn::mean_offdiagonal();
    let m = 4;
    let exact = distance_polynomial_exact(&mt, m, &phi).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    let mut last = f64::INFINITY;
    for n in [10usize, 100, 1_000] {
        let (est, trials) = distance_polynomial_empirical(&mt, m, &phi, n, 400, mix(12, n as u64)).unwrap();
        let mut within = 0;
        let mut mean_dev = 0.0;
        for t in &trials {
            let d = t.deviation().unwrap();
            mean_dev += d;
            if d <= 3.0 * phi.lipschitz * t.sup_interval_dev.unwrap() + 1e-12 {
                within += 1;
            }
        }
        mean_dev /= trials.len() as f64;
        pass &= within == trials.len() && mean_dev < last;
        last = mean_dev;
        notes.push(format!(
            "n={n}: mean |dev| {mean_dev:.4}, bound held {within}/{}, |Phi_n - Phi| {:.4}",
            trials.len(),
            (est.estimate - exact).abs()
        ));
    }
    outcome(pass, notes.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("axiom suite", axioms),
        ("closed form matches brute force", oracle),
        ("metric identities", metric),
        ("total length", total_length),
        ("symmetric tree tensor law", symmetric_massdist),
        ("non-isomorphic trees with equal tensor law", counterexample),
        ("coding round trip", coding_round_trip),
        ("shape limit", crt_limit),
        ("sampling consistency", consistency),
        ("VC and Glivenko-Cantelli", vc_and_gc),
        ("empirical polynomial convergence", polynomial),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

