use proptest::prelude::*;

use seqcompare_core::layout::{compute_layout, LayoutRequest, LayoutResult, PatternLayout, PatternUnits, Rect, SortKey, UnitLayout};
use seqcompare_core::mining::Membership;

const TOL: f64 = 1e-6;

fn patterns_strategy() -> impl Strategy<Value = Vec<PatternUnits>> {
    let event = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]).prop_map(String::from);
    let set = prop::sample::select(vec![Membership::A, Membership::Both, Membership::B]);
    let pattern = (prop::collection::vec(event, 1..5), prop::collection::vec(set, 1..40));
    prop::collection::vec(pattern, 1..16).prop_map(|ps| {
        ps.into_iter()
            .enumerate()
            .map(|(i, (events, sets))| {
                let members = sets.into_iter().enumerate().map(|(j, m)| (format!("s{j}"), m)).collect();
                PatternUnits::new(format!("p{i}"), events, members)
            })
            .collect()
    })
}

fn check(patterns: &[PatternUnits], req: &LayoutRequest, out: &LayoutResult) -> Result<(), TestCaseError> {
    let canvas = req.canvas;
    let eps = 1e-9 * canvas.width.max(canvas.height);
    let rects: Vec<Rect> = patterns.iter().map(|p| out.containers[&p.id]).collect();

    for (i, r) in rects.iter().enumerate() {
        prop_assert!(canvas.contains(r, eps), "container {} leaves the canvas: {:?}", i, r);
        for s in &rects[i + 1..] {
            prop_assert!(!r.overlaps(s, eps), "containers overlap: {:?} {:?}", r, s);
        }
    }

    // area proportional to unit count
    let ratio: Vec<f64> = rects.iter().zip(patterns).map(|(r, p)| r.area() / p.weight() as f64).collect();
    let ref_ratio = ratio[0];
    for q in &ratio {
        prop_assert!((q - ref_ratio).abs() <= TOL * ref_ratio, "area ratio {} vs {}", q, ref_ratio);
    }
    if req.pattern_layout == PatternLayout::Maxfill {
        let total: f64 = rects.iter().map(Rect::area).sum();
        prop_assert!((total - canvas.area()).abs() <= TOL * canvas.area());
    }

    // units: one per member, shared size, inside their container, disjoint
    prop_assert_eq!(out.units.len(), patterns.iter().map(PatternUnits::weight).sum::<usize>());
    prop_assert!(out.unit_size >= req.unit_min && out.unit_size <= req.unit_max);
    for p in patterns {
        let mine: Vec<Rect> = out.units.iter().filter(|u| u.pid == p.id).map(|u| out.unit_rect(u)).collect();
        prop_assert_eq!(mine.len(), p.weight());
        if !out.overflow.contains(&p.id) {
            let inner = out.containers[&p.id].inset(req.padding_px);
            for u in &mine {
                prop_assert!(inner.contains(u, eps), "unit {:?} outside {:?}", u, inner);
            }
            for (i, u) in mine.iter().enumerate() {
                for v in &mine[i + 1..] {
                    prop_assert!(!u.overlaps(v, eps));
                }
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn every_combination_meets_contracts(
        patterns in patterns_strategy(),
        w in 200.0f64..1200.0,
        h in 200.0f64..900.0,
        sort_key in prop::sample::select(vec![SortKey::SupportCount, SortKey::PatternLength, SortKey::None]),
    ) {
        for pl in PatternLayout::ALL {
            for ul in UnitLayout::ALL {
                let req = LayoutRequest {
                    canvas: Rect::new(0.0, 0.0, w, h),
                    sort_key,
                    ..LayoutRequest::with_layouts(pl, ul)
                };
                let a = compute_layout(&patterns, &req).unwrap();
                let b = compute_layout(&patterns, &req).unwrap();
                prop_assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
                check(&patterns, &req, &a)?;
            }
        }
    }
}

#[test]
fn fill_layouts_follow_sort_key() {
    let pat = |id: &str, ev: &[&str], n: usize| {
        PatternUnits::new(id, ev.iter().map(|s| s.to_string()).collect(), (0..n).map(|i| (format!("s{i}"), Membership::A)).collect())
    };
    let ps = [pat("p1", &["a"], 2), pat("p2", &["a", "b", "c"], 5), pat("p3", &["b", "c"], 9)];
    let req = LayoutRequest {
        sort_key: SortKey::PatternLength,
        ..LayoutRequest::with_layouts(PatternLayout::Filly, UnitLayout::Maxfill)
    };
    let out = compute_layout(&ps, &req).unwrap();
    let ys: Vec<f64> = ["p2", "p3", "p1"].iter().map(|id| out.containers[*id].y).collect();
    assert!(ys.windows(2).all(|w| w[0] < w[1]), "{ys:?}");
}

#[test]
fn rejects_degenerate_canvas() {
    let req = LayoutRequest {
        canvas: Rect::new(0.0, 0.0, 0.0, 100.0),
        ..Default::default()
    };
    assert!(compute_layout(&[], &req).is_err());
}
