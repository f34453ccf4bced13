//! The property suite behind `verify`. Cases are independent and run on
//! scoped threads; each owns its data and its seeded generator.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use cofwb::coding::{decode_bits, encode_cfg, WordImage};
use cofwb::embedding::{apply_relations, build_embedding, check_relations, components_consistent, in_poset, Presentation};
use cofwb::extension::{build_cofinitary_generator, fixed_point_profile, is_good_extension, BuildSchedule};
use cofwb::guessing::{guess_step_ap, verify_witness_set, witness_set};
use cofwb::madness::{decode_vm, encode_vm};
use cofwb::orbits::{build_crossing_h, build_finite_orbit_group, build_ksigma_h, compute_orbits, fixed_point_witness, orbit_tree};
use cofwb::slaloms::{greedy_localizer, localizes};
use cofwb::words::{evaluate, reduce, Letter};
use cofwb::{pair, unpair, FnSpec, GroupContext, PartialInjection, Window, Word};

use crate::{Outcome, RunConfig};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: cofwb::Error) -> String {
    e.to_string()
}

struct Case {
    name: &'static str,
    run: fn(&Params, &mut ChaCha8Rng) -> Check,
}

struct Params {
    window: Window,
    stages: usize,
    sub_window: u64,
}

const CASES: &[Case] = &[
    Case { name: "pairing", run: pairing },
    Case { name: "good-extension-oracle", run: oracle },
    Case { name: "fixed-points-at-entry", run: fixed_points },
    Case { name: "pointer-chain-roundtrip", run: vm },
    Case { name: "two-mode-roundtrip", run: cfg_roundtrip },
    Case { name: "orbit-tree", run: orbits },
    Case { name: "finite-orbits", run: finite_orbits },
    Case { name: "ksigma", run: ksigma },
    Case { name: "embedding", run: embedding },
    Case { name: "localizer", run: localizer },
    Case { name: "guessing", run: guessing },
];

pub fn run(cfg: &RunConfig, window: Window) -> Outcome {
    let params = Params { window, stages: cfg.stages, sub_window: cfg.sub_window };
    let results: Vec<(bool, Value)> = std::thread::scope(|s| {
        let handles: Vec<_> = CASES
            .iter()
            .enumerate()
            .map(|(i, case)| {
                let params = &params;
                let seed = cfg.seed.wrapping_add(i as u64);
                s.spawn(move || {
                    let mut r = ChaCha8Rng::seed_from_u64(seed);
                    let t = Instant::now();
                    let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| (case.run)(params, &mut r)))
                        .unwrap_or_else(|_| Err("panicked".into()));
                    let ms = t.elapsed().as_millis();
                    eprintln!("{} {} ({ms} ms)", if out.is_ok() { "PASS" } else { "FAIL" }, case.name);
                    match out {
                        Ok(detail) => (true, json!({ "name": case.name, "pass": true, "detail": detail })),
                        Err(why) => (false, json!({ "name": case.name, "pass": false, "detail": why })),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("case thread")).collect()
    });
    let ok = results.iter().all(|(p, _)| *p);
    let checks: Vec<Value> = results.into_iter().map(|(_, v)| v).collect();
    Ok((json!({ "pass": ok, "checks": checks }), ok))
}

fn random_injection(r: &mut ChaCha8Rng, max_pairs: usize, span: u64) -> PartialInjection {
    let mut p = PartialInjection::new();
    let n = r.gen_range(0..=max_pairs);
    for _ in 0..4 * n {
        if p.len() == n {
            break;
        }
        let (a, b) = (r.gen_range(0..span), r.gen_range(0..span));
        if p.can_insert(a, b) {
            p.insert(a, b).expect("checked");
        }
    }
    p
}

fn random_word(r: &mut ChaCha8Rng, ctx: &GroupContext, max_len: usize) -> Word {
    let ngen = ctx.names().len();
    loop {
        let len = r.gen_range(1..=max_len + 2);
        let seq: Vec<Letter> = (0..len)
            .map(|_| {
                if ngen > 0 && r.gen_bool(0.35) {
                    Letter::Group(ctx.gen_power(r.gen_range(0..ngen), *[-2, -1, 1, 2].choose(r).expect("nonempty")))
                } else if r.gen_bool(0.5) {
                    Letter::x(0)
                } else {
                    Letter::x_inv(0)
                }
            })
            .collect();
        let w = reduce(seq);
        if w.has_var() && w.len() <= max_len {
            return w;
        }
    }
}

fn pairing(_: &Params, r: &mut ChaCha8Rng) -> Check {
    for _ in 0..10_000 {
        let (a, b) = (r.gen_range(0..1u64 << 20), r.gen_range(0..1u64 << 20));
        ensure(unpair(pair(a, b)) == (a, b), || format!("roundtrip fails at ({a}, {b})"))?;
    }
    Ok("10000 random pairs roundtrip".into())
}

/// Brute force over all splits `w = u^-1 z u` found letter by letter.
fn brute_good(p: &[PartialInjection], q: &[PartialInjection], w: &Word, window: &Window) -> bool {
    let n = w.len();
    let splits: Vec<(Word, Word)> = (0..n)
        .take_while(|&k| k == 0 || 2 * k < n)
        .filter(|&k| w.factor(0, k) == w.factor(n - k, n).inverse())
        .map(|k| (w.factor(n - k, n), w.factor(k, n - k)))
        .collect();
    window.points().all(|l| {
        evaluate(w, q, l) != Some(l)
            || evaluate(w, p, l).is_some()
            || splits.iter().any(|(u, z)| evaluate(u, q, l).is_some_and(|k| evaluate(z, p, k) == Some(k)))
    })
}

fn oracle(_: &Params, r: &mut ChaCha8Rng) -> Check {
    let swaps: Vec<(u64, u64)> = (0..6).map(|k| (6 * k + 1, 6 * k + 2)).collect();
    let ctx = GroupContext::new(vec![("h".into(), FnSpec::BaseH), ("g".into(), FnSpec::patch(swaps))], Window::new(40, 2).map_err(err)?)
        .map_err(err)?;
    for i in 0..200 {
        let w = random_word(r, &ctx, 5);
        let p = vec![random_injection(r, 4, 40)];
        let mut q = p.clone();
        for _ in 0..3 {
            let (a, b) = (r.gen_range(0..12), r.gen_range(0..12));
            if q[0].can_insert(a, b) {
                q[0].insert(a, b).map_err(err)?;
            }
        }
        let fast = is_good_extension(&p, &q, &w, &ctx).map_err(err)?;
        ensure(fast == brute_good(&p, &q, &w, &ctx.window()), || format!("instance {i} disagrees on {}", w.display(&ctx)))?;
    }
    Ok("200 instances agree with brute force".into())
}

fn fixed_points(prm: &Params, r: &mut ChaCha8Rng) -> Check {
    let ctx = GroupContext::with_base_h(prm.window);
    let mut total = 0;
    for build in 0..10 {
        let mut words: Vec<Word> = Vec::new();
        for _ in 0..r.gen_range(1..=6) {
            let w = random_word(r, &ctx, 5);
            if !words.contains(&w) {
                words.push(w);
            }
        }
        let sched = BuildSchedule { words: words.clone(), stages: prm.stages, ..Default::default() };
        let (_, trace) = build_cofinitary_generator(&ctx, &sched).map_err(|e| format!("build {build}: {e}"))?;
        for w in &words {
            let prof = fixed_point_profile(w, &trace, &ctx).map_err(err)?;
            let last = *prof.counts.last().expect("counts are nonempty");
            ensure(last == prof.shortest_at_entry, || format!("build {build}, {}: {last} vs {}", w.display(&ctx), prof.shortest_at_entry))?;
            total += 1;
        }
    }
    Ok(format!("{total} scheduled words match their shortest conjugate subword"))
}

fn vm(_: &Params, r: &mut ChaCha8Rng) -> Check {
    let window = Window::new(4096, 64).map_err(err)?;
    for i in 0..100 {
        let a: Vec<FnSpec> = (0..r.gen_range(1..=4)).map(|_| FnSpec::affine(r.gen_range(1..3), r.gen_range(0..40))).collect();
        let f: Vec<FnSpec> = (0..r.gen_range(0..=3)).map(|_| FnSpec::affine(3, r.gen_range(0..50))).collect();
        let chi: Vec<bool> = (0..r.gen_range(0..=16)).map(|_| r.gen()).collect();
        let code = encode_vm(&a, &f, &chi, &window).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(decode_vm(&code.g, code.start, chi.len()).map_err(err)? == chi, || format!("instance {i} decodes wrongly"))?;
    }
    Ok("100 codes roundtrip".into())
}

fn cfg_roundtrip(_: &Params, r: &mut ChaCha8Rng) -> Check {
    let ctx = GroupContext::with_base_h(Window::new(2048, 32).map_err(err)?);
    let words: Vec<Word> =
        ["x", "h^-1 x h", "x^-1 h x", "x h x"].iter().map(|t| Word::parse(t, &ctx)).collect::<cofwb::Result<_>>().map_err(err)?;
    let z: Vec<bool> = (0..6).map(|_| r.gen()).collect();
    let enc = encode_cfg(&ctx, &[FnSpec::affine(1, 5)], &z, &words, words.len() + 2 * z.len() + 2).map_err(err)?;
    let maps = vec![enc.g.clone()];
    for cw in &enc.words {
        let f = WordImage { word: &words[cw.id], maps: &maps };
        let bits = decode_bits(&f, cw.m, cw.gamma, cw.encoded).map_err(err)?;
        ensure(bits == z[..cw.encoded] && cw.encoded == z.len(), || format!("{} decodes {bits:?}", cw.text))?;
    }
    Ok(format!("{} words decode all {} bits", enc.words.len(), z.len()))
}

fn orbits(prm: &Params, r: &mut ChaCha8Rng) -> Check {
    let w = prm.window.w;
    let mut swaps = Vec::new();
    let mut start = 0;
    while start + 1 < w {
        let size = r.gen_range(2..=3).min(w - start);
        swaps.push((start, start + size - 1));
        start += size;
    }
    let ctx = GroupContext::new(vec![("a".into(), FnSpec::patch(swaps))], prm.window).map_err(err)?;
    let orbits = compute_orbits(ctx.specs(), &prm.window);
    let (h, _) = build_crossing_h(&orbits, prm.stages, &prm.window).map_err(err)?;
    let tree = orbit_tree(&h, &orbits).map_err(err)?;
    let words: Vec<Word> = ["x", "a x", "x^-1 a x", "a x a x^-1", "x a x"].iter().map(|t| Word::parse(t, &ctx)).collect::<cofwb::Result<_>>().map_err(err)?;
    let assign = vec![h.clone()];
    let mut witnessed = 0;
    for word in &words {
        for n in prm.window.points() {
            if evaluate(word, &assign, n) == Some(n) {
                fixed_point_witness(word, &h, &tree, &orbits, n).map_err(|e| format!("{} at {n}: {e}", word.display(&ctx)))?;
                witnessed += 1;
            }
        }
    }
    Ok(format!("{} orbits, {} crossings, {witnessed} fixed points witnessed", orbits.len(), tree.edges.len()))
}

fn finite_orbits(prm: &Params, _: &mut ChaCha8Rng) -> Check {
    for (n_inf, m_fin) in [(1, 0), (2, 1), (3, 2)] {
        let g = build_finite_orbit_group(n_inf, m_fin, &prm.window, prm.stages.min(8), &[FnSpec::affine(2, 1)]).map_err(err)?;
        let got = compute_orbits(&g.generators, &prm.window);
        ensure(got.orbits.iter().map(|o| &o.members).eq(g.blocks.iter().map(|b| &b.members)), || format!("({n_inf},{m_fin}) orbits differ"))?;
    }
    Ok("three partitions reproduced".into())
}

fn ksigma(_: &Params, _: &mut ChaCha8Rng) -> Check {
    let wide = GroupContext::with_base_h(Window::new(1 << 15, 64).map_err(err)?);
    let samples: Vec<_> = [vec![(0, 1)], vec![(0, -1)], vec![(0, 3)]].iter().map(|w| wide.element(w)).collect();
    let b = build_ksigma_h(&FnSpec::affine(2, 2), &Window::new(4096, 64).map_err(err)?, 12, &samples).map_err(err)?;
    ensure(b.report.all_pass(), || format!("{:?}", b.report))?;
    Ok(format!("|h| = {}, M = {}", b.h.len(), b.report.main.threshold_m))
}

fn embedding(prm: &Params, r: &mut ChaCha8Rng) -> Check {
    let ctx = GroupContext::with_base_h(prm.window);
    for (pres, texts) in [
        (Presentation::abelian(&[2]), vec!["x0", "h x0", "x0 h x0 h^-1"]),
        (Presentation::abelian(&[2, 2]), vec!["x0", "x1", "x0 x1", "h x0 x1"]),
    ] {
        let words: Vec<Word> = texts.iter().map(|t| Word::parse(t, &ctx)).collect::<cofwb::Result<_>>().map_err(err)?;
        let b = build_embedding(&pres, &ctx, &words, prm.stages).map_err(err)?;
        ensure(check_relations(&b.maps, &pres, &prm.window).pass() && components_consistent(&b.maps), || "relators fail".into())?;
        for (j, c) in b.fp_counts.iter().enumerate() {
            ensure(c[j.min(c.len() - 1)..].windows(2).all(|p| p[0] == p[1]), || format!("{}: {c:?}", texts[j]))?;
        }
        let all = (0..pres.generators).collect();
        for _ in 0..50 {
            let p: Vec<PartialInjection> = (0..pres.generators).map(|_| random_injection(r, 3, 12)).collect();
            if in_poset(&p, &pres, None).map_err(err)? {
                let q = apply_relations(&p, &pres, &all, &prm.window, None).map_err(err)?;
                ensure(apply_relations(&q, &pres, &all, &prm.window, None).map_err(err)? == q, || "closure not idempotent".into())?;
            }
        }
    }
    Ok("Z2 and Z2+Z2 embed; closures idempotent".into())
}

fn localizer(prm: &Params, r: &mut ChaCha8Rng) -> Check {
    let reals: Vec<FnSpec> = (0..prm.stages).map(|_| FnSpec::affine(r.gen_range(0..3), r.gen_range(0..30))).collect();
    let loc = greedy_localizer(&reals, prm.stages, &prm.window).map_err(err)?;
    ensure(loc.slalom.width_ok(), || "width invariant fails".into())?;
    for (i, f) in reals.iter().enumerate() {
        let (ok, m) = localizes(&loc.slalom, f, &prm.window);
        ensure(ok && m.is_some_and(|m| m as usize <= loc.ingestion[i]), || format!("real {i} escapes"))?;
    }
    Ok(format!("{} reals localized", reals.len()))
}

fn guessing(prm: &Params, _: &mut ChaCha8Rng) -> Check {
    let family: Vec<FnSpec> = (1..=4).map(|c| FnSpec::affine(1, c)).collect();
    let order: Vec<usize> = (0..4).collect();
    let guesses = |s: usize| s.is_multiple_of(2).then(|| (0..2 * s as u64 + 1).map(|i| (2 * i + 1, 2 * i + 200)).collect());
    let (_, _, st) = guess_step_ap(&family, &order, &guesses, prm.stages, &prm.window).map_err(err)?;
    ensure(st.sizes.iter().enumerate().all(|(s, &n)| n <= 3 * s), || format!("sizes {:?}", st.sizes))?;
    let small = Window::new(64, 4).map_err(err)?;
    let ctx = GroupContext::with_base_h(small);
    let words = vec![Word::parse("x", &ctx).map_err(err)?];
    let (g, _) = build_cofinitary_generator(&ctx, &BuildSchedule { words: words.clone(), stages: 30, ..Default::default() }).map_err(err)?;
    for k in 0..=2 {
        let s = witness_set(&FnSpec::from_partial(&g), &words, k, &small).map_err(err)?;
        ensure(verify_witness_set(&s, &words, k, prm.sub_window.min(12), &small).is_none(), || format!("witness set fails for k = {k}"))?;
    }
    Ok(format!("{} stages within 3s, witness sets verified for k <= 2", st.sizes.len()))
}
