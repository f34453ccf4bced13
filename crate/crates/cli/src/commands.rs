use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::{json, Value};

use cofwb::coding::{decode_bits, encode_cfg, WordImage};
use cofwb::embedding::{build_embedding, check_relations, components_consistent, Presentation};
use cofwb::extension::{build_cofinitary_generator, fixed_point_profile, BuildSchedule};
use cofwb::guessing::{guess_step_ap, verify_witness_set, witness_bound, witness_set};
use cofwb::madness::{decode_vm, encode_vm, PartialFn};
use cofwb::orbits::{build_crossing_h, build_finite_orbit_group, build_ksigma_h, compute_orbits, fixed_point_witness, orbit_tree};
use cofwb::slaloms::greedy_localizer;
use cofwb::words::evaluate;
use cofwb::{FnSpec, GroupContext, Window};

use crate::input::{context, element, pairs, parse, payload, words, NamedSpec};
use crate::{verify, Command, Failure, Outcome, RunConfig};

pub fn run(cmd: Command, cfg: &RunConfig, window: Window) -> Outcome {
    if cmd == Command::Verify {
        return verify::run(cfg, window);
    }
    let input = cfg.read_input()?;
    match cmd {
        Command::BuildGenerator => build_generator(cfg, window, input),
        Command::EncodeVm => encode_vm_cmd(window, input),
        Command::DecodeVm => decode_vm_cmd(input),
        Command::EncodeCfg => encode_cfg_cmd(cfg, window, input),
        Command::DecodeCfg => decode_cfg_cmd(window, input),
        Command::OrbitTree => orbit_tree_cmd(cfg, window, input),
        Command::FiniteOrbits => finite_orbits(cfg, window, input),
        Command::Ksigma => ksigma(cfg, window, input),
        Command::Embed => embed(cfg, window, input),
        Command::Localize => localize(cfg, window, input),
        Command::GuessStep => guess_step(cfg, window, input),
        Command::WitnessSet => witness(cfg, window, input),
        Command::Verify => unreachable!("handled above"),
    }
}

fn ser<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("artifact serializes")
}

fn phase(name: &'static str) -> impl Fn(cofwb::Error) -> Failure {
    move |e| Failure::run(name, e)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorInput {
    generators: Option<Vec<NamedSpec>>,
    words: Vec<String>,
    #[serde(default)]
    targets: Vec<FnSpec>,
    #[serde(default)]
    forbidden: BTreeSet<u64>,
}

fn build_generator(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: GeneratorInput = parse(input)?;
    let ctx = context(&inp.generators, window)?;
    let ws = words(&inp.words, &ctx)?;
    let sched = BuildSchedule {
        words: ws.clone(),
        targets: inp.targets,
        stages: cfg.stages,
        forbidden: inp.forbidden,
        search_bound: cfg.search_bound,
    };
    let (g, trace) = build_cofinitary_generator(&ctx, &sched).map_err(phase("build"))?;
    let profiles = ws
        .iter()
        .map(|w| fixed_point_profile(w, &trace, &ctx).map(|p| json!({ "word": w.display(&ctx), "profile": p })))
        .collect::<cofwb::Result<Vec<_>>>()
        .map_err(phase("profile"))?;
    Ok((json!({ "g": g, "trace": trace, "profiles": profiles }), true))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VmInput {
    a: Vec<FnSpec>,
    #[serde(default)]
    f: Vec<FnSpec>,
    chi: Vec<bool>,
}

fn encode_vm_cmd(window: Window, input: Value) -> Outcome {
    let inp: VmInput = parse(input)?;
    let code = encode_vm(&inp.a, &inp.f, &inp.chi, &window).map_err(phase("encode"))?;
    let g: Vec<[u64; 2]> = code.g.iter().map(|(&a, &b)| [a, b]).collect();
    Ok((json!({ "g": g, "start": code.start, "end": code.end, "bits": inp.chi.len(), "trace": code.trace }), true))
}

#[derive(Deserialize)]
struct VmArtifact {
    g: Vec<[u64; 2]>,
    start: u64,
    bits: usize,
}

fn decode_vm_cmd(input: Value) -> Outcome {
    let art: VmArtifact = parse(payload(input))?;
    let mut g = PartialFn::new();
    for (a, b) in pairs(&art.g) {
        if g.insert(a, b).is_some() {
            return Err(Failure::usage("parse", format!("g lists {a} twice")));
        }
    }
    let bits = decode_vm(&g, art.start, art.bits).map_err(phase("decode"))?;
    Ok((json!({ "bits": bits }), true))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CfgInput {
    words: Vec<String>,
    z: Vec<bool>,
    #[serde(default)]
    targets: Vec<FnSpec>,
}

fn encode_cfg_cmd(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: CfgInput = parse(input)?;
    let ctx = GroupContext::with_base_h(window);
    let ws = words(&inp.words, &ctx)?;
    let enc = encode_cfg(&ctx, &inp.targets, &inp.z, &ws, cfg.stages).map_err(phase("encode"))?;
    Ok((ser(&enc), true))
}

#[derive(Deserialize)]
struct CodedWordIn {
    text: String,
    m: u64,
    gamma: u8,
    encoded: usize,
}

#[derive(Deserialize)]
struct CfgArtifact {
    g: cofwb::PartialInjection,
    words: Vec<CodedWordIn>,
}

fn decode_cfg_cmd(window: Window, input: Value) -> Outcome {
    let art: CfgArtifact = parse(payload(input))?;
    let ctx = GroupContext::with_base_h(window);
    let maps = vec![art.g];
    let mut out = Vec::new();
    for cw in &art.words {
        let w = cofwb::Word::parse(&cw.text, &ctx).map_err(|e| Failure::usage("parse", e))?;
        let f = WordImage { word: &w, maps: &maps };
        let bits = decode_bits(&f, cw.m, cw.gamma, cw.encoded)
            .map_err(|e| Failure::run("decode", e).with(json!({ "word": cw.text })))?;
        out.push(json!({ "word": cw.text, "gamma": cw.gamma, "m": cw.m, "bits": bits }));
    }
    Ok((json!({ "words": out }), true))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitInput {
    generators: Vec<NamedSpec>,
    #[serde(default)]
    words: Vec<String>,
}

fn orbit_tree_cmd(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: OrbitInput = parse(input)?;
    let ctx = context(&Some(inp.generators), window)?;
    let ws = words(&inp.words, &ctx)?;
    let orbits = compute_orbits(ctx.specs(), &window);
    let (h, trace) = build_crossing_h(&orbits, cfg.stages, &window).map_err(phase("crossing"))?;
    let tree = orbit_tree(&h, &orbits).map_err(phase("tree"))?;
    let assign = vec![h.clone()];
    let mut witnesses = Vec::new();
    for w in &ws {
        for n in window.points() {
            if evaluate(w, &assign, n) == Some(n) {
                let (letter, point) = fixed_point_witness(w, &h, &tree, &orbits, n).map_err(phase("witness"))?;
                witnesses.push(json!({ "word": w.display(&ctx), "fixed_point": n, "letter": letter, "point": point }));
            }
        }
    }
    let dot = tree.to_dot();
    if let Some(out) = &cfg.out {
        std::fs::write(out.with_extension("dot"), &dot).map_err(|e| Failure::run("output", e))?;
    }
    let value = json!({
        "orbits": orbits.orbits,
        "h": h,
        "trace": trace,
        "tree": tree,
        "witnesses": witnesses,
        "dot": dot,
    });
    Ok((value, true))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiniteInput {
    n_inf: usize,
    m_fin: usize,
    #[serde(default)]
    targets: Vec<FnSpec>,
}

fn finite_orbits(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: FiniteInput = parse(input)?;
    let g = build_finite_orbit_group(inp.n_inf, inp.m_fin, &window, cfg.stages, &inp.targets).map_err(phase("build"))?;
    let got = compute_orbits(&g.generators, &window);
    let matches = got.orbits.iter().map(|o| &o.members).eq(g.blocks.iter().map(|b| &b.members));
    Ok((json!({ "build": g, "orbits_match_blocks": matches }), matches))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KsigmaInput {
    f: FnSpec,
    generators: Option<Vec<NamedSpec>>,
    #[serde(default)]
    samples: Vec<String>,
}

fn ksigma(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: KsigmaInput = parse(input)?;
    // samples are tabulated well past the window so that g(p_n) is defined
    let wide = Window::new(window.w.saturating_mul(8), window.threshold).map_err(|e| Failure::usage("config", e))?;
    let ctx = context(&inp.generators, wide)?;
    let mut samples = Vec::new();
    if inp.samples.is_empty() {
        for g in 0..ctx.names().len() {
            for e in [1, -1, 2, -2] {
                samples.push(ctx.gen_power(g, e));
            }
        }
    } else {
        for s in &inp.samples {
            samples.push(element(s, &ctx)?);
        }
    }
    let b = build_ksigma_h(&inp.f, &window, cfg.stages, &samples).map_err(phase("build"))?;
    let ok = b.report.all_pass();
    Ok((ser(&b), ok))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbedInput {
    presentation: Value,
    generators: Option<Vec<NamedSpec>>,
    words: Vec<String>,
}

fn embed(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: EmbedInput = parse(input)?;
    let pres = Presentation::parse_json(&inp.presentation.to_string()).map_err(|e| Failure::usage("parse", e))?;
    let ctx = context(&inp.generators, window)?;
    let ws = words(&inp.words, &ctx)?;
    let b = build_embedding(&pres, &ctx, &ws, cfg.stages).map_err(phase("build"))?;
    let report = check_relations(&b.maps, &pres, &window);
    let consistent = components_consistent(&b.maps);
    let ok = report.pass() && consistent;
    Ok((json!({ "build": b, "relations": report, "consistent": consistent }), ok))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalizeInput {
    reals: Vec<FnSpec>,
}

fn localize(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: LocalizeInput = parse(input)?;
    let loc = greedy_localizer(&inp.reals, cfg.stages, &window).map_err(phase("localize"))?;
    let ok = loc.slalom.width_ok() && loc.steps_ordered;
    Ok((ser(&loc), ok))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GuessInput {
    family: Vec<FnSpec>,
    order: Option<Vec<usize>>,
    /// stage -> guessed pairs
    #[serde(default)]
    guesses: BTreeMap<usize, Vec<[u64; 2]>>,
}

fn guess_step(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: GuessInput = parse(input)?;
    let order = inp.order.unwrap_or_else(|| (0..inp.family.len()).collect());
    if let Some(&bad) = order.iter().find(|&&i| i >= inp.family.len()) {
        return Err(Failure::usage("parse", format!("order mentions member {bad} of {}", inp.family.len())));
    }
    let guesses = |s: usize| inp.guesses.get(&s).map(|v| pairs(v));
    let (p, trace, stats) = guess_step_ap(&inp.family, &order, &guesses, cfg.stages, &window).map_err(phase("steps"))?;
    let ok = stats.sizes.iter().enumerate().all(|(s, &n)| n <= 3 * s);
    Ok((json!({ "p": p, "trace": trace, "stats": stats }), ok))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessInput {
    f: FnSpec,
    generators: Option<Vec<NamedSpec>>,
    words: Vec<String>,
    k: usize,
}

fn witness(cfg: &RunConfig, window: Window, input: Value) -> Outcome {
    let inp: WitnessInput = parse(input)?;
    let ctx = context(&inp.generators, window)?;
    let ws = words(&inp.words, &ctx)?;
    let s = witness_set(&inp.f, &ws, inp.k, &window).map_err(phase("witness"))?;
    let failing = verify_witness_set(&s, &ws, inp.k, cfg.sub_window, &window);
    let value = json!({
        "pairs": s.iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        "bound": witness_bound(&ws, inp.k),
        "verified_below": cfg.sub_window,
        "counterexample": failing,
    });
    Ok((value, failing.is_none()))
}
