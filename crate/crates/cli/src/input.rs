use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use cofwb::{FnSpec, GroupContext, GroupElem, Letter, Window, Word};

use crate::Failure;

pub fn parse<T: DeserializeOwned>(value: Value) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::usage("parse", e))
}

/// A generator of the background group.
#[derive(Debug, Clone, Deserialize)]
pub struct NamedSpec {
    pub name: String,
    pub spec: FnSpec,
}

/// Generators default to the base permutation `h` alone.
pub fn context(gens: &Option<Vec<NamedSpec>>, window: Window) -> Result<GroupContext, Failure> {
    match gens {
        None => Ok(GroupContext::with_base_h(window)),
        Some(list) => GroupContext::new(list.iter().map(|g| (g.name.clone(), g.spec.clone())).collect(), window)
            .map_err(|e| Failure::usage("parse", e)),
    }
}

pub fn words(texts: &[String], ctx: &GroupContext) -> Result<Vec<Word>, Failure> {
    texts
        .iter()
        .map(|t| Word::parse(t, ctx).map_err(|e| Failure::usage("parse", e).with(serde_json::json!({ "word": t }))))
        .collect()
}

/// A variable-free word read as a group element.
pub fn element(text: &str, ctx: &GroupContext) -> Result<GroupElem, Failure> {
    let w = Word::parse(text, ctx).map_err(|e| Failure::usage("parse", e))?;
    let mut acc = ctx.identity();
    for l in w.letters() {
        match l {
            Letter::Group(g) => acc = acc.then_after(g),
            Letter::Var { .. } => {
                return Err(Failure::usage("parse", format!("sample {text} mentions a variable")));
            }
        }
    }
    Ok(acc)
}

/// Pairs as `[[a, b], ...]`.
pub fn pairs(list: &[[u64; 2]]) -> Vec<(u64, u64)> {
    list.iter().map(|&[a, b]| (a, b)).collect()
}

/// The `result` object of an artifact, or the value itself.
pub fn payload(v: Value) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("schema_version") && m.contains_key("result") => {
            m.remove("result").expect("checked")
        }
        other => other,
    }
}
