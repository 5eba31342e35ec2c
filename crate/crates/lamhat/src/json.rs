//! JSON encoding of derivation trees.
//!
//! A derivation node is
//!
//! ```json
//! {
//!   "rule": "app",
//!   "conclusion": {"context": {"x": ["star"]}, "subject": "x y", "type": "star"},
//!   "children": [...],
//!   "selected_branch": 1
//! }
//! ```
//!
//! where `selected_branch` appears only on case nodes. Term types encode as
//! `"star"`, `{"tag": name, "args": [multiset, ...]}`, or
//! `{"domain": multiset, "codomain": type}`; a multiset is a JSON array of
//! term types (sorted on output). Contexts map variable names to multisets.
//! Subjects are source text: patterns for `patv`/`patc` nodes, terms
//! otherwise. Decoding shares one tag registry across types and subjects,
//! so inconsistent tag arities anywhere in the file are rejected.

use serde_json::{Map, Value};

use crate::parse::{parse_pattern_str, parse_term_with};
use crate::syntax::TagRegistry;
use crate::types::{
    Derivation, Judgment, MultisetType, RuleLabel, Subject, TermType, TypeOf, TypingContext,
};

/// The JSON did not describe a derivation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid derivation JSON: {0}")]
pub struct DecodeError(pub String);

fn term_type_to_json(t: &TermType) -> Value {
    match t {
        TermType::Star => Value::String("star".into()),
        TermType::Data(tag, args) => {
            let mut obj = Map::new();
            obj.insert("tag".into(), Value::String(tag.name.clone()));
            obj.insert(
                "args".into(),
                Value::Array(args.iter().map(multiset_to_json).collect()),
            );
            Value::Object(obj)
        }
        TermType::Arrow(dom, cod) => {
            let mut obj = Map::new();
            obj.insert("domain".into(), multiset_to_json(dom));
            obj.insert("codomain".into(), term_type_to_json(cod));
            Value::Object(obj)
        }
    }
}

fn multiset_to_json(m: &MultisetType) -> Value {
    Value::Array(m.iter().map(term_type_to_json).collect())
}

fn context_to_json(ctx: &TypingContext) -> Value {
    let mut obj = Map::new();
    for (x, m) in ctx.iter() {
        obj.insert(x.clone(), multiset_to_json(m));
    }
    Value::Object(obj)
}

fn judgment_to_json(j: &Judgment) -> Value {
    let mut obj = Map::new();
    obj.insert("context".into(), context_to_json(&j.context));
    obj.insert("subject".into(), Value::String(j.subject.to_string()));
    let ty = match &j.ty {
        TypeOf::Term(t) => term_type_to_json(t),
        TypeOf::Multi(m) => multiset_to_json(m),
    };
    obj.insert("type".into(), ty);
    Value::Object(obj)
}

/// Encodes a derivation tree; the result decodes back to an equal tree.
pub fn derivation_to_json(d: &Derivation) -> Value {
    let mut obj = Map::new();
    obj.insert("rule".into(), Value::String(d.rule.name().into()));
    obj.insert("conclusion".into(), judgment_to_json(&d.conclusion));
    obj.insert(
        "children".into(),
        Value::Array(d.children.iter().map(derivation_to_json).collect()),
    );
    if let Some(k) = d.selected_branch {
        obj.insert("selected_branch".into(), Value::Number(k.into()));
    }
    Value::Object(obj)
}

fn term_type_from_json(v: &Value, reg: &mut TagRegistry) -> Result<TermType, DecodeError> {
    match v {
        Value::String(s) if s == "star" => Ok(TermType::Star),
        Value::String(s) => Err(DecodeError(format!("unknown type constant `{s}`"))),
        Value::Object(obj) => {
            if let Some(tag_name) = obj.get("tag") {
                let name = tag_name
                    .as_str()
                    .ok_or_else(|| DecodeError("tag name must be a string".into()))?;
                let args = obj.get("args").and_then(Value::as_array).ok_or_else(|| {
                    DecodeError(format!("data type `{name}` needs an args array"))
                })?;
                let tag = reg
                    .declare(name, args.len())
                    .map_err(|e| DecodeError(e.to_string()))?;
                let args = args
                    .iter()
                    .map(|a| multiset_from_json(a, reg))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(TermType::Data(tag, args))
            } else if let (Some(dom), Some(cod)) = (obj.get("domain"), obj.get("codomain")) {
                Ok(TermType::arrow(
                    multiset_from_json(dom, reg)?,
                    term_type_from_json(cod, reg)?,
                ))
            } else {
                Err(DecodeError(
                    "type object needs tag/args or domain/codomain".into(),
                ))
            }
        }
        _ => Err(DecodeError("type must be a string or an object".into())),
    }
}

fn multiset_from_json(v: &Value, reg: &mut TagRegistry) -> Result<MultisetType, DecodeError> {
    let arr = v
        .as_array()
        .ok_or_else(|| DecodeError("multiset must be an array".into()))?;
    let items = arr
        .iter()
        .map(|t| term_type_from_json(t, reg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MultisetType::new(items))
}

fn context_from_json(v: &Value, reg: &mut TagRegistry) -> Result<TypingContext, DecodeError> {
    let obj = v
        .as_object()
        .ok_or_else(|| DecodeError("context must be an object".into()))?;
    let mut ctx = TypingContext::empty();
    for (x, m) in obj {
        ctx = ctx.union(&TypingContext::bind(x.clone(), multiset_from_json(m, reg)?));
    }
    Ok(ctx)
}

fn judgment_from_json(
    v: &Value,
    rule: RuleLabel,
    reg: &mut TagRegistry,
) -> Result<Judgment, DecodeError> {
    let obj = v
        .as_object()
        .ok_or_else(|| DecodeError("conclusion must be an object".into()))?;
    let context = context_from_json(
        obj.get("context")
            .ok_or_else(|| DecodeError("conclusion needs a context".into()))?,
        reg,
    )?;
    let text = obj
        .get("subject")
        .and_then(Value::as_str)
        .ok_or_else(|| DecodeError("conclusion needs a subject string".into()))?;
    let subject = match rule {
        RuleLabel::PatVar | RuleLabel::PatData => Subject::Pattern(
            parse_pattern_str(text, reg)
                .map_err(|e| DecodeError(format!("subject `{text}`: {e}")))?,
        ),
        _ => Subject::Term(
            parse_term_with(text, reg)
                .map_err(|e| DecodeError(format!("subject `{text}`: {e}")))?,
        ),
    };
    let ty_json = obj
        .get("type")
        .ok_or_else(|| DecodeError("conclusion needs a type".into()))?;
    let ty = if ty_json.is_array() {
        TypeOf::Multi(multiset_from_json(ty_json, reg)?)
    } else {
        TypeOf::Term(term_type_from_json(ty_json, reg)?)
    };
    Ok(Judgment {
        context,
        subject,
        ty,
    })
}

fn derivation_from_json_with(v: &Value, reg: &mut TagRegistry) -> Result<Derivation, DecodeError> {
    let obj = v
        .as_object()
        .ok_or_else(|| DecodeError("derivation node must be an object".into()))?;
    let rule_name = obj
        .get("rule")
        .and_then(Value::as_str)
        .ok_or_else(|| DecodeError("node needs a rule name".into()))?;
    let rule = RuleLabel::from_name(rule_name)
        .ok_or_else(|| DecodeError(format!("unknown rule `{rule_name}`")))?;
    let conclusion = judgment_from_json(
        obj.get("conclusion")
            .ok_or_else(|| DecodeError("node needs a conclusion".into()))?,
        rule,
        reg,
    )?;
    let children = obj
        .get("children")
        .and_then(Value::as_array)
        .ok_or_else(|| DecodeError("node needs a children array".into()))?
        .iter()
        .map(|c| derivation_from_json_with(c, reg))
        .collect::<Result<Vec<_>, _>>()?;
    let selected_branch = match obj.get("selected_branch") {
        None => None,
        Some(k) => Some(
            k.as_u64()
                .map(|k| k as usize)
                .ok_or_else(|| DecodeError("selected_branch must be a natural number".into()))?,
        ),
    };
    Ok(Derivation {
        rule,
        conclusion,
        children,
        selected_branch,
    })
}

/// Decodes a derivation tree, checking tag-arity consistency across the
/// whole file.
pub fn derivation_from_json(v: &Value) -> Result<Derivation, DecodeError> {
    let mut reg = TagRegistry::new();
    derivation_from_json_with(v, &mut reg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::syntax::{Tag, Term};

    fn star() -> TermType {
        TermType::Star
    }

    #[test]
    fn type_encoding_shapes() {
        assert_eq!(term_type_to_json(&star()), Value::String("star".into()));
        let pair = TermType::data(
            Tag::new("Pair", 2),
            vec![MultisetType::singleton(star()), MultisetType::empty()],
        );
        assert_eq!(
            serde_json::to_string(&term_type_to_json(&pair)).unwrap(),
            r#"{"args":[["star"],[]],"tag":"Pair"}"#
        );
        let arrow = TermType::arrow(MultisetType::singleton(star()), star());
        assert_eq!(
            serde_json::to_string(&term_type_to_json(&arrow)).unwrap(),
            r#"{"codomain":"star","domain":["star"]}"#
        );
    }

    #[test]
    fn derivation_round_trips() {
        let (term, _) = parse_term("case Pair(a,b) of {Pair(x,y)->x}").unwrap();
        let Term::Case(scrut_term, _) = &term else {
            panic!("fixture shape")
        };
        let const_pair = Derivation::constant(
            Tag::new("Pair", 2),
            vec![
                Derivation::many(&Term::var("a"), vec![Derivation::ax("a", star())]),
                Derivation::many(&Term::var("b"), vec![]),
            ],
        );
        let scrut = Derivation::many(scrut_term, vec![const_pair]);
        let body = Derivation::ax("x", star());
        let d = Derivation::case(&term, 0, scrut, body);
        assert!(crate::types::check_derivation(&d).is_ok());

        let v = derivation_to_json(&d);
        let back = derivation_from_json(&v).unwrap();
        assert_eq!(back, d);
        assert_eq!(derivation_to_json(&back), v);

        let text = serde_json::to_string_pretty(&v).unwrap();
        let reparsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(derivation_from_json(&reparsed).unwrap(), d);
    }

    #[test]
    fn decode_rejects_malformed_input() {
        let err = derivation_from_json(
            &serde_json::json!({"rule": "nope", "conclusion": {}, "children": []}),
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown rule"));

        let err = derivation_from_json(&serde_json::json!({
            "rule": "ax",
            "conclusion": {"context": {}, "subject": ")", "type": "star"},
            "children": []
        }))
        .unwrap_err();
        assert!(err.to_string().contains("subject"));

        let err = derivation_from_json(&serde_json::json!({
            "rule": "ax",
            "conclusion": {"context": {}, "subject": "Pair(x) Pair(y,z)", "type": "star"},
            "children": []
        }))
        .unwrap_err();
        assert!(err.to_string().contains("arity"), "{err}");
    }
}
