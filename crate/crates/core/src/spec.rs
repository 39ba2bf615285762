//! JSON norm specs.
//!
//! ```json
//! {"dim": 3, "norm": {"type": "max", "terms": [
//!     {"type": "lp", "p": "inf"},
//!     {"type": "scale", "c": 0.7, "term": {"type": "lp", "p": 1}}
//! ]}}
//! ```
//!
//! Node types: `lp` (`p`, optional `weights`), `max` (`terms`), `scale`
//! (`c`, `term`), `formmax` (`rows`) and `blocksum` (`p`, `blocks` of
//! `{"dim", "norm"}`). `p` is a number or the string `"inf"`. An `lp` node
//! without weights takes its dimension from the enclosing context.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::norm::{Exponent, NormExpr};
use crate::space::LatticeSpace;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentJson {
    Number(f64),
    Name(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum NormJson {
    Lp {
        p: ExponentJson,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Max {
        terms: Vec<NormJson>,
    },
    Scale {
        c: f64,
        term: Box<NormJson>,
    },
    Formmax {
        rows: Vec<Vec<f64>>,
    },
    Blocksum {
        p: ExponentJson,
        blocks: Vec<BlockJson>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockJson {
    dim: usize,
    norm: NormJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceJson {
    dim: usize,
    norm: NormJson,
}

fn exponent_from_json(p: &ExponentJson) -> Result<Exponent> {
    let e = match p {
        ExponentJson::Number(v) => Exponent::Finite(*v),
        ExponentJson::Name(s) if s.eq_ignore_ascii_case("inf") => Exponent::Infinity,
        ExponentJson::Name(s) => {
            return Err(Error::MalformedSpec(format!(
                "exponent must be a number or \"inf\", got {s:?}"
            )))
        }
    };
    e.validate()
        .map_err(|e| Error::MalformedSpec(e.to_string()))
}

fn exponent_to_json(p: Exponent) -> ExponentJson {
    match p {
        Exponent::Finite(v) => ExponentJson::Number(v),
        Exponent::Infinity => ExponentJson::Name("inf".into()),
    }
}

fn to_expr(node: &NormJson, dim: usize) -> Result<NormExpr> {
    let expr = match node {
        NormJson::Lp { p, weights } => NormExpr::WeightedP {
            p: exponent_from_json(p)?,
            weights: weights.clone().unwrap_or_else(|| vec![1.0; dim]),
        },
        NormJson::Max { terms } => NormExpr::MaxOf(
            terms
                .iter()
                .map(|t| to_expr(t, dim))
                .collect::<Result<_>>()?,
        ),
        NormJson::Scale { c, term } => NormExpr::Scale {
            c: *c,
            term: Box::new(to_expr(term, dim)?),
        },
        NormJson::Formmax { rows } => NormExpr::FormMax { rows: rows.clone() },
        NormJson::Blocksum { p, blocks } => {
            let total: usize = blocks.iter().map(|b| b.dim).sum();
            if total != dim {
                return Err(Error::MalformedSpec(format!(
                    "blocksum block dims add up to {total}, expected {dim}"
                )));
            }
            NormExpr::BlockSum {
                p: exponent_from_json(p)?,
                blocks: blocks
                    .iter()
                    .map(|b| to_expr(&b.norm, b.dim))
                    .collect::<Result<_>>()?,
            }
        }
    };
    let found = expr
        .validate()
        .map_err(|e| Error::MalformedSpec(e.to_string()))?;
    if found != dim {
        return Err(Error::MalformedSpec(format!(
            "node has dimension {found}, expected {dim}"
        )));
    }
    Ok(expr)
}

fn from_expr(expr: &NormExpr) -> NormJson {
    match expr {
        NormExpr::WeightedP { p, weights } => NormJson::Lp {
            p: exponent_to_json(*p),
            weights: if weights.iter().all(|w| *w == 1.0) {
                None
            } else {
                Some(weights.clone())
            },
        },
        NormExpr::MaxOf(terms) => NormJson::Max {
            terms: terms.iter().map(from_expr).collect(),
        },
        NormExpr::Scale { c, term } => NormJson::Scale {
            c: *c,
            term: Box::new(from_expr(term)),
        },
        NormExpr::FormMax { rows } => NormJson::Formmax { rows: rows.clone() },
        NormExpr::BlockSum { p, blocks } => NormJson::Blocksum {
            p: exponent_to_json(*p),
            blocks: blocks
                .iter()
                .map(|b| BlockJson {
                    dim: b.dim(),
                    norm: from_expr(b),
                })
                .collect(),
        },
    }
}

/// Parses a norm spec document into a validated space.
pub fn parse_space(text: &str) -> Result<LatticeSpace> {
    let doc: SpaceJson =
        serde_json::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))?;
    if doc.dim == 0 {
        return Err(Error::MalformedSpec("dim must be at least 1".into()));
    }
    let expr = to_expr(&doc.norm, doc.dim)?;
    LatticeSpace::new(expr).map_err(|e| Error::MalformedSpec(e.to_string()))
}

/// The spec document for a space, as a JSON value.
pub fn space_to_json(space: &LatticeSpace) -> Value {
    let doc = SpaceJson {
        dim: space.dim(),
        norm: from_expr(space.expr()),
    };
    serde_json::to_value(doc).expect("spec serializes")
}
