//! JSON form: `{"m":4,"n":3,"e1":[[1,1],...],"e2":[[[4,2],[1,3]],...]}`.

use serde::{Deserialize, Serialize};

use super::{BiGraph, Cell, GridError, TwoEdge};

/// The JSON document before the graph invariants are checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGraph {
    pub m: usize,
    pub n: usize,
    pub e1: Vec<Cell>,
    pub e2: Vec<TwoEdge>,
}

impl Serialize for BiGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawGraph {
            m: self.m(),
            n: self.n(),
            e1: self.e1(),
            e2: self.e2().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BiGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawGraph::deserialize(d)?;
        raw.into_graph().map_err(|(_, e)| serde::de::Error::custom(e))
    }
}

impl RawGraph {
    /// Syntax-level parse: field names, types and cell ranges `1..=64`, but
    /// no grid invariants.
    pub fn parse(text: &str) -> Result<RawGraph, GridError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: RawGraph = serde_path_to_error::deserialize(&mut de).map_err(|err| {
            let field = err.path().to_string();
            let inner = err.into_inner();
            GridError::Parse {
                field,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })?;
        de.end().map_err(|e| GridError::Parse {
            field: ".".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(raw)
    }

    /// Validates the raw lists; on failure reports the offending field.
    pub fn into_graph(self) -> Result<BiGraph, (String, GridError)> {
        let mut g = BiGraph::new(self.m, self.n).map_err(|e| ("m".to_string(), e))?;
        for (k, c) in self.e1.into_iter().enumerate() {
            g.insert_one_edge(c).map_err(|e| (format!("e1[{k}]"), e))?;
        }
        for (k, e) in self.e2.into_iter().enumerate() {
            g.insert_two_edge(e).map_err(|err| (format!("e2[{k}]"), err))?;
        }
        Ok(g)
    }
}

impl BiGraph {
    /// Compact single-line JSON with sorted `e1` and normalized, sorted `e2`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<BiGraph, GridError> {
        RawGraph::parse(text)?
            .into_graph()
            .map_err(|(field, e)| GridError::Parse {
                field,
                line: 0,
                column: 0,
                message: e.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_round_trip() {
        let g = BiGraph::new(2, 2).unwrap();
        let text = g.to_json();
        assert_eq!(text, r#"{"m":2,"n":2,"e1":[],"e2":[]}"#);
        assert_eq!(BiGraph::from_json(&text).unwrap(), g);
    }

    #[test]
    fn normalizes_two_edges() {
        let g = BiGraph::from_json(r#"{"m":4,"n":3,"e1":[[4,1],[1,1]],"e2":[[[4,2],[1,3]]]}"#).unwrap();
        assert_eq!(g.to_json(), r#"{"m":4,"n":3,"e1":[[1,1],[4,1]],"e2":[[[1,3],[4,2]]]}"#);
    }

    #[test]
    fn malformed_two_edge_is_reported_with_path() {
        let err = BiGraph::from_json(r#"{"m":2,"n":2,"e1":[],"e2":[[1,2]]}"#).unwrap_err();
        match err {
            GridError::Parse { field, line, .. } => {
                assert!(field.starts_with("e2"), "field was {field}");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let err = BiGraph::from_json(r#"{"m":3,"n":3,"e1":[[1,1]],"e2":[[[1,1],[2,2]]]}"#).unwrap_err();
        match err {
            GridError::Parse { field, message, .. } => {
                assert_eq!(field, "e2[0]");
                assert!(message.contains("occupied"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = BiGraph::from_json(r#"{"m":3,"n":3,"e1":[[4,1]],"e2":[]}"#).unwrap_err();
        assert!(matches!(err, GridError::Parse { ref field, .. } if field == "e1[0]"));
        let err = BiGraph::from_json(r#"{"m":1,"n":3,"e1":[],"e2":[]}"#).unwrap_err();
        assert!(matches!(err, GridError::Parse { ref field, .. } if field == "m"));
    }

    #[test]
    fn rejects_unknown_fields_and_trailing_garbage() {
        assert!(BiGraph::from_json(r#"{"m":2,"n":2,"e1":[],"e2":[],"x":1}"#).is_err());
        assert!(BiGraph::from_json(r#"{"m":2,"n":2,"e1":[],"e2":[]} 7"#).is_err());
        assert!(BiGraph::from_json(r#"{"m":2,"n":2,"e1":[[0,1]],"e2":[]}"#).is_err());
    }
}
