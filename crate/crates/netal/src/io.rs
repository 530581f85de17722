//! Plain-text graph and label formats.
//!
//! Edge lists hold one `source target` pair per line, separated by
//! whitespace. A line with a single token declares an isolated vertex. Blank
//! lines and text after `#` are ignored. Vertex ids are arbitrary tokens,
//! numbered in order of first appearance.
//!
//! Label files hold one `vertex<TAB>label` pair per line, with the same
//! comment rules. Label strings may contain spaces.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use netal_core::{Graph, LabelMap};

use crate::error::InputError;

fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn read_to_string(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Read { path: path.to_path_buf(), source })
}

/// Parses an edge list.
pub fn parse_edge_list(text: &str, directed: bool, self_loops: bool) -> Result<Graph, InputError> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut intern = |tok: &str| -> usize {
        *ids.entry(tok.to_string()).or_insert_with(|| {
            names.push(tok.to_string());
            names.len() - 1
        })
    };
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [v] => {
                intern(v);
            }
            [u, v] => {
                if u == v && !self_loops {
                    return Err(InputError::Parse {
                        line: i + 1,
                        message: format!("self-loop on {u}; pass --self-loops to allow it"),
                    });
                }
                edges.push((intern(u), intern(v)));
            }
            _ => {
                return Err(InputError::Parse {
                    line: i + 1,
                    message: format!("expected `source target`, found {} fields", toks.len()),
                })
            }
        }
    }
    let n = names.len();
    Ok(Graph::from_edges(n, directed, self_loops, edges)?.with_names(names)?)
}

pub fn read_edge_list(path: &Path, directed: bool, self_loops: bool) -> Result<Graph, InputError> {
    parse_edge_list(&read_to_string(path)?, directed, self_loops)
}

/// Label pairs in file order, without reference to a graph.
pub fn parse_label_pairs(text: &str) -> Result<Vec<(String, String)>, InputError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let (v, label) = line
            .split_once('\t')
            .or_else(|| line.split_once(char::is_whitespace))
            .ok_or_else(|| InputError::Parse { line: i + 1, message: "expected `vertex<TAB>label`".into() })?;
        let label = label.trim();
        if label.is_empty() {
            return Err(InputError::Parse { line: i + 1, message: "empty label".into() });
        }
        pairs.push((v.trim().to_string(), label.to_string()));
    }
    Ok(pairs)
}

/// Parses a label file covering every vertex of `graph`. The vocabulary is
/// ordered by first appearance.
pub fn parse_labels(text: &str, graph: &Graph) -> Result<LabelMap, InputError> {
    let mut labels: Vec<Option<usize>> = vec![None; graph.n()];
    let mut vocab: Vec<String> = Vec::new();
    for (name, label) in parse_label_pairs(text)? {
        let v = graph.index_of(&name).ok_or_else(|| InputError::UnknownVertex(name.clone()))?;
        if labels[v].is_some() {
            return Err(InputError::DuplicateLabel(name));
        }
        let idx = match vocab.iter().position(|l| *l == label) {
            Some(i) => i,
            None => {
                vocab.push(label);
                vocab.len() - 1
            }
        };
        labels[v] = Some(idx);
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or_else(|| InputError::MissingLabel(graph.name(v).to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LabelMap::new(labels, vocab)?)
}

pub fn read_labels(path: &Path, graph: &Graph) -> Result<LabelMap, InputError> {
    parse_labels(&read_to_string(path)?, graph)
}

pub fn write_labels<W: Write>(mut w: W, graph: &Graph, labels: &LabelMap) -> io::Result<()> {
    for (v, &l) in labels.labels().iter().enumerate() {
        writeln!(w, "{}\t{}", graph.name(v), labels.vocab()[l])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_basics() {
        let g = parse_edge_list("# header\na b\n\nb c # trailing\nd\n", false, false).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 2);
        assert_eq!(g.names(), &["a", "b", "c", "d"]);
        assert!(g.has_edge(g.index_of("c").unwrap(), g.index_of("b").unwrap()));
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        let e = parse_edge_list("a b\na b c\n", false, false).unwrap_err();
        assert!(matches!(e, InputError::Parse { line: 2, .. }), "{e}");
        let e = parse_edge_list("a a\n", true, false).unwrap_err();
        assert!(matches!(e, InputError::Parse { line: 1, .. }));
        assert_eq!(parse_edge_list("a a\n", true, true).unwrap().m(), 1);
    }

    #[test]
    fn labels_round_trip() {
        let g = parse_edge_list("x y\ny z\n", false, false).unwrap();
        let l = parse_labels("z\tbig cat\nx\tdog\ny\tdog\n", &g).unwrap();
        assert_eq!(l.vocab(), &["big cat", "dog"]);
        assert_eq!(l.labels(), &[1, 1, 0]);
        let mut buf = Vec::new();
        write_labels(&mut buf, &g, &l).unwrap();
        let back = parse_labels(std::str::from_utf8(&buf).unwrap(), &g).unwrap();
        assert_eq!(back.labels().iter().map(|&i| &back.vocab()[i]).collect::<Vec<_>>(), vec!["dog", "dog", "big cat"]);
    }

    #[test]
    fn label_errors() {
        let g = parse_edge_list("x y\n", false, false).unwrap();
        assert!(matches!(parse_labels("x\ta\n", &g), Err(InputError::MissingLabel(v)) if v == "y"));
        assert!(matches!(parse_labels("x\ta\ny\tb\nq\ta\n", &g), Err(InputError::UnknownVertex(v)) if v == "q"));
        assert!(matches!(parse_labels("x\ta\ny\tb\nx\ta\n", &g), Err(InputError::DuplicateLabel(_))));
        assert!(matches!(parse_labels("x\n", &g), Err(InputError::Parse { line: 1, .. })));
    }

    #[test]
    fn bundled_karate_files_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
        let g = read_edge_list(&dir.join("karate.edges"), false, false).unwrap();
        assert_eq!((g.n(), g.m()), (34, 78));
        let l = read_labels(&dir.join("karate.labels"), &g).unwrap();
        assert_eq!(l.k(), 2);
    }

    proptest::proptest! {
        #[test]
        fn written_labels_parse_back(pairs in proptest::collection::vec((0usize..12, 0usize..12, 0usize..3), 1..30)) {
            let text: String = pairs.iter().map(|(u, v, _)| format!("v{u} v{v}\n")).collect();
            let g = parse_edge_list(&text, true, true).unwrap();
            let assign: Vec<usize> = (0..g.n()).map(|v| pairs[v % pairs.len()].2).collect();
            let k = assign.iter().max().unwrap() + 1;
            let vocab: Vec<String> = (0..k).map(|l| format!("group {l}")).collect();
            let labels = LabelMap::new(assign.clone(), vocab).unwrap();
            let mut buf = Vec::new();
            write_labels(&mut buf, &g, &labels).unwrap();
            let back = parse_labels(&String::from_utf8(buf).unwrap(), &g).unwrap();
            for u in 0..g.n() {
                for v in 0..g.n() {
                    proptest::prop_assert_eq!(
                        back.vocab()[back.labels()[u]] == back.vocab()[back.labels()[v]],
                        assign[u] == assign[v]
                    );
                }
                proptest::prop_assert_eq!(&back.vocab()[back.labels()[u]], &format!("group {}", assign[u]));
            }
        }
    }
}
