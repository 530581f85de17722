//! A human-in-the-loop oracle over a line-oriented prompt/response channel.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use netal_core::{Error, Oracle};

/// Attempts allowed per vertex before the run is aborted.
pub const MAX_ATTEMPTS: usize = 3;

/// Prompts for each queried vertex's label and parses the reply.
///
/// Replies are cached per vertex. A label not yet in the vocabulary is added
/// while fewer than `k` labels are known, and rejected otherwise.
pub struct InteractiveOracle<R, W> {
    reader: R,
    writer: W,
    names: Vec<String>,
    vocab: Vec<String>,
    k: usize,
    cache: HashMap<usize, usize>,
}

impl<R: BufRead, W: Write> InteractiveOracle<R, W> {
    pub fn new(reader: R, writer: W, names: Vec<String>, vocab: Vec<String>, k: usize) -> Self {
        InteractiveOracle { reader, writer, names, vocab, k, cache: HashMap::new() }
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    fn ask(&mut self, v: usize) -> std::io::Result<Option<String>> {
        write!(self.writer, "label vertex {} [known labels: {}]: ", self.names[v], self.vocab.join(", "))?;
        self.writer.flush()?;
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        Ok(Some(line.trim().to_string()))
    }
}

impl<R: BufRead, W: Write> Oracle for InteractiveOracle<R, W> {
    fn query(&mut self, v: usize) -> Result<usize, Error> {
        if let Some(&ty) = self.cache.get(&v) {
            return Ok(ty);
        }
        let name = self.names.get(v).cloned().ok_or(Error::VertexOutOfRange { vertex: v, n: self.names.len() })?;
        let io_err = |e: std::io::Error| Error::Oracle(format!("while labeling vertex {name}: {e}"));
        for _ in 0..MAX_ATTEMPTS {
            let reply = match self.ask(v).map_err(io_err)? {
                Some(r) => r,
                None => return Err(Error::Oracle(format!("end of input while labeling vertex {name}"))),
            };
            let rejection = if reply.is_empty() {
                "empty reply".to_string()
            } else if let Some(ty) = self.vocab.iter().position(|l| *l == reply) {
                self.cache.insert(v, ty);
                return Ok(ty);
            } else if self.vocab.len() < self.k {
                self.vocab.push(reply);
                let ty = self.vocab.len() - 1;
                self.cache.insert(v, ty);
                return Ok(ty);
            } else {
                format!("unknown label {reply:?}; all {} labels are already known", self.k)
            };
            writeln!(self.writer, "{rejection}").map_err(io_err)?;
        }
        Err(Error::Oracle(format!("no valid label for vertex {name} after {MAX_ATTEMPTS} attempts")))
    }
}
