use std::io::BufRead;

use crate::SketchError;

use super::SketchGraph;

/// Streaming reader over a JSONL sketch file. Yields `(line_number, result)`
/// with 1-based line numbers; blank lines are skipped.
pub struct SketchReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> SketchReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for SketchReader<R> {
    type Item = (usize, Result<SketchGraph, SketchError>);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            match line {
                Err(e) => return Some((self.line_no, Err(SketchError::Io(e.to_string())))),
                Ok(l) if l.trim().is_empty() => continue,
                Ok(l) => {
                    let parsed = serde_json::from_str::<SketchGraph>(&l)
                        .map_err(|e| SketchError::Parse(e.to_string()));
                    return Some((self.line_no, parsed));
                }
            }
        }
    }
}

pub fn read_sketches<R: BufRead>(reader: R) -> SketchReader<R> {
    SketchReader::new(reader)
}

/// Serialize one sketch as a single JSONL line (no trailing newline).
pub fn to_json_line(sketch: &SketchGraph) -> String {
    serde_json::to_string(sketch).expect("sketch serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_the_documented_layout() {
        let text = r#"{"primitives":[{"kind":"line","params":[0.1,0.1,0.5,0.1],"construction":false},{"kind":"line","params":[0.5,0.1,0.5,0.6],"construction":true}],"constraints":[{"i":0,"si":2,"j":1,"sj":1,"kind":"coincident","datum":null}]}

not json
"#;
        let items: Vec<_> = read_sketches(text.as_bytes()).collect();
        assert_eq!(items.len(), 2);
        let (n, first) = &items[0];
        assert_eq!(*n, 1);
        let s = first.as_ref().unwrap();
        assert_eq!(s.primitives.len(), 2);
        assert!(s.primitives[1].construction);
        assert_eq!(to_json_line(s), text.lines().next().unwrap());
        assert_eq!(items[1].0, 3);
        assert!(items[1].1.is_err());
    }
}
