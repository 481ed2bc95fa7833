//! SVG-subset text format for digit path models.
//!
//! ```text
//! <svg xmlns="http://www.w3.org/2000/svg" width="28" height="28" viewBox="0 0 28 28">
//! <!-- metisforge id=seed-3-0 label=3 -->
//! <path d="M 9 4 C 10 4 11 4 12 4 ... Z"/>
//! </svg>
//! ```
//!
//! One `path` element per closed subpath, absolute `M`/`C`/`Z` commands only.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use super::path::{CubicSegment, PathModel, Point, Subpath};
use super::SeedRecord;
use crate::error::{Error, Result};

/// Parsed file: metadata pairs plus the path model.
#[derive(Debug, Clone)]
pub struct SvgDocument {
    pub meta: BTreeMap<String, String>,
    pub model: PathModel,
}

pub fn write_svg(model: &PathModel, meta: &[(&str, String)]) -> String {
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"28\" height=\"28\" viewBox=\"0 0 28 28\">\n",
    );
    out.push_str("<!-- metisforge");
    for (k, v) in meta {
        let _ = write!(out, " {k}={v}");
    }
    out.push_str(" -->\n");
    for sub in model.subpaths() {
        let mut segs = sub.segments();
        let Some(first) = segs.next() else { continue };
        let _ = write!(out, "<path d=\"M {} {}", first.start.x, first.start.y);
        for s in std::iter::once(first).chain(segs) {
            let _ = write!(
                out,
                " C {} {} {} {} {} {}",
                s.c1.x, s.c1.y, s.c2.x, s.c2.y, s.end.x, s.end.y
            );
        }
        out.push_str(" Z\"/>\n");
    }
    out.push_str("</svg>\n");
    out
}

pub fn parse_svg(text: &str, file: &str) -> Result<SvgDocument> {
    let err = |offset: usize, message: String| Error::Parse {
        file: file.to_string(),
        offset,
        message,
    };

    let mut meta = BTreeMap::new();
    if let Some(start) = text.find("<!-- metisforge") {
        let body_start = start + "<!-- metisforge".len();
        let end = text[body_start..]
            .find("-->")
            .ok_or_else(|| err(start, "unterminated metadata comment".into()))?;
        for pair in text[body_start..body_start + end].split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| err(start, format!("malformed metadata `{pair}`")))?;
            meta.insert(k.to_string(), v.to_string());
        }
    }

    let mut subpaths = Vec::new();
    let mut cursor = 0;
    while let Some(rel) = text[cursor..].find("<path") {
        let elem = cursor + rel;
        let d_rel = text[elem..]
            .find("d=\"")
            .ok_or_else(|| err(elem, "path element without d attribute".into()))?;
        let d_start = elem + d_rel + 3;
        let d_len = text[d_start..]
            .find('"')
            .ok_or_else(|| err(d_start, "unterminated d attribute".into()))?;
        let index = subpaths.len();
        let sub = parse_path_data(&text[d_start..d_start + d_len], d_start, index)
            .map_err(|(off, msg)| err(off, msg))?;
        subpaths.push(sub);
        cursor = d_start + d_len;
    }
    if subpaths.is_empty() {
        return Err(err(0, "no path elements".into()));
    }
    let model = PathModel::new(subpaths).map_err(|e| err(0, e.to_string()))?;
    Ok(SvgDocument { meta, model })
}

fn parse_path_data(
    d: &str,
    base: usize,
    index: usize,
) -> std::result::Result<Subpath, (usize, String)> {
    // tokens with their byte offsets
    let mut tokens = Vec::new();
    let bytes = d.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() || c == b',' {
            i += 1;
        } else if c.is_ascii_alphabetic() && !matches!(c, b'e' | b'E') {
            tokens.push((i, &d[i..i + 1]));
            i += 1;
        } else {
            let s = i;
            i += 1;
            while i < bytes.len() {
                let c = bytes[i];
                let exp_sign = (c == b'-' || c == b'+') && matches!(bytes[i - 1], b'e' | b'E');
                if c.is_ascii_digit() || c == b'.' || matches!(c, b'e' | b'E') || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            tokens.push((s, &d[s..i]));
        }
    }

    let mut pos = 0;
    let num = |pos: &mut usize| -> std::result::Result<f64, (usize, String)> {
        let (off, tok) = tokens
            .get(*pos)
            .copied()
            .ok_or((base + d.len(), format!("subpath {index}: unexpected end of path data")))?;
        *pos += 1;
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or((base + off, format!("subpath {index}: bad number `{tok}`")))
    };

    match tokens.first() {
        Some((_, "M")) => pos += 1,
        Some((off, t)) => {
            return Err((base + off, format!("subpath {index}: expected M, found `{t}`")));
        }
        None => return Err((base, format!("subpath {index}: empty path data"))),
    }
    let start = Point::new(num(&mut pos)?, num(&mut pos)?);
    let mut cur = start;
    let mut segments = Vec::new();
    let mut closed = false;
    while pos < tokens.len() {
        let (off, tok) = tokens[pos];
        match tok {
            "C" => {
                pos += 1;
                // implicit repetition of C coordinates is allowed
                loop {
                    let c1 = Point::new(num(&mut pos)?, num(&mut pos)?);
                    let c2 = Point::new(num(&mut pos)?, num(&mut pos)?);
                    let end = Point::new(num(&mut pos)?, num(&mut pos)?);
                    segments.push(CubicSegment::new(cur, c1, c2, end));
                    cur = end;
                    match tokens.get(pos) {
                        Some((_, t)) if t.parse::<f64>().is_ok() => continue,
                        _ => break,
                    }
                }
            }
            "Z" | "z" => {
                pos += 1;
                if pos != tokens.len() {
                    return Err((
                        base + tokens[pos].0,
                        format!("subpath {index}: content after Z (one subpath per path element)"),
                    ));
                }
                closed = true;
            }
            other => {
                return Err((
                    base + off,
                    format!("subpath {index}: unsupported command `{other}`"),
                ));
            }
        }
    }
    if segments.is_empty() {
        return Err((base, format!("subpath {index}: no segments")));
    }
    if !closed || cur.dist(start) > 1e-6 {
        return Err((base + d.len(), format!("subpath {index} is not closed")));
    }
    Subpath::from_segments(&segments).map_err(|e| (base, format!("subpath {index}: {e}")))
}

pub fn seed_record_from_svg(doc: SvgDocument, file: &str) -> Result<SeedRecord> {
    let err = |message: String| Error::Parse {
        file: file.to_string(),
        offset: 0,
        message,
    };
    let id = doc
        .meta
        .get("id")
        .cloned()
        .ok_or_else(|| err("metadata lacks id".into()))?;
    let label: u8 = doc
        .meta
        .get("label")
        .ok_or_else(|| err("metadata lacks label".into()))?
        .parse()
        .ok()
        .filter(|l| *l < 10)
        .ok_or_else(|| err("label must be a digit 0-9".into()))?;
    Ok(SeedRecord {
        id,
        model: doc.model,
        label,
    })
}

/// Loads every `*.svg` file of a directory in file-name order.
pub fn load_seed_corpus(dir: &Path) -> Result<Vec<SeedRecord>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "svg"))
        .collect();
    files.sort();

    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(files.len());
    for path in files {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let name = path.display().to_string();
        let rec = seed_record_from_svg(parse_svg(&text, &name)?, &name)?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateSeed(rec.id));
        }
        records.push(rec);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PathModel {
        PathModel::new(vec![Subpath::polygon(&[
            Point::new(4.0, 4.0),
            Point::new(20.25, 4.0),
            Point::new(20.25, 19.125),
            Point::new(4.0, 19.125),
        ])
        .unwrap()])
        .unwrap()
    }

    #[test]
    fn write_then_parse_is_exact() {
        let m = square();
        let text = write_svg(&m, &[("id", "s1".into()), ("label", "7".into())]);
        let doc = parse_svg(&text, "mem").unwrap();
        assert_eq!(doc.model, m);
        assert_eq!(doc.meta["id"], "s1");
        assert_eq!(doc.meta["label"], "7");
    }

    #[test]
    fn unclosed_subpath_names_index() {
        let text = "<!-- metisforge id=a label=1 -->\n\
            <path d=\"M 1 1 C 2 1 3 1 4 1 C 4 2 4 3 1 1 Z\"/>\n\
            <path d=\"M 5 5 C 6 5 7 5 8 5 Z\"/>\n";
        let e = parse_svg(text, "f.svg").unwrap_err().to_string();
        assert!(e.contains("subpath 1 is not closed"), "{e}");
        assert!(e.starts_with("f.svg"), "{e}");
    }

    #[test]
    fn malformed_number_reports_offset() {
        let text = "<path d=\"M 1 1 C 2 x 3 1 1 1 Z\"/>";
        match parse_svg(text, "g.svg") {
            Err(Error::Parse { offset, message, .. }) => {
                assert_eq!(&text[offset..offset + 1], "x");
                assert!(message.contains("bad number"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_other_commands() {
        let text = "<path d=\"M 1 1 L 2 2 Z\"/>";
        assert!(parse_svg(text, "h.svg").is_err());
    }

    #[test]
    fn corpus_loading() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_seed_corpus(dir.path()).unwrap().is_empty());
        for k in 0..10 {
            let text = write_svg(&square(), &[("id", format!("s{k}")), ("label", (k % 10).to_string())]);
            std::fs::write(dir.path().join(format!("{k:02}.svg")), text).unwrap();
        }
        let recs = load_seed_corpus(dir.path()).unwrap();
        assert_eq!(recs.len(), 10);
        assert_eq!(recs[3].id, "s3");
        assert_eq!(recs[3].label, 3);

        let dup = write_svg(&square(), &[("id", "s3".into()), ("label", "3".into())]);
        std::fs::write(dir.path().join("99.svg"), dup).unwrap();
        assert!(matches!(load_seed_corpus(dir.path()), Err(Error::DuplicateSeed(id)) if id == "s3"));
    }
}
