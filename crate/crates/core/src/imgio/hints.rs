use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Hint, HintSet};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    x: usize,
    y: usize,
    d: f64,
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        }
    } else {
        Error::Format(e.to_string())
    }
}

/// Reads a `x,y,d` CSV. Occlusion flags start cleared; bounds are checked
/// later against an image via [`HintSet::check_bounds`].
pub fn read_hints(path: impl AsRef<Path>) -> Result<HintSet> {
    parse_hints(std::fs::File::open(path)?)
}

pub fn parse_hints(reader: impl Read) -> Result<HintSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "d"] {
        return Err(Error::Format(format!(
            "hint CSV header must be x,y,d, got {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut entries = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(csv_err)?;
        entries.push(Hint::new(row.x, row.y, row.d));
    }
    HintSet::new(entries)
}

pub fn write_hints(hints: &HintSet, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    format_hints(hints, file)
}

pub fn format_hints(hints: &HintSet, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    // the header must be present even for an empty set
    w.write_record(["x", "y", "d"]).map_err(csv_err)?;
    for h in hints {
        w.write_record([h.x.to_string(), h.y.to_string(), h.d.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_single_hint() {
        let hs = parse_hints("x,y,d\n3,2,10.5".as_bytes()).unwrap();
        assert_eq!(hs.entries(), &[Hint::new(3, 2, 10.5)]);
        assert!(!hs.entries()[0].occluded);
    }

    #[test]
    fn negative_disparity_rejected() {
        assert!(matches!(
            parse_hints("x,y,d\n3,2,-1".as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn header_required() {
        assert!(matches!(
            parse_hints("a,b,c\n3,2,1".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(parse_hints("x,y,d\n3,two,1".as_bytes()).is_err());
    }

    #[test]
    fn empty_set_keeps_header() {
        let mut out = Vec::new();
        format_hints(&HintSet::empty(), &mut out).unwrap();
        assert_eq!(out, b"x,y,d\n");
        assert!(parse_hints(out.as_slice()).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn write_read_identity(raw in proptest::collection::btree_map((0usize..500, 0usize..500), 0.0f64..400.0, 0..50)) {
            let hs = HintSet::new(raw.into_iter().map(|((x, y), d)| Hint::new(x, y, d)).collect()).unwrap();
            let mut buf = Vec::new();
            format_hints(&hs, &mut buf).unwrap();
            prop_assert_eq!(parse_hints(buf.as_slice()).unwrap(), hs);
        }
    }
}
