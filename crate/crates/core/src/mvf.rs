//! Plain-text motion field dumps.
//!
//! ```text
//! MVF v1 <cols> <rows> <block_size>
//! <dx> <dy> <evals> <static 0|1>     (one line per block, raster order)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::block::MotionVector;
use crate::error::{Error, Result};
use crate::estimators::MotionField;

pub fn format_mvf(field: &MotionField) -> String {
    let mut out = format!("MVF v1 {} {} {}\n", field.cols(), field.rows(), field.block_size());
    for ((v, e), s) in field.vectors().iter().zip(field.evals()).zip(field.static_flags()) {
        let _ = writeln!(out, "{} {} {} {}", v.dx, v.dy, e, *s as u8);
    }
    out
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::MvfParse {
        line,
        reason: reason.into(),
    }
}

pub fn parse_mvf(text: &str) -> Result<MotionField> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty input"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "MVF" || fields[1] != "v1" {
        return Err(bad(1, format!("expected `MVF v1 <cols> <rows> <block_size>`, got `{header}`")));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(1, format!("bad integer `{s}`")));
    let (cols, rows, block_size) = (num(fields[2])?, num(fields[3])?, num(fields[4])?);

    let mut field = MotionField::new(cols, rows, block_size);
    let mut count = 0;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if count == field.len() {
            return Err(bad(lineno, "more block lines than cols * rows"));
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(bad(lineno, format!("expected 4 fields, got {}", parts.len())));
        }
        let int = |s: &str| s.parse::<i32>().map_err(|_| bad(lineno, format!("bad integer `{s}`")));
        let evals = parts[2]
            .parse::<u32>()
            .map_err(|_| bad(lineno, format!("bad eval count `{}`", parts[2])))?;
        let is_static = match parts[3] {
            "0" => false,
            "1" => true,
            other => return Err(bad(lineno, format!("static flag must be 0 or 1, got `{other}`"))),
        };
        field.set(count, MotionVector::new(int(parts[0])?, int(parts[1])?), evals, is_static);
        count += 1;
    }
    if count != field.len() {
        return Err(bad(text.lines().count(), format!("expected {} blocks, found {count}", field.len())));
    }
    Ok(field)
}

pub fn dump_mv_field(field: &MotionField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_mvf(field)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_mv_field(path: impl AsRef<Path>) -> Result<MotionField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_mvf(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_block_line() {
        let mut f = MotionField::new(1, 1, 16);
        f.set(0, MotionVector::new(3, -2), 17, false);
        assert_eq!(format_mvf(&f), "MVF v1 1 1 16\n3 -2 17 0\n");
    }

    #[test]
    fn qcif_header() {
        let f = MotionField::new(176 / 16, 144 / 16, 16);
        assert!(format_mvf(&f).starts_with("MVF v1 11 9 16\n"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_mvf("").is_err());
        assert!(parse_mvf("MVF v2 1 1 16\n0 0 1 0\n").is_err());
        assert!(parse_mvf("MVF v1 1 1 16\n0 0 1 2\n").is_err());
        assert!(parse_mvf("MVF v1 2 1 16\n0 0 1 0\n").is_err());
        assert!(parse_mvf("MVF v1 1 1 16\n0 0 1 0\n0 0 1 0\n").is_err());
        match parse_mvf("MVF v1 1 1 16\nx 0 1 0\n") {
            Err(Error::MvfParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.mvf");
        let mut f = MotionField::new(2, 2, 8);
        f.set(3, MotionVector::new(-7, 4), 40, false);
        f.set(1, MotionVector::ZERO, 1, true);
        dump_mv_field(&f, &p).unwrap();
        assert_eq!(load_mv_field(&p).unwrap(), f);
    }

    proptest! {
        #[test]
        fn round_trip(
            cols in 1usize..6,
            rows in 1usize..6,
            blocks in prop::collection::vec((-64i32..64, -64i32..64, 0u32..500, any::<bool>()), 36),
        ) {
            let mut f = MotionField::new(cols, rows, 16);
            for (i, &(dx, dy, e, s)) in blocks.iter().take(cols * rows).enumerate() {
                f.set(i, MotionVector::new(dx, dy), e, s);
            }
            prop_assert_eq!(parse_mvf(&format_mvf(&f)).unwrap(), f);
        }
    }
}
