//! `VMAP1` text format:
//!
//! ```text
//! VMAP1
//! <width> <height>
//! <height rows of <width> digits from 0-3, row 0 first>
//! ```
//!
//! Lines are LF-terminated and exactly one `2` and one `3` must appear.

use super::{CellClass, GridError, GridMap};

const MAGIC: &str = "VMAP1";

pub fn write_map(map: &GridMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + (map.width() + 1) * map.height());
    out.extend_from_slice(MAGIC.as_bytes());
    out.push(b'\n');
    out.extend_from_slice(format!("{} {}\n", map.width(), map.height()).as_bytes());
    for row in map.cells().chunks(map.width()) {
        out.extend(row.iter().map(|c| b'0' + c.code()));
        out.push(b'\n');
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> GridError {
    GridError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_dimension(field: &str, line: usize, column: usize) -> Result<usize, GridError> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_err(line, column, format!("bad dimension {field:?}")));
    }
    field
        .parse::<usize>()
        .map_err(|_| parse_err(line, column, format!("dimension {field} out of range")))
}

pub fn read_map(bytes: &[u8]) -> Result<GridMap, GridError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let prefix = &bytes[..e.valid_up_to()];
        let line = 1 + prefix.iter().filter(|&&b| b == b'\n').count();
        let column = 1 + prefix.iter().rev().take_while(|&&b| b != b'\n').count();
        parse_err(line, column, "invalid UTF-8")
    })?;
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n');

    if lines.next() != Some(MAGIC) {
        return Err(parse_err(1, 1, "missing VMAP1 magic"));
    }
    let dims = lines
        .next()
        .ok_or_else(|| parse_err(2, 1, "missing dimensions line"))?;
    let (w_field, h_field) = dims
        .split_once(' ')
        .ok_or_else(|| parse_err(2, 1, "expected \"<width> <height>\""))?;
    let width = parse_dimension(w_field, 2, 1)?;
    let height = parse_dimension(h_field, 2, w_field.len() + 2)?;
    if width == 0 || height == 0 {
        return Err(parse_err(2, 1, "dimensions must be positive"));
    }
    let total = width
        .checked_mul(height)
        .ok_or_else(|| parse_err(2, 1, "dimensions overflow"))?;
    if total > bytes.len() {
        return Err(parse_err(2, 1, "dimensions exceed file size"));
    }

    let mut cells = Vec::with_capacity(total);
    for row in 0..height {
        let line_no = row + 3;
        let line = lines
            .next()
            .ok_or_else(|| parse_err(line_no, 1, format!("expected {height} rows")))?;
        for (col, b) in line.bytes().enumerate() {
            if col >= width {
                return Err(parse_err(line_no, col + 1, "row too long"));
            }
            let class = b
                .checked_sub(b'0')
                .and_then(CellClass::from_code)
                .ok_or_else(|| {
                    parse_err(line_no, col + 1, format!("invalid cell {:?}", b as char))
                })?;
            cells.push(class);
        }
        if line.len() < width {
            return Err(parse_err(line_no, line.len() + 1, "row too short"));
        }
    }
    if lines.next().is_some() {
        return Err(parse_err(height + 3, 1, "trailing content"));
    }

    GridMap::from_cells(width, height, cells).map_err(|e| match e {
        GridError::EndpointCount { .. } => parse_err(height + 2, 1, e.to_string()),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::{generate_map, CellIndex, MapGenConfig};

    #[test]
    fn two_by_two_encoding() {
        let cells = vec![
            CellClass::Free,
            CellClass::Obstacle,
            CellClass::Start,
            CellClass::Goal,
        ];
        let map = GridMap::from_cells(2, 2, cells).unwrap();
        assert_eq!(map.start(), CellIndex::new(0, 1));
        assert_eq!(write_map(&map), b"VMAP1\n2 2\n01\n23\n");
        assert_eq!(read_map(b"VMAP1\n2 2\n01\n23\n").unwrap(), map);
    }

    #[test]
    fn generated_map_round_trips() {
        let cfg = MapGenConfig {
            seed: 5,
            ..MapGenConfig::default()
        };
        let map = generate_map(&cfg).unwrap();
        assert_eq!(read_map(&write_map(&map)).unwrap(), map);
    }

    #[test]
    fn invalid_digit_reports_position() {
        assert_eq!(
            read_map(b"VMAP1\n2 2\n04\n23\n"),
            Err(GridError::Parse {
                line: 3,
                column: 2,
                message: "invalid cell '4'".into()
            })
        );
    }

    #[test]
    fn malformed_inputs() {
        let cases: &[&[u8]] = &[
            b"VMAP2\n2 2\n01\n23\n",
            b"VMAP1\n2\n01\n23\n",
            b"VMAP1\n2 x\n01\n23\n",
            b"VMAP1\n2 2\n01\n",
            b"VMAP1\n2 2\n011\n23\n",
            b"VMAP1\n2 2\n0\n23\n",
            b"VMAP1\n2 2\n01\n23\n00\n",
            b"VMAP1\n2 2\n00\n23\n2",
            b"VMAP1\n2 2\n22\n23\n",
            b"VMAP1\n2 2\n01\n20\n",
            b"VMAP1\r\n2 2\r\n01\r\n23\r\n",
            b"VMAP1\n99999999999 99999999999\n",
        ];
        for case in cases {
            assert!(
                matches!(read_map(case), Err(GridError::Parse { .. })),
                "accepted {:?}",
                String::from_utf8_lossy(case)
            );
        }
    }

    #[test]
    fn missing_final_newline_is_tolerated() {
        assert!(read_map(b"VMAP1\n2 2\n01\n23").is_ok());
    }
}
