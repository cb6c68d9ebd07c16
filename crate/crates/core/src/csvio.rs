//! CSV reading and writing.
//!
//! Input is comma-separated UTF-8 with a header row whose first cell names
//! the sample-identifier column. The writer quotes only fields that need it
//! and writes missing cells as empty fields.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::table::{Cell, Table};

/// Parse a table from raw CSV bytes.
pub fn parse_csv(bytes: &[u8]) -> Result<Table> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);

    let mut records = reader.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(Error::EmptyTable),
    };
    if header.is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: "empty header".into(),
        });
    }
    let id_name = header[0].to_string();
    let column_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let width = header.len();

    let mut row_ids = Vec::new();
    let mut cells = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != width {
            return Err(Error::Parse {
                row: i + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        row_ids.push(rec[0].to_string());
        cells.extend(rec.iter().skip(1).map(Cell::lex));
    }
    if row_ids.is_empty() {
        return Err(Error::EmptyTable);
    }
    Table::new(id_name, row_ids, column_names, cells)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Table> {
    parse_csv(&fs::read(path)?)
}

/// Serialize a table in the same format `parse_csv` reads.
pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    let mut header = Vec::with_capacity(table.n_cols() + 1);
    header.push(table.id_name().to_string());
    header.extend(table.column_names().iter().cloned());
    writer.write_record(&header)?;

    let mut record = Vec::with_capacity(table.n_cols() + 1);
    for (i, id) in table.row_ids().iter().enumerate() {
        record.clear();
        record.push(id.clone());
        record.extend(table.row(i).iter().map(Cell::to_string));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_csv_string(table: &Table) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(table, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writer emits utf-8"))
}

pub fn write_csv_file(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_csv(table, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn numeric_text_and_missing_fields() {
        let t = parse_csv(b"Sample,F1\ns1,3.5\ns2,\ns3,hello\ns4, 1e-3 \n").unwrap();
        assert_eq!(t.n_rows(), 4);
        assert_eq!(t.id_name(), "Sample");
        assert_eq!(t.get(0, 0), &Cell::Number(3.5));
        assert_eq!(t.get(1, 0), &Cell::Missing);
        assert_eq!(t.get(2, 0), &Cell::Text("hello".into()));
        assert_eq!(t.get(3, 0), &Cell::Number(1e-3));
    }

    #[test]
    fn decimal_comma_is_text() {
        let t = parse_csv(b"id,x\na,\"3,5\"\n").unwrap();
        assert_eq!(t.get(0, 0), &Cell::Text("3,5".into()));
    }

    #[test]
    fn non_finite_becomes_missing() {
        let t = parse_csv(b"id,x,y\na,inf,NaN\n").unwrap();
        assert!(t.get(0, 0).is_missing());
        assert!(t.get(0, 1).is_missing());
    }

    #[test]
    fn ragged_row_reports_index() {
        match parse_csv(b"id,a,b\nr1,1,2\nr2,1\n") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_columns_rejected() {
        assert!(matches!(
            parse_csv(b"id,a,a\nr1,1,2\n"),
            Err(Error::DuplicateColumn(name)) if name == "a"
        ));
    }

    #[test]
    fn header_only_rejected() {
        assert!(matches!(parse_csv(b"id,a\n"), Err(Error::EmptyTable)));
        assert!(matches!(parse_csv(b""), Err(Error::EmptyTable)));
    }

    #[test]
    fn duplicate_ids_allowed() {
        let t = parse_csv(b"id,a\nx,1\nx,2\n").unwrap();
        assert_eq!(t.row_ids(), &["x".to_string(), "x".to_string()]);
    }

    #[test]
    fn writer_quotes_special_fields() {
        let t = Table::new(
            "id",
            vec!["r,1".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![Cell::Text("x,y".into()), Cell::Missing, Cell::Text("say \"hi\"".into())],
        )
        .unwrap();
        let s = to_csv_string(&t).unwrap();
        assert_eq!(s, "id,a,b,c\n\"r,1\",\"x,y\",,\"say \"\"hi\"\"\"\n");
    }

    fn text_cell() -> impl Strategy<Value = Cell> {
        // Text that never lexes as a number and is not blank.
        "[a-zA-Z#/!][a-zA-Z0-9 ,\"\n#!/._-]{0,8}".prop_filter_map("lexes as text", |s| match Cell::lex(&s) {
            c @ Cell::Text(_) => Some(c),
            _ => None,
        })
    }

    fn any_cell() -> impl Strategy<Value = Cell> {
        prop_oneof![
            (-1e12f64..1e12).prop_map(Cell::Number),
            any::<f64>().prop_map(Cell::number),
            text_cell(),
            Just(Cell::Missing),
        ]
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(
            (rows, cols, cells) in (1usize..6, 1usize..5).prop_flat_map(|(r, c)| {
                (Just(r), Just(c), proptest::collection::vec(any_cell(), r * c))
            })
        ) {
            let t = Table::new(
                "id",
                (0..rows).map(|i| format!("s{i}")).collect(),
                (0..cols).map(|j| format!("c{j}")).collect(),
                cells,
            ).unwrap();
            let back = parse_csv(to_csv_string(&t).unwrap().as_bytes()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
