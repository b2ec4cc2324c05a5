use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::population::PopulationSpec;
use crate::table::{validate_table, AudienceTable, InterestId, RawAudienceTable};

pub const AUDIENCE_HEADER: [&str; 3] = ["interest_id", "interest_name", "audience"];

/// Reads a table with header `interest_id,interest_name,audience`.
pub fn load_audience_csv(
    path: impl AsRef<Path>,
    population: PopulationSpec,
) -> Result<AudienceTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_audience_csv(file, &path.display().to_string(), population)
}

/// Same as [`load_audience_csv`] over any reader; `source` names it in errors.
pub fn read_audience_csv<R: Read>(
    reader: R,
    source: &str,
    population: PopulationSpec,
) -> Result<AudienceTable> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_owned(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
    if headers.iter().ne(AUDIENCE_HEADER) {
        return Err(parse_err(
            1,
            format!(
                "expected header `{}`, found `{}`",
                AUDIENCE_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut entries = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record[0].trim();
        if id.is_empty() {
            return Err(parse_err(line, "empty interest_id".into()));
        }
        let audience: i64 = record[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("audience `{}` is not an integer", &record[2])))?;
        entries.push((InterestId::new(id, &record[1]), audience));
    }
    validate_table(RawAudienceTable {
        population,
        entries,
        claimed_total: None,
    })
}

pub fn write_audience_csv(table: &AudienceTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_audience(table, file).map_err(|e| Error::io(path, e))
}

pub fn write_audience<W: Write>(table: &AudienceTable, writer: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(AUDIENCE_HEADER)?;
    for (id, name, audience) in table.iter() {
        wtr.write_record([id, name, &audience.to_string()])?;
    }
    wtr.flush()
}
