//! CSV readers and writers for contracts, schedules and user counts.
//!
//! All files carry a header row, are UTF-8 with LF line endings, and are
//! written with a fixed column order.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;

use super::types::{ContractRecord, MinWageEntry, MinWageSchedule, Occupation, YearMonth};
use crate::error::{Error, Result};

pub const CONTRACT_COLUMNS: [&str; 9] = [
    "record_id",
    "prefecture_id",
    "date",
    "hourly_wage",
    "posted_hours",
    "transport_reimbursement",
    "occupation",
    "start_time",
    "matched",
];
pub const SCHEDULE_COLUMNS: [&str; 4] = ["prefecture_id", "old_mw", "new_mw", "event_month"];
pub const USERS_COLUMNS: [&str; 2] = ["month", "users"];

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

struct Columns {
    index: Vec<usize>,
}

impl Columns {
    fn resolve(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Self> {
        let index = wanted
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h.trim() == *name)
                    .ok_or_else(|| Error::schema(0, *name, "missing column in header"))
            })
            .collect::<Result<_>>()?;
        Ok(Self { index })
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, k: usize) -> &'r str {
        rec.get(self.index[k]).unwrap_or("").trim()
    }
}

fn parse<T: std::str::FromStr>(row: usize, column: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::schema(row, column, format!("cannot parse `{raw}`")))
}

pub fn parse_clock(raw: &str) -> Option<u16> {
    let (h, m) = raw.split_once(':')?;
    let h: u16 = h.parse().ok()?;
    let m: u16 = m.parse().ok()?;
    (h < 24 && m < 60).then_some(h * 60 + m)
}

pub fn format_clock(minutes: u16) -> String {
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

pub fn read_contracts<R: Read>(reader: R) -> Result<Vec<ContractRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let cols = Columns::resolve(rdr.headers()?, &CONTRACT_COLUMNS)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Schema {
            row,
            column: None,
            message: e.to_string(),
        })?;
        let c = |k: usize| cols.get(&rec, k);
        let date_raw = c(2);
        let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d")
            .map_err(|_| Error::schema(row, "date", format!("`{date_raw}` is not an ISO-8601 date")))?;
        let start_raw = c(7);
        let start_time = parse_clock(start_raw)
            .ok_or_else(|| Error::schema(row, "start_time", format!("`{start_raw}` is not HH:MM")))?;
        let matched = match c(8) {
            "1" => true,
            "0" => false,
            other => return Err(Error::schema(row, "matched", format!("`{other}` is not 0/1"))),
        };
        let occupation = c(6)
            .parse::<Occupation>()
            .map_err(|m| Error::schema(row, "occupation", m))?;
        let record = ContractRecord {
            record_id: c(0).to_string(),
            prefecture_id: parse(row, "prefecture_id", c(1))?,
            date,
            hourly_wage: parse(row, "hourly_wage", c(3))?,
            posted_hours: parse(row, "posted_hours", c(4))?,
            transport_reimbursement: parse(row, "transport_reimbursement", c(5))?,
            occupation,
            start_time,
            matched,
        };
        if record.hourly_wage < 1 {
            return Err(Error::schema(row, "hourly_wage", "wage must be at least 1"));
        }
        if !(record.posted_hours > 0.0) || !record.posted_hours.is_finite() {
            return Err(Error::schema(row, "posted_hours", "hours must be positive"));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn write_contracts<W: Write>(w: W, records: &[ContractRecord]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(CONTRACT_COLUMNS)?;
    for r in records {
        wtr.write_record([
            r.record_id.clone(),
            r.prefecture_id.to_string(),
            r.date.format("%Y-%m-%d").to_string(),
            r.hourly_wage.to_string(),
            r.posted_hours.to_string(),
            r.transport_reimbursement.to_string(),
            r.occupation.label().to_string(),
            format_clock(r.start_time),
            u8::from(r.matched).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_schedule<R: Read>(reader: R) -> Result<MinWageSchedule> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let cols = Columns::resolve(rdr.headers()?, &SCHEDULE_COLUMNS)?;
    let mut entries = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let c = |k: usize| cols.get(&rec, k);
        let event_month: YearMonth = c(3)
            .parse()
            .map_err(|_| Error::schema(row, "event_month", format!("`{}` is not YYYY-MM", c(3))))?;
        entries.push(MinWageEntry {
            prefecture_id: parse(row, "prefecture_id", c(0))?,
            old_mw: parse(row, "old_mw", c(1))?,
            new_mw: parse(row, "new_mw", c(2))?,
            event_month,
        });
    }
    MinWageSchedule::new(entries)
}

pub fn write_schedule<W: Write>(w: W, schedule: &MinWageSchedule) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(SCHEDULE_COLUMNS)?;
    for e in schedule.iter() {
        wtr.write_record([
            e.prefecture_id.to_string(),
            e.old_mw.to_string(),
            e.new_mw.to_string(),
            e.event_month.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_users<R: Read>(reader: R) -> Result<BTreeMap<YearMonth, u64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let cols = Columns::resolve(rdr.headers()?, &USERS_COLUMNS)?;
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let month: YearMonth = cols
            .get(&rec, 0)
            .parse()
            .map_err(|_| Error::schema(row, "month", "not YYYY-MM"))?;
        let users = parse(row, "users", cols.get(&rec, 1))?;
        if out.insert(month, users).is_some() {
            return Err(Error::schema(row, "month", format!("duplicate month {month}")));
        }
    }
    Ok(out)
}

pub fn write_users<W: Write>(w: W, users: &BTreeMap<YearMonth, u64>) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(USERS_COLUMNS)?;
    for (m, u) in users {
        wtr.write_record([m.to_string(), u.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
