use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Job category of a posted shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Occupation {
    Restaurant,
    LightWork,
    Retail,
    CustomerService,
    Professional,
    Logistics,
    Entertainment,
    OfficeWork,
    EventStaff,
}

impl Occupation {
    pub const ALL: [Occupation; 9] = [
        Occupation::Restaurant,
        Occupation::LightWork,
        Occupation::Retail,
        Occupation::CustomerService,
        Occupation::Professional,
        Occupation::Logistics,
        Occupation::Entertainment,
        Occupation::OfficeWork,
        Occupation::EventStaff,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Occupation::Restaurant => "Restaurant",
            Occupation::LightWork => "Light Work",
            Occupation::Retail => "Retail",
            Occupation::CustomerService => "Customer Service",
            Occupation::Professional => "Professional",
            Occupation::Logistics => "Logistics",
            Occupation::Entertainment => "Entertainment",
            Occupation::OfficeWork => "Office Work",
            Occupation::EventStaff => "Event Staff",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Occupation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Occupation::ALL
            .into_iter()
            .find(|o| o.label() == s.trim())
            .ok_or_else(|| format!("unknown occupation `{s}`"))
    }
}

/// Four six-hour slots of the day, keyed on a shift's start time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeSlot {
    /// 06:00-12:00
    Morning,
    /// 12:00-18:00
    Afternoon,
    /// 18:00-24:00
    Evening,
    /// 00:00-06:00
    LateNight,
}

impl TimeSlot {
    pub const ALL: [TimeSlot; 4] = [
        TimeSlot::Morning,
        TimeSlot::Afternoon,
        TimeSlot::Evening,
        TimeSlot::LateNight,
    ];

    /// Slot containing a start time given in minutes since midnight.
    pub fn of_start(minutes: u16) -> TimeSlot {
        match minutes % 1440 {
            360..=719 => TimeSlot::Morning,
            720..=1079 => TimeSlot::Afternoon,
            1080..=1439 => TimeSlot::Evening,
            _ => TimeSlot::LateNight,
        }
    }

    /// First minute of the slot.
    pub fn start_minute(self) -> u16 {
        match self {
            TimeSlot::Morning => 360,
            TimeSlot::Afternoon => 720,
            TimeSlot::Evening => 1080,
            TimeSlot::LateNight => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TimeSlot::Morning => "morning",
            TimeSlot::Afternoon => "afternoon",
            TimeSlot::Evening => "evening",
            TimeSlot::LateNight => "late_night",
        }
    }
}

impl fmt::Display for TimeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One posted spot-work slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractRecord {
    pub record_id: String,
    pub prefecture_id: u32,
    pub date: NaiveDate,
    pub hourly_wage: u32,
    pub posted_hours: f64,
    pub transport_reimbursement: u32,
    pub occupation: Occupation,
    /// Minutes since midnight.
    pub start_time: u16,
    /// `true` when the posting was filled.
    pub matched: bool,
}

impl ContractRecord {
    pub fn validate(&self) -> Result<()> {
        if self.hourly_wage < 1 {
            return Err(Error::InvalidRecord(format!(
                "{}: hourly wage must be positive",
                self.record_id
            )));
        }
        if !(self.posted_hours > 0.0) || !self.posted_hours.is_finite() {
            return Err(Error::InvalidRecord(format!(
                "{}: posted hours must be positive",
                self.record_id
            )));
        }
        if self.start_time >= 1440 {
            return Err(Error::InvalidRecord(format!(
                "{}: start time {} is not a clock time",
                self.record_id, self.start_time
            )));
        }
        Ok(())
    }

    pub fn time_slot(&self) -> TimeSlot {
        TimeSlot::of_start(self.start_time)
    }

    /// Contracted payment, wage times hours.
    pub fn earnings(&self) -> f64 {
        self.hourly_wage as f64 * self.posted_hours
    }
}

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Config(format!("month {month} out of range")));
        }
        Ok(Self { year, month })
    }

    pub fn of_date(d: NaiveDate) -> Self {
        Self {
            year: d.year(),
            month: d.month(),
        }
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(o: i64) -> Self {
        Self {
            year: o.div_euclid(12) as i32,
            month: (o.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn plus(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    pub fn months_since(self, earlier: YearMonth) -> i64 {
        self.ordinal() - earlier.ordinal()
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid month")
    }

    pub fn days(self) -> u32 {
        let next = self.plus(1).first_day();
        (next - self.first_day()).num_days() as u32
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("`{s}` is not YYYY-MM")))?;
        let year = y
            .parse()
            .map_err(|_| Error::Config(format!("`{s}` is not YYYY-MM")))?;
        let month = m
            .parse()
            .map_err(|_| Error::Config(format!("`{s}` is not YYYY-MM")))?;
        YearMonth::new(year, month)
    }
}

/// Consecutive study months indexed `t = 1..=T`, with the event at `t*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StudyWindow {
    pub start: YearMonth,
    pub months: usize,
    pub event_index: usize,
}

impl StudyWindow {
    pub fn new(start: YearMonth, months: usize, event_index: usize) -> Result<Self> {
        if months < 3 {
            return Err(Error::Config("window needs at least three months".into()));
        }
        // At least one pre-event reference month and one post month.
        if event_index < 2 || event_index > months {
            return Err(Error::Config(format!(
                "event index {event_index} must lie in 2..={months}"
            )));
        }
        Ok(Self {
            start,
            months,
            event_index,
        })
    }

    /// April 2023 through March 2024 with the revision in October.
    pub fn default_2023() -> Self {
        Self {
            start: YearMonth {
                year: 2023,
                month: 4,
            },
            months: 12,
            event_index: 7,
        }
    }

    pub fn event_month(&self) -> YearMonth {
        self.start.plus(self.event_index as i64 - 1)
    }

    pub fn month_at(&self, t: usize) -> YearMonth {
        self.start.plus(t as i64 - 1)
    }

    /// `t` for a calendar month, if inside the window.
    pub fn index_of_month(&self, ym: YearMonth) -> Option<usize> {
        let d = ym.months_since(self.start);
        (0..self.months as i64).contains(&d).then(|| d as usize + 1)
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.index_of_month(YearMonth::of_date(date))
    }

    /// `l = t − t*`.
    pub fn relative(&self, t: usize) -> i32 {
        t as i32 - self.event_index as i32
    }

    pub fn t_of_relative(&self, l: i32) -> Option<usize> {
        let t = self.event_index as i32 + l;
        (1..=self.months as i32).contains(&t).then_some(t as usize)
    }

    pub fn relative_periods(&self) -> impl Iterator<Item = i32> + '_ {
        (1..=self.months).map(|t| self.relative(t))
    }

    pub fn first_day(&self) -> NaiveDate {
        self.start.first_day()
    }

    /// Exclusive end date.
    pub fn end_day(&self) -> NaiveDate {
        self.start.plus(self.months as i64).first_day()
    }
}

/// Minimum wage revision of one prefecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinWageEntry {
    pub prefecture_id: u32,
    pub old_mw: u32,
    pub new_mw: u32,
    pub event_month: YearMonth,
}

impl MinWageEntry {
    pub fn pct_change(&self) -> f64 {
        self.new_mw as f64 / self.old_mw as f64 - 1.0
    }
}

/// Per-prefecture minimum wage schedule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MinWageSchedule {
    entries: BTreeMap<u32, MinWageEntry>,
}

impl MinWageSchedule {
    pub fn new(entries: impl IntoIterator<Item = MinWageEntry>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, e) in entries.into_iter().enumerate() {
            if e.old_mw == 0 || e.new_mw < e.old_mw {
                return Err(Error::Schema {
                    row: i + 1,
                    column: None,
                    message: format!(
                        "prefecture {}: need new_mw >= old_mw > 0 (got {} -> {})",
                        e.prefecture_id, e.old_mw, e.new_mw
                    ),
                });
            }
            if map.insert(e.prefecture_id, e).is_some() {
                return Err(Error::Schema {
                    row: i + 1,
                    column: Some("prefecture_id".into()),
                    message: format!("duplicate prefecture {}", e.prefecture_id),
                });
            }
        }
        Ok(Self { entries: map })
    }

    pub fn get(&self, prefecture_id: u32) -> Option<&MinWageEntry> {
        self.entries.get(&prefecture_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MinWageEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every revision must take effect in the window's event month.
    pub fn check_window(&self, window: &StudyWindow) -> Result<()> {
        let ev = window.event_month();
        for e in self.iter() {
            if e.event_month != ev {
                return Err(Error::Config(format!(
                    "prefecture {} revises in {} but the window's event month is {ev}",
                    e.prefecture_id, e.event_month
                )));
            }
        }
        Ok(())
    }

    pub fn restricted_to(&self, ids: &[u32]) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| ids.contains(k))
                .map(|(k, v)| (*k, *v))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_slots_partition_the_day() {
        assert_eq!(TimeSlot::of_start(0), TimeSlot::LateNight);
        assert_eq!(TimeSlot::of_start(359), TimeSlot::LateNight);
        assert_eq!(TimeSlot::of_start(360), TimeSlot::Morning);
        assert_eq!(TimeSlot::of_start(719), TimeSlot::Morning);
        assert_eq!(TimeSlot::of_start(720), TimeSlot::Afternoon);
        assert_eq!(TimeSlot::of_start(1080), TimeSlot::Evening);
        assert_eq!(TimeSlot::of_start(1439), TimeSlot::Evening);
        for s in TimeSlot::ALL {
            assert_eq!(TimeSlot::of_start(s.start_minute()), s);
        }
    }

    #[test]
    fn occupation_labels_round_trip() {
        for o in Occupation::ALL {
            assert_eq!(o.label().parse::<Occupation>().unwrap(), o);
        }
        assert!("Chef".parse::<Occupation>().is_err());
    }

    #[test]
    fn window_indexing() {
        let w = StudyWindow::default_2023();
        assert_eq!(w.event_month().to_string(), "2023-10");
        assert_eq!(w.index_of(NaiveDate::from_ymd_opt(2023, 4, 1).unwrap()), Some(1));
        assert_eq!(w.index_of(NaiveDate::from_ymd_opt(2024, 3, 31).unwrap()), Some(12));
        assert_eq!(w.index_of(NaiveDate::from_ymd_opt(2024, 4, 1).unwrap()), None);
        assert_eq!(w.relative(6), -1);
        assert_eq!(w.relative_periods().collect::<Vec<_>>(), (-6..=5).collect::<Vec<_>>());
        assert_eq!(w.t_of_relative(5), Some(12));
        assert_eq!(w.t_of_relative(6), None);
        assert!(StudyWindow::new(w.start, 12, 1).is_err());
        assert!(StudyWindow::new(w.start, 12, 13).is_err());
    }

    #[test]
    fn schedule_rejects_duplicates_and_decreases() {
        let ev = YearMonth::new(2023, 10).unwrap();
        let e = MinWageEntry {
            prefecture_id: 13,
            old_mw: 1072,
            new_mw: 1113,
            event_month: ev,
        };
        assert!(MinWageSchedule::new([e, e]).is_err());
        let bad = MinWageEntry { new_mw: 1000, ..e };
        assert!(MinWageSchedule::new([bad]).is_err());
        let s = MinWageSchedule::new([e]).unwrap();
        assert!(s.check_window(&StudyWindow::default_2023()).is_ok());
    }
}
