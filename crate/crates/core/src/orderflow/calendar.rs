use std::collections::BTreeMap;
use std::io::Read;

use chrono::{Datelike, NaiveDate, Weekday};

use super::types::{format_time_of_day, parse_time_of_day, Timestamp};
use crate::error::{Error, Result};

/// Trading-session phase of an instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionPhase {
    /// Opening call auction; orders accumulate unexecuted.
    Call,
    /// Between the call auction and continuous open.
    Cooling,
    Continuous,
    Closed,
}

/// Phase boundaries for one day, as centiseconds since midnight.
///
/// Each phase is a half-open interval; an instant on a boundary belongs to
/// the later phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayPhases {
    pub call_open: u32,
    pub call_close: u32,
    pub morning_open: u32,
    pub morning_close: u32,
    pub afternoon_open: u32,
    pub afternoon_close: u32,
}

const fn hm(h: u32, m: u32) -> u32 {
    (h * 60 + m) * 60 * 100
}

impl Default for DayPhases {
    fn default() -> Self {
        DayPhases {
            call_open: hm(9, 15),
            call_close: hm(9, 25),
            morning_open: hm(9, 30),
            morning_close: hm(11, 30),
            afternoon_open: hm(13, 0),
            afternoon_close: hm(15, 0),
        }
    }
}

impl DayPhases {
    pub fn validate(&self) -> Result<()> {
        let b = [
            self.call_open,
            self.call_close,
            self.morning_open,
            self.morning_close,
            self.afternoon_open,
            self.afternoon_close,
        ];
        let ordered = self.call_open < self.call_close
            && self.call_close <= self.morning_open
            && self.morning_open < self.morning_close
            && self.morning_close <= self.afternoon_open
            && self.afternoon_open < self.afternoon_close;
        if !ordered || self.afternoon_close > hm(24, 0) {
            return Err(Error::Calendar(format!(
                "phase boundaries out of order: {}",
                b.map(format_time_of_day).join(" ")
            )));
        }
        Ok(())
    }

    pub fn phase_at(&self, centis: u32) -> SessionPhase {
        if centis < self.call_open {
            SessionPhase::Closed
        } else if centis < self.call_close {
            SessionPhase::Call
        } else if centis < self.morning_open {
            SessionPhase::Cooling
        } else if centis < self.morning_close {
            SessionPhase::Continuous
        } else if centis < self.afternoon_open {
            SessionPhase::Closed
        } else if centis < self.afternoon_close {
            SessionPhase::Continuous
        } else {
            SessionPhase::Closed
        }
    }

    /// Intervals during which orders may be submitted (call and both
    /// continuous sessions), in order.
    pub fn order_windows(&self) -> [(u32, u32); 3] {
        [
            (self.call_open, self.call_close),
            (self.morning_open, self.morning_close),
            (self.afternoon_open, self.afternoon_close),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TradingCalendar {
    days: BTreeMap<NaiveDate, DayPhases>,
}

impl TradingCalendar {
    pub fn new(days: impl IntoIterator<Item = (NaiveDate, DayPhases)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (date, phases) in days {
            phases.validate()?;
            if map.insert(date, phases).is_some() {
                return Err(Error::Calendar(format!("duplicate trading day {date}")));
            }
        }
        Ok(TradingCalendar { days: map })
    }

    /// `count` consecutive weekdays starting at `start`, default phases.
    pub fn weekdays(start: NaiveDate, count: usize) -> Self {
        let days = start
            .iter_days()
            .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
            .take(count)
            .map(|d| (d, DayPhases::default()))
            .collect();
        TradingCalendar { days }
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        self.days.contains_key(&date)
    }

    pub fn phases(&self, date: NaiveDate) -> Result<&DayPhases> {
        self.days.get(&date).ok_or(Error::NonTradingDay(date))
    }

    pub fn days(&self) -> impl Iterator<Item = (NaiveDate, &DayPhases)> + '_ {
        self.days.iter().map(|(d, p)| (*d, p))
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn first_day(&self) -> Option<NaiveDate> {
        self.days.keys().next().copied()
    }

    pub fn last_day(&self) -> Option<NaiveDate> {
        self.days.keys().next_back().copied()
    }

    /// Close of the final session of the period; virtual close-outs are
    /// stamped here.
    pub fn period_end(&self) -> Option<Timestamp> {
        self.days
            .iter()
            .next_back()
            .map(|(d, p)| Timestamp::new(*d, p.afternoon_close))
    }

    /// Read a calendar CSV: a `date` column plus optional per-day overrides
    /// `call_open,call_close,morning_open,morning_close,afternoon_open,afternoon_close`
    /// (blank cells keep the default).
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let date_col = col("date").ok_or_else(|| Error::MissingColumn("date".into()))?;
        let overrides = [
            "call_open",
            "call_close",
            "morning_open",
            "morning_close",
            "afternoon_open",
            "afternoon_close",
        ]
        .map(col);

        let mut days = Vec::new();
        for (idx, record) in rdr.records().enumerate() {
            let line = idx as u64 + 2;
            let record = record?;
            let raw_date = record.get(date_col).unwrap_or("");
            let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
                .map_err(|_| Error::record(line, format!("bad date `{raw_date}`")))?;
            let mut phases = DayPhases::default();
            let slots = [
                &mut phases.call_open,
                &mut phases.call_close,
                &mut phases.morning_open,
                &mut phases.morning_close,
                &mut phases.afternoon_open,
                &mut phases.afternoon_close,
            ];
            for (slot, column) in slots.into_iter().zip(overrides) {
                if let Some(value) = column.and_then(|c| record.get(c)).filter(|v| !v.is_empty()) {
                    *slot =
                        parse_time_of_day(value).map_err(|e| Error::record(line, e.to_string()))?;
                }
            }
            phases
                .validate()
                .map_err(|e| Error::record(line, e.to_string()))?;
            days.push((date, phases));
        }
        Self::new(days)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "date,call_open,call_close,morning_open,morning_close,afternoon_open,afternoon_close\n",
        );
        for (date, p) in &self.days {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                date.format("%Y-%m-%d"),
                format_time_of_day(p.call_open),
                format_time_of_day(p.call_close),
                format_time_of_day(p.morning_open),
                format_time_of_day(p.morning_close),
                format_time_of_day(p.afternoon_open),
                format_time_of_day(p.afternoon_close),
            ));
        }
        out
    }
}

/// Phase of `t` under `cal`.
pub fn session_phase(t: Timestamp, cal: &TradingCalendar) -> Result<SessionPhase> {
    Ok(cal.phases(t.date())?.phase_at(t.centis_of_day()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2003, 6, 10).unwrap()
    }

    fn cal() -> TradingCalendar {
        TradingCalendar::new([(day(), DayPhases::default())]).unwrap()
    }

    fn at(h: u32, m: u32, s: u32, c: u32) -> Timestamp {
        Timestamp::from_hms(day(), h, m, s, c)
    }

    #[test]
    fn phase_examples() {
        let cal = cal();
        assert_eq!(
            session_phase(at(9, 20, 0, 0), &cal).unwrap(),
            SessionPhase::Call
        );
        assert_eq!(
            session_phase(at(12, 0, 0, 0), &cal).unwrap(),
            SessionPhase::Closed
        );
        assert_eq!(
            session_phase(at(13, 0, 0, 0), &cal).unwrap(),
            SessionPhase::Continuous
        );
    }

    #[test]
    fn boundaries_belong_to_later_phase() {
        let cal = cal();
        assert_eq!(
            session_phase(at(9, 15, 0, 0), &cal).unwrap(),
            SessionPhase::Call
        );
        assert_eq!(
            session_phase(at(9, 25, 0, 0), &cal).unwrap(),
            SessionPhase::Cooling
        );
        assert_eq!(
            session_phase(at(9, 24, 59, 99), &cal).unwrap(),
            SessionPhase::Call
        );
        assert_eq!(
            session_phase(at(9, 30, 0, 0), &cal).unwrap(),
            SessionPhase::Continuous
        );
        assert_eq!(
            session_phase(at(11, 30, 0, 0), &cal).unwrap(),
            SessionPhase::Closed
        );
        assert_eq!(
            session_phase(at(15, 0, 0, 0), &cal).unwrap(),
            SessionPhase::Closed
        );
        assert_eq!(
            session_phase(at(14, 59, 59, 99), &cal).unwrap(),
            SessionPhase::Continuous
        );
    }

    #[test]
    fn non_trading_day_is_an_error() {
        let other = NaiveDate::from_ymd_opt(2003, 6, 11).unwrap();
        let err = session_phase(Timestamp::from_hms(other, 10, 0, 0, 0), &cal()).unwrap_err();
        assert!(err.to_string().contains("non-trading day"));
    }

    #[test]
    fn csv_with_overrides() {
        let src = "date,call_open,morning_close\n2003-01-02,,\n2003-01-03,09:10:00,11:00:00\n";
        let cal = TradingCalendar::from_csv(src.as_bytes()).unwrap();
        assert_eq!(cal.len(), 2);
        let p = cal
            .phases(NaiveDate::from_ymd_opt(2003, 1, 3).unwrap())
            .unwrap();
        assert_eq!(p.call_open, hm(9, 10));
        assert_eq!(p.morning_close, hm(11, 0));
        assert_eq!(p.afternoon_close, hm(15, 0));
        let back = TradingCalendar::from_csv(cal.to_csv().as_bytes()).unwrap();
        assert_eq!(back, cal);
    }

    #[test]
    fn disordered_phases_rejected() {
        let src = "date,call_close\n2003-01-02,09:35:00\n";
        assert!(TradingCalendar::from_csv(src.as_bytes()).is_err());
    }

    #[test]
    fn weekdays_skip_weekends() {
        let cal = TradingCalendar::weekdays(NaiveDate::from_ymd_opt(2003, 1, 3).unwrap(), 3);
        let days: Vec<_> = cal.days().map(|(d, _)| d.to_string()).collect();
        assert_eq!(days, ["2003-01-03", "2003-01-06", "2003-01-07"]);
    }
}
