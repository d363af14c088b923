//! Weekly sampling schedule anchored on Tuesdays.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("start date {start} is after end date {end}")]
    InvertedRange { start: NaiveDate, end: NaiveDate },
    #[error("no Tuesday between {start} and {end}")]
    EmptyRange { start: NaiveDate, end: NaiveDate },
}

/// Every Tuesday in `[start, end]`, ascending.
pub fn tuesday_schedule(start: NaiveDate, end: NaiveDate) -> Result<Vec<NaiveDate>, ScheduleError> {
    if start > end {
        return Err(ScheduleError::InvertedRange { start, end });
    }
    let offset = (7 + Weekday::Tue.num_days_from_monday() - start.weekday().num_days_from_monday()) % 7;
    let days: Vec<_> = start
        .checked_add_signed(Duration::days(offset.into()))
        .into_iter()
        .flat_map(|first| first.iter_weeks())
        .take_while(|d| *d <= end)
        .collect();
    if days.is_empty() {
        return Err(ScheduleError::EmptyRange { start, end });
    }
    Ok(days)
}

/// The scheduled Tuesdays with their 1-based week indices.
///
/// Week `i` covers the seven days ending on (and including) its Tuesday.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    days: Vec<NaiveDate>,
}

impl Schedule {
    pub fn tuesdays(start: NaiveDate, end: NaiveDate) -> Result<Self, ScheduleError> {
        tuesday_schedule(start, end).map(|days| Self { days })
    }

    /// Number of weeks, `W`.
    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn week_ending(&self, week_index: usize) -> Option<NaiveDate> {
        week_index.checked_sub(1).and_then(|i| self.days.get(i)).copied()
    }

    /// Week index of the scheduled day itself.
    pub fn scheduled_week(&self, date: NaiveDate) -> Option<usize> {
        self.days.binary_search(&date).ok().map(|i| i + 1)
    }

    /// Week whose 7-day window contains `date`.
    pub fn week_of(&self, date: NaiveDate) -> Option<usize> {
        let i = self.days.partition_point(|d| *d < date);
        let tuesday = *self.days.get(i)?;
        (tuesday - date < Duration::days(7)).then_some(i + 1)
    }

    /// The seven days of `week_index`, oldest first.
    pub fn window(&self, week_index: usize) -> Option<impl Iterator<Item = NaiveDate>> {
        let end = self.week_ending(week_index)?;
        Some((0..7).rev().map(move |back| end - Duration::days(back)))
    }
}
