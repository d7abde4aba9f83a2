use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One student's decision in one group-round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogRow {
    pub session: u32,
    pub round: u32,
    pub group: u32,
    /// 1-based within the group.
    pub student_id: u32,
    /// Label of the neighborhood school, if any.
    pub neighborhood: Option<String>,
    pub type_label: String,
    pub utilities: Vec<u32>,
    pub lottery_rank: u32,
    /// School labels, best first; empty when no decision was recorded.
    pub rol: Vec<String>,
    /// Recorded assignment (`Some(None)` is "none") and payoff.
    pub outcome: Option<(Option<String>, u32)>,
}

/// A decision log. All rows share the same number of schools and either
/// all or none carry outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecisionLog {
    pub schools: usize,
    pub rows: Vec<LogRow>,
}

const UNMATCHED: &str = "none";

impl DecisionLog {
    pub fn new(schools: usize, rows: Vec<LogRow>) -> Self {
        DecisionLog { schools, rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_outcomes(&self) -> bool {
        self.rows.first().is_some_and(|r| r.outcome.is_some())
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "session",
            "round",
            "group",
            "student_id",
            "neighborhood_school",
            "type_label",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend((1..=self.schools).map(|k| format!("u{k}")));
        h.push("lottery_rank".into());
        h.push("rol".into());
        if self.has_outcomes() {
            h.push("assigned".into());
            h.push("payoff".into());
        }
        h
    }

    /// Sorts rows by session, round, group and student.
    pub fn sort(&mut self) {
        self.rows
            .sort_by_key(|r| (r.session, r.round, r.group, r.student_id));
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let outcomes = self.has_outcomes();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.header()).map_err(csv_err)?;
        for (k, r) in self.rows.iter().enumerate() {
            if r.utilities.len() != self.schools || r.outcome.is_some() != outcomes {
                return Err(Error::Schema {
                    row: k + 1,
                    message: "row shape differs from the log".into(),
                });
            }
            let mut rec = vec![
                r.session.to_string(),
                r.round.to_string(),
                r.group.to_string(),
                r.student_id.to_string(),
                r.neighborhood.clone().unwrap_or_default(),
                r.type_label.clone(),
            ];
            rec.extend(r.utilities.iter().map(u32::to_string));
            rec.push(r.lottery_rank.to_string());
            rec.push(r.rol.join("|"));
            if let Some((assigned, payoff)) = &r.outcome {
                rec.push(assigned.clone().unwrap_or_else(|| UNMATCHED.into()));
                rec.push(payoff.to_string());
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        DecisionLog::read_csv(std::fs::File::open(path)?)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        DecisionLog::read_csv(text.as_bytes())
    }

    /// Parses a log; row numbers in errors count data rows from 1.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = reader.records();
        let header = match records.next() {
            None => return Ok(DecisionLog::default()),
            Some(h) => h.map_err(csv_err)?,
        };
        let names: Vec<&str> = header.iter().collect();
        let schema = |message: String| Error::Schema { row: 0, message };
        let fixed = [
            "session",
            "round",
            "group",
            "student_id",
            "neighborhood_school",
            "type_label",
        ];
        if names.len() < fixed.len() || names[..fixed.len()] != fixed {
            return Err(schema(format!(
                "header must start with {}",
                fixed.join(",")
            )));
        }
        let schools = names[fixed.len()..]
            .iter()
            .take_while(|n| n.starts_with('u') && n[1..].parse::<usize>().is_ok())
            .count();
        if schools == 0 {
            return Err(schema("no utility columns".into()));
        }
        for (k, n) in names[fixed.len()..fixed.len() + schools].iter().enumerate() {
            if *n != format!("u{}", k + 1) {
                return Err(schema(format!("utility column {n} out of order")));
            }
        }
        let rest = &names[fixed.len() + schools..];
        let outcomes = match rest {
            ["lottery_rank", "rol"] => false,
            ["lottery_rank", "rol", "assigned", "payoff"] => true,
            _ => {
                return Err(schema(
                    "expected lottery_rank,rol and optionally assigned,payoff".into(),
                ))
            }
        };
        let width = names.len();
        let mut rows = Vec::new();
        for (k, rec) in records.enumerate() {
            let row = k + 1;
            let rec = rec.map_err(csv_err)?;
            let bad = |message: String| Error::Schema { row, message };
            if rec.len() != width {
                return Err(bad(format!("{} fields, expected {width}", rec.len())));
            }
            let num = |i: usize| -> Result<u32> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("{} is not a number: {:?}", names[i], &rec[i])))
            };
            let utilities = (0..schools)
                .map(|s| num(fixed.len() + s))
                .collect::<Result<Vec<_>>>()?;
            let rank_col = fixed.len() + schools;
            let rol_text = rec[rank_col + 1].trim();
            let rol = if rol_text.is_empty() {
                Vec::new()
            } else {
                rol_text.split('|').map(|s| s.trim().to_string()).collect()
            };
            let outcome = if outcomes {
                let a = rec[rank_col + 2].trim();
                let assigned = (a != UNMATCHED).then(|| a.to_string());
                if assigned.as_deref() == Some("") {
                    return Err(bad("assigned must be a school label or none".into()));
                }
                Some((assigned, num(rank_col + 3)?))
            } else {
                None
            };
            let hood = rec[4].trim();
            rows.push(LogRow {
                session: num(0)?,
                round: num(1)?,
                group: num(2)?,
                student_id: num(3)?,
                neighborhood: (!hood.is_empty()).then(|| hood.to_string()),
                type_label: rec[5].trim().to_string(),
                utilities,
                lottery_rank: num(rank_col)?,
                rol,
                outcome,
            });
        }
        Ok(DecisionLog { schools, rows })
    }

    /// Row indices grouped by (session, round, group), in sorted order.
    pub fn group_indices(&self) -> Vec<((u32, u32, u32), Vec<usize>)> {
        let mut map: std::collections::BTreeMap<(u32, u32, u32), Vec<usize>> =
            std::collections::BTreeMap::new();
        for (k, r) in self.rows.iter().enumerate() {
            map.entry((r.session, r.round, r.group))
                .or_default()
                .push(k);
        }
        map.into_iter().collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.record() as usize);
    Error::Schema {
        row,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "session,round,group,student_id,neighborhood_school,type_label,u1,u2,u3,lottery_rank,rol,assigned,payoff\n\
1,1,1,1,s1,v,90,40,20,6,s1,s1,90\n\
1,1,1,4,,v',70,60,20,2,s2|s3,none,0\n";

    #[test]
    fn roundtrip_is_byte_identical() {
        let log = DecisionLog::from_csv_str(SAMPLE).unwrap();
        assert_eq!(log.schools, 3);
        assert_eq!(log.rows[0].neighborhood.as_deref(), Some("s1"));
        assert_eq!(log.rows[1].rol, vec!["s2", "s3"]);
        assert_eq!(log.rows[1].outcome, Some((None, 0)));
        assert_eq!(log.to_csv_string().unwrap(), SAMPLE);
    }

    #[test]
    fn schema_errors_carry_rows() {
        let bad = SAMPLE.replace("1,1,1,4,", "1,1,x,4,");
        match DecisionLog::from_csv_str(&bad) {
            Err(Error::Schema { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(DecisionLog::from_csv_str("session,round\n").is_err());
        let missing = SAMPLE.replace(",s2|s3,none,0", ",s2|s3,none");
        assert!(matches!(
            DecisionLog::from_csv_str(&missing),
            Err(Error::Schema { row: 2, .. })
        ));
    }

    #[test]
    fn empty_input_is_empty_log() {
        assert!(DecisionLog::from_csv_str("").unwrap().is_empty());
    }
}
