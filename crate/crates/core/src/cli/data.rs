use std::path::Path;

use crate::hdm::ContingencyCounts;
use crate::inference::{Group, ObservedGroups};
use crate::{Error, Result};

/// Table 1 of the rat-tumor study: 70 historical groups in printed
/// row-major order, then the current experiment.
pub const RAT_TUMOR_CSV: &str = include_str!("../../data/rat_tumor.csv");

pub fn load_rat_tumor() -> ObservedGroups {
    parse_groups_csv(RAT_TUMOR_CSV).expect("embedded rat-tumor data is valid")
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| Error::Parse { line, reason: format!("{what} {s:?}: {e}") })
}

fn records(text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse { line: 1, reason: "empty input".into() })?;
    let cols: Vec<&str> = first.trim_end_matches('\r').split(',').map(str::trim).collect();
    if cols != header {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header {:?}, found {first:?}", header.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

/// Parses `y,n` CSV text. Every error carries its 1-based line number.
pub fn parse_groups_csv(text: &str) -> Result<ObservedGroups> {
    let mut groups = Vec::new();
    for (line, f) in records(text, &["y", "n"])? {
        let y: u64 = parse_field(&f[0], line, "y")?;
        let n: u64 = parse_field(&f[1], line, "n")?;
        if n == 0 {
            return Err(Error::Parse { line, reason: "n must be at least 1".into() });
        }
        if y > n {
            return Err(Error::Parse { line, reason: format!("y = {y} exceeds n = {n}") });
        }
        groups.push(Group { y, n });
    }
    if groups.is_empty() {
        return Err(Error::Parse { line: 2, reason: "no groups".into() });
    }
    ObservedGroups::new(groups, None)
}

pub fn load_groups_csv(path: &Path) -> Result<ObservedGroups> {
    parse_groups_csv(&std::fs::read_to_string(path)?)
}

pub fn groups_to_csv(data: &ObservedGroups) -> String {
    let mut s = String::from("y,n\n");
    for g in data.groups() {
        s.push_str(&format!("{},{}\n", g.y, g.n));
    }
    s
}

/// Parses long-form `x,y,count` CSV with 0-based states.
pub fn parse_counts_csv(text: &str) -> Result<ContingencyCounts> {
    let mut recs = Vec::new();
    for (line, f) in records(text, &["x", "y", "count"])? {
        recs.push((
            parse_field::<usize>(&f[0], line, "x")?,
            parse_field::<usize>(&f[1], line, "y")?,
            parse_field::<u64>(&f[2], line, "count")?,
        ));
    }
    ContingencyCounts::from_long(&recs)
}

pub fn load_counts_csv(path: &Path) -> Result<ContingencyCounts> {
    parse_counts_csv(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rat_table() {
        let d = load_rat_tumor();
        assert_eq!(d.len(), 71);
        assert_eq!(d.groups()[0], Group { y: 0, n: 20 });
        assert_eq!(d.groups()[69], Group { y: 9, n: 24 });
        assert_eq!(d.groups()[70], Group { y: 4, n: 14 });
        assert_eq!(parse_groups_csv(&groups_to_csv(&d)).unwrap(), d);
    }

    #[test]
    fn groups_parsing() {
        assert_eq!(parse_groups_csv("y,n\n4,14\n").unwrap().groups(), &[Group { y: 4, n: 14 }]);
        assert_eq!(parse_groups_csv("y,n\r\n4,14").unwrap().len(), 1);
        for (text, line) in [
            ("y,n\n15,14\n", 2),
            ("y,n\n1,4\n-1,4\n", 3),
            ("y,n\n1,x\n", 2),
            ("y,n\n1,4,5\n", 2),
            ("y,n\n1,0\n", 2),
            ("n,y\n1,4\n", 1),
            ("", 1),
        ] {
            match parse_groups_csv(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn counts_parsing() {
        let c = parse_counts_csv("x,y,count\n0,0,3\n1,0,7\n0,1,2\n1,1,2\n").unwrap();
        assert_eq!(c.columns(), &[vec![3, 7], vec![2, 2]]);
        assert!(matches!(parse_counts_csv("x,y,count\n0,0,a\n"), Err(Error::Parse { line: 2, .. })));
    }
}
