//! Tabular data model with suppression marks.
//!
//! A [`Relation`] is an ordered schema plus rows of [`Cell`]s. A cell either
//! carries an opaque string value or the suppression mark ([`Cell::Star`]).
//! Row order is identity: row `i` of an anonymized relation is the image of
//! row `i` of the original.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STAR_TOKEN: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Value(String),
    Star,
}

impl Cell {
    pub fn value(v: impl Into<String>) -> Self {
        Cell::Value(v.into())
    }

    pub fn is_star(&self) -> bool {
        matches!(self, Cell::Star)
    }

    pub fn as_value(&self) -> Option<&str> {
        match self {
            Cell::Value(v) => Some(v),
            Cell::Star => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => f.write_str(v),
            Cell::Star => f.write_str("★"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    schema: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Relation {
    /// Builds a relation, checking that attribute names are unique and
    /// non-empty and that every row matches the schema width.
    pub fn new(schema: Vec<String>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in &schema {
            if name.is_empty() {
                return Err(Error::Ingest {
                    row: None,
                    message: "empty attribute name".into(),
                });
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Ingest {
                    row: None,
                    message: format!("duplicate attribute `{name}`"),
                });
            }
        }
        if let Some(i) = rows.iter().position(|r| r.len() != schema.len()) {
            return Err(Error::Ingest {
                row: Some(i),
                message: format!(
                    "row has {} cells, schema has {}",
                    rows[i].len(),
                    schema.len()
                ),
            });
        }
        Ok(Self { schema, rows })
    }

    /// Convenience constructor from string literals; `star` cells become
    /// [`Cell::Star`].
    pub fn from_strs(schema: &[&str], rows: &[&[&str]], star: &str) -> Result<Self> {
        Self::new(
            schema.iter().map(|s| s.to_string()).collect(),
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|c| {
                            if *c == star {
                                Cell::Star
                            } else {
                                Cell::value(*c)
                            }
                        })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, attribute: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|a| a == attribute)
            .ok_or_else(|| Error::Schema(attribute.to_string()))
    }

    pub fn has_stars(&self) -> bool {
        self.rows.iter().flatten().any(Cell::is_star)
    }

    /// Number of rows in which every `(A, a)` pair of the target holds.
    /// A star never matches a concrete value.
    pub fn count_target(&self, target: &TargetValue) -> Result<usize> {
        let cols = target
            .iter()
            .map(|(a, v)| Ok((self.column_index(a)?, v)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .rows
            .iter()
            .filter(|row| cols.iter().all(|(c, v)| row[*c].as_value() == Some(*v)))
            .count())
    }

    pub fn count_stars(&self, attribute: &str) -> Result<usize> {
        let c = self.column_index(attribute)?;
        Ok(self.rows.iter().filter(|r| r[c].is_star()).count())
    }

    /// Total number of suppressed cells.
    pub fn info_loss(&self) -> usize {
        self.rows.iter().flatten().filter(|c| c.is_star()).count()
    }

    /// Every row's projection onto `qi` (stars compared as ordinary symbols)
    /// is shared by at least `k` rows.
    pub fn is_k_anonymous(&self, qi: &QiSet, k: usize) -> Result<bool> {
        let cols = qi
            .iter()
            .map(|a| self.column_index(a))
            .collect::<Result<Vec<_>>>()?;
        let mut classes: HashMap<Vec<&Cell>, usize> = HashMap::new();
        for row in &self.rows {
            *classes
                .entry(cols.iter().map(|&c| &row[c]).collect())
                .or_default() += 1;
        }
        Ok(classes.values().all(|&n| n >= k))
    }

    /// Reads CSV with a mandatory header row. Cells equal to `star_token`
    /// become [`Cell::Star`].
    pub fn from_csv<R: Read>(input: R, star_token: &str) -> Result<Self> {
        if star_token.is_empty() {
            return Err(Error::Ingest {
                row: None,
                message: "star token must be non-empty".into(),
            });
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(input);
        let header = reader.headers().map_err(csv_error)?.clone();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(Error::Ingest {
                row: None,
                message: "missing header row".into(),
            });
        }
        let schema: Vec<String> = header.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(csv_error)?;
            if record.len() != schema.len() {
                return Err(Error::Ingest {
                    row: Some(i),
                    message: format!(
                        "row has {} fields, header has {}",
                        record.len(),
                        schema.len()
                    ),
                });
            }
            rows.push(
                record
                    .iter()
                    .map(|c| {
                        if c == star_token {
                            Cell::Star
                        } else {
                            Cell::value(c)
                        }
                    })
                    .collect(),
            );
        }
        Self::new(schema, rows)
    }

    pub fn from_csv_str(text: &str, star_token: &str) -> Result<Self> {
        Self::from_csv(text.as_bytes(), star_token)
    }

    pub fn write_csv<W: Write>(&self, out: W, star_token: &str) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.schema).map_err(csv_error)?;
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|c| match c {
                    Cell::Value(v) => v.as_str(),
                    Cell::Star => star_token,
                }))
                .map_err(csv_error)?;
        }
        writer.flush().map_err(|e| Error::Ingest {
            row: None,
            message: e.to_string(),
        })
    }

    pub fn to_csv_string(&self, star_token: &str) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, star_token)?;
        String::from_utf8(buf).map_err(|e| Error::Ingest {
            row: None,
            message: e.to_string(),
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    let row = e
        .position()
        .map(|p| p.record() as usize)
        .and_then(|r| r.checked_sub(1));
    Error::Ingest {
        row,
        message: e.to_string(),
    }
}

/// `original ⊑ candidate`: same shape, and every cell of `candidate` either
/// equals the original cell or is a star.
pub fn refines(original: &Relation, candidate: &Relation) -> bool {
    original.schema == candidate.schema
        && original.rows.len() == candidate.rows.len()
        && original.rows.iter().zip(&candidate.rows).all(|(r, c)| {
            r.iter()
                .zip(c)
                .all(|(orig, cand)| cand.is_star() || orig == cand)
        })
}

/// A conjunction of `attribute = value` pairs, the subject of a count.
///
/// Stored sorted by attribute, so two targets with the same pairs compare
/// equal regardless of how they were written.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(
    try_from = "BTreeMap<String, String>",
    into = "BTreeMap<String, String>"
)]
pub struct TargetValue(BTreeMap<String, String>);

impl TargetValue {
    pub fn new<I, A, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, V)>,
        A: Into<String>,
        V: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (a, v) in pairs {
            let a = a.into();
            if a.is_empty() {
                return Err(Error::Contract("empty attribute in target value".into()));
            }
            if map.insert(a.clone(), v.into()).is_some() {
                return Err(Error::Contract(format!(
                    "attribute `{a}` repeated in target value"
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::Contract("target value must be non-empty".into()));
        }
        Ok(Self(map))
    }

    /// Single-attribute target `A[a]`.
    pub fn single(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Self(BTreeMap::from([(attribute.into(), value.into())]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(a, v)| (a.as_str(), v.as_str()))
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn get(&self, attribute: &str) -> Option<&str> {
        self.0.get(attribute).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &TargetValue) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().all(|(a, v)| other.0.get(a) == Some(v))
    }

    pub fn is_strict_subset(&self, other: &TargetValue) -> bool {
        self.0.len() < other.0.len() && self.is_subset(other)
    }
}

impl TryFrom<BTreeMap<String, String>> for TargetValue {
    type Error = Error;

    fn try_from(map: BTreeMap<String, String>) -> Result<Self> {
        TargetValue::new(map)
    }
}

impl From<TargetValue> for BTreeMap<String, String> {
    fn from(t: TargetValue) -> Self {
        t.0
    }
}

impl fmt::Display for TargetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}=\"{}\"", escape(v))?;
        }
        Ok(())
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Quasi-identifier attributes over which k-anonymity is enforced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QiSet(Vec<String>);

impl QiSet {
    pub fn new<I, S>(attributes: I, schema: &[String]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut attrs: Vec<String> = Vec::new();
        for a in attributes {
            let a = a.into();
            if !schema.contains(&a) {
                return Err(Error::Schema(a));
            }
            if !attrs.contains(&a) {
                attrs.push(a);
            }
        }
        if attrs.is_empty() {
            return Err(Error::Contract(
                "quasi-identifier set must be non-empty".into(),
            ));
        }
        Ok(Self(attrs))
    }

    /// Every attribute of the schema.
    pub fn all(schema: &[String]) -> Result<Self> {
        Self::new(schema.iter().cloned(), schema)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn contains(&self, attribute: &str) -> bool {
        self.0.iter().any(|a| a == attribute)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(schema: &[&str], rows: &[&[&str]]) -> Relation {
        Relation::from_strs(schema, rows, "*").unwrap()
    }

    #[test]
    fn header_only_csv_is_empty_relation() {
        let r = Relation::from_csv_str("GEN,ETH\n", "*").unwrap();
        assert_eq!(r.schema(), ["GEN", "ETH"]);
        assert!(r.is_empty());
        assert_eq!(r.info_loss(), 0);
    }

    #[test]
    fn star_token_becomes_star() {
        let r = Relation::from_csv_str("GEN,ETH\n*,Asian\n", "*").unwrap();
        assert_eq!(r.rows()[0], vec![Cell::Star, Cell::value("Asian")]);
        let r = Relation::from_csv_str("GEN,ETH\n?,Asian\n", "?").unwrap();
        assert!(r.rows()[0][0].is_star());
    }

    #[test]
    fn ingest_errors() {
        assert!(matches!(
            Relation::from_csv_str("", "*"),
            Err(Error::Ingest { .. })
        ));
        assert!(matches!(
            Relation::from_csv_str("A,A\nx,y\n", "*"),
            Err(Error::Ingest { .. })
        ));
        assert_eq!(
            Relation::from_csv_str("A,B\nx,y\nz\n", "*").unwrap_err(),
            Error::Ingest {
                row: Some(1),
                message: "row has 1 fields, header has 2".into()
            }
        );
    }

    #[test]
    fn quoted_fields_round_trip() {
        let text = "NAME,NOTE\n\"Smith, J\",\"said \"\"hi\"\"\"\n*,x\n";
        let r = Relation::from_csv_str(text, "*").unwrap();
        assert_eq!(r.rows()[0][0], Cell::value("Smith, J"));
        assert_eq!(r.rows()[0][1], Cell::value("said \"hi\""));
        let back = Relation::from_csv_str(&r.to_csv_string("*").unwrap(), "*").unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn count_target_multi_attribute() {
        let r = rel(
            &["GEN", "ETH"],
            &[
                &["F", "Asian"],
                &["F", "Asian"],
                &["M", "Asian"],
                &["F", "White"],
                &["*", "Asian"],
                &["F", "*"],
            ],
        );
        let tv = TargetValue::new([("GEN", "F"), ("ETH", "Asian")]).unwrap();
        assert_eq!(r.count_target(&tv).unwrap(), 2);
        assert_eq!(
            r.count_target(&TargetValue::single("ETH", "Black"))
                .unwrap(),
            0
        );
        assert_eq!(
            r.count_target(&TargetValue::single("CTY", "x")),
            Err(Error::Schema("CTY".into()))
        );
    }

    #[test]
    fn count_stars_column() {
        let r = rel(&["A"], &[&["*"], &["a"], &["*"], &["b"]]);
        assert_eq!(r.count_stars("A").unwrap(), 2);
        assert!(r.count_stars("B").is_err());
        assert_eq!(rel(&["A"], &[&["a"]]).count_stars("A").unwrap(), 0);
    }

    #[test]
    fn refinement_is_suppression_only() {
        let r = rel(&["A", "B"], &[&["a", "b"]]);
        assert!(refines(&r, &r));
        assert!(refines(&r, &rel(&["A", "B"], &[&["a", "*"]])));
        assert!(!refines(&r, &rel(&["A", "B"], &[&["c", "b"]])));
        assert!(!refines(&r, &rel(&["A", "C"], &[&["a", "b"]])));
        assert!(!refines(&r, &rel(&["A", "B"], &[])));
        // a star in the original cannot be "unsuppressed"
        assert!(!refines(&rel(&["A"], &[&["*"]]), &rel(&["A"], &[&["a"]])));
    }

    #[test]
    fn k_anonymity_counts_projection_classes() {
        let r = rel(&["A", "B"], &[&["a", "*"], &["a", "*"], &["a", "b"]]);
        let qi = QiSet::all(r.schema()).unwrap();
        assert!(r.is_k_anonymous(&qi, 1).unwrap());
        assert!(!r.is_k_anonymous(&qi, 2).unwrap());
        let only_a = QiSet::new(["A"], r.schema()).unwrap();
        assert!(r.is_k_anonymous(&only_a, 3).unwrap());
        assert!(!r.is_k_anonymous(&only_a, 4).unwrap());
    }

    #[test]
    fn info_loss_counts_all_stars() {
        assert_eq!(rel(&["A", "B"], &[&["*", "a"], &["b", "*"]]).info_loss(), 2);
    }

    #[test]
    fn qi_set_rejects_unknown_and_empty() {
        let schema = vec!["A".to_string()];
        assert!(QiSet::new(["B"], &schema).is_err());
        assert!(QiSet::new(Vec::<String>::new(), &schema).is_err());
    }

    #[test]
    fn target_subset_relations() {
        let small = TargetValue::single("CTY", "Calgary");
        let big = TargetValue::new([("ETH", "Cauc"), ("CTY", "Calgary")]).unwrap();
        assert!(small.is_strict_subset(&big));
        assert!(!big.is_subset(&small));
        assert!(!TargetValue::single("CTY", "Edmonton").is_subset(&big));
        assert!(TargetValue::new([("A", "x"), ("A", "y")]).is_err());
    }
}
